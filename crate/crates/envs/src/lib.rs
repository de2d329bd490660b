//! Deterministic puzzle environments for subgoal search.

pub mod gridworld;
pub mod rubik;
pub mod sokoban;
