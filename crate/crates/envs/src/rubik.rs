//! 3×3×3 Rubik's Cube as a sticker permutation puzzle under the quarter-turn metric.
//!
//! Faces are stored in the order U, L, F, R, B, D, nine stickers each, row-major
//! as seen from outside the face (U with B on top, D with F on top, side faces
//! with U on top). Centers sit at 1-based positions 5, 14, 23, 32, 41, 50.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::sync::OnceLock;

use ksubs_core::{Environment, StateCodec};
use rand::Rng;

pub const STICKERS: usize = 54;
pub const NUM_MOVES: usize = 12;
pub const FACE_LETTERS: [char; 6] = ['U', 'L', 'F', 'R', 'B', 'D'];
/// Colour of each face when solved.
pub const SOLVED_COLORS: [u8; 6] = *b"wogrby";
pub const COLOR_TOKENS: [u8; 6] = *b"bgorwy";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CubeState {
    pub stickers: [u8; STICKERS],
}

impl CubeState {
    pub fn solved() -> Self {
        let mut stickers = [0u8; STICKERS];
        for (i, s) in stickers.iter_mut().enumerate() {
            *s = SOLVED_COLORS[i / 9];
        }
        Self { stickers }
    }

    pub fn is_solved(&self) -> bool {
        self.stickers
            .chunks(9)
            .all(|face| face.iter().all(|&c| c == face[4]))
    }

    pub fn apply(&self, mv: Move) -> Self {
        let perm = &move_tables()[mv.index()];
        let mut stickers = [0u8; STICKERS];
        for (dst, &src) in perm.iter().enumerate() {
            stickers[dst] = self.stickers[src as usize];
        }
        Self { stickers }
    }

    pub fn apply_all<'a, I: IntoIterator<Item = &'a Move>>(&self, moves: I) -> Self {
        moves.into_iter().fold(*self, |s, &m| s.apply(m))
    }

    pub fn serialize(&self) -> String {
        self.stickers.iter().map(|&c| c as char).collect()
    }

    /// Accepts 54 colour tokens, with or without whitespace between them.
    pub fn parse(text: &str) -> Result<Self, CubeParseError> {
        let tokens: Vec<u8> = text.bytes().filter(|b| !b.is_ascii_whitespace()).collect();
        if tokens.len() != STICKERS {
            return Err(CubeParseError::Length(tokens.len()));
        }
        let mut counts = [0usize; 6];
        for (i, &t) in tokens.iter().enumerate() {
            match COLOR_TOKENS.iter().position(|&c| c == t) {
                Some(c) => counts[c] += 1,
                None => return Err(CubeParseError::Token { pos: i + 1, token: t as char }),
            }
        }
        if let Some(c) = counts.iter().position(|&n| n != 9) {
            return Err(CubeParseError::Count {
                color: COLOR_TOKENS[c] as char,
                count: counts[c],
            });
        }
        for f in 0..6 {
            if tokens[f * 9 + 4] != SOLVED_COLORS[f] {
                return Err(CubeParseError::Center {
                    pos: f * 9 + 5,
                    found: tokens[f * 9 + 4] as char,
                });
            }
        }
        let mut stickers = [0u8; STICKERS];
        stickers.copy_from_slice(&tokens);
        Ok(Self { stickers })
    }
}

impl Default for CubeState {
    fn default() -> Self {
        Self::solved()
    }
}

impl fmt::Display for CubeState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.serialize())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CubeParseError {
    #[error("expected 54 stickers, got {0}")]
    Length(usize),
    #[error("unknown colour token {token:?} at position {pos}")]
    Token { pos: usize, token: char },
    #[error("colour {color:?} appears {count} times")]
    Count { color: char, count: usize },
    #[error("wrong center {found:?} at position {pos}")]
    Center { pos: usize, found: char },
}

/// A quarter turn. Ordered U, U', L, L', F, F', R, R', B, B', D, D'.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Move {
    pub face: u8,
    pub ccw: bool,
}

impl Move {
    pub const ALL: [Move; NUM_MOVES] = {
        let mut out = [Move { face: 0, ccw: false }; NUM_MOVES];
        let mut i = 0;
        while i < NUM_MOVES {
            out[i] = Move {
                face: (i / 2) as u8,
                ccw: i % 2 == 1,
            };
            i += 1;
        }
        out
    };

    pub fn index(self) -> usize {
        self.face as usize * 2 + self.ccw as usize
    }

    pub fn from_index(i: usize) -> Self {
        Self::ALL[i]
    }

    pub fn inverse(self) -> Self {
        Self {
            face: self.face,
            ccw: !self.ccw,
        }
    }

    pub fn token(self) -> String {
        let f = FACE_LETTERS[self.face as usize];
        if self.ccw {
            format!("{f}'")
        } else {
            f.to_string()
        }
    }

    pub fn parse(token: &str) -> Result<Self, String> {
        let mut chars = token.chars();
        let f = chars.next().ok_or_else(|| "empty move token".to_string())?;
        let face = FACE_LETTERS
            .iter()
            .position(|&c| c == f)
            .ok_or_else(|| format!("unknown face in {token:?}"))?;
        let ccw = match chars.as_str() {
            "" => false,
            "'" => true,
            _ => return Err(format!("bad move token {token:?}")),
        };
        Ok(Self { face: face as u8, ccw })
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.token())
    }
}

/// Parses a whitespace-separated move sequence such as `R U' F`.
pub fn parse_moves(text: &str) -> Result<Vec<Move>, String> {
    text.split_whitespace().map(Move::parse).collect()
}

pub fn format_moves(moves: &[Move]) -> String {
    moves.iter().map(|m| m.token()).collect::<Vec<_>>().join(" ")
}

type V3 = [i32; 3];

fn cross(a: V3, b: V3) -> V3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: V3, b: V3) -> i32 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

const NORMALS: [V3; 6] = [[0, 1, 0], [-1, 0, 0], [0, 0, 1], [1, 0, 0], [0, 0, -1], [0, -1, 0]];

// (cubie position, outward normal) of sticker `i`
fn sticker_geometry(i: usize) -> (V3, V3) {
    let face = i / 9;
    let row = (i % 9 / 3) as i32;
    let col = (i % 3) as i32;
    let pos = match face {
        0 => [col - 1, 1, row - 1],
        1 => [-1, 1 - row, col - 1],
        2 => [col - 1, 1 - row, 1],
        3 => [1, 1 - row, 1 - col],
        4 => [1 - col, 1 - row, -1],
        _ => [col - 1, -1, 1 - row],
    };
    (pos, NORMALS[face])
}

// clockwise quarter turn seen from outside: rotation by -90° about `axis`
fn rotate_cw(v: V3, axis: V3) -> V3 {
    let c = cross(axis, v);
    let d = dot(axis, v);
    [
        -c[0] + axis[0] * d,
        -c[1] + axis[1] * d,
        -c[2] + axis[2] * d,
    ]
}

fn build_tables() -> [[u8; STICKERS]; NUM_MOVES] {
    let geometry: Vec<(V3, V3)> = (0..STICKERS).map(sticker_geometry).collect();
    let lookup: HashMap<(V3, V3), usize> = geometry.iter().enumerate().map(|(i, &g)| (g, i)).collect();
    let mut tables = [[0u8; STICKERS]; NUM_MOVES];
    for face in 0..6 {
        let axis = NORMALS[face];
        let mut cw = [0u8; STICKERS];
        for (src, &(pos, normal)) in geometry.iter().enumerate() {
            let dst = if dot(pos, axis) == 1 {
                lookup[&(rotate_cw(pos, axis), rotate_cw(normal, axis))]
            } else {
                src
            };
            cw[dst] = src as u8;
        }
        let mut ccw = [0u8; STICKERS];
        for (dst, &src) in cw.iter().enumerate() {
            ccw[src as usize] = dst as u8;
        }
        tables[face * 2] = cw;
        tables[face * 2 + 1] = ccw;
    }
    tables
}

/// `table[m][dst] = src`: after move `m`, sticker slot `dst` holds what slot `src` held.
pub fn move_tables() -> &'static [[u8; STICKERS]; NUM_MOVES] {
    static TABLES: OnceLock<[[u8; STICKERS]; NUM_MOVES]> = OnceLock::new();
    TABLES.get_or_init(build_tables)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RubikCube;

impl Environment for RubikCube {
    type State = CubeState;
    type Action = Move;

    fn next_state(&self, state: &CubeState, action: &Move) -> CubeState {
        state.apply(*action)
    }

    fn is_solved(&self, state: &CubeState) -> bool {
        state.is_solved()
    }

    fn actions(&self, _state: &CubeState) -> Vec<Move> {
        Move::ALL.to_vec()
    }
}

impl StateCodec for RubikCube {
    fn encode_state(&self, state: &CubeState) -> String {
        state.serialize()
    }

    fn decode_state(&self, text: &str) -> Result<CubeState, String> {
        CubeState::parse(text).map_err(|e| e.to_string())
    }

    fn encode_action(&self, action: &Move) -> String {
        action.token()
    }

    fn decode_action(&self, token: &str) -> Result<Move, String> {
        Move::parse(token)
    }
}

/// `length` uniform moves from solved. Inverse pairs are not filtered.
pub fn scramble<R: Rng + ?Sized>(length: usize, rng: &mut R) -> (CubeState, Vec<Move>) {
    let moves: Vec<Move> = (0..length)
        .map(|_| Move::from_index(rng.random_range(0..NUM_MOVES)))
        .collect();
    (CubeState::solved().apply_all(&moves), moves)
}

/// A scramble walked backwards: `states[0]` is scrambled, `states[n]` solved,
/// and `states[l + 1] = states[l].apply(actions[l])`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    pub id: usize,
    pub states: Vec<CubeState>,
    pub actions: Vec<Move>,
}

impl Trajectory {
    pub fn from_scramble(id: usize, moves: &[Move]) -> Self {
        let mut forward = vec![CubeState::solved()];
        for &m in moves {
            let next = forward.last().expect("non-empty").apply(m);
            forward.push(next);
        }
        forward.reverse();
        let actions = moves.iter().rev().map(|m| m.inverse()).collect();
        Self {
            id,
            states: forward,
            actions,
        }
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    /// `ℓ − n`.
    pub fn value_label(&self, l: usize) -> i64 {
        l as i64 - self.len() as i64
    }

    /// `(s_ℓ, s_min(ℓ+k, n))` for every ℓ.
    pub fn subgoal_pairs(&self, k: usize) -> Vec<(CubeState, CubeState)> {
        let n = self.len();
        (0..=n)
            .map(|l| (self.states[l], self.states[(l + k).min(n)]))
            .collect()
    }

    /// `(s_ℓ, s_min(ℓ+i, n), a_ℓ)` for `ℓ < n` and `1 ≤ i ≤ k`.
    pub fn policy_triples(&self, k: usize) -> Vec<(CubeState, CubeState, Move)> {
        let n = self.len();
        let mut out = Vec::new();
        for l in 0..n {
            for i in 1..=k {
                out.push((self.states[l], self.states[(l + i).min(n)], self.actions[l]));
            }
        }
        out
    }

    /// Tab-separated lines: id, step, state, action (`-` on the final state), value label.
    pub fn records(&self) -> Vec<String> {
        (0..=self.len())
            .map(|l| {
                let action = self.actions.get(l).map_or_else(|| "-".to_string(), |m| m.token());
                format!(
                    "{}\t{}\t{}\t{}\t{}",
                    self.id,
                    l,
                    self.states[l],
                    action,
                    self.value_label(l)
                )
            })
            .collect()
    }
}

pub fn generate_dataset<R: Rng + ?Sized>(count: usize, scramble_len: usize, rng: &mut R) -> Vec<Trajectory> {
    (0..count)
        .map(|id| {
            let (_, moves) = scramble(scramble_len, rng);
            Trajectory::from_scramble(id, &moves)
        })
        .collect()
}

/// Parses one dataset record into `(id, step, state, action, value)`.
pub fn parse_record(line: &str) -> Result<(usize, usize, CubeState, Option<Move>, i64), String> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 5 {
        return Err(format!("expected 5 fields, got {}", fields.len()));
    }
    let id = fields[0].parse().map_err(|e| format!("bad id: {e}"))?;
    let step = fields[1].parse().map_err(|e| format!("bad step: {e}"))?;
    let state = CubeState::parse(fields[2]).map_err(|e| e.to_string())?;
    let action = match fields[3] {
        "-" => None,
        t => Some(Move::parse(t)?),
    };
    let value = fields[4].parse().map_err(|e| format!("bad value: {e}"))?;
    Ok((id, step, state, action, value))
}

type Parents = HashMap<CubeState, Option<(CubeState, Move)>>;

fn expand_layer(frontier: &mut Vec<CubeState>, parents: &mut Parents, inverse: bool) -> Vec<CubeState> {
    let mut next = Vec::new();
    for s in frontier.drain(..) {
        for m in Move::ALL {
            let t = s.apply(m);
            if let std::collections::hash_map::Entry::Vacant(slot) = parents.entry(t) {
                // backward side records the move that leads from t towards the target
                let edge = if inverse { (s, m.inverse()) } else { (s, m) };
                slot.insert(Some(edge));
                next.push(t);
            }
        }
    }
    next
}

fn walk_back(parents: &Parents, mut s: CubeState) -> Vec<Move> {
    let mut out = Vec::new();
    while let Some(Some((p, m))) = parents.get(&s) {
        out.push(*m);
        s = *p;
    }
    out.reverse();
    out
}

fn walk_forward(parents: &Parents, mut s: CubeState) -> Vec<Move> {
    let mut out = Vec::new();
    while let Some(Some((p, m))) = parents.get(&s) {
        out.push(*m);
        s = *p;
    }
    out
}

/// A shortest move sequence from `from` to `to`, by bidirectional BFS, or `None`
/// when the distance exceeds `max_depth`. Ties go to the first meeting state in
/// expansion order.
pub fn shortest_path(from: &CubeState, to: &CubeState, max_depth: usize) -> Option<Vec<Move>> {
    if from == to {
        return Some(Vec::new());
    }
    let mut fwd: Parents = HashMap::from([(*from, None)]);
    let mut bwd: Parents = HashMap::from([(*to, None)]);
    let mut ff = vec![*from];
    let mut bf = vec![*to];
    let (mut df, mut db) = (0usize, 0usize);
    while df + db < max_depth {
        let grow_fwd = ff.len() <= bf.len();
        let layer = if grow_fwd {
            df += 1;
            expand_layer(&mut ff, &mut fwd, false)
        } else {
            db += 1;
            expand_layer(&mut bf, &mut bwd, true)
        };
        let (other, meet) = if grow_fwd { (&bwd, &layer) } else { (&fwd, &layer) };
        if let Some(m) = meet.iter().find(|s| other.contains_key(*s)) {
            let mut path = walk_back(&fwd, *m);
            path.extend(walk_forward(&bwd, *m));
            return Some(path);
        }
        if grow_fwd {
            ff = layer;
        } else {
            bf = layer;
        }
        if ff.is_empty() || bf.is_empty() {
            return None;
        }
    }
    None
}

/// Exact quarter-turn distance to solved, or `None` beyond `max_depth`.
pub fn brute_distance(s: &CubeState, max_depth: usize) -> Option<usize> {
    shortest_path(s, &CubeState::solved(), max_depth).map(|p| p.len())
}

/// Number of states at exact distance `d` from `s`, for `d = 0..=depth`.
pub fn sphere_sizes(s: &CubeState, depth: usize) -> Vec<usize> {
    ball_layers(s, depth).iter().map(Vec::len).collect()
}

/// States grouped by exact distance from `s`, each layer in discovery order.
pub fn ball_layers(s: &CubeState, depth: usize) -> Vec<Vec<CubeState>> {
    let mut seen = std::collections::HashSet::from([*s]);
    let mut layers = vec![vec![*s]];
    for _ in 0..depth {
        let mut next = Vec::new();
        for t in layers.last().expect("non-empty") {
            for m in Move::ALL {
                let u = t.apply(m);
                if seen.insert(u) {
                    next.push(u);
                }
            }
        }
        layers.push(next);
    }
    layers
}

/// Exact distances to solved for every state within `depth`, with a forward
/// search fallback for states just outside it.
#[derive(Debug, Clone)]
pub struct DistanceTable {
    depth: usize,
    dist: HashMap<CubeState, u8>,
}

impl DistanceTable {
    pub fn build(depth: usize) -> Self {
        let mut dist = HashMap::new();
        for (d, layer) in ball_layers(&CubeState::solved(), depth).into_iter().enumerate() {
            for s in layer {
                dist.insert(s, d as u8);
            }
        }
        Self { depth, dist }
    }

    /// Shared depth-5 table (about 10⁵ states).
    pub fn shared() -> &'static DistanceTable {
        static TABLE: OnceLock<DistanceTable> = OnceLock::new();
        TABLE.get_or_init(|| DistanceTable::build(5))
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }

    pub fn lookup(&self, s: &CubeState) -> Option<usize> {
        self.dist.get(s).map(|&d| d as usize)
    }

    /// Exact distance if it is at most `depth + extra`.
    pub fn distance(&self, s: &CubeState, extra: usize) -> Option<usize> {
        if let Some(d) = self.lookup(s) {
            return Some(d);
        }
        let mut seen = std::collections::HashSet::from([*s]);
        let mut frontier = vec![*s];
        for j in 1..=extra {
            let mut next = Vec::new();
            let mut best: Option<usize> = None;
            for t in &frontier {
                for m in Move::ALL {
                    let u = t.apply(m);
                    if !seen.insert(u) {
                        continue;
                    }
                    if let Some(d) = self.lookup(&u) {
                        best = Some(best.map_or(d, |b| b.min(d)));
                    }
                    next.push(u);
                }
            }
            // first layer to touch the table lands exactly on its boundary
            if let Some(b) = best {
                return Some(b + j);
            }
            frontier = next;
        }
        None
    }
}

/// All states within `k` moves of `s`, excluding `s`, in BFS discovery order.
pub fn neighbourhood(s: &CubeState, k: usize) -> Vec<CubeState> {
    let mut seen = std::collections::HashSet::from([*s]);
    let mut q = VecDeque::from([(*s, 0usize)]);
    let mut out = Vec::new();
    while let Some((t, d)) = q.pop_front() {
        if d == k {
            continue;
        }
        for m in Move::ALL {
            let u = t.apply(m);
            if seen.insert(u) {
                out.push(u);
                q.push_back((u, d + 1));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn solved_layout() {
        let s = CubeState::solved().serialize();
        assert_eq!(s, "wwwwwwwwwooooooooogggggggggrrrrrrrrrbbbbbbbbbyyyyyyyyy");
        for (f, pos) in [5usize, 14, 23, 32, 41, 50].iter().enumerate() {
            assert_eq!(s.as_bytes()[pos - 1], SOLVED_COLORS[f]);
        }
    }

    #[test]
    fn move_order_and_inverse() {
        for m in Move::ALL {
            let s = CubeState::solved();
            assert_eq!(s.apply(m).apply(m.inverse()), s);
            assert_eq!(s.apply(m).apply(m).apply(m).apply(m), s);
            assert!(!s.apply(m).is_solved());
        }
    }

    #[test]
    fn u_turn_cycles_side_rows() {
        // U clockwise carries the F top row to L
        let s = CubeState::solved().apply(Move::parse("U").unwrap());
        assert_eq!(&s.stickers[9..12], b"ggg");
        assert_eq!(&s.stickers[18..21], b"rrr");
        assert_eq!(&s.stickers[27..30], b"bbb");
        assert_eq!(&s.stickers[36..39], b"ooo");
        let r = CubeState::solved().apply(Move::parse("R").unwrap());
        // R clockwise lifts the F right column onto U
        assert_eq!([r.stickers[2], r.stickers[5], r.stickers[8]], [b'g'; 3]);
    }

    #[test]
    fn opposite_faces_commute() {
        let s = CubeState::solved().apply_all(&parse_moves("R F' L").unwrap());
        for (a, b) in [("U", "D"), ("L", "R"), ("F", "B")] {
            let (a, b) = (Move::parse(a).unwrap(), Move::parse(b).unwrap());
            assert_eq!(s.apply(a).apply(b), s.apply(b).apply(a));
        }
        let (u, f) = (Move::parse("U").unwrap(), Move::parse("F").unwrap());
        assert_ne!(s.apply(u).apply(f), s.apply(f).apply(u));
    }

    #[test]
    fn sexy_move_has_order_six() {
        let seq = parse_moves("R U R' U'").unwrap();
        let mut s = CubeState::solved();
        for i in 1..=6 {
            s = s.apply_all(&seq);
            assert_eq!(s.is_solved(), i == 6);
        }
    }

    #[test]
    fn quarter_turn_sphere_sizes() {
        assert_eq!(sphere_sizes(&CubeState::solved(), 4), vec![1, 12, 114, 1068, 10011]);
    }

    #[test]
    fn distances() {
        let s = CubeState::solved();
        assert_eq!(brute_distance(&s, 8), Some(0));
        let one = s.apply(Move::parse("F").unwrap());
        assert_eq!(brute_distance(&one, 8), Some(1));
        let two = s.apply_all(&parse_moves("F R").unwrap());
        assert_eq!(brute_distance(&two, 8), Some(2));
        let five = s.apply_all(&parse_moves("F R U' B L").unwrap());
        assert_eq!(brute_distance(&five, 8), Some(5));
        assert_eq!(brute_distance(&five, 4), None);
        let table = DistanceTable::build(3);
        assert_eq!(table.distance(&five, 2), Some(5));
        assert_eq!(table.distance(&five, 1), None);
    }

    #[test]
    fn shortest_path_reaches_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let (a, _) = scramble(6, &mut rng);
            let (_, extra) = scramble(3, &mut rng);
            let b = a.apply_all(&extra);
            let p = shortest_path(&a, &b, 3).expect("within three moves");
            assert!(p.len() <= 3);
            assert_eq!(a.apply_all(&p), b);
        }
    }

    #[test]
    fn parse_errors() {
        let ok = CubeState::solved().serialize();
        assert!(CubeState::parse(&ok[..53]).is_err());
        let mut bad = ok.clone().into_bytes();
        bad[0] = b'x';
        assert!(matches!(CubeState::parse(std::str::from_utf8(&bad).unwrap()), Err(CubeParseError::Token { .. })));
        let mut swap = ok.clone().into_bytes();
        swap.swap(4, 0);
        swap[0] = b'o';
        assert!(CubeState::parse(std::str::from_utf8(&swap).unwrap()).is_err());
        let mut center = ok.into_bytes();
        center.swap(4, 13);
        assert!(matches!(
            CubeState::parse(std::str::from_utf8(&center).unwrap()),
            Err(CubeParseError::Center { pos: 5, .. })
        ));
        let spaced = "w ".repeat(9) + &"o ".repeat(9) + &"g ".repeat(9) + &"r ".repeat(9) + &"b ".repeat(9) + &"y ".repeat(9);
        assert_eq!(CubeState::parse(&spaced).unwrap(), CubeState::solved());
    }

    #[test]
    fn dataset_labels() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let data = generate_dataset(5, 30, &mut rng);
        for t in &data {
            assert_eq!(t.value_label(0), -30);
            assert_eq!(t.value_label(30), 0);
            assert!(t.states[30].is_solved());
            for l in 0..30 {
                assert_eq!(t.states[l].apply(t.actions[l]), t.states[l + 1]);
            }
            let pairs = t.subgoal_pairs(4);
            assert_eq!(pairs[30].0, pairs[30].1);
            for (l, (a, b)) in pairs.iter().enumerate().take(27) {
                assert_eq!(&a.apply_all(&t.actions[l..l + 4]), b);
            }
            assert_eq!(t.policy_triples(4).len(), 120);
            for line in t.records() {
                let (id, step, s, a, v) = parse_record(&line).unwrap();
                assert_eq!(id, t.id);
                assert_eq!(s, t.states[step]);
                assert_eq!(a, t.actions.get(step).copied());
                assert_eq!(v, step as i64 - 30);
            }
        }
    }

    #[test]
    fn scramble_zero_and_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (s, m) = scramble(0, &mut rng);
        assert!(s.is_solved() && m.is_empty());
        let (s, _) = scramble(1, &mut rng);
        assert_eq!(brute_distance(&s, 2), Some(1));
    }

    proptest::proptest! {
        #[test]
        fn moves_preserve_counts_and_centers(idx in proptest::collection::vec(0usize..12, 0..40)) {
            let moves: Vec<Move> = idx.into_iter().map(Move::from_index).collect();
            let s = CubeState::solved().apply_all(&moves);
            let parsed = CubeState::parse(&s.serialize());
            proptest::prop_assert_eq!(parsed, Ok(s));
            let back: Vec<Move> = moves.iter().rev().map(|m| m.inverse()).collect();
            proptest::prop_assert!(s.apply_all(&back).is_solved());
        }

        #[test]
        fn move_tokens_round_trip(i in 0usize..12) {
            let m = Move::from_index(i);
            proptest::prop_assert_eq!(Move::parse(&m.token()), Ok(m));
        }
    }
}
