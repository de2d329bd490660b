use std::fmt;

use ksubs_core::{Environment, StateCodec};

pub const CHANNELS: usize = 7;

/// One-hot channel of a cell, in channel-index order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Cell {
    Wall = 0,
    Floor = 1,
    Target = 2,
    Box = 3,
    BoxOnTarget = 4,
    Agent = 5,
    AgentOnTarget = 6,
}

impl Cell {
    pub const ALL: [Cell; CHANNELS] = [
        Cell::Wall,
        Cell::Floor,
        Cell::Target,
        Cell::Box,
        Cell::BoxOnTarget,
        Cell::Agent,
        Cell::AgentOnTarget,
    ];

    pub fn channel(self) -> usize {
        self as usize
    }

    pub fn from_channel(c: usize) -> Option<Cell> {
        Self::ALL.get(c).copied()
    }

    pub fn glyph(self) -> char {
        match self {
            Cell::Wall => '#',
            Cell::Floor => ' ',
            Cell::Target => '.',
            Cell::Box => '$',
            Cell::BoxOnTarget => '*',
            Cell::Agent => '@',
            Cell::AgentOnTarget => '+',
        }
    }

    pub fn from_glyph(g: char) -> Option<Cell> {
        Self::ALL.iter().copied().find(|c| c.glyph() == g)
    }

    pub fn is_agent(self) -> bool {
        matches!(self, Cell::Agent | Cell::AgentOnTarget)
    }

    pub fn is_box(self) -> bool {
        matches!(self, Cell::Box | Cell::BoxOnTarget)
    }

    pub fn is_target(self) -> bool {
        matches!(self, Cell::Target | Cell::BoxOnTarget | Cell::AgentOnTarget)
    }

    fn walkable(self) -> bool {
        matches!(self, Cell::Floor | Cell::Target)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Up,
    Down,
    Left,
    Right,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::Up, Direction::Down, Direction::Left, Direction::Right];

    fn delta(self) -> (isize, isize) {
        match self {
            Direction::Up => (-1, 0),
            Direction::Down => (1, 0),
            Direction::Left => (0, -1),
            Direction::Right => (0, 1),
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            Direction::Up => "U",
            Direction::Down => "D",
            Direction::Left => "L",
            Direction::Right => "R",
        }
    }

    pub fn parse(token: &str) -> Result<Self, String> {
        Self::ALL
            .iter()
            .copied()
            .find(|d| d.token() == token)
            .ok_or_else(|| format!("bad direction token {token:?}"))
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// A rectangular grid of one-hot cells. Arbitrary cell assignments are allowed
/// (the pixelwise generator can produce them); `parse` enforces the puzzle rules.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SokobanBoard {
    rows: usize,
    cols: usize,
    cells: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BoardError {
    #[error("empty board")]
    Empty,
    #[error("row {row} has width {width}, expected {expected}")]
    Ragged { row: usize, width: usize, expected: usize },
    #[error("unknown glyph {glyph:?} at row {row}, column {col}")]
    Glyph { glyph: char, row: usize, col: usize },
    #[error("expected exactly one agent, found {0}")]
    Agents(usize),
    #[error("{boxes} boxes but {targets} targets")]
    Unbalanced { boxes: usize, targets: usize },
    #[error("one-hot tensor: {0}")]
    Tensor(String),
}

impl SokobanBoard {
    pub fn from_cells(rows: usize, cols: usize, cells: Vec<Cell>) -> Self {
        assert_eq!(cells.len(), rows * cols, "cell count must be rows * cols");
        Self { rows, cols, cells }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn get(&self, row: usize, col: usize) -> Cell {
        self.cells[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, cell: Cell) {
        self.cells[row * self.cols + col] = cell;
    }

    pub fn is_solved(&self) -> bool {
        !self.cells.contains(&Cell::Box)
    }

    /// First agent cell in row-major order.
    pub fn agent(&self) -> Option<(usize, usize)> {
        self.cells
            .iter()
            .position(|c| c.is_agent())
            .map(|i| (i / self.cols, i % self.cols))
    }

    pub fn box_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_box()).count()
    }

    pub fn target_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_target()).count()
    }

    fn offset(&self, (r, c): (usize, usize), dir: Direction) -> Option<(usize, usize)> {
        let (dr, dc) = dir.delta();
        let r = r.checked_add_signed(dr)?;
        let c = c.checked_add_signed(dc)?;
        (r < self.rows && c < self.cols).then_some((r, c))
    }

    /// Moves the agent, pushing at most one box. Blocked moves return an identical board.
    pub fn step(&self, dir: Direction) -> SokobanBoard {
        let Some(p) = self.agent() else {
            return self.clone();
        };
        let Some(q) = self.offset(p, dir) else {
            return self.clone();
        };
        let target_cell = self.get(q.0, q.1);
        let mut next = self.clone();
        if target_cell.is_box() {
            let Some(r) = self.offset(q, dir) else {
                return self.clone();
            };
            let beyond = self.get(r.0, r.1);
            if !beyond.walkable() {
                return self.clone();
            }
            next.set(r.0, r.1, if beyond == Cell::Target { Cell::BoxOnTarget } else { Cell::Box });
        } else if !target_cell.walkable() {
            return self.clone();
        }
        let here = self.get(p.0, p.1);
        next.set(p.0, p.1, if here == Cell::AgentOnTarget { Cell::Target } else { Cell::Floor });
        next.set(
            q.0,
            q.1,
            if target_cell.is_target() { Cell::AgentOnTarget } else { Cell::Agent },
        );
        next
    }

    pub fn parse(text: &str) -> Result<Self, BoardError> {
        let lines: Vec<&str> = text.lines().collect();
        let start = lines.iter().position(|l| !l.is_empty()).ok_or(BoardError::Empty)?;
        let end = lines.iter().rposition(|l| !l.is_empty()).expect("non-empty") + 1;
        let lines = &lines[start..end];
        let cols = lines[0].chars().count();
        let mut cells = Vec::with_capacity(lines.len() * cols);
        for (row, line) in lines.iter().enumerate() {
            let width = line.chars().count();
            if width != cols {
                return Err(BoardError::Ragged { row, width, expected: cols });
            }
            for (col, glyph) in line.chars().enumerate() {
                cells.push(Cell::from_glyph(glyph).ok_or(BoardError::Glyph { glyph, row, col })?);
            }
        }
        let board = Self {
            rows: lines.len(),
            cols,
            cells,
        };
        let agents = board.cells.iter().filter(|c| c.is_agent()).count();
        if agents != 1 {
            return Err(BoardError::Agents(agents));
        }
        let (boxes, targets) = (board.box_count(), board.target_count());
        if boxes != targets {
            return Err(BoardError::Unbalanced { boxes, targets });
        }
        Ok(board)
    }

    pub fn render(&self) -> String {
        let mut out = String::with_capacity(self.rows * (self.cols + 1));
        for row in self.cells.chunks(self.cols) {
            out.extend(row.iter().map(|c| c.glyph()));
            out.push('\n');
        }
        out
    }

    /// `rows × cols × 7` tensor, channel fastest.
    pub fn to_one_hot(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.cells.len() * CHANNELS];
        for (i, c) in self.cells.iter().enumerate() {
            out[i * CHANNELS + c.channel()] = 1;
        }
        out
    }

    pub fn from_one_hot(rows: usize, cols: usize, tensor: &[u8]) -> Result<Self, BoardError> {
        if tensor.len() != rows * cols * CHANNELS {
            return Err(BoardError::Tensor(format!(
                "length {} for a {rows}x{cols} board",
                tensor.len()
            )));
        }
        let cells = tensor
            .chunks(CHANNELS)
            .enumerate()
            .map(|(i, px)| {
                let hot: Vec<usize> = (0..CHANNELS).filter(|&c| px[c] == 1).collect();
                if hot.len() != 1 || px.iter().any(|&v| v > 1) {
                    return Err(BoardError::Tensor(format!("cell {i} is not one-hot")));
                }
                Ok(Cell::ALL[hot[0]])
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { rows, cols, cells })
    }
}

impl fmt::Display for SokobanBoard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Splits a multi-board file on lines consisting of `---`.
pub fn parse_boards(text: &str) -> Result<Vec<SokobanBoard>, BoardError> {
    let mut out = Vec::new();
    let mut block = String::new();
    for line in text.lines() {
        if line.trim_end() == "---" {
            if block.lines().any(|l| !l.is_empty()) {
                out.push(SokobanBoard::parse(&block)?);
            }
            block.clear();
        } else {
            block.push_str(line);
            block.push('\n');
        }
    }
    if block.lines().any(|l| !l.is_empty()) {
        out.push(SokobanBoard::parse(&block)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Sokoban;

impl Environment for Sokoban {
    type State = SokobanBoard;
    type Action = Direction;

    fn next_state(&self, state: &SokobanBoard, action: &Direction) -> SokobanBoard {
        state.step(*action)
    }

    fn is_solved(&self, state: &SokobanBoard) -> bool {
        state.is_solved()
    }

    fn actions(&self, _state: &SokobanBoard) -> Vec<Direction> {
        Direction::ALL.to_vec()
    }
}

impl StateCodec for Sokoban {
    /// Rows joined by `|`, so a board fits on one line.
    fn encode_state(&self, state: &SokobanBoard) -> String {
        state
            .cells
            .chunks(state.cols)
            .map(|r| r.iter().map(|c| c.glyph()).collect::<String>())
            .collect::<Vec<_>>()
            .join("|")
    }

    fn decode_state(&self, text: &str) -> Result<SokobanBoard, String> {
        let rows: Vec<&str> = text.split('|').collect();
        let cols = rows.first().map_or(0, |r| r.chars().count());
        let mut cells = Vec::new();
        for (row, line) in rows.iter().enumerate() {
            if line.chars().count() != cols || cols == 0 {
                return Err(format!("row {row} has the wrong width"));
            }
            for glyph in line.chars() {
                cells.push(Cell::from_glyph(glyph).ok_or_else(|| format!("unknown glyph {glyph:?}"))?);
            }
        }
        Ok(SokobanBoard::from_cells(rows.len(), cols, cells))
    }

    fn encode_action(&self, action: &Direction) -> String {
        action.token().to_string()
    }

    fn decode_action(&self, token: &str) -> Result<Direction, String> {
        Direction::parse(token)
    }
}
