//! Grid-world robot plants.
//!
//! Cells are `(row, col)` with row 0 at the top. A move from a hostile cell
//! emits the starred copy of its direction; starred events are compromised.
//! Moves into an obstacle lead to a critical state, obstacles have no
//! outgoing moves and moves off the grid are undefined.

use std::sync::Arc;

use robsup_core::{Alphabet, Automaton, AutomatonBuilder};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Cell = (usize, usize);

/// Directions in event order, with their row and column offsets.
pub const DIRECTIONS: [(&str, isize, isize); 4] = [("E", 0, 1), ("W", 0, -1), ("N", -1, 0), ("S", 1, 0)];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GridError {
    #[error("grid must have at least one row and one column")]
    Empty,
    #[error("cell ({0},{1}) is outside the grid")]
    OutOfRange(usize, usize),
    #[error("the start cell is an obstacle")]
    StartBlocked,
    #[error("cannot parse cell `{0}`")]
    BadCell(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub rows: usize,
    pub cols: usize,
    #[serde(default)]
    pub obstacles: Vec<Cell>,
    #[serde(default)]
    pub hostile: Vec<Cell>,
    pub start: Cell,
}

/// Parses `r,c`.
pub fn parse_cell(s: &str) -> Result<Cell, GridError> {
    let bad = || GridError::BadCell(s.into());
    let t = s.trim().trim_start_matches('(').trim_end_matches(')');
    let (r, c) = t.split_once(',').ok_or_else(bad)?;
    Ok((r.trim().parse().map_err(|_| bad())?, c.trim().parse().map_err(|_| bad())?))
}

/// Parses a `;`-separated list such as `1,1;1,2`. The empty string is the
/// empty list.
pub fn parse_cells(s: &str) -> Result<Vec<Cell>, GridError> {
    s.split(';').filter(|p| !p.trim().is_empty()).map(parse_cell).collect()
}

pub fn cell_name((r, c): Cell) -> String {
    format!("{r}_{c}")
}

impl GridSpec {
    pub fn validate(&self) -> Result<(), GridError> {
        if self.rows == 0 || self.cols == 0 {
            return Err(GridError::Empty);
        }
        let cells = self.obstacles.iter().chain(&self.hostile).chain(std::iter::once(&self.start));
        for &(r, c) in cells {
            if r >= self.rows || c >= self.cols {
                return Err(GridError::OutOfRange(r, c));
            }
        }
        if self.obstacles.contains(&self.start) {
            return Err(GridError::StartBlocked);
        }
        Ok(())
    }

    /// Robot alphabet: `E W N S` then `E* W* N* S*`, all controllable and
    /// observable; the starred events are compromised.
    pub fn alphabet() -> Alphabet {
        let mut al = Alphabet::new();
        for (d, _, _) in DIRECTIONS {
            al.add_event(d, true, true).expect("fresh names");
        }
        for (d, _, _) in DIRECTIONS {
            let e = al.add_event(&format!("{d}*"), true, true).expect("fresh names");
            al.set_compromised(e).expect("observable legit event");
        }
        al
    }

    /// One state per cell in row-major order, named `r_c`.
    pub fn plant(&self) -> Result<Automaton, GridError> {
        self.validate()?;
        let al = Arc::new(Self::alphabet());
        let mut b = AutomatonBuilder::new(al.clone());
        let id = |(r, c): Cell| robsup_core::StateId((r * self.cols + c) as u32);
        for r in 0..self.rows {
            for c in 0..self.cols {
                let x = b.add_state(cell_name((r, c)));
                if self.obstacles.contains(&(r, c)) {
                    b.mark_crit(x);
                }
            }
        }
        b.set_initial(id(self.start));
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.obstacles.contains(&(r, c)) {
                    continue;
                }
                let starred = self.hostile.contains(&(r, c));
                for (i, (_, dr, dc)) in DIRECTIONS.iter().enumerate() {
                    let (Some(nr), Some(nc)) = (r.checked_add_signed(*dr), c.checked_add_signed(*dc)) else {
                        continue;
                    };
                    if nr >= self.rows || nc >= self.cols {
                        continue;
                    }
                    let e = robsup_core::EventId((i + if starred { 4 } else { 0 }) as u32);
                    b.add_transition(id((r, c)), e, id((nr, nc))).expect("ids in range");
                }
            }
        }
        Ok(b.build().expect("one move per direction"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> GridSpec {
        GridSpec { rows: 2, cols: 3, obstacles: vec![(0, 2)], hostile: vec![(0, 1)], start: (1, 0) }
    }

    #[test]
    fn parses_cells() {
        assert_eq!(parse_cells("1,1; (1,2)").unwrap(), vec![(1, 1), (1, 2)]);
        assert_eq!(parse_cells("").unwrap(), vec![]);
        assert!(parse_cell("1").is_err());
        assert!(parse_cell("a,1").is_err());
    }

    #[test]
    fn moves() {
        let g = spec().plant().unwrap();
        let al = g.alphabet();
        let st = |n: &str| g.state_by_name(n).unwrap();
        assert_eq!(g.initial(), Some(st("1_0")));
        assert_eq!(g.delta(st("0_0"), al.lookup("E").unwrap()), Some(st("0_1")));
        // hostile cell emits starred moves only
        assert_eq!(g.delta(st("0_1"), al.lookup("E*").unwrap()), Some(st("0_2")));
        assert_eq!(g.delta(st("0_1"), al.lookup("E").unwrap()), None);
        assert!(g.is_crit(st("0_2")));
        assert!(g.edges(st("0_2")).is_empty());
        // walls
        assert_eq!(g.delta(st("0_0"), al.lookup("N").unwrap()), None);
        assert_eq!(g.edges(st("1_0")).len(), 2);
        assert_eq!(g.transition_count(), 2 + 3 + 2 + 3 + 2);
    }

    #[test]
    fn rejects_invalid_specs() {
        let mut s = spec();
        s.start = (0, 2);
        assert_eq!(s.validate(), Err(GridError::StartBlocked));
        s.start = (2, 0);
        assert_eq!(s.validate(), Err(GridError::OutOfRange(2, 0)));
        s.rows = 0;
        assert_eq!(s.validate(), Err(GridError::Empty));
    }
}
