//! The eight symmetries of the square acting on sides and on `a x a` sub-grids.

use serde::{Deserialize, Serialize};

/// A side of a square, counter-clockwise from east. `y` grows northward.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Dir {
    East,
    North,
    West,
    South,
}

impl Dir {
    pub const ALL: [Dir; 4] = [Dir::East, Dir::North, Dir::West, Dir::South];

    pub fn index(self) -> u8 {
        self as u8
    }

    pub fn from_index(i: u8) -> Dir {
        Self::ALL[(i % 4) as usize]
    }

    pub fn opposite(self) -> Dir {
        Dir::from_index(self.index() + 2)
    }

    pub fn offset(self) -> (i64, i64) {
        match self {
            Dir::East => (1, 0),
            Dir::North => (0, 1),
            Dir::West => (-1, 0),
            Dir::South => (0, -1),
        }
    }
}

/// `rotate^rot . reflect^flip`, where `reflect` mirrors east and west and
/// `rotate` turns a quarter counter-clockwise.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Orient {
    rot: u8,
    flip: bool,
}

impl Orient {
    pub const IDENTITY: Orient = Orient { rot: 0, flip: false };

    pub fn new(rot: u8, flip: bool) -> Self {
        Orient { rot: rot % 4, flip }
    }

    pub fn rotation(rot: u8) -> Self {
        Self::new(rot, false)
    }

    pub fn all() -> impl Iterator<Item = Orient> {
        (0..8u8).map(|i| Orient::new(i % 4, i >= 4))
    }

    pub fn rot(self) -> u8 {
        self.rot
    }

    pub fn flip(self) -> bool {
        self.flip
    }

    /// Dense index in `0..8`.
    pub fn index(self) -> usize {
        self.rot as usize + if self.flip { 4 } else { 0 }
    }

    /// The rotation taking `from` to `to`.
    pub fn turning(from: Dir, to: Dir) -> Self {
        Self::rotation((to.index() + 4 - from.index()) % 4)
    }

    /// `self . other`: apply `other` first.
    pub fn compose(self, other: Orient) -> Orient {
        let rot = if self.flip {
            self.rot + 4 - other.rot
        } else {
            self.rot + other.rot
        };
        Orient::new(rot, self.flip ^ other.flip)
    }

    pub fn inverse(self) -> Orient {
        if self.flip {
            self
        } else {
            Orient::new(4 - self.rot, false)
        }
    }

    pub fn apply_dir(self, d: Dir) -> Dir {
        let i = if self.flip { (6 - d.index()) % 4 } else { d.index() };
        Dir::from_index(i + self.rot)
    }

    /// Maps a sub-square `(u, v)` of an `a x a` grid.
    pub fn apply_cell(self, (mut u, mut v): (u32, u32), a: u32) -> (u32, u32) {
        if self.flip {
            u = a - 1 - u;
        }
        for _ in 0..self.rot {
            (u, v) = (a - 1 - v, u);
        }
        (u, v)
    }

    /// Short token used by the template file and the JSON export: `r0..r3`, `f0..f3`.
    pub fn token(self) -> String {
        format!("{}{}", if self.flip { 'f' } else { 'r' }, self.rot)
    }

    pub fn parse_token(s: &str) -> Option<Orient> {
        let (flip, digit) = match s.as_bytes() {
            [b'r', d] => (false, d),
            [b'f', d] => (true, d),
            _ => return None,
        };
        let rot = digit.checked_sub(b'0').filter(|r| *r < 4)?;
        Some(Orient::new(rot, flip))
    }
}
