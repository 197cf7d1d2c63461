//! Connectivity of the lakes, their complements and the island.

use rayon::prelude::*;
use serde::Serialize;

use super::{Label, Raster};

/// Number of 4-connected components of `member` on a `side x side` grid.
pub fn components(side: usize, member: &[bool]) -> usize {
    let mut seen = vec![false; member.len()];
    let mut stack = Vec::new();
    let mut count = 0;
    for start in 0..member.len() {
        if !member[start] || seen[start] {
            continue;
        }
        count += 1;
        seen[start] = true;
        stack.push(start);
        while let Some(i) = stack.pop() {
            let (x, y) = (i % side, i / side);
            let mut visit = |j: usize| {
                if member[j] && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < side {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - side);
            }
            if y + 1 < side {
                visit(i + side);
            }
        }
    }
    count
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LakeTopology {
    pub colour: Label,
    pub pixels: u64,
    pub components: usize,
    pub complement_components: usize,
}

impl LakeTopology {
    /// Connected with connected complement; vacuous for a lake not yet dug.
    pub fn simply_connected(&self) -> bool {
        self.pixels == 0 || (self.components == 1 && self.complement_components == 1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TopologyReport {
    pub lakes: Vec<LakeTopology>,
    pub island_components: usize,
    pub disjoint: bool,
    pub pass: bool,
}

pub fn connectivity_check(r: &Raster) -> TopologyReport {
    let side = r.side as usize;
    let lakes: Vec<LakeTopology> = Label::LAKES
        .par_iter()
        .map(|&colour| {
            let member: Vec<bool> = r
                .pixels
                .iter()
                .map(|p| *p != 0 && Label::of_day(*p as usize) == colour)
                .collect();
            let pixels = member.iter().filter(|m| **m).count() as u64;
            // The complement includes a one-pixel ring outside the square, so a
            // lake enclosing part of the island shows up as a second component.
            let padded = side + 2;
            let mut complement = vec![true; padded * padded];
            for (y, row) in member.chunks(side).enumerate() {
                for (x, m) in row.iter().enumerate() {
                    complement[(y + 1) * padded + x + 1] = !m;
                }
            }
            LakeTopology {
                colour,
                pixels,
                components: components(side, &member),
                complement_components: components(padded, &complement),
            }
        })
        .collect();
    let island: Vec<bool> = r.pixels.iter().map(|p| *p == 0).collect();
    let island_components = components(side, &island);
    // One label per pixel keeps the lakes apart; recount to confirm the partition.
    let disjoint = lakes.iter().map(|l| l.pixels).sum::<u64>() + r.island_pixels() == (side * side) as u64;
    let pass = disjoint && island_components == 1 && lakes.iter().all(LakeTopology::simply_connected);
    TopologyReport {
        lakes,
        island_components,
        disjoint,
        pass,
    }
}
