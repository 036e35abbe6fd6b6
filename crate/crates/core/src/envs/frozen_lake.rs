//! Slippery Frozen Lake.
//!
//! Cells are numbered row-major and followed by one absorbing sink. Actions
//! are `0 = left, 1 = down, 2 = right, 3 = up`. A move goes in the intended
//! direction or either perpendicular one with probability 1/3 each; moving
//! into a wall leaves the agent in place. The goal pays 1 and then moves to
//! the sink; holes move to the sink with no reward.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DivergenceSpec, FiniteRmdp};

pub const CANONICAL_4X4: [&str; 4] = ["SFFF", "FHFH", "FFFH", "HFFG"];

pub const LEFT: usize = 0;
pub const DOWN: usize = 1;
pub const RIGHT: usize = 2;
pub const UP: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tile {
    Start,
    Frozen,
    Hole,
    Goal,
}

/// How the board is laid out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LakeLayout {
    /// `SFFF/FHFH/FFFH/HFFG`; only valid for a 4x4 board.
    Canonical,
    /// Explicit rows of `S`, `F`, `H`, `G` characters.
    Rows(Vec<String>),
    /// Start top-left, goal bottom-right, holes drawn from `seed`. Redrawn until
    /// the goal is reachable.
    Random { seed: u64, hole_fraction: f64 },
}

/// A parsed board.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LakeGrid {
    side: usize,
    tiles: Vec<Tile>,
}

impl LakeGrid {
    pub fn parse(rows: &[impl AsRef<str>]) -> Result<Self> {
        let side = rows.len();
        if side < 2 {
            return Err(Error::InvalidParameter("lake needs at least 2 rows".into()));
        }
        let mut tiles = Vec::with_capacity(side * side);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.chars().count() != side {
                return Err(Error::InvalidParameter(format!(
                    "lake row {i} has {} cells, expected {side}",
                    row.chars().count()
                )));
            }
            for c in row.chars() {
                tiles.push(match c {
                    'S' => Tile::Start,
                    'F' => Tile::Frozen,
                    'H' => Tile::Hole,
                    'G' => Tile::Goal,
                    other => {
                        return Err(Error::InvalidParameter(format!(
                            "unknown lake tile `{other}`"
                        )))
                    }
                });
            }
        }
        let grid = Self { side, tiles };
        if grid.count(Tile::Start) != 1 || grid.count(Tile::Goal) != 1 {
            return Err(Error::InvalidParameter(
                "lake needs exactly one S and one G".into(),
            ));
        }
        if !grid.goal_reachable() {
            return Err(Error::InvalidParameter(
                "lake layout is disconnected: no path from S to G".into(),
            ));
        }
        Ok(grid)
    }

    pub fn from_layout(side: usize, layout: &LakeLayout) -> Result<Self> {
        match layout {
            LakeLayout::Canonical => {
                if side != 4 {
                    return Err(Error::InvalidParameter(format!(
                        "the canonical layout is 4x4, requested {side}x{side}"
                    )));
                }
                Self::parse(&CANONICAL_4X4)
            }
            LakeLayout::Rows(rows) => {
                let grid = Self::parse(rows)?;
                if grid.side != side {
                    return Err(Error::InvalidParameter(format!(
                        "layout is {0}x{0}, requested {side}x{side}",
                        grid.side
                    )));
                }
                Ok(grid)
            }
            LakeLayout::Random {
                seed,
                hole_fraction,
            } => Self::random(side, *seed, *hole_fraction),
        }
    }

    fn random(side: usize, seed: u64, hole_fraction: f64) -> Result<Self> {
        if side < 2 {
            return Err(Error::InvalidParameter("lake side must be >= 2".into()));
        }
        if !(0.0..0.9).contains(&hole_fraction) {
            return Err(Error::InvalidParameter(format!(
                "hole fraction must lie in [0, 0.9), got {hole_fraction}"
            )));
        }
        let cells = side * side;
        let holes = ((cells - 2) as f64 * hole_fraction).round() as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut interior: Vec<usize> = (1..cells - 1).collect();
        for _ in 0..10_000 {
            interior.shuffle(&mut rng);
            let mut tiles = vec![Tile::Frozen; cells];
            tiles[0] = Tile::Start;
            tiles[cells - 1] = Tile::Goal;
            for &i in &interior[..holes] {
                tiles[i] = Tile::Hole;
            }
            let grid = Self { side, tiles };
            if grid.goal_reachable() {
                return Ok(grid);
            }
        }
        Err(Error::InvalidParameter(format!(
            "could not draw a connected {side}x{side} lake with hole fraction {hole_fraction}"
        )))
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn tile(&self, cell: usize) -> Tile {
        self.tiles[cell]
    }

    fn count(&self, t: Tile) -> usize {
        self.tiles.iter().filter(|&&x| x == t).count()
    }

    fn find(&self, t: Tile) -> usize {
        self.tiles.iter().position(|&x| x == t).expect("validated")
    }

    /// Neighbour in `direction`, or `cell` itself at a wall.
    pub fn step(&self, cell: usize, direction: usize) -> usize {
        let (r, c) = (cell / self.side, cell % self.side);
        let n = self.side;
        match direction {
            LEFT if c > 0 => cell - 1,
            DOWN if r + 1 < n => cell + n,
            RIGHT if c + 1 < n => cell + 1,
            UP if r > 0 => cell - n,
            _ => cell,
        }
    }

    fn goal_reachable(&self) -> bool {
        let start = self.find(Tile::Start);
        let mut seen = vec![false; self.tiles.len()];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(cell) = queue.pop_front() {
            if self.tiles[cell] == Tile::Goal {
                return true;
            }
            for d in [LEFT, DOWN, RIGHT, UP] {
                let next = self.step(cell, d);
                if !seen[next] && self.tiles[next] != Tile::Hole {
                    seen[next] = true;
                    queue.push_back(next);
                }
            }
        }
        false
    }

    pub fn rows(&self) -> Vec<String> {
        self.tiles
            .chunks(self.side)
            .map(|row| {
                row.iter()
                    .map(|t| match t {
                        Tile::Start => 'S',
                        Tile::Frozen => 'F',
                        Tile::Hole => 'H',
                        Tile::Goal => 'G',
                    })
                    .collect()
            })
            .collect()
    }
}

pub fn build_frozen_lake(
    grid_side: usize,
    horizon: usize,
    layout: &LakeLayout,
    spec: DivergenceSpec,
) -> Result<FiniteRmdp> {
    let grid = LakeGrid::from_layout(grid_side, layout)?;
    build_frozen_lake_from_grid(&grid, horizon, spec)
}

pub fn build_frozen_lake_from_grid(
    grid: &LakeGrid,
    horizon: usize,
    spec: DivergenceSpec,
) -> Result<FiniteRmdp> {
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be positive".into()));
    }
    let cells = grid.side * grid.side;
    let sink = cells;
    let ns = cells + 1;
    let na = 4;
    let mut kernel = vec![0.0; ns * na * ns];
    let mut reward = vec![0.0; ns * na];
    let row = |s: usize, a: usize| (s * na + a) * ns;
    for s in 0..ns {
        for a in 0..na {
            let base = row(s, a);
            if s == sink {
                kernel[base + sink] = 1.0;
                continue;
            }
            match grid.tile(s) {
                Tile::Hole => kernel[base + sink] = 1.0,
                Tile::Goal => {
                    kernel[base + sink] = 1.0;
                    reward[s * na + a] = 1.0;
                }
                Tile::Start | Tile::Frozen => {
                    for d in [(a + 3) % 4, a, (a + 1) % 4] {
                        kernel[base + grid.step(s, d)] += 1.0 / 3.0;
                    }
                }
            }
        }
    }
    FiniteRmdp::new(
        ns,
        na,
        horizon,
        kernel.repeat(horizon),
        reward.repeat(horizon),
        vec![true; horizon * ns * na],
        spec,
        grid.find(Tile::Start),
    )
}
