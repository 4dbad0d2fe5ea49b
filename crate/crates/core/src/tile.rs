//! Polyomino tile chemistry.
//!
//! Molecules are edge-connected sets of unit squares. Two colliding tiles
//! join when one can be placed against the other so that they share at
//! least one full edge and the joined tile has no gap; otherwise both are
//! discarded. Joined tiles are always strictly larger than either reactant,
//! so an exact copy of a reactant can never be produced, while a scaled-up
//! copy of its shape can.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;
use thiserror::Error;

pub type Cell = (i32, i32);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TileError {
    #[error("tile has no cells")]
    Empty,
    #[error("tile cells are not edge-connected")]
    Disconnected,
    #[error("row {row}: unexpected character {found:?} in tile grid")]
    BadChar { row: usize, found: char },
}

/// A polyomino in canonical position: translated so the minimum x and y
/// are 0, cells sorted by `(x, y)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tile {
    cells: Vec<Cell>,
}

const NEIGHBORS: [Cell; 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

impl Tile {
    pub fn new<I: IntoIterator<Item = Cell>>(cells: I) -> Result<Self, TileError> {
        let set: BTreeSet<Cell> = cells.into_iter().collect();
        if set.is_empty() {
            return Err(TileError::Empty);
        }
        if !is_connected(&set) {
            return Err(TileError::Disconnected);
        }
        Ok(Self::normalized(set))
    }

    fn normalized(set: BTreeSet<Cell>) -> Self {
        let min_x = set.iter().map(|c| c.0).min().expect("nonempty");
        let min_y = set.iter().map(|c| c.1).min().expect("nonempty");
        let mut cells: Vec<Cell> = set.into_iter().map(|(x, y)| (x - min_x, y - min_y)).collect();
        cells.sort_unstable();
        Tile { cells }
    }

    pub fn unit() -> Self {
        Tile { cells: vec![(0, 0)] }
    }

    pub fn rectangle(width: i32, height: i32) -> Result<Self, TileError> {
        Tile::new((0..width).flat_map(|x| (0..height).map(move |y| (x, y))))
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn area(&self) -> usize {
        self.cells.len()
    }

    pub fn width(&self) -> i32 {
        self.cells.iter().map(|c| c.0).max().expect("nonempty") + 1
    }

    pub fn height(&self) -> i32 {
        self.cells.iter().map(|c| c.1).max().expect("nonempty") + 1
    }

    /// Parses `#`/`.` rows; rows are separated by newlines or `/`, row `y`
    /// is line `y` and column `x` is the character offset.
    pub fn parse(text: &str) -> Result<Self, TileError> {
        let mut cells = Vec::new();
        for (y, row) in text
            .split(['\n', '/'])
            .map(str::trim)
            .filter(|r| !r.is_empty())
            .enumerate()
        {
            for (x, ch) in row.chars().enumerate() {
                match ch {
                    '#' => cells.push((x as i32, y as i32)),
                    '.' => {}
                    found => return Err(TileError::BadChar { row: y, found }),
                }
            }
        }
        Tile::new(cells)
    }

    /// Grid rows joined by `sep`.
    pub fn to_grid(&self, sep: &str) -> String {
        let cells: HashSet<Cell> = self.cells.iter().copied().collect();
        (0..self.height())
            .map(|y| {
                (0..self.width())
                    .map(|x| if cells.contains(&(x, y)) { '#' } else { '.' })
                    .collect::<String>()
            })
            .collect::<Vec<_>>()
            .join(sep)
    }

    /// Species key: the grid with rows joined by `/`.
    pub fn key(&self) -> String {
        self.to_grid("/")
    }

    pub fn rotated(&self) -> Tile {
        Tile::normalized(self.cells.iter().map(|&(x, y)| (-y, x)).collect())
    }

    pub fn reflected(&self) -> Tile {
        Tile::normalized(self.cells.iter().map(|&(x, y)| (-x, y)).collect())
    }

    /// Replaces every cell by a `k × k` block.
    pub fn scaled(&self, k: u32) -> Tile {
        let k = k as i32;
        let cells = self
            .cells
            .iter()
            .flat_map(|&(x, y)| (0..k).flat_map(move |dx| (0..k).map(move |dy| (x * k + dx, y * k + dy))))
            .collect();
        Tile::normalized(cells)
    }

    /// Representative of the tile's class under `sym`: the smallest image.
    pub fn canonical(&self, sym: Symmetry) -> Tile {
        sym.images(self).into_iter().min().expect("identity image")
    }

    /// The tile this one is a `k`-fold block scaling of, for the largest
    /// such `k`, in canonical form under `sym`.
    pub fn primitive_root(&self, sym: Symmetry) -> (Tile, u32) {
        let area = self.area() as u32;
        let mut k = (area as f64).sqrt() as u32 + 1;
        while k > 1 {
            if area.is_multiple_of(k * k) {
                if let Some(root) = self.unscale(k) {
                    return (root.canonical(sym), k);
                }
            }
            k -= 1;
        }
        (self.canonical(sym), 1)
    }

    fn unscale(&self, k: u32) -> Option<Tile> {
        let ki = k as i32;
        let set: BTreeSet<Cell> = self
            .cells
            .iter()
            .map(|&(x, y)| (x.div_euclid(ki), y.div_euclid(ki)))
            .collect();
        let root = Tile::normalized(set);
        (root.scaled(k) == *self).then_some(root)
    }

    pub fn has_hole(&self) -> bool {
        has_hole(&self.cells.iter().copied().collect())
    }
}

impl fmt::Display for Tile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_grid("\n"))
    }
}

/// Serialized form used in logs and reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TileRecord {
    pub grid: String,
    pub cells: Vec<[i32; 2]>,
}

impl From<&Tile> for TileRecord {
    fn from(t: &Tile) -> Self {
        TileRecord {
            grid: t.to_grid("\n"),
            cells: t.cells.iter().map(|&(x, y)| [x, y]).collect(),
        }
    }
}

impl TryFrom<TileRecord> for Tile {
    type Error = TileError;
    fn try_from(r: TileRecord) -> Result<Self, TileError> {
        Tile::new(r.cells.into_iter().map(|[x, y]| (x, y)))
    }
}

/// Which congruences count as "same shape".
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Symmetry {
    pub use_rotations: bool,
    pub use_reflections: bool,
}

impl Symmetry {
    pub const TRANSLATION: Symmetry = Symmetry {
        use_rotations: false,
        use_reflections: false,
    };

    fn images(&self, t: &Tile) -> Vec<Tile> {
        let mut out = vec![t.clone()];
        if self.use_rotations {
            for _ in 0..3 {
                let next = out.last().expect("nonempty").rotated();
                out.push(next);
            }
        }
        if self.use_reflections {
            let mirrored: Vec<Tile> = out.iter().map(Tile::reflected).collect();
            out.extend(mirrored);
        }
        out
    }
}

fn is_connected(set: &BTreeSet<Cell>) -> bool {
    let Some(&start) = set.iter().next() else {
        return false;
    };
    let mut seen = HashSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some((x, y)) = queue.pop_front() {
        for (dx, dy) in NEIGHBORS {
            let n = (x + dx, y + dy);
            if set.contains(&n) && seen.insert(n) {
                queue.push_back(n);
            }
        }
    }
    seen.len() == set.len()
}

/// True if some empty cell inside the bounding box (padded by one) cannot
/// reach the outside through empty cells.
fn has_hole(cells: &HashSet<Cell>) -> bool {
    let min_x = cells.iter().map(|c| c.0).min().unwrap_or(0) - 1;
    let max_x = cells.iter().map(|c| c.0).max().unwrap_or(0) + 1;
    let min_y = cells.iter().map(|c| c.1).min().unwrap_or(0) - 1;
    let max_y = cells.iter().map(|c| c.1).max().unwrap_or(0) + 1;
    let total_empty = ((max_x - min_x + 1) * (max_y - min_y + 1)) as usize - cells.len();
    let start = (min_x, min_y);
    let mut seen = HashSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some((x, y)) = queue.pop_front() {
        for (dx, dy) in NEIGHBORS {
            let n = (x + dx, y + dy);
            if n.0 < min_x || n.0 > max_x || n.1 < min_y || n.1 > max_y {
                continue;
            }
            if !cells.contains(&n) && seen.insert(n) {
                queue.push_back(n);
            }
        }
    }
    seen.len() != total_empty
}

/// Offsets of `b` relative to `a` that can possibly touch `a`: the
/// Minkowski range of the two bounding boxes widened by one.
pub fn placement_window(a: &Tile, b: &Tile) -> Vec<Cell> {
    let xs = -b.width()..=a.width();
    let ys = -b.height()..=a.height();
    xs.flat_map(|dx| ys.clone().map(move |dy| (dx, dy))).collect()
}

/// Occupancy grid holding `a` with room around it for every offset in
/// [`placement_window`] and a one-cell empty border.
struct Canvas {
    w: i32,
    h: i32,
    /// Where `a`'s origin sits on the canvas.
    base: Cell,
    cells: Vec<u8>,
    stack: Vec<usize>,
    seen: Vec<bool>,
}

const EMPTY: u8 = 0;
const FILLED: u8 = 1;

impl Canvas {
    fn new(a: &Tile, b: &Tile) -> Self {
        let base = (b.width() + 1, b.height() + 1);
        let w = a.width() + 2 * b.width() + 2;
        let h = a.height() + 2 * b.height() + 2;
        let mut canvas = Canvas {
            w,
            h,
            base,
            cells: vec![EMPTY; (w * h) as usize],
            stack: Vec::new(),
            seen: vec![false; (w * h) as usize],
        };
        for &(x, y) in &a.cells {
            let i = canvas.index((x + base.0, y + base.1));
            canvas.cells[i] = FILLED;
        }
        canvas
    }

    fn index(&self, (x, y): Cell) -> usize {
        (y * self.w + x) as usize
    }

    fn join(&mut self, a: &Tile, b: &Tile, offset: Cell) -> Option<Tile> {
        let place = |&(x, y): &Cell| (x + offset.0 + self.base.0, y + offset.1 + self.base.1);
        let placed: Vec<Cell> = b.cells.iter().map(place).collect();
        let mut touches = false;
        for &(x, y) in &placed {
            if self.cells[self.index((x, y))] != EMPTY {
                return None;
            }
            touches = touches
                || NEIGHBORS
                    .iter()
                    .any(|&(dx, dy)| self.cells[self.index((x + dx, y + dy))] != EMPTY);
        }
        if !touches {
            return None;
        }
        for &c in &placed {
            let i = self.index(c);
            self.cells[i] = FILLED;
        }
        let hole = self.has_hole(a.area() + b.area());
        for &c in &placed {
            let i = self.index(c);
            self.cells[i] = EMPTY;
        }
        if hole {
            return None;
        }
        // Both parts are connected and share an edge, so the union is too.
        let union = a
            .cells
            .iter()
            .copied()
            .chain(b.cells.iter().map(|&(x, y)| (x + offset.0, y + offset.1)))
            .collect();
        Some(Tile::normalized(union))
    }

    /// Flood-fills empty cells from the corner; the border is always empty,
    /// so any empty cell left unreached is enclosed.
    fn has_hole(&mut self, filled: usize) -> bool {
        self.seen.iter_mut().for_each(|s| *s = false);
        let total_empty = (self.w * self.h) as usize - filled;
        self.stack.clear();
        self.stack.push(0);
        self.seen[0] = true;
        let mut reached = 1;
        while let Some(i) = self.stack.pop() {
            let (x, y) = (i as i32 % self.w, i as i32 / self.w);
            for (dx, dy) in NEIGHBORS {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= self.w || ny >= self.h {
                    continue;
                }
                let j = (ny * self.w + nx) as usize;
                if self.cells[j] == EMPTY && !self.seen[j] {
                    self.seen[j] = true;
                    reached += 1;
                    self.stack.push(j);
                }
            }
        }
        reached != total_empty
    }
}

/// The joined tile for `b` shifted by `offset`, if that placement is
/// disjoint, shares an edge with `a` and leaves no gap.
pub fn join_at(a: &Tile, b: &Tile, offset: Cell) -> Option<Tile> {
    let in_window = (-b.width()..=a.width()).contains(&offset.0) && (-b.height()..=a.height()).contains(&offset.1);
    if !in_window {
        // Too far away to touch.
        return None;
    }
    Canvas::new(a, b).join(a, b, offset)
}

/// Distinct joined tiles over the given offsets, in canonical order.
pub fn fitting_products_in<I: IntoIterator<Item = Cell>>(a: &Tile, b: &Tile, offsets: I) -> Vec<Tile> {
    let mut canvas = Canvas::new(a, b);
    let window = |o: &Cell| (-b.width()..=a.width()).contains(&o.0) && (-b.height()..=a.height()).contains(&o.1);
    let products: BTreeSet<Tile> = offsets
        .into_iter()
        .filter(window)
        .filter_map(|o| canvas.join(a, b, o))
        .collect();
    products.into_iter().collect()
}

pub fn fitting_products(a: &Tile, b: &Tile) -> Vec<Tile> {
    fitting_products_in(a, b, placement_window(a, b))
}

/// Joins `a` and `b`, choosing uniformly among the distinct possible
/// results; `None` when they fit nowhere.
pub fn collide_tiles<R: Rng + ?Sized>(a: &Tile, b: &Tile, rng: &mut R) -> Option<Tile> {
    fitting_products(a, b).choose(rng).cloned()
}

pub fn same_shape_and_size(a: &Tile, b: &Tile, sym: Symmetry) -> bool {
    a.area() == b.area() && a.canonical(sym) == b.canonical(sym)
}

/// The factor `k` such that scaling the smaller tile by `k` gives the
/// larger one (up to `sym`), if any.
pub fn same_shape_ignoring_size(a: &Tile, b: &Tile, sym: Symmetry) -> Option<u32> {
    let (small, large) = if a.area() <= b.area() { (a, b) } else { (b, a) };
    let ratio = large.area() / small.area();
    if large.area() % small.area() != 0 {
        return None;
    }
    let k = (ratio as f64).sqrt().round() as u32;
    if (k * k) as usize != ratio {
        return None;
    }
    (small.scaled(k).canonical(sym) == large.canonical(sym)).then_some(k)
}

/// A random hole-free polyomino of exactly `area` cells, grown one cell at
/// a time from the origin.
pub fn random_polyomino<R: Rng + ?Sized>(rng: &mut R, area: usize) -> Tile {
    assert!(area >= 1, "area must be positive");
    loop {
        let mut cells: BTreeSet<Cell> = BTreeSet::from([(0, 0)]);
        while cells.len() < area {
            let frontier: BTreeSet<Cell> = cells
                .iter()
                .flat_map(|&(x, y)| NEIGHBORS.iter().map(move |&(dx, dy)| (x + dx, y + dy)))
                .filter(|c| !cells.contains(c))
                .collect();
            let frontier: Vec<Cell> = frontier.into_iter().collect();
            cells.insert(*frontier.choose(rng).expect("frontier of a finite set"));
        }
        let tile = Tile::normalized(cells);
        if !tile.has_hole() {
            return tile;
        }
    }
}
