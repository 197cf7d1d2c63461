//! The production system on typed covering squares.
//!
//! The tiling of day `n` holds the `N(t_{n-1})` squares of side `t_{n-1}`
//! that make up the island left after day `n - 1`; the day-`n` canal runs
//! through every one of them. Each square is typed by how that canal crosses
//! it. Subdividing with `a_n` keeps the island sub-squares of every square,
//! typed for the canal of day `n + 1`.
//!
//! Where a canal starts is not local to one square:
//!
//! * days 1 to 3 start at the shore (the west edge of the unit square), so
//!   the start square of day `n` hands the shore start to one of its two
//!   sub-squares next to the shore, and the other one becomes the next
//!   Terminal;
//! * from day 4 the canal of day `n` starts at the tip of the canal of day
//!   `n - 3`, which has the same colour. The start Terminal of day `n - 3`
//!   marks the sub-square beside its tip, that sub-square marks its own
//!   sub-square on the tip side, and the day-`n` Separation is placed there,
//!   entering from the tip.

mod dihedral;
pub mod template;

use std::collections::{BTreeMap, VecDeque};

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use dihedral::{Dir, Orient};
pub use template::{templates, Child, TemplateSet, TEMPLATE_SHA256, TEMPLATE_SOURCE};

use crate::counting::box_count_general;
use crate::error::{Result, WadaError};
use crate::sequence::ParamSequence;

/// Default refusal threshold for positional tilings.
pub const DEFAULT_CELL_CAP: u64 = 100_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SquareType {
    Terminal,
    Straight,
    Turning,
    Separation,
}

impl SquareType {
    pub const ALL: [SquareType; 4] = [
        SquareType::Terminal,
        SquareType::Straight,
        SquareType::Turning,
        SquareType::Separation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SquareType::Terminal => "terminal",
            SquareType::Straight => "straight",
            SquareType::Turning => "turning",
            SquareType::Separation => "separation",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Sides the canal crosses, in canonical orientation.
    pub fn canonical_sides(self) -> &'static [Dir] {
        match self {
            SquareType::Terminal => &[Dir::West],
            SquareType::Straight => &[Dir::West, Dir::East],
            SquareType::Turning => &[Dir::West, Dir::North],
            SquareType::Separation => &[Dir::West, Dir::North, Dir::South],
        }
    }
}

/// Marks a square on the way from a tip to the Separation that resumes its colour.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Anchor {
    /// 1 for the square beside the tip, 2 for its sub-square one day later.
    pub stage: u8,
    /// Global side facing the tip.
    pub side: Dir,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Marks {
    /// The canal enters through the shore (the canonical west side).
    pub shore_entry: bool,
    /// The Terminal whose tip the same colour resumes from three days later.
    pub is_start: bool,
    pub anchor: Option<Anchor>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TypedCell {
    pub x: u32,
    pub y: u32,
    pub kind: SquareType,
    pub orient: Orient,
    pub marks: Marks,
}

impl TypedCell {
    pub fn pos(&self) -> (u32, u32) {
        (self.x, self.y)
    }

    pub fn is_start(&self) -> bool {
        self.marks.is_start
    }

    /// Global sides the canal crosses.
    pub fn crossing_sides(&self) -> impl Iterator<Item = Dir> + '_ {
        self.kind.canonical_sides().iter().map(|d| self.orient.apply_dir(*d))
    }

    /// Side through which the canal reaches this square from outside the
    /// current island: the shore, or an older lake of the same colour.
    pub fn entry_side(&self) -> Option<Dir> {
        (self.marks.shore_entry || self.kind == SquareType::Separation)
            .then(|| self.orient.apply_dir(Dir::West))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Census {
    pub terminal: u64,
    pub straight: u64,
    pub turning: u64,
    pub separation: u64,
}

impl Census {
    pub fn total(&self) -> u64 {
        self.terminal + self.straight + self.turning + self.separation
    }

    pub fn get(&self, kind: SquareType) -> u64 {
        match kind {
            SquareType::Terminal => self.terminal,
            SquareType::Straight => self.straight,
            SquareType::Turning => self.turning,
            SquareType::Separation => self.separation,
        }
    }

    fn add(&mut self, kind: SquareType, n: u64) {
        match kind {
            SquareType::Terminal => self.terminal += n,
            SquareType::Straight => self.straight += n,
            SquareType::Turning => self.turning += n,
            SquareType::Separation => self.separation += n,
        }
    }
}

pub fn census(cells: &[TypedCell]) -> Census {
    let mut c = Census::default();
    for cell in cells {
        c.add(cell.kind, 1);
    }
    c
}

/// Which Terminal becomes the start Terminal of its day.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum StartRule {
    /// Lexicographically smallest `(x, y)`.
    #[default]
    SmallestPos,
    LargestPos,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TilingConfig {
    pub cell_cap: u64,
    pub start_rule: StartRule,
}

impl Default for TilingConfig {
    fn default() -> Self {
        TilingConfig {
            cell_cap: DEFAULT_CELL_CAP,
            start_rule: StartRule::SmallestPos,
        }
    }
}

/// The typed squares covering the island before the canal of `day` is dug.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tiling {
    day: usize,
    /// Squares per side of the grid at scale `t_{day-1}`.
    grid: u32,
    cells: Vec<TypedCell>,
    census: Census,
}

impl Tiling {
    /// Day 1: the whole square is one Terminal, entered from the west shore.
    pub fn day_one() -> Tiling {
        let cells = vec![TypedCell {
            x: 0,
            y: 0,
            kind: SquareType::Terminal,
            orient: Orient::IDENTITY,
            marks: Marks {
                shore_entry: true,
                is_start: true,
                anchor: None,
            },
        }];
        Tiling {
            day: 1,
            grid: 1,
            census: census(&cells),
            cells,
        }
    }

    pub fn empty(day: usize, grid: u32) -> Tiling {
        Tiling {
            day,
            grid,
            cells: Vec::new(),
            census: Census::default(),
        }
    }

    pub fn day(&self) -> usize {
        self.day
    }

    /// Scale index of the squares: side `t_level`.
    pub fn level(&self) -> usize {
        self.day - 1
    }

    pub fn grid(&self) -> u32 {
        self.grid
    }

    /// Sorted row-major by `(y, x)`.
    pub fn cells(&self) -> &[TypedCell] {
        &self.cells
    }

    pub fn census(&self) -> Census {
        self.census
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn find(&self, x: u32, y: u32) -> Option<&TypedCell> {
        self.cells
            .binary_search_by_key(&(y, x), |c| (c.y, c.x))
            .ok()
            .map(|i| &self.cells[i])
    }

    /// Cells whose row is `y`, as a contiguous slice.
    pub fn row(&self, y: u32) -> &[TypedCell] {
        let lo = self.cells.partition_point(|c| c.y < y);
        let hi = self.cells.partition_point(|c| c.y <= y);
        &self.cells[lo..hi]
    }

    pub fn start_terminal(&self) -> Option<&TypedCell> {
        self.cells.iter().find(|c| c.is_start())
    }

    /// Export rows `{level, x, y, type, orient}`.
    pub fn export(&self) -> Vec<ExportCell> {
        self.cells
            .iter()
            .map(|c| ExportCell {
                level: self.level(),
                x: c.x,
                y: c.y,
                kind: c.kind,
                orient: c.orient.token(),
            })
            .collect()
    }

    /// Checks the structural invariants and returns every violation found.
    pub fn check_invariants(&self) -> std::result::Result<CourseSummary, Vec<String>> {
        let mut errors = Vec::new();
        if self.census != census(&self.cells) {
            errors.push("census out of sync with cells".to_string());
        }
        for w in self.cells.windows(2) {
            if (w[0].y, w[0].x) >= (w[1].y, w[1].x) {
                errors.push(format!("cells not strictly sorted at {:?}", w[1].pos()));
            }
        }
        if let Some(c) = self.cells.iter().find(|c| c.x >= self.grid || c.y >= self.grid) {
            errors.push(format!("cell {:?} outside the {}-grid", c.pos(), self.grid));
        }
        let (terminals, separations) = if self.day <= 3 { (1, 0) } else { (2, 1) };
        if self.census.terminal != terminals || self.census.separation != separations {
            errors.push(format!(
                "day {} has {} Terminals and {} Separations",
                self.day, self.census.terminal, self.census.separation
            ));
        }
        if self.cells.iter().filter(|c| c.is_start()).count() != 1 {
            errors.push("expected exactly one start Terminal".into());
        }
        let summary = self.course_summary(&mut errors);
        if errors.is_empty() {
            Ok(summary)
        } else {
            Err(errors)
        }
    }

    /// Builds the canal-course graph: squares joined where the canal crosses
    /// their common side, plus one outside node for the entry.
    fn course_summary(&self, errors: &mut Vec<String>) -> CourseSummary {
        let n = self.cells.len();
        let outside = n;
        let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
        let mut entries = 0;
        for (i, c) in self.cells.iter().enumerate() {
            let entry = c.entry_side();
            for side in c.crossing_sides() {
                let (dx, dy) = side.offset();
                let (nx, ny) = (c.x as i64 + dx, c.y as i64 + dy);
                let inside = nx >= 0 && ny >= 0 && nx < self.grid as i64 && ny < self.grid as i64;
                let neighbour = inside
                    .then(|| {
                        self.cells
                            .binary_search_by_key(&(ny as u32, nx as u32), |c| (c.y, c.x))
                            .ok()
                    })
                    .flatten();
                if Some(side) == entry {
                    let shore_ok = c.marks.shore_entry && !inside;
                    let lake_ok = c.kind == SquareType::Separation && neighbour.is_none();
                    if !(shore_ok || lake_ok) {
                        errors.push(format!("entry of {:?} at {:?} does not face open water", c.kind, c.pos()));
                    }
                    adjacency[i].push(outside);
                    adjacency[outside].push(i);
                    entries += 1;
                    continue;
                }
                match neighbour {
                    Some(j) if self.cells[j].crossing_sides().any(|s| s == side.opposite()) => {
                        if i < j {
                            adjacency[i].push(j);
                            adjacency[j].push(i);
                        }
                    }
                    _ => errors.push(format!(
                        "canal leaves {:?} at {:?} through {:?} into no matching square",
                        c.kind,
                        c.pos(),
                        side
                    )),
                }
            }
        }
        if entries != 1 {
            errors.push(format!("canal has {entries} entries, expected 1"));
        }
        let degree = |i: usize| adjacency[i].len();
        let mut by_degree = BTreeMap::new();
        for i in 0..n {
            *by_degree.entry(degree(i)).or_insert(0usize) += 1;
        }
        for (i, c) in self.cells.iter().enumerate() {
            let d = degree(i);
            if (d == 1) != (c.kind == SquareType::Terminal) {
                errors.push(format!("{:?} at {:?} has course degree {d}", c.kind, c.pos()));
            }
            if (d == 3) != (c.kind == SquareType::Separation) {
                errors.push(format!("{:?} at {:?} has course degree {d}", c.kind, c.pos()));
            }
        }
        let edges: usize = adjacency.iter().map(Vec::len).sum::<usize>() / 2;
        let mut seen = vec![false; n + 1];
        let mut queue = VecDeque::from([outside]);
        seen[outside] = true;
        let mut reached = 1;
        while let Some(i) = queue.pop_front() {
            for &j in &adjacency[i] {
                if !seen[j] {
                    seen[j] = true;
                    reached += 1;
                    queue.push_back(j);
                }
            }
        }
        let connected = reached == n + 1;
        if !connected {
            errors.push(format!("canal course reaches {} of {} squares", reached - 1, n));
        }
        if edges != n {
            errors.push(format!("canal course has {edges} joins for {n} squares: not a tree"));
        }
        CourseSummary {
            squares: n,
            joins: edges,
            connected,
            degree_histogram: by_degree,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CourseSummary {
    pub squares: usize,
    pub joins: usize,
    pub connected: bool,
    pub degree_histogram: BTreeMap<usize, usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportCell {
    pub level: usize,
    pub x: u32,
    pub y: u32,
    #[serde(rename = "type")]
    pub kind: SquareType,
    pub orient: String,
}

/// Expands one parent into its island sub-squares for the next day.
fn expand_into(out: &mut Vec<TypedCell>, parent: &TypedCell, a: u32, next_day: usize, kids: &[Child]) {
    let g = parent.orient;
    let mid = (a - 1) / 2;
    let anchor_target = parent.marks.anchor.map(|anchor| {
        let local = g.inverse().apply_dir(anchor.side);
        let v = match local {
            Dir::South => 0,
            Dir::North => a - 1,
            other => panic!("anchor side {other:?} runs along the canal of {:?}", parent.pos()),
        };
        ((mid, v), anchor)
    });
    for child in kids {
        let mut kind = child.kind;
        let mut local = child.orient;
        let mut marks = Marks::default();
        if parent.marks.shore_entry && child.u == 0 && (child.v == 0 || child.v == a - 1) {
            if next_day <= 3 && child.v == a - 1 {
                kind = SquareType::Straight;
                local = Orient::IDENTITY;
                marks.shore_entry = true;
            } else {
                kind = SquareType::Terminal;
                local = Orient::rotation(2);
            }
        }
        if parent.marks.is_start && (child.u, child.v) == (a - 1, mid) {
            marks.anchor = Some(Anchor {
                stage: 1,
                side: g.apply_dir(Dir::West),
            });
        }
        if let Some((target, anchor)) = anchor_target {
            if (child.u, child.v) == target {
                if anchor.stage == 1 {
                    marks.anchor = Some(Anchor { stage: 2, ..anchor });
                } else {
                    kind = SquareType::Separation;
                    local = g.inverse().compose(Orient::turning(Dir::West, anchor.side));
                }
            }
        }
        let (u, v) = g.apply_cell((child.u, child.v), a);
        out.push(TypedCell {
            x: parent.x * a + u,
            y: parent.y * a + v,
            kind,
            orient: g.compose(local),
            marks,
        });
    }
}

fn template_children(a: u32) -> [Vec<Child>; 4] {
    let t = templates();
    SquareType::ALL.map(|k| t.children(k, a))
}

fn choose_start(cells: &mut [TypedCell], rule: StartRule) {
    let terminals = cells.iter().enumerate().filter(|(_, c)| c.kind == SquareType::Terminal);
    let pick = match rule {
        StartRule::SmallestPos => terminals.min_by_key(|(_, c)| (c.x, c.y)),
        StartRule::LargestPos => terminals.max_by_key(|(_, c)| (c.x, c.y)),
    };
    if let Some((i, _)) = pick.map(|(i, c)| (i, *c)) {
        cells[i].marks.is_start = true;
    }
}

/// Subdivides every square with factor `a`, producing the next day's tiling.
pub fn subdivide(tiling: &Tiling, a: u32) -> Result<Tiling> {
    subdivide_with(tiling, a, StartRule::default())
}

pub fn subdivide_with(tiling: &Tiling, a: u32, start_rule: StartRule) -> Result<Tiling> {
    if a < 3 {
        return Err(WadaError::InvalidArgument(format!("subdivision factor {a} is below 3")));
    }
    let grid = tiling.grid.checked_mul(a).ok_or_else(|| WadaError::ResourceCap {
        what: "grid side",
        needed: (tiling.grid as u64 * a as u64).to_string(),
        cap: u32::MAX.to_string(),
    })?;
    let next_day = tiling.day + 1;
    let kids = template_children(a);
    let mut cells: Vec<TypedCell> = tiling
        .cells
        .par_iter()
        .flat_map_iter(|p| {
            let mut out = Vec::with_capacity(kids[p.kind as usize].len());
            expand_into(&mut out, p, a, next_day, &kids[p.kind as usize]);
            out
        })
        .collect();
    cells.par_sort_unstable_by_key(|c| (c.y, c.x));
    choose_start(&mut cells, start_rule);
    Ok(Tiling {
        day: next_day,
        grid,
        census: census(&cells),
        cells,
    })
}

/// Walks the tilings of days `1, 2, ...` for an integer sequence.
pub struct TilingDays<'a> {
    seq: &'a ParamSequence,
    config: TilingConfig,
    current: Option<Tiling>,
    failed: bool,
}

impl<'a> TilingDays<'a> {
    pub fn new(seq: &'a ParamSequence, config: TilingConfig) -> Self {
        TilingDays {
            seq,
            config,
            current: None,
            failed: false,
        }
    }
}

impl Iterator for TilingDays<'_> {
    type Item = Result<Tiling>;

    fn next(&mut self) -> Option<Result<Tiling>> {
        if self.failed {
            return None;
        }
        let next = match &self.current {
            None => Ok(Tiling::day_one()),
            Some(t) => {
                let day = t.day;
                check_cap(self.seq, day + 1, self.config.cell_cap)
                    .and_then(|_| self.seq.int_term(day))
                    .and_then(|a| subdivide_with(t, a, self.config.start_rule))
            }
        };
        match next {
            Ok(t) => {
                self.current = Some(t.clone());
                Some(Ok(t))
            }
            Err(e) => {
                self.failed = true;
                Some(Err(e))
            }
        }
    }
}

fn check_cap(seq: &ParamSequence, day: usize, cap: u64) -> Result<()> {
    let predicted = box_count_general(seq, day - 1)?;
    if predicted > BigUint::from(cap) {
        return Err(WadaError::ResourceCap {
            what: "tiling cell",
            needed: predicted.to_string(),
            cap: cap.to_string(),
        });
    }
    Ok(())
}

/// The first four days of the standard construction (`a = 3`).
pub fn seed_tilings() -> Vec<Tiling> {
    let c3 = ParamSequence::parse("const:3").expect("valid");
    TilingDays::new(&c3, TilingConfig::default())
        .take(4)
        .collect::<Result<_>>()
        .expect("four standard days")
}

/// The positional tiling of `day`.
pub fn run(seq: &ParamSequence, day: usize, config: &TilingConfig) -> Result<Tiling> {
    if day < 1 {
        return Err(WadaError::InvalidArgument("tilings start at day 1".into()));
    }
    seq.int_terms(day - 1)?;
    check_cap(seq, day, config.cell_cap)?;
    TilingDays::new(seq, *config)
        .take(day)
        .last()
        .expect("at least one day")
}

/// Class of a square for census-only propagation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct CellClass {
    kind: SquareType,
    shore_entry: bool,
    is_start: bool,
    anchor_stage: u8,
}

impl CellClass {
    fn of(c: &TypedCell) -> Self {
        CellClass {
            kind: c.kind,
            shore_entry: c.marks.shore_entry,
            is_start: c.marks.is_start,
            anchor_stage: c.marks.anchor.map_or(0, |a| a.stage),
        }
    }

    fn prototype(self) -> TypedCell {
        TypedCell {
            x: 0,
            y: 0,
            kind: self.kind,
            orient: Orient::IDENTITY,
            marks: Marks {
                shore_entry: self.shore_entry,
                is_start: self.is_start,
                anchor: (self.anchor_stage > 0).then_some(Anchor {
                    stage: self.anchor_stage,
                    side: Dir::North,
                }),
            },
        }
    }
}

/// Type counts of a day, propagated without positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolicCensus {
    pub day: usize,
    classes: BTreeMap<CellClass, BigUint>,
}

impl SymbolicCensus {
    pub fn count(&self, kind: SquareType) -> BigUint {
        self.classes
            .iter()
            .filter(|(c, _)| c.kind == kind)
            .map(|(_, n)| n)
            .sum()
    }

    pub fn total(&self) -> BigUint {
        self.classes.values().sum()
    }

    /// Narrows to machine integers when every count fits.
    pub fn to_census(&self) -> Option<Census> {
        Some(Census {
            terminal: self.count(SquareType::Terminal).to_u64()?,
            straight: self.count(SquareType::Straight).to_u64()?,
            turning: self.count(SquareType::Turning).to_u64()?,
            separation: self.count(SquareType::Separation).to_u64()?,
        })
    }
}

/// Census of days `1..=day`, obtained by running each square class of the
/// positional production once per day and multiplying by its count.
pub fn run_census(seq: &ParamSequence, day: usize) -> Result<Vec<SymbolicCensus>> {
    if day < 1 {
        return Err(WadaError::InvalidArgument("tilings start at day 1".into()));
    }
    let seed = &Tiling::day_one().cells[0];
    let mut classes = BTreeMap::from([(CellClass::of(seed), BigUint::from(1u32))]);
    let mut out = vec![SymbolicCensus { day: 1, classes: classes.clone() }];
    for d in 1..day {
        let a = seq.int_term(d)?;
        let kids = template_children(a);
        let mut next: BTreeMap<CellClass, BigUint> = BTreeMap::new();
        for (class, count) in &classes {
            let proto = class.prototype();
            let mut children = Vec::new();
            expand_into(&mut children, &proto, a, d + 1, &kids[proto.kind as usize]);
            for child in &children {
                *next.entry(CellClass::of(child)).or_insert_with(BigUint::zero) += count;
            }
        }
        let plain_terminal = CellClass {
            kind: SquareType::Terminal,
            shore_entry: false,
            is_start: false,
            anchor_stage: 0,
        };
        if let Some(n) = next.get_mut(&plain_terminal).filter(|n| !n.is_zero()) {
            *n -= 1u32;
            *next
                .entry(CellClass {
                    is_start: true,
                    ..plain_terminal
                })
                .or_insert_with(BigUint::zero) += 1u32;
        }
        next.retain(|_, n| !n.is_zero());
        classes = next;
        out.push(SymbolicCensus {
            day: d + 1,
            classes: classes.clone(),
        });
    }
    Ok(out)
}
