//! Classical lower and upper bounds for two-party functions: maximal
//! monochromatic rectangles, exact and greedy cover numbers, fooling sets and
//! matrix rank.

use std::time::{Duration, Instant};

use fixedbitset::FixedBitSet;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use std::collections::HashSet;

use crate::domain::{DomainShape, Rect};
use crate::error::{CommlabError, Result};
use crate::functions::ColoredFunction;

/// Default limit on the number of catalog boxes.
pub const DEFAULT_CATALOG_CAP: usize = 1_000_000;
/// Largest domain for exact enumeration and exact cover.
pub const EXACT_CELL_CAP: usize = 1 << 16;
/// Largest candidate set for the exact fooling-set search.
pub const FOOLING_EXACT_CAP: usize = 64;

fn require_two_party(shape: &DomainShape) -> Result<(usize, usize)> {
    match *shape.sizes() {
        [r, c] => Ok((r, c)),
        _ => Err(CommlabError::invalid(format!(
            "bounds need a two-party domain, got {} parties",
            shape.arity()
        ))),
    }
}

/// Maximal monochromatic rectangles, grouped by color.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonochromaticCatalog {
    pub by_color: Vec<Vec<Rect>>,
    /// Enumeration stopped at the cap; the lists are incomplete.
    pub partial: bool,
}

impl MonochromaticCatalog {
    pub fn len(&self) -> usize {
        self.by_color.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(color, box)` pairs, color-major.
    pub fn iter(&self) -> impl Iterator<Item = (u32, &Rect)> {
        self.by_color
            .iter()
            .enumerate()
            .flat_map(|(c, v)| v.iter().map(move |r| (c as u32, r)))
    }
}

/// Column sets of the maximal bicliques of one color: every nonempty
/// intersection of row neighborhoods. The flag is set once `cap` is passed.
fn closed_column_sets(neigh: &[FixedBitSet], cap: usize) -> (Vec<FixedBitSet>, bool) {
    let mut seen: HashSet<FixedBitSet> = HashSet::new();
    let mut work: Vec<FixedBitSet> = Vec::new();
    for n in neigh {
        if !n.is_clear() && seen.insert(n.clone()) {
            work.push(n.clone());
        }
    }
    let mut partial = seen.len() > cap;
    let mut i = 0;
    while i < work.len() && !partial {
        let b = work[i].clone();
        i += 1;
        for n in neigh {
            if b.is_subset(n) {
                continue;
            }
            let mut c = b.clone();
            c.intersect_with(n);
            if !c.is_clear() && seen.insert(c.clone()) {
                work.push(c);
                if seen.len() > cap {
                    partial = true;
                    break;
                }
            }
        }
    }
    work.truncate(cap);
    (work, partial)
}

/// All maximal `f`-monochromatic rectangles, per color, deduplicated and
/// sorted. Aborts with `partial = true` once a color has more than `cap`.
pub fn enumerate_maximal_monochromatic(
    f: &ColoredFunction,
    cap: usize,
) -> Result<MonochromaticCatalog> {
    let shape = f.shape();
    let (rows, cols) = require_two_party(shape)?;
    if shape.cell_count() > EXACT_CELL_CAP {
        return Err(CommlabError::SizeCap(format!(
            "maximal rectangle enumeration is limited to {EXACT_CELL_CAP} cells, domain has {}",
            shape.cell_count()
        )));
    }
    let per_color: Vec<(Vec<Rect>, bool)> = (0..f.num_colors())
        .into_par_iter()
        .map(|color| {
            let neigh: Vec<FixedBitSet> = (0..rows)
                .map(|x| {
                    let mut b = FixedBitSet::with_capacity(cols);
                    for y in 0..cols {
                        if f.color_at(x * cols + y) == color {
                            b.insert(y);
                        }
                    }
                    b
                })
                .collect();
            let (sets, partial) = closed_column_sets(&neigh, cap);
            let mut boxes: Vec<Rect> = sets
                .into_iter()
                .map(|b| {
                    let mut a = FixedBitSet::with_capacity(rows);
                    for (x, n) in neigh.iter().enumerate() {
                        if b.is_subset(n) {
                            a.insert(x);
                        }
                    }
                    Rect::from_sets(shape, vec![a, b]).expect("nonempty factors")
                })
                .collect();
            boxes.sort();
            (boxes, partial)
        })
        .collect();
    let partial = per_color.iter().any(|(_, p)| *p);
    Ok(MonochromaticCatalog {
        by_color: per_color.into_iter().map(|(b, _)| b).collect(),
        partial,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoverMode {
    Exact { timeout: Option<Duration> },
    Greedy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoverStatus {
    Optimal,
    Greedy,
    /// Exact search ran out of time; `lower..=upper` brackets the optimum.
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverResult {
    pub lower: usize,
    pub upper: usize,
    /// Best cover found, as `(color, box)`.
    pub witness: Vec<(u32, Rect)>,
    pub status: CoverStatus,
}

impl CoverResult {
    /// The optimum, when known.
    pub fn exact(&self) -> Option<usize> {
        (self.status == CoverStatus::Optimal).then_some(self.upper)
    }
}

/// Set-cover instance for one color over local cell indices.
struct ColorInstance {
    sets: Vec<FixedBitSet>,
    /// Candidate sets per local cell.
    candidates: Vec<Vec<usize>>,
    /// Cells sorted by (candidate count, index).
    order: Vec<usize>,
    cells: usize,
}

impl ColorInstance {
    fn new(f: &ColoredFunction, color: u32, boxes: &[Rect]) -> Self {
        let shape = f.shape();
        let global: Vec<usize> = (0..shape.cell_count())
            .filter(|&i| f.color_at(i) == color)
            .collect();
        let mut local = vec![usize::MAX; shape.cell_count()];
        for (l, &g) in global.iter().enumerate() {
            local[g] = l;
        }
        let m = global.len();
        let mut candidates = vec![Vec::new(); m];
        let sets: Vec<FixedBitSet> = boxes
            .iter()
            .enumerate()
            .map(|(s, b)| {
                let mut set = FixedBitSet::with_capacity(m);
                b.for_each_cell(shape, |g| {
                    let l = local[g];
                    set.insert(l);
                    candidates[l].push(s);
                });
                set
            })
            .collect();
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by_key(|&c| (candidates[c].len(), c));
        ColorInstance {
            sets,
            candidates,
            order,
            cells: m,
        }
    }

    fn greedy(&self) -> Vec<usize> {
        let mut covered = FixedBitSet::with_capacity(self.cells);
        let mut chosen = Vec::new();
        while covered.count_ones(..) < self.cells {
            let (best, gain) = self
                .sets
                .iter()
                .enumerate()
                .map(|(i, s)| (i, s.difference(&covered).count()))
                .fold((0, 0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if gain == 0 {
                break;
            }
            covered.union_with(&self.sets[best]);
            chosen.push(best);
        }
        chosen
    }

    /// Uncovered cells pairwise sharing no candidate set; each needs its own.
    fn independent_bound(&self, covered: &FixedBitSet, used: &mut FixedBitSet) -> usize {
        used.clear();
        let mut count = 0;
        for &c in &self.order {
            if covered.contains(c) || self.candidates[c].iter().any(|&s| used.contains(s)) {
                continue;
            }
            count += 1;
            for &s in &self.candidates[c] {
                used.insert(s);
            }
        }
        count
    }

    fn is_partition(&self) -> bool {
        self.sets.iter().map(|s| s.count_ones(..)).sum::<usize>() == self.cells
    }
}

struct Search<'a> {
    inst: &'a ColorInstance,
    best: Vec<usize>,
    deadline: Option<Instant>,
    nodes: u64,
    timed_out: bool,
    scratch: FixedBitSet,
}

impl Search<'_> {
    fn run(&mut self, covered: &FixedBitSet, chosen: &mut Vec<usize>) {
        if self.timed_out {
            return;
        }
        self.nodes += 1;
        if self.nodes.is_multiple_of(1024) {
            if let Some(d) = self.deadline {
                if Instant::now() >= d {
                    self.timed_out = true;
                    return;
                }
            }
        }
        let Some(&cell) = self.inst.order.iter().find(|&&c| !covered.contains(c)) else {
            if chosen.len() < self.best.len() {
                self.best = chosen.clone();
            }
            return;
        };
        let lb = chosen.len() + self.inst.independent_bound(covered, &mut self.scratch);
        if lb >= self.best.len() {
            return;
        }
        let mut cands: Vec<(usize, usize)> = self.inst.candidates[cell]
            .iter()
            .map(|&s| (self.inst.sets[s].difference(covered).count(), s))
            .collect();
        cands.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        for (_, s) in cands {
            let mut next = covered.clone();
            next.union_with(&self.inst.sets[s]);
            chosen.push(s);
            self.run(&next, chosen);
            chosen.pop();
            if self.timed_out {
                return;
            }
        }
    }
}

/// Per-color result: (lower, chosen box indices, optimal).
fn solve_color(inst: &ColorInstance, deadline: Option<Instant>) -> (usize, Vec<usize>, bool) {
    if inst.cells == 0 {
        return (0, Vec::new(), true);
    }
    if inst.is_partition() {
        return (inst.sets.len(), (0..inst.sets.len()).collect(), true);
    }
    let greedy = inst.greedy();
    let mut scratch = FixedBitSet::with_capacity(inst.sets.len());
    let root_lb = inst.independent_bound(&FixedBitSet::with_capacity(inst.cells), &mut scratch);
    if root_lb == greedy.len() {
        return (root_lb, greedy, true);
    }
    let mut search = Search {
        inst,
        best: greedy,
        deadline,
        nodes: 0,
        timed_out: false,
        scratch,
    };
    search.run(&FixedBitSet::with_capacity(inst.cells), &mut Vec::new());
    if search.timed_out {
        (root_lb, search.best, false)
    } else {
        (search.best.len(), search.best, true)
    }
}

/// Minimum number of monochromatic rectangles covering the domain, over a
/// precomputed catalog. Colors are solved independently, since boxes of
/// different colors never share a cell.
pub fn cover_from_catalog(
    f: &ColoredFunction,
    catalog: &MonochromaticCatalog,
    mode: CoverMode,
) -> Result<CoverResult> {
    if catalog.partial {
        return Err(CommlabError::SizeCap(
            "the rectangle catalog hit its cap; raise the cap or shrink the instance".into(),
        ));
    }
    if catalog.by_color.len() != f.num_colors() as usize {
        return Err(CommlabError::invalid("catalog does not match the function"));
    }
    let deadline = match mode {
        CoverMode::Exact { timeout } => timeout.map(|t| Instant::now() + t),
        CoverMode::Greedy => None,
    };
    let mut result = CoverResult {
        lower: 0,
        upper: 0,
        witness: Vec::new(),
        status: match mode {
            CoverMode::Exact { .. } => CoverStatus::Optimal,
            CoverMode::Greedy => CoverStatus::Greedy,
        },
    };
    for (color, boxes) in catalog.by_color.iter().enumerate() {
        let inst = ColorInstance::new(f, color as u32, boxes);
        let (lower, chosen) = match mode {
            CoverMode::Greedy => {
                let mut scratch = FixedBitSet::with_capacity(inst.sets.len());
                let lb =
                    inst.independent_bound(&FixedBitSet::with_capacity(inst.cells), &mut scratch);
                (lb, inst.greedy())
            }
            CoverMode::Exact { .. } => {
                let (lb, chosen, optimal) = solve_color(&inst, deadline);
                if !optimal {
                    result.status = CoverStatus::Timeout;
                }
                (lb, chosen)
            }
        };
        result.lower += lower;
        result.upper += chosen.len();
        let mut chosen = chosen;
        chosen.sort_unstable();
        result
            .witness
            .extend(chosen.into_iter().map(|s| (color as u32, boxes[s].clone())));
    }
    validate_witness(f, &result.witness)?;
    Ok(result)
}

/// Catalog with [`DEFAULT_CATALOG_CAP`], then [`cover_from_catalog`].
pub fn cover_number(f: &ColoredFunction, mode: CoverMode) -> Result<CoverResult> {
    let catalog = enumerate_maximal_monochromatic(f, DEFAULT_CATALOG_CAP)?;
    cover_from_catalog(f, &catalog, mode)
}

/// Checks that `witness` covers the domain with monochromatic boxes of the
/// stated colors.
pub fn validate_witness(f: &ColoredFunction, witness: &[(u32, Rect)]) -> Result<()> {
    let shape = f.shape();
    let mut covered = FixedBitSet::with_capacity(shape.cell_count());
    for (color, b) in witness {
        let mut ok = true;
        b.for_each_cell(shape, |c| {
            ok &= f.color_at(c) == *color;
            covered.insert(c);
        });
        if !ok {
            return Err(CommlabError::invalid(format!(
                "witness box {:?} is not monochromatic of color {color}",
                (0..b.arity())
                    .map(|p| b.factor_indices(p))
                    .collect::<Vec<_>>()
            )));
        }
    }
    if let Some(c) = (0..shape.cell_count()).find(|&c| !covered.contains(c)) {
        return Err(CommlabError::UncoveredCell {
            cell: shape.cell(c),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FoolingMode {
    Exact,
    Greedy,
}

/// A fooling set for `color`: same-colored cells such that every crossed
/// pair leaves the color. Cells are linear indices in ascending order.
pub fn fooling_set(f: &ColoredFunction, color: u32, mode: FoolingMode) -> Result<Vec<usize>> {
    let (_, cols) = require_two_party(f.shape())?;
    let cand: Vec<usize> = (0..f.shape().cell_count())
        .filter(|&i| f.color_at(i) == color)
        .collect();
    if cand.is_empty() {
        return Err(CommlabError::invalid(format!(
            "color {color} does not occur"
        )));
    }
    let fools = |a: usize, b: usize| {
        let (x1, y1) = (a / cols, a % cols);
        let (x2, y2) = (b / cols, b % cols);
        f.color_at(x1 * cols + y2) != color || f.color_at(x2 * cols + y1) != color
    };
    match mode {
        FoolingMode::Greedy => {
            let mut set: Vec<usize> = Vec::new();
            for &c in &cand {
                if set.iter().all(|&s| fools(s, c)) {
                    set.push(c);
                }
            }
            Ok(set)
        }
        FoolingMode::Exact => {
            if cand.len() > FOOLING_EXACT_CAP {
                return Err(CommlabError::SizeCap(format!(
                    "exact fooling set search handles at most {FOOLING_EXACT_CAP} cells of one color, \
                     color {color} has {}; use greedy mode",
                    cand.len()
                )));
            }
            let n = cand.len();
            let adj: Vec<u64> = (0..n)
                .map(|i| {
                    (0..n)
                        .filter(|&j| j != i && fools(cand[i], cand[j]))
                        .fold(0u64, |m, j| m | 1 << j)
                })
                .collect();
            let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
            let mut best = 0u64;
            max_clique(&adj, 0, all, 0, &mut best);
            Ok((0..n)
                .filter(|&i| best >> i & 1 == 1)
                .map(|i| cand[i])
                .collect())
        }
    }
}

/// Bron–Kerbosch with pivoting; keeps the first largest clique found.
fn max_clique(adj: &[u64], r: u64, mut p: u64, mut x: u64, best: &mut u64) {
    if p == 0 {
        if x == 0 && r.count_ones() > best.count_ones() {
            *best = r;
        }
        return;
    }
    if r.count_ones() + p.count_ones() <= best.count_ones() {
        return;
    }
    let pivot = {
        let px = p | x;
        (0..64)
            .filter(|&u| px >> u & 1 == 1)
            .max_by_key(|&u| ((p & adj[u]).count_ones(), std::cmp::Reverse(u)))
            .expect("nonempty")
    };
    let mut todo = p & !adj[pivot];
    while todo != 0 {
        let v = todo.trailing_zeros() as usize;
        todo &= todo - 1;
        let bit = 1u64 << v;
        max_clique(adj, r | bit, p & adj[v], x & adj[v], best);
        p &= !bit;
        x |= bit;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Gf2,
    Rational,
}

/// Rank of the communication matrix (boolean `f`), or of the indicator
/// matrix of `color`.
pub fn comm_matrix_rank(f: &ColoredFunction, field: Field, color: Option<u32>) -> Result<usize> {
    let (rows, cols) = require_two_party(f.shape())?;
    let entry: Box<dyn Fn(usize) -> bool> = match color {
        Some(c) => {
            if c >= f.num_colors() {
                return Err(CommlabError::invalid(format!("color {c} does not occur")));
            }
            Box::new(move |i| f.color_at(i) == c)
        }
        None => {
            if !f.is_boolean() {
                return Err(CommlabError::invalid(
                    "rank without a color needs a 0/1-valued function",
                ));
            }
            Box::new(|i| f.color_at(i) == 1)
        }
    };
    let matrix: Vec<Vec<bool>> = (0..rows)
        .map(|x| (0..cols).map(|y| entry(x * cols + y)).collect())
        .collect();
    Ok(match field {
        Field::Gf2 => rank_gf2(&matrix),
        Field::Rational => rank_rational(&matrix),
    })
}

/// Bit-packed Gaussian elimination over GF(2).
pub fn rank_gf2(matrix: &[Vec<bool>]) -> usize {
    let cols = matrix.first().map_or(0, Vec::len);
    let words = cols.div_ceil(64);
    let mut rows: Vec<Vec<u64>> = matrix
        .iter()
        .map(|r| {
            let mut w = vec![0u64; words];
            for (j, &b) in r.iter().enumerate() {
                if b {
                    w[j / 64] |= 1 << (j % 64);
                }
            }
            w
        })
        .collect();
    let mut rank = 0;
    for col in 0..cols {
        let (wi, bit) = (col / 64, 1u64 << (col % 64));
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][wi] & bit != 0) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[wi] & bit != 0 {
                for (a, b) in row.iter_mut().zip(&pivot) {
                    *a ^= b;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Fraction-free (Bareiss) elimination over the integers.
pub fn rank_rational(matrix: &[Vec<bool>]) -> usize {
    let cols = matrix.first().map_or(0, Vec::len);
    let mut m: Vec<Vec<BigInt>> = matrix
        .iter()
        .map(|r| {
            r.iter()
                .map(|&b| if b { BigInt::one() } else { BigInt::zero() })
                .collect()
        })
        .collect();
    let n = m.len();
    let mut rank = 0;
    let mut prev = BigInt::one();
    for col in 0..cols {
        let Some(p) = (rank..n).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        for r in rank + 1..n {
            for c in col + 1..cols {
                let v = (&m[rank][col] * &m[r][c] - &m[r][col] * &m[rank][c]) / &prev;
                m[r][c] = v;
            }
            m[r][col] = BigInt::zero();
        }
        prev = m[rank][col].clone();
        rank += 1;
        if rank == n {
            break;
        }
    }
    rank
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub timeout: Option<Duration>,
    pub catalog_cap: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            timeout: Some(Duration::from_secs(60)),
            catalog_cap: DEFAULT_CATALOG_CAP,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FoolingEntry {
    pub color: u32,
    pub size: usize,
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundSummary {
    /// Exact (or timed-out) cover; `None` if the catalog was incomplete.
    pub cover: Option<CoverResult>,
    pub cover_greedy: Option<usize>,
    pub fooling: Vec<FoolingEntry>,
    pub rank_rational: Vec<usize>,
    pub rank_gf2: Vec<usize>,
    pub color_count: usize,
    pub catalog_size: usize,
    pub catalog_partial: bool,
    /// Violated consistency relations; empty when everything agrees.
    pub inconsistencies: Vec<String>,
}

impl BoundSummary {
    pub fn cover_exact(&self) -> Option<usize> {
        self.cover.as_ref().and_then(CoverResult::exact)
    }

    pub fn timed_out(&self) -> bool {
        self.cover
            .as_ref()
            .is_some_and(|c| c.status == CoverStatus::Timeout)
    }

    /// Sum over colors of the best fooling set found.
    pub fn fooling_best(&self) -> usize {
        self.fooling.iter().map(|e| e.size).sum()
    }

    pub fn rank_rational_total(&self) -> usize {
        self.rank_rational.iter().sum()
    }

    pub fn rank_gf2_total(&self) -> usize {
        self.rank_gf2.iter().sum()
    }
}

/// Runs every bound on `f` and cross-checks them.
pub fn bound_summary(f: &ColoredFunction, budget: &Budget) -> Result<BoundSummary> {
    require_two_party(f.shape())?;
    let colors = f.num_colors();
    let catalog = enumerate_maximal_monochromatic(f, budget.catalog_cap)?;
    let (cover, cover_greedy) = if catalog.partial {
        (None, None)
    } else {
        let exact = cover_from_catalog(
            f,
            &catalog,
            CoverMode::Exact {
                timeout: budget.timeout,
            },
        )?;
        let greedy = cover_from_catalog(f, &catalog, CoverMode::Greedy)?;
        (Some(exact), Some(greedy.upper))
    };
    let fooling = (0..colors)
        .into_par_iter()
        .map(|c| {
            let (set, exact) = match fooling_set(f, c, FoolingMode::Exact) {
                Ok(s) => (s, true),
                Err(CommlabError::SizeCap(_)) => (fooling_set(f, c, FoolingMode::Greedy)?, false),
                Err(e) => return Err(e),
            };
            Ok(FoolingEntry {
                color: c,
                size: set.len(),
                exact,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let rank_rational = (0..colors)
        .into_par_iter()
        .map(|c| comm_matrix_rank(f, Field::Rational, Some(c)))
        .collect::<Result<Vec<_>>>()?;
    let rank_gf2 = (0..colors)
        .map(|c| comm_matrix_rank(f, Field::Gf2, Some(c)))
        .collect::<Result<Vec<_>>>()?;

    let color_count = colors as usize;
    let mut inconsistencies = Vec::new();
    if let Some(g) = cover_greedy {
        if color_count > g {
            inconsistencies.push(format!(
                "color count {color_count} exceeds greedy cover {g}"
            ));
        }
    }
    if let Some(c) = &cover {
        if let Some(g) = cover_greedy {
            if c.upper > g {
                inconsistencies.push(format!("exact cover {} exceeds greedy cover {g}", c.upper));
            }
        }
        if let Some(e) = c.exact() {
            if e < color_count {
                inconsistencies.push(format!("exact cover {e} below color count {color_count}"));
            }
        }
        for entry in &fooling {
            let boxes = c
                .witness
                .iter()
                .filter(|(col, _)| *col == entry.color)
                .count();
            if entry.size > boxes {
                inconsistencies.push(format!(
                    "fooling set of size {} for color {} exceeds the {boxes} boxes of that color",
                    entry.size, entry.color
                ));
            }
        }
    }
    Ok(BoundSummary {
        cover,
        cover_greedy,
        fooling,
        rank_rational,
        rank_gf2,
        color_count,
        catalog_size: catalog.len(),
        catalog_partial: catalog.partial,
        inconsistencies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{gen_function, FunctionKind};
    use rand::{Rng, SeedableRng};

    fn xor(n: u32) -> ColoredFunction {
        gen_function(&FunctionKind::Xor { n }).unwrap()
    }

    fn eq(n: u32) -> ColoredFunction {
        gen_function(&FunctionKind::Eq { n }).unwrap()
    }

    fn constant(r: usize, c: usize) -> ColoredFunction {
        gen_function(&FunctionKind::Constant { sizes: vec![r, c] }).unwrap()
    }

    fn exact(f: &ColoredFunction) -> usize {
        cover_number(f, CoverMode::Exact { timeout: None })
            .unwrap()
            .exact()
            .unwrap()
    }

    #[test]
    fn catalog_examples() {
        let c = enumerate_maximal_monochromatic(&constant(2, 2), 100).unwrap();
        assert_eq!(c.by_color, vec![vec![Rect::full(constant(2, 2).shape())]]);
        let c = enumerate_maximal_monochromatic(&xor(1), 100).unwrap();
        assert_eq!(
            c.by_color.iter().map(Vec::len).collect::<Vec<_>>(),
            vec![2, 2]
        );
        assert!(c.iter().all(|(_, b)| b.cell_count() == 1));
        let c = enumerate_maximal_monochromatic(&eq(2), 100).unwrap();
        assert_eq!(c.by_color[1].len(), 4);
        assert!(c.by_color[1].iter().all(|b| b.cell_count() == 1));
    }

    #[test]
    fn catalog_cap_is_flagged() {
        let c = enumerate_maximal_monochromatic(&eq(3), 2).unwrap();
        assert!(c.partial);
        assert!(cover_from_catalog(&eq(3), &c, CoverMode::Greedy).is_err());
    }

    #[test]
    fn cover_examples() {
        assert_eq!(exact(&constant(3, 4)), 1);
        assert_eq!(exact(&xor(1)), 4);
        assert_eq!(exact(&xor(2)), 16);
        assert_eq!(exact(&eq(1)), 4);
        // off-diagonal of eq(2): 12 cells, cover by 4 "row minus diagonal" boxes
        assert_eq!(exact(&eq(2)), 4 + 4);
    }

    #[test]
    fn fooling_examples() {
        assert_eq!(
            fooling_set(&eq(2), 1, FoolingMode::Exact).unwrap(),
            vec![0, 5, 10, 15]
        );
        assert_eq!(
            fooling_set(&constant(2, 2), 0, FoolingMode::Exact)
                .unwrap()
                .len(),
            1
        );
        assert_eq!(
            fooling_set(&xor(1), 0, FoolingMode::Exact).unwrap(),
            vec![0, 3]
        );
        assert!(fooling_set(&xor(1), 5, FoolingMode::Exact).is_err());
        let big = constant(9, 9);
        assert!(matches!(
            fooling_set(&big, 0, FoolingMode::Exact),
            Err(CommlabError::SizeCap(_))
        ));
        assert_eq!(fooling_set(&big, 0, FoolingMode::Greedy).unwrap().len(), 1);
    }

    #[test]
    fn rank_examples() {
        assert_eq!(
            comm_matrix_rank(&eq(2), Field::Rational, Some(1)).unwrap(),
            4
        );
        assert_eq!(comm_matrix_rank(&xor(1), Field::Gf2, None).unwrap(), 2);
        assert_eq!(
            comm_matrix_rank(&constant(3, 3), Field::Rational, Some(0)).unwrap(),
            1
        );
        assert!(comm_matrix_rank(&xor(2), Field::Rational, None).is_err());
        // [[1,1,0],[0,1,1],[1,0,1]]: rank 3 over Q, 2 over GF(2)
        let m = vec![
            vec![true, true, false],
            vec![false, true, true],
            vec![true, false, true],
        ];
        assert_eq!(rank_rational(&m), 3);
        assert_eq!(rank_gf2(&m), 2);
    }

    #[test]
    fn summary_examples() {
        let s = bound_summary(&xor(2), &Budget::default()).unwrap();
        assert_eq!(s.color_count, 4);
        assert_eq!(s.cover_exact(), Some(16));
        assert_eq!(s.fooling[0].size, 4);
        assert!(s.inconsistencies.is_empty());

        let s = bound_summary(&constant(2, 3), &Budget::default()).unwrap();
        assert_eq!(s.cover_exact(), Some(1));
        assert_eq!(s.fooling_best(), 1);
        assert_eq!(s.rank_rational_total(), 1);

        let s = bound_summary(&eq(2), &Budget::default()).unwrap();
        assert_eq!(s.rank_rational[1], 4);
        assert_eq!(s.fooling[1].size, 4);
        let ones = s
            .cover
            .unwrap()
            .witness
            .iter()
            .filter(|(c, _)| *c == 1)
            .count();
        assert_eq!(ones, 4);
    }

    /// Rank by partial-pivoting elimination in floating point; exact enough
    /// for small 0/1 matrices.
    fn float_rank(m: &[Vec<bool>]) -> usize {
        let mut a: Vec<Vec<f64>> = m
            .iter()
            .map(|r| r.iter().map(|&b| f64::from(u8::from(b))).collect())
            .collect();
        let (n, cols) = (a.len(), a[0].len());
        let mut rank = 0;
        for c in 0..cols {
            let p = (rank..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()));
            let Some(p) = p.filter(|&p| a[p][c].abs() > 1e-9) else {
                continue;
            };
            a.swap(rank, p);
            let pivot = a[rank].clone();
            for row in &mut a[rank + 1..n] {
                let k = row[c] / pivot[c];
                for (x, y) in row[c..].iter_mut().zip(&pivot[c..]) {
                    *x -= k * y;
                }
            }
            rank += 1;
        }
        rank
    }

    #[test]
    fn rational_rank_matches_float_elimination() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..300 {
            let (r, c) = (rng.gen_range(1..=7), rng.gen_range(1..=7));
            let density = rng.gen_range(0.1..0.9);
            let m: Vec<Vec<bool>> = (0..r)
                .map(|_| (0..c).map(|_| rng.gen_bool(density)).collect())
                .collect();
            assert_eq!(rank_rational(&m), float_rank(&m), "{m:?}");
            assert!(rank_gf2(&m) <= rank_rational(&m));
        }
    }

    /// Smallest subcover by enumerating every subset of the catalog.
    fn brute_force_cover(f: &ColoredFunction, catalog: &MonochromaticCatalog) -> usize {
        let boxes: Vec<Vec<usize>> = catalog.iter().map(|(_, b)| b.cells(f.shape())).collect();
        let n = boxes.len();
        let cells = f.shape().cell_count();
        let mut best = usize::MAX;
        for mask in 0u32..(1 << n) {
            let k = mask.count_ones() as usize;
            if k >= best {
                continue;
            }
            let mut cov = vec![false; cells];
            for (i, b) in boxes.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    for &c in b {
                        cov[c] = true;
                    }
                }
            }
            if cov.iter().all(|&v| v) {
                best = k;
            }
        }
        best
    }

    #[test]
    fn exact_cover_matches_brute_force() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut checked = 0;
        for seed in 0..200u64 {
            let f = gen_function(&FunctionKind::Random {
                sizes: vec![rng.gen_range(1..=4), rng.gen_range(1..=4)],
                colors: rng.gen_range(1..=3),
                seed,
            })
            .unwrap();
            let cat = enumerate_maximal_monochromatic(&f, 1000).unwrap();
            if cat.len() > 14 {
                continue;
            }
            let got = cover_from_catalog(&f, &cat, CoverMode::Exact { timeout: None }).unwrap();
            assert_eq!(
                got.exact().unwrap(),
                brute_force_cover(&f, &cat),
                "seed {seed}"
            );
            checked += 1;
        }
        assert!(checked > 50);
    }

    #[test]
    fn timeout_reports_bracket() {
        let f = gen_function(&FunctionKind::Random {
            sizes: vec![24, 24],
            colors: 2,
            seed: 5,
        })
        .unwrap();
        let r = cover_number(
            &f,
            CoverMode::Exact {
                timeout: Some(Duration::ZERO),
            },
        )
        .unwrap();
        assert!(r.lower <= r.upper);
        validate_witness(&f, &r.witness).unwrap();
    }
}
