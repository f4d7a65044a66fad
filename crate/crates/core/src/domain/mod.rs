//! Grid domains, product boxes (combinatorial rectangles when there are two
//! parties), covers and their thickness.
//!
//! Cells are addressed either by their coordinate vector or by a row-major
//! linear index in which the first party's coordinate is most significant.

mod selector;
mod tree;

pub(crate) use selector::Fingerprint;
pub use selector::{hash64, Protocol, Selector};
pub use tree::{compile_tree, ProtocolTree, TreeNode};

use fixedbitset::FixedBitSet;

use crate::error::{CommlabError, Result};

/// Default upper bound on the number of cells of a domain.
pub const DEFAULT_CELL_CAP: usize = 1 << 24;
/// Upper bound on the size of a single dimension.
pub const MAX_DIM_SIZE: usize = 1 << 12;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DomainShape {
    sizes: Vec<usize>,
}

impl DomainShape {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        Self::with_cap(sizes, DEFAULT_CELL_CAP)
    }

    pub fn with_cap(sizes: Vec<usize>, cap: usize) -> Result<Self> {
        if sizes.len() < 2 {
            return Err(CommlabError::invalid(format!(
                "a domain needs at least two parties, got {}",
                sizes.len()
            )));
        }
        let mut total: usize = 1;
        for (i, &s) in sizes.iter().enumerate() {
            if s == 0 {
                return Err(CommlabError::invalid(format!("dimension {i} has size 0")));
            }
            if s > MAX_DIM_SIZE {
                return Err(CommlabError::invalid(format!(
                    "dimension {i} has size {s}, above the per-dimension cap {MAX_DIM_SIZE}"
                )));
            }
            total = total.checked_mul(s).filter(|&t| t <= cap).ok_or_else(|| {
                CommlabError::invalid(format!("domain {sizes:?} exceeds the cell cap {cap}"))
            })?;
        }
        Ok(DomainShape { sizes })
    }

    /// Shape `{0,1}^{n_1} × … × {0,1}^{n_ℓ}`.
    pub fn binary(bits: &[u32]) -> Result<Self> {
        let mut sizes = Vec::with_capacity(bits.len());
        for &b in bits {
            if b >= 13 {
                return Err(CommlabError::invalid(format!("bit width {b} too large")));
            }
            sizes.push(1usize << b);
        }
        Self::new(sizes)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn arity(&self) -> usize {
        self.sizes.len()
    }

    pub fn cell_count(&self) -> usize {
        self.sizes.iter().product()
    }

    /// Bit widths `n_i` when every size is a power of two.
    pub fn bit_widths(&self) -> Option<Vec<u32>> {
        self.sizes
            .iter()
            .map(|&s| s.is_power_of_two().then(|| s.trailing_zeros()))
            .collect()
    }

    pub fn linear_index(&self, cell: &[usize]) -> Result<usize> {
        if cell.len() != self.sizes.len() {
            return Err(CommlabError::invalid(format!(
                "cell {cell:?} has arity {}, domain has arity {}",
                cell.len(),
                self.sizes.len()
            )));
        }
        let mut idx = 0;
        for (&c, &s) in cell.iter().zip(&self.sizes) {
            if c >= s {
                return Err(CommlabError::invalid(format!(
                    "cell {cell:?} out of range for sizes {:?}",
                    self.sizes
                )));
            }
            idx = idx * s + c;
        }
        Ok(idx)
    }

    pub fn cell(&self, idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.sizes.len()];
        self.coords_into(idx, &mut out);
        out
    }

    pub fn coords_into(&self, mut idx: usize, out: &mut [usize]) {
        for (slot, &s) in out.iter_mut().zip(&self.sizes).rev() {
            *slot = idx % s;
            idx /= s;
        }
    }

    pub fn cells(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.cell_count()).map(move |i| self.cell(i))
    }
}

/// A product set `S_1 × … × S_ℓ` of per-party index sets.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rect {
    factors: Vec<FixedBitSet>,
}

impl Rect {
    pub fn new(shape: &DomainShape, factors: Vec<Vec<usize>>) -> Result<Self> {
        if factors.len() != shape.arity() {
            return Err(CommlabError::invalid(format!(
                "box has {} factors, domain has arity {}",
                factors.len(),
                shape.arity()
            )));
        }
        let mut sets = Vec::with_capacity(factors.len());
        for (i, (f, &size)) in factors.iter().zip(shape.sizes()).enumerate() {
            let mut set = FixedBitSet::with_capacity(size);
            for &v in f {
                if v >= size {
                    return Err(CommlabError::invalid(format!(
                        "box factor {i} contains index {v}, dimension size is {size}"
                    )));
                }
                set.insert(v);
            }
            sets.push(set);
        }
        Self::from_sets(shape, sets)
    }

    pub fn from_sets(shape: &DomainShape, factors: Vec<FixedBitSet>) -> Result<Self> {
        let rect = Rect { factors };
        rect.check(shape)?;
        Ok(rect)
    }

    pub fn full(shape: &DomainShape) -> Self {
        let factors = shape
            .sizes()
            .iter()
            .map(|&s| {
                let mut set = FixedBitSet::with_capacity(s);
                set.insert_range(..);
                set
            })
            .collect();
        Rect { factors }
    }

    pub fn singleton(shape: &DomainShape, cell: &[usize]) -> Result<Self> {
        Self::new(shape, cell.iter().map(|&c| vec![c]).collect())
    }

    pub(crate) fn check(&self, shape: &DomainShape) -> Result<()> {
        if self.factors.len() != shape.arity() {
            return Err(CommlabError::invalid(format!(
                "box has {} factors, domain has arity {}",
                self.factors.len(),
                shape.arity()
            )));
        }
        for (i, (f, &size)) in self.factors.iter().zip(shape.sizes()).enumerate() {
            if f.len() != size {
                return Err(CommlabError::invalid(format!(
                    "box factor {i} has universe {}, dimension size is {size}",
                    f.len()
                )));
            }
            if f.is_clear() {
                return Err(CommlabError::invalid(format!("box factor {i} is empty")));
            }
        }
        Ok(())
    }

    pub fn arity(&self) -> usize {
        self.factors.len()
    }

    pub fn factor(&self, party: usize) -> &FixedBitSet {
        &self.factors[party]
    }

    pub fn factor_indices(&self, party: usize) -> Vec<usize> {
        self.factors[party].ones().collect()
    }

    pub fn contains(&self, cell: &[usize]) -> bool {
        cell.len() == self.factors.len()
            && self.factors.iter().zip(cell).all(|(f, &c)| f.contains(c))
    }

    pub fn cell_count(&self) -> usize {
        self.factors.iter().map(|f| f.count_ones(..)).product()
    }

    pub fn intersects(&self, other: &Rect) -> bool {
        self.factors
            .iter()
            .zip(&other.factors)
            .all(|(a, b)| !a.is_disjoint(b))
    }

    pub fn is_subset(&self, other: &Rect) -> bool {
        self.factors
            .iter()
            .zip(&other.factors)
            .all(|(a, b)| a.is_subset(b))
    }

    /// Linear indices of the cells of this box, ascending.
    pub fn cells(&self, shape: &DomainShape) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.cell_count());
        self.for_each_cell(shape, |i| out.push(i));
        out
    }

    pub fn for_each_cell(&self, shape: &DomainShape, mut visit: impl FnMut(usize)) {
        let lists: Vec<Vec<usize>> = self.factors.iter().map(|f| f.ones().collect()).collect();
        let sizes = shape.sizes();
        let mut pos = vec![0usize; lists.len()];
        if lists.iter().any(|l| l.is_empty()) {
            return;
        }
        loop {
            let mut idx = 0;
            for ((p, l), &s) in pos.iter().zip(&lists).zip(sizes) {
                idx = idx * s + l[*p];
            }
            visit(idx);
            // odometer, last coordinate fastest
            let mut d = lists.len();
            loop {
                if d == 0 {
                    return;
                }
                d -= 1;
                pos[d] += 1;
                if pos[d] < lists[d].len() {
                    break;
                }
                pos[d] = 0;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageReport {
    pub covers_domain: bool,
    pub uncovered: Vec<Vec<usize>>,
    pub is_partition: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ThicknessScope {
    Cell(Vec<usize>),
    Box(usize),
    Global,
}

/// An ordered family of boxes over a common domain.
///
/// Construction checks that every box is well formed; whether the boxes
/// actually cover the domain is reported by [`Cover::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cover {
    shape: DomainShape,
    boxes: Vec<Rect>,
}

impl Cover {
    pub fn new(shape: DomainShape, boxes: Vec<Rect>) -> Result<Self> {
        if boxes.is_empty() {
            return Err(CommlabError::invalid("a cover needs at least one box"));
        }
        for (i, b) in boxes.iter().enumerate() {
            b.check(&shape)
                .map_err(|e| CommlabError::invalid(format!("box {i}: {e}")))?;
        }
        Ok(Cover { shape, boxes })
    }

    pub fn shape(&self) -> &DomainShape {
        &self.shape
    }

    pub fn boxes(&self) -> &[Rect] {
        &self.boxes
    }

    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    /// Number of boxes containing each cell, indexed by linear cell index.
    pub fn cell_thickness(&self) -> Vec<u32> {
        let mut counts = vec![0u32; self.shape.cell_count()];
        for b in &self.boxes {
            b.for_each_cell(&self.shape, |i| counts[i] += 1);
        }
        counts
    }

    /// Box indices containing each cell, ascending.
    pub fn incidence(&self) -> Vec<Vec<u32>> {
        let mut inc = vec![Vec::new(); self.shape.cell_count()];
        for (bi, b) in self.boxes.iter().enumerate() {
            b.for_each_cell(&self.shape, |i| inc[i].push(bi as u32));
        }
        inc
    }

    pub fn boxes_containing(&self, cell: &[usize]) -> Vec<usize> {
        self.boxes
            .iter()
            .enumerate()
            .filter(|(_, b)| b.contains(cell))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn validate(&self) -> CoverageReport {
        let counts = self.cell_thickness();
        let uncovered: Vec<Vec<usize>> = counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == 0)
            .map(|(i, _)| self.shape.cell(i))
            .collect();
        let covers_domain = uncovered.is_empty();
        CoverageReport {
            covers_domain,
            is_partition: covers_domain && counts.iter().all(|&c| c == 1),
            uncovered,
        }
    }

    pub fn thickness(&self, scope: &ThicknessScope) -> Result<usize> {
        match scope {
            ThicknessScope::Cell(cell) => {
                self.shape.linear_index(cell)?;
                Ok(self.boxes_containing(cell).len())
            }
            ThicknessScope::Box(i) => {
                let b = self.boxes.get(*i).ok_or_else(|| {
                    CommlabError::invalid(format!(
                        "box index {i} out of range ({} boxes)",
                        self.boxes.len()
                    ))
                })?;
                let counts = self.cell_thickness();
                let mut best = 0;
                b.for_each_cell(&self.shape, |c| best = best.max(counts[c]));
                Ok(best as usize)
            }
            ThicknessScope::Global => {
                Ok(self.cell_thickness().into_iter().max().unwrap_or(0) as usize)
            }
        }
    }

    /// `ρ(R)` for every box.
    pub fn box_thickness(&self) -> Vec<u32> {
        let counts = self.cell_thickness();
        self.boxes
            .iter()
            .map(|b| {
                let mut best = 0;
                b.for_each_cell(&self.shape, |c| best = best.max(counts[c]));
                best
            })
            .collect()
    }

    /// The fixed five-box partition of the 4×4 grid that is not realisable
    /// by any protocol tree.
    pub fn windmill() -> Self {
        let shape = DomainShape::new(vec![4, 4]).expect("4x4 shape");
        let spec: [(&[usize], &[usize]); 5] = [
            (&[0], &[0, 1, 2]),
            (&[0, 1, 2], &[3]),
            (&[3], &[1, 2, 3]),
            (&[1, 2, 3], &[0]),
            (&[1, 2], &[1, 2]),
        ];
        let boxes = spec
            .iter()
            .map(|(r, c)| Rect::new(&shape, vec![r.to_vec(), c.to_vec()]).expect("windmill box"))
            .collect();
        Cover { shape, boxes }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(sizes: &[usize]) -> DomainShape {
        DomainShape::new(sizes.to_vec()).unwrap()
    }

    #[test]
    fn shape_rejects_degenerate_inputs() {
        assert!(DomainShape::new(vec![4]).is_err());
        assert!(DomainShape::new(vec![4, 0]).is_err());
        assert!(DomainShape::new(vec![MAX_DIM_SIZE + 1, 2]).is_err());
        assert!(DomainShape::with_cap(vec![16, 16], 255).is_err());
        assert!(DomainShape::with_cap(vec![16, 16], 256).is_ok());
    }

    #[test]
    fn linear_index_round_trips() {
        let s = grid(&[3, 4, 2]);
        for i in 0..s.cell_count() {
            assert_eq!(s.linear_index(&s.cell(i)).unwrap(), i);
        }
        assert_eq!(s.linear_index(&[1, 0, 0]).unwrap(), 8);
        assert!(s.linear_index(&[3, 0, 0]).is_err());
    }

    #[test]
    fn box_cells_match_membership() {
        let s = grid(&[4, 5]);
        let r = Rect::new(&s, vec![vec![1, 3], vec![0, 2, 4]]).unwrap();
        let cells = r.cells(&s);
        assert_eq!(cells.len(), 6);
        let brute: Vec<usize> = (0..s.cell_count())
            .filter(|&i| r.contains(&s.cell(i)))
            .collect();
        assert_eq!(cells, brute);
    }

    #[test]
    fn malformed_boxes_are_rejected() {
        let s = grid(&[2, 2]);
        assert!(Rect::new(&s, vec![vec![], vec![0]]).is_err());
        assert!(Rect::new(&s, vec![vec![2], vec![0]]).is_err());
        assert!(Rect::new(&s, vec![vec![0]]).is_err());
        assert!(Cover::new(s, vec![]).is_err());
    }

    #[test]
    fn windmill_is_a_partition() {
        let w = Cover::windmill();
        assert_eq!(w.len(), 5);
        let report = w.validate();
        assert!(report.covers_domain);
        assert!(report.is_partition);
        assert_eq!(w.thickness(&ThicknessScope::Global).unwrap(), 1);
        // every one of the 16 cells lies in exactly one box
        for cell in w.shape().cells() {
            assert_eq!(w.boxes_containing(&cell).len(), 1, "cell {cell:?}");
        }
    }

    #[test]
    fn full_box_is_a_partition() {
        let s = grid(&[2, 2]);
        let c = Cover::new(s.clone(), vec![Rect::full(&s)]).unwrap();
        let r = c.validate();
        assert!(r.covers_domain && r.is_partition);
    }

    #[test]
    fn missing_cell_is_reported() {
        let s = grid(&[2, 2]);
        let boxes = vec![
            Rect::new(&s, vec![vec![0], vec![0, 1]]).unwrap(),
            Rect::new(&s, vec![vec![1], vec![0]]).unwrap(),
        ];
        let r = Cover::new(s, boxes).unwrap().validate();
        assert!(!r.covers_domain);
        assert!(!r.is_partition);
        assert_eq!(r.uncovered, vec![vec![1, 1]]);
    }

    #[test]
    fn double_full_box_has_thickness_two() {
        let s = grid(&[2, 2]);
        let c = Cover::new(s.clone(), vec![Rect::full(&s), Rect::full(&s)]).unwrap();
        assert_eq!(c.thickness(&ThicknessScope::Cell(vec![0, 0])).unwrap(), 2);
        assert_eq!(c.thickness(&ThicknessScope::Box(1)).unwrap(), 2);
        assert_eq!(c.thickness(&ThicknessScope::Global).unwrap(), 2);
        let r = c.validate();
        assert!(r.covers_domain && !r.is_partition);
    }

    #[test]
    fn thickness_scope_errors() {
        let s = grid(&[2, 2]);
        let c = Cover::new(s.clone(), vec![Rect::full(&s)]).unwrap();
        assert!(c.thickness(&ThicknessScope::Box(1)).is_err());
        assert!(c.thickness(&ThicknessScope::Cell(vec![2, 0])).is_err());
    }

    #[test]
    fn box_thickness_is_max_over_cells() {
        let s = grid(&[3, 3]);
        let boxes = vec![
            Rect::full(&s),
            Rect::new(&s, vec![vec![0], vec![0]]).unwrap(),
            Rect::new(&s, vec![vec![0, 1], vec![0]]).unwrap(),
        ];
        let c = Cover::new(s, boxes).unwrap();
        assert_eq!(c.box_thickness(), vec![3, 3, 3]);
        assert_eq!(c.cell_thickness()[0], 3);
        assert_eq!(c.cell_thickness()[3], 2);
        assert_eq!(c.cell_thickness()[8], 1);
    }
}
