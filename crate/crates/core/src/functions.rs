//! Colored functions and relations over a domain, cover generators, and
//! protocols that may err (the building blocks of Arthur–Merlin protocols).

use fixedbitset::FixedBitSet;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{compile_tree, Cover, DomainShape, Protocol, ProtocolTree, Rect, Selector};
use crate::error::{CommlabError, Result};

/// Stop probability used for the base partition of `random-bounded` covers.
pub const RANDOM_TREE_STOP: f64 = 0.25;

/// A total function from cells to colors `0..num_colors`, every color used.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoredFunction {
    shape: DomainShape,
    colors: Vec<u32>,
    num_colors: u32,
}

impl ColoredFunction {
    pub fn new(shape: DomainShape, colors: Vec<u32>) -> Result<Self> {
        if colors.len() != shape.cell_count() {
            return Err(CommlabError::invalid(format!(
                "color table has {} entries, domain has {} cells",
                colors.len(),
                shape.cell_count()
            )));
        }
        let num_colors = colors.iter().max().map_or(0, |&m| m + 1);
        let mut seen = vec![false; num_colors as usize];
        for &c in &colors {
            seen[c as usize] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(CommlabError::invalid(format!(
                "color ids must be contiguous from 0; color {missing} is unused"
            )));
        }
        Ok(ColoredFunction {
            shape,
            colors,
            num_colors,
        })
    }

    /// Relabels arbitrary ids to `0..k` preserving their order.
    pub fn compacted(shape: DomainShape, raw: Vec<u32>) -> Result<Self> {
        let mut ids = raw.clone();
        ids.sort_unstable();
        ids.dedup();
        let colors = raw
            .iter()
            .map(|c| ids.binary_search(c).expect("present") as u32)
            .collect();
        Self::new(shape, colors)
    }

    pub fn shape(&self) -> &DomainShape {
        &self.shape
    }

    pub fn colors(&self) -> &[u32] {
        &self.colors
    }

    pub fn num_colors(&self) -> u32 {
        self.num_colors
    }

    pub fn color_at(&self, linear: usize) -> u32 {
        self.colors[linear]
    }

    pub fn color(&self, cell: &[usize]) -> Result<u32> {
        Ok(self.colors[self.shape.linear_index(cell)?])
    }

    pub fn is_boolean(&self) -> bool {
        self.num_colors <= 2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FunctionKind {
    /// Bitwise XOR of two `n`-bit inputs.
    Xor {
        n: u32,
    },
    /// 1 on the diagonal, 0 elsewhere.
    Eq {
        n: u32,
    },
    /// `ℓ`-party `A·x_ℓ` over GF(2): parties `1..ℓ-1` hold the `n`-bit
    /// columns of `A`, party `ℓ` holds an `(ℓ-1)`-bit vector. Bit `j` of an
    /// input's index is vector component `j`.
    MatVec {
        parties: usize,
        n: u32,
    },
    Constant {
        sizes: Vec<usize>,
    },
    Random {
        sizes: Vec<usize>,
        colors: u32,
        seed: u64,
    },
}

pub fn gen_function(kind: &FunctionKind) -> Result<ColoredFunction> {
    match kind {
        FunctionKind::Xor { n } | FunctionKind::Eq { n } => {
            if *n == 0 {
                return Err(CommlabError::invalid("bit width must be at least 1"));
            }
            let shape = DomainShape::binary(&[*n, *n])?;
            let side = shape.sizes()[0];
            let xor = matches!(kind, FunctionKind::Xor { .. });
            let colors = (0..shape.cell_count())
                .map(|i| {
                    let (x, y) = (i / side, i % side);
                    if xor {
                        (x ^ y) as u32
                    } else {
                        u32::from(x == y)
                    }
                })
                .collect();
            ColoredFunction::new(shape, colors)
        }
        FunctionKind::MatVec { parties, n } => {
            let parties = *parties;
            if parties < 2 || *n == 0 {
                return Err(CommlabError::invalid(
                    "matvec needs at least two parties and n ≥ 1",
                ));
            }
            let mut bits = vec![*n; parties - 1];
            bits.push((parties - 1) as u32);
            let shape = DomainShape::binary(&bits)?;
            let mut coords = vec![0usize; parties];
            let colors = (0..shape.cell_count())
                .map(|i| {
                    shape.coords_into(i, &mut coords);
                    let v = coords[parties - 1];
                    coords[..parties - 1]
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| v >> j & 1 == 1)
                        .fold(0usize, |acc, (_, &col)| acc ^ col) as u32
                })
                .collect();
            ColoredFunction::compacted(shape, colors)
        }
        FunctionKind::Constant { sizes } => {
            let shape = DomainShape::new(sizes.clone())?;
            let cells = shape.cell_count();
            ColoredFunction::new(shape, vec![0; cells])
        }
        FunctionKind::Random {
            sizes,
            colors,
            seed,
        } => {
            if *colors == 0 {
                return Err(CommlabError::invalid(
                    "random function needs at least one color",
                ));
            }
            let shape = DomainShape::new(sizes.clone())?;
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let raw = (0..shape.cell_count())
                .map(|_| rng.gen_range(0..*colors))
                .collect();
            ColoredFunction::compacted(shape, raw)
        }
    }
}

/// A function constant on every connected group of overlapping boxes, with
/// one of `colors` random colors per group. Every box of `cover` is then
/// monochromatic for it.
pub fn function_for_cover<R: Rng + ?Sized>(
    cover: &Cover,
    colors: u32,
    rng: &mut R,
) -> Result<ColoredFunction> {
    let n = cover.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let boxes = cover.boxes();
    for i in 0..n {
        for j in i + 1..n {
            if boxes[i].intersects(&boxes[j]) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[b.max(a)] = a.min(b);
                }
            }
        }
    }
    let group_color: Vec<u32> = (0..n).map(|_| rng.gen_range(0..colors.max(1))).collect();
    let mut raw = vec![0u32; cover.shape().cell_count()];
    for (i, b) in boxes.iter().enumerate() {
        let c = group_color[find(&mut parent, i)];
        b.for_each_cell(cover.shape(), |cell| raw[cell] = c);
    }
    ColoredFunction::compacted(cover.shape().clone(), raw)
}

/// Per-cell sets of admissible colors from `0..num_colors`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    shape: DomainShape,
    num_colors: u32,
    admissible: Vec<FixedBitSet>,
}

impl Relation {
    pub fn new(shape: DomainShape, num_colors: u32, admissible: Vec<Vec<u32>>) -> Result<Self> {
        if admissible.len() != shape.cell_count() {
            return Err(CommlabError::invalid(format!(
                "relation table has {} entries, domain has {} cells",
                admissible.len(),
                shape.cell_count()
            )));
        }
        let mut sets = Vec::with_capacity(admissible.len());
        for (i, zs) in admissible.iter().enumerate() {
            let mut set = FixedBitSet::with_capacity(num_colors as usize);
            for &z in zs {
                if z >= num_colors {
                    return Err(CommlabError::invalid(format!(
                        "cell {:?} admits color {z}, outside 0..{num_colors}",
                        shape.cell(i)
                    )));
                }
                set.insert(z as usize);
            }
            if set.is_clear() {
                return Err(CommlabError::invalid(format!(
                    "cell {:?} admits no color",
                    shape.cell(i)
                )));
            }
            sets.push(set);
        }
        Ok(Relation {
            shape,
            num_colors,
            admissible: sets,
        })
    }

    pub fn from_function(f: &ColoredFunction) -> Self {
        let admissible = f
            .colors()
            .iter()
            .map(|&c| {
                let mut s = FixedBitSet::with_capacity(f.num_colors() as usize);
                s.insert(c as usize);
                s
            })
            .collect();
        Relation {
            shape: f.shape().clone(),
            num_colors: f.num_colors(),
            admissible,
        }
    }

    pub fn shape(&self) -> &DomainShape {
        &self.shape
    }

    pub fn num_colors(&self) -> u32 {
        self.num_colors
    }

    pub fn admissible(&self, linear: usize) -> &FixedBitSet {
        &self.admissible[linear]
    }

    pub fn admits(&self, linear: usize, z: u32) -> bool {
        self.admissible[linear].contains(z as usize)
    }

    /// Admissible sets as sorted color lists, in linear cell order.
    pub fn table(&self) -> Vec<Vec<u32>> {
        self.admissible
            .iter()
            .map(|s| s.ones().map(|z| z as u32).collect())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RelationKind {
    /// Colors within Hamming distance `floor(δ·n)` of `x ⊕ y`.
    ApproxXor { n: u32, delta: f64 },
    Table {
        sizes: Vec<usize>,
        num_colors: u32,
        admissible: Vec<Vec<u32>>,
    },
}

/// Largest Hamming radius `r` with `r ≤ δ·n`, tolerant to the rounding of
/// products such as `0.1 · 10`.
pub(crate) fn hamming_radius(n: u32, delta: f64) -> u32 {
    let prod = delta * f64::from(n);
    let r = (prod + 1e-9).floor();
    r.clamp(0.0, f64::from(n)) as u32
}

pub fn gen_relation(kind: &RelationKind) -> Result<Relation> {
    match kind {
        RelationKind::ApproxXor { n, delta } => {
            if !(0.0..=1.0).contains(delta) {
                return Err(CommlabError::invalid(format!(
                    "δ must lie in [0, 1], got {delta}"
                )));
            }
            if *n == 0 {
                return Err(CommlabError::invalid("bit width must be at least 1"));
            }
            let shape = DomainShape::binary(&[*n, *n])?;
            let side = shape.sizes()[0];
            let radius = hamming_radius(*n, *delta);
            let admissible = (0..shape.cell_count())
                .map(|i| {
                    let s = (i / side) ^ (i % side);
                    (0..side as u32)
                        .filter(|&z| (z as usize ^ s).count_ones() <= radius)
                        .collect()
                })
                .collect();
            Relation::new(shape, side as u32, admissible)
        }
        RelationKind::Table {
            sizes,
            num_colors,
            admissible,
        } => Relation::new(
            DomainShape::new(sizes.clone())?,
            *num_colors,
            admissible.clone(),
        ),
    }
}

/// What a protocol is asked to compute.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    Function(ColoredFunction),
    Relation(Relation),
}

impl Target {
    pub fn shape(&self) -> &DomainShape {
        match self {
            Target::Function(f) => f.shape(),
            Target::Relation(r) => r.shape(),
        }
    }

    /// Whether color `z` is a correct answer on the cell.
    pub fn accepts(&self, linear: usize, z: u32) -> bool {
        match self {
            Target::Function(f) => f.color_at(linear) == z,
            Target::Relation(r) => r.admits(linear, z),
        }
    }
}

/// The color of `rect` if it is monochromatic for `target`: the common
/// function value, or for a relation the smallest color admitted at every
/// cell of the box.
pub fn monochromatic_color(rect: &Rect, target: &Target) -> Result<Option<u32>> {
    let shape = target.shape();
    rect.check(shape)?;
    match target {
        Target::Function(f) => {
            let mut color = None;
            let mut mixed = false;
            rect.for_each_cell(shape, |c| {
                let z = f.color_at(c);
                match color {
                    None => color = Some(z),
                    Some(prev) if prev != z => mixed = true,
                    _ => {}
                }
            });
            Ok(if mixed { None } else { color })
        }
        Target::Relation(r) => {
            let mut common: Option<FixedBitSet> = None;
            rect.for_each_cell(shape, |c| match &mut common {
                None => common = Some(r.admissible(c).clone()),
                Some(s) => s.intersect_with(r.admissible(c)),
            });
            Ok(common.and_then(|s| s.minimum()).map(|z| z as u32))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CoverKind {
    /// Every cell its own box (Merlin reveals both inputs).
    TrivialMerlin {
        shape: DomainShape,
    },
    FromTree(ProtocolTree),
    /// A random tree partition plus `extra` random boxes, each accepted only
    /// if no cell would exceed thickness `rho_max`.
    RandomBounded {
        shape: DomainShape,
        rho_max: u32,
        extra: usize,
        seed: u64,
    },
    Windmill,
}

pub fn gen_cover(kind: &CoverKind) -> Result<Cover> {
    match kind {
        CoverKind::TrivialMerlin { shape } => {
            let boxes = shape
                .cells()
                .map(|c| Rect::singleton(shape, &c))
                .collect::<Result<Vec<_>>>()?;
            Cover::new(shape.clone(), boxes)
        }
        CoverKind::FromTree(tree) => Ok(compile_tree(tree)?.cover().clone()),
        CoverKind::RandomBounded {
            shape,
            rho_max,
            extra,
            seed,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            random_bounded(shape, *rho_max, *extra, *seed, &mut rng)
        }
        CoverKind::Windmill => Ok(Cover::windmill()),
    }
}

/// Same as [`CoverKind::RandomBounded`] but drawing from a caller's stream.
pub fn random_bounded<R: Rng + ?Sized>(
    shape: &DomainShape,
    rho_max: u32,
    extra: usize,
    seed: u64,
    rng: &mut R,
) -> Result<Cover> {
    if rho_max == 0 {
        return Err(CommlabError::invalid("ρmax must be at least 1"));
    }
    let tree = ProtocolTree::random(shape.clone(), rng, RANDOM_TREE_STOP);
    let base = compile_tree(&tree)?;
    let mut boxes = base.cover().boxes().to_vec();
    let mut counts = vec![1u32; shape.cell_count()];
    let budget = extra.saturating_mul(1000);
    let mut attempts = 0;
    let mut added = 0;
    while added < extra {
        if attempts >= budget {
            return Err(CommlabError::GenerationFailure { seed, attempts });
        }
        attempts += 1;
        let factors: Vec<Vec<usize>> = shape
            .sizes()
            .iter()
            .map(|&s| {
                let k = rng.gen_range(1..=s);
                let mut v = index::sample(rng, s, k).into_vec();
                v.sort_unstable();
                v
            })
            .collect();
        let rect = Rect::new(shape, factors)?;
        let cells = rect.cells(shape);
        if cells.iter().all(|&c| counts[c] < rho_max) {
            for c in cells {
                counts[c] += 1;
            }
            boxes.push(rect);
            added += 1;
        }
    }
    Cover::new(shape.clone(), boxes)
}

/// A protocol whose parties compute the output from their own input and
/// the designated box: `g_A(x, t)` for the first party, `g_B(y, t)` for the
/// second.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorProtocol {
    protocol: Protocol,
    g_a: Vec<Option<u32>>,
    g_b: Vec<Option<u32>>,
}

/// One `(input, box, color)` entry of an output table.
pub type OutputEntry = (usize, usize, u32);

impl ErrorProtocol {
    pub fn new(protocol: Protocol, g_a: &[OutputEntry], g_b: &[OutputEntry]) -> Result<Self> {
        let shape = protocol.cover().shape();
        if shape.arity() != 2 {
            return Err(CommlabError::invalid(
                "protocols with output functions are two-party only",
            ));
        }
        let nb = protocol.cover().len();
        let fill =
            |entries: &[OutputEntry], party: usize, name: &str| -> Result<Vec<Option<u32>>> {
                let size = shape.sizes()[party];
                let mut table = vec![None; size * nb];
                for &(input, b, z) in entries {
                    if input >= size || b >= nb {
                        return Err(CommlabError::invalid(format!(
                            "{name} entry ({input}, {b}) out of range"
                        )));
                    }
                    if !protocol.cover().boxes()[b].factor(party).contains(input) {
                        return Err(CommlabError::invalid(format!(
                            "{name} entry ({input}, {b}): input is not in box {b}"
                        )));
                    }
                    table[input * nb + b] = Some(z);
                }
                for (b, rect) in protocol.cover().boxes().iter().enumerate() {
                    for input in rect.factor(party).ones() {
                        if table[input * nb + b].is_none() {
                            return Err(CommlabError::invalid(format!(
                                "{name} is undefined at input {input}, box {b}"
                            )));
                        }
                    }
                }
                Ok(table)
            };
        let g_a = fill(g_a, 0, "g_A")?;
        let g_b = fill(g_b, 1, "g_B")?;
        Ok(ErrorProtocol { protocol, g_a, g_b })
    }

    /// Both parties output the given color of the designated box.
    pub fn with_box_colors(protocol: Protocol, colors: &[u32]) -> Result<Self> {
        let cover = protocol.cover();
        if colors.len() != cover.len() {
            return Err(CommlabError::invalid(format!(
                "{} box colors for {} boxes",
                colors.len(),
                cover.len()
            )));
        }
        let entries = |party: usize| -> Vec<OutputEntry> {
            cover
                .boxes()
                .iter()
                .enumerate()
                .flat_map(|(b, r)| r.factor(party).ones().map(move |i| (i, b, colors[b])))
                .collect()
        };
        let (a, b) = (entries(0), entries(1));
        Self::new(protocol, &a, &b)
    }

    /// Outputs the monochromatic color of each box; fails if a box is not
    /// monochromatic for `target`.
    pub fn from_target(protocol: Protocol, target: &Target) -> Result<Self> {
        let colors = protocol
            .cover()
            .boxes()
            .iter()
            .enumerate()
            .map(|(i, b)| {
                monochromatic_color(b, target)?.ok_or_else(|| {
                    CommlabError::invalid(format!("box {i} is not monochromatic for the target"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::with_box_colors(protocol, &colors)
    }

    pub fn protocol(&self) -> &Protocol {
        &self.protocol
    }

    pub fn g_a(&self, row: usize, b: usize) -> Option<u32> {
        self.g_a
            .get(row * self.protocol.cover().len() + b)
            .copied()
            .flatten()
    }

    pub fn g_b(&self, col: usize, b: usize) -> Option<u32> {
        self.g_b
            .get(col * self.protocol.cover().len() + b)
            .copied()
            .flatten()
    }

    /// Replaces single output entries; used to build erring variants.
    pub fn with_overrides(&self, g_a: &[OutputEntry], g_b: &[OutputEntry]) -> Result<Self> {
        let mut out = self.clone();
        let nb = self.protocol.cover().len();
        for (table, entries, party) in [(&mut out.g_a, g_a, 0usize), (&mut out.g_b, g_b, 1)] {
            for &(i, b, z) in entries {
                if b >= nb || !self.protocol.cover().boxes()[b].factor(party).contains(i) {
                    return Err(CommlabError::invalid(format!(
                        "override ({i}, {b}) is outside the box"
                    )));
                }
                table[i * nb + b] = Some(z);
            }
        }
        Ok(out)
    }

    pub fn entries_a(&self) -> Vec<OutputEntry> {
        self.entries(&self.g_a)
    }

    pub fn entries_b(&self) -> Vec<OutputEntry> {
        self.entries(&self.g_b)
    }

    fn entries(&self, table: &[Option<u32>]) -> Vec<OutputEntry> {
        let nb = self.protocol.cover().len();
        table
            .iter()
            .enumerate()
            .filter_map(|(k, z)| z.map(|z| (k / nb, k % nb, z)))
            .collect()
    }

    /// Output agreed by both parties on each cell, if any.
    pub fn outputs(&self) -> Vec<Option<u32>> {
        let shape = self.protocol.cover().shape();
        let cols = shape.sizes()[1];
        self.protocol
            .transcripts()
            .into_iter()
            .enumerate()
            .map(|(i, t)| {
                let t = t?;
                let (x, y) = (i / cols, i % cols);
                match (self.g_a(x, t), self.g_b(y, t)) {
                    (Some(a), Some(b)) if a == b => Some(a),
                    _ => None,
                }
            })
            .collect()
    }
}

/// Cells on which both parties output the same correct answer.
pub fn good_set(ep: &ErrorProtocol, target: &Target) -> Result<FixedBitSet> {
    let shape = ep.protocol().cover().shape();
    if shape != target.shape() {
        return Err(CommlabError::invalid(
            "protocol and target have different domains",
        ));
    }
    let mut good = FixedBitSet::with_capacity(shape.cell_count());
    for (i, z) in ep.outputs().into_iter().enumerate() {
        if let Some(z) = z {
            if target.accepts(i, z) {
                good.insert(i);
            }
        }
    }
    Ok(good)
}

/// A uniform mixture of error protocols over a common domain, one per value
/// of the shared randomness.
#[derive(Debug, Clone, PartialEq)]
pub struct AMProtocol {
    branches: Vec<ErrorProtocol>,
}

impl AMProtocol {
    pub fn new(branches: Vec<ErrorProtocol>) -> Result<Self> {
        let first = branches
            .first()
            .ok_or_else(|| CommlabError::invalid("an AM protocol needs at least one branch"))?;
        let shape = first.protocol().cover().shape();
        if let Some(i) = branches
            .iter()
            .position(|b| b.protocol().cover().shape() != shape)
        {
            return Err(CommlabError::invalid(format!(
                "branch {i} has a different domain from branch 0"
            )));
        }
        Ok(AMProtocol { branches })
    }

    /// Single deterministic branch: Merlin names the cell.
    pub fn trivial_merlin(f: &ColoredFunction) -> Result<Self> {
        let cover = gen_cover(&CoverKind::TrivialMerlin {
            shape: f.shape().clone(),
        })?;
        let protocol = Protocol::new(cover, Selector::MinIndex)?;
        let ep = ErrorProtocol::from_target(protocol, &Target::Function(f.clone()))?;
        Self::new(vec![ep])
    }

    pub fn branches(&self) -> &[ErrorProtocol] {
        &self.branches
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::ThicknessScope;

    fn xor(n: u32) -> ColoredFunction {
        gen_function(&FunctionKind::Xor { n }).unwrap()
    }

    #[test]
    fn xor_and_eq_tables() {
        assert_eq!(xor(1).colors(), &[0, 1, 1, 0]);
        assert_eq!(xor(2).num_colors(), 4);
        let eq = gen_function(&FunctionKind::Eq { n: 1 }).unwrap();
        assert_eq!(eq.colors(), &[1, 0, 0, 1]);
        assert!(gen_function(&FunctionKind::Xor { n: 0 }).is_err());
    }

    #[test]
    fn matvec_identity_example() {
        let f = gen_function(&FunctionKind::MatVec { parties: 3, n: 2 }).unwrap();
        assert_eq!(f.shape().sizes(), &[4, 4, 4]);
        // x1 = (1,0), x2 = (0,1), x3 = (1,1): A = I, A·x3 = (1,1)
        assert_eq!(f.color(&[0b01, 0b10, 0b11]).unwrap(), 0b11);
        assert_eq!(f.color(&[0b01, 0b10, 0b01]).unwrap(), 0b01);
        assert_eq!(f.color(&[0b11, 0b10, 0b11]).unwrap(), 0b01);
        assert_eq!(f.color(&[0b11, 0b10, 0b00]).unwrap(), 0);
        assert_eq!(f.num_colors(), 4);
    }

    #[test]
    fn random_function_is_seeded_and_contiguous() {
        let k = FunctionKind::Random {
            sizes: vec![3, 5],
            colors: 4,
            seed: 11,
        };
        let a = gen_function(&k).unwrap();
        assert_eq!(a, gen_function(&k).unwrap());
        assert!(a.num_colors() <= 4);
    }

    #[test]
    fn non_contiguous_colors_rejected() {
        let s = DomainShape::new(vec![2, 2]).unwrap();
        assert!(ColoredFunction::new(s.clone(), vec![0, 2, 2, 0]).is_err());
        let c = ColoredFunction::compacted(s, vec![5, 9, 9, 5]).unwrap();
        assert_eq!(c.colors(), &[0, 1, 1, 0]);
    }

    #[test]
    fn approx_xor_relations() {
        let exact = gen_relation(&RelationKind::ApproxXor { n: 2, delta: 0.0 }).unwrap();
        for i in 0..16 {
            assert_eq!(exact.table()[i], vec![((i / 4) ^ (i % 4)) as u32]);
        }
        let all = gen_relation(&RelationKind::ApproxXor { n: 2, delta: 1.0 }).unwrap();
        assert!(all.table().iter().all(|z| z.len() == 4));
        let half = gen_relation(&RelationKind::ApproxXor { n: 2, delta: 0.5 }).unwrap();
        assert!(half.table().iter().all(|z| z.len() == 3));
        assert!(gen_relation(&RelationKind::ApproxXor { n: 2, delta: 1.5 }).is_err());
        assert!(gen_relation(&RelationKind::ApproxXor { n: 2, delta: -0.1 }).is_err());
    }

    #[test]
    fn hamming_radius_handles_rounding() {
        assert_eq!(hamming_radius(10, 0.1), 1);
        assert_eq!(hamming_radius(3, 0.3), 0);
        assert_eq!(hamming_radius(2, 0.5), 1);
        assert_eq!(hamming_radius(7, 1.0), 7);
    }

    #[test]
    fn trivial_merlin_cover() {
        let f = xor(1);
        let c = gen_cover(&CoverKind::TrivialMerlin {
            shape: f.shape().clone(),
        })
        .unwrap();
        assert_eq!(c.len(), 4);
        assert!(c.validate().is_partition);
        assert_eq!(c.thickness(&ThicknessScope::Global).unwrap(), 1);
        let t = Target::Function(f);
        for b in c.boxes() {
            assert!(monochromatic_color(b, &t).unwrap().is_some());
        }
    }

    #[test]
    fn random_bounded_respects_thickness() {
        let c = gen_cover(&CoverKind::RandomBounded {
            shape: DomainShape::new(vec![4, 4]).unwrap(),
            rho_max: 2,
            extra: 3,
            seed: 7,
        })
        .unwrap();
        assert!(c.validate().covers_domain);
        assert!(c.thickness(&ThicknessScope::Global).unwrap() <= 2);
    }

    #[test]
    fn random_bounded_reports_failure_with_seed() {
        // thickness 1 leaves no room for any extra box
        let err = gen_cover(&CoverKind::RandomBounded {
            shape: DomainShape::new(vec![2, 2]).unwrap(),
            rho_max: 1,
            extra: 1,
            seed: 99,
        })
        .unwrap_err();
        assert_eq!(
            err,
            CommlabError::GenerationFailure {
                seed: 99,
                attempts: 1000
            }
        );
    }

    #[test]
    fn windmill_cover() {
        let c = gen_cover(&CoverKind::Windmill).unwrap();
        assert_eq!(c.len(), 5);
        assert!(c.validate().is_partition);
    }

    #[test]
    fn monochromatic_colors() {
        let s = DomainShape::new(vec![2, 2]).unwrap();
        let full = Rect::full(&s);
        let constant = gen_function(&FunctionKind::Constant { sizes: vec![2, 2] }).unwrap();
        assert_eq!(
            monochromatic_color(&full, &Target::Function(constant)).unwrap(),
            Some(0)
        );
        assert_eq!(
            monochromatic_color(&full, &Target::Function(xor(1))).unwrap(),
            None
        );

        let rel = gen_relation(&RelationKind::ApproxXor { n: 2, delta: 0.5 }).unwrap();
        let s4 = rel.shape().clone();
        let origin = Rect::singleton(&s4, &[0, 0]).unwrap();
        assert_eq!(
            monochromatic_color(&origin, &Target::Relation(rel.clone())).unwrap(),
            Some(0)
        );
        // (0,0) admits {00,01,10}; (0,3) has x⊕y = 11 and admits {01,10,11}
        let pair = Rect::new(&s4, vec![vec![0], vec![0, 3]]).unwrap();
        assert_eq!(
            monochromatic_color(&pair, &Target::Relation(rel)).unwrap(),
            Some(1)
        );
        assert!(monochromatic_color(&origin, &Target::Function(xor(1))).is_err());
    }

    #[test]
    fn xor_has_no_monochromatic_multi_cell_box() {
        for n in 1..=3 {
            let f = xor(n);
            let side = 1usize << n;
            let t = Target::Function(f.clone());
            // every box with ≥ 2 cells contains a 2-cell sub-box (same row,
            // same column) or a pair of distinct rows and columns; checking
            // all 2×1, 1×2 and 2×2 boxes is exhaustive for monochromaticity
            for x1 in 0..side {
                for x2 in 0..side {
                    for y1 in 0..side {
                        for y2 in 0..side {
                            let rows: Vec<usize> = if x1 == x2 { vec![x1] } else { vec![x1, x2] };
                            let cols: Vec<usize> = if y1 == y2 { vec![y1] } else { vec![y1, y2] };
                            if rows.len() * cols.len() < 2 {
                                continue;
                            }
                            let r = Rect::new(f.shape(), vec![rows, cols]).unwrap();
                            assert_eq!(monochromatic_color(&r, &t).unwrap(), None);
                        }
                    }
                }
            }
        }
    }

    fn xor_ep(n: u32) -> (ErrorProtocol, Target) {
        let f = xor(n);
        let am = AMProtocol::trivial_merlin(&f).unwrap();
        (am.branches()[0].clone(), Target::Function(f))
    }

    #[test]
    fn good_set_of_monochromatic_protocol_is_everything() {
        let (ep, t) = xor_ep(1);
        assert_eq!(good_set(&ep, &t).unwrap().count_ones(..), 4);
    }

    #[test]
    fn good_set_excludes_erring_cell() {
        let (ep, t) = xor_ep(1);
        // cell (1,1) is singleton box 3; make Alice answer 1 instead of 0
        let bad = ep.with_overrides(&[(1, 3, 1)], &[]).unwrap();
        let good = good_set(&bad, &t).unwrap();
        assert_eq!(good.ones().collect::<Vec<_>>(), vec![0, 1, 2]);
    }

    #[test]
    fn good_set_for_total_relation() {
        let s = DomainShape::new(vec![2, 2]).unwrap();
        let p = Protocol::new(
            Cover::new(s.clone(), vec![Rect::full(&s)]).unwrap(),
            Selector::MinIndex,
        )
        .unwrap();
        let ep = ErrorProtocol::with_box_colors(p, &[1]).unwrap();
        let rel = gen_relation(&RelationKind::ApproxXor { n: 1, delta: 1.0 }).unwrap();
        assert_eq!(
            good_set(&ep, &Target::Relation(rel))
                .unwrap()
                .count_ones(..),
            4
        );
        let f = Target::Function(xor(1));
        assert_eq!(
            good_set(&ep, &f).unwrap().ones().collect::<Vec<_>>(),
            vec![1, 2]
        );
    }

    #[test]
    fn error_protocol_tables_must_be_complete() {
        let (ep, _) = xor_ep(1);
        let mut a = ep.entries_a();
        a.pop();
        assert!(ErrorProtocol::new(ep.protocol().clone(), &a, &ep.entries_b()).is_err());
        let mut a = ep.entries_a();
        a.push((0, 3, 0)); // row 0 is not in box 3 = {(1,1)}
        assert!(ErrorProtocol::new(ep.protocol().clone(), &a, &ep.entries_b()).is_err());
    }

    #[test]
    fn function_for_cover_is_monochromatic() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for seed in 0..20 {
            let c = gen_cover(&CoverKind::RandomBounded {
                shape: DomainShape::new(vec![6, 5]).unwrap(),
                rho_max: 2,
                extra: 2,
                seed,
            })
            .unwrap();
            let f = function_for_cover(&c, 3, &mut rng).unwrap();
            let t = Target::Function(f);
            for b in c.boxes() {
                assert!(monochromatic_color(b, &t).unwrap().is_some());
            }
        }
    }
}
