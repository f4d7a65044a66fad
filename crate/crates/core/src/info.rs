//! Exact Shannon quantities over explicit finite distributions on a grid.
//!
//! Every random variable is a deterministic function of the cell: the
//! parties' coordinates `X_i`, the designated box `T`, and a color `F`.
//! Entropies are in bits with `0·log 0 = 0`. Probability masses and entropy
//! terms are added with a pairwise reduction in a fixed (sorted key, then
//! cell) order, so results do not depend on scheduling.

use std::ops::BitOr;

use fixedbitset::FixedBitSet;
use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::domain::{DomainShape, Protocol};
use crate::error::{CommlabError, Result};
use crate::functions::{monochromatic_color, Target};

/// Allowed deviation of the total mass from 1.
pub const NORMALIZATION_TOL: f64 = 1e-12;
/// Default tolerance for exact identities.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Pairwise (cascade) summation over a slice in its given order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 8;
    if values.len() <= BLOCK {
        values.iter().fold(0.0, |a, &b| a + b)
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}

/// Binary entropy `h(δ) = δ·log(1/δ) + (1−δ)·log(1/(1−δ))` in bits.
pub fn binary_entropy(delta: f64) -> f64 {
    fn term(p: f64) -> f64 {
        if p <= 0.0 {
            0.0
        } else {
            -p * p.log2()
        }
    }
    term(delta) + term(1.0 - delta)
}

/// A probability table over the cells of a domain.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    shape: DomainShape,
    p: Vec<f64>,
}

impl JointDistribution {
    pub fn new(shape: DomainShape, p: Vec<f64>) -> Result<Self> {
        if p.len() != shape.cell_count() {
            return Err(CommlabError::invalid(format!(
                "distribution has {} entries, domain has {} cells",
                p.len(),
                shape.cell_count()
            )));
        }
        if let Some(i) = p.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(CommlabError::invalid(format!(
                "probability of cell {:?} is {}",
                shape.cell(i),
                p[i]
            )));
        }
        let total = pairwise_sum(&p);
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(CommlabError::invalid(format!(
                "distribution sums to {total}, not 1"
            )));
        }
        Ok(JointDistribution { shape, p })
    }

    /// Normalises nonnegative weights.
    pub fn from_weights(shape: DomainShape, weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(CommlabError::invalid(
                "weights must be finite and nonnegative",
            ));
        }
        let total = pairwise_sum(&weights);
        if total <= 0.0 {
            return Err(CommlabError::invalid("weights have zero total mass"));
        }
        Self::new(shape, weights.into_iter().map(|w| w / total).collect())
    }

    pub fn uniform(shape: DomainShape) -> Self {
        let n = shape.cell_count();
        JointDistribution {
            p: vec![1.0 / n as f64; n],
            shape,
        }
    }

    /// Uniform over the given cells (linear indices).
    pub fn uniform_on(shape: DomainShape, cells: &[usize]) -> Result<Self> {
        let mut w = vec![0.0; shape.cell_count()];
        for &c in cells {
            *w.get_mut(c)
                .ok_or_else(|| CommlabError::invalid(format!("cell index {c} out of range")))? =
                1.0;
        }
        Self::from_weights(shape, w)
    }

    /// Random distribution: Gamma(α) weights with α drawn from
    /// {0.1, 0.5, 1, 5}; with probability 1/3 a random fraction of the cells
    /// is zeroed (at least one cell keeps its mass).
    pub fn random<R: Rng + ?Sized>(shape: DomainShape, rng: &mut R) -> Self {
        const ALPHAS: [f64; 4] = [0.1, 0.5, 1.0, 5.0];
        let alpha = ALPHAS[rng.gen_range(0..ALPHAS.len())];
        let gamma = Gamma::new(alpha, 1.0).expect("positive shape");
        let n = shape.cell_count();
        let mut w: Vec<f64> = (0..n).map(|_| gamma.sample(rng)).collect();
        if rng.gen_bool(1.0 / 3.0) {
            let drop = rng.gen_range(0.0..0.9);
            for v in w.iter_mut() {
                if rng.gen_bool(drop) {
                    *v = 0.0;
                }
            }
        }
        if pairwise_sum(&w) <= 0.0 || w.iter().all(|&v| v == 0.0) {
            let keep = rng.gen_range(0..n);
            w[keep] = 1.0;
        }
        Self::from_weights(shape, w).expect("positive mass")
    }

    pub fn shape(&self) -> &DomainShape {
        &self.shape
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.p
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0.0)
            .map(|(i, _)| i)
    }

    pub fn mass_of(&self, cells: &FixedBitSet) -> f64 {
        let v: Vec<f64> = cells
            .ones()
            .filter_map(|i| self.p.get(i).copied())
            .collect();
        pairwise_sum(&v)
    }

    /// Conditions on the event `keep`.
    pub fn restricted(&self, keep: &FixedBitSet) -> Result<Self> {
        let w: Vec<f64> = self
            .p
            .iter()
            .enumerate()
            .map(|(i, &v)| if keep.contains(i) { v } else { 0.0 })
            .collect();
        Self::from_weights(self.shape.clone(), w)
            .map_err(|_| CommlabError::Degenerate("conditioning event has probability 0".into()))
    }

    pub(crate) fn fingerprint(&self) -> u64 {
        let mut h = crate::domain::Fingerprint::default();
        for v in &self.p {
            h.push(v.to_bits());
        }
        h.finish()
    }
}

/// A derived variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    Party(usize),
    Transcript,
    Color,
}

const T_BIT: u64 = 1 << 62;
const F_BIT: u64 = 1 << 63;

/// A set of variables, read as their joint tuple.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarSet(u64);

impl VarSet {
    pub const EMPTY: VarSet = VarSet(0);
    pub const T: VarSet = VarSet(T_BIT);
    pub const F: VarSet = VarSet(F_BIT);

    pub fn party(i: usize) -> Self {
        assert!(i < 62, "at most 62 parties");
        VarSet(1 << i)
    }

    /// `X_1, …, X_ℓ`.
    pub fn all_parties(arity: usize) -> Self {
        (0..arity).fold(VarSet::EMPTY, |s, i| s | VarSet::party(i))
    }

    pub fn of(vars: &[Var]) -> Self {
        vars.iter().fold(VarSet::EMPTY, |s, v| {
            s | match v {
                Var::Party(i) => VarSet::party(*i),
                Var::Transcript => VarSet::T,
                Var::Color => VarSet::F,
            }
        })
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    fn parties(self) -> impl Iterator<Item = usize> {
        (0..62).filter(move |i| self.0 >> i & 1 == 1)
    }
}

impl BitOr for VarSet {
    type Output = VarSet;
    fn bitor(self, rhs: VarSet) -> VarSet {
        VarSet(self.0 | rhs.0)
    }
}

impl From<Var> for VarSet {
    fn from(v: Var) -> Self {
        VarSet::of(&[v])
    }
}

/// The support of a distribution together with the per-cell values of the
/// transcript and color variables, when attached.
#[derive(Debug, Clone)]
pub struct Ensemble {
    shape: DomainShape,
    cells: Vec<usize>,
    probs: Vec<f64>,
    transcript: Option<(Vec<u32>, u64)>,
    color: Option<(Vec<u32>, u64)>,
}

impl Ensemble {
    pub fn new(dist: &JointDistribution) -> Self {
        let cells: Vec<usize> = dist.support().collect();
        let probs = cells.iter().map(|&c| dist.p[c]).collect();
        Ensemble {
            shape: dist.shape.clone(),
            cells,
            probs,
            transcript: None,
            color: None,
        }
    }

    /// Attaches `T = t(c)`. Fails if a support cell is uncovered.
    pub fn with_transcript(mut self, protocol: &Protocol) -> Result<Self> {
        if protocol.cover().shape() != &self.shape {
            return Err(CommlabError::invalid(
                "protocol and distribution have different domains",
            ));
        }
        let table = protocol.transcripts();
        let mut t = Vec::with_capacity(self.cells.len());
        for &c in &self.cells {
            match table[c] {
                Some(b) => t.push(b as u32),
                None => {
                    return Err(CommlabError::invalid(format!(
                        "distribution puts mass on cell {:?}, which no box covers",
                        self.shape.cell(c)
                    )))
                }
            }
        }
        self.transcript = Some((t, protocol.cover().len() as u64));
        Ok(self)
    }

    /// Attaches `F = color(c)` from a per-cell label table (linear order).
    pub fn with_colors(mut self, labels: &[u32]) -> Result<Self> {
        if labels.len() != self.shape.cell_count() {
            return Err(CommlabError::invalid(
                "color table does not match the domain",
            ));
        }
        let f: Vec<u32> = self.cells.iter().map(|&c| labels[c]).collect();
        let card = labels.iter().max().map_or(1, |&m| u64::from(m) + 1);
        self.color = Some((f, card));
        Ok(self)
    }

    pub fn shape(&self) -> &DomainShape {
        &self.shape
    }

    pub fn support_len(&self) -> usize {
        self.cells.len()
    }

    fn keys(&self, vars: VarSet) -> Result<Vec<u128>> {
        let sizes = self.shape.sizes();
        let parties: Vec<usize> = vars.parties().collect();
        if let Some(&p) = parties.iter().find(|&&p| p >= sizes.len()) {
            return Err(CommlabError::invalid(format!(
                "variable X_{p} is not defined on a {}-party domain",
                sizes.len()
            )));
        }
        let t =
            if vars.0 & T_BIT != 0 {
                Some(self.transcript.as_ref().ok_or_else(|| {
                    CommlabError::invalid("transcript variable T is not attached")
                })?)
            } else {
                None
            };
        let f = if vars.0 & F_BIT != 0 {
            Some(
                self.color
                    .as_ref()
                    .ok_or_else(|| CommlabError::invalid("color variable F is not attached"))?,
            )
        } else {
            None
        };
        let mut coords = vec![0usize; sizes.len()];
        let keys = (0..self.cells.len())
            .map(|row| {
                self.shape.coords_into(self.cells[row], &mut coords);
                let mut key: u128 = 0;
                for &p in &parties {
                    key = key * sizes[p] as u128 + coords[p] as u128;
                }
                if let Some((vals, card)) = t {
                    key = key * u128::from(*card) + u128::from(vals[row]);
                }
                if let Some((vals, card)) = f {
                    key = key * u128::from(*card) + u128::from(vals[row]);
                }
                key
            })
            .collect();
        Ok(keys)
    }

    /// Masses of the atoms of the pushforward onto `vars`, in key order.
    fn masses(&self, vars: VarSet) -> Result<Vec<(u128, f64)>> {
        let keys = self.keys(vars)?;
        let mut order: Vec<(u128, usize)> = keys.into_iter().zip(0..).collect();
        order.sort_unstable();
        let mut out = Vec::new();
        let mut run: Vec<f64> = Vec::new();
        let mut i = 0;
        while i < order.len() {
            let key = order[i].0;
            run.clear();
            while i < order.len() && order[i].0 == key {
                run.push(self.probs[order[i].1]);
                i += 1;
            }
            out.push((key, pairwise_sum(&run)));
        }
        Ok(out)
    }

    /// `H(vars)`.
    pub fn entropy(&self, vars: VarSet) -> Result<f64> {
        if vars.is_empty() {
            return Ok(0.0);
        }
        let terms: Vec<f64> = self
            .masses(vars)?
            .into_iter()
            .map(|(_, m)| if m > 0.0 { -m * m.log2() } else { 0.0 })
            .collect();
        Ok(pairwise_sum(&terms))
    }

    /// `H(S | U) = H(S, U) − H(U)`.
    pub fn cond_entropy(&self, s: VarSet, u: VarSet) -> Result<f64> {
        Ok(self.entropy(s | u)? - self.entropy(u)?)
    }

    /// `H(S | U)` summed condition by condition, `Σ_u p(u)·H(S | U = u)`.
    /// An independent route used to check the chain rule.
    pub fn cond_entropy_direct(&self, s: VarSet, u: VarSet) -> Result<f64> {
        let ku = self.keys(u)?;
        let ks = self.keys(s)?;
        let mut order: Vec<(u128, u128, usize)> = ku
            .into_iter()
            .zip(ks)
            .zip(0..)
            .map(|((a, b), i)| (a, b, i))
            .collect();
        order.sort_unstable();
        let mut terms = Vec::new();
        let mut i = 0;
        while i < order.len() {
            let cond = order[i].0;
            let mut inner: Vec<f64> = Vec::new();
            while i < order.len() && order[i].0 == cond {
                let sk = order[i].1;
                let mut run = Vec::new();
                while i < order.len() && order[i].0 == cond && order[i].1 == sk {
                    run.push(self.probs[order[i].2]);
                    i += 1;
                }
                inner.push(pairwise_sum(&run));
            }
            let pu = pairwise_sum(&inner);
            if pu > 0.0 {
                let h: Vec<f64> = inner
                    .iter()
                    .map(|&m| {
                        let q = m / pu;
                        if q > 0.0 {
                            -q * q.log2()
                        } else {
                            0.0
                        }
                    })
                    .collect();
                terms.push(pu * pairwise_sum(&h));
            }
        }
        Ok(pairwise_sum(&terms))
    }

    /// `I(S : U | W) = H(S|W) + H(U|W) − H(S,U|W)`.
    pub fn mutual_info(&self, s: VarSet, u: VarSet, w: VarSet) -> Result<f64> {
        let hw = self.entropy(w)?;
        let hsw = self.entropy(s | w)?;
        let huw = self.entropy(u | w)?;
        let hsuw = self.entropy(s | u | w)?;
        Ok((hsw - hw) + (huw - hw) - (hsuw - hw))
    }
}

/// An entropic expression over derived variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InfoExpr {
    Entropy {
        of: VarSet,
        given: VarSet,
    },
    MutualInfo {
        left: VarSet,
        right: VarSet,
        given: VarSet,
    },
}

pub fn info_quantity(ens: &Ensemble, expr: &InfoExpr) -> Result<f64> {
    match *expr {
        InfoExpr::Entropy { of, given } => ens.cond_entropy(of, given),
        InfoExpr::MutualInfo { left, right, given } => ens.mutual_info(left, right, given),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripleInfo {
    /// `I(A:B) − I(A:B | W)`.
    pub value: f64,
    /// Distance to `H(W) − H(W|A) − H(W|B) + H(W|A,B)`.
    pub formula_gap: f64,
}

pub fn triple_information(ens: &Ensemble, a: VarSet, b: VarSet, w: VarSet) -> Result<TripleInfo> {
    let value = ens.mutual_info(a, b, VarSet::EMPTY)? - ens.mutual_info(a, b, w)?;
    let alt = ens.entropy(w)? - ens.cond_entropy(w, a)? - ens.cond_entropy(w, b)?
        + ens.cond_entropy(w, a | b)?;
    Ok(TripleInfo {
        value,
        formula_gap: (value - alt).abs(),
    })
}

fn require_two_party(shape: &DomainShape, what: &str) -> Result<()> {
    if shape.arity() != 2 {
        return Err(CommlabError::invalid(format!(
            "{what} is defined for two parties, domain has {}",
            shape.arity()
        )));
    }
    Ok(())
}

/// `I(X:T | Y) + I(Y:T | X)`.
pub fn internal_information_cost(dist: &JointDistribution, protocol: &Protocol) -> Result<f64> {
    require_two_party(dist.shape(), "internal information cost")?;
    let ens = Ensemble::new(dist).with_transcript(protocol)?;
    let (x, y) = (VarSet::party(0), VarSet::party(1));
    Ok(ens.mutual_info(x, VarSet::T, y)? + ens.mutual_info(y, VarSet::T, x)?)
}

/// Where the color variable `F` comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColorMode {
    /// `F = f(c)` for a function target.
    Function,
    /// `F` = color of the designated box (smallest common admissible color
    /// for a relation). Cells whose box has no color are dropped.
    BoxColor,
}

/// Every quantity used by the inequality checks, for one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct InfoProfile {
    pub arity: usize,
    pub fingerprint: u64,
    pub color_mode: Option<ColorMode>,
    /// Mass of the conditioning event when the distribution was restricted
    /// (e.g. to a GOOD set) before building the profile.
    pub restriction_mass: Option<f64>,
    pub h_t: f64,
    pub h_parties: f64,
    pub h_party: Vec<f64>,
    /// `H(T | X_i)`.
    pub h_t_given_party: Vec<f64>,
    /// `H(T | X_1, …, X_ℓ)`, zero up to rounding.
    pub h_t_given_all: f64,
    pub h_f: Option<f64>,
    /// `H(F | X_i)`.
    pub h_f_given_party: Option<Vec<f64>>,
    /// `H(T | X_i, F)`.
    pub h_t_given_party_f: Option<Vec<f64>>,
    /// `H(F | T, X_i)`; zero when each party can read the answer off the box.
    pub h_f_given_t_party: Option<Vec<f64>>,
    pub i_xy: Option<f64>,
    pub i_xy_given_t: Option<f64>,
    pub triple_t: Option<TripleInfo>,
    /// `I(X:Y:F)` and its distance to `H(F) − H(F|X) − H(F|Y)`.
    pub triple_f: Option<(f64, f64)>,
    pub ic: Option<f64>,
    /// `|IC − (H(T) − I(X:Y:T))|`.
    pub ic_identity_gap: Option<f64>,
    /// `|H(X,Y) − H(X) − H(Y|X)|` with `H(Y|X)` summed per condition.
    pub chain_rule_gap: f64,
    pub rho_global: u32,
    pub rho_box_max: u32,
    pub expected_log_rho: f64,
    pub box_count: usize,
    pub excluded_mass: f64,
    pub excluded_boxes: Vec<usize>,
}

impl InfoProfile {
    pub fn warning(&self) -> bool {
        !self.excluded_boxes.is_empty()
    }
}

pub fn build_profile(
    dist: &JointDistribution,
    protocol: &Protocol,
    target: Option<&Target>,
    mode: ColorMode,
) -> Result<InfoProfile> {
    let shape = dist.shape();
    if protocol.cover().shape() != shape {
        return Err(CommlabError::invalid(
            "protocol and distribution have different domains",
        ));
    }
    if let Some(t) = target {
        if t.shape() != shape {
            return Err(CommlabError::invalid(
                "target and distribution have different domains",
            ));
        }
    }
    let transcripts = protocol.transcripts();
    if let Some(c) = dist.support().find(|&c| transcripts[c].is_none()) {
        return Err(CommlabError::invalid(format!(
            "distribution puts mass on cell {:?}, which no box covers",
            shape.cell(c)
        )));
    }

    // colors and, for box colors, the cells that must be dropped
    let mut excluded_boxes = Vec::new();
    let mut excluded_mass = 0.0;
    let mut working = dist.clone();
    let labels: Option<Vec<u32>> = match (target, mode) {
        (None, _) => None,
        (Some(Target::Function(f)), ColorMode::Function) => Some(f.colors().to_vec()),
        (Some(Target::Relation(_)), ColorMode::Function) => {
            return Err(CommlabError::invalid(
                "function color mode needs a function target; use box colors for relations",
            ))
        }
        (Some(t), ColorMode::BoxColor) => {
            let box_colors = protocol
                .cover()
                .boxes()
                .iter()
                .map(|b| monochromatic_color(b, t))
                .collect::<Result<Vec<_>>>()?;
            let mut keep = FixedBitSet::with_capacity(shape.cell_count());
            let mut labels = vec![0u32; shape.cell_count()];
            for (c, tb) in transcripts.iter().enumerate() {
                if let Some(b) = tb {
                    match box_colors[*b] {
                        Some(z) => {
                            keep.insert(c);
                            labels[c] = z;
                        }
                        None => {
                            if dist.probabilities()[c] > 0.0 && !excluded_boxes.contains(b) {
                                excluded_boxes.push(*b);
                            }
                        }
                    }
                }
            }
            excluded_boxes.sort_unstable();
            if !excluded_boxes.is_empty() {
                excluded_mass = 1.0 - dist.mass_of(&keep);
                working = dist.restricted(&keep)?;
            }
            Some(labels)
        }
    };

    let mut ens = Ensemble::new(&working).with_transcript(protocol)?;
    if let Some(l) = &labels {
        ens = ens.with_colors(l)?;
    }
    let arity = shape.arity();
    let all = VarSet::all_parties(arity);
    let party = |i| VarSet::party(i);

    let h_t = ens.entropy(VarSet::T)?;
    let h_parties = ens.entropy(all)?;
    let h_party = (0..arity)
        .map(|i| ens.entropy(party(i)))
        .collect::<Result<Vec<_>>>()?;
    let h_t_given_party = (0..arity)
        .map(|i| ens.cond_entropy(VarSet::T, party(i)))
        .collect::<Result<Vec<_>>>()?;
    let h_t_given_all = ens.cond_entropy(VarSet::T, all)?;

    let (h_f, h_f_given_party, h_t_given_party_f, h_f_given_t_party) = if labels.is_some() {
        let per = |f: &dyn Fn(usize) -> Result<f64>| (0..arity).map(f).collect::<Result<Vec<_>>>();
        (
            Some(ens.entropy(VarSet::F)?),
            Some(per(&|i| ens.cond_entropy(VarSet::F, party(i)))?),
            Some(per(&|i| ens.cond_entropy(VarSet::T, party(i) | VarSet::F))?),
            Some(per(&|i| ens.cond_entropy(VarSet::F, party(i) | VarSet::T))?),
        )
    } else {
        (None, None, None, None)
    };

    let (x, y) = (party(0), party(1.min(arity - 1)));
    let chain_rule_gap = (h_parties - ens.entropy(x)? - ens.cond_entropy_direct(all, x)?).abs();

    let (i_xy, i_xy_given_t, triple_t, triple_f, ic, ic_identity_gap) = if arity == 2 {
        let i_xy = ens.mutual_info(x, y, VarSet::EMPTY)?;
        let i_xy_t = ens.mutual_info(x, y, VarSet::T)?;
        let triple = triple_information(&ens, x, y, VarSet::T)?;
        let triple_f = if labels.is_some() {
            let tf = triple_information(&ens, x, y, VarSet::F)?;
            let h_f = ens.entropy(VarSet::F)?;
            let alt = h_f - ens.cond_entropy(VarSet::F, x)? - ens.cond_entropy(VarSet::F, y)?;
            Some((tf.value, (tf.value - alt).abs()))
        } else {
            None
        };
        let ic = ens.mutual_info(x, VarSet::T, y)? + ens.mutual_info(y, VarSet::T, x)?;
        let gap = (ic - (h_t - triple.value)).abs();
        (
            Some(i_xy),
            Some(i_xy_t),
            Some(triple),
            triple_f,
            Some(ic),
            Some(gap),
        )
    } else {
        (None, None, None, None, None, None)
    };

    let cover = protocol.cover();
    let cell_rho = cover.cell_thickness();
    let box_rho = cover.box_thickness();
    let rho_global = cell_rho.iter().copied().max().unwrap_or(0);
    let mut rho_box_max = 0;
    let mut log_terms = Vec::new();
    for c in working.support() {
        let b = transcripts[c].expect("support is covered");
        rho_box_max = rho_box_max.max(box_rho[b]);
        log_terms.push(working.probabilities()[c] * f64::from(box_rho[b]).log2());
    }
    let mut fp = crate::domain::Fingerprint::default();
    fp.push(protocol.fingerprint());
    fp.push(dist.fingerprint());

    Ok(InfoProfile {
        arity,
        fingerprint: fp.finish(),
        color_mode: labels.as_ref().map(|_| mode),
        restriction_mass: None,
        h_t,
        h_parties,
        h_party,
        h_t_given_party,
        h_t_given_all,
        h_f,
        h_f_given_party,
        h_t_given_party_f,
        h_f_given_t_party,
        i_xy,
        i_xy_given_t,
        triple_t,
        triple_f,
        ic,
        ic_identity_gap,
        chain_rule_gap,
        rho_global,
        rho_box_max,
        expected_log_rho: pairwise_sum(&log_terms),
        box_count: cover.len(),
        excluded_mass,
        excluded_boxes,
    })
}
