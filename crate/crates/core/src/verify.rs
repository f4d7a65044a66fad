//! Signed margins for the entropic inequalities, AM analysis and the seeded
//! batch runner. A margin is `LHS − RHS`; `margin ≥ −tol` means satisfied.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::domain::{compile_tree, Cover, DomainShape, Protocol, ProtocolTree, Rect, Selector};
use crate::error::{CommlabError, Result};
use crate::functions::{
    function_for_cover, gen_function, good_set, random_bounded, AMProtocol, FunctionKind, Target,
};
use crate::info::{build_profile, ColorMode, InfoProfile, JointDistribution};

/// Which aggregate of the thickness stands in for `log ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RhoMode {
    /// `log2 ρ(Π)` over the whole cover.
    #[default]
    Global,
    /// `log2 max ρ(R)` over boxes selected on the support.
    MaxBox,
    /// `E[log2 ρ(T)]`.
    Expected,
}

impl RhoMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RhoMode::Global => "global",
            RhoMode::MaxBox => "max-box",
            RhoMode::Expected => "expected",
        }
    }

    pub fn log_rho(self, profile: &InfoProfile) -> f64 {
        match self {
            RhoMode::Global => f64::from(profile.rho_global.max(1)).log2(),
            RhoMode::MaxBox => f64::from(profile.rho_box_max.max(1)).log2(),
            RhoMode::Expected => profile.expected_log_rho,
        }
    }
}

impl fmt::Display for RhoMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RhoMode {
    type Err = CommlabError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "global" => Ok(RhoMode::Global),
            "max-box" => Ok(RhoMode::MaxBox),
            "expected" => Ok(RhoMode::Expected),
            _ => Err(CommlabError::invalid(format!("unknown rho mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Inequality {
    Main,
    Transcript,
    IcIdentity,
    IcBound,
    Multiparty,
    MultipartyWithF,
    TreeMonotonicity,
    ChainRule,
    TripleFormula,
    TripleFFormula,
}

impl Inequality {
    pub fn id(self) -> &'static str {
        match self {
            Inequality::Main => "main",
            Inequality::Transcript => "transcript",
            Inequality::IcIdentity => "ic_identity",
            Inequality::IcBound => "ic_bound",
            Inequality::Multiparty => "multiparty",
            Inequality::MultipartyWithF => "multiparty_with_f",
            Inequality::TreeMonotonicity => "tree_monotonicity",
            Inequality::ChainRule => "chain_rule",
            Inequality::TripleFormula => "triple_formula",
            Inequality::TripleFFormula => "triple_f_formula",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarginReport {
    pub inequality: Inequality,
    pub margin: f64,
    pub components: Vec<(&'static str, f64)>,
    pub rho_mode: Option<RhoMode>,
    pub fingerprint: u64,
    pub seed: Option<u64>,
    pub excluded_mass: f64,
    pub flagged_boxes: Vec<usize>,
}

impl MarginReport {
    fn new(
        inequality: Inequality,
        margin: f64,
        components: Vec<(&'static str, f64)>,
        rho_mode: Option<RhoMode>,
        profile: &InfoProfile,
    ) -> Self {
        MarginReport {
            inequality,
            margin,
            components,
            rho_mode,
            fingerprint: profile.fingerprint,
            seed: None,
            excluded_mass: profile.excluded_mass,
            flagged_boxes: profile.excluded_boxes.clone(),
        }
    }

    /// An identity check: the margin is the negated gap.
    fn identity(inequality: Inequality, gap: f64, profile: &InfoProfile) -> Self {
        Self::new(inequality, -gap, vec![("gap", gap)], None, profile)
    }

    pub fn satisfied(&self, tol: f64) -> bool {
        self.margin >= -tol
    }

    pub fn component(&self, name: &str) -> Option<f64> {
        self.components
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, v)| *v)
    }
}

fn two_party<T>(v: Option<T>, what: &str) -> Result<T> {
    v.ok_or_else(|| CommlabError::invalid(format!("{what} needs a two-party profile")))
}

/// `I(X:Y) − I(X:Y|T) + log2 ρ`.
pub fn check_main_inequality(profile: &InfoProfile, rho_mode: RhoMode) -> Result<MarginReport> {
    let i_xy = two_party(profile.i_xy, "the main inequality")?;
    let i_xy_t = two_party(profile.i_xy_given_t, "the main inequality")?;
    let log_rho = rho_mode.log_rho(profile);
    Ok(MarginReport::new(
        Inequality::Main,
        i_xy - i_xy_t + log_rho,
        vec![
            ("I_XY", i_xy),
            ("I_XY_given_T", i_xy_t),
            ("log_rho", log_rho),
        ],
        Some(rho_mode),
        profile,
    ))
}

/// How `F` was obtained for the transcript bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TranscriptMode {
    Function,
    Relation,
    /// Distribution conditioned on a GOOD set.
    Restricted,
}

/// `H(T) − [H(F|X) + H(F|Y) + H(T|X,F) + H(T|Y,F) − log2 ρ]`.
pub fn check_transcript_bound(
    profile: &InfoProfile,
    mode: TranscriptMode,
    rho_mode: RhoMode,
) -> Result<MarginReport> {
    if profile.arity != 2 {
        return Err(CommlabError::invalid(
            "the transcript bound needs a two-party profile",
        ));
    }
    let consistent = match mode {
        TranscriptMode::Function => {
            profile.color_mode == Some(ColorMode::Function) && profile.restriction_mass.is_none()
        }
        TranscriptMode::Relation => profile.color_mode == Some(ColorMode::BoxColor),
        TranscriptMode::Restricted => {
            profile.color_mode.is_some() && profile.restriction_mass.is_some()
        }
    };
    if !consistent {
        return Err(CommlabError::invalid(format!(
            "profile was not built for {mode:?} transcript mode"
        )));
    }
    let hf = profile.h_f_given_party.as_ref().expect("colored profile");
    let ht = profile.h_t_given_party_f.as_ref().expect("colored profile");
    let log_rho = rho_mode.log_rho(profile);
    let rhs = hf[0] + hf[1] + ht[0] + ht[1] - log_rho;
    Ok(MarginReport::new(
        Inequality::Transcript,
        profile.h_t - rhs,
        vec![
            ("H_T", profile.h_t),
            ("H_F_given_X", hf[0]),
            ("H_F_given_Y", hf[1]),
            ("H_T_given_XF", ht[0]),
            ("H_T_given_YF", ht[1]),
            ("log_rho", log_rho),
        ],
        Some(rho_mode),
        profile,
    ))
}

/// Identity gap `|IC − (H(T) − I(X:Y:T))|` (as a negated margin) and bound
/// margin `H(T) + log2 ρ − IC`.
pub fn check_ic(profile: &InfoProfile, rho_mode: RhoMode) -> Result<(MarginReport, MarginReport)> {
    let ic = two_party(profile.ic, "the information cost check")?;
    let gap = two_party(profile.ic_identity_gap, "the information cost check")?;
    let triple = two_party(profile.triple_t, "the information cost check")?.value;
    let mut identity = MarginReport::identity(Inequality::IcIdentity, gap, profile);
    identity
        .components
        .extend([("IC", ic), ("H_T", profile.h_t), ("I_XYT", triple)]);
    let log_rho = rho_mode.log_rho(profile);
    let bound = MarginReport::new(
        Inequality::IcBound,
        profile.h_t + log_rho - ic,
        vec![("H_T", profile.h_t), ("log_rho", log_rho), ("IC", ic)],
        Some(rho_mode),
        profile,
    );
    Ok((identity, bound))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MultipartyMode {
    TranscriptOnly,
    WithF,
}

/// `H(T) − (1/(ℓ−1))[Σ H(T|X_i) − log2 ρ]`, or with `F`:
/// `H(T) − (1/(ℓ−1))[Σ H(F|X_i) + Σ H(T|X_i,F) − log2 ρ]`.
pub fn check_multiparty(
    profile: &InfoProfile,
    parties: usize,
    mode: MultipartyMode,
    rho_mode: RhoMode,
) -> Result<MarginReport> {
    if parties < 2 || parties != profile.arity {
        return Err(CommlabError::invalid(format!(
            "multiparty check for ℓ = {parties} on a {}-party profile",
            profile.arity
        )));
    }
    let log_rho = rho_mode.log_rho(profile);
    let scale = 1.0 / (parties - 1) as f64;
    let (ineq, sum, mut components) = match mode {
        MultipartyMode::TranscriptOnly => {
            let s = crate::info::pairwise_sum(&profile.h_t_given_party);
            (Inequality::Multiparty, s, vec![("sum_H_T_given_Xi", s)])
        }
        MultipartyMode::WithF => {
            let (hf, ht) = match (&profile.h_f_given_party, &profile.h_t_given_party_f) {
                (Some(a), Some(b)) => (a, b),
                _ => {
                    return Err(CommlabError::invalid(
                        "with-f multiparty check needs a colored profile",
                    ))
                }
            };
            let sf = crate::info::pairwise_sum(hf);
            let st = crate::info::pairwise_sum(ht);
            (
                Inequality::MultipartyWithF,
                sf + st,
                vec![("sum_H_F_given_Xi", sf), ("sum_H_T_given_XiF", st)],
            )
        }
    };
    components.insert(0, ("H_T", profile.h_t));
    components.push(("log_rho", log_rho));
    Ok(MarginReport::new(
        ineq,
        profile.h_t - scale * (sum - log_rho),
        components,
        Some(rho_mode),
        profile,
    ))
}

/// `I(X:Y) − I(X:Y|T)` for the leaf variable of a deterministic tree.
pub fn check_deterministic_monotonicity(
    tree: &ProtocolTree,
    dist: &JointDistribution,
) -> Result<MarginReport> {
    let protocol = compile_tree(tree)?;
    let profile = build_profile(dist, &protocol, None, ColorMode::Function)?;
    tree_report(&profile)
}

fn tree_report(profile: &InfoProfile) -> Result<MarginReport> {
    let i_xy = two_party(profile.i_xy, "the tree check")?;
    let i_xy_t = two_party(profile.i_xy_given_t, "the tree check")?;
    Ok(MarginReport::new(
        Inequality::TreeMonotonicity,
        i_xy - i_xy_t,
        vec![("I_XY", i_xy), ("I_XY_given_T", i_xy_t)],
        None,
        profile,
    ))
}

/// How the overall error of an AM protocol is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Correctness {
    /// Fraction of cells answered correctly by fewer than 2/3 of branches.
    #[default]
    PerInput,
    /// Mean over branches of the fraction of cells answered wrongly.
    Uniform,
}

impl FromStr for Correctness {
    type Err = CommlabError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-input" => Ok(Correctness::PerInput),
            "uniform" => Ok(Correctness::Uniform),
            _ => Err(CommlabError::invalid(format!(
                "unknown correctness mode {s:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AMReport {
    pub branch_errors: Vec<f64>,
    pub good_sizes: Vec<usize>,
    pub overall_error: f64,
    pub correctness: Correctness,
    /// `log2` of the largest branch box count.
    pub cost: f64,
    pub r0: usize,
    pub rho_r0: u32,
    pub restricted: MarginReport,
    pub profile: InfoProfile,
    /// `H(F|X) + H(F|Y) − log2 ρ(Π_r0)` on the uniform distribution over
    /// `GOOD_r0`.
    pub lower_bound: f64,
}

pub fn am_analyze(am: &AMProtocol, target: &Target, correctness: Correctness) -> Result<AMReport> {
    let shape = target.shape();
    if am.branches()[0].protocol().cover().shape() != shape {
        return Err(CommlabError::invalid(
            "AM protocol and target have different domains",
        ));
    }
    if shape.arity() != 2 {
        return Err(CommlabError::invalid(
            "AM analysis needs a two-party domain",
        ));
    }
    let cells = shape.cell_count();
    let goods = am
        .branches()
        .iter()
        .map(|b| good_set(b, target))
        .collect::<Result<Vec<_>>>()?;
    let good_sizes: Vec<usize> = goods.iter().map(|g| g.count_ones(..)).collect();
    let branch_errors: Vec<f64> = good_sizes
        .iter()
        .map(|&g| (cells - g) as f64 / cells as f64)
        .collect();
    let r = goods.len();
    let overall_error = match correctness {
        Correctness::Uniform => crate::info::pairwise_sum(&branch_errors) / r as f64,
        Correctness::PerInput => {
            let bad = (0..cells)
                .filter(|&c| 3 * goods.iter().filter(|g| g.contains(c)).count() < 2 * r)
                .count();
            bad as f64 / cells as f64
        }
    };
    // first maximum
    let r0 = good_sizes.iter().enumerate().fold(
        0,
        |best, (i, &g)| if g > good_sizes[best] { i } else { best },
    );
    if good_sizes[r0] == 0 {
        return Err(CommlabError::Degenerate(format!(
            "GOOD set of branch {r0} is empty"
        )));
    }
    let max_boxes = am
        .branches()
        .iter()
        .map(|b| b.protocol().cover().len())
        .max()
        .unwrap_or(1);
    let cost = (max_boxes as f64).log2();

    let good_cells: Vec<usize> = goods[r0].ones().collect();
    let dist = JointDistribution::uniform_on(shape.clone(), &good_cells)?;
    let mode = match target {
        Target::Function(_) => ColorMode::Function,
        Target::Relation(_) => ColorMode::BoxColor,
    };
    let protocol = am.branches()[r0].protocol();
    let mut profile = build_profile(&dist, protocol, Some(target), mode)?;
    profile.restriction_mass = Some(good_sizes[r0] as f64 / cells as f64);
    let restricted = check_transcript_bound(&profile, TranscriptMode::Restricted, RhoMode::Global)?;
    let hf = profile.h_f_given_party.as_ref().expect("colored profile");
    let rho_r0 = profile.rho_global;
    let lower_bound = hf[0] + hf[1] - f64::from(rho_r0.max(1)).log2();
    Ok(AMReport {
        branch_errors,
        good_sizes,
        overall_error,
        correctness,
        cost,
        r0,
        rho_r0,
        restricted,
        profile,
        lower_bound,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Suite {
    Main,
    Transcript,
    Ic,
    Multiparty,
    Tree,
}

impl Suite {
    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Main => "main",
            Suite::Transcript => "transcript",
            Suite::Ic => "ic",
            Suite::Multiparty => "multiparty",
            Suite::Tree => "tree",
        }
    }
}

impl FromStr for Suite {
    type Err = CommlabError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "main" => Ok(Suite::Main),
            "transcript" => Ok(Suite::Transcript),
            "ic" => Ok(Suite::Ic),
            "multiparty" => Ok(Suite::Multiparty),
            "tree" => Ok(Suite::Tree),
            _ => Err(CommlabError::invalid(format!("unknown suite {s:?}"))),
        }
    }
}

/// One verification instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Case {
    pub protocol: Protocol,
    pub dist: JointDistribution,
    pub target: Option<Target>,
    pub tree: Option<ProtocolTree>,
}

/// The 2×2 instance with two full boxes where the transcript is box 0 iff
/// `x ⊕ y = 0`; the main inequality holds with equality on it.
pub fn parity_tightness() -> Case {
    let shape = DomainShape::new(vec![2, 2]).expect("2x2");
    let cover = Cover::new(shape.clone(), vec![Rect::full(&shape), Rect::full(&shape)])
        .expect("two full boxes");
    let protocol = Protocol::new(
        cover,
        Selector::Explicit {
            table: vec![0, 1, 1, 0],
        },
    )
    .expect("parity selector");
    let xor = gen_function(&FunctionKind::Xor { n: 1 }).expect("xor(1)");
    Case {
        protocol,
        dist: JointDistribution::uniform(shape),
        target: Some(Target::Function(xor)),
        tree: None,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    /// Random tree partition; each side uniform in `1..=max_side`.
    Partition {
        arity: usize,
        max_side: usize,
    },
    /// Random tree partition plus `1..rho_max` extra boxes (so generation
    /// always succeeds), thickness at most `rho_max`, random selector.
    RandomBounded {
        arity: usize,
        max_side: usize,
        rho_max: u32,
    },
    ParityTightness,
    /// The same instance for every seed.
    Fixed(Box<Case>),
}

const MAX_TARGET_COLORS: u32 = 4;

fn random_shape<R: Rng>(arity: usize, max_side: usize, rng: &mut R) -> Result<DomainShape> {
    if arity < 2 || max_side == 0 {
        return Err(CommlabError::invalid(
            "generator needs ℓ ≥ 2 and a positive side",
        ));
    }
    DomainShape::new((0..arity).map(|_| rng.gen_range(1..=max_side)).collect())
}

fn random_selector<R: Rng>(cover: &Cover, rng: &mut R) -> Selector {
    match rng.gen_range(0..3) {
        0 => Selector::MinIndex,
        1 => Selector::SeededRandom { seed: rng.gen() },
        _ => Selector::Explicit {
            table: cover
                .incidence()
                .iter()
                .map(|c| c[rng.gen_range(0..c.len())] as usize)
                .collect(),
        },
    }
}

impl Generator {
    pub fn generate(&self, seed: u64) -> Result<Case> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match self {
            Generator::Partition { arity, max_side } => {
                let shape = random_shape(*arity, *max_side, &mut rng)?;
                let stop = rng.gen_range(0.02..0.4);
                let tree = ProtocolTree::random(shape.clone(), &mut rng, stop);
                let protocol = compile_tree(&tree)?;
                let dist = JointDistribution::random(shape, &mut rng);
                let colors = rng.gen_range(1..=MAX_TARGET_COLORS);
                let f = function_for_cover(protocol.cover(), colors, &mut rng)?;
                Ok(Case {
                    protocol,
                    dist,
                    target: Some(Target::Function(f)),
                    tree: Some(tree),
                })
            }
            Generator::RandomBounded {
                arity,
                max_side,
                rho_max,
            } => {
                let shape = random_shape(*arity, *max_side, &mut rng)?;
                let extra = if *rho_max >= 2 {
                    rng.gen_range(1..*rho_max as usize)
                } else {
                    0
                };
                let cover = random_bounded(&shape, *rho_max, extra, seed, &mut rng)?;
                let selector = random_selector(&cover, &mut rng);
                let dist = JointDistribution::random(shape, &mut rng);
                let colors = rng.gen_range(1..=MAX_TARGET_COLORS);
                let f = function_for_cover(&cover, colors, &mut rng)?;
                Ok(Case {
                    protocol: Protocol::new(cover, selector)?,
                    dist,
                    target: Some(Target::Function(f)),
                    tree: None,
                })
            }
            Generator::ParityTightness => Ok(parity_tightness()),
            Generator::Fixed(case) => Ok((**case).clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchConfig {
    pub suite: Suite,
    pub generator: Generator,
    pub seeds: Vec<u64>,
    pub rho_mode: RhoMode,
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowStatus {
    Ok,
    Violation,
    Error,
}

impl RowStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::Violation => "violation",
            RowStatus::Error => "error",
        }
    }
}

#[derive(Debug, Clone)]
pub struct BatchRow {
    pub suite: Suite,
    pub seed: u64,
    pub case: Option<Case>,
    /// Profile without colors (base quantities).
    pub profile: Option<InfoProfile>,
    pub reports: Vec<MarginReport>,
    pub status: RowStatus,
    pub error: Option<String>,
    pub runtime_ms: f64,
}

impl BatchRow {
    pub fn report(&self, ineq: Inequality) -> Option<&MarginReport> {
        self.reports.iter().find(|r| r.inequality == ineq)
    }

    /// Margins below `−tol` among the asserted checks.
    pub fn violations(&self, tol: f64) -> Vec<&MarginReport> {
        let main_ok = self
            .report(Inequality::Main)
            .is_none_or(|m| m.satisfied(tol));
        self.reports
            .iter()
            .filter(|r| !r.satisfied(tol))
            // the transcript bound is only checked where the main inequality holds
            .filter(|r| r.inequality != Inequality::Transcript || main_ok)
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct BatchResult {
    pub rows: Vec<BatchRow>,
    pub violations: usize,
    pub errors: usize,
}

/// Checks of `suite` on one case.
pub fn evaluate_case(
    case: &Case,
    suite: Suite,
    rho_mode: RhoMode,
) -> Result<(InfoProfile, Vec<MarginReport>)> {
    let arity = case.dist.shape().arity();
    let function_target = matches!(case.target, Some(Target::Function(_)));
    let base = build_profile(
        &case.dist,
        &case.protocol,
        if function_target {
            case.target.as_ref()
        } else {
            None
        },
        ColorMode::Function,
    )?;
    let colored = match &case.target {
        Some(Target::Relation(_)) => Some(build_profile(
            &case.dist,
            &case.protocol,
            case.target.as_ref(),
            ColorMode::BoxColor,
        )?),
        Some(Target::Function(_)) => Some(base.clone()),
        None => None,
    };

    let mut reports = Vec::new();
    reports.push(MarginReport::identity(
        Inequality::ChainRule,
        base.chain_rule_gap,
        &base,
    ));
    if arity == 2 {
        let triple = base.triple_t.expect("two-party profile");
        reports.push(MarginReport::identity(
            Inequality::TripleFormula,
            triple.formula_gap,
            &base,
        ));
        if let Some((_, gap)) = base.triple_f {
            reports.push(MarginReport::identity(
                Inequality::TripleFFormula,
                gap,
                &base,
            ));
        }
        reports.push(check_ic(&base, rho_mode)?.0);
    }
    match suite {
        Suite::Main => reports.push(check_main_inequality(&base, rho_mode)?),
        Suite::Transcript => {
            reports.push(check_main_inequality(&base, rho_mode)?);
            let colored = colored
                .as_ref()
                .ok_or_else(|| CommlabError::invalid("transcript suite needs a target"))?;
            let mode = if function_target {
                TranscriptMode::Function
            } else {
                TranscriptMode::Relation
            };
            reports.push(check_transcript_bound(colored, mode, rho_mode)?);
        }
        Suite::Ic => {
            reports.push(check_main_inequality(&base, rho_mode)?);
            reports.push(check_ic(&base, rho_mode)?.1);
        }
        Suite::Multiparty => {
            reports.push(check_multiparty(
                &base,
                arity,
                MultipartyMode::TranscriptOnly,
                rho_mode,
            )?);
            if let Some(c) = &colored {
                reports.push(check_multiparty(c, arity, MultipartyMode::WithF, rho_mode)?);
            }
        }
        Suite::Tree => {
            if case.tree.is_none() {
                return Err(CommlabError::invalid("tree suite needs a protocol tree"));
            }
            reports.push(tree_report(&base)?);
        }
    }
    Ok((base, reports))
}

fn run_row(config: &BatchConfig, seed: u64) -> BatchRow {
    let start = Instant::now();
    let outcome = config.generator.generate(seed).and_then(|case| {
        let (profile, mut reports) = evaluate_case(&case, config.suite, config.rho_mode)?;
        for r in &mut reports {
            r.seed = Some(seed);
        }
        Ok((case, profile, reports))
    });
    let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    match outcome {
        Ok((case, profile, reports)) => {
            let mut row = BatchRow {
                suite: config.suite,
                seed,
                case: Some(case),
                profile: Some(profile),
                reports,
                status: RowStatus::Ok,
                error: None,
                runtime_ms,
            };
            if !row.violations(config.tol).is_empty() {
                row.status = RowStatus::Violation;
            }
            row
        }
        Err(e) => BatchRow {
            suite: config.suite,
            seed,
            case: None,
            profile: None,
            reports: Vec::new(),
            status: RowStatus::Error,
            error: Some(e.to_string()),
            runtime_ms,
        },
    }
}

/// Runs `config.suite` on every seed in parallel; rows come back sorted by
/// seed. Generation or evaluation failures become error rows.
pub fn batch_experiment(config: &BatchConfig) -> Result<BatchResult> {
    if config.suite == Suite::Tree && !matches!(config.generator, Generator::Partition { .. }) {
        return Err(CommlabError::invalid(
            "tree suite needs the partition generator",
        ));
    }
    if !(config.tol.is_finite()) {
        return Err(CommlabError::invalid("tolerance must be finite"));
    }
    let mut rows: Vec<BatchRow> = config
        .seeds
        .par_iter()
        .map(|&seed| run_row(config, seed))
        .collect();
    rows.sort_by_key(|r| r.seed);
    let violations = rows
        .iter()
        .filter(|r| r.status == RowStatus::Violation)
        .count();
    let errors = rows.iter().filter(|r| r.status == RowStatus::Error).count();
    Ok(BatchResult {
        rows,
        violations,
        errors,
    })
}
