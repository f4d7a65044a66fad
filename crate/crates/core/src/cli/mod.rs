//! Command-line front end: `commlab <gen|verify|cover|bounds|am>`.

pub mod instance;
pub mod report;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bounds::{
    bound_summary, cover_from_catalog, enumerate_maximal_monochromatic, Budget, CoverMode,
    CoverStatus, DEFAULT_CATALOG_CAP,
};
use crate::domain::{Protocol, Selector};
use crate::error::{CommlabError, Result};
use crate::functions::{
    gen_cover, gen_function, AMProtocol, ColoredFunction, CoverKind, FunctionKind, Target,
};
use crate::info::JointDistribution;
use crate::verify::{
    am_analyze, batch_experiment, BatchConfig, Correctness, Generator, RhoMode, RowStatus, Suite,
};

use instance::{load_am, load_instance, AmFile, InstanceFile};
use report::{histogram_svg, render, sizes_label, Format, ReportRow};

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const VIOLATION: u8 = 1;
    pub const INVALID_INPUT: u8 = 2;
    pub const TIMEOUT: u8 = 3;
}

#[derive(Debug, Parser)]
#[command(
    name = "commlab",
    version,
    about = "Rectangle covers, protocols and their information inequalities"
)]
pub struct Cli {
    /// Base seed (single-instance commands and `--instance` runs).
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Margins below -tol count as violations.
    #[arg(
        long,
        global = true,
        default_value_t = 1e-9,
        allow_hyphen_values = true
    )]
    pub tol: f64,
    /// Exact cover time limit in seconds; non-positive disables it.
    #[arg(long = "timeout-s", global = true, default_value_t = 60.0)]
    pub timeout_s: f64,
    /// Output file (or directory for multi-instance `gen`); stdout if absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
    #[arg(long = "rho-mode", global = true, value_enum, default_value_t = RhoArg::Global)]
    pub rho_mode: RhoArg,
    #[arg(long, global = true, value_enum, default_value_t = CorrectnessArg::PerInput)]
    pub correctness: CorrectnessArg,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RhoArg {
    Global,
    MaxBox,
    Expected,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CorrectnessArg {
    PerInput,
    Uniform,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write instance files.
    Gen(GenArgs),
    /// Run an inequality suite over generated instances or an instance file.
    Verify(VerifyArgs),
    /// Exact or greedy monochromatic cover number.
    Cover(CoverArgs),
    /// Cover number, fooling sets, ranks and color count.
    Bounds(FnArgs),
    /// Analyze an AM protocol (file, or trivial Merlin for a function).
    Am(AmArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FnKind {
    Xor,
    Eq,
    Matvec,
    Constant,
    Random,
}

#[derive(Debug, Args)]
pub struct FnArgs {
    /// Built-in function family.
    #[arg(long = "fn", value_enum)]
    pub function: Option<FnKind>,
    /// Bit width for xor, eq and matvec.
    #[arg(long, default_value_t = 1)]
    pub n: u32,
    /// Number of parties for matvec.
    #[arg(long, default_value_t = 2)]
    pub parties: usize,
    /// Comma-separated sizes for constant and random.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Vec<usize>,
    /// Number of colors for random.
    #[arg(long, default_value_t = 2)]
    pub colors: u32,
    /// Instance file providing the function.
    #[arg(long, conflicts_with = "function")]
    pub instance: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    Partition,
    RandomBounded,
    ParityTightness,
    Windmill,
    TrivialMerlin,
    AmTrivialMerlin,
}

#[derive(Debug, Args)]
pub struct SuiteParams {
    /// Seeds: `a..b` (inclusive), a comma list, or a single value.
    #[arg(long, default_value = "0")]
    pub seeds: String,
    /// Largest side length of random domains.
    #[arg(long = "max-side", default_value_t = 8)]
    pub max_side: usize,
    /// Number of parties of random domains (default 2, or 3 for multiparty).
    #[arg(long)]
    pub arity: Option<usize>,
    /// Thickness bound for random-bounded covers.
    #[arg(long = "rho-max", default_value_t = 4)]
    pub rho_max: u32,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(value_enum)]
    pub kind: GenKind,
    #[command(flatten)]
    pub params: SuiteParams,
    #[command(flatten)]
    pub function: FnArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SuiteArg {
    Main,
    Transcript,
    Ic,
    Multiparty,
    Tree,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: SuiteArg,
    /// Instance generator (ignored with `--instance`).
    #[arg(long = "gen", value_enum, default_value_t = GenKind::Partition)]
    pub generator: GenKind,
    /// Verify a single instance file.
    #[arg(long)]
    pub instance: Option<PathBuf>,
    #[command(flatten)]
    pub params: SuiteParams,
    /// Write an SVG histogram of `margin_main` here.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CoverArgs {
    #[arg(long, conflicts_with = "greedy")]
    pub exact: bool,
    #[arg(long)]
    pub greedy: bool,
    #[command(flatten)]
    pub function: FnArgs,
}

#[derive(Debug, Args)]
pub struct AmArgs {
    /// AM file (`commlab-am-v1`).
    #[arg(long = "am", conflicts_with = "function")]
    pub am_file: Option<PathBuf>,
    #[command(flatten)]
    pub function: FnArgs,
}

/// Parses `a..b` (inclusive), `a,b,c`, `a` or the empty string.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    let num = |t: &str| {
        t.trim()
            .parse::<u64>()
            .map_err(|_| CommlabError::invalid(format!("--seeds: {t:?} is not a seed")))
    };
    if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (num(a)?, num(b)?);
        if a > b {
            return Err(CommlabError::invalid(format!("--seeds: empty range {s}")));
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(num).collect()
}

impl From<RhoArg> for RhoMode {
    fn from(r: RhoArg) -> Self {
        match r {
            RhoArg::Global => RhoMode::Global,
            RhoArg::MaxBox => RhoMode::MaxBox,
            RhoArg::Expected => RhoMode::Expected,
        }
    }
}

impl From<CorrectnessArg> for Correctness {
    fn from(c: CorrectnessArg) -> Self {
        match c {
            CorrectnessArg::PerInput => Correctness::PerInput,
            CorrectnessArg::Uniform => Correctness::Uniform,
        }
    }
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Main => Suite::Main,
            SuiteArg::Transcript => Suite::Transcript,
            SuiteArg::Ic => Suite::Ic,
            SuiteArg::Multiparty => Suite::Multiparty,
            SuiteArg::Tree => Suite::Tree,
        }
    }
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

fn gen_name(k: GenKind) -> &'static str {
    match k {
        GenKind::Partition => "partition",
        GenKind::RandomBounded => "random-bounded",
        GenKind::ParityTightness => "parity-tightness",
        GenKind::Windmill => "windmill",
        GenKind::TrivialMerlin => "trivial-merlin",
        GenKind::AmTrivialMerlin => "am-trivial-merlin",
    }
}

impl FnArgs {
    /// Function from `--fn` or from `--instance`, with a label.
    fn resolve(&self, seed: u64) -> Result<(ColoredFunction, String)> {
        if let Some(path) = &self.instance {
            let inst = load_instance(path)?;
            let f = inst.function.ok_or_else(|| {
                CommlabError::invalid(format!("{}: instance has no function", path.display()))
            })?;
            return Ok((f, file_label(path)));
        }
        let kind = self
            .function
            .ok_or_else(|| CommlabError::invalid("give --fn or --instance"))?;
        let need_sizes = || {
            if self.sizes.is_empty() {
                Err(CommlabError::invalid(
                    "--sizes is required for this function",
                ))
            } else {
                Ok(self.sizes.clone())
            }
        };
        let (fk, label) = match kind {
            FnKind::Xor => (FunctionKind::Xor { n: self.n }, format!("xor{}", self.n)),
            FnKind::Eq => (FunctionKind::Eq { n: self.n }, format!("eq{}", self.n)),
            FnKind::Matvec => (
                FunctionKind::MatVec {
                    parties: self.parties,
                    n: self.n,
                },
                format!("matvec{}-{}", self.parties, self.n),
            ),
            FnKind::Constant => {
                let sizes = need_sizes()?;
                let label = format!("constant-{}", sizes_label(&sizes));
                (FunctionKind::Constant { sizes }, label)
            }
            FnKind::Random => {
                let sizes = need_sizes()?;
                let label = format!("random-{}-{}", sizes_label(&sizes), seed);
                (
                    FunctionKind::Random {
                        sizes,
                        colors: self.colors,
                        seed,
                    },
                    label,
                )
            }
        };
        Ok((gen_function(&fk)?, label))
    }
}

fn file_label(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| "instance".into(), |s| s.to_string_lossy().into_owned())
}

fn io_err(path: &Path, e: std::io::Error) -> CommlabError {
    CommlabError::invalid(format!("{}: {e}", path.display()))
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| io_err(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)
                .and_then(|_| out.flush())
                .map_err(|e| CommlabError::invalid(format!("stdout: {e}")))
        }
    }
}

fn emit(cli: &Cli, rows: &[ReportRow]) -> Result<()> {
    write_output(cli.out.as_deref(), &render(rows, cli.format.into())?)
}

fn timeout(cli: &Cli) -> Option<Duration> {
    (cli.timeout_s > 0.0 && cli.timeout_s.is_finite())
        .then(|| Duration::from_secs_f64(cli.timeout_s))
}

fn generator_for(kind: GenKind, params: &SuiteParams, suite: Option<Suite>) -> Result<Generator> {
    let arity = params.arity.unwrap_or(if suite == Some(Suite::Multiparty) {
        3
    } else {
        2
    });
    Ok(match kind {
        GenKind::Partition => Generator::Partition {
            arity,
            max_side: params.max_side,
        },
        GenKind::RandomBounded => Generator::RandomBounded {
            arity,
            max_side: params.max_side,
            rho_max: params.rho_max,
        },
        GenKind::ParityTightness => Generator::ParityTightness,
        other => {
            return Err(CommlabError::invalid(format!(
                "generator {} cannot drive a verification suite",
                gen_name(other)
            )))
        }
    })
}

fn run_gen(cli: &Cli, args: &GenArgs) -> Result<u8> {
    let single = |file: InstanceFile| -> Result<u8> {
        write_output(cli.out.as_deref(), file.to_canonical_json().as_bytes())?;
        Ok(exit::OK)
    };
    match args.kind {
        GenKind::ParityTightness => {
            single(InstanceFile::from_case(&crate::verify::parity_tightness()))
        }
        GenKind::Windmill => {
            let cover = gen_cover(&CoverKind::Windmill)?;
            let p = Protocol::new(cover, Selector::MinIndex)?;
            single(InstanceFile::from_parts(&p, None, None, None))
        }
        GenKind::TrivialMerlin => {
            let (f, _) = args.function.resolve(cli.seed)?;
            let am = AMProtocol::trivial_merlin(&f)?;
            let p = am.branches()[0].protocol();
            let uniform = JointDistribution::uniform(f.shape().clone());
            single(InstanceFile::from_parts(p, Some(&f), None, Some(&uniform)))
        }
        GenKind::AmTrivialMerlin => {
            let (f, _) = args.function.resolve(cli.seed)?;
            let am = AMProtocol::trivial_merlin(&f)?;
            let file = AmFile::from_am(&am, &Target::Function(f));
            write_output(cli.out.as_deref(), file.to_canonical_json().as_bytes())?;
            Ok(exit::OK)
        }
        GenKind::Partition | GenKind::RandomBounded => {
            let generator = generator_for(args.kind, &args.params, None)?;
            let seeds = parse_seeds(&args.params.seeds)?;
            if seeds.len() == 1 && cli.out.as_ref().is_none_or(|p| !p.is_dir()) {
                return single(InstanceFile::from_case(&generator.generate(seeds[0])?));
            }
            let dir = cli.out.as_ref().ok_or_else(|| {
                CommlabError::invalid("--out <dir> is required for several seeds")
            })?;
            std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
            for seed in seeds {
                let file = InstanceFile::from_case(&generator.generate(seed)?);
                let path = dir.join(format!("{}-{seed}.json", gen_name(args.kind)));
                instance::save_instance(&path, &file)?;
            }
            Ok(exit::OK)
        }
    }
}

fn run_verify(cli: &Cli, args: &VerifyArgs) -> Result<u8> {
    let suite: Suite = args.suite.into();
    let rho_mode: RhoMode = cli.rho_mode.into();
    let (generator, label, seeds) = match &args.instance {
        Some(path) => {
            let inst = load_instance(path)?;
            (
                Generator::Fixed(Box::new(inst.to_case())),
                file_label(path),
                vec![cli.seed],
            )
        }
        None => (
            generator_for(args.generator, &args.params, Some(suite))?,
            gen_name(args.generator).to_string(),
            parse_seeds(&args.params.seeds)?,
        ),
    };
    let config = BatchConfig {
        suite,
        generator,
        seeds,
        rho_mode,
        tol: cli.tol,
    };
    let result = batch_experiment(&config)?;
    let rows: Vec<ReportRow> = result
        .rows
        .iter()
        .map(|r| ReportRow::from_batch(r, &label, rho_mode, cli.tol))
        .collect();
    emit(cli, &rows)?;
    if let Some(plot) = &args.plot {
        // ℓ-party suites have no main margin; plot their own bound instead
        let title = if suite == Suite::Multiparty {
            "margin_multiparty"
        } else {
            "margin_main"
        };
        let margins: Vec<f64> = rows
            .iter()
            .filter_map(|r| match suite {
                Suite::Multiparty => r.extra.get(title).copied(),
                _ => r.margin_main,
            })
            .collect();
        std::fs::write(plot, histogram_svg(&margins, title)).map_err(|e| io_err(plot, e))?;
    }

    let dir = cli
        .out
        .as_ref()
        .and_then(|p| p.parent())
        .map_or_else(|| PathBuf::from("."), Path::to_path_buf);
    for row in result
        .rows
        .iter()
        .filter(|r| r.status == RowStatus::Violation)
    {
        let case = row.case.as_ref().expect("evaluated rows keep their case");
        let path = dir.join(format!(
            "repro-{}-{}-{}.json",
            suite.as_str(),
            label,
            row.seed
        ));
        instance::save_instance(&path, &InstanceFile::from_case(case))?;
        for r in row.violations(cli.tol) {
            eprintln!(
                "violation: {} margin {:e} at seed {} (reproducer {})",
                r.inequality.id(),
                r.margin,
                row.seed,
                path.display()
            );
        }
    }
    if result.errors > 0 {
        eprintln!(
            "{} of {} rows failed to generate or evaluate",
            result.errors,
            result.rows.len()
        );
    }
    Ok(if result.violations > 0 {
        exit::VIOLATION
    } else if result.errors > 0 && result.errors == result.rows.len() {
        exit::INVALID_INPUT
    } else {
        exit::OK
    })
}

fn run_cover(cli: &Cli, args: &CoverArgs) -> Result<u8> {
    let start = Instant::now();
    let (f, label) = args.function.resolve(cli.seed)?;
    let catalog = enumerate_maximal_monochromatic(&f, DEFAULT_CATALOG_CAP)?;
    let mut row = ReportRow {
        instance_id: format!("cover-{label}"),
        seed: Some(cli.seed),
        sizes: sizes_label(f.shape().sizes()),
        color_count: Some(f.num_colors() as usize),
        status: "ok".into(),
        ..Default::default()
    };
    let greedy = cover_from_catalog(&f, &catalog, CoverMode::Greedy)?;
    row.cover_greedy = Some(greedy.upper);
    let mut code = exit::OK;
    if !args.greedy {
        let exact = cover_from_catalog(
            &f,
            &catalog,
            CoverMode::Exact {
                timeout: timeout(cli),
            },
        )?;
        row.extra.insert("cover_lower".into(), exact.lower as f64);
        row.extra.insert("cover_upper".into(), exact.upper as f64);
        match exact.status {
            CoverStatus::Timeout => {
                row.status = format!("timeout:lower={}:upper={}", exact.lower, exact.upper);
                eprintln!(
                    "exact cover timed out; optimum lies in [{}, {}]",
                    exact.lower, exact.upper
                );
                code = exit::TIMEOUT;
            }
            _ => row.cover_exact = exact.exact(),
        }
    }
    row.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    emit(cli, &[row])?;
    Ok(code)
}

fn run_bounds(cli: &Cli, args: &FnArgs) -> Result<u8> {
    let start = Instant::now();
    let (f, label) = args.resolve(cli.seed)?;
    let budget = Budget {
        timeout: timeout(cli),
        catalog_cap: DEFAULT_CATALOG_CAP,
    };
    let summary = bound_summary(&f, &budget)?;
    let mut row = ReportRow {
        instance_id: format!("bounds-{label}"),
        seed: Some(cli.seed),
        sizes: sizes_label(f.shape().sizes()),
        status: "ok".into(),
        ..Default::default()
    }
    .with_bounds(&summary);
    let mut code = exit::OK;
    if let Some(c) = &summary.cover {
        row.extra.insert("cover_lower".into(), c.lower as f64);
        row.extra.insert("cover_upper".into(), c.upper as f64);
    }
    if summary.catalog_partial {
        row.status = "catalog-partial".into();
    }
    if summary.timed_out() {
        let c = summary.cover.as_ref().expect("timed out cover");
        row.status = format!("timeout:lower={}:upper={}", c.lower, c.upper);
        code = exit::TIMEOUT;
    }
    if !summary.inconsistencies.is_empty() {
        for m in &summary.inconsistencies {
            eprintln!("internal inconsistency: {m}");
        }
        row.status = "internal-error".into();
        code = exit::VIOLATION;
    }
    row.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    emit(cli, &[row])?;
    Ok(code)
}

fn run_am(cli: &Cli, args: &AmArgs) -> Result<u8> {
    let start = Instant::now();
    let (am, target, label) = match &args.am_file {
        Some(path) => {
            let inst = load_am(path)?;
            (inst.am, inst.target, file_label(path))
        }
        None => {
            let (f, label) = args.function.resolve(cli.seed)?;
            (
                AMProtocol::trivial_merlin(&f)?,
                Target::Function(f),
                format!("trivial-merlin-{label}"),
            )
        }
    };
    let report = am_analyze(&am, &target, cli.correctness.into())?;
    let rho_mode: RhoMode = cli.rho_mode.into();
    let mut row = ReportRow {
        instance_id: format!("am-{label}"),
        seed: Some(cli.seed),
        sizes: sizes_label(target.shape().sizes()),
        status: "ok".into(),
        ..Default::default()
    }
    .with_profile(&report.profile, rho_mode);
    for (k, v) in [
        ("cost", report.cost),
        ("overall_error", report.overall_error),
        ("lower_bound", report.lower_bound),
        ("r0", report.r0 as f64),
        ("rho_r0", f64::from(report.rho_r0)),
        ("margin_transcript_restricted", report.restricted.margin),
    ] {
        row.extra.insert(k.into(), v);
    }
    eprintln!(
        "r0 = {}, cost = {}, error = {}, estimated lower bound = {}",
        report.r0, report.cost, report.overall_error, report.lower_bound
    );
    let code = if report.restricted.satisfied(cli.tol) {
        exit::OK
    } else {
        row.status = "violation:transcript_restricted".into();
        exit::VIOLATION
    };
    row.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    emit(cli, &[row])?;
    Ok(code)
}

/// Runs a parsed command line and returns the exit code; errors are
/// reported on stderr and map to [`exit::INVALID_INPUT`].
pub fn run(cli: &Cli) -> u8 {
    let outcome = match &cli.command {
        Command::Gen(a) => run_gen(cli, a),
        Command::Verify(a) => run_verify(cli, a),
        Command::Cover(a) => run_cover(cli, a),
        Command::Bounds(a) => run_bounds(cli, a),
        Command::Am(a) => run_am(cli, a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit::INVALID_INPUT
        }
    }
}
