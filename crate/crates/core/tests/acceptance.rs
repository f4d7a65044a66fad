//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runs as a plain binary (`harness = false`).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use commlab::bounds::{
    cover_number, enumerate_maximal_monochromatic, CoverMode, CoverStatus, DEFAULT_CATALOG_CAP,
};
use commlab::cli::instance::{save_instance, InstanceFile};
use commlab::domain::{compile_tree, DomainShape, Protocol, ProtocolTree, Selector};
use commlab::functions::{gen_cover, gen_function, AMProtocol, CoverKind, FunctionKind, Target};
use commlab::info::{
    binary_entropy, build_profile, ColorMode, Ensemble, JointDistribution, VarSet,
};
use commlab::verify::{
    am_analyze, batch_experiment, check_multiparty, check_transcript_bound, evaluate_case,
    parity_tightness, BatchConfig, BatchResult, Case, Correctness, Generator, Inequality,
    MultipartyMode, RhoMode, RowStatus, Suite, TranscriptMode,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

/// Batches run by the suite, kept for the identity sweep.
#[derive(Default)]
struct Batches(Vec<(String, BatchResult)>);

impl Batches {
    fn run(
        &mut self,
        label: &str,
        suite: Suite,
        generator: Generator,
        seeds: std::ops::Range<u64>,
    ) -> Result<&BatchResult, String> {
        let config = BatchConfig {
            suite,
            generator,
            seeds: seeds.collect(),
            rho_mode: RhoMode::Global,
            tol: TOL,
        };
        let result = batch_experiment(&config).map_err(|e| e.to_string())?;
        self.0.push((label.to_string(), result));
        Ok(&self.0.last().unwrap().1)
    }
}

fn commlab(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_commlab"))
        .args(args)
        .output()
        .expect("run commlab")
}

fn csv_column(csv: &str, name: &str) -> Vec<String> {
    let mut rdr = csv::Reader::from_reader(csv.as_bytes());
    let idx = rdr
        .headers()
        .unwrap()
        .iter()
        .position(|h| h == name)
        .expect("column present");
    rdr.records().map(|r| r.unwrap()[idx].to_string()).collect()
}

fn ac1() -> Outcome {
    let mut notes = Vec::new();
    for (n, want) in [(1u32, 4usize), (2, 16)] {
        let start = Instant::now();
        let n_arg = n.to_string();
        let out = commlab(&["cover", "--exact", "--fn", "xor", "--n", &n_arg]);
        let secs = start.elapsed().as_secs_f64();
        ensure!(
            out.status.code() == Some(0),
            "xor({n}): exit {:?}",
            out.status.code()
        );
        let got = csv_column(&String::from_utf8_lossy(&out.stdout), "cover_exact");
        ensure!(
            got == [want.to_string()],
            "xor({n}): cover_exact {got:?}, want {want}"
        );
        ensure!(secs < 10.0, "xor({n}) took {secs:.2} s");
        notes.push(format!("xor({n})={want} in {secs:.2}s"));
    }
    Ok(notes.join(", "))
}

fn ac2() -> Outcome {
    let start = Instant::now();
    for n in 1..=3u32 {
        let f = gen_function(&FunctionKind::Xor { n }).map_err(|e| e.to_string())?;
        let cat =
            enumerate_maximal_monochromatic(&f, DEFAULT_CATALOG_CAP).map_err(|e| e.to_string())?;
        ensure!(!cat.partial, "xor({n}) catalog truncated");
        let cells = f.shape().cell_count();
        ensure!(
            cat.len() == cells,
            "xor({n}): {} boxes for {cells} cells",
            cat.len()
        );
        ensure!(
            cat.iter().all(|(_, r)| r.cell_count() == 1),
            "xor({n}) has a non-singleton maximal box"
        );
    }
    let secs = start.elapsed().as_secs_f64();
    ensure!(secs < 60.0, "took {secs:.1} s");
    Ok(format!("only 1x1 boxes for n=1..3 in {secs:.2}s"))
}

fn ac3() -> Outcome {
    let (profile, reports) = evaluate_case(&parity_tightness(), Suite::Main, RhoMode::Global)
        .map_err(|e| e.to_string())?;
    let margin = reports
        .iter()
        .find(|r| r.inequality == Inequality::Main)
        .ok_or("no main report")?
        .margin;
    let triple = profile.triple_t.ok_or("no triple information")?.value;
    ensure!(margin.abs() <= TOL, "margin_main = {margin}");
    ensure!((triple + 1.0).abs() <= TOL, "I(X:Y:T) = {triple}");
    Ok(format!("margin_main={margin:.3e}, I(X:Y:T)={triple}"))
}

/// Writes a reproducer for every violating row under `dir`.
fn write_reproducers(result: &BatchResult, label: &str, dir: &Path) -> Vec<String> {
    let mut written = Vec::new();
    for row in result
        .rows
        .iter()
        .filter(|r| r.status == RowStatus::Violation)
    {
        let path = dir.join(format!("repro-{label}-{}.json", row.seed));
        if let Some(case) = &row.case {
            if save_instance(&path, &InstanceFile::from_case(case)).is_ok() {
                written.push(path.display().to_string());
            }
        }
    }
    written
}

fn ac4(batches: &mut Batches) -> Outcome {
    let start = Instant::now();
    let result = batches.run(
        "main/partition",
        Suite::Main,
        Generator::Partition {
            arity: 2,
            max_side: 16,
        },
        0..10_000,
    )?;
    let secs = start.elapsed().as_secs_f64();
    let ok = result
        .rows
        .iter()
        .filter(|r| r.status != RowStatus::Error)
        .count();
    let min = min_margin(result, Inequality::Main);
    ensure!(
        result.errors == 0,
        "{} rows failed to evaluate",
        result.errors
    );
    ensure!(
        result.violations == 0,
        "{} violations, min margin {min:e}",
        result.violations
    );
    ensure!(ok >= 10_000, "only {ok} partitions evaluated");
    ensure!(secs < 300.0, "took {secs:.1} s");
    Ok(format!("{ok} partitions, min margin {min:.3e}, {secs:.1}s"))
}

fn min_margin(result: &BatchResult, ineq: Inequality) -> f64 {
    result
        .rows
        .iter()
        .filter_map(|r| r.report(ineq))
        .map(|r| r.margin)
        .fold(f64::INFINITY, f64::min)
}

fn ac5(batches: &mut Batches, repro_dir: &Path) -> Outcome {
    let mut evaluated = 0;
    let mut notes = Vec::new();
    let mut failures = Vec::new();
    for (k, rho_max) in [2u32, 4, 8].into_iter().enumerate() {
        // generation may give up on rare seeds; draw more until 3,334 evaluate
        let base = 1_000_000 * (k as u64 + 1);
        let mut next = base;
        let mut done = 0;
        while done < 3_334 && next < base + 10_000 {
            let want = (3_334 - done) as u64;
            let label = format!("main/random-bounded-rho{rho_max}");
            let result = batches.run(
                &label,
                Suite::Main,
                Generator::RandomBounded {
                    arity: 2,
                    max_side: 8,
                    rho_max,
                },
                next..next + want,
            )?;
            next += want;
            done += result
                .rows
                .iter()
                .filter(|r| r.status != RowStatus::Error)
                .count();
            if result.violations > 0 {
                let files = write_reproducers(result, &format!("rho{rho_max}"), repro_dir);
                failures.push(format!(
                    "ρmax={rho_max}: {} violations, min margin {:e}, reproducers {files:?}",
                    result.violations,
                    min_margin(result, Inequality::Main)
                ));
            }
        }
        evaluated += done;
        notes.push(format!("ρmax={rho_max}: {done}"));
    }
    ensure!(failures.is_empty(), "{}", failures.join("; "));
    ensure!(evaluated >= 10_000, "only {evaluated} covers evaluated");
    Ok(format!(
        "{evaluated} covers ({}), no violations",
        notes.join(", ")
    ))
}

fn ac6(batches: &Batches) -> Outcome {
    let ids = [
        Inequality::ChainRule,
        Inequality::TripleFormula,
        Inequality::IcIdentity,
    ];
    let mut counts = [0usize; 3];
    let mut instances = 0;
    for (label, result) in &batches.0 {
        for row in &result.rows {
            if row.status == RowStatus::Error {
                continue;
            }
            instances += 1;
            let two_party = row.profile.as_ref().is_some_and(|p| p.arity == 2);
            for (k, id) in ids.iter().enumerate() {
                match row.report(*id) {
                    Some(r) => {
                        ensure!(
                            -r.margin <= TOL,
                            "{label} seed {}: {} gap {:e}",
                            row.seed,
                            id.id(),
                            -r.margin
                        );
                        counts[k] += 1;
                    }
                    None if k == 0 || two_party => {
                        return Err(format!("{label} seed {}: no {} check", row.seed, id.id()))
                    }
                    None => {}
                }
            }
        }
    }
    ensure!(instances > 0, "no suite instances ran");
    Ok(format!(
        "{instances} instances: chain rule {}, triple formula {}, IC identity {}",
        counts[0], counts[1], counts[2]
    ))
}

fn uniform_singleton_case(shape: DomainShape, f: Option<FunctionKind>) -> Result<Case, String> {
    let cover = gen_cover(&CoverKind::TrivialMerlin {
        shape: shape.clone(),
    })
    .map_err(|e| e.to_string())?;
    let protocol = Protocol::new(cover, Selector::MinIndex).map_err(|e| e.to_string())?;
    let target = match f {
        Some(k) => Some(Target::Function(
            gen_function(&k).map_err(|e| e.to_string())?,
        )),
        None => None,
    };
    Ok(Case {
        protocol,
        dist: JointDistribution::uniform(shape),
        target,
        tree: None,
    })
}

fn ac7(batches: &mut Batches) -> Outcome {
    let mut checked = 0;
    let mut skipped = 0;
    let runs: [(&str, Generator); 2] = [
        (
            "transcript/partition",
            Generator::Partition {
                arity: 2,
                max_side: 10,
            },
        ),
        (
            "transcript/random-bounded",
            Generator::RandomBounded {
                arity: 2,
                max_side: 8,
                rho_max: 4,
            },
        ),
    ];
    for (label, generator) in runs {
        let result = batches.run(label, Suite::Transcript, generator, 0..2_000)?;
        ensure!(
            result.errors < result.rows.len(),
            "{label}: every row failed"
        );
        for row in &result.rows {
            let (Some(main), Some(tr)) = (
                row.report(Inequality::Main),
                row.report(Inequality::Transcript),
            ) else {
                continue;
            };
            if main.margin < -TOL {
                skipped += 1;
                continue;
            }
            ensure!(
                tr.margin >= -TOL,
                "{label} seed {}: transcript margin {:e} with main margin {:e}",
                row.seed,
                tr.margin,
                main.margin
            );
            checked += 1;
        }
    }

    let case = uniform_singleton_case(
        DomainShape::new(vec![2, 2]).unwrap(),
        Some(FunctionKind::Xor { n: 1 }),
    )?;
    let profile = build_profile(
        &case.dist,
        &case.protocol,
        case.target.as_ref(),
        ColorMode::Function,
    )
    .map_err(|e| e.to_string())?;
    let xor1 = check_transcript_bound(&profile, TranscriptMode::Function, RhoMode::Global)
        .map_err(|e| e.to_string())?
        .margin;
    ensure!(
        xor1.abs() <= TOL,
        "xor(1) singleton partition margin {xor1}"
    );
    Ok(format!(
        "{checked} instances with margin_main >= -tol hold ({skipped} skipped), xor(1) margin {xor1:.3e}"
    ))
}

fn ac8(batches: &mut Batches) -> Outcome {
    let case = uniform_singleton_case(DomainShape::new(vec![2, 2, 2]).unwrap(), None)?;
    let profile = build_profile(&case.dist, &case.protocol, None, ColorMode::Function)
        .map_err(|e| e.to_string())?;
    let m = check_multiparty(&profile, 3, MultipartyMode::TranscriptOnly, RhoMode::Global)
        .map_err(|e| e.to_string())?
        .margin;
    ensure!(m.abs() <= TOL, "2x2x2 singleton partition margin {m}");

    let result = batches.run(
        "multiparty/random-bounded",
        Suite::Multiparty,
        Generator::RandomBounded {
            arity: 3,
            max_side: 5,
            rho_max: 4,
        },
        0..1_000,
    )?;
    let ok = result
        .rows
        .iter()
        .filter(|r| r.status != RowStatus::Error)
        .count();
    let min = min_margin(result, Inequality::Multiparty)
        .min(min_margin(result, Inequality::MultipartyWithF));
    ensure!(
        result.violations == 0,
        "{} violations, min margin {min:e}",
        result.violations
    );
    ensure!(ok == 1_000, "{} of 1000 instances failed", 1_000 - ok);
    Ok(format!(
        "singleton margin {m:.3e}; {ok} random ℓ=3 instances, min margin {min:.3e}"
    ))
}

fn ac9() -> Outcome {
    let mut notes = Vec::new();
    for n in [2u32, 3] {
        let f = gen_function(&FunctionKind::Xor { n }).map_err(|e| e.to_string())?;
        let am = AMProtocol::trivial_merlin(&f).map_err(|e| e.to_string())?;
        let r = am_analyze(&am, &Target::Function(f), Correctness::PerInput)
            .map_err(|e| e.to_string())?;
        let two_n = 2.0 * f64::from(n);
        ensure!((r.cost - two_n).abs() <= TOL, "xor({n}) cost {}", r.cost);
        ensure!(
            r.overall_error.abs() <= TOL,
            "xor({n}) error {}",
            r.overall_error
        );
        ensure!(
            (r.lower_bound - two_n).abs() <= TOL,
            "xor({n}) lower bound {}",
            r.lower_bound
        );
        notes.push(format!("xor({n}): cost {} bound {}", r.cost, r.lower_bound));
    }
    Ok(notes.join(", "))
}

/// Smallest number of catalog boxes covering every cell, by subset
/// enumeration per color.
fn brute_force_cover(
    f: &commlab::functions::ColoredFunction,
    boxes: &[(u32, Vec<usize>)],
) -> usize {
    let mut total = 0;
    for color in 0..f.num_colors() {
        let cells: Vec<usize> = (0..f.shape().cell_count())
            .filter(|&c| f.color_at(c) == color)
            .collect();
        if cells.is_empty() {
            continue;
        }
        let mine: Vec<u64> = boxes
            .iter()
            .filter(|(c, _)| *c == color)
            .map(|(_, cs)| {
                cs.iter()
                    .map(|c| 1u64 << cells.iter().position(|x| x == c).unwrap())
                    .fold(0, |a, b| a | b)
            })
            .collect();
        let full = if cells.len() == 64 {
            u64::MAX
        } else {
            (1u64 << cells.len()) - 1
        };
        let best = (0u32..1 << mine.len())
            .filter(|mask| {
                let mut u = 0;
                for (i, m) in mine.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        u |= m;
                    }
                }
                u == full
            })
            .map(u32::count_ones)
            .min()
            .expect("the whole catalog covers its color");
        total += best as usize;
    }
    total
}

fn naive_entropy(
    dist: &JointDistribution,
    transcripts: &[Option<usize>],
    parties: &[usize],
    with_t: bool,
) -> f64 {
    let shape = dist.shape();
    let mut marg: HashMap<Vec<usize>, f64> = HashMap::new();
    for (idx, &p) in dist.probabilities().iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let cell = shape.cell(idx);
        let mut key: Vec<usize> = parties.iter().map(|&i| cell[i]).collect();
        if with_t {
            key.push(transcripts[idx].map_or(usize::MAX, |t| t));
        }
        *marg.entry(key).or_default() += p;
    }
    marg.values()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum()
}

fn ac10() -> Outcome {
    // exact cover against brute force
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut compared = 0;
    let mut tried = 0;
    while compared < 200 {
        tried += 1;
        ensure!(tried < 20_000, "could not find 200 small catalogs");
        let sizes = vec![rng.gen_range(1..=4), rng.gen_range(1..=4)];
        let colors = rng.gen_range(2..=3);
        let f = gen_function(&FunctionKind::Random {
            sizes,
            colors,
            seed: rng.gen(),
        })
        .map_err(|e| e.to_string())?;
        let cat =
            enumerate_maximal_monochromatic(&f, DEFAULT_CATALOG_CAP).map_err(|e| e.to_string())?;
        if cat.len() > 20 {
            continue;
        }
        let boxes: Vec<(u32, Vec<usize>)> =
            cat.iter().map(|(c, r)| (c, r.cells(f.shape()))).collect();
        let want = brute_force_cover(&f, &boxes);
        let got =
            cover_number(&f, CoverMode::Exact { timeout: None }).map_err(|e| e.to_string())?;
        ensure!(
            got.status == CoverStatus::Optimal,
            "solver did not finish on {:?}",
            f.colors()
        );
        ensure!(
            got.upper == want,
            "cover {} vs brute force {want} on {:?}",
            got.upper,
            f.colors()
        );
        compared += 1;
    }

    // entropy engine against direct summation
    let mut max_err: f64 = 0.0;
    for k in 0..1_000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(100_000 + k);
        let arity = rng.gen_range(2..=3);
        let shape = DomainShape::new((0..arity).map(|_| rng.gen_range(1..=5)).collect()).unwrap();
        let dist = JointDistribution::random(shape.clone(), &mut rng);
        let tree = ProtocolTree::random(shape, &mut rng, 0.3);
        let protocol = compile_tree(&tree).map_err(|e| e.to_string())?;
        let transcripts = protocol.transcripts();
        let ens = Ensemble::new(&dist)
            .with_transcript(&protocol)
            .map_err(|e| e.to_string())?;
        for mask in 0u32..1 << (arity + 1) {
            let parties: Vec<usize> = (0..arity).filter(|i| mask >> i & 1 == 1).collect();
            let with_t = mask >> arity & 1 == 1;
            let mut vars = parties
                .iter()
                .fold(VarSet::EMPTY, |s, &i| s | VarSet::party(i));
            if with_t {
                vars = vars | VarSet::T;
            }
            let got = ens.entropy(vars).map_err(|e| e.to_string())?;
            let want = naive_entropy(&dist, &transcripts, &parties, with_t);
            max_err = max_err.max((got - want).abs());
        }
        // one conditional mutual information per distribution
        let (x, y) = (VarSet::party(0), VarSet::party(1));
        let h = |p: &[usize], t: bool| naive_entropy(&dist, &transcripts, p, t);
        let want = h(&[0], true) + h(&[1], true) - h(&[0, 1], true) - h(&[], true);
        let got = ens
            .mutual_info(x, y, VarSet::T)
            .map_err(|e| e.to_string())?;
        max_err = max_err.max((got - want).abs());
    }
    ensure!(max_err <= TOL, "entropy engine off by {max_err:e}");

    let h4 = binary_entropy(0.25);
    let h2 = binary_entropy(0.5);
    ensure!((h4 - 0.811278).abs() <= 1e-4, "h(1/4) = {h4}");
    ensure!((h2 - 1.0).abs() <= 1e-12, "h(1/2) = {h2}");
    Ok(format!(
        "{compared} covers match brute force; 1000 distributions within {max_err:.1e}; h(1/4)={h4:.6}"
    ))
}

fn strip_runtime(csv: &[u8]) -> Vec<Vec<String>> {
    let mut rdr = csv::Reader::from_reader(csv);
    let headers = rdr.headers().unwrap().clone();
    let keep: Vec<usize> = (0..headers.len())
        .filter(|&i| &headers[i] != "runtime_ms")
        .collect();
    let mut out = vec![keep.iter().map(|&i| headers[i].to_string()).collect()];
    for r in rdr.records() {
        let r = r.unwrap();
        out.push(keep.iter().map(|&i| r[i].to_string()).collect());
    }
    out
}

fn ac11() -> Outcome {
    let runs: [&[&str]; 3] = [
        &[
            "verify",
            "main",
            "--gen",
            "random-bounded",
            "--rho-max",
            "4",
            "--seeds",
            "0..199",
        ],
        &[
            "verify",
            "transcript",
            "--gen",
            "partition",
            "--seeds",
            "0..199",
        ],
        &[
            "verify",
            "multiparty",
            "--gen",
            "random-bounded",
            "--seeds",
            "0..99",
        ],
    ];
    for args in runs {
        let a = commlab(args);
        let b = commlab(args);
        ensure!(
            a.status.code() == Some(0),
            "{args:?} exited {:?}",
            a.status.code()
        );
        let (ra, rb) = (strip_runtime(&a.stdout), strip_runtime(&b.stdout));
        ensure!(ra.len() > 1, "{args:?} produced no rows");
        ensure!(ra == rb, "{args:?} differs between runs");
    }
    Ok("3 suites byte-identical across reruns (runtime excluded)".into())
}

fn main() {
    let repro = tempfile::tempdir().expect("temp dir");
    let mut batches = Batches::default();
    let mut results: Vec<(u32, Outcome, Duration)> = Vec::new();
    let mut run = |id: u32, f: &mut dyn FnMut() -> Outcome| {
        eprintln!("AC{id} running");
        let start = Instant::now();
        let outcome = match catch_unwind(AssertUnwindSafe(f)) {
            Ok(o) => o,
            Err(p) => Err(format!(
                "panic: {}",
                p.downcast_ref::<String>()
                    .cloned()
                    .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default()
            )),
        };
        results.push((id, outcome, start.elapsed()));
    };
    run(1, &mut ac1);
    run(2, &mut ac2);
    run(3, &mut ac3);
    run(4, &mut || ac4(&mut batches));
    run(5, &mut || ac5(&mut batches, repro.path()));
    run(7, &mut || ac7(&mut batches));
    run(8, &mut || ac8(&mut batches));
    run(6, &mut || ac6(&batches));
    run(9, &mut ac9);
    run(10, &mut ac10);
    run(11, &mut ac11);

    results.sort_by_key(|r| r.0);
    let mut failed = 0;
    for (id, outcome, took) in &results {
        match outcome {
            Ok(detail) => println!("PASS AC{id}: {detail} [{:.1}s]", took.as_secs_f64()),
            Err(detail) => {
                failed += 1;
                println!("FAIL AC{id}: {detail} [{:.1}s]", took.as_secs_f64());
            }
        }
    }
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        let kept = repro.keep();
        if std::fs::read_dir(&kept).map_or(0, |d| d.count()) > 0 {
            println!("reproducers kept in {}", kept.display());
        }
        std::process::exit(1);
    }
}
