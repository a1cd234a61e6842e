//! Command-line driver: test polynomial sets for dynamical irreducibility,
//! emit the explicit constructions, search M(q), compute character sums, and
//! benchmark the closure test.
//!
//! Exit codes: 0 dynamically-irreducible (or generic success), 2 not DI,
//! 3 search budget exhausted (lower bound only), 1 error, 64 usage.

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use dynirr::closure::{
    brute_force_check, closure_test, single_test, BruteForceOutcome, ClosureReport, DISetInstance,
    Verdict, Witness,
};
use dynirr::constructions::{
    build_artin_schreier, charsum_find_alpha, pair_family, single_family, theorem1_family,
};
use dynirr::field::FieldCtx;
use dynirr::format::{emit_poly_set, parse_poly_set};
use dynirr::quad::MonicQuad;
use dynirr::search::{enumerate_irreducible_quads, max_di_search, SearchLimits};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "dynirr", version, about = "Dynamically-irreducible sets of monic quadratics over finite fields")]
struct Cli {
    /// Worker threads for parallelizable operations (charsum); 1 keeps
    /// everything single-threaded and deterministic.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the closure test on a polynomial-set file.
    Test {
        file: String,
        /// Cross-validate against the brute-force composition oracle up to
        /// this depth.
        #[arg(long)]
        oracle_depth: Option<usize>,
    },
    /// Run the r = 1 cycle test on a one-polynomial file.
    Single { file: String },
    /// Exhaustively compute M(q).
    SearchMax {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long, default_value_t = 10_000_000)]
        budget_nodes: u64,
        #[arg(long, default_value_t = 300.0)]
        budget_secs: f64,
    },
    /// Emit one of the explicit families as a polynomial-set file (stdout),
    /// with a verification report on stderr.
    Construct {
        #[command(subcommand)]
        family: ConstructCmd,
    },
    /// Enumerate the character sum S over F_{p^e} and search for a
    /// fully-non-square translate of F_p.
    Charsum {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        e: usize,
    },
    /// Closure-test statistics on random irreducible pairs and triples (CSV).
    Bench {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Also time the brute-force oracle at this depth.
        #[arg(long)]
        oracle_depth: Option<usize>,
    },
}

#[derive(Subcommand)]
enum ConstructCmd {
    /// The p^2-polynomial family over F_{p^p} from a root of X^p - X - h.
    Theorem1 {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        h: u64,
        /// Allow p not congruent to 1 mod 4 (no DI guarantee; the report is
        /// marked outside-hypotheses).
        #[arg(long)]
        relax: bool,
    },
    /// The size-2 family (X-a)^2+a, (X-a-1)^2+a (needs q = 1 mod 4).
    Pair {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        d: usize,
    },
    /// The stable polynomial (X-b)^2 + b - 2.
    Single {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        d: usize,
    },
}

/// Is the closure verdict consistent with a brute-force run at `depth`?
/// A SquareIterate witness with a chain of length k certifies a reducible
/// composition of length k + 1.
fn oracle_consistent(report: &ClosureReport, outcome: &BruteForceOutcome, depth: usize) -> bool {
    match (&report.verdict, outcome) {
        (Verdict::DynamicallyIrreducible, BruteForceOutcome::AllIrreducibleUpTo(_)) => true,
        (Verdict::DynamicallyIrreducible, BruteForceOutcome::Reducible(_)) => false,
        (Verdict::NotDI, outcome) => match &report.witness {
            Some(Witness::ReducibleGenerator { .. }) => {
                matches!(outcome, BruteForceOutcome::Reducible(chain) if chain.len() == 1)
            }
            Some(Witness::SquareIterate { chain, .. }) => {
                let reducible_len = chain.len() + 1;
                if reducible_len <= depth {
                    matches!(outcome, BruteForceOutcome::Reducible(c) if c.len() <= reducible_len)
                } else {
                    matches!(outcome, BruteForceOutcome::AllIrreducibleUpTo(_))
                }
            }
            None => false,
        },
    }
}

fn cmd_test(file: &str, oracle_depth: Option<usize>) -> Result<ExitCode, String> {
    let text = std::fs::read_to_string(file).map_err(|e| format!("{file}: {e}"))?;
    let (inst, diags) = parse_poly_set(&text).map_err(|e| e.to_string())?;
    for d in &diags {
        eprintln!("warning: {d}");
    }
    let report = closure_test(&inst).map_err(|e| e.to_string())?;
    let mut out = report.to_json(&inst.ctx);
    if let Some(depth) = oracle_depth {
        let outcome = brute_force_check(&inst, depth).map_err(|e| e.to_string())?;
        let consistent = oracle_consistent(&report, &outcome, depth);
        out["oracle"] = json!({
            "depth": depth,
            "outcome": match &outcome {
                BruteForceOutcome::AllIrreducibleUpTo(n) =>
                    json!({"all_irreducible_up_to": n}),
                BruteForceOutcome::Reducible(chain) => json!({"reducible_chain": chain}),
            },
            "consistent": consistent,
        });
        if !consistent {
            println!("{}", serde_json::to_string_pretty(&out).unwrap());
            return Err("closure verdict disagrees with the brute-force oracle".into());
        }
    }
    println!("{}", serde_json::to_string_pretty(&out).unwrap());
    Ok(if report.is_di() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn cmd_single(file: &str) -> Result<ExitCode, String> {
    let text = std::fs::read_to_string(file).map_err(|e| format!("{file}: {e}"))?;
    let (inst, _) = parse_poly_set(&text).map_err(|e| e.to_string())?;
    if inst.r() != 1 {
        return Err(format!(
            "single expects exactly one polynomial, found {}",
            inst.r()
        ));
    }
    let report = single_test(&inst.ctx, &inst.polys[0]).map_err(|e| e.to_string())?;
    println!(
        "{}",
        serde_json::to_string_pretty(&report.to_json(&inst.ctx)).unwrap()
    );
    Ok(if report.is_di() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn cmd_search_max(p: u64, d: usize, nodes: u64, secs: f64) -> Result<ExitCode, String> {
    let ctx = FieldCtx::with_default_modulus(p, d).map_err(|e| e.to_string())?;
    let report = max_di_search(
        &ctx,
        SearchLimits {
            max_nodes: nodes,
            max_secs: secs,
        },
    )
    .map_err(|e| e.to_string())?;
    println!(
        "{}",
        serde_json::to_string_pretty(&report.to_json(&ctx)).unwrap()
    );
    Ok(if report.complete {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    })
}

fn verify_and_emit(inst: &DISetInstance, extra: serde_json::Value) -> Result<ExitCode, String> {
    let report = closure_test(inst).map_err(|e| e.to_string())?;
    print!("{}", emit_poly_set(inst));
    let mut verification = report.to_json(&inst.ctx);
    if let serde_json::Value::Object(extra_map) = extra {
        for (k, v) in extra_map {
            verification[k] = v;
        }
    }
    eprintln!("{}", serde_json::to_string_pretty(&verification).unwrap());
    Ok(if report.is_di() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn cmd_construct(family: &ConstructCmd) -> Result<ExitCode, String> {
    match family {
        ConstructCmd::Theorem1 { p, h, relax } => {
            let as_ctx = build_artin_schreier(*p, *h, *relax).map_err(|e| e.to_string())?;
            let inst = theorem1_family(&as_ctx);
            verify_and_emit(
                &inst,
                json!({
                    "construction": "theorem1",
                    "h": as_ctx.h,
                    "outside_hypotheses": as_ctx.outside_hypotheses,
                }),
            )
        }
        ConstructCmd::Pair { p, d } => {
            let ctx = FieldCtx::with_default_modulus(*p, *d).map_err(|e| e.to_string())?;
            let inst = pair_family(&ctx).map_err(|e| e.to_string())?;
            verify_and_emit(&inst, json!({"construction": "pair"}))
        }
        ConstructCmd::Single { p, d } => {
            let ctx = FieldCtx::with_default_modulus(*p, *d).map_err(|e| e.to_string())?;
            let f = single_family(&ctx).map_err(|e| e.to_string())?;
            let report = single_test(&ctx, &f).map_err(|e| e.to_string())?;
            let inst = DISetInstance::new(ctx.clone(), vec![f]).map_err(|e| e.to_string())?;
            print!("{}", emit_poly_set(&inst));
            let mut verification = report.to_json(&ctx);
            verification["construction"] = json!("single");
            eprintln!("{}", serde_json::to_string_pretty(&verification).unwrap());
            Ok(if report.is_di() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
    }
}

fn cmd_charsum(p: u64, e: usize, jobs: usize) -> Result<ExitCode, String> {
    let (ctx, report) = charsum_find_alpha(p, e, jobs).map_err(|e| e.to_string())?;
    println!(
        "{}",
        serde_json::to_string_pretty(&report.to_json(&ctx)).unwrap()
    );
    if !report.weil_ok {
        return Err("character sum fell below the Weil floor".into());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_bench(
    p: u64,
    d: usize,
    trials: u64,
    seed: u64,
    oracle_depth: Option<usize>,
) -> Result<ExitCode, String> {
    let ctx = FieldCtx::with_default_modulus(p, d).map_err(|e| e.to_string())?;
    let universe = enumerate_irreducible_quads(&ctx);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    println!("q,r,trial,verdict,sq_tests,insertions,rounds,closure_ns,oracle_depth,oracle_ns");
    for trial in 0..trials {
        for r in [2usize, 3] {
            if universe.len() < r {
                continue;
            }
            let picks = sample(&mut rng, universe.len(), r);
            let polys: Vec<MonicQuad> = picks.iter().map(|i| universe[i].clone()).collect();
            let inst = DISetInstance::new(ctx.clone(), polys).map_err(|e| e.to_string())?;
            let started = Instant::now();
            let report = closure_test(&inst).map_err(|e| e.to_string())?;
            let closure_ns = started.elapsed().as_nanos();
            let (od, ons) = match oracle_depth {
                Some(depth) => {
                    let t = Instant::now();
                    brute_force_check(&inst, depth).map_err(|e| e.to_string())?;
                    (depth.to_string(), t.elapsed().as_nanos().to_string())
                }
                None => (String::new(), String::new()),
            };
            println!(
                "{},{},{},{},{},{},{},{},{},{}",
                ctx.q(),
                r,
                trial,
                if report.is_di() { "DI" } else { "NotDI" },
                report.stats.sq_tests,
                report.stats.insertions,
                report.stats.rounds,
                closure_ns,
                od,
                ons
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.cmd {
        Cmd::Test { file, oracle_depth } => cmd_test(file, *oracle_depth),
        Cmd::Single { file } => cmd_single(file),
        Cmd::SearchMax {
            p,
            d,
            budget_nodes,
            budget_secs,
        } => cmd_search_max(*p, *d, *budget_nodes, *budget_secs),
        Cmd::Construct { family } => cmd_construct(family),
        Cmd::Charsum { p, e } => cmd_charsum(*p, *e, cli.jobs),
        Cmd::Bench {
            p,
            d,
            trials,
            seed,
            oracle_depth,
        } => cmd_bench(*p, *d, *trials, *seed, *oracle_depth),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
