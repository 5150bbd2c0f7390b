//! `pdp`: generate, solve and benchmark point decomposition instances.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use pdp_core::analysis::{cost_csv, first_fall_bound, system_bound, CostModel};
use pdp_core::harness::{bench_csv, bench_json, brute_force_pdp, run_bench, BenchCell};
use pdp_core::solver::{solve, to_cnf, Backend, SolveConfig, SolveStatus, DEFAULT_MEMORY_LIMIT};
use pdp_core::systems::{generate_instance, n_prime_for, InstanceMode, PdpInstance, SystemVariant, VariantKind};
use pdp_core::{CurveParams, Exec, FieldContext};

#[global_allocator]
static ALLOC: pdp_core::alloc::CountingAlloc = pdp_core::alloc::CountingAlloc;

const EXIT_NO_SOLUTION: u8 = 2;
const EXIT_TIMEOUT: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "pdp", version, about = "Point decomposition on binary elliptic curves")]
struct Cli {
    /// Print errors as JSON objects.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance file.
    Gen {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Descend and solve an instance; prints a JSON report.
    Solve {
        #[command(flatten)]
        inst: InstanceArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Stop at the first boolean solution instead of enumerating the
        /// variety; it may not decode to a decomposition.
        #[arg(long)]
        first: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Brute-force every decomposition of an instance.
    Oracle {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a grid of planted instances and write CSV and JSON.
    Bench {
        /// Field degrees: comma-separated values or ranges like `11-13`.
        #[arg(long, value_parser = parse_list)]
        n: Vec<Vec<u32>>,
        #[arg(long, value_delimiter = ',', default_value = "3")]
        m: Vec<usize>,
        /// `n - m n'`; defaults to `n mod m`.
        #[arg(long)]
        delta: Option<usize>,
        #[arg(long, value_delimiter = ',', default_value = "split2")]
        variant: Vec<VariantKind>,
        #[arg(long, value_delimiter = ',', default_value = "groebner")]
        backend: Vec<Backend>,
        #[arg(long)]
        degree_cap: Option<u32>,
        #[arg(long)]
        partial_merge: bool,
        #[arg(long, default_value_t = 5)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Per-trial timeout in seconds.
        #[arg(long)]
        timeout: Option<f64>,
        /// Worker threads for grid cells.
        #[arg(long)]
        jobs: Option<usize>,
        /// Output prefix; writes `<out>.csv` and `<out>.json`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the descended system as DIMACS CNF.
    ExportCnf {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long, default_value = "split2")]
        variant: VariantKind,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the descended system in ANF.
    ExportAnf {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long, default_value = "split2")]
        variant: VariantKind,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Index-calculus cost estimates for m = 5.
    Cost {
        #[arg(long, value_parser = parse_list, required = true)]
        n: Vec<Vec<u32>>,
        #[arg(long, default_value_t = 5)]
        m: usize,
        /// `s4` (two-equation split, D = 9) or `s5` (all-S3 system, D = 4).
        #[arg(long, default_value = "s4")]
        model: String,
        /// Write the exact estimates as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// First-fall-degree certificates for a system variant.
    Firstfall {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long, default_value = "split2")]
        variant: VariantKind,
    },
}

#[derive(Args, Clone)]
struct InstanceArgs {
    /// Read the instance from a file instead of generating one.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long, default_value_t = 11)]
    n: u32,
    #[arg(long, default_value_t = 3)]
    m: usize,
    /// Factor-base dimension; defaults to floor(n / m).
    #[arg(long)]
    nprime: Option<usize>,
    /// Sets n' = (n - delta) / m.
    #[arg(long, conflicts_with = "nprime")]
    delta: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "planted")]
    mode: InstanceMode,
}

#[derive(Args, Clone)]
struct SolverArgs {
    #[arg(long, default_value = "split2")]
    variant: VariantKind,
    #[arg(long, default_value = "groebner")]
    backend: Backend,
    #[arg(long)]
    degree_cap: Option<u32>,
    #[arg(long)]
    partial_merge: bool,
    /// Seconds.
    #[arg(long)]
    timeout: Option<f64>,
    /// Per-step memory budget in MiB for the Groebner backend.
    #[arg(long, default_value_t = DEFAULT_MEMORY_LIMIT >> 20)]
    memory_limit: u64,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl ToString) -> Self {
        Self { code: EXIT_USAGE, message: message.to_string() }
    }

    fn runtime(message: impl ToString) -> Self {
        Self { code: 1, message: message.to_string() }
    }
}

type Outcome = Result<u8, Failure>;

fn parse_list(s: &str) -> Result<Vec<u32>, String> {
    let mut out = Vec::new();
    for part in s.split(',').filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let a: u32 = a.trim().parse().map_err(|e| format!("{part}: {e}"))?;
                let b: u32 = b.trim().parse().map_err(|e| format!("{part}: {e}"))?;
                if a > b {
                    return Err(format!("empty range {part}"));
                }
                out.extend(a..=b);
            }
            None => out.push(part.trim().parse().map_err(|e| format!("{part}: {e}"))?),
        }
    }
    Ok(out)
}

fn load_instance(args: &InstanceArgs) -> Result<PdpInstance, Failure> {
    if let Some(path) = &args.instance {
        let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        return PdpInstance::parse(&text).map_err(Failure::usage);
    }
    let ctx = FieldContext::new(args.n, None).map_err(Failure::usage)?;
    let n_prime = match args.nprime {
        Some(np) => np,
        None => n_prime_for(args.n as usize, args.m, args.delta).map_err(Failure::usage)?,
    };
    let curve = CurveParams::random(ctx, args.seed);
    generate_instance(&curve, args.m, n_prime, args.mode, args.seed).map_err(Failure::usage)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::runtime(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn build_variant(kind: VariantKind, inst: &PdpInstance) -> Result<SystemVariant, Failure> {
    SystemVariant::build(kind, inst).map_err(Failure::usage)
}

fn cmd_solve(inst: &InstanceArgs, s: &SolverArgs, first: bool, out: &Option<PathBuf>) -> Outcome {
    let instance = load_instance(inst)?;
    let variant = build_variant(s.variant, &instance)?;
    let sys = variant.descend(&instance, Exec::default()).map_err(Failure::runtime)?;
    let cfg = SolveConfig {
        backend: s.backend,
        degree_cap: s.degree_cap,
        partial_merge: s.partial_merge,
        timeout: s.timeout.map(Duration::from_secs_f64),
        enumerate_all: !first,
        fb_vars: Some(variant.fb_bits()),
        memory_limit: Some(s.memory_limit << 20),
        ..SolveConfig::default()
    };
    let report = solve(&sys, &cfg).map_err(Failure::runtime)?;
    let decompositions: Vec<Vec<String>> = report
        .solutions
        .iter()
        .filter_map(|a| variant.decode(&instance, a))
        .map(|pts| pts.iter().map(|p| p.to_string()).collect())
        .collect();
    let value = json!({
        "n": instance.curve.field().degree(),
        "m": instance.m,
        "n_prime": instance.n_prime,
        "variant": variant.kind(),
        "equations": sys.equations().len(),
        "report": report,
        "decompositions": decompositions,
    });
    emit(out, &format!("{}\n", serde_json::to_string_pretty(&value).expect("report serializes")))?;
    Ok(match report.status {
        SolveStatus::Solved if !decompositions.is_empty() => 0,
        SolveStatus::Timeout => EXIT_TIMEOUT,
        _ => EXIT_NO_SOLUTION,
    })
}

fn cmd_oracle(inst: &InstanceArgs, out: &Option<PathBuf>) -> Outcome {
    let instance = load_instance(inst)?;
    let found = brute_force_pdp(&instance, Exec::default()).map_err(Failure::usage)?;
    let list: Vec<Vec<String>> = found.iter().map(|d| d.iter().map(|p| p.to_string()).collect()).collect();
    let value = json!({ "target": instance.target.to_string(), "count": list.len(), "decompositions": list });
    emit(out, &format!("{}\n", serde_json::to_string_pretty(&value).expect("serializes")))?;
    Ok(if list.is_empty() { EXIT_NO_SOLUTION } else { 0 })
}

#[allow(clippy::too_many_arguments)]
fn cmd_bench(
    ns: &[Vec<u32>],
    ms: &[usize],
    delta: Option<usize>,
    variants: &[VariantKind],
    backends: &[Backend],
    degree_cap: Option<u32>,
    partial_merge: bool,
    trials: usize,
    seed: u64,
    timeout: Option<f64>,
    jobs: Option<usize>,
    out: &Option<PathBuf>,
) -> Outcome {
    if trials == 0 {
        return Err(Failure::usage("--trials must be at least 1"));
    }
    let mut cells = Vec::new();
    for &n in ns.iter().flatten() {
        for &m in ms {
            let n_prime = n_prime_for(n as usize, m, delta).map_err(Failure::usage)?;
            for &variant in variants {
                for &backend in backends {
                    cells.push(BenchCell {
                        n,
                        m,
                        n_prime,
                        variant,
                        backend,
                        degree_cap,
                        partial_merge,
                        timeout_s: timeout,
                    });
                }
            }
        }
    }
    if cells.is_empty() {
        return Err(Failure::usage("empty grid: give --n"));
    }
    let rows = run_bench(&cells, trials, seed, jobs, Exec::default());
    let csv = bench_csv(&rows).map_err(Failure::runtime)?;
    let json = serde_json::to_string_pretty(&bench_json(&rows)).expect("serializes") + "\n";
    match out {
        Some(prefix) => {
            let with = |ext: &str| {
                let mut p = prefix.clone().into_os_string();
                p.push(ext);
                PathBuf::from(p)
            };
            emit(&Some(with(".csv")), &csv)?;
            emit(&Some(with(".json")), &json)?;
        }
        None => emit(&None, &csv)?,
    }
    Ok(0)
}

fn cmd_export(inst: &InstanceArgs, variant: VariantKind, cnf: bool, out: &Option<PathBuf>) -> Outcome {
    let instance = load_instance(inst)?;
    let v = build_variant(variant, &instance)?;
    let sys = v.descend(&instance, Exec::default()).map_err(Failure::runtime)?;
    let text = if cnf { to_cnf(&sys).to_dimacs() } else { sys.to_anf() };
    emit(out, &text)?;
    Ok(0)
}

fn cmd_cost(ns: &[Vec<u32>], m: usize, model: &str, json_out: bool, out: &Option<PathBuf>) -> Outcome {
    if m != 5 {
        return Err(Failure::usage("the cost models are defined for m = 5"));
    }
    let model = match model {
        "s4" => CostModel::Split5,
        "s5" => CostModel::FullSplit5,
        other => return Err(Failure::usage(format!("unknown model {other:?}; expected s4 or s5"))),
    };
    let ns: Vec<u32> = ns.iter().flatten().copied().collect();
    let rows: Vec<_> = ns.iter().map(|&n| (n, model.approx_log2(n as f64), model.exact(n))).collect();
    let crossover = model.crossover(2000);
    if let Some(path) = out {
        let label = if model == CostModel::Split5 { "s4" } else { "s5" };
        let csv = cost_csv(&rows.iter().map(|(_, _, e)| (label.to_string(), e.clone())).collect::<Vec<_>>())
            .map_err(Failure::runtime)?;
        emit(&Some(path.clone()), &csv)?;
    }
    if json_out {
        let list: Vec<_> = rows
            .iter()
            .map(|(n, approx, exact)| json!({ "n": n, "approx_total_log2": approx, "exact": exact }))
            .collect();
        println!(
            "{}",
            serde_json::to_string_pretty(&json!({ "crossover_n": crossover, "rows": list })).expect("serializes")
        );
    } else {
        println!(
            "model D={} N~{}n  crossover with 2^(n/2): n = {}",
            model.d_reg(),
            model.nvars_per_n(),
            crossover.map_or("none".into(), |c| c.to_string())
        );
        for (n, approx, exact) in &rows {
            println!("n={n} total~2^{approx:.1} (exact 2^{:.1}, generic 2^{:.1})", exact.total_log2, *n as f64 / 2.0);
        }
    }
    Ok(0)
}

fn cmd_firstfall(inst: &InstanceArgs, variant: VariantKind, json_out: bool) -> Outcome {
    let instance = load_instance(inst)?;
    let v = build_variant(variant, &instance)?;
    let certs = first_fall_bound(&v, &instance).map_err(Failure::runtime)?;
    let bound = system_bound(&certs);
    if json_out {
        println!(
            "{}",
            serde_json::to_string_pretty(&json!({ "certificates": certs, "bound": bound })).expect("serializes")
        );
    } else {
        for c in &certs {
            println!("{c}");
        }
        println!("bound {}", bound.map_or("none".into(), |b| b.to_string()));
    }
    Ok(0)
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Gen { inst, out } => {
            let instance = load_instance(inst)?;
            emit(out, &instance.to_text())?;
            Ok(0)
        }
        Command::Solve { inst, solver, first, out } => cmd_solve(inst, solver, *first, out),
        Command::Oracle { inst, out } => cmd_oracle(inst, out),
        Command::Bench {
            n,
            m,
            delta,
            variant,
            backend,
            degree_cap,
            partial_merge,
            trials,
            seed,
            timeout,
            jobs,
            out,
        } => {
            cmd_bench(n, m, *delta, variant, backend, *degree_cap, *partial_merge, *trials, *seed, *timeout, *jobs, out)
        }
        Command::ExportCnf { inst, variant, out } => cmd_export(inst, *variant, true, out),
        Command::ExportAnf { inst, variant, out } => cmd_export(inst, *variant, false, out),
        Command::Cost { n, m, model, out } => cmd_cost(n, *m, model, cli.json, out),
        Command::Firstfall { inst, variant } => cmd_firstfall(inst, *variant, cli.json),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            if std::env::args().any(|a| a == "--json") {
                eprintln!(
                    "{}",
                    json!({ "error": e.kind().to_string(), "message": e.to_string().trim(), "exit_code": EXIT_USAGE })
                );
            } else {
                let _ = e.print();
            }
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            if cli.json {
                eprintln!("{}", json!({ "error": f.message, "exit_code": f.code }));
            } else {
                eprintln!("error: {}", f.message);
            }
            ExitCode::from(f.code)
        }
    }
}
