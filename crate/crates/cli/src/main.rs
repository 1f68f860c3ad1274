use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use persistency::io::{
    generate, parse_uai, rows_to_csv, run_sweep, write_uai, GeneratorKind, InstanceSpec, RunReport,
    SweepSpec, ValueKind, Verification,
};
use persistency::oracle::GroundTruth;
use persistency::solvers::{
    solve, solve_bruteforce, solve_lp_exact, StopRule, DEFAULT_ENUMERATION_CAP,
};
use persistency::{prune, Error, GraphicalModel, Mode, SolverConfig, SolverKind};

const EXIT_USAGE: u8 = 1;
const EXIT_SOLVER: u8 = 2;
const EXIT_VERIFY: u8 = 3;

#[derive(Parser)]
#[command(
    name = "persistency",
    version,
    about = "Partial optimality for discrete energy minimization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a UAI model and print the value and per-node labels.
    Solve {
        model: PathBuf,
        #[arg(long, default_value = "trws")]
        solver: SolverKind,
        /// Also print LP node marginals (lp only).
        #[arg(long)]
        marginals: bool,
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        solver_opts: SolverOpts,
    },
    /// Find a persistent partial labeling and write a JSON report.
    Prune {
        model: PathBuf,
        #[arg(long, default_value = "trws")]
        solver: SolverKind,
        #[arg(long, default_value = "original")]
        mode: Mode,
        /// Report path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Check the result against the exhaustive oracle and store the verdict.
        #[arg(long)]
        verify: bool,
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        solver_opts: SolverOpts,
    },
    /// Re-check a report against the exhaustive oracle.
    Verify {
        report: PathBuf,
        model: PathBuf,
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        cap: f64,
    },
    /// Write a generated instance as UAI.
    Gen {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Prune a seeded series of generated instances and print CSV.
    Bench {
        #[command(flatten)]
        spec: SpecArgs,
        /// Number of instances; instance i uses seed + i.
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value = "trws")]
        solver: SolverKind,
        #[arg(long, default_value = "original")]
        mode: Mode,
        /// Append a wall-time column.
        #[arg(long)]
        timing: bool,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        threads: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        solver_opts: SolverOpts,
    },
}

#[derive(Args)]
struct Input {
    /// How UAI table entries are read.
    #[arg(long, default_value = "cost", value_parser = parse_values)]
    values: ValueKind,
}

#[derive(Args)]
struct SolverOpts {
    /// Energy comparison tolerance.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// TRWS pass limit.
    #[arg(long, default_value_t = StopRule::default().max_passes)]
    max_iters: usize,
    /// TRWS relative primal-dual gap.
    #[arg(long, default_value_t = StopRule::default().gap)]
    gap: f64,
    /// TRWS passes without new commitments before stopping.
    #[arg(long, default_value_t = StopRule::default().stall)]
    stall: usize,
    /// Largest state space the brute-force solver enumerates.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    cap: f64,
}

impl SolverOpts {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            tol: self.tol,
            bruteforce_cap: self.cap,
            stop: StopRule {
                gap: self.gap,
                stall: self.stall,
                max_passes: self.max_iters,
            },
            ..SolverConfig::default()
        }
    }
}

#[derive(Args)]
struct SpecArgs {
    #[arg(long = "gen", default_value = "potts-grid")]
    kind: GeneratorKind,
    /// Grid size as HxW.
    #[arg(long, default_value = "4x4", value_parser = parse_hw)]
    hw: (usize, usize),
    /// Node count for the non-grid generators.
    #[arg(long, default_value_t = 6)]
    nodes: usize,
    #[arg(long, default_value_t = 2)]
    labels: usize,
    /// Draw per-node label counts from labels..=labels-max.
    #[arg(long)]
    labels_max: Option<usize>,
    /// Pairwise strength as LO,HI or a single value.
    #[arg(long, default_value = "0,1", value_parser = parse_range)]
    coupling: (f64, f64),
    /// Unary range as LO,HI or a single value.
    #[arg(long, default_value = "0,1", value_parser = parse_range)]
    noise: (f64, f64),
    #[arg(long, default_value_t = 0.5)]
    edge_prob: f64,
    #[arg(long, default_value_t = 1)]
    hyperedges: usize,
    /// Round drawn values to integers.
    #[arg(long)]
    integer: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SpecArgs {
    fn spec(&self) -> InstanceSpec {
        InstanceSpec {
            kind: self.kind,
            height: self.hw.0,
            width: self.hw.1,
            nodes: self.nodes,
            labels: self.labels,
            labels_max: self.labels_max,
            coupling: self.coupling,
            noise: self.noise,
            edge_prob: self.edge_prob,
            hyperedges: self.hyperedges,
            integer: self.integer,
            seed: self.seed,
        }
    }
}

fn parse_values(s: &str) -> Result<ValueKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_hw(s: &str) -> Result<(usize, usize), String> {
    let (h, w) = s.split_once(['x', 'X']).ok_or("expected HxW")?;
    Ok((
        h.trim().parse().map_err(|_| format!("bad height '{h}'"))?,
        w.trim().parse().map_err(|_| format!("bad width '{w}'"))?,
    ))
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| format!("bad number '{t}'"))
    };
    match s.split_once(',') {
        Some((lo, hi)) => Ok((num(lo)?, num(hi)?)),
        None => num(s).map(|v| (v, v)),
    }
}

/// Error with its exit code.
struct Failure(u8, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Solver(_) | Error::CapExceeded { .. } | Error::UnsupportedArity { .. } => {
                EXIT_SOLVER
            }
            _ => EXIT_USAGE,
        };
        Failure(code, e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure(EXIT_USAGE, format!("{}: {e}", path.display())))
}

fn load_model(path: &Path, input: &Input) -> Result<GraphicalModel, Failure> {
    parse_uai(&read(path)?, input.values)
        .map_err(|e| Failure(EXIT_USAGE, format!("{}: {e}", path.display())))
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(p) => {
            fs::write(p, text).map_err(|e| Failure(EXIT_USAGE, format!("{}: {e}", p.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn verification(
    model: &GraphicalModel,
    report: &RunReport,
    cap: f64,
) -> Result<Verification, Failure> {
    let truth = GroundTruth::compute(model, cap)?;
    Ok(Verification {
        persistent: truth.persistent(&report.x_star).verdict,
        strongly_persistent: truth.strongly_persistent(&report.x_star).verdict,
        num_optima: truth.optima.len(),
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Solve {
            model,
            solver,
            marginals,
            input,
            solver_opts,
        } => {
            let m = load_model(&model, &input)?;
            let cfg = solver_opts.config();
            if solver == SolverKind::ExactLp && marginals {
                let r = solve_lp_exact(&m, &cfg)?;
                println!("value: {}", r.value);
                println!("labels: {}", r.output.render());
                for (v, mu) in r.marginals.nodes.iter().enumerate() {
                    let p: Vec<String> = mu.iter().map(|x| format!("{x:.6}")).collect();
                    println!("mu[{v}]: {}", p.join(" "));
                }
                return Ok(());
            }
            let out = solve(&m, solver, &cfg)?;
            match out.labeling() {
                Some(x) => println!("value: {}", m.energy(&x)?),
                None => println!("value: (incomplete)"),
            }
            println!("bound: {}", out.bound);
            println!("labels: {}", out.render());
            println!("iterations: {}", out.iterations);
            if solver == SolverKind::Bruteforce {
                let all = solve_bruteforce(&m, cfg.bruteforce_cap, cfg.tol)?;
                println!("optima: {}", all.optima.len());
            }
            Ok(())
        }
        Command::Prune {
            model,
            solver,
            mode,
            out,
            verify,
            input,
            solver_opts,
        } => {
            let m = load_model(&model, &input)?;
            let cfg = solver_opts.config();
            let start = Instant::now();
            let result = prune(&m, solver, mode, &cfg)?;
            let ms = start.elapsed().as_secs_f64() * 1e3;
            let id = model
                .file_stem()
                .map_or_else(String::new, |s| s.to_string_lossy().into_owned());
            let mut report = RunReport::new(&id, &m, &result, ms);
            if verify {
                report.verification = Some(verification(&m, &report, cfg.bruteforce_cap)?);
            }
            let json = serde_json::to_string_pretty(&report)
                .map_err(|e| Failure(EXIT_USAGE, e.to_string()))?;
            emit(&(json + "\n"), out.as_deref())?;
            if out.is_some() {
                eprintln!(
                    "|A*| = {} of {}, percentage {:.4}, {} iterations",
                    report.a_star_size, report.num_nodes, report.percentage, report.iterations
                );
            }
            match report.verification {
                Some(v) if !v.persistent => {
                    Err(Failure(EXIT_VERIFY, "result is not persistent".into()))
                }
                _ => Ok(()),
            }
        }
        Command::Verify {
            report,
            model,
            input,
            cap,
        } => {
            let r: RunReport = serde_json::from_str(&read(&report)?)
                .map_err(|e| Failure(EXIT_USAGE, format!("{}: {e}", report.display())))?;
            let m = load_model(&model, &input)?;
            if r.num_nodes != m.num_nodes() {
                return Err(Failure(
                    EXIT_USAGE,
                    format!(
                        "report has {} nodes, model has {}",
                        r.num_nodes,
                        m.num_nodes()
                    ),
                ));
            }
            m.validate_partial(&r.x_star)?;
            let v = verification(&m, &r, cap)?;
            println!("persistent: {}", v.persistent);
            println!("strongly persistent: {}", v.strongly_persistent);
            println!("optima: {}", v.num_optima);
            if v.persistent {
                Ok(())
            } else {
                Err(Failure(EXIT_VERIFY, "verification failed".into()))
            }
        }
        Command::Gen { spec, out } => {
            let m = generate(&spec.spec())?;
            emit(&write_uai(&m), out.as_deref())
        }
        Command::Bench {
            spec,
            n,
            solver,
            mode,
            timing,
            threads,
            out,
            solver_opts,
        } => {
            let sweep = SweepSpec {
                base: spec.spec(),
                count: n,
                solver,
                mode,
                config: solver_opts.config(),
            };
            sweep.base.validate()?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Failure(EXIT_USAGE, e.to_string()))?;
            let rows = pool.install(|| run_sweep(&sweep))?;
            emit(&rows_to_csv(&rows, timing), out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
