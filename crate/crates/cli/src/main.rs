use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use linecov::cost::WindModel;
use linecov::graph::validate_tour;
use linecov::io::{export_geojson, parse_instance, read_tour, write_instance, write_tour, TourFile};
use linecov::oracle::{brute_force_optimal, random_instance, GenCosts, GenParams, Profile};
use linecov::{solve, AtspMode, SolverConfig, StitchMode};
use log::{info, warn};
use rayon::prelude::*;

#[derive(Parser)]
#[command(name = "linecov", version, about = "Line coverage tours with asymmetric costs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance and write the tour.
    Solve {
        instance: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        /// Tour file to write; the tour is printed to stdout otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        geojson: Option<PathBuf>,
    },
    /// Check a tour file against an instance.
    Validate { instance: PathBuf, tour: PathBuf },
    /// Exact optimum by enumeration (at most 8 required edges).
    Oracle {
        instance: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a random instance.
    Gen(GenArgs),
    /// Solve every *.json instance in a directory and print a table.
    Bench {
        dir: PathBuf,
        #[arg(long, default_value_t = 1)]
        repeat: usize,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum AtspArg {
    Exact,
    Heuristic,
    Auto,
}

#[derive(Clone, Copy, ValueEnum)]
enum StitchArg {
    Atsp,
    Gtsp,
}

#[derive(clap::Args)]
struct SolverArgs {
    #[arg(long, value_enum, default_value_t = AtspArg::Auto)]
    atsp: AtspArg,
    #[arg(long, value_enum, default_value_t = StitchArg::Atsp)]
    stitch: StitchArg,
    #[arg(long = "no-2opt")]
    no_two_opt: bool,
    #[arg(long = "no-shortcircuit")]
    no_short_circuit: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = linecov::improve::DEFAULT_MOVE_CAP)]
    move_cap: usize,
    /// Largest ATSP solved exactly in auto mode.
    #[arg(long, default_value_t = 18)]
    dp_threshold: usize,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            atsp_mode: match self.atsp {
                AtspArg::Exact => AtspMode::ExactDp,
                AtspArg::Heuristic => AtspMode::Heuristic,
                AtspArg::Auto => AtspMode::Auto,
            },
            stitch_mode: match self.stitch {
                StitchArg::Atsp => StitchMode::Atsp,
                StitchArg::Gtsp => StitchMode::Gtsp,
            },
            short_circuit: !self.no_short_circuit,
            two_opt: !self.no_two_opt,
            two_opt_move_cap: self.move_cap,
            seed: self.seed,
            dp_threshold: self.dp_threshold,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    General,
    Connected,
    Eulerian,
}

#[derive(Clone, Copy, ValueEnum)]
enum CostArg {
    Wind,
    Euclidean,
    Random,
}

#[derive(clap::Args)]
struct GenArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ProfileArg::Connected)]
    profile: ProfileArg,
    /// Required pieces for the general profile.
    #[arg(long, default_value_t = 2)]
    components: usize,
    #[arg(long, default_value_t = 20)]
    vertices: usize,
    #[arg(long, default_value_t = 15)]
    required: usize,
    #[arg(long, default_value_t = 10)]
    extra: usize,
    #[arg(long, value_enum, default_value_t = CostArg::Wind)]
    cost: CostArg,
    #[arg(long, default_value_t = 7.0)]
    service_speed: f64,
    #[arg(long, default_value_t = 10.0)]
    deadhead_speed: f64,
    #[arg(long, default_value_t = 2.0)]
    wind_speed: f64,
    /// Radians from +x the wind blows toward.
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_4)]
    wind_direction: f64,
    /// Largest integer cost for `--cost random`.
    #[arg(long, default_value_t = 10)]
    max_cost: u32,
    /// Add a non-required edge between every unconnected vertex pair.
    #[arg(long)]
    complete: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl GenArgs {
    fn params(&self) -> GenParams {
        GenParams {
            vertices: self.vertices,
            required: self.required,
            extra: self.extra,
            costs: match self.cost {
                CostArg::Wind => GenCosts::Wind(WindModel {
                    service_speed: self.service_speed,
                    deadhead_speed: self.deadhead_speed,
                    wind_speed: self.wind_speed,
                    wind_direction: self.wind_direction,
                }),
                CostArg::Euclidean => GenCosts::Euclidean,
                CostArg::Random => GenCosts::RandomAsymmetric { max: self.max_cost },
            },
            profile: match self.profile {
                ProfileArg::General => Profile::General { components: self.components },
                ProfileArg::Connected => Profile::ConnectedRequired,
                ProfileArg::Eulerian => Profile::EulerianRequired,
            },
            complete_nonrequired: self.complete,
        }
    }
}

/// Exit status for a failed command.
fn exit_code(err: &anyhow::Error) -> u8 {
    use linecov::Error as E;
    match err.downcast_ref::<E>() {
        Some(E::Schema { .. } | E::Io(_) | E::InvalidInstance(_) | E::NoRequiredEdges) => 2,
        Some(E::DisconnectedInstance { .. } | E::CostInvariantViolated { .. } | E::WindTooStrong { .. }) => 2,
        Some(E::MissingCoordinates | E::UnsatisfiableProfile(_)) => 2,
        Some(E::Infeasible { .. } | E::InfeasibleFlow | E::Unreachable { .. }) => 3,
        Some(E::TooLarge { .. }) => 4,
        _ if err.downcast_ref::<std::io::Error>().is_some() => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Solve { instance, solver, out, geojson } => {
            let inst = load(&instance)?;
            let cfg = solver.config();
            let (tour, report) = solve(&inst, &cfg)?;
            info!("phases: {:?}", report.phases);
            let file = TourFile::new(&inst, &tour, Some(&report), Some(&cfg));
            match &out {
                Some(path) => {
                    write_tour(&file, path).with_context(|| format!("writing {}", path.display()))?;
                    println!(
                        "cost {:.6}  lower bound {:.6}  ratio {:.4}  components {}",
                        report.cost, report.lower_bound, report.ratio, report.components
                    );
                }
                None => println!("{}", file.to_json()),
            }
            if let Some(path) = geojson {
                export_geojson(&inst, &tour, &path)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { instance, tour } => {
            let inst = load(&instance)?;
            let file = read_tour(&tour).with_context(|| format!("reading {}", tour.display()))?;
            let tour = match file.to_tour(&inst) {
                Ok(t) => t,
                Err(e) => {
                    println!("invalid: {e}");
                    return Ok(ExitCode::from(1));
                }
            };
            let report = validate_tour(&inst, &tour);
            if report.is_valid() {
                println!("valid: cost {}", report.recomputed_cost);
                Ok(ExitCode::SUCCESS)
            } else {
                println!("{report}");
                Ok(ExitCode::from(1))
            }
        }
        Command::Oracle { instance, out } => {
            let inst = load(&instance)?;
            let (tour, cost) = brute_force_optimal(&inst)?;
            let file = TourFile::new(&inst, &tour, None, None);
            println!("optimal cost {cost}");
            match out {
                Some(path) => write_tour(&file, &path)?,
                None => println!("{}", file.to_json()),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Gen(args) => {
            let inst = random_instance(args.seed, &args.params())?;
            match &args.out {
                Some(path) => write_instance(&inst, path)?,
                None => println!("{}", linecov::io::instance_to_json(&inst)),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench { dir, repeat, solver } => {
            bench(&dir, repeat.max(1), &solver.config())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn load(path: &Path) -> Result<linecov::LineCoverageInstance> {
    parse_instance(path).with_context(|| format!("loading {}", path.display()))
}

fn bench(dir: &Path, repeat: usize, cfg: &SolverConfig) -> Result<()> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();

    let threads = std::env::var("LINECOV_THREADS").ok().and_then(|s| s.parse().ok()).unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
    let rows: Vec<String> = pool.install(|| {
        files
            .par_iter()
            .map(|path| {
                let name = path.file_name().unwrap_or_default().to_string_lossy().into_owned();
                match bench_one(path, repeat, cfg) {
                    Ok(row) => format!("{name:<32} {row}"),
                    Err(e) => {
                        warn!("{name}: {e:#}");
                        format!("{name:<32} error: {e}")
                    }
                }
            })
            .collect()
    });
    println!(
        "{:<32} {:>14} {:>14} {:>7} {:>3} {:>9} {:>9} {:>9} {:>9} {:>9}",
        "instance", "cost", "lower_bound", "ratio", "C", "lp_s", "resolve_s", "stitch_s", "improve_s", "total_s"
    );
    for row in rows {
        println!("{row}");
    }
    Ok(())
}

fn bench_one(path: &Path, repeat: usize, cfg: &SolverConfig) -> Result<String> {
    let inst = load(path)?;
    let mut best: Option<(f64, linecov::SolveReport)> = None;
    for _ in 0..repeat {
        let clock = Instant::now();
        let (_, report) = solve(&inst, cfg)?;
        let secs = clock.elapsed().as_secs_f64();
        if best.as_ref().is_none_or(|(b, _)| secs < *b) {
            best = Some((secs, report));
        }
    }
    let (secs, r) = best.expect("repeat is at least 1");
    let p = &r.phases;
    Ok(format!(
        "{:>14.4} {:>14.4} {:>7.4} {:>3} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>9.4}",
        r.cost, r.lower_bound, r.ratio, r.components, p.lp_seconds, p.resolve_seconds, p.stitch_seconds,
        p.improve_seconds, secs
    ))
}
