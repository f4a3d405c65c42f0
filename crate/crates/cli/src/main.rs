mod plot;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use misaka_core::graph::{scc_analyze, suggest_repair};
use misaka_core::session::{run_scenario, Engine, RunLength, ScenarioConfig, Session};
use misaka_core::trajectory_csv;
use misaka_service::ServiceConfig;

/// Consensus scenarios on a simulated tabletop swarm.
#[derive(Parser)]
#[command(name = "misaka", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario and write its trajectory CSV.
    Run(RunArgs),
    /// Re-run a scenario and compare it with a golden trajectory CSV.
    Verify(VerifyArgs),
    /// Report strongly connected components and suggested repair edges.
    Analyze {
        /// Built-in name or path to a scenario JSON file.
        #[arg(long)]
        scenario: String,
    },
    /// Serve a live session over WebSocket.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Scenario to load; without it the table starts empty.
        #[arg(long)]
        scenario: Option<String>,
        /// Milliseconds between iterations while running.
        #[arg(long, default_value_t = misaka_core::session::DEFAULT_INTERVAL_MS)]
        interval_ms: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Matrix,
    Lockstep,
    Async,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::Matrix => Engine::Matrix,
            EngineArg::Lockstep => Engine::MeshLockstep,
            EngineArg::Async => Engine::MeshAsync,
        }
    }
}

/// Overrides applied on top of a scenario.
#[derive(Args)]
struct ScenarioArgs {
    /// Built-in name or path to a scenario JSON file.
    #[arg(long)]
    scenario: String,
    #[arg(long, value_enum)]
    engine: Option<EngineArg>,
    #[arg(long)]
    seed: Option<u64>,
    /// Uniform per-message drop probability for the mesh engines.
    #[arg(long)]
    drop: Option<f64>,
}

impl ScenarioArgs {
    fn load(&self) -> Result<ScenarioConfig, String> {
        let mut cfg = ScenarioConfig::resolve(&self.scenario).map_err(|e| e.to_string())?;
        if let Some(e) = self.engine {
            cfg.engine = e.into();
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(p) = self.drop {
            cfg.links.drop = p;
        }
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Take exactly this many iterations.
    #[arg(long, conflicts_with = "until_converged", required_unless_present = "until_converged")]
    iterations: Option<usize>,
    /// Iterate until the spread is below tolerance (or the cap is hit).
    #[arg(long)]
    until_converged: bool,
    /// Trajectory CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also draw the trajectory as an SVG line chart.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long)]
    golden: PathBuf,
    /// Largest accepted absolute difference per value.
    #[arg(long, default_value_t = 5e-7)]
    tol: f64,
}

/// Exit status 1: the run disagrees with the golden data.
const MISMATCH: u8 = 1;
/// Exit status 2: bad input or a failure to carry out the request.
const FAILURE: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Cmd::Run(args) => run(args),
        Cmd::Verify(args) => verify(args),
        Cmd::Analyze { scenario } => analyze(&scenario),
        Cmd::Serve {
            port,
            scenario,
            interval_ms,
        } => serve(port, scenario.as_deref(), interval_ms),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(FAILURE)
        }
    }
}

fn run(args: RunArgs) -> Result<u8, String> {
    let cfg = args.scenario.load()?;
    let length = match args.iterations {
        Some(k) => RunLength::Iterations(k),
        None => RunLength::UntilConverged,
    };
    let t = run_scenario(&cfg, length).map_err(|e| e.to_string())?;
    let csv = trajectory_csv::write_trajectory(&t);
    let verdict = format!(
        "{}: {} iterations, {} (spread {:.3e})\nfinal: [{}]",
        cfg.name,
        t.iterations_run(),
        if t.converged { "converged" } else { "not converged" },
        t.final_spread(),
        t.last().values().iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>().join(", ")
    );
    match &args.out {
        Some(path) => {
            std::fs::write(path, &csv).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
            println!("{verdict}");
        }
        None => {
            print!("{csv}");
            eprintln!("{verdict}");
        }
    }
    if let Some(path) = &args.plot {
        std::fs::write(path, plot::trajectory_svg(&t, &cfg.name))
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    Ok(0)
}

fn verify(args: VerifyArgs) -> Result<u8, String> {
    if !(args.tol >= 0.0) {
        return Err(format!("tolerance {} must be nonnegative", args.tol));
    }
    let cfg = args.scenario.load()?;
    let text = std::fs::read_to_string(&args.golden).map_err(|e| format!("{}: {e}", args.golden.display()))?;
    let golden = trajectory_csv::read_rows(&text).map_err(|e| format!("{}: {e}", args.golden.display()))?;
    let n = cfg.initial_values.len();
    let width = golden[0].len();
    if width != n {
        println!("shape mismatch: golden has {width} node columns, scenario {} has {n} nodes", cfg.name);
        return Ok(MISMATCH);
    }
    let t = run_scenario(&cfg, RunLength::Iterations(golden.len() - 1)).map_err(|e| e.to_string())?;

    let mut report = String::new();
    let mut bad = 0usize;
    let mut worst = 0.0f64;
    for (k, (want, got)) in golden.iter().zip(&t.states).enumerate() {
        for (j, (w, g)) in want.iter().zip(got.values()).enumerate() {
            let delta = (w - g).abs();
            worst = worst.max(delta);
            if !(delta <= args.tol) {
                bad += 1;
                if bad <= 20 {
                    let _ = writeln!(
                        report,
                        "mismatch at iteration {k}, node_{}: golden {w}, run {g}, |diff| {delta:.3e}",
                        j + 1
                    );
                }
            }
        }
    }
    let cells = golden.len() * width;
    if bad == 0 {
        println!("ok: {cells} values within {:e} (max |diff| {worst:.3e})", args.tol);
        Ok(0)
    } else {
        print!("{report}");
        println!("FAILED: {bad} of {cells} values differ by more than {:e}", args.tol);
        Ok(MISMATCH)
    }
}

fn analyze(name: &str) -> Result<u8, String> {
    let cfg = ScenarioConfig::resolve(name).map_err(|e| e.to_string())?;
    let Some(g) = cfg.graph().map_err(|e| e.to_string())? else {
        println!("{}: no nodes", cfg.name);
        return Ok(0);
    };
    let report = scc_analyze(&g);
    let set = |nodes: &[usize]| {
        let labels: Vec<String> = nodes.iter().map(|v| (v + 1).to_string()).collect();
        format!("{{{}}}", labels.join(", "))
    };
    println!("scenario: {}", cfg.name);
    println!("nodes: {}", g.n());
    println!("strongly connected: {}", if report.is_strongly_connected { "yes" } else { "no" });
    println!("components: {}", report.component_count());
    for c in &report.components {
        println!("  {}", set(c));
    }
    let closed: Vec<String> = report.closed_members().into_iter().map(set).collect();
    println!("closed components: {}", closed.join(" "));
    let repair = suggest_repair(&g, &report);
    if repair.is_empty() {
        println!("suggested repair: none needed");
    } else {
        let edges: Vec<String> = repair.iter().map(|(i, j)| format!("{}->{}", i + 1, j + 1)).collect();
        println!("suggested repair: {}", edges.join(", "));
    }
    Ok(0)
}

fn serve(port: u16, scenario: Option<&str>, interval_ms: f64) -> Result<u8, String> {
    let session = match scenario {
        Some(name) => {
            let cfg = ScenarioConfig::resolve(name).map_err(|e| e.to_string())?;
            Session::new(cfg).map_err(|e| e.to_string())?
        }
        None => Session::empty(),
    };
    if !(interval_ms.is_finite() && interval_ms >= 0.0) {
        return Err(format!("interval {interval_ms} ms must be nonnegative"));
    }
    let config = ServiceConfig {
        interval_ms,
        ..ServiceConfig::default()
    };
    let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    rt.block_on(async {
        let listener = misaka_service::bind(port).await.map_err(|e| e.to_string())?;
        let port = listener.local_addr().map_err(|e| e.to_string())?.port();
        println!("serving {} on ws://localhost:{port}/ws", scenario.unwrap_or("an empty session"));
        misaka_service::serve(listener, session, config)
            .await
            .map_err(|e| e.to_string())
    })?;
    Ok(0)
}
