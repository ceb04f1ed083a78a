use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{error, info};
use rockcharge_core::dsl;
use rockcharge_gateway::config::{self, ServiceConfig};
use rockcharge_gateway::{run_script, GatewayError, Script, ServeOptions, Server, Service};

/// Run the rock-face charging mission service.
///
/// Every option can also be set through an environment variable with the
/// `ROCKCHARGE_` prefix, e.g. `ROCKCHARGE_TICK_RATE=50`.
#[derive(Parser, Debug)]
#[command(name = "rockcharge", version, args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Cmd>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Check `.tree.xml` files. Exit code 0 clean, 1 warnings, 2 errors.
    Lint {
        /// A directory of tree files, or a single file.
        path: PathBuf,
    },
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Scenario JSON; the built-in 20-hole demo face when omitted.
    #[arg(long, env = "ROCKCHARGE_SCENARIO")]
    scenario: Option<PathBuf>,
    /// Directory of `.tree.xml` files; the built-in trees when omitted.
    #[arg(long, env = "ROCKCHARGE_TREES")]
    trees: Option<PathBuf>,
    #[arg(long, env = "ROCKCHARGE_LISTEN", default_value = "127.0.0.1:7878")]
    listen: String,
    /// Ticks per second when serving; 0 runs unthrottled.
    #[arg(long, env = "ROCKCHARGE_TICK_RATE", default_value_t = 100.0)]
    tick_rate: f64,
    /// Override the scenario seed.
    #[arg(long, env = "ROCKCHARGE_SEED")]
    seed: Option<u64>,
    #[arg(long, env = "ROCKCHARGE_SNAPSHOT_DIR")]
    snapshot_dir: Option<PathBuf>,
    /// Ticks between periodic snapshots; 0 disables them.
    #[arg(long, env = "ROCKCHARGE_SNAPSHOT_EVERY", default_value_t = 100)]
    snapshot_every: u64,
    /// Replay a command script instead of listening.
    #[arg(long, env = "ROCKCHARGE_HEADLESS")]
    headless: Option<PathBuf>,
    /// Snapshot to start from: `latest` or a file name.
    #[arg(long, env = "ROCKCHARGE_RESUME")]
    resume: Option<String>,
    /// Headless: write every event as a JSON line here.
    #[arg(long, env = "ROCKCHARGE_EVENTS")]
    events: Option<PathBuf>,
    /// Headless: write the end-of-run summary here.
    #[arg(long, env = "ROCKCHARGE_SUMMARY")]
    summary: Option<PathBuf>,
    /// Abort the process right after this tick (restart testing).
    #[arg(long, env = "ROCKCHARGE_CRASH_AT_TICK", hide = true)]
    crash_at_tick: Option<u64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("ROCKCHARGE_LOG", "info")).init();
    let cli = Cli::parse();
    let code = match cli.command {
        Some(Cmd::Lint { path }) => lint(&path),
        None => match run(cli.run) {
            Ok(()) => 0,
            Err(e) => {
                error!("{e}");
                e.exit_code()
            }
        },
    };
    ExitCode::from(code as u8)
}

fn lint(path: &std::path::Path) -> i32 {
    let doc = if path.is_dir() {
        config::load_trees(Some(path))
    } else {
        std::fs::read_to_string(path)
            .map_err(GatewayError::from)
            .and_then(|text| dsl::parse(&text).map_err(|e| GatewayError::TreeLoad(e.to_string())))
    };
    match doc {
        Ok(doc) => {
            let diagnostics = dsl::validate(&doc);
            for d in &diagnostics {
                println!("{d}");
            }
            dsl::exit_code(&diagnostics)
        }
        Err(e) => {
            eprintln!("{e}");
            2
        }
    }
}

fn run(args: RunArgs) -> Result<(), GatewayError> {
    let mut scenario = match &args.scenario {
        Some(p) => config::load_scenario(p)?,
        None => config::demo_scenario(),
    };
    if let Some(seed) = args.seed {
        scenario.seed = seed;
    }
    let trees = config::load_trees(args.trees.as_deref())?;
    let mut cfg = ServiceConfig::new(scenario, trees);
    cfg.snapshot_dir = args.snapshot_dir.clone();
    cfg.snapshot_every = args.snapshot_every;
    let mut service = match &args.resume {
        Some(reference) => Service::resume(cfg, reference)?,
        None => Service::new(cfg)?,
    };
    match &args.headless {
        Some(path) => headless(&mut service, path, &args),
        None => {
            let server = Server::bind(&args.listen)?;
            let opts = ServeOptions { tick_rate: args.tick_rate, ..ServeOptions::default() };
            server.serve(service, opts)
        }
    }
}

fn headless(service: &mut Service, path: &std::path::Path, args: &RunArgs) -> Result<(), GatewayError> {
    let text = std::fs::read_to_string(path).map_err(|e| GatewayError::Script(format!("{}: {e}", path.display())))?;
    let script = Script::from_json(&text)?;
    let mut log = match &args.events {
        Some(p) => Some(BufWriter::new(File::create(p)?)),
        None => None,
    };
    let mut sink = |e: &rockcharge_gateway::EventMsg| -> Result<(), GatewayError> {
        if let Some(w) = log.as_mut() {
            writeln!(w, "{}", e.to_line())?;
        }
        Ok(())
    };
    let crash = args.crash_at_tick;
    let mut after_tick = |s: &Service| {
        if crash == Some(s.orchestrator().ticks()) {
            std::process::abort();
        }
    };
    let result = run_script(service, &script, &mut sink, &mut after_tick);
    if let Some(mut w) = log {
        w.flush()?;
    }
    result?;
    let summary = service.summary();
    info!(
        "finished in {:?} after {} ticks; {} holes charged",
        summary.phase,
        summary.ticks,
        service.orchestrator().rig().site.count(rockcharge_mission::HoleState::Charged)
    );
    if let Some(p) = &args.summary {
        std::fs::write(p, serde_json::to_string_pretty(&summary).expect("summary serializes"))?;
    }
    Ok(())
}
