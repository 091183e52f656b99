use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use cognitrace::session::{
    analyze_dir, heatmap_dir, record_headless, session_id, write_heatmap, EventScript, ReplayOptions, SessionConfig,
    SessionError, METRICS_CSV,
};
use cognitrace::stream::net::{ServerConfig, SimulatorServer, DEFAULT_DISCOVERY_PORT};
use cognitrace::stream::SourceRegistry;
use cognitrace::workflow::load_workflow;
use cognitrace_service::{ServeOptions, Service};

#[derive(Parser)]
#[command(name = "cognitrace", version, about = "Record and analyze code-reading sessions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a session config or a bare workflow file.
    Validate {
        #[arg(long, conflicts_with = "workflow", required_unless_present = "workflow")]
        config: Option<PathBuf>,
        #[arg(long)]
        workflow: Option<PathBuf>,
        /// Also check an event script against the phase plan.
        #[arg(long, requires = "config")]
        events: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run simulated devices that announce themselves for discovery.
    Simulate {
        /// Device set to run; the default sensor set otherwise.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Seconds to run; until interrupted otherwise.
        #[arg(long)]
        duration: Option<f64>,
        #[arg(long, env = "COGNITRACE_DISCOVERY_PORT")]
        discovery_port: Option<u16>,
    },
    /// Replay a scripted session on a virtual clock and write it to disk.
    Record {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        events: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        time_scale: Option<f64>,
        /// Session directory; `<output>/<session id>` by default.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute the per-symbol metric table of a recorded session.
    Analyze {
        dir: PathBuf,
        /// CSV path; `<dir>/metrics.csv` by default.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render the highlight overlay and HTML heatmap of a recorded session.
    Heatmap {
        dir: PathBuf,
        #[arg(long, conflicts_with = "script_file")]
        script: Option<String>,
        #[arg(long)]
        script_file: Option<PathBuf>,
        /// Output directory; `<dir>/heatmap` by default.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the live session service.
    Serve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, env = "COGNITRACE_API_PORT")]
        port: Option<u16>,
        #[arg(long, env = "COGNITRACE_DISCOVERY_PORT")]
        discovery_port: Option<u16>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        time_scale: Option<f64>,
        /// Also run the configured devices as local simulators.
        #[arg(long)]
        simulate: bool,
    },
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Err(e) = run(cli.command) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Validate {
            config,
            workflow,
            events,
            seed,
        } => validate(config.as_deref(), workflow.as_deref(), events.as_deref(), seed),
        Command::Simulate {
            config,
            seed,
            duration,
            discovery_port,
        } => simulate(config.as_deref(), seed, duration, discovery_port),
        Command::Record {
            config,
            events,
            seed,
            time_scale,
            out,
        } => record(&config, &events, seed, time_scale, out),
        Command::Analyze { dir, out } => {
            let table = analyze_dir(&dir).map_err(explain)?;
            let out = out.unwrap_or_else(|| dir.join(METRICS_CSV));
            let file = std::fs::File::create(&out).with_context(|| format!("cannot create {}", out.display()))?;
            table.write_csv(std::io::BufWriter::new(file))?;
            println!("{} symbols -> {}", table.len(), out.display());
            Ok(())
        }
        Command::Heatmap {
            dir,
            script,
            script_file,
            out,
        } => {
            let script = match script_file {
                Some(p) => Some(std::fs::read_to_string(&p).with_context(|| format!("cannot read {}", p.display()))?),
                None => script,
            };
            let export = heatmap_dir(&dir, script.as_deref()).map_err(explain)?;
            for d in &export.diagnostics {
                eprintln!("warning: {d}");
            }
            let out = out.unwrap_or_else(|| dir.join("heatmap"));
            write_heatmap(&export, &out)?;
            println!("{} highlighted symbols -> {}", export.overlay.len(), out.display());
            Ok(())
        }
        Command::Serve {
            config,
            port,
            discovery_port,
            seed,
            time_scale,
            simulate,
        } => {
            let config = SessionConfig::load(&config).map_err(explain)?;
            let any = IpAddr::V4(Ipv4Addr::UNSPECIFIED);
            let opts = ServeOptions {
                api_addr: SocketAddr::new(any, port.unwrap_or(config.service.api_port)),
                discovery_addr: SocketAddr::new(any, discovery_port.unwrap_or(config.service.discovery_port)),
                config,
                seed,
                time_scale,
                simulate,
            };
            tokio::runtime::Runtime::new()?.block_on(serve(opts))
        }
    }
}

/// Lists every problem of a config or script error on its own line.
fn explain(e: SessionError) -> anyhow::Error {
    match e {
        SessionError::Config(problems) | SessionError::Script(problems) => {
            anyhow::anyhow!("{} problem(s):\n  {}", problems.len(), problems.join("\n  "))
        }
        other => other.into(),
    }
}

fn validate(config: Option<&Path>, workflow: Option<&Path>, events: Option<&Path>, seed: Option<u64>) -> anyhow::Result<()> {
    let (workflow, seed) = match (config, workflow) {
        (Some(path), _) => {
            let c = SessionConfig::load(path).map_err(explain)?;
            let seed = c.seed(seed);
            if let Some(events) = events {
                let script = EventScript::load(events).map_err(explain)?;
                script.check(&c.workflow.plan(seed)).map_err(explain)?;
                println!("event script {}: {} events", events.display(), script.events.len());
            }
            println!("corpus {}", c.corpus_dir.display());
            (c.workflow, seed)
        }
        (None, Some(path)) => {
            let w = load_workflow(path).with_context(|| format!("invalid workflow {}", path.display()))?;
            let seed = seed.unwrap_or(w.participant_seed);
            (w, seed)
        }
        (None, None) => bail!("pass --config or --workflow"),
    };
    let plan = workflow.plan(seed);
    println!(
        "workflow {}: {} steps, {} stages, {} phases, {} tasks",
        workflow.id,
        workflow.steps.len(),
        workflow.phase_count(),
        plan.len(),
        workflow.tasks.len()
    );
    for (i, phase) in plan.iter().enumerate() {
        println!("  {:>2}  {}", i + 1, phase.label());
    }
    Ok(())
}

fn simulate(config: Option<&Path>, seed: Option<u64>, duration: Option<f64>, port: Option<u16>) -> anyhow::Result<()> {
    let (profiles, port) = match config {
        Some(path) => {
            let c = SessionConfig::load(path).map_err(explain)?;
            let seed = c.seed(seed);
            (c.device_profiles(seed), port.unwrap_or(c.service.discovery_port))
        }
        None => (
            cognitrace::session::simulated_devices(seed.unwrap_or(0)),
            port.unwrap_or(DEFAULT_DISCOVERY_PORT),
        ),
    };
    let server = ServerConfig {
        announce_target: Some(SocketAddr::new(IpAddr::V4(Ipv4Addr::LOCALHOST), port)),
        ..ServerConfig::default()
    };
    let registry = SourceRegistry::with_builtins();
    let mut running = Vec::new();
    for p in &profiles {
        let s = SimulatorServer::start(&registry, p, &server).with_context(|| format!("cannot start {}", p.source_id))?;
        println!(
            "{:<12} {:<28} {:>6} Hz  data {}  probe {}",
            p.source_id,
            p.name,
            p.nominal_rate,
            s.data_addr(),
            s.probe_addr()
        );
        running.push(s);
    }
    println!("announcing to 127.0.0.1:{port}");
    let runtime = tokio::runtime::Builder::new_current_thread().enable_all().build()?;
    runtime.block_on(async {
        match duration {
            Some(d) => tokio::time::sleep(Duration::from_secs_f64(d.max(0.0))).await,
            None => {
                let _ = tokio::signal::ctrl_c().await;
            }
        }
    });
    for s in running {
        println!("{}: {} samples sent", s.info().source_id, s.samples_sent());
        s.stop();
    }
    Ok(())
}

fn record(config: &Path, events: &Path, seed: Option<u64>, time_scale: Option<f64>, out: Option<PathBuf>) -> anyhow::Result<()> {
    let config = SessionConfig::load(config).map_err(explain)?;
    let script = EventScript::load(events).map_err(explain)?;
    let seed = config.seed(seed);
    let out = out.unwrap_or_else(|| {
        config
            .output_dir
            .join(session_id(&config.participant_id, &config.workflow.id, seed))
    });
    let options = ReplayOptions {
        seed: Some(seed),
        time_scale,
        max_duration_s: None,
    };
    let outcome = record_headless(&config, &script, &out, &options).map_err(explain)?;
    let m = &outcome.manifest;
    println!(
        "{}: {:.1} s, {} streams, {} bytes, workflow {}",
        m.meta.session_id,
        m.duration_s,
        m.streams.len(),
        m.total_bytes,
        outcome.state.describe()
    );
    println!("written to {}", outcome.dir.display());
    Ok(())
}

async fn serve(opts: ServeOptions) -> anyhow::Result<()> {
    let mut service = Service::start(opts).await?;
    println!("listening on {}", service.base_url());
    tokio::select! {
        r = service.wait() => r,
        _ = tokio::signal::ctrl_c() => {
            log::info!("shutting down");
            service.shutdown().await
        }
    }
}
