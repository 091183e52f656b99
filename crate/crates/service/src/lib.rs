//! Session service: live stream ingestion, the workflow actor and the HTTP
//! API the participant UI talks to.

pub mod actor;
pub mod api;
pub mod error;
pub mod live;

use std::net::SocketAddr;
use std::sync::Arc;

use anyhow::Context;
use cognitrace::code::SourceCorpus;
use cognitrace::session::SessionConfig;
use cognitrace::stream::net::{ServerConfig, SimulatorServer};
use cognitrace::stream::SourceRegistry;
use tokio::sync::oneshot;
use tokio::task::JoinHandle;

use crate::api::AppState;
use crate::live::Hub;

#[derive(Debug, Clone)]
pub struct ServeOptions {
    pub config: SessionConfig,
    pub api_addr: SocketAddr,
    pub discovery_addr: SocketAddr,
    pub seed: Option<u64>,
    /// Overrides the config's `time_scale`.
    pub time_scale: Option<f64>,
    /// Also run the configured devices as local simulators.
    pub simulate: bool,
}

/// A running service. Dropping it without `shutdown` leaves the server task
/// to die with the runtime.
pub struct Service {
    pub addr: SocketAddr,
    pub discovery_addr: SocketAddr,
    pub session_id: String,
    hub: Arc<Hub>,
    stop: Option<oneshot::Sender<()>>,
    server: JoinHandle<std::io::Result<()>>,
    simulators: Vec<SimulatorServer>,
}

impl Service {
    pub async fn start(opts: ServeOptions) -> anyhow::Result<Service> {
        let config = opts.config;
        let seed = config.seed(opts.seed);
        let scale = opts.time_scale.unwrap_or(config.time_scale);
        anyhow::ensure!(scale.is_finite() && scale > 0.0, "time_scale must be positive, got {scale}");
        let corpus = SourceCorpus::load(&config.corpus_dir, config.settings.tab_width)
            .with_context(|| format!("cannot load corpus {}", config.corpus_dir.display()))?;
        let listener = tokio::net::TcpListener::bind(opts.api_addr)
            .await
            .with_context(|| format!("cannot listen on {}", opts.api_addr))?;
        let addr = listener.local_addr()?;
        let hub = Hub::start(opts.discovery_addr)
            .with_context(|| format!("cannot bind discovery on {}", opts.discovery_addr))?;
        let discovery_addr = hub.discovery_addr();

        let mut simulators = Vec::new();
        if opts.simulate {
            let registry = SourceRegistry::with_builtins();
            let server = ServerConfig {
                announce_target: Some(discovery_addr),
                ..ServerConfig::default()
            };
            for profile in config.device_profiles(seed) {
                let sim = SimulatorServer::start(&registry, &profile, &server)
                    .with_context(|| format!("cannot start simulator {}", profile.source_id))?;
                simulators.push(sim);
            }
        }

        let config = Arc::new(config);
        let (commands, snapshot) = actor::Actor::spawn(hub.clone(), config.clone(), seed, scale);
        let session_id = snapshot.borrow().session_id.clone();
        let app = api::router(AppState {
            hub: hub.clone(),
            commands,
            snapshot,
            config,
            corpus: Arc::new(corpus),
        });
        let (stop, stopped) = oneshot::channel::<()>();
        let server = tokio::spawn(async move {
            axum::serve(listener, app)
                .with_graceful_shutdown(async {
                    let _ = stopped.await;
                })
                .await
        });
        log::info!("serving {session_id} on http://{addr}, discovery on {discovery_addr}");
        Ok(Service {
            addr,
            discovery_addr,
            session_id,
            hub,
            stop: Some(stop),
            server,
            simulators,
        })
    }

    pub fn base_url(&self) -> String {
        format!("http://{}", self.addr)
    }

    /// Waits for the server to exit on its own, i.e. after an I/O failure.
    pub async fn wait(&mut self) -> anyhow::Result<()> {
        (&mut self.server).await?.context("server failed")
    }

    pub async fn shutdown(mut self) -> anyhow::Result<()> {
        if let Some(stop) = self.stop.take() {
            let _ = stop.send(());
        }
        let result = (&mut self.server).await;
        for s in self.simulators.drain(..) {
            s.stop();
        }
        let hub = self.hub.clone();
        tokio::task::spawn_blocking(move || hub.shutdown()).await?;
        result?.context("server failed")
    }
}
