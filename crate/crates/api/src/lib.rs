//! HTTP service over the catalog.
//!
//! Reads are anonymous; writes need `Authorization: Bearer <FN_TOKEN>`.
//! Every successful write publishes one [`EventEnvelope`].

mod error;
pub mod events;
mod query;
mod routes;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use seacat_core::catalog::{Catalog, FileStore, MemoryStore, Store};
use seacat_core::taxonomy::{load_taxonomy, ConceptTree, RemoteProvider, SharedTaxonomy, TaxonomyError, TaxonomySource};
use tokio::sync::oneshot;

pub use error::{ApiError, FieldError};
pub use events::{CollectorSink, EventEnvelope, EventSink, EventType, FileSink, NullSink, StdoutSink};
pub use query::{parse_filter, FILTER_PARAMS};
pub use routes::{router, AppState, MAX_UPLOAD_BYTES};

pub const DEFAULT_BIND: &str = "127.0.0.1:8080";

/// Root assumed when a remote taxonomy URL has no `#Root` fragment.
pub const DEFAULT_REMOTE_ROOT: &str = "Animalia";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    pub bind: String,
    /// Journal file. `None` keeps everything in memory.
    pub store: Option<PathBuf>,
    /// Taxonomy file path, or `http(s)://base#Root` for a remote provider.
    pub taxonomy: String,
    pub token: Option<String>,
}

impl Config {
    /// Reads `FN_BIND`, `FN_STORE`, `FN_TAXONOMY` and `FN_TOKEN`.
    pub fn from_env(get: impl Fn(&str) -> Option<String>) -> Result<Self, StartupError> {
        let get = |k: &str| get(k).filter(|v| !v.trim().is_empty());
        Ok(Self {
            bind: get("FN_BIND").unwrap_or_else(|| DEFAULT_BIND.to_string()),
            store: get("FN_STORE").map(PathBuf::from),
            taxonomy: get("FN_TAXONOMY").ok_or(StartupError::Config("FN_TAXONOMY is not set".into()))?,
            token: get("FN_TOKEN"),
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum StartupError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("cannot bind {addr}: {source}")]
    Bind { addr: String, source: std::io::Error },
    #[error("cannot open store: {0}")]
    Store(String),
    #[error("invalid taxonomy: {0}")]
    Taxonomy(String),
    #[error("runtime: {0}")]
    Runtime(String),
}

/// Loads a taxonomy from a file path or `http(s)://base#Root`.
pub fn load_tree(source: &str) -> Result<ConceptTree, TaxonomyError> {
    if source.starts_with("http://") || source.starts_with("https://") {
        let (base, root) = source.split_once('#').unwrap_or((source, DEFAULT_REMOTE_ROOT));
        let provider = RemoteProvider::new(base);
        load_taxonomy(TaxonomySource::Provider { provider: &provider, root })
    } else {
        load_taxonomy(TaxonomySource::File(std::path::Path::new(source)))
    }
}

pub fn open_catalog(config: &Config) -> Result<Catalog, StartupError> {
    let tree = load_tree(&config.taxonomy).map_err(|e| StartupError::Taxonomy(format!("{}: {e}", config.taxonomy)))?;
    let store: Box<dyn Store> = match &config.store {
        Some(p) => Box::new(FileStore::open(p).map_err(|e| StartupError::Store(e.to_string()))?),
        None => Box::new(MemoryStore::new()),
    };
    Catalog::open(store, SharedTaxonomy::new(tree)).map_err(|e| StartupError::Store(e.to_string()))
}

/// A server running on the current tokio runtime.
pub struct Server {
    addr: SocketAddr,
    shutdown: Option<oneshot::Sender<()>>,
    task: tokio::task::JoinHandle<std::io::Result<()>>,
}

impl Server {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// Stops accepting connections and waits for in-flight requests.
    pub async fn shutdown(mut self) -> std::io::Result<()> {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        self.task.await.map_err(std::io::Error::other)?
    }

    /// Runs until the process is interrupted.
    pub async fn wait(self) -> std::io::Result<()> {
        self.task.await.map_err(std::io::Error::other)?
    }
}

/// Binds and starts serving `catalog`. Startup failures are returned, never
/// deferred to the first request.
pub async fn serve_catalog(
    bind: &str,
    catalog: Arc<Catalog>,
    events: Arc<dyn EventSink>,
    token: Option<String>,
) -> Result<Server, StartupError> {
    let listener = tokio::net::TcpListener::bind(bind)
        .await
        .map_err(|source| StartupError::Bind { addr: bind.to_string(), source })?;
    let addr = listener.local_addr().map_err(|source| StartupError::Bind { addr: bind.to_string(), source })?;
    let app = router(AppState { catalog, events, token });
    let (tx, rx) = oneshot::channel::<()>();
    let task = tokio::spawn(async move {
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = rx.await;
            })
            .await
    });
    tracing::info!(%addr, "listening");
    Ok(Server { addr, shutdown: Some(tx), task })
}

pub async fn serve(config: &Config, events: Arc<dyn EventSink>) -> Result<Server, StartupError> {
    let catalog = Arc::new(open_catalog(config)?);
    serve_catalog(&config.bind, catalog, events, config.token.clone()).await
}

/// A server on its own runtime thread, for synchronous callers.
pub struct BackgroundServer {
    addr: SocketAddr,
    catalog: Arc<Catalog>,
    stop: Option<oneshot::Sender<()>>,
    thread: Option<std::thread::JoinHandle<()>>,
}

impl BackgroundServer {
    pub fn start(
        bind: &str,
        catalog: Arc<Catalog>,
        events: Arc<dyn EventSink>,
        token: Option<String>,
    ) -> Result<Self, StartupError> {
        let rt = tokio::runtime::Builder::new_multi_thread()
            .enable_all()
            .build()
            .map_err(|e| StartupError::Runtime(e.to_string()))?;
        let server = rt.block_on(serve_catalog(bind, catalog.clone(), events, token))?;
        let addr = server.addr();
        let (stop, stopped) = oneshot::channel::<()>();
        let thread = std::thread::spawn(move || {
            rt.block_on(async move {
                let _ = stopped.await;
                if let Err(e) = server.shutdown().await {
                    tracing::error!("server stopped with error: {e}");
                }
            });
        });
        Ok(Self { addr, catalog, stop: Some(stop), thread: Some(thread) })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn catalog(&self) -> &Arc<Catalog> {
        &self.catalog
    }

    pub fn stop(mut self) {
        self.halt();
    }

    fn halt(&mut self) {
        if let Some(tx) = self.stop.take() {
            let _ = tx.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

impl Drop for BackgroundServer {
    fn drop(&mut self) {
        self.halt();
    }
}
