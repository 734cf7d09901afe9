//! HTTP service, transactional storage and configuration for the lingkod
//! platform. The `lingkod` binary wraps this crate with an admin CLI.

pub mod api;
pub mod auth;
pub mod config;
pub mod detector;
pub mod error;
pub mod store;

use std::net::SocketAddr;
use std::sync::Arc;

use tokio::net::TcpListener;
use tokio::sync::oneshot;
use tokio::task::JoinHandle;

pub use config::{DetectorMode, ServiceConfig};
pub use error::ServiceError;
pub use store::Store;

/// A service accepting connections in the background.
pub struct RunningService {
    pub addr: SocketAddr,
    pub store: Arc<Store>,
    shutdown: Option<oneshot::Sender<()>>,
    task: JoinHandle<std::io::Result<()>>,
}

impl RunningService {
    pub fn base_url(&self) -> String {
        format!("http://{}", self.addr)
    }

    /// Stops accepting connections and waits for in-flight requests.
    pub async fn shutdown(mut self) -> std::io::Result<()> {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        self.task.await.map_err(std::io::Error::other)?
    }
}

/// Validates `config`, opens the store and starts serving on
/// `config.bind_addr()`. Port 0 picks a free port.
pub async fn serve(config: ServiceConfig) -> Result<RunningService, ServiceError> {
    config.validate()?;
    let store = Arc::new(Store::open(&config)?);
    let detector = detector::build(&config)?;
    let listener = TcpListener::bind(config.bind_addr())
        .await
        .map_err(|e| ServiceError::BindFailure(e.to_string()))?;
    let addr = listener.local_addr().map_err(|e| ServiceError::BindFailure(e.to_string()))?;
    let app = api::router(api::AppState { store: store.clone(), detector });
    let (tx, rx) = oneshot::channel();
    let task = tokio::spawn(async move {
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = rx.await;
            })
            .await
    });
    tracing::info!(%addr, "listening");
    Ok(RunningService { addr, store, shutdown: Some(tx), task })
}
