//! Local HTTP JSON API over the tap success-rate model.
//!
//! Endpoints live under `/v1`. Handlers only read the shared registry and
//! coefficients, so requests can be served concurrently in any order.

mod error;
mod handlers;

use std::io;
use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::sync::Arc;

use axum::http::{header, HeaderValue, Method};
use axum::routing::{get, post};
use axum::Router;
use tappy_core::device::DeviceRegistry;
use tappy_core::model::ModelCoefficients;
use tokio::net::TcpListener;
use tower_http::cors::{AllowOrigin, CorsLayer};

pub use error::ApiError;
pub use handlers::{AnalyzeRequest, PredictRequest, PredictResponse};

pub const DEFAULT_PORT: u16 = 7317;

#[derive(Debug, Clone, PartialEq)]
pub struct ServiceConfig {
    pub port: u16,
    pub bind: IpAddr,
    /// Allowed CORS origins; `"*"` allows any.
    pub cors_origins: Vec<String>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            port: DEFAULT_PORT,
            bind: IpAddr::V4(Ipv4Addr::LOCALHOST),
            cors_origins: vec!["*".to_string()],
        }
    }
}

impl ServiceConfig {
    pub fn with_port(port: u16) -> Result<Self, String> {
        if port == 0 {
            return Err("port must be in 1..=65535".into());
        }
        Ok(Self {
            port,
            ..Self::default()
        })
    }

    pub fn socket_addr(&self) -> SocketAddr {
        SocketAddr::new(self.bind, self.port)
    }

    fn cors(&self) -> CorsLayer {
        let origins = if self.cors_origins.iter().any(|o| o == "*") {
            AllowOrigin::any()
        } else {
            AllowOrigin::list(
                self.cors_origins
                    .iter()
                    .filter_map(|o| HeaderValue::from_str(o).ok()),
            )
        };
        CorsLayer::new()
            .allow_origin(origins)
            .allow_methods([Method::GET, Method::HEAD, Method::POST, Method::OPTIONS])
            .allow_headers([header::CONTENT_TYPE])
    }
}

/// Immutable state shared by all handlers.
#[derive(Debug, Clone)]
pub struct AppState {
    pub registry: Arc<DeviceRegistry>,
    pub coeffs: ModelCoefficients,
}

impl AppState {
    pub fn new(registry: DeviceRegistry) -> Self {
        Self {
            registry: Arc::new(registry),
            coeffs: ModelCoefficients::default(),
        }
    }
}

pub fn router(state: AppState, config: &ServiceConfig) -> Router {
    Router::new()
        .route("/v1/health", get(handlers::health))
        .route("/v1/devices", get(handlers::devices))
        .route("/v1/predict", post(handlers::predict))
        .route("/v1/analyze", post(handlers::analyze))
        .fallback(handlers::not_found)
        .method_not_allowed_fallback(handlers::method_not_allowed)
        .layer(config.cors())
        .with_state(state)
}

/// Serves on an already-bound listener until the future is dropped or
/// Ctrl-C is received.
pub async fn serve_on(listener: TcpListener, state: AppState, config: &ServiceConfig) -> io::Result<()> {
    let app = router(state, config);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

/// Binds the configured address, then serves. Nothing is accepted before
/// the listener is fully bound.
pub async fn serve(config: ServiceConfig, state: AppState) -> io::Result<()> {
    let listener = TcpListener::bind(config.socket_addr()).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    serve_on(listener, state, &config).await
}
