use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, HeaderMap, StatusCode};
use axum::Json;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::{json, Value};
use tappy_core::analysis::{analyze as run_analysis, lookup_device, resolve_device, AnalysisError, DEFAULT_THRESHOLD};
use tappy_core::device::DeviceProfile;
use tappy_core::layout::{document_from_value, ElementSelection, LayoutError};
use tappy_core::model::{predict_mm, ModelError};
use tappy_core::report::ReportJson;

use crate::{ApiError, AppState};

pub async fn health() -> Json<Value> {
    Json(json!({"status": "ok", "version": env!("CARGO_PKG_VERSION")}))
}

pub async fn devices(State(state): State<AppState>) -> Json<Vec<DeviceProfile>> {
    Json(state.registry.profiles().to_vec())
}

pub async fn not_found() -> ApiError {
    ApiError {
        status: StatusCode::NOT_FOUND,
        code: "NOT_FOUND",
        message: "no such endpoint".into(),
        detail: None,
    }
}

pub async fn method_not_allowed() -> ApiError {
    ApiError {
        status: StatusCode::METHOD_NOT_ALLOWED,
        code: "METHOD_NOT_ALLOWED",
        message: "method not allowed for this endpoint".into(),
        detail: None,
    }
}

fn json_body<T: DeserializeOwned>(headers: &HeaderMap, body: &[u8]) -> Result<T, ApiError> {
    let is_json = headers
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.split(';').next())
        .is_some_and(|v| v.trim().eq_ignore_ascii_case("application/json"));
    if !is_json {
        return Err(ApiError {
            status: StatusCode::UNSUPPORTED_MEDIA_TYPE,
            code: "UNSUPPORTED_MEDIA_TYPE",
            message: "request body must be application/json".into(),
            detail: None,
        });
    }
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request("INVALID_JSON", e.to_string()))
}

/// Probabilities and lengths go out unrounded, at 15 significant digits.
fn sig15<S: Serializer>(value: &f64, s: S) -> Result<S::Ok, S::Error> {
    let trimmed: f64 = format!("{value:.14e}").parse().expect("formatted float parses");
    s.serialize_f64(trimmed)
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictRequest {
    pub device_id: Option<String>,
    pub width_px: Option<f64>,
    pub height_px: Option<f64>,
    pub width_mm: Option<f64>,
    pub height_mm: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct PredictResponse {
    #[serde(serialize_with = "sig15")]
    pub width_mm: f64,
    #[serde(serialize_with = "sig15")]
    pub height_mm: f64,
    #[serde(serialize_with = "sig15")]
    pub sigma_x_mm: f64,
    #[serde(serialize_with = "sig15")]
    pub sigma_y_mm: f64,
    #[serde(serialize_with = "sig15")]
    pub success_rate: f64,
}

fn negative_size(message: impl Into<String>) -> ApiError {
    ApiError::bad_request("NEGATIVE_SIZE", message)
}

fn unknown_device(err: AnalysisError) -> ApiError {
    match err {
        AnalysisError::UnknownDevice { ref known, .. } => {
            let known = known.clone();
            ApiError::bad_request("UNKNOWN_DEVICE", err.to_string()).with_detail(json!({ "known": known }))
        }
        AnalysisError::NoDevice => ApiError::bad_request("MISSING_FIELDS", err.to_string()),
        other => ApiError::bad_request("INVALID_REQUEST", other.to_string()),
    }
}

fn pair(a: Option<f64>, b: Option<f64>, what: &str) -> Result<(f64, f64), ApiError> {
    match (a, b) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => Err(ApiError::bad_request(
            "MISSING_FIELDS",
            format!("both width_{what} and height_{what} are required"),
        )),
    }
}

pub fn predict_sizes(state: &AppState, req: &PredictRequest) -> Result<PredictResponse, ApiError> {
    let has_px = req.width_px.is_some() || req.height_px.is_some();
    let has_mm = req.width_mm.is_some() || req.height_mm.is_some();
    let (width_mm, height_mm) = match (has_px, has_mm) {
        (true, true) => {
            return Err(ApiError::bad_request(
                "MIXED_UNITS",
                "give either width_px/height_px with device_id, or width_mm/height_mm, not both",
            ))
        }
        (false, false) => {
            return Err(ApiError::bad_request(
                "MISSING_FIELDS",
                "give width_px/height_px with device_id, or width_mm/height_mm",
            ))
        }
        (false, true) => pair(req.width_mm, req.height_mm, "mm")?,
        (true, false) => {
            let (w, h) = pair(req.width_px, req.height_px, "px")?;
            let id = req
                .device_id
                .as_deref()
                .ok_or_else(|| ApiError::bad_request("MISSING_FIELDS", "device_id is required with pixel sizes"))?;
            let profile = lookup_device(&state.registry, id).map_err(unknown_device)?;
            let w = profile.px_to_mm(w).map_err(|e| negative_size(e.to_string()))?;
            let h = profile.px_to_mm(h).map_err(|e| negative_size(e.to_string()))?;
            (w, h)
        }
    };
    let p = predict_mm(width_mm, height_mm, &state.coeffs).map_err(|e| match e {
        ModelError::Domain { .. } => negative_size(e.to_string()),
        other => ApiError::bad_request("INVALID_REQUEST", other.to_string()),
    })?;
    Ok(PredictResponse {
        width_mm,
        height_mm,
        sigma_x_mm: p.sigma_x_mm,
        sigma_y_mm: p.sigma_y_mm,
        success_rate: p.success_rate,
    })
}

pub async fn predict(
    State(state): State<AppState>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Json<PredictResponse>, ApiError> {
    let req: PredictRequest = json_body(&headers, &body)?;
    predict_sizes(&state, &req).map(Json)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeRequest {
    pub document: Value,
    pub device_id: Option<String>,
    pub threshold: Option<f64>,
    #[serde(default)]
    pub selection: ElementSelection,
}

fn layout_error(err: LayoutError) -> ApiError {
    let detail = match &err {
        LayoutError::Parse { path, .. } | LayoutError::InvalidNode { path, .. } => json!({ "path": path }),
        LayoutError::DuplicateId { id, path, .. } => json!({ "path": path, "id": id }),
        LayoutError::InvalidGlob { pattern, .. } => {
            return ApiError::bad_request("INVALID_SELECTION", err.to_string()).with_detail(json!({ "pattern": pattern }))
        }
    };
    ApiError::bad_request("INVALID_DOCUMENT", err.to_string()).with_detail(detail)
}

pub async fn analyze(
    State(state): State<AppState>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Json<Value>, ApiError> {
    let req: AnalyzeRequest = json_body(&headers, &body)?;
    let doc = document_from_value(req.document).map_err(layout_error)?;
    let profile = resolve_device(&state.registry, req.device_id.as_deref(), &doc).map_err(unknown_device)?;
    let threshold = req.threshold.unwrap_or(DEFAULT_THRESHOLD);
    let report = run_analysis(&doc, profile, threshold, &req.selection, &state.coeffs).map_err(|e| match e {
        AnalysisError::Layout(l) => layout_error(l),
        AnalysisError::InvalidThreshold(_) => ApiError::bad_request("INVALID_THRESHOLD", e.to_string()),
        other => ApiError::bad_request("INVALID_REQUEST", other.to_string()),
    })?;
    let report = report.stamped_now();
    Ok(Json(serde_json::to_value(ReportJson::from(&report)).expect("report serializes")))
}

