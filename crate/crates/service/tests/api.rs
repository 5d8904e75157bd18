use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tappy_core::device::{DeviceRegistry, RegistrySource};
use tappy_service::{router, AppState, ServiceConfig};
use tower::ServiceExt;

fn app() -> Router {
    router(AppState::new(DeviceRegistry::builtin()), &ServiceConfig::default())
}

async fn send(app: Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Vec<u8>, axum::http::HeaderMap) {
    let mut req = Request::builder().method(method).uri(uri).header(header::ORIGIN, "http://localhost:5173");
    let body = match body {
        Some(v) => {
            req = req.header(header::CONTENT_TYPE, "application/json");
            Body::from(serde_json::to_vec(&v).unwrap())
        }
        None => Body::empty(),
    };
    let resp = app.oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let headers = resp.headers().clone();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, bytes, headers)
}

async fn json_of(app: Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (status, bytes, _) = send(app, method, uri, body).await;
    (status, serde_json::from_slice(&bytes).unwrap())
}

fn sample(name: &str) -> Value {
    let path = format!("{}/../../samples/{name}", env!("CARGO_MANIFEST_DIR"));
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

#[tokio::test]
async fn health_get_and_head() {
    let (status, body) = json_of(app(), Method::GET, "/v1/health", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["status"], "ok");
    assert!(body["version"].is_string());

    let (status, bytes, _) = send(app(), Method::HEAD, "/v1/health", None).await;
    assert_eq!(status, StatusCode::OK);
    assert!(bytes.is_empty());
}

#[tokio::test]
async fn devices_follow_registry() {
    let (status, body) = json_of(app(), Method::GET, "/v1/devices", None).await;
    assert_eq!(status, StatusCode::OK);
    let list = body.as_array().unwrap();
    let ids: Vec<_> = list.iter().map(|d| d["id"].as_str().unwrap()).collect();
    assert_eq!(ids, DeviceRegistry::builtin().ids());
    let iphone16 = list.iter().find(|d| d["id"] == "iphone-16").unwrap();
    let mut keys: Vec<_> = iphone16.as_object().unwrap().keys().cloned().collect();
    keys.sort();
    assert_eq!(keys, ["display_name", "id", "logical_height", "logical_width", "ppi", "scale_factor"]);
    assert_eq!(iphone16["ppi"].as_f64(), Some(460.0));

    let single = DeviceRegistry::from_slice(
        br#"[{"id": "pixel-8", "display_name": "Pixel 8", "ppi": 428, "scale_factor": 3, "logical_width": 412, "logical_height": 915}]"#,
        RegistrySource::File("custom.json".into()),
    )
    .unwrap();
    let custom = router(AppState::new(single), &ServiceConfig::default());
    let (_, body) = json_of(custom, Method::GET, "/v1/devices", None).await;
    assert_eq!(body.as_array().unwrap().len(), 1);
}

#[tokio::test]
async fn predict_in_millimetres() {
    let (status, body) = json_of(app(), Method::POST, "/v1/predict", Some(json!({"width_mm": 9, "height_mm": 9}))).await;
    assert_eq!(status, StatusCode::OK);
    let rate = body["success_rate"].as_f64().unwrap();
    assert!((rate - 0.996_977_454_564_899).abs() < 1e-13, "{rate}");
    assert_eq!(body.as_object().unwrap().len(), 5);
}

#[tokio::test]
async fn predict_in_device_pixels() {
    let (status, body) = json_of(
        app(),
        Method::POST,
        "/v1/predict",
        Some(json!({"device_id": "iphone-16", "width_px": 120, "height_px": 44})),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert!((body["width_mm"].as_f64().unwrap() - 19.878).abs() < 1e-3);
    assert!((body["height_mm"].as_f64().unwrap() - 7.289).abs() < 1e-3);
}

#[tokio::test]
async fn predict_error_codes() {
    let cases = [
        (json!({"width_mm": 9, "width_px": 120, "height_px": 44, "device_id": "iphone-16"}), "MIXED_UNITS"),
        (json!({"device_id": "iphone-99", "width_px": 120, "height_px": 44}), "UNKNOWN_DEVICE"),
        (json!({"width_mm": -1, "height_mm": 9}), "NEGATIVE_SIZE"),
        (json!({"device_id": "iphone-16", "width_px": -120, "height_px": 44}), "NEGATIVE_SIZE"),
        (json!({"width_mm": 9}), "MISSING_FIELDS"),
        (json!({"width_px": 9, "height_px": 9}), "MISSING_FIELDS"),
        (json!({}), "MISSING_FIELDS"),
    ];
    for (body, code) in cases {
        let (status, resp) = json_of(app(), Method::POST, "/v1/predict", Some(body.clone())).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{body}");
        assert_eq!(resp["error"], code, "{body}");
        assert!(resp["message"].is_string());
    }
}

#[tokio::test]
async fn rejects_non_json_content_type() {
    let req = Request::post("/v1/predict")
        .header(header::CONTENT_TYPE, "text/plain")
        .body(Body::from(r#"{"width_mm": 9, "height_mm": 9}"#))
        .unwrap();
    let resp = app().oneshot(req).await.unwrap();
    assert_eq!(resp.status(), StatusCode::UNSUPPORTED_MEDIA_TYPE);
    let body: Value = serde_json::from_slice(&resp.into_body().collect().await.unwrap().to_bytes()).unwrap();
    assert_eq!(body["error"], "UNSUPPORTED_MEDIA_TYPE");

    let req = Request::post("/v1/predict")
        .header(header::CONTENT_TYPE, "application/json; charset=utf-8")
        .body(Body::from("{not json"))
        .unwrap();
    let resp = app().oneshot(req).await.unwrap();
    assert_eq!(resp.status(), StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn analyze_sample_screen() {
    let (status, body) = json_of(
        app(),
        Method::POST,
        "/v1/analyze",
        Some(json!({"document": sample("checkout.json"), "device_id": "iphone-16"})),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["threshold"], 0.95);
    assert_eq!(body["device_id"], "iphone-16");
    assert!(body["generated_at"].is_string());
    let elements = body["elements"].as_array().unwrap();
    assert!(!elements.is_empty());
    assert!(elements.iter().any(|e| e["node_id"] == "btn-pay"));
}

#[tokio::test]
async fn analyze_uses_document_default_device_and_selection() {
    let (status, body) = json_of(
        app(),
        Method::POST,
        "/v1/analyze",
        Some(json!({"document": sample("checkout.json"), "threshold": 0.99, "selection": {"explicit_only": true}})),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["device_id"], "iphone-16");
    assert_eq!(body["threshold"], 0.99);
    assert_eq!(body["elements"].as_array().unwrap().len(), 11);
}

#[tokio::test]
async fn analyze_errors() {
    let mut dup = sample("single-button.json");
    dup["root"]["children"][0]["id"] = json!("screen");
    let (status, body) = json_of(app(), Method::POST, "/v1/analyze", Some(json!({"document": dup, "device_id": "iphone-16"}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"], "INVALID_DOCUMENT");
    assert!(body["message"].as_str().unwrap().contains("screen"));
    assert_eq!(body["detail"]["id"], "screen");

    let mut bad = sample("single-button.json");
    bad["root"]["children"][0]["frame"]["width"] = json!("wide");
    let (status, body) = json_of(app(), Method::POST, "/v1/analyze", Some(json!({"document": bad}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["detail"]["path"], "root.children[0].frame.width");

    let (_, body) = json_of(
        app(),
        Method::POST,
        "/v1/analyze",
        Some(json!({"document": sample("single-button.json"), "device_id": "iphone-99"})),
    )
    .await;
    assert_eq!(body["error"], "UNKNOWN_DEVICE");
    assert!(body["detail"]["known"].as_array().unwrap().iter().any(|v| v == "iphone-16"));

    let (_, body) = json_of(
        app(),
        Method::POST,
        "/v1/analyze",
        Some(json!({"document": sample("settings.json")})),
    )
    .await;
    assert_eq!(body["error"], "MISSING_FIELDS");

    let (_, body) = json_of(
        app(),
        Method::POST,
        "/v1/analyze",
        Some(json!({"document": sample("single-button.json"), "threshold": 2})),
    )
    .await;
    assert_eq!(body["error"], "INVALID_THRESHOLD");
}

#[tokio::test]
async fn errors_are_json_everywhere() {
    let (status, body) = json_of(app(), Method::GET, "/v2/nothing", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["error"], "NOT_FOUND");
    let (status, body) = json_of(app(), Method::GET, "/v1/predict", None).await;
    assert_eq!(status, StatusCode::METHOD_NOT_ALLOWED);
    assert_eq!(body["error"], "METHOD_NOT_ALLOWED");
}

#[tokio::test]
async fn cors_headers_are_sent() {
    let (_, _, headers) = send(app(), Method::GET, "/v1/health", None).await;
    assert_eq!(headers.get(header::ACCESS_CONTROL_ALLOW_ORIGIN).unwrap(), "*");

    let config = ServiceConfig {
        cors_origins: vec!["http://localhost:5173".into()],
        ..ServiceConfig::default()
    };
    let restricted = router(AppState::new(DeviceRegistry::builtin()), &config);
    let (_, _, headers) = send(restricted, Method::GET, "/v1/health", None).await;
    assert_eq!(headers.get(header::ACCESS_CONTROL_ALLOW_ORIGIN).unwrap(), "http://localhost:5173");
}

#[tokio::test]
async fn requests_do_not_change_state() {
    let shared = app();
    let body = json!({"device_id": "iphone-16", "width_px": 44, "height_px": 44});
    let (_, first, _) = send(shared.clone(), Method::POST, "/v1/predict", Some(body.clone())).await;
    let _ = send(shared.clone(), Method::POST, "/v1/analyze", Some(json!({"document": sample("checkout.json")}))).await;
    let _ = send(shared.clone(), Method::POST, "/v1/predict", Some(json!({"width_mm": -1, "height_mm": 1}))).await;
    let (_, second, _) = send(shared, Method::POST, "/v1/predict", Some(body)).await;
    assert_eq!(first, second);
}

#[test]
fn port_zero_is_rejected() {
    assert!(ServiceConfig::with_port(0).is_err());
    assert_eq!(ServiceConfig::with_port(8080).unwrap().port, 8080);
    assert_eq!(ServiceConfig::default().port, 7317);
    assert!(ServiceConfig::default().bind.is_loopback());
}

#[tokio::test]
async fn refuses_connections_until_bound() {
    use tokio::io::{AsyncReadExt, AsyncWriteExt};
    use tokio::net::{TcpListener, TcpStream};

    let port = {
        let probe = TcpListener::bind("127.0.0.1:0").await.unwrap();
        probe.local_addr().unwrap().port()
    };
    assert!(TcpStream::connect(("127.0.0.1", port)).await.is_err());

    let config = ServiceConfig::with_port(port).unwrap();
    let server = tokio::spawn(tappy_service::serve(config, AppState::new(DeviceRegistry::builtin())));
    let mut stream = loop {
        match TcpStream::connect(("127.0.0.1", port)).await {
            Ok(s) => break s,
            Err(_) => tokio::time::sleep(std::time::Duration::from_millis(10)).await,
        }
    };
    stream
        .write_all(b"GET /v1/health HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n")
        .await
        .unwrap();
    let mut response = String::new();
    stream.read_to_string(&mut response).await.unwrap();
    assert!(response.starts_with("HTTP/1.1 200"), "{response}");
    assert!(response.contains("\"status\":\"ok\""));
    server.abort();
}
