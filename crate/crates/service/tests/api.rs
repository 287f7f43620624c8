use axum::body::{to_bytes, Body};
use axum::http::{header, Request, StatusCode};
use axum::Router;
use pm3d_core::samples;
use pm3d_core::scene::BackdropKind;
use pm3d_service::{router, Created, ModelSummary, ServiceConfig};
use serde_json::Value;
use tower::ServiceExt;

fn app() -> Router {
    router(ServiceConfig::default())
}

async fn call(
    app: &Router,
    method: &str,
    uri: &str,
    content_type: &str,
    body: impl Into<Body>,
) -> (StatusCode, Vec<u8>) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header(header::CONTENT_TYPE, content_type)
        .body(body.into())
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = to_bytes(resp.into_body(), usize::MAX).await.unwrap();
    (status, bytes.to_vec())
}

async fn upload(app: &Router, xml: &str) -> Created {
    let (status, body) = call(app, "POST", "/models", "application/xml", xml.to_owned()).await;
    assert_eq!(
        status,
        StatusCode::CREATED,
        "{}",
        String::from_utf8_lossy(&body)
    );
    serde_json::from_slice(&body).unwrap()
}

fn json(body: &[u8]) -> Value {
    serde_json::from_slice(body).unwrap()
}

#[tokio::test]
async fn upload_and_summary() {
    let app = app();
    let created = upload(&app, samples::BLOOD_ANALYSIS).await;
    assert_eq!(created.summary.task_count, 6);
    let (status, body) = call(
        &app,
        "GET",
        &format!("/models/{}", created.model_id),
        "text/plain",
        "",
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    let summary: ModelSummary = serde_json::from_slice(&body).unwrap();
    assert_eq!(summary, created.summary);
    let cost = summary
        .attributes
        .iter()
        .find(|a| a.name == "Cost")
        .unwrap();
    assert_eq!(serde_json::to_value(cost.kind).unwrap(), "numeric");
}

#[tokio::test]
async fn upload_errors_are_bad_requests_with_diagnostics() {
    let app = app();
    let (status, body) = call(
        &app,
        "POST",
        "/models",
        "application/xml",
        "<description>\n<task/>\n</description>",
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(json(&body)["line"], 2);
    let (status, body) = call(
        &app,
        "POST",
        "/models",
        "application/xml",
        "<description><call id='a'/><call id='a'/></description>",
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(json(&body)["violations"][0]["rule"], "duplicate_id");
}

#[tokio::test]
async fn scene_is_schema_valid_and_stable() {
    let app = app();
    let id = upload(&app, samples::BLOOD_ANALYSIS).await.model_id;
    let uri = format!("/models/{id}/scene");
    let (status, first) = call(
        &app,
        "POST",
        &uri,
        "text/plain",
        samples::FIVE_ATTRIBUTE_CONFIG,
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    let (_, second) = call(
        &app,
        "POST",
        &uri,
        "text/plain",
        samples::FIVE_ATTRIBUTE_CONFIG,
    )
    .await;
    assert_eq!(first, second);

    let schema: Value =
        serde_json::from_str(include_str!("../../../docs/scene3dviz-1.schema.json")).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let scene = json(&first);
    assert!(validator.is_valid(&scene));
    assert_eq!(scene["backdrop"]["kind"], "room");

    let (_, plain) = call(
        &app,
        "POST",
        &format!("{uri}?backdrop=none"),
        "text/plain",
        "",
    )
    .await;
    assert!(json(&plain)["backdrop"].is_null());
    let (status, _) = call(
        &app,
        "POST",
        &format!("{uri}?backdrop=castle"),
        "text/plain",
        "",
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn config_errors() {
    let app = app();
    let id = upload(&app, samples::BLOOD_ANALYSIS).await.model_id;
    let uri = format!("/models/{id}/scene");
    let (status, body) = call(
        &app,
        "POST",
        &uri,
        "text/plain",
        "positionY = Location : relative",
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let v = json(&body);
    assert_eq!(v["violations"][0]["rule"], "text_needs_discrete");
    assert_eq!(v["violations"][0]["attribute"], "Location");

    let (status, body) = call(&app, "POST", &uri, "text/plain", "\nscaleX Cost").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(json(&body)["line"], 2);
}

#[tokio::test]
async fn detail_cards() {
    let app = app();
    let id = upload(&app, samples::BLOOD_ANALYSIS).await.model_id;
    let (status, body) = call(
        &app,
        "GET",
        &format!("/models/{id}/nodes/a4"),
        "text/plain",
        "",
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    let card = json(&body);
    assert_eq!(card["label"], "Centrifugation");
    assert_eq!(card["arguments"].as_array().unwrap().len(), 5);
    assert_eq!(card["roles"], serde_json::json!(["Nurse"]));
    assert_eq!(card["services"], serde_json::json!([]));
    let (status, _) = call(
        &app,
        "GET",
        &format!("/models/{id}/nodes/zz"),
        "text/plain",
        "",
    )
    .await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn unknown_models_are_not_found() {
    let app = app();
    for (method, uri) in [
        ("GET", "/models/nope"),
        ("POST", "/models/nope/scene"),
        ("GET", "/models/nope/nodes/a1"),
    ] {
        let (status, body) = call(&app, method, uri, "text/plain", "").await;
        assert_eq!(status, StatusCode::NOT_FOUND, "{method} {uri}");
        assert!(json(&body)["error"].as_str().unwrap().contains("nope"));
    }
}

#[tokio::test]
async fn generate_endpoint() {
    let app = app();
    let (status, body) = call(
        &app,
        "POST",
        "/generate",
        "application/json",
        r#"{"nodes": 12, "control_flow_elements": 4, "arguments": 2, "seed": 5}"#,
    )
    .await;
    assert_eq!(status, StatusCode::CREATED);
    let created: Created = serde_json::from_slice(&body).unwrap();
    assert_eq!(created.summary.task_count, 12);
    assert_eq!(created.summary.origin, "generate");

    let (status, _) = call(
        &app,
        "POST",
        "/generate",
        "application/json",
        r#"{"nodes": 1, "cf": 3, "args": 0}"#,
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call(&app, "POST", "/generate", "application/json", "{").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn oversize_bodies_are_rejected() {
    let app = router(ServiceConfig {
        body_limit: 1024,
        ..ServiceConfig::default()
    });
    let big = format!("<description>{}</description>", "<call/>".repeat(400));
    let (status, _) = call(&app, "POST", "/models", "application/xml", big).await;
    assert_eq!(status, StatusCode::PAYLOAD_TOO_LARGE);
}

#[tokio::test]
async fn ui_is_served() {
    let (status, body) = call(&app(), "GET", "/ui", "text/plain", "").await;
    assert_eq!(status, StatusCode::OK);
    assert!(String::from_utf8(body).unwrap().contains("--ui-dir"));

    let dir = std::env::temp_dir().join(format!("pm3d-ui-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(dir.join("index.html"), "<h1>viewer</h1>").unwrap();
    let app = router(ServiceConfig {
        ui_dir: Some(dir.clone()),
        default_backdrop: BackdropKind::Grid,
        ..ServiceConfig::default()
    });
    let (status, body) = call(&app, "GET", "/ui/index.html", "text/plain", "").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, b"<h1>viewer</h1>");
    std::fs::remove_dir_all(dir).unwrap();
}

#[tokio::test]
async fn concurrent_requests_share_the_store() {
    let app = app();
    let id = upload(&app, samples::ORDER_PROCESS).await.model_id;
    let mut handles = Vec::new();
    for _ in 0..16 {
        let app = app.clone();
        let uri = format!("/models/{id}/scene");
        handles.push(tokio::spawn(async move {
            call(
                &app,
                "POST",
                &uri,
                "text/plain",
                "positionZ = Role : discrete",
            )
            .await
        }));
    }
    let mut bodies = Vec::new();
    for h in handles {
        let (status, body) = h.await.unwrap();
        assert_eq!(status, StatusCode::OK);
        bodies.push(body);
    }
    assert!(bodies.windows(2).all(|w| w[0] == w[1]));
}
