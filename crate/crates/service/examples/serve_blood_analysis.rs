//! Start the service with a grid backdrop, upload the blood-analysis model
//! through the router and print its id. The server then keeps running.
//!
//! `cargo run -p pm3d-service --example serve_blood_analysis`

use axum::body::{to_bytes, Body};
use axum::http::Request;
use pm3d_core::samples;
use pm3d_core::scene::BackdropKind;
use pm3d_service::{router, serve_on, ServiceConfig};
use tower::ServiceExt;

#[tokio::main]
async fn main() -> std::io::Result<()> {
    let config = ServiceConfig {
        default_backdrop: BackdropKind::Grid,
        ..ServiceConfig::default()
    };

    // in-process request, no socket needed
    let app = router(config.clone());
    let resp = app
        .oneshot(
            Request::post("/models")
                .body(Body::from(samples::BLOOD_ANALYSIS))
                .unwrap(),
        )
        .await
        .unwrap();
    let body = to_bytes(resp.into_body(), usize::MAX).await.unwrap();
    println!("in-process upload: {}", String::from_utf8_lossy(&body));

    let listener = tokio::net::TcpListener::bind("127.0.0.1:8080").await?;
    println!(
        "serving on http://{}; try POST /models",
        listener.local_addr()?
    );
    serve_on(listener, config).await
}
