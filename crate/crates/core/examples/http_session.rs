//! Drive one interactive session through the HTTP router in process:
//! upload, anchors, preview, close, parameters, compute, segment, export.

use axum::body::Body;
use axum::http::{Method, Request};
use base64::Engine;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use lumbarfat::api::http::{router, AppState};
use lumbarfat::raster;
use lumbarfat::store::RecordStore;
use lumbarfat::synth::{axial_phantom, PhantomSpec};

async fn call(app: &axum::Router, method: Method, uri: &str, body: Value) -> (u16, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .expect("request");
    let res = app.clone().oneshot(req).await.expect("infallible");
    let status = res.status().as_u16();
    let bytes = res.into_body().collect().await.expect("body").to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

#[tokio::main]
async fn main() -> lumbarfat::Result<()> {
    let dir = std::env::temp_dir().join(format!("lumbarfat_http_{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let app = router(AppState::new(RecordStore::open(dir.join("results.csv"))?, None));

    let phantom = axial_phantom(&PhantomSpec::default());
    let png = base64::engine::general_purpose::STANDARD.encode(raster::encode_png(&phantom.image)?);
    let meta = json!({"patient_id": "P03", "slice_label": "L4L5", "pixel_spacing_mm": [0.7, 0.7]});
    let (status, created) = call(&app, Method::POST, "/sessions", json!({"image_png": png, "meta": meta})).await;
    println!("POST /sessions -> {status} {created}");
    let base = format!("/sessions/{}", created["session_id"].as_str().unwrap_or_default());

    let step = phantom.es_right.len() / 6;
    for i in 0..6 {
        let (x, y) = phantom.es_right[i * step];
        let (status, body) = call(&app, Method::POST, &format!("{base}/anchors"), json!({"x": x, "y": y})).await;
        println!("anchor ({x}, {y}) -> {status}, {} anchors", body["anchors"]);
    }
    let (x, y) = phantom.es_right[0];
    let (status, body) = call(&app, Method::GET, &format!("{base}/preview?x={x}&y={y}"), Value::Null).await;
    println!("preview -> {status}, {} path pixels", body["path"].as_array().map_or(0, Vec::len));

    let (status, body) = call(&app, Method::POST, &format!("{base}/close"), Value::Null).await;
    println!("close -> {status}, {} pixels, ROI Otsu {}", body["n_pixels"], body["roi_otsu_threshold"]);
    let (status, body) = call(&app, Method::PATCH, &format!("{base}/params"), json!({"softness": 0.3})).await;
    println!("params -> {status} {}", body["params"]);
    let (status, body) = call(&app, Method::POST, &format!("{base}/compute"), Value::Null).await;
    println!("compute -> {status} {}", body["rounded"]);
    let (status, body) = call(&app, Method::POST, &format!("{base}/segment"), json!({"label": "ES-right"})).await;
    println!("segment -> {status} centre {}", body["spine_center"]);
    let (status, body) =
        call(&app, Method::POST, &format!("{base}/export"), json!({"label": "ES-right", "phase": "pre"})).await;
    println!("export -> {status} {}", body["csv_row"]);

    let (status, body) = call(&app, Method::POST, "/sessions/nope/close", Value::Null).await;
    println!("unknown session -> {status} {body}");
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
