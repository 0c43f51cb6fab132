#![allow(dead_code)]

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

/// Two small chromosomes. T1: p11 [0,4M), q11 [4M,7M), q12.1/q12.2 [7M,10M).
pub const BANDS: &str = "\
chrT1\t0\t4000000\tp11\tgneg
chrT1\t4000000\t7000000\tq11\tgpos50
chrT1\t7000000\t8500000\tq12.1\tgneg
chrT1\t8500000\t10000000\tq12.2\tgpos25
chrT2\t0\t2000000\tp11\tacen
chrT2\t2000000\t6000000\tq11\tgneg
";

pub const GENES: &str = "\
chrom\tstart\tend\tstrand\tsymbol
T1\t1001\t5000\t+\tA1
T1\t2001\t6000\t+\tA2
T1\t4000101\t4001000\t-\tB1
T1\t7000101\t7005000\t+\tG1
T1\t7200001\t7300000\t-\tG2
T1\t7400001\t7500000\t+\tG3
T2\t2500001\t2600000\t+\tH1
";

pub const PHENOTYPES: &str = "\
phenotype,color,symbol
Alpha,#e41a1c,A1
Alpha,#e41a1c,G1
Beta,#377EB8,G2
";

pub fn multipart(fields: &[(&str, &str)]) -> (String, Vec<u8>) {
    let boundary = "foldscopeboundary";
    let mut body = Vec::new();
    for (name, text) in fields {
        body.extend_from_slice(
            format!("--{boundary}\r\nContent-Disposition: form-data; name=\"{name}\"; filename=\"{name}\"\r\nContent-Type: text/plain\r\n\r\n{text}\r\n").as_bytes(),
        );
    }
    body.extend_from_slice(format!("--{boundary}--\r\n").as_bytes());
    (format!("multipart/form-data; boundary={boundary}"), body)
}

pub async fn send(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header("content-type", "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into_owned()))
    };
    (status, value)
}

pub async fn send_raw(app: &Router, method: Method, uri: &str, content_type: &str, body: Vec<u8>) -> (StatusCode, Vec<u8>) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", content_type)
        .body(Body::from(body))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    (status, resp.into_body().collect().await.unwrap().to_bytes().to_vec())
}

pub async fn upload(app: &Router, query: &str) -> (StatusCode, Value) {
    let (ct, body) = multipart(&[("cytobands", BANDS), ("genes", GENES), ("phenotypes", PHENOTYPES)]);
    let (status, bytes) = send_raw(app, Method::POST, &format!("/assemblies{query}"), &ct, body).await;
    (status, serde_json::from_slice(&bytes).unwrap())
}

/// Upload the toy assembly and open a session on it.
pub async fn session(app: &Router) -> String {
    let (status, report) = upload(app, "").await;
    assert_eq!(status, StatusCode::CREATED, "{report}");
    let (status, s) = send(
        app,
        Method::POST,
        "/sessions",
        Some(serde_json::json!({ "assembly_id": report["assembly_id"] })),
    )
    .await;
    assert_eq!(status, StatusCode::CREATED);
    s["session_id"].as_str().unwrap().to_string()
}
