mod common;

use axum::http::{Method, StatusCode};
use common::{send, send_raw, session, upload};
use foldscope_core::metrics::exploration_percentage;
use foldscope_core::{EventLog, InsetPage};
use foldscope_service::{router, Store};
use serde_json::json;

#[tokio::test]
async fn upload_reports_and_lists_chromosomes() {
    let app = router(Store::in_memory());
    let (status, report) = upload(&app, "?name=toy&id=toy").await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(report["assembly_id"], "toy");
    assert_eq!(report["chromosomes"], 2);
    assert_eq!(report["genes"], 7);
    assert_eq!(report["phenotypes"], 2);
    let (status, body) = send(&app, Method::GET, "/assemblies/toy/chromosomes", None).await;
    assert_eq!(status, StatusCode::OK);
    let t1 = &body["chromosomes"][0];
    assert_eq!(t1["id"], "T1");
    assert_eq!(t1["length_bp"], 10_000_000);
    let names: Vec<&str> = t1["regions"].as_array().unwrap().iter().map(|r| r["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["p11", "q11", "q12"]);
    assert_eq!(t1["regions"][2]["gene_count"], 3);
    assert_eq!(t1["regions"][2]["markers"], json!(["Alpha", "Beta"]));
    let (status, _) = send(&app, Method::GET, "/assemblies/nope/chromosomes", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn parse_errors_carry_line_numbers() {
    let app = router(Store::in_memory());
    let bad_genes = common::GENES.replace("T1\t2001\t6000\t+\tA2", "T1\t2001\t6000\t*\tA2");
    let (ct, body) = common::multipart(&[("cytobands", common::BANDS), ("genes", &bad_genes)]);
    let (status, bytes) = send_raw(&app, Method::POST, "/assemblies", &ct, body.clone()).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let err: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(err["error"], "parse_error");
    assert_eq!(err["line"], 3);
    assert_eq!(err["detail"]["kind"], "bad_strand");

    let (status, bytes) = send_raw(&app, Method::POST, "/assemblies?mode=lenient", &ct, body).await;
    assert_eq!(status, StatusCode::CREATED);
    let report: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(report["genes"], 6);
    assert_eq!(report["skipped"][0]["line"], 3);

    let gap = common::BANDS.replace("chrT2\t2000000", "chrT2\t2500000");
    let (ct, body) = common::multipart(&[("cytobands", &gap), ("genes", common::GENES)]);
    let (status, bytes) = send_raw(&app, Method::POST, "/assemblies?mode=lenient", &ct, body).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let err: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(err["detail"]["kind"], "gap_detected");
    assert_eq!(err["line"], 6);

    let (ct, body) = common::multipart(&[("genes", common::GENES)]);
    let (status, _) = send_raw(&app, Method::POST, "/assemblies", &ct, body).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn fold_is_idempotent_and_validated() {
    let app = router(Store::in_memory());
    let sid = session(&app).await;
    let fold = |verb: &str, target: &str| json!({ "chromosome": "T1", "verb": verb, "target": target });
    let uri = format!("/sessions/{sid}/fold");
    let (s1, first) = send(&app, Method::POST, &uri, Some(fold("open", "q11"))).await;
    let (s2, second) = send(&app, Method::POST, &uri, Some(fold("open", "q11"))).await;
    assert_eq!((s1, s2), (StatusCode::OK, StatusCode::OK));
    assert_eq!(first, second);
    let (_, layout) = send(&app, Method::GET, &format!("/sessions/{sid}/layout/T1"), None).await;
    assert_eq!(layout, second);

    let (status, err) = send(&app, Method::POST, &uri, Some(fold("open_sub", "q12.1"))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(err["error"], "parent_not_open");

    let (_, compressed) = send(&app, Method::POST, &uri, Some(fold("compress", "q11"))).await;
    assert_eq!(compressed["total_length"], 7.5);
    assert_eq!(compressed["leaves"][1]["kind"], "compressed_region");

    let (status, _) = send(&app, Method::POST, &uri, Some(fold("open", "q99"))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, err) = send(&app, Method::POST, &uri, Some(fold("explode", "q11"))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(err["error"], "invalid_json");
    let (status, _) = send(&app, Method::POST, "/sessions/missing/fold", Some(fold("open", "q11"))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    let (status, svg) = send(&app, Method::GET, &format!("/sessions/{sid}/layout/T1?format=svg"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert!(svg.as_str().unwrap().starts_with("<svg"));
}

#[tokio::test]
async fn locked_inset_refuses_frame_changes() {
    let app = router(Store::in_memory());
    let sid = session(&app).await;
    let (status, inset) = send(
        &app,
        Method::POST,
        &format!("/sessions/{sid}/insets"),
        Some(json!({ "chromosome": "T1", "start": 3_000_000, "end": 8_000_000 })),
    )
    .await;
    assert_eq!(status, StatusCode::CREATED);
    let iid = inset["id"].as_u64().unwrap();
    let uri = format!("/sessions/{sid}/insets/{iid}");
    let (status, locked) = send(&app, Method::PATCH, &uri, Some(json!({ "locked": true }))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(locked["locked"], true);
    let frame = json!({ "frame": { "x": 500.0, "y": -20.0, "width": 30.0, "height": 30.0 } });
    let (status, err) = send(&app, Method::PATCH, &uri, Some(frame.clone())).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(err["error"], "inset_locked");
    let (_, after) = send(&app, Method::GET, &uri, None).await;
    assert_eq!(after, locked);

    send(&app, Method::PATCH, &uri, Some(json!({ "locked": false }))).await;
    let (status, moved) = send(&app, Method::PATCH, &uri, Some(frame)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(moved["frame"]["x"], 500.0);

    let (status, _) = send(&app, Method::PATCH, &uri, Some(json!({ "toggle_region": "q12" }))).await;
    assert_eq!(status, StatusCode::OK);
    let (status, page) = send(&app, Method::GET, &format!("{uri}/content?rows=3"), None).await;
    assert_eq!(status, StatusCode::OK);
    let page: InsetPage = serde_json::from_value(page).unwrap();
    assert_eq!(page.total, 3 + 3);
    assert_eq!(page.entries.len(), 3);
    let (_, scrolled) = send(&app, Method::PATCH, &uri, Some(json!({ "scroll": 99 }))).await;
    assert_eq!(scrolled["scroll_offset"], 5);
    let (status, err) = send(&app, Method::PATCH, &uri, Some(json!({ "toggle_region": "p11" }))).await;
    assert_eq!(status, StatusCode::OK, "{err}");
    let (status, err) = send(&app, Method::PATCH, &uri, Some(json!({ "scope": { "start": 0, "end": 0 } }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST, "{err}");
    let (status, _) = send(&app, Method::PATCH, &format!("/sessions/{sid}/insets/77"), Some(json!({ "locked": true }))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn metrics_equal_engine_computation() {
    let app = router(Store::in_memory());
    let sid = session(&app).await;
    let events = json!({ "events": [
        { "t_ms": 100, "kind": "scope_query", "chrom": "T1", "start": 0, "end": 5_000_000 },
        { "t_ms": 900, "kind": "compress", "chrom": "T1", "start": 5_000_000, "end": 10_000_000 },
        { "t_ms": 1500, "kind": "region_open", "chrom": "T1", "start": 4_000_000, "end": 7_000_000 },
        { "t_ms": 1600, "kind": "scope_query", "chrom": "T2", "start": 0, "end": 6_000_000 }
    ]});
    let (status, appended) = send(&app, Method::POST, &format!("/sessions/{sid}/events"), Some(events.clone())).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(appended["total"], 4);
    let (_, report) = send(&app, Method::GET, &format!("/sessions/{sid}/metrics?chromosome=T1"), None).await;
    let log = EventLog::from_events(serde_json::from_value(events["events"].clone()).unwrap()).unwrap();
    let expected = exploration_percentage(&log.for_chromosome("T1"), 10_000_000).unwrap();
    assert_eq!(report["exploration"].as_f64().unwrap(), expected);
    assert_eq!(expected, 0.7);
    assert_eq!(report["events"], 3);

    let stale = json!({ "events": [{ "t_ms": 5, "kind": "scope_query", "chrom": "T1", "start": 0, "end": 1 }] });
    let (status, _) = send(&app, Method::POST, &format!("/sessions/{sid}/events"), Some(stale)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let outside = json!({ "events": [{ "t_ms": 2000, "kind": "scope_query", "chrom": "T1", "start": 0, "end": 10_000_001 }] });
    let (status, _) = send(&app, Method::POST, &format!("/sessions/{sid}/events"), Some(outside)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (_, all) = send(&app, Method::GET, &format!("/sessions/{sid}/events"), None).await;
    assert_eq!(all.as_array().unwrap().len(), 4);
}

#[tokio::test]
async fn task_answer_flow() {
    let app = router(Store::in_memory());
    let sid = session(&app).await;
    let (status, task) = send(&app, Method::POST, &format!("/sessions/{sid}/tasks"), Some(json!({ "kind": "identify", "seed": 3 }))).await;
    assert_eq!(status, StatusCode::CREATED, "{task}");
    let chrom = task["spec"]["chromosome_id"].as_str().unwrap().to_string();
    let (status, second) = send(&app, Method::POST, &format!("/sessions/{sid}/tasks"), Some(json!({ "kind": "identify", "seed": 3 }))).await;
    if status == StatusCode::CREATED {
        assert_ne!(second["spec"]["chromosome_id"].as_str().unwrap(), chrom);
    } else {
        assert_eq!(second["error"], "no_feasible_task");
    }
    let task_id = task["id"].as_u64().unwrap();
    let assembly = {
        let (_, body) = send(&app, Method::GET, &format!("/sessions/{sid}"), None).await;
        body["header"]["assembly_id"].as_str().unwrap().to_string()
    };
    let (_, chroms) = send(&app, Method::GET, &format!("/assemblies/{assembly}/chromosomes"), None).await;
    let target = task["spec"]["target_gene_count"].as_u64().unwrap();
    let region = chroms["chromosomes"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["id"] == chrom.as_str())
        .unwrap()["regions"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["gene_count"].as_u64() == Some(target))
        .unwrap()
        .clone();
    let hit = json!({ "events": [{
        "t_ms": 26_760, "kind": "scope_query", "chrom": chrom,
        "start": region["span"]["start"], "end": region["span"]["end"]
    }]});
    send(&app, Method::POST, &format!("/sessions/{sid}/events"), Some(hit)).await;
    let answer = json!({ "task_id": task_id, "t_ms": 30_000, "answer": { "kind": "identify", "region": region["name"] } });
    let (status, answered) = send(&app, Method::POST, &format!("/sessions/{sid}/answer"), Some(answer.clone())).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(answered["correct"], true);
    let (status, _) = send(&app, Method::POST, &format!("/sessions/{sid}/answer"), Some(answer)).await;
    assert_eq!(status, StatusCode::CONFLICT);
    let (_, report) = send(&app, Method::GET, &format!("/sessions/{sid}/metrics?task={task_id}"), None).await;
    assert_eq!(report["targets"][0]["time_to_first_hit_ms"], 26_760);
    let wrong = json!({ "task_id": task_id, "t_ms": 40_000, "answer": { "kind": "summarize", "phenotype": "Alpha" } });
    let (status, _) = send(&app, Method::POST, &format!("/sessions/{sid}/answer"), Some(wrong)).await;
    assert_eq!(status, StatusCode::CONFLICT);
    let (status, _) = send(&app, Method::GET, &format!("/sessions/{sid}/metrics?task=42"), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn sessions_are_isolated() {
    let app = router(Store::in_memory());
    let a = session(&app).await;
    let b = session(&app).await;
    let (_, before) = send(&app, Method::GET, &format!("/sessions/{b}"), None).await;
    send(&app, Method::POST, &format!("/sessions/{a}/fold"), Some(json!({ "chromosome": "T1", "verb": "open", "target": "q12" }))).await;
    send(&app, Method::POST, &format!("/sessions/{a}/insets"), Some(json!({ "chromosome": "T1", "start": 0, "end": 10 }))).await;
    let (_, after) = send(&app, Method::GET, &format!("/sessions/{b}"), None).await;
    assert_eq!(before, after);
    let (_, la) = send(&app, Method::GET, &format!("/sessions/{a}/layout/T1"), None).await;
    let (_, lb) = send(&app, Method::GET, &format!("/sessions/{b}/layout/T1"), None).await;
    assert_ne!(la, lb);
}
