mod common;

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use common::{fixture, read_fixture};
use http_body_util::BodyExt;
use renewcast::api::{router, SessionCatalog};
use serde_json::{json, Value};
use tower::ServiceExt;

fn catalog() -> Arc<SessionCatalog> {
    Arc::new(SessionCatalog::load(Some(&fixture("models")), Some(&fixture("specs"))).unwrap())
}

async fn call(req: Request<Body>) -> (StatusCode, String) {
    let resp = router(catalog(), None).oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

async fn get(uri: &str) -> (StatusCode, Value) {
    let (s, body) = call(Request::get(uri).body(Body::empty()).unwrap()).await;
    (s, serde_json::from_str(&body).unwrap())
}

async fn post_raw(uri: &str, body: impl Into<Body>) -> (StatusCode, String) {
    call(
        Request::post(uri)
            .header("content-type", "application/json")
            .body(body.into())
            .unwrap(),
    )
    .await
}

async fn post(uri: &str, body: &Value) -> (StatusCode, Value) {
    let (s, text) = post_raw(uri, body.to_string()).await;
    (s, serde_json::from_str(&text).unwrap())
}

#[tokio::test]
async fn health() {
    let (s, v) = get("/api/health").await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["status"], "ok");
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["models"], 1);
    assert_eq!(v["specs"], 2);
}

#[tokio::test]
async fn models_listing() {
    let (s, v) = get("/api/models").await;
    assert_eq!(s, StatusCode::OK);
    let m = &v["models"][0];
    assert_eq!(m["id"], "testland");
    assert_eq!(m["targets"], json!(["RNCAP"]));
    assert_eq!(m["last_observed"], "2021-12");
    assert_eq!(m["schema"]["determinants"].as_array().unwrap().len(), 4);
}

#[tokio::test]
async fn specs_are_materialized() {
    let (_, v) = get("/api/specs").await;
    assert_eq!(v["specs"], json!(["testland_capacity", "testland_inline"]));
    let (s, spec) = get("/api/specs/testland_capacity").await;
    assert_eq!(s, StatusCode::OK);
    assert!(spec["totals"].is_array());
    assert_eq!(spec["baseline"]["determinants"]["start"], "2022-01");
    let (s, v) = get("/api/specs/nope").await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_eq!(v["error"]["kind"], "unknown_spec");
}

#[tokio::test]
async fn scorecards() {
    let (_, v) = get("/api/scorecards").await;
    assert_eq!(v["scorecards"].as_array().unwrap().len(), 6);
    let (s, v) = get("/api/scorecards/london/ceiling").await;
    assert_eq!(s, StatusCode::OK);
    assert!((v["factor"].as_f64().unwrap() - 0.85).abs() < 1e-12);
    assert_eq!(v["display"], "0.850");
    assert_eq!(v["violations"], json!([]));
    assert_eq!(v["scorecard"]["region"], "London");
    let (s, v) = get("/api/scorecards/atlantis/ceiling").await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_eq!(v["error"]["kind"], "unknown_scorecard");
    let (s, _) = get("/api/scorecards/london/height").await;
    assert_eq!(s, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn factor_endpoint() {
    let (_, card) = get("/api/scorecards/singapore/ceiling").await;
    let mut card = card["scorecard"].clone();
    let (s, v) = post("/api/factor", &card).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["display"], "0.504");

    let first = card["indices"][0]["id"].as_str().unwrap().to_string();
    card["entries"][first.as_str()] = json!(60.0);
    let (s, v) = post("/api/factor", &card).await;
    assert_eq!(s, StatusCode::OK);
    assert!(v["factor"].is_null());
    assert_eq!(v["violations"].as_array().unwrap().len(), 1);

    let (s, text) = post_raw("/api/factor", "").await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert!(text.contains("malformed_request"));
    let (s, _) = post_raw("/api/factor", "{\"region\":").await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn scenario_endpoint_matches_cli() {
    for id in ["testland_capacity", "testland_inline"] {
        let (_, spec) = get(&format!("/api/specs/{id}")).await;
        let (s, body) = post_raw("/api/scenario", spec.to_string()).await;
        assert_eq!(s, StatusCode::OK, "{body}");
        let cli = std::process::Command::new(env!("CARGO_BIN_EXE_renewcast"))
            .args(["scenario", "--format", "json", "--spec"])
            .arg(fixture(&format!("specs/{id}.json")))
            .output()
            .unwrap();
        assert_eq!(body, String::from_utf8(cli.stdout).unwrap(), "{id}");
    }
}

#[tokio::test]
async fn scenario_errors() {
    let (s, text) = post_raw("/api/scenario", "   ").await;
    assert_eq!(s, StatusCode::BAD_REQUEST, "{text}");

    let mut doc: Value = serde_json::from_str(&read_fixture("specs/testland_inline.json")).unwrap();
    doc["schema_version"] = json!(9);
    let (s, _) = post("/api/scenario", &doc).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);

    let mut doc: Value = serde_json::from_str(&read_fixture("specs/testland_inline.json")).unwrap();
    doc["totals"][0]["value"] = json!(500.0);
    let (s, v) = post("/api/scenario", &doc).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["error"]["kind"], "infeasible_anchor");

    let (_, spec) = get("/api/specs/testland_capacity").await;
    let mut doc = spec.clone();
    doc["baseline"]["model"] = json!("elsewhere");
    let (s, v) = post("/api/scenario", &doc).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_eq!(v["error"]["kind"], "unknown_model");

    let mut doc = spec;
    doc["baseline"]["determinants"] = json!({ "file": "future.csv" });
    let (s, v) = post("/api/scenario", &doc).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(v["error"]["message"].as_str().unwrap().contains("command line"));

    let mut doc: Value = serde_json::from_str(&read_fixture("specs/testland_inline.json")).unwrap();
    doc["surprise"] = json!(1);
    let (s, _) = post("/api/scenario", &doc).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn static_fallback() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("index.html"), "<p>explorer</p>").unwrap();
    let app = router(catalog(), Some(dir.path()));
    let resp = app
        .clone()
        .oneshot(Request::get("/index.html").body(Body::empty()).unwrap())
        .await
        .unwrap();
    assert_eq!(resp.status(), StatusCode::OK);
    let body = resp.into_body().collect().await.unwrap().to_bytes();
    assert_eq!(&body[..], b"<p>explorer</p>");
    let resp = app
        .oneshot(Request::get("/api/health").body(Body::empty()).unwrap())
        .await
        .unwrap();
    assert_eq!(resp.status(), StatusCode::OK);
}

#[tokio::test]
async fn zero_intensity_policy_equals_baseline() {
    let mut doc: Value = serde_json::from_str(&read_fixture("specs/testland_inline.json")).unwrap();
    doc["intensity"] = json!({ "explicit": { "f_c": 0.0, "f_p": 0.0 } });
    let (s, v) = post("/api/scenario", &doc).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["report"]["policy"]["values"], v["report"]["baseline"]["values"]);
    assert_eq!(v["report"]["policy"]["shares"], v["report"]["baseline"]["shares"]);
}

#[tokio::test]
async fn target_above_optimal_is_flagged() {
    let mut doc: Value = serde_json::from_str(&read_fixture("specs/testland_inline.json")).unwrap();
    doc["gap_target"] = json!(950.0);
    let (s, v) = post("/api/scenario", &doc).await;
    assert_eq!(s, StatusCode::OK);
    let gap = &v["report"]["gap"];
    assert_eq!(gap["required_f_c"]["envelope"], "above_optimal");
    assert_eq!(gap["required_f_p"]["envelope"], "unreachable");
}

#[tokio::test]
async fn factor_for_london_speed_and_bad_weights() {
    let (_, card) = get("/api/scorecards/london/speed").await;
    let mut card = card["scorecard"].clone();
    let (_, v) = post("/api/factor", &card).await;
    assert_eq!(v["display"], "0.764");
    let w = card["indices"][0]["weight"].as_f64().unwrap();
    card["indices"][0]["weight"] = json!(w - 0.1);
    let (s, v) = post("/api/factor", &card).await;
    assert_eq!(s, StatusCode::OK);
    assert!(v["factor"].is_null());
    assert!(v["violations"].to_string().contains("weight"), "{v}");
}

#[tokio::test]
async fn served_scorecard_passes_cli_validation() {
    let (_, v) = get("/api/scorecards/singapore/ceiling").await;
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("exported.json");
    std::fs::write(&file, v["scorecard"].to_string()).unwrap();
    let o = std::process::Command::new(env!("CARGO_BIN_EXE_renewcast"))
        .args(["score", "--report", "--card"])
        .arg(&file)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("validation: ok") && text.ends_with("0.504\n"), "{text}");
}
