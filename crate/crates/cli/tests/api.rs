use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use qloan_cli::service::router;

async fn call(method: &str, uri: &str, body: Option<&str>) -> (StatusCode, Value) {
    let request = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map(|b| Body::from(b.to_string())).unwrap_or_else(Body::empty))
        .unwrap();
    let response = router(false).oneshot(request).await.unwrap();
    let status = response.status();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap())
}

fn german2() -> Value {
    json!({"d0": 100.0, "M": 2, "rate": {"constant": 0.2}, "system": "german"})
}

#[tokio::test]
async fn health() {
    let (status, body) = call("GET", "/api/health", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, json!({"status": "ok"}));
}

#[tokio::test]
async fn rotate_quarter_turn() {
    let req = json!({"loan": german2(), "rotation": {"dim": 2, "angles": [std::f64::consts::FRAC_PI_4]}});
    let (status, body) = call("POST", "/api/rotate", Some(&req.to_string())).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    for v in body["rotated"]["q_bar"].as_array().unwrap() {
        assert!((v.as_f64().unwrap() - 65.0).abs() < 1e-12);
    }
    assert_eq!(body["invariants"]["trace_q_preserved"], true);
    assert_eq!(body["invariants"]["trace_q"], 130.0);
}

#[tokio::test]
async fn indexed_rotation_uses_currency_installments() {
    let req = json!({
        "loan": {"d0": 100.0, "M": 2, "rate": {"constant": 0.2}, "system": "french"},
        "rotation": {"dim": 2, "angles": [std::f64::consts::FRAC_PI_4]},
        "index": {"geometric": {"a": 1.1, "u1": 1.0}}
    });
    let (status, body) = call("POST", "/api/rotate", Some(&req.to_string())).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    let q1 = body["q"][0].as_f64().unwrap();
    let qb = body["rotated"]["q_bar"][0].as_f64().unwrap();
    assert!((qb / q1 - 1.05).abs() < 1e-12);
}

#[tokio::test]
async fn schedule_and_algebra() {
    let req = json!({"loan": {"d0": 100.0, "M": 10, "rate": {"constant": 0.2}, "system": "french"}});
    let (status, body) = call("POST", "/api/schedule", Some(&req.to_string())).await;
    assert_eq!(status, StatusCode::OK);
    assert!((body["schedule"]["q"][0].as_f64().unwrap() - 23.852275688285914).abs() < 1e-12);
    assert!(body["invariants"]["d_M"].as_f64().unwrap().abs() < 1e-9);

    let req = json!({"loan": {"d0": 100.0, "M": 5, "rate": {"constant": 0.2}, "system": "german"}});
    let (status, body) = call("POST", "/api/verify-algebra", Some(&req.to_string())).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["all_pass"], true);
    assert_eq!(body["relations"].as_array().unwrap().len(), 17);
}

#[tokio::test]
async fn design_errors_and_success() {
    let req = json!({"loan": german2(), "objective": {"target_schedule": [65.0, 66.0]}});
    let (status, body) = call("POST", "/api/design", Some(&req.to_string())).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["error"]["code"], "trace_mismatch");

    let req = json!({"loan": german2(), "objective": {"target_schedule": [75.0, 55.0]}});
    let (status, body) = call("POST", "/api/design", Some(&req.to_string())).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["error"]["code"], "convexity_violation");

    let req = json!({"loan": german2(), "objective": "equalize"});
    let (status, body) = call("POST", "/api/design", Some(&req.to_string())).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["solution"]["status"], "optimal");
    assert_eq!(body["invariants"]["trace_q_preserved"], true);
}

#[tokio::test]
async fn region_grid() {
    let req = json!({"z": 0.6, "inflation": 1.05, "pattern": "--+", "grid_n": 21});
    let (status, body) = call("POST", "/api/region", Some(&req.to_string())).await;
    assert_eq!(status, StatusCode::OK);
    assert!(body["count"].as_u64().unwrap() > 0);
    assert_eq!(body["feasible"].as_array().unwrap().len(), 21);

    let req = json!({"pattern": "-?+"});
    let (status, body) = call("POST", "/api/region", Some(&req.to_string())).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"]["code"], "invalid_pattern");
}

#[tokio::test]
async fn malformed_requests() {
    let (status, body) = call("POST", "/api/schedule", Some("{not json")).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"]["code"], "malformed_json");

    let req = json!({"loan": {"d0": -1.0, "M": 2, "rate": {"constant": 0.2}, "system": "french"}});
    let (status, body) = call("POST", "/api/schedule", Some(&req.to_string())).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"]["code"], "invalid_spec");

    let req = json!({"loan": german2(), "rotation": {"dim": 3, "angles": [0.1, 0.2, 0.3]}});
    let (status, body) = call("POST", "/api/rotate", Some(&req.to_string())).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"]["code"], "dimension_mismatch");

    let (status, _) = call("GET", "/api/nowhere", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn concurrent_requests_match_serial() {
    let req = json!({"loan": {"d0": 100.0, "M": 5, "rate": {"constant": 0.2}, "system": "german"}, "objective": "equalize"})
        .to_string();
    let (_, serial) = call("POST", "/api/design", Some(&req)).await;
    let handles: Vec<_> = (0..8)
        .map(|_| {
            let req = req.clone();
            tokio::spawn(async move { call("POST", "/api/design", Some(&req)).await.1 })
        })
        .collect();
    for h in handles {
        assert_eq!(h.await.unwrap(), serial);
    }
}
