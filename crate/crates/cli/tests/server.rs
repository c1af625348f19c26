mod common;

use std::time::Duration;

use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use common::{case_dir, cli, fixture};
use cryptarg_cli::server::{router, AppState, ROUTES};

struct Reply {
    status: StatusCode,
    headers: axum::http::HeaderMap,
    body: String,
}

impl Reply {
    fn json(&self) -> Value {
        serde_json::from_str(&self.body).unwrap_or_else(|e| panic!("{e}: {}", self.body))
    }
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<String>) -> Reply {
    let mut req = Request::builder().method(method).uri(uri);
    if body.is_some() {
        req = req.header(header::CONTENT_TYPE, "application/json");
    }
    let req = req
        .body(body.map(Body::from).unwrap_or_else(Body::empty))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let headers = resp.headers().clone();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    Reply {
        status,
        headers,
        body: String::from_utf8(bytes.to_vec()).unwrap(),
    }
}

fn app(dir: &std::path::Path) -> (Router, AppState) {
    let state = AppState::new(dir, Duration::from_millis(200));
    (router(state.clone(), None), state)
}

fn answer_body(answer: &str, why: &str) -> Option<String> {
    Some(json!({"answer": answer, "justification": why}).to_string())
}

#[tokio::test]
async fn evaluation_and_answer_round_trip() {
    let dir = case_dir();
    let (app, _) = app(dir.path());

    let r = call(&app, "GET", "/api/cases/wsm-answered/evaluation", None).await;
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.json()["labelling"]["a-mi"], "IN");

    let uri = "/api/cases/wsm-answered/arguments/a-mi/cqs/cq1/answer";
    let r = call(
        &app,
        "POST",
        uri,
        answer_body("unfavourable", "equal outputs"),
    )
    .await;
    assert_eq!(r.status, StatusCode::OK, "{}", r.body);
    let v = r.json();
    assert_eq!(v["labelling"]["a-mi"], "OUT");
    assert_eq!(v["labelling"]["a-sw"], "OUT");

    // read-your-writes
    let again = call(&app, "GET", "/api/cases/wsm-answered/evaluation", None).await;
    assert_eq!(again.json(), v);
    let unfav = call(
        &app,
        "GET",
        "/api/cases/wsm-answered/cqs?status=unfavourable",
        None,
    )
    .await;
    let rows = unfav.json();
    assert_eq!(rows.as_array().unwrap().len(), 1);
    assert_eq!(rows[0]["justification"], "equal outputs");

    let report = call(&app, "GET", "/api/cases/wsm-answered/report", None).await;
    let entries = report.json()["entries"].clone();
    let mi = entries
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["statement"] == "controls(X, M:out1)")
        .unwrap()
        .clone();
    assert_eq!(mi["tier"], "defeated");
}

#[tokio::test]
async fn missing_things_are_404_with_a_body() {
    let dir = case_dir();
    let (app, _) = app(dir.path());
    for (method, uri, body) in [
        (
            "POST",
            "/api/cases/wsm/arguments/a-mi/cqs/cq9/answer",
            answer_body("favourable", "x"),
        ),
        (
            "POST",
            "/api/cases/wsm/arguments/nope/cqs/cq1/answer",
            answer_body("favourable", "x"),
        ),
        (
            "POST",
            "/api/cases/ghost/arguments/a-mi/cqs/cq1/answer",
            answer_body("favourable", "x"),
        ),
        ("GET", "/api/cases/ghost", None),
        ("GET", "/api/cases/ghost/report", None),
        ("GET", "/api/nothing/here", None),
    ] {
        let r = call(&app, method, uri, body).await;
        assert_eq!(r.status, StatusCode::NOT_FOUND, "{uri}");
        assert!(r.json()["error"].is_string(), "{uri}");
    }
    // the failed answer left the file alone
    let before = std::fs::read_to_string(fixture("wsm-case.json")).unwrap();
    assert_eq!(
        std::fs::read_to_string(dir.path().join("wsm.json")).unwrap(),
        before
    );
}

#[tokio::test]
async fn bad_requests_are_400() {
    let dir = case_dir();
    let (app, _) = app(dir.path());
    let uri = "/api/cases/wsm/arguments/a-mi/cqs/cq1/answer";
    assert_eq!(
        call(&app, "POST", uri, Some("{}".into())).await.status,
        StatusCode::BAD_REQUEST
    );
    assert_eq!(
        call(&app, "POST", uri, answer_body("maybe", ""))
            .await
            .status,
        StatusCode::BAD_REQUEST
    );
    let r = call(&app, "GET", "/api/cases/wsm/cqs?status=bogus", None).await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);
    assert!(r.json()["error"].is_string());
    let r = call(&app, "GET", "/api/cases/..%2Fetc/evaluation", None).await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);
    let r = call(&app, "GET", "/api/cases/wsm/report?format=pdf", None).await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn open_question_filter() {
    let dir = case_dir();
    let (app, _) = app(dir.path());
    let open = call(&app, "GET", "/api/cases/wsm/cqs?status=open", None)
        .await
        .json();
    let all = call(&app, "GET", "/api/cases/wsm/cqs", None).await.json();
    assert_eq!(open, all);
    let none = call(&app, "GET", "/api/cases/wsm-answered/cqs?status=open", None)
        .await
        .json();
    assert!(none.as_array().unwrap().is_empty());
}

#[tokio::test]
async fn creating_cases() {
    let dir = tempfile::tempdir().unwrap();
    let (app, _) = app(dir.path());
    assert!(call(&app, "GET", "/api/cases", None)
        .await
        .json()
        .as_array()
        .unwrap()
        .is_empty());

    let body = std::fs::read_to_string(fixture("wsm-case.json")).unwrap();
    let r = call(&app, "POST", "/api/cases", Some(body.clone())).await;
    assert_eq!(r.status, StatusCode::CREATED, "{}", r.body);
    assert_eq!(r.json()["case_id"], "wsm");
    assert_eq!(
        call(&app, "POST", "/api/cases", Some(body.clone()))
            .await
            .status,
        StatusCode::CONFLICT
    );
    assert_eq!(
        std::fs::read_to_string(dir.path().join("wsm.json")).unwrap(),
        body
    );

    let list = call(&app, "GET", "/api/cases", None).await.json();
    assert_eq!(list[0]["case_id"], "wsm");
    assert!(list[0]["open_cqs"].as_u64().unwrap() > 0);

    let bad = call(
        &app,
        "POST",
        "/api/cases",
        Some("{\"format_version\": 9}".into()),
    )
    .await;
    assert_eq!(bad.status, StatusCode::BAD_REQUEST);
    assert!(bad.json()["error"]
        .as_str()
        .unwrap()
        .contains("format_version"));
}

#[tokio::test]
async fn held_writer_lock_gives_503_with_retry_after() {
    let dir = case_dir();
    let (app, state) = app(dir.path());
    let lock = state.writer_lock("wsm");
    let guard = lock.lock().await;
    let uri = "/api/cases/wsm/arguments/a-mi/cqs/cq1/answer";
    let r = call(&app, "POST", uri, answer_body("favourable", "x")).await;
    assert_eq!(r.status, StatusCode::SERVICE_UNAVAILABLE);
    assert_eq!(r.headers[header::RETRY_AFTER], "1");
    // reads are not blocked by a writer
    assert_eq!(
        call(&app, "GET", "/api/cases/wsm/evaluation", None)
            .await
            .status,
        StatusCode::OK
    );
    drop(guard);
    assert_eq!(
        call(&app, "POST", uri, answer_body("favourable", "x"))
            .await
            .status,
        StatusCode::OK
    );
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_writers_queue() {
    let dir = case_dir();
    let state = AppState::new(dir.path(), Duration::from_secs(10));
    let app = router(state, None);
    let mut tasks = Vec::new();
    for (arg, cq) in [
        ("a-mi", "cq1"),
        ("a-mi", "cq2"),
        ("a-sw", "cq1"),
        ("a-pgp", "cq2"),
        ("a-susp", "cq2"),
    ] {
        let app = app.clone();
        let uri = format!("/api/cases/wsm/arguments/{arg}/cqs/{cq}/answer");
        tasks.push(tokio::spawn(async move {
            call(&app, "POST", &uri, answer_body("favourable", "checked"))
                .await
                .status
        }));
    }
    for t in tasks {
        assert_eq!(t.await.unwrap(), StatusCode::OK);
    }
    let rows = call(&app, "GET", "/api/cases/wsm/cqs?status=favourable", None)
        .await
        .json();
    assert_eq!(rows.as_array().unwrap().len(), 5);
}

#[tokio::test]
async fn formats_and_auto_instantiation() {
    let dir = case_dir();
    let (app, _) = app(dir.path());
    let apx = call(&app, "GET", "/api/cases/wsm/framework?format=apx", None).await;
    assert!(apx.body.starts_with("arg("));
    let md = call(&app, "GET", "/api/cases/wsm/report?format=md", None).await;
    assert!(md.headers[header::CONTENT_TYPE]
        .to_str()
        .unwrap()
        .starts_with("text/markdown"));
    assert!(md.body.contains("probable cause"));

    let lenient = call(
        &app,
        "GET",
        "/api/cases/wsm/evaluation?open_assumptions_attack=false",
        None,
    )
    .await;
    assert_eq!(lenient.json()["labelling"]["a-susp"], "IN");

    let clusters = call(&app, "GET", "/api/cases/wsm/clusters", None)
        .await
        .json();
    assert!(clusters["partition"]["merges"]
        .as_array()
        .unwrap()
        .iter()
        .any(|m| m["txid"] == "tx05"));

    let first = call(
        &app,
        "POST",
        "/api/cases/wsm-answered/auto-instantiate",
        None,
    )
    .await
    .json();
    assert!(!first["created"].as_array().unwrap().is_empty());
    let second = call(
        &app,
        "POST",
        "/api/cases/wsm-answered/auto-instantiate",
        None,
    )
    .await
    .json();
    assert!(second["created"].as_array().unwrap().is_empty());
    let args = call(&app, "GET", "/api/cases/wsm-answered/arguments", None)
        .await
        .json();
    assert_eq!(
        args.as_array().unwrap().len(),
        9 + first["created"].as_array().unwrap().len()
    );
}

#[tokio::test]
async fn ui_dir_is_served_statically() {
    let dir = case_dir();
    let ui = tempfile::tempdir().unwrap();
    std::fs::write(ui.path().join("index.html"), "<p>ui</p>").unwrap();
    let app = router(
        AppState::new(dir.path(), Duration::from_secs(1)),
        Some(ui.path().to_path_buf()),
    );
    let r = call(&app, "GET", "/index.html", None).await;
    assert_eq!(r.body, "<p>ui</p>");
    assert_eq!(
        call(&app, "GET", "/api/schemes", None).await.status,
        StatusCode::OK
    );
}

fn concrete(path: &str) -> String {
    path.replace("{id}", "wsm-answered")
        .replace("{arg}", "a-mi")
        .replace("{cq}", "cq1")
}

/// Every route answers on the fixture, and its subcommand exists and succeeds.
#[tokio::test]
async fn every_route_has_a_working_subcommand() {
    let names = cryptarg_cli::subcommand_names();
    let dir = case_dir();
    let (app, _) = app(dir.path());
    let case = dir.path().join("wsm-answered.json");
    let c = case.to_str().unwrap();
    let d = dir.path().to_str().unwrap();
    let new_case = dir.path().join("fresh.json");
    let chain = fixture("wsm-chain.json");

    for route in ROUTES {
        assert!(
            names.iter().any(|n| n == route.cli),
            "no subcommand `{}`",
            route.cli
        );
        let body = match (route.method, route.path) {
            ("POST", "/api/cases") => {
                let mut v: Value = serde_json::from_str(
                    &std::fs::read_to_string(fixture("wsm-case.json")).unwrap(),
                )
                .unwrap();
                v["case_id"] = json!("posted");
                Some(v.to_string())
            }
            ("POST", p) if p.ends_with("/answer") => answer_body("favourable", "checked"),
            _ => None,
        };
        let r = call(&app, route.method, &concrete(route.path), body).await;
        assert!(
            r.status.is_success(),
            "{} {} -> {} {}",
            route.method,
            route.path,
            r.status,
            r.body
        );

        let argv: Vec<&str> = match route.cli {
            "cases" => vec!["cases", "--case-dir", d],
            "ingest" => vec![
                "ingest",
                "--chain",
                chain.to_str().unwrap(),
                "--out",
                new_case.to_str().unwrap(),
            ],
            "cq list" => vec!["cq", "list", "--case", c, "--status", "open"],
            "cq answer" => vec![
                "cq",
                "answer",
                "--case",
                c,
                "--arg",
                "a-mi",
                "--cq",
                "cq1",
                "--answer",
                "favourable",
            ],
            "schemes" => vec!["schemes"],
            other => vec![other, "--case", c],
        };
        let out = cli(&argv);
        assert_eq!(out.code, 0, "{argv:?}: {}", out.err);
    }
}
