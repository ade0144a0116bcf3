//! The batch client against an in-process mock of the scoring service.

use std::net::SocketAddr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use fuzzprobe_core::scoring::{batch_count, check_health, score_remote, RemoteConfig};
use fuzzprobe_core::stimuli::{generate_dataset, StimulusConfig, StimulusPair};
use fuzzprobe_core::Error;
use serde_json::{json, Value};

#[derive(Clone, Copy)]
enum Mode {
    Echo,
    /// 503 for the first n requests, then echo.
    FailFirst(usize),
    AlwaysFail,
    BadSum,
    ShortRows,
    BadRequest,
}

struct Mock {
    mode: Mode,
    requests: AtomicUsize,
    largest_batch: AtomicUsize,
    seen: Mutex<Vec<usize>>,
}

/// Deterministic stand-in for a model: a function of the two texts only.
fn fake_entailment(premise: &str, hypothesis: &str) -> f64 {
    let h = premise.bytes().chain(hypothesis.bytes()).fold(17u64, |acc, b| acc.wrapping_mul(31).wrapping_add(b as u64));
    (h % 1000) as f64 / 1000.0
}

async fn score(State(mock): State<Arc<Mock>>, Json(body): Json<Value>) -> Response {
    let n = mock.requests.fetch_add(1, Ordering::SeqCst);
    let pairs = body["pairs"].as_array().cloned().unwrap_or_default();
    mock.largest_batch.fetch_max(pairs.len(), Ordering::SeqCst);
    mock.seen.lock().unwrap().push(pairs.len());
    match mock.mode {
        Mode::AlwaysFail => return (StatusCode::SERVICE_UNAVAILABLE, "overloaded").into_response(),
        Mode::FailFirst(k) if n < k => return (StatusCode::SERVICE_UNAVAILABLE, "warming up").into_response(),
        Mode::BadRequest => return (StatusCode::BAD_REQUEST, "bad input").into_response(),
        _ => {}
    }
    let mut rows: Vec<Value> = pairs
        .iter()
        .map(|p| {
            let e = fake_entailment(p["premise"].as_str().unwrap(), p["hypothesis"].as_str().unwrap());
            let scale = if matches!(mock.mode, Mode::BadSum) { 0.9 } else { 1.0 };
            json!({"entailment": e * scale, "neutral": (1.0 - e) * scale, "contradiction": 0.0})
        })
        .collect();
    if matches!(mock.mode, Mode::ShortRows) {
        rows.pop();
    }
    Json(json!({ "scores": rows })).into_response()
}

fn serve(mode: Mode) -> (SocketAddr, Arc<Mock>) {
    let mock = Arc::new(Mock {
        mode,
        requests: AtomicUsize::new(0),
        largest_batch: AtomicUsize::new(0),
        seen: Mutex::new(Vec::new()),
    });
    let app = Router::new()
        .route("/score", post(score))
        .route("/health", get(|| async { Json(json!({"status": "ok"})) }))
        .with_state(mock.clone());
    let (tx, rx) = std::sync::mpsc::channel();
    std::thread::spawn(move || {
        let runtime = tokio::runtime::Builder::new_multi_thread().worker_threads(2).enable_all().build().unwrap();
        runtime.block_on(async move {
            let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
            tx.send(listener.local_addr().unwrap()).unwrap();
            axum::serve(listener, app).await.unwrap();
        });
    });
    (rx.recv().unwrap(), mock)
}

fn config(addr: SocketAddr) -> RemoteConfig {
    RemoteConfig {
        endpoint: format!("http://{addr}"),
        backoff_base_ms: 5,
        backoff_max_ms: 20,
        timeout_secs: 10,
        ..RemoteConfig::default()
    }
}

fn small_dataset(n: usize) -> Vec<StimulusPair> {
    generate_dataset(&StimulusConfig::default()).unwrap().into_iter().take(n).collect()
}

#[test]
fn preserves_order_across_concurrent_batches() {
    let (addr, mock) = serve(Mode::Echo);
    let pairs = small_dataset(500);
    let cfg = RemoteConfig { batch_size: 7, concurrency: 4, ..config(addr) };
    let scored = score_remote(&pairs, &cfg).unwrap();
    assert_eq!(scored.len(), pairs.len());
    for (s, p) in scored.iter().zip(&pairs) {
        assert_eq!(&s.pair, p);
        assert_eq!(s.entailment(), fake_entailment(&p.premise, &p.hypothesis));
        assert_eq!(s.scorer_id, format!("remote:http://{addr}"));
    }
    assert_eq!(mock.requests.load(Ordering::SeqCst), batch_count(500, 7));
    assert_eq!(mock.largest_batch.load(Ordering::SeqCst), 7);
}

#[test]
fn full_dataset_request_count() {
    let (addr, mock) = serve(Mode::Echo);
    let pairs = generate_dataset(&StimulusConfig::default()).unwrap();
    assert_eq!(pairs.len(), 13410);
    let scored = score_remote(&pairs, &config(addr)).unwrap();
    assert_eq!(scored.len(), 13410);
    assert_eq!(mock.requests.load(Ordering::SeqCst), 210);
    let seen = mock.seen.lock().unwrap();
    assert!(seen.iter().all(|&n| n <= 64));
    assert_eq!(seen.iter().sum::<usize>(), 13410);
}

#[test]
fn transient_failures_are_retried() {
    let (addr, mock) = serve(Mode::FailFirst(2));
    let pairs = small_dataset(10);
    let cfg = RemoteConfig { concurrency: 1, ..config(addr) };
    let scored = score_remote(&pairs, &cfg).unwrap();
    assert_eq!(scored.len(), 10);
    assert_eq!(mock.requests.load(Ordering::SeqCst), 3);
}

#[test]
fn exhausted_retries_report_batch() {
    let (addr, mock) = serve(Mode::AlwaysFail);
    let pairs = small_dataset(10);
    let cfg = RemoteConfig { concurrency: 1, batch_size: 4, ..config(addr) };
    match score_remote(&pairs, &cfg).unwrap_err() {
        Error::Transport { batch, attempts, message } => {
            assert_eq!(batch, 0);
            assert_eq!(attempts, 3);
            assert!(message.contains("503"), "{message}");
        }
        other => panic!("expected transport error, got {other:?}"),
    }
    assert_eq!(mock.requests.load(Ordering::SeqCst), 3);
}

#[test]
fn client_errors_are_not_retried() {
    let (addr, mock) = serve(Mode::BadRequest);
    let err = score_remote(&small_dataset(3), &config(addr)).unwrap_err();
    assert!(matches!(err, Error::Transport { attempts: 1, .. }), "{err:?}");
    assert_eq!(err.exit_code(), 3);
    assert_eq!(mock.requests.load(Ordering::SeqCst), 1);
}

#[test]
fn simplex_violation_is_protocol_error() {
    let (addr, _) = serve(Mode::BadSum);
    let err = score_remote(&small_dataset(3), &config(addr)).unwrap_err();
    assert!(matches!(err, Error::Protocol { batch: 0, .. }), "{err:?}");
}

#[test]
fn row_count_mismatch_is_protocol_error() {
    let (addr, _) = serve(Mode::ShortRows);
    let err = score_remote(&small_dataset(5), &config(addr)).unwrap_err();
    match err {
        Error::Protocol { message, .. } => assert!(message.contains("expected 5"), "{message}"),
        other => panic!("expected protocol error, got {other:?}"),
    }
}

#[test]
fn unreachable_endpoint_is_transport_error() {
    // Bind then drop to get a port with nothing listening.
    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let cfg = RemoteConfig { endpoint: format!("http://127.0.0.1:{port}"), ..config("127.0.0.1:1".parse().unwrap()) };
    let err = score_remote(&small_dataset(2), &cfg).unwrap_err();
    assert!(matches!(err, Error::Transport { attempts: 3, .. }), "{err:?}");
    assert!(check_health(&cfg, Duration::from_secs(2)).is_err());
}

#[test]
fn health_endpoint() {
    let (addr, _) = serve(Mode::Echo);
    check_health(&config(addr), Duration::from_secs(5)).unwrap();
}

#[test]
fn empty_input_makes_no_request() {
    let (addr, mock) = serve(Mode::Echo);
    assert!(score_remote(&[], &config(addr)).unwrap().is_empty());
    assert_eq!(mock.requests.load(Ordering::SeqCst), 0);
}
