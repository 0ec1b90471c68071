//! Local fixture servers standing in for the chat, translation and portal APIs.
#![allow(dead_code)]

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::extract::{Path, Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde_json::{json, Value};
use tagify_core::ProviderConfig;
use url::Url;

pub async fn spawn(router: Router) -> SocketAddr {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move {
        axum::serve(listener, router).await.unwrap();
    });
    addr
}

pub fn base_url(addr: SocketAddr) -> Url {
    Url::parse(&format!("http://{addr}")).unwrap()
}

pub fn fast_config(addr: SocketAddr) -> ProviderConfig {
    let mut cfg = ProviderConfig::new(base_url(addr), "test-key");
    cfg.retry_base_delay = Duration::from_millis(5);
    cfg.timeout = Duration::from_secs(5);
    cfg
}

/// What a fixture endpoint does on each call.
#[derive(Clone)]
pub enum Behaviour {
    Reply(Value),
    Status(u16, &'static str),
    Sleep(Duration),
}

#[derive(Default)]
pub struct Recorder {
    pub calls: AtomicUsize,
    pub bodies: Mutex<Vec<Value>>,
    pub auth: Mutex<Vec<String>>,
}

impl Recorder {
    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

struct Fixture {
    behaviour: Behaviour,
    recorder: Arc<Recorder>,
}

async fn fixture_handler(
    State(f): State<Arc<Fixture>>,
    headers: HeaderMap,
    Json(body): Json<Value>,
) -> Response {
    f.recorder.calls.fetch_add(1, Ordering::SeqCst);
    f.recorder.bodies.lock().unwrap().push(body);
    if let Some(auth) = headers.get("authorization") {
        f.recorder
            .auth
            .lock()
            .unwrap()
            .push(auth.to_str().unwrap().to_owned());
    }
    match &f.behaviour {
        Behaviour::Reply(v) => Json(v.clone()).into_response(),
        Behaviour::Status(code, body) => {
            (StatusCode::from_u16(*code).unwrap(), *body).into_response()
        }
        Behaviour::Sleep(d) => {
            tokio::time::sleep(*d).await;
            Json(json!({})).into_response()
        }
    }
}

/// Serves `POST {path}` with a fixed behaviour and records every request.
pub async fn endpoint(path: &str, behaviour: Behaviour) -> (SocketAddr, Arc<Recorder>) {
    let recorder = Arc::new(Recorder::default());
    let fixture = Arc::new(Fixture {
        behaviour,
        recorder: recorder.clone(),
    });
    let addr = spawn(
        Router::new()
            .route(path, post(fixture_handler))
            .with_state(fixture),
    )
    .await;
    (addr, recorder)
}

pub fn completion(content: &str) -> Value {
    json!({"choices": [{"index": 0, "message": {"role": "assistant", "content": content}}]})
}

/// DeepL-shaped translator that echoes each text with letter case inverted.
pub async fn case_flipping_translator() -> (SocketAddr, Arc<Recorder>) {
    async fn handler(State(rec): State<Arc<Recorder>>, Json(body): Json<Value>) -> Json<Value> {
        rec.calls.fetch_add(1, Ordering::SeqCst);
        rec.bodies.lock().unwrap().push(body.clone());
        let translations: Vec<Value> = body["text"]
            .as_array()
            .unwrap()
            .iter()
            .map(|t| {
                let flipped: String = t
                    .as_str()
                    .unwrap()
                    .chars()
                    .map(|c| {
                        if c.is_uppercase() {
                            c.to_lowercase().next().unwrap()
                        } else {
                            c.to_uppercase().next().unwrap()
                        }
                    })
                    .collect();
                json!({"detected_source_language": "EN", "text": flipped})
            })
            .collect();
        Json(json!({ "translations": translations }))
    }
    let rec = Arc::new(Recorder::default());
    let addr = spawn(
        Router::new()
            .route("/v2/translate", post(handler))
            .with_state(rec.clone()),
    )
    .await;
    (addr, rec)
}

/// One catalog entry of the fixture portal.
#[derive(Clone, Debug)]
pub enum PortalEntry {
    Keywords(usize),
    NullKeywords,
    Missing,
}

pub struct PortalState {
    order: Vec<String>,
    entries: HashMap<String, PortalEntry>,
    pub requests: AtomicUsize,
    fail_listing: bool,
}

#[derive(serde::Deserialize)]
struct LimitParam {
    limit: Option<usize>,
}

async fn portal_list(State(s): State<Arc<PortalState>>, Query(q): Query<LimitParam>) -> Response {
    s.requests.fetch_add(1, Ordering::SeqCst);
    if s.fail_listing {
        return (StatusCode::INTERNAL_SERVER_ERROR, "boom").into_response();
    }
    let limit = q.limit.unwrap_or(usize::MAX);
    let data: Vec<Value> = s
        .order
        .iter()
        .take(limit)
        .map(|id| json!({"id": id, "title": format!("Dataset {id}")}))
        .collect();
    Json(json!({ "data": data })).into_response()
}

async fn portal_detail(State(s): State<Arc<PortalState>>, Path(id): Path<String>) -> Response {
    s.requests.fetch_add(1, Ordering::SeqCst);
    match s.entries.get(&id) {
        Some(PortalEntry::Keywords(n)) => {
            let kws: Vec<Value> = (0..*n)
                .map(|i| json!({"id": i, "name": format!("kw{i}")}))
                .collect();
            Json(json!({"data": {"id": id, "keywords": kws}})).into_response()
        }
        Some(PortalEntry::NullKeywords) => {
            Json(json!({"data": {"id": id, "keywords": null}})).into_response()
        }
        Some(PortalEntry::Missing) | None => {
            (StatusCode::NOT_FOUND, Json(json!({"message": "not found"}))).into_response()
        }
    }
}

pub async fn portal(entries: Vec<PortalEntry>) -> (SocketAddr, Arc<PortalState>) {
    portal_with(entries, false).await
}

pub async fn portal_with(
    entries: Vec<PortalEntry>,
    fail_listing: bool,
) -> (SocketAddr, Arc<PortalState>) {
    let order: Vec<String> = (0..entries.len()).map(|i| format!("ds-{i:05}")).collect();
    let state = Arc::new(PortalState {
        entries: order.iter().cloned().zip(entries).collect(),
        order,
        requests: AtomicUsize::new(0),
        fail_listing,
    });
    let router = Router::new()
        .route("/api/datasets", get(portal_list))
        .route("/api/datasets/{id}", get(portal_detail))
        .with_state(state.clone());
    (spawn(router).await, state)
}

/// Catalog with the published distribution: 190 untagged, 457 single-tag,
/// 1140 with two tags (1787 total).
pub fn published_distribution() -> Vec<PortalEntry> {
    let mut entries = Vec::with_capacity(1787);
    entries.extend(std::iter::repeat_n(PortalEntry::Keywords(0), 190));
    entries.extend(std::iter::repeat_n(PortalEntry::Keywords(1), 457));
    entries.extend(std::iter::repeat_n(PortalEntry::Keywords(2), 1140));
    entries
}
