use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use serde_json::{json, Map, Value};
use simpkit::bridge::{HttpSimplifier, PromptTemplate, Simplifier};
use simpkit::Error;

#[derive(Default)]
struct Seen {
    per_input: HashMap<String, usize>,
    bodies: Vec<Value>,
    auth: Vec<Option<String>>,
}

/// Stub chat endpoint. `respond` gets the prompt and how many times it was
/// seen before, and returns a status and a body.
struct Stub {
    server: Arc<tiny_http::Server>,
    handle: Option<thread::JoinHandle<()>>,
    seen: Arc<Mutex<Seen>>,
    url: String,
}

impl Stub {
    fn start(respond: impl Fn(&str, usize) -> (u16, String) + Send + 'static) -> Stub {
        let server = Arc::new(tiny_http::Server::http("127.0.0.1:0").unwrap());
        let url = format!("http://{}/chat", server.server_addr().to_ip().unwrap());
        let seen = Arc::new(Mutex::new(Seen::default()));
        let (s, log) = (server.clone(), seen.clone());
        let handle = thread::spawn(move || {
            for mut req in s.incoming_requests() {
                let mut body = String::new();
                req.as_reader().read_to_string(&mut body).unwrap();
                let v: Value = serde_json::from_str(&body).unwrap();
                let prompt = v["messages"][0]["content"].as_str().unwrap_or_default().to_string();
                let auth = req
                    .headers()
                    .iter()
                    .find(|h| h.field.equiv("Authorization"))
                    .map(|h| h.value.to_string());
                let before = {
                    let mut log = log.lock().unwrap();
                    log.bodies.push(v);
                    log.auth.push(auth);
                    let c = log.per_input.entry(prompt.clone()).or_insert(0);
                    *c += 1;
                    *c - 1
                };
                let (status, text) = respond(&prompt, before);
                let _ = req.respond(tiny_http::Response::from_string(text).with_status_code(status));
            }
        });
        Stub { server, handle: Some(handle), seen, url }
    }
}

impl Drop for Stub {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

fn reply(content: &str) -> String {
    json!({"choices": [{"message": {"content": content}}]}).to_string()
}

fn client(url: &str) -> HttpSimplifier {
    HttpSimplifier {
        endpoint: url.to_string(),
        model: "m".into(),
        template: PromptTemplate::new("Simplify: {{input}}").unwrap(),
        timeout: Duration::from_secs(10),
        retries: 2,
        batch_size: 3,
        api_key: None,
        params: None,
        backoff: Duration::from_millis(1),
    }
}

fn inputs(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("sentence {i}")).collect()
}

#[test]
fn outputs_keep_input_order_across_batches() {
    let stub = Stub::start(|p, _| (200, reply(&p.to_uppercase())));
    let out = client(&stub.url).simplify_batch(&inputs(8)).unwrap();
    let want: Vec<String> = inputs(8).iter().map(|s| format!("SIMPLIFY: {}", s.to_uppercase())).collect();
    assert_eq!(out, want);
    let seen = stub.seen.lock().unwrap();
    assert_eq!(seen.per_input.len(), 8);
    assert!(seen.per_input.values().all(|&c| c == 1));
}

#[test]
fn server_errors_are_retried_per_input() {
    let stub = Stub::start(|p, before| {
        if p.ends_with('1') && before == 0 {
            (503, "busy".into())
        } else {
            (200, reply("ok"))
        }
    });
    let out = client(&stub.url).simplify_batch(&inputs(3)).unwrap();
    assert_eq!(out, ["ok", "ok", "ok"]);
    let seen = stub.seen.lock().unwrap();
    assert_eq!(seen.per_input["Simplify: sentence 1"], 2);
    assert_eq!(seen.per_input["Simplify: sentence 0"], 1);
    assert_eq!(seen.per_input["Simplify: sentence 2"], 1);
}

#[test]
fn retries_are_bounded() {
    let stub = Stub::start(|_, _| (500, "down".into()));
    let err = client(&stub.url).simplify_batch(&inputs(1)).unwrap_err();
    assert!(matches!(err, Error::Transport { status: Some(500), .. }), "{err:?}");
    assert_eq!(stub.seen.lock().unwrap().per_input["Simplify: sentence 0"], 3);
}

#[test]
fn client_errors_are_not_retried() {
    let stub = Stub::start(|_, _| (400, "bad request".into()));
    let err = client(&stub.url).simplify_batch(&inputs(1)).unwrap_err();
    match err {
        Error::Transport { status, message } => {
            assert_eq!(status, Some(400));
            assert!(message.contains("bad request"));
        }
        other => panic!("{other:?}"),
    }
    assert_eq!(stub.seen.lock().unwrap().per_input["Simplify: sentence 0"], 1);
}

#[test]
fn malformed_response_is_protocol_error() {
    let stub = Stub::start(|_, _| (200, json!({"result": "x"}).to_string()));
    let err = client(&stub.url).simplify_batch(&inputs(1)).unwrap_err();
    assert!(matches!(err, Error::Protocol(_)), "{err:?}");
    assert_eq!(err.kind(), simpkit::ErrorKind::External);
}

#[test]
fn key_and_params_reach_the_server() {
    let stub = Stub::start(|_, _| (200, reply("fine")));
    let mut c = client(&stub.url);
    c.api_key = Some("secret".into());
    let mut params = Map::new();
    params.insert("temperature".into(), json!(0.0));
    c.params = Some(params);
    c.simplify_batch(&inputs(1)).unwrap();
    let seen = stub.seen.lock().unwrap();
    assert_eq!(seen.auth[0].as_deref(), Some("Bearer secret"));
    assert_eq!(seen.bodies[0]["temperature"], 0.0);
    assert_eq!(seen.bodies[0]["model"], "m");
}

#[test]
fn unreachable_endpoint_is_external_error() {
    let mut c = client("http://127.0.0.1:9/chat");
    c.retries = 0;
    let err = c.simplify_batch(&inputs(1)).unwrap_err();
    assert_eq!(err.kind(), simpkit::ErrorKind::External);
}
