#![cfg(feature = "remote")]

use afsearch::afdsl::{self, Program};
use afsearch::mutation::{build_prompt, MutationError, Mutator, MutatorConfig, MutatorKind, RemoteMutator};
use afsearch::programs_db::ScoredProgram;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

struct Seen {
    bodies: Vec<serde_json::Value>,
    auth: Vec<Option<String>>,
}

/// Serves `reply(request_number)` as `(status, body)` until the test ends.
fn serve(reply: impl Fn(usize) -> (u16, String) + Send + Sync + 'static) -> (String, Arc<Mutex<Seen>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1/complete", listener.local_addr().unwrap());
    let seen = Arc::new(Mutex::new(Seen { bodies: Vec::new(), auth: Vec::new() }));
    let count = Arc::new(AtomicUsize::new(0));
    let reply = Arc::new(reply);
    let log = seen.clone();
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            let (log, count, reply) = (log.clone(), count.clone(), reply.clone());
            thread::spawn(move || {
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut len = 0;
                let mut auth = None;
                loop {
                    let mut line = String::new();
                    if reader.read_line(&mut line).unwrap_or(0) == 0 {
                        return;
                    }
                    let line = line.trim_end();
                    if line.is_empty() {
                        break;
                    }
                    let lower = line.to_ascii_lowercase();
                    if let Some(v) = lower.strip_prefix("content-length:") {
                        len = v.trim().parse().unwrap();
                    }
                    if lower.starts_with("authorization:") {
                        auth = Some(line["authorization:".len()..].trim().to_string());
                    }
                }
                let mut body = vec![0; len];
                reader.read_exact(&mut body).unwrap();
                {
                    let mut log = log.lock().unwrap();
                    log.bodies.push(serde_json::from_slice(&body).unwrap());
                    log.auth.push(auth);
                }
                let (status, text) = reply(count.fetch_add(1, Ordering::SeqCst));
                let _ = write!(
                    stream,
                    "HTTP/1.1 {status} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{text}",
                    text.len()
                );
            });
        }
    });
    (url, seen)
}

fn config(endpoint: String) -> MutatorConfig {
    MutatorConfig {
        kind: MutatorKind::Remote,
        endpoint,
        api_key_env: String::new(),
        timeout_secs: 5.0,
        retries: 1,
        in_flight: 3,
        ..MutatorConfig::default()
    }
}

fn prompt() -> afsearch::mutation::Prompt {
    let a = ScoredProgram::new(afdsl::parse("argmax(VAR)").unwrap(), vec![0.5], 0, vec![]).unwrap();
    let b = ScoredProgram::new(Program::expected_improvement(), vec![1.0], 0, vec![]).unwrap();
    build_prompt(&a, &b)
}

fn text_reply(text: &str) -> String {
    serde_json::json!({ "text": text }).to_string()
}

#[test]
fn extracts_programs_from_replies() {
    let (url, seen) = serve(|k| {
        let body = if k % 2 == 0 {
            "Sure.\n```\nargmax(sqrt(VAR) + 0.5 * (INCUMBENT - MEAN))\n```".to_string()
        } else {
            "no code here".to_string()
        };
        (200, text_reply(&body))
    });
    let m = RemoteMutator::new(config(url)).unwrap();
    let out = m.propose(&prompt(), 42, 5).unwrap();
    assert_eq!(out.len(), 5);
    let parsed = out.iter().filter(|t| afdsl::parse(t).is_ok()).count();
    assert!(parsed >= 2, "{out:?}");
    assert!(out.iter().any(|t| t == "no code here"));

    let seen = seen.lock().unwrap();
    assert_eq!(seen.bodies.len(), 5);
    for b in &seen.bodies {
        assert_eq!(b["prompt"].as_str().unwrap(), prompt().text);
        assert_eq!(b["max_tokens"], 1024);
        assert!(b["seed"].is_u64());
    }
    assert!(seen.auth.iter().all(Option::is_none));
}

#[test]
fn server_errors_become_transport_errors() {
    let (url, seen) = serve(|_| (503, "{}".into()));
    let m = RemoteMutator::new(config(url)).unwrap();
    match m.propose(&prompt(), 1, 2) {
        Err(MutationError::Transport(msg)) => assert!(msg.contains("503"), "{msg}"),
        other => panic!("{other:?}"),
    }
    // One retry per sample.
    assert_eq!(seen.lock().unwrap().bodies.len(), 4);
}

#[test]
fn partial_failures_keep_the_successes() {
    let (url, _) = serve(|k| if k == 0 { (400, "{}".into()) } else { (200, text_reply("argmin(MEAN)")) });
    let mut cfg = config(url);
    cfg.in_flight = 1;
    let out = RemoteMutator::new(cfg).unwrap().propose(&prompt(), 1, 3).unwrap();
    assert_eq!(out, vec!["argmin(MEAN)".to_string(); 2]);
}

#[test]
fn rejected_credentials_are_fatal() {
    let (url, seen) = serve(|_| (401, "{}".into()));
    let mut cfg = config(url);
    cfg.api_key_env = "AFSEARCH_REMOTE_TEST_KEY".into();
    std::env::set_var("AFSEARCH_REMOTE_TEST_KEY", "s3cret");
    let m = RemoteMutator::new(cfg).unwrap();
    assert!(!format!("{m:?}").contains("s3cret"));
    let err = m.propose(&prompt(), 1, 1).unwrap_err();
    assert!(matches!(err, MutationError::Auth { status: 401 }));
    assert!(err.is_fatal());
    assert_eq!(seen.lock().unwrap().auth[0].as_deref(), Some("Bearer s3cret"));
}

#[test]
fn missing_key_names_the_variable() {
    let mut cfg = config("http://127.0.0.1:9/".into());
    cfg.api_key_env = "AFSEARCH_SURELY_UNSET_VARIABLE".into();
    let err = RemoteMutator::new(cfg).unwrap_err();
    assert!(err.to_string().contains("AFSEARCH_SURELY_UNSET_VARIABLE"), "{err}");
    assert!(err.is_fatal());
}

#[test]
fn slow_servers_time_out() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/", listener.local_addr().unwrap());
    thread::spawn(move || {
        let held: Vec<_> = listener.incoming().take(2).collect();
        thread::sleep(Duration::from_secs(10));
        drop(held);
    });
    let mut cfg = config(url);
    cfg.timeout_secs = 0.3;
    let err = RemoteMutator::new(cfg).unwrap().propose(&prompt(), 1, 1).unwrap_err();
    assert!(matches!(err, MutationError::Transport(_)), "{err:?}");
}

#[test]
fn unreachable_endpoint_is_a_transport_error() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let mut cfg = config(format!("http://127.0.0.1:{port}/"));
    cfg.retries = 0;
    let err = RemoteMutator::new(cfg).unwrap().propose(&prompt(), 1, 1).unwrap_err();
    assert!(matches!(err, MutationError::Transport(_)));
    assert!(!err.is_fatal());
}
