#![allow(dead_code)]

use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread;

use chrono::{DateTime, Duration, NaiveDateTime, Utc};

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn dricarbon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dricarbon"))
        .args(args)
        .env_remove("DRICARBON_INTENSITY_ENDPOINT")
        .output()
        .expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Deterministic intensity for the settlement period starting at `t`.
pub fn synthetic_intensity(t: DateTime<Utc>) -> i64 {
    let half_hours = t.timestamp() / 1800;
    150 + (half_hours % 48) * 2
}

fn parse_ts(s: &str) -> DateTime<Utc> {
    NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%MZ")
        .expect("request timestamp")
        .and_utc()
}

/// What the local intensity server does with each request.
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Behaviour {
    /// Half-hour periods covering the requested range.
    Serve,
    /// HTTP 503 on every request.
    Unavailable,
}

/// A minimal HTTP/1.1 server speaking the national intensity API shape on
/// 127.0.0.1. Runs until the process exits.
pub struct IntensityServer {
    pub endpoint: String,
    pub requests: Arc<AtomicUsize>,
}

impl IntensityServer {
    pub fn start(behaviour: Behaviour) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").expect("bind");
        let endpoint = format!("http://{}", listener.local_addr().unwrap());
        let requests = Arc::new(AtomicUsize::new(0));
        let counter = requests.clone();
        thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(mut stream) = stream else { continue };
                let counter = counter.clone();
                thread::spawn(move || {
                    let mut reader = BufReader::new(stream.try_clone().unwrap());
                    let mut request_line = String::new();
                    if reader.read_line(&mut request_line).is_err() {
                        return;
                    }
                    loop {
                        let mut line = String::new();
                        if reader.read_line(&mut line).map(|n| n == 0).unwrap_or(true) || line == "\r\n" {
                            break;
                        }
                    }
                    counter.fetch_add(1, Ordering::SeqCst);
                    let path = request_line.split_whitespace().nth(1).unwrap_or("/");
                    let (status, body) = match behaviour {
                        Behaviour::Unavailable => ("503 Service Unavailable", "{}".to_owned()),
                        Behaviour::Serve => match respond(path) {
                            Some(b) => ("200 OK", b),
                            None => ("404 Not Found", "{}".to_owned()),
                        },
                    };
                    let _ = write!(
                        stream,
                        "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                        body.len()
                    );
                });
            }
        });
        Self { endpoint, requests }
    }

    pub fn request_count(&self) -> usize {
        self.requests.load(Ordering::SeqCst)
    }
}

fn respond(path: &str) -> Option<String> {
    let rest = path.strip_prefix("/intensity/")?;
    let (from, to) = rest.split_once('/')?;
    let (from, to) = (parse_ts(from), parse_ts(to));
    let mut entries = Vec::new();
    let mut t = from;
    while t < to {
        let next = t + Duration::minutes(30);
        entries.push(format!(
            r#"{{"from":"{}","to":"{}","intensity":{{"forecast":{},"actual":{},"index":"moderate"}}}}"#,
            t.format("%Y-%m-%dT%H:%MZ"),
            next.format("%Y-%m-%dT%H:%MZ"),
            synthetic_intensity(t) + 3,
            synthetic_intensity(t)
        ));
        t = next;
    }
    Some(format!(r#"{{"data":[{}]}}"#, entries.join(",")))
}
