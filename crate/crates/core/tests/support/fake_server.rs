//! Minimal chat-completions server for tests. Each connection gets its own
//! thread and serves one request.

#![allow(dead_code)]

use std::collections::VecDeque;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use lyrecon::prompt::vocabulary_from_text;

#[derive(Default)]
pub struct Counters {
    pub calls: AtomicUsize,
    pub in_flight: AtomicUsize,
    pub max_in_flight: AtomicUsize,
    /// Statuses to answer with before falling back to 200.
    pub script: Mutex<VecDeque<u16>>,
    pub delay_ms: AtomicUsize,
}

impl Counters {
    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    pub fn peak(&self) -> usize {
        self.max_in_flight.load(Ordering::SeqCst)
    }
}

pub struct FakeServer {
    pub url: String,
    pub counters: Arc<Counters>,
}

impl FakeServer {
    pub fn start() -> FakeServer {
        let listener = TcpListener::bind("127.0.0.1:0").expect("bind");
        let url = format!(
            "http://{}/v1/chat/completions",
            listener.local_addr().unwrap()
        );
        let counters = Arc::new(Counters::default());
        let shared = Arc::clone(&counters);
        std::thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(stream) = stream else { continue };
                let shared = Arc::clone(&shared);
                std::thread::spawn(move || serve(stream, &shared));
            }
        });
        FakeServer { url, counters }
    }

    pub fn script(&self, statuses: &[u16]) {
        self.counters.script.lock().unwrap().extend(statuses);
    }

    pub fn set_delay(&self, ms: usize) {
        self.counters.delay_ms.store(ms, Ordering::SeqCst);
    }
}

/// Lyrics that use every vocabulary word of the prompt, in two sections.
pub fn echo_lyrics(prompt: &str) -> String {
    let words = vocabulary_from_text(prompt);
    let mid = words.len().div_ceil(2);
    let (a, b) = words.split_at(mid);
    let second = if b.is_empty() { a } else { b };
    format!("{}\n\n{}", a.join(" "), second.join(" "))
}

fn serve(stream: TcpStream, c: &Counters) {
    let mut reader = BufReader::new(stream.try_clone().expect("clone stream"));
    let mut length = 0usize;
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line).unwrap_or(0) == 0 {
            return;
        }
        let line = line.trim_end();
        if line.is_empty() {
            break;
        }
        if let Some((k, v)) = line.split_once(':') {
            if k.eq_ignore_ascii_case("content-length") {
                length = v.trim().parse().unwrap_or(0);
            }
        }
    }
    let mut body = vec![0; length];
    if reader.read_exact(&mut body).is_err() {
        return;
    }

    c.calls.fetch_add(1, Ordering::SeqCst);
    let now = c.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
    c.max_in_flight.fetch_max(now, Ordering::SeqCst);
    std::thread::sleep(Duration::from_millis(
        c.delay_ms.load(Ordering::SeqCst) as u64
    ));
    let status = c.script.lock().unwrap().pop_front().unwrap_or(200);
    c.in_flight.fetch_sub(1, Ordering::SeqCst);

    let payload = if status == 200 {
        let request: serde_json::Value = serde_json::from_slice(&body).unwrap_or_default();
        let prompt = request["messages"][0]["content"]
            .as_str()
            .unwrap_or_default();
        serde_json::json!({
            "choices": [{"index": 0, "message": {"role": "assistant", "content": echo_lyrics(prompt)}}]
        })
        .to_string()
    } else {
        format!("{{\"error\":\"status {status}\"}}")
    };
    let response = format!(
        "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{payload}",
        payload.len()
    );
    let mut stream = stream;
    let _ = stream.write_all(response.as_bytes());
    let _ = stream.flush();
}
