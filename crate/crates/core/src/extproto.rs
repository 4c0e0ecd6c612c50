//! Client for samplers hosted in a child process.
//!
//! The child speaks newline-delimited JSON (UTF-8, one document per line) on
//! its standard streams. Its first output line is the handshake
//!
//! ```text
//! {"hello": {"k": <tokens per chunk>, "vocab_size": <int>}}
//! ```
//!
//! after which each request line
//!
//! ```text
//! {"id": <int>, "context": [<int>...], "num_samples": <int>, "seed": <int>}
//! ```
//!
//! is answered by exactly one response line
//!
//! ```text
//! {"id": <same int>, "samples": [[<int>...], ...]}
//! ```
//!
//! holding `num_samples` chunks of exactly `k` token ids in `[0, vocab_size)`.
//! A child may instead answer `{"id": <int>, "error": "<message>"}`. Unknown
//! fields are ignored. Only one request is ever outstanding.
//!
//! Setting `LFREE_PROTO_TRACE=1` mirrors every line to stderr.

use std::collections::BTreeMap;
use std::io::{self, BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::outcome::{Outcome, TokenId};
use crate::rng::{LfRng, RandomSeed};
use crate::sampler::{SampleError, Sampler};

pub const TRACE_ENV: &str = "LFREE_PROTO_TRACE";
pub const DEFAULT_HANDSHAKE_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Debug, thiserror::Error)]
pub enum ProtoError {
    #[error("failed to launch sampler {command:?}: {source}")]
    Launch { command: String, source: io::Error },
    #[error("empty sampler command line")]
    EmptyCommand,
    #[error("no handshake within {0:?}")]
    HandshakeTimeout(Duration),
    #[error("invalid handshake: {0}")]
    InvalidHandshake(String),
    #[error("no response within {0:?}")]
    ResponseTimeout(Duration),
    #[error("sampler closed its output")]
    ChildClosed,
    #[error("malformed JSON line {line:?}: {reason}")]
    Malformed { line: String, reason: String },
    #[error("protocol id mismatch: sent {expected}, received {got}")]
    IdMismatch { expected: u64, got: u64 },
    #[error("length violation: sample {index} has {got} tokens, handshake declared {expected}")]
    LengthViolation { index: usize, expected: usize, got: usize },
    #[error("token id {token} out of range for vocabulary of {vocab_size}")]
    TokenOutOfRange { token: i64, vocab_size: u32 },
    #[error("requested {expected} samples, received {got}")]
    SampleCount { expected: usize, got: usize },
    #[error("sampler reported an error: {0}")]
    Remote(String),
    #[error("sampler i/o: {0}")]
    Io(#[from] io::Error),
}

impl ProtoError {
    /// Short class name used in violation tallies.
    pub fn class(&self) -> &'static str {
        match self {
            ProtoError::Launch { .. } | ProtoError::EmptyCommand => "launch",
            ProtoError::HandshakeTimeout(_) => "handshake_timeout",
            ProtoError::InvalidHandshake(_) => "handshake",
            ProtoError::ResponseTimeout(_) => "response_timeout",
            ProtoError::ChildClosed => "closed",
            ProtoError::Malformed { .. } => "malformed",
            ProtoError::IdMismatch { .. } => "id_mismatch",
            ProtoError::LengthViolation { .. } => "length",
            ProtoError::TokenOutOfRange { .. } => "token_range",
            ProtoError::SampleCount { .. } => "sample_count",
            ProtoError::Remote(_) => "remote_error",
            ProtoError::Io(_) => "io",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Handshake {
    pub k: usize,
    pub vocab_size: u32,
}

#[derive(Deserialize)]
struct HelloLine {
    hello: Handshake,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleRequest {
    pub id: u64,
    pub context: Vec<TokenId>,
    pub num_samples: usize,
    pub seed: u64,
}

/// A response line as received, before any invariant is checked.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleResponse {
    pub id: u64,
    #[serde(default)]
    pub samples: Vec<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Checks a response against its request and the handshake. Every violation
/// is returned, not just the first.
pub fn validate_response(handshake: &Handshake, request: &SampleRequest, response: &SampleResponse) -> Vec<ProtoError> {
    let mut out = Vec::new();
    if response.id != request.id {
        out.push(ProtoError::IdMismatch {
            expected: request.id,
            got: response.id,
        });
    }
    if let Some(msg) = &response.error {
        out.push(ProtoError::Remote(msg.clone()));
        return out;
    }
    if response.samples.len() != request.num_samples {
        out.push(ProtoError::SampleCount {
            expected: request.num_samples,
            got: response.samples.len(),
        });
    }
    for (index, s) in response.samples.iter().enumerate() {
        if s.len() != handshake.k {
            out.push(ProtoError::LengthViolation {
                index,
                expected: handshake.k,
                got: s.len(),
            });
        }
        if let Some(&token) = s.iter().find(|&&t| t < 0 || t >= i64::from(handshake.vocab_size)) {
            out.push(ProtoError::TokenOutOfRange {
                token,
                vocab_size: handshake.vocab_size,
            });
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct SpawnConfig {
    pub handshake_timeout: Duration,
    pub response_timeout: Option<Duration>,
    pub trace: bool,
}

impl Default for SpawnConfig {
    fn default() -> Self {
        SpawnConfig {
            handshake_timeout: DEFAULT_HANDSHAKE_TIMEOUT,
            response_timeout: None,
            trace: std::env::var(TRACE_ENV).is_ok_and(|v| v == "1"),
        }
    }
}

/// Handle on one sampler child process. Not shareable between threads; the
/// protocol is strictly request/response.
pub struct ExternalSampler {
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<io::Result<String>>,
    handshake: Handshake,
    next_id: u64,
    config: SpawnConfig,
}

impl std::fmt::Debug for ExternalSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExternalSampler")
            .field("pid", &self.child.id())
            .field("handshake", &self.handshake)
            .field("next_id", &self.next_id)
            .finish()
    }
}

impl ExternalSampler {
    pub fn spawn(command: &str, args: &[String]) -> Result<Self, ProtoError> {
        Self::spawn_with(command, args, SpawnConfig::default())
    }

    /// Splits `command_line` with shell quoting rules and spawns it.
    pub fn spawn_command_line(command_line: &str, config: SpawnConfig) -> Result<Self, ProtoError> {
        let parts = shell_words::split(command_line).map_err(|e| ProtoError::Launch {
            command: command_line.to_string(),
            source: io::Error::new(io::ErrorKind::InvalidInput, e),
        })?;
        let (cmd, args) = parts.split_first().ok_or(ProtoError::EmptyCommand)?;
        Self::spawn_with(cmd, args, config)
    }

    pub fn spawn_with(command: &str, args: &[String], config: SpawnConfig) -> Result<Self, ProtoError> {
        let mut child = Command::new(command)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|source| ProtoError::Launch {
                command: command.to_string(),
                source,
            })?;
        let stdin = child.stdin.take();
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            let mut reader = BufReader::new(stdout);
            loop {
                let mut line = String::new();
                match reader.read_line(&mut line) {
                    Ok(0) => break,
                    Ok(_) => {
                        if tx.send(Ok(line)).is_err() {
                            break;
                        }
                    }
                    Err(e) => {
                        let _ = tx.send(Err(e));
                        break;
                    }
                }
            }
        });

        let mut sampler = ExternalSampler {
            child,
            stdin,
            lines: rx,
            handshake: Handshake { k: 0, vocab_size: 0 },
            next_id: 0,
            config,
        };
        let line = match sampler.read_line(Some(sampler.config.handshake_timeout)) {
            Err(ProtoError::ResponseTimeout(t)) => return Err(ProtoError::HandshakeTimeout(t)),
            other => other?,
        };
        let hello: HelloLine =
            serde_json::from_str(line.trim_end()).map_err(|e| ProtoError::InvalidHandshake(format!("{e}: {line:?}")))?;
        if hello.hello.k < 1 || hello.hello.vocab_size < 2 {
            return Err(ProtoError::InvalidHandshake(format!(
                "k = {}, vocab_size = {}",
                hello.hello.k, hello.hello.vocab_size
            )));
        }
        sampler.handshake = hello.hello;
        Ok(sampler)
    }

    pub fn handshake(&self) -> Handshake {
        self.handshake
    }

    fn read_line(&mut self, timeout: Option<Duration>) -> Result<String, ProtoError> {
        let received = match timeout {
            Some(t) => match self.lines.recv_timeout(t) {
                Ok(r) => r,
                Err(RecvTimeoutError::Timeout) => return Err(ProtoError::ResponseTimeout(t)),
                Err(RecvTimeoutError::Disconnected) => return Err(ProtoError::ChildClosed),
            },
            None => self.lines.recv().map_err(|_| ProtoError::ChildClosed)?,
        };
        let line = received?;
        if self.config.trace {
            eprint!("lfree <- {line}");
            if !line.ends_with('\n') {
                eprintln!();
            }
        }
        Ok(line)
    }

    fn write_line(&mut self, line: &str) -> Result<(), ProtoError> {
        if self.config.trace {
            eprintln!("lfree -> {line}");
        }
        let stdin = self.stdin.as_mut().ok_or(ProtoError::ChildClosed)?;
        let res = stdin
            .write_all(line.as_bytes())
            .and_then(|_| stdin.write_all(b"\n"))
            .and_then(|_| stdin.flush());
        match res {
            Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Err(ProtoError::ChildClosed),
            other => Ok(other?),
        }
    }

    /// Sends one request and returns the parsed response without checking
    /// its invariants. Fails only on transport or JSON errors.
    pub fn request_raw(
        &mut self,
        context: &[TokenId],
        num_samples: usize,
        seed: u64,
    ) -> Result<(SampleRequest, SampleResponse), ProtoError> {
        let request = SampleRequest {
            id: self.next_id,
            context: context.to_vec(),
            num_samples,
            seed,
        };
        self.next_id += 1;
        let line = serde_json::to_string(&request).expect("request serializes");
        self.write_line(&line)?;
        let reply = self.read_line(self.config.response_timeout)?;
        let response: SampleResponse = serde_json::from_str(reply.trim_end()).map_err(|e| ProtoError::Malformed {
            line: reply.trim_end().to_string(),
            reason: e.to_string(),
        })?;
        Ok((request, response))
    }

    /// Sends one request and returns validated outcomes.
    pub fn request(&mut self, context: &[TokenId], num_samples: usize, seed: u64) -> Result<Vec<Outcome>, ProtoError> {
        let (req, resp) = self.request_raw(context, num_samples, seed)?;
        if let Some(first) = validate_response(&self.handshake, &req, &resp).into_iter().next() {
            return Err(first);
        }
        Ok(resp
            .samples
            .into_iter()
            .map(|s| Outcome::new(s.into_iter().map(|t| t as TokenId).collect()))
            .collect())
    }

    /// Closes the child's input and waits briefly for it to exit, killing it otherwise.
    pub fn close(mut self) {
        self.shutdown();
    }

    fn shutdown(&mut self) {
        self.stdin.take();
        let deadline = Instant::now() + Duration::from_secs(2);
        loop {
            match self.child.try_wait() {
                Ok(Some(_)) => return,
                Ok(None) if Instant::now() < deadline => thread::sleep(Duration::from_millis(10)),
                _ => break,
            }
        }
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

impl Drop for ExternalSampler {
    fn drop(&mut self) {
        self.shutdown();
    }
}

impl Sampler for ExternalSampler {
    fn draw(&mut self, context: &[TokenId], count: usize, rng: &mut LfRng) -> Result<Vec<Outcome>, SampleError> {
        let seed = rng.next_u64();
        Ok(self.request(context, count, seed)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencySummary {
    pub p50_ms: f64,
    pub p90_ms: f64,
    pub p99_ms: f64,
    pub max_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundtripReport {
    pub trials: u64,
    pub total_violations: u64,
    /// Violation counts keyed by [`ProtoError::class`].
    pub violations: BTreeMap<String, u64>,
    pub latency: LatencySummary,
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let idx = ((sorted.len() as f64 * q).ceil() as usize).clamp(1, sorted.len()) - 1;
    sorted[idx]
}

/// Issues `trials` requests with random contexts, batch sizes and seeds,
/// checks every response, and tallies violations. Transport failures abort
/// the check; malformed lines and invariant violations are counted.
pub fn roundtrip_check(source: &mut ExternalSampler, trials: u64, seed: RandomSeed) -> Result<RoundtripReport, ProtoError> {
    let mut rng = seed.rng();
    let hs = source.handshake();
    let mut violations: BTreeMap<String, u64> = BTreeMap::new();
    let mut latencies = Vec::with_capacity(trials as usize);
    for _ in 0..trials {
        let ctx_len = rng.random_range(0..16);
        let context: Vec<TokenId> = (0..ctx_len).map(|_| rng.random_range(0..hs.vocab_size)).collect();
        let num = rng.random_range(1..=4);
        let req_seed = rng.next_u64();
        let start = Instant::now();
        let found = match source.request_raw(&context, num, req_seed) {
            Ok((req, resp)) => validate_response(&hs, &req, &resp),
            Err(e @ ProtoError::Malformed { .. }) => vec![e],
            Err(e) => return Err(e),
        };
        latencies.push(start.elapsed().as_secs_f64() * 1e3);
        for v in found {
            *violations.entry(v.class().to_string()).or_default() += 1;
        }
    }
    latencies.sort_by(f64::total_cmp);
    Ok(RoundtripReport {
        trials,
        total_violations: violations.values().sum(),
        violations,
        latency: LatencySummary {
            p50_ms: percentile(&latencies, 0.5),
            p90_ms: percentile(&latencies, 0.9),
            p99_ms: percentile(&latencies, 0.99),
            max_ms: latencies.last().copied().unwrap_or(0.0),
        },
    })
}
