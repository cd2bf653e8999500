//! Line-delimited JSON protocol for external scorer processes.
//!
//! The scorer is a child process. Its first stdout line is a handshake
//! `{"protocol": 1, "n": <players>, "input_ids": [...]}`. Each request line is
//! `{"id", "input_id", "mask", "class"}` where `mask` has one `0`/`1` per player,
//! player 0 first; each response is `{"id", "score"}` or `{"id", "error"}`.
//! Responses may arrive in any order and are matched by id. Inputs stay on
//! the scorer side; only masks cross the pipe.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use parking_lot::Mutex;
use serde::{Deserialize, Serialize};

use super::{apply_mask, MaskSpec, OutputKind, OutputSelector, Scorer};
use crate::coalition::{Coalition, GameSpec};
use crate::error::{Error, Result};
use crate::game::Game;

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Handshake {
    pub protocol: u32,
    pub n: usize,
    pub input_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Request {
    pub id: u64,
    pub input_id: String,
    pub mask: String,
    pub class: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Response {
    Score { id: u64, score: f64 },
    Error { id: u64, error: String },
}

impl Response {
    pub fn id(&self) -> u64 {
        match self {
            Response::Score { id, .. } | Response::Error { id, .. } => *id,
        }
    }
}

/// Parses one response line, rejecting anything outside the two allowed shapes.
pub fn parse_response(line: &str) -> Result<Response> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Raw {
        id: u64,
        score: Option<f64>,
        error: Option<String>,
    }
    let raw: Raw = serde_json::from_str(line).map_err(|e| Error::ProtocolViolation(format!("bad response {line:?}: {e}")))?;
    match (raw.score, raw.error) {
        (Some(score), None) if score.is_finite() => Ok(Response::Score { id: raw.id, score }),
        (Some(_), None) => Err(Error::ProtocolViolation(format!("non-finite score for request {}", raw.id))),
        (None, Some(error)) => Ok(Response::Error { id: raw.id, error }),
        _ => Err(Error::ProtocolViolation(format!("response {line:?} must carry exactly one of score/error"))),
    }
}

/// How to reach an external scorer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScorerEndpoint {
    /// Program and arguments.
    pub command: Vec<String>,
    #[serde(default = "default_batch_limit")]
    pub batch_limit: usize,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
}

fn default_batch_limit() -> usize {
    256
}

fn default_timeout_ms() -> u64 {
    30_000
}

impl ScorerEndpoint {
    pub fn new(command: Vec<String>) -> Self {
        Self { command, batch_limit: default_batch_limit(), timeout_ms: default_timeout_ms() }
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_millis(self.timeout_ms)
    }
}

struct Channel {
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
    next_id: u64,
}

/// A running scorer process. Requests from several threads are serialized.
pub struct ExternalScorer {
    endpoint: ScorerEndpoint,
    handshake: Handshake,
    channel: Mutex<Channel>,
    child: Mutex<Child>,
}

impl ExternalScorer {
    pub fn spawn(endpoint: ScorerEndpoint) -> Result<Self> {
        if endpoint.batch_limit == 0 {
            return Err(Error::InvalidConfig("batch_limit must be at least 1".into()));
        }
        let (program, args) = endpoint
            .command
            .split_first()
            .ok_or_else(|| Error::ScorerUnavailable("empty scorer command".into()))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::ScorerUnavailable(format!("cannot start {program}: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        let mut channel = Channel { stdin, lines: rx, next_id: 0 };
        let first = next_line(&mut channel, endpoint.timeout())?;
        let handshake: Handshake = serde_json::from_str(&first)
            .map_err(|e| Error::ProtocolViolation(format!("bad handshake {first:?}: {e}")))?;
        if handshake.protocol != PROTOCOL_VERSION {
            return Err(Error::ProtocolViolation(format!("unsupported protocol version {}", handshake.protocol)));
        }
        GameSpec::new(handshake.n).map_err(|e| Error::ProtocolViolation(format!("handshake: {e}")))?;
        Ok(Self { endpoint, handshake, channel: Mutex::new(channel), child: Mutex::new(child) })
    }

    pub fn handshake(&self) -> &Handshake {
        &self.handshake
    }

    pub fn n(&self) -> usize {
        self.handshake.n
    }

    /// Scores `coalitions` for one input, in order.
    pub fn evaluate(&self, input_id: &str, class: usize, coalitions: &[Coalition]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(coalitions.len());
        let mut channel = self.channel.lock();
        for chunk in coalitions.chunks(self.endpoint.batch_limit) {
            out.extend(self.round_trip(&mut channel, input_id, class, chunk)?);
        }
        Ok(out)
    }

    fn round_trip(&self, channel: &mut Channel, input_id: &str, class: usize, chunk: &[Coalition]) -> Result<Vec<f64>> {
        let mut pending: HashMap<u64, usize> = HashMap::with_capacity(chunk.len());
        let mut payload = String::new();
        for (slot, s) in chunk.iter().enumerate() {
            if s.n() != self.n() {
                return Err(Error::ShapeMismatch { expected: self.n(), found: s.n() });
            }
            let id = channel.next_id;
            channel.next_id += 1;
            pending.insert(id, slot);
            let req = Request { id, input_id: input_id.to_string(), mask: s.to_mask_string(), class };
            payload.push_str(&serde_json::to_string(&req).expect("request serializes"));
            payload.push('\n');
        }
        channel
            .stdin
            .write_all(payload.as_bytes())
            .and_then(|_| channel.stdin.flush())
            .map_err(|e| Error::ScorerUnavailable(format!("write failed: {e}")))?;

        let mut scores = vec![f64::NAN; chunk.len()];
        let mut failure = None;
        while !pending.is_empty() {
            let line = next_line(channel, self.endpoint.timeout())?;
            let resp = parse_response(&line)?;
            let slot = pending
                .remove(&resp.id())
                .ok_or_else(|| Error::ProtocolViolation(format!("unexpected response id {}", resp.id())))?;
            match resp {
                Response::Score { score, .. } => scores[slot] = score,
                Response::Error { error, id } => {
                    failure.get_or_insert(Error::EvaluationFailed(format!("request {id}: {error}")));
                }
            }
        }
        match failure {
            Some(e) => Err(e),
            None => Ok(scores),
        }
    }
}

impl Drop for ExternalScorer {
    fn drop(&mut self) {
        let mut child = self.child.lock();
        let _ = child.kill();
        let _ = child.wait();
    }
}

fn next_line(channel: &mut Channel, timeout: Duration) -> Result<String> {
    match channel.lines.recv_timeout(timeout) {
        Ok(Ok(line)) => Ok(line),
        Ok(Err(e)) => Err(Error::ScorerUnavailable(format!("read failed: {e}"))),
        Err(RecvTimeoutError::Timeout) => Err(Error::Timeout(timeout)),
        Err(RecvTimeoutError::Disconnected) => Err(Error::ScorerUnavailable("scorer closed its output".into())),
    }
}

/// One input served by an [`ExternalScorer`].
pub struct ExternalGame {
    spec: GameSpec,
    scorer: Arc<ExternalScorer>,
    input_id: String,
    class: usize,
}

impl ExternalGame {
    pub fn new(scorer: Arc<ExternalScorer>, input_id: impl Into<String>, class: usize) -> Result<Self> {
        let input_id = input_id.into();
        if !scorer.handshake.input_ids.contains(&input_id) {
            return Err(Error::InvalidConfig(format!("scorer does not know input `{input_id}`")));
        }
        Ok(Self { spec: GameSpec::new(scorer.n())?, scorer, input_id, class })
    }
}

impl Game for ExternalGame {
    fn spec(&self) -> &GameSpec {
        &self.spec
    }

    fn evaluate(&self, s: Coalition) -> Result<f64> {
        Ok(self.evaluate_batch(&[s])?[0])
    }

    fn evaluate_batch(&self, batch: &[Coalition]) -> Result<Vec<f64>> {
        self.scorer.evaluate(&self.input_id, self.class, batch)
    }
}

/// Scorer-side loop over built-in scorers: reads requests until EOF and answers
/// each one. Malformed lines get an error response and the session continues.
pub fn serve<R: BufRead, W: Write>(
    reader: R,
    mut writer: W,
    inputs: &BTreeMap<String, Vec<f64>>,
    mask: &MaskSpec,
    scorer: &dyn Scorer,
    kind: OutputKind,
) -> std::io::Result<()> {
    let handshake = Handshake { protocol: PROTOCOL_VERSION, n: mask.n_players(), input_ids: inputs.keys().cloned().collect() };
    writeln!(writer, "{}", serde_json::to_string(&handshake).expect("handshake serializes"))?;
    writer.flush()?;
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let resp = match serde_json::from_str::<Request>(&line) {
            Err(e) => {
                let id = serde_json::from_str::<serde_json::Value>(&line)
                    .ok()
                    .and_then(|v| v.get("id").and_then(|id| id.as_u64()))
                    .unwrap_or(0);
                Response::Error { id, error: format!("malformed request: {e}") }
            }
            Ok(req) => answer(&req, inputs, mask, scorer, kind),
        };
        writeln!(writer, "{}", serde_json::to_string(&resp).expect("response serializes"))?;
        writer.flush()?;
    }
    Ok(())
}

fn answer(req: &Request, inputs: &BTreeMap<String, Vec<f64>>, mask: &MaskSpec, scorer: &dyn Scorer, kind: OutputKind) -> Response {
    let Some(input) = inputs.get(&req.input_id) else {
        return Response::Error { id: req.id, error: format!("unknown input_id `{}`", req.input_id) };
    };
    let result = Coalition::from_mask_str(&req.mask)
        .and_then(|s| apply_mask(input, s, mask))
        .and_then(|x| scorer.score(&x, OutputSelector { class: req.class, kind }));
    match result {
        Ok(score) if score.is_finite() => Response::Score { id: req.id, score },
        Ok(_) => Response::Error { id: req.id, error: "non-finite score".into() },
        Err(e) => Response::Error { id: req.id, error: e.to_string() },
    }
}
