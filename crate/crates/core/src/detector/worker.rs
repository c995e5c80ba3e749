//! Client for detector and denoiser worker processes.
//!
//! A worker is a long-lived child process speaking the framed protocol on
//! its stdin/stdout. Reads and writes happen on helper threads so that a
//! stalled worker surfaces as [`BackendError::WorkerTimeout`] instead of
//! blocking the caller.

use std::io::Write;
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::thread;
use std::time::Duration;

use crate::detector::protocol::{self, ProtocolError, Request, Response, WireFrame};
use crate::detector::{BackendError, Capabilities, DetectorBackend};
use crate::model::{Detection, Frame, ObjectClass};

pub const DEFAULT_TIMEOUT_MS: u64 = 1000;
pub const TIMEOUT_ENV: &str = "FLAREBENCH_WORKER_TIMEOUT_MS";

/// Timeout from `FLAREBENCH_WORKER_TIMEOUT_MS`, else 1000 ms.
pub fn timeout_from_env() -> Duration {
    std::env::var(TIMEOUT_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<u64>().ok())
        .map(Duration::from_millis)
        .unwrap_or(Duration::from_millis(DEFAULT_TIMEOUT_MS))
}

enum Inbound {
    Message(Vec<u8>),
    Eof,
    Broken(ProtocolError),
}

/// One worker process. Not shared between threads; spawn one per path.
pub struct WorkerClient {
    child: Child,
    outbound: Option<Sender<Vec<u8>>>,
    inbound: Receiver<Inbound>,
    timeout: Duration,
    caps: Capabilities,
    dead: Option<String>,
}

impl WorkerClient {
    /// Spawns `command[0]` with the remaining entries as arguments and
    /// performs the hello/capabilities handshake.
    pub fn spawn(command: &[String], timeout: Duration) -> Result<Self, BackendError> {
        let (program, args) = command
            .split_first()
            .ok_or_else(|| BackendError::Config("worker command is empty".into()))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| BackendError::Spawn(format!("{program}: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let mut stdout = child.stdout.take().expect("piped stdout");

        let (in_tx, inbound) = mpsc::channel();
        thread::spawn(move || loop {
            let msg = match protocol::read_frame(&mut stdout) {
                Ok(Some(body)) => Inbound::Message(body),
                Ok(None) => Inbound::Eof,
                Err(e) => Inbound::Broken(e),
            };
            let stop = !matches!(msg, Inbound::Message(_));
            if in_tx.send(msg).is_err() || stop {
                break;
            }
        });
        let outbound = Some(spawn_writer(stdin));

        let mut client = Self {
            child,
            outbound,
            inbound,
            timeout,
            caps: Capabilities {
                name: program.clone(),
                classes: Vec::new(),
                expected_resolution: None,
            },
            dead: None,
        };
        match client.call(&Request::Hello)? {
            Response::Capabilities { classes, name } => {
                client.caps.classes = classes.into_iter().map(ObjectClass::from).collect();
                if let Some(name) = name {
                    client.caps.name = name;
                }
                Ok(client)
            }
            other => Err(client.unexpected("capabilities", &other)),
        }
    }

    pub fn capabilities(&self) -> &Capabilities {
        &self.caps
    }

    pub fn timeout(&self) -> Duration {
        self.timeout
    }

    pub fn detect(&mut self, frame: &Frame) -> Result<Vec<Detection<f64>>, BackendError> {
        let req = Request::Detect {
            frame: WireFrame::from_frame(frame),
        };
        match self.call(&req)? {
            Response::Detections { items } => items
                .iter()
                .map(|w| Detection::try_from(w).map_err(BackendError::from))
                .collect(),
            other => Err(self.unexpected("detections", &other)),
        }
    }

    pub fn denoise(&mut self, frame: &Frame) -> Result<Frame, BackendError> {
        let req = Request::Denoise {
            frame: WireFrame::from_frame(frame),
        };
        match self.call(&req)? {
            Response::Frame(wire) => {
                let out = wire.to_frame()?;
                if (out.width(), out.height()) != (frame.width(), frame.height()) {
                    return Err(BackendError::Protocol(format!(
                        "denoiser returned {}x{} for a {}x{} frame",
                        out.width(),
                        out.height(),
                        frame.width(),
                        frame.height()
                    )));
                }
                Ok(out.with_position(frame.index, frame.timestamp_ms))
            }
            other => Err(self.unexpected("frame", &other)),
        }
    }

    fn unexpected(&mut self, wanted: &str, got: &Response) -> BackendError {
        match got {
            Response::Error { message } => BackendError::Worker(message.clone()),
            other => {
                let kind = serde_json::to_value(other)
                    .ok()
                    .and_then(|v| v.get("type").and_then(|t| t.as_str()).map(str::to_owned))
                    .unwrap_or_default();
                self.poison(format!("out of sync after unexpected {kind:?} response"));
                BackendError::Protocol(format!("expected {wanted} response, got {kind:?}"))
            }
        }
    }

    fn call(&mut self, req: &Request) -> Result<Response, BackendError> {
        if let Some(reason) = &self.dead {
            return Err(BackendError::WorkerCrashed(reason.clone()));
        }
        let sent = self
            .outbound
            .as_ref()
            .map(|tx| tx.send(protocol::encode_message(req)).is_ok())
            .unwrap_or(false);
        if !sent {
            let reason = self.exit_reason("stdin closed");
            self.poison(reason.clone());
            return Err(BackendError::WorkerCrashed(reason));
        }
        match self.inbound.recv_timeout(self.timeout) {
            Ok(Inbound::Message(body)) => protocol::decode_body(&body).map_err(|e| {
                self.poison(format!("unreadable response: {e}"));
                BackendError::Protocol(e.0)
            }),
            Ok(Inbound::Broken(e)) => {
                self.poison(format!("broken stream: {e}"));
                Err(BackendError::Protocol(e.0))
            }
            Ok(Inbound::Eof) | Err(RecvTimeoutError::Disconnected) => {
                let reason = self.exit_reason("closed its output");
                self.poison(reason.clone());
                Err(BackendError::WorkerCrashed(reason))
            }
            Err(RecvTimeoutError::Timeout) => {
                let timeout_ms = self.timeout.as_millis() as u64;
                self.poison(format!("terminated after {timeout_ms} ms timeout"));
                Err(BackendError::WorkerTimeout { timeout_ms })
            }
        }
    }

    fn exit_reason(&mut self, what: &str) -> String {
        // Give a worker that is exiting a moment to be reaped.
        for _ in 0..20 {
            if let Ok(Some(status)) = self.child.try_wait() {
                return format!("worker {what} and exited with {status}");
            }
            thread::sleep(Duration::from_millis(5));
        }
        format!("worker {what}")
    }

    /// Marks the client unusable and stops the child.
    fn poison(&mut self, reason: String) {
        if self.dead.is_none() {
            self.dead = Some(reason);
        }
        self.outbound = None;
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

impl Drop for WorkerClient {
    fn drop(&mut self) {
        // Closing stdin asks a well-behaved worker to exit.
        self.outbound = None;
        if self.dead.is_none() {
            for _ in 0..20 {
                if let Ok(Some(_)) = self.child.try_wait() {
                    return;
                }
                thread::sleep(Duration::from_millis(5));
            }
        }
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

fn spawn_writer(mut stdin: ChildStdin) -> Sender<Vec<u8>> {
    let (tx, rx) = mpsc::channel::<Vec<u8>>();
    thread::spawn(move || {
        for msg in rx {
            if stdin.write_all(&msg).and_then(|_| stdin.flush()).is_err() {
                break;
            }
        }
    });
    tx
}

/// A worker process in the detector slot.
pub struct ExternalDetector {
    client: WorkerClient,
}

impl ExternalDetector {
    pub fn spawn(command: &[String], timeout: Duration) -> Result<Self, BackendError> {
        Ok(Self {
            client: WorkerClient::spawn(command, timeout)?,
        })
    }

    pub fn client(&mut self) -> &mut WorkerClient {
        &mut self.client
    }
}

impl DetectorBackend for ExternalDetector {
    fn capabilities(&self) -> &Capabilities {
        self.client.capabilities()
    }

    fn detect(&mut self, frame: &Frame) -> Result<Vec<Detection<f64>>, BackendError> {
        self.client.detect(frame)
    }
}

/// Worker-side request handling, for implementing workers in Rust.
pub trait WorkerHandler {
    fn capabilities(&self) -> Response;
    fn detect(&mut self, frame: &Frame) -> Result<Vec<Detection<f64>>, String>;
    fn denoise(&mut self, frame: &Frame) -> Result<Frame, String>;
}

/// Answers requests from `input` on `output` until `input` ends.
pub fn serve<R: std::io::Read, W: Write, H: WorkerHandler>(
    mut input: R,
    mut output: W,
    handler: &mut H,
) -> Result<(), ProtocolError> {
    while let Some(body) = protocol::read_frame(&mut input)? {
        let response = match protocol::decode_body::<Request>(&body) {
            Ok(Request::Hello) => handler.capabilities(),
            Ok(Request::Detect { frame }) => match frame.to_frame() {
                Ok(f) => match handler.detect(&f) {
                    Ok(dets) => Response::Detections {
                        items: dets.iter().map(Into::into).collect(),
                    },
                    Err(message) => Response::Error { message },
                },
                Err(e) => Response::Error { message: e.0 },
            },
            Ok(Request::Denoise { frame }) => match frame.to_frame() {
                Ok(f) => match handler.denoise(&f) {
                    Ok(out) => Response::Frame(WireFrame::from_frame(&out)),
                    Err(message) => Response::Error { message },
                },
                Err(e) => Response::Error { message: e.0 },
            },
            Err(e) => Response::Error { message: e.0 },
        };
        protocol::write_message(&mut output, &response).map_err(|e| ProtocolError(format!("write failed: {e}")))?;
    }
    Ok(())
}
