//! Reference worker: answers `detect` with the reference detector and
//! `denoise` with the chroma clamp, over stdin/stdout.
//!
//! ```text
//! flarebench-worker --car-box X0,Y0,X1,Y1 [--mode normal|stall|truncate|garbage|crash]
//! ```
//!
//! The non-normal modes misbehave on purpose after the handshake, for
//! exercising client error handling: `stall` never answers, `truncate`
//! writes half a length prefix and exits, `garbage` sends a well-framed
//! non-JSON body, `crash` exits without answering.

use std::io::{self, Read, Write};
use std::process::ExitCode;

use flarebench::detector::protocol::{self, Request, Response};
use flarebench::detector::worker::{serve, WorkerHandler};
use flarebench::detector::{reference_detect, ReferenceDetectorConfig};
use flarebench::pipeline::{chroma_clamp_denoise, ChromaClampConfig};
use flarebench::{BoundingBox, Detection, Frame};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Mode {
    Normal,
    Stall,
    Truncate,
    Garbage,
    Crash,
}

struct Reference {
    target: BoundingBox,
    config: ReferenceDetectorConfig,
}

impl WorkerHandler for Reference {
    fn capabilities(&self) -> Response {
        Response::Capabilities {
            classes: vec!["car".into()],
            name: Some("reference-worker".into()),
        }
    }

    fn detect(&mut self, frame: &Frame) -> Result<Vec<Detection>, String> {
        Ok(reference_detect(frame, &self.target, &self.config))
    }

    fn denoise(&mut self, frame: &Frame) -> Result<Frame, String> {
        Ok(chroma_clamp_denoise(frame, &ChromaClampConfig::default()))
    }
}

fn parse_args() -> Result<(BoundingBox, Mode), String> {
    let mut target = None;
    let mut mode = Mode::Normal;
    let mut args = std::env::args().skip(1);
    while let Some(arg) = args.next() {
        let mut value = || args.next().ok_or_else(|| format!("{arg} needs a value"));
        match arg.as_str() {
            "--car-box" => {
                let v = value()?;
                let parts: Vec<f64> = v
                    .split(',')
                    .map(|p| p.trim().parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| format!("--car-box {v}: {e}"))?;
                let [x0, y0, x1, y1] = parts[..] else {
                    return Err(format!("--car-box needs four numbers, got {v}"));
                };
                target = Some(BoundingBox::new(x0, y0, x1, y1).map_err(|e| e.to_string())?);
            }
            "--mode" => {
                mode = match value()?.as_str() {
                    "normal" => Mode::Normal,
                    "stall" => Mode::Stall,
                    "truncate" => Mode::Truncate,
                    "garbage" => Mode::Garbage,
                    "crash" => Mode::Crash,
                    other => return Err(format!("unknown mode {other}")),
                }
            }
            other => return Err(format!("unknown argument {other}")),
        }
    }
    Ok((target.ok_or("--car-box is required")?, mode))
}

/// Handshake normally, then misbehave on the first real request.
fn misbehave(handler: &Reference, mode: Mode) -> io::Result<()> {
    let mut input = io::stdin().lock();
    let mut output = io::stdout().lock();
    while let Some(req) = protocol::read_message::<_, Request>(&mut input).map_err(io::Error::other)? {
        if req == Request::Hello {
            protocol::write_message(&mut output, &handler.capabilities())?;
            continue;
        }
        match mode {
            Mode::Stall => {
                // keep reading so the client's writes never block
                let mut sink = Vec::new();
                let _ = input.read_to_end(&mut sink);
                std::thread::park();
            }
            Mode::Truncate => {
                output.write_all(&[0, 0])?;
                output.flush()?;
            }
            Mode::Garbage => {
                output.write_all(&5u32.to_be_bytes())?;
                output.write_all(b"{oops")?;
                output.flush()?;
                continue;
            }
            Mode::Crash | Mode::Normal => {}
        }
        std::process::exit(3);
    }
    Ok(())
}

fn main() -> ExitCode {
    let (target, mode) = match parse_args() {
        Ok(v) => v,
        Err(e) => {
            eprintln!("flarebench-worker: {e}");
            return ExitCode::from(2);
        }
    };
    let mut handler = Reference {
        target,
        config: ReferenceDetectorConfig::default(),
    };
    let result = if mode == Mode::Normal {
        serve(io::stdin().lock(), io::stdout().lock(), &mut handler).map_err(io::Error::other)
    } else {
        misbehave(&handler, mode)
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("flarebench-worker: {e}");
            ExitCode::FAILURE
        }
    }
}
