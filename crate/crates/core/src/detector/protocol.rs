//! Worker wire protocol.
//!
//! Each message is a 4-byte big-endian unsigned length `N` followed by `N`
//! bytes of UTF-8 JSON. Requests and responses carry a `"type"` tag:
//!
//! ```text
//! {"type":"hello"}                                 -> {"type":"capabilities","classes":[...]}
//! {"type":"detect","frame":{"width":W,"height":H,"pixels_b64":...}}
//!                                                  -> {"type":"detections","items":[...]}
//! {"type":"denoise","frame":{...}}                 -> {"type":"frame","width":W,"height":H,"pixels_b64":...}
//! ```
//!
//! A worker may answer any request with `{"type":"error","message":...}`.

use std::io::{ErrorKind, Read, Write};

use base64::Engine;
use serde::{Deserialize, Serialize};

use crate::model::{BoundingBox, Detection, Frame, ObjectClass};

/// Frames above this size are rejected instead of allocated.
pub const MAX_MESSAGE_BYTES: u32 = 256 * 1024 * 1024;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("protocol error: {0}")]
pub struct ProtocolError(pub String);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireFrame {
    pub width: u32,
    pub height: u32,
    pub pixels_b64: String,
}

impl WireFrame {
    pub fn from_frame(frame: &Frame) -> Self {
        Self {
            width: frame.width(),
            height: frame.height(),
            pixels_b64: base64::engine::general_purpose::STANDARD.encode(frame.pixels()),
        }
    }

    pub fn to_frame(&self) -> Result<Frame, ProtocolError> {
        let pixels = base64::engine::general_purpose::STANDARD
            .decode(&self.pixels_b64)
            .map_err(|e| ProtocolError(format!("pixels_b64: {e}")))?;
        Frame::new(self.width, self.height, pixels).map_err(|e| ProtocolError(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireDetection {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
    pub class: String,
    pub confidence: f64,
}

impl From<&Detection<f64>> for WireDetection {
    fn from(d: &Detection<f64>) -> Self {
        Self {
            x_min: d.bbox.x_min,
            y_min: d.bbox.y_min,
            x_max: d.bbox.x_max,
            y_max: d.bbox.y_max,
            class: d.class_label.to_string(),
            confidence: d.confidence,
        }
    }
}

impl TryFrom<&WireDetection> for Detection<f64> {
    type Error = ProtocolError;

    fn try_from(w: &WireDetection) -> Result<Self, Self::Error> {
        let bbox = BoundingBox::new(w.x_min, w.y_min, w.x_max, w.y_max).map_err(|e| ProtocolError(e.to_string()))?;
        Detection::new(bbox, ObjectClass::from(w.class.clone()), w.confidence).map_err(|e| ProtocolError(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Request {
    Hello,
    Detect { frame: WireFrame },
    Denoise { frame: WireFrame },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Response {
    Capabilities {
        classes: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
    },
    Detections {
        items: Vec<WireDetection>,
    },
    Frame(WireFrame),
    Error {
        message: String,
    },
}

pub fn encode_message<S: Serialize>(msg: &S) -> Vec<u8> {
    let body = serde_json::to_vec(msg).expect("protocol messages serialize");
    let mut out = Vec::with_capacity(4 + body.len());
    out.extend_from_slice(&(body.len() as u32).to_be_bytes());
    out.extend_from_slice(&body);
    out
}

pub fn write_message<W: Write, S: Serialize>(w: &mut W, msg: &S) -> std::io::Result<()> {
    w.write_all(&encode_message(msg))?;
    w.flush()
}

/// Reads one framed message body. `Ok(None)` on a clean end of stream
/// (no bytes of a new message read).
pub fn read_frame<R: Read>(r: &mut R) -> Result<Option<Vec<u8>>, ProtocolError> {
    let mut prefix = [0u8; 4];
    let got = read_full(r, &mut prefix)?;
    if got == 0 {
        return Ok(None);
    }
    if got < 4 {
        return Err(ProtocolError(format!("truncated length prefix ({got} of 4 bytes)")));
    }
    let len = u32::from_be_bytes(prefix);
    if len > MAX_MESSAGE_BYTES {
        return Err(ProtocolError(format!("message length {len} exceeds limit")));
    }
    let mut body = vec![0u8; len as usize];
    let got = read_full(r, &mut body)?;
    if got < body.len() {
        return Err(ProtocolError(format!("truncated body ({got} of {len} bytes)")));
    }
    Ok(Some(body))
}

pub fn decode_body<T: for<'de> Deserialize<'de>>(body: &[u8]) -> Result<T, ProtocolError> {
    let text = std::str::from_utf8(body).map_err(|e| ProtocolError(format!("body is not UTF-8: {e}")))?;
    serde_json::from_str(text).map_err(|e| ProtocolError(format!("bad message: {e}")))
}

pub fn read_message<R: Read, T: for<'de> Deserialize<'de>>(r: &mut R) -> Result<Option<T>, ProtocolError> {
    read_frame(r)?.map(|b| decode_body(&b)).transpose()
}

fn read_full<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<usize, ProtocolError> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == ErrorKind::Interrupted => continue,
            Err(e) => return Err(ProtocolError(format!("read failed: {e}"))),
        }
    }
    Ok(filled)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn frames_are_length_prefixed_json() {
        let bytes = encode_message(&Request::Hello);
        assert_eq!(&bytes[..4], &[0, 0, 0, 16]);
        assert_eq!(&bytes[4..], br#"{"type":"hello"}"#);
    }

    #[test]
    fn wire_shapes_match_protocol() {
        let resp = Response::Detections {
            items: vec![WireDetection {
                x_min: 1.0,
                y_min: 2.0,
                x_max: 3.5,
                y_max: 4.0,
                class: "car".into(),
                confidence: 0.87,
            }],
        };
        let v: serde_json::Value = serde_json::to_value(&resp).unwrap();
        assert_eq!(
            v,
            serde_json::json!({"type":"detections","items":[{"x_min":1.0,"y_min":2.0,"x_max":3.5,"y_max":4.0,"class":"car","confidence":0.87}]})
        );
        let frame = Response::Frame(WireFrame {
            width: 1,
            height: 1,
            pixels_b64: "AAAA".into(),
        });
        assert_eq!(
            serde_json::to_value(&frame).unwrap(),
            serde_json::json!({"type":"frame","width":1,"height":1,"pixels_b64":"AAAA"})
        );
        let caps: Response = decode_body(br#"{"type":"capabilities","classes":["car"]}"#).unwrap();
        assert_eq!(
            caps,
            Response::Capabilities {
                classes: vec!["car".into()],
                name: None
            }
        );
    }

    #[test]
    fn truncated_prefix_is_a_protocol_error() {
        let mut r: &[u8] = &[0, 0];
        assert!(read_frame(&mut r).unwrap_err().0.contains("length prefix"));
        let mut r: &[u8] = &[0, 0, 0, 9, b'{'];
        assert!(read_frame(&mut r).unwrap_err().0.contains("truncated body"));
        let mut r: &[u8] = &[];
        assert_eq!(read_frame(&mut r).unwrap(), None);
        let mut r: &[u8] = &[0xff, 0xff, 0xff, 0xff];
        assert!(read_frame(&mut r).is_err());
    }

    #[test]
    fn bad_fields_are_protocol_errors() {
        assert!(decode_body::<Response>(br#"{"type":"detections"}"#).is_err());
        assert!(decode_body::<Response>(b"\xff\xfe").is_err());
        let w = WireFrame {
            width: 2,
            height: 2,
            pixels_b64: "AAAA".into(),
        };
        assert!(w.to_frame().is_err());
        let bad = WireDetection {
            x_min: 3.0,
            y_min: 0.0,
            x_max: 1.0,
            y_max: 1.0,
            class: "car".into(),
            confidence: 0.5,
        };
        assert!(Detection::try_from(&bad).is_err());
    }

    proptest! {
        #[test]
        fn detections_survive_the_wire(
            x in -1e4f64..1e4, y in -1e4f64..1e4, w in 1e-6f64..1e4, h in 1e-6f64..1e4, c in 0.0f64..=1.0,
        ) {
            let d = Detection::car(BoundingBox::new(x, y, x + w, y + h).unwrap(), c).unwrap();
            let msg = Response::Detections { items: vec![WireDetection::from(&d)] };
            let bytes = encode_message(&msg);
            let back: Response = read_message(&mut bytes.as_slice()).unwrap().unwrap();
            let Response::Detections { items } = back else { panic!() };
            prop_assert_eq!(Detection::try_from(&items[0]).unwrap(), d);
        }
    }
}
