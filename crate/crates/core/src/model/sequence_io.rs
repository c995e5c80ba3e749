//! On-disk layout of a video sequence: `frame_NNNNNN.ppm` files plus
//! `manifest.json`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::model::{ppm, Frame, ModelError, VideoSequence};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub fps: f64,
    pub width: u32,
    pub height: u32,
    pub count: usize,
}

pub fn frame_file_name(index: usize) -> String {
    format!("frame_{index:06}.ppm")
}

pub fn write_sequence(seq: &VideoSequence, dir: &Path) -> Result<(), ModelError> {
    std::fs::create_dir_all(dir).map_err(|e| ModelError::io(dir, e))?;
    for (i, frame) in seq.frames().iter().enumerate() {
        ppm::save(frame, &dir.join(frame_file_name(i)))?;
    }
    let (width, height) = seq.resolution();
    let manifest = Manifest {
        fps: seq.fps(),
        width,
        height,
        count: seq.len(),
    };
    write_json(&dir.join(MANIFEST_FILE), &manifest)
}

pub fn read_manifest(dir: &Path) -> Result<Manifest, ModelError> {
    let path = dir.join(MANIFEST_FILE);
    let text = std::fs::read_to_string(&path).map_err(|e| ModelError::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| ModelError::Manifest(format!("{}: {e}", path.display())))
}

pub fn read_sequence(dir: &Path) -> Result<VideoSequence, ModelError> {
    let manifest = read_manifest(dir)?;
    if manifest.count == 0 {
        return Err(ModelError::Manifest("manifest count is 0".into()));
    }
    let frames = (0..manifest.count)
        .map(|i| {
            let frame = ppm::load(&dir.join(frame_file_name(i)))?;
            if (frame.width(), frame.height()) != (manifest.width, manifest.height) {
                return Err(ModelError::Manifest(format!(
                    "{} is {}x{}, manifest says {}x{}",
                    frame_file_name(i),
                    frame.width(),
                    frame.height(),
                    manifest.width,
                    manifest.height
                )));
            }
            Ok(frame)
        })
        .collect::<Result<Vec<Frame>, _>>()?;
    VideoSequence::new(frames, manifest.fps)
}

/// Pretty-printed JSON to `path`.
pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<(), ModelError> {
    let text = serde_json::to_string_pretty(value).expect("serializable value");
    std::fs::write(path, text).map_err(|e| ModelError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequence_directory_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let frames = (0..3u8)
            .map(|i| Frame::filled(5, 4, [i, 2 * i, 3 * i]).unwrap())
            .collect();
        let seq = VideoSequence::new(frames, 24.0).unwrap();
        write_sequence(&seq, dir.path()).unwrap();

        assert!(dir.path().join("frame_000002.ppm").exists());
        let manifest = read_manifest(dir.path()).unwrap();
        assert_eq!(
            manifest,
            Manifest {
                fps: 24.0,
                width: 5,
                height: 4,
                count: 3
            }
        );
        assert_eq!(read_sequence(dir.path()).unwrap(), seq);
    }

    #[test]
    fn missing_frame_is_an_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let seq = VideoSequence::new(vec![Frame::filled(2, 2, [0; 3]).unwrap()], 10.0).unwrap();
        write_sequence(&seq, dir.path()).unwrap();
        std::fs::remove_file(dir.path().join("frame_000000.ppm")).unwrap();
        assert!(matches!(read_sequence(dir.path()), Err(ModelError::Io { .. })));
    }
}
