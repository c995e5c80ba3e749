use crate::model::ModelError;

pub type Rgb = [u8; 3];

/// Row-major RGB24 raster with its position in a sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
    pub index: u64,
    pub timestamp_ms: u64,
}

impl Frame {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self, ModelError> {
        if width == 0 || height == 0 {
            return Err(ModelError::InvalidFrame(format!(
                "dimensions must be at least 1x1, got {width}x{height}"
            )));
        }
        let expected = 3 * width as usize * height as usize;
        if pixels.len() != expected {
            return Err(ModelError::InvalidFrame(format!(
                "expected {expected} pixel bytes for {width}x{height}, got {}",
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
            index: 0,
            timestamp_ms: 0,
        })
    }

    pub fn filled(width: u32, height: u32, rgb: Rgb) -> Result<Self, ModelError> {
        let n = width as usize * height as usize;
        let pixels = rgb.iter().copied().cycle().take(3 * n).collect();
        Self::new(width, height, pixels)
    }

    pub fn with_position(mut self, index: u64, timestamp_ms: u64) -> Self {
        self.index = index;
        self.timestamp_ms = timestamp_ms;
        self
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    pub fn pixel(&self, x: u32, y: u32) -> Rgb {
        let i = self.offset(x, y);
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    pub fn set_pixel(&mut self, x: u32, y: u32, rgb: Rgb) {
        let i = self.offset(x, y);
        self.pixels[i..i + 3].copy_from_slice(&rgb);
    }

    fn offset(&self, x: u32, y: u32) -> usize {
        assert!(x < self.width && y < self.height, "pixel ({x}, {y}) out of bounds");
        3 * (y as usize * self.width as usize + x as usize)
    }
}

/// Arithmetic mean over all pixels of `(R + G + B) / 3`, in `[0, 255]`.
pub fn mean_brightness(frame: &Frame) -> f64 {
    let sum: u64 = frame.pixels.iter().map(|&b| b as u64).sum();
    sum as f64 / frame.pixels.len() as f64
}

/// Timestamp of frame `index` at `fps`, rounded to the nearest millisecond.
pub fn timestamp_for(index: u64, fps: f64) -> u64 {
    (1000.0 * index as f64 / fps).round() as u64
}

/// Ordered frames sharing one resolution, sampled at a fixed rate.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoSequence {
    frames: Vec<Frame>,
    fps: f64,
    resolution: (u32, u32),
}

impl VideoSequence {
    /// Builds a sequence, re-stamping every frame with its ordinal and
    /// `round(1000 * i / fps)`.
    pub fn new(frames: Vec<Frame>, fps: f64) -> Result<Self, ModelError> {
        // Above 1000 fps millisecond stamps would collide.
        if !(fps.is_finite() && fps > 0.0 && fps <= 1000.0) {
            return Err(ModelError::InvalidSequence(format!(
                "fps must be in (0, 1000], got {fps}"
            )));
        }
        let Some(first) = frames.first() else {
            return Err(ModelError::InvalidSequence("sequence has no frames".into()));
        };
        let resolution = (first.width, first.height);
        let mut frames = frames;
        for (i, f) in frames.iter_mut().enumerate() {
            if (f.width, f.height) != resolution {
                return Err(ModelError::InvalidSequence(format!(
                    "frame {i} is {}x{}, expected {}x{}",
                    f.width, f.height, resolution.0, resolution.1
                )));
            }
            f.index = i as u64;
            f.timestamp_ms = timestamp_for(i as u64, fps);
        }
        Ok(Self {
            frames,
            fps,
            resolution,
        })
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<Frame> {
        self.frames
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn resolution(&self) -> (u32, u32) {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}
