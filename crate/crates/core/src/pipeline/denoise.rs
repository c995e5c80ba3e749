use serde::{Deserialize, Serialize};

use crate::detector::{BackendError, WorkerClient};
use crate::model::Frame;

/// Anything that cleans a frame before the tuned detector sees it.
pub trait Denoiser: Send {
    fn name(&self) -> &str;
    fn denoise(&mut self, frame: &Frame) -> Result<Frame, BackendError>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityDenoiser;

impl Denoiser for IdentityDenoiser {
    fn name(&self) -> &str {
        "identity"
    }

    fn denoise(&mut self, frame: &Frame) -> Result<Frame, BackendError> {
        Ok(frame.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChromaClampConfig {
    /// Minimum `max - min` channel spread for a pixel to be treated.
    pub excess_threshold: u8,
    /// Minimum brightest-channel value for a pixel to be treated.
    pub luma_floor: u8,
}

impl Default for ChromaClampConfig {
    fn default() -> Self {
        Self {
            excess_threshold: 80,
            luma_floor: 180,
        }
    }
}

/// Pulls bright, strongly colored pixels toward gray.
///
/// A pixel is treated when its brightest channel is at least `luma_floor`
/// and its channel spread `max - min` is at least `excess_threshold`. Each
/// channel then moves toward the pixel's channel mean by `min(1, spread/255)`.
/// Every channel moves toward the mean, so the spread never grows.
pub fn chroma_clamp_denoise(frame: &Frame, cfg: &ChromaClampConfig) -> Frame {
    let mut out = frame.clone();
    for px in out.pixels_mut().chunks_exact_mut(3) {
        let hi = px[0].max(px[1]).max(px[2]);
        let lo = px[0].min(px[1]).min(px[2]);
        let spread = hi - lo;
        if hi < cfg.luma_floor || spread < cfg.excess_threshold {
            continue;
        }
        let mean = (px[0] as f64 + px[1] as f64 + px[2] as f64) / 3.0;
        let k = (spread as f64 / 255.0).min(1.0);
        for c in px.iter_mut() {
            let v = *c as f64;
            *c = (v + k * (mean - v)).round().clamp(0.0, 255.0) as u8;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ChromaClampDenoiser {
    pub config: ChromaClampConfig,
}

impl Denoiser for ChromaClampDenoiser {
    fn name(&self) -> &str {
        "chroma_clamp"
    }

    fn denoise(&mut self, frame: &Frame) -> Result<Frame, BackendError> {
        Ok(chroma_clamp_denoise(frame, &self.config))
    }
}

/// A worker process in the denoiser slot.
pub struct ExternalDenoiser {
    client: WorkerClient,
}

impl ExternalDenoiser {
    pub fn new(client: WorkerClient) -> Self {
        Self { client }
    }
}

impl Denoiser for ExternalDenoiser {
    fn name(&self) -> &str {
        &self.client.capabilities().name
    }

    fn denoise(&mut self, frame: &Frame) -> Result<Frame, BackendError> {
        self.client.denoise(frame)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn one(px: [u8; 3]) -> [u8; 3] {
        let f = Frame::filled(1, 1, px).unwrap();
        chroma_clamp_denoise(&f, &ChromaClampConfig::default()).pixel(0, 0)
    }

    fn spread(px: [u8; 3]) -> u8 {
        px.iter().max().unwrap() - px.iter().min().unwrap()
    }

    #[test]
    fn gray_is_a_fixpoint() {
        for v in [0, 100, 180, 255] {
            assert_eq!(one([v, v, v]), [v, v, v]);
        }
    }

    #[test]
    fn saturated_blue_moves_toward_gray() {
        // mean 125, spread 195, k = 195/255
        let out = one([60, 60, 255]);
        assert_eq!(out, [110, 110, 156]);
        assert!(spread(out) < 195);
    }

    #[test]
    fn dark_blue_is_left_alone() {
        assert_eq!(one([10, 10, 150]), [10, 10, 150]);
        // bright but only mildly colored
        assert_eq!(one([200, 220, 255]), [200, 220, 255]);
    }

    proptest! {
        #[test]
        fn spread_never_grows_and_output_is_fixpoint(px in any::<[u8; 3]>()) {
            let out = one(px);
            prop_assert!(spread(out) <= spread(px));
            prop_assert_eq!(one(out), out);
        }

        #[test]
        fn spread_never_grows_for_any_config(px in any::<[u8; 3]>(), t in any::<u8>(), floor in any::<u8>()) {
            let cfg = ChromaClampConfig { excess_threshold: t, luma_floor: floor };
            let out = chroma_clamp_denoise(&Frame::filled(1, 1, px).unwrap(), &cfg).pixel(0, 0);
            prop_assert!(spread(out) <= spread(px));
        }
    }
}
