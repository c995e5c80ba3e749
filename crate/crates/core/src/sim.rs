//! Synthetic emergency-flasher video with exact ground truth.
//!
//! The flasher is a periodic on/off schedule starting "on" at t = 0. A camera
//! frame integrates the schedule over its exposure window
//! `[i / fps, i / fps + exposure_fraction / fps)`; the resulting energy drives
//! a Gaussian glow that is added to a flat night scene, multiplied by the ISO
//! gain, clamped and finally perturbed by seeded Gaussian sensor noise.

use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::augmentation::{BLUE, RED};
use crate::model::{BoundingBox, Frame, ModelError, Rgb, VideoSequence};
use crate::seed;

/// DoubleBurst pulse length and gap, seconds.
pub const BURST_PULSE_S: f64 = 0.060;
pub const BURST_GAP_S: f64 = 0.080;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error("invalid flasher pattern: {0}")]
    InvalidPattern(String),
    #[error("invalid camera: {0}")]
    InvalidCamera(String),
    #[error("invalid duration: {0}")]
    InvalidDuration(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlasherMode {
    SteadyOff,
    SingleColor,
    /// First half of each period belongs to `colors[0]`, second half to
    /// `colors[1]`; the lamp is lit for `duty_cycle` of each half.
    AlternatingTwoColor,
    /// Two 60 ms pulses 80 ms apart at the start of each period.
    DoubleBurst,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FlasherPattern {
    pub frequency_hz: f64,
    pub duty_cycle: f64,
    pub mode: FlasherMode,
    pub colors: Vec<Rgb>,
    pub intensity: f64,
}

impl Default for FlasherPattern {
    fn default() -> Self {
        Self {
            frequency_hz: 1.3,
            duty_cycle: 0.5,
            mode: FlasherMode::SingleColor,
            colors: vec![BLUE],
            intensity: 1.0,
        }
    }
}

impl FlasherPattern {
    pub fn off() -> Self {
        Self {
            mode: FlasherMode::SteadyOff,
            ..Default::default()
        }
    }

    pub fn single(frequency_hz: f64, color: Rgb) -> Self {
        Self {
            frequency_hz,
            colors: vec![color],
            ..Default::default()
        }
    }

    pub fn alternating(frequency_hz: f64) -> Self {
        Self {
            frequency_hz,
            mode: FlasherMode::AlternatingTwoColor,
            colors: vec![RED, BLUE],
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.mode == FlasherMode::SteadyOff {
            return Ok(());
        }
        let bad = |msg: String| Err(SimError::InvalidPattern(msg));
        if !(self.frequency_hz.is_finite() && self.frequency_hz > 0.0) {
            return bad(format!("frequency_hz must be > 0, got {}", self.frequency_hz));
        }
        if !(0.0..=1.0).contains(&self.duty_cycle) {
            return bad(format!("duty_cycle must be in [0, 1], got {}", self.duty_cycle));
        }
        if !(self.intensity > 0.0 && self.intensity <= 1.0) {
            return bad(format!("intensity must be in (0, 1], got {}", self.intensity));
        }
        match (self.mode, self.colors.len()) {
            (FlasherMode::AlternatingTwoColor, 2) => {}
            (FlasherMode::AlternatingTwoColor, n) => {
                return bad(format!("AlternatingTwoColor needs exactly 2 colors, got {n}"))
            }
            (_, 1 | 2) => {}
            (_, n) => return bad(format!("colors must hold 1 or 2 entries, got {n}")),
        }
        if self.mode == FlasherMode::DoubleBurst && 1.0 / self.frequency_hz < 2.0 * BURST_PULSE_S + BURST_GAP_S {
            return bad(format!(
                "DoubleBurst period is 200 ms long; frequency_hz {} is too high",
                self.frequency_hz
            ));
        }
        Ok(())
    }

    pub fn period_s(&self) -> f64 {
        1.0 / self.frequency_hz
    }

    /// Lit intervals within one period as `(start_s, end_s, color_slot)`.
    fn lit_intervals(&self) -> Vec<(f64, f64, usize)> {
        let t = self.period_s();
        match self.mode {
            FlasherMode::SteadyOff => vec![],
            FlasherMode::SingleColor => vec![(0.0, self.duty_cycle * t, 0)],
            FlasherMode::AlternatingTwoColor => {
                let half = t / 2.0;
                vec![
                    (0.0, self.duty_cycle * half, 0),
                    (half, half + self.duty_cycle * half, 1),
                ]
            }
            FlasherMode::DoubleBurst => {
                let second = self.colors.len() - 1;
                vec![
                    (0.0, BURST_PULSE_S, 0),
                    (BURST_PULSE_S + BURST_GAP_S, 2.0 * BURST_PULSE_S + BURST_GAP_S, second),
                ]
            }
        }
    }

    /// Whether the lamp is lit at time `t` (seconds), and in which color slot.
    pub fn lit_at(&self, t: f64) -> Option<usize> {
        if self.mode == FlasherMode::SteadyOff {
            return None;
        }
        let period = self.period_s();
        let phase = t - (t / period).floor() * period;
        self.lit_intervals()
            .into_iter()
            .find(|&(s, e, _)| phase >= s && phase < e)
            .map(|(_, _, slot)| slot)
    }

    /// Seconds lit per color slot inside `[start, start + len)`.
    pub fn lit_time(&self, start: f64, len: f64) -> [f64; 2] {
        let mut acc = [0.0; 2];
        if self.mode == FlasherMode::SteadyOff || len <= 0.0 {
            return acc;
        }
        let period = self.period_s();
        let end = start + len;
        let intervals = self.lit_intervals();
        let first = (start / period).floor() as i64;
        let last = (end / period).floor() as i64;
        for k in first..=last {
            let base = k as f64 * period;
            for &(s, e, slot) in &intervals {
                let lo = (base + s).max(start);
                let hi = (base + e).min(end);
                if hi > lo {
                    acc[slot] += hi - lo;
                }
            }
        }
        acc
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CameraModel {
    pub fps: f64,
    /// Shutter-open fraction of the frame interval.
    pub exposure_fraction: f64,
    pub iso_gain: f64,
    pub noise_sigma: f64,
}

impl Default for CameraModel {
    fn default() -> Self {
        Self {
            fps: 30.0,
            exposure_fraction: 1.0,
            iso_gain: 1.0,
            noise_sigma: 2.0,
        }
    }
}

impl CameraModel {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::InvalidCamera(msg));
        if !(self.fps.is_finite() && self.fps > 0.0 && self.fps <= 1000.0) {
            return bad(format!("fps must be in (0, 1000], got {}", self.fps));
        }
        if !(self.exposure_fraction > 0.0 && self.exposure_fraction <= 1.0) {
            return bad(format!(
                "exposure_fraction must be in (0, 1], got {}",
                self.exposure_fraction
            ));
        }
        if !(self.iso_gain >= 1.0 && self.iso_gain.is_finite()) {
            return bad(format!("iso_gain must be >= 1, got {}", self.iso_gain));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return bad(format!("noise_sigma must be >= 0, got {}", self.noise_sigma));
        }
        Ok(())
    }

    pub fn exposure_s(&self) -> f64 {
        self.exposure_fraction / self.fps
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneConfig {
    pub width: u32,
    pub height: u32,
    pub ambient_lux: f64,
    /// Gray level of the car body under full ambient light.
    pub car_albedo: u8,
    pub car_box: BoundingBox<f64>,
    pub flasher_position: (f64, f64),
    /// Gaussian sigma of the flasher glow, pixels.
    pub flasher_radius: f64,
    /// Scales the car and the flasher about the car center.
    pub distance_scale: f64,
    /// Peak glow multiplier; values above 1 saturate a disc around the lamp.
    pub flare_gain: f64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            width: 128,
            height: 96,
            ambient_lux: 5.0,
            car_albedo: 140,
            car_box: BoundingBox {
                x_min: 32.0,
                y_min: 40.0,
                x_max: 96.0,
                y_max: 80.0,
            },
            flasher_position: (64.0, 60.0),
            flasher_radius: 24.0,
            distance_scale: 1.0,
            flare_gain: 8.0,
        }
    }
}

impl SceneConfig {
    /// Car box after `distance_scale` is applied.
    pub fn effective_car_box(&self) -> BoundingBox<f64> {
        self.car_box.scale_about_center(self.distance_scale)
    }

    pub fn effective_flasher(&self) -> ((f64, f64), f64) {
        let (cx, cy) = self.car_box.center();
        let (fx, fy) = self.flasher_position;
        let s = self.distance_scale;
        ((cx + (fx - cx) * s, cy + (fy - cy) * s), self.flasher_radius * s)
    }

    /// `255 * min(1, lux / 1000)`.
    pub fn base_luminance(&self) -> f64 {
        255.0 * (self.ambient_lux / 1000.0).min(1.0)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::InvalidScene(msg));
        if self.width == 0 || self.height == 0 {
            return bad(format!(
                "resolution must be at least 1x1, got {}x{}",
                self.width, self.height
            ));
        }
        if !(self.ambient_lux >= 0.0 && self.ambient_lux.is_finite()) {
            return bad(format!("ambient_lux must be >= 0, got {}", self.ambient_lux));
        }
        if !(self.distance_scale > 0.0 && self.distance_scale.is_finite()) {
            return bad(format!("distance_scale must be > 0, got {}", self.distance_scale));
        }
        if !(self.flasher_radius > 0.0 && self.flasher_radius.is_finite()) {
            return bad(format!("flasher_radius must be > 0, got {}", self.flasher_radius));
        }
        if !(self.flare_gain > 0.0 && self.flare_gain.is_finite()) {
            return bad(format!("flare_gain must be > 0, got {}", self.flare_gain));
        }
        if !self.car_box.is_valid() {
            return bad(format!("car_box is degenerate: {:?}", self.car_box));
        }
        let car = self.effective_car_box();
        if !car.inside_frame(self.width, self.height) {
            return bad(format!(
                "car_box {car:?} (after distance_scale) is outside the {}x{} frame",
                self.width, self.height
            ));
        }
        let ((fx, fy), _) = self.effective_flasher();
        if !(fx >= car.x_min && fx <= car.x_max && fy <= car.y_max && fy >= 0.0) {
            return bad(format!("flasher at ({fx}, {fy}) is not on or above car_box {car:?}"));
        }
        Ok(())
    }
}

/// Fraction of frame `frame_index`'s exposure window during which the lamp
/// is lit, in `[0, 1]`.
pub fn waveform_integral(pattern: &FlasherPattern, cam: &CameraModel, frame_index: u64) -> f64 {
    window_integral(pattern, frame_index as f64 / cam.fps, cam.exposure_s())
}

/// Fraction of `[start_s, start_s + window_s)` during which the lamp is lit.
/// Rounded to 1e-12 so that summation noise does not leak into comparisons.
pub fn window_integral(pattern: &FlasherPattern, start_s: f64, window_s: f64) -> f64 {
    if window_s <= 0.0 {
        return 0.0;
    }
    let [a, b] = pattern.lit_time(start_s, window_s);
    (((a + b) / window_s) * 1e12).round().clamp(0.0, 1e12) / 1e12
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthEntry {
    pub index: u64,
    /// Lit fraction of the exposure window.
    pub intensity: f64,
    /// Color lit longest during the window, `None` when dark.
    pub color: Option<Rgb>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroundTruth {
    pub entries: Vec<GroundTruthEntry>,
}

pub const GROUND_TRUTH_FILE: &str = "ground_truth.json";

/// Full simulation input, as read from a `simulate` config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    #[serde(default)]
    pub scene: SceneConfig,
    #[serde(default)]
    pub pattern: FlasherPattern,
    #[serde(default)]
    pub camera: CameraModel,
    pub duration_s: f64,
}

struct FrameLight {
    /// Per-pixel flare contribution per channel, before gain.
    energy_rgb: [f64; 3],
    truth: GroundTruthEntry,
}

fn frame_light(pattern: &FlasherPattern, cam: &CameraModel, index: u64) -> FrameLight {
    let start = index as f64 / cam.fps;
    let window = cam.exposure_s();
    let lit = pattern.lit_time(start, window);
    let intensity = ((lit[0] + lit[1]) / window).clamp(0.0, 1.0);
    let color = if lit[0] + lit[1] > 0.0 {
        let slot = if lit[1] > lit[0] { 1 } else { 0 };
        pattern.colors.get(slot).copied()
    } else {
        None
    };
    // Energy relative to a full frame interval, so longer shutters gather more.
    let frame_interval = 1.0 / cam.fps;
    let mut energy_rgb = [0.0; 3];
    for (slot, seconds) in lit.iter().enumerate() {
        if *seconds <= 0.0 {
            continue;
        }
        let c = pattern.colors[slot.min(pattern.colors.len() - 1)];
        let e = (seconds / frame_interval).min(1.0) * pattern.intensity;
        for ch in 0..3 {
            energy_rgb[ch] += e * c[ch] as f64;
        }
    }
    FrameLight {
        energy_rgb,
        truth: GroundTruthEntry {
            index,
            intensity,
            color,
        },
    }
}

/// Static part of the scene: background, car body and the glow kernel.
struct SceneCanvas {
    base: Vec<f64>,
    glow: Vec<f64>,
}

impl SceneCanvas {
    fn new(scene: &SceneConfig) -> Self {
        let (w, h) = (scene.width as usize, scene.height as usize);
        let lum = scene.base_luminance();
        let car_level = lum * scene.car_albedo as f64 / 255.0;
        let car = scene.effective_car_box();
        let ((fx, fy), sigma) = scene.effective_flasher();
        let mut base = vec![lum * 0.5; w * h];
        let mut glow = vec![0.0; w * h];
        for y in 0..h {
            for x in 0..w {
                let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
                let i = y * w + x;
                if px >= car.x_min && px < car.x_max && py >= car.y_min && py < car.y_max {
                    base[i] = car_level;
                }
                let d2 = (px - fx).powi(2) + (py - fy).powi(2);
                glow[i] = scene.flare_gain * (-d2 / (2.0 * sigma * sigma)).exp();
            }
        }
        Self { base, glow }
    }

    fn render(&self, scene: &SceneConfig, cam: &CameraModel, light: &FrameLight, seed: u64) -> Vec<u8> {
        let noise = (cam.noise_sigma > 0.0).then(|| Normal::new(0.0, cam.noise_sigma).expect("validated sigma"));
        let mut rng = seed::rng(seed);
        let mut out = Vec::with_capacity(3 * self.base.len());
        for (base, glow) in self.base.iter().zip(&self.glow) {
            for ch in 0..3 {
                let linear = cam.iso_gain * (base + glow * light.energy_rgb[ch]);
                let mut v = linear.clamp(0.0, 255.0);
                if let Some(n) = &noise {
                    v = (v + n.sample(&mut rng)).clamp(0.0, 255.0);
                }
                out.push(v.round() as u8);
            }
        }
        debug_assert_eq!(out.len(), 3 * scene.width as usize * scene.height as usize);
        out
    }
}

/// Renders `round(duration_s * fps)` frames of the scene with the flasher
/// running, together with the per-frame ground truth.
pub fn render_sequence(
    scene: &SceneConfig,
    pattern: &FlasherPattern,
    cam: &CameraModel,
    duration_s: f64,
    seed: u64,
) -> Result<(VideoSequence, GroundTruth), SimError> {
    if !(duration_s > 0.0 && duration_s.is_finite()) {
        return Err(SimError::InvalidDuration(format!(
            "duration_s must be > 0, got {duration_s}"
        )));
    }
    scene.validate()?;
    pattern.validate()?;
    cam.validate()?;
    let count = (duration_s * cam.fps).round() as u64;
    if count == 0 {
        return Err(SimError::InvalidDuration(format!(
            "{duration_s} s at {} fps yields no frames",
            cam.fps
        )));
    }
    let canvas = SceneCanvas::new(scene);
    let rendered: Vec<(Frame, GroundTruthEntry)> = (0..count)
        .into_par_iter()
        .map(|i| {
            let light = frame_light(pattern, cam, i);
            let pixels = canvas.render(scene, cam, &light, seed::derive(seed, i));
            let frame = Frame::new(scene.width, scene.height, pixels)?;
            Ok((frame, light.truth))
        })
        .collect::<Result<_, SimError>>()?;
    let (frames, entries): (Vec<_>, Vec<_>) = rendered.into_iter().unzip();
    Ok((VideoSequence::new(frames, cam.fps)?, GroundTruth { entries }))
}

/// One frame of the scene with the lamp held fully lit for the whole window.
pub fn render_lit_frame(
    scene: &SceneConfig,
    color: Rgb,
    intensity: f64,
    cam: &CameraModel,
    seed: u64,
) -> Result<Frame, SimError> {
    let pattern = FlasherPattern {
        frequency_hz: 1.0,
        duty_cycle: 1.0,
        mode: FlasherMode::SingleColor,
        colors: vec![color],
        intensity,
    };
    let (seq, _) = render_sequence(scene, &pattern, cam, 1.0 / cam.fps, seed)?;
    Ok(seq.into_frames().remove(0))
}
