//! Day/night split and manual flasher augmentation of night images.
//!
//! Night images get a colored glow (and optionally a horizontal streak)
//! screen-blended at a random position. The glow is a radial Gaussian
//! `peak * exp(-d^2 / (2 * (radius / 2)^2))`, cut off at `3 * radius`.
//! The streak is a fainter copy stretched 6:1 along the row.

use std::path::{Path, PathBuf};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{mean_brightness, ppm, Frame, ModelError, Rgb};
use crate::seed;

pub const LOG_FILE: &str = "augmentation_log.json";

pub const RED: Rgb = [255, 40, 40];
pub const BLUE: Rgb = [60, 60, 255];

/// Glow footprint radius, in units of the placement radius.
const FOOTPRINT_RADII: f64 = 3.0;
const STREAK_PEAK_RATIO: f64 = 0.5;
const STREAK_ASPECT: f64 = 6.0;

#[derive(Debug, thiserror::Error)]
pub enum AugmentError {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("invalid augmentation config: {0}")]
    InvalidConfig(String),
    #[error("no PPM images found in {0}")]
    EmptyDataset(PathBuf),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AugmentationConfig {
    pub night_brightness_threshold: f64,
    pub flare_colors: Vec<Rgb>,
    pub flare_radius_range: (f64, f64),
    pub flare_peak_intensity: f64,
    pub streak_enabled: bool,
    pub rng_seed: u64,
}

impl Default for AugmentationConfig {
    fn default() -> Self {
        Self {
            night_brightness_threshold: 60.0,
            flare_colors: vec![RED, BLUE],
            flare_radius_range: (8.0, 32.0),
            flare_peak_intensity: 1.0,
            streak_enabled: true,
            rng_seed: 0,
        }
    }
}

impl AugmentationConfig {
    pub fn validate(&self) -> Result<(), AugmentError> {
        let t = self.night_brightness_threshold;
        if !(t > 0.0 && t < 255.0) {
            return Err(AugmentError::InvalidConfig(format!(
                "night_brightness_threshold must be in (0, 255), got {t}"
            )));
        }
        if self.flare_colors.is_empty() {
            return Err(AugmentError::InvalidConfig("flare_colors is empty".into()));
        }
        let (lo, hi) = self.flare_radius_range;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(AugmentError::InvalidConfig(format!(
                "flare_radius_range must satisfy 0 < min <= max, got ({lo}, {hi})"
            )));
        }
        let p = self.flare_peak_intensity;
        if !(p > 0.0 && p <= 1.0) {
            return Err(AugmentError::InvalidConfig(format!(
                "flare_peak_intensity must be in (0, 1], got {p}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DayNight {
    Day,
    Night,
}

/// Day iff the mean brightness is strictly above the threshold.
pub fn classify_day_night(frame: &Frame, cfg: &AugmentationConfig) -> DayNight {
    if mean_brightness(frame) > cfg.night_brightness_threshold {
        DayNight::Day
    } else {
        DayNight::Night
    }
}

/// Where a flare was drawn and the region of pixels it may have touched.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlarePlacement {
    pub cx: u32,
    pub cy: u32,
    pub radius: f64,
    pub color: Rgb,
    pub seed: u64,
    /// Half extents `(dx, dy)` of the streak band, when a streak was drawn.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub streak_half_extent: Option<(f64, f64)>,
}

impl FlarePlacement {
    /// True when pixel `(x, y)` lies in the glow disc or the streak band.
    pub fn in_footprint(&self, x: u32, y: u32) -> bool {
        let dx = x as f64 - self.cx as f64;
        let dy = y as f64 - self.cy as f64;
        let reach = FOOTPRINT_RADII * self.radius;
        if dx * dx + dy * dy <= reach * reach {
            return true;
        }
        match self.streak_half_extent {
            Some((hx, hy)) => dx.abs() <= hx && dy.abs() <= hy,
            None => false,
        }
    }
}

/// Draws a flare using the stream derived from `(cfg.rng_seed, frame.index)`.
pub fn augment_flare(frame: &Frame, cfg: &AugmentationConfig) -> Result<(Frame, FlarePlacement), AugmentError> {
    augment_flare_seeded(frame, cfg, seed::derive(cfg.rng_seed, frame.index))
}

pub fn augment_flare_seeded(
    frame: &Frame,
    cfg: &AugmentationConfig,
    seed: u64,
) -> Result<(Frame, FlarePlacement), AugmentError> {
    cfg.validate()?;
    let placement = sample_placement(frame, cfg, seed)?;
    let mut out = frame.clone();
    draw_flare(&mut out, &placement, cfg.flare_peak_intensity);
    Ok((out, placement))
}

fn sample_placement(frame: &Frame, cfg: &AugmentationConfig, seed: u64) -> Result<FlarePlacement, AugmentError> {
    let (lo, hi) = cfg.flare_radius_range;
    let (w, h) = (frame.width(), frame.height());
    if (w as f64) < 2.0 * hi || (h as f64) < 2.0 * hi {
        return Err(AugmentError::DegenerateInput(format!(
            "{w}x{h} frame is smaller than twice the max flare radius {hi}"
        )));
    }
    let mut rng = seed::rng(seed);
    let color = cfg.flare_colors[rng.random_range(0..cfg.flare_colors.len())];
    let radius = if lo < hi { rng.random_range(lo..=hi) } else { lo };
    let cx = rng.random_range(0..w);
    let cy = rng.random_range(0..h);
    let streak_half_extent = cfg.streak_enabled.then(|| {
        let (sx, sy) = streak_sigmas(radius);
        (FOOTPRINT_RADII * sx, FOOTPRINT_RADII * sy)
    });
    Ok(FlarePlacement {
        cx,
        cy,
        radius,
        color,
        seed,
        streak_half_extent,
    })
}

fn streak_sigmas(radius: f64) -> (f64, f64) {
    let sigma_y = radius / 4.0;
    (STREAK_ASPECT * sigma_y, sigma_y)
}

/// Screen blend of one channel: `255 - (255 - base) * (255 - light) / 255`.
pub fn screen_blend(base: u8, light: f64) -> u8 {
    let light = light.clamp(0.0, 255.0);
    let b = base as f64;
    (255.0 - (255.0 - b) * (255.0 - light) / 255.0).round().clamp(b, 255.0) as u8
}

fn draw_flare(frame: &mut Frame, p: &FlarePlacement, peak: f64) {
    let sigma = p.radius / 2.0;
    let reach = FOOTPRINT_RADII * p.radius;
    let (w, h) = (frame.width() as i64, frame.height() as i64);
    let (hx, hy) = p.streak_half_extent.unwrap_or((0.0, 0.0));
    let x_span = reach.max(hx).ceil() as i64;
    let y_span = reach.max(hy).ceil() as i64;
    let (cx, cy) = (p.cx as i64, p.cy as i64);
    let (ssx, ssy) = streak_sigmas(p.radius);

    for y in (cy - y_span).max(0)..(cy + y_span + 1).min(h) {
        for x in (cx - x_span).max(0)..(cx + x_span + 1).min(w) {
            let (xu, yu) = (x as u32, y as u32);
            if !p.in_footprint(xu, yu) {
                continue;
            }
            let dx = (x - cx) as f64;
            let dy = (y - cy) as f64;
            let d2 = dx * dx + dy * dy;
            let glow = if d2 <= reach * reach {
                peak * (-d2 / (2.0 * sigma * sigma)).exp()
            } else {
                0.0
            };
            let streak = if p.streak_half_extent.is_some() && dx.abs() <= hx && dy.abs() <= hy {
                STREAK_PEAK_RATIO * peak * (-(dx * dx) / (2.0 * ssx * ssx) - (dy * dy) / (2.0 * ssy * ssy)).exp()
            } else {
                0.0
            };
            let light = 1.0 - (1.0 - glow) * (1.0 - streak);
            let px = frame.pixel(xu, yu);
            let blended = [0, 1, 2].map(|c| screen_blend(px[c], p.color[c] as f64 * light));
            frame.set_pixel(xu, yu, blended);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub file: String,
    pub classification: DayNight,
    pub placement: Option<FlarePlacement>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub day: usize,
    pub night: usize,
    pub augmented: usize,
    pub skipped: usize,
    pub entries: Vec<LogEntry>,
}

enum Outcome {
    Done(LogEntry),
    Skipped,
}

/// Copies day images verbatim and writes flare-augmented night images to
/// `output_dir`, plus `augmentation_log.json`. Unreadable images are skipped.
///
/// Each image draws from a stream derived from the global seed and its file
/// name, so output does not depend on processing order.
pub fn build_augmented_dataset(
    input_dir: &Path,
    output_dir: &Path,
    cfg: &AugmentationConfig,
) -> Result<DatasetSummary, AugmentError> {
    cfg.validate()?;
    let mut files: Vec<PathBuf> = std::fs::read_dir(input_dir)
        .map_err(|e| ModelError::io(input_dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .and_then(|e| e.to_str())
                    .is_some_and(|e| e.eq_ignore_ascii_case("ppm"))
        })
        .collect();
    if files.is_empty() {
        return Err(AugmentError::EmptyDataset(input_dir.to_path_buf()));
    }
    files.sort();
    std::fs::create_dir_all(output_dir).map_err(|e| ModelError::io(output_dir, e))?;

    let outcomes = files
        .par_iter()
        .enumerate()
        .map(|(index, path)| process_image(path, index as u64, output_dir, cfg))
        .collect::<Result<Vec<_>, AugmentError>>()?;

    let mut summary = DatasetSummary {
        day: 0,
        night: 0,
        augmented: 0,
        skipped: 0,
        entries: Vec::new(),
    };
    for outcome in outcomes {
        match outcome {
            Outcome::Skipped => summary.skipped += 1,
            Outcome::Done(entry) => {
                match entry.classification {
                    DayNight::Day => summary.day += 1,
                    DayNight::Night => summary.night += 1,
                }
                if entry.placement.is_some() {
                    summary.augmented += 1;
                }
                summary.entries.push(entry);
            }
        }
    }
    crate::model::sequence_io::write_json(&output_dir.join(LOG_FILE), &summary.entries)?;
    Ok(summary)
}

fn process_image(
    path: &Path,
    index: u64,
    output_dir: &Path,
    cfg: &AugmentationConfig,
) -> Result<Outcome, AugmentError> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default().to_owned();
    let frame = match ppm::load(path) {
        Ok(f) => f.with_position(index, 0),
        Err(e) => {
            log::warn!("skipping {}: {e}", path.display());
            return Ok(Outcome::Skipped);
        }
    };
    let target = output_dir.join(&name);
    match classify_day_night(&frame, cfg) {
        DayNight::Day => {
            std::fs::copy(path, &target).map_err(|e| ModelError::io(&target, e))?;
            Ok(Outcome::Done(LogEntry {
                file: name,
                classification: DayNight::Day,
                placement: None,
            }))
        }
        DayNight::Night => {
            let image_seed = seed::derive(cfg.rng_seed, seed::name_hash(&name));
            match augment_flare_seeded(&frame, cfg, image_seed) {
                Ok((augmented, placement)) => {
                    ppm::save(&augmented, &target)?;
                    Ok(Outcome::Done(LogEntry {
                        file: name,
                        classification: DayNight::Night,
                        placement: Some(placement),
                    }))
                }
                Err(AugmentError::DegenerateInput(msg)) => {
                    log::warn!("skipping {}: {msg}", path.display());
                    Ok(Outcome::Skipped)
                }
                Err(e) => Err(e),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn no_streak() -> AugmentationConfig {
        AugmentationConfig {
            streak_enabled: false,
            ..Default::default()
        }
    }

    #[test]
    fn classification_threshold_is_strict() {
        let cfg = AugmentationConfig::default();
        assert_eq!(
            classify_day_night(&Frame::filled(4, 4, [0; 3]).unwrap(), &cfg),
            DayNight::Night
        );
        assert_eq!(
            classify_day_night(&Frame::filled(4, 4, [200; 3]).unwrap(), &cfg),
            DayNight::Day
        );
        assert_eq!(
            classify_day_night(&Frame::filled(4, 4, [60; 3]).unwrap(), &cfg),
            DayNight::Night
        );
        assert_eq!(
            classify_day_night(&Frame::filled(4, 4, [61, 60, 60]).unwrap(), &cfg),
            DayNight::Day
        );
    }

    #[test]
    fn same_seed_same_output() {
        let f = Frame::filled(96, 80, [10, 12, 9]).unwrap().with_position(3, 0);
        let cfg = AugmentationConfig::default();
        let a = augment_flare(&f, &cfg).unwrap();
        let b = augment_flare(&f, &cfg).unwrap();
        assert_eq!(a, b);
        let other = augment_flare(&f.clone().with_position(4, 0), &cfg).unwrap();
        assert_ne!(a.1.seed, other.1.seed);
    }

    #[test]
    fn blue_glow_on_black_follows_gaussian() {
        let black = Frame::filled(101, 101, [0; 3]).unwrap();
        let r = 10.0;
        let p = FlarePlacement {
            cx: 50,
            cy: 50,
            radius: r,
            color: BLUE,
            seed: 0,
            streak_half_extent: None,
        };
        let peak = 0.8;
        let mut out = black.clone();
        draw_flare(&mut out, &p, peak);
        // Screen over black reduces to the light itself.
        assert_eq!(out.pixel(50, 50), [48, 48, 204]);
        // d = 5 = sigma: exp(-1/2)
        let expected_b = (255.0 * peak * (-0.5f64).exp()).round() as u8;
        assert_eq!(out.pixel(55, 50)[2], expected_b);
        for (x, y) in [(50, 50 + 31), (50 + 31, 50), (50 + 22, 50 + 22), (0, 0), (100, 100)] {
            assert_eq!(out.pixel(x, y), [0, 0, 0], "({x},{y})");
        }
    }

    #[test]
    fn too_small_frame_is_degenerate() {
        let f = Frame::filled(40, 200, [0; 3]).unwrap();
        assert!(matches!(
            augment_flare(&f, &AugmentationConfig::default()),
            Err(AugmentError::DegenerateInput(_))
        ));
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let f = Frame::filled(100, 100, [0; 3]).unwrap();
        for cfg in [
            AugmentationConfig {
                night_brightness_threshold: 0.0,
                ..Default::default()
            },
            AugmentationConfig {
                flare_radius_range: (10.0, 5.0),
                ..Default::default()
            },
            AugmentationConfig {
                flare_peak_intensity: 1.5,
                ..Default::default()
            },
            AugmentationConfig {
                flare_colors: vec![],
                ..Default::default()
            },
        ] {
            assert!(matches!(augment_flare(&f, &cfg), Err(AugmentError::InvalidConfig(_))));
        }
    }

    #[test]
    fn color_choice_is_balanced() {
        let f = Frame::filled(64, 64, [0; 3]).unwrap();
        let cfg = no_streak();
        let n = 10_000;
        let red = (0..n)
            .filter(|&i| sample_placement(&f, &cfg, seed::derive(99, i)).unwrap().color == RED)
            .count();
        let freq = red as f64 / n as f64;
        assert!((freq - 0.5).abs() <= 0.02, "red frequency {freq}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn flare_only_adds_light_inside_footprint(
            seed in any::<u64>(),
            base in any::<[u8; 3]>(),
            streak in any::<bool>(),
        ) {
            let mut f = Frame::filled(80, 72, base).unwrap();
            // some texture
            for x in 0..80 {
                f.set_pixel(x, (x * 7) % 72, [(x * 3) as u8, 0, 255 - x as u8]);
            }
            let cfg = AugmentationConfig { streak_enabled: streak, ..Default::default() };
            let (out, p) = augment_flare_seeded(&f, &cfg, seed).unwrap();
            for y in 0..72 {
                for x in 0..80 {
                    let (a, b) = (f.pixel(x, y), out.pixel(x, y));
                    if !p.in_footprint(x, y) {
                        prop_assert_eq!(a, b);
                    }
                    for c in 0..3 {
                        prop_assert!(b[c] >= a[c]);
                    }
                }
            }
        }
    }
}
