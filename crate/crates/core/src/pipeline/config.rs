//! `pipeline.json` and detector backend configuration.
//!
//! ```json
//! {
//!   "denoiser": {"kind": "chroma_clamp", "excess_threshold": 80, "luma_floor": 180},
//!   "raw_detector": {"kind": "reference", "car_box": [32, 40, 96, 80]},
//!   "tuned_detector": {"kind": "external", "cmd": ["python3", "worker.py"]},
//!   "combiner": {"iou_threshold": 0.5, "class_match": true}
//! }
//! ```

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::detector::{
    BackendError, DetectorBackend, ExternalDetector, ReferenceDetector, ReferenceDetectorConfig, WorkerClient,
};
use crate::model::BoundingBox;
use crate::pipeline::combine::CombinerConfig;
use crate::pipeline::denoise::{ChromaClampConfig, ChromaClampDenoiser, Denoiser, ExternalDenoiser, IdentityDenoiser};
use crate::pipeline::run::{Pipeline, PipelineError};

/// A worker command, either as an argv array or a whitespace-separated line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WorkerCommand {
    Argv(Vec<String>),
    Line(String),
}

impl WorkerCommand {
    pub fn argv(&self) -> Vec<String> {
        match self {
            WorkerCommand::Argv(v) => v.clone(),
            WorkerCommand::Line(s) => s.split_whitespace().map(str::to_owned).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DetectorSpec {
    /// `car_box` may be omitted when the caller can supply a target, e.g.
    /// from a simulated sequence's scene.
    Reference {
        #[serde(default)]
        car_box: Option<[f64; 4]>,
        #[serde(default)]
        params: ReferenceDetectorConfig,
    },
    External {
        cmd: WorkerCommand,
    },
}

impl DetectorSpec {
    pub fn build(
        &self,
        fallback_target: Option<BoundingBox<f64>>,
        timeout: Duration,
    ) -> Result<Box<dyn DetectorBackend>, BackendError> {
        match self {
            DetectorSpec::Reference { car_box, params } => {
                let target = match car_box {
                    Some([x0, y0, x1, y1]) => BoundingBox::new(*x0, *y0, *x1, *y1)
                        .map_err(|e| BackendError::Config(format!("car_box: {e}")))?,
                    None => fallback_target
                        .ok_or_else(|| BackendError::Config("reference detector needs car_box".into()))?,
                };
                Ok(Box::new(ReferenceDetector::new(target, params.clone())?))
            }
            DetectorSpec::External { cmd } => Ok(Box::new(ExternalDetector::spawn(&cmd.argv(), timeout)?)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DenoiserSpec {
    Identity,
    ChromaClamp {
        #[serde(flatten)]
        config: ChromaClampConfig,
    },
    External {
        cmd: WorkerCommand,
    },
}

impl DenoiserSpec {
    pub fn build(&self, timeout: Duration) -> Result<Box<dyn Denoiser>, BackendError> {
        Ok(match self {
            DenoiserSpec::Identity => Box::new(IdentityDenoiser),
            DenoiserSpec::ChromaClamp { config } => Box::new(ChromaClampDenoiser { config: *config }),
            DenoiserSpec::External { cmd } => {
                Box::new(ExternalDenoiser::new(WorkerClient::spawn(&cmd.argv(), timeout)?))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub denoiser: DenoiserSpec,
    pub raw_detector: DetectorSpec,
    pub tuned_detector: DetectorSpec,
    #[serde(default)]
    pub combiner: CombinerConfig,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        self.combiner.validate().map_err(PipelineError::InvalidConfig)?;
        for spec in [&self.raw_detector, &self.tuned_detector] {
            if let DetectorSpec::Reference { params, .. } = spec {
                params
                    .validate()
                    .map_err(|e| PipelineError::InvalidConfig(e.to_string()))?;
            }
            if let DetectorSpec::External { cmd } = spec {
                if cmd.argv().is_empty() {
                    return Err(PipelineError::InvalidConfig("detector cmd is empty".into()));
                }
            }
        }
        Ok(())
    }

    /// Starts the backends. Workers are spawned here, so failures carry the
    /// stage they belong to.
    pub fn build(
        &self,
        fallback_target: Option<BoundingBox<f64>>,
        timeout: Duration,
    ) -> Result<Pipeline, PipelineError> {
        use crate::pipeline::run::Stage;
        self.validate()?;
        let at = |stage| move |source| PipelineError::Stage { stage, source };
        let denoiser = self.denoiser.build(timeout).map_err(at(Stage::Denoise))?;
        let raw = self
            .raw_detector
            .build(fallback_target, timeout)
            .map_err(at(Stage::RawDetect))?;
        let tuned = self
            .tuned_detector
            .build(fallback_target, timeout)
            .map_err(at(Stage::TunedDetect))?;
        let name = self.name.clone().unwrap_or_else(|| self.default_name());
        Pipeline::new(name, denoiser, raw, tuned, self.combiner)
    }

    fn default_name(&self) -> String {
        let d = match &self.denoiser {
            DenoiserSpec::Identity => "identity",
            DenoiserSpec::ChromaClamp { .. } => "chroma_clamp",
            DenoiserSpec::External { .. } => "external",
        };
        format!("{d}+dual")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_example() {
        let cfg: PipelineConfig = serde_json::from_str(
            r#"{
              "denoiser": {"kind": "chroma_clamp", "excess_threshold": 70},
              "raw_detector": {"kind": "reference", "car_box": [32, 40, 96, 80]},
              "tuned_detector": {"kind": "external", "cmd": "worker --flag"},
              "combiner": {"iou_threshold": 0.4}
            }"#,
        )
        .unwrap();
        assert_eq!(
            cfg.denoiser,
            DenoiserSpec::ChromaClamp {
                config: ChromaClampConfig {
                    excess_threshold: 70,
                    luma_floor: 180
                }
            }
        );
        let DetectorSpec::External { cmd } = &cfg.tuned_detector else {
            panic!()
        };
        assert_eq!(cmd.argv(), vec!["worker", "--flag"]);
        assert!(cfg.combiner.class_match);
        assert_eq!(cfg.combiner.iou_threshold, 0.4);
    }

    #[test]
    fn reference_without_box_needs_fallback() {
        let spec = DetectorSpec::Reference {
            car_box: None,
            params: Default::default(),
        };
        let t = Duration::from_millis(100);
        assert!(matches!(spec.build(None, t), Err(BackendError::Config(_))));
        let target = BoundingBox::new(0.0, 0.0, 4.0, 4.0).unwrap();
        assert!(spec.build(Some(target), t).is_ok());
    }

    #[test]
    fn builds_reference_pipeline() {
        let cfg: PipelineConfig = serde_json::from_str(
            r#"{"denoiser": {"kind": "identity"},
                "raw_detector": {"kind": "reference", "car_box": [0, 0, 4, 4]},
                "tuned_detector": {"kind": "reference", "car_box": [0, 0, 4, 4]}}"#,
        )
        .unwrap();
        let p = cfg.build(None, Duration::from_millis(100)).unwrap();
        assert_eq!(p.name(), "identity+dual");
    }

    #[test]
    fn invalid_threshold_is_a_config_error() {
        let mut cfg: PipelineConfig = serde_json::from_str(
            r#"{"denoiser": {"kind": "identity"},
                "raw_detector": {"kind": "reference"},
                "tuned_detector": {"kind": "reference"}}"#,
        )
        .unwrap();
        cfg.combiner.iou_threshold = 0.0;
        assert!(matches!(cfg.validate(), Err(PipelineError::InvalidConfig(_))));
    }
}
