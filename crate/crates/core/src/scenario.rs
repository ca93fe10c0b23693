//! Run configuration: what to plan, how to evaluate it and how the scenario
//! file on disk maps onto it.
//!
//! Scenario files are TOML with angles in degrees:
//!
//! ```toml
//! [array]
//! nx = 32
//! ny = 32
//!
//! [link]
//! distance_m = 2.0
//! headroom_db = 1.5
//!
//! [trajectory]
//! kind = "head"
//! ap_azimuth_deg = 10.0
//! ap_elevation_deg = 5.0
//! start_deg = [0.0, 0.0, 0.0]
//! end_deg = [0.0, 15.0, 0.0]
//!
//! [run]
//! strategy = "covrage"
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::array::ArrayConfig;
use crate::error::{Error, Result};
use crate::geometry::{EulerAngles, Quaternion, Trajectory, UvPoint};
use crate::harness::{random_ap_direction, random_head_rotation, reference_scenario};
use crate::link::{LinkParams, McsTable, DEFAULT_SEARCH_RESOLUTION};
use crate::planner::{sample_for_plan, PlanOptions, SyncMode, DEFAULT_INTERLEAVE};

/// How the receive beam is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Covrage,
    /// Full-array beam towards the current AP direction.
    BaselineStart,
    /// Full-array beam at the farthest sample still covering the current one.
    BaselineEdge,
    /// Full-array beam halfway along the trajectory.
    BaselineMid,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::Covrage,
        Strategy::BaselineStart,
        Strategy::BaselineEdge,
        Strategy::BaselineMid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Covrage => "covrage",
            Strategy::BaselineStart => "baseline-start",
            Strategy::BaselineEdge => "baseline-edge",
            Strategy::BaselineMid => "baseline-mid",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown strategy `{s}`")))
    }
}

/// Ablations of the planner; only meaningful with [`Strategy::Covrage`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ablation {
    pub no_sync: bool,
    pub delayed_first: bool,
}

impl Ablation {
    pub fn is_none(&self) -> bool {
        !self.no_sync && !self.delayed_first
    }
}

/// Everything needed for one run, resolved to radians and quaternions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub array: ArrayConfig,
    pub link: LinkParams,
    pub mcs: McsTable,
    pub q1: Quaternion,
    pub q2: Quaternion,
    pub ap_dir: UvPoint,
    /// `None` picks a density from the narrowest sub-beam.
    pub samples: Option<usize>,
    pub strategy: Strategy,
    pub ablation: Ablation,
    pub seed: u64,
    pub interleave: usize,
    /// Grid resolution of the noise-penalty maximum search.
    pub search_resolution: usize,
}

impl Scenario {
    /// Default array and link with the given head motion.
    pub fn new(q1: Quaternion, q2: Quaternion, ap_dir: UvPoint) -> Self {
        Self {
            array: ArrayConfig::default(),
            link: LinkParams::default(),
            mcs: McsTable::default(),
            q1,
            q2,
            ap_dir,
            samples: None,
            strategy: Strategy::Covrage,
            ablation: Ablation::default(),
            seed: 0,
            interleave: DEFAULT_INTERLEAVE,
            search_resolution: DEFAULT_SEARCH_RESOLUTION,
        }
    }

    pub fn with_strategy(mut self, strategy: Strategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn with_ablation(mut self, ablation: Ablation) -> Self {
        self.ablation = ablation;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.array.validate()?;
        self.link.validate()?;
        if !self.ap_dir.is_valid() {
            return Err(Error::InvalidUv {
                u: self.ap_dir.u,
                v: self.ap_dir.v,
            });
        }
        if self.strategy != Strategy::Covrage && !self.ablation.is_none() {
            return Err(Error::Config(format!(
                "ablations apply only to the covrage strategy, not {}",
                self.strategy
            )));
        }
        if matches!(self.samples, Some(n) if n < 2) {
            return Err(Error::Config("trajectory.samples must be at least 2".into()));
        }
        if self.search_resolution < 16 {
            return Err(Error::Config("run.search_resolution must be at least 16".into()));
        }
        Ok(())
    }

    pub fn plan_options(&self) -> PlanOptions {
        PlanOptions {
            interleave: self.interleave,
            sync: if self.ablation.no_sync {
                SyncMode::Random(self.seed)
            } else {
                SyncMode::Synced
            },
            delayed_first: self.ablation.delayed_first,
        }
    }

    /// The sampled AP trajectory. It does not depend on the strategy, so all
    /// strategies of one scenario are evaluated on the same samples.
    pub fn trajectory(&self) -> Result<Trajectory> {
        sample_for_plan(
            &self.q1,
            &self.q2,
            self.ap_dir,
            &self.array,
            &PlanOptions {
                interleave: self.interleave,
                ..PlanOptions::default()
            },
            self.samples,
        )
    }
}

/// On-disk layout of a scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub array: ArrayConfig,
    #[serde(default)]
    pub link: LinkParams,
    #[serde(default)]
    pub mcs: McsSection,
    pub trajectory: TrajectorySection,
    #[serde(default)]
    pub run: RunSection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McsSection {
    /// Alternative threshold table, relative to the scenario file.
    pub table: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TrajectorySection {
    /// Head turns from `start_deg` to `end_deg`, each `[roll, pitch, yaw]`
    /// as intrinsic x-y-z Euler angles; the AP is seen at the given
    /// azimuth and elevation at the start.
    Head {
        ap_azimuth_deg: f64,
        ap_elevation_deg: f64,
        start_deg: [f64; 3],
        end_deg: [f64; 3],
        samples: Option<usize>,
    },
    /// The AP appears to move along the great circle between two directions.
    Endpoints {
        start_azimuth_deg: f64,
        start_elevation_deg: f64,
        end_azimuth_deg: f64,
        end_elevation_deg: f64,
        samples: Option<usize>,
    },
    /// Seeded random head rotation with a target sine-space path length.
    Random {
        length: f64,
        seed: Option<u64>,
        samples: Option<usize>,
    },
    /// One of the built-in reference scenarios, `"a"` or `"b"`.
    Reference {
        name: String,
        samples: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub strategy: Strategy,
    pub no_sync: bool,
    pub delayed_first: bool,
    pub seed: u64,
    pub interleave: usize,
    pub search_resolution: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            strategy: Strategy::Covrage,
            no_sync: false,
            delayed_first: false,
            seed: 0,
            interleave: DEFAULT_INTERLEAVE,
            search_resolution: DEFAULT_SEARCH_RESOLUTION,
        }
    }
}

fn ap_from_degrees(azimuth: f64, elevation: f64) -> Result<UvPoint> {
    EulerAngles::direction(azimuth.to_radians(), elevation.to_radians()).to_uv()
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Resolves to a [`Scenario`]; relative paths are taken from `base_dir`.
    pub fn resolve(&self, base_dir: &Path) -> Result<Scenario> {
        let run = &self.run;
        let (q1, q2, ap_dir, samples) = match &self.trajectory {
            TrajectorySection::Head {
                ap_azimuth_deg,
                ap_elevation_deg,
                start_deg,
                end_deg,
                samples,
            } => {
                let [r1, p1, y1] = *start_deg;
                let [r2, p2, y2] = *end_deg;
                (
                    Quaternion::from_euler(EulerAngles::from_degrees(r1, p1, y1)),
                    Quaternion::from_euler(EulerAngles::from_degrees(r2, p2, y2)),
                    ap_from_degrees(*ap_azimuth_deg, *ap_elevation_deg)?,
                    *samples,
                )
            }
            TrajectorySection::Endpoints {
                start_azimuth_deg,
                start_elevation_deg,
                end_azimuth_deg,
                end_elevation_deg,
                samples,
            } => {
                let from = ap_from_degrees(*start_azimuth_deg, *start_elevation_deg)?;
                let to = ap_from_degrees(*end_azimuth_deg, *end_elevation_deg)?;
                let r = Quaternion::rotation_between(from.to_vector()?, to.to_vector()?);
                (Quaternion::IDENTITY, r.conjugate(), from, *samples)
            }
            TrajectorySection::Random {
                length,
                seed,
                samples,
            } => {
                let seed = seed.unwrap_or(run.seed);
                let ap = random_ap_direction(seed);
                let (q1, q2) = random_head_rotation(seed, *length, ap)?;
                (q1, q2, ap, *samples)
            }
            TrajectorySection::Reference { name, samples } => {
                let r = reference_scenario(name)?;
                (r.q1, r.q2, r.ap_dir, *samples)
            }
        };
        let mcs = match &self.mcs.table {
            Some(p) => McsTable::from_path(&base_dir.join(p))?,
            None => McsTable::default(),
        };
        let scenario = Scenario {
            array: self.array.clone(),
            link: self.link.clone(),
            mcs,
            q1,
            q2,
            ap_dir,
            samples,
            strategy: run.strategy,
            ablation: Ablation {
                no_sync: run.no_sync,
                delayed_first: run.delayed_first,
            },
            seed: run.seed,
            interleave: run.interleave,
            search_resolution: run.search_resolution,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

/// Reads and resolves a scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let file = ScenarioFile::load(path)?;
    file.resolve(path.parent().unwrap_or_else(|| Path::new(".")))
}
