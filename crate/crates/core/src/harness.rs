//! Evaluation harness: beam construction per strategy, trajectory sweeps,
//! hemisphere gain maps, strategy comparison and synthetic head motion.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::array::{beamwidth_uv, coefficient_grid, gain_dbi, gain_uv, steering_weights, Awv, SteeringDirection};
use crate::error::{Error, Result};
use crate::geometry::{sample_trajectory, Quaternion, Trajectory, UvPoint, Vec3};
use crate::link::{global_max_gain, mcs_level, penalty_from_max, received_power, select_mcs, uv_axis, LinkParams, McsTable};
use crate::planner::{plan_trajectory, BeamPlan};
use crate::scenario::{Ablation, Scenario, Strategy};

/// Gain below which the reference plots are clamped; carried in output
/// metadata only.
pub const DISPLAY_CLAMP_DBI: f64 = 30.0;

/// Largest `|uv|` a synthesized trajectory may reach.
const RANDOM_RADIUS_LIMIT: f64 = 0.85;

/// Receive beam for one strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct Beam {
    pub awv: Awv,
    /// Planner output for [`Strategy::Covrage`].
    pub plan: Option<BeamPlan>,
    /// Steering direction of a single-beam baseline.
    pub steer: Option<UvPoint>,
}

/// Sample a single full-array beam is steered at under `strategy`.
///
/// The edge baseline takes the sample farthest from the first one that is
/// still within half a full-array beamwidth of it.
pub fn baseline_target(strategy: Strategy, trajectory: &Trajectory, full_width: f64) -> Result<UvPoint> {
    let pts = trajectory.points();
    let first = trajectory.first();
    match strategy {
        Strategy::BaselineStart => Ok(first),
        Strategy::BaselineEdge => Ok(pts
            .iter()
            .copied()
            .filter(|p| p.distance(&first) <= full_width / 2.0)
            .fold(first, |best, p| {
                if p.distance(&first) > best.distance(&first) {
                    p
                } else {
                    best
                }
            })),
        Strategy::BaselineMid => {
            let arcs = trajectory.arc_lengths();
            let half = arcs.last().copied().unwrap_or(0.0) / 2.0;
            let idx = arcs
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1 - half).abs().total_cmp(&(b.1 - half).abs()))
                .map_or(0, |(i, _)| i);
            Ok(pts[idx])
        }
        Strategy::Covrage => Err(Error::Config("covrage is not a single-beam baseline".into())),
    }
}

/// Forms the receive beam for the scenario's strategy over `trajectory`.
pub fn build_beam(scenario: &Scenario, trajectory: &Trajectory) -> Result<Beam> {
    scenario.validate()?;
    let cfg = &scenario.array;
    match scenario.strategy {
        Strategy::Covrage => {
            let (awv, plan) = plan_trajectory(trajectory, cfg, &scenario.plan_options())?;
            Ok(Beam {
                awv,
                plan: Some(plan),
                steer: None,
            })
        }
        strategy => {
            let width = beamwidth_uv(cfg.nx.min(cfg.ny), cfg.spacing_wavelengths);
            let target = baseline_target(strategy, trajectory, width)?;
            let mut awv = steering_weights(
                cfg.nx,
                cfg.ny,
                cfg.spacing_wavelengths,
                SteeringDirection::from_uv(target)?,
            );
            if let Some(bits) = cfg.phase_bits {
                awv = awv.quantized(bits);
            }
            Ok(Beam {
                awv,
                plan: None,
                steer: Some(target),
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepSample {
    pub index: usize,
    pub uv: UvPoint,
    pub gain_dbi: f64,
    pub penalty_db: f64,
    /// Level compared against the MCS thresholds.
    pub level_dbm: f64,
    /// SNR against the configured noise floor, if any.
    pub snr_db: Option<f64>,
    pub mcs: i32,
    pub rate_mbps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepSummary {
    pub min_gain_dbi: f64,
    pub max_gain_dbi: f64,
    /// `max_gain_dbi - min_gain_dbi`.
    pub range_db: f64,
    pub max_penalty_db: f64,
    pub min_mcs: i32,
    pub min_rate_mbps: f64,
    pub peak_uv: UvPoint,
    pub peak_gain_dbi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub samples: Vec<SweepSample>,
    pub summary: SweepSummary,
}

impl SweepResult {
    pub fn gains(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.gain_dbi).collect()
    }
}

/// Gain, noise penalty and MCS at every trajectory sample.
pub fn sweep_trajectory(
    awv: &Awv,
    trajectory: &Trajectory,
    spacing: f64,
    link: &LinkParams,
    table: &McsTable,
    search_resolution: usize,
) -> Result<SweepResult> {
    link.validate()?;
    let (peak_uv, grid_max) = global_max_gain(awv, spacing, search_resolution);
    let gains: Vec<f64> = trajectory
        .points()
        .par_iter()
        .map(|p| Ok(gain_uv(awv, SteeringDirection::from_uv(*p)?.uv(), spacing)))
        .collect::<Result<_>>()?;
    let peak = gains.iter().copied().fold(grid_max, f64::max);
    let samples = trajectory
        .points()
        .iter()
        .zip(&gains)
        .enumerate()
        .map(|(index, (p, &g))| {
            let penalty = penalty_from_max(peak, g);
            let level = mcs_level(link, table, g, penalty)?;
            let snr = match link.noise_floor_dbm {
                Some(n) => Some(received_power(link, g)? - n - penalty),
                None => None,
            };
            let mcs = select_mcs(level, table);
            Ok(SweepSample {
                index,
                uv: *p,
                gain_dbi: g,
                penalty_db: penalty,
                level_dbm: level,
                snr_db: snr,
                mcs: mcs.index,
                rate_mbps: mcs.rate_mbps,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let min = gains.iter().copied().fold(f64::INFINITY, f64::min);
    let max = gains.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let worst = samples
        .iter()
        .min_by(|a, b| a.rate_mbps.total_cmp(&b.rate_mbps).then(a.mcs.cmp(&b.mcs)))
        .expect("trajectories are never empty");
    let summary = SweepSummary {
        min_gain_dbi: min,
        max_gain_dbi: max,
        range_db: max - min,
        max_penalty_db: samples.iter().map(|s| s.penalty_db).fold(0.0, f64::max),
        min_mcs: worst.mcs,
        min_rate_mbps: worst.rate_mbps,
        peak_uv: if grid_max >= max { peak_uv } else { trajectory.points()[gains.iter().position(|&g| g == max).unwrap()] },
        peak_gain_dbi: peak,
    };
    Ok(SweepResult { samples, summary })
}

/// Everything produced by one scenario run.
#[derive(Debug, Clone, PartialEq)]
pub struct Run {
    pub trajectory: Trajectory,
    pub beam: Beam,
    pub sweep: SweepResult,
}

pub fn run_scenario(scenario: &Scenario) -> Result<Run> {
    let trajectory = scenario.trajectory()?;
    let beam = build_beam(scenario, &trajectory)?;
    let sweep = sweep_trajectory(
        &beam.awv,
        &trajectory,
        scenario.array.spacing_wavelengths,
        &scenario.link,
        &scenario.mcs,
        scenario.search_resolution,
    )?;
    Ok(Run {
        trajectory,
        beam,
        sweep,
    })
}

/// Directional gain over a square sine-space grid. Cells outside the unit
/// disc are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct GainMap {
    pub resolution: usize,
    pub axis: Vec<f64>,
    /// Row-major: `values[j * resolution + i]` is at `(axis[i], axis[j])`.
    pub values: Vec<Option<f64>>,
}

impl GainMap {
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.values[j * self.resolution + i]
    }

    pub fn point(&self, i: usize, j: usize) -> UvPoint {
        UvPoint::raw(self.axis[i], self.axis[j])
    }

    /// Cell with the highest gain.
    pub fn peak(&self) -> (usize, usize, f64) {
        let (idx, g) = self
            .values
            .iter()
            .enumerate()
            .filter_map(|(k, v)| v.map(|g| (k, g)))
            .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
        (idx % self.resolution, idx / self.resolution, g)
    }

    /// Cells strictly above `threshold` that are not below any of their
    /// eight neighbours.
    pub fn local_maxima(&self, threshold: f64) -> Vec<(usize, usize, f64)> {
        let n = self.resolution;
        let mut out = Vec::new();
        for j in 0..n {
            for i in 0..n {
                let Some(g) = self.get(i, j) else { continue };
                if g <= threshold {
                    continue;
                }
                let is_max = (j.saturating_sub(1)..=(j + 1).min(n - 1))
                    .flat_map(|jj| (i.saturating_sub(1)..=(i + 1).min(n - 1)).map(move |ii| (ii, jj)))
                    .filter(|&c| c != (i, j))
                    .all(|(ii, jj)| self.get(ii, jj).is_none_or(|h| h <= g));
                if is_max {
                    out.push((i, j, g));
                }
            }
        }
        out
    }
}

/// Gain map of `awv` at `resolution x resolution` cells.
pub fn gain_map(awv: &Awv, spacing: f64, resolution: usize) -> Result<GainMap> {
    if resolution < 16 {
        return Err(Error::Config(format!(
            "gain map resolution must be at least 16, got {resolution}"
        )));
    }
    let axis = uv_axis(resolution);
    let grid = coefficient_grid(awv, spacing, &axis, &axis);
    let values = grid
        .iter()
        .enumerate()
        .map(|(k, c)| {
            UvPoint::raw(axis[k % resolution], axis[k / resolution])
                .is_valid()
                .then(|| gain_dbi(*c))
        })
        .collect();
    Ok(GainMap {
        resolution,
        axis,
        values,
    })
}

/// One row of [`compare`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub label: String,
    pub strategy: Strategy,
    pub no_sync: bool,
    pub delayed_first: bool,
    pub min_gain_dbi: f64,
    pub max_gain_dbi: f64,
    pub range_db: f64,
    pub min_mcs: i32,
    pub min_rate_mbps: f64,
}

/// The four strategies and both planner ablations on one scenario, all on
/// the same trajectory samples.
pub fn compare(scenario: &Scenario) -> Result<Vec<CompareRow>> {
    let trajectory = scenario.trajectory()?;
    let mut variants: Vec<(String, Strategy, Ablation)> = Strategy::ALL
        .iter()
        .map(|&s| (s.name().to_string(), s, Ablation::default()))
        .collect();
    variants.push((
        "covrage-no-sync".into(),
        Strategy::Covrage,
        Ablation {
            no_sync: true,
            delayed_first: false,
        },
    ));
    variants.push((
        "covrage-delayed-first".into(),
        Strategy::Covrage,
        Ablation {
            no_sync: false,
            delayed_first: true,
        },
    ));
    variants
        .into_iter()
        .map(|(label, strategy, ablation)| {
            let s = scenario.clone().with_strategy(strategy).with_ablation(ablation);
            let beam = build_beam(&s, &trajectory)?;
            let sweep = sweep_trajectory(
                &beam.awv,
                &trajectory,
                s.array.spacing_wavelengths,
                &s.link,
                &s.mcs,
                s.search_resolution,
            )?;
            let m = sweep.summary;
            Ok(CompareRow {
                label,
                strategy,
                no_sync: ablation.no_sync,
                delayed_first: ablation.delayed_first,
                min_gain_dbi: m.min_gain_dbi,
                max_gain_dbi: m.max_gain_dbi,
                range_db: m.range_db,
                min_mcs: m.min_mcs,
                min_rate_mbps: m.min_rate_mbps,
            })
        })
        .collect()
}

/// Seeded AP direction within `|uv| <= 0.4`.
pub fn random_ap_direction(seed: u64) -> UvPoint {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_a9d1);
    let r = 0.4 * rng.gen::<f64>().sqrt();
    let a = rng.gen_range(0.0..std::f64::consts::TAU);
    UvPoint::raw(r * a.cos(), r * a.sin())
}

fn random_axis(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v.normalized();
        }
    }
}

const LENGTH_SAMPLES: usize = 256;

/// Path length and whether the whole path stays inside the allowed radius.
fn probe(q1: &Quaternion, rotation: &Quaternion, ap_dir: UvPoint) -> Option<f64> {
    let q2 = rotation.conjugate().hamilton(q1);
    let t = sample_trajectory(q1, &q2, ap_dir, LENGTH_SAMPLES).ok()?;
    t.points()
        .iter()
        .all(|p| p.radius_sq() <= RANDOM_RADIUS_LIMIT * RANDOM_RADIUS_LIMIT)
        .then(|| t.length())
}

/// Seeded head rotation `(q1, q2)` whose AP path, seen from `ap_dir`, has a
/// sine-space length within 5% of `target`.
///
/// A random axis is drawn and the rotation angle bisected; axes that cannot
/// reach the target without leaving `|uv| <= 0.85` are redrawn.
pub fn random_head_rotation(seed: u64, target: f64, ap_dir: UvPoint) -> Result<(Quaternion, Quaternion)> {
    const ATTEMPTS: usize = 64;
    if !(target >= 0.0) || !ap_dir.is_valid() {
        return Err(Error::UnreachableLength {
            target,
            attempts: 0,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q1 = Quaternion::from_axis_angle(random_axis(&mut rng), rng.gen_range(0.0..0.5));
    if target == 0.0 {
        return Ok((q1, q1));
    }
    for _ in 0..ATTEMPTS {
        let axis = random_axis(&mut rng);
        let rot = |a: f64| Quaternion::from_axis_angle(axis, a);
        // grow the angle until the path is long enough
        let mut hi = 0.05;
        let mut reached = false;
        while hi < std::f64::consts::PI {
            match probe(&q1, &rot(hi), ap_dir) {
                Some(l) if l >= target => {
                    reached = true;
                    break;
                }
                Some(_) => hi *= 1.5,
                None => break,
            }
        }
        if !reached {
            continue;
        }
        let mut lo = 0.0;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let l = probe(&q1, &rot(mid), ap_dir).unwrap_or(f64::INFINITY);
            if (l - target).abs() <= 0.01 * target {
                return Ok((q1, rot(mid).conjugate().hamilton(&q1)));
            }
            if l < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    Err(Error::UnreachableLength {
        target,
        attempts: ATTEMPTS,
    })
}

/// A built-in head motion used by the acceptance suite and benchmarks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceScenario {
    pub name: &'static str,
    pub q1: Quaternion,
    pub q2: Quaternion,
    pub ap_dir: UvPoint,
}

impl ReferenceScenario {
    pub fn head_rotation(&self) -> (Quaternion, Quaternion, UvPoint) {
        (self.q1, self.q2, self.ap_dir)
    }

    pub fn scenario(&self) -> Scenario {
        Scenario::new(self.q1, self.q2, self.ap_dir)
    }
}

/// Gently curved geodesic of sine-space length about 0.3.
pub fn reference_scenario_a() -> ReferenceScenario {
    let ap = UvPoint::raw(-0.15, 0.05);
    let to = UvPoint::raw(0.15, 0.12);
    let r = Quaternion::rotation_between(
        ap.to_vector().expect("inside the disc"),
        to.to_vector().expect("inside the disc"),
    );
    ReferenceScenario {
        name: "a",
        q1: Quaternion::IDENTITY,
        q2: r.conjugate(),
        ap_dir: ap,
    }
}

/// Curved path of sine-space length about 0.33: the head rolls while
/// pitching, so the off-centre AP sweeps an arc. The last sub-beam lands on
/// extrapolated samples beyond the end of the path.
pub fn reference_scenario_b() -> ReferenceScenario {
    let ap = UvPoint::raw(0.25, -0.1);
    let r = Quaternion::from_axis_angle(Vec3::new(0.3, 0.2, 1.0), 0.595);
    ReferenceScenario {
        name: "b",
        q1: Quaternion::IDENTITY,
        q2: r.conjugate(),
        ap_dir: ap,
    }
}

pub fn reference_scenario(name: &str) -> Result<ReferenceScenario> {
    match name {
        "a" | "A" => Ok(reference_scenario_a()),
        "b" | "B" => Ok(reference_scenario_b()),
        other => Err(Error::Config(format!(
            "unknown reference trajectory `{other}`, expected \"a\" or \"b\""
        ))),
    }
}
