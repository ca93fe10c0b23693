//! Trajectory-covering beam synthesis.
//!
//! Given a sampled access-point path, the planner picks how finely to split
//! the array, places one sub-beam per locked sample so every sample falls
//! inside some sub-beam, maps sub-beams onto physical sub-arrays (reinforcing
//! when there are more sub-arrays than sub-beams) and finally phase-aligns
//! adjacent sub-beams at the samples they share.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::array::{ArrayConfig, Awv, SteeringDirection, SubArrayLayout};
use crate::error::{Error, Result};
use crate::geometry::{sample_trajectory, Quaternion, Trajectory, UvPoint};

/// Interleaved sub-arrays in the reference design.
pub const DEFAULT_INTERLEAVE: usize = 4;

/// Coefficient magnitude below which a phase is treated as undefined.
const PHASE_MAGNITUDE_FLOOR: f64 = 1e-12;

const MIN_SAMPLES: usize = 64;

/// Number of sub-beams of width `w_i` needed for a trajectory of length
/// `l_t`: only half of the first beam, centred on the first sample, lies on
/// the trajectory.
pub fn required_subbeams(l_t: f64, w_i: f64) -> usize {
    ((l_t + 0.5 * w_i) / w_i).ceil().max(1.0) as usize
}

/// Smallest number of localized splits `s` such that the
/// `4^s * m_i` sub-beams of width `2^s * w_i` reach `l_t`:
/// `l_t + 2^(s-1) w_i <= 4^s m_i 2^s w_i`.
pub fn subdivision_level(l_t: f64, w_i: f64, m_i: usize) -> u32 {
    let mut s = 0u32;
    loop {
        let width = w_i * 2f64.powi(s as i32);
        let capacity = 4f64.powi(s as i32) * m_i as f64 * width;
        if l_t + 0.5 * width <= capacity || s >= 16 {
            return s;
        }
        s += 1;
    }
}

/// Order in which sub-arrays are handed out: diagonal partners of each 2x2
/// group come first so that pairs of reinforcing sub-arrays are diagonal.
fn handout_order(layout: &SubArrayLayout) -> Vec<usize> {
    const DIAGONAL_FIRST: [usize; 4] = [0, 3, 1, 2];
    let base = layout.interleave_stride().pow(2);
    let mut order: Vec<usize> = if base == 4 {
        DIAGONAL_FIRST.to_vec()
    } else {
        (0..base).collect()
    };
    for _ in 0..layout.subdivision() {
        order = order
            .iter()
            .flat_map(|&p| DIAGONAL_FIRST.iter().map(move |&c| 4 * p + c))
            .collect();
    }
    order
}

/// Maps `m_s` sub-beams onto the layout's sub-arrays.
///
/// With one sub-array per sub-beam, sub-beam `b` gets sub-array `b`.
/// Otherwise sub-arrays are shared out as evenly as possible, the earliest
/// sub-beams taking the extra ones, in diagonal-pair order: with four
/// interleaved sub-arrays two sub-beams get `{0, 3}` and `{1, 2}` and three
/// sub-beams get `{0, 3}`, `{1}`, `{2}`.
pub fn allocate_sub_arrays(m_s: usize, layout: &SubArrayLayout) -> Result<Vec<Vec<usize>>> {
    let n = layout.len();
    if m_s == 0 || m_s > n {
        return Err(Error::TooManyBeams {
            beams: m_s,
            sub_arrays: n,
        });
    }
    if m_s == n {
        return Ok((0..n).map(|k| vec![k]).collect());
    }
    let order = handout_order(layout);
    let (each, extra) = (n / m_s, n % m_s);
    let mut next = order.into_iter();
    Ok((0..m_s)
        .map(|b| next.by_ref().take(each + usize::from(b < extra)).collect())
        .collect())
}

/// Output of [`cover_points`].
#[derive(Debug, Clone, PartialEq)]
pub struct Coverage {
    pub beam_centers: Vec<UvPoint>,
    /// Index of each beam centre in `points`.
    pub beam_samples: Vec<usize>,
    /// Samples shared by adjacent beams; `overlap_points[k]` lies in beams
    /// `k` and `k + 1`.
    pub overlap_points: Vec<UvPoint>,
    /// Original samples followed by any extrapolated ones.
    pub points: Vec<UvPoint>,
    pub extrapolated: usize,
}

/// Places sub-beams of radius `half_width` along the trajectory.
///
/// The first beam sits on the first sample. Walking forward, a candidate
/// beam on the current sample must cover every sample from the last one the
/// previous beam covered up to itself; as soon as it cannot, the candidate on
/// the previous sample is locked in. Adjacent beams therefore share at least
/// one sample. If the tail is still uncovered at the last sample the path is
/// extended linearly with the spacing of the final two samples, at most four
/// times the original sample count.
pub fn cover_points(trajectory: &Trajectory, half_width: f64) -> Result<Coverage> {
    if !(half_width > 0.0) {
        return Err(Error::Config("sub-beam half width must be positive".into()));
    }
    let mut pts = trajectory.points().to_vec();
    let original = pts.len();
    for (i, w) in pts.windows(2).enumerate() {
        let spacing = w[0].distance(&w[1]);
        if spacing >= half_width {
            return Err(Error::SamplingTooCoarse {
                index: i + 1,
                spacing,
                half_width,
            });
        }
    }
    let covers = |a: &UvPoint, b: &UvPoint| a.distance(b) <= half_width;

    let mut beam_samples = vec![0usize];
    let mut overlaps = Vec::new();
    let mut anchor: Option<usize> = None;
    let limit = 4 * original;
    let mut i = 1;
    while i < pts.len() {
        let p = pts[i];
        if let Some(a) = anchor {
            if !pts[a..=i].iter().all(|q| covers(q, &p)) {
                beam_samples.push(i - 1);
                overlaps.push(pts[a]);
                anchor = None;
            }
        }
        let current = pts[*beam_samples.last().unwrap()];
        if anchor.is_none() && !covers(&p, &current) {
            anchor = Some(i - 1);
        }
        if i == pts.len() - 1 && anchor.is_some() {
            if pts.len() - original >= limit {
                return Err(Error::ExtrapolationLimit { limit });
            }
            let prev = pts[i - 1];
            let next = UvPoint::raw(2.0 * p.u - prev.u, 2.0 * p.v - prev.v);
            if !next.is_valid() {
                return Err(Error::TrajectoryOutsideHemisphere { index: pts.len() });
            }
            pts.push(next);
        }
        i += 1;
    }
    Ok(Coverage {
        beam_centers: beam_samples.iter().map(|&k| pts[k]).collect(),
        beam_samples,
        overlap_points: overlaps,
        extrapolated: pts.len() - original,
        points: pts,
    })
}

/// Per-sub-array phase factors that make the sub-arrays of each reinforced
/// sub-beam add coherently at the sub-beam centre. The first member of every
/// sub-beam keeps phase 0.
pub fn align_reinforcing(
    layout: &SubArrayLayout,
    assignment: &[Vec<usize>],
    centers: &[UvPoint],
    steered: &Awv,
) -> Vec<Complex64> {
    let mut shifts = vec![Complex64::new(1.0, 0.0); layout.len()];
    for (members, &c) in assignment.iter().zip(centers) {
        let reference = layout.subarray_coefficient(steered, members[0], c);
        for &k in &members[1..] {
            let ck = layout.subarray_coefficient(steered, k, c);
            if ck.norm() > PHASE_MAGNITUDE_FLOOR && reference.norm() > PHASE_MAGNITUDE_FLOOR {
                shifts[k] = Complex64::from_polar(1.0, reference.arg() - ck.arg());
            }
        }
    }
    shifts
}

/// Result of [`phase_sync`].
#[derive(Debug, Clone, PartialEq)]
pub struct SyncOutcome {
    /// One factor per sub-beam; the first is always 1.
    pub shifts: Vec<Complex64>,
    /// Pairs `(k, k + 1)` left unsynchronized because a coefficient vanished
    /// at their overlap point.
    pub skipped: Vec<usize>,
}

/// Sub-beam coefficient at `p`: the sum over its sub-arrays of `awv`.
pub fn beam_coefficient(
    layout: &SubArrayLayout,
    awv: &Awv,
    members: &[usize],
    p: UvPoint,
) -> Complex64 {
    members
        .iter()
        .map(|&k| layout.subarray_coefficient(awv, k, p))
        .sum()
}

/// Phase-aligns adjacent sub-beams at their shared samples.
///
/// For each pair `(k, k + 1)` the overlap point is converted to azimuth and
/// elevation, both sub-beams' coefficients are evaluated there and sub-beam
/// `k + 1` is rotated by `exp(j(arg C_k - arg C_{k+1}))`, where `C_k` already
/// carries its own shift. `awv` is the full array with every sub-array
/// steered and no inter-beam shifts applied.
pub fn phase_sync(
    layout: &SubArrayLayout,
    assignment: &[Vec<usize>],
    overlaps: &[UvPoint],
    awv: &Awv,
) -> Result<SyncOutcome> {
    if overlaps.len() + 1 != assignment.len() {
        return Err(Error::Config(format!(
            "{} sub-beams need {} overlap points, got {}",
            assignment.len(),
            assignment.len().saturating_sub(1),
            overlaps.len()
        )));
    }
    let mut shifts = vec![Complex64::new(1.0, 0.0)];
    let mut skipped = Vec::new();
    for (k, m) in overlaps.iter().enumerate() {
        let at = SteeringDirection::from_uv(*m)?.uv();
        let prev = shifts[k] * beam_coefficient(layout, awv, &assignment[k], at);
        let next = beam_coefficient(layout, awv, &assignment[k + 1], at);
        if prev.norm() < PHASE_MAGNITUDE_FLOOR || next.norm() < PHASE_MAGNITUDE_FLOOR {
            skipped.push(k);
            shifts.push(Complex64::new(1.0, 0.0));
        } else {
            shifts.push(Complex64::from_polar(1.0, prev.arg() - next.arg()));
        }
    }
    Ok(SyncOutcome { shifts, skipped })
}

/// How sub-array phase offsets are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "seed")]
pub enum SyncMode {
    /// Reinforcing sub-arrays aligned at their centre, adjacent sub-beams
    /// aligned at their overlap sample.
    Synced,
    /// Every sub-array gets an independent phase drawn uniformly from
    /// `[0, 2pi)` with the given seed.
    Random(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanOptions {
    /// Interleaved sub-array count `M_i` (a perfect square).
    pub interleave: usize,
    pub sync: SyncMode,
    /// Move the first sub-beam to the farthest sample it still covers the
    /// first sample from.
    pub delayed_first: bool,
}

impl Default for PlanOptions {
    fn default() -> Self {
        Self {
            interleave: DEFAULT_INTERLEAVE,
            sync: SyncMode::Synced,
            delayed_first: false,
        }
    }
}

/// Selected sub-beams and the phase shifts that tie them together.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamPlan {
    pub layout: SubArrayLayout,
    pub trajectory_length: f64,
    /// Sine-space width of one sub-beam after subdivision.
    pub beam_width: f64,
    pub beam_centers: Vec<UvPoint>,
    /// Sample index of each beam centre (extrapolated samples continue the
    /// original numbering).
    pub beam_samples: Vec<usize>,
    pub overlap_points: Vec<UvPoint>,
    /// Sub-array indices driving each sub-beam.
    pub assignment: Vec<Vec<usize>>,
    /// Inter-beam phase factors, one per sub-beam.
    pub sync_shifts: Vec<Complex64>,
    /// Final factor applied to each sub-array.
    pub subarray_shifts: Vec<Complex64>,
    pub extrapolated: usize,
    pub skipped_syncs: Vec<usize>,
}

impl BeamPlan {
    pub fn half_width(&self) -> f64 {
        self.beam_width / 2.0
    }

    pub fn subbeam_count(&self) -> usize {
        self.beam_centers.len()
    }

    /// Sub-arrays per sub-beam.
    pub fn multiplicity(&self) -> Vec<usize> {
        self.assignment.iter().map(Vec::len).collect()
    }

    /// Distance from `p` to the nearest beam centre.
    pub fn nearest_center_distance(&self, p: &UvPoint) -> f64 {
        self.beam_centers
            .iter()
            .map(|c| c.distance(p))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Sample count giving at most a fortieth of the narrowest sub-beam width between
/// consecutive samples, and never fewer than 64.
pub fn default_sample_count(length: f64, beam_width: f64) -> usize {
    let n = (length / (beam_width / 40.0)).ceil() as usize + 1;
    n.max(MIN_SAMPLES)
}

/// Samples the access-point path for a head rotation at the default density
/// for `config`.
pub fn sample_for_plan(
    q1: &Quaternion,
    q2: &Quaternion,
    ap_dir: UvPoint,
    config: &ArrayConfig,
    options: &PlanOptions,
    samples: Option<usize>,
) -> Result<Trajectory> {
    let n = match samples {
        Some(n) => n,
        None => {
            let coarse = sample_trajectory(q1, q2, ap_dir, MIN_SAMPLES)?;
            let width = SubArrayLayout::interleaved(config, options.interleave)?.subbeam_width();
            default_sample_count(coarse.length(), width)
        }
    };
    sample_trajectory(q1, q2, ap_dir, n)
}

/// Full pipeline from two headset orientations to the weight vector.
pub fn covrage_plan(
    q1: &Quaternion,
    q2: &Quaternion,
    ap_dir: UvPoint,
    config: &ArrayConfig,
    options: &PlanOptions,
) -> Result<(Awv, BeamPlan)> {
    let trajectory = sample_for_plan(q1, q2, ap_dir, config, options, None)?;
    plan_trajectory(&trajectory, config, options)
}

/// Plans a weight vector covering an already sampled trajectory.
pub fn plan_trajectory(
    trajectory: &Trajectory,
    config: &ArrayConfig,
    options: &PlanOptions,
) -> Result<(Awv, BeamPlan)> {
    let length = trajectory.length();
    let interleaved = SubArrayLayout::interleaved(config, options.interleave)?;
    let w_i = interleaved.subbeam_width();
    let mut level = subdivision_level(length, w_i, options.interleave);

    // The length estimate can be one sub-beam short on curved paths; the
    // coverage itself decides.
    let (layout, mut coverage) = loop {
        let layout = SubArrayLayout::subdivided(config, options.interleave, level)?;
        let coverage = cover_points(trajectory, layout.subbeam_width() / 2.0)?;
        if coverage.beam_centers.len() <= layout.len() {
            break (layout, coverage);
        }
        if layout.localized().is_err() {
            return Err(Error::TooManyBeams {
                beams: coverage.beam_centers.len(),
                sub_arrays: layout.len(),
            });
        }
        level += 1;
    };
    let half_width = layout.subbeam_width() / 2.0;

    if options.delayed_first {
        let start = trajectory.first();
        let (idx, _) = trajectory
            .points()
            .iter()
            .enumerate()
            .filter(|(_, p)| p.distance(&start) <= half_width)
            .fold((0, -1.0), |best, (i, p)| {
                let d = p.distance(&start);
                if d > best.1 {
                    (i, d)
                } else {
                    best
                }
            });
        coverage.beam_centers[0] = trajectory.points()[idx];
        coverage.beam_samples[0] = idx;
    }

    let assignment = allocate_sub_arrays(coverage.beam_centers.len(), &layout)?;
    let mut beam_of = vec![0usize; layout.len()];
    for (b, members) in assignment.iter().enumerate() {
        for &k in members {
            beam_of[k] = b;
        }
    }
    let sub_awvs = layout
        .subarrays()
        .iter()
        .zip(&beam_of)
        .map(|(sa, &b)| Ok(sa.steering_weights(SteeringDirection::from_uv(coverage.beam_centers[b])?)))
        .collect::<Result<Vec<_>>>()?;
    let unit = vec![Complex64::new(1.0, 0.0); layout.len()];
    let steered = layout.compose(&sub_awvs, &unit)?;

    let (sync_shifts, subarray_shifts, skipped) = match options.sync {
        SyncMode::Synced => {
            let intra = align_reinforcing(&layout, &assignment, &coverage.beam_centers, &steered);
            let aligned = layout.compose(&sub_awvs, &intra)?;
            let outcome = phase_sync(&layout, &assignment, &coverage.overlap_points, &aligned)?;
            let per_subarray = intra
                .iter()
                .zip(&beam_of)
                .map(|(s, &b)| s * outcome.shifts[b])
                .collect();
            (outcome.shifts, per_subarray, outcome.skipped)
        }
        SyncMode::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let per_subarray: Vec<Complex64> = (0..layout.len())
                .map(|_| Complex64::from_polar(1.0, rng.gen_range(0.0..TAU)))
                .collect();
            let per_beam = assignment.iter().map(|m| per_subarray[m[0]]).collect();
            (per_beam, per_subarray, Vec::new())
        }
    };

    let mut awv = layout.compose(&sub_awvs, &subarray_shifts)?;
    if let Some(bits) = config.phase_bits {
        awv = awv.quantized(bits);
    }
    let plan = BeamPlan {
        beam_width: layout.subbeam_width(),
        layout,
        trajectory_length: length,
        beam_centers: coverage.beam_centers,
        beam_samples: coverage.beam_samples,
        overlap_points: coverage.overlap_points,
        assignment,
        sync_shifts,
        subarray_shifts,
        extrapolated: coverage.extrapolated,
        skipped_syncs: skipped,
    };
    Ok((awv, plan))
}
