//! Link budget: log-distance path loss, received power, the noise penalty of
//! a wide or multi-lobe receive pattern and MCS selection.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::array::{coefficient_grid, gain_dbi, gain_uv, Awv, SteeringDirection, SPEED_OF_LIGHT};
use crate::error::{Error, Result};
use crate::geometry::UvPoint;

/// Default noise-penalty search resolution per sine-space axis.
pub const DEFAULT_SEARCH_RESOLUTION: usize = 512;

const DEFAULT_TABLE: &str = include_str!("../data/mcs_80211ad.txt");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkParams {
    pub eirp_dbm: f64,
    pub distance_m: f64,
    pub frequency_hz: f64,
    pub path_loss_exponent: f64,
    pub reference_distance_m: f64,
    /// Path loss at the reference distance. `None` uses free-space loss at
    /// `frequency_hz`.
    pub reference_loss_db: Option<f64>,
    /// Best-case margin over the top MCS threshold. When set, MCS selection
    /// works relative to that best case and ignores absolute power.
    pub headroom_db: Option<f64>,
    /// Receiver noise floor, only used to report absolute SNR.
    pub noise_floor_dbm: Option<f64>,
}

impl Default for LinkParams {
    fn default() -> Self {
        Self {
            eirp_dbm: 30.0,
            distance_m: 2.0,
            frequency_hz: 60e9,
            path_loss_exponent: 2.0,
            reference_distance_m: 1.0,
            reference_loss_db: Some(68.0),
            headroom_db: Some(1.5),
            noise_floor_dbm: None,
        }
    }
}

impl LinkParams {
    pub fn validate(&self) -> Result<()> {
        for (name, d) in [
            ("link.distance_m", self.distance_m),
            ("link.reference_distance_m", self.reference_distance_m),
        ] {
            if !(d > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {d}")));
            }
        }
        if !(self.frequency_hz > 0.0) || !(self.path_loss_exponent > 0.0) {
            return Err(Error::Config(
                "link frequency and path-loss exponent must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Free-space loss at the reference distance, `20 log10(4 pi d0 / lambda)`.
    pub fn free_space_reference_loss(&self) -> f64 {
        let wavelength = SPEED_OF_LIGHT / self.frequency_hz;
        20.0 * (4.0 * std::f64::consts::PI * self.reference_distance_m / wavelength).log10()
    }

    pub fn reference_loss(&self) -> f64 {
        self.reference_loss_db
            .unwrap_or_else(|| self.free_space_reference_loss())
    }
}

/// `PL(d0) + 10 n log10(d / d0)` in dB.
pub fn path_loss(d: f64, params: &LinkParams) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::NonPositiveDistance(d));
    }
    Ok(params.reference_loss()
        + 10.0 * params.path_loss_exponent * (d / params.reference_distance_m).log10())
}

/// `EIRP - PL(d) + G_R` in dBm at the configured distance.
pub fn received_power(params: &LinkParams, g_r_dbi: f64) -> Result<f64> {
    Ok(params.eirp_dbm - path_loss(params.distance_m, params)? + g_r_dbi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McsEntry {
    /// `-1` marks a lost link.
    pub index: i32,
    pub sensitivity_dbm: f64,
    pub rate_mbps: f64,
}

impl McsEntry {
    pub const LINK_LOST: Self = Self {
        index: -1,
        sensitivity_dbm: f64::NEG_INFINITY,
        rate_mbps: 0.0,
    };

    pub fn is_link_lost(&self) -> bool {
        self.index < 0
    }

    pub fn is_control(&self) -> bool {
        self.index == 0
    }
}

/// MCS thresholds sorted by sensitivity. Index 0, if present, is the control
/// PHY.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McsTable {
    entries: Vec<McsEntry>,
}

impl McsTable {
    pub fn new(mut entries: Vec<McsEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Config("MCS table is empty".into()));
        }
        if entries.iter().any(|e| e.index < 0 || !e.sensitivity_dbm.is_finite()) {
            return Err(Error::Config(
                "MCS entries need a non-negative index and a finite sensitivity".into(),
            ));
        }
        entries.sort_by(|a, b| a.sensitivity_dbm.total_cmp(&b.sensitivity_dbm));
        if entries.iter().filter(|e| e.is_control()).count() > 1 {
            return Err(Error::Config("MCS table has more than one control entry".into()));
        }
        if let Some(pos) = entries.iter().position(McsEntry::is_control) {
            if pos != 0 {
                return Err(Error::Config(
                    "the control entry must have the lowest sensitivity".into(),
                ));
            }
        }
        for w in entries.windows(2) {
            if !(w[1].sensitivity_dbm > w[0].sensitivity_dbm && w[1].rate_mbps > w[0].rate_mbps) {
                return Err(Error::Config(format!(
                    "MCS {} and {} are not strictly ordered in sensitivity and rate",
                    w[0].index, w[1].index
                )));
            }
        }
        Ok(Self { entries })
    }

    /// Parses `index,sensitivity_dbm,rate_mbps` rows with a header line;
    /// lines starting with `#` are comments.
    pub fn parse(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let entries = reader
            .deserialize::<(i32, f64, f64)>()
            .map(|row| {
                let (index, sensitivity_dbm, rate_mbps) =
                    row.map_err(|e| Error::Config(format!("MCS table: {e}")))?;
                Ok(McsEntry {
                    index,
                    sensitivity_dbm,
                    rate_mbps,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn entries(&self) -> &[McsEntry] {
        &self.entries
    }

    pub fn control(&self) -> Option<&McsEntry> {
        self.entries.first().filter(|e| e.is_control())
    }

    pub fn top(&self) -> &McsEntry {
        self.entries.last().expect("table is never empty")
    }

    /// Lowest non-control entry.
    pub fn bottom(&self) -> &McsEntry {
        self.entries
            .iter()
            .find(|e| !e.is_control())
            .unwrap_or(&self.entries[0])
    }
}

impl Default for McsTable {
    /// IEEE 802.11ad single-carrier thresholds plus the control PHY.
    fn default() -> Self {
        Self::parse(DEFAULT_TABLE).expect("bundled MCS table is valid")
    }
}

/// Highest-rate entry whose threshold `level_dbm` meets, or
/// [`McsEntry::LINK_LOST`] below every threshold.
pub fn select_mcs(level_dbm: f64, table: &McsTable) -> McsEntry {
    table
        .entries
        .iter()
        .rev()
        .find(|e| level_dbm >= e.sensitivity_dbm)
        .copied()
        .unwrap_or(McsEntry::LINK_LOST)
}

/// Signal level compared against MCS thresholds for gain `g_dbi` at the AoA
/// and noise penalty `penalty_db`.
///
/// With a headroom the level is `top + headroom - penalty`: the best case is
/// a receiver whose AoA sits on the pattern maximum. Otherwise it is the
/// absolute received power minus the penalty.
pub fn mcs_level(params: &LinkParams, table: &McsTable, g_dbi: f64, penalty_db: f64) -> Result<f64> {
    match params.headroom_db {
        Some(h) => Ok(table.top().sensitivity_dbm + h - penalty_db),
        None => Ok(received_power(params, g_dbi)? - penalty_db),
    }
}

/// Evenly spaced sine-space axis over `[-1, 1]`.
pub fn uv_axis(resolution: usize) -> Vec<f64> {
    if resolution < 2 {
        return vec![0.0; resolution];
    }
    let step = 2.0 / (resolution - 1) as f64;
    (0..resolution).map(|i| -1.0 + i as f64 * step).collect()
}

/// Highest directional gain over the front hemisphere.
///
/// A `resolution x resolution` grid over the UV disc locates the peak cell,
/// which is then refined by repeatedly halving a local search step.
pub fn global_max_gain(awv: &Awv, spacing: f64, resolution: usize) -> (UvPoint, f64) {
    let axis = uv_axis(resolution.max(2));
    let grid = coefficient_grid(awv, spacing, &axis, &axis);
    let n = axis.len();
    let (best, _) = grid
        .par_iter()
        .enumerate()
        .filter(|(i, _)| UvPoint::raw(axis[i % n], axis[i / n]).is_valid())
        .map(|(i, c)| (i, c.norm_sqr()))
        .reduce(
            || (usize::MAX, f64::NEG_INFINITY),
            |a, b| match b.1.total_cmp(&a.1) {
                std::cmp::Ordering::Greater => b,
                std::cmp::Ordering::Equal if b.0 < a.0 => b,
                _ => a,
            },
        );
    let mut p = UvPoint::raw(axis[best % n], axis[best / n]);
    let mut g = gain_dbi(grid[best]);
    let mut step = 2.0 / (n - 1) as f64 / 2.0;
    while step > 1e-7 {
        let mut moved = false;
        for (du, dv) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0), (1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
            let q = UvPoint::raw(p.u + du * step, p.v + dv * step);
            if !q.is_valid() {
                continue;
            }
            let gq = gain_uv(awv, q, spacing);
            if gq > g {
                p = q;
                g = gq;
                moved = true;
            }
        }
        if !moved {
            step /= 2.0;
        }
    }
    (p, g)
}

/// `max G_R - G_R(aoa)` over the hemisphere, never negative.
pub fn noise_penalty(awv: &Awv, aoa: SteeringDirection, spacing: f64, resolution: usize) -> f64 {
    let (_, max) = global_max_gain(awv, spacing, resolution);
    penalty_from_max(max, gain_uv(awv, aoa.uv(), spacing))
}

/// Penalty for a gain `g_aoa` when the pattern maximum is `max`.
pub fn penalty_from_max(max: f64, g_aoa: f64) -> f64 {
    (max - g_aoa).max(0.0)
}
