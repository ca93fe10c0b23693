//! Uniform rectangular array: element phases, steering weights, array
//! coefficient and gain, beamwidths, and sub-array partitions.
//!
//! Element `(x, y)` sits at `(x d, y d)` with `d` the spacing in wavelengths.
//! For a direction with sine-space coordinates `(u, v)` its phase relative to
//! element `(0, 0)` is `exp(-j 2 pi d (x u + y v))`, which is the azimuth /
//! elevation form `exp(j 2 pi d (-x sin phi cos theta - y sin theta))`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::UvPoint;

/// Gains below this are reported as this value.
pub const GAIN_FLOOR_DBI: f64 = -40.0;

/// Half-power beamwidth constant of a uniformly weighted aperture.
pub const HPBW_CONSTANT: f64 = 0.886;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayConfig {
    pub nx: usize,
    pub ny: usize,
    /// Element spacing in wavelengths.
    pub spacing_wavelengths: f64,
    pub frequency_hz: f64,
    /// Phase-shifter resolution; `None` means continuous phases.
    #[serde(default)]
    pub phase_bits: Option<u8>,
}

impl Default for ArrayConfig {
    /// 32 x 32 elements at a quarter wavelength, 60 GHz: a 4 cm square.
    fn default() -> Self {
        Self {
            nx: 32,
            ny: 32,
            spacing_wavelengths: 0.25,
            frequency_hz: 60e9,
            phase_bits: None,
        }
    }
}

impl ArrayConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::Config("array needs at least one element per side".into()));
        }
        if !(self.spacing_wavelengths > 0.0) {
            return Err(Error::Config("element spacing must be positive".into()));
        }
        if !(self.frequency_hz > 0.0) {
            return Err(Error::Config("frequency must be positive".into()));
        }
        if matches!(self.phase_bits, Some(0)) {
            return Err(Error::Config("phase_bits must be at least 1".into()));
        }
        Ok(())
    }

    pub fn element_count(&self) -> usize {
        self.nx * self.ny
    }

    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.frequency_hz
    }

    /// Physical side lengths `(x, y)` in metres.
    pub fn aperture_m(&self) -> (f64, f64) {
        let d = self.spacing_wavelengths * self.wavelength_m();
        (self.nx as f64 * d, self.ny as f64 * d)
    }
}

/// Beam focus as azimuth and elevation in radians.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SteeringDirection {
    pub phi: f64,
    pub theta: f64,
}

impl SteeringDirection {
    pub const BROADSIDE: Self = Self { phi: 0.0, theta: 0.0 };

    pub const fn new(phi: f64, theta: f64) -> Self {
        Self { phi, theta }
    }

    pub fn from_uv(p: UvPoint) -> Result<Self> {
        let e = p.to_euler()?;
        Ok(Self::new(e.phi, e.theta))
    }

    /// Sine-space coordinates; not checked against the hemisphere.
    pub fn uv(&self) -> UvPoint {
        UvPoint::raw(self.phi.sin() * self.theta.cos(), self.theta.sin())
    }
}

/// Phase of element `(x, y)` relative to element `(0, 0)` for a plane wave
/// arriving from `dir`.
pub fn element_phase_delta(x: usize, y: usize, dir: SteeringDirection, spacing: f64) -> Complex64 {
    let arg = TAU
        * spacing
        * (-(x as f64) * dir.phi.sin() * dir.theta.cos() - y as f64 * dir.theta.sin());
    Complex64::from_polar(1.0, arg)
}

/// Antenna weight vector: one unit-magnitude complex weight per element,
/// stored row-major as `weights[y * nx + x]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Awv {
    nx: usize,
    ny: usize,
    weights: Vec<Complex64>,
}

impl Awv {
    /// Wraps weights, rescaling each to unit magnitude.
    ///
    /// Panics on a length mismatch or a zero weight.
    pub fn new(nx: usize, ny: usize, weights: Vec<Complex64>) -> Self {
        assert_eq!(weights.len(), nx * ny, "weight count must be nx * ny");
        let weights = weights
            .into_iter()
            .map(|w| {
                let n = w.norm();
                assert!(n > 0.0, "weights must be non-zero");
                if (n - 1.0).abs() > 1e-12 {
                    w / n
                } else {
                    w
                }
            })
            .collect();
        Self { nx, ny, weights }
    }

    pub fn uniform(nx: usize, ny: usize) -> Self {
        Self {
            nx,
            ny,
            weights: vec![Complex64::new(1.0, 0.0); nx * ny],
        }
    }

    pub fn from_phases(nx: usize, ny: usize, phases: &[f64]) -> Self {
        assert_eq!(phases.len(), nx * ny, "phase count must be nx * ny");
        Self {
            nx,
            ny,
            weights: phases.iter().map(|&p| Complex64::from_polar(1.0, p)).collect(),
        }
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn get(&self, x: usize, y: usize) -> Complex64 {
        self.weights[y * self.nx + x]
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    /// Element phases in `(-pi, pi]`.
    pub fn phases(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w.arg()).collect()
    }

    /// Multiplies every weight by `factor` (unit magnitude).
    pub fn rotated(&self, factor: Complex64) -> Self {
        Self::new(
            self.nx,
            self.ny,
            self.weights.iter().map(|w| w * factor).collect(),
        )
    }

    /// Rounds every phase to the nearest of `2^bits` uniform levels.
    pub fn quantized(&self, bits: u8) -> Self {
        let step = TAU / f64::from(1u32 << bits.min(31));
        Self::from_phases(
            self.nx,
            self.ny,
            &self
                .phases()
                .iter()
                .map(|p| (p / step).round() * step)
                .collect::<Vec<_>>(),
        )
    }
}

/// Weights of an `nx x ny` grid at `spacing` wavelengths focused on `dir`:
/// `exp(j 2 pi d (x sin phi cos theta + y sin theta))`.
pub fn steering_weights(nx: usize, ny: usize, spacing: f64, dir: SteeringDirection) -> Awv {
    let uv = dir.uv();
    let weights = (0..ny)
        .flat_map(|y| (0..nx).map(move |x| (x, y)))
        .map(|(x, y)| Complex64::from_polar(1.0, TAU * spacing * (x as f64 * uv.u + y as f64 * uv.v)))
        .collect();
    Awv { nx, ny, weights }
}

fn phase_ramp(n: usize, spacing: f64, s: f64) -> Vec<Complex64> {
    (0..n)
        .map(|k| Complex64::from_polar(1.0, -TAU * spacing * k as f64 * s))
        .collect()
}

/// Array coefficient of `awv` for a plane wave from `dir`: the weighted sum
/// of element phases over the whole grid.
pub fn array_coefficient(awv: &Awv, dir: SteeringDirection, spacing: f64) -> Complex64 {
    coefficient_uv(awv, dir.uv(), spacing)
}

/// [`array_coefficient`] addressed by sine-space coordinates.
pub fn coefficient_uv(awv: &Awv, p: UvPoint, spacing: f64) -> Complex64 {
    let ex = phase_ramp(awv.nx, spacing, p.u);
    let ey = phase_ramp(awv.ny, spacing, p.v);
    awv.weights
        .chunks_exact(awv.nx)
        .zip(&ey)
        .map(|(row, &py)| py * row.iter().zip(&ex).map(|(w, px)| w * px).sum::<Complex64>())
        .sum()
}

/// Gain in dBi for a coefficient, floored at [`GAIN_FLOOR_DBI`].
pub fn gain_dbi(c: Complex64) -> f64 {
    let g = 10.0 * c.norm_sqr().log10();
    if g.is_nan() || g < GAIN_FLOOR_DBI {
        GAIN_FLOOR_DBI
    } else {
        g
    }
}

/// Directional receive gain `10 log10 |C|^2`.
pub fn directional_gain(awv: &Awv, dir: SteeringDirection, spacing: f64) -> f64 {
    gain_dbi(array_coefficient(awv, dir, spacing))
}

pub fn gain_uv(awv: &Awv, p: UvPoint, spacing: f64) -> f64 {
    gain_dbi(coefficient_uv(awv, p, spacing))
}

/// Half-power beamwidth in sine-space, `0.886 / (n d)`.
pub fn beamwidth_uv(n_side: usize, spacing: f64) -> f64 {
    HPBW_CONSTANT / (n_side as f64 * spacing)
}

/// Half-power beamwidth in radians at steering angle `alpha` from broadside.
pub fn beamwidth_angular(n_side: usize, spacing: f64, alpha: f64) -> Result<f64> {
    let c = alpha.cos();
    if alpha.abs() >= FRAC_PI_2 || c < 1e-12 {
        return Err(Error::DegenerateBeam {
            alpha_deg: alpha.to_degrees(),
        });
    }
    Ok(beamwidth_uv(n_side, spacing) / c)
}

/// Coefficients on a rectangular sine-space grid, row-major with rows along
/// `vs`: `out[j * us.len() + i]` is the coefficient at `(us[i], vs[j])`.
///
/// Rows are evaluated in parallel; the result does not depend on scheduling.
pub fn coefficient_grid(awv: &Awv, spacing: f64, us: &[f64], vs: &[f64]) -> Vec<Complex64> {
    let ex: Vec<Vec<Complex64>> = us.iter().map(|&u| phase_ramp(awv.nx, spacing, u)).collect();
    vs.par_iter()
        .flat_map_iter(|&v| {
            let ey = phase_ramp(awv.ny, spacing, v);
            let mut column = vec![Complex64::new(0.0, 0.0); awv.nx];
            for (row, py) in awv.weights.chunks_exact(awv.nx).zip(&ey) {
                for (acc, w) in column.iter_mut().zip(row) {
                    *acc += w * py;
                }
            }
            let ex = &ex;
            (0..us.len()).map(move |i| {
                column
                    .iter()
                    .zip(&ex[i])
                    .map(|(c, px)| c * px)
                    .sum::<Complex64>()
            })
        })
        .collect()
}

/// One sub-array of a [`SubArrayLayout`]: a regular grid in its own local
/// coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SubArray {
    pub nx: usize,
    pub ny: usize,
    /// Spacing between neighbouring members in wavelengths.
    pub spacing_wavelengths: f64,
    /// Global `(x, y)` of the member at local `(lx, ly)`, at `ly * nx + lx`.
    pub elements: Vec<(usize, usize)>,
}

impl SubArray {
    pub fn element_count(&self) -> usize {
        self.elements.len()
    }

    /// Sine-space half-power width of this sub-array's beam.
    pub fn beamwidth_uv(&self) -> f64 {
        beamwidth_uv(self.nx.min(self.ny), self.spacing_wavelengths)
    }

    /// Steering weights in local coordinates.
    pub fn steering_weights(&self, dir: SteeringDirection) -> Awv {
        steering_weights(self.nx, self.ny, self.spacing_wavelengths, dir)
    }
}

/// Assignment of every array element to exactly one sub-array.
///
/// `subarray_of(x, y)` is the sub-array index map and `local_coords(x, y)`
/// the coordinate map into that sub-array's grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SubArrayLayout {
    config: ArrayConfig,
    interleave: usize,
    subdivision: u32,
    index: Vec<usize>,
    local: Vec<(usize, usize)>,
    subarrays: Vec<SubArray>,
}

impl SubArrayLayout {
    /// `mi` interleaved sub-arrays on a `sqrt(mi) x sqrt(mi)` stride.
    /// Element `(x, y)` goes to sub-array `(x mod m) + m (y mod m)` at local
    /// coordinates `(x / m, y / m)` with spacing `m d`.
    pub fn interleaved(config: &ArrayConfig, mi: usize) -> Result<Self> {
        config.validate()?;
        let m = (mi as f64).sqrt().round() as usize;
        if mi == 0 || m * m != mi {
            return Err(Error::Config(format!(
                "interleaved sub-array count {mi} is not a perfect square"
            )));
        }
        if !config.nx.is_multiple_of(m) || !config.ny.is_multiple_of(m) {
            return Err(Error::Config(format!(
                "a {}x{} array cannot be interleaved with stride {m}",
                config.nx, config.ny
            )));
        }
        let (sx, sy) = (config.nx / m, config.ny / m);
        let mut subarrays: Vec<SubArray> = (0..mi)
            .map(|_| SubArray {
                nx: sx,
                ny: sy,
                spacing_wavelengths: m as f64 * config.spacing_wavelengths,
                elements: vec![(0, 0); sx * sy],
            })
            .collect();
        let mut index = vec![0; config.element_count()];
        let mut local = vec![(0, 0); config.element_count()];
        for y in 0..config.ny {
            for x in 0..config.nx {
                let k = x % m + m * (y % m);
                let (lx, ly) = (x / m, y / m);
                index[y * config.nx + x] = k;
                local[y * config.nx + x] = (lx, ly);
                subarrays[k].elements[ly * sx + lx] = (x, y);
            }
        }
        Ok(Self {
            config: config.clone(),
            interleave: m,
            subdivision: 0,
            index,
            local,
            subarrays,
        })
    }

    /// The whole array as a single sub-array.
    pub fn full(config: &ArrayConfig) -> Result<Self> {
        Self::interleaved(config, 1)
    }

    /// Splits every sub-array into four contiguous quadrants. Sub-array `k`
    /// becomes `4k + qx + 2qy`; the member spacing is unchanged.
    pub fn localized(&self) -> Result<Self> {
        let mut subarrays = Vec::with_capacity(self.subarrays.len() * 4);
        for (k, sa) in self.subarrays.iter().enumerate() {
            if sa.nx % 2 != 0 || sa.ny % 2 != 0 {
                return Err(Error::Config(format!(
                    "sub-array {k} is {}x{} and cannot be split into quadrants",
                    sa.nx, sa.ny
                )));
            }
            let (hx, hy) = (sa.nx / 2, sa.ny / 2);
            for q in 0..4 {
                let (qx, qy) = (q % 2, q / 2);
                let elements = (0..hy)
                    .flat_map(|ly| (0..hx).map(move |lx| (lx, ly)))
                    .map(|(lx, ly)| sa.elements[(ly + qy * hy) * sa.nx + lx + qx * hx])
                    .collect();
                subarrays.push(SubArray {
                    nx: hx,
                    ny: hy,
                    spacing_wavelengths: sa.spacing_wavelengths,
                    elements,
                });
            }
        }
        let mut index = vec![0; self.config.element_count()];
        let mut local = vec![(0, 0); self.config.element_count()];
        for (k, sa) in subarrays.iter().enumerate() {
            for (i, &(x, y)) in sa.elements.iter().enumerate() {
                index[y * self.config.nx + x] = k;
                local[y * self.config.nx + x] = (i % sa.nx, i / sa.nx);
            }
        }
        Ok(Self {
            config: self.config.clone(),
            interleave: self.interleave,
            subdivision: self.subdivision + 1,
            index,
            local,
            subarrays,
        })
    }

    /// Interleaved partition followed by `levels` localized splits.
    pub fn subdivided(config: &ArrayConfig, mi: usize, levels: u32) -> Result<Self> {
        let mut layout = Self::interleaved(config, mi)?;
        for _ in 0..levels {
            layout = layout.localized()?;
        }
        Ok(layout)
    }

    pub fn config(&self) -> &ArrayConfig {
        &self.config
    }

    /// Interleave stride `sqrt(Mi)`.
    pub fn interleave_stride(&self) -> usize {
        self.interleave
    }

    pub fn subdivision(&self) -> u32 {
        self.subdivision
    }

    pub fn len(&self) -> usize {
        self.subarrays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subarrays.is_empty()
    }

    pub fn subarrays(&self) -> &[SubArray] {
        &self.subarrays
    }

    pub fn subarray(&self, k: usize) -> &SubArray {
        &self.subarrays[k]
    }

    pub fn subarray_of(&self, x: usize, y: usize) -> usize {
        self.index[y * self.config.nx + x]
    }

    pub fn local_coords(&self, x: usize, y: usize) -> (usize, usize) {
        self.local[y * self.config.nx + x]
    }

    /// Global coordinates of local `(lx, ly)` in sub-array `k`.
    pub fn global_coords(&self, k: usize, lx: usize, ly: usize) -> (usize, usize) {
        let sa = &self.subarrays[k];
        sa.elements[ly * sa.nx + lx]
    }

    /// Sine-space beamwidth shared by all sub-arrays of this layout.
    pub fn subbeam_width(&self) -> f64 {
        self.subarrays[0].beamwidth_uv()
    }

    /// Coefficient of sub-array `k` alone, taken from the full-array `awv`
    /// with every member at its global position.
    pub fn subarray_coefficient(&self, awv: &Awv, k: usize, p: UvPoint) -> Complex64 {
        let d = self.config.spacing_wavelengths;
        self.subarrays[k]
            .elements
            .iter()
            .map(|&(x, y)| {
                awv.get(x, y)
                    * Complex64::from_polar(1.0, -TAU * d * (x as f64 * p.u + y as f64 * p.v))
            })
            .sum()
    }

    /// Full-array weights `[w]_{x,y} = a_k [w_k]_{local(x,y)}` with
    /// `k = subarray_of(x, y)`.
    ///
    /// Each sub-array keeps its local steering, so it stays coherent at its
    /// own focus and is rotated there by `a_k`.
    pub fn compose(&self, sub_awvs: &[Awv], shifts: &[Complex64]) -> Result<Awv> {
        if sub_awvs.len() != self.len() || shifts.len() != self.len() {
            return Err(Error::Config(format!(
                "{} sub-arrays but {} sub-AWVs and {} shifts",
                self.len(),
                sub_awvs.len(),
                shifts.len()
            )));
        }
        for (k, (sa, w)) in self.subarrays.iter().zip(sub_awvs).enumerate() {
            if (w.nx, w.ny) != (sa.nx, sa.ny) {
                return Err(Error::Config(format!(
                    "sub-AWV {k} is {}x{}, sub-array is {}x{}",
                    w.nx, w.ny, sa.nx, sa.ny
                )));
            }
        }
        let (nx, ny) = (self.config.nx, self.config.ny);
        let mut weights = Vec::with_capacity(nx * ny);
        for y in 0..ny {
            for x in 0..nx {
                let k = self.subarray_of(x, y);
                let (lx, ly) = self.local_coords(x, y);
                weights.push(shifts[k] * sub_awvs[k].get(lx, ly));
            }
        }
        Ok(Awv::new(nx, ny, weights))
    }
}

/// Wraps a phase into `(-pi, pi]`.
pub fn wrap_phase(p: f64) -> f64 {
    let r = p.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize, d: f64) -> ArrayConfig {
        ArrayConfig {
            nx: n,
            ny: n,
            spacing_wavelengths: d,
            ..ArrayConfig::default()
        }
    }

    /// Straight double loop over elements using the angle form of the phase.
    fn brute_coefficient(awv: &Awv, dir: SteeringDirection, d: f64) -> Complex64 {
        let mut c = Complex64::new(0.0, 0.0);
        for x in 0..awv.nx() {
            for y in 0..awv.ny() {
                let arg = 2.0 * PI * d
                    * (-(x as f64) * dir.phi.sin() * dir.theta.cos() - (y as f64) * dir.theta.sin());
                c += awv.get(x, y) * Complex64::new(arg.cos(), arg.sin());
            }
        }
        c
    }

    #[test]
    fn phase_delta_anchors() {
        let any = SteeringDirection::new(0.4, -0.3);
        assert_eq!(element_phase_delta(0, 0, any, 0.25), Complex64::new(1.0, 0.0));
        let delta = element_phase_delta(7, 3, SteeringDirection::BROADSIDE, 0.25);
        assert!((delta - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let delta = element_phase_delta(1, 0, SteeringDirection::new(PI / 6.0, 0.0), 0.5);
        assert!((delta - Complex64::new(0.0, -1.0)).norm() < 1e-12);
    }

    #[test]
    fn steering_cancels_element_phase() {
        let dir = SteeringDirection::new(0.7, -0.4);
        let w = steering_weights(8, 6, 0.3, dir);
        for y in 0..6 {
            for x in 0..8 {
                let p = w.get(x, y) * element_phase_delta(x, y, dir, 0.3);
                assert!((p - Complex64::new(1.0, 0.0)).norm() < 1e-12);
            }
        }
        let b = steering_weights(4, 4, 0.5, SteeringDirection::BROADSIDE);
        assert!(b.weights().iter().all(|w| (w - Complex64::new(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn coherent_sums() {
        let dir = SteeringDirection::new(20f64.to_radians(), 10f64.to_radians());
        let w = steering_weights(16, 16, 0.5, dir);
        assert!((array_coefficient(&w, dir, 0.5) - Complex64::new(256.0, 0.0)).norm() < 1e-6);
        let aoa = SteeringDirection::new(-0.2, 0.35);
        let w = steering_weights(32, 32, 0.25, aoa);
        let c = array_coefficient(&w, aoa, 0.25);
        assert!((c - Complex64::new(1024.0, 0.0)).norm() < 1e-6);
        assert!((directional_gain(&w, aoa, 0.25) - 60.205999).abs() < 1e-5);
        let w = steering_weights(16, 16, 0.5, aoa);
        assert!((directional_gain(&w, aoa, 0.5) - 48.16).abs() < 5e-3);
        let single = Awv::from_phases(1, 1, &[0.3]);
        assert!((array_coefficient(&single, aoa, 0.25).norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fast_sum_matches_double_loop() {
        let w = Awv::from_phases(5, 7, &(0..35).map(|k| (k as f64 * 1.37).sin() * 3.0).collect::<Vec<_>>());
        for dir in [
            SteeringDirection::new(0.3, 0.1),
            SteeringDirection::new(-1.1, 0.6),
            SteeringDirection::new(0.0, -0.9),
        ] {
            let a = array_coefficient(&w, dir, 0.37);
            let b = brute_coefficient(&w, dir, 0.37);
            assert!((a - b).norm() <= 1e-9 * b.norm().max(1.0));
        }
    }

    #[test]
    fn grid_matches_pointwise() {
        let w = steering_weights(6, 4, 0.5, SteeringDirection::new(0.2, 0.1));
        let us = [-0.5, 0.0, 0.3];
        let vs = [-0.2, 0.4];
        let g = coefficient_grid(&w, 0.5, &us, &vs);
        for (j, &v) in vs.iter().enumerate() {
            for (i, &u) in us.iter().enumerate() {
                let c = coefficient_uv(&w, UvPoint::raw(u, v), 0.5);
                assert!((g[j * us.len() + i] - c).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn null_hits_the_floor() {
        // 8-element row at half a wavelength: first null at u = 1 / (N d)
        let w = Awv::uniform(8, 1);
        let null = SteeringDirection::from_uv(UvPoint::raw(1.0 / (8.0 * 0.5), 0.0)).unwrap();
        assert!(array_coefficient(&w, null, 0.5).norm() < 1e-12);
        assert_eq!(directional_gain(&w, null, 0.5), GAIN_FLOOR_DBI);
        assert!(directional_gain(&w, null, 0.5) < -20.0);
    }

    #[test]
    fn beamwidth_values() {
        assert!((beamwidth_uv(16, 0.5) - 0.11075).abs() < 1e-12);
        assert!((beamwidth_uv(40, 0.5).asin().to_degrees() - 2.54).abs() < 0.01);
        assert_eq!(beamwidth_uv(32, 0.25), beamwidth_uv(16, 0.5));
        assert_eq!(beamwidth_angular(16, 0.5, 0.0).unwrap(), beamwidth_uv(16, 0.5));
        let b60 = beamwidth_angular(16, 0.5, PI / 3.0).unwrap();
        assert!((b60 - 2.0 * beamwidth_uv(16, 0.5)).abs() < 1e-12);
        let b45 = beamwidth_angular(16, 0.5, PI / 4.0).unwrap();
        assert!((b45 - 0.1566).abs() < 1e-4);
        assert!(beamwidth_angular(16, 0.5, FRAC_PI_2).is_err());
    }

    #[test]
    fn interleaved_partition() {
        let layout = SubArrayLayout::interleaved(&cfg(32, 0.25), 4).unwrap();
        assert_eq!(layout.len(), 4);
        for sa in layout.subarrays() {
            assert_eq!((sa.nx, sa.ny), (16, 16));
            assert_eq!(sa.spacing_wavelengths, 0.5);
        }
        // (3, 5): offsets (1, 1), local (1, 2)
        assert_eq!(layout.subarray_of(3, 5), 1 + 2);
        assert_eq!(layout.local_coords(3, 5), (1, 2));
        assert_eq!(layout.global_coords(3, 1, 2), (3, 5));

        let single = SubArrayLayout::full(&cfg(32, 0.25)).unwrap();
        assert_eq!(single.len(), 1);
        assert_eq!(single.local_coords(9, 17), (9, 17));

        assert!(SubArrayLayout::interleaved(&cfg(32, 0.25), 3).is_err());
        assert!(SubArrayLayout::interleaved(&cfg(30, 0.25), 16).is_err());
    }

    #[test]
    fn localized_partition() {
        let block = SubArrayLayout::full(&cfg(16, 0.5)).unwrap();
        let quads = block.localized().unwrap();
        assert_eq!(quads.len(), 4);
        assert!((quads.subbeam_width() - 2.0 * block.subbeam_width()).abs() < 1e-12);
        assert!((block.subbeam_width() - 0.1108).abs() < 1e-4);
        // (12, 3) lies in the right-hand lower quadrant at local (4, 3)
        assert_eq!(quads.subarray_of(12, 3), 1);
        assert_eq!(quads.local_coords(12, 3), (4, 3));

        let sixteen = SubArrayLayout::subdivided(&cfg(32, 0.25), 4, 1).unwrap();
        assert_eq!(sixteen.len(), 16);
        assert_eq!(sixteen.subdivision(), 1);
        assert!(SubArrayLayout::full(&cfg(3, 0.5)).unwrap().localized().is_err());
    }

    #[test]
    fn compose_single_subarray_is_identity() {
        let layout = SubArrayLayout::full(&cfg(8, 0.5)).unwrap();
        let dir = SteeringDirection::new(0.3, 0.2);
        let sub = layout.subarray(0).steering_weights(dir);
        let full = layout.compose(std::slice::from_ref(&sub), &[Complex64::new(1.0, 0.0)]).unwrap();
        assert_eq!(full, sub);
    }

    #[test]
    fn compose_keeps_unit_magnitude_and_coherence() {
        let layout = SubArrayLayout::interleaved(&cfg(32, 0.25), 4).unwrap();
        let dirs: Vec<_> = (0..4)
            .map(|k| SteeringDirection::new(0.1 * k as f64, -0.05 * k as f64))
            .collect();
        let subs: Vec<_> = layout
            .subarrays()
            .iter()
            .zip(&dirs)
            .map(|(sa, &d)| sa.steering_weights(d))
            .collect();
        let shifts: Vec<_> = (0..4).map(|k| Complex64::from_polar(1.0, k as f64)).collect();
        let full = layout.compose(&subs, &shifts).unwrap();
        assert!(full.weights().iter().all(|w| (w.norm() - 1.0).abs() < 1e-12));
        for (k, d) in dirs.iter().enumerate() {
            let c = layout.subarray_coefficient(&full, k, d.uv());
            assert!((c.norm() - 256.0).abs() < 1e-9);
        }
        assert!(layout.compose(&subs[..3], &shifts).is_err());
    }

    #[test]
    fn opposite_shifts_cancel() {
        // at broadside every sub-array has the same coefficient, so pairs
        // shifted by pi against each other cancel
        let layout = SubArrayLayout::interleaved(&cfg(8, 0.5), 4).unwrap();
        let dir = SteeringDirection::BROADSIDE;
        let subs: Vec<_> = layout.subarrays().iter().map(|sa| sa.steering_weights(dir)).collect();
        let one = Complex64::new(1.0, 0.0);
        let flip = Complex64::from_polar(1.0, PI);
        let full = layout.compose(&subs, &[one, flip, one, flip]).unwrap();
        assert!(array_coefficient(&full, dir, 0.5).norm() < 1e-6);
        let full = layout.compose(&subs, &[one; 4]).unwrap();
        assert!((array_coefficient(&full, dir, 0.5).norm() - 64.0).abs() < 1e-9);
    }

    #[test]
    fn full_coefficient_is_sum_of_subarrays() {
        let layout = SubArrayLayout::subdivided(&cfg(16, 0.25), 4, 1).unwrap();
        let w = Awv::from_phases(16, 16, &(0..256).map(|k| (k as f64 * 0.77).cos() * 2.0).collect::<Vec<_>>());
        let p = UvPoint::raw(0.21, -0.33);
        let total = coefficient_uv(&w, p, 0.25);
        let parts: Complex64 = (0..layout.len()).map(|k| layout.subarray_coefficient(&w, k, p)).sum();
        assert!((total - parts).norm() <= 1e-9 * total.norm().max(1.0));
    }

    #[test]
    fn quantization_levels() {
        let w = Awv::from_phases(2, 1, &[0.1, 1.0]);
        let q = w.quantized(2);
        let p = q.phases();
        assert!((p[0] - 0.0).abs() < 1e-12);
        assert!((p[1] - FRAC_PI_2).abs() < 1e-12);
        assert!(q.weights().iter().all(|w| (w.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn wrap() {
        assert!((wrap_phase(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_phase(-0.5) + 0.5).abs() < 1e-15);
    }
}
