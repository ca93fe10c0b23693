//! Orientation and direction representations and the conversions between them.
//!
//! Conventions used throughout the crate:
//!
//! * Quaternions are Hamilton quaternions `w + xi + yj + zk` acting on vectors
//!   as `v' = q v q*` (active rotation). The product `p * q` applies `q`
//!   first, then `p`.
//! * Euler angles `(phi, theta, psi)` (yaw, pitch, roll) are the intrinsic
//!   x-y'-z'' sequence, `q = qx(phi) * qy(theta) * qz(psi)`. Roll turns about
//!   the body boresight (z), so discarding it leaves a direction.
//! * A direction with angles `(phi, theta)` is the boresight rotated by
//!   `qx(phi) * qy(theta)`, i.e. the body vector
//!   `(sin theta, -sin phi cos theta, cos phi cos theta)`. Its sine-space
//!   coordinates are `u = cos theta sin phi`, `v = sin theta`, so `u = -y`,
//!   `v = x` and the array broadside is `+z`.

use std::f64::consts::FRAC_PI_2;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const NORM_DRIFT: f64 = 1e-9;
const GIMBAL_EPS: f64 = 1e-9;
const IDENTITY_ANGLE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Self) -> Self {
        Self::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalized(self) -> Self {
        self * (1.0 / self.norm())
    }

    /// Angle between two vectors in radians, robust near 0 and pi.
    pub fn angle_to(self, o: Self) -> f64 {
        self.cross(o).norm().atan2(self.dot(o))
    }
}

impl Add for Vec3 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

/// Unit quaternion `[w, x, y, z]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Default for Quaternion {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl Quaternion {
    pub const IDENTITY: Self = Self {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    /// Builds a unit quaternion, normalizing the input.
    ///
    /// Panics if all four components are zero.
    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        let n = (w * w + x * x + y * y + z * z).sqrt();
        assert!(n > 0.0, "zero quaternion has no rotation");
        Self {
            w: w / n,
            x: x / n,
            y: y / n,
            z: z / n,
        }
    }

    pub fn from_axis_angle(axis: Vec3, angle: f64) -> Self {
        let a = axis.normalized();
        let (s, c) = (angle / 2.0).sin_cos();
        Self::new(c, a.x * s, a.y * s, a.z * s)
    }

    /// Shortest-arc rotation taking direction `from` onto direction `to`.
    pub fn rotation_between(from: Vec3, to: Vec3) -> Self {
        let (f, t) = (from.normalized(), to.normalized());
        let axis = f.cross(t);
        if axis.norm() < 1e-15 {
            if f.dot(t) > 0.0 {
                return Self::IDENTITY;
            }
            // antiparallel: any perpendicular axis works
            let helper = if f.x.abs() < 0.9 {
                Vec3::new(1.0, 0.0, 0.0)
            } else {
                Vec3::new(0.0, 1.0, 0.0)
            };
            return Self::from_axis_angle(f.cross(helper), std::f64::consts::PI);
        }
        Self::from_axis_angle(axis, f.angle_to(t))
    }

    pub fn norm(&self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn conjugate(&self) -> Self {
        Self {
            w: self.w,
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }

    /// Representative with `w >= 0`; `q` and `-q` are the same rotation.
    pub fn canonical(&self) -> Self {
        if self.w < 0.0 {
            Self {
                w: -self.w,
                x: -self.x,
                y: -self.y,
                z: -self.z,
            }
        } else {
            *self
        }
    }

    /// Hamilton product `self * rhs`: `rhs` is applied first.
    pub fn hamilton(&self, rhs: &Self) -> Self {
        let (a, b) = (self, rhs);
        let q = Self {
            w: a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            x: a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            y: a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            z: a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
        };
        if (q.norm() - 1.0).abs() > NORM_DRIFT {
            Self::new(q.w, q.x, q.y, q.z)
        } else {
            q
        }
    }

    /// Rotation angle in `[0, 2pi]`.
    pub fn angle(&self) -> f64 {
        let v = (self.x * self.x + self.y * self.y + self.z * self.z).sqrt();
        2.0 * v.atan2(self.w)
    }

    /// Rotation axis, or `None` for (near) identity.
    pub fn axis(&self) -> Option<Vec3> {
        let v = Vec3::new(self.x, self.y, self.z);
        let n = v.norm();
        (self.angle().abs() >= IDENTITY_ANGLE && n > 0.0).then(|| v * (1.0 / n))
    }

    /// `q^a`: same axis, angle scaled by `a`. Near-identity inputs return the
    /// identity since their axis is undefined.
    pub fn powf(&self, a: f64) -> Self {
        match self.axis() {
            None => Self::IDENTITY,
            Some(axis) => Self::from_axis_angle(axis, self.angle() * a),
        }
    }

    pub fn rotate(&self, v: Vec3) -> Vec3 {
        // q v q* expanded: v + 2w (r x v) + 2 r x (r x v)
        let r = Vec3::new(self.x, self.y, self.z);
        let t = r.cross(v) * 2.0;
        v + t * self.w + r.cross(t)
    }

    /// Euler angles `(phi, theta, psi)` for `qx(phi) qy(theta) qz(psi)`.
    pub fn from_euler(e: EulerAngles) -> Self {
        let qx = Self::from_axis_angle(Vec3::new(1.0, 0.0, 0.0), e.phi);
        let qy = Self::from_axis_angle(Vec3::new(0.0, 1.0, 0.0), e.theta);
        let qz = Self::from_axis_angle(Vec3::new(0.0, 0.0, 1.0), e.psi);
        qx.hamilton(&qy).hamilton(&qz)
    }

    /// Converts to Euler angles. See [`Quaternion::to_euler_checked`].
    pub fn to_euler(&self) -> EulerAngles {
        self.to_euler_checked().0
    }

    /// Converts to Euler angles and reports whether the pitch sits at gimbal
    /// lock (`|sin theta| >= 1 - 1e-9`).
    ///
    /// The pitch is `asin(2(wy + xz))` with the argument clamped to `[-1, 1]`.
    /// At gimbal lock roll is pinned to zero and the whole residual rotation
    /// about the shared axis is reported as yaw.
    pub fn to_euler_checked(&self) -> (EulerAngles, bool) {
        let Self { w, x, y, z } = *self;
        let sin_theta = 2.0 * (w * y + x * z);
        if sin_theta.abs() >= 1.0 - GIMBAL_EPS {
            let theta = FRAC_PI_2.copysign(sin_theta);
            let r10 = 2.0 * (x * y + w * z);
            let r11 = 1.0 - 2.0 * (x * x + z * z);
            let phi = if sin_theta > 0.0 {
                r10.atan2(r11)
            } else {
                -r10.atan2(r11)
            };
            return (EulerAngles::new(phi, theta, 0.0), true);
        }
        let phi = (2.0 * (w * x - y * z)).atan2(1.0 - 2.0 * (x * x + y * y));
        let theta = sin_theta.clamp(-1.0, 1.0).asin();
        let psi = (2.0 * (w * z - x * y)).atan2(1.0 - 2.0 * (y * y + z * z));
        (EulerAngles::new(phi, theta, psi), false)
    }

    /// True when both quaternions describe the same rotation.
    pub fn same_rotation(&self, other: &Self, tol: f64) -> bool {
        let d = (self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z).abs();
        1.0 - d <= tol
    }
}

impl Mul for Quaternion {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.hamilton(&rhs)
    }
}

/// Yaw/azimuth `phi`, pitch/elevation `theta` and roll `psi`, in radians.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EulerAngles {
    pub phi: f64,
    pub theta: f64,
    pub psi: f64,
}

impl EulerAngles {
    pub const fn new(phi: f64, theta: f64, psi: f64) -> Self {
        Self { phi, theta, psi }
    }

    /// A direction: azimuth and elevation with no roll.
    pub const fn direction(phi: f64, theta: f64) -> Self {
        Self::new(phi, theta, 0.0)
    }

    pub fn from_degrees(phi: f64, theta: f64, psi: f64) -> Self {
        Self::new(phi.to_radians(), theta.to_radians(), psi.to_radians())
    }

    /// Sine-space coordinates of the direction; roll is discarded.
    pub fn to_uv(&self) -> Result<UvPoint> {
        if self.phi.abs() > FRAC_PI_2 {
            return Err(Error::BehindArray {
                phi_deg: self.phi.to_degrees(),
            });
        }
        Ok(UvPoint {
            u: self.theta.cos() * self.phi.sin(),
            v: self.theta.sin(),
        })
    }
}

/// Direction in sine-space.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct UvPoint {
    pub u: f64,
    pub v: f64,
}

impl UvPoint {
    pub const ORIGIN: Self = Self { u: 0.0, v: 0.0 };

    /// Validated constructor.
    pub fn new(u: f64, v: f64) -> Result<Self> {
        let p = Self { u, v };
        if p.is_valid() {
            Ok(p)
        } else {
            Err(Error::InvalidUv { u, v })
        }
    }

    /// Unvalidated constructor, e.g. for grid cells that may lie outside the
    /// visible disc.
    pub const fn raw(u: f64, v: f64) -> Self {
        Self { u, v }
    }

    pub fn is_valid(&self) -> bool {
        self.u.is_finite() && self.v.is_finite() && self.radius_sq() <= 1.0
    }

    pub fn radius_sq(&self) -> f64 {
        self.u * self.u + self.v * self.v
    }

    pub fn distance(&self, o: &Self) -> f64 {
        (self.u - o.u).hypot(self.v - o.v)
    }

    /// Azimuth and elevation of the direction.
    pub fn to_euler(&self) -> Result<EulerAngles> {
        let r2 = self.radius_sq();
        if !(r2 <= 1.0) {
            return Err(Error::InvalidUv {
                u: self.u,
                v: self.v,
            });
        }
        let w = (1.0 - r2).max(0.0).sqrt();
        Ok(EulerAngles::direction(
            self.u.atan2(w),
            self.v.clamp(-1.0, 1.0).asin(),
        ))
    }

    /// Unit body-frame vector of this direction.
    pub fn to_vector(&self) -> Result<Vec3> {
        let r2 = self.radius_sq();
        if !(r2 <= 1.0) {
            return Err(Error::InvalidUv {
                u: self.u,
                v: self.v,
            });
        }
        Ok(Vec3::new(self.v, -self.u, (1.0 - r2).max(0.0).sqrt()))
    }

    /// Projects a body-frame vector onto sine-space; fails behind the array.
    pub fn from_vector(d: Vec3) -> Result<Self> {
        let d = d.normalized();
        if d.z < 0.0 {
            return Err(Error::BehindArray {
                phi_deg: (-d.y).atan2(d.z).to_degrees(),
            });
        }
        Ok(Self { u: -d.y, v: d.x })
    }

    pub fn lerp(&self, o: &Self, t: f64) -> Self {
        Self::raw(self.u + (o.u - self.u) * t, self.v + (o.v - self.v) * t)
    }
}

/// Orientation quaternion of a direction (zero roll).
pub fn direction_quaternion(p: UvPoint) -> Result<Quaternion> {
    Ok(Quaternion::from_euler(p.to_euler()?))
}

/// Rotation the access point appears to perform, in the headset frame, while
/// the headset turns from `q1` to `q2`: the inverse `q1 q2*` of the head
/// rotation `q2 q1*`.
///
/// Both orientations are expressed in the frame the access-point direction is
/// given in (the headset frame at `q1`), so turning the frame by `q2 q1*` is
/// the same as turning the access point by the returned rotation.
pub fn apparent_ap_rotation(q1: &Quaternion, q2: &Quaternion) -> Quaternion {
    q1.hamilton(&q2.conjugate())
}

/// Ordered sine-space samples of the apparent access-point path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    points: Vec<UvPoint>,
}

impl Trajectory {
    /// Fails on an empty list or any point outside the unit disc.
    pub fn new(points: Vec<UvPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Config("trajectory needs at least one point".into()));
        }
        if let Some(index) = points.iter().position(|p| !p.is_valid()) {
            return Err(Error::TrajectoryOutsideHemisphere { index });
        }
        Ok(Self { points })
    }

    /// Evenly spaced straight segment in UV-space (`n >= 2`).
    pub fn line(from: UvPoint, to: UvPoint, n: usize) -> Result<Self> {
        let n = n.max(2);
        Self::new(
            (0..n)
                .map(|k| from.lerp(&to, k as f64 / (n - 1) as f64))
                .collect(),
        )
    }

    pub fn points(&self) -> &[UvPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first(&self) -> UvPoint {
        self.points[0]
    }

    pub fn last(&self) -> UvPoint {
        self.points[self.points.len() - 1]
    }

    /// Sum of UV distances between consecutive samples.
    pub fn length(&self) -> f64 {
        self.points.windows(2).map(|w| w[0].distance(&w[1])).sum()
    }

    /// Cumulative arc length at every sample, starting at 0.
    pub fn arc_lengths(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(self.points.len());
        out.push(0.0);
        for w in self.points.windows(2) {
            acc += w[0].distance(&w[1]);
            out.push(acc);
        }
        out
    }

    /// Largest distance between consecutive samples.
    pub fn max_spacing(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| w[0].distance(&w[1]))
            .fold(0.0, f64::max)
    }

    /// Point-mirrored copy, `(u, v) -> (-u, -v)`.
    pub fn mirrored(&self) -> Self {
        Self {
            points: self.points.iter().map(|p| UvPoint::raw(-p.u, -p.v)).collect(),
        }
    }
}

/// Samples the access-point path for a head rotation from `q1` to `q2`.
///
/// Sample `k` applies `(q1 q2*)^(k/(n-1))` to the orientation of `ap_dir`
/// and converts the result back through Euler angles to UV. The apparent
/// rotation is taken with `w >= 0`, i.e. the shorter way round.
pub fn sample_trajectory(
    q1: &Quaternion,
    q2: &Quaternion,
    ap_dir: UvPoint,
    n: usize,
) -> Result<Trajectory> {
    if n < 2 {
        return Err(Error::Config(format!(
            "trajectory needs at least 2 samples, got {n}"
        )));
    }
    let rotation = apparent_ap_rotation(q1, q2).canonical();
    let ap = direction_quaternion(ap_dir)?;
    let mut points = Vec::with_capacity(n);
    for k in 0..n {
        let a = k as f64 / (n - 1) as f64;
        let orientation = rotation.powf(a).hamilton(&ap);
        let p = orientation
            .to_euler()
            .to_uv()
            .map_err(|_| Error::TrajectoryOutsideHemisphere { index: k })?;
        points.push(if k == 0 { ap_dir } else { p });
    }
    Trajectory::new(points)
}

/// Sum of distances between consecutive trajectory points.
pub fn trajectory_length(t: &Trajectory) -> f64 {
    t.length()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    /// Row-major rotation matrix built from the axis-angle form (Rodrigues).
    fn rodrigues(axis: Vec3, angle: f64) -> [[f64; 3]; 3] {
        let k = axis.normalized();
        let (s, c) = angle.sin_cos();
        let t = 1.0 - c;
        [
            [c + k.x * k.x * t, k.x * k.y * t - k.z * s, k.x * k.z * t + k.y * s],
            [k.y * k.x * t + k.z * s, c + k.y * k.y * t, k.y * k.z * t - k.x * s],
            [k.z * k.x * t - k.y * s, k.z * k.y * t + k.x * s, c + k.z * k.z * t],
        ]
    }

    fn matmul(a: [[f64; 3]; 3], b: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
            }
        }
        m
    }

    fn transpose(a: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = a[j][i];
            }
        }
        m
    }

    fn apply(m: [[f64; 3]; 3], v: Vec3) -> Vec3 {
        Vec3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }

    fn vclose(a: Vec3, b: Vec3, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn identity_is_neutral() {
        let q = Quaternion::from_axis_angle(Vec3::new(1.0, 2.0, 3.0), 0.7);
        assert!(Quaternion::IDENTITY.hamilton(&q).same_rotation(&q, 1e-15));
        assert!(q.hamilton(&Quaternion::IDENTITY).same_rotation(&q, 1e-15));
    }

    #[test]
    fn quarter_turns_about_z_compose() {
        let z = Vec3::new(0.0, 0.0, 1.0);
        let q = Quaternion::from_axis_angle(z, PI / 2.0);
        let half = q * q;
        assert!(half.same_rotation(&Quaternion::from_axis_angle(z, PI), 1e-12));
        assert!(close(half.angle(), PI, 1e-12));
    }

    #[test]
    fn hamilton_matches_matrix_composition() {
        let (a1, t1) = (Vec3::new(0.3, -1.0, 0.4), 1.1);
        let (a2, t2) = (Vec3::new(-0.2, 0.5, 1.0), -0.6);
        let q = Quaternion::from_axis_angle(a1, t1) * Quaternion::from_axis_angle(a2, t2);
        let m = matmul(rodrigues(a1, t1), rodrigues(a2, t2));
        for v in [
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
        ] {
            assert!(vclose(q.rotate(v), apply(m, v), 1e-12));
        }
        // the pair does not commute
        let r = Quaternion::from_axis_angle(a2, t2) * Quaternion::from_axis_angle(a1, t1);
        assert!(!q.same_rotation(&r, 1e-6));
    }

    #[test]
    fn power_scales_angle() {
        let yaw = Quaternion::from_axis_angle(Vec3::new(1.0, 0.0, 0.0), PI / 2.0);
        assert_eq!(yaw.powf(0.0), Quaternion::IDENTITY);
        let half = yaw.powf(0.5);
        assert!(half.same_rotation(
            &Quaternion::from_axis_angle(Vec3::new(1.0, 0.0, 0.0), PI / 4.0),
            1e-12
        ));

        let axis = Vec3::new(1.0, 1.0, 1.0).normalized();
        let q = Quaternion::from_axis_angle(axis, 120f64.to_radians());
        let p = q.powf(0.25);
        assert!(close(p.angle(), 30f64.to_radians(), 1e-12));
        assert!(vclose(p.axis().unwrap(), axis, 1e-12));
    }

    #[test]
    fn power_of_identity_is_identity() {
        let tiny = Quaternion::from_axis_angle(Vec3::new(0.0, 1.0, 0.0), 1e-12);
        assert_eq!(tiny.powf(0.7), Quaternion::IDENTITY);
    }

    #[test]
    fn euler_anchors() {
        let e = Quaternion::IDENTITY.to_euler();
        assert_eq!((e.phi, e.theta, e.psi), (0.0, 0.0, 0.0));

        let h = 22.5f64.to_radians();
        let e = Quaternion::new(h.cos(), 0.0, h.sin(), 0.0).to_euler();
        assert!(close(e.phi, 0.0, 1e-12));
        assert!(close(e.theta, PI / 4.0, 1e-12));
        assert!(close(e.psi, 0.0, 1e-12));
    }

    #[test]
    fn gimbal_lock_is_flagged_and_preserves_rotation() {
        let e = EulerAngles::new(0.4, PI / 2.0, 0.3);
        let q = Quaternion::from_euler(e);
        let (back, locked) = q.to_euler_checked();
        assert!(locked);
        assert_eq!(back.psi, 0.0);
        assert!(Quaternion::from_euler(back).same_rotation(&q, 1e-12));

        let q = Quaternion::from_euler(EulerAngles::new(-0.2, -PI / 2.0, 0.9));
        let (back, locked) = q.to_euler_checked();
        assert!(locked);
        assert!(Quaternion::from_euler(back).same_rotation(&q, 1e-12));
    }

    #[test]
    fn euler_to_uv_anchors() {
        let p = EulerAngles::direction(0.0, 0.0).to_uv().unwrap();
        assert_eq!((p.u, p.v), (0.0, 0.0));
        let p = EulerAngles::from_degrees(30.0, 0.0, 0.0).to_uv().unwrap();
        assert!(close(p.u, 0.5, 1e-15) && p.v == 0.0);
        let p = EulerAngles::from_degrees(85.0, 50.0, 0.0).to_uv().unwrap();
        assert!(close(p.u, 0.6404, 1e-4) && close(p.v, 0.7660, 1e-4));
    }

    #[test]
    fn behind_array_rejected() {
        assert!(matches!(
            EulerAngles::from_degrees(100.0, 0.0, 0.0).to_uv(),
            Err(Error::BehindArray { .. })
        ));
    }

    #[test]
    fn uv_to_euler_anchors() {
        let e = UvPoint::ORIGIN.to_euler().unwrap();
        assert_eq!((e.phi, e.theta), (0.0, 0.0));
        let e = UvPoint::raw(0.5, 0.5).to_euler().unwrap();
        assert!(close(e.phi.to_degrees(), 35.264, 1e-3));
        assert!(close(e.theta.to_degrees(), 30.0, 1e-12));
        assert!(matches!(
            UvPoint::raw(0.8, 0.7).to_euler(),
            Err(Error::InvalidUv { .. })
        ));
        assert!(UvPoint::new(0.8, 0.7).is_err());
    }

    #[test]
    fn vector_and_euler_routes_agree() {
        let p = UvPoint::raw(0.31, -0.52);
        let via_quat = direction_quaternion(p)
            .unwrap()
            .rotate(Vec3::new(0.0, 0.0, 1.0));
        assert!(vclose(via_quat, p.to_vector().unwrap(), 1e-12));
        let back = UvPoint::from_vector(via_quat).unwrap();
        assert!(p.distance(&back) < 1e-12);
    }

    #[test]
    fn apparent_rotation_reductions() {
        let r = Quaternion::from_axis_angle(Vec3::new(0.2, 0.9, -0.3), 0.5);
        assert!(apparent_ap_rotation(&r, &r).same_rotation(&Quaternion::IDENTITY, 1e-15));
        assert!(apparent_ap_rotation(&Quaternion::IDENTITY, &r).same_rotation(&r.conjugate(), 1e-15));
    }

    #[test]
    fn apparent_rotation_is_frame_change() {
        // Turning the headset frame by the head rotation q2 q1* leaves the
        // access point at coordinates (q2 q1*)^T a in the new frame.
        let (a1, t1) = (Vec3::new(0.1, 0.3, 1.0), 0.4);
        let (a2, t2) = (Vec3::new(-0.7, 0.2, 0.5), -0.9);
        let q1 = Quaternion::from_axis_angle(a1, t1);
        let q2 = Quaternion::from_axis_angle(a2, t2);
        let head = matmul(rodrigues(a2, t2), transpose(rodrigues(a1, t1)));
        let ap = UvPoint::raw(0.2, 0.1).to_vector().unwrap();
        let expected = apply(transpose(head), ap);
        assert!(vclose(apparent_ap_rotation(&q1, &q2).rotate(ap), expected, 1e-12));
    }

    #[test]
    fn static_head_gives_constant_path() {
        let q = Quaternion::from_axis_angle(Vec3::new(0.0, 1.0, 0.3), 0.4);
        let ap = UvPoint::raw(0.1, -0.2);
        let t = sample_trajectory(&q, &q, ap, 16).unwrap();
        assert_eq!(t.len(), 16);
        for p in t.points() {
            assert!(p.distance(&ap) < 1e-12);
        }
        assert!(t.length() < 1e-10);
    }

    #[test]
    fn endpoints_match_direct_rotation() {
        let q1 = Quaternion::from_euler(EulerAngles::from_degrees(5.0, -3.0, 2.0));
        let q2 = Quaternion::from_euler(EulerAngles::from_degrees(-12.0, 6.0, 10.0));
        let ap = UvPoint::raw(0.05, 0.1);
        let t = sample_trajectory(&q1, &q2, ap, 32).unwrap();
        assert!(t.first().distance(&ap) < 1e-9);
        let end = apparent_ap_rotation(&q1, &q2)
            .canonical()
            .rotate(ap.to_vector().unwrap());
        assert!(t.last().distance(&UvPoint::from_vector(end).unwrap()) < 1e-9);
    }

    #[test]
    fn slerp_path_is_a_great_circle() {
        let a = EulerAngles::from_degrees(10.0, 10.0, 0.0).to_uv().unwrap();
        let b = EulerAngles::from_degrees(85.0, 50.0, 0.0).to_uv().unwrap();
        let (va, vb) = (a.to_vector().unwrap(), b.to_vector().unwrap());
        let r = Quaternion::rotation_between(va, vb);
        let t = sample_trajectory(&Quaternion::IDENTITY, &r.conjugate(), a, 200).unwrap();
        assert!(t.last().distance(&b) < 1e-9);
        let normal = va.cross(vb).normalized();
        let mut prev = 0.0;
        for p in t.points() {
            let d = p.to_vector().unwrap();
            assert!(d.dot(normal).abs() < 1e-6);
            let ang = va.angle_to(d);
            assert!(ang >= prev - 1e-12);
            prev = ang;
        }
    }

    #[test]
    fn leaving_hemisphere_is_reported() {
        let ap = UvPoint::raw(0.0, 0.9);
        let far = Quaternion::from_axis_angle(Vec3::new(0.0, 1.0, 0.0), -1.2);
        let err = sample_trajectory(&Quaternion::IDENTITY, &far, ap, 50).unwrap_err();
        assert!(matches!(err, Error::TrajectoryOutsideHemisphere { index } if index > 0));
    }

    #[test]
    fn lengths() {
        let one = Trajectory::new(vec![UvPoint::ORIGIN]).unwrap();
        assert_eq!(trajectory_length(&one), 0.0);
        let two = Trajectory::new(vec![UvPoint::ORIGIN, UvPoint::raw(0.3, 0.0)]).unwrap();
        assert!(close(trajectory_length(&two), 0.3, 1e-15));
        let arc = Trajectory::new(
            (0..=2000)
                .map(|k| {
                    let a = FRAC_PI_2 * k as f64 / 2000.0;
                    UvPoint::raw(0.4 * a.cos(), 0.4 * a.sin())
                })
                .collect(),
        )
        .unwrap();
        assert!(close(arc.length(), PI * 0.4 / 2.0, 1e-3));
    }
}
