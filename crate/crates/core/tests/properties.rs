use covrage_core::array::{gain_uv, steering_weights};
use covrage_core::geometry::{EulerAngles, Quaternion, Trajectory, UvPoint, Vec3};
use covrage_core::link::{noise_penalty, path_loss, received_power, select_mcs};
use covrage_core::planner::{plan_trajectory, PlanOptions};
use covrage_core::{ArrayConfig, Awv, Complex64, LinkParams, McsTable, SteeringDirection};
use proptest::prelude::*;

fn uv(max_radius: f64) -> impl Strategy<Value = UvPoint> {
    (0.0..1.0f64, 0.0..std::f64::consts::TAU).prop_map(move |(r, a)| {
        let r = max_radius * r.sqrt();
        UvPoint::raw(r * a.cos(), r * a.sin())
    })
}

fn phases(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.2..3.2f64, n)
}

proptest! {
    #[test]
    fn euler_round_trip(phi in -3.1..3.1f64, theta in -1.5..1.5f64, psi in -3.1..3.1f64) {
        let e = EulerAngles::new(phi, theta, psi);
        let back = Quaternion::from_euler(e).to_euler();
        prop_assert!((back.phi - phi).abs() < 1e-9);
        prop_assert!((back.theta - theta).abs() < 1e-9);
        prop_assert!((back.psi - psi).abs() < 1e-9);
    }

    #[test]
    fn uv_round_trip(p in uv(0.999)) {
        let q = p.to_euler().unwrap().to_uv().unwrap();
        prop_assert!(p.distance(&q) < 1e-9);
        let r = UvPoint::from_vector(p.to_vector().unwrap()).unwrap();
        prop_assert!(p.distance(&r) < 1e-12);
    }

    #[test]
    fn rotation_preserves_length(
        ax in -1.0..1.0f64, ay in -1.0..1.0f64, az in 0.1..1.0f64,
        angle in -3.0..3.0f64,
        x in -2.0..2.0f64, y in -2.0..2.0f64, z in -2.0..2.0f64,
    ) {
        let q = Quaternion::from_axis_angle(Vec3::new(ax, ay, az), angle);
        let v = Vec3::new(x, y, z);
        prop_assert!((q.rotate(v).norm() - v.norm()).abs() < 1e-12);
        prop_assert!(q.hamilton(&q.conjugate()).same_rotation(&Quaternion::IDENTITY, 1e-12));
    }

    #[test]
    fn coherent_gain(nx in 1usize..24, ny in 1usize..24, d in 0.1..1.0f64, p in uv(0.95)) {
        let awv = steering_weights(nx, ny, d, SteeringDirection::from_uv(p).unwrap());
        let expected = 20.0 * ((nx * ny) as f64).log10();
        prop_assert!((gain_uv(&awv, p, d) - expected).abs() < 1e-6);
    }

    #[test]
    fn gain_ignores_global_phase(ph in phases(16), alpha in -3.2..3.2f64, p in uv(1.0)) {
        let awv = Awv::from_phases(4, 4, &ph);
        let turned = awv.rotated(Complex64::from_polar(1.0, alpha));
        prop_assert!((gain_uv(&awv, p, 0.5) - gain_uv(&turned, p, 0.5)).abs() < 1e-9);
        prop_assert!(gain_uv(&awv, p, 0.5) >= -40.0);
    }

    #[test]
    fn penalty_is_non_negative_and_phase_free(ph in phases(16), alpha in -3.2..3.2f64, p in uv(0.9)) {
        let awv = Awv::from_phases(4, 4, &ph);
        let aoa = SteeringDirection::from_uv(p).unwrap();
        let a = noise_penalty(&awv, aoa, 0.5, 64);
        let b = noise_penalty(&awv.rotated(Complex64::from_polar(1.0, alpha)), aoa, 0.5, 64);
        prop_assert!(a >= 0.0);
        prop_assert!((a - b).abs() < 1e-6);
    }

    #[test]
    fn mcs_selection_is_monotonic(a in -90.0..-40.0f64, b in -90.0..-40.0f64) {
        let table = McsTable::default();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (s, t) = (select_mcs(lo, &table), select_mcs(hi, &table));
        prop_assert!(s.rate_mbps <= t.rate_mbps);
        prop_assert!(s.is_link_lost() || s.sensitivity_dbm <= lo);
    }

    #[test]
    fn link_budget_monotonic(g1 in -40.0..61.0f64, g2 in -40.0..61.0f64, d in 0.5..20.0f64) {
        let params = LinkParams { distance_m: d, ..LinkParams::default() };
        let (lo, hi) = if g1 <= g2 { (g1, g2) } else { (g2, g1) };
        prop_assert!(received_power(&params, lo).unwrap() <= received_power(&params, hi).unwrap());
        let step = path_loss(2.0 * d, &params).unwrap() - path_loss(d, &params).unwrap();
        prop_assert!((step - 20.0 * 2f64.log10()).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn every_sample_is_covered(start in uv(0.4), heading in 0.0..std::f64::consts::TAU, length in 0.02..0.3f64) {
        let end = UvPoint::raw(start.u + length * heading.cos(), start.v + length * heading.sin());
        let t = Trajectory::line(start, end, 96).unwrap();
        let (_, plan) = plan_trajectory(&t, &ArrayConfig::default(), &PlanOptions::default()).unwrap();
        for p in t.points() {
            prop_assert!(plan.nearest_center_distance(p) <= plan.half_width() + 1e-12);
        }
    }

    #[test]
    fn single_beam_plan_matches_full_array(p in uv(0.8)) {
        let t = Trajectory::new(vec![p, p]).unwrap();
        let cfg = ArrayConfig::default();
        let (awv, plan) = plan_trajectory(&t, &cfg, &PlanOptions::default()).unwrap();
        prop_assert_eq!(plan.subbeam_count(), 1);
        let full = 20.0 * (cfg.element_count() as f64).log10();
        prop_assert!((gain_uv(&awv, p, cfg.spacing_wavelengths) - full).abs() < 1e-6);
    }
}
