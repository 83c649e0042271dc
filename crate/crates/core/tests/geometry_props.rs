use std::f64::consts::{PI, TAU};

use proptest::prelude::*;

use rearrange_core::geometry::{wrap_angle, Disk, HalfPlane};
use rearrange_core::sensing::ray_angle;
use rearrange_core::{ConvexRegion, Mat2, RefPath, Vec2};

fn vec2(lo: f64, hi: f64) -> impl Strategy<Value = Vec2> {
    (lo..hi, lo..hi).prop_map(|(x, y)| Vec2::new(x, y))
}

/// Non-empty bounded region: a disk and up to six halfplanes all keeping a
/// common interior point `c` at least 0.05 inside.
fn region() -> impl Strategy<Value = (ConvexRegion, Vec2)> {
    (
        vec2(-2.0, 2.0),
        0.2..2.0f64,
        0.0..1.0f64,
        0.0..TAU,
        prop::collection::vec((0.0..TAU, 0.05..1.5f64), 0..6),
    )
        .prop_map(|(c, radius, off, phi, hps)| {
            let center = c + Vec2::from_angle(phi) * (off * (radius - 0.05));
            let halfplanes = hps
                .into_iter()
                .map(|(a, s)| {
                    let n = Vec2::from_angle(a);
                    HalfPlane::new(n, c - n * s).unwrap()
                })
                .collect();
            (ConvexRegion::new(halfplanes, Some(Disk::new(center, radius))), c)
        })
}

proptest! {
    #[test]
    fn projection_is_feasible_and_idempotent((region, _) in region(), q in vec2(-5.0, 5.0)) {
        let p = region.project(q).unwrap();
        prop_assert!(region.contains(p, 1e-9));
        let pp = region.project(p).unwrap();
        prop_assert!(pp.distance(p) < 1e-9);
        if region.contains(q, 0.0) {
            prop_assert!(p.distance(q) < 1e-12);
        }
    }

    #[test]
    fn projection_is_nonexpansive((region, _) in region(), a in vec2(-5.0, 5.0), b in vec2(-5.0, 5.0)) {
        let pa = region.project(a).unwrap();
        let pb = region.project(b).unwrap();
        prop_assert!(pa.distance(pb) <= a.distance(b) + 1e-9);
    }

    /// Variational characterisation: `(q − p) · (z − p) ≤ 0` for all `z` in
    /// the region, checked on the interior point and a ring of samples.
    #[test]
    fn projection_satisfies_obtuse_angle_condition((region, c) in region(), q in vec2(-5.0, 5.0)) {
        let p = region.project(q).unwrap();
        let mut zs = vec![c];
        for i in 0..32 {
            for s in [0.02, 0.1, 0.5, 1.0, 2.0] {
                let z = c + Vec2::from_angle(i as f64 * TAU / 32.0) * s;
                if region.contains(z, 0.0) {
                    zs.push(z);
                }
            }
        }
        for z in zs {
            prop_assert!((q - p).dot(z - p) <= 1e-9 * (1.0 + q.distance(p)));
        }
    }

    #[test]
    fn exact_projection_agrees_with_dykstra((region, _) in region(), q in vec2(-5.0, 5.0)) {
        let p = region.project(q).unwrap();
        let d = region.project_dykstra(q, 1e-12, 100_000).unwrap();
        prop_assert!(p.distance(d) < 1e-5, "{p:?} vs {d:?}");
    }

    #[test]
    fn line_slice_endpoints_lie_in_region((region, c) in region(), phi in 0.0..TAU) {
        let dir = Vec2::from_angle(phi);
        let (lo, hi) = region.line_slice(c, dir).unwrap();
        prop_assert!(lo <= 0.0 && hi >= 0.0);
        prop_assert!(region.contains(c + dir * lo, 1e-9));
        prop_assert!(region.contains(c + dir * hi, 1e-9));
        prop_assert!(!region.contains(c + dir * (hi + 1e-6), 0.0));
    }

    #[test]
    fn wrap_angle_range_and_equivalence(a in -100.0..100.0f64) {
        let w = wrap_angle(a);
        prop_assert!(w > -PI && w <= PI);
        let k = ((a - w) / TAU).round();
        prop_assert!((a - w - k * TAU).abs() < 1e-9);
    }

    #[test]
    fn ray_bearings_refine_exactly(n in 8usize..2000, j in 0usize..2000) {
        let j = j % n;
        prop_assert_eq!(ray_angle(2 * j + 1, 2 * n).to_bits(), ray_angle(j, n).to_bits());
        prop_assert!(ray_angle(j, n) > -PI && ray_angle(j, n) <= PI + 1e-12);
    }

    #[test]
    fn polyline_is_arclength_parametrised(pts in prop::collection::vec(vec2(-10.0, 10.0), 2..6), a in 0.0..1.0f64, b in 0.0..1.0f64) {
        prop_assume!(pts.windows(2).all(|w| w[0].distance(w[1]) > 1e-3));
        let path = RefPath::polyline(&pts).unwrap();
        prop_assert_eq!(path.eval(0.0).unwrap(), pts[0]);
        prop_assert!(path.eval(1.0).unwrap().distance(*pts.last().unwrap()) < 1e-9);
        let gap = path.eval(a).unwrap().distance(path.eval(b).unwrap());
        prop_assert!(gap <= path.length() * (a - b).abs() + 1e-9);
        prop_assert!((path.tangent(a).unwrap().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ball_parameters_bracket_the_ball(pts in prop::collection::vec(vec2(-5.0, 5.0), 2..5), c in vec2(-5.0, 5.0), r in 0.1..4.0f64) {
        prop_assume!(pts.windows(2).all(|w| w[0].distance(w[1]) > 1e-3));
        let path = RefPath::polyline(&pts).unwrap();
        if let (Ok(lo), Ok(hi)) = (path.min_ball_param(c, r), path.max_ball_param(c, r)) {
            prop_assert!(lo <= hi);
            prop_assert!(path.eval(lo).unwrap().distance(c) <= r + 1e-9);
            prop_assert!(path.eval(hi).unwrap().distance(c) <= r + 1e-9);
            // Dense sampling oracle: nothing in the ball beyond `hi` or before `lo`.
            for i in 0..=400 {
                let t = i as f64 / 400.0;
                if path.eval(t).unwrap().distance(c) < r - 1e-6 {
                    prop_assert!(t >= lo - 1e-9 && t <= hi + 1e-9);
                }
            }
        }
    }

    #[test]
    fn mat2_solve_inverts(a in -3.0..3.0f64, b in -3.0..3.0f64, c in -3.0..3.0f64, d in -3.0..3.0f64, u in vec2(-5.0, 5.0)) {
        let m = Mat2::new(a, b, c, d);
        prop_assume!(m.det().abs() > 1e-3);
        let w = m.solve(u, 1e-12).unwrap();
        prop_assert!(m.mul_vec(w).distance(u) < 1e-8 * (1.0 + u.norm()) / m.det().abs().min(1.0));
    }
}
