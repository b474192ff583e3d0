use mtc_core::geometry::{
    axis_scale, box_u, lift_points, moment_curve, phi_project, scale_for, CurveParams, Hypersurface,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * (1.0 + y.abs()))
}

/// 1 / c^k as an exact rational.
fn inv_pow(c: i64, k: u32) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(c).pow(k))
}

fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

#[test]
fn rescaled_moment_point() {
    let p = axis_scale(&moment_curve(1.0, 3), 2.0);
    assert_eq!(p, vec![0.5, 0.25, 0.125]);
    assert_eq!(p, moment_curve(0.5, 3));
}

#[test]
fn box_membership_sweep() {
    // exact rational membership of M_d(c^-k) in box_u(n), c = 8, b = 2, d = 3
    let params = CurveParams::new(3, 8.0, 2.0, 6).unwrap();
    for n in 0..=6usize {
        let bx = box_u(n, &params);
        for k in 0..=12u32 {
            let pt = moment_curve(8f64.powi(-(k as i32)), 3);
            let exact = (1..=3u32).all(|i| {
                let x = inv_pow(8, k * i);
                let centre = inv_pow(8, n as u32 * i);
                let half = BigRational::from_integer(BigInt::from(2).pow(i)) * inv_pow(8, (n as u32 + 1) * i);
                (x - centre).abs() <= half
            });
            assert_eq!(bx.contains(&pt), exact, "n = {n}, k = {k}");
            assert_eq!(exact, k as usize == n, "n = {n}, k = {k}");
        }
    }
}

#[test]
fn paraboloid_example_family() {
    let params = CurveParams::new(2, 4.0, 2.0, 6).unwrap();
    let r = scale_for(&params, 0);
    let fam = lift_points(&Hypersurface::paraboloid(2), &params, r, 0).unwrap();
    assert_eq!(fam.n(), 6);
    let inv_r = BigRational::new(BigInt::one(), BigInt::from(4).pow(13));
    let mut min_sq: Option<BigRational> = None;
    for (j, xi) in fam.xis.iter().enumerate() {
        let n = j as i32 + 1;
        assert_eq!(xi[0], 4f64.powi(-n));
        assert_eq!(xi[1], 4f64.powi(-2 * n));
        for other in std::iter::once(&fam.xi0).chain(&fam.xis[..j]) {
            let sq = xi
                .iter()
                .zip(other)
                .map(|(a, b)| {
                    let t = rational(*a) - rational(*b);
                    &t * &t
                })
                .fold(BigRational::zero(), |s, t| s + t);
            if min_sq.as_ref().is_none_or(|m| &sq < m) {
                min_sq = Some(sq);
            }
        }
    }
    let min_sq = min_sq.unwrap();
    // c^-N (1 - 1/c) lower bound, squared
    let lower = inv_pow(4, 6) * BigRational::new(BigInt::from(3), BigInt::from(4));
    assert!(min_sq >= &lower * &lower);
    assert!(min_sq > &inv_r * &inv_r);
    assert!(fam.is_separated());
}

proptest! {
    #[test]
    fn scaling_follows_the_curve(t in -2.0f64..2.0, c in 1.1f64..16.0, d in 2usize..6) {
        let lhs = axis_scale(&moment_curve(t, d), c);
        prop_assert!(close(&lhs, &moment_curve(t / c, d), 1e-13));
    }

    #[test]
    fn projection_drops_a_degree(t in prop_oneof![-3.0f64..-1e-3, 1e-3f64..3.0], d in 3usize..6) {
        let p = phi_project(&moment_curve(t, d)).unwrap();
        prop_assert!(close(&p, &moment_curve(t, d - 1), 1e-12));
    }

    #[test]
    fn projection_commutes_with_scaling(
        x0 in prop_oneof![-3.0f64..-1e-2, 1e-2f64..3.0],
        rest in prop::collection::vec(-3.0f64..3.0, 2..5),
        c in 1.1f64..16.0,
    ) {
        let mut p = vec![x0];
        p.extend(rest);
        let a = phi_project(&axis_scale(&p, c)).unwrap();
        let b = axis_scale(&phi_project(&p).unwrap(), c);
        prop_assert!(close(&a, &b, 1e-12));
    }

    #[test]
    fn boxes_map_to_the_next_box(n in 0usize..8, d in 2usize..5, c in 3.0f64..16.0) {
        let params = CurveParams::new(d, c, 2.0, 8).unwrap();
        let (a, b) = (box_u(n, &params), box_u(n + 1, &params));
        prop_assert!(close(&axis_scale(&a.center, c), &b.center, 1e-13));
        prop_assert!(close(&axis_scale(&a.halfwidths, c), &b.halfwidths, 1e-13));
    }

    #[test]
    fn lifted_families_are_separated(n in 1usize..10, c in prop::sample::select(vec![4.0, 8.0, 16.0]), d in 2usize..4) {
        let params = CurveParams::new(d, c, 2.0, n).unwrap();
        let r = scale_for(&params, 2);
        let fam = lift_points(&Hypersurface::paraboloid(d), &params, r, 2).unwrap();
        prop_assert_eq!(fam.n(), n);
        prop_assert!(fam.is_separated());
        prop_assert!(fam.min_separation().map_or(n == 1, |s| s * r > 1.0));
    }
}
