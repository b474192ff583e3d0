use mtc_core::construction::build_lattice;
use mtc_core::experiment::{family_for, ExperimentConfig};
use mtc_core::geometry::{box_u, CurveParams, PointFamily};
use mtc_core::incidence::{
    adversarial_directions, bad_set, box_projection_overlap, max_plane_incidence_mode, plane_incidence,
    plane_through, projected_distinctness, random_directions, run_suite, slab_profile, ClassifyConfig,
    Direction, SuiteConfig,
};
use mtc_core::numeric::{dd, Dd};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;

fn exact(x: Dd) -> BigRational {
    BigRational::from_float(x.hi()).unwrap() + BigRational::from_float(x.lo()).unwrap()
}

fn exact_vec(v: &[Dd]) -> Vec<BigRational> {
    v.iter().map(|x| exact(*x)).collect()
}

fn family(d: usize, n: usize) -> PointFamily {
    family_for(&ExperimentConfig { d, ..Default::default() }, 8.0, n).unwrap()
}

/// Balls of radius rad around `pts` met by the line through pts[i] and pts[j].
fn oracle_line_count(pts: &[Vec<BigRational>], i: usize, j: usize, rad: &BigRational) -> usize {
    let (a, b) = (&pts[i], &pts[j]);
    let v = [&b[0] - &a[0], &b[1] - &a[1]];
    let vv = &v[0] * &v[0] + &v[1] * &v[1];
    pts.iter()
        .filter(|p| {
            let cross = &v[0] * (&p[1] - &a[1]) - &v[1] * (&p[0] - &a[0]);
            &cross * &cross <= rad * rad * &vv
        })
        .count()
}

#[test]
fn line_incidence_matches_exact_double_loop() {
    let fam = family(2, 6);
    let lat = build_lattice(&fam, 3).unwrap();
    let centers: Vec<Vec<Dd>> = lat.positions().map(|p| p.to_vec()).collect();
    assert_eq!(centers.len(), 20);
    let exact_pts: Vec<Vec<BigRational>> = centers.iter().map(|p| exact_vec(p)).collect();
    let rad = BigRational::from_float(1.0 / fam.r).unwrap();
    let mut oracle_max = 0;
    for i in 0..centers.len() {
        for j in i + 1..centers.len() {
            let want = oracle_line_count(&exact_pts, i, j, &rad);
            let plane = plane_through(&[&centers[i], &centers[j]]).unwrap();
            assert_eq!(plane_incidence(&centers, 1.0 / fam.r, &plane), want, "line ({i}, {j})");
            oracle_max = oracle_max.max(want);
        }
    }
    let ps = max_plane_incidence_mode(&centers, 1.0 / fam.r, 1, 0, true).unwrap();
    assert!(ps.exhaustive);
    assert_eq!(ps.candidates, 190);
    assert_eq!(ps.max, oracle_max);
    assert!(oracle_max <= 2);
}

#[test]
fn slab_profile_matches_exact_counts() {
    let fam = family(2, 6);
    let lat = build_lattice(&fam, 3).unwrap();
    let r = BigRational::from_float(fam.r).unwrap();
    let two = BigRational::from_integer(BigInt::from(2));
    for nu in random_directions(2, 50, 3) {
        let nu_x = exact_vec(nu.as_dd());
        let s: Vec<BigRational> = lat
            .positions()
            .map(|q| exact_vec(q).iter().zip(&nu_x).fold(BigRational::zero(), |a, (x, y)| a + x * y) * &r)
            .collect();
        let want =
            s.iter().map(|si| s.iter().filter(|sj| *sj >= si && (*sj - si) <= two).count()).max().unwrap();
        assert_eq!(slab_profile(&lat, &nu, fam.r).max().0, want);
        assert!(want <= 2);
    }
}

#[test]
fn bad_sets_stay_below_dimension() {
    for d in [2, 3] {
        let fam = family(d, 12);
        let suite = SuiteConfig { dirs: 10_000, resolution_dirs: 0, ..Default::default() };
        let rep = run_suite(&fam, &suite).unwrap();
        assert!(rep.directions >= 10_000);
        assert!(rep.max_bad_set < d, "d = {d}: {}", rep.max_bad_set);
        assert_eq!(rep.violations, 0);
        assert_eq!(rep.tie_retest_failures, 0);
    }
}

/// The class rule alone misses some box overlaps; each one is at a box whose
/// projection nearly straddles zero, and the overlap index joins S.
#[test]
fn missed_overlaps_sit_at_near_cancellation() {
    for d in [2, 3] {
        let fam = family(d, 12);
        let mut dirs = random_directions(d, 10_000, 7);
        dirs.extend(adversarial_directions(&fam));
        let mut missed = 0;
        for nu in &dirs {
            let b = bad_set(&fam, nu, &ClassifyConfig::default());
            assert!(b.len() < d);
            for &n in b.box_overlaps.difference(&b.class_collisions) {
                missed += 1;
                assert!(b.indices.contains(&n));
                let (lo, hi) = box_u(fam.curve_index(n), &fam.params).project(nu.as_dd());
                let centre = ((lo + hi) / dd(2.0)).hi().abs();
                let radius = ((hi - lo) / dd(2.0)).hi();
                assert!(centre < 2.0 * radius, "d = {d}, n = {n}: centre {centre:e}, radius {radius:e}");
            }
        }
        assert!(missed > 0);
    }
}

#[test]
fn collapsed_lacunarity_fails_the_suite() {
    let cfg = ExperimentConfig { c_candidates: vec![4.0], ..Default::default() };
    let fam = family_for(&cfg, 4.0, 12).unwrap();
    let rep = run_suite(&fam, &SuiteConfig { dirs: 2000, resolution_dirs: 0, ..Default::default() }).unwrap();
    assert!(!rep.passed);
    assert!(rep.violations > 0);
}

fn unit(theta: f64) -> Direction {
    Direction::new(&[theta.cos(), theta.sin()]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bad_set_ignores_orientation(theta in 0.0f64..std::f64::consts::TAU) {
        let fam = family(2, 8);
        let nu = unit(theta);
        let cfg = ClassifyConfig::default();
        prop_assert_eq!(bad_set(&fam, &nu, &cfg), bad_set(&fam, &nu.neg(), &cfg));
    }

    #[test]
    fn box_overlap_is_symmetric(theta in 0.0f64..std::f64::consts::TAU, n in 0usize..8, k in 0usize..8) {
        prop_assume!(n != k);
        let params = CurveParams::new(2, 8.0, 2.0, 8).unwrap();
        let nu = unit(theta);
        prop_assert_eq!(
            box_projection_overlap(n, k, &nu, &params).unwrap(),
            box_projection_overlap(k, n, &nu, &params).unwrap()
        );
    }

    #[test]
    fn sums_agreeing_on_the_bad_set_are_distinct(theta in 0.0f64..std::f64::consts::TAU) {
        let fam = family(2, 8);
        let lat = build_lattice(&fam, 4).unwrap();
        let nu = unit(theta);
        let bad = bad_set(&fam, &nu, &ClassifyConfig::default());
        prop_assert!(bad.len() <= 1);
        let dist = projected_distinctness(&lat, &nu, &bad, fam.r).unwrap();
        prop_assert_eq!(dist.violations, 0);
    }
}
