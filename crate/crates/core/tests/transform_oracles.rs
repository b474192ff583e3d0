use mtc_core::construction::{build_lattice, ExpSumWeight, Mollifier, SubsetSumLattice};
use mtc_core::experiment::{difference_directions, family_for, ExperimentConfig};
use mtc_core::incidence::{random_directions, Direction};
use mtc_core::numeric::{self, dd, Dd};
use mtc_core::transforms::{
    line_integral, line_integral_closed, max_admissible_step, mixed_norm_bound, projection_slice_check, Line,
};
use proptest::prelude::*;

/// M2(delta) = int m_1(x) m_1(x - delta) dx by a midpoint rule at 1/256.
fn m2(m: &Mollifier, d: usize, delta: f64) -> f64 {
    let t = m.slice_norm(d, 1.0);
    let reach = t.x_max();
    if delta.abs() >= 2.0 * reach {
        return 0.0;
    }
    let h = 1.0 / 256.0;
    let n = (2.0 * reach / h) as usize;
    (0..n)
        .map(|j| {
            let x = -reach + (j as f64 + 0.5) * h;
            t.eval_or(x.abs(), 0.0) * t.eval_or((x - delta).abs(), 0.0)
        })
        .sum::<f64>()
        * h
}

/// R sum_{q, q'} M2(R <nu, q - q'>).
fn pair_sum(lat: &SubsetSumLattice, nu: &Direction, r: f64, m: &Mollifier) -> f64 {
    let p: Vec<Dd> = lat.positions().map(|q| nu.dot(q)).collect();
    let mut s = 0.0;
    for a in &p {
        for b in &p {
            s += m2(m, lat.d, ((*a - *b) * dd(r)).hi());
        }
    }
    r * s
}

#[test]
fn mixed_norm_matches_pair_sum() {
    let m = Mollifier::default();
    let cfg = ExperimentConfig::default();
    for n in [2, 4, 6] {
        let fam = family_for(&cfg, 8.0, n).unwrap();
        let lat = build_lattice(&fam, n / 2).unwrap();
        let mut dirs = difference_directions(&fam);
        dirs.extend(random_directions(2, 4, 5));
        for nu in &dirs {
            let got = mixed_norm_bound(&lat, nu, fam.r, 1.0, &m).unwrap();
            let want = pair_sum(&lat, nu, fam.r, &m);
            assert!((got - want).abs() < 1e-4 * want, "N = {n}: {got} vs {want}");
        }
    }
}

#[test]
fn separated_projections_add_up() {
    let m = Mollifier::default();
    for d in [2, 3] {
        let gens: Vec<Vec<Dd>> = (0..5)
            .map(|j| {
                let mut g = vec![dd(0.0); d];
                g[0] = dd(j as f64);
                g
            })
            .collect();
        let lat = SubsetSumLattice::from_generators(gens, 1).unwrap();
        let r = 1000.0;
        let v = mixed_norm_bound(&lat, &Direction::axis(d, 0), r, 1.0, &m).unwrap();
        let single = r * m.single_mixed_norm(d, 1.0);
        let ratio = v / (lat.len() as f64 * single);
        assert!((ratio - 1.0).abs() < 0.1, "d = {d}: {ratio}");
    }
}

#[test]
fn mixed_norm_scales_like_r_q() {
    let m = Mollifier::default();
    let cfg = ExperimentConfig::default();
    let single = m.single_mixed_norm(2, 1.0);
    for n in [4, 6, 8] {
        let fam = family_for(&cfg, 8.0, n).unwrap();
        let lat = build_lattice(&fam, n / 2).unwrap();
        for nu in random_directions(2, 8, 9) {
            let v = mixed_norm_bound(&lat, &nu, fam.r, 1.0, &m).unwrap();
            let k = v / (fam.r * lat.len() as f64 * single);
            assert!((1.0 - 1e-9..=4.0).contains(&k), "N = {n}: {k}");
        }
    }
}

#[test]
fn two_point_slices_between_projections() {
    let m = Mollifier::default();
    let r = 64.0;
    let gens = vec![numeric::to_dd(&[0.25, 0.0]), numeric::to_dd(&[0.0, 0.5])];
    let lat = SubsetSumLattice::from_generators(gens, 1).unwrap();
    let nu = Direction::new(&[0.6, 0.8]).unwrap();
    let zs: Vec<Vec<f64>> = (0..5)
        .map(|i| {
            let t = 0.1 * i as f64;
            vec![0.8 * t * r * 0.1, -0.6 * t * r * 0.1]
        })
        .collect();
    let chk = projection_slice_check(&lat, &nu, r, &zs, &m).unwrap();
    assert!(chk.max_rel_error < 1e-2, "{}", chk.max_rel_error);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn closed_form_matches_trapezoid(theta in 0.0f64..std::f64::consts::PI, off in -3.0f64..3.0) {
        let m = Mollifier::default();
        let fam = family_for(&ExperimentConfig::default(), 8.0, 4).unwrap();
        let lat = build_lattice(&fam, 2).unwrap();
        let r = 32.0;
        let nu = Direction::new(&[theta.cos(), theta.sin()]).unwrap();
        let perp = [-theta.sin() * off, theta.cos() * off];
        let line = Line::through(nu, &numeric::to_dd(&perp));
        let w = ExpSumWeight::new(&lat, r, m);
        let trap = line_integral(&w, &line, 0.25 * max_admissible_step(&w)).unwrap();
        let closed = line_integral_closed(&lat, r, &m, &line).unwrap();
        let scale = r * m.hat_sq_line_integral() * (lat.len() as f64).powi(2);
        prop_assert!((trap - closed).abs() < 1e-5 * scale, "{} vs {}", trap, closed);
    }

    #[test]
    fn mixed_norm_is_orientation_free(theta in 0.0f64..std::f64::consts::TAU) {
        let m = Mollifier::default();
        let fam = family_for(&ExperimentConfig::default(), 8.0, 4).unwrap();
        let lat = build_lattice(&fam, 2).unwrap();
        let nu = Direction::new(&[theta.cos(), theta.sin()]).unwrap();
        let a = mixed_norm_bound(&lat, &nu, fam.r, 1.0, &m).unwrap();
        let b = mixed_norm_bound(&lat, &nu.neg(), fam.r, 1.0, &m).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a);
    }
}
