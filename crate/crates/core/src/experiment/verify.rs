//! Library-side checks behind `verify-all` and the acceptance run.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::report::{to_csv, to_json};
use super::sweep::{family_for, ratio_sweep, search_c};
use crate::construction::{build_lattice, shifted_membership, Mollifier, SubsetSumLattice};
use crate::error::{Error, Result};
use crate::estimates::{hy_suite, DrawKind};
use crate::geometry::PointFamily;
use crate::incidence::{max_plane_incidence_mode, run_suite, Direction, SuiteConfig};
use crate::numeric::{self, binomial, Dd};
use crate::transforms::{energy_delta, energy_quadrature, projection_slice_check};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Criterion {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
    /// Wall-clock limit, if the criterion has one.
    pub limit_seconds: Option<f64>,
}

impl Criterion {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {}: {} ({:.1} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.seconds
        )
    }
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> (Result<T>, f64) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed().as_secs_f64())
}

fn finish(id: u32, name: &str, limit: Option<f64>, res: Result<(bool, String)>, secs: f64) -> Criterion {
    let (ok, detail) = res.unwrap_or_else(|e| (false, format!("error: {e}")));
    let in_time = limit.is_none_or(|l| secs <= l);
    let detail =
        if in_time { detail } else { format!("{detail}; over the {} s limit", limit.unwrap_or(0.0)) };
    Criterion { id, name: name.into(), passed: ok && in_time, detail, seconds: secs, limit_seconds: limit }
}

/// Base configuration of the headline sweep.
pub fn headline_config() -> ExperimentConfig {
    ExperimentConfig::default()
}

/// Selected c for dimension d at N = 12 (search over the default candidates).
pub fn searched_c(d: usize, suite: &SuiteConfig) -> Result<f64> {
    let cfg = ExperimentConfig { d, ..headline_config() };
    Ok(search_c(&cfg, 12, suite)?.0)
}

/// Searched c for d = 2 and 3, as used by every criterion.
pub fn search_suite_c() -> Result<Vec<(usize, f64)>> {
    let suite = SuiteConfig { dirs: 4000, resolution_dirs: 0, ..headline_config().suite() };
    [2, 3].iter().map(|&d| Ok((d, searched_c(d, &suite)?))).collect()
}

/// 1. Bad sets at N = 12 for d = 2, 3 with the searched c.
pub fn incidence_suite(c: &[(usize, f64)], dirs: usize) -> Criterion {
    let (res, secs) = timed(|| {
        let mut parts = Vec::new();
        let mut ok = true;
        for &(d, cv) in c {
            let cfg = ExperimentConfig { d, ..headline_config() };
            let fam = family_for(&cfg, cv, 12)?;
            let suite = SuiteConfig { dirs, resolution_dirs: 0, ..cfg.suite() };
            let rep = run_suite(&fam, &suite)?;
            ok &= rep.violations == 0 && rep.max_bad_set < d;
            parts.push(format!(
                "d={d} c={cv}: {} dirs, max|S|={} (<= {}), violations={}",
                rep.directions,
                rep.max_bad_set,
                d - 1,
                rep.violations
            ));
        }
        Ok((ok, parts.join("; ")))
    });
    finish(1, "incidence lemma suite", Some(60.0), res, secs)
}

/// Lattice centres for N = 6, d = 2 at the matched scale.
pub fn plane_family(c: f64) -> Result<(PointFamily, SubsetSumLattice)> {
    let fam = family_for(&headline_config(), c, 6)?;
    let lat = build_lattice(&fam, 3)?;
    Ok((fam, lat))
}

/// 2. Exhaustive line incidence through pairs of the 20 centres.
pub fn plane_incidence(c: f64) -> Criterion {
    let (res, secs) = timed(|| {
        let (fam, lat) = plane_family(c)?;
        let centers: Vec<Vec<Dd>> = lat.positions().map(|p| p.to_vec()).collect();
        let ps = max_plane_incidence_mode(&centers, 1.0 / fam.r, 1, 0, true)?;
        Ok((
            ps.exhaustive && ps.max <= 2 && centers.len() == 20,
            format!(
                "{} centres, {} lines, max balls per line = {} (<= 2)",
                centers.len(),
                ps.candidates,
                ps.max
            ),
        ))
    });
    finish(2, "plane incidence", Some(5.0), res, secs)
}

/// 3. Separation of every family in the headline schedule, d = 2 and 3.
pub fn separation(c: &[(usize, f64)]) -> Criterion {
    let (res, secs) = timed(|| {
        let mut checked = 0;
        let mut bad = Vec::new();
        for &(d, cv) in c {
            let cfg = ExperimentConfig { d, ..headline_config() };
            for n in 1..=12 {
                let fam = family_for(&cfg, cv, n)?;
                checked += 1;
                if !fam.is_separated() {
                    bad.push(format!("d={d} N={n}"));
                }
            }
        }
        Ok((bad.is_empty(), format!("{checked} families, violations: {}", bad.len())))
    });
    finish(3, "separation", None, res, secs)
}

/// 4. Random-draw X-ray inequality suite and sharpness at p = infinity.
pub fn hy_inequality(draws: usize, seed: u64) -> Criterion {
    let (res, secs) = timed(|| {
        let ps = [1.0, 2.0, f64::INFINITY];
        let mut failures = 0;
        let mut min_margin = f64::INFINITY;
        let mut min_sharp = f64::INFINITY;
        for d in [2, 3] {
            for m in [16, 32, 64] {
                let s = hy_suite(d, m, &ps, draws, seed, DrawKind::Complex)?;
                failures += s.failures;
                min_margin = min_margin.min(s.min_margin);
                let sharp = hy_suite(d, m, &[f64::INFINITY], draws.min(20), seed + 1, DrawKind::Nonnegative)?;
                for r in &sharp.records {
                    min_sharp = min_sharp.min(r.lhs / r.rhs);
                }
            }
        }
        Ok((
            failures == 0 && min_sharp >= 1.0 - 1e-9,
            format!("{failures} failures, min margin {min_margin:.3e}, min sharpness ratio {min_sharp:.12}"),
        ))
    });
    finish(4, "X-ray inequality", Some(120.0), res, secs)
}

/// Small families for the projection-slice identity (|Q| = 20 and 10).
pub fn slice_lattice(d: usize) -> Result<(SubsetSumLattice, f64)> {
    let gens: Vec<Vec<Dd>> = match d {
        2 => (1..=6).map(|n| numeric::to_dd(&[2f64.powi(-n), 4f64.powi(-n)])).collect(),
        3 => (1..=5).map(|n| numeric::to_dd(&[2f64.powi(-n), 4f64.powi(-n), 8f64.powi(-n)])).collect(),
        _ => return Err(Error::InvalidParams("slice lattice for d = 2, 3".into())),
    };
    let n = gens.len();
    let r = if d == 2 { 2.0 * 4f64.powi(6) } else { 8f64.powi(5) };
    Ok((SubsetSumLattice::from_generators(gens, n / 2)?, r))
}

/// 5. Line integral against the lambda-quadrature of squared slice transforms.
pub fn projection_slice(samples: usize) -> Criterion {
    let (res, secs) = timed(|| {
        let m = Mollifier::default();
        let mut parts = Vec::new();
        let mut ok = true;
        for (d, tol) in [(2, 1e-2), (3, 5e-2)] {
            let (lat, r) = slice_lattice(d)?;
            let nu = if d == 2 { Direction::new(&[0.6, 0.8])? } else { Direction::new(&[0.48, 0.6, 0.64])? };
            let basis = nu.perp_basis();
            let zs: Vec<Vec<f64>> = (0..samples)
                .map(|i| {
                    let t = (i as f64 + 0.5) / samples as f64;
                    let mut z = vec![0.0; d];
                    for (j, e) in basis.iter().enumerate() {
                        let a = 1.5 * r * (2.0 * t - 1.0) * if j == 0 { 1.0 } else { (7.0 * t).sin() };
                        for k in 0..d {
                            z[k] += a * e[k].hi();
                        }
                    }
                    z
                })
                .collect();
            let chk = projection_slice_check(&lat, &nu, r, &zs, &m)?;
            ok &= chk.max_rel_error < tol;
            parts.push(format!("d={d} |Q|={} max rel err {:.2e} (< {tol:e})", lat.len(), chk.max_rel_error));
        }
        Ok((ok, parts.join("; ")))
    });
    finish(5, "projection-slice identity", None, res, secs)
}

/// 6. Delta model times the N = 1 calibration against the quadrature, N <= 8, d = 2.
pub fn energy_cross_check(c: f64) -> Criterion {
    let (res, secs) = timed(|| {
        let cfg = headline_config();
        let m = Mollifier::default();
        let fam1 = family_for(&cfg, c, 1)?;
        let caps1 = crate::construction::build_caps(&fam1, cfg.quad_order)?;
        let lat1 = build_lattice(&fam1, 0)?;
        let cal = energy_quadrature(&caps1, &lat1, &m, cfg.near_radius)?.normalized;
        let mut worst: f64 = 1.0;
        for n in 1..=8 {
            let fam = family_for(&cfg, c, n)?;
            let lat = build_lattice(&fam, n / 2)?;
            let caps = crate::construction::build_caps(&fam, cfg.quad_order)?;
            let delta = energy_delta(&fam, &lat)?.value * cal;
            let quad = energy_quadrature(&caps, &lat, &m, cfg.near_radius)?.normalized;
            let ratio = quad / delta;
            if (ratio.ln()).abs() > worst.ln().abs() {
                worst = ratio;
            }
        }
        Ok((worst > 0.5 && worst < 2.0, format!("worst quadrature/delta ratio {worst:.6} (within [1/2, 2])")))
    });
    finish(6, "energy cross-check", None, res, secs)
}

/// 7. |Q| = C(N, N/2), membership fraction 1/2, and sum m^2 = 6 at N = 2.
pub fn combinatorics(c: f64) -> Criterion {
    let (res, secs) = timed(|| {
        let mut ok = true;
        for n in 1..=16usize {
            let gens: Vec<Vec<Dd>> =
                (1..=n).map(|j| numeric::to_dd(&[3f64.powi(-(j as i32)), 9f64.powi(-(j as i32))])).collect();
            let lat = SubsetSumLattice::from_generators(gens, n / 2)?;
            ok &= lat.len() as u128 == binomial(n as u64, (n / 2) as u64);
            if n % 2 == 0 {
                for i in 0..n {
                    ok &= shifted_membership(&lat, i)?.1 == 0.5;
                }
            }
        }
        let fam = family_for(&headline_config(), c, 2)?;
        let lat = build_lattice(&fam, 1)?;
        let e = energy_delta(&fam, &lat)?.value;
        ok &= e == 6.0;
        Ok((ok, format!("binomial sizes N <= 16, membership 1/2, hand case sum m^2 = {e}")))
    });
    finish(7, "combinatorial identities", None, res, secs)
}

/// 8. Headline growth of ratioConservative.
pub fn headline(cfg: &ExperimentConfig) -> (Criterion, Option<super::sweep::RatioReport>) {
    let (res, secs) = timed(|| ratio_sweep(cfg));
    let (ok, detail, rep) = match res {
        Ok(rep) => {
            let fit = rep.fit.expect("schedule has >= 3 rows");
            let ratios: Vec<String> =
                rep.rows.iter().map(|r| format!("{:.4}", r.ratio_conservative)).collect();
            let ok =
                rep.monotone && fit.slope > 0.0 && fit.r_squared >= 0.9 && rep.ordered && rep.gates_passed;
            let detail = format!(
                "c={} ratios [{}], slope {:.4e}, r^2 {:.4}, monotone {}, conservative <= observed {}",
                rep.c,
                ratios.join(", "),
                fit.slope,
                fit.r_squared,
                rep.monotone,
                rep.ordered
            );
            (ok, detail, Some(rep))
        }
        Err(e) => (false, format!("error: {e}"), None),
    };
    (finish(8, "headline growth", Some(1800.0), Ok((ok, detail)), secs), rep)
}

/// 9. c = 1.05 must trip the incidence gate.
pub fn negative_control() -> Criterion {
    let (res, secs) = timed(|| {
        let cfg = ExperimentConfig {
            c: Some(1.05),
            b: 1.02,
            schedule: vec![4, 6],
            incidence_dirs: 2000,
            ..headline_config()
        };
        match ratio_sweep(&cfg) {
            Err(Error::GateFailed(msg)) => Ok((true, format!("gate failed as expected: {msg}"))),
            Err(e) => Ok((false, format!("unexpected error: {e}"))),
            Ok(_) => Ok((false, "sweep passed the gate".into())),
        }
    });
    finish(9, "negative control", None, res, secs)
}

/// Smaller sweep used for the determinism comparison.
pub fn determinism_config(c: f64) -> ExperimentConfig {
    ExperimentConfig {
        c: Some(c),
        schedule: vec![4, 6, 8],
        dir_samples: 64,
        incidence_dirs: 2000,
        resolution_dirs: 64,
        ..headline_config()
    }
}

/// 10. Byte-identical CSV and JSON with 1 and 8 worker threads.
pub fn determinism(cfg: &ExperimentConfig) -> Criterion {
    let (res, secs) = timed(|| {
        let run = |threads: usize| -> Result<(String, String)> {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::Config(e.to_string()))?;
            pool.install(|| {
                let rep = ratio_sweep(cfg)?;
                Ok((to_csv(&rep)?, to_json(&rep)?))
            })
        };
        let a = run(1)?;
        let b = run(8)?;
        Ok((a == b, format!("1 vs 8 threads: csv equal {}, json equal {}", a.0 == b.0, a.1 == b.1)))
    });
    finish(10, "determinism", None, res, secs)
}

/// Runs every criterion; `quick` shrinks the draw counts and the headline schedule.
pub fn verify_all(quick: bool) -> Vec<Criterion> {
    let cs = match search_suite_c() {
        Ok(cs) => cs,
        Err(e) => {
            let res = Err(e);
            return vec![finish(1, "incidence lemma suite", None, res, 0.0)];
        }
    };
    let c2 = cs[0].1;
    let mut out = vec![
        incidence_suite(&cs, 10_000),
        plane_incidence(c2),
        separation(&cs),
        hy_inequality(if quick { 50 } else { 1000 }, 11),
        projection_slice(if quick { 4 } else { 12 }),
        energy_cross_check(c2),
        combinatorics(c2),
    ];
    let mut cfg = ExperimentConfig { c: Some(c2), ..headline_config() };
    if quick {
        cfg = determinism_config(c2);
    }
    out.push(headline(&cfg).0);
    out.push(negative_control());
    out.push(determinism(&determinism_config(c2)));
    out
}
