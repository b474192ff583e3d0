//! Parameter search and the ratio sweep over N.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::fit::{log_fit, LogFit};
use crate::construction::{build_caps, build_lattice, ExpSumWeight, Mollifier};
use crate::error::{Error, Result};
use crate::geometry::{lift_points, scale_for, CurveParams, PointFamily};
use crate::incidence::{
    adversarial_directions, random_directions, run_suite, Direction, IncidenceReport, SuiteConfig,
};
use crate::numeric::{self, Dd};
use crate::transforms::{
    calibration, energy_delta, energy_quadrature, mixed_norm_upper, sup_line_lower_bound,
};

/// Lifted family for N points at the matched scale R = c^{d(N+n0)+1}.
pub fn family_for(cfg: &ExperimentConfig, c: f64, n: usize) -> Result<PointFamily> {
    let params = CurveParams::new(cfg.d, c, cfg.b, n)?;
    let r = scale_for(&params, cfg.n0);
    lift_points(&cfg.surface()?, &params, r, cfg.n0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchTrial {
    pub c: f64,
    pub valid: bool,
    pub passed: bool,
    pub max_bad_set: Option<usize>,
    pub violations: Option<usize>,
    pub note: String,
}

/// First candidate c whose incidence suite passes at N = `n`.
pub fn search_c(cfg: &ExperimentConfig, n: usize, suite: &SuiteConfig) -> Result<(f64, Vec<SearchTrial>)> {
    let mut trials = Vec::new();
    for &c in &cfg.c_candidates {
        let fam = match family_for(cfg, c, n) {
            Ok(f) => f,
            Err(e) => {
                trials.push(SearchTrial {
                    c,
                    valid: false,
                    passed: false,
                    max_bad_set: None,
                    violations: None,
                    note: e.to_string(),
                });
                continue;
            }
        };
        let rep = run_suite(&fam, suite)?;
        trials.push(SearchTrial {
            c,
            valid: true,
            passed: rep.passed,
            max_bad_set: Some(rep.max_bad_set),
            violations: Some(rep.violations),
            note: String::new(),
        });
        if rep.passed {
            return Ok((c, trials));
        }
    }
    let tried: Vec<String> = trials.iter().map(|t| format!("c={} ({})", t.c, t.note)).collect();
    Err(Error::GateFailed(format!("no candidate c passes the incidence suite: {}", tried.join(", "))))
}

/// Normals aligning many lattice pairs at once: hyperplanes containing
/// g_a + g_b - g_c - g_e (d = 2), or the span of two differences g_a - g_b (d = 3).
pub fn difference_directions(family: &PointFamily) -> Vec<Direction> {
    let g = family.generators();
    let n = g.len();
    let d = family.d();
    let mut out = Vec::new();
    if d == 2 {
        for a in 0..n {
            for b in a + 1..n {
                for c in 0..n {
                    for e in c + 1..n {
                        if c == a || c == b || e == a || e == b || (c, e) < (a, b) {
                            continue;
                        }
                        let v = numeric::sub(&numeric::add(&g[a], &g[b]), &numeric::add(&g[c], &g[e]));
                        if let Ok(nu) = Direction::from_dd(&[-v[1], v[0]]) {
                            out.push(nu);
                        }
                    }
                }
            }
        }
    } else if d == 3 {
        let diffs: Vec<Vec<Dd>> = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .map(|(a, b)| numeric::sub(&g[b], &g[a]))
            .collect();
        for i in 0..diffs.len() {
            for j in i + 1..diffs.len() {
                if let Ok(nu) = Direction::from_dd(&numeric::cross3(&diffs[i], &diffs[j])) {
                    out.push(nu);
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncidenceSummary {
    pub passed: bool,
    pub max_bad_set: usize,
    pub violations: usize,
    pub max_plane_count: Option<usize>,
    pub plane_mode: String,
    pub min_separation_times_r: Option<f64>,
}

/// One row of the sweep; energies and norms are divided by R^d, R^{d-1} and R.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "R")]
    pub r: f64,
    pub log_r: f64,
    pub q_size: usize,
    pub sum_m2: f64,
    /// sum m^2 times the N = 1 cap self-energy.
    pub energy_delta: f64,
    pub energy_quadrature: f64,
    pub energy_error_bound: f64,
    pub delta_vs_quadrature: f64,
    pub f_norm_sq: f64,
    pub sup_line_lower: f64,
    pub mixed_norm_upper: f64,
    pub mixed_directions: usize,
    pub mixed_lipschitz_variation: f64,
    pub ratio_conservative: f64,
    pub ratio_observed: f64,
    pub incidence: IncidenceSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub config: ExperimentConfig,
    pub c: f64,
    pub search: Vec<SearchTrial>,
    /// N = 1 cap self-energy (divided by R^d).
    pub calibration: f64,
    pub rows: Vec<RatioRow>,
    pub monotone: bool,
    pub ordered: bool,
    pub fit: Option<LogFit>,
    pub gates_passed: bool,
}

/// Runs the pipeline for every N in the schedule.
///
/// With `gate` on, an incidence failure aborts the sweep with `GateFailed`.
pub fn ratio_sweep(cfg: &ExperimentConfig) -> Result<RatioReport> {
    cfg.validate()?;
    let suite = cfg.suite();
    let nmax = *cfg.schedule.last().expect("validated");
    let (c, search) = match cfg.c {
        Some(c) => (c, Vec::new()),
        None => search_c(cfg, nmax.max(cfg.d + 1), &suite)?,
    };
    let gated: Vec<(PointFamily, IncidenceReport)> = cfg
        .schedule
        .par_iter()
        .map(|&n| {
            let fam = match family_for(cfg, c, n) {
                Err(Error::NotSeparated { inv_r }) if cfg.gate => {
                    return Err(Error::GateFailed(format!(
                        "N = {n}, c = {c}: points not separated at 1/R = {inv_r:e}"
                    )))
                }
                r => r?,
            };
            let inc = run_suite(&fam, &suite)?;
            Ok((fam, inc))
        })
        .collect::<Result<_>>()?;
    if cfg.gate {
        if let Some((fam, inc)) = gated.iter().find(|(_, inc)| !inc.passed) {
            return Err(Error::GateFailed(format!(
                "N = {}, c = {c}: max |S| = {} (bound {}), {} violations, separated = {}, max plane count = {:?}",
                fam.n(),
                inc.max_bad_set,
                cfg.d - 1,
                inc.violations,
                inc.separated,
                inc.max_plane_count
            )));
        }
    }
    let mollifier = Mollifier::default();
    let cal = {
        let fam = family_for(cfg, c, 1)?;
        let caps = build_caps(&fam, cfg.quad_order)?;
        calibration(&caps, &mollifier)
    };
    let rows: Vec<RatioRow> =
        gated.into_par_iter().map(|(fam, inc)| row(cfg, fam, inc, &mollifier, cal)).collect::<Result<_>>()?;
    let monotone = rows.windows(2).all(|w| w[1].ratio_conservative > w[0].ratio_conservative);
    let ordered = rows.iter().all(|r| r.ratio_conservative <= r.ratio_observed);
    let fit = if rows.len() >= 3 { Some(log_fit(&rows)?) } else { None };
    let gates_passed = rows.iter().all(|r| r.incidence.passed);
    Ok(RatioReport {
        config: cfg.clone(),
        c,
        search,
        calibration: cal,
        rows,
        monotone,
        ordered,
        fit,
        gates_passed,
    })
}

fn row(
    cfg: &ExperimentConfig,
    fam: PointFamily,
    inc: IncidenceReport,
    mollifier: &Mollifier,
    cal: f64,
) -> Result<RatioRow> {
    let n = fam.n();
    let r = fam.r;
    let d = cfg.d;
    let lattice = build_lattice(&fam, n / 2)?;
    let caps = build_caps(&fam, cfg.quad_order)?;
    let delta = energy_delta(&fam, &lattice)?;
    let quad = energy_quadrature(&caps, &lattice, mollifier, cfg.near_radius)?;
    let seed = cfg.seed.wrapping_add(n as u64);
    let mut dirs = random_directions(d, cfg.dir_samples, seed);
    dirs.extend(adversarial_directions(&fam));
    let w = ExpSumWeight::new(&lattice, r, *mollifier);
    let sup_cfg = crate::transforms::SupLineConfig { seed, ..cfg.sup_line.clone() };
    let sup = sup_line_lower_bound(&w, &sup_cfg, &dirs)?;
    dirs.extend(difference_directions(&fam));
    dirs.push(sup.witness.direction.clone());
    let mixed = mixed_norm_upper(&lattice, &dirs, r, 1.0, mollifier)?;
    // normalized units: energy / R^d, ||f||^2 / R^{d-1}, line and mixed norms / R
    let f_norm_sq = caps.l2_norm_sq() / r.powi(d as i32 - 1);
    let sup_n = sup.value / r;
    let mixed_n = mixed.max / r;
    let energy = quad.normalized - quad.error_bound / r.powi(d as i32);
    let energy_delta = delta.value * cal;
    Ok(RatioRow {
        n,
        r,
        log_r: r.ln(),
        q_size: lattice.len(),
        sum_m2: delta.value,
        energy_delta,
        energy_quadrature: quad.normalized,
        energy_error_bound: quad.error_bound / r.powi(d as i32),
        delta_vs_quadrature: quad.normalized / energy_delta,
        f_norm_sq,
        sup_line_lower: sup_n,
        mixed_norm_upper: mixed_n,
        mixed_directions: mixed.directions,
        mixed_lipschitz_variation: mixed.lipschitz_variation,
        ratio_conservative: energy / (f_norm_sq * mixed_n),
        ratio_observed: energy / (f_norm_sq * sup_n),
        incidence: IncidenceSummary {
            passed: inc.passed,
            max_bad_set: inc.max_bad_set,
            violations: inc.violations,
            max_plane_count: inc.max_plane_count,
            plane_mode: inc.plane_mode,
            min_separation_times_r: inc.min_separation_times_r,
        },
    })
}
