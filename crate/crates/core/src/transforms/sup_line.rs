//! Lower bound for sup over lines of the line integral of w.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::construction::ExpSumWeight;
use crate::error::Result;
use crate::incidence::{random_direction, Direction};
use crate::numeric::{self, dd, Dd};
use crate::transforms::line::{line_integral_closed, Line};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SupLineConfig {
    /// Number of candidate lines evaluated before refinement.
    pub budget: usize,
    /// Candidates refined by pattern search.
    pub refine_top: usize,
    /// Evaluation cap per refinement.
    pub max_evals: usize,
    pub seed: u64,
}

impl Default for SupLineConfig {
    fn default() -> Self {
        Self { budget: 2000, refine_top: 6, max_evals: 4000, seed: 3 }
    }
}

#[derive(Debug, Clone)]
pub struct SupLineResult {
    pub value: f64,
    pub witness: Line,
    pub candidates: usize,
    pub evaluations: usize,
    /// Best value before refinement.
    pub initial_best: f64,
}

/// Best line integral over pair lines, densest-slab lines in the given
/// directions, and random lines, refined by coordinate pattern search.
///
/// The value is an evaluated maximum, hence a lower bound for the supremum.
pub fn sup_line_lower_bound(
    w: &ExpSumWeight<'_>,
    cfg: &SupLineConfig,
    directions: &[Direction],
) -> Result<SupLineResult> {
    let lattice = w.lattice;
    let d = lattice.d;
    let r = w.r;
    let eval = |line: &Line| line_integral_closed(lattice, r, &w.mollifier, line);
    let pts: Vec<Vec<Dd>> = lattice.positions().map(|p| p.to_vec()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut cands: Vec<Line> = Vec::new();
    let n = pts.len();
    let budget = cfg.budget.max(1);
    // lines joining pairs of lattice points
    let pair_budget = budget / 2;
    if n * n.saturating_sub(1) / 2 <= pair_budget {
        for a in 0..n {
            for b in a + 1..n {
                if let Ok(nu) = Direction::from_dd(&numeric::sub(&pts[b], &pts[a])) {
                    cands.push(Line::through(nu, &pts[a]));
                }
            }
        }
    } else {
        while cands.len() < pair_budget {
            let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
            if let Ok(nu) = Direction::from_dd(&numeric::sub(&pts[b], &pts[a])) {
                cands.push(Line::through(nu, &pts[a]));
            }
        }
    }
    // lines inside the densest slab of each direction
    let slab_budget = budget / 4;
    for nu in directions.iter().take(slab_budget) {
        if let Some(line) = densest_slab_line(&pts, nu, r) {
            cands.push(line);
        }
    }
    if n == 1 || cands.is_empty() {
        cands.push(Line::through(Direction::axis(d, 0), &pts[0]));
    }
    while cands.len() < budget {
        let nu = random_direction(d, &mut rng);
        let p = &pts[rng.random_range(0..n)];
        cands.push(Line::through(nu, p));
    }
    let values: Vec<f64> = cands.par_iter().map(&eval).collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..cands.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let initial_best = values[order[0]];
    let top: Vec<usize> = order.into_iter().take(cfg.refine_top.max(1)).collect();
    let refined: Vec<(f64, Line, usize)> = top
        .par_iter()
        .map(|&i| refine(&eval, &cands[i], values[i], r, lattice.max_norm(), cfg.max_evals))
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, x) in refined.iter().enumerate() {
        if x.0 > refined[best].0 {
            best = i;
        }
    }
    let evaluations = cands.len() + refined.iter().map(|x| x.2).sum::<usize>();
    let (value, witness, _) = refined.into_iter().nth(best).expect("at least one candidate");
    Ok(SupLineResult { value, witness, candidates: cands.len(), evaluations, initial_best })
}

/// A line lying in the plane {<nu, x> = lambda} that meets the most balls.
fn densest_slab_line(pts: &[Vec<Dd>], nu: &Direction, r: f64) -> Option<Line> {
    let rr = dd(r);
    let mut s: Vec<(Dd, usize)> = pts.iter().enumerate().map(|(i, q)| (nu.dot(q) * rr, i)).collect();
    s.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"));
    let (mut best, mut lo, mut hi) = ((0, 0), 0, 0);
    while lo < s.len() {
        while hi < s.len() && s[hi].0 - s[lo].0 <= dd(2.0) {
            hi += 1;
        }
        if hi - lo > best.1 - best.0 {
            best = (lo, hi);
        }
        lo += 1;
    }
    let lambda = (s[best.0].0 + s[best.1 - 1].0) / (rr * 2.0);
    let a = &pts[s[best.0].1];
    let shift = lambda - nu.dot(a);
    let on_plane = numeric::add(a, &numeric::scale(nu.as_dd(), shift));
    let basis = nu.perp_basis();
    let tau = if best.1 - best.0 >= 2 && basis.len() > 1 {
        let b = &pts[s[best.1 - 1].1];
        let diff = numeric::sub(b, a);
        let t = nu.dot(&diff);
        Direction::from_dd(&numeric::sub(&diff, &numeric::scale(nu.as_dd(), t))).ok()?
    } else {
        Direction::from_dd(&basis[0]).ok()?
    };
    Some(Line::through(tau, &on_plane))
}

/// Pattern search over (tilt angles, offsets) around a line; only improvements are kept.
fn refine(
    eval: &(dyn Fn(&Line) -> Result<f64> + Sync),
    start: &Line,
    start_value: f64,
    r: f64,
    max_norm: f64,
    max_evals: usize,
) -> Result<(f64, Line, usize)> {
    let nu0 = start.direction.clone();
    let basis = nu0.perp_basis();
    let m = basis.len();
    let anchor = start.offset.clone();
    let make = |params: &[f64]| -> Option<Line> {
        let mut v = nu0.as_dd().to_vec();
        for (j, e) in basis.iter().enumerate() {
            v = numeric::add(&v, &numeric::scale(e, dd(params[j])));
        }
        let nu = Direction::from_dd(&v).ok()?;
        let mut p = anchor.clone();
        for (j, e) in basis.iter().enumerate() {
            p = numeric::add(&p, &numeric::scale(e, dd(params[m + j] / r)));
        }
        Some(Line::through(nu, &p))
    };
    let mut params = vec![0.0; 2 * m];
    let mut steps: Vec<f64> = (0..2 * m).map(|j| if j < m { 1e-2 } else { 0.5 }).collect();
    let min_steps: Vec<f64> = (0..2 * m)
        .map(|j| if j < m { (1e-3 / (r * max_norm.max(1e-300))).max(1e-300) } else { 1e-4 })
        .collect();
    let mut best = start_value;
    let mut best_line = start.clone();
    let mut evals = 0;
    loop {
        let mut improved = false;
        for j in 0..2 * m {
            for sign in [1.0, -1.0] {
                if evals >= max_evals {
                    return Ok((best, best_line, evals));
                }
                let mut trial = params.clone();
                trial[j] += sign * steps[j];
                let Some(line) = make(&trial) else { continue };
                let v = eval(&line)?;
                evals += 1;
                if v > best * (1.0 + 1e-12) {
                    best = v;
                    best_line = line;
                    params = trial;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            let mut any = false;
            for j in 0..2 * m {
                if steps[j] > min_steps[j] {
                    steps[j] *= 0.5;
                    any = true;
                }
            }
            if !any {
                return Ok((best, best_line, evals));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::{Mollifier, SubsetSumLattice};

    #[test]
    fn single_bump_sup_is_the_central_line() {
        let l = SubsetSumLattice::from_generators(vec![numeric::to_dd(&[0.2, 0.04])], 1).unwrap();
        let m = Mollifier::default();
        let w = ExpSumWeight::new(&l, 50.0, m);
        let cfg = SupLineConfig { budget: 20, refine_top: 2, max_evals: 200, seed: 1 };
        let res = sup_line_lower_bound(&w, &cfg, &[]).unwrap();
        let reference = 50.0 * m.hat_sq_line_integral();
        assert!((res.value - reference).abs() < 1e-6 * reference);
        assert!(res.value >= res.initial_best);
    }

    #[test]
    fn refinement_never_decreases() {
        let gens: Vec<Vec<Dd>> = [[0.5, 0.25], [0.125, 0.015625], [0.03125, 0.0009765625], [0.3, 0.09]]
            .iter()
            .map(|p| numeric::to_dd(p))
            .collect();
        let l = SubsetSumLattice::from_generators(gens, 2).unwrap();
        let w = ExpSumWeight::new(&l, 500.0, Mollifier::default());
        let cfg = SupLineConfig { budget: 60, refine_top: 3, max_evals: 300, seed: 5 };
        let res = sup_line_lower_bound(&w, &cfg, &[Direction::axis(2, 1)]).unwrap();
        assert!(res.value >= res.initial_best);
    }
}
