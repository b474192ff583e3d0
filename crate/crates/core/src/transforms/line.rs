//! Lines R nu + z and integrals of the weight along them.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::construction::{ExpSumWeight, Mollifier, SubsetSumLattice};
use crate::error::{Error, Result};
use crate::incidence::Direction;
use crate::numeric::{self, dd, Dd, DD_SCALE_LIMIT};

/// Largest number of trapezoid nodes accepted by [`line_integral`].
pub const MAX_LINE_NODES: f64 = 5e7;

/// Line {z + s nu}, with z orthogonal to nu.
#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    pub direction: Direction,
    pub offset: Vec<Dd>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineJson {
    pub direction: Vec<f64>,
    pub offset: Vec<f64>,
}

impl Line {
    pub fn new(direction: Direction, offset: Vec<Dd>) -> Result<Self> {
        if offset.len() != direction.dim() {
            return Err(Error::InvalidParams("offset and direction differ in dimension".into()));
        }
        let along = direction.dot(&offset).hi().abs();
        let size = numeric::norm(&offset).hi().max(1.0);
        if along > 1e-12 * size {
            return Err(Error::InvalidParams(format!(
                "offset is not orthogonal to nu (<z, nu> = {along:e})"
            )));
        }
        Ok(Self { direction, offset })
    }

    /// The line with direction nu through p.
    pub fn through(direction: Direction, p: &[Dd]) -> Self {
        let t = direction.dot(p);
        let offset = numeric::sub(p, &numeric::scale(direction.as_dd(), t));
        Self { direction, offset }
    }

    pub fn to_json(&self) -> LineJson {
        LineJson { direction: self.direction.as_f64(), offset: numeric::hi(&self.offset) }
    }
}

/// min(1/(16 max|q - q'|), R/16): resolves every oscillation and the bump.
pub fn max_admissible_step(w: &ExpSumWeight<'_>) -> f64 {
    let f = w.lattice.max_pair_distance();
    let osc = if f > 0.0 { 1.0 / (16.0 * f) } else { f64::INFINITY };
    osc.min(w.r / 16.0)
}

/// Composite trapezoid of w along the line over the segment inside |x| <= C R.
pub fn line_integral(w: &ExpSumWeight<'_>, line: &Line, step: f64) -> Result<f64> {
    if w.lattice.is_empty() {
        return Ok(0.0);
    }
    let max = max_admissible_step(w);
    if !(step > 0.0) || step > max {
        return Err(Error::StepTooCoarse { step, max });
    }
    let rad = w.support_radius();
    let z = numeric::norm(&line.offset).hi();
    if z >= rad {
        return Ok(0.0);
    }
    let half = (rad * rad - z * z).sqrt();
    let nodes = (2.0 * half / step).ceil();
    if nodes > MAX_LINE_NODES {
        return Err(Error::Budget(format!("{nodes:e} trapezoid nodes requested")));
    }
    let n = nodes as usize;
    let h = 2.0 * half / n as f64;
    let chunk = 4096;
    let parts: Vec<f64> = (0..=n)
        .collect::<Vec<_>>()
        .par_chunks(chunk)
        .map(|js| {
            let vals: Vec<f64> = js
                .iter()
                .map(|&j| {
                    let s = -half + h * j as f64;
                    let x = numeric::add(&line.offset, &numeric::scale(line.direction.as_dd(), dd(s)));
                    let v = w.eval_dd(&x);
                    if j == 0 || j == n {
                        0.5 * v
                    } else {
                        v
                    }
                })
                .collect();
            numeric::pairwise_sum(&vals)
        })
        .collect();
    Ok(h * numeric::pairwise_sum(&parts))
}

/// Projections of the lattice onto nu in units of 1/R, and phases <z, q> mod 1.
pub(crate) struct Projected {
    /// Gaps R <nu, q_{i+1} - q_i> between consecutive sorted projections,
    /// taken in double-double before rounding.
    pub gaps: Vec<f64>,
    pub phase: Vec<f64>,
}

impl Projected {
    pub fn len(&self) -> usize {
        self.phase.len()
    }

    /// Maximal runs [a, b) whose consecutive gaps are at most `join`.
    pub fn clusters(&self, join: f64) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..=self.len() {
            if i == self.len() || self.gaps[i - 1] > join {
                out.push((start, i));
                start = i;
            }
        }
        out
    }

    /// Positions relative to the first member of the run [a, b).
    pub fn local(&self, a: usize, b: usize) -> Vec<f64> {
        let mut t = Vec::with_capacity(b - a);
        let mut acc = 0.0;
        t.push(0.0);
        for g in &self.gaps[a..b.saturating_sub(1)] {
            acc += g;
            t.push(acc);
        }
        t
    }
}

pub(crate) fn check_resolution(lattice: &SubsetSumLattice, r: f64) -> Result<()> {
    let scale = r * lattice.max_norm();
    if scale > DD_SCALE_LIMIT {
        return Err(Error::PrecisionExceeded { scale, limit: DD_SCALE_LIMIT });
    }
    Ok(())
}

pub(crate) fn project(lattice: &SubsetSumLattice, nu: &Direction, z: Option<&[Dd]>, r: f64) -> Projected {
    let rr = dd(r);
    let mut items: Vec<(Dd, f64)> =
        lattice.positions().map(|q| (nu.dot(q) * rr, z.map_or(0.0, |z| numeric::phase_dot(z, q)))).collect();
    items.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"));
    let gaps = items
        .windows(2)
        .map(|w| {
            let v = w[1].0 - w[0].0;
            v.hi() + v.lo()
        })
        .collect();
    Projected { gaps, phase: items.iter().map(|x| x.1).collect() }
}

/// Exact pair-sum form R sum_{q,q'} cos(2 pi (theta_q - theta_q')) G(|z|/R, R(P_q - P_q')).
pub fn line_integral_closed(
    lattice: &SubsetSumLattice,
    r: f64,
    mollifier: &Mollifier,
    line: &Line,
) -> Result<f64> {
    if lattice.is_empty() {
        return Ok(0.0);
    }
    check_resolution(lattice, r)?;
    let rho = numeric::norm(&line.offset).hi() / r;
    if rho >= mollifier.c {
        return Ok(0.0);
    }
    let tables = mollifier.line_tables();
    let g = tables.g_row(rho);
    let reach = g.x_max();
    let p = project(lattice, &line.direction, Some(&line.offset), r);
    let g0 = g.eval(0.0);
    let partial: Vec<f64> = (0..p.len())
        .map(|a| {
            let mut acc = g0;
            let mut delta = 0.0;
            for b in a + 1..p.len() {
                delta += p.gaps[b - 1];
                if delta >= reach {
                    break;
                }
                acc += 2.0 * (TAU * (p.phase[a] - p.phase[b])).cos() * g.eval(delta);
            }
            acc
        })
        .collect();
    Ok(r * numeric::pairwise_sum(&partial))
}
