//! Slices P_nu h(lambda) and the two-route check of
//! X_nu w(z) = int |FT(P_nu h(lambda))(z)|^2 dlambda.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::construction::{ExpSumWeight, Mollifier, SubsetSumLattice};
use crate::error::{Error, Result};
use crate::incidence::Direction;
use crate::numeric::{self, dd, Dd};
use crate::transforms::line::{line_integral, max_admissible_step, Line};

/// The slice omega -> h(lambda nu + omega) of h = sum_q eta_R(. - q).
#[derive(Debug, Clone)]
pub struct SliceFunction {
    pub nu: Direction,
    pub lambda: Dd,
    pub r: f64,
    /// (q, R(lambda - <nu, q>)) per lattice point.
    pub terms: Vec<(Vec<Dd>, f64)>,
}

impl SliceFunction {
    pub fn new(lattice: &SubsetSumLattice, nu: &Direction, lambda: Dd, r: f64) -> Self {
        let rr = dd(r);
        let terms = lattice
            .positions()
            .map(|q| {
                let s = (lambda - nu.dot(q)) * rr;
                (q.to_vec(), s.hi() + s.lo())
            })
            .collect();
        Self { nu: nu.clone(), lambda, r, terms }
    }

    /// (d-1)-dimensional Fourier transform at z in nu^perp:
    /// sum_q e^{-2 pi i <z, q>} R A(|z|/R, R(lambda - P_q)).
    pub fn fourier(&self, z: &[Dd], mollifier: &Mollifier) -> Complex64 {
        let tables = mollifier.line_tables();
        let rho = numeric::norm(z).hi() / self.r;
        let mut re = Vec::with_capacity(self.terms.len());
        let mut im = Vec::with_capacity(self.terms.len());
        for (q, s) in &self.terms {
            let a = self.r * tables.a(rho, *s);
            let (sn, cs) = (TAU * numeric::phase_dot(z, q)).sin_cos();
            re.push(a * cs);
            im.push(-a * sn);
        }
        Complex64::new(numeric::pairwise_sum(&re), numeric::pairwise_sum(&im))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SliceCheck {
    pub max_rel_error: f64,
    /// (line integral, slice quadrature) per offset.
    pub samples: Vec<(f64, f64)>,
}

/// Compares the trapezoid line integral of w with the lambda-quadrature of the
/// squared slice transforms, at each offset (projected onto nu^perp).
///
/// Offsets where both sides fall below 1e-8 of the peak line mass count as agreeing.
pub fn projection_slice_check(
    lattice: &SubsetSumLattice,
    nu: &Direction,
    r: f64,
    z_samples: &[Vec<f64>],
    mollifier: &Mollifier,
) -> Result<SliceCheck> {
    let d = lattice.d;
    if !(d == 2 || d == 3) {
        return Err(Error::InvalidParams("projection-slice check needs d = 2 or 3".into()));
    }
    if lattice.len() > 64 {
        return Err(Error::InvalidParams(format!("|Q| = {} exceeds 64", lattice.len())));
    }
    let w = ExpSumWeight::new(lattice, r, *mollifier);
    let step = 0.5 * max_admissible_step(&w);
    let tables = mollifier.line_tables();
    let reach = tables.g.y0 + tables.g.dy * (tables.g.ny - 1) as f64;
    let rr = dd(r);
    let proj: Vec<Dd> = lattice.positions().map(|q| nu.dot(q)).collect();
    let lo = proj.iter().copied().fold(proj[0], |a, b| if b < a { b } else { a });
    let hi_p = proj.iter().copied().fold(proj[0], |a, b| if b > a { b } else { a });
    let span = ((hi_p - lo) * rr).hi() + 2.0 * reach;
    let h = 1.0 / 8.0;
    let nodes = (span / h).ceil() as usize;
    let peak = r * mollifier.hat_sq_line_integral() * (lattice.len() as f64).powi(2);
    let mut samples = Vec::with_capacity(z_samples.len());
    let mut worst: f64 = 0.0;
    for z in z_samples {
        let line = Line::through(nu.clone(), &numeric::to_dd(z));
        let lhs = line_integral(&w, &line, step)?;
        let mut vals = Vec::with_capacity(nodes + 1);
        for j in 0..=nodes {
            let lambda = lo + dd((h * j as f64 - reach) / r);
            let f = SliceFunction::new(lattice, nu, lambda, r).fourier(&line.offset, mollifier);
            vals.push(f.norm_sqr());
        }
        let rhs = h / r * numeric::pairwise_sum(&vals);
        let scale = lhs.abs().max(rhs.abs());
        let err = if scale < 1e-8 * peak { 0.0 } else { (lhs - rhs).abs() / scale };
        worst = worst.max(err);
        samples.push((lhs, rhs));
    }
    Ok(SliceCheck { max_rel_error: worst, samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_mass() {
        let l = SubsetSumLattice::from_generators(vec![numeric::to_dd(&[0.1, 0.3])], 1).unwrap();
        let m = Mollifier::default();
        let nu = Direction::new(&[0.6, -0.8]).unwrap();
        let r = 16.0;
        let res = projection_slice_check(&l, &nu, r, &[vec![0.0, 0.0]], &m).unwrap();
        let reference = r * m.hat_sq_line_integral();
        assert!(res.max_rel_error < 1e-3);
        assert!((res.samples[0].0 - reference).abs() < 1e-3 * reference);
        assert!((res.samples[0].1 - reference).abs() < 1e-3 * reference);
    }

    #[test]
    fn far_offsets_vanish() {
        let l = SubsetSumLattice::from_generators(vec![numeric::to_dd(&[0.1, 0.3])], 1).unwrap();
        let m = Mollifier::default();
        let nu = Direction::axis(2, 0);
        let res = projection_slice_check(&l, &nu, 16.0, &[vec![0.0, 40.0]], &m).unwrap();
        assert_eq!(res.samples[0].0, 0.0);
        assert!(res.samples[0].1.abs() < 1e-8 * 16.0);
    }
}
