//! w(x) = |eta-hat(|x|/R)|^2 |sum_q e^{-2 pi i <x, q>}|^2, evaluated on demand.

use std::f64::consts::TAU;

use crate::construction::{Mollifier, SubsetSumLattice};
use crate::numeric::{self, Dd};

#[derive(Debug, Clone, Copy)]
pub struct ExpSumWeight<'a> {
    pub lattice: &'a SubsetSumLattice,
    pub r: f64,
    pub mollifier: Mollifier,
}

impl<'a> ExpSumWeight<'a> {
    pub fn new(lattice: &'a SubsetSumLattice, r: f64, mollifier: Mollifier) -> Self {
        Self { lattice, r, mollifier }
    }

    /// Radius C R outside of which w vanishes.
    pub fn support_radius(&self) -> f64 {
        self.mollifier.c * self.r
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        weight_eval(self, x)
    }

    /// Evaluation at a double-double point.
    pub fn eval_dd(&self, x: &[Dd]) -> f64 {
        let radius = numeric::norm(x).hi();
        let amp = self.mollifier.hat(radius / self.r);
        if amp == 0.0 {
            return 0.0;
        }
        let (mut re, mut im) =
            (Vec::with_capacity(self.lattice.len()), Vec::with_capacity(self.lattice.len()));
        for q in self.lattice.positions() {
            let ph = numeric::phase_dot(x, q);
            let (s, c) = (TAU * ph).sin_cos();
            re.push(c);
            im.push(-s);
        }
        let re = numeric::pairwise_sum(&re);
        let im = numeric::pairwise_sum(&im);
        amp * amp * (re * re + im * im)
    }
}

/// Closed-form weight value at x.
pub fn weight_eval(w: &ExpSumWeight<'_>, x: &[f64]) -> f64 {
    w.eval_dd(&numeric::to_dd(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lattice(points: Vec<Vec<f64>>, k: usize) -> SubsetSumLattice {
        SubsetSumLattice::from_generators(points.into_iter().map(|p| numeric::to_dd(&p)).collect(), k)
            .unwrap()
    }

    #[test]
    fn peak_value_at_origin() {
        let l = lattice(vec![vec![0.1, 0.01], vec![0.02, 0.3], vec![0.5, 0.25], vec![0.05, 0.4]], 2);
        let w = ExpSumWeight::new(&l, 10.0, Mollifier::default());
        assert!((w.eval(&[0.0, 0.0]) - 36.0).abs() < 1e-12);
        assert_eq!(w.eval(&[25.0, 0.0]), 0.0);
    }

    #[test]
    fn single_element_is_the_bump() {
        let l = lattice(vec![vec![0.3, 0.09]], 1);
        let m = Mollifier::default();
        let w = ExpSumWeight::new(&l, 5.0, m);
        for &x in &[0.0, 1.0, 3.7, 8.0, 12.0] {
            assert!((w.eval(&[x, 0.5]) - m.hat((x * x + 0.25f64).sqrt() / 5.0).powi(2)).abs() < 1e-12);
        }
    }

    #[test]
    fn two_term_expansion() {
        let (x1, x2) = (vec![0.25, 0.0625], vec![0.0625, 0.00390625]);
        let l = lattice(vec![x1.clone(), x2.clone()], 1);
        let m = Mollifier::default();
        let w = ExpSumWeight::new(&l, 40.0, m);
        for &(a, b) in &[(3.0f64, -7.0), (11.5, 20.25), (-30.0, 1.0)] {
            let x = [a, b];
            let r = (a * a + b * b).sqrt();
            let dot = a * (x1[0] - x2[0]) + b * (x1[1] - x2[1]);
            let want = m.hat(r / 40.0).powi(2) * (2.0 + 2.0 * (TAU * dot).cos());
            assert!((w.eval(&x) - want).abs() < 1e-12);
        }
    }
}
