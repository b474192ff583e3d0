//! Unit-mass cap measures S_i on the surface patches {|sigma - xi_i| <= 1/R}.

use std::f64::consts::TAU;

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};
use crate::geometry::{chart_coords, embed_with_height, Hypersurface, PointFamily};

/// Quadrature rule for one cap; offsets are sigma - xi_i in units of 1/R.
#[derive(Debug, Clone)]
pub struct Cap {
    pub index: usize,
    pub offsets: Vec<Vec<f64>>,
    /// Normalized weights (sum to 1).
    pub weights: Vec<f64>,
    /// Surface measure sigma(cap) in physical units.
    pub measure: f64,
}

#[derive(Debug, Clone)]
pub struct CapSystem {
    pub r: f64,
    pub d: usize,
    pub caps: Vec<Cap>,
    /// Whether the caps are pairwise disjoint (all separations exceed 2/R).
    pub disjoint: bool,
}

impl CapSystem {
    /// ||f||_1 = sum of cap masses.
    pub fn l1_norm(&self) -> f64 {
        self.caps.iter().map(|c| c.weights.iter().sum::<f64>()).sum()
    }

    /// ||f||_2^2 = sum_i 1/sigma(cap_i).
    pub fn l2_norm_sq(&self) -> f64 {
        self.caps.iter().map(|c| 1.0 / c.measure).sum()
    }
}

struct Chart<'a> {
    surface: &'a Hypersurface,
    w: Vec<f64>,
    r: f64,
}

impl Chart<'_> {
    /// Offset of the surface point over w + u/R from the centre, in units of 1/R.
    fn offset(&self, u: &[f64]) -> Vec<f64> {
        let h: Vec<f64> = u.iter().map(|x| x / self.r).collect();
        embed_with_height(u, self.r * self.surface.phi_diff(&self.w, &h))
    }

    fn jacobian(&self, u: &[f64]) -> f64 {
        let p: Vec<f64> = self.w.iter().zip(u).map(|(a, b)| a + b / self.r).collect();
        let g = self.surface.grad(&p);
        (1.0 + g.iter().map(|x| x * x).sum::<f64>()).sqrt()
    }

    /// Largest t with |offset(t dir)| <= 1, by bisection (|offset| >= t).
    fn boundary(&self, dir: &[f64]) -> f64 {
        let (mut lo, mut hi) = (0.0, 1.0);
        let inside = |t: f64| {
            let u: Vec<f64> = dir.iter().map(|x| x * t).collect();
            self.offset(&u).iter().map(|x| x * x).sum::<f64>() <= 1.0
        };
        if inside(hi) {
            return hi;
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if inside(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

/// Product Gauss rule on each cap, normalized to unit mass.
///
/// d = 2 uses `quad_order` nodes along the arc; d = 3 uses polar coordinates with
/// `quad_order` radial nodes and `2 quad_order` angles.
pub fn build_caps(family: &PointFamily, quad_order: usize) -> Result<CapSystem> {
    if quad_order == 0 {
        return Err(Error::InvalidParams("quadrature order must be at least 1".into()));
    }
    let d = family.d();
    if !(d == 2 || d == 3) {
        return Err(Error::InvalidParams(format!("caps are implemented for d = 2, 3 (got {d})")));
    }
    let r = family.r;
    let gl = GaussLegendre::new(
        quad_order
            .try_into()
            .map_err(|_| Error::InvalidParams("quadrature order must be at least 1".into()))?,
    );
    let rule: Vec<(f64, f64)> = gl.iter().map(|(x, w)| (*x, *w)).collect();
    let mut caps = Vec::with_capacity(family.n());
    for (index, xi) in family.xis.iter().enumerate() {
        let w = chart_coords(xi);
        let reach: f64 = w.iter().map(|x| x * x).sum::<f64>().sqrt() + 1.0 / r;
        if reach > family.surface.domain_radius {
            return Err(Error::SurfaceDomain { radius: reach, domain: family.surface.domain_radius });
        }
        let chart = Chart { surface: &family.surface, w, r };
        let mut offsets = Vec::new();
        let mut raw = Vec::new();
        if d == 2 {
            let (a, b) = (-chart.boundary(&[-1.0]), chart.boundary(&[1.0]));
            for &(x, wt) in &rule {
                let u = [0.5 * (a + b) + 0.5 * (b - a) * x];
                offsets.push(chart.offset(&u));
                raw.push(0.5 * (b - a) * wt * chart.jacobian(&u));
            }
        } else {
            let na = 2 * quad_order;
            for j in 0..na {
                let th = TAU * (j as f64 + 0.5) / na as f64;
                let dir = [th.cos(), th.sin()];
                let rho_max = chart.boundary(&dir);
                for &(x, wt) in &rule {
                    let rho = 0.5 * rho_max * (1.0 + x);
                    let u = [rho * dir[0], rho * dir[1]];
                    offsets.push(chart.offset(&u));
                    raw.push(TAU / na as f64 * 0.5 * rho_max * wt * rho * chart.jacobian(&u));
                }
            }
        }
        let total: f64 = raw.iter().sum();
        let measure = total / r.powi(d as i32 - 1);
        let weights = raw.iter().map(|x| x / total).collect();
        caps.push(Cap { index, offsets, weights, measure });
    }
    let disjoint = family.min_separation().is_none_or(|s| s > 2.0 / r);
    Ok(CapSystem { r, d, caps, disjoint })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{CurveParams, Hypersurface};

    fn family(d: usize, r: f64, n: usize, c: f64) -> PointFamily {
        let s = Hypersurface::paraboloid(d);
        let params = CurveParams::new(d, c, 1.5, n).unwrap();
        let xis = (1..=n).map(|j| s.embed(&crate::geometry::anchor_offsets(j, &params))).collect();
        PointFamily::from_points(vec![0.0; d], xis, params, r, 0, s).unwrap()
    }

    #[test]
    fn unit_masses_and_norms() {
        let fam = family(2, 64.0, 4, 2.0);
        let caps = build_caps(&fam, 16).unwrap();
        assert!((caps.l1_norm() - 4.0).abs() < 1e-12);
        let ratio = caps.l2_norm_sq() / (4.0 * 64.0);
        assert!((0.25..=4.0).contains(&ratio), "{ratio}");
        // the cap is nearly a chord of length 2/R
        for c in &caps.caps {
            assert!((c.measure * 64.0 / 2.0 - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn single_cap_norm_is_inverse_measure() {
        let fam = family(3, 1e4, 1, 8.0);
        let caps = build_caps(&fam, 8).unwrap();
        let m = caps.caps[0].measure;
        assert!((caps.l2_norm_sq() - 1.0 / m).abs() < 1e-9 / m);
        // a flat disc of radius 1/R
        assert!((m * 1e8 / std::f64::consts::PI - 1.0).abs() < 1e-3);
        for o in &caps.caps[0].offsets {
            assert!(o.iter().map(|x| x * x).sum::<f64>() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn rejects_domain_exit() {
        let mut fam = family(2, 64.0, 2, 4.0);
        fam.surface.domain_radius = 0.2;
        assert!(matches!(build_caps(&fam, 4), Err(Error::SurfaceDomain { .. })));
    }
}
