//! Moment curve, axis scalings, the projection phi, boxes U_n and point families
//! lifted onto a graph hypersurface.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{self, dd, Dd};

pub type Point = Vec<f64>;

/// Relative tolerance for box membership.
pub const BOX_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveParams {
    pub d: usize,
    pub c: f64,
    pub b: f64,
    pub n: usize,
}

impl CurveParams {
    pub fn new(d: usize, c: f64, b: f64, n: usize) -> Result<Self> {
        let p = Self { d, c, b, n };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::InvalidParams(format!("d = {} < 2", self.d)));
        }
        if self.n < 1 {
            return Err(Error::InvalidParams("N must be at least 1".into()));
        }
        if !(self.b > 1.0 && self.c > self.b) || !self.c.is_finite() {
            return Err(Error::InvalidParams(format!("need c > b > 1, got c = {}, b = {}", self.c, self.b)));
        }
        if (self.d * self.n) as f64 * self.c.log2() > 900.0 {
            return Err(Error::InvalidParams(format!(
                "d*N*log2(c) = {:.1} exceeds 900",
                (self.d * self.n) as f64 * self.c.log2()
            )));
        }
        Ok(())
    }
}

/// (t, t^2, ..., t^d).
pub fn moment_curve(t: f64, d: usize) -> Point {
    let mut out = Vec::with_capacity(d);
    let mut x = 1.0;
    for _ in 0..d {
        x *= t;
        out.push(x);
    }
    out
}

/// Multiplies coordinate i (1-based) by c^{-i}.
pub fn axis_scale(p: &[f64], c: f64) -> Point {
    p.iter().enumerate().map(|(i, x)| x * c.powi(-(i as i32 + 1))).collect()
}

/// (x_2, ..., x_d) / x_1.
pub fn phi_project(p: &[f64]) -> Result<Point> {
    match p.first() {
        Some(&x1) if x1 != 0.0 => Ok(p[1..].iter().map(|x| x / x1).collect()),
        _ => Err(Error::Domain("phi_project needs a nonzero first coordinate".into())),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisBox {
    pub center: Point,
    pub halfwidths: Vec<f64>,
}

impl AxisBox {
    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(&self.center)
            .zip(&self.halfwidths)
            .all(|((xi, ci), hi)| (xi - ci).abs() <= hi * (1.0 + BOX_TOL))
    }

    /// Interval of <nu, x> over the box, in double-double.
    pub fn project(&self, nu: &[Dd]) -> (Dd, Dd) {
        let mid = numeric::dot(&numeric::to_dd(&self.center), nu);
        let mut rad = dd(0.0);
        for (h, v) in self.halfwidths.iter().zip(nu) {
            rad += v.abs() * *h;
        }
        (mid - rad, mid + rad)
    }
}

/// The box centred at M_d(c^{-n}) with halfwidths (b c^{-(n+1)})^i.
pub fn box_u(n: usize, params: &CurveParams) -> AxisBox {
    let t = params.c.powi(-(n as i32));
    let s = params.b * params.c.powi(-(n as i32 + 1));
    AxisBox { center: moment_curve(t, params.d), halfwidths: moment_curve(s, params.d) }
}

/// omega_n = (c^{-n}, c^{-3n}, c^{-4n}, ..., c^{-dn}).
pub fn anchor_offsets(n: usize, params: &CurveParams) -> Vec<f64> {
    let n = n as i32;
    let mut out = vec![params.c.powi(-n)];
    for j in 3..=params.d as i32 {
        out.push(params.c.powi(-j * n));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SurfaceKind {
    /// Phi(w) = |w|^2.
    Paraboloid,
    /// Lower cap of the sphere of radius 1/2 tangent at the origin.
    SphereCap,
    /// Phi(w) = w^T A w with A symmetric and A_11 = 1.
    Quadratic { form: Vec<Vec<f64>> },
}

/// Graph hypersurface {(w_1, Phi(w), w_2, ..., w_{d-1})}.
///
/// The height sits in axis 2 so that points over the anchor offsets track the
/// moment curve coordinate by coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypersurface {
    pub d: usize,
    pub kind: SurfaceKind,
    pub domain_radius: f64,
}

impl Hypersurface {
    pub fn paraboloid(d: usize) -> Self {
        Self { d, kind: SurfaceKind::Paraboloid, domain_radius: 1.0 }
    }

    pub fn sphere_cap(d: usize) -> Self {
        Self { d, kind: SurfaceKind::SphereCap, domain_radius: 0.45 }
    }

    pub fn quadratic(form: Vec<Vec<f64>>) -> Result<Self> {
        let m = form.len();
        if m == 0 || form.iter().any(|r| r.len() != m) {
            return Err(Error::InvalidParams("quadratic form must be square".into()));
        }
        for i in 0..m {
            for j in 0..m {
                if (form[i][j] - form[j][i]).abs() > 1e-14 {
                    return Err(Error::InvalidParams("quadratic form must be symmetric".into()));
                }
            }
        }
        if (form[0][0] - 1.0).abs() > 1e-14 {
            return Err(Error::InvalidParams("quadratic form needs C(e1, e1) = 1".into()));
        }
        Ok(Self { d: m + 1, kind: SurfaceKind::Quadratic { form }, domain_radius: 1.0 })
    }

    pub fn by_name(name: &str, d: usize) -> Result<Self> {
        match name {
            "paraboloid" => Ok(Self::paraboloid(d)),
            "sphere" | "sphere_cap" => Ok(Self::sphere_cap(d)),
            "quadratic" => {
                // a fixed generic form with C(e1, e1) = 1
                let m = d - 1;
                let form = (0..m)
                    .map(|i| (0..m).map(|j| if i == j { 1.0 + 0.5 * i as f64 } else { 0.25 }).collect())
                    .collect();
                Self::quadratic(form)
            }
            other => Err(Error::Config(format!("unknown surface '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            SurfaceKind::Paraboloid => "paraboloid",
            SurfaceKind::SphereCap => "sphere_cap",
            SurfaceKind::Quadratic { .. } => "quadratic",
        }
    }

    /// The quadratic form C with Phi(w) = C(w, w) + o(|w|^2).
    pub fn form(&self) -> Vec<Vec<f64>> {
        let m = self.d - 1;
        match &self.kind {
            SurfaceKind::Paraboloid | SurfaceKind::SphereCap => {
                (0..m).map(|i| (0..m).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
            }
            SurfaceKind::Quadratic { form } => form.clone(),
        }
    }

    pub fn phi(&self, w: &[f64]) -> f64 {
        let r2: f64 = w.iter().map(|x| x * x).sum();
        match &self.kind {
            SurfaceKind::Paraboloid => r2,
            // 1/2 - sqrt(1/4 - r^2), written without cancellation
            SurfaceKind::SphereCap => r2 / (0.5 + (0.25 - r2).sqrt()),
            SurfaceKind::Quadratic { form } => quad(form, w, w),
        }
    }

    /// Phi(w + h) - Phi(w), evaluated without cancellation.
    pub fn phi_diff(&self, w: &[f64], h: &[f64]) -> f64 {
        match &self.kind {
            SurfaceKind::Paraboloid => w.iter().zip(h).map(|(a, b)| (2.0 * a + b) * b).sum(),
            SurfaceKind::SphereCap => {
                let r2: f64 = w.iter().map(|x| x * x).sum();
                let wh: Vec<f64> = w.iter().zip(h).map(|(a, b)| a + b).collect();
                let s2: f64 = wh.iter().map(|x| x * x).sum();
                let num: f64 = w.iter().zip(h).map(|(a, b)| (2.0 * a + b) * b).sum();
                num / ((0.25 - r2).sqrt() + (0.25 - s2).sqrt())
            }
            SurfaceKind::Quadratic { form } => 2.0 * quad(form, w, h) + quad(form, h, h),
        }
    }

    pub fn grad(&self, w: &[f64]) -> Vec<f64> {
        match &self.kind {
            SurfaceKind::Paraboloid => w.iter().map(|x| 2.0 * x).collect(),
            SurfaceKind::SphereCap => {
                let r2: f64 = w.iter().map(|x| x * x).sum();
                let s = (0.25 - r2).sqrt();
                w.iter().map(|x| x / s).collect()
            }
            SurfaceKind::Quadratic { form } => {
                (0..w.len()).map(|i| 2.0 * (0..w.len()).map(|j| form[i][j] * w[j]).sum::<f64>()).collect()
            }
        }
    }

    /// Graph point over w, with the height in axis 2.
    pub fn embed(&self, w: &[f64]) -> Point {
        embed_with_height(w, self.phi(w))
    }

    pub fn check_domain(&self, w: &[f64]) -> Result<()> {
        let r = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r > self.domain_radius {
            return Err(Error::SurfaceDomain { radius: r, domain: self.domain_radius });
        }
        Ok(())
    }
}

fn quad(form: &[Vec<f64>], a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        for j in 0..b.len() {
            s += form[i][j] * a[i] * b[j];
        }
    }
    s
}

pub(crate) fn embed_with_height(w: &[f64], height: f64) -> Point {
    let mut out = Vec::with_capacity(w.len() + 1);
    out.push(w[0]);
    out.push(height);
    out.extend_from_slice(&w[1..]);
    out
}

/// Parameter vector (chart coordinates) of a graph point.
pub(crate) fn chart_coords(x: &[f64]) -> Vec<f64> {
    let mut w = vec![x[0]];
    w.extend_from_slice(&x[2..]);
    w
}

/// Scale matched to N: R = c^{d(N + n0) + 1}.
pub fn scale_for(params: &CurveParams, n0: usize) -> f64 {
    params.c.powi((params.d * (params.n + n0) + 1) as i32)
}

/// Largest N with c^{d(N + n0) + 1} <= R (may be zero or negative).
pub fn points_for_scale(c: f64, d: usize, n0: usize, r: f64) -> i64 {
    let mut m = ((r.ln() / c.ln() - 1.0) / d as f64).floor() as i64 + 1;
    while m >= 0 && c.powi(d as i32 * m as i32 + 1) > r * (1.0 + 1e-12) {
        m -= 1;
    }
    m - n0 as i64
}

/// Anchor xi_0 and points xi_1..xi_N on a hypersurface, at scale R.
#[derive(Debug, Clone, PartialEq)]
pub struct PointFamily {
    pub xi0: Point,
    pub xis: Vec<Point>,
    pub params: CurveParams,
    pub r: f64,
    /// Discarded prefix: xi_j sits over omega_{n0 + j}.
    pub n0: usize,
    pub surface: Hypersurface,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyJson {
    pub d: usize,
    pub c: f64,
    pub b: f64,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "R")]
    pub r: f64,
    pub n0: usize,
    pub surface: Hypersurface,
    pub xi0: Point,
    pub xis: Vec<Point>,
}

impl PointFamily {
    /// A family from explicit points; validates shapes, finiteness and separation.
    pub fn from_points(
        xi0: Point,
        xis: Vec<Point>,
        params: CurveParams,
        r: f64,
        n0: usize,
        surface: Hypersurface,
    ) -> Result<Self> {
        params.validate()?;
        if xis.len() != params.n {
            return Err(Error::InvalidParams(format!("expected {} points, got {}", params.n, xis.len())));
        }
        if !(r >= 1.0) || !r.is_finite() {
            return Err(Error::InvalidParams(format!("R = {r} must be finite and >= 1")));
        }
        for p in std::iter::once(&xi0).chain(&xis) {
            if p.len() != params.d || p.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidParams("points must be finite d-vectors".into()));
            }
        }
        let fam = Self { xi0, xis, params, r, n0, surface };
        if !fam.is_separated() {
            return Err(Error::NotSeparated { inv_r: 1.0 / r });
        }
        Ok(fam)
    }

    pub fn d(&self) -> usize {
        self.params.d
    }

    pub fn n(&self) -> usize {
        self.xis.len()
    }

    /// Curve index of xi_j (1-based j).
    pub fn curve_index(&self, j: usize) -> usize {
        self.n0 + j
    }

    /// xi_j - xi_0 in double-double (0-based j).
    pub fn generator(&self, j: usize) -> Vec<Dd> {
        self.xis[j].iter().zip(&self.xi0).map(|(a, b)| Dd::new_sub(*a, *b)).collect()
    }

    pub fn generators(&self) -> Vec<Vec<Dd>> {
        (0..self.n()).map(|j| self.generator(j)).collect()
    }

    /// Smallest pairwise distance |xi_m - xi_n|, m != n, and whether all exceed 1/R.
    pub fn min_separation(&self) -> Option<f64> {
        let mut best: Option<f64> = None;
        for m in 0..self.n() {
            for k in m + 1..self.n() {
                let diff: Vec<Dd> =
                    self.xis[m].iter().zip(&self.xis[k]).map(|(a, b)| Dd::new_sub(*a, *b)).collect();
                let dist = numeric::norm(&diff);
                let v = dist.hi() + dist.lo();
                best = Some(best.map_or(v, |b| b.min(v)));
            }
        }
        best
    }

    pub fn is_separated(&self) -> bool {
        for m in 0..self.n() {
            for k in m + 1..self.n() {
                let diff: Vec<Dd> =
                    self.xis[m].iter().zip(&self.xis[k]).map(|(a, b)| Dd::new_sub(*a, *b)).collect();
                // |diff|^2 > R^-2, compared as R^2 |diff|^2 > 1
                let s = numeric::dot(&diff, &diff) * dd(self.r) * dd(self.r);
                if !(s > dd(1.0)) {
                    return false;
                }
            }
        }
        true
    }

    pub fn to_json(&self) -> FamilyJson {
        FamilyJson {
            d: self.params.d,
            c: self.params.c,
            b: self.params.b,
            n: self.params.n,
            r: self.r,
            n0: self.n0,
            surface: self.surface.clone(),
            xi0: self.xi0.clone(),
            xis: self.xis.clone(),
        }
    }

    pub fn from_json(j: FamilyJson) -> Result<Self> {
        let params = CurveParams::new(j.d, j.c, j.b, j.n)?;
        Self::from_points(j.xi0, j.xis, params, j.r, j.n0, j.surface)
    }
}

/// Lifts the offsets omega_{n0+1}, ..., omega_{n0+N} onto the surface.
///
/// N is derived from R as the largest value with c^{d(N+n0)+1} <= R; the `n`
/// field of `params` is replaced by it.
pub fn lift_points(surface: &Hypersurface, params: &CurveParams, r: f64, n0: usize) -> Result<PointFamily> {
    if surface.d != params.d {
        return Err(Error::InvalidParams(format!(
            "surface dimension {} differs from d = {}",
            surface.d, params.d
        )));
    }
    let n = points_for_scale(params.c, params.d, n0, r);
    if n < 1 {
        let needed = params.c.powi((params.d * (n0 + 1) + 1) as i32);
        return Err(Error::RTooSmall { r, needed });
    }
    let n = n as usize;
    let params = CurveParams::new(params.d, params.c, params.b, n)?;
    let zero = vec![0.0; params.d - 1];
    let xi0 = surface.embed(&zero);
    let mut xis = Vec::with_capacity(n);
    for j in 1..=n {
        let w = anchor_offsets(n0 + j, &params);
        surface.check_domain(&w)?;
        xis.push(surface.embed(&w));
    }
    PointFamily::from_points(xi0, xis, params, r, n0, surface.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moment_curve_values() {
        assert_eq!(moment_curve(2.0, 3), vec![2.0, 4.0, 8.0]);
        assert_eq!(moment_curve(0.0, 4), vec![0.0; 4]);
        assert_eq!(moment_curve(0.5, 2), vec![0.5, 0.25]);
    }

    #[test]
    fn axis_scale_matches_curve() {
        assert_eq!(axis_scale(&moment_curve(1.0, 3), 2.0), vec![0.5, 0.25, 0.125]);
        assert_eq!(axis_scale(&[0.0, 0.0], 3.0), vec![0.0, 0.0]);
    }

    #[test]
    fn phi_project_values() {
        assert_eq!(phi_project(&[1.0, 2.0, 3.0]).unwrap(), vec![2.0, 3.0]);
        assert!(phi_project(&[0.0, 1.0]).is_err());
    }

    #[test]
    fn box_example() {
        let p = CurveParams::new(2, 4.0, 2.0, 1).unwrap();
        let b = box_u(1, &p);
        assert_eq!(b.center, vec![0.25, 0.0625]);
        assert_eq!(b.halfwidths, vec![0.125, 0.015625]);
    }

    #[test]
    fn offsets_examples() {
        let p2 = CurveParams::new(2, 4.0, 2.0, 1).unwrap();
        assert_eq!(anchor_offsets(2, &p2), vec![1.0 / 16.0]);
        let p3 = CurveParams::new(3, 4.0, 2.0, 1).unwrap();
        assert_eq!(anchor_offsets(1, &p3), vec![0.25, 1.0 / 64.0]);
        let p4 = CurveParams::new(4, 2.5, 2.0, 1).unwrap();
        let w = anchor_offsets(1, &p4);
        assert_eq!(w.len(), 3);
        let p4 = CurveParams { d: 4, c: 2.0, b: 1.5, n: 1 };
        assert_eq!(anchor_offsets(1, &p4), vec![0.5, 0.125, 0.0625]);
    }

    #[test]
    fn params_validation() {
        assert!(CurveParams::new(2, 2.0, 2.0, 3).is_err());
        assert!(CurveParams::new(1, 8.0, 2.0, 3).is_err());
        assert!(CurveParams::new(2, 8.0, 2.0, 0).is_err());
        assert!(CurveParams::new(4, 16.0, 2.0, 60).is_err());
        assert!(CurveParams::new(3, 8.0, 2.0, 12).is_ok());
    }

    #[test]
    fn scale_rule_round_trips() {
        for &c in &[4.0, 8.0, 16.0] {
            for d in 2..=3 {
                for n0 in 0..3 {
                    for n in 1..10 {
                        let p = CurveParams { d, c, b: 2.0, n };
                        assert_eq!(points_for_scale(c, d, n0, scale_for(&p, n0)), n as i64);
                    }
                }
            }
        }
    }

    #[test]
    fn lift_paraboloid_d2() {
        let s = Hypersurface::paraboloid(2);
        let p = CurveParams::new(2, 4.0, 2.0, 1).unwrap();
        let fam = lift_points(&s, &p, 4f64.powi(13), 0).unwrap();
        assert_eq!(fam.n(), 6);
        assert_eq!(fam.xi0, vec![0.0, 0.0]);
        for (j, x) in fam.xis.iter().enumerate() {
            let t = 4f64.powi(-(j as i32 + 1));
            assert_eq!(x, &vec![t, t * t]);
        }
        assert!(fam.is_separated());
    }

    #[test]
    fn lift_rejects_small_r() {
        let s = Hypersurface::paraboloid(2);
        let p = CurveParams::new(2, 8.0, 2.0, 1).unwrap();
        assert!(matches!(lift_points(&s, &p, 100.0, 2), Err(Error::RTooSmall { .. })));
    }

    #[test]
    fn lift_rejects_domain_exit() {
        let mut s = Hypersurface::paraboloid(2);
        s.domain_radius = 1e-3;
        let p = CurveParams::new(2, 8.0, 2.0, 1).unwrap();
        assert!(matches!(lift_points(&s, &p, 8f64.powi(9), 0), Err(Error::SurfaceDomain { .. })));
    }

    #[test]
    fn surfaces_match_their_forms() {
        for name in ["paraboloid", "sphere", "quadratic"] {
            for d in 2..=3 {
                let s = Hypersurface::by_name(name, d).unwrap();
                assert_eq!(s.phi(&vec![0.0; d - 1]), 0.0);
                let c = s.form();
                assert_eq!(c[0][0], 1.0);
                let mut prev = f64::INFINITY;
                for k in 1..8 {
                    let t = 10f64.powi(-k);
                    let w: Vec<f64> = (0..d - 1).map(|i| t * (1.0 + 0.3 * i as f64)).collect();
                    let q = quad(&c, &w, &w);
                    let rel = (s.phi(&w) - q).abs() / (t * t);
                    assert!(rel <= prev + 1e-15, "{name} d={d}");
                    prev = rel;
                }
                assert!(prev < 1e-10);
                let w: Vec<f64> = (0..d - 1).map(|i| 0.1 + 0.05 * i as f64).collect();
                let h: Vec<f64> = (0..d - 1).map(|i| 1e-3 * (1.0 - i as f64)).collect();
                let wh: Vec<f64> = w.iter().zip(&h).map(|(a, b)| a + b).collect();
                assert!((s.phi_diff(&w, &h) - (s.phi(&wh) - s.phi(&w))).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn family_json_round_trip() {
        let s = Hypersurface::paraboloid(3);
        let p = CurveParams::new(3, 8.0, 2.0, 1).unwrap();
        let fam = lift_points(&s, &p, 8f64.powi(13), 1).unwrap();
        let text = serde_json::to_string(&fam.to_json()).unwrap();
        let back = PointFamily::from_json(serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, fam);
    }
}
