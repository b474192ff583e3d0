//! Exact discrete checks of ||X w||_p <= int ||P h(lambda)||_q^2 dlambda, with
//! w = |h-hat|^2 and q = 2p/(2p-1), on periodic grids along coordinate axes.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack allowed in the inequality checks.
pub const MARGIN_TOL: f64 = 1e-9;

/// Complex samples on {0..M-1}^d with spacing delta; index = sum_k i_k M^{d-1-k}.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub d: usize,
    pub m: usize,
    pub spacing: f64,
    pub values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(d: usize, m: usize, spacing: f64, values: Vec<Complex64>) -> Result<Self> {
        if d == 0 || m == 0 || !(spacing > 0.0) {
            return Err(Error::InvalidParams("grid needs d, M >= 1 and spacing > 0".into()));
        }
        if values.len() != m.pow(d as u32) {
            return Err(Error::InvalidParams(format!(
                "expected {} values, got {}",
                m.pow(d as u32),
                values.len()
            )));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParams("grid values must be finite".into()));
        }
        Ok(Self { d, m, spacing, values })
    }

    pub fn from_real(d: usize, m: usize, spacing: f64, values: &[f64]) -> Result<Self> {
        Self::new(d, m, spacing, values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    fn cell(&self) -> f64 {
        self.spacing.powi(self.d as i32)
    }

    /// Weighted L^p norm (p = f64::INFINITY for the sup norm).
    pub fn lp_norm(&self, p: f64) -> f64 {
        lp(self.values.iter().map(|z| z.norm()), self.cell(), p)
    }

    /// h-hat on the dual grid (spacing 1/(M delta)): DFT times delta^d.
    pub fn fourier(&self) -> GridFunction {
        let mut v = self.values.clone();
        fft_nd(&mut v, self.d, self.m);
        let c = self.cell();
        v.iter_mut().for_each(|z| *z *= c);
        GridFunction { d: self.d, m: self.m, spacing: 1.0 / (self.m as f64 * self.spacing), values: v }
    }

    /// Slice at index j along `axis`, as a (d-1)-dimensional grid function.
    pub fn slice(&self, axis: usize, j: usize) -> GridFunction {
        let (m, d) = (self.m, self.d);
        let stride = m.pow((d - 1 - axis) as u32);
        let outer = m.pow(axis as u32);
        let mut values = Vec::with_capacity(m.pow(d as u32 - 1));
        for o in 0..outer {
            for i in 0..stride {
                values.push(self.values[o * stride * m + j * stride + i]);
            }
        }
        GridFunction { d: d - 1, m, spacing: self.spacing, values }
    }
}

fn lp(vals: impl Iterator<Item = f64>, cell: f64, p: f64) -> f64 {
    if p.is_infinite() {
        return vals.fold(0.0, f64::max);
    }
    let s: f64 = vals.map(|x| x.powf(p)).sum();
    (s * cell).powf(1.0 / p)
}

fn fft_nd(v: &mut [Complex64], d: usize, m: usize) {
    let fft = FftPlanner::new().plan_fft_forward(m);
    let mut line = vec![Complex64::new(0.0, 0.0); m];
    for axis in 0..d {
        let stride = m.pow((d - 1 - axis) as u32);
        let outer = m.pow(axis as u32);
        for o in 0..outer {
            for i in 0..stride {
                let base = o * stride * m + i;
                for (k, x) in line.iter_mut().enumerate() {
                    *x = v[base + k * stride];
                }
                fft.process(&mut line);
                for (k, x) in line.iter().enumerate() {
                    v[base + k * stride] = *x;
                }
            }
        }
    }
}

/// Spacing-weighted column sums of w along `axis`.
pub fn grid_xray(w: &GridFunction, axis: usize) -> Result<GridFunction> {
    if axis >= w.d || w.d < 2 {
        return Err(Error::InvalidParams(format!("axis {axis} invalid for d = {}", w.d)));
    }
    let mut out = vec![Complex64::new(0.0, 0.0); w.m.pow(w.d as u32 - 1)];
    for j in 0..w.m {
        let s = w.slice(axis, j);
        for (o, v) in out.iter_mut().zip(&s.values) {
            *o += v * w.spacing;
        }
    }
    GridFunction::new(w.d - 1, w.m, w.spacing, out)
}

/// Exponent pair (p, q = 2p/(2p-1)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormParams {
    pub p: f64,
    pub q: f64,
}

impl NormParams {
    pub fn new(p: f64) -> Result<Self> {
        if !(p >= 1.0) {
            return Err(Error::InvalidParams(format!("p = {p} must be >= 1")));
        }
        let q = if p.is_infinite() { 1.0 } else { 2.0 * p / (2.0 * p - 1.0) };
        Ok(Self { p, q })
    }

    /// Dual exponent q' = 2p.
    pub fn q_dual(&self) -> f64 {
        2.0 * self.p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

impl HyCheck {
    /// (rhs - lhs) / rhs.
    pub fn margin(&self) -> f64 {
        if self.rhs == 0.0 {
            0.0
        } else {
            (self.rhs - self.lhs) / self.rhs
        }
    }
}

/// Precomputed pieces shared by the checks for one h and axis.
struct Pieces {
    /// X w on the dual (d-1)-grid.
    xray: GridFunction,
    /// Physical slices of h along the axis.
    slices: Vec<GridFunction>,
    spacing: f64,
}

fn pieces(h: &GridFunction, axis: usize) -> Result<Pieces> {
    if h.d < 2 || axis >= h.d {
        return Err(Error::InvalidParams(format!("axis {axis} invalid for d = {}", h.d)));
    }
    let hat = h.fourier();
    let w = GridFunction {
        values: hat.values.iter().map(|z| Complex64::new(z.norm_sqr(), 0.0)).collect(),
        ..hat
    };
    let xray = grid_xray(&w, axis)?;
    let slices = (0..h.m).map(|j| h.slice(axis, j)).collect();
    Ok(Pieces { xray, slices, spacing: h.spacing })
}

fn hy_from(pc: &Pieces, np: NormParams) -> HyCheck {
    let lhs = pc.xray.lp_norm(np.p);
    let rhs = pc.spacing * pc.slices.iter().map(|s| s.lp_norm(np.q).powi(2)).sum::<f64>();
    HyCheck { lhs, rhs, pass: lhs <= rhs * (1.0 + MARGIN_TOL) }
}

fn minkowski_from(pc: &Pieces, np: NormParams) -> HyCheck {
    let lhs = pc.xray.lp_norm(np.p);
    let rhs = pc.spacing * pc.slices.iter().map(|s| s.fourier().lp_norm(np.q_dual()).powi(2)).sum::<f64>();
    HyCheck { lhs, rhs, pass: lhs <= rhs * (1.0 + MARGIN_TOL) }
}

/// ||X_axis w||_p against sum_lambda delta ||h(lambda, .)||_q^2.
pub fn hy_xray_check(h: &GridFunction, axis: usize, p: f64) -> Result<HyCheck> {
    Ok(hy_from(&pieces(h, axis)?, NormParams::new(p)?))
}

/// ||X_axis w||_p against sum_lambda delta ||FT(h(lambda, .))||_{2p}^2 alone.
pub fn minkowski_step_check(h: &GridFunction, axis: usize, p: f64) -> Result<HyCheck> {
    Ok(minkowski_from(&pieces(h, axis)?, NormParams::new(p)?))
}

/// ||F-hat||_{q'} <= ||F||_q with the grid weights.
pub fn hausdorff_young_check(f: &GridFunction, q: f64) -> Result<HyCheck> {
    if !(1.0..=2.0).contains(&q) {
        return Err(Error::InvalidParams(format!("q = {q} outside [1, 2]")));
    }
    let qd = if q == 1.0 { f64::INFINITY } else { q / (q - 1.0) };
    let lhs = f.fourier().lp_norm(qd);
    let rhs = f.lp_norm(q);
    Ok(HyCheck { lhs, rhs, pass: lhs <= rhs * (1.0 + MARGIN_TOL) })
}

/// Parseval defect | ||h||_2 - ||h-hat||_2 | / ||h||_2.
pub fn parseval_defect(h: &GridFunction) -> f64 {
    let a = h.lp_norm(2.0);
    let b = h.fourier().lp_norm(2.0);
    if a == 0.0 {
        b
    } else {
        (a - b).abs() / a
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DrawKind {
    /// Independent complex Gaussian entries.
    Complex,
    /// |Gaussian| entries: h >= 0.
    Nonnegative,
    /// h-hat real and >= 0 (h built from its transform).
    FourierNonnegative,
}

/// One random grid function; the stream depends only on (seed, draw).
pub fn random_grid(d: usize, m: usize, seed: u64, draw: u64, kind: DrawKind) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(draw);
    let n = m.pow(d as u32);
    let spacing = 1.0 / m as f64;
    let values: Vec<Complex64> = match kind {
        DrawKind::Complex => (0..n)
            .map(|_| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
            .collect(),
        DrawKind::Nonnegative => {
            (0..n).map(|_| Complex64::new(f64::abs(StandardNormal.sample(&mut rng)), 0.0)).collect()
        }
        DrawKind::FourierNonnegative => {
            // inverse DFT of nonnegative real data, via conj(DFT(conj(.)))
            let mut v: Vec<Complex64> =
                (0..n).map(|_| Complex64::new(f64::abs(StandardNormal.sample(&mut rng)), 0.0)).collect();
            fft_nd(&mut v, d, m);
            v.iter().map(|z| z.conj() / n as f64).collect()
        }
    };
    GridFunction { d, m, spacing, values }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DrawRecord {
    pub draw: u64,
    pub p: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub d: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub draws: usize,
    pub failures: usize,
    pub min_margin: f64,
    pub max_parseval_defect: f64,
    pub records: Vec<DrawRecord>,
}

/// Random-draw suite of [`hy_xray_check`] along axis 0 at every p in `ps`.
pub fn hy_suite(
    d: usize,
    m: usize,
    ps: &[f64],
    draws: usize,
    seed: u64,
    kind: DrawKind,
) -> Result<SuiteSummary> {
    let nps: Vec<NormParams> = ps.iter().map(|&p| NormParams::new(p)).collect::<Result<_>>()?;
    let per_draw: Vec<(Vec<DrawRecord>, f64)> = (0..draws as u64)
        .into_par_iter()
        .map(|draw| {
            let h = random_grid(d, m, seed, draw, kind);
            let pc = pieces(&h, 0).expect("valid axis");
            let defect = parseval_defect(&h);
            let recs = nps
                .iter()
                .map(|&np| {
                    let c = hy_from(&pc, np);
                    DrawRecord { draw, p: np.p, lhs: c.lhs, rhs: c.rhs, margin: c.margin() }
                })
                .collect();
            (recs, defect)
        })
        .collect();
    let mut records = Vec::with_capacity(draws * ps.len());
    let mut max_defect: f64 = 0.0;
    for (r, dft) in per_draw {
        records.extend(r);
        max_defect = max_defect.max(dft);
    }
    let failures = records.iter().filter(|r| r.margin < -MARGIN_TOL).count();
    let min_margin = records.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    Ok(SuiteSummary { d, m, draws, failures, min_margin, max_parseval_defect: max_defect, records })
}
