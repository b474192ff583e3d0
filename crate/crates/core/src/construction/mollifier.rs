//! Radial smooth cutoff eta-hat and reference tables for its transforms.
//!
//! All tables are at unit scale (R = 1) and are computed once per process.
//! Trapezoid sums over the full line are spectrally accurate here because the
//! integrands are smooth and compactly supported.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::decay::DecayBound;
use crate::error::{Error, Result};
use crate::numeric::{UniformGrid2, UniformTable};

/// Largest offset kept in the line and slice tables (unit scale).
pub const DELTA_MAX: f64 = 32.0;
/// Largest radius kept in the radial tables.
pub const R_MAX: f64 = 40.0;
/// Largest slice offset kept in the slice-norm tables.
pub const S_MAX: f64 = 32.0;

const DELTA_STEP: f64 = 1.0 / 256.0;
const RHO_ROWS: usize = 257;
const R_STEP: f64 = 1.0 / 128.0;
const S_STEP: f64 = 1.0 / 64.0;
const HALF_NODES: usize = 1024;

/// eta-hat(r) = 1 for r <= 1/C, 0 for r >= C, smooth and decreasing between.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mollifier {
    pub c: f64,
}

impl Default for Mollifier {
    fn default() -> Self {
        Self { c: 2.0 }
    }
}

fn smooth_floor(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

impl Mollifier {
    pub fn new(c: f64) -> Result<Self> {
        if !(c > 1.0) || !c.is_finite() {
            return Err(Error::InvalidParams(format!("mollifier constant C = {c} must exceed 1")));
        }
        Ok(Self { c })
    }

    pub fn hat(&self, r: f64) -> f64 {
        let r = r.abs();
        let x = (self.c - r) / (self.c - 1.0 / self.c);
        if x >= 1.0 {
            return 1.0;
        }
        if x <= 0.0 {
            return 0.0;
        }
        let a = smooth_floor(x);
        a / (a + smooth_floor(1.0 - x))
    }

    /// Support radius of eta-hat at unit scale.
    pub fn support(&self) -> f64 {
        self.c
    }

    pub fn line_tables(&self) -> Arc<LineTables> {
        static CACHE: OnceLock<Mutex<HashMap<u64, Arc<LineTables>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut g = cache.lock().unwrap_or_else(|e| e.into_inner());
        g.entry(self.c.to_bits()).or_insert_with(|| Arc::new(LineTables::compute(*self))).clone()
    }

    pub fn radial(&self, d: usize) -> Arc<RadialTables> {
        static CACHE: OnceLock<Mutex<HashMap<(u64, usize), Arc<RadialTables>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut g = cache.lock().unwrap_or_else(|e| e.into_inner());
        g.entry((self.c.to_bits(), d)).or_insert_with(|| Arc::new(RadialTables::compute(*self, d))).clone()
    }

    /// m_q(s) = ||eta(s nu + .)||_{L^q(nu^perp)} on [0, S_MAX].
    pub fn slice_norm(&self, d: usize, q: f64) -> Arc<UniformTable> {
        static CACHE: OnceLock<Mutex<HashMap<(u64, usize, u64), Arc<UniformTable>>>> = OnceLock::new();
        let radial = self.radial(d);
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut g = cache.lock().unwrap_or_else(|e| e.into_inner());
        g.entry((self.c.to_bits(), d, q.to_bits()))
            .or_insert_with(|| Arc::new(slice_norm_table(&radial, q)))
            .clone()
    }

    /// int_R eta-hat(|u|)^2 du, the line integral of a single bump at unit scale.
    pub fn hat_sq_line_integral(&self) -> f64 {
        fine_line_integral(|u| self.hat(u).powi(2), self.c)
    }

    /// int_R m_q(s)^2 ds, the mixed norm of a single unit-scale bump.
    pub fn single_mixed_norm(&self, d: usize, q: f64) -> f64 {
        let t = self.slice_norm(d, q);
        let sq: Vec<f64> = t.values.iter().map(|v| v * v).collect();
        2.0 * trapezoid_half(&sq, t.dx)
    }
}

/// Full-line trapezoid of an even function supported in [-c, c], 20000 nodes per side.
fn fine_line_integral(f: impl Fn(f64) -> f64, c: f64) -> f64 {
    let n = 20_000;
    let h = c / n as f64;
    let mut s = 0.5 * f(0.0);
    for j in 1..=n {
        s += f(h * j as f64);
    }
    2.0 * h * s
}

fn trapezoid_half(values: &[f64], h: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let inner: f64 = values.iter().sum();
    h * (inner - 0.5 * values[0] - 0.5 * values[values.len() - 1])
}

/// G(rho, delta) = int eta-hat(sqrt(rho^2+u^2))^2 cos(2 pi u delta) du and
/// A(rho, sigma) = int eta-hat(sqrt(rho^2+u^2)) cos(2 pi u sigma) du.
#[derive(Debug)]
pub struct LineTables {
    pub mollifier: Mollifier,
    pub g: UniformGrid2,
    pub a: UniformGrid2,
    pub checksum: String,
}

impl LineTables {
    fn compute(m: Mollifier) -> Self {
        let c = m.c;
        // u-step h with h * DELTA_STEP = 1/L for an FFT of length L
        let mut len = 1usize << 10;
        while (1.0 / (len as f64 * DELTA_STEP)) > c / HALF_NODES as f64 {
            len <<= 1;
        }
        let h = 1.0 / (len as f64 * DELTA_STEP);
        let nu = (c / h).ceil() as usize + 1;
        let ndelta = (DELTA_MAX / DELTA_STEP) as usize + 1;
        let drho = c / (RHO_ROWS - 1) as f64;
        let fft = FftPlanner::new().plan_fft_forward(len);
        let mut g = vec![0.0; RHO_ROWS * ndelta];
        let mut a = vec![0.0; RHO_ROWS * ndelta];
        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        for (table, power) in [(&mut g, 2), (&mut a, 1)] {
            for i in 0..RHO_ROWS {
                let rho = drho * i as f64;
                buf.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
                for (j, z) in buf.iter_mut().enumerate().take(nu.min(len)) {
                    let u = h * j as f64;
                    z.re = m.hat((rho * rho + u * u).sqrt()).powi(power);
                }
                let g0 = buf[0].re;
                fft.process(&mut buf);
                for k in 0..ndelta {
                    table[i * ndelta + k] = h * (2.0 * buf[k].re - g0);
                }
            }
        }
        let g =
            UniformGrid2 { x0: 0.0, dx: drho, nx: RHO_ROWS, y0: 0.0, dy: DELTA_STEP, ny: ndelta, values: g };
        let a =
            UniformGrid2 { x0: 0.0, dx: drho, nx: RHO_ROWS, y0: 0.0, dy: DELTA_STEP, ny: ndelta, values: a };
        let checksum = format!("{}{}", g.checksum(), a.checksum());
        Self { mollifier: m, g, a, checksum }
    }

    /// G(rho, delta); zero for rho >= C or |delta| >= DELTA_MAX.
    pub fn g(&self, rho: f64, delta: f64) -> f64 {
        if rho >= self.mollifier.c {
            return 0.0;
        }
        self.g.eval(rho, delta.abs())
    }

    pub fn a(&self, rho: f64, sigma: f64) -> f64 {
        if rho >= self.mollifier.c {
            return 0.0;
        }
        self.a.eval(rho, sigma.abs())
    }

    /// G(rho, .) as a 1-D table in delta.
    pub fn g_row(&self, rho: f64) -> UniformTable {
        if rho >= self.mollifier.c {
            return UniformTable { x0: 0.0, dx: DELTA_STEP, values: vec![0.0; self.g.ny] };
        }
        self.g.slice_at(rho)
    }

    pub fn a_row(&self, rho: f64) -> UniformTable {
        if rho >= self.mollifier.c {
            return UniformTable { x0: 0.0, dx: DELTA_STEP, values: vec![0.0; self.a.ny] };
        }
        self.a.slice_at(rho)
    }
}

/// Physical-side profiles in dimension d: eta(r) and K = eta * eta.
#[derive(Debug)]
pub struct RadialTables {
    pub mollifier: Mollifier,
    pub d: usize,
    pub eta: UniformTable,
    pub kernel: UniformTable,
    /// Suffix maxima of |K| on the table grid.
    suffix_max: Vec<f64>,
    /// Pointwise bound on |K| beyond the table.
    pub kernel_decay: DecayBound,
    /// Pointwise bound on |eta| beyond the table.
    pub eta_decay: DecayBound,
    pub checksum: String,
}

impl RadialTables {
    fn compute(m: Mollifier, d: usize) -> Self {
        assert!(d == 2 || d == 3, "radial tables exist for d = 2, 3");
        let eta = radial_transform(|r| m.hat(r), m.c, d);
        let kernel = radial_transform(|r| m.hat(r).powi(2), m.c, d);
        let mut suffix_max = vec![0.0; kernel.values.len()];
        let mut run: f64 = 0.0;
        for i in (0..kernel.values.len()).rev() {
            run = run.max(kernel.values[i].abs());
            suffix_max[i] = run;
        }
        let kernel_decay = DecayBound::compute(&m, d, 2);
        let eta_decay = DecayBound::compute(&m, d, 1);
        let checksum = format!("{}{}", eta.checksum(), kernel.checksum());
        Self { mollifier: m, d, eta, kernel, suffix_max, kernel_decay, eta_decay, checksum }
    }

    pub fn eta(&self, r: f64) -> f64 {
        self.eta.eval(r.abs())
    }

    pub fn kernel(&self, r: f64) -> f64 {
        self.kernel.eval(r.abs())
    }

    pub fn r_max(&self) -> f64 {
        self.kernel.x_max()
    }

    /// |eta(r)| <= A r^{-k} for r >= r_max: returns (A, k).
    pub fn eta_power_tail(&self) -> (f64, usize) {
        let k = self.eta_decay.best_order(self.r_max()).max(4);
        (self.eta_decay.norms[k] / (2.0 * PI).powi(k as i32), k)
    }

    /// Bound on int_{|x| > r_max} |eta|.
    pub fn eta_tail_mass(&self) -> f64 {
        let r0 = self.r_max();
        let (a, k) = self.eta_power_tail();
        let area = if self.d == 2 { 2.0 * PI } else { 4.0 * PI };
        area * a * r0.powi(self.d as i32 - k as i32) / (k - self.d) as f64
    }

    /// Nonincreasing bound on sup_{s >= r} |K(s)|.
    pub fn kernel_envelope(&self, r: f64) -> f64 {
        let r = r.max(0.0);
        let tail_at = |x: f64| self.kernel_decay.eval(x);
        if r >= self.r_max() {
            return tail_at(r);
        }
        let idx = (r / self.kernel.dx).floor() as usize;
        // 1% margin for interpolation overshoot between nodes
        (1.01 * self.suffix_max[idx]).max(tail_at(self.r_max()))
    }
}

/// Radial inverse transform of a radial profile supported in [0, c], sampled on [0, R_MAX].
fn radial_transform(f: impl Fn(f64) -> f64, c: f64, d: usize) -> UniformTable {
    let h = c / HALF_NODES as f64;
    let nr = (R_MAX / R_STEP) as usize + 1;
    let nodes: Vec<f64> = (0..=HALF_NODES).map(|j| h * j as f64).collect();
    if d == 3 {
        let fr: Vec<f64> = nodes.iter().map(|&p| f(p) * p).collect();
        let values = (0..nr)
            .map(|k| {
                let r = R_STEP * k as f64;
                if k == 0 {
                    4.0 * PI * h * nodes.iter().zip(&fr).map(|(p, v)| v * p).sum::<f64>()
                } else {
                    let s: f64 =
                        nodes.iter().zip(&fr).skip(1).map(|(p, v)| v * (2.0 * PI * p * r).sin()).sum();
                    2.0 * h * s / r
                }
            })
            .collect();
        UniformTable { x0: 0.0, dx: R_STEP, values }
    } else {
        // Abel projection P(a) = int f(sqrt(a^2+b^2)) db, then a 1-D cosine transform
        let proj: Vec<f64> = nodes
            .iter()
            .map(|&a| {
                let mut s = f(a);
                for &b in &nodes[1..] {
                    s += 2.0 * f((a * a + b * b).sqrt());
                }
                h * s
            })
            .collect();
        let values = (0..nr)
            .map(|k| {
                let r = R_STEP * k as f64;
                let mut s = proj[0];
                for (a, p) in nodes.iter().zip(&proj).skip(1) {
                    s += 2.0 * p * (2.0 * PI * a * r).cos();
                }
                h * s
            })
            .collect();
        UniformTable { x0: 0.0, dx: R_STEP, values }
    }
}

fn slice_norm_table(radial: &RadialTables, q: f64) -> UniformTable {
    let ns = (S_MAX / S_STEP) as usize + 1;
    let rmax = radial.r_max();
    let (a, k) = radial.eta_power_tail();
    let (aq, kq) = (a.powf(q), k as f64 * q);
    let values = if radial.d == 3 {
        // m_q(s)^q = 2 pi int_s^rmax |eta(r)|^q r dr on the table nodes
        let t = &radial.eta;
        let nr = t.values.len();
        let integrand: Vec<f64> = (0..nr).map(|i| t.values[i].abs().powf(q) * t.dx * i as f64).collect();
        let mut cum = vec![0.0; nr];
        for i in (0..nr - 1).rev() {
            cum[i] = cum[i + 1] + 0.5 * t.dx * (integrand[i] + integrand[i + 1]);
        }
        // Euler-Maclaurin endpoint term at the lower limit; the upper one is negligible
        let h = t.dx;
        let slope = |i: usize| {
            if i == 0 {
                t.values[0].abs().powf(q)
            } else {
                (integrand[i + 1] - integrand[i - 1]) / (2.0 * h)
            }
        };
        for (i, c) in cum.iter_mut().enumerate().take(nr - 1) {
            *c += h * h / 12.0 * slope(i);
        }
        let stride = (S_STEP / t.dx).round() as usize;
        // part of the slice outside the table radius: 2 pi A^q rmax^{2-kq} / (kq-2)
        let tail = 2.0 * PI * aq * rmax.powf(2.0 - kq) / (kq - 2.0);
        (0..ns).map(|k| (2.0 * PI * cum[k * stride] + tail).powf(1.0 / q)).collect()
    } else {
        let dw = R_STEP;
        (0..ns)
            .map(|k| {
                let s = S_STEP * k as f64;
                let wmax = (rmax * rmax - s * s).max(0.0).sqrt();
                let nw = (wmax / dw).floor() as usize;
                let mut acc = 0.5 * radial.eta(s).abs().powf(q);
                for j in 1..=nw {
                    let w = dw * j as f64;
                    acc += radial.eta((s * s + w * w).sqrt()).abs().powf(q);
                }
                // outside the table radius |eta| <= A / max(rmax, |w|)^k
                let tail = (rmax - wmax) * aq * rmax.powf(-kq) + aq * rmax.powf(1.0 - kq) / (kq - 1.0);
                (2.0 * dw * acc + 2.0 * tail).powf(1.0 / q)
            })
            .collect()
    };
    UniformTable { x0: 0.0, dx: S_STEP, values }
}
