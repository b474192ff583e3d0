//! Double-double helpers, interpolation tables and reproducible sums.

use sha2::{Digest, Sha256};
use twofloat::TwoFloat;

/// Double-double scalar.
pub type Dd = TwoFloat;

/// Largest `R * max|q|` for which 1/R-scale comparisons stay exact in double-double.
pub const DD_SCALE_LIMIT: f64 = 1.267_650_600_228_229_4e30; // 2^100

#[inline]
pub fn dd(x: f64) -> Dd {
    Dd::from(x)
}

pub fn to_dd(v: &[f64]) -> Vec<Dd> {
    v.iter().map(|&x| dd(x)).collect()
}

pub fn hi(v: &[Dd]) -> Vec<f64> {
    v.iter().map(|x| x.hi() + x.lo()).collect()
}

pub fn dot(a: &[Dd], b: &[Dd]) -> Dd {
    let mut s = dd(0.0);
    for (x, y) in a.iter().zip(b) {
        s += *x * *y;
    }
    s
}

pub fn sub(a: &[Dd], b: &[Dd]) -> Vec<Dd> {
    a.iter().zip(b).map(|(x, y)| *x - *y).collect()
}

pub fn add(a: &[Dd], b: &[Dd]) -> Vec<Dd> {
    a.iter().zip(b).map(|(x, y)| *x + *y).collect()
}

pub fn scale(a: &[Dd], s: Dd) -> Vec<Dd> {
    a.iter().map(|x| *x * s).collect()
}

pub fn norm(a: &[Dd]) -> Dd {
    let s = dot(a, a);
    if s.hi() <= 0.0 {
        dd(0.0)
    } else {
        s.sqrt()
    }
}

/// Unit vector along `a`, or `None` for the zero vector.
pub fn normalize(a: &[Dd]) -> Option<Vec<Dd>> {
    let n = norm(a);
    if n.hi() <= 0.0 || !n.hi().is_finite() {
        return None;
    }
    Some(a.iter().map(|x| *x / n).collect())
}

pub fn cross3(a: &[Dd], b: &[Dd]) -> Vec<Dd> {
    vec![a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Fractional part in [0, 1).
#[inline]
pub fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Fractional part of the exact product `a*b`, in [0, 1).
#[inline]
pub fn frac_prod(a: f64, b: f64) -> f64 {
    let p = a * b;
    let e = a.mul_add(b, -p);
    frac(frac(p) + frac(e))
}

/// `<a, b> mod 1` in [0, 1), exact up to the trailing `lo*lo` products.
pub fn phase_dot(a: &[Dd], b: &[Dd]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        s += frac_prod(x.hi(), y.hi());
        s += frac_prod(x.hi(), y.lo());
        s += frac_prod(x.lo(), y.hi());
        s += x.lo() * y.lo();
        s = frac(s);
    }
    s
}

/// Pairwise (tree) summation; the association order depends only on the length.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if v.len() <= LEAF {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r
}

fn lagrange4(t: f64, y: [f64; 4]) -> f64 {
    // nodes at -1, 0, 1, 2
    let a = t + 1.0;
    let b = t;
    let c = t - 1.0;
    let d = t - 2.0;
    -y[0] * b * c * d / 6.0 + y[1] * a * c * d / 2.0 - y[2] * a * b * d / 2.0 + y[3] * a * b * c / 6.0
}

fn stencil(x: f64, x0: f64, dx: f64, n: usize) -> Option<(usize, f64)> {
    if n < 4 {
        return None;
    }
    let u = (x - x0) / dx;
    if !(u >= 0.0 && u <= (n - 1) as f64) {
        return None;
    }
    let mut i = u.floor() as usize;
    i = i.clamp(1, n - 3);
    Some((i - 1, u - i as f64))
}

/// Samples of a function on a uniform grid with cubic interpolation.
#[derive(Debug, Clone)]
pub struct UniformTable {
    pub x0: f64,
    pub dx: f64,
    pub values: Vec<f64>,
}

impl UniformTable {
    pub fn from_fn(x0: f64, dx: f64, n: usize, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..n).map(|i| f(x0 + dx * i as f64)).collect();
        Self { x0, dx, values }
    }

    pub fn x_max(&self) -> f64 {
        self.x0 + self.dx * (self.values.len() - 1) as f64
    }

    /// Interpolated value, or `outside` beyond the grid.
    pub fn eval_or(&self, x: f64, outside: f64) -> f64 {
        match stencil(x, self.x0, self.dx, self.values.len()) {
            Some((j, t)) => {
                lagrange4(t, [self.values[j], self.values[j + 1], self.values[j + 2], self.values[j + 3]])
            }
            None => outside,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_or(x, 0.0)
    }

    pub fn checksum(&self) -> String {
        checksum(&self.values)
    }
}

/// Samples on a uniform 2-D grid with bicubic interpolation; zero outside.
#[derive(Debug, Clone)]
pub struct UniformGrid2 {
    pub x0: f64,
    pub dx: f64,
    pub nx: usize,
    pub y0: f64,
    pub dy: f64,
    pub ny: usize,
    /// Row-major in x: `values[ix * ny + iy]`.
    pub values: Vec<f64>,
}

impl UniformGrid2 {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let Some((jx, tx)) = stencil(x, self.x0, self.dx, self.nx) else {
            return 0.0;
        };
        let Some((jy, ty)) = stencil(y, self.y0, self.dy, self.ny) else {
            return 0.0;
        };
        let mut col = [0.0; 4];
        for (a, c) in col.iter_mut().enumerate() {
            let base = (jx + a) * self.ny + jy;
            *c = lagrange4(
                ty,
                [self.values[base], self.values[base + 1], self.values[base + 2], self.values[base + 3]],
            );
        }
        lagrange4(tx, col)
    }

    /// Row at a fixed grid index in x, as a 1-D table in y.
    pub fn row(&self, ix: usize) -> UniformTable {
        UniformTable {
            x0: self.y0,
            dx: self.dy,
            values: self.values[ix * self.ny..(ix + 1) * self.ny].to_vec(),
        }
    }

    /// 1-D table in y at an arbitrary x (cubic in x, then cubic in y at use).
    pub fn slice_at(&self, x: f64) -> UniformTable {
        let values = match stencil(x, self.x0, self.dx, self.nx) {
            Some((jx, tx)) => (0..self.ny)
                .map(|iy| {
                    lagrange4(
                        tx,
                        [
                            self.values[jx * self.ny + iy],
                            self.values[(jx + 1) * self.ny + iy],
                            self.values[(jx + 2) * self.ny + iy],
                            self.values[(jx + 3) * self.ny + iy],
                        ],
                    )
                })
                .collect(),
            None => vec![0.0; self.ny],
        };
        UniformTable { x0: self.y0, dx: self.dy, values }
    }

    pub fn checksum(&self) -> String {
        checksum(&self.values)
    }
}

/// Short hex digest of a float slice.
pub fn checksum(values: &[f64]) -> String {
    let mut h = Sha256::new();
    for v in values {
        h.update(v.to_le_bytes());
    }
    let out = h.finalize();
    out.iter().take(8).map(|b| format!("{b:02x}")).collect()
}
