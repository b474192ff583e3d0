//! Decay bounds |g-check(x)| <= ||d_1^k g||_1 / (2 pi |x|)^k for radial g built
//! from the mollifier, with exact derivatives from truncated Taylor jets.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::mollifier::Mollifier;

/// Highest derivative order used.
pub const MAX_ORDER: usize = 10;
const T_NODES: usize = 1200;
const S_NODES: usize = 800;
/// Safety factor on the quadrature of ||d_1^k g||_1.
const MARGIN: f64 = 1.1;

/// Taylor coefficients g^{(j)}(t0) / j!, j = 0..=MAX_ORDER.
#[derive(Debug, Clone, Copy)]
struct Jet([f64; MAX_ORDER + 1]);

impl Jet {
    fn constant(c: f64) -> Self {
        let mut a = [0.0; MAX_ORDER + 1];
        a[0] = c;
        Jet(a)
    }

    fn variable(t0: f64) -> Self {
        let mut j = Self::constant(t0);
        j.0[1] = 1.0;
        j
    }

    fn add_const(mut self, c: f64) -> Self {
        self.0[0] += c;
        self
    }

    fn scale(mut self, c: f64) -> Self {
        self.0.iter_mut().for_each(|x| *x *= c);
        self
    }

    fn add(mut self, o: &Jet) -> Self {
        self.0.iter_mut().zip(&o.0).for_each(|(x, y)| *x += y);
        self
    }

    fn mul(&self, o: &Jet) -> Self {
        let mut c = [0.0; MAX_ORDER + 1];
        for n in 0..=MAX_ORDER {
            c[n] = (0..=n).map(|i| self.0[i] * o.0[n - i]).sum();
        }
        Jet(c)
    }

    fn div(&self, o: &Jet) -> Self {
        let mut c = [0.0; MAX_ORDER + 1];
        for n in 0..=MAX_ORDER {
            let s: f64 = (1..=n).map(|i| o.0[i] * c[n - i]).sum();
            c[n] = (self.0[n] - s) / o.0[0];
        }
        Jet(c)
    }

    fn recip(&self) -> Self {
        Jet::constant(1.0).div(self)
    }

    fn exp(&self) -> Self {
        let mut e = [0.0; MAX_ORDER + 1];
        e[0] = self.0[0].exp();
        for n in 1..=MAX_ORDER {
            let s: f64 = (1..=n).map(|i| i as f64 * self.0[i] * e[n - i]).sum();
            e[n] = s / n as f64;
        }
        Jet(e)
    }

    fn sqrt(&self) -> Self {
        let mut s = [0.0; MAX_ORDER + 1];
        s[0] = self.0[0].sqrt();
        for n in 1..=MAX_ORDER {
            let acc: f64 = (1..n).map(|i| s[i] * s[n - i]).sum();
            s[n] = (self.0[n] - acc) / (2.0 * s[0]);
        }
        Jet(s)
    }
}

/// exp(-1/x) as a jet, for x > 0.
fn smooth_floor(x: &Jet) -> Jet {
    x.recip().scale(-1.0).exp()
}

/// Jet in t of eta-hat(sqrt(t^2 + s^2))^power; None where it is locally constant.
fn hat_jet(m: &Mollifier, t: f64, s: f64, power: u32) -> Option<Jet> {
    let rho0 = (t * t + s * s).sqrt();
    let lo = 1.0 / m.c;
    if rho0 <= lo || rho0 >= m.c {
        return None;
    }
    let tj = Jet::variable(t);
    let rho = tj.mul(&tj).add_const(s * s).sqrt();
    let x = rho.scale(-1.0).add_const(m.c).scale(1.0 / (m.c - lo));
    let a = smooth_floor(&x);
    let b = smooth_floor(&x.scale(-1.0).add_const(1.0));
    let h = a.div(&a.add(&b));
    Some(if power == 2 { h.mul(&h) } else { h })
}

/// Pointwise decay bound min_k M_k / (2 pi r)^k for the inverse transform of eta-hat^power.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayBound {
    pub d: usize,
    /// M_k = 1.1 ||d_1^k g||_{L^1(R^d)} for k = 0..=MAX_ORDER (M_0 = ||g||_1).
    pub norms: Vec<f64>,
}

impl DecayBound {
    pub fn compute(m: &Mollifier, d: usize, power: u32) -> Self {
        assert!(d == 2 || d == 3, "decay bounds exist for d = 2, 3");
        let c = m.c;
        let ht = c / T_NODES as f64;
        let hs = c / S_NODES as f64;
        let mut sums = vec![0.0; MAX_ORDER + 1];
        let mut fact = [1.0; MAX_ORDER + 1];
        for k in 1..=MAX_ORDER {
            fact[k] = fact[k - 1] * k as f64;
        }
        // |d_t^k g| is even in t and in s; integrate over the positive quadrant
        for i in 0..=T_NODES {
            let t = ht * i as f64;
            let wt = if i == 0 { 1.0 } else { 2.0 };
            for j in 0..=S_NODES {
                let s = hs * j as f64;
                let ws = if d == 2 {
                    if j == 0 {
                        1.0
                    } else {
                        2.0
                    }
                } else {
                    2.0 * PI * s
                };
                let w = wt * ws * ht * hs;
                match hat_jet(m, t, s, power) {
                    Some(jet) => {
                        for k in 0..=MAX_ORDER {
                            sums[k] += w * (fact[k] * jet.0[k]).abs();
                        }
                    }
                    None => {
                        if (t * t + s * s).sqrt() <= 1.0 / c {
                            sums[0] += w;
                        }
                    }
                }
            }
        }
        Self { d, norms: sums.into_iter().map(|x| MARGIN * x).collect() }
    }

    /// Bound on |g-check| at radius r using order k only.
    pub fn at_order(&self, k: usize, r: f64) -> f64 {
        self.norms[k] / (2.0 * PI * r).powi(k as i32)
    }

    pub fn eval(&self, r: f64) -> f64 {
        (0..=MAX_ORDER).map(|k| self.at_order(k, r)).fold(f64::INFINITY, f64::min)
    }

    /// Order giving the smallest bound at r.
    pub fn best_order(&self, r: f64) -> usize {
        (0..=MAX_ORDER)
            .min_by(|&a, &b| self.at_order(a, r).total_cmp(&self.at_order(b, r)))
            .expect("nonempty")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jet_matches_known_series() {
        // exp(sqrt(1 + t^2)) at t = 0.3 against finite differences of order 1 and 2
        let f = |t: f64| (1.0 + t * t).sqrt().exp();
        let tj = Jet::variable(0.3);
        let j = tj.mul(&tj).add_const(1.0).sqrt().exp();
        let h = 1e-4;
        let d1 = (f(0.3 + h) - f(0.3 - h)) / (2.0 * h);
        let d2 = (f(0.3 + h) - 2.0 * f(0.3) + f(0.3 - h)) / (h * h);
        assert!((j.0[0] - f(0.3)).abs() < 1e-14);
        assert!((j.0[1] - d1).abs() < 1e-7);
        assert!((2.0 * j.0[2] - d2).abs() < 1e-5);
        let r = Jet::variable(2.0).recip();
        for k in 0..=MAX_ORDER {
            let exact = (-1f64).powi(k as i32) / 2f64.powi(k as i32 + 1);
            assert!((r.0[k] - exact).abs() < 1e-15);
        }
    }

    #[test]
    fn zeroth_norm_is_l1_of_profile() {
        let m = Mollifier::default();
        let b = DecayBound::compute(&m, 2, 1);
        // eta-hat >= 0, so M_0 / 1.1 is its integral, which lies between the disc areas
        let l1 = b.norms[0] / MARGIN;
        assert!(l1 > PI * 0.25 && l1 < PI * 4.0);
    }
}
