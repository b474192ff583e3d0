//! E_w(f, f) = ||h * (f dsigma)||_2^2 in the delta model and by cap quadrature.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::construction::{CapSystem, Mollifier, SubsetSumLattice};
use crate::error::{Error, Result};
use crate::geometry::PointFamily;
use crate::numeric::{self, dd, Dd, DD_SCALE_LIMIT};

/// Largest multiset size N |Q| accepted by the energy routines.
pub const MULTISET_CAP: usize = 10_000_000;
/// First-coordinate window (units of 1/R) inside which pairs are bounded individually.
const FAR_WINDOW: f64 = 1.0e4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyMethod {
    DeltaModel,
    Quadrature,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnergyResult {
    /// Sum of squared multiplicities (delta model) or E_w(f, f) (quadrature).
    pub value: f64,
    pub method: EnergyMethod,
    pub error_bound: f64,
    /// Quadrature: value / R^d. Delta model: equal to `value`.
    pub normalized: f64,
    /// Ordered pairs evaluated exactly (quadrature) or merged across cells (delta model).
    pub near_pairs: usize,
    /// Points within 1e-12 of a hash-cell boundary (delta model).
    pub hash_conflicts: usize,
}

/// Multiset {xi_i + q} in units of 1/R, from the differences xi_i - xi_0.
fn multiset(lattice: &SubsetSumLattice, r: f64) -> Result<Vec<(usize, Vec<Dd>)>> {
    let size = lattice.n * lattice.len();
    if size > MULTISET_CAP {
        return Err(Error::Budget(format!("N|Q| = {size} exceeds {MULTISET_CAP}")));
    }
    let scale = r
        * 2.0
        * lattice
            .max_norm()
            .max(lattice.generators.iter().map(|g| numeric::norm(g).hi()).fold(0.0, f64::max));
    if scale > DD_SCALE_LIMIT {
        return Err(Error::PrecisionExceeded { scale, limit: DD_SCALE_LIMIT });
    }
    let rr = dd(r);
    let mut out = Vec::with_capacity(size);
    for idx in 0..lattice.len() {
        for i in 0..lattice.n {
            let p = lattice.key_position(lattice.shifted_key(idx, i));
            out.push((i, numeric::scale(&p, rr)));
        }
    }
    Ok(out)
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Sum of squared multiplicities of {xi_i + q}, merging points closer than 1/(4R).
pub fn energy_delta(family: &PointFamily, lattice: &SubsetSumLattice) -> Result<EnergyResult> {
    if lattice.n != family.n() {
        return Err(Error::InvalidParams("lattice and family sizes differ".into()));
    }
    let pts = multiset(lattice, family.r)?;
    let d = lattice.d;
    let mut conflicts = 0;
    let mut cells: HashMap<Vec<i128>, Vec<usize>> = HashMap::new();
    let mut keys = Vec::with_capacity(pts.len());
    for (k, (_, p)) in pts.iter().enumerate() {
        let mut key = Vec::with_capacity(d);
        // half-cell offset keeps lattice-aligned positions off the cell walls
        for x in p {
            let y = *x * 4.0 + 0.5;
            let f = y.floor();
            let frac = y - f;
            let fr = frac.hi() + frac.lo();
            if !(1e-12..=1.0 - 1e-12).contains(&fr) {
                conflicts += 1;
            }
            key.push(f.hi() as i128 + f.lo() as i128);
        }
        cells.entry(key.clone()).or_default().push(k);
        keys.push(key);
    }
    // merge points in neighbouring cells that lie within 1/(4R)
    let mut parent: Vec<usize> = (0..pts.len()).collect();
    let mut merged = 0;
    let quarter = dd(0.0625);
    for (k, key) in keys.iter().enumerate() {
        let first = cells[key][0];
        let (a, b) = (find(&mut parent, k), find(&mut parent, first));
        parent[a] = b;
        for off in 0..3usize.pow(d as u32) {
            let mut nb = key.clone();
            let mut t = off;
            let mut centre = true;
            for c in nb.iter_mut() {
                let s = (t % 3) as i128 - 1;
                t /= 3;
                centre &= s == 0;
                *c += s;
            }
            if centre {
                continue;
            }
            if let Some(list) = cells.get(&nb) {
                for &j in list {
                    if j <= k {
                        continue;
                    }
                    let diff = numeric::sub(&pts[k].1, &pts[j].1);
                    if numeric::dot(&diff, &diff) <= quarter {
                        let (a, b) = (find(&mut parent, k), find(&mut parent, j));
                        if a != b {
                            parent[a] = b;
                            merged += 1;
                        }
                    }
                }
            }
        }
    }
    let mut mult: HashMap<usize, u64> = HashMap::new();
    for k in 0..pts.len() {
        *mult.entry(find(&mut parent, k)).or_default() += 1;
    }
    let mut counts: Vec<u64> = mult.into_values().collect();
    counts.sort_unstable();
    let value = counts.iter().map(|m| (m * m) as f64).sum();
    Ok(EnergyResult {
        value,
        method: EnergyMethod::DeltaModel,
        error_bound: 0.0,
        normalized: value,
        near_pairs: merged,
        hash_conflicts: conflicts,
    })
}

fn cap_pair(caps: &CapSystem, i: usize, j: usize, delta: &[f64], kernel: &dyn Fn(f64) -> f64) -> f64 {
    let (a, b) = (&caps.caps[i], &caps.caps[j]);
    let mut rows = Vec::with_capacity(a.weights.len());
    for (oa, wa) in a.offsets.iter().zip(&a.weights) {
        let mut acc = 0.0;
        for (ob, wb) in b.offsets.iter().zip(&b.weights) {
            let mut s = 0.0;
            for k in 0..delta.len() {
                let x = delta[k] + oa[k] - ob[k];
                s += x * x;
            }
            acc += wb * kernel(s.sqrt());
        }
        rows.push(wa * acc);
    }
    numeric::pairwise_sum(&rows)
}

/// Self-energy of one cap, sum_{a,b} w_a w_b K(|o_a - o_b|): the constant
/// relating the delta model to the quadrature energy.
pub fn calibration(caps: &CapSystem, mollifier: &Mollifier) -> f64 {
    let tables = mollifier.radial(caps.d);
    cap_pair(caps, 0, 0, &vec![0.0; caps.d], &|r| tables.kernel(r))
}

/// Cap quadrature of sum_{i,j,q,q'} int int [eta_R * eta_R](sigma - sigma' + q - q') dS_i dS_j.
///
/// Pairs of multiset points within `near_radius`/R are evaluated with the kernel
/// table; every other pair adds the kernel envelope at its distance minus 2 to
/// the error bound.
pub fn energy_quadrature(
    caps: &CapSystem,
    lattice: &SubsetSumLattice,
    mollifier: &Mollifier,
    near_radius: f64,
) -> Result<EnergyResult> {
    if lattice.n != caps.caps.len() {
        return Err(Error::InvalidParams("lattice and cap system sizes differ".into()));
    }
    let d = caps.d;
    let r = caps.r;
    let tables = mollifier.radial(d);
    let mut pts = multiset(lattice, r)?;
    pts.sort_by(|a, b| a.1[0].partial_cmp(&b.1[0]).expect("finite").then(a.0.cmp(&b.0)));
    let window = dd(FAR_WINDOW);
    let far_env = tables.kernel_envelope(FAR_WINDOW - 2.0);
    let kernel = |x: f64| tables.kernel(x);
    let per_point: Vec<(f64, f64, usize)> = (0..pts.len())
        .into_par_iter()
        .map(|a| {
            let (i, pa) = (&pts[a].0, &pts[a].1);
            let mut near = vec![cap_pair(caps, *i, *i, &vec![0.0; d], &kernel)];
            let mut tail = 0.0;
            let mut count = 1;
            let mut b = a + 1;
            while b < pts.len() && pts[b].1[0] - pa[0] <= window {
                let diff = numeric::sub(pa, &pts[b].1);
                let delta = numeric::hi(&diff);
                let dist = delta.iter().map(|x| x * x).sum::<f64>().sqrt();
                if dist <= near_radius {
                    near.push(2.0 * cap_pair(caps, *i, pts[b].0, &delta, &kernel));
                    count += 2;
                } else {
                    tail += 2.0 * tables.kernel_envelope(dist - 2.0);
                }
                b += 1;
            }
            tail += 2.0 * (pts.len() - b) as f64 * far_env;
            (numeric::pairwise_sum(&near), tail, count)
        })
        .collect();
    let near: Vec<f64> = per_point.iter().map(|x| x.0).collect();
    let tail: Vec<f64> = per_point.iter().map(|x| x.1).collect();
    let normalized = numeric::pairwise_sum(&near);
    let rd = r.powi(d as i32);
    Ok(EnergyResult {
        value: rd * normalized,
        method: EnergyMethod::Quadrature,
        error_bound: rd * numeric::pairwise_sum(&tail),
        normalized,
        near_pairs: per_point.iter().map(|x| x.2).sum(),
        hash_conflicts: 0,
    })
}

/// Ordered pairs of multiset points with |(xi_i + q) - (xi_j + q') - zeta| <= 1/R.
pub fn coincidence_mass(lattice: &SubsetSumLattice, r: f64, zeta: &[Dd]) -> Result<usize> {
    let mut pts: Vec<Vec<Dd>> = multiset(lattice, r)?.into_iter().map(|x| x.1).collect();
    pts.sort_by(|a, b| a[0].partial_cmp(&b[0]).expect("finite"));
    let shift = numeric::scale(zeta, dd(r));
    let one = dd(1.0);
    let total = pts
        .par_iter()
        .map(|x| {
            let target = numeric::sub(x, &shift);
            let lo = pts.partition_point(|p| p[0] < target[0] - one);
            let mut c = 0;
            for p in &pts[lo..] {
                if p[0] > target[0] + one {
                    break;
                }
                let diff = numeric::sub(&target, p);
                if numeric::dot(&diff, &diff) <= one {
                    c += 1;
                }
            }
            c
        })
        .sum();
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::build_caps;
    use crate::geometry::{CurveParams, Hypersurface};

    fn family(n: usize, r: f64) -> PointFamily {
        let s = Hypersurface::paraboloid(2);
        let p = CurveParams::new(2, 8.0, 2.0, n).unwrap();
        let xis = (1..=n).map(|j| s.embed(&crate::geometry::anchor_offsets(j + 1, &p))).collect();
        PointFamily::from_points(vec![0.0, 0.0], xis, p, r, 1, s).unwrap()
    }

    #[test]
    fn hand_case_n2() {
        let fam = family(2, 8f64.powi(9));
        let l = SubsetSumLattice::from_generators(fam.generators(), 1).unwrap();
        let e = energy_delta(&fam, &l).unwrap();
        assert_eq!(e.value, 6.0);
        assert_eq!(e.hash_conflicts, 0);
    }

    #[test]
    fn single_point_energy() {
        let fam = family(1, 8f64.powi(9));
        let l = SubsetSumLattice::from_generators(fam.generators(), 1).unwrap();
        assert_eq!(energy_delta(&fam, &l).unwrap().value, 1.0);
        let caps = build_caps(&fam, 12).unwrap();
        let m = Mollifier::default();
        let q = energy_quadrature(&caps, &l, &m, 10.0).unwrap();
        assert!(q.normalized > 0.0);
        assert!((q.normalized - calibration(&caps, &m)).abs() < 1e-14);
    }

    #[test]
    fn coincidence_at_zero_is_the_energy() {
        let fam = family(6, 8f64.powi(17));
        let l = SubsetSumLattice::from_generators(fam.generators(), 3).unwrap();
        let e = energy_delta(&fam, &l).unwrap();
        let zero = vec![dd(0.0); 2];
        assert_eq!(coincidence_mass(&l, fam.r, &zero).unwrap() as f64, e.value);
    }
}
