//! Fixed-weight subset sums of the generators xi_i - xi_0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PointFamily;
use crate::numeric::{self, dd, Dd};

/// Default cap on |Q|.
pub const LATTICE_CAP: usize = 1_000_000;

#[derive(Debug, Clone)]
pub struct SubsetSumLattice {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub generators: Vec<Vec<Dd>>,
    /// Coefficient bit-vectors in increasing numeric order.
    pub bits: Vec<u64>,
    /// Element positions, `d` consecutive entries per element.
    pos: Vec<Dd>,
}

/// Serialized lattice: generators as (hi, lo) pairs, elements as bit-vectors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LatticeJson {
    #[serde(rename = "N")]
    pub n: usize,
    pub k: usize,
    pub generators: Vec<Vec<(f64, f64)>>,
    pub bitvectors: Vec<u64>,
}

/// Coefficient vector with entries in {0, 1, 2}, as (ones, twos) masks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CoeffKey {
    pub ones: u64,
    pub twos: u64,
}

impl SubsetSumLattice {
    pub fn from_generators(generators: Vec<Vec<Dd>>, k: usize) -> Result<Self> {
        Self::with_cap(generators, k, LATTICE_CAP)
    }

    pub fn with_cap(generators: Vec<Vec<Dd>>, k: usize, cap: usize) -> Result<Self> {
        let n = generators.len();
        if n > 64 {
            return Err(Error::InvalidParams(format!("N = {n} exceeds 64")));
        }
        if k > n {
            return Err(Error::InvalidParams(format!("k = {k} exceeds N = {n}")));
        }
        let d = generators.first().map_or(0, |g| g.len());
        if generators.iter().any(|g| g.len() != d) {
            return Err(Error::InvalidParams("generators differ in dimension".into()));
        }
        let size = numeric::binomial(n as u64, k as u64);
        if size > cap as u128 {
            return Err(Error::LatticeTooLarge { size, cap });
        }
        let bits = weight_k_patterns(n, k);
        let mut pos = Vec::with_capacity(bits.len() * d);
        for &b in &bits {
            pos.extend(sum_of(&generators, CoeffKey { ones: b, twos: 0 }, d));
        }
        Ok(Self { n, k, d, generators, bits, pos })
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn position(&self, idx: usize) -> &[Dd] {
        &self.pos[idx * self.d..(idx + 1) * self.d]
    }

    pub fn positions(&self) -> impl Iterator<Item = &[Dd]> {
        self.pos.chunks(self.d.max(1)).take(self.len())
    }

    /// Coefficient vector of xi_i + q (generator i, element idx).
    pub fn shifted_key(&self, idx: usize, i: usize) -> CoeffKey {
        let q = self.bits[idx];
        let m = 1u64 << i;
        if q & m != 0 {
            CoeffKey { ones: q & !m, twos: m }
        } else {
            CoeffKey { ones: q | m, twos: 0 }
        }
    }

    /// Position of a coefficient vector, summed in a canonical order.
    pub fn key_position(&self, key: CoeffKey) -> Vec<Dd> {
        sum_of(&self.generators, key, self.d)
    }

    /// Largest |q| over the lattice.
    pub fn max_norm(&self) -> f64 {
        self.positions()
            .map(|p| {
                let n = numeric::norm(p);
                n.hi()
            })
            .fold(0.0, f64::max)
    }

    /// Largest |q - q'|; exact for |Q| <= 4096, otherwise the bound 2 max|q|.
    pub fn max_pair_distance(&self) -> f64 {
        if self.len() > 4096 {
            return 2.0 * self.max_norm();
        }
        let mut best: f64 = 0.0;
        for a in 0..self.len() {
            for b in a + 1..self.len() {
                let diff = numeric::sub(self.position(a), self.position(b));
                best = best.max(numeric::norm(&diff).hi());
            }
        }
        best
    }

    pub fn to_json(&self) -> LatticeJson {
        LatticeJson {
            n: self.n,
            k: self.k,
            generators: self
                .generators
                .iter()
                .map(|g| g.iter().map(|x| (x.hi(), x.lo())).collect())
                .collect(),
            bitvectors: self.bits.clone(),
        }
    }
}

fn sum_of(generators: &[Vec<Dd>], key: CoeffKey, d: usize) -> Vec<Dd> {
    let mut acc = vec![dd(0.0); d];
    for (j, g) in generators.iter().enumerate() {
        let m = 1u64 << j;
        let coeff = if key.twos & m != 0 {
            2.0
        } else if key.ones & m != 0 {
            1.0
        } else {
            continue;
        };
        for (a, x) in acc.iter_mut().zip(g) {
            *a += *x * coeff;
        }
    }
    acc
}

/// All N-bit words of Hamming weight k, increasing.
fn weight_k_patterns(n: usize, k: usize) -> Vec<u64> {
    if k == 0 {
        return vec![0];
    }
    let limit: u128 = 1u128 << n;
    let mut out = Vec::new();
    let mut v: u64 = if k == 64 { u64::MAX } else { (1u64 << k) - 1 };
    loop {
        if (v as u128) >= limit {
            break;
        }
        out.push(v);
        // next word with the same popcount
        let t = v | v.wrapping_sub(1);
        let Some(t1) = t.checked_add(1) else { break };
        let w = t1 | (((!t & t1).wrapping_sub(1)) >> (v.trailing_zeros() + 1));
        if w <= v {
            break;
        }
        v = w;
    }
    out
}

/// Builds Q from the family's generators with Hamming weight k.
pub fn build_lattice(family: &PointFamily, k: usize) -> Result<SubsetSumLattice> {
    SubsetSumLattice::from_generators(family.generators(), k)
}

/// Number and fraction of q in Q with c_i = 0, i.e. with xi_i + q of weight k + 1.
pub fn shifted_membership(lattice: &SubsetSumLattice, i: usize) -> Result<(usize, f64)> {
    if i >= lattice.n {
        return Err(Error::IndexOutOfRange { index: i, len: lattice.n });
    }
    let m = 1u64 << i;
    let count = lattice.bits.iter().filter(|&&b| b & m == 0).count();
    Ok((count, count as f64 / lattice.len() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_gens(n: usize) -> Vec<Vec<Dd>> {
        (0..n).map(|i| vec![dd(2f64.powi(-(i as i32) - 1)), dd(0.0)]).collect()
    }

    #[test]
    fn sizes() {
        assert_eq!(SubsetSumLattice::from_generators(unit_gens(4), 2).unwrap().len(), 6);
        assert_eq!(SubsetSumLattice::from_generators(unit_gens(14), 7).unwrap().len(), 3432);
        assert_eq!(SubsetSumLattice::from_generators(unit_gens(5), 0).unwrap().len(), 1);
        assert_eq!(SubsetSumLattice::from_generators(unit_gens(5), 5).unwrap().len(), 1);
        assert!(SubsetSumLattice::from_generators(unit_gens(3), 4).is_err());
    }

    #[test]
    fn cap_is_enforced() {
        let r = SubsetSumLattice::with_cap(unit_gens(20), 10, 1000);
        assert!(matches!(r, Err(Error::LatticeTooLarge { .. })));
    }

    #[test]
    fn positions_are_sums() {
        let l = SubsetSumLattice::from_generators(unit_gens(4), 2).unwrap();
        for (idx, &b) in l.bits.iter().enumerate() {
            let want: f64 = (0..4).filter(|i| b >> i & 1 == 1).map(|i| 2f64.powi(-i - 1)).sum();
            assert_eq!(l.position(idx)[0].hi(), want);
        }
    }

    #[test]
    fn shifted_membership_small() {
        let l = SubsetSumLattice::from_generators(unit_gens(4), 2).unwrap();
        for i in 0..4 {
            assert_eq!(shifted_membership(&l, i).unwrap(), (3, 0.5));
        }
        assert!(shifted_membership(&l, 4).is_err());
    }

    #[test]
    fn shifted_keys() {
        let l = SubsetSumLattice::from_generators(unit_gens(2), 1).unwrap();
        // q = e_0: xi_0 + q = 2 e_0
        assert_eq!(l.shifted_key(0, 0), CoeffKey { ones: 0, twos: 1 });
        assert_eq!(l.shifted_key(0, 1), CoeffKey { ones: 3, twos: 0 });
        assert_eq!(l.key_position(CoeffKey { ones: 0, twos: 1 })[0].hi(), 1.0);
    }
}
