//! Directional separation checks for a point family and its subset-sum balls.

use std::collections::BTreeSet;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::construction::SubsetSumLattice;
use crate::error::{Error, Result};
use crate::geometry::{box_u, CurveParams, PointFamily};
use crate::numeric::{self, dd, Dd, DD_SCALE_LIMIT};

/// Relative tolerance for dyadic class boundaries.
pub const TIE_TOL: f64 = 1e-9;
/// Projections below this fraction of |xi_n - xi_0| count as zero.
pub const ZERO_TOL: f64 = 1e-30;

/// Unit vector in double-double.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction {
    nu: Vec<Dd>,
}

impl Direction {
    pub fn new(v: &[f64]) -> Result<Self> {
        Self::from_dd(&numeric::to_dd(v))
    }

    pub fn from_dd(v: &[Dd]) -> Result<Self> {
        if v.iter().any(|x| !x.hi().is_finite()) {
            return Err(Error::Domain("direction has non-finite entries".into()));
        }
        let nu = numeric::normalize(v).ok_or_else(|| Error::Domain("zero direction".into()))?;
        Ok(Self { nu })
    }

    pub fn axis(d: usize, j: usize) -> Self {
        let mut nu = vec![dd(0.0); d];
        nu[j] = dd(1.0);
        Self { nu }
    }

    pub fn dim(&self) -> usize {
        self.nu.len()
    }

    pub fn as_dd(&self) -> &[Dd] {
        &self.nu
    }

    pub fn as_f64(&self) -> Vec<f64> {
        numeric::hi(&self.nu)
    }

    pub fn neg(&self) -> Self {
        Self { nu: self.nu.iter().map(|x| -*x).collect() }
    }

    pub fn dot(&self, x: &[Dd]) -> Dd {
        numeric::dot(&self.nu, x)
    }

    /// Orthonormal basis of nu^perp (d = 2 or 3).
    pub fn perp_basis(&self) -> Vec<Vec<Dd>> {
        let d = self.dim();
        if d == 2 {
            return vec![vec![-self.nu[1], self.nu[0]]];
        }
        // Gram-Schmidt against the axis least aligned with nu
        let mut j = 0;
        for i in 1..d {
            if self.nu[i].abs() < self.nu[j].abs() {
                j = i;
            }
        }
        let mut basis: Vec<Vec<Dd>> = Vec::new();
        let mut candidates: Vec<usize> = vec![j];
        candidates.extend((0..d).filter(|&i| i != j));
        for i in candidates {
            if basis.len() == d - 1 {
                break;
            }
            let mut v = vec![dd(0.0); d];
            v[i] = dd(1.0);
            for b in std::iter::once(&self.nu).chain(basis.iter()) {
                let p = numeric::dot(&v, b);
                v = numeric::sub(&v, &numeric::scale(b, p));
            }
            if let Some(u) = numeric::normalize(&v) {
                if numeric::norm(&v).hi() > 1e-3 {
                    basis.push(u);
                }
            }
        }
        basis
    }
}

/// k with base^k <= v < base^{k+1}, and whether v sits within TIE_TOL of a boundary.
pub fn dyadic_index(v: f64, base: f64) -> Result<(i64, bool)> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::Domain(format!("dyadic_index needs v > 0, got {v}")));
    }
    if !(base > 1.0) {
        return Err(Error::Domain(format!("dyadic_index needs base > 1, got {base}")));
    }
    let mut k = (v.ln() / base.ln()).floor() as i64;
    let pw = |k: i64| base.powi(k as i32);
    while pw(k) > v {
        k -= 1;
    }
    while pw(k + 1) <= v {
        k += 1;
    }
    let tie = (v / pw(k) - 1.0).abs() <= TIE_TOL || (v / pw(k + 1) - 1.0).abs() <= TIE_TOL;
    Ok((k, tie))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyConfig {
    /// Base of the magnitude classes.
    pub base: f64,
    /// Only every stride-th index is classified.
    pub stride: usize,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self { base: 2.0, stride: 1 }
    }
}

/// Bad indices (1-based) for one direction.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BadSet {
    pub indices: BTreeSet<usize>,
    pub ties: BTreeSet<usize>,
    /// Indices whose class is shared with a larger index, or with zero projection.
    pub class_collisions: BTreeSet<usize>,
    /// Indices whose box projection overlaps the projection of a later box.
    pub box_overlaps: BTreeSet<usize>,
}

impl BadSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Overlapping indices that the class rule alone would not flag.
    pub fn overlaps_outside_classes(&self) -> usize {
        self.box_overlaps.difference(&self.class_collisions).count()
    }
}

/// Bad set S_nu: colliding magnitude classes (the smaller index is bad), zero
/// projections, and indices whose box projection meets a later box.
pub fn bad_set(family: &PointFamily, nu: &Direction, cfg: &ClassifyConfig) -> BadSet {
    let mut out = BadSet::default();
    let stride = cfg.stride.max(1);
    let mut classes: Vec<(i64, usize)> = Vec::new();
    for j in 0..family.n() {
        if j % stride != 0 {
            continue;
        }
        let g = family.generator(j);
        let p = nu.dot(&g).abs();
        let scale = numeric::norm(&g).hi();
        let v = p.hi() + p.lo();
        if v <= ZERO_TOL * scale {
            out.class_collisions.insert(j + 1);
            continue;
        }
        let (k, tie) = dyadic_index(v, cfg.base).expect("positive projection");
        if tie {
            out.ties.insert(j + 1);
        }
        classes.push((k, j + 1));
    }
    classes.sort();
    for w in classes.windows(2) {
        if w[0].0 == w[1].0 {
            out.class_collisions.insert(w[0].1);
        }
    }
    let n = family.n();
    for j in 1..=n {
        let a = box_u(family.curve_index(j), &family.params).project(nu.as_dd());
        for k in j + 1..=n {
            let b = box_u(family.curve_index(k), &family.params).project(nu.as_dd());
            if intervals_meet(a, b) {
                out.box_overlaps.insert(j);
                break;
            }
        }
    }
    out.indices = out.class_collisions.union(&out.box_overlaps).copied().collect();
    out
}

fn intervals_meet(a: (Dd, Dd), b: (Dd, Dd)) -> bool {
    !(a.1 < b.0 || b.1 < a.0)
}

/// Whether the projections of box_u(n) and box_u(k) onto nu intersect.
pub fn box_projection_overlap(n: usize, k: usize, nu: &Direction, params: &CurveParams) -> Result<bool> {
    if n == k {
        return Err(Error::InvalidParams("box_projection_overlap needs n != k".into()));
    }
    let a = box_u(n, params).project(nu.as_dd());
    let b = box_u(k, params).project(nu.as_dd());
    Ok(intervals_meet(a, b))
}

/// Hyperplane {x : <normal, x> = offset}.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    pub normal: Direction,
    pub offset: Dd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneJson {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Plane {
    pub fn to_json(&self) -> PlaneJson {
        PlaneJson { normal: self.normal.as_f64(), offset: self.offset.hi() + self.offset.lo() }
    }
}

/// Number of centers within `radius` of the plane.
pub fn plane_incidence(centers: &[Vec<Dd>], radius: f64, plane: &Plane) -> usize {
    let rad = dd(radius);
    centers.iter().filter(|p| (plane.normal.dot(p) - plane.offset).abs() <= rad).count()
}

/// Plane through d centers, or None when they are degenerate.
pub fn plane_through(points: &[&[Dd]]) -> Option<Plane> {
    let d = points[0].len();
    let normal = match d {
        2 => {
            let v = numeric::sub(points[1], points[0]);
            vec![-v[1], v[0]]
        }
        3 => {
            let a = numeric::sub(points[1], points[0]);
            let b = numeric::sub(points[2], points[0]);
            numeric::cross3(&a, &b)
        }
        _ => return None,
    };
    let normal = Direction::from_dd(&normal).ok()?;
    let offset = normal.dot(points[0]);
    Some(Plane { normal, offset })
}

#[derive(Debug, Clone)]
pub struct PlaneSearch {
    pub max: usize,
    pub witness: Option<Plane>,
    pub exhaustive: bool,
    pub candidates: usize,
}

/// Maximum plane incidence over planes spanned by d-tuples of centers
/// (exhaustive when there are at most 256 centers), else over a sampled family.
pub fn max_plane_incidence(
    centers: &[Vec<Dd>],
    radius: f64,
    budget: usize,
    seed: u64,
) -> Result<PlaneSearch> {
    max_plane_incidence_mode(centers, radius, budget, seed, centers.len() <= 256)
}

pub fn max_plane_incidence_mode(
    centers: &[Vec<Dd>],
    radius: f64,
    budget: usize,
    seed: u64,
    exhaustive: bool,
) -> Result<PlaneSearch> {
    if budget == 0 {
        return Err(Error::InvalidParams("plane search budget must be positive".into()));
    }
    if centers.is_empty() {
        return Ok(PlaneSearch { max: 0, witness: None, exhaustive: true, candidates: 0 });
    }
    let d = centers[0].len();
    if !(d == 2 || d == 3) {
        return Err(Error::InvalidParams("plane search supports d = 2, 3".into()));
    }
    let n = centers.len();
    // a single center (or an all-degenerate set) meets some plane
    let base = PlaneSearch {
        max: 1,
        witness: Some(Plane { normal: Direction::axis(d, 0), offset: centers[0][0] }),
        exhaustive,
        candidates: 0,
    };
    let best = |a: PlaneSearch, b: PlaneSearch| if b.max > a.max { b } else { a };
    if exhaustive {
        let per_first: Vec<PlaneSearch> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut local = PlaneSearch { max: 0, witness: None, exhaustive: true, candidates: 0 };
                for j in i + 1..n {
                    let tail: Box<dyn Iterator<Item = usize>> =
                        if d == 2 { Box::new(std::iter::once(usize::MAX)) } else { Box::new(j + 1..n) };
                    for k in tail {
                        let pts: Vec<&[Dd]> = if d == 2 {
                            vec![&centers[i], &centers[j]]
                        } else {
                            vec![&centers[i], &centers[j], &centers[k]]
                        };
                        local.candidates += 1;
                        if let Some(p) = plane_through(&pts) {
                            let c = plane_incidence(centers, radius, &p);
                            if c > local.max {
                                local.max = c;
                                local.witness = Some(p);
                            }
                        }
                    }
                }
                local
            })
            .collect();
        let total: usize = per_first.iter().map(|s| s.candidates).sum();
        let mut out = per_first.into_iter().fold(base, best);
        out.candidates = total;
        out.exhaustive = true;
        return Ok(out);
    }
    // sampled: coordinate planes and random normals through each center, then random d-tuples
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut planes: Vec<Plane> = Vec::new();
    for c in centers {
        for j in 0..d {
            let normal = Direction::axis(d, j);
            let offset = normal.dot(c);
            planes.push(Plane { normal, offset });
        }
        if planes.len() >= budget {
            break;
        }
    }
    let random_normals: Vec<Direction> = (0..8).map(|_| random_direction(d, &mut rng)).collect();
    'outer: for c in centers {
        for normal in &random_normals {
            if planes.len() >= budget / 2 {
                break 'outer;
            }
            planes.push(Plane { normal: normal.clone(), offset: normal.dot(c) });
        }
    }
    while planes.len() < budget {
        let idx: Vec<usize> = (0..d).map(|_| rng.random_range(0..n)).collect();
        let pts: Vec<&[Dd]> = idx.iter().map(|&i| centers[i].as_slice()).collect();
        match plane_through(&pts) {
            Some(p) => planes.push(p),
            None => {
                // keep the loop finite on degenerate draws
                planes.push(Plane { normal: Direction::axis(d, 0), offset: centers[idx[0]][0] });
            }
        }
    }
    let counts: Vec<usize> = planes.par_iter().map(|p| plane_incidence(centers, radius, p)).collect();
    let mut out = PlaneSearch { max: 0, witness: None, exhaustive: false, candidates: planes.len() };
    for (p, c) in planes.into_iter().zip(counts) {
        if c > out.max {
            out.max = c;
            out.witness = Some(p);
        }
    }
    Ok(out)
}

/// #{q in Q : |<nu, q> - lambda| <= 1/R}.
pub fn slab_count(lattice: &SubsetSumLattice, nu: &Direction, lambda: Dd, r: f64) -> usize {
    let one = dd(1.0);
    let rr = dd(r);
    lattice.positions().filter(|q| ((nu.dot(q) - lambda) * rr).abs() <= one).count()
}

/// Slab-count profile sampled at the interval endpoints where K_nu can change.
#[derive(Debug, Clone)]
pub struct IncidenceProfile {
    pub direction: Direction,
    pub samples: Vec<(Dd, usize)>,
}

impl IncidenceProfile {
    pub fn max(&self) -> (usize, Option<Dd>) {
        let mut best = (0, None);
        for (l, c) in &self.samples {
            if *c > best.0 {
                best = (*c, Some(*l));
            }
        }
        best
    }
}

/// Exact K_nu profile: counts at every left endpoint lambda = <nu, q> - 1/R.
pub fn slab_profile(lattice: &SubsetSumLattice, nu: &Direction, r: f64) -> IncidenceProfile {
    let rr = dd(r);
    // projections in units of 1/R
    let mut s: Vec<Dd> = lattice.positions().map(|q| nu.dot(q) * rr).collect();
    s.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let mut samples = Vec::with_capacity(s.len());
    let mut hi = 0;
    for i in 0..s.len() {
        // the window [s_i, s_i + 2] holds exactly the balls meeting lambda = s_i - 1
        while hi < s.len() && s[hi] - s[i] <= dd(2.0) {
            hi += 1;
        }
        samples.push(((s[i] - dd(1.0)) / rr, hi - i));
    }
    IncidenceProfile { direction: nu.clone(), samples }
}

/// All pairwise distances (m != n) exceed 1/R.
pub fn separation_check(family: &PointFamily) -> bool {
    family.is_separated()
}

/// Whether the lattice can be resolved at scale 1/R in double-double.
pub fn resolvable(lattice: &SubsetSumLattice, r: f64) -> bool {
    r * lattice.max_norm().max(1e-300) <= DD_SCALE_LIMIT
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Distinctness {
    pub groups: usize,
    pub pairs_checked: usize,
    pub violations: usize,
    /// Smallest gap between projected subset sums agreeing on S_nu, in units of 1/R.
    pub min_gap: Option<f64>,
}

/// Projected subset sums whose coefficients agree on the bad set are more than
/// 1/R apart.
pub fn projected_distinctness(
    lattice: &SubsetSumLattice,
    nu: &Direction,
    bad: &BadSet,
    r: f64,
) -> Result<Distinctness> {
    if !resolvable(lattice, r) {
        return Err(Error::PrecisionExceeded { scale: r * lattice.max_norm(), limit: DD_SCALE_LIMIT });
    }
    let mask: u64 = bad.indices.iter().fold(0, |m, &j| m | 1u64 << (j - 1));
    let rr = dd(r);
    let mut keyed: Vec<(u64, Dd)> =
        lattice.bits.iter().zip(lattice.positions()).map(|(b, q)| (b & mask, nu.dot(q) * rr)).collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.partial_cmp(&b.1).expect("finite")));
    let mut out = Distinctness::default();
    let mut prev_key = None;
    for w in keyed.windows(2) {
        if prev_key != Some(w[0].0) {
            out.groups += 1;
            prev_key = Some(w[0].0);
        }
        if w[0].0 == w[1].0 {
            out.pairs_checked += 1;
            let gap = w[1].1 - w[0].1;
            let g = gap.hi() + gap.lo();
            if !(gap > dd(1.0)) {
                out.violations += 1;
            }
            out.min_gap = Some(out.min_gap.map_or(g, |m: f64| m.min(g)));
        }
    }
    Ok(out)
}

pub fn random_direction(d: usize, rng: &mut ChaCha8Rng) -> Direction {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        if let Ok(dir) = Direction::new(&v) {
            return dir;
        }
    }
}

pub fn random_directions(d: usize, count: usize, seed: u64) -> Vec<Direction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_direction(d, &mut rng)).collect()
}

/// Coordinate axes, normals of lines/planes through pairs and d-tuples of
/// {xi_0, ..., xi_N}, and each normal perturbed by +-1e-6 per coordinate.
pub fn adversarial_directions(family: &PointFamily) -> Vec<Direction> {
    let d = family.d();
    let mut pts: Vec<Vec<Dd>> = vec![vec![dd(0.0); d]];
    pts.extend(family.generators());
    let mut normals: Vec<Direction> = (0..d).map(|j| Direction::axis(d, j)).collect();
    let n = pts.len();
    for i in 0..n {
        for j in i + 1..n {
            if d == 2 {
                if let Some(p) = plane_through(&[&pts[i], &pts[j]]) {
                    normals.push(p.normal);
                }
            } else {
                let diff = numeric::sub(&pts[j], &pts[i]);
                for a in 0..d {
                    let axis = Direction::axis(d, a);
                    if let Ok(dir) = Direction::from_dd(&numeric::cross3(&diff, axis.as_dd())) {
                        normals.push(dir);
                    }
                }
                for k in j + 1..n {
                    if let Some(p) = plane_through(&[&pts[i], &pts[j], &pts[k]]) {
                        normals.push(p.normal);
                    }
                }
            }
        }
    }
    let mut out = Vec::with_capacity(normals.len() * (1 + 2 * d));
    for nrm in normals {
        for j in 0..d {
            for s in [-1e-6, 1e-6] {
                let mut v = nrm.as_dd().to_vec();
                v[j] += dd(s);
                if let Ok(p) = Direction::from_dd(&v) {
                    out.push(p);
                }
            }
        }
        out.push(nrm);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlaneMode {
    Auto,
    Exhaustive,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub dirs: usize,
    pub seed: u64,
    pub classify: ClassifyConfig,
    pub planes: PlaneMode,
    pub plane_budget: usize,
    /// Directions on which the 1/R-scale checks (slab counts, distinctness) run.
    pub resolution_dirs: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            dirs: 10_000,
            seed: 7,
            classify: ClassifyConfig::default(),
            planes: PlaneMode::Auto,
            plane_budget: 20_000,
            resolution_dirs: 512,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncidenceReport {
    pub d: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub c: f64,
    pub b: f64,
    pub directions: usize,
    pub max_bad_set: usize,
    /// 2^{max |S_nu|}, reported next to the plane count.
    pub multiset_bound: usize,
    pub worst_direction: Vec<f64>,
    pub violations: usize,
    pub tie_directions: usize,
    pub tie_retest_failures: usize,
    /// Directions where a box overlap flags an index the class rule does not.
    pub overlap_outside_class_dirs: usize,
    pub separated: bool,
    pub min_separation_times_r: Option<f64>,
    pub max_plane_count: Option<usize>,
    pub plane_bound: usize,
    pub plane_mode: String,
    pub worst_plane: Option<PlaneJson>,
    pub max_slab_count: Option<usize>,
    pub distinctness_violations: Option<usize>,
    pub min_distinct_gap: Option<f64>,
    pub resolution_checks: String,
    pub passed: bool,
}

/// Runs bad-set, separation, plane and 1/R-scale checks for one family.
pub fn run_suite(family: &PointFamily, cfg: &SuiteConfig) -> Result<IncidenceReport> {
    let d = family.d();
    let mut dirs = random_directions(d, cfg.dirs, cfg.seed);
    dirs.extend(adversarial_directions(family));
    let bads: Vec<BadSet> = dirs.par_iter().map(|nu| bad_set(family, nu, &cfg.classify)).collect();
    let mut max_bad = 0;
    let mut worst = 0;
    let mut violations = 0;
    let mut tie_dirs = 0;
    let mut tie_fail = 0;
    let mut overlap_dirs = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37_79b9_7f4a_7c15);
    for (i, b) in bads.iter().enumerate() {
        if b.len() > max_bad {
            max_bad = b.len();
            worst = i;
        }
        if b.len() > d - 1 {
            violations += 1;
        }
        if b.overlaps_outside_classes() > 0 {
            overlap_dirs += 1;
        }
        if !b.ties.is_empty() {
            tie_dirs += 1;
            for _ in 0..4 {
                let kick = random_direction(d, &mut rng);
                let v: Vec<Dd> =
                    dirs[i].as_dd().iter().zip(kick.as_dd()).map(|(a, k)| *a + *k * 1e-9).collect();
                let nu = Direction::from_dd(&v)?;
                if bad_set(family, &nu, &cfg.classify).len() > d - 1 {
                    tie_fail += 1;
                }
            }
        }
    }
    let separated = separation_check(family);
    let min_sep = family.min_separation().map(|s| s * family.r);
    let k = family.n() / 2;
    let lattice = SubsetSumLattice::from_generators(family.generators(), k)?;
    let plane_bound = 1usize << (d - 1);
    let resolved = resolvable(&lattice, family.r);
    let (mut max_plane, mut plane_mode, mut worst_plane) = (None, "skipped".to_string(), None);
    let (mut max_slab, mut dist_viol, mut min_gap) = (None, None, None);
    let resolution_checks;
    if resolved {
        let centers: Vec<Vec<Dd>> = lattice.positions().map(|p| p.to_vec()).collect();
        let exhaustive = match cfg.planes {
            PlaneMode::Auto => centers.len() <= 256 && (d == 2 || centers.len() <= 64),
            PlaneMode::Exhaustive => true,
            PlaneMode::Sampled => false,
        };
        let ps = max_plane_incidence_mode(
            &centers,
            1.0 / family.r,
            cfg.plane_budget.max(1),
            cfg.seed,
            exhaustive,
        )?;
        max_plane = Some(ps.max);
        plane_mode = if ps.exhaustive { "exhaustive".into() } else { "evidence".into() };
        worst_plane = ps.witness.map(|p| p.to_json());
        let nres = cfg.resolution_dirs.min(dirs.len());
        // adversarial directions first, then random ones
        let order: Vec<usize> = (cfg.dirs..dirs.len()).chain(0..cfg.dirs).take(nres).collect();
        let res: Vec<(usize, Distinctness)> = order
            .par_iter()
            .map(|&i| {
                let slab = slab_profile(&lattice, &dirs[i], family.r).max().0;
                let dist = projected_distinctness(&lattice, &dirs[i], &bads[i], family.r)
                    .expect("resolvable lattice");
                (slab, dist)
            })
            .collect();
        max_slab = res.iter().map(|r| r.0).max();
        dist_viol = Some(res.iter().map(|r| r.1.violations).sum());
        min_gap = res.iter().filter_map(|r| r.1.min_gap).reduce(f64::min);
        resolution_checks = format!("{nres} directions");
    } else {
        resolution_checks = "skipped: 1/R below double-double resolution".into();
    }
    let passed = violations == 0
        && tie_fail == 0
        && separated
        && max_plane.is_none_or(|m| m <= plane_bound)
        && max_slab.is_none_or(|m| m <= plane_bound)
        && dist_viol.is_none_or(|v| v == 0);
    Ok(IncidenceReport {
        d,
        n: family.n(),
        c: family.params.c,
        b: family.params.b,
        directions: dirs.len(),
        max_bad_set: max_bad,
        multiset_bound: 1 << max_bad,
        worst_direction: dirs.get(worst).map(|x| x.as_f64()).unwrap_or_default(),
        violations,
        tie_directions: tie_dirs,
        tie_retest_failures: tie_fail,
        overlap_outside_class_dirs: overlap_dirs,
        separated,
        min_separation_times_r: min_sep,
        max_plane_count: max_plane,
        plane_bound,
        plane_mode,
        worst_plane,
        max_slab_count: max_slab,
        distinctness_violations: dist_viol,
        min_distinct_gap: min_gap,
        resolution_checks,
        passed,
    })
}
