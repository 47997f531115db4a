//! Deterministic lazy-walk diffusion, truncation, level sets, conductance and
//! Lovász–Simonovits curves.
//!
//! The lazy walk moves `1/2d` of a vertex's mass along each incident edge and
//! keeps the rest in place. Masses are generic over [`Mass`]: `f64` for
//! benchmarks and [`Exact`] rationals for verification runs. Sums are always
//! accumulated in ascending source-id order, so floating-point results do not
//! depend on hash order or thread count.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::graph::{BoundedDegreeGraph, VertexSet};

/// Relative slack applied to `rho` before the `<= rho` truncation test in
/// floating-point mode.
pub const FLOAT_CUTOFF_SLACK: f64 = 1e-12;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DiffusionError {
    #[error("level set of size {k} requested on a graph with {n} vertices")]
    LevelSetTooLarge { k: usize, n: usize },
    #[error("conductance undefined for a set of size {size} in a graph with {n} vertices")]
    DegenerateSet { size: usize, n: usize },
    #[error("chord position {x} outside [1, {max}]")]
    ChordOutOfRange { x: usize, max: usize },
}

/// Arithmetic used for diffusion masses.
pub trait Mass: Clone + PartialOrd + fmt::Debug + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    /// `self * num / den`.
    fn scale(&self, num: u64, den: u64) -> Self;
    fn add_assign(&mut self, other: &Self);
    /// Value `c` such that a mass survives truncation at `rho` iff it is `> c`.
    fn cutoff(rho: f64) -> Self;
    fn to_f64(&self) -> f64;
    /// Total order used for ranking; masses are never NaN.
    fn total_cmp(&self, other: &Self) -> Ordering {
        self.partial_cmp(other).expect("masses are totally ordered")
    }
}

impl Mass for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn scale(&self, num: u64, den: u64) -> Self {
        *self * num as f64 / den as f64
    }
    fn add_assign(&mut self, other: &Self) {
        *self += *other;
    }
    fn cutoff(rho: f64) -> Self {
        rho * (1.0 + FLOAT_CUTOFF_SLACK)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn total_cmp(&self, other: &Self) -> Ordering {
        f64::total_cmp(self, other)
    }
}

/// Exact rational mass.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Exact(pub BigRational);

impl Exact {
    pub fn new(num: i64, den: i64) -> Self {
        Exact(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }
}

impl Mass for Exact {
    fn zero() -> Self {
        Exact(BigRational::zero())
    }
    fn one() -> Self {
        Exact(BigRational::from_integer(BigInt::from(1)))
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
    fn scale(&self, num: u64, den: u64) -> Self {
        Exact(&self.0 * BigRational::new(BigInt::from(num), BigInt::from(den)))
    }
    fn add_assign(&mut self, other: &Self) {
        self.0 += &other.0;
    }
    fn cutoff(rho: f64) -> Self {
        // The exact binary value of the configured threshold.
        Exact(BigRational::from_float(rho).expect("rho is finite"))
    }
    fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
    fn total_cmp(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }
}

/// Sparse nonnegative vertex-indexed vector with strictly positive stored
/// entries, kept sorted by vertex id.
#[derive(Clone, Debug, PartialEq)]
pub struct MassVector<M> {
    entries: Vec<(usize, M)>,
}

impl<M: Mass> MassVector<M> {
    pub fn empty() -> Self {
        Self { entries: Vec::new() }
    }

    pub fn unit(v: usize) -> Self {
        Self { entries: vec![(v, M::one())] }
    }

    /// Builds a vector from arbitrary `(vertex, mass)` pairs; zero masses
    /// are dropped. Panics on duplicate vertices.
    pub fn from_entries(entries: impl IntoIterator<Item = (usize, M)>) -> Self {
        let mut entries: Vec<_> = entries.into_iter().filter(|(_, m)| !m.is_zero()).collect();
        entries.sort_by_key(|e| e.0);
        assert!(entries.windows(2).all(|w| w[0].0 < w[1].0), "duplicate vertex in mass vector");
        Self { entries }
    }

    pub fn get(&self, v: usize) -> Option<&M> {
        self.entries.binary_search_by_key(&v, |e| e.0).ok().map(|i| &self.entries[i].1)
    }

    pub fn contains(&self, v: usize) -> bool {
        self.entries.binary_search_by_key(&v, |e| e.0).is_ok()
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &M)> + '_ {
        self.entries.iter().map(|(v, m)| (*v, m))
    }

    pub fn support(&self) -> VertexSet {
        VertexSet::from_sorted(self.entries.iter().map(|e| e.0).collect())
    }

    pub fn total(&self) -> M {
        let mut acc = M::zero();
        for (_, m) in &self.entries {
            acc.add_assign(m);
        }
        acc
    }

    /// Mass on the vertices of `set`.
    pub fn mass_in(&self, set: &VertexSet) -> M {
        let mut acc = M::zero();
        for (v, m) in &self.entries {
            if set.contains(*v) {
                acc.add_assign(m);
            }
        }
        acc
    }

    /// Supported vertices ordered by mass descending, ties by ascending id.
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.entries.len()).collect();
        idx.sort_by(|&a, &b| {
            let (va, ma) = &self.entries[a];
            let (vb, mb) = &self.entries[b];
            mb.total_cmp(ma).then(va.cmp(vb))
        });
        idx.into_iter().map(|i| self.entries[i].0).collect()
    }

    pub fn to_f64(&self) -> MassVector<f64> {
        MassVector { entries: self.entries.iter().map(|(v, m)| (*v, m.to_f64())).collect() }
    }
}

/// Pre-converted truncation threshold.
#[derive(Clone, Debug)]
pub struct Truncation<M> {
    rho: f64,
    cutoff: M,
}

impl<M: Mass> Truncation<M> {
    pub fn new(rho: f64) -> Self {
        Self { rho, cutoff: M::cutoff(rho) }
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    #[inline]
    pub fn survives(&self, m: &M) -> bool {
        m > &self.cutoff
    }

    /// Largest support a truncated vector of total mass at most one can have.
    pub fn max_support(&self) -> usize {
        (1.0 / self.rho).floor() as usize
    }
}

/// One step of the lazy walk, `M p`.
pub fn lazy_step<M: Mass>(g: &BoundedDegreeGraph, p: &MassVector<M>) -> MassVector<M> {
    let two_d = 2 * g.degree_bound() as u64;
    let mut contrib: Vec<(usize, M)> = Vec::with_capacity(p.entries.len() * (g.degree_bound() + 1));
    for (x, m) in &p.entries {
        let nbrs = g.neighbors(*x);
        let stay = two_d - nbrs.len() as u64;
        contrib.push((*x, m.scale(stay, two_d)));
        if !nbrs.is_empty() {
            let share = m.scale(1, two_d);
            for &y in nbrs {
                contrib.push((y, share.clone()));
            }
        }
    }
    // Stable: per target, contributions stay in ascending source order.
    contrib.sort_by_key(|e| e.0);
    let mut entries: Vec<(usize, M)> = Vec::with_capacity(contrib.len());
    for (v, m) in contrib {
        match entries.last_mut() {
            Some((last, acc)) if *last == v => acc.add_assign(&m),
            _ => entries.push((v, m)),
        }
    }
    entries.retain(|(_, m)| !m.is_zero());
    MassVector { entries }
}

/// Zeroes every coordinate whose value is at most `rho`.
pub fn truncate<M: Mass>(p: &MassVector<M>, rho: f64) -> MassVector<M> {
    truncate_with(p.clone(), &Truncation::new(rho))
}

pub fn truncate_with<M: Mass>(mut p: MassVector<M>, trunc: &Truncation<M>) -> MassVector<M> {
    p.entries.retain(|(_, m)| trunc.survives(m));
    p
}

/// `t`-step truncated diffusion from the unit vector at `v`.
pub fn truncated_diffusion<M: Mass>(g: &BoundedDegreeGraph, v: usize, t: usize, rho: f64) -> MassVector<M> {
    let trunc = Truncation::new(rho);
    let mut p = MassVector::unit(v);
    for _ in 0..t {
        if p.is_empty() {
            break;
        }
        p = truncate_with(lazy_step(g, &p), &trunc);
    }
    p
}

/// Truncated diffusion vectors for `t = 0..=steps`.
pub fn truncated_trajectory<M: Mass>(
    g: &BoundedDegreeGraph,
    v: usize,
    steps: usize,
    trunc: &Truncation<M>,
) -> Vec<MassVector<M>> {
    let mut out = Vec::with_capacity(steps + 1);
    out.push(MassVector::unit(v));
    for t in 1..=steps {
        let next =
            if out[t - 1].is_empty() { MassVector::empty() } else { truncate_with(lazy_step(g, &out[t - 1]), trunc) };
        out.push(next);
    }
    out
}

/// Untruncated `M^t p`.
pub fn diffuse<M: Mass>(g: &BoundedDegreeGraph, p: &MassVector<M>, t: usize) -> MassVector<M> {
    let mut p = p.clone();
    for _ in 0..t {
        p = lazy_step(g, &p);
    }
    p
}

/// Total ranking of all `n` vertices: supported vertices by (mass desc, id
/// asc), then unsupported vertices by id.
pub fn full_ranking<M: Mass>(p: &MassVector<M>, n: usize) -> Vec<usize> {
    let mut order = p.ranking();
    order.extend((0..n).filter(|&v| !p.contains(v)));
    order
}

/// The `k` heaviest vertices of `p` (ties by id).
pub fn level_set<M: Mass>(p: &MassVector<M>, k: usize, n: usize) -> Result<VertexSet, DiffusionError> {
    if k > n {
        return Err(DiffusionError::LevelSetTooLarge { k, n });
    }
    let mut ranked = p.ranking();
    if k <= ranked.len() {
        ranked.truncate(k);
    } else {
        let missing = k - ranked.len();
        ranked.extend((0..n).filter(|&v| !p.contains(v)).take(missing));
    }
    Ok(ranked.into_iter().collect())
}

/// `E(S, S̄) / (2 · min(|S|, |S̄|) · d)` kept as an exact integer ratio.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Conductance {
    pub cut: usize,
    pub denom: usize,
}

impl Conductance {
    pub fn new(cut: usize, size: usize, n: usize, d: usize) -> Result<Self, DiffusionError> {
        if size == 0 || size >= n {
            return Err(DiffusionError::DegenerateSet { size, n });
        }
        Ok(Self { cut, denom: 2 * size.min(n - size) * d })
    }

    pub fn value(&self) -> f64 {
        self.cut as f64 / self.denom as f64
    }

    /// Exact `self <= x`.
    pub fn at_most(&self, x: f64) -> bool {
        cmp_ratio_f64(self.cut as u64, self.denom as u64, x) != Ordering::Greater
    }

    /// Exact `self < x`.
    pub fn less_than(&self, x: f64) -> bool {
        cmp_ratio_f64(self.cut as u64, self.denom as u64, x) == Ordering::Less
    }
}

/// Exact comparison of `a / b` against a finite nonnegative float.
pub fn cmp_ratio_f64(a: u64, b: u64, x: f64) -> Ordering {
    assert!(b > 0 && x.is_finite());
    if x < 0.0 {
        return Ordering::Greater;
    }
    if x == 0.0 {
        return a.cmp(&0);
    }
    let bits = x.to_bits();
    let raw_exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mant, exp) = if raw_exp == 0 { (frac, -1074) } else { (frac | (1u64 << 52), raw_exp - 1075) };
    // a / b  vs  mant · 2^exp
    let (lhs, rhs) = if exp >= 0 {
        (BigUint::from(a), (BigUint::from(b) * BigUint::from(mant)) << exp as usize)
    } else {
        (BigUint::from(a) << (-exp) as usize, BigUint::from(b) * BigUint::from(mant))
    };
    lhs.cmp(&rhs)
}

/// Number of edges leaving `set`.
pub fn cut_size(g: &BoundedDegreeGraph, set: &VertexSet) -> usize {
    set.iter().map(|u| g.neighbors(u).iter().filter(|&&w| !set.contains(w)).count()).sum()
}

pub fn conductance(g: &BoundedDegreeGraph, set: &VertexSet) -> Result<Conductance, DiffusionError> {
    Conductance::new(cut_size(g, set), set.len(), g.num_vertices(), g.degree_bound())
}

/// Cut sizes of every prefix of `order`: entry `i` is `E(S_i, S̄_i)` where
/// `S_i` holds the first `i` vertices (entry 0 is the empty set).
pub fn prefix_cuts(g: &BoundedDegreeGraph, order: &[usize]) -> Vec<usize> {
    let mut inside = std::collections::HashSet::with_capacity(order.len());
    let mut cuts = Vec::with_capacity(order.len() + 1);
    let mut cut = 0usize;
    cuts.push(0);
    for &u in order {
        let internal = g.neighbors(u).iter().filter(|w| inside.contains(*w)).count();
        cut = cut + g.degree(u) - 2 * internal;
        inside.insert(u);
        cuts.push(cut);
    }
    cuts
}

/// Lovász–Simonovits curve `x ↦ I(p, x)`: the sum of the `x` largest masses,
/// linearly interpolated between integers.
#[derive(Clone, Debug, PartialEq)]
pub struct LsCurve {
    n: usize,
    /// Masses in nonincreasing order.
    masses: Vec<f64>,
    prefix: Vec<f64>,
}

impl LsCurve {
    pub fn new<M: Mass>(p: &MassVector<M>, n: usize) -> Self {
        let mut masses: Vec<f64> = p.iter().map(|(_, m)| m.to_f64()).collect();
        masses.sort_by(|a, b| b.total_cmp(a));
        let mut prefix = Vec::with_capacity(masses.len() + 1);
        let mut acc = 0.0;
        prefix.push(0.0);
        for m in &masses {
            acc += m;
            prefix.push(acc);
        }
        Self { n, masses, prefix }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Breakpoints `(i, I(p, i))` for `i = 0..=|supp p|`; the curve is flat
    /// beyond the last one.
    pub fn breakpoints(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.prefix.iter().copied().enumerate()
    }

    pub fn total(&self) -> f64 {
        *self.prefix.last().unwrap()
    }

    /// Successive slopes, i.e. the masses in nonincreasing order.
    pub fn slopes(&self) -> Vec<f64> {
        self.masses.clone()
    }

    pub fn eval(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, self.n as f64);
        let last = self.prefix.len() - 1;
        if x >= last as f64 {
            return self.total();
        }
        let i = x.floor() as usize;
        let frac = x - i as f64;
        self.prefix[i] + frac * (self.prefix[i + 1] - self.prefix[i])
    }
}

pub fn ls_curve<M: Mass>(p: &MassVector<M>, n: usize) -> LsCurve {
    LsCurve::new(p, n)
}

/// Both sides of the Lovász–Simonovits chord inequality at position `x`:
/// `lhs = I(Mp, x)` and `rhs = ½(I(p, x − 2x̄Φ(S_x)) + I(p, x + 2x̄Φ(S_x)))`
/// where `S_x` is the `x`-vertex level set of `Mp` and `x̄ = min(x, n − x)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChordCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub conductance: f64,
}

pub fn ls_check_chord<M: Mass>(
    g: &BoundedDegreeGraph,
    p: &MassVector<M>,
    x: usize,
) -> Result<ChordCheck, DiffusionError> {
    let n = g.num_vertices();
    if x == 0 || x >= n {
        return Err(DiffusionError::ChordOutOfRange { x, max: n.saturating_sub(1) });
    }
    let mp = lazy_step(g, p);
    let s_x = level_set(&mp, x, n)?;
    let phi = conductance(g, &s_x)?.value();
    let xbar = x.min(n - x) as f64;
    let before = LsCurve::new(p, n);
    let after = LsCurve::new(&mp, n);
    let x = x as f64;
    let delta = 2.0 * xbar * phi;
    Ok(ChordCheck {
        lhs: after.eval(x),
        rhs: 0.5 * (before.eval(x - delta) + before.eval(x + delta)),
        conductance: phi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_cycle, gen_grid, gen_path};

    fn ex(num: i64, den: i64) -> Exact {
        Exact::new(num, den)
    }

    #[test]
    fn lazy_step_on_p3_is_exact() {
        let g = gen_path(3).unwrap();
        let p = lazy_step(&g, &MassVector::<Exact>::unit(1));
        assert_eq!(p, MassVector::from_entries([(0, ex(1, 4)), (1, ex(1, 2)), (2, ex(1, 4))]));
    }

    #[test]
    fn two_steps_on_four_cycle() {
        let g = gen_cycle(4).unwrap();
        let p = diffuse(&g, &MassVector::<Exact>::unit(0), 2);
        assert_eq!(p, MassVector::from_entries([(0, ex(3, 8)), (1, ex(1, 4)), (2, ex(1, 8)), (3, ex(1, 4))]));
    }

    #[test]
    fn uniform_vector_is_stationary() {
        let g = gen_grid(3, 4).unwrap();
        let n = g.num_vertices() as i64;
        let p = MassVector::from_entries((0..g.num_vertices()).map(|v| (v, ex(1, n))));
        assert_eq!(lazy_step(&g, &p), p);
    }

    #[test]
    fn truncation_boundary_is_inclusive() {
        let p = MassVector::from_entries([(0, 0.5), (1, 0.3), (2, 0.2)]);
        assert_eq!(truncate(&p, 0.25), MassVector::from_entries([(0, 0.5), (1, 0.3)]));
        let q = MassVector::from_entries([(0, ex(1, 2))]);
        assert!(truncate(&q, 0.5).is_empty());
        assert!(truncate(&MassVector::from_entries([(0, 0.5)]), 0.5).is_empty());
        assert_eq!(truncate(&p, 0.1), p);
    }

    #[test]
    fn truncated_diffusion_examples() {
        let g = gen_path(3).unwrap();
        assert_eq!(truncated_diffusion::<Exact>(&g, 2, 0, 0.3), MassVector::unit(2));
        assert_eq!(truncated_diffusion::<Exact>(&g, 1, 1, 0.3), MassVector::from_entries([(1, ex(1, 2))]));
        assert_eq!(
            truncated_diffusion::<Exact>(&g, 1, 1, 0.1),
            MassVector::from_entries([(0, ex(1, 4)), (1, ex(1, 2)), (2, ex(1, 4))])
        );
    }

    #[test]
    fn level_sets_break_ties_by_id() {
        let p = MassVector::from_entries([(0, 0.5), (1, 0.3), (2, 0.2)]);
        assert_eq!(level_set(&p, 2, 5).unwrap().as_slice(), &[0, 1]);
        let tie = MassVector::from_entries([(4, 0.4), (2, 0.4)]);
        assert_eq!(level_set(&tie, 1, 5).unwrap().as_slice(), &[2]);
        assert!(level_set(&p, 0, 5).unwrap().is_empty());
        // Beyond the support, unsupported vertices follow in id order.
        assert_eq!(level_set(&tie, 4, 5).unwrap().as_slice(), &[0, 1, 2, 4]);
        assert_eq!(level_set(&p, 6, 5), Err(DiffusionError::LevelSetTooLarge { k: 6, n: 5 }));
    }

    #[test]
    fn conductance_examples() {
        let c6 = gen_cycle(6).unwrap();
        let phi = conductance(&c6, &[0, 1, 2].into_iter().collect()).unwrap();
        assert_eq!((phi.cut, phi.denom), (2, 12));
        let p3 = gen_path(3).unwrap();
        assert_eq!(conductance(&p3, &VertexSet::singleton(0)).unwrap().value(), 0.25);
        let c4 = gen_cycle(4).unwrap();
        assert_eq!(conductance(&c4, &[0, 2].into_iter().collect()).unwrap().value(), 0.5);
        assert!(conductance(&c4, &VertexSet::new()).is_err());
        assert!(conductance(&c4, &(0..4).collect()).is_err());
    }

    #[test]
    fn exact_ratio_comparison() {
        assert_eq!(cmp_ratio_f64(1, 5, 0.2), Ordering::Less); // 0.2f64 is slightly above 1/5
        assert_eq!(cmp_ratio_f64(1, 4, 0.25), Ordering::Equal);
        assert_eq!(cmp_ratio_f64(3, 4, 0.25), Ordering::Greater);
        assert_eq!(cmp_ratio_f64(0, 4, 0.0), Ordering::Equal);
        assert_eq!(cmp_ratio_f64(1, 1 << 40, 1e-300), Ordering::Greater);
        assert_eq!(cmp_ratio_f64(7, 3, 1e10), Ordering::Less);
        let c = Conductance { cut: 1, denom: 4 };
        assert!(c.at_most(0.25) && !c.less_than(0.25));
    }

    #[test]
    fn prefix_cuts_match_direct_counts() {
        let g = gen_grid(4, 4).unwrap();
        let order = [5, 6, 9, 10, 0, 15, 3];
        let cuts = prefix_cuts(&g, &order);
        for i in 0..=order.len() {
            let set: VertexSet = order[..i].iter().copied().collect();
            assert_eq!(cuts[i], cut_size(&g, &set));
        }
    }

    #[test]
    fn ls_curve_examples() {
        let p = MassVector::from_entries([(0, 0.6), (1, 0.4)]);
        let c = ls_curve(&p, 4);
        assert_eq!(c.eval(1.0), 0.6);
        assert_eq!(c.eval(2.0), 1.0);
        assert!((c.eval(1.5) - 0.8).abs() < 1e-15);
        assert_eq!(c.eval(4.0), 1.0);
        assert_eq!(c.eval(0.0), 0.0);
        let n = 8;
        let u = MassVector::from_entries((0..n).map(|v| (v, 1.0 / n as f64)));
        let cu = ls_curve(&u, n);
        for x in 0..=n {
            assert!((cu.eval(x as f64) - x as f64 / n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn chord_on_uniform_vector_is_tight() {
        let g = gen_grid(3, 3).unwrap();
        let n = g.num_vertices();
        let u = MassVector::from_entries((0..n).map(|v| (v, 1.0 / n as f64)));
        for x in 1..n {
            let c = ls_check_chord(&g, &u, x).unwrap();
            assert!((c.lhs - x as f64 / n as f64).abs() < 1e-12);
            assert!((c.rhs - c.lhs).abs() < 1e-12);
        }
        assert!(ls_check_chord(&g, &u, 0).is_err());
        assert!(ls_check_chord(&g, &u, n).is_err());
    }

    #[test]
    fn chord_on_p3_unit_vector() {
        let g = gen_path(3).unwrap();
        let c = ls_check_chord(&g, &MassVector::<f64>::unit(1), 1).unwrap();
        // I(Mp, 1) = 1/2; S_1 = {1} has conductance 2/4, so the chord spans [0, 2].
        assert_eq!(c.lhs, 0.5);
        assert_eq!(c.rhs, 0.5);
    }
}
