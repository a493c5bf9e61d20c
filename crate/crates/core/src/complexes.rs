//! Bounded cochain complexes of finite free modules (differential of degree
//! +1), chain maps, chain homotopies and their cohomology.
//!
//! Sign conventions:
//! * cone: `Cone^n = C^{n+1} ⊕ D^n`, `d(c, x) = (-d c, f c + d x)`;
//! * shift: `C[k]^n = C^{n+k}` with differential `(-1)^k d`;
//! * tensor: `d(x ⊗ y) = dx ⊗ y + (-1)^{|x|} x ⊗ dy`;
//! * Hom: `(δf)_p = d f_p - (-1)^k f_{p+1} d` for `f` of degree `k`;
//! * homotopy `h: f ≃ g`: `f(n) - g(n) = d(n-1) h(n) + h(n+1) d(n)`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::{
    self, column_basis_indices, elementary_divisors, kernel, LinearSystem, Matrix, SystemSolution,
};
use crate::rings::{factorize, CoefficientRing, ExactData, Scalar};

pub(crate) fn sign(k: i64) -> Scalar {
    if k.rem_euclid(2) == 0 {
        Scalar::one()
    } else {
        -Scalar::one()
    }
}

fn normalize_entries(ring: &CoefficientRing, m: Matrix) -> Result<Matrix> {
    match ring {
        CoefficientRing::PrimeField(p) => {
            for x in m.entries() {
                if (x.denom() % num_bigint::BigInt::from(*p)).is_zero() {
                    return Err(Error::NotInRing { value: x.to_string(), ring: ring.clone() });
                }
            }
            Ok(m.normalized(ring))
        }
        _ => {
            for x in m.entries() {
                ring.check_scalar(x)?;
            }
            Ok(m)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Complex {
    ring: CoefficientRing,
    lo: i64,
    ranks: Vec<usize>,
    /// `diffs[k]` is `d(lo + k)`.
    diffs: Vec<Matrix>,
}

impl Complex {
    /// A complex with `ranks[k]` in degree `lo + k` and `diffs[k] = d(lo + k)`.
    /// Shapes and coefficients are checked; `d∘d = 0` is not (see [`Complex::check`]).
    pub fn new(ring: CoefficientRing, lo: i64, ranks: Vec<usize>, diffs: Vec<Matrix>) -> Result<Self> {
        ring.check()?;
        if diffs.len() != ranks.len().saturating_sub(1) {
            return Err(Error::ShapeMismatch(format!(
                "{} ranks need {} differentials, got {}",
                ranks.len(),
                ranks.len().saturating_sub(1),
                diffs.len()
            )));
        }
        let mut checked = Vec::with_capacity(diffs.len());
        for (k, d) in diffs.into_iter().enumerate() {
            if d.shape() != (ranks[k + 1], ranks[k]) {
                return Err(Error::ShapeMismatch(format!(
                    "d({}) has shape {:?}, expected {:?}",
                    lo + k as i64,
                    d.shape(),
                    (ranks[k + 1], ranks[k])
                )));
            }
            checked.push(normalize_entries(&ring, d)?);
        }
        Ok(Complex { ring, lo, ranks, diffs: checked }.trimmed())
    }

    /// Complex given by its differentials `d(lo), d(lo+1), ...`.
    pub fn from_differentials(ring: CoefficientRing, lo: i64, diffs: Vec<Matrix>) -> Result<Self> {
        if diffs.is_empty() {
            return Err(Error::ShapeMismatch("no differentials given".into()));
        }
        let mut ranks = vec![diffs[0].cols()];
        ranks.extend(diffs.iter().map(|d| d.rows()));
        Complex::new(ring, lo, ranks, diffs)
    }

    pub fn zero(ring: CoefficientRing) -> Self {
        Complex { ring, lo: 0, ranks: Vec::new(), diffs: Vec::new() }
    }

    /// `ring^rank` in a single degree.
    pub fn concentrated(ring: CoefficientRing, degree: i64, rank: usize) -> Self {
        Complex { ring, lo: degree, ranks: vec![rank], diffs: Vec::new() }.trimmed()
    }

    /// Trusted constructor for derived complexes.
    pub(crate) fn build(
        ring: &CoefficientRing,
        lo: i64,
        hi: i64,
        rank: impl Fn(i64) -> usize,
        d: impl Fn(i64) -> Matrix,
    ) -> Complex {
        if hi < lo {
            return Complex::zero(ring.clone());
        }
        let ranks: Vec<usize> = (lo..=hi).map(&rank).collect();
        let diffs = (lo..hi)
            .map(|n| {
                let m = d(n);
                debug_assert_eq!(m.shape(), (rank(n + 1), rank(n)));
                m.normalized(ring)
            })
            .collect();
        Complex { ring: ring.clone(), lo, ranks, diffs }.trimmed()
    }

    fn trimmed(mut self) -> Self {
        while self.ranks.first() == Some(&0) {
            self.ranks.remove(0);
            if !self.diffs.is_empty() {
                self.diffs.remove(0);
            }
            self.lo += 1;
        }
        while self.ranks.last() == Some(&0) {
            self.ranks.pop();
            self.diffs.pop();
        }
        if self.ranks.is_empty() {
            self.lo = 0;
        }
        self
    }

    pub fn ring(&self) -> &CoefficientRing {
        &self.ring
    }

    /// Lowest degree with nonzero rank (0 for the zero complex).
    pub fn lo(&self) -> i64 {
        self.lo
    }

    /// Highest degree with nonzero rank (`lo - 1` for the zero complex).
    pub fn hi(&self) -> i64 {
        self.lo + self.ranks.len() as i64 - 1
    }

    pub fn is_zero(&self) -> bool {
        self.ranks.is_empty()
    }

    pub fn degrees(&self) -> std::ops::RangeInclusive<i64> {
        self.lo..=self.hi()
    }

    pub fn rank(&self, n: i64) -> usize {
        if n < self.lo || n > self.hi() {
            0
        } else {
            self.ranks[(n - self.lo) as usize]
        }
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn total_rank(&self) -> usize {
        self.ranks.iter().sum()
    }

    /// The differential `d(n)`, of shape `rank(n+1) × rank(n)`.
    pub fn d(&self, n: i64) -> Matrix {
        if n >= self.lo && n < self.hi() {
            self.diffs[(n - self.lo) as usize].clone()
        } else {
            Matrix::zeros(self.rank(n + 1), self.rank(n))
        }
    }

    pub fn differentials(&self) -> &[Matrix] {
        &self.diffs
    }

    /// Errors with the first degree where `d∘d ≠ 0`.
    pub fn check(&self) -> Result<()> {
        for n in self.lo..self.hi() - 1 {
            if !(&self.d(n + 1) * &self.d(n)).is_zero_in(&self.ring) {
                return Err(Error::InvalidComplex(format!("d∘d ≠ 0 at degree {n}")));
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> bool {
        self.check().is_ok()
    }

    pub fn identity(&self) -> ChainMap {
        ChainMap::identity(self)
    }

    /// Position of the first basis element of degree `n` in the total basis.
    pub fn offset(&self, n: i64) -> usize {
        (self.lo..n.min(self.hi() + 1)).map(|k| self.rank(k)).sum()
    }

    /// Degree of every element of the total basis (degree-sorted).
    pub fn basis_degrees(&self) -> Vec<i64> {
        self.degrees().flat_map(|n| std::iter::repeat_n(n, self.rank(n))).collect()
    }

    /// The differential as one square matrix on the total basis.
    pub fn total_differential(&self) -> Matrix {
        let mut m = Matrix::zeros(self.total_rank(), self.total_rank());
        for n in self.lo..self.hi() {
            m.paste(self.offset(n + 1), self.offset(n), &self.d(n));
        }
        m
    }

    /// Complex on a degree-sorted basis with the given total differential,
    /// which must raise degree by exactly one.
    pub fn from_total(ring: CoefficientRing, degrees: &[i64], d: &Matrix) -> Result<Complex> {
        let n = degrees.len();
        if d.shape() != (n, n) {
            return Err(Error::ShapeMismatch(format!("total differential {:?} for {n} basis elements", d.shape())));
        }
        if degrees.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::ShapeMismatch("basis degrees must be nondecreasing".into()));
        }
        for i in 0..n {
            for j in 0..n {
                if !d[(i, j)].is_zero() && degrees[i] != degrees[j] + 1 {
                    return Err(Error::InvalidComplex(format!(
                        "differential maps basis element {j} (degree {}) to element {i} (degree {})",
                        degrees[j], degrees[i]
                    )));
                }
            }
        }
        if n == 0 {
            return Ok(Complex::zero(ring));
        }
        let (lo, hi) = (degrees[0], degrees[n - 1]);
        let count = |k: i64| degrees.iter().filter(|&&x| x == k).count();
        let start = |k: i64| degrees.iter().take_while(|&&x| x < k).count();
        let ranks: Vec<usize> = (lo..=hi).map(count).collect();
        let diffs = (lo..hi)
            .map(|k| d.submatrix(start(k + 1), start(k + 1) + count(k + 1), start(k), start(k) + count(k)))
            .collect();
        Complex::new(ring, lo, ranks, diffs)
    }
}

impl ExactData for Complex {
    fn coefficient_ring(&self) -> &CoefficientRing {
        &self.ring
    }

    fn visit_scalars(&self, f: &mut dyn FnMut(&Scalar)) {
        for d in &self.diffs {
            d.entries().iter().for_each(&mut *f);
        }
    }

    fn map_scalars(&self, target: &CoefficientRing, f: &dyn Fn(&Scalar) -> Scalar) -> Self {
        Complex {
            ring: target.clone(),
            lo: self.lo,
            ranks: self.ranks.clone(),
            diffs: self.diffs.iter().map(|d| d.map(f)).collect(),
        }
    }
}

/// Degree range covering the supports of both complexes, widened by `pad`
/// on each side.
fn joint_range(a: &Complex, b: &Complex, pad: i64) -> (i64, i64) {
    let mut lo = i64::MAX;
    let mut hi = i64::MIN;
    for c in [a, b] {
        if !c.is_zero() {
            lo = lo.min(c.lo());
            hi = hi.max(c.hi());
        }
    }
    if lo > hi {
        (0, -1)
    } else {
        (lo - pad, hi + pad)
    }
}

fn check_same_ring(a: &CoefficientRing, b: &CoefficientRing) -> Result<()> {
    if a != b {
        return Err(Error::RingMismatch { expected: a.clone(), found: b.clone() });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// chain maps

/// A degree-0 map of complexes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainMap {
    src: Complex,
    dst: Complex,
    comps: BTreeMap<i64, Matrix>,
}

impl ChainMap {
    /// Components missing from `comps` are zero. Shapes and coefficients are
    /// checked; commutation is not (see [`ChainMap::check`]).
    pub fn new(src: &Complex, dst: &Complex, mut comps: BTreeMap<i64, Matrix>) -> Result<Self> {
        check_same_ring(src.ring(), dst.ring())?;
        let mut out = BTreeMap::new();
        let (lo, hi) = joint_range(src, dst, 0);
        for n in lo..=hi {
            let shape = (dst.rank(n), src.rank(n));
            let m = match comps.remove(&n) {
                Some(m) => {
                    if m.shape() != shape {
                        return Err(Error::ShapeMismatch(format!(
                            "component in degree {n} has shape {:?}, expected {shape:?}",
                            m.shape()
                        )));
                    }
                    normalize_entries(src.ring(), m)?
                }
                None => Matrix::zeros(shape.0, shape.1),
            };
            if shape.0 * shape.1 > 0 {
                out.insert(n, m);
            }
        }
        if let Some((&n, m)) = comps.iter().find(|(_, m)| m.rows() * m.cols() > 0) {
            return Err(Error::ShapeMismatch(format!(
                "component in degree {n} of shape {:?} outside both supports",
                m.shape()
            )));
        }
        Ok(ChainMap { src: src.clone(), dst: dst.clone(), comps: out })
    }

    pub fn from_fn(src: &Complex, dst: &Complex, f: impl Fn(i64) -> Matrix) -> Result<Self> {
        let (lo, hi) = joint_range(src, dst, 0);
        ChainMap::new(src, dst, (lo..=hi).map(|n| (n, f(n))).collect())
    }

    pub(crate) fn build(src: &Complex, dst: &Complex, f: impl Fn(i64) -> Matrix) -> Self {
        let (lo, hi) = joint_range(src, dst, 0);
        let ring = src.ring();
        let comps = (lo..=hi)
            .filter(|&n| src.rank(n) * dst.rank(n) > 0)
            .map(|n| (n, f(n).normalized(ring)))
            .collect();
        ChainMap { src: src.clone(), dst: dst.clone(), comps }
    }

    pub fn identity(c: &Complex) -> Self {
        ChainMap::build(c, c, |n| Matrix::identity(c.rank(n)))
    }

    pub fn zero(src: &Complex, dst: &Complex) -> Self {
        ChainMap::build(src, dst, |n| Matrix::zeros(dst.rank(n), src.rank(n)))
    }

    pub fn src(&self) -> &Complex {
        &self.src
    }

    pub fn dst(&self) -> &Complex {
        &self.dst
    }

    pub fn ring(&self) -> &CoefficientRing {
        self.src.ring()
    }

    pub fn f(&self, n: i64) -> Matrix {
        self.comps
            .get(&n)
            .cloned()
            .unwrap_or_else(|| Matrix::zeros(self.dst.rank(n), self.src.rank(n)))
    }

    pub fn components(&self) -> &BTreeMap<i64, Matrix> {
        &self.comps
    }

    /// The map as one matrix between total bases.
    pub fn total(&self) -> Matrix {
        let mut m = Matrix::zeros(self.dst.total_rank(), self.src.total_rank());
        for (&n, c) in &self.comps {
            m.paste(self.dst.offset(n), self.src.offset(n), c);
        }
        m
    }

    /// Chain map given by a total matrix, which must preserve degrees.
    pub fn from_total(src: &Complex, dst: &Complex, m: &Matrix) -> Result<Self> {
        if m.shape() != (dst.total_rank(), src.total_rank()) {
            return Err(Error::ShapeMismatch(format!("total map has shape {:?}", m.shape())));
        }
        let (sd, dd) = (src.basis_degrees(), dst.basis_degrees());
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                if !m[(i, j)].is_zero() && dd[i] != sd[j] {
                    return Err(Error::InvalidChainMap(format!("entry ({i}, {j}) changes degree")));
                }
            }
        }
        ChainMap::from_fn(src, dst, |n| {
            m.submatrix(dst.offset(n), dst.offset(n) + dst.rank(n), src.offset(n), src.offset(n) + src.rank(n))
        })
    }

    /// Errors with the first degree where `d f ≠ f d`.
    pub fn check(&self) -> Result<()> {
        self.src.check().map_err(|e| Error::InvalidChainMap(format!("source: {e}")))?;
        self.dst.check().map_err(|e| Error::InvalidChainMap(format!("target: {e}")))?;
        let (lo, hi) = joint_range(&self.src, &self.dst, 1);
        for n in lo..=hi {
            let lhs = &self.dst.d(n) * &self.f(n);
            let rhs = &self.f(n + 1) * &self.src.d(n);
            if !lhs.eq_in(&rhs, self.ring()) {
                return Err(Error::InvalidChainMap(format!("d∘f ≠ f∘d at degree {n}")));
            }
        }
        Ok(())
    }

    pub fn is_valid(&self) -> bool {
        self.check().is_ok()
    }

    /// `self ∘ first`.
    pub fn compose(&self, first: &ChainMap) -> Result<ChainMap> {
        if first.dst != self.src {
            return Err(Error::InvalidChainMap("composition of non-composable maps".into()));
        }
        Ok(ChainMap::build(&first.src, &self.dst, |n| &self.f(n) * &first.f(n)))
    }

    fn same_ends(&self, other: &ChainMap) -> Result<()> {
        if self.src != other.src || self.dst != other.dst {
            return Err(Error::InvalidChainMap("maps have different source or target".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &ChainMap) -> Result<ChainMap> {
        self.same_ends(other)?;
        Ok(ChainMap::build(&self.src, &self.dst, |n| &self.f(n) + &other.f(n)))
    }

    pub fn sub(&self, other: &ChainMap) -> Result<ChainMap> {
        self.same_ends(other)?;
        Ok(ChainMap::build(&self.src, &self.dst, |n| &self.f(n) - &other.f(n)))
    }

    pub fn scale(&self, c: &Scalar) -> ChainMap {
        ChainMap::build(&self.src, &self.dst, |n| self.f(n).scale(c))
    }

    pub fn is_identity(&self) -> bool {
        self.src == self.dst && *self == ChainMap::identity(&self.src)
    }

    pub fn pow(&self, k: usize) -> Result<ChainMap> {
        if self.src != self.dst {
            return Err(Error::InvalidChainMap("power of a non-endomorphism".into()));
        }
        let mut r = ChainMap::identity(&self.src);
        for _ in 0..k {
            r = self.compose(&r)?;
        }
        Ok(r)
    }
}

impl ExactData for ChainMap {
    fn coefficient_ring(&self) -> &CoefficientRing {
        self.src.ring()
    }

    fn visit_scalars(&self, f: &mut dyn FnMut(&Scalar)) {
        self.src.visit_scalars(f);
        self.dst.visit_scalars(f);
        for m in self.comps.values() {
            m.entries().iter().for_each(&mut *f);
        }
    }

    fn map_scalars(&self, target: &CoefficientRing, f: &dyn Fn(&Scalar) -> Scalar) -> Self {
        ChainMap {
            src: self.src.map_scalars(target, f),
            dst: self.dst.map_scalars(target, f),
            comps: self.comps.iter().map(|(n, m)| (*n, m.map(f))).collect(),
        }
    }
}

// ---------------------------------------------------------------------------
// homotopies

/// A chain homotopy `h: f ≃ g`, i.e. `f - g = d h + h d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Homotopy {
    f: ChainMap,
    g: ChainMap,
    comps: BTreeMap<i64, Matrix>,
}

impl Homotopy {
    /// `h(n)` has shape `dst.rank(n-1) × src.rank(n)`; missing components are zero.
    pub fn new(f: &ChainMap, g: &ChainMap, mut comps: BTreeMap<i64, Matrix>) -> Result<Self> {
        f.same_ends(g).map_err(|_| Error::InvalidHomotopy("maps have different ends".into()))?;
        let (src, dst) = (f.src(), f.dst());
        let (lo, hi) = joint_range(src, dst, 1);
        let mut out = BTreeMap::new();
        for n in lo..=hi {
            let shape = (dst.rank(n - 1), src.rank(n));
            let m = match comps.remove(&n) {
                Some(m) => {
                    if m.shape() != shape {
                        return Err(Error::ShapeMismatch(format!(
                            "homotopy component in degree {n} has shape {:?}, expected {shape:?}",
                            m.shape()
                        )));
                    }
                    normalize_entries(src.ring(), m)?
                }
                None => Matrix::zeros(shape.0, shape.1),
            };
            if shape.0 * shape.1 > 0 {
                out.insert(n, m);
            }
        }
        if let Some((&n, _)) = comps.iter().find(|(_, m)| m.rows() * m.cols() > 0) {
            return Err(Error::ShapeMismatch(format!("homotopy component in degree {n} outside support")));
        }
        Ok(Homotopy { f: f.clone(), g: g.clone(), comps: out })
    }

    pub(crate) fn build(f: &ChainMap, g: &ChainMap, h: impl Fn(i64) -> Matrix) -> Self {
        let (src, dst) = (f.src(), f.dst());
        let (lo, hi) = joint_range(src, dst, 1);
        let comps = (lo..=hi)
            .filter(|&n| dst.rank(n - 1) * src.rank(n) > 0)
            .map(|n| (n, h(n).normalized(src.ring())))
            .collect();
        Homotopy { f: f.clone(), g: g.clone(), comps }
    }

    /// The zero homotopy `f ≃ f`.
    pub fn zero(f: &ChainMap) -> Self {
        Homotopy::build(f, f, |n| Matrix::zeros(f.dst().rank(n - 1), f.src().rank(n)))
    }

    pub fn from(&self) -> &ChainMap {
        &self.f
    }

    pub fn to(&self) -> &ChainMap {
        &self.g
    }

    pub fn src(&self) -> &Complex {
        self.f.src()
    }

    pub fn dst(&self) -> &Complex {
        self.f.dst()
    }

    pub fn ring(&self) -> &CoefficientRing {
        self.f.ring()
    }

    pub fn h(&self, n: i64) -> Matrix {
        self.comps
            .get(&n)
            .cloned()
            .unwrap_or_else(|| Matrix::zeros(self.dst().rank(n - 1), self.src().rank(n)))
    }

    pub fn components(&self) -> &BTreeMap<i64, Matrix> {
        &self.comps
    }

    /// `d h + h d` in degree `n`.
    pub fn boundary(&self, n: i64) -> Matrix {
        &(&self.dst().d(n - 1) * &self.h(n)) + &(&self.h(n + 1) * &self.src().d(n))
    }

    pub fn check(&self) -> Result<()> {
        self.f.check().map_err(|e| Error::InvalidHomotopy(e.to_string()))?;
        self.g.check().map_err(|e| Error::InvalidHomotopy(e.to_string()))?;
        let (lo, hi) = joint_range(self.src(), self.dst(), 1);
        for n in lo..=hi {
            let diff = &self.f.f(n) - &self.g.f(n);
            if !diff.eq_in(&self.boundary(n), self.ring()) {
                return Err(Error::InvalidHomotopy(format!("f - g ≠ dh + hd at degree {n}")));
            }
        }
        Ok(())
    }

    pub fn is_valid(&self) -> bool {
        self.check().is_ok()
    }

    /// `g ≃ f` from `f ≃ g`.
    pub fn reversed(&self) -> Homotopy {
        Homotopy::build(&self.g, &self.f, |n| -&self.h(n))
    }

    /// `f ≃ k` from `self: f ≃ g` and `next: g ≃ k`.
    pub fn then(&self, next: &Homotopy) -> Result<Homotopy> {
        if self.g != next.f {
            return Err(Error::InvalidHomotopy("homotopies do not chain".into()));
        }
        Ok(Homotopy::build(&self.f, &next.g, |n| &self.h(n) + &next.h(n)))
    }

    /// `k∘f ≃ k∘g`.
    pub fn post_compose(&self, k: &ChainMap) -> Result<Homotopy> {
        let f = k.compose(&self.f)?;
        let g = k.compose(&self.g)?;
        Ok(Homotopy::build(&f, &g, |n| &k.f(n - 1) * &self.h(n)))
    }

    /// `f∘k ≃ g∘k`.
    pub fn pre_compose(&self, k: &ChainMap) -> Result<Homotopy> {
        let f = self.f.compose(k)?;
        let g = self.g.compose(k)?;
        Ok(Homotopy::build(&f, &g, |n| &self.h(n) * &k.f(n)))
    }

    /// Same components, reinterpreted as a homotopy between other maps with
    /// the same ends (the caller re-verifies).
    pub fn with_ends(&self, f: &ChainMap, g: &ChainMap) -> Result<Homotopy> {
        Homotopy::new(f, g, self.comps.clone())
    }
}

impl ExactData for Homotopy {
    fn coefficient_ring(&self) -> &CoefficientRing {
        self.f.ring()
    }

    fn visit_scalars(&self, f: &mut dyn FnMut(&Scalar)) {
        self.f.visit_scalars(f);
        self.g.visit_scalars(f);
        for m in self.comps.values() {
            m.entries().iter().for_each(&mut *f);
        }
    }

    fn map_scalars(&self, target: &CoefficientRing, f: &dyn Fn(&Scalar) -> Scalar) -> Self {
        Homotopy {
            f: self.f.map_scalars(target, f),
            g: self.g.map_scalars(target, f),
            comps: self.comps.iter().map(|(n, m)| (*n, m.map(f))).collect(),
        }
    }
}

// ---------------------------------------------------------------------------
// cohomology

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PrimePower {
    pub prime: u64,
    pub exponent: u32,
}

impl fmt::Display for PrimePower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent == 1 {
            write!(f, "{}", self.prime)
        } else {
            write!(f, "{}^{}", self.prime, self.exponent)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeCohomology {
    pub degree: i64,
    pub betti: usize,
    /// Cyclic torsion summands, as sorted prime powers.
    pub torsion: Vec<PrimePower>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CohomologyReport {
    pub ring: CoefficientRing,
    pub degrees: Vec<DegreeCohomology>,
}

impl CohomologyReport {
    pub fn betti(&self, n: i64) -> usize {
        self.degrees.iter().find(|d| d.degree == n).map_or(0, |d| d.betti)
    }

    pub fn torsion(&self, n: i64) -> Vec<PrimePower> {
        self.degrees.iter().find(|d| d.degree == n).map_or_else(Vec::new, |d| d.torsion.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.degrees.iter().all(|d| d.betti == 0 && d.torsion.is_empty())
    }

    pub fn torsion_primes(&self) -> Vec<u64> {
        let mut ps: Vec<u64> = self.degrees.iter().flat_map(|d| d.torsion.iter().map(|t| t.prime)).collect();
        ps.sort_unstable();
        ps.dedup();
        ps
    }

    /// Betti numbers on the degrees where some are nonzero.
    pub fn betti_numbers(&self) -> BTreeMap<i64, usize> {
        self.degrees.iter().filter(|d| d.betti > 0).map(|d| (d.degree, d.betti)).collect()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.degrees.iter().map(|d| if d.degree.rem_euclid(2) == 0 { d.betti as i64 } else { -(d.betti as i64) }).sum()
    }
}

impl fmt::Display for CohomologyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "cohomology over {}", self.ring)?;
        for d in &self.degrees {
            write!(f, "  H^{}: rank {}", d.degree, d.betti)?;
            if !d.torsion.is_empty() {
                let t: Vec<String> = d.torsion.iter().map(|t| format!("Z/{t}")).collect();
                write!(f, " + {}", t.join(" + "))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

fn rank_over(m: &Matrix, ring: &CoefficientRing) -> usize {
    if m.rows() == 0 || m.cols() == 0 {
        return 0;
    }
    linalg::rank(m, &ring.fraction_field())
}

pub fn cohomology(c: &Complex) -> Result<CohomologyReport> {
    c.check()?;
    let ring = c.ring();
    let mut degrees = Vec::new();
    for n in c.degrees() {
        let incoming = c.d(n - 1);
        let betti = c.rank(n) - rank_over(&c.d(n), ring) - rank_over(&incoming, ring);
        let mut torsion = Vec::new();
        if !ring.is_field() && incoming.rows() * incoming.cols() > 0 {
            for e in elementary_divisors(&incoming) {
                let part = ring.nonunit_part(&e);
                if part > num_bigint::BigInt::one() {
                    for (p, k) in factorize(&part)? {
                        torsion.push(PrimePower { prime: p, exponent: k });
                    }
                }
            }
            torsion.sort();
        }
        degrees.push(DegreeCohomology { degree: n, betti, torsion });
    }
    Ok(CohomologyReport { ring: ring.clone(), degrees })
}

/// Cohomology in degree `n` over the fraction field of the ring, with a
/// chosen basis of cycle representatives.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CohomologyBasis {
    pub degree: i64,
    pub field: CoefficientRing,
    pub boundaries: Matrix,
    pub representatives: Matrix,
}

impl CohomologyBasis {
    pub fn dim(&self) -> usize {
        self.representatives.cols()
    }

    /// Coordinates of cycles (given as columns) in the representative basis.
    pub fn coordinates(&self, cycles: &Matrix) -> Result<Matrix> {
        let ambient = Matrix::hstack(&[&self.boundaries, &self.representatives]);
        if cycles.cols() == 0 {
            return Ok(Matrix::zeros(self.dim(), 0));
        }
        let x = linalg::solve(&ambient, cycles, &self.field)
            .ok_or_else(|| Error::InvalidChainMap(format!("vector is not a cycle in degree {}", self.degree)))?;
        Ok(x.submatrix(self.boundaries.cols(), ambient.cols(), 0, cycles.cols()))
    }
}

pub fn cohomology_basis(c: &Complex, n: i64) -> Result<CohomologyBasis> {
    c.check()?;
    let field = c.ring().fraction_field();
    let incoming = c.d(n - 1);
    let boundaries = incoming.select_columns(&column_basis_indices(&incoming, &field));
    let cycles = kernel(&c.d(n), &field);
    let joint = Matrix::hstack(&[&boundaries, &cycles]);
    let reps: Vec<usize> = column_basis_indices(&joint, &field)
        .into_iter()
        .filter(|&j| j >= boundaries.cols())
        .collect();
    let representatives = joint.select_columns(&reps);
    Ok(CohomologyBasis { degree: n, field, boundaries, representatives })
}

/// Matrix of `H^n(f)` in the bases of [`cohomology_basis`].
pub fn induced_map(f: &ChainMap, n: i64) -> Result<Matrix> {
    let bs = cohomology_basis(f.src(), n)?;
    let bd = cohomology_basis(f.dst(), n)?;
    let image = &f.f(n) * &bs.representatives;
    bd.coordinates(&image.normalized(&bd.field))
}

pub fn is_quasi_iso(f: &ChainMap) -> Result<bool> {
    f.check()?;
    Ok(cohomology(&cone(f)?)?.is_zero())
}

// ---------------------------------------------------------------------------
// constructions

pub fn cone(f: &ChainMap) -> Result<Complex> {
    let (src, dst) = (f.src(), f.dst());
    let (lo, hi) = joint_range(src, dst, 1);
    let rank = |n: i64| src.rank(n + 1) + dst.rank(n);
    Ok(Complex::build(src.ring(), lo, hi, rank, |n| {
        let mut m = Matrix::zeros(rank(n + 1), rank(n));
        let top = src.rank(n + 2);
        let left = src.rank(n + 1);
        m.paste(0, 0, &-&src.d(n + 1));
        m.paste(top, 0, &f.f(n + 1));
        m.paste(top, left, &dst.d(n));
        m
    }))
}

/// `dst → cone(f)`, the inclusion `x ↦ (0, x)`.
pub fn cone_inclusion(f: &ChainMap) -> Result<ChainMap> {
    let c = cone(f)?;
    let (src, dst) = (f.src(), f.dst());
    Ok(ChainMap::build(dst, &c, |n| {
        let mut m = Matrix::zeros(c.rank(n), dst.rank(n));
        m.paste(src.rank(n + 1), 0, &Matrix::identity(dst.rank(n)));
        m
    }))
}

pub fn shift(c: &Complex, k: i64) -> Complex {
    let s = sign(k);
    Complex::build(c.ring(), c.lo() - k, c.hi() - k, |n| c.rank(n + k), |n| c.d(n + k).scale(&s))
}

pub fn direct_sum(a: &Complex, b: &Complex) -> Result<Complex> {
    check_same_ring(a.ring(), b.ring())?;
    let (lo, hi) = joint_range(a, b, 0);
    Ok(Complex::build(a.ring(), lo, hi, |n| a.rank(n) + b.rank(n), |n| Matrix::block_diag(&[&a.d(n), &b.d(n)])))
}

/// Block offsets of `(C ⊗ D)^n`, indexed by the degree `p` of the left factor.
pub fn tensor_blocks(c: &Complex, d: &Complex, n: i64) -> Vec<(i64, usize, usize)> {
    let mut out = Vec::new();
    let mut off = 0;
    for p in c.degrees() {
        let size = c.rank(p) * d.rank(n - p);
        if size > 0 {
            out.push((p, off, size));
            off += size;
        }
    }
    out
}

pub fn tensor(c: &Complex, d: &Complex) -> Result<Complex> {
    check_same_ring(c.ring(), d.ring())?;
    if c.is_zero() || d.is_zero() {
        return Ok(Complex::zero(c.ring().clone()));
    }
    let rank = |n: i64| tensor_blocks(c, d, n).iter().map(|b| b.2).sum::<usize>();
    Ok(Complex::build(c.ring(), c.lo() + d.lo(), c.hi() + d.hi(), rank, |n| {
        let src = tensor_blocks(c, d, n);
        let dst = tensor_blocks(c, d, n + 1);
        let mut m = Matrix::zeros(rank(n + 1), rank(n));
        for &(p, off, _) in &src {
            let q = n - p;
            if let Some(&(_, toff, _)) = dst.iter().find(|b| b.0 == p + 1) {
                m.paste(toff, off, &c.d(p).kron(&Matrix::identity(d.rank(q))));
            }
            if let Some(&(_, toff, _)) = dst.iter().find(|b| b.0 == p) {
                m.paste(toff, off, &Matrix::identity(c.rank(p)).kron(&d.d(q)).scale(&sign(p)));
            }
        }
        m
    }))
}

/// Block offsets of `Hom^k(C, D)`, indexed by the source degree `p`; each
/// block is a row-major `D^{p+k} × C^p` matrix.
pub fn hom_blocks(c: &Complex, d: &Complex, k: i64) -> Vec<(i64, usize, usize)> {
    let mut out = Vec::new();
    let mut off = 0;
    for p in c.degrees() {
        let size = d.rank(p + k) * c.rank(p);
        if size > 0 {
            out.push((p, off, size));
            off += size;
        }
    }
    out
}

pub fn hom_complex(c: &Complex, d: &Complex) -> Result<Complex> {
    check_same_ring(c.ring(), d.ring())?;
    if c.is_zero() || d.is_zero() {
        return Ok(Complex::zero(c.ring().clone()));
    }
    let rank = |k: i64| hom_blocks(c, d, k).iter().map(|b| b.2).sum::<usize>();
    Ok(Complex::build(c.ring(), d.lo() - c.hi(), d.hi() - c.lo(), rank, |k| {
        let src = hom_blocks(c, d, k);
        let dst = hom_blocks(c, d, k + 1);
        let mut m = Matrix::zeros(rank(k + 1), rank(k));
        for &(p, toff, _) in &dst {
            if let Some(&(_, off, _)) = src.iter().find(|b| b.0 == p) {
                m.paste(toff, off, &d.d(p + k).kron(&Matrix::identity(c.rank(p))));
            }
            if let Some(&(_, off, _)) = src.iter().find(|b| b.0 == p + 1) {
                let block = Matrix::identity(d.rank(p + k + 1)).kron(&c.d(p).transpose());
                m.paste(toff, off, &block.scale(&-sign(k)));
            }
        }
        m
    }))
}

/// Result of solving for a homotopy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HomotopySearch {
    Found(Homotopy),
    NoSolution { rank: usize, augmented_rank: usize },
    /// Solvable only after inverting these primes.
    Obstructed(Vec<u64>),
}

/// Solves `f - g = d h + h d` for `h` over the ring of the maps.
pub fn solve_homotopy(f: &ChainMap, g: &ChainMap) -> Result<HomotopySearch> {
    f.same_ends(g)?;
    f.check()?;
    g.check()?;
    let (src, dst) = (f.src(), f.dst());
    let ring = f.ring().clone();
    let mut sys = LinearSystem::new(ring);
    let (lo, hi) = joint_range(src, dst, 1);
    let mut unknowns = BTreeMap::new();
    for n in lo..=hi {
        if dst.rank(n - 1) * src.rank(n) > 0 {
            unknowns.insert(n, sys.unknown(dst.rank(n - 1), src.rank(n)));
        }
    }
    for n in lo..=hi {
        if src.rank(n) * dst.rank(n) == 0 {
            continue;
        }
        let mut terms = Vec::new();
        if let Some(&u) = unknowns.get(&n) {
            terms.push((u, dst.d(n - 1), Matrix::identity(src.rank(n))));
        }
        if let Some(&u) = unknowns.get(&(n + 1)) {
            terms.push((u, Matrix::identity(dst.rank(n)), src.d(n)));
        }
        sys.equation(terms, &f.f(n) - &g.f(n));
    }
    Ok(match sys.solve()? {
        SystemSolution::Solved(xs) => {
            let comps = unknowns.iter().map(|(&n, &u)| (n, xs[u].clone())).collect();
            let h = Homotopy::new(f, g, comps)?;
            debug_assert!(h.is_valid());
            HomotopySearch::Found(h)
        }
        SystemSolution::Inconsistent { rank, augmented_rank } => HomotopySearch::NoSolution { rank, augmented_rank },
        SystemSolution::Obstructed(p) => HomotopySearch::Obstructed(p),
    })
}

/// A homotopy `f ≃ g` over the ring of the maps, if one exists.
pub fn find_homotopy(f: &ChainMap, g: &ChainMap) -> Result<Option<Homotopy>> {
    Ok(match solve_homotopy(f, g)? {
        HomotopySearch::Found(h) => Some(h),
        _ => None,
    })
}

/// A contraction `id ≃ 0` of `c`, witnessing that `c` is contractible.
pub fn find_contraction(c: &Complex) -> Result<Option<Homotopy>> {
    find_homotopy(&ChainMap::identity(c), &ChainMap::zero(c, c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rings::{int, RingMap};

    fn q() -> CoefficientRing {
        CoefficientRing::Rationals
    }

    fn times(ring: CoefficientRing, k: i64) -> Complex {
        Complex::from_differentials(ring, 0, vec![Matrix::from_ints(1, 1, &[k])]).unwrap()
    }

    #[test]
    fn validate_examples() {
        assert!(Complex::zero(q()).validate());
        assert!(times(CoefficientRing::Integers, 2).validate());
        let bad = Complex::from_differentials(
            q(),
            0,
            vec![Matrix::from_ints(1, 1, &[1]), Matrix::from_ints(1, 1, &[1])],
        )
        .unwrap();
        assert!(!bad.validate());
        assert_eq!(bad.check().unwrap_err(), Error::InvalidComplex("d∘d ≠ 0 at degree 0".into()));
        assert!(matches!(
            Complex::new(q(), 0, vec![1, 2], vec![Matrix::zeros(1, 1)]),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn cohomology_examples() {
        let c = times(CoefficientRing::Integers, 2);
        let h = cohomology(&c).unwrap();
        assert_eq!(h.betti(0), 0);
        assert_eq!(h.betti(1), 0);
        assert_eq!(h.torsion(1), vec![PrimePower { prime: 2, exponent: 1 }]);
        let z2 = CoefficientRing::localized([2]).unwrap();
        let c = times(z2, 2);
        assert!(cohomology(&c).unwrap().is_zero());
        let c = times(CoefficientRing::Integers, 12);
        let t = cohomology(&c).unwrap().torsion(1);
        assert_eq!(t, vec![PrimePower { prime: 2, exponent: 2 }, PrimePower { prime: 3, exponent: 1 }]);
    }

    #[test]
    fn quasi_iso_examples() {
        let c = Complex::concentrated(CoefficientRing::Integers, 0, 1);
        assert!(is_quasi_iso(&ChainMap::identity(&c)).unwrap());
        let two = ChainMap::from_fn(&c, &c, |_| Matrix::from_ints(1, 1, &[2])).unwrap();
        assert!(!is_quasi_iso(&two).unwrap());
        let cq = Complex::concentrated(q(), 0, 1);
        let two = ChainMap::from_fn(&cq, &cq, |_| Matrix::from_ints(1, 1, &[2])).unwrap();
        assert!(is_quasi_iso(&two).unwrap());
    }

    #[test]
    fn cone_shift_sum() {
        let c = Complex::concentrated(q(), 0, 1);
        let k = cone(&ChainMap::identity(&c)).unwrap();
        assert_eq!(k.ranks(), &[1, 1]);
        assert_eq!(k.lo(), -1);
        assert!(cohomology(&k).unwrap().is_zero());
        let t = times(CoefficientRing::Integers, 3);
        assert_eq!(shift(&t, 0), t);
        assert_eq!(shift(&shift(&t, 1), -1), t);
        let s = shift(&t, 1);
        assert_eq!(s.lo(), -1);
        assert_eq!(s.d(-1), Matrix::from_ints(1, 1, &[-3]));
    }

    #[test]
    fn tensor_and_hom() {
        let c = times(q(), 0);
        let unit = Complex::concentrated(q(), 0, 1);
        assert_eq!(tensor(&c, &unit).unwrap(), c);
        assert_eq!(tensor(&unit, &c).unwrap(), c);
        let h = hom_complex(&c, &c).unwrap();
        assert_eq!(h.rank(0), 2);
        assert!(h.validate());
    }

    #[test]
    fn homotopy_examples() {
        let c = times(q(), 5);
        let id = ChainMap::identity(&c);
        let h = find_homotopy(&id, &id).unwrap().unwrap();
        assert!(h.components().values().all(|m| m.is_zero()));
        let c0 = Complex::concentrated(q(), 0, 1);
        let k = cone(&ChainMap::identity(&c0)).unwrap();
        let h = find_contraction(&k).unwrap().unwrap();
        assert!(h.is_valid());
        assert!(find_contraction(&c0).unwrap().is_none());
    }

    #[test]
    fn base_change_examples() {
        let c = times(CoefficientRing::Integers, 2);
        let id = RingMap::identity(CoefficientRing::Integers);
        assert_eq!(c.base_change(&id).unwrap(), c);
        let m = RingMap::new(CoefficientRing::Integers, CoefficientRing::PrimeField(2)).unwrap();
        let c2 = c.base_change(&m).unwrap();
        assert!(c2.d(0).is_zero());
        assert_eq!(cohomology(&c2).unwrap().betti(0), 1);
        assert_eq!(c2.d(0)[(0, 0)], int(0));
    }
}
