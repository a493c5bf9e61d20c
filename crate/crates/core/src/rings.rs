//! Exact coefficient rings: Z, Z[1/S], Q and F_p, together with the
//! admissible homomorphisms between them.
//!
//! Every scalar in the crate is a [`Scalar`] (an arbitrary-precision
//! rational). Elements of Z and Z[1/S] are rationals whose denominators are
//! restricted; elements of F_p are integer representatives in `[0, p)`.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Scalar = BigRational;

pub fn int(n: i64) -> Scalar {
    BigRational::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Scalar {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CoefficientRing {
    Integers,
    /// Z[1/p : p in primes]; primes sorted ascending, distinct, nonempty.
    LocalizedIntegers(Vec<u64>),
    Rationals,
    PrimeField(u64),
}

impl CoefficientRing {
    /// Z[1/S]. An empty prime set gives `Integers`.
    pub fn localized<I: IntoIterator<Item = u64>>(primes: I) -> Result<Self> {
        let set: BTreeSet<u64> = primes.into_iter().collect();
        for &p in &set {
            if !is_prime(p) {
                return Err(Error::NotPrime(p));
            }
        }
        if set.is_empty() {
            Ok(CoefficientRing::Integers)
        } else {
            Ok(CoefficientRing::LocalizedIntegers(set.into_iter().collect()))
        }
    }

    pub fn prime_field(p: u64) -> Result<Self> {
        if is_prime(p) {
            Ok(CoefficientRing::PrimeField(p))
        } else {
            Err(Error::NotPrime(p))
        }
    }

    /// Checks the structural invariants (used after deserialization).
    pub fn check(&self) -> Result<()> {
        match self {
            CoefficientRing::LocalizedIntegers(ps) => {
                if ps.is_empty() {
                    return Err(Error::Parse("empty localization; use Z".into()));
                }
                for w in ps.windows(2) {
                    if w[0] >= w[1] {
                        return Err(Error::Parse("localized primes must be sorted and distinct".into()));
                    }
                }
                for &p in ps {
                    if !is_prime(p) {
                        return Err(Error::NotPrime(p));
                    }
                }
                Ok(())
            }
            CoefficientRing::PrimeField(p) if !is_prime(*p) => Err(Error::NotPrime(*p)),
            _ => Ok(()),
        }
    }

    pub fn is_field(&self) -> bool {
        matches!(self, CoefficientRing::Rationals | CoefficientRing::PrimeField(_))
    }

    /// Characteristic zero rings that sit inside Q.
    pub fn is_rational_subring(&self) -> bool {
        !matches!(self, CoefficientRing::PrimeField(_))
    }

    /// Inverted primes for Z and Z[1/S]; `None` for fields.
    pub fn inverted_primes(&self) -> Option<&[u64]> {
        match self {
            CoefficientRing::Integers => Some(&[]),
            CoefficientRing::LocalizedIntegers(ps) => Some(ps),
            _ => None,
        }
    }

    pub fn fraction_field(&self) -> CoefficientRing {
        match self {
            CoefficientRing::PrimeField(p) => CoefficientRing::PrimeField(*p),
            _ => CoefficientRing::Rationals,
        }
    }

    pub fn characteristic(&self) -> u64 {
        match self {
            CoefficientRing::PrimeField(p) => *p,
            _ => 0,
        }
    }

    /// Whether the rational `x` is (the canonical representative of) an
    /// element of this ring.
    pub fn contains(&self, x: &Scalar) -> bool {
        match self {
            CoefficientRing::Rationals => true,
            CoefficientRing::Integers => x.is_integer(),
            CoefficientRing::LocalizedIntegers(ps) => is_smooth(x.denom(), ps),
            CoefficientRing::PrimeField(p) => {
                x.is_integer() && !x.is_negative() && x.numer() < &BigInt::from(*p)
            }
        }
    }

    /// Canonical representative. Over F_p, integers (and fractions with
    /// denominator prime to p) are reduced into `[0, p)`.
    pub fn normalize(&self, x: &Scalar) -> Scalar {
        match self {
            CoefficientRing::PrimeField(p) => BigRational::from_integer(reduce_mod(x, *p)),
            _ => x.clone(),
        }
    }

    pub fn is_unit(&self, x: &Scalar) -> bool {
        if x.is_zero() {
            return false;
        }
        match self {
            CoefficientRing::Rationals => true,
            CoefficientRing::PrimeField(p) => !reduce_mod(x, *p).is_zero(),
            CoefficientRing::Integers => x.numer().abs().is_one() && x.denom().is_one(),
            CoefficientRing::LocalizedIntegers(ps) => is_smooth(x.numer(), ps) && is_smooth(x.denom(), ps),
        }
    }

    /// The part of a nonzero integer that is not a unit of this ring
    /// (absolute value, with inverted primes removed).
    pub fn nonunit_part(&self, n: &BigInt) -> BigInt {
        let mut m = n.abs();
        if let Some(ps) = self.inverted_primes() {
            for &p in ps {
                let bp = BigInt::from(p);
                while !m.is_zero() && (&m % &bp).is_zero() {
                    m /= &bp;
                }
            }
        }
        m
    }

    pub fn check_scalar(&self, x: &Scalar) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::NotInRing { value: x.to_string(), ring: self.clone() })
        }
    }

    /// Smallest stage of the localization tower containing both rings.
    pub fn join(&self, other: &CoefficientRing) -> Result<CoefficientRing> {
        match (self.inverted_primes(), other.inverted_primes()) {
            (Some(a), Some(b)) => CoefficientRing::localized(a.iter().chain(b).copied()),
            _ if self == other => Ok(self.clone()),
            _ => Err(Error::RingMismatch { expected: self.clone(), found: other.clone() }),
        }
    }
}

impl fmt::Display for CoefficientRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoefficientRing::Integers => write!(f, "Z"),
            CoefficientRing::Rationals => write!(f, "Q"),
            CoefficientRing::PrimeField(p) => write!(f, "F_{p}"),
            CoefficientRing::LocalizedIntegers(ps) => {
                let inv: Vec<String> = ps.iter().map(|p| format!("1/{p}")).collect();
                write!(f, "Z[{}]", inv.join(", "))
            }
        }
    }
}

fn is_smooth(n: &BigInt, primes: &[u64]) -> bool {
    let mut m = n.abs();
    for &p in primes {
        let bp = BigInt::from(p);
        while !m.is_zero() && (&m % &bp).is_zero() {
            m /= &bp;
        }
    }
    m.is_one()
}

/// Residue of `x` modulo `p`; the denominator must be prime to `p`.
pub(crate) fn reduce_mod(x: &Scalar, p: u64) -> BigInt {
    let bp = BigInt::from(p);
    let num = x.numer().mod_floor(&bp);
    if x.denom().is_one() {
        return num;
    }
    let den = x.denom().mod_floor(&bp);
    let inv = mod_inverse(&den, &bp).expect("denominator invertible mod p");
    (num * inv).mod_floor(&bp)
}

pub(crate) fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

/// An element of a coefficient ring, stored in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RingElement {
    ring: CoefficientRing,
    value: Scalar,
}

impl RingElement {
    pub fn new(ring: CoefficientRing, value: Scalar) -> Result<Self> {
        let value = match &ring {
            CoefficientRing::PrimeField(p) => {
                if !value.is_integer() && (value.denom() % BigInt::from(*p)).is_zero() {
                    return Err(Error::NotInRing { value: value.to_string(), ring });
                }
                ring.normalize(&value)
            }
            _ => value,
        };
        ring.check_scalar(&value)?;
        Ok(RingElement { ring, value })
    }

    pub fn ring(&self) -> &CoefficientRing {
        &self.ring
    }

    pub fn value(&self) -> &Scalar {
        &self.value
    }

    fn same_ring(&self, other: &RingElement) -> Result<()> {
        if self.ring == other.ring {
            Ok(())
        } else {
            Err(Error::RingMismatch { expected: self.ring.clone(), found: other.ring.clone() })
        }
    }

    pub fn add(&self, other: &RingElement) -> Result<RingElement> {
        self.same_ring(other)?;
        Ok(RingElement { ring: self.ring.clone(), value: self.ring.normalize(&(&self.value + &other.value)) })
    }

    pub fn mul(&self, other: &RingElement) -> Result<RingElement> {
        self.same_ring(other)?;
        Ok(RingElement { ring: self.ring.clone(), value: self.ring.normalize(&(&self.value * &other.value)) })
    }
}

impl fmt::Display for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} in {}", self.value, self.ring)
    }
}

/// A canonical homomorphism between coefficient rings.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RingMap {
    source: CoefficientRing,
    target: CoefficientRing,
}

impl RingMap {
    pub fn new(source: CoefficientRing, target: CoefficientRing) -> Result<Self> {
        use CoefficientRing::*;
        let ok = match (&source, &target) {
            _ if source == target => true,
            (Integers, _) => true,
            (LocalizedIntegers(s), LocalizedIntegers(t)) => s.iter().all(|p| t.contains(p)),
            (LocalizedIntegers(_), Rationals) => true,
            (LocalizedIntegers(s), PrimeField(p)) => !s.contains(p),
            _ => false,
        };
        if ok {
            Ok(RingMap { source, target })
        } else {
            Err(Error::InadmissibleMap { from: source, target })
        }
    }

    pub fn identity(ring: CoefficientRing) -> Self {
        RingMap { source: ring.clone(), target: ring }
    }

    /// The map from a stage of the localization tower to its colimit Q.
    pub fn to_rationals(source: &CoefficientRing) -> Result<Self> {
        RingMap::new(source.clone(), CoefficientRing::Rationals)
    }

    pub fn source(&self) -> &CoefficientRing {
        &self.source
    }

    pub fn target(&self) -> &CoefficientRing {
        &self.target
    }

    pub fn apply(&self, x: &RingElement) -> Result<RingElement> {
        if x.ring != self.source {
            return Err(Error::RingMismatch { expected: self.source.clone(), found: x.ring.clone() });
        }
        Ok(RingElement { ring: self.target.clone(), value: self.apply_scalar(&x.value) })
    }

    /// Image of a scalar already known to lie in the source ring.
    pub fn apply_scalar(&self, x: &Scalar) -> Scalar {
        self.target.normalize(x)
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &RingMap) -> Result<RingMap> {
        if self.target != next.source {
            return Err(Error::RingMismatch { expected: self.target.clone(), found: next.source.clone() });
        }
        RingMap::new(self.source.clone(), next.target.clone())
    }
}

/// Objects built from finitely many scalars over one coefficient ring.
pub trait ExactData: Sized {
    fn coefficient_ring(&self) -> &CoefficientRing;

    fn visit_scalars(&self, f: &mut dyn FnMut(&Scalar));

    /// Rebuilds the object over `target` with every scalar replaced by `f(scalar)`.
    fn map_scalars(&self, target: &CoefficientRing, f: &dyn Fn(&Scalar) -> Scalar) -> Self;

    fn base_change(&self, m: &RingMap) -> Result<Self> {
        if self.coefficient_ring() != m.source() {
            return Err(Error::RingMismatch {
                expected: m.source().clone(),
                found: self.coefficient_ring().clone(),
            });
        }
        Ok(self.map_scalars(m.target(), &|x| m.apply_scalar(x)))
    }

    /// The same data read over `ring`; every scalar must already lie in it.
    fn reinterpret(&self, ring: &CoefficientRing) -> Result<Self> {
        let mut bad = None;
        self.visit_scalars(&mut |x| {
            if bad.is_none() && !ring.contains(x) {
                bad = Some(x.clone());
            }
        });
        if let Some(x) = bad {
            return Err(Error::NotInRing { value: x.to_string(), ring: ring.clone() });
        }
        Ok(self.map_scalars(ring, &|x| x.clone()))
    }

    fn scalars(&self) -> Vec<Scalar> {
        let mut out = Vec::new();
        self.visit_scalars(&mut |x| out.push(x.clone()));
        out
    }
}

/// The localization Z[1/S₀] where S₀ is exactly the set of primes dividing
/// some denominator; `Integers` when there are none.
pub fn minimal_localization(xs: &[RingElement]) -> Result<CoefficientRing> {
    for x in xs {
        if !x.ring.is_rational_subring() {
            return Err(Error::UnsupportedRing {
                ring: x.ring.clone(),
                reason: "minimal localization needs rational values".into(),
                primes: vec![],
            });
        }
    }
    minimal_localization_of(xs.iter().map(|x| &x.value))
}

pub fn minimal_localization_of<'a, I: IntoIterator<Item = &'a Scalar>>(xs: I) -> Result<CoefficientRing> {
    let mut primes = BTreeSet::new();
    for x in xs {
        if !x.denom().is_one() {
            for (p, _) in factorize(x.denom())? {
                primes.insert(p);
            }
        }
    }
    CoefficientRing::localized(primes)
}

/// Primes that must be inverted in `ring` for every `x` to lie in it.
pub fn missing_primes<'a, I: IntoIterator<Item = &'a Scalar>>(ring: &CoefficientRing, xs: I) -> Result<Vec<u64>> {
    let mut primes = BTreeSet::new();
    if ring.is_field() {
        return Ok(vec![]);
    }
    for x in xs {
        let d = ring.nonunit_part(x.denom());
        if !d.is_one() {
            for (p, _) in factorize(&d)? {
                primes.insert(p);
            }
        }
    }
    Ok(primes.into_iter().collect())
}

/// Primes of the non-unit part of a nonzero integer.
pub fn nonunit_primes(ring: &CoefficientRing, n: &BigInt) -> Result<Vec<u64>> {
    let m = ring.nonunit_part(n);
    if ring.is_field() || m.is_one() || m.is_zero() {
        return Ok(vec![]);
    }
    Ok(factorize(&m)?.into_iter().map(|(p, _)| p).collect())
}

/// Whether `x` lies in the image of `r` inside Q.
pub fn is_defined_over(x: &RingElement, r: &CoefficientRing) -> Result<bool> {
    if !r.is_rational_subring() {
        return Err(Error::UnsupportedRing {
            ring: r.clone(),
            reason: "definability is tested inside Q".into(),
            primes: vec![],
        });
    }
    if !x.ring.is_rational_subring() {
        return Err(Error::UnsupportedRing {
            ring: x.ring.clone(),
            reason: "element is not rational".into(),
            primes: vec![],
        });
    }
    Ok(r.contains(&x.value))
}

// ---------------------------------------------------------------------------
// primes

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pollard_rho(n: u64) -> u64 {
    if n.is_multiple_of(2) {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = x.abs_diff(y).gcd(&n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

fn factor_u64(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    let d = pollard_rho(n);
    factor_u64(d, out);
    factor_u64(n / d, out);
}

/// Prime factorization of |n| as sorted (prime, exponent) pairs.
/// Fails with `Overflow` when a prime factor does not fit in 64 bits.
pub fn factorize(n: &BigInt) -> Result<Vec<(u64, u32)>> {
    let mut m: BigUint = n.magnitude().clone();
    if m.is_zero() {
        return Err(Error::Overflow("cannot factor zero".into()));
    }
    let mut primes = Vec::new();
    let mut p = 2u64;
    while m.to_u64().is_none() && p < 1_000_000 {
        let bp = BigUint::from(p);
        while (&m % &bp).is_zero() {
            m /= &bp;
            primes.push(p);
        }
        p += if p == 2 { 1 } else { 2 };
    }
    match m.to_u64() {
        Some(small) => factor_u64(small, &mut primes),
        None => return Err(Error::Overflow(format!("cannot factor {n}"))),
    }
    primes.sort_unstable();
    let mut out: Vec<(u64, u32)> = Vec::new();
    for q in primes {
        match out.last_mut() {
            Some((r, e)) if *r == q => *e += 1,
            _ => out.push((q, 1)),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> RingElement {
        RingElement::new(CoefficientRing::Rationals, frac(n, d)).unwrap()
    }

    #[test]
    fn ring_map_examples() {
        let z_to_q = RingMap::new(CoefficientRing::Integers, CoefficientRing::Rationals).unwrap();
        let seven = RingElement::new(CoefficientRing::Integers, int(7)).unwrap();
        assert_eq!(z_to_q.apply(&seven).unwrap().value(), &int(7));

        let z6 = CoefficientRing::localized([2, 3]).unwrap();
        let f5 = CoefficientRing::prime_field(5).unwrap();
        let m = RingMap::new(z6.clone(), f5.clone()).unwrap();
        let sixth = RingElement::new(z6, frac(1, 6)).unwrap();
        assert_eq!(m.apply(&sixth).unwrap().value(), &int(1));

        let m2 = RingMap::new(CoefficientRing::Integers, CoefficientRing::PrimeField(2)).unwrap();
        let four = RingElement::new(CoefficientRing::Integers, int(4)).unwrap();
        assert_eq!(m2.apply(&four).unwrap().value(), &int(0));
    }

    #[test]
    fn apply_rejects_wrong_source() {
        let m = RingMap::new(CoefficientRing::Integers, CoefficientRing::Rationals).unwrap();
        assert!(matches!(m.apply(&q(1, 2)), Err(Error::RingMismatch { .. })));
    }

    #[test]
    fn admissibility() {
        let z2 = CoefficientRing::localized([2]).unwrap();
        let z23 = CoefficientRing::localized([2, 3]).unwrap();
        assert!(RingMap::new(z2.clone(), z23.clone()).is_ok());
        assert!(RingMap::new(z23.clone(), z2.clone()).is_err());
        assert!(RingMap::new(z2.clone(), CoefficientRing::PrimeField(2)).is_err());
        assert!(RingMap::new(z2, CoefficientRing::PrimeField(3)).is_ok());
        assert!(RingMap::new(CoefficientRing::Rationals, CoefficientRing::Integers).is_err());
        assert!(RingMap::new(CoefficientRing::Rationals, CoefficientRing::PrimeField(7)).is_err());
    }

    #[test]
    fn minimal_localization_examples() {
        let r = minimal_localization(&[q(1, 6), q(3, 4)]).unwrap();
        assert_eq!(r, CoefficientRing::localized([2, 3]).unwrap());
        let r = minimal_localization(&[q(5, 1), q(-2, 1)]).unwrap();
        assert_eq!(r, CoefficientRing::Integers);
        let r = minimal_localization(&[q(1, 30), q(1, 2)]).unwrap();
        assert_eq!(r, CoefficientRing::LocalizedIntegers(vec![2, 3, 5]));
    }

    #[test]
    fn defined_over_examples() {
        let z6 = CoefficientRing::localized([2, 3]).unwrap();
        let z2 = CoefficientRing::localized([2]).unwrap();
        assert!(is_defined_over(&q(1, 6), &z6).unwrap());
        assert!(!is_defined_over(&q(1, 6), &z2).unwrap());
        assert!(is_defined_over(&q(4, 1), &CoefficientRing::Integers).unwrap());
        assert!(is_defined_over(&q(4, 1), &CoefficientRing::PrimeField(3)).is_err());
    }

    #[test]
    fn localized_normalizes() {
        assert_eq!(CoefficientRing::localized([3, 2, 3]).unwrap(), CoefficientRing::LocalizedIntegers(vec![2, 3]));
        assert_eq!(CoefficientRing::localized([]).unwrap(), CoefficientRing::Integers);
        assert_eq!(CoefficientRing::localized([4]), Err(Error::NotPrime(4)));
    }

    #[test]
    fn factorization() {
        assert_eq!(factorize(&BigInt::from(360)).unwrap(), vec![(2, 3), (3, 2), (5, 1)]);
        let big = BigInt::from(1_000_000_007u64) * BigInt::from(998_244_353u64);
        assert_eq!(factorize(&big).unwrap(), vec![(998_244_353, 1), (1_000_000_007, 1)]);
        assert!(is_prime(1_000_000_007));
        assert!(!is_prime(1));
    }

    #[test]
    fn prime_field_element_reduces() {
        let e = RingElement::new(CoefficientRing::PrimeField(5), frac(1, 2)).unwrap();
        assert_eq!(e.value(), &int(3));
        assert!(RingElement::new(CoefficientRing::PrimeField(5), frac(1, 5)).is_err());
    }
}
