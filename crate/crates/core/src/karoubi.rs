//! Splitting homotopy idempotents of complexes through their telescope,
//! and rectifying homotopy-commutative ladders along split injections.
//!
//! At finite rank the telescope of `e` is the degreewise eventual image
//! `im(e^N)`; it is a subcomplex because `e^N` is a chain map.

use std::collections::BTreeMap;

use crate::complexes::{cohomology_basis, induced_map, solve_homotopy, ChainMap, Complex, Homotopy, HomotopySearch};
use crate::error::{Error, Result};
use crate::linalg::{inverse, saturated_basis_over, solve, solve_over, LinearSystem, Matrix, Solution, SystemSolution};
use crate::rings::{missing_primes, CoefficientRing, ExactData, Scalar};

/// An endomorphism `e` of a complex with a homotopy `h: e∘e ≃ e`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomotopyIdempotent {
    pub e: ChainMap,
    pub h: Homotopy,
}

impl HomotopyIdempotent {
    pub fn new(e: ChainMap, h: Homotopy) -> Result<Self> {
        let p = HomotopyIdempotent { e, h };
        p.shape_check()?;
        Ok(p)
    }

    /// A strict idempotent with the zero homotopy.
    pub fn strict(e: ChainMap) -> Result<Self> {
        let h = Homotopy::zero(&e);
        HomotopyIdempotent::new(e, h)
    }

    pub fn complex(&self) -> &Complex {
        self.e.src()
    }

    pub fn ring(&self) -> &CoefficientRing {
        self.e.ring()
    }

    fn shape_check(&self) -> Result<()> {
        if self.e.src() != self.e.dst() {
            return Err(Error::ShapeMismatch("idempotent must be an endomorphism".into()));
        }
        if self.h.src() != self.e.src() || self.h.dst() != self.e.src() {
            return Err(Error::ShapeMismatch("homotopy lives on a different complex".into()));
        }
        Ok(())
    }
}

impl ExactData for HomotopyIdempotent {
    fn coefficient_ring(&self) -> &CoefficientRing {
        self.e.ring()
    }

    fn visit_scalars(&self, f: &mut dyn FnMut(&Scalar)) {
        self.e.visit_scalars(f);
        self.h.visit_scalars(f);
    }

    fn map_scalars(&self, target: &CoefficientRing, f: &dyn Fn(&Scalar) -> Scalar) -> Self {
        HomotopyIdempotent { e: self.e.map_scalars(target, f), h: self.h.map_scalars(target, f) }
    }
}

/// Whether `e` is a chain map and `e∘e - e = d h + h d` exactly.
pub fn verify_idempotent(p: &HomotopyIdempotent) -> Result<bool> {
    p.shape_check()?;
    if !p.e.is_valid() {
        return Ok(false);
    }
    let ee = p.e.compose(&p.e)?;
    Ok(*p.h.from() == ee && *p.h.to() == p.e && p.h.is_valid())
}

fn power(m: &Matrix, k: usize, ring: &CoefficientRing) -> Matrix {
    let mut out = Matrix::identity(m.rows());
    for _ in 0..k {
        out = (&out * m).normalized(ring);
    }
    out
}

fn stabilization_power(b: &Complex) -> usize {
    b.ranks().iter().copied().max().unwrap_or(0).max(1)
}

/// The degreewise eventual image of `e` with its inclusion.
pub fn eventual_image(b: &Complex, e: &ChainMap) -> Result<(Complex, ChainMap)> {
    if e.src() != b || e.dst() != b {
        return Err(Error::ShapeMismatch("eventual image of a map that is not an endomorphism of the complex".into()));
    }
    let ring = b.ring();
    let big_n = stabilization_power(b);
    let bases: BTreeMap<i64, Matrix> =
        b.degrees().map(|n| (n, saturated_basis_over(ring, &power(&e.f(n), big_n, ring)))).collect();
    let basis = |n: i64| bases.get(&n).cloned().unwrap_or_else(|| Matrix::zeros(b.rank(n), 0));
    if b.is_zero() {
        let a = Complex::zero(ring.clone());
        return Ok((a.clone(), ChainMap::zero(&a, b)));
    }
    let mut diffs = Vec::new();
    for n in b.lo()..b.hi() {
        let (src, dst) = (basis(n), basis(n + 1));
        match solve_over(ring, &dst, &(&b.d(n) * &src))? {
            Solution::Solved(x) => diffs.push(x),
            _ => return Err(Error::InvalidChainMap("differential leaves the eventual image".into())),
        }
    }
    let ranks = b.degrees().map(|n| basis(n).cols()).collect();
    let a = Complex::new(ring.clone(), b.lo(), ranks, diffs)?;
    let i = ChainMap::from_fn(&a, b, basis)?;
    Ok((a, i))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplittingCertificate {
    pub input: HomotopyIdempotent,
    pub a: Complex,
    pub i: ChainMap,
    pub r: ChainMap,
    /// `r∘i ≃ id_A`.
    pub h_ri: Homotopy,
    /// `i∘r ≃ e`.
    pub h_ir: Homotopy,
}

impl SplittingCertificate {
    pub fn ring(&self) -> &CoefficientRing {
        self.a.ring()
    }

    /// Checks the stored equalities.
    pub fn verify(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::InvalidCertificate(msg.into()));
        if !verify_idempotent(&self.input)? {
            return fail("input is not a homotopy idempotent");
        }
        let b = self.input.complex();
        if self.i.src() != &self.a || self.i.dst() != b || self.r.src() != b || self.r.dst() != &self.a {
            return fail("i and r do not connect A and B");
        }
        self.a.check().map_err(|e| Error::InvalidCertificate(e.to_string()))?;
        if !self.i.is_valid() || !self.r.is_valid() {
            return fail("i or r is not a chain map");
        }
        let ri = self.r.compose(&self.i)?;
        if *self.h_ri.from() != ri || *self.h_ri.to() != ChainMap::identity(&self.a) || !self.h_ri.is_valid() {
            return fail("r∘i ≃ id fails");
        }
        let ir = self.i.compose(&self.r)?;
        if *self.h_ir.from() != ir || *self.h_ir.to() != self.input.e || !self.h_ir.is_valid() {
            return fail("i∘r ≃ e fails");
        }
        Ok(())
    }

    /// `H(r)H(i) = id` and `H(i)H(r) = H(e)` in every degree, over the
    /// fraction field.
    pub fn cohomology_identities(&self) -> Result<bool> {
        let b = self.input.complex();
        let field = self.ring().fraction_field();
        for n in b.degrees().chain(self.a.degrees()) {
            let (hi, hr, he) = (induced_map(&self.i, n)?, induced_map(&self.r, n)?, induced_map(&self.input.e, n)?);
            let dim_a = cohomology_basis(&self.a, n)?.dim();
            if !(&hr * &hi).eq_in(&Matrix::identity(dim_a), &field) || !(&hi * &hr).eq_in(&he, &field) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl ExactData for SplittingCertificate {
    fn coefficient_ring(&self) -> &CoefficientRing {
        self.a.ring()
    }

    fn visit_scalars(&self, f: &mut dyn FnMut(&Scalar)) {
        self.input.visit_scalars(f);
        self.a.visit_scalars(f);
        self.i.visit_scalars(f);
        self.r.visit_scalars(f);
        self.h_ri.visit_scalars(f);
        self.h_ir.visit_scalars(f);
    }

    fn map_scalars(&self, target: &CoefficientRing, f: &dyn Fn(&Scalar) -> Scalar) -> Self {
        SplittingCertificate {
            input: self.input.map_scalars(target, f),
            a: self.a.map_scalars(target, f),
            i: self.i.map_scalars(target, f),
            r: self.r.map_scalars(target, f),
            h_ri: self.h_ri.map_scalars(target, f),
            h_ir: self.h_ir.map_scalars(target, f),
        }
    }
}

fn unsupported(ring: &CoefficientRing, reason: &str, primes: Vec<u64>) -> Error {
    Error::UnsupportedRing { ring: ring.clone(), reason: reason.into(), primes }
}

/// The projection onto the eventual image along the eventual kernel,
/// `(e|_A)^{-N} · e^N` in coordinates of `A`.
fn fitting_projection(b: &Complex, e: &ChainMap, a: &Complex, i: &ChainMap) -> Result<ChainMap> {
    let ring = b.ring();
    let field = ring.fraction_field();
    let big_n = stabilization_power(b);
    let mut comps = BTreeMap::new();
    let mut bad: Vec<Scalar> = Vec::new();
    for n in b.degrees() {
        let basis = i.f(n);
        let en = power(&e.f(n), big_n, ring);
        let c = solve(&basis, &en, &field).ok_or_else(|| Error::InvalidChainMap("e^N leaves its image".into()))?;
        let u = solve(&basis, &(&e.f(n) * &basis), &field)
            .ok_or_else(|| Error::InvalidChainMap("e does not preserve its eventual image".into()))?;
        let uinv = inverse(&u, &field)
            .ok_or_else(|| Error::InvalidChainMap("e is not invertible on its eventual image".into()))?;
        let r = (&power(&uinv, big_n, &field) * &c).normalized(&field);
        bad.extend(r.entries().iter().filter(|x| !ring.contains(x)).cloned());
        comps.insert(n, r);
    }
    if !bad.is_empty() {
        return Err(unsupported(ring, "the Fitting decomposition does not split over the ring", missing_primes(ring, &bad)?));
    }
    ChainMap::new(b, a, comps)
}

/// Solves for `r`, `r∘i ≃ id` and `i∘r ≃ e` with `A` and `i` fixed.
fn joint_solve(p: &HomotopyIdempotent, a: &Complex, i: &ChainMap) -> Result<SplittingCertificate> {
    let b = p.complex();
    let ring = b.ring().clone();
    let mut sys = LinearSystem::new(ring.clone());
    let lo = b.lo().min(a.lo()) - 1;
    let hi = b.hi().max(a.hi()) + 1;
    let mut r = BTreeMap::new();
    let mut h1 = BTreeMap::new();
    let mut h2 = BTreeMap::new();
    for n in lo..=hi {
        if a.rank(n) * b.rank(n) > 0 {
            r.insert(n, sys.unknown(a.rank(n), b.rank(n)));
        }
        if a.rank(n - 1) * a.rank(n) > 0 {
            h1.insert(n, sys.unknown(a.rank(n - 1), a.rank(n)));
        }
        if b.rank(n - 1) * b.rank(n) > 0 {
            h2.insert(n, sys.unknown(b.rank(n - 1), b.rank(n)));
        }
    }
    let id = |k: usize| Matrix::identity(k);
    for n in lo..=hi {
        // d_A r_n = r_{n+1} d_B
        let mut t = Vec::new();
        if let Some(&x) = r.get(&n) {
            t.push((x, a.d(n), id(b.rank(n))));
        }
        if let Some(&x) = r.get(&(n + 1)) {
            t.push((x, -&id(a.rank(n + 1)), b.d(n)));
        }
        if a.rank(n + 1) * b.rank(n) > 0 {
            sys.equation(t, Matrix::zeros(a.rank(n + 1), b.rank(n)));
        }
        // r_n i_n - d h1_n - h1_{n+1} d = id
        if a.rank(n) > 0 {
            let mut t = Vec::new();
            if let Some(&x) = r.get(&n) {
                t.push((x, id(a.rank(n)), i.f(n)));
            }
            if let Some(&x) = h1.get(&n) {
                t.push((x, -&a.d(n - 1), id(a.rank(n))));
            }
            if let Some(&x) = h1.get(&(n + 1)) {
                t.push((x, -&id(a.rank(n)), a.d(n)));
            }
            sys.equation(t, id(a.rank(n)));
        }
        // i_n r_n - d h2_n - h2_{n+1} d = e_n
        if b.rank(n) > 0 {
            let mut t = Vec::new();
            if let Some(&x) = r.get(&n) {
                t.push((x, i.f(n), id(b.rank(n))));
            }
            if let Some(&x) = h2.get(&n) {
                t.push((x, -&b.d(n - 1), id(b.rank(n))));
            }
            if let Some(&x) = h2.get(&(n + 1)) {
                t.push((x, -&id(b.rank(n)), b.d(n)));
            }
            sys.equation(t, p.e.f(n));
        }
    }
    let xs = match sys.solve()? {
        SystemSolution::Solved(xs) => xs,
        SystemSolution::Inconsistent { rank, augmented_rank } => {
            return Err(Error::NoSplitFound(format!(
                "joint system for (r, H_ri, H_ir) is inconsistent: rank {rank}, augmented rank {augmented_rank}"
            )))
        }
        SystemSolution::Obstructed(primes) => {
            return Err(unsupported(&ring, "the splitting needs further primes inverted", primes))
        }
    };
    let pick = |m: &BTreeMap<i64, usize>| m.iter().map(|(&n, &u)| (n, xs[u].clone())).collect::<BTreeMap<_, _>>();
    let r = ChainMap::new(b, a, pick(&r))?;
    let ri = r.compose(i)?;
    let ir = i.compose(&r)?;
    let h_ri = Homotopy::new(&ri, &ChainMap::identity(a), pick(&h1))?;
    let h_ir = Homotopy::new(&ir, &p.e, pick(&h2))?;
    Ok(SplittingCertificate { input: p.clone(), a: a.clone(), i: i.clone(), r, h_ri, h_ir })
}

/// Splits a homotopy idempotent through its telescope.
pub fn telescope_split(p: &HomotopyIdempotent) -> Result<SplittingCertificate> {
    if !verify_idempotent(p)? {
        return Err(Error::InvalidIdempotent("e∘e - e ≠ dh + hd".into()));
    }
    let ring = p.ring().clone();
    if !ring.is_field() && !ring.is_rational_subring() {
        return Err(unsupported(&ring, "telescopes are split over fields and localizations of Z", vec![]));
    }
    let b = p.complex();
    let (a, i) = eventual_image(b, &p.e)?;
    let candidate = match fitting_projection(b, &p.e, &a, &i) {
        Ok(r) => {
            let ri = r.compose(&i)?;
            let ir = i.compose(&r)?;
            match solve_homotopy(&ir, &p.e)? {
                HomotopySearch::Found(h_ir) => Some(SplittingCertificate {
                    input: p.clone(),
                    a: a.clone(),
                    i: i.clone(),
                    h_ri: Homotopy::new(&ri, &ChainMap::identity(&a), BTreeMap::new())?,
                    r,
                    h_ir,
                }),
                _ => None,
            }
        }
        Err(Error::UnsupportedRing { .. }) => None,
        Err(e) => return Err(e),
    };
    let cert = match candidate {
        Some(c) if c.verify().is_ok() => c,
        _ => joint_solve(p, &a, &i)?,
    };
    cert.verify().map_err(|e| Error::NoSplitFound(format!("emitted certificate fails: {e}")))?;
    Ok(cert)
}

/// `H(u)³ = H(u)²` and `H(u)` invertible for `u = r∘i`, in every degree.
pub fn idempotent_up_to_power(c: &SplittingCertificate) -> Result<bool> {
    c.verify()?;
    let u = c.r.compose(&c.i)?;
    let field = c.ring().fraction_field();
    for n in c.a.degrees() {
        let h = induced_map(&u, n)?;
        let h2 = (&h * &h).normalized(&field);
        let h3 = (&h2 * &h).normalized(&field);
        if !h3.eq_in(&h2, &field) || inverse(&h, &field).is_none() {
            return Ok(false);
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// ladders

/// `X_0 → X_1 → ... → X_N` along degreewise split injections `f_n`, with
/// graded maps `s_n` (not required to commute with `d`) such that
/// `s_n ∘ f_n = id`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ladder {
    pub objects: Vec<Complex>,
    pub maps: Vec<ChainMap>,
    pub splits: Vec<ChainMap>,
}

impl Ladder {
    pub fn check(&self) -> Result<()> {
        let len = self.objects.len();
        if len == 0 || self.maps.len() != len - 1 || self.splits.len() != len - 1 {
            return Err(Error::ShapeMismatch(format!(
                "{} objects need {} maps and splits",
                len,
                len.saturating_sub(1)
            )));
        }
        for (n, (f, s)) in self.maps.iter().zip(&self.splits).enumerate() {
            let fail = |reason: &str| Err(Error::NotSplit { stage: n, reason: reason.into() });
            if f.src() != &self.objects[n] || f.dst() != &self.objects[n + 1] {
                return fail("map does not connect consecutive objects");
            }
            if s.src() != &self.objects[n + 1] || s.dst() != &self.objects[n] {
                return fail("split witness has the wrong ends");
            }
            if let Err(e) = f.check() {
                return fail(&e.to_string());
            }
            if !s.compose(f)?.is_identity() {
                return fail("s ∘ f ≠ id");
            }
        }
        Ok(())
    }
}

/// Maps `u_n: X_n → Y_n` with squares `g_n∘u_n ≃ u_{n+1}∘f_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LadderMap {
    pub src: Ladder,
    pub dst: Ladder,
    pub maps: Vec<ChainMap>,
    pub squares: Vec<Homotopy>,
}

impl LadderMap {
    pub fn check(&self) -> Result<()> {
        self.src.check()?;
        let len = self.src.objects.len();
        if self.dst.objects.len() != len || self.dst.maps.len() != len - 1 {
            return Err(Error::ShapeMismatch("ladders have different lengths".into()));
        }
        if self.maps.len() != len || self.squares.len() != len - 1 {
            return Err(Error::ShapeMismatch("ladder map has the wrong number of components".into()));
        }
        for (n, u) in self.maps.iter().enumerate() {
            if u.src() != &self.src.objects[n] || u.dst() != &self.dst.objects[n] {
                return Err(Error::ShapeMismatch(format!("u_{n} has the wrong ends")));
            }
            u.check()?;
        }
        for (n, h) in self.squares.iter().enumerate() {
            let lhs = self.dst.maps[n].compose(&self.maps[n])?;
            let rhs = self.maps[n + 1].compose(&self.src.maps[n])?;
            if *h.from() != lhs || *h.to() != rhs || !h.is_valid() {
                return Err(Error::InvalidSquare { stage: n });
            }
        }
        Ok(())
    }
}

/// Strictly commuting `v_n` with homotopies `v_n ≃ u_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rectification {
    pub maps: Vec<ChainMap>,
    pub homotopies: Vec<Homotopy>,
}

impl Rectification {
    pub fn verify(&self, l: &LadderMap) -> Result<()> {
        if self.maps.len() != l.maps.len() || self.homotopies.len() != l.maps.len() {
            return Err(Error::ShapeMismatch("rectification has the wrong length".into()));
        }
        for (n, (v, h)) in self.maps.iter().zip(&self.homotopies).enumerate() {
            if h.from() != v || *h.to() != l.maps[n] || !h.is_valid() {
                return Err(Error::InvalidHomotopy(format!("v_{n} ≃ u_{n} fails")));
            }
            if n + 1 < self.maps.len() {
                let lhs = l.dst.maps[n].compose(v)?;
                let rhs = self.maps[n + 1].compose(&l.src.maps[n])?;
                if lhs.total() != rhs.total() {
                    return Err(Error::InvalidSquare { stage: n });
                }
            }
        }
        Ok(())
    }
}

/// `v_0 = u_0` and `v_{n+1} = u_{n+1} + dH + Hd` with `H = G ∘ s_n`, where
/// `G: g_n v_n ≃ u_{n+1} f_n`.
pub fn rectify_ladder(l: &LadderMap) -> Result<Rectification> {
    l.check()?;
    let mut maps = vec![l.maps[0].clone()];
    let mut homotopies = vec![Homotopy::zero(&l.maps[0])];
    for n in 0..l.squares.len() {
        let g = &l.dst.maps[n];
        let k = &homotopies[n];
        // g v ≃ g u ≃ u_{n+1} f
        let big_g = k.post_compose(g)?.then(&l.squares[n])?;
        let s = &l.src.splits[n];
        let u_next = &l.maps[n + 1];
        let x = u_next.src();
        let y = u_next.dst();
        let h = |d: i64| &big_g.h(d) * &s.f(d);
        let v_next = ChainMap::from_fn(x, y, |d| {
            &(&u_next.f(d) + &(&y.d(d - 1) * &h(d))) + &(&h(d + 1) * &x.d(d))
        })?;
        let comps = (x.lo().min(y.lo()) - 1..=x.hi().max(y.hi()) + 1)
            .filter(|&d| y.rank(d - 1) * x.rank(d) > 0)
            .map(|d| (d, h(d)))
            .collect();
        let hom = Homotopy::new(&v_next, u_next, comps)?;
        maps.push(v_next);
        homotopies.push(hom);
    }
    let out = Rectification { maps, homotopies };
    out.verify(l)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexes::{cone, cohomology};
    use crate::rings::int;

    fn q() -> CoefficientRing {
        CoefficientRing::Rationals
    }

    fn flat(ranks: &[usize]) -> Complex {
        let diffs = ranks.windows(2).map(|w| Matrix::zeros(w[1], w[0])).collect();
        Complex::new(q(), 0, ranks.to_vec(), diffs).unwrap()
    }

    fn strict(c: &Complex, m: Matrix) -> HomotopyIdempotent {
        HomotopyIdempotent::strict(ChainMap::from_total(c, c, &m).unwrap()).unwrap()
    }

    #[test]
    fn trivial_idempotents_verify() {
        let c = flat(&[2]);
        for m in [Matrix::identity(2), Matrix::zeros(2, 2), Matrix::from_ints(2, 2, &[1, 0, 0, 0])] {
            assert!(verify_idempotent(&strict(&c, m)).unwrap());
        }
        assert!(!verify_idempotent(&strict(&c, Matrix::from_ints(2, 2, &[2, 0, 0, 0]))).unwrap());
    }

    #[test]
    fn eventual_image_examples() {
        let c = flat(&[2]);
        let (a, _) = eventual_image(&c, &ChainMap::identity(&c)).unwrap();
        assert_eq!(a, c);
        let (a, _) = eventual_image(&c, &ChainMap::zero(&c, &c)).unwrap();
        assert!(a.is_zero());
        let e = ChainMap::from_total(&c, &c, &Matrix::from_ints(2, 2, &[1, 1, 0, 0])).unwrap();
        let (a, i) = eventual_image(&c, &e).unwrap();
        assert_eq!(a.total_rank(), 1);
        let col = i.total();
        assert!(col[(1, 0)] == int(0) && col[(0, 0)] != int(0));
    }

    #[test]
    fn diagonal_split() {
        let c = flat(&[2]);
        let cert = telescope_split(&strict(&c, Matrix::from_ints(2, 2, &[1, 0, 0, 0]))).unwrap();
        assert_eq!(cert.a.total_rank(), 1);
        assert!(cert.h_ri.components().values().all(|m| m.is_zero()));
        assert!(cert.h_ir.components().values().all(|m| m.is_zero()));
        assert!(cert.cohomology_identities().unwrap());
        assert!(idempotent_up_to_power(&cert).unwrap());
    }

    #[test]
    fn identity_on_a_cone() {
        let k = Complex::concentrated(q(), 0, 1);
        let c = cone(&ChainMap::identity(&k)).unwrap();
        let cert = telescope_split(&HomotopyIdempotent::strict(ChainMap::identity(&c)).unwrap()).unwrap();
        assert_eq!(cert.a, c);
    }

    #[test]
    fn perturbed_idempotent_matches_cohomology_image() {
        // B: Q --1--> Q in degrees 0,1, plus Q² in degree 0
        let b = Complex::new(q(), 0, vec![3, 1], vec![Matrix::from_ints(1, 3, &[1, 0, 0])]).unwrap();
        let e0 = Matrix::from_ints(3, 3, &[1, 0, 0, 0, 1, 0, 0, 0, 0]);
        let e1 = Matrix::identity(1);
        let e = ChainMap::new(&b, &b, [(0, e0), (1, e1)].into_iter().collect()).unwrap();
        let s = Homotopy::new(&e, &e, [(1, Matrix::from_ints(3, 1, &[0, 2, -1]))].into_iter().collect()).unwrap();
        let perturbed = ChainMap::from_fn(&b, &b, |n| &e.f(n) + &s.boundary(n)).unwrap();
        let ee = perturbed.compose(&perturbed).unwrap();
        let h = crate::complexes::find_homotopy(&ee, &perturbed).unwrap().unwrap();
        let p = HomotopyIdempotent::new(perturbed, h).unwrap();
        let cert = telescope_split(&p).unwrap();
        assert!(cert.cohomology_identities().unwrap());
        // H(B) is Q² in degree 0, H(e) kills one summand
        assert_eq!(cohomology(&cert.a).unwrap().betti(0), 1);
    }

    #[test]
    fn integral_fitting_obstruction() {
        // ×2 on [Z --2--> Z] is idempotent up to the homotopy 1; its telescope
        // is everything, but id ≃ ×2 only after inverting 2.
        let z = CoefficientRing::Integers;
        let b = Complex::new(z.clone(), -1, vec![1, 1], vec![Matrix::from_ints(1, 1, &[2])]).unwrap();
        let e = ChainMap::from_fn(&b, &b, |_| Matrix::from_ints(1, 1, &[2])).unwrap();
        let ee = e.compose(&e).unwrap();
        let h = Homotopy::new(&ee, &e, [(0, Matrix::identity(1))].into_iter().collect()).unwrap();
        let p = HomotopyIdempotent::new(e, h).unwrap();
        assert!(verify_idempotent(&p).unwrap());
        match telescope_split(&p) {
            Err(Error::UnsupportedRing { primes, .. }) => assert_eq!(primes, vec![2]),
            other => panic!("{other:?}"),
        }
        let over_q = p.map_scalars(&q(), &|x| x.clone());
        telescope_split(&over_q).unwrap();
    }

    #[test]
    fn tampered_certificate_is_rejected() {
        let c = flat(&[2]);
        let mut cert = telescope_split(&strict(&c, Matrix::from_ints(2, 2, &[1, 0, 0, 0]))).unwrap();
        cert.r = ChainMap::zero(&c, &cert.a);
        assert!(cert.verify().is_err());
        assert!(idempotent_up_to_power(&cert).is_err());
    }

    fn one_stage(square: Option<Matrix>) -> LadderMap {
        // X_0 = Q → X_1 = Q² onto the first coordinate; Y = [Q --1--> Q] in degrees -1, 0
        let x0 = flat(&[1]);
        let x1 = flat(&[2]);
        let f = ChainMap::from_total(&x0, &x1, &Matrix::from_ints(2, 1, &[1, 0])).unwrap();
        let s = ChainMap::from_total(&x1, &x0, &Matrix::from_ints(1, 2, &[1, 0])).unwrap();
        let y = Complex::new(q(), -1, vec![1, 1], vec![Matrix::identity(1)]).unwrap();
        let g = ChainMap::identity(&y);
        let u0 = ChainMap::from_fn(&x0, &y, |n| if n == 0 { Matrix::identity(1) } else { Matrix::zeros(y.rank(n), x0.rank(n)) }).unwrap();
        let hm = square.clone().unwrap_or_else(|| Matrix::zeros(1, 1));
        // u1 f differs from u0 by d∘hm, so hm is a square homotopy
        let h_on_x1 = &hm * &s.f(0);
        let u1 = ChainMap::from_fn(&x1, &y, |n| {
            if n == 0 {
                &Matrix::from_ints(1, 2, &[1, 3]) - &(&y.d(-1) * &h_on_x1)
            } else {
                Matrix::zeros(y.rank(n), x1.rank(n))
            }
        })
        .unwrap();
        let lhs = g.compose(&u0).unwrap();
        let rhs = u1.compose(&f).unwrap();
        let sq = Homotopy::new(&lhs, &rhs, [(0, hm)].into_iter().collect()).unwrap();
        LadderMap {
            src: Ladder { objects: vec![x0.clone(), x1.clone()], maps: vec![f], splits: vec![s] },
            dst: Ladder { objects: vec![y.clone(), y.clone()], maps: vec![g], splits: vec![ChainMap::identity(&y)] },
            maps: vec![u0, u1],
            squares: vec![sq],
        }
    }

    #[test]
    fn strict_ladder_is_unchanged() {
        let l = one_stage(None);
        let r = rectify_ladder(&l).unwrap();
        assert_eq!(r.maps, l.maps);
    }

    #[test]
    fn nonstrict_square_is_rectified() {
        let l = one_stage(Some(Matrix::from_ints(1, 1, &[5])));
        assert_ne!(l.dst.maps[0].compose(&l.maps[0]).unwrap(), l.maps[1].compose(&l.src.maps[0]).unwrap());
        let r = rectify_ladder(&l).unwrap();
        r.verify(&l).unwrap();
    }

    #[test]
    fn bad_square_is_reported() {
        let mut l = one_stage(Some(Matrix::from_ints(1, 1, &[5])));
        let sq = &l.squares[0];
        l.squares[0] = Homotopy::new(sq.from(), sq.to(), BTreeMap::new()).unwrap();
        assert!(matches!(rectify_ladder(&l), Err(Error::InvalidSquare { stage: 0 })));
    }
}
