//! Smoothness of finite-dimensional algebras concentrated in degree 0,
//! decided (up to a depth bound) on the normalized bar resolution
//!
//! `... → A ⊗ Ā^{⊗2} ⊗ A → A ⊗ Ā ⊗ A → A ⊗ A → A`
//!
//! of `A` as a bimodule. At depth `s` the syzygy `K_s` (with `K_0 = A`) is
//! tested for being a direct summand of the free bimodule `B_s`; two
//! isomorphic non-summand syzygies prove the resolution never stops.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use num_traits::Zero;

use crate::complexes::{is_quasi_iso, ChainMap, Complex};
use crate::dga::{DgAlgebra, DgModule};
use crate::error::{Error, Result};
use crate::linalg::{inverse, kernel, saturated_basis_over, solve_over, LinearSystem, Matrix, Solution, SystemSolution};
use crate::rings::{CoefficientRing, ExactData, Scalar};

/// Syzygies larger than this are not compared for isomorphism.
pub const ISO_RANK_LIMIT: usize = 64;
/// Bar terms larger than this end the search with an unknown outcome.
pub const BAR_RANK_LIMIT: usize = 4096;
const ISO_TRIALS: usize = 64;
const ISO_SEED: u64 = 0x5eed_0f_5a7a;

/// The normalized bar resolution of an algebra concentrated in degree 0.
///
/// `B_s` has basis `e_i ⊗ w ⊗ e_k` at index `w n² + i n + k`, where `w`
/// enumerates words of length `s` in the basis of `Ā` (big-endian).
#[derive(Clone, Debug)]
pub struct Bar {
    alg: DgAlgebra,
    n: usize,
    /// Basis elements of `A` that represent a basis of `Ā = A / k·1`.
    abar: Vec<usize>,
    /// Projection `A → Ā` in the `abar` coordinates.
    to_abar: Matrix,
}

impl Bar {
    pub fn new(a: &DgAlgebra) -> Result<Bar> {
        a.check()?;
        if !a.is_concentrated_in_degree_zero() {
            return Err(Error::UnsupportedAlgebra(
                "bar resolutions are computed for algebras concentrated in degree 0".into(),
            ));
        }
        let ring = a.ring();
        let n = a.dim();
        let u = a.unit();
        let u0 = (0..n)
            .find(|&i| ring.is_unit(&u[(i, 0)]))
            .ok_or_else(|| Error::UnsupportedAlgebra("no unit coefficient is invertible".into()))?;
        let abar: Vec<usize> = (0..n).filter(|&i| i != u0).collect();
        let inv = Scalar::from_integer(1.into()) / &u[(u0, 0)];
        let to_abar = Matrix::from_fn(n - 1, n, |r, c| {
            if c == u0 {
                ring.normalize(&-(&u[(abar[r], 0)] * &inv))
            } else if abar[r] == c {
                Scalar::from_integer(1.into())
            } else {
                Scalar::zero()
            }
        });
        Ok(Bar { alg: a.clone(), n, abar, to_abar })
    }

    pub fn algebra(&self) -> &DgAlgebra {
        &self.alg
    }

    pub fn ring(&self) -> &CoefficientRing {
        self.alg.ring()
    }

    /// Number of free bimodule generators of `B_s`.
    pub fn generators(&self, s: usize) -> usize {
        (self.n - 1).pow(s as u32)
    }

    pub fn dim(&self, s: usize) -> usize {
        self.n * self.n * self.generators(s)
    }

    fn idx(&self, w: usize, i: usize, k: usize) -> usize {
        w * self.n * self.n + i * self.n + k
    }

    fn letters(&self, w: usize, s: usize) -> Vec<usize> {
        let b = self.n - 1;
        let mut out = vec![0; s];
        let mut w = w;
        for j in (0..s).rev() {
            out[j] = w % b;
            w /= b;
        }
        out
    }

    fn word(&self, letters: &[usize]) -> usize {
        letters.iter().fold(0, |acc, &l| acc * (self.n - 1) + l)
    }

    fn right_mult(&self, b: usize) -> Matrix {
        Matrix::from_fn(self.n, self.n, |c, k| self.alg.left(k)[(c, b)].clone())
    }

    /// `(e_a ⊗ 1)·-` on `B_s`.
    pub fn left_action(&self, s: usize, a: usize) -> Matrix {
        Matrix::identity(self.generators(s)).kron(&self.alg.left(a).kron(&Matrix::identity(self.n)))
    }

    /// `(1 ⊗ e_b)·-`, i.e. right multiplication by `e_b`, on `B_s`.
    pub fn right_action(&self, s: usize, b: usize) -> Matrix {
        Matrix::identity(self.generators(s) * self.n).kron(&self.right_mult(b))
    }

    /// Actions of the bimodule generators `e_a ⊗ 1`, then `1 ⊗ e_b`.
    pub fn generator_actions(&self, s: usize) -> Vec<Matrix> {
        let mut out: Vec<Matrix> = (0..self.n).map(|a| self.left_action(s, a)).collect();
        out.extend((0..self.n).map(|b| self.right_action(s, b)));
        out
    }

    /// The same generators acting on `A` itself.
    pub fn algebra_generator_actions(&self) -> Vec<Matrix> {
        let mut out: Vec<Matrix> = (0..self.n).map(|a| self.alg.left(a).clone()).collect();
        out.extend((0..self.n).map(|b| self.right_mult(b)));
        out
    }

    /// Multiplication `A ⊗ A → A`.
    pub fn augmentation(&self) -> Matrix {
        let n = self.n;
        let mut m = Matrix::zeros(n, n * n);
        for i in 0..n {
            for k in 0..n {
                for c in 0..n {
                    m.set(c, i * n + k, self.alg.left(i)[(c, k)].clone());
                }
            }
        }
        m
    }

    /// `b'_s: B_s → B_{s-1}` for `s ≥ 1`; the augmentation for `s = 0`.
    pub fn differential(&self, s: usize) -> Matrix {
        if s == 0 {
            return self.augmentation();
        }
        let n = self.n;
        let ring = self.ring().clone();
        let mut m = Matrix::zeros(self.dim(s - 1), self.dim(s));
        let sgn = |j: usize| if j.is_multiple_of(2) { Scalar::from_integer(1.into()) } else { Scalar::from_integer((-1).into()) };
        for w in 0..self.generators(s) {
            let l = self.letters(w, s);
            let first = self.abar[l[0]];
            let last = self.abar[l[s - 1]];
            for i in 0..n {
                for k in 0..n {
                    let col = self.idx(w, i, k);
                    // e_i w_1 ⊗ w_2..w_s ⊗ e_k
                    let rest = self.word(&l[1..]);
                    let p = self.alg.mult(i, first);
                    for c in 0..n {
                        if !p[(c, 0)].is_zero() {
                            m.add_at(self.idx(rest, c, k), col, &p[(c, 0)]);
                        }
                    }
                    // (-1)^j e_i ⊗ .. π(w_j w_{j+1}) .. ⊗ e_k
                    for j in 1..s {
                        let prod = &self.to_abar * &self.alg.mult(self.abar[l[j - 1]], self.abar[l[j]]);
                        for (letter, _) in self.abar.iter().enumerate() {
                            let q = &prod[(letter, 0)];
                            if q.is_zero() {
                                continue;
                            }
                            let mut nl = l[..j - 1].to_vec();
                            nl.push(letter);
                            nl.extend_from_slice(&l[j + 1..]);
                            m.add_at(self.idx(self.word(&nl), i, k), col, &(q * sgn(j)));
                        }
                    }
                    // (-1)^s e_i ⊗ w_1..w_{s-1} ⊗ w_s e_k
                    let init = self.word(&l[..s - 1]);
                    let r = self.alg.mult(last, k);
                    for c in 0..n {
                        if !r[(c, 0)].is_zero() {
                            m.add_at(self.idx(init, i, c), col, &(&r[(c, 0)] * sgn(s)));
                        }
                    }
                }
            }
        }
        m.normalized(&ring)
    }

    /// Ambient space of `K_s`: `A` for `s = 0`, otherwise `B_{s-1}`.
    fn ambient_actions(&self, s: usize) -> Vec<Matrix> {
        if s == 0 {
            self.algebra_generator_actions()
        } else {
            self.generator_actions(s - 1)
        }
    }

    /// The syzygy `K_s`: `A` for `s = 0`, otherwise the kernel of
    /// `B_{s-1} → B_{s-2}` (of the augmentation when `s = 1`).
    pub fn syzygy(&self, s: usize) -> Result<Syzygy> {
        let ring = self.ring();
        let basis = if s == 0 {
            Matrix::identity(self.n)
        } else {
            let k = kernel(&self.differential(s - 1), &ring.fraction_field());
            saturated_basis_over(ring, &k)
        };
        let actions = self
            .ambient_actions(s)
            .iter()
            .map(|g| coordinates(ring, &basis, &(g * &basis)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Syzygy { depth: s, basis, actions })
    }

    /// `B_s → K_s`, the bar differential written in the syzygy basis.
    pub fn projection(&self, syz: &Syzygy, differential: &Matrix) -> Result<Matrix> {
        coordinates(self.ring(), &syz.basis, differential)
    }
}

/// Coordinates `x` with `basis · x = v`, required to lie in the ring.
fn coordinates(ring: &CoefficientRing, basis: &Matrix, v: &Matrix) -> Result<Matrix> {
    match solve_over(ring, basis, v)? {
        Solution::Solved(x) => Ok(x),
        _ => Err(Error::InvalidCertificate("vector outside the span of a syzygy basis".into())),
    }
}

/// A syzygy as a subspace of its ambient bar term with the induced action
/// of the bimodule generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Syzygy {
    pub depth: usize,
    pub basis: Matrix,
    pub actions: Vec<Matrix>,
}

impl Syzygy {
    pub fn rank(&self) -> usize {
        self.basis.cols()
    }
}

/// A bimodule section `σ: K_s → B_s` of the projection, if one exists.
fn find_section(bar: &Bar, syz: &Syzygy, projection: &Matrix) -> Result<Option<Matrix>> {
    let s = syz.depth;
    let k = syz.rank();
    let dim = bar.dim(s);
    let mut sys = LinearSystem::new(bar.ring().clone());
    let sigma = sys.unknown(dim, k);
    for (g, act) in bar.generator_actions(s).iter().zip(&syz.actions) {
        sys.equation(
            vec![(sigma, Matrix::identity(dim), act.clone()), (sigma, -g, Matrix::identity(k))],
            Matrix::zeros(dim, k),
        );
    }
    sys.equation(vec![(sigma, projection.clone(), Matrix::identity(k))], Matrix::identity(k));
    Ok(match sys.solve()? {
        SystemSolution::Solved(mut xs) => Some(xs.remove(0)),
        _ => None,
    })
}

fn is_bimodule_map(src: &Syzygy, dst: &Syzygy, phi: &Matrix, ring: &CoefficientRing) -> bool {
    phi.shape() == (dst.rank(), src.rank())
        && src.actions.iter().zip(&dst.actions).all(|(a, b)| (phi * a).eq_in(&(b * phi), ring))
}

/// An isomorphism `src → dst` of bimodules and its inverse, searched among
/// seeded random combinations of a basis of the bimodule maps.
fn find_isomorphism(src: &Syzygy, dst: &Syzygy, ring: &CoefficientRing) -> Result<Option<(Matrix, Matrix)>> {
    if src.rank() != dst.rank() || src.rank() > ISO_RANK_LIMIT {
        return Ok(None);
    }
    let k = src.rank();
    let mut sys = LinearSystem::new(ring.clone());
    let phi = sys.unknown(k, k);
    for (a, b) in src.actions.iter().zip(&dst.actions) {
        sys.equation(vec![(phi, Matrix::identity(k), a.clone()), (phi, -b, Matrix::identity(k))], Matrix::zeros(k, k));
    }
    let basis: Vec<Matrix> = sys.homogeneous_basis().into_iter().map(|mut v| v.remove(0)).collect();
    if basis.is_empty() {
        return Ok(None);
    }
    let field = ring.fraction_field();
    let mut rng = ChaCha8Rng::seed_from_u64(ISO_SEED ^ ((src.depth as u64) << 32) ^ dst.depth as u64);
    for _ in 0..ISO_TRIALS {
        let mut m = Matrix::zeros(k, k);
        for b in &basis {
            let c: i64 = rng.gen_range(-3..=3);
            if c != 0 {
                m = &m + &b.scale(&Scalar::from_integer(c.into()));
            }
        }
        // clear denominators so that integral candidates are tried first
        let m = m.normalized(ring);
        if let Some(inv) = inverse(&m, &field) {
            if m.all_in(ring) && inv.all_in(ring) {
                return Ok(Some((m, inv)));
            }
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmoothCertificate {
    pub algebra: DgAlgebra,
    pub length: usize,
    /// `[augmentation, b'_1, ..., b'_length]`.
    pub differentials: Vec<Matrix>,
    /// Basis of `K_length` inside `A` (length 0) or `B_{length-1}`.
    pub syzygy: Matrix,
    /// `π: B_length → K_length` in the syzygy basis.
    pub projection: Matrix,
    /// Bimodule section `σ` with `π σ = id`.
    pub section: Matrix,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NotSmoothCertificate {
    pub algebra: DgAlgebra,
    pub period: (usize, usize),
    pub source: Matrix,
    pub target: Matrix,
    /// Bimodule isomorphism `K_s → K_t` in the syzygy bases, and its inverse.
    pub isomorphism: Matrix,
    pub inverse: Matrix,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SmoothOutcome {
    Smooth(SmoothCertificate),
    NotSmooth(NotSmoothCertificate),
    Unknown { depth_exhausted: usize },
}

pub fn check_smooth(a: &DgAlgebra, max_depth: usize) -> Result<SmoothOutcome> {
    let bar = Bar::new(a)?;
    let ring = bar.ring().clone();
    let mut failed: Vec<Syzygy> = Vec::new();
    let mut differentials = Vec::new();
    for s in 0..=max_depth {
        if bar.dim(s) > BAR_RANK_LIMIT {
            return Ok(SmoothOutcome::Unknown { depth_exhausted: s.saturating_sub(1) });
        }
        differentials.push(bar.differential(s));
        let syz = bar.syzygy(s)?;
        let projection = bar.projection(&syz, &differentials[s])?;
        if let Some(section) = find_section(&bar, &syz, &projection)? {
            return Ok(SmoothOutcome::Smooth(SmoothCertificate {
                algebra: a.clone(),
                length: s,
                differentials,
                syzygy: syz.basis,
                projection,
                section,
            }));
        }
        for prev in &failed {
            if let Some((iso, inv)) = find_isomorphism(prev, &syz, &ring)? {
                return Ok(SmoothOutcome::NotSmooth(NotSmoothCertificate {
                    algebra: a.clone(),
                    period: (prev.depth, s),
                    source: prev.basis.clone(),
                    target: syz.basis,
                    isomorphism: iso,
                    inverse: inv,
                }));
            }
        }
        failed.push(syz);
    }
    Ok(SmoothOutcome::Unknown { depth_exhausted: max_depth })
}

/// The syzygy `ker(B_n → B_{n-1})` (the kernel of the augmentation for
/// `n = 0`) as a module over the enveloping algebra.
pub fn bar_syzygy(a: &DgAlgebra, n: usize) -> Result<DgModule> {
    let bar = Bar::new(a)?;
    let env = a.enveloping()?;
    let syz = bar.syzygy(n + 1)?;
    let dim = a.dim();
    let ring = a.ring();
    let act = (0..dim * dim)
        .map(|x| {
            let (i, k) = (x / dim, x % dim);
            let g = &bar.left_action(n, i) * &bar.right_action(n, k);
            coordinates(ring, &syz.basis, &(&g * &syz.basis))
        })
        .collect::<Result<Vec<_>>>()?;
    DgModule::new(&env, Complex::concentrated(ring.clone(), 0, syz.rank()), act)
}

fn fail(msg: impl Into<String>) -> Error {
    Error::InvalidCertificate(msg.into())
}

/// Checks that `basis` spans the saturated kernel of `d` and returns the
/// syzygy it describes.
fn check_kernel_basis(bar: &Bar, s: usize, basis: &Matrix) -> Result<Syzygy> {
    let ring = bar.ring();
    let field = ring.fraction_field();
    if s == 0 {
        if *basis != Matrix::identity(bar.n) {
            return Err(fail("K_0 must be the algebra itself"));
        }
    } else {
        let d = bar.differential(s - 1);
        if basis.rows() != d.cols() || !basis.all_in(ring) {
            return Err(fail(format!("K_{s} basis has the wrong shape or coefficients")));
        }
        if !(&d * basis).is_zero_in(ring) {
            return Err(fail(format!("K_{s} basis is not in the kernel")));
        }
        let expected = d.cols() - crate::linalg::rank(&d, &field);
        if basis.cols() != expected || crate::linalg::rank(basis, &field) != expected {
            return Err(fail(format!("K_{s} basis does not span the kernel")));
        }
        if !ring.is_field() {
            let sat = saturated_basis_over(ring, basis);
            if !matches!(solve_over(ring, basis, &sat)?, Solution::Solved(_)) {
                return Err(fail(format!("K_{s} basis is not saturated")));
            }
        }
    }
    let actions = bar
        .ambient_actions(s)
        .iter()
        .map(|g| coordinates(ring, basis, &(g * basis)))
        .collect::<Result<Vec<_>>>()
        .map_err(|_| fail(format!("K_{s} is not a sub-bimodule")))?;
    Ok(Syzygy { depth: s, basis: basis.clone(), actions })
}

impl SmoothCertificate {
    pub fn ring(&self) -> &CoefficientRing {
        self.algebra.ring()
    }

    pub fn verify(&self) -> Result<()> {
        let bar = Bar::new(&self.algebra)?;
        let ring = bar.ring().clone();
        let s = self.length;
        if self.differentials.len() != s + 1 {
            return Err(fail("wrong number of resolution differentials"));
        }
        for (j, d) in self.differentials.iter().enumerate() {
            if *d != bar.differential(j) {
                return Err(fail(format!("differential {j} is not the bar differential")));
            }
            let (src, dst) = (bar.generator_actions(j), if j == 0 { bar.algebra_generator_actions() } else { bar.generator_actions(j - 1) });
            for (a, b) in src.iter().zip(&dst) {
                if !(d * a).eq_in(&(b * d), &ring) {
                    return Err(fail(format!("differential {j} is not a bimodule map")));
                }
            }
            if j > 0 && !(&self.differentials[j - 1] * d).is_zero_in(&ring) {
                return Err(fail(format!("differentials {} and {j} do not compose to zero", j - 1)));
            }
        }
        let syz = check_kernel_basis(&bar, s, &self.syzygy)?;
        // 0 → K_s → B_{s-1} → ... → B_0 is a resolution of A
        let resolution = if s == 0 {
            Complex::concentrated(ring.clone(), 0, syz.rank())
        } else {
            let mut diffs = vec![self.syzygy.clone()];
            for j in (1..s).rev() {
                diffs.push(self.differentials[j].clone());
            }
            Complex::from_differentials(ring.clone(), -(s as i64), diffs)?
        };
        let target = Complex::concentrated(ring.clone(), 0, bar.n);
        let aug = if s == 0 { self.syzygy.clone() } else { self.differentials[0].clone() };
        let aug = ChainMap::from_fn(&resolution, &target, |n| if n == 0 { aug.clone() } else { Matrix::zeros(target.rank(n), resolution.rank(n)) })?;
        if !is_quasi_iso(&aug)? {
            return Err(fail("augmentation is not a quasi-isomorphism"));
        }
        if !(&self.syzygy * &self.projection).eq_in(&self.differentials[s], &ring) {
            return Err(fail("projection does not factor the last differential"));
        }
        let k = syz.rank();
        if self.section.shape() != (bar.dim(s), k) || !self.section.all_in(&ring) {
            return Err(fail("section has the wrong shape or coefficients"));
        }
        for (g, act) in bar.generator_actions(s).iter().zip(&syz.actions) {
            if !(&self.section * act).eq_in(&(g * &self.section), &ring) {
                return Err(fail("section is not a bimodule map"));
            }
        }
        if !(&self.projection * &self.section).eq_in(&Matrix::identity(k), &ring) {
            return Err(fail("projection ∘ section ≠ id"));
        }
        Ok(())
    }
}

impl NotSmoothCertificate {
    pub fn ring(&self) -> &CoefficientRing {
        self.algebra.ring()
    }

    pub fn verify(&self) -> Result<()> {
        let bar = Bar::new(&self.algebra)?;
        let ring = bar.ring().clone();
        let (s, t) = self.period;
        if s >= t {
            return Err(fail("period must satisfy s < t"));
        }
        let src = check_kernel_basis(&bar, s, &self.source)?;
        let dst = check_kernel_basis(&bar, t, &self.target)?;
        if !self.isomorphism.all_in(&ring) || !self.inverse.all_in(&ring) {
            return Err(fail("isomorphism has coefficients outside the ring"));
        }
        if !is_bimodule_map(&src, &dst, &self.isomorphism, &ring) || !is_bimodule_map(&dst, &src, &self.inverse, &ring) {
            return Err(fail("isomorphism is not a bimodule map"));
        }
        let k = src.rank();
        if !(&self.inverse * &self.isomorphism).eq_in(&Matrix::identity(k), &ring)
            || !(&self.isomorphism * &self.inverse).eq_in(&Matrix::identity(k), &ring)
        {
            return Err(fail("maps are not mutually inverse"));
        }
        for syz in [&src, &dst] {
            let proj = bar.projection(syz, &bar.differential(syz.depth))?;
            if find_section(&bar, syz, &proj)?.is_some() {
                return Err(fail(format!("K_{} is a direct summand of a free bimodule", syz.depth)));
            }
        }
        Ok(())
    }
}

impl ExactData for SmoothCertificate {
    fn coefficient_ring(&self) -> &CoefficientRing {
        self.algebra.ring()
    }

    fn visit_scalars(&self, f: &mut dyn FnMut(&Scalar)) {
        self.algebra.visit_scalars(f);
        for m in self.differentials.iter().chain([&self.syzygy, &self.projection, &self.section]) {
            m.entries().iter().for_each(&mut *f);
        }
    }

    fn map_scalars(&self, target: &CoefficientRing, f: &dyn Fn(&Scalar) -> Scalar) -> Self {
        SmoothCertificate {
            algebra: self.algebra.map_scalars(target, f),
            length: self.length,
            differentials: self.differentials.iter().map(|m| m.map(f)).collect(),
            syzygy: self.syzygy.map(f),
            projection: self.projection.map(f),
            section: self.section.map(f),
        }
    }
}

impl ExactData for NotSmoothCertificate {
    fn coefficient_ring(&self) -> &CoefficientRing {
        self.algebra.ring()
    }

    fn visit_scalars(&self, f: &mut dyn FnMut(&Scalar)) {
        self.algebra.visit_scalars(f);
        for m in [&self.source, &self.target, &self.isomorphism, &self.inverse] {
            m.entries().iter().for_each(&mut *f);
        }
    }

    fn map_scalars(&self, target: &CoefficientRing, f: &dyn Fn(&Scalar) -> Scalar) -> Self {
        NotSmoothCertificate {
            algebra: self.algebra.map_scalars(target, f),
            period: self.period,
            source: self.source.map(f),
            target: self.target.map(f),
            isomorphism: self.isomorphism.map(f),
            inverse: self.inverse.map(f),
        }
    }
}
