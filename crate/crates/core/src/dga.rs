//! Finite-rank dg-algebras and dg-modules given by structure constants.
//!
//! An algebra of rank `n` is stored on a degree-sorted basis `e_0..e_{n-1}`
//! (the total basis of its underlying complex) as the matrices `L_a` of left
//! multiplication by `e_a`, so that `e_a e_b = L_a e_b`. A module stores the
//! action matrices of the basis elements in the same way.

use num_traits::{One, Zero};

use crate::complexes::{cohomology, sign, CohomologyReport, Complex};
use crate::error::{Error, Result};
use crate::linalg::{LinearSystem, Matrix};
use crate::rings::{CoefficientRing, ExactData, Scalar};

/// `Σ v_c ops[c]` for a column vector `v`.
pub(crate) fn combine(ops: &[Matrix], v: &Matrix, size: usize) -> Matrix {
    let mut out = Matrix::zeros(size, size);
    for (c, op) in ops.iter().enumerate() {
        let x = &v[(c, 0)];
        if !x.is_zero() {
            out = &out + &op.scale(x);
        }
    }
    out
}

fn unit_vector(n: usize, i: usize) -> Matrix {
    let mut v = Matrix::zeros(n, 1);
    v.set(i, 0, Scalar::one());
    v
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DgAlgebra {
    underlying: Complex,
    left: Vec<Matrix>,
    unit: Matrix,
}

impl DgAlgebra {
    /// Shapes and coefficients are checked; the algebra axioms are not (see
    /// [`DgAlgebra::check`]).
    pub fn new(underlying: Complex, left: Vec<Matrix>, unit: Matrix) -> Result<Self> {
        let n = underlying.total_rank();
        let ring = underlying.ring().clone();
        if left.len() != n || left.iter().any(|l| l.shape() != (n, n)) || unit.shape() != (n, 1) {
            return Err(Error::ShapeMismatch(format!("structure constants do not fit a rank-{n} algebra")));
        }
        for x in left.iter().flat_map(|l| l.entries()).chain(unit.entries()) {
            if !ring.contains(&ring.normalize(x)) {
                return Err(Error::NotInRing { value: x.to_string(), ring });
            }
        }
        let left = left.iter().map(|l| l.normalized(&ring)).collect();
        let unit = unit.normalized(&ring);
        Ok(DgAlgebra { underlying, left, unit })
    }

    /// Algebra from basis degrees (nondecreasing), the total differential,
    /// the nonzero products `e_a e_b = Σ c_k e_k` and the unit vector.
    pub fn from_table(
        ring: CoefficientRing,
        degrees: &[i64],
        differential: &Matrix,
        products: &[(usize, usize, Vec<Scalar>)],
        unit: Vec<Scalar>,
    ) -> Result<Self> {
        let n = degrees.len();
        let underlying = Complex::from_total(ring, degrees, differential)?;
        let mut left = vec![Matrix::zeros(n, n); n];
        for (a, b, v) in products {
            if *a >= n || *b >= n || v.len() != n {
                return Err(Error::ShapeMismatch(format!("product entry ({a}, {b}) does not fit rank {n}")));
            }
            for (k, x) in v.iter().enumerate() {
                left[*a].set(k, *b, x.clone());
            }
        }
        DgAlgebra::new(underlying, left, Matrix::column_vector(unit))
    }

    pub fn ground(ring: CoefficientRing) -> Self {
        let c = Complex::concentrated(ring, 0, 1);
        DgAlgebra { underlying: c, left: vec![Matrix::identity(1)], unit: Matrix::identity(1) }
    }

    /// `M_n` with basis `E_ij` at index `i n + j`.
    pub fn matrix_algebra(ring: CoefficientRing, n: usize) -> Self {
        let dim = n * n;
        let mut left = vec![Matrix::zeros(dim, dim); dim];
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    left[i * n + j].set(i * n + l, j * n + l, Scalar::one());
                }
            }
        }
        let unit = Matrix::from_fn(dim, 1, |k, _| if k / n == k % n { Scalar::one() } else { Scalar::zero() });
        DgAlgebra { underlying: Complex::concentrated(ring, 0, dim), left, unit }
    }

    /// Upper-triangular `n × n` matrices, with basis the `E_ij`, `i ≤ j`, in
    /// row-major order. For `n = 2` this is the path algebra of the A₂ quiver.
    pub fn upper_triangular(ring: CoefficientRing, n: usize) -> Self {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
        let dim = pairs.len();
        let index = |i: usize, j: usize| pairs.iter().position(|&p| p == (i, j)).unwrap();
        let mut left = vec![Matrix::zeros(dim, dim); dim];
        for (a, &(i, j)) in pairs.iter().enumerate() {
            for (b, &(k, l)) in pairs.iter().enumerate() {
                if j == k {
                    left[a].set(index(i, l), b, Scalar::one());
                }
            }
        }
        let unit = Matrix::from_fn(dim, 1, |a, _| if pairs[a].0 == pairs[a].1 { Scalar::one() } else { Scalar::zero() });
        DgAlgebra { underlying: Complex::concentrated(ring, 0, dim), left, unit }
    }

    /// `k[x]/x^k` with basis `1, x, ..., x^{k-1}`.
    pub fn truncated_polynomial(ring: CoefficientRing, k: usize) -> Self {
        let mut left = vec![Matrix::zeros(k, k); k];
        for (a, l) in left.iter_mut().enumerate() {
            for b in 0..k {
                if a + b < k {
                    l.set(a + b, b, Scalar::one());
                }
            }
        }
        DgAlgebra { underlying: Complex::concentrated(ring, 0, k), left, unit: unit_vector(k, 0) }
    }

    /// `k[x]/x²` with `|x| = -1` and `dx = 1`; an acyclic dg-algebra.
    pub fn acyclic_interval(ring: CoefficientRing) -> Self {
        // basis: x (degree -1), 1 (degree 0)
        let c = Complex::from_differentials(ring, -1, vec![Matrix::identity(1)]).expect("shape");
        let lx = Matrix::from_ints(2, 2, &[0, 1, 0, 0]);
        DgAlgebra { underlying: c, left: vec![lx, Matrix::identity(2)], unit: unit_vector(2, 1) }
    }

    pub fn ring(&self) -> &CoefficientRing {
        self.underlying.ring()
    }

    pub fn dim(&self) -> usize {
        self.left.len()
    }

    pub fn underlying(&self) -> &Complex {
        &self.underlying
    }

    pub fn basis_degrees(&self) -> Vec<i64> {
        self.underlying.basis_degrees()
    }

    pub fn left(&self, a: usize) -> &Matrix {
        &self.left[a]
    }

    pub fn left_all(&self) -> &[Matrix] {
        &self.left
    }

    pub fn unit(&self) -> &Matrix {
        &self.unit
    }

    pub fn differential(&self) -> Matrix {
        self.underlying.total_differential()
    }

    /// `e_a e_b` as a column vector.
    pub fn mult(&self, a: usize, b: usize) -> Matrix {
        self.left[a].column(b)
    }

    /// Left multiplication by an arbitrary element.
    pub fn left_by(&self, v: &Matrix) -> Matrix {
        combine(&self.left, v, self.dim())
    }

    pub fn is_concentrated_in_degree_zero(&self) -> bool {
        self.underlying.is_zero() || (self.underlying.lo() == 0 && self.underlying.hi() == 0)
    }

    /// Errors naming the first violated axiom.
    pub fn check(&self) -> Result<()> {
        let ring = self.ring().clone();
        let n = self.dim();
        let deg = self.basis_degrees();
        self.underlying.check().map_err(|e| Error::InvalidAlgebra(e.to_string()))?;
        for a in 0..n {
            for c in 0..n {
                for b in 0..n {
                    if !self.left[a][(c, b)].is_zero() && deg[c] != deg[a] + deg[b] {
                        return Err(Error::InvalidAlgebra(format!("e_{a} e_{b} has a component outside degree {}", deg[a] + deg[b])));
                    }
                }
            }
        }
        for c in 0..n {
            if !self.unit[(c, 0)].is_zero() && deg[c] != 0 {
                return Err(Error::InvalidAlgebra("unit is not of degree 0".into()));
            }
        }
        if !self.left_by(&self.unit).eq_in(&Matrix::identity(n), &ring) {
            return Err(Error::InvalidAlgebra("1·a ≠ a".into()));
        }
        for a in 0..n {
            if !(&self.left[a] * &self.unit).eq_in(&unit_vector(n, a), &ring) {
                return Err(Error::InvalidAlgebra(format!("e_{a}·1 ≠ e_{a}")));
            }
        }
        for a in 0..n {
            for b in 0..n {
                let lhs = self.left_by(&self.mult(a, b));
                let rhs = &self.left[a] * &self.left[b];
                if !lhs.eq_in(&rhs, &ring) {
                    return Err(Error::InvalidAlgebra(format!("associativity fails for e_{a}, e_{b}")));
                }
            }
        }
        let d = self.differential();
        for a in 0..n {
            let lhs = &d * &self.left[a];
            let rhs = &self.left_by(&d.column(a)) + &(&self.left[a] * &d).scale(&sign(deg[a]));
            if !lhs.eq_in(&rhs, &ring) {
                return Err(Error::InvalidAlgebra(format!("Leibniz rule fails for e_{a}")));
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> bool {
        self.check().is_ok()
    }

    /// `A^op` with `m_op(a, b) = (-1)^{|a||b|} m(b, a)`.
    pub fn opposite(&self) -> DgAlgebra {
        let n = self.dim();
        let deg = self.basis_degrees();
        let left = (0..n)
            .map(|a| {
                let mut l = Matrix::zeros(n, n);
                for b in 0..n {
                    let s = sign(deg[a] * deg[b]);
                    for c in 0..n {
                        let x = &self.left[b][(c, a)];
                        if !x.is_zero() {
                            l.set(c, b, x * &s);
                        }
                    }
                }
                l
            })
            .collect();
        DgAlgebra { underlying: self.underlying.clone(), left, unit: self.unit.clone() }
    }

    /// Position in `(self ⊗ other)`'s total basis of `e_i ⊗ f_k`.
    pub fn tensor_index(&self, other: &DgAlgebra, i: usize, k: usize) -> usize {
        tensor_index(&self.underlying, &other.underlying, i, k)
    }

    /// `A ⊗ B` with `(a ⊗ b)(a' ⊗ b') = (-1)^{|b||a'|} aa' ⊗ bb'`.
    pub fn tensor(&self, other: &DgAlgebra) -> Result<DgAlgebra> {
        let c = crate::complexes::tensor(&self.underlying, &other.underlying)?;
        let (n, m) = (self.dim(), other.dim());
        let dim = n * m;
        let (da, db) = (self.basis_degrees(), other.basis_degrees());
        let idx = |i: usize, k: usize| tensor_index(&self.underlying, &other.underlying, i, k);
        let mut left = vec![Matrix::zeros(dim, dim); dim];
        for a in 0..n {
            for b in 0..m {
                let l = &mut left[idx(a, b)];
                for a2 in 0..n {
                    for b2 in 0..m {
                        let s = sign(db[b] * da[a2]);
                        for c in 0..n {
                            let x = &self.left[a][(c, a2)];
                            if x.is_zero() {
                                continue;
                            }
                            for e in 0..m {
                                let y = &other.left[b][(e, b2)];
                                if !y.is_zero() {
                                    l.add_at(idx(c, e), idx(a2, b2), &(x * y * &s));
                                }
                            }
                        }
                    }
                }
            }
        }
        let mut unit = Matrix::zeros(dim, 1);
        for a in 0..n {
            for b in 0..m {
                let x = &self.unit[(a, 0)] * &other.unit[(b, 0)];
                if !x.is_zero() {
                    unit.set(idx(a, b), 0, x);
                }
            }
        }
        DgAlgebra::new(c, left, unit)
    }

    /// `A ⊗ A^op`; bimodules are left modules over it via `(a ⊗ b)·m = a m b`.
    pub fn enveloping(&self) -> Result<DgAlgebra> {
        self.check()?;
        self.tensor(&self.opposite())
    }
}

/// Position of `x_i ⊗ y_k` in the total basis of `tensor(c, d)`.
pub fn tensor_index(c: &Complex, d: &Complex, i: usize, k: usize) -> usize {
    let dc = c.basis_degrees();
    let dd = d.basis_degrees();
    let (p, q) = (dc[i], dd[k]);
    let a = i - c.offset(p);
    let b = k - d.offset(q);
    let n = p + q;
    let block = crate::complexes::tensor_blocks(c, d, n)
        .into_iter()
        .find(|blk| blk.0 == p)
        .expect("nonzero tensor block");
    // offset of degree n in the tensor complex
    let lo = c.lo() + d.lo();
    let before: usize = (lo..n)
        .map(|m| crate::complexes::tensor_blocks(c, d, m).iter().map(|b| b.2).sum::<usize>())
        .sum();
    before + block.1 + a * d.rank(q) + b
}

impl ExactData for DgAlgebra {
    fn coefficient_ring(&self) -> &CoefficientRing {
        self.ring()
    }

    fn visit_scalars(&self, f: &mut dyn FnMut(&Scalar)) {
        self.underlying.visit_scalars(f);
        for l in &self.left {
            l.entries().iter().for_each(&mut *f);
        }
        self.unit.entries().iter().for_each(&mut *f);
    }

    fn map_scalars(&self, target: &CoefficientRing, f: &dyn Fn(&Scalar) -> Scalar) -> Self {
        DgAlgebra {
            underlying: self.underlying.map_scalars(target, f),
            left: self.left.iter().map(|l| l.map(f)).collect(),
            unit: self.unit.map(f),
        }
    }
}

// ---------------------------------------------------------------------------
// modules

/// A left dg-module; `act[a]` is the matrix of `e_a · -` on the total basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DgModule {
    algebra: DgAlgebra,
    underlying: Complex,
    act: Vec<Matrix>,
}

impl DgModule {
    pub fn new(algebra: &DgAlgebra, underlying: Complex, act: Vec<Matrix>) -> Result<Self> {
        if algebra.ring() != underlying.ring() {
            return Err(Error::RingMismatch { expected: algebra.ring().clone(), found: underlying.ring().clone() });
        }
        let m = underlying.total_rank();
        if act.len() != algebra.dim() || act.iter().any(|x| x.shape() != (m, m)) {
            return Err(Error::ShapeMismatch(format!("action does not fit a rank-{m} module")));
        }
        let ring = algebra.ring();
        for x in act.iter().flat_map(|a| a.entries()) {
            if !ring.contains(&ring.normalize(x)) {
                return Err(Error::NotInRing { value: x.to_string(), ring: ring.clone() });
            }
        }
        let act = act.iter().map(|a| a.normalized(ring)).collect();
        Ok(DgModule { algebra: algebra.clone(), underlying, act })
    }

    /// Module from basis degrees, total differential and action matrices.
    pub fn from_total(algebra: &DgAlgebra, degrees: &[i64], differential: &Matrix, act: Vec<Matrix>) -> Result<Self> {
        let c = Complex::from_total(algebra.ring().clone(), degrees, differential)?;
        DgModule::new(algebra, c, act)
    }

    /// `A` acting on itself by left multiplication.
    pub fn regular(algebra: &DgAlgebra) -> Self {
        DgModule { algebra: algebra.clone(), underlying: algebra.underlying.clone(), act: algebra.left.clone() }
    }

    pub fn zero(algebra: &DgAlgebra) -> Self {
        DgModule {
            algebra: algebra.clone(),
            underlying: Complex::zero(algebra.ring().clone()),
            act: vec![Matrix::zeros(0, 0); algebra.dim()],
        }
    }

    /// A complex viewed as a module over the ground ring.
    pub fn over_ground(c: &Complex) -> Self {
        let k = DgAlgebra::ground(c.ring().clone());
        DgModule { algebra: k, underlying: c.clone(), act: vec![Matrix::identity(c.total_rank())] }
    }

    /// The column module `k^n` over `M_n(k)`.
    pub fn column_module(ring: CoefficientRing, n: usize) -> Self {
        let a = DgAlgebra::matrix_algebra(ring.clone(), n);
        let act = (0..n * n)
            .map(|k| {
                let mut m = Matrix::zeros(n, n);
                m.set(k / n, k % n, Scalar::one());
                m
            })
            .collect();
        DgModule { algebra: a, underlying: Complex::concentrated(ring, 0, n), act }
    }

    /// The one-dimensional module over the upper-triangular algebra on which
    /// `E_jj` acts by 1 and every other basis element by 0.
    pub fn simple_upper_triangular(ring: CoefficientRing, n: usize, j: usize) -> Self {
        let a = DgAlgebra::upper_triangular(ring.clone(), n);
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |k| (i, k))).collect();
        let act = pairs
            .iter()
            .map(|&(i, k)| if i == j && k == j { Matrix::identity(1) } else { Matrix::zeros(1, 1) })
            .collect();
        DgModule { algebra: a, underlying: Complex::concentrated(ring, 0, 1), act }
    }

    pub fn algebra(&self) -> &DgAlgebra {
        &self.algebra
    }

    pub fn underlying(&self) -> &Complex {
        &self.underlying
    }

    pub fn ring(&self) -> &CoefficientRing {
        self.underlying.ring()
    }

    pub fn dim(&self) -> usize {
        self.underlying.total_rank()
    }

    pub fn act(&self, a: usize) -> &Matrix {
        &self.act[a]
    }

    pub fn actions(&self) -> &[Matrix] {
        &self.act
    }

    pub fn act_by(&self, v: &Matrix) -> Matrix {
        combine(&self.act, v, self.dim())
    }

    pub fn differential(&self) -> Matrix {
        self.underlying.total_differential()
    }

    pub fn check(&self) -> Result<()> {
        let a = &self.algebra;
        a.check().map_err(|e| Error::InvalidModule(format!("algebra: {e}")))?;
        self.underlying.check().map_err(|e| Error::InvalidModule(e.to_string()))?;
        let ring = self.ring().clone();
        let m = self.dim();
        let da = a.basis_degrees();
        let dm = self.underlying.basis_degrees();
        for (x, act) in self.act.iter().enumerate() {
            for i in 0..m {
                for j in 0..m {
                    if !act[(i, j)].is_zero() && dm[i] != da[x] + dm[j] {
                        return Err(Error::InvalidModule(format!("e_{x} does not act with degree {}", da[x])));
                    }
                }
            }
        }
        if !self.act_by(a.unit()).eq_in(&Matrix::identity(m), &ring) {
            return Err(Error::InvalidModule("unit does not act as the identity".into()));
        }
        for x in 0..a.dim() {
            for y in 0..a.dim() {
                let lhs = self.act_by(&a.mult(x, y));
                let rhs = &self.act[x] * &self.act[y];
                if !lhs.eq_in(&rhs, &ring) {
                    return Err(Error::InvalidModule(format!("action is not associative on e_{x}, e_{y}")));
                }
            }
        }
        let d = self.differential();
        let d_alg = a.differential();
        for x in 0..a.dim() {
            let lhs = &d * &self.act[x];
            let rhs = &self.act_by(&d_alg.column(x)) + &(&self.act[x] * &d).scale(&sign(da[x]));
            if !lhs.eq_in(&rhs, &ring) {
                return Err(Error::InvalidModule(format!("Leibniz rule fails for e_{x}")));
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> bool {
        self.check().is_ok()
    }

    /// Whether `phi` (total matrix `dst × src`) is a degree-0 map of dg-modules.
    pub fn is_module_map(src: &DgModule, dst: &DgModule, phi: &Matrix) -> bool {
        module_map_defect(src, dst, phi).is_none()
    }

    /// Basis (over the fraction field) of the degree-0 module maps `src → dst`.
    pub fn hom_basis(src: &DgModule, dst: &DgModule) -> Result<Vec<Matrix>> {
        if src.algebra != dst.algebra {
            return Err(Error::InvalidModule("modules over different algebras".into()));
        }
        let sys = module_map_system(src, dst, None);
        let (sys, blocks) = sys;
        Ok(sys
            .homogeneous_basis()
            .into_iter()
            .map(|xs| assemble_blocks(src, dst, &blocks, &xs))
            .collect())
    }
}

/// Description of the first way `phi` fails to be a module map.
pub fn module_map_defect(src: &DgModule, dst: &DgModule, phi: &Matrix) -> Option<String> {
    if src.algebra != dst.algebra {
        return Some("modules over different algebras".into());
    }
    if phi.shape() != (dst.dim(), src.dim()) {
        return Some(format!("map has shape {:?}", phi.shape()));
    }
    let ring = src.ring();
    let (ds, dd) = (src.underlying.basis_degrees(), dst.underlying.basis_degrees());
    for i in 0..phi.rows() {
        for j in 0..phi.cols() {
            if !phi[(i, j)].is_zero() && dd[i] != ds[j] {
                return Some("map does not preserve degrees".into());
            }
        }
    }
    if !(&dst.differential() * phi).eq_in(&(phi * &src.differential()), ring) {
        return Some("map does not commute with differentials".into());
    }
    for x in 0..src.algebra.dim() {
        if !(&dst.act[x] * phi).eq_in(&(phi * &src.act[x]), ring) {
            return Some(format!("map does not commute with e_{x}"));
        }
    }
    None
}

/// Degree blocks `(degree, dst offset, dst rank, src offset, src rank)`.
type Blocks = Vec<(i64, usize, usize, usize, usize)>;

/// Linear system whose unknowns are the degree blocks of a module map
/// `src → dst`; with `rhs` the map must also satisfy `rhs.0 · phi = rhs.1`.
pub(crate) fn module_map_system(src: &DgModule, dst: &DgModule, rhs: Option<(&Matrix, &Matrix)>) -> (LinearSystem, Blocks) {
    let ring = src.ring().clone();
    let mut sys = LinearSystem::new(ring);
    let (cs, cd) = (&src.underlying, &dst.underlying);
    let mut blocks = Vec::new();
    let lo = cs.lo().min(cd.lo());
    let hi = cs.hi().max(cd.hi());
    for n in lo..=hi {
        if cs.rank(n) * cd.rank(n) > 0 {
            blocks.push((n, cd.offset(n), cd.rank(n), cs.offset(n), cs.rank(n)));
        }
    }
    let units: Vec<usize> = blocks.iter().map(|b| sys.unknown(b.2, b.4)).collect();
    let (ms, md) = (src.dim(), dst.dim());
    let incl = |off: usize, r: usize, total: usize| Matrix::from_fn(total, r, |i, j| if i == off + j { Scalar::one() } else { Scalar::zero() });
    let proj = |off: usize, r: usize, total: usize| incl(off, r, total).transpose();
    // phi = Σ J_n X_n P_n
    let constraint = |left_d: &Matrix, right_s: &Matrix, sys: &mut LinearSystem| {
        let mut terms = Vec::new();
        for (k, b) in blocks.iter().enumerate() {
            let j = incl(b.1, b.2, md);
            let p = proj(b.3, b.4, ms);
            terms.push((units[k], j.clone(), &p * right_s));
            terms.push((units[k], &(-left_d) * &j, p));
        }
        sys.equation(terms, Matrix::zeros(md, ms));
    };
    constraint(&dst.differential(), &src.differential(), &mut sys);
    for x in 0..src.algebra.dim() {
        constraint(&dst.act[x], &src.act[x], &mut sys);
    }
    if let Some((l, r)) = rhs {
        let terms = blocks
            .iter()
            .enumerate()
            .map(|(k, b)| (units[k], l * &incl(b.1, b.2, md), proj(b.3, b.4, ms)))
            .collect();
        sys.equation(terms, r.clone());
    }
    (sys, blocks)
}

pub(crate) fn assemble_blocks(src: &DgModule, dst: &DgModule, blocks: &Blocks, xs: &[Matrix]) -> Matrix {
    let mut phi = Matrix::zeros(dst.dim(), src.dim());
    for (k, b) in blocks.iter().enumerate() {
        phi.paste(b.1, b.3, &xs[k]);
    }
    phi
}

impl ExactData for DgModule {
    fn coefficient_ring(&self) -> &CoefficientRing {
        self.ring()
    }

    fn visit_scalars(&self, f: &mut dyn FnMut(&Scalar)) {
        self.algebra.visit_scalars(f);
        self.underlying.visit_scalars(f);
        for a in &self.act {
            a.entries().iter().for_each(&mut *f);
        }
    }

    fn map_scalars(&self, target: &CoefficientRing, f: &dyn Fn(&Scalar) -> Scalar) -> Self {
        DgModule {
            algebra: self.algebra.map_scalars(target, f),
            underlying: self.underlying.map_scalars(target, f),
            act: self.act.iter().map(|a| a.map(f)).collect(),
        }
    }
}

// ---------------------------------------------------------------------------
// properness

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProperCertificate {
    pub algebra: DgAlgebra,
    pub report: CohomologyReport,
}

impl ProperCertificate {
    /// Re-derives the report from the algebra.
    pub fn verify(&self) -> Result<()> {
        self.algebra.check()?;
        if cohomology(self.algebra.underlying())? != self.report {
            return Err(Error::InvalidCertificate("cohomology report does not match the algebra".into()));
        }
        Ok(())
    }
}

/// A finite-rank free model is always proper; the report carries the
/// cohomology of the underlying complex.
pub fn check_proper(a: &DgAlgebra) -> Result<ProperCertificate> {
    a.check()?;
    Ok(ProperCertificate { algebra: a.clone(), report: cohomology(a.underlying())? })
}

/// Membership in the modules with perfect underlying complex, with the
/// cohomology of that complex.
pub fn is_pspa(e: &DgModule) -> Result<(bool, CohomologyReport)> {
    e.check()?;
    Ok((true, cohomology(e.underlying())?))
}
