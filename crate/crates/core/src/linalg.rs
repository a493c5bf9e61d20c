//! Dense exact matrices and the solvers everything else reduces to:
//! Gaussian elimination over Q and F_p, Smith normal form over Z, and
//! integral solving over the localizations Z[1/S].

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Index, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rings::{factorize, mod_inverse, CoefficientRing, Scalar};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self[(i, j)].to_string()).collect();
            write!(f, "[{}]", row.join(" "))?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = Scalar;
    fn index(&self, (i, j): (usize, usize)) -> &Scalar {
        &self.data[i * self.cols + j]
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![Scalar::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Scalar::one());
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Scalar>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_ints(rows: usize, cols: usize, data: &[i64]) -> Self {
        assert_eq!(data.len(), rows * cols, "from_ints shape");
        Matrix { rows, cols, data: data.iter().map(|&x| crate::rings::int(x)).collect() }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Scalar) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn column_vector(v: Vec<Scalar>) -> Self {
        let n = v.len();
        Matrix { rows: n, cols: 1, data: v }
    }

    pub fn scalar_identity(n: usize, c: &Scalar) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, c.clone());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn entries(&self) -> &[Scalar] {
        &self.data
    }

    pub fn entries_mut(&mut self) -> &mut [Scalar] {
        &mut self.data
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        let c = self.cols;
        self.data[i * c + j] = v;
    }

    pub fn add_at(&mut self, i: usize, j: usize, v: &Scalar) {
        let c = self.cols;
        self.data[i * c + j] += v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols && *self == Matrix::identity(self.rows)
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn scale(&self, c: &Scalar) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * c).collect() }
    }

    pub fn map(&self, f: impl Fn(&Scalar) -> Scalar) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn column(&self, j: usize) -> Matrix {
        Matrix::from_fn(self.rows, 1, |i, _| self[(i, j)].clone())
    }

    pub fn column_vec(&self, j: usize) -> Vec<Scalar> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn select_columns(&self, cols: &[usize]) -> Matrix {
        Matrix::from_fn(self.rows, cols.len(), |i, j| self[(i, cols[j])].clone())
    }

    pub fn select_rows(&self, rows: &[usize]) -> Matrix {
        Matrix::from_fn(rows.len(), self.cols, |i, j| self[(rows[i], j)].clone())
    }

    pub fn submatrix(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Matrix {
        Matrix::from_fn(r1 - r0, c1 - c0, |i, j| self[(r0 + i, c0 + j)].clone())
    }

    /// Writes `block` with its top-left corner at `(r0, c0)`.
    pub fn paste(&mut self, r0: usize, c0: usize, block: &Matrix) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self.set(r0 + i, c0 + j, block[(i, j)].clone());
            }
        }
    }

    pub fn hstack(blocks: &[&Matrix]) -> Matrix {
        let rows = blocks.first().map_or(0, |b| b.rows);
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut m = Matrix::zeros(rows, cols);
        let mut c0 = 0;
        for b in blocks {
            assert_eq!(b.rows, rows, "hstack row mismatch");
            m.paste(0, c0, b);
            c0 += b.cols;
        }
        m
    }

    pub fn vstack(blocks: &[&Matrix]) -> Matrix {
        let cols = blocks.first().map_or(0, |b| b.cols);
        let rows = blocks.iter().map(|b| b.rows).sum();
        let mut m = Matrix::zeros(rows, cols);
        let mut r0 = 0;
        for b in blocks {
            assert_eq!(b.cols, cols, "vstack column mismatch");
            m.paste(r0, 0, b);
            r0 += b.rows;
        }
        m
    }

    pub fn block_diag(blocks: &[&Matrix]) -> Matrix {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut m = Matrix::zeros(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            m.paste(r0, c0, b);
            r0 += b.rows;
            c0 += b.cols;
        }
        m
    }

    /// Kronecker product; index of (i, k) is `i * other.rows + k`.
    pub fn kron(&self, other: &Matrix) -> Matrix {
        let mut m = Matrix::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = &self[(i, j)];
                if a.is_zero() {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        let b = &other[(k, l)];
                        if !b.is_zero() {
                            m.set(i * other.rows + k, j * other.cols + l, a * b);
                        }
                    }
                }
            }
        }
        m
    }

    pub fn pow(&self, k: usize) -> Matrix {
        let mut r = Matrix::identity(self.rows);
        for _ in 0..k {
            r = &r * self;
        }
        r
    }

    /// Canonical representatives of all entries in `ring`.
    pub fn normalized(&self, ring: &CoefficientRing) -> Matrix {
        match ring {
            CoefficientRing::PrimeField(_) => self.map(|x| ring.normalize(x)),
            _ => self.clone(),
        }
    }

    pub fn is_zero_in(&self, ring: &CoefficientRing) -> bool {
        match ring {
            CoefficientRing::PrimeField(_) => self.data.iter().all(|x| ring.normalize(x).is_zero()),
            _ => self.is_zero(),
        }
    }

    pub fn eq_in(&self, other: &Matrix, ring: &CoefficientRing) -> bool {
        self.shape() == other.shape() && (self - other).is_zero_in(ring)
    }

    pub fn all_in(&self, ring: &CoefficientRing) -> bool {
        self.data.iter().all(|x| ring.contains(x))
    }

    fn checked_mul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch {:?} * {:?}", self.shape(), rhs.shape());
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs[(k, j)];
                    if !b.is_zero() {
                        out.data[i * rhs.cols + j] += a * b;
                    }
                }
            }
        }
        out
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        self.checked_mul(rhs)
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.shape(), rhs.shape(), "matrix sum shape mismatch");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.shape(), rhs.shape(), "matrix difference shape mismatch");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &Matrix {
    type Output = Matrix;
    fn neg(self) -> Matrix {
        self.map(|x| -x)
    }
}

// ---------------------------------------------------------------------------
// elimination over a field

fn field_div(ring: &CoefficientRing, a: &Scalar, b: &Scalar) -> Scalar {
    match ring {
        CoefficientRing::PrimeField(p) => {
            let bp = BigInt::from(*p);
            let inv = mod_inverse(&b.to_integer().mod_floor(&bp), &bp).expect("nonzero pivot");
            BigRational::from_integer((a.to_integer() * inv).mod_floor(&bp))
        }
        _ => a / b,
    }
}

fn require_field(ring: &CoefficientRing) {
    assert!(ring.is_field(), "field elimination over {ring}");
}

/// Reduced row echelon form over a field and the pivot columns.
pub fn rref(m: &Matrix, field: &CoefficientRing) -> (Matrix, Vec<usize>) {
    require_field(field);
    let mut a = m.normalized(field);
    let (rows, cols) = a.shape();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[(i, c)].is_zero()) else {
            continue;
        };
        if p != r {
            for j in 0..cols {
                a.data.swap(p * cols + j, r * cols + j);
            }
        }
        let piv = a[(r, c)].clone();
        if !piv.is_one() {
            for j in c..cols {
                let v = field_div(field, &a[(r, j)], &piv);
                a.set(r, j, v);
            }
        }
        let pivot_row: Vec<(usize, Scalar)> =
            (c..cols).filter(|&j| !a[(r, j)].is_zero()).map(|j| (j, a[(r, j)].clone())).collect();
        for i in 0..rows {
            if i == r || a[(i, c)].is_zero() {
                continue;
            }
            let factor = a[(i, c)].clone();
            for (j, v) in &pivot_row {
                let x = &a[(i, *j)] - &factor * v;
                a.set(i, *j, field.normalize(&x));
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

pub fn rank(m: &Matrix, field: &CoefficientRing) -> usize {
    rref(m, field).1.len()
}

/// Basis of the right kernel, as columns.
pub fn kernel(m: &Matrix, field: &CoefficientRing) -> Matrix {
    let (r, pivots) = rref(m, field);
    let cols = m.cols();
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    let mut k = Matrix::zeros(cols, free.len());
    for (idx, &f) in free.iter().enumerate() {
        k.set(f, idx, Scalar::one());
        for (row, &p) in pivots.iter().enumerate() {
            let v = -&r[(row, f)];
            k.set(p, idx, field.normalize(&v));
        }
    }
    k
}

/// Indices of a maximal independent set of columns (leftmost first).
pub fn column_basis_indices(m: &Matrix, field: &CoefficientRing) -> Vec<usize> {
    rref(m, field).1
}

/// A particular solution of `a x = b` (free variables zero), if any.
pub fn solve(a: &Matrix, b: &Matrix, field: &CoefficientRing) -> Option<Matrix> {
    assert_eq!(a.rows(), b.rows(), "solve shape mismatch");
    let aug = Matrix::hstack(&[a, b]);
    let (r, pivots) = rref(&aug, field);
    if pivots.iter().any(|&p| p >= a.cols()) {
        return None;
    }
    let mut x = Matrix::zeros(a.cols(), b.cols());
    for (row, &p) in pivots.iter().enumerate() {
        for j in 0..b.cols() {
            x.set(p, j, r[(row, a.cols() + j)].clone());
        }
    }
    Some(x)
}

pub fn inverse(m: &Matrix, field: &CoefficientRing) -> Option<Matrix> {
    if m.rows() != m.cols() {
        return None;
    }
    let n = m.rows();
    if n == 0 {
        return Some(Matrix::zeros(0, 0));
    }
    let (r, pivots) = rref(&Matrix::hstack(&[m, &Matrix::identity(n)]), field);
    if pivots.len() < n || pivots[n - 1] >= n {
        return None;
    }
    Some(r.submatrix(0, n, n, 2 * n))
}

// ---------------------------------------------------------------------------
// integer matrices

type IntMatrix = Vec<Vec<BigInt>>;

fn lcm_of_denominators<'a>(xs: impl Iterator<Item = &'a Scalar>) -> BigInt {
    xs.fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

/// Multiplies each row by the lcm of its denominators.
fn integral_rows(m: &Matrix, extra: Option<&Matrix>) -> (IntMatrix, Option<IntMatrix>) {
    let mut a = Vec::with_capacity(m.rows());
    let mut b = extra.map(|_| Vec::with_capacity(m.rows()));
    for i in 0..m.rows() {
        let row = &m.entries()[i * m.cols()..(i + 1) * m.cols()];
        let mut l = lcm_of_denominators(row.iter());
        if let Some(e) = extra {
            let erow = &e.entries()[i * e.cols()..(i + 1) * e.cols()];
            l = l.lcm(&lcm_of_denominators(erow.iter()));
            let scaled: Vec<BigInt> = erow.iter().map(|x| (x * &l).to_integer()).collect();
            b.as_mut().unwrap().push(scaled);
        }
        a.push(row.iter().map(|x| (x * &l).to_integer()).collect());
    }
    (a, b)
}

/// Diagonalization `U M V = D` by unimodular operations. `U` is applied to
/// the `carry` columns instead of being stored; `V` and optionally `U^{-1}`
/// are tracked.
struct Diagonalization {
    diag: Vec<BigInt>,
    v: IntMatrix,
    carry: IntMatrix,
    u_inv: Option<IntMatrix>,
}

fn diagonalize(mut a: IntMatrix, cols: usize, mut carry: IntMatrix, track_u_inv: bool) -> Diagonalization {
    let rows = a.len();
    let mut v: IntMatrix = (0..cols)
        .map(|i| (0..cols).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();
    let mut u_inv: Option<IntMatrix> = track_u_inv.then(|| {
        (0..rows)
            .map(|i| (0..rows).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
            .collect()
    });
    let mut diag = Vec::new();
    let n = rows.min(cols);
    for t in 0..n {
        loop {
            // smallest nonzero entry of the trailing block
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if !a[i][j].is_zero() {
                        match best {
                            Some((bi, bj)) if a[bi][bj].abs() <= a[i][j].abs() => {}
                            _ => best = Some((i, j)),
                        }
                    }
                }
            }
            let Some((pi, pj)) = best else {
                return Diagonalization { diag, v, carry, u_inv };
            };
            if pi != t {
                a.swap(pi, t);
                carry.swap(pi, t);
                if let Some(ui) = u_inv.as_mut() {
                    for row in ui.iter_mut() {
                        row.swap(pi, t);
                    }
                }
            }
            if pj != t {
                for row in a.iter_mut() {
                    row.swap(pj, t);
                }
                for row in v.iter_mut() {
                    row.swap(pj, t);
                }
            }
            let piv = a[t][t].clone();
            let mut clean = true;
            for i in t + 1..rows {
                if a[i][t].is_zero() {
                    continue;
                }
                let q = &a[i][t] / &piv;
                if !q.is_zero() {
                    let (top, bottom) = a.split_at_mut(i);
                    for j in t..cols {
                        if !top[t][j].is_zero() {
                            bottom[0][j] -= &q * &top[t][j];
                        }
                    }
                    let (ctop, cbottom) = carry.split_at_mut(i);
                    for j in 0..ctop[t].len() {
                        if !ctop[t][j].is_zero() {
                            cbottom[0][j] -= &q * &ctop[t][j];
                        }
                    }
                    if let Some(ui) = u_inv.as_mut() {
                        // row_i -= q row_t  <=>  col_t of U^{-1} += q col_i
                        for row in ui.iter_mut() {
                            if !row[i].is_zero() {
                                let add = &q * &row[i];
                                row[t] += add;
                            }
                        }
                    }
                }
                if !a[i][t].is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..cols {
                if a[t][j].is_zero() {
                    continue;
                }
                let q = &a[t][j] / &piv;
                if !q.is_zero() {
                    for row in a.iter_mut() {
                        if !row[t].is_zero() {
                            let sub = &q * &row[t];
                            row[j] -= sub;
                        }
                    }
                    for row in v.iter_mut() {
                        if !row[t].is_zero() {
                            let sub = &q * &row[t];
                            row[j] -= sub;
                        }
                    }
                }
                if !a[t][j].is_zero() {
                    clean = false;
                }
            }
            if clean {
                break;
            }
        }
        if a[t][t].is_negative() {
            for x in a[t].iter_mut() {
                *x = -x.clone();
            }
            for x in carry[t].iter_mut() {
                *x = -x.clone();
            }
            if let Some(ui) = u_inv.as_mut() {
                for row in ui.iter_mut() {
                    row[t] = -row[t].clone();
                }
            }
        }
        diag.push(a[t][t].clone());
    }
    Diagonalization { diag, v, carry, u_inv }
}

/// Nonzero elementary divisors d_1 | d_2 | ... of a matrix over Z
/// (the matrix is made integral by clearing each row's denominators first).
pub fn elementary_divisors(m: &Matrix) -> Vec<BigInt> {
    let (a, _) = integral_rows(m, None);
    let carry = vec![Vec::new(); a.len()];
    let mut d = diagonalize(a, m.cols(), carry, false).diag;
    // restore the divisibility chain
    let n = d.len();
    for i in 0..n {
        for j in i + 1..n {
            let g = d[i].gcd(&d[j]);
            let l = d[i].lcm(&d[j]);
            d[i] = g;
            d[j] = l;
        }
    }
    d
}

/// Outcome of solving a linear system over a coefficient ring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Solution {
    Solved(Matrix),
    /// No solution even over the fraction field.
    Inconsistent,
    /// Solvable over the fraction field but not over the ring; inverting the
    /// listed primes makes it solvable.
    Obstructed(Vec<u64>),
}

/// Solves `a x = b` over `ring` (entries of `a` and `b` must lie in `ring`).
pub fn solve_over(ring: &CoefficientRing, a: &Matrix, b: &Matrix) -> Result<Solution> {
    if ring.is_field() {
        return Ok(match solve(a, b, ring) {
            Some(x) => Solution::Solved(x),
            None => Solution::Inconsistent,
        });
    }
    let Some(x) = solve(a, b, &CoefficientRing::Rationals) else {
        return Ok(Solution::Inconsistent);
    };
    if x.all_in(ring) {
        return Ok(Solution::Solved(x));
    }
    integral_solve(ring, a, b)
}

/// Solves `a x = b` over Z or Z[1/S] by a Smith-type diagonalization.
fn integral_solve(ring: &CoefficientRing, a: &Matrix, b: &Matrix) -> Result<Solution> {
    // drop zero equations before the integral elimination
    let keep: Vec<usize> = (0..a.rows())
        .filter(|&i| (0..a.cols()).any(|j| !a[(i, j)].is_zero()) || (0..b.cols()).any(|j| !b[(i, j)].is_zero()))
        .collect();
    let a = a.select_rows(&keep);
    let b = b.select_rows(&keep);
    let (ai, bi) = integral_rows(&a, Some(&b));
    let dz = diagonalize(ai, a.cols(), bi.unwrap(), false);
    let r = dz.diag.len();
    for row in dz.carry.iter().skip(r) {
        if row.iter().any(|x| !x.is_zero()) {
            return Ok(Solution::Inconsistent);
        }
    }
    let mut y = Matrix::zeros(a.cols(), b.cols());
    let mut obstruction = std::collections::BTreeSet::new();
    let inverted = ring.inverted_primes().unwrap_or(&[]);
    for i in 0..r {
        for j in 0..b.cols() {
            let v = BigRational::new(dz.carry[i][j].clone(), dz.diag[i].clone());
            if !ring.contains(&v) {
                for (p, _) in factorize(v.denom())? {
                    if !inverted.contains(&p) {
                        obstruction.insert(p);
                    }
                }
            }
            y.set(i, j, v);
        }
    }
    if !obstruction.is_empty() {
        return Ok(Solution::Obstructed(obstruction.into_iter().collect()));
    }
    let vm = Matrix::from_fn(a.cols(), a.cols(), |i, j| BigRational::from_integer(dz.v[i][j].clone()));
    Ok(Solution::Solved(&vm * &y))
}

/// A basis (as columns) of the `ring`-module spanned by the columns of `m`.
/// Over Z[1/S] the basis comes from a Smith decomposition of the column span.
pub fn image_basis_over(ring: &CoefficientRing, m: &Matrix) -> Matrix {
    if ring.is_field() {
        return m.select_columns(&column_basis_indices(m, ring));
    }
    let (a, _) = integral_rows(m, None);
    let rows = m.rows();
    let carry = vec![Vec::new(); rows];
    let dz = diagonalize(a, m.cols(), carry, true);
    let u_inv = dz.u_inv.unwrap();
    // rows were scaled by units of Z[1/S]; column span of the scaled matrix
    // is U^{-1} D.  Undo the row scaling afterwards.
    let scales: Vec<BigInt> = (0..rows)
        .map(|i| lcm_of_denominators(m.entries()[i * m.cols()..(i + 1) * m.cols()].iter()))
        .collect();
    let r = dz.diag.len();
    Matrix::from_fn(rows, r, |i, j| {
        let d = ring.nonunit_part(&dz.diag[j]);
        BigRational::new(&u_inv[i][j] * d, scales[i].clone())
    })
}

/// A basis of the saturation (in `ring^n`) of the span of the columns of `m`.
/// Over a field this is just a column basis.
pub fn saturated_basis_over(ring: &CoefficientRing, m: &Matrix) -> Matrix {
    if ring.is_field() {
        return m.select_columns(&column_basis_indices(m, ring));
    }
    // Column scaling does not change the rational span.
    let mut scaled = m.clone();
    for j in 0..m.cols() {
        let l = lcm_of_denominators((0..m.rows()).map(|i| &m[(i, j)]));
        for i in 0..m.rows() {
            let v = &m[(i, j)] * BigRational::from_integer(l.clone());
            scaled.set(i, j, v);
        }
    }
    let a: IntMatrix = (0..scaled.rows())
        .map(|i| (0..scaled.cols()).map(|j| scaled[(i, j)].to_integer()).collect())
        .collect();
    let carry = vec![Vec::new(); m.rows()];
    let dz = diagonalize(a, m.cols(), carry, true);
    let u_inv = dz.u_inv.unwrap();
    let r = dz.diag.len();
    Matrix::from_fn(m.rows(), r, |i, j| BigRational::from_integer(u_inv[i][j].clone()))
}

// ---------------------------------------------------------------------------
// block linear systems

/// A linear system in several matrix-valued unknowns, with equations of the
/// form `Σ L_k X_{u_k} R_k = C`.
#[derive(Clone, Debug)]
pub struct LinearSystem {
    ring: CoefficientRing,
    unknowns: Vec<(usize, usize)>,
    equations: Vec<Equation>,
}

#[derive(Clone, Debug)]
struct Equation {
    rows: usize,
    cols: usize,
    terms: Vec<(usize, Matrix, Matrix)>,
    rhs: Matrix,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SystemSolution {
    Solved(Vec<Matrix>),
    Inconsistent { rank: usize, augmented_rank: usize },
    Obstructed(Vec<u64>),
}

impl LinearSystem {
    pub fn new(ring: CoefficientRing) -> Self {
        LinearSystem { ring, unknowns: Vec::new(), equations: Vec::new() }
    }

    pub fn unknown(&mut self, rows: usize, cols: usize) -> usize {
        self.unknowns.push((rows, cols));
        self.unknowns.len() - 1
    }

    pub fn unknown_shape(&self, u: usize) -> (usize, usize) {
        self.unknowns[u]
    }

    /// Adds `Σ left * X_u * right = rhs`.
    pub fn equation(&mut self, terms: Vec<(usize, Matrix, Matrix)>, rhs: Matrix) {
        let (rows, cols) = rhs.shape();
        for (u, l, r) in &terms {
            let (ur, uc) = self.unknowns[*u];
            assert_eq!(l.shape(), (rows, ur), "left factor shape");
            assert_eq!(r.shape(), (uc, cols), "right factor shape");
        }
        if rows * cols == 0 {
            return;
        }
        self.equations.push(Equation { rows, cols, terms, rhs });
    }

    fn offsets(&self) -> (Vec<usize>, usize) {
        let mut offs = Vec::with_capacity(self.unknowns.len());
        let mut total = 0;
        for (r, c) in &self.unknowns {
            offs.push(total);
            total += r * c;
        }
        (offs, total)
    }

    pub fn assemble(&self) -> (Matrix, Matrix) {
        let (offs, ncols) = self.offsets();
        let nrows: usize = self.equations.iter().map(|e| e.rows * e.cols).sum();
        let mut a = Matrix::zeros(nrows, ncols);
        let mut b = Matrix::zeros(nrows, 1);
        let mut r0 = 0;
        for eq in &self.equations {
            for (u, l, r) in &eq.terms {
                let uc = self.unknowns[*u].1;
                for ea in 0..eq.rows {
                    for i in 0..l.cols() {
                        let lv = &l[(ea, i)];
                        if lv.is_zero() {
                            continue;
                        }
                        for j in 0..r.rows() {
                            for eb in 0..eq.cols {
                                let rv = &r[(j, eb)];
                                if !rv.is_zero() {
                                    a.add_at(r0 + ea * eq.cols + eb, offs[*u] + i * uc + j, &(lv * rv));
                                }
                            }
                        }
                    }
                }
            }
            for ea in 0..eq.rows {
                for eb in 0..eq.cols {
                    b.set(r0 + ea * eq.cols + eb, 0, eq.rhs[(ea, eb)].clone());
                }
            }
            r0 += eq.rows * eq.cols;
        }
        (a.normalized(&self.ring), b.normalized(&self.ring))
    }

    fn unpack(&self, x: &Matrix) -> Vec<Matrix> {
        let (offs, _) = self.offsets();
        self.unknowns
            .iter()
            .zip(offs)
            .map(|(&(r, c), off)| Matrix::from_fn(r, c, |i, j| x[(off + i * c + j, 0)].clone()))
            .collect()
    }

    /// The system as sparse rows over the fraction field, with right-hand sides.
    fn sparse_rows(&self) -> (Vec<SparseRow>, usize) {
        let (offs, ncols) = self.offsets();
        let field = self.ring.fraction_field();
        let mut rows = Vec::new();
        for eq in &self.equations {
            let nz_left: Vec<Vec<Vec<(usize, &Scalar)>>> = eq
                .terms
                .iter()
                .map(|(_, l, _)| {
                    (0..eq.rows)
                        .map(|a| (0..l.cols()).filter(|&i| !l[(a, i)].is_zero()).map(|i| (i, &l[(a, i)])).collect())
                        .collect()
                })
                .collect();
            let nz_right: Vec<Vec<Vec<(usize, &Scalar)>>> = eq
                .terms
                .iter()
                .map(|(_, _, r)| {
                    (0..eq.cols)
                        .map(|b| (0..r.rows()).filter(|&j| !r[(j, b)].is_zero()).map(|j| (j, &r[(j, b)])).collect())
                        .collect()
                })
                .collect();
            for a in 0..eq.rows {
                for b in 0..eq.cols {
                    let mut acc: BTreeMap<usize, Scalar> = BTreeMap::new();
                    for (t, (u, _, _)) in eq.terms.iter().enumerate() {
                        let uc = self.unknowns[*u].1;
                        for &(i, lv) in &nz_left[t][a] {
                            for &(j, rv) in &nz_right[t][b] {
                                *acc.entry(offs[*u] + i * uc + j).or_insert_with(Scalar::zero) += lv * rv;
                            }
                        }
                    }
                    let rhs = &eq.rhs[(a, b)];
                    if !rhs.is_zero() {
                        acc.insert(ncols, rhs.clone());
                    }
                    let row: SparseRow = acc
                        .into_iter()
                        .map(|(c, v)| (c, field.normalize(&v)))
                        .filter(|(_, v)| !v.is_zero())
                        .collect();
                    if !row.is_empty() {
                        rows.push(row);
                    }
                }
            }
        }
        (rows, ncols)
    }

    fn echelon(&self) -> (SparseEchelon, usize) {
        let (rows, ncols) = self.sparse_rows();
        let mut ech = SparseEchelon::new(self.ring.fraction_field(), ncols);
        for r in rows {
            ech.insert(r);
        }
        (ech, ncols)
    }

    pub fn solve(&self) -> Result<SystemSolution> {
        let (ech, ncols) = self.echelon();
        if ech.inconsistent {
            let rank = ech.pivots.len();
            return Ok(SystemSolution::Inconsistent { rank, augmented_rank: rank + 1 });
        }
        let x = Matrix::column_vector(ech.particular_solution());
        debug_assert_eq!(x.rows(), ncols);
        if self.ring.is_field() || x.all_in(&self.ring) {
            return Ok(SystemSolution::Solved(self.unpack(&x)));
        }
        let (a, b) = self.assemble();
        match integral_solve(&self.ring, &a, &b)? {
            Solution::Solved(x) => Ok(SystemSolution::Solved(self.unpack(&x))),
            Solution::Obstructed(p) => Ok(SystemSolution::Obstructed(p)),
            Solution::Inconsistent => unreachable!("consistent over the fraction field"),
        }
    }

    /// Basis of the solution space of the homogeneous system, over the
    /// fraction field of the ring.
    pub fn homogeneous_basis(&self) -> Vec<Vec<Matrix>> {
        let (ech, _) = self.echelon();
        ech.kernel_basis().into_iter().map(|v| self.unpack(&Matrix::column_vector(v))).collect()
    }

    pub fn unknown_count(&self) -> usize {
        self.offsets().1
    }

    pub fn equation_count(&self) -> usize {
        self.equations.iter().map(|e| e.rows * e.cols).sum()
    }
}

type SparseRow = Vec<(usize, Scalar)>;

/// Incremental row echelon form of sparse rows over a field. Column
/// `ncols` holds the right-hand side.
struct SparseEchelon {
    field: CoefficientRing,
    ncols: usize,
    pivots: BTreeMap<usize, SparseRow>,
    inconsistent: bool,
}

impl SparseEchelon {
    fn new(field: CoefficientRing, ncols: usize) -> Self {
        SparseEchelon { field, ncols, pivots: BTreeMap::new(), inconsistent: false }
    }

    /// `row - c * other` (both sorted by column).
    fn axpy(&self, row: &SparseRow, c: &Scalar, other: &SparseRow) -> SparseRow {
        let mut out = Vec::with_capacity(row.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < row.len() || j < other.len() {
            let take_left = j >= other.len() || (i < row.len() && row[i].0 < other[j].0);
            let take_right = i >= row.len() || (j < other.len() && other[j].0 < row[i].0);
            if take_left {
                out.push(row[i].clone());
                i += 1;
            } else if take_right {
                let v = self.field.normalize(&-(c * &other[j].1));
                if !v.is_zero() {
                    out.push((other[j].0, v));
                }
                j += 1;
            } else {
                let v = self.field.normalize(&(&row[i].1 - c * &other[j].1));
                if !v.is_zero() {
                    out.push((row[i].0, v));
                }
                i += 1;
                j += 1;
            }
        }
        out
    }

    fn insert(&mut self, mut row: SparseRow) {
        loop {
            let Some((lead, coeff)) = row.first().cloned() else {
                return;
            };
            if lead == self.ncols {
                self.inconsistent = true;
                return;
            }
            match self.pivots.get(&lead) {
                Some(p) => row = self.axpy(&row, &coeff, p),
                None => {
                    let inv = field_div(&self.field, &Scalar::one(), &coeff);
                    let row = row.into_iter().map(|(c, v)| (c, self.field.normalize(&(v * &inv)))).collect();
                    self.pivots.insert(lead, row);
                    return;
                }
            }
        }
    }

    fn back_substitute(&self, x: &mut [Scalar], with_rhs: bool) {
        for (&c, row) in self.pivots.iter().rev() {
            let mut v = Scalar::zero();
            for (j, a) in row.iter().skip(1) {
                if *j == self.ncols {
                    if with_rhs {
                        v += a;
                    }
                } else if !x[*j].is_zero() {
                    v -= a * &x[*j];
                }
            }
            x[c] = self.field.normalize(&v);
        }
    }

    fn particular_solution(&self) -> Vec<Scalar> {
        let mut x = vec![Scalar::zero(); self.ncols];
        self.back_substitute(&mut x, true);
        x
    }

    fn kernel_basis(&self) -> Vec<Vec<Scalar>> {
        (0..self.ncols)
            .filter(|c| !self.pivots.contains_key(c))
            .map(|f| {
                let mut x = vec![Scalar::zero(); self.ncols];
                x[f] = Scalar::one();
                self.back_substitute(&mut x, false);
                x
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rings::{frac, int};

    #[test]
    fn rref_rank_kernel() {
        let m = Matrix::from_ints(3, 3, &[1, 2, 3, 2, 4, 6, 1, 0, 1]);
        assert_eq!(rank(&m, &CoefficientRing::Rationals), 2);
        let k = kernel(&m, &CoefficientRing::Rationals);
        assert_eq!(k.cols(), 1);
        assert!((&m * &k).is_zero());
    }

    #[test]
    fn rank_mod_p() {
        let m = Matrix::from_ints(2, 2, &[1, 1, 1, 3]);
        assert_eq!(rank(&m, &CoefficientRing::Rationals), 2);
        assert_eq!(rank(&m, &CoefficientRing::PrimeField(2)), 1);
    }

    #[test]
    fn inverse_over_q() {
        let m = Matrix::from_ints(2, 2, &[2, 1, 1, 1]);
        let inv = inverse(&m, &CoefficientRing::Rationals).unwrap();
        assert!((&m * &inv).is_identity());
        assert!(inverse(&Matrix::from_ints(2, 2, &[1, 2, 2, 4]), &CoefficientRing::Rationals).is_none());
        assert_eq!(inverse(&Matrix::zeros(0, 0), &CoefficientRing::Rationals), Some(Matrix::zeros(0, 0)));
    }

    #[test]
    fn smith_divisors() {
        let m = Matrix::from_ints(2, 2, &[2, 0, 0, 3]);
        assert_eq!(elementary_divisors(&m), vec![BigInt::from(1), BigInt::from(6)]);
        let m = Matrix::from_ints(3, 3, &[2, 4, 4, -6, 6, 12, 10, -4, -16]);
        assert_eq!(elementary_divisors(&m), vec![BigInt::from(2), BigInt::from(6), BigInt::from(12)]);
    }

    #[test]
    fn integral_solving() {
        // 2x = 1 has no solution over Z but one over Z[1/2]
        let a = Matrix::from_ints(1, 1, &[2]);
        let b = Matrix::from_ints(1, 1, &[1]);
        assert_eq!(solve_over(&CoefficientRing::Integers, &a, &b).unwrap(), Solution::Obstructed(vec![2]));
        let z2 = CoefficientRing::localized([2]).unwrap();
        assert_eq!(
            solve_over(&z2, &a, &b).unwrap(),
            Solution::Solved(Matrix::column_vector(vec![frac(1, 2)]))
        );
        // 2x + 3y = 1 is solvable over Z even though the rational particular
        // solution (1/2, 0) is not integral
        let a = Matrix::from_ints(1, 2, &[2, 3]);
        match solve_over(&CoefficientRing::Integers, &a, &b).unwrap() {
            Solution::Solved(x) => {
                assert!(x.all_in(&CoefficientRing::Integers));
                assert_eq!(&a * &x, b);
            }
            other => panic!("{other:?}"),
        }
        let a = Matrix::from_ints(2, 1, &[1, 1]);
        let b = Matrix::from_ints(2, 1, &[1, 2]);
        assert_eq!(solve_over(&CoefficientRing::Integers, &a, &b).unwrap(), Solution::Inconsistent);
    }

    #[test]
    fn image_basis_is_saturated_for_idempotents() {
        let p = Matrix::from_ints(2, 2, &[1, 1, 0, 0]);
        let b = image_basis_over(&CoefficientRing::Integers, &p);
        assert_eq!(b.cols(), 1);
        assert!(b[(0, 0)] == int(1) || b[(0, 0)] == int(-1));
        let m = Matrix::from_ints(2, 1, &[2, 4]);
        let s = saturated_basis_over(&CoefficientRing::Integers, &m);
        assert_eq!(s.cols(), 1);
        assert_eq!(s[(1, 0)].clone() / s[(0, 0)].clone(), int(2));
        assert!(s[(0, 0)] == int(1) || s[(0, 0)] == int(-1));
    }

    #[test]
    fn linear_system_matrix_equation() {
        // solve A X = C for X
        let mut sys = LinearSystem::new(CoefficientRing::Rationals);
        let x = sys.unknown(2, 2);
        let a = Matrix::from_ints(2, 2, &[1, 1, 0, 1]);
        let c = Matrix::from_ints(2, 2, &[3, 4, 1, 2]);
        sys.equation(vec![(x, a.clone(), Matrix::identity(2))], c.clone());
        match sys.solve().unwrap() {
            SystemSolution::Solved(v) => assert_eq!(&a * &v[0], c),
            other => panic!("{other:?}"),
        }
    }
}
