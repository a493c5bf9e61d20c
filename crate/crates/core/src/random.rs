//! Seeded generators of test objects with planted structure: known
//! denominators, known torsion, known idempotent ranks. Used by the examples
//! and the property tests.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cellular::{CellMorphism, CellPresentation, NcPoly, RetractWitness};
use crate::complexes::{ChainMap, Complex, Homotopy};
use crate::dga::DgAlgebra;
use crate::error::Result;
use crate::karoubi::{HomotopyIdempotent, Ladder, LadderMap};
use crate::linalg::{kernel, Matrix};
use crate::rings::{int, CoefficientRing, Scalar};

pub const PRIME_POOL: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn q() -> CoefficientRing {
    CoefficientRing::Rationals
}

/// `a / b` with `a` in `-3..=3` and `b` a product of at most one prime from `denominators`.
pub fn small_scalar(rng: &mut impl Rng, denominators: &[u64]) -> Scalar {
    let a = rng.gen_range(-3..=3);
    match denominators.choose(rng) {
        Some(&p) if rng.gen_bool(0.5) => Scalar::new(BigInt::from(a), BigInt::from(p)),
        _ => int(a),
    }
}

fn nonzero_scalar(rng: &mut impl Rng, denominators: &[u64]) -> Scalar {
    loop {
        let x = small_scalar(rng, denominators);
        if !x.is_zero() {
            return x;
        }
    }
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize, denominators: &[u64]) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| small_scalar(rng, denominators))
}

/// An invertible matrix and its inverse, as a product of elementary moves
/// with multipliers drawn from `small_scalar`; integral when `denominators`
/// is empty, so then unimodular.
pub fn random_gl(rng: &mut impl Rng, n: usize, denominators: &[u64]) -> (Matrix, Matrix) {
    let mut g = Matrix::identity(n);
    let mut inv = Matrix::identity(n);
    if n >= 2 {
        for _ in 0..2 * n + 2 {
            let i = rng.gen_range(0..n);
            let mut j = rng.gen_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            let lambda = small_scalar(rng, denominators);
            let mut e = Matrix::identity(n);
            e.set(i, j, lambda.clone());
            let mut e_inv = Matrix::identity(n);
            e_inv.set(i, j, -lambda);
            g = &e * &g;
            inv = &inv * &e_inv;
        }
    }
    for i in 0..n {
        if rng.gen_bool(0.3) {
            let flip = |m: &Matrix, row: bool| {
                let mut m = m.clone();
                for k in 0..n {
                    let (r, c) = if row { (i, k) } else { (k, i) };
                    let v = -&m[(r, c)];
                    m.set(r, c, v);
                }
                m
            };
            g = flip(&g, true);
            inv = flip(&inv, false);
        }
    }
    (g, inv)
}

/// Building blocks of free complexes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Piece {
    /// A copy of the ring in one degree with zero differential.
    Point(i64),
    /// `R --c--> R` in degrees `n` and `n + 1`.
    Disk(i64, Scalar),
}

/// Direct sum of pieces; within a degree, basis vectors follow piece order.
pub fn piece_complex(ring: &CoefficientRing, pieces: &[Piece]) -> Result<Complex> {
    let degrees: Vec<i64> = pieces
        .iter()
        .flat_map(|p| match p {
            Piece::Point(n) => vec![*n],
            Piece::Disk(n, _) => vec![*n, *n + 1],
        })
        .collect();
    if degrees.is_empty() {
        return Ok(Complex::zero(ring.clone()));
    }
    let lo = *degrees.iter().min().unwrap();
    let hi = *degrees.iter().max().unwrap();
    let mut ranks = vec![0usize; (hi - lo + 1) as usize];
    let mut slot = |n: i64| {
        let k = (n - lo) as usize;
        ranks[k] += 1;
        ranks[k] - 1
    };
    let placed: Vec<(i64, usize, Option<usize>, Option<Scalar>)> = pieces
        .iter()
        .map(|p| match p {
            Piece::Point(n) => (*n, slot(*n), None, None),
            Piece::Disk(n, c) => {
                let a = slot(*n);
                let b = slot(*n + 1);
                (*n, a, Some(b), Some(c.clone()))
            }
        })
        .collect();
    let mut diffs: Vec<Matrix> = (0..ranks.len().saturating_sub(1)).map(|k| Matrix::zeros(ranks[k + 1], ranks[k])).collect();
    for (n, a, b, c) in placed {
        if let (Some(b), Some(c)) = (b, c) {
            diffs[(n - lo) as usize].set(b, a, c);
        }
    }
    Complex::new(ring.clone(), lo, ranks, diffs)
}

/// `g_n ∘ d ∘ g_n^{-1}` with the isomorphisms `c → c'` and `c' → c`.
pub struct Conjugated {
    pub complex: Complex,
    pub to: ChainMap,
    pub from: ChainMap,
}

pub fn conjugate(rng: &mut impl Rng, c: &Complex, denominators: &[u64]) -> Result<Conjugated> {
    if c.is_zero() {
        return Ok(Conjugated { complex: c.clone(), to: c.identity(), from: c.identity() });
    }
    let gs: Vec<(Matrix, Matrix)> = c.ranks().iter().map(|&r| random_gl(rng, r, denominators)).collect();
    let lo = c.lo();
    let diffs = (0..c.ranks().len() - 1)
        .map(|k| &(&gs[k + 1].0 * &c.d(lo + k as i64)) * &gs[k].1)
        .collect();
    let complex = Complex::new(c.ring().clone(), lo, c.ranks().to_vec(), diffs)?;
    let comps = |inv: bool| -> BTreeMap<i64, Matrix> {
        gs.iter().enumerate().map(|(k, g)| (lo + k as i64, if inv { g.1.clone() } else { g.0.clone() })).collect()
    };
    let to = ChainMap::new(c, &complex, comps(false))?;
    let from = ChainMap::new(&complex, c, comps(true))?;
    Ok(Conjugated { complex, to, from })
}

/// Random pieces in degrees `lo..lo+len` with at most `max_rank` basis
/// vectors per degree; disk differentials are `±1/p` or `±1`.
pub fn random_pieces(rng: &mut impl Rng, lo: i64, len: i64, max_rank: usize, denominators: &[u64]) -> Vec<Piece> {
    let mut used = vec![0usize; len as usize];
    let mut out = Vec::new();
    for _ in 0..rng.gen_range(1..=2 * len as usize + 1) {
        let n = rng.gen_range(0..len);
        let k = n as usize;
        if rng.gen_bool(0.5) && n + 1 < len {
            if used[k] < max_rank && used[k + 1] < max_rank {
                used[k] += 1;
                used[k + 1] += 1;
                let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
                let c = match denominators.choose(rng) {
                    Some(&p) if rng.gen_bool(0.6) => Scalar::new(BigInt::from(sign), BigInt::from(p)),
                    _ => int(sign),
                };
                out.push(Piece::Disk(lo + n, c));
            }
        } else if used[k] < max_rank {
            used[k] += 1;
            out.push(Piece::Point(lo + n));
        }
    }
    out
}

fn degree_range(a: &Complex, b: &Complex) -> Vec<i64> {
    let mut lo = i64::MAX;
    let mut hi = i64::MIN;
    for c in [a, b] {
        if !c.is_zero() {
            lo = lo.min(c.lo());
            hi = hi.max(c.hi());
        }
    }
    if lo > hi {
        Vec::new()
    } else {
        (lo..=hi).collect()
    }
}

/// Unknowns `vec(f_n)` (column-major) for the components of a degree-0 map.
struct MapUnknowns {
    blocks: Vec<(i64, usize, usize, usize)>,
    total: usize,
}

impl MapUnknowns {
    fn new(src: &Complex, dst: &Complex) -> Self {
        let mut blocks = Vec::new();
        let mut total = 0;
        for n in degree_range(src, dst) {
            let (r, c) = (dst.rank(n), src.rank(n));
            if r * c > 0 {
                blocks.push((n, r, c, total));
                total += r * c;
            }
        }
        MapUnknowns { blocks, total }
    }

    fn block(&self, n: i64) -> Option<(usize, usize, usize)> {
        self.blocks.iter().find(|b| b.0 == n).map(|b| (b.1, b.2, b.3))
    }

    fn unpack(&self, v: &Matrix) -> BTreeMap<i64, Matrix> {
        self.blocks
            .iter()
            .map(|&(n, r, c, off)| (n, Matrix::from_fn(r, c, |i, j| v[(off + j * r + i, 0)].clone())))
            .collect()
    }

    /// Rows expressing `d f - f d = 0`.
    fn chain_rows(&self, src: &Complex, dst: &Complex) -> Vec<Matrix> {
        let mut rows = Vec::new();
        for n in degree_range(src, dst) {
            let (out_r, out_c) = (dst.rank(n + 1), src.rank(n));
            if out_r * out_c == 0 {
                continue;
            }
            let mut m = Matrix::zeros(out_r * out_c, self.total);
            if let Some((r, c, off)) = self.block(n) {
                m.paste(0, off, &Matrix::identity(c).kron(&dst.d(n)));
                debug_assert_eq!(r, dst.rank(n));
            }
            if let Some((_, _, off)) = self.block(n + 1) {
                m.paste(0, off, &-&src.d(n).transpose().kron(&Matrix::identity(out_r)));
            }
            rows.push(m);
        }
        rows
    }
}

fn combine(rng: &mut impl Rng, basis: &Matrix) -> Matrix {
    let mut v = Matrix::zeros(basis.rows(), 1);
    for j in 0..basis.cols() {
        let c = int(rng.gen_range(-2..=2));
        if !c.is_zero() {
            v = &v + &basis.column(j).scale(&c);
        }
    }
    v
}

/// A random chain map: an integer combination of a basis of all chain maps.
pub fn random_chain_map(rng: &mut impl Rng, src: &Complex, dst: &Complex) -> Result<ChainMap> {
    let u = MapUnknowns::new(src, dst);
    let rows = u.chain_rows(src, dst);
    let refs: Vec<&Matrix> = rows.iter().collect();
    let system = if refs.is_empty() { Matrix::zeros(0, u.total) } else { Matrix::vstack(&refs) };
    let v = combine(rng, &kernel(&system, &q()));
    ChainMap::new(src, dst, u.unpack(&v))
}

/// Random homotopy components `h(n): src^n → dst^{n-1}`.
pub fn random_homotopy_components(
    rng: &mut impl Rng,
    src: &Complex,
    dst: &Complex,
    denominators: &[u64],
) -> BTreeMap<i64, Matrix> {
    let mut out = BTreeMap::new();
    for n in degree_range(src, dst) {
        let (r, c) = (dst.rank(n - 1), src.rank(n));
        if r * c > 0 {
            out.insert(n, random_matrix(rng, r, c, denominators));
        }
    }
    out
}

/// The null-homotopic map `d h + h d`.
pub fn boundary_map(src: &Complex, dst: &Complex, h: &BTreeMap<i64, Matrix>) -> Result<ChainMap> {
    let get = |n: i64| h.get(&n).cloned().unwrap_or_else(|| Matrix::zeros(dst.rank(n - 1), src.rank(n)));
    ChainMap::from_fn(src, dst, |n| &(&dst.d(n - 1) * &get(n)) + &(&get(n + 1) * &src.d(n)))
}

// homotopy idempotents

/// A homotopy idempotent together with the ranks of the strict idempotent
/// it was built from, per degree.
pub struct PlantedIdempotent {
    pub idempotent: HomotopyIdempotent,
    /// Number of point pieces kept by the strict idempotent, per degree.
    pub kept_points: BTreeMap<i64, usize>,
}

/// Pieces in four consecutive degrees with at most five basis vectors per
/// degree; the strict idempotent keeps a random subset of pieces. It is
/// conjugated by a random rational automorphism and perturbed by `dk + kd`.
pub fn random_idempotent(rng: &mut impl Rng) -> Result<PlantedIdempotent> {
    let lo = rng.gen_range(-2..=1);
    let pieces = random_pieces(rng, lo, 4, 5, &[2, 3]);
    let b0 = piece_complex(&q(), &pieces)?;
    let keep: Vec<bool> = pieces.iter().map(|_| rng.gen_bool(0.5)).collect();
    let mut kept_points = BTreeMap::new();
    let mut diag: BTreeMap<i64, Vec<bool>> = BTreeMap::new();
    for (p, &k) in pieces.iter().zip(&keep) {
        match p {
            Piece::Point(n) => {
                diag.entry(*n).or_default().push(k);
                if k {
                    *kept_points.entry(*n).or_insert(0) += 1;
                }
            }
            Piece::Disk(n, _) => {
                diag.entry(*n).or_default().push(k);
                diag.entry(*n + 1).or_default().push(k);
            }
        }
    }
    let e0 = ChainMap::from_fn(&b0, &b0, |n| {
        let flags = diag.get(&n).cloned().unwrap_or_default();
        Matrix::from_fn(flags.len(), flags.len(), |i, j| if i == j && flags[i] { Scalar::one() } else { Scalar::zero() })
    })?;
    let conj = conjugate(rng, &b0, &[2, 5])?;
    let b = conj.complex.clone();
    let e1 = conj.to.compose(&e0.compose(&conj.from)?)?;
    let k = random_homotopy_components(rng, &b, &b, &[3]);
    let delta = boundary_map(&b, &b, &k)?;
    let e = e1.add(&delta)?;
    // e² - e = d h + h d with h = e₁k + ke₁ + δk - k
    let get = |n: i64| k.get(&n).cloned().unwrap_or_else(|| Matrix::zeros(b.rank(n - 1), b.rank(n)));
    let h: BTreeMap<i64, Matrix> = degree_range(&b, &b)
        .into_iter()
        .chain(std::iter::once(b.hi() + 1))
        .filter(|&n| b.rank(n - 1) * b.rank(n) > 0)
        .map(|n| {
            let kn = get(n);
            let m = &(&(&(&e1.f(n - 1) * &kn) + &(&kn * &e1.f(n))) + &(&delta.f(n - 1) * &kn)) - &kn;
            (n, m)
        })
        .collect();
    let ee = e.compose(&e)?;
    let hom = Homotopy::new(&ee, &e, h)?;
    Ok(PlantedIdempotent { idempotent: HomotopyIdempotent::new(e, hom)?, kept_points })
}

// ladders

/// `X ⊕ P` with attaching map `d k - k d`, conjugated; returns the new
/// object with the inclusion of `X` and a graded retraction.
struct Growth {
    object: Complex,
    f: ChainMap,
    s: ChainMap,
    piece: Complex,
    k: BTreeMap<i64, Matrix>,
    /// From the new object back to the unconjugated `X ⊕ P`.
    back: ChainMap,
    unconjugated: Complex,
}

fn grow(rng: &mut impl Rng, x: &Complex, lo: i64) -> Result<Growth> {
    let pieces = random_pieces(rng, lo, 3, 1, &[]);
    let p = piece_complex(&q(), &pieces)?;
    let range = {
        let mut r = degree_range(x, &p);
        if let (Some(&a), Some(&b)) = (r.first(), r.last()) {
            r = (a - 1..=b + 1).collect();
        }
        r
    };
    let k: BTreeMap<i64, Matrix> = range
        .iter()
        .filter(|&&n| x.rank(n) * p.rank(n) > 0)
        .map(|&n| (n, random_matrix(rng, x.rank(n), p.rank(n), &[])))
        .collect();
    let kn = |n: i64| k.get(&n).cloned().unwrap_or_else(|| Matrix::zeros(x.rank(n), p.rank(n)));
    let degrees: Vec<i64> = range.clone();
    let mut basis = Vec::new();
    for &n in &degrees {
        basis.extend(std::iter::repeat_n(n, x.rank(n) + p.rank(n)));
    }
    let total: usize = basis.len();
    let offset = |n: i64| basis.iter().take_while(|&&m| m < n).count();
    let mut d = Matrix::zeros(total, total);
    for &n in &degrees {
        let (xs, ps) = (x.rank(n), p.rank(n));
        let (xt, pt) = (x.rank(n + 1), p.rank(n + 1));
        if xs + ps == 0 || xt + pt == 0 {
            continue;
        }
        let (src, dst) = (offset(n), offset(n + 1));
        d.paste(dst, src, &x.d(n));
        d.paste(dst + xt, src + xs, &p.d(n));
        let attach = &(&x.d(n) * &kn(n)) - &(&kn(n + 1) * &p.d(n));
        d.paste(dst, src + xs, &attach);
    }
    let y0 = Complex::from_total(q(), &basis, &d)?;
    let inc = ChainMap::from_fn(x, &y0, |n| {
        Matrix::from_fn(x.rank(n) + p.rank(n), x.rank(n), |i, j| if i == j { Scalar::one() } else { Scalar::zero() })
    })?;
    let proj = ChainMap::from_fn(&y0, x, |n| {
        Matrix::from_fn(x.rank(n), x.rank(n) + p.rank(n), |i, j| if i == j { Scalar::one() } else { Scalar::zero() })
    })?;
    let conj = conjugate(rng, &y0, &[])?;
    let f = conj.to.compose(&inc)?;
    let s = proj.compose(&conj.from)?;
    Ok(Growth { object: conj.complex, f, s, piece: p, k, back: conj.from, unconjugated: y0 })
}

fn build_ladder(rng: &mut impl Rng, stages: usize) -> Result<(Ladder, Vec<Growth>)> {
    let lo = rng.gen_range(-1..=0);
    let x0 = piece_complex(&q(), &random_pieces(rng, lo, 3, 2, &[]))?;
    let mut objects = vec![x0];
    let mut maps = Vec::new();
    let mut splits = Vec::new();
    let mut growth = Vec::new();
    for _ in 1..stages {
        let g = grow(rng, objects.last().unwrap(), lo)?;
        objects.push(g.object.clone());
        maps.push(g.f.clone());
        splits.push(g.s.clone());
        growth.push(g);
    }
    Ok((Ladder { objects, maps, splits }, growth))
}

/// `X_0 → ... → X_{stages-1}`, each step adding pieces attached by a
/// null-homotopic map and changing basis unimodularly.
pub fn random_ladder(rng: &mut impl Rng, stages: usize) -> Result<Ladder> {
    Ok(build_ladder(rng, stages)?.0)
}

/// Extends `w: X → Y` to `X ⊕ P → Y` by `(x, p) ↦ w x + (w k + φ) p`, which
/// commutes with `d` when the attaching map is `d k - k d` and `φ` is a chain map.
fn extend(rng: &mut impl Rng, w: &ChainMap, g: &Growth) -> Result<ChainMap> {
    let (x, y, p) = (w.src(), w.dst(), &g.piece);
    let phi = if rng.gen_bool(0.5) { random_chain_map(rng, p, y)? } else { ChainMap::zero(p, y) };
    let k = |n: i64| g.k.get(&n).cloned().unwrap_or_else(|| Matrix::zeros(x.rank(n), p.rank(n)));
    let v0 = ChainMap::from_fn(&g.unconjugated, y, |n| {
        let left = w.f(n);
        let right = &(&left * &k(n)) + &phi.f(n);
        Matrix::hstack(&[&left, &right])
    })?;
    v0.compose(&g.back)
}

/// A map of ladders commuting up to the homotopies `g K_n - K_{n+1} f`,
/// obtained by perturbing a strictly commuting map by boundaries `d K + K d`.
pub fn random_ladder_map(rng: &mut impl Rng, stages: usize) -> Result<LadderMap> {
    let (src, growth) = build_ladder(rng, stages)?;
    let dst = random_ladder(rng, stages)?;
    let mut strict = vec![random_chain_map(rng, &src.objects[0], &dst.objects[0])?];
    for n in 0..stages - 1 {
        let target = dst.maps[n].compose(&strict[n])?;
        strict.push(extend(rng, &target, &growth[n])?);
    }
    let ks: Vec<BTreeMap<i64, Matrix>> = (0..stages)
        .map(|n| random_homotopy_components(rng, &src.objects[n], &dst.objects[n], &[]))
        .collect();
    let mut maps = Vec::new();
    for n in 0..stages {
        maps.push(strict[n].add(&boundary_map(&src.objects[n], &dst.objects[n], &ks[n])?)?);
    }
    let mut squares = Vec::new();
    for n in 0..stages - 1 {
        let (f, g) = (&src.maps[n], &dst.maps[n]);
        let lhs = g.compose(&maps[n])?;
        let rhs = maps[n + 1].compose(f)?;
        let (x, y) = (f.src(), g.dst());
        let kk = |m: &BTreeMap<i64, Matrix>, a: &Complex, b: &Complex, d: i64| {
            m.get(&d).cloned().unwrap_or_else(|| Matrix::zeros(b.rank(d - 1), a.rank(d)))
        };
        let comps: BTreeMap<i64, Matrix> = degree_range(x, y)
            .into_iter()
            .chain(std::iter::once(x.hi().max(y.hi()) + 1))
            .filter(|&d| y.rank(d - 1) * x.rank(d) > 0)
            .map(|d| {
                let a = &g.f(d - 1) * &kk(&ks[n], x, &dst.objects[n], d);
                let b = &kk(&ks[n + 1], &src.objects[n + 1], y, d) * &f.f(d);
                (d, &a - &b)
            })
            .collect();
        squares.push(Homotopy::new(&lhs, &rhs, comps)?);
    }
    Ok(LadderMap { src, dst, maps, squares })
}

// algebras with planted denominators

/// `k[x]/(x² - x/p)` with basis `1, x` in degree 0.
pub fn planted_factor(p: u64) -> Result<DgAlgebra> {
    let lx = Matrix::from_vec(2, 2, vec![int(0), int(0), int(1), Scalar::new(BigInt::one(), BigInt::from(p))])?;
    DgAlgebra::new(Complex::concentrated(q(), 0, 2), vec![Matrix::identity(2), lx], Matrix::from_ints(2, 1, &[1, 0]))
}

/// The direct product, with the basis sorted by degree.
pub fn product(factors: &[DgAlgebra]) -> Result<DgAlgebra> {
    let mut slots: Vec<(i64, usize, usize)> = Vec::new();
    for (f, a) in factors.iter().enumerate() {
        for (i, &d) in a.basis_degrees().iter().enumerate() {
            slots.push((d, f, i));
        }
    }
    slots.sort_by_key(|s| s.0);
    let n = slots.len();
    let pos = |f: usize, i: usize| slots.iter().position(|s| s.1 == f && s.2 == i).unwrap();
    let mut d = Matrix::zeros(n, n);
    let mut left = vec![Matrix::zeros(n, n); n];
    let mut unit = Matrix::zeros(n, 1);
    for (f, a) in factors.iter().enumerate() {
        let da = a.differential();
        for i in 0..a.dim() {
            unit.set(pos(f, i), 0, a.unit()[(i, 0)].clone());
            for j in 0..a.dim() {
                d.set(pos(f, i), pos(f, j), da[(i, j)].clone());
                for k in 0..a.dim() {
                    left[pos(f, i)].set(pos(f, k), pos(f, j), a.left(i)[(k, j)].clone());
                }
            }
        }
    }
    let degrees: Vec<i64> = slots.iter().map(|s| s.0).collect();
    DgAlgebra::new(Complex::from_total(q(), &degrees, &d)?, left, unit)
}

/// The same algebra in the basis given by the columns of `p` (degree-preserving).
pub fn change_basis(a: &DgAlgebra, p: &Matrix, p_inv: &Matrix) -> Result<DgAlgebra> {
    let n = a.dim();
    let left: Vec<Matrix> = (0..n)
        .map(|j| {
            let mut l = Matrix::zeros(n, n);
            for b in 0..n {
                if !p[(b, j)].is_zero() {
                    l = &l + &a.left(b).scale(&p[(b, j)]);
                }
            }
            &(p_inv * &l) * p
        })
        .collect();
    let d = &(p_inv * &a.differential()) * p;
    let c = Complex::from_total(a.ring().clone(), &a.basis_degrees(), &d)?;
    DgAlgebra::new(c, left, p_inv * a.unit())
}

/// Block-diagonal (by degree) unimodular change of basis.
pub fn random_graded_gl(rng: &mut impl Rng, degrees: &[i64], denominators: &[u64]) -> (Matrix, Matrix) {
    let n = degrees.len();
    let mut p = Matrix::zeros(n, n);
    let mut p_inv = Matrix::zeros(n, n);
    let mut start = 0;
    while start < n {
        let end = start + degrees[start..].iter().take_while(|&&d| d == degrees[start]).count();
        let (g, gi) = random_gl(rng, end - start, denominators);
        p.paste(start, start, &g);
        p_inv.paste(start, start, &gi);
        start = end;
    }
    (p, p_inv)
}

/// An integral dg-algebra times `∏ k[x]/(x² - x/p)` over planted primes,
/// in a random unimodular basis. Returns the algebra and the planted primes.
pub fn random_planted_algebra(rng: &mut impl Rng) -> Result<(DgAlgebra, Vec<u64>)> {
    let base = match rng.gen_range(0..5) {
        0 => DgAlgebra::ground(q()),
        1 => DgAlgebra::upper_triangular(q(), 2),
        2 => DgAlgebra::truncated_polynomial(q(), rng.gen_range(2..=3)),
        3 => DgAlgebra::acyclic_interval(q()),
        _ => DgAlgebra::matrix_algebra(q(), 2),
    };
    let count = rng.gen_range(0..=3);
    let mut primes: Vec<u64> = PRIME_POOL.choose_multiple(rng, count).copied().collect();
    primes.sort_unstable();
    let mut factors = vec![base];
    for &p in &primes {
        factors.push(planted_factor(p)?);
    }
    factors.shuffle(rng);
    let a = product(&factors)?;
    let (p, p_inv) = random_graded_gl(rng, &a.basis_degrees(), &[]);
    Ok((change_basis(&a, &p, &p_inv)?, primes))
}

// quasi-isomorphisms with planted denominators and torsion

pub struct PlantedQuasiIso {
    pub map: ChainMap,
    /// Primes that appear as denominators of the differentials.
    pub denominators: Vec<u64>,
    /// Primes that may appear as torsion in the cone over Z.
    pub torsion: Vec<u64>,
}

/// `f = ⊕ (t_i : R → R) ⊕ 0` from points and disks to points and disks, in
/// random unimodular bases. Disks have differential `±1/p` (planted
/// denominators) or an integer `t` (torsion); the `t_i` are products of torsion primes.
pub fn random_quasi_iso(rng: &mut impl Rng) -> Result<PlantedQuasiIso> {
    let pool = PRIME_POOL;
    let count = rng.gen_range(1..=2);
    let mut denominators: Vec<u64> = pool[..4].choose_multiple(rng, count).copied().collect();
    let mut torsion: Vec<u64> = pool[2..].iter().filter(|p| !denominators.contains(p)).copied().collect();
    torsion.shuffle(rng);
    torsion.truncate(rng.gen_range(1..=2));
    denominators.sort_unstable();
    torsion.sort_unstable();
    let lo = rng.gen_range(-1..=0);
    let points: Vec<i64> = (0..rng.gen_range(1..=3)).map(|_| lo + rng.gen_range(0..4)).collect();
    let disk = |rng: &mut dyn rand::RngCore| {
        let n = lo + rng.gen_range(0..3);
        let c = if rng.gen_bool(0.7) {
            let p = *denominators.choose(rng).unwrap();
            Scalar::new(BigInt::from(if rng.gen_bool(0.5) { 1 } else { -1 }), BigInt::from(p))
        } else {
            int(*torsion.choose(rng).unwrap() as i64)
        };
        Piece::Disk(n, c)
    };
    let mut c_pieces: Vec<Piece> = points.iter().map(|&n| Piece::Point(n)).collect();
    let mut d_pieces = c_pieces.clone();
    for _ in 0..rng.gen_range(1..=2) {
        c_pieces.push(disk(rng));
    }
    for _ in 0..rng.gen_range(0..=2) {
        d_pieces.push(disk(rng));
    }
    // every planted denominator occurs in some differential
    for &p in &denominators {
        c_pieces.push(Piece::Disk(lo + rng.gen_range(0..3), Scalar::new(BigInt::one(), BigInt::from(p))));
    }
    let c0 = piece_complex(&q(), &c_pieces)?;
    let d0 = piece_complex(&q(), &d_pieces)?;
    let scales: Vec<i64> = points
        .iter()
        .map(|_| if rng.gen_bool(0.6) { *torsion.choose(rng).unwrap() as i64 } else { 1 })
        .collect();
    // point pieces come first within each degree, in the same order in both complexes
    let f0 = ChainMap::from_fn(&c0, &d0, |n| {
        let mut m = Matrix::zeros(d0.rank(n), c0.rank(n));
        let mut slot = 0;
        for (i, &pn) in points.iter().enumerate() {
            if pn == n {
                m.set(slot, slot, int(scales[i]));
                slot += 1;
            }
        }
        m
    })?;
    let cc = conjugate(rng, &c0, &[])?;
    let dc = conjugate(rng, &d0, &[])?;
    let map = dc.to.compose(&f0.compose(&cc.from)?)?;
    Ok(PlantedQuasiIso { map, denominators, torsion })
}

// homotopic pairs

/// `f`, `g = f - (dh + hd)` and `h: f ≃ g` between random complexes whose
/// coefficients carry planted denominators.
pub fn random_homotopic_pair(rng: &mut impl Rng) -> Result<(ChainMap, ChainMap, Homotopy)> {
    let lo = rng.gen_range(-1..=0);
    let x = piece_complex(&q(), &random_pieces(rng, lo, 3, 3, &[2, 3, 5]))?;
    let y = piece_complex(&q(), &random_pieces(rng, lo, 3, 3, &[7, 11]))?;
    let x = conjugate(rng, &x, &[3])?.complex;
    let y = conjugate(rng, &y, &[13])?.complex;
    let f = random_chain_map(rng, &x, &y)?;
    let h = random_homotopy_components(rng, &x, &y, &[5, 17]);
    let g = f.sub(&boundary_map(&x, &y, &h)?)?;
    let hom = Homotopy::new(&f, &g, h)?;
    Ok((f, g, hom))
}

// retract witnesses

fn poly(terms: &[(Scalar, &[usize])]) -> NcPoly {
    NcPoly::from_terms(terms.iter().map(|(c, w)| (c.clone(), w.to_vec())))
}

/// A retract of a cell algebra with at most three cells, with coefficients
/// drawn with the given denominators.
pub fn random_retract_witness(rng: &mut impl Rng, denominators: &[u64]) -> Result<RetractWitness> {
    let a = nonzero_scalar(rng, denominators);
    let b = small_scalar(rng, denominators);
    let alpha = small_scalar(rng, denominators);
    let one = Scalar::one();
    match rng.gen_range(0..3) {
        // A = <x>, B = <x, y>, r(y) = b x, i(x) = x + α(y - b x)
        0 => {
            let target = CellPresentation::from_named(q(), &[("x", 0, vec![])])?;
            let ambient = CellPresentation::from_named(q(), &[("x", 0, vec![]), ("y", 0, vec![])])?;
            let section = CellMorphism { images: vec![poly(&[(&one - &(&alpha * &b), &[0]), (alpha.clone(), &[1])])] };
            let retraction = CellMorphism { images: vec![poly(&[(one.clone(), &[0])]), poly(&[(b, &[0])])] };
            Ok(RetractWitness { target, ambient, section, retraction })
        }
        // A = <x>, B = <x, y, z> with dz = a(y - b x), |z| = -1
        1 => {
            let target = CellPresentation::from_named(q(), &[("x", 0, vec![])])?;
            let ambient = CellPresentation::from_named(
                q(),
                &[("x", 0, vec![]), ("y", 0, vec![]), ("z", -1, vec![(a.clone(), vec!["y"]), (-&(&a * &b), vec!["x"])])],
            )?;
            let section = CellMorphism { images: vec![poly(&[(&one - &(&alpha * &b), &[0]), (alpha, &[1])])] };
            let retraction = CellMorphism {
                images: vec![poly(&[(one.clone(), &[0])]), poly(&[(b, &[0])]), NcPoly::zero()],
            };
            Ok(RetractWitness { target, ambient, section, retraction })
        }
        // A = <x, w> with dw = a x, |w| = -1; B = A * <y>, r(y) = b x
        _ => {
            let cells_a = [("x", 0, vec![]), ("w", -1, vec![(a.clone(), vec!["x"])])];
            let target = CellPresentation::from_named(q(), &cells_a)?;
            let ambient = CellPresentation::from_named(
                q(),
                &[("x", 0, vec![]), ("w", -1, vec![(a, vec!["x"])]), ("y", 0, vec![])],
            )?;
            let section = CellMorphism { images: vec![NcPoly::generator(0), NcPoly::generator(1)] };
            let retraction =
                CellMorphism { images: vec![NcPoly::generator(0), NcPoly::generator(1), poly(&[(b, &[0])])] };
            Ok(RetractWitness { target, ambient, section, retraction })
        }
    }
}
