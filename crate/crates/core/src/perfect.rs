//! Perfect modules as explicit builders: finitely many free cells, cones,
//! shifts and retracts. A smoothness certificate turns any module into
//! such a builder by tensoring the bimodule resolution of the algebra with it.

use std::collections::HashMap;

use num_traits::{One, Zero};

use crate::complexes::{is_quasi_iso, sign, ChainMap};
use crate::dga::{module_map_defect, DgAlgebra, DgModule};
use crate::error::{Error, Result};
use crate::linalg::{saturated_basis_over, solve_over, Matrix, Solution};
use crate::rings::{CoefficientRing, ExactData, Scalar};
use crate::smooth::SmoothCertificate;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BuildStep {
    /// Direct sum with `rank` free generators in `degree`.
    Free { degree: i64, rank: usize },
    /// Attach `rank` free generators in `degree` whose differentials are
    /// the columns of `images` (coordinates in the current module).
    Cone { degree: i64, rank: usize, images: Matrix },
    /// Replace `M` by `M[by]`.
    Shift { by: i64 },
    /// Replace `M` by the image of a strict idempotent module endomorphism,
    /// split as `section · retraction = idempotent`,
    /// `retraction · section = id`.
    Retract { idempotent: Matrix, section: Matrix, retraction: Matrix },
}

/// Basis label `e_a · g` of a free cell, while the module is still semifree.
pub type Label = (usize, usize);

/// Partial result of replaying a builder.
#[derive(Clone, Debug)]
pub struct Replay {
    algebra: DgAlgebra,
    degrees: Vec<i64>,
    d: Matrix,
    act: Vec<Matrix>,
    labels: Option<Vec<Label>>,
    generators: usize,
}

impl Replay {
    pub fn new(algebra: &DgAlgebra) -> Self {
        Replay {
            algebra: algebra.clone(),
            degrees: Vec::new(),
            d: Matrix::zeros(0, 0),
            act: vec![Matrix::zeros(0, 0); algebra.dim()],
            labels: Some(Vec::new()),
            generators: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.degrees.len()
    }

    pub fn labels(&self) -> Option<&[Label]> {
        self.labels.as_deref()
    }

    pub fn apply(&mut self, step: &BuildStep) -> Result<()> {
        match step {
            BuildStep::Free { degree, rank } => self.attach(*degree, *rank, &Matrix::zeros(self.dim(), *rank)),
            BuildStep::Cone { degree, rank, images } => self.attach(*degree, *rank, images),
            BuildStep::Shift { by } => {
                let degs = self.algebra.basis_degrees();
                self.degrees.iter_mut().for_each(|x| *x -= by);
                self.d = self.d.scale(&sign(*by));
                for (a, m) in self.act.iter_mut().enumerate() {
                    *m = m.scale(&sign(degs[a] * by));
                }
                Ok(())
            }
            BuildStep::Retract { idempotent, section, retraction } => self.retract(idempotent, section, retraction),
        }
    }

    fn attach(&mut self, degree: i64, rank: usize, images: &Matrix) -> Result<()> {
        let ring = self.algebra.ring().clone();
        let (m, n) = (self.dim(), self.algebra.dim());
        if images.shape() != (m, rank) {
            return Err(Error::InvalidModule(format!("cone images have shape {:?}, expected ({m}, {rank})", images.shape())));
        }
        for t in 0..rank {
            for r in 0..m {
                if !images[(r, t)].is_zero() && self.degrees[r] != degree + 1 {
                    return Err(Error::InvalidModule(format!("cone image {t} is not homogeneous of degree {}", degree + 1)));
                }
            }
        }
        if !(&self.d * images).is_zero_in(&ring) {
            return Err(Error::InvalidModule("cone along a map whose images are not cycles".into()));
        }
        let alg_degs = self.algebra.basis_degrees();
        let da = self.algebra.differential();
        let total = m + rank * n;
        // coordinates: old basis, then e_a g_t at m + t n + a
        let mut d = Matrix::zeros(total, total);
        d.paste(0, 0, &self.d);
        for t in 0..rank {
            let img = images.column(t);
            for a in 0..n {
                let col = m + t * n + a;
                let part = &self.act[a] * &img;
                let s = sign(alg_degs[a]);
                for r in 0..m {
                    if !part[(r, 0)].is_zero() {
                        d.set(r, col, &part[(r, 0)] * &s);
                    }
                }
                for c in 0..n {
                    if !da[(c, a)].is_zero() {
                        d.set(m + t * n + c, col, da[(c, a)].clone());
                    }
                }
            }
        }
        let act: Vec<Matrix> = (0..n)
            .map(|b| Matrix::block_diag(&[&self.act[b], &Matrix::identity(rank).kron(self.algebra.left(b))]))
            .collect();
        let mut degrees = self.degrees.clone();
        degrees.extend((0..rank).flat_map(|_| alg_degs.iter().map(|x| x + degree)));
        let mut order: Vec<usize> = (0..total).collect();
        order.sort_by_key(|&i| degrees[i]);
        let permute = |x: &Matrix| x.select_rows(&order).select_columns(&order);
        self.d = permute(&d);
        self.act = act.iter().map(permute).collect();
        self.degrees = order.iter().map(|&i| degrees[i]).collect();
        if let Some(labels) = &self.labels {
            let mut all = labels.clone();
            let first = self.generators;
            all.extend((0..rank).flat_map(|t| (0..n).map(move |a| (first + t, a))));
            self.labels = Some(order.iter().map(|&i| all[i]).collect());
        }
        self.generators += rank;
        Ok(())
    }

    fn retract(&mut self, e: &Matrix, i: &Matrix, r: &Matrix) -> Result<()> {
        let ring = self.algebra.ring().clone();
        let m = self.dim();
        let k = i.cols();
        let bad = |msg: &str| Err(Error::InvalidModule(format!("retract: {msg}")));
        if e.shape() != (m, m) || i.shape() != (m, k) || r.shape() != (k, m) {
            return bad("matrix shapes do not fit the module");
        }
        if !e.all_in(&ring) || !i.all_in(&ring) || !r.all_in(&ring) {
            return bad("coefficients outside the ring");
        }
        if !(r * i).eq_in(&Matrix::identity(k), &ring) || !(i * r).eq_in(e, &ring) {
            return bad("section and retraction do not split the idempotent");
        }
        if !(&self.d * e).eq_in(&(e * &self.d), &ring) || self.act.iter().any(|a| !(a * e).eq_in(&(e * a), &ring)) {
            return bad("idempotent is not a module endomorphism");
        }
        let mut degrees = Vec::with_capacity(k);
        for c in 0..k {
            let rows: Vec<i64> = (0..m).filter(|&x| !i[(x, c)].is_zero()).map(|x| self.degrees[x]).collect();
            if rows.is_empty() || rows.iter().any(|&x| x != rows[0]) {
                return bad("section column is not homogeneous");
            }
            degrees.push(rows[0]);
        }
        if degrees.windows(2).any(|w| w[0] > w[1]) {
            return bad("section columns are not sorted by degree");
        }
        for x in 0..k {
            for y in 0..m {
                if !r[(x, y)].is_zero() && degrees[x] != self.degrees[y] {
                    return bad("retraction does not preserve degrees");
                }
            }
        }
        self.d = (&(r * &self.d) * i).normalized(&ring);
        self.act = self.act.iter().map(|a| (&(r * a) * i).normalized(&ring)).collect();
        self.degrees = degrees;
        self.labels = None;
        Ok(())
    }

    pub fn module(&self) -> Result<DgModule> {
        let m = DgModule::from_total(&self.algebra, &self.degrees, &self.d, self.act.clone())?;
        m.check()?;
        Ok(m)
    }
}

pub fn replay(algebra: &DgAlgebra, steps: &[BuildStep]) -> Result<DgModule> {
    let mut r = Replay::new(algebra);
    for s in steps {
        r.apply(s)?;
    }
    r.module()
}

/// A module together with a builder for a perfect module and a
/// quasi-isomorphism from the built module to it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PerfectPresentation {
    pub module: DgModule,
    pub builder: Vec<BuildStep>,
    pub quasi_iso: Matrix,
}

impl PerfectPresentation {
    pub fn ring(&self) -> &CoefficientRing {
        self.module.ring()
    }

    pub fn replay(&self) -> Result<DgModule> {
        replay(self.module.algebra(), &self.builder)
    }

    pub fn verify(&self) -> Result<()> {
        self.module.check()?;
        let built = self.replay()?;
        if let Some(why) = module_map_defect(&built, &self.module, &self.quasi_iso) {
            return Err(Error::InvalidCertificate(format!("comparison map: {why}")));
        }
        let f = ChainMap::from_total(built.underlying(), self.module.underlying(), &self.quasi_iso)?;
        if !is_quasi_iso(&f)? {
            return Err(Error::InvalidCertificate("comparison map is not a quasi-isomorphism".into()));
        }
        Ok(())
    }
}

impl BuildStep {
    pub fn matrices(&self) -> Vec<&Matrix> {
        match self {
            BuildStep::Cone { images, .. } => vec![images],
            BuildStep::Retract { idempotent, section, retraction } => vec![idempotent, section, retraction],
            _ => Vec::new(),
        }
    }

    pub fn map_matrices(&self, f: &dyn Fn(&Matrix) -> Matrix) -> BuildStep {
        match self {
            BuildStep::Cone { degree, rank, images } => BuildStep::Cone { degree: *degree, rank: *rank, images: f(images) },
            BuildStep::Retract { idempotent, section, retraction } => BuildStep::Retract {
                idempotent: f(idempotent),
                section: f(section),
                retraction: f(retraction),
            },
            other => other.clone(),
        }
    }
}

impl ExactData for PerfectPresentation {
    fn coefficient_ring(&self) -> &CoefficientRing {
        self.module.ring()
    }

    fn visit_scalars(&self, f: &mut dyn FnMut(&Scalar)) {
        self.module.visit_scalars(f);
        for m in self.builder.iter().flat_map(|s| s.matrices()) {
            m.entries().iter().for_each(&mut *f);
        }
        self.quasi_iso.entries().iter().for_each(f);
    }

    fn map_scalars(&self, target: &CoefficientRing, f: &dyn Fn(&Scalar) -> Scalar) -> Self {
        PerfectPresentation {
            module: self.module.map_scalars(target, f),
            builder: self.builder.iter().map(|s| s.map_matrices(&|m| m.map(f))).collect(),
            quasi_iso: self.quasi_iso.map(f),
        }
    }
}

/// Cell `(j, w, x)`: bar level, word in `Ā^{⊗j}`, basis element of the module.
type Cell = (usize, usize, usize);

struct Tensored<'a> {
    cert: &'a SmoothCertificate,
    module: &'a DgModule,
    n: usize,
    unit: Vec<Scalar>,
    de: Matrix,
}

impl Tensored<'_> {
    fn bar_index(&self, w: usize, i: usize, k: usize) -> usize {
        w * self.n * self.n + i * self.n + k
    }

    /// `(φ ⊗_A 1)(e_i ⊗ w ⊗ x)` for a bimodule map `φ: B_j → B_{j'}`, as
    /// `(w', a, x', coefficient)` terms of `e_a ⊗ w' ⊗ x'`.
    fn tensor_map(&self, phi: &Matrix, w: usize, i: usize, x: usize) -> Vec<(usize, usize, usize, Scalar)> {
        let n = self.n;
        let mut out = Vec::new();
        for (k, uk) in self.unit.iter().enumerate() {
            if uk.is_zero() {
                continue;
            }
            let col = self.bar_index(w, i, k);
            for row in 0..phi.rows() {
                let c = &phi[(row, col)];
                if c.is_zero() {
                    continue;
                }
                let (w2, i2, k2) = (row / (n * n), (row / n) % n, row % n);
                let act = self.module.act(k2);
                for x2 in 0..act.rows() {
                    let y = &act[(x2, x)];
                    if !y.is_zero() {
                        out.push((w2, i2, x2, uk * c * y));
                    }
                }
            }
        }
        out
    }

    /// Differential of `e_i ⊗ w ⊗ x` at level `j`.
    fn differential(&self, (j, w, x): Cell, i: usize) -> Vec<(Cell, usize, Scalar)> {
        let mut out: Vec<(Cell, usize, Scalar)> = Vec::new();
        if j > 0 {
            for (w2, a, x2, c) in self.tensor_map(&self.cert.differentials[j], w, i, x) {
                out.push(((j - 1, w2, x2), a, c));
            }
        }
        let s = sign(j as i64);
        for x2 in 0..self.de.rows() {
            if !self.de[(x2, x)].is_zero() {
                out.push(((j, w, x2), i, &self.de[(x2, x)] * &s));
            }
        }
        out
    }
}

/// Tensors the bimodule resolution certified by `cert` with `e` to give a
/// builder for a perfect module quasi-isomorphic to `e`.
pub fn perfect_from_smooth(cert: &SmoothCertificate, e: &DgModule) -> Result<PerfectPresentation> {
    let a = &cert.algebra;
    if e.algebra() != a {
        return Err(Error::CertificateMismatch("module is over a different algebra".into()));
    }
    e.check().map_err(|err| Error::InvalidModule(err.to_string()))?;
    cert.verify()?;
    let ring = a.ring().clone();
    let n = a.dim();
    let s = cert.length;
    let t = Tensored {
        cert,
        module: e,
        n,
        unit: (0..n).map(|i| a.unit()[(i, 0)].clone()).collect(),
        de: e.differential(),
    };
    let e_degrees = e.underlying().basis_degrees();
    let mut distinct = e_degrees.clone();
    distinct.dedup();

    let mut replay = Replay::new(a);
    let mut builder = Vec::new();
    let mut gen_of: HashMap<Cell, usize> = HashMap::new();
    let mut cells: Vec<Cell> = Vec::new();
    let words = |j: usize| (n - 1).pow(j as u32);
    for j in 0..=s {
        for &deg in distinct.iter().rev() {
            let group: Vec<Cell> = (0..words(j))
                .flat_map(|w| (0..e_degrees.len()).filter(|&x| e_degrees[x] == deg).map(move |x| (j, w, x)))
                .collect();
            if group.is_empty() {
                continue;
            }
            let index: HashMap<Label, usize> =
                replay.labels().expect("cells attach to a free module").iter().enumerate().map(|(p, &l)| (l, p)).collect();
            let mut images = Matrix::zeros(replay.dim(), group.len());
            for (col, &cell) in group.iter().enumerate() {
                for (i, ui) in t.unit.iter().enumerate() {
                    if ui.is_zero() {
                        continue;
                    }
                    for (target, alg, c) in t.differential(cell, i) {
                        let row = index[&(gen_of[&target], alg)];
                        images.add_at(row, col, &(ui * &c));
                    }
                }
            }
            let degree = deg - j as i64;
            let step = if images.is_zero() {
                BuildStep::Free { degree, rank: group.len() }
            } else {
                BuildStep::Cone { degree, rank: group.len(), images: images.normalized(&ring) }
            };
            replay.apply(&step)?;
            builder.push(step);
            for cell in group {
                gen_of.insert(cell, cells.len());
                cells.push(cell);
            }
        }
    }

    let labels = replay.labels().expect("no retract yet").to_vec();
    let dim = labels.len();
    let index: HashMap<Label, usize> = labels.iter().enumerate().map(|(p, &l)| (l, p)).collect();
    let degrees = replay.degrees.clone();

    let mut aug = Matrix::zeros(e.dim(), dim);
    for (p, &(g, i)) in labels.iter().enumerate() {
        let (j, _, x) = cells[g];
        if j == 0 {
            let col = e.act(i).column(x);
            for r in 0..e.dim() {
                aug.set(r, p, col[(r, 0)].clone());
            }
        }
    }

    let split = &cert.section * &cert.projection;
    let mut idem = Matrix::zeros(dim, dim);
    for (p, &(g, i)) in labels.iter().enumerate() {
        let (j, w, x) = cells[g];
        if j < s {
            idem.set(p, p, Scalar::one());
            continue;
        }
        for (w2, a2, x2, c) in t.tensor_map(&split, w, i, x) {
            idem.add_at(index[&(gen_of[&(s, w2, x2)], a2)], p, &c);
        }
    }
    let idem = idem.normalized(&ring);

    let quasi_iso = if idem.is_identity() {
        aug
    } else {
        let (section, retraction) = split_idempotent(&ring, &idem, &degrees)?;
        let step = BuildStep::Retract { idempotent: idem, section: section.clone(), retraction };
        replay.apply(&step)?;
        builder.push(step);
        (&aug * &section).normalized(&ring)
    };
    let out = PerfectPresentation { module: e.clone(), builder, quasi_iso };
    out.verify()?;
    Ok(out)
}

/// Degree-sorted section and retraction of a strict idempotent that
/// preserves the given basis degrees.
fn split_idempotent(ring: &CoefficientRing, e: &Matrix, degrees: &[i64]) -> Result<(Matrix, Matrix)> {
    let dim = e.rows();
    let mut distinct = degrees.to_vec();
    distinct.dedup();
    let mut cols: Vec<Matrix> = Vec::new();
    for deg in distinct {
        let idx: Vec<usize> = (0..dim).filter(|&p| degrees[p] == deg).collect();
        let block = e.select_rows(&idx).select_columns(&idx);
        let basis = saturated_basis_over(ring, &block);
        for c in 0..basis.cols() {
            let mut v = Matrix::zeros(dim, 1);
            for (r, &p) in idx.iter().enumerate() {
                v.set(p, 0, basis[(r, c)].clone());
            }
            cols.push(v);
        }
    }
    let section = Matrix::hstack(&cols.iter().collect::<Vec<_>>());
    let section = if cols.is_empty() { Matrix::zeros(dim, 0) } else { section };
    match solve_over(ring, &section, e)? {
        Solution::Solved(r) => Ok((section, r)),
        _ => Err(Error::NoSplitFound("image of the idempotent is not a direct summand".into())),
    }
}
