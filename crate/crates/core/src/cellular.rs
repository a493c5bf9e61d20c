//! Finite cell presentations of dg-algebras: free graded algebras on
//! ordered cells, each cell's boundary a noncommutative polynomial in
//! earlier cells.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{One, Zero};

use crate::complexes::{sign, ChainMap, Complex};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rings::{CoefficientRing, ExactData, Scalar};

/// Upper bound on the number of words in a truncation.
pub const WORD_LIMIT: usize = 20_000;

/// A noncommutative polynomial: words in cell indices with coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NcPoly {
    terms: BTreeMap<Vec<usize>, Scalar>,
}

impl NcPoly {
    pub fn zero() -> Self {
        NcPoly::default()
    }

    pub fn constant(c: Scalar) -> Self {
        NcPoly::term(c, vec![])
    }

    pub fn one() -> Self {
        NcPoly::constant(Scalar::one())
    }

    pub fn generator(i: usize) -> Self {
        NcPoly::term(Scalar::one(), vec![i])
    }

    pub fn term(c: Scalar, word: Vec<usize>) -> Self {
        let mut p = NcPoly::zero();
        p.add_term(word, &c);
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Scalar, Vec<usize>)>) -> Self {
        let mut p = NcPoly::zero();
        for (c, w) in terms {
            p.add_term(w, &c);
        }
        p
    }

    pub fn add_term(&mut self, word: Vec<usize>, c: &Scalar) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(word) {
            Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, &Scalar)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, word: &[usize]) -> Scalar {
        self.terms.get(word).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn letters(&self) -> impl Iterator<Item = usize> + '_ {
        self.terms.keys().flat_map(|w| w.iter().copied())
    }

    pub fn add(&self, other: &NcPoly) -> NcPoly {
        let mut p = self.clone();
        for (w, c) in &other.terms {
            p.add_term(w.clone(), c);
        }
        p
    }

    pub fn sub(&self, other: &NcPoly) -> NcPoly {
        self.add(&other.scale(&-Scalar::one()))
    }

    pub fn scale(&self, c: &Scalar) -> NcPoly {
        NcPoly::from_terms(self.terms.iter().map(|(w, x)| (x * c, w.clone())))
    }

    pub fn mul(&self, other: &NcPoly) -> NcPoly {
        let mut p = NcPoly::zero();
        for (u, a) in &self.terms {
            for (v, b) in &other.terms {
                let mut w = u.clone();
                w.extend_from_slice(v);
                p.add_term(w, &(a * b));
            }
        }
        p
    }

    /// Coefficients reduced into `ring`, dropping those that vanish there.
    pub fn normalized(&self, ring: &CoefficientRing) -> NcPoly {
        NcPoly::from_terms(self.terms.iter().map(|(w, c)| (ring.normalize(c), w.clone())))
    }

    pub fn map_coefficients(&self, f: &dyn Fn(&Scalar) -> Scalar) -> NcPoly {
        NcPoly::from_terms(self.terms.iter().map(|(w, c)| (f(c), w.clone())))
    }

    /// Algebra substitution `x_i ↦ images[i]`.
    pub fn substitute(&self, images: &[NcPoly]) -> NcPoly {
        let mut out = NcPoly::zero();
        for (w, c) in &self.terms {
            let mut p = NcPoly::constant(c.clone());
            for &x in w {
                p = p.mul(&images[x]);
            }
            out = out.add(&p);
        }
        out
    }

    /// Extends `d(x_i) = boundaries[i]` to a graded derivation with Koszul signs.
    pub fn derivative(&self, degrees: &[i64], boundaries: &[NcPoly]) -> NcPoly {
        let mut out = NcPoly::zero();
        for (w, c) in &self.terms {
            let mut before = 0;
            for (j, &x) in w.iter().enumerate() {
                let left = NcPoly::term(c * sign(before), w[..j].to_vec());
                let right = NcPoly::term(Scalar::one(), w[j + 1..].to_vec());
                out = out.add(&left.mul(&boundaries[x]).mul(&right));
                before += degrees[x];
            }
        }
        out
    }

    /// The common degree of all terms, if there is one (`None` for zero).
    pub fn degree(&self, degrees: &[i64]) -> Option<std::result::Result<i64, ()>> {
        let mut it = self.terms.keys().map(|w| w.iter().map(|&x| degrees[x]).sum::<i64>());
        let first = it.next()?;
        Some(if it.all(|d| d == first) { Ok(first) } else { Err(()) })
    }
}

impl fmt::Display for NcPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(w, c)| {
                let word = if w.is_empty() { "1".to_string() } else { w.iter().map(|x| format!("x{x}")).collect::<Vec<_>>().join("·") };
                format!("({c})·{word}")
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub name: String,
    pub degree: i64,
    /// Boundary as a polynomial in cell indices.
    pub boundary: NcPoly,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellPresentation {
    ring: CoefficientRing,
    cells: Vec<Cell>,
}

impl CellPresentation {
    pub fn new(ring: CoefficientRing, cells: Vec<Cell>) -> Result<Self> {
        ring.check()?;
        let mut seen = std::collections::HashSet::new();
        for c in &cells {
            if !seen.insert(c.name.as_str()) {
                return Err(Error::DuplicateName(c.name.clone()));
            }
            if let Some(x) = c.boundary.letters().find(|&x| x >= cells.len()) {
                return Err(Error::InvalidPresentation(format!("boundary of {} mentions unknown cell #{x}", c.name)));
            }
            for (_, v) in c.boundary.terms() {
                ring.check_scalar(v)?;
            }
        }
        let cells = cells
            .into_iter()
            .map(|c| Cell { boundary: c.boundary.normalized(&ring), ..c })
            .collect();
        Ok(CellPresentation { ring, cells })
    }

    /// Builds cells from `(name, degree, [(coefficient, word of names)])`.
    pub fn from_named(ring: CoefficientRing, cells: &[(&str, i64, Vec<(Scalar, Vec<&str>)>)]) -> Result<Self> {
        let index: HashMap<&str, usize> = cells.iter().enumerate().map(|(i, c)| (c.0, i)).collect();
        let mut out = Vec::new();
        for (name, degree, terms) in cells {
            let mut b = NcPoly::zero();
            for (c, w) in terms {
                let word = w
                    .iter()
                    .map(|x| index.get(x).copied().ok_or_else(|| Error::InvalidPresentation(format!("unknown cell {x:?}"))))
                    .collect::<Result<Vec<_>>>()?;
                b.add_term(word, c);
            }
            out.push(Cell { name: name.to_string(), degree: *degree, boundary: b });
        }
        CellPresentation::new(ring, out)
    }

    pub fn ring(&self) -> &CoefficientRing {
        &self.ring
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.cells.iter().position(|c| c.name == name)
    }

    pub fn degrees(&self) -> Vec<i64> {
        self.cells.iter().map(|c| c.degree).collect()
    }

    pub fn boundaries(&self) -> Vec<NcPoly> {
        self.cells.iter().map(|c| c.boundary.clone()).collect()
    }

    pub fn word_degree(&self, w: &[usize]) -> i64 {
        w.iter().map(|&x| self.cells[x].degree).sum()
    }

    /// Applies the differential to a polynomial.
    pub fn d(&self, p: &NcPoly) -> NcPoly {
        p.derivative(&self.degrees(), &self.boundaries()).normalized(&self.ring)
    }

    /// First violated condition, if any.
    pub fn defect(&self) -> Option<String> {
        let degrees = self.degrees();
        for (m, c) in self.cells.iter().enumerate() {
            if let Some(x) = c.boundary.letters().find(|&x| x >= m) {
                return Some(format!("boundary of {} mentions later cell {}", c.name, self.cells[x].name));
            }
            if c.boundary.degree(&degrees).is_some_and(|d| d != Ok(c.degree + 1)) {
                return Some(format!("boundary of {} is not homogeneous of degree {}", c.name, c.degree + 1));
            }
            if !self.d(&c.boundary).is_zero() {
                return Some(format!("d∘d ≠ 0 on cell {}", c.name));
            }
        }
        None
    }

    pub fn validate(&self) -> Result<()> {
        match self.defect() {
            None => Ok(()),
            Some(why) => Err(Error::InvalidPresentation(why)),
        }
    }

    /// Weights: 1 for cycles, otherwise the largest weight of a boundary
    /// word, so that the differential never raises weight.
    pub fn weights(&self) -> Vec<usize> {
        let mut wt: Vec<usize> = Vec::with_capacity(self.cells.len());
        for c in &self.cells {
            let w = c.boundary.terms().map(|(word, _)| word.iter().map(|&x| wt[x]).sum::<usize>()).max().unwrap_or(0);
            wt.push(w.max(1));
        }
        wt
    }

    pub fn word_weight(&self, w: &[usize]) -> usize {
        let wt = self.weights();
        w.iter().map(|&x| wt[x]).sum()
    }
}

impl ExactData for CellPresentation {
    fn coefficient_ring(&self) -> &CoefficientRing {
        &self.ring
    }

    fn visit_scalars(&self, f: &mut dyn FnMut(&Scalar)) {
        for c in &self.cells {
            c.boundary.terms().for_each(|(_, v)| f(v));
        }
    }

    fn map_scalars(&self, target: &CoefficientRing, f: &dyn Fn(&Scalar) -> Scalar) -> Self {
        CellPresentation {
            ring: target.clone(),
            cells: self
                .cells
                .iter()
                .map(|c| Cell { boundary: c.boundary.map_coefficients(f).normalized(target), ..c.clone() })
                .collect(),
        }
    }
}

/// True iff cells only mention earlier cells, boundaries are homogeneous of
/// the right degree and `d∘d = 0`.
pub fn validate_cells(p: &CellPresentation) -> bool {
    p.defect().is_none()
}

/// The subcomplex of the free algebra spanned by words of weight ≤ `w`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightTruncation {
    pub presentation: CellPresentation,
    pub weight: usize,
    /// Words of the total basis, in order.
    pub words: Vec<Vec<usize>>,
    pub complex: Complex,
}

impl WeightTruncation {
    pub fn position(&self, word: &[usize]) -> Option<usize> {
        self.words.iter().position(|w| w == word)
    }

    fn index(&self) -> HashMap<&[usize], usize> {
        self.words.iter().enumerate().map(|(i, w)| (w.as_slice(), i)).collect()
    }

    /// Coordinates of a polynomial whose words all lie in the truncation.
    pub fn coordinates(&self, p: &NcPoly) -> Result<Matrix> {
        let index = self.index();
        let mut v = Matrix::zeros(self.words.len(), 1);
        for (w, c) in p.terms() {
            let i = index
                .get(w.as_slice())
                .ok_or_else(|| Error::Overflow(format!("word {w:?} leaves the weight-{} truncation", self.weight)))?;
            v.set(*i, 0, c.clone());
        }
        Ok(v)
    }
}

pub fn truncate(p: &CellPresentation, w: usize) -> Result<WeightTruncation> {
    p.validate()?;
    let wt = p.weights();
    let mut words: Vec<Vec<usize>> = vec![vec![]];
    let mut frontier: Vec<(Vec<usize>, usize)> = vec![(vec![], 0)];
    while let Some((word, weight)) = frontier.pop() {
        for (x, &cw) in wt.iter().enumerate() {
            if weight + cw <= w {
                let mut next = word.clone();
                next.push(x);
                words.push(next.clone());
                if words.len() > WORD_LIMIT {
                    return Err(Error::Overflow(format!("weight-{w} truncation has more than {WORD_LIMIT} words")));
                }
                frontier.push((next, weight + cw));
            }
        }
    }
    words.sort_by(|a, b| {
        let key = |x: &Vec<usize>| (p.word_degree(x), x.iter().map(|&c| wt[c]).sum::<usize>(), x.len());
        key(a).cmp(&key(b)).then_with(|| a.cmp(b))
    });
    let degrees: Vec<i64> = words.iter().map(|x| p.word_degree(x)).collect();
    let index: HashMap<&[usize], usize> = words.iter().enumerate().map(|(i, x)| (x.as_slice(), i)).collect();
    let n = words.len();
    let mut d = Matrix::zeros(n, n);
    for (j, word) in words.iter().enumerate() {
        for (image, c) in p.d(&NcPoly::term(Scalar::one(), word.clone())).terms() {
            let i = index.get(image.as_slice()).ok_or_else(|| {
                Error::InvalidPresentation(format!("differential raises the weight of {word:?}"))
            })?;
            d.set(*i, j, c.clone());
        }
    }
    let complex = Complex::from_total(p.ring().clone(), &degrees, &d)?;
    Ok(WeightTruncation { presentation: p.clone(), weight: w, words, complex })
}

pub fn weight_truncation(p: &CellPresentation, w: usize) -> Result<Complex> {
    Ok(truncate(p, w)?.complex)
}

/// The split inclusion of the weight-`w` truncation into a larger one.
pub fn truncation_inclusion(small: &WeightTruncation, large: &WeightTruncation) -> Result<ChainMap> {
    if small.presentation != large.presentation || small.weight > large.weight {
        return Err(Error::InvalidPresentation("truncations are not nested".into()));
    }
    let mut m = Matrix::zeros(large.words.len(), small.words.len());
    let index = large.index();
    for (j, w) in small.words.iter().enumerate() {
        m.set(index[w.as_slice()], j, Scalar::one());
    }
    ChainMap::from_total(&small.complex, &large.complex, &m)
}

/// An algebra map out of a free algebra, given by images of the generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellMorphism {
    pub images: Vec<NcPoly>,
}

impl CellMorphism {
    pub fn identity(p: &CellPresentation) -> Self {
        CellMorphism { images: (0..p.len()).map(NcPoly::generator).collect() }
    }

    pub fn apply(&self, x: &NcPoly) -> NcPoly {
        x.substitute(&self.images)
    }

    /// `self ∘ first`.
    pub fn compose(&self, first: &CellMorphism) -> CellMorphism {
        CellMorphism { images: first.images.iter().map(|p| self.apply(p)).collect() }
    }

    pub fn normalized(&self, ring: &CoefficientRing) -> CellMorphism {
        CellMorphism { images: self.images.iter().map(|p| p.normalized(ring)).collect() }
    }

    /// Checks degrees and compatibility with differentials on generators.
    pub fn check(&self, src: &CellPresentation, dst: &CellPresentation) -> Result<()> {
        let bad = |g: &Cell, reason: String| Err(Error::NotAMorphism { generator: g.name.clone(), reason });
        if self.images.len() != src.len() {
            return Err(Error::ShapeMismatch(format!("{} images for {} generators", self.images.len(), src.len())));
        }
        let degrees = dst.degrees();
        for (g, img) in src.cells.iter().zip(&self.images) {
            if let Some(x) = img.letters().find(|&x| x >= dst.len()) {
                return bad(g, format!("image mentions unknown cell #{x}"));
            }
            if img.terms().any(|(_, c)| !dst.ring().contains(&dst.ring().normalize(c))) {
                return bad(g, format!("image has coefficients outside {}", dst.ring()));
            }
            match img.degree(&degrees) {
                Some(Ok(d)) if d != g.degree => return bad(g, format!("image has degree {d}, expected {}", g.degree)),
                Some(Err(())) => return bad(g, "image is not homogeneous".into()),
                _ => {}
            }
            let lhs = dst.d(img);
            let rhs = self.apply(&g.boundary).normalized(dst.ring());
            if lhs != rhs {
                return bad(g, "does not commute with the differential".into());
            }
        }
        Ok(())
    }

    /// The induced chain map between weight truncations.
    pub fn on_truncation(&self, src: &WeightTruncation, dst: &WeightTruncation) -> Result<ChainMap> {
        let ring = dst.presentation.ring();
        let mut m = Matrix::zeros(dst.words.len(), src.words.len());
        for (j, w) in src.words.iter().enumerate() {
            let img = self.apply(&NcPoly::term(Scalar::one(), w.clone())).normalized(ring);
            let col = dst.coordinates(&img)?;
            m.paste(0, j, &col);
        }
        ChainMap::from_total(&src.complex, &dst.complex, &m)
    }

    pub fn map_coefficients(&self, f: &dyn Fn(&Scalar) -> Scalar) -> CellMorphism {
        CellMorphism { images: self.images.iter().map(|p| p.map_coefficients(f)).collect() }
    }
}

/// `A` as a retract of a cell algebra `B`: `r ∘ i = id` on generators of `A`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RetractWitness {
    pub target: CellPresentation,
    pub ambient: CellPresentation,
    /// `i: A → B`, images of the cells of `A`.
    pub section: CellMorphism,
    /// `r: B → A`, images of the cells of `B`.
    pub retraction: CellMorphism,
}

impl RetractWitness {
    pub fn identity(p: &CellPresentation) -> Self {
        RetractWitness {
            target: p.clone(),
            ambient: p.clone(),
            section: CellMorphism::identity(p),
            retraction: CellMorphism::identity(p),
        }
    }

    pub fn ring(&self) -> &CoefficientRing {
        self.ambient.ring()
    }
}

impl ExactData for RetractWitness {
    fn coefficient_ring(&self) -> &CoefficientRing {
        self.ambient.ring()
    }

    fn visit_scalars(&self, f: &mut dyn FnMut(&Scalar)) {
        self.target.visit_scalars(f);
        self.ambient.visit_scalars(f);
        for p in self.section.images.iter().chain(&self.retraction.images) {
            p.terms().for_each(|(_, v)| f(v));
        }
    }

    fn map_scalars(&self, target: &CoefficientRing, f: &dyn Fn(&Scalar) -> Scalar) -> Self {
        RetractWitness {
            target: self.target.map_scalars(target, f),
            ambient: self.ambient.map_scalars(target, f),
            section: self.section.map_coefficients(f).normalized(target),
            retraction: self.retraction.map_coefficients(f).normalized(target),
        }
    }
}

/// `Ok(true)` iff both maps are morphisms and `r ∘ i = id` on generators.
pub fn verify_retract(w: &RetractWitness) -> Result<bool> {
    if w.target.ring() != w.ambient.ring() {
        return Err(Error::RingMismatch { expected: w.ambient.ring().clone(), found: w.target.ring().clone() });
    }
    w.target.validate()?;
    w.ambient.validate()?;
    w.section.check(&w.target, &w.ambient)?;
    w.retraction.check(&w.ambient, &w.target)?;
    let ri = w.retraction.compose(&w.section).normalized(w.target.ring());
    Ok(ri == CellMorphism::identity(&w.target))
}

/// `p = i ∘ r` on the generators of the ambient algebra; `p ∘ p = p`.
pub fn idempotent_of_retract(w: &RetractWitness) -> Result<CellMorphism> {
    if !verify_retract(w)? {
        return Err(Error::InvalidWitness("r ∘ i is not the identity".into()));
    }
    let ring = w.ambient.ring();
    let p = w.section.compose(&w.retraction).normalized(ring);
    if p.compose(&p).normalized(ring) != p {
        return Err(Error::InvalidWitness("i ∘ r is not idempotent".into()));
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> CoefficientRing {
        CoefficientRing::Rationals
    }

    fn one() -> Scalar {
        Scalar::one()
    }

    fn xy() -> CellPresentation {
        CellPresentation::from_named(q(), &[("x", 0, vec![]), ("y", 0, vec![])]).unwrap()
    }

    #[test]
    fn validation_examples() {
        let free = CellPresentation::from_named(q(), &[("x", 0, vec![])]).unwrap();
        assert!(validate_cells(&free));
        let p = CellPresentation::from_named(
            q(),
            &[("x", 0, vec![]), ("y", -1, vec![(one(), vec!["x", "x"]), (-one(), vec!["x"])])],
        )
        .unwrap();
        assert!(validate_cells(&p));
        let later = CellPresentation::from_named(q(), &[("y", -1, vec![(one(), vec!["x"])]), ("x", 0, vec![])]).unwrap();
        assert!(!validate_cells(&later));
        assert!(matches!(
            CellPresentation::from_named(q(), &[("x", 0, vec![]), ("x", 1, vec![])]),
            Err(Error::DuplicateName(_))
        ));
    }

    #[test]
    fn koszul_signs_detect_nonzero_square() {
        // a, c odd cycles; de = c, df = a
        let p = CellPresentation::from_named(
            q(),
            &[("a", 1, vec![]), ("c", 1, vec![]), ("e", 0, vec![(one(), vec!["c"])]), ("f", 0, vec![(one(), vec!["a"])])],
        )
        .unwrap();
        assert!(validate_cells(&p));
        // d(e·f) = c·f + e·a, d²(e·f) = -c·a + c·a = 0 only with signs
        let ef = NcPoly::term(one(), vec![2, 3]);
        assert!(p.d(&p.d(&ef)).is_zero());
        let bad = CellPresentation::from_named(
            q(),
            &[("a", 1, vec![]), ("b", 0, vec![(one(), vec!["a"])]), ("c", -1, vec![(one(), vec!["b"])])],
        )
        .unwrap();
        assert!(!validate_cells(&bad));
    }

    #[test]
    fn truncation_examples() {
        let free = CellPresentation::from_named(q(), &[("x", 0, vec![])]).unwrap();
        assert_eq!(weight_truncation(&free, 0).unwrap().total_rank(), 1);
        let t = CellPresentation::from_named(q(), &[("t", 1, vec![])]).unwrap();
        let c = weight_truncation(&t, 2).unwrap();
        assert_eq!((c.lo(), c.ranks().to_vec()), (0, vec![1, 1, 1]));
    }

    #[test]
    fn acyclic_cell_truncation() {
        // x in degree 0 killed by y: d y = x
        let p = CellPresentation::from_named(q(), &[("x", 0, vec![]), ("y", -1, vec![(one(), vec!["x"])])]).unwrap();
        let c = weight_truncation(&p, 2).unwrap();
        c.check().unwrap();
        assert_eq!(c.total_rank(), 1 + 2 + 4);
    }

    #[test]
    fn retract_examples() {
        let p = xy();
        assert!(verify_retract(&RetractWitness::identity(&p)).unwrap());
        let x = CellPresentation::from_named(q(), &[("x", 0, vec![])]).unwrap();
        let proj = RetractWitness {
            target: x.clone(),
            ambient: p.clone(),
            section: CellMorphism { images: vec![NcPoly::generator(0)] },
            retraction: CellMorphism { images: vec![NcPoly::generator(0), NcPoly::zero()] },
        };
        assert!(verify_retract(&proj).unwrap());
        let e = idempotent_of_retract(&proj).unwrap();
        assert_eq!(e.images, vec![NcPoly::generator(0), NcPoly::zero()]);
        let fold = RetractWitness {
            retraction: CellMorphism { images: vec![NcPoly::generator(0), NcPoly::generator(0)] },
            ..proj
        };
        assert!(verify_retract(&fold).unwrap());
        let e = idempotent_of_retract(&fold).unwrap();
        assert_eq!(e.images, vec![NcPoly::generator(0), NcPoly::generator(0)]);
        assert_eq!(e.compose(&e), e);
        assert_eq!(idempotent_of_retract(&RetractWitness::identity(&p)).unwrap(), CellMorphism::identity(&p));
    }

    #[test]
    fn non_morphism_names_generator() {
        let p = xy();
        let bad = RetractWitness {
            target: p.clone(),
            ambient: p.clone(),
            section: CellMorphism::identity(&p),
            retraction: CellMorphism { images: vec![NcPoly::generator(0), NcPoly::term(one(), vec![0, 0, 0]).add(&NcPoly::one())] },
        };
        assert!(matches!(verify_retract(&bad), Ok(false)));
        let t = CellPresentation::from_named(q(), &[("t", 1, vec![]), ("s", 0, vec![])]).unwrap();
        let wrong_degree = RetractWitness {
            target: t.clone(),
            ambient: t.clone(),
            section: CellMorphism { images: vec![NcPoly::generator(1), NcPoly::generator(1)] },
            retraction: CellMorphism::identity(&t),
        };
        match verify_retract(&wrong_degree) {
            Err(Error::NotAMorphism { generator, .. }) => assert_eq!(generator, "t"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn idempotent_acts_on_truncation() {
        let p = xy();
        let fold = CellMorphism { images: vec![NcPoly::generator(0), NcPoly::generator(0)] };
        let t = truncate(&p, 2).unwrap();
        let f = fold.on_truncation(&t, &t).unwrap();
        assert_eq!(f.compose(&f).unwrap(), f);
    }

    #[test]
    fn inclusion_is_split() {
        let p = CellPresentation::from_named(q(), &[("x", 0, vec![]), ("y", -1, vec![(one(), vec!["x"])])]).unwrap();
        let (a, b) = (truncate(&p, 1).unwrap(), truncate(&p, 2).unwrap());
        let inc = truncation_inclusion(&a, &b).unwrap();
        assert!(inc.is_valid());
        let m = inc.total();
        assert!((&m.transpose() * &m).is_identity());
    }
}
