//! Descent from Q to finite stages `Z[1/S]` of the localization tower.
//!
//! Every object over Q has finitely many coefficients, so it is already
//! defined over the stage inverting their denominators. Properties that need
//! more (acyclicity of a cone, splitting of an idempotent) are reached by
//! inverting the torsion or obstruction primes found along the way.

use crate::cellular::{idempotent_of_retract, truncate, verify_retract, CellPresentation, RetractWitness};
use crate::complexes::{cohomology, cone, is_quasi_iso, ChainMap, CohomologyReport, Complex, Homotopy};
use crate::dga::{is_pspa, DgAlgebra, DgModule};
use crate::error::{Error, Result};
use crate::karoubi::{telescope_split, verify_idempotent, HomotopyIdempotent, SplittingCertificate};
use crate::rings::{minimal_localization_of, CoefficientRing, ExactData, RingMap};

pub const DEFAULT_MAX_PRIMES: usize = 32;

/// Stages `Z[1/S]` with a cap on `|S|`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Tower {
    pub max_primes: usize,
}

impl Default for Tower {
    fn default() -> Self {
        Tower { max_primes: DEFAULT_MAX_PRIMES }
    }
}

impl Tower {
    pub fn new(max_primes: usize) -> Self {
        Tower { max_primes }
    }

    /// The least stage above all of `rings` and inverting `primes`.
    pub fn join(&self, rings: &[&CoefficientRing], primes: &[u64]) -> Result<CoefficientRing> {
        let mut out = CoefficientRing::localized(primes.iter().copied())?;
        for r in rings {
            out = out.join(r)?;
        }
        let needed = out.inverted_primes().map_or(0, |p| p.len());
        if needed > self.max_primes {
            return Err(Error::StageJoinOverflow { needed, cap: self.max_primes });
        }
        Ok(out)
    }

    /// The least stage containing every scalar of `x` and the given rings.
    pub fn stage_of<T: ExactData>(&self, x: &T, rings: &[&CoefficientRing]) -> Result<CoefficientRing> {
        let own = minimal_localization_of(&x.scalars())?;
        let mut all = vec![&own];
        all.extend_from_slice(rings);
        self.join(&all, &[])
    }
}

/// Objects with a validity check, so that descended models can be
/// re-verified at their stage.
pub trait Descendable: ExactData + Clone + PartialEq {
    fn validate_object(&self) -> Result<()>;
}

impl Descendable for Complex {
    fn validate_object(&self) -> Result<()> {
        self.check()
    }
}

impl Descendable for ChainMap {
    fn validate_object(&self) -> Result<()> {
        self.check()
    }
}

impl Descendable for Homotopy {
    fn validate_object(&self) -> Result<()> {
        self.check()
    }
}

impl Descendable for DgAlgebra {
    fn validate_object(&self) -> Result<()> {
        self.check()
    }
}

impl Descendable for DgModule {
    fn validate_object(&self) -> Result<()> {
        self.check()
    }
}

impl Descendable for CellPresentation {
    fn validate_object(&self) -> Result<()> {
        self.validate()
    }
}

impl Descendable for HomotopyIdempotent {
    fn validate_object(&self) -> Result<()> {
        if verify_idempotent(self)? {
            Ok(())
        } else {
            Err(Error::InvalidIdempotent("e∘e - e ≠ dh + hd".into()))
        }
    }
}

impl Descendable for SplittingCertificate {
    fn validate_object(&self) -> Result<()> {
        self.verify()
    }
}

impl Descendable for RetractWitness {
    fn validate_object(&self) -> Result<()> {
        if verify_retract(self)? {
            Ok(())
        } else {
            Err(Error::InvalidWitness("r ∘ i is not the identity".into()))
        }
    }
}

/// A model over a stage whose base change back to the input's ring is the
/// input itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DescentResult<T> {
    pub stage: CoefficientRing,
    pub input: T,
    pub model: T,
}

impl<T: Descendable> DescentResult<T> {
    pub fn verify(&self) -> Result<()> {
        if self.model.coefficient_ring() != &self.stage {
            return Err(Error::InvalidCertificate("model is not over the stated stage".into()));
        }
        if !self.stage.is_rational_subring() {
            return Err(Error::InvalidCertificate("stage is not a localization of Z".into()));
        }
        self.model.validate_object().map_err(|e| Error::InvalidCertificate(format!("model: {e}")))?;
        let back = self.model.base_change(&RingMap::new(self.stage.clone(), self.input.coefficient_ring().clone())?)?;
        if back != self.input {
            return Err(Error::InvalidCertificate("base change of the model differs from the input".into()));
        }
        Ok(())
    }

    /// The model read over a larger stage.
    pub fn at(&self, stage: &CoefficientRing) -> Result<T> {
        self.model.base_change(&RingMap::new(self.stage.clone(), stage.clone())?)
    }
}

fn rational_input<T: ExactData>(x: &T) -> Result<()> {
    match x.coefficient_ring() {
        CoefficientRing::Rationals => Ok(()),
        r => Err(Error::InvalidObject(format!("descent starts from an object over Q, found {r}"))),
    }
}

fn descend_at<T: Descendable>(x: &T, stage: CoefficientRing) -> Result<DescentResult<T>> {
    let model = x.reinterpret(&stage)?;
    Ok(DescentResult { stage, input: x.clone(), model })
}

/// The least stage over which `x` is defined, with `x` read over it.
pub fn ring_of_definition<T: Descendable>(x: &T) -> Result<DescentResult<T>> {
    rational_input(x)?;
    x.validate_object().map_err(|e| Error::InvalidObject(e.to_string()))?;
    let stage = minimal_localization_of(&x.scalars())?;
    descend_at(x, stage)
}

fn matches_input<T: PartialEq>(what: &str, got: &T, expected: &T) -> Result<()> {
    if got != expected {
        return Err(Error::CertificateMismatch(format!("{what} does not match the given model")));
    }
    Ok(())
}

pub fn descend_morphism(
    f: &ChainMap,
    src: &DescentResult<Complex>,
    dst: &DescentResult<Complex>,
    tower: &Tower,
) -> Result<DescentResult<ChainMap>> {
    rational_input(f)?;
    matches_input("source", f.src(), &src.input)?;
    matches_input("target", f.dst(), &dst.input)?;
    f.check()?;
    let stage = tower.stage_of(f, &[&src.stage, &dst.stage])?;
    descend_at(f, stage)
}

/// Descends `h: f ≃ g` given descended models of `f` and `g`.
pub fn descend_homotopy(
    h: &Homotopy,
    f: &DescentResult<ChainMap>,
    g: &DescentResult<ChainMap>,
    tower: &Tower,
) -> Result<DescentResult<Homotopy>> {
    rational_input(h)?;
    matches_input("first map", h.from(), &f.input)?;
    matches_input("second map", h.to(), &g.input)?;
    h.check()?;
    let stage = tower.stage_of(h, &[&f.stage, &g.stage])?;
    descend_at(h, stage)
}

/// A descended quasi-isomorphism with the cohomology of its cone at the stage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuasiIsoDescent {
    pub morphism: DescentResult<ChainMap>,
    pub cone: CohomologyReport,
}

impl QuasiIsoDescent {
    pub fn stage(&self) -> &CoefficientRing {
        &self.morphism.stage
    }

    pub fn verify(&self) -> Result<()> {
        self.morphism.verify()?;
        let report = cohomology(&cone(&self.morphism.model)?)?;
        if report != self.cone || !report.is_zero() {
            return Err(Error::InvalidCertificate("cone is not acyclic at the stage".into()));
        }
        Ok(())
    }
}

pub fn descend_quasi_iso(
    f: &ChainMap,
    src: &DescentResult<Complex>,
    dst: &DescentResult<Complex>,
    tower: &Tower,
) -> Result<QuasiIsoDescent> {
    if !is_quasi_iso(f)? {
        return Err(Error::NotAQuasiIso("the map is not a quasi-isomorphism over Q".into()));
    }
    let mut morphism = descend_morphism(f, src, dst, tower)?;
    loop {
        let report = cohomology(&cone(&morphism.model)?)?;
        let primes = report.torsion_primes();
        if report.is_zero() {
            return Ok(QuasiIsoDescent { morphism, cone: report });
        }
        if primes.is_empty() {
            return Err(Error::NotAQuasiIso("cone has free cohomology at the stage".into()));
        }
        let stage = tower.join(&[&morphism.stage], &primes)?;
        morphism = descend_at(f, stage)?;
    }
}

/// A retract witness over Q split at a finite stage on its weight truncation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitDescent {
    pub witness: RetractWitness,
    pub weight: usize,
    /// The idempotent induced on the truncation, over Q.
    pub idempotent: HomotopyIdempotent,
    pub stage: CoefficientRing,
    pub certificate: SplittingCertificate,
}

impl SplitDescent {
    pub fn verify(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::InvalidCertificate(m.into()));
        if self.certificate.ring() != &self.stage {
            return fail("certificate is not over the stated stage");
        }
        self.certificate.verify()?;
        let q = self.idempotent.coefficient_ring().clone();
        let back = self.certificate.base_change(&RingMap::new(self.stage.clone(), q)?)?;
        back.verify()?;
        if back.input != self.idempotent {
            return fail("certificate does not split the given idempotent");
        }
        Ok(())
    }

    /// Checks that `idempotent` is the one induced by the witness.
    pub fn verify_against_witness(&self) -> Result<()> {
        self.verify()?;
        if truncated_idempotent(&self.witness, self.weight)? != self.idempotent {
            return Err(Error::CertificateMismatch("idempotent is not induced by the witness".into()));
        }
        Ok(())
    }
}

/// The strict idempotent `i∘r` on the weight-`w` truncation of the ambient.
pub fn truncated_idempotent(w: &RetractWitness, weight: usize) -> Result<HomotopyIdempotent> {
    let p = idempotent_of_retract(w)?;
    let t = truncate(&w.ambient, weight)?;
    HomotopyIdempotent::strict(p.on_truncation(&t, &t)?)
}

pub fn descend_idempotent_and_split(w: &RetractWitness, weight: usize, tower: &Tower) -> Result<SplitDescent> {
    rational_input(&w.ambient)?;
    let ambient = ring_of_definition(&w.ambient)?;
    let p = idempotent_of_retract(w)?;
    let p_stage = minimal_localization_of(p.images.iter().flat_map(|x| x.terms().map(|(_, c)| c)))?;
    let idempotent = truncated_idempotent(w, weight)?;
    let mut stage = tower.join(&[&ambient.stage, &p_stage], &[])?;
    loop {
        let local = idempotent.reinterpret(&stage)?;
        match telescope_split(&local) {
            Ok(certificate) => {
                let out = SplitDescent { witness: w.clone(), weight, idempotent, stage, certificate };
                out.verify()?;
                return Ok(out);
            }
            Err(Error::UnsupportedRing { primes, .. }) if !primes.is_empty() => {
                stage = tower.join(&[&stage], &primes)?;
            }
            Err(e) => return Err(e),
        }
    }
}

pub fn descend_pspa_module(
    e: &DgModule,
    algebra: &DescentResult<DgAlgebra>,
    tower: &Tower,
) -> Result<DescentResult<DgModule>> {
    rational_input(e)?;
    if e.algebra() != &algebra.input {
        return Err(Error::InvalidModule("module is over a different algebra".into()));
    }
    e.check().map_err(|x| Error::InvalidModule(x.to_string()))?;
    let (pspa, _) = is_pspa(e)?;
    if !pspa {
        return Err(Error::InvalidModule("underlying complex is not perfect".into()));
    }
    let stage = tower.stage_of(e, &[&algebra.stage])?;
    descend_at(e, stage)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageCohomology {
    pub stage: CoefficientRing,
    pub report: CohomologyReport,
    /// Same Betti numbers as over Q and no torsion.
    pub agrees: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropernessReport {
    pub rational: CohomologyReport,
    pub stages: Vec<StageCohomology>,
    pub torsion_primes: Vec<u64>,
    /// The first stage whose cohomology matches the rational one.
    pub agreeing_stage: CoefficientRing,
}

/// Cohomology of the underlying complex at the model's stage and at the
/// stage obtained by inverting its torsion primes.
pub fn descend_properness(algebra: &DescentResult<DgAlgebra>, tower: &Tower) -> Result<PropernessReport> {
    algebra.verify()?;
    let rational = cohomology(algebra.input.underlying())?;
    let agrees = |r: &CohomologyReport| r.torsion_primes().is_empty() && r.betti_numbers() == rational.betti_numbers();
    let first = cohomology(algebra.model.underlying())?;
    let torsion_primes = first.torsion_primes();
    let mut stages = vec![StageCohomology { stage: algebra.stage.clone(), agrees: agrees(&first), report: first }];
    if !torsion_primes.is_empty() {
        let stage = tower.join(&[&algebra.stage], &torsion_primes)?;
        let report = cohomology(algebra.at(&stage)?.underlying())?;
        stages.push(StageCohomology { stage, agrees: agrees(&report), report });
    }
    let agreeing_stage = stages
        .iter()
        .find(|s| s.agrees)
        .map(|s| s.stage.clone())
        .ok_or_else(|| Error::InvalidCertificate("no stage agrees with the rational cohomology".into()))?;
    Ok(PropernessReport { rational, stages, torsion_primes, agreeing_stage })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cellular::{CellMorphism, NcPoly};
    use crate::linalg::Matrix;
    use crate::rings::{frac, int, Scalar};
    use num_traits::One;

    fn q() -> CoefficientRing {
        CoefficientRing::Rationals
    }

    fn loc(ps: &[u64]) -> CoefficientRing {
        CoefficientRing::localized(ps.iter().copied()).unwrap()
    }

    #[test]
    fn algebra_with_a_sixth() {
        // Q[x]/(x² - x/6)
        let a = DgAlgebra::from_table(
            q(),
            &[0, 0],
            &Matrix::zeros(2, 2),
            &[
                (0, 0, vec![int(1), int(0)]),
                (0, 1, vec![int(0), int(1)]),
                (1, 0, vec![int(0), int(1)]),
                (1, 1, vec![int(0), frac(1, 6)]),
            ],
            vec![int(1), int(0)],
        )
        .unwrap();
        let r = ring_of_definition(&a).unwrap();
        assert_eq!(r.stage, loc(&[2, 3]));
        r.verify().unwrap();
        let z = Complex::concentrated(q(), 0, 3);
        assert_eq!(ring_of_definition(&z).unwrap().stage, CoefficientRing::Integers);
    }

    #[test]
    fn morphism_with_a_fifth() {
        let c = Complex::concentrated(q(), 0, 1);
        let m = ring_of_definition(&c).unwrap();
        let id = descend_morphism(&ChainMap::identity(&c), &m, &m, &Tower::default()).unwrap();
        assert_eq!(id.stage, CoefficientRing::Integers);
        let f = ChainMap::from_fn(&c, &c, |_| Matrix::from_vec(1, 1, vec![frac(1, 5)]).unwrap()).unwrap();
        let d = descend_morphism(&f, &m, &m, &Tower::default()).unwrap();
        assert_eq!(d.stage, loc(&[5]));
        d.verify().unwrap();
    }

    #[test]
    fn homotopy_gains_primes() {
        let c = Complex::new(q(), 0, vec![1, 1], vec![Matrix::identity(1)]).unwrap();
        let m = ring_of_definition(&c).unwrap();
        let t = Tower::default();
        let zero = ChainMap::zero(&c, &c);
        let h = Homotopy::new(&zero, &zero, Default::default()).unwrap();
        let f = descend_morphism(&zero, &m, &m, &t).unwrap();
        assert_eq!(descend_homotopy(&h, &f, &f, &t).unwrap().stage, CoefficientRing::Integers);
        // f2 = dh + hd is homotopic to zero through h
        let h = Homotopy::new(&zero, &zero, [(1, Matrix::from_vec(1, 1, vec![frac(1, 14)]).unwrap())].into_iter().collect())
            .unwrap();
        let f2 = ChainMap::from_fn(&c, &c, |n| h.boundary(n)).unwrap();
        let hh = Homotopy::new(&f2, &zero, h.components().clone()).unwrap();
        let df = descend_morphism(&f2, &m, &m, &t).unwrap();
        let dh = descend_homotopy(&hh, &df, &f, &t).unwrap();
        assert_eq!(dh.stage, loc(&[2, 7]));
        dh.verify().unwrap();
    }

    #[test]
    fn times_three_needs_a_third() {
        let c = Complex::concentrated(q(), 0, 1);
        let m = ring_of_definition(&c).unwrap();
        let t = Tower::default();
        let f = ChainMap::from_fn(&c, &c, |_| Matrix::from_ints(1, 1, &[3])).unwrap();
        let d = descend_quasi_iso(&f, &m, &m, &t).unwrap();
        assert_eq!(d.stage(), &loc(&[3]));
        d.verify().unwrap();
        let id = descend_quasi_iso(&ChainMap::identity(&c), &m, &m, &t).unwrap();
        assert_eq!(id.stage(), &CoefficientRing::Integers);
        let zero = ChainMap::zero(&c, &c);
        assert!(matches!(descend_quasi_iso(&zero, &m, &m, &t), Err(Error::NotAQuasiIso(_))));
    }

    #[test]
    fn stage_cap() {
        let c = Complex::concentrated(q(), 0, 1);
        let m = ring_of_definition(&c).unwrap();
        let f = ChainMap::from_fn(&c, &c, |_| Matrix::from_vec(1, 1, vec![frac(1, 30)]).unwrap()).unwrap();
        assert!(matches!(
            descend_morphism(&f, &m, &m, &Tower::new(2)),
            Err(Error::StageJoinOverflow { needed: 3, cap: 2 })
        ));
    }

    fn xy() -> CellPresentation {
        CellPresentation::from_named(q(), &[("x", 0, vec![]), ("y", 0, vec![])]).unwrap()
    }

    #[test]
    fn identity_retract_descends_to_z() {
        let w = RetractWitness::identity(&xy());
        let d = descend_idempotent_and_split(&w, 2, &Tower::default()).unwrap();
        assert_eq!(d.stage, CoefficientRing::Integers);
        d.verify_against_witness().unwrap();
    }

    #[test]
    fn projection_with_a_half() {
        let x = CellPresentation::from_named(q(), &[("x", 0, vec![])]).unwrap();
        let half = Scalar::one() / int(2);
        let w = RetractWitness {
            target: x,
            ambient: xy(),
            section: CellMorphism { images: vec![NcPoly::generator(0).add(&NcPoly::generator(1).scale(&half))] },
            retraction: CellMorphism { images: vec![NcPoly::generator(0), NcPoly::zero()] },
        };
        assert!(verify_retract(&w).unwrap());
        let d = descend_idempotent_and_split(&w, 2, &Tower::default()).unwrap();
        assert_eq!(d.stage, loc(&[2]));
        d.verify_against_witness().unwrap();
    }

    #[test]
    fn pspa_module_gains_seven() {
        let k = DgAlgebra::ground(q());
        let alg = ring_of_definition(&k).unwrap();
        let reg = DgModule::regular(&k);
        assert_eq!(descend_pspa_module(&reg, &alg, &Tower::default()).unwrap().stage, CoefficientRing::Integers);
        let c = Complex::new(q(), 0, vec![1, 1], vec![Matrix::from_vec(1, 1, vec![frac(1, 7)]).unwrap()]).unwrap();
        let m = descend_pspa_module(&DgModule::over_ground(&c), &alg, &Tower::default()).unwrap();
        assert_eq!(m.stage, loc(&[7]));
        m.verify().unwrap();
    }

    /// Basis `x` (degree -1), `1` (degree 0) with `dx = 2`.
    fn doubled_interval() -> DgAlgebra {
        let d = Matrix::from_ints(2, 2, &[0, 0, 2, 0]);
        let products = [(1, 1, vec![int(0), int(1)]), (0, 1, vec![int(1), int(0)]), (1, 0, vec![int(1), int(0)])];
        DgAlgebra::from_table(q(), &[-1, 0], &d, &products, vec![int(0), int(1)]).unwrap()
    }

    #[test]
    fn properness_torsion() {
        let t = Tower::default();
        let a = ring_of_definition(&doubled_interval()).unwrap();
        let r = descend_properness(&a, &t).unwrap();
        assert_eq!(r.torsion_primes, vec![2]);
        assert_eq!(r.agreeing_stage, loc(&[2]));
        let m2 = ring_of_definition(&DgAlgebra::matrix_algebra(q(), 2)).unwrap();
        let r = descend_properness(&m2, &t).unwrap();
        assert!(r.stages.iter().all(|s| s.agrees));
    }
}
