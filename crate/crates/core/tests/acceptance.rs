//! Acceptance run: one pass/fail line per criterion, exact arithmetic only.

use std::path::{Path, PathBuf};
use std::time::Instant;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;

use dgforge::cli::run_captured;
use dgforge::complexes::{cohomology, induced_map, ChainMap};
use dgforge::descent::{
    descend_homotopy, descend_idempotent_and_split, descend_morphism, descend_quasi_iso, ring_of_definition,
    truncated_idempotent, Tower,
};
use dgforge::dga::{DgAlgebra, DgModule};
use dgforge::format::{encode_chain_map, scalar_paths, write_object, Certificate, Descended, Object, ObjectFile};
use dgforge::karoubi::{rectify_ladder, telescope_split};
use dgforge::linalg::{elementary_divisors, Matrix};
use dgforge::perfect::perfect_from_smooth;
use dgforge::random::*;
use dgforge::rings::{CoefficientRing, ExactData, RingMap};
use dgforge::smooth::{check_smooth, SmoothOutcome};

type Q = BigRational;

fn q() -> CoefficientRing {
    CoefficientRing::Rationals
}

// An independent row-reduction oracle on plain vectors of rationals.
mod oracle {
    use super::*;

    pub fn rows_of(m: &Matrix) -> Vec<Vec<Q>> {
        (0..m.rows()).map(|i| (0..m.cols()).map(|j| m[(i, j)].clone()).collect()).collect()
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(mut a: Vec<Vec<Q>>, cols: usize) -> (Vec<Vec<Q>>, Vec<usize>) {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            let Some(p) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else { continue };
            a.swap(r, p);
            let inv = Q::one() / a[r][c].clone();
            for x in a[r].iter_mut() {
                *x = &*x * &inv;
            }
            for i in 0..a.len() {
                if i != r && !a[i][c].is_zero() {
                    let f = a[i][c].clone();
                    for j in 0..cols {
                        let v = &a[r][j] * &f;
                        a[i][j] = &a[i][j] - &v;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (a, pivots)
    }

    pub fn rank(a: &[Vec<Q>], cols: usize) -> usize {
        rref(a.to_vec(), cols).1.len()
    }

    /// Kernel basis as column vectors.
    pub fn kernel(a: &[Vec<Q>], cols: usize) -> Vec<Vec<Q>> {
        let (r, pivots) = rref(a.to_vec(), cols);
        (0..cols)
            .filter(|c| !pivots.contains(c))
            .map(|f| {
                let mut v = vec![Q::zero(); cols];
                v[f] = Q::one();
                for (row, &p) in pivots.iter().enumerate() {
                    v[p] = -r[row][f].clone();
                }
                v
            })
            .collect()
    }

    pub fn apply(m: &[Vec<Q>], v: &[Q]) -> Vec<Q> {
        m.iter().map(|row| row.iter().zip(v).fold(Q::zero(), |acc, (a, b)| acc + a * b)).collect()
    }

    /// rank of H^n(e): dim (e Z^n + B^n) - dim B^n.
    pub fn induced_rank(e: &ChainMap, n: i64) -> usize {
        let b = e.src();
        let dim = b.rank(n);
        if dim == 0 {
            return 0;
        }
        let z = kernel(&rows_of(&b.d(n)), dim);
        let prev = rows_of(&b.d(n - 1));
        let boundaries: Vec<Vec<Q>> = (0..b.rank(n - 1)).map(|j| prev.iter().map(|r| r[j].clone()).collect()).collect();
        let em = rows_of(&e.f(n));
        let mut vectors: Vec<Vec<Q>> = z.iter().map(|v| apply(&em, v)).collect();
        vectors.extend(boundaries.iter().cloned());
        rank(&vectors, dim) - rank(&boundaries, dim)
    }
}

struct Tally {
    results: Vec<(usize, bool, String)>,
}

impl Tally {
    fn record(&mut self, n: usize, name: &str, started: Instant, outcome: Result<String, String>) {
        let secs = started.elapsed().as_secs_f64();
        let (ok, detail) = match outcome {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        let line = format!(
            "criterion {n:>2} [{}] {name}: {detail} ({secs:.1} s)",
            if ok { "PASS" } else { "FAIL" }
        );
        println!("{line}");
        self.results.push((n, ok, line));
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

struct Store {
    dir: PathBuf,
    count: usize,
    certificates: Vec<PathBuf>,
}

impl Store {
    fn save(&mut self, o: &Object) -> PathBuf {
        self.count += 1;
        let path = self.dir.join(format!("object_{:05}.json", self.count));
        std::fs::write(&path, write_object(o)).unwrap();
        if matches!(o, Object::Certificate(_) | Object::Descent(_)) {
            self.certificates.push(path.clone());
        }
        path
    }
}

fn cli_verify(path: &Path) -> i32 {
    run_captured(["dgforge", "verify", path.to_str().unwrap()]).0
}

fn criterion_1_and_2(store: &mut Store, tally: &mut Tally) {
    let started = Instant::now();
    let mut rng = seeded(1001);
    let mut corpus = Vec::new();
    let result = (|| -> Result<String, String> {
        for t in 0..200 {
            let planted = random_idempotent(&mut rng).map_err(s)?;
            let b = planted.idempotent.complex();
            ensure(b.ranks().iter().all(|&r| r <= 5) && b.ranks().len() <= 4, || format!("sample {t} too large"))?;
            let cert = telescope_split(&planted.idempotent).map_err(|e| format!("sample {t}: {e}"))?;
            let path = store.save(&Object::Certificate(Certificate::Splitting(cert.clone())));
            ensure(cli_verify(&path) == 0, || format!("sample {t}: cmd verify rejected the certificate"))?;
            for n in b.degrees().chain(cert.a.degrees()) {
                let (hi, hr, he) = (
                    induced_map(&cert.i, n).map_err(s)?,
                    induced_map(&cert.r, n).map_err(s)?,
                    induced_map(&cert.input.e, n).map_err(s)?,
                );
                ensure(&hr * &hi == Matrix::identity(hr.rows()), || format!("sample {t}: H(r)H(i) ≠ id in degree {n}"))?;
                ensure(&hi * &hr == he, || format!("sample {t}: H(i)H(r) ≠ H(e) in degree {n}"))?;
            }
            corpus.push((planted, cert));
        }
        Ok(format!("{} idempotents split, certificates verified, H(r)H(i) = id and H(i)H(r) = H(e)", corpus.len()))
    })();
    tally.record(1, "Karoubi splitting soundness", started, result);

    let started = Instant::now();
    let result = (|| -> Result<String, String> {
        ensure(corpus.len() == 200, || "criterion 1 corpus incomplete".into())?;
        for (t, (planted, cert)) in corpus.iter().enumerate() {
            let report = cohomology(&cert.a).map_err(s)?;
            let b = planted.idempotent.complex();
            for n in b.degrees() {
                let oracle = oracle::induced_rank(&planted.idempotent.e, n);
                let planted_rank = planted.kept_points.get(&n).copied().unwrap_or(0);
                ensure(report.betti(n) == oracle, || {
                    format!("sample {t} degree {n}: betti {} vs oracle rank {oracle}", report.betti(n))
                })?;
                ensure(oracle == planted_rank, || format!("sample {t} degree {n}: oracle {oracle} vs planted {planted_rank}"))?;
            }
        }
        Ok("Betti numbers of A equal rank H(e) from the row-reduction oracle in every degree".into())
    })();
    tally.record(2, "Telescope vs oracle", started, result);
}

fn criterion_3(tally: &mut Tally) {
    let started = Instant::now();
    let mut rng = seeded(1003);
    let result = (|| -> Result<String, String> {
        for t in 0..100 {
            let l = random_ladder_map(&mut rng, 4).map_err(s)?;
            let r = rectify_ladder(&l).map_err(|e| format!("sample {t}: {e}"))?;
            for n in 0..3 {
                let lhs = l.dst.maps[n].compose(&r.maps[n]).map_err(s)?;
                let rhs = r.maps[n + 1].compose(&l.src.maps[n]).map_err(s)?;
                let (a, b) = (encode_chain_map(&lhs).to_string(), encode_chain_map(&rhs).to_string());
                ensure(a.as_bytes() == b.as_bytes(), || format!("sample {t}: square {n} not byte-identical"))?;
            }
            for (n, h) in r.homotopies.iter().enumerate() {
                ensure(h.to() == &l.maps[n] && h.from() == &r.maps[n], || format!("sample {t}: homotopy {n} ends"))?;
                h.check().map_err(|e| format!("sample {t}: homotopy {n}: {e}"))?;
            }
        }
        Ok("100 ladders rectified; squares byte-identical, homotopies to the originals verified".into())
    })();
    tally.record(3, "Ladder rectification", started, result);
}

fn criterion_4(store: &mut Store, tally: &mut Tally) {
    let started = Instant::now();
    let mut rng = seeded(1004);
    let result = (|| -> Result<String, String> {
        for t in 0..100 {
            let (a, planted) = random_planted_algebra(&mut rng).map_err(s)?;
            let d = ring_of_definition(&a).map_err(|e| format!("sample {t}: {e}"))?;
            let expected = CoefficientRing::localized(planted.iter().copied()).map_err(s)?;
            ensure(d.stage == expected, || format!("sample {t}: stage {} but planted {:?}", d.stage, planted))?;
            let back = d.model.base_change(&RingMap::new(d.stage.clone(), q()).map_err(s)?).map_err(s)?;
            ensure(write_object(&Object::DgAlgebra(back)) == write_object(&Object::DgAlgebra(a.clone())), || {
                format!("sample {t}: round trip not byte-identical")
            })?;
            let path = store.save(&Object::Descent(Descended::DgAlgebra(d)));
            ensure(cli_verify(&path) == 0, || format!("sample {t}: cmd verify rejected the descent result"))?;
        }
        Ok("100 algebras: stage is exactly the planted prime set, round trip byte-identical".into())
    })();
    tally.record(4, "Ring of definition", started, result);
}

fn s_unit(x: &BigInt, primes: &[u64]) -> bool {
    let mut m = x.abs();
    for &p in primes {
        let p = BigInt::from(p);
        while !m.is_zero() && m.is_multiple_of(&p) {
            m /= &p;
        }
    }
    m.is_one()
}

/// Acyclicity over Z[1/S] from Smith forms of the cone differentials,
/// with the cone assembled here from the stage model.
fn cone_acyclic_by_snf(f: &ChainMap, primes: &[u64]) -> Result<(), String> {
    let (x, y) = (f.src(), f.dst());
    let lo = x.lo().min(y.lo()) - 2;
    let hi = x.hi().max(y.hi()) + 1;
    let dim = |n: i64| x.rank(n + 1) + y.rank(n);
    let diff = |n: i64| {
        let mut m = Matrix::zeros(dim(n + 1), dim(n));
        m.paste(0, 0, &-&x.d(n + 1));
        m.paste(x.rank(n + 2), 0, &f.f(n + 1));
        m.paste(x.rank(n + 2), x.rank(n + 1), &y.d(n));
        m
    };
    let rank_and_units = |m: &Matrix| {
        let divs = elementary_divisors(m);
        (divs.len(), divs.iter().all(|d| s_unit(d, primes)))
    };
    for n in lo..=hi {
        let (r_out, u_out) = rank_and_units(&diff(n));
        let (r_in, u_in) = rank_and_units(&diff(n - 1));
        if !(u_out && u_in) || r_out + r_in != dim(n) {
            return Err(format!("cone not acyclic in degree {n} over Z[1/{primes:?}]"));
        }
    }
    Ok(())
}

fn criterion_5(store: &mut Store, tally: &mut Tally) {
    let started = Instant::now();
    let mut rng = seeded(1005);
    let result = (|| -> Result<String, String> {
        let tower = Tower::default();
        let mut used_torsion = 0;
        for t in 0..50 {
            let planted = random_quasi_iso(&mut rng).map_err(s)?;
            let f = &planted.map;
            let src = ring_of_definition(f.src()).map_err(s)?;
            let dst = ring_of_definition(f.dst()).map_err(s)?;
            let d = descend_quasi_iso(f, &src, &dst, &tower).map_err(|e| format!("sample {t}: {e}"))?;
            let stage: Vec<u64> = d.stage().inverted_primes().unwrap_or(&[]).to_vec();
            ensure(planted.denominators.iter().all(|p| stage.contains(p)), || {
                format!("sample {t}: stage {stage:?} misses planted denominators {:?}", planted.denominators)
            })?;
            ensure(
                stage.iter().all(|p| planted.denominators.contains(p) || planted.torsion.contains(p)),
                || format!("sample {t}: stage {stage:?} exceeds denominators ∪ torsion"),
            )?;
            used_torsion += stage.iter().filter(|p| !planted.denominators.contains(p)).count();
            cone_acyclic_by_snf(&d.morphism.model, &stage).map_err(|e| format!("sample {t}: {e}"))?;
            let path = store.save(&Object::Certificate(Certificate::QuasiIsoDescent(d)));
            ensure(cli_verify(&path) == 0, || format!("sample {t}: cmd verify rejected the certificate"))?;
        }
        Ok(format!("50 quasi-isos descended; cones acyclic by Smith form ({used_torsion} torsion primes inverted)"))
    })();
    tally.record(5, "Quasi-iso descent", started, result);
}

fn criterion_6(store: &mut Store, tally: &mut Tally) {
    let started = Instant::now();
    let result = (|| -> Result<String, String> {
        let cases: [(&str, DgAlgebra, usize, Option<usize>); 4] = [
            ("k", DgAlgebra::ground(q()), 0, Some(0)),
            ("M2(Q)", DgAlgebra::matrix_algebra(q(), 2), 0, Some(0)),
            ("A2 path algebra", DgAlgebra::upper_triangular(q(), 2), 2, Some(1)),
            ("Q[x]/x^2", DgAlgebra::truncated_polynomial(q(), 2), 4, None),
        ];
        let mut seen = Vec::new();
        for (name, a, depth, length) in cases {
            let outcome = check_smooth(&a, depth).map_err(|e| format!("{name}: {e}"))?;
            let cert = match (outcome, length) {
                (SmoothOutcome::Smooth(c), Some(l)) if c.length == l => Certificate::Smooth(c),
                (SmoothOutcome::NotSmooth(c), None) => {
                    seen.push(format!("{name} period {:?}", c.period));
                    Certificate::NotSmooth(c)
                }
                (o, _) => return Err(format!("{name}: unexpected outcome {}", describe(&o))),
            };
            let path = store.save(&Object::Certificate(cert));
            ensure(cli_verify(&path) == 0, || format!("{name}: cmd verify rejected the certificate"))?;
        }
        Ok(format!("lengths 0, 0, 1 and a periodic syzygy ({})", seen.join(", ")))
    })();
    tally.record(6, "Smoothness checker", started, result);
}

fn describe(o: &SmoothOutcome) -> String {
    match o {
        SmoothOutcome::Smooth(c) => format!("smooth of length {}", c.length),
        SmoothOutcome::NotSmooth(c) => format!("not smooth, period {:?}", c.period),
        SmoothOutcome::Unknown { depth_exhausted } => format!("unknown at depth {depth_exhausted}"),
    }
}

fn criterion_7(store: &mut Store, tally: &mut Tally) {
    let started = Instant::now();
    let result = (|| -> Result<String, String> {
        let cases = [
            ("column module over M2(Q)", DgAlgebra::matrix_algebra(q(), 2), DgModule::column_module(q(), 2), 0),
            (
                "sink simple over A2",
                DgAlgebra::upper_triangular(q(), 2),
                DgModule::simple_upper_triangular(q(), 2, 1),
                2,
            ),
        ];
        for (name, a, e, depth) in cases {
            let SmoothOutcome::Smooth(c) = check_smooth(&a, depth).map_err(s)? else {
                return Err(format!("{name}: algebra not certified smooth"));
            };
            let p = perfect_from_smooth(&c, &e).map_err(|x| format!("{name}: {x}"))?;
            let built = p.replay().map_err(s)?;
            let f = ChainMap::from_total(built.underlying(), e.underlying(), &p.quasi_iso).map_err(s)?;
            ensure(dgforge::complexes::is_quasi_iso(&f).map_err(s)?, || format!("{name}: comparison not a quasi-iso"))?;
            ensure(dgforge::dga::module_map_defect(&built, &e, &p.quasi_iso).is_none(), || {
                format!("{name}: comparison is not a module map")
            })?;
            let path = store.save(&Object::Certificate(Certificate::Perfect(p)));
            ensure(cli_verify(&path) == 0, || format!("{name}: cmd verify rejected the presentation"))?;
        }
        Ok("both builders replay to modules quasi-isomorphic to the inputs".into())
    })();
    tally.record(7, "Perfect promotion", started, result);
}

fn criterion_8(store: &mut Store, tally: &mut Tally) {
    let started = Instant::now();
    let mut rng = seeded(1008);
    let result = (|| -> Result<String, String> {
        let tower = Tower::default();
        for t in 0..50 {
            let (f, g, h) = random_homotopic_pair(&mut rng).map_err(s)?;
            let src = ring_of_definition(f.src()).map_err(s)?;
            let dst = ring_of_definition(f.dst()).map_err(s)?;
            let fd = descend_morphism(&f, &src, &dst, &tower).map_err(|e| format!("sample {t}: {e}"))?;
            let gd = descend_morphism(&g, &src, &dst, &tower).map_err(|e| format!("sample {t}: {e}"))?;
            let hd = descend_homotopy(&h, &fd, &gd, &tower).map_err(|e| format!("sample {t}: {e}"))?;
            ensure(hd.stage.is_rational_subring() && hd.stage != q(), || format!("sample {t}: stage {}", hd.stage))?;
            hd.model.check().map_err(|e| format!("sample {t}: stage homotopy: {e}"))?;
            let back = hd.model.base_change(&RingMap::new(hd.stage.clone(), q()).map_err(s)?).map_err(s)?;
            back.check().map_err(|e| format!("sample {t}: base-changed homotopy: {e}"))?;
            ensure(back == h, || format!("sample {t}: base change does not reproduce h"))?;
            let path = store.save(&Object::Descent(Descended::Homotopy(hd)));
            ensure(cli_verify(&path) == 0, || format!("sample {t}: cmd verify rejected the descent result"))?;
        }
        Ok("50 homotopies verified at finite stages and after base change to Q".into())
    })();
    tally.record(8, "Full faithfulness", started, result);
}

fn criterion_9(store: &mut Store, tally: &mut Tally) {
    let started = Instant::now();
    let mut rng = seeded(1009);
    let result = (|| -> Result<String, String> {
        let tower = Tower::default();
        let mut stages = Vec::new();
        for t in 0..20 {
            let w = random_retract_witness(&mut rng, &[2, 3, 5, 7]).map_err(s)?;
            ensure(w.ambient.len() <= 3, || format!("sample {t}: too many cells"))?;
            let d = descend_idempotent_and_split(&w, 3, &tower).map_err(|e| format!("sample {t}: {e}"))?;
            let back = d.certificate.base_change(&RingMap::new(d.stage.clone(), q()).map_err(s)?).map_err(s)?;
            back.verify().map_err(|e| format!("sample {t}: base-changed certificate: {e}"))?;
            let original = truncated_idempotent(&w, 3).map_err(s)?;
            ensure(back.input == original, || format!("sample {t}: certificate splits a different idempotent"))?;
            stages.push(d.stage.to_string());
            let path = store.save(&Object::Certificate(Certificate::SplitDescent(d)));
            ensure(cli_verify(&path) == 0, || format!("sample {t}: cmd verify rejected the certificate"))?;
        }
        stages.sort();
        stages.dedup();
        Ok(format!("20 witnesses split at stages {{{}}}", stages.join(", ")))
    })();
    tally.record(9, "End-to-end pipeline", started, result);
}

/// Flips one bit of the numerator of one scalar.
fn flip_scalar(file: &mut ObjectFile, rng: &mut impl Rng) {
    let paths = scalar_paths(&file.payload);
    let path = paths.choose(rng).expect("certificate has scalars");
    let slot = file.payload.pointer_mut(path).unwrap();
    let x: Q = slot.as_str().unwrap().parse().unwrap();
    let bits = x.numer().bits().max(1);
    let bit = BigInt::one() << rng.gen_range(0..bits);
    let numer = x.numer() ^ &bit;
    let y = Q::new(numer, x.denom().clone());
    *slot = serde_json::Value::String(y.to_string());
}

fn criterion_10(store: &mut Store, tally: &mut Tally) {
    let started = Instant::now();
    let mut rng = seeded(1010);
    let result = (|| -> Result<String, String> {
        let total = store.certificates.len();
        ensure(total > 0, || "no certificates were emitted".into())?;
        let sample = total.div_ceil(100);
        let chosen: Vec<PathBuf> = store.certificates.choose_multiple(&mut rng, sample).cloned().collect();
        let mut rejected = 0;
        let mut resealed_rejected = 0;
        for (k, path) in chosen.iter().enumerate() {
            let mut file = ObjectFile::parse(&std::fs::read_to_string(path).unwrap()).map_err(s)?;
            flip_scalar(&mut file, &mut rng);
            let flipped = store.dir.join(format!("flipped_{k}.json"));
            std::fs::write(&flipped, file.to_text()).unwrap();
            if cli_verify(&flipped) == 1 {
                rejected += 1;
            }
            file.reseal();
            std::fs::write(&flipped, file.to_text()).unwrap();
            if cli_verify(&flipped) == 1 {
                resealed_rejected += 1;
            }
        }
        println!(
            "    note: with the seal recomputed, {resealed_rejected}/{sample} flipped certificates fail on content alone"
        );
        ensure(rejected == sample, || format!("{rejected}/{sample} bit-flipped certificates rejected"))?;
        Ok(format!("{rejected}/{sample} bit-flipped certificates rejected with exit 1 (of {total} emitted)"))
    })();
    tally.record(10, "Checker independence", started, result);
}

fn main() {
    let dir = tempfile::tempdir().expect("temporary directory");
    let mut store = Store { dir: dir.path().to_path_buf(), count: 0, certificates: Vec::new() };
    let mut tally = Tally { results: Vec::new() };
    println!("acceptance: exact arithmetic, zero tolerance");
    criterion_1_and_2(&mut store, &mut tally);
    criterion_3(&mut tally);
    criterion_4(&mut store, &mut tally);
    criterion_5(&mut store, &mut tally);
    criterion_6(&mut store, &mut tally);
    criterion_7(&mut store, &mut tally);
    criterion_8(&mut store, &mut tally);
    criterion_9(&mut store, &mut tally);
    criterion_10(&mut store, &mut tally);
    let passed = tally.results.iter().filter(|r| r.1).count();
    println!("acceptance: {passed}/{} criteria passed", tally.results.len());
    if passed != tally.results.len() {
        std::process::exit(1);
    }
}
