use proptest::prelude::*;

use dgforge::complexes::{cohomology, cone, induced_map, is_quasi_iso, Complex};
use dgforge::format::{read_object, scalar_paths, write_object, Object, ObjectFile};
use dgforge::karoubi::telescope_split;
use dgforge::random::*;
use dgforge::rings::{CoefficientRing, ExactData, RingMap};

fn integral_complex(seed: u64) -> Complex {
    let mut rng = seeded(seed);
    let pieces = random_pieces(&mut rng, -1, 4, 2, &[]);
    let c = piece_complex(&CoefficientRing::Integers, &pieces).unwrap();
    conjugate(&mut rng, &c, &[]).unwrap().complex
}

fn euler(c: &Complex, f: impl Fn(i64) -> usize) -> i64 {
    c.degrees().map(|n| if n.rem_euclid(2) == 0 { f(n) as i64 } else { -(f(n) as i64) }).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn files_round_trip_byte_for_byte(seed in any::<u64>()) {
        let o = Object::Complex(integral_complex(seed));
        let text = write_object(&o);
        let back = read_object(&text).unwrap();
        prop_assert_eq!(&back, &o);
        prop_assert_eq!(write_object(&back), text);
    }

    #[test]
    fn any_scalar_edit_breaks_the_seal(seed in any::<u64>(), pick in any::<prop::sample::Index>(), delta in 1i64..5) {
        let text = write_object(&Object::Complex(integral_complex(seed)));
        let mut f = ObjectFile::parse(&text).unwrap();
        let paths = scalar_paths(&f.payload);
        prop_assume!(!paths.is_empty());
        let path = pick.get(&paths);
        let slot = f.payload.pointer_mut(path).unwrap();
        let x: i64 = slot.as_str().unwrap().parse().unwrap();
        *slot = serde_json::Value::String((x + delta).to_string());
        prop_assert!(!f.seal_ok());
    }

    #[test]
    fn base_change_composes(seed in any::<u64>()) {
        let c = integral_complex(seed);
        let z = CoefficientRing::Integers;
        let half = CoefficientRing::localized([2]).unwrap();
        let sixth = CoefficientRing::localized([2, 3]).unwrap();
        let q = CoefficientRing::Rationals;
        let f5 = CoefficientRing::prime_field(5).unwrap();
        let via = |rings: &[&CoefficientRing]| {
            rings.windows(2).try_fold(c.clone(), |x, w| x.base_change(&RingMap::new(w[0].clone(), w[1].clone())?))
        };
        prop_assert_eq!(via(&[&z, &half, &sixth, &q]).unwrap(), via(&[&z, &q]).unwrap());
        prop_assert_eq!(via(&[&z, &sixth, &f5]).unwrap(), via(&[&z, &f5]).unwrap());
        prop_assert!(RingMap::new(q.clone(), z.clone()).is_err());
        prop_assert!(RingMap::new(half, CoefficientRing::prime_field(2).unwrap()).is_err());
    }

    #[test]
    fn euler_characteristic_is_invariant(seed in any::<u64>()) {
        let c = integral_complex(seed);
        let h = cohomology(&c).unwrap();
        prop_assert_eq!(euler(&c, |n| c.rank(n)), euler(&c, |n| h.betti(n)));
        let cq = c.base_change(&RingMap::to_rationals(c.ring()).unwrap()).unwrap();
        let hq = cohomology(&cq).unwrap();
        for n in c.degrees() {
            prop_assert_eq!(h.betti(n), hq.betti(n));
        }
    }

    #[test]
    fn homotopic_maps_agree_on_cohomology(seed in any::<u64>()) {
        let (f, g, h) = random_homotopic_pair(&mut seeded(seed)).unwrap();
        prop_assert!(h.check().is_ok());
        for n in f.src().degrees() {
            prop_assert_eq!(induced_map(&f, n).unwrap(), induced_map(&g, n).unwrap());
        }
    }

    #[test]
    fn quasi_isos_have_acyclic_cones(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let planted = random_quasi_iso(&mut rng).unwrap();
        let f = planted.map.base_change(&RingMap::to_rationals(planted.map.src().ring()).unwrap()).unwrap();
        prop_assert!(is_quasi_iso(&f).unwrap());
        let c = cone(&f).unwrap();
        let h = cohomology(&c).unwrap();
        prop_assert!(c.degrees().all(|n| h.betti(n) == 0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn telescope_certificates_verify(seed in any::<u64>()) {
        let planted = random_idempotent(&mut seeded(seed)).unwrap();
        let cert = telescope_split(&planted.idempotent).unwrap();
        prop_assert!(cert.verify().is_ok());
        for n in cert.a.degrees() {
            let kept = planted.kept_points.get(&n).copied().unwrap_or(0);
            prop_assert_eq!(cohomology(&cert.a).unwrap().betti(n), kept);
        }
    }

    #[test]
    fn planted_primes_are_recovered(seed in any::<u64>()) {
        let (a, planted) = random_planted_algebra(&mut seeded(seed)).unwrap();
        let d = dgforge::descent::ring_of_definition(&a).unwrap();
        let expected = CoefficientRing::localized(planted).unwrap();
        prop_assert_eq!(d.stage, expected);
    }
}
