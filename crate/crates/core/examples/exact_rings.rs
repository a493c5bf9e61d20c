// Cohomology of `Z --2--> Z` over Z, Z[1/2], Q and F_2.

use dgforge::complexes::{cohomology, Complex};
use dgforge::linalg::Matrix;
use dgforge::rings::{CoefficientRing, ExactData, RingMap};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let z = CoefficientRing::Integers;
    let c = Complex::new(z.clone(), 0, vec![1, 1], vec![Matrix::from_ints(1, 1, &[2])])?;
    let h = cohomology(&c)?;
    print!("{h}");
    assert_eq!(h.torsion_primes(), vec![2]);

    for target in [
        CoefficientRing::localized([2])?,
        CoefficientRing::Rationals,
        CoefficientRing::prime_field(2)?,
    ] {
        let moved = c.base_change(&RingMap::new(z.clone(), target.clone())?)?;
        let h = cohomology(&moved)?;
        print!("{h}");
        let expected = if target == CoefficientRing::prime_field(2)? { 1 } else { 0 };
        assert_eq!(h.betti(0), expected);
    }

    // Q does not map to Z, and Z[1/2] does not map to F_2.
    assert!(RingMap::new(CoefficientRing::Rationals, z).is_err());
    assert!(RingMap::new(CoefficientRing::localized([2])?, CoefficientRing::prime_field(2)?).is_err());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("exact_rings");
}
