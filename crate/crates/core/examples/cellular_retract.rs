// A retract of a free algebra over Q, descended to the least Z[1/S] where
// its idempotent splits.

use dgforge::cellular::{verify_retract, CellMorphism, CellPresentation, NcPoly, RetractWitness};
use dgforge::descent::{descend_idempotent_and_split, Tower};
use dgforge::rings::{frac, int, CoefficientRing};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let q = CoefficientRing::Rationals;
    // A = Q<x> inside B = Q<x, y>, with i(x) = x/3 + y/3 and r(y) = 2x
    let target = CellPresentation::from_named(q.clone(), &[("x", 0, vec![])])?;
    let ambient = CellPresentation::from_named(q, &[("x", 0, vec![]), ("y", 0, vec![])])?;
    let section = CellMorphism {
        images: vec![NcPoly::from_terms([(frac(1, 3), vec![0]), (frac(1, 3), vec![1])])],
    };
    let retraction = CellMorphism { images: vec![NcPoly::generator(0), NcPoly::term(int(2), vec![0])] };
    let w = RetractWitness { target, ambient, section, retraction };
    assert!(verify_retract(&w)?);

    let d = descend_idempotent_and_split(&w, 3, &Tower::default())?;
    d.verify_against_witness()?;
    println!("split over {} in weights up to {}", d.stage, d.weight);
    assert_eq!(d.stage, CoefficientRing::localized([3])?);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("cellular_retract");
}
