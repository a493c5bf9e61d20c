// Find the least localization Z[1/S] over which a rational algebra is defined,
// then the stage where its cohomology agrees with the rational one.

use dgforge::descent::{descend_properness, ring_of_definition, Tower};
use dgforge::random::{planted_factor, product};
use dgforge::rings::{CoefficientRing, ExactData, RingMap};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    // Q[x]/(x² - x/2) × Q[x]/(x² - x/5)
    let a = product(&[planted_factor(2)?, planted_factor(5)?])?;
    let d = ring_of_definition(&a)?;
    d.verify()?;
    println!("defined over {}", d.stage);
    assert_eq!(d.stage, CoefficientRing::localized([2, 5])?);
    assert_eq!(d.model.base_change(&RingMap::to_rationals(&d.stage)?)?, a);

    let report = descend_properness(&d, &Tower::default())?;
    println!("cohomology agrees with Q over {}", report.agreeing_stage);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("ring_of_definition");
}
