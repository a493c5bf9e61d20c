// A module with finite-dimensional cohomology over a smooth algebra is perfect:
// build it from free modules by cones, shifts and a retract.

use dgforge::dga::{module_map_defect, DgAlgebra, DgModule};
use dgforge::perfect::perfect_from_smooth;
use dgforge::rings::CoefficientRing;
use dgforge::smooth::{check_smooth, SmoothOutcome};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let q = CoefficientRing::Rationals;
    let a = DgAlgebra::upper_triangular(q.clone(), 2);
    let SmoothOutcome::Smooth(cert) = check_smooth(&a, 2)? else {
        return Err("expected a smooth algebra".into());
    };
    let simple = DgModule::simple_upper_triangular(q, 2, 1);
    let p = perfect_from_smooth(&cert, &simple)?;
    p.verify()?;
    let built = p.replay()?;
    assert!(module_map_defect(&built, &simple, &p.quasi_iso).is_none());
    println!("{} build steps:", p.builder.len());
    for step in &p.builder {
        println!("  {step:?}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("perfect_promotion");
}
