// Smoothness certificates from the bar resolution.

use dgforge::dga::DgAlgebra;
use dgforge::rings::CoefficientRing;
use dgforge::smooth::{check_smooth, SmoothOutcome};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let q = CoefficientRing::Rationals;
    let algebras = [
        ("Q", DgAlgebra::ground(q.clone())),
        ("M_2(Q)", DgAlgebra::matrix_algebra(q.clone(), 2)),
        ("upper triangular 2x2", DgAlgebra::upper_triangular(q.clone(), 2)),
        ("Q[x]/x^2", DgAlgebra::truncated_polynomial(q.clone(), 2)),
    ];
    for (name, a) in algebras {
        match check_smooth(&a, 4)? {
            SmoothOutcome::Smooth(c) => {
                c.verify()?;
                println!("{name}: smooth, diagonal bimodule has a resolution of length {}", c.length);
            }
            SmoothOutcome::NotSmooth(c) => {
                c.verify()?;
                println!("{name}: not smooth, syzygies {} and {} are isomorphic", c.period.0, c.period.1);
            }
            SmoothOutcome::Unknown { depth_exhausted } => println!("{name}: undecided at depth {depth_exhausted}"),
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("smooth_certificates");
}
