// Multiplication by 2/3 on Q is a quasi-isomorphism. It is defined over
// Z[1/3] and becomes invertible over Z[1/2, 1/3].

use dgforge::complexes::{ChainMap, Complex};
use dgforge::descent::{descend_quasi_iso, ring_of_definition, Tower};
use dgforge::linalg::Matrix;
use dgforge::rings::{frac, CoefficientRing};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let q = CoefficientRing::Rationals;
    let x = Complex::concentrated(q, 0, 1);
    let f = ChainMap::new(&x, &x, [(0, Matrix::scalar_identity(1, &frac(2, 3)))].into())?;
    let src = ring_of_definition(&x)?;
    let d = descend_quasi_iso(&f, &src, &src, &Tower::default())?;
    d.verify()?;
    println!("quasi-isomorphism over {}", d.stage());
    assert_eq!(d.stage(), &CoefficientRing::localized([2, 3])?);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("quasi_iso_descent");
}
