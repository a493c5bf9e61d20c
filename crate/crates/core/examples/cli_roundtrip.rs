// Drive the command line through files: write an algebra, certify it,
// verify the certificate and tamper with it.

use dgforge::cli::run_captured;
use dgforge::dga::DgAlgebra;
use dgforge::format::{scalar_paths, write_object, Object, ObjectFile};
use dgforge::rings::CoefficientRing;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join(format!("dgforge-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let input = dir.join("a2.json");
    let cert = dir.join("a2.smooth.json");
    std::fs::write(&input, write_object(&Object::DgAlgebra(DgAlgebra::upper_triangular(CoefficientRing::Rationals, 2))))?;
    let (input_s, cert_s) = (input.to_str().unwrap(), cert.to_str().unwrap());

    let (code, report) = run_captured(["dgforge", "check-smooth", input_s, "--out", cert_s]);
    println!("{report}");
    assert_eq!(code, 0);
    let (code, report) = run_captured(["dgforge", "verify", cert_s]);
    println!("{report}");
    assert_eq!(code, 0);

    let mut file = ObjectFile::parse(&std::fs::read_to_string(&cert)?)?;
    let first = scalar_paths(&file.payload).remove(0);
    *file.payload.pointer_mut(&first).unwrap() = "7".into();
    std::fs::write(&cert, file.to_text())?;
    let (code, report) = run_captured(["dgforge", "verify", cert_s]);
    println!("{report}");
    assert_eq!(code, 1);
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("cli_roundtrip");
}
