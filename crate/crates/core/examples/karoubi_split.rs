// Split a homotopy idempotent through its mapping telescope.

use dgforge::complexes::cohomology;
use dgforge::karoubi::{telescope_split, verify_idempotent};
use dgforge::random::{random_idempotent, seeded};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = seeded(5);
    let planted = random_idempotent(&mut rng)?;
    let p = &planted.idempotent;
    assert!(verify_idempotent(p)?);
    println!("B has ranks {:?} from degree {}", p.complex().ranks(), p.complex().lo());

    let cert = telescope_split(p)?;
    cert.verify()?;
    assert!(cert.cohomology_identities()?);
    println!("A has ranks {:?} from degree {}", cert.a.ranks(), cert.a.lo());
    print!("{}", cohomology(&cert.a)?);
    for (n, kept) in &planted.kept_points {
        assert_eq!(cohomology(&cert.a)?.betti(*n), *kept);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("karoubi_split");
}
