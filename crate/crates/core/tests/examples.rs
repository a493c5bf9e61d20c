mod exact_rings {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/exact_rings.rs"));
}

#[test]
fn exact_rings_runs() {
    exact_rings::run_example().expect("exact_rings example should run");
}

mod karoubi_split {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/karoubi_split.rs"));
}

#[test]
fn karoubi_split_runs() {
    karoubi_split::run_example().expect("karoubi_split example should run");
}

mod ladder_rectify {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/ladder_rectify.rs"));
}

#[test]
fn ladder_rectify_runs() {
    ladder_rectify::run_example().expect("ladder_rectify example should run");
}

mod smooth_certificates {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/smooth_certificates.rs"));
}

#[test]
fn smooth_certificates_runs() {
    smooth_certificates::run_example().expect("smooth_certificates example should run");
}

mod perfect_promotion {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/perfect_promotion.rs"));
}

#[test]
fn perfect_promotion_runs() {
    perfect_promotion::run_example().expect("perfect_promotion example should run");
}

mod cellular_retract {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/cellular_retract.rs"));
}

#[test]
fn cellular_retract_runs() {
    cellular_retract::run_example().expect("cellular_retract example should run");
}

mod ring_of_definition {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/ring_of_definition.rs"));
}

#[test]
fn ring_of_definition_runs() {
    ring_of_definition::run_example().expect("ring_of_definition example should run");
}

mod quasi_iso_descent {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/quasi_iso_descent.rs"));
}

#[test]
fn quasi_iso_descent_runs() {
    quasi_iso_descent::run_example().expect("quasi_iso_descent example should run");
}

mod cli_roundtrip {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/cli_roundtrip.rs"));
}

#[test]
fn cli_roundtrip_runs() {
    cli_roundtrip::run_example().expect("cli_roundtrip example should run");
}
