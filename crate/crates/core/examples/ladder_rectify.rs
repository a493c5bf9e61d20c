// Turn a homotopy-commutative ladder of chain maps into a strictly
// commutative one.

use dgforge::karoubi::rectify_ladder;
use dgforge::random::{random_ladder_map, seeded};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let l = random_ladder_map(&mut seeded(5), 4)?;
    let r = rectify_ladder(&l)?;
    r.verify(&l)?;
    for n in 0..l.squares.len() {
        let lhs = l.dst.maps[n].compose(&r.maps[n])?;
        let rhs = r.maps[n + 1].compose(&l.src.maps[n])?;
        assert_eq!(lhs, rhs);
        println!("square {n} commutes on the nose, stage ranks {:?}", l.src.objects[n].ranks());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("ladder_rectify");
}
