use atomwork::logic::{ef_equivalent, holds, random_sentence, relabel};
use atomwork::{build_z, AtomLabel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn z1_against_z2() {
    let (z1, z2) = (build_z(1), build_z(2));
    assert!(ef_equivalent(&z1, &z1, 4).unwrap().equivalent);
    let r = ef_equivalent(&z1, &z2, 4).unwrap();
    assert!(!r.equivalent);
    let k = r.distinguishing_depth.unwrap();
    assert!(k <= 4);
    assert_eq!(ef_equivalent(&z2, &z1, 4).unwrap(), r);

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let s = random_sentence(k - 1, &mut rng);
        assert_eq!(holds(&z1, &s).unwrap(), holds(&z2, &s).unwrap(), "{s}");
    }
}

#[test]
fn relabeled_z2_is_equivalent_at_depth_four() {
    let z2 = build_z(2);
    let renamed = relabel(&z2, |a| {
        AtomLabel::opaque(format!("t{}", a.to_string().chars().rev().collect::<String>()))
    })
    .unwrap();
    assert!(ef_equivalent(&z2, &renamed, 4).unwrap().equivalent);
}
