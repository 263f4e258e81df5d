mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sparsec_core::parse_kernel;

proptest! {
    #[test]
    fn print_then_parse_is_identity(seed in any::<u64>()) {
        let text = common::random_text(&mut ChaCha8Rng::seed_from_u64(seed));
        let k = parse_kernel(&text).unwrap();
        let printed = k.to_string();
        prop_assert_eq!(parse_kernel(&printed).unwrap(), k, "{}", printed);
    }
}

#[test]
fn printing_is_canonical() {
    let k = parse_kernel("tensor A(3,4) format(dense,compressed)\ntensor x(3)\nx(i)=A(i,j)*(2+-1)")
        .unwrap();
    let once = k.to_string();
    assert_eq!(parse_kernel(&once).unwrap().to_string(), once);
}
