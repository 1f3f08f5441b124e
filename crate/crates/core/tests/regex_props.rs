mod common;

use common::{all_words, random_regex};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use recap_core::oracle::{ast_matches, count_runs};
use recap_core::regex::{compile_regex, parse_regex};

const ALPHABET: [&str; 3] = ["a", "b", "c"];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn table_agrees_with_syntax_tree(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ast = random_regex(&mut rng, &ALPHABET, 4);
        let src = ast.to_string();
        let table = compile_regex(&src).unwrap();
        prop_assert_eq!(parse_regex(&src).unwrap(), ast.clone());
        for w in all_words(&ALPHABET, 5) {
            prop_assert_eq!(table.accepts(&w), ast_matches(&ast, &w), "{} on {:?}", src, w);
            prop_assert_eq!(table.accepts(&w), count_runs(&table, &w) > 0);
        }
        prop_assert_eq!(table.accepts_empty(), ast_matches(&ast, &[] as &[&str]));
    }

    #[test]
    fn table_rows_are_well_formed(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let table = compile_regex(&random_regex(&mut rng, &ALPHABET, 4).to_string()).unwrap();
        let mut incoming = std::collections::BTreeMap::new();
        let mut pairs = std::collections::BTreeSet::new();
        for row in table.rows() {
            prop_assert!(row.from_state >= 1 && row.to_state <= table.state_count());
            prop_assert_ne!(row.to_state, table.q0());
            prop_assert!(pairs.insert((row.from_state, row.to_state)));
            let first = incoming.entry(row.to_state).or_insert_with(|| row.label.clone());
            prop_assert_eq!(&*first, &row.label);
        }
    }
}
