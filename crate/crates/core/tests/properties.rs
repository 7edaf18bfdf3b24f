mod common;

use proptest::prelude::*;

use common::{FormulaGen, Reference};
use soplog::eval::{eval, EvalConfig, Strategy, Valuation};
use soplog::formula::{classify, parse, pretty, to_snf, FragmentLabel};
use soplog::macros::{decode_number, encode_number, width};
use soplog::ratm::{accepts, polylogcnfsat_budget, polylogcnfsat_machine, Cnf};
use soplog::structure::{parse_structure, write_structure, Interpretation, Structure, Vocabulary};

fn unary(n: usize, mask: u32) -> Structure {
    let vocab = Vocabulary::new().with_relation("R", 1).unwrap();
    let r: Vec<Vec<usize>> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| vec![i]).collect();
    Structure::new(vocab, n, Interpretation::new().relation("R", r)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn pretty_output_parses_back(seed in any::<u64>(), depth in 0usize..=4) {
        let f = FormulaGen::new(seed).sentence(depth);
        let text = pretty(&f);
        prop_assert_eq!(parse(&text).map_err(|e| e.to_string()), Ok(f), "{}", text);
    }

    #[test]
    fn strategies_agree_with_reference(seed in any::<u64>(), n in 2usize..=4, mask in any::<u32>()) {
        let f = FormulaGen::new(seed).sentence(4);
        let s = unary(n, mask);
        let expected = Reference::new(&s).holds(&f);
        for strategy in [Strategy::Enumerate, Strategy::Ground, Strategy::Auto] {
            let cfg = EvalConfig { strategy, ..EvalConfig::default() };
            prop_assert_eq!(eval(&s, &Valuation::new(), &f, &cfg), Ok(expected), "{:?} on {:?}", strategy, f);
        }
    }

    #[test]
    fn normal_form_is_stable(seed in any::<u64>(), n in 2usize..=3, mask in any::<u32>()) {
        let f = FormulaGen::new(seed).sentence(4);
        let g = to_snf(&f);
        prop_assert_ne!(classify(&g), FragmentLabel::NotSnf);
        let h = to_snf(&g);
        prop_assert_eq!(classify(&h), classify(&g));
        let s = unary(n, mask);
        let cfg = EvalConfig::default();
        prop_assert_eq!(eval(&s, &Valuation::new(), &h, &cfg), eval(&s, &Valuation::new(), &f, &cfg));
    }

    #[test]
    fn numbers_round_trip(n in 2usize..=16, k in 1usize..=2, raw in any::<u64>()) {
        let bits = width(n, k);
        let value = (raw as u128) & ((1u128 << bits) - 1);
        let rel = encode_number(n, k, value).unwrap();
        prop_assert_eq!(rel.len(), bits);
        prop_assert_eq!(decode_number(&rel, n, k), Ok(value));
        prop_assert!(encode_number(n, k, 1u128 << bits).is_err());
    }

    #[test]
    fn structure_files_round_trip(n in 2usize..=6, edges in proptest::collection::btree_set((0usize..6, 0usize..6), 0..12), c in 0usize..6) {
        let vocab = Vocabulary::new().with_relation("E", 2).unwrap().with_constant("c").unwrap();
        let e: Vec<Vec<usize>> = edges.into_iter().filter(|&(a, b)| a < n && b < n).map(|(a, b)| vec![a, b]).collect();
        let s = Structure::new(vocab, n, Interpretation::new().relation("E", e).constant("c", c % n)).unwrap();
        prop_assert_eq!(parse_structure(&write_structure(&s)), Ok(s));
    }

    #[test]
    fn cnf_machine_matches_brute_force(clauses in proptest::collection::vec(proptest::collection::vec((1i64..=4, any::<bool>()), 1..=3), 1..=3)) {
        let clauses: Vec<Vec<i64>> = clauses.into_iter().map(|c| c.into_iter().map(|(v, neg)| if neg { -v } else { v }).collect()).collect();
        let cnf = Cnf::new(clauses);
        let input = cnf.encode().unwrap();
        let m = polylogcnfsat_machine(1).unwrap();
        prop_assert_eq!(accepts(&m, &input, polylogcnfsat_budget(input.len(), 1)), cnf.brute_force_sat(), "{}", cnf);
    }
}
