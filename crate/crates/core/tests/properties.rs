use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use stmtevo::evolast::{apply_rewrite, enumerate_expr_sites, enumerate_sites, equiv_oracle, statement_prop, OracleError, RuleId};
use stmtevo::statement::{canonicalize, parse_file, print_file, print_file_with, SymbolStyle};
use stmtevo::synth::{alpha_rename, audit_rewrite, perturb, random_file_text, random_prop, respell};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn every_expression_site_is_sound(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = random_prop(&mut rng, 5, 4, 3);
        for site in enumerate_expr_sites(&e) {
            if let Err(msg) = audit_rewrite(&e, &site) {
                return Err(TestCaseError::fail(msg));
            }
        }
    }

    #[test]
    fn statement_rewrites_preserve_the_folded_prop(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = parse_file(&random_file_text(&mut rng)).unwrap();
        let before = statement_prop(&f);
        for site in enumerate_sites(&f) {
            let g = apply_rewrite(&f, &site).unwrap();
            prop_assert_eq!(g.binder_names().len(), f.binder_names().len());
            if site.rule == RuleId::HypReorder {
                // swapping premises is propositional, so two integer values suffice
                match equiv_oracle(&before, &statement_prop(&g), 0..=1) {
                    Ok(same) => prop_assert!(same),
                    Err(OracleError::OracleTooLarge { .. }) => {}
                }
            }
        }
    }

    #[test]
    fn print_parse_fixed_point(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let text = random_file_text(&mut rng);
        let f = parse_file(&text).unwrap();
        for style in [SymbolStyle::Ascii, SymbolStyle::Unicode] {
            let printed = print_file_with(&f, style);
            let g = parse_file(&printed).unwrap();
            prop_assert_eq!(&g, &f, "{}", printed);
            prop_assert_eq!(print_file_with(&g, style), printed);
        }
    }

    #[test]
    fn canonical_key_classes(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let text = random_file_text(&mut rng);
        let f = parse_file(&text).unwrap();
        let key = canonicalize(&f);
        let spelled = parse_file(&respell(&text, &mut rng)).unwrap();
        prop_assert_eq!(canonicalize(&spelled), key.clone());
        prop_assert_eq!(canonicalize(&alpha_rename(&f)), key.clone());
        prop_assert_ne!(canonicalize(&perturb(&f)), key);
        prop_assert_eq!(canonicalize(&parse_file(&print_file(&f)).unwrap()), canonicalize(&f));
    }
}
