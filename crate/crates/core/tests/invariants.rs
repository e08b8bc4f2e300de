use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use program_adverbs::func::stdlib::{first, pair, second};
use program_adverbs::haxl::{parse_program, print_program, Analyzer, FetchLang};
use program_adverbs::semantics::{oracle_refines, trace_sem, Env, OutcomeModel};
use program_adverbs::theory::gen::{oracle_agrees, random_derivation, random_term};
use program_adverbs::theory::{check_derivation, Theory, TheoryId};
use program_adverbs::{Continuation, Term, Value};

fn fetch_term(rng: &mut ChaCha8Rng, lang: &FetchLang, depth: u32, batched_ops: bool) -> Term {
    let v = lang.vocab();
    let nat = lang.value_type();
    if depth == 0 || rng.gen_ratio(1, 4) {
        return match rng.gen_range(0..3) {
            0 => lang.get("x").unwrap(),
            1 => lang.get("y").unwrap(),
            _ => v.pure(nat, Value::Nat(rng.gen_range(0..8))).unwrap(),
        };
    }
    let a = fetch_term(rng, lang, depth - 1, batched_ops);
    let b = fetch_term(rng, lang, depth - 1, batched_ops);
    if batched_ops && rng.gen() {
        let f = if rng.gen() { first(nat, nat) } else { second(nat, nat) };
        v.lift_a2(&f, &a, &b).unwrap()
    } else {
        v.bind(&a, Continuation::constant(nat, &b), nat).unwrap()
    }
}

fn db() -> Env {
    [("x".to_string(), Value::Nat(3)), ("y".to_string(), Value::Nat(5))].into()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn accepted_derivations_are_sound(seed: u64, which in 0usize..5, steps in 1usize..6) {
        let id = [
            TheoryId::Statically,
            TheoryId::StaticallyInParallel,
            TheoryId::Dynamically,
            TheoryId::Nondeterministically,
            TheoryId::Repeatedly,
        ][which];
        let d = random_derivation(&mut ChaCha8Rng::seed_from_u64(seed), id, steps);
        prop_assert!(check_derivation(&Theory::of(&[id]), &d).is_accepted());
        prop_assert!(oracle_agrees(id, &d).unwrap());
    }

    #[test]
    fn batching_never_costs_more_rounds(seed: u64) {
        let lang = FetchLang::new(&["x", "y"]);
        let t = fetch_term(&mut ChaCha8Rng::seed_from_u64(seed), &lang, 4, true);
        let batched = Analyzer::new(&lang).analyze(&t, &db()).unwrap();
        let sequential = Analyzer::sequential(&lang).analyze(&t, &db()).unwrap();
        prop_assert!(batched.rounds <= sequential.rounds);
        prop_assert_eq!(batched.requests, sequential.requests);
        prop_assert_eq!(batched.value, sequential.value);
        // a round issues at least one request
        prop_assert!(batched.rounds <= batched.requests);
    }

    #[test]
    fn fetch_programs_round_trip(seed: u64) {
        let lang = FetchLang::new(&["x", "y"]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = (fetch_term(&mut rng, &lang, 3, false), fetch_term(&mut rng, &lang, 3, false));
        let nat = lang.value_type();
        let t = lang.vocab().lift_a2(&pair(nat, nat), &a, &b).unwrap();
        let text = print_program(&lang, &t);
        let (lang2, back) = parse_program(&text).unwrap();
        prop_assert_eq!(lang2.keys(), lang.keys());
        prop_assert_eq!(print_program(&lang2, &back), text);
    }

    #[test]
    fn choice_is_union_and_refined_by_either_side(seed: u64) {
        let id = TheoryId::Nondeterministically;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = (random_term(&mut rng, id, 2), random_term(&mut rng, id, 2));
        let v = program_adverbs::theory::gen::vocabulary(id);
        let m = OutcomeModel::fresh();
        let ab = v.plus(&a, &b).unwrap();
        let sem = |t: &Term| trace_sem(t, &m, 2).unwrap();
        prop_assert_eq!(sem(&ab), sem(&a).union(&sem(&b)));
        prop_assert!(oracle_refines(&a, &ab, &m, 2, 2).unwrap());
        prop_assert!(oracle_refines(&b, &ab, &m, 2, 2).unwrap());
    }
}
