//! Acceptance suite: one PASS/FAIL line per criterion.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use program_adverbs::circuit::{
    app_depth, app_num_var, check_properties, embed_reified, parse_circuit, random_reified_term, Circuit, CircuitLang,
};
use program_adverbs::func::stdlib::{first, second};
use program_adverbs::haxl::{self, Analyzer, FetchLang};
use program_adverbs::netsim::{parse_program, verify_chain, IMPL_LISTING, SPEC_LISTING};
use program_adverbs::report::Status;
use program_adverbs::semantics::{associativity_counterexample, powerset_interpret, update, Env, OutcomeModel, TraceSet};
use program_adverbs::theory::gen::{oracle_agrees, random_bool_fn, random_derivation, random_term};
use program_adverbs::theory::{check_derivation, Theory, TheoryId};
use program_adverbs::{Continuation, EffectOp, EffectSig, FiniteType, FnRef, Func, Term, Value};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    ensure(start.elapsed() < limit, || format!("took {:?}, limit {limit:?}", start.elapsed()))
}

/// Random reified terms, depth 0..=8, checked for `numVar <= 2^depth`.
fn random_height_and_var(samples: usize) -> Result<(), String> {
    let lang = CircuitLang::new(&["x", "y", "z"]);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for i in 0..samples {
        let t = random_reified_term(&mut rng, &lang, (i % 9) as u32);
        let (d, n) = (app_depth(&t).map_err(|e| e.to_string())?, app_num_var(&t).map_err(|e| e.to_string())?);
        ensure(u64::from(n) <= 1u64 << d, || format!("violation: {t} has numVar {n}, depth {d}"))?;
    }
    Ok(())
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let c = parse_circuit("x & true").map_err(|e| e.to_string())?;
    let found = check_properties(&c, 4).map_err(|e| e.to_string())?;
    let get = |n: &str| found.iter().find(|f| f.name == n).ok_or(format!("missing finding {n}"));
    for id in TheoryId::ALL {
        let f = get(&format!("1/{}", id.name()))?;
        ensure(f.status == Status::Unknown, || format!("{f} should be UNKNOWN"))?;
    }
    let f = get("1/oracle")?;
    ensure(f.status == Status::Refuted && f.witness.is_some(), || format!("{f} should be REFUTED with witness"))?;
    let f = get("2/statically")?;
    ensure(f.status == Status::Proved, || format!("{f}"))?;
    ensure(f.witness.as_deref().is_some_and(|w| w.contains("RightIdentity")), || format!("{f} not via RightIdentity"))?;
    ensure(get("3/statically")?.status == Status::Unknown, || "3/statically should be UNKNOWN".into())?;
    ensure(get("3/statically-in-parallel")?.status == Status::Proved, || "3/parallel should be PROVED".into())?;
    random_height_and_var(10_000)?;
    within(Duration::from_secs(60), start)?;
    Ok(format!("properties (1)-(3) as expected, (4) on 10000 random terms, {:?}", start.elapsed()))
}

/// Circuits of depth <= `max_depth`, grouped by (depth, app_depth,
/// app_numVar) with exact counts. Each class's analysis is computed on a
/// real representative; both analyses are folds, so a composite's class is
/// determined by its operator and its operands' classes.
fn circuit_classes(vars: &[&str], max_depth: u32) -> Result<BTreeMap<(u32, u32, u32), (Circuit, u128)>, String> {
    let lang = CircuitLang::new(vars);
    let key = |c: &Circuit| -> Result<(u32, u32, u32), String> {
        let t = embed_reified(&lang, c);
        Ok((c.depth(), app_depth(&t).map_err(|e| e.to_string())?, app_num_var(&t).map_err(|e| e.to_string())?))
    };
    let mut level: BTreeMap<(u32, u32, u32), (Circuit, u128)> = BTreeMap::new();
    let add = |level: &mut BTreeMap<_, (Circuit, u128)>, c: Circuit, n: u128| -> Result<(), String> {
        let k = key(&c)?;
        level.entry(k).or_insert((c, 0)).1 += n;
        Ok(())
    };
    for leaf in [Circuit::Lit(false), Circuit::Lit(true)].into_iter().chain(vars.iter().map(|x| Circuit::var(x))) {
        add(&mut level, leaf, 1)?;
    }
    for _ in 0..max_depth {
        let prev: Vec<(Circuit, u128)> = level.values().cloned().collect();
        let mut next = BTreeMap::new();
        for leaf in [Circuit::Lit(false), Circuit::Lit(true)].into_iter().chain(vars.iter().map(|x| Circuit::var(x))) {
            add(&mut next, leaf, 1)?;
        }
        for (a, na) in &prev {
            add(&mut next, Circuit::neg(a.clone()), *na)?;
            for (b, nb) in &prev {
                add(&mut next, Circuit::and(a.clone(), b.clone()), na * nb)?;
                add(&mut next, Circuit::or(a.clone(), b.clone()), na * nb)?;
            }
        }
        level = next;
    }
    Ok(level)
}

fn all_circuits(vars: &[&str], max_depth: u32) -> Vec<Circuit> {
    let leaves: Vec<Circuit> = [Circuit::Lit(false), Circuit::Lit(true)]
        .into_iter()
        .chain(vars.iter().map(|x| Circuit::var(x)))
        .collect();
    let mut level = leaves.clone();
    for _ in 0..max_depth {
        let mut next = leaves.clone();
        for a in &level {
            next.push(Circuit::neg(a.clone()));
            for b in &level {
                next.push(Circuit::and(a.clone(), b.clone()));
                next.push(Circuit::or(a.clone(), b.clone()));
            }
        }
        level = next;
    }
    level
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    random_height_and_var(10_000)?;
    let vars = ["x", "y", "z"];
    // the class counts agree with brute force where brute force is feasible
    let concrete = all_circuits(&vars, 2);
    let lang = CircuitLang::new(&vars);
    let mut counted: BTreeMap<(u32, u32, u32), u128> = BTreeMap::new();
    for c in &concrete {
        let t = embed_reified(&lang, c);
        let (d, n) = (app_depth(&t).unwrap(), app_num_var(&t).unwrap());
        ensure(u64::from(n) <= 1u64 << d, || format!("violation at {c}"))?;
        *counted.entry((c.depth(), d, n)).or_default() += 1;
    }
    let classes2: BTreeMap<_, u128> = circuit_classes(&vars, 2)?.into_iter().map(|(k, (_, n))| (k, n)).collect();
    ensure(counted == classes2, || "class counts disagree with enumeration at depth 2".into())?;
    let mut total = 0u128;
    for nv in 1..=3 {
        for ((_, d, n), (rep, count)) in circuit_classes(&vars[..nv], 4)? {
            ensure(u64::from(n) <= 1u64 << d, || format!("violation at {rep}"))?;
            total += count;
        }
    }
    Ok(format!(
        "0 violations on 10000 random terms; {} circuits (depth <= 2) enumerated; {total} circuits (<= 3 vars, depth <= 4) covered by class, {:?}",
        concrete.len(),
        start.elapsed()
    ))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut summary = vec![];
    for id in [
        TheoryId::Statically,
        TheoryId::StaticallyInParallel,
        TheoryId::Dynamically,
        TheoryId::Nondeterministically,
        TheoryId::Repeatedly,
    ] {
        let th = Theory::of(&[id]);
        let mut nontrivial = 0;
        for _ in 0..1000 {
            let d = random_derivation(&mut rng, id, 4);
            ensure(check_derivation(&th, &d).is_accepted(), || format!("{id}: generated derivation rejected"))?;
            let ok = oracle_agrees(id, &d).map_err(|e| e.to_string())?;
            ensure(ok, || format!("{id}: oracle disagrees on {}", d.judgment))?;
            nontrivial += usize::from(d.lhs() != d.rhs());
        }
        summary.push(format!("{id} {nontrivial}/1000 non-trivial"));
    }
    within(Duration::from_secs(300), start)?;
    Ok(format!("{}; {:?}", summary.join(", "), start.elapsed()))
}

/// `f` with `f(a, y) = y` (or `f(y, a) = y` when `left` is false), random elsewhere.
fn identity_at(rng: &mut impl Rng, a: bool, left: bool) -> FnRef {
    let b = FiniteType::bool();
    let mut table = BTreeMap::new();
    for x in [false, true] {
        for y in [false, true] {
            let (p, q) = if left { (x, y) } else { (y, x) };
            let out = if x == a { y } else { rng.gen() };
            table.insert(vec![Value::Bool(p), Value::Bool(q)], Value::Bool(out));
        }
    }
    Func::from_table(if left { "lid" } else { "rid" }, vec![b.clone(), b.clone()], b, table).unwrap()
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let id = TheoryId::StaticallyInParallel;
    let v = program_adverbs::theory::gen::vocabulary(id);
    let b = FiniteType::bool();
    let m = OutcomeModel::fresh();
    let p = |t: &Term| -> Result<TraceSet, String> { powerset_interpret(t, &m, 1).map_err(|e| e.to_string()) };
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    // a term with the same powerset meaning as `t`
    let variant = |rng: &mut ChaCha8Rng, t: &Term| -> Term {
        match t.node() {
            program_adverbs::Node::LiftA2 { f, left, right } if rng.gen() => {
                v.lift_a2(&Func::flip(f).unwrap(), right, left).unwrap()
            }
            _ => {
                let a = rng.gen();
                v.lift_a2(&identity_at(rng, a, true), &v.pure(&b, Value::Bool(a)).unwrap(), t).unwrap()
            }
        }
    };
    let n = 500;
    for i in 0..n {
        let (x, y) = (random_term(&mut rng, id, 2), random_term(&mut rng, id, 2));
        // left and right identity
        let a: bool = rng.gen();
        let l = v.lift_a2(&identity_at(&mut rng, a, true), &v.pure(&b, Value::Bool(a)).unwrap(), &x).unwrap();
        ensure(p(&l)? == p(&x)?, || format!("left identity fails at {l}"))?;
        let r = v.lift_a2(&identity_at(&mut rng, a, false), &x, &v.pure(&b, Value::Bool(a)).unwrap()).unwrap();
        ensure(p(&r)? == p(&x)?, || format!("right identity fails at {r}"))?;
        // commutativity
        let f = random_bool_fn(&mut rng, &format!("h{i}"));
        let xy = v.lift_a2(&f, &x, &y).unwrap();
        let yx = v.lift_a2(&Func::flip(&f).unwrap(), &y, &x).unwrap();
        ensure(p(&xy)? == p(&yx)?, || format!("commutativity fails at {xy}"))?;
        // congruence
        let (x2, y2) = (variant(&mut rng, &x), variant(&mut rng, &y));
        ensure(p(&x)? == p(&x2)? && p(&y)? == p(&y2)?, || "premise construction failed".into())?;
        ensure(p(&xy)? == p(&v.lift_a2(&f, &x2, &y2).unwrap())?, || format!("congruence fails at {xy}"))?;
    }
    let assoc_start = Instant::now();
    let cx = associativity_counterexample()
        .map_err(|e| e.to_string())?
        .ok_or("no associativity counterexample")?;
    within(Duration::from_secs(10), assoc_start)?;
    Ok(format!(
        "{n} instances each of identity, commutativity, congruence; associativity fails: {} {} {} only in {}, {:?}",
        cx.left_nested,
        if cx.witness_in_left { "has" } else { "lacks" },
        cx.witness,
        if cx.witness_in_left { "the left grouping" } else { "the right grouping" },
        start.elapsed()
    ))
}

fn random_fetch(rng: &mut ChaCha8Rng, lang: &FetchLang, depth: u32) -> Term {
    let v = lang.vocab();
    let nat = lang.value_type();
    if depth == 0 || rng.gen_ratio(1, 4) {
        return match rng.gen_range(0..3) {
            0 => lang.get("x").unwrap(),
            1 => lang.get("y").unwrap(),
            _ => v.pure(nat, Value::Nat(rng.gen_range(0..8))).unwrap(),
        };
    }
    let (a, b) = (random_fetch(rng, lang, depth - 1), random_fetch(rng, lang, depth - 1));
    match rng.gen_range(0..3) {
        0 => v.lift_a2(&first(nat, nat), &a, &b).unwrap(),
        1 => v.lift_a2(&second(nat, nat), &a, &b).unwrap(),
        _ => v.bind(&a, Continuation::constant(nat, &b), nat).unwrap(),
    }
}

fn criterion_5() -> Outcome {
    let lang = FetchLang::new(&["x", "y"]);
    let analyzer = Analyzer::new(&lang);
    let db: Env = [("x".to_string(), Value::Nat(3)), ("y".to_string(), Value::Nat(5))].into();
    let fixtures = haxl::fixtures(&lang).map_err(|e| e.to_string())?;
    let mut rounds = vec![];
    for (name, t) in &fixtures {
        rounds.push((*name, analyzer.analyze(t, &db).map_err(|e| e.to_string())?.rounds));
    }
    ensure(rounds == [("sequential", 2), ("batched", 1), ("pure", 0)], || format!("rounds {rounds:?}"))?;
    let timer = EffectSig::new("TimerEff", vec![EffectOp::fixed("tick", vec![], FiniteType::unit())]).unwrap();
    let extended = analyzer
        .extend_with_effect(timer, update::constant("TimerEff", Value::Unit, 1))
        .map_err(|e| e.to_string())?;
    ensure(analyzer.cases_preserved_in(&extended), || "existing cases replaced".into())?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut programs: Vec<Term> = fixtures.into_iter().map(|(_, t)| t).collect();
    programs.extend((0..500).map(|_| random_fetch(&mut rng, &lang, 4)));
    let mut diffs = 0;
    for t in &programs {
        let before = analyzer.analyze(t, &db).map_err(|e| e.to_string())?;
        let after = extended.analyze(t, &db).map_err(|e| e.to_string())?;
        diffs += usize::from(before != after);
    }
    ensure(diffs == 0, || format!("{diffs} diffs after extension"))?;
    Ok(format!("rounds {rounds:?}; extension: 0 diffs over {} programs", programs.len()))
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let reports = verify_chain(2, 2, 4).map_err(|e| e.to_string())?;
    for r in &reports[..4] {
        ensure(r.derivation == Status::Proved && r.oracle == Status::Proved, || {
            format!("{}: derivation {}, oracle {}", r.link.name(), r.derivation, r.oracle)
        })?;
    }
    let rev = &reports[4];
    ensure(rev.verdict() == Status::Refuted, || format!("reverse link is {}", rev.verdict()))?;
    let w = rev.witness.clone().ok_or("reverse link has no witness")?;
    within(Duration::from_secs(600), start)?;
    Ok(format!("4 links PROVED by both routes; Spec ⊑ Impl REFUTED by {w}; {:?}", start.elapsed()))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let c = Circuit::random(&mut rng, &["x", "y", "z"], 6);
        let back = parse_circuit(&c.to_string()).map_err(|e| format!("{c}: {e}"))?;
        ensure(back == c, || format!("{c} re-parses as {back}"))?;
    }
    let squash = |s: &str| s.chars().filter(|c| !c.is_whitespace()).collect::<String>();
    for (name, text) in [("Impl", IMPL_LISTING), ("Spec", SPEC_LISTING)] {
        let p = parse_program(text).map_err(|e| format!("{name}: {e}"))?;
        ensure(squash(&p.to_string()) == squash(text), || format!("{name} prints differently:\n{p}"))?;
        ensure(parse_program(&p.to_string()).ok() == Some(p), || format!("{name} does not re-parse"))?;
    }
    Ok("1000 random circuits and both server listings round-trip".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("1 circuit properties", criterion_1),
        ("2 height and var", criterion_2),
        ("3 soundness harness", criterion_3),
        ("4 powerset lemma", criterion_4),
        ("5 fetch costs", criterion_5),
        ("6 server refinement", criterion_6),
        ("7 parser round-trips", criterion_7),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match std::panic::catch_unwind(run) {
            Ok(Ok(msg)) => println!("criterion {name}: PASS ({msg})"),
            Ok(Err(msg)) => {
                failed += 1;
                println!("criterion {name}: FAIL ({msg})");
            }
            Err(_) => {
                failed += 1;
                println!("criterion {name}: FAIL (panicked)");
            }
        }
    }
    println!("acceptance: {} of 7 criteria passed", 7 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
