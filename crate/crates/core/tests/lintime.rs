use mucheck::checker::mpm_check;
use mucheck::gen::{linear_corpus, random_nondet, LINEAR_FORMULAS};
use mucheck::lintime::{decide_existential, verify_ltmc, LassoOracle, LinearProblem};
use mucheck::logic::parse_formula;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn problems() -> Vec<LinearProblem> {
    let c = &linear_corpus()[0];
    LINEAR_FORMULAS
        .iter()
        .map(|(_, f)| LinearProblem::from_formula(c.functor.clone(), &parse_formula(f, &c.functor).unwrap()).unwrap())
        .collect()
}

#[test]
fn corpus_agrees_with_lassos() {
    for p in &problems() {
        let mut oracle = LassoOracle::new(p);
        for c in &linear_corpus() {
            let alpha = (c.n() * p.m()) as u32;
            for x in 0..c.n() {
                let run = decide_existential(p, c, x, alpha);
                assert_eq!(run.holds, oracle.search(c, x, 8, 8).is_some(), "{} at x{x} of {:?}", p.source, c.step);
                if let Some(w) = &run.witness {
                    assert_eq!(verify_ltmc(p, c, w), Ok(()));
                    assert!(oracle.holds(&w.lasso(0)));
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn deterministic_systems_match_branching_time(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let c = random_nondet(&mut rng, 3, 1);
        let det = c.to_deterministic().unwrap();
        for p in &problems() {
            let sat = mpm_check(&p.on(det.clone())).satisfying;
            for x in 0..c.n() {
                let run = decide_existential(p, &c, x, (c.n() * p.m()) as u32);
                prop_assert_eq!(run.holds, sat.contains(x));
            }
        }
    }
}
