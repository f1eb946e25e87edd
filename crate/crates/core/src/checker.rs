//! Branching-time model checking: the fixpoint semantics and the matrix
//! progress measure engine with its certificate verifier.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use serde_json::{Map, Value};

use crate::coalgebra::{fmap, lift_proj, Coalgebra, FValue};
use crate::eqsys::{self, EquationalSystem};
use crate::error::{Error, Result};
use crate::lattice::{Elem, Lattice, MonotoneFn};
use crate::logic::{to_equational, to_formula, Conn, Formula, ModalOp, Signature, SimpleEqSystem, SimpleRhs};
use crate::priord::{all_ordinals, eval_prime, max_trunc, min_trunc, Pom, PomRow, PrioritySpec};

/// A closed formula, in equational form, to be checked on a finite coalgebra.
#[derive(Clone, Debug)]
pub struct McProblem {
    pub system: Coalgebra,
    pub formula: SimpleEqSystem,
    /// The formula as a single term, used by the direct semantics.
    pub source: Formula,
    pub spec: PrioritySpec,
}

fn check_ops(f: &Formula, sig: &dyn Signature) -> Result<()> {
    match f {
        Formula::Var(_) => Ok(()),
        Formula::Conn(_, args) => args.iter().try_for_each(|a| check_ops(a, sig)),
        Formula::Modal(op, args) => {
            sig.check_op(op).map_err(Error::Unsupported)?;
            args.iter().try_for_each(|a| check_ops(a, sig))
        }
        Formula::Mu(_, b) | Formula::Nu(_, b) => check_ops(b, sig),
    }
}

impl McProblem {
    pub fn new(system: Coalgebra, formula: SimpleEqSystem) -> Result<McProblem> {
        formula.validate()?;
        for e in &formula.equations {
            if let SimpleRhs::Modal(op, _) = &e.rhs {
                system.functor.check_op(op).map_err(Error::Unsupported)?;
            }
        }
        let source = to_formula(&formula)?;
        let spec = formula.spec();
        Ok(McProblem { system, formula, source, spec })
    }

    pub fn from_formula(system: Coalgebra, phi: &Formula) -> Result<McProblem> {
        check_ops(phi, &system.functor)?;
        let formula = to_equational(phi)?;
        let spec = formula.spec();
        Ok(McProblem { system, formula, source: phi.with_distinct_binders(), spec })
    }

    pub fn m(&self) -> usize {
        self.formula.m()
    }

    pub fn k(&self) -> usize {
        self.spec.k()
    }

    pub fn n(&self) -> usize {
        self.system.n()
    }
}

fn to_set(e: &Elem) -> FixedBitSet {
    e.as_bits().clone()
}

/// The equational system over `2^X` induced by the problem.
pub fn induced_system(p: &McProblem) -> EquationalSystem {
    let n = p.n();
    let lat = Lattice::pointwise(Lattice::Bool2, p.system.states.iter());
    let c = Arc::new(p.system.clone());
    let eqs = p
        .formula
        .equations
        .iter()
        .map(|e| {
            let f = match e.rhs.clone() {
                SimpleRhs::Var(j) => MonotoneFn::new(p.m(), format!("u{}", j + 1), move |a| a[j].clone()).with_deps([j]),
                SimpleRhs::Conn(conn, js) => {
                    let deps = js.clone();
                    MonotoneFn::new(p.m(), format!("{conn:?}{js:?}"), move |a| {
                        let mut acc = FixedBitSet::with_capacity(n);
                        if conn == Conn::And {
                            acc.insert_range(..);
                        }
                        for &j in &js {
                            match conn {
                                Conn::And => acc.intersect_with(a[j].as_bits()),
                                Conn::Or => acc.union_with(a[j].as_bits()),
                            }
                        }
                        Elem::Bits(acc)
                    })
                    .with_deps(deps)
                }
                SimpleRhs::Modal(op, js) => {
                    let c = Arc::clone(&c);
                    let deps = js.clone();
                    MonotoneFn::new(p.m(), format!("{}{js:?}", op.name()), move |a| {
                        let preds: Vec<FixedBitSet> = js.iter().map(|&j| to_set(&a[j])).collect();
                        Elem::Bits(c.modal_step(&op, &preds).expect("modality checked against the functor"))
                    })
                    .with_deps(deps)
                }
            };
            (e.pol, f)
        })
        .collect();
    EquationalSystem::new(lat, eqs).expect("arity matches the number of equations")
}

/// Per-variable solutions of the induced equational system.
pub fn eqsys_semantics(p: &McProblem) -> Vec<FixedBitSet> {
    let sys = induced_system(p);
    let values = eqsys::Solver::new(&sys).solve_prefix(sys.m(), &[]);
    values.iter().map(to_set).collect()
}

/// Per-variable solutions, cross-checked at the last variable against the
/// direct inductive semantics of the formula.
pub fn naive_semantics(p: &McProblem) -> Result<Vec<FixedBitSet>> {
    let values = eqsys_semantics(p);
    let direct = direct_semantics(&p.system, &p.source)?;
    let last = &values[p.m() - 1];
    if &direct != last {
        return Err(Error::Mismatch(format!(
            "equational semantics {:?} differs from direct semantics {:?}",
            last.ones().collect::<Vec<_>>(),
            direct.ones().collect::<Vec<_>>()
        )));
    }
    Ok(values)
}

/// The denotation of a closed formula, by structural recursion with fixpoints
/// computed by iteration. Results are memoised per subterm and the values of
/// its free variables.
pub fn direct_semantics(c: &Coalgebra, phi: &Formula) -> Result<FixedBitSet> {
    if let Some(v) = phi.free_vars().into_iter().next() {
        return Err(Error::Invalid(format!("formula is not closed: {v} is free")));
    }
    check_ops(phi, &c.functor)?;
    let mut d = Direct { c, free: HashMap::new(), memo: HashMap::new() };
    d.index(phi);
    d.eval(phi, &HashMap::new())
}

struct Direct<'a> {
    c: &'a Coalgebra,
    free: HashMap<*const Formula, Vec<String>>,
    memo: HashMap<(*const Formula, Vec<FixedBitSet>), FixedBitSet>,
}

impl Direct<'_> {
    fn index(&mut self, f: &Formula) -> Vec<String> {
        let mut out: Vec<String> = match f {
            Formula::Var(v) => vec![v.clone()],
            Formula::Conn(_, args) | Formula::Modal(_, args) => args.iter().flat_map(|a| self.index(a)).collect(),
            Formula::Mu(v, b) | Formula::Nu(v, b) => self.index(b).into_iter().filter(|u| u != v).collect(),
        };
        out.sort();
        out.dedup();
        self.free.insert(f as *const _, out.clone());
        out
    }

    fn eval(&mut self, f: &Formula, env: &HashMap<String, FixedBitSet>) -> Result<FixedBitSet> {
        let n = self.c.n();
        let key = (f as *const _, self.free[&(f as *const _)].iter().map(|v| env[v].clone()).collect::<Vec<_>>());
        if let Some(r) = self.memo.get(&key) {
            return Ok(r.clone());
        }
        let r = match f {
            Formula::Var(v) => env[v].clone(),
            Formula::Conn(conn, args) => {
                let mut acc = FixedBitSet::with_capacity(n);
                if *conn == Conn::And {
                    acc.insert_range(..);
                }
                for a in args {
                    let s = self.eval(a, env)?;
                    match conn {
                        Conn::And => acc.intersect_with(&s),
                        Conn::Or => acc.union_with(&s),
                    }
                }
                acc
            }
            Formula::Modal(op, args) => {
                let preds = args.iter().map(|a| self.eval(a, env)).collect::<Result<Vec<_>>>()?;
                self.c.modal_step(op, &preds)?
            }
            Formula::Mu(v, b) | Formula::Nu(v, b) => {
                let mut s = FixedBitSet::with_capacity(n);
                if matches!(f, Formula::Nu(..)) {
                    s.insert_range(..);
                }
                let mut inner = env.clone();
                loop {
                    inner.insert(v.clone(), s.clone());
                    let t = self.eval(b, &inner)?;
                    if t == s {
                        break s;
                    }
                    s = t;
                }
            }
        };
        self.memo.insert(key, r.clone());
        Ok(r)
    }
}

/// One prioritized ordinal matrix per state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MpmState {
    pub poms: Vec<Pom>,
}

impl MpmState {
    pub fn row(&self, x: usize, i: usize) -> &PomRow {
        &self.poms[x].rows[i - 1]
    }

    pub fn all_fail(p: &McProblem) -> MpmState {
        MpmState { poms: vec![Pom { rows: vec![PomRow::Fail; p.m()], bound: p.n() as u32 }; p.n()] }
    }

    pub fn to_json(&self, c: &Coalgebra) -> Value {
        let mut m = Map::new();
        for (s, pom) in c.states.iter().zip(&self.poms) {
            m.insert(s.clone(), pom.to_json());
        }
        Value::Object(m)
    }

    pub fn from_json(v: &Value, p: &McProblem) -> Result<MpmState> {
        let obj = v.as_object().ok_or_else(|| Error::Parse("certificate must map states to matrices".into()))?;
        if let Some(s) = obj.keys().find(|s| p.system.state_index(s).is_none()) {
            return Err(Error::Shape(format!("certificate mentions unknown state {s:?}")));
        }
        let poms = p
            .system
            .states
            .iter()
            .map(|s| Pom::from_json(obj.get(s).ok_or_else(|| Error::Shape(format!("certificate lacks state {s:?}")))?, p.k()))
            .collect::<Result<_>>()?;
        Ok(MpmState { poms })
    }
}

/// The counters `alpha` with every position dropped by equation `i` set to `fill`.
fn with_prefix(spec: &PrioritySpec, i: usize, alpha: &[u32], fill: u32) -> Vec<u32> {
    let s = spec.trunc_start(i);
    let mut v = alpha.to_vec();
    v[..s].iter_mut().for_each(|c| *c = fill);
    v
}

/// Whether the modal right-hand side of equation `i` holds at `x` when the
/// matrices are read through `alpha`.
fn modal_holds(p: &McProblem, r: &MpmState, op: &ModalOp, js: &[usize], x: usize, alpha: &[u32]) -> bool {
    let t: FValue<Vec<bool>> = fmap(&p.system.functor, |y: &usize| eval_prime(&p.spec, alpha, &r.poms[*y].rows), &p.system.step[x]);
    lift_proj(&p.system.functor, op, js, &t).expect("modality checked against the functor")
}

fn modal_rhs(p: &McProblem, i: usize) -> (&ModalOp, &[usize]) {
    match &p.formula.equations[i - 1].rhs {
        SimpleRhs::Modal(op, js) => (op, js),
        _ => panic!("equation {i} is not modal"),
    }
}

/// The ⪯_i-least counters, each at most `bound`, at which the modal
/// right-hand side of equation `i` holds at `x`, by enumeration.
pub fn pt_m_brute(p: &McProblem, r: &MpmState, i: usize, x: usize, bound: u32) -> PomRow {
    let (op, js) = modal_rhs(p, i);
    let s = p.spec.trunc_start(i);
    for suffix in all_ordinals(p.k() - s, bound) {
        let mut alpha = vec![bound; s];
        alpha.extend(suffix);
        if modal_holds(p, r, op, js, x, &alpha) {
            return PomRow::Row(with_prefix(&p.spec, i, &alpha, 0));
        }
    }
    PomRow::Fail
}

/// As [`pt_m_brute`], answering stream next-time and atoms directly.
pub fn pt_m(p: &McProblem, r: &MpmState, i: usize, x: usize, bound: u32) -> PomRow {
    let (op, js) = modal_rhs(p, i);
    match (op, &p.system.step[x]) {
        (ModalOp::Next, FValue::Stream { succ, .. }) => {
            let j = js[0] + 1;
            match r.row(*succ, j) {
                PomRow::Fail => PomRow::Fail,
                PomRow::Row(v) => {
                    let s = p.spec.trunc_start(i).max(p.spec.trunc_start(j));
                    let mut v = v.clone();
                    v[..s].iter_mut().for_each(|c| *c = 0);
                    PomRow::Row(v)
                }
            }
        }
        (ModalOp::Atom(_), _) => {
            if modal_holds(p, r, op, js, x, &p.spec.zero()) {
                PomRow::Row(p.spec.zero())
            } else {
                PomRow::Fail
            }
        }
        _ => pt_m_brute(p, r, i, x, bound),
    }
}

#[derive(Clone, Debug)]
pub struct MpmRun {
    pub satisfying: FixedBitSet,
    pub certificate: MpmState,
    /// Main-loop sweeps that changed some row; the confirming sweep is not counted.
    pub iterations: usize,
}

/// Upper bound on main-loop sweeps: `m·|X|·(|X|+1)^k`.
pub fn iteration_bound(p: &McProblem) -> u128 {
    p.m() as u128 * p.n() as u128 * (p.n() as u128 + 1).pow(p.k() as u32)
}

pub fn mpm_check(p: &McProblem) -> MpmRun {
    mpm_check_observed(p, &mut |_| {})
}

/// [`mpm_check`], calling `observe` with the matrices after every sweep.
pub fn mpm_check_observed(p: &McProblem, observe: &mut dyn FnMut(&MpmState)) -> MpmRun {
    let (n, m, k) = (p.n(), p.m(), p.k());
    let bound = n as u32;
    let spec = &p.spec;
    let mut r = MpmState { poms: vec![Pom { rows: vec![PomRow::Row(vec![0; k]); m], bound }; n] };
    for pom in &mut r.poms {
        for (a, &i) in spec.mu.iter().enumerate() {
            if let PomRow::Row(v) = &mut pom.rows[i - 1] {
                v[a] = 1;
            }
        }
    }
    let mut iterations = 0;
    loop {
        let mut changed = false;
        for x in 0..n {
            for i in 1..=m {
                let cur = r.row(x, i).clone();
                let next = update(p, &r, x, i, &cur, bound);
                let next = match next {
                    PomRow::Row(v) if v.iter().any(|&c| c > bound) => PomRow::Fail,
                    other => other,
                };
                if next != cur {
                    r.poms[x].rows[i - 1] = next;
                    changed = true;
                }
            }
        }
        observe(&r);
        if !changed {
            break;
        }
        iterations += 1;
    }
    let mut satisfying = FixedBitSet::with_capacity(n);
    for x in 0..n {
        if !r.row(x, m).is_fail() {
            satisfying.insert(x);
        }
    }
    MpmRun { satisfying, certificate: r, iterations }
}

fn update(p: &McProblem, r: &MpmState, x: usize, i: usize, cur: &PomRow, bound: u32) -> PomRow {
    let spec = &p.spec;
    let row = |j: usize| r.row(x, j + 1).clone();
    let max = |rows: &[PomRow]| max_trunc(spec, i, rows).expect("nonempty");
    match &p.formula.equations[i - 1].rhs {
        SimpleRhs::Var(j) => match spec.mu_index(i) {
            Some(a) => {
                let inc = match row(*j) {
                    PomRow::Fail => PomRow::Fail,
                    PomRow::Row(mut v) => {
                        v[a - 1] += 1;
                        PomRow::Row(v)
                    }
                };
                max(&[cur.clone(), inc])
            }
            None => max(&[cur.clone(), row(*j)]),
        },
        SimpleRhs::Conn(Conn::And, js) => {
            let mut rows = vec![cur.clone()];
            rows.extend(js.iter().map(|&j| row(j)));
            max(&rows)
        }
        SimpleRhs::Conn(Conn::Or, js) => {
            if js.is_empty() {
                return PomRow::Fail;
            }
            let args: Vec<PomRow> = js.iter().map(|&j| row(j)).collect();
            max(&[cur.clone(), min_trunc(spec, i, &args).expect("nonempty")])
        }
        SimpleRhs::Modal(..) => max(&[cur.clone(), pt_m(p, r, i, x, bound)]),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MpmViolation {
    Shape(String),
    Cond { cond: &'static str, state: String, eq: usize },
}

impl fmt::Display for MpmViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MpmViolation::Shape(s) => write!(f, "shape: {s}"),
            MpmViolation::Cond { cond, state, eq } => write!(f, "condition {cond} fails at state {state}, equation {eq}"),
        }
    }
}

/// Checks every finite row of `r` against the matrix progress measure
/// conditions. Modal rows are evaluated with the dropped counters at the
/// matrix bound.
pub fn verify_mpm(p: &McProblem, r: &MpmState) -> std::result::Result<(), MpmViolation> {
    let spec = &p.spec;
    if r.poms.len() != p.n() {
        return Err(MpmViolation::Shape(format!("{} matrices for {} states", r.poms.len(), p.n())));
    }
    for pom in &r.poms {
        pom.check(spec).map_err(|e| MpmViolation::Shape(e.to_string()))?;
    }
    for x in 0..p.n() {
        let bound = r.poms[x].bound;
        for i in 1..=p.m() {
            let PomRow::Row(v) = r.row(x, i) else { continue };
            let fail = |cond| Err(MpmViolation::Cond { cond, state: p.system.states[x].clone(), eq: i });
            let below = |j: usize| spec.row_leq(i, r.row(x, j + 1), r.row(x, i));
            match &p.formula.equations[i - 1].rhs {
                SimpleRhs::Var(j) => match spec.mu_index(i) {
                    Some(a) => {
                        if !spec.lt(i, &spec.zero(), v) {
                            return fail("mu-base");
                        }
                        let ok = match r.row(x, j + 1) {
                            PomRow::Fail => false,
                            PomRow::Row(w) => {
                                let mut w = w.clone();
                                w[a - 1] += 1;
                                spec.leq(i, &w, v)
                            }
                        };
                        if !ok {
                            return fail("mu-step");
                        }
                    }
                    None => {
                        if !below(*j) {
                            return fail("nu-var");
                        }
                    }
                },
                SimpleRhs::Conn(Conn::And, js) => {
                    if !js.iter().all(|&j| below(j)) {
                        return fail("nu-and");
                    }
                }
                SimpleRhs::Conn(Conn::Or, js) => {
                    if !js.iter().any(|&j| below(j)) {
                        return fail("nu-or");
                    }
                }
                SimpleRhs::Modal(op, js) => {
                    let alpha = with_prefix(spec, i, v, bound);
                    if !modal_holds(p, r, op, js, x, &alpha) {
                        return fail("nu-modal");
                    }
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use crate::eqsys::Polarity;
    use crate::logic::{parse_formula, SimpleEquation};
    use proptest::prelude::*;
    use rand::{rngs::StdRng, Rng, SeedableRng};
    use serde_json::json;

    fn chain() -> Coalgebra {
        Coalgebra::from_json(&json!({
            "functor": {"kind": "kripke", "ap": ["p"]},
            "step": {"x0": {"succ": ["x1"]}, "x1": {"labels": ["p"], "succ": ["x1"]}}
        }))
        .unwrap()
    }

    fn two_cycle() -> Coalgebra {
        Coalgebra::from_json(&json!({
            "functor": {"kind": "kripke", "ap": ["F"]},
            "step": {"x0": {"labels": ["F"], "succ": ["x1"]}, "x1": {"succ": ["x0"]}}
        }))
        .unwrap()
    }

    fn problem(c: Coalgebra, text: &str) -> McProblem {
        let phi = parse_formula(text, &c.functor).unwrap();
        McProblem::from_formula(c, &phi).unwrap()
    }

    fn set(bits: &FixedBitSet) -> Vec<usize> {
        bits.ones().collect()
    }

    fn agree(p: &McProblem) -> MpmRun {
        let naive = naive_semantics(p).unwrap();
        let run = mpm_check(p);
        assert_eq!(set(&run.satisfying), set(naive.last().unwrap()), "{}", p.formula);
        assert_eq!(verify_mpm(p, &run.certificate), Ok(()));
        assert!((run.iterations as u128) <= iteration_bound(p));
        run
    }

    #[test]
    fn small_examples() {
        let p = problem(chain(), r"nu u. p /\ box u");
        assert_eq!(set(&naive_semantics(&p).unwrap()[p.m() - 1]), vec![1]);
        let p = problem(chain(), r"mu u. p \/ dia u");
        assert_eq!(set(&naive_semantics(&p).unwrap()[p.m() - 1]), vec![0, 1]);
        agree(&p);
        let p = problem(chain(), "mu u. u");
        assert!(agree(&p).satisfying.is_clear());
        let p = problem(chain(), "nu u. tt");
        assert_eq!(set(&agree(&p).satisfying), vec![0, 1]);
    }

    #[test]
    fn infinitely_often() {
        let p = problem(two_cycle(), r"nu x. mu y. (F /\ dia x) \/ dia y");
        assert_eq!(set(&agree(&p).satisfying), vec![0, 1]);
        let p = problem(two_cycle(), r"mu y. nu x. (F /\ dia y) \/ dia x");
        assert_eq!(set(&agree(&p).satisfying), vec![0, 1]);
        let p = problem(two_cycle(), r"nu x. mu y. (ff /\ dia x) \/ dia y");
        assert!(agree(&p).satisfying.is_clear());
    }

    #[test]
    fn certificates() {
        let p = problem(chain(), r"mu u. p \/ dia u");
        let run = mpm_check(&p);
        let back = MpmState::from_json(&run.certificate.to_json(&p.system), &p).unwrap();
        assert_eq!(back, run.certificate);
        assert_eq!(verify_mpm(&p, &MpmState::all_fail(&p)), Ok(()));
        let mut bad = run.certificate.clone();
        let i = p.spec.mu[0];
        bad.poms[0].rows[i - 1] = PomRow::Row(p.spec.zero());
        assert!(matches!(verify_mpm(&p, &bad), Err(MpmViolation::Cond { cond: "mu-base", .. })));
        let mut short = run.certificate.clone();
        short.poms.pop();
        assert!(matches!(verify_mpm(&p, &short), Err(MpmViolation::Shape(_))));
    }

    #[test]
    fn pt_examples() {
        let p = problem(chain(), r"mu u. p \/ dia u");
        let run = mpm_check(&p);
        let dia = p.formula.equations.iter().position(|e| matches!(e.rhs, SimpleRhs::Modal(ModalOp::Dia, _))).unwrap() + 1;
        let SimpleRhs::Modal(_, js) = &p.formula.equations[dia - 1].rhs else { unreachable!() };
        let succ_row = run.certificate.row(1, js[0] + 1).clone();
        assert_eq!(pt_m(&p, &run.certificate, dia, 0, 2), p.spec.truncate_row(dia, &succ_row));
        assert_eq!(pt_m(&p, &MpmState::all_fail(&p), dia, 0, 2), PomRow::Fail);
    }

    #[test]
    fn empty_disjunction_fails() {
        let c = chain();
        let sys = SimpleEqSystem {
            equations: vec![SimpleEquation { var: "u1".into(), pol: Polarity::Nu, rhs: SimpleRhs::Conn(Conn::Or, vec![]) }],
        };
        let p = McProblem::new(c, sys).unwrap();
        assert!(agree(&p).satisfying.is_clear());
    }

    #[test]
    fn unsupported_modalities() {
        let c = chain();
        let phi = Formula::Modal(ModalOp::Next, vec![Formula::tt()]);
        assert!(matches!(McProblem::from_formula(c, &phi), Err(Error::Unsupported(_))));
    }

    fn random_problem(rng: &mut StdRng, kind: &str) -> McProblem {
        let c = gen::random_coalgebra(rng, kind, 5);
        loop {
            let depth = rng.gen_range(1..=5);
            let phi = gen::random_formula(rng, &c.functor, depth, 3);
            let p = McProblem::from_formula(c.clone(), &phi).unwrap();
            if p.m() <= 9 && p.k() <= 2 {
                return p;
            }
        }
    }

    #[test]
    fn monotone_progress() {
        let mut rng = StdRng::seed_from_u64(7);
        for t in 0..200 {
            let p = random_problem(&mut rng, gen::FUNCTOR_KINDS[t % 5]);
            let mut prev: Option<MpmState> = None;
            mpm_check_observed(&p, &mut |r| {
                if let Some(q) = &prev {
                    for x in 0..p.n() {
                        for i in 1..=p.m() {
                            assert!(p.spec.row_leq(i, q.row(x, i), r.row(x, i)));
                        }
                    }
                }
                prev = Some(r.clone());
            });
        }
    }

    #[test]
    fn quotient_invariance() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..100 {
            let q = gen::random_coalgebra(&mut rng, "kripke", 4);
            let (c, h) = gen::duplicate_states(&mut rng, &q);
            let phi = gen::random_formula(&mut rng, &q.functor, 4, 2);
            let on_q = mpm_check(&McProblem::from_formula(q, &phi).unwrap()).satisfying;
            let on_c = mpm_check(&McProblem::from_formula(c, &phi).unwrap()).satisfying;
            for (x, &hx) in h.iter().enumerate() {
                assert_eq!(on_c.contains(x), on_q.contains(hx));
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(150))]

        #[test]
        fn engine_matches_semantics(seed in any::<u64>(), kind in 0usize..5) {
            let mut rng = StdRng::seed_from_u64(seed);
            let p = random_problem(&mut rng, gen::FUNCTOR_KINDS[kind]);
            let naive = naive_semantics(&p).unwrap();
            let run = mpm_check(&p);
            prop_assert_eq!(set(&run.satisfying), set(naive.last().unwrap()));
            prop_assert_eq!(verify_mpm(&p, &run.certificate), Ok(()));
            prop_assert!((run.iterations as u128) <= iteration_bound(&p));
        }

        #[test]
        fn accepted_measures_are_sound(seed in any::<u64>(), kind in 0usize..5) {
            let mut rng = StdRng::seed_from_u64(seed);
            let p = random_problem(&mut rng, gen::FUNCTOR_KINDS[kind]);
            let truth = eqsys_semantics(&p);
            let run = mpm_check(&p);
            for _ in 0..10 {
                let r = gen::perturb_mpm(&mut rng, &p.spec, &run.certificate);
                if verify_mpm(&p, &r).is_ok() {
                    for x in 0..p.n() {
                        prop_assert!(r.row(x, p.m()).is_fail() || truth[p.m() - 1].contains(x));
                    }
                }
            }
        }

        #[test]
        fn stream_shortcut_matches_enumeration(seed in any::<u64>()) {
            let mut rng = StdRng::seed_from_u64(seed);
            let p = random_problem(&mut rng, "stream");
            let mut r = mpm_check(&p).certificate;
            for _ in 0..3 {
                for x in 0..p.n() {
                    for i in 1..=p.m() {
                        if matches!(p.formula.equations[i - 1].rhs, SimpleRhs::Modal(..)) {
                            prop_assert_eq!(pt_m(&p, &r, i, x, p.n() as u32), pt_m_brute(&p, &r, i, x, p.n() as u32));
                        }
                    }
                }
                r = gen::perturb_mpm(&mut rng, &p.spec, &r);
            }
        }
    }
}
