//! Nested μ/ν equational systems over a finite lattice.
//!
//! Equations are solved left to right: later equations have bigger priority.
//! The solver follows the parametric recursion literally and is used as the
//! reference oracle. Progress measures can be verified and the optimal one
//! synthesized.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::lattice::{self, leq, Elem, Lattice, MonotoneFn};
use crate::priord::PrioritySpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Polarity {
    Mu,
    Nu,
}

impl Polarity {
    pub fn name(self) -> &'static str {
        match self {
            Polarity::Mu => "mu",
            Polarity::Nu => "nu",
        }
    }
}

#[derive(Clone, Debug)]
pub struct EquationalSystem {
    pub lattice: Lattice,
    pub polarities: Vec<Polarity>,
    pub rhs: Vec<MonotoneFn>,
    pub spec: PrioritySpec,
}

impl EquationalSystem {
    pub fn new(lattice: Lattice, equations: Vec<(Polarity, MonotoneFn)>) -> Result<EquationalSystem> {
        let m = equations.len();
        if let Some((_, f)) = equations.iter().find(|(_, f)| f.arity != m) {
            return Err(Error::Shape(format!("right-hand side {} has arity {}, expected {m}", f.descriptor, f.arity)));
        }
        let (polarities, rhs): (Vec<_>, Vec<_>) = equations.into_iter().unzip();
        let spec = PrioritySpec::from_polarities(&polarities.iter().map(|p| *p == Polarity::Mu).collect::<Vec<_>>());
        Ok(EquationalSystem { lattice, polarities, rhs, spec })
    }

    pub fn m(&self) -> usize {
        self.polarities.len()
    }

    pub fn eval(&self, i: usize, args: &[Elem]) -> Elem {
        self.rhs[i - 1].call(args)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EqSolution {
    pub values: Vec<Elem>,
    /// `interim[i-1][j-1]` is the interim solution for `u_j` after solving the
    /// first `i` equations, evaluated at the final values of `u_{i+1..m}`.
    pub interim: Vec<Vec<Elem>>,
}

/// Memoized parametric solver for the prefixes of a system.
pub struct Solver<'a> {
    sys: &'a EquationalSystem,
    memo: RefCell<HashMap<(usize, Vec<Elem>), Rc<Vec<Elem>>>>,
    /// `relevant[n]`: positions in the parameters of prefix `n` read by
    /// some equation of the prefix.
    relevant: Vec<Vec<usize>>,
}

impl<'a> Solver<'a> {
    pub fn new(sys: &'a EquationalSystem) -> Solver<'a> {
        let m = sys.m();
        let relevant = (0..=m)
            .map(|n| (n..m).filter(|&j| sys.rhs[..n].iter().any(|f| f.depends_on(j))).map(|j| j - n).collect())
            .collect();
        Solver { sys, memo: RefCell::new(HashMap::new()), relevant }
    }

    /// Interim solutions for `u_1..u_n` with `u_{n+1..m}` fixed to `params`.
    pub fn solve_prefix(&self, n: usize, params: &[Elem]) -> Rc<Vec<Elem>> {
        debug_assert_eq!(n + params.len(), self.sys.m());
        if n == 0 {
            return Rc::new(Vec::new());
        }
        let key = (n, self.relevant[n].iter().map(|&j| params[j].clone()).collect());
        if let Some(v) = self.memo.borrow().get(&key) {
            return v.clone();
        }
        let g = |l: &Elem| self.f_dagger(n, l, params);
        let ln = match self.sys.polarities[n - 1] {
            Polarity::Mu => lattice::lfp_counted(&g, &self.sys.lattice).0,
            Polarity::Nu => lattice::gfp_counted(&g, &self.sys.lattice).0,
        };
        let mut out = (*self.solve_prefix(n - 1, &with_head(&ln, params))).clone();
        out.push(ln);
        let out = Rc::new(out);
        self.memo.borrow_mut().insert(key, out.clone());
        out
    }

    /// `f‡_n(l, params)`: equation `n` with the lower equations already solved.
    pub fn f_dagger(&self, n: usize, l: &Elem, params: &[Elem]) -> Elem {
        let tail = with_head(l, params);
        let mut args = (*self.solve_prefix(n - 1, &tail)).clone();
        args.extend(tail);
        self.sys.eval(n, &args)
    }
}

fn with_head(head: &Elem, rest: &[Elem]) -> Vec<Elem> {
    let mut v = Vec::with_capacity(rest.len() + 1);
    v.push(head.clone());
    v.extend_from_slice(rest);
    v
}

pub fn solve(sys: &EquationalSystem) -> EqSolution {
    let solver = Solver::new(sys);
    let m = sys.m();
    let values = (*solver.solve_prefix(m, &[])).clone();
    let interim = (1..=m).map(|i| (*solver.solve_prefix(i, &values[i..])).clone()).collect();
    EqSolution { values, interim }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProgressMeasure {
    pub spec: PrioritySpec,
    pub maxima: Vec<u32>,
    /// `approx[i-1][flat(α)]`, counter 1 least significant in the flat index.
    pub approx: Vec<Vec<Elem>>,
}

impl ProgressMeasure {
    pub fn box_size(&self) -> usize {
        self.maxima.iter().map(|&b| b as usize + 1).product()
    }

    pub fn flat(&self, alpha: &[u32]) -> usize {
        let mut idx = 0;
        for (a, &b) in alpha.iter().zip(&self.maxima).rev() {
            idx = idx * (b as usize + 1) + *a as usize;
        }
        idx
    }

    pub fn unflat(&self, mut idx: usize) -> Vec<u32> {
        self.maxima
            .iter()
            .map(|&b| {
                let r = idx % (b as usize + 1);
                idx /= b as usize + 1;
                r as u32
            })
            .collect()
    }

    pub fn get(&self, i: usize, alpha: &[u32]) -> &Elem {
        &self.approx[i - 1][self.flat(alpha)]
    }

    pub fn at_maxima(&self, i: usize) -> &Elem {
        self.get(i, &self.maxima)
    }

    /// The measure that is ⊥ everywhere on the box given by `maxima`.
    pub fn bottom(sys: &EquationalSystem, maxima: Vec<u32>) -> ProgressMeasure {
        let n: usize = maxima.iter().map(|&b| b as usize + 1).product();
        let bot = sys.lattice.bottom();
        ProgressMeasure { spec: sys.spec.clone(), maxima, approx: vec![vec![bot; n]; sys.m()] }
    }

    pub fn to_json(&self, l: &Lattice) -> Value {
        let mut approx = Map::new();
        for (i, row) in self.approx.iter().enumerate() {
            for (idx, e) in row.iter().enumerate() {
                let mut key = (i + 1).to_string();
                for c in self.unflat(idx) {
                    key.push(',');
                    key.push_str(&c.to_string());
                }
                approx.insert(key, l.to_json(e));
            }
        }
        serde_json::json!({"maxima": self.maxima, "approx": approx})
    }

    pub fn from_json(v: &Value, sys: &EquationalSystem) -> Result<ProgressMeasure> {
        let maxima: Vec<u32> = v
            .get("maxima")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("progress measure needs maxima".into()))?
            .iter()
            .map(|x| x.as_u64().and_then(|x| u32::try_from(x).ok()))
            .collect::<Option<_>>()
            .ok_or_else(|| Error::Parse("maxima must be naturals".into()))?;
        if maxima.len() != sys.spec.k() {
            return Err(Error::Shape(format!("maxima has {} counters, expected {}", maxima.len(), sys.spec.k())));
        }
        let obj = v
            .get("approx")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::Parse("progress measure needs an approx object".into()))?;
        let mut pm = ProgressMeasure::bottom(sys, maxima);
        let mut seen = 0;
        for (key, val) in obj {
            let parts: Vec<u32> = key
                .split(',')
                .map(|s| s.trim().parse::<u32>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Parse(format!("bad approximant key {key:?}")))?;
            let (i, alpha) = (parts[0] as usize, &parts[1..]);
            if i == 0 || i > sys.m() || alpha.len() != pm.maxima.len() || alpha.iter().zip(&pm.maxima).any(|(a, b)| a > b) {
                return Err(Error::Shape(format!("approximant key {key:?} outside the box")));
            }
            let idx = pm.flat(alpha);
            pm.approx[i - 1][idx] = sys.lattice.from_json(val)?;
            seen += 1;
        }
        if seen != sys.m() * pm.box_size() {
            return Err(Error::Shape("approximants must cover the whole box".into()));
        }
        Ok(pm)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PmCond {
    Monotonicity,
    MuBase,
    MuBaseExtended,
    MuStep,
    Nu,
}

impl PmCond {
    pub fn name(self) -> &'static str {
        match self {
            PmCond::Monotonicity => "monotonicity",
            PmCond::MuBase => "mu-base",
            PmCond::MuBaseExtended => "mu-base-extended",
            PmCond::MuStep => "mu-step",
            PmCond::Nu => "nu",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PmViolation {
    Shape(String),
    Cond { cond: PmCond, eq: usize, at: Vec<u32> },
}

impl fmt::Display for PmViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PmViolation::Shape(s) => write!(f, "shape: {s}"),
            PmViolation::Cond { cond, eq, at } => write!(f, "{} violated at equation {eq}, {at:?}", cond.name()),
        }
    }
}

/// Checks the progress-measure conditions and reports the first violation in
/// equation-then-α order. With `extended`, the μ base case may instead point
/// to a strictly smaller index with a larger approximant.
pub fn verify_progress_measure(sys: &EquationalSystem, p: &ProgressMeasure, extended: bool) -> std::result::Result<(), PmViolation> {
    let spec = &sys.spec;
    let k = spec.k();
    if p.spec != *spec || p.maxima.len() != k || p.approx.len() != sys.m() {
        return Err(PmViolation::Shape("progress measure does not match the system".into()));
    }
    let n = p.box_size();
    for row in &p.approx {
        if row.len() != n {
            return Err(PmViolation::Shape("approximant table does not cover the box".into()));
        }
        if let Some(e) = row.iter().find(|e| sys.lattice.check(e).is_err()) {
            return Err(PmViolation::Shape(format!("approximant {e} is not a lattice element")));
        }
    }
    let alphas: Vec<Vec<u32>> = (0..n).map(|idx| p.unflat(idx)).collect();
    let cond = |cond, eq, at: &[u32]| Err(PmViolation::Cond { cond, eq, at: at.to_vec() });

    for i in 1..=sys.m() {
        if let Some(at) = monotonicity_violation(spec, p, i, &alphas) {
            return cond(PmCond::Monotonicity, i, &at);
        }
        let s = spec.trunc_start(i);
        for (idx, alpha) in alphas.iter().enumerate() {
            let here = &p.approx[i - 1][idx];
            if let Some(a) = spec.mu_index(i) {
                if alpha[a - 1] == 0 {
                    let bot = *here == sys.lattice.bottom();
                    if !bot && !extended {
                        return cond(PmCond::MuBase, i, alpha);
                    }
                    if !bot {
                        let ok = alphas.iter().enumerate().any(|(j, a2)| spec.lt(i, a2, alpha) && leq(here, &p.approx[i - 1][j]));
                        if !ok {
                            return cond(PmCond::MuBaseExtended, i, alpha);
                        }
                    }
                } else {
                    let mut below = alpha.clone();
                    below[a - 1] -= 1;
                    if !exists_beta(sys, p, i, a - 1, &below, here) {
                        return cond(PmCond::MuStep, i, alpha);
                    }
                }
            } else if !exists_beta(sys, p, i, s, alpha, here) {
                return cond(PmCond::Nu, i, alpha);
            }
        }
    }
    Ok(())
}

/// Searches β over the first `free` counters (ascending) so that
/// `target ⊑ f_i(p(β, base[free..]))`.
fn exists_beta(sys: &EquationalSystem, p: &ProgressMeasure, i: usize, free: usize, base: &[u32], target: &Elem) -> bool {
    let mut alpha = base.to_vec();
    let sub = PmBox { maxima: &p.maxima[..free] };
    for idx in 0..sub.size() {
        sub.write(idx, &mut alpha[..free]);
        let flat = p.flat(&alpha);
        let args: Vec<Elem> = p.approx.iter().map(|row| row[flat].clone()).collect();
        if leq(target, &sys.eval(i, &args)) {
            return true;
        }
    }
    false
}

struct PmBox<'a> {
    maxima: &'a [u32],
}

impl PmBox<'_> {
    fn size(&self) -> usize {
        self.maxima.iter().map(|&b| b as usize + 1).product()
    }

    fn write(&self, mut idx: usize, out: &mut [u32]) {
        for (o, &b) in out.iter_mut().zip(self.maxima) {
            *o = (idx % (b as usize + 1)) as u32;
            idx /= b as usize + 1;
        }
    }
}

/// Monotonicity along ⪯_i: approximants are constant on each =_i class and
/// increase from one class to the next.
fn monotonicity_violation(spec: &PrioritySpec, p: &ProgressMeasure, i: usize, alphas: &[Vec<u32>]) -> Option<Vec<u32>> {
    let s = spec.trunc_start(i);
    let mut order: Vec<usize> = (0..alphas.len()).collect();
    order.sort_by(|&x, &y| spec.cmp(i, &alphas[x], &alphas[y]).then(x.cmp(&y)));
    let row = &p.approx[i - 1];
    let mut bad: Option<usize> = None;
    for w in order.windows(2) {
        let (x, y) = (w[0], w[1]);
        let ok = if alphas[x][s..] == alphas[y][s..] { row[x] == row[y] } else { leq(&row[x], &row[y]) };
        if !ok {
            let culprit = x.max(y);
            bad = Some(bad.map_or(culprit, |b| b.min(culprit)));
        }
    }
    bad.map(|b| alphas[b].clone())
}

/// Builds a measure attaining the solution at its maxima, with every counter
/// bounded by the lattice height. The result always passes the extended check;
/// it also passes the strict check when at most one μ-variable is present.
pub fn synthesize_optimal_pm(sys: &EquationalSystem) -> ProgressMeasure {
    let solver = Solver::new(sys);
    let h = sys.lattice.asc_chain_height() as u32;
    let mut synth = Synth { sys, solver: &solver, h, memo: HashMap::new() };
    let table = synth.run(sys.m(), &[]);
    let k = sys.spec.k();
    ProgressMeasure { spec: sys.spec.clone(), maxima: vec![h; k], approx: (*table).clone() }
}

struct Synth<'a, 'b> {
    sys: &'a EquationalSystem,
    solver: &'b Solver<'a>,
    h: u32,
    memo: HashMap<(usize, Vec<Elem>), Rc<Vec<Vec<Elem>>>>,
}

impl Synth<'_, '_> {
    /// Approximant tables for the first `n` equations with the rest fixed to `params`.
    fn run(&mut self, n: usize, params: &[Elem]) -> Rc<Vec<Vec<Elem>>> {
        if n == 0 {
            return Rc::new(Vec::new());
        }
        let key = (n, self.solver.relevant[n].iter().map(|&j| params[j].clone()).collect());
        if let Some(t) = self.memo.get(&key) {
            return t.clone();
        }
        let out = match self.sys.polarities[n - 1] {
            Polarity::Nu => {
                let ln = self.solver.solve_prefix(n, params)[n - 1].clone();
                let inner = self.run(n - 1, &with_head(&ln, params));
                let cells = inner.first().map_or(self.cells(n - 1), Vec::len);
                let mut t = (*inner).clone();
                t.push(vec![ln; cells]);
                t
            }
            Polarity::Mu => {
                let l = &self.sys.lattice;
                let mut chain = vec![l.bottom()];
                for t in 0..self.h as usize {
                    let next = self.solver.f_dagger(n, &chain[t], params);
                    chain.push(next);
                }
                let inner_cells = self.cells(n - 1);
                let mut t: Vec<Vec<Elem>> = vec![Vec::with_capacity(inner_cells * chain.len()); n];
                for (step, c) in chain.iter().enumerate() {
                    let sub = self.run(n - 1, &with_head(c, params));
                    let boost = if step == 0 {
                        None
                    } else {
                        Some(self.solver.solve_prefix(n - 1, &with_head(&chain[step - 1], params)))
                    };
                    for (i, col) in t.iter_mut().take(n - 1).enumerate() {
                        for e in &sub[i] {
                            col.push(match &boost {
                                Some(b) => lattice::join(e, &b[i]),
                                None => e.clone(),
                            });
                        }
                    }
                    t[n - 1].extend(std::iter::repeat_n(c.clone(), inner_cells));
                }
                t
            }
        };
        let out = Rc::new(out);
        self.memo.insert(key, out.clone());
        out
    }

    fn cells(&self, n: usize) -> usize {
        let k = self.sys.polarities[..n].iter().filter(|p| **p == Polarity::Mu).count();
        (self.h as usize + 1).pow(k as u32)
    }
}

pub type RankingFunction = Vec<Option<u32>>;

/// Checks a ranking function for `f` on a powerset lattice: no rank is 0 and
/// every rank-`α+1` state lies in `f` of the states ranked at most `α`.
pub fn verify_ranking(f: &MonotoneFn, carrier: &Lattice, rk: &RankingFunction) -> bool {
    let width = carrier.carrier().map_or(0, <[String]>::len);
    assert_eq!(rk.len(), width, "ranking function must be total on the carrier");
    if rk.contains(&Some(0)) {
        return false;
    }
    let upto = |a: u32| Elem::bits_from(width, (0..width).filter(|&x| rk[x].is_some_and(|r| r <= a)));
    let max = rk.iter().flatten().copied().max().unwrap_or(0);
    for a in 0..max {
        if !leq(&upto(a + 1), &f.call(&[upto(a)])) {
            return false;
        }
    }
    let finite = upto(max);
    assert!(leq(&finite, &lattice::lfp(f, carrier)), "accepted ranking exceeds the least fixpoint");
    true
}

/// All α in the box of `maxima`, in flat order.
pub fn box_ordinals(maxima: &[u32]) -> Vec<Vec<u32>> {
    let n: usize = maxima.iter().map(|&b| b as usize + 1).product();
    let b = PmBox { maxima };
    (0..n)
        .map(|idx| {
            let mut v = vec![0; maxima.len()];
            b.write(idx, &mut v);
            v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use proptest::prelude::*;
    use rand::{rngs::StdRng, SeedableRng};

    fn proj(m: usize, j: usize) -> MonotoneFn {
        MonotoneFn::new(m, format!("u{}", j + 1), move |a| a[j].clone())
    }

    fn tt() -> Elem {
        Elem::Bool(true)
    }

    fn ff() -> Elem {
        Elem::Bool(false)
    }

    /// u1 =μ (F ∩ u2) ∪ □u1, u2 =ν u1 on the 2-cycle x0 ↔ x1.
    fn two_cycle(f: &[usize]) -> EquationalSystem {
        let l = Lattice::powerset(["x0", "x1"]);
        let fset = Elem::bits_from(2, f.iter().copied());
        let succ = [1usize, 0];
        let f1 = MonotoneFn::new(2, "(F/\\u2)\\/box u1", move |a| {
            let b = a[0].as_bits();
            let bx = Elem::bits_from(2, (0..2).filter(|&x| b.contains(succ[x])));
            lattice::join(&lattice::meet(&fset, &a[1]), &bx)
        });
        EquationalSystem::new(l, vec![(Polarity::Mu, f1), (Polarity::Nu, proj(2, 0))]).unwrap()
    }

    #[test]
    fn order_of_equations_matters() {
        let a = EquationalSystem::new(Lattice::Bool2, vec![(Polarity::Mu, proj(2, 1)), (Polarity::Nu, proj(2, 0))]).unwrap();
        assert_eq!(solve(&a).values, vec![tt(), tt()]);
        let b = EquationalSystem::new(Lattice::Bool2, vec![(Polarity::Nu, proj(2, 1)), (Polarity::Mu, proj(2, 0))]).unwrap();
        assert_eq!(solve(&b).values, vec![ff(), ff()]);
    }

    #[test]
    fn two_cycle_solutions() {
        let s = solve(&two_cycle(&[0]));
        assert_eq!(s.values[1], Elem::bits_from(2, [0, 1]));
        let s = solve(&two_cycle(&[]));
        assert_eq!(s.values[1], Elem::bits_from(2, []));
        assert_eq!(s.interim.len(), 2);
    }

    #[test]
    fn solutions_are_fixpoints() {
        let sys = two_cycle(&[0]);
        let s = solve(&sys);
        for i in 1..=2 {
            assert_eq!(sys.eval(i, &s.values), s.values[i - 1]);
        }
    }

    #[test]
    fn hand_built_witness_on_two_cycle() {
        let sys = two_cycle(&[0]);
        let all = Elem::bits_from(2, [0, 1]);
        let p = ProgressMeasure {
            spec: sys.spec.clone(),
            maxima: vec![2],
            approx: vec![vec![Elem::bits_from(2, []), Elem::bits_from(2, [0]), all.clone()], vec![all.clone(); 3]],
        };
        assert_eq!(verify_progress_measure(&sys, &p, false), Ok(()));
        let mut bad = p.clone();
        bad.approx[0][0] = Elem::bits_from(2, [0]);
        match verify_progress_measure(&sys, &bad, false) {
            Err(PmViolation::Cond { cond, .. }) => assert!(matches!(cond, PmCond::MuBase | PmCond::Monotonicity)),
            other => panic!("expected a violation, got {other:?}"),
        }
        let bot = ProgressMeasure::bottom(&sys, vec![0]);
        assert_eq!(verify_progress_measure(&sys, &bot, false), Ok(()));
    }

    #[test]
    fn base_case_is_reported() {
        let sys = EquationalSystem::new(Lattice::Bool2, vec![(Polarity::Mu, MonotoneFn::new(1, "tt", |_| Elem::Bool(true)))]).unwrap();
        let p = ProgressMeasure { spec: sys.spec.clone(), maxima: vec![1], approx: vec![vec![tt(), tt()]] };
        assert_eq!(
            verify_progress_measure(&sys, &p, false),
            Err(PmViolation::Cond { cond: PmCond::MuBase, eq: 1, at: vec![0] })
        );
    }

    #[test]
    fn synthesis_examples() {
        let a = EquationalSystem::new(Lattice::Bool2, vec![(Polarity::Mu, proj(2, 1)), (Polarity::Nu, proj(2, 0))]).unwrap();
        let p = synthesize_optimal_pm(&a);
        assert!(p.maxima[0] <= 1);
        assert_eq!((p.at_maxima(1), p.at_maxima(2)), (&tt(), &tt()));
        assert_eq!(verify_progress_measure(&a, &p, false), Ok(()));

        let single = EquationalSystem::new(Lattice::Bool2, vec![(Polarity::Nu, proj(1, 0))]).unwrap();
        let p = synthesize_optimal_pm(&single);
        assert!(p.approx[0].iter().all(|e| *e == tt()));

        let sys = two_cycle(&[0]);
        let p = synthesize_optimal_pm(&sys);
        assert!(p.maxima[0] <= 2);
        assert_eq!(p.at_maxima(2), &Elem::bits_from(2, [0, 1]));
        assert_eq!(verify_progress_measure(&sys, &p, false), Ok(()));
    }

    #[test]
    fn nested_least_fixpoints_need_the_extended_base_case() {
        // u1 =μ tt, u2 =μ u1: the strict base case forces p_2 to stay ⊥.
        let sys = EquationalSystem::new(
            Lattice::Bool2,
            vec![(Polarity::Mu, MonotoneFn::new(2, "tt", |_| Elem::Bool(true))), (Polarity::Mu, proj(2, 0))],
        )
        .unwrap();
        let p = synthesize_optimal_pm(&sys);
        assert_eq!(verify_progress_measure(&sys, &p, true), Ok(()));
        assert_eq!(p.at_maxima(2), &tt());
        // Exhaustively, no strict measure on the box [0,1]^2 makes u2 true.
        for mask in 0u32..256 {
            let mut q = ProgressMeasure::bottom(&sys, vec![1, 1]);
            for cell in 0..8 {
                q.approx[cell / 4][cell % 4] = Elem::Bool(mask >> cell & 1 == 1);
            }
            if verify_progress_measure(&sys, &q, false).is_ok() {
                assert_eq!(q.at_maxima(2), &ff());
            }
        }
    }

    #[test]
    fn ranking_functions() {
        // Line graph x_i -> x_{i-1}, target {x0}.
        let l = Lattice::powerset(["x0", "x1", "x2", "x3"]);
        let f = MonotoneFn::unary("reach x0", |s| {
            let b = s.as_bits();
            Elem::bits_from(4, (0..4).filter(|&x| x == 0 || b.contains(x - 1)))
        });
        assert!(verify_ranking(&f, &l, &vec![Some(1), Some(2), Some(3), Some(4)]));
        assert!(verify_ranking(&f, &l, &vec![None; 4]));
        assert!(!verify_ranking(&f, &l, &vec![Some(0), None, None, None]));
        assert!(!verify_ranking(&f, &l, &vec![Some(1), Some(1), None, None]));
    }

    #[test]
    fn json_round_trip() {
        let sys = two_cycle(&[0]);
        let p = synthesize_optimal_pm(&sys);
        let v = p.to_json(&sys.lattice);
        assert_eq!(ProgressMeasure::from_json(&v, &sys).unwrap(), p);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn accepted_measures_are_sound(seed in any::<u64>()) {
            let mut rng = StdRng::seed_from_u64(seed);
            let sys = gen::random_system(&mut rng, 4, 4);
            let sol = solve(&sys);
            let p = synthesize_optimal_pm(&sys);
            prop_assert_eq!(verify_progress_measure(&sys, &p, true), Ok(()));
            if sys.spec.k() <= 1 {
                prop_assert_eq!(verify_progress_measure(&sys, &p, false), Ok(()));
            }
            prop_assert!(p.maxima.iter().all(|&b| b as usize <= sys.lattice.asc_chain_height()));
            for i in 1..=sys.m() {
                prop_assert_eq!(p.at_maxima(i), &sol.values[i - 1]);
            }
            for q in gen::perturbations(&mut rng, &sys, &p, 6) {
                for ext in [false, true] {
                    if verify_progress_measure(&sys, &q, ext).is_ok() {
                        for i in 1..=sys.m() {
                            prop_assert!(leq(q.at_maxima(i), &sol.values[i - 1]));
                        }
                    }
                }
            }
        }
    }
}
