//! Existential linear-time checking over nondeterministic stream systems:
//! witness verification, the bounded decision procedure and a lasso oracle.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde_json::{json, Map, Value};

use crate::checker::{mpm_check, verify_mpm, McProblem, MpmState, MpmViolation};
use crate::coalgebra::{read_states, Coalgebra, FValue, FunctorInstance};
use crate::error::{Error, Result};
use crate::logic::{to_equational, to_formula, Conn, Formula, ModalOp, Signature, SimpleEqSystem, SimpleRhs};
use crate::priord::{all_ordinals, max_trunc, min_trunc, Pom, PomRow, PrioritySpec};

pub type Labels = BTreeSet<usize>;

/// A stream system where every state offers a nonempty set of
/// (labels, successor) choices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NondetCoalgebra {
    pub functor: FunctorInstance,
    pub states: Vec<String>,
    pub step: Vec<Vec<(Labels, usize)>>,
}

impl NondetCoalgebra {
    pub fn n(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, s: &str) -> Option<usize> {
        self.states.iter().position(|x| x == s)
    }

    pub fn is_deterministic(&self) -> bool {
        self.step.iter().all(|c| c.len() == 1)
    }

    /// The plain stream system, when every state has exactly one choice.
    pub fn to_deterministic(&self) -> Option<Coalgebra> {
        if !self.is_deterministic() {
            return None;
        }
        let step = self.step.iter().map(|c| FValue::Stream { labels: c[0].0.clone(), succ: c[0].1 }).collect();
        Some(Coalgebra { functor: self.functor.clone(), states: self.states.clone(), step })
    }

    /// Reads a system whose step maps each state either to a list of
    /// `{"labels", "succ": state}` choices or to one state-labelled entry
    /// `{"labels", "succ": [states]}` whose labels move onto every transition.
    pub fn from_json(v: &Value) -> Result<NondetCoalgebra> {
        let functor = FunctorInstance::from_json(v.get("functor").ok_or_else(|| Error::Parse("system needs a functor".into()))?)?;
        if !matches!(functor, FunctorInstance::Stream { .. }) {
            return Err(Error::Parse("linear-time requires stream functor".into()));
        }
        let step = v.get("step").and_then(Value::as_object).ok_or_else(|| Error::Parse("system needs a step object".into()))?;
        let states = read_states(v, step)?;
        let idx = |s: &Value| -> Result<usize> {
            let name = s.as_str().ok_or_else(|| Error::Parse(format!("state reference {s} must be a string")))?;
            states.iter().position(|x| x == name).ok_or_else(|| Error::Parse(format!("undeclared state {name:?}")))
        };
        let labels = |x: &Value| -> Result<Labels> {
            let Some(l) = x.get("labels") else { return Ok(Labels::new()) };
            l.as_array()
                .ok_or_else(|| Error::Parse("labels must be a list".into()))?
                .iter()
                .map(|p| {
                    let p = p.as_str().ok_or_else(|| Error::Parse("labels must be strings".into()))?;
                    functor.atom_index(p).ok_or_else(|| Error::Parse(format!("unknown atomic proposition {p:?}")))
                })
                .collect()
        };
        let mut out = Vec::with_capacity(states.len());
        for s in &states {
            let x = step.get(s).ok_or_else(|| Error::Parse(format!("state {s:?} has no step")))?;
            let mut choices = Vec::new();
            match x {
                Value::Array(entries) => {
                    for e in entries {
                        let succ = e.get("succ").ok_or_else(|| Error::Parse(format!("choice of {s:?} needs a successor")))?;
                        choices.push((labels(e)?, idx(succ)?));
                    }
                }
                Value::Object(_) => {
                    let l = labels(x)?;
                    let succ = x.get("succ").and_then(Value::as_array).ok_or_else(|| Error::Parse(format!("state {s:?} needs a successor list")))?;
                    for y in succ {
                        choices.push((l.clone(), idx(y)?));
                    }
                }
                _ => return Err(Error::Parse(format!("bad step entry for {s:?}"))),
            }
            choices.sort();
            choices.dedup();
            if choices.is_empty() {
                return Err(Error::Parse(format!("state {s:?} has no choices")));
            }
            out.push(choices);
        }
        Ok(NondetCoalgebra { functor, states, step: out })
    }

    pub fn to_json(&self) -> Value {
        let ap = self.functor.ap();
        let mut step = Map::new();
        for (s, cs) in self.states.iter().zip(&self.step) {
            let cs: Vec<Value> = cs
                .iter()
                .map(|(l, y)| json!({"labels": l.iter().map(|p| ap[*p].clone()).collect::<Vec<_>>(), "succ": self.states[*y]}))
                .collect();
            step.insert(s.clone(), Value::Array(cs));
        }
        json!({"functor": self.functor.to_json(), "states": self.states, "step": step})
    }
}

/// A closed formula over a stream signature, independent of any system.
#[derive(Clone, Debug)]
pub struct LinearProblem {
    pub functor: FunctorInstance,
    pub formula: SimpleEqSystem,
    pub source: Formula,
    pub spec: PrioritySpec,
}

impl LinearProblem {
    pub fn new(functor: FunctorInstance, formula: SimpleEqSystem) -> Result<LinearProblem> {
        formula.validate()?;
        for e in &formula.equations {
            if let SimpleRhs::Modal(op, _) = &e.rhs {
                functor.check_op(op).map_err(Error::Unsupported)?;
            }
        }
        let source = to_formula(&formula)?;
        let spec = formula.spec();
        Ok(LinearProblem { functor, formula, source, spec })
    }

    pub fn from_formula(functor: FunctorInstance, phi: &Formula) -> Result<LinearProblem> {
        LinearProblem::new(functor, to_equational(phi)?)
    }

    pub fn m(&self) -> usize {
        self.formula.m()
    }

    pub fn k(&self) -> usize {
        self.spec.k()
    }

    /// The branching-time problem on a plain stream system.
    pub fn on(&self, system: Coalgebra) -> McProblem {
        McProblem { system, formula: self.formula.clone(), source: self.source.clone(), spec: self.spec.clone() }
    }
}

/// An ultimately periodic trace `stem · loop^ω`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Lasso {
    pub stem: Vec<Labels>,
    pub cycle: Vec<Labels>,
}

impl Lasso {
    /// The shortest representation: primitive loop, stem rolled into it.
    pub fn normalize(mut self) -> Lasso {
        let l = self.cycle.len();
        if let Some(p) = (1..=l).find(|&p| l % p == 0 && (p..l).all(|i| self.cycle[i] == self.cycle[i - p])) {
            self.cycle.truncate(p);
        }
        while self.stem.last().is_some_and(|s| Some(s) == self.cycle.last()) {
            self.stem.pop();
            self.cycle.rotate_right(1);
        }
        self
    }

    /// The lasso as a stream system whose first state starts the trace.
    pub fn to_coalgebra(&self, functor: &FunctorInstance) -> Coalgebra {
        let s = self.stem.len();
        let len = s + self.cycle.len();
        let step = self
            .stem
            .iter()
            .chain(&self.cycle)
            .enumerate()
            .map(|(t, l)| FValue::Stream { labels: l.clone(), succ: if t + 1 == len { s } else { t + 1 } })
            .collect();
        Coalgebra { functor: functor.clone(), states: (0..len).map(|t| format!("l{t}")).collect(), step }
    }
}

/// Witness states are pairs of a system state and a matrix; `choice[y]` is
/// the labels emitted at `y` together with the next witness state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LtmcWitness {
    pub alpha: u32,
    pub ys: Vec<(usize, Pom)>,
    pub choice: Vec<(Labels, usize)>,
}

impl LtmcWitness {
    pub fn to_json(&self, c: &NondetCoalgebra) -> Value {
        let ap = c.functor.ap();
        let ys: Vec<Value> = self
            .ys
            .iter()
            .zip(&self.choice)
            .map(|((x, pom), (l, y))| {
                json!({
                    "state": c.states[*x],
                    "pom": pom.to_json(),
                    "labels": l.iter().map(|p| ap[*p].clone()).collect::<Vec<_>>(),
                    "succ": y,
                })
            })
            .collect();
        json!({"alpha": self.alpha, "Y": ys})
    }

    pub fn from_json(v: &Value, c: &NondetCoalgebra, k: usize) -> Result<LtmcWitness> {
        let alpha = v
            .get("alpha")
            .and_then(Value::as_u64)
            .and_then(|a| u32::try_from(a).ok())
            .ok_or_else(|| Error::Parse("witness needs a numeric alpha".into()))?;
        let entries = v.get("Y").and_then(Value::as_array).ok_or_else(|| Error::Parse("witness needs a Y list".into()))?;
        let mut ys = Vec::new();
        let mut choice = Vec::new();
        for e in entries {
            let s = e.get("state").and_then(Value::as_str).ok_or_else(|| Error::Parse("witness entry needs a state".into()))?;
            let x = c.state_index(s).ok_or_else(|| Error::Parse(format!("unknown state {s:?}")))?;
            let pom = Pom::from_json(e.get("pom").ok_or_else(|| Error::Parse("witness entry needs a pom".into()))?, k)?;
            let labels = e
                .get("labels")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse("witness entry needs labels".into()))?
                .iter()
                .map(|p| p.as_str().and_then(|p| c.functor.atom_index(p)).ok_or_else(|| Error::Parse(format!("bad label {p}"))))
                .collect::<Result<Labels>>()?;
            let succ = e.get("succ").and_then(Value::as_u64).ok_or_else(|| Error::Parse("witness entry needs a successor index".into()))?;
            ys.push((x, pom));
            choice.push((labels, succ as usize));
        }
        Ok(LtmcWitness { alpha, ys, choice })
    }

    /// The deterministic stream system `(Y, choice)`.
    pub fn to_coalgebra(&self, functor: &FunctorInstance) -> Coalgebra {
        let step = self.choice.iter().map(|(l, y)| FValue::Stream { labels: l.clone(), succ: *y }).collect();
        Coalgebra { functor: functor.clone(), states: (0..self.ys.len()).map(|y| format!("y{y}")).collect(), step }
    }

    /// The trace followed from witness state `y`.
    pub fn lasso(&self, y: usize) -> Lasso {
        let mut seen = HashMap::new();
        let mut labels = Vec::new();
        let mut cur = y;
        while !seen.contains_key(&cur) {
            seen.insert(cur, labels.len());
            labels.push(self.choice[cur].0.clone());
            cur = self.choice[cur].1;
        }
        let cycle = labels.split_off(seen[&cur]);
        Lasso { stem: labels, cycle }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LtmcViolation {
    Shape(String),
    Measure(MpmViolation),
    /// The chosen labels and successor are not offered by the system.
    Compat { y: usize },
}

impl fmt::Display for LtmcViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LtmcViolation::Shape(s) => write!(f, "shape: {s}"),
            LtmcViolation::Measure(v) => write!(f, "{v}"),
            LtmcViolation::Compat { y } => write!(f, "condition compat fails at witness state y{y}"),
        }
    }
}

/// Checks the matrix conditions on the deterministic system `(Y, choice)`
/// with every matrix bounded by `alpha`, and that each choice is offered by
/// `c` at the underlying state.
pub fn verify_ltmc(p: &LinearProblem, c: &NondetCoalgebra, w: &LtmcWitness) -> std::result::Result<(), LtmcViolation> {
    if w.ys.len() != w.choice.len() {
        return Err(LtmcViolation::Shape(format!("{} states but {} choices", w.ys.len(), w.choice.len())));
    }
    for (y, ((x, pom), (l, succ))) in w.ys.iter().zip(&w.choice).enumerate() {
        if *x >= c.n() {
            return Err(LtmcViolation::Shape(format!("witness state y{y} names state {x} out of range")));
        }
        if *succ >= w.ys.len() {
            return Err(LtmcViolation::Shape(format!("witness state y{y} has successor {succ} out of range")));
        }
        if pom.bound != w.alpha {
            return Err(LtmcViolation::Shape(format!("witness state y{y} has bound {} but alpha is {}", pom.bound, w.alpha)));
        }
        if !c.step[*x].contains(&(l.clone(), w.ys[*succ].0)) {
            return Err(LtmcViolation::Compat { y });
        }
    }
    if w.ys.is_empty() {
        return Ok(());
    }
    let mp = p.on(w.to_coalgebra(&p.functor));
    let r = MpmState { poms: w.ys.iter().map(|(_, pom)| pom.clone()).collect() };
    verify_mpm(&mp, &r).map_err(LtmcViolation::Measure)
}

#[derive(Clone, Debug)]
pub struct LinearRun {
    pub holds: bool,
    pub witness: Option<LtmcWitness>,
    /// Candidate pairs before and after pruning.
    pub candidates: usize,
    pub survivors: usize,
}

/// The least matrix whose modal rows are `fixed` and whose other rows
/// satisfy the local progress conditions, with counters capped at `alpha`.
fn close(p: &LinearProblem, fixed: &[Option<PomRow>], alpha: u32) -> Vec<PomRow> {
    let spec = &p.spec;
    let m = p.m();
    let mut rows: Vec<PomRow> = fixed.iter().map(|r| r.clone().unwrap_or(PomRow::Row(spec.zero()))).collect();
    for (a, &i) in spec.mu.iter().enumerate() {
        if fixed[i - 1].is_none() {
            if let PomRow::Row(v) = &mut rows[i - 1] {
                v[a] = 1;
            }
        }
    }
    loop {
        let mut changed = false;
        for i in 1..=m {
            if fixed[i - 1].is_some() {
                continue;
            }
            let cur = rows[i - 1].clone();
            let row = |j: usize| rows[j].clone();
            let max = |rs: &[PomRow]| max_trunc(spec, i, rs).expect("nonempty");
            let next = match &p.formula.equations[i - 1].rhs {
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
                    let mut rs = vec![cur.clone()];
                    rs.extend(js.iter().map(|&j| row(j)));
                    max(&rs)
                }
                SimpleRhs::Conn(Conn::Or, js) if js.is_empty() => PomRow::Fail,
                SimpleRhs::Conn(Conn::Or, js) => {
                    let args: Vec<PomRow> = js.iter().map(|&j| row(j)).collect();
                    max(&[cur.clone(), min_trunc(spec, i, &args).expect("nonempty")])
                }
                SimpleRhs::Modal(..) => unreachable!("modal rows are fixed"),
            };
            let next = match next {
                PomRow::Row(v) if v.iter().any(|&c| c > alpha) => PomRow::Fail,
                other => other,
            };
            if next != cur {
                rows[i - 1] = next;
                changed = true;
            }
        }
        if !changed {
            return rows;
        }
    }
}

/// All matrices obtained by fixing the modal rows (atoms: zero or failure;
/// next-time rows: failure or any counters up to `alpha` beyond the
/// dropped prefix) and closing the rest.
fn candidate_poms(p: &LinearProblem, alpha: u32) -> Vec<Pom> {
    let spec = &p.spec;
    let k = p.k();
    let mut options: Vec<Vec<Option<PomRow>>> = Vec::new();
    for (idx, e) in p.formula.equations.iter().enumerate() {
        let i = idx + 1;
        options.push(match &e.rhs {
            SimpleRhs::Modal(ModalOp::Atom(_), _) => vec![Some(PomRow::Row(spec.zero())), Some(PomRow::Fail)],
            SimpleRhs::Modal(..) => {
                let s = spec.trunc_start(i);
                let mut o: Vec<Option<PomRow>> = all_ordinals(k - s, alpha)
                    .map(|suffix| {
                        let mut v = vec![0; s];
                        v.extend(suffix);
                        Some(PomRow::Row(v))
                    })
                    .collect();
                o.push(Some(PomRow::Fail));
                o
            }
            _ => vec![None],
        });
    }
    let mut seen = BTreeSet::new();
    let mut pick = vec![0usize; options.len()];
    loop {
        let fixed: Vec<Option<PomRow>> = pick.iter().zip(&options).map(|(&c, o)| o[c].clone()).collect();
        seen.insert(close(p, &fixed, alpha));
        let mut d = 0;
        while d < pick.len() {
            pick[d] += 1;
            if pick[d] < options[d].len() {
                break;
            }
            pick[d] = 0;
            d += 1;
        }
        if d == pick.len() {
            break;
        }
    }
    seen.into_iter().map(|rows| Pom { rows, bound: alpha }).collect()
}

/// What a matrix demands of the next step: atoms that must be emitted and
/// upper bounds on rows of the successor matrix.
struct Demand {
    atoms: Vec<usize>,
    rows: Vec<(usize, Vec<u32>)>,
}

fn demand(p: &LinearProblem, pom: &Pom) -> Demand {
    let spec = &p.spec;
    let mut d = Demand { atoms: Vec::new(), rows: Vec::new() };
    for (idx, e) in p.formula.equations.iter().enumerate() {
        let i = idx + 1;
        let PomRow::Row(v) = &pom.rows[idx] else { continue };
        match &e.rhs {
            SimpleRhs::Modal(ModalOp::Atom(a), _) => d.atoms.push(p.functor.atom_index(a).expect("checked atom")),
            SimpleRhs::Modal(ModalOp::Next, js) => {
                let s = spec.trunc_start(i);
                let mut alpha = v.clone();
                alpha[..s].iter_mut().for_each(|c| *c = pom.bound);
                d.rows.push((js[0] + 1, alpha));
            }
            _ => {}
        }
    }
    d
}

fn meets(spec: &PrioritySpec, d: &Demand, next: &Pom) -> bool {
    d.rows.iter().all(|(j, alpha)| match &next.rows[j - 1] {
        PomRow::Fail => false,
        PomRow::Row(v) => spec.leq(*j, v, alpha),
    })
}

/// Decides whether some trace from `x0` satisfies the formula, searching
/// witnesses whose counters stay within `alpha`. Candidate pairs of a state
/// and a matrix are removed until every survivor has a compatible choice
/// leading to a survivor.
pub fn decide_existential(p: &LinearProblem, c: &NondetCoalgebra, x0: usize, alpha: u32) -> LinearRun {
    let poms = candidate_poms(p, alpha);
    let demands: Vec<Demand> = poms.iter().map(|pom| demand(p, pom)).collect();
    let n = c.n();
    let mut alive: Vec<Vec<bool>> = vec![vec![true; poms.len()]; n];
    // next[x][q]: index into c.step[x] and the successor matrix
    let mut next: Vec<Vec<Option<(usize, usize)>>> = vec![vec![None; poms.len()]; n];
    loop {
        let mut changed = false;
        for x in 0..n {
            for q in 0..poms.len() {
                if !alive[x][q] {
                    continue;
                }
                if let Some((ci, q2)) = next[x][q] {
                    if alive[c.step[x][ci].1][q2] {
                        continue;
                    }
                }
                let d = &demands[q];
                let found = c.step[x].iter().enumerate().find_map(|(ci, (l, x2))| {
                    if !d.atoms.iter().all(|a| l.contains(a)) {
                        return None;
                    }
                    (0..poms.len()).find(|&q2| alive[*x2][q2] && meets(&p.spec, d, &poms[q2])).map(|q2| (ci, q2))
                });
                next[x][q] = found;
                if found.is_none() {
                    alive[x][q] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let m = p.m();
    let survivors = alive.iter().flatten().filter(|&&a| a).count();
    let candidates = n * poms.len();
    let start = (0..poms.len()).find(|&q| alive[x0][q] && !poms[q].rows[m - 1].is_fail());
    let Some(q0) = start else {
        return LinearRun { holds: false, witness: None, candidates, survivors };
    };
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut order = vec![(x0, q0)];
    index.insert((x0, q0), 0);
    let mut queue = VecDeque::from([(x0, q0)]);
    let mut choice = Vec::new();
    while let Some((x, q)) = queue.pop_front() {
        let (ci, q2) = next[x][q].expect("survivors have a choice");
        let (l, x2) = &c.step[x][ci];
        let y2 = *index.entry((*x2, q2)).or_insert_with(|| {
            order.push((*x2, q2));
            queue.push_back((*x2, q2));
            order.len() - 1
        });
        choice.push((l.clone(), y2));
    }
    let ys = order.into_iter().map(|(x, q)| (x, poms[q].clone())).collect();
    LinearRun { holds: true, witness: Some(LtmcWitness { alpha, ys, choice }), candidates, survivors }
}

/// Lasso search with a cache of evaluated traces that can be shared across
/// systems for the same formula.
pub struct LassoOracle<'a> {
    problem: &'a LinearProblem,
    cache: HashMap<Lasso, bool>,
}

impl<'a> LassoOracle<'a> {
    pub fn new(problem: &'a LinearProblem) -> LassoOracle<'a> {
        LassoOracle { problem, cache: HashMap::new() }
    }

    pub fn holds(&mut self, lasso: &Lasso) -> bool {
        let key = lasso.clone().normalize();
        if let Some(&b) = self.cache.get(&key) {
            return b;
        }
        let run = mpm_check(&self.problem.on(key.to_coalgebra(&self.problem.functor)));
        let b = run.satisfying.contains(0);
        self.cache.insert(key, b);
        b
    }

    /// A satisfying lasso of `c` from `x0` with stem and loop lengths within
    /// the bounds, if any.
    pub fn search(&mut self, c: &NondetCoalgebra, x0: usize, stem_bound: usize, loop_bound: usize) -> Option<Lasso> {
        let mut stem = Vec::new();
        self.stems(c, &BTreeSet::from([x0]), &mut stem, stem_bound, loop_bound)
    }

    fn stems(&mut self, c: &NondetCoalgebra, at: &BTreeSet<usize>, stem: &mut Vec<Labels>, sb: usize, lb: usize) -> Option<Lasso> {
        for &xs in at {
            let mut cycle = Vec::new();
            if let Some(l) = self.cycles(c, xs, &BTreeSet::from([xs]), stem, &mut cycle, lb) {
                return Some(l);
            }
        }
        if stem.len() == sb {
            return None;
        }
        for (l, to) in successors(c, at) {
            stem.push(l);
            let found = self.stems(c, &to, stem, sb, lb);
            stem.pop();
            if found.is_some() {
                return found;
            }
        }
        None
    }

    fn cycles(
        &mut self,
        c: &NondetCoalgebra,
        xs: usize,
        at: &BTreeSet<usize>,
        stem: &[Labels],
        cycle: &mut Vec<Labels>,
        lb: usize,
    ) -> Option<Lasso> {
        if !cycle.is_empty() && at.contains(&xs) {
            let lasso = Lasso { stem: stem.to_vec(), cycle: cycle.clone() };
            if self.holds(&lasso) {
                return Some(lasso);
            }
        }
        if cycle.len() == lb {
            return None;
        }
        for (l, to) in successors(c, at) {
            cycle.push(l);
            let found = self.cycles(c, xs, &to, stem, cycle, lb);
            cycle.pop();
            if found.is_some() {
                return found;
            }
        }
        None
    }
}

/// For each label set offered somewhere in `at`, the states reachable by it.
fn successors(c: &NondetCoalgebra, at: &BTreeSet<usize>) -> Vec<(Labels, BTreeSet<usize>)> {
    let mut out: std::collections::BTreeMap<Labels, BTreeSet<usize>> = Default::default();
    for &x in at {
        for (l, y) in &c.step[x] {
            out.entry(l.clone()).or_default().insert(*y);
        }
    }
    out.into_iter().collect()
}

pub fn lasso_oracle(p: &LinearProblem, c: &NondetCoalgebra, x0: usize, stem_bound: usize, loop_bound: usize) -> bool {
    LassoOracle::new(p).search(c, x0, stem_bound, loop_bound).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_formula;

    fn system(v: Value) -> NondetCoalgebra {
        NondetCoalgebra::from_json(&v).unwrap()
    }

    fn problem(c: &NondetCoalgebra, f: &str) -> LinearProblem {
        LinearProblem::from_formula(c.functor.clone(), &parse_formula(f, &c.functor).unwrap()).unwrap()
    }

    const GF: &str = "nu u. mu v. ((p \\/ X v) /\\ X u)";
    const F: &str = "mu v. (p \\/ X v)";

    fn two_choice() -> NondetCoalgebra {
        system(json!({"functor": {"kind": "stream", "ap": ["p", "q"]},
            "step": {"x0": [{"labels": ["p"], "succ": "x0"}, {"labels": [], "succ": "x0"}]}}))
    }

    #[test]
    fn gf_two_choice() {
        let c = two_choice();
        let p = problem(&c, GF);
        let run = decide_existential(&p, &c, 0, 2);
        assert!(run.holds);
        let w = run.witness.unwrap();
        assert_eq!(verify_ltmc(&p, &c, &w), Ok(()));
        assert_eq!(w.lasso(0).normalize(), Lasso { stem: vec![], cycle: vec![Labels::from([0])] });
        let back = LtmcWitness::from_json(&w.to_json(&c), &c, p.k()).unwrap();
        assert_eq!(back, w);
        assert!(lasso_oracle(&p, &c, 0, 1, 1));
    }

    #[test]
    fn gf_empty_only() {
        let c = system(json!({"functor": {"kind": "stream", "ap": ["p"]}, "step": {"x0": [{"labels": [], "succ": "x0"}]}}));
        let p = problem(&c, GF);
        assert!(!decide_existential(&p, &c, 0, 2).holds);
        assert!(!lasso_oracle(&p, &c, 0, 4, 4));
    }

    #[test]
    fn eventually_after_stem() {
        let c = system(json!({"functor": {"kind": "stream", "ap": ["p"]},
            "step": {"x0": [{"labels": [], "succ": "x1"}], "x1": [{"labels": ["p"], "succ": "x1"}]}}));
        let p = problem(&c, F);
        let mut o = LassoOracle::new(&p);
        let l = o.search(&c, 0, 1, 1).unwrap();
        assert_eq!(l, Lasso { stem: vec![Labels::new()], cycle: vec![Labels::from([0])] });
        let run = decide_existential(&p, &c, 0, 2 * p.m() as u32);
        assert!(run.holds);
        assert_eq!(verify_ltmc(&p, &c, &run.witness.unwrap()), Ok(()));
    }

    #[test]
    fn trivially_true() {
        let c = two_choice();
        let p = problem(&c, "tt");
        let run = decide_existential(&p, &c, 0, 1);
        assert!(run.holds);
        assert_eq!(verify_ltmc(&p, &c, &run.witness.unwrap()), Ok(()));
    }

    #[test]
    fn witness_rejections() {
        let c = two_choice();
        let p = problem(&c, GF);
        let mut w = decide_existential(&p, &c, 0, 2).witness.unwrap();
        assert_eq!(verify_ltmc(&p, &c, &LtmcWitness { alpha: 2, ys: vec![], choice: vec![] }), Ok(()));
        w.choice[0].0 = Labels::from([1]);
        assert_eq!(verify_ltmc(&p, &c, &w), Err(LtmcViolation::Compat { y: 0 }));
    }

    #[test]
    fn rejects_other_functors() {
        let v = json!({"functor": {"kind": "kripke", "ap": ["p"]}, "step": {"x0": {"labels": [], "succ": ["x0"]}}});
        let e = NondetCoalgebra::from_json(&v).unwrap_err();
        assert!(e.to_string().contains("linear-time requires stream functor"));
    }

    #[test]
    fn state_labelled_encoding() {
        let c = system(json!({"functor": {"kind": "stream", "ap": ["p"]},
            "step": {"x0": {"labels": ["p"], "succ": ["x0", "x1"]}, "x1": {"labels": [], "succ": ["x0"]}}}));
        assert_eq!(c.step[0], vec![(Labels::from([0]), 0), (Labels::from([0]), 1)]);
        assert_eq!(c.step[1], vec![(Labels::new(), 0)]);
    }

    #[test]
    fn normalize_lasso() {
        let a = Labels::from([0]);
        let b = Labels::new();
        let l = Lasso { stem: vec![a.clone(), b.clone()], cycle: vec![a.clone(), b.clone(), a.clone(), b.clone()] };
        assert_eq!(l.normalize(), Lasso { stem: vec![], cycle: vec![a, b] });
    }
}
