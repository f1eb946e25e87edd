//! Behaviour functors, finite coalgebras and predicate liftings.

use std::collections::{BTreeMap, BTreeSet};

use fixedbitset::FixedBitSet;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::logic::{ModalOp, Signature};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FunctorInstance {
    /// Labels and a successor set.
    Kripke { ap: Vec<String> },
    /// One successor set per action.
    Lts { actions: Vec<String> },
    /// Upward-closed families of successor sets.
    MonNbhd,
    /// Successor multisets, multiplicities saturated at `cap`.
    Graded { cap: u32 },
    /// Labels and exactly one successor.
    Stream { ap: Vec<String> },
}

impl FunctorInstance {
    pub fn kind(&self) -> &'static str {
        match self {
            FunctorInstance::Kripke { .. } => "kripke",
            FunctorInstance::Lts { .. } => "lts",
            FunctorInstance::MonNbhd => "monnbhd",
            FunctorInstance::Graded { .. } => "graded",
            FunctorInstance::Stream { .. } => "stream",
        }
    }

    pub fn ap(&self) -> &[String] {
        match self {
            FunctorInstance::Kripke { ap } | FunctorInstance::Stream { ap } => ap,
            _ => &[],
        }
    }

    pub fn atom_index(&self, p: &str) -> Option<usize> {
        self.ap().iter().position(|a| a == p)
    }

    pub fn action_index(&self, a: &str) -> Option<usize> {
        match self {
            FunctorInstance::Lts { actions } => actions.iter().position(|b| b == a),
            _ => None,
        }
    }

    pub fn from_json(v: &Value) -> Result<FunctorInstance> {
        let kind = v.get("kind").and_then(Value::as_str).ok_or_else(|| Error::Parse("functor needs a kind".into()))?;
        let names = |key: &str| -> Result<Vec<String>> {
            let arr = v.get(key).and_then(Value::as_array).ok_or_else(|| Error::Parse(format!("{kind} functor needs {key:?}")))?;
            let out: Vec<String> = arr
                .iter()
                .map(|x| x.as_str().map(String::from).ok_or_else(|| Error::Parse(format!("{key} entries must be strings"))))
                .collect::<Result<_>>()?;
            let uniq: BTreeSet<&String> = out.iter().collect();
            if uniq.len() != out.len() {
                return Err(Error::Parse(format!("duplicate entries in {key}")));
            }
            Ok(out)
        };
        Ok(match kind {
            "kripke" => FunctorInstance::Kripke { ap: names("ap")? },
            "stream" => FunctorInstance::Stream { ap: names("ap")? },
            "lts" => {
                let actions = names("actions")?;
                if actions.is_empty() {
                    return Err(Error::Parse("lts functor needs at least one action".into()));
                }
                FunctorInstance::Lts { actions }
            }
            "monnbhd" => FunctorInstance::MonNbhd,
            "graded" => {
                let cap = v
                    .get("cap")
                    .and_then(Value::as_u64)
                    .and_then(|c| u32::try_from(c).ok())
                    .filter(|&c| c >= 1)
                    .ok_or_else(|| Error::Parse("graded functor needs a positive cap".into()))?;
                FunctorInstance::Graded { cap }
            }
            "coalition" => return Err(Error::Unsupported("unsupported functor: coalition".into())),
            other => return Err(Error::Parse(format!("unknown functor kind {other:?}"))),
        })
    }

    pub fn to_json(&self) -> Value {
        match self {
            FunctorInstance::Kripke { ap } => json!({"kind": "kripke", "ap": ap}),
            FunctorInstance::Stream { ap } => json!({"kind": "stream", "ap": ap}),
            FunctorInstance::Lts { actions } => json!({"kind": "lts", "actions": actions}),
            FunctorInstance::MonNbhd => json!({"kind": "monnbhd"}),
            FunctorInstance::Graded { cap } => json!({"kind": "graded", "cap": cap}),
        }
    }
}

impl Signature for FunctorInstance {
    fn is_atom(&self, name: &str) -> bool {
        self.atom_index(name).is_some()
    }

    fn check_op(&self, op: &ModalOp) -> std::result::Result<(), String> {
        let ok = match (self, op) {
            (FunctorInstance::Kripke { .. }, ModalOp::Box | ModalOp::Dia) => true,
            (FunctorInstance::Kripke { .. } | FunctorInstance::Stream { .. }, ModalOp::Atom(p)) => self.is_atom(p),
            (FunctorInstance::Lts { .. }, ModalOp::ActBox(a) | ModalOp::ActDia(a)) => {
                if self.action_index(a).is_none() {
                    return Err(format!("unknown action {a:?}"));
                }
                true
            }
            (FunctorInstance::MonNbhd, ModalOp::Box) => true,
            (FunctorInstance::Graded { cap }, ModalOp::GBox(k) | ModalOp::GDia(k)) => {
                if k >= cap {
                    return Err(format!("grade {k} must be below the multiplicity cap {cap}"));
                }
                true
            }
            (FunctorInstance::Stream { .. }, ModalOp::Next) => true,
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(format!("modality {} is not available for the {} functor", op.name(), self.kind()))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mult {
    Fin(u32),
    Inf,
}

impl Mult {
    fn add(self, other: Mult, cap: u32) -> Mult {
        match (self, other) {
            (Mult::Fin(a), Mult::Fin(b)) => Mult::Fin(a.saturating_add(b).min(cap)),
            _ => Mult::Inf,
        }
    }

    fn value(self) -> u64 {
        match self {
            Mult::Fin(n) => n as u64,
            Mult::Inf => u64::MAX,
        }
    }
}

/// An element of `F V` for one of the supported functors.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FValue<V> {
    Kripke { labels: BTreeSet<usize>, succ: Vec<V> },
    Lts { succ: Vec<Vec<V>> },
    MonNbhd { family: Vec<Vec<V>> },
    Graded { mult: Vec<(V, Mult)> },
    Stream { labels: BTreeSet<usize>, succ: V },
}

fn sorted<V: Ord>(mut v: Vec<V>) -> Vec<V> {
    v.sort();
    v.dedup();
    v
}

/// Keeps the ⊆-minimal sets of a family; each set must be sorted.
pub fn minimize_family<V: Ord + Clone>(family: Vec<Vec<V>>) -> Vec<Vec<V>> {
    let family = sorted(family.into_iter().map(sorted).collect());
    let subset = |a: &Vec<V>, b: &Vec<V>| a.iter().all(|x| b.binary_search(x).is_ok());
    let mut out: Vec<Vec<V>> = family
        .iter()
        .filter(|s| !family.iter().any(|t| t.len() < s.len() && subset(t, s)))
        .cloned()
        .collect();
    out.dedup();
    out
}

/// Applies `g` to every payload, merging duplicates as the functor demands.
pub fn fmap<V, W: Ord + Clone>(f: &FunctorInstance, g: impl Fn(&V) -> W, t: &FValue<V>) -> FValue<W> {
    match t {
        FValue::Kripke { labels, succ } => FValue::Kripke { labels: labels.clone(), succ: sorted(succ.iter().map(&g).collect()) },
        FValue::Lts { succ } => FValue::Lts { succ: succ.iter().map(|s| sorted(s.iter().map(&g).collect())).collect() },
        FValue::MonNbhd { family } => FValue::MonNbhd { family: minimize_family(family.iter().map(|s| s.iter().map(&g).collect()).collect()) },
        FValue::Graded { mult } => {
            let cap = match f {
                FunctorInstance::Graded { cap } => *cap,
                _ => u32::MAX,
            };
            let mut acc: BTreeMap<W, Mult> = BTreeMap::new();
            for (v, m) in mult {
                let e = acc.entry(g(v)).or_insert(Mult::Fin(0));
                *e = e.add(*m, cap);
            }
            FValue::Graded { mult: acc.into_iter().collect() }
        }
        FValue::Stream { labels, succ } => FValue::Stream { labels: labels.clone(), succ: g(succ) },
    }
}

/// A predicate lifting evaluated on Boolean-vector payloads.
pub trait Lifting {
    fn arity(&self) -> usize;
    fn lift(&self, f: &FunctorInstance, t: &FValue<Vec<bool>>) -> Result<bool>;
}

impl Lifting for ModalOp {
    fn arity(&self) -> usize {
        ModalOp::arity(self)
    }

    fn lift(&self, f: &FunctorInstance, t: &FValue<Vec<bool>>) -> Result<bool> {
        f.check_op(self).map_err(Error::Unsupported)?;
        let yes = |v: &Vec<bool>| v[0];
        let mismatch = || Error::Shape(format!("modality {} does not apply to this value", self.name()));
        Ok(match (self, t) {
            (ModalOp::Atom(p), FValue::Kripke { labels, .. } | FValue::Stream { labels, .. }) => {
                labels.contains(&f.atom_index(p).ok_or_else(mismatch)?)
            }
            (ModalOp::Box, FValue::Kripke { succ, .. }) => succ.iter().all(yes),
            (ModalOp::Dia, FValue::Kripke { succ, .. }) => succ.iter().any(yes),
            (ModalOp::ActBox(a), FValue::Lts { succ }) => succ.get(f.action_index(a).ok_or_else(mismatch)?).ok_or_else(mismatch)?.iter().all(yes),
            (ModalOp::ActDia(a), FValue::Lts { succ }) => succ.get(f.action_index(a).ok_or_else(mismatch)?).ok_or_else(mismatch)?.iter().any(yes),
            (ModalOp::Box, FValue::MonNbhd { family }) => family.iter().any(|s| s.iter().all(yes)),
            (ModalOp::GBox(k), FValue::Graded { mult }) => {
                let s = mult.iter().filter(|(v, _)| !v[0]).fold(0u64, |acc, (_, m)| acc.saturating_add(m.value()));
                s <= *k as u64
            }
            (ModalOp::GDia(k), FValue::Graded { mult }) => {
                let s = mult.iter().filter(|(v, _)| v[0]).fold(0u64, |acc, (_, m)| acc.saturating_add(m.value()));
                s > *k as u64
            }
            (ModalOp::Next, FValue::Stream { succ, .. }) => succ[0],
            _ => return Err(mismatch()),
        })
    }
}

pub fn lift_tilde(f: &FunctorInstance, lambda: &dyn Lifting, t: &FValue<Vec<bool>>) -> Result<bool> {
    lambda.lift(f, t)
}

/// The lifting applied to the columns `js` of an `m`-column payload.
pub fn lift_proj(f: &FunctorInstance, lambda: &dyn Lifting, js: &[usize], t: &FValue<Vec<bool>>) -> Result<bool> {
    if js.len() != lambda.arity() {
        return Err(Error::Shape(format!("{} projections for a modality of arity {}", js.len(), lambda.arity())));
    }
    let bad = std::cell::Cell::new(false);
    let projected = fmap(
        f,
        |v: &Vec<bool>| {
            js.iter()
                .map(|&j| {
                    bad.set(bad.get() || j >= v.len());
                    v.get(j).copied().unwrap_or(false)
                })
                .collect::<Vec<bool>>()
        },
        t,
    );
    if bad.get() {
        return Err(Error::Shape("projection index out of range".into()));
    }
    lambda.lift(f, &projected)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coalgebra {
    pub functor: FunctorInstance,
    pub states: Vec<String>,
    pub step: Vec<FValue<usize>>,
}

impl Coalgebra {
    pub fn n(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, s: &str) -> Option<usize> {
        self.states.iter().position(|x| x == s)
    }

    /// States satisfying the modality when its arguments hold on `preds`.
    pub fn modal_step(&self, lambda: &dyn Lifting, preds: &[FixedBitSet]) -> Result<FixedBitSet> {
        if preds.len() != lambda.arity() {
            return Err(Error::Shape(format!("{} predicates for a modality of arity {}", preds.len(), lambda.arity())));
        }
        let mut out = FixedBitSet::with_capacity(self.n());
        for (x, t) in self.step.iter().enumerate() {
            let tv = fmap(&self.functor, |y: &usize| preds.iter().map(|p| p.contains(*y)).collect::<Vec<bool>>(), t);
            if lambda.lift(&self.functor, &tv)? {
                out.insert(x);
            }
        }
        Ok(out)
    }

    pub fn from_json(v: &Value) -> Result<Coalgebra> {
        let functor = FunctorInstance::from_json(v.get("functor").ok_or_else(|| Error::Parse("system needs a functor".into()))?)?;
        let step = v.get("step").and_then(Value::as_object).ok_or_else(|| Error::Parse("system needs a step object".into()))?;
        let states = read_states(v, step)?;
        let idx = |s: &Value| -> Result<usize> {
            let name = s.as_str().ok_or_else(|| Error::Parse(format!("state reference {s} must be a string")))?;
            states.iter().position(|x| x == name).ok_or_else(|| Error::Parse(format!("undeclared state {name:?}")))
        };
        let labels = |x: &Value| -> Result<BTreeSet<usize>> {
            let Some(l) = x.get("labels") else { return Ok(BTreeSet::new()) };
            l.as_array()
                .ok_or_else(|| Error::Parse("labels must be a list".into()))?
                .iter()
                .map(|p| {
                    let p = p.as_str().ok_or_else(|| Error::Parse("labels must be strings".into()))?;
                    functor.atom_index(p).ok_or_else(|| Error::Parse(format!("unknown atomic proposition {p:?}")))
                })
                .collect()
        };
        let list = |x: &Value| -> Result<Vec<usize>> {
            x.as_array().ok_or_else(|| Error::Parse(format!("expected a list of states, got {x}")))?.iter().map(idx).collect()
        };
        let mut out = Vec::with_capacity(states.len());
        for s in &states {
            let x = step.get(s).ok_or_else(|| Error::Parse(format!("state {s:?} has no step")))?;
            let t = match &functor {
                FunctorInstance::Kripke { .. } => {
                    FValue::Kripke { labels: labels(x)?, succ: sorted(list(x.get("succ").unwrap_or(&json!([])))?) }
                }
                FunctorInstance::Stream { .. } => {
                    let succ = x.get("succ").ok_or_else(|| Error::Parse(format!("stream state {s:?} needs a successor")))?;
                    FValue::Stream { labels: labels(x)?, succ: idx(succ)? }
                }
                FunctorInstance::Lts { actions } => {
                    let obj = x.as_object().ok_or_else(|| Error::Parse("lts step must map actions to successor lists".into()))?;
                    if let Some(a) = obj.keys().find(|a| !actions.contains(a)) {
                        return Err(Error::Parse(format!("unknown action {a:?}")));
                    }
                    let succ = actions.iter().map(|a| obj.get(a).map_or(Ok(vec![]), |l| list(l).map(sorted))).collect::<Result<_>>()?;
                    FValue::Lts { succ }
                }
                FunctorInstance::MonNbhd => {
                    let fam = x.as_array().ok_or_else(|| Error::Parse("neighbourhood step must be a list of sets".into()))?;
                    FValue::MonNbhd { family: minimize_family(fam.iter().map(list).collect::<Result<_>>()?) }
                }
                FunctorInstance::Graded { cap } => {
                    let obj = x.as_object().ok_or_else(|| Error::Parse("graded step must map states to multiplicities".into()))?;
                    let mut mult = Vec::new();
                    for (y, m) in obj {
                        let m = match m {
                            Value::String(s) if s == "inf" => Mult::Inf,
                            _ => Mult::Fin(
                                m.as_u64().ok_or_else(|| Error::Parse(format!("bad multiplicity {m}")))?.min(*cap as u64) as u32,
                            ),
                        };
                        if m != Mult::Fin(0) {
                            mult.push((idx(&json!(y))?, m));
                        }
                    }
                    mult.sort();
                    FValue::Graded { mult }
                }
            };
            out.push(t);
        }
        Ok(Coalgebra { functor, states, step: out })
    }

    pub fn to_json(&self) -> Value {
        let name = |y: &usize| Value::String(self.states[*y].clone());
        let ap = self.functor.ap();
        let labels = |l: &BTreeSet<usize>| l.iter().map(|p| ap[*p].clone()).collect::<Vec<_>>();
        let mut step = Map::new();
        for (s, t) in self.states.iter().zip(&self.step) {
            let v = match t {
                FValue::Kripke { labels: l, succ } => json!({"labels": labels(l), "succ": succ.iter().map(name).collect::<Vec<_>>()}),
                FValue::Stream { labels: l, succ } => json!({"labels": labels(l), "succ": name(succ)}),
                FValue::Lts { succ } => {
                    let FunctorInstance::Lts { actions } = &self.functor else { unreachable!() };
                    let mut m = Map::new();
                    for (a, ys) in actions.iter().zip(succ) {
                        m.insert(a.clone(), Value::Array(ys.iter().map(name).collect()));
                    }
                    Value::Object(m)
                }
                FValue::MonNbhd { family } => Value::Array(family.iter().map(|s| Value::Array(s.iter().map(name).collect())).collect()),
                FValue::Graded { mult } => {
                    let mut m = Map::new();
                    for (y, k) in mult {
                        m.insert(self.states[*y].clone(), if let Mult::Fin(n) = k { json!(n) } else { json!("inf") });
                    }
                    Value::Object(m)
                }
            };
            step.insert(s.clone(), v);
        }
        json!({"functor": self.functor.to_json(), "states": self.states, "step": step})
    }
}

/// The declared state list, defaulting to the key order of `step`.
pub(crate) fn read_states(v: &Value, step: &Map<String, Value>) -> Result<Vec<String>> {
    let states: Vec<String> = match v.get("states") {
        Some(s) => s
            .as_array()
            .ok_or_else(|| Error::Parse("states must be a list".into()))?
            .iter()
            .map(|x| x.as_str().map(String::from).ok_or_else(|| Error::Parse("state names must be strings".into())))
            .collect::<Result<_>>()?,
        None => step.keys().cloned().collect(),
    };
    if states.is_empty() {
        return Err(Error::Parse("system has no states".into()));
    }
    let uniq: BTreeSet<&String> = states.iter().collect();
    if uniq.len() != states.len() {
        return Err(Error::Parse("duplicate state names".into()));
    }
    if let Some(k) = step.keys().find(|k| !states.contains(k)) {
        return Err(Error::Parse(format!("step given for undeclared state {k:?}")));
    }
    Ok(states)
}
