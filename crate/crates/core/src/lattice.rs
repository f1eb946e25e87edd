//! Finite complete lattices and fixpoint iteration.
//!
//! Powersets and Boolean-valued pointwise lattices are stored as bit vectors
//! over a carrier order fixed when the instance is built.

use std::fmt;
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use serde_json::{Map, Value};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Lattice {
    Bool2,
    Powerset(Vec<String>),
    Pointwise(Box<Lattice>, Vec<String>),
    Product(Vec<Lattice>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Elem {
    Bool(bool),
    Bits(FixedBitSet),
    Map(Vec<Elem>),
    Tuple(Vec<Elem>),
}

impl Elem {
    pub fn as_bool(&self) -> bool {
        match self {
            Elem::Bool(b) => *b,
            other => panic!("expected a Boolean element, got {other:?}"),
        }
    }

    pub fn as_bits(&self) -> &FixedBitSet {
        match self {
            Elem::Bits(b) => b,
            other => panic!("expected a bit-vector element, got {other:?}"),
        }
    }

    pub fn as_tuple(&self) -> &[Elem] {
        match self {
            Elem::Tuple(t) => t,
            other => panic!("expected a tuple element, got {other:?}"),
        }
    }

    pub fn bits_from(width: usize, ones: impl IntoIterator<Item = usize>) -> Elem {
        let mut b = FixedBitSet::with_capacity(width);
        for i in ones {
            b.insert(i);
        }
        Elem::Bits(b)
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Elem::Bool(true) => write!(f, "tt"),
            Elem::Bool(false) => write!(f, "ff"),
            Elem::Bits(b) => {
                let ones: Vec<String> = b.ones().map(|i| i.to_string()).collect();
                write!(f, "{{{}}}", ones.join(","))
            }
            Elem::Map(v) | Elem::Tuple(v) => {
                let parts: Vec<String> = v.iter().map(|e| e.to_string()).collect();
                write!(f, "({})", parts.join(", "))
            }
        }
    }
}

impl Lattice {
    pub fn powerset<S: ToString>(carrier: impl IntoIterator<Item = S>) -> Lattice {
        Lattice::Powerset(carrier.into_iter().map(|s| s.to_string()).collect())
    }

    pub fn pointwise<S: ToString>(base: Lattice, index: impl IntoIterator<Item = S>) -> Lattice {
        Lattice::Pointwise(Box::new(base), index.into_iter().map(|s| s.to_string()).collect())
    }

    fn bit_width(&self) -> Option<usize> {
        match self {
            Lattice::Powerset(s) => Some(s.len()),
            Lattice::Pointwise(b, i) if **b == Lattice::Bool2 => Some(i.len()),
            _ => None,
        }
    }

    /// Names of the bit positions for bit-vector instances.
    pub fn carrier(&self) -> Option<&[String]> {
        match self {
            Lattice::Powerset(s) => Some(s),
            Lattice::Pointwise(b, i) if **b == Lattice::Bool2 => Some(i),
            _ => None,
        }
    }

    pub fn bottom(&self) -> Elem {
        match self {
            Lattice::Bool2 => Elem::Bool(false),
            Lattice::Pointwise(base, idx) => match self.bit_width() {
                Some(w) => Elem::Bits(FixedBitSet::with_capacity(w)),
                None => Elem::Map(idx.iter().map(|_| base.bottom()).collect()),
            },
            Lattice::Powerset(s) => Elem::Bits(FixedBitSet::with_capacity(s.len())),
            Lattice::Product(fs) => Elem::Tuple(fs.iter().map(|f| f.bottom()).collect()),
        }
    }

    pub fn top(&self) -> Elem {
        match self {
            Lattice::Bool2 => Elem::Bool(true),
            Lattice::Pointwise(base, idx) => match self.bit_width() {
                Some(w) => {
                    let mut b = FixedBitSet::with_capacity(w);
                    b.insert_range(..);
                    Elem::Bits(b)
                }
                None => Elem::Map(idx.iter().map(|_| base.top()).collect()),
            },
            Lattice::Powerset(s) => {
                let mut b = FixedBitSet::with_capacity(s.len());
                b.insert_range(..);
                Elem::Bits(b)
            }
            Lattice::Product(fs) => Elem::Tuple(fs.iter().map(|f| f.top()).collect()),
        }
    }

    /// Checks that `e` has the payload shape of this instance.
    pub fn check(&self, e: &Elem) -> Result<()> {
        let bad = || Err(Error::Shape(format!("element {e} does not belong to {self:?}")));
        match (self, e) {
            (Lattice::Bool2, Elem::Bool(_)) => Ok(()),
            (_, Elem::Bits(b)) if self.bit_width() == Some(b.len()) => Ok(()),
            (Lattice::Pointwise(base, idx), Elem::Map(v)) if self.bit_width().is_none() => {
                if v.len() != idx.len() {
                    return bad();
                }
                v.iter().try_for_each(|x| base.check(x))
            }
            (Lattice::Product(fs), Elem::Tuple(v)) => {
                if v.len() != fs.len() {
                    return bad();
                }
                fs.iter().zip(v).try_for_each(|(f, x)| f.check(x))
            }
            _ => bad(),
        }
    }

    pub fn try_leq(&self, a: &Elem, b: &Elem) -> Result<bool> {
        self.check(a)?;
        self.check(b)?;
        Ok(leq(a, b))
    }

    pub fn join(&self, a: &Elem, b: &Elem) -> Elem {
        join(a, b)
    }

    pub fn meet(&self, a: &Elem, b: &Elem) -> Elem {
        meet(a, b)
    }

    pub fn join_all<'a>(&self, it: impl IntoIterator<Item = &'a Elem>) -> Elem {
        it.into_iter().fold(self.bottom(), |acc, x| join(&acc, x))
    }

    pub fn meet_all<'a>(&self, it: impl IntoIterator<Item = &'a Elem>) -> Elem {
        it.into_iter().fold(self.top(), |acc, x| meet(&acc, x))
    }

    pub fn asc_chain_height(&self) -> usize {
        match self {
            Lattice::Bool2 => 1,
            Lattice::Powerset(s) => s.len(),
            Lattice::Pointwise(b, i) => i.len() * b.asc_chain_height(),
            Lattice::Product(fs) => fs.iter().map(|f| f.asc_chain_height()).sum(),
        }
    }

    /// Number of elements, saturating at `usize::MAX`.
    pub fn size(&self) -> usize {
        match self {
            Lattice::Bool2 => 2,
            Lattice::Powerset(s) => pow_sat(2, s.len()),
            Lattice::Pointwise(b, i) => pow_sat(b.size(), i.len()),
            Lattice::Product(fs) => fs.iter().fold(1usize, |acc, f| acc.saturating_mul(f.size())),
        }
    }

    /// All elements, in a fixed order starting at ⊥. Intended for small instances.
    pub fn elements(&self) -> Vec<Elem> {
        match self {
            Lattice::Bool2 => vec![Elem::Bool(false), Elem::Bool(true)],
            _ if self.bit_width().is_some() => {
                let w = self.bit_width().unwrap();
                assert!(w < 24, "lattice too large to enumerate");
                (0u32..(1 << w))
                    .map(|m| Elem::bits_from(w, (0..w).filter(|i| m >> i & 1 == 1)))
                    .collect()
            }
            Lattice::Pointwise(base, idx) => {
                let parts = vec![base.elements(); idx.len()];
                cartesian(&parts).into_iter().map(Elem::Map).collect()
            }
            Lattice::Product(fs) => {
                let parts: Vec<Vec<Elem>> = fs.iter().map(|f| f.elements()).collect();
                cartesian(&parts).into_iter().map(Elem::Tuple).collect()
            }
            Lattice::Powerset(_) => unreachable!(),
        }
    }

    pub fn to_json(&self, e: &Elem) -> Value {
        match (self, e) {
            (_, Elem::Bool(b)) => Value::Bool(*b),
            (_, Elem::Bits(b)) => {
                let names = self.carrier().expect("bit-vector element needs a carrier");
                Value::Array(b.ones().map(|i| Value::String(names[i].clone())).collect())
            }
            (Lattice::Pointwise(base, idx), Elem::Map(v)) => {
                let mut m = Map::new();
                for (k, x) in idx.iter().zip(v) {
                    m.insert(k.clone(), base.to_json(x));
                }
                Value::Object(m)
            }
            (Lattice::Product(fs), Elem::Tuple(v)) => {
                Value::Array(fs.iter().zip(v).map(|(f, x)| f.to_json(x)).collect())
            }
            _ => panic!("element {e} does not belong to {self:?}"),
        }
    }

    pub fn from_json(&self, v: &Value) -> Result<Elem> {
        let bad = || Error::Parse(format!("cannot read {v} as an element of {self:?}"));
        match self {
            Lattice::Bool2 => v.as_bool().map(Elem::Bool).ok_or_else(bad),
            _ if self.bit_width().is_some() => {
                let names = self.carrier().unwrap();
                let arr = v.as_array().ok_or_else(bad)?;
                let mut b = FixedBitSet::with_capacity(names.len());
                for item in arr {
                    let s = item.as_str().ok_or_else(bad)?;
                    let i = names
                        .iter()
                        .position(|n| n == s)
                        .ok_or_else(|| Error::Parse(format!("unknown carrier element {s:?}")))?;
                    b.insert(i);
                }
                Ok(Elem::Bits(b))
            }
            Lattice::Pointwise(base, idx) => {
                let obj = v.as_object().ok_or_else(bad)?;
                let vals = idx
                    .iter()
                    .map(|k| base.from_json(obj.get(k).ok_or_else(bad)?))
                    .collect::<Result<_>>()?;
                Ok(Elem::Map(vals))
            }
            Lattice::Product(fs) => {
                let arr = v.as_array().ok_or_else(bad)?;
                if arr.len() != fs.len() {
                    return Err(bad());
                }
                let vals = fs.iter().zip(arr).map(|(f, x)| f.from_json(x)).collect::<Result<_>>()?;
                Ok(Elem::Tuple(vals))
            }
            Lattice::Powerset(_) => unreachable!(),
        }
    }
}

fn pow_sat(b: usize, e: usize) -> usize {
    (0..e).fold(1usize, |acc, _| acc.saturating_mul(b))
}

fn cartesian(parts: &[Vec<Elem>]) -> Vec<Vec<Elem>> {
    let mut out = vec![Vec::new()];
    for p in parts {
        let mut next = Vec::with_capacity(out.len() * p.len());
        for prefix in &out {
            for x in p {
                let mut v = prefix.clone();
                v.push(x.clone());
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// Lattice order. Panics when the payload shapes differ; see [`Lattice::try_leq`].
pub fn leq(a: &Elem, b: &Elem) -> bool {
    match (a, b) {
        (Elem::Bool(x), Elem::Bool(y)) => !x | y,
        (Elem::Bits(x), Elem::Bits(y)) if x.len() == y.len() => x.is_subset(y),
        (Elem::Map(x), Elem::Map(y)) | (Elem::Tuple(x), Elem::Tuple(y)) if x.len() == y.len() => {
            x.iter().zip(y).all(|(p, q)| leq(p, q))
        }
        _ => panic!("shape mismatch comparing {a} and {b}"),
    }
}

pub fn join(a: &Elem, b: &Elem) -> Elem {
    match (a, b) {
        (Elem::Bool(x), Elem::Bool(y)) => Elem::Bool(*x || *y),
        (Elem::Bits(x), Elem::Bits(y)) => {
            let mut r = x.clone();
            r.union_with(y);
            Elem::Bits(r)
        }
        (Elem::Map(x), Elem::Map(y)) => Elem::Map(x.iter().zip(y).map(|(p, q)| join(p, q)).collect()),
        (Elem::Tuple(x), Elem::Tuple(y)) => {
            Elem::Tuple(x.iter().zip(y).map(|(p, q)| join(p, q)).collect())
        }
        _ => panic!("shape mismatch joining {a} and {b}"),
    }
}

pub fn meet(a: &Elem, b: &Elem) -> Elem {
    match (a, b) {
        (Elem::Bool(x), Elem::Bool(y)) => Elem::Bool(*x && *y),
        (Elem::Bits(x), Elem::Bits(y)) => {
            let mut r = x.clone();
            r.intersect_with(y);
            Elem::Bits(r)
        }
        (Elem::Map(x), Elem::Map(y)) => Elem::Map(x.iter().zip(y).map(|(p, q)| meet(p, q)).collect()),
        (Elem::Tuple(x), Elem::Tuple(y)) => {
            Elem::Tuple(x.iter().zip(y).map(|(p, q)| meet(p, q)).collect())
        }
        _ => panic!("shape mismatch meeting {a} and {b}"),
    }
}

type EvalFn = dyn Fn(&[Elem]) -> Elem + Send + Sync;

/// A function on lattice elements that callers promise is monotone in every argument.
#[derive(Clone)]
pub struct MonotoneFn {
    pub arity: usize,
    pub descriptor: String,
    /// Argument positions the function reads; `None` means all of them.
    pub deps: Option<Vec<usize>>,
    eval: Arc<EvalFn>,
}

impl fmt::Debug for MonotoneFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MonotoneFn/{}({})", self.arity, self.descriptor)
    }
}

impl MonotoneFn {
    pub fn new(
        arity: usize,
        descriptor: impl Into<String>,
        eval: impl Fn(&[Elem]) -> Elem + Send + Sync + 'static,
    ) -> MonotoneFn {
        MonotoneFn { arity, descriptor: descriptor.into(), deps: None, eval: Arc::new(eval) }
    }

    /// Declares that only the arguments at `deps` are read.
    pub fn with_deps(mut self, deps: impl IntoIterator<Item = usize>) -> MonotoneFn {
        self.deps = Some(deps.into_iter().collect());
        self
    }

    pub fn depends_on(&self, j: usize) -> bool {
        self.deps.as_ref().map_or(true, |d| d.contains(&j))
    }

    pub fn unary(descriptor: impl Into<String>, f: impl Fn(&Elem) -> Elem + Send + Sync + 'static) -> MonotoneFn {
        MonotoneFn::new(1, descriptor, move |args| f(&args[0]))
    }

    pub fn call(&self, args: &[Elem]) -> Elem {
        debug_assert_eq!(args.len(), self.arity, "arity mismatch for {}", self.descriptor);
        (self.eval)(args)
    }
}

/// Least fixpoint by iteration from ⊥, with the number of applications of `f`.
pub fn lfp_counted(f: &dyn Fn(&Elem) -> Elem, l: &Lattice) -> (Elem, usize) {
    iterate(f, l.bottom())
}

pub fn gfp_counted(f: &dyn Fn(&Elem) -> Elem, l: &Lattice) -> (Elem, usize) {
    iterate(f, l.top())
}

fn iterate(f: &dyn Fn(&Elem) -> Elem, mut x: Elem) -> (Elem, usize) {
    let mut n = 0;
    loop {
        let y = f(&x);
        n += 1;
        if y == x {
            return (x, n);
        }
        x = y;
    }
}

pub fn lfp(f: &MonotoneFn, l: &Lattice) -> Elem {
    lfp_counted(&|x| f.call(std::slice::from_ref(x)), l).0
}

pub fn gfp(f: &MonotoneFn, l: &Lattice) -> Elem {
    gfp_counted(&|x| f.call(std::slice::from_ref(x)), l).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn small_lattices() -> Vec<Lattice> {
        vec![
            Lattice::Bool2,
            Lattice::powerset(["x0", "x1"]),
            Lattice::powerset(["a", "b", "c", "d"]),
            Lattice::pointwise(Lattice::Bool2, ["x0", "x1", "x2"]),
            Lattice::pointwise(Lattice::Product(vec![Lattice::Bool2, Lattice::Bool2]), ["i", "j"]),
            Lattice::Product(vec![Lattice::Bool2, Lattice::powerset(["x", "y"])]),
            Lattice::Product(vec![]),
        ]
    }

    #[test]
    fn order_examples() {
        assert!(leq(&Elem::Bool(false), &Elem::Bool(true)));
        let l = Lattice::powerset(["x0", "x1"]);
        let x0 = Elem::bits_from(2, [0]);
        assert!(l.try_leq(&x0, &Elem::bits_from(2, [0, 1])).unwrap());
        assert!(!l.try_leq(&x0, &Elem::bits_from(2, [1])).unwrap());
        assert!(l.try_leq(&x0, &Elem::Bool(true)).is_err());
    }

    #[test]
    #[should_panic]
    fn leq_panics_on_mismatch() {
        leq(&Elem::Bool(true), &Elem::bits_from(1, []));
    }

    #[test]
    fn complete_lattice_axioms_exhaustive() {
        for l in small_lattices() {
            let els = l.elements();
            assert!(els.len() <= 16);
            assert_eq!(els.len(), l.size());
            for a in &els {
                l.check(a).unwrap();
                assert!(leq(&l.bottom(), a) && leq(a, &l.top()));
                for b in &els {
                    let j = join(a, b);
                    let m = meet(a, b);
                    assert!(leq(a, &j) && leq(b, &j));
                    assert!(leq(&m, a) && leq(&m, b));
                    if leq(a, b) && leq(b, a) {
                        assert_eq!(a, b);
                    }
                    for c in &els {
                        if leq(a, b) && leq(b, c) {
                            assert!(leq(a, c));
                        }
                        if leq(a, c) && leq(b, c) {
                            assert!(leq(&j, c));
                        }
                        if leq(c, a) && leq(c, b) {
                            assert!(leq(c, &m));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn fixpoint_examples() {
        let id = MonotoneFn::unary("id", |x| x.clone());
        assert_eq!(lfp(&id, &Lattice::Bool2), Elem::Bool(false));
        assert_eq!(gfp(&id, &Lattice::Bool2), Elem::Bool(true));
        let tt = MonotoneFn::unary("tt", |_| Elem::Bool(true));
        let ff = MonotoneFn::unary("ff", |_| Elem::Bool(false));
        assert_eq!(lfp(&tt, &Lattice::Bool2), Elem::Bool(true));
        assert_eq!(gfp(&ff, &Lattice::Bool2), Elem::Bool(false));

        let l = Lattice::powerset(["x0", "x1"]);
        // {x0} together with the post-image under x0 -> x1
        let reach = MonotoneFn::unary("reach", |s| {
            let b = s.as_bits();
            let mut r = Elem::bits_from(2, [0]);
            if b.contains(0) {
                r = join(&r, &Elem::bits_from(2, [1]));
            }
            r
        });
        let (v, n) = lfp_counted(&|x| reach.call(std::slice::from_ref(x)), &l);
        assert_eq!(v, Elem::bits_from(2, [0, 1]));
        assert!(n <= l.asc_chain_height() + 1);
        // pre-image under x0 -> x1, x1 -> x0
        let pre = MonotoneFn::unary("pre", |s| {
            let b = s.as_bits();
            Elem::bits_from(2, [(0, 1), (1, 0)].into_iter().filter(|(_, t)| b.contains(*t)).map(|(s, _)| s))
        });
        assert_eq!(gfp(&pre, &l), Elem::bits_from(2, [0, 1]));
    }

    #[test]
    fn heights() {
        assert_eq!(Lattice::Bool2.asc_chain_height(), 1);
        assert_eq!(Lattice::powerset(["a", "b", "c", "d"]).asc_chain_height(), 4);
        assert_eq!(Lattice::pointwise(Lattice::Bool2, ["a", "b", "c"]).asc_chain_height(), 3);
        let p = Lattice::Product(vec![Lattice::Bool2, Lattice::powerset(["a", "b"])]);
        assert_eq!(p.asc_chain_height(), 3);
    }

    #[test]
    fn json_round_trip() {
        for l in small_lattices() {
            for e in l.elements() {
                let v = l.to_json(&e);
                assert_eq!(l.from_json(&v).unwrap(), e);
            }
        }
        let l = Lattice::powerset(["x0", "x1"]);
        assert_eq!(l.to_json(&Elem::bits_from(2, [1])), serde_json::json!(["x1"]));
        assert!(l.from_json(&serde_json::json!(["zz"])).is_err());
    }

    fn table_fn(l: &Lattice, table: Vec<usize>) -> impl Fn(&Elem) -> Elem {
        // Monotone closure of an arbitrary table: f(x) = join of table values at elements below x.
        let els = l.elements();
        let l2 = l.clone();
        move |x: &Elem| {
            let below = els.iter().enumerate().filter(|(_, e)| leq(e, x)).map(|(i, _)| &els[table[i] % els.len()]);
            l2.join_all(below)
        }
    }

    proptest! {
        #[test]
        fn fixpoints_are_extremal(which in 0usize..6, table in proptest::collection::vec(0usize..16, 16)) {
            let l = small_lattices()[which].clone();
            let f = table_fn(&l, table);
            let els = l.elements();
            let (mu, n1) = lfp_counted(&f, &l);
            let (nu, n2) = gfp_counted(&f, &l);
            prop_assert_eq!(&f(&mu), &mu);
            prop_assert_eq!(&f(&nu), &nu);
            prop_assert!(n1 <= l.asc_chain_height() + 1);
            prop_assert!(n2 <= l.asc_chain_height() + 1);
            for e in &els {
                if leq(&f(e), e) { prop_assert!(leq(&mu, e)); }
                if leq(e, &f(e)) { prop_assert!(leq(e, &nu)); }
            }
        }
    }
}
