//! Prioritized ordinals and prioritized ordinal matrices (POMs).
//!
//! Ordinals are naturals. A prioritized ordinal has one counter per
//! μ-variable; the order for equation `i` drops the counters of μ-variables
//! with a smaller index and compares what is left lexicographically, the last
//! counter being the most significant.

use std::cmp::Ordering;

use serde_json::{json, Value};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PrioritySpec {
    pub m: usize,
    /// 1-based positions of the μ-variables, strictly increasing.
    pub mu: Vec<usize>,
}

impl PrioritySpec {
    pub fn new(m: usize, mu: Vec<usize>) -> Result<PrioritySpec> {
        if mu.windows(2).any(|w| w[0] >= w[1]) || mu.iter().any(|&i| i == 0 || i > m) {
            return Err(Error::Invalid(format!("bad μ positions {mu:?} for {m} equations")));
        }
        Ok(PrioritySpec { m, mu })
    }

    pub fn from_polarities(mu_flags: &[bool]) -> PrioritySpec {
        let mu = mu_flags.iter().enumerate().filter(|(_, f)| **f).map(|(i, _)| i + 1).collect();
        PrioritySpec { m: mu_flags.len(), mu }
    }

    pub fn k(&self) -> usize {
        self.mu.len()
    }

    pub fn is_mu(&self, i: usize) -> bool {
        self.mu.binary_search(&i).is_ok()
    }

    /// For a μ-equation `i`, its 1-based counter index `a` with `i = i_a`.
    pub fn mu_index(&self, i: usize) -> Option<usize> {
        self.mu.binary_search(&i).ok().map(|a| a + 1)
    }

    /// Number of leading counters ignored by the order of equation `i`.
    pub fn trunc_start(&self, i: usize) -> usize {
        self.mu.partition_point(|&j| j < i)
    }

    pub fn cmp(&self, i: usize, a: &[u32], b: &[u32]) -> Ordering {
        let s = self.trunc_start(i);
        for j in (s..self.k()).rev() {
            match a[j].cmp(&b[j]) {
                Ordering::Equal => {}
                o => return o,
            }
        }
        Ordering::Equal
    }

    pub fn leq(&self, i: usize, a: &[u32], b: &[u32]) -> bool {
        self.cmp(i, a, b) != Ordering::Greater
    }

    pub fn lt(&self, i: usize, a: &[u32], b: &[u32]) -> bool {
        self.cmp(i, a, b) == Ordering::Less
    }

    pub fn eq(&self, i: usize, a: &[u32], b: &[u32]) -> bool {
        self.cmp(i, a, b) == Ordering::Equal
    }

    pub fn truncate(&self, i: usize, a: &[u32]) -> Vec<u32> {
        let s = self.trunc_start(i);
        let mut v = a.to_vec();
        v[..s].iter_mut().for_each(|c| *c = 0);
        v
    }

    pub fn cmp_row(&self, i: usize, a: &PomRow, b: &PomRow) -> Ordering {
        match (a, b) {
            (PomRow::Fail, PomRow::Fail) => Ordering::Equal,
            (PomRow::Fail, _) => Ordering::Greater,
            (_, PomRow::Fail) => Ordering::Less,
            (PomRow::Row(x), PomRow::Row(y)) => self.cmp(i, x, y),
        }
    }

    pub fn row_leq(&self, i: usize, a: &PomRow, b: &PomRow) -> bool {
        self.cmp_row(i, a, b) != Ordering::Greater
    }

    pub fn truncate_row(&self, i: usize, r: &PomRow) -> PomRow {
        match r {
            PomRow::Fail => PomRow::Fail,
            PomRow::Row(v) => PomRow::Row(self.truncate(i, v)),
        }
    }

    pub fn zero(&self) -> Vec<u32> {
        vec![0; self.k()]
    }
}

/// `max_⪯i`: a failure row absorbs everything, otherwise the truncated maximum.
pub fn max_trunc<'a>(spec: &PrioritySpec, i: usize, rows: impl IntoIterator<Item = &'a PomRow>) -> Result<PomRow> {
    let mut best: Option<&PomRow> = None;
    for r in rows {
        if best.is_none_or(|b| spec.cmp_row(i, r, b) == Ordering::Greater) {
            best = Some(r);
        }
    }
    best.map(|b| spec.truncate_row(i, b)).ok_or_else(|| Error::Invalid("max over an empty set".into()))
}

/// `min_⪯i`: failure rows count only when nothing else is present.
pub fn min_trunc<'a>(spec: &PrioritySpec, i: usize, rows: impl IntoIterator<Item = &'a PomRow>) -> Result<PomRow> {
    let mut best: Option<&PomRow> = None;
    for r in rows {
        if best.is_none_or(|b| spec.cmp_row(i, r, b) == Ordering::Less) {
            best = Some(r);
        }
    }
    best.map(|b| spec.truncate_row(i, b)).ok_or_else(|| Error::Invalid("min over an empty set".into()))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PomRow {
    Row(Vec<u32>),
    Fail,
}

impl PomRow {
    pub fn is_fail(&self) -> bool {
        matches!(self, PomRow::Fail)
    }

    pub fn counters(&self) -> Option<&[u32]> {
        match self {
            PomRow::Row(v) => Some(v),
            PomRow::Fail => None,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            PomRow::Row(v) => json!(v),
            PomRow::Fail => json!("FAIL"),
        }
    }

    pub fn from_json(v: &Value, k: usize) -> Result<PomRow> {
        if v.as_str() == Some("FAIL") {
            return Ok(PomRow::Fail);
        }
        let arr = v.as_array().ok_or_else(|| Error::Parse(format!("bad POM row {v}")))?;
        let counters = arr
            .iter()
            .map(|c| c.as_u64().and_then(|c| u32::try_from(c).ok()))
            .collect::<Option<Vec<u32>>>()
            .ok_or_else(|| Error::Parse(format!("bad POM row {v}")))?;
        if counters.len() != k {
            return Err(Error::Shape(format!("POM row {v} should have {k} counters")));
        }
        Ok(PomRow::Row(counters))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pom {
    pub rows: Vec<PomRow>,
    pub bound: u32,
}

impl Pom {
    pub fn check(&self, spec: &PrioritySpec) -> Result<()> {
        if self.rows.len() != spec.m {
            return Err(Error::Shape(format!("POM has {} rows, expected {}", self.rows.len(), spec.m)));
        }
        for r in &self.rows {
            if let PomRow::Row(v) = r {
                if v.len() != spec.k() {
                    return Err(Error::Shape(format!("POM row has {} counters, expected {}", v.len(), spec.k())));
                }
                if v.iter().any(|&c| c > self.bound) {
                    return Err(Error::Shape(format!("POM counter exceeds bound {}", self.bound)));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        json!({"rows": self.rows.iter().map(PomRow::to_json).collect::<Vec<_>>(), "bound": self.bound})
    }

    pub fn from_json(v: &Value, k: usize) -> Result<Pom> {
        let rows = v
            .get("rows")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("POM needs a rows array".into()))?
            .iter()
            .map(|r| PomRow::from_json(r, k))
            .collect::<Result<Vec<_>>>()?;
        let bound = v
            .get("bound")
            .and_then(Value::as_u64)
            .and_then(|b| u32::try_from(b).ok())
            .ok_or_else(|| Error::Parse("POM needs a numeric bound".into()))?;
        Ok(Pom { rows, bound })
    }
}

/// Reads a POM as a Boolean vector at `alpha`: entry `i` holds iff row `i`
/// is finite and lies ⪯_i-below `alpha`.
pub fn eval_prime(spec: &PrioritySpec, alpha: &[u32], pom: &[PomRow]) -> Vec<bool> {
    pom.iter()
        .enumerate()
        .map(|(idx, r)| match r {
            PomRow::Fail => false,
            PomRow::Row(v) => spec.leq(idx + 1, v, alpha),
        })
        .collect()
}

/// All counter vectors in `[0, bound]^k`, in increasing lexicographic order
/// with the last counter most significant.
pub fn all_ordinals(k: usize, bound: u32) -> impl Iterator<Item = Vec<u32>> {
    let total = (bound as u64 + 1).pow(k as u32);
    (0..total).map(move |mut n| {
        let mut v = vec![0u32; k];
        for c in v.iter_mut() {
            *c = (n % (bound as u64 + 1)) as u32;
            n /= bound as u64 + 1;
        }
        v
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn e0() -> PrioritySpec {
        PrioritySpec::new(5, vec![1, 3, 4]).unwrap()
    }

    const A: [u32; 3] = [9, 2, 2];
    const B: [u32; 3] = [0, 3, 2];

    #[test]
    fn truncated_orders_of_the_running_example() {
        let s = e0();
        assert!(s.leq(1, &A, &B) && s.lt(1, &A, &B));
        assert!(s.lt(2, &A, &B) && !s.leq(2, &B, &A));
        assert!(s.lt(3, &A, &B));
        assert!(s.eq(4, &A, &B));
        assert!(s.eq(5, &A, &B));
        for i in 1..=5 {
            assert!(s.leq(i, &A, &A));
            assert!(!s.lt(i, &A, &A));
        }
        assert_eq!(s.trunc_start(4), 2);
        assert_eq!(s.trunc_start(5), 3);
    }

    #[test]
    fn max_and_min() {
        let s = e0();
        let r1 = PomRow::Row(vec![1, 2, 3]);
        let r2 = PomRow::Row(vec![3, 4, 1]);
        assert_eq!(max_trunc(&s, 3, [&r1, &r2]).unwrap(), PomRow::Row(vec![0, 2, 3]));
        assert_eq!(min_trunc(&s, 3, [&r1, &r2]).unwrap(), PomRow::Row(vec![0, 4, 1]));
        assert_eq!(max_trunc(&s, 3, [&r1, &PomRow::Fail]).unwrap(), PomRow::Fail);
        assert_eq!(min_trunc(&s, 3, [&PomRow::Fail, &PomRow::Fail]).unwrap(), PomRow::Fail);
        assert_eq!(min_trunc(&s, 3, [&PomRow::Fail, &r1]).unwrap(), PomRow::Row(vec![0, 2, 3]));
        assert_eq!(max_trunc(&s, 1, [&r1]).unwrap(), r1);
        assert!(max_trunc(&s, 1, []).is_err());
        assert!(min_trunc(&s, 1, []).is_err());
    }

    #[test]
    fn eval_prime_examples() {
        let s = e0();
        let zero = vec![PomRow::Row(vec![0, 0, 0]); 5];
        assert_eq!(eval_prime(&s, &[4, 1, 7], &zero), vec![true; 5]);
        let mut p = zero.clone();
        p[1] = PomRow::Row(A.to_vec());
        p[2] = PomRow::Fail;
        let ev = eval_prime(&s, &B, &p);
        assert!(ev[1]);
        assert!(!ev[2]);
    }

    #[test]
    fn empty_spec() {
        let s = PrioritySpec::new(2, vec![]).unwrap();
        assert_eq!(s.k(), 0);
        assert!(s.eq(1, &[], &[]));
        assert_eq!(all_ordinals(0, 3).count(), 1);
        assert_eq!(max_trunc(&s, 1, [&PomRow::Row(vec![])]).unwrap(), PomRow::Row(vec![]));
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(PrioritySpec::new(3, vec![2, 2]).is_err());
        assert!(PrioritySpec::new(3, vec![0]).is_err());
        assert!(PrioritySpec::new(3, vec![4]).is_err());
    }

    #[test]
    fn preorder_laws_exhaustive() {
        for mu in [vec![1, 2, 3], vec![2, 4, 5], vec![1, 5], vec![3]] {
            let s = PrioritySpec::new(5, mu).unwrap();
            let all: Vec<Vec<u32>> = all_ordinals(s.k(), 3).collect();
            for i in 1..=5 {
                for a in &all {
                    assert!(s.leq(i, a, a));
                    for b in &all {
                        assert!(s.leq(i, a, b) || s.leq(i, b, a));
                        for c in &all {
                            if s.leq(i, a, b) && s.leq(i, b, c) {
                                assert!(s.leq(i, a, c));
                            }
                        }
                        for j in 1..=5 {
                            if s.trunc_start(j) >= s.trunc_start(i) && s.leq(i, a, b) {
                                assert!(s.leq(j, a, b));
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn enumeration_follows_the_order() {
        let s = PrioritySpec::new(3, vec![1, 2, 3]).unwrap();
        let all: Vec<Vec<u32>> = all_ordinals(3, 2).collect();
        for w in all.windows(2) {
            assert!(s.lt(1, &w[0], &w[1]));
        }
    }

    fn row_strategy(k: usize) -> impl Strategy<Value = PomRow> {
        prop_oneof![
            1 => Just(PomRow::Fail),
            4 => proptest::collection::vec(0u32..4, k).prop_map(PomRow::Row),
        ]
    }

    proptest! {
        #[test]
        fn max_min_are_bounds(i in 1usize..=5, rows in proptest::collection::vec(row_strategy(3), 1..6)) {
            let s = e0();
            let mx = max_trunc(&s, i, &rows).unwrap();
            let mn = min_trunc(&s, i, &rows).unwrap();
            prop_assert!(rows.iter().all(|r| s.row_leq(i, r, &mx)));
            prop_assert!(rows.iter().any(|r| s.cmp_row(i, r, &mx) == Ordering::Equal));
            prop_assert!(rows.iter().any(|r| s.cmp_row(i, r, &mn) == Ordering::Equal));
            let finite: Vec<_> = rows.iter().filter(|r| !r.is_fail()).collect();
            if finite.is_empty() {
                prop_assert!(mn.is_fail());
            } else {
                prop_assert!(finite.iter().all(|r| s.row_leq(i, &mn, r)));
            }
        }

        #[test]
        fn eval_prime_is_antitone_and_monotone(
            rows in proptest::collection::vec(row_strategy(3), 5),
            idx in 0usize..5,
            bump in 0u32..3,
            a in proptest::collection::vec(0u32..4, 3),
            b in proptest::collection::vec(0u32..4, 3),
        ) {
            let s = e0();
            let ev = eval_prime(&s, &a, &rows);
            let mut bigger = rows.clone();
            bigger[idx] = match &rows[idx] {
                PomRow::Fail => PomRow::Fail,
                PomRow::Row(v) => {
                    let mut v = v.clone();
                    let last = v.len() - 1;
                    v[last] += bump;
                    PomRow::Row(v)
                }
            };
            let ev2 = eval_prime(&s, &a, &bigger);
            for i in 0..5 {
                prop_assert!(!ev2[i] || ev[i]);
            }
            let evb = eval_prime(&s, &b, &rows);
            for i in 0..5 {
                if s.leq(i + 1, &a, &b) && ev[i] {
                    prop_assert!(evb[i]);
                }
            }
        }
    }
}
