//! Parity games: loading, solving by progress-measure lifting, the induced
//! equational system and conversions between the two kinds of measures.

use std::collections::HashMap;
use std::fmt;

use fixedbitset::FixedBitSet;
use serde_json::{Map, Value};

use crate::eqsys::{verify_progress_measure, EquationalSystem, Polarity, ProgressMeasure};
use crate::error::{Error, Result};
use crate::lattice::{Elem, Lattice, MonotoneFn};
use crate::priord::{PomRow, PrioritySpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Player {
    Even,
    Odd,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParityGame {
    /// External identifiers, in load order.
    pub ids: Vec<u64>,
    pub names: Vec<Option<String>>,
    pub owner: Vec<Player>,
    /// Priorities in `1..=d`.
    pub priority: Vec<u32>,
    pub succ: Vec<Vec<usize>>,
    /// Even maximum priority.
    pub d: u32,
}

impl ParityGame {
    /// Validates and pads `d` to an even number. Identifiers are `0..n`.
    pub fn new(owner: Vec<Player>, priority: Vec<u32>, succ: Vec<Vec<usize>>) -> Result<ParityGame> {
        let n = owner.len();
        let ids = (0..n as u64).collect();
        ParityGame::with_ids(ids, vec![None; n], owner, priority, succ)
    }

    fn with_ids(ids: Vec<u64>, names: Vec<Option<String>>, owner: Vec<Player>, priority: Vec<u32>, succ: Vec<Vec<usize>>) -> Result<ParityGame> {
        let n = owner.len();
        if n == 0 {
            return Err(Error::Invalid("a parity game needs at least one position".into()));
        }
        if priority.len() != n || succ.len() != n {
            return Err(Error::Shape("owner, priority and successor lists differ in length".into()));
        }
        if let Some(x) = priority.iter().position(|&p| p == 0) {
            return Err(Error::Invalid(format!("position {} has priority 0", ids[x])));
        }
        for (x, ys) in succ.iter().enumerate() {
            if ys.is_empty() {
                return Err(Error::Invalid(format!("position {} has no successor", ids[x])));
            }
            if ys.iter().any(|&y| y >= n) {
                return Err(Error::Invalid(format!("position {} has a dangling successor", ids[x])));
            }
        }
        let top = *priority.iter().max().expect("nonempty");
        let d = top + top % 2;
        let succ = succ
            .into_iter()
            .map(|mut ys| {
                ys.sort_unstable();
                ys.dedup();
                ys
            })
            .collect();
        Ok(ParityGame { ids, names, owner, priority, succ, d })
    }

    pub fn n(&self) -> usize {
        self.owner.len()
    }

    /// One counter per odd priority; equation `i` is priority `i`.
    pub fn spec(&self) -> PrioritySpec {
        PrioritySpec::from_polarities(&(1..=self.d).map(|i| i % 2 == 1).collect::<Vec<_>>())
    }

    /// `n_i`, the number of positions of priority `i`, indexed from 1.
    pub fn count(&self, i: u32) -> u32 {
        self.priority.iter().filter(|&&p| p == i).count() as u32
    }

    /// Counter bounds `n_1, n_3, ..., n_{d-1}`.
    pub fn bounds(&self) -> Vec<u32> {
        (1..=self.d).step_by(2).map(|i| self.count(i)).collect()
    }

    pub fn index_of(&self, id: u64) -> Option<usize> {
        self.ids.iter().position(|&x| x == id)
    }

    pub fn to_pgsolver(&self) -> String {
        let max = self.ids.iter().max().copied().unwrap_or(0);
        let mut out = format!("parity {max};\n");
        for x in 0..self.n() {
            let succ: Vec<String> = self.succ[x].iter().map(|&y| self.ids[y].to_string()).collect();
            let owner = if self.owner[x] == Player::Even { 0 } else { 1 };
            out.push_str(&format!("{} {} {} {}", self.ids[x], self.priority[x], owner, succ.join(",")));
            if let Some(name) = &self.names[x] {
                out.push_str(&format!(" \"{name}\""));
            }
            out.push_str(";\n");
        }
        out
    }
}

/// Splits on `;` outside double quotes.
fn statements(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    for ch in text.chars() {
        match ch {
            '"' => {
                quoted = !quoted;
                cur.push(ch);
            }
            ';' if !quoted => out.push(std::mem::take(&mut cur)),
            _ => cur.push(ch),
        }
    }
    out.push(cur);
    out.into_iter().map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

/// Reads the PGSolver text format. Priority 0 is admitted by shifting every
/// priority up by two.
pub fn parse_pgsolver(text: &str) -> Result<ParityGame> {
    let bad = |s: &str, why: &str| Error::Parse(format!("{why} in {s:?}"));
    let mut rows: Vec<(u64, u32, Player, Vec<u64>, Option<String>)> = Vec::new();
    for stmt in statements(text) {
        let (head, name) = match stmt.find('"') {
            Some(q) => {
                let rest = &stmt[q + 1..];
                let end = rest.rfind('"').ok_or_else(|| bad(&stmt, "unterminated name"))?;
                (stmt[..q].trim(), Some(rest[..end].to_string()))
            }
            None => (stmt.as_str(), None),
        };
        let toks: Vec<&str> = head.split_whitespace().collect();
        if matches!(toks.first(), Some(&"parity") | Some(&"start")) {
            if toks.len() != 2 || toks[1].parse::<u64>().is_err() {
                return Err(bad(&stmt, "malformed header"));
            }
            continue;
        }
        if toks.len() != 4 {
            return Err(bad(&stmt, "expected `<id> <priority> <owner> <successors>`"));
        }
        let id = toks[0].parse::<u64>().map_err(|_| bad(&stmt, "bad identifier"))?;
        let pr = toks[1].parse::<u32>().map_err(|_| bad(&stmt, "bad priority"))?;
        let owner = match toks[2] {
            "0" => Player::Even,
            "1" => Player::Odd,
            _ => return Err(bad(&stmt, "owner must be 0 or 1")),
        };
        let succ = toks[3]
            .split(',')
            .map(|s| s.trim().parse::<u64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| bad(&stmt, "bad successor list"))?;
        rows.push((id, pr, owner, succ, name));
    }
    let mut index = HashMap::new();
    for (x, r) in rows.iter().enumerate() {
        if index.insert(r.0, x).is_some() {
            return Err(Error::Parse(format!("position {} declared twice", r.0)));
        }
    }
    let shift = if rows.iter().any(|r| r.1 == 0) { 2 } else { 0 };
    let mut succ = Vec::with_capacity(rows.len());
    for r in &rows {
        let ys = r
            .3
            .iter()
            .map(|y| index.get(y).copied().ok_or_else(|| Error::Parse(format!("position {} has dangling successor {y}", r.0))))
            .collect::<Result<Vec<_>>>()?;
        succ.push(ys);
    }
    ParityGame::with_ids(
        rows.iter().map(|r| r.0).collect(),
        rows.iter().map(|r| r.4.clone()).collect(),
        rows.iter().map(|r| r.2).collect(),
        rows.iter().map(|r| r.1 + shift).collect(),
        succ,
    )
}

/// A measure per position: `d/2` counters or failure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParityPm {
    pub q: Vec<PomRow>,
}

impl ParityPm {
    pub fn winners(&self) -> FixedBitSet {
        let mut w = FixedBitSet::with_capacity(self.q.len());
        self.q.iter().enumerate().filter(|(_, r)| !r.is_fail()).for_each(|(x, _)| w.insert(x));
        w
    }

    pub fn to_json(&self, g: &ParityGame) -> Value {
        let mut m = Map::new();
        for (x, r) in self.q.iter().enumerate() {
            m.insert(g.ids[x].to_string(), r.to_json());
        }
        serde_json::json!({ "q": m })
    }

    pub fn from_json(v: &Value, g: &ParityGame) -> Result<ParityPm> {
        let obj = v.get("q").and_then(Value::as_object).ok_or_else(|| Error::Parse("certificate needs a q object".into()))?;
        let k = g.bounds().len();
        let mut q = vec![None; g.n()];
        for (key, val) in obj {
            let x = key.parse::<u64>().ok().and_then(|id| g.index_of(id)).ok_or_else(|| Error::Shape(format!("unknown position {key:?}")))?;
            q[x] = Some(PomRow::from_json(val, k)?);
        }
        let q = q
            .into_iter()
            .enumerate()
            .map(|(x, r)| r.ok_or_else(|| Error::Shape(format!("certificate lacks position {}", g.ids[x]))))
            .collect::<Result<_>>()?;
        Ok(ParityPm { q })
    }
}

/// The least value that is ⪰ (or ≻ when `strict`) `r` under the order of
/// priority `i`, with counters bounded by `bounds`; failure if none exists.
fn prog(spec: &PrioritySpec, bounds: &[u32], i: usize, r: &PomRow, strict: bool) -> PomRow {
    let PomRow::Row(v) = r else { return PomRow::Fail };
    let s = spec.trunc_start(i);
    let mut v = spec.truncate(i, v);
    if !strict {
        return PomRow::Row(v);
    }
    for j in s..v.len() {
        if v[j] < bounds[j] {
            v[j] += 1;
            v[s..j].iter_mut().for_each(|c| *c = 0);
            return PomRow::Row(v);
        }
    }
    PomRow::Fail
}

/// Even's winning region with the least parity progress measure, by lifting
/// positions in identifier order until nothing changes.
pub fn solve_parity(g: &ParityGame) -> (FixedBitSet, ParityPm) {
    let spec = g.spec();
    let bounds = g.bounds();
    let mut q = vec![PomRow::Row(spec.zero()); g.n()];
    let mut order: Vec<usize> = (0..g.n()).collect();
    order.sort_by_key(|&x| g.ids[x]);
    loop {
        let mut changed = false;
        for &x in &order {
            let i = g.priority[x] as usize;
            let strict = i % 2 == 1;
            let cands = g.succ[x].iter().map(|&y| prog(&spec, &bounds, i, &q[y], strict));
            let best = match g.owner[x] {
                Player::Even => cands.min_by(|a, b| spec.cmp_row(i, a, b)),
                Player::Odd => cands.max_by(|a, b| spec.cmp_row(i, a, b)),
            }
            .expect("every position has a successor");
            if spec.cmp_row(i, &best, &q[x]) == std::cmp::Ordering::Greater {
                q[x] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let pm = ParityPm { q };
    (pm.winners(), pm)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParityViolation {
    Shape(String),
    Bound { position: u64, counter: usize },
    Progress { position: u64 },
}

impl fmt::Display for ParityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParityViolation::Shape(s) => write!(f, "shape: {s}"),
            ParityViolation::Bound { position, counter } => write!(f, "counter {counter} of position {position} exceeds its bound"),
            ParityViolation::Progress { position } => write!(f, "no admissible successor at position {position}"),
        }
    }
}

pub fn verify_parity_pm(g: &ParityGame, pm: &ParityPm) -> std::result::Result<(), ParityViolation> {
    let spec = g.spec();
    let bounds = g.bounds();
    if pm.q.len() != g.n() {
        return Err(ParityViolation::Shape(format!("{} values for {} positions", pm.q.len(), g.n())));
    }
    for (x, r) in pm.q.iter().enumerate() {
        let PomRow::Row(v) = r else { continue };
        if v.len() != bounds.len() {
            return Err(ParityViolation::Shape(format!("position {} has {} counters, expected {}", g.ids[x], v.len(), bounds.len())));
        }
        if let Some(a) = v.iter().zip(&bounds).position(|(c, b)| c > b) {
            return Err(ParityViolation::Bound { position: g.ids[x], counter: a + 1 });
        }
        let i = g.priority[x] as usize;
        let ok = |y: &usize| match i % 2 {
            1 => spec.cmp_row(i, r, &pm.q[*y]) == std::cmp::Ordering::Greater,
            _ => spec.row_leq(i, &pm.q[*y], r),
        };
        let fine = match g.owner[x] {
            Player::Even => g.succ[x].iter().any(ok),
            Player::Odd => g.succ[x].iter().all(ok),
        };
        if !fine {
            return Err(ParityViolation::Progress { position: g.ids[x] });
        }
    }
    Ok(())
}

/// The induced equational system: one variable per priority, μ for odd and
/// ν for even. Every variable ranges over subsets of all positions; that of
/// priority `i` only ever contains positions of priority `i`.
pub fn game_to_eqsys(g: &ParityGame) -> EquationalSystem {
    let n = g.n();
    let lat = Lattice::pointwise(Lattice::Bool2, g.ids.iter().map(|id| id.to_string()));
    let eqs = (1..=g.d)
        .map(|i| {
            let rows: Vec<(usize, Player, Vec<(usize, usize)>)> = (0..n)
                .filter(|&x| g.priority[x] == i)
                .map(|x| (x, g.owner[x], g.succ[x].iter().map(|&y| (g.priority[y] as usize - 1, y)).collect()))
                .collect();
            let f = MonotoneFn::new(g.d as usize, format!("priority {i}"), move |u| {
                let mut out = FixedBitSet::with_capacity(n);
                for (x, owner, ys) in &rows {
                    let has = |&(j, y): &(usize, usize)| u[j].as_bits().contains(y);
                    let v = match owner {
                        Player::Even => ys.iter().any(has),
                        Player::Odd => ys.iter().all(has),
                    };
                    out.set(*x, v);
                }
                Elem::Bits(out)
            });
            (if i % 2 == 1 { Polarity::Mu } else { Polarity::Nu }, f)
        })
        .collect();
    EquationalSystem::new(lat, eqs).expect("one function per priority")
}

/// Positions marked true in their own priority's component of `values`.
pub fn winners_from_solution(g: &ParityGame, values: &[Elem]) -> FixedBitSet {
    let mut w = FixedBitSet::with_capacity(g.n());
    for x in 0..g.n() {
        if values[g.priority[x] as usize - 1].as_bits().contains(x) {
            w.insert(x);
        }
    }
    w
}

/// The extended progress measure with box `n_1, n_3, ...` in which a position
/// of priority `i` belongs to `p_i(α)` iff its measure is ⪯_i α.
pub fn pm_to_eq_pm(g: &ParityGame, sys: &EquationalSystem, pm: &ParityPm) -> Result<ProgressMeasure> {
    verify_parity_pm(g, pm).map_err(|v| Error::Invalid(format!("not a parity progress measure: {v}")))?;
    let spec = g.spec();
    let mut p = ProgressMeasure::bottom(sys, g.bounds());
    for idx in 0..p.box_size() {
        let alpha = p.unflat(idx);
        for x in 0..g.n() {
            let i = g.priority[x] as usize;
            if let PomRow::Row(v) = &pm.q[x] {
                if spec.leq(i, v, &alpha) {
                    let Elem::Bits(b) = &mut p.approx[i - 1][idx] else { unreachable!() };
                    b.insert(x);
                }
            }
        }
    }
    Ok(p)
}

/// Reads a parity progress measure off a verified progress measure: each
/// position gets the least counters at which it is marked. If that reading
/// violates the bounds or the progress conditions, the least measure from
/// [`solve_parity`] is returned instead; it covers every position the
/// progress measure marks, by soundness.
pub fn eq_pm_to_parity_pm(g: &ParityGame, sys: &EquationalSystem, p: &ProgressMeasure) -> Result<ParityPm> {
    let direct = eq_pm_reading(g, sys, p)?;
    if verify_parity_pm(g, &direct).is_ok() {
        return Ok(direct);
    }
    Ok(solve_parity(g).1)
}

/// Marks each position with the lexicographically least box point at which
/// its priority's approximant contains it. Not always a parity measure; see
/// [`eq_pm_to_parity_pm`].
pub fn eq_pm_reading(g: &ParityGame, sys: &EquationalSystem, p: &ProgressMeasure) -> Result<ParityPm> {
    verify_progress_measure(sys, p, true).map_err(|v| Error::Invalid(format!("not a progress measure: {v}")))?;
    let spec = g.spec();
    let mut q = vec![PomRow::Fail; g.n()];
    for idx in 0..p.box_size() {
        let alpha = p.unflat(idx);
        for x in 0..g.n() {
            let i = g.priority[x] as usize;
            if p.approx[i - 1][idx].as_bits().contains(x) {
                let cand = PomRow::Row(alpha.clone());
                if spec.cmp_row(1, &cand, &q[x]) == std::cmp::Ordering::Less {
                    q[x] = cand;
                }
            }
        }
    }
    Ok(ParityPm { q })
}

/// Even's winning region by enumerating even's positional strategies; odd's
/// best reply is a reachable cycle whose top priority is odd.
pub fn brute_force_winners(g: &ParityGame) -> FixedBitSet {
    let n = g.n();
    let evens: Vec<usize> = (0..n).filter(|&x| g.owner[x] == Player::Even).collect();
    let mut won = FixedBitSet::with_capacity(n);
    let mut choice = vec![0usize; evens.len()];
    loop {
        let edges: Vec<Vec<usize>> = (0..n)
            .map(|x| match evens.iter().position(|&e| e == x) {
                Some(k) => vec![g.succ[x][choice[k]]],
                None => g.succ[x].clone(),
            })
            .collect();
        let bad = odd_cycle_heads(g, &edges);
        for x in 0..n {
            if !won.contains(x) && !reach(&edges, x).ones().any(|y| bad.contains(y)) {
                won.insert(x);
            }
        }
        let mut k = 0;
        while k < evens.len() {
            choice[k] += 1;
            if choice[k] < g.succ[evens[k]].len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
        if k == evens.len() {
            return won;
        }
    }
}

fn reach(edges: &[Vec<usize>], from: usize) -> FixedBitSet {
    let mut seen = FixedBitSet::with_capacity(edges.len());
    let mut stack = vec![from];
    seen.insert(from);
    while let Some(x) = stack.pop() {
        for &y in &edges[x] {
            if !seen.put(y) {
                stack.push(y);
            }
        }
    }
    seen
}

/// Positions of odd priority lying on a cycle that avoids higher priorities.
fn odd_cycle_heads(g: &ParityGame, edges: &[Vec<usize>]) -> FixedBitSet {
    let n = g.n();
    let mut heads = FixedBitSet::with_capacity(n);
    for v in (0..n).filter(|&v| g.priority[v] % 2 == 1) {
        let low: Vec<Vec<usize>> = (0..n)
            .map(|x| if g.priority[x] <= g.priority[v] { edges[x].iter().copied().filter(|&y| g.priority[y] <= g.priority[v]).collect() } else { vec![] })
            .collect();
        if edges[v].iter().any(|&y| g.priority[y] <= g.priority[v] && reach(&low, y).contains(v)) {
            heads.insert(v);
        }
    }
    heads
}

/// Even's winning region in the game that ends when a position repeats, the
/// winner being decided by the top priority on the closed cycle. Explores
/// every history, so it does not presuppose positional strategies.
pub fn first_cycle_winners(g: &ParityGame) -> FixedBitSet {
    fn go(g: &ParityGame, path: &mut Vec<usize>, x: usize) -> bool {
        if let Some(at) = path.iter().position(|&y| y == x) {
            return path[at..].iter().map(|&y| g.priority[y]).max().expect("nonempty") % 2 == 0;
        }
        path.push(x);
        let mut moves = g.succ[x].iter();
        let res = match g.owner[x] {
            Player::Even => moves.any(|&y| go(g, path, y)),
            Player::Odd => moves.all(|&y| go(g, path, y)),
        };
        path.pop();
        res
    }
    let mut w = FixedBitSet::with_capacity(g.n());
    for x in 0..g.n() {
        w.set(x, go(g, &mut Vec::new(), x));
    }
    w
}
