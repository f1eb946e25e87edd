//! Random instance generators for tests and benchmarks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use std::collections::BTreeSet;

use crate::checker::MpmState;
use crate::coalgebra::{minimize_family, Coalgebra, FValue, FunctorInstance, Mult};
use crate::eqsys::{EquationalSystem, Polarity, ProgressMeasure};
use crate::lintime::NondetCoalgebra;
use crate::logic::{Conn, Formula, ModalOp};
use crate::parity::{parse_pgsolver, ParityGame, Player};
use crate::priord::{PomRow, PrioritySpec};
use crate::lattice::{self, Elem, Lattice, MonotoneFn};

/// A monotone map on a bit-vector or Boolean lattice given per output bit as
/// a disjunction of conjunctions of `(argument, bit)` literals.
fn dnf_fn(arity: usize, bool_valued: bool, dnf: Vec<Vec<Vec<(usize, usize)>>>) -> MonotoneFn {
    let desc = format!("{dnf:?}");
    let width = dnf.len();
    MonotoneFn::new(arity, desc, move |args| {
        let holds = |&(j, y): &(usize, usize)| match &args[j] {
            Elem::Bool(b) => *b,
            Elem::Bits(b) => b.contains(y),
            e => panic!("unexpected element {e}"),
        };
        let bit = |x: usize| dnf[x].iter().any(|clause| clause.iter().all(holds));
        if bool_valued {
            Elem::Bool(bit(0))
        } else {
            Elem::bits_from(width, (0..width).filter(|&x| bit(x)))
        }
    })
}

pub fn random_dnf_fn<R: Rng>(rng: &mut R, arity: usize, width: usize, bool_valued: bool) -> MonotoneFn {
    let dnf = (0..width)
        .map(|_| {
            (0..rng.gen_range(0..=2))
                .map(|_| (0..rng.gen_range(0..=2)).map(|_| (rng.gen_range(0..arity), rng.gen_range(0..width))).collect())
                .collect()
        })
        .collect();
    dnf_fn(arity, bool_valued, dnf)
}

/// A system with up to `max_m` equations over Bool2 or a powerset of up to
/// `max_x` elements.
pub fn random_system<R: Rng>(rng: &mut R, max_m: usize, max_x: usize) -> EquationalSystem {
    let m = rng.gen_range(1..=max_m);
    let (lat, width, bool_valued) = if rng.gen_bool(0.25) {
        (Lattice::Bool2, 1, true)
    } else {
        let n = rng.gen_range(1..=max_x);
        (Lattice::powerset((0..n).map(|i| format!("x{i}"))), n, false)
    };
    let eqs = (0..m)
        .map(|_| {
            let pol = if rng.gen_bool(0.5) { Polarity::Mu } else { Polarity::Nu };
            (pol, random_dnf_fn(rng, m, width, bool_valued))
        })
        .collect();
    EquationalSystem::new(lat, eqs).expect("generated system is well formed")
}

/// Random variations of a measure: a smaller box, a meet with a constant,
/// zeroed cells. Callers filter them through the verifier.
pub fn perturbations<R: Rng>(rng: &mut R, sys: &EquationalSystem, p: &ProgressMeasure, count: usize) -> Vec<ProgressMeasure> {
    let l = &sys.lattice;
    let els = if l.size() <= 64 { l.elements() } else { vec![l.bottom(), l.top()] };
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let q = match rng.gen_range(0..3) {
            0 => {
                let maxima: Vec<u32> = p.maxima.iter().map(|&b| rng.gen_range(0..=b)).collect();
                let mut q = ProgressMeasure::bottom(sys, maxima);
                for idx in 0..q.box_size() {
                    let alpha = q.unflat(idx);
                    for i in 0..sys.m() {
                        q.approx[i][idx] = p.get(i + 1, &alpha).clone();
                    }
                }
                q
            }
            1 => {
                let c = els.choose(rng).unwrap().clone();
                let mut q = p.clone();
                q.approx.iter_mut().flatten().for_each(|e| *e = lattice::meet(e, &c));
                q
            }
            _ => {
                let mut q = p.clone();
                let n = q.box_size();
                for _ in 0..rng.gen_range(1..=3) {
                    let i = rng.gen_range(0..sys.m());
                    q.approx[i][rng.gen_range(0..n)] = l.bottom();
                }
                q
            }
        };
        out.push(q);
    }
    out
}

pub const FUNCTOR_KINDS: [&str; 5] = ["kripke", "lts", "monnbhd", "graded", "stream"];

fn subset<R: Rng>(rng: &mut R, n: usize, p: f64) -> Vec<usize> {
    (0..n).filter(|_| rng.gen_bool(p)).collect()
}

/// The functor used by [`random_coalgebra`] for each kind.
pub fn default_functor(kind: &str) -> FunctorInstance {
    match kind {
        "kripke" => FunctorInstance::Kripke { ap: vec!["p".into(), "q".into()] },
        "lts" => FunctorInstance::Lts { actions: vec!["a".into(), "b".into()] },
        "monnbhd" => FunctorInstance::MonNbhd,
        "graded" => FunctorInstance::Graded { cap: 3 },
        "stream" => FunctorInstance::Stream { ap: vec!["p".into(), "q".into()] },
        _ => panic!("unknown functor kind {kind}"),
    }
}

/// A coalgebra with between one and `max_n` states.
pub fn random_coalgebra<R: Rng>(rng: &mut R, kind: &str, max_n: usize) -> Coalgebra {
    let n = rng.gen_range(1..=max_n);
    let functor = default_functor(kind);
    let n_ap = match &functor {
        FunctorInstance::Kripke { ap } | FunctorInstance::Stream { ap } => ap.len(),
        _ => 0,
    };
    let step = (0..n)
        .map(|_| {
            let labels: BTreeSet<usize> = subset(rng, n_ap, 0.5).into_iter().collect();
            match &functor {
                FunctorInstance::Kripke { .. } => FValue::Kripke { labels, succ: subset(rng, n, 0.4) },
                FunctorInstance::Stream { .. } => FValue::Stream { labels, succ: rng.gen_range(0..n) },
                FunctorInstance::Lts { actions } => FValue::Lts { succ: actions.iter().map(|_| subset(rng, n, 0.35)).collect() },
                FunctorInstance::MonNbhd => {
                    let fam = (0..rng.gen_range(0..=3)).map(|_| subset(rng, n, 0.4)).collect();
                    FValue::MonNbhd { family: minimize_family(fam) }
                }
                FunctorInstance::Graded { cap } => {
                    let mult = subset(rng, n, 0.5)
                        .into_iter()
                        .map(|y| (y, if rng.gen_bool(0.1) { Mult::Inf } else { Mult::Fin(rng.gen_range(1..=*cap)) }))
                        .collect();
                    FValue::Graded { mult }
                }
            }
        })
        .collect();
    Coalgebra { functor, states: (0..n).map(|i| format!("x{i}")).collect(), step }
}

fn random_op<R: Rng>(rng: &mut R, f: &FunctorInstance) -> ModalOp {
    match f {
        FunctorInstance::Kripke { .. } => [ModalOp::Box, ModalOp::Dia][rng.gen_range(0..2)].clone(),
        FunctorInstance::Lts { actions } => {
            let a = actions.choose(rng).unwrap().clone();
            if rng.gen_bool(0.5) {
                ModalOp::ActBox(a)
            } else {
                ModalOp::ActDia(a)
            }
        }
        FunctorInstance::MonNbhd => ModalOp::Box,
        FunctorInstance::Graded { cap } => {
            let k = rng.gen_range(0..*cap);
            if rng.gen_bool(0.5) {
                ModalOp::GBox(k)
            } else {
                ModalOp::GDia(k)
            }
        }
        FunctorInstance::Stream { .. } => ModalOp::Next,
    }
}

/// A closed formula for the functor with at most `depth` nested constructors
/// and at most `max_binders` fixpoint binders.
pub fn random_formula<R: Rng>(rng: &mut R, f: &FunctorInstance, depth: usize, max_binders: usize) -> Formula {
    fn go<R: Rng>(rng: &mut R, f: &FunctorInstance, depth: usize, bound: &mut Vec<String>, budget: &mut usize) -> Formula {
        let atoms: Vec<String> = match f {
            FunctorInstance::Kripke { ap } | FunctorInstance::Stream { ap } => ap.clone(),
            _ => vec![],
        };
        if depth == 0 {
            return match rng.gen_range(0..4) {
                0 if !bound.is_empty() => Formula::var(bound.choose(rng).unwrap()),
                1 if !atoms.is_empty() => Formula::atom(atoms.choose(rng).unwrap()),
                2 => Formula::ff(),
                _ if !bound.is_empty() => Formula::var(bound.choose(rng).unwrap()),
                _ => Formula::tt(),
            };
        }
        match rng.gen_range(0..6) {
            0 | 1 if *budget > 0 => {
                *budget -= 1;
                let v = format!("v{}", bound.len() + *budget);
                bound.push(v.clone());
                let body = go(rng, f, depth - 1, bound, budget);
                bound.pop();
                let pol = if rng.gen_bool(0.5) { Polarity::Mu } else { Polarity::Nu };
                Formula::fix(pol, &v, body)
            }
            2 => {
                let c = if rng.gen_bool(0.5) { Conn::And } else { Conn::Or };
                let args = (0..rng.gen_range(1..=2)).map(|_| go(rng, f, depth - 1, bound, budget)).collect();
                Formula::Conn(c, args)
            }
            3 | 4 => Formula::Modal(random_op(rng, f), vec![go(rng, f, depth - 1, bound, budget)]),
            _ => go(rng, f, 0, bound, budget),
        }
    }
    let mut budget = max_binders;
    go(rng, f, depth, &mut vec![], &mut budget)
}

/// A larger Kripke structure with a surjective homomorphism onto `q`: some
/// states are duplicated and successor edges are redirected among copies.
pub fn duplicate_states<R: Rng>(rng: &mut R, q: &Coalgebra) -> (Coalgebra, Vec<usize>) {
    let mut h: Vec<usize> = (0..q.n()).collect();
    for y in 0..q.n() {
        for _ in 0..rng.gen_range(0..=2) {
            h.push(y);
        }
    }
    let copies = |y: usize| -> Vec<usize> { (0..h.len()).filter(|&x| h[x] == y).collect() };
    let step = h
        .iter()
        .map(|&y| match &q.step[y] {
            FValue::Kripke { labels, succ } => {
                let mut out = Vec::new();
                for &z in succ {
                    let cs = copies(z);
                    let mut pick: Vec<usize> = cs.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
                    if pick.is_empty() {
                        pick.push(*cs.choose(rng).unwrap());
                    }
                    out.extend(pick);
                }
                out.sort();
                FValue::Kripke { labels: labels.clone(), succ: out }
            }
            _ => panic!("duplicate_states expects a Kripke structure"),
        })
        .collect();
    let states = (0..h.len()).map(|x| format!("x{x}")).collect();
    (Coalgebra { functor: q.functor.clone(), states, step }, h)
}

/// A random edit of a matrix certificate: one row set to failure, raised,
/// lowered or replaced by zeros.
pub fn perturb_mpm<R: Rng>(rng: &mut R, spec: &PrioritySpec, r: &MpmState) -> MpmState {
    let mut out = r.clone();
    if spec.m == 0 || out.poms.is_empty() {
        return out;
    }
    let x = rng.gen_range(0..out.poms.len());
    let i = rng.gen_range(0..spec.m);
    let bound = out.poms[x].bound;
    let row = &mut out.poms[x].rows[i];
    *row = match rng.gen_range(0..4) {
        0 => PomRow::Fail,
        1 => PomRow::Row(spec.zero()),
        _ => {
            let mut v = row.counters().map_or_else(|| spec.zero(), <[u32]>::to_vec);
            if !v.is_empty() {
                let j = rng.gen_range(0..v.len());
                v[j] = rng.gen_range(0..=bound);
            }
            PomRow::Row(v)
        }
    };
    out
}

/// A game with up to `max_n` positions, priorities in `1..=max_pr` and out-degree
/// at most `max_deg`.
pub fn random_game<R: Rng>(rng: &mut R, max_n: usize, max_pr: u32, max_deg: usize) -> ParityGame {
    let n = rng.gen_range(1..=max_n);
    let owner = (0..n).map(|_| if rng.gen_bool(0.5) { Player::Even } else { Player::Odd }).collect();
    let priority = (0..n).map(|_| rng.gen_range(1..=max_pr)).collect();
    let succ = (0..n).map(|_| (0..rng.gen_range(1..=max_deg)).map(|_| rng.gen_range(0..n)).collect()).collect();
    ParityGame::new(owner, priority, succ).expect("generated game is well formed")
}

/// Every game with 1 to `max_n` positions and priorities in `1..=max_pr`.
pub fn all_games(max_n: usize, max_pr: u32) -> impl Iterator<Item = ParityGame> {
    (1..=max_n).flat_map(move |n| {
        let subsets = (1usize << n) - 1;
        let per_owner = 1usize << n;
        let per_pr = (max_pr as usize).pow(n as u32);
        let per_succ = subsets.pow(n as u32);
        (0..per_owner * per_pr * per_succ).map(move |mut code| {
            let owner = (0..n).map(|x| if code >> x & 1 == 1 { Player::Odd } else { Player::Even }).collect::<Vec<_>>();
            code /= per_owner;
            let priority = (0..n)
                .map(|_| {
                    let p = (code % max_pr as usize) as u32 + 1;
                    code /= max_pr as usize;
                    p
                })
                .collect();
            let succ = (0..n)
                .map(|_| {
                    let mask = code % subsets + 1;
                    code /= subsets;
                    (0..n).filter(|y| mask >> y & 1 == 1).collect()
                })
                .collect();
            ParityGame::new(owner, priority, succ).expect("enumerated game is well formed")
        })
    })
}

/// The same game with positions listed in a random order.
pub fn shuffle_game<R: Rng>(rng: &mut R, g: &ParityGame) -> ParityGame {
    let mut perm: Vec<usize> = (0..g.n()).collect();
    perm.shuffle(rng);
    let text: String = perm
        .iter()
        .map(|&x| {
            let succ: Vec<String> = g.succ[x].iter().map(|&y| g.ids[y].to_string()).collect();
            format!("{} {} {} {};", g.ids[x], g.priority[x], if g.owner[x] == Player::Even { 0 } else { 1 }, succ.join(","))
        })
        .collect();
    parse_pgsolver(&text).expect("reordered game parses")
}

/// A nondeterministic stream system over `{p}` with one to `max_n` states
/// and one to `max_choices` choices per state.
pub fn random_nondet<R: Rng>(rng: &mut R, max_n: usize, max_choices: usize) -> NondetCoalgebra {
    let n = rng.gen_range(1..=max_n);
    let step = (0..n)
        .map(|_| {
            let mut cs: Vec<_> = (0..rng.gen_range(1..=max_choices))
                .map(|_| (subset(rng, 1, 0.5).into_iter().collect::<BTreeSet<usize>>(), rng.gen_range(0..n)))
                .collect();
            cs.sort();
            cs.dedup();
            cs
        })
        .collect();
    NondetCoalgebra { functor: FunctorInstance::Stream { ap: vec!["p".into()] }, states: (0..n).map(|i| format!("x{i}")).collect(), step }
}

/// The linear-time regression formulas: F p, G p, X p, GF p and FG p.
pub const LINEAR_FORMULAS: [(&str, &str); 5] = [
    ("F p", "mu v. (p \\/ X v)"),
    ("G p", "nu v. (p /\\ X v)"),
    ("X p", "X p"),
    ("GF p", "nu u. mu v. ((p \\/ X v) /\\ X u)"),
    ("FG p", "mu v. ((nu u. (p /\\ X u)) \\/ X v)"),
];

/// The fixed linear-time regression corpus: a few hand-made systems plus
/// seeded random ones, all with at most four states.
pub fn linear_corpus() -> Vec<NondetCoalgebra> {
    let f = FunctorInstance::Stream { ap: vec!["p".into()] };
    let p = || BTreeSet::from([0usize]);
    let e = BTreeSet::new;
    let named = |step: Vec<Vec<(BTreeSet<usize>, usize)>>| NondetCoalgebra {
        functor: f.clone(),
        states: (0..step.len()).map(|i| format!("x{i}")).collect(),
        step,
    };
    let mut out = vec![
        named(vec![vec![(p(), 0), (e(), 0)]]),
        named(vec![vec![(e(), 0)]]),
        named(vec![vec![(e(), 1)], vec![(p(), 1)]]),
        named(vec![vec![(p(), 1)], vec![(e(), 0)]]),
        named(vec![vec![(p(), 0), (e(), 1)], vec![(e(), 1)]]),
        named(vec![vec![(e(), 1), (p(), 2)], vec![(p(), 0)], vec![(e(), 2)]]),
        named(vec![vec![(e(), 1)], vec![(e(), 2), (p(), 3)], vec![(e(), 0)], vec![(p(), 3), (e(), 1)]]),
    ];
    let mut rng = rand::rngs::StdRng::seed_from_u64(0x11ea);
    out.extend((0..17).map(|_| random_nondet(&mut rng, 4, 2)));
    out
}
