//! Formulas of the coalgebraic μ-calculus, their surface syntax, and the
//! translations to and from simple equational systems.
//!
//! Surface grammar (binders extend as far to the right as possible):
//!
//! ```text
//! formula ::= disj
//! disj    ::= conj ("\/" conj)*
//! conj    ::= unary ("/\" unary)*
//! unary   ::= ("mu" | "nu") IDENT "." formula
//!           | "tt" | "ff" | "(" formula ")"
//!           | MODAL unary | MODAL "(" formula ("," formula)* ")"
//!           | IDENT
//! MODAL   ::= "box" | "dia" | "box_" NAT | "dia_" NAT | "X" | "[" IDENT "]" | "<" IDENT ">"
//! ```
//!
//! An identifier is a variable when bound by an enclosing binder, and an
//! atomic proposition otherwise (if the signature knows it).

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde_json::{json, Value};

use crate::eqsys::Polarity;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Conn {
    And,
    Or,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModalOp {
    Box,
    Dia,
    ActBox(String),
    ActDia(String),
    GBox(u32),
    GDia(u32),
    Next,
    Atom(String),
}

impl ModalOp {
    pub fn arity(&self) -> usize {
        match self {
            ModalOp::Atom(_) => 0,
            _ => 1,
        }
    }

    pub fn name(&self) -> String {
        match self {
            ModalOp::Box => "box".into(),
            ModalOp::Dia => "dia".into(),
            ModalOp::ActBox(a) => format!("[{a}]"),
            ModalOp::ActDia(a) => format!("<{a}>"),
            ModalOp::GBox(k) => format!("box_{k}"),
            ModalOp::GDia(k) => format!("dia_{k}"),
            ModalOp::Next => "X".into(),
            ModalOp::Atom(p) => p.clone(),
        }
    }

    /// Inverse of [`ModalOp::name`]; bare identifiers become atoms.
    pub fn from_name(s: &str) -> Result<ModalOp> {
        let bad = || Error::Parse(format!("unknown modality {s:?}"));
        Ok(match s {
            "box" => ModalOp::Box,
            "dia" => ModalOp::Dia,
            "X" => ModalOp::Next,
            _ if s.starts_with('[') && s.ends_with(']') && s.len() > 2 => ModalOp::ActBox(s[1..s.len() - 1].into()),
            _ if s.starts_with('<') && s.ends_with('>') && s.len() > 2 => ModalOp::ActDia(s[1..s.len() - 1].into()),
            _ if s.starts_with("box_") => ModalOp::GBox(s[4..].parse().map_err(|_| bad())?),
            _ if s.starts_with("dia_") => ModalOp::GDia(s[4..].parse().map_err(|_| bad())?),
            _ if is_ident(s) => ModalOp::Atom(s.into()),
            _ => return Err(bad()),
        })
    }
}

fn is_ident(s: &str) -> bool {
    let mut cs = s.chars();
    cs.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_') && cs.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

/// Which modalities and atoms a behaviour type admits.
pub trait Signature {
    fn is_atom(&self, name: &str) -> bool;
    fn check_op(&self, op: &ModalOp) -> std::result::Result<(), String>;
}

/// Accepts every modality; any free identifier is an atom.
pub struct AnySignature;

impl Signature for AnySignature {
    fn is_atom(&self, _: &str) -> bool {
        true
    }

    fn check_op(&self, _: &ModalOp) -> std::result::Result<(), String> {
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Var(String),
    Conn(Conn, Vec<Formula>),
    Modal(ModalOp, Vec<Formula>),
    Mu(String, Box<Formula>),
    Nu(String, Box<Formula>),
}

impl Formula {
    pub fn tt() -> Formula {
        Formula::Conn(Conn::And, vec![])
    }

    pub fn ff() -> Formula {
        Formula::Conn(Conn::Or, vec![])
    }

    pub fn var(s: &str) -> Formula {
        Formula::Var(s.into())
    }

    pub fn atom(s: &str) -> Formula {
        Formula::Modal(ModalOp::Atom(s.into()), vec![])
    }

    pub fn fix(pol: Polarity, v: &str, body: Formula) -> Formula {
        match pol {
            Polarity::Mu => Formula::Mu(v.into(), Box::new(body)),
            Polarity::Nu => Formula::Nu(v.into(), Box::new(body)),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Formula::Var(v) => {
                if !bound.contains(v) {
                    out.insert(v.clone());
                }
            }
            Formula::Conn(_, args) | Formula::Modal(_, args) => args.iter().for_each(|a| a.collect_free(bound, out)),
            Formula::Mu(v, b) | Formula::Nu(v, b) => {
                bound.push(v.clone());
                b.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn binders(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.visit(&mut |f| {
            if let Formula::Mu(v, _) | Formula::Nu(v, _) = f {
                out.push(v.clone());
            }
        });
        out
    }

    fn visit(&self, f: &mut impl FnMut(&Formula)) {
        f(self);
        match self {
            Formula::Var(_) => {}
            Formula::Conn(_, args) | Formula::Modal(_, args) => args.iter().for_each(|a| a.visit(f)),
            Formula::Mu(_, b) | Formula::Nu(_, b) => b.visit(f),
        }
    }

    /// Replaces free occurrences of `v` by `by` without renaming; variables
    /// free in `by` may become bound.
    pub fn subst(&self, v: &str, by: &Formula) -> Formula {
        match self {
            Formula::Var(w) if w == v => by.clone(),
            Formula::Var(_) => self.clone(),
            Formula::Conn(c, args) => Formula::Conn(*c, args.iter().map(|a| a.subst(v, by)).collect()),
            Formula::Modal(m, args) => Formula::Modal(m.clone(), args.iter().map(|a| a.subst(v, by)).collect()),
            Formula::Mu(w, _) | Formula::Nu(w, _) if w == v => self.clone(),
            Formula::Mu(w, b) => Formula::Mu(w.clone(), Box::new(b.subst(v, by))),
            Formula::Nu(w, b) => Formula::Nu(w.clone(), Box::new(b.subst(v, by))),
        }
    }

    /// Renames binders so that no two binders share a name and none clashes
    /// with a free variable.
    pub fn with_distinct_binders(&self) -> Formula {
        let mut used: HashSet<String> = self.free_vars().into_iter().collect();
        self.rename(&mut used, &HashMap::new())
    }

    fn rename(&self, used: &mut HashSet<String>, env: &HashMap<String, String>) -> Formula {
        match self {
            Formula::Var(v) => Formula::Var(env.get(v).cloned().unwrap_or_else(|| v.clone())),
            Formula::Conn(c, args) => Formula::Conn(*c, args.iter().map(|a| a.rename(used, env)).collect()),
            Formula::Modal(m, args) => Formula::Modal(m.clone(), args.iter().map(|a| a.rename(used, env)).collect()),
            Formula::Mu(v, b) | Formula::Nu(v, b) => {
                let mut name = v.clone();
                while used.contains(&name) {
                    name.push('\'');
                }
                used.insert(name.clone());
                let mut env2 = env.clone();
                env2.insert(v.clone(), name.clone());
                let body = Box::new(b.rename(used, &env2));
                match self {
                    Formula::Mu(..) => Formula::Mu(name, body),
                    _ => Formula::Nu(name, body),
                }
            }
        }
    }

    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Var(v) => write!(f, "{v}"),
            Formula::Conn(Conn::And, a) if a.is_empty() => write!(f, "tt"),
            Formula::Conn(Conn::Or, a) if a.is_empty() => write!(f, "ff"),
            Formula::Conn(c, args) => {
                let sep = if *c == Conn::And { " /\\ " } else { " \\/ " };
                let parts: Vec<String> = args.iter().map(|a| format!("({a})")).collect();
                if args.len() == 1 {
                    write!(f, "{}{}", parts[0], if *c == Conn::And { " /\\ tt" } else { " \\/ ff" })
                } else {
                    write!(f, "{}", parts.join(sep))
                }
            }
            Formula::Modal(m, args) if args.is_empty() => write!(f, "{}", m.name()),
            Formula::Modal(m, args) => {
                let parts: Vec<String> = args.iter().map(|a| a.to_string()).collect();
                write!(f, "{}({})", m.name(), parts.join(", "))
            }
            Formula::Mu(v, b) => write!(f, "mu {v}. {b}"),
            Formula::Nu(v, b) => write!(f, "nu {v}. {b}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Lt,
    Gt,
    Dot,
    Comma,
    And,
    Or,
    End,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let b = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'[' => Tok::LBrack,
            b']' => Tok::RBrack,
            b'<' => Tok::Lt,
            b'>' => Tok::Gt,
            b'.' => Tok::Dot,
            b',' => Tok::Comma,
            b'/' if b.get(i + 1) == Some(&b'\\') => {
                i += 1;
                Tok::And
            }
            b'\\' if b.get(i + 1) == Some(&b'/') => {
                i += 1;
                Tok::Or
            }
            _ if c.is_ascii_alphanumeric() || c == b'_' => {
                while i + 1 < b.len() && (b[i + 1].is_ascii_alphanumeric() || b[i + 1] == b'_' || b[i + 1] == b'\'') {
                    i += 1;
                }
                Tok::Ident(text[start..=i].to_string())
            }
            _ => return Err(Error::Syntax { pos: i, msg: format!("unexpected character {:?}", c as char) }),
        };
        i += 1;
        out.push((tok, start));
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser<'s> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    bound: Vec<String>,
    sig: &'s dyn Signature,
}

const KEYWORDS: [&str; 6] = ["mu", "nu", "tt", "ff", "box", "dia"];

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { pos: self.pos(), msg: msg.into() })
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if t != Tok::End {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn formula(&mut self) -> Result<Formula> {
        let mut args = vec![self.conj()?];
        while *self.peek() == Tok::Or {
            self.bump();
            args.push(self.conj()?);
        }
        Ok(flatten(Conn::Or, args))
    }

    fn conj(&mut self) -> Result<Formula> {
        let mut args = vec![self.unary()?];
        while *self.peek() == Tok::And {
            self.bump();
            args.push(self.unary()?);
        }
        Ok(flatten(Conn::And, args))
    }

    fn ident(&mut self) -> Result<String> {
        match self.bump() {
            Tok::Ident(s) if is_ident(&s) => Ok(s),
            _ => {
                self.at -= 1;
                self.err("expected an identifier")
            }
        }
    }

    fn unary(&mut self) -> Result<Formula> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(f)
            }
            Tok::LBrack | Tok::Lt => {
                let close = if *self.peek() == Tok::LBrack { Tok::RBrack } else { Tok::Gt };
                let boxy = close == Tok::RBrack;
                self.bump();
                let a = self.ident()?;
                self.expect(close, if boxy { "']'" } else { "'>'" })?;
                self.modal(if boxy { ModalOp::ActBox(a) } else { ModalOp::ActDia(a) }, pos)
            }
            Tok::Ident(s) => {
                self.bump();
                match s.as_str() {
                    "mu" | "nu" => {
                        let v = self.ident()?;
                        if KEYWORDS.contains(&v.as_str()) || v == "X" {
                            return Err(Error::Syntax { pos, msg: format!("{v:?} cannot be bound") });
                        }
                        self.expect(Tok::Dot, "'.' after the bound variable")?;
                        self.bound.push(v.clone());
                        let body = self.formula();
                        self.bound.pop();
                        let pol = if s == "mu" { Polarity::Mu } else { Polarity::Nu };
                        Ok(Formula::fix(pol, &v, body?))
                    }
                    "tt" => Ok(Formula::tt()),
                    "ff" => Ok(Formula::ff()),
                    "box" => self.modal(ModalOp::Box, pos),
                    "dia" => self.modal(ModalOp::Dia, pos),
                    "X" if !self.bound.contains(&s) => self.modal(ModalOp::Next, pos),
                    _ if s.starts_with("box_") || s.starts_with("dia_") => {
                        let op = ModalOp::from_name(&s).map_err(|_| Error::Syntax { pos, msg: format!("bad graded modality {s:?}") })?;
                        self.modal(op, pos)
                    }
                    _ if !is_ident(&s) => Err(Error::Syntax { pos, msg: format!("bad identifier {s:?}") }),
                    _ if self.bound.contains(&s) => Ok(Formula::Var(s)),
                    _ if self.sig.is_atom(&s) => {
                        let op = ModalOp::Atom(s);
                        self.sig.check_op(&op).map_err(|msg| Error::Syntax { pos, msg })?;
                        Ok(Formula::Modal(op, vec![]))
                    }
                    _ => Err(Error::Syntax { pos, msg: format!("unbound variable or unknown proposition {s:?}") }),
                }
            }
            Tok::End => self.err("unexpected end of input"),
            _ => self.err("expected a formula"),
        }
    }

    fn modal(&mut self, op: ModalOp, pos: usize) -> Result<Formula> {
        self.sig.check_op(&op).map_err(|msg| Error::Syntax { pos, msg })?;
        let args = if *self.peek() == Tok::LParen {
            self.bump();
            let mut args = vec![self.formula()?];
            while *self.peek() == Tok::Comma {
                self.bump();
                args.push(self.formula()?);
            }
            self.expect(Tok::RParen, "')'")?;
            args
        } else {
            vec![self.unary()?]
        };
        if args.len() != op.arity() {
            return Err(Error::Syntax {
                pos,
                msg: format!("modality {} takes {} argument(s), got {}", op.name(), op.arity(), args.len()),
            });
        }
        Ok(Formula::Modal(op, args))
    }
}

fn flatten(c: Conn, args: Vec<Formula>) -> Formula {
    if args.len() == 1 {
        return args.into_iter().next().unwrap();
    }
    let mut out = Vec::new();
    for a in args {
        match a {
            Formula::Conn(c2, inner) if c2 == c && !inner.is_empty() => out.extend(inner),
            other => out.push(other),
        }
    }
    Formula::Conn(c, out)
}

/// Parses the surface syntax. Binders are renamed apart when names repeat.
pub fn parse_formula(text: &str, sig: &dyn Signature) -> Result<Formula> {
    let mut p = Parser { toks: lex(text)?, at: 0, bound: Vec::new(), sig };
    let f = p.formula()?;
    if *p.peek() != Tok::End {
        return p.err("unexpected trailing input");
    }
    Ok(f.with_distinct_binders())
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SimpleRhs {
    Var(usize),
    Conn(Conn, Vec<usize>),
    Modal(ModalOp, Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SimpleEquation {
    pub var: String,
    pub pol: Polarity,
    pub rhs: SimpleRhs,
}

/// A flat system: each right-hand side is a variable, a connective applied to
/// variables, or a modality applied to variables. Indices are 0-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SimpleEqSystem {
    pub equations: Vec<SimpleEquation>,
}

impl SimpleEqSystem {
    pub fn m(&self) -> usize {
        self.equations.len()
    }

    pub fn mu_flags(&self) -> Vec<bool> {
        self.equations.iter().map(|e| e.pol == Polarity::Mu).collect()
    }

    pub fn spec(&self) -> crate::priord::PrioritySpec {
        crate::priord::PrioritySpec::from_polarities(&self.mu_flags())
    }

    /// Structural invariants: references in range, μ right-hand sides are variables.
    pub fn validate(&self) -> Result<()> {
        let m = self.m();
        let mut names = HashSet::new();
        for (i, e) in self.equations.iter().enumerate() {
            if !names.insert(&e.var) {
                return Err(Error::Invalid(format!("variable {} defined twice", e.var)));
            }
            let refs: &[usize] = match &e.rhs {
                SimpleRhs::Var(j) => std::slice::from_ref(j),
                SimpleRhs::Conn(_, js) => js,
                SimpleRhs::Modal(op, js) => {
                    if js.len() != op.arity() {
                        return Err(Error::Invalid(format!("equation {} applies {} to {} arguments", i + 1, op.name(), js.len())));
                    }
                    js
                }
            };
            if refs.iter().any(|&j| j >= m) {
                return Err(Error::Invalid(format!("equation {} refers to an undefined variable", i + 1)));
            }
            if e.pol == Polarity::Mu && !matches!(e.rhs, SimpleRhs::Var(_)) {
                return Err(Error::Invalid(format!("least-fixpoint equation {} must have a variable right-hand side", e.var)));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let name = |j: &usize| Value::String(self.equations[*j].var.clone());
        let eqs: Vec<Value> = self
            .equations
            .iter()
            .map(|e| {
                let rhs = match &e.rhs {
                    SimpleRhs::Var(j) => json!({"kind": "var", "args": [name(j)]}),
                    SimpleRhs::Conn(c, js) => json!({
                        "kind": "conn",
                        "op": if *c == Conn::And { "and" } else { "or" },
                        "args": js.iter().map(name).collect::<Vec<_>>(),
                    }),
                    SimpleRhs::Modal(op, js) => json!({
                        "kind": "modal",
                        "op": op.name(),
                        "args": js.iter().map(name).collect::<Vec<_>>(),
                    }),
                };
                json!({"var": e.var, "pol": e.pol.name(), "rhs": rhs})
            })
            .collect();
        json!({ "equations": eqs })
    }

    pub fn from_json(v: &Value) -> Result<SimpleEqSystem> {
        let bad = |s: &str| Error::Parse(format!("equational system: {s}"));
        let arr = v.get("equations").and_then(Value::as_array).ok_or_else(|| bad("missing equations"))?;
        let names: Vec<String> = arr
            .iter()
            .map(|e| e.get("var").and_then(Value::as_str).map(String::from).ok_or_else(|| bad("equation without var")))
            .collect::<Result<_>>()?;
        let index: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let mut equations = Vec::new();
        for (e, var) in arr.iter().zip(&names) {
            let pol = match e.get("pol").and_then(Value::as_str) {
                Some("mu") => Polarity::Mu,
                Some("nu") => Polarity::Nu,
                _ => return Err(bad("pol must be mu or nu")),
            };
            let rhs = e.get("rhs").ok_or_else(|| bad("missing rhs"))?;
            let args: Vec<usize> = match rhs.get("args") {
                None => vec![],
                Some(a) => a
                    .as_array()
                    .ok_or_else(|| bad("args must be a list"))?
                    .iter()
                    .map(|x| {
                        let s = x.as_str().ok_or_else(|| bad("arguments must be variable names"))?;
                        index.get(s).copied().ok_or_else(|| Error::Invalid(format!("undefined variable {s:?}")))
                    })
                    .collect::<Result<_>>()?,
            };
            let rhs = match rhs.get("kind").and_then(Value::as_str) {
                Some("var") if args.len() == 1 => SimpleRhs::Var(args[0]),
                Some("conn") => match rhs.get("op").and_then(Value::as_str) {
                    Some("and") => SimpleRhs::Conn(Conn::And, args),
                    Some("or") => SimpleRhs::Conn(Conn::Or, args),
                    _ => return Err(bad("connective must be and/or")),
                },
                Some("modal") => {
                    let op = rhs.get("op").and_then(Value::as_str).ok_or_else(|| bad("modal rhs needs op"))?;
                    SimpleRhs::Modal(ModalOp::from_name(op)?, args)
                }
                _ => return Err(bad("rhs kind must be var, conn or modal")),
            };
            equations.push(SimpleEquation { var: var.clone(), pol, rhs });
        }
        let sys = SimpleEqSystem { equations };
        sys.validate()?;
        Ok(sys)
    }
}

impl fmt::Display for SimpleEqSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = |j: &usize| self.equations[*j].var.clone();
        let parts: Vec<String> = self
            .equations
            .iter()
            .map(|e| {
                let rhs = match &e.rhs {
                    SimpleRhs::Var(j) => name(j),
                    SimpleRhs::Conn(c, js) if js.is_empty() => (if *c == Conn::And { "tt" } else { "ff" }).into(),
                    SimpleRhs::Conn(c, js) => js.iter().map(name).collect::<Vec<_>>().join(if *c == Conn::And { " /\\ " } else { " \\/ " }),
                    SimpleRhs::Modal(op, js) if js.is_empty() => op.name(),
                    SimpleRhs::Modal(op, js) => format!("{} {}", op.name(), js.iter().map(name).collect::<Vec<_>>().join(", ")),
                };
                format!("{} ={} {}", e.var, e.pol.name(), rhs)
            })
            .collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// The equational presentation of a closed formula. Auxiliary variables are
/// named `u1, u2, ...` in order of creation, skipping names used by binders.
pub fn to_equational(phi: &Formula) -> Result<SimpleEqSystem> {
    let free = phi.free_vars();
    if let Some(v) = free.iter().next() {
        return Err(Error::Invalid(format!("formula is not closed: {v} is free")));
    }
    let phi = phi.with_distinct_binders();
    let taken: HashSet<String> = phi.binders().into_iter().collect();
    let mut t = Translate { eqs: Vec::new(), taken, next: 1 };
    t.emit(&phi);
    let index: HashMap<String, usize> = t.eqs.iter().enumerate().map(|(i, (v, _, _))| (v.clone(), i)).collect();
    let equations = t
        .eqs
        .into_iter()
        .map(|(var, pol, rhs)| {
            let r = |n: String| index[&n];
            let rhs = match rhs {
                PendingRhs::Var(n) => SimpleRhs::Var(r(n)),
                PendingRhs::Conn(c, ns) => SimpleRhs::Conn(c, ns.into_iter().map(r).collect()),
                PendingRhs::Modal(op, ns) => SimpleRhs::Modal(op, ns.into_iter().map(r).collect()),
            };
            SimpleEquation { var, pol, rhs }
        })
        .collect();
    Ok(SimpleEqSystem { equations })
}

enum PendingRhs {
    Var(String),
    Conn(Conn, Vec<String>),
    Modal(ModalOp, Vec<String>),
}

struct Translate {
    eqs: Vec<(String, Polarity, PendingRhs)>,
    taken: HashSet<String>,
    next: usize,
}

impl Translate {
    fn fresh(&mut self) -> String {
        loop {
            let name = format!("u{}", self.next);
            self.next += 1;
            if !self.taken.contains(&name) {
                return name;
            }
        }
    }

    /// Emits the equations for `f` and returns the variable of the last one.
    fn emit(&mut self, f: &Formula) -> String {
        let (var, pol, rhs) = match f {
            Formula::Var(u) => (self.fresh(), Polarity::Nu, PendingRhs::Var(u.clone())),
            Formula::Conn(c, args) => {
                let vs = args.iter().map(|a| self.emit(a)).collect();
                (self.fresh(), Polarity::Nu, PendingRhs::Conn(*c, vs))
            }
            Formula::Modal(op, args) => {
                let vs = args.iter().map(|a| self.emit(a)).collect();
                (self.fresh(), Polarity::Nu, PendingRhs::Modal(op.clone(), vs))
            }
            Formula::Mu(u, b) | Formula::Nu(u, b) => {
                let vb = self.emit(b);
                let pol = if matches!(f, Formula::Mu(..)) { Polarity::Mu } else { Polarity::Nu };
                (u.clone(), pol, PendingRhs::Var(vb))
            }
        };
        self.eqs.push((var.clone(), pol, rhs));
        var
    }
}

/// The formulaic presentation: fold from the right, substituting each
/// equation's fixpoint for its variable. No simplification is done.
pub fn to_formula(sys: &SimpleEqSystem) -> Result<Formula> {
    sys.validate()?;
    let m = sys.m();
    if m == 0 {
        return Err(Error::Invalid("empty equational system".into()));
    }
    let names: Vec<&str> = sys.equations.iter().map(|e| e.var.as_str()).collect();
    let rhs = |e: &SimpleEquation| {
        let v = |j: &usize| Formula::var(names[*j]);
        match &e.rhs {
            SimpleRhs::Var(j) => v(j),
            SimpleRhs::Conn(c, js) => Formula::Conn(*c, js.iter().map(v).collect()),
            SimpleRhs::Modal(op, js) => Formula::Modal(op.clone(), js.iter().map(v).collect()),
        }
    };
    let bind = |e: &SimpleEquation| Formula::fix(e.pol, &e.var, rhs(e));
    let mut phi = bind(&sys.equations[m - 1]);
    for e in sys.equations[..m - 1].iter().rev() {
        phi = phi.subst(&e.var, &bind(e));
    }
    Ok(phi)
}

/// Encodes a monotone Boolean function of `n` arguments (given as a table
/// indexed by the bitmask of true arguments) over `x1..xn` as a disjunction of
/// conjunctions of its minimal true points.
pub fn encode_connective(n: usize, table: &[bool]) -> Result<Formula> {
    if table.len() != 1 << n {
        return Err(Error::Invalid(format!("truth table of {n} arguments needs {} entries", 1 << n)));
    }
    for a in 0..table.len() {
        for j in 0..n {
            if table[a] && !table[a | 1 << j] {
                return Err(Error::Invalid("truth table is not monotone".into()));
            }
        }
    }
    let mut minimal: Vec<Vec<usize>> = (0..table.len())
        .filter(|&a| table[a] && (0..n).all(|j| a >> j & 1 == 0 || !table[a & !(1 << j)]))
        .map(|a| (0..n).filter(|j| a >> j & 1 == 1).collect())
        .collect();
    minimal.sort();
    let conj = |pt: &Vec<usize>| Formula::Conn(Conn::And, pt.iter().map(|j| Formula::Var(format!("x{}", j + 1))).collect());
    Ok(match minimal.len() {
        1 => conj(&minimal[0]),
        _ => Formula::Conn(Conn::Or, minimal.iter().map(conj).collect()),
    })
}
