//! Model checking over finite ordered structures.
//!
//! Two complete strategies are available. Enumeration walks every candidate
//! relation of a second-order quantifier, the restricted universal only the
//! tuples of its guard. Grounding unrolls first-order quantifiers over the
//! domain, turns existential second-order variables into propositional
//! variables under a cardinality bound, expands universal ones, and hands
//! the result to a CDCL solver; it is what makes the arithmetic macros and
//! compiled machine sentences checkable at all.

mod ground;
pub mod sat;

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::formula::{classify, desugar, not, to_snf, Formula, FragmentLabel, Pred, Quant, SoVar, Term};
use crate::structure::{all_tuples, Structure, Tuple, TupleSet};

pub use ground::{ground_solve, GroundOutcome};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("resource limit exceeded: {what} needs {needed} candidates, limit is {limit}")]
    ResourceExceeded { what: String, needed: String, limit: u64 },
    #[error("resource limit exceeded: {0}")]
    Budget(String),
    #[error("unbound first-order variable {0}")]
    UnboundVariable(String),
    #[error("unbound second-order variable {0}")]
    UnboundSoVariable(String),
    #[error("unknown relation {0} (or wrong arity)")]
    UnknownRelation(String),
    #[error("unknown constant {0}")]
    UnknownConstant(String),
    #[error("{name} must have arity {expected}, found a tuple of length {got}")]
    ArityViolation { name: String, expected: usize, got: usize },
    #[error("{name} has {size} tuples, bound is {bound}")]
    BoundViolation { name: String, size: usize, bound: usize },
    #[error("{name} contains element {value} outside the domain of size {n}")]
    OutOfDomain { name: String, value: usize, n: usize },
    #[error("recursion depth limit {0} exceeded")]
    DepthExceeded(usize),
    #[error("expected an existential second-order sentence, found {0}")]
    NotSigma1(String),
    #[error("witness does not assign {0}")]
    MissingWitness(String),
}

pub type Result<T> = std::result::Result<T, EvalError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    Enumerate,
    Ground,
    /// Enumerate when the estimated number of candidates fits the ceiling,
    /// ground otherwise.
    #[default]
    Auto,
}

#[derive(Debug, Clone)]
pub struct EvalConfig {
    /// Most candidate relations one quantifier may enumerate.
    pub max_candidates: u64,
    pub max_depth: usize,
    pub strategy: Strategy,
    /// Worker threads for the outermost quantifier; 1 runs sequentially.
    pub threads: usize,
    /// Evaluate restricted universals by scanning all of `A^r`.
    pub naive_restricted: bool,
    pub max_conflicts: Option<u64>,
    /// Most gates and clauses the grounder may create.
    pub max_ground_size: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            max_candidates: 2_000_000,
            max_depth: 100_000,
            strategy: Strategy::Auto,
            threads: 1,
            naive_restricted: false,
            max_conflicts: Some(5_000_000),
            max_ground_size: 30_000_000,
        }
    }
}

/// Assignment of first-order variables to elements and second-order
/// variables (by name) to relations.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Valuation {
    pub first_order: BTreeMap<String, usize>,
    pub second_order: BTreeMap<String, TupleSet>,
}

impl Valuation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_element(mut self, var: &str, value: usize) -> Self {
        self.first_order.insert(var.to_string(), value);
        self
    }

    pub fn with_relation<I>(mut self, var: &str, tuples: I) -> Self
    where
        I: IntoIterator<Item = Tuple>,
    {
        self.second_order.insert(var.to_string(), tuples.into_iter().collect());
        self
    }

    /// Checks that every listed variable is assigned a relation that fits
    /// its arity, the domain and the size bound.
    pub fn check_against(&self, n: usize, vars: &[SoVar]) -> Result<()> {
        for v in vars {
            let rel = self.second_order.get(&v.name).ok_or_else(|| EvalError::MissingWitness(v.name.clone()))?;
            check_relation(n, v, rel)?;
        }
        Ok(())
    }
}

pub fn check_relation(n: usize, v: &SoVar, rel: &TupleSet) -> Result<()> {
    for t in rel {
        if t.len() != v.arity {
            return Err(EvalError::ArityViolation { name: v.name.clone(), expected: v.arity, got: t.len() });
        }
        if let Some(&x) = t.iter().find(|&&x| x >= n) {
            return Err(EvalError::OutOfDomain { name: v.name.clone(), value: x, n });
        }
    }
    let bound = size_bound(n, v.exponent);
    if rel.len() > bound {
        return Err(EvalError::BoundViolation { name: v.name.clone(), size: rel.len(), bound });
    }
    Ok(())
}

/// `⌈log n⌉^k`, saturating.
pub fn size_bound(n: usize, k: usize) -> usize {
    let l = crate::structure::ceil_log2(n);
    (l as u128).checked_pow(k as u32).map_or(usize::MAX, |b| b.min(usize::MAX as u128) as usize)
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul(n - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Number of relations `R ⊆ A^r` with `|R| ≤ ⌈log n⌉^k`, saturating.
pub fn relation_count(n: usize, r: usize, k: usize) -> u128 {
    let space = match (n as u128).checked_pow(r as u32) {
        Some(s) => s,
        None => return u128::MAX,
    };
    let bound = (size_bound(n, k) as u128).min(space);
    let mut total: u128 = 0;
    for i in 0..=bound {
        total = total.saturating_add(binomial(space, i));
        if total == u128::MAX {
            break;
        }
    }
    total
}

/// All relations `R ⊆ A^r` with `|R| ≤ ⌈log n⌉^k`, by size and then
/// lexicographically by the ranks of their tuples.
pub fn enumerate_relations(n: usize, r: usize, k: usize, ceiling: u64) -> Result<RelationIter> {
    let count = relation_count(n, r, k);
    if count > ceiling as u128 {
        return Err(EvalError::ResourceExceeded {
            what: format!("relations of arity {r} and exponent {k} at n = {n}"),
            needed: if count == u128::MAX { "more than 2^128".into() } else { count.to_string() },
            limit: ceiling,
        });
    }
    let space = n.pow(r as u32);
    let bound = size_bound(n, k).min(space);
    Ok(RelationIter { n, r, space, bound, combo: Some(Vec::new()) })
}

pub struct RelationIter {
    n: usize,
    r: usize,
    space: usize,
    bound: usize,
    combo: Option<Vec<usize>>,
}

fn unrank(n: usize, r: usize, mut idx: usize) -> Tuple {
    let mut t = vec![0; r];
    for slot in t.iter_mut().rev() {
        *slot = idx % n;
        idx /= n;
    }
    t
}

impl Iterator for RelationIter {
    type Item = TupleSet;

    fn next(&mut self) -> Option<TupleSet> {
        let combo = self.combo.as_mut()?;
        let out: TupleSet = combo.iter().map(|&i| unrank(self.n, self.r, i)).collect();
        // advance to the next combination, growing the size when exhausted
        let m = combo.len();
        let mut advanced = false;
        for pos in (0..m).rev() {
            if combo[pos] < self.space - (m - pos) {
                combo[pos] += 1;
                for q in pos + 1..m {
                    combo[q] = combo[q - 1] + 1;
                }
                advanced = true;
                break;
            }
        }
        if !advanced {
            if m < self.bound {
                *combo = (0..m + 1).collect();
            } else {
                self.combo = None;
            }
        }
        Some(out)
    }
}

/// Estimated candidate visits of a plain enumeration: the largest product of
/// relation counts along a chain of nested second-order quantifiers, times
/// the domain for each first-order quantifier above them.
pub fn enumeration_cost(f: &Formula, n: usize) -> u128 {
    use Formula::*;
    match f {
        True | False | Atom(..) | Eq(..) => 1,
        Not(g) => enumeration_cost(g, n),
        And(gs) | Or(gs) => gs.iter().map(|g| enumeration_cost(g, n)).fold(1, u128::saturating_add),
        Implies(a, b) | Iff(a, b) => enumeration_cost(a, n).saturating_add(enumeration_cost(b, n)),
        Exists(_, g) | Forall(_, g) => enumeration_cost(g, n).saturating_mul(n as u128),
        ForallIn(xs, _, g) => {
            let inner = enumeration_cost(g, n);
            inner.saturating_mul((n as u128).saturating_pow(xs.len() as u32).min(1 << 20))
        }
        SoExists(v, g) | SoForall(v, g) => {
            relation_count(n, v.arity, v.exponent).saturating_mul(enumeration_cost(g, n))
        }
    }
}

/// Which second-order quantifier kinds occur in a formula.
fn so_kinds(f: &Formula) -> (bool, bool) {
    use Formula::*;
    match f {
        True | False | Atom(..) | Eq(..) => (false, false),
        Not(g) | Exists(_, g) | Forall(_, g) | ForallIn(_, _, g) => so_kinds(g),
        And(gs) | Or(gs) => gs.iter().map(so_kinds).fold((false, false), |a, b| (a.0 || b.0, a.1 || b.1)),
        Implies(a, b) | Iff(a, b) => {
            let (x, y) = (so_kinds(a), so_kinds(b));
            (x.0 || y.0, x.1 || y.1)
        }
        SoExists(_, g) => (true, so_kinds(g).1),
        SoForall(_, g) => (so_kinds(g).0, true),
    }
}

/// Shape of the guards `desugar` introduces: `∀X^{1,0} ∀x∈X φ` and
/// `∃X^{1,0} ∃x (X(x) ∧ φ)`, as (universal?, x, φ). Whether `X` occurs in `φ`
/// is not checked.
fn guard_shape(f: &Formula) -> Option<(bool, &str, &Formula)> {
    use Formula::*;
    match f {
        SoForall(v, g) if v.arity == 1 && v.exponent == 0 => match g.as_ref() {
            ForallIn(xs, guard, body) if guard.name == v.name && xs.len() == 1 => Some((true, &xs[0], body)),
            _ => None,
        },
        SoExists(v, g) if v.arity == 1 && v.exponent == 0 => match g.as_ref() {
            Exists(x, body) => match body.as_ref() {
                And(items) if items.len() == 2 => match &items[0] {
                    Atom(Pred::So(w), args) if w.name == v.name && args.as_slice() == [Term::Var(x.clone())] => {
                        Some((false, x, &items[1]))
                    }
                    _ => None,
                },
                _ => None,
            },
            _ => None,
        },
        _ => None,
    }
}

/// A guard shape whose guard relation is not used in the body, so the
/// quantifier is a plain first-order one over its variable.
fn singleton_guard(f: &Formula) -> Option<(bool, &str, &Formula)> {
    guard_shape(f).filter(|(_, _, body)| !mentions(body, guard_name(f)))
}

fn guard_name(f: &Formula) -> &str {
    match f {
        Formula::SoForall(v, _) | Formula::SoExists(v, _) => &v.name,
        _ => "",
    }
}

/// Whether `name` occurs as a predicate or guard anywhere in `f`.
fn mentions(f: &Formula, name: &str) -> bool {
    use Formula::*;
    match f {
        True | False | Eq(..) => false,
        Atom(p, _) => p.name() == name,
        Not(g) | Exists(_, g) | Forall(_, g) => mentions(g, name),
        ForallIn(_, v, g) | SoExists(v, g) | SoForall(v, g) => v.name == name || mentions(g, name),
        And(gs) | Or(gs) => gs.iter().any(|g| mentions(g, name)),
        Implies(a, b) | Iff(a, b) => mentions(a, name) || mentions(b, name),
    }
}

/// For `∃x g` (or `∀x g` when `universal`): the one value of `x` that is not
/// decided by a `SUCC` or `=` literal against an already bound term, looking
/// through quantifiers of the same kind. Every other value makes `g` false
/// (true). `Some(None)` when no element is left.
fn pinned(
    x: &str,
    g: &Formula,
    universal: bool,
    n: usize,
    succ_builtin: bool,
    value: &dyn Fn(&Term) -> Option<usize>,
) -> Option<Option<usize>> {
    let mut inner: Vec<&str> = Vec::new();
    let mut body = g;
    loop {
        let step = match (body, universal) {
            (Formula::Exists(z, h), false) | (Formula::Forall(z, h), true) => Some((z.as_str(), h.as_ref())),
            _ => guard_shape(body).filter(|(u, _, _)| *u == universal).map(|(_, z, h)| (z, h)),
        };
        let Some((z, h)) = step else { break };
        if z == x {
            return None;
        }
        inner.push(z);
        body = h;
    }
    // literals of the conjunction (disjunction), `flip` when they sit under a negation
    let (items, flip): (&[Formula], bool) = match (body, universal) {
        (Formula::And(items), false) | (Formula::Or(items), true) => (items, false),
        (Formula::Not(inner), _) => match (inner.as_ref(), universal) {
            (Formula::Or(items), false) | (Formula::And(items), true) => (items, true),
            _ => return None,
        },
        _ => return None,
    };
    // the pinning literal is positive in a conjunction, negated in a disjunction
    let want_negated = universal != flip;
    let is_x = |t: &Term| matches!(t, Term::Var(v) if v == x);
    let known = |t: &Term| match t {
        Term::Var(v) if v == x || inner.contains(&v.as_str()) => None,
        t => value(t),
    };
    for item in items {
        let atom = match (want_negated, item) {
            (false, Formula::Not(_)) => continue,
            (false, f) => f,
            (true, Formula::Not(f)) => f.as_ref(),
            (true, _) => continue,
        };
        match atom {
            Formula::Atom(Pred::Rel(r), args) if succ_builtin && r == "SUCC" && args.len() == 2 => {
                if is_x(&args[1]) {
                    if let Some(a) = known(&args[0]) {
                        return Some((a + 1 < n).then_some(a + 1));
                    }
                }
                if is_x(&args[0]) {
                    if let Some(b) = known(&args[1]) {
                        return Some(b.checked_sub(1));
                    }
                }
            }
            Formula::Eq(a, b) => {
                if is_x(a) {
                    if let Some(v) = known(b) {
                        return Some(Some(v));
                    }
                }
                if is_x(b) {
                    if let Some(v) = known(a) {
                        return Some(Some(v));
                    }
                }
            }
            _ => {}
        }
    }
    None
}

fn candidates(pin: Option<Option<usize>>, n: usize) -> std::ops::Range<usize> {
    match pin {
        Some(Some(v)) => v..v + 1,
        Some(None) => 0..0,
        None => 0..n,
    }
}

/// Truth value of `f` in `s` under `val`.
///
/// With [`Strategy::Auto`] each second-order quantifier is enumerated when
/// that is cheap; a subtree that is too large goes to the SAT back end,
/// negated first when it is universal.
pub fn eval(s: &Structure, val: &Valuation, f: &Formula, cfg: &EvalConfig) -> Result<bool> {
    match cfg.strategy {
        Strategy::Ground => Ok(ground_solve(s, val, f, &[], cfg)?.satisfied()),
        Strategy::Enumerate => {
            let mut ev = Evaluator::new(s, cfg, val);
            ev.parallel = cfg.threads > 1;
            ev.eval(f)
        }
        Strategy::Auto => {
            let core = if f.is_core() { f.clone() } else { desugar(f) };
            let mut ev = Evaluator::new(s, cfg, val);
            ev.parallel = cfg.threads > 1;
            ev.eval(&core)
        }
    }
}

/// Splits a formula into its leading existential block and the rest,
/// normalizing first when needed. Fails unless the result is Σ1.
pub fn sigma1_parts(f: &Formula) -> Result<(Vec<SoVar>, Formula)> {
    let g = match classify(f) {
        FragmentLabel::Sigma(1) => f.clone(),
        _ => to_snf(f),
    };
    match classify(&g) {
        FragmentLabel::Sigma(1) => {}
        other => return Err(EvalError::NotSigma1(other.to_string())),
    }
    let (prefix, matrix) = g.so_prefix();
    debug_assert!(prefix.iter().all(|(q, _)| *q == Quant::Exists));
    Ok((prefix.into_iter().map(|(_, v)| v).collect(), matrix.clone()))
}

/// A valuation of the leading existential block under which the matrix
/// holds, or `None` when the sentence is false.
pub fn find_witness(s: &Structure, f: &Formula, cfg: &EvalConfig) -> Result<Option<Valuation>> {
    let (block, matrix) = sigma1_parts(f)?;
    let n = s.size();
    let total = block
        .iter()
        .map(|v| relation_count(n, v.arity, v.exponent))
        .fold(1u128, u128::saturating_mul)
        .saturating_mul(enumeration_cost(&matrix, n).max(1));
    let enumerate = match cfg.strategy {
        Strategy::Enumerate => true,
        Strategy::Ground => false,
        Strategy::Auto => total <= cfg.max_candidates as u128,
    };
    if !enumerate {
        let outcome = ground_solve(s, &Valuation::new(), &matrix, &block, cfg)?;
        return Ok(match outcome {
            GroundOutcome::Sat(w) => Some(w),
            GroundOutcome::Unsat => None,
        });
    }
    let lists: Vec<Vec<TupleSet>> = block
        .iter()
        .map(|v| enumerate_relations(n, v.arity, v.exponent, cfg.max_candidates).map(Iterator::collect))
        .collect::<Result<_>>()?;
    let sizes: Vec<u128> = lists.iter().map(|l| l.len() as u128).collect();
    let space: u128 = sizes.iter().product();
    if space > cfg.max_candidates as u128 && cfg.strategy != Strategy::Enumerate {
        return Err(EvalError::ResourceExceeded {
            what: "joint witness space".into(),
            needed: space.to_string(),
            limit: cfg.max_candidates,
        });
    }
    let build = |mut idx: u128| -> Valuation {
        let mut w = Valuation::new();
        for (v, list) in block.iter().zip(&lists).rev() {
            let len = list.len() as u128;
            w.second_order.insert(v.name.clone(), list[(idx % len) as usize].clone());
            idx /= len;
        }
        w
    };
    let test = |idx: u128| -> Result<bool> {
        let w = build(idx);
        Evaluator::new(s, cfg, &w).eval(&matrix)
    };
    const CHUNK: u128 = 4096;
    let mut start = 0u128;
    while start < space {
        let end = (start + CHUNK).min(space);
        let hit = if cfg.threads > 1 {
            let pool = pool(cfg.threads);
            pool.install(|| {
                (start as u64..end as u64).into_par_iter().find_first(|&i| !matches!(test(i as u128), Ok(false)))
            })
        } else {
            (start as u64..end as u64).find(|&i| !matches!(test(i as u128), Ok(false)))
        };
        if let Some(i) = hit {
            // re-run to surface errors deterministically
            return if test(i as u128)? { Ok(Some(build(i as u128))) } else { unreachable!() };
        }
        start = end;
    }
    Ok(None)
}

/// Evaluates the matrix of a Σ1 sentence under a proposed witness.
pub fn check_witness(s: &Structure, f: &Formula, w: &Valuation, cfg: &EvalConfig) -> Result<bool> {
    let (block, matrix) = sigma1_parts(f)?;
    w.check_against(s.size(), &block)?;
    Evaluator::new(s, cfg, w).eval(&matrix)
}

fn pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool")
}

struct Evaluator<'a> {
    s: &'a Structure,
    cfg: &'a EvalConfig,
    fo: Vec<(String, usize)>,
    so: Vec<(String, Arc<TupleSet>)>,
    depth: usize,
    parallel: bool,
    buf: Vec<usize>,
}

impl<'a> Evaluator<'a> {
    fn new(s: &'a Structure, cfg: &'a EvalConfig, val: &Valuation) -> Self {
        Evaluator {
            s,
            cfg,
            fo: val.first_order.iter().map(|(k, v)| (k.clone(), *v)).collect(),
            so: val.second_order.iter().map(|(k, v)| (k.clone(), Arc::new(v.clone()))).collect(),
            depth: 0,
            parallel: false,
            buf: Vec::new(),
        }
    }

    fn term(&self, t: &Term) -> Result<usize> {
        match t {
            Term::Var(v) => self
                .fo
                .iter()
                .rev()
                .find(|(k, _)| k == v)
                .map(|(_, x)| *x)
                .ok_or_else(|| EvalError::UnboundVariable(v.clone())),
            Term::Const(c) => self.s.constant(c).ok_or_else(|| EvalError::UnknownConstant(c.clone())),
        }
    }

    fn so_lookup(&self, name: &str) -> Option<&Arc<TupleSet>> {
        self.so.iter().rev().find(|(k, _)| k == name).map(|(_, r)| r)
    }

    fn atom(&mut self, p: &Pred, args: &[Term]) -> Result<bool> {
        let mut buf = std::mem::take(&mut self.buf);
        buf.clear();
        for t in args {
            buf.push(self.term(t)?);
        }
        let name = p.name();
        let out = if let Some(rel) = self.so_lookup(name) {
            Ok(rel.contains(buf.as_slice()))
        } else if let Pred::So(_) = p {
            Err(EvalError::UnboundSoVariable(name.to_string()))
        } else {
            self.s.holds(name, &buf).ok_or_else(|| EvalError::UnknownRelation(name.to_string()))
        };
        self.buf = buf;
        out
    }

    fn eval(&mut self, f: &Formula) -> Result<bool> {
        self.depth += 1;
        if self.depth > self.cfg.max_depth {
            return Err(EvalError::DepthExceeded(self.cfg.max_depth));
        }
        let out = self.eval_inner(f);
        self.depth -= 1;
        out
    }

    fn eval_inner(&mut self, f: &Formula) -> Result<bool> {
        use Formula::*;
        let n = self.s.size();
        match f {
            True => Ok(true),
            False => Ok(false),
            Atom(p, args) => self.atom(p, args),
            Eq(a, b) => Ok(self.term(a)? == self.term(b)?),
            Not(g) => Ok(!self.eval(g)?),
            And(gs) => {
                for g in gs {
                    if !self.eval(g)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Or(gs) => {
                for g in gs {
                    if self.eval(g)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Implies(a, b) => Ok(!self.eval(a)? || self.eval(b)?),
            Iff(a, b) => Ok(self.eval(a)? == self.eval(b)?),
            Exists(x, g) | Forall(x, g) => {
                let want = matches!(f, Exists(..));
                let succ_builtin = self.so_lookup("SUCC").is_none();
                let pin = pinned(x, g, !want, n, succ_builtin, &|t| self.term(t).ok());
                for v in candidates(pin, n) {
                    self.fo.push((x.clone(), v));
                    let r = self.eval(g);
                    self.fo.pop();
                    if r? == want {
                        return Ok(want);
                    }
                }
                Ok(!want)
            }
            ForallIn(xs, guard, g) => {
                let rel = self
                    .so_lookup(&guard.name)
                    .cloned()
                    .ok_or_else(|| EvalError::UnboundSoVariable(guard.name.clone()))?;
                let tuples: Box<dyn Iterator<Item = Tuple>> = if self.cfg.naive_restricted {
                    Box::new(all_tuples(n, xs.len()).filter(|t| rel.contains(t)))
                } else {
                    Box::new(rel.iter().cloned())
                };
                for t in tuples {
                    if t.len() != xs.len() {
                        return Err(EvalError::ArityViolation {
                            name: guard.name.clone(),
                            expected: xs.len(),
                            got: t.len(),
                        });
                    }
                    for (x, &v) in xs.iter().zip(&t) {
                        self.fo.push((x.clone(), v));
                    }
                    let r = self.eval(g);
                    self.fo.truncate(self.fo.len() - xs.len());
                    if !r? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            SoExists(v, g) | SoForall(v, g) => {
                let want = matches!(f, SoExists(..));
                if self.cfg.strategy == Strategy::Auto {
                    let cost = enumeration_cost(f, n);
                    if cost > self.cfg.max_candidates as u128 {
                        let (ex, fa) = so_kinds(f);
                        let uniform = !(ex && fa);
                        if uniform || relation_count(n, v.arity, v.exponent) > self.cfg.max_candidates as u128 {
                            return self.by_sat(f, want);
                        }
                    }
                }
                let cands = enumerate_relations(n, v.arity, v.exponent, self.cfg.max_candidates)?;
                if self.parallel {
                    self.parallel = false;
                    return self.so_parallel(v, g, cands, want);
                }
                for rel in cands {
                    self.so.push((v.name.clone(), Arc::new(rel)));
                    let r = self.eval(g);
                    self.so.pop();
                    if r? == want {
                        return Ok(want);
                    }
                }
                Ok(!want)
            }
        }
    }

    fn snapshot(&self) -> Valuation {
        let mut val = Valuation::new();
        for (k, v) in &self.fo {
            val.first_order.insert(k.clone(), *v);
        }
        for (k, r) in &self.so {
            val.second_order.insert(k.clone(), (**r).clone());
        }
        val
    }

    fn by_sat(&mut self, f: &Formula, existential: bool) -> Result<bool> {
        let val = self.snapshot();
        if existential {
            Ok(ground_solve(self.s, &val, f, &[], self.cfg)?.satisfied())
        } else {
            let neg = desugar(&not(f.clone()));
            Ok(!ground_solve(self.s, &val, &neg, &[], self.cfg)?.satisfied())
        }
    }

    fn so_parallel(&mut self, v: &SoVar, g: &Formula, cands: RelationIter, want: bool) -> Result<bool> {
        let all: Vec<TupleSet> = cands.collect();
        let pool = pool(self.cfg.threads);
        let (s, cfg, fo, so, depth) = (self.s, self.cfg, &self.fo, &self.so, self.depth);
        let run = |rel: &TupleSet| -> Result<bool> {
            let mut ev = Evaluator { s, cfg, fo: fo.clone(), so: so.clone(), depth, parallel: false, buf: Vec::new() };
            ev.so.push((v.name.clone(), Arc::new(rel.clone())));
            ev.eval(g)
        };
        let hit = pool.install(|| all.par_iter().position_first(|rel| !matches!(run(rel), Ok(b) if b != want)));
        match hit {
            Some(i) => run(&all[i]),
            None => Ok(!want),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::structure::{Interpretation, Vocabulary};

    fn plain(n: usize) -> Structure {
        Structure::new(Vocabulary::new(), n, Interpretation::new()).unwrap()
    }

    /// Constants `c2`, `c3` naming the elements 2 and 3.
    fn named(n: usize) -> Structure {
        let vocab = Vocabulary::new().with_constant("c2").unwrap().with_constant("c3").unwrap();
        Structure::new(vocab, n, Interpretation::new().constant("c2", 2).constant("c3", 3)).unwrap()
    }

    #[test]
    fn relation_counts() {
        assert_eq!(enumerate_relations(4, 1, 0, 1000).unwrap().count(), 5);
        assert_eq!(enumerate_relations(4, 2, 1, 1000).unwrap().count(), 137);
        assert_eq!(enumerate_relations(2, 1, 1, 1000).unwrap().count(), 3);
        assert_eq!(relation_count(4, 2, 1), 137);
        assert!(matches!(enumerate_relations(4, 2, 1, 100), Err(EvalError::ResourceExceeded { .. })));
    }

    #[test]
    fn enumeration_order() {
        let rels: Vec<TupleSet> = enumerate_relations(3, 1, 1, 100).unwrap().collect();
        // ⌈log 3⌉ = 2: ∅, {0}, {1}, {2}, {0,1}, {0,2}, {1,2}
        let shown: Vec<Vec<usize>> = rels.iter().map(|r| r.iter().map(|t| t[0]).collect()).collect();
        assert_eq!(shown, vec![vec![], vec![0], vec![1], vec![2], vec![0, 1], vec![0, 2], vec![1, 2]]);
    }

    #[test]
    fn simple_sentences() {
        let cfg = EvalConfig::default();
        let s = plain(4);
        assert!(eval(&s, &Valuation::new(), &parse("Ex x . x = 0").unwrap(), &cfg).unwrap());
        assert!(eval(&s, &Valuation::new(), &parse("SEx X^{2,1} . X(0, 1)").unwrap(), &cfg).unwrap());
        let contra = parse("SEx X^{1,1} . X(0) & ~X(0)").unwrap();
        assert!(!eval(&s, &Valuation::new(), &contra, &cfg).unwrap());
        assert_eq!(find_witness(&s, &contra, &cfg).unwrap(), None);
    }

    #[test]
    fn strategies_agree() {
        let s = plain(3);
        let f = parse("SAll X^{1,1} . SEx Y^{1,1} . All x in X . ~Y(x) & Ex z . Y(z)").unwrap();
        let mut cfg = EvalConfig { strategy: Strategy::Enumerate, ..Default::default() };
        let a = eval(&s, &Valuation::new(), &f, &cfg).unwrap();
        cfg.strategy = Strategy::Ground;
        let b = eval(&s, &Valuation::new(), &f, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a);
    }

    #[test]
    fn witnesses_are_minimal_and_checked() {
        let s = named(4);
        let f = parse("SEx X^{1,1} . X(1) & X(@c2)").unwrap();
        let cfg = EvalConfig { strategy: Strategy::Enumerate, ..Default::default() };
        let w = find_witness(&s, &f, &cfg).unwrap().unwrap();
        assert_eq!(w.second_order["X"], [vec![1], vec![2]].into_iter().collect());
        assert!(check_witness(&s, &f, &w, &cfg).unwrap());
        let bad = Valuation::new().with_relation("X", [vec![1]]);
        assert!(!check_witness(&s, &f, &bad, &cfg).unwrap());
        let big = Valuation::new().with_relation("X", [vec![0], vec![1], vec![2]]);
        assert!(matches!(check_witness(&s, &f, &big, &cfg), Err(EvalError::BoundViolation { .. })));
    }

    #[test]
    fn parallel_matches_sequential() {
        let s = named(4);
        let f = parse("SEx X^{1,1} . X(@c3) & Ex y . X(y) & y != @c3 & y != 0").unwrap();
        let seq = EvalConfig { strategy: Strategy::Enumerate, ..Default::default() };
        let par = EvalConfig { threads: 4, ..seq.clone() };
        assert_eq!(find_witness(&s, &f, &seq).unwrap(), find_witness(&s, &f, &par).unwrap());
        assert_eq!(
            eval(&s, &Valuation::new(), &f, &seq).unwrap(),
            eval(&s, &Valuation::new(), &f, &par).unwrap()
        );
    }
}
