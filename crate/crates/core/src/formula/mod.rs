//! Formulas of restricted second-order logic.
//!
//! One AST serves both the surface language (with `~`, `->`, `<->` and
//! unbounded `All x`) and the core language of well-formed formulas, in which
//! negation only appears on atoms and the only universal first-order
//! quantifier is the restricted form `All x̄ in X . φ`. [`desugar`] maps the
//! former onto the latter and [`Formula::is_core`] recognises it.

mod desugar;
mod parse;
mod pretty;
mod snf;

use std::collections::BTreeSet;
use std::fmt;

pub use desugar::desugar;
pub use parse::{parse, ParseError};
pub use pretty::pretty;
pub use snf::{classify, to_snf, FragmentLabel};

/// A first-order term: a variable or a constant symbol.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Const(String),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn constant(name: impl Into<String>) -> Self {
        Term::Const(name.into())
    }

    pub fn zero() -> Self {
        Term::Const("0".into())
    }

    pub fn one() -> Self {
        Term::Const("1".into())
    }

    pub fn logn() -> Self {
        Term::Const("logn".into())
    }

    pub fn max() -> Self {
        Term::Const("max".into())
    }

    pub fn bit(b: bool) -> Self {
        if b {
            Term::one()
        } else {
            Term::zero()
        }
    }
}

/// A second-order variable `X^{r, log^k}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SoVar {
    pub name: String,
    pub arity: usize,
    pub exponent: usize,
}

impl SoVar {
    pub fn new(name: impl Into<String>, arity: usize, exponent: usize) -> Self {
        assert!(arity >= 1, "second-order variables need arity >= 1");
        SoVar { name: name.into(), arity, exponent }
    }

    /// Atom `X(args)`.
    pub fn at<I, T>(&self, args: I) -> Formula
    where
        I: IntoIterator<Item = T>,
        T: Into<Term>,
    {
        let args: Vec<Term> = args.into_iter().map(Into::into).collect();
        assert_eq!(args.len(), self.arity, "arity mismatch for {}", self.name);
        Formula::Atom(Pred::So(self.clone()), args)
    }
}

impl fmt::Display for SoVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^{{{},{}}}", self.name, self.arity, self.exponent)
    }
}

impl From<&str> for Term {
    fn from(s: &str) -> Self {
        Term::Var(s.into())
    }
}

impl From<String> for Term {
    fn from(s: String) -> Self {
        Term::Var(s)
    }
}

impl From<&String> for Term {
    fn from(s: &String) -> Self {
        Term::Var(s.clone())
    }
}

impl From<&Term> for Term {
    fn from(t: &Term) -> Self {
        t.clone()
    }
}

/// Predicate of an atom: a vocabulary relation or a second-order variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pred {
    Rel(String),
    So(SoVar),
}

impl Pred {
    pub fn name(&self) -> &str {
        match self {
            Pred::Rel(n) => n,
            Pred::So(v) => &v.name,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Atom(Pred, Vec<Term>),
    Eq(Term, Term),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Exists(String, Box<Formula>),
    /// Unbounded first-order universal quantifier (surface sugar).
    Forall(String, Box<Formula>),
    /// Restricted universal `∀x̄ (X(x̄) → φ)`.
    ForallIn(Vec<String>, SoVar, Box<Formula>),
    SoExists(SoVar, Box<Formula>),
    SoForall(SoVar, Box<Formula>),
}

/// Quantifier polarity of a second-order prefix entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quant {
    Exists,
    Forall,
}

// Builders. They collapse trivial n-ary cases so generated formulas stay
// readable and print/parse to the same tree.

pub fn rel<I, T>(name: &str, args: I) -> Formula
where
    I: IntoIterator<Item = T>,
    T: Into<Term>,
{
    Formula::Atom(Pred::Rel(name.into()), args.into_iter().map(Into::into).collect())
}

pub fn eq(a: impl Into<Term>, b: impl Into<Term>) -> Formula {
    Formula::Eq(a.into(), b.into())
}

pub fn neq(a: impl Into<Term>, b: impl Into<Term>) -> Formula {
    not(eq(a, b))
}

pub fn leq(a: impl Into<Term>, b: impl Into<Term>) -> Formula {
    rel("LEQ", [a.into(), b.into()])
}

pub fn succ(a: impl Into<Term>, b: impl Into<Term>) -> Formula {
    rel("SUCC", [a.into(), b.into()])
}

pub fn bit(a: impl Into<Term>, b: impl Into<Term>) -> Formula {
    rel("BIT", [a.into(), b.into()])
}

pub fn not(f: Formula) -> Formula {
    match f {
        Formula::True => Formula::False,
        Formula::False => Formula::True,
        f => Formula::Not(Box::new(f)),
    }
}

pub fn and(items: Vec<Formula>) -> Formula {
    let items: Vec<Formula> = items.into_iter().filter(|f| *f != Formula::True).collect();
    if items.contains(&Formula::False) {
        return Formula::False;
    }
    match items.len() {
        0 => Formula::True,
        1 => items.into_iter().next().unwrap(),
        _ => Formula::And(items),
    }
}

pub fn or(items: Vec<Formula>) -> Formula {
    let items: Vec<Formula> = items.into_iter().filter(|f| *f != Formula::False).collect();
    if items.contains(&Formula::True) {
        return Formula::True;
    }
    match items.len() {
        0 => Formula::False,
        1 => items.into_iter().next().unwrap(),
        _ => Formula::Or(items),
    }
}

pub fn implies(a: Formula, b: Formula) -> Formula {
    Formula::Implies(Box::new(a), Box::new(b))
}

pub fn iff(a: Formula, b: Formula) -> Formula {
    Formula::Iff(Box::new(a), Box::new(b))
}

pub fn exists(var: impl Into<String>, body: Formula) -> Formula {
    Formula::Exists(var.into(), Box::new(body))
}

pub fn exists_all<I, S>(vars: I, body: Formula) -> Formula
where
    I: IntoIterator<Item = S>,
    I::IntoIter: DoubleEndedIterator,
    S: Into<String>,
{
    vars.into_iter().rev().fold(body, |acc, v| exists(v, acc))
}

pub fn forall(var: impl Into<String>, body: Formula) -> Formula {
    Formula::Forall(var.into(), Box::new(body))
}

pub fn forall_in<I, S>(vars: I, guard: &SoVar, body: Formula) -> Formula
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let vars: Vec<String> = vars.into_iter().map(Into::into).collect();
    assert_eq!(vars.len(), guard.arity, "guard arity mismatch for {}", guard.name);
    Formula::ForallIn(vars, guard.clone(), Box::new(body))
}

pub fn so_exists(var: &SoVar, body: Formula) -> Formula {
    Formula::SoExists(var.clone(), Box::new(body))
}

pub fn so_exists_all(vars: &[SoVar], body: Formula) -> Formula {
    vars.iter().rev().fold(body, |acc, v| so_exists(v, acc))
}

pub fn so_forall(var: &SoVar, body: Formula) -> Formula {
    Formula::SoForall(var.clone(), Box::new(body))
}

/// Free variables of a formula: first-order names and second-order variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FreeVars {
    pub first_order: BTreeSet<String>,
    pub second_order: BTreeSet<SoVar>,
}

impl Formula {
    pub fn free_vars(&self) -> FreeVars {
        let mut out = FreeVars::default();
        self.collect_free(&mut Vec::new(), &mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, fo: &mut Vec<String>, so: &mut Vec<String>, out: &mut FreeVars) {
        use Formula::*;
        let add_terms = |args: &[Term], fo: &Vec<String>, out: &mut FreeVars| {
            for t in args {
                if let Term::Var(v) = t {
                    if !fo.contains(v) {
                        out.first_order.insert(v.clone());
                    }
                }
            }
        };
        match self {
            True | False => {}
            Atom(p, args) => {
                if let Pred::So(v) = p {
                    if !so.contains(&v.name) {
                        out.second_order.insert(v.clone());
                    }
                }
                add_terms(args, fo, out);
            }
            Eq(a, b) => add_terms(&[a.clone(), b.clone()], fo, out),
            Not(g) => g.collect_free(fo, so, out),
            And(gs) | Or(gs) => gs.iter().for_each(|g| g.collect_free(fo, so, out)),
            Implies(a, b) | Iff(a, b) => {
                a.collect_free(fo, so, out);
                b.collect_free(fo, so, out);
            }
            Exists(x, g) | Forall(x, g) => {
                fo.push(x.clone());
                g.collect_free(fo, so, out);
                fo.pop();
            }
            ForallIn(xs, guard, g) => {
                if !so.contains(&guard.name) {
                    out.second_order.insert(guard.clone());
                }
                fo.extend(xs.iter().cloned());
                g.collect_free(fo, so, out);
                fo.truncate(fo.len() - xs.len());
            }
            SoExists(v, g) | SoForall(v, g) => {
                so.push(v.name.clone());
                g.collect_free(fo, so, out);
                so.pop();
            }
        }
    }

    /// Whether the formula is built only from the well-formed shapes: literals,
    /// `∧`, `∨`, `∃x`, restricted `∀x̄ (X(x̄) → φ)` with distinct guard
    /// variables, and second-order `∃X` / `∀X`.
    pub fn is_core(&self) -> bool {
        use Formula::*;
        match self {
            True | False | Atom(..) | Eq(..) => true,
            Not(g) => matches!(**g, Atom(..) | Eq(..)),
            And(gs) | Or(gs) => gs.iter().all(Formula::is_core),
            Exists(_, g) | SoExists(_, g) | SoForall(_, g) => g.is_core(),
            ForallIn(xs, _, g) => {
                let distinct: BTreeSet<&String> = xs.iter().collect();
                distinct.len() == xs.len() && g.is_core()
            }
            Implies(..) | Iff(..) | Forall(..) => false,
        }
    }

    /// Whether no second-order quantifier occurs anywhere.
    pub fn is_so_quantifier_free(&self) -> bool {
        use Formula::*;
        match self {
            True | False | Atom(..) | Eq(..) => true,
            Not(g) | Exists(_, g) | Forall(_, g) | ForallIn(_, _, g) => g.is_so_quantifier_free(),
            And(gs) | Or(gs) => gs.iter().all(Formula::is_so_quantifier_free),
            Implies(a, b) | Iff(a, b) => a.is_so_quantifier_free() && b.is_so_quantifier_free(),
            SoExists(..) | SoForall(..) => false,
        }
    }

    /// Every name mentioned anywhere: variables, relations, SO variables.
    pub fn all_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit_names(&mut out);
        out
    }

    fn visit_names(&self, out: &mut BTreeSet<String>) {
        use Formula::*;
        let terms = |args: &[Term], out: &mut BTreeSet<String>| {
            for t in args {
                match t {
                    Term::Var(v) | Term::Const(v) => {
                        out.insert(v.clone());
                    }
                }
            }
        };
        match self {
            True | False => {}
            Atom(p, args) => {
                out.insert(p.name().to_string());
                terms(args, out);
            }
            Eq(a, b) => terms(&[a.clone(), b.clone()], out),
            Not(g) => g.visit_names(out),
            And(gs) | Or(gs) => gs.iter().for_each(|g| g.visit_names(out)),
            Implies(a, b) | Iff(a, b) => {
                a.visit_names(out);
                b.visit_names(out);
            }
            Exists(x, g) | Forall(x, g) => {
                out.insert(x.clone());
                g.visit_names(out);
            }
            ForallIn(xs, v, g) => {
                out.extend(xs.iter().cloned());
                out.insert(v.name.clone());
                g.visit_names(out);
            }
            SoExists(v, g) | SoForall(v, g) => {
                out.insert(v.name.clone());
                g.visit_names(out);
            }
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        use Formula::*;
        1 + match self {
            True | False | Atom(..) | Eq(..) => 0,
            Not(g) | Exists(_, g) | Forall(_, g) | ForallIn(_, _, g) | SoExists(_, g) | SoForall(_, g) => g.size(),
            And(gs) | Or(gs) => gs.iter().map(Formula::size).sum(),
            Implies(a, b) | Iff(a, b) => a.size() + b.size(),
        }
    }

    /// Splits off the leading run of second-order quantifiers.
    pub fn so_prefix(&self) -> (Vec<(Quant, SoVar)>, &Formula) {
        let mut prefix = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                Formula::SoExists(v, g) => {
                    prefix.push((Quant::Exists, v.clone()));
                    cur = g;
                }
                Formula::SoForall(v, g) => {
                    prefix.push((Quant::Forall, v.clone()));
                    cur = g;
                }
                _ => return (prefix, cur),
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty(self))
    }
}

/// Generates names not clashing with a reserved set; numeric suffixes in
/// increasing order so output is reproducible.
#[derive(Debug, Clone)]
pub struct FreshNames {
    used: BTreeSet<String>,
}

impl FreshNames {
    pub fn new(used: BTreeSet<String>) -> Self {
        FreshNames { used }
    }

    pub fn avoiding(f: &Formula) -> Self {
        Self::new(f.all_names())
    }

    pub fn reserve(&mut self, name: &str) {
        self.used.insert(name.to_string());
    }

    pub fn is_used(&self, name: &str) -> bool {
        self.used.contains(name)
    }

    pub fn fresh(&mut self, base: &str) -> String {
        let mut i = 1;
        loop {
            let cand = format!("{base}{i}");
            if !self.used.contains(&cand) && !parse::is_reserved(&cand) {
                self.used.insert(cand.clone());
                return cand;
            }
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_vars_examples() {
        let x = SoVar::new("X", 2, 1);
        let fv = x.at([Term::zero(), Term::one()]).free_vars();
        assert!(fv.first_order.is_empty());
        assert_eq!(fv.second_order.into_iter().collect::<Vec<_>>(), vec![x.clone()]);

        let r = forall_in(["x0", "x1"], &x, rel("R", ["x0"]));
        let fv = r.free_vars();
        assert!(fv.first_order.is_empty());
        assert_eq!(fv.second_order.len(), 1);

        let y = SoVar::new("X", 1, 1);
        let f = so_exists(&y, y.at(["y"]));
        let fv = f.free_vars();
        assert_eq!(fv.first_order.into_iter().collect::<Vec<_>>(), vec!["y".to_string()]);
        assert!(fv.second_order.is_empty());
    }

    #[test]
    fn core_shapes() {
        let x = SoVar::new("X", 1, 0);
        assert!(not(rel("R", ["x"])).is_core());
        assert!(!not(exists("x", rel("R", ["x"]))).is_core());
        assert!(!forall("x", rel("R", ["x"])).is_core());
        assert!(forall_in(["x"], &x, rel("R", ["x"])).is_core());
        let y = SoVar::new("Y", 2, 0);
        assert!(!forall_in(["x", "x"], &y, Formula::True).is_core());
    }

    #[test]
    fn fresh_names_skip_used() {
        let mut names = FreshNames::new(["X1".to_string()].into_iter().collect());
        assert_eq!(names.fresh("X"), "X2");
        assert_eq!(names.fresh("X"), "X3");
    }
}
