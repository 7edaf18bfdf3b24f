//! Shared helpers for the integration tests: a direct reference evaluator,
//! random formulas over one unary relation, and small structure families.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use soplog::formula::{Formula, Pred, SoVar, Term};
use soplog::structure::{Interpretation, Structure, Vocabulary};

type Tuple = Vec<usize>;

/// Every unary-`R` structure of each size in `sizes`.
pub fn unary_structures(sizes: &[usize]) -> Vec<Structure> {
    let vocab = Vocabulary::new().with_relation("R", 1).unwrap();
    let mut out = Vec::new();
    for &n in sizes {
        for mask in 0u32..1 << n {
            let r: Vec<Tuple> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| vec![i]).collect();
            out.push(Structure::new(vocab.clone(), n, Interpretation::new().relation("R", r)).unwrap());
        }
    }
    out
}

fn ceil_log(n: usize) -> usize {
    let mut l = 0;
    while (1usize << l) < n {
        l += 1;
    }
    l
}

fn tuples(n: usize, r: usize) -> Vec<Tuple> {
    let mut out = vec![vec![]];
    for _ in 0..r {
        out = out.into_iter().flat_map(|t| (0..n).map(move |e| [t.clone(), vec![e]].concat())).collect();
    }
    out
}

/// All subsets of `A^r` with at most `bound` tuples.
fn bounded_subsets(n: usize, r: usize, bound: usize) -> Vec<BTreeSet<Tuple>> {
    let all = tuples(n, r);
    let mut out = Vec::new();
    fn grow(all: &[Tuple], from: usize, bound: usize, cur: &mut Vec<Tuple>, out: &mut Vec<BTreeSet<Tuple>>) {
        out.push(cur.iter().cloned().collect());
        if cur.len() == bound {
            return;
        }
        for i in from..all.len() {
            cur.push(all[i].clone());
            grow(all, i + 1, bound, cur, out);
            cur.pop();
        }
    }
    grow(&all, 0, bound, &mut Vec::new(), &mut out);
    out
}

/// Textbook semantics, written without reference to the crate's evaluator:
/// second-order quantifiers range over every relation of the bounded size,
/// `∀x` over every element, `∀x̄ ∈ X` over the tuples of `X`.
pub struct Reference<'a> {
    s: &'a Structure,
    fo: Vec<(String, usize)>,
    so: Vec<(String, BTreeSet<Tuple>)>,
}

impl<'a> Reference<'a> {
    pub fn new(s: &'a Structure) -> Self {
        Reference { s, fo: Vec::new(), so: Vec::new() }
    }

    pub fn with_relation(mut self, name: &str, rel: BTreeSet<Tuple>) -> Self {
        self.so.push((name.into(), rel));
        self
    }

    fn term(&self, t: &Term) -> usize {
        match t {
            Term::Var(v) => self.fo.iter().rev().find(|(k, _)| k == v).map(|(_, e)| *e).expect("bound variable"),
            Term::Const(c) => {
                let n = self.s.size();
                match c.as_str() {
                    "0" => 0,
                    "1" => 1,
                    "max" => n - 1,
                    "logn" => ceil_log(n),
                    other => self.s.constant(other).expect("constant"),
                }
            }
        }
    }

    pub fn holds(&mut self, f: &Formula) -> bool {
        use Formula::*;
        let n = self.s.size();
        match f {
            True => true,
            False => false,
            Eq(a, b) => self.term(a) == self.term(b),
            Atom(p, args) => {
                let v: Tuple = args.iter().map(|t| self.term(t)).collect();
                match p {
                    Pred::So(x) => self.so.iter().rev().find(|(k, _)| *k == x.name).expect("bound relation").1.contains(&v),
                    Pred::Rel(r) => match (r.as_str(), v.as_slice()) {
                        ("LEQ", [a, b]) => a <= b,
                        ("SUCC", [a, b]) => a + 1 == *b,
                        ("BIT", [i, j]) => (i >> j) & 1 == 1,
                        _ => self.s.relation(r).expect("relation").contains(&v),
                    },
                }
            }
            Not(g) => !self.holds(g),
            And(gs) => gs.iter().all(|g| self.holds(g)),
            Or(gs) => gs.iter().any(|g| self.holds(g)),
            Implies(a, b) => !self.holds(a) || self.holds(b),
            Iff(a, b) => self.holds(a) == self.holds(b),
            Exists(x, g) | Forall(x, g) => {
                let want = matches!(f, Exists(..));
                let mut result = !want;
                for e in 0..n {
                    self.fo.push((x.clone(), e));
                    let v = self.holds(g);
                    self.fo.pop();
                    if v == want {
                        result = want;
                        break;
                    }
                }
                result
            }
            ForallIn(xs, guard, g) => {
                let rel = self.so.iter().rev().find(|(k, _)| *k == guard.name).expect("bound guard").1.clone();
                rel.iter().all(|t| {
                    for (x, e) in xs.iter().zip(t) {
                        self.fo.push((x.clone(), *e));
                    }
                    let v = self.holds(g);
                    self.fo.truncate(self.fo.len() - xs.len());
                    v
                })
            }
            SoExists(v, g) | SoForall(v, g) => {
                let want = matches!(f, SoExists(..));
                let bound = ceil_log(n).pow(v.exponent as u32);
                for rel in bounded_subsets(n, v.arity, bound) {
                    self.so.push((v.name.clone(), rel));
                    let r = self.holds(g);
                    self.so.pop();
                    if r == want {
                        return want;
                    }
                }
                !want
            }
        }
    }
}

/// Random sentences over `R/1` of nesting depth at most `depth`, with at
/// most two second-order quantifiers of exponent 1.
pub struct FormulaGen {
    rng: StdRng,
    fo: Vec<String>,
    so: Vec<SoVar>,
    so_budget: usize,
    counter: usize,
}

impl FormulaGen {
    pub fn new(seed: u64) -> Self {
        FormulaGen { rng: StdRng::seed_from_u64(seed), fo: Vec::new(), so: Vec::new(), so_budget: 2, counter: 0 }
    }

    pub fn sentence(&mut self, depth: usize) -> Formula {
        self.fo.clear();
        self.so.clear();
        self.so_budget = 2;
        self.formula(depth)
    }

    fn term(&mut self) -> Term {
        if !self.fo.is_empty() && self.rng.gen_bool(0.75) {
            let i = self.rng.gen_range(0..self.fo.len());
            Term::var(self.fo[i].clone())
        } else {
            match self.rng.gen_range(0..4) {
                0 => Term::zero(),
                1 => Term::one(),
                2 => Term::max(),
                _ => Term::logn(),
            }
        }
    }

    fn atom(&mut self) -> Formula {
        match self.rng.gen_range(0..8) {
            0 => Formula::Atom(Pred::Rel("R".into()), vec![self.term()]),
            1 => Formula::Eq(self.term(), self.term()),
            2 => Formula::Atom(Pred::Rel("LEQ".into()), vec![self.term(), self.term()]),
            3 => Formula::Atom(Pred::Rel("SUCC".into()), vec![self.term(), self.term()]),
            4 => Formula::Atom(Pred::Rel("BIT".into()), vec![self.term(), self.term()]),
            5 if !self.so.is_empty() => {
                let v = self.so[self.rng.gen_range(0..self.so.len())].clone();
                let args = (0..v.arity).map(|_| self.term()).collect();
                Formula::Atom(Pred::So(v), args)
            }
            6 => Formula::True,
            7 => Formula::False,
            _ => Formula::Atom(Pred::Rel("R".into()), vec![self.term()]),
        }
    }

    fn fresh(&mut self, base: &str) -> String {
        self.counter += 1;
        format!("{base}{}", self.counter)
    }

    fn formula(&mut self, depth: usize) -> Formula {
        if depth == 0 || self.rng.gen_bool(0.2) {
            return self.atom();
        }
        let d = depth - 1;
        match self.rng.gen_range(0..10) {
            0 => Formula::Not(Box::new(self.formula(d))),
            1 => Formula::And(vec![self.formula(d), self.formula(d)]),
            2 => Formula::Or(vec![self.formula(d), self.formula(d)]),
            3 => Formula::Implies(Box::new(self.formula(d)), Box::new(self.formula(d))),
            4 => Formula::Iff(Box::new(self.formula(d)), Box::new(self.formula(d))),
            5 | 6 => {
                let x = self.fresh("x");
                self.fo.push(x.clone());
                let body = self.formula(d);
                self.fo.pop();
                if self.rng.gen_bool(0.5) {
                    Formula::Exists(x, Box::new(body))
                } else {
                    Formula::Forall(x, Box::new(body))
                }
            }
            7 if !self.so.is_empty() => {
                let guard = self.so[self.rng.gen_range(0..self.so.len())].clone();
                let xs: Vec<String> = (0..guard.arity).map(|_| self.fresh("y")).collect();
                self.fo.extend(xs.iter().cloned());
                let body = self.formula(d);
                self.fo.truncate(self.fo.len() - xs.len());
                Formula::ForallIn(xs, guard, Box::new(body))
            }
            8 | 9 if self.so_budget > 0 => {
                self.so_budget -= 1;
                let name = self.fresh("P");
                let v = SoVar::new(name, self.rng.gen_range(1..=2), 1);
                self.so.push(v.clone());
                let body = self.formula(d);
                self.so.pop();
                if self.rng.gen_bool(0.5) {
                    Formula::SoExists(v, Box::new(body))
                } else {
                    Formula::SoForall(v, Box::new(body))
                }
            }
            _ => Formula::And(vec![self.formula(d), self.formula(d)]),
        }
    }
}
