//! Propositional grounding of a formula over a fixed structure.
//!
//! The formula is brought to negation normal form, so every gate occurs
//! positively and a one-sided Tseitin encoding suffices.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use super::sat::{Lit, SatResult, Solver};
use super::{candidates, enumerate_relations, pinned, singleton_guard, size_bound, EvalConfig, EvalError, Result, Valuation};
use crate::formula::{desugar, Formula, Pred, SoVar, Term};
use crate::structure::{all_tuples, Structure, Tuple, TupleSet};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroundOutcome {
    /// Satisfiable; carries the values chosen for the requested free
    /// second-order variables.
    Sat(Valuation),
    Unsat,
}

impl GroundOutcome {
    pub fn satisfied(&self) -> bool {
        matches!(self, GroundOutcome::Sat(_))
    }
}

enum Binding {
    Concrete(Arc<TupleSet>),
    Symbolic(usize),
}

struct SymRel {
    bound: usize,
    lits: BTreeMap<Tuple, Lit>,
}

struct Grounder<'a> {
    s: &'a Structure,
    cfg: &'a EvalConfig,
    solver: Solver,
    truth: Lit,
    gates: HashMap<(bool, Vec<Lit>), Lit>,
    syms: Vec<SymRel>,
    fo: Vec<(&'a str, usize)>,
    so: Vec<(&'a str, Binding)>,
    size: usize,
    buf: Vec<usize>,
    /// Singleton-guard shape of a quantifier node, by address.
    shapes: HashMap<*const Formula, Option<(bool, &'a str, &'a Formula)>>,
}

/// Decides `f` under `val`, treating each variable in `free` as existentially
/// quantified and reporting its value when satisfiable.
pub fn ground_solve(
    s: &Structure,
    val: &Valuation,
    f: &Formula,
    free: &[SoVar],
    cfg: &EvalConfig,
) -> Result<GroundOutcome> {
    let f = if f.is_core() { f.clone() } else { desugar(f) };
    let mut solver = Solver::new();
    let truth = Lit::pos(solver.new_var());
    solver.add_clause(&[truth]);
    let mut g = Grounder {
        s,
        cfg,
        solver,
        truth,
        gates: HashMap::new(),
        syms: Vec::new(),
        fo: val.first_order.iter().map(|(k, v)| (k.as_str(), *v)).collect(),
        so: val.second_order.iter().map(|(k, v)| (k.as_str(), Binding::Concrete(Arc::new(v.clone())))).collect(),
        size: 0,
        buf: Vec::new(),
        shapes: HashMap::new(),
    };
    let mut free_ids = Vec::new();
    for v in free {
        free_ids.push(g.new_symbolic(v));
        g.so.push((v.name.as_str(), Binding::Symbolic(free_ids[free_ids.len() - 1])));
    }
    let root = g.ground(&f)?;
    g.solver.add_clause(&[root]);
    g.cardinality()?;
    match g.solver.solve(cfg.max_conflicts) {
        SatResult::Unsat => Ok(GroundOutcome::Unsat),
        SatResult::Unknown => Err(EvalError::Budget(format!(
            "SAT search gave up after {} conflicts",
            cfg.max_conflicts.unwrap_or(0)
        ))),
        SatResult::Sat(model) => {
            let mut w = Valuation::new();
            for (v, id) in free.iter().zip(free_ids) {
                let rel: TupleSet = g.syms[id]
                    .lits
                    .iter()
                    .filter(|(_, l)| model[l.var()] != l.is_neg())
                    .map(|(t, _)| t.clone())
                    .collect();
                w.second_order.insert(v.name.clone(), rel);
            }
            Ok(GroundOutcome::Sat(w))
        }
    }
}

impl<'a> Grounder<'a> {
    fn falsity(&self) -> Lit {
        !self.truth
    }

    fn constant(&self, b: bool) -> Lit {
        if b {
            self.truth
        } else {
            self.falsity()
        }
    }

    fn charge(&mut self, amount: usize) -> Result<()> {
        self.size += amount;
        if self.size > self.cfg.max_ground_size {
            return Err(EvalError::Budget(format!("grounding exceeds {} gates", self.cfg.max_ground_size)));
        }
        Ok(())
    }

    fn new_symbolic(&mut self, v: &SoVar) -> usize {
        self.syms.push(SymRel { bound: size_bound(self.s.size(), v.exponent), lits: BTreeMap::new() });
        self.syms.len() - 1
    }

    fn sym_lit(&mut self, id: usize, t: &[usize]) -> Lit {
        if let Some(&l) = self.syms[id].lits.get(t) {
            return l;
        }
        let l = Lit::pos(self.solver.new_var());
        self.syms[id].lits.insert(t.to_vec(), l);
        l
    }

    fn gate(&mut self, is_and: bool, items: Vec<Lit>) -> Result<Lit> {
        let (unit, zero) = if is_and { (self.truth, self.falsity()) } else { (self.falsity(), self.truth) };
        let mut lits: Vec<Lit> = items.into_iter().filter(|&l| l != unit).collect();
        if lits.contains(&zero) {
            return Ok(zero);
        }
        lits.sort();
        lits.dedup();
        if lits.windows(2).any(|w| w[0] == !w[1]) {
            return Ok(zero);
        }
        match lits.len() {
            0 => return Ok(unit),
            1 => return Ok(lits[0]),
            _ => {}
        }
        let key = (is_and, lits);
        if let Some(&g) = self.gates.get(&key) {
            return Ok(g);
        }
        self.charge(key.1.len())?;
        let g = Lit::pos(self.solver.new_var());
        if is_and {
            for &l in &key.1 {
                self.solver.add_clause(&[!g, l]);
            }
        } else {
            let mut c = vec![!g];
            c.extend(&key.1);
            self.solver.add_clause(&c);
        }
        self.gates.insert(key, g);
        Ok(g)
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

    fn binding(&self, name: &str) -> Option<&Binding> {
        self.so.iter().rev().find(|(k, _)| *k == name).map(|(_, b)| b)
    }

    fn atom(&mut self, p: &Pred, args: &[Term]) -> Result<Lit> {
        let mut vals = std::mem::take(&mut self.buf);
        vals.clear();
        for t in args {
            match self.term(t) {
                Ok(v) => vals.push(v),
                Err(e) => {
                    self.buf = vals;
                    return Err(e);
                }
            }
        }
        let name = p.name();
        let out = match self.binding(name) {
            Some(Binding::Concrete(rel)) => Ok(self.constant(rel.contains(vals.as_slice()))),
            Some(Binding::Symbolic(id)) => {
                let id = *id;
                Ok(self.sym_lit(id, &vals))
            }
            None => match p {
                Pred::So(_) => Err(EvalError::UnboundSoVariable(name.to_string())),
                Pred::Rel(_) => match self.s.holds(name, &vals) {
                    Some(b) => Ok(self.constant(b)),
                    None => Err(EvalError::UnknownRelation(name.to_string())),
                },
            },
        };
        self.buf = vals;
        out
    }

    fn singleton_guard(&mut self, f: &'a Formula) -> Option<(bool, &'a str, &'a Formula)> {
        *self.shapes.entry(f as *const Formula).or_insert_with(|| singleton_guard(f))
    }

    fn ground(&mut self, f: &'a Formula) -> Result<Lit> {
        use Formula::*;
        let n = self.s.size();
        match f {
            True => Ok(self.truth),
            False => Ok(self.falsity()),
            Atom(p, args) => self.atom(p, args),
            Eq(a, b) => {
                let same = self.term(a)? == self.term(b)?;
                Ok(self.constant(same))
            }
            Not(g) => Ok(!self.ground(g)?),
            And(gs) => {
                let mut items = Vec::with_capacity(gs.len());
                for g in gs {
                    let l = self.ground(g)?;
                    if l == self.falsity() {
                        return Ok(l);
                    }
                    items.push(l);
                }
                self.gate(true, items)
            }
            Or(gs) => {
                let mut items = Vec::with_capacity(gs.len());
                for g in gs {
                    let l = self.ground(g)?;
                    if l == self.truth {
                        return Ok(l);
                    }
                    items.push(l);
                }
                self.gate(false, items)
            }
            Exists(x, g) => {
                let succ_builtin = self.binding("SUCC").is_none();
                let range = candidates(pinned(x, g, false, n, succ_builtin, &|t| self.term(t).ok()), n);
                let mut items = Vec::with_capacity(range.len());
                for v in range {
                    self.fo.push((x.as_str(), v));
                    let l = self.ground(g);
                    self.fo.pop();
                    let l = l?;
                    if l == self.truth {
                        return Ok(l);
                    }
                    items.push(l);
                }
                self.gate(false, items)
            }
            ForallIn(xs, guard, g) => {
                let binding = match self.binding(&guard.name) {
                    Some(Binding::Concrete(rel)) => Binding::Concrete(rel.clone()),
                    Some(Binding::Symbolic(id)) => Binding::Symbolic(*id),
                    None => return Err(EvalError::UnboundSoVariable(guard.name.clone())),
                };
                let mut items = Vec::new();
                let tuples: Vec<Tuple> = match &binding {
                    Binding::Concrete(rel) => rel.iter().cloned().collect(),
                    Binding::Symbolic(_) => all_tuples(n, xs.len()).collect(),
                };
                for t in tuples {
                    for (x, &v) in xs.iter().zip(&t) {
                        self.fo.push((x.as_str(), v));
                    }
                    let body = self.ground(g);
                    self.fo.truncate(self.fo.len() - xs.len());
                    let body = body?;
                    let l = match &binding {
                        Binding::Concrete(_) => body,
                        Binding::Symbolic(id) => {
                            let member = self.sym_lit(*id, &t);
                            self.gate(false, vec![!member, body])?
                        }
                    };
                    if l == self.falsity() {
                        return Ok(l);
                    }
                    items.push(l);
                }
                self.gate(true, items)
            }
            SoExists(..) | SoForall(..) if self.singleton_guard(f).is_some() => {
                let (universal, x, body) = self.singleton_guard(f).unwrap();
                let succ_builtin = self.binding("SUCC").is_none();
                let range = candidates(pinned(x, body, universal, n, succ_builtin, &|t| self.term(t).ok()), n);
                let mut items = Vec::with_capacity(range.len());
                let stop = self.constant(!universal);
                for v in range {
                    self.fo.push((x, v));
                    let l = self.ground(body);
                    self.fo.pop();
                    let l = l?;
                    if l == stop {
                        return Ok(l);
                    }
                    items.push(l);
                }
                self.gate(universal, items)
            }
            SoExists(v, g) => {
                let id = self.new_symbolic(v);
                self.so.push((v.name.as_str(), Binding::Symbolic(id)));
                let l = self.ground(g);
                self.so.pop();
                l
            }
            SoForall(v, g) => {
                let cands = enumerate_relations(n, v.arity, v.exponent, self.cfg.max_candidates)?;
                let mut items = Vec::new();
                for rel in cands {
                    self.so.push((v.name.as_str(), Binding::Concrete(Arc::new(rel))));
                    let l = self.ground(g);
                    self.so.pop();
                    let l = l?;
                    if l == self.falsity() {
                        return Ok(l);
                    }
                    items.push(l);
                }
                self.gate(true, items)
            }
            Implies(..) | Iff(..) | Forall(..) => unreachable!("grounding expects a core formula"),
        }
    }

    /// At most `bound` of each symbolic relation's tuples, as a sequential
    /// counter over the tuples that were actually mentioned.
    fn cardinality(&mut self) -> Result<()> {
        for id in 0..self.syms.len() {
            let xs: Vec<Lit> = self.syms[id].lits.values().copied().collect();
            let k = self.syms[id].bound;
            if xs.len() <= k {
                continue;
            }
            if k == 0 {
                for &x in &xs {
                    self.solver.add_clause(&[!x]);
                }
                continue;
            }
            self.charge(xs.len() * k)?;
            let m = xs.len();
            // s[i][j]: at least j+1 of the first i+1 literals are true
            let mut prev: Vec<Lit> = Vec::new();
            for (i, &x) in xs.iter().enumerate() {
                if i == m - 1 {
                    self.solver.add_clause(&[!x, !prev[k - 1]]);
                    break;
                }
                let cur: Vec<Lit> = (0..k).map(|_| Lit::pos(self.solver.new_var())).collect();
                self.solver.add_clause(&[!x, cur[0]]);
                if i == 0 {
                    for &c in &cur[1..] {
                        self.solver.add_clause(&[!c]);
                    }
                } else {
                    for j in 0..k {
                        self.solver.add_clause(&[!prev[j], cur[j]]);
                        if j > 0 {
                            self.solver.add_clause(&[!x, !prev[j - 1], cur[j]]);
                        }
                    }
                    self.solver.add_clause(&[!x, !prev[k - 1]]);
                }
                prev = cur;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::structure::{Interpretation, Vocabulary};

    #[test]
    fn cardinality_bound_is_enforced() {
        let s = Structure::new(Vocabulary::new(), 4, Interpretation::new()).unwrap();
        let cfg = EvalConfig::default();
        let two = parse("SEx X^{1,1} . X(0) & X(1)").unwrap();
        let three = parse("SEx X^{1,1} . X(0) & X(1) & X(max)").unwrap();
        assert!(ground_solve(&s, &Valuation::new(), &two, &[], &cfg).unwrap().satisfied());
        assert!(!ground_solve(&s, &Valuation::new(), &three, &[], &cfg).unwrap().satisfied());
        let zero = parse("SEx X^{1,0} . X(0) & X(1)").unwrap();
        assert!(!ground_solve(&s, &Valuation::new(), &zero, &[], &cfg).unwrap().satisfied());
    }

    #[test]
    fn witness_for_free_variables() {
        let vocab = Vocabulary::new().with_constant("a").unwrap().with_constant("b").unwrap();
        let s = Structure::new(vocab, 8, Interpretation::new().constant("a", 5).constant("b", 3)).unwrap();
        let cfg = EvalConfig::default();
        let f = parse("X^{1,1}(@a) & ~X^{1,1}(@b) & Ex y . X^{1,1}(y) & y != @a").unwrap();
        let x = SoVar::new("X", 1, 1);
        match ground_solve(&s, &Valuation::new(), &f, std::slice::from_ref(&x), &cfg).unwrap() {
            GroundOutcome::Sat(w) => {
                let rel = &w.second_order["X"];
                assert!(rel.contains(&vec![5]) && !rel.contains(&vec![3]));
                assert!(rel.len() >= 2 && rel.len() <= 3);
            }
            GroundOutcome::Unsat => panic!("satisfiable"),
        }
    }
}
