//! Second-order normal form: every SO quantifier in front, followed by a
//! matrix without SO quantifiers, plus fragment classification.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use super::{desugar, Formula, FreshNames, Pred, Quant, SoVar, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FragmentLabel {
    Sigma(usize),
    Pi(usize),
    NotSnf,
}

impl FragmentLabel {
    /// ASCII form, e.g. `Sigma2`.
    pub fn ascii(&self) -> String {
        match self {
            FragmentLabel::Sigma(m) => format!("Sigma{m}"),
            FragmentLabel::Pi(m) => format!("Pi{m}"),
            FragmentLabel::NotSnf => "not-SNF".into(),
        }
    }
}

impl fmt::Display for FragmentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FragmentLabel::Sigma(m) => write!(f, "Σ{m}"),
            FragmentLabel::Pi(m) => write!(f, "Π{m}"),
            FragmentLabel::NotSnf => f.write_str("not-SNF"),
        }
    }
}

/// Groups a prefix into maximal blocks of equal polarity.
pub fn blocks(prefix: &[(Quant, SoVar)]) -> Vec<(Quant, Vec<SoVar>)> {
    let mut out: Vec<(Quant, Vec<SoVar>)> = Vec::new();
    for (q, v) in prefix {
        match out.last_mut() {
            Some((lq, vs)) if lq == q => vs.push(v.clone()),
            _ => out.push((*q, vec![v.clone()])),
        }
    }
    out
}

/// Σ_m / Π_m with m the number of blocks. A formula with no SO quantifiers
/// at all counts as Σ1 (an empty existential block).
pub fn classify(f: &Formula) -> FragmentLabel {
    let (prefix, matrix) = f.so_prefix();
    if !matrix.is_so_quantifier_free() {
        return FragmentLabel::NotSnf;
    }
    let bs = blocks(&prefix);
    match bs.first() {
        None => FragmentLabel::Sigma(1),
        Some((Quant::Exists, _)) => FragmentLabel::Sigma(bs.len()),
        Some((Quant::Forall, _)) => FragmentLabel::Pi(bs.len()),
    }
}

pub fn to_snf(f: &Formula) -> Formula {
    let core = if f.is_core() { f.clone() } else { desugar(f) };
    let mut names = FreshNames::avoiding(&core);
    let renamed = rename_apart(&core, &mut names);
    let (prefix, matrix) = prenex(&renamed, &mut names);
    prefix.into_iter().rev().fold(matrix, |acc, (q, v)| match q {
        Quant::Exists => Formula::SoExists(v, Box::new(acc)),
        Quant::Forall => Formula::SoForall(v, Box::new(acc)),
    })
}

fn base_of(name: &str) -> &str {
    let b = name.trim_end_matches(|c: char| c.is_ascii_digit());
    if b.is_empty() { "v" } else { b }
}

struct Renamer<'a> {
    names: &'a mut FreshNames,
    taken: BTreeSet<String>,
    fo: HashMap<String, Vec<String>>,
    so: HashMap<String, Vec<SoVar>>,
}

impl Renamer<'_> {
    fn bind(&mut self, name: &str) -> String {
        let new = if self.taken.contains(name) { self.names.fresh(base_of(name)) } else { name.to_string() };
        self.taken.insert(new.clone());
        new
    }

    fn term(&self, t: &Term) -> Term {
        match t {
            Term::Var(v) => Term::Var(self.fo.get(v).and_then(|s| s.last()).cloned().unwrap_or_else(|| v.clone())),
            c => c.clone(),
        }
    }

    fn so_var(&self, v: &SoVar) -> SoVar {
        self.so.get(&v.name).and_then(|s| s.last()).cloned().unwrap_or_else(|| v.clone())
    }

    fn go(&mut self, f: &Formula) -> Formula {
        use Formula::*;
        match f {
            True | False => f.clone(),
            Atom(p, args) => {
                let p = match p {
                    Pred::So(v) => Pred::So(self.so_var(v)),
                    r => r.clone(),
                };
                Atom(p, args.iter().map(|t| self.term(t)).collect())
            }
            Eq(a, b) => Eq(self.term(a), self.term(b)),
            Not(g) => Not(Box::new(self.go(g))),
            And(gs) => And(gs.iter().map(|g| self.go(g)).collect()),
            Or(gs) => Or(gs.iter().map(|g| self.go(g)).collect()),
            Implies(a, b) => Implies(Box::new(self.go(a)), Box::new(self.go(b))),
            Iff(a, b) => Iff(Box::new(self.go(a)), Box::new(self.go(b))),
            Exists(x, g) | Forall(x, g) => {
                let nx = self.bind(x);
                self.fo.entry(x.clone()).or_default().push(nx.clone());
                let body = Box::new(self.go(g));
                self.fo.get_mut(x).unwrap().pop();
                if matches!(f, Exists(..)) { Exists(nx, body) } else { Forall(nx, body) }
            }
            ForallIn(xs, guard, g) => {
                let guard = self.so_var(guard);
                let nxs: Vec<String> = xs.iter().map(|x| self.bind(x)).collect();
                for (x, nx) in xs.iter().zip(&nxs) {
                    self.fo.entry(x.clone()).or_default().push(nx.clone());
                }
                let body = Box::new(self.go(g));
                for x in xs {
                    self.fo.get_mut(x).unwrap().pop();
                }
                ForallIn(nxs, guard, body)
            }
            SoExists(v, g) | SoForall(v, g) => {
                let nv = SoVar { name: self.bind(&v.name), ..v.clone() };
                self.so.entry(v.name.clone()).or_default().push(nv.clone());
                let body = Box::new(self.go(g));
                self.so.get_mut(&v.name).unwrap().pop();
                if matches!(f, SoExists(..)) { SoExists(nv, body) } else { SoForall(nv, body) }
            }
        }
    }
}

/// Renames bound variables so that no name is bound twice or bound and
/// free at once. Names that are already unique are kept.
fn rename_apart(f: &Formula, names: &mut FreshNames) -> Formula {
    let fv = f.free_vars();
    let mut taken: BTreeSet<String> = fv.first_order;
    taken.extend(fv.second_order.into_iter().map(|v| v.name));
    collect_symbols(f, &mut taken);
    let mut r = Renamer { names, taken, fo: HashMap::new(), so: HashMap::new() };
    r.go(f)
}

fn collect_symbols(f: &Formula, out: &mut BTreeSet<String>) {
    use Formula::*;
    match f {
        Atom(Pred::Rel(r), args) => {
            out.insert(r.clone());
            for t in args {
                if let Term::Const(c) = t {
                    out.insert(c.clone());
                }
            }
        }
        Atom(_, args) => {
            for t in args {
                if let Term::Const(c) = t {
                    out.insert(c.clone());
                }
            }
        }
        Eq(a, b) => {
            for t in [a, b] {
                if let Term::Const(c) = t {
                    out.insert(c.clone());
                }
            }
        }
        True | False => {}
        Not(g) | Exists(_, g) | Forall(_, g) | ForallIn(_, _, g) | SoExists(_, g) | SoForall(_, g) => {
            collect_symbols(g, out)
        }
        And(gs) | Or(gs) => gs.iter().for_each(|g| collect_symbols(g, out)),
        Implies(a, b) | Iff(a, b) => {
            collect_symbols(a, out);
            collect_symbols(b, out);
        }
    }
}

type Prefix = Vec<(Quant, SoVar)>;

fn prenex(f: &Formula, names: &mut FreshNames) -> (Prefix, Formula) {
    use Formula::*;
    match f {
        True | False | Atom(..) | Eq(..) | Not(_) => (Vec::new(), f.clone()),
        And(gs) | Or(gs) => {
            let parts: Vec<(Prefix, Formula)> = gs.iter().map(|g| prenex(g, names)).collect();
            let (prefixes, matrices): (Vec<Prefix>, Vec<Formula>) = parts.into_iter().unzip();
            let matrix = if matches!(f, And(_)) { And(matrices) } else { Or(matrices) };
            (interleave(prefixes), matrix)
        }
        Exists(x, g) => {
            let (prefix, m) = prenex(g, names);
            if prefix.iter().any(|(q, _)| *q == Quant::Forall) {
                let pick = SoVar::new(names.fresh("X"), 1, 0);
                let body = Formula::And(vec![pick.at([x.as_str()]), m]);
                let mut out = vec![(Quant::Exists, pick)];
                out.extend(prefix);
                (out, Exists(x.clone(), Box::new(body)))
            } else {
                (prefix, Exists(x.clone(), Box::new(m)))
            }
        }
        ForallIn(xs, guard, g) => {
            let (prefix, m) = prenex(g, names);
            if prefix.iter().any(|(q, _)| *q == Quant::Exists) {
                let single = SoVar::new(names.fresh("X"), xs.len(), 0);
                let outside = Formula::Not(Box::new(guard.at(xs.iter().map(String::as_str))));
                let body = Formula::Or(vec![outside, m]);
                let mut out = vec![(Quant::Forall, single.clone())];
                out.extend(prefix);
                (out, ForallIn(xs.clone(), single, Box::new(body)))
            } else {
                (prefix, ForallIn(xs.clone(), guard.clone(), Box::new(m)))
            }
        }
        SoExists(v, g) | SoForall(v, g) => {
            let (prefix, m) = prenex(g, names);
            let q = if matches!(f, SoExists(..)) { Quant::Exists } else { Quant::Forall };
            let mut out = vec![(q, v.clone())];
            out.extend(prefix);
            (out, m)
        }
        Implies(..) | Iff(..) | Forall(..) => unreachable!("prenex expects a core formula"),
    }
}

/// Merges independent prefixes preserving each one's order and using as few
/// alternations as possible; ties start with an existential block.
fn interleave(prefixes: Vec<Prefix>) -> Prefix {
    let split: Vec<Vec<(Quant, Vec<SoVar>)>> = prefixes.iter().map(|p| blocks(p)).collect();
    let run = |start: Quant| -> Prefix {
        let mut heads = vec![0usize; split.len()];
        let mut q = start;
        let mut out = Vec::new();
        while heads.iter().zip(&split).any(|(h, s)| *h < s.len()) {
            for (h, s) in heads.iter_mut().zip(&split) {
                if *h < s.len() && s[*h].0 == q {
                    out.extend(s[*h].1.iter().map(|v| (q, v.clone())));
                    *h += 1;
                }
            }
            q = if q == Quant::Exists { Quant::Forall } else { Quant::Exists };
        }
        out
    };
    let ex = run(Quant::Exists);
    let fa = run(Quant::Forall);
    if blocks(&fa).len() < blocks(&ex).len() { fa } else { ex }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::*;

    #[test]
    fn exists_over_universal_block() {
        let y = SoVar::new("Y", 1, 1);
        let f = exists("x", so_forall(&y, y.at(["x"])));
        let g = to_snf(&f);
        let x1 = SoVar::new("X1", 1, 0);
        let expect = so_exists(&x1, so_forall(&y, exists("x", Formula::And(vec![x1.at(["x"]), y.at(["x"])]))));
        assert_eq!(g, expect);
        assert_eq!(classify(&g), FragmentLabel::Sigma(2));
    }

    #[test]
    fn restricted_over_existential_block() {
        let g = SoVar::new("G", 1, 1);
        let y = SoVar::new("Y", 1, 1);
        let f = forall_in(["x"], &g, so_exists(&y, y.at(["x"])));
        let s = to_snf(&f);
        assert_eq!(pretty(&s), "SAll X1^{1,0} . SEx Y^{1,1} . All x in X1 . ~G^{1,1}(x) | Y(x)");
        assert_eq!(classify(&s), FragmentLabel::Pi(2));
    }

    #[test]
    fn snf_identity() {
        let f = parse("SEx X^{1,1} . SAll Y^{2,0} . All a, b in Y . X(a) | a = b").unwrap();
        assert_eq!(to_snf(&f), f);
    }

    #[test]
    fn disjunction_merges_blocks_after_renaming() {
        let f = parse("(SEx X^{1,1} . X(0)) | (SEx X^{1,1} . X(1))").unwrap();
        let s = to_snf(&f);
        assert_eq!(pretty(&s), "SEx X^{1,1} . SEx X1^{1,1} . X(0) | X1(1)");
        assert_eq!(classify(&s), FragmentLabel::Sigma(1));
    }

    #[test]
    fn classify_examples() {
        let f = parse("SEx X^{1,1} . SEx Y^{1,1} . X(0) & Y(0)").unwrap();
        assert_eq!(classify(&f), FragmentLabel::Sigma(1));
        let f = parse("SAll X^{1,1} . SEx Y^{1,1} . X(0) & Y(0)").unwrap();
        assert_eq!(classify(&f), FragmentLabel::Pi(2));
        let f = parse("X^{1,1}(0) & SEx Y^{1,1} . Y(0)").unwrap();
        assert_eq!(classify(&f), FragmentLabel::NotSnf);
        assert_eq!(classify(&parse("R(0)").unwrap()), FragmentLabel::Sigma(1));
    }

    #[test]
    fn interleave_picks_fewest_blocks() {
        let f = parse("(SAll A^{1,0} . SEx B^{1,0} . A(0) | B(0)) & (SEx C^{1,0} . C(0))").unwrap();
        let s = to_snf(&f);
        assert_eq!(classify(&s), FragmentLabel::Pi(2));
    }
}
