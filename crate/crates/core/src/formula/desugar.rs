//! Surface formulas to core formulas: negation normal form, `->`/`<->`
//! expansion, and unbounded `∀x φ` rewritten as `∀X^{1,0} ∀x (X(x) → φ)`.
//!
//! A guard of size `⌈log n⌉^0 = 1` holds a single element, so quantifying
//! over all such guards visits every element.

use super::{and, or, Formula, FreshNames, SoVar, Term};

pub fn desugar(f: &Formula) -> Formula {
    let mut names = FreshNames::avoiding(f);
    nnf(f, true, &mut names)
}

fn singleton_forall(x: &str, body: Formula, names: &mut FreshNames) -> Formula {
    let guard = SoVar::new(names.fresh("X"), 1, 0);
    Formula::SoForall(guard.clone(), Box::new(Formula::ForallIn(vec![x.to_string()], guard, Box::new(body))))
}

fn nnf(f: &Formula, pos: bool, names: &mut FreshNames) -> Formula {
    use Formula::*;
    match f {
        True => if pos { True } else { False },
        False => if pos { False } else { True },
        Atom(..) | Eq(..) => {
            if pos {
                f.clone()
            } else {
                Not(Box::new(f.clone()))
            }
        }
        Not(g) => nnf(g, !pos, names),
        And(gs) => {
            let items = gs.iter().map(|g| nnf(g, pos, names)).collect();
            if pos { And(items) } else { Or(items) }
        }
        Or(gs) => {
            let items = gs.iter().map(|g| nnf(g, pos, names)).collect();
            if pos { Or(items) } else { And(items) }
        }
        Implies(a, b) => {
            if pos {
                or(vec![nnf(a, false, names), nnf(b, true, names)])
            } else {
                and(vec![nnf(a, true, names), nnf(b, false, names)])
            }
        }
        Iff(a, b) => {
            let (ap, an) = (nnf(a, true, names), nnf(a, false, names));
            let (bp, bn) = (nnf(b, true, names), nnf(b, false, names));
            if pos {
                or(vec![and(vec![ap, bp]), and(vec![an, bn])])
            } else {
                or(vec![and(vec![ap, bn]), and(vec![an, bp])])
            }
        }
        Exists(x, g) => {
            if pos {
                Exists(x.clone(), Box::new(nnf(g, true, names)))
            } else {
                let body = nnf(g, false, names);
                singleton_forall(x, body, names)
            }
        }
        Forall(x, g) => {
            if pos {
                let body = nnf(g, true, names);
                singleton_forall(x, body, names)
            } else {
                Exists(x.clone(), Box::new(nnf(g, false, names)))
            }
        }
        ForallIn(xs, guard, g) => {
            if pos {
                ForallIn(xs.clone(), guard.clone(), Box::new(nnf(g, true, names)))
            } else {
                let hit = guard.at(xs.iter().map(|x| Term::Var(x.clone())));
                let body = and(vec![hit, nnf(g, false, names)]);
                xs.iter().rev().fold(body, |acc, x| Exists(x.clone(), Box::new(acc)))
            }
        }
        SoExists(v, g) => {
            let body = Box::new(nnf(g, pos, names));
            if pos { SoExists(v.clone(), body) } else { SoForall(v.clone(), body) }
        }
        SoForall(v, g) => {
            let body = Box::new(nnf(g, pos, names));
            if pos { SoForall(v.clone(), body) } else { SoExists(v.clone(), body) }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::*;

    #[test]
    fn unbounded_forall_becomes_singleton_guard() {
        let f = desugar(&parse("All x . R(x)").unwrap());
        let x1 = SoVar::new("X1", 1, 0);
        assert_eq!(f, so_forall(&x1, forall_in(["x"], &x1, rel("R", ["x"]))));
        assert!(f.is_core());
    }

    #[test]
    fn negated_so_exists() {
        let f = desugar(&parse("~ SEx X^{1,1} . X(0)").unwrap());
        let x = SoVar::new("X", 1, 1);
        assert_eq!(f, so_forall(&x, not(x.at([Term::zero()]))));
    }

    #[test]
    fn negated_exists() {
        let f = desugar(&parse("~ Ex x . R(x)").unwrap());
        let x1 = SoVar::new("X1", 1, 0);
        assert_eq!(f, so_forall(&x1, forall_in(["x"], &x1, not(rel("R", ["x"])))));
    }

    #[test]
    fn fresh_names_avoid_existing() {
        let f = desugar(&parse("SEx X1^{1,0} . All x . X1(x)").unwrap());
        assert_eq!(pretty(&f), "SEx X1^{1,0} . SAll X2^{1,0} . All x in X2 . X1(x)");
    }

    #[test]
    fn output_is_core() {
        let f = parse("(P(x) <-> ~Q(x)) -> ~(All y in X^{1,1} . R(y))").unwrap();
        assert!(desugar(&f).is_core());
    }
}
