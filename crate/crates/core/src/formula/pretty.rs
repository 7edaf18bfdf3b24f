//! Printer producing text that parses back to the same tree.

use super::{Formula, Pred, SoVar, Term};

const QUANT: u8 = 0;
const IFF: u8 = 1;
const IMP: u8 = 2;
const OR: u8 = 3;
const AND: u8 = 4;
const UNARY: u8 = 5;

pub fn pretty(f: &Formula) -> String {
    let mut out = String::new();
    let mut scope = Vec::new();
    write(f, 0, &mut scope, &mut out);
    out
}

fn level(f: &Formula) -> u8 {
    use Formula::*;
    match f {
        Exists(..) | Forall(..) | ForallIn(..) | SoExists(..) | SoForall(..) => QUANT,
        Iff(..) => IFF,
        Implies(..) => IMP,
        Or(gs) if gs.len() >= 2 => OR,
        And(gs) if gs.len() >= 2 => AND,
        Or(gs) | And(gs) if gs.len() == 1 => level(&gs[0]),
        _ => UNARY,
    }
}

fn term(t: &Term, out: &mut String) {
    match t {
        Term::Var(v) => out.push_str(v),
        Term::Const(c) if matches!(c.as_str(), "0" | "1" | "logn" | "max") => out.push_str(c),
        Term::Const(c) => {
            out.push('@');
            out.push_str(c);
        }
    }
}

fn annotation(v: &SoVar, out: &mut String) {
    out.push_str(&format!("^{{{},{}}}", v.arity, v.exponent));
}

fn bound(scope: &[SoVar], v: &SoVar) -> bool {
    scope.iter().rev().find(|b| b.name == v.name) == Some(v)
}

fn write(f: &Formula, ctx: u8, scope: &mut Vec<SoVar>, out: &mut String) {
    use Formula::*;
    let wrap = level(f) < ctx;
    if wrap {
        out.push('(');
    }
    match f {
        True => out.push_str("true"),
        False => out.push_str("false"),
        Atom(Pred::Rel(r), args) if r == "LEQ" && args.len() == 2 => {
            term(&args[0], out);
            out.push_str(" <= ");
            term(&args[1], out);
        }
        Atom(p, args) => {
            out.push_str(p.name());
            if let Pred::So(v) = p {
                if !bound(scope, v) {
                    annotation(v, out);
                }
            }
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                term(a, out);
            }
            out.push(')');
        }
        Eq(a, b) => {
            term(a, out);
            out.push_str(" = ");
            term(b, out);
        }
        Not(g) => match &**g {
            Eq(a, b) => {
                term(a, out);
                out.push_str(" != ");
                term(b, out);
            }
            g => {
                out.push('~');
                write(g, UNARY, scope, out);
            }
        },
        And(gs) | Or(gs) if gs.is_empty() => out.push_str(if matches!(f, And(_)) { "true" } else { "false" }),
        And(gs) | Or(gs) if gs.len() == 1 => write(&gs[0], ctx, scope, out),
        And(gs) => join(gs, " & ", UNARY, scope, out),
        Or(gs) => join(gs, " | ", AND, scope, out),
        Implies(a, b) => {
            write(a, OR, scope, out);
            out.push_str(" -> ");
            write(b, IMP, scope, out);
        }
        Iff(a, b) => {
            write(a, IFF, scope, out);
            out.push_str(" <-> ");
            write(b, IMP, scope, out);
        }
        Exists(x, g) => {
            out.push_str("Ex ");
            out.push_str(x);
            out.push_str(" . ");
            write(g, QUANT, scope, out);
        }
        Forall(x, g) => {
            out.push_str("All ");
            out.push_str(x);
            out.push_str(" . ");
            write(g, QUANT, scope, out);
        }
        ForallIn(xs, guard, g) => {
            out.push_str("All ");
            out.push_str(&xs.join(", "));
            out.push_str(" in ");
            out.push_str(&guard.name);
            if !bound(scope, guard) {
                annotation(guard, out);
            }
            out.push_str(" . ");
            write(g, QUANT, scope, out);
        }
        SoExists(v, g) | SoForall(v, g) => {
            out.push_str(if matches!(f, SoExists(..)) { "SEx " } else { "SAll " });
            out.push_str(&v.name);
            annotation(v, out);
            out.push_str(" . ");
            scope.push(v.clone());
            write(g, QUANT, scope, out);
            scope.pop();
        }
    }
    if wrap {
        out.push(')');
    }
}

fn join(items: &[Formula], sep: &str, item_ctx: u8, scope: &mut Vec<SoVar>, out: &mut String) {
    for (i, g) in items.iter().enumerate() {
        if i > 0 {
            out.push_str(sep);
        }
        // nested n-ary nodes of the same kind keep their own parentheses
        let same_kind = matches!((g, sep), (Formula::And(h), " & ") | (Formula::Or(h), " | ") if h.len() >= 2);
        write(g, if same_kind { UNARY } else { item_ctx }, scope, out);
    }
}
