//! Standard queries: cardinality comparison, bounded clique, and
//! satisfiability of DNF formulas given as word models.

use super::MacroContext;
use crate::formula::{
    and, eq, exists, exists_all, forall, forall_in, leq, neq, not, or, rel, so_exists, so_exists_all,
    succ, Formula, SoVar, Term,
};
use crate::structure::letter_relation;

/// Alphabet of DNF word models: parentheses, connectives, binary digits and
/// the variable marker.
pub const DNF_ALPHABET: [char; 8] = ['(', ')', '∧', '∨', '¬', '0', '1', 'X'];

fn terms(names: &[String]) -> Vec<Term> {
    names.iter().map(Term::var).collect()
}

fn tuple_eq(xs: &[Term], ys: &[Term]) -> Formula {
    and(xs.iter().zip(ys).map(|(x, y)| eq(x, y)).collect())
}

fn card_leq_in(ctx: &mut MacroContext, x: &SoVar, y: &SoVar) -> Formula {
    let r = ctx.so("R", x.arity + y.arity, x.exponent.max(y.exponent));
    let xs = ctx.tuple("x", x.arity);
    let ys = ctx.tuple("y", y.arity);
    let zs = ctx.tuple("z", x.arity);
    let (px, py, pz) = (terms(&xs), terms(&ys), terms(&zs));
    let pair = |a: &[Term]| r.at(a.iter().chain(&py).cloned().collect::<Vec<_>>());
    let body = forall_in(
        xs,
        x,
        exists_all(
            ys.clone(),
            and(vec![
                y.at(py.clone()),
                pair(&px),
                forall_in(zs, x, or(vec![tuple_eq(&pz, &px), not(pair(&pz))])),
            ]),
        ),
    );
    so_exists(&r, body)
}

/// `|X| ≤ |Y|` through an injection `R` from `X` into `Y`.
pub fn card_leq(x: &SoVar, y: &SoVar) -> Formula {
    let mut ctx = MacroContext::reserving(1, [x.name.as_str(), y.name.as_str()]);
    card_leq_in(&mut ctx, x, y)
}

/// Over graphs with unary `V` and binary `E`: a clique of exactly
/// `⌈log n⌉^k` vertices exists.
pub fn clique_formula(k: usize) -> Formula {
    let mut ctx = MacroContext::reserving(k, ["V", "E"]);
    let i = ctx.index_var();
    let s = ctx.so("S", 1, k);
    let def = ctx.def(&i);
    let s_le = card_leq_in(&mut ctx, &s, &i);
    let i_le = card_leq_in(&mut ctx, &i, &s);
    let (x, y) = (ctx.fresh("x"), ctx.fresh("y"));
    let adjacent = and(vec![rel("E", [&x, &y]), rel("E", [&y, &x])]);
    let clique = forall_in(
        [x.clone()],
        &s,
        and(vec![rel("V", [&x]), forall_in([y.clone()], &s, or(vec![eq(&x, &y), adjacent]))]),
    );
    so_exists_all(&[i, s], and(vec![def, s_le, i_le, clique]))
}

fn letter(c: char, t: &str) -> Formula {
    rel(&letter_relation(c), [t])
}

fn lt(a: &str, b: &str) -> Formula {
    and(vec![leq(a, b), neq(a, b)])
}

fn inside(a: &str, lo: &str, hi: &str) -> Formula {
    and(vec![lt(lo, a), lt(a, hi)])
}

fn digit_pair(d: char, y: &str, y2: &str) -> Formula {
    and(vec![letter(d, y), letter(d, y2)])
}

fn non_digit(y: &str) -> Formula {
    and(vec![not(letter('0', y)), not(letter('1', y))])
}

/// The positions `xb < xc` hold a matching pair of parentheses with no
/// parenthesis in between.
fn clause(xb: &str, xc: &str, y: &str) -> Formula {
    and(vec![
        letter('(', xb),
        letter(')', xc),
        lt(xb, xc),
        not(exists(y, and(vec![inside(y, xb, xc), or(vec![letter('(', y), letter(')', y)])]))),
    ])
}

struct DnfNames {
    xb: String,
    xc: String,
    y: String,
    x: String,
    x2: String,
    y2: String,
    xa: String,
    xa2: String,
    p: String,
    h: SoVar,
}

impl DnfNames {
    fn new() -> Self {
        let mut ctx = MacroContext::new(1);
        let mut f = |b: &str| ctx.fresh(b);
        DnfNames {
            xb: f("xb"),
            xc: f("xc"),
            y: f("y"),
            x: f("x"),
            x2: f("xp"),
            y2: f("yp"),
            xa: f("xa"),
            xa2: f("xap"),
            p: f("p"),
            h: SoVar::new("H", 2, 2),
        }
    }

    /// The three ways a matched pair of name positions may continue: both
    /// next symbols are the same digit (and matched), or both names end.
    fn continuations(&self) -> Vec<Formula> {
        let (y, y2) = (self.y.as_str(), self.y2.as_str());
        let matched = self.h.at([y, y2]);
        vec![
            and(vec![digit_pair('0', y, y2), matched.clone()]),
            and(vec![digit_pair('1', y, y2), matched]),
            and(vec![non_digit(y), non_digit(y2)]),
        ]
    }

    fn step(&self) -> Formula {
        let (x, x2, y, y2) = (&self.x, &self.x2, &self.y, &self.y2);
        exists_all([y.clone(), y2.clone()], and(vec![succ(x, y), succ(x2, y2), or(self.continuations())]))
    }

    fn not_step(&self) -> Formula {
        let (x, x2, y, y2) = (&self.x, &self.x2, &self.y, &self.y2);
        or(vec![
            eq(x, Term::max()),
            eq(x2, Term::max()),
            exists_all(
                [y.clone(), y2.clone()],
                and(vec![
                    succ(x, y),
                    succ(x2, y2),
                    and(self.continuations().into_iter().map(not).collect()),
                ]),
            ),
        ])
    }

    fn negated(&self, xa: &str) -> Formula {
        exists(&self.p, and(vec![succ(&self.p, xa), letter('¬', &self.p)]))
    }

    fn plain(&self, xa: &str) -> Formula {
        exists(&self.p, and(vec![succ(&self.p, xa), not(letter('¬', &self.p))]))
    }

    /// Two literals of the clause with equal names, the first negated and
    /// the second not, linked by `H` at their variable markers.
    fn literal_pair(&self) -> Formula {
        let (xb, xc, xa, xa2) = (&self.xb, &self.xc, &self.xa, &self.xa2);
        exists_all(
            [xa.clone(), xa2.clone()],
            and(vec![
                inside(xa, xb, xc),
                inside(xa2, xb, xc),
                letter('X', xa),
                letter('X', xa2),
                self.negated(xa),
                self.plain(xa2),
                self.h.at([xa.as_str(), xa2.as_str()]),
            ]),
        )
    }

    /// Negation of [`literal_pair`] with the bound positions universal.
    fn no_literal_pair(&self) -> Formula {
        let (xb, xc, xa, xa2) = (&self.xb, &self.xc, &self.xa, &self.xa2);
        let body = or(vec![
            not(inside(xa, xb, xc)),
            not(inside(xa2, xb, xc)),
            not(letter('X', xa)),
            not(letter('X', xa2)),
            not(self.negated(xa)),
            not(self.plain(xa2)),
            not(self.h.at([xa.as_str(), xa2.as_str()])),
        ]);
        forall(xa.clone(), forall(xa2.clone(), body))
    }

    fn complementary(&self) -> Formula {
        let closed = forall_in([self.x.clone(), self.x2.clone()], &self.h, self.step());
        so_exists(&self.h, and(vec![closed, self.literal_pair()]))
    }

    fn not_complementary(&self) -> Formula {
        let open = exists_all(
            [self.x.clone(), self.x2.clone()],
            and(vec![self.h.at([self.x.as_str(), self.x2.as_str()]), self.not_step()]),
        );
        crate::formula::so_forall(&self.h, or(vec![open, self.no_literal_pair()]))
    }
}

/// `(DNFSAT, NODNFSAT)` over DNF word models. NODNFSAT holds when every
/// clause contains a complementary pair of literals; DNFSAT is its dual,
/// written so that it stays in the two-block existential-first fragment.
pub fn dnf_queries() -> (Formula, Formula) {
    let d = DnfNames::new();
    let (xb, xc) = (d.xb.clone(), d.xc.clone());
    let nodnfsat = forall(
        xb.clone(),
        forall(xc.clone(), or(vec![not(clause(&xb, &xc, &d.y)), d.complementary()])),
    );
    let dnfsat = exists_all([xb.clone(), xc.clone()], and(vec![clause(&xb, &xc, &d.y), d.not_complementary()]));
    (dnfsat, nodnfsat)
}
