//! Generators for the bounded-arithmetic formulas over binary numbers
//! encoded in second-order relations, and a few standard queries.
//!
//! Every macro exists in two shapes. The closed form (`def_k`, `bsum`, ...)
//! quantifies its auxiliary relations itself. The open form (a method on
//! [`MacroContext`], usually suffixed `_with`) takes them as free variables
//! so larger formulas can share one index relation `I = B^k`; open forms never
//! assert `DEF_k(I)` for a shared `I`, the owner does that once.

pub mod numbers;
pub mod queries;

use crate::formula::{
    and, bit, eq, exists_all, forall_in, leq, neq, not, or, so_exists_all, succ, Formula,
    FreshNames, SoVar, Term,
};

pub use numbers::{
    decode_bits, decode_number, def_relation, encode_bits, encode_number, mult_witness,
    position_index, position_tuple, sum_carries, width, with_prefix, NumberError,
};
pub use queries::{card_leq, clique_formula, dnf_queries, DNF_ALPHABET};

/// A binary number stored in `var`, possibly as the slice of a wider
/// relation selected by a fixed prefix (`R|ā` in the multiplication).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Num {
    pub var: SoVar,
    pub prefix: Vec<Term>,
}

impl Num {
    pub fn whole(var: &SoVar) -> Self {
        Num { var: var.clone(), prefix: Vec::new() }
    }

    pub fn slice(var: &SoVar, prefix: &[Term]) -> Self {
        Num { var: var.clone(), prefix: prefix.to_vec() }
    }

    /// The slice selected by extending the prefix with `more`.
    pub fn sub(&self, more: &[Term]) -> Self {
        Num { var: self.var.clone(), prefix: self.prefix.iter().chain(more).cloned().collect() }
    }

    /// Number of position components.
    pub fn positions(&self) -> usize {
        self.var.arity - 1 - self.prefix.len()
    }

    /// Atom stating that position `pos` carries bit `b`.
    pub fn bit(&self, pos: &[Term], b: Term) -> Formula {
        assert_eq!(pos.len(), self.positions(), "position width mismatch for {}", self.var.name);
        let args: Vec<Term> = self.prefix.iter().chain(pos).cloned().chain([b]).collect();
        self.var.at(args)
    }
}

/// Comparison selector for [`cmp_num`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpMode {
    Eq,
    Lt,
}

fn terms(names: &[String]) -> Vec<Term> {
    names.iter().map(Term::var).collect()
}

fn zeros(k: usize) -> Vec<Term> {
    vec![Term::zero(); k]
}

/// `x̄ = 0̄`.
pub fn zero_tuple(xs: &[Term]) -> Formula {
    and(xs.iter().map(|x| eq(x, Term::zero())).collect())
}

/// `x̄` is the largest tuple of `B^k`.
pub fn max_tuple(xs: &[Term]) -> Formula {
    and(xs.iter().map(|x| succ(x, Term::logn())).collect())
}

/// Numerical order `x̄ ≤_k ȳ`.
pub fn leq_tuple(xs: &[Term], ys: &[Term]) -> Formula {
    assert_eq!(xs.len(), ys.len());
    assert!(!xs.is_empty(), "tuples need at least one component");
    if xs.len() == 1 {
        return leq(&xs[0], &ys[0]);
    }
    or(vec![
        and(vec![leq(&xs[0], &ys[0]), neq(&xs[0], &ys[0])]),
        and(vec![eq(&xs[0], &ys[0]), leq_tuple(&xs[1..], &ys[1..])]),
    ])
}

/// Strict numerical order, as the negation of `ȳ ≤_k x̄`.
pub fn lt_tuple(xs: &[Term], ys: &[Term]) -> Formula {
    not(leq_tuple(ys, xs))
}

/// `SUCC_k(x̄, ȳ)`: `ȳ` follows `x̄` in the numerical order of `B^k`.
pub fn succ_tuple(xs: &[Term], ys: &[Term]) -> Formula {
    assert_eq!(xs.len(), ys.len());
    assert!(!xs.is_empty(), "tuples need at least one component");
    let below = and(vec![leq(&ys[0], Term::logn()), neq(&ys[0], Term::logn())]);
    if xs.len() == 1 {
        return and(vec![below, succ(&xs[0], &ys[0])]);
    }
    let carry = and(
        std::iter::once(succ(&xs[0], &ys[0]))
            .chain(xs[1..].iter().map(|x| succ(x, Term::logn())))
            .chain(ys[1..].iter().map(|y| eq(y, Term::zero())))
            .collect(),
    );
    and(vec![
        below,
        or(vec![and(vec![eq(&ys[0], &xs[0]), succ_tuple(&xs[1..], &ys[1..])]), carry]),
    ])
}

/// Fresh-name supply for one macro expansion, carrying the exponent `k`.
#[derive(Debug, Clone)]
pub struct MacroContext {
    pub k: usize,
    names: FreshNames,
}

impl MacroContext {
    pub fn new(k: usize) -> Self {
        assert!(k >= 1, "arithmetic macros need k >= 1");
        MacroContext { k, names: FreshNames::new(Default::default()) }
    }

    /// A context that never generates any of `names`.
    pub fn reserving<'a>(k: usize, names: impl IntoIterator<Item = &'a str>) -> Self {
        let mut ctx = Self::new(k);
        for n in names {
            ctx.names.reserve(n);
        }
        ctx
    }

    pub fn fresh(&mut self, base: &str) -> String {
        self.names.fresh(base)
    }

    /// `len` fresh first-order names sharing one stem: `x3_0, x3_1, ...`.
    pub fn tuple(&mut self, base: &str, len: usize) -> Vec<String> {
        let stem = self.fresh(base);
        (0..len)
            .map(|i| {
                let name = format!("{stem}_{i}");
                self.names.reserve(&name);
                name
            })
            .collect()
    }

    pub fn so(&mut self, base: &str, arity: usize, exponent: usize) -> SoVar {
        SoVar::new(self.fresh(base), arity, exponent)
    }

    /// Index relation of arity and exponent `k`.
    pub fn index_var(&mut self) -> SoVar {
        self.so("I", self.k, self.k)
    }

    /// Number relation of arity `k + 1` and exponent `k`.
    pub fn number_var(&mut self, base: &str) -> SoVar {
        self.so(base, self.k + 1, self.k)
    }

    /// `DEF(I)`: `val(I) = B^r` where `r` is the arity of `I`.
    pub fn def(&mut self, i: &SoVar) -> Formula {
        let r = i.arity;
        let xs = self.tuple("x", r);
        let ys = self.tuple("y", r);
        let zs = self.tuple("z", r);
        let (px, py, pz) = (terms(&xs), terms(&ys), terms(&zs));
        let has_zero = exists_all(xs, and(vec![zero_tuple(&px), i.at(px.clone())]));
        let closed = forall_in(
            ys,
            i,
            or(vec![max_tuple(&py), exists_all(zs, and(vec![succ_tuple(&py, &pz), i.at(pz.clone())]))]),
        );
        and(vec![has_zero, closed])
    }

    /// `BIN(X, I)`: every position of `I` carries a bit.
    pub fn bin_with(&mut self, x: &Num, i: &SoVar) -> Formula {
        let xs = self.tuple("x", i.arity);
        let pos = terms(&xs);
        forall_in(xs, i, or(vec![x.bit(&pos, Term::zero()), x.bit(&pos, Term::one())]))
    }

    /// `=_k(X, Y, I)`.
    pub fn eq_with(&mut self, x: &Num, y: &Num, i: &SoVar) -> Formula {
        let xs = self.tuple("x", i.arity);
        let pos = terms(&xs);
        forall_in(xs, i, same_bit(x, &pos, y, &pos))
    }

    /// `<_k(X, Y, I)`: at some position `X` has 0 and `Y` has 1, and all
    /// more significant positions agree.
    pub fn lt_with(&mut self, x: &Num, y: &Num, i: &SoVar) -> Formula {
        let xs = self.tuple("x", i.arity);
        let ys = self.tuple("y", i.arity);
        let (px, py) = (terms(&xs), terms(&ys));
        let above_agree = forall_in(
            ys.clone(),
            i,
            or(vec![
                leq_tuple(&py, &px),
                same_bit(x, &py, y, &py),
            ]),
        );
        exists_all(
            xs,
            and(vec![
                i.at(px.clone()),
                x.bit(&px, Term::zero()),
                y.bit(&px, Term::one()),
                above_agree,
            ]),
        )
    }

    pub fn le_with(&mut self, x: &Num, y: &Num, i: &SoVar) -> Formula {
        or(vec![self.lt_with(x, y, i), self.eq_with(x, y, i)])
    }

    /// `BNUM(X, t, I)`: `X` encodes the domain element `t`.
    pub fn bnum_with(&mut self, x: &Num, t: &Term, i: &SoVar) -> Formula {
        let k = i.arity;
        let ys = self.tuple("y", k);
        let py = terms(&ys);
        let low = zero_tuple(&py[..k - 1]);
        forall_in(
            ys,
            i,
            or(vec![
                and(vec![low.clone(), x.bit(&py, Term::one()), bit(t, &py[k - 1])]),
                and(vec![low.clone(), x.bit(&py, Term::zero()), not(bit(t, &py[k - 1]))]),
                and(vec![not(low), x.bit(&py, Term::zero())]),
            ]),
        )
    }

    /// Ripple-carry addition `X + Y = Z` with carries in `W`, without the
    /// `BIN` conjuncts.
    pub fn bsum_core(&mut self, x: &Num, y: &Num, z: &Num, w: &Num, i: &SoVar) -> Formula {
        let k = i.arity;
        let carry_in = w.bit(&zeros(k), Term::zero());
        let x_le = self.le_with(x, z, i);
        let y_le = self.le_with(y, z, i);

        let xs = self.tuple("x", k);
        let ys = self.tuple("y", k);
        let (px, py) = (terms(&xs), terms(&ys));

        // bit 0 of Z is the parity of the bits 0 of X and Y
        let first = or(bit_cases(2, |v| {
            and(vec![
                x.bit(&zeros(k), Term::bit(v[0])),
                y.bit(&zeros(k), Term::bit(v[1])),
                z.bit(&zeros(k), Term::bit(v[0] ^ v[1])),
            ])
        }));
        // carry into x̄ is the majority of carry, X and Y at ȳ
        let carry = or(bit_cases(3, |v| {
            let majority = (v[0] as u8 + v[1] as u8 + v[2] as u8) >= 2;
            and(vec![
                w.bit(&py, Term::bit(v[0])),
                x.bit(&py, Term::bit(v[1])),
                y.bit(&py, Term::bit(v[2])),
                w.bit(&px, Term::bit(majority)),
            ])
        }));
        // bit x̄ of Z is the parity of carry, X and Y at x̄
        let digit = or(bit_cases(3, |v| {
            and(vec![
                w.bit(&px, Term::bit(v[0])),
                x.bit(&px, Term::bit(v[1])),
                y.bit(&px, Term::bit(v[2])),
                z.bit(&px, Term::bit(v[0] ^ v[1] ^ v[2])),
            ])
        }));
        let step = forall_in(
            xs,
            i,
            or(vec![
                and(vec![zero_tuple(&px), first]),
                and(vec![exists_all(ys, and(vec![succ_tuple(&py, &px), carry])), digit]),
            ]),
        );
        and(vec![carry_in, x_le, y_le, step])
    }

    /// `BSUM(X, Y, Z, I, W)` with free `I` and carry relation `W`.
    pub fn bsum_with(&mut self, x: &Num, y: &Num, z: &Num, w: &Num, i: &SoVar) -> Formula {
        let bins = [x, y, z, w].map(|n| self.bin_with(n, i));
        let core = self.bsum_core(x, y, z, w, i);
        and(bins.into_iter().chain([core]).collect())
    }

    /// `SHIFT(S, X, I)`: slice `i` of `S` is `X` shifted left by `i` bits,
    /// truncated to the width of `X`.
    pub fn shift_with(&mut self, s: &Num, x: &Num, i: &SoVar) -> Formula {
        let k = i.arity;
        let xs = self.tuple("x", k);
        let ys = self.tuple("y", k);
        let zs = self.tuple("z", k);
        let zs2 = self.tuple("u", k);
        let (px, py, pz, pz2) = (terms(&xs), terms(&ys), terms(&zs), terms(&zs2));
        let sx = s.sub(&px);
        let sy = s.sub(&py);
        let first = self.copy_with(&sx, x, i);
        let moved = forall_in(
            zs,
            i,
            or(vec![
                and(vec![zero_tuple(&pz), sx.bit(&pz, Term::zero())]),
                exists_all(zs2, and(vec![succ_tuple(&pz2, &pz), same_bit(&sy, &pz2, &sx, &pz)])),
            ]),
        );
        forall_in(
            xs,
            i,
            or(vec![
                and(vec![zero_tuple(&px), first]),
                exists_all(ys, and(vec![succ_tuple(&py, &px), moved])),
            ]),
        )
    }

    /// `R|x̄ = X` bitwise (the same shape as `=_k`).
    fn copy_with(&mut self, target: &Num, source: &Num, i: &SoVar) -> Formula {
        self.eq_with(target, source, i)
    }

    /// `R|x̄` encodes 0.
    fn zero_with(&mut self, x: &Num, i: &SoVar) -> Formula {
        let ys = self.tuple("y", i.arity);
        let py = terms(&ys);
        forall_in(ys, i, x.bit(&py, Term::zero()))
    }

    /// `BMULT(X, Y, Z, I, I', R, S, W)` with every auxiliary relation free.
    /// `I'` is owned by the multiplication, so `DEF(I')` is included.
    #[allow(clippy::too_many_arguments)]
    pub fn bmult_with(
        &mut self,
        x: &Num,
        y: &Num,
        z: &Num,
        i: &SoVar,
        i2: &SoVar,
        r: &Num,
        s: &Num,
        w: &Num,
    ) -> Formula {
        let k = i.arity;
        let mut parts = vec![self.bin_with(x, i), self.bin_with(y, i), self.bin_with(z, i)];
        parts.push(self.def(i2));
        for v in [r, s, w] {
            parts.push(self.bin_with(v, i2));
        }
        parts.push(self.shift_with(s, x, i));

        // partial products, one slice of R per bit of the multiplier
        let xs = self.tuple("x", k);
        let ys = self.tuple("y", k);
        let (px, py) = (terms(&xs), terms(&ys));
        let (rx, ry) = (r.sub(&px), r.sub(&py));
        let (sx, wx) = (s.sub(&px), w.sub(&px));
        let case_a = self.zero_with(&rx, i);
        let case_b = self.copy_with(&rx, x, i);
        let case_c = self.eq_with(&rx, &ry, i);
        let case_d = self.bsum_core(&ry, &sx, &rx, &wx, i);
        let steps = forall_in(
            xs.clone(),
            i,
            or(vec![
                and(vec![zero_tuple(&px), y.bit(&px, Term::zero()), case_a]),
                and(vec![zero_tuple(&px), y.bit(&px, Term::one()), case_b]),
                and(vec![
                    y.bit(&px, Term::zero()),
                    exists_all(ys.clone(), and(vec![succ_tuple(&py, &px), case_c])),
                ]),
                and(vec![
                    y.bit(&px, Term::one()),
                    exists_all(ys.clone(), and(vec![succ_tuple(&py, &px), case_d])),
                ]),
            ]),
        );
        parts.push(steps);
        parts.push(self.shift_loss_guard(y, s, i));

        let ms = self.tuple("m", k);
        let pm = terms(&ms);
        let result = self.eq_with(&r.sub(&pm), z, i);
        parts.push(exists_all(ms, and(vec![max_tuple(&pm), result])));
        and(parts)
    }

    /// No set bit of `X` is shifted out before the last set bit of `Y`:
    /// at every position up to the highest 1 of `Y`, `S|pred(x̄) ≤ S|x̄`.
    fn shift_loss_guard(&mut self, y: &Num, s: &Num, i: &SoVar) -> Formula {
        let k = i.arity;
        let xs = self.tuple("x", k);
        let us = self.tuple("u", k);
        let ys = self.tuple("y", k);
        let (px, pu, py) = (terms(&xs), terms(&us), terms(&ys));
        let multiplier_done = forall_in(us, i, or(vec![lt_tuple(&pu, &px), y.bit(&pu, Term::zero())]));
        let no_loss = self.le_with(&s.sub(&py), &s.sub(&px), i);
        forall_in(
            xs,
            i,
            or(vec![
                zero_tuple(&px),
                multiplier_done,
                exists_all(ys, and(vec![succ_tuple(&py, &px), no_loss])),
            ]),
        )
    }

    /// Variables `(I', R, S, W)` for a multiplication in this context.
    pub fn mult_vars(&mut self) -> (SoVar, SoVar, SoVar, SoVar) {
        let k = self.k;
        (
            self.so("J", 2 * k, 2 * k),
            self.so("R", 2 * k + 1, 2 * k),
            self.so("S", 2 * k + 1, 2 * k),
            self.so("W", 2 * k + 1, 2 * k),
        )
    }

    /// `BDIV(X, Y, Z, M)` body with every auxiliary relation free.
    #[allow(clippy::too_many_arguments)]
    pub fn bdiv_with(
        &mut self,
        x: &Num,
        y: &Num,
        z: &Num,
        m: &Num,
        i: &SoVar,
        a: &Num,
        mult: (&SoVar, &Num, &Num, &Num),
        carry: &Num,
    ) -> Formula {
        let mut parts: Vec<Formula> = [x, y, m, a].iter().map(|n| self.bin_with(n, i)).collect();
        parts.push(not(self.bnum_with(y, &Term::zero(), i)));
        parts.push(self.lt_with(m, y, i));
        let (i2, r, s, w) = mult;
        parts.push(self.bmult_with(z, y, a, i, i2, r, s, w));
        parts.push(self.bsum_with(a, m, x, carry, i));
        and(parts)
    }
}

/// One formula per assignment of `len` bits, in counting order.
/// `X` at `px` and `Y` at `py` carry the same bit, 0 or 1.
fn same_bit(x: &Num, px: &[Term], y: &Num, py: &[Term]) -> Formula {
    or([Term::zero(), Term::one()].map(|b| and(vec![x.bit(px, b.clone()), y.bit(py, b)])).into())
}

fn bit_cases(len: usize, mut f: impl FnMut(&[bool]) -> Formula) -> Vec<Formula> {
    (0..1usize << len)
        .map(|m| {
            let v: Vec<bool> = (0..len).map(|i| (m >> i) & 1 == 1).collect();
            f(&v)
        })
        .collect()
}

fn check_number(k: usize, v: &SoVar) {
    assert_eq!(v.arity, k + 1, "{} must have arity k + 1", v.name);
}

fn context_for(k: usize, vars: &[&SoVar]) -> MacroContext {
    MacroContext::reserving(k, vars.iter().map(|v| v.name.as_str()))
}

/// `DEF_k(I)` for a free `I` of arity and exponent `k`.
pub fn def_k(k: usize, i: &SoVar) -> Formula {
    assert_eq!(i.arity, k, "{} must have arity k", i.name);
    context_for(k, &[i]).def(i)
}

/// `BIN_k(X)`.
pub fn bin_k(k: usize, x: &SoVar) -> Formula {
    check_number(k, x);
    let mut ctx = context_for(k, &[x]);
    let i = ctx.index_var();
    let body = and(vec![ctx.def(&i), ctx.bin_with(&Num::whole(x), &i)]);
    so_exists_all(&[i], body)
}

/// `BIN_k(X, I)` with `I` free.
pub fn bin_k_with(k: usize, x: &SoVar, i: &SoVar) -> Formula {
    check_number(k, x);
    context_for(k, &[x, i]).bin_with(&Num::whole(x), i)
}

/// `X =_k Y` or `X <_k Y`.
pub fn cmp_num(k: usize, x: &SoVar, y: &SoVar, mode: CmpMode) -> Formula {
    check_number(k, x);
    check_number(k, y);
    let mut ctx = context_for(k, &[x, y]);
    let i = ctx.index_var();
    let (nx, ny) = (Num::whole(x), Num::whole(y));
    let cmp = match mode {
        CmpMode::Eq => ctx.eq_with(&nx, &ny, &i),
        CmpMode::Lt => ctx.lt_with(&nx, &ny, &i),
    };
    let body = and(vec![ctx.def(&i), ctx.bin_with(&nx, &i), ctx.bin_with(&ny, &i), cmp]);
    so_exists_all(&[i], body)
}

/// `BNUM_k(X, t)`.
pub fn bnum(k: usize, x: &SoVar, t: &Term) -> Formula {
    check_number(k, x);
    let mut ctx = context_for(k, &[x]);
    if let Term::Var(v) = t {
        ctx.names.reserve(v);
    }
    let i = ctx.index_var();
    let nx = Num::whole(x);
    let body = and(vec![ctx.def(&i), ctx.bin_with(&nx, &i), ctx.bnum_with(&nx, t, &i)]);
    so_exists_all(&[i], body)
}

/// `BSUM_k(X, Y, Z)`: `X + Y = Z` without overflow.
pub fn bsum(k: usize, x: &SoVar, y: &SoVar, z: &SoVar) -> Formula {
    for v in [x, y, z] {
        check_number(k, v);
    }
    let mut ctx = context_for(k, &[x, y, z]);
    let i = ctx.index_var();
    let w = ctx.number_var("W");
    let body = and(vec![
        ctx.def(&i),
        ctx.bsum_with(&Num::whole(x), &Num::whole(y), &Num::whole(z), &Num::whole(&w), &i),
    ]);
    so_exists_all(&[i, w], body)
}

/// `BMULT_k(X, Y, Z)`: `X · Y = Z` without overflow.
pub fn bmult(k: usize, x: &SoVar, y: &SoVar, z: &SoVar) -> Formula {
    for v in [x, y, z] {
        check_number(k, v);
    }
    let mut ctx = context_for(k, &[x, y, z]);
    let i = ctx.index_var();
    let (i2, r, s, w) = ctx.mult_vars();
    let body = and(vec![
        ctx.def(&i),
        ctx.bmult_with(
            &Num::whole(x),
            &Num::whole(y),
            &Num::whole(z),
            &i,
            &i2,
            &Num::whole(&r),
            &Num::whole(&s),
            &Num::whole(&w),
        ),
    ]);
    so_exists_all(&[i, i2, r, s, w], body)
}

/// `BDIV_k(X, Y, Z, M)`: `Y · Z + M = X` with `M < Y`.
pub fn bdiv(k: usize, x: &SoVar, y: &SoVar, z: &SoVar, m: &SoVar) -> Formula {
    for v in [x, y, z, m] {
        check_number(k, v);
    }
    let mut ctx = context_for(k, &[x, y, z, m]);
    let i = ctx.index_var();
    let a = ctx.number_var("A");
    let (i2, r, s, w) = ctx.mult_vars();
    let carry = ctx.number_var("V");
    let body = and(vec![
        ctx.def(&i),
        ctx.bin_with(&Num::whole(z), &i),
        ctx.bdiv_with(
            &Num::whole(x),
            &Num::whole(y),
            &Num::whole(z),
            &Num::whole(m),
            &i,
            &Num::whole(&a),
            (&i2, &Num::whole(&r), &Num::whole(&s), &Num::whole(&w)),
            &Num::whole(&carry),
        ),
    ]);
    so_exists_all(&[i, i2, a, r, s, w, carry], body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{eval, EvalConfig, Valuation};
    use crate::formula::{classify, to_snf, FragmentLabel};
    use crate::structure::{all_tuples, Interpretation, Structure, TupleSet, Vocabulary};

    fn ordered(n: usize) -> Structure {
        Structure::new(Vocabulary::new(), n, Interpretation::new()).unwrap()
    }

    fn num(name: &str) -> SoVar {
        SoVar::new(name, 2, 1)
    }

    fn holds(n: usize, f: &Formula, val: &Valuation) -> bool {
        eval(&ordered(n), val, f, &EvalConfig::default()).unwrap()
    }

    fn numbers(n: usize, pairs: &[(&str, u128)]) -> Valuation {
        pairs.iter().fold(Valuation::default(), |v, &(name, value)| {
            v.with_relation(name, encode_number(n, 1, value).unwrap())
        })
    }

    fn tuple_vars(prefix: &str, k: usize) -> Vec<Term> {
        (0..k).map(|i| Term::var(format!("{prefix}{i}"))).collect()
    }

    fn bind(val: Valuation, prefix: &str, t: &[usize]) -> Valuation {
        t.iter().enumerate().fold(val, |v, (i, &x)| v.with_element(&format!("{prefix}{i}"), x))
    }

    #[test]
    fn stray_bit_values_do_not_count_as_agreement() {
        let n = 4;
        let junk = |value| {
            let mut set = encode_number(n, 1, value).unwrap();
            set.extend((0..width(n, 1)).map(|p| vec![p, 2]));
            set
        };
        let (x, y) = (num("X"), num("Y"));
        let val = Valuation::default().with_relation("X", junk(0)).with_relation("Y", junk(3));
        assert!(!holds(n, &cmp_num(1, &x, &y, CmpMode::Eq), &val));
        assert!(holds(n, &cmp_num(1, &x, &y, CmpMode::Lt), &val));
        let (z, w) = (num("Z"), num("W"));
        let val = val.with_relation("Z", junk(0)).with_relation("W", junk(1));
        assert!(!holds(n, &bmult(1, &w, &y, &z), &val));
    }

    #[test]
    fn tuple_order_and_successor_match_positions() {
        for (n, k) in [(4, 2), (8, 2), (8, 1)] {
            let (xs, ys) = (tuple_vars("a", k), tuple_vars("b", k));
            let le = leq_tuple(&xs, &ys);
            let next = succ_tuple(&xs, &ys);
            let positions = width(n, k);
            for i in 0..positions {
                for j in 0..positions {
                    let val = bind(bind(Valuation::default(), "a", &position_tuple(n, k, i)), "b", &position_tuple(n, k, j));
                    assert_eq!(holds(n, &le, &val), i <= j, "n={n} k={k} {i} <= {j}");
                    assert_eq!(holds(n, &next, &val), j == i + 1, "n={n} k={k} succ {i} {j}");
                }
            }
        }
        assert_eq!(leq_tuple(&[Term::var("x0")], &[Term::var("y0")]), leq("x0", "y0"));
    }

    #[test]
    fn def_selects_exactly_the_index_set() {
        let i = SoVar::new("I", 1, 1);
        let f = def_k(1, &i);
        let candidates: Vec<TupleSet> = crate::eval::enumerate_relations(4, 1, 1, 1000).unwrap().collect();
        assert_eq!(candidates.len(), 11);
        let good: Vec<&TupleSet> = candidates
            .iter()
            .filter(|c| holds(4, &f, &Valuation::default().with_relation("I", (*c).clone())))
            .collect();
        assert_eq!(good, vec![&def_relation(4, 1)]);

        let i2 = SoVar::new("I", 2, 2);
        let f2 = def_k(2, &i2);
        assert!(holds(4, &f2, &Valuation::default().with_relation("I", def_relation(4, 2))));
        assert!(!holds(4, &f2, &Valuation::default().with_relation("I", TupleSet::new())));
    }

    #[test]
    fn bin_examples() {
        let f = bin_k(1, &num("X"));
        assert!(holds(4, &f, &numbers(4, &[("X", 2)])));
        assert!(!holds(4, &f, &Valuation::default().with_relation("X", TupleSet::new())));
        let partial: TupleSet = [vec![0, 0], vec![0, 1]].into_iter().collect();
        assert!(!holds(4, &f, &Valuation::default().with_relation("X", partial)));
    }

    #[test]
    fn comparison_examples() {
        let (x, y) = (num("X"), num("Y"));
        let lt = cmp_num(1, &x, &y, CmpMode::Lt);
        let same = cmp_num(1, &x, &x, CmpMode::Eq);
        for a in 0..4 {
            for b in 0..4 {
                let val = numbers(4, &[("X", a), ("Y", b)]);
                assert_eq!(holds(4, &lt, &val), a < b, "{a} < {b}");
            }
            assert!(holds(4, &same, &numbers(4, &[("X", a)])));
        }
    }

    #[test]
    fn bnum_examples() {
        let x = num("X");
        let f = bnum(1, &x, &Term::var("v"));
        let check = |value: u128, elem: usize| holds(4, &f, &numbers(4, &[("X", value)]).with_element("v", elem));
        assert!(check(3, 3));
        assert!(check(0, 0));
        assert!(!check(1, 2));
        for v in 0..4 {
            for e in 0..4 {
                assert_eq!(check(v, e), v == e as u128);
            }
        }
    }

    #[test]
    fn sum_examples() {
        let f = bsum(1, &num("X"), &num("Y"), &num("Z"));
        let sum = |a, b, c| holds(4, &f, &numbers(4, &[("X", a), ("Y", b), ("Z", c)]));
        assert!(sum(1, 2, 3));
        for y in 0..4 {
            assert!(sum(0, y, y));
        }
        for z in 0..4 {
            assert!(!sum(2, 3, z));
        }
    }

    #[test]
    fn product_examples() {
        let f = bmult(1, &num("X"), &num("Y"), &num("Z"));
        let prod = |a, b, c| holds(4, &f, &numbers(4, &[("X", a), ("Y", b), ("Z", c)]));
        assert!(prod(3, 1, 3));
        assert!(prod(0, 2, 0));
        assert!(!prod(3, 1, 2));
        for z in 0..4 {
            assert!(!prod(2, 2, z));
        }
    }

    #[test]
    fn division_examples() {
        let f = bdiv(1, &num("X"), &num("Y"), &num("Z"), &num("M"));
        let div = |n, x, y, z, m| holds(n, &f, &numbers(n, &[("X", x), ("Y", y), ("Z", z), ("M", m)]));
        assert!(div(16, 5, 2, 2, 1));
        assert!(!div(16, 5, 2, 1, 3));
        assert!(div(4, 3, 3, 1, 0));
        for z in 0..4 {
            for m in 0..4 {
                assert!(!div(4, 2, 0, z, m));
            }
        }
    }

    #[test]
    fn witnesses_satisfy_open_forms() {
        let n = 8;
        let mut ctx = MacroContext::reserving(1, ["X", "Y", "Z"]);
        let i = ctx.index_var();
        let w = ctx.number_var("W");
        let (x, y, z) = (num("X"), num("Y"), num("Z"));
        let sum = ctx.bsum_with(&Num::whole(&x), &Num::whole(&y), &Num::whole(&z), &Num::whole(&w), &i);
        let (i2, r, s, c) = ctx.mult_vars();
        let (rn, sn, cn) = (Num::whole(&r), Num::whole(&s), Num::whole(&c));
        let prod = ctx.bmult_with(&Num::whole(&x), &Num::whole(&y), &Num::whole(&z), &i, &i2, &rn, &sn, &cn);
        let index = |v: Valuation| v.with_relation(&i.name, def_relation(n, 1)).with_relation(&i2.name, def_relation(n, 2));
        for a in 0..8u128 {
            for b in 0..8u128 {
                if a + b < 8 {
                    let val = index(numbers(n, &[("X", a), ("Y", b), ("Z", a + b)]))
                        .with_relation(&w.name, sum_carries(n, 1, a, b));
                    assert!(holds(n, &sum, &val), "{a} + {b}");
                }
                if a * b < 8 {
                    let (rr, ss, ww) = mult_witness(n, 1, a, b);
                    let val = index(numbers(n, &[("X", a), ("Y", b), ("Z", a * b)]))
                        .with_relation(&r.name, rr)
                        .with_relation(&s.name, ss)
                        .with_relation(&c.name, ww);
                    assert!(holds(n, &prod, &val), "{a} * {b}");
                }
            }
        }
    }

    #[test]
    fn arithmetic_is_existential() {
        let (x, y, z, m) = (num("X"), num("Y"), num("Z"), num("M"));
        for f in [bsum(1, &x, &y, &z), bmult(1, &x, &y, &z), bdiv(1, &x, &y, &z, &m), bnum(1, &x, &Term::var("v"))] {
            assert_eq!(classify(&to_snf(&f)), FragmentLabel::Sigma(1));
        }
    }

    #[test]
    fn cardinality_examples() {
        let (x, y) = (SoVar::new("X", 1, 1), SoVar::new("Y", 1, 1));
        let f = card_leq(&x, &y);
        let set = |xs: &[usize]| -> TupleSet { xs.iter().map(|&e| vec![e]).collect() };
        let check = |a: &[usize], b: &[usize]| {
            holds(4, &f, &Valuation::default().with_relation("X", set(a)).with_relation("Y", set(b)))
        };
        assert!(check(&[], &[3]));
        assert!(!check(&[0, 1], &[2]));
        assert!(check(&[0, 1], &[0, 1]));
        let subsets: Vec<Vec<usize>> = all_tuples(4, 1)
            .flat_map(|a| all_tuples(4, 1).map(move |b| if a < b { vec![a[0], b[0]] } else { vec![a[0]] }))
            .chain([vec![]])
            .collect();
        for a in &subsets {
            for b in &subsets {
                assert_eq!(check(a, b), a.len() <= b.len(), "{a:?} {b:?}");
            }
        }
    }
}
