//! Compilation of nondeterministic random-access machines into existential
//! second-order sentences: a structure satisfies the sentence exactly when
//! the machine accepts its binary encoding within `⌈log n⌉^k − 1` steps.
//!
//! Time stamps are tuples of `B^k`, work-tape cells too. The address tape is
//! kept as a number over `B^{k'}` per time stamp, position `ℓ − 1 − cell`.
//! Structures with two elements have a single time stamp, so the sentence
//! covers them with an explicit table of accepted structures.

mod corpus;
pub mod witness;

use thiserror::Error;

use crate::eval::size_bound;
use crate::formula::{
    and, bit, eq, exists, exists_all, forall_in, not, or, rel, so_exists_all, succ, Formula, SoVar, Term,
};
use crate::macros::{leq_tuple, max_tuple, succ_tuple, zero_tuple, MacroContext, Num};
use crate::ratm::{accepts, bits_input, MachineSpec, Mode, Move, RunBudget, BLANK, ENDMARK};
use crate::structure::{all_tuples, ceil_log2, decode_bin, encode_bin, BitString, Structure, Vocabulary};

pub use corpus::{toy_corpus, ToyMachine};
pub use witness::{
    exhaustive, extract_witness, verify_capture, witness_for, CaptureEntry, CaptureReport, Method, WitnessError,
};




#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("machine is not normalized: {0}")]
    MachineNotNormalized(String),
    #[error("exponent too small: {0}")]
    ExponentTooSmall(String),
    #[error("vocabulary has no input symbols")]
    EmptyVocabulary,
    #[error("symbol '{sym}' in {place} cannot be compiled")]
    UnsupportedSymbol { sym: char, place: &'static str },
    #[error("plan was built for a different machine")]
    PlanMismatch,
}

/// Work-tape symbols in the order of the cell predicates.
pub const CELL_SYMBOLS: [char; 3] = ['0', '1', BLANK];
/// Input symbols in the order of the read predicates.
pub const READ_SYMBOLS: [char; 3] = ['0', '1', ENDMARK];

/// Steps granted to the machine on structures of size `n`.
pub fn time_budget(n: usize, k: usize) -> usize {
    ceil_log2(n).max(2).pow(k as u32) - 1
}

/// Every structure of size `n` over `vocab`.
pub fn all_structures(vocab: &Vocabulary, n: usize) -> Vec<Structure> {
    let len = vocab.encoding_length(n);
    assert!(len < 24, "too many structures to list");
    (0u64..1 << len)
        .filter_map(|code| {
            let bits = BitString((0..len).map(|i| code >> (len - 1 - i) & 1 == 1).collect());
            decode_bin(vocab, n, &bits).ok()
        })
        .collect()
}

/// A divisor of a per-time division: `M_e = n^e` or `⌈log n⌉`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Divisor {
    Power(usize),
    LogN,
}

/// Per-time relations witnessing one division `x = q·y + r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivFamily {
    pub divisor: Divisor,
    pub quotient: SoVar,
    pub remainder: SoVar,
    pub product: SoVar,
    pub partial: SoVar,
    pub shifted: SoVar,
    pub mult_carry: SoVar,
    pub carry: SoVar,
}

/// Which number holds a tuple component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pick {
    Offset,
    Quotient,
    Remainder,
}

/// One tuple component: a chain of divisions starting at the section
/// offset, each dividing the previous quotient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digit {
    pub divs: Vec<DivFamily>,
    pub pick: Pick,
}

/// The part of the encoding holding one input relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelSection {
    pub relation: String,
    pub arity: usize,
    pub offset: SoVar,
    pub carry: SoVar,
    pub digits: Vec<Digit>,
}

/// The part of the encoding holding the constants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstSection {
    pub constants: Vec<String>,
    pub offset: SoVar,
    pub carry: SoVar,
    pub div: DivFamily,
    pub bit_index: SoVar,
    pub bit_carry: SoVar,
}

/// Numbers shared by all time stamps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arithmetic {
    pub one: SoVar,
    pub max: SoVar,
    /// `M_1 .. M_r`, where `M_e = n^e`.
    pub powers: Vec<SoVar>,
    pub power_carry: SoVar,
    /// `(R, S, W)` of the products `M_e = M_1 · M_{e−1}`, from `e = 2`.
    pub power_mults: Vec<(SoVar, SoVar, SoVar)>,
    /// Section starts `P_0 .. P_p`.
    pub offsets: Vec<SoVar>,
    pub offset_carries: Vec<SoVar>,
    pub constants: Option<ConstArithmetic>,
    /// Highest set bit of the encoding length.
    pub top: SoVar,
}

/// Numbers locating the constants: multiples of `⌈log n⌉` and the end of
/// the encoding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstArithmetic {
    /// `N_1 .. N_q` with `N_i = i·⌈log n⌉`.
    pub multiples: Vec<SoVar>,
    pub multiple_carries: Vec<SoVar>,
    pub end: SoVar,
    pub end_carry: SoVar,
    pub last_bit: SoVar,
}

/// Relations describing the run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunPredicates {
    pub states: Vec<SoVar>,
    pub reads: [SoVar; 3],
    pub choice: SoVar,
    /// Per work tape, one relation per symbol of [`CELL_SYMBOLS`].
    pub cells: Vec<[SoVar; 3]>,
    pub heads: Vec<SoVar>,
    pub address: SoVar,
    pub address_head: SoVar,
    pub left_sentinel: SoVar,
    pub right_sentinel: SoVar,
}

/// Every predicate of the compiled sentence, plus what the generator needs
/// to know about the machine.
#[derive(Debug, Clone)]
pub struct CompilationPlan {
    pub k: usize,
    pub k_addr: usize,
    pub index: SoVar,
    pub addr_index: SoVar,
    pub pair_index: Option<SoVar>,
    pub arith: Arithmetic,
    pub run: RunPredicates,
    pub sections: Vec<RelSection>,
    pub const_section: Option<ConstSection>,
    /// For each rule, the other rule it may compete with.
    pub partners: Vec<Option<usize>>,
    /// Structures of size 2 the machine accepts.
    pub accepted_pairs: Vec<Structure>,
    vocab: Vocabulary,
    rule_count: usize,
    state_count: usize,
    ctx: MacroContext,
}

/// One manifest line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanEntry {
    pub var: SoVar,
    pub role: String,
}

fn terms(names: &[String]) -> Vec<Term> {
    names.iter().map(Term::var).collect()
}

fn cat(parts: &[&[Term]]) -> Vec<Term> {
    parts.concat()
}

fn tuple_eq(xs: &[Term], ys: &[Term]) -> Formula {
    and(xs.iter().zip(ys).map(|(x, y)| eq(x, y)).collect())
}

fn exactly_one(atoms: Vec<Formula>) -> Formula {
    or((0..atoms.len())
        .map(|i| {
            let rest = atoms.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, a)| not(a.clone()));
            and(std::iter::once(atoms[i].clone()).chain(rest).collect())
        })
        .collect())
}

fn symbol_index(table: &[char; 3], c: char) -> usize {
    table.iter().position(|&s| s == c).expect("symbol checked at planning")
}

fn check_machine(m: &MachineSpec) -> Result<Vec<Option<usize>>, CompileError> {
    if let Some(s) = m.states.iter().find(|s| s.mode == Mode::Universal) {
        return Err(CompileError::MachineNotNormalized(format!("state '{}' is universal", s.name)));
    }
    if m.max_branching() > 2 {
        return Err(CompileError::MachineNotNormalized(format!(
            "a configuration may have {} successors",
            m.max_branching()
        )));
    }
    for r in &m.rules {
        if let Some(c) = r.read.filter(|c| !READ_SYMBOLS.contains(c)) {
            return Err(CompileError::UnsupportedSymbol { sym: c, place: "input read" });
        }
        for &c in r.work.iter().chain(&r.writes).flatten() {
            if !CELL_SYMBOLS.contains(&c) {
                return Err(CompileError::UnsupportedSymbol { sym: c, place: "work tape" });
            }
        }
    }
    let mut partners = vec![None; m.rules.len()];
    for (i, r) in m.rules.iter().enumerate() {
        partners[i] = m.rules_from(r.from).map(|(j, _)| j).find(|&j| j != i && r.overlaps(&m.rules[j]));
    }
    Ok(partners)
}

impl CompilationPlan {
    pub fn new(m: &MachineSpec, k: usize, k_addr: usize, vocab: &Vocabulary) -> Result<Self, CompileError> {
        if k == 0 || k_addr == 0 {
            return Err(CompileError::ExponentTooSmall("time and address exponents must be at least 1".into()));
        }
        if vocab.input_relations().next().is_none() && vocab.input_constants().next().is_none() {
            return Err(CompileError::EmptyVocabulary);
        }
        let partners = check_machine(m)?;
        let reserved: Vec<&str> = vocab
            .relations()
            .iter()
            .map(|r| r.name.as_str())
            .chain(vocab.constants().iter().map(|c| c.name.as_str()))
            .collect();
        let mut ctx = MacroContext::reserving(k_addr, reserved);
        let (kt, ka) = (k, k_addr);
        let num = |ctx: &mut MacroContext, base: &str| ctx.so(base, ka + 1, ka);
        // per-time copies of a number or of a multiplication slice family
        let fam = |ctx: &mut MacroContext, base: &str| ctx.so(base, kt + ka + 1, kt + ka);
        let wide = |ctx: &mut MacroContext, base: &str| ctx.so(base, kt + 2 * ka + 1, kt + 2 * ka);
        let div = |ctx: &mut MacroContext, divisor: Divisor| DivFamily {
            divisor,
            quotient: fam(ctx, "Q"),
            remainder: fam(ctx, "Rm"),
            product: fam(ctx, "A"),
            partial: wide(ctx, "Rp"),
            shifted: wide(ctx, "Sh"),
            mult_carry: wide(ctx, "Wm"),
            carry: fam(ctx, "Wd"),
        };

        let index = ctx.so("I", kt, kt);
        let addr_index = ctx.so("Ia", ka, ka);
        let arities: Vec<usize> = vocab.input_relations().map(|r| r.arity).collect();
        let constants: Vec<String> = vocab.input_constants().map(|c| c.name.clone()).collect();
        let max_arity = arities.iter().copied().max().unwrap_or(1).max(1);
        let pair_index = (max_arity >= 2 || !constants.is_empty()).then(|| ctx.so("J", 2 * ka, 2 * ka));

        let one = num(&mut ctx, "One");
        let max = num(&mut ctx, "Max");
        let powers: Vec<SoVar> = (1..=max_arity).map(|e| num(&mut ctx, &format!("M{e}_"))).collect();
        let power_carry = num(&mut ctx, "Wn");
        let power_mults = (2..=max_arity)
            .map(|_| (ctx.so("Rp", 2 * ka + 1, 2 * ka), ctx.so("Sh", 2 * ka + 1, 2 * ka), ctx.so("Wm", 2 * ka + 1, 2 * ka)))
            .collect();
        let offsets: Vec<SoVar> = (0..=arities.len()).map(|i| num(&mut ctx, &format!("P{i}_"))).collect();
        let offset_carries = arities.iter().map(|_| num(&mut ctx, "Wp")).collect();
        let const_arith = (!constants.is_empty()).then(|| ConstArithmetic {
            multiples: (1..=constants.len()).map(|i| num(&mut ctx, &format!("N{i}_"))).collect(),
            multiple_carries: (2..=constants.len()).map(|_| num(&mut ctx, "Wq")).collect(),
            end: num(&mut ctx, "Pend"),
            end_carry: num(&mut ctx, "We"),
            last_bit: num(&mut ctx, "Lm"),
        });
        let top = ctx.so("Top", ka, 0);
        let arith = Arithmetic {
            one,
            max,
            powers,
            power_carry,
            power_mults,
            offsets,
            offset_carries,
            constants: const_arith,
            top,
        };

        let run = RunPredicates {
            states: (0..m.states.len()).map(|q| ctx.so(&format!("S{q}_"), kt, kt)).collect(),
            reads: ["L0", "L1", "Lend"].map(|b| ctx.so(b, kt, kt)),
            choice: ctx.so("G", kt, kt),
            cells: (0..m.tapes)
                .map(|j| ["0", "1", "b"].map(|s| ctx.so(&format!("T{j}{s}_"), 2 * kt, 2 * kt)))
                .collect(),
            heads: (0..m.tapes).map(|j| ctx.so(&format!("H{j}_"), 2 * kt, kt)).collect(),
            address: ctx.so("C", kt + ka + 1, kt + ka),
            address_head: ctx.so("Ah", kt + ka, kt),
            left_sentinel: ctx.so("Al", kt, kt),
            right_sentinel: ctx.so("Ar", kt, kt),
        };

        let mut sections = Vec::new();
        for r in vocab.input_relations() {
            let offset = fam(&mut ctx, "D");
            let carry = fam(&mut ctx, "Wo");
            let digits = (1..=r.arity)
                .map(|j| {
                    let e = r.arity - j;
                    if r.arity == 1 {
                        Digit { divs: vec![], pick: Pick::Offset }
                    } else if e == 0 {
                        Digit { divs: vec![div(&mut ctx, Divisor::Power(1))], pick: Pick::Remainder }
                    } else if j == 1 {
                        Digit { divs: vec![div(&mut ctx, Divisor::Power(e))], pick: Pick::Quotient }
                    } else {
                        let first = div(&mut ctx, Divisor::Power(e));
                        let second = div(&mut ctx, Divisor::Power(1));
                        Digit { divs: vec![first, second], pick: Pick::Remainder }
                    }
                })
                .collect();
            sections.push(RelSection { relation: r.name.clone(), arity: r.arity, offset, carry, digits });
        }
        let const_section = (!constants.is_empty()).then(|| ConstSection {
            constants: constants.clone(),
            offset: fam(&mut ctx, "D"),
            carry: fam(&mut ctx, "Wo"),
            div: div(&mut ctx, Divisor::LogN),
            bit_index: fam(&mut ctx, "Y"),
            bit_carry: fam(&mut ctx, "Wy"),
        });

        let budget = RunBudget::steps(time_budget(2, k));
        let accepted_pairs = all_structures(vocab, 2)
            .into_iter()
            .filter(|s| accepts(m, &bits_input(&encode_bin(s)), budget))
            .collect();

        Ok(CompilationPlan {
            k,
            k_addr,
            index,
            addr_index,
            pair_index,
            arith,
            run,
            sections,
            const_section,
            partners,
            accepted_pairs,
            vocab: vocab.clone(),
            rule_count: m.rules.len(),
            state_count: m.states.len(),
            ctx,
        })
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    /// End of the encoding: the last section start, or the end of the
    /// constants.
    pub fn end(&self) -> &SoVar {
        match &self.arith.constants {
            Some(c) => &c.end,
            None => self.arith.offsets.last().expect("at least P_0"),
        }
    }

    /// Every second-order variable with its role, in quantifier order.
    pub fn manifest(&self) -> Vec<PlanEntry> {
        let mut out = Vec::new();
        put(&mut out, &self.index, "time and work-cell index set B^k".into());
        put(&mut out, &self.addr_index, "address-number positions B^k'".into());
        if let Some(j) = &self.pair_index {
            put(&mut out, j, "positions of multiplication steps B^2k'".into());
        }
        let a = &self.arith;
        put(&mut out, &a.one, "number 1".into());
        put(&mut out, &a.max, "number n-1".into());
        for (e, p) in a.powers.iter().enumerate() {
            put(&mut out, p, format!("number n^{}", e + 1));
        }
        put(&mut out, &a.power_carry, "carries of (n-1)+1".into());
        for (e, (r, s, w)) in a.power_mults.iter().enumerate() {
            put(&mut out, r, format!("partial products of n^{}", e + 2));
            put(&mut out, s, format!("shifted multiplicands of n^{}", e + 2));
            put(&mut out, w, format!("carries of n^{}", e + 2));
        }
        for (i, p) in a.offsets.iter().enumerate() {
            put(&mut out, p, format!("start of section {i}"));
        }
        for (i, w) in a.offset_carries.iter().enumerate() {
            put(&mut out, w, format!("carries of section start {}", i + 1));
        }
        if let Some(c) = &a.constants {
            for (i, v) in c.multiples.iter().enumerate() {
                put(&mut out, v, format!("number {}*logn", i + 1));
            }
            for (i, w) in c.multiple_carries.iter().enumerate() {
                put(&mut out, w, format!("carries of {}*logn", i + 2));
            }
            put(&mut out, &c.end, "end of the encoding".into());
            put(&mut out, &c.end_carry, "carries of the end".into());
            put(&mut out, &c.last_bit, "number logn-1".into());
        }
        put(&mut out, &a.top, "most significant position of the encoding length".into());
        let r = &self.run;
        for (q, s) in r.states.iter().enumerate() {
            put(&mut out, s, format!("state {q} at time t"));
        }
        for (s, v) in READ_SYMBOLS.iter().zip(&r.reads) {
            put(&mut out, v, format!("input symbol {s} read at time t"));
        }
        put(&mut out, &r.choice, "choice bit at time t".into());
        for (j, cells) in r.cells.iter().enumerate() {
            for (s, v) in CELL_SYMBOLS.iter().zip(cells) {
                put(&mut out, v, format!("tape {j} holds {s} at time t, cell p"));
            }
            put(&mut out, &r.heads[j], format!("head of tape {j} at time t, cell p"));
        }
        put(&mut out, &r.address, "address number at time t".into());
        put(&mut out, &r.address_head, "address head position at time t".into());
        put(&mut out, &r.left_sentinel, "address head left of the tape at time t".into());
        put(&mut out, &r.right_sentinel, "address head right of the tape at time t".into());
        for s in &self.sections {
            put(&mut out, &s.offset, format!("offset into {} at time t", s.relation));
            put(&mut out, &s.carry, format!("carries of the {} offset", s.relation));
            for (j, d) in s.digits.iter().enumerate() {
                for (i, f) in d.divs.iter().enumerate() {
                    div_entries(&mut out, f, &format!("{} component {} division {}", s.relation, j + 1, i + 1));
                }
            }
        }
        if let Some(c) = &self.const_section {
            put(&mut out, &c.offset, "offset into the constants at time t".into());
            put(&mut out, &c.carry, "carries of the constant offset".into());
            div_entries(&mut out, &c.div, "constant index");
            put(&mut out, &c.bit_index, "bit index inside the constant".into());
            put(&mut out, &c.bit_carry, "carries of the bit index".into());
        }
        out
    }

    /// All second-order variables, in quantifier order.
    pub fn variables(&self) -> Vec<SoVar> {
        self.manifest().into_iter().map(|e| e.var).collect()
    }
}

fn put(out: &mut Vec<PlanEntry>, var: &SoVar, role: String) {
    out.push(PlanEntry { var: var.clone(), role });
}

fn div_entries(out: &mut Vec<PlanEntry>, d: &DivFamily, what: &str) {
    put(out, &d.quotient, format!("{what}: quotient"));
    put(out, &d.remainder, format!("{what}: remainder"));
    put(out, &d.product, format!("{what}: quotient times divisor"));
    put(out, &d.partial, format!("{what}: partial products"));
    put(out, &d.shifted, format!("{what}: shifted multiplicands"));
    put(out, &d.mult_carry, format!("{what}: multiplication carries"));
    put(out, &d.carry, format!("{what}: addition carries"));
}

/// Formula generator over a plan; owns the supply of first-order names.
struct Gen<'a> {
    p: &'a CompilationPlan,
    m: &'a MachineSpec,
    ctx: MacroContext,
}

impl<'a> Gen<'a> {
    fn new(p: &'a CompilationPlan, m: &'a MachineSpec) -> Self {
        Gen { p, m, ctx: p.ctx.clone() }
    }

    fn vars(&mut self, base: &str, len: usize) -> (Vec<String>, Vec<Term>) {
        let names = self.ctx.tuple(base, len);
        let ts = terms(&names);
        (names, ts)
    }

    fn times(&mut self, base: &str) -> (Vec<String>, Vec<Term>) {
        self.vars(base, self.p.k)
    }

    fn addrs(&mut self, base: &str) -> (Vec<String>, Vec<Term>) {
        self.vars(base, self.p.k_addr)
    }

    fn whole(v: &SoVar) -> Num {
        Num::whole(v)
    }

    fn at_time(v: &SoVar, t: &[Term]) -> Num {
        Num::slice(v, t)
    }

    fn address(&self, t: &[Term]) -> Num {
        Num::slice(&self.p.run.address, t)
    }

    fn cell(&self, tape: usize, sym: char, t: &[Term], p: &[Term]) -> Formula {
        self.p.run.cells[tape][symbol_index(&CELL_SYMBOLS, sym)].at(cat(&[t, p]))
    }

    fn read(&self, sym: char, t: &[Term]) -> Formula {
        self.p.run.reads[symbol_index(&READ_SYMBOLS, sym)].at(t.to_vec())
    }

    fn head_at(&self, t: &[Term], d: &[Term]) -> Formula {
        self.p.run.address_head.at(cat(&[t, d]))
    }

    fn left(&self, t: &[Term]) -> Formula {
        self.p.run.left_sentinel.at(t.to_vec())
    }

    fn right(&self, t: &[Term]) -> Formula {
        self.p.run.right_sentinel.at(t.to_vec())
    }

    /// No position of `x` carries both bits. Per-time numbers need this
    /// explicitly: their size bound covers all time stamps at once.
    fn single(&mut self, x: &Num, i: &SoVar) -> Formula {
        let (xn, xt) = self.vars("x", i.arity);
        forall_in(xn, i, or(vec![not(x.bit(&xt, Term::zero())), not(x.bit(&xt, Term::one()))]))
    }

    /// `d̄` is at most the top position of the address tape.
    fn below_top(&mut self, d: &[Term]) -> Formula {
        let (en, et) = self.addrs("e");
        exists_all(en, and(vec![self.p.arith.top.at(et.clone()), leq_tuple(d, &et)]))
    }

    fn sentence(&mut self) -> Formula {
        let main = and(vec![
            self.arithmetic(),
            self.initial(),
            self.shape(),
            self.reads(),
            self.transitions(),
            self.acceptance(),
        ]);
        let pair = eq(Term::one(), Term::max());
        let table = or(self.p.accepted_pairs.iter().map(diagram).collect());
        so_exists_all(&self.p.variables(), or(vec![and(vec![pair.clone(), table]), and(vec![not(pair), main])]))
    }

    fn arithmetic(&mut self) -> Formula {
        let p = self.p;
        let a = &p.arith;
        let ia = &p.addr_index;
        let mut parts = vec![self.ctx.def(&p.index), self.ctx.def(ia)];
        parts.push(self.ctx.bnum_with(&Self::whole(&a.one), &Term::one(), ia));
        parts.push(self.ctx.bnum_with(&Self::whole(&a.max), &Term::max(), ia));
        parts.push(self.ctx.bsum_with(
            &Self::whole(&a.max),
            &Self::whole(&a.one),
            &Self::whole(&a.powers[0]),
            &Self::whole(&a.power_carry),
            ia,
        ));
        for (e, (r, s, w)) in a.power_mults.iter().enumerate() {
            let j = p.pair_index.as_ref().expect("products need the pair index");
            parts.push(self.ctx.bmult_with(
                &Self::whole(&a.powers[0]),
                &Self::whole(&a.powers[e]),
                &Self::whole(&a.powers[e + 1]),
                ia,
                j,
                &Self::whole(r),
                &Self::whole(s),
                &Self::whole(w),
            ));
        }
        parts.push(self.ctx.bnum_with(&Self::whole(&a.offsets[0]), &Term::zero(), ia));
        for (i, sec) in p.sections.iter().enumerate() {
            parts.push(self.ctx.bsum_with(
                &Self::whole(&a.offsets[i]),
                &Self::whole(&a.powers[sec.arity - 1]),
                &Self::whole(&a.offsets[i + 1]),
                &Self::whole(&a.offset_carries[i]),
                ia,
            ));
        }
        if let Some(c) = &a.constants {
            let n1 = Self::whole(&c.multiples[0]);
            parts.push(self.ctx.bnum_with(&n1, &Term::logn(), ia));
            for (i, w) in c.multiple_carries.iter().enumerate() {
                parts.push(self.ctx.bsum_with(
                    &Self::whole(&c.multiples[i]),
                    &n1,
                    &Self::whole(&c.multiples[i + 1]),
                    &Self::whole(w),
                    ia,
                ));
            }
            parts.push(self.ctx.bsum_with(
                &Self::whole(a.offsets.last().expect("P_0")),
                &Self::whole(c.multiples.last().expect("one constant")),
                &Self::whole(&c.end),
                &Self::whole(&c.end_carry),
                ia,
            ));
            let e = self.ctx.fresh("e");
            let last = self.ctx.bnum_with(&Self::whole(&c.last_bit), &Term::var(&e), ia);
            parts.push(exists(e.clone(), and(vec![succ(&e, Term::logn()), last])));
        }
        // Top marks the most significant set bit of the encoding length
        let end = Self::whole(p.end());
        let (en, et) = self.addrs("e");
        let (un, ut) = self.addrs("u");
        let highest = and(vec![
            ia.at(et.clone()),
            end.bit(&et, Term::one()),
            forall_in(un, ia, or(vec![leq_tuple(&ut, &et), end.bit(&ut, Term::zero())])),
        ]);
        let (fnames, ft) = self.addrs("e");
        parts.push(exists_all(fnames, a.top.at(ft)));
        parts.push(forall_in(en, &a.top, highest));
        and(parts)
    }

    fn initial(&mut self) -> Formula {
        let p = self.p;
        let zt = vec![Term::zero(); p.k];
        let mut parts = Vec::new();
        for j in 0..self.m.tapes {
            let (pn, pt) = self.times("p");
            parts.push(forall_in(pn, &p.index, self.cell(j, BLANK, &zt, &pt)));
            parts.push(p.run.heads[j].at(cat(&[&zt, &zt])));
        }
        parts.push(p.run.states[self.m.start].at(zt.clone()));
        let (dn, dt) = self.addrs("d");
        parts.push(forall_in(dn, &p.addr_index, self.address(&zt).bit(&dt, Term::zero())));
        let (en, et) = self.addrs("e");
        parts.push(exists_all(en, and(vec![p.arith.top.at(et.clone()), self.head_at(&zt, &et)])));
        parts.push(not(self.left(&zt)));
        parts.push(not(self.right(&zt)));
        and(parts)
    }

    /// Exactly one state, read symbol and cell symbol; heads exist; the
    /// address is a number and its head sits on the tape or a sentinel.
    fn shape(&mut self) -> Formula {
        let p = self.p;
        let (tn, tt) = self.times("t");
        let mut parts = vec![
            exactly_one(p.run.states.iter().map(|s| s.at(tt.clone())).collect()),
            exactly_one(p.run.reads.iter().map(|s| s.at(tt.clone())).collect()),
            self.ctx.bin_with(&self.address(&tt), &p.addr_index),
        ];
        for j in 0..self.m.tapes {
            let (pn, pt) = self.times("p");
            let symbols = CELL_SYMBOLS.iter().map(|&s| self.cell(j, s, &tt, &pt)).collect();
            parts.push(forall_in(pn, &p.index, exactly_one(symbols)));
            let (hn, ht) = self.times("p");
            parts.push(exists_all(hn, and(vec![p.index.at(ht.clone()), p.run.heads[j].at(cat(&[&tt, &ht]))])));
        }
        let ia = &p.addr_index;
        let nowhere = [0, 1].map(|_| {
            let (dn, dt) = self.addrs("d");
            forall_in(dn, ia, not(self.head_at(&tt, &dt)))
        });
        let [nowhere_l, nowhere_r] = nowhere;
        let off_left = and(vec![self.left(&tt), not(self.right(&tt)), nowhere_l]);
        let off_right = and(vec![self.right(&tt), not(self.left(&tt)), nowhere_r]);
        let (dn, dt) = self.addrs("d");
        let below = self.below_top(&dt);
        let on_tape = exists_all(dn, and(vec![ia.at(dt.clone()), self.head_at(&tt, &dt), below]));
        let (an, at) = self.addrs("d");
        let (bn, bt) = self.addrs("d");
        let unique = forall_in(
            an,
            ia,
            forall_in(
                bn,
                ia,
                or(vec![not(self.head_at(&tt, &at)), not(self.head_at(&tt, &bt)), tuple_eq(&at, &bt)]),
            ),
        );
        let inside = and(vec![not(self.left(&tt)), not(self.right(&tt)), on_tape, unique]);
        parts.push(or(vec![off_left, off_right, inside]));
        forall_in(tn, &p.index, and(parts))
    }

    /// The read predicates agree with the input cell the address points to.
    fn reads(&mut self) -> Formula {
        let p = self.p;
        let ia = &p.addr_index;
        let (tn, tt) = self.times("t");
        let c = self.address(&tt);
        let end = Self::whole(p.end());
        let mut sections = vec![and(vec![self.ctx.le_with(&end, &c, ia), self.read(ENDMARK, &tt)])];
        for (i, sec) in p.sections.iter().enumerate() {
            let lo = Self::whole(&p.arith.offsets[i]);
            let hi = Self::whole(&p.arith.offsets[i + 1]);
            let d = Self::at_time(&sec.offset, &tt);
            let mut parts = vec![
                self.ctx.le_with(&lo, &c, ia),
                self.ctx.lt_with(&c, &hi, ia),
                self.ctx.bsum_with(&lo, &d, &c, &Self::at_time(&sec.carry, &tt), ia),
                self.single(&d, ia),
                self.single(&Self::at_time(&sec.carry, &tt), ia),
            ];
            let (xn, xt) = self.vars("x", sec.arity);
            let mut decoded = Vec::new();
            for (digit, x) in sec.digits.iter().zip(&xt) {
                let mut dividend = d.clone();
                for f in &digit.divs {
                    parts.push(self.division(&dividend, f, &tt));
                    dividend = Self::at_time(&f.quotient, &tt);
                }
                let value = match (digit.pick, digit.divs.last()) {
                    (Pick::Offset, _) => d.clone(),
                    (Pick::Quotient, Some(f)) => Self::at_time(&f.quotient, &tt),
                    (Pick::Remainder, Some(f)) => Self::at_time(&f.remainder, &tt),
                    _ => unreachable!("digits pick from their last division"),
                };
                decoded.push(self.ctx.bnum_with(&value, x, ia));
            }
            let atom = rel(&sec.relation, xt.clone());
            decoded.push(or(vec![
                and(vec![self.read('1', &tt), atom.clone()]),
                and(vec![self.read('0', &tt), not(atom)]),
            ]));
            parts.push(exists_all(xn, and(decoded)));
            sections.push(and(parts));
        }
        if let Some(cs) = &p.const_section {
            let ca = p.arith.constants.as_ref().expect("constant arithmetic");
            let lo = Self::whole(p.arith.offsets.last().expect("P_0"));
            let d = Self::at_time(&cs.offset, &tt);
            let rem = Self::at_time(&cs.div.remainder, &tt);
            let idx = Self::at_time(&cs.bit_index, &tt);
            let quot = Self::at_time(&cs.div.quotient, &tt);
            let mut parts = vec![
                self.ctx.le_with(&lo, &c, ia),
                self.ctx.lt_with(&c, &end, ia),
                self.ctx.bsum_with(&lo, &d, &c, &Self::at_time(&cs.carry, &tt), ia),
                self.division(&d, &cs.div, &tt),
                self.ctx.bsum_with(&rem, &idx, &Self::whole(&ca.last_bit), &Self::at_time(&cs.bit_carry, &tt), ia),
            ];
            for v in [&cs.offset, &cs.carry, &cs.bit_index, &cs.bit_carry] {
                parts.push(self.single(&Self::at_time(v, &tt), ia));
            }
            let y = self.ctx.fresh("y");
            let mut choices = Vec::new();
            for (j, name) in cs.constants.iter().enumerate() {
                let value = Term::constant(name);
                let read = or(vec![
                    and(vec![self.read('1', &tt), bit(&value, &y)]),
                    and(vec![self.read('0', &tt), not(bit(&value, &y))]),
                ]);
                choices.push(self.element(j, |g, z| and(vec![g.ctx.bnum_with(&quot, &z, ia), read])));
            }
            let located = self.ctx.bnum_with(&idx, &Term::var(&y), ia);
            parts.push(exists(y, and(vec![located, or(choices)])));
            sections.push(and(parts));
        }
        forall_in(tn, &p.index, or(sections))
    }

    /// `body(z)` for the element `z = j`, reached through successors.
    fn element(&mut self, j: usize, body: impl FnOnce(&mut Self, Term) -> Formula) -> Formula {
        match j {
            0 => body(self, Term::zero()),
            1 => body(self, Term::one()),
            _ => {
                let names: Vec<String> = (2..=j).map(|_| self.ctx.fresh("z")).collect();
                let mut chain = vec![succ(Term::one(), &names[0])];
                chain.extend(names.windows(2).map(|w| succ(&w[0], &w[1])));
                let last = Term::var(names.last().expect("j >= 2"));
                chain.push(body(self, last));
                exists_all(names, and(chain))
            }
        }
    }

    fn division(&mut self, x: &Num, f: &DivFamily, t: &[Term]) -> Formula {
        let p = self.p;
        let y = match f.divisor {
            Divisor::Power(e) => Self::whole(&p.arith.powers[e - 1]),
            Divisor::LogN => Self::whole(&p.arith.constants.as_ref().expect("constants").multiples[0]),
        };
        let j = p.pair_index.as_ref().expect("divisions need the pair index");
        let mut parts: Vec<Formula> = [&f.quotient, &f.remainder, &f.product, &f.carry]
            .into_iter()
            .map(|v| self.single(&Self::at_time(v, t), &p.addr_index))
            .collect();
        for v in [&f.partial, &f.shifted, &f.mult_carry] {
            parts.push(self.single(&Self::at_time(v, t), j));
        }
        parts.push(self.ctx.bdiv_with(
            x,
            &y,
            &Self::at_time(&f.quotient, t),
            &Self::at_time(&f.remainder, t),
            &p.addr_index,
            &Self::at_time(&f.product, t),
            (j, &Self::at_time(&f.partial, t), &Self::at_time(&f.shifted, t), &Self::at_time(&f.mult_carry, t)),
            &Self::at_time(&f.carry, t),
        ));
        and(parts)
    }

    fn transitions(&mut self) -> Formula {
        let p = self.p;
        let (tn, tt) = self.times("t");
        let (un, ut) = self.times("u");
        let mut steps: Vec<Formula> = (0..self.m.states.len())
            .filter(|&q| self.m.states[q].mode.is_final())
            .map(|q| and(vec![p.run.states[q].at(tt.clone()), p.run.states[q].at(ut.clone())]))
            .collect();
        for r in 0..self.m.rules.len() {
            steps.push(self.fire(r, &tt, &ut));
        }
        let next = exists_all(un, and(vec![succ_tuple(&tt, &ut), or(steps)]));
        forall_in(tn, &p.index, or(vec![max_tuple(&tt), next]))
    }

    /// Rule `ri` applies at time `t` and time `u` is its outcome.
    fn fire(&mut self, ri: usize, t: &[Term], u: &[Term]) -> Formula {
        let p = self.p;
        let r = &self.m.rules[ri];
        let run = &p.run;
        let mut parts = vec![run.states[r.from].at(t.to_vec()), run.states[r.to].at(u.to_vec())];
        if let Some(s) = r.read {
            parts.push(self.read(s, t));
        }
        match r.addr {
            Some(BLANK) => parts.push(or(vec![self.left(t), self.right(t)])),
            Some(b) => {
                let (dn, dt) = self.addrs("d");
                let here = and(vec![
                    p.addr_index.at(dt.clone()),
                    self.head_at(t, &dt),
                    self.address(t).bit(&dt, Term::bit(b == '1')),
                ]);
                parts.push(exists_all(dn, here));
            }
            None => {}
        }
        for (j, sym) in r.work.iter().enumerate() {
            if let Some(s) = *sym {
                let (pn, pt) = self.times("p");
                parts.push(exists_all(pn, and(vec![run.heads[j].at(cat(&[t, &pt])), self.cell(j, s, t, &pt)])));
            }
        }
        if let Some(other) = p.partners[ri] {
            let g = run.choice.at(t.to_vec());
            parts.push(if other < ri { g } else { not(g) });
        }
        for j in 0..self.m.tapes {
            parts.push(self.tape_update(j, r.writes[j], r.moves[j], t, u));
        }
        parts.push(self.address_update(r.addr_write, r.addr_move, t, u));
        and(parts)
    }

    fn copy_cell(&self, j: usize, t: &[Term], u: &[Term], p: &[Term]) -> Formula {
        or(CELL_SYMBOLS.iter().map(|&s| and(vec![self.cell(j, s, t, p), self.cell(j, s, u, p)])).collect())
    }

    fn tape_update(&mut self, j: usize, write: Option<char>, mv: Move, t: &[Term], u: &[Term]) -> Formula {
        let p = self.p;
        let head = &p.run.heads[j];
        let (pn, pt) = self.times("p");
        let written = match write {
            Some(w) => self.cell(j, w, u, &pt),
            None => self.copy_cell(j, t, u, &pt),
        };
        let (on, ot) = self.times("o");
        let frame = forall_in(on, &p.index, or(vec![tuple_eq(&ot, &pt), self.copy_cell(j, t, u, &ot)]));
        let (qn, qt) = self.times("q");
        let moved = match mv {
            Move::S => head.at(cat(&[u, &pt])),
            Move::R => exists_all(qn, and(vec![succ_tuple(&pt, &qt), head.at(cat(&[u, &qt]))])),
            Move::L => or(vec![
                and(vec![zero_tuple(&pt), head.at(cat(&[u, &pt]))]),
                exists_all(qn, and(vec![succ_tuple(&qt, &pt), head.at(cat(&[u, &qt]))])),
            ]),
        };
        exists_all(pn, and(vec![head.at(cat(&[t, &pt])), written, frame, moved]))
    }

    fn copy_bit(&self, t: &[Term], u: &[Term], d: &[Term]) -> Formula {
        let (ct, cu) = (self.address(t), self.address(u));
        or([false, true].map(|b| and(vec![ct.bit(d, Term::bit(b)), cu.bit(d, Term::bit(b))])).to_vec())
    }

    fn address_update(&mut self, write: Option<char>, mv: Move, t: &[Term], u: &[Term]) -> Formula {
        let p = self.p;
        let ia = &p.addr_index;
        let top = &p.arith.top;
        let [left_copy, right_copy] = [0, 1].map(|_| {
            let (dn, dt) = self.addrs("d");
            forall_in(dn, ia, self.copy_bit(t, u, &dt))
        });
        let from_left = match mv {
            Move::R => {
                let (en, et) = self.addrs("e");
                exists_all(en, and(vec![top.at(et.clone()), self.head_at(u, &et)]))
            }
            _ => self.left(u),
        };
        let from_right = match mv {
            Move::L => self.head_at(u, &vec![Term::zero(); p.k_addr]),
            _ => self.right(u),
        };
        let (dn, dt) = self.addrs("d");
        let (on, ot) = self.addrs("o");
        let frame = forall_in(on, ia, or(vec![tuple_eq(&ot, &dt), self.copy_bit(t, u, &ot)]));
        let written = match write {
            Some(b) => self.address(u).bit(&dt, Term::bit(b == '1')),
            None => self.copy_bit(t, u, &dt),
        };
        let (en, et) = self.addrs("e");
        let moved = match mv {
            Move::S => self.head_at(u, &dt),
            Move::R => or(vec![
                and(vec![zero_tuple(&dt), self.right(u)]),
                exists_all(en, and(vec![succ_tuple(&et, &dt), self.head_at(u, &et)])),
            ]),
            Move::L => or(vec![
                and(vec![top.at(dt.clone()), self.left(u)]),
                and(vec![
                    not(top.at(dt.clone())),
                    exists_all(en, and(vec![succ_tuple(&dt, &et), self.head_at(u, &et)])),
                ]),
            ]),
        };
        let on_tape = exists_all(dn, and(vec![ia.at(dt.clone()), self.head_at(t, &dt), frame, written, moved]));
        or(vec![
            and(vec![self.left(t), left_copy, from_left]),
            and(vec![self.right(t), right_copy, from_right]),
            on_tape,
        ])
    }

    fn acceptance(&mut self) -> Formula {
        let (fnames, ft) = self.times("t");
        let accepting = (0..self.m.states.len())
            .filter(|&q| self.m.states[q].mode == Mode::Accept)
            .map(|q| self.p.run.states[q].at(ft.clone()))
            .collect();
        exists_all(fnames, and(vec![max_tuple(&ft), or(accepting)]))
    }
}

/// Atomic diagram of a two-element structure, naming its elements `0` and
/// `1`.
fn diagram(s: &Structure) -> Formula {
    let element = |v: usize| if v == 0 { Term::zero() } else { Term::one() };
    let mut facts = Vec::new();
    for r in s.vocabulary().input_relations() {
        for t in all_tuples(2, r.arity) {
            let atom = rel(&r.name, t.iter().map(|&v| element(v)).collect::<Vec<_>>());
            facts.push(if s.holds(&r.name, &t) == Some(true) { atom } else { not(atom) });
        }
    }
    for c in s.vocabulary().input_constants() {
        let v = s.constant(&c.name).expect("constant is interpreted");
        facts.push(eq(Term::constant(&c.name), element(v)));
    }
    and(facts)
}

/// The sentence holding in exactly the structures whose encoding `m`
/// accepts within [`time_budget`] steps.
pub fn compile_machine(m: &MachineSpec, k: usize, k_addr: usize, vocab: &Vocabulary) -> Result<Formula, CompileError> {
    let plan = CompilationPlan::new(m, k, k_addr, vocab)?;
    Ok(compile_with_plan(m, &plan))
}

/// The sentence for a plan built from `m`.
pub fn compile_with_plan(m: &MachineSpec, plan: &CompilationPlan) -> Formula {
    Gen::new(plan, m).sentence()
}

/// The step relation alone, with every plan predicate free: each time
/// stamp before the last is followed by the outcome of an applicable rule,
/// or repeats a final state.
pub fn transition_axioms(m: &MachineSpec, plan: &CompilationPlan) -> Result<Formula, CompileError> {
    if m.rules.len() != plan.rule_count || m.states.len() != plan.state_count {
        return Err(CompileError::PlanMismatch);
    }
    check_machine(m)?;
    Ok(Gen::new(plan, m).transitions())
}

/// Whether size-`n` structures fit the address and number ranges of the
/// plan; the reason otherwise.
pub fn capacity(plan: &CompilationPlan, n: usize) -> Result<(), String> {
    if n <= 2 {
        return Ok(());
    }
    let nhat = plan.vocab.encoding_length(n);
    let bits = size_bound(n, plan.k_addr);
    if bits < 128 && nhat as u128 >= 1u128 << bits {
        return Err(format!("encoding length {nhat} needs more than {bits} address bits"));
    }
    let q = plan.vocab.input_constants().count();
    if q > n {
        return Err(format!("{q} constants exceed the domain size {n}"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{check_witness, eval, EvalConfig, Valuation};
    use crate::formula::{classify, to_snf, FragmentLabel};
    use crate::macros::decode_number;
    use crate::ratm::parse_machine;

    fn unary() -> Vocabulary {
        Vocabulary::new().with_relation("R", 1).unwrap()
    }

    fn toy(name: &str) -> MachineSpec {
        toy_corpus().into_iter().find(|t| t.name == name).unwrap().machine()
    }

    fn structure(bits: &str) -> Structure {
        let b: BitString = bits.parse().unwrap();
        decode_bin(&unary(), bits.len(), &b).unwrap()
    }

    #[test]
    fn sentences_are_sigma1() {
        for t in toy_corpus() {
            for (k, ka) in [(1, 1), (2, 1), (2, 2)] {
                let psi = compile_machine(&t.machine(), k, ka, &unary()).unwrap();
                assert_eq!(classify(&to_snf(&psi)), FragmentLabel::Sigma(1), "{}", t.name);
            }
        }
        let v = Vocabulary::new().with_relation("E", 2).unwrap().with_constant("c").unwrap();
        let psi = compile_machine(&toy("either_bit"), 2, 2, &v).unwrap();
        assert_eq!(classify(&to_snf(&psi)), FragmentLabel::Sigma(1));
    }

    #[test]
    fn rejects_unsuitable_machines() {
        let universal = parse_machine("format v1\ntapes 0\nstate u forall\nstate y accept\nstart u\nrule u -> y\n").unwrap();
        assert!(matches!(compile_machine(&universal, 1, 1, &unary()), Err(CompileError::MachineNotNormalized(_))));
        let wide = parse_machine(
            "format v1\ntapes 0\nstate q exists\nstate y accept\nstart q\nrule q -> y\nrule q -> y\nrule q -> y\n",
        )
        .unwrap();
        assert!(matches!(compile_machine(&wide, 1, 1, &unary()), Err(CompileError::MachineNotNormalized(_))));
        let t1 = toy("first_bit");
        assert!(matches!(compile_machine(&t1, 0, 1, &unary()), Err(CompileError::ExponentTooSmall(_))));
        assert_eq!(compile_machine(&t1, 1, 1, &Vocabulary::new()), Err(CompileError::EmptyVocabulary));
        let hash = parse_machine("format v1\ntapes 1\nstate q exists\nstate y accept\nstart q\nrule q -> y write_0=#\n")
            .unwrap();
        assert_eq!(
            compile_machine(&hash, 1, 1, &unary()),
            Err(CompileError::UnsupportedSymbol { sym: '#', place: "work tape" })
        );
    }

    #[test]
    fn first_bit_at_two_elements() {
        let m = toy("first_bit");
        let psi = compile_machine(&m, 1, 1, &unary()).unwrap();
        for s in all_structures(&unary(), 2) {
            let expected = s.holds("R", &[0]) == Some(true);
            assert_eq!(eval(&s, &Valuation::new(), &psi, &EvalConfig::default()).unwrap(), expected);
        }
    }

    #[test]
    fn witnesses_pass_and_decode() {
        let m = toy("either_bit");
        let plan = CompilationPlan::new(&m, 2, 1, &unary()).unwrap();
        let psi = compile_with_plan(&m, &plan);
        let s = structure("001");
        let w = witness_for(&m, &plan, &s).unwrap();
        assert!(check_witness(&s, &psi, &w, &EvalConfig::default()).unwrap());
        let num = |v: &SoVar| decode_number(&w.second_order[&v.name], 3, 1).unwrap();
        assert_eq!(num(&plan.arith.powers[0]), 3);
        assert_eq!(num(&plan.arith.offsets[1]), 3);
        assert_eq!(num(plan.end()), 3);
        // the guess sets the leading address bit: address 2 from time 1 on
        let at = |t: usize| -> TupleSetAt {
            let tt = crate::macros::position_tuple(3, 2, t);
            w.second_order[&plan.run.address.name].iter().filter(|x| x[..2] == tt[..]).cloned().collect()
        };
        assert_eq!(decode_number(&strip(&at(0), 2), 3, 1).unwrap(), 0);
        assert_eq!(decode_number(&strip(&at(1), 2), 3, 1).unwrap(), 2);
        assert!(matches!(witness_for(&m, &plan, &structure("000")), Err(WitnessError::TraceNotAccepting(3))));
    }

    type TupleSetAt = crate::structure::TupleSet;

    fn strip(rel: &TupleSetAt, prefix: usize) -> TupleSetAt {
        rel.iter().map(|t| t[prefix..].to_vec()).collect()
    }

    #[test]
    fn corrupted_witnesses_fail() {
        let m = toy("copy_back");
        let plan = CompilationPlan::new(&m, 2, 1, &unary()).unwrap();
        let psi = compile_with_plan(&m, &plan);
        let s = structure("100");
        let w = witness_for(&m, &plan, &s).unwrap();
        let cfg = EvalConfig::default();
        assert!(check_witness(&s, &psi, &w, &cfg).unwrap());
        // head of tape 0 one cell further right at time 2
        let mut bad = w.clone();
        let heads = bad.second_order.get_mut(&plan.run.heads[0].name).unwrap();
        assert!(heads.remove(&vec![1, 0, 0, 0]));
        heads.insert(vec![1, 0, 0, 1]);
        assert!(!check_witness(&s, &psi, &bad, &cfg).unwrap());
        // the same corruption breaks the step relation alone
        let axioms = transition_axioms(&m, &plan).unwrap();
        assert!(eval(&s, &w, &axioms, &cfg).unwrap());
        assert!(!eval(&s, &bad, &axioms, &cfg).unwrap());
        // wrong symbol read at time 0
        let mut bad = w.clone();
        bad.second_order.get_mut(&plan.run.reads[1].name).unwrap().clear();
        bad.second_order.get_mut(&plan.run.reads[0].name).unwrap().insert(vec![0, 0]);
        assert!(!check_witness(&s, &psi, &bad, &cfg).unwrap());
    }

    #[test]
    fn capture_on_all_small_structures() {
        let cfg = EvalConfig::default();
        for t in toy_corpus() {
            let m = t.machine();
            let mut structures = all_structures(&unary(), 2);
            structures.extend(all_structures(&unary(), 3));
            let report = verify_capture(&m, 2, 1, &structures, 3, &cfg).unwrap();
            assert!(report.all_agree(), "{}:\n{report}", t.name);
            for (s, e) in structures.iter().zip(&report.entries) {
                assert_eq!(e.machine_accepts, (t.oracle)(encode_bin(s).bits()), "{}", t.name);
            }
        }
    }

    #[test]
    fn plan_mismatch_and_capacity() {
        let plan = CompilationPlan::new(&toy("first_bit"), 1, 1, &unary()).unwrap();
        assert_eq!(transition_axioms(&toy("copy_back"), &plan), Err(CompileError::PlanMismatch));
        assert!(capacity(&plan, 3).is_ok());
        assert!(capacity(&plan, 4).is_err());
        assert!(plan.manifest().iter().any(|e| e.var == plan.run.address && e.var.arity == 3));
    }
}
