//! A small register language compiled to raw machine states.
//!
//! Registers live on work tapes: cell 0 stays blank and the value occupies
//! cells `1..=ℓ`, most significant bit first, where `ℓ` is the address
//! length. Between instructions every head rests on cell 0.
//!
//! ```text
//! builder v1
//! alphabet 0 1 # + -
//! tapes 2
//! reg N 0
//! reg P 1
//!        findlen
//!        store N
//! loop:  inc P
//!        jlt P N loop
//!        accept
//! ```
//!
//! Statements are separated by newlines or `;`, comments start with `//`.
//!
//! | instruction | effect |
//! |---|---|
//! | `findlen` | address ← `n̂ − 1`, found by probing for the endmark |
//! | `zero R` | R ← 0 |
//! | `load R` / `store R` | address ← R / R ← address |
//! | `inc R`, `inc @` | increment a register or the address, modulo `2^ℓ` |
//! | `guess` | existentially choose every address bit |
//! | `readnum R fail=L` | read `ℓ` input bits from the address on into R, advancing the address |
//! | `litread R fail=L` | read a sign (`+` as 1, `-` as 0) and `ℓ` bits into R (`ℓ+1` cells) |
//! | `jread SYMS L` | jump if the addressed input symbol is one of SYMS |
//! | `jlt R S L`, `jeq R S L` | compare registers |
//! | `jconflict LIST R L` | jump if LIST holds R's bits with the opposite first bit |
//! | `append LIST R` | append R to LIST |
//! | `goto L`, `choose L1 L2 …`, `accept`, `reject` | control flow |
//!
//! Running off the end of the program rejects.

use std::collections::HashMap;

use thiserror::Error;

use super::machine::{MachineError, MachineSpec, Mode, Move, Rule, StateInfo, BLANK, ENDMARK};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuildError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unknown label '{0}'")]
    UnknownLabel(String),
    #[error("duplicate label '{0}'")]
    DuplicateLabel(String),
    #[error("tape {tape} out of range, program declares {tapes}")]
    TapeRange { tape: usize, tapes: usize },
    #[error(transparent)]
    Machine(#[from] MachineError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Target {
    Tape(usize),
    Address,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instr {
    FindLen,
    Zero(usize),
    Load(usize),
    Store(usize),
    Inc(Target),
    Guess,
    ReadNum { reg: usize, fail: String },
    LitRead { reg: usize, fail: String },
    JRead { syms: Vec<char>, target: String },
    JLt { a: usize, b: usize, target: String },
    JEq { a: usize, b: usize, target: String },
    JConflict { list: usize, cur: usize, target: String },
    Append { list: usize, cur: usize },
    Goto(String),
    Choose(Vec<String>),
    Accept,
    Reject,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub tapes: usize,
    /// Input symbols other than the endmark.
    pub alphabet: Vec<char>,
    pub instrs: Vec<Instr>,
    pub labels: HashMap<String, usize>,
}

impl Program {
    pub fn new(tapes: usize, alphabet: &[char]) -> Self {
        Program { tapes, alphabet: alphabet.to_vec(), instrs: Vec::new(), labels: HashMap::new() }
    }

    pub fn label(&mut self, name: &str) -> Result<&mut Self, BuildError> {
        if self.labels.insert(name.to_string(), self.instrs.len()).is_some() {
            return Err(BuildError::DuplicateLabel(name.into()));
        }
        Ok(self)
    }

    pub fn push(&mut self, i: Instr) -> &mut Self {
        self.instrs.push(i);
        self
    }

    pub fn compile(&self) -> Result<MachineSpec, BuildError> {
        Compiler::new(self).run()
    }
}

fn is_label(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_alphanumeric() || c == '_')
}

/// Parses the `.mb` text format.
pub fn parse_program(text: &str) -> Result<Program, BuildError> {
    let mut prog = Program::new(0, &['0', '1']);
    let mut regs: HashMap<String, usize> = HashMap::new();
    let mut header = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split("//").next().unwrap();
        for stmt in content.split(';') {
            let mut toks: Vec<&str> = stmt.split_whitespace().collect();
            let err = |msg: String| BuildError::Syntax { line, msg };
            while let Some(first) = toks.first() {
                match first.strip_suffix(':') {
                    Some(l) if is_label(l) => {
                        prog.label(l)?;
                        toks.remove(0);
                    }
                    _ => break,
                }
            }
            let Some((&op, args)) = toks.split_first() else { continue };
            if !header {
                if op == "builder" && args == ["v1"] {
                    header = true;
                    continue;
                }
                return Err(err("missing 'builder v1' header".into()));
            }
            let reg = |name: &str| regs.get(name).copied().ok_or_else(|| err(format!("unknown register '{name}'")));
            let want = |n: usize| {
                if args.len() == n {
                    Ok(())
                } else {
                    Err(err(format!("'{op}' takes {n} arguments")))
                }
            };
            let fail_arg = |a: &str| {
                a.strip_prefix("fail=")
                    .map(str::to_string)
                    .ok_or_else(|| err(format!("expected fail=LABEL, got '{a}'")))
            };
            let instr = match op {
                "tapes" => {
                    want(1)?;
                    prog.tapes = args[0].parse().map_err(|_| err("bad tape count".into()))?;
                    continue;
                }
                "alphabet" => {
                    let mut syms = Vec::new();
                    for a in args {
                        let mut cs = a.chars();
                        match (cs.next(), cs.next()) {
                            (Some(c), None) if c != ENDMARK && c != BLANK => syms.push(c),
                            _ => return Err(err(format!("bad alphabet symbol '{a}'"))),
                        }
                    }
                    prog.alphabet = syms;
                    continue;
                }
                "reg" | "list" => {
                    want(2)?;
                    let idx: usize = args[1].parse().map_err(|_| err("bad tape index".into()))?;
                    if idx >= prog.tapes {
                        return Err(BuildError::TapeRange { tape: idx, tapes: prog.tapes });
                    }
                    regs.insert(args[0].to_string(), idx);
                    continue;
                }
                "findlen" => {
                    want(0)?;
                    Instr::FindLen
                }
                "zero" | "load" | "store" => {
                    want(1)?;
                    let r = reg(args[0])?;
                    match op {
                        "zero" => Instr::Zero(r),
                        "load" => Instr::Load(r),
                        _ => Instr::Store(r),
                    }
                }
                "inc" => {
                    want(1)?;
                    Instr::Inc(if args[0] == "@" { Target::Address } else { Target::Tape(reg(args[0])?) })
                }
                "guess" => {
                    want(0)?;
                    Instr::Guess
                }
                "readnum" | "litread" => {
                    want(2)?;
                    let (r, fail) = (reg(args[0])?, fail_arg(args[1])?);
                    if op == "readnum" {
                        Instr::ReadNum { reg: r, fail }
                    } else {
                        Instr::LitRead { reg: r, fail }
                    }
                }
                "jread" => {
                    want(2)?;
                    Instr::JRead { syms: args[0].chars().collect(), target: args[1].into() }
                }
                "jlt" | "jeq" | "jconflict" => {
                    want(3)?;
                    let (a, b, target) = (reg(args[0])?, reg(args[1])?, args[2].to_string());
                    match op {
                        "jlt" => Instr::JLt { a, b, target },
                        "jeq" => Instr::JEq { a, b, target },
                        _ => Instr::JConflict { list: a, cur: b, target },
                    }
                }
                "append" => {
                    want(2)?;
                    Instr::Append { list: reg(args[0])?, cur: reg(args[1])? }
                }
                "goto" => {
                    want(1)?;
                    Instr::Goto(args[0].into())
                }
                "choose" => {
                    if args.is_empty() {
                        return Err(err("'choose' needs a label".into()));
                    }
                    Instr::Choose(args.iter().map(|s| s.to_string()).collect())
                }
                "accept" => {
                    want(0)?;
                    Instr::Accept
                }
                "reject" => {
                    want(0)?;
                    Instr::Reject
                }
                other => return Err(err(format!("unknown instruction '{other}'"))),
            };
            prog.push(instr);
        }
    }
    if !header {
        return Err(BuildError::Syntax { line: 1, msg: "missing 'builder v1' header".into() });
    }
    Ok(prog)
}

pub fn compile_program(text: &str) -> Result<MachineSpec, BuildError> {
    parse_program(text)?.compile()
}

const BITS: [char; 2] = ['0', '1'];

/// Trigger on one component: a set of symbols, or anything.
#[derive(Clone)]
enum Pat {
    Any,
    One(Vec<char>),
}

/// A rule under construction with symbol-set triggers, expanded into one
/// raw rule per symbol combination.
struct Edge {
    read: Pat,
    addr: Pat,
    work: Vec<(usize, Vec<char>)>,
    writes: Vec<(usize, char)>,
    moves: Vec<(usize, Move)>,
    addr_write: Option<char>,
    addr_move: Move,
}

impl Edge {
    fn new() -> Self {
        Edge {
            read: Pat::Any,
            addr: Pat::Any,
            work: Vec::new(),
            writes: Vec::new(),
            moves: Vec::new(),
            addr_write: None,
            addr_move: Move::S,
        }
    }
    fn read(mut self, syms: &[char]) -> Self {
        self.read = Pat::One(syms.to_vec());
        self
    }
    fn addr(mut self, syms: &[char]) -> Self {
        self.addr = Pat::One(syms.to_vec());
        self
    }
    fn on(mut self, t: usize, syms: &[char]) -> Self {
        self.work.push((t, syms.to_vec()));
        self
    }
    fn write(mut self, t: usize, c: char) -> Self {
        self.writes.push((t, c));
        self
    }
    fn mv(mut self, t: usize, m: Move) -> Self {
        self.moves.push((t, m));
        self
    }
    fn awrite(mut self, c: char) -> Self {
        self.addr_write = Some(c);
        self
    }
    fn amove(mut self, m: Move) -> Self {
        self.addr_move = m;
        self
    }
}

struct Compiler<'a> {
    prog: &'a Program,
    inputs: Vec<char>,
    states: Vec<StateInfo>,
    rules: Vec<Rule>,
    accept: usize,
    reject: usize,
    entries: Vec<usize>,
    fresh: usize,
}

impl<'a> Compiler<'a> {
    fn new(prog: &'a Program) -> Self {
        let mut inputs = prog.alphabet.clone();
        inputs.push(ENDMARK);
        let mut c = Compiler {
            prog,
            inputs,
            states: Vec::new(),
            rules: Vec::new(),
            accept: 0,
            reject: 0,
            entries: Vec::new(),
            fresh: 0,
        };
        c.accept = c.named("accept", Mode::Accept);
        c.reject = c.named("reject", Mode::Reject);
        c
    }

    fn named(&mut self, name: &str, mode: Mode) -> usize {
        self.states.push(StateInfo { name: name.into(), mode });
        self.states.len() - 1
    }

    fn state(&mut self) -> usize {
        self.fresh += 1;
        let name = format!("s{}", self.fresh);
        self.named(&name, Mode::Existential)
    }

    fn check_tape(&self, t: usize) -> Result<(), BuildError> {
        if t >= self.prog.tapes {
            return Err(BuildError::TapeRange { tape: t, tapes: self.prog.tapes });
        }
        Ok(())
    }

    fn target(&self, label: &str) -> Result<usize, BuildError> {
        let i = *self.prog.labels.get(label).ok_or_else(|| BuildError::UnknownLabel(label.into()))?;
        Ok(self.entry(i))
    }

    fn entry(&self, i: usize) -> usize {
        self.entries.get(i).copied().unwrap_or(self.reject)
    }

    fn others(&self, syms: &[char]) -> Vec<char> {
        self.inputs.iter().copied().filter(|c| !syms.contains(c)).collect()
    }

    fn edge(&mut self, from: usize, to: usize, e: Edge) {
        let tapes = self.prog.tapes;
        let reads: Vec<Option<char>> = match &e.read {
            Pat::Any => vec![None],
            Pat::One(v) => v.iter().map(|&c| Some(c)).collect(),
        };
        let addrs: Vec<Option<char>> = match &e.addr {
            Pat::Any => vec![None],
            Pat::One(v) => v.iter().map(|&c| Some(c)).collect(),
        };
        let mut combos: Vec<Vec<Option<char>>> = vec![vec![None; tapes]];
        for (t, syms) in &e.work {
            combos = combos
                .into_iter()
                .flat_map(|w| {
                    syms.iter().map(move |&c| {
                        let mut w = w.clone();
                        w[*t] = Some(c);
                        w
                    })
                })
                .collect();
        }
        for &read in &reads {
            for &addr in &addrs {
                for work in &combos {
                    let mut r = Rule::new(from, to, tapes);
                    r.read = read;
                    r.addr = addr;
                    r.work = work.clone();
                    for &(t, c) in &e.writes {
                        r.writes[t] = Some(c);
                    }
                    for &(t, m) in &e.moves {
                        r.moves[t] = m;
                    }
                    r.addr_write = e.addr_write;
                    r.addr_move = e.addr_move;
                    self.rules.push(r);
                }
            }
        }
    }

    /// One transition per symbol `b` in `syms`, with `b` substituted into
    /// the writes produced by `f`.
    fn per_symbol(&mut self, from: usize, to: usize, syms: &[char], f: impl Fn(char) -> Edge) {
        for &b in syms {
            self.edge(from, to, f(b));
        }
    }

    fn rewind_work(&mut self, t: usize, from: usize, to: usize) {
        let s = self.state();
        self.edge(from, s, Edge::new().mv(t, Move::L));
        self.edge(s, s, Edge::new().on(t, &BITS).mv(t, Move::L));
        self.edge(s, to, Edge::new().on(t, &[BLANK]));
    }

    fn rewind_tapes(&mut self, tapes: &[usize], from: usize, to: usize) {
        let mut cur = from;
        for (i, &t) in tapes.iter().enumerate() {
            let next = if i + 1 == tapes.len() { to } else { self.state() };
            self.rewind_work(t, cur, next);
            cur = next;
        }
        if tapes.is_empty() {
            self.edge(from, to, Edge::new());
        }
    }

    /// Address head from anywhere to cell 0.
    fn rewind_addr(&mut self, from: usize, to: usize) {
        let s = self.state();
        self.edge(from, s, Edge::new().amove(Move::L));
        self.edge(s, s, Edge::new().addr(&BITS).amove(Move::L));
        self.edge(s, to, Edge::new().addr(&[BLANK]).amove(Move::R));
    }

    fn inc_addr(&mut self, from: usize, to: usize) {
        let (carry, back) = (self.state(), self.state());
        self.edge(from, from, Edge::new().addr(&BITS).amove(Move::R));
        self.edge(from, carry, Edge::new().addr(&[BLANK]).amove(Move::L));
        self.edge(carry, carry, Edge::new().addr(&['1']).awrite('0').amove(Move::L));
        self.edge(carry, back, Edge::new().addr(&['0']).awrite('1').amove(Move::L));
        self.edge(carry, to, Edge::new().addr(&[BLANK]).amove(Move::R));
        self.edge(back, back, Edge::new().addr(&BITS).amove(Move::L));
        self.edge(back, to, Edge::new().addr(&[BLANK]).amove(Move::R));
    }

    fn inc_tape(&mut self, t: usize, from: usize, to: usize) {
        let (scan, carry, back) = (self.state(), self.state(), self.state());
        self.edge(from, scan, Edge::new().mv(t, Move::R));
        self.edge(scan, scan, Edge::new().on(t, &BITS).mv(t, Move::R));
        self.edge(scan, carry, Edge::new().on(t, &[BLANK]).mv(t, Move::L));
        self.edge(carry, carry, Edge::new().on(t, &['1']).write(t, '0').mv(t, Move::L));
        self.edge(carry, back, Edge::new().on(t, &['0']).write(t, '1').mv(t, Move::L));
        self.edge(carry, to, Edge::new().on(t, &[BLANK]));
        self.edge(back, back, Edge::new().on(t, &BITS).mv(t, Move::L));
        self.edge(back, to, Edge::new().on(t, &[BLANK]));
    }

    /// Fills cells `1..=ℓ` of `t` with zeros, after skipping `skip` cells.
    fn zero_tape(&mut self, t: usize, skip: usize, from: usize, to: usize) {
        let fill = self.state();
        let mut cur = self.state();
        self.edge(from, cur, Edge::new().mv(t, Move::R));
        for _ in 0..skip {
            let next = self.state();
            self.edge(cur, next, Edge::new().write(t, '0').mv(t, Move::R));
            cur = next;
        }
        self.edge(cur, fill, Edge::new());
        self.edge(fill, fill, Edge::new().addr(&BITS).write(t, '0').mv(t, Move::R).amove(Move::R));
        let back = self.state();
        self.edge(fill, back, Edge::new().addr(&[BLANK]));
        let mid = self.state();
        self.rewind_work(t, back, mid);
        self.rewind_addr(mid, to);
    }

    /// Reads `ℓ` input bits into the cells of `t` from the head onwards,
    /// incrementing the address after each.
    fn read_bits(&mut self, t: usize, from: usize, to: usize, fail: usize) {
        let cell = self.state();
        self.edge(from, cell, Edge::new().mv(t, Move::R));
        let done = self.state();
        self.edge(cell, done, Edge::new().on(t, &[BLANK]));
        self.rewind_work(t, done, to);
        let inc = self.state();
        self.per_symbol(cell, inc, &BITS, |b| Edge::new().on(t, &BITS).read(&[b]).write(t, b));
        self.inc_addr(inc, from);
        let bad = self.state();
        let others = self.others(&BITS);
        self.edge(cell, bad, Edge::new().on(t, &BITS).read(&others));
        self.rewind_work(t, bad, fail);
    }

    fn compare(&mut self, a: usize, b: usize, from: usize, on_lt: usize, on_eq: usize, on_gt: usize) {
        let c = self.state();
        self.edge(from, c, Edge::new().mv(a, Move::R).mv(b, Move::R));
        for x in BITS {
            self.edge(c, c, Edge::new().on(a, &[x]).on(b, &[x]).mv(a, Move::R).mv(b, Move::R));
        }
        let outcomes = [(('0', '1'), on_lt), (('1', '0'), on_gt)];
        for ((x, y), dest) in outcomes {
            let s = self.state();
            self.edge(c, s, Edge::new().on(a, &[x]).on(b, &[y]));
            self.rewind_tapes(&[a, b], s, dest);
        }
        let s = self.state();
        self.edge(c, s, Edge::new().on(a, &[BLANK]));
        self.edge(c, s, Edge::new().on(a, &BITS).on(b, &[BLANK]));
        self.rewind_tapes(&[a, b], s, on_eq);
    }

    fn instr(&mut self, i: usize) -> Result<(), BuildError> {
        let entry = self.entries[i];
        let exit = self.entry(i + 1);
        match &self.prog.instrs[i] {
            Instr::FindLen => {
                let (probe, test, done) = (self.state(), self.state(), self.state());
                self.edge(entry, entry, Edge::new().addr(&BITS).awrite('0').amove(Move::R));
                let z = self.state();
                self.edge(entry, z, Edge::new().addr(&[BLANK]));
                self.rewind_addr(z, probe);
                self.edge(probe, test, Edge::new().addr(&BITS).awrite('1'));
                self.edge(probe, done, Edge::new().addr(&[BLANK]));
                self.edge(test, probe, Edge::new().read(&[ENDMARK]).awrite('0').amove(Move::R));
                let present = self.others(&[ENDMARK]);
                self.edge(test, probe, Edge::new().read(&present).amove(Move::R));
                self.rewind_addr(done, exit);
            }
            Instr::Zero(t) => {
                let t = *t;
                self.check_tape(t)?;
                self.zero_tape(t, 0, entry, exit);
            }
            Instr::Load(t) | Instr::Store(t) => {
                let t = *t;
                self.check_tape(t)?;
                let (copy, done, mid) = (self.state(), self.state(), self.state());
                self.edge(entry, copy, Edge::new().mv(t, Move::R));
                let load = matches!(self.prog.instrs[i], Instr::Load(_));
                for b in BITS {
                    let e = Edge::new().mv(t, Move::R).amove(Move::R);
                    let e = if load { e.on(t, &[b]).awrite(b) } else { e.addr(&[b]).write(t, b) };
                    self.edge(copy, copy, e);
                }
                let stop = if load { Edge::new().on(t, &[BLANK]) } else { Edge::new().addr(&[BLANK]) };
                self.edge(copy, done, stop);
                self.rewind_work(t, done, mid);
                self.rewind_addr(mid, exit);
            }
            Instr::Inc(Target::Address) => self.inc_addr(entry, exit),
            Instr::Inc(Target::Tape(t)) => {
                let t = *t;
                self.check_tape(t)?;
                self.inc_tape(t, entry, exit);
            }
            Instr::Guess => {
                for b in BITS {
                    self.edge(entry, entry, Edge::new().addr(&BITS).awrite(b).amove(Move::R));
                }
                let done = self.state();
                self.edge(entry, done, Edge::new().addr(&[BLANK]));
                self.rewind_addr(done, exit);
            }
            Instr::ReadNum { reg, fail } => {
                let (t, fail) = (*reg, self.target(fail)?);
                self.check_tape(t)?;
                let start = self.state();
                self.zero_tape(t, 0, entry, start);
                self.read_bits(t, start, exit, fail);
            }
            Instr::LitRead { reg, fail } => {
                let (t, fail) = (*reg, self.target(fail)?);
                self.check_tape(t)?;
                let (sign, at) = (self.state(), self.state());
                self.zero_tape(t, 1, entry, sign);
                self.edge(sign, at, Edge::new().mv(t, Move::R));
                let inc = self.state();
                self.edge(at, inc, Edge::new().read(&['+']).write(t, '1'));
                self.edge(at, inc, Edge::new().read(&['-']).write(t, '0'));
                let bits = self.state();
                self.inc_addr(inc, bits);
                let bad = self.state();
                let others = self.others(&['+', '-']);
                self.edge(at, bad, Edge::new().read(&others));
                self.rewind_work(t, bad, fail);
                self.read_bits(t, bits, exit, fail);
            }
            Instr::JRead { syms, target } => {
                let target = self.target(target)?;
                let hit: Vec<char> = syms.iter().copied().filter(|c| self.inputs.contains(c)).collect();
                if !hit.is_empty() {
                    self.edge(entry, target, Edge::new().read(&hit));
                }
                let miss = self.others(&hit);
                self.edge(entry, exit, Edge::new().read(&miss));
            }
            Instr::JLt { a, b, target } | Instr::JEq { a, b, target } => {
                let (a, b, target) = (*a, *b, self.target(target)?);
                self.check_tape(a)?;
                self.check_tape(b)?;
                if matches!(self.prog.instrs[i], Instr::JLt { .. }) {
                    self.compare(a, b, entry, target, exit, exit);
                } else {
                    self.compare(a, b, entry, exit, target, exit);
                }
            }
            Instr::JConflict { list, cur, target } => {
                let (l, c, target) = (*list, *cur, self.target(target)?);
                self.check_tape(l)?;
                self.check_tape(c)?;
                let (head, matching, skip) = (self.state(), self.state(), self.state());
                let both = || Edge::new().mv(l, Move::R).mv(c, Move::R);
                self.edge(entry, head, both());
                let none = self.state();
                self.edge(head, none, Edge::new().on(l, &[BLANK]));
                self.rewind_tapes(&[l, c], none, exit);
                for x in BITS {
                    for y in BITS {
                        let to = if x == y { skip } else { matching };
                        self.edge(head, to, both().on(l, &[x]).on(c, &[y]));
                    }
                }
                let hit = self.state();
                self.edge(matching, hit, Edge::new().on(c, &[BLANK]));
                self.rewind_tapes(&[l, c], hit, target);
                for x in BITS {
                    for y in BITS {
                        let to = if x == y { matching } else { skip };
                        self.edge(matching, to, both().on(l, &[x]).on(c, &[y]));
                    }
                }
                let short = self.state();
                self.edge(matching, short, Edge::new().on(l, &[BLANK]).on(c, &BITS));
                self.rewind_tapes(&[l, c], short, exit);
                self.edge(skip, skip, both().on(c, &BITS));
                let (next, again) = (self.state(), self.state());
                self.edge(skip, next, Edge::new().on(c, &[BLANK]));
                self.rewind_work(c, next, again);
                self.edge(again, head, Edge::new().mv(c, Move::R));
            }
            Instr::Append { list, cur } => {
                let (l, c) = (*list, *cur);
                self.check_tape(l)?;
                self.check_tape(c)?;
                let (seek, copy, done) = (self.state(), self.state(), self.state());
                self.edge(entry, seek, Edge::new().mv(l, Move::R));
                self.edge(seek, seek, Edge::new().on(l, &BITS).mv(l, Move::R));
                self.edge(seek, copy, Edge::new().on(l, &[BLANK]).mv(c, Move::R));
                self.per_symbol(copy, copy, &BITS, |b| {
                    Edge::new().on(c, &[b]).write(l, b).mv(l, Move::R).mv(c, Move::R)
                });
                self.edge(copy, done, Edge::new().on(c, &[BLANK]));
                self.rewind_tapes(&[l, c], done, exit);
            }
            Instr::Goto(label) => {
                let target = self.target(label)?;
                self.edge(entry, target, Edge::new());
            }
            Instr::Choose(labels) => {
                let targets = labels.iter().map(|l| self.target(l)).collect::<Result<Vec<_>, _>>()?;
                self.fan_out(entry, &targets);
            }
            Instr::Accept => self.edge(entry, self.accept, Edge::new()),
            Instr::Reject => self.edge(entry, self.reject, Edge::new()),
        }
        Ok(())
    }

    /// Branches to every target through a tree of binary choices.
    fn fan_out(&mut self, from: usize, targets: &[usize]) {
        if targets.len() <= 2 {
            for &t in targets {
                self.edge(from, t, Edge::new());
            }
            return;
        }
        let (left, right) = targets.split_at(targets.len() / 2);
        for half in [left, right] {
            let s = if half.len() == 1 { half[0] } else { self.state() };
            if half.len() > 1 {
                self.fan_out(s, half);
            }
            self.edge(from, s, Edge::new());
        }
    }

    fn run(mut self) -> Result<MachineSpec, BuildError> {
        for i in 0..self.prog.instrs.len() {
            let s = self.named(&format!("pc{i}"), Mode::Existential);
            self.entries.push(s);
        }
        for i in 0..self.prog.instrs.len() {
            self.instr(i)?;
        }
        let start = self.entry(0);
        Ok(MachineSpec::new(self.states, start, self.prog.tapes, self.rules)?)
    }
}
