//! Random-access Turing machines: a read-only input addressed through a
//! binary address tape, plus a fixed number of read-write work tapes.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::structure::{bit_length, BitString};

pub const BLANK: char = '_';
pub const ENDMARK: char = '◁';

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Existential,
    Universal,
    Accept,
    Reject,
}

impl Mode {
    pub fn is_final(self) -> bool {
        matches!(self, Mode::Accept | Mode::Reject)
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Mode::Existential => "exists",
            Mode::Universal => "forall",
            Mode::Accept => "accept",
            Mode::Reject => "reject",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Move {
    L,
    R,
    S,
}

impl Move {
    fn letter(self) -> char {
        match self {
            Move::L => 'L',
            Move::R => 'R',
            Move::S => 'S',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateInfo {
    pub name: String,
    pub mode: Mode,
}

/// One transition. `None` in a trigger matches any symbol; `None` in a
/// write keeps the current symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub from: usize,
    pub read: Option<char>,
    pub addr: Option<char>,
    pub work: Vec<Option<char>>,
    pub to: usize,
    pub writes: Vec<Option<char>>,
    pub moves: Vec<Move>,
    pub addr_write: Option<char>,
    pub addr_move: Move,
}

impl Rule {
    /// A rule with wildcard triggers and no effects, for `tapes` work tapes.
    pub fn new(from: usize, to: usize, tapes: usize) -> Self {
        Rule {
            from,
            read: None,
            addr: None,
            work: vec![None; tapes],
            to,
            writes: vec![None; tapes],
            moves: vec![Move::S; tapes],
            addr_write: None,
            addr_move: Move::S,
        }
    }

    pub(crate) fn overlaps(&self, other: &Rule) -> bool {
        let meet = |a: Option<char>, b: Option<char>| a.is_none() || b.is_none() || a == b;
        meet(self.read, other.read)
            && meet(self.addr, other.addr)
            && self.work.iter().zip(&other.work).all(|(&x, &y)| meet(x, y))
    }

    fn matches(&self, read: char, addr: char, work: &[char]) -> bool {
        self.read.is_none_or(|c| c == read)
            && self.addr.is_none_or(|c| c == addr)
            && self.work.iter().zip(work).all(|(p, &s)| p.is_none_or(|c| c == s))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MachineError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unknown state '{0}'")]
    UnknownState(String),
    #[error("duplicate state '{0}'")]
    DuplicateState(String),
    #[error("no start state")]
    NoStart,
    #[error("final state '{0}' has outgoing rules")]
    FinalWithRules(String),
    #[error("rule from '{state}' mentions {got} work tapes, machine has {expected}")]
    TapeCount { state: String, expected: usize, got: usize },
    #[error("invalid symbol '{sym}' in {place}")]
    BadSymbol { sym: char, place: &'static str },
    #[error("configuration is final, no step possible")]
    Final,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineSpec {
    pub states: Vec<StateInfo>,
    pub start: usize,
    pub tapes: usize,
    pub rules: Vec<Rule>,
    by_state: Vec<Vec<usize>>,
}

impl MachineSpec {
    pub fn new(states: Vec<StateInfo>, start: usize, tapes: usize, rules: Vec<Rule>) -> Result<Self, MachineError> {
        if start >= states.len() {
            return Err(MachineError::NoStart);
        }
        let mut seen = BTreeSet::new();
        for s in &states {
            if !seen.insert(s.name.as_str()) {
                return Err(MachineError::DuplicateState(s.name.clone()));
            }
        }
        let mut by_state = vec![Vec::new(); states.len()];
        for (i, r) in rules.iter().enumerate() {
            let name = || states.get(r.from).map_or_else(|| r.from.to_string(), |s| s.name.clone());
            if r.from >= states.len() || r.to >= states.len() {
                return Err(MachineError::UnknownState(name()));
            }
            if states[r.from].mode.is_final() {
                return Err(MachineError::FinalWithRules(name()));
            }
            if r.work.len() != tapes || r.writes.len() != tapes || r.moves.len() != tapes {
                return Err(MachineError::TapeCount { state: name(), expected: tapes, got: r.work.len() });
            }
            if let Some(c) = r.addr_write.filter(|c| !matches!(c, '0' | '1')) {
                return Err(MachineError::BadSymbol { sym: c, place: "address write" });
            }
            if let Some(c) = r.addr.filter(|&c| c != '0' && c != '1' && c != BLANK) {
                return Err(MachineError::BadSymbol { sym: c, place: "address trigger" });
            }
            for c in r.writes.iter().chain(&r.work).flatten() {
                if *c == ENDMARK {
                    return Err(MachineError::BadSymbol { sym: *c, place: "work tape" });
                }
            }
            by_state[r.from].push(i);
        }
        Ok(MachineSpec { states, start, tapes, rules, by_state })
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s.name == name)
    }

    pub fn mode(&self, state: usize) -> Mode {
        self.states[state].mode
    }

    pub fn rules_from(&self, state: usize) -> impl Iterator<Item = (usize, &Rule)> {
        self.by_state[state].iter().map(move |&i| (i, &self.rules[i]))
    }

    /// Symbols written to or tested on work tapes, plus blank.
    pub fn work_alphabet(&self) -> BTreeSet<char> {
        let mut out: BTreeSet<char> = [BLANK].into_iter().collect();
        for r in &self.rules {
            out.extend(r.work.iter().chain(&r.writes).flatten());
        }
        out
    }

    /// States in which two rules can fire on the same symbols.
    pub fn branching_states(&self) -> Vec<usize> {
        (0..self.states.len())
            .filter(|&q| {
                let rules = &self.by_state[q];
                rules.iter().enumerate().any(|(i, &a)| rules[i + 1..].iter().any(|&b| self.rules[a].overlaps(&self.rules[b])))
            })
            .collect()
    }

    /// Upper bound on the number of rules applicable to one configuration.
    pub fn max_branching(&self) -> usize {
        let mut best = 0;
        for rules in &self.by_state {
            for &a in rules {
                let count = rules.iter().filter(|&&b| self.rules[a].overlaps(&self.rules[b])).count();
                best = best.max(count);
            }
        }
        best
    }

    pub fn has_universal(&self) -> bool {
        self.states.iter().any(|s| s.mode == Mode::Universal)
    }

    /// Initial configuration for an input of length `input_len`.
    pub fn initial(&self, input_len: usize) -> Configuration {
        let mode = self.mode(self.start);
        Configuration {
            state: self.start,
            addr: vec![0; address_length(input_len)],
            addr_head: 0,
            work: vec![Vec::new(); self.tapes],
            heads: vec![0; self.tapes],
            steps: 0,
            alternations: 0,
            last_mode: (!mode.is_final()).then_some(mode),
        }
    }

    /// All configurations one rule away, tagged with the rule index.
    pub fn step(&self, c: &Configuration, input: &[char]) -> Result<Vec<(usize, Configuration)>, MachineError> {
        if self.mode(c.state).is_final() {
            return Err(MachineError::Final);
        }
        Ok(self
            .applicable(c, input)
            .into_iter()
            .map(|i| {
                let mut next = c.clone();
                self.apply(&mut next, i);
                (i, next)
            })
            .collect())
    }

    fn applicable(&self, c: &Configuration, input: &[char]) -> Vec<usize> {
        let read = read_input(input, &c.addr);
        let addr = c.addr_symbol();
        let work: Vec<char> = (0..self.tapes).map(|t| c.work_symbol(t)).collect();
        self.rules_from(c.state).filter(|(_, r)| r.matches(read, addr, &work)).map(|(i, _)| i).collect()
    }

    fn alternations_after(&self, c: &Configuration, rule: usize) -> usize {
        let mode = self.mode(self.rules[rule].to);
        let switch = !mode.is_final() && c.last_mode.is_some_and(|m| m != mode);
        c.alternations + switch as usize
    }

    fn apply(&self, c: &mut Configuration, rule: usize) {
        let r = &self.rules[rule];
        for t in 0..self.tapes {
            if let Some(sym) = r.writes[t] {
                let h = c.heads[t];
                let tape = &mut c.work[t];
                if tape.len() <= h {
                    tape.resize(h + 1, BLANK);
                }
                tape[h] = sym;
            }
            c.heads[t] = match r.moves[t] {
                Move::L => c.heads[t].saturating_sub(1),
                Move::R => c.heads[t] + 1,
                Move::S => c.heads[t],
            };
        }
        let len = c.addr.len() as isize;
        if let Some(b) = r.addr_write {
            if (0..len).contains(&c.addr_head) {
                c.addr[c.addr_head as usize] = (b == '1') as u8;
            }
        }
        c.addr_head = match r.addr_move {
            Move::L => (c.addr_head - 1).max(-1),
            Move::R => (c.addr_head + 1).min(len),
            Move::S => c.addr_head,
        };
        c.alternations = self.alternations_after(c, rule);
        c.state = r.to;
        c.steps += 1;
        let mode = self.mode(r.to);
        if !mode.is_final() {
            c.last_mode = Some(mode);
        }
    }
}

/// Address tape length for an input of length `input_len`: enough bits to
/// address every cell and the endmark cell.
pub fn address_length(input_len: usize) -> usize {
    bit_length(input_len).max(1)
}

/// The symbol read through address `addr` (most significant bit first):
/// the addressed input cell, or the endmark at and beyond the input end.
pub fn read_input(input: &[char], addr: &[u8]) -> char {
    let mut a: usize = 0;
    for &b in addr {
        if a > input.len() {
            return ENDMARK;
        }
        a = a * 2 + b as usize;
    }
    input.get(a).copied().unwrap_or(ENDMARK)
}

/// Input symbols of a bit string.
pub fn bits_input(bits: &BitString) -> Vec<char> {
    bits.bits().iter().map(|&b| if b { '1' } else { '0' }).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub state: usize,
    pub addr: Vec<u8>,
    /// Cell under the address head; `-1` and `addr.len()` are blank sentinels.
    pub addr_head: isize,
    pub work: Vec<Vec<char>>,
    pub heads: Vec<usize>,
    pub steps: usize,
    pub alternations: usize,
    last_mode: Option<Mode>,
}

impl Configuration {
    pub fn addr_symbol(&self) -> char {
        if (0..self.addr.len() as isize).contains(&self.addr_head) {
            if self.addr[self.addr_head as usize] == 1 {
                '1'
            } else {
                '0'
            }
        } else {
            BLANK
        }
    }

    pub fn work_symbol(&self, tape: usize) -> char {
        self.work[tape].get(self.heads[tape]).copied().unwrap_or(BLANK)
    }

    pub fn address_value(&self) -> usize {
        self.addr.iter().fold(0usize, |a, &b| a.saturating_mul(2).saturating_add(b as usize))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunBudget {
    pub max_steps: usize,
    pub max_alternations: usize,
}

impl RunBudget {
    pub fn steps(max_steps: usize) -> Self {
        RunBudget { max_steps, max_alternations: usize::MAX }
    }

    pub fn unlimited() -> Self {
        RunBudget { max_steps: usize::MAX, max_alternations: usize::MAX }
    }

    /// `c · ⌈log n̂⌉^k` steps.
    pub fn polylog(input_len: usize, c: usize, k: u32) -> Self {
        let l = crate::structure::ceil_log2(input_len.max(2));
        RunBudget::steps(c.saturating_mul(l.saturating_pow(k)))
    }
}

/// Result of exploring a computation tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunReport {
    pub accepted: bool,
    /// Longest path in the accepting subtree, or deepest explored path on
    /// rejection.
    pub steps: usize,
    pub alternations: usize,
    /// Some path was cut off by the budget.
    pub exhausted: bool,
}

impl RunReport {
    fn reject(c: &Configuration, exhausted: bool) -> Self {
        RunReport { accepted: false, steps: c.steps, alternations: c.alternations, exhausted }
    }
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} steps={} alternations={}{}",
            if self.accepted { "accept" } else { "reject" },
            self.steps,
            self.alternations,
            if self.exhausted { " (budget exhausted)" } else { "" }
        )
    }
}

struct Explorer<'a> {
    m: &'a MachineSpec,
    input: &'a [char],
    budget: RunBudget,
}

impl Explorer<'_> {
    /// Evaluates the subtree below `c`; on acceptance through existential
    /// choices, `path` receives the chosen rule indices.
    fn run(&self, mut c: Configuration, mut path: Option<&mut Vec<usize>>) -> RunReport {
        loop {
            match self.m.mode(c.state) {
                Mode::Accept => {
                    return RunReport { accepted: true, steps: c.steps, alternations: c.alternations, exhausted: false }
                }
                Mode::Reject => return RunReport::reject(&c, false),
                _ => {}
            }
            if c.steps >= self.budget.max_steps {
                return RunReport::reject(&c, true);
            }
            let mut rules = self.m.applicable(&c, self.input);
            let before = rules.len();
            rules.retain(|&r| self.m.alternations_after(&c, r) <= self.budget.max_alternations);
            let cut = rules.len() < before;
            if rules.is_empty() {
                return RunReport::reject(&c, cut);
            }
            if rules.len() == 1 && !cut {
                if let Some(p) = path.as_deref_mut() {
                    p.push(rules[0]);
                }
                self.m.apply(&mut c, rules[0]);
                continue;
            }
            let succ: Vec<(usize, Configuration)> = rules
                .into_iter()
                .map(|r| {
                    let mut next = c.clone();
                    self.m.apply(&mut next, r);
                    (r, next)
                })
                .collect();
            return match self.m.mode(c.state) {
                Mode::Existential => self.any(&c, succ, path, cut),
                _ => self.all(&c, succ, path, cut),
            };
        }
    }

    fn any(&self, c: &Configuration, succ: Vec<(usize, Configuration)>, path: Option<&mut Vec<usize>>, cut: bool) -> RunReport {
        let mut worst = RunReport::reject(c, cut);
        let base = path.as_ref().map_or(0, |p| p.len());
        let mut path = path;
        for (rule, next) in succ {
            let mut sub = path.as_ref().map(|_| vec![rule]);
            let r = self.run(next, sub.as_mut());
            if r.accepted {
                if let (Some(p), Some(s)) = (path.as_deref_mut(), sub) {
                    p.truncate(base);
                    p.extend(s);
                }
                return r;
            }
            worst.exhausted |= r.exhausted;
            if r.steps > worst.steps {
                worst.steps = r.steps;
                worst.alternations = r.alternations;
            }
        }
        worst
    }

    fn all(&self, c: &Configuration, succ: Vec<(usize, Configuration)>, path: Option<&mut Vec<usize>>, cut: bool) -> RunReport {
        if cut {
            return RunReport::reject(c, true);
        }
        let mut best = RunReport { accepted: true, steps: c.steps, alternations: c.alternations, exhausted: false };
        let mut first = None;
        for (rule, next) in succ {
            let mut sub = path.as_ref().map(|_| vec![rule]);
            let r = self.run(next, sub.as_mut());
            if !r.accepted {
                return r;
            }
            if first.is_none() {
                first = sub;
            }
            best.steps = best.steps.max(r.steps);
            best.alternations = best.alternations.max(r.alternations);
        }
        if let (Some(p), Some(s)) = (path, first) {
            p.extend(s);
        }
        best
    }
}

/// Alternating acceptance within `budget`.
pub fn accepts(m: &MachineSpec, input: &[char], budget: RunBudget) -> bool {
    measure(m, input, budget).accepted
}

pub fn measure(m: &MachineSpec, input: &[char], budget: RunBudget) -> RunReport {
    Explorer { m, input, budget }.run(m.initial(input.len()), None)
}

/// Rule indices of one accepting computation path. For machines with
/// universal states this follows the first branch at each universal choice.
pub fn accepting_path(m: &MachineSpec, input: &[char], budget: RunBudget) -> Option<Vec<usize>> {
    let mut path = Vec::new();
    let r = Explorer { m, input, budget }.run(m.initial(input.len()), Some(&mut path));
    r.accepted.then_some(path)
}

/// Configurations visited when following `path` from the initial one.
pub fn replay(m: &MachineSpec, input: &[char], path: &[usize]) -> Vec<Configuration> {
    let mut out = vec![m.initial(input.len())];
    for &rule in path {
        let cur = out.last().unwrap();
        let next = m
            .step(cur, input)
            .expect("path leaves a final state")
            .into_iter()
            .find(|(i, _)| *i == rule)
            .expect("rule on path does not apply")
            .1;
        out.push(next);
    }
    out
}

// Text format.

fn sym_token(c: Option<char>) -> String {
    match c {
        None => "*".into(),
        Some(ENDMARK) => "end".into(),
        Some(c) => c.to_string(),
    }
}

fn parse_sym(tok: &str, line: usize) -> Result<Option<char>, MachineError> {
    match tok {
        "*" => Ok(None),
        "end" | "◁" => Ok(Some(ENDMARK)),
        t if t.chars().count() == 1 => Ok(t.chars().next()),
        t => Err(MachineError::Syntax { line, msg: format!("bad symbol '{t}'") }),
    }
}

fn parse_move(tok: &str, line: usize) -> Result<Move, MachineError> {
    match tok {
        "L" => Ok(Move::L),
        "R" => Ok(Move::R),
        "S" => Ok(Move::S),
        t => Err(MachineError::Syntax { line, msg: format!("bad move '{t}'") }),
    }
}

fn parse_mode(tok: &str, line: usize) -> Result<Mode, MachineError> {
    match tok {
        "exists" | "existential" => Ok(Mode::Existential),
        "forall" | "universal" => Ok(Mode::Universal),
        "accept" => Ok(Mode::Accept),
        "reject" => Ok(Mode::Reject),
        t => Err(MachineError::Syntax { line, msg: format!("bad mode '{t}'") }),
    }
}

fn tape_index(key: &str, prefix: &str, tapes: usize, line: usize) -> Result<Option<usize>, MachineError> {
    let Some(rest) = key.strip_prefix(prefix) else { return Ok(None) };
    let i: usize = rest
        .parse()
        .map_err(|_| MachineError::Syntax { line, msg: format!("bad tape index in '{key}'") })?;
    if i >= tapes {
        return Err(MachineError::Syntax { line, msg: format!("tape {i} out of range") });
    }
    Ok(Some(i))
}

/// Parses the line-oriented machine format:
///
/// ```text
/// format v1
/// tapes 1
/// state q0 exists
/// state yes accept
/// start q0
/// rule q0 read=1 addr=* wt_0=* -> yes write_0=1 move_0=R awrite=0 amove=S
/// ```
///
/// Omitted triggers are wildcards, omitted writes keep the symbol and
/// omitted moves stay.
pub fn parse_machine(text: &str) -> Result<MachineSpec, MachineError> {
    let mut tapes = None;
    let mut states: Vec<StateInfo> = Vec::new();
    let mut start = None;
    let mut pending: Vec<(usize, Vec<String>)> = Vec::new();
    let mut saw_format = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('%').next().unwrap().trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        let syntax = |msg: &str| MachineError::Syntax { line, msg: msg.into() };
        match toks[0] {
            "format" => {
                if toks.get(1) != Some(&"v1") {
                    return Err(syntax("unsupported format version"));
                }
                saw_format = true;
            }
            "tapes" => {
                tapes = Some(toks.get(1).and_then(|t| t.parse().ok()).ok_or_else(|| syntax("bad tape count"))?);
            }
            "state" => {
                if toks.len() != 3 {
                    return Err(syntax("expected: state NAME MODE"));
                }
                states.push(StateInfo { name: toks[1].into(), mode: parse_mode(toks[2], line)? });
            }
            "start" => start = Some(toks.get(1).ok_or_else(|| syntax("expected: start NAME"))?.to_string()),
            "rule" => pending.push((line, toks[1..].iter().map(|s| s.to_string()).collect())),
            other => return Err(syntax(&format!("unknown directive '{other}'"))),
        }
    }
    if !saw_format {
        return Err(MachineError::Syntax { line: 1, msg: "missing 'format v1' header".into() });
    }
    let tapes = tapes.ok_or(MachineError::Syntax { line: 1, msg: "missing 'tapes' line".into() })?;
    let index = |name: &str| {
        states.iter().position(|s| s.name == name).ok_or_else(|| MachineError::UnknownState(name.into()))
    };
    let mut rules = Vec::new();
    for (line, toks) in pending {
        let syntax = |msg: String| MachineError::Syntax { line, msg };
        let arrow = toks.iter().position(|t| t == "->").ok_or_else(|| syntax("missing '->'".into()))?;
        if arrow == 0 || arrow + 1 >= toks.len() {
            return Err(syntax("expected: rule FROM ... -> TO ...".into()));
        }
        let mut rule = Rule::new(index(&toks[0])?, index(&toks[arrow + 1])?, tapes);
        let fields = toks[1..arrow].iter().chain(&toks[arrow + 2..]);
        for field in fields {
            let (key, val) = field.split_once('=').ok_or_else(|| syntax(format!("bad field '{field}'")))?;
            match key {
                "read" => rule.read = parse_sym(val, line)?,
                "addr" => rule.addr = parse_sym(val, line)?,
                "awrite" => rule.addr_write = parse_sym(val, line)?,
                "amove" => rule.addr_move = parse_move(val, line)?,
                _ => {
                    if let Some(t) = tape_index(key, "wt_", tapes, line)? {
                        rule.work[t] = parse_sym(val, line)?;
                    } else if let Some(t) = tape_index(key, "write_", tapes, line)? {
                        rule.writes[t] = parse_sym(val, line)?;
                    } else if let Some(t) = tape_index(key, "move_", tapes, line)? {
                        rule.moves[t] = parse_move(val, line)?;
                    } else {
                        return Err(syntax(format!("unknown field '{key}'")));
                    }
                }
            }
        }
        rules.push(rule);
    }
    let start = index(&start.ok_or(MachineError::NoStart)?)?;
    MachineSpec::new(states, start, tapes, rules)
}

pub fn write_machine(m: &MachineSpec) -> String {
    let mut out = format!("format v1\ntapes {}\n", m.tapes);
    for s in &m.states {
        out.push_str(&format!("state {} {}\n", s.name, s.mode.keyword()));
    }
    out.push_str(&format!("start {}\n", m.states[m.start].name));
    for r in &m.rules {
        let mut line = format!("rule {} read={} addr={}", m.states[r.from].name, sym_token(r.read), sym_token(r.addr));
        for (t, w) in r.work.iter().enumerate() {
            line.push_str(&format!(" wt_{t}={}", sym_token(*w)));
        }
        line.push_str(&format!(" -> {}", m.states[r.to].name));
        for t in 0..m.tapes {
            if let Some(w) = r.writes[t] {
                line.push_str(&format!(" write_{t}={}", sym_token(Some(w))));
            }
            if r.moves[t] != Move::S {
                line.push_str(&format!(" move_{t}={}", r.moves[t].letter()));
            }
        }
        if let Some(w) = r.addr_write {
            line.push_str(&format!(" awrite={w}"));
        }
        if r.addr_move != Move::S {
            line.push_str(&format!(" amove={}", r.addr_move.letter()));
        }
        out.push_str(&line);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chars(s: &str) -> Vec<char> {
        s.chars().collect()
    }

    const FIRST_BIT: &str = "format v1
tapes 0
state q0 exists
state yes accept
state no reject
start q0
rule q0 read=1 -> yes
rule q0 read=0 -> no
";

    #[test]
    fn endmark_convention() {
        let input = chars("01");
        assert_eq!(read_input(&input, &[1]), '1');
        assert_eq!(read_input(&input, &[1, 0]), ENDMARK);
        assert_eq!(read_input(&input, &[1, 1]), ENDMARK);
        assert_eq!(read_input(&input, &[0, 0]), '0');
        assert_eq!(address_length(2), 2);
        assert_eq!(address_length(0), 1);
    }

    #[test]
    fn first_bit_machine() {
        let m = parse_machine(FIRST_BIT).unwrap();
        assert!(accepts(&m, &chars("10"), RunBudget::unlimited()));
        assert!(!accepts(&m, &chars("01"), RunBudget::unlimited()));
        let r = measure(&m, &chars("1"), RunBudget::unlimited());
        assert_eq!((r.accepted, r.steps, r.alternations), (true, 1, 0));
        assert_eq!(parse_machine(&write_machine(&m)).unwrap(), m);
    }

    #[test]
    fn trivial_and_looping_machines() {
        let acc = parse_machine("format v1\ntapes 0\nstate a accept\nstart a\n").unwrap();
        assert_eq!(measure(&acc, &chars("0"), RunBudget::unlimited()), RunReport { accepted: true, steps: 0, alternations: 0, exhausted: false });
        let lp = parse_machine("format v1\ntapes 0\nstate q exists\nstart q\nrule q -> q\n").unwrap();
        let r = measure(&lp, &chars("0"), RunBudget::steps(10));
        assert_eq!((r.accepted, r.steps, r.alternations, r.exhausted), (false, 10, 0, true));
        let c = lp.initial(1);
        assert_eq!(lp.step(&c, &chars("0")).unwrap().len(), 1);
        let fin = acc.initial(1);
        assert_eq!(acc.step(&fin, &chars("0")), Err(MachineError::Final));
    }

    #[test]
    fn universal_needs_all_branches() {
        let text = "format v1
tapes 0
state u forall
state yes accept
state no reject
start u
rule u -> yes
rule u -> no
";
        let m = parse_machine(text).unwrap();
        assert!(!accepts(&m, &chars("0"), RunBudget::unlimited()));
        let e = parse_machine(&text.replace("forall", "exists")).unwrap();
        assert!(accepts(&e, &chars("0"), RunBudget::unlimited()));
        let two = e.step(&e.initial(1), &chars("0")).unwrap();
        assert_eq!(two.len(), 2);
    }

    #[test]
    fn alternations_count_mode_switches() {
        let text = "format v1
tapes 0
state e exists
state u forall
state yes accept
start e
rule e -> u
rule u -> yes
";
        let m = parse_machine(text).unwrap();
        let r = measure(&m, &chars("0"), RunBudget::unlimited());
        assert_eq!((r.accepted, r.alternations), (true, 1));
        let tight = RunBudget { max_steps: 10, max_alternations: 0 };
        assert!(!accepts(&m, &chars("0"), tight));
    }

    #[test]
    fn address_tape_writes_and_sentinels() {
        // writes 1 into the low address bit, then reads input cell 1
        let text = "format v1
tapes 1
state a exists
state b exists
state c exists
state yes accept
start a
rule a addr=0 -> a amove=R
rule a addr=_ -> b amove=L
rule b -> c awrite=1 write_0=x move_0=R
rule c read=1 wt_0=_ -> yes
";
        let m = parse_machine(text).unwrap();
        assert!(accepts(&m, &chars("01"), RunBudget::unlimited()));
        assert!(!accepts(&m, &chars("00"), RunBudget::unlimited()));
        let path = accepting_path(&m, &chars("01"), RunBudget::unlimited()).unwrap();
        let trace = replay(&m, &chars("01"), &path);
        assert_eq!(trace.last().unwrap().address_value(), 1);
        assert_eq!(trace.last().unwrap().work[0], vec!['x']);
    }

    #[test]
    fn malformed_files() {
        assert!(matches!(parse_machine("tapes 0\nstate a accept\nstart a\n"), Err(MachineError::Syntax { .. })));
        assert!(matches!(parse_machine("format v1\ntapes 0\nstate a accept\nstart b\n"), Err(MachineError::UnknownState(_))));
        assert!(matches!(
            parse_machine("format v1\ntapes 0\nstate a accept\nstart a\nrule a -> a\n"),
            Err(MachineError::FinalWithRules(_))
        ));
        assert!(matches!(parse_machine("format v1\ntapes 0\nstate a exists\nstart a\nrule a move_3=R -> a\n"), Err(MachineError::Syntax { .. })));
    }
}
