//! Witnesses for compiled sentences built from accepting runs, and the
//! comparison of machine verdicts with sentence verdicts.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use super::{capacity, compile_with_plan, time_budget, CompilationPlan, CompileError, DivFamily, Divisor};
use crate::eval::{check_witness, eval, ground_solve, sigma1_parts, EvalConfig, EvalError, GroundOutcome, Valuation};
use crate::formula::{Formula, SoVar};
use crate::macros::{def_relation, encode_number, mult_witness, position_tuple, sum_carries, width, with_prefix, NumberError};
use crate::ratm::{accepting_path, bits_input, read_input, replay, MachineSpec, Mode, RunBudget, BLANK};
use crate::structure::{bit_length, ceil_log2, encode_bin, write_structure, Structure, Tuple, TupleSet};

use super::{CELL_SYMBOLS, READ_SYMBOLS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WitnessError {
    #[error("the run does not accept within {0} steps")]
    TraceNotAccepting(usize),
    #[error("structure does not fit the plan: {0}")]
    Capacity(String),
    #[error(transparent)]
    Number(#[from] NumberError),
}

/// Collects relations by variable name; every plan variable starts empty.
struct Rels(BTreeMap<String, TupleSet>);

impl Rels {
    fn add(&mut self, v: &SoVar, t: Tuple) {
        self.0.entry(v.name.clone()).or_default().insert(t);
    }

    fn set(&mut self, v: &SoVar, rel: TupleSet) {
        self.0.insert(v.name.clone(), rel);
    }

    fn extend(&mut self, v: &SoVar, prefix: &[usize], rel: &TupleSet) {
        self.0.entry(v.name.clone()).or_default().extend(with_prefix(prefix, rel));
    }
}

fn cat(a: &[usize], b: &[usize]) -> Tuple {
    a.iter().chain(b).copied().collect()
}

/// Values of the shared numbers at size `n`.
struct Numbers {
    powers: Vec<u128>,
    offsets: Vec<u128>,
    multiples: Vec<u128>,
    end: u128,
    logn: u128,
}

impl Numbers {
    fn new(plan: &CompilationPlan, n: usize) -> Self {
        let nn = n as u128;
        let powers = (1..=plan.arith.powers.len() as u32).map(|e| nn.pow(e)).collect();
        let mut offsets = vec![0u128];
        for s in &plan.sections {
            offsets.push(offsets.last().unwrap() + nn.pow(s.arity as u32));
        }
        let logn = ceil_log2(n) as u128;
        let q = plan.const_section.as_ref().map_or(0, |c| c.constants.len()) as u128;
        let multiples = (1..=q).map(|i| i * logn).collect();
        let end = offsets.last().unwrap() + q * logn;
        Numbers { powers, offsets, multiples, end, logn }
    }
}

/// A witness from a given rule path; the path must accept within the time
/// budget of the plan.
pub fn extract_witness(
    m: &MachineSpec,
    plan: &CompilationPlan,
    s: &Structure,
    path: &[usize],
) -> Result<Valuation, WitnessError> {
    let n = s.size();
    let budget = time_budget(n, plan.k);
    let input = bits_input(&encode_bin(s));
    let mut trace = replay(m, &input, path);
    if path.len() > budget || m.mode(trace.last().expect("initial configuration").state) != Mode::Accept {
        return Err(WitnessError::TraceNotAccepting(budget));
    }
    let mut rels = Rels(plan.variables().into_iter().map(|v| (v.name, TupleSet::new())).collect());
    if n <= 2 {
        // the table branch needs no witness
        return Ok(into_valuation(rels));
    }
    capacity(plan, n).map_err(WitnessError::Capacity)?;
    let (k, ka) = (plan.k, plan.k_addr);
    let num = |v: u128| encode_number(n, ka, v);
    let nums = Numbers::new(plan, n);
    let a = &plan.arith;

    rels.set(&plan.index, def_relation(n, k));
    rels.set(&plan.addr_index, def_relation(n, ka));
    if let Some(j) = &plan.pair_index {
        rels.set(j, def_relation(n, 2 * ka));
    }
    rels.set(&a.one, num(1)?);
    rels.set(&a.max, num(n as u128 - 1)?);
    for (v, &x) in a.powers.iter().zip(&nums.powers) {
        rels.set(v, num(x)?);
    }
    rels.set(&a.power_carry, sum_carries(n, ka, n as u128 - 1, 1));
    for (e, (r, sh, w)) in a.power_mults.iter().enumerate() {
        let (rr, ss, ww) = mult_witness(n, ka, nums.powers[0], nums.powers[e]);
        rels.set(r, rr);
        rels.set(sh, ss);
        rels.set(w, ww);
    }
    for (v, &x) in a.offsets.iter().zip(&nums.offsets) {
        rels.set(v, num(x)?);
    }
    for (i, w) in a.offset_carries.iter().enumerate() {
        let size = nums.powers[plan.sections[i].arity - 1];
        rels.set(w, sum_carries(n, ka, nums.offsets[i], size));
    }
    if let Some(c) = &a.constants {
        for (v, &x) in c.multiples.iter().zip(&nums.multiples) {
            rels.set(v, num(x)?);
        }
        for (i, w) in c.multiple_carries.iter().enumerate() {
            rels.set(w, sum_carries(n, ka, nums.multiples[i], nums.logn));
        }
        rels.set(&c.end, num(nums.end)?);
        let last = *nums.offsets.last().unwrap();
        rels.set(&c.end_carry, sum_carries(n, ka, last, nums.end - last));
        rels.set(&c.last_bit, num(nums.logn - 1)?);
    }
    let l = bit_length(input.len()).max(1);
    rels.add(&a.top, position_tuple(n, ka, l - 1));

    let times = width(n, k);
    while trace.len() < times {
        let last = trace.last().unwrap().clone();
        trace.push(last);
    }
    let run = &plan.run;
    for (t, c) in trace.iter().enumerate().take(times) {
        let tt = position_tuple(n, k, t);
        rels.add(&run.states[c.state], tt.clone());
        let sym = read_input(&input, &c.addr);
        let ri = READ_SYMBOLS.iter().position(|&s| s == sym).expect("input symbols are bits or the endmark");
        rels.add(&run.reads[ri], tt.clone());
        if let Some(&rule) = path.get(t) {
            if plan.partners[rule].is_some_and(|o| o < rule) {
                rels.add(&run.choice, tt.clone());
            }
        }
        for (j, cells) in run.cells.iter().enumerate() {
            if c.heads[j] >= times {
                return Err(WitnessError::Capacity(format!("head of tape {j} leaves the index range")));
            }
            rels.add(&run.heads[j], cat(&tt, &position_tuple(n, k, c.heads[j])));
            for p in 0..times {
                let sym = c.work[j].get(p).copied().unwrap_or(BLANK);
                let si = CELL_SYMBOLS.iter().position(|&s| s == sym).expect("work symbols checked at planning");
                rels.add(&cells[si], cat(&tt, &position_tuple(n, k, p)));
            }
        }
        let value = c.address_value() as u128;
        rels.extend(&run.address, &tt, &num(value)?);
        match c.addr_head {
            -1 => rels.add(&run.left_sentinel, tt.clone()),
            h if h as usize == l => rels.add(&run.right_sentinel, tt.clone()),
            h => rels.add(&run.address_head, cat(&tt, &position_tuple(n, ka, l - 1 - h as usize))),
        }
        sections(plan, &nums, n, &tt, value, &mut rels)?;
    }
    Ok(into_valuation(rels))
}

/// Per-time offsets and divisions for the section the address falls into.
fn sections(
    plan: &CompilationPlan,
    nums: &Numbers,
    n: usize,
    tt: &[usize],
    value: u128,
    rels: &mut Rels,
) -> Result<(), WitnessError> {
    let ka = plan.k_addr;
    if value >= nums.end {
        return Ok(());
    }
    let divisor = |d: Divisor| match d {
        Divisor::Power(e) => nums.powers[e - 1],
        Divisor::LogN => nums.logn,
    };
    let divide = |f: &DivFamily, x: u128, rels: &mut Rels| -> Result<(u128, u128), WitnessError> {
        let y = divisor(f.divisor);
        let (q, r) = (x / y, x % y);
        rels.extend(&f.quotient, tt, &encode_number(n, ka, q)?);
        rels.extend(&f.remainder, tt, &encode_number(n, ka, r)?);
        rels.extend(&f.product, tt, &encode_number(n, ka, q * y)?);
        let (rr, ss, ww) = mult_witness(n, ka, q, y);
        rels.extend(&f.partial, tt, &rr);
        rels.extend(&f.shifted, tt, &ss);
        rels.extend(&f.mult_carry, tt, &ww);
        rels.extend(&f.carry, tt, &sum_carries(n, ka, q * y, r));
        Ok((q, r))
    };
    let last = *nums.offsets.last().unwrap();
    if value < last {
        let i = nums.offsets.iter().rposition(|&o| o <= value).expect("P_0 = 0");
        let sec = &plan.sections[i];
        let d = value - nums.offsets[i];
        rels.extend(&sec.offset, tt, &encode_number(n, ka, d)?);
        rels.extend(&sec.carry, tt, &sum_carries(n, ka, nums.offsets[i], d));
        for digit in &sec.digits {
            let mut x = d;
            for f in &digit.divs {
                x = divide(f, x, rels)?.0;
            }
        }
        return Ok(());
    }
    let cs = plan.const_section.as_ref().expect("values past the relations are constants");
    let d = value - last;
    rels.extend(&cs.offset, tt, &encode_number(n, ka, d)?);
    rels.extend(&cs.carry, tt, &sum_carries(n, ka, last, d));
    let (_, r) = divide(&cs.div, d, rels)?;
    let y = nums.logn - 1 - r;
    rels.extend(&cs.bit_index, tt, &encode_number(n, ka, y)?);
    rels.extend(&cs.bit_carry, tt, &sum_carries(n, ka, r, y));
    Ok(())
}

fn into_valuation(rels: Rels) -> Valuation {
    Valuation { first_order: BTreeMap::new(), second_order: rels.0 }
}

/// Runs the machine within the time budget and builds the witness of its
/// first accepting run.
pub fn witness_for(m: &MachineSpec, plan: &CompilationPlan, s: &Structure) -> Result<Valuation, WitnessError> {
    let budget = time_budget(s.size(), plan.k);
    let input = bits_input(&encode_bin(s));
    let path = accepting_path(m, &input, RunBudget::steps(budget)).ok_or(WitnessError::TraceNotAccepting(budget))?;
    extract_witness(m, plan, s, &path)
}

/// How the sentence verdict was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Matrix checked under the witness built from the run.
    Witness,
    /// Complete search over the second-order block.
    Exhaustive,
    Undecided,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Witness => "witness",
            Method::Exhaustive => "exhaustive",
            Method::Undecided => "undecided",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaptureEntry {
    pub n: usize,
    pub structure: String,
    pub machine_accepts: bool,
    /// `None` when no verdict could be reached.
    pub formula_holds: Option<bool>,
    pub method: Method,
    pub agreement: bool,
    pub witness: Option<Valuation>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaptureReport {
    pub entries: Vec<CaptureEntry>,
}

impl CaptureReport {
    pub fn all_agree(&self) -> bool {
        self.entries.iter().all(|e| e.agreement)
    }
}

impl fmt::Display for CaptureReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            let holds = e.formula_holds.map_or("?".to_string(), |b| b.to_string());
            write!(
                f,
                "n={} {} machine={} formula={} via {} {}",
                e.n,
                e.structure,
                e.machine_accepts,
                holds,
                e.method,
                if e.agreement { "agree" } else { "DISAGREE" }
            )?;
            if let Some(note) = &e.note {
                write!(f, " ({note})")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

fn describe(s: &Structure) -> String {
    write_structure(s).lines().skip(1).filter(|l| !l.trim().is_empty()).collect::<Vec<_>>().join("; ")
}

/// Machine verdict against sentence verdict on each structure. Accepted
/// structures are checked through an extracted witness; rejected ones by a
/// complete search, which is only attempted up to `exhaustive_up_to`.
pub fn verify_capture(
    m: &MachineSpec,
    k: usize,
    k_addr: usize,
    structures: &[Structure],
    exhaustive_up_to: usize,
    cfg: &EvalConfig,
) -> Result<CaptureReport, CompileError> {
    let vocab = match structures.first() {
        Some(s) => s.vocabulary().clone(),
        None => return Ok(CaptureReport { entries: vec![] }),
    };
    let plan = CompilationPlan::new(m, k, k_addr, &vocab)?;
    let psi = compile_with_plan(m, &plan);
    let entries = structures.par_iter().map(|s| check_one(m, &plan, &psi, s, exhaustive_up_to, cfg)).collect();
    Ok(CaptureReport { entries })
}

fn check_one(
    m: &MachineSpec,
    plan: &CompilationPlan,
    psi: &Formula,
    s: &Structure,
    exhaustive_up_to: usize,
    cfg: &EvalConfig,
) -> CaptureEntry {
    let n = s.size();
    let input = bits_input(&encode_bin(s));
    let budget = RunBudget::steps(time_budget(n, plan.k));
    let path = accepting_path(m, &input, budget);
    let mut entry = CaptureEntry {
        n,
        structure: describe(s),
        machine_accepts: path.is_some(),
        formula_holds: None,
        method: Method::Undecided,
        agreement: false,
        witness: None,
        note: None,
    };
    if let Err(why) = capacity(plan, n) {
        entry.note = Some(why);
        return entry;
    }
    match path {
        Some(path) => match extract_witness(m, plan, s, &path) {
            Ok(w) => match check_witness(s, psi, &w, cfg) {
                Ok(true) => {
                    entry.formula_holds = Some(true);
                    entry.method = Method::Witness;
                    entry.witness = Some(w);
                }
                Ok(false) => entry.note = Some("extracted witness fails the matrix".into()),
                Err(e) => entry.note = Some(e.to_string()),
            },
            Err(e) => entry.note = Some(e.to_string()),
        },
        None if n <= exhaustive_up_to => match exhaustive(s, psi, cfg) {
            Ok(holds) => {
                entry.formula_holds = Some(holds);
                entry.method = Method::Exhaustive;
            }
            Err(e) => entry.note = Some(e.to_string()),
        },
        None => entry.note = Some(format!("no complete search above n = {exhaustive_up_to}")),
    }
    entry.agreement = entry.formula_holds == Some(entry.machine_accepts);
    entry
}

/// Truth of a Σ1 sentence by a complete search over its block.
pub fn exhaustive(s: &Structure, psi: &Formula, cfg: &EvalConfig) -> Result<bool, EvalError> {
    if s.size() <= 2 {
        return eval(s, &Valuation::new(), psi, cfg);
    }
    let (block, matrix) = sigma1_parts(psi)?;
    Ok(matches!(ground_solve(s, &Valuation::new(), &matrix, &block, cfg)?, GroundOutcome::Sat(_)))
}
