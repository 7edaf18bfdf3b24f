//! CNF formulas as machine input, and the machine deciding their
//! satisfiability by guessing one literal per clause.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use super::builder::{compile_program, BuildError};
use super::machine::{address_length, MachineSpec, RunBudget};
use crate::structure::ceil_log2;

pub const PROGRAM: &str = include_str!("../../machines/polylogcnfsat.mb");

/// Literal `v` is variable `v` positive, `-v` negated; variables start at 1.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Cnf {
    pub clauses: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CnfError {
    #[error("formula has no clauses")]
    NoClauses,
    #[error("literal 0 is not a variable")]
    ZeroLiteral,
    #[error("encoding does not fit in {0} cells")]
    DoesNotFit(usize),
    #[error("bad CNF text: {0}")]
    Syntax(String),
}

impl Cnf {
    pub fn new(clauses: Vec<Vec<i64>>) -> Self {
        Cnf { clauses }
    }

    pub fn max_var(&self) -> u64 {
        self.clauses.iter().flatten().map(|l| l.unsigned_abs()).max().unwrap_or(0)
    }

    /// Exhaustive search over all assignments.
    pub fn brute_force_sat(&self) -> bool {
        let vars = self.max_var() as u32;
        assert!(vars < 24, "too many variables for exhaustive search");
        (0u64..1 << vars).any(|assign| {
            self.clauses.iter().all(|c| {
                c.iter().any(|&l| {
                    let val = assign >> (l.unsigned_abs() - 1) & 1 == 1;
                    val == (l > 0)
                })
            })
        })
    }

    fn check(&self) -> Result<(), CnfError> {
        if self.clauses.is_empty() {
            return Err(CnfError::NoClauses);
        }
        if self.clauses.iter().flatten().any(|&l| l == 0) {
            return Err(CnfError::ZeroLiteral);
        }
        Ok(())
    }

    /// Cells needed with addresses and variable numbers of `l` bits.
    fn raw_length(&self, l: usize) -> usize {
        let c = self.clauses.len();
        let lits: usize = self.clauses.iter().map(Vec::len).sum();
        c * l + c + lits * (1 + l)
    }

    fn fits(&self, l: usize, total: usize) -> bool {
        self.raw_length(l) <= total && (l >= 64 || self.max_var() < 1 << l)
    }

    /// Input word for the machine: clause addresses, clauses, padding. The
    /// shortest such word.
    pub fn encode(&self) -> Result<Vec<char>, CnfError> {
        self.check()?;
        let mut l = 1;
        while !self.fits(l, (1 << l) - 1) {
            l += 1;
        }
        Ok(self.layout(l, self.raw_length(l).max(1 << (l - 1))))
    }

    /// The encoding padded to exactly `len` cells.
    pub fn encode_to_length(&self, len: usize) -> Result<Vec<char>, CnfError> {
        self.check()?;
        let l = address_length(len);
        if !self.fits(l, len) {
            return Err(CnfError::DoesNotFit(len));
        }
        Ok(self.layout(l, len))
    }

    fn layout(&self, l: usize, total: usize) -> Vec<char> {
        debug_assert_eq!(address_length(total), l);
        let c = self.clauses.len();
        let bits = |v: u64| (0..l).rev().map(move |i| if v >> i & 1 == 1 { '1' } else { '0' });
        let mut body = Vec::new();
        let mut starts = Vec::new();
        for clause in &self.clauses {
            starts.push(c * l + body.len());
            body.push('#');
            for &lit in clause {
                body.push(if lit > 0 { '+' } else { '-' });
                body.extend(bits(lit.unsigned_abs()));
            }
        }
        let mut out: Vec<char> = starts.iter().flat_map(|&s| bits(s as u64)).collect();
        out.extend(body);
        out.resize(total, '#');
        out
    }
}

impl fmt::Display for Cnf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.clauses {
            let lits: Vec<String> = c.iter().map(|l| format!("{l:+}")).collect();
            write!(f, "({})", lits.join(" "))?;
        }
        Ok(())
    }
}

/// Parses `(+1 -2)(3)`: parenthesized clauses of signed variable numbers.
impl FromStr for Cnf {
    type Err = CnfError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut clauses = Vec::new();
        let mut rest = s.trim();
        while !rest.is_empty() {
            let body = rest.strip_prefix('(').ok_or_else(|| CnfError::Syntax(format!("expected '(' at '{rest}'")))?;
            let end = body.find(')').ok_or_else(|| CnfError::Syntax("unclosed clause".into()))?;
            let clause = body[..end]
                .split([' ', ','])
                .filter(|t| !t.is_empty())
                .map(|t| {
                    let t = t.replace('−', "-");
                    t.parse::<i64>().map_err(|_| CnfError::Syntax(format!("bad literal '{t}'")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            if clause.contains(&0) {
                return Err(CnfError::ZeroLiteral);
            }
            clauses.push(clause);
            rest = body[end + 1..].trim_start();
        }
        Ok(Cnf { clauses })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CnfMachineError {
    #[error("clause exponent must be at least 1")]
    ZeroExponent,
    #[error(transparent)]
    Build(#[from] BuildError),
}

/// The machine accepting encodings of satisfiable CNF formulas. Its running
/// time is polylogarithmic when the clause count is at most `⌈log n̂⌉^k`;
/// `k` only enters through [`polylogcnfsat_budget`].
pub fn polylogcnfsat_machine(k: u32) -> Result<MachineSpec, CnfMachineError> {
    if k == 0 {
        return Err(CnfMachineError::ZeroExponent);
    }
    Ok(compile_program(PROGRAM)?)
}

/// Step budget `64 · ⌈log n̂⌉^(2k+2)`, enough for `⌈log n̂⌉^k` clauses.
pub fn polylogcnfsat_budget(input_len: usize, k: u32) -> RunBudget {
    let l = ceil_log2(input_len.max(2)).max(2);
    RunBudget::steps(64usize.saturating_mul(l.saturating_pow(2 * k + 2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratm::machine::{accepts, measure};

    fn cnf(s: &str) -> Cnf {
        s.parse().unwrap()
    }

    #[test]
    fn encoding_layout() {
        let f = cnf("(+1)(-1)");
        let word: String = f.encode().unwrap().into_iter().collect();
        // ℓ = 5: clauses start at 10 and 17
        assert_eq!(word, "0101010001#+00001#-00001");
        assert_eq!(address_length(word.chars().count()), 5);
        let padded: String = cnf("(+1)").encode().unwrap().into_iter().collect();
        assert_eq!(padded, "0100#+0001");
        let short: String = cnf("()").encode().unwrap().into_iter().collect();
        assert_eq!(short, "10#");
        let long: String = f.encode_to_length(40).unwrap().into_iter().collect();
        assert_eq!(long, format!("{}{}", "001100010100#+000001#-000001", "#".repeat(12)));
        assert_eq!(f.encode_to_length(20), Err(CnfError::DoesNotFit(20)));
    }

    #[test]
    fn oracle_examples() {
        assert!(cnf("(+1 -2)(2)").brute_force_sat());
        assert!(!cnf("(1)(-1)").brute_force_sat());
        assert!(!cnf("()").brute_force_sat());
        assert_eq!(cnf("(+1 -2)(3)").to_string(), "(+1 -2)(+3)");
        assert_eq!("(1)(0)".parse::<Cnf>(), Err(CnfError::ZeroLiteral));
        assert_eq!(Cnf::default().encode(), Err(CnfError::NoClauses));
    }

    #[test]
    fn machine_decides_small_formulas() {
        let m = polylogcnfsat_machine(1).unwrap();
        for (text, sat) in [("(+1)", true), ("(+1)(-1)", false), ("(+1 -2)(+2)", true), ("(-1)(-1)", true), ("()", false)] {
            let input = cnf(text).encode().unwrap();
            let budget = polylogcnfsat_budget(input.len(), 1);
            let r = measure(&m, &input, budget);
            assert_eq!(r.accepted, sat, "{text}: {r}");
            assert!(!r.exhausted, "{text}");
        }
    }

    #[test]
    fn rejects_malformed_input() {
        let m = polylogcnfsat_machine(1).unwrap();
        let budget = RunBudget::steps(100_000);
        for word in ["0000000", "0101+001", "", "++++++"] {
            let input: Vec<char> = word.chars().collect();
            assert!(!accepts(&m, &input, budget), "{word}");
        }
        assert_eq!(polylogcnfsat_machine(0), Err(CnfMachineError::ZeroExponent));
    }
}
