//! Random-access Turing machines: simulation under step and alternation
//! budgets, a register language for writing them, and a machine deciding
//! satisfiability of CNF formulas with polylogarithmically many clauses.

pub mod builder;
pub mod cnf;
pub mod machine;

pub use builder::{compile_program, parse_program, BuildError, Instr, Program, Target};
pub use cnf::{polylogcnfsat_budget, polylogcnfsat_machine, Cnf, CnfError, CnfMachineError};
pub use machine::{
    accepting_path, accepts, address_length, bits_input, measure, parse_machine, read_input, replay, write_machine,
    Configuration, MachineError, MachineSpec, Mode, Move, Rule, RunBudget, RunReport, StateInfo, BLANK, ENDMARK,
};

/// Reads either machine format: raw transition tables (`format v1`) or
/// builder programs (`builder v1`).
pub fn load_machine(text: &str) -> Result<MachineSpec, BuildError> {
    let first = text
        .lines()
        .map(|l| l.split(['%', '/']).next().unwrap_or("").trim())
        .find(|l| !l.is_empty())
        .unwrap_or("");
    if first.starts_with("builder") {
        compile_program(text)
    } else {
        Ok(parse_machine(text)?)
    }
}
