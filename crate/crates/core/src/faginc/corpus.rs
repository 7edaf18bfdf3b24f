//! Small machines for checking the compiler, each with an oracle stated
//! directly on the encoding.

use crate::ratm::{address_length, parse_machine, MachineSpec};

pub struct ToyMachine {
    pub name: &'static str,
    pub text: &'static str,
    /// Longest run on any input.
    pub steps: usize,
    /// Acceptance computed from the encoding bits.
    pub oracle: fn(&[bool]) -> bool,
}

impl ToyMachine {
    pub fn machine(&self) -> MachineSpec {
        parse_machine(self.text).expect("corpus machines parse")
    }
}

fn lead_cell(bits: &[bool], from_top: usize) -> bool {
    let l = address_length(bits.len());
    l > from_top && bits.get(1 << (l - 1 - from_top)).copied().unwrap_or(false)
}

pub fn toy_corpus() -> Vec<ToyMachine> {
    vec![
        ToyMachine {
            name: "first_bit",
            text: include_str!("../../machines/first_bit.mach"),
            steps: 1,
            oracle: |b| b.first() == Some(&true),
        },
        ToyMachine {
            name: "always_reject",
            text: include_str!("../../machines/always_reject.mach"),
            steps: 0,
            oracle: |_| false,
        },
        ToyMachine {
            name: "either_bit",
            text: include_str!("../../machines/either_bit.mach"),
            steps: 2,
            oracle: |b| b.first() == Some(&true) || lead_cell(b, 0),
        },
        ToyMachine {
            name: "copy_back",
            text: include_str!("../../machines/copy_back.mach"),
            steps: 3,
            oracle: |b| b.first() == Some(&true),
        },
        ToyMachine {
            name: "second_bit",
            text: include_str!("../../machines/second_bit.mach"),
            steps: 3,
            oracle: |b| lead_cell(b, 1),
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratm::{accepts, RunBudget};

    #[test]
    fn oracles_match_the_simulator() {
        for toy in toy_corpus() {
            let m = toy.machine();
            for len in 1..=9usize {
                for code in 0u32..1 << len {
                    let bits: Vec<bool> = (0..len).map(|i| code >> i & 1 == 1).collect();
                    let input: Vec<char> = bits.iter().map(|&b| if b { '1' } else { '0' }).collect();
                    let got = accepts(&m, &input, RunBudget::steps(toy.steps));
                    assert_eq!(got, (toy.oracle)(&bits), "{} on {input:?}", toy.name);
                }
            }
        }
    }
}
