//! Oracle suites behind `soplog selftest`. Each suite compares a formula or
//! machine with a direct computation and counts disagreements.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::eval::{eval, EvalConfig, Valuation};
use crate::faginc::{all_structures, toy_corpus, verify_capture};
use crate::formula::{Formula, SoVar};
use crate::macros::{bdiv, bmult, bsum, clique_formula, dnf_queries, encode_number, width, DNF_ALPHABET};
use crate::ratm::{accepts, polylogcnfsat_budget, polylogcnfsat_machine, Cnf};
use crate::structure::{word_model, Interpretation, Structure, TupleSet, Vocabulary};

#[derive(Debug, Clone)]
pub struct SuiteResult {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    /// First disagreement, for the report.
    pub example: Option<String>,
    pub elapsed: Duration,
}

struct Tally {
    name: &'static str,
    cases: usize,
    failures: usize,
    example: Option<String>,
    start: Instant,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Tally { name, cases: 0, failures: 0, example: None, start: Instant::now() }
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            self.example.get_or_insert_with(what);
        }
    }

    fn finish(self) -> SuiteResult {
        SuiteResult {
            name: self.name,
            cases: self.cases,
            failures: self.failures,
            example: self.example,
            elapsed: self.start.elapsed(),
        }
    }
}

pub fn run_suites(full: bool, cfg: &EvalConfig) -> Vec<SuiteResult> {
    vec![arithmetic(full, cfg), dnf(full, cfg), cnf_machine(full), clique(full, cfg), capture(cfg)]
}

pub fn table(results: &[SuiteResult]) -> String {
    let mut out = format!("{:<14} {:>7} {:>8} {:>10}  status\n", "suite", "cases", "failures", "seconds");
    for r in results {
        let status = if r.failures == 0 { "pass" } else { "FAIL" };
        let _ = writeln!(
            out,
            "{:<14} {:>7} {:>8} {:>10.2}  {status}",
            r.name,
            r.cases,
            r.failures,
            r.elapsed.as_secs_f64()
        );
        if let Some(e) = &r.example {
            let _ = writeln!(out, "  first failure: {e}");
        }
    }
    out
}

fn holds(s: &Structure, val: &Valuation, f: &Formula, cfg: &EvalConfig) -> Option<bool> {
    eval(s, val, f, cfg).ok()
}

fn numbers(n: usize, k: usize, values: &[(&str, u128)]) -> Valuation {
    let mut v = Valuation::new();
    for (name, value) in values {
        v.second_order.insert((*name).into(), encode_number(n, k, *value).expect("value fits"));
    }
    v
}

fn plain(n: usize) -> Structure {
    let vocab = Vocabulary::new().with_relation("R", 1).unwrap();
    Structure::new(vocab, n, Interpretation::new().relation("R", TupleSet::new())).unwrap()
}

fn arithmetic(full: bool, cfg: &EvalConfig) -> SuiteResult {
    let mut t = Tally::new("arithmetic");
    let sizes: &[usize] = if full { &[4, 5, 8] } else { &[4] };
    let k = 1;
    let [x, y, z, m] = ["X", "Y", "Z", "M"].map(|name| SoVar::new(name, k + 1, k));
    let (sum, mult, div) = (bsum(k, &x, &y, &z), bmult(k, &x, &y, &z), bdiv(k, &x, &y, &z, &m));
    for &n in sizes {
        let s = plain(n);
        let top = 1u128 << width(n, k);
        for a in 0..top {
            for b in 0..top {
                for c in 0..top {
                    let val = numbers(n, k, &[("X", a), ("Y", b), ("Z", c)]);
                    t.record(holds(&s, &val, &sum, cfg) == Some(a + b == c), || format!("n={n}: {a}+{b}={c}"));
                    t.record(holds(&s, &val, &mult, cfg) == Some(a * b == c), || format!("n={n}: {a}*{b}={c}"));
                    for r in 0..top {
                        let val = numbers(n, k, &[("X", a), ("Y", b), ("Z", c), ("M", r)]);
                        let expected = b != 0 && b * c + r == a && r < b;
                        t.record(holds(&s, &val, &div, cfg) == Some(expected), || {
                            format!("n={n}: {a} = {b}*{c} + {r}")
                        });
                    }
                }
            }
        }
    }
    t.finish()
}

/// DNF words with at most `clauses` clauses over the first `vars` variable
/// names; literals appear in a fixed order, each variable positively,
/// negatively or both.
fn dnf_words(vars: usize, clauses: usize) -> Vec<(String, bool)> {
    let names = ["X0", "X1", "X10"];
    let mut single = Vec::new();
    for code in 1..4usize.pow(vars as u32) {
        let mut lits = Vec::new();
        let mut consistent = true;
        for (v, name) in names.iter().take(vars).enumerate() {
            match code / 4usize.pow(v as u32) % 4 {
                1 => lits.push(name.to_string()),
                2 => lits.push(format!("¬{name}")),
                3 => {
                    lits.push(name.to_string());
                    lits.push(format!("¬{name}"));
                    consistent = false;
                }
                _ => {}
            }
        }
        single.push((format!("({})", lits.join("∧")), consistent));
    }
    let mut words = single.clone();
    if clauses >= 2 {
        for (a, sa) in &single {
            for (b, sb) in &single {
                words.push((format!("{a}∨{b}"), *sa || *sb));
            }
        }
    }
    words
}

fn dnf(full: bool, cfg: &EvalConfig) -> SuiteResult {
    let mut t = Tally::new("dnf");
    let (sat, nosat) = dnf_queries();
    let words = if full { dnf_words(3, 2) } else { dnf_words(2, 2) };
    for (word, expected) in words {
        let s = word_model(&DNF_ALPHABET, &word).expect("alphabet");
        let val = Valuation::new();
        let (a, b) = (holds(&s, &val, &sat, cfg), holds(&s, &val, &nosat, cfg));
        t.record(a == Some(expected) && b == Some(!expected), || format!("{word}: {a:?}/{b:?}"));
    }
    t.finish()
}

fn cnf_machine(full: bool) -> SuiteResult {
    let mut t = Tally::new("cnf-machine");
    let m = polylogcnfsat_machine(1).expect("k = 1");
    let vars: i64 = if full { 3 } else { 2 };
    let lits: Vec<i64> = (1..=vars).flat_map(|v| [v, -v]).collect();
    let clauses: Vec<Vec<i64>> = (1..1u32 << lits.len())
        .map(|mask| lits.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &l)| l).collect())
        .collect();
    let mut formulas: Vec<Cnf> = clauses.iter().map(|c| Cnf::new(vec![c.clone()])).collect();
    for a in &clauses {
        for b in &clauses {
            formulas.push(Cnf::new(vec![a.clone(), b.clone()]));
        }
    }
    for f in formulas {
        let Ok(input) = f.encode() else { continue };
        let got = accepts(&m, &input, polylogcnfsat_budget(input.len(), 1));
        t.record(got == f.brute_force_sat(), || format!("{f}"));
    }
    t.finish()
}

fn graph(n: usize, edges: &[(usize, usize)]) -> Structure {
    let vocab = Vocabulary::new().with_relation("V", 1).unwrap().with_relation("E", 2).unwrap();
    let e: TupleSet = edges.iter().flat_map(|&(a, b)| [vec![a, b], vec![b, a]]).collect();
    let v: TupleSet = (0..n).map(|x| vec![x]).collect();
    Structure::new(vocab, n, Interpretation::new().relation("V", v).relation("E", e)).unwrap()
}

fn has_clique(n: usize, edges: &[(usize, usize)], size: usize) -> bool {
    let adj = |a: usize, b: usize| edges.iter().any(|&(x, y)| (x, y) == (a, b) || (y, x) == (a, b));
    (0u32..1 << n).filter(|m| m.count_ones() as usize == size).any(|m| {
        let vs: Vec<usize> = (0..n).filter(|i| m >> i & 1 == 1).collect();
        vs.iter().enumerate().all(|(i, &a)| vs[i + 1..].iter().all(|&b| adj(a, b)))
    })
}

fn clique(full: bool, cfg: &EvalConfig) -> SuiteResult {
    let mut t = Tally::new("clique");
    let f = clique_formula(1);
    let pairs: Vec<(usize, usize)> = (0..4).flat_map(|a| (a + 1..4).map(move |b| (a, b))).collect();
    for mask in 0u32..1 << pairs.len() {
        let edges: Vec<_> = pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e).collect();
        let got = holds(&graph(4, &edges), &Valuation::new(), &f, cfg);
        t.record(got == Some(has_clique(4, &edges, 2)), || format!("4 vertices, edges {edges:?}"));
    }
    if full {
        let mut rng = StdRng::seed_from_u64(8);
        for _ in 0..50 {
            let edges: Vec<_> =
                (0..8).flat_map(|a| (a + 1..8).map(move |b| (a, b))).filter(|_| rng.gen_bool(0.3)).collect();
            let got = holds(&graph(8, &edges), &Valuation::new(), &f, cfg);
            t.record(got == Some(has_clique(8, &edges, 3)), || format!("8 vertices, edges {edges:?}"));
        }
    }
    t.finish()
}

fn capture(cfg: &EvalConfig) -> SuiteResult {
    let mut t = Tally::new("capture");
    let vocab = Vocabulary::new().with_relation("R", 1).unwrap();
    let mut structures = all_structures(&vocab, 2);
    structures.extend(all_structures(&vocab, 3));
    for toy in toy_corpus() {
        match verify_capture(&toy.machine(), 2, 1, &structures, 3, cfg) {
            Ok(report) => {
                for e in &report.entries {
                    t.record(e.agreement, || format!("{} on {}", toy.name, e.structure));
                }
            }
            Err(e) => t.record(false, || format!("{}: {e}", toy.name)),
        }
    }
    t.finish()
}
