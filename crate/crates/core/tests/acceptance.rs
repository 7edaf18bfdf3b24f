//! The twelve acceptance criteria, one line each. Runs as a plain binary so
//! the report is printed even when everything passes; exits non-zero when
//! any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use common::{unary_structures, FormulaGen, Reference};
use soplog::eval::{
    enumerate_relations, eval, ground_solve, relation_count, EvalConfig, GroundOutcome, Strategy, Valuation,
};
use soplog::faginc::{all_structures, toy_corpus, verify_capture};
use soplog::formula::{and, classify, desugar, exists_all, iff, not, to_snf, Formula, FragmentLabel, SoVar};
use soplog::macros::{
    bdiv, bmult, bsum, clique_formula, def_k, def_relation, dnf_queries, encode_number, width, DNF_ALPHABET,
};
use soplog::ratm::{
    accepts, measure, parse_machine, polylogcnfsat_budget, polylogcnfsat_machine, Cnf, Configuration, MachineSpec,
    Mode, RunBudget,
};
use soplog::structure::{
    ceil_log2, decode_bin, encode_bin, word_model, Interpretation, Structure, TupleSet, Vocabulary,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("arithmetic oracle", arithmetic),
        ("overflow unsatisfiable", overflow),
        ("DEF uniqueness", def_uniqueness),
        ("SNF equivalence", snf_equivalence),
        ("unbounded forall rewrite", forall_rewrite),
        ("restricted forall fast path", restricted_fast_path),
        ("clique", clique),
        ("DNFSAT / NODNFSAT", dnf),
        ("polylogCNFSAT machine", cnf_machine),
        ("capture", capture),
        ("encoding round trip", round_trip),
        ("alternating acceptance", alternation),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS {name} ({detail}; {secs:.1}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name}: {detail} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn cfg() -> EvalConfig {
    EvalConfig::default()
}

fn plain(n: usize) -> Structure {
    let vocab = Vocabulary::new().with_relation("R", 1).unwrap();
    Structure::new(vocab, n, Interpretation::new().relation("R", TupleSet::new())).unwrap()
}

fn numbers(n: usize, values: &[(&str, u128)]) -> Valuation {
    values.iter().fold(Valuation::new(), |v, &(name, value)| v.with_relation(name, encode_number(n, 1, value).unwrap()))
}

fn number_vars() -> [SoVar; 4] {
    ["X", "Y", "Z", "M"].map(|name| SoVar::new(name, 2, 1))
}

/// Counts disagreements, keeping the first for the report.
#[derive(Default)]
struct Mismatches {
    cases: usize,
    bad: usize,
    first: Option<String>,
}

impl Mismatches {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.bad += 1;
            self.first.get_or_insert_with(what);
        }
    }

    fn verdict(self, unit: &str) -> Outcome {
        match self.first {
            None => Ok(format!("{} {unit}", self.cases)),
            Some(first) => Err(format!("{} of {} {unit} disagree, first: {first}", self.bad, self.cases)),
        }
    }
}

fn arithmetic() -> Outcome {
    let [x, y, z, m] = number_vars();
    let (sum, mult, div) = (bsum(1, &x, &y, &z), bmult(1, &x, &y, &z), bdiv(1, &x, &y, &z, &m));
    let mut tally = Mismatches::default();
    for n in [4, 5, 8] {
        let s = plain(n);
        let top = 1u128 << width(n, 1);
        for a in 0..top {
            for b in 0..top {
                for c in 0..top {
                    let val = numbers(n, &[("X", a), ("Y", b), ("Z", c)]);
                    tally.check(eval(&s, &val, &sum, &cfg()) == Ok(a + b == c), || format!("n={n} {a}+{b}={c}"));
                    tally.check(eval(&s, &val, &mult, &cfg()) == Ok(a * b == c), || format!("n={n} {a}*{b}={c}"));
                    for r in 0..top {
                        let val = numbers(n, &[("X", a), ("Y", b), ("Z", c), ("M", r)]);
                        let expected = b != 0 && a == b * c + r && r < b;
                        tally.check(eval(&s, &val, &div, &cfg()) == Ok(expected), || format!("n={n} {a}={b}*{c}+{r}"));
                    }
                }
            }
        }
    }
    tally.verdict("cases")
}

fn overflow() -> Outcome {
    let n = 4;
    let [x, y, z, _] = number_vars();
    let (sum, mult) = (bsum(1, &x, &y, &z), bmult(1, &x, &y, &z));
    let s = plain(n);
    let top = 1u128 << width(n, 1);
    let candidates: Vec<TupleSet> = enumerate_relations(n, 2, 1, 1_000_000).unwrap().collect();
    let mut tally = Mismatches::default();
    let mut pairs = 0;
    for a in 0..top {
        for b in 0..top {
            for (f, op, value) in [(&sum, '+', a + b), (&mult, '*', a * b)] {
                if value < top {
                    continue;
                }
                pairs += 1;
                for rel in &candidates {
                    let val = numbers(n, &[("X", a), ("Y", b)]).with_relation("Z", rel.clone());
                    tally.check(eval(&s, &val, f, &cfg()) == Ok(false), || format!("{a}{op}{b} satisfied by Z={rel:?}"));
                }
            }
        }
    }
    tally.verdict("(operation, Z) pairs").map(|d| format!("{pairs} out-of-range operations, {d}"))
}

/// Exhaustive count where the candidate space is small; otherwise a
/// complete SAT search for a satisfying relation other than `B^k`.
fn def_uniqueness() -> Outcome {
    let mut report = Vec::new();
    for n in 2..=8 {
        for k in 1..=2 {
            let s = plain(n);
            let i = SoVar::new("I", k, k);
            let def = def_k(k, &i);
            let expected = def_relation(n, k);
            if relation_count(n, k, k) <= 200_000 {
                let satisfying: Vec<TupleSet> = enumerate_relations(n, k, k, 1_000_000)
                    .unwrap()
                    .filter(|rel| eval(&s, &Valuation::new().with_relation("I", rel.clone()), &def, &cfg()) == Ok(true))
                    .collect();
                if satisfying != [expected.clone()] {
                    return Err(format!("n={n} k={k}: {} satisfying relations", satisfying.len()));
                }
                report.push("e");
            } else {
                let holds = eval(&s, &Valuation::new().with_relation("I", expected.clone()), &def, &cfg());
                if holds != Ok(true) {
                    return Err(format!("n={n} k={k}: B^k does not satisfy DEF ({holds:?})"));
                }
                let d = SoVar::new("D", k, k);
                let xs: Vec<String> = (0..k).map(|j| format!("x{j}")).collect();
                let differs = exists_all(xs.clone(), not(iff(i.at(xs.clone()), d.at(xs))));
                let other = and(vec![def.clone(), differs]);
                let val = Valuation::new().with_relation("D", expected);
                match ground_solve(&s, &val, &other, std::slice::from_ref(&i), &cfg()) {
                    Ok(GroundOutcome::Unsat) => report.push("s"),
                    Ok(GroundOutcome::Sat(w)) => {
                        return Err(format!("n={n} k={k}: second solution {:?}", w.second_order.get("I")))
                    }
                    Err(e) => return Err(format!("n={n} k={k}: {e}")),
                }
            }
        }
    }
    let exhaustive = report.iter().filter(|r| **r == "e").count();
    Ok(format!("{exhaustive} (n, k) exhaustive, {} by SAT", report.len() - exhaustive))
}

fn has_forall(f: &Formula) -> bool {
    use Formula::*;
    match f {
        Forall(..) => true,
        Not(g) | Exists(_, g) | ForallIn(_, _, g) | SoExists(_, g) | SoForall(_, g) => has_forall(g),
        And(gs) | Or(gs) => gs.iter().any(has_forall),
        Implies(a, b) | Iff(a, b) => has_forall(a) || has_forall(b),
        _ => false,
    }
}

fn has_restricted(f: &Formula) -> bool {
    use Formula::*;
    match f {
        ForallIn(..) => true,
        Not(g) | Exists(_, g) | Forall(_, g) | SoExists(_, g) | SoForall(_, g) => has_restricted(g),
        And(gs) | Or(gs) => gs.iter().any(has_restricted),
        Implies(a, b) | Iff(a, b) => has_restricted(a) || has_restricted(b),
        _ => false,
    }
}

/// Random depth-4 sentences satisfying `keep`, each paired with its
/// reference truth value on every unary structure of size 2 and 3.
fn random_sentences(seed: u64, count: usize, keep: fn(&Formula) -> bool) -> Vec<(Formula, Vec<bool>)> {
    let structures = unary_structures(&[2, 3]);
    let mut gen = FormulaGen::new(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let f = gen.sentence(4);
        if keep(&f) {
            let truth = structures.iter().map(|s| Reference::new(s).holds(&f)).collect();
            out.push((f, truth));
        }
    }
    out
}

fn compare_on_family(formulas: &[(Formula, Vec<bool>)], mut under_test: impl FnMut(&Structure, &Formula) -> Result<bool, String>) -> Outcome {
    let structures = unary_structures(&[2, 3]);
    let mut tally = Mismatches::default();
    for (f, truth) in formulas {
        for (s, &expected) in structures.iter().zip(truth) {
            let got = under_test(s, f);
            tally.check(got == Ok(expected), || format!("{f:?} on n={}: expected {expected}, got {got:?}", s.size()));
        }
    }
    tally.verdict("formula/structure pairs")
}

fn snf_equivalence() -> Outcome {
    let formulas = random_sentences(4, 200, |_| true);
    let structures = unary_structures(&[2, 3]);
    for (f, _) in &formulas {
        if classify(&to_snf(f)) == FragmentLabel::NotSnf {
            return Err(format!("to_snf left SO quantifiers in the matrix of {f:?}"));
        }
    }
    let mut tally = Mismatches::default();
    for (f, truth) in &formulas {
        let g = to_snf(f);
        for (s, &expected) in structures.iter().zip(truth) {
            let direct = eval(s, &Valuation::new(), f, &cfg());
            let normal = eval(s, &Valuation::new(), &g, &cfg());
            tally.check(direct == Ok(expected) && normal == Ok(expected), || {
                format!("{f:?} on n={}: reference {expected}, eval {direct:?}, snf {normal:?}", s.size())
            });
        }
    }
    tally.verdict("formula/structure pairs")
}

fn forall_rewrite() -> Outcome {
    let formulas = random_sentences(5, 200, has_forall);
    let enumerate = EvalConfig { strategy: Strategy::Enumerate, ..cfg() };
    compare_on_family(&formulas, |s, f| {
        let g = desugar(f);
        if has_forall(&g) {
            return Err("unbounded ∀ survived".into());
        }
        eval(s, &Valuation::new(), &g, &enumerate).map_err(|e| e.to_string())
    })
}

fn restricted_fast_path() -> Outcome {
    let formulas = random_sentences(6, 200, has_restricted);
    let fast = EvalConfig { strategy: Strategy::Enumerate, ..cfg() };
    let naive = EvalConfig { naive_restricted: true, ..fast.clone() };
    compare_on_family(&formulas, |s, f| {
        let a = eval(s, &Valuation::new(), f, &fast).map_err(|e| e.to_string())?;
        let b = eval(s, &Valuation::new(), f, &naive).map_err(|e| e.to_string())?;
        if a == b {
            Ok(a)
        } else {
            Err(format!("fast {a}, naive {b}"))
        }
    })
}

fn graph(n: usize, edges: &[(usize, usize)]) -> Structure {
    let vocab = Vocabulary::new().with_relation("V", 1).unwrap().with_relation("E", 2).unwrap();
    let e: TupleSet = edges.iter().flat_map(|&(a, b)| [vec![a, b], vec![b, a]]).collect();
    let v: TupleSet = (0..n).map(|x| vec![x]).collect();
    Structure::new(vocab, n, Interpretation::new().relation("V", v).relation("E", e)).unwrap()
}

fn brute_clique(n: usize, edges: &[(usize, usize)], size: usize) -> bool {
    let adjacent = |a: usize, b: usize| edges.contains(&(a, b)) || edges.contains(&(b, a));
    (0u32..1 << n).filter(|m| m.count_ones() as usize == size).any(|m| {
        let vs: Vec<usize> = (0..n).filter(|i| m >> i & 1 == 1).collect();
        vs.iter().enumerate().all(|(i, &a)| vs[i + 1..].iter().all(|&b| adjacent(a, b)))
    })
}

fn clique() -> Outcome {
    let f = clique_formula(1);
    let mut tally = Mismatches::default();
    let pairs: Vec<(usize, usize)> = (0..4).flat_map(|a| (a + 1..4).map(move |b| (a, b))).collect();
    for mask in 0u32..1 << pairs.len() {
        let edges: Vec<_> = pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e).collect();
        let got = eval(&graph(4, &edges), &Valuation::new(), &f, &cfg());
        tally.check(got == Ok(brute_clique(4, &edges, 2)), || format!("4 vertices {edges:?}: {got:?}"));
    }
    let mut rng = StdRng::seed_from_u64(8);
    for _ in 0..50 {
        let edges: Vec<_> = (0..8).flat_map(|a| (a + 1..8).map(move |b| (a, b))).filter(|_| rng.gen_bool(0.35)).collect();
        let got = eval(&graph(8, &edges), &Valuation::new(), &f, &cfg());
        tally.check(got == Ok(brute_clique(8, &edges, 3)), || format!("8 vertices {edges:?}: {got:?}"));
    }
    tally.verdict("graphs")
}

/// All DNF words over `X0`, `X1`, `X10` with one or two clauses; each
/// variable occurs in a clause not at all, positively, negatively or both.
fn dnf_words() -> Vec<String> {
    let names = ["X0", "X1", "X10"];
    let clauses: Vec<String> = (1..64usize)
        .map(|code| {
            let mut lits = Vec::new();
            for (v, name) in names.iter().enumerate() {
                let sel = code >> (2 * v) & 3;
                if sel & 1 == 1 {
                    lits.push(name.to_string());
                }
                if sel & 2 == 2 {
                    lits.push(format!("¬{name}"));
                }
            }
            format!("({})", lits.join("∧"))
        })
        .collect();
    let mut words = clauses.clone();
    for a in &clauses {
        for b in &clauses {
            words.push(format!("{a}∨{b}"));
        }
    }
    words
}

/// Satisfiability by trying every assignment to the variables in the word.
fn truth_table(word: &str) -> bool {
    let clauses: Vec<Vec<(bool, &str)>> = word
        .split('∨')
        .map(|c| {
            c.trim_matches(|ch| ch == '(' || ch == ')')
                .split('∧')
                .map(|lit| match lit.strip_prefix('¬') {
                    Some(v) => (false, v),
                    None => (true, lit),
                })
                .collect()
        })
        .collect();
    let vars: Vec<&str> = clauses.iter().flatten().map(|&(_, v)| v).collect::<BTreeSet<_>>().into_iter().collect();
    (0u32..1 << vars.len()).any(|assignment| {
        let value = |v: &str| assignment >> vars.iter().position(|&w| w == v).unwrap() & 1 == 1;
        clauses.iter().any(|c| c.iter().all(|&(sign, v)| value(v) == sign))
    })
}

fn dnf() -> Outcome {
    let (sat, nosat) = dnf_queries();
    let mut tally = Mismatches::default();
    for word in dnf_words() {
        let s = word_model(&DNF_ALPHABET, &word).map_err(|e| e.to_string())?;
        let expected = truth_table(&word);
        let a = eval(&s, &Valuation::new(), &sat, &cfg());
        let b = eval(&s, &Valuation::new(), &nosat, &cfg());
        tally.check(a == Ok(expected) && b == Ok(!expected), || format!("{word}: expected {expected}, got {a:?}/{b:?}"));
    }
    tally.verdict("words")
}

fn cnf_sat(clauses: &[Vec<i64>]) -> bool {
    (0u32..8).any(|assignment| {
        clauses.iter().all(|c| c.iter().any(|&l| (assignment >> (l.unsigned_abs() - 1) & 1 == 1) == (l > 0)))
    })
}

fn cnf_machine() -> Outcome {
    let m = polylogcnfsat_machine(1).map_err(|e| e.to_string())?;
    let lits = [1i64, -1, 2, -2, 3, -3];
    let clauses: Vec<Vec<i64>> = (1u32..64)
        .map(|mask| lits.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &l)| l).collect())
        .collect();
    let mut formulas: Vec<Vec<Vec<i64>>> = clauses.iter().map(|c| vec![c.clone()]).collect();
    for a in &clauses {
        for b in &clauses {
            formulas.push(vec![a.clone(), b.clone()]);
        }
    }
    let mut tally = Mismatches::default();
    for f in &formulas {
        let cnf = Cnf::new(f.clone());
        let input = cnf.encode().map_err(|e| format!("{cnf}: {e}"))?;
        let r = measure(&m, &input, polylogcnfsat_budget(input.len(), 1));
        tally.check(r.accepted == cnf_sat(f) && !r.exhausted, || format!("{cnf}: {r}"));
    }
    let agreement = tally.verdict("formulas")?;

    // growth: ℓ − 5 satisfiable two-literal clauses at each length
    let mut points = Vec::new();
    for len in (6..=12).map(|e| 1usize << e) {
        let l = soplog::ratm::address_length(len);
        let clauses: Vec<Vec<i64>> = (1..=(l - 5) as i64).map(|i| vec![i, i + 1]).collect();
        let input = Cnf::new(clauses).encode_to_length(len).map_err(|e| e.to_string())?;
        let r = measure(&m, &input, polylogcnfsat_budget(len, 1));
        if !r.accepted || r.exhausted {
            return Err(format!("length {len}: {r}"));
        }
        points.push((ceil_log2(len) as f64, r.steps as f64));
    }
    if points.windows(2).any(|w| w[1].1 < w[0].1) {
        return Err(format!("steps not monotone: {points:?}"));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().map(|&(l, s)| (l.ln(), s.ln())).unzip();
    let count = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / count, ys.iter().sum::<f64>() / count);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    let scale = (my - slope * mx).exp();
    let residual = points
        .iter()
        .map(|&(l, s)| {
            let fit = scale * l.powf(slope);
            (s - fit).abs() / fit
        })
        .fold(0.0, f64::max);
    let fit = format!("steps ≈ {scale:.2}·⌈log n̂⌉^{slope:.2}, max relative residual {:.1}%", residual * 100.0);
    if slope <= 0.0 || residual >= 0.2 {
        return Err(format!("{agreement}; {fit}"));
    }
    Ok(format!("{agreement}; {fit}"))
}

fn capture() -> Outcome {
    let vocab = Vocabulary::new().with_relation("R", 1).unwrap();
    let mut structures = all_structures(&vocab, 2);
    structures.extend(all_structures(&vocab, 3));
    let corpus = toy_corpus();
    for required in ["first_bit", "always_reject"] {
        if !corpus.iter().any(|t| t.name == required) {
            return Err(format!("corpus lacks {required}"));
        }
    }
    let mut tally = Mismatches::default();
    for toy in &corpus {
        let report = verify_capture(&toy.machine(), 2, 1, &structures, 3, &cfg()).map_err(|e| e.to_string())?;
        for e in &report.entries {
            tally.check(e.agreement, || format!("{} on n={} {}: {:?}", toy.name, e.n, e.structure, e.formula_holds));
        }
        if report.entries.len() != structures.len() {
            return Err(format!("{}: {} of {} structures reported", toy.name, report.entries.len(), structures.len()));
        }
    }
    tally.verdict("machine/structure pairs").map(|d| format!("{} machines, {d}", corpus.len()))
}

fn round_trip() -> Outcome {
    let mut rng = StdRng::seed_from_u64(11);
    let mut tally = Mismatches::default();
    for _ in 0..100 {
        let n = rng.gen_range(2..=8);
        let mut vocab = Vocabulary::new();
        let mut interp = Interpretation::new();
        for r in 0..rng.gen_range(1..=3) {
            let name = format!("R{r}");
            let arity = rng.gen_range(1..=2);
            vocab.add_relation(&name, arity).unwrap();
            let p = rng.gen::<f64>();
            let tuples: TupleSet = soplog::structure::all_tuples(n, arity).filter(|_| rng.gen_bool(p)).collect();
            interp = interp.relation(&name, tuples);
        }
        for c in 0..rng.gen_range(0..=2) {
            let name = format!("c{c}");
            vocab.add_constant(&name).unwrap();
            interp = interp.constant(&name, rng.gen_range(0..n));
        }
        let s = Structure::new(vocab.clone(), n, interp).unwrap();
        let bits = encode_bin(&s);
        let back = decode_bin(&vocab, n, &bits);
        tally.check(back.as_ref() == Ok(&s), || format!("n={n} {bits}: {back:?}"));
    }
    tally.verdict("structures")
}

const EXISTS_FORALL: &str = "format v1
tapes 0
state g exists
state u forall
state c forall
state yes accept
start g
rule g -> u awrite=0 amove=R
rule g -> u awrite=1 amove=R
rule u -> c
rule u -> c awrite=1
rule c read=1 -> yes
";

const FORALL_EXISTS: &str = "format v1
tapes 0
state u forall
state e exists
state f exists
state c exists
state yes accept
state no reject
start u
rule u -> e awrite=0
rule u -> e awrite=1
rule e -> f amove=R
rule f -> c awrite=0
rule f -> c awrite=1
rule c read=1 -> yes
rule c read=0 -> no
";

const GUESS_THEN_CHECK: &str = "format v1
tapes 1
state g exists
state u forall
state w forall
state yes accept
start g
rule g addr=0 -> g awrite=0 amove=R write_0=0 move_0=R
rule g addr=0 -> g awrite=1 amove=R write_0=1 move_0=R
rule g addr=1 -> g awrite=0 amove=R write_0=0 move_0=R
rule g addr=1 -> g awrite=1 amove=R write_0=1 move_0=R
rule g addr=_ -> u move_0=L
rule u read=1 -> yes
rule u -> w amove=L
rule w wt_0=1 -> yes
";

const PING_PONG: &str = "format v1
tapes 0
state e exists
state u forall
state yes accept
start e
rule e -> e
rule e -> u
rule u -> yes
rule u -> e
";

/// Recursive AND/OR acceptance over the computation tree, cut at the
/// budget: a non-final node at the step limit, or a node beyond the
/// alternation limit, does not accept.
fn tree_walk(m: &MachineSpec, c: &Configuration, input: &[char], budget: RunBudget) -> bool {
    if c.alternations > budget.max_alternations {
        return false;
    }
    match m.mode(c.state) {
        Mode::Accept => true,
        Mode::Reject => false,
        _ if c.steps >= budget.max_steps => false,
        mode => {
            let succ = m.step(c, input).expect("non-final");
            match mode {
                Mode::Existential => succ.iter().any(|(_, d)| tree_walk(m, d, input, budget)),
                _ => !succ.is_empty() && succ.iter().all(|(_, d)| tree_walk(m, d, input, budget)),
            }
        }
    }
}

fn tree_size(m: &MachineSpec, c: &Configuration, input: &[char], budget: RunBudget) -> usize {
    if m.mode(c.state).is_final() || c.steps >= budget.max_steps || c.alternations > budget.max_alternations {
        return 1;
    }
    1 + m.step(c, input).expect("non-final").iter().map(|(_, d)| tree_size(m, d, input, budget)).sum::<usize>()
}

fn alternation() -> Outcome {
    let machines = [EXISTS_FORALL, FORALL_EXISTS, GUESS_THEN_CHECK, PING_PONG];
    let mut tally = Mismatches::default();
    let mut skipped = 0;
    let mut accepted = 0;
    for text in machines {
        let m = parse_machine(text).map_err(|e| e.to_string())?;
        for len in 1..=6 {
            for word in 0u32..1 << len {
                let input: Vec<char> = (0..len).map(|i| if word >> i & 1 == 1 { '1' } else { '0' }).collect();
                for steps in [1, 2, 3, 4, 6, 9] {
                    for alternations in [0, 1, 2, usize::MAX] {
                        let budget = RunBudget { max_steps: steps, max_alternations: alternations };
                        let root = m.initial(input.len());
                        if tree_size(&m, &root, &input, budget) > 100 {
                            skipped += 1;
                            continue;
                        }
                        let expected = tree_walk(&m, &root, &input, budget);
                        accepted += expected as usize;
                        let got = accepts(&m, &input, budget);
                        let reported = measure(&m, &input, budget).accepted;
                        tally.check(got == expected && reported == expected, || {
                            format!("{:?} steps={steps} alt={alternations}: oracle {expected}, simulator {got}", input)
                        });
                    }
                }
            }
        }
    }
    tally.verdict("trees").map(|d| format!("{d}, {accepted} accepting, {skipped} over 100 nodes skipped"))
}
