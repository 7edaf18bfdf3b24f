//! Command-line front end. Every command reads its inputs from files or
//! flags, writes its answer to `out` and diagnostics to `err`, and maps the
//! outcome onto a fixed exit code.

mod selftest;

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::eval::{check_witness, eval, find_witness, EvalConfig, EvalError, Valuation};
use crate::faginc::{self, CompilationPlan, CompileError};
use crate::formula::{classify, parse, pretty, to_snf, Formula, ParseError, Pred, SoVar, Term};
use crate::macros::{self, CmpMode, DNF_ALPHABET};
use crate::ratm::{self, bits_input, BuildError, Cnf, MachineSpec, RunBudget};
use crate::structure::{
    decode_bin, encode_bin, parse_structure, word_model, write_structure, BitString, Structure, StructureError,
    Tuple, Vocabulary,
};

pub use selftest::{run_suites, SuiteResult};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
    #[error("formula: {0}")]
    Formula(#[from] ParseError),
    #[error("structure: {0}")]
    Structure(#[from] StructureError),
    #[error("machine: {0}")]
    Machine(#[from] BuildError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error("{0}")]
    Resource(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Eval(EvalError::ResourceExceeded { .. } | EvalError::Budget(_) | EvalError::DepthExceeded(_))
            | CliError::Resource(_) => EXIT_RESOURCE,
            _ => EXIT_USAGE,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "soplog", version, about = "Bounded second-order logic, polylog-time machines and the compiler between them")]
pub struct Cli {
    #[command(flatten)]
    pub limits: Limits,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Limits {
    /// Most candidate relations a single quantifier may enumerate
    #[arg(long, global = true, default_value_t = 2_000_000)]
    pub max_candidates: u64,
    /// Step budget for machine runs
    #[arg(long, global = true)]
    pub max_steps: Option<usize>,
    /// Worker threads
    #[arg(long, global = true, env = "SOPLOG_THREADS", default_value_t = 1)]
    pub threads: usize,
}

impl Limits {
    fn eval_config(&self) -> EvalConfig {
        EvalConfig { max_candidates: self.max_candidates, threads: self.threads.max(1), ..EvalConfig::default() }
    }
}

/// Where a structure comes from.
#[derive(Debug, Args)]
pub struct StructureSource {
    /// Structure file
    #[arg(long, short = 's', conflicts_with = "word")]
    pub structure: Option<PathBuf>,
    /// Word model over the DNF alphabet, e.g. `(X1∧¬X10)∨(X0)`
    #[arg(long)]
    pub word: Option<String>,
}

impl StructureSource {
    fn load(&self) -> Result<Structure> {
        match (&self.structure, &self.word) {
            (Some(p), _) => Ok(parse_structure(&read(p)?)?),
            (None, Some(w)) => Ok(word_model(&DNF_ALPHABET, w)?),
            (None, None) => Err(CliError::Usage("give --structure or --word".into())),
        }
    }
}

/// Where a machine comes from.
#[derive(Debug, Args)]
pub struct MachineSource {
    /// Machine file, raw (`format v1`) or builder (`builder v1`)
    #[arg(long, short = 'm', conflicts_with = "cnfsat")]
    pub machine: Option<PathBuf>,
    /// Use the generated CNF satisfiability machine for clause bound exponent K
    #[arg(long, value_name = "K")]
    pub cnfsat: Option<u32>,
}

impl MachineSource {
    fn load(&self) -> Result<MachineSpec> {
        match (&self.machine, self.cnfsat) {
            (Some(p), _) => Ok(ratm::load_machine(&read(p)?)?),
            (None, Some(k)) => ratm::polylogcnfsat_machine(k).map_err(|e| CliError::Usage(e.to_string())),
            (None, None) => Err(CliError::Usage("give --machine or --cnfsat".into())),
        }
    }
}

/// Machine input: a symbol string, a CNF or a structure's encoding.
#[derive(Debug, Args)]
pub struct InputSource {
    /// Input word, one symbol per character
    #[arg(long, short = 'i', conflicts_with_all = ["cnf", "structure"])]
    pub input: Option<String>,
    /// CNF formula such as `(+1 -2)(2)`, encoded for the CNF machine
    #[arg(long, conflicts_with = "structure")]
    pub cnf: Option<String>,
    /// Pad the CNF encoding to this many cells
    #[arg(long, requires = "cnf")]
    pub length: Option<usize>,
    /// Run on the encoding of this structure
    #[arg(long, short = 's')]
    pub structure: Option<PathBuf>,
}

impl InputSource {
    fn load(&self) -> Result<Vec<char>> {
        if let Some(w) = &self.input {
            return Ok(w.chars().collect());
        }
        if let Some(text) = &self.cnf {
            let cnf: Cnf = text.parse().map_err(|e| CliError::Usage(format!("cnf: {e}")))?;
            let word = match self.length {
                Some(len) => cnf.encode_to_length(len),
                None => cnf.encode(),
            };
            return word.map_err(|e| CliError::Usage(format!("cnf: {e}")));
        }
        if let Some(p) = &self.structure {
            return Ok(bits_input(&encode_bin(&parse_structure(&read(p)?)?)));
        }
        Err(CliError::Usage("give --input, --cnf or --structure".into()))
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a formula and print it back, or print a built-in macro
    Parse {
        #[arg(long, short = 'f', required_unless_present = "macro_name")]
        formula: Option<PathBuf>,
        /// def, bin, eq, lt, le, bnum, bsum, bmult, bdiv, card-leq, clique, dnfsat or nodnfsat
        #[arg(long = "macro", value_name = "NAME")]
        macro_name: Option<String>,
        #[arg(long, short = 'k', default_value_t = 1)]
        k: usize,
    },
    /// Check a formula against a structure's vocabulary, or a witness against a sentence
    Check {
        #[arg(long, short = 'f')]
        formula: PathBuf,
        #[command(flatten)]
        source: StructureSource,
        /// Valuation file whose relations should witness the sentence's existential block
        #[arg(long, short = 'w')]
        witness: Option<PathBuf>,
    },
    /// Print the normal form (all second-order quantifiers in front)
    Normalize {
        #[arg(long, short = 'f')]
        formula: PathBuf,
    },
    /// Print the fragment of a formula: Sigma<m>, Pi<m> or not-SNF
    Classify {
        #[arg(long, short = 'f')]
        formula: PathBuf,
        /// Normalize first
        #[arg(long)]
        snf: bool,
    },
    /// Decide whether a structure satisfies a formula
    Eval {
        #[arg(long, short = 'f')]
        formula: PathBuf,
        #[command(flatten)]
        source: StructureSource,
        /// Values for free variables
        #[arg(long)]
        valuation: Option<PathBuf>,
        /// Scan all tuples for restricted universals instead of the bounded relation
        #[arg(long)]
        naive: bool,
    },
    /// Find relations witnessing an existential sentence
    Witness {
        #[arg(long, short = 'f')]
        formula: PathBuf,
        #[command(flatten)]
        source: StructureSource,
    },
    /// Print the bit-string encoding of a structure
    Encode {
        #[arg(long, short = 's')]
        structure: PathBuf,
    },
    /// Rebuild a structure from its encoding
    Decode {
        /// Symbols, e.g. `E:2,V:1,@c`
        #[arg(long)]
        vocab: String,
        #[arg(long, short = 'n')]
        size: usize,
        #[arg(long)]
        bits: String,
    },
    /// Run a machine and print whether it accepts
    Simulate {
        #[command(flatten)]
        machine: MachineSource,
        #[command(flatten)]
        input: InputSource,
        /// Print the configurations of an accepting path
        #[arg(long)]
        trace: bool,
    },
    /// Run a machine and report steps and alternations
    Measure {
        #[command(flatten)]
        machine: MachineSource,
        #[command(flatten)]
        input: InputSource,
    },
    /// Compile a machine into an existential sentence with its predicate manifest
    CompileMachine {
        #[command(flatten)]
        machine: MachineSource,
        /// Input symbols, e.g. `R:1,@c`
        #[arg(long)]
        vocab: String,
        /// Time stamps are k-tuples
        #[arg(long, short = 'k', default_value_t = 2)]
        k: usize,
        /// Address numbers have exponent k'
        #[arg(long, default_value_t = 1)]
        k_addr: usize,
        /// Write the sentence here instead of standard output
        #[arg(long, short = 'o')]
        out: Option<PathBuf>,
        /// Write the manifest here; otherwise it heads the sentence as comments
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Compare a machine with its compiled sentence on every small structure
    VerifyCapture {
        /// Machine file; without it the built-in toy machines are checked
        #[arg(long, short = 'm')]
        machine: Option<PathBuf>,
        #[arg(long, default_value = "R:1")]
        vocab: String,
        #[arg(long, short = 'k', default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        k_addr: usize,
        /// Structure sizes, all structures of each size are checked
        #[arg(long, value_delimiter = ',', default_value = "2,3")]
        sizes: Vec<usize>,
        /// Largest size for which rejection is confirmed by complete search
        #[arg(long, default_value_t = 3)]
        exhaustive_up_to: usize,
        /// Print every entry, not only the summary
        #[arg(long)]
        verbose: bool,
    },
    /// Run the built-in oracle suites and print a summary table
    Selftest {
        /// Larger sizes and more samples
        #[arg(long)]
        full: bool,
    },
}

/// Runs one command line (including the program name) and returns the exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn read(p: &Path) -> Result<String> {
    std::fs::read_to_string(p).map_err(|source| CliError::Io { path: p.to_path_buf(), source })
}

fn write_file(p: &Path, text: &str) -> Result<()> {
    std::fs::write(p, text).map_err(|source| CliError::Io { path: p.to_path_buf(), source })
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes()).map_err(|source| CliError::Io { path: "<stdout>".into(), source })
}

/// Reads a `.sop` file; a leading `format v1` line is optional.
pub fn read_formula(p: &Path) -> Result<Formula> {
    let text = read(p)?;
    Ok(parse(strip_header(&text)?)?)
}

fn strip_header(text: &str) -> Result<&str> {
    let trimmed = text.trim_start();
    match trimmed.strip_prefix("format") {
        Some(rest) => {
            let rest = rest.trim_start_matches([' ', '\t']);
            match rest.strip_prefix("v1") {
                Some(body) if body.starts_with(['\n', '\r']) || body.is_empty() => Ok(body),
                _ => Err(CliError::Usage("unsupported format line".into())),
            }
        }
        None => Ok(text),
    }
}

/// Parses `E:2,V:1,@c` into a vocabulary.
pub fn parse_vocab(spec: &str) -> Result<Vocabulary> {
    let mut v = Vocabulary::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some(c) = item.strip_prefix('@') {
            v.add_constant(c)?;
        } else {
            let (name, arity) = item
                .split_once(':')
                .ok_or_else(|| CliError::Usage(format!("vocabulary item `{item}` needs NAME:ARITY or @NAME")))?;
            let arity = arity.parse().map_err(|_| CliError::Usage(format!("bad arity in `{item}`")))?;
            v.add_relation(name, arity)?;
        }
    }
    Ok(v)
}

/// Renders a valuation in the line format read by [`parse_valuation`].
pub fn write_valuation(v: &Valuation) -> String {
    let mut out = String::from("format v1\n");
    for (x, e) in &v.first_order {
        let _ = writeln!(out, "elem {x} {e}");
    }
    for (name, rel) in &v.second_order {
        let _ = writeln!(out, "so {name}");
        for t in rel {
            let vals: Vec<String> = t.iter().map(usize::to_string).collect();
            let _ = writeln!(out, "tuple {}", vals.join(" "));
        }
    }
    out
}

/// A valuation file: explicit relations plus `num NAME VALUE` lines, which
/// become binary numbers once the structure size and exponents are known.
#[derive(Debug, Clone, Default)]
pub struct ValuationFile {
    pub valuation: Valuation,
    pub numbers: Vec<(String, u128)>,
}

impl ValuationFile {
    /// Encodes the numbers for free variables of `f` on `n` elements.
    pub fn resolve(&self, f: &Formula, n: usize) -> Result<Valuation> {
        let mut v = self.valuation.clone();
        let free = f.free_vars().second_order;
        for (name, value) in &self.numbers {
            let var = free
                .iter()
                .find(|x| &x.name == name)
                .ok_or_else(|| CliError::Usage(format!("number {name} is not a free variable of the formula")))?;
            let rel = macros::encode_number(n, var.exponent, *value).map_err(|e| CliError::Usage(format!("{name}: {e}")))?;
            v.second_order.insert(name.clone(), rel);
        }
        Ok(v)
    }
}

pub fn parse_valuation(text: &str) -> Result<ValuationFile> {
    let mut file = ValuationFile::default();
    let v = &mut file.valuation;
    let mut current: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |msg: &str| CliError::Usage(format!("valuation line {}: {msg}", idx + 1));
        let words: Vec<&str> = line.split_whitespace().collect();
        let num = |w: &str| w.parse::<usize>().map_err(|_| bad(&format!("expected a number, got `{w}`")));
        match words.as_slice() {
            ["format", "v1"] => {}
            ["elem", x, e] => {
                v.first_order.insert((*x).into(), num(e)?);
            }
            ["so", name] => {
                v.second_order.entry((*name).into()).or_default();
                current = Some((*name).into());
            }
            ["tuple", vals @ ..] => {
                let name = current.as_ref().ok_or_else(|| bad("tuple outside an so block"))?;
                let t = vals.iter().map(|w| num(w)).collect::<Result<Tuple>>()?;
                v.second_order.get_mut(name).unwrap().insert(t);
            }
            ["num", name, value] => {
                let value = value.parse().map_err(|_| bad(&format!("expected a number, got `{value}`")))?;
                file.numbers.push(((*name).into(), value));
                current = None;
            }
            _ => return Err(bad("unrecognized line")),
        }
    }
    Ok(file)
}

fn verdict(b: bool) -> &'static str {
    if b {
        "true\n"
    } else {
        "false\n"
    }
}

fn budget(limits: &Limits, default: RunBudget) -> RunBudget {
    limits.max_steps.map(RunBudget::steps).unwrap_or(default)
}

const DEFAULT_STEPS: usize = 100_000;

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let cfg = cli.limits.eval_config();
    match &cli.command {
        Command::Parse { formula, macro_name, k } => {
            let f = match (formula, macro_name) {
                (Some(p), _) => read_formula(p)?,
                (None, Some(name)) => macro_formula(name, *k)?,
                (None, None) => unreachable!("clap requires one of them"),
            };
            emit(out, &format!("{}\n", pretty(&f)))?;
            Ok(EXIT_OK)
        }
        Command::Check { formula, source, witness } => {
            let f = read_formula(formula)?;
            let s = source.load()?;
            let problems = vocabulary_problems(&f, s.vocabulary());
            if !problems.is_empty() {
                for p in &problems {
                    writeln!(err, "{p}").ok();
                }
                emit(out, "false\n")?;
                return Ok(EXIT_NEGATIVE);
            }
            let ok = match witness {
                Some(w) => check_witness(&s, &f, &parse_valuation(&read(w)?)?.resolve(&f, s.size())?, &cfg)?,
                None => true,
            };
            emit(out, verdict(ok))?;
            Ok(if ok { EXIT_OK } else { EXIT_NEGATIVE })
        }
        Command::Normalize { formula } => {
            let f = read_formula(formula)?;
            emit(out, &format!("{}\n", pretty(&to_snf(&f))))?;
            Ok(EXIT_OK)
        }
        Command::Classify { formula, snf } => {
            let f = read_formula(formula)?;
            let f = if *snf { to_snf(&f) } else { f };
            emit(out, &format!("{}\n", classify(&f).ascii()))?;
            Ok(EXIT_OK)
        }
        Command::Eval { formula, source, valuation, naive } => {
            let f = read_formula(formula)?;
            let s = source.load()?;
            let val = match valuation {
                Some(p) => parse_valuation(&read(p)?)?.resolve(&f, s.size())?,
                None => Valuation::new(),
            };
            let cfg = EvalConfig { naive_restricted: *naive, ..cfg };
            emit(out, verdict(eval(&s, &val, &f, &cfg)?))?;
            Ok(EXIT_OK)
        }
        Command::Witness { formula, source } => {
            let f = read_formula(formula)?;
            let s = source.load()?;
            match find_witness(&s, &f, &cfg)? {
                Some(w) => {
                    emit(out, &write_valuation(&w))?;
                    Ok(EXIT_OK)
                }
                None => {
                    emit(out, "no witness\n")?;
                    Ok(EXIT_NEGATIVE)
                }
            }
        }
        Command::Encode { structure } => {
            let s = parse_structure(&read(structure)?)?;
            emit(out, &format!("{}\n", encode_bin(&s)))?;
            Ok(EXIT_OK)
        }
        Command::Decode { vocab, size, bits } => {
            let v = parse_vocab(vocab)?;
            let b: BitString = bits.parse().map_err(|_| CliError::Usage("bits must be 0/1 characters".into()))?;
            emit(out, &write_structure(&decode_bin(&v, *size, &b)?))?;
            Ok(EXIT_OK)
        }
        Command::Simulate { machine, input, trace } => {
            let m = machine.load()?;
            let word = input.load()?;
            let b = budget(&cli.limits, default_budget(machine, &word));
            let report = ratm::measure(&m, &word, b);
            if !report.accepted && report.exhausted {
                return Err(CliError::Resource(format!("step budget of {} exhausted", b.max_steps)));
            }
            emit(out, verdict(report.accepted))?;
            if *trace && report.accepted {
                if let Some(path) = ratm::accepting_path(&m, &word, b) {
                    for c in ratm::replay(&m, &word, &path) {
                        writeln!(err, "{c:?}").ok();
                    }
                }
            }
            Ok(EXIT_OK)
        }
        Command::Measure { machine, input } => {
            let m = machine.load()?;
            let word = input.load()?;
            let b = budget(&cli.limits, default_budget(machine, &word));
            let r = ratm::measure(&m, &word, b);
            let text = format!(
                "length {}\naddress_bits {}\naccepted {}\nsteps {}\nalternations {}\nexhausted {}\n",
                word.len(),
                ratm::address_length(word.len()),
                r.accepted,
                r.steps,
                r.alternations,
                r.exhausted
            );
            emit(out, &text)?;
            Ok(if r.exhausted && !r.accepted { EXIT_RESOURCE } else { EXIT_OK })
        }
        Command::CompileMachine { machine, vocab, k, k_addr, out: path, manifest } => {
            let m = machine.load()?;
            let v = parse_vocab(vocab)?;
            let plan = CompilationPlan::new(&m, *k, *k_addr, &v)?;
            let psi = faginc::compile_with_plan(&m, &plan);
            let mut listing = String::new();
            for e in plan.manifest() {
                let _ = writeln!(listing, "{} {} {} {}", e.var.name, e.var.arity, e.var.exponent, e.role);
            }
            let mut sop = String::from("format v1\n");
            match manifest {
                Some(p) => write_file(p, &format!("format v1\n# name arity exponent role\n{listing}"))?,
                None => {
                    for line in listing.lines() {
                        let _ = writeln!(sop, "# {line}");
                    }
                }
            }
            let _ = writeln!(sop, "{}", pretty(&psi));
            match path {
                Some(p) => write_file(p, &sop)?,
                None => emit(out, &sop)?,
            }
            Ok(EXIT_OK)
        }
        Command::VerifyCapture { machine, vocab, k, k_addr, sizes, exhaustive_up_to, verbose } => {
            let v = parse_vocab(vocab)?;
            let machines: Vec<(String, MachineSpec)> = match machine {
                Some(p) => vec![(p.display().to_string(), ratm::load_machine(&read(p)?)?)],
                None => faginc::toy_corpus().iter().map(|t| (t.name.to_string(), t.machine())).collect(),
            };
            let mut structures = Vec::new();
            for &n in sizes {
                if n < 2 {
                    return Err(CliError::Usage("sizes must be at least 2".into()));
                }
                structures.extend(faginc::all_structures(&v, n));
            }
            let mut all_agree = true;
            for (name, m) in &machines {
                let report = faginc::verify_capture(m, *k, *k_addr, &structures, *exhaustive_up_to, &cfg)?;
                let agree = report.entries.iter().filter(|e| e.agreement).count();
                all_agree &= report.all_agree();
                if *verbose {
                    emit(out, &format!("{name}\n{report}"))?;
                }
                emit(out, &format!("{name}: {agree}/{} agree\n", report.entries.len()))?;
            }
            Ok(if all_agree { EXIT_OK } else { EXIT_NEGATIVE })
        }
        Command::Selftest { full } => {
            let results = run_suites(*full, &cfg);
            emit(out, &selftest::table(&results))?;
            Ok(if results.iter().all(|r| r.failures == 0) { EXIT_OK } else { EXIT_NEGATIVE })
        }
    }
}

fn default_budget(machine: &MachineSource, word: &[char]) -> RunBudget {
    match machine.cnfsat {
        Some(k) => ratm::polylogcnfsat_budget(word.len(), k),
        None => RunBudget::steps(DEFAULT_STEPS),
    }
}

fn symbols(f: &Formula, rels: &mut Vec<(String, usize)>, consts: &mut Vec<String>) {
    use Formula::*;
    let terms = |args: &[Term], consts: &mut Vec<String>| {
        for t in args {
            if let Term::Const(c) = t {
                consts.push(c.clone());
            }
        }
    };
    match f {
        True | False => {}
        Atom(p, args) => {
            if let Pred::Rel(name) = p {
                rels.push((name.clone(), args.len()));
            }
            terms(args, consts);
        }
        Eq(a, b) => terms(&[a.clone(), b.clone()], consts),
        Not(g) | Exists(_, g) | Forall(_, g) | ForallIn(_, _, g) | SoExists(_, g) | SoForall(_, g) => {
            symbols(g, rels, consts)
        }
        And(gs) | Or(gs) => gs.iter().for_each(|g| symbols(g, rels, consts)),
        Implies(a, b) | Iff(a, b) => {
            symbols(a, rels, consts);
            symbols(b, rels, consts);
        }
    }
}

/// Reasons the formula is not a sentence over the vocabulary.
fn vocabulary_problems(f: &Formula, v: &Vocabulary) -> Vec<String> {
    let (mut rels, mut consts) = (Vec::new(), Vec::new());
    symbols(f, &mut rels, &mut consts);
    rels.sort();
    rels.dedup();
    consts.sort();
    consts.dedup();
    let mut problems = Vec::new();
    for (name, arity) in rels {
        match v.relation_arity(&name) {
            Some(a) if a == arity => {}
            Some(a) => problems.push(format!("relation {name} has arity {a}, used with {arity}")),
            None => problems.push(format!("relation {name} is not in the vocabulary")),
        }
    }
    for c in consts {
        if !v.has_constant(&c) {
            problems.push(format!("constant {c} is not in the vocabulary"));
        }
    }
    let free = f.free_vars();
    for x in &free.first_order {
        problems.push(format!("free variable {x}"));
    }
    for x in &free.second_order {
        problems.push(format!("free second-order variable {}", x.name));
    }
    problems
}

fn number(name: &str, k: usize) -> SoVar {
    SoVar::new(name, k + 1, k)
}

/// The stand-alone macros with their free number variables `X`, `Y`, `Z`, `M`
/// (arity k+1, exponent k).
pub fn macro_formula(name: &str, k: usize) -> Result<Formula> {
    if k == 0 {
        return Err(CliError::Usage("k must be at least 1".into()));
    }
    let [x, y, z, m] = ["X", "Y", "Z", "M"].map(|n| number(n, k));
    Ok(match name {
        "def" => macros::def_k(k, &SoVar::new("I", k, k)),
        "bin" => macros::bin_k(k, &x),
        "eq" => macros::cmp_num(k, &x, &y, CmpMode::Eq),
        "lt" => macros::cmp_num(k, &x, &y, CmpMode::Lt),
        "le" => crate::formula::or(vec![
            macros::cmp_num(k, &x, &y, CmpMode::Lt),
            macros::cmp_num(k, &x, &y, CmpMode::Eq),
        ]),
        "bnum" => macros::bnum(k, &x, &Term::var("t")),
        "bsum" => macros::bsum(k, &x, &y, &z),
        "bmult" => macros::bmult(k, &x, &y, &z),
        "bdiv" => macros::bdiv(k, &x, &y, &z, &m),
        "card-leq" => macros::card_leq(&SoVar::new("X", 1, k), &SoVar::new("Y", 1, k)),
        "clique" => macros::clique_formula(k),
        "dnfsat" => macros::dnf_queries().0,
        "nodnfsat" => macros::dnf_queries().1,
        other => return Err(CliError::Usage(format!("unknown macro `{other}`"))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valuation_files_round_trip() {
        let v = Valuation::new().with_element("x", 2).with_relation("X", [vec![0, 1], vec![1, 1]]);
        let file = parse_valuation(&write_valuation(&v)).unwrap();
        assert_eq!(file.valuation, v);
        assert!(file.numbers.is_empty());
        assert!(parse_valuation("tuple 1").is_err());
        assert!(parse_valuation("elem x y").is_err());
    }

    #[test]
    fn numbers_resolve_with_the_variable_exponent() {
        let f = macro_formula("bsum", 1).unwrap();
        let file = parse_valuation("format v1\nnum X 3\nnum Y 1\nnum Z 4\n").unwrap();
        let v = file.resolve(&f, 8).unwrap();
        assert_eq!(v.second_order["Z"], macros::encode_number(8, 1, 4).unwrap());
        let stray = parse_valuation("num Q 1\n").unwrap();
        assert!(matches!(stray.resolve(&f, 8), Err(CliError::Usage(_))));
        let wide = parse_valuation("num X 99\n").unwrap();
        assert!(wide.resolve(&f, 8).is_err());
    }

    #[test]
    fn vocabulary_specs() {
        let v = parse_vocab("E:2, V:1,@c").unwrap();
        assert_eq!(v.relation_arity("E"), Some(2));
        assert!(v.has_constant("c"));
        assert!(parse_vocab("E").is_err());
        assert!(parse_vocab("E:x").is_err());
    }

    #[test]
    fn exit_code_mapping() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), EXIT_USAGE);
        assert_eq!(CliError::Resource("x".into()).exit_code(), EXIT_RESOURCE);
        assert_eq!(CliError::Eval(EvalError::DepthExceeded(3)).exit_code(), EXIT_RESOURCE);
    }

    #[test]
    fn every_macro_builds() {
        for name in ["def", "bin", "eq", "lt", "le", "bnum", "bsum", "bmult", "bdiv", "card-leq", "clique", "dnfsat", "nodnfsat"] {
            assert!(macro_formula(name, 1).is_ok(), "{name}");
        }
        assert!(macro_formula("def", 0).is_err());
    }
}
