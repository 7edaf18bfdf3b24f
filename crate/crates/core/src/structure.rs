//! Finite ordered structures.
//!
//! Every structure has domain `0..n` with `n >= 2` and carries the built-in
//! numeric vocabulary: `LEQ` (the natural order), `SUCC` (its successor
//! relation), `BIT` (`BIT(i, j)` iff bit `j` of `i` is set, bit 0 least
//! significant) and the constants `0`, `1`, `logn` (= ceil(log2 n)) and
//! `max` (= n - 1). Built-ins are computed from `n` on demand and never
//! stored or encoded.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Names of the built-in relation symbols with their arities.
pub const BUILTIN_RELATIONS: [(&str, usize); 3] = [("LEQ", 2), ("SUCC", 2), ("BIT", 2)];
/// Names of the built-in constant symbols.
pub const BUILTIN_CONSTANTS: [&str; 4] = ["0", "1", "logn", "max"];

pub type Tuple = Vec<usize>;
pub type TupleSet = BTreeSet<Tuple>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StructureError {
    #[error("structures need at least two elements, got {0}")]
    SizeTooSmall(usize),
    #[error("duplicate symbol `{0}`")]
    DuplicateSymbol(String),
    #[error("relation `{0}` must have arity >= 1")]
    ZeroArity(String),
    #[error("no interpretation given for `{0}`")]
    MissingInterpretation(String),
    #[error("`{0}` is not an input symbol of the vocabulary")]
    ExtraInterpretation(String),
    #[error("tuple {tuple:?} of `{name}` has wrong arity (expected {arity})")]
    ArityMismatch { name: String, arity: usize, tuple: Tuple },
    #[error("value {value} of `{name}` is outside the domain 0..{n}")]
    OutOfRange { name: String, value: usize, n: usize },
    #[error("bit string has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("text must have at least two characters")]
    TextTooShort,
    #[error("character `{0}` is not in the alphabet")]
    UnknownCharacter(char),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// `ceil(log2 n)` for `n >= 1`; `0` for `n <= 1`.
pub fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

/// Number of bits in the binary representation of `v` (0 for 0).
pub fn bit_length(v: usize) -> usize {
    (usize::BITS - v.leading_zeros()) as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SymbolKind {
    Input,
    BuiltIn,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RelationSymbol {
    pub name: String,
    pub arity: usize,
    pub kind: SymbolKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConstantSymbol {
    pub name: String,
    pub kind: SymbolKind,
}

/// A relational vocabulary. The built-in symbols are always present.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Vocabulary {
    relations: Vec<RelationSymbol>,
    constants: Vec<ConstantSymbol>,
}

impl Default for Vocabulary {
    fn default() -> Self {
        Self::new()
    }
}

impl Vocabulary {
    pub fn new() -> Self {
        let relations = BUILTIN_RELATIONS
            .iter()
            .map(|&(name, arity)| RelationSymbol { name: name.into(), arity, kind: SymbolKind::BuiltIn })
            .collect();
        let constants = BUILTIN_CONSTANTS
            .iter()
            .map(|&name| ConstantSymbol { name: name.into(), kind: SymbolKind::BuiltIn })
            .collect();
        Vocabulary { relations, constants }
    }

    fn contains(&self, name: &str) -> bool {
        self.relations.iter().any(|r| r.name == name) || self.constants.iter().any(|c| c.name == name)
    }

    pub fn add_relation(&mut self, name: &str, arity: usize) -> Result<(), StructureError> {
        if arity == 0 {
            return Err(StructureError::ZeroArity(name.into()));
        }
        if self.contains(name) {
            return Err(StructureError::DuplicateSymbol(name.into()));
        }
        self.relations.push(RelationSymbol { name: name.into(), arity, kind: SymbolKind::Input });
        Ok(())
    }

    pub fn add_constant(&mut self, name: &str) -> Result<(), StructureError> {
        if self.contains(name) {
            return Err(StructureError::DuplicateSymbol(name.into()));
        }
        self.constants.push(ConstantSymbol { name: name.into(), kind: SymbolKind::Input });
        Ok(())
    }

    pub fn with_relation(mut self, name: &str, arity: usize) -> Result<Self, StructureError> {
        self.add_relation(name, arity)?;
        Ok(self)
    }

    pub fn with_constant(mut self, name: &str) -> Result<Self, StructureError> {
        self.add_constant(name)?;
        Ok(self)
    }

    pub fn relations(&self) -> &[RelationSymbol] {
        &self.relations
    }

    pub fn constants(&self) -> &[ConstantSymbol] {
        &self.constants
    }

    /// Input relations in declaration order.
    pub fn input_relations(&self) -> impl Iterator<Item = &RelationSymbol> {
        self.relations.iter().filter(|r| r.kind == SymbolKind::Input)
    }

    /// Input constants in declaration order.
    pub fn input_constants(&self) -> impl Iterator<Item = &ConstantSymbol> {
        self.constants.iter().filter(|c| c.kind == SymbolKind::Input)
    }

    pub fn relation_arity(&self, name: &str) -> Option<usize> {
        self.relations.iter().find(|r| r.name == name).map(|r| r.arity)
    }

    pub fn has_constant(&self, name: &str) -> bool {
        self.constants.iter().any(|c| c.name == name)
    }

    /// Length of `bin(A)` for a structure of size `n` over this vocabulary.
    pub fn encoding_length(&self, n: usize) -> usize {
        let rels: usize = self.input_relations().map(|r| n.pow(r.arity as u32)).sum();
        rels + self.input_constants().count() * ceil_log2(n)
    }
}

/// Interpretations of the input symbols, as handed to [`Structure::new`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Interpretation {
    pub relations: BTreeMap<String, TupleSet>,
    pub constants: BTreeMap<String, usize>,
}

impl Interpretation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn relation<I, T>(mut self, name: &str, tuples: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: Into<Tuple>,
    {
        self.relations.insert(name.into(), tuples.into_iter().map(Into::into).collect());
        self
    }

    pub fn constant(mut self, name: &str, value: usize) -> Self {
        self.constants.insert(name.into(), value);
        self
    }
}

/// A finite ordered structure over `0..n`. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Structure {
    vocab: Vocabulary,
    n: usize,
    relations: BTreeMap<String, TupleSet>,
    constants: BTreeMap<String, usize>,
}

impl Structure {
    pub fn new(vocab: Vocabulary, n: usize, interp: Interpretation) -> Result<Self, StructureError> {
        if n < 2 {
            return Err(StructureError::SizeTooSmall(n));
        }
        for name in interp.relations.keys() {
            if !vocab.input_relations().any(|r| &r.name == name) {
                return Err(StructureError::ExtraInterpretation(name.clone()));
            }
        }
        for name in interp.constants.keys() {
            if !vocab.input_constants().any(|c| &c.name == name) {
                return Err(StructureError::ExtraInterpretation(name.clone()));
            }
        }
        let mut relations = BTreeMap::new();
        for sym in vocab.input_relations() {
            let tuples = interp
                .relations
                .get(&sym.name)
                .ok_or_else(|| StructureError::MissingInterpretation(sym.name.clone()))?;
            for t in tuples {
                if t.len() != sym.arity {
                    return Err(StructureError::ArityMismatch {
                        name: sym.name.clone(),
                        arity: sym.arity,
                        tuple: t.clone(),
                    });
                }
                if let Some(&v) = t.iter().find(|&&v| v >= n) {
                    return Err(StructureError::OutOfRange { name: sym.name.clone(), value: v, n });
                }
            }
            relations.insert(sym.name.clone(), tuples.clone());
        }
        let mut constants = BTreeMap::new();
        for sym in vocab.input_constants() {
            let &v = interp
                .constants
                .get(&sym.name)
                .ok_or_else(|| StructureError::MissingInterpretation(sym.name.clone()))?;
            if v >= n {
                return Err(StructureError::OutOfRange { name: sym.name.clone(), value: v, n });
            }
            constants.insert(sym.name.clone(), v);
        }
        Ok(Structure { vocab, n, relations, constants })
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn logn(&self) -> usize {
        ceil_log2(self.n)
    }

    /// Truth of `name(args)`, or `None` when `name` is not a relation symbol
    /// of the vocabulary or the arity is wrong.
    pub fn holds(&self, name: &str, args: &[usize]) -> Option<bool> {
        match (name, args) {
            ("LEQ", [a, b]) => Some(a <= b),
            ("SUCC", [a, b]) => Some(a + 1 == *b),
            ("BIT", [i, j]) => Some(*j < usize::BITS as usize && (i >> j) & 1 == 1),
            ("LEQ" | "SUCC" | "BIT", _) => None,
            _ => {
                let rel = self.relations.get(name)?;
                let arity = self.vocab.relation_arity(name)?;
                if args.len() != arity {
                    return None;
                }
                Some(rel.contains(args))
            }
        }
    }

    pub fn constant(&self, name: &str) -> Option<usize> {
        match name {
            "0" => Some(0),
            "1" => Some(1),
            "max" => Some(self.n - 1),
            "logn" => Some(self.logn()),
            _ => self.constants.get(name).copied(),
        }
    }

    /// The full interpretation of a relation symbol, built-ins included.
    pub fn relation(&self, name: &str) -> Option<TupleSet> {
        let arity = self.vocab.relation_arity(name)?;
        if let Some(r) = self.relations.get(name) {
            return Some(r.clone());
        }
        Some(all_tuples(self.n, arity).filter(|t| self.holds(name, t) == Some(true)).collect())
    }

    /// The input interpretations, suitable for rebuilding the structure.
    pub fn interpretation(&self) -> Interpretation {
        Interpretation { relations: self.relations.clone(), constants: self.constants.clone() }
    }
}

/// All tuples of `0..n` of the given arity in lexicographic order.
pub fn all_tuples(n: usize, arity: usize) -> impl Iterator<Item = Tuple> {
    let total = n.checked_pow(arity as u32).expect("tuple space overflow");
    (0..total).map(move |mut idx| {
        let mut t = vec![0; arity];
        for slot in t.iter_mut().rev() {
            *slot = idx % n;
            idx /= n;
        }
        t
    })
}

/// Lexicographic rank of a tuple among all tuples over `0..n`.
pub fn tuple_rank(n: usize, t: &[usize]) -> usize {
    t.iter().fold(0, |acc, &v| acc * n + v)
}

/// The binary encoding `bin(A)` of a structure, without endmark.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct BitString(pub Vec<bool>);

impl BitString {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = StructureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(StructureError::UnknownCharacter(other)),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(BitString)
    }
}

/// Relations as `n^r` bitmaps in lexicographic tuple order, then constants
/// as `ceil(log n)` bits each, most significant bit first.
pub fn encode_bin(s: &Structure) -> BitString {
    let mut bits = Vec::with_capacity(s.vocab.encoding_length(s.n));
    for sym in s.vocab.input_relations() {
        let rel = &s.relations[&sym.name];
        bits.extend(all_tuples(s.n, sym.arity).map(|t| rel.contains(&t)));
    }
    let width = s.logn();
    for sym in s.vocab.input_constants() {
        let v = s.constants[&sym.name];
        bits.extend((0..width).rev().map(|j| (v >> j) & 1 == 1));
    }
    BitString(bits)
}

pub fn decode_bin(vocab: &Vocabulary, n: usize, bits: &BitString) -> Result<Structure, StructureError> {
    if n < 2 {
        return Err(StructureError::SizeTooSmall(n));
    }
    let expected = vocab.encoding_length(n);
    if bits.len() != expected {
        return Err(StructureError::LengthMismatch { expected, got: bits.len() });
    }
    let mut interp = Interpretation::new();
    let mut pos = 0;
    for sym in vocab.input_relations() {
        let tuples: TupleSet = all_tuples(n, sym.arity)
            .enumerate()
            .filter(|(i, _)| bits.0[pos + i])
            .map(|(_, t)| t)
            .collect();
        pos += n.pow(sym.arity as u32);
        interp.relations.insert(sym.name.clone(), tuples);
    }
    let width = ceil_log2(n);
    for sym in vocab.input_constants() {
        let v = bits.0[pos..pos + width].iter().fold(0usize, |acc, &b| acc * 2 + b as usize);
        pos += width;
        interp.constants.insert(sym.name.clone(), v);
    }
    Structure::new(vocab.clone(), n, interp)
}

/// Relation name used for the letter predicate of `c` in word models.
pub fn letter_relation(c: char) -> String {
    let tag = match c {
        '(' => "lp".to_string(),
        ')' => "rp".to_string(),
        '∧' | '&' => "and".to_string(),
        '∨' | '|' => "or".to_string(),
        '¬' | '~' => "not".to_string(),
        '#' => "hash".to_string(),
        '+' => "plus".to_string(),
        '-' | '−' => "minus".to_string(),
        c if c.is_ascii_alphanumeric() => c.to_string(),
        c => format!("u{:x}", c as u32),
    };
    format!("I_{tag}")
}

/// Word model of `text`: positions `0..len`, one unary letter predicate
/// per alphabet symbol (see [`letter_relation`]).
pub fn word_model(alphabet: &[char], text: &str) -> Result<Structure, StructureError> {
    let chars: Vec<char> = text.chars().collect();
    if chars.len() < 2 {
        return Err(StructureError::TextTooShort);
    }
    let mut vocab = Vocabulary::new();
    let mut interp = Interpretation::new();
    for &a in alphabet {
        let name = letter_relation(a);
        vocab.add_relation(&name, 1)?;
        interp.relations.insert(name, TupleSet::new());
    }
    for (i, &c) in chars.iter().enumerate() {
        if !alphabet.contains(&c) {
            return Err(StructureError::UnknownCharacter(c));
        }
        interp.relations.get_mut(&letter_relation(c)).unwrap().insert(vec![i]);
    }
    Structure::new(vocab, chars.len(), interp)
}

/// Renders a structure in the line-oriented `format v1` text format.
pub fn write_structure(s: &Structure) -> String {
    let mut out = String::from("format v1\n");
    out.push_str(&format!("size {}\n", s.n));
    for sym in s.vocab.input_relations() {
        out.push_str(&format!("rel {} {}\n", sym.name, sym.arity));
        for t in &s.relations[&sym.name] {
            let vals: Vec<String> = t.iter().map(usize::to_string).collect();
            out.push_str(&format!("tuple {}\n", vals.join(" ")));
        }
    }
    for sym in s.vocab.input_constants() {
        out.push_str(&format!("const {} {}\n", sym.name, s.constants[&sym.name]));
    }
    out
}

pub fn parse_structure(text: &str) -> Result<Structure, StructureError> {
    let mut vocab = Vocabulary::new();
    let mut interp = Interpretation::new();
    let mut size = None;
    let mut current: Option<(String, usize)> = None;
    let mut seen_header = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let err = |msg: &str| StructureError::Parse { line: line_no, msg: msg.into() };
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        let num = |w: &str| w.parse::<usize>().map_err(|_| err(&format!("expected a number, got `{w}`")));
        match words[0] {
            "format" => {
                if words.get(1) != Some(&"v1") || seen_header {
                    return Err(err("unsupported format line"));
                }
                seen_header = true;
            }
            "size" if words.len() == 2 => size = Some(num(words[1])?),
            "rel" if words.len() == 3 => {
                let arity = num(words[2])?;
                vocab.add_relation(words[1], arity).map_err(|e| err(&e.to_string()))?;
                interp.relations.insert(words[1].into(), TupleSet::new());
                current = Some((words[1].into(), arity));
            }
            "tuple" => {
                let (name, arity) = current.as_ref().ok_or_else(|| err("tuple outside a rel block"))?;
                let t = words[1..].iter().map(|w| num(w)).collect::<Result<Tuple, _>>()?;
                if t.len() != *arity {
                    return Err(err(&format!("tuple of `{name}` needs {arity} values")));
                }
                interp.relations.get_mut(name).unwrap().insert(t);
            }
            "const" if words.len() == 3 => {
                vocab.add_constant(words[1]).map_err(|e| err(&e.to_string()))?;
                interp.constants.insert(words[1].into(), num(words[2])?);
                current = None;
            }
            other => return Err(err(&format!("unrecognized line starting with `{other}`"))),
        }
    }
    let n = size.ok_or(StructureError::Parse { line: 0, msg: "missing `size` line".into() })?;
    Structure::new(vocab, n, interp)
}
