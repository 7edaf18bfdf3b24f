//! Binary numbers stored as relations over `B^k × {0,1}`, where
//! `B = {0, …, ⌈log n⌉ − 1}`. Position `i` is the `i`-th tuple of `B^k` in
//! numerical order (first component most significant) and carries bit `i`,
//! least significant first.

use thiserror::Error;

use crate::structure::{ceil_log2, Tuple, TupleSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumberError {
    #[error("value {value} does not fit in {width} bits")]
    OutOfRange { value: u128, width: usize },
    #[error("numbers of {0} bits do not fit in 128-bit integers")]
    TooWide(usize),
    #[error("malformed number encoding: {0}")]
    Malformed(String),
}

/// Number of bit positions, `⌈log n⌉^k`.
pub fn width(n: usize, k: usize) -> usize {
    ceil_log2(n).pow(k as u32)
}

/// The `i`-th tuple of `B^k` in numerical order.
pub fn position_tuple(n: usize, k: usize, mut i: usize) -> Tuple {
    let base = ceil_log2(n);
    let mut t = vec![0; k];
    for slot in t.iter_mut().rev() {
        *slot = i % base;
        i /= base;
    }
    t
}

/// Index of a tuple of `B^k`, or `None` when a component is outside `B`.
pub fn position_index(n: usize, t: &[usize]) -> Option<usize> {
    let base = ceil_log2(n);
    t.iter().try_fold(0usize, |acc, &v| (v < base).then_some(acc * base + v))
}

/// `B^k` itself.
pub fn def_relation(n: usize, k: usize) -> TupleSet {
    (0..width(n, k)).map(|i| position_tuple(n, k, i)).collect()
}

/// Encoding of a bit vector (least significant first), zero-padded.
pub fn encode_bits(n: usize, k: usize, bits: &[bool]) -> Result<TupleSet, NumberError> {
    let w = width(n, k);
    if bits.iter().skip(w).any(|&b| b) {
        return Err(NumberError::Malformed(format!("more than {w} significant bits")));
    }
    Ok((0..w)
        .map(|i| {
            let mut t = position_tuple(n, k, i);
            t.push(bits.get(i).copied().unwrap_or(false) as usize);
            t
        })
        .collect())
}

pub fn encode_number(n: usize, k: usize, value: u128) -> Result<TupleSet, NumberError> {
    let w = width(n, k);
    if w < 128 && value >> w != 0 {
        return Err(NumberError::OutOfRange { value, width: w });
    }
    let bits: Vec<bool> = (0..w.min(128)).map(|i| (value >> i) & 1 == 1).collect();
    encode_bits(n, k, &bits)
}

pub fn decode_bits(rel: &TupleSet, n: usize, k: usize) -> Result<Vec<bool>, NumberError> {
    let w = width(n, k);
    let mut bits: Vec<Option<bool>> = vec![None; w];
    for t in rel {
        if t.len() != k + 1 {
            return Err(NumberError::Malformed(format!("tuple {t:?} does not have arity {}", k + 1)));
        }
        let pos = position_index(n, &t[..k])
            .ok_or_else(|| NumberError::Malformed(format!("tuple {t:?} is not a position")))?;
        let b = match t[k] {
            0 => false,
            1 => true,
            other => return Err(NumberError::Malformed(format!("bit value {other} at position {pos}"))),
        };
        if bits[pos].replace(b).is_some() {
            return Err(NumberError::Malformed(format!("position {pos} carries two bits")));
        }
    }
    bits.into_iter()
        .enumerate()
        .map(|(i, b)| b.ok_or_else(|| NumberError::Malformed(format!("position {i} has no bit"))))
        .collect()
}

pub fn decode_number(rel: &TupleSet, n: usize, k: usize) -> Result<u128, NumberError> {
    let bits = decode_bits(rel, n, k)?;
    if bits.len() > 128 && bits[128..].iter().any(|&b| b) {
        return Err(NumberError::TooWide(bits.len()));
    }
    Ok(bits.iter().take(128).enumerate().fold(0u128, |acc, (i, &b)| acc | ((b as u128) << i)))
}

/// Prepends a fixed prefix to every tuple.
pub fn with_prefix(prefix: &[usize], rel: &TupleSet) -> TupleSet {
    rel.iter()
        .map(|t| {
            let mut u = prefix.to_vec();
            u.extend(t);
            u
        })
        .collect()
}

fn bits_of(value: u128, w: usize) -> Vec<bool> {
    (0..w).map(|i| i < 128 && (value >> i) & 1 == 1).collect()
}

/// Carry bits of `a + b`: carry into position 0 is 0, into position `i`
/// the majority of the three bits at `i − 1`.
pub fn sum_carries(n: usize, k: usize, a: u128, b: u128) -> TupleSet {
    let w = width(n, k);
    let (x, y) = (bits_of(a, w), bits_of(b, w));
    let mut carry = vec![false; w];
    for i in 1..w {
        let c = carry[i - 1] as u8 + x[i - 1] as u8 + y[i - 1] as u8;
        carry[i] = c >= 2;
    }
    encode_bits(n, k, &carry).expect("carry vector has the right width")
}

/// Auxiliary relations `(R, S, W)` for `a · b`: partial sums, shifted
/// multiplicands and carries, each a `2k`-position number whose slice at
/// position `i` describes step `i`.
pub fn mult_witness(n: usize, k: usize, a: u128, b: u128) -> (TupleSet, TupleSet, TupleSet) {
    let w = width(n, k);
    let mask = if w >= 128 { u128::MAX } else { (1u128 << w) - 1 };
    let yb = bits_of(b, w);
    let (mut r, mut s, mut c) = (TupleSet::new(), TupleSet::new(), TupleSet::new());
    let mut partial = 0u128;
    for (i, &bit) in yb.iter().enumerate() {
        let shifted = if i < 128 { (a << i) & mask } else { 0 };
        let carries = if i > 0 && bit {
            sum_carries(n, k, partial, shifted)
        } else {
            encode_number(n, k, 0).unwrap()
        };
        if bit {
            partial = if i == 0 { a } else { partial.wrapping_add(shifted) & mask };
        }
        let prefix = position_tuple(n, k, i);
        r.extend(with_prefix(&prefix, &encode_number(n, k, partial).unwrap()));
        s.extend(with_prefix(&prefix, &encode_number(n, k, shifted).unwrap()));
        c.extend(with_prefix(&prefix, &carries));
    }
    (r, s, c)
}
