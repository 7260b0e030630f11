//! Alphabets and the re-encoding retry.
//!
//! A letter is a set of representatives, each a string of `width` field
//! elements. A block of `n` field elements carries `⌊n / width⌋` letters;
//! any remaining positions are filler and must be zero. When a block
//! cannot be encrypted, the sender swaps representatives and tries again.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::gf::{BaseField, FqElem};
use crate::rng::{domain, Prng};

/// Symbols of the default alphabet, in letter order. The pad letter follows.
pub const DEFAULT_SYMBOLS: &[u8] =
    b" 0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz";

/// Cap on the enumerated retry space.
const MAX_RETRY_SPACE: u128 = 1 << 63;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    width: usize,
    symbols: Vec<u8>,
    /// `reps[letter]`; the pad letter is last.
    reps: Vec<Vec<Vec<FqElem>>>,
    lookup: HashMap<Vec<FqElem>, usize>,
}

impl Alphabet {
    /// `reps` holds one entry per symbol followed by the pad letter's entry.
    pub fn new(symbols: Vec<u8>, reps: Vec<Vec<Vec<FqElem>>>, width: usize) -> Result<Self> {
        if width == 0 {
            return Err(Error::InvalidAlphabet("width must be positive".into()));
        }
        if reps.len() != symbols.len() + 1 {
            return Err(Error::InvalidAlphabet(format!(
                "expected {} representative sets (symbols plus pad), got {}",
                symbols.len() + 1,
                reps.len()
            )));
        }
        let mut seen = symbols.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != symbols.len() {
            return Err(Error::InvalidAlphabet("duplicate symbol".into()));
        }
        let mut lookup = HashMap::new();
        for (letter, set) in reps.iter().enumerate() {
            if set.is_empty() {
                return Err(Error::InvalidAlphabet(format!(
                    "letter {letter} has no representatives"
                )));
            }
            for rep in set {
                if rep.len() != width {
                    return Err(Error::InvalidAlphabet(format!(
                        "representative of length {} in a width-{width} alphabet",
                        rep.len()
                    )));
                }
                if lookup.insert(rep.clone(), letter).is_some() {
                    return Err(Error::InvalidAlphabet("representative sets overlap".into()));
                }
            }
        }
        Ok(Alphabet {
            width,
            symbols,
            reps,
            lookup,
        })
    }

    /// The default alphabet for blocks of `n` elements of `field`.
    ///
    /// With `r` minimal such that `q^r ≥ 128`, each of the 64 letters
    /// (63 symbols and pad) gets `⌊q^r / 64⌋` width-`r` representatives:
    /// representative `k` of letter `s` spells `s + 64k` in base `q`.
    /// When `r > n` the alphabet shrinks to `min(63, q^n - 1)` symbols of
    /// width `n` with one representative each.
    pub fn default_for(field: &BaseField, n: usize) -> Result<Self> {
        let q = field.q() as u128;
        let mut width = 1usize;
        while q.pow(width as u32) < 128 {
            width += 1;
        }
        let spell = |mut value: u128, width: usize| -> Vec<FqElem> {
            (0..width)
                .map(|_| {
                    let d = value % q;
                    value /= q;
                    FqElem(d as u32)
                })
                .collect()
        };
        if width <= n {
            // Spread what would be zero filler across the letters so every
            // position carries representative choice.
            let width = n / (n / width);
            let letters = 64u128;
            let per_letter = (q.pow(width as u32) / letters) as usize;
            let reps = (0..letters)
                .map(|s| {
                    (0..per_letter as u128)
                        .map(|k| spell(s + letters * k, width))
                        .collect()
                })
                .collect();
            return Self::new(DEFAULT_SYMBOLS.to_vec(), reps, width);
        }
        if n == 0 {
            return Err(Error::InvalidAlphabet(
                "block length must be positive".into(),
            ));
        }
        let strings = q.pow(n as u32);
        let count = (strings - 1).min(DEFAULT_SYMBOLS.len() as u128) as usize;
        let reps = (0..=count as u128).map(|s| vec![spell(s, n)]).collect();
        Self::new(DEFAULT_SYMBOLS[..count].to_vec(), reps, n)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    /// Letter index of the pad symbol.
    pub fn pad_letter(&self) -> usize {
        self.symbols.len()
    }

    pub fn representatives(&self, letter: usize) -> &[Vec<FqElem>] {
        &self.reps[letter]
    }

    pub fn letter_count(&self) -> usize {
        self.reps.len()
    }

    pub fn letter_of_symbol(&self, symbol: u8) -> Result<usize> {
        self.symbols
            .iter()
            .position(|&s| s == symbol)
            .ok_or(Error::UnknownSymbol(symbol))
    }

    pub fn letter_of(&self, rep: &[FqElem]) -> Option<usize> {
        self.lookup.get(rep).copied()
    }

    pub fn letters_per_block(&self, n: usize) -> Result<usize> {
        let k = n / self.width;
        if k == 0 {
            return Err(Error::InvalidAlphabet(format!(
                "letters of width {} do not fit blocks of {n}",
                self.width
            )));
        }
        Ok(k)
    }

    /// Every field element ever used by a representative.
    pub fn max_element(&self) -> u32 {
        self.lookup
            .keys()
            .flat_map(|r| r.iter().map(|e| e.index()))
            .max()
            .unwrap_or(0)
    }
}

/// One block with the representative chosen for each letter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockEncoding {
    pub block: Vec<FqElem>,
    pub letters: Vec<usize>,
    pub choice_index: Vec<usize>,
}

impl BlockEncoding {
    pub fn new(alpha: &Alphabet, n: usize, letters: Vec<usize>, choice_index: Vec<usize>) -> Self {
        let mut block = Vec::with_capacity(n);
        for (&l, &c) in letters.iter().zip(&choice_index) {
            block.extend_from_slice(&alpha.reps[l][c]);
        }
        block.resize(n, FqElem::ZERO);
        BlockEncoding {
            block,
            letters,
            choice_index,
        }
    }
}

/// Splits the message into blocks of `n` elements, padding the last block
/// with the pad letter. An empty message becomes one block of padding.
pub fn encode_message(alpha: &Alphabet, message: &[u8], n: usize) -> Result<Vec<BlockEncoding>> {
    let per_block = alpha.letters_per_block(n)?;
    let mut letters = message
        .iter()
        .map(|&s| alpha.letter_of_symbol(s))
        .collect::<Result<Vec<_>>>()?;
    let blocks = letters.len().div_ceil(per_block).max(1);
    letters.resize(blocks * per_block, alpha.pad_letter());
    Ok(letters
        .chunks(per_block)
        .map(|chunk| BlockEncoding::new(alpha, n, chunk.to_vec(), vec![0; chunk.len()]))
        .collect())
}

/// Maps each letter slot to its symbol, dropping padding; `None` when any
/// slot is not a representative or a filler position is nonzero.
pub fn decode_block(alpha: &Alphabet, block: &[FqElem]) -> Option<Vec<u8>> {
    let per_block = block.len() / alpha.width;
    if per_block == 0 {
        return None;
    }
    if block[per_block * alpha.width..]
        .iter()
        .any(|e| !e.is_zero())
    {
        return None;
    }
    let mut out = Vec::with_capacity(per_block);
    for chunk in block[..per_block * alpha.width].chunks(alpha.width) {
        let letter = alpha.letter_of(chunk)?;
        if letter != alpha.pad_letter() {
            out.push(alpha.symbols[letter]);
        }
    }
    Some(out)
}

pub fn decode_message(alpha: &Alphabet, blocks: &[Vec<FqElem>]) -> Option<Vec<u8>> {
    let mut out = Vec::new();
    for b in blocks {
        out.extend(decode_block(alpha, b)?);
    }
    Some(out)
}

/// Enumeration state for the retries of one block.
///
/// Representative choices are numbered in mixed radix (combination 0 is
/// the initial all-zero choice). Retry `t` visits combination
/// `t · a mod N` with `a` coprime to `N`, so every other combination is
/// visited exactly once in a shuffled, seed-determined order.
#[derive(Clone, Debug)]
pub struct RetryState {
    radices: Vec<u64>,
    total: u128,
    multiplier: u128,
    counter: u128,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RetryOutcome {
    Next(BlockEncoding),
    Exhausted,
}

impl RetryState {
    pub fn new(alpha: &Alphabet, enc: &BlockEncoding, seed: u64, block_index: u64) -> Self {
        let radices: Vec<u64> = enc
            .letters
            .iter()
            .map(|&l| alpha.reps[l].len() as u64)
            .collect();
        let total = radices
            .iter()
            .try_fold(1u128, |acc, &r| acc.checked_mul(r as u128))
            .unwrap_or(MAX_RETRY_SPACE)
            .min(MAX_RETRY_SPACE);
        let mut rng = Prng::for_index(seed, domain::RETRY, block_index);
        let multiplier = if total <= 2 {
            1
        } else {
            loop {
                let a = 1 + rng.below((total - 1) as u64) as u128;
                if gcd(a, total) == 1 {
                    break a;
                }
            }
        };
        RetryState {
            radices,
            total,
            multiplier,
            counter: 0,
        }
    }

    /// Combinations still unvisited.
    pub fn remaining(&self) -> u128 {
        self.total.saturating_sub(1 + self.counter)
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// The next untried representative choice for `enc`'s letters.
pub fn next_retry(alpha: &Alphabet, enc: &BlockEncoding, state: &mut RetryState) -> RetryOutcome {
    if state.counter + 1 >= state.total {
        return RetryOutcome::Exhausted;
    }
    state.counter += 1;
    let mut combo = (state.counter * state.multiplier) % state.total;
    let choice: Vec<usize> = state
        .radices
        .iter()
        .map(|&r| {
            let c = (combo % r as u128) as usize;
            combo /= r as u128;
            c
        })
        .collect();
    RetryOutcome::Next(BlockEncoding::new(
        alpha,
        enc.block.len(),
        enc.letters.clone(),
        choice,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::FieldSpec;
    use std::collections::HashSet;

    fn field(p: u64, m: usize) -> BaseField {
        BaseField::new(&FieldSpec::with_default_modulus(p, m).unwrap())
    }

    /// Width-1 alphabet over F_q, one representative per letter.
    fn single_rep(symbols: &[u8]) -> Alphabet {
        let reps = (0..=symbols.len())
            .map(|i| vec![vec![FqElem(i as u32 + 1)]])
            .collect();
        Alphabet::new(symbols.to_vec(), reps, 1).unwrap()
    }

    fn two_rep(symbols: &[u8]) -> Alphabet {
        let reps = (0..=symbols.len() as u32)
            .map(|i| vec![vec![FqElem(2 * i + 1)], vec![FqElem(2 * i + 2)]])
            .collect();
        Alphabet::new(symbols.to_vec(), reps, 1).unwrap()
    }

    #[test]
    fn empty_message_is_one_pad_block() {
        let a = single_rep(b"AB");
        let blocks = encode_message(&a, b"", 4).unwrap();
        assert_eq!(blocks.len(), 1);
        assert_eq!(blocks[0].letters, vec![a.pad_letter(); 4]);
        assert_eq!(decode_block(&a, &blocks[0].block).unwrap(), b"");
    }

    #[test]
    fn two_symbols_fill_one_block() {
        let a = single_rep(b"AB");
        let blocks = encode_message(&a, b"AB", 2).unwrap();
        assert_eq!(blocks.len(), 1);
        assert_eq!(blocks[0].block, vec![FqElem(1), FqElem(2)]);
        assert_eq!(blocks[0].choice_index, vec![0, 0]);
    }

    #[test]
    fn five_symbols_make_three_blocks() {
        let a = single_rep(b"ABCDE");
        let blocks = encode_message(&a, b"ABCDE", 2).unwrap();
        assert_eq!(blocks.len(), 3);
        assert_eq!(blocks[2].letters, vec![4, a.pad_letter()]);
        let decoded = decode_message(
            &a,
            &blocks.iter().map(|b| b.block.clone()).collect::<Vec<_>>(),
        );
        assert_eq!(decoded.unwrap(), b"ABCDE");
    }

    #[test]
    fn unknown_symbol_rejected() {
        let a = single_rep(b"AB");
        assert_eq!(
            encode_message(&a, b"AC", 2).unwrap_err(),
            Error::UnknownSymbol(b'C')
        );
    }

    #[test]
    fn decode_filters_non_representatives() {
        let a = two_rep(b"AB");
        assert_eq!(decode_block(&a, &[FqElem(1), FqElem(4)]).unwrap(), b"AB");
        // Alternate representatives decode to the same symbols.
        assert_eq!(decode_block(&a, &[FqElem(2), FqElem(3)]).unwrap(), b"AB");
        assert!(decode_block(&a, &[FqElem(1), FqElem(0)]).is_none());
        assert!(decode_block(&a, &[FqElem(1), FqElem(9)]).is_none());
    }

    #[test]
    fn single_representatives_exhaust_immediately() {
        let a = single_rep(b"AB");
        let enc = &encode_message(&a, b"AB", 2).unwrap()[0];
        let mut st = RetryState::new(&a, enc, 1, 0);
        assert_eq!(next_retry(&a, enc, &mut st), RetryOutcome::Exhausted);
    }

    #[test]
    fn retries_enumerate_product_space_once() {
        let a = two_rep(b"ABC");
        let enc = &encode_message(&a, b"ABC", 3).unwrap()[0];
        let mut st = RetryState::new(&a, enc, 5, 2);
        let mut seen = HashSet::new();
        seen.insert(enc.choice_index.clone());
        while let RetryOutcome::Next(next) = next_retry(&a, enc, &mut st) {
            assert_eq!(decode_block(&a, &next.block).unwrap(), b"ABC");
            assert!(seen.insert(next.choice_index));
        }
        assert_eq!(seen.len(), 8);
        assert_eq!(st.remaining(), 0);
    }

    #[test]
    fn retry_stream_is_deterministic() {
        let a = two_rep(b"ABCDEF");
        let enc = &encode_message(&a, b"ABCDEF", 6).unwrap()[0];
        let run = |seed| {
            let mut st = RetryState::new(&a, enc, seed, 3);
            (0..10)
                .map(|_| match next_retry(&a, enc, &mut st) {
                    RetryOutcome::Next(e) => e.choice_index,
                    RetryOutcome::Exhausted => vec![],
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(run(9), run(9));
        assert_ne!(run(9), run(10));
    }

    #[test]
    fn default_alphabets() {
        let f2 = field(2, 1);
        let a = Alphabet::default_for(&f2, 8).unwrap();
        assert_eq!(a.width(), 8);
        assert_eq!(a.letter_count(), 64);
        assert_eq!(a.representatives(0).len(), 4);
        let odd = Alphabet::default_for(&f2, 15).unwrap();
        assert_eq!((odd.width(), odd.letters_per_block(15).unwrap()), (7, 2));
        assert_eq!(a.letters_per_block(8).unwrap(), 1);
        let f256 = field(2, 8);
        let b = Alphabet::default_for(&f256, 4).unwrap();
        assert_eq!(b.width(), 1);
        assert_eq!(b.representatives(5).len(), 4);
        let f16 = field(2, 4);
        let c = Alphabet::default_for(&f16, 6).unwrap();
        assert_eq!((c.width(), c.representatives(0).len()), (2, 4));
        let small = Alphabet::default_for(&f2, 4).unwrap();
        assert_eq!((small.width(), small.symbols().len()), (4, 15));
        let msg = b"Hello World 42";
        let blocks = encode_message(&a, msg, 8).unwrap();
        let raw: Vec<_> = blocks.into_iter().map(|b| b.block).collect();
        assert_eq!(decode_message(&a, &raw).unwrap(), msg);
    }

    #[test]
    fn alphabet_validation() {
        let one = || vec![vec![FqElem(1)]];
        assert!(Alphabet::new(vec![b'A'], vec![one(), one()], 1).is_err());
        assert!(Alphabet::new(vec![b'A'], vec![one()], 1).is_err());
        assert!(Alphabet::new(vec![b'A'], vec![one(), vec![]], 1).is_err());
        assert!(Alphabet::new(
            vec![b'A', b'A'],
            vec![one(), vec![vec![FqElem(2)]], vec![vec![FqElem(3)]]],
            1
        )
        .is_err());
        assert!(
            Alphabet::new(vec![b'A'], vec![one(), vec![vec![FqElem(2), FqElem(0)]]], 1).is_err()
        );
    }
}
