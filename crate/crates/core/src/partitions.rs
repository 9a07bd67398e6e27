//! Pair partitions of `{1..k}`, crossing numbers and letter-pattern traces.

use num_bigint::BigUint;
use thiserror::Error;

use crate::numeric::catalan;
use crate::pauli::{chain_trace, TraceValue};

pub const MAX_K: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartitionError {
    #[error("k = {0} must be even and positive")]
    OddK(usize),
    #[error("k = {0} exceeds the supported maximum {MAX_K}")]
    TooLarge(usize),
    #[error("block {0} does not have exactly two elements")]
    BadBlock(u8),
    #[error("expected {expected} letters, got {got}")]
    LetterCount { expected: usize, got: usize },
    #[error("letter {0} is not in 1..=3")]
    InvalidLetter(u8),
}

/// Canonical form: blocks labelled `1..=k/2` in order of first appearance.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PairPartition {
    block_of: Vec<u8>,
}

fn check_k(k: usize) -> Result<(), PartitionError> {
    if k == 0 || k % 2 == 1 {
        return Err(PartitionError::OddK(k));
    }
    if k > MAX_K {
        return Err(PartitionError::TooLarge(k));
    }
    Ok(())
}

impl PairPartition {
    /// Accepts any labelling with blocks of size two and relabels canonically.
    pub fn new(block_of: &[u8]) -> Result<Self, PartitionError> {
        check_k(block_of.len())?;
        let mut count = [0u8; 256];
        for &b in block_of {
            count[b as usize] += 1;
        }
        if let Some(&b) = block_of.iter().find(|&&b| count[b as usize] != 2) {
            return Err(PartitionError::BadBlock(b));
        }
        let mut relabel = [0u8; 256];
        let mut next = 0u8;
        let canon = block_of
            .iter()
            .map(|&b| {
                if relabel[b as usize] == 0 {
                    next += 1;
                    relabel[b as usize] = next;
                }
                relabel[b as usize]
            })
            .collect();
        Ok(Self { block_of: canon })
    }

    pub fn k(&self) -> usize {
        self.block_of.len()
    }

    pub fn block_of(&self) -> &[u8] {
        &self.block_of
    }

    /// 0-based position pairs `(first, second)` ordered by block label.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut first = vec![usize::MAX; self.k() / 2 + 1];
        let mut out = vec![(0, 0); self.k() / 2];
        for (pos, &b) in self.block_of.iter().enumerate() {
            let b = b as usize;
            if first[b] == usize::MAX {
                first[b] = pos;
            } else {
                out[b - 1] = (first[b], pos);
            }
        }
        out
    }

    pub fn crossing_number(&self) -> usize {
        let p = self.pairs();
        let mut c = 0;
        for (i, &(a, c1)) in p.iter().enumerate() {
            for &(b, d) in &p[i + 1..] {
                if (a < b && b < c1 && c1 < d) || (b < a && a < d && d < c1) {
                    c += 1;
                }
            }
        }
        c
    }

    pub fn is_noncrossing(&self) -> bool {
        self.crossing_number() == 0
    }

    /// `(1/2) Tr sigma^(a_pi(1)) ... sigma^(a_pi(k))`.
    pub fn pattern_trace(&self, letters: &[u8]) -> Result<TraceValue, PartitionError> {
        if letters.len() != self.k() / 2 {
            return Err(PartitionError::LetterCount { expected: self.k() / 2, got: letters.len() });
        }
        if let Some(&a) = letters.iter().find(|&&a| !(1..=3).contains(&a)) {
            return Err(PartitionError::InvalidLetter(a));
        }
        let word: Vec<u8> = self.block_of.iter().map(|&b| letters[b as usize - 1]).collect();
        Ok(chain_trace(&word).expect("letters validated"))
    }

    /// Sum of `pattern_trace` over all `3^{k/2}` letter assignments.
    pub fn pattern_trace_sum(&self) -> i64 {
        let mut total = 0i64;
        for letters in letter_tuples(self.k() / 2) {
            let (re, im) = self.pattern_trace(&letters).expect("valid letters").parts();
            debug_assert_eq!(im, 0);
            total += re;
        }
        total
    }
}

/// All tuples in `{1,2,3}^len`, lexicographic.
pub fn letter_tuples(len: usize) -> impl Iterator<Item = Vec<u8>> {
    let total = 3usize.pow(len as u32);
    (0..total).map(move |mut t| {
        let mut v = vec![1u8; len];
        for slot in v.iter_mut().rev() {
            *slot = 1 + (t % 3) as u8;
            t /= 3;
        }
        v
    })
}

/// Canonical pair partitions of `{1..k}`, `(k-1)!!` of them. The state is a
/// mixed-radix counter: at step `i` the first open position is matched with
/// the `c_i`-th remaining open position.
#[derive(Debug, Clone)]
pub struct Unlabelled {
    k: usize,
    choice: Vec<usize>,
    done: bool,
}

pub fn enumerate_unlabelled(k: usize) -> Result<Unlabelled, PartitionError> {
    check_k(k)?;
    Ok(Unlabelled { k, choice: vec![0; k / 2], done: false })
}

impl Unlabelled {
    fn build(&self) -> PairPartition {
        let mut open: Vec<usize> = (0..self.k).collect();
        let mut block_of = vec![0u8; self.k];
        for (i, &c) in self.choice.iter().enumerate() {
            let a = open.remove(0);
            let b = open.remove(c);
            block_of[a] = i as u8 + 1;
            block_of[b] = i as u8 + 1;
        }
        PairPartition::new(&block_of).expect("construction yields a pair partition")
    }
}

impl Iterator for Unlabelled {
    type Item = PairPartition;

    fn next(&mut self) -> Option<PairPartition> {
        if self.done {
            return None;
        }
        let out = self.build();
        let mut i = self.choice.len();
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            let radix = self.k - 1 - 2 * i;
            if self.choice[i] + 1 < radix {
                self.choice[i] += 1;
                break;
            }
            self.choice[i] = 0;
        }
        Some(out)
    }
}

/// Every labelling of every pair partition, `k!/2^{k/2}` in total.
pub fn enumerate_labelled(k: usize) -> Result<impl Iterator<Item = Vec<u8>>, PartitionError> {
    let base = enumerate_unlabelled(k)?;
    let perms = permutations(k / 2);
    Ok(base.flat_map(move |p| {
        let perms = perms.clone();
        perms.into_iter().map(move |perm| p.block_of().iter().map(|&b| perm[b as usize - 1]).collect())
    }))
}

fn permutations(m: usize) -> Vec<Vec<u8>> {
    let mut cur: Vec<u8> = (1..=m as u8).collect();
    let mut out = vec![cur.clone()];
    // lexicographic successor
    loop {
        let Some(i) = (1..cur.len()).rev().find(|&i| cur[i - 1] < cur[i]) else {
            return out;
        };
        let j = (i..cur.len()).rev().find(|&j| cur[j] > cur[i - 1]).expect("pivot exists");
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(cur.clone());
    }
}

pub fn count_noncrossing(k: usize) -> Result<BigUint, PartitionError> {
    check_k(k)?;
    Ok(catalan(k as u64 / 2))
}

/// `hist[c]` = number of partitions with `c` crossings.
pub fn crossing_histogram(k: usize) -> Result<Vec<u64>, PartitionError> {
    let mut hist = vec![0u64; (k / 2) * (k / 2).saturating_sub(1) / 2 + 1];
    for p in enumerate_unlabelled(k)? {
        hist[p.crossing_number()] += 1;
    }
    Ok(hist)
}

/// `sum over labelled partitions and letters of pattern_trace`.
pub fn star_f(k: usize) -> Result<i64, PartitionError> {
    let mut total = 0i64;
    for labelling in enumerate_labelled(k)? {
        for letters in letter_tuples(k / 2) {
            let word: Vec<u8> = labelling.iter().map(|&b| letters[b as usize - 1]).collect();
            let (re, im) = chain_trace(&word).expect("valid letters").parts();
            debug_assert_eq!(im, 0);
            total += re;
        }
    }
    Ok(total)
}
