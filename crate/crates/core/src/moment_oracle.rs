//! Exact expected moments `E 2^{-n} Tr H^k` from the tuple expansion,
//! split into the classes
//!
//! * `D`: some index appears other than exactly twice,
//! * `A`: every index appears twice and distinct indices sit on pairwise
//!   vertex-disjoint edges,
//! * `B`: every index appears twice, otherwise.
//!
//! Tuples are grouped by their set of distinct indices and multiplicities.
//! Within a group the trace only depends on the order through the signs of
//! anticommuting swaps, so each group contributes
//! `Tr(prod of odd-multiplicity strings) * W`, where `W` is the signed number
//! of arrangements, computed by dynamic programming over placed counts.

use std::collections::{BTreeMap, HashMap};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::ensemble::{CouplingDistribution, EnsembleError};
use crate::hypergraph::Hypergraph;
use crate::numeric::{binomial, double_factorial, factorial};
use crate::pauli::{PauliString, TraceValue, MAX_SITES};

pub const DEFAULT_BUDGET: u128 = 100_000_000;
pub const MAX_K: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("oracle needs {estimate} grouped patterns, above the budget of {budget}")]
    BudgetExceeded { estimate: u128, budget: u128 },
    #[error("k = {0} exceeds the supported maximum {MAX_K}")]
    KTooLarge(usize),
    #[error("{0} vertices exceed the 64-site encoding")]
    TooManySites(u32),
    #[error("hypergraph has no edges")]
    NoEdges,
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Class {
    D,
    A,
    B,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct GroupKey {
    class: Class,
    /// `sum_j m_j |e_j|`, the power of `3^{-1/2}`.
    s: u32,
    /// Sorted multiplicities.
    mults: Vec<u8>,
}

/// `(a + b/sqrt3) + i (c + d/sqrt3)`, times `e^{-1/2}` when `odd_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactValue {
    pub re: BigRational,
    pub re_sqrt3: BigRational,
    pub im: BigRational,
    pub im_sqrt3: BigRational,
    pub odd_k: bool,
    pub edge_count: u64,
}

impl ExactValue {
    fn zero(odd_k: bool, edge_count: u64) -> Self {
        let z = BigRational::zero();
        Self { re: z.clone(), re_sqrt3: z.clone(), im: z.clone(), im_sqrt3: z, odd_k, edge_count }
    }

    fn add_assign(&mut self, o: &ExactValue) {
        self.re += &o.re;
        self.re_sqrt3 += &o.re_sqrt3;
        self.im += &o.im;
        self.im_sqrt3 += &o.im_sqrt3;
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.re_sqrt3.is_zero() && self.im.is_zero() && self.im_sqrt3.is_zero()
    }

    /// Exactly equal to the rational `r`.
    pub fn equals_rational(&self, r: &BigRational) -> bool {
        if r.is_zero() {
            return self.is_zero();
        }
        !self.odd_k && self.re_sqrt3.is_zero() && self.im.is_zero() && self.im_sqrt3.is_zero() && &self.re == r
    }

    fn scale(&self) -> f64 {
        if self.odd_k {
            1.0 / (self.edge_count as f64).sqrt()
        } else {
            1.0
        }
    }

    pub fn re_f64(&self) -> f64 {
        let s3 = 1.0 / 3f64.sqrt();
        (self.re.to_f64().unwrap_or(f64::NAN) + s3 * self.re_sqrt3.to_f64().unwrap_or(f64::NAN)) * self.scale()
    }

    pub fn im_f64(&self) -> f64 {
        let s3 = 1.0 / 3f64.sqrt();
        (self.im.to_f64().unwrap_or(f64::NAN) + s3 * self.im_sqrt3.to_f64().unwrap_or(f64::NAN)) * self.scale()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentBreakdown {
    pub k: usize,
    pub total: f64,
    pub part_d: f64,
    pub part_a: f64,
    pub part_b: f64,
    #[serde(skip)]
    pub exact: [ExactValue; 4],
    /// Number of tuples in `A` and `B`.
    #[serde(serialize_with = "big_str")]
    pub a_tuples: BigUint,
    #[serde(serialize_with = "big_str")]
    pub b_tuples: BigUint,
    pub index_count: usize,
}

fn big_str<S: serde::Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

impl MomentBreakdown {
    pub fn exact_total(&self) -> &ExactValue {
        &self.exact[0]
    }
}

/// Distribution-independent part of the oracle for one `(g, k)`.
#[derive(Debug, Clone)]
pub struct OracleTable {
    k: usize,
    edge_count: u64,
    index_count: usize,
    groups: BTreeMap<GroupKey, (i128, i128)>,
    a_tuples: BigUint,
    b_tuples: BigUint,
}

struct Index {
    strings: Vec<PauliString>,
    size: Vec<u32>,
    edge: Vec<u32>,
    mask: Vec<u64>,
}

fn build_index(g: &Hypergraph) -> Result<Index, OracleError> {
    if g.n_vertices() > MAX_SITES {
        return Err(OracleError::TooManySites(g.n_vertices()));
    }
    if g.edge_count() == 0 {
        return Err(OracleError::NoEdges);
    }
    let ens = crate::ensemble::Ensemble::new(g, CouplingDistribution::Rademacher)?;
    let strings = ens.strings().to_vec();
    let mut size = Vec::with_capacity(strings.len());
    let mut edge = Vec::with_capacity(strings.len());
    let mut mask = Vec::with_capacity(strings.len());
    for (ei, e) in g.edges().iter().enumerate() {
        let count = 3usize.pow(e.len() as u32);
        for _ in 0..count {
            size.push(e.len() as u32);
            edge.push(ei as u32);
            mask.push(g.edge_mask(ei));
        }
    }
    Ok(Index { strings, size, edge, mask })
}

/// Number of compositions of `k` into `d` parts, each at least 2.
fn compositions_count(k: usize, d: usize) -> u128 {
    if d == 0 || 2 * d > k {
        return 0;
    }
    binomial((k - d - 1) as u64, (d - 1) as u64).to_u128().unwrap_or(u128::MAX)
}

/// Grouped patterns the oracle will visit.
pub fn pattern_estimate(index_count: usize, k: usize) -> u128 {
    (1..=k / 2)
        .map(|d| {
            binomial(index_count as u64, d as u64)
                .to_u128()
                .unwrap_or(u128::MAX)
                .saturating_mul(compositions_count(k, d))
        })
        .fold(0u128, |a, b| a.saturating_add(b))
}

fn compositions(k: usize, d: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(d);
    fn rec(left: usize, d: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if cur.len() + 1 == d {
            if left >= 2 {
                cur.push(left as u8);
                out.push(cur.clone());
                cur.pop();
            }
            return;
        }
        let rest = d - cur.len() - 1;
        for m in 2..=left.saturating_sub(2 * rest) {
            cur.push(m as u8);
            rec(left - m, d, cur, out);
            cur.pop();
        }
    }
    if d > 0 && 2 * d <= k {
        rec(k, d, &mut cur, &mut out);
    }
    out
}

/// Signed count of words with letter counts `m`, each inversion between
/// anticommuting letters contributing a factor -1. `adj[a]` has bit `b` set
/// when letters `a` and `b` anticommute.
pub fn signed_arrangements(m: &[u8], adj: &[u32]) -> i128 {
    let d = m.len();
    let mut radix = vec![1usize; d + 1];
    for j in 0..d {
        radix[j + 1] = radix[j] * (m[j] as usize + 1);
    }
    let states = radix[d];
    let mut dp = vec![0i128; states];
    dp[0] = 1;
    let mut counts = vec![0u8; d];
    for state in 0..states {
        let v = dp[state];
        if v == 0 {
            continue;
        }
        let mut t = state;
        for j in 0..d {
            counts[j] = (t % (m[j] as usize + 1)) as u8;
            t /= m[j] as usize + 1;
        }
        for b in 0..d {
            if counts[b] == m[b] {
                continue;
            }
            let mut flips = 0u32;
            for a in b + 1..d {
                if adj[b] >> a & 1 == 1 {
                    flips += counts[a] as u32;
                }
            }
            let next = state + radix[b];
            if flips % 2 == 0 {
                dp[next] += v;
            } else {
                dp[next] -= v;
            }
        }
    }
    dp[states - 1]
}

#[derive(Default)]
struct Partial {
    groups: BTreeMap<GroupKey, (i128, i128)>,
    a_tuples: BigUint,
    b_tuples: BigUint,
    memo: HashMap<(Vec<u8>, Vec<u32>), i128>,
}

impl Partial {
    fn merge(mut self, other: Partial) -> Partial {
        for (k, (re, im)) in other.groups {
            let e = self.groups.entry(k).or_insert((0, 0));
            e.0 += re;
            e.1 += im;
        }
        self.a_tuples += other.a_tuples;
        self.b_tuples += other.b_tuples;
        self
    }
}

impl OracleTable {
    pub fn build(g: &Hypergraph, k: usize, budget: u128) -> Result<Self, OracleError> {
        if k > MAX_K {
            return Err(OracleError::KTooLarge(k));
        }
        let idx = build_index(g)?;
        let ni = idx.strings.len();
        let estimate = pattern_estimate(ni, k);
        if estimate > budget {
            return Err(OracleError::BudgetExceeded { estimate, budget });
        }
        let mut table = OracleTable {
            k,
            edge_count: g.edge_count() as u64,
            index_count: ni,
            groups: BTreeMap::new(),
            a_tuples: BigUint::zero(),
            b_tuples: BigUint::zero(),
        };
        if k == 0 {
            table.groups.insert(GroupKey { class: Class::A, s: 0, mults: vec![] }, (1, 0));
            table.a_tuples = BigUint::one();
            return Ok(table);
        }
        let comps: Vec<Vec<Vec<u8>>> = (0..=k / 2).map(|d| compositions(k, d)).collect();
        let p2_tuples = if k % 2 == 0 {
            factorial(k as u64) / (BigUint::one() << (k / 2))
        } else {
            BigUint::zero()
        };
        let merged = (0..ni)
            .into_par_iter()
            .fold(Partial::default, |mut part, first| {
                let mut chosen = vec![first];
                visit(&idx, &comps, k, &p2_tuples, &mut chosen, &mut part);
                part
            })
            .reduce(Partial::default, Partial::merge);
        table.groups = merged.groups;
        table.a_tuples = merged.a_tuples;
        table.b_tuples = merged.b_tuples;
        Ok(table)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn index_count(&self) -> usize {
        self.index_count
    }

    pub fn evaluate(&self, dist: CouplingDistribution) -> MomentBreakdown {
        let odd = self.k % 2 == 1;
        let e = BigInt::from(self.edge_count);
        let e_pow = BigRational::new(BigInt::one(), e.pow((self.k / 2) as u32));
        let moments: Vec<BigRational> = (0..=self.k as u32).map(|m| dist.moment(m)).collect();
        let mut parts = [
            ExactValue::zero(odd, self.edge_count),
            ExactValue::zero(odd, self.edge_count),
            ExactValue::zero(odd, self.edge_count),
        ];
        for (key, &(re, im)) in &self.groups {
            let mut w = e_pow.clone();
            for &m in &key.mults {
                w *= &moments[m as usize];
            }
            if w.is_zero() {
                continue;
            }
            w /= BigRational::from_integer(BigInt::from(3).pow(key.s / 2));
            let re = BigRational::from_integer(re.into()) * &w;
            let im = BigRational::from_integer(im.into()) * &w;
            let slot = &mut parts[key.class as usize];
            if key.s % 2 == 0 {
                slot.re += re;
                slot.im += im;
            } else {
                slot.re_sqrt3 += re;
                slot.im_sqrt3 += im;
            }
        }
        let mut total = ExactValue::zero(odd, self.edge_count);
        for p in &parts {
            total.add_assign(p);
        }
        let [d, a, b] = parts;
        MomentBreakdown {
            k: self.k,
            total: total.re_f64(),
            part_d: d.re_f64(),
            part_a: a.re_f64(),
            part_b: b.re_f64(),
            exact: [total, d, a, b],
            a_tuples: self.a_tuples.clone(),
            b_tuples: self.b_tuples.clone(),
            index_count: self.index_count,
        }
    }
}

fn visit(idx: &Index, comps: &[Vec<Vec<u8>>], k: usize, p2_tuples: &BigUint, chosen: &mut Vec<usize>, part: &mut Partial) {
    let d = chosen.len();
    if 2 * d > k {
        return;
    }
    evaluate_set(idx, &comps[d], k, p2_tuples, chosen, part);
    if 2 * (d + 1) > k {
        return;
    }
    let last = *chosen.last().expect("nonempty");
    for next in last + 1..idx.strings.len() {
        chosen.push(next);
        visit(idx, comps, k, p2_tuples, chosen, part);
        chosen.pop();
    }
}

fn evaluate_set(idx: &Index, comps: &[Vec<u8>], k: usize, p2_tuples: &BigUint, chosen: &[usize], part: &mut Partial) {
    let d = chosen.len();
    let mut adj = vec![0u32; d];
    let mut disjoint = true;
    for a in 0..d {
        for b in a + 1..d {
            let (i, j) = (chosen[a], chosen[b]);
            if !idx.strings[i].commutes_unchecked(&idx.strings[j]) {
                adj[a] |= 1 << b;
                adj[b] |= 1 << a;
            }
            if idx.mask[i] & idx.mask[j] != 0 || idx.edge[i] == idx.edge[j] {
                disjoint = false;
            }
        }
    }
    let identity = PauliString::identity(idx.strings[chosen[0]].n_sites()).expect("valid size");
    for m in comps {
        let pair_only = m.iter().all(|&x| x == 2);
        let class = if !pair_only {
            Class::D
        } else if disjoint {
            Class::A
        } else {
            Class::B
        };
        if pair_only {
            match class {
                Class::A => part.a_tuples += p2_tuples,
                _ => part.b_tuples += p2_tuples,
            }
        }
        let mut prod = identity;
        for (j, &mj) in m.iter().enumerate() {
            if mj % 2 == 1 {
                prod = prod.mul_unchecked(&idx.strings[chosen[j]]);
            }
        }
        let tr = prod.normalized_trace();
        if tr == TraceValue::Zero {
            continue;
        }
        let key = (m.clone(), adj.clone());
        let w = match part.memo.get(&key) {
            Some(&w) => w,
            None => {
                let w = signed_arrangements(m, &adj);
                part.memo.insert(key, w);
                w
            }
        };
        if w == 0 {
            continue;
        }
        let (tre, tim) = tr.parts();
        let s: u32 = chosen.iter().zip(m).map(|(&i, &mj)| mj as u32 * idx.size[i]).sum();
        let mut mults = m.clone();
        mults.sort_unstable();
        let entry = part.groups.entry(GroupKey { class, s, mults }).or_insert((0, 0));
        entry.0 += tre as i128 * w;
        entry.1 += tim as i128 * w;
    }
    debug_assert!(k >= 2 * d);
}

pub fn expected_moment(g: &Hypergraph, dist: CouplingDistribution, k: usize) -> Result<MomentBreakdown, OracleError> {
    expected_moment_with_budget(g, dist, k, DEFAULT_BUDGET)
}

pub fn expected_moment_with_budget(
    g: &Hypergraph,
    dist: CouplingDistribution,
    k: usize,
    budget: u128,
) -> Result<MomentBreakdown, OracleError> {
    Ok(OracleTable::build(g, k, budget)?.evaluate(dist))
}

/// `|part_B|` with unit-variance couplings.
pub fn bnk_fraction(g: &Hypergraph, k: usize) -> Result<f64, OracleError> {
    Ok(expected_moment(g, CouplingDistribution::Rademacher, k)?.part_b.abs())
}

/// Leading term `(k-1)!! k(k-2)/4 * d_max/e` of the bound on `|part_B|`.
pub fn bnk_leading_bound(g: &Hypergraph, k: usize) -> f64 {
    let df = double_factorial(k as i64 - 1).to_f64().unwrap_or(f64::NAN);
    df * (k * k.saturating_sub(2)) as f64 / 4.0 * g.max_vertex_degree() as f64 / g.edge_count() as f64
}
