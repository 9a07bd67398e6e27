//! Hypergraphs on vertices `1..=n` with a canonical sorted edge list.

use std::fmt::Write as _;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::numeric::binomial;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HypergraphError {
    #[error("vertex count must be positive")]
    NoVertices,
    #[error("edge {0} is empty")]
    EmptyEdge(usize),
    #[error("edge {edge} repeats vertex {vertex}")]
    RepeatedVertex { edge: usize, vertex: u32 },
    #[error("vertex {vertex} in edge {edge} outside 1..={n}")]
    VertexOutOfRange { edge: usize, vertex: u32, n: u32 },
    #[error("edge {0:?} listed twice")]
    DuplicateEdge(Vec<u32>),
    #[error("invalid generator parameters: {0}")]
    Parameters(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Hypergraph {
    n_vertices: u32,
    edges: Vec<Vec<u32>>,
}

impl Hypergraph {
    /// Canonicalizes: vertices sorted inside each edge, edges sorted
    /// lexicographically.
    pub fn new(n_vertices: u32, edges: Vec<Vec<u32>>) -> Result<Self, HypergraphError> {
        if n_vertices == 0 {
            return Err(HypergraphError::NoVertices);
        }
        let mut edges = edges;
        for (i, e) in edges.iter_mut().enumerate() {
            if e.is_empty() {
                return Err(HypergraphError::EmptyEdge(i));
            }
            e.sort_unstable();
            for w in e.windows(2) {
                if w[0] == w[1] {
                    return Err(HypergraphError::RepeatedVertex { edge: i, vertex: w[0] });
                }
            }
            if let Some(&v) = e.iter().find(|&&v| v == 0 || v > n_vertices) {
                return Err(HypergraphError::VertexOutOfRange { edge: i, vertex: v, n: n_vertices });
            }
        }
        edges.sort();
        for w in edges.windows(2) {
            if w[0] == w[1] {
                return Err(HypergraphError::DuplicateEdge(w[0].clone()));
            }
        }
        Ok(Self { n_vertices, edges })
    }

    pub fn n_vertices(&self) -> u32 {
        self.n_vertices
    }

    pub fn edges(&self) -> &[Vec<u32>] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_uniform(&self, p: usize) -> bool {
        self.edges.iter().all(|e| e.len() == p)
    }

    /// Bitmask of an edge for hypergraphs with at most 64 vertices.
    pub fn edge_mask(&self, i: usize) -> u64 {
        self.edges[i].iter().fold(0u64, |m, &v| m | 1u64 << (v - 1))
    }

    pub fn vertex_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.n_vertices as usize];
        for e in &self.edges {
            for &v in e {
                deg[v as usize - 1] += 1;
            }
        }
        deg
    }

    pub fn max_vertex_degree(&self) -> usize {
        self.vertex_degrees().into_iter().max().unwrap_or(0)
    }

    pub fn edges_intersect(&self, i: usize, j: usize) -> bool {
        let (a, b) = (&self.edges[i], &self.edges[j]);
        let (mut p, mut q) = (0, 0);
        while p < a.len() && q < b.len() {
            match a[p].cmp(&b[q]) {
                std::cmp::Ordering::Less => p += 1,
                std::cmp::Ordering::Greater => q += 1,
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }

    /// Line-graph degree of every edge (other edges sharing a vertex).
    pub fn hyperedge_degrees(&self) -> Vec<usize> {
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); self.n_vertices as usize];
        for (i, e) in self.edges.iter().enumerate() {
            for &v in e {
                incident[v as usize - 1].push(i);
            }
        }
        let mut stamp = vec![usize::MAX; self.edges.len()];
        self.edges
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let mut count = 0;
                for &v in e {
                    for &j in &incident[v as usize - 1] {
                        if j != i && stamp[j] != i {
                            stamp[j] = i;
                            count += 1;
                        }
                    }
                }
                count
            })
            .collect()
    }

    pub fn max_hyperedge_degree(&self) -> usize {
        self.hyperedge_degrees().into_iter().max().unwrap_or(0)
    }

    /// Number of unordered `j`-sets of pairwise vertex-disjoint edges.
    pub fn count_disjoint_edge_tuples(&self, j: usize) -> BigUint {
        if j == 0 {
            return BigUint::from(1u32);
        }
        let mut used = vec![false; self.n_vertices as usize + 1];
        let mut count = BigUint::from(0u32);
        self.disjoint_dfs(0, j, &mut used, &mut count);
        count
    }

    fn disjoint_dfs(&self, start: usize, left: usize, used: &mut [bool], count: &mut BigUint) {
        if left == 0 {
            *count += 1u32;
            return;
        }
        if self.edges.len() < start + left {
            return;
        }
        for i in start..=self.edges.len() - left {
            let e = &self.edges[i];
            if e.iter().any(|&v| used[v as usize]) {
                continue;
            }
            for &v in e {
                used[v as usize] = true;
            }
            self.disjoint_dfs(i + 1, left - 1, used, count);
            for &v in e {
                used[v as usize] = false;
            }
        }
    }

    /// Relabel vertices by `perm`, where `perm[v-1]` is the new label of `v`.
    pub fn relabel(&self, perm: &[u32]) -> Result<Self, HypergraphError> {
        if perm.len() != self.n_vertices as usize {
            return Err(HypergraphError::Parameters(format!(
                "permutation has length {}, expected {}",
                perm.len(),
                self.n_vertices
            )));
        }
        let mut seen = vec![false; perm.len() + 1];
        for &p in perm {
            if p == 0 || p as usize > perm.len() || seen[p as usize] {
                return Err(HypergraphError::Parameters("not a permutation".into()));
            }
            seen[p as usize] = true;
        }
        let edges = self
            .edges
            .iter()
            .map(|e| e.iter().map(|&v| perm[v as usize - 1]).collect())
            .collect();
        Self::new(self.n_vertices, edges)
    }

    /// Text form: `n <int>` then one space-separated edge per line.
    pub fn parse(text: &str) -> Result<Self, HypergraphError> {
        let mut n: Option<u32> = None;
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: String| HypergraphError::Parse { line: idx + 1, msg };
            match n {
                None => {
                    let mut it = line.split_whitespace();
                    if it.next() != Some("n") {
                        return Err(err("expected header `n <int>`".into()));
                    }
                    let v = it
                        .next()
                        .ok_or_else(|| err("missing vertex count".into()))?
                        .parse::<u32>()
                        .map_err(|e| err(e.to_string()))?;
                    if it.next().is_some() {
                        return Err(err("trailing tokens after vertex count".into()));
                    }
                    n = Some(v);
                }
                Some(_) => {
                    let edge = line
                        .split_whitespace()
                        .map(|t| t.parse::<u32>().map_err(|e| err(format!("{t:?}: {e}"))))
                        .collect::<Result<Vec<_>, _>>()?;
                    edges.push(edge);
                }
            }
        }
        let n = n.ok_or(HypergraphError::Parse { line: 0, msg: "missing header".into() })?;
        Self::new(n, edges)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("n {}\n", self.n_vertices);
        for e in &self.edges {
            let parts: Vec<String> = e.iter().map(u32::to_string).collect();
            let _ = writeln!(s, "{}", parts.join(" "));
        }
        s
    }
}

/// Closed chain `1-2-...-n-1`.
pub fn cycle_chain(n: u32) -> Result<Hypergraph, HypergraphError> {
    if n < 3 {
        return Err(HypergraphError::Parameters(format!("cycle chain needs n >= 3, got {n}")));
    }
    let mut edges: Vec<Vec<u32>> = (1..n).map(|i| vec![i, i + 1]).collect();
    edges.push(vec![1, n]);
    Hypergraph::new(n, edges)
}

pub fn complete_graph(n: u32) -> Result<Hypergraph, HypergraphError> {
    if n < 2 {
        return Err(HypergraphError::Parameters(format!("complete graph needs n >= 2, got {n}")));
    }
    complete_p_uniform(n, 2)
}

/// Vertex 1 joined to every other vertex.
pub fn star_graph(n: u32) -> Result<Hypergraph, HypergraphError> {
    if n < 2 {
        return Err(HypergraphError::Parameters(format!("star graph needs n >= 2, got {n}")));
    }
    Hypergraph::new(n, (2..=n).map(|v| vec![1, v]).collect())
}

/// All `p`-subsets of `1..=n`, in lexicographic order.
pub fn complete_p_uniform(n: u32, p: u32) -> Result<Hypergraph, HypergraphError> {
    if n == 0 || p == 0 || p > n {
        return Err(HypergraphError::Parameters(format!("need 1 <= p <= n, got n={n} p={p}")));
    }
    let count = binomial(n as u64, p as u64);
    if count > BigUint::from(50_000_000u32) {
        return Err(HypergraphError::Parameters(format!("C({n},{p}) = {count} edges is too many")));
    }
    let mut edges = Vec::new();
    let mut cur: Vec<u32> = (1..=p).collect();
    loop {
        edges.push(cur.clone());
        let mut i = p as usize;
        loop {
            if i == 0 {
                return Hypergraph::new(n, edges);
            }
            i -= 1;
            if cur[i] < n - (p - 1 - i as u32) {
                break;
            }
        }
        cur[i] += 1;
        for j in i + 1..p as usize {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Edges `{i, i+d mod n}` for every offset `d`.
pub fn circulant(n: u32, offsets: &[u32]) -> Result<Hypergraph, HypergraphError> {
    if n < 3 || offsets.is_empty() {
        return Err(HypergraphError::Parameters("circulant needs n >= 3 and at least one offset".into()));
    }
    let mut sorted = offsets.to_vec();
    sorted.sort_unstable();
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            return Err(HypergraphError::Parameters(format!("offset {} repeated", w[0])));
        }
    }
    if let Some(&d) = sorted.iter().find(|&&d| d == 0 || d > n / 2) {
        return Err(HypergraphError::Parameters(format!("offset {d} outside 1..={}", n / 2)));
    }
    let mut edges = Vec::new();
    for &d in &sorted {
        for i in 1..=n {
            let j = (i - 1 + d) % n + 1;
            let e = vec![i.min(j), i.max(j)];
            if 2 * d == n && i > d {
                continue;
            }
            edges.push(e);
        }
    }
    Hypergraph::new(n, edges)
}

/// Hypergeometric overlap distribution of a fixed `a`-set with a uniform
/// random `b`-subset of `n` points: `p(k) = C(a,k) C(n-a,b-k) / C(n,b)`.
pub fn overlap_pmf(n: u64, a: u64, b: u64) -> Result<Vec<f64>, HypergraphError> {
    Ok(overlap_pmf_exact(n, a, b)?.iter().map(|r| r.to_f64().unwrap_or(f64::NAN)).collect())
}

pub fn overlap_pmf_exact(n: u64, a: u64, b: u64) -> Result<Vec<BigRational>, HypergraphError> {
    if a > n || b > n {
        return Err(HypergraphError::Parameters(format!("need a, b <= n, got n={n} a={a} b={b}")));
    }
    let total = binomial(n, b);
    Ok((0..=a.min(b))
        .map(|k| {
            let num = if b - k > n - a { BigUint::from(0u32) } else { binomial(a, k) * binomial(n - a, b - k) };
            BigRational::new(num.into(), total.clone().into())
        })
        .collect())
}

/// `1 - C(n-a, b) / C(n, b)`.
pub fn nonempty_intersection_fraction(n: u64, a: u64, b: u64) -> Result<f64, HypergraphError> {
    let pmf = overlap_pmf_exact(n, a, b)?;
    let one = BigRational::from_integer(1.into());
    Ok((one - &pmf[0]).to_f64().unwrap_or(f64::NAN))
}

pub fn overlap_mean(n: u64, a: u64, b: u64) -> f64 {
    a as f64 * b as f64 / n as f64
}

pub fn overlap_variance(n: u64, a: u64, b: u64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let (n, a, b) = (n as f64, a as f64, b as f64);
    a * b / n * ((n - b) / n) * ((n - a) / (n - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degrees_of_generators() {
        assert_eq!(star_graph(5).unwrap().max_vertex_degree(), 4);
        assert_eq!(cycle_chain(6).unwrap().max_vertex_degree(), 2);
        let k5 = complete_graph(5).unwrap();
        assert_eq!(k5.max_vertex_degree(), 4);
        assert_eq!(k5.edge_count(), 10);
        assert_eq!(k5, complete_p_uniform(5, 2).unwrap());
        assert_eq!(circulant(6, &[1]).unwrap(), cycle_chain(6).unwrap());
    }

    #[test]
    fn line_graph_degrees() {
        // each edge of K5 meets 2 * 3 others through its two endpoints
        assert!(complete_graph(5).unwrap().hyperedge_degrees().iter().all(|&d| d == 6));
        assert_eq!(Hypergraph::new(4, vec![vec![1, 2, 3]]).unwrap().max_hyperedge_degree(), 0);
    }

    #[test]
    fn disjoint_tuples() {
        let k4 = complete_graph(4).unwrap();
        assert_eq!(k4.count_disjoint_edge_tuples(2), BigUint::from(3u32));
        assert_eq!(k4.count_disjoint_edge_tuples(1), BigUint::from(6u32));
        assert_eq!(star_graph(7).unwrap().count_disjoint_edge_tuples(2), BigUint::from(0u32));
        assert_eq!(k4.count_disjoint_edge_tuples(3), BigUint::from(0u32));
    }

    #[test]
    fn canonical_form_and_validation() {
        let g = Hypergraph::new(4, vec![vec![3, 1], vec![2, 1]]).unwrap();
        assert_eq!(g.edges(), &[vec![1, 2], vec![1, 3]]);
        assert!(matches!(Hypergraph::new(3, vec![vec![]]), Err(HypergraphError::EmptyEdge(0))));
        assert!(matches!(Hypergraph::new(3, vec![vec![1, 1]]), Err(HypergraphError::RepeatedVertex { .. })));
        assert!(matches!(Hypergraph::new(3, vec![vec![4]]), Err(HypergraphError::VertexOutOfRange { .. })));
        assert!(matches!(
            Hypergraph::new(3, vec![vec![1, 2], vec![2, 1]]),
            Err(HypergraphError::DuplicateEdge(_))
        ));
        assert!(Hypergraph::new(0, vec![]).is_err());
    }

    #[test]
    fn generator_errors() {
        assert!(cycle_chain(2).is_err());
        assert!(complete_p_uniform(4, 5).is_err());
        assert!(complete_p_uniform(4, 0).is_err());
        assert!(circulant(6, &[4]).is_err());
        assert!(circulant(6, &[1, 1]).is_err());
        assert!(circulant(6, &[]).is_err());
    }

    #[test]
    fn circulant_half_offset_not_doubled() {
        let g = circulant(6, &[3]).unwrap();
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.max_vertex_degree(), 1);
    }

    #[test]
    fn text_round_trip() {
        let g = circulant(7, &[1, 3]).unwrap();
        assert_eq!(Hypergraph::parse(&g.to_text()).unwrap(), g);
        let h = Hypergraph::parse("# comment\nn 4\n\n1 2 3\n4 2\n").unwrap();
        assert_eq!(h.edges(), &[vec![1, 2, 3], vec![2, 4]]);
        assert!(Hypergraph::parse("").is_err());
        assert!(Hypergraph::parse("m 3\n").is_err());
        assert!(Hypergraph::parse("n 3 4\n").is_err());
        assert!(Hypergraph::parse("n 3\n1 x\n").is_err());
    }

    #[test]
    fn overlap_examples() {
        let p = overlap_pmf(10, 2, 2).unwrap();
        assert!((p[0] - 28.0 / 45.0).abs() < 1e-15);
        assert_eq!(overlap_pmf(10, 0, 3).unwrap(), vec![1.0]);
        let mean: f64 = p.iter().enumerate().map(|(k, q)| k as f64 * q).sum();
        assert!((mean - overlap_mean(10, 2, 2)).abs() < 1e-14);
        assert!((nonempty_intersection_fraction(10, 2, 2).unwrap() - 17.0 / 45.0).abs() < 1e-15);
        assert!(overlap_pmf(3, 4, 1).is_err());
    }

    #[test]
    fn relabel_preserves_degrees() {
        let g = star_graph(5).unwrap();
        let h = g.relabel(&[5, 4, 3, 2, 1]).unwrap();
        assert_eq!(h.vertex_degrees(), vec![1, 1, 1, 1, 4]);
        assert!(g.relabel(&[1, 1, 2, 3, 4]).is_err());
    }
}
