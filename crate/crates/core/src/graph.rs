//! Undirected simple graphs, connected-graph enumeration up to isomorphism and
//! brute-force minimum vertex cover.
//!
//! Bit strings follow one convention everywhere in the crate: bit `i` of the
//! integer form is vertex (qubit) `i`, and the textual form prints vertex 0
//! first. So the text `110` is the integer `0b011`.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest vertex count accepted by the exhaustive cover search.
pub const MAX_COVER_VERTICES: usize = 20;
/// Largest vertex count accepted by canonical labelling and enumeration.
pub const MAX_CANONICAL_VERTICES: usize = 7;

/// A fixed-length bit string, one bit per vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BitString {
    bits: u32,
    len: u8,
}

impl BitString {
    pub fn new(bits: u32, len: usize) -> Result<Self> {
        if len > 32 {
            return Err(Error::contract(format!("bit string length {len} exceeds 32")));
        }
        if len < 32 && bits >> len != 0 {
            return Err(Error::contract(format!(
                "value {bits:#b} does not fit in {len} bits"
            )));
        }
        Ok(Self {
            bits,
            len: len as u8,
        })
    }

    /// The all-zero string of length `len`.
    pub fn zeros(len: usize) -> Self {
        Self::new(0, len).expect("length checked by caller")
    }

    /// Integer form; also the computational basis index.
    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn len(self) -> usize {
        self.len as usize
    }

    pub fn is_empty(self) -> bool {
        self.len == 0
    }

    pub fn get(self, i: usize) -> bool {
        (self.bits >> i) & 1 == 1
    }

    pub fn with(self, i: usize) -> Self {
        Self {
            bits: self.bits | (1 << i),
            len: self.len,
        }
    }

    pub fn count_ones(self) -> u32 {
        self.bits.count_ones()
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut bits = 0u32;
        for (i, ch) in s.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => bits |= 1 << i,
                other => {
                    return Err(Error::contract(format!(
                        "invalid character {other:?} in bit string {s:?}"
                    )))
                }
            }
        }
        Self::new(bits, s.chars().count())
    }
}

/// An undirected simple graph stored as a sorted, normalized edge list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Graph {
    n_vertices: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Builds a graph, normalizing each pair to `u < v`, sorting and
    /// removing duplicates. Self-loops and out-of-range endpoints are errors.
    pub fn new(n_vertices: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n_vertices == 0 {
            return Err(Error::contract("graph must have at least one vertex"));
        }
        if n_vertices > 32 {
            return Err(Error::contract(format!(
                "graph has {n_vertices} vertices; at most 32 are supported"
            )));
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a >= n_vertices || b >= n_vertices {
                return Err(Error::contract(format!(
                    "edge ({a}, {b}) has an endpoint outside 0..{n_vertices}"
                )));
            }
            if a == b {
                return Err(Error::contract(format!("self-loop at vertex {a}")));
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(Self {
            n_vertices,
            edges: set.into_iter().collect(),
        })
    }

    pub fn complete(n: usize) -> Result<Self> {
        Self::new(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))))
    }

    pub fn path(n: usize) -> Result<Self> {
        Self::new(n, (1..n).map(|v| (v - 1, v)))
    }

    pub fn cycle(n: usize) -> Result<Self> {
        Self::new(n, (0..n).map(|v| (v, (v + 1) % n)))
    }

    pub fn star(n: usize) -> Result<Self> {
        Self::new(n, (1..n).map(|v| (0, v)))
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n_vertices];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    pub fn is_connected(&self) -> bool {
        let mut adj = vec![Vec::new(); self.n_vertices];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut seen = vec![false; self.n_vertices];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut visited = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    visited += 1;
                    queue.push_back(v);
                }
            }
        }
        visited == self.n_vertices
    }

    /// Relabels vertices: vertex `v` becomes `perm[v]`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n_vertices {
            return Err(Error::contract(format!(
                "permutation has length {}, graph has {} vertices",
                perm.len(),
                self.n_vertices
            )));
        }
        let mut seen = vec![false; perm.len()];
        for &p in perm {
            if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
                return Err(Error::contract(format!("{perm:?} is not a permutation")));
            }
        }
        Self::new(
            self.n_vertices,
            self.edges.iter().map(|&(u, v)| (perm[u], perm[v])),
        )
    }

    /// Edge-list text: `n m` then one `u v` line per edge.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{} {}\n", self.n_vertices, self.edges.len());
        for (u, v) in &self.edges {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }

    /// Parses edge-list text. `source_name` only labels error messages.
    pub fn parse_edge_list(text: &str, source_name: &str) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse {
            source_name: source_name.to_string(),
            line,
            message,
        };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());

        let (header_line, header) = lines
            .next()
            .ok_or_else(|| err(1, "missing `<n_vertices> <n_edges>` header".into()))?;
        let (n, m) = parse_pair(header)
            .map_err(|msg| err(header_line, format!("bad header: {msg}")))?;
        if n == 0 || n > 32 {
            return Err(err(header_line, format!("vertex count {n} outside 1..=32")));
        }

        let mut edges = Vec::with_capacity(m);
        let mut last_line = header_line;
        for (line, body) in lines {
            last_line = line;
            let (u, v) = parse_pair(body).map_err(|msg| err(line, msg))?;
            if u >= v {
                return Err(err(line, format!("edge `{u} {v}` must satisfy u < v")));
            }
            if v >= n {
                return Err(err(line, format!("vertex {v} out of range 0..{n}")));
            }
            if edges.contains(&(u, v)) {
                return Err(err(line, format!("duplicate edge `{u} {v}`")));
            }
            edges.push((u, v));
        }
        if edges.len() != m {
            return Err(err(
                last_line,
                format!("header declares {m} edges but {} were listed", edges.len()),
            ));
        }
        Self::new(n, edges)
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_edge_list(&text, &path.display().to_string())
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_edge_list()).map_err(|e| Error::io(path, e))
    }

    fn edge_masks(&self) -> Vec<u32> {
        self.edges.iter().map(|&(u, v)| (1 << u) | (1 << v)).collect()
    }
}

fn parse_pair(line: &str) -> std::result::Result<(usize, usize), String> {
    let mut it = line.split_whitespace();
    let mut next = |what: &str| -> std::result::Result<usize, String> {
        let tok = it.next().ok_or_else(|| format!("missing {what}"))?;
        tok.parse()
            .map_err(|_| format!("{what} `{tok}` is not a non-negative integer"))
    };
    let a = next("first value")?;
    let b = next("second value")?;
    if let Some(extra) = it.next() {
        return Err(format!("unexpected trailing token `{extra}`"));
    }
    Ok((a, b))
}

/// All optimal covers of a graph together with their size.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverSolution {
    pub size: u32,
    /// Sorted by basis index.
    pub covers: Vec<BitString>,
}

impl CoverSolution {
    pub fn contains(&self, z: BitString) -> bool {
        self.covers.binary_search(&z).is_ok()
    }
}

pub fn is_vertex_cover(g: &Graph, subset: BitString) -> Result<bool> {
    check_len(g, subset)?;
    Ok(g
        .edges
        .iter()
        .all(|&(u, v)| subset.get(u) || subset.get(v)))
}

pub(crate) fn check_len(g: &Graph, z: BitString) -> Result<()> {
    if z.len() != g.n_vertices {
        return Err(Error::contract(format!(
            "bit string has length {}, graph has {} vertices",
            z.len(),
            g.n_vertices
        )));
    }
    Ok(())
}

/// Exhaustive scan over all `2^n` subsets.
pub fn min_vertex_covers(g: &Graph) -> Result<CoverSolution> {
    let n = g.n_vertices;
    if n > MAX_COVER_VERTICES {
        return Err(Error::contract(format!(
            "exhaustive cover search limited to {MAX_COVER_VERTICES} vertices, got {n}"
        )));
    }
    let masks = g.edge_masks();
    let mut best = u32::MAX;
    let mut covers = Vec::new();
    for s in 0u32..(1 << n) {
        let size = s.count_ones();
        if size > best || !masks.iter().all(|&m| s & m != 0) {
            continue;
        }
        if size < best {
            best = size;
            covers.clear();
        }
        covers.push(BitString { bits: s, len: n as u8 });
    }
    Ok(CoverSolution { size: best, covers })
}

/// Canonical isomorphism label.
///
/// The label is the vertex count followed by the lexicographically smallest
/// upper-triangle adjacency sequence over all `n!` relabelings, packed
/// big-endian into four bytes.
pub fn canonical_form(g: &Graph) -> Result<Vec<u8>> {
    let n = g.n_vertices;
    if n > MAX_CANONICAL_VERTICES {
        return Err(Error::contract(format!(
            "canonical labelling limited to {MAX_CANONICAL_VERTICES} vertices, got {n}"
        )));
    }
    let code = canonical_code(n, edge_code(g));
    let mut label = vec![n as u8];
    label.extend_from_slice(&code.to_be_bytes());
    Ok(label)
}

/// Index of pair `(u, v)`, `u < v`, in row-major upper-triangle order.
fn pair_index(n: usize, u: usize, v: usize) -> usize {
    u * n - u * (u + 1) / 2 + (v - u - 1)
}

fn n_pairs(n: usize) -> usize {
    n * (n - 1) / 2
}

/// Adjacency sequence as an integer whose numeric order matches the
/// lexicographic order of the sequence (first pair is the top bit).
fn edge_code(g: &Graph) -> u32 {
    let n = g.n_vertices;
    let top = n_pairs(n);
    g.edges
        .iter()
        .fold(0, |acc, &(u, v)| acc | 1 << (top - 1 - pair_index(n, u, v)))
}

fn graph_from_code(n: usize, code: u32) -> Graph {
    let top = n_pairs(n);
    let edges = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .filter(|&(u, v)| code >> (top - 1 - pair_index(n, u, v)) & 1 == 1);
    Graph::new(n, edges).expect("pairs are valid by construction")
}

/// For every permutation of `0..n`, the bit each code bit moves to.
fn permutation_tables(n: usize) -> &'static [Vec<u8>] {
    static TABLES: [OnceLock<Vec<Vec<u8>>>; MAX_CANONICAL_VERTICES + 1] =
        [const { OnceLock::new() }; MAX_CANONICAL_VERTICES + 1];
    TABLES[n].get_or_init(|| {
        let top = n_pairs(n);
        let mut tables = Vec::new();
        let mut perm: Vec<usize> = (0..n).collect();
        loop {
            let mut table = vec![0u8; top];
            for u in 0..n {
                for v in u + 1..n {
                    let (a, b) = (perm[u].min(perm[v]), perm[u].max(perm[v]));
                    table[top - 1 - pair_index(n, u, v)] = (top - 1 - pair_index(n, a, b)) as u8;
                }
            }
            tables.push(table);
            if !next_permutation(&mut perm) {
                break;
            }
        }
        tables
    })
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).expect("pivot exists");
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

fn canonical_code(n: usize, code: u32) -> u32 {
    if n < 2 {
        return 0;
    }
    let bits: Vec<usize> = (0..n_pairs(n)).filter(|b| code >> b & 1 == 1).collect();
    permutation_tables(n)
        .iter()
        .map(|table| bits.iter().fold(0u32, |acc, &b| acc | 1 << table[b]))
        .min()
        .expect("at least one permutation")
}

/// One representative per isomorphism class of connected simple graphs on
/// `n` vertices, ordered by edge count and then canonical label.
///
/// Classes are grown edge by edge from the empty graph; each representative
/// is the graph decoded from its canonical label.
pub fn enumerate_connected_graphs(n: usize) -> Result<Vec<Graph>> {
    if !(1..=MAX_CANONICAL_VERTICES).contains(&n) {
        return Err(Error::contract(format!(
            "enumeration supports 1..={MAX_CANONICAL_VERTICES} vertices, got {n}"
        )));
    }
    let top = n_pairs(n);
    let mut level: BTreeSet<u32> = BTreeSet::from([0]);
    let mut out = Vec::new();
    for _ in 0..=top {
        out.extend(
            level
                .iter()
                .map(|&code| graph_from_code(n, code))
                .filter(Graph::is_connected),
        );
        level = level
            .iter()
            .flat_map(|&code| {
                (0..top)
                    .filter(move |b| code >> b & 1 == 0)
                    .map(move |b| canonical_code(n, code | 1 << b))
            })
            .collect();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    fn triangle() -> Graph {
        Graph::complete(3).unwrap()
    }

    #[test]
    fn bit_string_text_puts_vertex_zero_first() {
        let z = bs("110");
        assert_eq!(z.bits(), 0b011);
        assert_eq!(z.to_string(), "110");
        assert!(BitString::new(0b1000, 3).is_err());
        assert!("10x".parse::<BitString>().is_err());
    }

    #[test]
    fn cover_checks() {
        let t = triangle();
        assert!(is_vertex_cover(&t, bs("110")).unwrap());
        assert!(!is_vertex_cover(&t, bs("100")).unwrap());
        let star = Graph::star(5).unwrap();
        assert!(is_vertex_cover(&star, bs("10000")).unwrap());
        assert!(matches!(
            is_vertex_cover(&t, bs("1100")),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn minimum_covers_of_small_graphs() {
        let sol = min_vertex_covers(&triangle()).unwrap();
        assert_eq!(sol.size, 2);
        let covers: Vec<String> = sol.covers.iter().map(|c| c.to_string()).collect();
        assert_eq!(covers, ["110", "101", "011"]);

        let sol = min_vertex_covers(&Graph::star(5).unwrap()).unwrap();
        assert_eq!((sol.size, sol.covers), (1, vec![bs("10000")]));

        let sol = min_vertex_covers(&Graph::path(5).unwrap()).unwrap();
        assert_eq!((sol.size, sol.covers), (2, vec![bs("01010")]));

        assert!(min_vertex_covers(&Graph::path(21).unwrap()).is_err());
    }

    #[test]
    fn complete_graph_needs_all_but_one() {
        for n in 2..=6 {
            let sol = min_vertex_covers(&Graph::complete(n).unwrap()).unwrap();
            assert_eq!(sol.size as usize, n - 1);
            assert_eq!(sol.covers.len(), n);
        }
    }

    #[test]
    fn canonical_labels() {
        let p = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        let q = Graph::new(3, [(1, 0), (0, 2)]).unwrap();
        assert_eq!(canonical_form(&p).unwrap(), canonical_form(&q).unwrap());
        assert_ne!(
            canonical_form(&p).unwrap(),
            canonical_form(&triangle()).unwrap()
        );
        assert!(canonical_form(&Graph::path(8).unwrap()).is_err());
    }

    #[test]
    fn enumeration_counts() {
        let counts: Vec<usize> = (1..=5)
            .map(|n| enumerate_connected_graphs(n).unwrap().len())
            .collect();
        assert_eq!(counts, [1, 1, 2, 6, 21]);
        assert_eq!(
            enumerate_connected_graphs(2).unwrap(),
            vec![Graph::new(2, [(0, 1)]).unwrap()]
        );
        assert!(enumerate_connected_graphs(0).is_err());
        assert!(enumerate_connected_graphs(8).is_err());
    }

    #[test]
    fn enumeration_order_is_by_edge_count() {
        let graphs = enumerate_connected_graphs(5).unwrap();
        assert!(graphs.windows(2).all(|w| w[0].n_edges() <= w[1].n_edges()));
        assert_eq!(graphs.iter().filter(|g| g.n_edges() == 5).count(), 5);
    }

    #[test]
    fn edge_list_parse_errors_carry_line_numbers() {
        let g = Graph::parse_edge_list("3 2\n0 1\n1 2\n", "t").unwrap();
        assert_eq!(g, Graph::path(3).unwrap());
        assert_eq!(Graph::parse_edge_list(&g.to_edge_list(), "t").unwrap(), g);

        let cases = [
            ("3 2\n0 1\n2 1\n", 3),
            ("3 2\n0 1\n0 1\n", 3),
            ("3 1\n0 5\n", 2),
            ("3 2\n0 1\n", 2),
            ("x 2\n", 1),
            ("3 1\n0 1 2\n", 2),
        ];
        for (text, line) in cases {
            match Graph::parse_edge_list(text, "t") {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("expected parse error for {text:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn graph_construction_rejects_bad_edges() {
        assert!(Graph::new(3, [(0, 3)]).is_err());
        assert!(Graph::new(3, [(1, 1)]).is_err());
        assert!(Graph::new(0, []).is_err());
        let g = Graph::new(3, [(2, 0), (0, 2), (1, 0)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (0, 2)]);
    }
}
