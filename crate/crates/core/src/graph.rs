//! Finite bipartite graphs with labelled vertices and (possibly parallel)
//! edges, their paths, concatenation, and Perron-Frobenius data.
//!
//! Edges are stored sorted by id, so an edge index order is the canonical
//! lexicographic order used for every basis built on top of a graph.

use std::collections::{HashMap, HashSet, VecDeque};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Which vertex class a vertex belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn flip(self) -> Self {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex {
    pub parity: Parity,
    pub index: usize,
}

impl Vertex {
    pub fn even(index: usize) -> Self {
        Vertex {
            parity: Parity::Even,
            index,
        }
    }

    pub fn odd(index: usize) -> Self {
        Vertex {
            parity: Parity::Odd,
            index,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub id: String,
    pub even: usize,
    pub odd: usize,
    /// For a concatenated graph: the indices of the two factor edges.
    pub parts: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteGraph {
    even: Vec<String>,
    odd: Vec<String>,
    edges: Vec<Edge>,
    // kept through transposition so that a double transpose is the identity
    base: Option<Vertex>,
}

fn index_labels(labels: &[String], what: &str) -> Result<HashMap<String, usize>> {
    let mut map = HashMap::with_capacity(labels.len());
    for (i, l) in labels.iter().enumerate() {
        if map.insert(l.clone(), i).is_some() {
            return Err(Error::InvalidGraph(format!(
                "duplicate {what} vertex `{l}`"
            )));
        }
    }
    Ok(map)
}

impl BipartiteGraph {
    /// Builds a graph from vertex labels and `(id, even label, odd label)` edges.
    pub fn new<S: AsRef<str>>(
        even: Vec<String>,
        odd: Vec<String>,
        edges: &[(S, S, S)],
        base: Option<&str>,
    ) -> Result<Self> {
        let even_ix = index_labels(&even, "even")?;
        let odd_ix = index_labels(&odd, "odd")?;
        let mut built = Vec::with_capacity(edges.len());
        for (id, e, o) in edges {
            let (id, e, o) = (id.as_ref(), e.as_ref(), o.as_ref());
            let even = *even_ix.get(e).ok_or_else(|| {
                Error::InvalidGraph(format!("edge `{id}`: unknown even vertex `{e}`"))
            })?;
            let odd = *odd_ix.get(o).ok_or_else(|| {
                Error::InvalidGraph(format!("edge `{id}`: unknown odd vertex `{o}`"))
            })?;
            built.push(Edge {
                id: id.to_string(),
                even,
                odd,
                parts: None,
            });
        }
        let base = match base {
            Some(b) => Some(Vertex::even(*even_ix.get(b).ok_or_else(|| {
                Error::InvalidGraph(format!("base `{b}` is not an even vertex"))
            })?)),
            None => None,
        };
        Self::from_parts(even, odd, built, base)
    }

    fn from_parts(
        even: Vec<String>,
        odd: Vec<String>,
        mut edges: Vec<Edge>,
        base: Option<Vertex>,
    ) -> Result<Self> {
        edges.sort_by(|a, b| a.id.cmp(&b.id));
        for w in edges.windows(2) {
            if w[0].id == w[1].id {
                return Err(Error::InvalidGraph(format!(
                    "duplicate edge id `{}`",
                    w[0].id
                )));
            }
        }
        Ok(BipartiteGraph {
            even,
            odd,
            edges,
            base,
        })
    }

    pub fn even(&self) -> &[String] {
        &self.even
    }

    pub fn odd(&self) -> &[String] {
        &self.odd
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, i: usize) -> &Edge {
        &self.edges[i]
    }

    /// The distinguished even vertex, if any.
    pub fn base(&self) -> Option<usize> {
        self.base
            .filter(|v| v.parity == Parity::Even)
            .map(|v| v.index)
    }

    /// The distinguished vertex of either class; a transposed graph keeps
    /// its base in the odd class.
    pub fn base_vertex(&self) -> Option<Vertex> {
        self.base
    }

    pub fn with_base(mut self, base: Option<Vertex>) -> Self {
        self.base = base;
        self
    }

    pub fn even_index(&self, label: &str) -> Option<usize> {
        self.even.iter().position(|l| l == label)
    }

    pub fn odd_index(&self, label: &str) -> Option<usize> {
        self.odd.iter().position(|l| l == label)
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.binary_search_by(|e| e.id.as_str().cmp(id)).ok()
    }

    pub fn vertex_count(&self) -> usize {
        self.even.len() + self.odd.len()
    }

    pub fn label(&self, v: Vertex) -> &str {
        match v.parity {
            Parity::Even => &self.even[v.index],
            Parity::Odd => &self.odd[v.index],
        }
    }

    /// Swaps the roles of the two vertex classes. Edge ids and indices are kept.
    pub fn transpose(&self) -> Self {
        BipartiteGraph {
            even: self.odd.clone(),
            odd: self.even.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| Edge {
                    id: e.id.clone(),
                    even: e.odd,
                    odd: e.even,
                    parts: e.parts,
                })
                .collect(),
            base: self.base.map(|v| Vertex {
                parity: v.parity.flip(),
                index: v.index,
            }),
        }
    }

    /// Even × odd edge-count matrix.
    pub fn adjacency(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.even.len(), self.odd.len());
        for e in &self.edges {
            a[(e.even, e.odd)] += 1.0;
        }
        a
    }

    /// The parallel-edge family joining `even` and `odd`, in canonical order.
    pub fn edges_between(&self, even: usize, odd: usize) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|&i| self.edges[i].even == even && self.edges[i].odd == odd)
            .collect()
    }

    pub fn edges_at(&self, v: Vertex) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|&i| match v.parity {
                Parity::Even => self.edges[i].even == v.index,
                Parity::Odd => self.edges[i].odd == v.index,
            })
            .collect()
    }

    /// Endpoint of `edge` seen from `from`.
    pub fn traverse(&self, edge: usize, from: Vertex) -> Option<Vertex> {
        let e = &self.edges[edge];
        match from.parity {
            Parity::Even if e.even == from.index => Some(Vertex::odd(e.odd)),
            Parity::Odd if e.odd == from.index => Some(Vertex::even(e.even)),
            _ => None,
        }
    }

    pub fn is_connected(&self) -> bool {
        let n = self.vertex_count();
        if n == 0 {
            return false;
        }
        let ne = self.even.len();
        let mut adj = vec![Vec::new(); n];
        for e in &self.edges {
            adj[e.even].push(ne + e.odd);
            adj[ne + e.odd].push(e.even);
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == n
    }

    /// Records factor-edge indices by edge id, as `concat_graphs` does.
    pub fn with_parts(mut self, parts: &HashMap<String, (usize, usize)>) -> Self {
        for e in &mut self.edges {
            e.parts = parts.get(&e.id).copied();
        }
        self
    }

    /// For a self-concatenated graph `G·G^t` (both classes carry the same
    /// labels), maps every edge `(a, b)` to its reverse `(b, a)`.
    pub fn reversal(&self) -> Option<Vec<usize>> {
        if self.even != self.odd {
            return None;
        }
        let lookup: HashMap<(usize, usize), usize> = self
            .edges
            .iter()
            .enumerate()
            .filter_map(|(i, e)| e.parts.map(|p| (p, i)))
            .collect();
        self.edges
            .iter()
            .map(|e| e.parts.and_then(|(a, b)| lookup.get(&(b, a)).copied()))
            .collect()
    }
}

/// A path in a bipartite graph: consecutive edges alternate direction,
/// so the orientation of each step is determined by the start vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GraphPath {
    pub source: Vertex,
    pub range: Vertex,
    pub edges: Vec<usize>,
}

impl GraphPath {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// All paths of exactly `len` edges from `p` to `q`, lexicographic by edge id.
pub fn enumerate_paths(g: &BipartiteGraph, p: Vertex, q: Vertex, len: usize) -> Vec<GraphPath> {
    fn walk(
        g: &BipartiteGraph,
        at: Vertex,
        q: Vertex,
        left: usize,
        prefix: &mut Vec<usize>,
        src: Vertex,
        out: &mut Vec<GraphPath>,
    ) {
        if left == 0 {
            if at == q {
                out.push(GraphPath {
                    source: src,
                    range: q,
                    edges: prefix.clone(),
                });
            }
            return;
        }
        for e in g.edges_at(at) {
            let next = g.traverse(e, at).expect("edge incident to vertex");
            prefix.push(e);
            walk(g, next, q, left - 1, prefix, src, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    walk(g, p, q, len, &mut Vec::with_capacity(len), p, &mut out);
    out
}

/// `K = g·h^t`: even class of `g`, even class of `h` as the new odd class,
/// one edge per pair of edges meeting in the shared odd layer.
pub fn concat_graphs(g: &BipartiteGraph, h: &BipartiteGraph) -> Result<BipartiteGraph> {
    let gs: HashSet<&String> = g.odd.iter().collect();
    let hs: HashSet<&String> = h.odd.iter().collect();
    if gs != hs || g.odd.len() != h.odd.len() {
        return Err(Error::LayerMismatch(format!("{:?} vs {:?}", g.odd, h.odd)));
    }
    let h_odd: HashMap<&String, usize> = h.odd.iter().enumerate().map(|(i, l)| (l, i)).collect();
    let mut edges = Vec::new();
    for (a, ea) in g.edges.iter().enumerate() {
        let mid = h_odd[&g.odd[ea.odd]];
        for (b, eb) in h.edges.iter().enumerate() {
            if eb.odd == mid {
                edges.push(Edge {
                    id: format!("{}/{}", ea.id, eb.id),
                    even: ea.even,
                    odd: eb.even,
                    parts: Some((a, b)),
                });
            }
        }
    }
    BipartiteGraph::from_parts(
        g.even.clone(),
        h.even.clone(),
        edges,
        g.base().map(Vertex::even),
    )
}

/// Perron-Frobenius eigenvalue and strictly positive weights on both classes.
#[derive(Debug, Clone, PartialEq)]
pub struct PfData {
    pub eigenvalue: f64,
    pub even: Vec<f64>,
    pub odd: Vec<f64>,
}

impl PfData {
    pub fn weight(&self, v: Vertex) -> f64 {
        match v.parity {
            Parity::Even => self.even[v.index],
            Parity::Odd => self.odd[v.index],
        }
    }

    /// max of `|B·odd − λ·even|` and `|Bᵗ·even − λ·odd|`.
    pub fn residual(&self, g: &BipartiteGraph) -> f64 {
        eigen_residual(&g.adjacency(), self.eigenvalue, &self.even, &self.odd)
    }
}

pub(crate) fn eigen_residual(b: &DMatrix<f64>, lambda: f64, even: &[f64], odd: &[f64]) -> f64 {
    let mut r: f64 = 0.0;
    for i in 0..b.nrows() {
        let s: f64 = (0..b.ncols()).map(|j| b[(i, j)] * odd[j]).sum();
        r = r.max((s - lambda * even[i]).abs());
    }
    for j in 0..b.ncols() {
        let s: f64 = (0..b.nrows()).map(|i| b[(i, j)] * even[i]).sum();
        r = r.max((s - lambda * odd[j]).abs());
    }
    r
}

const PF_MAX_ITER: usize = 200_000;

/// Power iteration on `B·Bᵗ` from the all-ones vector. Weights are normalized
/// so the base vertex (or the first even vertex) has weight 1.
pub fn perron_frobenius(g: &BipartiteGraph, tol: f64) -> Result<PfData> {
    if g.even.is_empty() || g.odd.is_empty() {
        return Err(Error::InvalidGraph("empty vertex class".into()));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let b = g.adjacency();
    let m = &b * b.transpose();
    let anchor = g.base().unwrap_or(0);
    let mut x = vec![1.0; g.even.len()];
    let mut residual = f64::INFINITY;
    for it in 0..PF_MAX_ITER {
        let y: Vec<f64> = (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * x[j]).sum())
            .collect();
        let scale = y[anchor];
        let next: Vec<f64> = y.iter().map(|v| v / scale).collect();
        let delta = next
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        x = next;
        if delta < tol * 1e-3 || it + 1 == PF_MAX_ITER {
            let lambda = scale.sqrt();
            let odd: Vec<f64> = (0..b.ncols())
                .map(|j| (0..b.nrows()).map(|i| b[(i, j)] * x[i]).sum::<f64>() / lambda)
                .collect();
            residual = eigen_residual(&b, lambda, &x, &odd);
            if residual <= tol {
                return Ok(PfData {
                    eigenvalue: lambda,
                    even: x,
                    odd,
                });
            }
            if delta < f64::EPSILON {
                break;
            }
        }
    }
    Err(Error::NoConvergence {
        iterations: PF_MAX_ITER,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn path_graph(n: usize) -> BipartiteGraph {
        let label = |k: usize| k.to_string();
        let even: Vec<String> = (1..=n).filter(|k| k % 2 == 1).map(label).collect();
        let odd: Vec<String> = (1..=n).filter(|k| k % 2 == 0).map(label).collect();
        let edges: Vec<(String, String, String)> = (1..n)
            .map(|k| {
                let (e, o) = if k % 2 == 1 { (k, k + 1) } else { (k + 1, k) };
                (format!("{e}-{o}"), e.to_string(), o.to_string())
            })
            .collect();
        BipartiteGraph::new(even, odd, &edges, Some("1")).unwrap()
    }

    fn matrix_power_count(g: &BipartiteGraph, p: Vertex, q: Vertex, len: usize) -> f64 {
        let ne = g.even().len();
        let n = g.vertex_count();
        let mut a = DMatrix::<f64>::zeros(n, n);
        for e in g.edges() {
            a[(e.even, ne + e.odd)] += 1.0;
            a[(ne + e.odd, e.even)] += 1.0;
        }
        let idx = |v: Vertex| match v.parity {
            Parity::Even => v.index,
            Parity::Odd => ne + v.index,
        };
        let mut pw = DMatrix::<f64>::identity(n, n);
        for _ in 0..len {
            pw = &pw * &a;
        }
        pw[(idx(p), idx(q))]
    }

    #[test]
    fn pf_a2_is_trivial() {
        let pf = perron_frobenius(&path_graph(2), 1e-12).unwrap();
        assert!((pf.eigenvalue - 1.0).abs() < 1e-12);
        assert_eq!(pf.even, vec![1.0]);
        assert!((pf.odd[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pf_a3_and_a4() {
        let pf = perron_frobenius(&path_graph(3), 1e-12).unwrap();
        assert!((pf.eigenvalue - 2f64.sqrt()).abs() < 1e-10);
        assert!((pf.even[0] - 1.0).abs() < 1e-12);
        assert!((pf.even[1] - 1.0).abs() < 1e-10);
        assert!((pf.odd[0] - 2f64.sqrt()).abs() < 1e-10);

        let pf = perron_frobenius(&path_graph(4), 1e-12).unwrap();
        assert!((pf.eigenvalue - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-10);
        assert!(pf.residual(&path_graph(4)) < 1e-12);
    }

    #[test]
    fn pf_rejects_disconnected() {
        let g = BipartiteGraph::new(
            vec!["a".into(), "c".into()],
            vec!["b".into(), "d".into()],
            &[("x", "a", "b"), ("y", "c", "d")],
            Some("a"),
        )
        .unwrap();
        assert!(matches!(
            perron_frobenius(&g, 1e-10),
            Err(Error::Disconnected)
        ));
    }

    #[test]
    fn concat_a3_is_all_ones() {
        let g = path_graph(3);
        let k = concat_graphs(&g, &g).unwrap();
        assert_eq!(k.edges().len(), 4);
        assert_eq!(k.adjacency(), DMatrix::from_element(2, 2, 1.0));
        let ids: Vec<&str> = k.edges().iter().map(|e| e.id.as_str()).collect();
        assert_eq!(ids, ["1-2/1-2", "1-2/3-2", "3-2/1-2", "3-2/3-2"]);
        let pf = perron_frobenius(&k, 1e-12).unwrap();
        assert!((pf.eigenvalue - 2.0).abs() < 1e-12);
        assert_eq!(k.reversal().unwrap(), vec![0, 2, 1, 3]);
    }

    #[test]
    fn concat_a2_single_loop() {
        let g = path_graph(2);
        let k = concat_graphs(&g, &g).unwrap();
        assert_eq!(k.edges().len(), 1);
        assert_eq!(k.even(), k.odd());
    }

    #[test]
    fn concat_rejects_mismatched_layers() {
        let g = path_graph(3);
        let h = path_graph(4);
        assert!(matches!(
            concat_graphs(&g, &h),
            Err(Error::LayerMismatch(_))
        ));
    }

    #[test]
    fn concat_adjacency_is_product() {
        let g = path_graph(5);
        let k = concat_graphs(&g, &g).unwrap();
        let b = g.adjacency();
        assert_eq!(k.adjacency(), &b * b.transpose());
    }

    #[test]
    fn path_enumeration_examples() {
        let g = path_graph(3);
        let a = Vertex::even(0);
        assert_eq!(enumerate_paths(&g, a, a, 2).len(), 1);
        assert_eq!(enumerate_paths(&g, a, a, 0).len(), 1);
        assert!(enumerate_paths(&g, a, Vertex::even(1), 0).is_empty());
        let k = concat_graphs(&g, &g).unwrap();
        assert_eq!(enumerate_paths(&k, a, a, 2).len(), 2);
    }

    #[test]
    fn path_enumeration_is_lexicographic() {
        let g = path_graph(5);
        let paths = enumerate_paths(&g, Vertex::even(1), Vertex::even(1), 4);
        let mut sorted = paths.clone();
        sorted.sort_by(|a, b| a.edges.cmp(&b.edges));
        assert_eq!(paths, sorted);
    }

    #[test]
    fn path_counts_match_matrix_powers() {
        let graphs = vec![
            path_graph(2),
            path_graph(3),
            path_graph(4),
            path_graph(6),
            BipartiteGraph::new(
                vec!["a".into(), "c".into()],
                vec!["b".into(), "d".into()],
                &[
                    ("1", "a", "b"),
                    ("2", "a", "b"),
                    ("3", "c", "b"),
                    ("4", "c", "d"),
                    ("5", "a", "d"),
                ],
                Some("a"),
            )
            .unwrap(),
        ];
        for g in &graphs {
            let verts: Vec<Vertex> = (0..g.even().len())
                .map(Vertex::even)
                .chain((0..g.odd().len()).map(Vertex::odd))
                .collect();
            for &p in &verts {
                for &q in &verts {
                    for len in 0..=6 {
                        let n = enumerate_paths(g, p, q, len).len() as f64;
                        assert_eq!(n, matrix_power_count(g, p, q, len));
                    }
                }
            }
        }
    }
}
