//! Connections on a square of four bipartite graphs.
//!
//! ```text
//!   V2 --top--> V3
//!   |           |
//!  left       right
//!   |           |
//!   V0 -bottom-> V1
//! ```
//!
//! Each graph is stored with its source class as the even class, so
//! `bottom: V0 -> V1`, `left: V0 -> V2`, `right: V1 -> V3`, `top: V2 -> V3`.

mod builders;
mod group;
mod gybe;
mod random;

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::graph::{perron_frobenius, BipartiteGraph};
use crate::linalg::{unitarity_residual, CMatrix, C64, ZERO};

pub use builders::{build_dynkin_connection, dynkin_graph};
pub use group::{build_group_connection, cyclic_group, symmetric_group_s3, GroupData, Irrep};
pub use gybe::{check_gybe, GybeReport};
pub use random::{random_biunitary, random_control_connection, CONTROL_GYBE_FLOOR};

pub(crate) const PF_TOL: f64 = 1e-13;

/// Edge indices of the four sides of a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub bottom: usize,
    pub left: usize,
    pub right: usize,
    pub top: usize,
}

impl Cell {
    pub fn new(bottom: usize, left: usize, right: usize, top: usize) -> Self {
        Cell {
            bottom,
            left,
            right,
            top,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Bottom,
    Left,
    Right,
    Top,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Renormalization {
    Horizontal,
    Vertical,
    Both,
}

/// Perron-Frobenius weights on the four corner classes `V0..V3`.
#[derive(Debug, Clone, PartialEq)]
pub struct CornerWeights {
    pub beta: f64,
    pub weights: [Vec<f64>; 4],
}

/// Row labels, column labels and the matrix of a corner block.
pub type CornerBlock = (Vec<(usize, usize)>, Vec<(usize, usize)>, CMatrix);

#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionSquare {
    bottom: BipartiteGraph,
    left: BipartiteGraph,
    right: BipartiteGraph,
    top: BipartiteGraph,
    cells: BTreeMap<Cell, C64>,
    pf: CornerWeights,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiunitarityReport {
    pub plain: f64,
    pub renormalized: f64,
    /// Corner pairs whose path counts differ.
    pub structural: Vec<String>,
    pub tol: f64,
}

impl BiunitarityReport {
    pub fn residual(&self) -> f64 {
        self.plain.max(self.renormalized)
    }

    pub fn pass(&self) -> bool {
        self.structural.is_empty() && self.residual() <= self.tol
    }
}

fn check_class(a: &[String], b: &[String], what: &str) -> Result<()> {
    if a != b {
        return Err(Error::InvalidConnection(format!(
            "corner class {what} differs between sides: {a:?} vs {b:?}"
        )));
    }
    Ok(())
}

impl ConnectionSquare {
    /// Builds a connection, validating corner classes and cells. Missing
    /// weights are computed from the bottom (V0, V1) and top (V2, V3) graphs.
    pub fn new(
        bottom: BipartiteGraph,
        left: BipartiteGraph,
        right: BipartiteGraph,
        top: BipartiteGraph,
        cells: impl IntoIterator<Item = (Cell, C64)>,
        pf: Option<CornerWeights>,
    ) -> Result<Self> {
        check_class(bottom.even(), left.even(), "V0")?;
        check_class(bottom.odd(), right.even(), "V1")?;
        check_class(left.odd(), top.even(), "V2")?;
        check_class(right.odd(), top.odd(), "V3")?;
        let pf = match pf {
            Some(pf) => pf,
            None => {
                let lower = perron_frobenius(&bottom, PF_TOL)?;
                let upper = perron_frobenius(&top, PF_TOL)?;
                CornerWeights {
                    beta: lower.eigenvalue,
                    weights: [lower.even, lower.odd, upper.even, upper.odd],
                }
            }
        };
        let sizes = [
            bottom.even().len(),
            bottom.odd().len(),
            top.even().len(),
            top.odd().len(),
        ];
        for (k, w) in pf.weights.iter().enumerate() {
            if w.len() != sizes[k] || w.iter().any(|&x| !x.is_finite() || x <= 0.0) {
                return Err(Error::InvalidConnection(format!(
                    "weights for V{k} must be {} positive numbers",
                    sizes[k]
                )));
            }
        }
        let mut sq = ConnectionSquare {
            bottom,
            left,
            right,
            top,
            cells: BTreeMap::new(),
            pf,
        };
        for (c, v) in cells {
            sq.corners(c)?;
            sq.cells.insert(c, v);
        }
        Ok(sq)
    }

    pub fn bottom(&self) -> &BipartiteGraph {
        &self.bottom
    }

    pub fn left(&self) -> &BipartiteGraph {
        &self.left
    }

    pub fn right(&self) -> &BipartiteGraph {
        &self.right
    }

    pub fn top(&self) -> &BipartiteGraph {
        &self.top
    }

    pub fn side(&self, s: Side) -> &BipartiteGraph {
        match s {
            Side::Bottom => &self.bottom,
            Side::Left => &self.left,
            Side::Right => &self.right,
            Side::Top => &self.top,
        }
    }

    pub fn cells(&self) -> &BTreeMap<Cell, C64> {
        &self.cells
    }

    pub fn pf(&self) -> &CornerWeights {
        &self.pf
    }

    pub fn beta(&self) -> f64 {
        self.pf.beta
    }

    pub fn weight(&self, class: usize, v: usize) -> f64 {
        self.pf.weights[class][v]
    }

    pub fn get(&self, c: Cell) -> C64 {
        self.cells.get(&c).copied().unwrap_or(ZERO)
    }

    /// Corner vertices `[x0, x1, x2, x3]` of a cell, or an error if the
    /// four edges do not close a square.
    pub fn corners(&self, c: Cell) -> Result<[usize; 4]> {
        let n = [
            self.bottom.edges().len(),
            self.left.edges().len(),
            self.right.edges().len(),
            self.top.edges().len(),
        ];
        if c.bottom >= n[0] || c.left >= n[1] || c.right >= n[2] || c.top >= n[3] {
            return Err(Error::InvalidConnection(format!(
                "cell {c:?} refers to a missing edge"
            )));
        }
        let (b, l, r, t) = (
            self.bottom.edge(c.bottom),
            self.left.edge(c.left),
            self.right.edge(c.right),
            self.top.edge(c.top),
        );
        if b.even != l.even || b.odd != r.even || l.odd != t.even || r.odd != t.odd {
            return Err(Error::InvalidConnection(format!(
                "cell ({}, {}, {}, {}) does not close a square",
                b.id, l.id, r.id, t.id
            )));
        }
        Ok([b.even, b.odd, l.odd, r.odd])
    }

    /// `sqrt(mu0(x0) mu3(x3) / (mu1(x1) mu2(x2)))` for the corners of `c`.
    pub fn corner_factor(&self, x: [usize; 4]) -> f64 {
        let w = &self.pf.weights;
        (w[0][x[0]] * w[3][x[3]] / (w[1][x[1]] * w[2][x[2]])).sqrt()
    }

    /// All four sides are the same graph (so the connection can be stacked
    /// with itself in every direction).
    pub fn is_self_composable(&self) -> bool {
        self.bottom == self.left && self.bottom == self.right && self.bottom == self.top
    }

    /// Every corner-compatible cell, including those with value zero.
    pub fn cell_keys(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for (bi, b) in self.bottom.edges().iter().enumerate() {
            for li in left_from(&self.left, b.even) {
                let x2 = self.left.edge(li).odd;
                for ri in left_from(&self.right, b.odd) {
                    let x3 = self.right.edge(ri).odd;
                    for ti in self.top.edges_between(x2, x3) {
                        out.push(Cell::new(bi, li, ri, ti));
                    }
                }
            }
        }
        out
    }

    /// Unitary block for a corner pair `(x0, x3)`: rows are (left, top)
    /// paths, columns (bottom, right) paths.
    pub fn corner_block(&self, x0: usize, x3: usize) -> CornerBlock {
        let mut rows = Vec::new();
        for l in left_from(&self.left, x0) {
            for t in self.top.edges_between(self.left.edge(l).odd, x3) {
                rows.push((l, t));
            }
        }
        let mut cols = Vec::new();
        for b in left_from(&self.bottom, x0) {
            for r in self.right.edges_between(self.bottom.edge(b).odd, x3) {
                cols.push((b, r));
            }
        }
        let m = CMatrix::from_fn(rows.len(), cols.len(), |i, j| {
            let (l, t) = rows[i];
            let (b, r) = cols[j];
            self.get(Cell::new(b, l, r, t))
        });
        (rows, cols, m)
    }

    /// Max unitarity residual over all corner blocks; structural failures
    /// (non-square blocks) are listed separately.
    pub fn plain_unitarity(&self) -> (f64, Vec<String>) {
        let mut worst: f64 = 0.0;
        let mut bad = Vec::new();
        for x0 in 0..self.bottom.even().len() {
            for x3 in 0..self.top.odd().len() {
                let (rows, cols, m) = self.corner_block(x0, x3);
                if rows.is_empty() && cols.is_empty() {
                    continue;
                }
                if rows.len() != cols.len() {
                    bad.push(format!(
                        "corners ({}, {}): {} left-top paths vs {} bottom-right paths",
                        self.bottom.even()[x0],
                        self.top.odd()[x3],
                        rows.len(),
                        cols.len()
                    ));
                    continue;
                }
                worst = worst.max(unitarity_residual(&m));
            }
        }
        (worst, bad)
    }

    pub fn check_biunitarity(&self, tol: f64) -> BiunitarityReport {
        let (plain, mut structural) = self.plain_unitarity();
        let (renormalized, more) = self
            .renormalize(Renormalization::Horizontal)
            .plain_unitarity();
        structural.extend(more.into_iter().map(|s| format!("renormalized {s}")));
        BiunitarityReport {
            plain,
            renormalized,
            structural,
            tol,
        }
    }

    /// Reflect, conjugate and rescale by corner weights. `Both` is the
    /// 180 degree rotation, which needs neither conjugation nor a factor.
    pub fn renormalize(&self, mode: Renormalization) -> ConnectionSquare {
        let w = &self.pf.weights;
        match mode {
            Renormalization::Horizontal => {
                let cells = self.cells.iter().map(|(c, v)| {
                    let f = self.corner_factor(self.corners(*c).expect("validated cell"));
                    (Cell::new(c.bottom, c.right, c.left, c.top), v.conj() * f)
                });
                ConnectionSquare {
                    bottom: self.bottom.transpose(),
                    left: self.right.clone(),
                    right: self.left.clone(),
                    top: self.top.transpose(),
                    cells: cells.collect(),
                    pf: CornerWeights {
                        beta: self.pf.beta,
                        weights: [w[1].clone(), w[0].clone(), w[3].clone(), w[2].clone()],
                    },
                }
            }
            Renormalization::Vertical => {
                let cells = self.cells.iter().map(|(c, v)| {
                    let f = self.corner_factor(self.corners(*c).expect("validated cell"));
                    (Cell::new(c.top, c.left, c.right, c.bottom), v.conj() * f)
                });
                ConnectionSquare {
                    bottom: self.top.clone(),
                    left: self.left.transpose(),
                    right: self.right.transpose(),
                    top: self.bottom.clone(),
                    cells: cells.collect(),
                    pf: CornerWeights {
                        beta: self.pf.beta,
                        weights: [w[2].clone(), w[3].clone(), w[0].clone(), w[1].clone()],
                    },
                }
            }
            Renormalization::Both => ConnectionSquare {
                bottom: self.top.transpose(),
                left: self.right.transpose(),
                right: self.left.transpose(),
                top: self.bottom.transpose(),
                cells: self
                    .cells
                    .iter()
                    .map(|(c, v)| (Cell::new(c.top, c.right, c.left, c.bottom), *v))
                    .collect(),
                pf: CornerWeights {
                    beta: self.pf.beta,
                    weights: [w[3].clone(), w[2].clone(), w[1].clone(), w[0].clone()],
                },
            },
        }
    }

    /// Replaces the cells, keeping graphs and weights.
    pub fn with_cells(&self, cells: impl IntoIterator<Item = (Cell, C64)>) -> Result<Self> {
        let mut out = ConnectionSquare {
            cells: BTreeMap::new(),
            ..self.clone()
        };
        for (c, v) in cells {
            out.corners(c)?;
            out.cells.insert(c, v);
        }
        Ok(out)
    }

    /// Drops cells with modulus below `eps`.
    pub fn pruned(mut self, eps: f64) -> Self {
        self.cells.retain(|_, v| v.norm() >= eps);
        self
    }

    /// Max cell-wise difference to another connection on the same graphs.
    pub fn max_cell_difference(&self, other: &ConnectionSquare) -> f64 {
        let mut d: f64 = 0.0;
        for (c, v) in &self.cells {
            d = d.max((v - other.get(*c)).norm());
        }
        for (c, v) in &other.cells {
            if !self.cells.contains_key(c) {
                d = d.max(v.norm());
            }
        }
        d
    }

    pub fn same_graphs(&self, other: &ConnectionSquare) -> bool {
        self.bottom == other.bottom
            && self.left == other.left
            && self.right == other.right
            && self.top == other.top
    }

    pub fn gauge_transform(&self, gauge: &Gauge) -> Result<ConnectionSquare> {
        let sides = [Side::Bottom, Side::Left, Side::Right, Side::Top];
        // per side: edge -> (family, position in family)
        let mut fam: Vec<Vec<(Vec<usize>, usize)>> = Vec::new();
        for s in sides {
            let g = self.side(s);
            let mut per = Vec::with_capacity(g.edges().len());
            for e in g.edges() {
                let family = g.edges_between(e.even, e.odd);
                let pos = family
                    .iter()
                    .position(|&x| g.edge(x).id == e.id)
                    .expect("edge in own family");
                per.push((family, pos));
            }
            fam.push(per);
        }
        for (k, s) in sides.iter().enumerate() {
            let g = self.side(*s);
            for ((e, o), u) in &gauge.sides[k] {
                let n = g.edges_between(*e, *o).len();
                if u.nrows() != n || u.ncols() != n {
                    return Err(Error::Gauge(format!(
                        "{s:?} family ({e}, {o}) has {n} edges but gauge is {}x{}",
                        u.nrows(),
                        u.ncols()
                    )));
                }
                if unitarity_residual(u) > 1e-10 {
                    return Err(Error::Gauge(format!(
                        "{s:?} family ({e}, {o}) gauge is not unitary"
                    )));
                }
            }
        }
        let entry = |k: usize, edge: usize, src: usize| -> C64 {
            let ed = self.side(sides[k]).edge(edge);
            let (pos, spos) = (fam[k][edge].1, fam[k][src].1);
            match gauge.sides[k].get(&(ed.even, ed.odd)) {
                Some(u) => u[(pos, spos)],
                None if pos == spos => crate::linalg::ONE,
                None => ZERO,
            }
        };
        let mut out: BTreeMap<Cell, C64> = BTreeMap::new();
        for (c, v) in &self.cells {
            let src = [c.bottom, c.left, c.right, c.top];
            let targets: Vec<&Vec<usize>> = (0..4).map(|k| &fam[k][src[k]].0).collect();
            for &b in targets[0] {
                let ub = entry(0, b, c.bottom);
                for &l in targets[1] {
                    let ul = entry(1, l, c.left);
                    for &r in targets[2] {
                        let ur = entry(2, r, c.right).conj();
                        for &t in targets[3] {
                            let ut = entry(3, t, c.top).conj();
                            let z = ub * ul * ur * ut * v;
                            if z != ZERO {
                                *out.entry(Cell::new(b, l, r, t)).or_insert(ZERO) += z;
                            }
                        }
                    }
                }
            }
        }
        Ok(ConnectionSquare {
            cells: out,
            ..self.clone()
        })
    }
}

/// Edges leaving an even vertex, in canonical order.
pub(crate) fn left_from(g: &BipartiteGraph, even: usize) -> Vec<usize> {
    (0..g.edges().len())
        .filter(|&i| g.edge(i).even == even)
        .collect()
}

/// Unitary matrices per parallel-edge family `(even, odd)` on each side,
/// in the order bottom, left, right, top. Missing families are the identity.
#[derive(Debug, Clone, Default)]
pub struct Gauge {
    pub sides: [HashMap<(usize, usize), CMatrix>; 4],
}

impl Gauge {
    pub fn identity() -> Self {
        Gauge::default()
    }

    pub fn set(&mut self, side: Side, even: usize, odd: usize, u: CMatrix) {
        let k = match side {
            Side::Bottom => 0,
            Side::Left => 1,
            Side::Right => 2,
            Side::Top => 3,
        };
        self.sides[k].insert((even, odd), u);
    }

    /// Random unitary on every family of every side.
    pub fn random<R: rand::Rng>(w: &ConnectionSquare, rng: &mut R) -> Self {
        let mut g = Gauge::default();
        for (k, s) in [Side::Bottom, Side::Left, Side::Right, Side::Top]
            .into_iter()
            .enumerate()
        {
            let graph = w.side(s);
            let mut fams: Vec<(usize, usize)> =
                graph.edges().iter().map(|e| (e.even, e.odd)).collect();
            fams.sort();
            fams.dedup();
            for (e, o) in fams {
                let n = graph.edges_between(e, o).len();
                g.sides[k].insert((e, o), crate::linalg::random_unitary(n, rng));
            }
        }
        g
    }

    /// Random diagonal phases on every family of every side.
    pub fn random_phases<R: rand::Rng>(w: &ConnectionSquare, rng: &mut R) -> Self {
        let mut g = Gauge::default();
        for (k, s) in [Side::Bottom, Side::Left, Side::Right, Side::Top]
            .into_iter()
            .enumerate()
        {
            let graph = w.side(s);
            let mut fams: Vec<(usize, usize)> =
                graph.edges().iter().map(|e| (e.even, e.odd)).collect();
            fams.sort();
            fams.dedup();
            for (e, o) in fams {
                let n = graph.edges_between(e, o).len();
                let mut u = CMatrix::zeros(n, n);
                for i in 0..n {
                    u[(i, i)] = crate::linalg::random_phase(rng);
                }
                g.sides[k].insert((e, o), u);
            }
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_complex, ONE};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn single_cell(v: C64) -> ConnectionSquare {
        let g = dynkin_graph(2);
        ConnectionSquare::new(
            g.clone(),
            g.clone(),
            g.transpose(),
            g.transpose(),
            [(Cell::new(0, 0, 0, 0), v)],
            None,
        )
        .unwrap()
    }

    #[test]
    fn one_cell_connection_is_biunitary() {
        let w = single_cell(ONE);
        let r = w.check_biunitarity(1e-15);
        assert_eq!(r.residual(), 0.0);
        assert!(r.pass());
    }

    #[test]
    fn bad_cell_is_rejected() {
        let g = dynkin_graph(3);
        let res = ConnectionSquare::new(
            g.clone(),
            g.clone(),
            g.transpose(),
            g.transpose(),
            [(Cell::new(0, 1, 0, 0), ONE)],
            None,
        );
        assert!(res.is_err());
    }

    #[test]
    fn non_square_block_is_structural() {
        let g = dynkin_graph(3);
        let h = BipartiteGraph::new(
            g.even().to_vec(),
            g.odd().to_vec(),
            &[("a", "1", "2"), ("b", "1", "2"), ("c", "3", "2")],
            Some("1"),
        )
        .unwrap();
        let w = ConnectionSquare::new(h.clone(), g.clone(), h.transpose(), g.transpose(), [], None)
            .unwrap();
        let r = w.check_biunitarity(1e-9);
        assert!(!r.structural.is_empty());
        assert!(!r.pass());
    }

    #[test]
    fn renormalizations_are_involutions() {
        for n in [2, 3, 4, 5] {
            let w = build_dynkin_connection(n);
            for m in [
                Renormalization::Horizontal,
                Renormalization::Vertical,
                Renormalization::Both,
            ] {
                let back = w.renormalize(m).renormalize(m);
                assert!(back.same_graphs(&w));
                assert!(back.max_cell_difference(&w) < 1e-14, "n={n} {m:?}");
            }
            let hv = w
                .renormalize(Renormalization::Horizontal)
                .renormalize(Renormalization::Vertical);
            let vh = w
                .renormalize(Renormalization::Vertical)
                .renormalize(Renormalization::Horizontal);
            let both = w.renormalize(Renormalization::Both);
            assert!(hv.same_graphs(&both) && vh.same_graphs(&both));
            assert!(hv.max_cell_difference(&both) < 1e-14);
            assert!(vh.max_cell_difference(&both) < 1e-14);
        }
    }

    #[test]
    fn unit_weights_renormalize_without_factor() {
        let w = build_group_connection_z(3);
        let h = w.renormalize(Renormalization::Horizontal);
        for (c, v) in w.cells() {
            let f = w.corner_factor(w.corners(*c).unwrap());
            let hv = h.get(Cell::new(c.bottom, c.right, c.left, c.top));
            assert!((hv - v.conj() * f).norm() < 1e-15);
        }
    }

    fn build_group_connection_z(n: usize) -> ConnectionSquare {
        build_group_connection(&cyclic_group(n)).unwrap()
    }

    #[test]
    fn identity_gauge_is_noop() {
        let w = build_dynkin_connection(4);
        let g = w.gauge_transform(&Gauge::identity()).unwrap();
        assert_eq!(g.max_cell_difference(&w), 0.0);
    }

    #[test]
    fn phase_gauge_on_a3_keeps_biunitarity() {
        let w = build_dynkin_connection(3);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = w
            .gauge_transform(&Gauge::random_phases(&w, &mut rng))
            .unwrap();
        let (a, b) = (w.check_biunitarity(1e-10), g.check_biunitarity(1e-10));
        assert!((a.residual() - b.residual()).abs() < 1e-12);
        assert!(b.pass());
    }

    #[test]
    fn random_gauge_on_s3_keeps_biunitarity() {
        let w = build_group_connection(&symmetric_group_s3()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = w.gauge_transform(&Gauge::random(&w, &mut rng)).unwrap();
        let (a, b) = (w.check_biunitarity(1e-10), g.check_biunitarity(1e-10));
        assert!((a.residual() - b.residual()).abs() < 1e-12);
        assert!(b.pass());
        assert!(g.max_cell_difference(&w) > 1e-3);
    }

    #[test]
    fn gauge_size_mismatch_is_an_error() {
        let w = build_dynkin_connection(3);
        let mut g = Gauge::identity();
        g.set(Side::Bottom, 0, 0, CMatrix::identity(2, 2));
        assert!(matches!(w.gauge_transform(&g), Err(Error::Gauge(_))));
        let mut g = Gauge::identity();
        g.set(
            Side::Bottom,
            0,
            0,
            CMatrix::from_element(1, 1, C64::new(2.0, 0.0)),
        );
        assert!(matches!(w.gauge_transform(&g), Err(Error::Gauge(_))));
    }

    #[test]
    fn random_cells_are_not_biunitary() {
        let w = build_dynkin_connection(3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let keys: Vec<Cell> = w.cell_keys();
        let noisy = w
            .with_cells(keys.into_iter().map(|c| (c, random_complex(&mut rng))))
            .unwrap();
        assert!(!noisy.check_biunitarity(1e-3).pass());
    }
}
