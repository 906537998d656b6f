//! Path spaces along lattice paths and the transport between them.
//!
//! Every lattice step carries one edge of the self-composable graph `K`, so
//! the basis of `Path(p, q; L)` is the set of `K`-paths of length `|L|` from
//! `p` to `q` in lexicographic edge order, whatever the directions of `L`.
//! Flipping the square at letters `k, k+1` with directions `i < j` uses the
//! `i`-edges as bottom/top and the `j`-edges as left/right of a `Y` cell:
//!
//! * forward `(i, j) -> (j, i)`: `(bottom, right) -> (left, top)` with
//!   coefficient `Y(bottom, left, right, top)`;
//! * backward `(j, i) -> (i, j)`: the adjoint, `conj Y(bottom, left, right, top)`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::connection::{Cell, ConnectionSquare};
use crate::error::{Error, Result};
use crate::lattice::{all_sorting_moves, apply_swaps, sorting_moves, LatticePath};
use crate::linalg::{singular_values, unitarity_residual, CMatrix, C64, ZERO};

pub const DEFAULT_CAP: usize = 4096;

/// Paths of one length from one start vertex, grouped by end vertex.
#[derive(Debug)]
pub struct Basis {
    pub by_end: Vec<Vec<Vec<usize>>>,
    index: Vec<HashMap<Vec<usize>, usize>>,
}

impl Basis {
    pub fn index_of(&self, q: usize, path: &[usize]) -> Option<usize> {
        self.index[q].get(path).copied()
    }
}

type FlipTable = HashMap<(usize, usize), Vec<(usize, usize, C64)>>;

/// Transport engine for a self-composable connection.
pub struct StateSum {
    y: ConnectionSquare,
    src: Vec<usize>,
    dst: Vec<usize>,
    out: Vec<Vec<usize>>,
    forward: FlipTable,
    backward: FlipTable,
    cap: usize,
    bases: Mutex<HashMap<(usize, usize), Arc<Basis>>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathSpace {
    pub path: LatticePath,
    pub source: usize,
    pub range: usize,
    pub basis: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportMatrix {
    pub source: PathSpace,
    pub target: PathSpace,
    pub matrix: CMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WellDefinedReport {
    pub residual: f64,
    pub routes: usize,
    pub unitarity: f64,
    pub tol: f64,
}

impl WellDefinedReport {
    pub fn pass(&self) -> bool {
        self.residual <= self.tol
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GramReport {
    pub min_singular: f64,
    pub max_singular: f64,
    pub blocks: usize,
    pub tol: f64,
}

impl GramReport {
    pub fn pass(&self) -> bool {
        self.min_singular >= 1.0 - self.tol && self.max_singular <= 1.0 + self.tol
    }
}

impl StateSum {
    pub fn new(y: &ConnectionSquare, cap: usize) -> Result<Self> {
        if !y.is_self_composable() || y.bottom().even() != y.bottom().odd() {
            return Err(Error::NotSelfComposable);
        }
        let k = y.bottom();
        let src: Vec<usize> = k.edges().iter().map(|e| e.even).collect();
        let dst: Vec<usize> = k.edges().iter().map(|e| e.odd).collect();
        let out = (0..k.even().len())
            .map(|v| (0..src.len()).filter(|&e| src[e] == v).collect())
            .collect();
        let mut forward: FlipTable = HashMap::new();
        let mut backward: FlipTable = HashMap::new();
        for (c, v) in y.cells() {
            forward
                .entry((c.bottom, c.right))
                .or_default()
                .push((c.left, c.top, *v));
            backward
                .entry((c.left, c.top))
                .or_default()
                .push((c.bottom, c.right, v.conj()));
        }
        Ok(StateSum {
            y: y.clone(),
            src,
            dst,
            out,
            forward,
            backward,
            cap,
            bases: Mutex::new(HashMap::new()),
        })
    }

    pub fn connection(&self) -> &ConnectionSquare {
        &self.y
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn vertex_count(&self) -> usize {
        self.out.len()
    }

    pub fn edge_source(&self, e: usize) -> usize {
        self.src[e]
    }

    pub fn edge_range(&self, e: usize) -> usize {
        self.dst[e]
    }

    pub fn edges_from(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    pub fn weight(&self, v: usize) -> f64 {
        self.y.weight(0, v)
    }

    pub fn beta(&self) -> f64 {
        self.y.beta()
    }

    pub fn base(&self) -> usize {
        self.y.bottom().base().unwrap_or(0)
    }

    /// Number of paths of length `len` from `p` to each vertex.
    pub fn path_counts(&self, p: usize, len: usize) -> Vec<u128> {
        let mut c = vec![0u128; self.vertex_count()];
        c[p] = 1;
        for _ in 0..len {
            let mut n = vec![0u128; c.len()];
            for (v, &x) in c.iter().enumerate() {
                for &e in &self.out[v] {
                    n[self.dst[e]] += x;
                }
            }
            c = n;
        }
        c
    }

    pub fn basis(&self, p: usize, len: usize) -> Result<Arc<Basis>> {
        if let Some(b) = self.bases.lock().expect("basis cache").get(&(p, len)) {
            return Ok(b.clone());
        }
        let counts = self.path_counts(p, len);
        if let Some(&big) = counts.iter().find(|&&c| c > self.cap as u128) {
            return Err(Error::CapExceeded {
                size: big.min(usize::MAX as u128) as usize,
                cap: self.cap,
            });
        }
        let mut by_end: Vec<Vec<Vec<usize>>> = vec![Vec::new(); self.vertex_count()];
        let mut prefix = Vec::with_capacity(len);
        self.walk(p, len, &mut prefix, &mut by_end);
        let index = by_end
            .iter()
            .map(|ps| ps.iter().enumerate().map(|(i, x)| (x.clone(), i)).collect())
            .collect();
        let b = Arc::new(Basis { by_end, index });
        self.bases
            .lock()
            .expect("basis cache")
            .insert((p, len), b.clone());
        Ok(b)
    }

    fn walk(
        &self,
        at: usize,
        left: usize,
        prefix: &mut Vec<usize>,
        out: &mut Vec<Vec<Vec<usize>>>,
    ) {
        if left == 0 {
            out[at].push(prefix.clone());
            return;
        }
        for &e in &self.out[at] {
            prefix.push(e);
            self.walk(self.dst[e], left - 1, prefix, out);
            prefix.pop();
        }
    }

    pub fn path_space(&self, path: &LatticePath, p: usize, q: usize) -> Result<PathSpace> {
        let basis = self.basis(p, path.len())?;
        Ok(PathSpace {
            path: path.clone(),
            source: p,
            range: q,
            basis: basis.by_end[q].clone(),
        })
    }

    /// One flip applied to the rows of a transport block (rows indexed by
    /// the basis of the current word).
    fn flip_rows(
        &self,
        rows: &[Vec<C64>],
        basis: &[Vec<usize>],
        index: &HashMap<Vec<usize>, usize>,
        k: usize,
        forward: bool,
    ) -> Vec<Vec<C64>> {
        let width = rows.first().map_or(0, |r| r.len());
        let mut next = vec![vec![ZERO; width]; rows.len()];
        let table = if forward {
            &self.forward
        } else {
            &self.backward
        };
        for (i, path) in basis.iter().enumerate() {
            let Some(repl) = table.get(&(path[k], path[k + 1])) else {
                continue;
            };
            let mut target = path.clone();
            for &(a, b, v) in repl {
                target[k] = a;
                target[k + 1] = b;
                let j = index[&target];
                for (dst, s) in next[j].iter_mut().zip(&rows[i]) {
                    *dst += v * s;
                }
            }
        }
        next
    }

    /// Transport blocks (one per end vertex) for the paths from `p` along
    /// `word`, following the swap sequence `moves`.
    pub fn route_blocks(&self, p: usize, word: &[usize], moves: &[usize]) -> Result<Vec<CMatrix>> {
        let mut w = word.to_vec();
        let mut steps = Vec::with_capacity(moves.len());
        for &k in moves {
            if k + 1 >= w.len() {
                return Err(Error::InvalidMoves(format!(
                    "swap position {k} out of range"
                )));
            }
            if w[k] == w[k + 1] {
                return Err(Error::InvalidMoves(format!(
                    "letters at {k} are both {}",
                    w[k]
                )));
            }
            steps.push((k, w[k] < w[k + 1]));
            w.swap(k, k + 1);
        }
        let basis = self.basis(p, word.len())?;
        let mut out = Vec::with_capacity(self.vertex_count());
        for q in 0..self.vertex_count() {
            let b = &basis.by_end[q];
            let n = b.len();
            let mut rows: Vec<Vec<C64>> = (0..n)
                .map(|i| {
                    let mut r = vec![ZERO; n];
                    r[i] = C64::new(1.0, 0.0);
                    r
                })
                .collect();
            for &(k, fwd) in &steps {
                rows = self.flip_rows(&rows, b, &basis.index[q], k, fwd);
            }
            out.push(CMatrix::from_fn(n, n, |i, j| rows[i][j]));
        }
        Ok(out)
    }

    pub fn elementary_transport(
        &self,
        path: &LatticePath,
        k: usize,
        p: usize,
        q: usize,
    ) -> Result<TransportMatrix> {
        if k + 1 >= path.len() || path.word[k] == path.word[k + 1] {
            return Err(Error::InvalidMoves(format!(
                "no flippable square at position {k}"
            )));
        }
        let target = LatticePath::new(path.start.clone(), apply_swaps(&path.word, &[k])?)?;
        self.transport(path, &target, p, q, Some(&[k]))
    }

    /// Transport from `Path(p, q; from)` to `Path(p, q; to)` along `moves`
    /// (default: the first shortest swap sequence).
    pub fn transport(
        &self,
        from: &LatticePath,
        to: &LatticePath,
        p: usize,
        q: usize,
        moves: Option<&[usize]>,
    ) -> Result<TransportMatrix> {
        let moves = self.resolve_moves(from, to, moves)?;
        let mut blocks = self.route_blocks(p, &from.word, &moves)?;
        Ok(TransportMatrix {
            source: self.path_space(from, p, q)?,
            target: self.path_space(to, p, q)?,
            matrix: blocks.swap_remove(q),
        })
    }

    fn resolve_moves(
        &self,
        from: &LatticePath,
        to: &LatticePath,
        moves: Option<&[usize]>,
    ) -> Result<Vec<usize>> {
        match moves {
            None => sorting_moves(from, to),
            Some(m) => {
                if from.start != to.start {
                    return Err(Error::InvalidPath("paths start at different points".into()));
                }
                if apply_swaps(&from.word, m)? != to.word {
                    return Err(Error::InvalidMoves(
                        "moves do not turn the first word into the second".into(),
                    ));
                }
                Ok(m.to_vec())
            }
        }
    }

    /// Max pairwise deviation between the transports of all shortest swap
    /// sequences, over all start and end vertices.
    pub fn check_well_defined(
        &self,
        from: &LatticePath,
        to: &LatticePath,
        tol: f64,
    ) -> Result<WellDefinedReport> {
        let routes = all_sorting_moves(from, to)?;
        let mut residual: f64 = 0.0;
        let mut unitarity: f64 = 0.0;
        for p in 0..self.vertex_count() {
            let all: Vec<Vec<CMatrix>> = routes
                .iter()
                .map(|m| self.route_blocks(p, &from.word, m))
                .collect::<Result<_>>()?;
            // the other routes agree with the first to `residual`
            for m in &all[0] {
                unitarity = unitarity.max(unitarity_residual(m));
            }
            for (a, ra) in all.iter().enumerate() {
                for rb in &all[a + 1..] {
                    for (x, y) in ra.iter().zip(rb) {
                        residual = residual.max(crate::linalg::max_abs(&(x - y)));
                    }
                }
            }
        }
        Ok(WellDefinedReport {
            residual,
            routes: routes.len(),
            unitarity,
            tol,
        })
    }

    /// Singular values of the form `<xi, eta>` on `Path(from) x Path(to)`,
    /// which is the transport matrix, over all endpoint blocks.
    pub fn gram_report(
        &self,
        from: &LatticePath,
        to: &LatticePath,
        tol: f64,
    ) -> Result<GramReport> {
        let moves = sorting_moves(from, to)?;
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        let mut blocks = 0;
        for p in 0..self.vertex_count() {
            for m in self.route_blocks(p, &from.word, &moves)? {
                if m.is_empty() {
                    continue;
                }
                blocks += 1;
                for s in singular_values(&m) {
                    lo = lo.min(s);
                    hi = hi.max(s);
                }
            }
        }
        if blocks == 0 {
            lo = 1.0;
            hi = 1.0;
        }
        Ok(GramReport {
            min_singular: lo,
            max_singular: hi,
            blocks,
            tol,
        })
    }

    pub fn cell(&self, c: Cell) -> C64 {
        self.y.get(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::composite::build_y;
    use crate::connection::{
        build_dynkin_connection, build_group_connection, check_gybe, cyclic_group,
        random_control_connection, symmetric_group_s3,
    };
    use crate::lattice::{enumerate_reduced_words, longest_element};

    fn y_a(n: usize) -> ConnectionSquare {
        build_y(&build_dynkin_connection(n)).unwrap()
    }

    fn path(s: usize, w: &[usize]) -> LatticePath {
        LatticePath::from_origin(s, w.to_vec()).unwrap()
    }

    #[test]
    fn elementary_transport_is_the_corner_block() {
        let y = y_a(3);
        let ss = StateSum::new(&y, DEFAULT_CAP).unwrap();
        let l = path(2, &[0, 1]);
        for p in 0..2 {
            for q in 0..2 {
                let t = ss.elementary_transport(&l, 0, p, q).unwrap();
                let (rows, cols, block) = y.corner_block(p, q);
                // the transport indexes both sides by two-edge paths; the
                // corner block does the same in the same lexicographic order
                assert_eq!(
                    t.source.basis,
                    cols.iter().map(|&(b, r)| vec![b, r]).collect::<Vec<_>>()
                );
                assert_eq!(
                    t.target.basis,
                    rows.iter().map(|&(l, t)| vec![l, t]).collect::<Vec<_>>()
                );
                assert!(crate::linalg::max_abs(&(&t.matrix - &block)) < 1e-15);
                assert!(unitarity_residual(&t.matrix) < 1e-12);
            }
        }
    }

    #[test]
    fn a2_transport_is_a_phase() {
        let y = y_a(2);
        let ss = StateSum::new(&y, DEFAULT_CAP).unwrap();
        let t = ss.elementary_transport(&path(2, &[0, 1]), 0, 0, 0).unwrap();
        assert_eq!(t.matrix.shape(), (1, 1));
        assert!((t.matrix[(0, 0)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn flips_keep_prefix_and_suffix() {
        let y = y_a(4);
        let ss = StateSum::new(&y, DEFAULT_CAP).unwrap();
        let l = path(3, &[2, 0, 1, 0]);
        for q in 0..2 {
            let t = ss.elementary_transport(&l, 1, 0, q).unwrap();
            for (j, xi) in t.source.basis.iter().enumerate() {
                for (i, eta) in t.target.basis.iter().enumerate() {
                    if xi[0] != eta[0] || xi[3] != eta[3] {
                        assert_eq!(t.matrix[(i, j)], ZERO);
                    }
                }
            }
        }
    }

    #[test]
    fn equal_letters_do_not_flip() {
        let ss = StateSum::new(&y_a(3), DEFAULT_CAP).unwrap();
        assert!(ss.elementary_transport(&path(2, &[0, 0]), 0, 0, 0).is_err());
        let l = path(2, &[0, 1]);
        assert!(matches!(
            ss.transport(&l, &path(2, &[1, 0]), 0, 0, Some(&[0, 0])),
            Err(Error::InvalidMoves(_))
        ));
    }

    #[test]
    fn identity_and_round_trip() {
        let ss = StateSum::new(&y_a(4), DEFAULT_CAP).unwrap();
        let l = path(3, &[0, 1, 2]);
        let r = path(3, &[2, 1, 0]);
        for q in 0..2 {
            let id = ss.transport(&l, &l, 0, q, None).unwrap();
            assert!(
                crate::linalg::max_abs(
                    &(&id.matrix - CMatrix::identity(id.matrix.nrows(), id.matrix.nrows()))
                ) == 0.0
            );
            let trip = ss
                .transport(&l, &l, 0, q, Some(&[0, 1, 0, 0, 1, 0]))
                .unwrap();
            let n = trip.matrix.nrows();
            assert!(crate::linalg::max_abs(&(&trip.matrix - CMatrix::identity(n, n))) < 1e-12);
            let there = ss.transport(&l, &r, 0, q, None).unwrap();
            let back = ss.transport(&r, &l, 0, q, None).unwrap();
            assert!(
                crate::linalg::max_abs(&(&back.matrix * &there.matrix - CMatrix::identity(n, n)))
                    < 1e-12
            );
        }
    }

    #[test]
    fn transport_factorizes_through_intermediate_paths() {
        let ss = StateSum::new(&y_a(3), DEFAULT_CAP).unwrap();
        let a = path(3, &[0, 1, 2, 0]);
        let b = path(3, &[1, 0, 2, 0]);
        let c = path(3, &[1, 2, 0, 0]);
        for q in 0..2 {
            let ab = ss.transport(&a, &b, 0, q, None).unwrap();
            let bc = ss.transport(&b, &c, 0, q, None).unwrap();
            let ac = ss.transport(&a, &c, 0, q, Some(&[0, 1])).unwrap();
            assert!(crate::linalg::max_abs(&(&bc.matrix * &ab.matrix - &ac.matrix)) < 1e-12);
        }
    }

    #[test]
    fn gybe_agrees_with_reduced_word_transports() {
        let ys = vec![
            y_a(3),
            y_a(4),
            build_y(&build_group_connection(&symmetric_group_s3()).unwrap()).unwrap(),
            random_control_connection(0).unwrap(),
            random_control_connection(1).unwrap(),
        ];
        for y in &ys {
            let ss = StateSum::new(y, DEFAULT_CAP).unwrap();
            let mut worst: f64 = 0.0;
            for p in 0..ss.vertex_count() {
                let a = ss.route_blocks(p, &[0, 1, 2], &[1, 0, 1]).unwrap();
                let b = ss.route_blocks(p, &[0, 1, 2], &[0, 1, 0]).unwrap();
                for (x, z) in a.iter().zip(&b) {
                    worst = worst.max(crate::linalg::max_abs(&(x - z)));
                }
            }
            let g = check_gybe(y, 1e-9).unwrap();
            assert!(
                (worst - g.residual).abs() < 1e-12,
                "{worst} vs {}",
                g.residual
            );
        }
    }

    #[test]
    fn well_defined_on_yang_baxter_examples() {
        let l = path(3, &[0, 1, 2]);
        let r = path(3, &[2, 1, 0]);
        for y in [
            y_a(3),
            build_y(&build_group_connection(&cyclic_group(2)).unwrap()).unwrap(),
        ] {
            let ss = StateSum::new(&y, DEFAULT_CAP).unwrap();
            let rep = ss.check_well_defined(&l, &r, 1e-9).unwrap();
            assert_eq!(rep.routes, 2);
            assert!(rep.pass(), "{rep:?}");
            assert!(rep.unitarity < 1e-9);
        }
        let ss = StateSum::new(&random_control_connection(0).unwrap(), DEFAULT_CAP).unwrap();
        assert!(!ss.check_well_defined(&l, &r, 1e-9).unwrap().pass());
    }

    #[test]
    fn overlapping_paths_only_move_the_middle() {
        let ss = StateSum::new(&y_a(3), DEFAULT_CAP).unwrap();
        let l = path(3, &[1, 0, 1, 2, 2]);
        let r = path(3, &[1, 2, 1, 0, 2]);
        let m = sorting_moves(&l, &r).unwrap();
        assert!(m.iter().all(|&k| (1..3).contains(&k)));
        let rep = ss.check_well_defined(&l, &r, 1e-9).unwrap();
        assert!(rep.pass());
    }

    #[test]
    fn gram_of_a3_is_unitary() {
        let ss = StateSum::new(&y_a(3), DEFAULT_CAP).unwrap();
        let rep = ss
            .gram_report(&path(2, &[0, 1]), &path(2, &[1, 0]), 1e-9)
            .unwrap();
        assert!(rep.pass(), "{rep:?}");
        let rep = ss
            .gram_report(&path(2, &[0, 1]), &path(2, &[0, 1]), 0.0)
            .unwrap();
        assert_eq!((rep.min_singular, rep.max_singular), (1.0, 1.0));
    }

    #[test]
    fn cap_is_enforced() {
        let ss = StateSum::new(&y_a(3), 3).unwrap();
        assert!(matches!(ss.basis(0, 4), Err(Error::CapExceeded { .. })));
        assert!(ss.basis(0, 2).is_ok());
    }

    #[test]
    fn longest_word_routes_are_all_enumerated() {
        let ss = StateSum::new(&y_a(3), DEFAULT_CAP).unwrap();
        let rep = ss
            .check_well_defined(&path(4, &[0, 1, 2, 3]), &path(4, &[3, 2, 1, 0]), 1e-9)
            .unwrap();
        assert_eq!(
            rep.routes,
            enumerate_reduced_words(&longest_element(4)).len()
        );
        assert!(rep.pass());
    }
}
