//! Horizontal and vertical composition of connections and the composite
//! connection `Y` on `K = G G^t` built from a connection and its three
//! renormalizations:
//!
//! ```text
//!   W2 | W3
//!   ---+---
//!   W  | W1
//! ```

use std::collections::{BTreeMap, HashMap};

use crate::connection::{Cell, ConnectionSquare, CornerWeights, Renormalization};
use crate::error::{Error, Result};
use crate::graph::{concat_graphs, BipartiteGraph};
use crate::linalg::{C64, ZERO};

/// Cells below this modulus are dropped from composites.
pub const PRUNE: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Horizontal,
    Vertical,
}

fn pair_index(k: &BipartiteGraph) -> HashMap<(usize, usize), usize> {
    k.edges()
        .iter()
        .enumerate()
        .filter_map(|(i, e)| e.parts.map(|p| (p, i)))
        .collect()
}

/// Stacks `wb` to the right of (horizontal) or above (vertical) `wa`,
/// summing over the shared internal edge.
pub fn compose(
    wa: &ConnectionSquare,
    wb: &ConnectionSquare,
    direction: Direction,
) -> Result<ConnectionSquare> {
    let (wpa, wpb) = (&wa.pf().weights, &wb.pf().weights);
    match direction {
        Direction::Horizontal => {
            if wa.right() != wb.left() {
                return Err(Error::SideMismatch(
                    "right side of the first connection is not the left side of the second".into(),
                ));
            }
            let bottom = concat_graphs(wa.bottom(), &wb.bottom().transpose())?;
            let top = concat_graphs(wa.top(), &wb.top().transpose())?;
            let (bi, ti) = (pair_index(&bottom), pair_index(&top));
            let mut by_left: HashMap<usize, Vec<(&Cell, &C64)>> = HashMap::new();
            for (c, v) in wb.cells() {
                by_left.entry(c.left).or_default().push((c, v));
            }
            let mut cells: BTreeMap<Cell, C64> = BTreeMap::new();
            for (ca, va) in wa.cells() {
                for (cb, vb) in by_left.get(&ca.right).into_iter().flatten() {
                    let key = Cell::new(
                        bi[&(ca.bottom, cb.bottom)],
                        ca.left,
                        cb.right,
                        ti[&(ca.top, cb.top)],
                    );
                    *cells.entry(key).or_insert(ZERO) += va * *vb;
                }
            }
            let pf = CornerWeights {
                beta: wa.beta() * wb.beta(),
                weights: [
                    wpa[0].clone(),
                    wpb[1].clone(),
                    wpa[2].clone(),
                    wpb[3].clone(),
                ],
            };
            let left = wa.left().clone();
            let right = wb.right().clone();
            Ok(ConnectionSquare::new(bottom, left, right, top, cells, Some(pf))?.pruned(PRUNE))
        }
        Direction::Vertical => {
            if wa.top() != wb.bottom() {
                return Err(Error::SideMismatch(
                    "top side of the first connection is not the bottom side of the second".into(),
                ));
            }
            let left = concat_graphs(wa.left(), &wb.left().transpose())?;
            let right = concat_graphs(wa.right(), &wb.right().transpose())?;
            let (li, ri) = (pair_index(&left), pair_index(&right));
            let mut by_bottom: HashMap<usize, Vec<(&Cell, &C64)>> = HashMap::new();
            for (c, v) in wb.cells() {
                by_bottom.entry(c.bottom).or_default().push((c, v));
            }
            let mut cells: BTreeMap<Cell, C64> = BTreeMap::new();
            for (ca, va) in wa.cells() {
                for (cb, vb) in by_bottom.get(&ca.top).into_iter().flatten() {
                    let key = Cell::new(
                        ca.bottom,
                        li[&(ca.left, cb.left)],
                        ri[&(ca.right, cb.right)],
                        cb.top,
                    );
                    *cells.entry(key).or_insert(ZERO) += va * *vb;
                }
            }
            let pf = CornerWeights {
                beta: wa.beta(),
                weights: [
                    wpa[0].clone(),
                    wpa[1].clone(),
                    wpb[2].clone(),
                    wpb[3].clone(),
                ],
            };
            let bottom = wa.bottom().clone();
            let top = wb.top().clone();
            Ok(ConnectionSquare::new(bottom, left, right, top, cells, Some(pf))?.pruned(PRUNE))
        }
    }
}

struct Entry {
    bottom: usize,
    left: usize,
    top: usize,
    v: C64,
    f: f64,
}

/// The composite connection on `K = G G^t` (requires bottom = left = `G`):
///
/// ```text
/// Y(x0 y0; x1 y1; x2 y2; x3 y3) = sum W(x0, x1, n1, n2) W1(y0; n1, x2, n3)
///                                     W2(n2; y1, n4, x3) W3(n3; n4, y2, y3)
/// ```
///
/// with every renormalization written back in terms of `W`. All four sides
/// are `K`, the weights are those of the even class of `G`, and the
/// eigenvalue is `beta^2`.
pub fn build_y(w: &ConnectionSquare) -> Result<ConnectionSquare> {
    if w.bottom() != w.left() {
        return Err(Error::SideMismatch(
            "the composite needs bottom and left to be the same graph".into(),
        ));
    }
    let g = w.bottom();
    let k = concat_graphs(g, g)?;
    let pairs = pair_index(&k);
    let mut by_right: BTreeMap<usize, Vec<Entry>> = BTreeMap::new();
    for (c, v) in w.cells() {
        let f = w.corner_factor(w.corners(*c)?);
        by_right.entry(c.right).or_default().push(Entry {
            bottom: c.bottom,
            left: c.left,
            top: c.top,
            v: *v,
            f,
        });
    }
    // lower row W W1 and upper row W2 W3, both keyed by the vertical
    // internal edges (n2, n3); entries are the outer edge quadruples
    type Row = BTreeMap<(usize, usize), Vec<([usize; 4], C64)>>;
    let mut lower: Row = BTreeMap::new();
    let mut upper: Row = BTreeMap::new();
    for group in by_right.values() {
        for a in group {
            for b in group {
                let edges = [a.bottom, a.left, b.bottom, b.left];
                lower
                    .entry((a.top, b.top))
                    .or_default()
                    .push((edges, a.v * b.v.conj() * b.f));
                upper
                    .entry((a.top, b.top))
                    .or_default()
                    .push((edges, a.v.conj() * a.f * b.v));
            }
        }
    }
    let mut cells: BTreeMap<Cell, C64> = BTreeMap::new();
    for (key, lows) in &lower {
        let Some(ups) = upper.get(key) else { continue };
        for ([x0, x1, y0, x2], lv) in lows {
            for ([x3, y1, y3, y2], uv) in ups {
                let c = Cell::new(
                    pairs[&(*x0, *y0)],
                    pairs[&(*x1, *y1)],
                    pairs[&(*x2, *y2)],
                    pairs[&(*x3, *y3)],
                );
                *cells.entry(c).or_insert(ZERO) += lv * uv;
            }
        }
    }
    let mu = w.pf().weights[0].clone();
    let pf = CornerWeights {
        beta: w.beta() * w.beta(),
        weights: [mu.clone(), mu.clone(), mu.clone(), mu],
    };
    Ok(ConnectionSquare::new(k.clone(), k.clone(), k.clone(), k, cells, Some(pf))?.pruned(PRUNE))
}

/// `Y` as the 2x2 block of compositions of `W` and its renormalizations.
pub fn build_y_by_composition(w: &ConnectionSquare) -> Result<ConnectionSquare> {
    let w1 = w.renormalize(Renormalization::Horizontal);
    let w2 = w.renormalize(Renormalization::Vertical);
    let w3 = w.renormalize(Renormalization::Both);
    let lower = compose(w, &w1, Direction::Horizontal)?;
    let upper = compose(&w2, &w3, Direction::Horizontal)?;
    compose(&lower, &upper, Direction::Vertical)
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceReport {
    pub horizontal: f64,
    pub vertical: f64,
    pub both: f64,
    pub tol: f64,
}

impl InvarianceReport {
    pub fn residual(&self) -> f64 {
        self.horizontal.max(self.vertical).max(self.both)
    }

    pub fn pass(&self) -> bool {
        self.residual() <= self.tol
    }
}

/// Compares `Y` with each of its renormalizations. Renormalizing turns some
/// sides into `K^t`, which is identified with `K` by reversing composite
/// edges `(a, b) -> (b, a)`.
pub fn check_renorm_invariance(y: &ConnectionSquare, tol: f64) -> Result<InvarianceReport> {
    if !y.is_self_composable() {
        return Err(Error::NotSelfComposable);
    }
    let rev = y
        .bottom()
        .reversal()
        .ok_or_else(|| Error::InvalidConnection("sides are not a composite graph G G^t".into()))?;
    let residual = |mode: Renormalization, flip: [bool; 4]| -> Result<f64> {
        let r = y.renormalize(mode);
        let map = |e: usize, k: usize| if flip[k] { rev[e] } else { e };
        let cells = r.cells().iter().map(|(c, v)| {
            (
                Cell::new(
                    map(c.bottom, 0),
                    map(c.left, 1),
                    map(c.right, 2),
                    map(c.top, 3),
                ),
                *v,
            )
        });
        Ok(y.with_cells(cells)?.max_cell_difference(y))
    };
    Ok(InvarianceReport {
        horizontal: residual(Renormalization::Horizontal, [true, false, false, true])?,
        vertical: residual(Renormalization::Vertical, [false, true, true, false])?,
        both: residual(Renormalization::Both, [true; 4])?,
        tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::{
        build_dynkin_connection, build_group_connection, cyclic_group, dynkin_graph,
        symmetric_group_s3,
    };
    use crate::linalg::ONE;

    #[test]
    fn direct_y_matches_block_composition() {
        let ws = vec![
            build_dynkin_connection(2),
            build_dynkin_connection(3),
            build_dynkin_connection(4),
            build_dynkin_connection(5),
            build_group_connection(&cyclic_group(2)).unwrap(),
            build_group_connection(&cyclic_group(3)).unwrap(),
            build_group_connection(&symmetric_group_s3()).unwrap(),
        ];
        for w in &ws {
            let a = build_y(w).unwrap();
            let b = build_y_by_composition(w).unwrap();
            assert!(a.same_graphs(&b));
            assert!(a.max_cell_difference(&b) < 1e-12);
        }
    }

    #[test]
    fn composite_bottom_adjacency_is_product() {
        let w = build_dynkin_connection(4);
        let w1 = w.renormalize(Renormalization::Horizontal);
        let c = compose(&w, &w1, Direction::Horizontal).unwrap();
        assert_eq!(
            c.bottom().adjacency(),
            w.bottom().adjacency() * w1.bottom().adjacency()
        );
    }

    #[test]
    fn composing_biunitary_connections_is_biunitary() {
        let w = build_dynkin_connection(3);
        let w1 = w.renormalize(Renormalization::Horizontal);
        let c = compose(&w, &w1, Direction::Horizontal).unwrap();
        assert!(c.check_biunitarity(1e-9).pass());
        let w2 = w.renormalize(Renormalization::Vertical);
        let c = compose(&w, &w2, Direction::Vertical).unwrap();
        assert!(c.check_biunitarity(1e-9).pass());
    }

    #[test]
    fn unit_connection_composes_trivially() {
        let g = dynkin_graph(2);
        let unit = ConnectionSquare::new(
            g.clone(),
            g.clone(),
            g.transpose(),
            g.transpose(),
            [(Cell::new(0, 0, 0, 0), ONE)],
            None,
        )
        .unwrap();
        let w = build_dynkin_connection(2);
        let unit_h = unit.renormalize(Renormalization::Horizontal);
        let c = compose(&w, &unit_h, Direction::Horizontal).unwrap();
        assert_eq!(c.cells().len(), 1);
        let (cv, wv) = (
            *c.cells().values().next().unwrap(),
            *w.cells().values().next().unwrap(),
        );
        assert!((cv - wv).norm() < 1e-15);
    }

    #[test]
    fn mismatched_sides_are_rejected() {
        let w = build_dynkin_connection(3);
        assert!(matches!(
            compose(&w, &w, Direction::Horizontal),
            Err(Error::SideMismatch(_))
        ));
        assert!(matches!(
            compose(&w, &w, Direction::Vertical),
            Err(Error::SideMismatch(_))
        ));
        let lower = compose(
            &w,
            &w.renormalize(Renormalization::Horizontal),
            Direction::Horizontal,
        )
        .unwrap();
        assert!(matches!(build_y(&lower), Err(Error::SideMismatch(_))));
    }

    #[test]
    fn y_a2_is_a_single_unimodular_cell() {
        let y = build_y(&build_dynkin_connection(2)).unwrap();
        assert_eq!(y.cells().len(), 1);
        assert!((y.cells().values().next().unwrap().norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn y_shapes() {
        let y = build_y(&build_dynkin_connection(3)).unwrap();
        assert_eq!(y.bottom().even().len(), 2);
        assert_eq!(y.bottom().edges().len(), 4);
        assert!((y.beta() - 2.0).abs() < 1e-12);
        assert!(y.is_self_composable());
    }
}
