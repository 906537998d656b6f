use std::f64::consts::PI;

use super::{Cell, ConnectionSquare, CornerWeights};
use crate::graph::BipartiteGraph;
use crate::linalg::C64;

/// The path graph `A_n` on vertices `1..n`. Odd-numbered vertices form the
/// even class, vertex `1` is the base, edge ids read `even-odd`.
pub fn dynkin_graph(n: usize) -> BipartiteGraph {
    assert!(n >= 2, "A_n needs n >= 2");
    let even: Vec<String> = (1..=n)
        .filter(|k| k % 2 == 1)
        .map(|k| k.to_string())
        .collect();
    let odd: Vec<String> = (1..=n)
        .filter(|k| k % 2 == 0)
        .map(|k| k.to_string())
        .collect();
    let edges: Vec<(String, String, String)> = (1..n)
        .map(|k| {
            let (e, o) = if k % 2 == 1 { (k, k + 1) } else { (k + 1, k) };
            (format!("{e}-{o}"), e.to_string(), o.to_string())
        })
        .collect();
    BipartiteGraph::new(even, odd, &edges, Some("1")).expect("path graph is well formed")
}

/// Closed-form Perron-Frobenius weight of vertex `k` of `A_n`.
fn dynkin_weight(n: usize, k: usize) -> f64 {
    let q = PI / (n as f64 + 1.0);
    (k as f64 * q).sin() / q.sin()
}

/// Kauffman-type connection on `A_n`: bottom and left are `A_n`, right and
/// top its transpose, with
/// `W(a, b, c, d) = eps d_{bc} + conj(eps) d_{ad} sqrt(mu_b mu_c) / mu_a`
/// on corners `a = x0, b = x1, c = x2, d = x3`.
pub fn build_dynkin_connection(n: usize) -> ConnectionSquare {
    let g = dynkin_graph(n);
    let gt = g.transpose();
    let label_weight = |l: &str| dynkin_weight(n, l.parse().expect("numeric label"));
    let we: Vec<f64> = g.even().iter().map(|l| label_weight(l)).collect();
    let wo: Vec<f64> = g.odd().iter().map(|l| label_weight(l)).collect();
    let beta = 2.0 * (PI / (n as f64 + 1.0)).cos();
    let pf = CornerWeights {
        beta,
        weights: [we.clone(), wo.clone(), wo.clone(), we.clone()],
    };
    let eps = C64::i() * C64::from_polar(1.0, PI / (2.0 * (n as f64 + 1.0)));
    let skeleton = ConnectionSquare::new(g.clone(), g.clone(), gt.clone(), gt, [], Some(pf))
        .expect("corner classes agree");
    let cells: Vec<(Cell, C64)> = skeleton
        .cell_keys()
        .into_iter()
        .filter_map(|c| {
            let [a, b, cc, d] = skeleton.corners(c).expect("enumerated cell");
            let mut v = C64::new(0.0, 0.0);
            if b == cc {
                v += eps;
            }
            if a == d {
                v += eps.conj() * (wo[b] * wo[cc]).sqrt() / we[a];
            }
            (v.norm() > 1e-15).then_some((c, v))
        })
        .collect();
    skeleton.with_cells(cells).expect("cells close squares")
}
