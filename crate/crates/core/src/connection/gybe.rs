//! The generalized Yang-Baxter equation for a self-composable connection.
//!
//! Boundary: upper path `a1 -x1-> a2 -x2-> a3 -x3-> a4`, lower path
//! `a1 -x6-> a6 -x5-> a5 -x4-> a4`. Internal vertex `a7`.
//!
//! ```text
//! LHS = sum Y(x1, x6, x7, x9) Y(x2, x7, x3, x8) Y(x9, x5, x8, x4)
//!       x7: a2 -> a7, x9: a6 -> a7, x8: a7 -> a4
//! RHS = sum Y(x1, x7, x2, x8) Y(x8, x9, x3, x4) Y(x7, x6, x9, x5)
//!       x7: a1 -> a7, x8: a7 -> a3, x9: a7 -> a5
//! ```

use std::collections::HashMap;

use super::{Cell, ConnectionSquare};
use crate::error::{Error, Result};
use crate::linalg::{C64, ZERO};

#[derive(Debug, Clone, PartialEq)]
pub struct GybeReport {
    pub residual: f64,
    /// Boundary edge ids `x1..x6` where the residual is attained.
    pub location: Option<[String; 6]>,
    pub lhs: C64,
    pub rhs: C64,
    pub configurations: usize,
    pub tol: f64,
}

impl GybeReport {
    pub fn pass(&self) -> bool {
        self.residual <= self.tol
    }
}

pub fn check_gybe(y: &ConnectionSquare, tol: f64) -> Result<GybeReport> {
    if !y.is_self_composable() {
        return Err(Error::NotSelfComposable);
    }
    let k = y.bottom();
    if k.even() != k.odd() {
        return Err(Error::NotSelfComposable);
    }
    let nv = k.even().len();
    let src: Vec<usize> = k.edges().iter().map(|e| e.even).collect();
    let dst: Vec<usize> = k.edges().iter().map(|e| e.odd).collect();
    let mut between: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (i, e) in k.edges().iter().enumerate() {
        between.entry((e.even, e.odd)).or_default().push(i);
    }
    let none = Vec::new();
    let edges = |a: usize, b: usize| between.get(&(a, b)).unwrap_or(&none);
    let out: Vec<Vec<usize>> = (0..nv)
        .map(|v| (0..src.len()).filter(|&i| src[i] == v).collect())
        .collect();
    let cell = |b, l, r, t| y.get(Cell::new(b, l, r, t));

    // paths of length 3 from each start, grouped by end
    let mut paths: Vec<HashMap<usize, Vec<[usize; 3]>>> = vec![HashMap::new(); nv];
    for (a1, from_a1) in paths.iter_mut().enumerate() {
        for &e1 in &out[a1] {
            for &e2 in &out[dst[e1]] {
                for &e3 in &out[dst[e2]] {
                    from_a1.entry(dst[e3]).or_default().push([e1, e2, e3]);
                }
            }
        }
    }

    let mut report = GybeReport {
        residual: 0.0,
        location: None,
        lhs: ZERO,
        rhs: ZERO,
        configurations: 0,
        tol,
    };
    for (a1, from_a1) in paths.iter().enumerate() {
        let mut ends: Vec<usize> = from_a1.keys().copied().collect();
        ends.sort_unstable();
        for a4 in ends {
            let ps = &from_a1[&a4];
            for upper in ps {
                let [x1, x2, x3] = *upper;
                let (a2, a3) = (dst[x1], dst[x2]);
                for lower in ps {
                    let [x6, x5, x4] = *lower;
                    let (a6, a5) = (dst[x6], dst[x5]);
                    let mut lhs = ZERO;
                    let mut rhs = ZERO;
                    for a7 in 0..nv {
                        for &x7 in edges(a2, a7) {
                            for &x9 in edges(a6, a7) {
                                let c1 = cell(x1, x6, x7, x9);
                                if c1 == ZERO {
                                    continue;
                                }
                                for &x8 in edges(a7, a4) {
                                    lhs += c1 * cell(x2, x7, x3, x8) * cell(x9, x5, x8, x4);
                                }
                            }
                        }
                        for &x7 in edges(a1, a7) {
                            for &x8 in edges(a7, a3) {
                                let c1 = cell(x1, x7, x2, x8);
                                if c1 == ZERO {
                                    continue;
                                }
                                for &x9 in edges(a7, a5) {
                                    rhs += c1 * cell(x8, x9, x3, x4) * cell(x7, x6, x9, x5);
                                }
                            }
                        }
                    }
                    report.configurations += 1;
                    let d = (lhs - rhs).norm();
                    if d > report.residual || report.location.is_none() {
                        let id = |e: usize| k.edge(e).id.clone();
                        report.residual = report.residual.max(d);
                        report.location = Some([id(x1), id(x2), id(x3), id(x4), id(x5), id(x6)]);
                        report.lhs = lhs;
                        report.rhs = rhs;
                    }
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::build_dynkin_connection;

    #[test]
    fn non_self_composable_is_rejected() {
        let w = build_dynkin_connection(3);
        assert!(matches!(
            check_gybe(&w, 1e-9),
            Err(Error::NotSelfComposable)
        ));
    }
}
