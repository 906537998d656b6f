//! Finite groups with explicit unitary irreducible representations, and the
//! connection of the group subfactor built from their matrix entries.

use std::f64::consts::PI;

use super::{Cell, ConnectionSquare, CornerWeights};
use crate::error::{Error, Result};
use crate::graph::BipartiteGraph;
use crate::linalg::{unitarity_residual, CMatrix, C64, ONE, ZERO};

#[derive(Debug, Clone)]
pub struct Irrep {
    pub label: String,
    /// One matrix per group element, in element order.
    pub matrices: Vec<CMatrix>,
}

impl Irrep {
    pub fn dim(&self) -> usize {
        self.matrices.first().map_or(0, |m| m.nrows())
    }
}

#[derive(Debug, Clone)]
pub struct GroupData {
    pub elements: Vec<String>,
    pub identity: usize,
    /// `table[g][h]` is the index of `g h`.
    pub table: Vec<Vec<usize>>,
    pub irreps: Vec<Irrep>,
}

const GROUP_TOL: f64 = 1e-10;

impl GroupData {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn inverse(&self, g: usize) -> usize {
        (0..self.order())
            .find(|&h| self.table[g][h] == self.identity)
            .expect("validated group")
    }

    /// Checks the group axioms and that the representations are unitary,
    /// multiplicative, pairwise inequivalent irreducibles exhausting the
    /// regular representation.
    pub fn validate(&self) -> Result<()> {
        let n = self.order();
        let bad = |m: String| Err(Error::InvalidGroup(m));
        if n == 0 {
            return bad("empty group".into());
        }
        if self.identity >= n
            || self.table.len() != n
            || self
                .table
                .iter()
                .any(|r| r.len() != n || r.iter().any(|&x| x >= n))
        {
            return bad("multiplication table has the wrong shape".into());
        }
        for g in 0..n {
            if self.table[self.identity][g] != g || self.table[g][self.identity] != g {
                return bad(format!(
                    "`{}` is not neutral for `{}`",
                    self.elements[self.identity], self.elements[g]
                ));
            }
            let mut row: Vec<usize> = self.table[g].clone();
            row.sort_unstable();
            row.dedup();
            if row.len() != n {
                return bad(format!(
                    "row of `{}` is not a permutation",
                    self.elements[g]
                ));
            }
            for h in 0..n {
                for k in 0..n {
                    if self.table[self.table[g][h]][k] != self.table[g][self.table[h][k]] {
                        return bad("multiplication is not associative".into());
                    }
                }
            }
        }
        let mut sum_sq = 0;
        for rep in &self.irreps {
            let d = rep.dim();
            if rep.matrices.len() != n
                || d == 0
                || rep
                    .matrices
                    .iter()
                    .any(|m| m.nrows() != d || m.ncols() != d)
            {
                return bad(format!(
                    "representation `{}` has the wrong shape",
                    rep.label
                ));
            }
            for (g, m) in rep.matrices.iter().enumerate() {
                if unitarity_residual(m) > GROUP_TOL {
                    return bad(format!(
                        "representation `{}` is not unitary at `{}`",
                        rep.label, self.elements[g]
                    ));
                }
            }
            for g in 0..n {
                for h in 0..n {
                    let prod = &rep.matrices[g] * &rep.matrices[h];
                    if crate::linalg::max_abs(&(prod - &rep.matrices[self.table[g][h]])) > GROUP_TOL
                    {
                        return bad(format!(
                            "representation `{}` is not a homomorphism",
                            rep.label
                        ));
                    }
                }
            }
            sum_sq += d * d;
        }
        if sum_sq != n {
            return bad(format!(
                "sum of squared dimensions is {sum_sq}, group order is {n}"
            ));
        }
        // character orthonormality certifies irreducibility and inequivalence
        for (a, ra) in self.irreps.iter().enumerate() {
            for (b, rb) in self.irreps.iter().enumerate() {
                let s: C64 = (0..n)
                    .map(|g| ra.matrices[g].trace().conj() * rb.matrices[g].trace())
                    .sum::<C64>()
                    / n as f64;
                let want = if a == b { 1.0 } else { 0.0 };
                if (s - want).norm() > GROUP_TOL {
                    return bad(format!(
                        "characters of `{}` and `{}` are not orthonormal",
                        ra.label, rb.label
                    ));
                }
            }
        }
        Ok(())
    }
}

/// `Z_n` with its `n` characters.
pub fn cyclic_group(n: usize) -> GroupData {
    assert!(n >= 1);
    let elements = (0..n).map(|k| k.to_string()).collect();
    let table = (0..n)
        .map(|g| (0..n).map(|h| (g + h) % n).collect())
        .collect();
    let irreps = (0..n)
        .map(|k| Irrep {
            label: format!("chi{k}"),
            matrices: (0..n)
                .map(|g| {
                    CMatrix::from_element(
                        1,
                        1,
                        C64::from_polar(1.0, 2.0 * PI * (k * g) as f64 / n as f64),
                    )
                })
                .collect(),
        })
        .collect();
    GroupData {
        elements,
        identity: 0,
        table,
        irreps,
    }
}

/// `S_3` acting on `{0, 1, 2}`, with trivial, sign and standard representations.
pub fn symmetric_group_s3() -> GroupData {
    let perms: [[usize; 3]; 6] = [
        [0, 1, 2],
        [1, 0, 2],
        [0, 2, 1],
        [2, 1, 0],
        [1, 2, 0],
        [2, 0, 1],
    ];
    let elements = ["e", "(01)", "(12)", "(02)", "(012)", "(021)"]
        .map(String::from)
        .to_vec();
    let idx = |p: [usize; 3]| {
        perms
            .iter()
            .position(|q| *q == p)
            .expect("closed under composition")
    };
    let table: Vec<Vec<usize>> = perms
        .iter()
        .map(|g| {
            perms
                .iter()
                .map(|h| idx([g[h[0]], g[h[1]], g[h[2]]]))
                .collect()
        })
        .collect();
    let sign = |p: &[usize; 3]| {
        let inv = (0..3)
            .flat_map(|i| (i + 1..3).map(move |j| (i, j)))
            .filter(|&(i, j)| p[i] > p[j])
            .count();
        if inv % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    };
    // orthonormal basis of the sum-zero plane
    let basis = nalgebra::DMatrix::<f64>::from_row_slice(
        3,
        2,
        &[
            1.0 / 2f64.sqrt(),
            1.0 / 6f64.sqrt(),
            -1.0 / 2f64.sqrt(),
            1.0 / 6f64.sqrt(),
            0.0,
            -2.0 / 6f64.sqrt(),
        ],
    );
    let standard = perms
        .iter()
        .map(|p| {
            let mut perm = nalgebra::DMatrix::<f64>::zeros(3, 3);
            for k in 0..3 {
                perm[(p[k], k)] = 1.0;
            }
            (basis.transpose() * perm * &basis).map(|x| C64::new(x, 0.0))
        })
        .collect();
    let irreps = vec![
        Irrep {
            label: "triv".into(),
            matrices: vec![CMatrix::from_element(1, 1, ONE); 6],
        },
        Irrep {
            label: "sign".into(),
            matrices: perms
                .iter()
                .map(|p| CMatrix::from_element(1, 1, C64::new(sign(p), 0.0)))
                .collect(),
        },
        Irrep {
            label: "std".into(),
            matrices: standard,
        },
    ];
    GroupData {
        elements,
        identity: 0,
        table,
        irreps,
    }
}

/// Connection of the group subfactor. `V0` = group elements (identity as
/// base), `V1 = V2 = {*}`, `V3` = irreducible representations. Bottom and
/// left are the star graph on the elements, right and top join `*` to `pi`
/// by `dim pi` parallel edges `pi:i`. The cell `(g, g, pi:i, pi:j)` carries
/// `pi(g)_{ij}`; the horizontal renormalization then holds the Fourier
/// entries `sqrt(dim pi / |G|) conj(pi(g)_{ij})`.
pub fn build_group_connection(group: &GroupData) -> Result<ConnectionSquare> {
    group.validate()?;
    let n = group.order();
    let star_v = vec!["*".to_string()];
    let star_edges: Vec<(String, String, String)> = group
        .elements
        .iter()
        .map(|g| (g.clone(), g.clone(), "*".to_string()))
        .collect();
    let star = BipartiteGraph::new(
        group.elements.clone(),
        star_v.clone(),
        &star_edges,
        Some(&group.elements[group.identity]),
    )?;
    let rep_labels: Vec<String> = group.irreps.iter().map(|r| r.label.clone()).collect();
    let mut rep_edges = Vec::new();
    for r in &group.irreps {
        for i in 0..r.dim() {
            rep_edges.push((format!("{}:{i}", r.label), "*".to_string(), r.label.clone()));
        }
    }
    let reps = BipartiteGraph::new(star_v, rep_labels, &rep_edges, None)?;
    let pf = CornerWeights {
        beta: (n as f64).sqrt(),
        weights: [
            vec![1.0; n],
            vec![(n as f64).sqrt()],
            vec![(n as f64).sqrt()],
            group.irreps.iter().map(|r| r.dim() as f64).collect(),
        ],
    };
    let mut cells = Vec::new();
    for (g, label) in group.elements.iter().enumerate() {
        let e = star.edge_index(label).expect("star edge");
        for r in &group.irreps {
            for i in 0..r.dim() {
                let ri = reps
                    .edge_index(&format!("{}:{i}", r.label))
                    .expect("rep edge");
                for j in 0..r.dim() {
                    let tj = reps
                        .edge_index(&format!("{}:{j}", r.label))
                        .expect("rep edge");
                    let v = r.matrices[g][(i, j)];
                    if v != ZERO {
                        cells.push((Cell::new(e, e, ri, tj), v));
                    }
                }
            }
        }
    }
    ConnectionSquare::new(star.clone(), star, reps.clone(), reps, cells, Some(pf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::Renormalization;

    #[test]
    fn builtin_groups_validate() {
        for n in 1..7 {
            cyclic_group(n).validate().unwrap();
        }
        symmetric_group_s3().validate().unwrap();
    }

    #[test]
    fn s3_is_not_abelian() {
        let g = symmetric_group_s3();
        assert_ne!(g.table[1][2], g.table[2][1]);
        for h in 0..6 {
            assert_eq!(g.table[h][g.inverse(h)], 0);
        }
    }

    #[test]
    fn broken_groups_are_rejected() {
        let mut g = cyclic_group(3);
        g.table[1][1] = 0;
        assert!(g.validate().is_err());

        let mut g = cyclic_group(3);
        g.irreps.pop();
        assert!(g.validate().is_err());

        let mut g = cyclic_group(2);
        g.irreps[1] = g.irreps[0].clone();
        assert!(g.validate().is_err());

        let mut g = symmetric_group_s3();
        g.irreps[2].matrices[1] = g.irreps[2].matrices[1].scale(2.0);
        assert!(g.validate().is_err());
    }

    // Oracle: Fourier matrix F_{k,g} = exp(2 pi i k g / n) / sqrt(n).
    fn fourier_check(n: usize) {
        let w = build_group_connection(&cyclic_group(n)).unwrap();
        assert!(w.check_biunitarity(1e-12).pass());
        let h = w.renormalize(Renormalization::Horizontal);
        for g in 0..n {
            for k in 0..n {
                let want =
                    C64::from_polar(1.0, -2.0 * PI * (k * g) as f64 / n as f64) / (n as f64).sqrt();
                let e = w.bottom().edge_index(&g.to_string()).unwrap();
                let r = w.right().edge_index(&format!("chi{k}:0")).unwrap();
                assert!((h.get(Cell::new(e, r, e, r)) - want).norm() < 1e-14);
            }
        }
        // the Fourier block is the renormalized corner block at (*, *)
        let (_, _, m) = h.corner_block(0, 0);
        assert_eq!((m.nrows(), m.ncols()), (n, n));
        assert!(crate::linalg::unitarity_residual(&m) < 1e-12);
    }

    #[test]
    fn z2_and_z3_give_fourier_matrices() {
        fourier_check(2);
        fourier_check(3);
    }

    #[test]
    fn s3_connection_is_biunitary() {
        let w = build_group_connection(&symmetric_group_s3()).unwrap();
        let r = w.check_biunitarity(1e-10);
        assert!(r.pass(), "{r:?}");
    }
}
