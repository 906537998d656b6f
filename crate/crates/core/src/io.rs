//! JSON file formats for graphs, connections, groups and fusion rings.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::connection::{Cell, ConnectionSquare, CornerWeights, GroupData, Irrep};
use crate::error::{Error, Result};
use crate::fusion::FusionRing;
use crate::graph::{BipartiteGraph, Parity, Vertex};
use crate::linalg::{CMatrix, C64};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeFile {
    pub id: String,
    pub even: String,
    pub odd: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parts: Option<(usize, usize)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphFile {
    pub even: Vec<String>,
    pub odd: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<String>,
    /// Base vertex in the odd class (graphs stored transposed).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub odd_base: Option<String>,
    pub edges: Vec<EdgeFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellFile {
    pub bottom: String,
    pub left: String,
    pub right: String,
    pub top: String,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightsFile {
    pub beta: f64,
    pub weights: [Vec<f64>; 4],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConnectionFile {
    pub bottom: GraphFile,
    pub left: GraphFile,
    pub right: GraphFile,
    pub top: GraphFile,
    pub cells: Vec<CellFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pf: Option<WeightsFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IrrepFile {
    pub label: String,
    /// One matrix per element; entries are `[re, im]`.
    pub matrices: Vec<Vec<Vec<[f64; 2]>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupFile {
    pub elements: Vec<String>,
    pub identity: String,
    /// `table[g][h]` names `g h`.
    pub table: Vec<Vec<String>>,
    pub irreps: Vec<IrrepFile>,
}

/// A label given by position or by name.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelRef {
    Index(usize),
    Name(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FusionFile {
    pub labels: Vec<String>,
    pub unit: LabelRef,
    pub dims: Vec<f64>,
    #[serde(rename = "N")]
    pub n: Vec<(LabelRef, LabelRef, LabelRef, u64)>,
}

pub fn graph_to_file(g: &BipartiteGraph) -> GraphFile {
    GraphFile {
        even: g.even().to_vec(),
        odd: g.odd().to_vec(),
        base: g.base().map(|b| g.even()[b].clone()),
        odd_base: g
            .base_vertex()
            .filter(|v| v.parity == Parity::Odd)
            .map(|v| g.odd()[v.index].clone()),
        edges: g
            .edges()
            .iter()
            .map(|e| EdgeFile {
                id: e.id.clone(),
                even: g.even()[e.even].clone(),
                odd: g.odd()[e.odd].clone(),
                parts: e.parts,
            })
            .collect(),
    }
}

pub fn graph_from_file(f: &GraphFile) -> Result<BipartiteGraph> {
    let edges: Vec<(&str, &str, &str)> = f
        .edges
        .iter()
        .map(|e| (e.id.as_str(), e.even.as_str(), e.odd.as_str()))
        .collect();
    let mut g = BipartiteGraph::new(f.even.clone(), f.odd.clone(), &edges, f.base.as_deref())?;
    if let Some(b) = &f.odd_base {
        if f.base.is_some() {
            return Err(Error::Parse(
                "graph has both an even and an odd base".into(),
            ));
        }
        let i = g
            .odd_index(b)
            .ok_or_else(|| Error::Parse(format!("base `{b}` is not an odd vertex")))?;
        g = g.with_base(Some(Vertex::odd(i)));
    }
    let parts: HashMap<String, (usize, usize)> = f
        .edges
        .iter()
        .filter_map(|e| e.parts.map(|p| (e.id.clone(), p)))
        .collect();
    Ok(if parts.is_empty() {
        g
    } else {
        g.with_parts(&parts)
    })
}

pub fn connection_to_file(w: &ConnectionSquare) -> ConnectionFile {
    let id = |g: &BipartiteGraph, e: usize| g.edge(e).id.clone();
    let cells = w
        .cells()
        .iter()
        .map(|(c, v)| CellFile {
            bottom: id(w.bottom(), c.bottom),
            left: id(w.left(), c.left),
            right: id(w.right(), c.right),
            top: id(w.top(), c.top),
            re: v.re,
            im: v.im,
        })
        .collect();
    ConnectionFile {
        bottom: graph_to_file(w.bottom()),
        left: graph_to_file(w.left()),
        right: graph_to_file(w.right()),
        top: graph_to_file(w.top()),
        cells,
        pf: Some(WeightsFile {
            beta: w.pf().beta,
            weights: w.pf().weights.clone(),
        }),
    }
}

pub fn connection_from_file(f: &ConnectionFile) -> Result<ConnectionSquare> {
    let (b, l, r, t) = (
        graph_from_file(&f.bottom)?,
        graph_from_file(&f.left)?,
        graph_from_file(&f.right)?,
        graph_from_file(&f.top)?,
    );
    let edge = |g: &BipartiteGraph, id: &str, side: &str| {
        g.edge_index(id)
            .ok_or_else(|| Error::Parse(format!("cell names unknown {side} edge `{id}`")))
    };
    let mut cells = Vec::with_capacity(f.cells.len());
    for c in &f.cells {
        let cell = Cell::new(
            edge(&b, &c.bottom, "bottom")?,
            edge(&l, &c.left, "left")?,
            edge(&r, &c.right, "right")?,
            edge(&t, &c.top, "top")?,
        );
        if !(c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::Parse("cell value is not finite".into()));
        }
        cells.push((cell, C64::new(c.re, c.im)));
    }
    let pf = f.pf.as_ref().map(|p| CornerWeights {
        beta: p.beta,
        weights: p.weights.clone(),
    });
    ConnectionSquare::new(b, l, r, t, cells, pf)
}

pub fn connection_to_string(w: &ConnectionSquare) -> Result<String> {
    Ok(serde_json::to_string_pretty(&connection_to_file(w))?)
}

pub fn connection_from_str(s: &str) -> Result<ConnectionSquare> {
    connection_from_file(&serde_json::from_str(s)?)
}

pub fn read_connection(path: impl AsRef<Path>) -> Result<ConnectionSquare> {
    connection_from_str(&std::fs::read_to_string(path)?)
}

pub fn group_to_file(g: &GroupData) -> GroupFile {
    GroupFile {
        elements: g.elements.clone(),
        identity: g.elements[g.identity].clone(),
        table: g
            .table
            .iter()
            .map(|row| row.iter().map(|&k| g.elements[k].clone()).collect())
            .collect(),
        irreps: g
            .irreps
            .iter()
            .map(|p| IrrepFile {
                label: p.label.clone(),
                matrices: p
                    .matrices
                    .iter()
                    .map(|m| {
                        (0..m.nrows())
                            .map(|i| {
                                (0..m.ncols())
                                    .map(|j| [m[(i, j)].re, m[(i, j)].im])
                                    .collect()
                            })
                            .collect()
                    })
                    .collect(),
            })
            .collect(),
    }
}

/// Parses and validates a group.
pub fn group_from_file(f: &GroupFile) -> Result<GroupData> {
    let index: HashMap<&str, usize> = f
        .elements
        .iter()
        .enumerate()
        .map(|(i, e)| (e.as_str(), i))
        .collect();
    let find = |name: &str| {
        index
            .get(name)
            .copied()
            .ok_or_else(|| Error::Parse(format!("unknown group element `{name}`")))
    };
    let identity = find(&f.identity)?;
    let table = f
        .table
        .iter()
        .map(|row| row.iter().map(|e| find(e)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let mut irreps = Vec::with_capacity(f.irreps.len());
    for p in &f.irreps {
        let mut matrices = Vec::with_capacity(p.matrices.len());
        for m in &p.matrices {
            let d = m.len();
            if m.iter().any(|row| row.len() != d) {
                return Err(Error::Parse(format!(
                    "irrep `{}` has a non-square matrix",
                    p.label
                )));
            }
            matrices.push(CMatrix::from_fn(d, d, |i, j| {
                C64::new(m[i][j][0], m[i][j][1])
            }));
        }
        irreps.push(Irrep {
            label: p.label.clone(),
            matrices,
        });
    }
    let g = GroupData {
        elements: f.elements.clone(),
        identity,
        table,
        irreps,
    };
    g.validate()?;
    Ok(g)
}

pub fn group_from_str(s: &str) -> Result<GroupData> {
    group_from_file(&serde_json::from_str(s)?)
}

pub fn read_group(path: impl AsRef<Path>) -> Result<GroupData> {
    group_from_str(&std::fs::read_to_string(path)?)
}

pub fn fusion_to_file(r: &FusionRing) -> FusionFile {
    FusionFile {
        labels: r.labels().to_vec(),
        unit: LabelRef::Name(r.labels()[r.unit()].clone()),
        dims: r.dims().to_vec(),
        n: r.entries()
            .into_iter()
            .map(|(i, j, k, c)| {
                (
                    LabelRef::Index(i),
                    LabelRef::Index(j),
                    LabelRef::Index(k),
                    c,
                )
            })
            .collect(),
    }
}

pub fn fusion_from_file(f: &FusionFile) -> Result<FusionRing> {
    let resolve = |l: &LabelRef| match l {
        LabelRef::Index(i) if *i < f.labels.len() => Ok(*i),
        LabelRef::Index(i) => Err(Error::Parse(format!("label index {i} out of range"))),
        LabelRef::Name(n) => f
            .labels
            .iter()
            .position(|x| x == n)
            .ok_or_else(|| Error::Parse(format!("unknown label `{n}`"))),
    };
    let entries =
        f.n.iter()
            .map(|(i, j, k, c)| Ok((resolve(i)?, resolve(j)?, resolve(k)?, *c)))
            .collect::<Result<Vec<_>>>()?;
    FusionRing::new(
        f.labels.clone(),
        resolve(&f.unit)?,
        f.dims.clone(),
        &entries,
    )
}

pub fn fusion_to_string(r: &FusionRing) -> Result<String> {
    Ok(serde_json::to_string_pretty(&fusion_to_file(r))?)
}

pub fn fusion_from_str(s: &str) -> Result<FusionRing> {
    fusion_from_file(&serde_json::from_str(s)?)
}

pub fn read_fusion(path: impl AsRef<Path>) -> Result<FusionRing> {
    fusion_from_str(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::composite::{build_y, check_renorm_invariance};
    use crate::connection::{build_dynkin_connection, build_group_connection, symmetric_group_s3};
    use crate::fusion::{builtin_ring, BUILTIN_RINGS};

    #[test]
    fn connection_round_trip() {
        for w in [
            build_dynkin_connection(4),
            build_group_connection(&symmetric_group_s3()).unwrap(),
        ] {
            let back = connection_from_str(&connection_to_string(&w).unwrap()).unwrap();
            assert_eq!(back, w);
        }
    }

    #[test]
    fn composite_round_trip_keeps_edge_structure() {
        let y = build_y(&build_dynkin_connection(3)).unwrap();
        let back = connection_from_str(&connection_to_string(&y).unwrap()).unwrap();
        assert_eq!(back, y);
        assert!(check_renorm_invariance(&back, 1e-9).unwrap().pass());
    }

    #[test]
    fn missing_weights_are_recomputed() {
        let w = build_dynkin_connection(3);
        let mut f = connection_to_file(&w);
        f.pf = None;
        let back = connection_from_file(&f).unwrap();
        assert!((back.beta() - w.beta()).abs() < 1e-12);
        assert!(back.check_biunitarity(1e-10).pass());
    }

    #[test]
    fn malformed_connections_are_rejected() {
        assert!(matches!(connection_from_str("{"), Err(Error::Json(_))));
        let mut f = connection_to_file(&build_dynkin_connection(3));
        f.cells[0].left = "nope".into();
        assert!(matches!(connection_from_file(&f), Err(Error::Parse(_))));
    }

    #[test]
    fn group_round_trip() {
        let g = symmetric_group_s3();
        let back = group_from_str(&serde_json::to_string(&group_to_file(&g)).unwrap()).unwrap();
        assert_eq!(back.table, g.table);
        assert_eq!(back.irreps.len(), 3);
        let mut f = group_to_file(&g);
        f.table[1][1] = f.elements[1].clone();
        assert!(group_from_file(&f).is_err());
    }

    #[test]
    fn fusion_round_trip_and_names() {
        for name in BUILTIN_RINGS {
            let r = builtin_ring(name).unwrap();
            assert_eq!(fusion_from_str(&fusion_to_string(&r).unwrap()).unwrap(), r);
        }
        let named = r#"{"labels": ["1", "tau"], "unit": "1", "dims": [1.0, 1.618033988749895],
            "N": [["1","1","1",1], [0,1,1,1], [1,0,1,1], ["tau","tau","1",1], [1,1,1,1]]}"#;
        assert_eq!(
            fusion_from_str(named)
                .unwrap()
                .multi_fusion(&[1, 1])
                .unwrap(),
            vec![1, 1]
        );
        assert!(
            fusion_from_str(r#"{"labels": ["1"], "unit": "x", "dims": [1.0], "N": []}"#).is_err()
        );
    }
}
