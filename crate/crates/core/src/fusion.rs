//! Fusion rings, the s-fusion Bratteli diagram and its Perron-Frobenius data.

use nalgebra::DMatrix;

use crate::connection::GroupData;
use crate::error::{Error, Result};
use crate::graph::{eigen_residual, BipartiteGraph};

/// Largest number of tuples a diagram may enumerate by default.
pub const DEFAULT_TUPLE_CAP: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq)]
pub struct FusionRing {
    labels: Vec<String>,
    unit: usize,
    dims: Vec<f64>,
    /// `n[i][j][k]` is the multiplicity of `k` in `i ⊗ j`.
    n: Vec<Vec<Vec<u64>>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FusionReport {
    pub violations: Vec<String>,
}

impl FusionReport {
    pub fn valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl FusionRing {
    /// `entries` are `(i, j, k, count)`; missing triples are zero.
    pub fn new(
        labels: Vec<String>,
        unit: usize,
        dims: Vec<f64>,
        entries: &[(usize, usize, usize, u64)],
    ) -> Result<Self> {
        let r = labels.len();
        if r == 0 {
            return Err(Error::InvalidFusion("no labels".into()));
        }
        if unit >= r {
            return Err(Error::InvalidFusion(format!(
                "unit index {unit} out of range"
            )));
        }
        if dims.len() != r {
            return Err(Error::InvalidFusion(format!(
                "{} dims for {r} labels",
                dims.len()
            )));
        }
        if let Some(d) = dims.iter().find(|d| !(d.is_finite() && **d > 0.0)) {
            return Err(Error::InvalidFusion(format!(
                "dimension {d} is not positive"
            )));
        }
        for (a, l) in labels.iter().enumerate() {
            if labels[..a].contains(l) {
                return Err(Error::InvalidFusion(format!("duplicate label `{l}`")));
            }
        }
        let mut n = vec![vec![vec![0u64; r]; r]; r];
        for &(i, j, k, c) in entries {
            if i >= r || j >= r || k >= r {
                return Err(Error::InvalidFusion(format!(
                    "entry ({i}, {j}, {k}) out of range"
                )));
            }
            n[i][j][k] += c;
        }
        Ok(FusionRing {
            labels,
            unit,
            dims,
            n,
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn unit(&self) -> usize {
        self.unit
    }

    pub fn dims(&self) -> &[f64] {
        &self.dims
    }

    pub fn rank(&self) -> usize {
        self.labels.len()
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn multiplicity(&self, i: usize, j: usize, k: usize) -> u64 {
        self.n[i][j][k]
    }

    /// Nonzero `(i, j, k, count)` entries in index order.
    pub fn entries(&self) -> Vec<(usize, usize, usize, u64)> {
        let r = self.rank();
        let mut out = Vec::new();
        for i in 0..r {
            for j in 0..r {
                for k in 0..r {
                    if self.n[i][j][k] > 0 {
                        out.push((i, j, k, self.n[i][j][k]));
                    }
                }
            }
        }
        out
    }

    pub fn validate(&self, tol: f64) -> FusionReport {
        let r = self.rank();
        let u = self.unit;
        let mut violations = Vec::new();
        let name = |i: usize| self.labels[i].as_str();
        for j in 0..r {
            for k in 0..r {
                let d = u64::from(j == k);
                if self.n[u][j][k] != d || self.n[j][u][k] != d {
                    violations.push(format!(
                        "unit: N({}, {}; {}) != {d}",
                        name(u),
                        name(j),
                        name(k)
                    ));
                }
            }
        }
        for i in 0..r {
            for j in 0..r {
                for k in 0..r {
                    for l in 0..r {
                        let a: u64 = (0..r).map(|m| self.n[i][j][m] * self.n[m][k][l]).sum();
                        let b: u64 = (0..r).map(|m| self.n[j][k][m] * self.n[i][m][l]).sum();
                        if a != b {
                            violations.push(format!(
                                "associativity: ({} {}) {} -> {}: {a} != {b}",
                                name(i),
                                name(j),
                                name(k),
                                name(l)
                            ));
                        }
                    }
                }
            }
        }
        for i in 0..r {
            for j in 0..r {
                let s: f64 = (0..r).map(|k| self.n[i][j][k] as f64 * self.dims[k]).sum();
                let want = self.dims[i] * self.dims[j];
                if (s - want).abs() > tol * want.max(1.0) {
                    violations.push(format!(
                        "dimension: {} x {}: {s} != {want}",
                        name(i),
                        name(j)
                    ));
                }
            }
        }
        FusionReport { violations }
    }

    /// `ω = Σ μ_k²`.
    pub fn global_index(&self) -> f64 {
        self.dims.iter().map(|d| d * d).sum()
    }

    /// Multiplicities of every label in `X_0 ⊗ ... ⊗ X_{s-1}`, contracted
    /// from the left.
    pub fn multi_fusion(&self, tuple: &[usize]) -> Result<Vec<u64>> {
        let r = self.rank();
        if tuple.is_empty() {
            return Err(Error::InvalidFusion("empty tuple".into()));
        }
        if let Some(x) = tuple.iter().find(|&&x| x >= r) {
            return Err(Error::InvalidFusion(format!(
                "label index {x} out of range"
            )));
        }
        let mut acc = vec![0u64; r];
        acc[tuple[0]] = 1;
        for &x in &tuple[1..] {
            let mut next = vec![0u64; r];
            for (z, &c) in acc.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                for (y, slot) in next.iter_mut().enumerate() {
                    *slot += c * self.n[z][x][y];
                }
            }
            acc = next;
        }
        Ok(acc)
    }
}

fn tuples(r: usize, s: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..s {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..r).map(move |x| {
                    let mut t = t.clone();
                    t.push(x);
                    t
                })
            })
            .collect();
    }
    out
}

fn check_tuple_cap(r: usize, s: usize, cap: usize) -> Result<()> {
    let size = (r as u128).checked_pow(s as u32).unwrap_or(u128::MAX);
    if s == 0 {
        return Err(Error::InvalidFusion("s must be at least 1".into()));
    }
    if size > cap as u128 {
        return Err(Error::CapExceeded {
            size: size.min(usize::MAX as u128) as usize,
            cap,
        });
    }
    Ok(())
}

/// Tuples `(X_0, ..., X_{s-1})` against single labels `Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct BratteliDiagram {
    pub s: usize,
    pub tuples: Vec<Vec<usize>>,
    /// `mult[t][y]`.
    pub mult: Vec<Vec<u64>>,
}

impl BratteliDiagram {
    pub fn matrix(&self) -> DMatrix<f64> {
        let cols = self.mult.first().map_or(0, |m| m.len());
        DMatrix::from_fn(self.tuples.len(), cols, |t, y| self.mult[t][y] as f64)
    }

    pub fn edge_count(&self) -> u64 {
        self.mult.iter().flatten().sum()
    }

    /// The diagram as a bipartite graph, tuples even and labels odd.
    pub fn to_graph(&self, ring: &FusionRing) -> Result<BipartiteGraph> {
        let tuple_label = |t: &[usize]| {
            t.iter()
                .map(|&x| ring.labels[x].as_str())
                .collect::<Vec<_>>()
                .join(",")
        };
        let even: Vec<String> = self
            .tuples
            .iter()
            .map(|t| format!("({})", tuple_label(t)))
            .collect();
        let odd = ring.labels.clone();
        let mut edges = Vec::new();
        for (t, row) in self.mult.iter().enumerate() {
            for (y, &c) in row.iter().enumerate() {
                for k in 0..c {
                    edges.push((
                        format!("{}>{}#{k}", even[t], odd[y]),
                        even[t].clone(),
                        odd[y].clone(),
                    ));
                }
            }
        }
        BipartiteGraph::new(even, odd, &edges, None)
    }
}

pub fn build_bratteli(ring: &FusionRing, s: usize, cap: usize) -> Result<BratteliDiagram> {
    check_tuple_cap(ring.rank(), s, cap)?;
    let tuples = tuples(ring.rank(), s);
    let mult = tuples
        .iter()
        .map(|t| ring.multi_fusion(t))
        .collect::<Result<_>>()?;
    Ok(BratteliDiagram { s, tuples, mult })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PfReport {
    /// Largest singular value of the multiplicity matrix.
    pub beta_l: f64,
    /// `ω^{(s-1)/2}`.
    pub expected: f64,
    pub mu_tuples: Vec<f64>,
    pub mu_singles: Vec<f64>,
    /// Max violation of the two bipartite eigen-equations.
    pub eigen_residual: f64,
    pub tol: f64,
}

impl PfReport {
    pub fn residual(&self) -> f64 {
        (self.beta_l - self.expected).abs().max(self.eigen_residual)
    }

    pub fn pass(&self) -> bool {
        self.residual() <= self.tol
    }
}

pub fn check_pf(diagram: &BratteliDiagram, ring: &FusionRing, tol: f64) -> PfReport {
    let l = diagram.matrix();
    let beta_l = l
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0, f64::max);
    let expected = ring.global_index().powf((diagram.s as f64 - 1.0) / 2.0);
    let mu_tuples: Vec<f64> = diagram
        .tuples
        .iter()
        .map(|t| t.iter().map(|&x| ring.dims[x]).product())
        .collect();
    let mu_singles: Vec<f64> = ring.dims.iter().map(|d| expected * d).collect();
    let eigen_residual = eigen_residual(&l, expected, &mu_tuples, &mu_singles);
    PfReport {
        beta_l,
        expected,
        mu_tuples,
        mu_singles,
        eigen_residual,
        tol,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexReport {
    pub omega: f64,
    pub s: usize,
    /// `ω^{s-1}`, the index of the multiple inclusion.
    pub index: f64,
    /// The unit appears once in the all-unit tuple.
    pub irreducible: bool,
}

pub fn index_report(ring: &FusionRing, s: usize) -> Result<IndexReport> {
    if s == 0 {
        return Err(Error::InvalidFusion("s must be at least 1".into()));
    }
    let omega = ring.global_index();
    let m = ring.multi_fusion(&vec![ring.unit; s])?;
    Ok(IndexReport {
        omega,
        s,
        index: omega.powi(s as i32 - 1),
        irreducible: m[ring.unit] == 1,
    })
}

/// `|Σ_X N_X^Y μ_X - ω^{s-1} μ_Y|` over all `s`-tuples `X`.
pub fn fusion_identity_check(ring: &FusionRing, s: usize, y: usize, cap: usize) -> Result<f64> {
    if y >= ring.rank() {
        return Err(Error::InvalidFusion(format!(
            "label index {y} out of range"
        )));
    }
    check_tuple_cap(ring.rank(), s, cap)?;
    let mut lhs = 0.0;
    for t in tuples(ring.rank(), s) {
        let m = ring.multi_fusion(&t)?[y];
        if m > 0 {
            lhs += m as f64 * t.iter().map(|&x| ring.dims[x]).product::<f64>();
        }
    }
    Ok((lhs - ring.global_index().powi(s as i32 - 1) * ring.dims[y]).abs())
}

pub fn trivial_ring() -> FusionRing {
    FusionRing::new(vec!["1".into()], 0, vec![1.0], &[(0, 0, 0, 1)]).expect("trivial ring")
}

pub fn group_ring(g: &GroupData) -> FusionRing {
    let n = g.order();
    let mut entries = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            entries.push((a, b, g.table[a][b], 1));
        }
    }
    FusionRing::new(g.elements.clone(), g.identity, vec![1.0; n], &entries).expect("group ring")
}

pub fn fibonacci_ring() -> FusionRing {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    FusionRing::new(
        vec!["1".into(), "tau".into()],
        0,
        vec![1.0, phi],
        &[
            (0, 0, 0, 1),
            (0, 1, 1, 1),
            (1, 0, 1, 1),
            (1, 1, 0, 1),
            (1, 1, 1, 1),
        ],
    )
    .expect("Fibonacci ring")
}

/// Even part of SU(2) at level `k`: labels are the doubled spins 0, 2, ..., ≤ k.
pub fn su2_even_ring(k: usize) -> FusionRing {
    let spins: Vec<usize> = (0..=k).step_by(2).collect();
    let q = std::f64::consts::PI / (k as f64 + 2.0);
    let dims = spins
        .iter()
        .map(|&a| ((a as f64 + 1.0) * q).sin() / q.sin())
        .collect();
    let mut entries = Vec::new();
    for (i, &a) in spins.iter().enumerate() {
        for (j, &b) in spins.iter().enumerate() {
            let hi = (a + b).min(2 * k - a - b);
            for (c_ix, &c) in spins.iter().enumerate() {
                if c >= a.abs_diff(b) && c <= hi {
                    entries.push((i, j, c_ix, 1));
                }
            }
        }
    }
    FusionRing::new(
        spins.iter().map(|a| a.to_string()).collect(),
        0,
        dims,
        &entries,
    )
    .expect("SU(2) even part")
}

/// `trivial`, `z2`, `z3`, `s3`, `fib` or `su2-<k>`.
pub fn builtin_ring(name: &str) -> Result<FusionRing> {
    use crate::connection::{cyclic_group, symmetric_group_s3};
    Ok(match name {
        "trivial" => trivial_ring(),
        "z2" => group_ring(&cyclic_group(2)),
        "z3" => group_ring(&cyclic_group(3)),
        "s3" => group_ring(&symmetric_group_s3()),
        "fib" => fibonacci_ring(),
        _ => match name
            .strip_prefix("su2-")
            .and_then(|k| k.parse::<usize>().ok())
        {
            Some(k) if k >= 1 => su2_even_ring(k),
            _ => {
                return Err(Error::InvalidFusion(format!(
                    "unknown built-in ring `{name}`"
                )))
            }
        },
    })
}

pub const BUILTIN_RINGS: [&str; 7] = ["trivial", "z2", "z3", "s3", "fib", "su2-4", "su2-6"];
