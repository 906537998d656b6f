//! Random biunitary connections, used as generic (non Yang-Baxter) controls.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_gybe, Cell, ConnectionSquare, CornerWeights, Gauge, Renormalization};
use crate::error::{Error, Result};
use crate::graph::concat_graphs;
use crate::linalg::{polar_unitary, random_complex, C64};

const MAX_SWEEPS: usize = 2000;
const TARGET: f64 = 1e-13;

fn project_plain(w: &ConnectionSquare) -> ConnectionSquare {
    let mut cells: Vec<(Cell, C64)> = Vec::new();
    for x0 in 0..w.bottom().even().len() {
        for x3 in 0..w.top().odd().len() {
            let (rows, cols, m) = w.corner_block(x0, x3);
            if rows.is_empty() || rows.len() != cols.len() {
                continue;
            }
            let u = polar_unitary(&m);
            for (i, &(l, t)) in rows.iter().enumerate() {
                for (j, &(b, r)) in cols.iter().enumerate() {
                    cells.push((Cell::new(b, l, r, t), u[(i, j)]));
                }
            }
        }
    }
    w.with_cells(cells).expect("same graphs")
}

/// Alternating polar projections onto plain and renormalized unitarity,
/// starting from random cells on the graphs of `skeleton`.
pub fn random_biunitary<R: Rng>(
    skeleton: &ConnectionSquare,
    rng: &mut R,
) -> Result<ConnectionSquare> {
    let keys = skeleton.cell_keys();
    let mut w = skeleton.with_cells(keys.into_iter().map(|c| (c, random_complex(rng))))?;
    for _ in 0..MAX_SWEEPS {
        w = project_plain(&w);
        let h = project_plain(&w.renormalize(Renormalization::Horizontal));
        w = h.renormalize(Renormalization::Horizontal);
        if w.check_biunitarity(TARGET).pass() {
            return Ok(w);
        }
    }
    Err(Error::NoConvergence {
        iterations: MAX_SWEEPS,
        residual: w.check_biunitarity(TARGET).residual(),
    })
}

/// GYBE threshold the control connection must exceed.
pub const CONTROL_GYBE_FLOOR: f64 = 0.01;

/// A random biunitary connection with all four sides `K = A_3 A_3^t`,
/// scrambled by a random phase gauge and resampled until it violates the
/// Yang-Baxter equation by more than [`CONTROL_GYBE_FLOOR`].
pub fn random_control_connection(seed: u64) -> Result<ConnectionSquare> {
    let g = super::dynkin_graph(3);
    let k = concat_graphs(&g, &g)?;
    let ones = vec![1.0; k.even().len()];
    let pf = CornerWeights {
        beta: 2.0,
        weights: [ones.clone(), ones.clone(), ones.clone(), ones],
    };
    let skeleton = ConnectionSquare::new(k.clone(), k.clone(), k.clone(), k, [], Some(pf))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let w = match random_biunitary(&skeleton, &mut rng) {
            Ok(w) => w,
            Err(_) => continue,
        };
        let w = w.gauge_transform(&Gauge::random_phases(&w, &mut rng))?;
        if check_gybe(&w, 0.0)?.residual > CONTROL_GYBE_FLOOR {
            return Ok(w);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn control_is_biunitary_and_fails_gybe() {
        for seed in 0..3 {
            let w = random_control_connection(seed).unwrap();
            assert!(w.check_biunitarity(1e-12).pass());
            assert!(check_gybe(&w, 1e-9).unwrap().residual > CONTROL_GYBE_FLOOR);
        }
    }

    #[test]
    fn control_is_deterministic() {
        let a = random_control_connection(5).unwrap();
        let b = random_control_connection(5).unwrap();
        assert_eq!(a.max_cell_difference(&b), 0.0);
    }
}
