//! Multi-start numerical search for every triple `(τ_0, τ_1, τ_2)` of unit
//! Bloch vectors with `Σ cos(2πi/3) n_i = e_x` and `Σ sin(2πi/3) n_i = e_y`.
//!
//! The nine unknowns are the three Bloch vectors; the nine equations are
//! three unit-norm constraints and six linear ones. Each start is refined
//! by damped Newton and converged triples are deduplicated.

use nalgebra::{SMatrix, SVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::spin::{direction, tau_bloch, BlochVector, XiSign};

type Vec9 = SVector<f64, 9>;
type Mat9 = SMatrix<f64, 9, 9>;

#[derive(Debug, Clone)]
pub struct TauSolverConfig {
    pub starts: usize,
    pub seed: u64,
    pub max_iterations: usize,
    /// Residual norm at which a start counts as converged.
    pub tolerance: f64,
    /// Two solutions closer than this (max-abs over the nine unknowns) are one.
    pub dedup_distance: f64,
}

impl Default for TauSolverConfig {
    fn default() -> Self {
        Self { starts: 1000, seed: 0x7a75, max_iterations: 100, tolerance: 1e-13, dedup_distance: 1e-6 }
    }
}

#[derive(Debug, Clone)]
pub struct TauSolution {
    pub vectors: [BlochVector<f64>; 3],
    pub residual: f64,
    /// Number of starts that converged onto this solution.
    pub hits: usize,
}

impl TauSolution {
    /// Max distance to the closed-form family with the given `ξ` sign.
    pub fn distance_to(&self, sign: XiSign) -> f64 {
        (0..3).map(|i| self.vectors[i].distance(&tau_bloch(i, sign))).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct TauSolveReport {
    pub solutions: Vec<TauSolution>,
    /// Starts that failed to converge and were skipped.
    pub non_converged: usize,
}

fn residual(x: &Vec9) -> Vec9 {
    let mut r = Vec9::zeros();
    for i in 0..3 {
        let n = x.fixed_rows::<3>(3 * i);
        r[i] = n.norm_squared() - 1.0;
        let [c, s] = direction::<f64>(i);
        for a in 0..3 {
            r[3 + a] += c * n[a];
            r[6 + a] += s * n[a];
        }
    }
    r[3] -= 1.0;
    r[7] -= 1.0;
    r
}

fn jacobian(x: &Vec9) -> Mat9 {
    let mut j = Mat9::zeros();
    for i in 0..3 {
        let [c, s] = direction::<f64>(i);
        for a in 0..3 {
            j[(i, 3 * i + a)] = 2.0 * x[3 * i + a];
            j[(3 + a, 3 * i + a)] = c;
            j[(6 + a, 3 * i + a)] = s;
        }
    }
    j
}

fn newton(mut x: Vec9, cfg: &TauSolverConfig) -> Option<(Vec9, f64)> {
    let mut r = residual(&x);
    let mut rn = r.norm();
    for _ in 0..cfg.max_iterations {
        if rn < cfg.tolerance {
            return Some((x, rn));
        }
        let step = jacobian(&x).lu().solve(&(-r))?;
        let mut t = 1.0;
        loop {
            let trial = x + step * t;
            let tr = residual(&trial);
            let tn = tr.norm();
            if tn < (1.0 - 0.5 * t) * rn || t < 1e-10 {
                x = trial;
                r = tr;
                rn = tn;
                break;
            }
            t *= 0.5;
        }
    }
    (rn < cfg.tolerance).then_some((x, rn))
}

fn random_unit(rng: &mut ChaCha8Rng) -> [f64; 3] {
    let z: f64 = rng.gen_range(-1.0..=1.0);
    let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let rho = (1.0 - z * z).sqrt();
    [rho * phi.cos(), rho * phi.sin(), z]
}

/// Solves the two defining conditions on the `τ_i` from many random starts.
pub fn solve_tau_conditions(cfg: &TauSolverConfig) -> TauSolveReport {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut found: Vec<(Vec9, f64, usize)> = Vec::new();
    let mut non_converged = 0;
    for _ in 0..cfg.starts {
        let mut x0 = Vec9::zeros();
        for i in 0..3 {
            let n = random_unit(&mut rng);
            x0.fixed_rows_mut::<3>(3 * i).copy_from_slice(&n);
        }
        match newton(x0, cfg) {
            Some((x, res)) => {
                if let Some(entry) = found.iter_mut().find(|(y, _, _)| (y - x).amax() < cfg.dedup_distance) {
                    entry.2 += 1;
                    entry.1 = entry.1.max(res);
                } else {
                    found.push((x, res, 1));
                }
            }
            None => non_converged += 1,
        }
    }
    let mut solutions: Vec<TauSolution> = found
        .into_iter()
        .map(|(x, residual, hits)| TauSolution {
            vectors: [0, 1, 2].map(|i| BlochVector::new(x[3 * i], x[3 * i + 1], x[3 * i + 2])),
            residual,
            hits,
        })
        .collect();
    // Positive ξ first.
    solutions.sort_by(|a, b| b.vectors[0].nz.partial_cmp(&a.vectors[0].nz).unwrap());
    TauSolveReport { solutions, non_converged }
}

/// Residual of the two linear conditions at a triple of Bloch vectors.
pub fn linear_condition_residual(vectors: &[BlochVector<f64>; 3]) -> f64 {
    let mut x = Vec9::zeros();
    for (i, v) in vectors.iter().enumerate() {
        x[3 * i] = v.nx;
        x[3 * i + 1] = v.ny;
        x[3 * i + 2] = v.nz;
    }
    residual(&x).rows(3, 6).amax()
}
