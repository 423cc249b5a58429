//! C-SVC solved by sequential minimal optimization with second-order
//! working-set selection, on a precomputed kernel matrix.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
}

impl Kernel {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Kernel::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            Kernel::Rbf { gamma } => {
                (-gamma * a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>()).exp()
            }
        }
    }

    pub fn gram(&self, xs: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let n = xs.len();
        let mut k = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i..n {
                let v = self.eval(&xs[i], &xs[j]);
                k[i][j] = v;
                k[j][i] = v;
            }
        }
        k
    }
}

pub const TOLERANCE: f64 = 1e-3;
const TAU: f64 = 1e-12;

/// Dual solution for labels `y ∈ {−1, +1}`: f(x) = Σ αᵢ yᵢ K(xᵢ, x) − ρ.
#[derive(Debug, Clone, PartialEq)]
pub struct BinarySolution {
    pub alpha: Vec<f64>,
    pub rho: f64,
    pub iterations: usize,
}

pub fn solve(gram: &[Vec<f64>], y: &[f64], c: f64, tol: f64) -> BinarySolution {
    let n = y.len();
    let mut alpha = vec![0.0; n];
    // gradient of ½αᵀQα − eᵀα with Q_ij = y_i y_j K_ij
    let mut g = vec![-1.0; n];
    let q = |i: usize, j: usize| y[i] * y[j] * gram[i][j];
    let is_up = |a: f64, yy: f64| (yy > 0.0 && a < c) || (yy < 0.0 && a > 0.0);
    let is_low = |a: f64, yy: f64| (yy > 0.0 && a > 0.0) || (yy < 0.0 && a < c);
    let max_iter = (100 * n).max(10_000_000);
    let mut iterations = 0;
    while iterations < max_iter {
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..n {
            if is_up(alpha[t], y[t]) && -y[t] * g[t] > gmax {
                gmax = -y[t] * g[t];
                i_sel = Some(t);
            }
        }
        let Some(i) = i_sel else { break };
        let mut gmax2 = f64::NEG_INFINITY;
        let mut obj_min = f64::INFINITY;
        let mut j_sel = None;
        for t in 0..n {
            if !is_low(alpha[t], y[t]) {
                continue;
            }
            let yg = y[t] * g[t];
            if yg > gmax2 {
                gmax2 = yg;
            }
            let b = gmax + yg;
            if b > 0.0 {
                let mut a = gram[i][i] + gram[t][t] - 2.0 * gram[i][t];
                if a <= 0.0 {
                    a = TAU;
                }
                let obj = -(b * b) / a;
                if obj < obj_min {
                    obj_min = obj;
                    j_sel = Some(t);
                }
            }
        }
        if gmax + gmax2 < tol {
            break;
        }
        let Some(j) = j_sel else { break };
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let mut quad = gram[i][i] + gram[j][j] + 2.0 * q(i, j);
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-g[i] - g[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let mut quad = gram[i][i] + gram[j][j] - 2.0 * q(i, j);
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (g[i] - g[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            g[t] += q(t, i) * di + q(t, j) * dj;
        }
    }

    // ρ: mean of y·G over free vectors, else the midpoint of the bounds
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum, mut nfree) = (0.0, 0usize);
    for t in 0..n {
        let yg = y[t] * g[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            nfree += 1;
            sum += yg;
        }
    }
    let rho = if nfree > 0 {
        sum / nfree as f64
    } else {
        (ub + lb) / 2.0
    };
    BinarySolution {
        alpha,
        rho,
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn decision(gram: &[Vec<f64>], y: &[f64], s: &BinarySolution, i: usize) -> f64 {
        (0..y.len())
            .map(|t| s.alpha[t] * y[t] * gram[t][i])
            .sum::<f64>()
            - s.rho
    }

    fn data(seed: u64, n: usize, overlap: f64) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut rng = crate::seed::rng(seed);
        let mut xs = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let label = if i % 2 == 0 { 1.0 } else { -1.0 };
            let shift = label * (1.0 - overlap);
            xs.push(vec![
                shift + rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            ]);
            y.push(label);
        }
        (xs, y)
    }

    fn assert_kkt(gram: &[Vec<f64>], y: &[f64], s: &BinarySolution, c: f64) {
        // reduced to a common scale: violations of y·f against the bounds
        for i in 0..y.len() {
            let yf = y[i] * decision(gram, y, s, i);
            let a = s.alpha[i];
            if a <= 0.0 {
                assert!(yf >= 1.0 - TOLERANCE, "α=0 but yf={yf}");
            } else if a >= c {
                assert!(yf <= 1.0 + TOLERANCE, "α=C but yf={yf}");
            } else {
                assert!((yf - 1.0).abs() <= TOLERANCE, "free but yf={yf}");
            }
        }
        let eq: f64 = s.alpha.iter().zip(y).map(|(a, y)| a * y).sum();
        assert!(eq.abs() < 1e-9);
        assert!(s.alpha.iter().all(|a| *a >= 0.0 && *a <= c));
    }

    #[test]
    fn separable_linear_is_perfect() {
        let (xs, y) = data(1, 40, 0.0);
        let xs: Vec<Vec<f64>> = xs
            .iter()
            .zip(&y)
            .map(|(x, l)| vec![x[0] + 2.0 * l, x[1]])
            .collect();
        let gram = Kernel::Linear.gram(&xs);
        let s = solve(&gram, &y, 10.0, TOLERANCE);
        for i in 0..y.len() {
            assert!(decision(&gram, &y, &s, i) * y[i] > 0.0);
        }
        assert_kkt(&gram, &y, &s, 10.0);
    }

    #[test]
    fn kkt_holds_on_overlapping_data() {
        for (seed, kernel, c) in [
            (2, Kernel::Linear, 1.0),
            (3, Kernel::Rbf { gamma: 0.5 }, 10.0),
            (4, Kernel::Rbf { gamma: 1.0 }, 0.1),
        ] {
            let (xs, y) = data(seed, 60, 0.6);
            let gram = kernel.gram(&xs);
            let s = solve(&gram, &y, c, TOLERANCE);
            assert_kkt(&gram, &y, &s, c);
        }
    }

    #[test]
    fn hand_solved_pair() {
        // two points at ±1 on a line: α = 0.5 each, ρ = 0, margin exactly 1
        let xs = vec![vec![1.0], vec![-1.0]];
        let y = vec![1.0, -1.0];
        let s = solve(&Kernel::Linear.gram(&xs), &y, 10.0, TOLERANCE);
        assert!((s.alpha[0] - 0.5).abs() < 1e-12);
        assert!((s.alpha[1] - 0.5).abs() < 1e-12);
        assert!(s.rho.abs() < 1e-12);
    }
}
