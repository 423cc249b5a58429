use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        KMeansConfig {
            max_iters: 300,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansResult {
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    /// Within-cluster SSE after each assignment step.
    pub sse_trace: Vec<f64>,
    pub iterations: usize,
}

impl KMeansResult {
    pub fn sse(&self) -> f64 {
        self.sse_trace.last().copied().unwrap_or(0.0)
    }
}

pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest centroid, ties to the lower index.
fn nearest(x: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, cen) in centroids.iter().enumerate() {
        let d = sq_dist(x, cen);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus_init(vectors: &[Vec<f64>], k: usize, rng: &mut seed::Rng) -> Vec<Vec<f64>> {
    let n = vectors.len();
    let mut centroids = vec![vectors[rng.random_range(0..n)].clone()];
    let mut d2: Vec<f64> = vectors.iter().map(|v| sq_dist(v, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let u = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = n - 1;
            for (i, d) in d2.iter().enumerate() {
                acc += d;
                if u < acc {
                    pick = i;
                    break;
                }
            }
            pick
        } else {
            // every point sits on a centroid already
            rng.random_range(0..n)
        };
        let c = vectors[pick].clone();
        for (i, v) in vectors.iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(v, &c));
        }
        centroids.push(c);
    }
    centroids
}

/// k-means++ seeding followed by Lloyd iterations. A cluster that loses all
/// its points keeps its previous centroid.
pub fn kmeans(
    vectors: &[Vec<f64>],
    k: usize,
    seed: u64,
    cfg: &KMeansConfig,
) -> Result<KMeansResult> {
    let n = vectors.len();
    if k == 0 || k > n {
        return Err(Error::TooManyClusters { k, n });
    }
    let dim = vectors[0].len();
    if let Some(v) = vectors.iter().find(|v| v.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: v.len(),
        });
    }
    let mut rng = seed::rng(seed);
    let mut centroids = plus_plus_init(vectors, k, &mut rng);
    let mut assignments = vec![0; n];
    let mut sse_trace = Vec::new();
    let mut iterations = 0;
    for _ in 0..cfg.max_iters {
        iterations += 1;
        let mut sse = 0.0;
        for (i, v) in vectors.iter().enumerate() {
            let (c, d) = nearest(v, &centroids);
            assignments[i] = c;
            sse += d;
        }
        sse_trace.push(sse);
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (v, c) in vectors.iter().zip(&assignments) {
            counts[*c] += 1;
            for (s, x) in sums[*c].iter_mut().zip(v) {
                *s += x;
            }
        }
        let mut shift: f64 = 0.0;
        for c in 0..k {
            if counts[c] == 0 {
                continue;
            }
            let new: Vec<f64> = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            shift = shift.max(sq_dist(&new, &centroids[c]).sqrt());
            centroids[c] = new;
        }
        if shift < cfg.tol {
            break;
        }
    }
    // final assignment against the converged centroids
    let mut sse = 0.0;
    for (i, v) in vectors.iter().enumerate() {
        let (c, d) = nearest(v, &centroids);
        assignments[i] = c;
        sse += d;
    }
    sse_trace.push(sse);
    Ok(KMeansResult {
        assignments,
        centroids,
        sse_trace,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Normal};

    fn blobs(seed: u64, per: usize) -> (Vec<Vec<f64>>, Vec<usize>) {
        let mut rng = seed::rng(seed);
        let noise = Normal::new(0.0, 0.3).unwrap();
        let centers = [[0.0, 0.0, 0.0], [10.0, 10.0, -5.0]];
        let mut v = Vec::new();
        let mut labels = Vec::new();
        for (l, c) in centers.iter().enumerate() {
            for _ in 0..per {
                v.push(c.iter().map(|x| x + noise.sample(&mut rng)).collect());
                labels.push(l);
            }
        }
        (v, labels)
    }

    #[test]
    fn single_cluster_is_the_mean() {
        let v = vec![vec![1.0, 2.0], vec![3.0, 6.0], vec![5.0, 1.0]];
        let r = kmeans(&v, 1, 0, &KMeansConfig::default()).unwrap();
        assert!((r.centroids[0][0] - 3.0).abs() < 1e-12);
        assert!((r.centroids[0][1] - 3.0).abs() < 1e-12);
        assert!(r.assignments.iter().all(|a| *a == 0));
    }

    #[test]
    fn separated_blobs_recovered() {
        for s in 0..5 {
            let (v, labels) = blobs(s, 25);
            let r = kmeans(&v, 2, s, &KMeansConfig::default()).unwrap();
            let map = r.assignments[0];
            for (a, l) in r.assignments.iter().zip(&labels) {
                assert_eq!(*a == map, *l == 0);
            }
        }
    }

    #[test]
    fn sse_non_increasing_and_beats_random() {
        for s in 0..20u64 {
            let (v, _) = blobs(100 + s, 15);
            let r = kmeans(&v, 3, s, &KMeansConfig::default()).unwrap();
            for w in r.sse_trace.windows(2) {
                assert!(w[1] <= w[0] * (1.0 + 1e-12), "{:?}", r.sse_trace);
            }
            // SSE of a random assignment with its own cluster means
            let mut rng = seed::rng(999 + s);
            let random: Vec<usize> = (0..v.len()).map(|_| rng.random_range(0..3)).collect();
            let mut rsse = 0.0;
            for c in 0..3 {
                let members: Vec<&Vec<f64>> = v
                    .iter()
                    .zip(&random)
                    .filter(|(_, a)| **a == c)
                    .map(|(x, _)| x)
                    .collect();
                if members.is_empty() {
                    continue;
                }
                let mean: Vec<f64> = (0..3)
                    .map(|j| members.iter().map(|m| m[j]).sum::<f64>() / members.len() as f64)
                    .collect();
                rsse += members.iter().map(|m| sq_dist(m, &mean)).sum::<f64>();
            }
            assert!(r.sse() <= rsse);
        }
    }

    #[test]
    fn deterministic_and_errors() {
        let (v, _) = blobs(3, 10);
        let cfg = KMeansConfig::default();
        assert_eq!(
            kmeans(&v, 4, 11, &cfg).unwrap(),
            kmeans(&v, 4, 11, &cfg).unwrap()
        );
        assert!(matches!(
            kmeans(&v, 21, 1, &cfg),
            Err(Error::TooManyClusters { k: 21, n: 20 })
        ));
        assert!(kmeans(&v, 0, 1, &cfg).is_err());
        // duplicates: more clusters than distinct points
        let dup = vec![vec![1.0]; 5];
        let r = kmeans(&dup, 3, 2, &cfg).unwrap();
        assert_eq!(r.sse(), 0.0);
    }
}
