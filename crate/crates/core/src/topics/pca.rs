//! Principal-component projection (cyclic Jacobi eigen-decomposition of the
//! covariance matrix).

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Pca {
    pub mean: Vec<f64>,
    /// Eigenvalues of the covariance (divided by n), descending.
    pub eigenvalues: Vec<f64>,
    /// Unit eigenvectors matching `eigenvalues`; the largest-magnitude
    /// entry of each is positive.
    pub components: Vec<Vec<f64>>,
}

/// Symmetric eigen-decomposition. Returns (values, vectors as columns of a
/// row-major matrix).
pub fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect())
        .collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |j| *j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let scale: f64 = (0..n)
            .map(|i| a[i][i] * a[i][i])
            .sum::<f64>()
            .max(f64::MIN_POSITIVE);
        if off <= 1e-30 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i][i]).collect(), v)
}

pub fn principal_components(vectors: &[Vec<f64>]) -> Result<Pca> {
    let n = vectors.len();
    if n < 2 {
        return Err(Error::InsufficientSamples(format!(
            "projection needs at least 2 vectors, got {n}"
        )));
    }
    let d = vectors[0].len();
    if let Some(v) = vectors.iter().find(|v| v.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: v.len(),
        });
    }
    let mean: Vec<f64> = (0..d)
        .map(|j| vectors.iter().map(|v| v[j]).sum::<f64>() / n as f64)
        .collect();
    let mut cov = vec![vec![0.0; d]; d];
    for v in vectors {
        for i in 0..d {
            let di = v[i] - mean[i];
            for j in i..d {
                cov[i][j] += di * (v[j] - mean[j]);
            }
        }
    }
    for i in 0..d {
        for j in i..d {
            cov[i][j] /= n as f64;
            cov[j][i] = cov[i][j];
        }
    }
    let (vals, vecs) = jacobi_eigen(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|a, b| vals[*b].total_cmp(&vals[*a]).then(a.cmp(b)));
    let components = order
        .iter()
        .map(|&c| {
            let mut col: Vec<f64> = (0..d).map(|r| vecs[r][c]).collect();
            let lead = col
                .iter()
                .copied()
                .fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
            if lead < 0.0 {
                col.iter_mut().for_each(|x| *x = -*x);
            }
            col
        })
        .collect();
    Ok(Pca {
        mean,
        eigenvalues: order.iter().map(|&c| vals[c].max(0.0)).collect(),
        components,
    })
}

/// Coordinates on the top two principal components. Data without variance
/// maps every point to the origin.
pub fn project_2d(vectors: &[Vec<f64>]) -> Result<Vec<[f64; 2]>> {
    let pca = principal_components(vectors)?;
    let comp = |k: usize, v: &[f64]| -> f64 {
        match pca.components.get(k) {
            Some(c) if pca.eigenvalues[k] > 0.0 => c
                .iter()
                .zip(v)
                .zip(&pca.mean)
                .map(|((c, x), m)| c * (x - m))
                .sum(),
            _ => 0.0,
        }
    };
    Ok(vectors.iter().map(|v| [comp(0, v), comp(1, v)]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn seeded(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = crate::seed::rng(seed);
        (0..n)
            .map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect()
    }

    #[test]
    fn eigenvalues_match_nalgebra() {
        let x = seeded(5, 4, 3);
        let p = principal_components(&x).unwrap();
        let m = nalgebra::DMatrix::from_fn(5, 4, |i, j| x[i][j] - p.mean[j]);
        let cov = m.transpose() * &m / 5.0;
        let mut want: Vec<f64> = nalgebra::SymmetricEigen::new(cov)
            .eigenvalues
            .iter()
            .copied()
            .collect();
        want.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in p.eigenvalues.iter().zip(&want) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn reconstruction_error_is_trailing_mass() {
        let x = seeded(5, 4, 7);
        let p = principal_components(&x).unwrap();
        let mut err = 0.0;
        for v in &x {
            let c: Vec<f64> = v.iter().zip(&p.mean).map(|(a, m)| a - m).collect();
            let mut rec = vec![0.0; 4];
            for comp in &p.components[..2] {
                let s: f64 = comp.iter().zip(&c).map(|(a, b)| a * b).sum();
                for (r, q) in rec.iter_mut().zip(comp) {
                    *r += s * q;
                }
            }
            err += c
                .iter()
                .zip(&rec)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>();
        }
        let trailing: f64 = p.eigenvalues[2..].iter().sum::<f64>() * 5.0;
        assert!((err - trailing).abs() < 1e-10, "{err} vs {trailing}");
    }

    #[test]
    fn collinear_and_constant() {
        let line: Vec<Vec<f64>> = (0..6)
            .map(|i| vec![i as f64, 2.0 * i as f64, -(i as f64)])
            .collect();
        for c in project_2d(&line).unwrap() {
            assert!(c[1].abs() < 1e-9);
        }
        let flat = vec![vec![3.0, 3.0]; 4];
        assert!(project_2d(&flat).unwrap().iter().all(|c| c == &[0.0, 0.0]));
        assert!(project_2d(&[vec![1.0]]).is_err());
    }

    #[test]
    fn rotation_equivariance_up_to_sign() {
        let x = seeded(8, 2, 5);
        let (c, s) = (0.6f64, 0.8f64);
        let rot: Vec<Vec<f64>> = x
            .iter()
            .map(|v| vec![c * v[0] - s * v[1], s * v[0] + c * v[1]])
            .collect();
        let a = project_2d(&x).unwrap();
        let b = project_2d(&rot).unwrap();
        for k in 0..2 {
            let same = a.iter().zip(&b).all(|(p, q)| (p[k] - q[k]).abs() < 1e-9);
            let flipped = a.iter().zip(&b).all(|(p, q)| (p[k] + q[k]).abs() < 1e-9);
            assert!(same || flipped);
        }
    }
}
