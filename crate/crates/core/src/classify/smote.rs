use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::seed;

pub const DEFAULT_K_NEIGHBORS: usize = 5;

/// Parents of one synthetic sample: `x = x[base] + u · (x[neighbor] − x[base])`,
/// indices into the input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Synthetic {
    pub base: usize,
    pub neighbor: usize,
    pub u: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoteOutput {
    /// Inputs verbatim and in order, then synthetic samples by ascending class.
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
    pub synthetic: Vec<Synthetic>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Upsample every class to the majority count. Base samples cycle through the
/// class in input order; each draws one of its k nearest same-class
/// neighbours (ties by index) and a uniform interpolation weight.
pub fn smote(
    features: &[Vec<f64>],
    labels: &[u8],
    k_neighbors: usize,
    seed_: u64,
) -> Result<SmoteOutput> {
    if features.len() != labels.len() {
        return Err(Error::Invalid(format!(
            "{} feature rows for {} labels",
            features.len(),
            labels.len()
        )));
    }
    let mut classes: BTreeMap<u8, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        classes.entry(*l).or_default().push(i);
    }
    if let Some((c, _)) = classes.iter().find(|(_, m)| m.len() < 2) {
        return Err(Error::SingletonClass(*c));
    }
    let majority = classes.values().map(Vec::len).max().unwrap_or(0);
    let mut out = SmoteOutput {
        features: features.to_vec(),
        labels: labels.to_vec(),
        synthetic: Vec::new(),
    };
    for (class, members) in &classes {
        let need = majority - members.len();
        if need == 0 {
            continue;
        }
        let k = k_neighbors.min(members.len() - 1).max(1);
        let neighbours: Vec<Vec<usize>> = members
            .iter()
            .map(|&i| {
                let mut others: Vec<(f64, usize)> = members
                    .iter()
                    .filter(|&&j| j != i)
                    .map(|&j| (sq_dist(&features[i], &features[j]), j))
                    .collect();
                others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                others.into_iter().take(k).map(|(_, j)| j).collect()
            })
            .collect();
        let mut rng = seed::rng_for(seed_, &[seed::tag("smote"), u64::from(*class)]);
        for s in 0..need {
            let pos = s % members.len();
            let base = members[pos];
            let neighbor = neighbours[pos][rng.random_range(0..neighbours[pos].len())];
            let u: f64 = rng.random();
            let x = features[base]
                .iter()
                .zip(&features[neighbor])
                .map(|(a, b)| a + u * (b - a))
                .collect();
            out.features.push(x);
            out.labels.push(*class);
            out.synthetic.push(Synthetic { base, neighbor, u });
        }
    }
    Ok(out)
}
