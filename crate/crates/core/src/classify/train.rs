use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::metrics::evaluate_labels;
use super::smote::{smote, DEFAULT_K_NEIGHBORS};
use super::svm::{self, Kernel};
use crate::error::{Error, Result};
use crate::par::Parallelism;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub c: f64,
    pub kernel: Kernel,
}

/// C ∈ {0.1, 1, 10, 100} × {linear, rbf γ ∈ {0.01, 0.1, 1}}; the linear
/// kernel ignores γ, so it appears once per C (16 cells).
pub fn default_grid() -> Vec<GridCell> {
    let kernels = [
        Kernel::Linear,
        Kernel::Rbf { gamma: 0.01 },
        Kernel::Rbf { gamma: 0.1 },
        Kernel::Rbf { gamma: 1.0 },
    ];
    [0.1, 1.0, 10.0, 100.0]
        .iter()
        .flat_map(|&c| kernels.iter().map(move |&kernel| GridCell { c, kernel }))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub grid: Vec<GridCell>,
    pub folds: usize,
    pub test_fraction: f64,
    pub k_neighbors: usize,
    pub tolerance: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            grid: default_grid(),
            folds: 10,
            test_fraction: 0.2,
            k_neighbors: DEFAULT_K_NEIGHBORS,
            tolerance: svm::TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainManifest {
    pub config: TrainConfig,
    pub seed: u64,
    pub train_size: usize,
    pub test_size: usize,
}

/// One-vs-rest machine for `class`: f(x) = Σ coef_i K(sv_i, x) − rho, where
/// `coef` is indexed like the model's support vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryMachine {
    pub class: u8,
    pub coef: Vec<f64>,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub kernel: Kernel,
    pub c: f64,
    pub classes: Vec<u8>,
    pub support_vectors: Vec<Vec<f64>>,
    pub machines: Vec<BinaryMachine>,
    pub manifest: Option<TrainManifest>,
}

impl SvmModel {
    /// One-vs-rest fit on the full sample set.
    pub fn fit(
        features: &[Vec<f64>],
        labels: &[u8],
        kernel: Kernel,
        c: f64,
        tol: f64,
    ) -> Result<Self> {
        let classes = class_list(labels)?;
        let gram = kernel.gram(features);
        let solved = fit_ovr(&gram, labels, &classes, c, tol);
        let used: Vec<usize> = (0..features.len())
            .filter(|&i| solved.iter().any(|(coef, _)| coef[i] != 0.0))
            .collect();
        Ok(SvmModel {
            kernel,
            c,
            support_vectors: used.iter().map(|&i| features[i].clone()).collect(),
            machines: classes
                .iter()
                .zip(&solved)
                .map(|(&class, (coef, rho))| BinaryMachine {
                    class,
                    coef: used.iter().map(|&i| coef[i]).collect(),
                    rho: *rho,
                })
                .collect(),
            classes,
            manifest: None,
        })
    }

    pub fn decision_values(&self, x: &[f64]) -> Vec<f64> {
        let k: Vec<f64> = self
            .support_vectors
            .iter()
            .map(|sv| self.kernel.eval(sv, x))
            .collect();
        self.machines
            .iter()
            .map(|m| m.coef.iter().zip(&k).map(|(a, b)| a * b).sum::<f64>() - m.rho)
            .collect()
    }

    /// Argmax of the decision values; ties go to the lower class.
    pub fn predict(&self, x: &[f64]) -> u8 {
        argmax_class(&self.classes, &self.decision_values(x))
    }
}

fn argmax_class(classes: &[u8], values: &[f64]) -> u8 {
    let mut best = 0;
    for i in 1..values.len() {
        if values[i] > values[best] {
            best = i;
        }
    }
    classes[best]
}

fn class_list(labels: &[u8]) -> Result<Vec<u8>> {
    let classes: Vec<u8> = labels
        .iter()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if classes.len() < 2 {
        return Err(Error::InsufficientSamples(format!(
            "need at least two classes, got {}",
            classes.len()
        )));
    }
    Ok(classes)
}

/// Per class: full-length coefficient vector α·y and ρ.
fn fit_ovr(
    gram: &[Vec<f64>],
    labels: &[u8],
    classes: &[u8],
    c: f64,
    tol: f64,
) -> Vec<(Vec<f64>, f64)> {
    classes
        .iter()
        .map(|&class| {
            let y: Vec<f64> = labels
                .iter()
                .map(|l| if *l == class { 1.0 } else { -1.0 })
                .collect();
            let s = svm::solve(gram, &y, c, tol);
            (s.alpha.iter().zip(&y).map(|(a, y)| a * y).collect(), s.rho)
        })
        .collect()
}

fn predict_from_cross(cross: &[f64], classes: &[u8], solved: &[(Vec<f64>, f64)]) -> u8 {
    let values: Vec<f64> = solved
        .iter()
        .map(|(coef, rho)| coef.iter().zip(cross).map(|(a, k)| a * k).sum::<f64>() - rho)
        .collect();
    argmax_class(classes, &values)
}

fn by_class(labels: &[u8]) -> BTreeMap<u8, Vec<usize>> {
    let mut m: BTreeMap<u8, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        m.entry(*l).or_default().push(i);
    }
    m
}

/// Seeded stratified split. Each class sends round(fraction · n) of its
/// members to the test side, leaving at least one on each side when it has
/// two or more. Both index lists are ascending.
pub fn stratified_split(labels: &[u8], test_fraction: f64, seed_: u64) -> (Vec<usize>, Vec<usize>) {
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (class, mut members) in by_class(labels) {
        members.shuffle(&mut seed::rng_for(
            seed_,
            &[seed::tag("split"), u64::from(class)],
        ));
        let n = members.len();
        let mut n_test = (test_fraction * n as f64).round() as usize;
        if n >= 2 {
            n_test = n_test.clamp(1, n - 1);
        }
        test.extend_from_slice(&members[..n_test.min(n)]);
        train.extend_from_slice(&members[n_test.min(n)..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

/// Fold id per sample. Members of each class are shuffled and dealt
/// round-robin, continuing where the previous class stopped so fold sizes
/// stay balanced.
pub fn stratified_folds(labels: &[u8], folds: usize, seed_: u64) -> Vec<usize> {
    let mut out = vec![0; labels.len()];
    let mut next = 0;
    for (class, mut members) in by_class(labels) {
        members.shuffle(&mut seed::rng_for(
            seed_,
            &[seed::tag("folds"), u64::from(class)],
        ));
        for i in members {
            out[i] = next % folds;
            next += 1;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvScore {
    pub cell: GridCell,
    pub mean_f1: f64,
    pub fold_f1: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub model: SvmModel,
    pub cv: Vec<CvScore>,
    /// Index into `cv` of the chosen cell.
    pub chosen: usize,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

struct Fold {
    features: Vec<Vec<f64>>,
    labels: Vec<u8>,
    validation: Vec<usize>,
}

/// Stratified split, then per grid cell a stratified k-fold CV macro-F1 on the
/// training originals (SMOTE applied to each fold's training part only), then
/// a refit of the best cell on the SMOTE-balanced training portion.
pub fn train_svm(
    features: &[Vec<f64>],
    labels: &[u8],
    cfg: &TrainConfig,
    seed_: u64,
    par: Parallelism,
) -> Result<TrainOutcome> {
    if features.len() != labels.len() {
        return Err(Error::Invalid(format!(
            "{} feature rows for {} labels",
            features.len(),
            labels.len()
        )));
    }
    if cfg.grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if cfg.folds < 2 {
        return Err(Error::Config(format!(
            "folds must be at least 2, got {}",
            cfg.folds
        )));
    }
    class_list(labels)?;
    let (train_idx, test_idx) = stratified_split(labels, cfg.test_fraction, seed_);
    let x_train: Vec<Vec<f64>> = train_idx.iter().map(|&i| features[i].clone()).collect();
    let y_train: Vec<u8> = train_idx.iter().map(|&i| labels[i]).collect();
    for (class, members) in by_class(&y_train) {
        // every fold's training part must keep two members for SMOTE
        if members.len() < 3 {
            return Err(Error::InsufficientSamples(format!(
                "class {class} has {} training samples, need at least 3",
                members.len()
            )));
        }
    }
    let classes = class_list(&y_train)?;
    let fold_of = stratified_folds(&y_train, cfg.folds, seed_);

    let folds: Vec<Fold> = par
        .map_range(cfg.folds, |f| {
            let (tr, va): (Vec<usize>, Vec<usize>) =
                (0..y_train.len()).partition(|&i| fold_of[i] != f);
            let xs: Vec<Vec<f64>> = tr.iter().map(|&i| x_train[i].clone()).collect();
            let ys: Vec<u8> = tr.iter().map(|&i| y_train[i]).collect();
            let bal = smote(
                &xs,
                &ys,
                cfg.k_neighbors,
                seed::derive(seed_, &[seed::tag("cv-smote"), f as u64]),
            )?;
            Ok(Fold {
                features: bal.features,
                labels: bal.labels,
                validation: va,
            })
        })
        .into_iter()
        .collect::<Result<_>>()?;

    let mut kernels: Vec<Kernel> = Vec::new();
    for cell in &cfg.grid {
        if !kernels.contains(&cell.kernel) {
            kernels.push(cell.kernel);
        }
    }
    // (fold, kernel) → training Gram matrix and validation cross-kernel rows
    let pairs: Vec<(usize, usize)> = (0..folds.len())
        .flat_map(|f| (0..kernels.len()).map(move |k| (f, k)))
        .collect();
    let grams: Vec<(Vec<Vec<f64>>, Vec<Vec<f64>>)> = par.map(&pairs, |&(f, k)| {
        let xs = &folds[f].features;
        let kernel = kernels[k];
        let cross = folds[f]
            .validation
            .iter()
            .map(|&i| xs.iter().map(|s| kernel.eval(s, &x_train[i])).collect())
            .collect();
        (kernel.gram(xs), cross)
    });

    let cv: Vec<CvScore> = par.map(&cfg.grid, |cell| {
        let k = kernels
            .iter()
            .position(|k| *k == cell.kernel)
            .expect("collected");
        let fold_f1: Vec<f64> = folds
            .iter()
            .enumerate()
            .map(|(f, fold)| {
                let (gram, cross) = &grams[f * kernels.len() + k];
                let solved = fit_ovr(gram, &fold.labels, &classes, cell.c, cfg.tolerance);
                let truth: Vec<u8> = fold.validation.iter().map(|&i| y_train[i]).collect();
                let pred: Vec<u8> = cross
                    .iter()
                    .map(|row| predict_from_cross(row, &classes, &solved))
                    .collect();
                let present: Vec<u8> = truth
                    .iter()
                    .chain(&pred)
                    .copied()
                    .collect::<BTreeSet<_>>()
                    .into_iter()
                    .collect();
                evaluate_labels(&truth, &pred, &present).macro_f1
            })
            .collect();
        CvScore {
            cell: *cell,
            mean_f1: fold_f1.iter().sum::<f64>() / fold_f1.len() as f64,
            fold_f1,
        }
    });
    let mut chosen = 0;
    for (i, s) in cv.iter().enumerate() {
        if s.mean_f1 > cv[chosen].mean_f1 {
            chosen = i;
        }
    }

    let bal = smote(
        &x_train,
        &y_train,
        cfg.k_neighbors,
        seed::derive(seed_, &[seed::tag("smote")]),
    )?;
    let cell = cv[chosen].cell;
    let mut model = SvmModel::fit(
        &bal.features,
        &bal.labels,
        cell.kernel,
        cell.c,
        cfg.tolerance,
    )?;
    model.manifest = Some(TrainManifest {
        config: cfg.clone(),
        seed: seed_,
        train_size: train_idx.len(),
        test_size: test_idx.len(),
    });
    Ok(TrainOutcome {
        model,
        cv,
        chosen,
        train_indices: train_idx,
        test_indices: test_idx,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn blobs(
        seed_: u64,
        per: usize,
        centers: &[[f64; 2]],
        spread: f64,
    ) -> (Vec<Vec<f64>>, Vec<u8>) {
        let mut rng = seed::rng(seed_);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..per * centers.len() {
            let c = i % centers.len();
            x.push(vec![
                centers[c][0] + rng.random_range(-spread..spread),
                centers[c][1] + rng.random_range(-spread..spread),
            ]);
            y.push(c as u8 + 1);
        }
        (x, y)
    }

    #[test]
    fn grid_has_sixteen_distinct_cells() {
        let g = default_grid();
        assert_eq!(g.len(), 16);
        for (i, a) in g.iter().enumerate() {
            assert!(g[i + 1..].iter().all(|b| b != a));
        }
        assert_eq!(g.iter().filter(|c| c.kernel == Kernel::Linear).count(), 4);
    }

    #[test]
    fn separable_two_class_linear_is_exact_on_training() {
        let (x, y) = blobs(1, 25, &[[-2.0, 0.0], [2.0, 0.0]], 1.0);
        let m = SvmModel::fit(&x, &y, Kernel::Linear, 10.0, svm::TOLERANCE).unwrap();
        assert!(x.iter().zip(&y).all(|(x, y)| m.predict(x) == *y));
    }

    #[test]
    fn permutation_leaves_decisions_unchanged() {
        let (x, y) = blobs(2, 15, &[[0.0, 0.0], [1.5, 0.0], [0.0, 1.5]], 1.0);
        let mut order: Vec<usize> = (0..x.len()).collect();
        order.shuffle(&mut seed::rng(5));
        let xp: Vec<Vec<f64>> = order.iter().map(|&i| x[i].clone()).collect();
        let yp: Vec<u8> = order.iter().map(|&i| y[i]).collect();
        for kernel in [Kernel::Linear, Kernel::Rbf { gamma: 0.5 }] {
            let a = SvmModel::fit(&x, &y, kernel, 1.0, 1e-9).unwrap();
            let b = SvmModel::fit(&xp, &yp, kernel, 1.0, 1e-9).unwrap();
            for p in &x {
                for (u, v) in a.decision_values(p).iter().zip(b.decision_values(p)) {
                    assert!((u - v).abs() < 1e-6, "{u} vs {v}");
                }
            }
        }
    }

    #[test]
    fn split_and_folds_are_stratified() {
        let y: Vec<u8> = (0..100).map(|i| if i < 70 { 1 } else { 2 }).collect();
        let (tr, te) = stratified_split(&y, 0.2, 3);
        assert_eq!(te.iter().filter(|&&i| y[i] == 1).count(), 14);
        assert_eq!(te.iter().filter(|&&i| y[i] == 2).count(), 6);
        assert_eq!(tr.len() + te.len(), 100);
        let folds = stratified_folds(&y, 10, 3);
        for f in 0..10 {
            let n1 = (0..100).filter(|&i| folds[i] == f && y[i] == 1).count();
            assert_eq!(n1, 7);
        }
    }

    #[test]
    fn training_is_deterministic_and_picks_the_grid_max() {
        let (x, y) = blobs(4, 20, &[[0.0, 0.0], [3.0, 0.0], [0.0, 3.0]], 1.2);
        let cfg = TrainConfig {
            folds: 5,
            ..Default::default()
        };
        let a = train_svm(&x, &y, &cfg, 7, Parallelism::Sequential).unwrap();
        let b = train_svm(&x, &y, &cfg, 7, Parallelism::Rayon).unwrap();
        assert_eq!(a.model, b.model);
        assert_eq!(a.cv, b.cv);
        let best = a.cv[a.chosen].mean_f1;
        assert!(a.cv.iter().all(|s| s.mean_f1 <= best));
        assert!(a.cv[..a.chosen].iter().all(|s| s.mean_f1 < best));
        let truth: Vec<u8> = a.test_indices.iter().map(|&i| y[i]).collect();
        let pred: Vec<u8> = a
            .test_indices
            .iter()
            .map(|&i| a.model.predict(&x[i]))
            .collect();
        assert!(evaluate_labels(&truth, &pred, &[1, 2, 3]).macro_f1 > 0.8);
    }

    #[test]
    fn too_few_samples_and_ties() {
        let x: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64]).collect();
        let err = train_svm(
            &x,
            &[1, 1, 1, 1, 1, 2],
            &TrainConfig::default(),
            0,
            Parallelism::Sequential,
        )
        .unwrap_err();
        assert!(matches!(err, Error::InsufficientSamples(_)));
        assert_eq!(argmax_class(&[2, 5, 7], &[0.5, 0.5, 0.1]), 2);
    }
}
