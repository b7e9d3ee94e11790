//! Single-response partial least squares (NIPALS) with k-fold
//! cross-validation.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::TrajectoryMatrix;

/// Columns whose sample standard deviation falls below this are dropped.
const MIN_SCALE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlsModel {
    pub n_components: usize,
    pub num_features: usize,
    /// Input columns used by the model, ascending.
    pub kept_columns: Vec<usize>,
    pub x_means: Vec<f64>,
    pub x_scales: Vec<f64>,
    pub y_mean: f64,
    pub weights: Vec<Vec<f64>>,
    pub loadings: Vec<Vec<f64>>,
    pub y_loadings: Vec<f64>,
    /// Regression vector on the standardized kept columns.
    pub coefficients: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalMetrics {
    pub rmse: f64,
    pub r2: f64,
}

fn column_stats(x: &[Vec<f64>], j: usize) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().map(|r| r[j]).sum::<f64>() / n;
    let var = x.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Fits `n_components` latent components on standardized features
/// (mean 0, unit sample variance) and a centered target.
pub fn pls_fit(data: &TrajectoryMatrix, n_components: usize) -> Result<PlsModel> {
    data.validate()?;
    let y = data.targets.as_ref().ok_or_else(|| Error::input("regression needs a target column"))?;
    let n = data.num_samples();
    let p = data.num_features();
    if n < 2 {
        return Err(Error::input(format!("need at least 2 samples, got {n}")));
    }
    let mut kept_columns = Vec::new();
    let mut x_means = Vec::new();
    let mut x_scales = Vec::new();
    for j in 0..p {
        let (mean, sd) = column_stats(&data.features, j);
        if sd <= MIN_SCALE * (1.0 + mean.abs()) {
            log::warn!("dropping constant feature column {j} (t={})", data.times[j]);
            continue;
        }
        kept_columns.push(j);
        x_means.push(mean);
        x_scales.push(sd);
    }
    let m = kept_columns.len();
    let limit = m.min(n - 1);
    if n_components == 0 || n_components > limit {
        return Err(Error::config(format!(
            "n_components must lie in 1..={limit} ({n} samples, {m} usable features), got {n_components}"
        )));
    }
    let mut xr = DMatrix::from_fn(n, m, |i, k| (data.features[i][kept_columns[k]] - x_means[k]) / x_scales[k]);
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let mut yr = DVector::from_iterator(n, y.iter().map(|v| v - y_mean));

    let mut w_mat = DMatrix::<f64>::zeros(m, n_components);
    let mut p_mat = DMatrix::<f64>::zeros(m, n_components);
    let mut q_vec = DVector::<f64>::zeros(n_components);
    let mut used = 0;
    for a in 0..n_components {
        let mut w = xr.tr_mul(&yr);
        let norm = w.norm();
        if norm < 1e-14 {
            // target fully explained; further components add nothing
            break;
        }
        w /= norm;
        let t = &xr * &w;
        let tt = t.dot(&t);
        let pl = xr.tr_mul(&t) / tt;
        let q = yr.dot(&t) / tt;
        xr -= &t * pl.transpose();
        yr -= &t * q;
        w_mat.set_column(a, &w);
        p_mat.set_column(a, &pl);
        q_vec[a] = q;
        used += 1;
    }
    let w_mat = w_mat.columns(0, used).into_owned();
    let p_mat = p_mat.columns(0, used).into_owned();
    let q_vec = q_vec.rows(0, used).into_owned();
    let coefficients = if used == 0 {
        DVector::zeros(m)
    } else {
        let ptw = p_mat.tr_mul(&w_mat);
        let inv = ptw.try_inverse().ok_or_else(|| Error::input("singular loading matrix"))?;
        &w_mat * (inv * &q_vec)
    };
    let cols = |mat: &DMatrix<f64>| mat.column_iter().map(|c| c.iter().copied().collect()).collect();
    Ok(PlsModel {
        n_components,
        num_features: p,
        kept_columns,
        x_means,
        x_scales,
        y_mean,
        weights: cols(&w_mat),
        loadings: cols(&p_mat),
        y_loadings: q_vec.iter().copied().collect(),
        coefficients: coefficients.iter().copied().collect(),
    })
}

pub fn pls_predict(model: &PlsModel, features: &[Vec<f64>]) -> Result<Vec<f64>> {
    features
        .iter()
        .enumerate()
        .map(|(i, row)| {
            if row.len() != model.num_features {
                return Err(Error::input(format!("row {i} has {} features, model expects {}", row.len(), model.num_features)));
            }
            let mut y = model.y_mean;
            for (k, &j) in model.kept_columns.iter().enumerate() {
                y += model.coefficients[k] * (row[j] - model.x_means[k]) / model.x_scales[k];
            }
            Ok(y)
        })
        .collect()
}

/// RMSE and `1 - SS_res / SS_tot` (about the mean of `truth`).
pub fn evaluate(truth: &[f64], pred: &[f64]) -> EvalMetrics {
    let n = truth.len() as f64;
    let mean = truth.iter().sum::<f64>() / n;
    let ss_res: f64 = truth.iter().zip(pred).map(|(a, b)| (a - b).powi(2)).sum();
    let ss_tot: f64 = truth.iter().map(|a| (a - mean).powi(2)).sum();
    let r2 = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res == 0.0 {
        1.0
    } else {
        0.0
    };
    EvalMetrics { rmse: (ss_res / n).sqrt(), r2 }
}

/// Seeded fold labels: a shuffled permutation dealt round-robin.
pub fn fold_assignment(samples: usize, k_folds: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..samples).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut fold = vec![0; samples];
    for (pos, &i) in order.iter().enumerate() {
        fold[i] = pos % k_folds;
    }
    fold
}

/// Mean held-out RMSE and R² over `k_folds` folds.
pub fn cross_validate(data: &TrajectoryMatrix, n_components: usize, k_folds: usize, seed: u64) -> Result<EvalMetrics> {
    let n = data.num_samples();
    if k_folds < 2 || k_folds > n {
        return Err(Error::config(format!("k_folds must lie in 2..={n}, got {k_folds}")));
    }
    let y = data.targets.as_ref().ok_or_else(|| Error::input("regression needs a target column"))?;
    let fold = fold_assignment(n, k_folds, seed);
    let per_fold = (0..k_folds)
        .into_par_iter()
        .map(|f| {
            let train: Vec<usize> = (0..n).filter(|&i| fold[i] != f).collect();
            let test: Vec<usize> = (0..n).filter(|&i| fold[i] == f).collect();
            let model = pls_fit(&data.subset(&train), n_components)?;
            let x: Vec<Vec<f64>> = test.iter().map(|&i| data.features[i].clone()).collect();
            let truth: Vec<f64> = test.iter().map(|&i| y[i]).collect();
            Ok(evaluate(&truth, &pls_predict(&model, &x)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let k = k_folds as f64;
    Ok(EvalMetrics {
        rmse: per_fold.iter().map(|m| m.rmse).sum::<f64>() / k,
        r2: per_fold.iter().map(|m| m.r2).sum::<f64>() / k,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComponentScore {
    pub n_components: usize,
    pub rmse: f64,
    pub r2: f64,
}

/// Cross-validated scores for `1..=max_components` (skipping counts the
/// training folds cannot support) and the index of the lowest RMSE.
pub fn component_sweep(
    data: &TrajectoryMatrix,
    max_components: usize,
    k_folds: usize,
    seed: u64,
) -> Result<(Vec<ComponentScore>, usize)> {
    let mut rows = Vec::new();
    for a in 1..=max_components {
        match cross_validate(data, a, k_folds, seed) {
            Ok(m) => rows.push(ComponentScore { n_components: a, rmse: m.rmse, r2: m.r2 }),
            Err(Error::InvalidConfig(_)) if a > 1 => break,
            Err(e) => return Err(e),
        }
    }
    let best = rows
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.rmse.total_cmp(&b.1.rmse))
        .map(|(i, _)| i)
        .expect("at least one component count");
    Ok((rows, best))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{linear_dataset, planted_factor_dataset, random_target_dataset};
    use hamforge_oracle::least_squares;
    use proptest::prelude::*;

    fn matrix(x: Vec<Vec<f64>>, y: Vec<f64>) -> TrajectoryMatrix {
        let ids = (0..x.len()).map(|i| format!("m{i}")).collect();
        let times = (0..x[0].len()).map(|j| j as f64).collect();
        TrajectoryMatrix::new(ids, times, x, Some(y)).unwrap()
    }

    #[test]
    fn rank_one_exact() {
        let x: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64 * 0.7 - 1.0]).collect();
        let y: Vec<f64> = x.iter().map(|r| 2.0 * r[0]).collect();
        let m = pls_fit(&matrix(x.clone(), y.clone()), 1).unwrap();
        for (p, t) in pls_predict(&m, &x).unwrap().iter().zip(&y) {
            assert!((p - t).abs() < 1e-10);
        }
    }

    #[test]
    fn full_rank_matches_least_squares() {
        let d = linear_dataset(40, 6, 6, 0.0, 3);
        let m = pls_fit(&d, 6).unwrap();
        let pred = pls_predict(&m, &d.features).unwrap();
        let y = d.targets.clone().unwrap();
        assert!((evaluate(&y, &pred).r2 - 1.0).abs() < 1e-8);
        // ordinary least squares with an intercept column
        let xa: Vec<Vec<f64>> = d.features.iter().map(|r| std::iter::once(1.0).chain(r.iter().copied()).collect()).collect();
        let beta = least_squares(&xa, &y);
        for (row, p) in xa.iter().zip(&pred) {
            let ols: f64 = row.iter().zip(&beta).map(|(a, b)| a * b).sum();
            assert!((ols - p).abs() < 1e-6);
        }
    }

    #[test]
    fn noisy_full_rank_matches_least_squares() {
        let d = linear_dataset(30, 4, 4, 0.3, 8);
        let y = d.targets.clone().unwrap();
        let pred = pls_predict(&pls_fit(&d, 4).unwrap(), &d.features).unwrap();
        let xa: Vec<Vec<f64>> = d.features.iter().map(|r| std::iter::once(1.0).chain(r.iter().copied()).collect()).collect();
        let beta = least_squares(&xa, &y);
        for (row, p) in xa.iter().zip(&pred) {
            let ols: f64 = row.iter().zip(&beta).map(|(a, b)| a * b).sum();
            assert!((ols - p).abs() < 1e-6);
        }
    }

    #[test]
    fn constant_column_is_dropped() {
        let x: Vec<Vec<f64>> = (0..8).map(|i| vec![1.0, i as f64, (i * i) as f64]).collect();
        let y: Vec<f64> = x.iter().map(|r| r[1] - 0.5 * r[2]).collect();
        let m = pls_fit(&matrix(x.clone(), y.clone()), 2).unwrap();
        assert_eq!(m.kept_columns, vec![1, 2]);
        let r2 = evaluate(&y, &pls_predict(&m, &x).unwrap()).r2;
        assert!((r2 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn rejects_bad_component_counts_and_folds() {
        let d = linear_dataset(5, 3, 3, 0.0, 1);
        assert!(pls_fit(&d, 0).is_err());
        assert!(pls_fit(&d, 4).is_err());
        assert!(cross_validate(&d, 1, 6, 0).is_err());
        let no_target = TrajectoryMatrix { targets: None, ..d };
        assert!(pls_fit(&no_target, 1).is_err());
    }

    #[test]
    fn cv_on_linear_data_is_perfect() {
        let d = linear_dataset(40, 5, 5, 0.0, 11);
        let m = cross_validate(&d, 5, 5, 0).unwrap();
        assert!(m.rmse < 1e-6 && (m.r2 - 1.0).abs() < 1e-6, "{m:?}");
    }

    #[test]
    fn planted_factors_prefer_two_components() {
        let d = planted_factor_dataset(60, 12, 0.05, 4);
        let one = cross_validate(&d, 1, 5, 0).unwrap();
        let two = cross_validate(&d, 2, 5, 0).unwrap();
        assert!(two.rmse <= one.rmse, "{one:?} {two:?}");
    }

    #[test]
    fn random_targets_do_not_generalise() {
        let d = random_target_dataset(50, 10, 2);
        let m = cross_validate(&d, 2, 5, 0).unwrap();
        assert!(m.r2 <= 0.2, "{m:?}");
    }

    #[test]
    fn folds_are_seeded_and_balanced() {
        let a = fold_assignment(23, 5, 7);
        assert_eq!(a, fold_assignment(23, 5, 7));
        assert_ne!(a, fold_assignment(23, 5, 8));
        for f in 0..5 {
            let c = a.iter().filter(|&&x| x == f).count();
            assert!(c == 4 || c == 5);
        }
    }

    proptest! {
        #[test]
        fn scaling_a_column_leaves_predictions_unchanged(seed in 0u64..200, col in 0usize..4, s in 0.01f64..100.0) {
            let d = linear_dataset(20, 4, 3, 0.1, seed);
            let mut scaled = d.clone();
            for r in scaled.features.iter_mut() {
                r[col] *= s;
            }
            let a = pls_predict(&pls_fit(&d, 2).unwrap(), &d.features).unwrap();
            let b = pls_predict(&pls_fit(&scaled, 2).unwrap(), &scaled.features).unwrap();
            for (u, v) in a.iter().zip(&b) {
                prop_assert!((u - v).abs() < 1e-8);
            }
        }
    }
}
