//! Data-side statistical primitives: empirical cumulants, numerical
//! rank/nullspace with the shared thresholding rule, and the nonlinear
//! transform covariance systems behind the two-steps estimator.

pub mod hsic;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Result, TinError};
use crate::scm::Dataset;

/// Scalar transforms applied to standardized Z columns when building
/// covariance equation systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    Identity,
    Square,
    Cube,
    Abs,
    Exp,
    LogAbs,
    Sin,
    Cos,
    Sigmoid,
    Tanh,
}

impl Transform {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Transform::Identity => x,
            Transform::Square => x * x,
            Transform::Cube => x * x * x,
            Transform::Abs => x.abs(),
            Transform::Exp => x.exp(),
            Transform::LogAbs => x.abs().max(1e-12).ln(),
            Transform::Sin => x.sin(),
            Transform::Cos => x.cos(),
            Transform::Sigmoid => 1.0 / (1.0 + (-x).exp()),
            Transform::Tanh => x.tanh(),
        }
    }

    pub fn full_library() -> Vec<Transform> {
        vec![
            Transform::Identity,
            Transform::Square,
            Transform::Cube,
            Transform::Abs,
            Transform::Exp,
            Transform::LogAbs,
            Transform::Sin,
            Transform::Cos,
            Transform::Sigmoid,
            Transform::Tanh,
        ]
    }
}

/// Tuning knobs shared by the estimators and tests.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimatorParams {
    /// Significance level for independence tests.
    pub alpha: f64,
    /// RBF kernel width as a multiple of the per-column standard deviation.
    pub kernel_width_factor: f64,
    /// Relative tolerance of the numerical-rank threshold T = eps * max(S) * max(M, N).
    pub svd_eps: f64,
    /// Transform library for covariance equation systems.
    pub f_library: Vec<Transform>,
    /// Largest cumulant order used by the rank estimator.
    pub k_max: usize,
    /// Percentile (as percent) standing in for the "for all subsets" check.
    pub subset_hi_pct: f64,
    /// Percentile (as percent) standing in for the "exists a subset" check.
    pub subset_lo_pct: f64,
    /// Inputs larger than this are deterministically subsampled before HSIC.
    pub hsic_max_samples: usize,
    /// Use the seeded permutation null instead of the gamma approximation.
    pub hsic_permutation: bool,
    /// Statistic-ratio acceptance factor when the raw p-value route saturates.
    pub hsic_ratio_factor: f64,
    /// Magnitude below which a normalized omega coordinate counts as
    /// degenerated.
    pub degeneracy_tol: f64,
    pub isa_learning_rate: f64,
    pub isa_max_iter: usize,
    pub isa_tol: f64,
    pub seed: u64,
}

impl Default for EstimatorParams {
    fn default() -> Self {
        EstimatorParams {
            alpha: 0.05,
            kernel_width_factor: 0.5,
            svd_eps: 0.005,
            f_library: Transform::full_library(),
            k_max: 4,
            subset_hi_pct: 90.0,
            subset_lo_pct: 10.0,
            hsic_max_samples: 2000,
            hsic_permutation: false,
            hsic_ratio_factor: 0.5,
            degeneracy_tol: 1e-3,
            isa_learning_rate: 0.05,
            isa_max_iter: 500,
            isa_tol: 1e-4,
            seed: 0,
        }
    }
}

impl EstimatorParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(TinError::input("alpha must lie in (0, 1)"));
        }
        if !(self.svd_eps > 0.0) {
            return Err(TinError::input("svd_eps must be positive"));
        }
        if self.f_library.is_empty() {
            return Err(TinError::input("transform library must be nonempty"));
        }
        if self.k_max < 3 {
            return Err(TinError::input("k_max must be at least 3"));
        }
        Ok(())
    }
}

/// Count of singular values above T = eps * max(S) * max(M, N).
pub fn numerical_rank(m: &DMatrix<f64>, eps: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let svals = m.clone().singular_values();
    let smax = svals.max();
    if smax == 0.0 {
        return 0;
    }
    let t = eps * smax * m.nrows().max(m.ncols()) as f64;
    svals.iter().filter(|&&s| s > t).count()
}

/// Singular values (descending) and the full right-singular basis, also for
/// wide matrices (rows are zero-padded so V always has `ncols` columns).
pub fn svd_right(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let (rows, cols) = (m.nrows(), m.ncols());
    let work = if rows >= cols {
        m.clone()
    } else {
        let mut padded = DMatrix::<f64>::zeros(cols, cols);
        padded.view_mut((0, 0), (rows, cols)).copy_from(m);
        padded
    };
    let svd = work.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let mut pairs: Vec<(f64, DVector<f64>)> = svd
        .singular_values
        .iter()
        .enumerate()
        .map(|(k, &s)| (s, v_t.row(k).transpose()))
        .collect();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("singular values are finite"));
    let svals: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let mut v = DMatrix::<f64>::zeros(cols, cols);
    for (k, (_, col)) in pairs.iter().enumerate() {
        v.set_column(k, col);
    }
    (svals, v)
}

/// Orthonormal basis of the numerical nullspace under the shared threshold
/// rule; `m * basis ~ 0`.
pub fn nullspace(m: &DMatrix<f64>, eps: f64) -> DMatrix<f64> {
    let cols = m.ncols();
    if cols == 0 {
        return DMatrix::<f64>::zeros(0, 0);
    }
    if m.nrows() == 0 {
        return DMatrix::<f64>::identity(cols, cols);
    }
    let (svals, v) = svd_right(m);
    let smax = svals.first().copied().unwrap_or(0.0);
    let t = eps * smax * m.nrows().max(cols) as f64;
    let rank = svals.iter().filter(|&&s| s > t).count();
    v.columns(rank, cols - rank).into_owned()
}

/// Rank by Gaussian elimination with partial pivoting at a relative
/// tolerance. Used on the exact-weight oracle side where singular values are
/// well separated and full SVDs would dominate exhaustive sweeps.
pub fn rank_gauss(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let mut a = m.clone();
    let (rows, cols) = (a.nrows(), a.ncols());
    if rows == 0 || cols == 0 {
        return 0;
    }
    let scale = a.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if scale == 0.0 {
        return 0;
    }
    let tol = rel_tol * scale;
    let mut rank = 0;
    let mut row = 0;
    for col in 0..cols {
        let mut pivot = row;
        for r in row..rows {
            if a[(r, col)].abs() > a[(pivot, col)].abs() {
                pivot = r;
            }
        }
        if row >= rows || a[(pivot, col)].abs() <= tol {
            continue;
        }
        a.swap_rows(row, pivot);
        for r in (row + 1)..rows {
            let f = a[(r, col)] / a[(row, col)];
            if f != 0.0 {
                for c in col..cols {
                    a[(r, c)] -= f * a[(row, c)];
                }
            }
        }
        rank += 1;
        row += 1;
    }
    rank
}

fn centered_columns(data: &Dataset, cols: &[usize]) -> Result<Vec<Vec<f64>>> {
    let m = data.n_samples();
    cols.iter()
        .map(|&c| {
            if c >= data.n_vars() {
                return Err(TinError::input(format!("column {c} out of range")));
            }
            let mut v = data.column(c);
            let mean = v.iter().sum::<f64>() / m as f64;
            for x in &mut v {
                *x -= mean;
            }
            Ok(v)
        })
        .collect()
}

/// Sample cross-cumulant slice: entry (i, j) is cum(Z_i, ..., Z_i, Y_j) with
/// Z_i repeated k-1 times, computed from centered data by the zero-mean
/// partition formulas. Supported orders: 2, 3, 4.
pub fn empirical_cumulant_slice(
    data: &Dataset,
    z_cols: &[usize],
    y_cols: &[usize],
    k: usize,
) -> Result<DMatrix<f64>> {
    if !(2..=4).contains(&k) {
        return Err(TinError::input(format!(
            "empirical cumulants support orders 2..4, got {k}"
        )));
    }
    let m = data.n_samples() as f64;
    let zs = centered_columns(data, z_cols)?;
    let ys = centered_columns(data, y_cols)?;
    let mut out = DMatrix::<f64>::zeros(z_cols.len(), y_cols.len());
    for (zi, z) in zs.iter().enumerate() {
        for (yj, y) in ys.iter().enumerate() {
            let e = |f: &dyn Fn(f64, f64) -> f64| -> f64 {
                z.iter().zip(y).map(|(&a, &b)| f(a, b)).sum::<f64>() / m
            };
            out[(zi, yj)] = match k {
                2 => e(&|a, b| a * b),
                3 => e(&|a, b| a * a * b),
                4 => {
                    let m31 = e(&|a, b| a * a * a * b);
                    let var_z = z.iter().map(|a| a * a).sum::<f64>() / m;
                    let cov = e(&|a, b| a * b);
                    m31 - 3.0 * var_z * cov
                }
                _ => unreachable!(),
            };
        }
    }
    Ok(out)
}

/// Vertical stack of cumulant slices for orders 2..=k.
pub fn stacked_cumulants(
    data: &Dataset,
    z_cols: &[usize],
    y_cols: &[usize],
    k: usize,
) -> Result<DMatrix<f64>> {
    if k < 2 {
        return Err(TinError::input("stacked cumulants need k >= 2"));
    }
    let slices: Vec<DMatrix<f64>> = (2..=k)
        .map(|order| empirical_cumulant_slice(data, z_cols, y_cols, order))
        .collect::<Result<_>>()?;
    Ok(vstack(&slices))
}

pub fn vstack(blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
    let cols = blocks.first().map_or(0, |b| b.ncols());
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::<f64>::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        out.view_mut((at, 0), (b.nrows(), cols)).copy_from(b);
        at += b.nrows();
    }
    out
}

/// Stacked covariance system of transformed Z against raw Y: one
/// |Z| x |Y| block cov(f(Z), Y) per transform, with f applied elementwise to
/// standardized Z columns.
pub fn transformed_cov_system(
    data: &Dataset,
    z_cols: &[usize],
    y_cols: &[usize],
    f_library: &[Transform],
) -> Result<DMatrix<f64>> {
    if f_library.is_empty() {
        return Err(TinError::input("transform library must be nonempty"));
    }
    let m = data.n_samples() as f64;
    let mut zs = centered_columns(data, z_cols)?;
    for z in &mut zs {
        let sd = crate::scm::variance(z).sqrt();
        if sd > 0.0 {
            for x in z.iter_mut() {
                *x /= sd;
            }
        }
    }
    let ys = centered_columns(data, y_cols)?;
    let mut blocks = Vec::with_capacity(f_library.len());
    for &f in f_library {
        let mut block = DMatrix::<f64>::zeros(z_cols.len(), y_cols.len());
        for (zi, z) in zs.iter().enumerate() {
            let mut fz: Vec<f64> = z.iter().map(|&x| f.apply(x)).collect();
            let mean = fz.iter().sum::<f64>() / m;
            for x in &mut fz {
                *x -= mean;
            }
            for (yj, y) in ys.iter().enumerate() {
                block[(zi, yj)] = fz.iter().zip(y).map(|(&a, &b)| a * b).sum::<f64>() / m;
            }
        }
        blocks.push(block);
    }
    Ok(vstack(&blocks))
}

/// Percentile of `values` (percent in [0, 100]) by the nearest-rank rule.
pub fn percentile(values: &[f64], pct: f64) -> f64 {
    assert!(!values.is_empty());
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let rank = ((pct / 100.0) * v.len() as f64).ceil() as usize;
    v[rank.clamp(1, v.len()) - 1]
}
