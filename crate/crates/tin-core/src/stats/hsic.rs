//! HSIC independence test with an RBF product kernel and a gamma null
//! approximation, plus a seeded permutation fallback.
//!
//! Kernel widths follow the per-column rule width = factor * std; constant
//! columns fall back to width one. Inputs beyond `hsic_max_samples` rows are
//! deterministically subsampled with an even stride, since the kernel cost is
//! quadratic.

use nalgebra::DMatrix;
use statrs::distribution::{ContinuousCDF, Gamma};

use crate::error::{Result, TinError};
use crate::scm::seeded;
use crate::stats::EstimatorParams;
use rand::Rng;

#[derive(Debug, Clone, Copy)]
pub struct HsicOutcome {
    pub statistic: f64,
    pub p_value: f64,
}

/// Evenly-strided row subsample; identity when m <= target.
fn subsample_rows(data: &DMatrix<f64>, target: usize) -> DMatrix<f64> {
    let m = data.nrows();
    if m <= target {
        return data.clone();
    }
    let rows: Vec<usize> = (0..target).map(|i| i * m / target).collect();
    DMatrix::from_fn(target, data.ncols(), |r, c| data[(rows[r], c)])
}

fn column_widths(data: &DMatrix<f64>, factor: f64) -> Vec<f64> {
    (0..data.ncols())
        .map(|c| {
            let col: Vec<f64> = data.column(c).iter().copied().collect();
            let sd = crate::scm::variance(&col).sqrt();
            if sd > 0.0 {
                factor * sd
            } else {
                1.0
            }
        })
        .collect()
}

/// Product-RBF Gram matrix: K[i,j] = exp(-sum_c (x_ic - x_jc)^2 / (2 w_c^2)).
fn gram(data: &DMatrix<f64>, widths: &[f64]) -> DMatrix<f64> {
    let m = data.nrows();
    let d = data.ncols();
    let mut k = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        k[(i, i)] = 1.0;
        for j in 0..i {
            let mut q = 0.0;
            for c in 0..d {
                let diff = data[(i, c)] - data[(j, c)];
                q += diff * diff / (2.0 * widths[c] * widths[c]);
            }
            let v = (-q).exp();
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

fn center(k: &DMatrix<f64>) -> DMatrix<f64> {
    let m = k.nrows();
    let row_means: Vec<f64> = (0..m).map(|i| k.row(i).sum() / m as f64).collect();
    let total = row_means.iter().sum::<f64>() / m as f64;
    DMatrix::from_fn(m, m, |i, j| k[(i, j)] - row_means[i] - row_means[j] + total)
}

/// Precomputed side of a repeated HSIC test against a fixed conditioning
/// input (the Gram matrix of Z is reused across every omega probe).
pub struct HsicTester {
    kc: DMatrix<f64>,
    mu_x: f64,
    m: usize,
    factor: f64,
    alpha: f64,
    max_samples: usize,
    permutation: Option<u64>,
}

impl HsicTester {
    pub fn new(z: &DMatrix<f64>, params: &EstimatorParams) -> Result<Self> {
        if z.nrows() < 20 {
            return Err(TinError::input("HSIC requires at least 20 samples"));
        }
        let zs = subsample_rows(z, params.hsic_max_samples);
        let m = zs.nrows();
        let k = gram(&zs, &column_widths(&zs, params.kernel_width_factor));
        let mu_x = (k.sum() - m as f64) / (m as f64 * (m - 1) as f64);
        Ok(HsicTester {
            kc: center(&k),
            mu_x,
            m,
            factor: params.kernel_width_factor,
            alpha: params.alpha,
            max_samples: params.hsic_max_samples,
            permutation: params.hsic_permutation.then_some(params.seed),
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Tests the (already aligned) other side; `v` must have the same number
    /// of rows as the original input before subsampling.
    pub fn test(&self, v: &DMatrix<f64>) -> HsicOutcome {
        let vs = subsample_rows(v, self.max_samples);
        assert_eq!(vs.nrows(), self.m, "sample count mismatch in HSIC");
        let l = gram(&vs, &column_widths(&vs, self.factor));
        let lc = center(&l);
        let m = self.m as f64;

        let test_stat = self.kc.zip_fold(&lc, 0.0, |acc, a, b| acc + a * b) / m;

        if let Some(seed) = self.permutation {
            return self.permutation_p(&lc, test_stat, seed);
        }

        // Gamma moments of the null distribution of m * HSIC_b.
        let mu_y = (l.sum() - m) / (m * (m - 1.0));
        let m_hsic = (1.0 + self.mu_x * mu_y - self.mu_x - mu_y) / m;
        let mut var_hsic = 0.0;
        for i in 0..self.m {
            for j in 0..self.m {
                if i != j {
                    let x = self.kc[(i, j)] * lc[(i, j)] / 6.0;
                    var_hsic += x * x;
                }
            }
        }
        var_hsic /= m * (m - 1.0);
        var_hsic *= 72.0 * (m - 4.0) * (m - 5.0) / (m * (m - 1.0) * (m - 2.0) * (m - 3.0));

        let p_value = if m_hsic <= 0.0 || var_hsic <= 0.0 {
            1.0
        } else {
            let shape = m_hsic * m_hsic / var_hsic;
            let scale = var_hsic * m / m_hsic;
            match Gamma::new(shape, 1.0 / scale) {
                Ok(g) => 1.0 - g.cdf(test_stat.max(0.0)),
                Err(_) => 1.0,
            }
        };
        HsicOutcome {
            statistic: test_stat,
            p_value,
        }
    }

    /// Seeded permutation null: rows of the L side are permuted, keeping the
    /// centered K side fixed. 199 permutations.
    fn permutation_p(&self, lc: &DMatrix<f64>, observed: f64, seed: u64) -> HsicOutcome {
        let m = self.m;
        let mut rng = seeded(seed, 0x9515);
        let reps = 199;
        let mut worse = 0usize;
        let mut perm: Vec<usize> = (0..m).collect();
        for _ in 0..reps {
            for i in (1..m).rev() {
                let j = rng.random_range(0..=i);
                perm.swap(i, j);
            }
            let mut stat = 0.0;
            for i in 0..m {
                for j in 0..m {
                    stat += self.kc[(i, j)] * lc[(perm[i], perm[j])];
                }
            }
            if stat / m as f64 >= observed {
                worse += 1;
            }
        }
        HsicOutcome {
            statistic: observed,
            p_value: (worse + 1) as f64 / (reps + 1) as f64,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// One-shot HSIC test between two sample blocks (columns are dimensions).
pub fn hsic_test(
    u: &DMatrix<f64>,
    v: &DMatrix<f64>,
    params: &EstimatorParams,
) -> Result<HsicOutcome> {
    if u.nrows() != v.nrows() {
        return Err(TinError::input("HSIC inputs must have equal sample counts"));
    }
    Ok(HsicTester::new(u, params)?.test(v))
}
