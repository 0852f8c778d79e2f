//! Ground-truth models and synthetic data: linear acyclic SCMs, measurement
//! models, noise families, and seeded sampling.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Result, TinError};
use crate::graph::{Dag, VertexSet};

/// A linear acyclic SCM: a DAG plus the direct-effect matrix A, where
/// `a[(j, i)]` weights the edge i -> j and is nonzero exactly on edges.
#[derive(Debug, Clone)]
pub struct LinearScm {
    dag: Dag,
    a: DMatrix<f64>,
}

impl LinearScm {
    pub fn new(dag: Dag, a: DMatrix<f64>) -> Result<Self> {
        let n = dag.n();
        if a.nrows() != n || a.ncols() != n {
            return Err(TinError::input(format!(
                "weight matrix is {}x{}, expected {n}x{n}",
                a.nrows(),
                a.ncols()
            )));
        }
        for j in 0..n {
            for i in 0..n {
                let w = a[(j, i)];
                if !w.is_finite() {
                    return Err(TinError::input("non-finite edge weight"));
                }
                if (w != 0.0) != dag.has_edge(i, j) {
                    return Err(TinError::input(format!(
                        "weight support mismatch at ({i} -> {j}): weight {w}"
                    )));
                }
            }
        }
        Ok(LinearScm { dag, a })
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn n(&self) -> usize {
        self.dag.n()
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.a
    }

    /// Mixing matrix B = (I - A)^-1, built by the topological recurrence
    /// B[j, :] = e_j + sum_p A[j, p] B[p, :]. Exact for acyclic A and equal
    /// to the directed-path weight sums.
    pub fn mixing(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut b = DMatrix::<f64>::zeros(n, n);
        let order = self
            .dag
            .topological_order()
            .expect("LinearScm dag is acyclic");
        for &j in &order {
            b[(j, j)] = 1.0;
            for &p in self.dag.parents(j) {
                let w = self.a[(j, p)];
                for i in 0..n {
                    b[(j, i)] += w * b[(p, i)];
                }
            }
        }
        b
    }
}

/// Named graph layouts used throughout the tests and benchmarks. `Fig2d` and
/// `Fig4` are fixed worked-example fixtures (5 and 7 vertices).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphKind {
    Chain,
    FullyConnected,
    TriangularHeadChain,
    Fig2d,
    Fig4,
    ErdosRenyi(f64),
}

impl GraphKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "chain" => Ok(GraphKind::Chain),
            "fully_connected" => Ok(GraphKind::FullyConnected),
            "triangular_head_chain" => Ok(GraphKind::TriangularHeadChain),
            "fig2d" => Ok(GraphKind::Fig2d),
            "fig4" => Ok(GraphKind::Fig4),
            _ => {
                if let Some(p) = s.strip_prefix("erdos_renyi:") {
                    let p: f64 = p
                        .parse()
                        .map_err(|_| TinError::input(format!("bad edge probability in '{s}'")))?;
                    Ok(GraphKind::ErdosRenyi(p))
                } else {
                    Err(TinError::input(format!("unknown graph kind '{s}'")))
                }
            }
        }
    }
}

impl std::fmt::Display for GraphKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GraphKind::Chain => write!(f, "chain"),
            GraphKind::FullyConnected => write!(f, "fully_connected"),
            GraphKind::TriangularHeadChain => write!(f, "triangular_head_chain"),
            GraphKind::Fig2d => write!(f, "fig2d"),
            GraphKind::Fig4 => write!(f, "fig4"),
            GraphKind::ErdosRenyi(p) => write!(f, "erdos_renyi:{p}"),
        }
    }
}

/// Builds one of the named graphs. Deterministic given the seed (only the
/// Erdos-Renyi kind consumes it).
pub fn generate_graph(kind: GraphKind, n: usize, seed: u64) -> Result<Dag> {
    match kind {
        GraphKind::Chain => {
            require_n(n >= 2, "chain needs n >= 2")?;
            Dag::new(n, &(0..n - 1).map(|i| (i, i + 1)).collect::<Vec<_>>())
        }
        GraphKind::FullyConnected => {
            require_n(n >= 2, "fully connected needs n >= 2")?;
            let edges: Vec<(usize, usize)> = (0..n)
                .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
                .collect();
            Dag::new(n, &edges)
        }
        GraphKind::TriangularHeadChain => {
            require_n(n >= 3, "triangular-head chain needs n >= 3")?;
            let mut edges = vec![(0, 1), (0, 2), (2, 1)];
            edges.extend((2..n - 1).map(|i| (i, i + 1)));
            Dag::new(n, &edges)
        }
        GraphKind::Fig2d => {
            require_n(n == 5, "the fig2d fixture is fixed at n = 5")?;
            Dag::new(5, &[(0, 3), (1, 3), (2, 3), (2, 4), (3, 4)])
        }
        GraphKind::Fig4 => {
            require_n(n == 7, "the fig4 fixture is fixed at n = 7")?;
            // Chain 1-2-3-4 with pure leaf children 7, 6, 5 hanging off
            // vertices 2, 3, 4 (zero-based below).
            Dag::new(7, &[(0, 1), (1, 2), (2, 3), (1, 6), (2, 5), (3, 4)])
        }
        GraphKind::ErdosRenyi(p) => {
            require_n(n >= 2, "erdos-renyi needs n >= 2")?;
            if !(0.0..=1.0).contains(&p) {
                return Err(TinError::input(format!("edge probability {p} outside [0,1]")));
            }
            let mut rng = seeded(seed, 0);
            let mut order: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                let j = rng.random_range(0..=i);
                order.swap(i, j);
            }
            let mut edges = Vec::new();
            for i in 0..n {
                for j in (i + 1)..n {
                    if rng.random_bool(p) {
                        edges.push((order[i], order[j]));
                    }
                }
            }
            Dag::new(n, &edges)
        }
    }
}

fn require_n(ok: bool, msg: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(TinError::input(msg))
    }
}

/// Draws edge weights uniformly from [-0.9, -0.5] u [0.5, 0.9].
pub fn sample_weights(dag: &Dag, seed: u64) -> LinearScm {
    let mut rng = seeded(seed, 1);
    let n = dag.n();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for &(i, j) in dag.edges() {
        let mag = rng.random_range(0.5..=0.9);
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        a[(j, i)] = sign * mag;
    }
    LinearScm::new(dag.clone(), a).expect("sampled weights match the dag support")
}

/// Noise distribution family. The `Powered*` variants raise the base draw to
/// a per-variable exponent c, sign-preserved, then center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseFamily {
    PoweredUniform,
    PoweredGaussian,
    Gaussian,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub family: NoiseFamily,
    pub exp_low: f64,
    pub exp_high: f64,
}

impl NoiseSpec {
    pub fn new(family: NoiseFamily, exp_low: f64, exp_high: f64) -> Result<Self> {
        if !(exp_low.is_finite() && exp_high.is_finite() && exp_low <= exp_high) {
            return Err(TinError::input("noise exponent range must satisfy low <= high"));
        }
        Ok(NoiseSpec {
            family,
            exp_low,
            exp_high,
        })
    }

    /// The paper's latent-noise default: uniform draws to the power c with
    /// c ~ U[5, 7].
    pub fn powered_uniform_default() -> Self {
        NoiseSpec {
            family: NoiseFamily::PoweredUniform,
            exp_low: 5.0,
            exp_high: 7.0,
        }
    }

    /// The paper's measurement-noise default: standard normal draws to the
    /// power c with c ~ U[2, 4].
    pub fn powered_gaussian_default() -> Self {
        NoiseSpec {
            family: NoiseFamily::PoweredGaussian,
            exp_low: 2.0,
            exp_high: 4.0,
        }
    }

    /// Draws m samples, centered. The exponent is drawn once per call (that
    /// is, once per variable).
    pub fn sample(&self, m: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let c = if self.exp_low == self.exp_high {
            self.exp_low
        } else {
            rng.random_range(self.exp_low..self.exp_high)
        };
        let mut v: Vec<f64> = (0..m)
            .map(|_| match self.family {
                NoiseFamily::PoweredUniform => {
                    let u: f64 = rng.random_range(0.0..1.0);
                    u.powf(c)
                }
                NoiseFamily::PoweredGaussian => {
                    let g: f64 = StandardNormal.sample(rng);
                    g.signum() * g.abs().powf(c)
                }
                NoiseFamily::Gaussian => StandardNormal.sample(rng),
                NoiseFamily::Uniform => rng.random_range(0.0..1.0),
            })
            .collect();
        let mean = v.iter().sum::<f64>() / m as f64;
        for x in &mut v {
            *x -= mean;
        }
        v
    }
}

/// Measurement-error model: a latent SCM, per-variable measurement weights
/// c_i, a target noise-to-signal ratio, and the measurement-noise family.
#[derive(Debug, Clone)]
pub struct MeasurementModel {
    pub scm: LinearScm,
    pub meas_coeffs: Vec<f64>,
    pub nsr: f64,
    pub meas_noise: NoiseSpec,
}

impl MeasurementModel {
    pub fn new(scm: LinearScm, meas_coeffs: Vec<f64>, nsr: f64, meas_noise: NoiseSpec) -> Result<Self> {
        if meas_coeffs.len() != scm.n() {
            return Err(TinError::input("one measurement coefficient per variable required"));
        }
        if meas_coeffs.iter().any(|c| *c == 0.0 || !c.is_finite()) {
            return Err(TinError::input("measurement coefficients must be nonzero"));
        }
        if !(nsr > 0.0) {
            return Err(TinError::input("noise-to-signal ratio must be positive"));
        }
        Ok(MeasurementModel {
            scm,
            meas_coeffs,
            nsr,
            meas_noise,
        })
    }

    /// Unit measurement weights.
    pub fn unit(scm: LinearScm, nsr: f64, meas_noise: NoiseSpec) -> Result<Self> {
        let n = scm.n();
        MeasurementModel::new(scm, vec![1.0; n], nsr, meas_noise)
    }
}

/// An m x p sample matrix with named columns.
#[derive(Debug, Clone)]
pub struct Dataset {
    samples: DMatrix<f64>,
    names: Vec<String>,
    pub provenance: Option<String>,
}

impl Dataset {
    pub fn new(samples: DMatrix<f64>, names: Vec<String>) -> Result<Self> {
        if samples.nrows() < 2 {
            return Err(TinError::data("dataset needs at least 2 samples"));
        }
        if names.len() != samples.ncols() {
            return Err(TinError::data("one name per column required"));
        }
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != names.len() {
            return Err(TinError::data("duplicate column names"));
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(TinError::data("dataset contains non-finite entries"));
        }
        Ok(Dataset {
            samples,
            names,
            provenance: None,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.samples.nrows()
    }

    pub fn n_vars(&self) -> usize {
        self.samples.ncols()
    }

    pub fn samples(&self) -> &DMatrix<f64> {
        &self.samples
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.samples.column(j).iter().copied().collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Default column names X1..Xn.
    pub fn default_names(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("X{i}")).collect()
    }
}

/// Samples the latent layer and measured observations of a model.
///
/// The latent layer is X~ = B E~ with E~ from `latent_noise`; measurement
/// noise is drawn, centered, then rescaled per variable so that the in-sample
/// var(E_i)/var(X~_i) hits the target NSR, and X_i = c_i X~_i + E_i.
///
/// The latent dataset is returned only so oracle-grade tests can compare the
/// two layers; discovery never reads it.
pub fn sample_dataset(
    model: &MeasurementModel,
    m: usize,
    latent_noise: &NoiseSpec,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    if m < 2 {
        return Err(TinError::input("need at least 2 samples"));
    }
    let n = model.scm.n();
    let b = model.scm.mixing();

    let mut rng = seeded(seed, 2);
    let mut latent_noise_cols = Vec::with_capacity(n);
    for _ in 0..n {
        let col = latent_noise.sample(m, &mut rng);
        check_nondegenerate(&col)?;
        latent_noise_cols.push(col);
    }

    // X~(sample s, var j) = sum_i B[j, i] E~_i(s)
    let mut latent = DMatrix::<f64>::zeros(m, n);
    for j in 0..n {
        for i in 0..n {
            let w = b[(j, i)];
            if w == 0.0 {
                continue;
            }
            let e = &latent_noise_cols[i];
            for s in 0..m {
                latent[(s, j)] += w * e[s];
            }
        }
    }

    let mut observed = DMatrix::<f64>::zeros(m, n);
    for j in 0..n {
        let mut e = model.meas_noise.sample(m, &mut rng);
        check_nondegenerate(&e)?;
        let var_latent = variance(latent.column(j).as_slice());
        let var_e = variance(&e);
        if var_latent == 0.0 {
            return Err(TinError::data(format!("latent variable {j} has zero variance")));
        }
        let scale = (model.nsr * var_latent / var_e).sqrt();
        for x in &mut e {
            *x *= scale;
        }
        let c = model.meas_coeffs[j];
        for s in 0..m {
            observed[(s, j)] = c * latent[(s, j)] + e[s];
        }
    }

    let names = Dataset::default_names(n);
    let mut obs = Dataset::new(observed, names.clone())?;
    obs.provenance = Some(format!("seed={seed} nsr={} m={m}", model.nsr));
    let lat = Dataset::new(latent, names)?;
    Ok((obs, lat))
}

fn check_nondegenerate(v: &[f64]) -> Result<()> {
    if variance(v) <= f64::EPSILON {
        Err(TinError::data("degenerate (zero-variance) noise draw"))
    } else {
        Ok(())
    }
}

pub(crate) fn variance(v: &[f64]) -> f64 {
    let m = v.len() as f64;
    let mean = v.iter().sum::<f64>() / m;
    v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / m
}

/// The 2n-variable SCM stacking latents (ids 0..n) over measurements (ids
/// n..2n), with A' = [[A, 0], [C, 0]]. Its mixing matrix is the block form
/// [[B, 0], [CB, I]].
pub fn extend_with_measurement(model: &MeasurementModel) -> LinearScm {
    let n = model.scm.n();
    let mut edges: Vec<(usize, usize)> = model.scm.dag().edges().to_vec();
    edges.extend((0..n).map(|i| (i, n + i)));
    let dag = Dag::new(2 * n, &edges).expect("extension preserves acyclicity");
    let mut a = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for j in 0..n {
        for i in 0..n {
            a[(j, i)] = model.scm.weights()[(j, i)];
        }
        a[(n + j, j)] = model.meas_coeffs[j];
    }
    LinearScm::new(dag, a).expect("extended weights match the extended dag")
}

/// Counter-based seed splitting: one base seed, independent streams.
pub fn seeded(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
