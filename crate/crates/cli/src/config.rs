//! JSON run configuration: schema, validation and the config hash that ties
//! every numeric output back to its inputs.

use serde::{Deserialize, Serialize};

use fracpq_core::{Domain1D, PotentialSpec, ProblemParams};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub intervals: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    /// Grid resolution: h = 1 / n_per_unit.
    pub n_per_unit: u32,
    /// Scale of the h(s) = scale (1-s)^2 coupling used by mesh-coupled sweeps.
    #[serde(default = "default_coupling_scale")]
    pub coupling_scale: f64,
}

fn default_coupling_scale() -> f64 {
    3.0
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub s: f64,
    pub p: f64,
    pub q: f64,
    #[serde(default)]
    pub mu: f64,
    #[serde(default)]
    pub lambda: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub seed: u64,
    /// Worker pool size; 0 means hardware parallelism. The FRACPQ_THREADS
    /// environment variable caps the final value.
    #[serde(default)]
    pub workers: usize,
}

fn default_tol() -> f64 {
    1e-6
}

fn default_max_iter() -> usize {
    200_000
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: default_tol(),
            max_iter: default_max_iter(),
            seed: 0,
            workers: 0,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub mu_grid: Vec<f64>,
    #[serde(default)]
    pub s_grid: Vec<f64>,
    #[serde(default)]
    pub t_values: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
}

fn default_trials() -> usize {
    1000
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out_dir")]
    pub dir: String,
}

fn default_out_dir() -> String {
    "out".into()
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: default_out_dir(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainConfig,
    pub mesh: MeshConfig,
    pub params: ParamsConfig,
    pub potential: PotentialSpec,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    /// Field-by-field precondition checks; every message names the violated
    /// invariant.
    pub fn validate(&self) -> Result<(), String> {
        if self.domain.intervals.is_empty() {
            return Err("domain.intervals: must not be empty".into());
        }
        for (k, iv) in self.domain.intervals.iter().enumerate() {
            if iv[1] - iv[0] <= 0.0 {
                return Err(format!(
                    "domain.intervals[{k}]: interval ({}, {}) must have positive length",
                    iv[0], iv[1]
                ));
            }
        }
        for w in self.domain.intervals.windows(2) {
            if w[1][0] <= w[0][1] {
                return Err("domain.intervals: intervals must be disjoint and sorted".into());
            }
        }
        if self.mesh.n_per_unit == 0 {
            return Err("mesh.n_per_unit: must be positive".into());
        }
        if self.mesh.n_per_unit > 16384 {
            return Err("mesh.n_per_unit: must be at most 16384 (dense kernel tables)".into());
        }
        if self.mesh.coupling_scale <= 0.0 {
            return Err("mesh.coupling_scale: must be positive".into());
        }
        let p = &self.params;
        if !(0.0 < p.s && p.s < 1.0) {
            return Err(format!("params.s: {} violates 0 < s < 1", p.s));
        }
        if p.q <= 1.0 {
            return Err(format!("params.q: {} violates q > 1", p.q));
        }
        if p.q >= p.p {
            return Err(format!("params.q: q = {} >= p = {} violates q < p", p.q, p.p));
        }
        if p.mu < 0.0 {
            return Err(format!("params.mu: {} violates mu >= 0", p.mu));
        }
        if self.solver.tol <= 0.0 {
            return Err(format!("solver.tol: {} must be positive", self.solver.tol));
        }
        if self.solver.max_iter == 0 {
            return Err("solver.max_iter: must be positive".into());
        }
        if let PotentialSpec::GaussianBump { width, .. } = &self.potential {
            if *width <= 0.0 {
                return Err("potential.width: must be positive".into());
            }
        }
        Ok(())
    }

    pub fn domain(&self) -> Result<Domain1D, String> {
        Domain1D::new(self.domain.intervals.iter().map(|iv| (iv[0], iv[1])).collect())
            .map_err(|e| format!("domain.intervals: {e}"))
    }

    pub fn problem_params(&self) -> ProblemParams {
        ProblemParams {
            s: self.params.s,
            p: self.params.p,
            q: self.params.q,
            mu: self.params.mu,
            lambda: self.params.lambda,
        }
    }

    /// FNV-1a over the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let canon = serde_json::to_string(self).expect("config serializes");
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        for byte in canon.as_bytes() {
            hash ^= u64::from(*byte);
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{hash:016x}")
    }
}

pub fn load_config(path: &std::path::Path) -> Result<RunConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let config: RunConfig = serde_json::from_str(&text).map_err(|e| {
        format!(
            "malformed config {} at line {}, column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        )
    })?;
    config.validate()?;
    Ok(config)
}
