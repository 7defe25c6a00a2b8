//! Subcommand implementations: each builds the problem from the validated
//! config, runs the solver, and writes the manifest plus plot-ready CSVs.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde_json::{json, Value};

use fracpq_core::{
    bbm_check, build_mesh, lambda1, lambda2_minimax, linear_oracle, local_reference_lambda1,
    mu_quotient_decay, mu_sweep, nonexistence_certificate_with_probes, s_stability_sweep,
    solve_m_lambda, CouplingRule, EigenReport, EnergyBundle, Error as CoreError, Mesh,
    NehariReport, Potential, SweepResult, TraceRow,
};

use crate::config::RunConfig;
use crate::csvio::{fmt_float, fmt_opt, write_csv};
use crate::manifest::{load_manifest, RunManifest};

pub enum CliError {
    /// Bad input: exit code 2.
    Validation(String),
    /// Solver outcome (non-convergence, empty manifold, ...): exit code 3.
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Solver(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Solver(m) => m,
        }
    }
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::Validation(format!("i/o failure: {e}"))
}

fn core_err(e: CoreError) -> CliError {
    match e {
        CoreError::NonConvergence { .. }
        | CoreError::NehariEmpty { .. }
        | CoreError::PositivitySetUnresolved
        | CoreError::NoSignChangingCandidate => CliError::Solver(e.to_string()),
        other => CliError::Validation(other.to_string()),
    }
}

pub struct Ctx {
    pub config: RunConfig,
    pub out: PathBuf,
    pub seed: u64,
    pub command: &'static str,
    started: Instant,
}

impl Ctx {
    pub fn new(
        config: RunConfig,
        out_override: Option<PathBuf>,
        seed_override: Option<u64>,
        command: &'static str,
    ) -> Result<Self, CliError> {
        let out = out_override.unwrap_or_else(|| PathBuf::from(&config.output.dir));
        std::fs::create_dir_all(&out).map_err(io_err)?;
        let seed = seed_override.unwrap_or(config.solver.seed);
        Ok(Self {
            config,
            out,
            seed,
            command,
            started: Instant::now(),
        })
    }

    fn mesh(&self) -> Result<Arc<Mesh>, CliError> {
        let domain = self.config.domain().map_err(CliError::Validation)?;
        Ok(Arc::new(
            build_mesh(&domain, self.config.mesh.n_per_unit).map_err(core_err)?,
        ))
    }

    fn potential(&self, mesh: &Arc<Mesh>) -> Result<Potential, CliError> {
        self.config.potential.sample(mesh).map_err(core_err)
    }

    fn bundle(&self, mu: f64) -> Result<EnergyBundle, CliError> {
        let mesh = self.mesh()?;
        let potential = self.potential(&mesh)?;
        let params = fracpq_core::ProblemParams {
            mu,
            ..self.config.problem_params()
        };
        EnergyBundle::new(&mesh, params, potential).map_err(core_err)
    }

    fn write_manifest(&self, results: Value, certificate: Option<Value>) -> Result<(), CliError> {
        let manifest = RunManifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: self.command.to_string(),
            config_hash: self.config.hash(),
            seed: self.seed,
            subcritical: self.config.problem_params().subcritical(),
            wall_time_s: self.started.elapsed().as_secs_f64(),
            config: self.config.clone(),
            results,
            certificate,
        };
        std::fs::write(self.out.join("manifest.json"), manifest.to_pretty_json()).map_err(io_err)
    }

    fn write_trace(&self, trace: &[TraceRow], value_name: &str) -> Result<(), CliError> {
        let rows: Vec<Vec<String>> = trace
            .iter()
            .map(|r| vec![r.iter.to_string(), fmt_float(r.quotient), fmt_float(r.residual)])
            .collect();
        write_csv(&self.out.join("trace.csv"), &["iter", value_name, "residual"], &rows)
            .map_err(io_err)
    }

    fn write_profile(&self, name: &str, mesh: &Mesh, values: &[f64]) -> Result<(), CliError> {
        let rows: Vec<Vec<String>> = mesh
            .nodes()
            .iter()
            .zip(values)
            .map(|(&x, &u)| vec![fmt_float(x), fmt_float(u)])
            .collect();
        write_csv(&self.out.join(name), &["x", "u"], &rows).map_err(io_err)
    }

    /// Persists a partial trace on solver failure, then converts the error.
    fn solver_failure(&self, err: CoreError, value_name: &str) -> CliError {
        if let CoreError::NonConvergence { trace, .. } = &err {
            let _ = self.write_trace(trace, value_name);
            let _ = self.write_manifest(
                json!({ "outcome": "non_convergence", "detail": err.to_string() }),
                None,
            );
        } else {
            let _ = self.write_manifest(
                json!({ "outcome": "solver_failure", "detail": err.to_string() }),
                None,
            );
        }
        core_err(err)
    }
}

fn eigen_results(rep: &EigenReport, extra: Value) -> Value {
    let mut base = json!({
        "lambda_est": rep.lambda_est,
        "residual": rep.residual,
        "iterations": rep.iterations,
        "sign_profile": rep.sign_profile,
        "component_mins": rep.component_mins,
        "subcritical": rep.subcritical,
    });
    if let (Value::Object(b), Value::Object(e)) = (&mut base, extra) {
        for (k, v) in e {
            b.insert(k, v);
        }
    }
    base
}

pub fn run_lambda1(ctx: &Ctx) -> Result<(), CliError> {
    let bundle = ctx.bundle(0.0)?;
    let solver = &ctx.config.solver;
    let rep = lambda1(&bundle, solver.tol, solver.max_iter, ctx.seed)
        .map_err(|e| ctx.solver_failure(e, "quotient"))?;
    ctx.write_profile("eigenfunction.csv", bundle.mesh(), rep.eigenfunction.values())?;
    ctx.write_trace(&rep.trace, "quotient")?;
    ctx.write_manifest(
        eigen_results(&rep, json!({ "n_nodes": bundle.mesh().node_count(), "h": bundle.mesh().h() })),
        None,
    )
}

pub fn run_lambda2(ctx: &Ctx) -> Result<(), CliError> {
    let bundle = ctx.bundle(0.0)?;
    let solver = &ctx.config.solver;
    let ground = lambda1(&bundle, solver.tol, solver.max_iter, ctx.seed)
        .map_err(|e| ctx.solver_failure(e, "quotient"))?;
    let rep = lambda2_minimax(&bundle, solver.tol, ctx.seed)
        .map_err(|e| ctx.solver_failure(e, "quotient"))?;
    ctx.write_profile("eigenfunction.csv", bundle.mesh(), rep.eigenfunction.values())?;
    ctx.write_trace(&rep.trace, "quotient")?;
    // the minimax path is only validated for nonnegative weights
    let sign_changing_potential = bundle.potential().values().iter().any(|&v| v < 0.0);
    ctx.write_manifest(
        eigen_results(
            &rep,
            json!({
                "lambda1": ground.lambda_est,
                "gap": rep.lambda_est - ground.lambda_est,
                "n_nodes": bundle.mesh().node_count(),
                "experimental_sign_changing_potential": sign_changing_potential,
            }),
        ),
        None,
    )
}

pub fn run_oracle(ctx: &Ctx) -> Result<(), CliError> {
    let mesh = ctx.mesh()?;
    let potential = ctx.potential(&mesh)?;
    let spectrum = linear_oracle(&mesh, ctx.config.params.s, &potential).map_err(core_err)?;

    let rows: Vec<Vec<String>> = spectrum
        .iter()
        .enumerate()
        .map(|(k, (lambda, _))| vec![(k + 1).to_string(), fmt_float(*lambda)])
        .collect();
    write_csv(&ctx.out.join("spectrum.csv"), &["k", "lambda"], &rows).map_err(io_err)?;

    let keep = spectrum.len().min(6);
    let mut header = vec!["x".to_string()];
    header.extend((1..=keep).map(|k| format!("u{k}")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<String>> = mesh
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let mut row = vec![fmt_float(x)];
            row.extend((0..keep).map(|k| fmt_float(spectrum[k].1.values()[i])));
            row
        })
        .collect();
    write_csv(&ctx.out.join("eigenfunctions.csv"), &header_refs, &rows).map_err(io_err)?;

    ctx.write_manifest(
        json!({
            "eigenvalues": spectrum.iter().map(|(l, _)| *l).collect::<Vec<_>>(),
            "count": spectrum.len(),
            "n_nodes": mesh.node_count(),
        }),
        None,
    )
}

fn nehari_results(rep: &NehariReport, lambda: f64, lambda1_est: f64) -> Value {
    json!({
        "m_lambda": rep.m_lambda,
        "lambda": lambda,
        "lambda1": lambda1_est,
        "nehari_residual": rep.nehari_residual,
        "energy_identity_defect": rep.energy_identity_defect,
        "eigen_residual": rep.eigen_residual,
        "sign_profile": rep.sign_profile,
        "iterations": rep.iterations,
        "subcritical": rep.subcritical,
    })
}

pub fn run_nehari(ctx: &Ctx) -> Result<(), CliError> {
    if ctx.config.params.mu <= 0.0 {
        return Err(CliError::Validation(
            "params.mu: the nehari subcommand requires mu > 0".into(),
        ));
    }
    let bundle = ctx.bundle(ctx.config.params.mu)?;
    let solver = &ctx.config.solver;
    let lambda = ctx.config.params.lambda;
    let ground = lambda1(&bundle.mu0_view(), solver.tol, solver.max_iter, ctx.seed)
        .map_err(|e| ctx.solver_failure(e, "quotient"))?;
    let rep = solve_m_lambda(&bundle, lambda, solver.tol, ctx.seed)
        .map_err(|e| ctx.solver_failure(e, "level"))?;
    ctx.write_profile("solution.csv", bundle.mesh(), rep.minimizer.values())?;
    ctx.write_trace(&rep.trace, "level")?;
    ctx.write_manifest(nehari_results(&rep, lambda, ground.lambda_est), None)
}

pub fn run_certify(ctx: &Ctx) -> Result<(), CliError> {
    let bundle = ctx.bundle(ctx.config.params.mu)?;
    let solver = &ctx.config.solver;
    let lambda = ctx.config.params.lambda;
    let ground = lambda1(&bundle.mu0_view(), solver.tol, solver.max_iter, ctx.seed)
        .map_err(|e| ctx.solver_failure(e, "quotient"))?;
    let cert = nonexistence_certificate_with_probes(
        &bundle,
        lambda,
        ctx.config.sweep.trials,
        ctx.seed,
        std::slice::from_ref(&ground.eigenfunction),
    )
    .map_err(core_err)?;
    let cert_value = json!({
        "pass": cert.pass,
        "lambda": cert.lambda,
        "lambda1": ground.lambda_est,
        "trials": cert.trials,
        "passes": cert.passes,
        "failures": cert.failures,
        "max_gain": cert.max_gain,
    });
    ctx.write_manifest(json!({ "lambda1": ground.lambda_est }), Some(cert_value))
}

fn sweep_rows(sweep: &SweepResult) -> Vec<Vec<String>> {
    sweep
        .points
        .iter()
        .map(|p| {
            vec![
                fmt_float(p.parameter),
                fmt_float(p.value),
                fmt_opt(p.seminorm_p),
                fmt_opt(p.lp_norm_p),
                fmt_opt(p.weighted_norm_p),
                fmt_opt(p.residual),
                p.n_nodes.to_string(),
                fmt_float(p.h),
                p.converged.to_string(),
                fmt_opt(p.aux),
                fmt_opt(p.aux2),
            ]
        })
        .collect()
}

const SWEEP_HEADER: [&str; 11] = [
    "parameter",
    "value",
    "seminorm_p",
    "lp_norm_p",
    "weighted_norm_p",
    "residual",
    "n_nodes",
    "h",
    "converged",
    "aux",
    "aux2",
];

fn write_sweep(ctx: &Ctx, sweep: &SweepResult) -> Result<(), CliError> {
    write_csv(&ctx.out.join("sweep.csv"), &SWEEP_HEADER, &sweep_rows(sweep)).map_err(io_err)?;
    ctx.write_manifest(serde_json::to_value(sweep).expect("sweep serializes"), None)
}

pub fn run_mu_sweep(ctx: &Ctx) -> Result<(), CliError> {
    let grid = &ctx.config.sweep.mu_grid;
    if grid.is_empty() {
        return Err(CliError::Validation("sweep.mu_grid: must not be empty".into()));
    }
    let bundle = ctx.bundle(grid[0])?;
    let solver = &ctx.config.solver;
    let sweep = mu_sweep(&bundle, ctx.config.params.lambda, grid, solver.tol, ctx.seed)
        .map_err(core_err)?;
    write_sweep(ctx, &sweep)
}

pub fn run_quotient_decay(ctx: &Ctx) -> Result<(), CliError> {
    let ts = &ctx.config.sweep.t_values;
    if ts.is_empty() {
        return Err(CliError::Validation("sweep.t_values: must not be empty".into()));
    }
    if ctx.config.params.mu <= 0.0 {
        return Err(CliError::Validation(
            "params.mu: the quotient decay requires mu > 0".into(),
        ));
    }
    let bundle = ctx.bundle(ctx.config.params.mu)?;
    let solver = &ctx.config.solver;
    let sweep = mu_quotient_decay(&bundle, ts, solver.tol, solver.max_iter, ctx.seed)
        .map_err(core_err)?;
    write_sweep(ctx, &sweep)
}

pub fn run_s_sweep(ctx: &Ctx) -> Result<(), CliError> {
    let grid = &ctx.config.sweep.s_grid;
    if grid.is_empty() {
        return Err(CliError::Validation("sweep.s_grid: must not be empty".into()));
    }
    let domain = ctx.config.domain().map_err(CliError::Validation)?;
    let solver = &ctx.config.solver;
    let sweep = s_stability_sweep(
        &domain,
        &ctx.config.potential,
        ctx.config.problem_params(),
        grid,
        &CouplingRule {
            scale: ctx.config.mesh.coupling_scale,
        },
        solver.tol,
        solver.max_iter,
        ctx.seed,
    )
    .map_err(core_err)?;
    write_sweep(ctx, &sweep)
}

pub fn run_bbm(ctx: &Ctx) -> Result<(), CliError> {
    let grid = &ctx.config.sweep.s_grid;
    if grid.is_empty() {
        return Err(CliError::Validation("sweep.s_grid: must not be empty".into()));
    }
    let domain = ctx.config.domain().map_err(CliError::Validation)?;
    let sweep = bbm_check(
        &domain,
        ctx.config.params.p,
        grid,
        &CouplingRule {
            scale: ctx.config.mesh.coupling_scale,
        },
    )
    .map_err(core_err)?;
    write_sweep(ctx, &sweep)
}

/// The local (s = 1) reference solve, exposed for completeness under the
/// lambda1 contract when s is pinned to 1 via the `local` flag in results.
pub fn run_local_reference(ctx: &Ctx) -> Result<(), CliError> {
    let mesh = ctx.mesh()?;
    let potential = ctx.potential(&mesh)?;
    let rep = local_reference_lambda1(&mesh, ctx.config.params.p, &potential, ctx.config.solver.tol)
        .map_err(|e| ctx.solver_failure(e, "quotient"))?;
    ctx.write_profile("eigenfunction.csv", &mesh, rep.eigenfunction.values())?;
    ctx.write_trace(&rep.trace, "quotient")?;
    ctx.write_manifest(eigen_results(&rep, json!({ "local": true })), None)
}

pub fn run_report(config_path: &Path, out: Option<PathBuf>) -> Result<(), CliError> {
    let manifest = load_manifest(config_path).map_err(CliError::Validation)?;
    let summary = manifest.summary();
    let mut text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    text.push('\n');
    if let Some(dir) = &out {
        std::fs::create_dir_all(dir).map_err(io_err)?;
        std::fs::write(dir.join("summary.json"), &text).map_err(io_err)?;
    }
    print!("{text}");
    Ok(())
}
