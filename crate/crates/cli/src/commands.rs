//! Command implementations and artifact plumbing.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use qip_core::density::spectrum_pmf;
use qip_core::embedding::{empirical_embed, sample_iid};
use qip_core::io::{load_state_json, save_state_json};
use qip_core::rng::{random_basis, random_density, random_pmf, stream_rng};
use qip_core::{
    covariance_embed, default_povm_family, eig_hermitian, i_projection, matrix_concentration_check,
    measured_re, pinch, pinsker_gap, prop1_check, prop3_bound_check, pythagorean_residual, qmlp,
    qre, regret_comparison, run_concentration_experiment, run_rate_experiment,
    DensityOperator, Error, ExperimentConfig, HermitianMatrix, MixtureFamily, ModelClass,
    OrthonormalBasis, ProbabilityVector, EIGENVALUE_FLOOR,
};

use crate::config::{Config, ExperimentCfg, ProjectCfg};
use crate::{numerical, CliError};

/// Everything a command needs: resolved config, provenance, and output dir.
pub struct RunContext {
    pub cfg: Config,
    pub config_path: PathBuf,
    pub config_sha256: String,
    pub out_dir: PathBuf,
}

impl RunContext {
    pub fn new(cfg: Config, raw: Vec<u8>, config_path: &Path, out_dir: PathBuf) -> Self {
        let digest = Sha256::digest(&raw);
        let config_sha256 = digest.iter().map(|b| format!("{b:02x}")).collect::<String>();
        Self { cfg, config_path: config_path.to_path_buf(), config_sha256, out_dir }
    }

    /// Deterministic run identifier: config content + effective seed.
    pub fn run_id(&self) -> String {
        format!("{}-{}", &self.config_sha256[..12], self.cfg.master_seed)
    }

    fn base_dir(&self) -> &Path {
        self.config_path.parent().unwrap_or_else(|| Path::new("."))
    }

    fn out_path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    fn write_manifest(&self, outputs: &[String]) -> Result<(), CliError> {
        #[derive(Serialize)]
        struct RunManifest<'a> {
            config_path: String,
            config_sha256: &'a str,
            tool_version: &'a str,
            master_seed: u64,
            timestamp_unix: u64,
            outputs: &'a [String],
            resolved_config: &'a Config,
        }
        let manifest = RunManifest {
            config_path: self.config_path.display().to_string(),
            config_sha256: &self.config_sha256,
            tool_version: env!("CARGO_PKG_VERSION"),
            master_seed: self.cfg.master_seed,
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            outputs,
            resolved_config: &self.cfg,
        };
        let text = serde_json::to_string_pretty(&manifest)
            .map_err(|e| CliError::Numerical(e.to_string()))?;
        write_text(&self.out_path("manifest.json"), &text)
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text)
        .map_err(|e| CliError::Numerical(format!("cannot write {}: {e}", path.display())))
}

/// Map a core error from experiment setup/validation to the right exit class.
fn experiment_error(e: Error) -> CliError {
    match e {
        Error::InvalidParameter(_) | Error::InvalidProbability(_) | Error::DimensionMismatch(..) => {
            CliError::Config(e.to_string())
        }
        _ => CliError::Numerical(e.to_string()),
    }
}

pub fn cmd_embed(ctx: &RunContext) -> Result<(), CliError> {
    let pmf = ctx.cfg.pmf()?;
    let emb = ctx.cfg.embedding(ctx.base_dir(), ctx.cfg.master_seed)?;
    let rho_p = covariance_embed(&pmf, &emb).map_err(numerical)?;
    let rho_path = ctx.out_path("rho_p.json");
    save_state_json(&rho_path, &rho_p).map_err(numerical)?;
    let mut outputs = vec!["rho_p.json".to_string()];

    let dec = eig_hermitian(rho_p.matrix()).map_err(numerical)?;
    let rank = dec.eigenvalues().iter().filter(|&&x| x > EIGENVALUE_FLOOR).count();
    println!("spectrum: {:?}", dec.eigenvalues());
    println!("min eigenvalue: {}", rho_p.min_eigenvalue());
    println!("rank: {rank} of {}", rho_p.dim());

    if let Some(n) = ctx.cfg.sample_n {
        let sample = sample_iid(&pmf, n, ctx.cfg.master_seed).map_err(experiment_error)?;
        let rho_hat = empirical_embed(&sample, &emb).map_err(numerical)?;
        save_state_json(&ctx.out_path("rho_hat.json"), &rho_hat).map_err(numerical)?;
        outputs.push("rho_hat.json".to_string());
        println!("empirical state trace: {}", rho_hat.matrix().trace());
    }
    ctx.write_manifest(&outputs)
}

pub fn cmd_solve(ctx: &RunContext) -> Result<(), CliError> {
    let pmf = ctx.cfg.pmf()?;
    let emb = ctx.cfg.embedding(ctx.base_dir(), ctx.cfg.master_seed)?;
    let model = ctx.cfg.require_model()?;
    let rho_p = covariance_embed(&pmf, &emb).map_err(numerical)?;
    let result = qmlp(&rho_p, model).map_err(numerical)?;
    let report = serde_json::json!({
        "value": result.value,
        "iterations": result.iterations,
        "kkt_residual": result.kkt_residual,
        "dual_params": result.dual_params,
        "hit_boundary": result.hit_boundary,
        "infeasible": result.infeasible,
        "optimizer": result.optimizer,
    });
    write_text(
        &ctx.out_path("solve.json"),
        &serde_json::to_string_pretty(&report).map_err(|e| CliError::Numerical(e.to_string()))?,
    )?;
    println!("value: {}", result.value);
    println!("iterations: {}, kkt residual: {}", result.iterations, result.kkt_residual);
    ctx.write_manifest(&["solve.json".to_string()])
}

pub fn cmd_project(ctx: &RunContext) -> Result<(), CliError> {
    let default_project = ProjectCfg { dim: 2, sigma_path: None, basis_path: None };
    let project = ctx.cfg.project.as_ref().unwrap_or(&default_project);
    let sigma: DensityOperator = match &project.sigma_path {
        Some(p) => {
            let resolved = if p.is_absolute() { p.clone() } else { ctx.base_dir().join(p) };
            load_state_json(&resolved).map_err(|e| CliError::Config(format!("sigma: {e}")))?
        }
        None => {
            let mut rng = stream_rng(ctx.cfg.master_seed, &[0x706a_7374]);
            random_density(project.dim, &mut rng)
        }
    };
    let basis: OrthonormalBasis = match &project.basis_path {
        Some(p) => {
            let resolved = if p.is_absolute() { p.clone() } else { ctx.base_dir().join(p) };
            let text = std::fs::read_to_string(&resolved)
                .map_err(|e| CliError::Config(format!("basis: {e}")))?;
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("basis: {e}")))?
        }
        None => {
            let mut rng = stream_rng(ctx.cfg.master_seed, &[0x706a_6273]);
            random_basis(sigma.dim(), &mut rng)
        }
    };
    if basis.dim() != sigma.dim() {
        return Err(CliError::Config(format!(
            "basis dimension {} does not match state dimension {}",
            basis.dim(),
            sigma.dim()
        )));
    }
    let family = MixtureFamily::diagonal_in_basis(&basis).map_err(numerical)?;
    let result = i_projection(&sigma, &family).map_err(numerical)?;
    let report = serde_json::json!({
        "value": result.value,
        "iterations": result.iterations,
        "kkt_residual": result.kkt_residual,
        "infeasible": result.infeasible,
        "optimizer": result.optimizer,
    });
    write_text(
        &ctx.out_path("project.json"),
        &serde_json::to_string_pretty(&report).map_err(|e| CliError::Numerical(e.to_string()))?,
    )?;
    println!("value: {}", result.value);
    ctx.write_manifest(&["project.json".to_string()])
}

struct CheckReport {
    name: &'static str,
    pass: bool,
    detail: String,
}

pub fn cmd_verify(ctx: &RunContext) -> Result<(), CliError> {
    let verify = ctx
        .cfg
        .verify
        .as_ref()
        .ok_or_else(|| CliError::Config("missing [verify] section".into()))?;
    let seed_count = verify.seeds;
    let mut reports = Vec::new();
    for check in &verify.checks {
        let report = match check.as_str() {
            "pythagorean" => verify_pythagorean(ctx.cfg.master_seed, seed_count),
            "prop1" => verify_prop1(ctx.cfg.master_seed, seed_count, verify.corrupt_pinch),
            "prop3" => verify_prop3(ctx.cfg.master_seed, seed_count),
            "pinsker" => verify_pinsker(ctx.cfg.master_seed, seed_count),
            other => return Err(CliError::Config(format!("unknown check '{other}'"))),
        }
        .map_err(numerical)?;
        println!(
            "check {:<12} {} ({})",
            report.name,
            if report.pass { "PASS" } else { "FAIL" },
            report.detail
        );
        reports.push(report);
    }
    ctx.write_manifest(&[])?;
    let failed: Vec<&CheckReport> = reports.iter().filter(|r| !r.pass).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(format!(
            "{} of {} checks failed",
            failed.len(),
            reports.len()
        )))
    }
}

fn verify_pythagorean(master: u64, seeds: u64) -> Result<CheckReport, Error> {
    let mut worst = 0.0f64;
    for seed in 0..seeds {
        let d = 2 + (seed % 3) as usize;
        let mut rng = stream_rng(master, &[0x7666_7079, seed]);
        let basis = random_basis(d, &mut rng);
        let sigma = random_density(d, &mut rng);
        let member = ProbabilityVector::new(random_pmf(d, &mut rng))?;
        let rho = DensityOperator::new(
            HermitianMatrix::from_diag(member.weights()).from_basis(&basis)?,
        )?;
        let family = MixtureFamily::diagonal_in_basis(&basis)?;
        worst = worst.max(pythagorean_residual(&rho, &sigma, &family)?.abs());
    }
    Ok(CheckReport {
        name: "pythagorean",
        pass: worst <= 1e-7,
        detail: format!("worst |residual| = {worst:.3e}"),
    })
}

fn verify_prop1(master: u64, seeds: u64, corrupt_pinch: bool) -> Result<CheckReport, Error> {
    let mut worst = 0.0f64;
    for seed in 0..seeds {
        let d = 2 + (seed % 2) as usize;
        let mut rng = stream_rng(master, &[0x7666_7031, seed]);
        let rho = random_density(d, &mut rng);
        let model = ModelClass::spectral_floor(d, 0.3)?;
        let gap = if corrupt_pinch {
            // Negative control: pinch the state in an unrelated basis, which
            // changes the spectrum, then compare against the original
            // classical oracle. The mismatch must trip the check.
            let wrong = pinch(&rho, &random_basis(d, &mut rng))?;
            let quantum = qmlp(&wrong, &model)?.value;
            let (_, classical, _) = prop1_check(&rho, &model)?;
            quantum - classical
        } else {
            prop1_check(&rho, &model)?.2
        };
        worst = worst.max(gap.abs());
    }
    Ok(CheckReport {
        name: "prop1",
        pass: worst <= 1e-7,
        detail: format!("worst |quantum - classical| = {worst:.3e}"),
    })
}

fn verify_prop3(master: u64, seeds: u64) -> Result<CheckReport, Error> {
    let mut all_hold = true;
    let mut worst = 0.0f64;
    for seed in 0..seeds {
        let d = 2 + (seed % 2) as usize;
        let mut rng = stream_rng(master, &[0x7666_7033, seed]);
        let rho = random_density(d, &mut rng);
        let noise = random_density(d, &mut rng);
        let rho_tilde = rho.mix(&noise, 0.9)?;
        let model = ModelClass::spectral_floor(d, 0.25 / d as f64)?;
        let eps = qmlp(&rho, &model)?.value.max(0.0);
        let check = prop3_bound_check(&rho, &rho_tilde, &model, eps)?;
        all_hold &= check.holds;
        worst = worst.max(check.lhs_sq - check.rhs_sq).max(check.lhs_tri - check.rhs_tri);
    }
    Ok(CheckReport {
        name: "prop3",
        pass: all_hold,
        detail: format!("worst slack violation = {worst:.3e}"),
    })
}

fn verify_pinsker(master: u64, seeds: u64) -> Result<CheckReport, Error> {
    let mut worst = f64::INFINITY;
    for seed in 0..seeds {
        let d = 2 + (seed % 2) as usize;
        let mut rng = stream_rng(master, &[0x7666_7069, seed]);
        let rho = random_density(d, &mut rng);
        let sigma = random_density(d, &mut rng);
        let div = qre(&rho, &sigma)?;
        let family = default_povm_family(&rho, &sigma, 2, seed)?;
        let measured = measured_re(&rho, &sigma, &family)?;
        worst = worst.min(div - measured).min(pinsker_gap(&rho, &sigma)?);
    }
    Ok(CheckReport {
        name: "pinsker",
        pass: worst >= -1e-9,
        detail: format!("worst slack = {worst:.3e}"),
    })
}

fn csv_bool(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

pub fn cmd_experiment(ctx: &RunContext) -> Result<(), CliError> {
    let exp = ctx
        .cfg
        .experiment
        .as_ref()
        .ok_or_else(|| CliError::Config("missing [experiment] section".into()))?;
    let run_id = ctx.run_id();
    let mut outputs = Vec::new();
    let mut violations = Vec::new();

    match exp {
        ExperimentCfg::Rates { n_grid, trials_per_n, tail_thresholds, regime } => {
            let core_cfg = ExperimentConfig {
                pmf: ctx.cfg.pmf()?,
                embedding: ctx.cfg.embedding(ctx.base_dir(), ctx.cfg.master_seed)?,
                model: ctx.cfg.require_model()?.clone(),
                n_grid: n_grid.clone(),
                trials_per_n: *trials_per_n,
                master_seed: ctx.cfg.master_seed,
                tail_thresholds: tail_thresholds.clone(),
                regime: *regime,
            };
            let out = run_rate_experiment(&core_cfg).map_err(experiment_error)?;
            write_trials_csv(&ctx.out_path("trials.csv"), &run_id, &out.records)?;
            outputs.push("trials.csv".to_string());

            let mut text = String::from(
                "run_id,n,trials,mean_trace_err_sq,rhs_conv_rate,holds_conv_rate,\
                 mean_qre_err,rhs_experrorqrel,holds_experrorqrel,eps_assumed\n",
            );
            for row in &out.summary {
                text.push_str(&format!(
                    "{run_id},{},{},{},{},{},{},{},{},{}\n",
                    row.n,
                    row.trials,
                    row.mean_trace_err_sq,
                    row.rhs_conv_rate,
                    csv_bool(row.holds_conv_rate),
                    row.mean_qre_err,
                    row.rhs_experrorqrel,
                    csv_bool(row.holds_experrorqrel),
                    row.eps_assumed,
                ));
                if !row.holds_conv_rate || !row.holds_experrorqrel {
                    violations.push(format!("expectation bound violated at n={}", row.n));
                }
            }
            write_text(&ctx.out_path("summary.csv"), &text)?;
            outputs.push("summary.csv".to_string());
            write_bound_context(ctx, &out.context, Some(out.slope), &mut outputs)?;
            println!("rates: {} records, slope {}", out.records.len(), out.slope);
        }
        ExperimentCfg::Concentration { n_grid, trials_per_n, tail_thresholds, regime } => {
            let core_cfg = ExperimentConfig {
                pmf: ctx.cfg.pmf()?,
                embedding: ctx.cfg.embedding(ctx.base_dir(), ctx.cfg.master_seed)?,
                model: ctx.cfg.require_model()?.clone(),
                n_grid: n_grid.clone(),
                trials_per_n: *trials_per_n,
                master_seed: ctx.cfg.master_seed,
                tail_thresholds: tail_thresholds.clone(),
                regime: *regime,
            };
            let out = run_concentration_experiment(&core_cfg).map_err(experiment_error)?;
            write_trials_csv(&ctx.out_path("trials.csv"), &run_id, &out.records)?;
            outputs.push("trials.csv".to_string());

            let mut text =
                String::from("run_id,inequality,n,t,threshold,exceed_freq,rhs,holds\n");
            for row in &out.rows {
                text.push_str(&format!(
                    "{run_id},{},{},{},{},{},{},{}\n",
                    row.inequality,
                    row.n,
                    row.t,
                    row.threshold,
                    row.exceed_freq,
                    row.rhs,
                    csv_bool(row.holds),
                ));
                if !row.holds {
                    violations.push(format!("{} violated at n={}, t={}", row.inequality, row.n, row.t));
                }
            }
            write_text(&ctx.out_path("tails.csv"), &text)?;
            outputs.push("tails.csv".to_string());
            write_bound_context(ctx, &out.context, None, &mut outputs)?;
            println!("concentration: {} tail comparisons", out.rows.len());
        }
        ExperimentCfg::Matrix { kind, source, d, n, t_grid, trials } => {
            let table =
                matrix_concentration_check(*kind, *source, *d, *n, t_grid, *trials, ctx.cfg.master_seed)
                    .map_err(experiment_error)?;
            let mut text = String::from(
                "run_id,kind,d,n,trials,variance_proxy,m_bound,t,exceed_freq,rhs,holds\n",
            );
            let kind_name = match kind {
                qip_core::MatrixKind::Hoeffding => "hoeffding",
                qip_core::MatrixKind::Bernstein => "bernstein",
            };
            for row in &table.rows {
                text.push_str(&format!(
                    "{run_id},{kind_name},{},{},{},{},{},{},{},{},{}\n",
                    table.d,
                    table.n,
                    table.trials,
                    table.variance_proxy,
                    table.m_bound,
                    row.t,
                    row.exceed_freq,
                    row.rhs,
                    csv_bool(row.holds),
                ));
                if !row.holds {
                    violations.push(format!("matrix tail violated at t={}", row.t));
                }
            }
            if table.mean_holds == Some(false) {
                violations.push("matrix mean bound violated".into());
            }
            write_text(&ctx.out_path("matrix_tails.csv"), &text)?;
            outputs.push("matrix_tails.csv".to_string());
            let summary = serde_json::to_string_pretty(&table)
                .map_err(|e| CliError::Numerical(e.to_string()))?;
            write_text(&ctx.out_path("matrix_summary.json"), &summary)?;
            outputs.push("matrix_summary.json".to_string());
            println!("matrix: mean stat {} vs bound {:?}", table.mean_stat, table.mean_bound);
        }
        ExperimentCfg::Regret { n_grid } => {
            let core_cfg = ExperimentConfig {
                pmf: ctx.cfg.pmf()?,
                embedding: ctx.cfg.embedding(ctx.base_dir(), ctx.cfg.master_seed)?,
                model: ctx.cfg.require_model()?.clone(),
                n_grid: n_grid.clone(),
                trials_per_n: 1,
                master_seed: ctx.cfg.master_seed,
                tail_thresholds: vec![0.1],
                regime: qip_core::Regime::EpsZero,
            };
            let rows = regret_comparison(&core_cfg).map_err(experiment_error)?;
            let mut text =
                String::from("run_id,n,classical_value,quantum_value,measured_value,dpi_ok\n");
            for row in &rows {
                text.push_str(&format!(
                    "{run_id},{},{},{},{},{}\n",
                    row.n,
                    row.classical_value,
                    row.quantum_value,
                    row.measured_value,
                    csv_bool(row.dpi_ok),
                ));
                if !row.dpi_ok {
                    violations.push(format!("data-processing ordering violated at n={}", row.n));
                }
            }
            write_text(&ctx.out_path("regret.csv"), &text)?;
            outputs.push("regret.csv".to_string());
            println!("regret: {} sample sizes", rows.len());
        }
    }
    ctx.write_manifest(&outputs)?;
    if violations.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(violations.join("; ")))
    }
}

fn write_trials_csv(
    path: &Path,
    run_id: &str,
    records: &[qip_core::TrialRecord],
) -> Result<(), CliError> {
    let file = std::fs::File::create(path)
        .map_err(|e| CliError::Numerical(format!("cannot write {}: {e}", path.display())))?;
    let mut w = std::io::BufWriter::new(file);
    let emit = |w: &mut dyn std::io::Write| -> std::io::Result<()> {
        writeln!(w, "run_id,n,trial,trace_err_sq,qre_err,solver_iters,kkt_residual")?;
        for r in records {
            writeln!(
                w,
                "{run_id},{},{},{},{},{},{}",
                r.n, r.trial, r.trace_err_sq, r.qre_err, r.solver_iters, r.kkt_residual
            )?;
        }
        Ok(())
    };
    emit(&mut w).map_err(|e| CliError::Numerical(format!("cannot write {}: {e}", path.display())))
}

fn write_bound_context(
    ctx: &RunContext,
    context: &qip_core::BoundContext,
    slope: Option<f64>,
    outputs: &mut Vec<String>,
) -> Result<(), CliError> {
    let value = serde_json::json!({
        "context": context,
        "slope": slope,
        "spectrum_rho_p": spectrum_pmf(&context.rho_p).map_err(numerical)?.weights(),
    });
    write_text(
        &ctx.out_path("bound_context.json"),
        &serde_json::to_string_pretty(&value).map_err(|e| CliError::Numerical(e.to_string()))?,
    )?;
    outputs.push("bound_context.json".to_string());
    Ok(())
}
