//! Monte Carlo harness: convergence-rate and tail checks for the empirical
//! maximum-likelihood predictor, matrix Hoeffding/Bernstein tail tables, and
//! a classical-vs-quantum log-loss comparison.
//!
//! Every run is a pure function of (config, master seed): trial streams are
//! derived from (master_seed, n, trial), executed in parallel, and reduced in
//! index order, so reruns reproduce every record bit for bit.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::{maximally_mixed, DensityOperator, ProbabilityVector};
use crate::divergence::{default_povm_family, measured_re, qre, thompson};
use crate::embedding::{
    covariance_embed, empirical_embed, perturbed_empirical, sample_iid, FeatureEmbedding,
};
use crate::error::{Error, Result};
use crate::hermitian::{op_norm, trace_norm, HermitianMatrix};
use crate::model::{classical_mlp, qmlp, ClassicalClass, ModelClass};
use crate::rng::{derive_seed, random_hermitian, random_unit_vector, stream_rng};
use crate::EIGENVALUE_FLOOR;

/// Below this achieved approximation level the matched-model (epsilon = 0)
/// branch of the bounds is used.
pub const EPS_SWITCH: f64 = 1e-12;

/// Which branch of the performance bounds a scenario exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    EpsZero,
    EpsPositive,
}

/// A rate/concentration scenario: source distribution, embedding, model
/// class, and the Monte Carlo schedule.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub pmf: ProbabilityVector,
    pub embedding: FeatureEmbedding,
    pub model: ModelClass,
    pub n_grid: Vec<usize>,
    pub trials_per_n: usize,
    pub master_seed: u64,
    pub tail_thresholds: Vec<f64>,
    pub regime: Regime,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() {
            return Err(Error::InvalidParameter("n_grid must be non-empty".into()));
        }
        if !self.n_grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidParameter("n_grid must be strictly increasing".into()));
        }
        if self.n_grid[0] < 2 {
            return Err(Error::InvalidParameter("sample sizes must be >= 2".into()));
        }
        if self.trials_per_n == 0 {
            return Err(Error::InvalidParameter("trials_per_n must be >= 1".into()));
        }
        if self.pmf.weights().iter().any(|&w| w <= 0.0) {
            return Err(Error::InvalidParameter(
                "source pmf must have full support over its alphabet".into(),
            ));
        }
        if self.pmf.len() != self.embedding.alphabet_size() {
            return Err(Error::DimensionMismatch(self.pmf.len(), self.embedding.alphabet_size()));
        }
        self.model.validate()?;
        if self.model.dim() != self.embedding.dim() {
            return Err(Error::DimensionMismatch(self.model.dim(), self.embedding.dim()));
        }
        Ok(())
    }
}

/// Population-level constants entering the performance bounds, computed once
/// per scenario from the exact projection of the embedded distribution.
#[derive(Debug, Clone, Serialize)]
pub struct BoundContext {
    pub d: usize,
    /// Achieved approximation level D(rho_p || sigma_star); 0 for a matched
    /// class.
    pub epsilon: f64,
    pub min_eig_rho_p: f64,
    pub thompson_t: f64,
    pub sigma_star_inv_norm: f64,
    pub rho_p_inv_norm: f64,
    pub rho_p: DensityOperator,
    pub sigma_star: DensityOperator,
}

impl BoundContext {
    pub fn eps_zero(&self) -> bool {
        self.epsilon <= EPS_SWITCH
    }

    /// log ||sigma_star^-1|| v log(dn) v T(rho_p, sigma_star).
    pub fn b_n(&self, n: usize) -> f64 {
        self.sigma_star_inv_norm
            .ln()
            .max(((self.d * n) as f64).ln())
            .max(self.thompson_t)
    }

    /// log(dn) v log ||rho_p^-1||.
    pub fn b_bar_n(&self, n: usize) -> f64 {
        ((self.d * n) as f64).ln().max(self.rho_p_inv_norm.ln())
    }

    /// Upper bound on E[||sigma_star_n - rho_p||_1^2].
    pub fn rhs_conv_rate(&self, n: usize) -> f64 {
        let nf = n as f64;
        let d = self.d as f64;
        if self.eps_zero() {
            (32.0 * d * self.rho_p_inv_norm + 8.0 * d * d) * (8.0 / (nf * nf) + 28.0 * d / nf)
        } else {
            let b = self.b_n(n);
            16.0 * d * (b + 4.0) * hoeffding_mean_factor(self.d) / nf.sqrt()
                + 16.0 * b / nf
                + 64.0 / (nf * nf)
                + 28.0 * self.epsilon
        }
    }

    /// Upper bound on E[D(rho_p || sigma_hat_n)]; `eps` is the approximation
    /// level assumed in the model-fit hypothesis (raised above `epsilon` when
    /// the empirical fit gap exceeds it).
    pub fn rhs_experrorqrel(&self, n: usize, eps: f64) -> f64 {
        let nf = n as f64;
        let d = self.d as f64;
        if eps <= EPS_SWITCH {
            (28.0 * d * d * self.rho_p_inv_norm + 2.0 * d.ln()) / nf
        } else {
            let bb = self.b_bar_n(n);
            (2.0 * bb + d.ln()) / nf + d * bb * hoeffding_mean_factor(self.d) / nf.sqrt() + eps
        }
    }

    /// Deviation threshold and tail probability bound for the squared trace
    /// norm error at level `t`.
    pub fn trace_tail(&self, n: usize, t: f64) -> (f64, f64) {
        let nf = n as f64;
        let d = self.d as f64;
        if self.eps_zero() {
            let threshold =
                (32.0 * d * self.rho_p_inv_norm + 8.0 * d * d) * (8.0 / (nf * nf) + 2.0 * t);
            let rhs = 2.0 * d * (-((nf * t / 4.0).min(3.0 * nf * t.sqrt() / 4.0))).exp();
            (threshold, rhs)
        } else {
            let b = self.b_n(n);
            let threshold = 16.0 * b / nf
                + 64.0 / (nf * nf)
                + 28.0 * self.epsilon
                + 8.0 * d * (b + 4.0) * t;
            let rhs = 4.0 * d * (-((nf * t * t / 4.0).min(3.0 * nf * t / 4.0))).exp();
            (threshold, rhs)
        }
    }

    /// Deviation threshold and tail probability bound for the relative
    /// entropy error at level `t`, with assumed approximation level `eps`.
    pub fn qre_tail(&self, n: usize, t: f64, eps: f64) -> (f64, f64) {
        let nf = n as f64;
        let d = self.d as f64;
        if eps <= EPS_SWITCH {
            let threshold = 2.0 * d * t * self.rho_p_inv_norm + 2.0 * d.ln() / nf;
            let rhs = 2.0 * d * (-((nf * t / 4.0).min(3.0 * nf * t.sqrt() / 4.0))).exp();
            (threshold, rhs)
        } else {
            let bb = self.b_bar_n(n);
            let threshold = 2.0 * bb / nf + d.ln() / nf + eps + d * bb * t;
            let rhs = 2.0 * d * (-((nf * t * t / 4.0).min(3.0 * nf * t / 4.0))).exp();
            (threshold, rhs)
        }
    }
}

/// sqrt(2 log 2d) + sqrt(pi/2): the dimensional factor in the expected
/// operator norm of a Rademacher matrix series.
pub fn hoeffding_mean_factor(d: usize) -> f64 {
    (2.0 * (2.0 * d as f64).ln()).sqrt() + (std::f64::consts::PI / 2.0).sqrt()
}

/// Population constants for a scenario. Fails when the embedded distribution
/// is rank-deficient on the declared dimension; reduce the embedding to its
/// span first.
pub fn compute_bound_context(
    p: &ProbabilityVector,
    emb: &FeatureEmbedding,
    model: &ModelClass,
) -> Result<BoundContext> {
    let rho_p = covariance_embed(p, emb)?;
    let min_eig = rho_p.min_eigenvalue();
    if min_eig <= EIGENVALUE_FLOOR {
        return Err(Error::Precondition(format!(
            "embedded distribution has minimum eigenvalue {min_eig:.3e}; \
             reduce the embedding to its span before running experiments"
        )));
    }
    let proj = qmlp(&rho_p, model)?;
    if !proj.value.is_finite() {
        return Err(Error::Infeasible("model class cannot represent the target support".into()));
    }
    let sigma_star = proj.optimizer;
    Ok(BoundContext {
        d: rho_p.dim(),
        epsilon: proj.value.max(0.0),
        min_eig_rho_p: min_eig,
        thompson_t: thompson(&rho_p, &sigma_star)?,
        sigma_star_inv_norm: sigma_star.inverse_norm()?,
        rho_p_inv_norm: rho_p.inverse_norm()?,
        rho_p,
        sigma_star,
    })
}

/// One Monte Carlo draw: sample size, trial index, errors of the solved
/// predictor against the population state, and solver diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct TrialRecord {
    pub n: usize,
    pub trial: usize,
    /// ||sigma_star_n - rho_p||_1^2.
    pub trace_err_sq: f64,
    /// D(rho_p || sigma_hat_n) with the 1/n maximally-mixed blend.
    pub qre_err: f64,
    /// D(rho_n || sigma_star_n): the per-trial model fit gap.
    pub fit_gap: f64,
    pub solver_iters: usize,
    pub kkt_residual: f64,
}

fn run_trial(cfg: &ExperimentConfig, ctx: &BoundContext, n: usize, trial: usize) -> Result<TrialRecord> {
    let seed = derive_seed(cfg.master_seed, &[n as u64, trial as u64]);
    let sample = sample_iid(&cfg.pmf, n, seed)?;
    let rho_hat = empirical_embed(&sample, &cfg.embedding)?;
    let rho_n = perturbed_empirical(&rho_hat, n)?;
    let sol = qmlp(&rho_n, &cfg.model)?;
    if !sol.value.is_finite() {
        return Err(Error::Infeasible("projection infeasible on a trial".into()));
    }
    let sigma_star_n = sol.optimizer;
    let sigma_hat_n = sigma_star_n.mix(&maximally_mixed(ctx.d), 1.0 - 1.0 / n as f64)?;
    let diff = sigma_star_n.matrix().sub(ctx.rho_p.matrix())?;
    let dist = trace_norm(&diff)?;
    let qre_err = qre(&ctx.rho_p, &sigma_hat_n)?;
    if !qre_err.is_finite() {
        return Err(Error::SupportViolation { eigenvalue: sigma_hat_n.min_eigenvalue() });
    }
    Ok(TrialRecord {
        n,
        trial,
        trace_err_sq: dist * dist,
        qre_err,
        fit_gap: sol.value,
        solver_iters: sol.iterations,
        kkt_residual: sol.kkt_residual,
    })
}

/// Runs all trials at one sample size in parallel, preserving trial order,
/// and enforces the 1% failure budget over the whole schedule.
fn run_grid(cfg: &ExperimentConfig, ctx: &BoundContext) -> Result<Vec<TrialRecord>> {
    let mut records = Vec::with_capacity(cfg.n_grid.len() * cfg.trials_per_n);
    let mut failed = 0usize;
    for &n in &cfg.n_grid {
        let batch: Vec<Result<TrialRecord>> = (0..cfg.trials_per_n)
            .into_par_iter()
            .map(|trial| run_trial(cfg, ctx, n, trial))
            .collect();
        for r in batch {
            match r {
                Ok(rec) => records.push(rec),
                Err(_) => failed += 1,
            }
        }
    }
    let total = cfg.n_grid.len() * cfg.trials_per_n;
    if failed * 100 > total {
        return Err(Error::TrialFailures { failed, total });
    }
    Ok(records)
}

/// Per-sample-size aggregate of a rate run with the bound right-hand sides.
#[derive(Debug, Clone, Serialize)]
pub struct RateSummaryRow {
    pub n: usize,
    pub trials: usize,
    pub mean_trace_err_sq: f64,
    pub rhs_conv_rate: f64,
    pub holds_conv_rate: bool,
    pub mean_qre_err: f64,
    pub rhs_experrorqrel: f64,
    pub holds_experrorqrel: bool,
    /// Mean and max of the per-trial fit gap D(rho_n || sigma_star_n); the
    /// relative-entropy bound's hypothesis raises its approximation level to
    /// the mean gap when it exceeds the population epsilon.
    pub mean_fit_gap: f64,
    pub max_fit_gap: f64,
    pub eps_assumed: f64,
}

#[derive(Debug, Clone)]
pub struct RateOutcome {
    pub context: BoundContext,
    pub records: Vec<TrialRecord>,
    pub summary: Vec<RateSummaryRow>,
    /// Log-log slope of mean squared trace error vs n over the top half of
    /// the grid (the small-n half carries the burn-in of the 1/n terms).
    pub slope: f64,
}

fn check_regime(cfg: &ExperimentConfig, ctx: &BoundContext) -> Result<()> {
    let declared_zero = cfg.regime == Regime::EpsZero;
    if declared_zero != ctx.eps_zero() {
        return Err(Error::InvalidParameter(format!(
            "declared regime {:?} but achieved approximation level is {:.3e}",
            cfg.regime, ctx.epsilon
        )));
    }
    Ok(())
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Empirical convergence rates against the expectation bounds.
pub fn run_rate_experiment(cfg: &ExperimentConfig) -> Result<RateOutcome> {
    cfg.validate()?;
    let ctx = compute_bound_context(&cfg.pmf, &cfg.embedding, &cfg.model)?;
    check_regime(cfg, &ctx)?;
    let records = run_grid(cfg, &ctx)?;

    let mut summary = Vec::with_capacity(cfg.n_grid.len());
    for &n in &cfg.n_grid {
        let batch: Vec<&TrialRecord> = records.iter().filter(|r| r.n == n).collect();
        let trials = batch.len();
        let mean = |f: fn(&TrialRecord) -> f64| -> f64 {
            batch.iter().map(|r| f(r)).sum::<f64>() / trials as f64
        };
        let mean_trace = mean(|r| r.trace_err_sq);
        let mean_qre = mean(|r| r.qre_err);
        let mean_gap = mean(|r| r.fit_gap);
        let max_gap = batch.iter().map(|r| r.fit_gap).fold(0.0f64, f64::max);
        let eps_assumed = ctx.epsilon.max(mean_gap);
        let rhs_conv = ctx.rhs_conv_rate(n);
        let rhs_qre = ctx.rhs_experrorqrel(n, eps_assumed);
        summary.push(RateSummaryRow {
            n,
            trials,
            mean_trace_err_sq: mean_trace,
            rhs_conv_rate: rhs_conv,
            holds_conv_rate: mean_trace <= rhs_conv,
            mean_qre_err: mean_qre,
            rhs_experrorqrel: rhs_qre,
            holds_experrorqrel: mean_qre <= rhs_qre,
            mean_fit_gap: mean_gap,
            max_fit_gap: max_gap,
            eps_assumed,
        });
    }

    let top = &summary[summary.len() / 2..];
    let points: Vec<(f64, f64)> = top
        .iter()
        .map(|row| ((row.n as f64).ln(), row.mean_trace_err_sq.max(f64::MIN_POSITIVE).ln()))
        .collect();
    let slope = if points.len() >= 2 { least_squares_slope(&points) } else { f64::NAN };
    Ok(RateOutcome { context: ctx, records, summary, slope })
}

/// One tail comparison: empirical exceedance of a deviation threshold vs the
/// proven probability bound, with a 3-standard-error statistical allowance.
#[derive(Debug, Clone, Serialize)]
pub struct TailRow {
    pub inequality: String,
    pub n: usize,
    pub t: f64,
    pub threshold: f64,
    pub exceed_freq: f64,
    pub rhs: f64,
    pub holds: bool,
}

fn tail_holds(freq: f64, rhs: f64, trials: usize) -> bool {
    let se = (freq * (1.0 - freq) / trials as f64).sqrt();
    freq <= rhs.min(1.0) + 3.0 * se
}

#[derive(Debug, Clone)]
pub struct ConcentrationOutcome {
    pub context: BoundContext,
    pub records: Vec<TrialRecord>,
    pub rows: Vec<TailRow>,
}

/// Empirical tail frequencies of the predictor errors against the proven
/// deviation bounds, at every configured threshold level.
pub fn run_concentration_experiment(cfg: &ExperimentConfig) -> Result<ConcentrationOutcome> {
    cfg.validate()?;
    if cfg.tail_thresholds.is_empty() {
        return Err(Error::InvalidParameter("tail_thresholds must be non-empty".into()));
    }
    let ctx = compute_bound_context(&cfg.pmf, &cfg.embedding, &cfg.model)?;
    check_regime(cfg, &ctx)?;
    let records = run_grid(cfg, &ctx)?;

    let mut rows = Vec::new();
    for &n in &cfg.n_grid {
        let batch: Vec<&TrialRecord> = records.iter().filter(|r| r.n == n).collect();
        let trials = batch.len();
        // The almost-sure model-fit hypothesis of the relative-entropy tail
        // bound: raise the assumed approximation level to the worst observed
        // per-trial fit gap.
        let eps_as = ctx
            .epsilon
            .max(batch.iter().map(|r| r.fit_gap).fold(0.0f64, f64::max));
        for &t in &cfg.tail_thresholds {
            let (thr, rhs) = ctx.trace_tail(n, t);
            let freq = batch.iter().filter(|r| r.trace_err_sq >= thr).count() as f64
                / trials as f64;
            rows.push(TailRow {
                inequality: if ctx.eps_zero() { "trace_sq_matched" } else { "trace_sq" }.into(),
                n,
                t,
                threshold: thr,
                exceed_freq: freq,
                rhs,
                holds: tail_holds(freq, rhs, trials),
            });

            let (thr, rhs) = ctx.qre_tail(n, t, if ctx.eps_zero() { 0.0 } else { eps_as });
            let freq =
                batch.iter().filter(|r| r.qre_err >= thr).count() as f64 / trials as f64;
            rows.push(TailRow {
                inequality: if ctx.eps_zero() { "qre_matched" } else { "qre" }.into(),
                n,
                t,
                threshold: thr,
                exceed_freq: freq,
                rhs,
                holds: tail_holds(freq, rhs, trials),
            });
        }
    }
    Ok(ConcentrationOutcome { context: ctx, records, rows })
}

/// Which matrix concentration inequality to exercise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    Hoeffding,
    Bernstein,
}

/// Generator of the summand matrices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum MatrixSource {
    /// Fixed seeded Gaussian Hermitian matrices rescaled to the given
    /// operator norm. Not zero-mean as an ensemble; Hoeffding only.
    FixedScaled { op_norm: f64 },
    /// Zero-mean rank-one fluctuations |v><v| - I/d with Haar-random v;
    /// operator norm 1 - 1/d, summand variance proxy (d-1)/d^2 * I.
    CenteredRankOne,
}

#[derive(Debug, Clone, Serialize)]
pub struct MatrixTailRow {
    pub t: f64,
    pub exceed_freq: f64,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MatrixTailTable {
    pub kind: MatrixKind,
    pub d: usize,
    pub n: usize,
    pub trials: usize,
    /// V_n^2 (Hoeffding) or V-bar_n^2 (Bernstein).
    pub variance_proxy: f64,
    pub m_bound: f64,
    pub mean_stat: f64,
    /// Expected-norm bound; only the Rademacher series has one.
    pub mean_bound: Option<f64>,
    pub mean_holds: Option<bool>,
    pub rows: Vec<MatrixTailRow>,
}

/// Tail probability bound for the Rademacher matrix series.
pub fn hoeffding_rhs(d: usize, t: f64, v_sq: f64) -> f64 {
    2.0 * d as f64 * (-t * t / (2.0 * v_sq)).exp()
}

/// Tail probability bound for a sum of bounded zero-mean random matrices.
pub fn bernstein_rhs(d: usize, t: f64, v_bar_sq: f64, m: f64) -> f64 {
    2.0 * d as f64 * (-((t * t / (4.0 * v_bar_sq)).min(3.0 * t / (4.0 * m)))).exp()
}

fn centered_rank_one(d: usize, rng: &mut impl rand::Rng) -> HermitianMatrix {
    let v = random_unit_vector(d, rng);
    let outer = HermitianMatrix::from_outer(&v);
    let eye = HermitianMatrix::identity(d).scale(-1.0 / d as f64);
    outer.add(&eye).expect("same dimension")
}

/// Empirical tails of matrix series against the Hoeffding/Bernstein bounds.
pub fn matrix_concentration_check(
    kind: MatrixKind,
    source: MatrixSource,
    d: usize,
    n: usize,
    t_grid: &[f64],
    trials: usize,
    seed: u64,
) -> Result<MatrixTailTable> {
    if d == 0 || n == 0 || trials == 0 || t_grid.is_empty() {
        return Err(Error::InvalidParameter("d, n, trials, t_grid must be non-trivial".into()));
    }
    let (stats, variance_proxy, m_bound): (Vec<f64>, f64, f64) = match kind {
        MatrixKind::Hoeffding => {
            let mut rng = stream_rng(seed, &[0x6d78_4846]);
            let summands: Vec<HermitianMatrix> = (0..n)
                .map(|_| match source {
                    MatrixSource::FixedScaled { op_norm: target } => {
                        let h = random_hermitian(d, &mut rng);
                        let norm = op_norm(&h).expect("finite entries");
                        h.scale(if norm > 0.0 { target / norm } else { 0.0 })
                    }
                    MatrixSource::CenteredRankOne => centered_rank_one(d, &mut rng),
                })
                .collect();
            let mut sq_sum = HermitianMatrix::zeros(d);
            let mut m = 0.0f64;
            for h in &summands {
                let sq = HermitianMatrix::symmetrized(d, h.mul_raw(h)?);
                sq_sum = sq_sum.add(&sq)?;
                m = m.max(op_norm(h)?);
            }
            let v_sq = op_norm(&sq_sum)?;
            let stats: Vec<f64> = (0..trials)
                .into_par_iter()
                .map(|trial| {
                    let mut rng = stream_rng(seed, &[0x6d78_5261, trial as u64]);
                    let mut acc = HermitianMatrix::zeros(d);
                    for h in &summands {
                        let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                        acc = acc.add(&h.scale(sign)).expect("same dimension");
                    }
                    op_norm(&acc).expect("finite entries")
                })
                .collect();
            (stats, v_sq, m)
        }
        MatrixKind::Bernstein => {
            let MatrixSource::CenteredRankOne = source else {
                return Err(Error::InvalidParameter(
                    "the Bernstein check needs a zero-mean bounded source".into(),
                ));
            };
            let df = d as f64;
            let v_bar_sq = n as f64 * (df - 1.0) / (df * df);
            let m = 1.0 - 1.0 / df;
            let stats: Vec<f64> = (0..trials)
                .into_par_iter()
                .map(|trial| {
                    let mut rng = stream_rng(seed, &[0x6d78_4272, trial as u64]);
                    let mut acc = HermitianMatrix::zeros(d);
                    for _ in 0..n {
                        acc = acc.add(&centered_rank_one(d, &mut rng)).expect("same dimension");
                    }
                    op_norm(&acc).expect("finite entries")
                })
                .collect();
            (stats, v_bar_sq, m)
        }
    };

    let mean_stat = stats.iter().sum::<f64>() / trials as f64;
    let (mean_bound, mean_holds) = match kind {
        MatrixKind::Hoeffding => {
            let bound = hoeffding_mean_factor(d) * variance_proxy.sqrt();
            (Some(bound), Some(mean_stat <= bound))
        }
        MatrixKind::Bernstein => (None, None),
    };
    let rows = t_grid
        .iter()
        .map(|&t| {
            let rhs = match kind {
                MatrixKind::Hoeffding => hoeffding_rhs(d, t, variance_proxy),
                MatrixKind::Bernstein => bernstein_rhs(d, t, variance_proxy, m_bound),
            };
            let freq = stats.iter().filter(|&&s| s >= t).count() as f64 / trials as f64;
            MatrixTailRow { t, exceed_freq: freq, rhs, holds: tail_holds(freq, rhs, trials) }
        })
        .collect();
    Ok(MatrixTailTable {
        kind,
        d,
        n,
        trials,
        variance_proxy,
        m_bound,
        mean_stat,
        mean_bound,
        mean_holds,
        rows,
    })
}

/// Classical vs quantum log-loss route at one sample size.
#[derive(Debug, Clone, Serialize)]
pub struct RegretRow {
    pub n: usize,
    /// KL(p_hat || q_star) for the matching classical class.
    pub classical_value: f64,
    /// D(rho_n || sigma_star_n) on the quantum route.
    pub quantum_value: f64,
    /// Best measured KL over the default measurement family.
    pub measured_value: f64,
    /// measured <= quantum, the data-processing ordering.
    pub dpi_ok: bool,
}

fn classical_counterpart(model: &ModelClass) -> ClassicalClass {
    match model {
        ModelClass::SpectralFloor { delta, .. } => ClassicalClass::Floor(*delta),
        _ => ClassicalClass::FullSimplex,
    }
}

/// Compares the classical maximum-likelihood route on raw counts with the
/// quantum route through the embedding, recording the data-processing
/// ordering between measured and quantum divergences.
pub fn regret_comparison(cfg: &ExperimentConfig) -> Result<Vec<RegretRow>> {
    cfg.validate()?;
    let class = classical_counterpart(&cfg.model);
    let mut rows = Vec::with_capacity(cfg.n_grid.len());
    for &n in &cfg.n_grid {
        let seed = derive_seed(cfg.master_seed, &[0x7267, n as u64]);
        let sample = sample_iid(&cfg.pmf, n, seed)?;
        let p_hat = sample.empirical_pmf();
        let classical = classical_mlp(&p_hat, &class)?;

        let rho_hat = empirical_embed(&sample, &cfg.embedding)?;
        let rho_n = perturbed_empirical(&rho_hat, n)?;
        let sol = qmlp(&rho_n, &cfg.model)?;
        let family = default_povm_family(&rho_n, &sol.optimizer, 4, seed)?;
        let measured = measured_re(&rho_n, &sol.optimizer, &family)?;
        rows.push(RegretRow {
            n,
            classical_value: classical.value,
            quantum_value: sol.value,
            measured_value: measured,
            dpi_ok: measured <= sol.value + 1e-9,
        });
    }
    Ok(rows)
}
