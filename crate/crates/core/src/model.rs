//! Model classes and maximum-likelihood projections: the classical MLP over
//! pmf classes and its quantum counterpart (reverse I-projection) over
//! operator classes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::density::{pinch, DensityOperator, ProbabilityVector};
use crate::divergence::{kl, qre};
use crate::error::{Error, Result};
use crate::hermitian::{
    eig_hermitian, frechet_exp, hs_inner, matrix_fn, HermitianMatrix, OrthonormalBasis,
    SupportPolicy,
};

/// Default parameter box for exponential-family coordinates; keeps the
/// log-partition in floating range.
pub const BETA_BOX_DEFAULT: f64 = 50.0;
/// Moment / KKT residual tolerance for the iterative solvers.
pub const SOLVER_TOL: f64 = 1e-9;
const NEWTON_MAX_ITERS: usize = 100;
const ARMIJO_C: f64 = 1e-4;

/// A class of states to project onto.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum ModelClass {
    /// Every state of the given dimension.
    Full { dim: usize },
    /// States whose minimum eigenvalue is at least delta (0 < delta <= 1/d).
    SpectralFloor { dim: usize, delta: f64 },
    /// States diagonal in a fixed orthonormal basis.
    FixedBasisDiagonal { basis: OrthonormalBasis },
    /// exp(log base + sum_i beta_i L_i) / Z over the box |beta_i| <= beta_box.
    ExponentialFamily {
        base: DensityOperator,
        operators: Vec<HermitianMatrix>,
        #[serde(default = "default_beta_box")]
        beta_box: f64,
    },
    /// An explicit finite list of states.
    FiniteSet { states: Vec<DensityOperator> },
}

fn default_beta_box() -> f64 {
    BETA_BOX_DEFAULT
}

impl ModelClass {
    pub fn spectral_floor(dim: usize, delta: f64) -> Result<Self> {
        let class = Self::SpectralFloor { dim, delta };
        class.validate()?;
        Ok(class)
    }

    pub fn exponential_family(
        base: DensityOperator,
        operators: Vec<HermitianMatrix>,
        beta_box: f64,
    ) -> Result<Self> {
        let class = Self::ExponentialFamily { base, operators, beta_box };
        class.validate()?;
        Ok(class)
    }

    pub fn finite_set(states: Vec<DensityOperator>) -> Result<Self> {
        let class = Self::FiniteSet { states };
        class.validate()?;
        Ok(class)
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Full { dim } | Self::SpectralFloor { dim, .. } => *dim,
            Self::FixedBasisDiagonal { basis } => basis.dim(),
            Self::ExponentialFamily { base, .. } => base.dim(),
            Self::FiniteSet { states } => states.first().map(|s| s.dim()).unwrap_or(0),
        }
    }

    /// Structural invariants; call after deserializing untrusted configs.
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Full { dim } => {
                if *dim == 0 {
                    return Err(Error::InvalidParameter("dimension must be >= 1".into()));
                }
            }
            Self::SpectralFloor { dim, delta } => {
                if *dim == 0 {
                    return Err(Error::InvalidParameter("dimension must be >= 1".into()));
                }
                if !(*delta > 0.0 && *delta <= 1.0 / *dim as f64) {
                    return Err(Error::Infeasible(format!(
                        "spectral floor delta {delta} outside (0, 1/{dim}]"
                    )));
                }
            }
            Self::FixedBasisDiagonal { .. } => {}
            Self::ExponentialFamily { base, operators, beta_box } => {
                if *beta_box <= 0.0 {
                    return Err(Error::InvalidParameter("beta_box must be > 0".into()));
                }
                for op in operators {
                    if op.dim() != base.dim() {
                        return Err(Error::DimensionMismatch(base.dim(), op.dim()));
                    }
                }
            }
            Self::FiniteSet { states } => {
                if states.is_empty() {
                    return Err(Error::InvalidParameter("finite set must be non-empty".into()));
                }
                let d = states[0].dim();
                for s in states {
                    if s.dim() != d {
                        return Err(Error::DimensionMismatch(d, s.dim()));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Outcome of a projection solve.
#[derive(Debug, Clone)]
pub struct ProjectionResult {
    pub optimizer: DensityOperator,
    pub value: f64,
    pub iterations: usize,
    pub kkt_residual: f64,
    pub dual_params: Option<Vec<f64>>,
    /// The dual iterate terminated on the parameter box boundary; the
    /// reported optimizer is the box-constrained solution.
    pub hit_boundary: bool,
    /// No feasible point dominated by the reference state; value is +inf
    /// and the optimizer is an arbitrary member.
    pub infeasible: bool,
}

impl ProjectionResult {
    fn exact(optimizer: DensityOperator, value: f64) -> Self {
        Self {
            optimizer,
            value,
            iterations: 0,
            kkt_residual: 0.0,
            dual_params: None,
            hit_boundary: false,
            infeasible: false,
        }
    }
}

/// Classical counterparts of the operator classes, over pmfs.
#[derive(Debug, Clone)]
pub enum ClassicalClass {
    FullSimplex,
    Floor(f64),
    FiniteSet(Vec<ProbabilityVector>),
}

/// Classical MLP solve outcome.
#[derive(Debug, Clone)]
pub struct ClassicalProjection {
    pub pmf: ProbabilityVector,
    pub value: f64,
    pub iterations: usize,
    pub kkt_residual: f64,
}

/// argmin over the class of KL(p_hat || q).
pub fn classical_mlp(p_hat: &ProbabilityVector, class: &ClassicalClass) -> Result<ClassicalProjection> {
    match class {
        ClassicalClass::FullSimplex => Ok(ClassicalProjection {
            pmf: p_hat.clone(),
            value: 0.0,
            iterations: 0,
            kkt_residual: 0.0,
        }),
        ClassicalClass::Floor(delta) => floor_mlp(p_hat, *delta),
        ClassicalClass::FiniteSet(candidates) => {
            if candidates.is_empty() {
                return Err(Error::InvalidParameter("finite set must be non-empty".into()));
            }
            let mut best_idx = 0;
            let mut best = f64::INFINITY;
            for (k, q) in candidates.iter().enumerate() {
                let v = kl(p_hat, q)?;
                if v < best {
                    best = v;
                    best_idx = k;
                }
            }
            Ok(ClassicalProjection {
                pmf: candidates[best_idx].clone(),
                value: best,
                iterations: 0,
                kkt_residual: 0.0,
            })
        }
    }
}

/// KKT water-filling for min KL(p || q) over {q : q_i >= delta}: clamp the
/// coordinates that fall below the floor and rescale the rest until fixed.
fn floor_mlp(p: &ProbabilityVector, delta: f64) -> Result<ClassicalProjection> {
    let n = p.len();
    if delta <= 0.0 {
        return Err(Error::InvalidParameter("floor delta must be > 0".into()));
    }
    if delta * n as f64 > 1.0 + 1e-12 {
        return Err(Error::Infeasible(format!(
            "floor delta {delta} with {n} outcomes exceeds total mass"
        )));
    }
    let w = p.weights();
    let mut clamped = vec![false; n];
    let mut iterations = 0;
    let mut scale;
    loop {
        iterations += 1;
        let free_mass: f64 = w.iter().zip(&clamped).filter(|(_, &c)| !c).map(|(&x, _)| x).sum();
        let budget = 1.0 - delta * clamped.iter().filter(|&&c| c).count() as f64;
        scale = if free_mass > 0.0 { budget / free_mass } else { 0.0 };
        let mut changed = false;
        for i in 0..n {
            if !clamped[i] && scale * w[i] < delta {
                clamped[i] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        if iterations > n + 1 {
            return Err(Error::NonConvergence { residual: f64::NAN, iterations });
        }
    }
    let q: Vec<f64> =
        (0..n).map(|i| if clamped[i] { delta } else { scale * w[i] }).collect();
    let pmf = ProbabilityVector::new(q.clone()).or_else(|_| ProbabilityVector::normalized(q))?;
    // stationarity: unclamped likelihood ratios share one multiplier, and
    // clamped coordinates must not want more mass
    let ratio_bar = 1.0 / scale.max(f64::MIN_POSITIVE);
    let mut residual: f64 = (pmf.weights().iter().sum::<f64>() - 1.0).abs();
    for i in 0..n {
        let r = w[i] / pmf.weights()[i];
        if clamped[i] {
            residual = residual.max((r - ratio_bar).max(0.0));
        } else {
            residual = residual.max((r - ratio_bar).abs());
        }
    }
    let value = kl(p, &pmf)?;
    Ok(ClassicalProjection { pmf, value, iterations, kkt_residual: residual })
}

/// Quantum maximum-likelihood projection: argmin over the class of
/// D(rho || sigma).
pub fn qmlp(rho: &DensityOperator, model: &ModelClass) -> Result<ProjectionResult> {
    model.validate()?;
    if model.dim() != rho.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), model.dim()));
    }
    match model {
        ModelClass::Full { .. } => Ok(ProjectionResult::exact(rho.clone(), 0.0)),
        ModelClass::FixedBasisDiagonal { basis } => {
            // Gibbs inequality: among states diagonal in the basis, the pinch
            // of rho matches every achievable diagonal and is optimal.
            let sigma = pinch(rho, basis)?;
            let value = qre(rho, &sigma)?;
            Ok(ProjectionResult::exact(sigma, value))
        }
        ModelClass::SpectralFloor { delta, .. } => {
            // Unitarily invariant and pinch-closed class: the solve reduces
            // to the classical floor problem on rho's spectrum.
            let dec = eig_hermitian(rho.matrix())?;
            let lam = ProbabilityVector::normalized(
                dec.eigenvalues().iter().map(|&x| x.max(0.0)).collect(),
            )?;
            let classical = classical_mlp(&lam, &ClassicalClass::Floor(*delta))?;
            let sigma = DensityOperator::from_trusted(
                HermitianMatrix::from_diag(classical.pmf.weights()).from_basis(dec.basis())?,
            );
            Ok(ProjectionResult {
                optimizer: sigma,
                value: classical.value,
                iterations: classical.iterations,
                kkt_residual: classical.kkt_residual,
                dual_params: None,
                hit_boundary: false,
                infeasible: false,
            })
        }
        ModelClass::ExponentialFamily { base, operators, beta_box } => {
            let targets: Vec<f64> = operators
                .iter()
                .map(|l| hs_inner(l, rho.matrix()).map(|z| z.re))
                .collect::<Result<_>>()?;
            let sol = dual_newton(base, operators, &targets, Some(*beta_box))?;
            let value = qre(rho, &sol.state)?;
            Ok(ProjectionResult {
                optimizer: sol.state,
                value,
                iterations: sol.iterations,
                kkt_residual: sol.grad_inf,
                dual_params: Some(sol.beta),
                hit_boundary: sol.hit_boundary,
                infeasible: false,
            })
        }
        ModelClass::FiniteSet { states } => {
            let mut best_idx = 0;
            let mut best = f64::INFINITY;
            for (k, s) in states.iter().enumerate() {
                let v = qre(rho, s)?;
                if v < best {
                    best = v;
                    best_idx = k;
                }
            }
            Ok(ProjectionResult {
                optimizer: states[best_idx].clone(),
                value: best,
                iterations: 0,
                kkt_residual: 0.0,
                dual_params: None,
                hit_boundary: false,
                infeasible: best.is_infinite(),
            })
        }
    }
}

pub(crate) struct DualSolution {
    pub beta: Vec<f64>,
    pub state: DensityOperator,
    pub iterations: usize,
    pub grad_inf: f64,
    pub hit_boundary: bool,
}

/// Damped Newton on the convex dual psi(beta) = log tr exp(log base + sum_i
/// beta_i L_i) - beta . targets, optionally box-constrained. At the optimum
/// the Gibbs state matches every target moment; the map beta -> state is the
/// exponential-family parametrization shared by the forward and reverse
/// projections.
pub(crate) fn dual_newton(
    base: &DensityOperator,
    operators: &[HermitianMatrix],
    targets: &[f64],
    beta_box: Option<f64>,
) -> Result<DualSolution> {
    if operators.len() != targets.len() {
        return Err(Error::DimensionMismatch(operators.len(), targets.len()));
    }
    let d = base.dim();
    let log_base = matrix_fn(base.matrix(), f64::ln, SupportPolicy::Strict)?;
    let k = operators.len();
    let project = |beta: &mut [f64]| {
        if let Some(b) = beta_box {
            for x in beta.iter_mut() {
                *x = x.clamp(-b, b);
            }
        }
    };

    struct Eval {
        psi: f64,
        grad: Vec<f64>,
        state: DensityOperator,
        dec_shifted: crate::hermitian::SpectralDecomposition,
        log_z: f64,
    }
    let evaluate = |beta: &[f64]| -> Result<Eval> {
        let mut m = log_base.clone();
        for (x, l) in beta.iter().zip(operators) {
            if *x != 0.0 {
                m = m.add(&l.scale(*x))?;
            }
        }
        let dec = eig_hermitian(&m)?;
        let top = dec.max_eigenvalue();
        // shifted copy keeps exp() in range; exp(M) = e^top exp(M - top I)
        let shifted = m.add(&HermitianMatrix::identity(d).scale(-top))?;
        let dec_shifted = eig_hermitian(&shifted)?;
        let z: f64 = dec_shifted.eigenvalues().iter().map(|&x| x.exp()).sum();
        let state = DensityOperator::from_trusted(
            dec_shifted.map_eigenvalues(|x| x.exp() / z),
        );
        let mut grad = Vec::with_capacity(k);
        for (l, &a) in operators.iter().zip(targets) {
            grad.push(hs_inner(l, state.matrix())?.re - a);
        }
        let psi = top + z.ln() - beta.iter().zip(targets).map(|(b, a)| b * a).sum::<f64>();
        Ok(Eval { psi, grad, state, dec_shifted, log_z: z.ln() })
    };

    let inf_norm = |v: &[f64]| v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    // projected-gradient residual: at an active box face, only the inward
    // component counts
    let kkt_residual = |beta: &[f64], grad: &[f64]| -> f64 {
        let mut r = 0.0f64;
        for i in 0..k {
            let g = grad[i];
            let blocked = match beta_box {
                Some(b) => {
                    (beta[i] >= b - 1e-12 && g < 0.0) || (beta[i] <= -b + 1e-12 && g > 0.0)
                }
                None => false,
            };
            if !blocked {
                r = r.max(g.abs());
            }
        }
        r
    };

    let mut beta = vec![0.0f64; k];
    let mut eval = evaluate(&beta)?;
    let mut iterations = 0;
    loop {
        let residual = kkt_residual(&beta, &eval.grad);
        if residual <= SOLVER_TOL || iterations >= NEWTON_MAX_ITERS {
            if residual > SOLVER_TOL {
                return Err(Error::NonConvergence { residual, iterations });
            }
            let hit_boundary = match beta_box {
                Some(b) => beta.iter().any(|x| x.abs() >= b - 1e-12),
                None => false,
            };
            return Ok(DualSolution {
                state: eval.state,
                beta,
                iterations,
                grad_inf: residual,
                hit_boundary,
            });
        }
        iterations += 1;

        // Hessian of the log-partition: moments of the Frechet derivative of
        // exp, minus the outer product of first moments
        let z = eval.log_z.exp();
        let mut hess = vec![0.0f64; k * k];
        let first: Vec<f64> = operators
            .iter()
            .map(|l| hs_inner(l, eval.state.matrix()).map(|v| v.re))
            .collect::<Result<_>>()?;
        for j in 0..k {
            let dexp = frechet_exp(&eval.dec_shifted, &operators[j])?;
            for i in 0..=j {
                let second = hs_inner(&operators[i], &dexp)?.re / z;
                let h = second - first[i] * first[j];
                hess[i * k + j] = h;
                hess[j * k + i] = h;
            }
        }
        // small ridge keeps the step defined on flat directions
        let ridge = 1e-12 + 1e-9 * inf_norm(&eval.grad);
        for i in 0..k {
            hess[i * k + i] += ridge;
        }
        let neg_grad: Vec<f64> = eval.grad.iter().map(|g| -g).collect();
        let step = solve_real(&hess, &neg_grad)
            .ok_or(Error::NonConvergence { residual, iterations })?;

        let descent: f64 = eval.grad.iter().zip(&step).map(|(g, s)| g * s).sum();
        let mut t = 1.0f64;
        let mut accepted = None;
        while t >= 1e-12 {
            let mut cand: Vec<f64> = beta.iter().zip(&step).map(|(b, s)| b + t * s).collect();
            project(&mut cand);
            let cand_eval = evaluate(&cand)?;
            // ulp-scale slack: near the optimum the true decrease drops
            // below f64 resolution and exact Armijo would reject the step
            let slack = 4.0 * f64::EPSILON * (1.0 + eval.psi.abs());
            if cand_eval.psi <= eval.psi + ARMIJO_C * t * descent + slack {
                accepted = Some((cand, cand_eval));
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some((b, e)) => {
                beta = b;
                eval = e;
            }
            None => {
                return Err(Error::NonConvergence { residual, iterations });
            }
        }
        if inf_norm(&beta) > 1e6 {
            return Err(Error::Infeasible(
                "dual parameters diverged; targets outside the achievable moment set".into(),
            ));
        }
    }
}

/// Gaussian elimination with partial pivoting for a small real symmetric
/// system; returns None on (numerical) singularity.
fn solve_real(a: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m = a.to_vec();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let (pivot_row, pivot) = (col..n)
            .map(|r| (r, m[r * n + col].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))?;
        if pivot < 1e-300 {
            return None;
        }
        if pivot_row != col {
            for j in 0..n {
                m.swap(col * n + j, pivot_row * n + j);
            }
            rhs.swap(col, pivot_row);
        }
        for r in (col + 1)..n {
            let f = m[r * n + col] / m[col * n + col];
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                m[r * n + j] -= f * m[col * n + j];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for j in (row + 1)..n {
            acc -= m[row * n + j] * x[j];
        }
        x[row] = acc / m[row * n + row];
    }
    Some(x)
}

/// Split a general (possibly non-Hermitian) generator into the Hermitian
/// pair (L + L')/2 and i(L - L')/2 spanning the same real constraint set.
pub fn hermitian_pair(dim: usize, l: &[Complex64]) -> Result<(HermitianMatrix, HermitianMatrix)> {
    if l.len() != dim * dim {
        return Err(Error::NotSquare { rows: dim, cols: l.len() / dim.max(1) });
    }
    let mut sym = vec![Complex64::new(0.0, 0.0); dim * dim];
    let mut asym = vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            let a = l[i * dim + j];
            let b = l[j * dim + i].conj();
            sym[i * dim + j] = (a + b) * 0.5;
            asym[i * dim + j] = Complex64::new(0.0, 1.0) * (a - b) * 0.5;
        }
    }
    Ok((
        HermitianMatrix::symmetrized(dim, sym),
        HermitianMatrix::symmetrized(dim, asym),
    ))
}
