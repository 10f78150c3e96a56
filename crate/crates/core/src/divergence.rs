//! Discrepancy functionals: quantum relative entropy, its variational lower
//! bound, measured relative entropy, classical KL, the Thompson metric, and
//! the Pinsker gap.
//!
//! All values are in nats. Infinity is a value, not an error: support
//! violations return `f64::INFINITY`.

use crate::density::{measure, pinch_diagonal, support_leq, DensityOperator, Povm, ProbabilityVector};
use crate::error::{Error, Result};
use crate::hermitian::{
    eig_hermitian, matrix_fn, op_norm, trace_norm, HermitianMatrix, SupportPolicy,
};
use crate::rng::{random_basis, stream_rng};
use crate::EIGENVALUE_FLOOR;

/// Classical KL divergence in nats, with the 0 log(0/q) = 0 convention.
pub fn kl(p: &ProbabilityVector, q: &ProbabilityVector) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch(p.len(), q.len()));
    }
    let mut acc = 0.0;
    for (&pi, &qi) in p.weights().iter().zip(q.weights()) {
        if pi <= 0.0 {
            continue;
        }
        if qi <= 0.0 {
            return Ok(f64::INFINITY);
        }
        acc += pi * (pi / qi).ln();
    }
    Ok(acc.max(0.0))
}

/// Von Neumann entropy S(rho) = -tr(rho log rho) in nats.
pub fn von_neumann_entropy(rho: &DensityOperator) -> Result<f64> {
    let dec = eig_hermitian(rho.matrix())?;
    Ok(-dec
        .eigenvalues()
        .iter()
        .filter(|&&x| x > EIGENVALUE_FLOOR)
        .map(|&x| x * x.ln())
        .sum::<f64>())
}

/// Quantum relative entropy D(rho || sigma) = tr rho (log rho - log sigma)
/// when spt(rho) is contained in spt(sigma), +infinity otherwise.
///
/// tr(rho log sigma) is evaluated on sigma's support block only, so the
/// kernel never contributes a 0 * (-inf) ambiguity.
pub fn qre(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), sigma.dim()));
    }
    if !support_leq(rho, sigma)? {
        return Ok(f64::INFINITY);
    }
    let rho_dec = eig_hermitian(rho.matrix())?;
    let tr_rho_log_rho: f64 = rho_dec
        .eigenvalues()
        .iter()
        .filter(|&&x| x > EIGENVALUE_FLOOR)
        .map(|&x| x * x.ln())
        .sum();

    let sigma_dec = eig_hermitian(sigma.matrix())?;
    let diag = pinch_diagonal(rho, sigma_dec.basis())?;
    let tr_rho_log_sigma: f64 = sigma_dec
        .eigenvalues()
        .iter()
        .zip(&diag)
        .filter(|(&lam, _)| lam > EIGENVALUE_FLOOR)
        .map(|(&lam, &r)| r * lam.ln())
        .sum();

    Ok((tr_rho_log_rho - tr_rho_log_sigma).max(0.0))
}

/// Objective of the variational expression at a given observable H:
/// tr(H rho) - log tr exp(H + log sigma), evaluated on sigma's support.
pub fn variational_objective(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    h: &HermitianMatrix,
) -> Result<f64> {
    if rho.dim() != sigma.dim() || h.dim() != rho.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), h.dim()));
    }
    let log_sigma = matrix_fn(sigma.matrix(), f64::ln, SupportPolicy::Strict)?;
    let m = h.add(&log_sigma)?;
    let dec = eig_hermitian(&m)?;
    // log-sum-exp with the max factored out
    let top = dec.max_eigenvalue();
    let z: f64 = dec.eigenvalues().iter().map(|&x| (x - top).exp()).sum();
    let log_trace = top + z.ln();
    Ok(crate::hermitian::hs_inner(h, rho.matrix())?.re - log_trace)
}

/// Lower bound on D(rho || sigma) from projected gradient ascent of the
/// variational objective over the operator-norm ball of radius
/// `norm_budget`. Returns the best objective value seen.
///
/// Uses Nesterov momentum with function-value restarts; the log-partition is
/// 1-smooth so the unit step is safe. With a budget exceeding
/// ||log rho - log sigma|| and enough iterations this converges to
/// D(rho || sigma) itself.
pub fn qre_variational_lb(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    norm_budget: f64,
    iters: usize,
) -> Result<f64> {
    if norm_budget < 0.0 {
        return Err(Error::InvalidParameter("norm_budget must be >= 0".into()));
    }
    if sigma.min_eigenvalue() <= EIGENVALUE_FLOOR {
        return Err(Error::SupportViolation {
            eigenvalue: sigma.min_eigenvalue(),
        });
    }
    if !support_leq(rho, sigma)? {
        return Err(Error::Precondition("rho must be dominated by sigma".into()));
    }
    let d = rho.dim();
    let log_sigma = matrix_fn(sigma.matrix(), f64::ln, SupportPolicy::Strict)?;

    let project = |h: &HermitianMatrix| -> Result<HermitianMatrix> {
        let dec = eig_hermitian(h)?;
        Ok(dec.map_eigenvalues(|x| x.clamp(-norm_budget, norm_budget)))
    };
    let objective_and_grad = |h: &HermitianMatrix| -> Result<(f64, HermitianMatrix)> {
        let m = h.add(&log_sigma)?;
        let dec = eig_hermitian(&m)?;
        let top = dec.max_eigenvalue();
        let z: f64 = dec.eigenvalues().iter().map(|&x| (x - top).exp()).sum();
        let log_trace = top + z.ln();
        // Gibbs state of H + log sigma
        let gibbs = dec.map_eigenvalues(|x| ((x - top).exp()) / z);
        let value = crate::hermitian::hs_inner(h, rho.matrix())?.re - log_trace;
        let grad = rho.matrix().sub(&gibbs)?;
        Ok((value, grad))
    };

    let mut x = HermitianMatrix::zeros(d);
    let mut y = x.clone();
    let mut t = 1.0f64;
    let (mut best, _) = objective_and_grad(&x)?;
    let mut prev_val = best;
    let step = 1.0;
    for _ in 0..iters {
        let (_, grad) = objective_and_grad(&y)?;
        let x_new = project(&y.add(&grad.scale(step))?)?;
        let (val, _) = objective_and_grad(&x_new)?;
        if val < prev_val {
            // restart the momentum sequence from the last good point
            t = 1.0;
            y = x.clone();
            prev_val = best;
            continue;
        }
        let t_new = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta = (t - 1.0) / t_new;
        y = x_new.add(&x_new.sub(&x)?.scale(beta))?;
        x = x_new;
        t = t_new;
        prev_val = val;
        if val > best {
            best = val;
        }
    }
    Ok(best)
}

/// Default measurement family for the measured relative entropy lower bound:
/// the eigenbases of rho, sigma, and rho - sigma, plus `n_random` seeded
/// random orthonormal bases.
pub fn default_povm_family(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    n_random: usize,
    seed: u64,
) -> Result<Vec<Povm>> {
    let mut family = vec![
        Povm::from_basis(eig_hermitian(rho.matrix())?.basis()),
        Povm::from_basis(eig_hermitian(sigma.matrix())?.basis()),
        Povm::from_basis(eig_hermitian(&rho.matrix().sub(sigma.matrix())?)?.basis()),
    ];
    for k in 0..n_random {
        let mut rng = stream_rng(seed, &[0x706f_766d, k as u64]);
        family.push(Povm::from_basis(&random_basis(rho.dim(), &mut rng)));
    }
    Ok(family)
}

/// Measured relative entropy lower bound: the maximum classical KL between
/// measurement outputs over the supplied POVM family. The true supremum over
/// all POVMs is not computed.
pub fn measured_re(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    povm_family: &[Povm],
) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), sigma.dim()));
    }
    let mut best = 0.0f64;
    for povm in povm_family {
        let p = measure(rho, povm)?;
        let q = measure(sigma, povm)?;
        best = best.max(kl(&p, &q)?);
    }
    Ok(best)
}

/// Thompson metric T(rho, sigma) for strictly positive states.
pub fn thompson(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), sigma.dim()));
    }
    for s in [rho, sigma] {
        let min = s.min_eigenvalue();
        if min <= EIGENVALUE_FLOOR {
            return Err(Error::SupportViolation { eigenvalue: min });
        }
    }
    let conjugated_norm = |a: &DensityOperator, b: &DensityOperator| -> Result<f64> {
        let b_inv_sqrt = matrix_fn(b.matrix(), |x| 1.0 / x.sqrt(), SupportPolicy::Strict)?;
        let inner = b_inv_sqrt.mul_raw(a.matrix())?;
        let d = a.dim();
        let full = crate::hermitian::matmul(&inner, b_inv_sqrt.entries(), d);
        op_norm(&HermitianMatrix::symmetrized(d, full))
    };
    let x = conjugated_norm(rho, sigma)?;
    let y = conjugated_norm(sigma, rho)?;
    Ok(x.max(y).ln().max(0.0))
}

/// 2 D(rho||sigma) - ||rho - sigma||_1^2; nonnegative by quantum Pinsker.
pub fn pinsker_gap(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    let div = qre(rho, sigma)?;
    if div.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let dist = trace_norm(&rho.matrix().sub(sigma.matrix())?)?;
    Ok(2.0 * div - dist * dist)
}
