//! Density operators, pinching, and measurements.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hermitian::{eig_hermitian, op_norm, HermitianMatrix, OrthonormalBasis};
use crate::EIGENVALUE_FLOOR;

/// PSD Hermitian matrix with unit trace.
///
/// Construction clips negative eigenvalue dust in [-1e-10, 0) to zero and
/// renormalizes; dust below -1e-10, or clipped mass above 1e-9, is an error.
/// Monte Carlo averaging routinely produces -1e-15-scale negatives that must
/// not reach a matrix logarithm.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: HermitianMatrix,
}

const PSD_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;
const CLIP_BUDGET: f64 = 1e-9;

impl DensityOperator {
    pub fn new(matrix: HermitianMatrix) -> Result<Self> {
        let tr = matrix.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidTrace { trace: tr });
        }
        let dec = eig_hermitian(&matrix)?;
        let min = dec.min_eigenvalue();
        if min < -PSD_TOL {
            return Err(Error::NotPsd { min_eigenvalue: min });
        }
        if min < 0.0 {
            let clipped: f64 = dec.eigenvalues().iter().filter(|&&x| x < 0.0).map(|x| -x).sum();
            if clipped > CLIP_BUDGET {
                return Err(Error::ExcessiveClipping { clipped });
            }
            let kept: f64 = dec.eigenvalues().iter().filter(|&&x| x > 0.0).sum();
            let fixed = dec.map_eigenvalues(|x| if x > 0.0 { x / kept } else { 0.0 });
            return Ok(Self { matrix: fixed });
        }
        Ok(Self { matrix })
    }

    /// Wrap a matrix known to be a valid state by construction (convex
    /// combinations of valid states, pinches, basis changes).
    pub(crate) fn from_trusted(matrix: HermitianMatrix) -> Self {
        Self { matrix }
    }

    /// Pure state |v><v| from a unit vector.
    pub fn pure(v: &[Complex64]) -> Result<Self> {
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "pure state vector has squared norm {norm}"
            )));
        }
        Ok(Self::from_trusted(HermitianMatrix::from_outer(v)))
    }

    pub fn from_diag_pmf(p: &ProbabilityVector) -> Self {
        Self::from_trusted(HermitianMatrix::from_diag(p.weights()))
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Convex combination a*self + (1-a)*other; exact state for a in [0,1].
    pub fn mix(&self, other: &Self, a: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&a) {
            return Err(Error::InvalidParameter(format!("mixing weight {a} outside [0,1]")));
        }
        let m = self.matrix.scale(a).add(&other.matrix.scale(1.0 - a))?;
        Ok(Self::from_trusted(m))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        eig_hermitian(&self.matrix)
            .expect("valid state")
            .min_eigenvalue()
    }

    /// 1 / min eigenvalue, the operator norm of the inverse. Requires a
    /// strictly positive state.
    pub fn inverse_norm(&self) -> Result<f64> {
        let min = self.min_eigenvalue();
        if min <= EIGENVALUE_FLOOR {
            return Err(Error::SupportViolation { eigenvalue: min });
        }
        Ok(1.0 / min)
    }
}

/// The maximally mixed state I/d.
pub fn maximally_mixed(d: usize) -> DensityOperator {
    DensityOperator::from_trusted(HermitianMatrix::identity(d).scale(1.0 / d as f64))
}

/// Rank-one pinching: in the given basis, keep the diagonal of sigma and
/// zero every off-diagonal entry. Trace-preserving and PSD-preserving.
pub fn pinch(sigma: &DensityOperator, basis: &OrthonormalBasis) -> Result<DensityOperator> {
    if sigma.dim() != basis.dim() {
        return Err(Error::DimensionMismatch(sigma.dim(), basis.dim()));
    }
    let in_b = sigma.matrix().in_basis(basis)?;
    let d = sigma.dim();
    let diag: Vec<f64> = (0..d).map(|i| in_b.get(i, i).re).collect();
    let pinched = HermitianMatrix::from_diag(&diag).from_basis(basis)?;
    Ok(DensityOperator::from_trusted(pinched))
}

/// Diagonal of sigma in the given basis, i.e. the Born probabilities of the
/// rank-one measurement defined by the basis.
pub fn pinch_diagonal(sigma: &DensityOperator, basis: &OrthonormalBasis) -> Result<Vec<f64>> {
    let in_b = sigma.matrix().in_basis(basis)?;
    Ok((0..sigma.dim()).map(|i| in_b.get(i, i).re).collect())
}

/// Finite POVM: PSD elements summing to the identity.
#[derive(Debug, Clone)]
pub struct Povm {
    elements: Vec<HermitianMatrix>,
    labels: Vec<String>,
}

impl Povm {
    pub fn new(elements: Vec<HermitianMatrix>, labels: Vec<String>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidParameter("POVM must have at least one element".into()));
        }
        if labels.len() != elements.len() {
            return Err(Error::InvalidParameter("POVM label count mismatch".into()));
        }
        let d = elements[0].dim();
        let mut sum = HermitianMatrix::zeros(d);
        for e in &elements {
            if e.dim() != d {
                return Err(Error::DimensionMismatch(d, e.dim()));
            }
            let min = eig_hermitian(e)?.min_eigenvalue();
            if min < -PSD_TOL {
                return Err(Error::NotPsd { min_eigenvalue: min });
            }
            sum = sum.add(e)?;
        }
        let residual = op_norm(&sum.sub(&HermitianMatrix::identity(d))?)?;
        if residual > PSD_TOL {
            return Err(Error::PovmNotComplete { residual });
        }
        Ok(Self { elements, labels })
    }

    /// Rank-one projective measurement onto the columns of a basis.
    pub fn from_basis(basis: &OrthonormalBasis) -> Self {
        let d = basis.dim();
        let elements = (0..d)
            .map(|k| HermitianMatrix::from_outer(&basis.column(k)))
            .collect();
        let labels = (0..d).map(|k| format!("e{k}")).collect();
        Self { elements, labels }
    }

    pub fn elements(&self) -> &[HermitianMatrix] {
        &self.elements
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }
}

/// Probability mass function over a finite outcome set.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector {
    weights: Vec<f64>,
}

impl ProbabilityVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidProbability("empty weight vector".into()));
        }
        if let Some(&w) = weights.iter().find(|&&w| w < 0.0 || !w.is_finite()) {
            return Err(Error::InvalidProbability(format!("weight {w} out of range")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidProbability(format!("weights sum to {sum}")));
        }
        Ok(Self { weights })
    }

    /// Renormalizing constructor for nonnegative weights with a positive sum.
    pub fn normalized(mut weights: Vec<f64>) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if sum <= 0.0 || !sum.is_finite() {
            return Err(Error::InvalidProbability(format!("weights sum to {sum}")));
        }
        for w in &mut weights {
            *w /= sum;
        }
        Self::new(weights)
    }

    pub fn uniform(len: usize) -> Self {
        Self {
            weights: vec![1.0 / len as f64; len],
        }
    }

    pub fn point_mass(len: usize, at: usize) -> Self {
        let mut weights = vec![0.0; len];
        weights[at] = 1.0;
        Self { weights }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Indices with mass above the eigenvalue floor.
    pub fn support(&self) -> Vec<usize> {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > EIGENVALUE_FLOOR)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Born probabilities tr(M_z rho) for each POVM element.
pub fn measure(rho: &DensityOperator, povm: &Povm) -> Result<ProbabilityVector> {
    if rho.dim() != povm.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), povm.dim()));
    }
    let weights: Vec<f64> = povm
        .elements()
        .iter()
        .map(|m| {
            crate::hermitian::hs_inner(m, rho.matrix()).map(|z| z.re.max(0.0))
        })
        .collect::<Result<_>>()?;
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidProbability(format!(
            "measurement outcomes sum to {sum}"
        )));
    }
    ProbabilityVector::normalized(weights)
}

/// Sorted eigenvalues of a state as a pmf. Eigenvalues at or below the floor
/// are clipped; removed mass must stay below 1e-9.
pub fn spectrum_pmf(rho: &DensityOperator) -> Result<ProbabilityVector> {
    let dec = eig_hermitian(rho.matrix())?;
    let mut weights: Vec<f64> = dec.eigenvalues().to_vec();
    let mut removed = 0.0;
    for w in &mut weights {
        if *w <= EIGENVALUE_FLOOR {
            removed += w.max(0.0);
            *w = 0.0;
        }
    }
    if removed > CLIP_BUDGET {
        return Err(Error::ExcessiveClipping { clipped: removed });
    }
    ProbabilityVector::normalized(weights)
}

/// True iff spt(rho) is contained in spt(sigma), tested via the projector
/// residual ||(I - Pi_sigma) Pi_rho|| <= 1e-8.
///
/// The residual is accumulated over sigma's kernel eigenvectors only, so a
/// full-rank sigma yields exactly zero instead of squared rounding dust.
pub fn support_leq(rho: &DensityOperator, sigma: &DensityOperator) -> Result<bool> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), sigma.dim()));
    }
    let d = rho.dim();
    let rho_dec = eig_hermitian(rho.matrix())?;
    let sigma_dec = eig_hermitian(sigma.matrix())?;
    // ||(I - P_sigma) P_rho||^2 = max over kernel vectors u of <u, P_rho u>
    let mut residual_sq = 0.0f64;
    for (k, &lam) in sigma_dec.eigenvalues().iter().enumerate() {
        if lam > EIGENVALUE_FLOOR {
            continue;
        }
        let u = sigma_dec.basis().column(k);
        let mut overlap = 0.0;
        for (j, &mu) in rho_dec.eigenvalues().iter().enumerate() {
            if mu <= EIGENVALUE_FLOOR {
                continue;
            }
            let v = rho_dec.basis().column(j);
            let mut inner = Complex64::new(0.0, 0.0);
            for i in 0..d {
                inner += u[i].conj() * v[i];
            }
            overlap += inner.norm_sqr();
        }
        residual_sq = residual_sq.max(overlap);
    }
    Ok(residual_sq.sqrt() <= 1e-8)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{random_basis, random_density, stream_rng};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn state_2x2(a: f64, b: Complex64, d: f64) -> DensityOperator {
        DensityOperator::new(
            HermitianMatrix::new(2, vec![c(a, 0.0), b, b.conj(), c(d, 0.0)]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn maximally_mixed_examples() {
        let pi2 = maximally_mixed(2);
        assert!(pi2.matrix().max_abs_entry_diff(&HermitianMatrix::from_diag(&[0.5, 0.5])) < 1e-15);
        let pi4 = maximally_mixed(4);
        assert_eq!(pi4.matrix().get(0, 0).re, 0.25);
        assert_eq!(pi4.matrix().trace(), 1.0);
    }

    #[test]
    fn pinch_computational_basis() {
        let sigma = state_2x2(0.7, c(0.1, 0.0), 0.3);
        let basis = OrthonormalBasis::computational(2);
        let p = pinch(&sigma, &basis).unwrap();
        assert!(p.matrix().max_abs_entry_diff(&HermitianMatrix::from_diag(&[0.7, 0.3])) < 1e-12);
        // already-diagonal states are fixed points
        let diag = state_2x2(0.6, c(0.0, 0.0), 0.4);
        let p2 = pinch(&diag, &basis).unwrap();
        assert!(p2.matrix().max_abs_entry_diff(diag.matrix()) < 1e-12);
    }

    #[test]
    fn pinch_diagonal_matches_quadratic_forms() {
        let mut rng = stream_rng(13, &[]);
        let sigma = random_density(4, &mut rng);
        let basis = random_basis(4, &mut rng);
        let diag = pinch_diagonal(&sigma, &basis).unwrap();
        for k in 0..4 {
            let e = basis.column(k);
            // <e|sigma|e> by direct quadratic form
            let mut acc = c(0.0, 0.0);
            for i in 0..4 {
                for j in 0..4 {
                    acc += e[i].conj() * sigma.matrix().get(i, j) * e[j];
                }
            }
            assert!((diag[k] - acc.re).abs() < 1e-12);
        }
    }

    #[test]
    fn pinch_is_idempotent_and_trace_preserving() {
        let rng = stream_rng(14, &[]);
        for trial in 0..20u64 {
            let mut r = stream_rng(14, &[trial]);
            let sigma = random_density(3, &mut r);
            let basis = random_basis(3, &mut r);
            let p1 = pinch(&sigma, &basis).unwrap();
            let p2 = pinch(&p1, &basis).unwrap();
            assert!(p1.matrix().max_abs_entry_diff(p2.matrix()) < 1e-12);
            assert!((p1.matrix().trace() - 1.0).abs() < 1e-12);
            // pinching cannot decrease the minimum eigenvalue
            assert!(p1.min_eigenvalue() >= sigma.min_eigenvalue() - 1e-10);
        }
        let _ = rng;
    }

    #[test]
    fn measure_examples() {
        let basis = OrthonormalBasis::computational(2);
        let povm = Povm::from_basis(&basis);
        let p = measure(&maximally_mixed(2), &povm).unwrap();
        assert!((p.weights()[0] - 0.5).abs() < 1e-12);
        let pure = DensityOperator::new(HermitianMatrix::from_diag(&[1.0, 0.0])).unwrap();
        let q = measure(&pure, &povm).unwrap();
        assert!((q.weights()[0] - 1.0).abs() < 1e-12);
        assert!(q.weights()[1].abs() < 1e-12);
    }

    #[test]
    fn measure_random_three_outcome_povm() {
        let mut rng = stream_rng(17, &[]);
        let rho = random_density(3, &mut rng);
        let basis = random_basis(3, &mut rng);
        let povm = Povm::from_basis(&basis);
        let p = measure(&rho, &povm).unwrap();
        let mut sum = 0.0;
        for (k, &w) in p.weights().iter().enumerate() {
            let oracle = crate::hermitian::hs_inner(&povm.elements()[k], rho.matrix())
                .unwrap()
                .re;
            assert!((w - oracle).abs() < 1e-12);
            sum += w;
        }
        assert!((sum - 1.0).abs() < 1e-10);
    }

    #[test]
    fn measure_invariant_under_global_phase() {
        let mut rng = stream_rng(18, &[]);
        let rho = random_density(3, &mut rng);
        let basis = random_basis(3, &mut rng);
        let phase = Complex64::from_polar(1.0, 1.234);
        let rotated = OrthonormalBasis::new(
            3,
            basis.entries().iter().map(|z| z * phase).collect(),
        )
        .unwrap();
        let a = measure(&rho, &Povm::from_basis(&basis)).unwrap();
        let b = measure(&rho, &Povm::from_basis(&rotated)).unwrap();
        for (x, y) in a.weights().iter().zip(b.weights()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn spectrum_pmf_examples() {
        let p = spectrum_pmf(&maximally_mixed(3)).unwrap();
        for &w in p.weights() {
            assert!((w - 1.0 / 3.0).abs() < 1e-12);
        }
        let pure = DensityOperator::new(HermitianMatrix::from_diag(&[0.0, 1.0, 0.0])).unwrap();
        assert_eq!(spectrum_pmf(&pure).unwrap().weights(), &[1.0, 0.0, 0.0]);
        // 2x2 characteristic polynomial: lambda = (1 +- sqrt(0.2)) / 2
        let sigma = state_2x2(0.7, c(0.1, 0.0), 0.3);
        let spec = spectrum_pmf(&sigma).unwrap();
        assert!((spec.weights()[0] - 0.723_606_797_749_979).abs() < 1e-7);
        assert!((spec.weights()[1] - 0.276_393_202_250_021).abs() < 1e-7);
    }

    #[test]
    fn support_leq_examples() {
        let rho = maximally_mixed(2);
        let pure = DensityOperator::new(HermitianMatrix::from_diag(&[1.0, 0.0])).unwrap();
        assert!(support_leq(&rho, &rho).unwrap());
        assert!(!support_leq(&rho, &pure).unwrap());
        assert!(support_leq(&pure, &rho).unwrap());
    }

    #[test]
    fn negative_dust_is_clipped_and_renormalized() {
        let m = HermitianMatrix::from_diag(&[1.0 + 1e-12, -1e-12]);
        let rho = DensityOperator::new(m).unwrap();
        assert!(rho.min_eigenvalue() >= 0.0);
        assert!((rho.matrix().trace() - 1.0).abs() < 1e-12);
        // genuinely negative states are rejected
        let bad = HermitianMatrix::from_diag(&[1.5, -0.5]);
        assert!(matches!(
            DensityOperator::new(bad).unwrap_err(),
            Error::NotPsd { .. }
        ));
    }

    #[test]
    fn trace_violation_rejected() {
        let m = HermitianMatrix::from_diag(&[0.6, 0.6]);
        assert!(matches!(
            DensityOperator::new(m).unwrap_err(),
            Error::InvalidTrace { .. }
        ));
    }
}
