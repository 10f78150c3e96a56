//! Forward I-projection onto mixture families, the Pythagorean identity,
//! pinch-closure verdicts, and the quantum-to-classical reduction checks.

use num_complex::Complex64;

use crate::density::{pinch, support_leq, DensityOperator, ProbabilityVector};
use crate::divergence::qre;
use crate::error::{Error, Result};
use crate::hermitian::{
    eig_hermitian, hs_inner, trace_norm, HermitianMatrix, OrthonormalBasis,
};
use crate::model::{
    classical_mlp, dual_newton, qmlp, ClassicalClass, ModelClass, ProjectionResult,
};
use crate::EIGENVALUE_FLOOR;

/// Linear family {rho : tr(rho L_i) = alpha_i} recorded through an anchor
/// state that satisfies the constraints.
#[derive(Debug, Clone)]
pub struct MixtureFamily {
    anchor: DensityOperator,
    operators: Vec<HermitianMatrix>,
    targets: Vec<f64>,
}

impl MixtureFamily {
    /// Family through `anchor` with targets alpha_i = tr(anchor L_i).
    pub fn new(anchor: DensityOperator, operators: Vec<HermitianMatrix>) -> Result<Self> {
        let targets = operators
            .iter()
            .map(|l| {
                if l.dim() != anchor.dim() {
                    return Err(Error::DimensionMismatch(anchor.dim(), l.dim()));
                }
                Ok(hs_inner(l, anchor.matrix())?.re)
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(Self { anchor, operators, targets })
    }

    /// The states diagonal in a basis B, cut out by the off-diagonal
    /// constraint operators |e_i><e_j| + |e_j><e_i| and its skew partner,
    /// all with target 0.
    pub fn diagonal_in_basis(basis: &OrthonormalBasis) -> Result<Self> {
        let d = basis.dim();
        let mut operators = Vec::with_capacity(d * (d - 1));
        for i in 0..d {
            for j in (i + 1)..d {
                let ei = basis.column(i);
                let ej = basis.column(j);
                let mut sym = vec![Complex64::new(0.0, 0.0); d * d];
                let mut skew = vec![Complex64::new(0.0, 0.0); d * d];
                for a in 0..d {
                    for b in 0..d {
                        let outer_ij = ei[a] * ej[b].conj();
                        let outer_ji = ej[a] * ei[b].conj();
                        sym[a * d + b] = outer_ij + outer_ji;
                        skew[a * d + b] = Complex64::new(0.0, 1.0) * (outer_ij - outer_ji);
                    }
                }
                operators.push(HermitianMatrix::symmetrized(d, sym));
                operators.push(HermitianMatrix::symmetrized(d, skew));
            }
        }
        let targets = vec![0.0; operators.len()];
        Ok(Self { anchor: crate::density::maximally_mixed(d), operators, targets })
    }

    pub fn dim(&self) -> usize {
        self.anchor.dim()
    }

    pub fn anchor(&self) -> &DensityOperator {
        &self.anchor
    }

    pub fn operators(&self) -> &[HermitianMatrix] {
        &self.operators
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    /// max_i |tr(rho L_i) - alpha_i|; zero for family members.
    pub fn member_residual(&self, rho: &DensityOperator) -> Result<f64> {
        let mut r = 0.0f64;
        for (l, &a) in self.operators.iter().zip(&self.targets) {
            r = r.max((hs_inner(l, rho.matrix())?.re - a).abs());
        }
        Ok(r)
    }
}

/// I-projection argmin {D(rho || sigma) : rho in family}, solved through the
/// exponential-family parametrization rho(beta) = exp(log sigma + sum beta_i
/// L_i)/Z on sigma's support block.
pub fn i_projection(sigma: &DensityOperator, family: &MixtureFamily) -> Result<ProjectionResult> {
    if sigma.dim() != family.dim() {
        return Err(Error::DimensionMismatch(sigma.dim(), family.dim()));
    }
    if family.operators.is_empty() {
        return Ok(ProjectionResult {
            optimizer: sigma.clone(),
            value: 0.0,
            iterations: 0,
            kkt_residual: 0.0,
            dual_params: Some(vec![]),
            hit_boundary: false,
            infeasible: false,
        });
    }
    let d = sigma.dim();
    let dec = eig_hermitian(sigma.matrix())?;
    let rank = dec.rank(EIGENVALUE_FLOOR);

    let solved = if rank == d {
        dual_newton(sigma, &family.operators, &family.targets, None)
    } else {
        // restrict everything to sigma's support block so the matrix
        // logarithm is defined; candidates outside the block have D = +inf
        let block = SupportBlock::new(&dec, rank);
        let sigma_r = DensityOperator::new(block.compress(sigma.matrix()))?;
        let ops_r: Vec<HermitianMatrix> =
            family.operators.iter().map(|l| block.compress(l)).collect();
        dual_newton(&sigma_r, &ops_r, &family.targets, None).map(|mut sol| {
            sol.state = DensityOperator::from_trusted(block.expand(sol.state.matrix()));
            sol
        })
    };

    match solved {
        Ok(sol) => {
            let value = qre(&sol.state, sigma)?;
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
        Err(Error::Infeasible(_)) => Ok(ProjectionResult {
            // no member is dominated by sigma; which member gets reported
            // is arbitrary, so hand back the anchor with the +inf flag
            optimizer: family.anchor.clone(),
            value: f64::INFINITY,
            iterations: 0,
            kkt_residual: f64::NAN,
            dual_params: None,
            hit_boundary: false,
            infeasible: true,
        }),
        Err(e) => Err(e),
    }
}

/// Isometry onto the top-rank eigenspace of a decomposition.
struct SupportBlock {
    d: usize,
    r: usize,
    /// d x r, row-major: columns are the support eigenvectors.
    cols: Vec<Complex64>,
}

impl SupportBlock {
    fn new(dec: &crate::hermitian::SpectralDecomposition, rank: usize) -> Self {
        let d = dec.dim();
        let mut cols = vec![Complex64::new(0.0, 0.0); d * rank];
        for k in 0..rank {
            let col = dec.basis().column(k);
            for i in 0..d {
                cols[i * rank + k] = col[i];
            }
        }
        Self { d, r: rank, cols }
    }

    /// B' A B (r x r).
    fn compress(&self, a: &HermitianMatrix) -> HermitianMatrix {
        let (d, r) = (self.d, self.r);
        let mut out = vec![Complex64::new(0.0, 0.0); r * r];
        for k in 0..r {
            for l in 0..r {
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..d {
                    let mut row = Complex64::new(0.0, 0.0);
                    for j in 0..d {
                        row += a.get(i, j) * self.cols[j * r + l];
                    }
                    acc += self.cols[i * r + k].conj() * row;
                }
                out[k * r + l] = acc;
            }
        }
        HermitianMatrix::symmetrized(r, out)
    }

    /// B A B' (d x d).
    fn expand(&self, a: &HermitianMatrix) -> HermitianMatrix {
        let (d, r) = (self.d, self.r);
        let mut out = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for j in 0..d {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..r {
                    for l in 0..r {
                        acc += self.cols[i * r + k] * a.get(k, l) * self.cols[j * r + l].conj();
                    }
                }
                out[i * d + j] = acc;
            }
        }
        HermitianMatrix::symmetrized(d, out)
    }
}

/// D(rho||sigma) - D(rho||rho*) - D(rho*||sigma) with rho* the I-projection
/// of sigma onto the family. Zero (to solver accuracy) for mixture families;
/// nonnegative for the compact convex case.
pub fn pythagorean_residual(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    family: &MixtureFamily,
) -> Result<f64> {
    let membership = family.member_residual(rho)?;
    if membership > 1e-8 {
        return Err(Error::Precondition(format!(
            "rho violates the family constraints by {membership}"
        )));
    }
    if !support_leq(rho, sigma)? {
        return Err(Error::Precondition("rho must be dominated by sigma".into()));
    }
    let proj = i_projection(sigma, family)?;
    if proj.infeasible {
        return Err(Error::Infeasible("family has no member dominated by sigma".into()));
    }
    Ok(qre(rho, sigma)? - qre(rho, &proj.optimizer)? - qre(&proj.optimizer, sigma)?)
}

/// Whether pinching in the given basis maps the class into itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PinchVerdict {
    Closed,
    NotClosed,
    Unknown,
}

/// Pinch-closure verdict for a model class and a pinching basis.
pub fn pinch_class(model: &ModelClass, basis: &OrthonormalBasis) -> Result<PinchVerdict> {
    if model.dim() != basis.dim() {
        return Err(Error::DimensionMismatch(model.dim(), basis.dim()));
    }
    Ok(match model {
        // pinching is unital and cannot shrink the minimum eigenvalue, so
        // both unitarily invariant classes absorb it
        ModelClass::Full { .. } | ModelClass::SpectralFloor { .. } => PinchVerdict::Closed,
        ModelClass::FixedBasisDiagonal { basis: b } => {
            if b.same_projectors(basis, 1e-10) {
                PinchVerdict::Closed
            } else {
                PinchVerdict::NotClosed
            }
        }
        ModelClass::FiniteSet { states } => {
            let mut closed = true;
            'outer: for s in states {
                let pinched = pinch(s, basis)?;
                for t in states {
                    if pinched.matrix().max_abs_entry_diff(t.matrix()) <= 1e-10 {
                        continue 'outer;
                    }
                }
                closed = false;
                break;
            }
            if closed {
                PinchVerdict::Closed
            } else {
                PinchVerdict::NotClosed
            }
        }
        ModelClass::ExponentialFamily { .. } => PinchVerdict::Unknown,
    })
}

/// Quantum value, the matching classical value on rho's spectrum, and their
/// gap. Requires the class to absorb pinching in rho's eigenbasis, which is
/// what collapses the quantum problem to a classical one.
pub fn prop1_check(rho: &DensityOperator, model: &ModelClass) -> Result<(f64, f64, f64)> {
    let dec = eig_hermitian(rho.matrix())?;
    let verdict = pinch_class(model, dec.basis())?;
    if verdict != PinchVerdict::Closed {
        return Err(Error::Precondition(format!(
            "class is not pinch-closed in rho's eigenbasis (verdict {verdict:?})"
        )));
    }
    let quantum = qmlp(rho, model)?.value;
    let spectrum =
        ProbabilityVector::normalized(dec.eigenvalues().iter().map(|&x| x.max(0.0)).collect())?;
    let classical = match model {
        ModelClass::Full { .. } => {
            classical_mlp(&spectrum, &ClassicalClass::FullSimplex)?.value
        }
        ModelClass::SpectralFloor { delta, .. } => {
            classical_mlp(&spectrum, &ClassicalClass::Floor(*delta))?.value
        }
        ModelClass::FixedBasisDiagonal { basis } => {
            // closed verdict means the basis diagonalizes rho, and the value
            // is the entropy gap between the measured pmf and the spectrum
            let diag = crate::density::pinch_diagonal(rho, basis)?;
            let shannon = |w: &[f64]| -> f64 {
                -w.iter().filter(|&&x| x > EIGENVALUE_FLOOR).map(|&x| x * x.ln()).sum::<f64>()
            };
            shannon(&diag) - shannon(spectrum.weights())
        }
        ModelClass::FiniteSet { states } => {
            // with closure, the classical side enumerates the members'
            // pinched spectra in rho's eigenbasis
            let candidates: Vec<ProbabilityVector> = states
                .iter()
                .map(|s| {
                    let diag = crate::density::pinch_diagonal(s, dec.basis())?;
                    ProbabilityVector::normalized(diag.iter().map(|&x| x.max(0.0)).collect())
                })
                .collect::<Result<_>>()?;
            classical_mlp(&spectrum, &ClassicalClass::FiniteSet(candidates))?.value
        }
        ModelClass::ExponentialFamily { .. } => {
            return Err(Error::Precondition(
                "pinch closure is unknown for exponential families".into(),
            ));
        }
    };
    Ok((quantum, classical, quantum - classical))
}

/// Both sides of the QMLP perturbation bounds.
#[derive(Debug, Clone)]
pub struct Prop3Check {
    /// ||sigma_tilde* - sigma*||_1^2.
    pub lhs_sq: f64,
    /// 4 (D(rho_tilde||sigma*) - D(rho||sigma*)) + 4 ||rho_tilde - rho||_1^2 + 12 eps.
    pub rhs_sq: f64,
    /// ||sigma_tilde* - rho||_1.
    pub lhs_tri: f64,
    /// ||sigma_tilde* - sigma*||_1 + sqrt(2 eps).
    pub rhs_tri: f64,
    pub holds: bool,
}

/// Stability of the QMLP optimizer under perturbing the input state.
pub fn prop3_bound_check(
    rho: &DensityOperator,
    rho_tilde: &DensityOperator,
    model: &ModelClass,
    epsilon: f64,
) -> Result<Prop3Check> {
    if epsilon < 0.0 {
        return Err(Error::InvalidParameter("epsilon must be >= 0".into()));
    }
    let base = qmlp(rho, model)?;
    if base.value > epsilon + 1e-9 {
        return Err(Error::Precondition(format!(
            "qmlp value {} exceeds the assumed epsilon {epsilon}",
            base.value
        )));
    }
    let tilde = qmlp(rho_tilde, model)?;
    let sigma_star = &base.optimizer;
    let sigma_tilde = &tilde.optimizer;

    let d_sigma = trace_norm(&sigma_tilde.matrix().sub(sigma_star.matrix())?)?;
    let d_rho = trace_norm(&rho_tilde.matrix().sub(rho.matrix())?)?;
    let lhs_sq = d_sigma * d_sigma;
    let rhs_sq = 4.0 * (qre(rho_tilde, sigma_star)? - qre(rho, sigma_star)?)
        + 4.0 * d_rho * d_rho
        + 12.0 * epsilon;
    let lhs_tri = trace_norm(&sigma_tilde.matrix().sub(rho.matrix())?)?;
    let rhs_tri = d_sigma + (2.0 * epsilon).sqrt();
    let holds = lhs_sq <= rhs_sq + 1e-9 && lhs_tri <= rhs_tri + 1e-9;
    Ok(Prop3Check { lhs_sq, rhs_sq, lhs_tri, rhs_tri, holds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{maximally_mixed, pinch_diagonal};
    use crate::model::SOLVER_TOL;
    use crate::rng::{random_basis, random_density, random_density_mixed, stream_rng};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pauli_z() -> HermitianMatrix {
        HermitianMatrix::from_diag(&[1.0, -1.0])
    }

    #[test]
    fn i_projection_no_constraints_returns_sigma() {
        let mut rng = stream_rng(73, &[]);
        let sigma = random_density(3, &mut rng);
        let family = MixtureFamily::new(maximally_mixed(3), vec![]).unwrap();
        let r = i_projection(&sigma, &family).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.optimizer.matrix().max_abs_entry_diff(sigma.matrix()) < 1e-15);
    }

    #[test]
    fn i_projection_single_moment_commuting_case() {
        // sigma = pi_2, constraint tr(rho Z) = 0.4 -> diag(0.7, 0.3)
        let anchor = DensityOperator::new(HermitianMatrix::from_diag(&[0.7, 0.3])).unwrap();
        let family = MixtureFamily::new(anchor, vec![pauli_z()]).unwrap();
        assert!((family.targets()[0] - 0.4).abs() < 1e-12);
        let r = i_projection(&maximally_mixed(2), &family).unwrap();
        assert!(
            r.optimizer.matrix().max_abs_entry_diff(&HermitianMatrix::from_diag(&[0.7, 0.3]))
                < 1e-9
        );
        assert!(r.kkt_residual <= SOLVER_TOL);
        // 1-D bisection oracle: tanh(beta) = 0.4
        let beta_oracle = 0.4f64.atanh();
        assert!((r.dual_params.unwrap()[0] - beta_oracle).abs() < 1e-7);
    }

    #[test]
    fn i_projection_onto_diagonal_family_commuting_case_is_pinching() {
        // when sigma commutes with the basis, the projection is the pinch
        // (which is then sigma's own spectral pmf along the basis)
        for seed in 0..10u64 {
            let mut rng = stream_rng(seed, &[0x74_68_6d_32]);
            let d = 2 + (seed % 2) as usize;
            let sigma = random_density(d, &mut rng);
            let basis = eig_hermitian(sigma.matrix()).unwrap().basis().clone();
            let family = MixtureFamily::diagonal_in_basis(&basis).unwrap();
            let r = i_projection(&sigma, &family).unwrap();
            let expect = pinch(&sigma, &basis).unwrap();
            assert!(
                r.optimizer.matrix().max_abs_entry_diff(expect.matrix()) < 1e-7,
                "seed {seed}: diff {}",
                r.optimizer.matrix().max_abs_entry_diff(expect.matrix())
            );
            assert!(family.member_residual(&r.optimizer).unwrap() <= SOLVER_TOL);
        }
    }

    #[test]
    fn i_projection_onto_diagonal_family_matches_grid_oracle() {
        // generic basis: the optimizer is diagonal in B and beats every
        // member of a fine grid over the diagonal simplex
        for seed in 0..10u64 {
            let mut rng = stream_rng(seed, &[0x74_68_6d_33]);
            let sigma = random_density(2, &mut rng);
            let basis = random_basis(2, &mut rng);
            let family = MixtureFamily::diagonal_in_basis(&basis).unwrap();
            let r = i_projection(&sigma, &family).unwrap();
            assert!(family.member_residual(&r.optimizer).unwrap() <= SOLVER_TOL);
            let mut best = f64::INFINITY;
            for k in 1..10_000 {
                let x = k as f64 / 10_000.0;
                let cand = DensityOperator::new(
                    HermitianMatrix::from_diag(&[x, 1.0 - x]).from_basis(&basis).unwrap(),
                )
                .unwrap();
                best = best.min(qre(&cand, &sigma).unwrap());
            }
            assert!(r.value <= best + 1e-8, "seed {seed}: {} vs grid {best}", r.value);
            assert!((r.value - best).abs() < 1e-6);
        }
    }

    #[test]
    fn i_projection_moment_constraints_hold_at_optimum() {
        let mut rng = stream_rng(79, &[]);
        let sigma = random_density(3, &mut rng);
        let anchor = random_density(3, &mut rng);
        let op = crate::rng::random_hermitian(3, &mut rng);
        let family = MixtureFamily::new(anchor, vec![op]).unwrap();
        let r = i_projection(&sigma, &family).unwrap();
        assert!(family.member_residual(&r.optimizer).unwrap() <= SOLVER_TOL);
        let direct = qre(&r.optimizer, &sigma).unwrap();
        assert!((r.value - direct).abs() < 1e-9);
    }

    #[test]
    fn i_projection_support_matches_family_on_full_support_instances() {
        // Full-support input keeps the projection at full rank.
        let mut rng = stream_rng(83, &[]);
        let sigma = random_density(3, &mut rng);
        let basis = random_basis(3, &mut rng);
        let family = MixtureFamily::diagonal_in_basis(&basis).unwrap();
        let r = i_projection(&sigma, &family).unwrap();
        let rank = eig_hermitian(r.optimizer.matrix()).unwrap().rank(EIGENVALUE_FLOOR);
        assert_eq!(rank, 3);
    }

    #[test]
    fn i_projection_on_singular_sigma_uses_the_support_block() {
        // sigma supported on the first two coordinates of a 3-dim space
        let sigma =
            DensityOperator::new(HermitianMatrix::from_diag(&[0.6, 0.4, 0.0])).unwrap();
        let z3 = HermitianMatrix::from_diag(&[1.0, -1.0, 0.0]);
        let anchor = DensityOperator::new(HermitianMatrix::from_diag(&[0.6, 0.3, 0.1])).unwrap();
        let family = MixtureFamily::new(anchor, vec![z3.clone()]).unwrap();
        // target tr(rho Z3) = 0.3 is achievable inside the support block
        let r = i_projection(&sigma, &family).unwrap();
        assert!(!r.infeasible);
        assert!((hs_inner(&z3, r.optimizer.matrix()).unwrap().re - 0.3).abs() <= 1e-9);
        assert!(r.optimizer.matrix().get(2, 2).norm() < 1e-12);
    }

    #[test]
    fn i_projection_reports_infeasible_targets() {
        // tr(rho Z) = 1.5 is outside the moment set entirely
        let mut family = MixtureFamily::new(maximally_mixed(2), vec![pauli_z()]).unwrap();
        family.targets[0] = 1.5;
        let r = i_projection(&maximally_mixed(2), &family).unwrap();
        assert!(r.infeasible);
        assert!(r.value.is_infinite());
    }

    #[test]
    fn pythagorean_identity_worked_example() {
        // rho diagonal in sigma's eigenbasis; projection = pinch = sigma's
        // own spectral pmf
        let sigma = DensityOperator::new(
            HermitianMatrix::new(2, vec![c(0.7, 0.0), c(0.1, 0.0), c(0.1, 0.0), c(0.3, 0.0)])
                .unwrap(),
        )
        .unwrap();
        let dec = eig_hermitian(sigma.matrix()).unwrap();
        let basis = dec.basis().clone();
        let rho = DensityOperator::new(
            HermitianMatrix::from_diag(&[0.6, 0.4]).from_basis(&basis).unwrap(),
        )
        .unwrap();
        let family = MixtureFamily::diagonal_in_basis(&basis).unwrap();
        let proj = i_projection(&sigma, &family).unwrap();
        // pinch of sigma in its own eigenbasis is sigma's spectrum
        let expect = HermitianMatrix::from_diag(&[0.723_606_8, 0.276_393_2])
            .from_basis(&basis)
            .unwrap();
        assert!(proj.optimizer.matrix().max_abs_entry_diff(&expect) < 1e-7);
        let residual = pythagorean_residual(&rho, &sigma, &family).unwrap();
        assert!(residual.abs() <= 1e-9, "residual {residual}");
    }

    #[test]
    fn pythagorean_residual_vanishes_at_the_projection() {
        let mut rng = stream_rng(89, &[]);
        let sigma = random_density(2, &mut rng);
        let basis = random_basis(2, &mut rng);
        let family = MixtureFamily::diagonal_in_basis(&basis).unwrap();
        let rho_star = i_projection(&sigma, &family).unwrap().optimizer;
        let residual = pythagorean_residual(&rho_star, &sigma, &family).unwrap();
        assert!(residual.abs() <= 1e-7);
    }

    #[test]
    fn pythagorean_sweep_over_random_diagonal_families() {
        let mut max_abs: f64 = 0.0;
        for seed in 0..100u64 {
            let mut rng = stream_rng(seed, &[0x70_79]);
            let d = 2 + (seed % 2) as usize;
            let sigma = random_density_mixed(d, 0.2, &mut rng);
            let basis = random_basis(d, &mut rng);
            let pmf = crate::rng::random_pmf(d, &mut rng);
            let rho = DensityOperator::new(
                HermitianMatrix::from_diag(&pmf).from_basis(&basis).unwrap(),
            )
            .unwrap();
            let family = MixtureFamily::diagonal_in_basis(&basis).unwrap();
            let residual = pythagorean_residual(&rho, &sigma, &family).unwrap();
            assert!(residual >= -1e-7, "seed {seed}: residual {residual}");
            max_abs = max_abs.max(residual.abs());
        }
        assert!(max_abs <= 1e-7, "max |residual| {max_abs}");
    }

    #[test]
    fn pythagorean_rejects_non_members() {
        let sigma = maximally_mixed(2);
        let basis = OrthonormalBasis::computational(2);
        let family = MixtureFamily::diagonal_in_basis(&basis).unwrap();
        let off_diag = DensityOperator::new(
            HermitianMatrix::new(2, vec![c(0.5, 0.0), c(0.3, 0.0), c(0.3, 0.0), c(0.5, 0.0)])
                .unwrap(),
        )
        .unwrap();
        assert!(matches!(
            pythagorean_residual(&off_diag, &sigma, &family).unwrap_err(),
            Error::Precondition(_)
        ));
    }

    #[test]
    fn pinch_class_verdicts() {
        let basis = OrthonormalBasis::computational(2);
        assert_eq!(
            pinch_class(&ModelClass::Full { dim: 2 }, &basis).unwrap(),
            PinchVerdict::Closed
        );
        let floor = ModelClass::spectral_floor(2, 0.2).unwrap();
        assert_eq!(pinch_class(&floor, &basis).unwrap(), PinchVerdict::Closed);
        // pi_2 is pinch-invariant under any basis
        let set = ModelClass::finite_set(vec![maximally_mixed(2)]).unwrap();
        let mut rng = stream_rng(97, &[]);
        let random = random_basis(2, &mut rng);
        assert_eq!(pinch_class(&set, &random).unwrap(), PinchVerdict::Closed);
        // a non-diagonal member pinched in the computational basis escapes
        let off = DensityOperator::new(
            HermitianMatrix::new(2, vec![c(0.5, 0.0), c(0.4, 0.0), c(0.4, 0.0), c(0.5, 0.0)])
                .unwrap(),
        )
        .unwrap();
        let set2 = ModelClass::finite_set(vec![off]).unwrap();
        assert_eq!(pinch_class(&set2, &basis).unwrap(), PinchVerdict::NotClosed);
        // fixed-basis classes close only in their own basis
        let fixed = ModelClass::FixedBasisDiagonal { basis: basis.clone() };
        assert_eq!(pinch_class(&fixed, &basis).unwrap(), PinchVerdict::Closed);
        assert_eq!(pinch_class(&fixed, &random).unwrap(), PinchVerdict::NotClosed);
        // exponential families stay undecided
        let ef = ModelClass::exponential_family(maximally_mixed(2), vec![pauli_z()], 50.0)
            .unwrap();
        assert_eq!(pinch_class(&ef, &basis).unwrap(), PinchVerdict::Unknown);
    }

    #[test]
    fn pinching_never_shrinks_the_minimum_eigenvalue() {
        // the structural reason SpectralFloor is pinch-closed
        for seed in 0..100u64 {
            let mut rng = stream_rng(seed, &[0x6d_69_6e]);
            let d = 2 + (seed % 3) as usize;
            let rho = random_density(d, &mut rng);
            let basis = random_basis(d, &mut rng);
            let pinched = pinch(&rho, &basis).unwrap();
            assert!(pinched.min_eigenvalue() >= rho.min_eigenvalue() - 1e-12);
        }
    }

    #[test]
    fn prop1_full_class_is_trivial() {
        let mut rng = stream_rng(101, &[]);
        let rho = random_density(3, &mut rng);
        let (q, c, gap) = prop1_check(&rho, &ModelClass::Full { dim: 3 }).unwrap();
        assert_eq!(q, 0.0);
        assert_eq!(c, 0.0);
        assert_eq!(gap, 0.0);
    }

    #[test]
    fn prop1_spectral_floor_in_a_random_basis() {
        let mut rng = stream_rng(47, &[]);
        let basis = random_basis(2, &mut rng);
        let rho = DensityOperator::new(
            HermitianMatrix::from_diag(&[0.9, 0.1]).from_basis(&basis).unwrap(),
        )
        .unwrap();
        let model = ModelClass::spectral_floor(2, 0.3).unwrap();
        let (q, c, gap) = prop1_check(&rho, &model).unwrap();
        assert!((q - 0.116_321_8).abs() < 1e-6);
        assert!((c - 0.116_321_8).abs() < 1e-6);
        assert!(gap.abs() <= 1e-7);
    }

    #[test]
    fn prop1_fixed_basis_at_rho_eigenbasis() {
        let rho = DensityOperator::new(HermitianMatrix::from_diag(&[0.8, 0.2])).unwrap();
        let model = ModelClass::FixedBasisDiagonal { basis: OrthonormalBasis::computational(2) };
        let (q, c, gap) = prop1_check(&rho, &model).unwrap();
        assert!(q.abs() < 1e-9);
        assert!(c.abs() < 1e-9);
        assert!(gap.abs() <= 1e-7);
        // misaligned basis violates the precondition
        let mut rng = stream_rng(103, &[]);
        let other = ModelClass::FixedBasisDiagonal { basis: random_basis(2, &mut rng) };
        assert!(prop1_check(&rho, &other).is_err());
    }

    #[test]
    fn prop1_gap_sweep() {
        for seed in 0..50u64 {
            let mut rng = stream_rng(seed, &[0x70_31]);
            let d = 2 + (seed % 2) as usize;
            let rho = random_density(d, &mut rng);
            let model = ModelClass::spectral_floor(d, 0.8 / d as f64).unwrap();
            let (_, _, gap) = prop1_check(&rho, &model).unwrap();
            assert!(gap.abs() <= 1e-7, "seed {seed}: gap {gap}");
        }
    }

    #[test]
    fn prop3_identity_perturbation() {
        let mut rng = stream_rng(107, &[]);
        let rho = random_density(2, &mut rng);
        let model = ModelClass::spectral_floor(2, 0.1).unwrap();
        let eps = qmlp(&rho, &model).unwrap().value;
        let check = prop3_bound_check(&rho, &rho, &model, eps).unwrap();
        assert!(check.lhs_sq.abs() < 1e-12);
        assert!(check.holds);
    }

    #[test]
    fn prop3_full_class_reduces_to_pinsker() {
        let mut rng = stream_rng(109, &[]);
        let rho = random_density(2, &mut rng);
        let rho_tilde = random_density(2, &mut rng);
        let check =
            prop3_bound_check(&rho, &rho_tilde, &ModelClass::Full { dim: 2 }, 0.0).unwrap();
        let d1 = trace_norm(&rho_tilde.matrix().sub(rho.matrix()).unwrap()).unwrap();
        assert!((check.lhs_sq - d1 * d1).abs() < 1e-10);
        let expect_rhs = 4.0 * qre(&rho_tilde, &rho).unwrap() + 4.0 * d1 * d1;
        assert!((check.rhs_sq - expect_rhs).abs() < 1e-10);
        assert!(check.holds);
    }

    #[test]
    fn prop3_sweep_spectral_floor() {
        for seed in 0..100u64 {
            let mut rng = stream_rng(seed, &[0x70_33]);
            let d = 2 + (seed % 2) as usize;
            let rho = random_density(d, &mut rng);
            let rho_tilde = random_density(d, &mut rng);
            let model = ModelClass::spectral_floor(d, 0.5 / d as f64).unwrap();
            let eps = qmlp(&rho, &model).unwrap().value;
            let check = prop3_bound_check(&rho, &rho_tilde, &model, eps).unwrap();
            assert!(check.holds, "seed {seed}: {check:?}");
        }
    }

    #[test]
    fn prop3_rejects_undersized_epsilon() {
        let rho = DensityOperator::new(HermitianMatrix::from_diag(&[0.95, 0.05])).unwrap();
        let model = ModelClass::spectral_floor(2, 0.3).unwrap();
        assert!(matches!(
            prop3_bound_check(&rho, &rho, &model, 0.0).unwrap_err(),
            Error::Precondition(_)
        ));
    }

    #[test]
    fn diagonal_family_membership_residual() {
        let basis = OrthonormalBasis::computational(3);
        let family = MixtureFamily::diagonal_in_basis(&basis).unwrap();
        assert_eq!(family.operators().len(), 6);
        let member =
            DensityOperator::new(HermitianMatrix::from_diag(&[0.5, 0.3, 0.2])).unwrap();
        assert!(family.member_residual(&member).unwrap() < 1e-15);
        let mut rng = stream_rng(113, &[]);
        let generic = random_density(3, &mut rng);
        let residual = family.member_residual(&generic).unwrap();
        let diag = pinch_diagonal(&generic, &basis).unwrap();
        let pinched = DensityOperator::new(HermitianMatrix::from_diag(&diag)).unwrap();
        assert!(family.member_residual(&pinched).unwrap() < 1e-12);
        assert!(residual > 1e-3);
    }
}
