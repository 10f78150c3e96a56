//! Dense complex Hermitian linear algebra.
//!
//! Everything downstream (states, divergences, projections) reduces to the
//! primitives here: a cyclic Jacobi eigensolver for complex Hermitian
//! matrices, spectral matrix functions, and the trace/operator norms.
//! Matrices are stored densely in row-major order; the target regime is
//! d <= 64, so no sparse or blocked paths exist.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::EIGENVALUE_FLOOR;

/// Hermitian symmetry tolerance enforced on construction.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Row-major complex matrix product, both operands d x d.
pub(crate) fn matmul(a: &[Complex64], b: &[Complex64], d: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..d {
        for k in 0..d {
            let aik = a[i * d + k];
            if aik.norm_sqr() == 0.0 {
                continue;
            }
            for j in 0..d {
                out[i * d + j] += aik * b[k * d + j];
            }
        }
    }
    out
}

/// Conjugate transpose of a row-major d x d matrix.
pub(crate) fn adjoint(a: &[Complex64], d: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..d {
        for j in 0..d {
            out[j * d + i] = a[i * d + j].conj();
        }
    }
    out
}

pub(crate) fn identity_entries(d: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..d {
        out[i * d + i] = Complex64::new(1.0, 0.0);
    }
    out
}

/// Dense d x d complex Hermitian matrix, row-major.
///
/// Immutable after construction; Hermitian symmetry is checked within
/// [`HERMITICITY_TOL`] and the stored entries are symmetrized so that
/// `A[i][j] == conj(A[j][i])` holds exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl HermitianMatrix {
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dim must be >= 1".into()));
        }
        if entries.len() != dim * dim {
            return Err(Error::NotSquare {
                rows: dim,
                cols: entries.len() / dim.max(1),
            });
        }
        let mut residual: f64 = 0.0;
        for i in 0..dim {
            for j in i..dim {
                residual = residual.max((entries[i * dim + j] - entries[j * dim + i].conj()).norm());
            }
        }
        if residual > HERMITICITY_TOL {
            return Err(Error::NotHermitian { residual });
        }
        Ok(Self::symmetrized(dim, entries))
    }

    /// Symmetrize and wrap without the tolerance check. For internal
    /// construction of matrices that are Hermitian by algebra but carry
    /// floating-point dust above the strict constructor tolerance.
    pub(crate) fn symmetrized(dim: usize, mut entries: Vec<Complex64>) -> Self {
        for i in 0..dim {
            entries[i * dim + i] = Complex64::new(entries[i * dim + i].re, 0.0);
            for j in (i + 1)..dim {
                let avg = 0.5 * (entries[i * dim + j] + entries[j * dim + i].conj());
                entries[i * dim + j] = avg;
                entries[j * dim + i] = avg.conj();
            }
        }
        Self { dim, entries }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            entries: identity_entries(dim),
        }
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let d = diag.len();
        let mut entries = vec![Complex64::new(0.0, 0.0); d * d];
        for (i, &v) in diag.iter().enumerate() {
            entries[i * d + i] = Complex64::new(v, 0.0);
        }
        Self { dim: d, entries }
    }

    /// Rank-one projector-style outer product v v'.
    pub fn from_outer(v: &[Complex64]) -> Self {
        let d = v.len();
        let mut entries = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for j in 0..d {
                entries[i * d + j] = v[i] * v[j].conj();
            }
        }
        Self { dim: d, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim + j]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.entries[i * self.dim + i].re).sum()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self {
            dim: self.dim,
            entries,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self {
            dim: self.dim,
            entries,
        })
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|a| a * s).collect(),
        }
    }

    /// A*B. The product of two Hermitian matrices is not Hermitian in
    /// general, so the raw entries are returned.
    pub fn mul_raw(&self, other: &Self) -> Result<Vec<Complex64>> {
        self.check_dim(other)?;
        Ok(matmul(&self.entries, &other.entries, self.dim))
    }

    /// Operator norm of the commutator [A, B] = AB - BA.
    pub fn commutator_norm(&self, other: &Self) -> Result<f64> {
        let ab = self.mul_raw(other)?;
        let ba = other.mul_raw(self)?;
        let d = self.dim;
        let diff: Vec<Complex64> = ab.iter().zip(&ba).map(|(x, y)| x - y).collect();
        // i[A,B] is Hermitian; same spectrum magnitudes as [A,B].
        let scaled: Vec<Complex64> = diff.iter().map(|z| Complex64::new(0.0, 1.0) * z).collect();
        let h = Self::symmetrized(d, scaled);
        op_norm(&h)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_entry_diff(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Coordinates of A in the given basis: V' A V.
    pub fn in_basis(&self, basis: &OrthonormalBasis) -> Result<Self> {
        if basis.dim() != self.dim {
            return Err(Error::DimensionMismatch(self.dim, basis.dim()));
        }
        let vh = adjoint(basis.entries(), self.dim);
        let tmp = matmul(&self.entries, basis.entries(), self.dim);
        Ok(Self::symmetrized(self.dim, matmul(&vh, &tmp, self.dim)))
    }

    /// Inverse change of basis: V A V'.
    pub fn from_basis(&self, basis: &OrthonormalBasis) -> Result<Self> {
        if basis.dim() != self.dim {
            return Err(Error::DimensionMismatch(self.dim, basis.dim()));
        }
        let vh = adjoint(basis.entries(), self.dim);
        let tmp = matmul(&self.entries, &vh, self.dim);
        Ok(Self::symmetrized(
            self.dim,
            matmul(basis.entries(), &tmp, self.dim),
        ))
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        Ok(())
    }
}

/// Unitary matrix whose columns form an orthonormal basis. Row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis {
    dim: usize,
    entries: Vec<Complex64>,
}

impl OrthonormalBasis {
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::NotSquare {
                rows: dim,
                cols: entries.len() / dim.max(1),
            });
        }
        let vh = adjoint(&entries, dim);
        let gram = matmul(&vh, &entries, dim);
        let mut residual: f64 = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                let expect = if i == j { 1.0 } else { 0.0 };
                residual = residual.max((gram[i * dim + j] - expect).norm());
            }
        }
        if residual > 1e-10 {
            return Err(Error::NotOrthonormal { residual });
        }
        Ok(Self { dim, entries })
    }

    pub(crate) fn new_unchecked(dim: usize, entries: Vec<Complex64>) -> Self {
        Self { dim, entries }
    }

    pub fn computational(dim: usize) -> Self {
        Self {
            dim,
            entries: identity_entries(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// k-th basis vector (column k).
    pub fn column(&self, k: usize) -> Vec<Complex64> {
        (0..self.dim).map(|i| self.entries[i * self.dim + k]).collect()
    }

    /// True when the two bases span the same rank-one projector set, i.e.
    /// columns agree up to phase and order-preserving comparison.
    pub fn same_projectors(&self, other: &Self, tol: f64) -> bool {
        if self.dim != other.dim {
            return false;
        }
        for k in 0..self.dim {
            let a = HermitianMatrix::from_outer(&self.column(k));
            let b = HermitianMatrix::from_outer(&other.column(k));
            if a.max_abs_entry_diff(&b) > tol {
                return false;
            }
        }
        true
    }
}

/// Eigendecomposition A = V diag(lambda) V' with eigenvalues sorted
/// non-increasing, ties broken by original Jacobi index.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    basis: OrthonormalBasis,
}

impl SpectralDecomposition {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn basis(&self) -> &OrthonormalBasis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().expect("dim >= 1")
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// V diag(lambda) V'.
    pub fn reconstruct(&self) -> HermitianMatrix {
        self.map_eigenvalues(|x| x)
    }

    /// V diag(f(lambda)) V'.
    pub fn map_eigenvalues(&self, f: impl Fn(f64) -> f64) -> HermitianMatrix {
        let d = self.dim();
        let v = self.basis.entries();
        let mut entries = vec![Complex64::new(0.0, 0.0); d * d];
        for k in 0..d {
            let fk = f(self.eigenvalues[k]);
            if fk == 0.0 {
                continue;
            }
            for i in 0..d {
                let vik = v[i * d + k];
                for j in 0..d {
                    entries[i * d + j] += fk * vik * v[j * d + k].conj();
                }
            }
        }
        HermitianMatrix::symmetrized(d, entries)
    }

    /// Projector onto the span of eigenvectors with eigenvalue above the floor.
    pub fn support_projector(&self, floor: f64) -> HermitianMatrix {
        self.map_eigenvalues(|x| if x > floor { 1.0 } else { 0.0 })
    }

    pub fn rank(&self, floor: f64) -> usize {
        self.eigenvalues.iter().filter(|&&x| x > floor).count()
    }
}

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_REL_TOL: f64 = 1e-13;

/// Eigendecomposition of a complex Hermitian matrix by cyclic Jacobi
/// rotations. Converges when the off-diagonal Frobenius mass drops below
/// 1e-13 * ||A||_F; the cap is 100 sweeps.
pub fn eig_hermitian(a: &HermitianMatrix) -> Result<SpectralDecomposition> {
    let d = a.dim();
    let mut m: Vec<Complex64> = a.entries().to_vec();
    let mut v = identity_entries(d);

    let fro = a.frobenius_norm();
    let tol = JACOBI_REL_TOL * fro.max(f64::MIN_POSITIVE);

    let off = |m: &[Complex64]| -> f64 {
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    s += m[i * d + j].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut residual = off(&m);
    let mut sweeps = 0;
    while residual > tol && sweeps < JACOBI_MAX_SWEEPS {
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = m[p * d + q];
                let mag = apq.norm();
                if mag <= f64::MIN_POSITIVE {
                    continue;
                }
                let w = apq / mag; // phase e^{i phi}
                let app = m[p * d + p].re;
                let aqq = m[q * d + q].re;
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // G = I except G[p][p]=c, G[p][q]=s*w, G[q][p]=-s*conj(w), G[q][q]=c.
                // Column update: B = M G.
                for i in 0..d {
                    let mip = m[i * d + p];
                    let miq = m[i * d + q];
                    m[i * d + p] = mip * c - miq * s * w.conj();
                    m[i * d + q] = mip * s * w + miq * c;
                }
                // Row update: M = G' B.
                for j in 0..d {
                    let mpj = m[p * d + j];
                    let mqj = m[q * d + j];
                    m[p * d + j] = mpj * c - mqj * s * w;
                    m[q * d + j] = mpj * s * w.conj() + mqj * c;
                }
                m[p * d + q] = Complex64::new(0.0, 0.0);
                m[q * d + p] = Complex64::new(0.0, 0.0);
                m[p * d + p] = Complex64::new(m[p * d + p].re, 0.0);
                m[q * d + q] = Complex64::new(m[q * d + q].re, 0.0);
                // Accumulate eigenvectors: V = V G.
                for i in 0..d {
                    let vip = v[i * d + p];
                    let viq = v[i * d + q];
                    v[i * d + p] = vip * c - viq * s * w.conj();
                    v[i * d + q] = vip * s * w + viq * c;
                }
            }
        }
        residual = off(&m);
        sweeps += 1;
    }
    if residual > tol {
        return Err(Error::EigenFailure { residual, sweeps });
    }

    let mut order: Vec<usize> = (0..d).collect();
    let diag: Vec<f64> = (0..d).map(|i| m[i * d + i].re).collect();
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).unwrap().then(i.cmp(&j)));

    let eigenvalues: Vec<f64> = order.iter().map(|&k| diag[k]).collect();
    let mut cols = vec![Complex64::new(0.0, 0.0); d * d];
    for (new_k, &old_k) in order.iter().enumerate() {
        for i in 0..d {
            cols[i * d + new_k] = v[i * d + old_k];
        }
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        basis: OrthonormalBasis::new_unchecked(d, cols),
    })
}

/// Support handling for spectral functions whose scalar map blows up at 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupportPolicy {
    /// Apply f to every eigenvalue; non-finite output is a support violation.
    Strict,
    /// Apply f only above the eigenvalue floor; the kernel block maps to zero.
    Project,
}

/// V diag(f(lambda)) V' with the given kernel policy.
pub fn matrix_fn(
    a: &HermitianMatrix,
    f: impl Fn(f64) -> f64,
    policy: SupportPolicy,
) -> Result<HermitianMatrix> {
    let dec = eig_hermitian(a)?;
    match policy {
        SupportPolicy::Strict => {
            for &lam in dec.eigenvalues() {
                let y = f(lam);
                if !y.is_finite() {
                    return Err(Error::SupportViolation { eigenvalue: lam });
                }
            }
            Ok(dec.map_eigenvalues(f))
        }
        SupportPolicy::Project => Ok(dec.map_eigenvalues(|x| {
            if x > EIGENVALUE_FLOOR {
                f(x)
            } else {
                0.0
            }
        })),
    }
}

/// Sum of absolute eigenvalues (Schatten-1 norm).
pub fn trace_norm(a: &HermitianMatrix) -> Result<f64> {
    Ok(eig_hermitian(a)?.eigenvalues().iter().map(|x| x.abs()).sum())
}

/// Largest absolute eigenvalue (spectral norm).
pub fn op_norm(a: &HermitianMatrix) -> Result<f64> {
    Ok(eig_hermitian(a)?
        .eigenvalues()
        .iter()
        .fold(0.0, |acc, x| acc.max(x.abs())))
}

/// Hilbert-Schmidt inner product tr(A'B); real when both are Hermitian.
pub fn hs_inner(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<Complex64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, y) in a.entries().iter().zip(b.entries()) {
        acc += x.conj() * y;
    }
    Ok(acc)
}

/// Frechet derivative of the matrix exponential at A in direction E, via
/// divided differences of exp over A's eigenbasis.
pub fn frechet_exp(dec: &SpectralDecomposition, e: &HermitianMatrix) -> Result<HermitianMatrix> {
    let d = dec.dim();
    if e.dim() != d {
        return Err(Error::DimensionMismatch(d, e.dim()));
    }
    let w = e.in_basis(dec.basis())?;
    let lam = dec.eigenvalues();
    let mut entries = w.entries().to_vec();
    for i in 0..d {
        for j in 0..d {
            let (a, b) = (lam[i], lam[j]);
            let phi = if (a - b).abs() < 1e-9 {
                // symmetric form stays accurate through the confluent limit
                ((a + b) / 2.0).exp() * sinhc((a - b) / 2.0)
            } else {
                (a.exp() - b.exp()) / (a - b)
            };
            entries[i * d + j] *= phi;
        }
    }
    HermitianMatrix::symmetrized(d, entries).from_basis(dec.basis())
}

fn sinhc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 + x * x / 6.0
    } else {
        x.sinh() / x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{random_hermitian, stream_rng};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eig_diagonal_sorts_non_increasing() {
        let a = HermitianMatrix::from_diag(&[3.0, 1.0, 2.0]);
        let dec = eig_hermitian(&a).unwrap();
        assert_eq!(dec.eigenvalues(), &[3.0, 2.0, 1.0]);
        // columns are permuted standard basis vectors
        for k in 0..3 {
            let col = dec.basis().column(k);
            let ones = col.iter().filter(|z| (z.norm() - 1.0).abs() < 1e-12).count();
            assert_eq!(ones, 1);
        }
    }

    #[test]
    fn eig_pauli_x() {
        let a = HermitianMatrix::new(2, vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
            .unwrap();
        let dec = eig_hermitian(&a).unwrap();
        assert!((dec.eigenvalues()[0] - 1.0).abs() < 1e-12);
        assert!((dec.eigenvalues()[1] + 1.0).abs() < 1e-12);
        let plus = dec.basis().column(0);
        // (1,1)/sqrt(2) up to phase: components have equal magnitude
        assert!((plus[0].norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-10);
        assert!((plus[1].norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-10);
    }

    #[test]
    fn eig_random_reconstruction_residual() {
        let mut rng = stream_rng(7, &[]);
        let a = random_hermitian(5, &mut rng);
        let dec = eig_hermitian(&a).unwrap();
        let rec = dec.reconstruct();
        let diff = rec.sub(&a).unwrap();
        let scale = op_norm(&a).unwrap().max(1.0);
        assert!(op_norm(&diff).unwrap() <= 1e-10 * scale);
        // orthonormality of the basis
        OrthonormalBasis::new(5, dec.basis().entries().to_vec()).unwrap();
    }

    #[test]
    fn matrix_fn_exp_of_zero_is_identity() {
        let z = HermitianMatrix::zeros(3);
        let e = matrix_fn(&z, f64::exp, SupportPolicy::Strict).unwrap();
        assert!(e.max_abs_entry_diff(&HermitianMatrix::identity(3)) < 1e-12);
    }

    #[test]
    fn matrix_fn_log_diagonal() {
        let a = HermitianMatrix::from_diag(&[std::f64::consts::E, std::f64::consts::E.powi(2)]);
        let l = matrix_fn(&a, f64::ln, SupportPolicy::Strict).unwrap();
        assert!(l.max_abs_entry_diff(&HermitianMatrix::from_diag(&[1.0, 2.0])) < 1e-12);
    }

    #[test]
    fn matrix_fn_exp_log_roundtrip() {
        let mut rng = stream_rng(11, &[]);
        let rho = crate::rng::random_density(4, &mut rng);
        let m = rho.matrix();
        let lg = matrix_fn(m, f64::ln, SupportPolicy::Strict).unwrap();
        let back = matrix_fn(&lg, f64::exp, SupportPolicy::Strict).unwrap();
        assert!(back.max_abs_entry_diff(m) < 1e-10);
    }

    #[test]
    fn matrix_fn_strict_rejects_log_of_singular() {
        let a = HermitianMatrix::from_diag(&[1.0, 0.0]);
        let err = matrix_fn(&a, f64::ln, SupportPolicy::Strict).unwrap_err();
        assert!(matches!(err, Error::SupportViolation { .. }));
        // project policy maps the kernel to zero
        let l = matrix_fn(&a, f64::ln, SupportPolicy::Project).unwrap();
        assert!(l.max_abs_entry_diff(&HermitianMatrix::zeros(2)) < 1e-12);
    }

    #[test]
    fn matrix_fn_identity_map_is_identity() {
        let mut rng = stream_rng(2, &[]);
        let a = random_hermitian(4, &mut rng);
        let b = matrix_fn(&a, |x| x, SupportPolicy::Strict).unwrap();
        assert!(b.max_abs_entry_diff(&a) < 1e-12 * a.frobenius_norm().max(1.0));
    }

    #[test]
    fn trace_norm_examples() {
        let a = HermitianMatrix::from_diag(&[1.0, -1.0]);
        assert!((trace_norm(&a).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(trace_norm(&HermitianMatrix::zeros(3)).unwrap(), 0.0);
    }

    #[test]
    fn trace_norm_matches_spectral_sum() {
        let mut rng = stream_rng(3, &[]);
        let a = random_hermitian(4, &mut rng);
        let t = a.trace() / 4.0;
        let traceless = a.sub(&HermitianMatrix::identity(4).scale(t)).unwrap();
        let dec = eig_hermitian(&traceless).unwrap();
        let oracle: f64 = dec.eigenvalues().iter().map(|x| x.abs()).sum();
        assert!((trace_norm(&traceless).unwrap() - oracle).abs() < 1e-12);
    }

    #[test]
    fn op_norm_examples() {
        assert!((op_norm(&HermitianMatrix::identity(4)).unwrap() - 1.0).abs() < 1e-12);
        let a = HermitianMatrix::from_diag(&[-3.0, 2.0]);
        assert!((op_norm(&a).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn op_norm_agrees_with_power_iteration() {
        let mut rng = stream_rng(5, &[]);
        let a = random_hermitian(5, &mut rng);
        // power iteration on A^2 to handle sign-indefinite spectra
        let d = a.dim();
        let a2 = HermitianMatrix::symmetrized(d, a.mul_raw(&a).unwrap());
        let mut v: Vec<Complex64> = (0..d).map(|i| c(1.0 / ((i + 1) as f64), 0.0)).collect();
        let mut lam = 0.0;
        for _ in 0..10_000 {
            let mut w = vec![c(0.0, 0.0); d];
            for i in 0..d {
                for j in 0..d {
                    w[i] += a2.get(i, j) * v[j];
                }
            }
            let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            lam = norm;
            for z in &mut w {
                *z /= norm;
            }
            v = w;
        }
        assert!((op_norm(&a).unwrap() - lam.sqrt()).abs() < 1e-8);
    }

    #[test]
    fn hs_inner_examples() {
        let i3 = HermitianMatrix::identity(3);
        assert!((hs_inner(&i3, &i3).unwrap().re - 3.0).abs() < 1e-12);
        let a = HermitianMatrix::from_diag(&[1.0, 0.0]);
        let b = HermitianMatrix::from_diag(&[0.0, 1.0]);
        assert!(hs_inner(&a, &b).unwrap().norm() < 1e-12);
    }

    #[test]
    fn hs_inner_matches_entrywise_sum() {
        let mut rng = stream_rng(9, &[]);
        let a = random_hermitian(4, &mut rng);
        let b = random_hermitian(4, &mut rng);
        let mut oracle = c(0.0, 0.0);
        for (x, y) in a.entries().iter().zip(b.entries()) {
            oracle += x.conj() * y;
        }
        assert!((hs_inner(&a, &b).unwrap() - oracle).norm() < 1e-12);
    }

    #[test]
    fn norm_sandwich_holds() {
        for seed in 0..50u64 {
            let mut rng = stream_rng(seed, &[1]);
            let d = 2 + (seed % 3) as usize;
            let a = random_hermitian(d, &mut rng);
            let t1 = trace_norm(&a).unwrap();
            let op = op_norm(&a).unwrap();
            assert!(t1 + 1e-12 >= op);
            assert!(t1 <= d as f64 * op + 1e-12);
        }
    }

    #[test]
    fn non_hermitian_rejected() {
        let err = HermitianMatrix::new(2, vec![c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(0.0, 0.0)])
            .unwrap_err();
        assert!(matches!(err, Error::NotHermitian { .. }));
    }

    #[test]
    fn frechet_exp_matches_finite_difference() {
        let mut rng = stream_rng(33, &[]);
        let a = random_hermitian(3, &mut rng);
        let e = random_hermitian(3, &mut rng);
        let dec = eig_hermitian(&a).unwrap();
        let dexp = frechet_exp(&dec, &e).unwrap();
        let h = 1e-6;
        let plus = matrix_fn(&a.add(&e.scale(h)).unwrap(), f64::exp, SupportPolicy::Strict).unwrap();
        let minus =
            matrix_fn(&a.sub(&e.scale(h)).unwrap(), f64::exp, SupportPolicy::Strict).unwrap();
        let fd = plus.sub(&minus).unwrap().scale(0.5 / h);
        assert!(dexp.max_abs_entry_diff(&fd) < 1e-5);
    }
}
