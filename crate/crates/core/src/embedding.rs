//! Feature maps from a finite alphabet to unit vectors and the covariance
//! embedding of pmfs and samples into density operators.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::density::{DensityOperator, ProbabilityVector};
use crate::error::{Error, Result};
use crate::hermitian::{eig_hermitian, HermitianMatrix};
use crate::rng::stream_rng;

const UNIT_NORM_TOL: f64 = 1e-12;
/// Gram-matrix rank detection threshold for span reduction.
pub const SPAN_RANK_TOL: f64 = 1e-10;

/// Map from a finite alphabet into unit-norm vectors of a complex
/// Hilbert space of dimension `dim`.
#[derive(Debug, Clone)]
pub struct FeatureEmbedding {
    dim: usize,
    vectors: Vec<Vec<Complex64>>,
}

/// Embedding family selector for [`make_embedding`].
#[derive(Debug, Clone)]
pub enum EmbeddingKind {
    /// Standard basis vectors; the orthogonal-embedding scenario.
    Onehot,
    /// Constant pairwise inner product cos(angle): one shared axis plus
    /// per-symbol orthonormal perturbations of equal magnitude. angle = 0
    /// collapses every symbol to the same vector.
    SimplexCap { angle: f64 },
    /// Normalized cosine features with seeded Gaussian frequencies.
    Fourier { bandwidth: f64 },
    /// User-supplied vectors, validated for unit norm.
    Explicit { vectors: Vec<Vec<Complex64>> },
}

impl FeatureEmbedding {
    pub fn new(vectors: Vec<Vec<Complex64>>) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::InvalidParameter("embedding needs at least one symbol".into()));
        }
        let dim = vectors[0].len();
        if dim == 0 {
            return Err(Error::InvalidParameter("embedding dimension must be >= 1".into()));
        }
        for (x, v) in vectors.iter().enumerate() {
            if v.len() != dim {
                return Err(Error::DimensionMismatch(dim, v.len()));
            }
            let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > UNIT_NORM_TOL {
                return Err(Error::InvalidParameter(format!(
                    "feature vector for symbol {x} has norm {norm}"
                )));
            }
        }
        Ok(Self { dim, vectors })
    }

    pub fn alphabet_size(&self) -> usize {
        self.vectors.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vector(&self, x: usize) -> &[Complex64] {
        &self.vectors[x]
    }

    /// Gram matrix K[x][y] = <phi(x), phi(y)>.
    pub fn gram(&self) -> HermitianMatrix {
        let n = self.alphabet_size();
        let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
        for x in 0..n {
            for y in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..self.dim {
                    acc += self.vectors[x][k].conj() * self.vectors[y][k];
                }
                entries[x * n + y] = acc;
            }
        }
        HermitianMatrix::symmetrized(n, entries)
    }

    /// Re-express the features in an orthonormal basis of their span,
    /// detected from the Gram matrix at threshold [`SPAN_RANK_TOL`]. The
    /// result has dimension = rank and identical pairwise inner products.
    pub fn reduce_to_span(&self) -> Result<FeatureEmbedding> {
        let n = self.alphabet_size();
        let gram = self.gram();
        let dec = eig_hermitian(&gram)?;
        let rank = dec.rank(SPAN_RANK_TOL);
        if rank == 0 {
            return Err(Error::InvalidParameter("embedding has zero numerical rank".into()));
        }
        let u = dec.basis();
        let lam = dec.eigenvalues();
        let mut vectors = Vec::with_capacity(n);
        for x in 0..n {
            let mut psi = vec![Complex64::new(0.0, 0.0); rank];
            for (k, coord) in psi.iter_mut().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for y in 0..n {
                    acc += u.column(k)[y].conj() * gram.get(y, x);
                }
                *coord = acc / lam[k].sqrt();
            }
            // unit norm up to Gram dust; renormalize to honor the invariant
            let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for z in &mut psi {
                *z /= norm;
            }
            vectors.push(psi);
        }
        FeatureEmbedding::new(vectors)
    }
}

/// Construct one of the named embedding families.
pub fn make_embedding(
    kind: EmbeddingKind,
    alphabet_size: usize,
    dim: usize,
    seed: u64,
) -> Result<FeatureEmbedding> {
    if alphabet_size == 0 {
        return Err(Error::InvalidParameter("alphabet_size must be >= 1".into()));
    }
    match kind {
        EmbeddingKind::Onehot => {
            if dim < alphabet_size {
                return Err(Error::InvalidParameter(format!(
                    "onehot embedding needs dim >= alphabet_size ({dim} < {alphabet_size})"
                )));
            }
            let vectors = (0..alphabet_size)
                .map(|x| {
                    let mut v = vec![Complex64::new(0.0, 0.0); dim];
                    v[x] = Complex64::new(1.0, 0.0);
                    v
                })
                .collect();
            FeatureEmbedding::new(vectors)
        }
        EmbeddingKind::SimplexCap { angle } => {
            if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&angle) {
                return Err(Error::InvalidParameter(format!(
                    "simplex_cap angle {angle} outside [0, pi/2]"
                )));
            }
            let c = angle.cos();
            if angle == 0.0 {
                let mut v = vec![Complex64::new(0.0, 0.0); dim.max(1)];
                v[0] = Complex64::new(1.0, 0.0);
                return FeatureEmbedding::new(vec![v; alphabet_size]);
            }
            if dim < alphabet_size + 1 {
                return Err(Error::InvalidParameter(format!(
                    "simplex_cap with angle > 0 needs dim >= alphabet_size + 1 ({dim} < {})",
                    alphabet_size + 1
                )));
            }
            let a = c.sqrt();
            let b = (1.0 - c).sqrt();
            let vectors = (0..alphabet_size)
                .map(|x| {
                    let mut v = vec![Complex64::new(0.0, 0.0); dim];
                    v[0] = Complex64::new(a, 0.0);
                    v[x + 1] = Complex64::new(b, 0.0);
                    v
                })
                .collect();
            FeatureEmbedding::new(vectors)
        }
        EmbeddingKind::Fourier { bandwidth } => {
            if bandwidth <= 0.0 {
                return Err(Error::InvalidParameter("fourier bandwidth must be > 0".into()));
            }
            let mut rng = stream_rng(seed, &[0xf0u64]);
            let freqs: Vec<f64> = (0..dim)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    z * bandwidth
                })
                .collect();
            let phases: Vec<f64> = (0..dim)
                .map(|_| rng.gen::<f64>() * std::f64::consts::TAU)
                .collect();
            let vectors = (0..alphabet_size)
                .map(|x| {
                    let raw: Vec<f64> = (0..dim)
                        .map(|k| (freqs[k] * x as f64 + phases[k]).cos())
                        .collect();
                    let norm: f64 = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
                    if norm < 1e-12 {
                        return Err(Error::InvalidParameter(format!(
                            "fourier feature for symbol {x} has vanishing norm"
                        )));
                    }
                    Ok(raw.iter().map(|&v| Complex64::new(v / norm, 0.0)).collect())
                })
                .collect::<Result<_>>()?;
            FeatureEmbedding::new(vectors)
        }
        EmbeddingKind::Explicit { vectors } => {
            if vectors.len() != alphabet_size {
                return Err(Error::DimensionMismatch(alphabet_size, vectors.len()));
            }
            if vectors.first().map(|v| v.len()) != Some(dim) {
                return Err(Error::DimensionMismatch(
                    dim,
                    vectors.first().map(|v| v.len()).unwrap_or(0),
                ));
            }
            FeatureEmbedding::new(vectors)
        }
    }
}

/// Covariance embedding rho_p = sum_x p(x) |phi(x)><phi(x)|.
pub fn covariance_embed(p: &ProbabilityVector, emb: &FeatureEmbedding) -> Result<DensityOperator> {
    if p.len() != emb.alphabet_size() {
        return Err(Error::DimensionMismatch(p.len(), emb.alphabet_size()));
    }
    let d = emb.dim();
    let mut entries = vec![Complex64::new(0.0, 0.0); d * d];
    for (x, &px) in p.weights().iter().enumerate() {
        if px == 0.0 {
            continue;
        }
        let v = emb.vector(x);
        for i in 0..d {
            let vi = px * v[i];
            for j in 0..d {
                entries[i * d + j] += vi * v[j].conj();
            }
        }
    }
    Ok(DensityOperator::from_trusted(HermitianMatrix::symmetrized(
        d, entries,
    )))
}

/// A drawn sequence of alphabet indices together with its histogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalSample {
    pub symbols: Vec<usize>,
    pub counts: Vec<usize>,
}

impl EmpiricalSample {
    pub fn from_symbols(symbols: Vec<usize>, alphabet_size: usize) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::InvalidParameter("empty sample".into()));
        }
        let mut counts = vec![0usize; alphabet_size];
        for &s in &symbols {
            if s >= alphabet_size {
                return Err(Error::InvalidParameter(format!(
                    "symbol index {s} out of range for alphabet of size {alphabet_size}"
                )));
            }
            counts[s] += 1;
        }
        Ok(Self { symbols, counts })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn empirical_pmf(&self) -> ProbabilityVector {
        let n = self.symbols.len() as f64;
        ProbabilityVector::normalized(self.counts.iter().map(|&c| c as f64 / n).collect())
            .expect("histogram of a non-empty sample")
    }
}

/// Embedding of the empirical distribution of a sample; equals
/// [`covariance_embed`] of the histogram pmf.
pub fn empirical_embed(sample: &EmpiricalSample, emb: &FeatureEmbedding) -> Result<DensityOperator> {
    if sample.counts.len() != emb.alphabet_size() {
        return Err(Error::DimensionMismatch(sample.counts.len(), emb.alphabet_size()));
    }
    covariance_embed(&sample.empirical_pmf(), emb)
}

/// (1 - 1/n) rho_hat + (1/n) pi_d; strictly positive with minimum
/// eigenvalue at least 1/(n d).
pub fn perturbed_empirical(rho_hat: &DensityOperator, n: usize) -> Result<DensityOperator> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    let d = rho_hat.dim();
    rho_hat.mix(&crate::density::maximally_mixed(d), 1.0 - 1.0 / n as f64)
}

/// n i.i.d. draws from p via inverse CDF on a seeded counter-based stream.
/// Identical (p, n, seed) reproduces identical samples bit for bit.
pub fn sample_iid(p: &ProbabilityVector, n: usize, seed: u64) -> Result<EmpiricalSample> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    let mut cdf = Vec::with_capacity(p.len());
    let mut acc = 0.0;
    for &w in p.weights() {
        acc += w;
        cdf.push(acc);
    }
    let mut rng = stream_rng(seed, &[0x5a_6d_70]);
    let symbols: Vec<usize> = (0..n)
        .map(|_| {
            let u: f64 = rng.gen();
            cdf.partition_point(|&c| c < u).min(p.len() - 1)
        })
        .collect();
    EmpiricalSample::from_symbols(symbols, p.len())
}

/// On-disk schema for explicit embeddings:
/// `{"dim": d, "vectors": [[[re, im], ...], ...]}` with one vector per symbol.
#[derive(Debug, Serialize, Deserialize)]
pub struct EmbeddingJson {
    pub dim: usize,
    pub vectors: Vec<Vec<[f64; 2]>>,
}

impl EmbeddingJson {
    pub fn from_embedding(emb: &FeatureEmbedding) -> Self {
        Self {
            dim: emb.dim(),
            vectors: (0..emb.alphabet_size())
                .map(|x| emb.vector(x).iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
    }

    pub fn into_embedding(self) -> Result<FeatureEmbedding> {
        let vectors: Vec<Vec<Complex64>> = self
            .vectors
            .into_iter()
            .map(|v| v.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
            .collect();
        let emb = FeatureEmbedding::new(vectors)?;
        if emb.dim() != self.dim {
            return Err(Error::DimensionMismatch(self.dim, emb.dim()));
        }
        Ok(emb)
    }
}

pub fn load_embedding_json(path: &std::path::Path) -> Result<FeatureEmbedding> {
    let text = std::fs::read_to_string(path)?;
    let parsed: EmbeddingJson = serde_json::from_str(&text)?;
    parsed.into_embedding()
}
