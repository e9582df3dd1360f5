//! Singular value decompositions of the normalized interaction matrix and
//! spectrum diagnostics.

use std::io::Write;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{NormalizedMatrix, DENSE_CAP};

/// Singular values below this fraction of the largest are treated as zero.
pub const PRUNE_RELATIVE: f64 = 1e-12;
/// Maximum tolerated `|XᵀX - I|` entry for returned singular vectors.
pub const ORTHONORMALITY_TOL: f64 = 1e-8;

pub const DEFAULT_OVERSAMPLE: usize = 8;
pub const DEFAULT_POWER_ITERS: usize = 8;

/// Top singular triplets, `sigma` descending and strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSpectrum {
    sigma: Vec<f64>,
    sigma_normalized: Vec<f64>,
    left: DMatrix<f64>,
    right: DMatrix<f64>,
}

impl TruncatedSpectrum {
    /// Assembles a spectrum from raw factors: sorts, prunes near-zero values
    /// and fixes signs so the largest-magnitude entry of each left vector is positive.
    pub fn from_parts(sigma: Vec<f64>, left: DMatrix<f64>, right: DMatrix<f64>) -> Self {
        assert_eq!(sigma.len(), left.ncols());
        assert_eq!(sigma.len(), right.ncols());
        let mut order: Vec<usize> = (0..sigma.len()).collect();
        order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]));
        let top = order.first().map_or(0.0, |&k| sigma[k]);
        let kept: Vec<usize> = order
            .into_iter()
            .filter(|&k| sigma[k] > 0.0 && sigma[k] > PRUNE_RELATIVE * top)
            .collect();

        let mut p = DMatrix::zeros(left.nrows(), kept.len());
        let mut q = DMatrix::zeros(right.nrows(), kept.len());
        let mut s = Vec::with_capacity(kept.len());
        for (dst, &src) in kept.iter().enumerate() {
            let pc = left.column(src);
            let mut pivot = 0;
            for r in 0..pc.len() {
                if pc[r].abs() > pc[pivot].abs() {
                    pivot = r;
                }
            }
            let sign = if pc.len() > 0 && pc[pivot] < 0.0 { -1.0 } else { 1.0 };
            p.set_column(dst, &(pc * sign));
            q.set_column(dst, &(right.column(src) * sign));
            s.push(sigma[src]);
        }
        let head = s.first().copied().unwrap_or(1.0);
        let sigma_normalized = s.iter().map(|v| v / head).collect();
        TruncatedSpectrum {
            sigma: s,
            sigma_normalized,
            left: p,
            right: q,
        }
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// `σ_k / σ_1`.
    pub fn sigma_normalized(&self) -> &[f64] {
        &self.sigma_normalized
    }

    /// Left singular vectors, `|U| × K`.
    pub fn left(&self) -> &DMatrix<f64> {
        &self.left
    }

    /// Right singular vectors, `|I| × K`.
    pub fn right(&self) -> &DMatrix<f64> {
        &self.right
    }

    /// Keeps the leading `k` components.
    pub fn truncate(&self, k: usize) -> Self {
        let k = k.min(self.len());
        let head = self.sigma.first().copied().unwrap_or(1.0);
        TruncatedSpectrum {
            sigma: self.sigma[..k].to_vec(),
            sigma_normalized: self.sigma[..k].iter().map(|v| v / head).collect(),
            left: self.left.columns(0, k).into_owned(),
            right: self.right.columns(0, k).into_owned(),
        }
    }

    /// Flips the stored sign of component `k` on both sides.
    pub fn flip_sign(&mut self, k: usize) {
        self.left.column_mut(k).neg_mut();
        self.right.column_mut(k).neg_mut();
    }

    pub fn orthonormality_error(&self) -> f64 {
        orthonormality_error(&self.left).max(orthonormality_error(&self.right))
    }

    /// CSV with columns `k,sigma,sigma_normalized` (k is 1-based).
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["k", "sigma", "sigma_normalized"])?;
        for (k, (s, n)) in self.sigma.iter().zip(&self.sigma_normalized).enumerate() {
            wtr.write_record([(k + 1).to_string(), s.to_string(), n.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// `max |XᵀX − I|`.
pub fn orthonormality_error(x: &DMatrix<f64>) -> f64 {
    let g = x.tr_mul(x);
    let mut worst = 0.0f64;
    for c in 0..g.ncols() {
        for r in 0..g.nrows() {
            let target = if r == c { 1.0 } else { 0.0 };
            worst = worst.max((g[(r, c)] - target).abs());
        }
    }
    worst
}

/// Exact decomposition through a dense SVD. Used as the reference oracle.
pub fn dense_svd(norm: &NormalizedMatrix) -> Result<TruncatedSpectrum> {
    let side = norm.n_users().min(norm.n_items());
    if side > DENSE_CAP {
        return Err(Error::SizeCap {
            requested: side,
            cap: DENSE_CAP,
        });
    }
    dense_svd_of(&norm.matrix().to_dense())
}

/// Thin SVD `m = U diag(s) Vᵀ` with `s` descending.
///
/// Backed by faer: nalgebra 0.35's SVD returns wrong singular values for
/// some exactly rank-deficient inputs (e.g. the constant 5×5 matrix).
pub fn thin_svd(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, Vec<f64>, DMatrix<f64>)> {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return Ok((DMatrix::zeros(r, 0), Vec::new(), DMatrix::zeros(c, 0)));
    }
    let fm = faer::Mat::<f64>::from_fn(r, c, |i, j| m[(i, j)]);
    let svd = fm
        .thin_svd()
        .map_err(|_| Error::ConvergenceFailure { deviation: f64::NAN })?;
    let (u, v) = (svd.U(), svd.V());
    let s = svd.S().column_vector();
    let k = s.nrows();
    Ok((
        DMatrix::from_fn(r, k, |i, j| u[(i, j)]),
        (0..k).map(|j| s[j]).collect(),
        DMatrix::from_fn(c, k, |i, j| v[(i, j)]),
    ))
}

/// Full SVD of an arbitrary dense matrix in spectrum form.
pub fn dense_svd_of(m: &DMatrix<f64>) -> Result<TruncatedSpectrum> {
    let (u, s, v) = thin_svd(m)?;
    Ok(TruncatedSpectrum::from_parts(s, u, v))
}

/// Orthonormal basis of the column space of `y`. Cholesky-QR applied twice
/// with a Householder fallback when the Gram matrix is too ill-conditioned.
fn orthonormalize(y: &DMatrix<f64>) -> DMatrix<f64> {
    fn chol_step(y: &DMatrix<f64>) -> Option<DMatrix<f64>> {
        let gram = y.tr_mul(y);
        let chol = gram.cholesky()?;
        let r = chol.l().transpose();
        // Q = Y R⁻¹, i.e. solve Rᵀ Qᵀ = Yᵀ
        let qt = chol.l().solve_lower_triangular(&y.transpose())?;
        let q = qt.transpose();
        if q.iter().all(|v| v.is_finite()) && r.iter().all(|v| v.is_finite()) {
            Some(q)
        } else {
            None
        }
    }
    if let Some(q) = chol_step(y).and_then(|q1| chol_step(&q1)) {
        if orthonormality_error(&q) <= 1e-12 {
            return q;
        }
    }
    y.clone().qr().q()
}

/// Parameters of the randomized decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct SvdParams {
    pub k: usize,
    pub oversample: usize,
    pub power_iters: usize,
    pub seed: u64,
    /// Column budget for the Rayleigh–Ritz basis built from the most recent
    /// iterates; at least two iterates are always kept. `0` keeps only the last one.
    #[serde(default = "default_krylov_width")]
    pub krylov_width: usize,
}

fn default_krylov_width() -> usize {
    DEFAULT_KRYLOV_WIDTH
}

pub const DEFAULT_KRYLOV_WIDTH: usize = 256;

impl SvdParams {
    pub fn new(k: usize, seed: u64) -> Self {
        SvdParams {
            k,
            oversample: DEFAULT_OVERSAMPLE,
            power_iters: DEFAULT_POWER_ITERS,
            seed,
            krylov_width: DEFAULT_KRYLOV_WIDTH,
        }
    }
}

/// Orthonormal columns spanning the part of `block` outside `basis`.
/// Directions already represented to within 1e-10 are dropped.
fn deflate_block(basis: &DMatrix<f64>, block: &DMatrix<f64>) -> DMatrix<f64> {
    let project_out = |m: &mut DMatrix<f64>| {
        if basis.ncols() > 0 {
            for _ in 0..2 {
                let coeffs = basis.tr_mul(m);
                *m -= basis * coeffs;
            }
        }
    };
    let mut r = block.clone();
    project_out(&mut r);
    let eig = r.tr_mul(&r).symmetric_eigen();
    let keep: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&j| eig.eigenvalues[j] > 1e-20)
        .collect();
    if keep.is_empty() {
        return DMatrix::zeros(block.nrows(), 0);
    }
    let mut scaled = DMatrix::zeros(r.ncols(), keep.len());
    for (dst, &j) in keep.iter().enumerate() {
        scaled.set_column(dst, &(eig.eigenvectors.column(j) / eig.eigenvalues[j].sqrt()));
    }
    let mut q = &r * scaled;
    project_out(&mut q);
    orthonormalize(&q)
}

/// Randomized subspace iteration for the top `k` singular triplets.
///
/// Starts from a Gaussian sketch of width `k + oversample` and alternates
/// multiplications by `R̃ᵀ` and `R̃`, re-orthonormalizing after each product.
/// The final Rayleigh–Ritz step projects onto the span of the last few
/// iterates (a block Krylov window) rather than the last iterate alone.
pub fn truncated_svd(norm: &NormalizedMatrix, params: &SvdParams) -> Result<TruncatedSpectrum> {
    let a = norm.matrix();
    let at = norm.transposed();
    let (nu, ni) = (a.n_rows(), a.n_cols());
    let max_k = nu.min(ni);
    if params.k == 0 {
        return Err(Error::config("K", "must be >= 1"));
    }
    if params.k > max_k {
        return Err(Error::KTooLarge {
            k: params.k,
            max: max_k,
        });
    }
    if params.oversample < 4 {
        return Err(Error::config("oversample", "must be >= 4"));
    }
    if params.power_iters < 1 {
        return Err(Error::config("power_iters", "must be >= 1"));
    }
    let width = (params.k + params.oversample).min(max_k);
    let window = if params.krylov_width == 0 {
        1
    } else {
        (params.krylov_width / width).max(2)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let omega = DMatrix::from_fn(ni, width, |_, _| StandardNormal.sample(&mut rng));
    let mut iterates = std::collections::VecDeque::with_capacity(window + 1);
    iterates.push_back(orthonormalize(&a.mul_dense(&omega)));
    for _ in 0..params.power_iters {
        let z = orthonormalize(&at.mul_dense(iterates.back().expect("non-empty")));
        iterates.push_back(orthonormalize(&a.mul_dense(&z)));
        if iterates.len() > window {
            iterates.pop_front();
        }
    }

    let mut basis = DMatrix::zeros(nu, 0);
    for block in iterates.iter().rev() {
        if basis.ncols() >= nu {
            break;
        }
        let fresh = deflate_block(&basis, block);
        if fresh.ncols() == 0 {
            continue;
        }
        let old = basis.ncols();
        basis = basis.resize_horizontally(old + fresh.ncols(), 0.0);
        basis.columns_mut(old, fresh.ncols()).copy_from(&fresh);
    }

    // R̃ ≈ B Bᵀ R̃ = B Cᵀ with C = R̃ᵀ B = Qc Rc
    let c = at.mul_dense(&basis);
    let qc = orthonormalize(&c);
    let rc = qc.tr_mul(&c);
    let (ur, small_sigma, vr) = thin_svd(&rc)?;
    // C = Qc Ur Σ Vrᵀ  ⇒  R̃ ≈ (B Vr) Σ (Qc Ur)ᵀ
    let left = &basis * vr;
    let right = &qc * ur;
    let spec = TruncatedSpectrum::from_parts(small_sigma, left, right)
        .truncate(params.k);
    let deviation = spec.orthonormality_error();
    if deviation > ORTHONORMALITY_TOL {
        return Err(Error::ConvergenceFailure { deviation });
    }
    Ok(spec)
}

/// Fraction of the Frobenius energy captured by the top `k` components.
pub fn appro_measure(spec: &TruncatedSpectrum, k: usize, frobenius_sq_total: f64) -> Result<f64> {
    if k > spec.len() {
        return Err(Error::config("K", format!("{k} exceeds spectrum length {}", spec.len())));
    }
    appro_from_sigma(&spec.sigma[..k], frobenius_sq_total)
}

/// Same as [`appro_measure`] on a bare list of singular values.
pub fn appro_from_sigma(sigma: &[f64], frobenius_sq_total: f64) -> Result<f64> {
    let partial: f64 = sigma.iter().map(|s| s * s).sum();
    let slack = 1e-12 * frobenius_sq_total.abs().max(1.0);
    if frobenius_sq_total < partial - slack || frobenius_sq_total <= 0.0 {
        return Err(Error::InvalidTotal {
            total: frobenius_sq_total,
            partial,
        });
    }
    Ok((partial / frobenius_sq_total).min(1.0))
}

/// `σ̄ᵃ_k / σ̄ᵇ_k` for each component.
pub fn ratio_curve(a: &TruncatedSpectrum, b: &TruncatedSpectrum) -> Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.sigma_normalized
        .iter()
        .zip(&b.sigma_normalized)
        .map(|(x, y)| x / y)
        .collect())
}

/// Energy and ratio diagnostics for one spectrum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumStats {
    pub frobenius_sq_total: f64,
    pub appro_curve: Vec<f64>,
    pub ratio_curve: Option<Vec<f64>>,
}

impl SpectrumStats {
    pub fn compute(
        spec: &TruncatedSpectrum,
        frobenius_sq_total: f64,
        reference: Option<&TruncatedSpectrum>,
    ) -> Result<Self> {
        let mut appro_curve = Vec::with_capacity(spec.len());
        let mut partial = 0.0;
        for s in spec.sigma() {
            partial += s * s;
            appro_curve.push(partial);
        }
        let last = appro_curve.last().copied().unwrap_or(0.0);
        let slack = 1e-12 * frobenius_sq_total.abs().max(1.0);
        if frobenius_sq_total <= 0.0 || frobenius_sq_total < last - slack {
            return Err(Error::InvalidTotal {
                total: frobenius_sq_total,
                partial: last,
            });
        }
        for v in &mut appro_curve {
            *v = (*v / frobenius_sq_total).min(1.0);
        }
        let ratio_curve = reference.map(|r| ratio_curve(spec, r)).transpose()?;
        Ok(SpectrumStats {
            frobenius_sq_total,
            appro_curve,
            ratio_curve,
        })
    }

    /// CSV with columns `k,appro` (plus `ratio` when a reference was given).
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        if self.ratio_curve.is_some() {
            wtr.write_record(["k", "appro", "ratio"])?;
        } else {
            wtr.write_record(["k", "appro"])?;
        }
        for (k, a) in self.appro_curve.iter().enumerate() {
            let mut row = vec![(k + 1).to_string(), a.to_string()];
            if let Some(r) = &self.ratio_curve {
                row.push(r[k].to_string());
            }
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Average ranks (1-based) with ties sharing the mean rank.
fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && x[order[end]] == x[order[start]] {
            end += 1;
        }
        let mean = (start + end + 1) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = mean;
        }
        start = end;
    }
    ranks
}

/// Spearman rank correlation; `None` when either input is constant or too short.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let (rx, ry) = (average_ranks(x), average_ranks(y));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        cov += (a - mx) * (b - my);
        vx += (a - mx) * (a - mx);
        vy += (b - my) * (b - my);
    }
    if vx == 0.0 || vy == 0.0 {
        return None;
    }
    Some(cov / (vx * vy).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{g2n_normalize, BipartiteGraph, G2NConfig};
    use crate::sparse::CsrMatrix;

    fn norm_of(m: &DMatrix<f64>) -> NormalizedMatrix {
        let mut t = Vec::new();
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                t.push((r, c, m[(r, c)]));
            }
        }
        NormalizedMatrix::from_matrix(
            CsrMatrix::from_triplets(m.nrows(), m.ncols(), &t, false),
            G2NConfig::default(),
        )
    }

    #[test]
    fn rank_one_recovered() {
        let a = nalgebra::DVector::from_vec(vec![0.6, 0.0, 0.8]);
        let b = nalgebra::DVector::from_vec(vec![0.0, 1.0 / 2f64.sqrt(), -1.0 / 2f64.sqrt(), 0.0]);
        let m = &a * b.transpose() * 2.5;
        let spec = truncated_svd(&norm_of(&m), &SvdParams::new(1, 3)).unwrap();
        assert_eq!(spec.len(), 1);
        assert!((spec.sigma()[0] - 2.5).abs() < 1e-12);
        // sign fixed by the largest entry of p (0.8 > 0)
        assert!((spec.left().column(0) - &a).abs().max() < 1e-12);
        assert!((spec.right().column(0) - &b).abs().max() < 1e-12);
    }

    #[test]
    fn dense_small_cases() {
        let spec = dense_svd_of(&DMatrix::from_element(1, 1, 0.3)).unwrap();
        assert_eq!(spec.sigma(), &[0.3]);

        let g = BipartiteGraph::from_pairs(2, 2, &[(0, 0), (0, 1), (1, 0), (1, 1)]).unwrap();
        let spec = dense_svd(&g2n_normalize(&g, &G2NConfig::default())).unwrap();
        assert_eq!(spec.len(), 1);
        assert!((spec.sigma()[0] - 1.0).abs() < 1e-14);

        let pairs: Vec<_> = (0..5).map(|i| (i, i)).collect();
        let g = BipartiteGraph::from_pairs(5, 5, &pairs).unwrap();
        let spec = dense_svd(&g2n_normalize(&g, &G2NConfig::default())).unwrap();
        assert_eq!(spec.len(), 5);
        assert!(spec.sigma().iter().all(|s| (s - 1.0).abs() < 1e-14));
        assert_eq!(spec.sigma_normalized()[0], 1.0);
    }

    #[test]
    fn k_validation() {
        let n = norm_of(&DMatrix::identity(3, 2));
        assert!(matches!(
            truncated_svd(&n, &SvdParams::new(3, 0)),
            Err(Error::KTooLarge { k: 3, max: 2 })
        ));
        assert!(truncated_svd(&n, &SvdParams::new(0, 0)).is_err());
        let mut p = SvdParams::new(1, 0);
        p.oversample = 2;
        assert!(truncated_svd(&n, &p).is_err());
    }

    #[test]
    fn appro_examples() {
        let spec = TruncatedSpectrum::from_parts(
            vec![2.0, 1.0, 1.0],
            DMatrix::identity(3, 3),
            DMatrix::identity(3, 3),
        );
        assert!((appro_measure(&spec, 1, 6.0).unwrap() - 4.0 / 6.0).abs() < 1e-15);
        assert_eq!(appro_measure(&spec, 3, 6.0).unwrap(), 1.0);
        assert!(matches!(appro_measure(&spec, 3, 5.0), Err(Error::InvalidTotal { .. })));
        let stats = SpectrumStats::compute(&spec, 6.0, None).unwrap();
        assert!(stats.appro_curve.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(*stats.appro_curve.last().unwrap(), 1.0);
    }

    #[test]
    fn ratio_curve_identity_and_mismatch() {
        let m = DMatrix::from_row_slice(3, 2, &[1.0, 0.2, 0.3, 0.5, 0.0, 0.7]);
        let spec = dense_svd_of(&m).unwrap();
        assert!(ratio_curve(&spec, &spec).unwrap().iter().all(|&r| r == 1.0));
        assert!(matches!(
            ratio_curve(&spec, &spec.truncate(1)),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn spearman_basics() {
        assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-15);
        assert!((spearman(&[1.0, 2.0, 3.0], &[1.0, 5.0, 9.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!(spearman(&[1.0, 1.0], &[1.0, 2.0]).is_none());
        // ties get mean ranks: x ranks [1.5,1.5,3], y ranks [1,2,3]
        let r = spearman(&[1.0, 1.0, 2.0], &[1.0, 2.0, 3.0]).unwrap();
        assert!((r - 0.8660254037844387).abs() < 1e-12);
    }

    #[test]
    fn csv_exports() {
        let spec = dense_svd_of(&DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0])).unwrap();
        let mut buf = Vec::new();
        spec.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "k,sigma,sigma_normalized\n1,2,1\n2,1,0.5\n");
        let stats = SpectrumStats::compute(&spec, 5.0, None).unwrap();
        let mut buf = Vec::new();
        stats.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "k,appro\n1,0.8\n2,1\n");
    }
}
