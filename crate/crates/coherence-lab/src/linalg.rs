//! Dense complex Hermitian linear algebra used throughout the crate.
//!
//! The eigensolver is a cyclic Jacobi sweep on the complex Hermitian matrix,
//! chosen for determinism: identical input bytes give identical output.
//! Matrix powers are taken on the support only; eigenvalues below the
//! relative rank threshold are mapped to zero.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Numerical tolerances. All overridable; defaults follow the crate-wide
/// validation policy.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub herm_tol: f64,
    pub trace_tol: f64,
    pub psd_tol: f64,
    /// Relative rank threshold: eigenvalues below `rank_rel * lambda_max`
    /// count as zero.
    pub rank_rel: f64,
    pub recon_tol: f64,
    pub range_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            herm_tol: 1e-10,
            trace_tol: 1e-9,
            psd_tol: 1e-9,
            rank_rel: 1e-10,
            recon_tol: 1e-9,
            range_tol: 1e-8,
        }
    }
}

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_OFFDIAG_REL: f64 = 1e-12;

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        ComplexMatrix {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let nr = rows.len();
        if nr == 0 {
            return Err(Error::InvalidMatrix("empty matrix".into()));
        }
        let nc = rows[0].len();
        if nc == 0 || rows.iter().any(|r| r.len() != nc) {
            return Err(Error::InvalidMatrix("ragged or empty rows".into()));
        }
        let data: Vec<C64> = rows.iter().flatten().copied().collect();
        let m = ComplexMatrix { rows: nr, cols: nc, data };
        m.check_finite()?;
        Ok(m)
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidMatrix(format!(
                "expected {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        let m = ComplexMatrix { rows, cols, data };
        m.check_finite()?;
        Ok(m)
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        m
    }

    fn check_finite(&self) -> Result<()> {
        if self.data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidMatrix("non-finite entry".into()));
        }
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn adjoint(&self) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn mul(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = ComplexMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn add(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        ComplexMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        ComplexMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, factor: C64) -> ComplexMatrix {
        let data = self.data.iter().map(|a| a * factor).collect();
        ComplexMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn trace(&self) -> C64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn hermitian_asymmetry(&self) -> f64 {
        assert!(self.is_square());
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// (H + H†)/2; absorbs file-format rounding on construction paths.
    pub fn symmetrized(&self) -> ComplexMatrix {
        assert!(self.is_square());
        let mut out = self.clone();
        for i in 0..self.rows {
            out[(i, i)] = C64::new(out[(i, i)].re, 0.0);
            for j in i + 1..self.cols {
                let avg = (self[(i, j)] + self[(j, i)].conj()) * 0.5;
                out[(i, j)] = avg;
                out[(j, i)] = avg.conj();
            }
        }
        out
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

/// JSON wire format: `{"dim": d, "entries": [[re, im], ...]}` row-major.
#[derive(Serialize, Deserialize)]
struct SquareMatrixJson {
    dim: usize,
    entries: Vec<[f64; 2]>,
}

/// General (possibly rectangular) operator wire format, used for Kraus files.
#[derive(Serialize, Deserialize)]
pub struct OperatorJson {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<[f64; 2]>,
}

impl ComplexMatrix {
    pub fn from_square_json(text: &str) -> Result<Self> {
        let parsed: SquareMatrixJson = serde_json::from_str(text)?;
        if parsed.dim == 0 {
            return Err(Error::InvalidMatrix("dim must be positive".into()));
        }
        if parsed.entries.len() != parsed.dim * parsed.dim {
            return Err(Error::InvalidMatrix(format!(
                "expected {} entries for dim {}, got {}",
                parsed.dim * parsed.dim,
                parsed.dim,
                parsed.entries.len()
            )));
        }
        let data = parsed.entries.iter().map(|[re, im]| C64::new(*re, *im)).collect();
        ComplexMatrix::from_vec(parsed.dim, parsed.dim, data)
    }

    pub fn to_square_json(&self) -> String {
        assert!(self.is_square());
        let entries: Vec<[f64; 2]> = self.data.iter().map(|z| [z.re, z.im]).collect();
        serde_json::to_string(&SquareMatrixJson { dim: self.rows, entries }).unwrap()
    }

    pub fn from_operator_json(op: &OperatorJson) -> Result<Self> {
        if op.entries.len() != op.rows * op.cols {
            return Err(Error::InvalidMatrix(format!(
                "expected {} entries, got {}",
                op.rows * op.cols,
                op.entries.len()
            )));
        }
        let data = op.entries.iter().map(|[re, im]| C64::new(*re, *im)).collect();
        ComplexMatrix::from_vec(op.rows, op.cols, data)
    }
}

/// Eigendecomposition of a Hermitian matrix: ascending real spectrum and
/// orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
    pub rank: usize,
}

impl EigenDecomposition {
    /// Relative threshold separating support from kernel.
    pub fn rank_threshold(&self, tol: &Tolerances) -> f64 {
        let max_abs = self.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max);
        tol.rank_rel * max_abs
    }

    /// Projector onto the support (eigenvalues above the rank threshold).
    pub fn support_projector(&self, tol: &Tolerances) -> ComplexMatrix {
        let thr = self.rank_threshold(tol);
        let d = self.eigenvectors.rows();
        let mut proj = ComplexMatrix::zeros(d, d);
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            if lam > thr {
                let v = self.eigenvectors.column(k);
                for i in 0..d {
                    for j in 0..d {
                        proj[(i, j)] += v[i] * v[j].conj();
                    }
                }
            }
        }
        proj
    }

    /// V f(Λ) V† for a real spectral function.
    pub fn apply_spectral(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let d = self.eigenvectors.rows();
        let mut out = ComplexMatrix::zeros(d, d);
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            let w = f(lam);
            if w == 0.0 {
                continue;
            }
            let v = self.eigenvectors.column(k);
            for i in 0..d {
                for j in 0..d {
                    out[(i, j)] += v[i] * v[j].conj() * w;
                }
            }
        }
        out
    }
}

/// Eigendecomposition via cyclic complex Jacobi rotations.
pub fn eigh(h: &ComplexMatrix, tol: &Tolerances) -> Result<EigenDecomposition> {
    if !h.is_square() {
        return Err(Error::InvalidMatrix("eigh requires a square matrix".into()));
    }
    let asym = h.hermitian_asymmetry();
    if asym > tol.herm_tol {
        return Err(Error::NotHermitian { asymmetry: asym, tol: tol.herm_tol });
    }
    let d = h.rows();
    let mut a = h.symmetrized();
    let mut v = ComplexMatrix::identity(d);
    let norm = a.frobenius_norm();
    let target = JACOBI_OFFDIAG_REL * norm;

    let mut converged = norm == 0.0 || d == 1;
    if !converged {
        for _sweep in 0..JACOBI_MAX_SWEEPS {
            for p in 0..d - 1 {
                for q in p + 1..d {
                    jacobi_rotate(&mut a, &mut v, p, q);
                }
            }
            let off: f64 = (0..d)
                .flat_map(|i| (i + 1..d).map(move |j| (i, j)))
                .map(|(i, j)| 2.0 * a[(i, j)].norm_sqr())
                .sum::<f64>()
                .sqrt();
            if off <= target {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps: JACOBI_MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..d).collect();
    let lambda: Vec<f64> = (0..d).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| lambda[i].partial_cmp(&lambda[j]).unwrap());

    let eigenvalues: Vec<f64> = order.iter().map(|&i| lambda[i]).collect();
    let mut eigenvectors = ComplexMatrix::zeros(d, d);
    for (col, &src) in order.iter().enumerate() {
        for row in 0..d {
            eigenvectors[(row, col)] = v[(row, src)];
        }
    }
    let max_abs = eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max);
    let thr = tol.rank_rel * max_abs;
    let rank = eigenvalues.iter().filter(|&&l| l > thr).count();
    Ok(EigenDecomposition { eigenvalues, eigenvectors, rank })
}

/// One complex Jacobi rotation annihilating a[(p, q)].
fn jacobi_rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let z = a[(p, q)];
    let zn = z.norm();
    if zn == 0.0 {
        return;
    }
    let phase = z / zn;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let tau = (aqq - app) / (2.0 * zn);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let d = a.rows();

    // Columns p, q of A: A <- A R with R_pp = c, R_pq = s e^{i phi},
    // R_qp = -s e^{-i phi}, R_qq = c.
    for k in 0..d {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c - akq * (phase.conj() * s);
        a[(k, q)] = akp * (phase * s) + akq * c;
    }
    // Rows p, q: A <- R† A.
    for k in 0..d {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c - aqk * (phase * s);
        a[(q, k)] = apk * (phase.conj() * s) + aqk * c;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

    for k in 0..d {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * (phase.conj() * s);
        v[(k, q)] = vkp * (phase * s) + vkq * c;
    }
}

/// A^alpha on the support of the PSD operator A.
pub fn matrix_power(a: &ComplexMatrix, alpha: f64, tol: &Tolerances) -> Result<ComplexMatrix> {
    let eig = eigh(a, tol)?;
    if let Some(&min) = eig.eigenvalues.first() {
        if min < -tol.psd_tol {
            return Err(Error::NotPsd { eigenvalue: min });
        }
    }
    let thr = eig.rank_threshold(tol);
    Ok(eig.apply_spectral(|l| if l > thr { l.powf(alpha) } else { 0.0 }))
}

/// True iff ran(A) is contained in ran(B), tested through the complement of
/// B's support projector.
pub fn range_contained(a: &ComplexMatrix, b: &ComplexMatrix, tol: &Tolerances) -> Result<bool> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(Error::DimensionMismatch { left: a.rows(), right: b.rows() });
    }
    let eig_b = eigh(b, tol)?;
    let proj = eig_b.support_projector(tol);
    let complement = ComplexMatrix::identity(b.rows()).sub(&proj);
    let residual = complement.mul(a).mul(&complement);
    Ok(residual.max_abs() <= tol.range_tol)
}

/// A density matrix: Hermitian, PSD, unit trace. Symmetrized on construction.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    dim: usize,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidMatrix("density matrix must be square".into()));
        }
        let asym = matrix.hermitian_asymmetry();
        if asym > tol.herm_tol {
            return Err(Error::NotHermitian { asymmetry: asym, tol: tol.herm_tol });
        }
        let sym = matrix.symmetrized();
        let trace = sym.trace().re;
        if (trace - 1.0).abs() > tol.trace_tol {
            return Err(Error::NotUnitTrace { trace, tol: tol.trace_tol });
        }
        let eig = eigh(&sym, tol)?;
        if let Some(&min) = eig.eigenvalues.first() {
            if min < -tol.psd_tol {
                return Err(Error::NotPsd { eigenvalue: min });
            }
        }
        Ok(DensityMatrix { dim: sym.rows(), matrix: sym })
    }

    /// Build from an unnormalized PSD operator by dividing out the trace.
    pub fn from_unnormalized(matrix: &ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let trace = matrix.trace().re;
        if trace <= 0.0 {
            return Err(Error::InvalidMatrix("non-positive trace".into()));
        }
        Self::new(matrix.scale(C64::new(1.0 / trace, 0.0)), tol)
    }

    pub fn pure(vector: &[C64], tol: &Tolerances) -> Result<Self> {
        let norm_sq: f64 = vector.iter().map(|z| z.norm_sqr()).sum();
        if norm_sq <= 0.0 {
            return Err(Error::InvalidMatrix("zero state vector".into()));
        }
        let d = vector.len();
        let mut m = ComplexMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] = vector[i] * vector[j].conj() / norm_sq;
            }
        }
        Self::new(m, tol)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let m = ComplexMatrix::identity(dim).scale(C64::new(1.0 / dim as f64, 0.0));
        DensityMatrix { dim, matrix: m }
    }

    pub fn from_diagonal(weights: &[f64], tol: &Tolerances) -> Result<Self> {
        Self::new(ComplexMatrix::diagonal(weights), tol)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Tr(rho^2), computed as the squared Frobenius norm.
    pub fn purity(&self) -> f64 {
        let f = self.matrix.frobenius_norm();
        f * f
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.matrix[(i, i)].re).collect()
    }
}

#[cfg(test)]
pub(crate) mod tests_support {
    use super::*;
    use rand::Rng;

    pub fn random_hermitian(d: usize, rng: &mut impl Rng) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(d, d);
        for i in 0..d {
            m[(i, i)] = C64::new(rng.gen_range(-1.0..1.0), 0.0);
            for j in i + 1..d {
                let z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        m
    }

    pub fn random_psd(d: usize, rng: &mut impl Rng) -> ComplexMatrix {
        let g = random_hermitian(d, rng);
        g.mul(&g.adjoint())
    }
}
