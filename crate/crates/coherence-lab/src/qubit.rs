//! Closed-form single-qubit results and the data behind the two
//! figures: maximal coherence at fixed diagonal, and the coherence-mixedness
//! trade-off corridor.

use serde::Serialize;

use crate::coherence::{coherence_alpha, mixedness, ReferenceBasis};
use crate::divergence::AlphaParam;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, DensityMatrix, Tolerances, C64};

/// A qubit state parametrized by its diagonal element u and off-diagonal w:
/// [[u, conj(w)], [w, 1-u]].
#[derive(Debug, Clone, Copy)]
pub struct QubitState {
    u: f64,
    w: C64,
}

impl QubitState {
    pub fn new(u: f64, w: C64) -> Result<Self> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::InvalidMatrix(format!("u = {} out of [0, 1]", u)));
        }
        let limit = (u * (1.0 - u)).max(0.0).sqrt();
        if w.norm() > limit + 1e-12 {
            return Err(Error::InvalidMatrix(format!(
                "|w| = {} exceeds sqrt(u(1-u)) = {}",
                w.norm(),
                limit
            )));
        }
        Ok(QubitState { u, w })
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn w(&self) -> C64 {
        self.w
    }

    pub fn to_density(&self, tol: &Tolerances) -> Result<DensityMatrix> {
        let m = ComplexMatrix::from_rows(&[
            vec![C64::new(self.u, 0.0), self.w.conj()],
            vec![self.w, C64::new(1.0 - self.u, 0.0)],
        ])?;
        // Clip marginally negative spectra from boundary states.
        DensityMatrix::new(m, tol)
    }
}

/// Closed-form spectrum 1/2 +- sqrt((u - 1/2)^2 + |w|^2).
pub fn qubit_eigenvalues(s: &QubitState) -> (f64, f64) {
    let r = ((s.u - 0.5).powi(2) + s.w.norm_sqr()).sqrt();
    (0.5 + r, 0.5 - r)
}

/// Binary Shannon entropy with natural logarithms.
pub fn binary_entropy(u: f64) -> f64 {
    let mut h = 0.0;
    if u > 0.0 {
        h -= u * u.ln();
    }
    if u < 1.0 {
        h -= (1.0 - u) * (1.0 - u).ln();
    }
    h
}

/// C_1 = h(u) - h(lambda_plus).
pub fn qubit_c1(s: &QubitState) -> f64 {
    let (lp, _) = qubit_eigenvalues(s);
    (binary_entropy(s.u) - binary_entropy(lp)).max(0.0)
}

/// C_2 = (sqrt(u^2 + |w|^2) + sqrt((1-u)^2 + |w|^2))^2 - 1.
pub fn qubit_c2(s: &QubitState) -> f64 {
    let w2 = s.w.norm_sqr();
    let n = (s.u * s.u + w2).sqrt() + ((1.0 - s.u).powi(2) + w2).sqrt();
    (n * n - 1.0).max(0.0)
}

fn c_alpha_at(u: f64, w_abs: f64, alpha: AlphaParam, tol: &Tolerances) -> f64 {
    let s = QubitState { u, w: C64::new(w_abs, 0.0) };
    match s.to_density(tol) {
        Ok(rho) => {
            let basis = ReferenceBasis::identity(2);
            coherence_alpha(&rho, &basis, alpha, tol).map(|r| r.value).unwrap_or(0.0)
        }
        Err(_) => 0.0,
    }
}

const GOLDEN_TOL: f64 = 1e-10;
pub const DEFAULT_SCAN_POINTS: usize = 2001;

/// Maximum of C_alpha over |w| in [0, sqrt(u(1-u))]: a uniform scan seeds a
/// golden-section search.
pub fn qubit_max_coherence(u: f64, alpha: AlphaParam, scan_points: usize, tol: &Tolerances) -> f64 {
    let limit = (u * (1.0 - u)).max(0.0).sqrt();
    if limit == 0.0 {
        return 0.0;
    }
    let n = scan_points.max(3);
    let mut best = 0.0f64;
    let mut best_idx = 0usize;
    for i in 0..n {
        let w = limit * i as f64 / (n - 1) as f64;
        let v = c_alpha_at(u, w, alpha, tol);
        if v > best {
            best = v;
            best_idx = i;
        }
    }
    // bracket around the best scan point
    let step = limit / (n - 1) as f64;
    let mut lo = (best_idx.saturating_sub(1)) as f64 * step;
    let mut hi = ((best_idx + 1).min(n - 1)) as f64 * step;
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = c_alpha_at(u, x1, alpha, tol);
    let mut f2 = c_alpha_at(u, x2, alpha, tol);
    while hi - lo > GOLDEN_TOL {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = c_alpha_at(u, x2, alpha, tol);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = c_alpha_at(u, x1, alpha, tol);
        }
    }
    best.max(f1).max(f2)
}

/// Trade-off bounds for one qubit state: the sandwich
/// 4u(1-u) <= C_2 + M <= 2 sqrt(u(1-u)) and the exact identity
/// C_l1^2 + M = 4u(1-u).
#[derive(Debug, Clone, Serialize)]
pub struct QubitTradeoffReport {
    pub u: f64,
    pub w_abs: f64,
    pub c2: f64,
    pub c_l1: f64,
    pub mixedness: f64,
    pub lower: f64,
    pub upper: f64,
    pub sum: f64,
    pub holds_sandwich: bool,
    /// |C_l1^2 + M - 4u(1-u)|
    pub identity_residual: f64,
}

pub fn qubit_tradeoff_report(s: &QubitState, tol: &Tolerances) -> Result<QubitTradeoffReport> {
    let rho = s.to_density(tol)?;
    let c2 = qubit_c2(s);
    let c_l1 = 2.0 * s.w.norm();
    let m = mixedness(&rho)?;
    let lower = 4.0 * s.u * (1.0 - s.u);
    let upper = 2.0 * (s.u * (1.0 - s.u)).max(0.0).sqrt();
    let sum = c2 + m;
    let identity_residual = (c_l1 * c_l1 + m - lower).abs();
    Ok(QubitTradeoffReport {
        u: s.u,
        w_abs: s.w.norm(),
        c2,
        c_l1,
        mixedness: m,
        lower,
        upper,
        sum,
        holds_sandwich: lower - 1e-9 <= sum && sum <= upper + 1e-9,
        identity_residual,
    })
}

pub const DEFAULT_U_GRID: usize = 501;

/// Rows of the max-coherence figure: (u, max C_alpha per alpha).
pub fn figure1_data(
    alphas: &[AlphaParam],
    u_points: usize,
    scan_points: usize,
    tol: &Tolerances,
) -> Vec<(f64, Vec<f64>)> {
    let n = u_points.max(2);
    (0..n)
        .map(|i| {
            let u = 0.5 * i as f64 / (n - 1) as f64;
            let row = alphas
                .iter()
                .map(|&a| qubit_max_coherence(u, a, scan_points, tol))
                .collect();
            (u, row)
        })
        .collect()
}

/// Rows of the trade-off corridor figure: (u, 4u(1-u), 2 sqrt(u(1-u))).
pub fn figure2_data(u_points: usize) -> Vec<(f64, f64, f64)> {
    let n = u_points.max(2);
    (0..n)
        .map(|i| {
            let u = 0.5 * i as f64 / (n - 1) as f64;
            (u, 4.0 * u * (1.0 - u), 2.0 * (u * (1.0 - u)).max(0.0).sqrt())
        })
        .collect()
}
