//! Coherence quantifiers derived from the Tsallis alpha-divergences, their
//! closed-form minimizing incoherent state, purity bounds, mixedness, and a
//! brute-force simplex minimizer that serves as an independent oracle.

use serde::Serialize;

use crate::divergence::{
    quantum_tsallis, AlphaParam, DivergenceValue, ProbabilityVector,
};
use crate::error::{Error, Result};
use crate::linalg::{eigh, matrix_power, ComplexMatrix, DensityMatrix, Tolerances, C64};

/// A prescribed orthonormal reference basis. `None` is the computational
/// (identity) basis fast path; otherwise the unitary's columns are the basis
/// vectors.
#[derive(Debug, Clone)]
pub struct ReferenceBasis {
    dim: usize,
    unitary: Option<ComplexMatrix>,
}

impl ReferenceBasis {
    pub fn identity(dim: usize) -> Self {
        ReferenceBasis { dim, unitary: None }
    }

    pub fn from_unitary(u: ComplexMatrix) -> Result<Self> {
        if !u.is_square() {
            return Err(Error::InvalidMatrix("basis unitary must be square".into()));
        }
        let gram = u.adjoint().mul(&u).sub(&ComplexMatrix::identity(u.rows()));
        if gram.max_abs() > 1e-10 {
            return Err(Error::InvalidMatrix(format!(
                "basis columns are not orthonormal (residual {:.3e})",
                gram.max_abs()
            )));
        }
        Ok(ReferenceBasis { dim: u.rows(), unitary: Some(u) })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_identity(&self) -> bool {
        self.unitary.is_none()
    }

    /// Rotate a state into the basis frame: U† rho U. All coherence code then
    /// runs on the identity-basis path.
    pub fn to_frame(&self, rho: &DensityMatrix, tol: &Tolerances) -> Result<DensityMatrix> {
        if rho.dim() != self.dim {
            return Err(Error::DimensionMismatch { left: rho.dim(), right: self.dim });
        }
        match &self.unitary {
            None => Ok(rho.clone()),
            Some(u) => {
                let rotated = u.adjoint().mul(rho.matrix()).mul(u);
                DensityMatrix::new(rotated, tol)
            }
        }
    }

    pub fn unitary_or_identity(&self) -> ComplexMatrix {
        match &self.unitary {
            Some(u) => u.clone(),
            None => ComplexMatrix::identity(self.dim),
        }
    }

    /// Express diagonal weights back as a matrix in the original frame.
    pub fn diagonal_state_matrix(&self, weights: &[f64]) -> ComplexMatrix {
        let diag = ComplexMatrix::diagonal(weights);
        match &self.unitary {
            None => diag,
            Some(u) => u.mul(&diag).mul(&u.adjoint()),
        }
    }
}

/// A state diagonal in the reference basis, stored as its weight vector.
#[derive(Debug, Clone, Serialize)]
pub struct IncoherentState {
    pub weights: ProbabilityVector,
}

impl IncoherentState {
    pub fn to_density(&self, basis: &ReferenceBasis, tol: &Tolerances) -> Result<DensityMatrix> {
        DensityMatrix::new(basis.diagonal_state_matrix(self.weights.as_slice()), tol)
    }
}

/// Result of the closed-form coherence evaluation.
#[derive(Debug, Clone, Serialize)]
pub struct CoherenceResult {
    pub value: f64,
    pub alpha: f64,
    pub minimizer: IncoherentState,
    /// Normalization N of the minimizer weights (1 at alpha = 1).
    pub normalization: f64,
}

/// Sum of moduli of off-diagonal elements in the reference basis.
pub fn coherence_l1(rho: &DensityMatrix, basis: &ReferenceBasis, tol: &Tolerances) -> Result<f64> {
    let r = basis.to_frame(rho, tol)?;
    let d = r.dim();
    let mut sum = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                sum += r.matrix()[(i, j)].norm();
            }
        }
    }
    Ok(sum)
}

/// Sum of squared moduli of off-diagonal elements.
pub fn coherence_l2(rho: &DensityMatrix, basis: &ReferenceBasis, tol: &Tolerances) -> Result<f64> {
    let r = basis.to_frame(rho, tol)?;
    let d = r.dim();
    let mut sum = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                sum += r.matrix()[(i, j)].norm_sqr();
            }
        }
    }
    Ok(sum)
}

fn shannon_entropy(weights: &[f64]) -> f64 {
    weights
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| -w * w.ln())
        .sum()
}

/// Diagonal weights of the closest incoherent state together with the
/// normalization N, computed in the basis frame.
fn minimizer_weights(
    framed: &DensityMatrix,
    alpha: AlphaParam,
    tol: &Tolerances,
) -> Result<(Vec<f64>, f64)> {
    let d = framed.dim();
    if alpha.is_limit_one() {
        // Dephasing: delete the off-diagonal elements.
        let w: Vec<f64> = framed.diagonal().iter().map(|x| x.max(0.0)).collect();
        return Ok((w, 1.0));
    }
    let a = alpha.value();
    let pow = matrix_power(framed.matrix(), a, tol)?;
    let mut roots = Vec::with_capacity(d);
    for j in 0..d {
        let diag = pow[(j, j)].re.max(0.0);
        // Zero diagonal entries of rho^alpha get weight zero in the minimizer.
        roots.push(if diag > 0.0 { diag.powf(1.0 / a) } else { 0.0 });
    }
    let n: f64 = roots.iter().sum();
    let weights = roots.iter().map(|r| r / n).collect();
    Ok((weights, n))
}

/// Closed-form coherence quantifier
/// C_alpha = [(sum_j <e_j| rho^alpha |e_j>^(1/alpha))^alpha - 1] / (alpha - 1),
/// with the relative-entropy form at alpha = 1.
pub fn coherence_alpha(
    rho: &DensityMatrix,
    basis: &ReferenceBasis,
    alpha: AlphaParam,
    tol: &Tolerances,
) -> Result<CoherenceResult> {
    let framed = basis.to_frame(rho, tol)?;
    let (weights, n) = minimizer_weights(&framed, alpha, tol)?;
    let value = if alpha.is_limit_one() {
        let eig = eigh(framed.matrix(), tol)?;
        let spectrum: Vec<f64> = eig.eigenvalues.iter().map(|l| l.max(0.0)).collect();
        (shannon_entropy(&weights) - shannon_entropy(&spectrum)).max(0.0)
    } else {
        let a = alpha.value();
        ((n.powf(a) - 1.0) / (a - 1.0)).max(0.0)
    };
    Ok(CoherenceResult {
        value,
        alpha: alpha.value(),
        minimizer: IncoherentState { weights: ProbabilityVector::new(weights)? },
        normalization: n,
    })
}

/// The incoherent state reaching the minimum in the divergence.
pub fn closest_incoherent(
    rho: &DensityMatrix,
    basis: &ReferenceBasis,
    alpha: AlphaParam,
    tol: &Tolerances,
) -> Result<IncoherentState> {
    Ok(coherence_alpha(rho, basis, alpha, tol)?.minimizer)
}

/// The alpha = 2 quantifier written directly through column norms:
/// (sum_j sqrt(sum_i |rho_ij|^2))^2 - 1.
pub fn coherence_2_quadratic(
    rho: &DensityMatrix,
    basis: &ReferenceBasis,
    tol: &Tolerances,
) -> Result<f64> {
    let r = basis.to_frame(rho, tol)?;
    let d = r.dim();
    let mut n = 0.0;
    for j in 0..d {
        let col: f64 = (0..d).map(|i| r.matrix()[(i, j)].norm_sqr()).sum();
        n += col.sqrt();
    }
    Ok((n * n - 1.0).max(0.0))
}

/// Purity upper bound on C_alpha: -ln_alpha(1/(d Tr rho^2)) for alpha <= 2,
/// and the lambda_max estimate otherwise.
pub fn purity_upper_bound(rho: &DensityMatrix, alpha: AlphaParam) -> f64 {
    let d = rho.dim() as f64;
    let y = d * rho.purity();
    let a = alpha.value();
    if a <= 2.0 {
        // -ln_alpha(1/y)
        crate::divergence::alpha_log(1.0 / y, alpha).map(|v| -v).unwrap_or(0.0)
    } else {
        let base = 1.0 + (d - 1.0).sqrt() * (y - 1.0).max(0.0).sqrt();
        (y * base.powf(a - 2.0) - 1.0) / (a - 1.0)
    }
}

/// Variant of the alpha > 2 bound using the actual largest eigenvalue instead
/// of its purity-based estimate; exposed for comparison.
pub fn purity_upper_bound_true_lambda_max(
    rho: &DensityMatrix,
    alpha: AlphaParam,
    tol: &Tolerances,
) -> Result<f64> {
    let a = alpha.value();
    let d = rho.dim() as f64;
    let eig = eigh(rho.matrix(), tol)?;
    let lam_max = eig.eigenvalues.last().copied().unwrap_or(0.0).max(0.0);
    Ok((d.powf(a - 1.0) * lam_max.powf(a - 2.0) * rho.purity() - 1.0) / (a - 1.0))
}

/// Normalized mixedness M(rho) = d (1 - Tr rho^2) / (d - 1).
pub fn mixedness(rho: &DensityMatrix) -> Result<f64> {
    let d = rho.dim();
    if d < 2 {
        return Err(Error::InvalidMatrix("mixedness requires dimension >= 2".into()));
    }
    let d = d as f64;
    Ok((d * (1.0 - rho.purity()) / (d - 1.0)).clamp(0.0, 1.0))
}

/// Coherence-mixedness trade-off check for alpha in (0, 2].
#[derive(Debug, Clone, Serialize)]
pub struct TradeoffReport {
    pub alpha: f64,
    pub coherence: f64,
    pub mixedness: f64,
    /// C_alpha/(d-1) + M(rho); bounded by one.
    pub sum: f64,
    pub holds_tradeoff: bool,
    /// Linearized purity bound d Tr(rho^2) - 1.
    pub purity_bound: f64,
    pub holds_purity_bound: bool,
}

pub fn tradeoff_report(
    rho: &DensityMatrix,
    basis: &ReferenceBasis,
    alpha: AlphaParam,
    tol: &Tolerances,
) -> Result<TradeoffReport> {
    if alpha.value() > 2.0 {
        return Err(Error::AlphaOutOfRange(alpha.value()));
    }
    let c = coherence_alpha(rho, basis, alpha, tol)?.value;
    let m = mixedness(rho)?;
    let d = rho.dim() as f64;
    let sum = c / (d - 1.0) + m;
    let purity_bound = d * rho.purity() - 1.0;
    Ok(TradeoffReport {
        alpha: alpha.value(),
        coherence: c,
        mixedness: m,
        sum,
        holds_tradeoff: sum <= 1.0 + 1e-9,
        purity_bound,
        holds_purity_bound: c <= purity_bound + 1e-9,
    })
}

/// Search configuration for the brute-force oracle.
#[derive(Debug, Clone, Copy)]
pub struct SearchBudget {
    /// Simplex grid resolution (subdivisions per coordinate). `None` picks a
    /// dimension-dependent default.
    pub grid_resolution: Option<usize>,
    pub refine_iterations: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { grid_resolution: None, refine_iterations: 200 }
    }
}

fn default_resolution(dim: usize) -> usize {
    match dim {
        0..=3 => 200,
        4 => 50,
        _ => 24,
    }
}

/// Divergence objective over diagonal states, reduced to the diagonal of
/// rho^alpha so grid evaluation is cheap.
struct DiagonalObjective {
    alpha: f64,
    limit_one: bool,
    /// diag(rho^alpha) for alpha != 1; diag(rho) for alpha = 1.
    diag: Vec<f64>,
    /// Entropy of the spectrum, used only at alpha = 1.
    spectrum_entropy: f64,
}

impl DiagonalObjective {
    fn new(framed: &DensityMatrix, alpha: AlphaParam, tol: &Tolerances) -> Result<Self> {
        if alpha.is_limit_one() {
            let eig = eigh(framed.matrix(), tol)?;
            let spectrum: Vec<f64> = eig.eigenvalues.iter().map(|l| l.max(0.0)).collect();
            Ok(DiagonalObjective {
                alpha: 1.0,
                limit_one: true,
                diag: framed.diagonal().iter().map(|x| x.max(0.0)).collect(),
                spectrum_entropy: shannon_entropy(&spectrum),
            })
        } else {
            let pow = matrix_power(framed.matrix(), alpha.value(), tol)?;
            let diag = (0..framed.dim()).map(|j| pow[(j, j)].re.max(0.0)).collect();
            Ok(DiagonalObjective {
                alpha: alpha.value(),
                limit_one: false,
                diag,
                spectrum_entropy: 0.0,
            })
        }
    }

    fn eval(&self, delta: &[f64]) -> f64 {
        if self.limit_one {
            let mut cross = 0.0;
            for (&p, &dj) in self.diag.iter().zip(delta) {
                if p <= 0.0 {
                    continue;
                }
                if dj <= 0.0 {
                    return f64::INFINITY;
                }
                cross += p * dj.ln();
            }
            return -self.spectrum_entropy - cross;
        }
        let a = self.alpha;
        let mut acc = 0.0;
        for (&aj, &dj) in self.diag.iter().zip(delta) {
            if aj <= 0.0 {
                continue;
            }
            if dj <= 0.0 {
                if a > 1.0 {
                    return f64::INFINITY;
                }
                continue;
            }
            acc += aj * dj.powf(1.0 - a);
        }
        (acc - 1.0) / (a - 1.0)
    }
}

/// Enumerate the simplex grid {k/m} lexicographically and return the minimum
/// value and its argmin (first hit wins, giving a deterministic tie-break).
fn grid_search(obj: &DiagonalObjective, dim: usize, resolution: usize) -> (f64, Vec<f64>) {
    let m = resolution as f64;
    let mut best = f64::INFINITY;
    let mut best_point = vec![1.0 / dim as f64; dim];
    // Enumerate compositions of `resolution` into `dim` parts: the first
    // dim-1 coordinates run an odometer constrained to sum <= resolution,
    // the last takes the remainder. Lexicographic order makes the first
    // minimum the deterministic tie-break winner.
    let mut comp = vec![0usize; dim - 1];
    let mut point = vec![0.0; dim];
    loop {
        let head: usize = comp.iter().sum();
        for (i, &c) in comp.iter().enumerate() {
            point[i] = c as f64 / m;
        }
        point[dim - 1] = (resolution - head) as f64 / m;
        let v = obj.eval(&point);
        if v < best {
            best = v;
            best_point.copy_from_slice(&point);
        }
        // advance the odometer
        let mut idx = dim - 1;
        let mut done = false;
        loop {
            if idx == 0 {
                done = true;
                break;
            }
            idx -= 1;
            comp[idx] += 1;
            if comp[..=idx].iter().sum::<usize>() <= resolution {
                for c in comp[idx + 1..].iter_mut() {
                    *c = 0;
                }
                break;
            }
            comp[idx] = 0;
        }
        if done {
            break;
        }
    }
    (best, best_point)
}

/// Evaluate the objective at the point whose first dim-1 coordinates are `x`
/// and whose last is the simplex remainder; infeasible points score infinity.
fn eval_reduced(obj: &DiagonalObjective, x: &[f64], scratch: &mut Vec<f64>) -> f64 {
    let mut head = 0.0;
    for &v in x {
        if v < 0.0 {
            return f64::INFINITY;
        }
        head += v;
    }
    if head > 1.0 {
        return f64::INFINITY;
    }
    scratch.clear();
    scratch.extend_from_slice(x);
    scratch.push(1.0 - head);
    obj.eval(scratch)
}

/// Nelder-Mead in the dim-1 free coordinates of the simplex (the last weight
/// is the remainder), so the search simplex stays affinely independent.
fn nelder_mead_refine(
    obj: &DiagonalObjective,
    start: &[f64],
    step: f64,
    iterations: usize,
) -> f64 {
    let n = start.len() - 1;
    if n == 0 {
        return obj.eval(start);
    }
    let mut scratch = Vec::with_capacity(start.len());
    // Pull the base point slightly towards the uniform state so it sits in
    // the interior; vertices then mix it towards the corners e_i, which keeps
    // the search simplex affinely independent even when the grid argmin lies
    // on a facet.
    let eps = step.min(0.25);
    let u = 1.0 / start.len() as f64;
    let x0: Vec<f64> = start[..n].iter().map(|&x| (1.0 - eps) * x + eps * u).collect();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.clone(), eval_reduced(obj, &x0, &mut scratch)));
    for i in 0..n {
        let p: Vec<f64> = x0
            .iter()
            .enumerate()
            .map(|(j, &x)| x + step * (if j == i { 1.0 - x } else { -x }))
            .collect();
        let v = eval_reduced(obj, &p, &mut scratch);
        simplex.push((p, v));
    }

    for _ in 0..iterations {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        let best = simplex[0].1;
        let worst_idx = n;
        let worst = simplex[worst_idx].1;
        if worst.is_finite() && (worst - best).abs() < 1e-15 {
            break;
        }
        let mut centroid = vec![0.0; n];
        for (p, _) in &simplex[..worst_idx] {
            for (c, x) in centroid.iter_mut().zip(p) {
                *c += x / n as f64;
            }
        }
        let mut blend = |t: f64| -> (Vec<f64>, f64) {
            let p: Vec<f64> = centroid
                .iter()
                .zip(&simplex[worst_idx].0)
                .map(|(c, w)| c + t * (c - w))
                .collect();
            let v = eval_reduced(obj, &p, &mut scratch);
            (p, v)
        };
        let (refl, refl_v) = blend(1.0);
        if refl_v < best {
            let (exp, exp_v) = blend(2.0);
            simplex[worst_idx] = if exp_v < refl_v { (exp, exp_v) } else { (refl, refl_v) };
        } else if refl_v < simplex[worst_idx - 1].1 {
            simplex[worst_idx] = (refl, refl_v);
        } else {
            let (con, con_v) = blend(-0.5);
            if con_v < worst {
                simplex[worst_idx] = (con, con_v);
            } else {
                let best_point = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    for (x, b) in entry.0.iter_mut().zip(&best_point) {
                        *x = b + 0.5 * (*x - b);
                    }
                    entry.1 = eval_reduced(obj, &entry.0, &mut scratch);
                }
            }
        }
    }
    simplex
        .iter()
        .map(|(_, v)| *v)
        .fold(f64::INFINITY, f64::min)
}

/// Independent oracle: minimize the divergence to diagonal states by simplex
/// grid search followed by local refinement. Dimension capped at 6.
pub fn brute_force_coherence(
    rho: &DensityMatrix,
    basis: &ReferenceBasis,
    alpha: AlphaParam,
    budget: &SearchBudget,
    tol: &Tolerances,
) -> Result<f64> {
    let d = rho.dim();
    if d > 6 {
        return Err(Error::DimensionTooLarge(d));
    }
    let framed = basis.to_frame(rho, tol)?;
    let obj = DiagonalObjective::new(&framed, alpha, tol)?;
    if d == 1 {
        return Ok(obj.eval(&[1.0]).max(0.0));
    }
    let resolution = budget.grid_resolution.unwrap_or_else(|| default_resolution(d));
    let (grid_min, grid_argmin) = grid_search(&obj, d, resolution);
    let refined = nelder_mead_refine(
        &obj,
        &grid_argmin,
        0.5 / resolution as f64,
        budget.refine_iterations,
    );
    Ok(grid_min.min(refined).max(0.0))
}

/// Off-diagonal mass used by faithfulness checks.
pub fn offdiagonal_mass(rho: &DensityMatrix, basis: &ReferenceBasis, tol: &Tolerances) -> Result<f64> {
    coherence_l1(rho, basis, tol)
}

/// Evaluate the divergence from rho to an explicit incoherent state, sharing
/// the support conventions of the closed form.
pub fn divergence_to_incoherent(
    rho: &DensityMatrix,
    basis: &ReferenceBasis,
    weights: &[f64],
    alpha: AlphaParam,
    tol: &Tolerances,
) -> Result<DivergenceValue> {
    let framed = basis.to_frame(rho, tol)?;
    let sigma = DensityMatrix::from_diagonal(weights, tol)?;
    quantum_tsallis(&framed, &sigma, alpha, tol)
}

pub fn counterexample_state(tol: &Tolerances) -> DensityMatrix {
    let q = C64::new(0.25, 0.0);
    let z = C64::new(0.0, 0.0);
    let m = ComplexMatrix::from_rows(&[
        vec![q, z, q],
        vec![z, C64::new(0.5, 0.0), z],
        vec![q, z, q],
    ])
    .unwrap();
    DensityMatrix::new(m, tol).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn a(x: f64) -> AlphaParam {
        AlphaParam::new(x).unwrap()
    }

    fn random_state(d: usize, rng: &mut impl Rng) -> DensityMatrix {
        let g = crate::linalg::tests_support::random_psd(d, rng);
        DensityMatrix::from_unnormalized(&g, &tol()).unwrap()
    }

    #[test]
    fn l1_l2_basics() {
        let t = tol();
        let basis = ReferenceBasis::identity(3);
        let inc = DensityMatrix::from_diagonal(&[0.2, 0.3, 0.5], &t).unwrap();
        assert_eq!(coherence_l1(&inc, &basis, &t).unwrap(), 0.0);
        assert_eq!(coherence_l2(&inc, &basis, &t).unwrap(), 0.0);

        // uniform superposition in dimension d: C_l1 = d - 1
        for d in 2..=4 {
            let v: Vec<C64> = (0..d).map(|_| C64::new(1.0, 0.0)).collect();
            let plus = DensityMatrix::pure(&v, &t).unwrap();
            let basis = ReferenceBasis::identity(d);
            let c = coherence_l1(&plus, &basis, &t).unwrap();
            assert!((c - (d as f64 - 1.0)).abs() < 1e-12);
        }

        let rho = counterexample_state(&t);
        let basis = ReferenceBasis::identity(3);
        assert!((coherence_l2(&rho, &basis, &t).unwrap() - 0.125).abs() < 1e-14);
    }

    #[test]
    fn qubit_l1_l2_closed_forms() {
        let t = tol();
        let basis = ReferenceBasis::identity(2);
        let (u, w) = (0.3, C64::new(0.1, 0.15));
        let m = ComplexMatrix::from_rows(&[
            vec![C64::new(u, 0.0), w.conj()],
            vec![w, C64::new(1.0 - u, 0.0)],
        ])
        .unwrap();
        let rho = DensityMatrix::new(m, &t).unwrap();
        assert!((coherence_l1(&rho, &basis, &t).unwrap() - 2.0 * w.norm()).abs() < 1e-12);
        assert!((coherence_l2(&rho, &basis, &t).unwrap() - 2.0 * w.norm_sqr()).abs() < 1e-12);
    }

    #[test]
    fn counterexample_alpha_two_golden() {
        let t = tol();
        let basis = ReferenceBasis::identity(3);
        let rho = counterexample_state(&t);
        let res = coherence_alpha(&rho, &basis, a(2.0), &t).unwrap();
        let s2 = 2f64.sqrt();
        assert!((res.value - (2.0 * s2 - 1.0) / 4.0).abs() < 1e-12);
        let n = 2.0 + s2;
        let expect = [1.0 / n, s2 / n, 1.0 / n];
        for (w, e) in res.minimizer.weights.as_slice().iter().zip(expect) {
            assert!((w - e).abs() < 1e-12);
        }
        // quadratic identity
        let quad = coherence_2_quadratic(&rho, &basis, &t).unwrap();
        assert!((quad - res.value).abs() < 1e-12);
        // consistency with the divergence to the minimizer
        let div = divergence_to_incoherent(&rho, &basis, res.minimizer.weights.as_slice(), a(2.0), &t)
            .unwrap()
            .finite()
            .unwrap();
        assert!((div - res.value).abs() < 1e-10);
    }

    #[test]
    fn incoherent_states_have_zero_coherence() {
        let t = tol();
        let basis = ReferenceBasis::identity(3);
        let inc = DensityMatrix::from_diagonal(&[0.6, 0.3, 0.1], &t).unwrap();
        for al in [0.5, 1.0, 1.5, 2.0, 3.0] {
            let v = coherence_alpha(&inc, &basis, a(al), &t).unwrap().value;
            assert!(v.abs() < 1e-10, "alpha {}", al);
        }
    }

    #[test]
    fn plus_state_alpha_two_is_one() {
        let t = tol();
        let basis = ReferenceBasis::identity(2);
        let plus = DensityMatrix::pure(&[C64::new(1.0, 0.0), C64::new(1.0, 0.0)], &t).unwrap();
        let v = coherence_alpha(&plus, &basis, a(2.0), &t).unwrap().value;
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dephasing_is_the_alpha_one_minimizer() {
        let t = tol();
        let basis = ReferenceBasis::identity(3);
        let rho = counterexample_state(&t);
        let min = closest_incoherent(&rho, &basis, a(1.0), &t).unwrap();
        let expect = [0.25, 0.5, 0.25];
        for (w, e) in min.weights.as_slice().iter().zip(expect) {
            assert!((w - e).abs() < 1e-12);
        }
        // Basis states are their own closest incoherent state.
        let e1 = DensityMatrix::pure(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], &t).unwrap();
        let basis2 = ReferenceBasis::identity(2);
        let min = closest_incoherent(&e1, &basis2, a(2.0), &t).unwrap();
        assert!((min.weights.as_slice()[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn consistency_divergence_equals_value() {
        let t = tol();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..15 {
            let d = rng.gen_range(2..=4);
            let basis = ReferenceBasis::identity(d);
            let rho = random_state(d, &mut rng);
            for al in [0.5, 1.0, 1.5, 2.0] {
                let res = coherence_alpha(&rho, &basis, a(al), &t).unwrap();
                let div = divergence_to_incoherent(
                    &rho,
                    &basis,
                    res.minimizer.weights.as_slice(),
                    a(al),
                    &t,
                )
                .unwrap()
                .finite()
                .unwrap();
                assert!(
                    (div - res.value).abs() <= 1e-10,
                    "alpha {}: {} vs {}",
                    al,
                    div,
                    res.value
                );
            }
        }
    }

    #[test]
    fn quadratic_identity_random() {
        let t = tol();
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..20 {
            let d = rng.gen_range(2..=5);
            let basis = ReferenceBasis::identity(d);
            let rho = random_state(d, &mut rng);
            let quad = coherence_2_quadratic(&rho, &basis, &t).unwrap();
            let closed = coherence_alpha(&rho, &basis, a(2.0), &t).unwrap().value;
            assert!((quad - closed).abs() <= 1e-10);
        }
    }

    #[test]
    fn basis_covariance() {
        let t = tol();
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        // Build a random unitary from the eigenvectors of a random Hermitian.
        let h = crate::linalg::tests_support::random_hermitian(3, &mut rng);
        let u = eigh(&h, &t).unwrap().eigenvectors;
        let rho = random_state(3, &mut rng);
        let rotated =
            DensityMatrix::new(u.mul(rho.matrix()).mul(&u.adjoint()), &t).unwrap();
        let rotated_basis = ReferenceBasis::from_unitary(u).unwrap();
        let identity_basis = ReferenceBasis::identity(3);
        for al in [0.5, 1.0, 2.0] {
            let v1 = coherence_alpha(&rotated, &rotated_basis, a(al), &t).unwrap().value;
            let v2 = coherence_alpha(&rho, &identity_basis, a(al), &t).unwrap().value;
            assert!((v1 - v2).abs() <= 1e-10, "alpha {}", al);
        }
    }

    #[test]
    fn mixedness_examples() {
        let t = tol();
        let pure = DensityMatrix::pure(&[C64::new(1.0, 0.0), C64::new(1.0, 0.0)], &t).unwrap();
        assert!(mixedness(&pure).unwrap().abs() < 1e-12);
        let mixed = DensityMatrix::maximally_mixed(4);
        assert!((mixedness(&mixed).unwrap() - 1.0).abs() < 1e-12);
        let rho = counterexample_state(&t);
        assert!((mixedness(&rho).unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn purity_bound_examples() {
        let t = tol();
        let mixed = DensityMatrix::maximally_mixed(3);
        assert!(purity_upper_bound(&mixed, a(1.5)).abs() < 1e-12);
        let plus = DensityMatrix::pure(&[C64::new(1.0, 0.0), C64::new(1.0, 0.0)], &t).unwrap();
        // The bound at alpha = 2 reduces to d Tr rho^2 - 1 = 1, attained by |+>.
        assert!((purity_upper_bound(&plus, a(2.0)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn purity_bound_dominates_alpha_three() {
        let t = tol();
        let basis = ReferenceBasis::identity(3);
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..1000 {
            let rho = random_state(3, &mut rng);
            let c = coherence_alpha(&rho, &basis, a(3.0), &t).unwrap().value;
            let bound = purity_upper_bound(&rho, a(3.0));
            assert!(c <= bound + 1e-9);
            let tight = purity_upper_bound_true_lambda_max(&rho, a(3.0), &t).unwrap();
            assert!(c <= tight + 1e-9);
            assert!(tight <= bound + 1e-9);
        }
    }

    #[test]
    fn tradeoff_cases() {
        let t = tol();
        let mixed = DensityMatrix::maximally_mixed(3);
        let basis = ReferenceBasis::identity(3);
        let rep = tradeoff_report(&mixed, &basis, a(2.0), &t).unwrap();
        assert!((rep.sum - 1.0).abs() < 1e-12);
        assert!(rep.holds_tradeoff);

        let plus = DensityMatrix::pure(&[C64::new(1.0, 0.0), C64::new(1.0, 0.0)], &t).unwrap();
        let basis2 = ReferenceBasis::identity(2);
        let rep = tradeoff_report(&plus, &basis2, a(2.0), &t).unwrap();
        assert!((rep.sum - 1.0).abs() < 1e-12);

        assert!(matches!(
            tradeoff_report(&mixed, &basis, a(3.0), &t),
            Err(Error::AlphaOutOfRange(_))
        ));
    }

    #[test]
    fn brute_force_agrees_on_counterexample() {
        let t = tol();
        let basis = ReferenceBasis::identity(3);
        let rho = counterexample_state(&t);
        let oracle =
            brute_force_coherence(&rho, &basis, a(2.0), &SearchBudget::default(), &t).unwrap();
        let expected = (2.0 * 2f64.sqrt() - 1.0) / 4.0;
        assert!((oracle - expected).abs() < 1e-6, "oracle {}", oracle);
    }

    #[test]
    fn brute_force_agrees_on_random_qubits() {
        let t = tol();
        let basis = ReferenceBasis::identity(2);
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..100 {
            let rho = random_state(2, &mut rng);
            for al in [0.5, 1.5, 2.0] {
                let closed = coherence_alpha(&rho, &basis, a(al), &t).unwrap().value;
                let oracle =
                    brute_force_coherence(&rho, &basis, a(al), &SearchBudget::default(), &t)
                        .unwrap();
                assert!(
                    (closed - oracle).abs() <= 1e-6,
                    "alpha {}: closed {} oracle {}",
                    al,
                    closed,
                    oracle
                );
            }
        }
    }

    #[test]
    fn brute_force_rejects_large_dimension() {
        let t = tol();
        let rho = DensityMatrix::maximally_mixed(7);
        let basis = ReferenceBasis::identity(7);
        assert!(matches!(
            brute_force_coherence(&rho, &basis, a(2.0), &SearchBudget::default(), &t),
            Err(Error::DimensionTooLarge(7))
        ));
    }

    #[test]
    fn faithfulness() {
        let t = tol();
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..30 {
            let d = rng.gen_range(2..=4);
            let basis = ReferenceBasis::identity(d);
            let rho = random_state(d, &mut rng);
            let off = offdiagonal_mass(&rho, &basis, &t).unwrap();
            let c = coherence_alpha(&rho, &basis, a(1.5), &t).unwrap().value;
            if off <= 1e-10 {
                assert!(c <= 1e-10);
            } else {
                assert!(c > 0.0);
            }
        }
    }
}
