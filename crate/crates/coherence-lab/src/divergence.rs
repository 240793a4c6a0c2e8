//! Classical and quantum Tsallis relative alpha-entropies with extended-real
//! (+infinity) semantics.
//!
//! The limit alpha -> 1 is dispatched to a dedicated relative-entropy branch
//! instead of evaluating the 0/0 form; the closed form degrades numerically
//! near alpha = 1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigh, matrix_power, range_contained, ComplexMatrix, DensityMatrix, Tolerances};

/// |alpha - 1| below this dispatches to the relative-entropy branch.
pub const ALPHA_ONE_EPS: f64 = 1e-9;

/// Finite divergences this close to zero from below are clamped to zero;
/// anything more negative is an internal-consistency failure.
pub const CLAMP_FLOOR: f64 = -1e-12;

/// Order parameter of the divergence family. Finite and strictly positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaParam {
    alpha: f64,
}

impl AlphaParam {
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::BadAlpha(alpha));
        }
        Ok(AlphaParam { alpha })
    }

    pub fn value(&self) -> f64 {
        self.alpha
    }

    pub fn is_limit_one(&self) -> bool {
        (self.alpha - 1.0).abs() < ALPHA_ONE_EPS
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InfiniteReason {
    SupportViolation,
}

/// Extended non-negative real: a finite value or +infinity with a reason.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DivergenceValue {
    Finite(f64),
    Infinite(InfiniteReason),
}

impl DivergenceValue {
    pub fn is_finite(&self) -> bool {
        matches!(self, DivergenceValue::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            DivergenceValue::Finite(v) => Some(*v),
            DivergenceValue::Infinite(_) => None,
        }
    }

    /// Infinity propagates through sums.
    pub fn add(self, other: DivergenceValue) -> DivergenceValue {
        match (self, other) {
            (DivergenceValue::Finite(a), DivergenceValue::Finite(b)) => {
                DivergenceValue::Finite(a + b)
            }
            (DivergenceValue::Infinite(r), _) | (_, DivergenceValue::Infinite(r)) => {
                DivergenceValue::Infinite(r)
            }
        }
    }
}

impl Serialize for DivergenceValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("DivergenceValue", 2)?;
        match self {
            DivergenceValue::Finite(v) => {
                st.serialize_field("finite", &true)?;
                st.serialize_field("value", v)?;
            }
            DivergenceValue::Infinite(_) => {
                st.serialize_field("finite", &false)?;
                st.serialize_field("value", &Option::<f64>::None)?;
            }
        }
        st.end()
    }
}

/// Clamp tiny negative round-off to zero; reject genuinely negative values,
/// which would contradict non-negativity of the divergence.
fn finalize_nonnegative(value: f64) -> Result<DivergenceValue> {
    if value < CLAMP_FLOOR {
        return Err(Error::NegativeDivergence(value));
    }
    Ok(DivergenceValue::Finite(value.max(0.0)))
}

/// Probability vector: non-negative entries summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityVector {
    probs: Vec<f64>,
}

impl ProbabilityVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidProbabilities("empty vector".into()));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidProbabilities(
                "entries must be finite and non-negative".into(),
            ));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidProbabilities(format!("sum {} is not 1", sum)));
        }
        Ok(ProbabilityVector { probs })
    }

    pub fn uniform(n: usize) -> Self {
        ProbabilityVector { probs: vec![1.0 / n as f64; n] }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }
}

/// The alpha-logarithm ln_alpha(xi) = (xi^(1-alpha) - 1)/(1 - alpha);
/// the natural logarithm in the limit alpha -> 1.
pub fn alpha_log(xi: f64, alpha: AlphaParam) -> Result<f64> {
    if !(xi > 0.0) {
        return Err(Error::NonPositiveArgument(xi));
    }
    if alpha.is_limit_one() {
        Ok(xi.ln())
    } else {
        let a = alpha.value();
        Ok((xi.powf(1.0 - a) - 1.0) / (1.0 - a))
    }
}

/// Classical Tsallis relative alpha-entropy D_alpha(p || q).
pub fn tsallis_classical(
    p: &ProbabilityVector,
    q: &ProbabilityVector,
    alpha: AlphaParam,
) -> Result<DivergenceValue> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch { left: p.len(), right: q.len() });
    }
    if alpha.is_limit_one() {
        let mut sum = 0.0;
        for (&pj, &qj) in p.as_slice().iter().zip(q.as_slice()) {
            if pj == 0.0 {
                continue; // -0 ln 0 = 0
            }
            if qj == 0.0 {
                return Ok(DivergenceValue::Infinite(InfiniteReason::SupportViolation));
            }
            sum += pj * (pj / qj).ln();
        }
        return finalize_nonnegative(sum);
    }
    let a = alpha.value();
    let mut acc = 0.0;
    for (&pj, &qj) in p.as_slice().iter().zip(q.as_slice()) {
        if pj == 0.0 {
            continue;
        }
        if qj == 0.0 {
            if a > 1.0 {
                return Ok(DivergenceValue::Infinite(InfiniteReason::SupportViolation));
            }
            continue; // q^(1-alpha) = 0 for alpha < 1
        }
        acc += pj.powf(a) * qj.powf(1.0 - a);
    }
    finalize_nonnegative((acc - 1.0) / (a - 1.0))
}

/// Tr(A^alpha B^(1-alpha)) with both powers restricted to supports; the trace
/// is effectively taken over ran(B).
fn trace_power_product(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    alpha: f64,
    tol: &Tolerances,
) -> Result<f64> {
    let a_pow = matrix_power(a, alpha, tol)?;
    let eig_b = eigh(b, tol)?;
    if let Some(&min) = eig_b.eigenvalues.first() {
        if min < -tol.psd_tol {
            return Err(Error::NotPsd { eigenvalue: min });
        }
    }
    let thr = eig_b.rank_threshold(tol);
    let b_pow = eig_b.apply_spectral(|l| if l > thr { l.powf(1.0 - alpha) } else { 0.0 });
    Ok(a_pow.mul(&b_pow).trace().re)
}

/// Tr(A ln A - A ln B) on the supports; the off-support mass of A must be
/// handled by the caller's range check.
fn relative_entropy_raw(a: &ComplexMatrix, b: &ComplexMatrix, tol: &Tolerances) -> Result<f64> {
    let eig_a = eigh(a, tol)?;
    let thr_a = eig_a.rank_threshold(tol);
    let s_a: f64 = eig_a
        .eigenvalues
        .iter()
        .filter(|&&l| l > thr_a)
        .map(|&l| l * l.ln())
        .sum();
    let eig_b = eigh(b, tol)?;
    let thr_b = eig_b.rank_threshold(tol);
    let d = b.rows();
    let mut s_ab = 0.0;
    for (k, &mu) in eig_b.eigenvalues.iter().enumerate() {
        if mu <= thr_b {
            continue;
        }
        let v = eig_b.eigenvectors.column(k);
        // <v| A |v>
        let mut w = 0.0;
        for i in 0..d {
            for j in 0..d {
                w += (v[i].conj() * a[(i, j)] * v[j]).re;
            }
        }
        s_ab += w * mu.ln();
    }
    Ok(s_a - s_ab)
}

/// Quantum Tsallis alpha-divergence between density matrices.
pub fn quantum_tsallis(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    alpha: AlphaParam,
    tol: &Tolerances,
) -> Result<DivergenceValue> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { left: rho.dim(), right: sigma.dim() });
    }
    if alpha.is_limit_one() {
        if !range_contained(rho.matrix(), sigma.matrix(), tol)? {
            return Ok(DivergenceValue::Infinite(InfiniteReason::SupportViolation));
        }
        let v = relative_entropy_raw(rho.matrix(), sigma.matrix(), tol)?;
        return finalize_nonnegative(v);
    }
    let a = alpha.value();
    if a > 1.0 && !range_contained(rho.matrix(), sigma.matrix(), tol)? {
        return Ok(DivergenceValue::Infinite(InfiniteReason::SupportViolation));
    }
    let t = trace_power_product(rho.matrix(), sigma.matrix(), a, tol)?;
    finalize_nonnegative((t - 1.0) / (a - 1.0))
}

/// Alpha-divergence of a PSD operator A with respect to B, without unit-trace
/// normalization: [Tr(A^alpha B^(1-alpha)) - Tr(A)] / (alpha - 1).
///
/// Support violation for alpha > 1 yields +infinity, matching the extended
/// convention used by the measurement gap identity. May be negative for
/// non-normalized inputs.
pub fn quantum_divergence_unnormalized(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    alpha: AlphaParam,
    tol: &Tolerances,
) -> Result<DivergenceValue> {
    if a.rows() != b.rows() || !a.is_square() || !b.is_square() {
        return Err(Error::DimensionMismatch { left: a.rows(), right: b.rows() });
    }
    let trace_a = a.trace().re;
    if trace_a.abs() <= f64::EPSILON {
        // Zero operator: every term vanishes.
        return Ok(DivergenceValue::Finite(0.0));
    }
    if alpha.is_limit_one() {
        if !range_contained(a, b, tol)? {
            return Ok(DivergenceValue::Infinite(InfiniteReason::SupportViolation));
        }
        return Ok(DivergenceValue::Finite(relative_entropy_raw(a, b, tol)?));
    }
    let av = alpha.value();
    if av > 1.0 && !range_contained(a, b, tol)? {
        return Ok(DivergenceValue::Infinite(InfiniteReason::SupportViolation));
    }
    let t = trace_power_product(a, b, av, tol)?;
    Ok(DivergenceValue::Finite((t - trace_a) / (av - 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn a(x: f64) -> AlphaParam {
        AlphaParam::new(x).unwrap()
    }

    #[test]
    fn alpha_log_values() {
        assert_eq!(alpha_log(1.0, a(0.5)).unwrap(), 0.0);
        assert_eq!(alpha_log(1.0, a(2.0)).unwrap(), 0.0);
        assert!((alpha_log(2.0, a(2.0)).unwrap() - 0.5).abs() < 1e-15);
        assert!((alpha_log(std::f64::consts::E, a(1.0)).unwrap() - 1.0).abs() < 1e-15);
        assert!(alpha_log(0.0, a(2.0)).is_err());
    }

    #[test]
    fn classical_examples() {
        let half = ProbabilityVector::new(vec![0.5, 0.5]).unwrap();
        let point = ProbabilityVector::new(vec![1.0, 0.0]).unwrap();
        let flipped = ProbabilityVector::new(vec![0.0, 1.0]).unwrap();

        assert_eq!(
            tsallis_classical(&half, &half, a(2.0)).unwrap(),
            DivergenceValue::Finite(0.0)
        );
        let v = tsallis_classical(&point, &half, a(2.0)).unwrap().finite().unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        assert!(matches!(
            tsallis_classical(&point, &flipped, a(2.0)).unwrap(),
            DivergenceValue::Infinite(_)
        ));
        // alpha < 1 treats missing q-support as zero contribution.
        let v = tsallis_classical(&point, &flipped, a(0.5)).unwrap().finite().unwrap();
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn classical_alpha_continuity() {
        let p = ProbabilityVector::new(vec![0.7, 0.2, 0.1]).unwrap();
        let q = ProbabilityVector::new(vec![0.3, 0.4, 0.3]).unwrap();
        let at_one = tsallis_classical(&p, &q, a(1.0)).unwrap().finite().unwrap();
        for eps in [1e-6, -1e-6] {
            let near = tsallis_classical(&p, &q, a(1.0 + eps)).unwrap().finite().unwrap();
            assert!((near - at_one).abs() < 1e-4);
        }
    }

    #[test]
    fn quantum_equal_states_vanish() {
        let t = tol();
        let rho = DensityMatrix::pure(&[C64::new(1.0, 0.0), C64::new(0.5, 0.5)], &t).unwrap();
        for al in [0.5, 1.0, 1.5, 2.0] {
            let v = quantum_tsallis(&rho, &rho, a(al), &t).unwrap().finite().unwrap();
            assert!(v.abs() < 1e-10, "alpha {} gave {}", al, v);
        }
    }

    #[test]
    fn quantum_matches_classical_on_commuting_states() {
        let t = tol();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let d = rng.gen_range(2..=4);
            let mut pv: Vec<f64> = (0..d).map(|_| rng.gen_range(0.05..1.0)).collect();
            let mut qv: Vec<f64> = (0..d).map(|_| rng.gen_range(0.05..1.0)).collect();
            let ps: f64 = pv.iter().sum();
            let qs: f64 = qv.iter().sum();
            pv.iter_mut().for_each(|x| *x /= ps);
            qv.iter_mut().for_each(|x| *x /= qs);
            let rho = DensityMatrix::from_diagonal(&pv, &t).unwrap();
            let sigma = DensityMatrix::from_diagonal(&qv, &t).unwrap();
            let p = ProbabilityVector::new(pv).unwrap();
            let q = ProbabilityVector::new(qv).unwrap();
            for al in [0.3, 0.5, 1.0, 1.5, 2.0] {
                let quantum = quantum_tsallis(&rho, &sigma, a(al), &t).unwrap().finite().unwrap();
                let classical = tsallis_classical(&p, &q, a(al)).unwrap().finite().unwrap();
                assert!(
                    (quantum - classical).abs() <= 1e-10,
                    "alpha {}: {} vs {}",
                    al,
                    quantum,
                    classical
                );
            }
        }
    }

    #[test]
    fn counterexample_divergence_to_closest_state() {
        let t = tol();
        let q = C64::new(0.25, 0.0);
        let z = C64::new(0.0, 0.0);
        let rho = DensityMatrix::new(
            ComplexMatrix::from_rows(&[
                vec![q, z, q],
                vec![z, C64::new(0.5, 0.0), z],
                vec![q, z, q],
            ])
            .unwrap(),
            &t,
        )
        .unwrap();
        let s2 = 2f64.sqrt();
        let n = 2.0 + s2;
        let sigma = DensityMatrix::from_diagonal(&[1.0 / n, s2 / n, 1.0 / n], &t).unwrap();
        let v = quantum_tsallis(&rho, &sigma, a(2.0), &t).unwrap().finite().unwrap();
        let expected = (2.0 * s2 - 1.0) / 4.0;
        assert!((v - expected).abs() < 1e-12);
    }

    #[test]
    fn unnormalized_scaling_law() {
        let t = tol();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let g = crate::linalg::tests_support::random_psd(3, &mut rng);
            let h = crate::linalg::tests_support::random_psd(3, &mut rng);
            for al in [0.5, 1.0, 1.5, 2.0] {
                let base = quantum_divergence_unnormalized(&g, &h, a(al), &t)
                    .unwrap()
                    .finite()
                    .unwrap();
                let lam = 2.5;
                let scaled = quantum_divergence_unnormalized(
                    &g.scale(C64::new(lam, 0.0)),
                    &h.scale(C64::new(lam, 0.0)),
                    a(al),
                    &t,
                )
                .unwrap()
                .finite()
                .unwrap();
                assert!((scaled - lam * base).abs() < 1e-8, "alpha {}", al);
            }
        }
    }

    #[test]
    fn unnormalized_block_additivity() {
        let t = tol();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for al in [0.5, 1.5, 2.0] {
            let a1 = crate::linalg::tests_support::random_psd(2, &mut rng);
            let b1 = crate::linalg::tests_support::random_psd(2, &mut rng);
            let a2 = crate::linalg::tests_support::random_psd(2, &mut rng);
            let b2 = crate::linalg::tests_support::random_psd(2, &mut rng);
            let embed = |m: &ComplexMatrix, off: usize| {
                let mut out = ComplexMatrix::zeros(4, 4);
                for i in 0..2 {
                    for j in 0..2 {
                        out[(i + off, j + off)] = m[(i, j)];
                    }
                }
                out
            };
            let asum = embed(&a1, 0).add(&embed(&a2, 2));
            let bsum = embed(&b1, 0).add(&embed(&b2, 2));
            let total = quantum_divergence_unnormalized(&asum, &bsum, a(al), &t)
                .unwrap()
                .finite()
                .unwrap();
            let parts = quantum_divergence_unnormalized(&a1, &b1, a(al), &t)
                .unwrap()
                .finite()
                .unwrap()
                + quantum_divergence_unnormalized(&a2, &b2, a(al), &t)
                    .unwrap()
                    .finite()
                    .unwrap();
            assert!((total - parts).abs() <= 1e-10, "alpha {}", al);
        }
    }

    #[test]
    fn divergence_value_serializes() {
        let f = serde_json::to_value(DivergenceValue::Finite(0.5)).unwrap();
        assert_eq!(f["finite"], true);
        let inf =
            serde_json::to_value(DivergenceValue::Infinite(InfiniteReason::SupportViolation))
                .unwrap();
        assert_eq!(inf["finite"], false);
        assert!(inf["value"].is_null());
    }
}
