//! Kraus-operator channels, incoherent-operation classification, selective
//! measurements, and the monotonicity reports the fuzz harness consumes.
//!
//! Kraus operators may have heterogeneous output dimensions; the block-column
//! lifting embeds them into a common direct-sum output space.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::coherence::{coherence_alpha, ReferenceBasis};
use crate::divergence::{
    quantum_divergence_unnormalized, quantum_tsallis, tsallis_classical, AlphaParam,
    DivergenceValue, ProbabilityVector,
};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, DensityMatrix, Tolerances, C64};
use crate::measure::CoherenceMeasure;

/// Outcomes with probability below this are dropped from weighted sums.
pub const PROB_FLOOR: f64 = 1e-12;

const COMPLETENESS_TOL: f64 = 1e-9;
const INCOHERENT_ENTRY_TOL: f64 = 1e-10;

/// An ordered set of Kraus operators sharing the input dimension and
/// satisfying the completeness relation.
#[derive(Debug, Clone)]
pub struct KrausSet {
    input_dim: usize,
    operators: Vec<ComplexMatrix>,
}

impl KrausSet {
    pub fn new(operators: Vec<ComplexMatrix>) -> Result<Self> {
        if operators.is_empty() {
            return Err(Error::InvalidMatrix("empty Kraus set".into()));
        }
        let input_dim = operators[0].cols();
        if operators.iter().any(|k| k.cols() != input_dim) {
            return Err(Error::DimensionMismatch {
                left: input_dim,
                right: operators.iter().map(|k| k.cols()).find(|&c| c != input_dim).unwrap(),
            });
        }
        let mut sum = ComplexMatrix::zeros(input_dim, input_dim);
        for k in &operators {
            sum = sum.add(&k.adjoint().mul(k));
        }
        let residual = sum.sub(&ComplexMatrix::identity(input_dim)).max_abs();
        if residual > COMPLETENESS_TOL {
            return Err(Error::NotTracePreserving(residual));
        }
        Ok(KrausSet { input_dim, operators })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn output_dims(&self) -> Vec<usize> {
        self.operators.iter().map(|k| k.rows()).collect()
    }

    pub fn homogeneous_output(&self) -> bool {
        self.operators.iter().all(|k| k.rows() == self.operators[0].rows())
    }

    pub fn completeness_residual(&self) -> f64 {
        let mut sum = ComplexMatrix::zeros(self.input_dim, self.input_dim);
        for k in &self.operators {
            sum = sum.add(&k.adjoint().mul(k));
        }
        sum.sub(&ComplexMatrix::identity(self.input_dim)).max_abs()
    }

    pub fn all_incoherent(&self) -> bool {
        self.operators.iter().all(|k| {
            is_incoherent_kraus(
                k,
                &ReferenceBasis::identity(k.cols()),
                &ReferenceBasis::identity(k.rows()),
            )
            .unwrap_or(false)
        })
    }
}

/// Sufficient and decidable incoherence criterion: in the two basis frames,
/// every column of K has at most one entry of non-negligible modulus, so
/// diagonal inputs map to diagonal outputs.
pub fn is_incoherent_kraus(
    k: &ComplexMatrix,
    basis_in: &ReferenceBasis,
    basis_out: &ReferenceBasis,
) -> Result<bool> {
    if k.cols() != basis_in.dim() || k.rows() != basis_out.dim() {
        return Err(Error::DimensionMismatch { left: k.cols(), right: basis_in.dim() });
    }
    let framed = if basis_in.is_identity() && basis_out.is_identity() {
        k.clone()
    } else {
        // Express K in the two basis frames: U_out† K U_in.
        let u_in = basis_in.unitary_or_identity();
        let u_out = basis_out.unitary_or_identity();
        u_out.adjoint().mul(k).mul(&u_in)
    };
    for j in 0..framed.cols() {
        let significant = (0..framed.rows())
            .filter(|&i| framed[(i, j)].norm() > INCOHERENT_ENTRY_TOL)
            .count();
        if significant > 1 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Cross-check of the incoherence criterion: apply K to every basis state and
/// measure the off-diagonal mass of the (unnormalized) output.
pub fn kraus_preserves_diagonality(k: &ComplexMatrix) -> bool {
    for j in 0..k.cols() {
        let col = k.column(j);
        for a in 0..k.rows() {
            for b in 0..k.rows() {
                if a != b && (col[a] * col[b].conj()).norm() > INCOHERENT_ENTRY_TOL {
                    return false;
                }
            }
        }
    }
    true
}

/// Apply the channel: sum_n K_n rho K_n†. Outputs must share a dimension.
pub fn apply_channel(kraus: &KrausSet, rho: &DensityMatrix, tol: &Tolerances) -> Result<DensityMatrix> {
    if !kraus.homogeneous_output() {
        return Err(Error::HeterogeneousOutputs);
    }
    if rho.dim() != kraus.input_dim() {
        return Err(Error::DimensionMismatch { left: rho.dim(), right: kraus.input_dim() });
    }
    let d_out = kraus.operators()[0].rows();
    let mut out = ComplexMatrix::zeros(d_out, d_out);
    for k in kraus.operators() {
        out = out.add(&k.mul(rho.matrix()).mul(&k.adjoint()));
    }
    DensityMatrix::new(out, tol)
}

/// One retained measurement outcome.
#[derive(Debug, Clone)]
pub struct SelectiveOutcome {
    pub index: usize,
    pub probability: f64,
    /// Present iff the probability clears the floor.
    pub state: Option<DensityMatrix>,
}

/// Selective measurement: p_n = Tr(K_n rho K_n†) and normalized outputs.
pub fn selective_measure(
    kraus: &KrausSet,
    rho: &DensityMatrix,
    tol: &Tolerances,
) -> Result<Vec<SelectiveOutcome>> {
    if rho.dim() != kraus.input_dim() {
        return Err(Error::DimensionMismatch { left: rho.dim(), right: kraus.input_dim() });
    }
    let mut outcomes = Vec::with_capacity(kraus.len());
    for (n, k) in kraus.operators().iter().enumerate() {
        let raw = k.mul(rho.matrix()).mul(&k.adjoint());
        let p = raw.trace().re.max(0.0);
        let state = if p > PROB_FLOOR {
            Some(DensityMatrix::new(raw.scale(C64::new(1.0 / p, 0.0)), tol)?)
        } else {
            None
        };
        outcomes.push(SelectiveOutcome { index: n, probability: p, state });
    }
    Ok(outcomes)
}

/// All sides of the selective-measurement monotonicity statements for one
/// instance: the generalized weighted sum with weights p_n^a q_n^(1-a) and the
/// plain probability-weighted sum.
#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityReport {
    pub measure: String,
    pub alpha: f64,
    pub c_input: f64,
    pub strong_weighted_sum: Option<f64>,
    pub standard_sum: f64,
    pub probabilities: Vec<f64>,
    pub reference_probabilities: Vec<f64>,
    /// Generalized inequality holds (or the instance is infinite-consistent).
    pub holds_generalized: bool,
    /// Plain-probability inequality holds.
    pub holds_standard: bool,
    /// A q_n vanished while p_n > 0 with exponent > 1; the generalized bound
    /// holds in the extended (+infinity) sense.
    pub infinite_consistent: bool,
    pub generalized_gap: Option<f64>,
    pub standard_gap: f64,
}

/// Generalized selective-measurement monotonicity for any registered measure:
/// compares sum_n p_n^a q_n^(1-a) C(rho_n) against C(rho), with q_n drawn from
/// the measure's reference incoherent state.
pub fn generalized_monotonicity_report(
    measure: &dyn CoherenceMeasure,
    kraus: &KrausSet,
    rho: &DensityMatrix,
    tol: &Tolerances,
) -> Result<MonotonicityReport> {
    for (n, k) in kraus.operators().iter().enumerate() {
        let inc = is_incoherent_kraus(
            k,
            &ReferenceBasis::identity(k.cols()),
            &ReferenceBasis::identity(k.rows()),
        )?;
        if !inc {
            return Err(Error::NotIncoherentKraus { index: n });
        }
    }
    let exponent = measure.weight_exponent();
    let c_input = measure.value(rho, tol)?;
    let ref_weights = measure.reference_weights(rho, tol)?;
    let delta = ComplexMatrix::diagonal(&ref_weights);

    let outcomes = selective_measure(kraus, rho, tol)?;
    let mut p_all = Vec::with_capacity(kraus.len());
    let mut q_all = Vec::with_capacity(kraus.len());
    let mut strong = 0.0f64;
    let mut standard = 0.0f64;
    let mut infinite_consistent = false;
    for (outcome, k) in outcomes.iter().zip(kraus.operators()) {
        let q = k.mul(&delta).mul(&k.adjoint()).trace().re.max(0.0);
        p_all.push(outcome.probability);
        q_all.push(q);
        let Some(state) = &outcome.state else { continue };
        let c_n = measure.value(state, tol)?;
        standard += outcome.probability * c_n;
        if q <= PROB_FLOOR && exponent > 1.0 {
            // +infinity branch of the weight: the extended inequality holds.
            if c_n > tol.range_tol {
                infinite_consistent = true;
            }
            continue;
        }
        strong += outcome.probability.powf(exponent) * q.powf(1.0 - exponent) * c_n;
    }

    let margin = 1e-9;
    let holds_generalized = infinite_consistent || strong <= c_input + margin;
    let holds_standard = standard <= c_input + margin;
    Ok(MonotonicityReport {
        measure: measure.name().to_string(),
        alpha: exponent,
        c_input,
        strong_weighted_sum: if infinite_consistent { None } else { Some(strong) },
        standard_sum: standard,
        probabilities: p_all,
        reference_probabilities: q_all,
        holds_generalized,
        holds_standard,
        infinite_consistent,
        generalized_gap: if infinite_consistent { None } else { Some(c_input - strong) },
        standard_gap: c_input - standard,
    })
}

/// Selective-measurement monotonicity of C_alpha, with q_n computed from the
/// closed-form closest incoherent state. Restricted to alpha in (0, 2].
pub fn strong_monotonicity_report(
    kraus: &KrausSet,
    rho: &DensityMatrix,
    alpha: AlphaParam,
    tol: &Tolerances,
) -> Result<MonotonicityReport> {
    if alpha.value() > 2.0 {
        return Err(Error::AlphaOutOfRange(alpha.value()));
    }
    let measure = crate::measure::TsallisAlphaMeasure::new(alpha);
    generalized_monotonicity_report(&measure, kraus, rho, tol)
}

/// The generalized-weight variant for the squared l2-norm measure, with
/// reference probabilities r_n from the dephased state.
pub fn l2_generalized_monotonicity_report(
    kraus: &KrausSet,
    rho: &DensityMatrix,
    alpha: AlphaParam,
    tol: &Tolerances,
) -> Result<MonotonicityReport> {
    let measure = crate::measure::L2Measure::new(alpha);
    generalized_monotonicity_report(&measure, kraus, rho, tol)
}

/// Both sides of the mixing-convexity inequality
/// C(sum p_n rho_n) <= sum p_n C(rho_n).
#[derive(Debug, Clone, Serialize)]
pub struct MixingReport {
    pub alpha: f64,
    pub mixed_coherence: f64,
    pub average_coherence: f64,
    pub holds: bool,
}

pub fn mixing_convexity_report(
    states: &[DensityMatrix],
    weights: &ProbabilityVector,
    basis: &ReferenceBasis,
    alpha: AlphaParam,
    tol: &Tolerances,
) -> Result<MixingReport> {
    if alpha.value() > 2.0 {
        return Err(Error::AlphaOutOfRange(alpha.value()));
    }
    if states.len() != weights.len() {
        return Err(Error::LengthMismatch { left: states.len(), right: weights.len() });
    }
    let d = states[0].dim();
    if states.iter().any(|s| s.dim() != d) {
        return Err(Error::DimensionMismatch { left: d, right: 0 });
    }
    let mut mixture = ComplexMatrix::zeros(d, d);
    let mut average = 0.0;
    for (state, &w) in states.iter().zip(weights.as_slice()) {
        mixture = mixture.add(&state.matrix().scale(C64::new(w, 0.0)));
        average += w * coherence_alpha(state, basis, alpha, tol)?.value;
    }
    let mixed_state = DensityMatrix::new(mixture, tol)?;
    let mixed = coherence_alpha(&mixed_state, basis, alpha, tol)?.value;
    Ok(MixingReport {
        alpha: alpha.value(),
        mixed_coherence: mixed,
        average_coherence: average,
        holds: mixed <= average + 1e-9,
    })
}

/// The measurement gap identity: the sum of subnormalized output divergences
/// minus the weighted sum of normalized ones equals the classical divergence
/// of the outcome distributions.
#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    pub alpha: f64,
    pub lhs_sum: DivergenceValue,
    pub rhs_sum: DivergenceValue,
    pub gap: DivergenceValue,
    pub classical: DivergenceValue,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

impl GapReport {
    /// |gap - classical| when both are finite; 0 when both are infinite;
    /// +infinity on a finite/infinite mismatch.
    pub fn identity_residual(&self) -> f64 {
        match (&self.gap, &self.classical) {
            (DivergenceValue::Finite(g), DivergenceValue::Finite(c)) => (g - c).abs(),
            (DivergenceValue::Infinite(_), DivergenceValue::Infinite(_)) => 0.0,
            _ => f64::INFINITY,
        }
    }
}

pub fn measurement_gap(
    kraus: &KrausSet,
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    alpha: AlphaParam,
    tol: &Tolerances,
) -> Result<GapReport> {
    if rho.dim() != kraus.input_dim() || sigma.dim() != kraus.input_dim() {
        return Err(Error::DimensionMismatch { left: rho.dim(), right: kraus.input_dim() });
    }
    let a = alpha.value();
    let mut p_all = Vec::with_capacity(kraus.len());
    let mut q_all = Vec::with_capacity(kraus.len());
    let mut lhs = DivergenceValue::Finite(0.0);
    let mut rhs = DivergenceValue::Finite(0.0);
    for k in kraus.operators() {
        let out_rho = k.mul(rho.matrix()).mul(&k.adjoint());
        let out_sigma = k.mul(sigma.matrix()).mul(&k.adjoint());
        let p = out_rho.trace().re.max(0.0);
        let q = out_sigma.trace().re.max(0.0);
        p_all.push(p);
        q_all.push(q);
        lhs = lhs.add(quantum_divergence_unnormalized(&out_rho, &out_sigma, alpha, tol)?);
        if p > PROB_FLOOR && q > PROB_FLOOR {
            let rho_n = DensityMatrix::new(out_rho.scale(C64::new(1.0 / p, 0.0)), tol)?;
            let sigma_n = DensityMatrix::new(out_sigma.scale(C64::new(1.0 / q, 0.0)), tol)?;
            let weight = p.powf(a) * q.powf(1.0 - a);
            match quantum_tsallis(&rho_n, &sigma_n, alpha, tol)? {
                DivergenceValue::Finite(v) => {
                    rhs = rhs.add(DivergenceValue::Finite(weight * v));
                }
                DivergenceValue::Infinite(r) => {
                    rhs = rhs.add(DivergenceValue::Infinite(r));
                }
            }
        }
        // p > 0, q = 0 contributes +infinity to the LHS (already captured by
        // the unnormalized divergence for exponents above one) and nothing to
        // the RHS; p = 0 contributes nothing to either side.
    }
    let gap = match (&lhs, &rhs) {
        (DivergenceValue::Finite(l), DivergenceValue::Finite(r)) => DivergenceValue::Finite(l - r),
        (DivergenceValue::Infinite(r), _) => DivergenceValue::Infinite(*r),
        (_, DivergenceValue::Infinite(r)) => DivergenceValue::Infinite(*r),
    };
    let p_sum: f64 = p_all.iter().sum();
    let q_sum: f64 = q_all.iter().sum();
    let p_vec = ProbabilityVector::new(p_all.iter().map(|x| x / p_sum).collect())?;
    let q_vec = ProbabilityVector::new(q_all.iter().map(|x| x / q_sum).collect())?;
    let classical = tsallis_classical(&p_vec, &q_vec, alpha)?;
    Ok(GapReport {
        alpha: a,
        lhs_sum: lhs,
        rhs_sum: rhs,
        gap,
        classical,
        p: p_vec.as_slice().to_vec(),
        q: q_vec.as_slice().to_vec(),
    })
}

/// Embed every Kraus operator into the direct sum of the output spaces as a
/// block column, making outcome supports mutually orthogonal.
pub fn lift_block_column(kraus: &KrausSet) -> KrausSet {
    let dims = kraus.output_dims();
    let total: usize = dims.iter().sum();
    let mut offset = 0usize;
    let mut lifted = Vec::with_capacity(kraus.len());
    for (k, &dn) in kraus.operators().iter().zip(&dims) {
        let mut big = ComplexMatrix::zeros(total, kraus.input_dim());
        for i in 0..dn {
            for j in 0..kraus.input_dim() {
                big[(offset + i, j)] = k[(i, j)];
            }
        }
        lifted.push(big);
        offset += dn;
    }
    KrausSet::new(lifted).expect("lifting preserves completeness")
}

/// Draw a rank-r density matrix from the Ginibre ensemble: G G† / Tr(G G†)
/// with G a d x r matrix of standard complex Gaussians.
pub fn random_density(dim: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    if rank == 0 || rank > dim {
        return Err(Error::BadRank { rank, dim });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_density_with(dim, rank, &mut rng)
}

pub fn random_density_with(dim: usize, rank: usize, rng: &mut impl Rng) -> Result<DensityMatrix> {
    if rank == 0 || rank > dim {
        return Err(Error::BadRank { rank, dim });
    }
    let mut g = ComplexMatrix::zeros(dim, rank);
    for i in 0..dim {
        for j in 0..rank {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            g[(i, j)] = C64::new(re, im);
        }
    }
    let gg = g.mul(&g.adjoint());
    DensityMatrix::from_unnormalized(&gg, &Tolerances::default())
}

/// Generate a random incoherent Kraus set: each operator carries at most one
/// nonzero entry per column (and per row, so the completeness sum stays
/// diagonal), then columns are rescaled to satisfy the completeness relation
/// up to round-off.
pub fn random_incoherent_kraus(
    d_in: usize,
    outcome_dims: &[usize],
    seed: u64,
) -> Result<KrausSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_incoherent_kraus_with(d_in, outcome_dims, &mut rng)
}

pub fn random_incoherent_kraus_with(
    d_in: usize,
    outcome_dims: &[usize],
    rng: &mut impl Rng,
) -> Result<KrausSet> {
    let capacity: usize = outcome_dims.iter().sum();
    if d_in == 0 || outcome_dims.is_empty() || capacity < d_in {
        return Err(Error::InfeasibleShape { dim: d_in, capacity });
    }
    let n_ops = outcome_dims.len();
    // free rows per operator, consumed as columns claim placements
    let mut free_rows: Vec<Vec<usize>> = outcome_dims
        .iter()
        .map(|&dn| {
            let mut rows: Vec<usize> = (0..dn).collect();
            rows.shuffle(rng);
            rows
        })
        .collect();
    // placements[n] holds (row, col, value)
    let mut placements: Vec<Vec<(usize, usize, C64)>> = vec![Vec::new(); n_ops];
    let mut used_col: Vec<Vec<bool>> = vec![vec![false; d_in]; n_ops];

    fn draw_value(rng: &mut impl Rng) -> C64 {
        loop {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let z = C64::new(re, im);
            if z.norm() > 0.05 {
                return z;
            }
        }
    }

    // Coverage pass: every input column gets at least one placement.
    for col in 0..d_in {
        let candidates: Vec<usize> =
            (0..n_ops).filter(|&n| !free_rows[n].is_empty()).collect();
        if candidates.is_empty() {
            return Err(Error::InfeasibleShape { dim: d_in, capacity });
        }
        let n = candidates[rng.gen_range(0..candidates.len())];
        let row = free_rows[n].pop().unwrap();
        placements[n].push((row, col, draw_value(rng)));
        used_col[n][col] = true;
    }
    // Density pass: extra placements where an operator still has free rows.
    for n in 0..n_ops {
        for col in 0..d_in {
            if used_col[n][col] || free_rows[n].is_empty() {
                continue;
            }
            if rng.gen_bool(0.5) {
                let row = free_rows[n].pop().unwrap();
                placements[n].push((row, col, draw_value(rng)));
                used_col[n][col] = true;
            }
        }
    }

    // Column rescale so sum_n K_n† K_n = I.
    let mut col_norm_sq = vec![0.0f64; d_in];
    for ops in &placements {
        for &(_, col, v) in ops {
            col_norm_sq[col] += v.norm_sqr();
        }
    }
    let mut operators = Vec::with_capacity(n_ops);
    for (n, &dn) in outcome_dims.iter().enumerate() {
        let mut k = ComplexMatrix::zeros(dn, d_in);
        for &(row, col, v) in &placements[n] {
            k[(row, col)] = v / col_norm_sq[col].sqrt();
        }
        operators.push(k);
    }
    KrausSet::new(operators)
}

/// The worked two-operator example: K_1 routes |e_2> to |e_1> and damps
/// |e_3> by a; K_2 keeps |e_1> and routes |e_3> to |e_2> with amplitude b.
/// Requires |a|^2 + |b|^2 = 1.
pub fn counterexample_kraus(a: C64, b: C64) -> Result<KrausSet> {
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let k1 = ComplexMatrix::from_rows(&[
        vec![z, one, z],
        vec![z, z, z],
        vec![z, z, a],
    ])?;
    let k2 = ComplexMatrix::from_rows(&[
        vec![one, z, z],
        vec![z, z, b],
        vec![z, z, z],
    ])?;
    KrausSet::new(vec![k1, k2])
}
