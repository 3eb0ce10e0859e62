//! Pure-state verification of the deviation-to-trace-distance theorem.
//!
//! For an enumerable encoded permutation, the verifier builds the joint state
//! over `H = (G x C) ∪ L`, applies the desired permutation on one copy and
//! the encode/permute/decode pipeline on another, and checks that the trace
//! distance between the two pure states is at most `2 * sqrt(deviation)`.
//! Everything is computed with explicit amplitude vectors; instances are
//! small enough that double precision leaves orders of magnitude of
//! headroom.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::aep::{Decoded, EncodedPermutation, Rational};
use crate::error::{domain, resource, Result};
use crate::perm::DENSE_LIMIT;

const NORM_TOLERANCE: f64 = 1e-9;
const IDENTITY_TOLERANCE: f64 = 1e-12;
const INEQUALITY_TOLERANCE: f64 = 1e-9;

/// Amplitudes over `H = (G x C) ∪ L`, indexed `g * |C| + c` for pairs and
/// then leak indices. Unit norm.
#[derive(Clone, Debug)]
pub struct PureState {
    amps: Vec<Complex64>,
}

impl PureState {
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        let norm2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > NORM_TOLERANCE {
            return Err(domain(format!("state norm^2 = {norm2}, expected 1")));
        }
        Ok(Self { amps })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn inner_product(&self, other: &PureState) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }
}

/// Amplitudes of the incoming superposition over the unencoded set, with the
/// seed that generated them (when seeded) recorded for reproducibility.
#[derive(Clone, Debug)]
pub struct InputDistribution {
    amps: Vec<Complex64>,
    seed: Option<u64>,
}

impl InputDistribution {
    pub fn uniform(size: u64) -> Self {
        let a = Complex64::new(1.0 / (size as f64).sqrt(), 0.0);
        Self { amps: vec![a; size as usize], seed: None }
    }

    /// All amplitude on one basis value.
    pub fn basis(size: u64, value: u64) -> Result<Self> {
        if value >= size {
            return Err(domain(format!("basis value {value} out of range [0, {size})")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); size as usize];
        amps[value as usize] = Complex64::new(1.0, 0.0);
        Ok(Self { amps, seed: None })
    }

    /// Random complex amplitudes from a seeded generator, normalized.
    pub fn seeded(size: u64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut amps: Vec<Complex64> = (0..size)
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in &mut amps {
            *a /= norm;
        }
        Self { amps, seed: Some(seed) }
    }

    pub fn size(&self) -> u64 {
        self.amps.len() as u64
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }
}

fn check_enumerable(p: &EncodedPermutation) -> Result<usize> {
    let dim = p.encoded_size();
    if dim > DENSE_LIMIT {
        return Err(resource(format!(
            "state verification needs {dim} amplitudes, over the limit {DENSE_LIMIT}"
        )));
    }
    Ok(dim as usize)
}

fn check_input(p: &EncodedPermutation, a: &InputDistribution) -> Result<()> {
    if a.size() != p.unencoded_size() {
        return Err(domain(format!(
            "input distribution covers {} values, expected {}",
            a.size(),
            p.unencoded_size()
        )));
    }
    let norm2: f64 = a.amps.iter().map(|x| x.norm_sqr()).sum();
    if (norm2 - 1.0).abs() > NORM_TOLERANCE {
        return Err(domain(format!("input norm^2 = {norm2}, expected 1")));
    }
    Ok(())
}

/// Index of a decoded point in the flat `H` ordering.
fn h_index(p: &EncodedPermutation, d: Decoded) -> usize {
    match d {
        Decoded::Value { value, coset } => (value * p.coset_size() + coset) as usize,
        Decoded::Leak { index } => (p.unencoded_size() * p.coset_size() + index) as usize,
    }
}

/// The joint input state: each unencoded amplitude spread uniformly over the
/// coset values, zero on leakage values.
pub fn lifted_state(p: &EncodedPermutation, a: &InputDistribution) -> Result<PureState> {
    let dim = check_enumerable(p)?;
    check_input(p, a)?;
    let mut amps = vec![Complex64::new(0.0, 0.0); dim];
    let spread = 1.0 / (p.coset_size() as f64).sqrt();
    for g in 0..p.unencoded_size() {
        let base = (g * p.coset_size()) as usize;
        let v = a.amps[g as usize] * spread;
        for c in 0..p.coset_size() as usize {
            amps[base + c] = v;
        }
    }
    PureState::new(amps)
}

/// Permutation of `H` induced by the desired permutation: pairs move to
/// `(u(g), c)`, leakage values stay fixed.
fn desired_h_perm(p: &EncodedPermutation) -> Result<Vec<usize>> {
    let dim = check_enumerable(p)?;
    let mut out = vec![0usize; dim];
    for g in 0..p.unencoded_size() {
        let target = p.apply_desired(g)?;
        for c in 0..p.coset_size() {
            out[h_index(p, Decoded::Value { value: g, coset: c })] =
                h_index(p, Decoded::Value { value: target, coset: c });
        }
    }
    let pair_count = (p.unencoded_size() * p.coset_size()) as usize;
    for leak in pair_count..dim {
        out[leak] = leak;
    }
    Ok(out)
}

/// Permutation of `H` induced by encode, then the encoded permutation, then
/// decode.
fn actual_h_perm(p: &EncodedPermutation) -> Result<Vec<usize>> {
    let dim = check_enumerable(p)?;
    let mut out = vec![0usize; dim];
    for g in 0..p.unencoded_size() {
        for c in 0..p.coset_size() {
            let e = p.encode(g, c)?;
            let moved = p.decode(p.apply_encoded(e)?)?;
            out[h_index(p, Decoded::Value { value: g, coset: c })] = h_index(p, moved);
        }
    }
    for leak in 0..p.leak_size() {
        let e = p.leak_encoding(leak)?;
        let moved = p.decode(p.apply_encoded(e)?)?;
        out[h_index(p, Decoded::Leak { index: leak })] = h_index(p, moved);
    }
    Ok(out)
}

fn permute_state(b: &PureState, perm: &[usize]) -> Result<PureState> {
    let mut amps = vec![Complex64::new(0.0, 0.0); b.dim()];
    for (h, &target) in perm.iter().enumerate() {
        amps[target] = b.amps[h];
    }
    PureState::new(amps)
}

/// The ideal output: the lifted state with the desired permutation applied to
/// the unencoded register.
pub fn desired_output_state(p: &EncodedPermutation, a: &InputDistribution) -> Result<PureState> {
    permute_state(&lifted_state(p, a)?, &desired_h_perm(p)?)
}

/// The output actually produced: the lifted state pushed through encode, the
/// encoded permutation, and decode.
pub fn actual_output_state(p: &EncodedPermutation, a: &InputDistribution) -> Result<PureState> {
    permute_state(&lifted_state(p, a)?, &actual_h_perm(p)?)
}

/// For unit pure states: the fidelity `d = |<s1|s2>|` and the trace distance
/// `T = sqrt(1 - d^2)`.
///
/// The inner product is divided by the computed norms. Without this,
/// amplitude vectors that are equal componentwise would still report a trace
/// distance around 1e-8 (the square root amplifies the last-bit rounding of
/// the norm), swamping the 1e-9 inequality tolerance on exact instances.
pub fn fidelity_and_trace_distance(s1: &PureState, s2: &PureState) -> Result<(f64, f64)> {
    let mut norms = [0.0f64; 2];
    for (i, s) in [s1, s2].into_iter().enumerate() {
        let norm2: f64 = s.amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > NORM_TOLERANCE {
            return Err(domain(format!("state norm^2 = {norm2}, expected 1")));
        }
        norms[i] = norm2.sqrt();
    }
    if s1.dim() != s2.dim() {
        return Err(domain(format!("state dimensions differ: {} vs {}", s1.dim(), s2.dim())));
    }
    let d = (s1.inner_product(s2).norm() / (norms[0] * norms[1])).min(1.0);
    let t = (1.0 - d * d).max(0.0).sqrt();
    Ok((d, t))
}

/// Outcome of checking one instance against the trace-distance bound.
#[derive(Clone, Debug)]
pub struct TheoremReport {
    /// Exact deviation of the instance.
    pub deviation: Rational,
    /// Fidelity `|<desired|actual>|`.
    pub fidelity: f64,
    /// Trace distance between desired and actual outputs.
    pub trace_distance: f64,
    /// `2 * sqrt(deviation)`.
    pub bound: f64,
    /// Observed trace distance over the bound; `None` when the bound is zero.
    pub ratio: Option<f64>,
    /// Whether `trace_distance <= bound + 1e-9`.
    pub pass: bool,
    /// Seed of the input distribution, when it was seeded.
    pub seed: Option<u64>,
}

fn rational_to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// Computes exact deviation, builds desired and actual outputs for the given
/// input distribution, and checks `T <= 2 sqrt(Dev) + 1e-9`.
pub fn verify_deviation_theorem(
    p: &EncodedPermutation,
    a: &InputDistribution,
) -> Result<TheoremReport> {
    let deviation = p.deviation()?.deviation;
    let desired = desired_output_state(p, a)?;
    let actual = actual_output_state(p, a)?;
    let (fidelity, trace_distance) = fidelity_and_trace_distance(&desired, &actual)?;
    let bound = 2.0 * rational_to_f64(&deviation).sqrt();
    let pass = trace_distance <= bound + INEQUALITY_TOLERANCE;
    let ratio = if bound > 0.0 { Some(trace_distance / bound) } else { None };
    Ok(TheoremReport {
        deviation,
        fidelity,
        trace_distance,
        bound,
        ratio,
        pass,
        seed: a.seed(),
    })
}

/// Fidelity recomputed directly from the permuted-amplitude identity
/// `|sum_h b*_{p(h)} b_h|` with `p = w^-1 ∘ f^-1 ∘ v ∘ f`. Used as the
/// second route of the dual-computation check.
pub fn fidelity_via_permuted_vector(
    p: &EncodedPermutation,
    a: &InputDistribution,
) -> Result<f64> {
    let b = lifted_state(p, a)?;
    let desired = desired_h_perm(p)?;
    let actual = actual_h_perm(p)?;
    let mut desired_inv = vec![0usize; desired.len()];
    for (h, &t) in desired.iter().enumerate() {
        desired_inv[t] = h;
    }
    // p(h) = w^-1(f^-1(v(f(h))))
    let sum: Complex64 = (0..b.dim())
        .map(|h| {
            let ph = desired_inv[actual[h]];
            b.amps[ph].conj() * b.amps[h]
        })
        .sum();
    let norm2: f64 = b.amps.iter().map(|a| a.norm_sqr()).sum();
    Ok((sum.norm() / norm2).min(1.0))
}

/// Checks the subvector dot-product inequality
/// `|<u|v>| >= 2 |subvec(u, S)|^2 - 1` for unit vectors that agree on the
/// basis subset `S`.
pub fn check_subvector_lemma(
    u: &[Complex64],
    v: &[Complex64],
    basis_subset: &[usize],
) -> Result<bool> {
    if u.len() != v.len() {
        return Err(domain(format!("vector dimensions differ: {} vs {}", u.len(), v.len())));
    }
    for (name, vec) in [("u", u), ("v", v)] {
        let norm2: f64 = vec.iter().map(|a| a.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > NORM_TOLERANCE {
            return Err(domain(format!("{name} has norm^2 = {norm2}, expected 1")));
        }
    }
    let mut shared = 0.0f64;
    for &s in basis_subset {
        if s >= u.len() {
            return Err(domain(format!("basis index {s} out of range [0, {})", u.len())));
        }
        if (u[s] - v[s]).norm() > IDENTITY_TOLERANCE {
            return Err(domain(format!("vectors differ on basis index {s}")));
        }
        shared += u[s].norm_sqr();
    }
    let dot: Complex64 = u.iter().zip(v).map(|(a, b)| a.conj() * b).sum();
    Ok(dot.norm() >= 2.0 * shared - 1.0 - IDENTITY_TOLERANCE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rep::{make_coset_aep, CosetParams};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn lifted_state_spreads_uniformly() {
        // |G|=2, |C|=2, a=(1,0): amplitudes (1/sqrt2, 1/sqrt2, 0, 0).
        let p = make_coset_aep(CosetParams { modulus: 2, padding_bits: 1, offset: 0 }).unwrap();
        let a = InputDistribution::basis(2, 0).unwrap();
        let b = lifted_state(&p, &a).unwrap();
        let s = 1.0 / 2f64.sqrt();
        assert!((b.amplitudes()[0] - c(s, 0.0)).norm() < 1e-15);
        assert!((b.amplitudes()[1] - c(s, 0.0)).norm() < 1e-15);
        assert!(b.amplitudes()[2].norm() < 1e-15);
        assert!(b.amplitudes()[3].norm() < 1e-15);
    }

    #[test]
    fn leak_entries_are_zero() {
        let p = make_coset_aep(CosetParams { modulus: 3, padding_bits: 2, offset: 1 }).unwrap();
        let a = InputDistribution::uniform(3);
        let b = lifted_state(&p, &a).unwrap();
        for leak in 12..16 {
            assert_eq!(b.amplitudes()[leak], c(0.0, 0.0));
        }
        // Uniform a over G=3, C=4: every pair amplitude is 1/sqrt(12).
        let expect = 1.0 / 12f64.sqrt();
        for pair in 0..12 {
            assert!((b.amplitudes()[pair].re - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn identity_permutations_leave_states_alone() {
        let p = make_coset_aep(CosetParams { modulus: 3, padding_bits: 2, offset: 0 }).unwrap();
        let a = InputDistribution::seeded(3, 7);
        let lifted = lifted_state(&p, &a).unwrap();
        let desired = desired_output_state(&p, &a).unwrap();
        let actual = actual_output_state(&p, &a).unwrap();
        for h in 0..lifted.dim() {
            assert!((lifted.amplitudes()[h] - desired.amplitudes()[h]).norm() < 1e-15);
            assert!((lifted.amplitudes()[h] - actual.amplitudes()[h]).norm() < 1e-15);
        }
    }

    #[test]
    fn fidelity_edge_cases() {
        let s1 = PureState::new(vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let s2 = PureState::new(vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(fidelity_and_trace_distance(&s1, &s1).unwrap(), (1.0, 0.0));
        assert_eq!(fidelity_and_trace_distance(&s1, &s2).unwrap(), (0.0, 1.0));
        let bad = PureState { amps: vec![c(2.0, 0.0)] };
        assert!(fidelity_and_trace_distance(&bad, &bad).is_err());
    }

    #[test]
    fn desired_moves_basis_amplitude() {
        // G = Z/3, u = +1, a concentrated on g=0, C of size 4.
        let p = make_coset_aep(CosetParams { modulus: 3, padding_bits: 2, offset: 1 }).unwrap();
        let a = InputDistribution::basis(3, 0).unwrap();
        let desired = desired_output_state(&p, &a).unwrap();
        for cidx in 0..4 {
            assert!((desired.amplitudes()[4 + cidx].re - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn theorem_report_on_small_instance() {
        let p = make_coset_aep(CosetParams { modulus: 3, padding_bits: 2, offset: 1 }).unwrap();
        let a = InputDistribution::uniform(3);
        let report = verify_deviation_theorem(&p, &a).unwrap();
        assert!(report.pass, "T = {} vs bound {}", report.trace_distance, report.bound);
        assert!(report.fidelity >= 1.0 - 2.0 * rational_to_f64(&report.deviation) - 1e-9);
        // Dual route agrees.
        let direct = fidelity_via_permuted_vector(&p, &a).unwrap();
        assert!((direct - report.fidelity).abs() < IDENTITY_TOLERANCE);
    }

    #[test]
    fn subvector_lemma_edges() {
        let u = vec![c(0.6, 0.0), c(0.8, 0.0)];
        // u = v: dot product 1, bound 2|subvec|^2 - 1 <= 1.
        assert!(check_subvector_lemma(&u, &u, &[0]).unwrap());
        // Empty S: bound is -1, vacuous even for orthogonal vectors.
        let v = vec![c(0.8, 0.0), c(-0.6, 0.0)];
        assert!(check_subvector_lemma(&u, &v, &[]).unwrap());
        // Vectors differing on S violate the precondition.
        assert!(check_subvector_lemma(&u, &v, &[0]).is_err());
    }
}
