//! State constructors: targets, the shared maximally entangled pair, phase
//! engineering and its perturbed variant, noisy singlets, and random
//! ensembles.
//!
//! Random draws are reproducible: each sampler consumes standard normals in a
//! fixed order (row-major, real part then imaginary part), and parallel
//! callers obtain independent streams from [`child_rng`].

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{check_density, phase, ComplexMatrix, DensityMatrix, C64, ZERO};

/// Child RNG stream for `(seed, stream)`. Streams never overlap, so a
/// parallel run that assigns work to fixed stream indices is deterministic
/// regardless of thread count.
pub fn child_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One draw from the standard complex normal `CN(0, 1)`: real part first.
pub fn complex_gaussian(rng: &mut impl Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * FRAC_1_SQRT_2
}

pub(crate) fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    Ok(())
}

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::ParameterOutOfRange { name, value });
    }
    Ok(())
}

pub(crate) fn check_index(name: &'static str, value: usize, d: usize) -> Result<()> {
    if value >= d {
        return Err(Error::IndexOutOfRange { name, value, d });
    }
    Ok(())
}

/// Element moduli `|ρ_jk|` of a state: the reference state before phases are
/// engineered.
#[derive(Debug, Clone, PartialEq)]
pub struct Magnitudes {
    d: usize,
    data: Vec<f64>,
}

impl Magnitudes {
    /// Row-major `d`×`d` table. Entries must be finite, nonnegative and symmetric.
    pub fn new(d: usize, data: Vec<f64>) -> Result<Self> {
        check_dim(d)?;
        if data.len() != d * d {
            return Err(Error::InvalidShape {
                rows: d,
                cols: d,
                len: data.len(),
            });
        }
        for j in 0..d {
            for k in 0..d {
                let v = data[j * d + k];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidState(format!(
                        "magnitude ({j}, {k}) = {v} is not a finite nonnegative number"
                    )));
                }
                if (v - data[k * d + j]).abs() > 1e-12 {
                    return Err(Error::InvalidState(format!(
                        "magnitudes not symmetric at ({j}, {k})"
                    )));
                }
            }
        }
        Ok(Self { d, data })
    }

    /// Entrywise modulus of any square matrix.
    pub fn of(m: &ComplexMatrix) -> Self {
        assert!(m.is_square());
        let d = m.rows();
        let data = (0..d * d).map(|i| m[(i / d, i % d)].norm()).collect();
        Self { d, data }
    }

    /// All entries `1/d`: the maximally coherent magnitudes.
    pub fn uniform(d: usize) -> Result<Self> {
        check_dim(d)?;
        Ok(Self {
            d,
            data: vec![1.0 / d as f64; d * d],
        })
    }

    /// Diagonal magnitudes only.
    pub fn diagonal(populations: &[f64]) -> Result<Self> {
        let d = populations.len();
        let mut data = vec![0.0; d * d];
        for (j, &p) in populations.iter().enumerate() {
            data[j * d + j] = p;
        }
        Self::new(d, data)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.data[j * self.d + k]
    }

    /// `ρ_R`, the phase-free real matrix.
    pub fn to_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.d, self.d, |j, k| C64::new(self.get(j, k), 0.0))
    }

    /// `Σ_{j≠k} |ρ_jk|`.
    pub fn off_diagonal_sum(&self) -> f64 {
        let d = self.d;
        (0..d * d).filter(|i| i / d != i % d).map(|i| self.data[i]).sum()
    }
}

/// A target qudit, optionally carrying the phase profile it was engineered with.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetState {
    pub rho: DensityMatrix,
    /// `(x, φ)`: basis index and per-level phases in radians (unreduced).
    pub phase_profile: Option<(usize, Vec<f64>)>,
}

impl TargetState {
    pub fn unphased(rho: DensityMatrix) -> Self {
        Self {
            rho,
            phase_profile: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.rho.matrix()
    }

    /// Largest deviation (radians, wrapped to `[-π, π]`) between
    /// `arg ρ_jk` and `φ_j - φ_k` over entries with `|ρ_jk| > 1e-12`.
    /// Zero when no profile is attached.
    pub fn phase_profile_defect(&self) -> f64 {
        let Some((_, phi)) = &self.phase_profile else {
            return 0.0;
        };
        let m = self.rho.matrix();
        let d = m.rows();
        let mut worst = 0.0f64;
        for j in 0..d {
            for k in 0..d {
                let z = m[(j, k)];
                if j == k || z.norm() <= 1e-12 {
                    continue;
                }
                let expected = phase(phi[j] - phi[k]);
                worst = worst.max((z / z.norm() / expected).arg().abs());
            }
        }
        worst
    }
}

/// The ideal shared pair `|Φ⟩ = Σ_k |kk⟩/√d`.
#[derive(Debug, Clone, PartialEq)]
pub struct EntangledPair {
    pub d: usize,
    pub rho_ab: DensityMatrix,
}

pub fn max_entangled_vector(d: usize) -> Vec<C64> {
    let amp = C64::new(1.0 / (d as f64).sqrt(), 0.0);
    let mut v = vec![ZERO; d * d];
    for k in 0..d {
        v[k * d + k] = amp;
    }
    v
}

pub fn max_entangled(d: usize) -> Result<EntangledPair> {
    check_dim(d)?;
    Ok(EntangledPair {
        d,
        rho_ab: DensityMatrix::from_pure_unchecked(&max_entangled_vector(d)),
    })
}

/// Noisy singlet `r|Φ⟩⟨Φ| + (1-r) I/d²`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisySinglet {
    pub d: usize,
    pub r: f64,
    pub rho_r: DensityMatrix,
    /// `true` iff `r ≤ 1/(d+1)`.
    pub separable: bool,
}

pub fn noisy_singlet(d: usize, r: f64) -> Result<NoisySinglet> {
    check_dim(d)?;
    check_probability("r", r)?;
    let phi = max_entangled_vector(d);
    let dd = d * d;
    let mut m = ComplexMatrix::outer(&phi, &phi).scale(r);
    m.add_scaled(&ComplexMatrix::identity(dd), C64::new((1.0 - r) / dd as f64, 0.0));
    Ok(NoisySinglet {
        d,
        r,
        rho_r: DensityMatrix::new(m)?,
        separable: r <= 1.0 / (d as f64 + 1.0),
    })
}

/// Phase-gate angles `φ_j = π x j (d - j) / d` that align a target with
/// POVM family `x`.
pub fn phase_profile(d: usize, x: usize) -> Vec<f64> {
    (0..d)
        .map(|j| PI * (x * j * (d - j)) as f64 / d as f64)
        .collect()
}

/// Single-level phase gate `I + (e^{iφ_j} - 1)|j⟩⟨j|`.
pub fn phase_gate(d: usize, j: usize, phi: f64) -> ComplexMatrix {
    let mut u = ComplexMatrix::identity(d);
    u[(j, j)] = phase(phi);
    u
}

/// `ρ_jk → |ρ_jk| e^{i(φ_j - φ_k)}` without validating the result.
pub fn engineered_matrix(mags: &Magnitudes, x: usize) -> ComplexMatrix {
    let phi = phase_profile(mags.dim(), x);
    ComplexMatrix::from_fn(mags.dim(), mags.dim(), |j, k| {
        phase(phi[j] - phi[k]) * mags.get(j, k)
    })
}

/// Applies the `d` phase gates for family `x` to the reference state built
/// from `mags`. The reference must itself be a valid density matrix.
pub fn engineer_phases(mags: &Magnitudes, x: usize) -> Result<TargetState> {
    let d = mags.dim();
    check_index("x", x, d)?;
    let reference = check_density(mags.to_matrix(), crate::linalg::DENSITY_TOL)
        .map_err(|v| Error::InvalidState(format!("reference magnitudes: {v}")))?;
    let phi = phase_profile(d, x);
    let gates = phi
        .iter()
        .enumerate()
        .fold(ComplexMatrix::identity(d), |acc, (j, &p)| {
            acc.matmul(&phase_gate(d, j, p))
        });
    let rho = gates.sandwich(reference.matrix());
    Ok(TargetState {
        rho: DensityMatrix::new(rho)?,
        phase_profile: Some((x, phi)),
    })
}

/// Deviation applied on top of ideal phase engineering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationConfig {
    pub delta_phi: f64,
    pub basis_x: usize,
}

impl DeviationConfig {
    pub fn validate(&self, d: usize) -> Result<()> {
        if !self.delta_phi.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "delta_phi = {} is not finite",
                self.delta_phi
            )));
        }
        check_index("x", self.basis_x, d)
    }
}

/// Engineered matrix with every upper-triangle phase shifted by `δ` (lower
/// triangle conjugated). Hermitian with unit trace whenever `mags` has unit
/// trace, but generally not positive semidefinite.
pub fn perturbed_matrix(mags: &Magnitudes, x: usize, delta_phi: f64) -> ComplexMatrix {
    let phi = phase_profile(mags.dim(), x);
    ComplexMatrix::from_fn(mags.dim(), mags.dim(), |j, k| {
        let shift = match j.cmp(&k) {
            std::cmp::Ordering::Less => delta_phi,
            std::cmp::Ordering::Equal => 0.0,
            std::cmp::Ordering::Greater => -delta_phi,
        };
        phase(phi[j] - phi[k] + shift) * mags.get(j, k)
    })
}

/// Validated perturbed state; fails with [`Error::RejectedSample`] when the
/// uniform phase shift breaks positivity.
pub fn perturbed_state(mags: &Magnitudes, dev: &DeviationConfig) -> Result<TargetState> {
    let d = mags.dim();
    dev.validate(d)?;
    let m = perturbed_matrix(mags, dev.basis_x, dev.delta_phi);
    let rho = check_density(m, crate::linalg::DENSITY_TOL).map_err(Error::RejectedSample)?;
    Ok(TargetState::unphased(rho))
}

/// Haar-random pure state `z/‖z‖` with `z_i ~ CN(0, 1)`.
pub fn sample_haar_pure(d: usize, rng: &mut impl Rng) -> Result<TargetState> {
    Ok(TargetState::unphased(DensityMatrix::from_pure_unchecked(
        &haar_vector(d, rng)?,
    )))
}

pub fn haar_vector(d: usize, rng: &mut impl Rng) -> Result<Vec<C64>> {
    check_dim(d)?;
    let z: Vec<C64> = (0..d).map(|_| complex_gaussian(rng)).collect();
    let n = crate::linalg::norm(&z);
    Ok(z.into_iter().map(|c| c / n).collect())
}

/// Hilbert–Schmidt random mixed state `G G† / Tr(G G†)` from a complex
/// Ginibre matrix drawn row-major.
pub fn sample_hs_mixed(d: usize, rng: &mut impl Rng) -> Result<TargetState> {
    Ok(TargetState::unphased(DensityMatrix::from_matrix_unchecked(
        ginibre_state(d, rng)?,
    )))
}

pub(crate) fn ginibre_state(d: usize, rng: &mut impl Rng) -> Result<ComplexMatrix> {
    check_dim(d)?;
    let g = ComplexMatrix::from_fn(d, d, |_, _| complex_gaussian(rng));
    let mut w = g.matmul(&g.adjoint());
    // Exact hermiticity: copy the upper triangle onto the lower one.
    for i in 0..d {
        w[(i, i)] = C64::new(w[(i, i)].re, 0.0);
        for j in 0..i {
            w[(i, j)] = w[(j, i)].conj();
        }
    }
    let tr = w.trace().re;
    Ok(w.scale(1.0 / tr))
}

/// Real nonnegative mixed reference `A Aᵀ / Tr(A Aᵀ)` with `A_jk = |G_jk|`
/// for a complex Ginibre `G`. Always a valid density matrix, unlike the
/// elementwise moduli of a generic mixed state.
pub fn sample_nonnegative_reference(d: usize, rng: &mut impl Rng) -> Result<Magnitudes> {
    check_dim(d)?;
    let a: Vec<f64> = (0..d * d).map(|_| complex_gaussian(rng).norm()).collect();
    let mut data = vec![0.0; d * d];
    for j in 0..d {
        for k in 0..=j {
            let v: f64 = (0..d).map(|i| a[j * d + i] * a[k * d + i]).sum();
            data[j * d + k] = v;
            data[k * d + j] = v;
        }
    }
    let tr: f64 = (0..d).map(|j| data[j * d + j]).sum();
    data.iter_mut().for_each(|v| *v /= tr);
    Magnitudes::new(d, data)
}

/// `|j⟩⟨j|` as a target (zero coherence).
pub fn basis_state(d: usize, j: usize) -> Result<TargetState> {
    check_dim(d)?;
    check_index("j", j, d)?;
    Ok(TargetState::unphased(DensityMatrix::from_matrix_unchecked(
        ComplexMatrix::unit(d, j, j),
    )))
}

#[cfg(test)]
pub(crate) fn unit_trace_identity(d: usize) -> ComplexMatrix {
    ComplexMatrix::identity(d).scale(1.0 / d as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::partial_trace;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn random_magnitudes(d: usize, seed: u64) -> Magnitudes {
        let psi = haar_vector(d, &mut child_rng(seed, 0)).unwrap();
        let m = ComplexMatrix::outer(&psi, &psi);
        Magnitudes::of(&m)
    }


    #[test]
    fn nonnegative_reference_is_valid() {
        let mut rng = child_rng(8, 0);
        for d in 2..=8 {
            let mags = sample_nonnegative_reference(d, &mut rng).unwrap();
            assert!(check_density(mags.to_matrix(), 1e-12).is_ok());
            assert!(engineer_phases(&mags, d - 1).is_ok());
        }
    }

    #[test]
    fn mixed_state_moduli_can_be_invalid() {
        // |ρ_jk| of a mixed state need not be positive semidefinite.
        let mut rng = child_rng(0, 0);
        let invalid = (0..200)
            .filter(|_| {
                let rho = sample_hs_mixed(4, &mut rng).unwrap();
                check_density(Magnitudes::of(rho.matrix()).to_matrix(), DENSITY_TOL_TEST).is_err()
            })
            .count();
        assert!(invalid > 0);
    }

    const DENSITY_TOL_TEST: f64 = 1e-10;
    #[test]
    fn bell_pair_d2() {
        let pair = max_entangled(2).unwrap();
        let s = FRAC_1_SQRT_2 * FRAC_1_SQRT_2;
        let m = pair.rho_ab.matrix();
        for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            assert_abs_diff_eq!(m[(i, j)].re, s, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(m[(1, 1)].norm(), 0.0);
    }

    #[test]
    fn max_entangled_marginals_and_purity() {
        let pair = max_entangled(3).unwrap();
        for keep in [0, 1] {
            let marginal = partial_trace(pair.rho_ab.matrix(), &[3, 3], &[keep]).unwrap();
            assert!(marginal.max_abs_diff(&unit_trace_identity(3)) < 1e-15);
        }
        assert_abs_diff_eq!(max_entangled(5).unwrap().rho_ab.purity(), 1.0, epsilon = 1e-10);
        assert!(matches!(max_entangled(1), Err(Error::InvalidDimension(1))));
    }

    #[test]
    fn phase_profile_d3_x1() {
        let phi = phase_profile(3, 1);
        assert_eq!(phi[0], 0.0);
        assert_abs_diff_eq!(phi[1], 2.0 * PI / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(phi[2], 2.0 * PI / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn engineering_with_x0_is_identity() {
        let mags = random_magnitudes(4, 1);
        let target = engineer_phases(&mags, 0).unwrap();
        assert!(target.matrix().max_abs_diff(&mags.to_matrix()) < 1e-15);
    }

    #[test]
    fn engineering_keeps_moduli_and_spectrum() {
        let mags = random_magnitudes(4, 2);
        let target = engineer_phases(&mags, 2).unwrap();
        assert_eq!(target.dim(), 4);
        for j in 0..4 {
            for k in 0..4 {
                assert_abs_diff_eq!(target.matrix()[(j, k)].norm(), mags.get(j, k), epsilon = 1e-15);
            }
        }
        let before = mags.to_matrix().hermitian_eigenvalues();
        let after = target.matrix().hermitian_eigenvalues();
        for (a, b) in before.iter().zip(&after) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        assert!(target.phase_profile_defect() < 1e-9);
        assert!(target.matrix().max_abs_diff(&engineered_matrix(&mags, 2)) < 1e-15);
    }

    #[test]
    fn engineering_rejects_invalid_reference() {
        let mags = Magnitudes::new(2, vec![0.5, 0.9, 0.9, 0.5]).unwrap();
        assert!(matches!(engineer_phases(&mags, 1), Err(Error::InvalidState(_))));
        assert!(matches!(
            engineer_phases(&Magnitudes::uniform(3).unwrap(), 3),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn zero_deviation_matches_engineering() {
        let mags = random_magnitudes(3, 4);
        let dev = DeviationConfig {
            delta_phi: 0.0,
            basis_x: 1,
        };
        let p = perturbed_state(&mags, &dev).unwrap();
        let e = engineer_phases(&mags, 1).unwrap();
        assert!(p.matrix().max_abs_diff(e.matrix()) < 1e-15);
    }

    #[test]
    fn pi_deviation_flips_qubit_coherence() {
        let mags = Magnitudes::uniform(2).unwrap();
        let dev = DeviationConfig {
            delta_phi: PI,
            basis_x: 0,
        };
        let p = perturbed_state(&mags, &dev).unwrap();
        assert_abs_diff_eq!(p.matrix()[(0, 1)].re, -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p.matrix()[(1, 0)].re, -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p.matrix()[(0, 0)].re, 0.5);
    }

    #[test]
    fn perturbed_pure_qutrit_loses_positivity() {
        let mags = Magnitudes::uniform(3).unwrap();
        let dev = DeviationConfig {
            delta_phi: 0.05,
            basis_x: 0,
        };
        assert!(matches!(perturbed_state(&mags, &dev), Err(Error::RejectedSample(_))));
        let raw = perturbed_matrix(&mags, 0, 0.05);
        assert!(raw.hermiticity_defect() < 1e-16);
        assert_abs_diff_eq!(raw.trace().re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn noisy_singlet_limits_and_flag() {
        let ideal = max_entangled(3).unwrap();
        assert!(noisy_singlet(3, 1.0).unwrap().rho_r.matrix().max_abs_diff(ideal.rho_ab.matrix()) < 1e-15);
        let mixed = noisy_singlet(3, 0.0).unwrap();
        assert!(mixed.rho_r.matrix().max_abs_diff(&unit_trace_identity(9)) < 1e-15);
        assert!(noisy_singlet(3, 0.25).unwrap().separable);
        assert!(!noisy_singlet(3, 0.2501).unwrap().separable);
        assert!(noisy_singlet(3, 1.5).is_err());
        assert!(noisy_singlet(3, -0.1).is_err());
    }

    #[test]
    fn haar_sample_is_normalized_and_pure() {
        let mut rng = child_rng(9, 0);
        for _ in 0..20 {
            let psi = haar_vector(5, &mut rng).unwrap();
            assert_abs_diff_eq!(crate::linalg::norm(&psi), 1.0, epsilon = 1e-12);
            let t = sample_haar_pure(5, &mut rng).unwrap();
            assert_abs_diff_eq!(t.rho.purity(), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn haar_first_population_mean_is_one_over_d() {
        // |⟨0|ψ⟩|² ~ Beta(1, d-1): mean 1/d, variance (d-1)/(d²(d+1)).
        let d = 4;
        let n = 100_000;
        let mut rng = child_rng(2024, 0);
        let mean = (0..n)
            .map(|_| haar_vector(d, &mut rng).unwrap()[0].norm_sqr())
            .sum::<f64>()
            / n as f64;
        let var = (d - 1) as f64 / ((d * d) as f64 * (d + 1) as f64);
        let sigma = (var / n as f64).sqrt();
        assert!((mean - 0.25).abs() < 3.0 * sigma, "mean {mean}, 3σ = {}", 3.0 * sigma);
    }

    #[test]
    fn hs_sample_is_valid() {
        let mut rng = child_rng(10, 0);
        for d in [2, 3, 6] {
            let t = sample_hs_mixed(d, &mut rng).unwrap();
            assert_abs_diff_eq!(t.matrix().trace().re, 1.0, epsilon = 1e-12);
            assert!(t.matrix().hermitian_eigenvalues()[0] >= -1e-12);
            assert_eq!(t.matrix().hermiticity_defect(), 0.0);
        }
    }

    /// Mean purity of a Hilbert–Schmidt qubit from the eigenvalue density
    /// `∝ (λ₁ - λ₂)²` on the simplex, by composite Simpson quadrature.
    fn hs_qubit_mean_purity_quadrature() -> f64 {
        let n = 2000;
        let h = 1.0 / n as f64;
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..=n {
            let lam = i as f64 * h;
            let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            let density = (2.0 * lam - 1.0).powi(2);
            num += w * density * (lam * lam + (1.0 - lam).powi(2));
            den += w * density;
        }
        num / den
    }

    #[test]
    fn hs_qubit_mean_purity() {
        let expected = hs_qubit_mean_purity_quadrature();
        assert_abs_diff_eq!(expected, 0.8, epsilon = 1e-10);

        let n = 100_000;
        let mut rng = child_rng(77, 0);
        let samples: Vec<f64> = (0..n)
            .map(|_| sample_hs_mixed(2, &mut rng).unwrap().rho.purity())
            .collect();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let sigma = (var / n as f64).sqrt();
        assert!((mean - expected).abs() < 3.0 * sigma, "mean {mean} vs {expected} ± {}", 3.0 * sigma);
    }

    #[test]
    fn samplers_are_reproducible() {
        let a = sample_hs_mixed(4, &mut child_rng(5, 3)).unwrap();
        let b = sample_hs_mixed(4, &mut child_rng(5, 3)).unwrap();
        assert_eq!(a, b);
        let c = sample_hs_mixed(4, &mut child_rng(5, 4)).unwrap();
        assert_ne!(a, c);
    }

    proptest! {
        #[test]
        fn singlet_marginals_are_maximally_mixed(r in 0.0f64..=1.0, d in 2usize..5) {
            let s = noisy_singlet(d, r).unwrap();
            for keep in [0, 1] {
                let m = partial_trace(s.rho_r.matrix(), &[d, d], &[keep]).unwrap();
                prop_assert!(m.max_abs_diff(&unit_trace_identity(d)) < 1e-14);
            }
        }

        #[test]
        fn engineered_state_satisfies_phase_profile(seed in any::<u64>(), d in 2usize..7, xr in 0usize..7) {
            let x = xr % d;
            let t = engineer_phases(&random_magnitudes(d, seed), x).unwrap();
            prop_assert!(t.phase_profile_defect() < 1e-9);
        }
    }
}
