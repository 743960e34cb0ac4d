//! Kraus models for amplitude damping (AD), phase flip (PF), depolarizing (DP)
//! and dit flip (DF) noise, the composed operators `F_ab = E_a E_bᵀ`, and the
//! noise map `G(ρ) = (1/d) Σ F_ab ρ F_ab†` acting on Bob's qudit.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{omega_pow, tensor, ComplexMatrix, C64, ONE};
use crate::states::{check_dim, check_probability, max_entangled_vector};

/// Completeness tolerance for the built-in channels.
pub const COMPLETENESS_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChannelKind {
    #[serde(rename = "AD")]
    AmplitudeDamping,
    #[serde(rename = "PF")]
    PhaseFlip,
    #[serde(rename = "DP")]
    Depolarizing,
    #[serde(rename = "DF")]
    DitFlip,
    #[serde(rename = "custom")]
    Custom,
}

impl ChannelKind {
    pub const BUILTIN: [ChannelKind; 4] = [
        ChannelKind::AmplitudeDamping,
        ChannelKind::PhaseFlip,
        ChannelKind::Depolarizing,
        ChannelKind::DitFlip,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ChannelKind::AmplitudeDamping => "AD",
            ChannelKind::PhaseFlip => "PF",
            ChannelKind::Depolarizing => "DP",
            ChannelKind::DitFlip => "DF",
            ChannelKind::Custom => "custom",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s.to_ascii_uppercase().as_str() {
            "AD" => Some(ChannelKind::AmplitudeDamping),
            "PF" => Some(ChannelKind::PhaseFlip),
            "DP" => Some(ChannelKind::Depolarizing),
            "DF" => Some(ChannelKind::DitFlip),
            "CUSTOM" => Some(ChannelKind::Custom),
            _ => None,
        }
    }

    /// Builds the built-in channel of this kind.
    pub fn build(self, d: usize, p: f64) -> Result<KrausChannel> {
        match self {
            ChannelKind::AmplitudeDamping => kraus_ad(d, p),
            ChannelKind::PhaseFlip => kraus_pf(d, p),
            ChannelKind::Depolarizing => kraus_dp(d, p),
            ChannelKind::DitFlip => kraus_df(d, p),
            ChannelKind::Custom => Err(Error::InvalidConfig(
                "custom channels are loaded from a file".into(),
            )),
        }
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A CPTP map on one qudit given by its Kraus operators.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    d: usize,
    kind: ChannelKind,
    p: f64,
    operators: Vec<ComplexMatrix>,
}

impl KrausChannel {
    /// The identity channel `{I}`.
    pub fn identity(d: usize) -> Result<Self> {
        check_dim(d)?;
        Ok(Self {
            d,
            kind: ChannelKind::Custom,
            p: 0.0,
            operators: vec![ComplexMatrix::identity(d)],
        })
    }

    /// User-supplied Kraus set; completeness is checked at `tol`.
    pub fn custom(d: usize, operators: Vec<ComplexMatrix>, tol: f64) -> Result<Self> {
        check_dim(d)?;
        if operators.is_empty() {
            return Err(Error::InvalidConfig("empty Kraus set".into()));
        }
        for op in &operators {
            if op.rows() != d || op.cols() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: if op.rows() != d { op.rows() } else { op.cols() },
                });
            }
        }
        let chan = Self {
            d,
            kind: ChannelKind::Custom,
            p: f64::NAN,
            operators,
        };
        let deviation = chan.completeness_deviation();
        if deviation > tol {
            return Err(Error::IncompleteChannel {
                deviation,
                tolerance: tol,
            });
        }
        Ok(chan)
    }

    fn builtin(d: usize, kind: ChannelKind, p: f64, operators: Vec<ComplexMatrix>) -> Self {
        let chan = Self {
            d,
            kind,
            p,
            operators,
        };
        debug_assert!(chan.completeness_deviation() <= COMPLETENESS_TOL);
        chan
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    /// Noise strength; NaN for custom channels.
    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    /// `max |Σ E†E - I|`.
    pub fn completeness_deviation(&self) -> f64 {
        let mut sum = ComplexMatrix::zeros(self.d, self.d);
        for e in &self.operators {
            sum.add_scaled(&e.adjoint().matmul(e), ONE);
        }
        sum.max_abs_diff(&ComplexMatrix::identity(self.d))
    }

    /// `ε(ρ) = Σ E ρ E†`.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        check_square(rho, self.d)?;
        Ok(kraus_sum(&self.operators, rho))
    }

    /// Channel with every operator transposed in the computational basis.
    pub fn transposed(&self) -> Self {
        Self {
            d: self.d,
            kind: self.kind,
            p: self.p,
            operators: self.operators.iter().map(ComplexMatrix::transpose).collect(),
        }
    }
}

fn check_square(rho: &ComplexMatrix, d: usize) -> Result<()> {
    if rho.rows() != d || rho.cols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: if rho.rows() != d { rho.rows() } else { rho.cols() },
        });
    }
    Ok(())
}

fn kraus_sum(ops: &[ComplexMatrix], rho: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(rho.rows(), rho.cols());
    for e in ops {
        out.add_scaled(&e.sandwich(rho), ONE);
    }
    out
}

fn real(v: f64) -> C64 {
    C64::new(v, 0.0)
}

/// Amplitude damping: `E_0 = |0⟩⟨0| + √(1-p) Σ_{j≥1} |j⟩⟨j|`, `E_j = √p |0⟩⟨j|`.
pub fn kraus_ad(d: usize, p: f64) -> Result<KrausChannel> {
    check_dim(d)?;
    check_probability("p", p)?;
    let mut ops = Vec::with_capacity(d);
    let mut e0 = ComplexMatrix::identity(d).scale((1.0 - p).sqrt());
    e0[(0, 0)] = ONE;
    ops.push(e0);
    for j in 1..d {
        let mut e = ComplexMatrix::zeros(d, d);
        e[(0, j)] = real(p.sqrt());
        ops.push(e);
    }
    Ok(KrausChannel::builtin(d, ChannelKind::AmplitudeDamping, p, ops))
}

/// Clock operator power `Z^m = Σ_j ω^{jm} |j⟩⟨j|`.
pub fn clock_power(d: usize, m: usize) -> ComplexMatrix {
    let diag: Vec<C64> = (0..d).map(|j| omega_pow(d, (j * m) as i64)).collect();
    ComplexMatrix::from_diag(&diag)
}

/// Shift operator power `Σ_j |j⟩⟨j ⊕ m|`.
pub fn shift_power(d: usize, m: usize) -> ComplexMatrix {
    let mut x = ComplexMatrix::zeros(d, d);
    for j in 0..d {
        x[(j, (j + m) % d)] = ONE;
    }
    x
}

/// Phase flip: `√(1-p) I` and `√(p/(d-1)) Z^m` for `m = 1..d`.
pub fn kraus_pf(d: usize, p: f64) -> Result<KrausChannel> {
    check_dim(d)?;
    check_probability("p", p)?;
    let w = (p / (d - 1) as f64).sqrt();
    let mut ops = vec![ComplexMatrix::identity(d).scale((1.0 - p).sqrt())];
    ops.extend((1..d).map(|m| clock_power(d, m).scale(w)));
    Ok(KrausChannel::builtin(d, ChannelKind::PhaseFlip, p, ops))
}

/// Depolarizing: `√(1 - (d²-1)p/d²) I` and `(√p/d) Z^m X^n` over `(m, n) ≠ (0, 0)`,
/// ordered `(m, n)` row-major with the identity term first.
pub fn kraus_dp(d: usize, p: f64) -> Result<KrausChannel> {
    check_dim(d)?;
    check_probability("p", p)?;
    let dd = (d * d) as f64;
    let a00 = (1.0 - (dd - 1.0) * p / dd).sqrt();
    let amn = p.sqrt() / d as f64;
    let mut ops = Vec::with_capacity(d * d);
    ops.push(ComplexMatrix::identity(d).scale(a00));
    for m in 0..d {
        for n in 0..d {
            if m == 0 && n == 0 {
                continue;
            }
            let mut e = ComplexMatrix::zeros(d, d);
            for j in 0..d {
                e[(j, (j + n) % d)] = omega_pow(d, (j * m) as i64) * amn;
            }
            ops.push(e);
        }
    }
    Ok(KrausChannel::builtin(d, ChannelKind::Depolarizing, p, ops))
}

/// Dit flip: `√(1-p) I` and `√(p/(d-1)) Σ_j |j⟩⟨j ⊕ m|` for `m = 1..d`.
pub fn kraus_df(d: usize, p: f64) -> Result<KrausChannel> {
    check_dim(d)?;
    check_probability("p", p)?;
    let w = (p / (d - 1) as f64).sqrt();
    let mut ops = vec![ComplexMatrix::identity(d).scale((1.0 - p).sqrt())];
    ops.extend((1..d).map(|m| shift_power(d, m).scale(w)));
    Ok(KrausChannel::builtin(d, ChannelKind::DitFlip, p, ops))
}

/// The composed operators `F_ab = E_a E_bᵀ` with `a` indexing the channel on
/// Bob's qudit and `b` the channel on Alice's. Ordered `a`-major; zero
/// products are kept.
#[derive(Debug, Clone, PartialEq)]
pub struct ComposedNoise {
    d: usize,
    operators: Vec<ComplexMatrix>,
    kinds: (ChannelKind, ChannelKind),
}

impl ComposedNoise {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    /// `(kind on B, kind on A)`.
    pub fn kinds(&self) -> (ChannelKind, ChannelKind) {
        self.kinds
    }

    /// `max |Σ F†F - I|`. Zero when the channels are unital; AD gives a
    /// nonzero value because `Σ F†F = conj(Σ E E†)` for the B-side set.
    pub fn completeness_deviation(&self) -> f64 {
        let mut sum = ComplexMatrix::zeros(self.d, self.d);
        for f in &self.operators {
            sum.add_scaled(&f.adjoint().matmul(f), ONE);
        }
        sum.max_abs_diff(&ComplexMatrix::identity(self.d))
    }

    /// Identical local noise on both halves of the pair.
    pub fn symmetric(chan: &KrausChannel) -> Self {
        compose_f(chan, chan).expect("same channel has matching dimension")
    }
}

pub fn compose_f(chan_b: &KrausChannel, chan_a: &KrausChannel) -> Result<ComposedNoise> {
    if chan_b.dim() != chan_a.dim() {
        return Err(Error::DimensionMismatch {
            expected: chan_b.dim(),
            found: chan_a.dim(),
        });
    }
    let transposed: Vec<ComplexMatrix> = chan_a.operators().iter().map(ComplexMatrix::transpose).collect();
    let mut operators = Vec::with_capacity(chan_b.operators().len() * transposed.len());
    for ea in chan_b.operators() {
        for ebt in &transposed {
            operators.push(ea.matmul(ebt));
        }
    }
    Ok(ComposedNoise {
        d: chan_b.dim(),
        operators,
        kinds: (chan_b.kind(), chan_a.kind()),
    })
}

/// `G(ρ) = (1/d) Σ F ρ F†`; with no noise, `ρ/d`. The trace of the output
/// is `Tr(ρ)/d` for unital noise and for any `ρ` with a uniform diagonal,
/// which includes every output of the measurement map.
pub fn cjks_g(noise: Option<&ComposedNoise>, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    let d = rho.rows();
    if let Some(n) = noise {
        check_square(rho, n.dim())?;
    } else if !rho.is_square() {
        return Err(Error::DimensionMismatch {
            expected: rho.rows(),
            found: rho.cols(),
        });
    }
    let inv_d = 1.0 / d as f64;
    Ok(match noise {
        None => rho.scale(inv_d),
        Some(n) => kraus_sum(n.operators(), rho).scale(inv_d),
    })
}

/// `max |(ε⊗I)(Φ) - (I⊗εᵀ)(Φ)|` over the `d²`×`d²` entries, with `Φ` the
/// maximally entangled projector.
pub fn verify_transpose_identity(chan: &KrausChannel) -> f64 {
    let d = chan.dim();
    let phi_vec = max_entangled_vector(d);
    let phi = ComplexMatrix::outer(&phi_vec, &phi_vec);
    let id = ComplexMatrix::identity(d);
    let mut lhs = ComplexMatrix::zeros(d * d, d * d);
    let mut rhs = ComplexMatrix::zeros(d * d, d * d);
    for e in chan.operators() {
        lhs.add_scaled(&tensor(e, &id).sandwich(&phi), ONE);
        rhs.add_scaled(&tensor(&id, &e.transpose()).sandwich(&phi), ONE);
    }
    lhs.max_abs_diff(&rhs)
}

/// Applies `ε_A ⊗ ε_B` to a two-qudit state, one side at a time.
pub fn apply_local_pair(
    rho_ab: &ComplexMatrix,
    chan_a: Option<&KrausChannel>,
    chan_b: Option<&KrausChannel>,
) -> Result<ComplexMatrix> {
    let dd = rho_ab.rows();
    let d = (dd as f64).sqrt().round() as usize;
    if d * d != dd || !rho_ab.is_square() {
        return Err(Error::InvalidDims(format!(
            "pair state is {}x{}, not d²×d²",
            rho_ab.rows(),
            rho_ab.cols()
        )));
    }
    let id = ComplexMatrix::identity(d);
    let mut out = rho_ab.clone();
    if let Some(a) = chan_a {
        check_square(&id, a.dim())?;
        let ops: Vec<ComplexMatrix> = a.operators().iter().map(|e| tensor(e, &id)).collect();
        out = kraus_sum(&ops, &out);
    }
    if let Some(b) = chan_b {
        check_square(&id, b.dim())?;
        let ops: Vec<ComplexMatrix> = b.operators().iter().map(|e| tensor(&id, e)).collect();
        out = kraus_sum(&ops, &out);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DensityMatrix;
    use crate::states::{child_rng, ginibre_state, unit_trace_identity};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn all_channels(d: usize, p: f64) -> Vec<KrausChannel> {
        ChannelKind::BUILTIN.iter().map(|k| k.build(d, p).unwrap()).collect()
    }

    #[test]
    fn operator_counts() {
        for d in 2..=5 {
            assert_eq!(kraus_ad(d, 0.3).unwrap().operators().len(), d);
            assert_eq!(kraus_pf(d, 0.3).unwrap().operators().len(), d);
            assert_eq!(kraus_df(d, 0.3).unwrap().operators().len(), d);
            assert_eq!(kraus_dp(d, 0.3).unwrap().operators().len(), d * d);
        }
    }

    #[test]
    fn completeness_examples() {
        assert!(kraus_ad(3, 0.5).unwrap().completeness_deviation() < 1e-12);
        assert!(kraus_pf(4, 0.3).unwrap().completeness_deviation() < 1e-12);
        assert!(kraus_df(5, 0.7).unwrap().completeness_deviation() < 1e-12);
        for d in 2..=7 {
            for p in [0.0, 0.25, 1.0] {
                for c in all_channels(d, p) {
                    assert!(c.completeness_deviation() < 1e-12, "{} d={d} p={p}", c.kind());
                }
            }
        }
    }

    #[test]
    fn out_of_range_strength() {
        assert!(matches!(kraus_ad(3, 1.5), Err(Error::ParameterOutOfRange { .. })));
        assert!(matches!(kraus_dp(3, -0.1), Err(Error::ParameterOutOfRange { .. })));
        assert!(matches!(kraus_pf(1, 0.1), Err(Error::InvalidDimension(1))));
    }

    #[test]
    fn ad_limits() {
        let rho = ginibre_state(3, &mut child_rng(3, 0)).unwrap();
        let id = kraus_ad(3, 0.0).unwrap().apply(&rho).unwrap();
        assert!(id.max_abs_diff(&rho) < 1e-15);
        let full = kraus_ad(3, 1.0).unwrap().apply(&rho).unwrap();
        assert!(full.max_abs_diff(&ComplexMatrix::unit(3, 0, 0)) < 1e-14);
    }

    #[test]
    fn pf_qubit_is_z_flip() {
        let c = kraus_pf(2, 0.3).unwrap();
        let z = ComplexMatrix::from_diag(&[ONE, -ONE]).scale(0.3f64.sqrt());
        assert!(c.operators()[1].max_abs_diff(&z) < 1e-15);
    }

    #[test]
    fn pf_full_strength_qutrit_scales_off_diagonals() {
        let c = kraus_pf(3, 1.0).unwrap();
        let out = c.apply(&ComplexMatrix::unit(3, 0, 2)).unwrap();
        assert_abs_diff_eq!(out[(0, 2)].re, -0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(out[(0, 2)].im, 0.0, epsilon = 1e-14);
        assert!(out.max_abs_diff(&ComplexMatrix::unit(3, 0, 2).scale(-0.5)) < 1e-14);
    }

    #[test]
    fn dp_twirl_identity() {
        for d in 2..=5 {
            for (s, p) in [0.0, 0.3, 1.0].into_iter().enumerate() {
                let rho = ginibre_state(d, &mut child_rng(7, s as u64)).unwrap();
                let out = kraus_dp(d, p).unwrap().apply(&rho).unwrap();
                let mut convex = rho.scale(1.0 - p);
                convex.add_scaled(&unit_trace_identity(d), real(p));
                assert!(out.max_abs_diff(&convex) < 1e-10, "d={d} p={p}");
            }
        }
        let dp = kraus_dp(4, 0.2).unwrap();
        assert_eq!(dp.operators().len() - 1, 15);
    }

    #[test]
    fn df_uniform_jump_fixed_point() {
        let out = kraus_df(3, 2.0 / 3.0).unwrap().apply(&ComplexMatrix::unit(3, 0, 0)).unwrap();
        let expected = ComplexMatrix::identity(3).scale(1.0 / 3.0);
        assert!(out.max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn df_qubit_is_bit_flip() {
        let c = kraus_df(2, 0.4).unwrap();
        let x = shift_power(2, 1);
        assert_eq!(x[(0, 1)], ONE);
        assert_eq!(x[(1, 0)], ONE);
        assert!(c.operators()[1].max_abs_diff(&x.scale(0.4f64.sqrt())) < 1e-15);
    }

    #[test]
    fn composed_identity() {
        let id = KrausChannel::identity(3).unwrap();
        let f = compose_f(&id, &id).unwrap();
        assert_eq!(f.operators(), &[ComplexMatrix::identity(3)]);
        let rho = ginibre_state(3, &mut child_rng(0, 0)).unwrap();
        assert!(cjks_g(Some(&f), &rho).unwrap().max_abs_diff(&rho.scale(1.0 / 3.0)) < 1e-15);
        assert_eq!(cjks_g(None, &rho).unwrap(), rho.scale(1.0 / 3.0));
    }

    #[test]
    fn composed_ad_qubit_f00() {
        let p = 0.35;
        let f = ComposedNoise::symmetric(&kraus_ad(2, p).unwrap());
        let expected = ComplexMatrix::from_diag(&[ONE, real(1.0 - p)]);
        assert!(f.operators()[0].max_abs_diff(&expected) < 1e-15);
        // E_1 E_1ᵀ = p |0⟩⟨1|·|1⟩⟨0| = p |0⟩⟨0|; E_0 E_1ᵀ = √p √(1-p) ... kept in order.
        assert_eq!(f.operators().len(), 4);
        let f11 = &f.operators()[3];
        assert!(f11.max_abs_diff(&ComplexMatrix::unit(2, 0, 0).scale(p)) < 1e-15);
    }

    #[test]
    fn composed_sets_are_complete_for_unital_noise() {
        let f = ComposedNoise::symmetric(&kraus_df(3, 0.4).unwrap());
        assert!(f.completeness_deviation() < 1e-10);
        for d in 2..=4 {
            for c in all_channels(d, 0.6) {
                let f = ComposedNoise::symmetric(&c);
                if c.kind() == ChannelKind::AmplitudeDamping {
                    assert!(f.completeness_deviation() > 0.1);
                } else {
                    assert!(f.completeness_deviation() < 1e-10);
                }
                let expected = if c.kind() == ChannelKind::Depolarizing { d.pow(4) } else { d * d };
                assert_eq!(f.operators().len(), expected);
            }
        }
    }

    #[test]
    fn compose_rejects_mismatch() {
        let a = kraus_ad(2, 0.1).unwrap();
        let b = kraus_ad(3, 0.1).unwrap();
        assert!(matches!(compose_f(&a, &b), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn transpose_identity_holds() {
        assert_eq!(verify_transpose_identity(&KrausChannel::identity(4).unwrap()), 0.0);
        assert!(verify_transpose_identity(&kraus_ad(3, 0.6).unwrap()) <= 1e-10);
        assert!(verify_transpose_identity(&kraus_df(4, 0.9).unwrap()) <= 1e-10);
        for c in all_channels(3, 0.45) {
            assert!(verify_transpose_identity(&c) <= 1e-10);
        }
    }

    #[test]
    fn transpose_identity_by_index_oracle() {
        // (E⊗I)|Φ⟩ has amplitude E_ik/√d at |ik⟩; (I⊗Eᵀ)|Φ⟩ has (Eᵀ)_ki/√d.
        let c = kraus_ad(3, 0.6).unwrap();
        let d = 3;
        let mut lhs = ComplexMatrix::zeros(d * d, d * d);
        let mut rhs = ComplexMatrix::zeros(d * d, d * d);
        for e in c.operators() {
            let et = e.transpose();
            for i in 0..d {
                for k in 0..d {
                    for j in 0..d {
                        for l in 0..d {
                            lhs[(i * d + k, j * d + l)] += e[(i, k)] * e[(j, l)].conj() / d as f64;
                            rhs[(i * d + k, j * d + l)] += et[(k, i)] * et[(l, j)].conj() / d as f64;
                        }
                    }
                }
            }
        }
        assert!(lhs.max_abs_diff(&rhs) < 1e-15);
        let phi = ComplexMatrix::outer(&max_entangled_vector(d), &max_entangled_vector(d));
        let applied = apply_local_pair(&phi, Some(&c), None).unwrap();
        assert!(applied.max_abs_diff(&lhs) < 1e-14);
        let applied_t = apply_local_pair(&phi, None, Some(&c.transposed())).unwrap();
        assert!(applied_t.max_abs_diff(&rhs) < 1e-14);
    }

    #[test]
    fn g_trace_is_one_over_d_after_measurement() {
        let rho = ginibre_state(3, &mut child_rng(9, 2)).unwrap();
        for x in 0..3 {
            let j = crate::measurement::measurement_map(3, x, 2, &rho).unwrap();
            for c in all_channels(3, 0.5) {
                let g = cjks_g(Some(&ComposedNoise::symmetric(&c)), &j).unwrap();
                assert_abs_diff_eq!(g.trace().re, 1.0 / 3.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn ad_composed_gram_is_conjugated_unital_defect() {
        // Σ_ab F†F = conj(Σ_b E_b E_b†) when the B-side set is complete.
        let c = kraus_ad(3, 0.4).unwrap();
        let f = ComposedNoise::symmetric(&c);
        let mut gram = ComplexMatrix::zeros(3, 3);
        for op in f.operators() {
            gram.add_scaled(&op.adjoint().matmul(op), ONE);
        }
        let mut eed = ComplexMatrix::zeros(3, 3);
        for e in c.operators() {
            eed.add_scaled(&e.matmul(&e.adjoint()), ONE);
        }
        assert!(gram.max_abs_diff(&eed.map(|z| z.conj())) < 1e-14);
        assert_abs_diff_eq!(gram.trace().re, 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(gram[(0, 0)].re, 1.0 + 2.0 * 0.4, epsilon = 1e-14);
    }

    #[test]
    fn custom_channel_checks() {
        let ops = kraus_pf(3, 0.2).unwrap().operators().to_vec();
        let c = KrausChannel::custom(3, ops.clone(), 1e-8).unwrap();
        assert_eq!(c.kind(), ChannelKind::Custom);
        assert!(KrausChannel::custom(3, ops[..2].to_vec(), 1e-8).is_err());
        assert!(KrausChannel::custom(2, ops, 1e-8).is_err());
        assert!(KrausChannel::custom(3, vec![], 1e-8).is_err());
    }

    #[test]
    fn labels_round_trip() {
        for k in ChannelKind::BUILTIN {
            assert_eq!(ChannelKind::from_label(k.label()), Some(k));
        }
        assert_eq!(ChannelKind::from_label("df"), Some(ChannelKind::DitFlip));
        assert_eq!(ChannelKind::from_label("XX"), None);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn channels_preserve_trace(d in 2usize..6, p in 0.0f64..=1.0, seed in any::<u64>(), kind in 0usize..4) {
            let rho = ginibre_state(d, &mut child_rng(seed, 0)).unwrap();
            let c = ChannelKind::BUILTIN[kind].build(d, p).unwrap();
            let out = c.apply(&rho).unwrap();
            prop_assert!((out.trace().re - 1.0).abs() < 1e-10);
            prop_assert!(out.trace().im.abs() < 1e-10);
            prop_assert!(DensityMatrix::new(out).is_ok());
        }

        #[test]
        fn composed_unital_noise_is_complete(d in 2usize..5, p in 0.0f64..=1.0, q in 0.0f64..=1.0, ka in 1usize..4, kb in 1usize..4) {
            let a = ChannelKind::BUILTIN[ka].build(d, p).unwrap();
            let b = ChannelKind::BUILTIN[kb].build(d, q).unwrap();
            let f = compose_f(&b, &a).unwrap();
            prop_assert!(f.completeness_deviation() < 1e-10);
        }

        #[test]
        fn g_after_measurement_has_trace_one_over_d(d in 2usize..6, p in 0.0f64..=1.0, seed in any::<u64>(), ka in 0usize..4, kb in 0usize..4, x in 0usize..6, y in 0usize..6) {
            let (x, y) = (x % d, y % d);
            let a = ChannelKind::BUILTIN[ka].build(d, p).unwrap();
            let b = ChannelKind::BUILTIN[kb].build(d, 1.0 - p).unwrap();
            let f = compose_f(&b, &a).unwrap();
            let rho = ginibre_state(d, &mut child_rng(seed, 0)).unwrap();
            let j = crate::measurement::measurement_map(d, x, y, &rho).unwrap();
            let g = cjks_g(Some(&f), &j).unwrap();
            prop_assert!((g.trace().re - 1.0 / d as f64).abs() < 1e-12);
        }
    }
}
