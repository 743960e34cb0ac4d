//! Closed-form efficiencies, noise thresholds, the classical bound and the
//! phase-deviation efficiency.
//!
//! All efficiencies assume phase-engineered targets, for which the
//! teleported coherence does not depend on the outcome `y`.

use serde::Serialize;

use crate::channels::ChannelKind;
use crate::error::{Error, Result};
use crate::states::{check_dim, check_index, check_probability, Magnitudes};
use crate::teleport::Efficiency;

/// Tolerance of the `η(p_th) = 1/(d+1)` self-check.
pub const THRESHOLD_CONSISTENCY_TOL: f64 = 1e-9;

/// Best efficiency reachable without entanglement.
pub fn eta_classical(d: usize) -> Result<f64> {
    check_dim(d)?;
    Ok(1.0 / (d as f64 + 1.0))
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `(1 - d p/(d-1))²`: off-diagonal damping shared by PF and by DF when the
/// family index is coprime to `d`.
fn phase_flip_factor(d: usize, p: f64) -> f64 {
    let f = 1.0 - d as f64 * p / (d as f64 - 1.0);
    f * f
}

/// Efficiency of an engineered target under identical local noise on both
/// halves of the pair. `x` is consulted only for DF; there the closed form
/// exists for `x = 0` and for `x` coprime to `d`.
pub fn eta_closed_form(kind: ChannelKind, d: usize, p: f64, x: Option<usize>) -> Result<f64> {
    check_dim(d)?;
    check_probability("p", p)?;
    let q = 1.0 - p;
    match kind {
        ChannelKind::AmplitudeDamping => Ok((2.0 * q + (d as f64 - 2.0) * q * q) / d as f64),
        ChannelKind::PhaseFlip => Ok(phase_flip_factor(d, p)),
        ChannelKind::Depolarizing => Ok(q * q),
        ChannelKind::DitFlip => {
            let x = x.ok_or_else(|| Error::NoClosedForm("DF efficiency without a basis index".into()))?;
            check_index("x", x, d)?;
            if x == 0 {
                Ok(1.0)
            } else if gcd(x, d) == 1 {
                Ok(phase_flip_factor(d, p))
            } else {
                Err(Error::NoClosedForm(format!(
                    "DF with x={x}, d={d}: efficiency depends on the target (see eta_df_for_target)"
                )))
            }
        }
        ChannelKind::Custom => Err(Error::NoClosedForm("custom channel".into())),
    }
}

/// DF efficiency for an engineered target built from `mags`, valid for every
/// `x`. Coherences at offset `Δ = k - j` survive untouched when `xΔ ≡ 0 (mod d)`
/// and are damped by `(1 - dp/(d-1))²` otherwise.
pub fn eta_df_for_target(mags: &Magnitudes, p: f64, x: usize) -> Result<Efficiency> {
    let d = mags.dim();
    check_probability("p", p)?;
    check_index("x", x, d)?;
    let damped = phase_flip_factor(d, p);
    let (mut c_in, mut c_out) = (0.0, 0.0);
    for delta in 1..d {
        let weight: f64 = (0..d).map(|j| mags.get(j, (j + delta) % d)).sum();
        let factor = if (x * delta) % d == 0 { 1.0 } else { damped };
        c_in += weight;
        c_out += factor * weight;
    }
    Ok(Efficiency::from_coherences(c_in, c_out))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdResult {
    pub d: usize,
    pub kind: ChannelKind,
    /// Basis index, recorded for DF only.
    pub x: Option<usize>,
    pub p_th: f64,
    pub classical_bound: f64,
    /// Closed-form efficiency evaluated at `p_th`.
    pub eta_at_threshold: f64,
    /// `false` when the efficiency never drops to the bound for `p < 1`.
    pub crosses_bound: bool,
}

/// Noise strength at which the closed-form efficiency meets `1/(d+1)`.
pub fn threshold(kind: ChannelKind, d: usize) -> Result<ThresholdResult> {
    threshold_for_basis(kind, d, None)
}

/// Like [`threshold`], with the DF basis index. DF with `x = 0` never loses
/// its advantage and reports `p_th = 1`.
pub fn threshold_for_basis(kind: ChannelKind, d: usize, x: Option<usize>) -> Result<ThresholdResult> {
    check_dim(d)?;
    let df = (d as f64 - 1.0) / d as f64;
    let root = 1.0 / (d as f64 + 1.0).sqrt();
    let (p_th, crosses_bound) = match kind {
        ChannelKind::AmplitudeDamping => {
            if d < 3 {
                return Err(Error::UnsupportedDimension {
                    what: "AD threshold formula",
                    d,
                    limit: 3,
                });
            }
            let n = (d * d) as f64;
            let cube = (d * d * d) as f64;
            ((n - 1.0 - (cube + 1.0).sqrt()) / (n - d as f64 - 2.0), true)
        }
        ChannelKind::PhaseFlip => (df * (1.0 - root), true),
        ChannelKind::Depolarizing => (1.0 - root, true),
        ChannelKind::DitFlip => {
            let x = x.ok_or_else(|| Error::NoClosedForm("DF threshold without a basis index".into()))?;
            check_index("x", x, d)?;
            if x == 0 {
                (1.0, false)
            } else if gcd(x, d) == 1 {
                (df * (1.0 - root), true)
            } else {
                return Err(Error::NoClosedForm(format!("DF threshold with x={x}, d={d}")));
            }
        }
        ChannelKind::Custom => return Err(Error::NoClosedForm("custom channel threshold".into())),
    };
    let classical_bound = eta_classical(d)?;
    let eta_at_threshold = eta_closed_form(kind, d, p_th, x)?;
    if crosses_bound && (eta_at_threshold - classical_bound).abs() > THRESHOLD_CONSISTENCY_TOL {
        return Err(Error::NoClosedForm(format!(
            "{kind} threshold for d={d} fails its consistency check: η(p_th)={eta_at_threshold}"
        )));
    }
    Ok(ThresholdResult {
        d,
        kind,
        x: if kind == ChannelKind::DitFlip { x } else { None },
        p_th,
        classical_bound,
        eta_at_threshold,
        crosses_bound,
    })
}

/// Efficiency of the engineered state perturbed by `δ` on every upper-triangle
/// coherence. Bob's coherence at `(j, k)` is `(1/d)|Σ_l |ρ_ab| e^{iδ sgn(b-a)}|`
/// with `a = j ⊖ l`, `b = k ⊖ l`; the input coherence is accumulated over the
/// same index walk so that `δ = 0` returns exactly one.
pub fn eta_deviation(mags: &Magnitudes, delta_phi: f64) -> Efficiency {
    let d = mags.dim();
    let (c, s) = (delta_phi.cos(), delta_phi.sin());
    let inv_d = 1.0 / d as f64;
    let (mut c_in, mut c_out) = (0.0, 0.0);
    for j in 0..d {
        for k in 0..d {
            if j == k {
                continue;
            }
            let (mut re, mut im, mut abs_sum) = (0.0, 0.0, 0.0);
            for l in 0..d {
                let a = (j + d - l) % d;
                let b = (k + d - l) % d;
                let m = mags.get(a, b);
                re += m * c;
                im += if b > a { m * s } else { -m * s };
                abs_sum += m;
            }
            c_out += inv_d * re.hypot(im);
            c_in += inv_d * abs_sum;
        }
    }
    Efficiency::from_coherences(c_in, c_out)
}

/// `true` iff the closed-form efficiency strictly exceeds the classical bound.
pub fn advantage_window(kind: ChannelKind, d: usize, p: f64, x: Option<usize>) -> Result<bool> {
    Ok(eta_closed_form(kind, d, p, x)? > eta_classical(d)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResourceSummary {
    pub d: usize,
    pub outcomes_standard: usize,
    pub outcomes_grouped: usize,
    pub cbits_standard: f64,
    pub cbits_grouped: u32,
}

/// Measurement outcomes and classical bits: full Bell measurement versus a
/// single grouped family.
pub fn resource_summary(d: usize) -> Result<ResourceSummary> {
    check_dim(d)?;
    Ok(ResourceSummary {
        d,
        outcomes_standard: d * d,
        outcomes_grouped: d,
        cbits_standard: 2.0 * (d as f64).log2(),
        cbits_grouped: usize::BITS - (d - 1).leading_zeros(),
    })
}
