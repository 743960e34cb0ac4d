//! Two independent implementations of coherence teleportation.
//!
//! * [`teleport_brute`] builds the full three-qudit state `ρ_T ⊗ ρ_AB` in
//!   `(T, A, B)` order, projects with `Π_x^y ⊗ I_B` and traces out `T, A`.
//! * [`teleport_cjks`] never leaves the `d`-dimensional space: Bob's state is
//!   `G(J*(ρ_T))` normalized, with `J*` the measurement map and `G` the noise
//!   map built from the composed operators `F_ab`.
//!
//! The brute engine is an oracle and is capped at `d ≤ 6`.

use serde::ser::{Serialize, Serializer};
use serde::Serialize as DeriveSerialize;

use crate::channels::{apply_local_pair, cjks_g, ComposedNoise, KrausChannel};
use crate::error::{Error, Result};
use crate::io::{encode_matrix, MatrixJson};
use crate::linalg::{partial_trace, tensor, ComplexMatrix, DensityMatrix};
use crate::measurement::{measurement_map, povm_element};
use crate::states::{check_dim, check_index, TargetState};

pub const BRUTE_MAX_DIM: usize = 6;

/// Outcome probabilities below this are treated as degenerate.
pub const MIN_PROBABILITY: f64 = 1e-14;

/// Inputs with `C_l1` at or below this carry no coherence.
pub const COHERENCE_FLOOR: f64 = 1e-14;

/// Tolerance used when validating Bob's normalized state.
pub const BOB_STATE_TOL: f64 = 1e-9;

/// Teleportation efficiency `C_out / C_in`, or an explicit marker when the
/// input carries no coherence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Efficiency {
    Ratio(f64),
    Undefined,
}

impl Efficiency {
    pub fn from_coherences(c_in: f64, c_out: f64) -> Self {
        if c_in <= COHERENCE_FLOOR {
            Efficiency::Undefined
        } else {
            Efficiency::Ratio(c_out / c_in)
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Efficiency::Ratio(v) => Some(v),
            Efficiency::Undefined => None,
        }
    }
}

impl Serialize for Efficiency {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Efficiency::Ratio(v) => s.serialize_f64(*v),
            Efficiency::Undefined => s.serialize_str("undefined"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TeleportOutcome {
    pub d: usize,
    pub x: usize,
    pub y: usize,
    pub probability: f64,
    pub bob_state: DensityMatrix,
    pub coherence_in: f64,
    pub coherence_out: f64,
    pub efficiency: Efficiency,
}

/// Flat serializable view of a [`TeleportOutcome`].
#[derive(Debug, Clone, DeriveSerialize)]
pub struct OutcomeRecord {
    pub d: usize,
    pub x: usize,
    pub y: usize,
    pub probability: f64,
    pub bob_state: MatrixJson,
    pub coherence_in: f64,
    pub coherence_out: f64,
    pub efficiency: Efficiency,
}

impl TeleportOutcome {
    pub fn record(&self) -> OutcomeRecord {
        OutcomeRecord {
            d: self.d,
            x: self.x,
            y: self.y,
            probability: self.probability,
            bob_state: encode_matrix(self.bob_state.matrix()),
            coherence_in: self.coherence_in,
            coherence_out: self.coherence_out,
            efficiency: self.efficiency,
        }
    }
}

/// `C_l1(ρ) = Σ_{u≠v} |ρ_uv|`.
pub fn coherence_l1(rho: &DensityMatrix) -> f64 {
    coherence_l1_matrix(rho.matrix())
}

/// `C_l1` on an arbitrary square matrix (used for unvalidated inputs).
pub fn coherence_l1_matrix(m: &ComplexMatrix) -> f64 {
    let mut sum = 0.0;
    for u in 0..m.rows() {
        for v in 0..m.cols() {
            if u != v {
                sum += m[(u, v)].norm();
            }
        }
    }
    sum
}

/// `C_out / C_in`; fails when the input carries no coherence.
pub fn efficiency(outcome: &TeleportOutcome) -> Result<f64> {
    outcome.efficiency.value().ok_or(Error::UndefinedEfficiency)
}

fn check_xy(d: usize, x: usize, y: usize) -> Result<()> {
    check_dim(d)?;
    check_index("x", x, d)?;
    check_index("y", y, d)
}

/// Unnormalized Bob state from the three-qudit construction. Accepts any
/// `d`×`d` target matrix; `pair` is the (already noisy) `d²`×`d²` resource.
pub fn brute_bob(target: &ComplexMatrix, pair: &ComplexMatrix, x: usize, y: usize) -> Result<ComplexMatrix> {
    let d = target.rows();
    check_xy(d, x, y)?;
    if d > BRUTE_MAX_DIM {
        return Err(Error::UnsupportedDimension {
            what: "brute-force engine",
            d,
            limit: BRUTE_MAX_DIM,
        });
    }
    if pair.rows() != d * d || !pair.is_square() {
        return Err(Error::DimensionMismatch {
            expected: d * d,
            found: pair.rows(),
        });
    }
    let joint = tensor(target, pair);
    let proj = tensor(&povm_element(d, x, y)?.op, &ComplexMatrix::identity(d));
    let projected = proj.matmul(&joint).matmul(&proj);
    partial_trace(&projected, &[d, d, d], &[2])
}

/// Unnormalized Bob state `G(J*(ρ))`; `noise = None` means `G(ρ) = ρ/d`.
pub fn cjks_bob(target: &ComplexMatrix, noise: Option<&ComposedNoise>, x: usize, y: usize) -> Result<ComplexMatrix> {
    let d = target.rows();
    check_xy(d, x, y)?;
    if let Some(n) = noise {
        if n.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: n.dim(),
            });
        }
    }
    cjks_g(noise, &measurement_map(d, x, y, target)?)
}

fn finish(target: &ComplexMatrix, unnormalized: ComplexMatrix, x: usize, y: usize) -> Result<TeleportOutcome> {
    let d = target.rows();
    let probability = unnormalized.trace().re;
    if probability < MIN_PROBABILITY {
        return Err(Error::DegenerateOutcome(probability));
    }
    let bob = DensityMatrix::with_tolerance(unnormalized.scale(1.0 / probability), BOB_STATE_TOL)?;
    let coherence_in = coherence_l1_matrix(target);
    let coherence_out = coherence_l1(&bob);
    Ok(TeleportOutcome {
        d,
        x,
        y,
        probability,
        bob_state: bob,
        coherence_in,
        coherence_out,
        efficiency: Efficiency::from_coherences(coherence_in, coherence_out),
    })
}

/// Brute-force teleportation. `chan_a` acts on Alice's half of the pair and
/// `chan_b` on Bob's; `None` is the identity.
pub fn teleport_brute(
    target: &TargetState,
    pair: &DensityMatrix,
    chan_a: Option<&KrausChannel>,
    chan_b: Option<&KrausChannel>,
    x: usize,
    y: usize,
) -> Result<TeleportOutcome> {
    let d = target.dim();
    if d > BRUTE_MAX_DIM {
        return Err(Error::UnsupportedDimension {
            what: "brute-force engine",
            d,
            limit: BRUTE_MAX_DIM,
        });
    }
    for c in [chan_a, chan_b].into_iter().flatten() {
        if c.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: c.dim(),
            });
        }
    }
    let noisy_pair = apply_local_pair(pair.matrix(), chan_a, chan_b)?;
    let bob = brute_bob(target.matrix(), &noisy_pair, x, y)?;
    finish(target.matrix(), bob, x, y)
}

/// Composite-map teleportation in the single-qudit space.
pub fn teleport_cjks(target: &TargetState, noise: Option<&ComposedNoise>, x: usize, y: usize) -> Result<TeleportOutcome> {
    let bob = cjks_bob(target.matrix(), noise, x, y)?;
    finish(target.matrix(), bob, x, y)
}

/// Result of comparing `G ∘ J*` against `J*/d` on all matrix units.
#[derive(Debug, Clone, Copy, PartialEq, DeriveSerialize)]
pub struct PerfectBasisReport {
    pub holds: bool,
    pub max_deviation: f64,
}

pub const PERFECT_BASIS_TOL: f64 = 1e-10;

/// Tests whether family `x` is a perfect measurement basis for `noise`.
pub fn perfect_basis_check(noise: &ComposedNoise, x: usize) -> Result<PerfectBasisReport> {
    let d = noise.dim();
    check_index("x", x, d)?;
    let mut worst = 0.0f64;
    for y in 0..d {
        for i in 0..d {
            for j in 0..d {
                let j_unit = measurement_map(d, x, y, &ComplexMatrix::unit(d, i, j))?;
                let noisy = cjks_g(Some(noise), &j_unit)?;
                worst = worst.max(noisy.max_abs_diff(&j_unit.scale(1.0 / d as f64)));
            }
        }
    }
    Ok(PerfectBasisReport {
        holds: worst <= PERFECT_BASIS_TOL,
        max_deviation: worst,
    })
}
