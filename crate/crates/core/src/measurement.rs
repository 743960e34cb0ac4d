//! High-dimensional Bell states, the `d` grouped POVM families, and the
//! single-qudit measurement map.
//!
//! Family `x`, outcome `y` collects the Bell projectors `|Ψ_nm⟩⟨Ψ_nm|` with
//! `(n, m) = (x·l ⊕ y, l)` for `l = 0..d`. All modular indices are reduced to
//! `[0, d)`.

use crate::error::{Error, Result};
use crate::linalg::{omega_pow, ComplexMatrix, C64, ZERO};
use crate::states::{check_dim, check_index};

/// Largest `d` for which POVM elements are materialized as dense
/// `d²`×`d²` matrices.
pub const DENSE_POVM_MAX_DIM: usize = 16;

/// `(n, m)` of the Bell state that the `l`-th term of `Π_x^y` projects onto.
#[inline]
pub fn bell_index(d: usize, x: usize, l: usize, y: usize) -> (usize, usize) {
    ((x * l + y) % d, l)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BellVector {
    pub d: usize,
    pub n: usize,
    pub m: usize,
    pub vec: Vec<C64>,
}

/// `|Ψ_nm⟩ = Σ_j e^{i2πjn/d} |j⟩ ⊗ |j ⊕ m⟩ / √d` on the (T, A) register.
pub fn bell_state(d: usize, n: usize, m: usize) -> Result<BellVector> {
    check_dim(d)?;
    check_index("n", n, d)?;
    check_index("m", m, d)?;
    let amp = 1.0 / (d as f64).sqrt();
    let mut vec = vec![ZERO; d * d];
    for j in 0..d {
        vec[j * d + (j + m) % d] = omega_pow(d, (j * n) as i64) * amp;
    }
    Ok(BellVector { d, n, m, vec })
}

/// All `d²` Bell vectors ordered by `(n, m)` row-major.
pub fn bell_basis(d: usize) -> Result<Vec<BellVector>> {
    let mut out = Vec::with_capacity(d * d);
    for n in 0..d {
        for m in 0..d {
            out.push(bell_state(d, n, m)?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PovmElement {
    pub d: usize,
    pub x: usize,
    pub y: usize,
    pub op: ComplexMatrix,
}

/// `Π_x^y = Σ_l |Ψ_{xl⊕y, l}⟩⟨Ψ_{xl⊕y, l}|` for `y = 0..d`.
pub fn povm_set(d: usize, x: usize) -> Result<Vec<PovmElement>> {
    check_dim(d)?;
    check_index("x", x, d)?;
    if d > DENSE_POVM_MAX_DIM {
        return Err(Error::UnsupportedDimension {
            what: "dense POVM construction",
            d,
            limit: DENSE_POVM_MAX_DIM,
        });
    }
    (0..d).map(|y| povm_element(d, x, y)).collect()
}

pub fn povm_element(d: usize, x: usize, y: usize) -> Result<PovmElement> {
    check_index("y", y, d)?;
    let dd = d * d;
    let mut op = ComplexMatrix::zeros(dd, dd);
    for l in 0..d {
        let (n, m) = bell_index(d, x, l, y);
        let psi = bell_state(d, n, m)?;
        // Each Bell vector has d nonzero amplitudes; accumulate its outer
        // product on that support only.
        let support: Vec<usize> = (0..d).map(|j| j * d + (j + m) % d).collect();
        for &r in &support {
            for &c in &support {
                op[(r, c)] += psi.vec[r] * psi.vec[c].conj();
            }
        }
    }
    Ok(PovmElement { d, x, y, op })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WOperator {
    pub d: usize,
    pub n: usize,
    pub m: usize,
    pub op: ComplexMatrix,
}

/// `W_nm = Σ_j e^{-i2πjn/d} |j ⊕ m⟩⟨j| / √d`.
pub fn w_operator(d: usize, n: usize, m: usize) -> Result<WOperator> {
    check_dim(d)?;
    check_index("n", n, d)?;
    check_index("m", m, d)?;
    let amp = 1.0 / (d as f64).sqrt();
    let mut op = ComplexMatrix::zeros(d, d);
    for j in 0..d {
        op[((j + m) % d, j)] = omega_pow(d, -((j * n) as i64)) * amp;
    }
    Ok(WOperator { d, n, m, op })
}

/// The `d` operators `W_{xl⊕y, l}` making up the measurement map for `Π_x^y`.
pub fn measurement_operators(d: usize, x: usize, y: usize) -> Result<Vec<ComplexMatrix>> {
    check_dim(d)?;
    check_index("x", x, d)?;
    check_index("y", y, d)?;
    (0..d)
        .map(|l| {
            let (n, m) = bell_index(d, x, l, y);
            w_operator(d, n, m).map(|w| w.op)
        })
        .collect()
}

/// `J*(ρ) = Σ_l W_{xl⊕y,l} ρ W_{xl⊕y,l}†`. Trace preserving.
pub fn measurement_map(d: usize, x: usize, y: usize, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !rho.is_square() || rho.rows() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: rho.rows(),
        });
    }
    let mut out = ComplexMatrix::zeros(d, d);
    for w in measurement_operators(d, x, y)? {
        out.add_scaled(&w.sandwich(rho), C64::new(1.0, 0.0));
    }
    Ok(out)
}

/// Structural deviations of one POVM family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PovmReport {
    pub completeness: f64,
    pub idempotence: f64,
    pub hermiticity: f64,
    pub orthogonality: f64,
    /// `true` when `(l, y) ↦ (xl ⊕ y, l)` is a permutation of `[0, d)²`.
    pub bijective: bool,
}

impl PovmReport {
    pub fn max_deviation(&self) -> f64 {
        self.completeness
            .max(self.idempotence)
            .max(self.hermiticity)
            .max(self.orthogonality)
    }
}

/// `true` iff every Bell index pair is hit exactly once by family `x`.
pub fn index_map_is_bijective(d: usize, x: usize) -> bool {
    let mut seen = vec![false; d * d];
    for l in 0..d {
        for y in 0..d {
            let (n, m) = bell_index(d, x, l, y);
            if std::mem::replace(&mut seen[n * d + m], true) {
                return false;
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Checks completeness, projector property and pairwise orthogonality on the
/// materialized family.
pub fn check_povm_family(d: usize, x: usize) -> Result<PovmReport> {
    let set = povm_set(d, x)?;
    let dd = d * d;
    let mut sum = ComplexMatrix::zeros(dd, dd);
    let mut idempotence = 0.0f64;
    let mut hermiticity = 0.0f64;
    let mut orthogonality = 0.0f64;
    for (i, a) in set.iter().enumerate() {
        sum.add_scaled(&a.op, C64::new(1.0, 0.0));
        hermiticity = hermiticity.max(a.op.hermiticity_defect());
        idempotence = idempotence.max(a.op.matmul(&a.op).max_abs_diff(&a.op));
        for b in &set[i + 1..] {
            orthogonality = orthogonality.max(a.op.matmul(&b.op).max_abs());
        }
    }
    Ok(PovmReport {
        completeness: sum.max_abs_diff(&ComplexMatrix::identity(dd)),
        idempotence,
        hermiticity,
        orthogonality,
        bijective: index_map_is_bijective(d, x),
    })
}
