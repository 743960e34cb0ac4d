//! Simulation of coherence teleportation between qudits with grouped
//! Bell-state POVMs, local Kraus noise, and phase-engineered targets.
//!
//! Modules, bottom-up: [`linalg`] (dense complex matrices), [`states`],
//! [`measurement`], [`channels`], [`teleport`] (brute-force and composite-map
//! engines), [`analytics`] (closed forms and thresholds), [`montecarlo`]
//! (ensemble averages), and [`io`] (JSON formats).

pub mod analytics;
pub mod channels;
pub mod error;
pub mod io;
pub mod linalg;
pub mod measurement;
pub mod montecarlo;
pub mod states;
pub mod teleport;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, DensityMatrix, C64};
