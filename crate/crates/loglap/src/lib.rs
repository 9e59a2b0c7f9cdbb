//! Nonlocal operators on weighted graphs and integer lattices.
//!
//! This crate realizes the fractional Laplacian `(-Δ)^s` and the logarithmic
//! Laplacian `log(-Δ)` on finite weighted graphs and on the standard lattice
//! `Z^d`, together with the kernels that represent them pointwise and the
//! diffusion kernels generated by their semigroups.
//!
//! The main entry points:
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`graph`] | Weighted graphs, validation, metric and volume queries, the formal Laplacian |
//! | [`special`] | Gamma, modified Bessel `I_n`, Bessel `J_ν`, the Euler split identity |
//! | [`quad`] | Adaptive Gauss–Kronrod quadrature and fixed panels |
//! | [`spectral`] | Exact functional calculus on finite graphs and the Bochner integral routes |
//! | [`heat`] | Heat kernels on `Z^d`: Bessel closed form, Fourier quadrature, finite windows |
//! | [`lattice`] | The kernels `W_s`, `W_log`, `W` and the pointwise operators built from them |
//! | [`torus`] | The symbol `Φ(ξ)`, Fourier multipliers, and the diffusion kernels `p_s`, `p_log` |
//! | [`asym`] | Asymptotic constants `C_{s,d}`, the cutoff integral `A_{s,d}`, and limit-law fits |
//! | [`suite`] | The acceptance battery run by the CLI `suite` subcommand |
//!
//! ## Quick start
//!
//! ```
//! use loglap::graph::path_graph;
//! use loglap::spectral::decompose;
//!
//! // log(-Δ) δ_0 on the two-point path: ±(log 2)/2
//! let dec = decompose(&path_graph(2)).unwrap();
//! let values = dec.log_laplacian_spectral(&[1.0, 0.0]).unwrap();
//! assert!((values[0] - 0.5 * 2.0f64.ln()).abs() < 1e-12);
//! assert!((values[1] + 0.5 * 2.0f64.ln()).abs() < 1e-12);
//! ```

// Comparisons are written as `!(x > 0)`-style guards on purpose: they reject
// NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asym;
pub mod graph;
pub mod heat;
pub mod lattice;
pub mod quad;
pub mod special;
pub mod spectral;
pub mod suite;
pub mod torus;

pub use graph::{GraphDiagnostics, GraphError, LaplacianKind, WeightedGraph};
pub use heat::{HeatKernelEval, HeatMethod};
pub use lattice::{KernelKind, KernelTable, LatticeFunction};
pub use quad::{QuadError, QuadratureResult};
pub use spectral::{SpectralDecomposition, SpectralError, TimeQuadratureSpec};
pub use torus::{MultiplierKind, TorusQuadratureSpec};
