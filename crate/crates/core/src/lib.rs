//! Convolution operators and ergodic averages on finite quantum groups.
//!
//! The crate models a finite quantum group by the structure constants of its
//! Hopf *-algebra ([`hopf`]), the convolution algebra of functionals on it
//! ([`duals`]), the associated Markov-type operators and their averages
//! ([`conv_ops`]), tracial `L^p` spaces over the Haar state ([`lp`]),
//! convolution semigroups ([`semigroups`]) and, for non-tracial phenomena,
//! single corepresentation blocks carrying an F-matrix ([`blocks`]).
//!
//! Everything is generic over the real field `T` (`f32` or `f64`); the
//! aliases at the crate root fix `T = f64`.

pub mod blocks;
pub mod conv_ops;
pub mod duals;
pub mod error;
pub mod group_table;
pub mod hopf;
pub mod io;
pub mod linalg;
pub mod lp;
pub mod scalar;
pub mod semigroups;

pub use error::{Error, Result};
pub use group_table::GroupTable;
pub use scalar::{Real, C, CMat, CVec};

/// Double-precision quantum group.
pub type QuantumGroup = hopf::FiniteQuantumGroup<f64>;
/// Single-precision quantum group.
pub type QuantumGroup32 = hopf::FiniteQuantumGroup<f32>;
pub type Functional = duals::Functional<f64>;
pub type Complex64 = C<f64>;
pub type Matrix = CMat<f64>;
pub type Vector = CVec<f64>;
pub type ConvOperator = conv_ops::ConvOperator<f64>;
pub type LpContext = lp::LpContext<f64>;
pub type GeneratingFunctional = semigroups::GeneratingFunctional<f64>;
pub type CorepBlock = blocks::CorepBlock<f64>;
pub type BlockFunctional = blocks::BlockFunctional<f64>;
