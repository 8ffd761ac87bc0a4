//! Structural controllability, minimum node control, pinning design and
//! stability in probability for Boolean networks, built on the
//! semi-tensor product of matrices.

pub mod bnfile;
pub mod error;
pub mod fixtures;
pub mod graph;
pub mod logic;
pub mod mincontrol;
pub mod network;
pub mod oracle;
pub mod pbn;
pub mod pinning;
pub mod random;
pub mod structural;

pub use bnfile::{parse_network, Parsed, ParsedNetwork};
pub use error::{Error, Result};
pub use graph::{InTreeDecomposition, WiringGraph};
pub use mincontrol::{AggregationPartition, ConstraintMatrices, ControlSelection};
pub use logic::{BooleanFunction, CanonicalVector, DenseMatrix, LogicalMatrix};
pub use network::{BooleanNetwork, NodeId, NodeKind, ProbabilisticBooleanNetwork, Update};
pub use pbn::{StabilityVerdict, StabilizationPlan, TransitionModel};
pub use pinning::{PinningOptions, PinningPlan};
