//! Numerics for coherence–disturbance complementarity: density matrices, Kraus
//! channels, entropic measures, discord, relative entropy of entanglement and the
//! trade-off relations between them.

pub mod channels;
pub mod complementarity;
pub mod error;
pub mod matrix;
pub mod measures;
pub mod optimize;
pub mod quantities;
pub mod states;
pub mod tol;

pub use channels::{ChannelKind, KrausChannel};
pub use complementarity::{
    sweep, verify_closed_forms, BasisChoice, ChannelFamily, Counterexample, ErMode,
    InequalityReport, ParamGrid, Relation, SweepConfig, SweepRecord,
};
pub use error::{Error, Result};
pub use matrix::ComplexMatrix;
pub use measures::{Basis, Bits};
pub use states::{DensityMatrix, PureBipartiteState, RngStream};
