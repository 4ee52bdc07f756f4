//! Exact effective logical noise channels for stabilizer codes under
//! general single-qubit (and block-correlated) CPTP noise, with
//! hard-decoding recovery optimization and threshold searches.

pub mod channel;
pub mod code;
pub mod config;
pub mod decoder;
pub mod error;
pub mod experiments;
pub mod logical;
pub mod oracle;
pub mod pauli;
pub mod threshold;

pub use channel::{KrausChannel, Mat2, NoiseFamily, ProcessMatrix};
pub use code::{builtin_code, StabilizerCode, SyndromeTable, TransversalGroup};
pub use error::{Error, Result};
pub use pauli::{PauliKind, PauliOp};
