//! Search and verification of rotationally symmetric exact-repair MSR
//! codes over small finite fields.

pub mod conditions;
pub mod format;
pub mod galois;
pub mod linalg;
pub mod model;
pub mod search;

pub use conditions::{check_independence, check_recovery, verify, VerificationVerdict};
pub use format::{parse_document, parse_documents, CodeDocument, ParseError};
pub use galois::{Field, FieldElement, FieldError};
pub use linalg::{FieldMatrix, LinalgError, RrefEnumeration};
pub use model::{CodeParameters, ModelError, RegeneratingCode, SymmetricSeed};
pub use search::{run_search, SearchConfig, SearchMode, SearchReport};
