//! Decides whether the fixed point `μ^ω(1)` of a morphism avoids Abelian k-powers.
//!
//! The procedure computes the set of ancestors of the template whose instances are exactly the
//! Abelian k-powers, then scans every factor of the fixed point up to a computable length for an
//! instance of any ancestor. It applies to morphisms with `μ(1) = 1x`, all images of length at
//! least 2, and a nonsingular frequency matrix `M` with `|M⁻¹| < 1`.
//!
//! ```
//! use abelfree::{decide, DecideConfig, Morphism, Status};
//!
//! let mu = Morphism::from_u32(&[&[1, 1, 2, 1], &[2, 2, 1]]);
//! let verdict = decide(&mu, 2, &DecideConfig::default()).unwrap();
//! assert!(matches!(verdict.status, Status::Contains { .. }));
//! ```

pub mod cli;
pub mod decider;
pub mod error;
pub mod exactlinalg;
pub mod oracle;
pub mod templates;
pub mod words;

pub use decider::{
    decide, extract_witness, length_bound, short_length_bound, BoundChoice, DecideConfig,
    PreconditionFailure, Stats, Status, Verdict,
};
pub use error::{Error, Result};
pub use exactlinalg::{ContractionCertificate, FrequencyMatrix, RationalMatrix, RowSolver};
pub use oracle::{find_abelian_power, PowerOccurrence};
pub use templates::{
    ancestors, delta, find_block_instance, find_instance, parents, radius_bound, Ancestors, InstanceOccurrence,
    ParentFinder, ParentRule, Template,
};
pub use words::{parikh, Letter, Morphism, ParikhVector, ValidationReport, Word};
