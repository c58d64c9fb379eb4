//! kmlab: a desk-scale laboratory for algorithmic-complexity-based sequence
//! prediction.
//!
//! The crate simulates monotone Turing machines, estimates code-length-based
//! predictive functions by bounded program enumeration, runs loss-minimizing
//! predictors against computable and probabilistic environments, and checks
//! the bounds and counterexample constructions those predictors obey, all in
//! exact rational arithmetic.
//!
//! ```
//! use kmlab::enumeration::{enumerate_minimal, Budget};
//! use kmlab::machine::V5Machine;
//! use kmlab::SymbolString;
//!
//! // On the s-block machine with s = 4, a single 4-bit program emits 0001,
//! // so the enumerated prior mass is exactly 1/16.
//! let machine = V5Machine::new(4, None).unwrap();
//! let set = enumerate_minimal(&machine, &SymbolString::bits("0001"), Budget::new(6, 100));
//! assert_eq!(set.programs.len(), 1);
//! assert_eq!(set.min_len().finite(), Some(4));
//! assert_eq!(set.mass(), kmlab::exact::rat(1, 16));
//! ```

pub mod alphabet;
pub mod bits;
pub mod cache;
pub mod decision;
pub mod enumeration;
pub mod environments;
pub mod exact;
pub mod machine;
pub mod predictive;
pub mod textspec;
pub mod verify;

pub use alphabet::{Alphabet, Symbol, SymbolString};
pub use bits::BitString;
pub use enumeration::{Budget, ComplexityEstimate, EstimateKind, MinimalProgramSet};
pub use machine::{CodeLen, MachineHandle, MonotoneMachine, RunStatus, StepOutcome};
