//! Biometric-attested permissioned ledger for food supply chains.
//!
//! Every recorded logistics step carries a scrambled-domain biometric match of
//! the person responsible for it. Member nodes re-verify those matches while
//! voting on blocks, and committed chains answer custody, responsibility and
//! ingredient-label queries.
//!
//! - [`biometric`]: templates, scrambling keys, enrollment and verification.
//! - [`ledger`]: canonical encoding, Merkle roots, blocks and validation.
//! - [`consensus`]: quorum voting node state machine.
//! - [`sim`]: deterministic discrete-event network.
//! - [`provenance`]: custody traces, responsibility lookup, label audits.
//! - [`chainfile`] and [`scenario`]: on-disk formats and scripted runs.
//! - [`workload`]: synthetic actors, probes and item lifecycles.

pub mod biometric;
pub mod chainfile;
pub mod codec;
pub mod consensus;
pub mod constants;
pub mod hash;
pub mod ledger;
pub mod provenance;
pub mod rng;
pub mod scenario;
pub mod sim;
pub mod workload;

pub use hash::Hash32;
