//! Frozen operating constants.

/// Default match threshold (squared fixed-point distance).
///
/// Produced by `oracles/threshold_oracle.py` over 100000 genuine pairs
/// (per-coordinate noise in [-16, 16]) and 100000 impostor pairs (independent
/// uniform templates in [-1024, 1024]): genuine max 8638, impostor min
/// 19398296, threshold at their midpoint.
pub const DEFAULT_THRESHOLD: u64 = 9_703_467;

/// Observed genuine maximum from the same oracle run.
pub const ORACLE_GENUINE_MAX: u64 = 8_638;

/// Observed impostor minimum from the same oracle run.
pub const ORACLE_IMPOSTOR_MIN: u64 = 19_398_296;

/// Default consensus timeout in simulation ticks.
pub const DEFAULT_TIMEOUT_TICKS: u64 = 50;

/// Header format version.
pub const BLOCK_VERSION: u32 = 1;
