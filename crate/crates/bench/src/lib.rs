//! Benchmark-only crate; see the `benches/` targets.
//!
//! Shared fixtures for the benchmark targets live here.

use foldcrest_core::normalform::sample_admissible_jet;
use foldcrest_core::systems::Jet3;

/// Deterministic admissible jets for pipeline benchmarks.
pub fn jet_fixtures(count: usize) -> Vec<Jet3> {
    // Small multiplicative congruential generator; quality is irrelevant,
    // determinism is not.
    let mut state = 0x9e3779b97f4a7c15u64;
    let mut uniform = move || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((state >> 11) as f64 / (1u64 << 53) as f64) * 4.0 - 2.0
    };
    (0..count).map(|_| sample_admissible_jet(&mut uniform)).collect()
}
