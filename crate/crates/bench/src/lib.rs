//! Benchmarks only; see `benches/wada.rs`.
