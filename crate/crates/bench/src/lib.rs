//! Benchmarks for the calculus live in `benches/`.
