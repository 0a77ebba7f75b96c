//! Criterion benchmarks for retrieval and action parsing live in `benches/`.
