//! Criterion benchmarks for twh-core live in `benches/`.
