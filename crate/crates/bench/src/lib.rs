//! Criterion benchmarks for entex-core live in `benches/`.
