//! Criterion benchmarks for `kontsevich-core`; see `benches/`.
