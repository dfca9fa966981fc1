//! Criterion benchmarks for the bounding algorithms live in `benches/`.
