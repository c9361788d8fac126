//! Criterion benchmarks for the polymer laboratory live in benches/.
