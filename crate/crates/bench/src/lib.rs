//! Criterion benchmarks for `mdpkit`; see `benches/`.
