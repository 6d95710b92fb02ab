//! Criterion benchmarks for `ssum-core`; the targets live in `benches/`.
