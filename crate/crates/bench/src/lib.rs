//! Criterion benchmarks for geomphase-core live under `benches/`.
