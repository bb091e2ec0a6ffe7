//! Benchmarks for qcx-core kernels live in `benches/`.
