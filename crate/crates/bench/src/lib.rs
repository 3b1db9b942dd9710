//! Benchmarks for foldwave kernels live in `benches/`.
