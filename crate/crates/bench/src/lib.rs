//! Benchmarks for the thindom kernels; see `benches/kernels.rs`.
