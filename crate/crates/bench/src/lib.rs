//! Benchmarks for `edgeworth-core`; see `benches/`.
