//! Criterion benchmarks for narrowcap; see `benches/`.
