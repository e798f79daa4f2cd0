//! Criterion benchmark harness for the core library; see `benches/`.
