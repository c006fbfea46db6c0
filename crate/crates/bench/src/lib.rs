//! Benchmarks for `lawson-core`; run them with `cargo bench -p lawson-bench`.
