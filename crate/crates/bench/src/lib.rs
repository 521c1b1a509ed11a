//! Criterion benchmarks for operator assembly, eigensolves and the S³ bounds.
//! Run with `cargo bench -p foliation-bench`.
