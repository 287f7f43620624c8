//! Time the pipeline on a short ladder of generated models.
//!
//! `cargo run --release -p pm3d-core --example run_bench`

use pm3d_core::bench::run_benchmark;

fn main() {
    let ladder = [(16, 8), (64, 32), (256, 128)];
    let report = run_benchmark(&ladder, 5, 5, 7).unwrap();
    print!("{}", report.to_text());
}
