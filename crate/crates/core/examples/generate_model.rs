//! Generate a random process and print it as XML.
//!
//! `cargo run -p pm3d-core --example generate_model -- 16 4 3 42`
//! (nodes, control-flow blocks, attributes, seed)

use pm3d_core::generator::{generate, GenSpec};
use pm3d_core::parser::serialize;

fn main() {
    let mut args = std::env::args()
        .skip(1)
        .map(|a| a.parse::<u64>().expect("numeric argument"));
    let mut next = |default| args.next().unwrap_or(default);
    let spec = GenSpec::new(
        next(16) as usize,
        next(4) as usize,
        next(3) as usize,
        next(42),
    );
    let model = generate(&spec).unwrap();
    print!("{}", serialize(&model).unwrap());
}
