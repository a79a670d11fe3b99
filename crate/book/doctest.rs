//! The guide's chapters, compiled as modules so `cargo test --doc` runs
//! every Rust code block in them. Build the rendered book with `mdbook build book`.

#[doc = include_str!("src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("src/quickstart.md")]
pub mod quickstart {}
#[doc = include_str!("src/precision.md")]
pub mod precision {}
#[doc = include_str!("src/basis.md")]
pub mod basis {}
#[doc = include_str!("src/perturbation.md")]
pub mod perturbation {}
#[doc = include_str!("src/exchange.md")]
pub mod exchange {}
#[doc = include_str!("src/extrapolation.md")]
pub mod extrapolation {}
#[doc = include_str!("src/fitting.md")]
pub mod fitting {}
#[doc = include_str!("src/cli.md")]
pub mod cli {}
#[doc = include_str!("src/reproduction.md")]
pub mod reproduction {}
