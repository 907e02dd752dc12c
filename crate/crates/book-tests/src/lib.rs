//! The guide's chapters, compiled so `cargo test --doc` runs every listing.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/synthesis.md")]
pub mod synthesis {}
#[doc = include_str!("../../../book/src/lqr.md")]
pub mod lqr {}
#[doc = include_str!("../../../book/src/heavy-ball.md")]
pub mod heavy_ball {}
#[doc = include_str!("../../../book/src/simulation.md")]
pub mod simulation {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
#[doc = include_str!("../../../book/src/limitations.md")]
pub mod limitations {}
