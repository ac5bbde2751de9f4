//! The mdbook chapters under `book/src`, compiled as rustdoc so that
//! `cargo test` runs every snippet in the book. One module per chapter keeps
//! failures traceable to their chapter.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/graphs.md")]
pub mod graphs {}
#[doc = include_str!("../../../book/src/distance.md")]
pub mod distance {}
#[doc = include_str!("../../../book/src/tabucol.md")]
pub mod tabucol {}
#[doc = include_str!("../../../book/src/gpx.md")]
pub mod gpx {}
#[doc = include_str!("../../../book/src/engine.md")]
pub mod engine {}
#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
