//! Keeps the guide honest: each chapter of `book/` is included as module
//! documentation here, so `cargo test --doc` compiles and runs every one
//! of its code blocks against the current library. A chapter edit that
//! breaks an example breaks the build. One module per chapter, so a
//! failing doctest names the chapter it came from.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/graphs.md")]
pub mod graphs {}

#[doc = include_str!("../../../book/src/rank_correlation.md")]
pub mod rank_correlation {}

#[doc = include_str!("../../../book/src/clime.md")]
pub mod clime {}

#[doc = include_str!("../../../book/src/median_graph.md")]
pub mod median_graph {}

#[doc = include_str!("../../../book/src/synthetic.md")]
pub mod synthetic {}

#[doc = include_str!("../../../book/src/tuning.md")]
pub mod tuning {}

#[doc = include_str!("../../../book/src/evaluation.md")]
pub mod evaluation {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
