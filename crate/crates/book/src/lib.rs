//! Guide chapters compiled as doc-tests.

#[doc = include_str!("../../../book/src/intro.md")]
pub mod intro {}
#[doc = include_str!("../../../book/src/ingest.md")]
pub mod ingest {}
#[doc = include_str!("../../../book/src/network.md")]
pub mod network {}
#[doc = include_str!("../../../book/src/coding.md")]
pub mod coding {}
#[doc = include_str!("../../../book/src/spells.md")]
pub mod spells {}
#[doc = include_str!("../../../book/src/paths.md")]
pub mod paths {}
#[doc = include_str!("../../../book/src/animation.md")]
pub mod animation {}
#[doc = include_str!("../../../book/src/pipeline.md")]
pub mod pipeline {}
