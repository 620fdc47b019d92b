//! Guide listings, compiled as doctests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/operators.md")]
pub mod operators {}
#[doc = include_str!("../../../book/src/composite.md")]
pub mod composite {}
#[doc = include_str!("../../../book/src/measurement.md")]
pub mod measurement {}
#[doc = include_str!("../../../book/src/power_graphs.md")]
pub mod power_graphs {}
#[doc = include_str!("../../../book/src/valuations.md")]
pub mod valuations {}
#[doc = include_str!("../../../book/src/scenarios.md")]
pub mod scenarios {}
