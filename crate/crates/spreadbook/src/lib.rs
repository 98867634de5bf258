//! Limit-order-book reconstruction and price-response analytics for
//! ITCH-style order-flow feeds.
//!
//! The crate is organised as a pipeline: [`feed`] decodes binary or CSV
//! input into canonical order events, [`book`] replays them into per-symbol
//! books and quote deltas, [`classify`] turns quote changes into signed
//! trade/deletion/placement events, and [`response`] aggregates those into
//! self-, cross-, and market-response statistics. [`synth`] generates
//! reproducible synthetic markets with ground-truth labels for testing, and
//! [`pipeline`] wires the stages together.

pub mod book;
pub mod classify;
pub mod feed;
pub mod pipeline;
pub mod response;
pub mod synth;
pub mod types;

pub use book::{BookDelta, BookError, OrderBook};
pub use classify::{RelativeAmounts, SpreadChangeEvent, SpreadChangeKind};
pub use feed::{EventBody, FeedError, OrderEvent};
pub use response::{CrossResponseMatrix, MidpointTrajectory, ResponseCurve};
pub use synth::{GeneratorConfig, GroundTruth};
pub use types::{Midpoint, Nanos, PriceTicks, Session, Side, Symbol};
