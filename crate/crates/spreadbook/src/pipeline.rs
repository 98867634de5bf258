//! End-to-end helpers: order events in, per-symbol-day analytics out.

use crate::book::{self, BookDelta, BookError, OrderBook};
use crate::classify::{self, ClassifyError, SpreadChangeEvent, SpreadChangeKind};
use crate::feed::OrderEvent;
use crate::response::MidpointTrajectory;
use crate::types::{Session, Symbol};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Book(#[from] BookError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
}

/// Replay one symbol's events through a fresh book.
pub fn replay(symbol: Symbol, events: &[OrderEvent]) -> Result<(OrderBook, Vec<BookDelta>), BookError> {
    let mut book = OrderBook::new(symbol);
    let mut deltas = Vec::with_capacity(events.len());
    for ev in events {
        deltas.extend(book.apply_event(ev)?);
    }
    Ok((book, deltas))
}

/// Everything derived from one symbol's stream over one trading day.
#[derive(Debug)]
pub struct SymbolDay {
    pub symbol: Symbol,
    pub session: Session,
    pub deltas: Vec<BookDelta>,
    /// Spread-changing events inside the session.
    pub quote_events: Vec<SpreadChangeEvent>,
    /// Every trade, full deletion, and placement inside the session.
    pub all_events: Vec<SpreadChangeEvent>,
    pub trajectory: MidpointTrajectory,
    /// `None` when the book never had a defined spread inside the session.
    pub twa_spread: Option<f64>,
    pub book: OrderBook,
}

/// Replay, classify, and summarize one symbol-day. With `merge_trades` the
/// per-fill legs of each aggressing order collapse into one trade.
pub fn symbol_day(
    symbol: Symbol,
    events: &[OrderEvent],
    session: Session,
    merge_trades: bool,
) -> Result<SymbolDay, PipelineError> {
    let (book, deltas) = replay(symbol, events)?;
    let mut quote_events = classify::classify_deltas(&deltas, Some(session))?;
    let mut all_events: Vec<SpreadChangeEvent> = deltas
        .iter()
        .filter(|d| session.contains(d.timestamp))
        .filter_map(classify::classify_all)
        .collect();
    if merge_trades {
        quote_events = classify::aggregate_trades(&quote_events);
        all_events = classify::aggregate_trades(&all_events);
    }
    let trajectory = MidpointTrajectory::from_deltas(symbol, &deltas);
    let twa_spread = match book::time_weighted_average_spread(&deltas, session) {
        Ok(v) => Some(v),
        Err(BookError::NoDefinedSpread) => None,
        Err(e) => return Err(e.into()),
    };
    Ok(SymbolDay {
        symbol,
        session,
        deltas,
        quote_events,
        all_events,
        trajectory,
        twa_spread,
        book,
    })
}

pub fn by_kind(events: &[SpreadChangeEvent], kind: SpreadChangeKind) -> Vec<SpreadChangeEvent> {
    events.iter().copied().filter(|e| e.kind == kind).collect()
}
