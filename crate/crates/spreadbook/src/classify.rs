//! Classification of book deltas into spread-changing trades, deletions,
//! and placements, plus their relative-amount statistics.

use crate::book::{BookDelta, DeltaAction};
use crate::types::{Midpoint, Nanos, PriceTicks, Symbol};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClassifyError {
    #[error("spread changed by an unclassifiable delta at t={timestamp}: {detail}")]
    UnclassifiableDelta { timestamp: Nanos, detail: String },
    #[error("empty event list")]
    EmptyEventList,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SpreadChangeKind {
    Trade,
    Deletion,
    Placement,
}

impl SpreadChangeKind {
    pub fn label(self) -> &'static str {
        match self {
            SpreadChangeKind::Trade => "trade",
            SpreadChangeKind::Deletion => "deletion",
            SpreadChangeKind::Placement => "placement",
        }
    }
}

/// A classified event with its sign of price change.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpreadChangeEvent {
    pub timestamp: Nanos,
    pub symbol: Symbol,
    pub kind: SpreadChangeKind,
    /// +1 for events on the ask side of the pre-event midpoint, -1 bid side.
    pub sign: i8,
    pub midpoint_before: Midpoint,
    /// Absent when the event emptied one side of the book.
    pub midpoint_after: Option<Midpoint>,
    pub event_price: PriceTicks,
}

fn kind_of(delta: &BookDelta) -> SpreadChangeKind {
    match delta.action {
        DeltaAction::Execute => SpreadChangeKind::Trade,
        DeltaAction::Cancel | DeltaAction::Delete => SpreadChangeKind::Deletion,
        DeltaAction::Add => SpreadChangeKind::Placement,
    }
}

fn make_event(delta: &BookDelta, kind: SpreadChangeKind, midpoint_before: Midpoint) -> SpreadChangeEvent {
    let sign = delta.side.sign();
    // For removals the event price is the old best of its side, which always
    // lies on that side of the pre-event midpoint. Placements inside a wide
    // spread may land on the other half (or exactly on the midpoint); the
    // side still decides the sign.
    debug_assert!(
        kind == SpreadChangeKind::Placement
            || (sign > 0) == (2 * delta.event_price > midpoint_before.doubled_ticks())
    );
    SpreadChangeEvent {
        timestamp: delta.timestamp,
        symbol: delta.symbol,
        kind,
        sign,
        midpoint_before,
        midpoint_after: delta.midpoint_after(),
        event_price: delta.event_price,
    }
}

/// Classify a delta into a spread-changing event. Returns `None` when the
/// quotes did not change or the pre-event midpoint is undefined.
pub fn classify(delta: &BookDelta) -> Result<Option<SpreadChangeEvent>, ClassifyError> {
    if !delta.spread_changed() {
        return Ok(None);
    }
    let Some(midpoint_before) = delta.midpoint_before() else {
        return Ok(None);
    };
    let unclassifiable = |detail: String| ClassifyError::UnclassifiableDelta {
        timestamp: delta.timestamp,
        detail,
    };
    let kind = kind_of(delta);
    match kind {
        SpreadChangeKind::Trade | SpreadChangeKind::Deletion => {
            // A quote-changing removal must have emptied the best level of
            // its side; anything else is a book-engine bug.
            let best_before = match delta.side {
                crate::types::Side::Bid => delta.bid_before,
                crate::types::Side::Ask => delta.ask_before,
            };
            if !delta.order_removed || best_before != Some(delta.event_price) {
                return Err(unclassifiable(format!(
                    "{:?} changed quotes away from the best level",
                    delta.action
                )));
            }
        }
        SpreadChangeKind::Placement => {
            let inside = delta.bid_before.unwrap() < delta.event_price
                && delta.event_price < delta.ask_before.unwrap();
            if !inside {
                return Err(unclassifiable(
                    "add changed quotes from outside the previous spread".to_owned(),
                ));
            }
        }
    }
    Ok(Some(make_event(delta, kind, midpoint_before)))
}

/// Classify every event of the three types regardless of whether it changed
/// a quote. Trades are executes, deletions are orders exiting the book in
/// full, placements are adds anywhere. Requires a defined pre-event midpoint.
pub fn classify_all(delta: &BookDelta) -> Option<SpreadChangeEvent> {
    let midpoint_before = delta.midpoint_before()?;
    let kind = match delta.action {
        DeltaAction::Execute => SpreadChangeKind::Trade,
        DeltaAction::Cancel | DeltaAction::Delete if delta.order_removed => SpreadChangeKind::Deletion,
        DeltaAction::Cancel | DeltaAction::Delete => return None,
        DeltaAction::Add => SpreadChangeKind::Placement,
    };
    Some(make_event(delta, kind, midpoint_before))
}

/// Classify an ordered delta sequence, keeping only events inside the
/// session window when one is given.
pub fn classify_deltas(
    deltas: &[BookDelta],
    session: Option<crate::types::Session>,
) -> Result<Vec<SpreadChangeEvent>, ClassifyError> {
    let mut out = Vec::new();
    for d in deltas {
        if let Some(s) = session {
            if !s.contains(d.timestamp) {
                continue;
            }
        }
        if let Some(ev) = classify(d)? {
            out.push(ev);
        }
    }
    Ok(out)
}

/// Merge the per-fill legs of a single aggressing order: consecutive trades
/// with identical timestamp and sign, with no other kind in between, become
/// one trade spanning first-leg midpoint_before to last-leg midpoint_after.
pub fn aggregate_trades(events: &[SpreadChangeEvent]) -> Vec<SpreadChangeEvent> {
    let mut out: Vec<SpreadChangeEvent> = Vec::with_capacity(events.len());
    for &ev in events {
        if let Some(last) = out.last_mut() {
            if ev.kind == SpreadChangeKind::Trade
                && last.kind == SpreadChangeKind::Trade
                && last.timestamp == ev.timestamp
                && last.sign == ev.sign
            {
                last.midpoint_after = ev.midpoint_after;
                // first leg's event_price and midpoint_before are kept
                continue;
            }
        }
        out.push(ev);
    }
    out
}

/// Relative amounts of spread changes by cause, as exact counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RelativeAmounts {
    pub placements: u64,
    pub deletions: u64,
    pub trades: u64,
}

impl RelativeAmounts {
    pub fn total(&self) -> u64 {
        self.placements + self.deletions + self.trades
    }

    pub fn o(&self) -> f64 {
        self.placements as f64 / self.total() as f64
    }

    pub fn d(&self) -> f64 {
        self.deletions as f64 / self.total() as f64
    }

    pub fn t(&self) -> f64 {
        self.trades as f64 / self.total() as f64
    }

    /// (T + D) - 0.5: zero on the line of balance, negative when placements
    /// outnumber orders exiting at the spread level.
    pub fn balance_deviation(&self) -> f64 {
        (self.deletions + self.trades) as f64 / self.total() as f64 - 0.5
    }
}

pub fn relative_amounts(events: &[SpreadChangeEvent]) -> Result<RelativeAmounts, ClassifyError> {
    if events.is_empty() {
        return Err(ClassifyError::EmptyEventList);
    }
    let mut amounts = RelativeAmounts::default();
    for ev in events {
        match ev.kind {
            SpreadChangeKind::Placement => amounts.placements += 1,
            SpreadChangeKind::Deletion => amounts.deletions += 1,
            SpreadChangeKind::Trade => amounts.trades += 1,
        }
    }
    Ok(amounts)
}
