//! Per-symbol limit order book reconstruction: best quotes, midpoint,
//! spread, and per-event deltas.

use std::collections::{BTreeMap, HashMap};

use arrayvec::ArrayVec;

use crate::feed::{EventBody, OrderEvent};
use crate::types::{Midpoint, Nanos, PriceTicks, Session, Side, Symbol, TICK};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BookError {
    #[error("unknown order id {0}")]
    UnknownOrderId(u64),
    #[error("order id {0} already resting")]
    DuplicateOrderId(u64),
    #[error("overfill on order {order_id}: {requested} shares against {resting} resting")]
    Overfill {
        order_id: u64,
        requested: u32,
        resting: u32,
    },
    #[error("add at {price} would cross the opposite best {opposite_best} ({side})")]
    CrossedBookProduced {
        side: Side,
        price: PriceTicks,
        opposite_best: PriceTicks,
    },
    #[error("no defined spread inside the session window")]
    NoDefinedSpread,
}

/// How an applied event touched the book. Replace events are resolved into a
/// delete leg followed by an add leg.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DeltaAction {
    Add,
    Execute,
    Cancel,
    Delete,
}

/// Before/after view of the quotes around one applied event (one leg of a
/// replace). `event_price` is the price of the affected limit order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BookDelta {
    pub timestamp: Nanos,
    pub symbol: Symbol,
    pub action: DeltaAction,
    pub side: Side,
    pub event_price: PriceTicks,
    /// Shares added, executed, cancelled, or deleted by this leg.
    pub shares: u32,
    /// The affected order left the book entirely.
    pub order_removed: bool,
    pub bid_before: Option<PriceTicks>,
    pub ask_before: Option<PriceTicks>,
    pub bid_after: Option<PriceTicks>,
    pub ask_after: Option<PriceTicks>,
}

impl BookDelta {
    pub fn spread_changed(&self) -> bool {
        (self.bid_before, self.ask_before) != (self.bid_after, self.ask_after)
    }

    pub fn midpoint_before(&self) -> Option<Midpoint> {
        Some(Midpoint::from_quotes(self.bid_before?, self.ask_before?))
    }

    pub fn midpoint_after(&self) -> Option<Midpoint> {
        Some(Midpoint::from_quotes(self.bid_after?, self.ask_after?))
    }

    pub fn spread_before(&self) -> Option<PriceTicks> {
        Some(self.ask_before? - self.bid_before?)
    }

    pub fn spread_after(&self) -> Option<PriceTicks> {
        Some(self.ask_after? - self.bid_after?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct RestingOrder {
    side: Side,
    price: PriceTicks,
    shares: u32,
}

/// Aggregate of one price level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Level {
    pub shares: u64,
    pub orders: u32,
}

/// Canonical book state, used for oracle comparisons in tests.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BookSnapshot {
    pub bids: Vec<(PriceTicks, u64, u32)>,
    pub asks: Vec<(PriceTicks, u64, u32)>,
    pub orders: Vec<(u64, Side, PriceTicks, u32)>,
}

#[derive(Debug, Clone)]
pub struct OrderBook {
    symbol: Symbol,
    orders: HashMap<u64, RestingOrder>,
    bids: BTreeMap<PriceTicks, Level>,
    asks: BTreeMap<PriceTicks, Level>,
    last_timestamp: Nanos,
}

impl OrderBook {
    pub fn new(symbol: Symbol) -> OrderBook {
        OrderBook {
            symbol,
            orders: HashMap::new(),
            bids: BTreeMap::new(),
            asks: BTreeMap::new(),
            last_timestamp: 0,
        }
    }

    pub fn symbol(&self) -> Symbol {
        self.symbol
    }

    pub fn last_timestamp(&self) -> Nanos {
        self.last_timestamp
    }

    pub fn best_bid(&self) -> Option<PriceTicks> {
        self.bids.keys().next_back().copied()
    }

    pub fn best_ask(&self) -> Option<PriceTicks> {
        self.asks.keys().next().copied()
    }

    pub fn best_quotes(&self) -> (Option<PriceTicks>, Option<PriceTicks>) {
        (self.best_bid(), self.best_ask())
    }

    /// Exact half-tick midpoint; absent when either side is empty.
    pub fn midpoint(&self) -> Option<Midpoint> {
        Some(Midpoint::from_quotes(self.best_bid()?, self.best_ask()?))
    }

    /// Best ask minus best bid in ticks; absent when either side is empty.
    pub fn spread(&self) -> Option<PriceTicks> {
        Some(self.best_ask()? - self.best_bid()?)
    }

    pub fn order_count(&self) -> usize {
        self.orders.len()
    }

    pub fn levels(&self, side: Side) -> &BTreeMap<PriceTicks, Level> {
        match side {
            Side::Bid => &self.bids,
            Side::Ask => &self.asks,
        }
    }

    pub fn snapshot(&self) -> BookSnapshot {
        let mut orders: Vec<_> = self
            .orders
            .iter()
            .map(|(&id, o)| (id, o.side, o.price, o.shares))
            .collect();
        orders.sort_unstable();
        BookSnapshot {
            bids: self.bids.iter().map(|(&p, l)| (p, l.shares, l.orders)).collect(),
            asks: self.asks.iter().map(|(&p, l)| (p, l.shares, l.orders)).collect(),
            orders,
        }
    }

    fn levels_mut(&mut self, side: Side) -> &mut BTreeMap<PriceTicks, Level> {
        match side {
            Side::Bid => &mut self.bids,
            Side::Ask => &mut self.asks,
        }
    }

    fn insert_order(
        &mut self,
        order_id: u64,
        side: Side,
        price: PriceTicks,
        shares: u32,
    ) -> Result<(), BookError> {
        if self.orders.contains_key(&order_id) {
            return Err(BookError::DuplicateOrderId(order_id));
        }
        // The feed reports executions explicitly; a crossing add is corrupt
        // input, not a marketable order.
        let opposite_best = match side {
            Side::Bid => self.best_ask().filter(|&a| price >= a),
            Side::Ask => self.best_bid().filter(|&b| price <= b),
        };
        if let Some(opposite_best) = opposite_best {
            return Err(BookError::CrossedBookProduced {
                side,
                price,
                opposite_best,
            });
        }
        self.orders.insert(order_id, RestingOrder { side, price, shares });
        let level = self.levels_mut(side).entry(price).or_default();
        level.shares += shares as u64;
        level.orders += 1;
        Ok(())
    }

    /// Remove `shares` from a resting order; removes it entirely when the
    /// remainder hits zero. Returns (side, price, removed).
    fn reduce_order(
        &mut self,
        order_id: u64,
        shares: u32,
    ) -> Result<(Side, PriceTicks, bool), BookError> {
        let order = self
            .orders
            .get_mut(&order_id)
            .ok_or(BookError::UnknownOrderId(order_id))?;
        if shares > order.shares {
            return Err(BookError::Overfill {
                order_id,
                requested: shares,
                resting: order.shares,
            });
        }
        let (side, price) = (order.side, order.price);
        order.shares -= shares;
        let removed = order.shares == 0;
        if removed {
            self.orders.remove(&order_id);
        }
        let levels = self.levels_mut(side);
        let level = levels.get_mut(&price).expect("level for resting order");
        level.shares -= shares as u64;
        if removed {
            level.orders -= 1;
            if level.orders == 0 {
                levels.remove(&price);
            }
        }
        Ok((side, price, removed))
    }

    fn remove_order(&mut self, order_id: u64) -> Result<(Side, PriceTicks, u32), BookError> {
        let shares = self
            .orders
            .get(&order_id)
            .ok_or(BookError::UnknownOrderId(order_id))?
            .shares;
        let (side, price, removed) = self.reduce_order(order_id, shares)?;
        debug_assert!(removed);
        Ok((side, price, shares))
    }

    /// Apply one feed event. Emits one delta, or two for a replace
    /// (delete leg then add leg, sharing the event timestamp). On error the
    /// book is left unchanged.
    pub fn apply_event(&mut self, ev: &OrderEvent) -> Result<ArrayVec<BookDelta, 2>, BookError> {
        debug_assert_eq!(ev.symbol, self.symbol);
        debug_assert!(ev.timestamp >= self.last_timestamp);
        let (bid_before, ask_before) = self.best_quotes();
        let mut deltas = ArrayVec::new();
        let delta = |book: &OrderBook,
                         action: DeltaAction,
                         side: Side,
                         event_price: PriceTicks,
                         shares: u32,
                         order_removed: bool,
                         before: (Option<PriceTicks>, Option<PriceTicks>)| {
            let (bid_after, ask_after) = book.best_quotes();
            BookDelta {
                timestamp: ev.timestamp,
                symbol: ev.symbol,
                action,
                side,
                event_price,
                shares,
                order_removed,
                bid_before: before.0,
                ask_before: before.1,
                bid_after,
                ask_after,
            }
        };
        match ev.body {
            EventBody::Add { side, price, shares } => {
                self.insert_order(ev.order_id, side, price, shares)?;
                deltas.push(delta(self, DeltaAction::Add, side, price, shares, false, (bid_before, ask_before)));
            }
            EventBody::Execute { shares } => {
                let (side, price, removed) = self.reduce_order(ev.order_id, shares)?;
                deltas.push(delta(self, DeltaAction::Execute, side, price, shares, removed, (bid_before, ask_before)));
            }
            EventBody::Cancel { shares } => {
                let (side, price, removed) = self.reduce_order(ev.order_id, shares)?;
                deltas.push(delta(self, DeltaAction::Cancel, side, price, shares, removed, (bid_before, ask_before)));
            }
            EventBody::Delete => {
                let (side, price, shares) = self.remove_order(ev.order_id)?;
                deltas.push(delta(self, DeltaAction::Delete, side, price, shares, true, (bid_before, ask_before)));
            }
            EventBody::Replace {
                new_order_id,
                new_price,
                new_shares,
            } => {
                // Pre-check the add leg so a failure leaves the book intact.
                let side = self
                    .orders
                    .get(&ev.order_id)
                    .ok_or(BookError::UnknownOrderId(ev.order_id))?
                    .side;
                if new_order_id != ev.order_id && self.orders.contains_key(&new_order_id) {
                    return Err(BookError::DuplicateOrderId(new_order_id));
                }
                let crossing = match side {
                    Side::Bid => self.best_ask().filter(|&a| new_price >= a),
                    Side::Ask => self.best_bid().filter(|&b| new_price <= b),
                };
                if let Some(opposite_best) = crossing {
                    return Err(BookError::CrossedBookProduced {
                        side,
                        price: new_price,
                        opposite_best,
                    });
                }
                let (_, old_price, old_shares) = self.remove_order(ev.order_id)?;
                deltas.push(delta(self, DeltaAction::Delete, side, old_price, old_shares, true, (bid_before, ask_before)));
                let mid = self.best_quotes();
                self.insert_order(new_order_id, side, new_price, new_shares)
                    .expect("replace add leg pre-checked");
                deltas.push(delta(self, DeltaAction::Add, side, new_price, new_shares, false, mid));
            }
        }
        self.last_timestamp = ev.timestamp;
        Ok(deltas)
    }

    /// Structural invariants; used by debug replays and tests.
    pub fn check_invariants(&self) {
        if let (Some(b), Some(a)) = self.best_quotes() {
            assert!(b < a, "crossed book: bid {b} >= ask {a}");
        }
        let mut expect: BTreeMap<(Side, PriceTicks), Level> = BTreeMap::new();
        for o in self.orders.values() {
            let e = expect.entry((o.side, o.price)).or_default();
            e.shares += o.shares as u64;
            e.orders += 1;
        }
        let mut actual: BTreeMap<(Side, PriceTicks), Level> = BTreeMap::new();
        for (&p, &l) in &self.bids {
            actual.insert((Side::Bid, p), l);
        }
        for (&p, &l) in &self.asks {
            actual.insert((Side::Ask, p), l);
        }
        assert_eq!(expect, actual, "level aggregates out of sync with orders");
        assert!(actual.values().all(|l| l.orders >= 1 && l.shares > 0));
    }
}

/// Time-weighted average spread over the session window, in currency units.
///
/// Maximal intervals of constant spread are intersected with the session;
/// intervals with an undefined spread contribute to neither sum.
pub fn time_weighted_average_spread(
    deltas: &[BookDelta],
    session: Session,
) -> Result<f64, BookError> {
    let mut weighted: i128 = 0; // sum of spread_ticks * duration_ns
    let mut duration: i128 = 0;
    let mut current: Option<PriceTicks> = None;
    let mut since: Nanos = 0;
    let mut account = |spread: Option<PriceTicks>, from: Nanos, to: Nanos| {
        if let Some(s) = spread {
            let lo = from.max(session.open);
            let hi = to.min(session.close);
            if lo < hi {
                let d = (hi - lo) as i128;
                weighted += s as i128 * d;
                duration += d;
            }
        }
    };
    for d in deltas {
        account(current, since, d.timestamp);
        current = d.spread_after();
        since = d.timestamp;
    }
    account(current, since, session.close);
    if duration == 0 {
        return Err(BookError::NoDefinedSpread);
    }
    Ok(weighted as f64 / duration as f64 * TICK)
}
