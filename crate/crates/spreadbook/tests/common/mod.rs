//! Deliberately naive reference implementations used as test oracles. Flat
//! vectors and double loops only — nothing here shares structure with the
//! incremental engine under test.

#![allow(dead_code)]

use spreadbook::book::BookSnapshot;
use spreadbook::classify::SpreadChangeEvent;
use spreadbook::feed::{EventBody, OrderEvent};
use spreadbook::types::{Midpoint, Nanos, PriceTicks, Session, Side, NANOS_PER_SEC};

/// Order book as a flat order list; every query is a full scan.
#[derive(Default, Clone)]
pub struct NaiveBook {
    pub orders: Vec<(u64, Side, PriceTicks, u32)>,
}

impl NaiveBook {
    pub fn apply(&mut self, ev: &OrderEvent) {
        match ev.body {
            EventBody::Add { side, price, shares } => {
                self.orders.push((ev.order_id, side, price, shares));
            }
            EventBody::Execute { shares } | EventBody::Cancel { shares } => {
                let idx = self.index_of(ev.order_id);
                self.orders[idx].3 -= shares;
                if self.orders[idx].3 == 0 {
                    self.orders.remove(idx);
                }
            }
            EventBody::Delete => {
                let idx = self.index_of(ev.order_id);
                self.orders.remove(idx);
            }
            EventBody::Replace {
                new_order_id,
                new_price,
                new_shares,
            } => {
                let idx = self.index_of(ev.order_id);
                let side = self.orders[idx].1;
                self.orders.remove(idx);
                self.orders.push((new_order_id, side, new_price, new_shares));
            }
        }
    }

    fn index_of(&self, order_id: u64) -> usize {
        self.orders.iter().position(|o| o.0 == order_id).unwrap()
    }

    pub fn best_bid(&self) -> Option<PriceTicks> {
        self.orders
            .iter()
            .filter(|o| o.1 == Side::Bid)
            .map(|o| o.2)
            .max()
    }

    pub fn best_ask(&self) -> Option<PriceTicks> {
        self.orders
            .iter()
            .filter(|o| o.1 == Side::Ask)
            .map(|o| o.2)
            .min()
    }

    pub fn snapshot(&self) -> BookSnapshot {
        let mut orders = self.orders.clone();
        orders.sort_unstable();
        let levels = |side: Side, ascending: bool| {
            let mut prices: Vec<PriceTicks> = orders
                .iter()
                .filter(|o| o.1 == side)
                .map(|o| o.2)
                .collect();
            prices.sort_unstable();
            prices.dedup();
            if !ascending {
                prices.reverse();
            }
            prices
                .iter()
                .map(|&p| {
                    let level: Vec<_> = orders.iter().filter(|o| o.1 == side && o.2 == p).collect();
                    (
                        p,
                        level.iter().map(|o| o.3 as u64).sum::<u64>(),
                        level.len() as u32,
                    )
                })
                .collect::<Vec<_>>()
        };
        BookSnapshot {
            bids: levels(Side::Bid, true),
            asks: levels(Side::Ask, true),
            orders,
        }
    }
}

/// Midpoint at time `t`: value of the last breakpoint at or before `t`.
pub fn mid_at(points: &[(Nanos, Midpoint)], t: Nanos) -> Option<Midpoint> {
    points
        .iter()
        .filter(|(bt, _)| *bt <= t)
        .next_back()
        .map(|&(_, m)| m)
}

/// Midpoint strictly before `t`.
pub fn mid_before(points: &[(Nanos, Midpoint)], t: Nanos) -> Option<Midpoint> {
    points
        .iter()
        .filter(|(bt, _)| *bt < t)
        .next_back()
        .map(|&(_, m)| m)
}

fn log_mid(m: Midpoint) -> f64 {
    (m.doubled_ticks() as f64).ln()
}

pub struct OracleDay {
    pub events: Vec<SpreadChangeEvent>,
    pub points: Vec<(Nanos, Midpoint)>,
    pub session: Session,
}

/// Brute-force self-response on the physical scale: plain sums, linear
/// trajectory scans.
pub fn oracle_self_physical(days: &[OracleDay], grid_secs: &[u64]) -> Vec<Option<f64>> {
    grid_secs
        .iter()
        .map(|&tau| {
            let mut sum = 0.0;
            let mut n = 0u64;
            for day in days {
                for ev in &day.events {
                    let target = ev.timestamp + tau * NANOS_PER_SEC;
                    if target > day.session.close {
                        continue;
                    }
                    let Some(after) = mid_at(&day.points, target) else {
                        continue;
                    };
                    sum += ev.sign as f64 * (log_mid(after) - log_mid(ev.midpoint_before));
                    n += 1;
                }
            }
            (n > 0).then(|| sum / n as f64)
        })
        .collect()
}

/// Brute-force cross-response: events of one stock against the trajectory of
/// another; baseline is the last breakpoint strictly before the event.
pub fn oracle_cross(days: &[OracleDay], grid_secs: &[u64]) -> Vec<Option<f64>> {
    grid_secs
        .iter()
        .map(|&tau| {
            let mut sum = 0.0;
            let mut n = 0u64;
            for day in days {
                for ev in &day.events {
                    let target = ev.timestamp + tau * NANOS_PER_SEC;
                    if target > day.session.close {
                        continue;
                    }
                    let Some(before) = mid_before(&day.points, ev.timestamp) else {
                        continue;
                    };
                    let Some(after) = mid_at(&day.points, target) else {
                        continue;
                    };
                    sum += ev.sign as f64 * (log_mid(after) - log_mid(before));
                    n += 1;
                }
            }
            (n > 0).then(|| sum / n as f64)
        })
        .collect()
}

/// Brute-force event-scale self-response.
pub fn oracle_event_scale(days: &[&[SpreadChangeEvent]], grid_events: &[u64]) -> Vec<Option<f64>> {
    grid_events
        .iter()
        .map(|&lag| {
            let lag = lag as usize;
            let mut sum = 0.0;
            let mut n = 0u64;
            for &events in days {
                for k in 0..events.len().saturating_sub(lag) {
                    sum += events[k].sign as f64
                        * (log_mid(events[k + lag].midpoint_before)
                            - log_mid(events[k].midpoint_before));
                    n += 1;
                }
            }
            (n > 0).then(|| sum / n as f64)
        })
        .collect()
}

/// Time-weighted average spread sampled on a one-second grid. Exact for
/// streams whose timestamps are snapped to whole seconds.
pub fn oracle_twa_spread_grid(
    spread_points: &[(Nanos, Option<PriceTicks>)],
    session: Session,
) -> Option<f64> {
    let mut sum: i64 = 0;
    let mut n: i64 = 0;
    let mut t = session.open;
    while t < session.close {
        let spread = spread_points
            .iter()
            .filter(|(bt, _)| *bt <= t)
            .next_back()
            .and_then(|&(_, s)| s);
        if let Some(s) = spread {
            sum += s;
            n += 1;
        }
        t += NANOS_PER_SEC;
    }
    (n > 0).then(|| sum as f64 / n as f64 * 0.01)
}
