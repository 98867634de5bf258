//! Reproducible zero-intelligence order-flow generator with ground-truth
//! labels. Streams are book-consistent, fully determined by the seed, and
//! serve as the test oracle in place of proprietary feed data.

use std::collections::{BTreeMap, HashMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::book::BookSnapshot;
use crate::classify::SpreadChangeKind;
use crate::feed::{wire, EventBody, OrderEvent};
use crate::types::{Nanos, PriceTicks, Session, Side, Symbol, NANOS_PER_SEC};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthError {
    #[error("infeasible generator config: {0}")]
    InfeasibleConfig(String),
    #[error("unencodable event: {0}")]
    UnencodableEvent(String),
}

/// Poisson intensities in events per second.
#[derive(Debug, Clone, Copy, Deserialize)]
pub struct Rates {
    pub placement: f64,
    pub cancellation: f64,
    pub market_order: f64,
}

/// Planted common-direction bias for market orders, producing a positive
/// cross-symbol trade response.
#[derive(Debug, Clone, Copy, Deserialize)]
pub struct ImpactConfig {
    /// Probability mass moved toward the shared regime direction, in [0, 1].
    pub strength: f64,
    /// Mean duration of one regime in seconds.
    pub mean_regime_secs: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub symbols: Vec<Symbol>,
    pub session: Session,
    pub rates: Rates,
    /// Geometric parameter for placement depth in ticks from the opposite
    /// best; larger p keeps orders closer to the spread.
    pub depth_p: f64,
    pub lot: u32,
    pub min_lots: u32,
    pub max_lots: u32,
    pub base_price_ticks: PriceTicks,
    pub initial_levels: u32,
    pub initial_orders_per_level: u32,
    /// Fraction of cancellations issued as replaces (delete + add).
    pub replace_fraction: f64,
    /// Fraction of cancellations that only reduce shares.
    pub partial_cancel_fraction: f64,
    /// Fraction of cancellations aimed at the oldest order at the best
    /// price of their side rather than a uniformly random order.
    pub best_cancel_fraction: f64,
    /// Probability that a market order sweeps the whole best level.
    pub sweep_prob: f64,
    pub impact: Option<ImpactConfig>,
    /// Book build-up time before the session opens.
    pub warmup_secs: u64,
    /// Ground-truth book snapshot interval, in events.
    pub checkpoint_every: usize,
}

impl Default for GeneratorConfig {
    fn default() -> GeneratorConfig {
        GeneratorConfig {
            seed: 1,
            symbols: vec![Symbol::new("SYN").unwrap()],
            session: Session::default(),
            rates: Rates {
                placement: 6.0,
                cancellation: 5.0,
                market_order: 1.0,
            },
            depth_p: 0.45,
            lot: 100,
            min_lots: 1,
            max_lots: 4,
            base_price_ticks: 10_000,
            initial_levels: 6,
            initial_orders_per_level: 3,
            replace_fraction: 0.10,
            partial_cancel_fraction: 0.10,
            best_cancel_fraction: 0.25,
            sweep_prob: 0.35,
            impact: None,
            warmup_secs: 120,
            checkpoint_every: 2_500,
        }
    }
}

impl GeneratorConfig {
    /// Rates tuned so spread-changing events split close to the target
    /// relative amounts O ~ 0.5, D ~ 0.34, T ~ 0.14.
    pub fn calibrated(seed: u64, symbols: Vec<Symbol>) -> GeneratorConfig {
        GeneratorConfig {
            seed,
            symbols,
            rates: Rates {
                placement: 6.0,
                cancellation: 5.2,
                market_order: 0.22,
            },
            depth_p: 0.45,
            best_cancel_fraction: 0.45,
            sweep_prob: 0.28,
            ..GeneratorConfig::default()
        }
    }

    fn validate(&self) -> Result<(), SynthError> {
        let err = |m: &str| Err(SynthError::InfeasibleConfig(m.to_owned()));
        if self.symbols.is_empty() {
            return err("no symbols");
        }
        let r = &self.rates;
        if !(r.placement >= 0.0 && r.cancellation >= 0.0 && r.market_order >= 0.0) {
            return err("rates must be non-negative");
        }
        if r.placement + r.cancellation + r.market_order <= 0.0 {
            return err("total event rate must be positive");
        }
        if !(self.depth_p > 0.0 && self.depth_p < 1.0) {
            return err("depth_p must be in (0, 1)");
        }
        if self.lot == 0 || self.min_lots == 0 || self.max_lots < self.min_lots {
            return err("invalid share size spec");
        }
        if self.base_price_ticks <= self.initial_levels as i64 + 1 {
            return err("base price too low for the initial ladder");
        }
        if self.initial_levels < 2 || self.initial_orders_per_level == 0 {
            return err("need at least two seeded levels per side");
        }
        for f in [
            self.replace_fraction,
            self.partial_cancel_fraction,
            self.best_cancel_fraction,
            self.sweep_prob,
        ] {
            if !(0.0..=1.0).contains(&f) {
                return err("fractions must be in [0, 1]");
            }
        }
        if self.replace_fraction + self.partial_cancel_fraction > 1.0 {
            return err("replace and partial-cancel fractions exceed 1");
        }
        if let Some(imp) = &self.impact {
            if !(0.0..=1.0).contains(&imp.strength) || imp.mean_regime_secs <= 0.0 {
                return err("invalid impact spec");
            }
        }
        if self.checkpoint_every == 0 {
            return err("checkpoint_every must be positive");
        }
        Ok(())
    }
}

/// A quote-changing event as the generator knows it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TruthLabel {
    pub timestamp: Nanos,
    pub kind: SpreadChangeKind,
    pub sign: i8,
}

#[derive(Debug, Clone, Default)]
pub struct SymbolTruth {
    /// One label per quote-changing event with a defined pre-event midpoint.
    pub labels: Vec<TruthLabel>,
    /// Market orders that changed a quote with at least one fill.
    pub aggressor_count: u64,
    /// (events applied so far, book state) at fixed intervals.
    pub checkpoints: Vec<(usize, BookSnapshot)>,
    pub final_book: BookSnapshot,
}

#[derive(Debug, Default)]
pub struct GroundTruth {
    pub per_symbol: BTreeMap<Symbol, SymbolTruth>,
}

#[derive(Debug)]
pub struct GeneratedMarket {
    pub streams: BTreeMap<Symbol, Vec<OrderEvent>>,
    pub truth: GroundTruth,
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

fn sub_seed(seed: u64, stream: u64) -> u64 {
    splitmix(seed ^ splitmix(stream))
}

fn exp_sample(rng: &mut ChaCha8Rng, rate: f64) -> f64 {
    let u: f64 = rng.random();
    -(1.0 - u).ln() / rate
}

fn geometric(rng: &mut ChaCha8Rng, p: f64) -> u32 {
    let u: f64 = rng.random();
    ((1.0 - u).ln() / (1.0 - p).ln()).floor() as u32
}

/// Shared direction process: a sign that flips at Poisson times.
struct Regime {
    flips: Vec<Nanos>,
}

impl Regime {
    fn build(seed: u64, start: Nanos, end: Nanos, mean_secs: f64) -> Regime {
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, u64::MAX));
        let mut flips = Vec::new();
        let mut t = start as f64;
        loop {
            t += exp_sample(&mut rng, 1.0 / mean_secs) * NANOS_PER_SEC as f64;
            if t >= end as f64 {
                break;
            }
            flips.push(t as Nanos);
        }
        Regime { flips }
    }

    fn sign(&self, t: Nanos) -> f64 {
        let n = self.flips.partition_point(|&f| f <= t);
        if n % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct GenOrder {
    side: Side,
    price: PriceTicks,
    shares: u32,
}

/// The generator's own book: deliberately simpler structures than the
/// reconstruction engine so oracle comparisons stay independent.
#[derive(Default)]
struct GenBook {
    orders: HashMap<u64, GenOrder>,
    bids: BTreeMap<PriceTicks, VecDeque<u64>>,
    asks: BTreeMap<PriceTicks, VecDeque<u64>>,
    live_bids: Vec<u64>,
    live_asks: Vec<u64>,
    positions: HashMap<u64, usize>,
}

impl GenBook {
    fn side_levels(&mut self, side: Side) -> &mut BTreeMap<PriceTicks, VecDeque<u64>> {
        match side {
            Side::Bid => &mut self.bids,
            Side::Ask => &mut self.asks,
        }
    }

    fn live(&mut self, side: Side) -> &mut Vec<u64> {
        match side {
            Side::Bid => &mut self.live_bids,
            Side::Ask => &mut self.live_asks,
        }
    }

    fn live_count(&self, side: Side) -> usize {
        match side {
            Side::Bid => self.live_bids.len(),
            Side::Ask => self.live_asks.len(),
        }
    }

    fn best_bid(&self) -> Option<PriceTicks> {
        self.bids.keys().next_back().copied()
    }

    fn best_ask(&self) -> Option<PriceTicks> {
        self.asks.keys().next().copied()
    }

    fn quotes(&self) -> (Option<PriceTicks>, Option<PriceTicks>) {
        (self.best_bid(), self.best_ask())
    }

    fn add(&mut self, id: u64, side: Side, price: PriceTicks, shares: u32) {
        self.orders.insert(id, GenOrder { side, price, shares });
        self.side_levels(side).entry(price).or_default().push_back(id);
        let live = self.live(side);
        live.push(id);
        let pos = live.len() - 1;
        self.positions.insert(id, pos);
    }

    /// Remove `shares`; returns true when the order left the book.
    fn reduce(&mut self, id: u64, shares: u32) -> bool {
        let order = self.orders.get_mut(&id).expect("generator tracks ids");
        assert!(shares <= order.shares);
        order.shares -= shares;
        if order.shares > 0 {
            return false;
        }
        let GenOrder { side, price, .. } = *self.orders.get(&id).unwrap();
        self.orders.remove(&id);
        let queue = self.side_levels(side).get_mut(&price).unwrap();
        queue.retain(|&q| q != id);
        if queue.is_empty() {
            self.side_levels(side).remove(&price);
        }
        let pos = self.positions.remove(&id).unwrap();
        let moved = {
            let live = self.live(side);
            live.swap_remove(pos);
            live.get(pos).copied()
        };
        if let Some(moved) = moved {
            self.positions.insert(moved, pos);
        }
        true
    }

    fn remove(&mut self, id: u64) -> u32 {
        let shares = self.orders[&id].shares;
        self.reduce(id, shares);
        shares
    }

    fn pick_random(&mut self, side: Side, rng: &mut ChaCha8Rng) -> u64 {
        let live = self.live(side);
        live[rng.random_range(0..live.len())]
    }

    fn front_at_best(&self, side: Side) -> Option<u64> {
        match side {
            Side::Bid => self.bids.values().next_back(),
            Side::Ask => self.asks.values().next(),
        }
        .and_then(|q| q.front().copied())
    }

    /// Fill plan for a market order of `size` shares against `side`,
    /// truncated so the deepest level is never touched.
    fn fill_plan(&self, side: Side, mut size: u32) -> Vec<(u64, u32)> {
        let mut plan = Vec::new();
        let levels: Vec<&VecDeque<u64>> = match side {
            Side::Ask => self.asks.values().collect(),
            Side::Bid => self.bids.values().rev().collect(),
        };
        if levels.len() < 2 {
            return plan;
        }
        for level in &levels[..levels.len() - 1] {
            for &id in level.iter() {
                if size == 0 {
                    return plan;
                }
                let take = size.min(self.orders[&id].shares);
                plan.push((id, take));
                size -= take;
            }
        }
        plan
    }

    fn best_level_total(&self, side: Side) -> u32 {
        let ids: Box<dyn Iterator<Item = &u64>> = match side {
            Side::Ask => match self.asks.values().next() {
                Some(q) => Box::new(q.iter()),
                None => Box::new(std::iter::empty()),
            },
            Side::Bid => match self.bids.values().next_back() {
                Some(q) => Box::new(q.iter()),
                None => Box::new(std::iter::empty()),
            },
        };
        ids.map(|id| self.orders[id].shares).sum()
    }

    fn snapshot(&self) -> BookSnapshot {
        let mut orders: Vec<_> = self
            .orders
            .iter()
            .map(|(&id, o)| (id, o.side, o.price, o.shares))
            .collect();
        orders.sort_unstable();
        let level = |queue: &VecDeque<u64>| {
            let shares: u64 = queue.iter().map(|id| self.orders[id].shares as u64).sum();
            (shares, queue.len() as u32)
        };
        BookSnapshot {
            bids: self
                .bids
                .iter()
                .map(|(&p, q)| {
                    let (s, n) = level(q);
                    (p, s, n)
                })
                .collect(),
            asks: self
                .asks
                .iter()
                .map(|(&p, q)| {
                    let (s, n) = level(q);
                    (p, s, n)
                })
                .collect(),
            orders,
        }
    }
}

struct SymbolGen<'a> {
    cfg: &'a GeneratorConfig,
    rng: ChaCha8Rng,
    book: GenBook,
    events: Vec<OrderEvent>,
    truth: SymbolTruth,
    symbol: Symbol,
    next_id: u64,
    last_ts: Nanos,
}

impl<'a> SymbolGen<'a> {
    fn new(cfg: &'a GeneratorConfig, index: usize) -> SymbolGen<'a> {
        SymbolGen {
            cfg,
            rng: ChaCha8Rng::seed_from_u64(sub_seed(cfg.seed, index as u64)),
            book: GenBook::default(),
            events: Vec::new(),
            truth: SymbolTruth::default(),
            symbol: cfg.symbols[index],
            // symbol index in the high bits keeps ids globally unique
            next_id: (index as u64 + 1) << 40,
            last_ts: 0,
        }
    }

    fn fresh_id(&mut self) -> u64 {
        self.next_id += 1;
        self.next_id
    }

    fn stamp(&mut self, t: Nanos) -> Nanos {
        let ts = t.max(self.last_ts + 1);
        self.last_ts = ts;
        ts
    }

    /// Apply the event to the generator book, record it, and label it when
    /// it changed a quote with a defined pre-event midpoint. Returns the
    /// labels emitted (0, 1, or 2 for a replace).
    fn emit(&mut self, ev: OrderEvent) -> usize {
        let before = self.book.quotes();
        let mut labeled = 0;
        let label = |book: &GenBook,
                         truth: &mut SymbolTruth,
                         before: (Option<PriceTicks>, Option<PriceTicks>),
                         kind: SpreadChangeKind,
                         side: Side| {
            let after = book.quotes();
            if after != before {
                if let (Some(_), Some(_)) = before {
                    truth.labels.push(TruthLabel {
                        timestamp: ev.timestamp,
                        kind,
                        sign: side.sign(),
                    });
                    return 1;
                }
            }
            0
        };
        match ev.body {
            EventBody::Add { side, price, shares } => {
                self.book.add(ev.order_id, side, price, shares);
                labeled += label(&self.book, &mut self.truth, before, SpreadChangeKind::Placement, side);
            }
            EventBody::Execute { shares } => {
                let side = self.book.orders[&ev.order_id].side;
                self.book.reduce(ev.order_id, shares);
                labeled += label(&self.book, &mut self.truth, before, SpreadChangeKind::Trade, side);
            }
            EventBody::Cancel { shares } => {
                let side = self.book.orders[&ev.order_id].side;
                self.book.reduce(ev.order_id, shares);
                labeled += label(&self.book, &mut self.truth, before, SpreadChangeKind::Deletion, side);
            }
            EventBody::Delete => {
                let side = self.book.orders[&ev.order_id].side;
                self.book.remove(ev.order_id);
                labeled += label(&self.book, &mut self.truth, before, SpreadChangeKind::Deletion, side);
            }
            EventBody::Replace {
                new_order_id,
                new_price,
                new_shares,
            } => {
                let side = self.book.orders[&ev.order_id].side;
                self.book.remove(ev.order_id);
                labeled += label(&self.book, &mut self.truth, before, SpreadChangeKind::Deletion, side);
                let mid = self.book.quotes();
                self.book.add(new_order_id, side, new_price, new_shares);
                labeled += label(&self.book, &mut self.truth, mid, SpreadChangeKind::Placement, side);
            }
        }
        self.events.push(ev);
        if self.events.len() % self.cfg.checkpoint_every == 0 {
            self.truth
                .checkpoints
                .push((self.events.len(), self.book.snapshot()));
        }
        labeled
    }

    fn draw_shares(&mut self) -> u32 {
        let lots = self.rng.random_range(self.cfg.min_lots..=self.cfg.max_lots);
        lots * self.cfg.lot
    }

    /// Placement price: one-or-more ticks inside the opposite best, so the
    /// order can land in the spread but never cross.
    fn placement_price(&mut self, side: Side) -> Option<PriceTicks> {
        let depth = geometric(&mut self.rng, self.cfg.depth_p) as PriceTicks;
        let price = match side {
            Side::Bid => self.book.best_ask()? - 1 - depth,
            Side::Ask => self.book.best_bid()? + 1 + depth,
        };
        (price > 0).then_some(price)
    }

    fn seed_ladder(&mut self) {
        let open = self.cfg.session.open;
        let warmup = self.cfg.warmup_secs * NANOS_PER_SEC;
        let mut t = open.saturating_sub(warmup);
        for level in 0..self.cfg.initial_levels as i64 {
            for _ in 0..self.cfg.initial_orders_per_level {
                for (side, price) in [
                    (Side::Bid, self.cfg.base_price_ticks - 1 - level),
                    (Side::Ask, self.cfg.base_price_ticks + 1 + level),
                ] {
                    let shares = self.draw_shares();
                    let id = self.fresh_id();
                    let ts = self.stamp(t);
                    self.emit(OrderEvent {
                        timestamp: ts,
                        symbol: self.symbol,
                        order_id: id,
                        body: EventBody::Add { side, price, shares },
                    });
                    t += 1_000_000; // 1 ms apart
                }
            }
        }
    }

    fn do_placement(&mut self, ts: Nanos) {
        let side = if self.rng.random::<bool>() { Side::Bid } else { Side::Ask };
        let Some(price) = self.placement_price(side) else {
            return;
        };
        let shares = self.draw_shares();
        let id = self.fresh_id();
        let ts = self.stamp(ts);
        self.emit(OrderEvent {
            timestamp: ts,
            symbol: self.symbol,
            order_id: id,
            body: EventBody::Add { side, price, shares },
        });
    }

    fn do_cancellation(&mut self, ts: Nanos) {
        // keep both sides populated
        let min_live = 4;
        let mut side = if self.rng.random::<bool>() { Side::Bid } else { Side::Ask };
        if self.book.live_count(side) <= min_live {
            side = side.opposite();
        }
        if self.book.live_count(side) <= min_live {
            return;
        }
        let id = if self.rng.random::<f64>() < self.cfg.best_cancel_fraction {
            self.book.front_at_best(side).unwrap()
        } else {
            self.book.pick_random(side, &mut self.rng)
        };
        let resting = self.book.orders[&id].shares;
        let ts = self.stamp(ts);
        let u: f64 = self.rng.random();
        if u < self.cfg.partial_cancel_fraction && resting > 1 {
            let shares = self.rng.random_range(1..resting);
            self.emit(OrderEvent {
                timestamp: ts,
                symbol: self.symbol,
                order_id: id,
                body: EventBody::Cancel { shares },
            });
        } else if u < self.cfg.partial_cancel_fraction + self.cfg.replace_fraction {
            let Some(new_price) = self.placement_price(side) else {
                return;
            };
            let new_shares = self.draw_shares();
            let new_order_id = self.fresh_id();
            self.emit(OrderEvent {
                timestamp: ts,
                symbol: self.symbol,
                order_id: id,
                body: EventBody::Replace {
                    new_order_id,
                    new_price,
                    new_shares,
                },
            });
        } else {
            self.emit(OrderEvent {
                timestamp: ts,
                symbol: self.symbol,
                order_id: id,
                body: EventBody::Delete,
            });
        }
    }

    fn do_market_order(&mut self, ts: Nanos, regime: Option<(&Regime, f64)>) {
        let buy = match regime {
            Some((regime, strength)) => {
                let bias = regime.sign(ts) * strength;
                self.rng.random::<f64>() < (1.0 + bias) / 2.0
            }
            None => self.rng.random::<bool>(),
        };
        // a buy consumes the ask side
        let side = if buy { Side::Ask } else { Side::Bid };
        let size = if self.rng.random::<f64>() < self.cfg.sweep_prob {
            self.book.best_level_total(side)
        } else {
            self.draw_shares()
        };
        if size == 0 {
            return;
        }
        let plan = self.book.fill_plan(side, size);
        if plan.is_empty() {
            return;
        }
        let ts = self.stamp(ts);
        let mut labeled = 0;
        for (id, take) in plan {
            labeled += self.emit(OrderEvent {
                timestamp: ts,
                symbol: self.symbol,
                order_id: id,
                body: EventBody::Execute { shares: take },
            });
        }
        if labeled > 0 {
            self.truth.aggressor_count += 1;
        }
    }

    fn run(&mut self, regime: Option<&Regime>) {
        self.seed_ladder();
        let rates = self.cfg.rates;
        let total = rates.placement + rates.cancellation + rates.market_order;
        let mut t = self.cfg.session.open as f64;
        loop {
            t += exp_sample(&mut self.rng, total) * NANOS_PER_SEC as f64;
            if t > self.cfg.session.close as f64 {
                break;
            }
            let ts = t as Nanos;
            let pick: f64 = self.rng.random::<f64>() * total;
            if pick < rates.placement {
                self.do_placement(ts);
            } else if pick < rates.placement + rates.cancellation {
                self.do_cancellation(ts);
            } else {
                let imp = self.cfg.impact.as_ref().map(|i| (regime.unwrap(), i.strength));
                self.do_market_order(ts, imp);
            }
        }
        self.truth.final_book = self.book.snapshot();
    }
}

/// Generate one synthetic session for every configured symbol.
pub fn generate(config: &GeneratorConfig) -> Result<GeneratedMarket, SynthError> {
    config.validate()?;
    let regime = config.impact.as_ref().map(|imp| {
        Regime::build(
            config.seed,
            config.session.open.saturating_sub(config.warmup_secs * NANOS_PER_SEC),
            config.session.close,
            imp.mean_regime_secs,
        )
    });
    let mut market = GeneratedMarket {
        streams: BTreeMap::new(),
        truth: GroundTruth::default(),
    };
    for index in 0..config.symbols.len() {
        let mut symgen = SymbolGen::new(config, index);
        symgen.run(regime.as_ref());
        if symgen.book.best_bid().is_none() || symgen.book.best_ask().is_none() {
            return Err(SynthError::InfeasibleConfig(format!(
                "book for {} drained to one side",
                symgen.symbol
            )));
        }
        market.streams.insert(symgen.symbol, symgen.events);
        market.truth.per_symbol.insert(symgen.symbol, symgen.truth);
    }
    Ok(market)
}

fn check_encodable(ev: &OrderEvent) -> Result<(), SynthError> {
    let bad = |m: String| Err(SynthError::UnencodableEvent(m));
    if ev.timestamp >= 1 << 48 {
        return bad(format!("timestamp {} exceeds 48 bits", ev.timestamp));
    }
    let price_ok = |p: PriceTicks| p > 0 && p.checked_mul(100).is_some_and(|w| w <= u32::MAX as i64);
    match ev.body {
        EventBody::Add { price, shares, .. } => {
            if !price_ok(price) || shares == 0 {
                return bad(format!("add {ev:?}"));
            }
        }
        EventBody::Replace {
            new_price,
            new_shares,
            ..
        } => {
            if !price_ok(new_price) || new_shares == 0 {
                return bad(format!("replace {ev:?}"));
            }
        }
        EventBody::Execute { shares } | EventBody::Cancel { shares } => {
            if shares == 0 {
                return bad(format!("zero shares {ev:?}"));
            }
        }
        EventBody::Delete => {}
    }
    Ok(())
}

/// Encode per-symbol streams as one framed binary feed: a directory message
/// per symbol, then all events merged in timestamp order (ties keep symbol
/// order). `parse_stream` on the result reproduces the input partitions.
pub fn encode(streams: &BTreeMap<Symbol, Vec<OrderEvent>>) -> Result<Vec<u8>, SynthError> {
    let locates: BTreeMap<Symbol, u16> = streams
        .keys()
        .enumerate()
        .map(|(i, &s)| (s, i as u16 + 1))
        .collect();
    let total: usize = streams.values().map(|v| v.len()).sum();
    let mut buf = Vec::with_capacity(total * 40 + streams.len() * 41);
    for (&symbol, &locate) in &locates {
        wire::encode_directory(&mut buf, locate, symbol);
    }
    // (timestamp, symbol index, arrival order) keeps the merge deterministic
    let mut merged: Vec<(Nanos, u16, u32, &OrderEvent)> = Vec::with_capacity(total);
    for (symbol, events) in streams {
        let locate = locates[symbol];
        for (k, ev) in events.iter().enumerate() {
            check_encodable(ev)?;
            merged.push((ev.timestamp, locate, k as u32, ev));
        }
    }
    merged.sort_unstable_by_key(|&(t, l, k, _)| (t, l, k));
    for (_, locate, _, ev) in merged {
        wire::encode_event(&mut buf, ev, locate);
    }
    Ok(buf)
}
