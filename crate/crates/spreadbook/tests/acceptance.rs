//! Acceptance suite. Each test prints one machine-readable PASS/FAIL line;
//! run with `cargo test --test acceptance -- --nocapture` to see them all.

mod common;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{NaiveBook, OracleDay};
use spreadbook::book::{time_weighted_average_spread, OrderBook};
use spreadbook::classify::{relative_amounts, SpreadChangeEvent, SpreadChangeKind};
use spreadbook::feed::{self, EventBody, OrderEvent};
use spreadbook::pipeline::{by_kind, symbol_day};
use spreadbook::response::{
    self, cross_matrix, cross_response, kernel, log_lag_grid, market_response,
    self_response_event_scale, self_response_physical, CrossResponseMatrix, Day,
    MidpointTrajectory, SymbolSeries,
};
use spreadbook::synth::{encode, generate, GeneratorConfig, ImpactConfig};
use spreadbook::types::{Session, Side, Symbol, NANOS_PER_SEC};

fn report(id: u32, name: &str, ok: bool, detail: &str) {
    println!(
        "criterion {id:02} {name}: {} ({detail})",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {id:02} {name}: FAIL ({detail})");
}

fn single_symbol_config(seed: u64, session_secs: u64) -> GeneratorConfig {
    let mut cfg = GeneratorConfig::calibrated(seed, vec![Symbol::new("ACC").unwrap()]);
    cfg.session = Session::new(1_000 * NANOS_PER_SEC, (1_000 + session_secs) * NANOS_PER_SEC);
    cfg.warmup_secs = 60;
    cfg
}

fn single_stream(seed: u64, session_secs: u64) -> (GeneratorConfig, Symbol, Vec<OrderEvent>) {
    let cfg = single_symbol_config(seed, session_secs);
    let mut market = generate(&cfg).unwrap();
    let symbol = cfg.symbols[0];
    let events = market.streams.remove(&symbol).unwrap();
    (cfg, symbol, events)
}

#[test]
fn criterion_01_book_oracle_equivalence() {
    let start = Instant::now();
    let mut mismatch = None;
    'seeds: for seed in 1..=50u64 {
        let (_, symbol, mut events) = single_stream(seed, 1_000);
        events.truncate(10_000);
        assert!(events.len() == 10_000, "stream too short: {}", events.len());
        let mut book = OrderBook::new(symbol);
        let mut naive = NaiveBook::default();
        for (k, ev) in events.iter().enumerate() {
            book.apply_event(ev).unwrap();
            naive.apply(ev);
            if book.best_quotes() != (naive.best_bid(), naive.best_ask())
                || book.order_count() != naive.orders.len()
            {
                mismatch = Some((seed, k, "quotes".to_owned()));
                break 'seeds;
            }
            if (k + 1) % 1_000 == 0 {
                // true from-scratch reconstruction of the prefix
                let mut scratch = NaiveBook::default();
                for e in &events[..=k] {
                    scratch.apply(e);
                }
                if book.snapshot() != scratch.snapshot() {
                    mismatch = Some((seed, k, "snapshot".to_owned()));
                    break 'seeds;
                }
            }
        }
        if book.snapshot() != naive.snapshot() {
            mismatch = Some((seed, events.len(), "final".to_owned()));
            break;
        }
    }
    let elapsed = start.elapsed();
    let ok = mismatch.is_none() && elapsed < Duration::from_secs(60);
    report(
        1,
        "book-oracle-equivalence",
        ok,
        &format!("50 streams x 10^4 events, exact, {elapsed:.2?}; mismatch={mismatch:?}"),
    );
}

#[test]
fn criterion_02_binary_round_trip() {
    let start = Instant::now();
    let mut bad = 0u32;
    for seed in 1..=100u64 {
        let cfg = GeneratorConfig {
            symbols: vec![Symbol::new("RTA").unwrap(), Symbol::new("RTB").unwrap()],
            session: Session::new(500 * NANOS_PER_SEC, 700 * NANOS_PER_SEC),
            warmup_secs: 30,
            ..GeneratorConfig::calibrated(seed, vec![])
        };
        let market = generate(&cfg).unwrap();
        let bytes = encode(&market.streams).unwrap();
        let parsed = feed::parse_stream(&bytes, None).unwrap();
        if parsed.partitions != market.streams {
            bad += 1;
        }
    }
    let elapsed = start.elapsed();
    let ok = bad == 0 && elapsed < Duration::from_secs(10);
    report(
        2,
        "binary-round-trip",
        ok,
        &format!("100 streams, exact, {elapsed:.2?}; mismatching={bad}"),
    );
}

#[test]
fn criterion_03_relative_amount_identity() {
    let mut runs = 0u32;
    let mut bad = 0u32;
    for seed in 1..=100u64 {
        let (cfg, symbol, events) = single_stream(seed, 300);
        let day = symbol_day(symbol, &events, cfg.session, true).unwrap();
        let ra = relative_amounts(&day.quote_events).unwrap();
        runs += 1;
        // O + D + T = 1 as exact rationals over the common denominator
        if ra.placements + ra.deletions + ra.trades != ra.total() || ra.total() == 0 {
            bad += 1;
        }
    }
    report(
        3,
        "relative-amounts-sum-to-one",
        bad == 0,
        &format!("{runs} classify runs, exact rational identity; violations={bad}"),
    );
}

fn close_enough(a: Option<f64>, b: Option<f64>, tol: f64) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(a), Some(b)) => (a - b).abs() <= tol,
        _ => false,
    }
}

#[test]
fn criterion_04_response_oracle_equivalence() {
    let start = Instant::now();
    let tol = 1e-12;
    let mut max_dev = 0.0f64;
    let mut ok = true;
    let secs_grid: Vec<u64> = vec![1, 2, 3, 5, 8, 13, 21, 34, 55];
    let event_grid: Vec<u64> = vec![0, 1, 2, 3, 5, 8, 13, 21];
    for seed in 1..=20u64 {
        let cfg = GeneratorConfig {
            symbols: vec![Symbol::new("ORA").unwrap(), Symbol::new("ORB").unwrap()],
            session: Session::new(1_000 * NANOS_PER_SEC, 1_090 * NANOS_PER_SEC),
            warmup_secs: 30,
            ..GeneratorConfig::calibrated(seed, vec![])
        };
        let market = generate(&cfg).unwrap();
        // streams of ~10^3 events each
        let days: Vec<_> = market
            .streams
            .iter()
            .map(|(&sym, events)| symbol_day(sym, events, cfg.session, true).unwrap())
            .collect();
        let mut check = |engine: &response::ResponseCurve, oracle: &[Option<f64>]| {
            for (e, o) in engine.values.iter().zip(oracle) {
                if let (Some(a), Some(b)) = (e, o) {
                    max_dev = max_dev.max((a - b).abs());
                }
                ok &= close_enough(*e, *o, tol);
            }
        };

        for day in &days {
            let points: Vec<_> = day.trajectory.points().collect();
            for events in [&day.quote_events, &day.all_events] {
                if events.is_empty() {
                    continue;
                }
                let engine = self_response_physical(
                    &[Day { events, traj: &day.trajectory, session: day.session }],
                    &secs_grid,
                )
                .unwrap();
                let oracle = common::oracle_self_physical(
                    &[OracleDay { events: events.clone(), points: points.clone(), session: day.session }],
                    &secs_grid,
                );
                check(&engine, &oracle);
            }
            let engine = self_response_event_scale(&[&day.quote_events], &event_grid).unwrap();
            let oracle = common::oracle_event_scale(&[&day.quote_events], &event_grid);
            check(&engine, &oracle);
        }

        // cross: events of the first symbol against the second's trajectory
        let (a, b) = (&days[0], &days[1]);
        if !a.quote_events.is_empty() {
            let engine = cross_response(
                &[Day { events: &a.quote_events, traj: &b.trajectory, session: a.session }],
                &secs_grid,
            )
            .unwrap();
            let oracle = common::oracle_cross(
                &[OracleDay {
                    events: a.quote_events.clone(),
                    points: b.trajectory.points().collect(),
                    session: a.session,
                }],
                &secs_grid,
            );
            check(&engine, &oracle);
        }
    }
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(120);
    report(
        4,
        "response-oracle-equivalence",
        ok,
        &format!("20 seeds, tol 1e-12, max deviation {max_dev:.3e}, {elapsed:.2?}"),
    );
}

#[test]
fn criterion_05_matrix_normalization() {
    let mut checked = 0u32;
    let mut ok = true;
    for seed in 1..=10u64 {
        let cfg = GeneratorConfig {
            symbols: ["NMA", "NMB", "NMC"]
                .iter()
                .map(|s| Symbol::new(s).unwrap())
                .collect(),
            session: Session::new(1_000 * NANOS_PER_SEC, 2_000 * NANOS_PER_SEC),
            warmup_secs: 30,
            impact: Some(ImpactConfig { strength: 0.4, mean_regime_secs: 300.0 }),
            ..GeneratorConfig::calibrated(seed, vec![])
        };
        let market = generate(&cfg).unwrap();
        let days: Vec<_> = market
            .streams
            .iter()
            .map(|(&sym, events)| symbol_day(sym, events, cfg.session, true).unwrap())
            .collect();
        let trades: Vec<Vec<SpreadChangeEvent>> = days
            .iter()
            .map(|d| by_kind(&d.quote_events, SpreadChangeKind::Trade))
            .collect();
        let series: Vec<SymbolSeries> = days
            .iter()
            .zip(&trades)
            .map(|(d, t)| SymbolSeries {
                symbol: d.symbol,
                events: vec![t.as_slice()],
                trajs: vec![&d.trajectory],
            })
            .collect();
        for tau in [1, 10, 100] {
            let m = cross_matrix(&series, &[cfg.session], tau).unwrap();
            let n = m.n();
            let off: Vec<f64> = (0..n * n)
                .filter(|c| c / n != c % n)
                .map(|c| m.normalized[c])
                .collect();
            if off.iter().any(|v| *v != 0.0) {
                let max_rho = off.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                ok &= (max_rho - 1.0).abs() <= 1e-15;
                checked += 1;
            }
        }
    }
    // all-zero matrix: no events at all
    let traj = MidpointTrajectory::new(Symbol::new("ZZA").unwrap());
    let zero_series: Vec<SymbolSeries> = ["ZZA", "ZZB"]
        .iter()
        .map(|s| SymbolSeries {
            symbol: Symbol::new(s).unwrap(),
            events: vec![&[]],
            trajs: vec![&traj],
        })
        .collect();
    let session = Session::new(0, NANOS_PER_SEC);
    let zero = cross_matrix(&zero_series, &[session], 1).unwrap();
    ok &= zero.normalized.iter().all(|v| *v == 0.0);
    report(
        5,
        "matrix-normalization",
        ok && checked > 0,
        &format!("{checked} nonzero matrices, max off-diagonal |rho| = 1 within 1e-15; zero matrix handled"),
    );
}

#[test]
fn criterion_06_market_response_consistency() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6d6b74);
    let symbols: Vec<Symbol> = (0..5)
        .map(|i| Symbol::new(&format!("MK{i}")).unwrap())
        .collect();
    let mut max_dev = 0.0f64;
    for _ in 0..100 {
        let values: Vec<f64> = (0..25)
            .map(|_| rng.random_range(-4096i32..=4096) as f64 / 1024.0)
            .collect();
        let m = CrossResponseMatrix {
            tau_secs: 10,
            symbols: symbols.clone(),
            normalized: vec![0.0; 25],
            counts: vec![1; 25],
            values: values.clone(),
        };
        let curve = market_response(std::slice::from_ref(&m)).unwrap();
        let mut sum = 0.0;
        for i in 0..5 {
            for j in 0..5 {
                if i != j {
                    sum += values[i * 5 + j];
                }
            }
        }
        let direct = sum / 20.0;
        max_dev = max_dev.max((curve.values[0].unwrap() - direct).abs());
    }
    report(
        6,
        "market-response-consistency",
        max_dev <= 1e-15,
        &format!("100 random 5x5 trials, max |engine - direct mean| = {max_dev:.3e}"),
    );
}

fn negate_events(events: &[kernel::LogEvent]) -> Vec<kernel::LogEvent> {
    events
        .iter()
        .map(|e| kernel::LogEvent { sign: -e.sign, ..*e })
        .collect()
}

fn mirror_log_events(events: &[kernel::LogEvent]) -> Vec<kernel::LogEvent> {
    events
        .iter()
        .map(|e| kernel::LogEvent {
            sign: -e.sign,
            log_before: -e.log_before,
            t: e.t,
        })
        .collect()
}

fn exactly_negated(a: &response::ResponseCurve, b: &response::ResponseCurve) -> bool {
    a.counts == b.counts
        && a.values.len() == b.values.len()
        && a.values.iter().zip(&b.values).all(|(x, y)| match (x, y) {
            (None, None) => true,
            (Some(x), Some(y)) => *x == -*y,
            _ => false,
        })
}

fn exactly_equal(a: &response::ResponseCurve, b: &response::ResponseCurve) -> bool {
    a.counts == b.counts && a.values == b.values
}

#[test]
fn criterion_07_antisymmetry_and_mirror() {
    let mut ok = true;
    let secs_grid: Vec<u64> = vec![1, 2, 5, 10, 30, 60];
    let event_grid: Vec<u64> = vec![0, 1, 2, 5, 10];
    for seed in 1..=20u64 {
        let (cfg, symbol, events) = single_stream(seed, 200);
        let day = symbol_day(symbol, &events, cfg.session, true).unwrap();
        if day.quote_events.is_empty() {
            continue;
        }
        let log_events: Vec<kernel::LogEvent> = day
            .quote_events
            .iter()
            .map(|e| kernel::LogEvent {
                t: e.timestamp,
                sign: e.sign as f64,
                log_before: (e.midpoint_before.doubled_ticks() as f64).ln(),
            })
            .collect();
        let traj = day.trajectory.to_log();
        let mirror_traj = kernel::LogTrajectory {
            times: traj.times.clone(),
            logs: traj.logs.iter().map(|l| -l).collect(),
        };
        let kday = |ev, tr| {
            [kernel::Day { events: ev, traj: tr, session: cfg.session }]
        };

        // sign negation negates every curve exactly
        let neg = negate_events(&log_events);
        ok &= exactly_negated(
            &kernel::self_physical(&kday(&log_events, &traj), &secs_grid),
            &kernel::self_physical(&kday(&neg, &traj), &secs_grid),
        );
        ok &= exactly_negated(
            &kernel::cross(&kday(&log_events, &traj), &secs_grid),
            &kernel::cross(&kday(&neg, &traj), &secs_grid),
        );
        ok &= exactly_negated(
            &kernel::event_scale(&[&log_events], &event_grid),
            &kernel::event_scale(&[&neg], &event_grid),
        );

        // bid<->ask mirror (signs and log-midpoints reflect) leaves curves unchanged
        let mirrored = mirror_log_events(&log_events);
        ok &= exactly_equal(
            &kernel::self_physical(&kday(&log_events, &traj), &secs_grid),
            &kernel::self_physical(&kday(&mirrored, &mirror_traj), &secs_grid),
        );
        ok &= exactly_equal(
            &kernel::cross(&kday(&log_events, &traj), &secs_grid),
            &kernel::cross(&kday(&mirrored, &mirror_traj), &secs_grid),
        );
        ok &= exactly_equal(
            &kernel::event_scale(&[&log_events], &event_grid),
            &kernel::event_scale(&[&mirrored], &event_grid),
        );

        // and the stream-level mirror flips books and signs exactly
        let pivot = 4 * cfg.base_price_ticks;
        let mirrored_stream: Vec<OrderEvent> = events
            .iter()
            .map(|ev| {
                let body = match ev.body {
                    EventBody::Add { side, price, shares } => EventBody::Add {
                        side: side.opposite(),
                        price: pivot - price,
                        shares,
                    },
                    EventBody::Replace { new_order_id, new_price, new_shares } => {
                        EventBody::Replace {
                            new_order_id,
                            new_price: pivot - new_price,
                            new_shares,
                        }
                    }
                    other => other,
                };
                OrderEvent { body, ..*ev }
            })
            .collect();
        let mday = symbol_day(symbol, &mirrored_stream, cfg.session, true).unwrap();
        ok &= day.quote_events.len() == mday.quote_events.len();
        ok &= day
            .quote_events
            .iter()
            .zip(&mday.quote_events)
            .all(|(a, b)| a.kind == b.kind && a.sign == -b.sign && a.timestamp == b.timestamp);
    }
    report(
        7,
        "antisymmetry-and-mirror",
        ok,
        "20 seeds: negation exact, mirror curves bit-identical, stream mirror flips signs",
    );
}

#[test]
fn criterion_08_time_weighted_spread() {
    // closed form: spread 1 tick for 75 s, 5 ticks for 25 s -> 0.02 exactly
    let sym = Symbol::new("TWA").unwrap();
    let session = Session::new(0, 100 * NANOS_PER_SEC);
    let mk = |ts, order_id, body| OrderEvent { timestamp: ts, symbol: sym, order_id, body };
    let events = vec![
        mk(0, 1, EventBody::Add { side: Side::Bid, price: 10_009, shares: 100 }),
        mk(0, 2, EventBody::Add { side: Side::Ask, price: 10_010, shares: 100 }),
        mk(0, 3, EventBody::Add { side: Side::Ask, price: 10_014, shares: 100 }),
        mk(75 * NANOS_PER_SEC, 2, EventBody::Delete),
    ];
    let (_, deltas) = spreadbook::pipeline::replay(sym, &events).unwrap();
    let closed_form = time_weighted_average_spread(&deltas, session).unwrap();
    let mut ok = closed_form == 0.02;

    // grid oracle on second-snapped synthetic days
    let mut max_rel = 0.0f64;
    for seed in 1..=10u64 {
        let (cfg, symbol, mut events) = single_stream(seed, 2_000);
        for ev in &mut events {
            ev.timestamp = ev.timestamp / NANOS_PER_SEC * NANOS_PER_SEC;
        }
        let day = symbol_day(symbol, &events, cfg.session, true).unwrap();
        let spread_points: Vec<_> = day
            .deltas
            .iter()
            .map(|d| (d.timestamp, d.spread_after()))
            .collect();
        let engine = day.twa_spread.unwrap();
        let oracle = common::oracle_twa_spread_grid(&spread_points, cfg.session).unwrap();
        let rel = (engine - oracle).abs() / oracle.abs();
        max_rel = max_rel.max(rel);
        ok &= rel <= 1e-9;
    }
    report(
        8,
        "time-weighted-spread",
        ok,
        &format!("closed form exact ({closed_form}); grid oracle max rel dev {max_rel:.3e}"),
    );
}

/// Mean, standard error, and count of sign * log-return samples at one lag.
fn response_stats(
    events: &[SpreadChangeEvent],
    traj: &MidpointTrajectory,
    session: Session,
    tau: u64,
) -> (f64, f64, u64) {
    let mut n = 0u64;
    let mut mean = 0.0f64;
    let mut m2 = 0.0f64;
    for ev in events {
        let target = ev.timestamp + tau * NANOS_PER_SEC;
        if target > session.close {
            continue;
        }
        let Some(after) = traj.lookup(target) else { continue };
        let r = (after.doubled_ticks() as f64).ln()
            - (ev.midpoint_before.doubled_ticks() as f64).ln();
        let x = ev.sign as f64 * r;
        n += 1;
        let d = x - mean;
        mean += d / n as f64;
        m2 += d * (x - mean);
    }
    let stderr = if n > 1 {
        (m2 / (n - 1) as f64 / n as f64).sqrt()
    } else {
        f64::INFINITY
    };
    (mean, stderr, n)
}

#[test]
fn criterion_09_qualitative_signs() {
    let taus: Vec<u64> = log_lag_grid(1_000)
        .into_iter()
        .step_by(5)
        .collect();

    // (a) the all-event placement/deletion curves stay close to zero next to
    // their spread-changing counterparts, which are significant and carry the
    // expected signs (trades and deletions positive, placements negative on
    // the physical scale)
    let mut zero_pts = 0u32;
    let mut zero_ok = 0u32;
    let mut sig_pts = 0u32;
    let mut sig_ok = 0u32;
    for seed in 1..=10u64 {
        let cfg = GeneratorConfig::calibrated(seed, vec![Symbol::new("QLT").unwrap()]);
        let mut market = generate(&cfg).unwrap();
        let symbol = cfg.symbols[0];
        let events = market.streams.remove(&symbol).unwrap();
        let day = symbol_day(symbol, &events, cfg.session, true).unwrap();
        for kind in [
            SpreadChangeKind::Trade,
            SpreadChangeKind::Deletion,
            SpreadChangeKind::Placement,
        ] {
            let quote_evs = by_kind(&day.quote_events, kind);
            let all_evs = by_kind(&day.all_events, kind);
            for &tau in &taus {
                let (q_mean, q_stderr, q_n) =
                    response_stats(&quote_evs, &day.trajectory, cfg.session, tau);
                if q_n <= 100 {
                    continue;
                }
                sig_pts += 1;
                let expected_sign = if kind == SpreadChangeKind::Placement { -1.0 } else { 1.0 };
                if q_mean * expected_sign > 2.0 * q_stderr {
                    sig_ok += 1;
                }
                if kind != SpreadChangeKind::Trade {
                    let (a_mean, _, a_n) =
                        response_stats(&all_evs, &day.trajectory, cfg.session, tau);
                    if a_n > 100 {
                        zero_pts += 1;
                        if a_mean.abs() <= 0.25 * q_mean.abs() {
                            zero_ok += 1;
                        }
                    }
                }
            }
        }
    }

    // (b) planted impact: market response of trades positive over 1..10^3 s
    let mut pos_pts = 0u32;
    let mut pos_ok = 0u32;
    for seed in 1..=10u64 {
        let symbols: Vec<Symbol> = (0..5)
            .map(|i| Symbol::new(&format!("IMP{i}")).unwrap())
            .collect();
        let cfg = GeneratorConfig {
            impact: Some(ImpactConfig { strength: 0.4, mean_regime_secs: 2_000.0 }),
            ..GeneratorConfig::calibrated(seed, symbols)
        };
        let market = generate(&cfg).unwrap();
        let days: Vec<_> = market
            .streams
            .iter()
            .map(|(&sym, events)| symbol_day(sym, events, cfg.session, true).unwrap())
            .collect();
        let trades: Vec<Vec<SpreadChangeEvent>> = days
            .iter()
            .map(|d| by_kind(&d.quote_events, SpreadChangeKind::Trade))
            .collect();
        let series: Vec<SymbolSeries> = days
            .iter()
            .zip(&trades)
            .map(|(d, t)| SymbolSeries {
                symbol: d.symbol,
                events: vec![t.as_slice()],
                trajs: vec![&d.trajectory],
            })
            .collect();
        let matrices: Vec<_> = taus
            .iter()
            .map(|&tau| cross_matrix(&series, &[cfg.session], tau).unwrap())
            .collect();
        let curve = market_response(&matrices).unwrap();
        for v in curve.values.iter().flatten() {
            pos_pts += 1;
            if *v > 0.0 {
                pos_ok += 1;
            }
        }
    }

    let frac = |ok: u32, pts: u32| ok as f64 / pts.max(1) as f64;
    let ok = zero_pts > 0
        && sig_pts > 0
        && pos_pts > 0
        && frac(zero_ok, zero_pts) >= 0.95
        && frac(sig_ok, sig_pts) >= 0.95
        && frac(pos_ok, pos_pts) >= 0.95;
    report(
        9,
        "qualitative-signs",
        ok,
        &format!(
            "all-event zero-consistency {}/{}, spread-changing significance {}/{}, market response positive {}/{}",
            zero_ok, zero_pts, sig_ok, sig_pts, pos_ok, pos_pts
        ),
    );
}

#[test]
fn criterion_10_throughput() {
    let mut total_events = 0u64;
    let mut elapsed = Duration::ZERO;
    for chunk in 0..7u64 {
        let symbols: Vec<Symbol> = (0..5)
            .map(|i| Symbol::new(&format!("P{}{}", chunk, i)).unwrap())
            .collect();
        let cfg = GeneratorConfig::calibrated(1_000 + chunk, symbols);
        let market = generate(&cfg).unwrap();
        let bytes = encode(&market.streams).unwrap();
        drop(market);

        let start = Instant::now();
        let mut books: BTreeMap<Symbol, OrderBook> = BTreeMap::new();
        let stats = feed::scan_stream(&bytes, None, |ev| {
            books
                .entry(ev.symbol)
                .or_insert_with(|| OrderBook::new(ev.symbol))
                .apply_event(&ev)
                .unwrap();
        })
        .unwrap();
        elapsed += start.elapsed();
        total_events += stats.parsed;
    }
    let rate = total_events as f64 / elapsed.as_secs_f64();
    let ok = total_events >= 10_000_000 && rate >= 1e6;
    report(
        10,
        "throughput",
        ok,
        &format!("{total_events} messages parsed+replayed in {elapsed:.2?} ({rate:.3e} msg/s)"),
    );
}
