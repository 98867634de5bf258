//! Price-response analytics: log returns, self-response on event and
//! physical time scales, cross-response matrices with normalization,
//! active/passive responses, and the market response.

use rayon::prelude::*;

use crate::classify::SpreadChangeEvent;
use crate::types::{Midpoint, Nanos, Session, Symbol, NANOS_PER_SEC};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ResponseError {
    #[error("empty lag grid")]
    EmptyGrid,
    #[error("no events to average over")]
    NoEvents,
    #[error("cross-response requires at least two symbols, got {0}")]
    FewerThanTwoSymbols(usize),
    #[error("undefined midpoint")]
    UndefinedMidpoint,
    #[error("mismatched day counts across inputs")]
    MismatchedDays,
}

/// Natural log return between two exact midpoints.
pub fn log_return(before: Midpoint, after: Midpoint) -> Result<f64, ResponseError> {
    if before.doubled_ticks() <= 0 || after.doubled_ticks() <= 0 {
        return Err(ResponseError::UndefinedMidpoint);
    }
    // Difference of logs of the doubled integers; the factor two cancels.
    Ok(log_mid(after) - log_mid(before))
}

fn log_mid(m: Midpoint) -> f64 {
    (m.doubled_ticks() as f64).ln()
}

/// Piecewise-constant, right-continuous midpoint path of one symbol.
/// Breakpoint timestamps are strictly increasing.
#[derive(Debug, Clone)]
pub struct MidpointTrajectory {
    symbol: Symbol,
    times: Vec<Nanos>,
    mids: Vec<Midpoint>,
}

impl MidpointTrajectory {
    pub fn new(symbol: Symbol) -> MidpointTrajectory {
        MidpointTrajectory {
            symbol,
            times: Vec::new(),
            mids: Vec::new(),
        }
    }

    /// Build from an ordered delta sequence, keeping one breakpoint per
    /// distinct timestamp (the last midpoint wins).
    pub fn from_deltas(symbol: Symbol, deltas: &[crate::book::BookDelta]) -> MidpointTrajectory {
        let mut traj = MidpointTrajectory::new(symbol);
        for d in deltas {
            debug_assert!(traj.times.last().is_none_or(|&t| t <= d.timestamp));
            if let Some(m) = d.midpoint_after() {
                traj.push(d.timestamp, m);
            }
        }
        traj
    }

    pub fn push(&mut self, t: Nanos, m: Midpoint) {
        match self.times.last() {
            Some(&last) if last == t => *self.mids.last_mut().unwrap() = m,
            Some(&last) => {
                assert!(last < t, "breakpoints must be time-ordered");
                if *self.mids.last().unwrap() != m {
                    self.times.push(t);
                    self.mids.push(m);
                }
            }
            None => {
                self.times.push(t);
                self.mids.push(m);
            }
        }
    }

    pub fn symbol(&self) -> Symbol {
        self.symbol
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = (Nanos, Midpoint)> + '_ {
        self.times.iter().copied().zip(self.mids.iter().copied())
    }

    /// Midpoint in effect at `t` (last breakpoint <= t).
    pub fn lookup(&self, t: Nanos) -> Option<Midpoint> {
        let idx = self.times.partition_point(|&bt| bt <= t);
        idx.checked_sub(1).map(|i| self.mids[i])
    }

    /// Midpoint in effect strictly before `t`.
    pub fn lookup_before(&self, t: Nanos) -> Option<Midpoint> {
        let idx = self.times.partition_point(|&bt| bt < t);
        idx.checked_sub(1).map(|i| self.mids[i])
    }

    pub fn to_log(&self) -> kernel::LogTrajectory {
        kernel::LogTrajectory {
            times: self.times.clone(),
            logs: self.mids.iter().map(|&m| log_mid(m)).collect(),
        }
    }
}

/// R(tau) sampled on a lag grid with per-lag sample counts. Lags are in
/// seconds (physical scale) or same-kind event counts (event scale).
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseCurve {
    pub lags: Vec<u64>,
    /// `None` where no samples survived the intraday rules.
    pub values: Vec<Option<f64>>,
    pub counts: Vec<u64>,
}

/// Log-spaced integer lag grid up to `max`, at most 25 points per decade.
pub fn log_lag_grid(max: u64) -> Vec<u64> {
    let mut grid = Vec::new();
    let mut k = 0u32;
    loop {
        let lag = 10f64.powf(k as f64 / 25.0).round() as u64;
        if lag > max {
            break;
        }
        if grid.last() != Some(&lag) {
            grid.push(lag);
        }
        k += 1;
    }
    if grid.last() != Some(&max) && max >= 1 {
        grid.push(max);
    }
    grid
}

/// Float kernel over pre-transformed inputs: event signs with log midpoints
/// and log-midpoint trajectories. The domain-typed operations below are thin
/// adapters over these routines.
pub mod kernel {
    use super::*;

    /// Compensated (Kahan) accumulator for the time averages.
    #[derive(Debug, Default, Clone, Copy)]
    pub struct Kahan {
        sum: f64,
        carry: f64,
    }

    impl Kahan {
        pub fn add(&mut self, x: f64) {
            let y = x - self.carry;
            let t = self.sum + y;
            self.carry = (t - self.sum) - y;
            self.sum = t;
        }

        pub fn sum(&self) -> f64 {
            self.sum
        }
    }

    /// An event reduced to what the response average consumes.
    #[derive(Debug, Clone, Copy)]
    pub struct LogEvent {
        pub t: Nanos,
        /// +1.0 or -1.0
        pub sign: f64,
        /// ln of the pre-event midpoint (doubled-tick representation).
        pub log_before: f64,
    }

    #[derive(Debug, Clone)]
    pub struct LogTrajectory {
        pub times: Vec<Nanos>,
        pub logs: Vec<f64>,
    }

    impl LogTrajectory {
        pub fn lookup(&self, t: Nanos) -> Option<f64> {
            let idx = self.times.partition_point(|&bt| bt <= t);
            idx.checked_sub(1).map(|i| self.logs[i])
        }

        pub fn lookup_before(&self, t: Nanos) -> Option<f64> {
            let idx = self.times.partition_point(|&bt| bt < t);
            idx.checked_sub(1).map(|i| self.logs[i])
        }
    }

    pub struct Day<'a> {
        pub events: &'a [LogEvent],
        pub traj: &'a LogTrajectory,
        pub session: Session,
    }

    /// Self-response on the physical time scale: for each lag tau (seconds),
    /// average over events of sign * (ln m(t+tau) - ln m(t-delta)), where the
    /// pre-event midpoint comes from the event itself. Events whose t+tau
    /// falls outside the session are not included.
    pub fn self_physical(days: &[Day<'_>], grid_secs: &[u64]) -> ResponseCurve {
        response_over_grid(grid_secs, |tau, acc, n| {
            let offset = tau * NANOS_PER_SEC;
            for day in days {
                for ev in day.events {
                    let target = ev.t + offset;
                    if target > day.session.close {
                        continue;
                    }
                    let Some(log_after) = day.traj.lookup(target) else {
                        continue;
                    };
                    acc.add(ev.sign * (log_after - ev.log_before));
                    *n += 1;
                }
            }
        })
    }

    /// Cross-response: events of stock i against the lagged returns of stock
    /// j. The reference midpoint is the last breakpoint of j strictly before
    /// the event time.
    pub fn cross(days: &[Day<'_>], grid_secs: &[u64]) -> ResponseCurve {
        response_over_grid(grid_secs, |tau, acc, n| {
            let offset = tau * NANOS_PER_SEC;
            for day in days {
                for ev in day.events {
                    let target = ev.t + offset;
                    if target > day.session.close {
                        continue;
                    }
                    let Some(log_before) = day.traj.lookup_before(ev.t) else {
                        continue;
                    };
                    let Some(log_after) = day.traj.lookup(target) else {
                        continue;
                    };
                    acc.add(ev.sign * (log_after - log_before));
                    *n += 1;
                }
            }
        })
    }

    /// Self-response on the event time scale: lag n pairs the k-th event
    /// with the pre-event midpoint of the (k+n)-th event of the same kind.
    /// Pairs never cross a day boundary.
    pub fn event_scale(days: &[&[LogEvent]], grid_events: &[u64]) -> ResponseCurve {
        response_over_grid(grid_events, |lag, acc, n| {
            let lag = lag as usize;
            for &events in days {
                if events.len() <= lag {
                    continue;
                }
                for k in 0..events.len() - lag {
                    let ev = &events[k];
                    acc.add(ev.sign * (events[k + lag].log_before - ev.log_before));
                    *n += 1;
                }
            }
        })
    }

    fn response_over_grid(
        grid: &[u64],
        mut fill: impl FnMut(u64, &mut Kahan, &mut u64),
    ) -> ResponseCurve {
        let mut curve = ResponseCurve {
            lags: grid.to_vec(),
            values: Vec::with_capacity(grid.len()),
            counts: Vec::with_capacity(grid.len()),
        };
        for &lag in grid {
            let mut acc = Kahan::default();
            let mut n = 0u64;
            fill(lag, &mut acc, &mut n);
            curve.values.push((n > 0).then(|| acc.sum() / n as f64));
            curve.counts.push(n);
        }
        curve
    }
}

fn to_log_events(events: &[SpreadChangeEvent]) -> Vec<kernel::LogEvent> {
    events
        .iter()
        .map(|ev| kernel::LogEvent {
            t: ev.timestamp,
            sign: ev.sign as f64,
            log_before: log_mid(ev.midpoint_before),
        })
        .collect()
}

/// One trading day of inputs for the physical-scale responses.
pub struct Day<'a> {
    pub events: &'a [SpreadChangeEvent],
    pub traj: &'a MidpointTrajectory,
    pub session: Session,
}

fn check_days(grid: &[u64], total_events: usize) -> Result<(), ResponseError> {
    if grid.is_empty() {
        return Err(ResponseError::EmptyGrid);
    }
    if total_events == 0 {
        return Err(ResponseError::NoEvents);
    }
    Ok(())
}

fn physical(days: &[Day<'_>], grid_secs: &[u64], cross: bool) -> Result<ResponseCurve, ResponseError> {
    check_days(grid_secs, days.iter().map(|d| d.events.len()).sum())?;
    let log_events: Vec<_> = days.iter().map(|d| to_log_events(d.events)).collect();
    let log_trajs: Vec<_> = days.iter().map(|d| d.traj.to_log()).collect();
    let kernel_days: Vec<_> = days
        .iter()
        .enumerate()
        .map(|(i, d)| kernel::Day {
            events: &log_events[i],
            traj: &log_trajs[i],
            session: d.session,
        })
        .collect();
    Ok(if cross {
        kernel::cross(&kernel_days, grid_secs)
    } else {
        kernel::self_physical(&kernel_days, grid_secs)
    })
}

/// Self-response of spread-changing events on the physical time scale
/// (lags in seconds). Multi-day inputs pool events: each event is one sample.
pub fn self_response_physical(days: &[Day<'_>], grid_secs: &[u64]) -> Result<ResponseCurve, ResponseError> {
    physical(days, grid_secs, false)
}

/// Same average over an unfiltered event set (all events of one kind,
/// quote-changing or not); the caller supplies the event list.
pub fn self_response_all_events(days: &[Day<'_>], grid_secs: &[u64]) -> Result<ResponseCurve, ResponseError> {
    physical(days, grid_secs, false)
}

/// Cross-response of events in stock i against midpoint returns of stock j:
/// `events` from i, `traj` from j. With i = j this reduces to the
/// self-response.
pub fn cross_response(days: &[Day<'_>], grid_secs: &[u64]) -> Result<ResponseCurve, ResponseError> {
    physical(days, grid_secs, true)
}

/// Self-response on the event time scale: lags counted in events of the same
/// kind. Day boundaries are never crossed.
pub fn self_response_event_scale(
    days: &[&[SpreadChangeEvent]],
    grid_events: &[u64],
) -> Result<ResponseCurve, ResponseError> {
    check_days(grid_events, days.iter().map(|d| d.len()).sum())?;
    let log_events: Vec<_> = days.iter().map(|d| to_log_events(d)).collect();
    let refs: Vec<&[kernel::LogEvent]> = log_events.iter().map(|v| v.as_slice()).collect();
    Ok(kernel::event_scale(&refs, grid_events))
}

/// Per-day inputs of one symbol, aligned with a shared session list.
pub struct SymbolSeries<'a> {
    pub symbol: Symbol,
    pub events: Vec<&'a [SpreadChangeEvent]>,
    pub trajs: Vec<&'a MidpointTrajectory>,
}

/// N x N cross-response matrix at a fixed lag, with its normalized form.
/// Rows are the event-source stock i, columns the measured stock j.
#[derive(Debug, Clone)]
pub struct CrossResponseMatrix {
    pub tau_secs: u64,
    /// Alphabetical.
    pub symbols: Vec<Symbol>,
    /// Row-major R_ij.
    pub values: Vec<f64>,
    /// R_ij divided by the largest absolute off-diagonal value; all zero
    /// when every off-diagonal is zero.
    pub normalized: Vec<f64>,
    pub counts: Vec<u64>,
}

impl CrossResponseMatrix {
    pub fn n(&self) -> usize {
        self.symbols.len()
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n() + j]
    }

    pub fn rho(&self, i: usize, j: usize) -> f64 {
        self.normalized[i * self.n() + j]
    }
}

/// Compute R_ij(tau) for every ordered symbol pair. A pair with zero
/// surviving samples contributes 0.
pub fn cross_matrix(
    series: &[SymbolSeries<'_>],
    sessions: &[Session],
    tau_secs: u64,
) -> Result<CrossResponseMatrix, ResponseError> {
    let n = series.len();
    if n < 2 {
        return Err(ResponseError::FewerThanTwoSymbols(n));
    }
    let days = sessions.len();
    if series.iter().any(|s| s.events.len() != days || s.trajs.len() != days) {
        return Err(ResponseError::MismatchedDays);
    }
    let mut symbols: Vec<Symbol> = series.iter().map(|s| s.symbol).collect();
    let sorted = symbols.windows(2).all(|w| w[0] < w[1]);
    if !sorted {
        symbols.sort_unstable();
    }
    let order: Vec<usize> = symbols
        .iter()
        .map(|sym| series.iter().position(|s| s.symbol == *sym).unwrap())
        .collect();

    let log_events: Vec<Vec<Vec<kernel::LogEvent>>> = order
        .iter()
        .map(|&si| series[si].events.iter().map(|e| to_log_events(e)).collect())
        .collect();
    let log_trajs: Vec<Vec<kernel::LogTrajectory>> = order
        .iter()
        .map(|&si| series[si].trajs.iter().map(|t| t.to_log()).collect())
        .collect();

    let grid = [tau_secs];
    let cells: Vec<(f64, u64)> = (0..n * n)
        .into_par_iter()
        .map(|cell| {
            let (i, j) = (cell / n, cell % n);
            let kernel_days: Vec<kernel::Day<'_>> = (0..days)
                .map(|d| kernel::Day {
                    events: &log_events[i][d],
                    traj: &log_trajs[j][d],
                    session: sessions[d],
                })
                .collect();
            let curve = kernel::cross(&kernel_days, &grid);
            (curve.values[0].unwrap_or(0.0), curve.counts[0])
        })
        .collect();

    let values: Vec<f64> = cells.iter().map(|c| c.0).collect();
    let counts: Vec<u64> = cells.iter().map(|c| c.1).collect();
    let max_off = (0..n * n)
        .filter(|cell| cell / n != cell % n)
        .map(|cell| values[cell].abs())
        .fold(0.0f64, f64::max);
    let normalized = if max_off == 0.0 {
        vec![0.0; n * n]
    } else {
        values.iter().map(|v| v / max_off).collect()
    };
    Ok(CrossResponseMatrix {
        tau_secs,
        symbols,
        values,
        normalized,
        counts,
    })
}

/// Active response per column stock j (mean over event sources i) and
/// passive response per row stock i (mean over measured stocks j), with the
/// diagonal excluded from both means.
pub fn active_passive(matrix: &CrossResponseMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = matrix.n();
    let mut active = vec![0.0; n];
    let mut passive = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                active[j] += matrix.value(i, j);
                passive[i] += matrix.value(i, j);
            }
        }
    }
    let denom = (n - 1) as f64;
    for v in active.iter_mut().chain(passive.iter_mut()) {
        *v /= denom;
    }
    (active, passive)
}

/// Market response: the mean of the N(N-1) off-diagonal entries of each
/// matrix, as a function of its lag.
pub fn market_response(matrices: &[CrossResponseMatrix]) -> Result<ResponseCurve, ResponseError> {
    if matrices.is_empty() {
        return Err(ResponseError::EmptyGrid);
    }
    let mut curve = ResponseCurve {
        lags: Vec::with_capacity(matrices.len()),
        values: Vec::with_capacity(matrices.len()),
        counts: Vec::with_capacity(matrices.len()),
    };
    for m in matrices {
        let n = m.n();
        if n < 2 {
            return Err(ResponseError::FewerThanTwoSymbols(n));
        }
        let mut acc = kernel::Kahan::default();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    acc.add(m.value(i, j));
                }
            }
        }
        let pairs = (n * (n - 1)) as u64;
        curve.lags.push(m.tau_secs);
        curve.values.push(Some(acc.sum() / pairs as f64));
        curve.counts.push(pairs);
    }
    Ok(curve)
}
