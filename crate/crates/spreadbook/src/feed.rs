//! Decoding of the length-prefixed binary order-flow feed and the CSV
//! fallback into canonical [`OrderEvent`]s.
//!
//! The binary format is big-endian, each message prefixed by a 2-byte
//! unsigned length. Message layouts follow NASDAQ TotalView-ITCH 5.0 for the
//! supported codes; see docs/FORMAT.md for the field-by-field layout. Codes
//! outside the supported set are skipped without losing framing.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{self, BufRead, Write};

use crate::types::{InvalidSymbol, Nanos, PriceTicks, Side, Symbol};

/// Wire prices are in 1e-4 currency units; book prices in 0.01 ticks.
const WIRE_PRICE_PER_TICK: u32 = 100;

/// One framed message: single-byte code plus payload.
#[derive(Debug, Clone, Copy)]
pub struct RawMessage<'a> {
    pub kind: u8,
    pub payload: &'a [u8],
}

/// Kind-specific fields of an order-flow event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventBody {
    Add {
        side: Side,
        price: PriceTicks,
        shares: u32,
    },
    Execute {
        shares: u32,
    },
    Cancel {
        shares: u32,
    },
    Delete,
    Replace {
        new_order_id: u64,
        new_price: PriceTicks,
        new_shares: u32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    Add,
    Execute,
    Cancel,
    Delete,
    Replace,
}

impl EventBody {
    pub fn kind(&self) -> EventKind {
        match self {
            EventBody::Add { .. } => EventKind::Add,
            EventBody::Execute { .. } => EventKind::Execute,
            EventBody::Cancel { .. } => EventKind::Cancel,
            EventBody::Delete => EventKind::Delete,
            EventBody::Replace { .. } => EventKind::Replace,
        }
    }
}

/// One decoded feed message.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrderEvent {
    pub timestamp: Nanos,
    pub symbol: Symbol,
    pub order_id: u64,
    pub body: EventBody,
}

/// Maps wire locate codes to symbols. Populated from directory ('R')
/// messages and from the stock field of add orders.
#[derive(Debug, Default, Clone)]
pub struct SymbolTable {
    by_locate: Vec<Option<Symbol>>,
}

impl SymbolTable {
    pub fn new() -> SymbolTable {
        SymbolTable::default()
    }

    pub fn get(&self, locate: u16) -> Option<Symbol> {
        self.by_locate.get(locate as usize).copied().flatten()
    }

    pub fn insert(&mut self, locate: u16, symbol: Symbol) -> Result<(), MessageError> {
        let idx = locate as usize;
        if self.by_locate.len() <= idx {
            self.by_locate.resize(idx + 1, None);
        }
        match self.by_locate[idx] {
            Some(existing) if existing != symbol => Err(MessageError::LocateConflict {
                locate,
                existing,
                new: symbol,
            }),
            _ => {
                self.by_locate[idx] = Some(symbol);
                Ok(())
            }
        }
    }
}

/// Outcome of decoding one message.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decoded {
    Event(OrderEvent),
    /// Directory entry; the caller registers it in its symbol table.
    Directory { locate: u16, symbol: Symbol },
    /// Supported-but-irrelevant message (admin codes, non-displayed fills).
    Skip,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MessageError {
    #[error("payload too short for code {code:?}: got {got} bytes, need {need}")]
    TooShort { code: char, got: usize, need: usize },
    #[error("wire price {0} is not a whole number of 0.01 ticks")]
    SubTickPrice(u32),
    #[error("price must be positive")]
    ZeroPrice,
    #[error("shares must be positive")]
    ZeroShares,
    #[error("invalid side byte {0:#04x}")]
    BadSide(u8),
    #[error("invalid symbol field: {0}")]
    BadSymbol(#[from] InvalidSymbol),
    #[error("unknown symbol locate {0}")]
    UnknownLocate(u16),
    #[error("locate {locate} already maps to {existing}, got {new}")]
    LocateConflict {
        locate: u16,
        existing: Symbol,
        new: Symbol,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum FeedError {
    #[error("malformed message at byte offset {offset}: {source}")]
    Malformed {
        offset: u64,
        source: MessageError,
    },
    #[error("truncated stream at byte offset {offset}")]
    TruncatedStream { offset: u64 },
    #[error("csv header mismatch: expected {expected:?}, found {found:?}")]
    SchemaMismatch { expected: String, found: String },
    #[error("csv parse error on line {line}: {message}")]
    Row { line: u64, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn be_u16(b: &[u8]) -> u16 {
    u16::from_be_bytes([b[0], b[1]])
}

fn be_u32(b: &[u8]) -> u32 {
    u32::from_be_bytes([b[0], b[1], b[2], b[3]])
}

fn be_u48(b: &[u8]) -> u64 {
    u64::from_be_bytes([0, 0, b[0], b[1], b[2], b[3], b[4], b[5]])
}

fn be_u64(b: &[u8]) -> u64 {
    u64::from_be_bytes([b[0], b[1], b[2], b[3], b[4], b[5], b[6], b[7]])
}

fn wire_price_to_ticks(raw: u32) -> Result<PriceTicks, MessageError> {
    if raw % WIRE_PRICE_PER_TICK != 0 {
        return Err(MessageError::SubTickPrice(raw));
    }
    let ticks = (raw / WIRE_PRICE_PER_TICK) as PriceTicks;
    if ticks <= 0 {
        return Err(MessageError::ZeroPrice);
    }
    Ok(ticks)
}

fn side_from_wire(b: u8) -> Result<Side, MessageError> {
    match b {
        b'B' => Ok(Side::Bid),
        b'S' => Ok(Side::Ask),
        other => Err(MessageError::BadSide(other)),
    }
}

fn need(raw: &RawMessage<'_>, n: usize) -> Result<(), MessageError> {
    if raw.payload.len() < n {
        Err(MessageError::TooShort {
            code: raw.kind as char,
            got: raw.payload.len(),
            need: n,
        })
    } else {
        Ok(())
    }
}

fn nonzero_shares(shares: u32) -> Result<u32, MessageError> {
    if shares == 0 {
        Err(MessageError::ZeroShares)
    } else {
        Ok(shares)
    }
}

/// Decode one framed message. Stateless: the symbol table maps locate codes
/// for messages that do not carry the stock field.
pub fn parse_message(raw: &RawMessage<'_>, table: &SymbolTable) -> Result<Decoded, MessageError> {
    match raw.kind {
        b'A' | b'F' => {
            // F carries a trailing market-participant id we ignore.
            let n = if raw.kind == b'A' { 35 } else { 39 };
            need(raw, n)?;
            let p = raw.payload;
            let symbol = Symbol::from_padded(p[23..31].try_into().unwrap())?;
            Ok(Decoded::Event(OrderEvent {
                timestamp: be_u48(&p[4..10]),
                symbol,
                order_id: be_u64(&p[10..18]),
                body: EventBody::Add {
                    side: side_from_wire(p[18])?,
                    shares: nonzero_shares(be_u32(&p[19..23]))?,
                    price: wire_price_to_ticks(be_u32(&p[31..35]))?,
                },
            }))
        }
        b'E' | b'C' => {
            let n = if raw.kind == b'E' { 30 } else { 35 };
            need(raw, n)?;
            let p = raw.payload;
            if raw.kind == b'C' && p[30] != b'Y' {
                // Non-displayed execution: does not touch the displayed book.
                return Ok(Decoded::Skip);
            }
            let locate = be_u16(&p[0..2]);
            let symbol = table.get(locate).ok_or(MessageError::UnknownLocate(locate))?;
            Ok(Decoded::Event(OrderEvent {
                timestamp: be_u48(&p[4..10]),
                symbol,
                order_id: be_u64(&p[10..18]),
                body: EventBody::Execute {
                    shares: nonzero_shares(be_u32(&p[18..22]))?,
                },
            }))
        }
        b'X' => {
            need(raw, 22)?;
            let p = raw.payload;
            let locate = be_u16(&p[0..2]);
            let symbol = table.get(locate).ok_or(MessageError::UnknownLocate(locate))?;
            Ok(Decoded::Event(OrderEvent {
                timestamp: be_u48(&p[4..10]),
                symbol,
                order_id: be_u64(&p[10..18]),
                body: EventBody::Cancel {
                    shares: nonzero_shares(be_u32(&p[18..22]))?,
                },
            }))
        }
        b'D' => {
            need(raw, 18)?;
            let p = raw.payload;
            let locate = be_u16(&p[0..2]);
            let symbol = table.get(locate).ok_or(MessageError::UnknownLocate(locate))?;
            Ok(Decoded::Event(OrderEvent {
                timestamp: be_u48(&p[4..10]),
                symbol,
                order_id: be_u64(&p[10..18]),
                body: EventBody::Delete,
            }))
        }
        b'U' => {
            need(raw, 34)?;
            let p = raw.payload;
            let locate = be_u16(&p[0..2]);
            let symbol = table.get(locate).ok_or(MessageError::UnknownLocate(locate))?;
            Ok(Decoded::Event(OrderEvent {
                timestamp: be_u48(&p[4..10]),
                symbol,
                order_id: be_u64(&p[10..18]),
                body: EventBody::Replace {
                    new_order_id: be_u64(&p[18..26]),
                    new_shares: nonzero_shares(be_u32(&p[26..30]))?,
                    new_price: wire_price_to_ticks(be_u32(&p[30..34]))?,
                },
            }))
        }
        b'R' => {
            need(raw, 18)?;
            let p = raw.payload;
            Ok(Decoded::Directory {
                locate: be_u16(&p[0..2]),
                symbol: Symbol::from_padded(p[10..18].try_into().unwrap())?,
            })
        }
        // Everything else (system events, trading status, cross trades,
        // hidden trades, imbalance, ...) does not alter the displayed book.
        _ => Ok(Decoded::Skip),
    }
}

/// Counts reported by a stream pass.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct ParseStats {
    /// Events delivered to the caller.
    pub parsed: u64,
    /// Supported-but-irrelevant or unsupported messages.
    pub skipped: u64,
    /// Events for symbols outside the requested universe.
    pub dropped: u64,
}

/// Single sequential pass over a framed byte stream, invoking `on_event` for
/// every decoded event whose symbol is in `universe` (or all, when `None`).
pub fn scan_stream(
    bytes: &[u8],
    universe: Option<&BTreeSet<Symbol>>,
    mut on_event: impl FnMut(OrderEvent),
) -> Result<ParseStats, FeedError> {
    let mut table = SymbolTable::new();
    let mut stats = ParseStats::default();
    let mut off: usize = 0;
    while off < bytes.len() {
        if bytes.len() - off < 2 {
            return Err(FeedError::TruncatedStream { offset: off as u64 });
        }
        let len = be_u16(&bytes[off..off + 2]) as usize;
        if len == 0 {
            return Err(FeedError::Malformed {
                offset: off as u64,
                source: MessageError::TooShort {
                    code: '\0',
                    got: 0,
                    need: 1,
                },
            });
        }
        if bytes.len() - off - 2 < len {
            return Err(FeedError::TruncatedStream { offset: off as u64 });
        }
        let raw = RawMessage {
            kind: bytes[off + 2],
            payload: &bytes[off + 3..off + 2 + len],
        };
        match parse_message(&raw, &table) {
            Ok(Decoded::Event(ev)) => {
                if let EventBody::Add { .. } = ev.body {
                    let locate = be_u16(&raw.payload[0..2]);
                    table.insert(locate, ev.symbol).map_err(|source| {
                        FeedError::Malformed {
                            offset: off as u64,
                            source,
                        }
                    })?;
                }
                if universe.is_none_or(|u| u.contains(&ev.symbol)) {
                    stats.parsed += 1;
                    on_event(ev);
                } else {
                    stats.dropped += 1;
                }
            }
            Ok(Decoded::Directory { locate, symbol }) => {
                table
                    .insert(locate, symbol)
                    .map_err(|source| FeedError::Malformed {
                        offset: off as u64,
                        source,
                    })?;
                stats.skipped += 1;
            }
            Ok(Decoded::Skip) => stats.skipped += 1,
            Err(source) => {
                return Err(FeedError::Malformed {
                    offset: off as u64,
                    source,
                })
            }
        }
        off += 2 + len;
    }
    Ok(stats)
}

/// Per-symbol, timestamp-ordered event sequences plus pass statistics.
#[derive(Debug, Default)]
pub struct ParsedFeed {
    pub partitions: BTreeMap<Symbol, Vec<OrderEvent>>,
    pub stats: ParseStats,
}

/// Decode a framed stream and partition events by symbol. Each partition is
/// timestamp-ordered; equal timestamps keep stream order.
pub fn parse_stream(
    bytes: &[u8],
    universe: Option<&BTreeSet<Symbol>>,
) -> Result<ParsedFeed, FeedError> {
    let mut partitions: BTreeMap<Symbol, Vec<OrderEvent>> = BTreeMap::new();
    let stats = scan_stream(bytes, universe, |ev| {
        partitions.entry(ev.symbol).or_default().push(ev);
    })?;
    for events in partitions.values_mut() {
        // stable: equal timestamps keep stream order
        events.sort_by_key(|e| e.timestamp);
    }
    Ok(ParsedFeed { partitions, stats })
}

pub const CSV_HEADER: &str =
    "timestamp_ns,symbol,kind,order_id,side,price_ticks,shares,new_order_id,new_price_ticks,new_shares";

/// Read events from the CSV fallback format. Semantics match the binary path:
/// the same events in either encoding yield identical sequences.
pub fn ingest_csv(reader: impl BufRead) -> Result<Vec<OrderEvent>, FeedError> {
    let mut lines = reader.lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    if header.trim_end() != CSV_HEADER {
        return Err(FeedError::SchemaMismatch {
            expected: CSV_HEADER.to_owned(),
            found: header,
        });
    }
    let mut events = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line_no = idx as u64 + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        events.push(parse_csv_row(&line).map_err(|message| FeedError::Row {
            line: line_no,
            message,
        })?);
    }
    Ok(events)
}

fn parse_csv_row(line: &str) -> Result<OrderEvent, String> {
    let fields: Vec<&str> = line.trim_end().split(',').collect();
    if fields.len() != 10 {
        return Err(format!("expected 10 fields, found {}", fields.len()));
    }
    let req = |i: usize, name: &str| -> Result<&str, String> {
        let f = fields[i];
        if f.is_empty() {
            Err(format!("missing field {name}"))
        } else {
            Ok(f)
        }
    };
    let num = |s: &str, name: &str| -> Result<u64, String> {
        s.parse::<u64>().map_err(|e| format!("bad {name}: {e}"))
    };
    let price = |s: &str, name: &str| -> Result<PriceTicks, String> {
        let p = s.parse::<PriceTicks>().map_err(|e| format!("bad {name}: {e}"))?;
        if p <= 0 {
            return Err(format!("{name} must be positive"));
        }
        Ok(p)
    };
    let shares = |s: &str, name: &str| -> Result<u32, String> {
        let v = s.parse::<u32>().map_err(|e| format!("bad {name}: {e}"))?;
        if v == 0 {
            return Err(format!("{name} must be positive"));
        }
        Ok(v)
    };

    let timestamp = num(req(0, "timestamp_ns")?, "timestamp_ns")?;
    let symbol = Symbol::new(req(1, "symbol")?).map_err(|e| e.to_string())?;
    let order_id = num(req(3, "order_id")?, "order_id")?;
    let body = match req(2, "kind")? {
        "add" => EventBody::Add {
            side: match req(4, "side")? {
                "bid" => Side::Bid,
                "ask" => Side::Ask,
                other => return Err(format!("bad side: {other:?}")),
            },
            price: price(req(5, "price_ticks")?, "price_ticks")?,
            shares: shares(req(6, "shares")?, "shares")?,
        },
        "execute" => EventBody::Execute {
            shares: shares(req(6, "shares")?, "shares")?,
        },
        "cancel" => EventBody::Cancel {
            shares: shares(req(6, "shares")?, "shares")?,
        },
        "delete" => EventBody::Delete,
        "replace" => EventBody::Replace {
            new_order_id: num(req(7, "new_order_id")?, "new_order_id")?,
            new_price: price(req(8, "new_price_ticks")?, "new_price_ticks")?,
            new_shares: shares(req(9, "new_shares")?, "new_shares")?,
        },
        other => return Err(format!("bad kind: {other:?}")),
    };
    Ok(OrderEvent {
        timestamp,
        symbol,
        order_id,
        body,
    })
}

/// Write events in the CSV fallback format, header included.
pub fn write_csv(events: &[OrderEvent], mut w: impl Write) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for ev in events {
        write_csv_row(ev, &mut w)?;
    }
    Ok(())
}

pub fn write_csv_row(ev: &OrderEvent, w: &mut impl Write) -> io::Result<()> {
    let ts = ev.timestamp;
    let sym = ev.symbol;
    let id = ev.order_id;
    match ev.body {
        EventBody::Add { side, price, shares } => {
            writeln!(w, "{ts},{sym},add,{id},{side},{price},{shares},,,")
        }
        EventBody::Execute { shares } => writeln!(w, "{ts},{sym},execute,{id},,,{shares},,,"),
        EventBody::Cancel { shares } => writeln!(w, "{ts},{sym},cancel,{id},,,{shares},,,"),
        EventBody::Delete => writeln!(w, "{ts},{sym},delete,{id},,,,,,"),
        EventBody::Replace {
            new_order_id,
            new_price,
            new_shares,
        } => writeln!(
            w,
            "{ts},{sym},replace,{id},,,,{new_order_id},{new_price},{new_shares}"
        ),
    }
}

/// Binary layout helpers shared with the synthetic-stream encoder.
pub(crate) mod wire {
    use super::*;

    fn frame(buf: &mut Vec<u8>, code: u8, payload: &[u8]) {
        let len = (payload.len() + 1) as u16;
        buf.extend_from_slice(&len.to_be_bytes());
        buf.push(code);
        buf.extend_from_slice(payload);
    }

    fn header(payload: &mut Vec<u8>, locate: u16, timestamp: Nanos) {
        payload.extend_from_slice(&locate.to_be_bytes());
        payload.extend_from_slice(&0u16.to_be_bytes()); // tracking number
        payload.extend_from_slice(&timestamp.to_be_bytes()[2..8]);
    }

    fn ticks_to_wire(price: PriceTicks) -> u32 {
        (price as u32) * WIRE_PRICE_PER_TICK
    }

    /// Emit a stock-directory message binding `locate` to `symbol`.
    pub fn encode_directory(buf: &mut Vec<u8>, locate: u16, symbol: Symbol) {
        let mut p = Vec::with_capacity(38);
        header(&mut p, locate, 0);
        p.extend_from_slice(&symbol.padded());
        p.resize(38, 0);
        frame(buf, b'R', &p);
    }

    /// Emit one framed message for `ev`.
    pub fn encode_event(buf: &mut Vec<u8>, ev: &OrderEvent, locate: u16) {
        let mut p = Vec::with_capacity(40);
        header(&mut p, locate, ev.timestamp);
        p.extend_from_slice(&ev.order_id.to_be_bytes());
        match ev.body {
            EventBody::Add { side, price, shares } => {
                p.push(match side {
                    Side::Bid => b'B',
                    Side::Ask => b'S',
                });
                p.extend_from_slice(&shares.to_be_bytes());
                p.extend_from_slice(&ev.symbol.padded());
                p.extend_from_slice(&ticks_to_wire(price).to_be_bytes());
                frame(buf, b'A', &p);
            }
            EventBody::Execute { shares } => {
                p.extend_from_slice(&shares.to_be_bytes());
                p.extend_from_slice(&0u64.to_be_bytes()); // match number
                frame(buf, b'E', &p);
            }
            EventBody::Cancel { shares } => {
                p.extend_from_slice(&shares.to_be_bytes());
                frame(buf, b'X', &p);
            }
            EventBody::Delete => frame(buf, b'D', &p),
            EventBody::Replace {
                new_order_id,
                new_price,
                new_shares,
            } => {
                p.extend_from_slice(&new_order_id.to_be_bytes());
                p.extend_from_slice(&new_shares.to_be_bytes());
                p.extend_from_slice(&ticks_to_wire(new_price).to_be_bytes());
                frame(buf, b'U', &p);
            }
        }
    }
}
