//! Shared domain types: symbols, timestamps, prices, sessions.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Integer price in ticks of 0.01 currency units.
pub type PriceTicks = i64;

/// One tick in currency units.
pub const TICK: f64 = 0.01;

/// Nanoseconds since midnight.
pub type Nanos = u64;

pub const NANOS_PER_SEC: u64 = 1_000_000_000;

/// Side of the book a limit order rests on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Side {
    Bid,
    Ask,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Bid => Side::Ask,
            Side::Ask => Side::Bid,
        }
    }

    /// Sign of price change for an event on this side: +1 ask, -1 bid.
    pub fn sign(self) -> i8 {
        match self {
            Side::Bid => -1,
            Side::Ask => 1,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Bid => write!(f, "bid"),
            Side::Ask => write!(f, "ask"),
        }
    }
}

/// Exact midpoint price, stored as bid + ask in ticks (twice the midpoint,
/// so half-tick midpoints stay integers).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Midpoint(i64);

impl Midpoint {
    pub fn from_quotes(bid: PriceTicks, ask: PriceTicks) -> Midpoint {
        Midpoint(bid + ask)
    }

    /// Twice the midpoint in ticks; always an exact integer.
    pub fn doubled_ticks(self) -> i64 {
        self.0
    }

    pub fn ticks(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub fn currency(self) -> f64 {
        self.0 as f64 * TICK / 2.0
    }
}

impl fmt::Display for Midpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}.5", self.0 / 2)
        }
    }
}

/// Up-to-8-character ticker, space padded like the wire format.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol([u8; 8]);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid symbol {0:?}: must be 1-8 printable ASCII characters")]
pub struct InvalidSymbol(pub String);

impl Symbol {
    pub fn new(s: &str) -> Result<Symbol, InvalidSymbol> {
        let t = s.trim();
        if t.is_empty() || t.len() > 8 || !t.bytes().all(|b| b.is_ascii_graphic()) {
            return Err(InvalidSymbol(s.to_owned()));
        }
        let mut bytes = [b' '; 8];
        bytes[..t.len()].copy_from_slice(t.as_bytes());
        Ok(Symbol(bytes))
    }

    /// Decode the space-padded 8-byte field used on the wire.
    pub fn from_padded(bytes: [u8; 8]) -> Result<Symbol, InvalidSymbol> {
        let end = bytes.iter().rposition(|&b| b != b' ').map_or(0, |i| i + 1);
        let s = std::str::from_utf8(&bytes[..end])
            .map_err(|_| InvalidSymbol(format!("{bytes:?}")))?;
        Symbol::new(s)
    }

    pub fn padded(&self) -> [u8; 8] {
        self.0
    }

    pub fn as_str(&self) -> &str {
        let end = self.0.iter().rposition(|&b| b != b' ').map_or(0, |i| i + 1);
        // constructor guarantees ASCII
        std::str::from_utf8(&self.0[..end]).unwrap()
    }
}

impl FromStr for Symbol {
    type Err = InvalidSymbol;
    fn from_str(s: &str) -> Result<Symbol, InvalidSymbol> {
        Symbol::new(s)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Symbol({})", self.as_str())
    }
}

impl Serialize for Symbol {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Symbol {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Symbol, D::Error> {
        let s = String::deserialize(de)?;
        Symbol::new(&s).map_err(serde::de::Error::custom)
    }
}

/// Intraday analysis window, nanoseconds since midnight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub open: Nanos,
    pub close: Nanos,
}

impl Session {
    pub fn new(open: Nanos, close: Nanos) -> Session {
        assert!(open < close, "session open must precede close");
        Session { open, close }
    }

    /// Parse "HH:MM" into nanoseconds since midnight.
    pub fn parse_time(s: &str) -> Option<Nanos> {
        let (h, m) = s.split_once(':')?;
        let h: u64 = h.parse().ok()?;
        let m: u64 = m.parse().ok()?;
        if h > 23 || m > 59 {
            return None;
        }
        Some((h * 3600 + m * 60) * NANOS_PER_SEC)
    }

    pub fn contains(&self, t: Nanos) -> bool {
        self.open <= t && t <= self.close
    }

    pub fn duration(&self) -> Nanos {
        self.close - self.open
    }
}

/// 9:40 to 15:50, skipping the open and close auctions.
impl Default for Session {
    fn default() -> Session {
        Session {
            open: (9 * 3600 + 40 * 60) * NANOS_PER_SEC,
            close: (15 * 3600 + 50 * 60) * NANOS_PER_SEC,
        }
    }
}
