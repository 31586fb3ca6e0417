//! Virtual time in integer picoseconds.
//!
//! Picosecond ticks keep every default serialization time exact: a 4096 B
//! packet on a 100 Gb/s link takes 327 680 ps.

use std::fmt;
use std::ops::{Add, AddAssign, Sub};

use serde::{Deserialize, Serialize};

#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct SimTime(pub u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);
    pub const MAX: SimTime = SimTime(u64::MAX);

    pub const fn from_ps(ps: u64) -> Self {
        SimTime(ps)
    }

    pub const fn from_ns(ns: u64) -> Self {
        SimTime(ns * 1_000)
    }

    pub const fn from_us(us: u64) -> Self {
        SimTime(us * 1_000_000)
    }

    /// Rounds to the nearest picosecond.
    pub fn from_us_f64(us: f64) -> Self {
        SimTime((us * 1e6).round().max(0.0) as u64)
    }

    pub const fn as_ps(self) -> u64 {
        self.0
    }

    pub fn as_ns_f64(self) -> f64 {
        self.0 as f64 / 1e3
    }

    pub fn as_us_f64(self) -> f64 {
        self.0 as f64 / 1e6
    }

    pub fn as_ms_f64(self) -> f64 {
        self.0 as f64 / 1e9
    }

    pub fn saturating_sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0.saturating_sub(rhs.0))
    }
}

impl Add for SimTime {
    type Output = SimTime;
    fn add(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 + rhs.0)
    }
}

impl AddAssign for SimTime {
    fn add_assign(&mut self, rhs: SimTime) {
        self.0 += rhs.0;
    }
}

impl Sub for SimTime {
    type Output = SimTime;
    fn sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 - rhs.0)
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.3}us", self.as_us_f64())
    }
}

/// Link bandwidth in bits per second.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Bandwidth(pub u64);

impl Bandwidth {
    pub const fn gbps(g: u64) -> Self {
        Bandwidth(g * 1_000_000_000)
    }

    pub fn from_gbps_f64(g: f64) -> Self {
        Bandwidth((g * 1e9).round() as u64)
    }

    pub fn bps(self) -> u64 {
        self.0
    }

    pub fn as_gbps(self) -> f64 {
        self.0 as f64 / 1e9
    }

    /// Serialization delay of `bytes`, rounded up to the next picosecond.
    pub fn tx_time(self, bytes: u64) -> SimTime {
        assert!(self.0 > 0, "zero-rate link cannot serialize");
        let num = bytes as u128 * 8 * 1_000_000_000_000u128;
        let den = self.0 as u128;
        SimTime(num.div_ceil(den) as u64)
    }

    pub fn scaled(self, factor: f64) -> Bandwidth {
        Bandwidth((self.0 as f64 * factor).round() as u64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_packet_serialization_is_exact() {
        assert_eq!(Bandwidth::gbps(100).tx_time(4096), SimTime(327_680));
        assert_eq!(Bandwidth::gbps(10).tx_time(4096), SimTime(3_276_800));
        assert_eq!(Bandwidth::gbps(100).tx_time(64), SimTime(5_120));
    }

    #[test]
    fn tx_time_rounds_up() {
        // 1 byte at 3 bps = 8/3 s
        let t = Bandwidth(3).tx_time(1);
        assert_eq!(t.0, 2_666_666_666_667);
    }
}
