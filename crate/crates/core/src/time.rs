use std::fmt;
use std::ops::{Add, AddAssign};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::RuntimeError;

/// Integer nanoseconds since session start.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Timestamp(u64);

impl Timestamp {
    pub const ZERO: Timestamp = Timestamp(0);

    pub const fn from_nanos(nanos: u64) -> Self {
        Self(nanos)
    }

    pub fn from_duration(d: Duration) -> Self {
        Self(d.as_nanos() as u64)
    }

    pub fn from_secs_f64(secs: f64) -> Self {
        Self((secs.max(0.0) * 1e9).round() as u64)
    }

    pub const fn as_nanos(self) -> u64 {
        self.0
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 * 1e-9
    }

    pub fn as_duration(self) -> Duration {
        Duration::from_nanos(self.0)
    }

    /// `self - earlier`, or `None` if `earlier` is later than `self`.
    pub fn checked_since(self, earlier: Timestamp) -> Option<Duration> {
        self.0.checked_sub(earlier.0).map(Duration::from_nanos)
    }

    pub fn saturating_since(self, earlier: Timestamp) -> Duration {
        Duration::from_nanos(self.0.saturating_sub(earlier.0))
    }
}

impl Add<Duration> for Timestamp {
    type Output = Timestamp;

    fn add(self, rhs: Duration) -> Timestamp {
        Timestamp(self.0 + rhs.as_nanos() as u64)
    }
}

impl AddAssign<Duration> for Timestamp {
    fn add_assign(&mut self, rhs: Duration) {
        self.0 += rhs.as_nanos() as u64;
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}ns", self.0)
    }
}

/// Period for a rate in Hz, rounded up to whole nanoseconds.
///
/// Rounding up keeps the number of slots in `[0, T)` at `floor(T * hz)` for
/// the rates used here (e.g. 120 Hz over 10 s gives 1200 slots, not 1201).
pub fn period_from_hz(hz: f64) -> Duration {
    assert!(hz > 0.0 && hz.is_finite(), "rate must be positive, got {hz}");
    Duration::from_nanos((1e9 / hz).ceil() as u64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClockMode {
    Simulated,
    Wall,
}

/// Session clock. Simulated time only moves through [`Clock::step`] and
/// [`Clock::advance_to`]; wall time follows the monotonic OS clock.
#[derive(Clone, Debug)]
pub struct Clock {
    mode: ClockMode,
    now: Timestamp,
    sim_step: Duration,
    origin: Option<Instant>,
}

impl Clock {
    pub fn simulated(sim_step: Duration) -> Self {
        Self {
            mode: ClockMode::Simulated,
            now: Timestamp::ZERO,
            sim_step,
            origin: None,
        }
    }

    pub fn wall() -> Self {
        Self {
            mode: ClockMode::Wall,
            now: Timestamp::ZERO,
            sim_step: Duration::ZERO,
            origin: None,
        }
    }

    pub fn new(mode: ClockMode) -> Self {
        match mode {
            ClockMode::Simulated => Self::simulated(Duration::from_millis(1)),
            ClockMode::Wall => Self::wall(),
        }
    }

    pub fn mode(&self) -> ClockMode {
        self.mode
    }

    pub fn sim_step(&self) -> Duration {
        self.sim_step
    }

    /// Marks the start of a wall-clock session; a no-op in simulated mode.
    pub fn start(&mut self) -> Instant {
        let origin = Instant::now();
        if self.mode == ClockMode::Wall {
            self.origin = Some(origin);
        }
        origin
    }

    pub fn now(&self) -> Timestamp {
        match (self.mode, self.origin) {
            (ClockMode::Wall, Some(origin)) => Timestamp::from_duration(origin.elapsed()),
            _ => self.now,
        }
    }

    pub fn step(&mut self) -> Result<Timestamp, RuntimeError> {
        if self.mode != ClockMode::Simulated {
            return Err(RuntimeError::Clock("step() on a wall clock".into()));
        }
        self.now += self.sim_step;
        Ok(self.now)
    }

    pub fn advance_to(&mut self, t: Timestamp) -> Result<(), RuntimeError> {
        if self.mode != ClockMode::Simulated {
            return Err(RuntimeError::Clock("advance_to() on a wall clock".into()));
        }
        if t < self.now {
            return Err(RuntimeError::Clock(format!(
                "cannot move simulated time back from {} to {}",
                self.now, t
            )));
        }
        self.now = t;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_rates_give_exact_slot_counts() {
        let ten_s = 10_000_000_000u64;
        for (hz, expected) in [(15.0, 150u64), (500.0, 5000), (120.0, 1200), (48.0, 480)] {
            let p = period_from_hz(hz).as_nanos() as u64;
            assert_eq!(ten_s.div_ceil(p), expected, "{hz} Hz");
        }
    }

    #[test]
    fn simulated_clock_only_moves_on_request() {
        let mut clock = Clock::simulated(Duration::from_millis(2));
        assert_eq!(clock.now(), Timestamp::ZERO);
        clock.step().unwrap();
        clock.step().unwrap();
        assert_eq!(clock.now(), Timestamp::from_nanos(4_000_000));
        clock.advance_to(Timestamp::from_nanos(9_000_000)).unwrap();
        assert!(clock.advance_to(Timestamp::from_nanos(1)).is_err());
    }

    #[test]
    fn wall_clock_rejects_stepping() {
        let mut clock = Clock::wall();
        clock.start();
        assert!(clock.step().is_err());
    }
}
