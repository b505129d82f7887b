//! Time source abstraction so wall-clock fitness can be measured without std.

/// Monotonic clock returning seconds from an arbitrary origin.
pub trait Clock {
    fn now(&self) -> f64;
}

/// Clock that never advances. Wall-time measurements read as zero and
/// deadlines never expire.
#[derive(Debug, Clone, Copy, Default)]
pub struct NullClock;

impl Clock for NullClock {
    fn now(&self) -> f64 {
        0.0
    }
}
