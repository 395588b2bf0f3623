//! Counter arithmetic shared by both protocol variants.
//!
//! In unbounded mode counters are plain non-negative integers. In bounded mode
//! `otsn` and `ctsn` live in `0..=N²` and every addition wraps modulo `N² + 1`;
//! `sn` is a single bit.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Which variant of the protocol is running.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeKind {
    Unbounded,
    Bounded,
}

/// Protocol variant plus the process count it was instantiated for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mode {
    pub kind: ModeKind,
    pub n_procs: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CounterError {
    #[error("counter would become negative ({a} + {d})")]
    Negative { a: u64, d: i64 },
    #[error("counter overflow ({a} + {d})")]
    Overflow { a: u64, d: i64 },
    #[error("value {value} outside bounded counter domain 0..={max}")]
    OutOfDomain { value: u64, max: u64 },
}

impl Mode {
    pub fn new(kind: ModeKind, n_procs: usize) -> Self {
        assert!(n_procs >= 1, "a system needs at least one process");
        Mode { kind, n_procs }
    }

    pub fn unbounded(n_procs: usize) -> Self {
        Self::new(ModeKind::Unbounded, n_procs)
    }

    pub fn bounded(n_procs: usize) -> Self {
        Self::new(ModeKind::Bounded, n_procs)
    }

    pub fn is_bounded(&self) -> bool {
        self.kind == ModeKind::Bounded
    }

    /// Size of the `otsn`/`ctsn` domain, `N² + 1`, or `None` when unbounded.
    pub fn counter_modulus(&self) -> Option<u64> {
        match self.kind {
            ModeKind::Unbounded => None,
            ModeKind::Bounded => {
                let n = self.n_procs as u64;
                Some(n * n + 1)
            }
        }
    }

    /// Largest legal `otsn`/`ctsn` value in bounded mode (`N²`).
    pub fn counter_max(&self) -> Option<u64> {
        self.counter_modulus().map(|m| m - 1)
    }

    /// Window half-width used by the unison actions: `N`.
    pub fn window(&self) -> u64 {
        self.n_procs as u64
    }

    /// `a ⊕ d` (or `a ⊖ |d|` for negative `d`).
    pub fn wrap_add(&self, a: u64, d: i64) -> Result<u64, CounterError> {
        match self.counter_modulus() {
            None => {
                if d >= 0 {
                    a.checked_add(d as u64).ok_or(CounterError::Overflow { a, d })
                } else {
                    a.checked_sub(d.unsigned_abs())
                        .ok_or(CounterError::Negative { a, d })
                }
            }
            Some(m) => {
                if a >= m {
                    return Err(CounterError::OutOfDomain { value: a, max: m - 1 });
                }
                let step = (d.rem_euclid(m as i64)) as u64;
                Ok((a + step) % m)
            }
        }
    }

    /// Membership of `x` in the circular interval `[base .. base ⊕ length]`.
    ///
    /// In unbounded mode this is the ordinary integer interval.
    pub fn in_window(&self, x: u64, base: u64, length: u64) -> bool {
        match self.counter_modulus() {
            None => x >= base && x - base <= length,
            Some(m) => {
                if length + 1 >= m {
                    return true;
                }
                let offset = (x % m + m - base % m) % m;
                offset <= length
            }
        }
    }

    /// `sn + 1`: increment when unbounded, bit flip when bounded.
    pub fn next_sn(&self, sn: u64) -> u64 {
        match self.kind {
            ModeKind::Unbounded => sn + 1,
            ModeKind::Bounded => (sn + 1) % 2,
        }
    }

    /// Check that a counter value lies in the mode's `otsn`/`ctsn` domain.
    pub fn check_counter(&self, value: u64) -> Result<(), CounterError> {
        match self.counter_max() {
            Some(max) if value > max => Err(CounterError::OutOfDomain { value, max }),
            _ => Ok(()),
        }
    }

    /// Check that a sequence number lies in the mode's `sn` domain.
    pub fn check_sn(&self, value: u64) -> Result<(), CounterError> {
        match self.kind {
            ModeKind::Bounded if value > 1 => Err(CounterError::OutOfDomain { value, max: 1 }),
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_add_bounded_wraps_both_ways() {
        let m = Mode::bounded(3);
        assert_eq!(m.counter_modulus(), Some(10));
        assert_eq!(m.wrap_add(9, 1).unwrap(), 0);
        assert_eq!(m.wrap_add(0, -1).unwrap(), 9);
        assert_eq!(m.wrap_add(4, -13).unwrap(), 1);
        assert!(m.wrap_add(10, 0).is_err());
    }

    #[test]
    fn wrap_add_unbounded_is_plain_addition() {
        let m = Mode::unbounded(3);
        assert_eq!(m.wrap_add(5, 1).unwrap(), 6);
        assert_eq!(m.wrap_add(5, -5).unwrap(), 0);
        assert_eq!(
            m.wrap_add(0, -1),
            Err(CounterError::Negative { a: 0, d: -1 })
        );
    }

    #[test]
    fn in_window_circular() {
        let m = Mode::bounded(3);
        assert!(m.in_window(1, 9, 3));
        assert!(m.in_window(9, 9, 3));
        assert!(m.in_window(2, 9, 3));
        assert!(!m.in_window(3, 9, 3));
        assert!(!m.in_window(5, 9, 3));
        assert!(m.in_window(9, 9, 0));
        assert!(!m.in_window(0, 9, 0));
    }

    #[test]
    fn in_window_unbounded_interval() {
        let m = Mode::unbounded(3);
        assert!(m.in_window(4, 2, 3));
        assert!(m.in_window(5, 2, 3));
        assert!(!m.in_window(6, 2, 3));
        assert!(!m.in_window(1, 2, 3));
    }

    #[test]
    fn sn_bit_in_bounded_mode() {
        assert_eq!(Mode::bounded(4).next_sn(1), 0);
        assert_eq!(Mode::bounded(4).next_sn(0), 1);
        assert_eq!(Mode::unbounded(4).next_sn(7), 8);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn bounded_wrap_stays_in_domain(n in 1usize..8, a in 0u64..65, d in -200i64..200) {
                let m = Mode::bounded(n);
                let a = a % m.counter_modulus().unwrap();
                let r = m.wrap_add(a, d).unwrap();
                prop_assert!(r <= m.counter_max().unwrap());
                prop_assert_eq!(m.wrap_add(r, -d).unwrap(), a);
            }

            #[test]
            fn window_membership_matches_enumeration(n in 1usize..6, base in 0u64..37, len in 0u64..6, x in 0u64..37) {
                let m = Mode::bounded(n);
                let modulus = m.counter_modulus().unwrap();
                let (base, x) = (base % modulus, x % modulus);
                let len = len.min(n as u64);
                let members: Vec<u64> = (0..=len as i64).map(|i| m.wrap_add(base, i).unwrap()).collect();
                prop_assert_eq!(m.in_window(x, base, len), members.contains(&x));
            }
        }
    }
}
