//! Enumeration budgets for the exhaustive oracles.
//!
//! Every exhaustive search is gated by an explicit budget and fails hard with
//! [`BudgetExceeded`] instead of silently sampling.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("budget exceeded: {what} needs {needed} but the cap is {cap}")]
pub struct BudgetExceeded {
    pub what: String,
    pub needed: u128,
    pub cap: u128,
}

/// Global cap on enumeration sizes, in "items visited".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub cap: u128,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { cap: 1 << 22 }
    }
}

impl Budget {
    pub fn new(cap: u128) -> Budget {
        Budget { cap }
    }

    pub fn check(&self, what: &str, needed: u128) -> Result<(), BudgetExceeded> {
        if needed > self.cap {
            Err(BudgetExceeded { what: what.to_string(), needed, cap: self.cap })
        } else {
            Ok(())
        }
    }

    /// q^k as u128, saturating.
    pub fn power(q: u64, k: usize) -> u128 {
        let mut acc: u128 = 1;
        for _ in 0..k {
            acc = acc.saturating_mul(q as u128);
        }
        acc
    }
}
