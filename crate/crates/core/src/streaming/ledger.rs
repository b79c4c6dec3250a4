use crate::error::{Error, Result};

/// Bit-exact account of a streaming algorithm's live state.
///
/// State is grouped into named slots; the live footprint is the sum of slot
/// sizes. Every growth is checked against the optional budget before it is
/// applied, so a failed charge leaves the ledger unchanged.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MemoryLedger {
    slots: Vec<(&'static str, u64)>,
    live_bits: u64,
    peak_bits: u64,
    budget_bits: Option<u64>,
}

impl MemoryLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_budget(budget_bits: u64) -> Self {
        Self {
            budget_bits: Some(budget_bits),
            ..Self::default()
        }
    }

    pub fn live_bits(&self) -> u64 {
        self.live_bits
    }

    pub fn peak_bits(&self) -> u64 {
        self.peak_bits
    }

    pub fn budget_bits(&self) -> Option<u64> {
        self.budget_bits
    }

    pub fn set_budget(&mut self, budget_bits: Option<u64>) {
        self.budget_bits = budget_bits;
    }

    pub fn slot_bits(&self, slot: &str) -> u64 {
        self.slots
            .iter()
            .find(|(name, _)| *name == slot)
            .map_or(0, |(_, b)| *b)
    }

    /// Sets the footprint of `slot` to exactly `bits`.
    pub fn set(&mut self, slot: &'static str, bits: u64) -> Result<()> {
        let current = self.slot_bits(slot);
        if bits > current {
            let would_be = self.live_bits + (bits - current);
            if let Some(budget) = self.budget_bits {
                if would_be > budget {
                    return Err(Error::BudgetExceeded {
                        slot,
                        requested: bits - current,
                        would_be,
                        budget,
                    });
                }
            }
        }
        self.live_bits = self.live_bits - current + bits;
        self.peak_bits = self.peak_bits.max(self.live_bits);
        match self.slots.iter_mut().find(|(name, _)| *name == slot) {
            Some(entry) => entry.1 = bits,
            None => self.slots.push((slot, bits)),
        }
        Ok(())
    }

    /// Grows `slot` by `bits`.
    pub fn charge(&mut self, slot: &'static str, bits: u64) -> Result<()> {
        let current = self.slot_bits(slot);
        self.set(slot, current + bits)
    }

    /// Frees `slot` entirely.
    pub fn release(&mut self, slot: &'static str) {
        self.set(slot, 0).expect("shrinking never exceeds the budget");
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tracks_live_and_peak() {
        let mut l = MemoryLedger::new();
        l.charge("a", 10).unwrap();
        l.charge("b", 5).unwrap();
        l.charge("a", 3).unwrap();
        assert_eq!(l.live_bits(), 18);
        l.release("a");
        assert_eq!(l.live_bits(), 5);
        assert_eq!(l.peak_bits(), 18);
        l.set("b", 2).unwrap();
        assert_eq!(l.live_bits(), 2);
        assert_eq!(l.slot_bits("b"), 2);
        assert_eq!(l.slot_bits("missing"), 0);
    }

    #[test]
    fn budget_is_enforced_atomically() {
        let mut l = MemoryLedger::with_budget(16);
        l.charge("a", 16).unwrap();
        let err = l.charge("b", 1).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { would_be: 17, budget: 16, .. }));
        assert_eq!(l.live_bits(), 16);
        assert_eq!(l.slot_bits("b"), 0);
        l.set("a", 8).unwrap();
        l.charge("b", 8).unwrap();
        assert_eq!(l.peak_bits(), 16);
    }
}
