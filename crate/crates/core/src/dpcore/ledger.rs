//! Append-only record of every privacy-budget spend.
//!
//! Each entry names the table, the tree path of the node that spent, the
//! mechanism, and the epsilon consumed. Composition over a finished tree is
//! evaluated separately (max across sum-node children, sum elsewhere).

use serde::{Deserialize, Serialize};

/// Where a spend happened: table plus root-relative tree path ("" for the
/// root, then one 'L'/'R' per level).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scope {
    pub table: String,
    pub path: String,
}

impl Scope {
    pub fn root(table: &str) -> Self {
        Scope {
            table: table.to_string(),
            path: String::new(),
        }
    }

    pub fn left(&self) -> Scope {
        self.extend('L')
    }

    pub fn right(&self) -> Scope {
        self.extend('R')
    }

    fn extend(&self, step: char) -> Scope {
        let mut path = self.path.clone();
        path.push(step);
        Scope {
            table: self.table.clone(),
            path,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub table: String,
    pub path: String,
    pub mechanism: String,
    pub epsilon: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BudgetLedger {
    entries: Vec<LedgerEntry>,
}

impl BudgetLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, scope: &Scope, mechanism: &str, epsilon: f64) {
        debug_assert!(epsilon >= 0.0 && epsilon.is_finite());
        self.entries.push(LedgerEntry {
            table: scope.table.clone(),
            path: scope.path.clone(),
            mechanism: mechanism.to_string(),
            epsilon,
        });
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Appends another ledger's entries, preserving order.
    pub fn merge(&mut self, other: BudgetLedger) {
        self.entries.extend(other.entries);
    }

    /// JSON audit trail: a list of `{table, path, mechanism, epsilon}`.
    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(&self.entries)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scopes_extend_paths() {
        let root = Scope::root("t");
        assert_eq!(root.path, "");
        assert_eq!(root.left().path, "L");
        assert_eq!(root.left().right().path, "LR");
    }

    #[test]
    fn merge_preserves_order() {
        let mut a = BudgetLedger::new();
        a.record(&Scope::root("t"), "m1", 0.1);
        let mut b = BudgetLedger::new();
        b.record(&Scope::root("t"), "m2", 0.2);
        a.merge(b);
        assert_eq!(a.entries()[0].mechanism, "m1");
        assert_eq!(a.entries()[1].mechanism, "m2");
    }

    #[test]
    fn audit_json_lists_entries() {
        let mut ledger = BudgetLedger::new();
        ledger.record(&Scope::root("t"), "histogram", 0.5);
        let json = ledger.to_json().unwrap();
        let parsed: Vec<LedgerEntry> = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed, ledger.entries());
    }
}
