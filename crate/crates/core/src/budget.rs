//! Exploration limits shared by the decision routes.

use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Budget {
    /// states or markings held by a forward search
    pub markings: usize,
    pub km_nodes: usize,
    /// expansions allowed to one co-reachability or pump query
    pub frontier: usize,
    pub oracle_len: usize,
    pub oracle_card: usize,
    pub falsify_len: usize,
    /// largest cap tried by the counter abstraction
    pub abstraction_k: u32,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            markings: 500_000,
            km_nodes: 200_000,
            frontier: 100_000,
            oracle_len: 8,
            oracle_card: 200_000,
            falsify_len: 6,
            abstraction_k: 3,
        }
    }
}

impl Budget {
    pub fn profile(name: &str) -> Option<Budget> {
        match name {
            "default" => Some(Budget::default()),
            "ci" => Some(Budget {
                markings: 100_000,
                km_nodes: 50_000,
                frontier: 20_000,
                abstraction_k: 2,
                ..Budget::default()
            }),
            "deep" => Some(Budget {
                markings: 5_000_000,
                km_nodes: 2_000_000,
                frontier: 1_000_000,
                oracle_card: 2_000_000,
                falsify_len: 7,
                abstraction_k: 5,
                ..Budget::default()
            }),
            _ => None,
        }
    }

    /// `SP_BUDGET_PROFILE`, falling back to the default profile.
    pub fn from_env() -> Budget {
        std::env::var("SP_BUDGET_PROFILE")
            .ok()
            .and_then(|p| Budget::profile(p.trim()))
            .unwrap_or_default()
    }

    pub fn oracle_caps(&self) -> crate::oracle::OracleCaps {
        crate::oracle::OracleCaps { max_len: self.oracle_len, max_card: self.oracle_card }
    }

    /// Sets one field from its key-value name.
    pub fn set(&mut self, key: &str, value: usize) -> bool {
        match key {
            "markings" => self.markings = value,
            "km_nodes" => self.km_nodes = value,
            "frontier" => self.frontier = value,
            "oracle_len" => self.oracle_len = value,
            "oracle_card" => self.oracle_card = value,
            "falsify_len" => self.falsify_len = value,
            "abstraction_k" => self.abstraction_k = value as u32,
            _ => return false,
        }
        true
    }

    pub fn entries(&self) -> Vec<(&'static str, usize)> {
        vec![
            ("markings", self.markings),
            ("km_nodes", self.km_nodes),
            ("frontier", self.frontier),
            ("oracle_len", self.oracle_len),
            ("oracle_card", self.oracle_card),
            ("falsify_len", self.falsify_len),
            ("abstraction_k", self.abstraction_k as usize),
        ]
    }
}

impl fmt::Display for Budget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries().iter().map(|(k, v)| format!("{k}={v}")).collect();
        write!(f, "{}", parts.join(" "))
    }
}
