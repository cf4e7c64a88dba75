use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

use super::Budget;
use crate::functional::FiniteSeq;
use crate::num::{fmt_rational, Nat};

/// One expanded node of the recursion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeRecord {
    pub sigma: FiniteSeq,
    pub secured: bool,
    /// `N(σ)`
    pub value: Nat,
    /// `c` for unsecured nodes.
    pub iteration_count: Option<Nat>,
    /// `n_0, n_1, …` as computed; stops early when the chain starts cycling.
    pub chain: Vec<Nat>,
    /// Index the chain cycles back to, when it does.
    pub cycle_from: Option<usize>,
}

/// Result of a bound computation.
///
/// `nodes` holds the distinct nodes that were expanded; sequences answered
/// from the memo table are not repeated. `nodes_visited` and `max_depth` are
/// logical, as in the plain recursion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundTrace {
    pub expr: String,
    pub budget: Budget,
    pub schedule: String,
    pub m_prime: Nat,
    pub nodes_visited: Nat,
    pub max_depth: usize,
    pub records_truncated: bool,
    pub nodes: Vec<NodeRecord>,
}

fn strings(v: &[Nat]) -> Vec<String> {
    v.iter().map(|n| n.to_string()).collect()
}

impl Serialize for NodeRecord {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("NodeRecord", 6)?;
        st.serialize_field("sigma", &strings(self.sigma.entries()))?;
        st.serialize_field("secured", &self.secured)?;
        st.serialize_field("value", &self.value.to_string())?;
        st.serialize_field("iteration_count", &self.iteration_count.as_ref().map(|c| c.to_string()))?;
        st.serialize_field("chain", &strings(&self.chain))?;
        st.serialize_field("cycle_from", &self.cycle_from)?;
        st.end()
    }
}

impl Serialize for BoundTrace {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("BoundTrace", 9)?;
        st.serialize_field("expr", &self.expr)?;
        st.serialize_field("lambda", &fmt_rational(self.budget.lambda()))?;
        st.serialize_field("lambda_prime", &fmt_rational(self.budget.lambda_prime()))?;
        st.serialize_field("schedule", &self.schedule)?;
        st.serialize_field("m_prime", &self.m_prime.to_string())?;
        st.serialize_field("nodes_visited", &self.nodes_visited.to_string())?;
        st.serialize_field("max_depth", &self.max_depth)?;
        st.serialize_field("records_truncated", &self.records_truncated)?;
        st.serialize_field("nodes", &self.nodes)?;
        st.end()
    }
}

impl BoundTrace {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("trace serializes")
    }
}
