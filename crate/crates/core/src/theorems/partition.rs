use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{AgentId, Instance, Matching};

/// Split of the agents by how their allotment changes from `mu` to `nu`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AgentPartition {
    /// Agents receiving a different real object, ascending.
    pub cycle_agents: Vec<AgentId>,
    /// Agents keeping the same real object, ascending.
    pub fixed_real: Vec<AgentId>,
    /// Agents holding the null-object at both matchings, ascending.
    pub null_agents: Vec<AgentId>,
    /// Number of agents holding a real object (cycle and fixed agents).
    pub kappa: usize,
}

impl AgentPartition {
    /// Fails when some agent moves between the null-object and a real object,
    /// which cannot happen when `mu` is non-wasteful and `nu` dominates it.
    pub fn compute(inst: &Instance, mu: &Matching, nu: &Matching) -> Result<Self> {
        if mu.len() != inst.n() || nu.len() != inst.n() {
            return Err(Error::InvalidMatching("matching length differs from the agent count".into()));
        }
        let mut p = AgentPartition {
            cycle_agents: Vec::new(),
            fixed_real: Vec::new(),
            null_agents: Vec::new(),
            kappa: 0,
        };
        for i in inst.agents() {
            let (m, v) = (mu.get(i), nu.get(i));
            match (inst.is_null(m), inst.is_null(v)) {
                (true, true) => p.null_agents.push(i),
                (false, false) if m == v => p.fixed_real.push(i),
                (false, false) => p.cycle_agents.push(i),
                _ => {
                    return Err(Error::PreconditionViolated(format!(
                        "agent {} moves between the null-object and a real object",
                        i.0
                    )))
                }
            }
        }
        p.kappa = p.cycle_agents.len() + p.fixed_real.len();
        Ok(p)
    }
}
