//! Efficiency and wastefulness predicates, Pareto domination and
//! improvement-cycle detection.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{enumerate_matchings, AgentId, Instance, Limits, Matching, ObjectId};
use crate::preferences::{push_to_top_agents, Profile};

/// A cyclic sequence of agents in which each agent strictly prefers the
/// allotment of the next one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ImprovementCycle {
    pub agents: Vec<AgentId>,
    /// `objects[t]` is the allotment of `agents[t]`.
    pub objects: Vec<ObjectId>,
}

impl ImprovementCycle {
    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    /// Every agent on the cycle receives the next agent's allotment.
    pub fn apply(&self, mu: &Matching) -> Matching {
        let mut v = mu.as_slice().to_vec();
        let l = self.agents.len();
        for t in 0..l {
            v[self.agents[t].0] = self.objects[(t + 1) % l];
        }
        Matching::from_vec_unchecked(v)
    }

    pub fn contains(&self, agent: AgentId) -> bool {
        self.agents.contains(&agent)
    }
}

/// Structured reason a matching fails an efficiency notion.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum EfficiencyWitness {
    Swap {
        agents: Vec<AgentId>,
        objects: Vec<ObjectId>,
    },
    Cycle {
        agents: Vec<AgentId>,
        objects: Vec<ObjectId>,
    },
    Waste {
        agents: Vec<AgentId>,
        objects: Vec<ObjectId>,
    },
}

impl EfficiencyWitness {
    pub fn kind(&self) -> &'static str {
        match self {
            EfficiencyWitness::Swap { .. } => "swap",
            EfficiencyWitness::Cycle { .. } => "cycle",
            EfficiencyWitness::Waste { .. } => "waste",
        }
    }

    pub fn agents(&self) -> &[AgentId] {
        match self {
            EfficiencyWitness::Swap { agents, .. }
            | EfficiencyWitness::Cycle { agents, .. }
            | EfficiencyWitness::Waste { agents, .. } => agents,
        }
    }

    pub fn objects(&self) -> &[ObjectId] {
        match self {
            EfficiencyWitness::Swap { objects, .. }
            | EfficiencyWitness::Cycle { objects, .. }
            | EfficiencyWitness::Waste { objects, .. } => objects,
        }
    }
}

/// `nu` weakly improves every agent and strictly improves someone.
pub fn pareto_dominates(nu: &Matching, mu: &Matching, r: &Profile) -> bool {
    let mut strict = false;
    for (i, p) in r.prefs().iter().enumerate() {
        let (a, b) = (nu.as_slice()[i], mu.as_slice()[i]);
        if p.prefers(b, a) {
            return false;
        }
        strict |= a != b;
    }
    strict
}

/// First matching of `all` (in its order) that Pareto dominates `mu`.
pub fn find_dominating<'a>(mu: &Matching, r: &Profile, all: &'a [Matching]) -> Option<&'a Matching> {
    all.iter().find(|nu| pareto_dominates(nu, mu, r))
}

/// Ground truth: no feasible matching Pareto dominates `mu`.
pub fn is_pareto_efficient(inst: &Instance, mu: &Matching, r: &Profile, limits: &Limits) -> Result<bool> {
    let all = enumerate_matchings(inst, limits)?;
    Ok(is_pareto_efficient_among(mu, r, &all))
}

/// Pareto efficiency against a precomputed matching set.
pub fn is_pareto_efficient_among(mu: &Matching, r: &Profile, all: &[Matching]) -> bool {
    find_dominating(mu, r, all).is_none()
}

/// First agent pair (lexicographic) that wants to swap allotments.
pub fn find_blocking_pair(mu: &Matching, r: &Profile) -> Option<(AgentId, AgentId)> {
    let n = mu.len();
    for i in 0..n {
        let (pi, oi) = (r.get(AgentId(i)), mu.as_slice()[i]);
        for j in i + 1..n {
            let oj = mu.as_slice()[j];
            if pi.prefers(oj, oi) && r.get(AgentId(j)).prefers(oi, oj) {
                return Some((AgentId(i), AgentId(j)));
            }
        }
    }
    None
}

pub fn is_pairwise_efficient(mu: &Matching, r: &Profile) -> bool {
    find_blocking_pair(mu, r).is_none()
}

/// First agent (then best object) that prefers an object with spare capacity.
pub fn find_waste(inst: &Instance, mu: &Matching, r: &Profile) -> Option<(AgentId, ObjectId)> {
    let counts = mu.counts(inst.k());
    for i in inst.agents() {
        let p = r.get(i);
        let held = mu.get(i);
        if let Some(&o) = p.ranking()[..p.rank_of(held)]
            .iter()
            .find(|o| counts[o.0] < inst.capacity(**o))
        {
            return Some((i, o));
        }
    }
    None
}

pub fn is_non_wasteful(inst: &Instance, mu: &Matching, r: &Profile) -> bool {
    find_waste(inst, mu, r).is_none()
}

/// Adjacency of the improvement graph: `i -> j` when `mu_j P_i mu_i`.
fn improvement_graph(mu: &Matching, r: &Profile) -> Vec<Vec<usize>> {
    let n = mu.len();
    (0..n)
        .map(|i| {
            let p = r.get(AgentId(i));
            let oi = mu.as_slice()[i];
            (0..n)
                .filter(|&j| p.prefers(mu.as_slice()[j], oi))
                .collect()
        })
        .collect()
}

/// A shortest improvement cycle, or `None` when `mu` admits none.
///
/// Among shortest cycles the one with the lowest starting agent wins, then
/// the lowest next agent, and so on along the cycle.
pub fn find_improvement_cycle(
    inst: &Instance,
    mu: &Matching,
    r: &Profile,
) -> Result<Option<ImprovementCycle>> {
    if let Some((i, o)) = find_waste(inst, mu, r) {
        return Err(Error::PreconditionViolated(format!(
            "matching is wasteful: agent {} prefers object {} with spare capacity",
            i.0, o.0
        )));
    }
    Ok(shortest_cycle(mu, r))
}

pub(crate) fn shortest_cycle(mu: &Matching, r: &Profile) -> Option<ImprovementCycle> {
    let graph = improvement_graph(mu, r);
    let n = graph.len();
    let mut reverse = vec![Vec::new(); n];
    for (i, out) in graph.iter().enumerate() {
        for &j in out {
            reverse[j].push(i);
        }
    }
    let mut best: Option<Vec<usize>> = None;
    for start in 0..n {
        // dist[v] = length of the shortest path v -> start
        let mut dist = vec![usize::MAX; n];
        dist[start] = 0;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &u in &reverse[v] {
                if dist[u] == usize::MAX {
                    dist[u] = dist[v] + 1;
                    queue.push_back(u);
                }
            }
        }
        let Some(&next) = graph[start]
            .iter()
            .filter(|&&j| dist[j] != usize::MAX)
            .min_by_key(|&&j| (dist[j], j))
        else {
            continue;
        };
        let length = dist[next] + 1;
        if best.as_ref().is_some_and(|b| b.len() <= length) {
            continue;
        }
        let mut cycle = vec![start];
        let mut v = next;
        while v != start {
            cycle.push(v);
            v = *graph[v]
                .iter()
                .filter(|&&u| dist[u] == dist[v] - 1)
                .min()
                .expect("a successor on a shortest path");
        }
        best = Some(cycle);
    }
    best.map(|agents| ImprovementCycle {
        objects: agents.iter().map(|&i| mu.as_slice()[i]).collect(),
        agents: agents.into_iter().map(AgentId).collect(),
    })
}

/// Agents that lie on at least one improvement cycle.
pub fn agents_on_cycles(mu: &Matching, r: &Profile) -> Vec<AgentId> {
    let graph = improvement_graph(mu, r);
    let n = graph.len();
    (0..n)
        .filter(|&s| {
            let mut seen = vec![false; n];
            let mut stack: Vec<usize> = graph[s].clone();
            while let Some(v) = stack.pop() {
                if v == s {
                    return true;
                }
                if !std::mem::replace(&mut seen[v], true) {
                    stack.extend(&graph[v]);
                }
            }
            false
        })
        .map(AgentId)
        .collect()
}

/// Result of isolating one shortest improvement cycle.
#[derive(Clone, Debug, Serialize)]
pub struct SingleCycleReduction {
    /// Profile where every other cycle agent ranks its `mu` allotment first.
    pub profile: Profile,
    pub cycle: ImprovementCycle,
    /// `mu` with only `cycle` implemented.
    pub nu: Matching,
    /// Agents whose preferences were re-profiled.
    pub repositioned: Vec<AgentId>,
}

/// Reduces the improvements of a non-wasteful, Pareto-dominated `mu` to a
/// single shortest cycle by moving every other cycle agent's allotment to
/// the top of its preferences.
pub fn reduce_to_single_cycle(inst: &Instance, mu: &Matching, r: &Profile) -> Result<SingleCycleReduction> {
    let cycle = find_improvement_cycle(inst, mu, r)?.ok_or_else(|| {
        Error::PreconditionViolated("matching admits no improvement cycle".into())
    })?;
    let repositioned: Vec<AgentId> = agents_on_cycles(mu, r)
        .into_iter()
        .filter(|a| !cycle.contains(*a))
        .collect();
    let profile = push_to_top_agents(inst, r, mu, &repositioned)?;
    let nu = cycle.apply(mu);
    Ok(SingleCycleReduction {
        profile,
        cycle,
        nu,
        repositioned,
    })
}

/// Why `mu` is not Pareto efficient: waste first, else a shortest cycle.
pub fn pareto_witness(inst: &Instance, mu: &Matching, r: &Profile) -> Option<EfficiencyWitness> {
    if let Some(w) = waste_witness(inst, mu, r) {
        return Some(w);
    }
    shortest_cycle(mu, r).map(|c| EfficiencyWitness::Cycle {
        agents: c.agents,
        objects: c.objects,
    })
}

pub fn pairwise_witness(mu: &Matching, r: &Profile) -> Option<EfficiencyWitness> {
    find_blocking_pair(mu, r).map(|(i, j)| EfficiencyWitness::Swap {
        agents: vec![i, j],
        objects: vec![mu.get(i), mu.get(j)],
    })
}

pub fn waste_witness(inst: &Instance, mu: &Matching, r: &Profile) -> Option<EfficiencyWitness> {
    find_waste(inst, mu, r).map(|(i, o)| EfficiencyWitness::Waste {
        agents: vec![i],
        objects: vec![mu.get(i), o],
    })
}
