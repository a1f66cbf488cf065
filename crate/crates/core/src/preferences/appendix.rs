//! Profile sequence for the restricted-domain argument: the single improvement
//! cycle is relabelled `1..l`, every preference is rebuilt around a common
//! ranking that lists the cycle objects first, and cycle agents `3..l` are
//! then rearranged one at a time.

use serde::Serialize;

use super::{front_then_common, raise, CommonRanking, Profile};
use crate::error::{Error, Result};
use crate::matchings::{is_non_wasteful, pareto_dominates, shortest_cycle};
use crate::model::{AgentId, Domain, Instance, Matching, ObjectId};
use crate::theorems::AgentPartition;

/// Output of [`appendix_transform_sequence`].
#[derive(Clone, Debug, Serialize)]
pub struct AppendixSequence {
    pub partition: AgentPartition,
    /// Cycle agents in label order: agent `t` holds `cycle_objects[t]` and
    /// receives `cycle_objects[t-1]` (cyclically).
    pub cycle_agents: Vec<AgentId>,
    pub cycle_objects: Vec<ObjectId>,
    /// Canonical agent labels: cycle agents, then fixed agents, then null agents.
    pub labels: Vec<AgentId>,
    pub ranking: CommonRanking,
    /// `[R', R^, R^ after step 3, ..., R^ after step l]`.
    pub profiles: Vec<Profile>,
    /// The target profile, built directly from its definition.
    pub target: Profile,
}

impl AppendixSequence {
    pub fn cycle_len(&self) -> usize {
        self.cycle_agents.len()
    }

    pub fn r_prime(&self) -> &Profile {
        &self.profiles[0]
    }

    pub fn r_hat(&self) -> &Profile {
        &self.profiles[1]
    }

    /// Profile after step `s` (`3 <= s <= l`).
    pub fn after_step(&self, s: usize) -> &Profile {
        &self.profiles[s - 1]
    }
}

/// Builds the full transformation sequence. `nu` must be `mu` with exactly one
/// shortest improvement cycle implemented.
pub fn appendix_transform_sequence(
    inst: &Instance,
    r: &Profile,
    mu: &Matching,
    nu: &Matching,
) -> Result<AppendixSequence> {
    if inst.domain() != Domain::NullBottom {
        return Err(Error::PreconditionViolated(
            "the restricted-domain construction needs a null-bottom instance".into(),
        ));
    }
    if !r.in_domain(inst) {
        return Err(Error::PreconditionViolated("profile leaves the null-bottom domain".into()));
    }
    if !pareto_dominates(nu, mu, r) {
        return Err(Error::PreconditionViolated("nu does not Pareto dominate mu".into()));
    }
    if !is_non_wasteful(inst, mu, r) {
        return Err(Error::PreconditionViolated("mu is wasteful".into()));
    }
    let partition = AgentPartition::compute(inst, mu, nu)?;
    let cycle_agents = label_cycle(&partition.cycle_agents, mu, nu)?;
    let l = cycle_agents.len();
    if l == 2 {
        return Err(Error::PreconditionViolated(
            "a two-agent improvement cycle is a blocking pair".into(),
        ));
    }
    if let Some(shorter) = shortest_cycle(mu, r).filter(|c| c.len() < l) {
        return Err(Error::PreconditionViolated(format!(
            "improvement cycle of length {} is shorter than the implemented one of length {l}",
            shorter.len()
        )));
    }
    let cycle_objects: Vec<ObjectId> = cycle_agents.iter().map(|&i| mu.get(i)).collect();

    let mut order = cycle_objects.clone();
    order.extend(inst.real_objects().filter(|o| !cycle_objects.contains(o)));
    let ranking = CommonRanking::new(inst, order)?;

    let mut labels = cycle_agents.clone();
    labels.extend(&partition.fixed_real);
    labels.extend(&partition.null_agents);

    let prime = build(inst, |i| {
        let (m, v) = (mu.get(i), nu.get(i));
        if partition.null_agents.contains(&i) {
            r.get(i).clone()
        } else if m == v {
            raise(r.get(i), &[m])
        } else {
            raise(r.get(i), &[v, m])
        }
    });
    let hat = build(inst, |i| {
        let (m, v) = (mu.get(i), nu.get(i));
        if partition.null_agents.contains(&i) {
            front_then_common(inst, &[], &ranking)
        } else if m == v {
            front_then_common(inst, &[m], &ranking)
        } else {
            front_then_common(inst, &[v, m], &ranking)
        }
    });
    let target = build(inst, |i| {
        if cycle_agents.contains(&i) {
            front_then_common(inst, &[nu.get(i)], &ranking)
        } else {
            hat.get(i).clone()
        }
    });

    let mut profiles = vec![prime, hat.clone()];
    let mut current = hat;
    // label s (1-based) is index s-1; agent s now receives a_{s-1}
    for s in 3..=l {
        let agent = cycle_agents[s - 1];
        let pref = front_then_common(inst, &[cycle_objects[s - 2]], &ranking);
        current = current.with(agent, pref);
        profiles.push(current.clone());
    }

    Ok(AppendixSequence {
        partition,
        cycle_agents,
        cycle_objects,
        labels,
        ranking,
        profiles,
        target,
    })
}

fn build(inst: &Instance, f: impl Fn(AgentId) -> super::Preference) -> Profile {
    Profile::from_vec_unchecked(inst.agents().map(f).collect())
}

/// Orders the agents that change allotment so that agent `t` receives the
/// allotment of agent `t-1`, starting from the lowest agent id.
fn label_cycle(changed: &[AgentId], mu: &Matching, nu: &Matching) -> Result<Vec<AgentId>> {
    let not_single = || {
        Error::PreconditionViolated("the improvement from mu to nu is not a single cycle".into())
    };
    let held: Vec<ObjectId> = changed.iter().map(|&i| mu.get(i)).collect();
    let mut distinct = held.clone();
    distinct.sort();
    distinct.dedup();
    if distinct.len() != held.len() || changed.len() < 2 {
        return Err(not_single());
    }
    // giver(i): the changed agent whose mu allotment i receives under nu
    let giver = |i: AgentId| -> Result<AgentId> {
        changed
            .iter()
            .copied()
            .find(|&j| mu.get(j) == nu.get(i))
            .ok_or_else(not_single)
    };
    let first = changed[0];
    let mut labels = vec![first];
    let mut next = giver(first)?;
    while next != first {
        if labels.contains(&next) {
            return Err(not_single());
        }
        labels.push(next);
        next = giver(next)?;
    }
    if labels.len() != changed.len() {
        return Err(not_single());
    }
    // labels = [p1, pl, p(l-1), ..., p2]; put them in label order
    labels[1..].reverse();
    Ok(labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preferences::is_monotonic_transformation;

    /// Agents 0,1,2 form a 3-cycle on real objects 1,2,3; agent 3 holds the
    /// null-object (object 0).
    pub(crate) fn three_cycle() -> (Instance, Profile, Matching, Matching) {
        let inst = Instance::null_bottom(4, vec![1, 1, 1, 1]).unwrap();
        let r = Profile::from_indices(
            &inst,
            &[
                vec![3, 1, 2, 0],
                vec![1, 2, 3, 0],
                vec![2, 3, 1, 0],
                vec![1, 2, 3, 0],
            ],
        )
        .unwrap();
        let mu = Matching::from_indices(&inst, &[1, 2, 3, 0]).unwrap();
        let nu = Matching::from_indices(&inst, &[3, 1, 2, 0]).unwrap();
        (inst, r, mu, nu)
    }

    #[test]
    fn three_cycle_sequence() {
        let (inst, r, mu, nu) = three_cycle();
        let seq = appendix_transform_sequence(&inst, &r, &mu, &nu).unwrap();
        assert_eq!(seq.profiles.len(), 3);
        assert_eq!(seq.cycle_agents, vec![AgentId(0), AgentId(1), AgentId(2)]);
        assert_eq!(seq.cycle_objects, vec![ObjectId(1), ObjectId(2), ObjectId(3)]);
        assert_eq!(seq.profiles.last().unwrap(), &seq.target);
        assert!(is_monotonic_transformation(&r, seq.r_prime(), &mu));
        assert!(is_monotonic_transformation(seq.r_prime(), seq.r_hat(), &mu));
        // the step is a deviation by agent 3 whose reverse is monotonic at mu
        assert!(is_monotonic_transformation(seq.after_step(3), seq.r_hat(), &mu));
        for p in &seq.profiles {
            assert!(p.in_domain(&inst));
        }
        let t = &seq.target;
        assert!(t.get(AgentId(0)).prefers(ObjectId(3), ObjectId(1)));
        assert!(t.get(AgentId(2)).prefers(ObjectId(1), ObjectId(3)));
    }

    #[test]
    fn rejects_two_cycles_and_bad_inputs() {
        let (inst, r, mu, nu) = three_cycle();
        assert!(appendix_transform_sequence(&inst, &r, &mu, &mu).is_err());
        assert!(appendix_transform_sequence(&inst, &r, &nu, &mu).is_err());
        let g = Instance::unit(3, 3).unwrap();
        let rg = Profile::from_indices(&g, &[vec![1, 0, 2], vec![2, 1, 0], vec![0, 2, 1]]).unwrap();
        let mg = Matching::from_indices(&g, &[0, 1, 2]).unwrap();
        let ng = Matching::from_indices(&g, &[1, 2, 0]).unwrap();
        assert!(matches!(
            appendix_transform_sequence(&g, &rg, &mg, &ng),
            Err(Error::PreconditionViolated(_))
        ));

        let swap_inst = Instance::null_bottom(3, vec![1, 1, 1]).unwrap();
        let rs = Profile::from_indices(&swap_inst, &[vec![2, 1, 0], vec![1, 2, 0], vec![1, 2, 0]])
            .unwrap();
        let ms = Matching::from_indices(&swap_inst, &[1, 2, 0]).unwrap();
        let ns = Matching::from_indices(&swap_inst, &[2, 1, 0]).unwrap();
        assert!(matches!(
            appendix_transform_sequence(&swap_inst, &rs, &ms, &ns),
            Err(Error::PreconditionViolated(_))
        ));
    }
}
