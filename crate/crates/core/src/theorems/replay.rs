//! Step-by-step replays of the two impossibility constructions. Each step of
//! the argument becomes a named assertion checked by brute force.

use std::time::{Duration, Instant};

use serde::Serialize;

use super::AgentPartition;
use crate::error::{Error, Result};
use crate::matchings::{
    agents_on_cycles, find_blocking_pair, is_non_wasteful, is_pairwise_efficient, pareto_dominates,
    reduce_to_single_cycle, SingleCycleReduction,
};
use crate::model::{enumerate_matchings, AgentId, Domain, Instance, Limits, Matching, ObjectId};
use crate::preferences::{
    appendix_transform_sequence, common_rank_rearrange, is_monotonic_transformation, push_to_top,
    AppendixSequence, CommonRanking, Profile,
};

#[derive(Clone, Debug, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(skip)]
    pub elapsed: Duration,
}

#[derive(Default)]
struct Assertions(Vec<Assertion>);

impl Assertions {
    fn check(&mut self, name: impl Into<String>, f: impl FnOnce() -> (bool, Option<String>)) {
        let start = Instant::now();
        let (passed, detail) = f();
        self.0.push(Assertion {
            name: name.into(),
            passed,
            detail,
            elapsed: start.elapsed(),
        });
    }

    fn plain(&mut self, name: impl Into<String>, f: impl FnOnce() -> bool) {
        self.check(name, || (f(), None));
    }

    fn all_passed(&self) -> bool {
        self.0.iter().all(|a| a.passed)
    }
}

/// Agents ranking `o` first at `p`.
fn top_holders(p: &Profile, o: ObjectId) -> Vec<AgentId> {
    p.prefs()
        .iter()
        .enumerate()
        .filter(|(_, q)| q.top() == o)
        .map(|(i, _)| AgentId(i))
        .collect()
}

fn efficient_non_wasteful(inst: &Instance, p: &Profile, all: &[Matching]) -> Vec<Matching> {
    all.iter()
        .filter(|m| is_pairwise_efficient(m, p) && is_non_wasteful(inst, m, p))
        .cloned()
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct Theorem1Replay {
    pub ranking: CommonRanking,
    pub r_prime: Profile,
    pub r_tilde: Profile,
    /// Pairwise-efficient non-wasteful matchings at `r_tilde`.
    pub efficient_non_wasteful: Vec<Matching>,
    pub assertions: Vec<Assertion>,
    pub passed: bool,
}

/// Replays the general-domain construction: push every `nu_i` to the top,
/// reorder the rest by a common ranking, and confirm `nu` is then the only
/// pairwise-efficient non-wasteful matching.
pub fn replay_theorem1_proof(inst: &Instance, r: &Profile, mu: &Matching, nu: &Matching) -> Result<Theorem1Replay> {
    if inst.domain() != Domain::General {
        return Err(Error::PreconditionViolated(
            "the general-domain construction needs a general-domain instance".into(),
        ));
    }
    theorem1_construction(inst, r, mu, nu)
}

/// Also used on null-bottom instances where nobody holds the null-object,
/// in which case every constructed profile keeps the null-object last.
fn theorem1_construction(inst: &Instance, r: &Profile, mu: &Matching, nu: &Matching) -> Result<Theorem1Replay> {
    if !r.in_domain(inst) {
        return Err(Error::PreconditionViolated("profile leaves the instance's domain".into()));
    }
    if !pareto_dominates(nu, mu, r) {
        return Err(Error::PreconditionViolated("nu does not Pareto dominate mu".into()));
    }
    let ranking = CommonRanking::by_index(inst);
    let r_prime = push_to_top(inst, r, nu)?;
    let r_tilde = common_rank_rearrange(inst, &r_prime, nu, &ranking)?;
    let all = enumerate_matchings(inst, &Limits::default())?;
    let efficient = efficient_non_wasteful(inst, &r_tilde, &all);

    let mut a = Assertions::default();
    a.plain("r_prime_is_monotonic_transformation_at_mu", || {
        is_monotonic_transformation(r, &r_prime, mu)
    });
    a.plain("nu_unanimously_best", || {
        inst.agents()
            .all(|i| r_prime.get(i).top() == nu.get(i) && r_tilde.get(i).top() == nu.get(i))
    });
    a.plain("r_prime_and_r_tilde_mutual_at_nu", || {
        is_monotonic_transformation(&r_prime, &r_tilde, nu) && is_monotonic_transformation(&r_tilde, &r_prime, nu)
    });
    a.plain("profiles_in_domain", || r_prime.in_domain(inst) && r_tilde.in_domain(inst));
    a.check("copies_match_first_choices", || {
        let bad: Vec<String> = efficient
            .iter()
            .filter(|m| {
                inst.objects().any(|o| {
                    let holders = top_holders(&r_tilde, o).len();
                    m.count_of(o) != holders || nu.count_of(o) != holders
                })
            })
            .map(|m| format!("{:?}", m.as_slice().iter().map(|o| o.0).collect::<Vec<_>>()))
            .collect();
        (bad.is_empty(), (!bad.is_empty()).then(|| format!("violating matchings: {}", bad.join(" "))))
    });
    a.check("nu_is_the_unique_efficient_matching", || {
        let ok = efficient.len() == 1 && efficient[0] == *nu;
        (ok, (!ok).then(|| format!("{} pairwise-efficient non-wasteful matchings", efficient.len())))
    });
    let passed = a.all_passed();
    Ok(Theorem1Replay {
        ranking,
        r_prime,
        r_tilde,
        efficient_non_wasteful: efficient,
        assertions: a.0,
        passed,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct AppendixReplay {
    /// Partition for the caller's `nu`.
    pub partition: AgentPartition,
    pub reduction: SingleCycleReduction,
    pub sequence: AppendixSequence,
    pub assertions: Vec<Assertion>,
    /// The pair of cycle agents (first and last label) that block `mu` at the
    /// final profile.
    pub swap: (AgentId, AgentId),
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "snake_case", tag = "case")]
pub enum Theorem3Outcome {
    Full(Box<AppendixReplay>),
    /// Nobody holds the null-object, so the general-domain construction
    /// applies unchanged.
    Degenerate {
        partition: AgentPartition,
        theorem1: Box<Theorem1Replay>,
    },
}

impl Theorem3Outcome {
    pub fn passed(&self) -> bool {
        match self {
            Theorem3Outcome::Full(r) => r.passed,
            Theorem3Outcome::Degenerate { theorem1, .. } => theorem1.passed,
        }
    }

    pub fn assertions(&self) -> &[Assertion] {
        match self {
            Theorem3Outcome::Full(r) => &r.assertions,
            Theorem3Outcome::Degenerate { theorem1, .. } => &theorem1.assertions,
        }
    }
}

/// Replays the null-bottom construction for a non-wasteful `mu` dominated by `nu`.
pub fn replay_theorem3_proof(inst: &Instance, r: &Profile, mu: &Matching, nu: &Matching) -> Result<Theorem3Outcome> {
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
    let reduction = reduce_to_single_cycle(inst, mu, r)?;
    if reduction.cycle.len() == 2 {
        return Err(Error::PreconditionViolated(
            "a two-agent improvement cycle is a blocking pair".into(),
        ));
    }
    if partition.null_agents.is_empty() {
        let theorem1 = theorem1_construction(inst, r, mu, nu)?;
        return Ok(Theorem3Outcome::Degenerate {
            partition,
            theorem1: Box::new(theorem1),
        });
    }

    let star = &reduction.profile;
    let nu_star = &reduction.nu;
    let seq = appendix_transform_sequence(inst, star, mu, nu_star)?;
    let all = enumerate_matchings(inst, &Limits::default())?;
    let mut a = Assertions::default();

    a.plain("reduction_is_monotonic_transformation_at_mu", || {
        is_monotonic_transformation(r, star, mu) && star.in_domain(inst)
    });
    a.plain("reduction_leaves_a_unique_cycle", || {
        let mut on = seq.cycle_agents.clone();
        on.sort();
        agents_on_cycles(mu, star) == on && pareto_dominates(nu_star, mu, star)
    });
    a.plain("all_profiles_in_domain", || {
        seq.profiles.iter().all(|p| p.in_domain(inst)) && seq.target.in_domain(inst)
    });
    a.plain("r_prime_is_monotonic_transformation_at_mu", || {
        is_monotonic_transformation(star, seq.r_prime(), mu)
    });
    a.plain("r_hat_is_monotonic_transformation_at_mu", || {
        is_monotonic_transformation(seq.r_prime(), seq.r_hat(), mu)
    });

    let null_agents = &seq.partition.null_agents;
    let real: Vec<ObjectId> = inst.real_objects().collect();
    for (stage, p) in seq.profiles.iter().enumerate().skip(1) {
        let label = stage_label(stage);
        a.check(format!("copies_match_first_choices_at_{label}"), || {
            observation_counts(inst, p, nu_star, null_agents, &real, &all)
        });
    }

    let l = seq.cycle_len();
    let obj = &seq.cycle_objects;
    let agent = |s: usize| seq.cycle_agents[s - 1];
    a.plain("first_two_labels_already_final", || {
        (1..=2).all(|s| seq.r_hat().get(agent(s)) == seq.target.get(agent(s)))
    });
    for s in 3..=l {
        let prev = &seq.profiles[s - 2];
        let cur = &seq.profiles[s - 1];
        let ps = agent(s);
        let earlier = &obj[..s - 2];
        let a_prev = obj[s - 2];
        a.plain(format!("step_{s}_changes_only_agent_{}", ps.0), || {
            inst.agents()
                .all(|i| (i == ps) != (prev.get(i) == cur.get(i)))
                && cur.get(ps) == seq.target.get(ps)
        });
        a.plain(format!("step_{s}_reverse_is_monotonic_at_mu"), || {
            is_monotonic_transformation(cur, prev, mu)
        });
        a.check(format!("step_{s}_only_first_choosers_rank_a{}_above_earlier", s - 1), || {
            let ok = [prev, cur].iter().all(|p| {
                let above: Vec<AgentId> = inst
                    .agents()
                    .filter(|&i| earlier.iter().all(|&e| p.get(i).prefers(a_prev, e)))
                    .collect();
                above == top_holders(p, a_prev)
            });
            (ok, None)
        });
        a.check(format!("step_{s}_earlier_objects_create_blocking_pairs"), || {
            let mut offenders = 0usize;
            for m in all.iter().filter(|m| earlier.contains(&m.get(ps)) && is_non_wasteful(inst, m, cur)) {
                let first = top_holders(cur, a_prev);
                let partner = inst.agents().find(|&j| {
                    m.get(j) == a_prev
                        && !first.contains(&j)
                        && cur.get(ps).prefers(a_prev, m.get(ps))
                        && cur.get(j).prefers(m.get(ps), a_prev)
                });
                if partner.is_none() || is_pairwise_efficient(m, cur) {
                    offenders += 1;
                }
            }
            (offenders == 0, (offenders > 0).then(|| format!("{offenders} matchings escape the argument")))
        });
    }
    a.plain("final_profile_equals_target", || seq.profiles.last() == Some(&seq.target));
    let swap = (agent(1), agent(l));
    a.plain("first_and_last_cycle_agents_block_mu", || {
        let t = &seq.target;
        t.get(swap.0).prefers(mu.get(swap.1), mu.get(swap.0))
            && t.get(swap.1).prefers(mu.get(swap.0), mu.get(swap.1))
            && find_blocking_pair(mu, t).is_some()
    });

    let passed = a.all_passed();
    Ok(Theorem3Outcome::Full(Box::new(AppendixReplay {
        partition,
        reduction,
        sequence: seq,
        assertions: a.0,
        swap,
        passed,
    })))
}

fn stage_label(stage: usize) -> String {
    match stage {
        0 => "r_prime".into(),
        1 => "r_hat".into(),
        s => format!("step_{}", s + 1),
    }
}

/// Every non-wasteful matching at `p` assigns each real object exactly as
/// often as `nu` does, which equals the number of agents outside the null
/// group ranking it first. Agents of the null group rank the common
/// ranking's first object first without holding it, so they are left out of
/// the count.
fn observation_counts(
    inst: &Instance,
    p: &Profile,
    nu: &Matching,
    null_agents: &[AgentId],
    real: &[ObjectId],
    all: &[Matching],
) -> (bool, Option<String>) {
    let expected: Vec<usize> = real
        .iter()
        .map(|&o| {
            top_holders(p, o)
                .into_iter()
                .filter(|i| !null_agents.contains(i))
                .count()
        })
        .collect();
    if real.iter().zip(&expected).any(|(&o, &e)| nu.count_of(o) != e) {
        return (false, Some("nu does not match the first-choice counts".into()));
    }
    let bad = all
        .iter()
        .filter(|m| is_non_wasteful(inst, m, p))
        .filter(|m| real.iter().zip(&expected).any(|(&o, &e)| m.count_of(o) != e))
        .count();
    (bad == 0, (bad > 0).then(|| format!("{bad} non-wasteful matchings differ")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_cycle_general_domain() {
        let inst = Instance::unit(3, 3).unwrap();
        let r = Profile::from_indices(&inst, &[vec![1, 0, 2], vec![2, 1, 0], vec![0, 2, 1]]).unwrap();
        let mu = Matching::from_indices(&inst, &[0, 1, 2]).unwrap();
        let nu = Matching::from_indices(&inst, &[1, 2, 0]).unwrap();
        let rep = replay_theorem1_proof(&inst, &r, &mu, &nu).unwrap();
        assert!(rep.passed, "{:?}", rep.assertions);
        assert_eq!(rep.efficient_non_wasteful, vec![nu.clone()]);
        assert!(matches!(
            replay_theorem1_proof(&inst, &r, &mu, &mu),
            Err(Error::PreconditionViolated(_))
        ));
    }

    #[test]
    fn three_cycle_with_a_null_agent() {
        let inst = Instance::null_bottom(4, vec![1, 1, 1, 1]).unwrap();
        let r = Profile::from_indices(
            &inst,
            &[vec![3, 1, 2, 0], vec![1, 2, 3, 0], vec![2, 3, 1, 0], vec![1, 2, 3, 0]],
        )
        .unwrap();
        let mu = Matching::from_indices(&inst, &[1, 2, 3, 0]).unwrap();
        let nu = Matching::from_indices(&inst, &[3, 1, 2, 0]).unwrap();
        let out = replay_theorem3_proof(&inst, &r, &mu, &nu).unwrap();
        assert!(out.passed(), "{:?}", out.assertions());
        let Theorem3Outcome::Full(rep) = out else { panic!("expected the full construction") };
        assert_eq!(rep.swap, (AgentId(0), AgentId(2)));
    }

    #[test]
    fn no_null_agents_delegates() {
        let inst = Instance::null_bottom(3, vec![1, 1, 1, 1]).unwrap();
        let r = Profile::from_indices(&inst, &[vec![2, 1, 3, 0], vec![3, 2, 1, 0], vec![1, 3, 2, 0]]).unwrap();
        let mu = Matching::from_indices(&inst, &[1, 2, 3]).unwrap();
        let nu = Matching::from_indices(&inst, &[2, 3, 1]).unwrap();
        let out = replay_theorem3_proof(&inst, &r, &mu, &nu).unwrap();
        assert!(matches!(out, Theorem3Outcome::Degenerate { .. }));
        assert!(out.passed(), "{:?}", out.assertions());
    }

    #[test]
    fn two_cycles_are_rejected() {
        let inst = Instance::null_bottom(3, vec![1, 1, 1]).unwrap();
        let r = Profile::from_indices(&inst, &[vec![2, 1, 0], vec![1, 2, 0], vec![1, 2, 0]]).unwrap();
        let mu = Matching::from_indices(&inst, &[1, 2, 0]).unwrap();
        let nu = Matching::from_indices(&inst, &[2, 1, 0]).unwrap();
        assert!(matches!(
            replay_theorem3_proof(&inst, &r, &mu, &nu),
            Err(Error::PreconditionViolated(_))
        ));
    }
}
