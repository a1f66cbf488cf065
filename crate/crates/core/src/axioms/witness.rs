use serde::Serialize;

use super::{AxiomId, CheckOptions};
use crate::error::Result;
use crate::matchings::{find_blocking_pair, find_waste, pareto_dominates, EfficiencyWitness};
use crate::model::{AgentId, Instance, Matching};
use crate::preferences::{is_monotonic_transformation, Profile};
use crate::rules::{evaluate, Lottery, RuleDescriptor, Weight};

/// A structured counterexample to an axiom.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Witness {
    /// The coalition reports `deviation` instead of `profile`; every member
    /// is weakly better off and at least one strictly.
    Manipulation {
        profile: Profile,
        deviation: Profile,
        coalition: Vec<AgentId>,
        truthful: Matching,
        manipulated: Matching,
    },
    /// `agent` keeps its allotment but changes someone else's.
    Bossiness {
        profile: Profile,
        deviation: Profile,
        agent: AgentId,
        truthful: Matching,
        manipulated: Matching,
    },
    Monotonicity {
        profile: Profile,
        transformed: Profile,
        before: Matching,
        after: Matching,
    },
    ProbabilityDrop {
        profile: Profile,
        transformed: Profile,
        matching: Matching,
        before: Weight,
        after: Weight,
    },
    UnequalTreatment {
        profile: Profile,
        agents: Vec<AgentId>,
        matching: Matching,
        swapped: Matching,
        weight: Weight,
        swapped_weight: Weight,
    },
    InefficientSupport {
        profile: Profile,
        matching: Matching,
        dominated_by: Option<Matching>,
        reason: Option<EfficiencyWitness>,
    },
    IndividualRationality {
        profile: Profile,
        agent: AgentId,
        matching: Matching,
        endowment: Matching,
    },
}

impl Witness {
    pub fn profile(&self) -> &Profile {
        match self {
            Witness::Manipulation { profile, .. }
            | Witness::Bossiness { profile, .. }
            | Witness::Monotonicity { profile, .. }
            | Witness::ProbabilityDrop { profile, .. }
            | Witness::UnequalTreatment { profile, .. }
            | Witness::InefficientSupport { profile, .. }
            | Witness::IndividualRationality { profile, .. } => profile,
        }
    }
}

fn outcome(inst: &Instance, rule: &RuleDescriptor, r: &Profile, opts: &CheckOptions) -> Result<Lottery> {
    Ok(evaluate(inst, rule, r, &opts.limits)?.into_lottery())
}

fn deterministic(inst: &Instance, rule: &RuleDescriptor, r: &Profile, opts: &CheckOptions) -> Result<Option<Matching>> {
    Ok(outcome(inst, rule, r, opts)?.as_degenerate().cloned())
}

/// Agents whose preferences differ between two profiles.
fn deviators(a: &Profile, b: &Profile) -> Vec<AgentId> {
    a.prefs()
        .iter()
        .zip(b.prefs())
        .enumerate()
        .filter(|(_, (x, y))| x != y)
        .map(|(i, _)| AgentId(i))
        .collect()
}

/// Replays a witness against the rule by direct evaluation, independently of
/// any tabulation. Returns whether it demonstrates a violation of `axiom`.
pub fn verify_witness(
    inst: &Instance,
    rule: &RuleDescriptor,
    axiom: AxiomId,
    witness: &Witness,
    opts: &CheckOptions,
) -> Result<bool> {
    if !witness.profile().in_domain(inst) {
        return Ok(false);
    }
    Ok(match witness {
        Witness::Manipulation {
            profile,
            deviation,
            coalition,
            truthful,
            manipulated,
        } => {
            let (Some(mu), Some(nu)) = (
                deterministic(inst, rule, profile, opts)?,
                deterministic(inst, rule, deviation, opts)?,
            ) else {
                return Ok(false);
            };
            let size_ok = match axiom {
                AxiomId::StrategyProof => coalition.len() == 1,
                AxiomId::PairwiseSp => coalition.len() == 2,
                AxiomId::GroupSp => {
                    !coalition.is_empty()
                        && coalition.len() <= opts.max_coalition.unwrap_or(inst.n())
                }
                _ => false,
            };
            let inside = deviators(profile, deviation)
                .iter()
                .all(|a| coalition.contains(a));
            let better = |i: &AgentId| profile.get(*i).weakly_prefers(nu.get(*i), mu.get(*i));
            let strictly = |i: &AgentId| profile.get(*i).prefers(nu.get(*i), mu.get(*i));
            size_ok
                && inside
                && deviation.in_domain(inst)
                && mu == *truthful
                && nu == *manipulated
                && coalition.iter().all(better)
                && coalition.iter().any(strictly)
        }
        Witness::Bossiness {
            profile,
            deviation,
            agent,
            truthful,
            manipulated,
        } => {
            let (Some(mu), Some(nu)) = (
                deterministic(inst, rule, profile, opts)?,
                deterministic(inst, rule, deviation, opts)?,
            ) else {
                return Ok(false);
            };
            axiom == AxiomId::NonBossy
                && deviation.in_domain(inst)
                && deviators(profile, deviation) == vec![*agent]
                && mu == *truthful
                && nu == *manipulated
                && mu.get(*agent) == nu.get(*agent)
                && mu != nu
        }
        Witness::Monotonicity {
            profile,
            transformed,
            before,
            after,
        } => {
            let (Some(mu), Some(nu)) = (
                deterministic(inst, rule, profile, opts)?,
                deterministic(inst, rule, transformed, opts)?,
            ) else {
                return Ok(false);
            };
            axiom == AxiomId::MaskinMonotonic
                && transformed.in_domain(inst)
                && is_monotonic_transformation(profile, transformed, &mu)
                && mu == *before
                && nu == *after
                && mu != nu
        }
        Witness::ProbabilityDrop {
            profile,
            transformed,
            matching,
            before,
            after,
        } => {
            let w0 = outcome(inst, rule, profile, opts)?.weight(matching);
            let w1 = outcome(inst, rule, transformed, opts)?.weight(matching);
            axiom == AxiomId::ProbMonotonic
                && transformed.in_domain(inst)
                && is_monotonic_transformation(profile, transformed, matching)
                && w0 == *before
                && w1 == *after
                && w1.0 < w0.0
        }
        Witness::UnequalTreatment {
            profile,
            agents,
            matching,
            swapped,
            weight,
            swapped_weight,
        } => {
            let [i, j] = agents[..] else {
                return Ok(false);
            };
            let lot = outcome(inst, rule, profile, opts)?;
            axiom == AxiomId::EqualTreatment
                && i != j
                && profile.get(i) == profile.get(j)
                && matching.swapped(i, j) == *swapped
                && lot.weight(matching) == *weight
                && lot.weight(swapped) == *swapped_weight
                && weight != swapped_weight
        }
        Witness::InefficientSupport {
            profile,
            matching,
            dominated_by,
            ..
        } => {
            let lot = outcome(inst, rule, profile, opts)?;
            if lot.weight_ref(matching).is_none() {
                return Ok(false);
            }
            match axiom {
                AxiomId::ExPostPareto => dominated_by
                    .as_ref()
                    .is_some_and(|nu| nu.len() == inst.n() && pareto_dominates(nu, matching, profile)),
                AxiomId::ExPostPairwise => find_blocking_pair(matching, profile).is_some(),
                AxiomId::ExPostNonWasteful => find_waste(inst, matching, profile).is_some(),
                _ => false,
            }
        }
        Witness::IndividualRationality {
            profile,
            agent,
            matching,
            endowment,
        } => {
            let lot = outcome(inst, rule, profile, opts)?;
            axiom == AxiomId::IndividualRationality
                && lot.weight_ref(matching).is_some()
                && profile.get(*agent).prefers(endowment.get(*agent), matching.get(*agent))
        }
    })
}
