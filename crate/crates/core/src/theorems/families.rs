//! Seeded generators for rules, profiles and dominated matchings.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matchings::{is_non_wasteful, is_pairwise_efficient, pareto_dominates};
use crate::model::{enumerate_matchings, AgentId, Domain, Instance, Limits, Matching, ObjectId};
use crate::preferences::{Preference, Profile, ProfileSpace};
use crate::rules::{serial_dictatorship, top_trading_cycles, AgentOrder, DeterministicTable, RuleDescriptor};

pub fn random_order<R: Rng>(n: usize, rng: &mut R) -> AgentOrder {
    let mut v: Vec<usize> = (0..n).collect();
    v.shuffle(rng);
    AgentOrder::from_indices(n, &v).expect("a shuffled permutation")
}

pub fn random_profile<R: Rng>(inst: &Instance, rng: &mut R) -> Profile {
    let prefs = inst
        .agents()
        .map(|_| {
            let mut ranking: Vec<ObjectId> = match inst.domain() {
                Domain::NullBottom => inst.real_objects().collect(),
                Domain::General => inst.objects().collect(),
            };
            ranking.shuffle(rng);
            if inst.domain() == Domain::NullBottom {
                ranking.extend(inst.null_object());
            }
            Preference::new(inst.k(), ranking).expect("a shuffled permutation")
        })
        .collect();
    Profile::new(inst, prefs).expect("generated in the domain")
}

/// Every profile mapped to a uniformly random feasible matching.
pub fn random_table<R: Rng>(inst: &Instance, rng: &mut R, limits: &Limits) -> Result<DeterministicTable> {
    let space = ProfileSpace::new(inst, limits)?;
    let all = enumerate_matchings(inst, limits)?;
    Ok(space
        .iter()
        .map(|r| (r, all.choose(rng).expect("at least one matching").clone()))
        .collect())
}

/// Sequential dictatorship in which the next dictator depends on who has
/// already picked and what they took. The choice function is drawn lazily
/// from `rng` and memoized, so the result is one fixed rule.
pub fn adaptive_serial_dictatorship<R: Rng>(
    inst: &Instance,
    rng: &mut R,
    limits: &Limits,
) -> Result<DeterministicTable> {
    let space = ProfileSpace::new(inst, limits)?;
    let mut next: HashMap<Vec<(usize, usize)>, usize> = HashMap::new();
    let mut table = DeterministicTable::new(Default::default());
    for r in space.iter() {
        let mut history: Vec<(usize, usize)> = Vec::new();
        let mut remaining = inst.capacities().to_vec();
        let mut assignment = vec![ObjectId(0); inst.n()];
        while history.len() < inst.n() {
            let waiting: Vec<usize> = inst
                .agents()
                .map(|a| a.0)
                .filter(|a| !history.iter().any(|(b, _)| b == a))
                .collect();
            let dictator = *next
                .entry(history.clone())
                .or_insert_with(|| *waiting.choose(rng).expect("someone is waiting"));
            let o = *r
                .get(AgentId(dictator))
                .ranking()
                .iter()
                .find(|o| remaining[o.0] > 0)
                .expect("capacity covers every agent");
            remaining[o.0] -= 1;
            assignment[dictator] = o;
            history.push((dictator, o.0));
        }
        table.insert(r, Matching::new(inst, assignment)?);
    }
    Ok(table)
}

/// Serial dictatorship with the outcome at one random profile replaced.
pub fn perturbed_serial_dictatorship<R: Rng>(
    inst: &Instance,
    rng: &mut R,
    limits: &Limits,
) -> Result<DeterministicTable> {
    let space = ProfileSpace::new(inst, limits)?;
    let all = enumerate_matchings(inst, limits)?;
    let sigma = random_order(inst.n(), rng);
    let target = rng.gen_range(0..space.len());
    Ok(space
        .iter()
        .enumerate()
        .map(|(idx, r)| {
            let sd = serial_dictatorship(inst, &sigma, &r);
            let m = if idx as u64 == target {
                all.iter()
                    .filter(|m| **m != sd)
                    .collect::<Vec<_>>()
                    .choose(rng)
                    .map(|m| (*m).clone())
                    .unwrap_or(sd)
            } else {
                sd
            };
            (r, m)
        })
        .collect())
}

/// Agent 0 always receives object 0; agents 1 and 2 share objects 1 and 2,
/// and which of them gets object 1 depends only on agent 0's report.
///
/// Needs three agents and three unit-capacity objects.
pub fn bossy_rule(inst: &Instance, limits: &Limits) -> Result<DeterministicTable> {
    if inst.n() != 3 || inst.capacities() != [1, 1, 1] || inst.domain() != Domain::General {
        return Err(Error::PreconditionViolated(
            "the bossy rule is defined for three agents and three unit objects".into(),
        ));
    }
    let space = ProfileSpace::new(inst, limits)?;
    space
        .iter()
        .map(|r| {
            let flip = r.get(AgentId(0)).prefers(ObjectId(2), ObjectId(1));
            let v = if flip { [0, 2, 1] } else { [0, 1, 2] };
            Ok((r, Matching::from_indices(inst, &v)?))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleFamily {
    SerialDictatorship,
    TopTradingCycles,
    AdaptiveSerialDictatorship,
    PerturbedSerialDictatorship,
    RandomTable,
}

/// A seeded deterministic rule cycling through the families above
/// (`index % 5`). Top trading cycles falls back to serial dictatorship
/// outside housing markets.
pub fn random_rule<R: Rng>(
    inst: &Instance,
    index: usize,
    rng: &mut R,
    limits: &Limits,
) -> Result<(RuleFamily, RuleDescriptor)> {
    let family = match index % 5 {
        0 => RuleFamily::SerialDictatorship,
        1 if inst.is_housing_market() => RuleFamily::TopTradingCycles,
        1 => RuleFamily::SerialDictatorship,
        2 => RuleFamily::AdaptiveSerialDictatorship,
        3 => RuleFamily::PerturbedSerialDictatorship,
        _ => RuleFamily::RandomTable,
    };
    let table = match family {
        RuleFamily::SerialDictatorship => {
            let sigma = random_order(inst.n(), rng);
            ProfileSpace::new(inst, limits)?
                .iter()
                .map(|r| {
                    let m = serial_dictatorship(inst, &sigma, &r);
                    (r, m)
                })
                .collect()
        }
        RuleFamily::TopTradingCycles => {
            let mut e: Vec<usize> = (0..inst.n()).collect();
            e.shuffle(rng);
            let endowment = Matching::from_indices(inst, &e)?;
            ProfileSpace::new(inst, limits)?
                .iter()
                .map(|r| {
                    let m = top_trading_cycles(inst, &endowment, &r)?;
                    Ok((r, m))
                })
                .collect::<Result<_>>()?
        }
        RuleFamily::AdaptiveSerialDictatorship => adaptive_serial_dictatorship(inst, rng, limits)?,
        RuleFamily::PerturbedSerialDictatorship => perturbed_serial_dictatorship(inst, rng, limits)?,
        RuleFamily::RandomTable => random_table(inst, rng, limits)?,
    };
    Ok((family, RuleDescriptor::TabulatedDeterministic(table)))
}

/// A random profile with a Pareto-dominated matching and one matching that
/// dominates it, or `None` after `attempts` profiles without one.
pub fn random_dominated_triple<R: Rng>(
    inst: &Instance,
    rng: &mut R,
    attempts: usize,
) -> Result<Option<(Profile, Matching, Matching)>> {
    let all = enumerate_matchings(inst, &Limits::default())?;
    for _ in 0..attempts {
        let r = random_profile(inst, rng);
        let dominated: Vec<(&Matching, Vec<&Matching>)> = all
            .iter()
            .map(|mu| (mu, all.iter().filter(|nu| pareto_dominates(nu, mu, &r)).collect::<Vec<_>>()))
            .filter(|(_, d)| !d.is_empty())
            .collect();
        if let Some((mu, doms)) = dominated.choose(rng) {
            let nu = doms.choose(rng).expect("non-empty");
            return Ok(Some((r, (*mu).clone(), (*nu).clone())));
        }
    }
    Ok(None)
}

/// Like [`random_dominated_triple`], but `mu` is also non-wasteful and
/// pairwise efficient, the situation a pairwise-efficient non-wasteful rule
/// could produce.
pub fn random_triple_non_wasteful<R: Rng>(
    inst: &Instance,
    rng: &mut R,
    attempts: usize,
) -> Result<Option<(Profile, Matching, Matching)>> {
    let all = enumerate_matchings(inst, &Limits::default())?;
    for _ in 0..attempts {
        let r = random_profile(inst, rng);
        let candidates: Vec<(&Matching, Vec<&Matching>)> = all
            .iter()
            .filter(|mu| is_non_wasteful(inst, mu, &r) && is_pairwise_efficient(mu, &r))
            .map(|mu| (mu, all.iter().filter(|nu| pareto_dominates(nu, mu, &r)).collect::<Vec<_>>()))
            .filter(|(_, d)| !d.is_empty())
            .collect();
        if let Some((mu, doms)) = candidates.choose(rng) {
            let nu = doms.choose(rng).expect("non-empty");
            return Ok(Some((r, (*mu).clone(), (*nu).clone())));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generators_are_reproducible() {
        let inst = Instance::unit(3, 3).unwrap();
        let l = Limits::default();
        let a = random_rule(&inst, 2, &mut ChaCha8Rng::seed_from_u64(9), &l).unwrap();
        let b = random_rule(&inst, 2, &mut ChaCha8Rng::seed_from_u64(9), &l).unwrap();
        assert_eq!(a, b);
        let nb = Instance::null_bottom(4, vec![1, 1, 1, 1]).unwrap();
        let p = random_profile(&nb, &mut ChaCha8Rng::seed_from_u64(3));
        assert!(p.in_domain(&nb));
    }

    #[test]
    fn bossy_rule_keeps_agent_zero_fixed() {
        let inst = Instance::unit(3, 3).unwrap();
        let t = bossy_rule(&inst, &Limits::default()).unwrap();
        assert_eq!(t.len(), 216);
        assert!(t.iter().all(|(_, m)| m.get(AgentId(0)) == ObjectId(0)));
        assert!(bossy_rule(&Instance::unit(2, 2).unwrap(), &Limits::default()).is_err());
    }
}
