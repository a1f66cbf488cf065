//! Harnesses that check the equivalence results for concrete rules, replays
//! of the proof constructions, and a bounded counterexample search.

mod families;
mod partition;
mod replay;
mod search;

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::axioms::{check_on, AxiomId, CheckOptions, CheckReport, Tableau};
use crate::error::{Error, Result};
use crate::matchings::{find_dominating, is_non_wasteful, is_pairwise_efficient};
use crate::model::{Domain, Instance, Matching};
use crate::preferences::Profile;
use crate::rules::RuleDescriptor;

pub use families::{
    adaptive_serial_dictatorship, bossy_rule, perturbed_serial_dictatorship, random_dominated_triple,
    random_order, random_profile, random_rule, random_table, random_triple_non_wasteful, RuleFamily,
};
pub use partition::AgentPartition;
pub use replay::{
    replay_theorem1_proof, replay_theorem3_proof, AppendixReplay, Assertion, Theorem1Replay,
    Theorem3Outcome,
};
pub use search::{search_counterexample, SearchHit, SearchOptions, SearchOutcome, SearchSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremId {
    /// Lottery rules, total capacity above the number of agents.
    Thm1a,
    /// Lottery rules, total capacity equal to the number of agents.
    Thm1b,
    /// Deterministic rules on the general domain.
    Cor2a,
    Cor2b,
    /// Deterministic rules on the null-bottom domain.
    Thm3a,
    Thm3b,
    Prop1,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremStatus {
    Verified,
    Refuted,
    HypothesesNotMet,
}

#[derive(Clone, Debug, Serialize)]
pub struct HypothesisReport {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<CheckReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TheoremVerdict {
    pub theorem: TheoremId,
    pub rule: String,
    pub status: TheoremStatus,
    pub hypotheses: Vec<HypothesisReport>,
    /// `None` unless every hypothesis passed.
    pub conclusion_verified: Option<bool>,
    /// Checker reports the conclusion is built from.
    pub conclusion_reports: Vec<CheckReport>,
    /// Named booleans compared by the conclusion.
    pub properties: Vec<(String, bool)>,
    /// Support matchings that are pairwise efficient and non-wasteful yet
    /// Pareto dominated (lottery harness only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dominated_efficient_support: Option<u64>,
    #[serde(skip)]
    pub timings: Vec<(String, Duration)>,
}

impl TheoremVerdict {
    pub fn verified(&self) -> bool {
        self.status == TheoremStatus::Verified
    }

    /// First failure witness among the conclusion reports.
    pub fn witness(&self) -> Option<&crate::axioms::Witness> {
        self.conclusion_reports.iter().find_map(|r| r.witness.as_ref())
    }
}

struct Harness {
    hypotheses: Vec<HypothesisReport>,
    timings: Vec<(String, Duration)>,
}

impl Harness {
    fn new() -> Self {
        Harness {
            hypotheses: Vec::new(),
            timings: Vec::new(),
        }
    }

    fn fact(&mut self, name: &str, passed: bool) {
        self.hypotheses.push(HypothesisReport {
            name: name.into(),
            passed,
            report: None,
        });
    }

    fn timed<T>(&mut self, label: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f()?;
        self.timings.push((label.into(), start.elapsed()));
        Ok(out)
    }

    fn axiom(&mut self, t: &Tableau, axiom: AxiomId, opts: &CheckOptions) -> Result<CheckReport> {
        self.timed(axiom.name(), || check_on(t, axiom, opts))
    }

    fn hypothesis(&mut self, t: &Tableau, axiom: AxiomId, opts: &CheckOptions) -> Result<()> {
        let report = self.axiom(t, axiom, opts)?;
        self.hypotheses.push(HypothesisReport {
            name: axiom.name().into(),
            passed: report.passed(),
            report: Some(report),
        });
        Ok(())
    }

    fn all_passed(&self) -> bool {
        self.hypotheses.iter().all(|h| h.passed)
    }

    fn finish(self, theorem: TheoremId, rule: &RuleDescriptor) -> TheoremVerdict {
        TheoremVerdict {
            theorem,
            rule: rule.label(),
            status: TheoremStatus::HypothesesNotMet,
            hypotheses: self.hypotheses,
            conclusion_verified: None,
            conclusion_reports: Vec::new(),
            properties: Vec::new(),
            dominated_efficient_support: None,
            timings: self.timings,
        }
    }
}

fn conclude(verdict: &mut TheoremVerdict, holds: bool) {
    verdict.conclusion_verified = Some(holds);
    verdict.status = if holds {
        TheoremStatus::Verified
    } else {
        TheoremStatus::Refuted
    };
}

fn slack(inst: &Instance) -> bool {
    inst.total_capacity() > inst.n() as u64
}

/// Counts (profile, support matching) pairs that are pairwise efficient and
/// non-wasteful but Pareto dominated.
fn count_dominated_efficient(t: &Tableau) -> u64 {
    let inst = t.instance();
    (0..t.len())
        .into_par_iter()
        .map(|idx| {
            let r: Profile = t.space().profile_at(idx as u64);
            t.lottery(idx)
                .support()
                .filter(|mu| {
                    is_pairwise_efficient(mu, &r)
                        && is_non_wasteful(inst, mu, &r)
                        && find_dominating(mu, &r, t.all_matchings()).is_some()
                })
                .count() as u64
        })
        .sum()
}

/// Lottery-rule equivalence of ex-post pairwise and ex-post Pareto efficiency
/// on the general domain, under probabilistic monotonicity (and ex-post
/// non-wastefulness when capacity is in excess).
pub fn verify_theorem1(inst: &Instance, rule: &RuleDescriptor, opts: &CheckOptions) -> Result<TheoremVerdict> {
    let theorem = if slack(inst) { TheoremId::Thm1a } else { TheoremId::Thm1b };
    let mut h = Harness::new();
    h.fact("general_domain", inst.domain() == Domain::General);
    if !h.all_passed() {
        return Ok(h.finish(theorem, rule));
    }
    let t = h.timed("tabulate", || Tableau::new(inst, rule, &opts.limits))?;
    h.hypothesis(&t, AxiomId::ProbMonotonic, opts)?;
    if slack(inst) {
        h.hypothesis(&t, AxiomId::ExPostNonWasteful, opts)?;
    }
    if !h.all_passed() {
        return Ok(h.finish(theorem, rule));
    }
    let pairwise = h.axiom(&t, AxiomId::ExPostPairwise, opts)?;
    let pareto = h.axiom(&t, AxiomId::ExPostPareto, opts)?;
    let dominated = h.timed("dominated_efficient_support", || Ok(count_dominated_efficient(&t)))?;
    let mut v = h.finish(theorem, rule);
    v.properties = vec![
        ("ex_post_pairwise".into(), pairwise.passed()),
        ("ex_post_pareto".into(), pareto.passed()),
    ];
    conclude(&mut v, pairwise.passed() == pareto.passed());
    v.conclusion_reports = vec![pairwise, pareto];
    v.dominated_efficient_support = Some(dominated);
    Ok(v)
}

fn deterministic_equivalence(
    inst: &Instance,
    rule: &RuleDescriptor,
    opts: &CheckOptions,
    domain: Domain,
    ids: (TheoremId, TheoremId),
) -> Result<TheoremVerdict> {
    let theorem = if slack(inst) { ids.0 } else { ids.1 };
    let mut h = Harness::new();
    let domain_name = match domain {
        Domain::General => "general_domain",
        Domain::NullBottom => "null_bottom_domain",
    };
    h.fact(domain_name, inst.domain() == domain);
    h.fact("deterministic_rule", rule.is_deterministic());
    if !h.all_passed() {
        return Ok(h.finish(theorem, rule));
    }
    let t = h.timed("tabulate", || Tableau::new(inst, rule, &opts.limits))?;
    h.fact("deterministic_outcomes", t.is_deterministic());
    if !h.all_passed() {
        return Ok(h.finish(theorem, rule));
    }
    h.hypothesis(&t, AxiomId::PairwiseSp, opts)?;
    if slack(inst) {
        h.hypothesis(&t, AxiomId::ExPostNonWasteful, opts)?;
    }
    if !h.all_passed() {
        return Ok(h.finish(theorem, rule));
    }
    let pairwise = h.axiom(&t, AxiomId::ExPostPairwise, opts)?;
    let pareto = h.axiom(&t, AxiomId::ExPostPareto, opts)?;
    let mut v = h.finish(theorem, rule);
    v.properties = vec![
        ("pairwise_efficient".into(), pairwise.passed()),
        ("pareto_efficient".into(), pareto.passed()),
    ];
    conclude(&mut v, pairwise.passed() == pareto.passed());
    v.conclusion_reports = vec![pairwise, pareto];
    Ok(v)
}

/// Deterministic rules on the general domain: under pairwise
/// strategy-proofness (and non-wastefulness with excess capacity), pairwise
/// efficiency and Pareto efficiency coincide.
pub fn verify_corollary2(inst: &Instance, rule: &RuleDescriptor, opts: &CheckOptions) -> Result<TheoremVerdict> {
    deterministic_equivalence(inst, rule, opts, Domain::General, (TheoremId::Cor2a, TheoremId::Cor2b))
}

/// The same equivalence on the null-bottom domain.
pub fn verify_theorem3(inst: &Instance, rule: &RuleDescriptor, opts: &CheckOptions) -> Result<TheoremVerdict> {
    deterministic_equivalence(inst, rule, opts, Domain::NullBottom, (TheoremId::Thm3a, TheoremId::Thm3b))
}

/// Group strategy-proofness, pairwise strategy-proofness, strategy-proofness
/// with non-bossiness, and Maskin monotonicity must all agree.
pub fn verify_proposition1(inst: &Instance, rule: &RuleDescriptor, opts: &CheckOptions) -> Result<TheoremVerdict> {
    if !rule.is_deterministic() {
        return Err(Error::AxiomNotApplicable {
            axiom: AxiomId::GroupSp,
            reason: "the equivalence concerns deterministic rules".into(),
        });
    }
    let opts = CheckOptions {
        max_coalition: None,
        ..opts.clone()
    };
    let mut h = Harness::new();
    let t = h.timed("tabulate", || Tableau::new(inst, rule, &opts.limits))?;
    h.fact("deterministic_outcomes", t.is_deterministic());
    if !h.all_passed() {
        return Ok(h.finish(TheoremId::Prop1, rule));
    }
    let mut reports = Vec::new();
    for axiom in [
        AxiomId::GroupSp,
        AxiomId::PairwiseSp,
        AxiomId::StrategyProof,
        AxiomId::NonBossy,
        AxiomId::MaskinMonotonic,
    ] {
        reports.push(h.axiom(&t, axiom, &opts)?);
    }
    let pass = |a: AxiomId| reports.iter().any(|r| r.axiom == a && r.passed());
    let properties = vec![
        ("group_sp".to_string(), pass(AxiomId::GroupSp)),
        ("pairwise_sp".to_string(), pass(AxiomId::PairwiseSp)),
        (
            "sp_and_non_bossy".to_string(),
            pass(AxiomId::StrategyProof) && pass(AxiomId::NonBossy),
        ),
        ("maskin_monotonic".to_string(), pass(AxiomId::MaskinMonotonic)),
    ];
    let mut v = h.finish(TheoremId::Prop1, rule);
    conclude(&mut v, properties.iter().all(|(_, b)| *b == properties[0].1));
    v.properties = properties;
    v.conclusion_reports = reports;
    Ok(v)
}

/// Convenience used by tests and the CLI: the first matching a deterministic
/// rule returns at `r`.
pub fn deterministic_outcome(
    inst: &Instance,
    rule: &RuleDescriptor,
    r: &Profile,
    opts: &CheckOptions,
) -> Result<Option<Matching>> {
    Ok(crate::rules::evaluate(inst, rule, r, &opts.limits)?
        .as_matching()
        .cloned())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Limits;
    use crate::preferences::ProfileSpace;
    use crate::rules::{AgentOrder, Lottery, LotteryTable, Weight};

    #[test]
    fn rsd_satisfies_theorem1_case_b() {
        let inst = Instance::unit(3, 3).unwrap();
        let v = verify_theorem1(&inst, &RuleDescriptor::RandomSerialDictatorship, &CheckOptions::default()).unwrap();
        assert_eq!(v.theorem, TheoremId::Thm1b);
        assert!(v.verified());
        assert_eq!(v.dominated_efficient_support, Some(0));
    }

    #[test]
    fn hypotheses_gate_the_conclusion() {
        // agent 1 holds its bottom object under [0, 1] when it ranks 0 first;
        // raising object 1 drops that matching from 2/3 to 1/3
        let inst = Instance::unit(2, 2).unwrap();
        let space = ProfileSpace::new(&inst, &Limits::default()).unwrap();
        let a = Matching::from_indices(&inst, &[0, 1]).unwrap();
        let b = Matching::from_indices(&inst, &[1, 0]).unwrap();
        let table: LotteryTable = space
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let w = if i % 2 == 0 { Weight::new(2, 3) } else { Weight::new(1, 3) };
                let rest = Weight(Weight::one().0 - &w.0);
                (r, Lottery::new([(a.clone(), w), (b.clone(), rest)]).unwrap())
            })
            .collect();
        let rule = RuleDescriptor::TabulatedLottery(table);
        let v = verify_theorem1(&inst, &rule, &CheckOptions::default()).unwrap();
        assert_eq!(v.status, TheoremStatus::HypothesesNotMet);
        assert_eq!(v.conclusion_verified, None);
        assert!(v.conclusion_reports.is_empty());
    }

    #[test]
    fn null_bottom_instances_do_not_meet_the_general_domain_hypothesis() {
        let inst = Instance::null_bottom(2, vec![1, 1, 1]).unwrap();
        let v = verify_theorem1(&inst, &RuleDescriptor::RandomSerialDictatorship, &CheckOptions::default()).unwrap();
        assert_eq!(v.status, TheoremStatus::HypothesesNotMet);
    }

    #[test]
    fn proposition1_on_sd() {
        let inst = Instance::unit(3, 3).unwrap();
        let sd = RuleDescriptor::SerialDictatorship(AgentOrder::from_indices(3, &[2, 0, 1]).unwrap());
        let v = verify_proposition1(&inst, &sd, &CheckOptions::default()).unwrap();
        assert!(v.verified());
        assert!(v.properties.iter().all(|(_, b)| *b));
    }

    #[test]
    fn theorem3_on_sd_null_bottom() {
        let inst = Instance::null_bottom(3, vec![3, 1, 1]).unwrap();
        let sd = RuleDescriptor::SerialDictatorship(AgentOrder::identity(3));
        let v = verify_theorem3(&inst, &sd, &CheckOptions::default()).unwrap();
        assert_eq!(v.theorem, TheoremId::Thm3a);
        assert!(v.verified());
        let wrong = verify_corollary2(&inst, &sd, &CheckOptions::default()).unwrap();
        assert_eq!(wrong.status, TheoremStatus::HypothesesNotMet);
    }
}
