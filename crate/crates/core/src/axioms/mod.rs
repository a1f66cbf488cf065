//! Exhaustive checkers for rule-level axioms over an enumerated profile space.
//!
//! Every scan visits profiles in increasing index order (agent 0's preference
//! is the most significant digit) and, inside a profile, agents, deviations
//! and support matchings in increasing order. The reported witness is the
//! first failure in that order, whatever the number of worker threads.

mod witness;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matchings::{find_dominating, pairwise_witness, pareto_witness, waste_witness};
use crate::model::{enumerate_matchings, AgentId, Instance, Limits, Matching};
use crate::preferences::{Profile, ProfileSpace};
use crate::rules::{evaluate, Lottery, Outcome, RuleDescriptor};

pub use witness::{verify_witness, Witness};

/// The axioms the engine can check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AxiomId {
    StrategyProof,
    PairwiseSp,
    GroupSp,
    NonBossy,
    MaskinMonotonic,
    ProbMonotonic,
    EqualTreatment,
    ExPostPareto,
    ExPostPairwise,
    ExPostNonWasteful,
    IndividualRationality,
}

impl AxiomId {
    pub const ALL: [AxiomId; 11] = [
        AxiomId::StrategyProof,
        AxiomId::PairwiseSp,
        AxiomId::GroupSp,
        AxiomId::NonBossy,
        AxiomId::MaskinMonotonic,
        AxiomId::ProbMonotonic,
        AxiomId::EqualTreatment,
        AxiomId::ExPostPareto,
        AxiomId::ExPostPairwise,
        AxiomId::ExPostNonWasteful,
        AxiomId::IndividualRationality,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AxiomId::StrategyProof => "strategy-proof",
            AxiomId::PairwiseSp => "pairwise-sp",
            AxiomId::GroupSp => "group-sp",
            AxiomId::NonBossy => "non-bossy",
            AxiomId::MaskinMonotonic => "maskin-monotonic",
            AxiomId::ProbMonotonic => "prob-monotonic",
            AxiomId::EqualTreatment => "equal-treatment",
            AxiomId::ExPostPareto => "ex-post-pareto",
            AxiomId::ExPostPairwise => "ex-post-pairwise",
            AxiomId::ExPostNonWasteful => "ex-post-non-wasteful",
            AxiomId::IndividualRationality => "individual-rationality",
        }
    }

    /// Axioms defined only for deterministic rules.
    pub fn deterministic_only(self) -> bool {
        matches!(
            self,
            AxiomId::StrategyProof
                | AxiomId::PairwiseSp
                | AxiomId::GroupSp
                | AxiomId::NonBossy
                | AxiomId::MaskinMonotonic
        )
    }
}

impl fmt::Display for AxiomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AxiomId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        let alias = match key.as_str() {
            "sp" => Some(AxiomId::StrategyProof),
            "psp" => Some(AxiomId::PairwiseSp),
            "gsp" => Some(AxiomId::GroupSp),
            "maskin" | "monotonic" => Some(AxiomId::MaskinMonotonic),
            "ir" => Some(AxiomId::IndividualRationality),
            _ => None,
        };
        alias
            .or_else(|| AxiomId::ALL.into_iter().find(|a| a.name() == key))
            .ok_or_else(|| Error::Format(format!("unknown axiom {s:?}")))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CheckOptions {
    /// Largest coalition for group strategy-proofness; `None` means `n`.
    pub max_coalition: Option<usize>,
    /// Endowment for individual rationality; top trading cycles supplies its own.
    pub endowment: Option<Matching>,
    pub limits: Limits,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub axiom: AxiomId,
    pub rule: String,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub profiles_checked: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_coalition: Option<usize>,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// A rule evaluated on every profile of an instance.
pub struct Tableau {
    space: ProfileSpace,
    rule: RuleDescriptor,
    matchings: Option<Vec<Matching>>,
    lotteries: Vec<Lottery>,
    all_matchings: Vec<Matching>,
}

impl Tableau {
    pub fn new(inst: &Instance, rule: &RuleDescriptor, limits: &Limits) -> Result<Self> {
        let space = ProfileSpace::new(inst, limits)?;
        let all_matchings = enumerate_matchings(inst, limits)?;
        let outcomes = (0..space.len() as usize)
            .into_par_iter()
            .map(|idx| evaluate(inst, rule, &space.profile_at(idx as u64), limits))
            .collect::<Result<Vec<_>>>()?;
        let matchings = outcomes
            .iter()
            .map(|o| o.as_matching().cloned())
            .collect::<Option<Vec<_>>>();
        let lotteries = outcomes.into_iter().map(Outcome::into_lottery).collect();
        Ok(Tableau {
            space,
            rule: rule.clone(),
            matchings,
            lotteries,
            all_matchings,
        })
    }

    pub fn space(&self) -> &ProfileSpace {
        &self.space
    }

    pub fn instance(&self) -> &Instance {
        self.space.instance()
    }

    pub fn rule(&self) -> &RuleDescriptor {
        &self.rule
    }

    pub fn is_deterministic(&self) -> bool {
        self.matchings.is_some()
    }

    /// Deterministic outcome at profile index `idx`.
    pub fn matching(&self, idx: usize) -> Option<&Matching> {
        self.matchings.as_ref().map(|m| &m[idx])
    }

    pub fn lottery(&self, idx: usize) -> &Lottery {
        &self.lotteries[idx]
    }

    pub fn all_matchings(&self) -> &[Matching] {
        &self.all_matchings
    }

    pub fn len(&self) -> usize {
        self.lotteries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lotteries.is_empty()
    }
}

pub fn check_axiom(
    inst: &Instance,
    rule: &RuleDescriptor,
    axiom: AxiomId,
    opts: &CheckOptions,
) -> Result<CheckReport> {
    let start = Instant::now();
    applicability(inst, rule, axiom, opts)?;
    let tableau = Tableau::new(inst, rule, &opts.limits)?;
    let mut report = check_on(&tableau, axiom, opts)?;
    report.wall_time = start.elapsed();
    Ok(report)
}

/// Individual rationality with respect to `endowment` (housing markets only).
pub fn check_individual_rationality(
    inst: &Instance,
    rule: &RuleDescriptor,
    endowment: &Matching,
    opts: &CheckOptions,
) -> Result<CheckReport> {
    let opts = CheckOptions {
        endowment: Some(endowment.clone()),
        ..opts.clone()
    };
    check_axiom(inst, rule, AxiomId::IndividualRationality, &opts)
}

fn applicability(inst: &Instance, rule: &RuleDescriptor, axiom: AxiomId, opts: &CheckOptions) -> Result<()> {
    let refuse = |reason: &str| {
        Err(Error::AxiomNotApplicable {
            axiom,
            reason: reason.into(),
        })
    };
    if axiom.deterministic_only() && !rule.is_deterministic() {
        return refuse("defined for deterministic rules only");
    }
    if axiom == AxiomId::IndividualRationality {
        if !inst.is_housing_market() {
            return refuse("individual rationality needs a housing-market instance");
        }
        if endowment_for(rule, opts).is_none() {
            return refuse("individual rationality needs an endowment");
        }
    }
    if axiom == AxiomId::GroupSp && opts.max_coalition == Some(0) {
        return Err(Error::Bounds("max coalition must be positive".into()));
    }
    Ok(())
}

fn endowment_for<'a>(rule: &'a RuleDescriptor, opts: &'a CheckOptions) -> Option<&'a Matching> {
    opts.endowment.as_ref().or(match rule {
        RuleDescriptor::TopTradingCycles { endowment } => Some(endowment),
        _ => None,
    })
}

/// Runs one checker on an already tabulated rule.
pub fn check_on(tableau: &Tableau, axiom: AxiomId, opts: &CheckOptions) -> Result<CheckReport> {
    let start = Instant::now();
    let inst = tableau.instance();
    applicability(inst, tableau.rule(), axiom, opts)?;
    if axiom.deterministic_only() && !tableau.is_deterministic() {
        return Err(Error::AxiomNotApplicable {
            axiom,
            reason: "the rule returned a non-degenerate lottery".into(),
        });
    }
    let cap = opts.max_coalition.unwrap_or(inst.n()).min(inst.n());
    let scan = Scan::new(tableau);
    let found = match axiom {
        AxiomId::StrategyProof => scan.run(|idx| scan.strategy_proof(idx)),
        AxiomId::PairwiseSp => scan.run(|idx| scan.pairwise_sp(idx)),
        AxiomId::GroupSp => scan.run(|idx| scan.group_sp(idx, cap)),
        AxiomId::NonBossy => scan.run(|idx| scan.non_bossy(idx)),
        AxiomId::MaskinMonotonic => scan.run(|idx| scan.maskin(idx)),
        AxiomId::ProbMonotonic => scan.run(|idx| scan.prob_monotonic(idx)),
        AxiomId::EqualTreatment => scan.run(|idx| scan.equal_treatment(idx)),
        AxiomId::ExPostPareto | AxiomId::ExPostPairwise | AxiomId::ExPostNonWasteful => {
            scan.run(|idx| scan.ex_post(idx, axiom))
        }
        AxiomId::IndividualRationality => {
            let endowment = endowment_for(tableau.rule(), opts).expect("checked above");
            scan.run(|idx| scan.individually_rational(idx, endowment))
        }
    };
    let (verdict, witness, profiles_checked) = match found {
        Some((idx, w)) => (Verdict::Fail, Some(w), idx as u64 + 1),
        None => (Verdict::Pass, None, tableau.len() as u64),
    };
    Ok(CheckReport {
        axiom,
        rule: tableau.rule().label(),
        verdict,
        witness,
        profiles_checked,
        max_coalition: (axiom == AxiomId::GroupSp).then_some(cap),
        wall_time: start.elapsed(),
    })
}

/// Index arithmetic shared by the checkers.
struct Scan<'a> {
    t: &'a Tableau,
    n: usize,
    /// Number of admissible preferences per agent.
    base: usize,
    stride: Vec<usize>,
    /// `monotone[p][o]`: preferences that are monotonic transformations of
    /// preference `p` at object `o`, in increasing index order.
    monotone: Vec<Vec<Vec<usize>>>,
}

impl<'a> Scan<'a> {
    fn new(t: &'a Tableau) -> Self {
        let n = t.instance().n();
        let prefs = t.space().preferences();
        let base = prefs.len();
        let mut stride = vec![1; n];
        for i in (0..n.saturating_sub(1)).rev() {
            stride[i] = stride[i + 1] * base;
        }
        let monotone = prefs
            .iter()
            .map(|p| {
                t.instance()
                    .objects()
                    .map(|o| {
                        (0..base)
                            .filter(|&q| p.monotonic_at(&prefs[q], o))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Scan {
            t,
            n,
            base,
            stride,
            monotone,
        }
    }

    fn run<F>(&self, f: F) -> Option<(usize, Witness)>
    where
        F: Fn(usize) -> Option<Witness> + Sync + Send,
    {
        (0..self.t.len())
            .into_par_iter()
            .find_map_first(|idx| f(idx).map(|w| (idx, w)))
    }

    fn profile(&self, idx: usize) -> Profile {
        self.t.space().profile_at(idx as u64)
    }

    fn coords(&self, idx: usize) -> Vec<usize> {
        self.t.space().coords(idx as u64)
    }

    fn det(&self, idx: usize) -> &Matching {
        self.t.matching(idx).expect("deterministic tableau")
    }

    fn manipulation(&self, idx: usize, dev: usize, coalition: Vec<AgentId>) -> Witness {
        Witness::Manipulation {
            profile: self.profile(idx),
            deviation: self.profile(dev),
            coalition,
            truthful: self.det(idx).clone(),
            manipulated: self.det(dev).clone(),
        }
    }

    fn strategy_proof(&self, idx: usize) -> Option<Witness> {
        let c = self.coords(idx);
        let r = self.profile(idx);
        let mu = self.det(idx);
        for (i, &ci) in c.iter().enumerate() {
            let pref = r.get(AgentId(i));
            for p in (0..self.base).filter(|&p| p != ci) {
                let dev = idx + p * self.stride[i] - ci * self.stride[i];
                if pref.prefers(self.det(dev).as_slice()[i], mu.as_slice()[i]) {
                    return Some(self.manipulation(idx, dev, vec![AgentId(i)]));
                }
            }
        }
        None
    }

    fn pairwise_sp(&self, idx: usize) -> Option<Witness> {
        let c = self.coords(idx);
        let r = self.profile(idx);
        let mu = self.det(idx);
        for i in 0..self.n {
            for j in i + 1..self.n {
                let (ri, rj) = (r.get(AgentId(i)), r.get(AgentId(j)));
                let (mi, mj) = (mu.as_slice()[i], mu.as_slice()[j]);
                let base = idx - c[i] * self.stride[i] - c[j] * self.stride[j];
                for pi in 0..self.base {
                    for pj in 0..self.base {
                        if pi == c[i] && pj == c[j] {
                            continue;
                        }
                        let dev = base + pi * self.stride[i] + pj * self.stride[j];
                        let nu = self.det(dev);
                        let (ni, nj) = (nu.as_slice()[i], nu.as_slice()[j]);
                        let i_gains = ri.prefers(ni, mi) && rj.weakly_prefers(nj, mj);
                        let j_gains = rj.prefers(nj, mj) && ri.weakly_prefers(ni, mi);
                        if i_gains || j_gains {
                            return Some(self.manipulation(idx, dev, vec![AgentId(i), AgentId(j)]));
                        }
                    }
                }
            }
        }
        None
    }

    /// Scans every other profile `R'` whose set `D` of deviating agents has at
    /// most `cap` members. The coalition is `D`, extended by the first
    /// non-deviating agent who strictly gains when no member of `D` does.
    fn group_sp(&self, idx: usize, cap: usize) -> Option<Witness> {
        let c = self.coords(idx);
        let r = self.profile(idx);
        let mu = self.det(idx);
        let mut d = vec![0usize; self.n];
        for dev in 0..self.t.len() {
            if dev == idx {
                continue;
            }
            let mut rest = dev;
            let mut size = 0;
            for i in 0..self.n {
                d[i] = rest / self.stride[i];
                rest %= self.stride[i];
                size += usize::from(d[i] != c[i]);
            }
            if size > cap {
                continue;
            }
            let nu = self.det(dev);
            let mut all_weak = true;
            let mut strict_inside = false;
            let mut strict_outside = None;
            for i in 0..self.n {
                let (p, a, b) = (r.get(AgentId(i)), nu.as_slice()[i], mu.as_slice()[i]);
                let strict = p.prefers(a, b);
                if d[i] != c[i] {
                    all_weak &= p.weakly_prefers(a, b);
                    strict_inside |= strict;
                } else if strict && strict_outside.is_none() {
                    strict_outside = Some(i);
                }
            }
            if !all_weak {
                continue;
            }
            let mut coalition: Vec<AgentId> = (0..self.n).filter(|&i| d[i] != c[i]).map(AgentId).collect();
            if !strict_inside {
                match strict_outside {
                    Some(extra) if size < cap => {
                        coalition.push(AgentId(extra));
                        coalition.sort();
                    }
                    _ => continue,
                }
            }
            return Some(self.manipulation(idx, dev, coalition));
        }
        None
    }

    fn non_bossy(&self, idx: usize) -> Option<Witness> {
        let c = self.coords(idx);
        let mu = self.det(idx);
        for (i, &ci) in c.iter().enumerate() {
            for p in (0..self.base).filter(|&p| p != ci) {
                let dev = idx + p * self.stride[i] - ci * self.stride[i];
                let nu = self.det(dev);
                if nu.as_slice()[i] == mu.as_slice()[i] && nu != mu {
                    return Some(Witness::Bossiness {
                        profile: self.profile(idx),
                        deviation: self.profile(dev),
                        agent: AgentId(i),
                        truthful: mu.clone(),
                        manipulated: nu.clone(),
                    });
                }
            }
        }
        None
    }

    /// Indices of every monotonic transformation of profile `idx` at `mu`
    /// other than the profile itself, in increasing order.
    fn transformations(&self, idx: usize, mu: &Matching) -> Vec<usize> {
        let c = self.coords(idx);
        let allowed: Vec<&Vec<usize>> = (0..self.n)
            .map(|i| &self.monotone[c[i]][mu.as_slice()[i].0])
            .collect();
        let mut out = Vec::new();
        let mut pos = vec![0usize; self.n];
        loop {
            let dev: usize = (0..self.n).map(|i| allowed[i][pos[i]] * self.stride[i]).sum();
            if dev != idx {
                out.push(dev);
            }
            let mut i = self.n;
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                pos[i] += 1;
                if pos[i] < allowed[i].len() {
                    break;
                }
                pos[i] = 0;
            }
        }
    }

    fn maskin(&self, idx: usize) -> Option<Witness> {
        let mu = self.det(idx);
        self.transformations(idx, mu)
            .into_iter()
            .find(|&dev| self.det(dev) != mu)
            .map(|dev| Witness::Monotonicity {
                profile: self.profile(idx),
                transformed: self.profile(dev),
                before: mu.clone(),
                after: self.det(dev).clone(),
            })
    }

    fn prob_monotonic(&self, idx: usize) -> Option<Witness> {
        let lottery = self.t.lottery(idx);
        for (mu, w) in lottery.entries() {
            for dev in self.transformations(idx, mu) {
                let after = self.t.lottery(dev).weight(mu);
                if after.0 < w.0 {
                    return Some(Witness::ProbabilityDrop {
                        profile: self.profile(idx),
                        transformed: self.profile(dev),
                        matching: mu.clone(),
                        before: w.clone(),
                        after,
                    });
                }
            }
        }
        None
    }

    fn equal_treatment(&self, idx: usize) -> Option<Witness> {
        let c = self.coords(idx);
        let lottery = self.t.lottery(idx);
        for i in 0..self.n {
            for j in (i + 1..self.n).filter(|&j| c[j] == c[i]) {
                for (mu, w) in lottery.entries() {
                    let swapped = mu.swapped(AgentId(i), AgentId(j));
                    let other = lottery.weight(&swapped);
                    if other != *w {
                        return Some(Witness::UnequalTreatment {
                            profile: self.profile(idx),
                            agents: vec![AgentId(i), AgentId(j)],
                            matching: mu.clone(),
                            swapped,
                            weight: w.clone(),
                            swapped_weight: other,
                        });
                    }
                }
            }
        }
        None
    }

    fn ex_post(&self, idx: usize, axiom: AxiomId) -> Option<Witness> {
        let r = self.profile(idx);
        let inst = self.t.instance();
        for mu in self.t.lottery(idx).support() {
            let (dominated_by, reason) = match axiom {
                AxiomId::ExPostPareto => match find_dominating(mu, &r, self.t.all_matchings()) {
                    Some(nu) => (Some(nu.clone()), pareto_witness(inst, mu, &r)),
                    None => continue,
                },
                AxiomId::ExPostPairwise => match pairwise_witness(mu, &r) {
                    Some(w) => (None, Some(w)),
                    None => continue,
                },
                _ => match waste_witness(inst, mu, &r) {
                    Some(w) => (None, Some(w)),
                    None => continue,
                },
            };
            return Some(Witness::InefficientSupport {
                profile: r,
                matching: mu.clone(),
                dominated_by,
                reason,
            });
        }
        None
    }

    fn individually_rational(&self, idx: usize, endowment: &Matching) -> Option<Witness> {
        let r = self.profile(idx);
        for mu in self.t.lottery(idx).support() {
            for i in 0..self.n {
                let (held, own) = (mu.as_slice()[i], endowment.as_slice()[i]);
                if r.get(AgentId(i)).prefers(own, held) {
                    return Some(Witness::IndividualRationality {
                        profile: r,
                        agent: AgentId(i),
                        matching: mu.clone(),
                        endowment: endowment.clone(),
                    });
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::{AgentOrder, DeterministicTable};

    fn n3k3() -> Instance {
        Instance::unit(3, 3).unwrap()
    }

    fn check(inst: &Instance, rule: &RuleDescriptor, axiom: AxiomId) -> CheckReport {
        check_axiom(inst, rule, axiom, &CheckOptions::default()).unwrap()
    }

    #[test]
    fn axiom_names_round_trip() {
        for a in AxiomId::ALL {
            assert_eq!(a.name().parse::<AxiomId>().unwrap(), a);
            assert_eq!(serde_json::to_string(&a).unwrap(), format!("\"{}\"", a.name()));
        }
        assert_eq!("gsp".parse::<AxiomId>().unwrap(), AxiomId::GroupSp);
        assert!("nonsense".parse::<AxiomId>().is_err());
    }

    #[test]
    fn sd_is_strategy_proof() {
        let inst = n3k3();
        let sd = RuleDescriptor::SerialDictatorship(AgentOrder::identity(3));
        let rep = check(&inst, &sd, AxiomId::StrategyProof);
        assert!(rep.passed());
        assert_eq!(rep.profiles_checked, 216);
    }

    #[test]
    fn rsd_treats_equals_equally() {
        let inst = n3k3();
        assert!(check(&inst, &RuleDescriptor::RandomSerialDictatorship, AxiomId::EqualTreatment).passed());
        let sd = RuleDescriptor::SerialDictatorship(AgentOrder::identity(3));
        let rep = check(&inst, &sd, AxiomId::EqualTreatment);
        assert_eq!(rep.verdict, Verdict::Fail);
        assert!(verify_witness(&inst, &sd, AxiomId::EqualTreatment, rep.witness.as_ref().unwrap(), &CheckOptions::default()).unwrap());
    }

    #[test]
    fn deterministic_only_axioms_reject_lotteries() {
        let inst = n3k3();
        let err = check_axiom(&inst, &RuleDescriptor::RandomSerialDictatorship, AxiomId::StrategyProof, &CheckOptions::default());
        assert!(matches!(err, Err(Error::AxiomNotApplicable { .. })));
    }

    #[test]
    fn constant_rule_fails_ex_post_pareto_with_sound_witness() {
        let inst = n3k3();
        let space = ProfileSpace::new(&inst, &Limits::default()).unwrap();
        let fixed = Matching::from_indices(&inst, &[0, 1, 2]).unwrap();
        let table: DeterministicTable = space.iter().map(|r| (r, fixed.clone())).collect();
        let rule = RuleDescriptor::TabulatedDeterministic(table);
        let opts = CheckOptions::default();
        for axiom in [AxiomId::ExPostPareto, AxiomId::ExPostPairwise] {
            let rep = check(&inst, &rule, axiom);
            assert_eq!(rep.verdict, Verdict::Fail);
            assert!(verify_witness(&inst, &rule, axiom, rep.witness.as_ref().unwrap(), &opts).unwrap());
        }
        // a constant rule cannot be manipulated and is individually rational for its own endowment
        assert!(check(&inst, &rule, AxiomId::GroupSp).passed());
        assert!(check_individual_rationality(&inst, &rule, &fixed, &opts).unwrap().passed());
    }

    #[test]
    fn ttc_is_individually_rational_and_sd_is_not() {
        let inst = n3k3();
        let endowment = Matching::from_indices(&inst, &[0, 1, 2]).unwrap();
        let ttc = RuleDescriptor::TopTradingCycles { endowment: endowment.clone() };
        assert!(check(&inst, &ttc, AxiomId::IndividualRationality).passed());
        let sd = RuleDescriptor::SerialDictatorship(AgentOrder::identity(3));
        let opts = CheckOptions::default();
        let rep = check_individual_rationality(&inst, &sd, &endowment, &opts).unwrap();
        assert_eq!(rep.verdict, Verdict::Fail);
        assert!(verify_witness(&inst, &sd, AxiomId::IndividualRationality, rep.witness.as_ref().unwrap(), &rep_opts(&endowment)).unwrap());
        assert!(matches!(
            check_axiom(&inst, &sd, AxiomId::IndividualRationality, &opts),
            Err(Error::AxiomNotApplicable { .. })
        ));
    }

    fn rep_opts(endowment: &Matching) -> CheckOptions {
        CheckOptions {
            endowment: Some(endowment.clone()),
            ..CheckOptions::default()
        }
    }

    #[test]
    fn transformations_match_the_quadratic_filter() {
        use crate::preferences::is_monotonic_transformation;
        let inst = Instance::general(3, vec![2, 1, 1]).unwrap();
        let rule = RuleDescriptor::SerialDictatorship(AgentOrder::identity(3));
        let t = Tableau::new(&inst, &rule, &Limits::default()).unwrap();
        let scan = Scan::new(&t);
        for idx in (0..t.len()).step_by(17) {
            let mu = t.matching(idx).unwrap();
            let r = scan.profile(idx);
            let direct: Vec<usize> = (0..t.len())
                .filter(|&d| d != idx && is_monotonic_transformation(&r, &scan.profile(d), mu))
                .collect();
            assert_eq!(scan.transformations(idx, mu), direct);
        }
    }

    #[test]
    fn reports_are_deterministic_across_thread_counts() {
        let inst = n3k3();
        let sd = RuleDescriptor::SerialDictatorship(AgentOrder::identity(3));
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| serde_json::to_string(&check(&inst, &sd, AxiomId::EqualTreatment)).unwrap())
        };
        assert_eq!(run(1), run(4));
    }
}
