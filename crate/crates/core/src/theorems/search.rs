//! Randomized and greedy search over tabulated rules.
//!
//! Per-profile requirements (the ex-post axioms) are built into the table by
//! only ever choosing outcomes that meet them. Rule-level requirements are
//! checked on the whole table; monotonicity failures are repaired greedily by
//! copying the outcome at the original profile to the transformed one. Every
//! full evaluation of a table counts against the budget.

use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::axioms::{check_axiom, check_on, verify_witness, AxiomId, CheckOptions, CheckReport, Tableau, Witness};
use crate::error::{Error, Result};
use crate::io::NamedInstance;
use crate::matchings::{is_non_wasteful, is_pairwise_efficient, is_pareto_efficient_among};
use crate::model::{enumerate_matchings, Instance, Matching};
use crate::preferences::{Profile, ProfileSpace};
use crate::rules::{Lottery, RuleDescriptor, RuleTable, Weight};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SearchSpec {
    pub required: Vec<AxiomId>,
    pub violated: AxiomId,
    /// Search lottery rules (supports of one or two matchings) instead of
    /// deterministic ones.
    pub lottery: bool,
}

#[derive(Clone, Debug)]
pub struct SearchOptions {
    /// Maximum number of full table evaluations.
    pub budget: u64,
    pub seed: u64,
    /// Greedy repairs allowed on one table before starting a fresh attempt.
    pub max_repairs: u64,
    /// Where a hit is written; a file in the system temp directory otherwise.
    pub out: Option<PathBuf>,
    pub check: CheckOptions,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            budget: 200,
            seed: 0,
            max_repairs: 32,
            out: None,
            check: CheckOptions::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchHit {
    #[serde(skip)]
    pub rule: RuleDescriptor,
    pub path: PathBuf,
    /// Fresh reports for the required axioms, computed from the file on disk.
    pub required: Vec<CheckReport>,
    /// Fresh report for the violated axiom, computed from the file on disk.
    pub violation: CheckReport,
    /// True when the reloaded table equals the one found, every required
    /// axiom passes, the violated one fails and its witness replays.
    pub reverified: bool,
    pub attempt: u64,
    pub evaluations: u64,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "snake_case", tag = "outcome")]
pub enum SearchOutcome {
    Found(Box<SearchHit>),
    /// Nothing found within the budget. This says nothing about whether such
    /// a rule exists.
    BudgetExhausted { evaluations: u64, attempts: u64 },
}

impl SearchOutcome {
    pub fn hit(&self) -> Option<&SearchHit> {
        match self {
            SearchOutcome::Found(h) => Some(h),
            SearchOutcome::BudgetExhausted { .. } => None,
        }
    }
}

fn per_profile(axiom: AxiomId) -> bool {
    matches!(
        axiom,
        AxiomId::ExPostPareto | AxiomId::ExPostPairwise | AxiomId::ExPostNonWasteful
    )
}

fn meets(inst: &Instance, axiom: AxiomId, mu: &Matching, r: &Profile, all: &[Matching]) -> bool {
    match axiom {
        AxiomId::ExPostPareto => is_pareto_efficient_among(mu, r, all),
        AxiomId::ExPostPairwise => is_pairwise_efficient(mu, r),
        AxiomId::ExPostNonWasteful => is_non_wasteful(inst, mu, r),
        _ => true,
    }
}

/// Outcomes allowed at one profile, split by whether they already break the
/// violated axiom there.
struct Candidates {
    violating: Vec<Matching>,
    other: Vec<Matching>,
}

fn build(
    cands: &[Candidates],
    attempt: u64,
    lottery: bool,
    rng: &mut ChaCha8Rng,
) -> Vec<Lottery> {
    cands
        .iter()
        .map(|c| {
            if attempt == 0 {
                let m = c.violating.first().or(c.other.first()).expect("non-empty");
                return Lottery::degenerate(m.clone());
            }
            let mut support = Vec::new();
            if !c.violating.is_empty() && rng.gen_bool(0.5) {
                support.push(c.violating.choose(rng).expect("non-empty").clone());
            }
            let size = if lottery { rng.gen_range(1..=2) } else { 1 };
            let pool: Vec<&Matching> = c.violating.iter().chain(&c.other).collect();
            while support.len() < size.min(pool.len()) {
                let m = (*pool.choose(rng).expect("non-empty")).clone();
                if !support.contains(&m) {
                    support.push(m);
                }
            }
            let w = Weight::new(1, support.len() as i64);
            Lottery::new(support.into_iter().map(|m| (m, w.clone()))).expect("uniform weights")
        })
        .collect()
}

fn descriptor(space: &ProfileSpace, table: &[Lottery], lottery: bool) -> RuleDescriptor {
    if lottery {
        RuleDescriptor::TabulatedLottery(space.iter().zip(table.iter().cloned()).collect())
    } else {
        RuleDescriptor::TabulatedDeterministic(RuleTable::from_iter(
            space
                .iter()
                .zip(table)
                .map(|(r, l)| (r, l.as_degenerate().expect("deterministic search").clone())),
        ))
    }
}

/// Looks for a tabulated rule that satisfies every `required` axiom and
/// violates `violated`. A hit is written to disk, read back and checked again
/// from scratch before it is returned.
pub fn search_counterexample(
    named: &NamedInstance,
    spec: &SearchSpec,
    opts: &SearchOptions,
) -> Result<SearchOutcome> {
    let inst = &named.instance;
    if spec.lottery {
        if let Some(&axiom) = spec
            .required
            .iter()
            .chain(std::iter::once(&spec.violated))
            .find(|a| a.deterministic_only())
        {
            return Err(Error::AxiomNotApplicable {
                axiom,
                reason: "lottery search cannot use deterministic-only axioms".into(),
            });
        }
    }
    if spec.required.contains(&spec.violated) {
        return Err(Error::PreconditionViolated(
            "an axiom cannot be both required and violated".into(),
        ));
    }
    if opts.budget == 0 {
        return Ok(SearchOutcome::BudgetExhausted {
            evaluations: 0,
            attempts: 0,
        });
    }
    let limits = &opts.check.limits;
    let space = ProfileSpace::new(inst, limits)?;
    let all = enumerate_matchings(inst, limits)?;

    let mut cands = Vec::with_capacity(space.len() as usize);
    for r in space.iter() {
        let allowed = all
            .iter()
            .filter(|m| spec.required.iter().all(|&a| meets(inst, a, m, &r, &all)));
        let (violating, other): (Vec<Matching>, Vec<Matching>) = allowed
            .cloned()
            .partition(|m| per_profile(spec.violated) && !meets(inst, spec.violated, m, &r, &all));
        if violating.is_empty() && other.is_empty() {
            // Some per-profile requirement cannot be met at all.
            return Ok(SearchOutcome::BudgetExhausted {
                evaluations: 0,
                attempts: 0,
            });
        }
        cands.push(Candidates { violating, other });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut evaluations = 0u64;
    let mut attempt = 0u64;
    while evaluations < opts.budget {
        let mut table = build(&cands, attempt, spec.lottery, &mut rng);
        let mut repairs = 0u64;
        loop {
            let rule = descriptor(&space, &table, spec.lottery);
            let tableau = Tableau::new(inst, &rule, limits)?;
            evaluations += 1;
            let mut repaired = false;
            let mut rejected = false;
            for &axiom in &spec.required {
                let report = check_on(&tableau, axiom, &opts.check)?;
                match report.witness {
                    None => continue,
                    Some(Witness::Monotonicity { profile, transformed, .. })
                    | Some(Witness::ProbabilityDrop { profile, transformed, .. }) => {
                        let from = space.index_of(&profile).expect("in space") as usize;
                        let to = space.index_of(&transformed).expect("in space") as usize;
                        table[to] = table[from].clone();
                        repaired = true;
                    }
                    Some(_) => rejected = true,
                }
                break;
            }
            if !repaired && !rejected {
                let report = check_on(&tableau, spec.violated, &opts.check)?;
                if !report.passed() {
                    return Ok(SearchOutcome::Found(Box::new(persist(
                        named, spec, opts, rule, attempt, evaluations,
                    )?)));
                }
            }
            repairs += 1;
            if !repaired || repairs > opts.max_repairs || evaluations >= opts.budget {
                break;
            }
        }
        attempt += 1;
    }
    Ok(SearchOutcome::BudgetExhausted {
        evaluations,
        attempts: attempt,
    })
}

fn persist(
    named: &NamedInstance,
    spec: &SearchSpec,
    opts: &SearchOptions,
    rule: RuleDescriptor,
    attempt: u64,
    evaluations: u64,
) -> Result<SearchHit> {
    let path = opts.out.clone().unwrap_or_else(|| {
        std::env::temp_dir().join(format!(
            "axiomlab-cex-{}-{}-{}.json",
            spec.violated.name(),
            opts.seed,
            std::process::id()
        ))
    });
    named.write_rule_table(&rule, &path)?;
    let reloaded = named.read_rule_table(&path)?;
    let inst = &named.instance;
    let required = spec
        .required
        .iter()
        .map(|&a| check_axiom(inst, &reloaded, a, &opts.check))
        .collect::<Result<Vec<_>>>()?;
    let violation = check_axiom(inst, &reloaded, spec.violated, &opts.check)?;
    let replayed = match &violation.witness {
        Some(w) => verify_witness(inst, &reloaded, spec.violated, w, &opts.check)?,
        None => false,
    };
    let reverified = reloaded == rule && required.iter().all(CheckReport::passed) && replayed;
    Ok(SearchHit {
        rule,
        path,
        required,
        violation,
        reverified,
        attempt,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn named(n: usize, k: usize) -> NamedInstance {
        NamedInstance::with_default_names(Instance::unit(n, k).unwrap())
    }

    #[test]
    fn zero_budget_is_exhausted() {
        let spec = SearchSpec {
            required: vec![],
            violated: AxiomId::StrategyProof,
            lottery: false,
        };
        let opts = SearchOptions {
            budget: 0,
            ..Default::default()
        };
        assert!(matches!(
            search_counterexample(&named(3, 3), &spec, &opts).unwrap(),
            SearchOutcome::BudgetExhausted { evaluations: 0, .. }
        ));
    }

    #[test]
    fn greedy_rule_breaks_pareto_and_monotonicity() {
        let dir = tempfile::tempdir().unwrap();
        let spec = SearchSpec {
            required: vec![AxiomId::ExPostPairwise, AxiomId::ExPostNonWasteful],
            violated: AxiomId::ExPostPareto,
            lottery: false,
        };
        let opts = SearchOptions {
            budget: 5,
            out: Some(dir.path().join("hit.json")),
            ..Default::default()
        };
        let ni = named(3, 3);
        let out = search_counterexample(&ni, &spec, &opts).unwrap();
        let hit = out.hit().expect("the three-cycle guarantees a hit");
        assert!(hit.reverified);
        assert_eq!(hit.evaluations, 1);
        let maskin = check_axiom(&ni.instance, &hit.rule, AxiomId::MaskinMonotonic, &Default::default()).unwrap();
        assert!(!maskin.passed());
    }

    #[test]
    fn conflicting_spec_is_rejected() {
        let spec = SearchSpec {
            required: vec![AxiomId::ExPostPareto],
            violated: AxiomId::ExPostPareto,
            lottery: false,
        };
        assert!(search_counterexample(&named(2, 2), &spec, &Default::default()).is_err());
    }
}
