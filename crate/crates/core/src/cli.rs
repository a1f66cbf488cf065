//! The `axiomlab` command line. Reports go to stdout (or `--out`) as JSON;
//! wall-clock timings go to stderr so the report itself is byte-stable.
//!
//! Exit codes: 0 pass, 1 fail (with a witness where one exists), 2 usage,
//! input or size errors.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::axioms::{check_axiom, AxiomId, CheckOptions};
use crate::error::{Error, Result};
use crate::io::{read_json, to_pretty, NamedInstance};
use crate::matchings::{
    find_dominating, is_non_wasteful, is_pairwise_efficient, is_pareto_efficient_among, pairwise_witness,
    pareto_witness, waste_witness,
};
use crate::model::{enumerate_matchings, Instance, Limits, Matching, ObjectId};
use crate::preferences::Profile;
use crate::rules::{random_serial_dictatorship, serial_dictatorship, top_trading_cycles, AgentOrder};
use crate::theorems::{
    random_profile, replay_theorem1_proof, replay_theorem3_proof, search_counterexample, verify_corollary2,
    verify_proposition1, verify_theorem1, verify_theorem3, SearchOptions, SearchOutcome, SearchSpec,
};

#[derive(Parser, Debug)]
#[command(name = "axiomlab", version, about = "Exhaustive checks of allocation rules against axioms")]
pub struct Cli {
    /// Worker threads for exhaustive scans (default: available parallelism).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct ProfileArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub profile: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct TripleArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub profile: PathBuf,
    /// The dominated matching.
    #[arg(long)]
    pub matching: PathBuf,
    /// A matching that Pareto dominates `--matching`.
    #[arg(long)]
    pub dominating: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MatchingProperty {
    #[value(alias = "ex-post-pareto")]
    Pareto,
    #[value(alias = "ex-post-pairwise")]
    Pairwise,
    #[value(alias = "ex-post-non-wasteful")]
    NonWasteful,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TheoremChoice {
    /// Lottery rules on the general domain.
    Thm1,
    /// Deterministic rules on the general domain.
    Cor2,
    /// Deterministic rules on the null-bottom domain.
    Thm3,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CapacityStyle {
    Unit,
    SumEqualsN,
    Slack,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check one matching at one profile for an efficiency property.
    CheckMatching {
        #[command(flatten)]
        input: ProfileArgs,
        #[arg(long)]
        matching: PathBuf,
        #[arg(long, value_enum)]
        axiom: MatchingProperty,
    },
    /// Check a rule against one axiom over every profile.
    CheckRule {
        #[arg(long)]
        instance: PathBuf,
        /// rsd, sd, sd:2,0,1, ttc, ttc:<object names> or a rule table file.
        #[arg(long)]
        rule: String,
        #[arg(long)]
        axiom: AxiomId,
        #[arg(long)]
        max_coalition: Option<usize>,
        /// Endowment for individual rationality (matching file).
        #[arg(long)]
        endowment: Option<PathBuf>,
    },
    /// Exact random serial dictatorship lottery.
    Rsd {
        #[command(flatten)]
        input: ProfileArgs,
    },
    /// Serial dictatorship outcome.
    Sd {
        #[command(flatten)]
        input: ProfileArgs,
        /// Agent order, e.g. 2,0,1 (default: 0,1,...).
        #[arg(long, value_delimiter = ',')]
        order: Option<Vec<usize>>,
    },
    /// Top trading cycles outcome in a housing market.
    Ttc {
        #[command(flatten)]
        input: ProfileArgs,
        /// Endowment matching file (default: agent i owns object i).
        #[arg(long)]
        endowment: Option<PathBuf>,
    },
    /// Check the pairwise/Pareto equivalence for a rule, hypotheses first.
    VerifyThm1 {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        rule: String,
        #[arg(long, value_enum, default_value = "thm1")]
        theorem: TheoremChoice,
    },
    /// Check that the four incentive properties agree for a deterministic rule.
    VerifyProp1 {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        rule: String,
        #[arg(long)]
        max_coalition: Option<usize>,
    },
    /// Replay the general-domain construction on a dominated matching.
    ReplayProof {
        #[command(flatten)]
        input: TripleArgs,
    },
    /// Replay the null-bottom construction on a dominated matching.
    ReplayAppendix {
        #[command(flatten)]
        input: TripleArgs,
    },
    /// Search tabulated rules meeting `--require` and violating `--axiom`.
    SearchCex {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_delimiter = ',')]
        require: Vec<AxiomId>,
        #[arg(long)]
        axiom: AxiomId,
        #[arg(long, default_value_t = 200)]
        budget: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Search lottery rules instead of deterministic ones.
        #[arg(long)]
        lottery: bool,
        /// File for a found rule (default: a file in the temp directory).
        #[arg(long)]
        rule_out: Option<PathBuf>,
    },
    /// Generate a reproducible random instance and profile.
    GenInstance {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value = "unit")]
        capacity_style: CapacityStyle,
        /// Add a null-object ranked last by everyone.
        #[arg(long)]
        null_bottom: bool,
    },
}

/// Largest agent and object counts `gen-instance` accepts.
pub const GEN_MAX: usize = 12;

/// Random instance with the requested capacity style and a random profile
/// for it. With `null_bottom`, a null-object of capacity `n` is added at
/// index 0 and `k` counts the real objects only.
pub fn gen_instance(
    seed: u64,
    n: usize,
    k: usize,
    style: CapacityStyle,
    null_bottom: bool,
) -> Result<(NamedInstance, Profile)> {
    if !(1..=GEN_MAX).contains(&n) || !(1..=GEN_MAX).contains(&k) {
        return Err(Error::Bounds(format!("n and k must lie in 1..={GEN_MAX}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let caps: Vec<u32> = match style {
        CapacityStyle::Unit => {
            if k < n && !null_bottom {
                return Err(Error::Bounds(format!("unit capacities need k >= n, got k={k} n={n}")));
            }
            vec![1; k]
        }
        CapacityStyle::SumEqualsN => {
            if k > n {
                return Err(Error::Bounds(format!("capacities summing to n need k <= n, got k={k} n={n}")));
            }
            composition(n, k, &mut rng)
        }
        CapacityStyle::Slack => {
            let total = (n + rng.gen_range(1..=n)).max(k);
            composition(total, k, &mut rng)
        }
    };
    let inst = if null_bottom {
        let mut all = vec![n as u32];
        all.extend(caps);
        Instance::null_bottom(n, all)?
    } else {
        Instance::general(n, caps)?
    };
    let profile = random_profile(&inst, &mut rng);
    Ok((NamedInstance::with_default_names(inst), profile))
}

/// `k` positive parts summing to `total`, uniformly among compositions.
fn composition<R: Rng>(total: usize, k: usize, rng: &mut R) -> Vec<u32> {
    let mut cuts: Vec<usize> = (1..total).collect::<Vec<_>>().choose_multiple(rng, k - 1).copied().collect();
    cuts.sort_unstable();
    cuts.insert(0, 0);
    cuts.push(total);
    cuts.windows(2).map(|w| (w[1] - w[0]) as u32).collect()
}

struct Report {
    body: Value,
    pass: bool,
}

fn load_profile(named: &NamedInstance, path: &Path) -> Result<Profile> {
    named.profile_from_value(&read_json(path)?)
}

fn load_matching(named: &NamedInstance, path: &Path) -> Result<Matching> {
    named.matching_from_value(&read_json(path)?)
}

fn with_legend(named: &NamedInstance, report: Value) -> Value {
    json!({"legend": named.legend(), "report": report})
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn load_triple(args: &TripleArgs) -> Result<(NamedInstance, Profile, Matching, Matching)> {
    let named = NamedInstance::load(&args.instance)?;
    let r = load_profile(&named, &args.profile)?;
    let mu = load_matching(&named, &args.matching)?;
    let nu = load_matching(&named, &args.dominating)?;
    Ok((named, r, mu, nu))
}

fn execute(command: &Command, limits: &Limits) -> Result<Report> {
    let opts = CheckOptions {
        limits: *limits,
        ..Default::default()
    };
    match command {
        Command::CheckMatching { input, matching, axiom } => {
            let named = NamedInstance::load(&input.instance)?;
            let inst = &named.instance;
            let r = load_profile(&named, &input.profile)?;
            let mu = load_matching(&named, matching)?;
            let (holds, witness, dominated_by) = match axiom {
                MatchingProperty::Pareto => {
                    let all = enumerate_matchings(inst, limits)?;
                    let holds = is_pareto_efficient_among(&mu, &r, &all);
                    let dom = find_dominating(&mu, &r, &all).map(|m| named.matching_to_value(m));
                    (holds, pareto_witness(inst, &mu, &r), dom)
                }
                MatchingProperty::Pairwise => (is_pairwise_efficient(&mu, &r), pairwise_witness(&mu, &r), None),
                MatchingProperty::NonWasteful => (is_non_wasteful(inst, &mu, &r), waste_witness(inst, &mu, &r), None),
            };
            let property = match axiom {
                MatchingProperty::Pareto => "pareto",
                MatchingProperty::Pairwise => "pairwise",
                MatchingProperty::NonWasteful => "non-wasteful",
            };
            let body = json!({
                "property": property,
                "matching": named.matching_to_value(&mu),
                "holds": holds,
                "witness": witness,
                "dominated_by": dominated_by,
            });
            Ok(Report {
                body: with_legend(&named, body),
                pass: holds,
            })
        }
        Command::CheckRule {
            instance,
            rule,
            axiom,
            max_coalition,
            endowment,
        } => {
            let named = NamedInstance::load(instance)?;
            let rule = named.parse_rule_spec(rule)?;
            let opts = CheckOptions {
                max_coalition: *max_coalition,
                endowment: endowment.as_deref().map(|p| load_matching(&named, p)).transpose()?,
                ..opts
            };
            let report = check_axiom(&named.instance, &rule, *axiom, &opts)?;
            eprintln!("wall_time_ms: {}", report.wall_time.as_millis());
            Ok(Report {
                pass: report.passed(),
                body: with_legend(&named, to_value(&report)),
            })
        }
        Command::Rsd { input } => {
            let named = NamedInstance::load(&input.instance)?;
            let r = load_profile(&named, &input.profile)?;
            let lottery = random_serial_dictatorship(&named.instance, &r, limits)?;
            Ok(Report {
                body: json!({"rule": "rsd", "lottery": named.lottery_to_value(&lottery)}),
                pass: true,
            })
        }
        Command::Sd { input, order } => {
            let named = NamedInstance::load(&input.instance)?;
            let n = named.instance.n();
            let r = load_profile(&named, &input.profile)?;
            let sigma = match order {
                Some(o) => AgentOrder::from_indices(n, o)?,
                None => AgentOrder::identity(n),
            };
            let m = serial_dictatorship(&named.instance, &sigma, &r);
            Ok(Report {
                body: json!({
                    "order": sigma.agents().iter().map(|a| a.0).collect::<Vec<_>>(),
                    "matching": named.matching_to_value(&m),
                }),
                pass: true,
            })
        }
        Command::Ttc { input, endowment } => {
            let named = NamedInstance::load(&input.instance)?;
            let inst = &named.instance;
            let r = load_profile(&named, &input.profile)?;
            let e = match endowment {
                Some(p) => load_matching(&named, p)?,
                None => Matching::new(inst, inst.agents().map(|a| ObjectId(a.0)).collect())
                    .map_err(|_| Error::PreconditionViolated("default endowment needs a housing market".into()))?,
            };
            let m = top_trading_cycles(inst, &e, &r)?;
            Ok(Report {
                body: json!({
                    "endowment": named.matching_to_value(&e),
                    "matching": named.matching_to_value(&m),
                }),
                pass: true,
            })
        }
        Command::VerifyThm1 { instance, rule, theorem } => {
            let named = NamedInstance::load(instance)?;
            let rule = named.parse_rule_spec(rule)?;
            let verdict = match theorem {
                TheoremChoice::Thm1 => verify_theorem1(&named.instance, &rule, &opts)?,
                TheoremChoice::Cor2 => verify_corollary2(&named.instance, &rule, &opts)?,
                TheoremChoice::Thm3 => verify_theorem3(&named.instance, &rule, &opts)?,
            };
            for (name, t) in &verdict.timings {
                eprintln!("timing {name}: {} ms", t.as_millis());
            }
            Ok(Report {
                pass: verdict.verified(),
                body: with_legend(&named, to_value(&verdict)),
            })
        }
        Command::VerifyProp1 {
            instance,
            rule,
            max_coalition,
        } => {
            let named = NamedInstance::load(instance)?;
            let rule = named.parse_rule_spec(rule)?;
            let opts = CheckOptions {
                max_coalition: *max_coalition,
                ..opts
            };
            let verdict = verify_proposition1(&named.instance, &rule, &opts)?;
            for (name, t) in &verdict.timings {
                eprintln!("timing {name}: {} ms", t.as_millis());
            }
            Ok(Report {
                pass: verdict.verified(),
                body: with_legend(&named, to_value(&verdict)),
            })
        }
        Command::ReplayProof { input } => {
            let (named, r, mu, nu) = load_triple(input)?;
            let replay = replay_theorem1_proof(&named.instance, &r, &mu, &nu)?;
            for a in &replay.assertions {
                eprintln!("timing {}: {} us", a.name, a.elapsed.as_micros());
            }
            Ok(Report {
                pass: replay.passed,
                body: with_legend(&named, to_value(&replay)),
            })
        }
        Command::ReplayAppendix { input } => {
            let (named, r, mu, nu) = load_triple(input)?;
            let outcome = replay_theorem3_proof(&named.instance, &r, &mu, &nu)?;
            for a in outcome.assertions() {
                eprintln!("timing {}: {} us", a.name, a.elapsed.as_micros());
            }
            Ok(Report {
                pass: outcome.passed(),
                body: with_legend(&named, to_value(&outcome)),
            })
        }
        Command::SearchCex {
            instance,
            require,
            axiom,
            budget,
            seed,
            lottery,
            rule_out,
        } => {
            let named = NamedInstance::load(instance)?;
            let spec = SearchSpec {
                required: require.clone(),
                violated: *axiom,
                lottery: *lottery,
            };
            let sopts = SearchOptions {
                budget: *budget,
                seed: *seed,
                max_repairs: SearchOptions::default().max_repairs,
                out: rule_out.clone(),
                check: opts,
            };
            let outcome = search_counterexample(&named, &spec, &sopts)?;
            // A hit is the interesting result; exhausting the budget is not a
            // claim that no such rule exists.
            let pass = match &outcome {
                SearchOutcome::Found(hit) => hit.reverified,
                SearchOutcome::BudgetExhausted { .. } => false,
            };
            Ok(Report {
                body: with_legend(&named, json!({"spec": spec, "result": outcome})),
                pass,
            })
        }
        Command::GenInstance {
            seed,
            n,
            k,
            capacity_style,
            null_bottom,
        } => {
            let (named, profile) = gen_instance(*seed, *n, *k, *capacity_style, *null_bottom)?;
            Ok(Report {
                body: json!({
                    "instance": named.to_value(),
                    "profile": named.profile_to_value(&profile),
                }),
                pass: true,
            })
        }
    }
}

/// Runs the command line `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let limits = Limits::from_env();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cli.workers {
        if w == 0 {
            eprintln!("error: --workers must be positive");
            return 2;
        }
        pool = pool.num_threads(w);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let start = Instant::now();
    let result = pool.install(|| execute(&cli.command, &limits));
    eprintln!("elapsed_ms: {}", start.elapsed().as_millis());
    match result {
        Ok(report) => {
            let text = to_pretty(&report.body);
            let written = match &cli.out {
                Some(path) => std::fs::write(path, &text).map_err(Error::from),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return 2;
            }
            if report.pass {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

pub fn main() -> i32 {
    run(std::env::args_os())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Domain;

    #[test]
    fn gen_instance_is_reproducible() {
        let a = gen_instance(1, 3, 3, CapacityStyle::Unit, false).unwrap();
        let b = gen_instance(1, 3, 3, CapacityStyle::Unit, false).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.0.instance.domain(), Domain::General);
    }

    #[test]
    fn capacity_styles() {
        for seed in 0..20 {
            let (s, _) = gen_instance(seed, 5, 3, CapacityStyle::SumEqualsN, false).unwrap();
            assert_eq!(s.instance.total_capacity(), 5);
            assert!(s.instance.capacities().iter().all(|&c| c > 0));
            let (s, _) = gen_instance(seed, 4, 3, CapacityStyle::Slack, false).unwrap();
            assert!(s.instance.total_capacity() > 4);
            let (s, p) = gen_instance(seed, 3, 2, CapacityStyle::Unit, true).unwrap();
            assert_eq!(s.instance.k(), 3);
            assert!(p.in_domain(&s.instance));
        }
        assert!(matches!(gen_instance(0, 0, 3, CapacityStyle::Unit, false), Err(Error::Bounds(_))));
        assert!(matches!(gen_instance(0, 4, 3, CapacityStyle::Unit, false), Err(Error::Bounds(_))));
        assert!(matches!(gen_instance(0, 2, 3, CapacityStyle::SumEqualsN, false), Err(Error::Bounds(_))));
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(["axiomlab", "no-such-command"]), 2);
        assert_eq!(run(["axiomlab", "rsd"]), 2);
    }
}
