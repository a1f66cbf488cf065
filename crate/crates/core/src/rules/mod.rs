//! Allocation rules: serial dictatorship, random serial dictatorship, top
//! trading cycles and profile-indexed tables.

mod lottery;

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{AgentId, Instance, Limits, Matching, ObjectId};
use crate::preferences::{next_permutation, Profile};

pub use lottery::{Lottery, Weight};

/// A processing order of all agents.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct AgentOrder(Vec<AgentId>);

impl AgentOrder {
    pub fn new(n: usize, order: Vec<AgentId>) -> Result<Self> {
        let mut seen = vec![false; n];
        if order.len() != n {
            return Err(Error::Format(format!("order lists {} agents, expected {n}", order.len())));
        }
        for a in &order {
            if a.0 >= n || std::mem::replace(&mut seen[a.0], true) {
                return Err(Error::Format(format!("order is not a permutation of 0..{n}")));
            }
        }
        Ok(AgentOrder(order))
    }

    pub fn from_indices(n: usize, order: &[usize]) -> Result<Self> {
        AgentOrder::new(n, order.iter().map(|&a| AgentId(a)).collect())
    }

    pub fn identity(n: usize) -> Self {
        AgentOrder((0..n).map(AgentId).collect())
    }

    pub fn agents(&self) -> &[AgentId] {
        &self.0
    }
}

/// All `n!` orders, lexicographically.
pub fn all_orders(n: usize) -> Vec<AgentOrder> {
    let mut current: Vec<AgentId> = (0..n).map(AgentId).collect();
    let mut out = vec![AgentOrder(current.clone())];
    while next_permutation(&mut current) {
        out.push(AgentOrder(current.clone()));
    }
    out
}

fn best_available(r: &Profile, agent: AgentId, remaining: &[u32]) -> ObjectId {
    *r.get(agent)
        .ranking()
        .iter()
        .find(|o| remaining[o.0] > 0)
        .expect("total capacity covers every agent")
}

/// Agents pick, in order, their best object with remaining capacity.
pub fn serial_dictatorship(inst: &Instance, sigma: &AgentOrder, r: &Profile) -> Matching {
    let mut remaining = inst.capacities().to_vec();
    let mut assignment = vec![ObjectId(0); inst.n()];
    for &agent in sigma.agents() {
        let o = best_available(r, agent, &remaining);
        assert!(remaining[o.0] > 0, "serial dictatorship over-assigned object {}", o.0);
        remaining[o.0] -= 1;
        assignment[agent.0] = o;
    }
    Matching::from_vec_unchecked(assignment)
}

pub fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// The uniform mixture of serial dictatorship over all `n!` orders, in
/// exact arithmetic.
///
/// Orders sharing the same set of already-served agents and the same
/// remaining capacities lead to identical continuations, so the count of
/// orders per final matching is computed over memoized sub-states.
pub fn random_serial_dictatorship(inst: &Instance, r: &Profile, limits: &Limits) -> Result<Lottery> {
    let n = inst.n();
    let orders = factorial(n);
    if n > 20 || orders > limits.max_orders {
        return Err(Error::SizeOverflow {
            what: "agent order",
            limit: limits.max_orders,
        });
    }
    let counts = order_counts(inst, r);
    let entries = counts
        .into_iter()
        .map(|(m, c)| (m, Weight::new(c as i64, orders as i64)));
    Lottery::new(entries)
}

/// Completions of the partial assignment, keyed by who is still waiting and
/// what capacity is left.
type Memo = HashMap<(u32, Vec<u32>), Vec<(Vec<ObjectId>, u64)>>;

/// Number of orders producing each matching.
pub(crate) fn order_counts(inst: &Instance, r: &Profile) -> BTreeMap<Matching, u64> {
    let n = inst.n();
    let mut memo = Memo::new();
    let mut caps = inst.capacities().to_vec();
    let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let completions = complete(r, n, full, &mut caps, &mut memo);
    completions
        .into_iter()
        .map(|(assignment, c)| (Matching::from_vec_unchecked(assignment), c))
        .collect()
}

fn complete(
    r: &Profile,
    n: usize,
    waiting: u32,
    caps: &mut Vec<u32>,
    memo: &mut Memo,
) -> Vec<(Vec<ObjectId>, u64)> {
    if waiting == 0 {
        return vec![(vec![ObjectId(usize::MAX); n], 1)];
    }
    let key = (waiting, caps.clone());
    if let Some(hit) = memo.get(&key) {
        return hit.clone();
    }
    let mut merged: BTreeMap<Vec<ObjectId>, u64> = BTreeMap::new();
    for a in (0..n).filter(|&a| waiting & (1 << a) != 0) {
        let o = best_available(r, AgentId(a), caps);
        caps[o.0] -= 1;
        for (mut assignment, c) in complete(r, n, waiting & !(1 << a), caps, memo) {
            assignment[a] = o;
            *merged.entry(assignment).or_default() += c;
        }
        caps[o.0] += 1;
    }
    let out: Vec<_> = merged.into_iter().collect();
    memo.insert(key, out.clone());
    out
}

/// Top trading cycles for a housing market; `endowment` must be a bijection.
pub fn top_trading_cycles(inst: &Instance, endowment: &Matching, r: &Profile) -> Result<Matching> {
    if !inst.is_housing_market() {
        return Err(Error::PreconditionViolated(
            "top trading cycles needs unit capacities and as many objects as agents".into(),
        ));
    }
    let n = inst.n();
    let mut owner = vec![usize::MAX; n];
    for i in 0..n {
        let o = endowment.as_slice()[i].0;
        if o >= n || owner[o] != usize::MAX {
            return Err(Error::PreconditionViolated("endowment is not a bijection".into()));
        }
        owner[o] = i;
    }
    let mut active = vec![true; n];
    let mut result = vec![ObjectId(usize::MAX); n];
    let mut left = n;
    while left > 0 {
        let points: Vec<usize> = (0..n)
            .map(|i| {
                if !active[i] {
                    return usize::MAX;
                }
                let best = r
                    .get(AgentId(i))
                    .ranking()
                    .iter()
                    .find(|o| active[owner[o.0]])
                    .expect("an active agent's own house is available");
                owner[best.0]
            })
            .collect();
        let mut cleared = vec![false; n];
        for start in (0..n).filter(|&i| active[i]) {
            let mut path = Vec::new();
            let mut on_path = vec![false; n];
            let mut v = start;
            while !on_path[v] && !cleared[v] {
                on_path[v] = true;
                path.push(v);
                v = points[v];
            }
            if cleared[v] {
                continue;
            }
            let from = path.iter().position(|&x| x == v).expect("cycle entry on path");
            for &i in &path[from..] {
                result[i] = endowment.as_slice()[points[i]];
                cleared[i] = true;
            }
        }
        for i in 0..n {
            if cleared[i] {
                active[i] = false;
                left -= 1;
            }
        }
    }
    Ok(Matching::from_vec_unchecked(result))
}

/// A rule given by an explicit profile-indexed table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleTable<T> {
    entries: BTreeMap<Profile, T>,
}

impl<T> RuleTable<T> {
    pub fn new(entries: BTreeMap<Profile, T>) -> Self {
        RuleTable { entries }
    }

    pub fn get(&self, r: &Profile) -> Option<&T> {
        self.entries.get(r)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Profile, &T)> {
        self.entries.iter()
    }

    pub fn insert(&mut self, r: Profile, value: T) -> Option<T> {
        self.entries.insert(r, value)
    }
}

impl<T> FromIterator<(Profile, T)> for RuleTable<T> {
    fn from_iter<I: IntoIterator<Item = (Profile, T)>>(iter: I) -> Self {
        RuleTable {
            entries: iter.into_iter().collect(),
        }
    }
}

pub type DeterministicTable = RuleTable<Matching>;
pub type LotteryTable = RuleTable<Lottery>;

/// Any rule the checkers can evaluate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RuleDescriptor {
    SerialDictatorship(AgentOrder),
    TopTradingCycles { endowment: Matching },
    RandomSerialDictatorship,
    TabulatedDeterministic(DeterministicTable),
    TabulatedLottery(LotteryTable),
}

impl RuleDescriptor {
    pub fn is_deterministic(&self) -> bool {
        !matches!(
            self,
            RuleDescriptor::RandomSerialDictatorship | RuleDescriptor::TabulatedLottery(_)
        )
    }

    /// Short stable name used in reports.
    pub fn label(&self) -> String {
        let join = |v: &mut dyn Iterator<Item = usize>| {
            v.map(|x| x.to_string()).collect::<Vec<_>>().join(",")
        };
        match self {
            RuleDescriptor::SerialDictatorship(o) => {
                format!("sd:{}", join(&mut o.agents().iter().map(|a| a.0)))
            }
            RuleDescriptor::TopTradingCycles { endowment } => {
                format!("ttc:{}", join(&mut endowment.as_slice().iter().map(|o| o.0)))
            }
            RuleDescriptor::RandomSerialDictatorship => "rsd".into(),
            RuleDescriptor::TabulatedDeterministic(t) => format!("table:deterministic:{}", t.len()),
            RuleDescriptor::TabulatedLottery(t) => format!("table:lottery:{}", t.len()),
        }
    }
}

/// What a rule returns at one profile.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum Outcome {
    Matching(Matching),
    Lottery(Lottery),
}

impl Outcome {
    /// Deterministic outcomes become degenerate lotteries.
    pub fn into_lottery(self) -> Lottery {
        match self {
            Outcome::Matching(m) => Lottery::degenerate(m),
            Outcome::Lottery(l) => l,
        }
    }

    pub fn as_matching(&self) -> Option<&Matching> {
        match self {
            Outcome::Matching(m) => Some(m),
            Outcome::Lottery(_) => None,
        }
    }
}

pub fn evaluate(inst: &Instance, rule: &RuleDescriptor, r: &Profile, limits: &Limits) -> Result<Outcome> {
    Ok(match rule {
        RuleDescriptor::SerialDictatorship(sigma) => {
            Outcome::Matching(serial_dictatorship(inst, sigma, r))
        }
        RuleDescriptor::TopTradingCycles { endowment } => {
            Outcome::Matching(top_trading_cycles(inst, endowment, r)?)
        }
        RuleDescriptor::RandomSerialDictatorship => {
            Outcome::Lottery(random_serial_dictatorship(inst, r, limits)?)
        }
        RuleDescriptor::TabulatedDeterministic(t) => {
            Outcome::Matching(t.get(r).cloned().ok_or(Error::TableMiss)?)
        }
        RuleDescriptor::TabulatedLottery(t) => {
            Outcome::Lottery(t.get(r).cloned().ok_or(Error::TableMiss)?)
        }
    })
}
