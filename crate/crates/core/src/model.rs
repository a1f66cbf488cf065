//! Instances, agent/object identities and the set of feasible matchings.
//!
//! Agents and objects are dense zero-based indices. When an instance has a
//! null-object it always sits at object index 0. Names only exist in the I/O
//! layer (see [`crate::io`]).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectId(pub usize);

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "agent {}", self.0)
    }
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "object {}", self.0)
    }
}

/// Preference domain of an instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    /// Every strict ranking of all objects.
    General,
    /// Strict rankings in which the null-object is ranked last.
    NullBottom,
}

/// Enumeration bounds shared by every exhaustive scan.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub max_profiles: u64,
    pub max_matchings: u64,
    pub max_orders: u64,
}

/// Environment variable that caps profile enumeration.
pub const MAX_PROFILES_ENV: &str = "AXIOMLAB_MAX_PROFILES";

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_profiles: 5_000_000,
            max_matchings: 2_000_000,
            max_orders: 3_628_800,
        }
    }
}

impl Limits {
    /// Defaults, with `AXIOMLAB_MAX_PROFILES` applied when set to a positive integer.
    pub fn from_env() -> Self {
        let mut limits = Limits::default();
        if let Some(cap) = std::env::var(MAX_PROFILES_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<u64>().ok())
            .filter(|&v| v > 0)
        {
            limits.max_profiles = cap;
        }
        limits
    }
}

/// A fixed set of agents and capacitated objects.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Instance {
    n: usize,
    capacities: Vec<u32>,
    null_object: Option<ObjectId>,
    domain: Domain,
}

impl Instance {
    pub fn new(
        n: usize,
        capacities: Vec<u32>,
        null_object: Option<ObjectId>,
        domain: Domain,
    ) -> Result<Self> {
        let inst = Instance {
            n,
            capacities,
            null_object,
            domain,
        };
        validate_instance(&inst)?;
        Ok(inst)
    }

    /// `n` agents and `k` objects of capacity one.
    pub fn unit(n: usize, k: usize) -> Result<Self> {
        Instance::new(n, vec![1; k], None, Domain::General)
    }

    pub fn general(n: usize, capacities: Vec<u32>) -> Result<Self> {
        Instance::new(n, capacities, None, Domain::General)
    }

    /// Null-bottom instance; `capacities[0]` is the null-object's capacity.
    pub fn null_bottom(n: usize, capacities: Vec<u32>) -> Result<Self> {
        Instance::new(n, capacities, Some(ObjectId(0)), Domain::NullBottom)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.capacities.len()
    }

    pub fn capacities(&self) -> &[u32] {
        &self.capacities
    }

    pub fn capacity(&self, o: ObjectId) -> u32 {
        self.capacities[o.0]
    }

    pub fn null_object(&self) -> Option<ObjectId> {
        self.null_object
    }

    pub fn is_null(&self, o: ObjectId) -> bool {
        self.null_object == Some(o)
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn total_capacity(&self) -> u64 {
        self.capacities.iter().map(|&q| q as u64).sum()
    }

    pub fn agents(&self) -> impl Iterator<Item = AgentId> + Clone {
        (0..self.n).map(AgentId)
    }

    pub fn objects(&self) -> impl Iterator<Item = ObjectId> + Clone {
        (0..self.k()).map(ObjectId)
    }

    /// Objects other than the null-object.
    pub fn real_objects(&self) -> impl Iterator<Item = ObjectId> + '_ {
        self.objects().filter(move |&o| !self.is_null(o))
    }

    /// Unit capacities with as many objects as agents.
    pub fn is_housing_market(&self) -> bool {
        self.k() == self.n && self.capacities.iter().all(|&q| q == 1)
    }
}

pub fn validate_instance(inst: &Instance) -> Result<()> {
    if inst.n == 0 || inst.capacities.is_empty() {
        return Err(Error::EmptyInstance);
    }
    let capacity = inst.total_capacity();
    if capacity < inst.n as u64 {
        return Err(Error::CapacityShortfall {
            capacity,
            agents: inst.n,
        });
    }
    match (inst.domain, inst.null_object) {
        (Domain::NullBottom, None) => return Err(Error::NullObjectMissing),
        (_, Some(o)) if o.0 != 0 => return Err(Error::NullObjectNotFirst(o.0)),
        _ => {}
    }
    Ok(())
}

/// A capacity-respecting total assignment; position `i` holds agent `i`'s allotment.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Matching(Vec<ObjectId>);

impl Matching {
    pub fn new(inst: &Instance, assignment: Vec<ObjectId>) -> Result<Self> {
        if assignment.len() != inst.n() {
            return Err(Error::InvalidMatching(format!(
                "expected {} allotments, got {}",
                inst.n(),
                assignment.len()
            )));
        }
        let mut used = vec![0u32; inst.k()];
        for &o in &assignment {
            if o.0 >= inst.k() {
                return Err(Error::InvalidMatching(format!("unknown object index {}", o.0)));
            }
            used[o.0] += 1;
            if used[o.0] > inst.capacity(o) {
                return Err(Error::InvalidMatching(format!(
                    "object {} assigned beyond its capacity {}",
                    o.0,
                    inst.capacity(o)
                )));
            }
        }
        Ok(Matching(assignment))
    }

    /// Builds a matching from raw indices.
    pub fn from_indices(inst: &Instance, indices: &[usize]) -> Result<Self> {
        Matching::new(inst, indices.iter().map(|&o| ObjectId(o)).collect())
    }

    pub(crate) fn from_vec_unchecked(assignment: Vec<ObjectId>) -> Self {
        Matching(assignment)
    }

    #[inline]
    pub fn get(&self, agent: AgentId) -> ObjectId {
        self.0[agent.0]
    }

    pub fn as_slice(&self) -> &[ObjectId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of copies of each object in use.
    pub fn counts(&self, k: usize) -> Vec<u32> {
        let mut counts = vec![0u32; k];
        for o in &self.0 {
            counts[o.0] += 1;
        }
        counts
    }

    pub fn count_of(&self, o: ObjectId) -> usize {
        self.0.iter().filter(|&&x| x == o).count()
    }

    /// The matching with the allotments of `i` and `j` exchanged.
    pub fn swapped(&self, i: AgentId, j: AgentId) -> Matching {
        let mut v = self.0.clone();
        v.swap(i.0, j.0);
        Matching(v)
    }
}

/// All feasible matchings in lexicographic order of the assignment list.
pub fn enumerate_matchings(inst: &Instance, limits: &Limits) -> Result<Vec<Matching>> {
    let mut out = Vec::new();
    let mut remaining: Vec<u32> = inst.capacities().to_vec();
    let mut current = Vec::with_capacity(inst.n());
    fill(inst, limits, &mut remaining, &mut current, &mut out)?;
    Ok(out)
}

fn fill(
    inst: &Instance,
    limits: &Limits,
    remaining: &mut [u32],
    current: &mut Vec<ObjectId>,
    out: &mut Vec<Matching>,
) -> Result<()> {
    if current.len() == inst.n() {
        if out.len() as u64 >= limits.max_matchings {
            return Err(Error::SizeOverflow {
                what: "matching",
                limit: limits.max_matchings,
            });
        }
        out.push(Matching(current.clone()));
        return Ok(());
    }
    for o in 0..inst.k() {
        if remaining[o] == 0 {
            continue;
        }
        remaining[o] -= 1;
        current.push(ObjectId(o));
        fill(inst, limits, remaining, current, out)?;
        current.pop();
        remaining[o] += 1;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_errors() {
        assert!(Instance::general(2, vec![1, 1]).is_ok());
        assert!(matches!(
            Instance::general(3, vec![1, 1]),
            Err(Error::CapacityShortfall { capacity: 2, agents: 3 })
        ));
        assert!(matches!(
            Instance::new(2, vec![1, 1], None, Domain::NullBottom),
            Err(Error::NullObjectMissing)
        ));
        assert!(matches!(Instance::general(0, vec![1]), Err(Error::EmptyInstance)));
        assert!(matches!(Instance::general(1, vec![]), Err(Error::EmptyInstance)));
        assert!(matches!(
            Instance::new(2, vec![1, 1], Some(ObjectId(1)), Domain::NullBottom),
            Err(Error::NullObjectNotFirst(1))
        ));
        let fig = Instance::general(8, vec![3, 2, 1, 1, 1]).unwrap();
        assert_eq!(fig.total_capacity(), 8);
    }

    #[test]
    fn small_matching_counts() {
        let l = Limits::default();
        assert_eq!(enumerate_matchings(&Instance::unit(2, 2).unwrap(), &l).unwrap().len(), 2);
        assert_eq!(enumerate_matchings(&Instance::unit(3, 3).unwrap(), &l).unwrap().len(), 6);
        // 3 agents over objects with slack: 3^3 minus assignments breaking q=(2,1,1).
        let slack = Instance::general(3, vec![2, 1, 1]).unwrap();
        assert_eq!(enumerate_matchings(&slack, &l).unwrap().len(), 12);
    }

    #[test]
    fn matching_bound_is_enforced() {
        let limits = Limits {
            max_matchings: 5,
            ..Limits::default()
        };
        assert!(matches!(
            enumerate_matchings(&Instance::unit(3, 3).unwrap(), &limits),
            Err(Error::SizeOverflow { what: "matching", limit: 5 })
        ));
    }

    #[test]
    fn rejects_over_capacity_matching() {
        let inst = Instance::general(3, vec![2, 1]).unwrap();
        assert!(Matching::from_indices(&inst, &[0, 0, 1]).is_ok());
        assert!(Matching::from_indices(&inst, &[1, 1, 0]).is_err());
        assert!(Matching::from_indices(&inst, &[0, 2, 1]).is_err());
        assert!(Matching::from_indices(&inst, &[0, 1]).is_err());
    }
}
