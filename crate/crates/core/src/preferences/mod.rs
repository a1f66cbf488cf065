//! Strict preferences, profile spaces and the profile transformations used by
//! the proof replays.

mod appendix;

use std::collections::{BTreeSet, HashMap};

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::{AgentId, Domain, Instance, Limits, Matching, ObjectId};

pub use appendix::{appendix_transform_sequence, AppendixSequence};

/// A strict ranking of every object, best first, with its rank inverse.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Preference {
    ranking: Vec<ObjectId>,
    rank: Vec<u16>,
}

impl Serialize for Preference {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.ranking.serialize(s)
    }
}

impl Preference {
    /// Checks that `ranking` is a permutation of `0..k`.
    pub fn new(k: usize, ranking: Vec<ObjectId>) -> Result<Self> {
        if ranking.len() != k {
            return Err(Error::InvalidPreference(format!(
                "expected {k} objects, got {}",
                ranking.len()
            )));
        }
        let mut rank = vec![u16::MAX; k];
        for (pos, o) in ranking.iter().enumerate() {
            if o.0 >= k {
                return Err(Error::InvalidPreference(format!("unknown object index {}", o.0)));
            }
            if rank[o.0] != u16::MAX {
                return Err(Error::InvalidPreference(format!("object {} listed twice", o.0)));
            }
            rank[o.0] = pos as u16;
        }
        Ok(Preference { ranking, rank })
    }

    pub fn from_indices(k: usize, ranking: &[usize]) -> Result<Self> {
        Preference::new(k, ranking.iter().map(|&o| ObjectId(o)).collect())
    }

    fn from_ranking_unchecked(ranking: Vec<ObjectId>) -> Self {
        let mut rank = vec![0u16; ranking.len()];
        for (pos, o) in ranking.iter().enumerate() {
            rank[o.0] = pos as u16;
        }
        Preference { ranking, rank }
    }

    /// Checks the preference against the instance's object count and domain.
    pub fn for_instance(inst: &Instance, ranking: Vec<ObjectId>) -> Result<Self> {
        let p = Preference::new(inst.k(), ranking)?;
        if !p.in_domain(inst) {
            return Err(Error::InvalidPreference(
                "the null-object must be ranked last in the null-bottom domain".into(),
            ));
        }
        Ok(p)
    }

    pub fn ranking(&self) -> &[ObjectId] {
        &self.ranking
    }

    #[inline]
    pub fn rank_of(&self, o: ObjectId) -> usize {
        self.rank[o.0] as usize
    }

    pub fn top(&self) -> ObjectId {
        self.ranking[0]
    }

    pub fn bottom(&self) -> ObjectId {
        self.ranking[self.ranking.len() - 1]
    }

    /// Strict preference `a P b`.
    #[inline]
    pub fn prefers(&self, a: ObjectId, b: ObjectId) -> bool {
        self.rank[a.0] < self.rank[b.0]
    }

    /// Weak preference `a R b`.
    #[inline]
    pub fn weakly_prefers(&self, a: ObjectId, b: ObjectId) -> bool {
        self.rank[a.0] <= self.rank[b.0]
    }

    pub fn in_domain(&self, inst: &Instance) -> bool {
        match (inst.domain(), inst.null_object()) {
            (Domain::NullBottom, Some(null)) => self.bottom() == null,
            _ => true,
        }
    }

    /// Whether `other` is a monotonic transformation of `self` at `o`.
    #[inline]
    pub fn monotonic_at(&self, other: &Preference, o: ObjectId) -> bool {
        let here = self.rank_of(o);
        let there = other.rank_of(o);
        self.ranking[here + 1..]
            .iter()
            .all(|&x| other.rank_of(x) > there)
    }
}

/// `{o' : o R o'}`, including `o` itself.
pub fn lower_contour(pref: &Preference, o: ObjectId) -> BTreeSet<ObjectId> {
    pref.ranking[pref.rank_of(o)..].iter().copied().collect()
}

/// One preference per agent.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Profile(Vec<Preference>);

impl Profile {
    pub fn new(inst: &Instance, prefs: Vec<Preference>) -> Result<Self> {
        if prefs.len() != inst.n() {
            return Err(Error::InvalidPreference(format!(
                "expected {} preferences, got {}",
                inst.n(),
                prefs.len()
            )));
        }
        for (i, p) in prefs.iter().enumerate() {
            if p.ranking.len() != inst.k() {
                return Err(Error::InvalidPreference(format!(
                    "agent {i} ranks {} objects, instance has {}",
                    p.ranking.len(),
                    inst.k()
                )));
            }
            if !p.in_domain(inst) {
                return Err(Error::DomainViolation { agent: i });
            }
        }
        Ok(Profile(prefs))
    }

    /// Builds a profile from rankings given as raw indices.
    pub fn from_indices(inst: &Instance, rankings: &[Vec<usize>]) -> Result<Self> {
        let prefs = rankings
            .iter()
            .map(|r| Preference::from_indices(inst.k(), r))
            .collect::<Result<Vec<_>>>()?;
        Profile::new(inst, prefs)
    }

    pub(crate) fn from_vec_unchecked(prefs: Vec<Preference>) -> Self {
        Profile(prefs)
    }

    #[inline]
    pub fn get(&self, agent: AgentId) -> &Preference {
        &self.0[agent.0]
    }

    pub fn prefs(&self) -> &[Preference] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn in_domain(&self, inst: &Instance) -> bool {
        self.0.iter().all(|p| p.in_domain(inst))
    }

    /// Copy of the profile with agent `i`'s preference replaced.
    pub fn with(&self, agent: AgentId, pref: Preference) -> Profile {
        let mut prefs = self.0.clone();
        prefs[agent.0] = pref;
        Profile(prefs)
    }
}

/// Whether `r2` is a monotonic transformation of `r` at `mu`.
pub fn is_monotonic_transformation(r: &Profile, r2: &Profile, mu: &Matching) -> bool {
    r.0.iter()
        .zip(&r2.0)
        .zip(mu.as_slice())
        .all(|((p, p2), &o)| p.monotonic_at(p2, o))
}

/// A ranking of the objects used to rearrange the tails of preferences.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CommonRanking {
    order: Vec<ObjectId>,
}

impl CommonRanking {
    /// In the null-bottom domain the ranking covers the real objects only;
    /// otherwise it covers every object.
    pub fn new(inst: &Instance, order: Vec<ObjectId>) -> Result<Self> {
        let expected: BTreeSet<ObjectId> = match inst.domain() {
            Domain::NullBottom => inst.real_objects().collect(),
            Domain::General => inst.objects().collect(),
        };
        let given: BTreeSet<ObjectId> = order.iter().copied().collect();
        if given.len() != order.len() || given != expected {
            return Err(Error::InvalidPreference(
                "common ranking must list each ranked object exactly once".into(),
            ));
        }
        Ok(CommonRanking { order })
    }

    /// Object-index order, with a null-object (if any) moved last.
    pub fn by_index(inst: &Instance) -> Self {
        let mut order: Vec<ObjectId> = inst.real_objects().collect();
        if inst.domain() == Domain::General {
            order.extend(inst.null_object());
        }
        CommonRanking { order }
    }

    pub fn order(&self) -> &[ObjectId] {
        &self.order
    }
}

/// Moves each agent's `nu` allotment to the top, keeping the rest in place.
pub fn push_to_top(inst: &Instance, r: &Profile, nu: &Matching) -> Result<Profile> {
    let everyone: Vec<AgentId> = inst.agents().collect();
    push_to_top_agents(inst, r, nu, &everyone)
}

/// Moves `mu_i` to the top for the listed agents only.
pub fn push_to_top_agents(
    inst: &Instance,
    r: &Profile,
    mu: &Matching,
    agents: &[AgentId],
) -> Result<Profile> {
    let mut prefs = r.0.clone();
    for &i in agents {
        let top = mu.get(i);
        if inst.domain() == Domain::NullBottom && inst.is_null(top) && inst.k() > 1 {
            return Err(Error::DomainViolation { agent: i.0 });
        }
        prefs[i.0] = raise(r.get(i), &[top]);
    }
    Ok(Profile(prefs))
}

/// `front` in the given order, then every other object in its original order.
pub(crate) fn raise(pref: &Preference, front: &[ObjectId]) -> Preference {
    let mut ranking = front.to_vec();
    ranking.extend(pref.ranking.iter().filter(|o| !front.contains(o)));
    Preference::from_ranking_unchecked(ranking)
}

/// `front` in the given order, then the remaining ranked objects by `sigma`,
/// then the null-object when `sigma` excludes it.
pub(crate) fn front_then_common(
    inst: &Instance,
    front: &[ObjectId],
    sigma: &CommonRanking,
) -> Preference {
    let mut ranking = front.to_vec();
    ranking.extend(sigma.order.iter().filter(|o| !front.contains(o)));
    if let Some(null) = inst.null_object() {
        if !ranking.contains(&null) {
            ranking.push(null);
        }
    }
    Preference::from_ranking_unchecked(ranking)
}

/// Keeps each agent's top object `nu_i` and orders everything below it by `sigma`.
pub fn common_rank_rearrange(
    inst: &Instance,
    r: &Profile,
    nu: &Matching,
    sigma: &CommonRanking,
) -> Result<Profile> {
    let prefs = inst
        .agents()
        .map(|i| {
            if r.get(i).top() != nu.get(i) {
                return Err(Error::PreconditionViolated(format!(
                    "agent {} does not rank its allotment first",
                    i.0
                )));
            }
            Ok(front_then_common(inst, &[nu.get(i)], sigma))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Profile(prefs))
}

/// Every admissible preference of an instance, with profiles addressed by a
/// mixed-radix index (agent 0 most significant).
#[derive(Clone, Debug)]
pub struct ProfileSpace {
    inst: Instance,
    prefs: Vec<Preference>,
    lookup: HashMap<Vec<ObjectId>, usize>,
    total: u64,
}

impl ProfileSpace {
    pub fn new(inst: &Instance, limits: &Limits) -> Result<Self> {
        let prefs = admissible_preferences(inst);
        let overflow = Error::SizeOverflow {
            what: "profile",
            limit: limits.max_profiles,
        };
        let total = (prefs.len() as u64)
            .checked_pow(inst.n() as u32)
            .ok_or(overflow)?;
        if total > limits.max_profiles {
            return Err(Error::SizeOverflow {
                what: "profile",
                limit: limits.max_profiles,
            });
        }
        let lookup = prefs
            .iter()
            .enumerate()
            .map(|(i, p)| (p.ranking.clone(), i))
            .collect();
        Ok(ProfileSpace {
            inst: inst.clone(),
            prefs,
            lookup,
            total,
        })
    }

    pub fn instance(&self) -> &Instance {
        &self.inst
    }

    /// Number of profiles.
    pub fn len(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// Admissible preferences in lexicographic order.
    pub fn preferences(&self) -> &[Preference] {
        &self.prefs
    }

    pub fn pref_index(&self, p: &Preference) -> Option<usize> {
        self.lookup.get(&p.ranking).copied()
    }

    pub fn coords(&self, index: u64) -> Vec<usize> {
        let base = self.prefs.len() as u64;
        let mut coords = vec![0; self.inst.n()];
        let mut rest = index;
        for c in coords.iter_mut().rev() {
            *c = (rest % base) as usize;
            rest /= base;
        }
        coords
    }

    pub fn index_of_coords(&self, coords: &[usize]) -> u64 {
        let base = self.prefs.len() as u64;
        coords.iter().fold(0, |acc, &c| acc * base + c as u64)
    }

    pub fn index_of(&self, profile: &Profile) -> Option<u64> {
        let coords = profile
            .0
            .iter()
            .map(|p| self.pref_index(p))
            .collect::<Option<Vec<_>>>()?;
        Some(self.index_of_coords(&coords))
    }

    pub fn profile_from_coords(&self, coords: &[usize]) -> Profile {
        Profile(coords.iter().map(|&c| self.prefs[c].clone()).collect())
    }

    pub fn profile_at(&self, index: u64) -> Profile {
        self.profile_from_coords(&self.coords(index))
    }

    pub fn iter(&self) -> ProfileIter<'_> {
        ProfileIter {
            space: self,
            next: 0,
        }
    }
}

/// Streams the profiles of a [`ProfileSpace`] in lexicographic order.
pub struct ProfileIter<'a> {
    space: &'a ProfileSpace,
    next: u64,
}

impl Iterator for ProfileIter<'_> {
    type Item = Profile;

    fn next(&mut self) -> Option<Profile> {
        if self.next >= self.space.total {
            return None;
        }
        let p = self.space.profile_at(self.next);
        self.next += 1;
        Some(p)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.space.total - self.next) as usize;
        (left, Some(left))
    }
}

/// The profile space of `inst`; profiles are produced lazily.
pub fn enumerate_profiles(inst: &Instance, limits: &Limits) -> Result<ProfileSpace> {
    ProfileSpace::new(inst, limits)
}

fn admissible_preferences(inst: &Instance) -> Vec<Preference> {
    let (mut items, tail): (Vec<ObjectId>, Option<ObjectId>) = match inst.domain() {
        Domain::NullBottom => (inst.real_objects().collect(), inst.null_object()),
        Domain::General => (inst.objects().collect(), None),
    };
    let mut out = Vec::new();
    loop {
        let mut ranking = items.clone();
        ranking.extend(tail);
        out.push(Preference::from_ranking_unchecked(ranking));
        if !next_permutation(&mut items) {
            break;
        }
    }
    out
}

/// Advances to the next lexicographic permutation; false once wrapped.
pub(crate) fn next_permutation<T: Ord>(v: &mut [T]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        v.reverse();
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}
