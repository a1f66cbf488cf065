//! Brute-force oracles written independently of the library's own routines.
#![allow(dead_code)]

use std::path::PathBuf;

use axiomlab::model::{AgentId, Instance, Matching, ObjectId};
use axiomlab::preferences::Profile;

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn rank(r: &Profile, i: usize, o: ObjectId) -> usize {
    r.get(AgentId(i)).ranking().iter().position(|&x| x == o).unwrap()
}

/// Every capacity-respecting assignment, by odometer over agents.
pub fn assignments(inst: &Instance) -> Vec<Matching> {
    let (n, k) = (inst.n(), inst.k());
    let mut out = Vec::new();
    let mut digits = vec![0usize; n];
    loop {
        let mut used = vec![0u32; k];
        for &d in &digits {
            used[d] += 1;
        }
        if (0..k).all(|o| used[o] <= inst.capacities()[o]) {
            out.push(Matching::from_indices(inst, &digits).unwrap());
        }
        let mut pos = n;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < k {
                break;
            }
            digits[pos] = 0;
        }
    }
}

pub fn dominates(nu: &Matching, mu: &Matching, r: &Profile) -> bool {
    let n = mu.len();
    let weak = (0..n).all(|i| rank(r, i, nu.as_slice()[i]) <= rank(r, i, mu.as_slice()[i]));
    weak && nu != mu
}

pub fn pareto_efficient(mu: &Matching, r: &Profile, all: &[Matching]) -> bool {
    !all.iter().any(|nu| dominates(nu, mu, r))
}

pub fn pairwise_efficient(mu: &Matching, r: &Profile) -> bool {
    let s = mu.as_slice();
    let n = s.len();
    !(0..n).any(|i| {
        (0..n).any(|j| rank(r, i, s[j]) < rank(r, i, s[i]) && rank(r, j, s[i]) < rank(r, j, s[j]))
    })
}

pub fn non_wasteful(inst: &Instance, mu: &Matching, r: &Profile) -> bool {
    let s = mu.as_slice();
    (0..s.len()).all(|i| {
        inst.objects().all(|o| {
            let held = s.iter().filter(|&&x| x == o).count() as u32;
            held >= inst.capacity(o) || rank(r, i, o) >= rank(r, i, s[i])
        })
    })
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Serial dictatorship computed straight from the definition.
pub fn serial_dictatorship(inst: &Instance, order: &[usize], r: &Profile) -> Matching {
    let mut left = inst.capacities().to_vec();
    let mut got = vec![0usize; inst.n()];
    for &i in order {
        let o = r.get(AgentId(i)).ranking().iter().find(|o| left[o.0] > 0).unwrap();
        left[o.0] -= 1;
        got[i] = o.0;
    }
    Matching::from_indices(inst, &got).unwrap()
}
