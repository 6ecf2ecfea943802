//! Test-only ground truth built from first principles: power-of-two
//! utilities, brute-force picking sequences and signature maximization.
#![allow(dead_code)]

use lexalloc::generate::{generate_with, InstanceKind};
use lexalloc::{Allocation, Bundle, Instance, ItemId, Polarity};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Item at 1-based rank k is worth ±2^(m-k).
pub fn utility(inst: &Instance, agent: usize, b: Bundle) -> i128 {
    let m = inst.m();
    assert!(m < 120);
    inst.ordering(agent)
        .ranked()
        .iter()
        .enumerate()
        .filter(|(_, (it, _))| b.contains(*it))
        .map(|(k, &(_, p))| {
            let w = 1i128 << (m - 1 - k);
            if p == Polarity::Good { w } else { -w }
        })
        .sum()
}

fn is_good(inst: &Instance, i: usize, it: ItemId) -> bool {
    inst.ordering(i).polarity(it) == Polarity::Good
}

pub fn ef(inst: &Instance, a: &Allocation) -> bool {
    pairs(inst).all(|(i, h)| utility(inst, i, a.bundle(i)) >= utility(inst, i, a.bundle(h)))
}

pub fn ef1(inst: &Instance, a: &Allocation) -> bool {
    pairs(inst).all(|(i, h)| {
        let (ai, ah) = (a.bundle(i), a.bundle(h));
        if utility(inst, i, ai) >= utility(inst, i, ah) {
            return true;
        }
        ai.union(ah).iter().any(|o| {
            let removable = (ah.contains(o) && is_good(inst, i, o)) || (ai.contains(o) && !is_good(inst, i, o));
            removable && utility(inst, i, ai.without(o)) >= utility(inst, i, ah.without(o))
        })
    })
}

/// `goods` checks removals of perceived goods from the envied bundle,
/// `chores` removals of perceived chores from the envious one.
pub fn efx_variant(inst: &Instance, a: &Allocation, goods: bool, chores: bool) -> bool {
    pairs(inst).all(|(i, h)| {
        let (ai, ah) = (a.bundle(i), a.bundle(h));
        let g_ok = !goods
            || ah.iter().filter(|&o| is_good(inst, i, o)).all(|o| utility(inst, i, ai) >= utility(inst, i, ah.without(o)));
        let c_ok = !chores
            || ai.iter().filter(|&o| !is_good(inst, i, o)).all(|o| utility(inst, i, ai.without(o)) >= utility(inst, i, ah));
        g_ok && c_ok
    })
}

pub fn efx(inst: &Instance, a: &Allocation) -> bool {
    efx_variant(inst, a, true, true)
}

fn pairs(inst: &Instance) -> impl Iterator<Item = (usize, usize)> {
    let n = inst.n();
    (0..n).flat_map(move |i| (0..n).filter(move |&h| h != i).map(move |h| (i, h)))
}

/// All complete allocations, built from owner codes.
pub fn all_allocations(inst: &Instance) -> Vec<Allocation> {
    let (n, m) = (inst.n(), inst.m());
    let total = (n as u64).pow(m as u32);
    (0..total)
        .map(|mut code| {
            let owner: Vec<usize> = (0..m)
                .map(|_| {
                    let a = (code % n as u64) as usize;
                    code /= n as u64;
                    a
                })
                .collect();
            Allocation::from_owners(n, &owner)
        })
        .collect()
}

/// Utility-weighted Pareto dominance by brute force.
pub fn pareto_optimal(inst: &Instance, a: &Allocation, all: &[Allocation]) -> bool {
    let base: Vec<i128> = (0..inst.n()).map(|i| utility(inst, i, a.bundle(i))).collect();
    !all.iter().any(|b| {
        let vals: Vec<i128> = (0..inst.n()).map(|i| utility(inst, i, b.bundle(i))).collect();
        vals.iter().zip(&base).all(|(x, y)| x >= y) && vals.iter().zip(&base).any(|(x, y)| x > y)
    })
}

/// Max over partitions of the agent's least valued part.
pub fn mms_value(inst: &Instance, agent: usize, all: &[Allocation]) -> i128 {
    all.iter()
        .map(|p| p.bundles().iter().map(|&b| utility(inst, agent, b)).min().unwrap())
        .max()
        .unwrap()
}

pub fn mms(inst: &Instance, a: &Allocation, all: &[Allocation]) -> bool {
    (0..inst.n()).all(|i| utility(inst, i, a.bundle(i)) >= mms_value(inst, i, all))
}

/// Whether some picking sequence of length m yields exactly `a`, trying
/// every sequence.
pub fn sequencible_brute(inst: &Instance, a: &Allocation) -> bool {
    let (n, m) = (inst.n(), inst.m());
    let total = (n as u64).pow(m as u32);
    (0..total).any(|mut code| {
        let mut avail = inst.items();
        let mut got = vec![Bundle::EMPTY; n];
        for _ in 0..m {
            let agent = (code % n as u64) as usize;
            code /= n as u64;
            let ord = inst.ordering(agent);
            let good = ord.ranked().iter().find(|(it, p)| avail.contains(*it) && *p == Polarity::Good);
            let pick = match good {
                Some(&(it, _)) => it,
                None => ord.ranked().iter().rev().find(|(it, _)| avail.contains(*it)).unwrap().0,
            };
            avail.remove(pick);
            got[agent].insert(pick);
        }
        got == a.bundles()
    })
}

/// Signature from first principles: for every agent and level, whether it
/// holds its level-th best good (chore), goods before chores.
pub fn signature_vec(inst: &Instance, a: &Allocation) -> Vec<u32> {
    let m = inst.m();
    let mut v = vec![0u32; 2 * m];
    for i in 0..inst.n() {
        let ranked = inst.ordering(i).ranked();
        let goods: Vec<ItemId> = ranked.iter().filter(|(_, p)| *p == Polarity::Good).map(|(it, _)| *it).collect();
        let chores: Vec<ItemId> = ranked.iter().rev().filter(|(_, p)| *p == Polarity::Chore).map(|(it, _)| *it).collect();
        for (k, it) in goods.iter().enumerate() {
            v[k] += a.bundle(i).contains(*it) as u32;
        }
        for (k, it) in chores.iter().enumerate() {
            v[m + k] += a.bundle(i).contains(*it) as u32;
        }
    }
    v
}

pub fn best_signature_brute(inst: &Instance, all: &[Allocation]) -> Vec<u32> {
    all.iter().map(|a| signature_vec(inst, a)).max().unwrap()
}

/// Seeded draw of an instance of `kind` with n, m uniform in the ranges.
pub fn random_instance(kind: InstanceKind, max_n: usize, max_m: usize, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_n);
    let lo = usize::from(kind == InstanceKind::TopGood);
    let m = rng.gen_range(lo..=max_m);
    generate_with(kind, n, m, &mut rng).unwrap()
}

pub fn labels(inst: &Instance, b: Bundle) -> Vec<String> {
    b.iter().map(|it| inst.label(it).to_string()).collect()
}

pub fn bundle_of(inst: &Instance, labels: &[&str]) -> Bundle {
    labels.iter().map(|l| inst.item_by_label(l).unwrap()).collect()
}

pub fn alloc_of(inst: &Instance, groups: &[&[&str]]) -> Allocation {
    Allocation::from_bundles(groups.iter().map(|g| bundle_of(inst, g)).collect()).unwrap()
}
