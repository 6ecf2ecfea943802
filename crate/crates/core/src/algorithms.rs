//! Constructive allocation procedures.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::checkers::signature_of;
use crate::error::{Error, Result};
use crate::model::{Allocation, Bundle, Instance, ItemId};
use crate::oracle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Precondition {
    TopGoodMissing,
    CommonChoreExists,
    NotChoresOnly,
    NotObjective,
    InvalidPriority,
}

impl fmt::Display for Precondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Precondition::TopGoodMissing => "no agent ranks a good first",
            Precondition::CommonChoreExists => "some item is a chore for every agent",
            Precondition::NotChoresOnly => "instance contains goods",
            Precondition::NotObjective => "item polarities differ across agents",
            Precondition::InvalidPriority => "priority order is not a permutation of the agents",
        })
    }
}

fn violated(p: Precondition) -> Error {
    Error::PreconditionViolated(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Reason {
    TopGood,
    CommonChores,
    Remainder,
    SerialPick,
    RoundRobinPick,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub round: usize,
    pub agent: usize,
    pub items: Bundle,
    pub reason: Reason,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgorithmOutcome {
    pub allocation: Allocation,
    pub trace: Vec<TraceStep>,
}

impl AlgorithmOutcome {
    /// Rebuilds the allocation from the trace alone.
    pub fn replay(&self) -> Allocation {
        let mut a = Allocation::empty(self.allocation.n());
        for s in &self.trace {
            a.assign(s.agent, a.bundle(s.agent).union(s.items));
        }
        a
    }
}

/// Accumulates an allocation together with its trace.
struct Builder {
    alloc: Allocation,
    trace: Vec<TraceStep>,
    remaining: Bundle,
}

impl Builder {
    fn new(instance: &Instance) -> Self {
        Builder { alloc: Allocation::empty(instance.n()), trace: Vec::new(), remaining: instance.items() }
    }

    fn give(&mut self, round: usize, agent: usize, items: Bundle, reason: Reason) {
        debug_assert!(items.is_subset(self.remaining));
        if items.is_empty() {
            return;
        }
        self.remaining = self.remaining.minus(items);
        self.alloc.assign(agent, self.alloc.bundle(agent).union(items));
        self.trace.push(TraceStep { round, agent, items, reason });
    }

    fn finish(self) -> AlgorithmOutcome {
        debug_assert!(self.remaining.is_empty());
        AlgorithmOutcome { allocation: self.alloc, trace: self.trace }
    }
}

fn check_priority(instance: &Instance, order: &[usize]) -> Result<()> {
    let n = instance.n();
    let mut seen = vec![false; n];
    if order.len() != n {
        return Err(violated(Precondition::InvalidPriority));
    }
    for &a in order {
        if a >= n || std::mem::replace(&mut seen[a], true) {
            return Err(violated(Precondition::InvalidPriority));
        }
    }
    Ok(())
}

fn top_good_agent(instance: &Instance) -> Option<usize> {
    (0..instance.n()).find(|&i| {
        let o = instance.ordering(i);
        !o.is_empty() && o.is_good(o.ranked()[0].0)
    })
}

/// The elimination loop: repeatedly give the agent holding the earliest
/// good (by rank among remaining items) that good plus the items every other
/// remaining agent sees as chores.
fn eliminate(instance: &Instance, mut agents: Vec<usize>, b: &mut Builder, mut round: usize) -> Result<()> {
    while !b.remaining.is_empty() {
        if agents.is_empty() {
            break;
        }
        if agents.len() == 1 {
            let rest = b.remaining;
            b.give(round, agents[0], rest, Reason::Remainder);
            break;
        }
        let remaining = b.remaining;
        let pick = (1..=remaining.len()).find_map(|k| {
            agents.iter().copied().find_map(|i| {
                let it = instance.ordering(i).rank_within(k, remaining).ok()?;
                instance.ordering(i).is_good(it).then_some((i, it))
            })
        });
        let (j, good) = pick.ok_or_else(|| violated(Precondition::CommonChoreExists))?;
        let others = agents.iter().copied().filter(|&a| a != j);
        let common = instance.common_chores_among(others).intersect(remaining).without(good);
        b.give(round, j, Bundle::singleton(good), Reason::TopGood);
        b.give(round, j, common, Reason::CommonChores);
        agents.retain(|&a| a != j);
        round += 1;
    }
    Ok(())
}

/// EFX and Pareto optimal allocation when some agent ranks a good first.
pub fn efx_po_top_good(instance: &Instance) -> Result<AlgorithmOutcome> {
    let first = top_good_agent(instance).ok_or_else(|| violated(Precondition::TopGoodMissing))?;
    let mut b = Builder::new(instance);
    let top = instance.ordering(first).ranked()[0].0;
    let others: Vec<usize> = (0..instance.n()).filter(|&a| a != first).collect();
    let common = instance.common_chores_among(others.iter().copied()).without(top);
    b.give(0, first, Bundle::singleton(top), Reason::TopGood);
    b.give(0, first, common, Reason::CommonChores);
    eliminate(instance, others, &mut b, 1)?;
    Ok(b.finish())
}

/// Variant of [`efx_po_top_good`] for instances without common chores.
pub fn efx_po_no_common_chore(instance: &Instance) -> Result<AlgorithmOutcome> {
    if !instance.common_chores().is_empty() {
        return Err(violated(Precondition::CommonChoreExists));
    }
    let mut b = Builder::new(instance);
    eliminate(instance, (0..instance.n()).collect(), &mut b, 0)?;
    Ok(b.finish())
}

/// Maximin-share allocation for any mixed instance. `sigma` orders the
/// chore-picking step and `tau` the good-grabbing step.
pub fn mms_mixed(instance: &Instance, sigma: &[usize], tau: &[usize]) -> Result<AlgorithmOutcome> {
    check_priority(instance, sigma)?;
    check_priority(instance, tau)?;
    if top_good_agent(instance).is_some() {
        return efx_po_top_good(instance);
    }
    let n = instance.n();
    let mut b = Builder::new(instance);
    let common = instance.common_chores();
    let mut picked: Vec<Option<ItemId>> = vec![None; n];
    let mut pool = common;
    let mut quota = vec![1usize; n];
    if common.len() >= n {
        quota[0] = common.len() - n + 1;
    }
    for (pos, &a) in sigma.iter().enumerate() {
        let ord = instance.ordering(a);
        let mut take = Bundle::EMPTY;
        for c in ord.chores_best_first().filter(|&c| pool.contains(c)).take(quota[pos]) {
            take.insert(c);
        }
        pool = pool.minus(take);
        if let Some(&(top, _)) = ord.ranked().first().filter(|(top, _)| take.contains(*top)) {
            picked[a] = Some(top);
        }
        b.give(0, a, take, Reason::SerialPick);
    }
    for &a in sigma {
        if picked[a].is_some() {
            let goods = instance.goods_of(a).intersect(b.remaining);
            b.give(0, a, goods, Reason::Remainder);
        }
    }
    for &a in tau {
        let goods = instance.goods_of(a).intersect(b.remaining);
        b.give(1, a, goods, Reason::SerialPick);
    }
    Ok(b.finish())
}

/// EFX and Pareto optimal allocation of chores.
pub fn efx_po_chores(instance: &Instance, sigma: &[usize]) -> Result<AlgorithmOutcome> {
    if !instance.is_chores_only() {
        return Err(violated(Precondition::NotChoresOnly));
    }
    check_priority(instance, sigma)?;
    let (n, m) = (instance.n(), instance.m());
    let mut b = Builder::new(instance);
    if m > n {
        let first = sigma[0];
        let take: Bundle = instance.ordering(first).chores_best_first().take(m - n).collect();
        b.give(0, first, take, Reason::SerialPick);
    }
    for &a in sigma {
        if let Some(c) = instance.ordering(a).bottom_in(b.remaining) {
            b.give(1, a, Bundle::singleton(c), Reason::SerialPick);
        }
    }
    Ok(b.finish())
}

/// The rank-maximal allocation giving each item to its lowest-index candidate.
pub fn rank_maximal(instance: &Instance) -> AlgorithmOutcome {
    let (_, alloc) = oracle::best_signature(instance);
    outcome_from(alloc, Reason::Remainder)
}

fn outcome_from(alloc: Allocation, reason: Reason) -> AlgorithmOutcome {
    let trace = alloc
        .bundles()
        .iter()
        .enumerate()
        .filter(|(_, b)| !b.is_empty())
        .map(|(agent, &items)| TraceStep { round: 0, agent, items, reason })
        .collect();
    AlgorithmOutcome { allocation: alloc, trace }
}

/// An allocation of chores that is both MMS and rank-maximal, or `None` when
/// no such allocation exists.
pub fn mms_rm_chores(instance: &Instance) -> Result<Option<AlgorithmOutcome>> {
    if !instance.is_chores_only() {
        return Err(violated(Precondition::NotChoresOnly));
    }
    let (n, m) = (instance.n(), instance.m());
    let (best, rm) = oracle::best_signature(instance);
    if n == 1 || m == 0 {
        return Ok(Some(outcome_from(rm, Reason::Remainder)));
    }
    let worst_taker = (0..n).find(|&i| rm.bundle(i).contains(instance.ordering(i).ranked()[0].0));
    let Some(taker) = worst_taker else {
        return Ok(Some(outcome_from(rm, Reason::Remainder)));
    };
    let o = instance.ordering(taker).ranked()[0].0;
    let rest = instance.items().without(o);
    for i in 0..n {
        let agents: Vec<usize> = (0..n).filter(|&a| a != i).collect();
        let (sub, agent_map, item_map) = instance.restrict(&agents, rest)?;
        let (_, sub_rm) = oracle::best_signature(&sub);
        let mut combined = Allocation::empty(n);
        combined.assign(i, Bundle::singleton(o));
        let mut trace = vec![TraceStep { round: 0, agent: i, items: Bundle::singleton(o), reason: Reason::SerialPick }];
        for (k, &a) in agent_map.iter().enumerate() {
            let items: Bundle = sub_rm.bundle(k).iter().map(|it| item_map[it.0]).collect();
            combined.assign(a, items);
            if !items.is_empty() {
                trace.push(TraceStep { round: 1, agent: a, items, reason: Reason::Remainder });
            }
        }
        let sig = signature_of(instance, &combined);
        if sig.good_counts == best.good_counts && sig.chore_counts[..m - 1] == best.chore_counts[..m - 1] {
            return Ok(Some(AlgorithmOutcome { allocation: combined, trace }));
        }
    }
    Ok(None)
}

/// Round robin over chores by `sigma`, then over goods by reversed `sigma`.
/// The chore phase ends with the last agent in `sigma`.
pub fn double_round_robin(instance: &Instance, sigma: &[usize]) -> Result<AlgorithmOutcome> {
    if !instance.is_objective() {
        return Err(violated(Precondition::NotObjective));
    }
    check_priority(instance, sigma)?;
    let mut b = Builder::new(instance);
    let chores = instance.common_chores();
    let goods = instance.items().minus(chores);
    // Dummy chores pad the chore count to a multiple of n; the first agents
    // in sigma take them, so real chores start later in round 0.
    let mut skip = (instance.n() - chores.len() % instance.n()) % instance.n();
    let mut round = 0;
    while !b.remaining.intersect(chores).is_empty() {
        for &a in sigma {
            if skip > 0 {
                skip -= 1;
                continue;
            }
            if let Some(c) = instance.ordering(a).bottom_in(b.remaining.intersect(chores)) {
                b.give(round, a, Bundle::singleton(c), Reason::RoundRobinPick);
            }
        }
        round += 1;
    }
    while !b.remaining.intersect(goods).is_empty() {
        for &a in sigma.iter().rev() {
            if let Some(g) = instance.ordering(a).top_in(b.remaining.intersect(goods)) {
                b.give(round, a, Bundle::singleton(g), Reason::RoundRobinPick);
            }
        }
        round += 1;
    }
    Ok(b.finish())
}

pub fn identity(n: usize) -> Vec<usize> {
    (0..n).collect()
}
