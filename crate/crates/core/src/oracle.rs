//! Exhaustive ground truth: enumeration, existence, dominance, best signature.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::checkers::{self, Property, PropertyReport, Violation};
use crate::error::{Error, Result};
use crate::model::{Allocation, Bundle, Instance, ItemId, Signature};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchBudget {
    /// Cap on enumerated allocations, or on visited nodes for pruned searches.
    pub max_allocations: u64,
    pub max_seconds: f64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { max_allocations: 2_000_000, max_seconds: 60.0 }
    }
}

impl SearchBudget {
    pub fn with_allocations(max_allocations: u64) -> Self {
        SearchBudget { max_allocations, ..Default::default() }
    }

    /// Rejects a plain enumeration of `radix^m` points up front.
    fn admit(&self, radix: usize, m: usize) -> Result<u64> {
        let count = (radix as u128).checked_pow(m as u32).filter(|&c| c <= u64::MAX as u128);
        match count {
            Some(c) if c as u64 <= self.max_allocations => Ok(c as u64),
            _ => Err(Error::BudgetExceeded(format!(
                "{radix}^{m} allocations exceed the cap of {}",
                self.max_allocations
            ))),
        }
    }
}

/// Node and wall-clock accounting for pruned searches.
struct Meter {
    nodes: u64,
    cap: u64,
    deadline: Instant,
}

impl Meter {
    fn new(budget: &SearchBudget) -> Self {
        let secs = budget.max_seconds.clamp(0.0, 1e9);
        Meter {
            nodes: 0,
            cap: budget.max_allocations,
            deadline: Instant::now() + Duration::from_secs_f64(secs),
        }
    }

    fn tick(&mut self) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.cap {
            return Err(Error::BudgetExceeded(format!("search visited more than {} nodes", self.cap)));
        }
        if self.nodes.is_multiple_of(4096) && Instant::now() > self.deadline {
            return Err(Error::BudgetExceeded("wall-clock limit reached".into()));
        }
        Ok(())
    }
}

/// Mixed-radix enumeration of labeled assignments, item 0 fastest.
pub struct Allocations {
    n: usize,
    radix: usize,
    digits: Vec<usize>,
    bundles: Vec<Bundle>,
    done: bool,
}

impl Iterator for Allocations {
    type Item = Allocation;

    fn next(&mut self) -> Option<Allocation> {
        if self.done {
            return None;
        }
        let out = Allocation::from_bundles(self.bundles[..self.n].to_vec()).expect("disjoint by construction");
        let mut k = 0;
        loop {
            if k == self.digits.len() {
                self.done = true;
                break;
            }
            let item = ItemId(k);
            self.bundles[self.digits[k]].remove(item);
            self.digits[k] += 1;
            if self.digits[k] == self.radix {
                self.digits[k] = 0;
                self.bundles[0].insert(item);
                k += 1;
            } else {
                self.bundles[self.digits[k]].insert(item);
                break;
            }
        }
        Some(out)
    }
}

/// Every labeled assignment of items to agents exactly once. With
/// `complete_only == false` an extra digit value leaves the item unallocated.
pub fn enumerate_allocations(instance: &Instance, complete_only: bool, budget: &SearchBudget) -> Result<Allocations> {
    let n = instance.n();
    let radix = if complete_only { n } else { n + 1 };
    budget.admit(radix, instance.m())?;
    let mut bundles = vec![Bundle::EMPTY; n + 1];
    bundles[0] = instance.items();
    Ok(Allocations { n, radix, digits: vec![0; instance.m()], bundles, done: false })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Verdict {
    Undecided,
    Worse,
    Equal,
    Better,
}

/// Where `partial` stands against `fixed` for agent `i`, given which items are assigned.
fn partial_verdict(instance: &Instance, i: usize, partial: Bundle, fixed: Bundle, assigned: Bundle) -> Verdict {
    let ord = instance.ordering(i);
    for &(it, _) in ord.ranked() {
        if !assigned.contains(it) {
            return Verdict::Undecided;
        }
        let (p, f) = (partial.contains(it), fixed.contains(it));
        if p != f {
            return if p == ord.is_good(it) { Verdict::Better } else { Verdict::Worse };
        }
    }
    Verdict::Equal
}

/// Searches complete allocations from the highest mixed-radix code downward
/// and returns the first one Pareto dominating `allocation`.
pub fn find_dominator(instance: &Instance, allocation: &Allocation, budget: &SearchBudget) -> Result<Option<Allocation>> {
    allocation.require_complete(instance)?;
    let n = instance.n();
    let m = instance.m();
    let mut meter = Meter::new(budget);
    let mut owner = vec![0usize; m];
    let mut bundles = vec![Bundle::EMPTY; n];

    fn rec(
        inst: &Instance,
        target: &Allocation,
        depth: usize,
        owner: &mut [usize],
        bundles: &mut [Bundle],
        assigned: Bundle,
        meter: &mut Meter,
    ) -> Result<bool> {
        meter.tick()?;
        let mut strict = false;
        for (i, &b) in bundles.iter().enumerate() {
            match partial_verdict(inst, i, b, target.bundle(i), assigned) {
                Verdict::Worse => return Ok(false),
                Verdict::Better => strict = true,
                _ => {}
            }
        }
        let m = inst.m();
        if depth == m {
            return Ok(strict);
        }
        let item = ItemId(m - 1 - depth);
        for a in (0..inst.n()).rev() {
            owner[item.0] = a;
            bundles[a].insert(item);
            let found = rec(inst, target, depth + 1, owner, bundles, assigned.with(item), meter)?;
            if found {
                return Ok(true);
            }
            bundles[a].remove(item);
        }
        Ok(false)
    }

    if rec(instance, allocation, 0, &mut owner, &mut bundles, Bundle::EMPTY, &mut meter)? {
        Ok(Some(Allocation::from_owners(n, &owner)))
    } else {
        Ok(None)
    }
}

pub fn check_po_exhaustive(instance: &Instance, allocation: &Allocation, budget: &SearchBudget) -> Result<PropertyReport> {
    let violations = find_dominator(instance, allocation, budget)?
        .map(|by| vec![Violation::Dominated { by }])
        .unwrap_or_default();
    Ok(PropertyReport::from_violations(Property::Po, violations))
}

/// `slots[i][k]` is the signature slot item `k` fills when agent `i` holds
/// it: goods levels first, then chore levels, most significant first.
fn slot_table(instance: &Instance) -> Vec<Vec<usize>> {
    let m = instance.m();
    instance
        .orderings()
        .iter()
        .map(|o| {
            let mut row = vec![0; m];
            for (k, g) in o.goods_desc().enumerate() {
                row[g.0] = k;
            }
            for (k, c) in o.chores_best_first().enumerate() {
                row[c.0] = m + k;
            }
            row
        })
        .collect()
}

/// For every item, the agents for whom it fills the most significant slot
/// anyone can give it, ascending.
///
/// Each agent holds exactly one item per level, so a signature is a histogram
/// of the slots items land in. Items contribute independently, hence an
/// allocation is rank-maximal exactly when every item goes to one of these
/// agents.
pub fn rank_maximal_candidates(instance: &Instance) -> Vec<Vec<usize>> {
    let slots = slot_table(instance);
    (0..instance.m())
        .map(|k| {
            let best = slots.iter().map(|row| row[k]).min().expect("n >= 1");
            (0..instance.n()).filter(|&i| slots[i][k] == best).collect()
        })
        .collect()
}

/// Lexicographically maximum signature over complete allocations, with the
/// attaining allocation that gives each item to its lowest-index candidate.
pub fn best_signature(instance: &Instance) -> (Signature, Allocation) {
    let owner: Vec<usize> = rank_maximal_candidates(instance).iter().map(|c| c[0]).collect();
    let alloc = Allocation::from_owners(instance.n(), &owner);
    (checkers::signature_of(instance, &alloc), alloc)
}

/// Item order for pruned searches: most important items first, by total rank.
fn search_order(instance: &Instance) -> Vec<ItemId> {
    let mut items: Vec<ItemId> = instance.items().iter().collect();
    items.sort_by_key(|&it| {
        let total: usize = instance.orderings().iter().map(|o| o.position(it)).sum();
        (total, it.0)
    });
    items
}

/// Result of an existence search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub witness: Option<Allocation>,
    /// Complete allocations evaluated against the predicate.
    pub checked: u64,
    /// Search nodes visited, including pruned subtrees' roots.
    pub nodes: u64,
}

/// Exact pair pruning for envy-freeness: for some agent i and other agent h,
/// the most important assigned item of A_i ∪ A_h is bad for i and no
/// unassigned item ranks above it, so i already envies h.
fn ef_dead(instance: &Instance, owner: &[usize], assigned: Bundle) -> bool {
    let n = instance.n();
    for i in 0..n {
        let ord = instance.ordering(i);
        // Bit h set once the pair (i, h) is settled.
        let mut settled: u64 = 1 << i;
        let all: u64 = if n >= 64 { u64::MAX } else { (1u64 << n) - 1 };
        for &(it, _) in ord.ranked() {
            if settled == all || !assigned.contains(it) {
                break;
            }
            let o = owner[it.0];
            let good = ord.is_good(it);
            if o == i {
                if !good {
                    return true;
                }
                settled = all;
            } else if settled >> o & 1 == 0 {
                if good {
                    return true;
                }
                settled |= 1 << o;
            }
        }
    }
    false
}

/// First complete allocation (in the search order) satisfying every property
/// in `predicate`, or `None` after exhausting the space.
pub fn decide_exists(instance: &Instance, predicate: &[Property], budget: &SearchBudget) -> Result<Decision> {
    let n = instance.n();
    let m = instance.m();
    let want = |p| predicate.contains(&p);
    let prune_ef = want(Property::Ef) && n <= 64;
    let candidates: Vec<Vec<usize>> = if want(Property::Rm) {
        rank_maximal_candidates(instance)
    } else {
        vec![(0..n).collect(); m]
    };
    if !prune_ef {
        let space = candidates.iter().try_fold(1u64, |acc, c| acc.checked_mul(c.len() as u64));
        if space.is_none_or(|s| s > budget.max_allocations) {
            return Err(Error::BudgetExceeded(format!(
                "search space exceeds the cap of {}",
                budget.max_allocations
            )));
        }
    }
    let order = search_order(instance);
    let mut meter = Meter::new(budget);

    let mut local: Vec<Property> = predicate
        .iter()
        .copied()
        .filter(|p| !matches!(p, Property::Po | Property::Rm))
        .collect();
    local.sort();
    local.dedup();

    struct Ctx<'a> {
        inst: &'a Instance,
        order: &'a [ItemId],
        candidates: &'a [Vec<usize>],
        local: &'a [Property],
        need_po: bool,
        prune_ef: bool,
        budget: &'a SearchBudget,
        owner: Vec<usize>,
        checked: u64,
    }

    fn accept(c: &mut Ctx<'_>) -> Result<bool> {
        c.checked += 1;
        let alloc = Allocation::from_owners(c.inst.n(), &c.owner);
        for &p in c.local {
            if checkers::holds_local(c.inst, &alloc, p) != Some(true) {
                return Ok(false);
            }
        }
        if c.need_po && find_dominator(c.inst, &alloc, c.budget)?.is_some() {
            return Ok(false);
        }
        Ok(true)
    }

    fn rec(c: &mut Ctx<'_>, depth: usize, assigned: Bundle, meter: &mut Meter) -> Result<bool> {
        meter.tick()?;
        if c.prune_ef && ef_dead(c.inst, &c.owner, assigned) {
            return Ok(false);
        }
        if depth == c.order.len() {
            return accept(c);
        }
        let item = c.order[depth];
        for k in 0..c.candidates[item.0].len() {
            c.owner[item.0] = c.candidates[item.0][k];
            if rec(c, depth + 1, assigned.with(item), meter)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    let mut ctx = Ctx {
        inst: instance,
        order: &order,
        candidates: &candidates,
        local: &local,
        need_po: want(Property::Po),
        prune_ef,
        budget,
        owner: vec![0; m],
        checked: 0,
    };
    let found = rec(&mut ctx, 0, Bundle::EMPTY, &mut meter)?;
    let witness = found.then(|| Allocation::from_owners(n, &ctx.owner));
    Ok(Decision { witness, checked: ctx.checked, nodes: meter.nodes })
}

/// Lex-maximum over labeled n-partitions of the agent's least preferred part.
pub fn mms_partition_oracle(instance: &Instance, agent: usize, budget: &SearchBudget) -> Result<Bundle> {
    instance.check_agent(agent)?;
    let cmp = |x: &Bundle, y: &Bundle| instance.compare(agent, *x, *y);
    let mut best: Option<Bundle> = None;
    for alloc in enumerate_allocations(instance, true, budget)? {
        let worst = *alloc.bundles().iter().min_by(|x, y| cmp(x, y)).expect("n >= 1");
        if best.is_none_or(|b| cmp(&worst, &b) == Ordering::Greater) {
            best = Some(worst);
        }
    }
    Ok(best.expect("at least one partition"))
}

/// Full-enumeration tally of how a fixture fares against a predicate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub fixture: String,
    pub predicate: Vec<Property>,
    pub checked: u64,
    pub satisfying: u64,
    /// Allocations passing each property on its own.
    pub passes: BTreeMap<String, u64>,
    /// Joint pass/fail patterns such as `po=1,seq=0`.
    pub patterns: BTreeMap<String, u64>,
    /// First failed property and witness kind, per failing allocation.
    pub failure_reasons: BTreeMap<String, u64>,
}

fn reason(property: Property, v: Option<&Violation>) -> String {
    let kind = match v {
        Some(Violation::Envy { removal: None, .. }) => "envy",
        Some(Violation::Envy { removal: Some(r), .. }) => match r.side {
            checkers::Side::Envied => "envy after removing a good",
            checkers::Side::Envious => "envy after removing own chore",
        },
        Some(Violation::MmsShortfall { .. }) => "below maximin share",
        Some(Violation::Dominated { .. }) => "pareto dominated",
        Some(Violation::BetterSignature { .. }) => "signature not maximal",
        Some(Violation::NotSequencible { .. }) => "not sequencible",
        None => "violated",
    };
    format!("{property}: {kind}")
}

/// Enumerates every complete allocation and tallies verdicts.
pub fn verify_counterexample(name: &str, instance: &Instance, predicate: &[Property], budget: &SearchBudget) -> Result<Certificate> {
    let best = predicate.contains(&Property::Rm).then(|| best_signature(instance));
    let mut cert = Certificate {
        fixture: name.to_string(),
        predicate: predicate.to_vec(),
        checked: 0,
        satisfying: 0,
        passes: BTreeMap::new(),
        patterns: BTreeMap::new(),
        failure_reasons: BTreeMap::new(),
    };
    for p in predicate {
        cert.passes.insert(p.name().to_string(), 0);
    }
    let start = Instant::now();
    let limit = Duration::from_secs_f64(budget.max_seconds.clamp(0.0, 1e9));
    for alloc in enumerate_allocations(instance, true, budget)? {
        if start.elapsed() > limit {
            return Err(Error::BudgetExceeded("wall-clock limit reached".into()));
        }
        cert.checked += 1;
        let mut first_failure: Option<String> = None;
        let mut pattern = Vec::with_capacity(predicate.len());
        for &p in predicate {
            let violation = match p {
                Property::Po => find_dominator(instance, &alloc, budget)?.map(|by| Violation::Dominated { by }),
                Property::Rm => {
                    let (sig, w) = best.as_ref().expect("computed above");
                    checkers::check_rm_against(instance, &alloc, sig, w)?.violations.into_iter().next()
                }
                _ => checkers::first_local_violation(instance, &alloc, p),
            };
            let ok = violation.is_none();
            pattern.push(format!("{}={}", p.name(), ok as u8));
            if ok {
                *cert.passes.get_mut(p.name()).expect("seeded") += 1;
            } else if first_failure.is_none() {
                first_failure = Some(reason(p, violation.as_ref()));
            }
        }
        *cert.patterns.entry(pattern.join(",")).or_default() += 1;
        match first_failure {
            None => cert.satisfying += 1,
            Some(r) => *cert.failure_reasons.entry(r).or_default() += 1,
        }
    }
    Ok(cert)
}
