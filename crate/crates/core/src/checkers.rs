//! Fairness and efficiency checks with re-checkable witnesses.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{Allocation, Bundle, Instance, ItemId, PickingSequence, Signature};
use crate::oracle::{self, SearchBudget};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Property {
    Ef,
    Ef1,
    Efx,
    EfxG,
    EfxC,
    Mms,
    Po,
    Rm,
    Sequencible,
}

impl Property {
    pub const ALL: [Property; 9] = [
        Property::Ef,
        Property::Ef1,
        Property::Efx,
        Property::EfxG,
        Property::EfxC,
        Property::Mms,
        Property::Po,
        Property::Rm,
        Property::Sequencible,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::Ef => "ef",
            Property::Ef1 => "ef1",
            Property::Efx => "efx",
            Property::EfxG => "efx-g",
            Property::EfxC => "efx-c",
            Property::Mms => "mms",
            Property::Po => "po",
            Property::Rm => "rm",
            Property::Sequencible => "seq",
        }
    }

    pub fn from_name(name: &str) -> Option<Property> {
        Property::ALL.into_iter().find(|p| p.name() == name)
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// A perceived good taken out of the envied agent's bundle.
    Envied,
    /// A perceived chore taken out of the envious agent's own bundle.
    Envious,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Removal {
    pub item: ItemId,
    pub side: Side,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// `envious` strictly prefers `envied`'s bundle, after `removal` if any.
    /// `decisive` is the most important item on which the compared bundles differ.
    Envy {
        envious: usize,
        envied: usize,
        removal: Option<Removal>,
        decisive: ItemId,
    },
    MmsShortfall { agent: usize, share: Bundle },
    Dominated { by: Allocation },
    BetterSignature { best: Signature, actual: Signature, witness: Allocation },
    /// Greedy picking got stuck after `prefix` with `remaining` unpicked.
    NotSequencible { prefix: PickingSequence, remaining: Bundle },
}

impl Violation {
    /// Re-checks the violation against `instance` and `allocation`.
    pub fn reproduces(&self, instance: &Instance, allocation: &Allocation) -> bool {
        match self {
            Violation::Envy { envious, envied, removal, .. } => {
                let (i, h) = (*envious, *envied);
                if i >= instance.n() || h >= instance.n() || i == h {
                    return false;
                }
                let (mut own, mut other) = (allocation.bundle(i), allocation.bundle(h));
                match removal {
                    Some(Removal { item, side: Side::Envied }) => {
                        if !other.contains(*item) || !instance.ordering(i).is_good(*item) {
                            return false;
                        }
                        other.remove(*item);
                    }
                    Some(Removal { item, side: Side::Envious }) => {
                        if !own.contains(*item) || instance.ordering(i).is_good(*item) {
                            return false;
                        }
                        own.remove(*item);
                    }
                    None => {}
                }
                instance.compare(i, own, other) == Ordering::Less
            }
            Violation::MmsShortfall { agent, share } => {
                *agent < instance.n()
                    && *share == mms_share(instance, *agent)
                    && instance.compare(*agent, allocation.bundle(*agent), *share) == Ordering::Less
            }
            Violation::Dominated { by } => {
                by.require_complete(instance).is_ok() && dominates(instance, by, allocation)
            }
            Violation::BetterSignature { best, actual, witness } => {
                witness.require_complete(instance).is_ok()
                    && signature_of(instance, witness) == *best
                    && signature_of(instance, allocation) == *actual
                    && best > actual
            }
            Violation::NotSequencible { prefix, remaining } => {
                let mut available = instance.items();
                for &a in &prefix.turns {
                    match instance.ordering(a).pick(available) {
                        Some(it) if allocation.bundle(a).contains(it) => available.remove(it),
                        _ => return false,
                    }
                }
                *remaining == available
                    && !remaining.is_empty()
                    && (0..instance.n()).all(|a| match instance.ordering(a).pick(available) {
                        Some(it) => !allocation.bundle(a).contains(it),
                        None => true,
                    })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub property: Property,
    pub holds: bool,
    /// All violations found, in scan order (agents ascending, items by rank).
    pub violations: Vec<Violation>,
    /// Realizing picking sequence, for sequencibility checks that succeed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sequence: Option<PickingSequence>,
}

impl PropertyReport {
    pub(crate) fn from_violations(property: Property, violations: Vec<Violation>) -> Self {
        PropertyReport { property, holds: violations.is_empty(), violations, sequence: None }
    }

    /// The first violation in scan order.
    pub fn witness(&self) -> Option<&Violation> {
        self.violations.first()
    }
}

/// `b` weakly improves every agent over `a` and strictly improves one.
pub fn dominates(instance: &Instance, b: &Allocation, a: &Allocation) -> bool {
    let mut strict = false;
    for i in 0..instance.n() {
        match instance.compare(i, b.bundle(i), a.bundle(i)) {
            Ordering::Less => return false,
            Ordering::Greater => strict = true,
            Ordering::Equal => {}
        }
    }
    strict
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum EnvyMode {
    Ef,
    Ef1,
    Efx,
    EfxG,
    EfxC,
}

fn decisive(instance: &Instance, agent: usize, x: Bundle, y: Bundle) -> ItemId {
    let diff = Bundle::from_bits(x.bits() ^ y.bits());
    instance.ordering(agent).top_in(diff).expect("envy implies differing bundles")
}

fn envy_violations(instance: &Instance, alloc: &Allocation, mode: EnvyMode, first_only: bool) -> Vec<Violation> {
    let mut out = Vec::new();
    for i in 0..instance.n() {
        let ord = instance.ordering(i);
        let own = alloc.bundle(i);
        for h in 0..instance.n() {
            if h == i {
                continue;
            }
            let other = alloc.bundle(h);
            let envious = ord.compare(own, other) == Ordering::Less;
            let removable = other.intersect(ord.goods()).union(own.intersect(ord.chores()));
            let candidates = ord
                .ranked()
                .iter()
                .map(|&(it, _)| it)
                .filter(|&it| removable.contains(it))
                .map(|it| {
                    let side = if other.contains(it) { Side::Envied } else { Side::Envious };
                    Removal { item: it, side }
                });
            let after = |r: &Removal| match r.side {
                Side::Envied => (own, other.without(r.item)),
                Side::Envious => (own.without(r.item), other),
            };
            match mode {
                EnvyMode::Ef => {
                    if envious {
                        out.push(Violation::Envy {
                            envious: i,
                            envied: h,
                            removal: None,
                            decisive: decisive(instance, i, own, other),
                        });
                    }
                }
                EnvyMode::Ef1 => {
                    if envious
                        && !candidates.clone().any(|r| {
                            let (x, y) = after(&r);
                            ord.compare(x, y) != Ordering::Less
                        })
                    {
                        out.push(Violation::Envy {
                            envious: i,
                            envied: h,
                            removal: None,
                            decisive: decisive(instance, i, own, other),
                        });
                    }
                }
                EnvyMode::Efx | EnvyMode::EfxG | EnvyMode::EfxC => {
                    let failing = candidates
                        .filter(|r| !matches!((mode, r.side), (EnvyMode::EfxG, Side::Envious) | (EnvyMode::EfxC, Side::Envied)))
                        .find(|r| {
                            let (x, y) = after(r);
                            ord.compare(x, y) == Ordering::Less
                        });
                    if let Some(r) = failing {
                        let (x, y) = after(&r);
                        out.push(Violation::Envy {
                            envious: i,
                            envied: h,
                            removal: Some(r),
                            decisive: decisive(instance, i, x, y),
                        });
                    }
                }
            }
            if first_only && !out.is_empty() {
                return out;
            }
        }
    }
    out
}

fn envy_report(instance: &Instance, alloc: &Allocation, mode: EnvyMode, property: Property) -> Result<PropertyReport> {
    alloc.require_complete(instance)?;
    Ok(PropertyReport::from_violations(property, envy_violations(instance, alloc, mode, false)))
}

pub fn check_ef(instance: &Instance, allocation: &Allocation) -> Result<PropertyReport> {
    envy_report(instance, allocation, EnvyMode::Ef, Property::Ef)
}

pub fn check_ef1(instance: &Instance, allocation: &Allocation) -> Result<PropertyReport> {
    envy_report(instance, allocation, EnvyMode::Ef1, Property::Ef1)
}

pub fn check_efx(instance: &Instance, allocation: &Allocation) -> Result<PropertyReport> {
    envy_report(instance, allocation, EnvyMode::Efx, Property::Efx)
}

pub fn check_efx_g(instance: &Instance, allocation: &Allocation) -> Result<PropertyReport> {
    envy_report(instance, allocation, EnvyMode::EfxG, Property::EfxG)
}

pub fn check_efx_c(instance: &Instance, allocation: &Allocation) -> Result<PropertyReport> {
    envy_report(instance, allocation, EnvyMode::EfxC, Property::EfxC)
}

/// The agent's maximin-share bundle.
pub fn mms_share(instance: &Instance, agent: usize) -> Bundle {
    let ord = instance.ordering(agent);
    let n = instance.n();
    if n == 1 || ord.is_empty() {
        return instance.items();
    }
    let (top, _) = ord.ranked()[0];
    let goods = ord.goods();
    if ord.is_good(top) {
        if goods.len() >= n {
            ord.goods_desc().skip(n - 1).collect()
        } else {
            Bundle::EMPTY
        }
    } else {
        goods.with(top)
    }
}

fn mms_violations(instance: &Instance, alloc: &Allocation, first_only: bool) -> Vec<Violation> {
    let mut out = Vec::new();
    for i in 0..instance.n() {
        let share = mms_share(instance, i);
        if instance.compare(i, alloc.bundle(i), share) == Ordering::Less {
            out.push(Violation::MmsShortfall { agent: i, share });
            if first_only {
                break;
            }
        }
    }
    out
}

pub fn check_mms(instance: &Instance, allocation: &Allocation) -> Result<PropertyReport> {
    allocation.require_complete(instance)?;
    Ok(PropertyReport::from_violations(Property::Mms, mms_violations(instance, allocation, false)))
}

/// Greedy realization: repeatedly let the lowest-indexed agent whose next pick
/// lies in its own bundle take it.
fn greedy_sequence(instance: &Instance, alloc: &Allocation) -> std::result::Result<PickingSequence, Violation> {
    let mut available = instance.items();
    let mut turns = Vec::with_capacity(instance.m());
    while !available.is_empty() {
        let next = (0..instance.n()).find_map(|a| {
            instance
                .ordering(a)
                .pick(available)
                .filter(|&it| alloc.bundle(a).contains(it))
                .map(|it| (a, it))
        });
        match next {
            Some((a, it)) => {
                available.remove(it);
                turns.push(a);
            }
            None => {
                return Err(Violation::NotSequencible {
                    prefix: PickingSequence::new(turns),
                    remaining: available,
                })
            }
        }
    }
    Ok(PickingSequence::new(turns))
}

pub fn check_sequencible(instance: &Instance, allocation: &Allocation) -> Result<PropertyReport> {
    allocation.require_complete(instance)?;
    Ok(match greedy_sequence(instance, allocation) {
        Ok(seq) => PropertyReport {
            property: Property::Sequencible,
            holds: true,
            violations: Vec::new(),
            sequence: Some(seq),
        },
        Err(v) => PropertyReport::from_violations(Property::Sequencible, vec![v]),
    })
}

pub fn signature_of(instance: &Instance, allocation: &Allocation) -> Signature {
    let mut sig = Signature::zero(instance.m());
    for i in 0..instance.n() {
        let ord = instance.ordering(i);
        let own = allocation.bundle(i);
        for (k, g) in ord.goods_desc().enumerate() {
            if own.contains(g) {
                sig.good_counts[k] += 1;
            }
        }
        for (k, c) in ord.chores_best_first().enumerate() {
            if own.contains(c) {
                sig.chore_counts[k] += 1;
            }
        }
    }
    sig
}

/// Compares against an already known best signature.
pub fn check_rm_against(instance: &Instance, allocation: &Allocation, best: &Signature, witness: &Allocation) -> Result<PropertyReport> {
    allocation.require_complete(instance)?;
    let actual = signature_of(instance, allocation);
    let violations = if actual == *best {
        Vec::new()
    } else {
        vec![Violation::BetterSignature { best: best.clone(), actual, witness: witness.clone() }]
    };
    Ok(PropertyReport::from_violations(Property::Rm, violations))
}

pub fn check_rm(instance: &Instance, allocation: &Allocation) -> Result<PropertyReport> {
    allocation.require_complete(instance)?;
    let (best, witness) = oracle::best_signature(instance);
    check_rm_against(instance, allocation, &best, &witness)
}

/// Pareto optimality. Chores-only instances use the sequencibility
/// characterization; mixed instances fall back to exhaustive dominance search.
pub fn check_po(instance: &Instance, allocation: &Allocation, budget: &SearchBudget) -> Result<PropertyReport> {
    if instance.is_chores_only() {
        let mut r = check_sequencible(instance, allocation)?;
        r.property = Property::Po;
        Ok(r)
    } else {
        oracle::check_po_exhaustive(instance, allocation, budget)
    }
}

/// Dispatches on `property`; PO and RM go through the exhaustive oracle.
pub fn check_property(instance: &Instance, allocation: &Allocation, property: Property, budget: &SearchBudget) -> Result<PropertyReport> {
    match property {
        Property::Ef => check_ef(instance, allocation),
        Property::Ef1 => check_ef1(instance, allocation),
        Property::Efx => check_efx(instance, allocation),
        Property::EfxG => check_efx_g(instance, allocation),
        Property::EfxC => check_efx_c(instance, allocation),
        Property::Mms => check_mms(instance, allocation),
        Property::Po => oracle::check_po_exhaustive(instance, allocation, budget),
        Property::Rm => check_rm(instance, allocation),
        Property::Sequencible => check_sequencible(instance, allocation),
    }
}

/// Cheap verdict for the properties that need no search; used by the oracle.
/// Assumes a complete allocation.
pub(crate) fn holds_local(instance: &Instance, alloc: &Allocation, property: Property) -> Option<bool> {
    let mode = match property {
        Property::Ef => EnvyMode::Ef,
        Property::Ef1 => EnvyMode::Ef1,
        Property::Efx => EnvyMode::Efx,
        Property::EfxG => EnvyMode::EfxG,
        Property::EfxC => EnvyMode::EfxC,
        Property::Mms => return Some(mms_violations(instance, alloc, true).is_empty()),
        Property::Sequencible => return Some(greedy_sequence(instance, alloc).is_ok()),
        Property::Po | Property::Rm => return None,
    };
    Some(envy_violations(instance, alloc, mode, true).is_empty())
}

/// First violation of a local property, used by certificates.
pub(crate) fn first_local_violation(instance: &Instance, alloc: &Allocation, property: Property) -> Option<Violation> {
    let mode = match property {
        Property::Ef => EnvyMode::Ef,
        Property::Ef1 => EnvyMode::Ef1,
        Property::Efx => EnvyMode::Efx,
        Property::EfxG => EnvyMode::EfxG,
        Property::EfxC => EnvyMode::EfxC,
        Property::Mms => return mms_violations(instance, alloc, true).into_iter().next(),
        Property::Sequencible => return greedy_sequence(instance, alloc).err(),
        Property::Po | Property::Rm => return None,
    };
    envy_violations(instance, alloc, mode, true).into_iter().next()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ItemId;

    fn b(items: &[usize]) -> Bundle {
        items.iter().map(|&i| ItemId(i - 1)).collect()
    }

    fn alloc(bundles: &[&[usize]]) -> Allocation {
        Allocation::from_bundles(bundles.iter().map(|x| b(x)).collect()).unwrap()
    }

    #[test]
    fn single_agent_satisfies_everything_local() {
        let inst = Instance::from_signed_rows(3, &["o1- o2+ o3-"]).unwrap();
        let a = alloc(&[&[1, 2, 3]]);
        for p in [Property::Ef, Property::Ef1, Property::Efx, Property::Mms, Property::Sequencible] {
            assert_eq!(holds_local(&inst, &a, p), Some(true), "{p}");
        }
    }

    #[test]
    fn incomplete_allocation_is_rejected() {
        let inst = Instance::from_signed_rows(2, &["o1- o2-", "o1- o2-"]).unwrap();
        let a = alloc(&[&[1], &[]]);
        assert!(matches!(
            check_ef(&inst, &a),
            Err(crate::Error::IncompleteAllocation { unallocated: 1 })
        ));
    }

    #[test]
    fn efx_g_and_efx_c_diverge() {
        let inst = Instance::from_signed_rows(4, &["o1- o2+ o3+ o4+"; 2]).unwrap();
        let a = alloc(&[&[1, 2], &[3, 4]]);
        assert!(check_efx_c(&inst, &a).unwrap().holds);
        assert!(!check_efx_g(&inst, &a).unwrap().holds);
        assert!(!check_mms(&inst, &a).unwrap().holds);

        let inst = Instance::from_signed_rows(4, &["o1+ o2- o3- o4-"; 2]).unwrap();
        assert!(check_efx_g(&inst, &a).unwrap().holds);
        let r = check_efx_c(&inst, &a).unwrap();
        assert!(!r.holds);
        assert!(r.violations.iter().all(|v| v.reproduces(&inst, &a)));
        assert!(!check_mms(&inst, &a).unwrap().holds);
    }

    #[test]
    fn mms_share_cases() {
        let inst = Instance::from_signed_rows(4, &["o1- o2+ o3+ o4+", "o2+ o1- o3+ o4-"]).unwrap();
        assert_eq!(mms_share(&inst, 1), b(&[3]));
        assert_eq!(mms_share(&inst, 0), b(&[1, 2, 3, 4]));
        let few_goods = Instance::from_signed_rows(3, &["o1+ o2- o3-"; 3]).unwrap();
        assert_eq!(mms_share(&few_goods, 0), Bundle::EMPTY);
        let solo = Instance::from_signed_rows(2, &["o1+ o2-"]).unwrap();
        assert_eq!(mms_share(&solo, 0), b(&[1, 2]));
    }

    #[test]
    fn signature_counts_best_chore_level() {
        let inst = Instance::from_signed_rows(3, &["o1- o2- o3-", "o1- o3- o2-"]).unwrap();
        let a = alloc(&[&[3, 1], &[2]]);
        let sig = signature_of(&inst, &a);
        assert_eq!(sig.chore_counts, vec![2, 0, 1]);
        assert_eq!(sig.good_counts, vec![0, 0, 0]);
    }

    #[test]
    fn sequencible_returns_realizing_sequence() {
        let inst = Instance::from_signed_rows(4, &["o1- o2+ o3+ o4+", "o2+ o1- o3+ o4-"]).unwrap();
        let a = alloc(&[&[1, 2], &[3, 4]]);
        let r = check_sequencible(&inst, &a).unwrap();
        assert!(r.holds);
        let seq = r.sequence.unwrap();
        assert_eq!(crate::model::run_picking_sequence(&inst, &seq).unwrap(), a);
    }

    #[test]
    fn not_sequencible_witness_reproduces() {
        let inst = Instance::from_signed_rows(2, &["o1- o2-", "o2- o1-"]).unwrap();
        let a = alloc(&[&[2], &[1]]);
        assert!(check_sequencible(&inst, &a).unwrap().holds);
        let a = alloc(&[&[1], &[2]]);
        let r = check_sequencible(&inst, &a).unwrap();
        assert!(!r.holds);
        assert!(r.witness().unwrap().reproduces(&inst, &a));
    }

    #[test]
    fn property_names_round_trip() {
        for p in Property::ALL {
            assert_eq!(Property::from_name(p.name()), Some(p));
        }
    }
}
