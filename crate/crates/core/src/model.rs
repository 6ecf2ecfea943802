//! Domain types and the lexicographic comparison of bundles.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard cap on the number of items, set by the `u128` bundle representation.
pub const MAX_ITEMS: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ItemId(pub usize);

impl ItemId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Good,
    Chore,
}

impl Polarity {
    pub fn flipped(self) -> Self {
        match self {
            Polarity::Good => Polarity::Chore,
            Polarity::Chore => Polarity::Good,
        }
    }
}

/// A set of items stored as a bitmask over item indices.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bundle(u128);

impl Bundle {
    pub const EMPTY: Bundle = Bundle(0);

    pub fn from_bits(bits: u128) -> Self {
        Bundle(bits)
    }

    pub fn bits(self) -> u128 {
        self.0
    }

    /// The bundle holding items `0..m`.
    pub fn full(m: usize) -> Self {
        if m >= 128 {
            Bundle(u128::MAX)
        } else {
            Bundle((1u128 << m) - 1)
        }
    }

    pub fn singleton(item: ItemId) -> Self {
        Bundle(1u128 << item.0)
    }

    pub fn contains(self, item: ItemId) -> bool {
        self.0 >> item.0 & 1 == 1
    }

    pub fn insert(&mut self, item: ItemId) {
        self.0 |= 1u128 << item.0;
    }

    pub fn remove(&mut self, item: ItemId) {
        self.0 &= !(1u128 << item.0);
    }

    pub fn with(self, item: ItemId) -> Self {
        Bundle(self.0 | 1u128 << item.0)
    }

    pub fn without(self, item: ItemId) -> Self {
        Bundle(self.0 & !(1u128 << item.0))
    }

    pub fn union(self, other: Bundle) -> Self {
        Bundle(self.0 | other.0)
    }

    pub fn intersect(self, other: Bundle) -> Self {
        Bundle(self.0 & other.0)
    }

    pub fn minus(self, other: Bundle) -> Self {
        Bundle(self.0 & !other.0)
    }

    pub fn is_disjoint(self, other: Bundle) -> bool {
        self.0 & other.0 == 0
    }

    pub fn is_subset(self, other: Bundle) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Items in ascending index order.
    pub fn iter(self) -> impl Iterator<Item = ItemId> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(ItemId(i))
        })
    }
}

impl FromIterator<ItemId> for Bundle {
    fn from_iter<T: IntoIterator<Item = ItemId>>(iter: T) -> Self {
        let mut b = Bundle::EMPTY;
        for it in iter {
            b.insert(it);
        }
        b
    }
}

impl fmt::Debug for Bundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|i| i.0)).finish()
    }
}

impl Serialize for Bundle {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.iter().map(|i| i.0))
    }
}

impl<'de> Deserialize<'de> for Bundle {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let items = Vec::<usize>::deserialize(d)?;
        if let Some(&bad) = items.iter().find(|&&i| i >= MAX_ITEMS) {
            return Err(serde::de::Error::custom(format!("item index {bad} exceeds {MAX_ITEMS}")));
        }
        Ok(items.into_iter().map(ItemId).collect())
    }
}

/// One agent's strict importance ranking of all items, each tagged with the
/// polarity the agent assigns it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImportanceOrdering {
    ranked: Vec<(ItemId, Polarity)>,
    position: Vec<usize>,
    goods: Bundle,
    chores: Bundle,
}

impl ImportanceOrdering {
    /// Builds an ordering over items `0..m`; `ranked[0]` is the most important.
    pub fn new(ranked: Vec<(ItemId, Polarity)>) -> Result<Self> {
        let m = ranked.len();
        if m > MAX_ITEMS {
            return Err(Error::TooManyItems { got: m, max: MAX_ITEMS });
        }
        let mut position = vec![usize::MAX; m];
        let mut goods = Bundle::EMPTY;
        let mut chores = Bundle::EMPTY;
        for (pos, &(item, pol)) in ranked.iter().enumerate() {
            if item.0 >= m {
                return Err(Error::InvalidItem(item.0));
            }
            if position[item.0] != usize::MAX {
                return Err(Error::InvalidInstance(format!(
                    "item {} appears twice in an ordering",
                    item.0
                )));
            }
            position[item.0] = pos;
            match pol {
                Polarity::Good => goods.insert(item),
                Polarity::Chore => chores.insert(item),
            }
        }
        Ok(ImportanceOrdering { ranked, position, goods, chores })
    }

    pub fn len(&self) -> usize {
        self.ranked.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranked.is_empty()
    }

    pub fn ranked(&self) -> &[(ItemId, Polarity)] {
        &self.ranked
    }

    /// 1-based rank of `item`.
    pub fn rank_of(&self, item: ItemId) -> Result<usize> {
        self.position
            .get(item.0)
            .map(|p| p + 1)
            .ok_or(Error::InvalidItem(item.0))
    }

    /// 0-based position; panics on an unknown item.
    pub fn position(&self, item: ItemId) -> usize {
        self.position[item.0]
    }

    /// The k-th (1-based) most important member of `subset`.
    pub fn rank_within(&self, k: usize, subset: Bundle) -> Result<ItemId> {
        if subset.minus(Bundle::full(self.len())) != Bundle::EMPTY {
            let bad = subset.minus(Bundle::full(self.len())).iter().next().unwrap();
            return Err(Error::InvalidItem(bad.0));
        }
        let len = subset.len();
        if k == 0 || k > len {
            return Err(Error::IndexOutOfRange { k, len });
        }
        Ok(self
            .ranked
            .iter()
            .map(|&(it, _)| it)
            .filter(|&it| subset.contains(it))
            .nth(k - 1)
            .expect("k within subset size"))
    }

    /// The item at 1-based rank `k`.
    pub fn at_rank(&self, k: usize) -> Result<(ItemId, Polarity)> {
        if k == 0 || k > self.len() {
            return Err(Error::IndexOutOfRange { k, len: self.len() });
        }
        Ok(self.ranked[k - 1])
    }

    pub fn polarity(&self, item: ItemId) -> Polarity {
        if self.goods.contains(item) {
            Polarity::Good
        } else {
            Polarity::Chore
        }
    }

    pub fn is_good(&self, item: ItemId) -> bool {
        self.goods.contains(item)
    }

    pub fn goods(&self) -> Bundle {
        self.goods
    }

    pub fn chores(&self) -> Bundle {
        self.chores
    }

    /// Most important member of `subset`, if any.
    pub fn top_in(&self, subset: Bundle) -> Option<ItemId> {
        if subset.is_empty() {
            return None;
        }
        self.ranked.iter().map(|&(it, _)| it).find(|&it| subset.contains(it))
    }

    /// Least important member of `subset`, if any.
    pub fn bottom_in(&self, subset: Bundle) -> Option<ItemId> {
        if subset.is_empty() {
            return None;
        }
        self.ranked.iter().rev().map(|&(it, _)| it).find(|&it| subset.contains(it))
    }

    /// Goods from most to least important.
    pub fn goods_desc(&self) -> impl Iterator<Item = ItemId> + '_ {
        self.ranked.iter().filter(|e| e.1 == Polarity::Good).map(|e| e.0)
    }

    /// Chores from best (least important) to worst.
    pub fn chores_best_first(&self) -> impl Iterator<Item = ItemId> + '_ {
        self.ranked.iter().rev().filter(|e| e.1 == Polarity::Chore).map(|e| e.0)
    }

    /// Lexicographic comparison of two bundles from this agent's viewpoint.
    pub fn compare(&self, x: Bundle, y: Bundle) -> Ordering {
        let diff = Bundle(x.0 ^ y.0);
        if diff.is_empty() {
            return Ordering::Equal;
        }
        let top = self.top_in(diff).expect("nonempty difference");
        match (x.contains(top), self.is_good(top)) {
            (true, true) | (false, false) => Ordering::Greater,
            _ => Ordering::Less,
        }
    }

    /// The item this agent takes on a picking turn among `available`.
    pub fn pick(&self, available: Bundle) -> Option<ItemId> {
        self.top_in(available.intersect(self.goods))
            .or_else(|| self.bottom_in(available.intersect(self.chores)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Preference {
    StrictlyPrefers,
    Equal,
    StrictlyDispreferred,
}

impl From<Ordering> for Preference {
    fn from(o: Ordering) -> Self {
        match o {
            Ordering::Greater => Preference::StrictlyPrefers,
            Ordering::Equal => Preference::Equal,
            Ordering::Less => Preference::StrictlyDispreferred,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    labels: Vec<String>,
    orderings: Vec<ImportanceOrdering>,
}

impl Instance {
    pub fn new(labels: Vec<String>, orderings: Vec<ImportanceOrdering>) -> Result<Self> {
        let m = labels.len();
        if m > MAX_ITEMS {
            return Err(Error::TooManyItems { got: m, max: MAX_ITEMS });
        }
        if orderings.is_empty() {
            return Err(Error::InvalidInstance("an instance needs at least one agent".into()));
        }
        for (a, o) in orderings.iter().enumerate() {
            if o.len() != m {
                return Err(Error::InvalidInstance(format!(
                    "ordering of agent {} ranks {} items, expected {m}",
                    a + 1,
                    o.len()
                )));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for l in &labels {
            if l.is_empty() {
                return Err(Error::InvalidInstance("empty item label".into()));
            }
            if !seen.insert(l.as_str()) {
                return Err(Error::InvalidInstance(format!("duplicate item label {l}")));
            }
        }
        Ok(Instance { labels, orderings })
    }

    /// Builds an instance from rows of whitespace-separated `label+` / `label-`
    /// tokens, most important first. Item indices follow `labels`.
    pub fn from_rows(labels: &[&str], rows: &[&str]) -> Result<Self> {
        let labels: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
        let mut orderings = Vec::with_capacity(rows.len());
        for (line, row) in rows.iter().enumerate() {
            let mut ranked = Vec::new();
            for tok in row.split_whitespace() {
                let (name, pol) = match tok.as_bytes().last() {
                    Some(b'+') => (&tok[..tok.len() - 1], Polarity::Good),
                    Some(b'-') => (&tok[..tok.len() - 1], Polarity::Chore),
                    _ => return Err(Error::parse(line + 1, format!("token {tok} lacks +/-"))),
                };
                let idx = labels
                    .iter()
                    .position(|l| l == name)
                    .ok_or_else(|| Error::parse(line + 1, format!("unknown item {name}")))?;
                ranked.push((ItemId(idx), pol));
            }
            orderings.push(ImportanceOrdering::new(ranked)?);
        }
        Instance::new(labels, orderings)
    }

    /// Same as [`Instance::from_rows`] with labels `o1..om`.
    pub fn from_signed_rows(m: usize, rows: &[&str]) -> Result<Self> {
        let labels: Vec<String> = (1..=m).map(|i| format!("o{i}")).collect();
        let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        Instance::from_rows(&refs, rows)
    }

    pub fn n(&self) -> usize {
        self.orderings.len()
    }

    pub fn m(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, item: ItemId) -> &str {
        &self.labels[item.0]
    }

    pub fn item_by_label(&self, label: &str) -> Option<ItemId> {
        self.labels.iter().position(|l| l == label).map(ItemId)
    }

    pub fn items(&self) -> Bundle {
        Bundle::full(self.m())
    }

    pub fn orderings(&self) -> &[ImportanceOrdering] {
        &self.orderings
    }

    pub fn ordering(&self, agent: usize) -> &ImportanceOrdering {
        &self.orderings[agent]
    }

    pub fn check_agent(&self, agent: usize) -> Result<()> {
        if agent < self.n() {
            Ok(())
        } else {
            Err(Error::InvalidAgent { agent, n: self.n() })
        }
    }

    pub fn goods_of(&self, agent: usize) -> Bundle {
        self.orderings[agent].goods()
    }

    pub fn chores_of(&self, agent: usize) -> Bundle {
        self.orderings[agent].chores()
    }

    pub fn is_chores_only(&self) -> bool {
        self.orderings.iter().all(|o| o.goods().is_empty())
    }

    pub fn is_goods_only(&self) -> bool {
        self.orderings.iter().all(|o| o.chores().is_empty())
    }

    /// Every item has the same polarity for all agents.
    pub fn is_objective(&self) -> bool {
        let g = self.orderings[0].goods();
        self.orderings.iter().all(|o| o.goods() == g)
    }

    /// Items that every agent in `agents` perceives as chores.
    pub fn common_chores_among(&self, agents: impl IntoIterator<Item = usize>) -> Bundle {
        agents
            .into_iter()
            .fold(self.items(), |acc, a| acc.intersect(self.orderings[a].chores()))
    }

    pub fn common_chores(&self) -> Bundle {
        self.common_chores_among(0..self.n())
    }

    pub fn compare(&self, agent: usize, x: Bundle, y: Bundle) -> Ordering {
        self.orderings[agent].compare(x, y)
    }

    /// Sub-instance on the given agents and items. Returns the instance plus
    /// maps from new agent/item indices back to the originals.
    pub fn restrict(&self, agents: &[usize], items: Bundle) -> Result<(Instance, Vec<usize>, Vec<ItemId>)> {
        let item_map: Vec<ItemId> = items.iter().collect();
        let mut new_index = vec![usize::MAX; self.m()];
        for (k, it) in item_map.iter().enumerate() {
            new_index[it.0] = k;
        }
        let labels = item_map.iter().map(|&it| self.labels[it.0].clone()).collect();
        let mut orderings = Vec::with_capacity(agents.len());
        for &a in agents {
            self.check_agent(a)?;
            let ranked = self.orderings[a]
                .ranked()
                .iter()
                .filter(|(it, _)| items.contains(*it))
                .map(|&(it, p)| (ItemId(new_index[it.0]), p))
                .collect();
            orderings.push(ImportanceOrdering::new(ranked)?);
        }
        Ok((Instance::new(labels, orderings)?, agents.to_vec(), item_map))
    }
}

/// Lexicographic comparison of `x` and `y` from `agent`'s viewpoint.
pub fn lex_prefers(instance: &Instance, agent: usize, x: Bundle, y: Bundle) -> Preference {
    instance.compare(agent, x, y).into()
}

pub fn rank_of(ordering: &ImportanceOrdering, item: ItemId) -> Result<usize> {
    ordering.rank_of(item)
}

pub fn rank_within(ordering: &ImportanceOrdering, k: usize, subset: Bundle) -> Result<ItemId> {
    ordering.rank_within(k, subset)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Allocation {
    bundles: Vec<Bundle>,
}

impl Allocation {
    pub fn empty(n: usize) -> Self {
        Allocation { bundles: vec![Bundle::EMPTY; n] }
    }

    /// Builds an allocation, rejecting overlapping bundles.
    pub fn from_bundles(bundles: Vec<Bundle>) -> Result<Self> {
        let mut seen = Bundle::EMPTY;
        for (a, b) in bundles.iter().enumerate() {
            if !seen.is_disjoint(*b) {
                return Err(Error::InvalidAllocation(format!(
                    "bundle of agent {} overlaps an earlier bundle",
                    a + 1
                )));
            }
            seen = seen.union(*b);
        }
        Ok(Allocation { bundles })
    }

    /// `owner[k]` is the agent receiving item `k`.
    pub fn from_owners(n: usize, owner: &[usize]) -> Self {
        let mut bundles = vec![Bundle::EMPTY; n];
        for (k, &a) in owner.iter().enumerate() {
            bundles[a].insert(ItemId(k));
        }
        Allocation { bundles }
    }

    pub fn n(&self) -> usize {
        self.bundles.len()
    }

    pub fn bundles(&self) -> &[Bundle] {
        &self.bundles
    }

    pub fn bundle(&self, agent: usize) -> Bundle {
        self.bundles[agent]
    }

    pub fn assign(&mut self, agent: usize, items: Bundle) {
        for b in &mut self.bundles {
            *b = b.minus(items);
        }
        self.bundles[agent] = self.bundles[agent].union(items);
    }

    pub fn allocated(&self) -> Bundle {
        self.bundles.iter().fold(Bundle::EMPTY, |acc, b| acc.union(*b))
    }

    pub fn owner_of(&self, item: ItemId) -> Option<usize> {
        self.bundles.iter().position(|b| b.contains(item))
    }

    pub fn is_complete(&self, instance: &Instance) -> bool {
        self.allocated() == instance.items()
    }

    /// Checks shape against `instance` (agent count, items in range).
    pub fn validate(&self, instance: &Instance) -> Result<()> {
        if self.n() != instance.n() {
            return Err(Error::InvalidAllocation(format!(
                "allocation has {} bundles, instance has {} agents",
                self.n(),
                instance.n()
            )));
        }
        if let Some(it) = self.allocated().minus(instance.items()).iter().next() {
            return Err(Error::InvalidItem(it.0));
        }
        Ok(())
    }

    pub fn require_complete(&self, instance: &Instance) -> Result<()> {
        self.validate(instance)?;
        let missing = instance.items().minus(self.allocated()).len();
        if missing > 0 {
            return Err(Error::IncompleteAllocation { unallocated: missing });
        }
        Ok(())
    }
}

/// Rank-maximality score: per level k, how many agents hold their k-th best
/// good, then how many hold their k-th best chore. The derived order compares
/// `good_counts` first, which is the lexicographic order on the concatenation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Signature {
    pub good_counts: Vec<u32>,
    pub chore_counts: Vec<u32>,
}

impl Signature {
    pub fn zero(m: usize) -> Self {
        Signature { good_counts: vec![0; m], chore_counts: vec![0; m] }
    }

    pub fn concat(&self) -> Vec<u32> {
        self.good_counts.iter().chain(&self.chore_counts).copied().collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PickingSequence {
    pub turns: Vec<usize>,
}

impl PickingSequence {
    pub fn new(turns: Vec<usize>) -> Self {
        PickingSequence { turns }
    }

    /// Parses a 1-indexed, comma-separated agent list such as `1,2,2,1`.
    pub fn parse_one_indexed(text: &str) -> Result<Self> {
        let mut turns = Vec::new();
        for tok in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let v: usize = tok
                .parse()
                .map_err(|_| Error::parse(1, format!("bad agent number {tok}")))?;
            if v == 0 {
                return Err(Error::parse(1, "agents are numbered from 1"));
            }
            turns.push(v - 1);
        }
        Ok(PickingSequence { turns })
    }
}

/// Runs the picking sequence: each named agent takes its most important
/// remaining good, or failing that its least important remaining chore.
pub fn run_picking_sequence(instance: &Instance, seq: &PickingSequence) -> Result<Allocation> {
    if seq.turns.len() > instance.m() {
        return Err(Error::InvalidInstance(format!(
            "picking sequence has {} turns for {} items",
            seq.turns.len(),
            instance.m()
        )));
    }
    let mut alloc = Allocation::empty(instance.n());
    let mut available = instance.items();
    for &agent in &seq.turns {
        instance.check_agent(agent)?;
        let item = instance.ordering(agent).pick(available).expect("turns never exceed items");
        available.remove(item);
        alloc.bundles[agent].insert(item);
    }
    Ok(alloc)
}
