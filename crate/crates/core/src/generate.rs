//! Seeded random instances for each instance class.

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ImportanceOrdering, Instance, ItemId, Polarity, MAX_ITEMS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceKind {
    Goods,
    Chores,
    /// Each item has the same polarity for everyone.
    Objective,
    Subjective,
    /// Every item is a good for at least one agent.
    NoCommonChore,
    /// Some agent's most important item is a good.
    TopGood,
}

impl InstanceKind {
    pub const ALL: [InstanceKind; 6] = [
        InstanceKind::Goods,
        InstanceKind::Chores,
        InstanceKind::Objective,
        InstanceKind::Subjective,
        InstanceKind::NoCommonChore,
        InstanceKind::TopGood,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InstanceKind::Goods => "goods",
            InstanceKind::Chores => "chores",
            InstanceKind::Objective => "objective",
            InstanceKind::Subjective => "subjective",
            InstanceKind::NoCommonChore => "no_common_chore",
            InstanceKind::TopGood => "top_good",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        InstanceKind::ALL.into_iter().find(|k| k.name() == s)
    }

    /// The defining predicate of the class.
    pub fn admits(self, inst: &Instance) -> bool {
        match self {
            InstanceKind::Goods => inst.is_goods_only(),
            InstanceKind::Chores => inst.is_chores_only(),
            InstanceKind::Objective => inst.is_objective(),
            InstanceKind::Subjective => true,
            InstanceKind::NoCommonChore => inst.common_chores().is_empty(),
            InstanceKind::TopGood => inst.orderings().iter().any(|o| o.ranked().first().is_some_and(|&(_, p)| p == Polarity::Good)),
        }
    }
}

impl fmt::Display for InstanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub n: usize,
    pub m: usize,
    pub kind: InstanceKind,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(kind: InstanceKind, n: usize, m: usize, seed: u64) -> Self {
        GeneratorSpec { n, m, kind, seed }
    }

    fn check(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidInstance("at least one agent is required".into()));
        }
        if self.m > MAX_ITEMS {
            return Err(Error::TooManyItems { got: self.m, max: MAX_ITEMS });
        }
        if self.kind == InstanceKind::TopGood && self.m == 0 {
            return Err(Error::InvalidInstance("top_good needs at least one item".into()));
        }
        Ok(())
    }
}

/// Draws an instance of the requested class. Output depends only on the spec.
pub fn generate(spec: &GeneratorSpec) -> Result<Instance> {
    spec.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    generate_with(spec.kind, spec.n, spec.m, &mut rng)
}

/// Same as [`generate`], drawing from a caller-provided generator.
pub fn generate_with<R: Rng + ?Sized>(kind: InstanceKind, n: usize, m: usize, rng: &mut R) -> Result<Instance> {
    GeneratorSpec::new(kind, n, m, 0).check()?;
    let objective: Vec<Polarity> = (0..m).map(|_| coin(rng)).collect();
    let mut pol: Vec<Vec<Polarity>> = (0..n)
        .map(|_| {
            (0..m)
                .map(|k| match kind {
                    InstanceKind::Goods => Polarity::Good,
                    InstanceKind::Chores => Polarity::Chore,
                    InstanceKind::Objective => objective[k],
                    _ => coin(rng),
                })
                .collect()
        })
        .collect();
    let perms: Vec<Vec<usize>> = (0..n)
        .map(|_| {
            let mut p: Vec<usize> = (0..m).collect();
            p.shuffle(rng);
            p
        })
        .collect();
    match kind {
        InstanceKind::NoCommonChore => {
            for k in 0..m {
                if pol.iter().all(|row| row[k] == Polarity::Chore) {
                    pol[rng.gen_range(0..n)][k] = Polarity::Good;
                }
            }
        }
        InstanceKind::TopGood => {
            let a = rng.gen_range(0..n);
            pol[a][perms[a][0]] = Polarity::Good;
        }
        _ => {}
    }
    let labels = (1..=m).map(|k| format!("o{k}")).collect();
    let orderings = perms
        .iter()
        .zip(&pol)
        .map(|(perm, row)| ImportanceOrdering::new(perm.iter().map(|&k| (ItemId(k), row[k])).collect()))
        .collect::<Result<Vec<_>>>()?;
    let inst = Instance::new(labels, orderings)?;
    debug_assert!(kind.admits(&inst));
    Ok(inst)
}

fn coin<R: Rng + ?Sized>(rng: &mut R) -> Polarity {
    if rng.gen_bool(0.5) { Polarity::Good } else { Polarity::Chore }
}
