//! Gadget instances for the hardness reductions, with witness translation in
//! both directions.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::checkers::{self, Property};
use crate::error::{Error, Result};
use crate::model::{Allocation, ImportanceOrdering, Instance, ItemId, Polarity};
use crate::oracle::SearchBudget;

/// A CNF formula; literal `v` is variable `v` (1-based), `-v` its negation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CnfFormula {
    pub vars: usize,
    pub clauses: Vec<Vec<i32>>,
}

impl CnfFormula {
    pub fn new(vars: usize, clauses: Vec<Vec<i32>>) -> Result<Self> {
        let f = CnfFormula { vars, clauses };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        for (j, c) in self.clauses.iter().enumerate() {
            if c.is_empty() {
                return Err(Error::InvalidFormula(format!("clause {} is empty", j + 1)));
            }
            for &l in c {
                if l == 0 || l.unsigned_abs() as usize > self.vars {
                    return Err(Error::InvalidFormula(format!(
                        "literal {l} in clause {} is out of range",
                        j + 1
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        assignment.len() == self.vars
            && self.clauses.iter().all(|c| c.iter().any(|&l| literal_true(l, assignment)))
    }

    /// Naive search over all 2^vars assignments.
    pub fn solve(&self) -> Option<Vec<bool>> {
        assert!(self.vars < 30, "brute-force solver limited to small formulas");
        (0u64..1 << self.vars)
            .map(|bits| (0..self.vars).map(|i| bits >> i & 1 == 1).collect::<Vec<_>>())
            .find(|a| self.satisfied_by(a))
    }

    /// Every clause has three literals and every variable occurs twice
    /// positively and twice negatively, in four distinct clauses.
    pub fn check_223(&self) -> Result<()> {
        self.validate()?;
        let mut pos = vec![Vec::new(); self.vars];
        let mut neg = vec![Vec::new(); self.vars];
        for (j, c) in self.clauses.iter().enumerate() {
            if c.len() != 3 {
                return Err(Error::Not223Formula(format!("clause {} has {} literals", j + 1, c.len())));
            }
            for &l in c {
                let v = l.unsigned_abs() as usize - 1;
                if l > 0 { pos[v].push(j) } else { neg[v].push(j) }
            }
        }
        for v in 0..self.vars {
            if pos[v].len() != 2 || neg[v].len() != 2 {
                return Err(Error::Not223Formula(format!(
                    "variable {} occurs {} times positively and {} times negatively",
                    v + 1,
                    pos[v].len(),
                    neg[v].len()
                )));
            }
            let mut all = [pos[v][0], pos[v][1], neg[v][0], neg[v][1]];
            all.sort_unstable();
            if all.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Not223Formula(format!("variable {} repeats within a clause", v + 1)));
            }
        }
        Ok(())
    }

    /// 0-based clause indices holding the literal, ascending.
    fn clauses_with(&self, literal: i32) -> Vec<usize> {
        (0..self.clauses.len()).filter(|&j| self.clauses[j].contains(&literal)).collect()
    }
}

fn literal_true(l: i32, assignment: &[bool]) -> bool {
    assignment[l.unsigned_abs() as usize - 1] == (l > 0)
}

/// A hypergraph on vertices `1..=vertices`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypergraph {
    pub vertices: usize,
    pub edges: Vec<Vec<usize>>,
}

impl Hypergraph {
    pub fn new(vertices: usize, edges: Vec<Vec<usize>>) -> Result<Self> {
        let h = Hypergraph { vertices, edges };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<()> {
        if self.vertices == 0 {
            return Err(Error::InvalidHypergraph("no vertices".into()));
        }
        for (i, e) in self.edges.iter().enumerate() {
            if e.is_empty() {
                return Err(Error::InvalidHypergraph(format!("edge {} is empty", i + 1)));
            }
            let mut seen = vec![false; self.vertices + 1];
            for &v in e {
                if v == 0 || v > self.vertices {
                    return Err(Error::InvalidHypergraph(format!("vertex {v} in edge {} out of range", i + 1)));
                }
                if std::mem::replace(&mut seen[v], true) {
                    return Err(Error::InvalidHypergraph(format!("vertex {v} repeated in edge {}", i + 1)));
                }
            }
        }
        Ok(())
    }

    pub fn max_edge_size(&self) -> usize {
        self.edges.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Colors are 0, 1, 2; every edge must see all three.
    pub fn is_rainbow(&self, coloring: &[u8]) -> bool {
        coloring.len() == self.vertices
            && coloring.iter().all(|&c| c < 3)
            && self.edges.iter().all(|e| {
                let mut seen = [false; 3];
                e.iter().for_each(|&v| seen[coloring[v - 1] as usize] = true);
                seen.iter().all(|&s| s)
            })
    }

    /// Naive search over all 3^vertices colorings.
    pub fn rainbow_coloring(&self) -> Option<Vec<u8>> {
        assert!(self.vertices < 20, "brute-force coloring limited to small hypergraphs");
        let total = 3u64.pow(self.vertices as u32);
        (0..total)
            .map(|mut code| {
                (0..self.vertices)
                    .map(|_| {
                        let c = (code % 3) as u8;
                        code /= 3;
                        c
                    })
                    .collect::<Vec<_>>()
            })
            .find(|c| self.is_rainbow(c))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReductionKind {
    SatEf,
    RainbowEfRm,
    Sat223EfxRm,
    RainbowEf1Rm,
}

impl ReductionKind {
    pub const ALL: [ReductionKind; 4] =
        [ReductionKind::SatEf, ReductionKind::RainbowEfRm, ReductionKind::Sat223EfxRm, ReductionKind::RainbowEf1Rm];

    pub fn name(self) -> &'static str {
        match self {
            ReductionKind::SatEf => "sat-ef",
            ReductionKind::RainbowEfRm => "rainbow-ef-rm",
            ReductionKind::Sat223EfxRm => "sat223-efx-rm",
            ReductionKind::RainbowEf1Rm => "rainbow-ef1-rm",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        ReductionKind::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Properties an allocation of the reduced instance must have.
    pub fn target(self) -> &'static [Property] {
        match self {
            ReductionKind::SatEf => &[Property::Ef],
            ReductionKind::RainbowEfRm => &[Property::Ef, Property::Rm],
            ReductionKind::Sat223EfxRm => &[Property::Efx, Property::Rm],
            ReductionKind::RainbowEf1Rm => &[Property::Ef1, Property::Rm],
        }
    }
}

impl fmt::Display for ReductionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Source {
    Cnf(CnfFormula),
    Hypergraph(Hypergraph),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", content = "values", rename_all = "lowercase")]
pub enum SourceWitness {
    Assignment(Vec<bool>),
    Coloring(Vec<u8>),
}

/// A reduced instance together with what is needed to translate witnesses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionOutput {
    pub kind: ReductionKind,
    pub source: Source,
    pub instance: Instance,
}

/// Ordering builder where every item is a chore.
struct Rows {
    labels: Vec<String>,
    orderings: Vec<ImportanceOrdering>,
}

impl Rows {
    fn new(labels: Vec<String>) -> Self {
        Rows { labels, orderings: Vec::new() }
    }

    fn push(&mut self, ranked: Vec<usize>) -> Result<()> {
        debug_assert_eq!(ranked.len(), self.labels.len());
        let ord = ImportanceOrdering::new(ranked.into_iter().map(|i| (ItemId(i), Polarity::Chore)).collect())?;
        self.orderings.push(ord);
        Ok(())
    }

    fn build(self) -> Result<Instance> {
        Instance::new(self.labels, self.orderings)
    }
}

/// All items not in `named`, ascending, followed by `named` in order.
fn others_then(m: usize, named: &[usize]) -> Vec<usize> {
    let mut v: Vec<usize> = (0..m).filter(|i| !named.contains(i)).collect();
    v.extend_from_slice(named);
    v
}

struct SatEfLayout {
    s: usize,
}

impl SatEfLayout {
    fn clause(&self, j: usize) -> usize {
        j
    }
    /// `which`: 0 = x, 1 = 1, 2 = 0, 3 = 1*, 4 = 0*.
    fn var(&self, i: usize, which: usize) -> usize {
        self.s + 5 * i + which
    }
}

pub fn sat_to_ef_chores(f: &CnfFormula) -> Result<ReductionOutput> {
    f.validate()?;
    let (t, s) = (f.vars, f.clauses.len());
    let lay = SatEfLayout { s };
    let m = s + 5 * t;
    let mut labels: Vec<String> = (1..=s).map(|j| format!("C{j}")).collect();
    for i in 1..=t {
        labels.extend([format!("x{i}"), format!("1_{i}"), format!("0_{i}"), format!("1*_{i}"), format!("0*_{i}")]);
    }
    let mut rows = Rows::new(labels);
    for i in 0..t {
        let (x, one, zero, one_s, zero_s) =
            (lay.var(i, 0), lay.var(i, 1), lay.var(i, 2), lay.var(i, 3), lay.var(i, 4));
        let lit = i as i32 + 1;
        let plus: Vec<usize> = f.clauses_with(lit).into_iter().map(|j| lay.clause(j)).collect();
        let minus: Vec<usize> = f.clauses_with(-lit).into_iter().map(|j| lay.clause(j)).collect();
        rows.push(others_then(m, &[zero, x, one]))?;
        rows.push(others_then(m, &[one, x, zero]))?;
        let mut star = vec![x];
        star.extend(&plus);
        star.extend([one, one_s]);
        rows.push(others_then(m, &star))?;
        let mut nstar = vec![x];
        nstar.extend(&minus);
        nstar.extend([zero, zero_s]);
        rows.push(others_then(m, &nstar))?;
    }
    Ok(ReductionOutput { kind: ReductionKind::SatEf, source: Source::Cnf(f.clone()), instance: rows.build()? })
}

struct RainbowLayout {
    q: usize,
    r: usize,
    /// Type I signature chores per edge.
    width: usize,
    /// Whether Type II signature chores exist.
    primes: bool,
}

impl RainbowLayout {
    fn sig(&self, i: usize, k: usize) -> usize {
        i * self.width + k
    }
    fn sig_prime(&self, i: usize) -> usize {
        debug_assert!(self.primes);
        self.r * self.width + i
    }
    fn edge(&self, i: usize) -> usize {
        self.r * self.width + if self.primes { self.r } else { 0 } + i
    }
    fn vertex(&self, v: usize) -> usize {
        self.edge(self.r) + v
    }
    fn dummy(&self, l: usize) -> usize {
        self.vertex(self.q) + l
    }
    fn m(&self) -> usize {
        self.dummy(3)
    }
    fn labels(&self) -> Vec<String> {
        let mut labels = Vec::with_capacity(self.m());
        for i in 1..=self.r {
            labels.extend((1..=self.width).map(|k| format!("S{i}^{k}")));
        }
        if self.primes {
            labels.extend((1..=self.r).map(|i| format!("S'{i}")));
        }
        labels.extend((1..=self.r).map(|i| format!("E{i}")));
        labels.extend((1..=self.q).map(|v| format!("V{v}")));
        labels.extend((1..=3).map(|l| format!("D{l}")));
        labels
    }
    fn sig_block(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.width).map(move |k| self.sig(i, k))
    }
    /// Vertex chores in the fixed order V_q, ..., V_1.
    fn vertices_desc<'a>(&'a self, keep: impl Fn(usize) -> bool + 'a) -> impl Iterator<Item = usize> + 'a {
        (0..self.q).rev().filter(move |&v| keep(v)).map(|v| self.vertex(v))
    }
}

fn rainbow_layout(h: &Hypergraph, kind: ReductionKind) -> RainbowLayout {
    match kind {
        ReductionKind::RainbowEfRm => RainbowLayout { q: h.vertices, r: h.edges.len(), width: h.vertices, primes: false },
        _ => RainbowLayout { q: h.vertices, r: h.edges.len(), width: h.max_edge_size(), primes: true },
    }
}

pub fn rainbow_to_ef_rm(h: &Hypergraph) -> Result<ReductionOutput> {
    h.validate()?;
    let lay = rainbow_layout(h, ReductionKind::RainbowEfRm);
    let r = lay.r;
    let mut rows = Rows::new(lay.labels());
    for i in 0..r {
        let in_edge = |v: usize| h.edges[i].contains(&(v + 1));
        let mut o: Vec<usize> = lay.vertices_desc(in_edge).collect();
        o.extend((0..r).filter(|&e| e != i).map(|e| lay.edge(e)));
        o.push(lay.edge(i));
        o.extend((0..3).map(|l| lay.dummy(l)));
        o.extend((0..r).filter(|&e| e != i).flat_map(|e| lay.sig_block(e)));
        o.extend(lay.vertices_desc(|v| !in_edge(v)));
        o.extend(lay.sig_block(i));
        rows.push(o)?;
    }
    for l in 0..3 {
        let mut o: Vec<usize> = (0..r).rev().map(|e| lay.edge(e)).collect();
        o.extend((0..r).rev().flat_map(|e| lay.sig_block(e)));
        o.extend((0..3).filter(|&d| d != l).map(|d| lay.dummy(d)));
        o.push(lay.dummy(l));
        o.extend(lay.vertices_desc(|_| true));
        rows.push(o)?;
    }
    Ok(ReductionOutput { kind: ReductionKind::RainbowEfRm, source: Source::Hypergraph(h.clone()), instance: rows.build()? })
}

pub fn rainbow_to_ef1_rm(h: &Hypergraph) -> Result<ReductionOutput> {
    h.validate()?;
    let lay = rainbow_layout(h, ReductionKind::RainbowEf1Rm);
    let r = lay.r;
    let mut rows = Rows::new(lay.labels());
    for i in 0..r {
        let in_edge = |v: usize| h.edges[i].contains(&(v + 1));
        let mut o: Vec<usize> = (0..r).filter(|&e| e != i).map(|e| lay.sig_prime(e)).collect();
        o.extend((0..r).filter(|&e| e != i).flat_map(|e| lay.sig_block(e)));
        o.extend((0..r).filter(|&e| e != i).map(|e| lay.edge(e)));
        o.push(lay.edge(i));
        o.extend(lay.vertices_desc(in_edge));
        o.push(lay.sig_prime(i));
        o.extend(lay.vertices_desc(|v| !in_edge(v)));
        o.extend((0..3).map(|l| lay.dummy(l)));
        o.extend(lay.sig_block(i));
        rows.push(o)?;
    }
    for l in 0..3 {
        let mut o: Vec<usize> = (0..r).rev().map(|e| lay.edge(e)).collect();
        o.extend((0..r).rev().map(|e| lay.sig_prime(e)));
        o.extend((0..r).rev().flat_map(|e| lay.sig_block(e)));
        o.extend((0..3).filter(|&d| d != l).map(|d| lay.dummy(d)));
        o.extend(lay.vertices_desc(|_| true));
        o.push(lay.dummy(l));
        rows.push(o)?;
    }
    Ok(ReductionOutput { kind: ReductionKind::RainbowEf1Rm, source: Source::Hypergraph(h.clone()), instance: rows.build()? })
}

struct Sat223Layout {
    r: usize,
    s: usize,
}

impl Sat223Layout {
    fn sig(&self, i: usize) -> usize {
        2 * i
    }
    fn sig_bar(&self, i: usize) -> usize {
        2 * i + 1
    }
    fn clause(&self, j: usize) -> usize {
        2 * self.r + j
    }
    fn dummy(&self, l: usize) -> usize {
        2 * self.r + self.s + 2 * l
    }
    fn dummy_bar(&self, l: usize) -> usize {
        2 * self.r + self.s + 2 * l + 1
    }
    fn top(&self, i: usize) -> usize {
        2 * self.r + 3 * self.s + i
    }
    fn lit_agent(&self, i: usize, positive: bool) -> usize {
        2 * i + usize::from(!positive)
    }
    fn dummy_agent(&self, l: usize) -> usize {
        2 * self.r + l
    }
    /// The reference order.
    fn reference(&self) -> Vec<usize> {
        let mut v: Vec<usize> = (0..self.s).rev().map(|l| self.dummy_bar(l)).collect();
        v.extend((0..self.s).rev().map(|j| self.clause(j)));
        v.extend((0..self.r).rev().map(|i| self.top(i)));
        for i in (0..self.r).rev() {
            v.extend([self.sig_bar(i), self.sig(i)]);
        }
        v.extend((0..self.s).rev().map(|l| self.dummy(l)));
        v
    }
}

pub fn sat223_to_efx_rm(f: &CnfFormula) -> Result<ReductionOutput> {
    f.check_223()?;
    let lay = Sat223Layout { r: f.vars, s: f.clauses.len() };
    let (r, s) = (lay.r, lay.s);
    let mut labels: Vec<String> = Vec::with_capacity(3 * r + 3 * s);
    for i in 1..=r {
        labels.extend([format!("S{i}"), format!("~S{i}")]);
    }
    labels.extend((1..=s).map(|j| format!("C{j}")));
    for l in 1..=s {
        labels.extend([format!("D{l}"), format!("~D{l}")]);
    }
    labels.extend((1..=r).map(|i| format!("T{i}")));
    let reference = lay.reference();
    let mut rows = Rows::new(labels);
    for i in 0..r {
        for positive in [true, false] {
            let lit = if positive { i as i32 + 1 } else { -(i as i32 + 1) };
            let cl = f.clauses_with(lit);
            let (j, k) = (cl[0], cl[1]);
            let named = [lay.sig_bar(i), lay.sig(i), lay.clause(j), lay.clause(k), lay.top(i)];
            let mut pool = reference.iter().copied().filter(|x| !named.contains(x));
            // Clause chore j (1-based) lands at rank m - j.
            let f1: Vec<usize> = pool.by_ref().take(s - 1 - k).collect();
            let f2: Vec<usize> = pool.by_ref().take(k - j - 1).collect();
            let f3: Vec<usize> = pool.by_ref().take(j).collect();
            let mut o: Vec<usize> = pool.collect();
            o.extend([lay.sig_bar(i), lay.sig(i)]);
            o.extend(f1);
            o.push(lay.clause(k));
            o.extend(f2);
            o.push(lay.clause(j));
            o.extend(f3);
            o.push(lay.top(i));
            rows.push(o)?;
        }
    }
    for l in 0..s {
        let named = [lay.dummy_bar(l), lay.dummy(l)];
        let mut o: Vec<usize> = reference.iter().copied().filter(|x| !named.contains(x)).collect();
        o.extend(named);
        rows.push(o)?;
    }
    debug_assert!((0..r).all(|i| lay.lit_agent(i, true) == 2 * i));
    Ok(ReductionOutput { kind: ReductionKind::Sat223EfxRm, source: Source::Cnf(f.clone()), instance: rows.build()? })
}

pub fn reduce(kind: ReductionKind, source: &Source) -> Result<ReductionOutput> {
    match (kind, source) {
        (ReductionKind::SatEf, Source::Cnf(f)) => sat_to_ef_chores(f),
        (ReductionKind::Sat223EfxRm, Source::Cnf(f)) => sat223_to_efx_rm(f),
        (ReductionKind::RainbowEfRm, Source::Hypergraph(h)) => rainbow_to_ef_rm(h),
        (ReductionKind::RainbowEf1Rm, Source::Hypergraph(h)) => rainbow_to_ef1_rm(h),
        (ReductionKind::SatEf | ReductionKind::Sat223EfxRm, _) => {
            Err(Error::InvalidFormula(format!("{kind} expects a CNF formula")))
        }
        _ => Err(Error::InvalidHypergraph(format!("{kind} expects a hypergraph"))),
    }
}

fn owner_or_err(alloc: &Allocation, item: usize) -> Result<usize> {
    alloc
        .owner_of(ItemId(item))
        .ok_or_else(|| Error::InvalidWitness(format!("item {} unallocated", item + 1)))
}

impl ReductionOutput {
    pub fn formula(&self) -> Option<&CnfFormula> {
        match &self.source {
            Source::Cnf(f) => Some(f),
            Source::Hypergraph(_) => None,
        }
    }

    pub fn hypergraph(&self) -> Option<&Hypergraph> {
        match &self.source {
            Source::Hypergraph(h) => Some(h),
            Source::Cnf(_) => None,
        }
    }

    /// Whether the source witness solves the source problem.
    pub fn source_accepts(&self, w: &SourceWitness) -> bool {
        match (&self.source, w) {
            (Source::Cnf(f), SourceWitness::Assignment(a)) => f.satisfied_by(a),
            (Source::Hypergraph(h), SourceWitness::Coloring(c)) => h.is_rainbow(c),
            _ => false,
        }
    }

    /// Naive source solver.
    pub fn solve_source(&self) -> Option<SourceWitness> {
        match &self.source {
            Source::Cnf(f) => f.solve().map(SourceWitness::Assignment),
            Source::Hypergraph(h) => h.rainbow_coloring().map(SourceWitness::Coloring),
        }
    }

    /// The allocation the forward direction of the construction builds from
    /// a source solution.
    pub fn forward_hint(&self, w: &SourceWitness) -> Result<Allocation> {
        if !self.source_accepts(w) {
            return Err(Error::InvalidWitness("source witness does not solve the source instance".into()));
        }
        let n = self.instance.n();
        let mut owner = vec![usize::MAX; self.instance.m()];
        match (&self.source, w) {
            (Source::Cnf(f), SourceWitness::Assignment(y)) if self.kind == ReductionKind::SatEf => {
                let lay = SatEfLayout { s: f.clauses.len() };
                for (i, &yi) in y.iter().enumerate() {
                    let (x_agent, nx_agent, xs_agent, nxs_agent) = (4 * i, 4 * i + 1, 4 * i + 2, 4 * i + 3);
                    owner[lay.var(i, 1)] = x_agent;
                    owner[lay.var(i, 2)] = nx_agent;
                    owner[lay.var(i, 0)] = if yi { x_agent } else { nx_agent };
                    owner[lay.var(i, 3)] = xs_agent;
                    owner[lay.var(i, 4)] = nxs_agent;
                }
                for (j, c) in f.clauses.iter().enumerate() {
                    let (i, positive) = satisfying_literal(c, y);
                    owner[lay.clause(j)] = 4 * i + if positive { 2 } else { 3 };
                }
            }
            (Source::Cnf(f), SourceWitness::Assignment(y)) => {
                let lay = Sat223Layout { r: f.vars, s: f.clauses.len() };
                for (i, &yi) in y.iter().enumerate() {
                    let (win, lose) = (lay.lit_agent(i, yi), lay.lit_agent(i, !yi));
                    owner[lay.top(i)] = win;
                    owner[lay.sig(i)] = win;
                    owner[lay.sig_bar(i)] = lose;
                }
                for l in 0..lay.s {
                    owner[lay.dummy(l)] = lay.dummy_agent(l);
                    owner[lay.dummy_bar(l)] = lay.dummy_agent(l);
                }
                for (j, c) in f.clauses.iter().enumerate() {
                    let (i, positive) = satisfying_literal(c, y);
                    owner[lay.clause(j)] = lay.lit_agent(i, positive);
                }
            }
            (Source::Hypergraph(h), SourceWitness::Coloring(col)) => {
                let lay = rainbow_layout(h, self.kind);
                for i in 0..lay.r {
                    for k in 0..lay.width {
                        owner[lay.sig(i, k)] = i;
                    }
                    if lay.primes {
                        owner[lay.sig_prime(i)] = i;
                    }
                    owner[lay.edge(i)] = i;
                }
                for l in 0..3 {
                    owner[lay.dummy(l)] = lay.r + l;
                }
                for (v, &c) in col.iter().enumerate() {
                    owner[lay.vertex(v)] = lay.r + c as usize;
                }
            }
            _ => unreachable!("source_accepts matched the witness type"),
        }
        debug_assert!(owner.iter().all(|&a| a < n));
        Ok(Allocation::from_owners(n, &owner))
    }

    /// Recovers a source solution from an allocation of the reduced instance
    /// that has the target properties.
    pub fn extract_witness(&self, alloc: &Allocation, budget: &SearchBudget) -> Result<SourceWitness> {
        alloc.require_complete(&self.instance)?;
        let inst = &self.instance;
        let fails = |p: Property| -> Result<bool> {
            Ok(!checkers::check_property(inst, alloc, p, budget)?.holds)
        };
        let witness = match &self.source {
            Source::Cnf(f) if self.kind == ReductionKind::SatEf => {
                if fails(Property::Ef)? {
                    return Err(Error::InvalidWitness("allocation is not envy-free".into()));
                }
                let lay = SatEfLayout { s: f.clauses.len() };
                let y = (0..f.vars).map(|i| owner_or_err(alloc, lay.var(i, 0)).map(|a| a == 4 * i)).collect::<Result<Vec<_>>>()?;
                SourceWitness::Assignment(y)
            }
            Source::Cnf(f) => {
                if fails(Property::Efx)? {
                    return Err(Error::InvalidWitness("allocation is not EFX".into()));
                }
                if fails(Property::Rm)? {
                    return Err(Error::InvalidWitness("allocation is not rank-maximal".into()));
                }
                let lay = Sat223Layout { r: f.vars, s: f.clauses.len() };
                let y = (0..f.vars)
                    .map(|i| owner_or_err(alloc, lay.sig_bar(i)).map(|a| a != lay.lit_agent(i, true)))
                    .collect::<Result<Vec<_>>>()?;
                SourceWitness::Assignment(y)
            }
            Source::Hypergraph(h) => {
                let fairness = if self.kind == ReductionKind::RainbowEfRm { Property::Ef } else { Property::Ef1 };
                if fails(fairness)? {
                    return Err(Error::InvalidWitness(format!("allocation is not {fairness}")));
                }
                if fails(Property::Rm)? {
                    return Err(Error::InvalidWitness("allocation is not rank-maximal".into()));
                }
                let lay = rainbow_layout(h, self.kind);
                let col = (0..h.vertices)
                    .map(|v| {
                        let a = owner_or_err(alloc, lay.vertex(v))?;
                        a.checked_sub(lay.r)
                            .map(|c| c as u8)
                            .ok_or_else(|| Error::InvalidWitness(format!("vertex chore V{} held by an edge agent", v + 1)))
                    })
                    .collect::<Result<Vec<_>>>()?;
                SourceWitness::Coloring(col)
            }
        };
        if !self.source_accepts(&witness) {
            return Err(Error::InvalidWitness("extracted witness does not solve the source instance".into()));
        }
        Ok(witness)
    }
}

/// Variable index and sign of the first true literal in `clause`.
fn satisfying_literal(clause: &[i32], y: &[bool]) -> (usize, bool) {
    let l = *clause.iter().find(|&&l| literal_true(l, y)).expect("assignment satisfies the clause");
    (l.unsigned_abs() as usize - 1, l > 0)
}
