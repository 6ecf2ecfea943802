//! Regression matrix over the bundled fixtures.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::algorithms;
use crate::checkers::{self, Property, Removal, Side, Violation};
use crate::error::Error;
use crate::fixtures::FixtureSet;
use crate::model::{run_picking_sequence, Allocation, Bundle, Instance, PickingSequence};
use crate::oracle::{self, SearchBudget};
use crate::reductions::{self, Hypergraph, ReductionOutput};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub millis: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| !c.passed)
    }
}

type Check = fn(&FixtureSet, &SearchBudget) -> Result<String, String>;

const CHECKS: &[(&str, Check)] = &[
    ("example1", example1),
    ("prop2", prop2),
    ("thm4-efx", thm4_efx),
    ("thm4-efx-c", thm4_efx_c),
    ("thm4-mms-mixed", thm4_mms_mixed),
    ("mms-characterization", mms_characterization),
    ("mmsrm-noexist", mmsrm_noexist),
    ("chores5-efx-po-chores", chores5_alg3),
    ("drr-efx-failure", drr),
    ("reduction-sat-ef", reduction_sat_ef),
    ("reduction-rainbow-ef-rm", reduction_rainbow_ef_rm),
    ("reduction-rainbow-ef1-rm", reduction_rainbow_ef1_rm),
    ("reduction-sat223-efx-rm", reduction_sat223),
];

pub fn check_names() -> impl Iterator<Item = &'static str> {
    CHECKS.iter().map(|(n, _)| *n)
}

pub fn run_matrix(set: &FixtureSet, budget: &SearchBudget) -> VerifyReport {
    let checks = CHECKS
        .iter()
        .map(|(name, f)| {
            let start = Instant::now();
            let result = f(set, budget);
            let millis = start.elapsed().as_secs_f64() * 1e3;
            let (passed, detail) = match result {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            CheckOutcome { name: name.to_string(), passed, detail, millis }
        })
        .collect();
    VerifyReport { checks }
}

fn e(err: Error) -> String {
    err.to_string()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond { Ok(()) } else { Err(msg()) }
}

fn bundles(inst: &Instance, groups: &[&[&str]]) -> Result<Allocation, String> {
    let bs = groups
        .iter()
        .map(|g| {
            g.iter()
                .map(|l| inst.item_by_label(l).ok_or_else(|| format!("fixture lacks item {l}")))
                .collect::<Result<Bundle, String>>()
        })
        .collect::<Result<Vec<_>, String>>()?;
    Allocation::from_bundles(bs).map_err(e)
}

fn example1(set: &FixtureSet, budget: &SearchBudget) -> Result<String, String> {
    let inst = set.instance("example1").map_err(e)?;
    let expected = set.allocation("seq1221", &inst).map_err(e)?;
    let seq = PickingSequence::parse_one_indexed("1,2,2,1").map_err(e)?;
    let got = run_picking_sequence(&inst, &seq).map_err(e)?;
    ensure(got == expected, || format!("sequence 1,2,2,1 gave {got:?}"))?;
    let efx = checkers::check_efx(&inst, &got).map_err(e)?;
    let o4 = inst.item_by_label("o4").ok_or("fixture lacks o4")?;
    let named = efx.violations.iter().any(|v| {
        matches!(v, Violation::Envy { envious: 1, removal: Some(Removal { item, side: Side::Envious }), .. } if *item == o4)
    });
    ensure(!efx.holds && named, || "EFX violation by agent 2 on chore o4 not reported".into())?;
    let dom = oracle::find_dominator(&inst, &got, budget).map_err(e)?;
    let all_to_2 = Allocation::from_owners(2, &[1; 4]);
    ensure(dom.as_ref() == Some(&all_to_2), || format!("dominator {dom:?}, expected everything to agent 2"))?;
    Ok("EFX fails (agent 2, o4); dominated by all-to-agent-2".into())
}

fn prop2(set: &FixtureSet, budget: &SearchBudget) -> Result<String, String> {
    let inst = set.instance("prop2").map_err(e)?;
    let seq = PickingSequence::parse_one_indexed("1,2,2").map_err(e)?;
    let alloc = run_picking_sequence(&inst, &seq).map_err(e)?;
    ensure(checkers::check_sequencible(&inst, &alloc).map_err(e)?.holds, || "picked allocation not sequencible".into())?;
    ensure(oracle::find_dominator(&inst, &alloc, budget).map_err(e)?.is_some(), || "sequencible allocation is PO".into())?;
    let mut count = 0;
    for a in oracle::enumerate_allocations(&inst, true, budget).map_err(e)? {
        let po = oracle::find_dominator(&inst, &a, budget).map_err(e)?.is_none();
        let seq = checkers::check_sequencible(&inst, &a).map_err(e)?.holds;
        ensure(!po || seq, || format!("PO allocation {a:?} is not sequencible"))?;
        count += 1;
    }
    Ok(format!("sequencible non-PO allocation found; PO within sequencible over {count} allocations"))
}

fn certify_none(set: &FixtureSet, budget: &SearchBudget, p: Property) -> Result<String, String> {
    let inst = set.instance("thm4").map_err(e)?;
    let cert = oracle::verify_counterexample("thm4", &inst, &[p], budget).map_err(e)?;
    ensure(cert.checked == 16384 && cert.satisfying == 0, || {
        format!("{} of {} allocations satisfy {p}", cert.satisfying, cert.checked)
    })?;
    Ok(format!("{} allocations certified, none {p}", cert.checked))
}

fn thm4_efx(set: &FixtureSet, budget: &SearchBudget) -> Result<String, String> {
    certify_none(set, budget, Property::Efx)
}

fn thm4_efx_c(set: &FixtureSet, budget: &SearchBudget) -> Result<String, String> {
    certify_none(set, budget, Property::EfxC)
}

fn thm4_mms_mixed(set: &FixtureSet, budget: &SearchBudget) -> Result<String, String> {
    let inst = set.instance("thm4").map_err(e)?;
    let id = algorithms::identity(inst.n());
    let out = algorithms::mms_mixed(&inst, &id, &id).map_err(e)?;
    let expected = bundles(&inst, &[&["o1", "o5", "o6", "o7"], &["o4"], &["o3"], &["o2"]])?;
    ensure(out.allocation == expected, || format!("mms-mixed gave {:?}", out.allocation))?;
    ensure(checkers::check_mms(&inst, &out.allocation).map_err(e)?.holds, || "mms-mixed output fails MMS".into())?;
    let d = oracle::decide_exists(&inst, &[Property::Ef1], budget).map_err(e)?;
    ensure(d.witness.is_some(), || "no EF1 allocation found".into())?;
    Ok("mms-mixed output matches and is MMS; EF1 exists".into())
}

fn mms_characterization(set: &FixtureSet, budget: &SearchBudget) -> Result<String, String> {
    let chores5 = set.instance("chores5").map_err(e)?;
    let a = set.allocation("mms-not-efx", &chores5).map_err(e)?;
    ensure(checkers::check_mms(&chores5, &a).map_err(e)?.holds, || "mms-not-efx allocation fails MMS".into())?;
    ensure(!checkers::check_efx(&chores5, &a).map_err(e)?.holds, || "mms-not-efx allocation is EFX".into())?;
    let f = set.instance("ef1-not-mms").map_err(e)?;
    let b = set.allocation("ef1-not-mms", &f).map_err(e)?;
    ensure(checkers::check_ef1(&f, &b).map_err(e)?.holds, || "ef1-not-mms allocation fails EF1".into())?;
    ensure(!checkers::check_mms(&f, &b).map_err(e)?.holds, || "ef1-not-mms allocation is MMS".into())?;
    for name in ["chores5", "thm4", "example1", "drr"] {
        let inst = set.instance(name).map_err(e)?;
        for agent in 0..inst.n() {
            let oracle_share = oracle::mms_partition_oracle(&inst, agent, budget).map_err(e)?;
            let formula = checkers::mms_share(&inst, agent);
            ensure(oracle_share == formula, || {
                format!("{name} agent {}: share {formula:?} but partitions give {oracle_share:?}", agent + 1)
            })?;
        }
    }
    Ok("MMS without EFX and EF1 without MMS confirmed; shares match partitions".into())
}

fn mmsrm_noexist(set: &FixtureSet, budget: &SearchBudget) -> Result<String, String> {
    let inst = set.instance("mmsrm-noexist").map_err(e)?;
    let out = algorithms::mms_rm_chores(&inst).map_err(e)?;
    ensure(out.is_none(), || "mms-rm-chores returned an allocation".into())?;
    let d = oracle::decide_exists(&inst, &[Property::Mms, Property::Rm], budget).map_err(e)?;
    ensure(d.witness.is_none(), || format!("search found {:?}", d.witness))?;
    Ok("no MMS and RM allocation".into())
}

fn chores5_alg3(set: &FixtureSet, _budget: &SearchBudget) -> Result<String, String> {
    let inst = set.instance("chores5").map_err(e)?;
    let out = algorithms::efx_po_chores(&inst, &algorithms::identity(inst.n())).map_err(e)?;
    let expected = bundles(&inst, &[&["o1", "o2"], &["o3"], &["o4"], &["o5"]])?;
    ensure(out.allocation == expected, || format!("efx-po-chores gave {:?}", out.allocation))?;
    Ok("efx-po-chores output matches".into())
}

fn drr(set: &FixtureSet, _budget: &SearchBudget) -> Result<String, String> {
    let inst = set.instance("drr").map_err(e)?;
    let out = algorithms::double_round_robin(&inst, &[0, 1]).map_err(e)?;
    let expected = bundles(&inst, &[&["o3", "o4"], &["o1", "o2", "o5"]])?;
    ensure(out.allocation == expected, || format!("double round robin gave {:?}", out.allocation))?;
    ensure(!checkers::check_efx(&inst, &out.allocation).map_err(e)?.holds, || "double round robin output is EFX".into())?;
    Ok("double round robin output matches and fails EFX".into())
}

/// Source solvable iff the target search succeeds, and the search witness
/// translates back to a valid source witness.
fn round_trip(out: &ReductionOutput, budget: &SearchBudget) -> Result<bool, String> {
    let solvable = out.solve_source().is_some();
    let d = oracle::decide_exists(&out.instance, out.kind.target(), budget).map_err(e)?;
    ensure(solvable == d.witness.is_some(), || {
        format!("{}: source solvable = {solvable}, target witness = {}", out.kind, d.witness.is_some())
    })?;
    if let Some(w) = &d.witness {
        let src = out.extract_witness(w, budget).map_err(e)?;
        ensure(out.source_accepts(&src), || "extracted witness invalid".into())?;
    }
    Ok(solvable)
}

fn reduction_sat_ef(set: &FixtureSet, budget: &SearchBudget) -> Result<String, String> {
    let f = set.cnf("y1").map_err(e)?;
    let out = reductions::sat_to_ef_chores(&f).map_err(e)?;
    ensure((out.instance.n(), out.instance.m()) == (4, 6), || "wrong reduced shape".into())?;
    ensure(round_trip(&out, budget)?, || "y1 reported unsatisfiable".into())?;
    Ok("4 agents, 6 chores; EF allocation found and translated back".into())
}

fn rainbow(set: &FixtureSet, budget: &SearchBudget, ef1: bool) -> Result<String, String> {
    let h = set.hypergraph("edge123").map_err(e)?;
    let build = if ef1 { reductions::rainbow_to_ef1_rm } else { reductions::rainbow_to_ef_rm };
    let out = build(&h).map_err(e)?;
    let m = if ef1 { 11 } else { 10 };
    ensure((out.instance.n(), out.instance.m()) == (4, m), || "wrong reduced shape".into())?;
    let coloring = out.solve_source().ok_or("edge123 reported not colorable")?;
    let hint = out.forward_hint(&coloring).map_err(e)?;
    let back = out.extract_witness(&hint, budget).map_err(e)?;
    ensure(out.source_accepts(&back), || "forward allocation does not translate back".into())?;
    if !ef1 {
        ensure(round_trip(&out, budget)?, || "edge123 reported not colorable".into())?;
        let bad = build(&Hypergraph::new(2, vec![vec![1, 2]]).map_err(e)?).map_err(e)?;
        ensure(!round_trip(&bad, budget)?, || "two-vertex edge reported colorable".into())?;
        return Ok("4 agents, 10 chores; colorable and non-colorable cases agree".into());
    }
    // A single edge leaves E_1 first in every ordering, so the search round
    // trips use two-edge hypergraphs.
    let good = build(&Hypergraph::new(4, vec![vec![1, 2, 3], vec![2, 3, 4]]).map_err(e)?).map_err(e)?;
    ensure(round_trip(&good, budget)?, || "two-edge colorable hypergraph reported not colorable".into())?;
    let bad = build(&Hypergraph::new(3, vec![vec![1, 2], vec![2, 3]]).map_err(e)?).map_err(e)?;
    ensure(!round_trip(&bad, budget)?, || "two-edge non-colorable hypergraph reported colorable".into())?;
    Ok("4 agents, 11 chores; forward allocation translates back; two-edge cases agree".into())
}

fn reduction_rainbow_ef_rm(set: &FixtureSet, budget: &SearchBudget) -> Result<String, String> {
    rainbow(set, budget, false)
}

fn reduction_rainbow_ef1_rm(set: &FixtureSet, budget: &SearchBudget) -> Result<String, String> {
    rainbow(set, budget, true)
}

fn reduction_sat223(set: &FixtureSet, budget: &SearchBudget) -> Result<String, String> {
    let f = set.cnf("sat223-min").map_err(e)?;
    let out = reductions::sat223_to_efx_rm(&f).map_err(e)?;
    let (r, s) = (f.vars, f.clauses.len());
    ensure((out.instance.n(), out.instance.m()) == (2 * r + s, 3 * r + 3 * s), || "wrong reduced shape".into())?;
    let w = out.solve_source().ok_or("fixture formula unsatisfiable")?;
    let hint = out.forward_hint(&w).map_err(e)?;
    ensure(checkers::check_efx(&out.instance, &hint).map_err(e)?.holds, || "forward allocation fails EFX".into())?;
    let back = out.extract_witness(&hint, budget).map_err(e)?;
    ensure(out.source_accepts(&back), || "extracted assignment invalid".into())?;
    let t = out.instance.item_by_label("T1").ok_or("missing T1")?;
    ensure(hint.owner_of(t) == Some(if matches!(&w, reductions::SourceWitness::Assignment(a) if a[0]) { 0 } else { 1 }), || {
        "T1 not with the true literal agent".into()
    })?;
    Ok(format!("{} agents, {} chores; forward allocation is EFX and translates back", 2 * r + s, 3 * r + 3 * s))
}
