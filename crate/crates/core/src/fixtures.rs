//! Bundled fixture documents, optionally overridden from a directory.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::format;
use crate::model::{Allocation, Instance};
use crate::reductions::{CnfFormula, Hypergraph};

pub const FILES: &[(&str, &str)] = &[
    ("chores5.json", include_str!("../fixtures/chores5.json")),
    ("drr.json", include_str!("../fixtures/drr.json")),
    ("edge123.hg", include_str!("../fixtures/edge123.hg")),
    ("ef1-not-mms.alloc.json", include_str!("../fixtures/ef1-not-mms.alloc.json")),
    ("ef1-not-mms.json", include_str!("../fixtures/ef1-not-mms.json")),
    ("efx-not-mms.alloc.json", include_str!("../fixtures/efx-not-mms.alloc.json")),
    ("efx-not-mms.json", include_str!("../fixtures/efx-not-mms.json")),
    ("example1.json", include_str!("../fixtures/example1.json")),
    ("mms-not-efx.alloc.json", include_str!("../fixtures/mms-not-efx.alloc.json")),
    ("mmsrm-noexist.json", include_str!("../fixtures/mmsrm-noexist.json")),
    ("prop2.json", include_str!("../fixtures/prop2.json")),
    ("sat223-min.cnf", include_str!("../fixtures/sat223-min.cnf")),
    ("seq1221.alloc.json", include_str!("../fixtures/seq1221.alloc.json")),
    ("thm4.json", include_str!("../fixtures/thm4.json")),
    ("y1.cnf", include_str!("../fixtures/y1.cnf")),
];

/// Fixture texts keyed by file name.
#[derive(Debug, Clone)]
pub struct FixtureSet {
    files: BTreeMap<String, String>,
}

impl FixtureSet {
    pub fn embedded() -> Self {
        FixtureSet { files: FILES.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect() }
    }

    /// Embedded fixtures, with any same-named file in `dir` taking precedence.
    pub fn from_dir(dir: &Path) -> Result<Self> {
        let mut set = FixtureSet::embedded();
        for (name, text) in set.files.iter_mut() {
            let path = dir.join(name);
            if path.exists() {
                *text = std::fs::read_to_string(&path)
                    .map_err(|e| Error::document(path.display().to_string(), e.to_string()))?;
            }
        }
        Ok(set)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.keys().map(String::as_str)
    }

    pub fn text(&self, file: &str) -> Result<&str> {
        self.files
            .get(file)
            .map(String::as_str)
            .ok_or_else(|| Error::document(file, "no such fixture"))
    }

    pub fn instance(&self, stem: &str) -> Result<Instance> {
        format::parse_instance(self.text(&format!("{stem}.json"))?)
    }

    pub fn allocation(&self, stem: &str, inst: &Instance) -> Result<Allocation> {
        format::parse_allocation(self.text(&format!("{stem}.alloc.json"))?, inst)
    }

    pub fn cnf(&self, stem: &str) -> Result<CnfFormula> {
        format::parse_dimacs(self.text(&format!("{stem}.cnf"))?)
    }

    pub fn hypergraph(&self, stem: &str) -> Result<Hypergraph> {
        format::parse_hypergraph(self.text(&format!("{stem}.hg"))?)
    }
}

impl Default for FixtureSet {
    fn default() -> Self {
        FixtureSet::embedded()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_fixture_parses() {
        let set = FixtureSet::embedded();
        for name in set.names() {
            let text = set.text(name).unwrap();
            if let Some(stem) = name.strip_suffix(".alloc.json") {
                let inst_stem = match stem {
                    "seq1221" => "example1",
                    "mms-not-efx" => "chores5",
                    other => other,
                };
                set.allocation(stem, &set.instance(inst_stem).unwrap()).unwrap();
            } else if name.ends_with(".json") {
                let inst = format::parse_instance(text).unwrap();
                assert_eq!(format::serialize_instance(&inst), text, "{name} is not canonical");
            } else if name.ends_with(".cnf") {
                format::parse_dimacs(text).unwrap();
            } else {
                format::parse_hypergraph(text).unwrap();
            }
        }
    }

    #[test]
    fn thm4_shape() {
        let inst = FixtureSet::embedded().instance("thm4").unwrap();
        assert_eq!((inst.n(), inst.m()), (4, 7));
    }
}
