//! The JSON file envelope shared by every command that reads or writes
//! combinatorial objects, and atomic file writes.

use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use permuton_lab_core::gentree::{walk_to_perm, Label};
use permuton_lab_core::permuton::EmpiricalPermuton;
use permuton_lab_core::walks::{labels_to_walk, walk_to_labels};
use permuton_lab_core::{Family, Permutation};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub const SCHEMA: &str = "permuton-lab/v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Permutation,
    Walk,
    Labels,
    Permuton,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub schema: String,
    pub family: String,
    pub kind: Kind,
    pub data: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Value>,
}

impl Envelope {
    fn new(family: Family, kind: Kind, data: Value) -> Self {
        Envelope { schema: SCHEMA.into(), family: family.name().into(), kind, data, meta: None }
    }

    pub fn with_meta(mut self, meta: Value) -> Self {
        self.meta = Some(meta);
        self
    }

    pub fn permutations(family: Family, perms: &[Permutation]) -> Self {
        let data = perms.iter().map(|p| json!(p.values())).collect();
        Self::new(family, Kind::Permutation, Value::Array(data))
    }

    /// Paths as lists of `[x, y]` points.
    pub fn walks(family: Family, paths: &[Vec<Label>]) -> Self {
        let data = paths
            .iter()
            .map(|p| json!(labels_to_walk(p).iter().map(|&(x, y)| [x, y]).collect::<Vec<_>>()))
            .collect();
        Self::new(family, Kind::Walk, Value::Array(data))
    }

    /// Paths as lists of `[h, k]` labels.
    pub fn labels(family: Family, paths: &[Vec<Label>]) -> Self {
        let data = paths
            .iter()
            .map(|p| json!(p.iter().map(|l| [l.h, l.k]).collect::<Vec<_>>()))
            .collect();
        Self::new(family, Kind::Labels, Value::Array(data))
    }

    /// The mass matrix, one array per column of the grid.
    pub fn permuton(family: Family, p: &EmpiricalPermuton) -> Self {
        let rows: Vec<&[f64]> = p.masses().chunks(p.k()).collect();
        Self::new(family, Kind::Permuton, json!(rows))
    }

    pub fn family(&self) -> Result<Family> {
        self.family.parse().map_err(|_| anyhow::anyhow!("unknown family {:?}", self.family))
    }

    fn items(&self) -> Result<&Vec<Value>> {
        self.data.as_array().context("data must be an array")
    }

    /// Label paths stored as walks or labels.
    pub fn paths(&self) -> Result<Vec<Vec<Label>>> {
        let mut out = Vec::new();
        for item in self.items()? {
            let pts: Vec<(i64, i64)> = serde_json::from_value(item.clone()).context("malformed point list")?;
            let path = match self.kind {
                Kind::Walk => walk_to_labels(&pts).context("walk leaves the quadrant or is empty")?,
                Kind::Labels => {
                    if pts.iter().any(|&(h, k)| h < 0 || k < 0) {
                        bail!("negative label");
                    }
                    pts.iter().map(|&(h, k)| Label::new(h as u32, k as u32)).collect()
                }
                _ => bail!("expected walks or labels, found {:?}", self.kind),
            };
            out.push(path);
        }
        Ok(out)
    }

    /// Permutations, decoding walks and labels through the family's bijection.
    pub fn to_permutations(&self) -> Result<Vec<Permutation>> {
        match self.kind {
            Kind::Permutation => self
                .items()?
                .iter()
                .map(|v| {
                    let vals: Vec<u32> = serde_json::from_value(v.clone()).context("malformed permutation")?;
                    Ok(Permutation::new(vals)?)
                })
                .collect(),
            Kind::Walk | Kind::Labels => {
                let f = self.family()?;
                self.paths()?.iter().map(|p| Ok(walk_to_perm(p, f)?)).collect()
            }
            Kind::Permuton => bail!("a permuton file holds no permutations"),
        }
    }

    pub fn to_permuton(&self) -> Result<EmpiricalPermuton> {
        if self.kind != Kind::Permuton {
            bail!("expected a permuton, found {:?}", self.kind);
        }
        let rows: Vec<Vec<f64>> = serde_json::from_value(self.data.clone()).context("malformed mass matrix")?;
        let k = rows.len();
        if rows.iter().any(|r| r.len() != k) {
            bail!("mass matrix is not square");
        }
        Ok(EmpiricalPermuton::new(k, rows.concat())?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("envelopes serialize")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let e: Envelope = serde_json::from_str(text).context("not a permuton-lab envelope")?;
        if e.schema != SCHEMA {
            bail!("unsupported schema {:?}", e.schema);
        }
        Ok(e)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = self.to_json();
        text.push('\n');
        write_atomic(path, text.as_bytes())
    }
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating a file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use permuton_lab_core::gentree::{all_paths, Rule};

    #[test]
    fn round_trips() {
        let paths = all_paths(&Rule::Strong, 4);
        for e in [Envelope::walks(Family::Strong, &paths), Envelope::labels(Family::Strong, &paths)] {
            let back = Envelope::parse(&e.to_json()).unwrap();
            assert_eq!(back.paths().unwrap(), paths);
            assert_eq!(back.to_permutations().unwrap().len(), 21);
        }
        let perms = vec![Permutation::new(vec![2, 1, 3]).unwrap()];
        let e = Envelope::permutations(Family::Semi, &perms);
        assert_eq!(Envelope::parse(&e.to_json()).unwrap().to_permutations().unwrap(), perms);
    }

    #[test]
    fn rejects_foreign_schema() {
        let bad = r#"{"schema":"other/v9","family":"strong","kind":"walk","data":[]}"#;
        assert!(Envelope::parse(bad).is_err());
    }
}
