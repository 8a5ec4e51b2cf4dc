//! JSON instance files.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "id": "matrix_trace_2",
//!   "algebras": { "A": { "blocks": [1] }, "C": { "blocks": [2] } },
//!   "eta": { "source": "A", "target": "C", "matrix": [[[1.0, 0.0]], ...] },
//!   "eps": { "source": "C", "target": "A", "matrix": [[[1.0, 0.0], ...]] },
//!   "modules": { "C_eps": { "base": "A", "dim": 4, "action": [...], "gram": [...] } }
//! }
//! ```
//!
//! Complex numbers are `[re, im]` pairs; matrices are arrays of rows; module
//! tensors are arrays of matrices indexed by the base algebra's coordinates.
//! Doubles are written in shortest round-trip form, so files reload
//! bit-exactly.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::algebra::{Algebra, StarHom};
use crate::construct;
use crate::error::{Error, Result};
use crate::frobenius::FrobeniusStructure;
use crate::hilbert_module::HilbertModule;
use crate::instances::{Instance, InstanceSpec};
use crate::linalg::{c, Mat};

pub const SCHEMA_VERSION: u32 = 1;

pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

pub fn mat_to_json(m: &Mat) -> JsonMatrix {
    (0..m.nrows()).map(|r| (0..m.ncols()).map(|k| [m[(r, k)].re, m[(r, k)].im]).collect()).collect()
}

pub fn mat_from_json(rows: &JsonMatrix) -> Result<Mat> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Parse("ragged matrix".into()));
    }
    Ok(Mat::from_fn(nrows, ncols, |r, k| c(rows[r][k][0], rows[r][k][1])))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraJson {
    pub blocks: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapJson {
    pub source: String,
    pub target: String,
    pub matrix: JsonMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModuleJson {
    pub base: String,
    pub dim: usize,
    pub action: Vec<JsonMatrix>,
    pub gram: Vec<JsonMatrix>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub schema_version: u32,
    pub id: String,
    /// How the instance was generated, when it was.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<InstanceSpec>,
    pub algebras: BTreeMap<String, AlgebraJson>,
    pub eta: MapJson,
    pub eps: MapJson,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub modules: BTreeMap<String, ModuleJson>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// A loaded and validated instance file.
#[derive(Debug, Clone)]
pub struct LoadedInstance {
    pub id: String,
    pub provenance: Option<InstanceSpec>,
    pub structure: FrobeniusStructure,
    pub modules: BTreeMap<String, HilbertModule>,
    pub notes: Vec<String>,
}

pub fn module_to_json(m: &HilbertModule, base: &str) -> ModuleJson {
    ModuleJson {
        base: base.into(),
        dim: m.dim(),
        action: m.action().iter().map(mat_to_json).collect(),
        gram: m.gram().iter().map(mat_to_json).collect(),
    }
}

impl InstanceFile {
    /// Serialises an instance, attaching its `C^ε` module as `"C_eps"`.
    pub fn from_instance(inst: &Instance) -> Result<Self> {
        let s = &inst.structure;
        let ce = construct::c_epsilon(s)?;
        let mut algebras = BTreeMap::new();
        algebras.insert("A".to_string(), AlgebraJson { blocks: s.a().blocks().to_vec() });
        algebras.insert("C".to_string(), AlgebraJson { blocks: s.c().blocks().to_vec() });
        let mut modules = BTreeMap::new();
        modules.insert("C_eps".to_string(), module_to_json(ce.module(), "A"));
        Ok(InstanceFile {
            schema_version: SCHEMA_VERSION,
            id: inst.id.clone(),
            provenance: Some(inst.spec.clone()),
            algebras,
            eta: MapJson { source: "A".into(), target: "C".into(), matrix: mat_to_json(s.eta().matrix()) },
            eps: MapJson { source: "C".into(), target: "A".into(), matrix: mat_to_json(s.eps()) },
            modules,
            notes: inst.notes.clone(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance files always serialise")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(Error::Parse(format!("unsupported schema version {}", file.schema_version)));
        }
        Ok(file)
    }

    fn algebra(&self, key: &str) -> Result<Algebra> {
        let a = self.algebras.get(key).ok_or_else(|| Error::Parse(format!("unknown algebra key {key:?}")))?;
        Ok(Algebra::new(&a.blocks)?.with_label(key))
    }

    /// Rebuilds and validates everything in the file.
    pub fn load(&self, tol: f64) -> Result<LoadedInstance> {
        if self.eta.source != self.eps.target || self.eta.target != self.eps.source {
            return Err(Error::Parse("eta and eps must be maps A → C and C → A".into()));
        }
        let a = self.algebra(&self.eta.source)?;
        let cc = self.algebra(&self.eta.target)?;
        let eta = StarHom::new(a, cc, mat_from_json(&self.eta.matrix)?, tol)?;
        let structure = FrobeniusStructure::new(eta, mat_from_json(&self.eps.matrix)?, tol)?;
        let mut modules = BTreeMap::new();
        for (key, m) in &self.modules {
            let base = self.algebra(&m.base)?;
            let action = m.action.iter().map(mat_from_json).collect::<Result<Vec<_>>>()?;
            let gram = m.gram.iter().map(mat_from_json).collect::<Result<Vec<_>>>()?;
            modules.insert(key.clone(), HilbertModule::new(base, m.dim, action, gram, tol)?);
        }
        Ok(LoadedInstance {
            id: self.id.clone(),
            provenance: self.provenance.clone(),
            structure,
            modules,
            notes: self.notes.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{InstanceKind, InstanceSpec};

    #[test]
    fn roundtrip_is_bit_exact() {
        let spec = InstanceSpec { kind: InstanceKind::Random { budget: 4 }, seed: 2 };
        let inst = spec.build().unwrap();
        let file = InstanceFile::from_instance(&inst).unwrap();
        let again = InstanceFile::parse(&file.to_json()).unwrap();
        assert_eq!(file, again);
        let loaded = again.load(1e-9).unwrap();
        assert_eq!(loaded.structure.eps(), inst.structure.eps());
        assert!(loaded.modules.contains_key("C_eps"));
    }

    #[test]
    fn parse_errors() {
        assert_eq!(InstanceFile::parse("{").unwrap_err().name(), "ParseError");
        assert_eq!(mat_from_json(&vec![vec![[1.0, 0.0]], vec![]]).unwrap_err().name(), "ParseError");
    }
}
