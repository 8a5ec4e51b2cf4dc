//! The four subcommands, independent of argument parsing.

use std::path::Path;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde_json::{Map, Value};

use frobmod::instances::{self, GroupTable, InstanceKind, InstanceSpec};
use frobmod::schema::{InstanceFile, LoadedInstance};
use frobmod::{construct, iso, Error, HilbertModule, Result};

use crate::pipeline::{self, Options, ROUNDTRIP_TOL};
use crate::report::{Check, InstanceReport, Report};

/// Process exit code for a command outcome.
pub fn exit_code(outcome: &Result<Report>) -> i32 {
    match outcome {
        Ok(r) if r.pass => 0,
        Ok(_) => 1,
        Err(Error::Parse(_) | Error::BadParam(_)) => 2,
        Err(_) => 1,
    }
}

fn read_instance(path: &Path) -> Result<InstanceFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    InstanceFile::parse(&text)
}

/// Loads a file; validation failures become a failed `load` check.
fn load_or_report(file: &InstanceFile, opts: &Options) -> std::result::Result<LoadedInstance, InstanceReport> {
    file.load(opts.tol).map_err(|e| {
        let mut rep = InstanceReport::new(&file.id);
        rep.push(Check::failed("load", opts.tol, &e));
        rep
    })
}

pub fn cmd_verify(path: &Path, opts: &Options) -> Result<Report> {
    let started = Instant::now();
    let file = read_instance(path)?;
    let mut report = Report::new("verify", opts.seed, opts.tol);
    match load_or_report(&file, opts) {
        Ok(loaded) => {
            let mut rep = pipeline::verify_structure(&loaded.id, &loaded.structure, opts);
            if let Some(m) = loaded.modules.get("C_eps") {
                pipeline::declared_module_check(&mut rep, "C_eps", m, &loaded.structure, opts.tol);
            }
            report.add(rep);
        }
        Err(rep) => report.add(rep),
    }
    report.timings_ms.insert("total".into(), started.elapsed().as_millis() as u64);
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoundtripMode {
    /// `C ≅ Frob(LAdj(C))`.
    Frob,
    /// `φ ≅ LAdj(Frob(φ))`.
    Ladj,
    /// Isomorphisms of structures versus isomorphisms of adjunctions.
    Iso3,
}

impl std::str::FromStr for RoundtripMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "frob" => Ok(RoundtripMode::Frob),
            "ladj" => Ok(RoundtripMode::Ladj),
            "iso3" => Ok(RoundtripMode::Iso3),
            other => Err(Error::BadParam(format!("unknown mode {other:?} (frob|ladj|iso3)"))),
        }
    }
}

pub fn cmd_roundtrip(path: &Path, mode: RoundtripMode, opts: &Options) -> Result<Report> {
    let started = Instant::now();
    let file = read_instance(path)?;
    let mut report = Report::new("roundtrip", opts.seed, opts.tol);
    let loaded = match load_or_report(&file, opts) {
        Ok(l) => l,
        Err(rep) => {
            report.add(rep);
            return Ok(report);
        }
    };
    let s = &loaded.structure;
    let mut rep = InstanceReport::new(&loaded.id);
    match mode {
        RoundtripMode::Frob => match iso::roundtrip_frob(s, opts.seed, ROUNDTRIP_TOL) {
            Ok((psi, _)) => {
                let r = &psi.report;
                rep.push(Check::at_most("psi_multiplicative", r.multiplicative_residual, ROUNDTRIP_TOL));
                rep.push(Check::at_most("psi_star", r.star_residual, ROUNDTRIP_TOL));
                rep.push(Check::at_most("psi_unit", r.unit_residual, ROUNDTRIP_TOL));
                rep.push(Check::at_most("psi_bimodule", r.bimodule_residual, ROUNDTRIP_TOL));
                rep.push(Check::at_most("psi_eps", r.eps_residual, ROUNDTRIP_TOL));
            }
            Err(e) => rep.push(Check::failed("roundtrip_frob", ROUNDTRIP_TOL, &e)),
        },
        RoundtripMode::Ladj => match construct::ladj_from_frob(s) {
            Ok((adj, _)) => pipeline::check_roundtrip_ladj(&mut rep, &adj, None, opts),
            Err(e) => rep.push(Check::failed("roundtrip_ladj", ROUNDTRIP_TOL, &e)),
        },
        RoundtripMode::Iso3 => pipeline::check_iso3(&mut rep, s, opts),
    }
    report.add(rep);
    report.timings_ms.insert("total".into(), started.elapsed().as_millis() as u64);
    Ok(report)
}

fn parse_group(name: &str) -> Result<GroupTable> {
    match name {
        "s3" => Ok(GroupTable::symmetric3()),
        _ => match name.strip_prefix('z').and_then(|n| n.parse::<usize>().ok()) {
            Some(n) if n > 0 => GroupTable::cyclic(n),
            _ => Err(Error::BadParam(format!("unknown group {name:?} (s3 or z<n>)"))),
        },
    }
}

/// Builds an instance spec from a kind and `key=value,...` parameters
/// (or a JSON object).
///
/// Group inclusions take `group=s3|z<n>` and `subgroup=0:1:2`.
pub fn parse_spec(kind: &str, params: &str, seed: u64) -> Result<InstanceSpec> {
    let mut obj = Map::new();
    let params = params.trim();
    if params.starts_with('{') {
        let v: Value = serde_json::from_str(params).map_err(|e| Error::BadParam(e.to_string()))?;
        match v {
            Value::Object(m) => obj = m,
            _ => return Err(Error::BadParam("params must be an object".into())),
        }
    } else {
        for pair in params.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| Error::BadParam(format!("expected key=value, got {pair:?}")))?;
            let (k, v) = (k.trim(), v.trim());
            let value = match k {
                "group" => serde_json::to_value(parse_group(v)?).expect("group tables serialise"),
                "subgroup" => {
                    let elems = v
                        .split(':')
                        .map(|x| x.trim().parse::<usize>())
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|e| Error::BadParam(format!("subgroup: {e}")))?;
                    serde_json::to_value(elems).expect("integers serialise")
                }
                _ => serde_json::from_str::<Value>(v).unwrap_or_else(|_| Value::String(v.into())),
            };
            obj.insert(k.into(), value);
        }
    }
    if kind == "group_inclusion" {
        obj.entry("subgroup").or_insert_with(|| Value::Array(vec![Value::from(0)]));
    }
    obj.insert("kind".into(), Value::String(kind.into()));
    obj.insert("seed".into(), Value::from(seed));
    serde_json::from_value(Value::Object(obj)).map_err(|e| Error::BadParam(format!("{kind}: {e}")))
}

/// Builds, validates and serialises an instance.
pub fn cmd_generate(spec: &InstanceSpec) -> Result<InstanceFile> {
    let inst = spec.build()?;
    InstanceFile::from_instance(&inst)
}

/// The curated instance set run by every suite.
pub fn curated_specs() -> Vec<InstanceSpec> {
    let spec = |kind| InstanceSpec { kind, seed: 0 };
    let s3 = GroupTable::symmetric3();
    let z2 = GroupTable::cyclic(2).expect("ℤ/2");
    vec![
        spec(InstanceKind::Trivial),
        spec(InstanceKind::MatrixTrace { n: 2, lambda: 1.0 }),
        spec(InstanceKind::MatrixTrace { n: 2, lambda: 0.5 }),
        spec(InstanceKind::MatrixTrace { n: 3, lambda: 1.0 }),
        spec(InstanceKind::BranchedGrid { m: 1 }),
        spec(InstanceKind::BranchedGrid { m: 2 }),
        spec(InstanceKind::BranchedGrid { m: 3 }),
        spec(InstanceKind::GroupInclusion { group: z2, subgroup: vec![0] }),
        spec(InstanceKind::GroupInclusion { group: s3.clone(), subgroup: vec![0, 1, 2] }),
        spec(InstanceKind::GroupInclusion { group: s3, subgroup: vec![0] }),
    ]
}

#[derive(Debug, Clone, Copy)]
pub struct SuiteOptions {
    /// Number of random instances.
    pub seeds: usize,
    pub budget: usize,
    /// Fraction of instances whose `C^ε` gram is made indefinite.
    pub corrupt_rate: f64,
}

/// Which instances get a corrupted gram: seeded, independent of scheduling.
pub fn corruption_mask(count: usize, rate: f64, seed: u64) -> Vec<bool> {
    let mut rng = frobmod::linalg::rng_from_seed(seed ^ 0xC022_0F7E);
    (0..count).map(|_| rate > 0.0 && rng.random::<f64>() < rate).collect()
}

/// The `C^ε` module, revalidated from its data (with an indefinite gram if
/// `corrupt`).
fn module_check(rep: &mut InstanceReport, s: &frobmod::frobenius::FrobeniusStructure, corrupt: bool, opts: &Options) {
    let result = construct::c_epsilon(s).and_then(|ce| {
        let m = ce.module();
        let gram = if corrupt { instances::indefinite_gram(m, opts.seed) } else { m.gram().to_vec() };
        HilbertModule::new(m.base().clone(), m.dim(), m.action().to_vec(), gram, opts.tol)
    });
    match result {
        Ok(_) => rep.push(Check::at_most("c_epsilon_module", 0.0, opts.tol)),
        Err(e) => rep.push(Check::failed("c_epsilon_module", opts.tol, &e)),
    }
}

fn suite_instance(spec: &InstanceSpec, corrupt: bool, opts: &Options) -> InstanceReport {
    let id = spec.id();
    let inst = match spec.build() {
        Ok(i) => i,
        Err(e) => {
            let mut rep = InstanceReport::new(&id);
            rep.push(Check::failed("build", opts.tol, &e));
            return rep;
        }
    };
    let grid_m = match spec.kind {
        InstanceKind::BranchedGrid { m } => Some(m),
        _ => None,
    };
    let mut rep = pipeline::full_checks(&id, &inst.structure, grid_m, opts);
    module_check(&mut rep, &inst.structure, corrupt, opts);
    if corrupt {
        rep.notes.push("injected corruption: indefinite C_eps gram".into());
    }
    rep.notes.extend(inst.notes);
    rep
}

pub fn cmd_suite(suite: &SuiteOptions, opts: &Options) -> Result<Report> {
    if suite.budget == 0 {
        return Err(Error::BadParam("budget must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&suite.corrupt_rate) {
        return Err(Error::BadParam("corruption rate must lie in [0, 1]".into()));
    }
    let started = Instant::now();
    let mut specs = curated_specs();
    specs.extend((0..suite.seeds as u64).map(|i| InstanceSpec {
        kind: InstanceKind::Random { budget: suite.budget },
        seed: opts.seed.wrapping_add(i),
    }));
    let mask = corruption_mask(specs.len(), suite.corrupt_rate, opts.seed);
    let mut reports: Vec<InstanceReport> = specs
        .par_iter()
        .zip(mask.par_iter())
        .map(|(spec, &corrupt)| {
            let t = Instant::now();
            let rep = suite_instance(spec, corrupt, opts);
            log::info!("{}: {} in {} ms", rep.id, if rep.pass { "pass" } else { "FAIL" }, t.elapsed().as_millis());
            rep
        })
        .collect();
    reports.sort_by(|a, b| a.id.cmp(&b.id));

    let mut report = Report::new("suite", opts.seed, opts.tol);
    for rep in reports {
        report.add(rep);
    }
    report.timings_ms.insert("total".into(), started.elapsed().as_millis() as u64);
    Ok(report)
}
