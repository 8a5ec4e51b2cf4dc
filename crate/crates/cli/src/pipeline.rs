//! Per-instance verification pipelines.
//!
//! Every pipeline is sequential and pure given its inputs, so instances can
//! be verified in parallel and merged by id afterwards.

use frobmod::adjunction::LocalAdjunction;
use frobmod::construct::{self, FrobOfLadj, ESTIMATE_TOL};
use frobmod::frobenius::{self, FrobeniusStructure, TensorAlgebra, QUASI_BASIS_TOL};
use frobmod::instances;
use frobmod::iso::{self, FrobeniusIso};
use frobmod::Error;

use crate::report::{Check, InstanceReport};

/// Threshold for the round-trip and isomorphism residuals.
pub const ROUNDTRIP_TOL: f64 = 1e-8;
/// Threshold for `ε⁽¹⁾(c·x) = c`.
pub const UNIT_IDENTITY_TOL: f64 = 1e-10;
/// Threshold for the ratio checks of the norm estimate.
pub const RATIO_THRESHOLD: f64 = 1.0 + ESTIMATE_TOL;
/// Samples for multiplicativity and twist checks.
const PRODUCT_SAMPLES: usize = 8;

#[derive(Debug, Clone, Copy)]
pub struct Options {
    pub tol: f64,
    pub seed: u64,
    /// Amplification depth of the norm estimate.
    pub levels: usize,
    /// Samples per amplification level.
    pub samples: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options { tol: 1e-9, seed: 0, levels: 3, samples: 200 }
    }
}

/// Records `result`'s error as a failed check and returns `None`.
fn attempt<T>(rep: &mut InstanceReport, name: &str, threshold: f64, result: frobmod::Result<T>) -> Option<T> {
    match result {
        Ok(v) => Some(v),
        Err(e) => {
            rep.push(Check::failed(name, threshold, &e));
            None
        }
    }
}

/// Structure certificates, quasi-basis, index, unit identity, norm estimate,
/// `cac` isomorphism and the first round trip.
pub fn verify_structure(id: &str, s: &FrobeniusStructure, opts: &Options) -> InstanceReport {
    let mut rep = InstanceReport::new(id);
    verify_into(&mut rep, s, opts);
    rep
}

/// Like [`verify_structure`], appending to an existing report; returns the
/// local adjunction `LAdj(S)` and `Frob(LAdj(S))` when they could be built.
pub fn verify_into(
    rep: &mut InstanceReport,
    s: &FrobeniusStructure,
    opts: &Options,
) -> Option<(LocalAdjunction, FrobOfLadj)> {
    let cert = s.certificates();
    rep.constant("dim_a", s.a().dim());
    rep.constant("dim_c", s.c().dim());
    rep.constant("blocks_a", s.a().blocks());
    rep.constant("blocks_c", s.c().blocks());
    rep.push(Check::at_most("make_frobenius", cert.bimodule_residual, opts.tol));

    let t = TensorAlgebra::new(s);
    let qb = attempt(rep, "quasi_basis", QUASI_BASIS_TOL, frobenius::quasi_basis(s, &t))?;
    rep.push(Check::at_most("quasi_basis", qb.reproduction_residual, QUASI_BASIS_TOL));

    if let Some(idx) = attempt(rep, "index", opts.tol, frobenius::watatani_index(s, &qb, opts.tol)) {
        let spectrum: Vec<f64> = idx.blocks.iter().map(|b| b[(0, 0)].re).collect();
        rep.constant("index_spectrum", spectrum);
        rep.push(Check::at_most("index", idx.dist(&idx.star()), opts.tol));
    }

    let x = t.reduce(&qb.tensor);
    let c = s.c();
    let unit = c
        .basis()
        .iter()
        .map(|b| t.eps_one(&t.left_act(b, &x)).dist(b))
        .fold(0.0, f64::max);
    rep.push(Check::at_most("unit_identity", unit, UNIT_IDENTITY_TOL));

    let (adj, ce) = attempt(rep, "c_epsilon", opts.tol, construct::ladj_from_frob(s))?;

    // Frob(LAdj(S)), the cac isomorphism and ψ share one realization
    let frob = attempt(rep, "roundtrip_frob", ROUNDTRIP_TOL, construct::frob_from_ladj(&adj, opts.seed))?;
    let t2 = TensorAlgebra::new(&frob.structure);
    let mut s_operator = f64::NAN;
    match frobenius::quasi_basis(&frob.structure, &t2).and_then(|qb2| {
        let iso = construct::cac_iso(&adj, &frob, &t2)?;
        Ok(construct::cac_report(&iso, &t2, &t2.reduce(&qb2.tensor), PRODUCT_SAMPLES, opts.seed))
    }) {
        Ok(cac) => {
            s_operator = cac.identity_image_norm;
            let residual = cac
                .multiplicativity_residual
                .max(cac.relation_residual)
                .max(cac.well_defined_residual);
            let mut check = Check::at_most("cac_iso", residual, ROUNDTRIP_TOL);
            if !cac.bijective {
                check.pass = false;
                check.error = Some(format!("NotInvertible: rank {} of {}×{}", cac.rank, cac.dim_codomain, cac.dim_domain));
            }
            rep.push(check);
        }
        Err(e) => rep.push(Check::failed("cac_iso", ROUNDTRIP_TOL, &e)),
    }

    let s_norm = construct::haagerup_norm_of_identity(s, &t, &qb);
    rep.constant("s", s_norm);
    rep.constant("s_operator", s_operator);
    rep.constant("eps_cb", s.eps_cb_norm());
    match construct::key_estimate_check(s, &ce, s_norm, s_operator, opts.levels, opts.samples, opts.seed) {
        Ok(k) => {
            let worst = |v: &[f64]| v.iter().cloned().fold(0.0, f64::max);
            rep.constant("key_estimate_stated_ratio_per_level", &k.worst_ratio_per_level);
            rep.constant("key_estimate_stated_holds", worst(&k.worst_ratio_per_level) <= RATIO_THRESHOLD);
            rep.push(Check::at_most(
                "key_estimate",
                worst(&k.worst_corrected_ratio_per_level),
                RATIO_THRESHOLD,
            ));
            rep.push(Check::at_most("key_estimate_upper", worst(&k.worst_upper_ratio_per_level), RATIO_THRESHOLD));
        }
        Err(e) => rep.push(Check::failed("key_estimate", RATIO_THRESHOLD, &e)),
    }

    let psi = construct::psi_matrix(s, &frob);
    match FrobeniusIso::new(s.clone(), frob.structure.clone(), psi, ROUNDTRIP_TOL) {
        Ok(iso) => {
            let mut check = Check::at_most("roundtrip_frob", iso.report.max_residual(), ROUNDTRIP_TOL);
            check.pass &= iso.report.bijective;
            rep.push(check);
        }
        Err(e) => rep.push(Check::failed("roundtrip_frob", ROUNDTRIP_TOL, &e)),
    }
    Some((adj, frob))
}

/// `φ ≅ LAdj(Frob(φ))`, reusing `Frob(φ)` when it is already built.
pub fn check_roundtrip_ladj(rep: &mut InstanceReport, adj: &LocalAdjunction, frob: Option<FrobOfLadj>, opts: &Options) {
    let roundtrip = match frob {
        Some(frob) => iso::roundtrip_ladj_from(adj, frob),
        None => iso::roundtrip_ladj(adj, opts.seed),
    };
    let result = roundtrip.and_then(|rt| {
        rt.report.check(ROUNDTRIP_TOL)?;
        Ok(rt.report.max_residual())
    });
    match result {
        Ok(r) => rep.push(Check::at_most("roundtrip_ladj", r, ROUNDTRIP_TOL)),
        Err(e) => rep.push(Check::failed("roundtrip_ladj", ROUNDTRIP_TOL, &e)),
    }
}

/// Both directions of the isomorphism correspondence for `ρ`: the triple
/// built from `ρ` verifies, and `ρ` is recovered from it.
pub fn iso_both_directions(rho: &FrobeniusIso) -> frobmod::Result<(f64, f64)> {
    let l = iso::ladj_iso_from_frob_iso(rho)?;
    l.report.check(ROUNDTRIP_TOL)?;
    let back = iso::rho_from_triple(&l.triple, &l.source, &rho.source, &rho.target, ROUNDTRIP_TOL)?;
    let recovered = frobmod::linalg::max_abs(&(&back.rho - &rho.rho));
    Ok((l.report.max_residual(), recovered))
}

/// Unitary conjugation by a seeded element of the relative commutant.
pub fn check_iso3(rep: &mut InstanceReport, s: &FrobeniusStructure, opts: &Options) {
    let result = instances::unitary_conjugation_iso(s, opts.seed).and_then(|rho| iso_both_directions(&rho));
    match result {
        Ok((forward, recovered)) => {
            rep.push(Check::at_most("iso3_forward", forward, ROUNDTRIP_TOL));
            rep.push(Check::at_most("iso3_recovered", recovered, ROUNDTRIP_TOL));
        }
        Err(e) => rep.push(Check::failed("iso3_forward", ROUNDTRIP_TOL, &e)),
    }
}

/// The grid image of the tensor algebra (multiplicativity and the
/// branch-point condition).
pub fn check_grid_image(rep: &mut InstanceReport, m: usize, opts: &Options) {
    match instances::grid_image_report(m, PRODUCT_SAMPLES, opts.seed) {
        Ok(g) => {
            let r = g.multiplicativity_residual.max(g.relation_residual);
            rep.push(Check::at_most("grid_image_multiplicative", r, opts.tol));
            rep.push(Check::at_most("grid_branch_point", g.branch_point_defect, 0.0));
        }
        Err(e) => rep.push(Check::failed("grid_image_multiplicative", opts.tol, &e)),
    }
}

/// Everything the suite runs on one instance.
pub fn full_checks(id: &str, s: &FrobeniusStructure, grid_m: Option<usize>, opts: &Options) -> InstanceReport {
    let mut rep = InstanceReport::new(id);
    if let Some((adj, frob)) = verify_into(&mut rep, s, opts) {
        check_roundtrip_ladj(&mut rep, &adj, Some(frob), opts);
    }
    check_iso3(&mut rep, s, opts);
    if let Some(m) = grid_m {
        check_grid_image(&mut rep, m, opts);
    }
    rep
}

/// An error that names the first failing check, for exit-code purposes.
pub fn first_error(rep: &InstanceReport) -> Option<String> {
    rep.checks.iter().find(|c| !c.pass).map(|c| {
        c.error.clone().unwrap_or_else(|| format!("{}: residual {:e} > {:e}", c.name, c.residual, c.threshold))
    })
}

/// Checks that a declared module matches the constructed one.
pub fn declared_module_check(rep: &mut InstanceReport, name: &str, declared: &frobmod::HilbertModule, s: &FrobeniusStructure, tol: f64) {
    let check_name = format!("declared_module_{name}");
    match construct::c_epsilon(s) {
        Ok(ce) => {
            let built = ce.module();
            if built.dim() != declared.dim() {
                rep.push(Check::failed(&check_name, tol, &Error::TypeMismatch(format!(
                    "declared dimension {} ≠ {}",
                    declared.dim(),
                    built.dim()
                ))));
                return;
            }
            let r = built
                .gram()
                .iter()
                .zip(declared.gram())
                .chain(built.action().iter().zip(declared.action()))
                .map(|(x, y)| frobmod::linalg::max_abs(&(x - y)))
                .fold(0.0, f64::max);
            rep.push(Check::at_most(&check_name, r, tol));
        }
        Err(e) => rep.push(Check::failed(&check_name, tol, &e)),
    }
}
