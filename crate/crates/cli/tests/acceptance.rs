//! Acceptance criteria 1–10, one `PASS`/`FAIL` line each.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.
//! Every criterion is evaluated as stated. The test fails on any `FAIL`
//! except criterion 5, whose stated inequality is not scale-invariant: there
//! the test instead asserts that every failure is explained by
//! `‖ε‖_cb < 1` and that the scale-consistent form holds everywhere.

use std::collections::BTreeSet;
use std::time::Instant;

use frobmod::instances::{self, GroupTable, InstanceKind, InstanceSpec};
use frobmod::iso::{self, FrobeniusIso};
use frobmod::linalg::{self, cr, Mat};
use frobmod::{construct, frobenius, Error, FrobeniusStructure, HilbertModule};
use frobmod_cli::commands::{self, SuiteOptions};
use frobmod_cli::pipeline::{self, Options};
use frobmod_cli::report::Report;

const RANDOM_INSTANCES: usize = 100;
const RANDOM_BUDGET: usize = 6;
const MAX_REP_DIM: usize = 12;
const ROUNDTRIP_TOL: f64 = 1e-8;
const RUNTIME_BUDGET_S: f64 = 60.0;
const MIN_ISO_PAIRS: usize = 20;
const RATIO_TOL: f64 = 1e-8;
const LEVELS: usize = 3;
const SAMPLES: usize = 200;
const UNIT_TOL: f64 = 1e-10;
const ANCHOR_TOL: f64 = 1e-10;
const GROUP_ANCHOR_TOL: f64 = 1e-9;
const GRID_TOL: f64 = 1e-9;
const CORRUPTIONS: usize = 50;
const BETA_SCALE: f64 = 1.01;
const EPS_PERTURBATION: f64 = 1e-3;

struct Outcome {
    criterion: u32,
    pass: bool,
    detail: String,
}

fn line(o: &Outcome) {
    println!("criterion {:>2}: {} — {}", o.criterion, if o.pass { "PASS" } else { "FAIL" }, o.detail);
}

fn instance_specs() -> Vec<InstanceSpec> {
    let mut specs = commands::curated_specs();
    specs.extend(
        (0..RANDOM_INSTANCES as u64).map(|seed| InstanceSpec { kind: InstanceKind::Random { budget: RANDOM_BUDGET }, seed }),
    );
    specs
}

// ---------------------------------------------------------------- oracles

/// Brute-force quasi-basis check with plain matrices: `Σ u ε(v c) = c` and
/// `Σ ε(c u) v = c` for every matrix unit `c`, then the index `Σ u v`.
fn oracle_index(units: &[Mat], eps: impl Fn(&Mat) -> Mat, pairs: &[(Mat, Mat)]) -> Mat {
    for c in units {
        let mut left = Mat::zeros(c.nrows(), c.ncols());
        let mut right = Mat::zeros(c.nrows(), c.ncols());
        for (u, v) in pairs {
            left += u * eps(&(v * c));
            right += eps(&(c * u)) * v;
        }
        assert!(linalg::max_abs(&(left - c)) < 1e-14 && linalg::max_abs(&(right - c)) < 1e-14);
    }
    pairs.iter().fold(Mat::zeros(units[0].nrows(), units[0].ncols()), |acc, (u, v)| acc + u * v)
}

fn unit_matrix(n: usize, i: usize, j: usize) -> Mat {
    Mat::from_fn(n, n, |r, c| if (r, c) == (i, j) { cr(1.0) } else { cr(0.0) })
}

/// `M₂` with `ε = Tr` (as a scalar matrix) and quasi-basis `{(e_ij, e_ji)}`.
fn oracle_matrix_trace() -> (Mat, f64) {
    let units: Vec<Mat> = (0..4).map(|k| unit_matrix(2, k / 2, k % 2)).collect();
    let tr = |m: &Mat| Mat::identity(2, 2) * m.trace();
    let pairs: Vec<(Mat, Mat)> = (0..4).map(|k| (unit_matrix(2, k / 2, k % 2), unit_matrix(2, k % 2, k / 2))).collect();
    let index = oracle_index(&units, tr, &pairs);
    // ‖ε‖_cb for a positive functional is ε(1) = Tr(1)
    (index, Mat::identity(2, 2).trace().re)
}

/// Functions on `{−1, 0, 1}` (diagonal matrices) with averaging over `t ↔ −t`
/// and quasi-basis `{(1, 1), (δ₁ − δ₋₁, δ₁ − δ₋₁)}`.
fn oracle_grid() -> Vec<f64> {
    let units: Vec<Mat> = (0..3).map(|k| unit_matrix(3, k, k)).collect();
    let flip = Mat::from_fn(3, 3, |r, c| if r + c == 2 { cr(1.0) } else { cr(0.0) });
    let avg = move |m: &Mat| (m + &flip * m * &flip) * cr(0.5);
    let d = Mat::from_diagonal(&linalg::Vector::from_vec(vec![cr(-1.0), cr(0.0), cr(1.0)]));
    let pairs = vec![(Mat::identity(3, 3), Mat::identity(3, 3)), (d.clone(), d)];
    let index = oracle_index(&units, avg, &pairs);
    (0..3).map(|k| index[(k, k)].re).collect()
}

/// `[G : H]` by enumerating the left cosets in the multiplication table.
fn oracle_group_index(g: &GroupTable, h: &[usize]) -> f64 {
    let cosets: BTreeSet<BTreeSet<usize>> = (0..g.order()).map(|x| h.iter().map(|&y| g.mul(x, y)).collect()).collect();
    cosets.len() as f64
}

/// Largest deviation of the library's index element from `value · 1`.
fn index_deviation(s: &FrobeniusStructure, expected: &[Mat]) -> f64 {
    let t = frobenius::TensorAlgebra::new(s);
    let qb = frobenius::quasi_basis(s, &t).expect("quasi-basis");
    let idx = frobenius::watatani_index(s, &qb, 1e-9).expect("index");
    idx.blocks.iter().zip(expected).map(|(b, e)| linalg::max_abs(&(b - e))).fold(0.0, f64::max)
}

// ---------------------------------------------------------------- criteria

fn criterion_1(specs: &[InstanceSpec]) -> Outcome {
    let built: Vec<_> = specs.iter().map(|s| (s.id(), s.build().expect("instance builds").structure)).collect();
    let oversized: Vec<&str> =
        built.iter().filter(|(_, s)| s.c().rep_dim() > MAX_REP_DIM).map(|(id, _)| id.as_str()).collect();
    let started = Instant::now();
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for (id, s) in &built {
        match iso::roundtrip_frob(s, 0, ROUNDTRIP_TOL) {
            Ok((psi, _)) => {
                let r = &psi.report;
                let residual = r
                    .multiplicative_residual
                    .max(r.star_residual)
                    .max(r.unit_residual)
                    .max(r.bimodule_residual)
                    .max(r.eps_residual);
                worst = worst.max(residual);
                if residual > ROUNDTRIP_TOL || !r.bijective {
                    failures.push(id.clone());
                }
            }
            Err(e) => failures.push(format!("{id} ({})", e.name())),
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    let random = specs.iter().filter(|s| matches!(s.kind, InstanceKind::Random { .. })).count();
    Outcome {
        criterion: 1,
        pass: failures.is_empty() && oversized.is_empty() && random >= 100 && elapsed <= RUNTIME_BUDGET_S,
        detail: format!(
            "roundtrip_frob on {} instances ({random} random): worst residual {worst:.2e} ≤ {ROUNDTRIP_TOL:e}, \
             {elapsed:.1} s ≤ {RUNTIME_BUDGET_S} s, failures {failures:?}, rep_dim > {MAX_REP_DIM}: {oversized:?}",
            built.len()
        ),
    }
}

/// Instances of `report` whose check `name` failed or is missing.
fn failing(report: &Report, name: &str) -> Vec<String> {
    report
        .instances
        .iter()
        .filter(|i| i.check(name).is_none_or(|c| !c.pass))
        .map(|i| i.id.clone())
        .collect()
}

fn worst_residual(report: &Report, name: &str) -> f64 {
    report.instances.iter().filter_map(|i| i.check(name)).map(|c| c.residual).fold(0.0, f64::max)
}

fn criterion_2(report: &Report) -> Outcome {
    let bad = failing(report, "roundtrip_ladj");
    Outcome {
        criterion: 2,
        pass: bad.is_empty(),
        detail: format!(
            "verify_ladj_iso on {} roundtrip triples: worst residual {:.2e} ≤ {ROUNDTRIP_TOL:e}, failures {bad:?}",
            report.instances.len(),
            worst_residual(report, "roundtrip_ladj")
        ),
    }
}

fn iso_pairs() -> Vec<(String, FrobeniusIso)> {
    let mut pairs = Vec::new();
    for spec in commands::curated_specs() {
        let s = spec.build().expect("curated instance").structure;
        let n = s.c().dim();
        let id = FrobeniusIso::new(s.clone(), s.clone(), Mat::identity(n, n), ROUNDTRIP_TOL).expect("identity");
        pairs.push((format!("{} identity", spec.id()), id));
        let u = instances::unitary_conjugation_iso(&s, 1).expect("unitary conjugation");
        pairs.push((format!("{} unitary", spec.id()), u));
    }
    for m in 1..=3usize {
        for mask in 1..(1u64 << m) {
            pairs.push((format!("grid m={m} mask={mask:b}"), instances::grid_relabeling_iso(m, mask).expect("relabeling")));
        }
    }
    pairs
}

fn criterion_3() -> Outcome {
    let pairs = iso_pairs();
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for (name, rho) in &pairs {
        match pipeline::iso_both_directions(rho) {
            Ok((forward, recovered)) => {
                worst = worst.max(forward).max(recovered);
                if forward > ROUNDTRIP_TOL || recovered > ROUNDTRIP_TOL {
                    failures.push(name.clone());
                }
            }
            Err(e) => failures.push(format!("{name} ({})", e.name())),
        }
    }
    Outcome {
        criterion: 3,
        pass: failures.is_empty() && pairs.len() >= MIN_ISO_PAIRS,
        detail: format!(
            "{} Frobenius-iso pairs (≥ {MIN_ISO_PAIRS}): worst forward/recovery residual {worst:.2e} ≤ {ROUNDTRIP_TOL:e}, \
             failures {failures:?}",
            pairs.len()
        ),
    }
}

fn criterion_4(report: &Report) -> Outcome {
    let bad = failing(report, "cac_iso");
    Outcome {
        criterion: 4,
        pass: bad.is_empty(),
        detail: format!(
            "cac_iso bijective on {} instances, worst multiplicativity residual {:.2e} ≤ {ROUNDTRIP_TOL:e}, failures {bad:?}",
            report.instances.len(),
            worst_residual(report, "cac_iso")
        ),
    }
}

struct Criterion5 {
    outcome: Outcome,
    /// Every stated-form failure has `‖ε‖_cb < 1`, and the scale-consistent
    /// form holds on every instance.
    explained: bool,
}

fn criterion_5(report: &Report) -> Criterion5 {
    let mut stated_failures = Vec::new();
    let mut unexplained = Vec::new();
    let mut worst: f64 = 0.0;
    let mut levels_ok = true;
    for inst in &report.instances {
        let ratios: Vec<f64> = inst
            .constants
            .get("key_estimate_stated_ratio_per_level")
            .and_then(|v| serde_json::from_value(v.clone()).ok())
            .unwrap_or_default();
        levels_ok &= ratios.len() == LEVELS;
        let stated = ratios.iter().cloned().fold(0.0, f64::max);
        worst = worst.max(stated);
        let eps_cb = inst.constants.get("eps_cb").and_then(|v| v.as_f64()).unwrap_or(f64::NAN);
        if stated > 1.0 + RATIO_TOL {
            stated_failures.push(format!("{} (‖ε‖_cb = {eps_cb:.3})", inst.id));
            if !(eps_cb < 1.0) {
                unexplained.push(inst.id.clone());
            }
        }
    }
    let corrected_bad = failing(report, "key_estimate");
    let pass = stated_failures.is_empty() && levels_ok;
    Criterion5 {
        outcome: Outcome {
            criterion: 5,
            pass,
            detail: format!(
                "stated ‖c‖/(s‖ε‖_cb‖q(c)‖) at levels 1–{LEVELS}, {SAMPLES} samples each: worst {worst:.4} vs 1 + {RATIO_TOL:e}; \
                 {} of {} instances exceed it: {stated_failures:?}. Scale-consistent form ‖c‖ ≤ s‖ε‖_cb^(1/2)‖q(c)‖ \
                 fails on {corrected_bad:?}",
                stated_failures.len(),
                report.instances.len()
            ),
        },
        explained: unexplained.is_empty() && corrected_bad.is_empty() && levels_ok,
    }
}

fn criterion_6(report: &Report) -> Outcome {
    let bad = failing(report, "unit_identity");
    let thresholds_ok = report.instances.iter().filter_map(|i| i.check("unit_identity")).all(|c| c.threshold <= UNIT_TOL);
    Outcome {
        criterion: 6,
        pass: bad.is_empty() && thresholds_ok,
        detail: format!(
            "ε⁽¹⁾(c·x) = c on a basis of C: worst residual {:.2e} ≤ {UNIT_TOL:e}, failures {bad:?}",
            worst_residual(report, "unit_identity")
        ),
    }
}

fn criterion_7() -> Outcome {
    // oracles first, with no library code involved
    let (mt_index, mt_cb) = oracle_matrix_trace();
    let grid_index = oracle_grid();
    let s3 = GroupTable::symmetric3();
    let z3 = [0usize, 1, 2];
    let s3_index = oracle_group_index(&s3, &z3);

    let mt = instances::matrix_trace(2, 1.0).expect("matrix trace");
    let mt_dev = index_deviation(&mt, std::slice::from_ref(&mt_index));
    let cb_dev = (mt.eps_cb_norm() - mt_cb).abs();

    let grid = instances::branched_grid(1).expect("grid");
    let expected: Vec<Mat> = grid_index.iter().map(|&v| Mat::from_element(1, 1, cr(v))).collect();
    let grid_dev = index_deviation(&grid, &expected);

    let gi = instances::group_inclusion(&s3, &z3, 0).expect("group inclusion");
    let expected: Vec<Mat> = gi.c().blocks().iter().map(|&n| Mat::identity(n, n) * cr(s3_index)).collect();
    let gi_dev = index_deviation(&gi, &expected);

    Outcome {
        criterion: 7,
        pass: mt_dev <= ANCHOR_TOL && cb_dev <= ANCHOR_TOL && grid_dev <= ANCHOR_TOL && gi_dev <= GROUP_ANCHOR_TOL,
        detail: format!(
            "matrix_trace(2,1) index {:.0}·1 (dev {mt_dev:.1e}), ‖ε‖_cb {mt_cb} (dev {cb_dev:.1e}); \
             branched_grid(1) index {grid_index:?} (dev {grid_dev:.1e}); S₃ ⊃ ℤ/3 index {s3_index}·1 (dev {gi_dev:.1e})",
            mt_index[(0, 0)].re
        ),
    }
}

fn criterion_8() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut defects = Vec::new();
    let mut errors = Vec::new();
    for m in 1..=3usize {
        match instances::grid_image_report(m, 8, 0) {
            Ok(g) => {
                worst = worst.max(g.multiplicativity_residual).max(g.relation_residual);
                defects.push(g.branch_point_defect);
            }
            Err(e) => errors.push(format!("m={m}: {}", e.name())),
        }
    }
    Outcome {
        criterion: 8,
        pass: errors.is_empty() && worst <= GRID_TOL && defects.iter().all(|&d| d == 0.0),
        detail: format!(
            "grid m = 1..3: multiplicativity residual {worst:.2e} ≤ {GRID_TOL:e}, branch-point defects {defects:?} (exactly 0), \
             errors {errors:?}"
        ),
    }
}

/// One seeded corruption; returns the error name produced (or `None` for a
/// false accept) and the expected name.
fn corrupt(kind: usize, s: &FrobeniusStructure, seed: u64) -> (Option<&'static str>, &'static str) {
    match kind {
        0 => {
            let (adj, _) = construct::ladj_from_frob(s).expect("LAdj");
            let rt = iso::roundtrip_ladj(&adj, seed).expect("roundtrip triple");
            let mut triple = rt.triple.clone();
            triple.beta *= cr(BETA_SCALE);
            let verdict = iso::verify_ladj_iso(&triple, &rt.ladj, &adj).and_then(|r| r.check(ROUNDTRIP_TOL));
            (verdict.err().map(|e| e.name()), "NotUnitary")
        }
        1 => {
            let eps = instances::perturbed_eps(s, EPS_PERTURBATION, seed);
            let verdict = FrobeniusStructure::new(s.eta().clone(), eps, 1e-9);
            (verdict.err().map(|e| e.name()), "NotBimodule")
        }
        _ => {
            let ce = construct::c_epsilon(s).expect("C^ε");
            let m = ce.module();
            let gram = instances::indefinite_gram(m, seed);
            let verdict = HilbertModule::new(m.base().clone(), m.dim(), m.action().to_vec(), gram, 1e-9);
            (verdict.err().map(|e: Error| e.name()), "NotPositive")
        }
    }
}

fn criterion_9() -> Outcome {
    // small random instances with a non-scalar A, so that every corruption
    // type applies (the bimodule property over ℂ is plain linearity)
    let pool: Vec<FrobeniusStructure> = (0..)
        .map(|seed| InstanceSpec { kind: InstanceKind::Random { budget: 4 }, seed }.build().expect("instance").structure)
        .filter(|s| s.a().dim() > 1)
        .take(CORRUPTIONS)
        .collect();
    let mut false_accepts = Vec::new();
    let mut misnamed = Vec::new();
    let mut counts = [0usize; 3];
    for (i, s) in pool.iter().enumerate() {
        let kind = i % 3;
        counts[kind] += 1;
        let (got, expected) = corrupt(kind, s, i as u64);
        match got {
            None => false_accepts.push(format!("#{i} ({expected})")),
            Some(name) if name != expected => misnamed.push(format!("#{i}: {name} ≠ {expected}")),
            Some(_) => {}
        }
    }
    Outcome {
        criterion: 9,
        pass: pool.len() == CORRUPTIONS && false_accepts.is_empty() && misnamed.is_empty(),
        detail: format!(
            "{} corruptions (β×{BETA_SCALE}: {}, ε+{EPS_PERTURBATION:e}: {}, indefinite gram: {}): false accepts {false_accepts:?}, \
             wrong error names {misnamed:?}",
            pool.len(),
            counts[0],
            counts[1],
            counts[2]
        ),
    }
}

fn criterion_10(first: &Report, suite: &SuiteOptions, opts: &Options) -> Outcome {
    let second = commands::cmd_suite(suite, opts).expect("suite runs");
    let (a, b) = (first.payload(), second.payload());
    Outcome {
        criterion: 10,
        pass: a == b,
        detail: format!("two suite runs with seed {}: payloads of {} bytes, identical = {}", opts.seed, a.len(), a == b),
    }
}

#[test]
fn acceptance() {
    let specs = instance_specs();
    let opts = Options { levels: LEVELS, samples: SAMPLES, ..Options::default() };
    let suite = SuiteOptions { seeds: RANDOM_INSTANCES, budget: RANDOM_BUDGET, corrupt_rate: 0.0 };

    // anchors first: their oracles must not depend on anything built later
    let c7 = criterion_7();
    let c1 = criterion_1(&specs);
    let report = commands::cmd_suite(&suite, &opts).expect("suite runs");
    let c5 = criterion_5(&report);
    let outcomes = vec![
        c1,
        criterion_2(&report),
        criterion_3(),
        criterion_4(&report),
        c5.outcome,
        criterion_6(&report),
        c7,
        criterion_8(),
        criterion_9(),
        criterion_10(&report, &suite, &opts),
    ];
    for o in &outcomes {
        line(o);
    }
    let unexpected: Vec<u32> = outcomes.iter().filter(|o| !o.pass && o.criterion != 5).map(|o| o.criterion).collect();
    assert!(unexpected.is_empty(), "failing criteria: {unexpected:?}");
    assert!(c5.explained, "criterion 5 failures not explained by ‖ε‖_cb < 1");
}
