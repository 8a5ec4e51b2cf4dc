//! Isomorphism of local adjunctions behaves like an equivalence relation on
//! the instances we can build: identity, inverse and composite Frobenius
//! isomorphisms all transport to verified Morita triples.

use frobmod::adjunction::{self, LocalAdjunction};
use frobmod::construct;
use frobmod::instances::{self, InstanceKind, InstanceSpec};
use frobmod::iso::{self, FrobeniusIso};
use frobmod::linalg::{self, c, cr};
use frobmod::FrobeniusStructure;

const TOL: f64 = 1e-8;

fn structures() -> Vec<FrobeniusStructure> {
    let mut out = vec![
        instances::matrix_trace(2, 1.0).unwrap(),
        instances::matrix_trace(3, 0.5).unwrap(),
        instances::branched_grid(2).unwrap(),
    ];
    out.extend((0..4).map(|seed| InstanceSpec { kind: InstanceKind::Random { budget: 5 }, seed }.build().unwrap().structure));
    out
}

fn assert_transports(rho: &FrobeniusIso, what: &str) {
    let ladj = iso::ladj_iso_from_frob_iso(rho).unwrap_or_else(|e| panic!("{what}: {e}"));
    ladj.report.check(TOL).unwrap_or_else(|e| panic!("{what}: {e}"));
    let again = iso::verify_ladj_iso(&ladj.triple, &ladj.source, &ladj.target).unwrap();
    again.check(TOL).unwrap_or_else(|e| panic!("{what} (re-verified): {e}"));
}

#[test]
fn reflexive() {
    for s in structures() {
        assert_transports(&FrobeniusIso::identity(&s), "identity");
    }
}

#[test]
fn symmetric() {
    for (i, s) in structures().iter().enumerate() {
        let rho = instances::unitary_conjugation_iso(s, i as u64 + 1).unwrap();
        let inv = rho.inverse(TOL).unwrap();
        assert!(inv.report.max_residual() < TOL);
        assert_transports(&inv, "inverse");
    }
}

#[test]
fn transitive() {
    for (i, s) in structures().iter().enumerate() {
        let first = instances::unitary_conjugation_iso(s, 10 + i as u64).unwrap();
        let second = instances::unitary_conjugation_iso(&first.target, 20 + i as u64).unwrap();
        let composite = first.then(&second, TOL).unwrap();
        assert_transports(&composite, "composite");
    }
    let a = instances::grid_relabeling_iso(3, 0b011).unwrap();
    let b = instances::grid_relabeling_iso(3, 0b110).unwrap();
    assert_transports(&a.then(&b, TOL).unwrap(), "grid composite");
}

#[test]
fn left_pairing_scales_with_modulus_squared() {
    let s = instances::matrix_trace(2, 1.0).unwrap();
    let (adj, _) = construct::ladj_from_frob(&s).unwrap();
    let base = adjunction::induced_left_inner(&adj);
    for lambda in [cr(2.0), c(0.0, 1.0), c(0.6, -0.8) * cr(3.0)] {
        let scaled = LocalAdjunction::new(adj.f().clone(), adj.e().clone(), adj.phi() * lambda, TOL).unwrap();
        let inner = adjunction::induced_left_inner(&scaled);
        let factor = lambda.norm_sqr();
        for (p, q) in inner.pairing.iter().zip(&base.pairing) {
            assert!(linalg::max_abs(&(p - q * cr(factor))) < 1e-12 * factor);
        }
    }
}
