//! Local adjunctions: conjugate-linear bimodule-twisting bijections `φ: F → E`
//! between a correspondence `ₐF_B` and a correspondence `ᵦE_A`.
//!
//! A conjugate-linear map is stored as a linear matrix composed with
//! coordinatewise conjugation: `φ(f) = phi · conj(f)`.

use serde::Serialize;

use crate::algebra::{self, Algebra, Element};
use crate::correspondence::{self, Correspondence, TensorModule};
use crate::error::{Error, Result};
use crate::hilbert_module::{self, HilbertModule, ModuleMap, OperatorSpace};
use crate::linalg::{self, cr, Mat, Vector};

#[derive(Debug, Clone)]
pub struct LocalAdjunction {
    f: Correspondence,
    e: Correspondence,
    phi: Mat,
    phi_inverse: Mat,
}

#[derive(Debug, Clone, Serialize)]
pub struct TwistReport {
    pub left_twist_residual: f64,
    pub right_twist_residual: f64,
    pub triple_residual: f64,
}

impl TwistReport {
    pub fn max(&self) -> f64 {
        self.left_twist_residual.max(self.right_twist_residual).max(self.triple_residual)
    }
}

impl LocalAdjunction {
    /// Validates `φ` (the `make_local_adjunction` operation).
    pub fn new(f: Correspondence, e: Correspondence, phi: Mat, tol: f64) -> Result<Self> {
        if f.left() != e.right() || f.right() != e.left() {
            return Err(Error::TypeMismatch("E must go from B to A when F goes from A to B".into()));
        }
        if phi.shape() != (e.dim(), f.dim()) {
            return Err(Error::DimensionMismatch(format!(
                "phi must be {}x{}, got {}x{}",
                e.dim(),
                f.dim(),
                phi.nrows(),
                phi.ncols()
            )));
        }
        if e.dim() != f.dim() || linalg::rank(&phi) < f.dim() {
            return Err(Error::NotBijective);
        }
        let inv = phi.clone().try_inverse().ok_or(Error::NotBijective)?;
        // φ^{-1}(x) = conj(phi^{-1}) conj(x)
        let phi_inverse = linalg::conj_mat(&inv);
        let roundtrip = linalg::max_abs(&(&phi_inverse * linalg::conj_mat(&phi) - Mat::identity(f.dim(), f.dim())));
        if roundtrip > tol * linalg::max_abs(&phi).max(1.0) * linalg::max_abs(&inv).max(1.0) {
            return Err(Error::NotBijective);
        }
        let adj = LocalAdjunction { f, e, phi, phi_inverse };
        let report = adj.twist_report(0);
        let scale = linalg::max_abs(&adj.phi).max(1.0);
        if report.max() > tol * scale {
            return Err(Error::TwistViolation { residual: report.max() });
        }
        Ok(adj)
    }

    pub fn f(&self) -> &Correspondence {
        &self.f
    }

    pub fn e(&self) -> &Correspondence {
        &self.e
    }

    pub fn phi(&self) -> &Mat {
        &self.phi
    }

    pub fn phi_inverse(&self) -> &Mat {
        &self.phi_inverse
    }

    pub fn apply(&self, f: &Vector) -> Vector {
        &self.phi * linalg::conj_vec(f)
    }

    pub fn apply_inverse(&self, e: &Vector) -> Vector {
        &self.phi_inverse * linalg::conj_vec(e)
    }

    /// The adjunction `φ^{-1}: E → F` read in the opposite direction.
    pub fn inverse(&self) -> LocalAdjunction {
        LocalAdjunction {
            f: self.e.clone(),
            e: self.f.clone(),
            phi: self.phi_inverse.clone(),
            phi_inverse: self.phi.clone(),
        }
    }

    /// Residuals of `φ(a f) = φ(f) a*`, `φ(f b) = b* φ(f)` on matrix units,
    /// and of the full identity `φ(a f b) = b* φ(f) a*` on seeded random
    /// triples.
    pub fn twist_report(&self, seed: u64) -> TwistReport {
        let a = self.f.left();
        let b = self.f.right();
        let mut left: f64 = 0.0;
        for k in 0..a.dim() {
            let lhs = &self.phi * linalg::conj_mat(&self.f.eta()[k]);
            let rhs = &self.e.module().action()[a.star_index(k)] * &self.phi;
            left = left.max(linalg::max_abs(&(lhs - rhs)));
        }
        let mut right: f64 = 0.0;
        for l in 0..b.dim() {
            let lhs = &self.phi * linalg::conj_mat(&self.f.module().action()[l]);
            let rhs = &self.e.eta()[b.star_index(l)] * &self.phi;
            right = right.max(linalg::max_abs(&(lhs - rhs)));
        }
        let mut rng = linalg::rng_from_seed(seed);
        let mut triple: f64 = 0.0;
        for _ in 0..4 {
            let x = a.random_element(&mut rng);
            let y = b.random_element(&mut rng);
            let v = Vector::from_fn(self.f.dim(), |_, _| linalg::random_complex(&mut rng));
            let afb = self.f.module().act(&(self.f.left_action(&x) * &v), &y);
            let lhs = self.apply(&afb);
            let rhs = self.e.module().act(&(self.e.left_action(&y.star()) * self.apply(&v)), &x.star());
            triple = triple.max((lhs - rhs).norm());
        }
        TwistReport { left_twist_residual: left, right_twist_residual: right, triple_residual: triple }
    }
}

/// Result of [`cb_norm_estimate`].
#[derive(Debug, Clone, Serialize)]
pub struct CbNorm {
    /// `‖T(1)‖` when `T` is completely positive.
    pub exact: Option<f64>,
    /// Heuristic lower bounds for `‖T_n‖`, `n = 1..=levels`.
    pub lower_bounds: Vec<f64>,
}

const CB_RESTARTS: usize = 8;
const CB_ITERATIONS: usize = 200;

/// Completely bounded norm of a linear map `T: source → target` given on
/// coordinates. Completely positive maps get the exact value `‖T(1)‖`; the
/// amplified norms are always estimated by alternating maximisation.
pub fn cb_norm_estimate(source: &Algebra, target: &Algebra, map: &Mat, levels: usize, seed: u64) -> CbNorm {
    let cp = algebra::choi_min_eigenvalue(source, target, map) >= -1e-10 * linalg::max_abs(map).max(1.0);
    let exact = cp.then(|| algebra::apply_map(source, target, map, &source.unit()).norm());
    let lower_bounds = (1..=levels)
        .map(|n| amplified_norm_lower_bound(source, target, map, n, seed.wrapping_add(n as u64)))
        .collect();
    CbNorm { exact, lower_bounds }
}

fn amplify(source: &Algebra, target: &Algebra, map: &Mat, n: usize, x: &Element) -> Element {
    let mut entries = Vec::with_capacity(n * n);
    for r in 0..n {
        for c in 0..n {
            let e = source.entry(n, x, r, c);
            entries.push(algebra::apply_map(source, target, map, &e));
        }
    }
    target.assemble(n, &entries)
}

/// Alternating maximisation of `|u^H T_n(X) v|` over unit vectors and the
/// unit ball of `M_n(source)`.
fn amplified_norm_lower_bound(source: &Algebra, target: &Algebra, map: &Mat, n: usize, seed: u64) -> f64 {
    let an = source.amplified(n);
    let bn = target.amplified(n);
    let adjoint = map.adjoint();
    let mut rng = linalg::rng_from_seed(seed);
    let mut best: f64 = 0.0;
    for _ in 0..CB_RESTARTS {
        let mut x = polar(&an.random_element(&mut rng));
        let mut value = 0.0;
        for _ in 0..CB_ITERATIONS {
            let tx = bn.represent(&amplify(source, target, map, n, &x));
            let svd = linalg::svd(&tx, false);
            let (i_max, s_max) = svd
                .s
                .iter()
                .cloned()
                .enumerate()
                .fold((0, -1.0), |acc, (i, s)| if s > acc.1 { (i, s) } else { acc });
            let u = svd.u.column(i_max).into_owned();
            let v = svd.v.column(i_max).into_owned();
            let w = bn.from_representation(&(&u * v.adjoint()));
            let pulled = amplify(target, source, &adjoint, n, &w);
            x = polar(&pulled);
            let changed = (s_max - value).abs() <= 1e-12 * s_max.max(1.0);
            value = s_max;
            if changed {
                break;
            }
        }
        best = best.max(value);
    }
    best
}

/// Blockwise unitary polar part `U V^H`.
fn polar(x: &Element) -> Element {
    Element {
        blocks: x
            .blocks
            .iter()
            .map(|b| {
                let svd = linalg::svd(b, false);
                svd.u * svd.v.adjoint()
            })
            .collect(),
    }
}

/// A linear isomorphism between two spaces of compact operators, together
/// with its well-definedness and invertibility certificates.
#[derive(Debug, Clone)]
pub struct CompactsIso {
    /// Acts on row-major vectorisations of operators.
    pub map: Mat,
    pub domain: OperatorSpace,
    pub codomain: OperatorSpace,
    pub well_defined_residual: f64,
    pub rank: usize,
}

impl CompactsIso {
    fn from_generators(domain: OperatorSpace, codomain: OperatorSpace, src: &[Mat], img: &[Mat]) -> Result<Self> {
        let s = linalg::columns(&src.iter().map(linalg::vec_of).collect::<Vec<_>>(), domain.rows * domain.cols);
        let t = linalg::columns(&img.iter().map(linalg::vec_of).collect::<Vec<_>>(), codomain.rows * codomain.cols);
        let map = linalg::lstsq(&s.transpose(), &t.transpose()).transpose();
        let well_defined_residual = linalg::max_abs(&(&map * &s - &t));
        let restricted = codomain.basis.adjoint() * &map * &domain.basis;
        let rank = linalg::rank(&restricted);
        if domain.dim() != codomain.dim() {
            return Err(Error::DimensionMismatch(format!(
                "domain has dimension {}, codomain {}",
                domain.dim(),
                codomain.dim()
            )));
        }
        if rank < domain.dim() {
            return Err(Error::NotInvertible);
        }
        Ok(CompactsIso { map, domain, codomain, well_defined_residual, rank })
    }

    pub fn apply(&self, k: &Mat) -> Mat {
        linalg::unvec(&(&self.map * linalg::vec_of(k)), self.codomain.rows, self.codomain.cols)
    }

    pub fn is_invertible(&self) -> bool {
        self.rank == self.domain.dim() && self.domain.dim() == self.codomain.dim()
    }
}

/// Everything `Φ_{X,Y}` and `Φ†_{X,Y}` need: the tensor modules `Y ⊗ F` and
/// `X ⊗ E`.
#[derive(Debug, Clone)]
pub struct PhiContext {
    pub x: HilbertModule,
    pub y: HilbertModule,
    pub y_f: TensorModule,
    pub x_e: TensorModule,
}

impl PhiContext {
    pub fn new(adj: &LocalAdjunction, x: &HilbertModule, y: &HilbertModule) -> Result<Self> {
        if x.base() != adj.f.right() || y.base() != adj.f.left() {
            return Err(Error::TypeMismatch("X must be over B and Y over A".into()));
        }
        Ok(PhiContext {
            x: x.clone(),
            y: y.clone(),
            y_f: correspondence::interior_tensor(y, &adj.f)?,
            x_e: correspondence::interior_tensor(x, &adj.e)?,
        })
    }
}

/// `Φ_{X,Y}: K_B(X, Y⊗F) → K_A(X⊗E, Y)`, `|y⊗f⟩⟨x| ↦ |y⟩⟨x⊗φ(f)|`.
pub fn nat_iso_phi(adj: &LocalAdjunction, ctx: &PhiContext) -> Result<CompactsIso> {
    let (x, y) = (&ctx.x, &ctx.y);
    let domain = hilbert_module::compacts_space(x, &ctx.y_f.module)?;
    let codomain = hilbert_module::compacts_space(&ctx.x_e.module, y)?;
    let mut src = Vec::new();
    let mut img = Vec::new();
    for iy in 0..y.dim() {
        for jf in 0..adj.f.dim() {
            let ef = unit(adj.f.dim(), jf);
            let yf = ctx.y_f.simple(&y.basis_vector(iy), &ef);
            let phif = adj.apply(&ef);
            for ix in 0..x.dim() {
                src.push(hilbert_module::rank_one_matrix(x, &ctx.y_f.module, &yf, &x.basis_vector(ix)));
                let xphi = ctx.x_e.simple(&x.basis_vector(ix), &phif);
                img.push(hilbert_module::rank_one_matrix(&ctx.x_e.module, y, &y.basis_vector(iy), &xphi));
            }
        }
    }
    CompactsIso::from_generators(domain, codomain, &src, &img)
}

/// `Φ†_{X,Y}: K_B(Y⊗F, X) → K_A(Y, X⊗E)`, `|x⟩⟨y⊗f| ↦ |x⊗φ(f)⟩⟨y|`.
pub fn dagger_phi(adj: &LocalAdjunction, ctx: &PhiContext) -> Result<CompactsIso> {
    let (x, y) = (&ctx.x, &ctx.y);
    let domain = hilbert_module::compacts_space(&ctx.y_f.module, x)?;
    let codomain = hilbert_module::compacts_space(y, &ctx.x_e.module)?;
    let mut src = Vec::new();
    let mut img = Vec::new();
    for iy in 0..y.dim() {
        for jf in 0..adj.f.dim() {
            let ef = unit(adj.f.dim(), jf);
            let yf = ctx.y_f.simple(&y.basis_vector(iy), &ef);
            let phif = adj.apply(&ef);
            for ix in 0..x.dim() {
                src.push(hilbert_module::rank_one_matrix(&ctx.y_f.module, x, &x.basis_vector(ix), &yf));
                let xphi = ctx.x_e.simple(&x.basis_vector(ix), &phif);
                img.push(hilbert_module::rank_one_matrix(y, &ctx.x_e.module, &xphi, &y.basis_vector(iy)));
            }
        }
    }
    CompactsIso::from_generators(domain, codomain, &src, &img)
}

fn unit(d: usize, i: usize) -> Vector {
    let mut v = Vector::zeros(d);
    v[i] = cr(1.0);
    v
}

/// Largest `‖Φ(k)* − Φ†(k*)‖` over a basis of the domain of `Φ`.
pub fn phi_dagger_compatibility(ctx: &PhiContext, phi: &CompactsIso, dagger: &CompactsIso) -> f64 {
    let mut res: f64 = 0.0;
    for k in phi.domain.elements() {
        let pk = phi.apply(&k);
        let pk_star = HilbertModule::adjoint_matrix_between(&ctx.x_e.module, &ctx.y, &pk);
        let k_star = HilbertModule::adjoint_matrix_between(&ctx.x, &ctx.y_f.module, &k);
        res = res.max(linalg::op_norm(&(pk_star - dagger.apply(&k_star))));
    }
    res
}

/// Naturality of `Φ` in both variables: for adjointable `s: X → X` and module
/// maps `t: Y → Y`, `Φ((t⊗id) k s) = t Φ(k) (s⊗id)` on a basis of `k`.
pub fn naturality_residual(adj: &LocalAdjunction, ctx: &PhiContext, phi: &CompactsIso, s_maps: &[ModuleMap], t_maps: &[ModuleMap]) -> Result<f64> {
    let mut res: f64 = 0.0;
    let basis = phi.domain.elements();
    for s in s_maps {
        let s_e = correspondence::tensor_of_map(s, &adj.e, &ctx.x_e, &ctx.x_e, 1e-8)?;
        for t in t_maps {
            let t_f = correspondence::tensor_of_map(t, &adj.f, &ctx.y_f, &ctx.y_f, 1e-8)?;
            for k in &basis {
                let lhs = phi.apply(&(&t_f.matrix * k * &s.matrix));
                let rhs = &t.matrix * phi.apply(k) * &s_e.matrix;
                res = res.max(linalg::op_norm(&(lhs - rhs)));
            }
        }
    }
    Ok(res)
}

/// Rank-one maps between module basis vectors, the default naturality test set.
pub fn rank_one_test_maps(x: &HilbertModule) -> Vec<ModuleMap> {
    let mut out = Vec::new();
    for i in 0..x.dim() {
        for j in 0..x.dim() {
            out.push(hilbert_module::rank_one(x, x, &x.basis_vector(i), &x.basis_vector(j)).expect("same base"));
        }
    }
    out
}

/// The left `A`-valued pairing `⟨f₁, f₂⟩ = ⟨φ(f₁)|φ(f₂)⟩` on `F`, linear in
/// the first variable: coordinate `k` equals `f₁^T pairing[k] conj(f₂)`.
#[derive(Debug, Clone)]
pub struct LeftInner {
    pub algebra: Algebra,
    pub pairing: Vec<Mat>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LeftInnerReport {
    pub min_eigenvalue: f64,
    pub left_linearity_residual: f64,
    pub right_balance_residual: f64,
}

impl LeftInner {
    pub fn eval(&self, f1: &Vector, f2: &Vector) -> Element {
        let c2 = linalg::conj_vec(f2);
        let coords = Vector::from_iterator(
            self.algebra.dim(),
            self.pairing.iter().map(|m| (f1.transpose() * m * &c2)[(0, 0)]),
        );
        self.algebra.from_coords(&coords)
    }
}

/// The induced left inner product on `F`.
pub fn induced_left_inner(adj: &LocalAdjunction) -> LeftInner {
    let pairing = adj
        .e
        .module()
        .gram()
        .iter()
        .map(|g| adj.phi.adjoint() * g * &adj.phi)
        .collect();
    LeftInner { algebra: adj.f.left().clone(), pairing }
}

/// Positivity of `[π(⟨e_i, e_j⟩)]` and the module axioms
/// `⟨a f₁, f₂⟩ = a⟨f₁, f₂⟩`, `⟨f₁ b, f₂⟩ = ⟨f₁, f₂ b*⟩` on seeded samples.
pub fn check_left_inner(adj: &LocalAdjunction, inner: &LeftInner, seed: u64) -> LeftInnerReport {
    let a = &inner.algebra;
    let d = adj.f.dim();
    let n = a.rep_dim();
    let mut big = Mat::zeros(d * n, d * n);
    for i in 0..d {
        for j in 0..d {
            let v = a.represent(&inner.eval(&unit(d, i), &unit(d, j)));
            big.view_mut((i * n, j * n), (n, n)).copy_from(&v);
        }
    }
    let min_eigenvalue = linalg::min_eigenvalue(&big);
    let mut rng = linalg::rng_from_seed(seed);
    let (mut lin, mut bal): (f64, f64) = (0.0, 0.0);
    let b = adj.f.right();
    for _ in 0..4 {
        let f1 = Vector::from_fn(d, |_, _| linalg::random_complex(&mut rng));
        let f2 = Vector::from_fn(d, |_, _| linalg::random_complex(&mut rng));
        let x = a.random_element(&mut rng);
        let y = b.random_element(&mut rng);
        let lhs = inner.eval(&(adj.f.left_action(&x) * &f1), &f2);
        lin = lin.max(lhs.dist(&(&x * &inner.eval(&f1, &f2))));
        let l = inner.eval(&adj.f.module().act(&f1, &y), &f2);
        let r = inner.eval(&f1, &adj.f.module().act(&f2, &y.star()));
        bal = bal.max(l.dist(&r));
    }
    LeftInnerReport { min_eigenvalue, left_linearity_residual: lin, right_balance_residual: bal }
}

#[derive(Debug, Clone, Serialize)]
pub struct AdjunctionReport {
    pub left_action_compact_residual: f64,
    pub right_action_compact_residual: f64,
    pub is_adjunction: bool,
    /// Always true in finite dimension: every adjointable operator is compact.
    pub finite_dimensional_collapse: bool,
}

/// Checks `η_F(A) ⊆ K_B(F)` and `η_E(B) ⊆ K_A(E)`.
pub fn is_adjunction(adj: &LocalAdjunction, tol: f64) -> Result<AdjunctionReport> {
    let kf = hilbert_module::compacts_space(adj.f.module(), adj.f.module())?;
    let ke = hilbert_module::compacts_space(adj.e.module(), adj.e.module())?;
    let lf = adj.f.eta().iter().map(|m| kf.membership_residual(m)).fold(0.0, f64::max);
    let le = adj.e.eta().iter().map(|m| ke.membership_residual(m)).fold(0.0, f64::max);
    Ok(AdjunctionReport {
        left_action_compact_residual: lf,
        right_action_compact_residual: le,
        is_adjunction: lf <= tol && le <= tol,
        finite_dimensional_collapse: hilbert_module::check_k_equals_l(adj.f.module(), tol)?.equal
            && hilbert_module::check_k_equals_l(adj.e.module(), tol)?.equal,
    })
}

/// The star adjunction `a ↦ a*` on the identity correspondence `ₐA_A`.
pub fn star_adjunction(a: &Algebra) -> LocalAdjunction {
    let id = Correspondence::identity(a);
    LocalAdjunction::new(id.clone(), id, a.star_matrix(), 1e-9).expect("star is a local adjunction")
}
