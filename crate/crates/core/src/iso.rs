//! Isomorphisms of Frobenius structures and of local adjunctions.
//!
//! A Frobenius isomorphism is a `*`-isomorphism `ρ: C → C'` with
//! `ρ∘η = η'` and `ε'∘ρ = ε`. An isomorphism of local adjunctions
//! `φ' → φ` is a triple `(G, α, β)`: a Morita equivalence `G` from `I_{F'}` to
//! `I_F` and unitaries `α: F' ⊗ G → F`, `β: G⋆ ⊗ E' → E` with
//! `φ(α(f' ⊗ g)) = β(⟨g| ⊗ φ'(f'))`.

use serde::Serialize;

use crate::adjunction::LocalAdjunction;
use crate::algebra::{self, Algebra, StarHom};
use crate::construct::{self, FrobOfLadj};
use crate::correspondence::{self, Correspondence, TensorModule};
use crate::error::{Error, Result};
use crate::frobenius::FrobeniusStructure;
use crate::hilbert_module::{self, HilbertModule};
use crate::linalg::{self, Mat, Vector};

#[derive(Debug, Clone, Serialize)]
pub struct FrobeniusIsoReport {
    pub multiplicative_residual: f64,
    pub star_residual: f64,
    pub unit_residual: f64,
    pub rank: usize,
    pub bijective: bool,
    /// `‖ρ∘η − η'‖`; together with multiplicativity this is the bimodule property.
    pub bimodule_residual: f64,
    /// `‖ε'∘ρ − ε‖`.
    pub eps_residual: f64,
}

impl FrobeniusIsoReport {
    pub fn max_residual(&self) -> f64 {
        self.multiplicative_residual
            .max(self.star_residual)
            .max(self.unit_residual)
            .max(self.bimodule_residual)
            .max(self.eps_residual)
    }
}

/// A verified isomorphism of Frobenius structures over the same `A`.
#[derive(Debug, Clone)]
pub struct FrobeniusIso {
    pub source: FrobeniusStructure,
    pub target: FrobeniusStructure,
    pub rho: Mat,
    pub report: FrobeniusIsoReport,
}

/// Measures every Frobenius-isomorphism residual of `rho` without judging.
pub fn frobenius_iso_report(source: &FrobeniusStructure, target: &FrobeniusStructure, rho: &Mat) -> Result<FrobeniusIsoReport> {
    if source.a() != target.a() {
        return Err(Error::TypeMismatch("Frobenius structures over different base algebras".into()));
    }
    if rho.shape() != (target.c().dim(), source.c().dim()) {
        return Err(Error::DimensionMismatch(format!(
            "rho is {:?}, expected {:?}",
            rho.shape(),
            (target.c().dim(), source.c().dim())
        )));
    }
    let h = StarHom::unchecked(source.c().clone(), target.c().clone(), rho.clone());
    let hom = algebra::check_hom(&h, 0.0)?;
    let unit = h.apply(&source.c().unit()).dist(&target.c().unit());
    let rank = linalg::rank(rho);
    let bimodule = linalg::max_abs(&(rho * source.eta().matrix() - target.eta().matrix()));
    let eps = linalg::max_abs(&(target.eps() * rho - source.eps()));
    Ok(FrobeniusIsoReport {
        multiplicative_residual: hom.multiplicative_residual,
        star_residual: hom.star_residual,
        unit_residual: unit,
        rank,
        bijective: rank == source.c().dim() && rank == target.c().dim(),
        bimodule_residual: bimodule,
        eps_residual: eps,
    })
}

impl FrobeniusIso {
    pub fn new(source: FrobeniusStructure, target: FrobeniusStructure, rho: Mat, tol: f64) -> Result<Self> {
        let report = frobenius_iso_report(&source, &target, &rho)?;
        if !report.bijective {
            return Err(Error::NotFrobeniusIso(format!("rank {} is not full", report.rank)));
        }
        let worst = report.max_residual();
        if worst > tol {
            return Err(Error::NotFrobeniusIso(format!("residual {worst:e} exceeds {tol:e}")));
        }
        Ok(FrobeniusIso { source, target, rho, report })
    }

    pub fn identity(s: &FrobeniusStructure) -> Self {
        let d = s.c().dim();
        FrobeniusIso::new(s.clone(), s.clone(), Mat::identity(d, d), 1e-12).expect("identity is an isomorphism")
    }

    pub fn inverse(&self, tol: f64) -> Result<Self> {
        let inv = self.rho.clone().try_inverse().ok_or(Error::NotInvertible)?;
        FrobeniusIso::new(self.target.clone(), self.source.clone(), inv, tol)
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &FrobeniusIso, tol: f64) -> Result<Self> {
        FrobeniusIso::new(self.source.clone(), other.target.clone(), &other.rho * &self.rho, tol)
    }
}

/// Transports a Frobenius structure along a `*`-isomorphism `ρ: C → C'`,
/// producing `(C', ρ∘η, ε∘ρ⁻¹)` and the isomorphism onto it.
pub fn transport(s: &FrobeniusStructure, target: &Algebra, rho: &Mat, tol: f64) -> Result<FrobeniusIso> {
    let inv = rho.clone().try_inverse().ok_or(Error::NotInvertible)?;
    let eta = StarHom::new(s.a().clone(), target.clone(), rho * s.eta().matrix(), tol)?;
    let t = FrobeniusStructure::new(eta, s.eps() * inv, tol)?;
    FrobeniusIso::new(s.clone(), t, rho.clone(), tol)
}

/// The two-sided ideal `I_X` spanned by the inner products of a module.
#[derive(Debug, Clone)]
pub struct Ideal {
    pub algebra: Algebra,
    /// Orthonormal coordinate basis (`dim(B) × r`).
    pub basis: Mat,
    /// `max ‖(1 − P)(x b)‖, ‖(1 − P)(b x)‖` over ideal and algebra bases.
    pub closure_residual: f64,
}

impl Ideal {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn projection(&self) -> Mat {
        &self.basis * self.basis.adjoint()
    }
}

/// `I_X = span{⟨x₁|x₂⟩}` (the `ideal_of_module` operation).
pub fn ideal_of_module(x: &HilbertModule) -> Ideal {
    let b = x.base();
    let d = x.dim();
    let mut cols = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            cols.push(Vector::from_iterator(b.dim(), x.gram().iter().map(|g| g[(i, j)])));
        }
    }
    let basis = if cols.is_empty() {
        Mat::zeros(b.dim(), 0)
    } else {
        linalg::column_span(&linalg::columns(&cols, b.dim()))
    };
    let proj = &basis * basis.adjoint();
    let comp = Mat::identity(b.dim(), b.dim()) - &proj;
    let mut closure: f64 = 0.0;
    for k in 0..basis.ncols() {
        let xk = b.from_coords(&basis.column(k).into_owned());
        for bb in b.basis() {
            closure = closure.max((&comp * b.coords(&(&xk * &bb))).norm());
            closure = closure.max((&comp * b.coords(&(&bb * &xk))).norm());
        }
    }
    Ideal { algebra: b.clone(), basis, closure_residual: closure }
}

/// `G⋆ = K_B(G, B)` and the canonical local adjunction `g ↦ ⟨g|`.
///
/// Elements `⟨g|` are stored by the linear coordinates `conj(g)`.
#[derive(Debug, Clone)]
pub struct DualMorita {
    pub dual: Correspondence,
    pub canonical: LocalAdjunction,
    /// `dim K_B(G)`, which the left action of `B'` covers.
    pub compacts_dim: usize,
}

/// Builds `G⋆` for a correspondence `G: B' → B` whose left action maps onto
/// `K_B(G)` (the `dual_morita` operation).
pub fn dual_morita(g: &Correspondence) -> Result<DualMorita> {
    let gm = g.module();
    let (bp, b) = (g.left(), g.right());
    let d = g.dim();
    // K_B(G) = L_B(G): the left action lies in it exactly when it commutes
    // with the right action, and then fills it exactly when ranks agree
    let k_dim = hilbert_module::compacts_dim(gm);
    let vecs: Vec<Vector> = g.eta().iter().map(linalg::vec_of).collect();
    let act = linalg::columns(&vecs, d * d);
    // minimal-norm preimages land in the ideal complementary to the kernel
    let (inv, image_rank) = linalg::pinv_and_rank(&act);
    let scale = g.eta().iter().map(linalg::max_abs).fold(1.0, f64::max);
    let in_k = g.eta().iter().map(|m| hilbert_module::module_map_residual(gm, gm, m)).fold(0.0, f64::max) / scale;
    if image_rank != k_dim || in_k > 1e-8 {
        return Err(Error::NotMorita(format!(
            "left action has rank {image_rank}, compacts have dimension {k_dim}, commutation residual {in_k:e}"
        )));
    }

    // u ↦ ⟨g|·b' = ⟨b'* g|, u ↦ b·⟨g| = ⟨g b*|
    let action: Vec<Mat> = (0..bp.dim()).map(|m| linalg::conj_mat(&g.eta()[bp.star_index(m)])).collect();
    let left: Vec<Mat> = (0..b.dim()).map(|m| linalg::conj_mat(&gm.action()[b.star_index(m)])).collect();
    // ⟨⟨g₁|,⟨g₂|⟩ = |g₁⟩⟨g₂|, sesquilinear in (u₁, u₂)
    let mut gram = vec![Mat::zeros(d, d); bp.dim()];
    for p in 0..d {
        for q in 0..d {
            let mut op = Mat::zeros(d, d);
            for (r, gk) in gm.action().iter().zip(gm.gram()) {
                op += r.column(p) * gk.row(q);
            }
            let coords = &inv * linalg::vec_of(&op);
            for (m, gr) in gram.iter_mut().enumerate() {
                gr[(p, q)] = coords[m];
            }
        }
    }
    let module = HilbertModule::new(bp.clone(), d, action, gram, 1e-8)?;
    let dual = Correspondence::new(b.clone(), module, left, 1e-8)?;
    let canonical = LocalAdjunction::new(g.clone(), dual.clone(), Mat::identity(d, d), 1e-8)?;
    Ok(DualMorita { dual, canonical, compacts_dim: k_dim })
}

/// Residuals of the imprimitivity identities `G⋆ ⊗ G ≅ I_G` and
/// `G ⊗ G⋆ ≅ I'` (the latter inside `B'`).
#[derive(Debug, Clone, Serialize)]
pub struct ImprimitivityReport {
    pub dual_then_g_inner_product: f64,
    pub dual_then_g_rank_defect: usize,
    pub g_then_dual_inner_product: f64,
    pub g_then_dual_rank_defect: usize,
}

impl ImprimitivityReport {
    pub fn max_residual(&self) -> f64 {
        self.dual_then_g_inner_product.max(self.g_then_dual_inner_product)
    }

    pub fn ok(&self, tol: f64) -> bool {
        self.max_residual() <= tol && self.dual_then_g_rank_defect == 0 && self.g_then_dual_rank_defect == 0
    }
}

pub fn imprimitivity(g: &Correspondence, dual: &DualMorita) -> Result<ImprimitivityReport> {
    let gs = &dual.dual;
    // ⟨g₁| ⊗ g₂ ↦ ⟨g₁|g₂⟩ ∈ B
    let b = g.right();
    let t1 = correspondence::interior_tensor(gs.module(), g)?;
    let std_b = HilbertModule::standard(b);
    let mut cols = Vec::new();
    for p in 0..gs.dim() {
        let g1 = linalg::conj_vec(&gs.module().basis_vector(p));
        for q in 0..g.dim() {
            cols.push(b.coords(&g.module().inner(&g1, &g.module().basis_vector(q))));
        }
    }
    let m1 = linalg::mul(&linalg::columns(&cols, b.dim()), &t1.lift);
    let (ip1, _) = correspondence::unitary_residuals(&t1.module, &std_b, &m1);
    let ideal_g = ideal_of_module(g.module());
    let defect1 = ideal_g.dim().abs_diff(linalg::rank(&m1)) + t1.dim().abs_diff(ideal_g.dim());

    // g₁ ⊗ ⟨g₂| ↦ ⟨⟨g₁|,⟨g₂|⟩ ∈ B'
    let bp = g.left();
    let t2 = correspondence::interior_tensor(g.module(), gs)?;
    let std_bp = HilbertModule::standard(bp);
    let mut cols = Vec::new();
    for p in 0..g.dim() {
        let u1 = linalg::conj_vec(&g.module().basis_vector(p));
        for q in 0..gs.dim() {
            cols.push(bp.coords(&gs.module().inner(&u1, &gs.module().basis_vector(q))));
        }
    }
    let m2 = linalg::mul(&linalg::columns(&cols, bp.dim()), &t2.lift);
    let (ip2, _) = correspondence::unitary_residuals(&t2.module, &std_bp, &m2);
    let ideal_dual = ideal_of_module(gs.module());
    let defect2 = ideal_dual.dim().abs_diff(linalg::rank(&m2)) + t2.dim().abs_diff(ideal_dual.dim());
    Ok(ImprimitivityReport {
        dual_then_g_inner_product: ip1,
        dual_then_g_rank_defect: defect1,
        g_then_dual_inner_product: ip2,
        g_then_dual_rank_defect: defect2,
    })
}

/// A candidate isomorphism `(G, α, β): φ' → φ` of local adjunctions.
#[derive(Debug, Clone)]
pub struct MoritaTriple {
    pub g: Correspondence,
    /// `F' ⊗_{B'} G → F` on quotient coordinates.
    pub alpha: Mat,
    /// `G⋆ ⊗_{B'} E' → E` on quotient coordinates.
    pub beta: Mat,
}

#[derive(Debug, Clone, Serialize)]
pub struct UnitaryCheck {
    pub inner_product_residual: f64,
    pub right_module_residual: f64,
    pub left_module_residual: f64,
    pub rank: usize,
    pub dim_source: usize,
    pub dim_target: usize,
}

impl UnitaryCheck {
    pub fn max_residual(&self) -> f64 {
        self.inner_product_residual.max(self.right_module_residual).max(self.left_module_residual)
    }

    pub fn bijective(&self) -> bool {
        self.rank == self.dim_source && self.rank == self.dim_target
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LadjIsoReport {
    /// `‖P_{I_G} − P_{I_F}‖`.
    pub ideal_residual: f64,
    pub ideal_dims: (usize, usize),
    /// `dim I_{F'}`, rank of the left action on it, and `dim K_B(G)`.
    pub morita_dims: (usize, usize, usize),
    pub alpha: UnitaryCheck,
    pub beta: UnitaryCheck,
    /// `max ‖φα(f'⊗g) − β(⟨g|⊗φ'(f'))‖` over basis pairs (relative).
    pub compatibility_residual: f64,
    pub imprimitivity: ImprimitivityReport,
}

impl LadjIsoReport {
    pub fn morita_ok(&self) -> bool {
        let (i, r, k) = self.morita_dims;
        i == r && r == k && self.ideal_dims.0 == self.ideal_dims.1
    }

    pub fn max_residual(&self) -> f64 {
        self.ideal_residual
            .max(self.alpha.max_residual())
            .max(self.beta.max_residual())
            .max(self.compatibility_residual)
            .max(self.imprimitivity.max_residual())
    }

    /// Rejects with the first failing invariant's named error.
    pub fn check(&self, tol: f64) -> Result<()> {
        if !self.morita_ok() || self.ideal_residual > tol || !self.imprimitivity.ok(tol) {
            return Err(Error::NotMorita(format!(
                "ideal residual {:e}, dims {:?} / {:?}",
                self.ideal_residual, self.ideal_dims, self.morita_dims
            )));
        }
        for u in [&self.alpha, &self.beta] {
            if u.max_residual() > tol || !u.bijective() {
                return Err(Error::NotUnitary { residual: u.max_residual() });
            }
        }
        if self.compatibility_residual > tol {
            return Err(Error::TwistViolation { residual: self.compatibility_residual });
        }
        Ok(())
    }
}

fn unitary_check(source: &Correspondence, target: &Correspondence, u: &Mat) -> UnitaryCheck {
    let (ip, rm) = correspondence::unitary_residuals(source.module(), target.module(), u);
    let lm = source
        .eta()
        .iter()
        .zip(target.eta())
        .map(|(s, t)| linalg::max_abs(&(linalg::mul(u, s) - linalg::mul(t, u))))
        .fold(0.0, f64::max);
    UnitaryCheck {
        inner_product_residual: ip,
        right_module_residual: rm,
        left_module_residual: lm,
        rank: linalg::rank(u),
        dim_source: source.dim(),
        dim_target: target.dim(),
    }
}

/// Checks every invariant of a triple `φ' → φ` (the `verify_ladj_iso`
/// operation).
pub fn verify_ladj_iso(triple: &MoritaTriple, phi_prime: &LocalAdjunction, phi: &LocalAdjunction) -> Result<LadjIsoReport> {
    verify_in(&TripleFrame::new(&triple.g, phi_prime, phi)?, triple, phi_prime, phi)
}

/// What a triple with a given `G` is checked against: `G⋆`, `F' ⊗ G` and
/// `G⋆ ⊗ E'`. Building the triple needs the same tensor products.
struct TripleFrame {
    dual: DualMorita,
    corr_a: Correspondence,
    t_a: TensorModule,
    corr_b: Correspondence,
    t_b: TensorModule,
}

impl TripleFrame {
    fn new(g: &Correspondence, phi_prime: &LocalAdjunction, phi: &LocalAdjunction) -> Result<Self> {
        let (fp, f) = (phi_prime.f(), phi.f());
        if fp.left() != f.left() || g.left() != fp.right() || g.right() != f.right() {
            return Err(Error::TypeMismatch("triple does not connect the two adjunctions".into()));
        }
        let (corr_a, t_a) = correspondence::tensor_correspondences(fp, g)?;
        let dual = dual_morita(g)?;
        let (corr_b, t_b) = correspondence::tensor_correspondences(&dual.dual, phi_prime.e())?;
        Ok(TripleFrame { dual, corr_a, t_a, corr_b, t_b })
    }
}

fn verify_in(
    frame: &TripleFrame,
    triple: &MoritaTriple,
    phi_prime: &LocalAdjunction,
    phi: &LocalAdjunction,
) -> Result<LadjIsoReport> {
    let g = &triple.g;
    let fp = phi_prime.f();
    let (f, e) = (phi.f(), phi.e());
    let TripleFrame { dual, corr_a, t_a, corr_b, t_b } = frame;
    if triple.alpha.shape() != (f.dim(), t_a.dim()) {
        return Err(Error::DimensionMismatch(format!("alpha is {:?}", triple.alpha.shape())));
    }
    if triple.beta.shape() != (e.dim(), t_b.dim()) {
        return Err(Error::DimensionMismatch(format!("beta is {:?}", triple.beta.shape())));
    }

    let ig = ideal_of_module(g.module());
    let i_f = ideal_of_module(f.module());
    let ideal_residual = linalg::max_abs(&(ig.projection() - i_f.projection()));
    let ifp = ideal_of_module(fp.module());
    let act = linalg::columns(&g.eta().iter().map(linalg::vec_of).collect::<Vec<_>>(), g.dim() * g.dim());
    let restricted_rank = linalg::rank(&linalg::mul(&act, &ifp.basis));

    let alpha = unitary_check(corr_a, f, &triple.alpha);
    let beta = unitary_check(corr_b, e, &triple.beta);

    let mut compat: f64 = 0.0;
    let mut scale: f64 = 1.0;
    for i in 0..fp.dim() {
        let fi = fp.module().basis_vector(i);
        let phi_fi = phi_prime.apply(&fi);
        for j in 0..g.dim() {
            let gj = g.module().basis_vector(j);
            let lhs = phi.apply(&(&triple.alpha * t_a.simple(&fi, &gj)));
            let rhs = &triple.beta * t_b.simple(&linalg::conj_vec(&gj), &phi_fi);
            scale = scale.max(lhs.norm());
            compat = compat.max((lhs - rhs).norm());
        }
    }
    Ok(LadjIsoReport {
        ideal_residual,
        ideal_dims: (ig.dim(), i_f.dim()),
        morita_dims: (ifp.dim(), restricted_rank, dual.compacts_dim),
        alpha,
        beta,
        compatibility_residual: compat / scale,
        imprimitivity: imprimitivity(g, dual)?,
    })
}

/// `B' ⊗_{B'} G → G`, `b ⊗ g ↦ b·g`, for a tensor module whose left factor
/// is the standard module of `B'`.
fn action_unitor(t: &TensorModule, g: &Correspondence) -> Mat {
    let d = g.dim();
    let alg = Mat::from_fn(d, g.left().dim() * d, |r, col| g.eta()[col / d][(r, col % d)]);
    linalg::mul(&alg, &t.lift)
}

/// `φ ≅ LAdj(Frob(φ))` with everything needed to re-verify it.
#[derive(Debug, Clone)]
pub struct LadjRoundtrip {
    pub triple: MoritaTriple,
    /// `LAdj(Frob(φ))`, the source of the triple.
    pub ladj: LocalAdjunction,
    pub frob: FrobOfLadj,
    pub report: LadjIsoReport,
}

/// `G = F` with the canonical `K_B(F)` action, `α(c ⊗ f) = c(f)`,
/// `β(⟨f| ⊗ c) = φ(c*(f))` (the `roundtrip_ladj` operation).
pub fn roundtrip_ladj(phi: &LocalAdjunction, seed: u64) -> Result<LadjRoundtrip> {
    roundtrip_ladj_from(phi, construct::frob_from_ladj(phi, seed)?)
}

/// [`roundtrip_ladj`] with `Frob(φ)` already built.
pub fn roundtrip_ladj_from(phi: &LocalAdjunction, frob: FrobOfLadj) -> Result<LadjRoundtrip> {
    let (ladj, _) = construct::ladj_from_frob(&frob.structure)?;
    let calg = &frob.realization.algebra;
    let f = phi.f();
    let ops: Vec<Mat> = calg.basis().iter().map(|b| frob.realization.operator(b)).collect();
    let g = Correspondence::new(calg.clone(), f.module().clone(), ops.clone(), 1e-8)?;
    let frame = TripleFrame::new(&g, &ladj, phi)?;
    let alpha = action_unitor(&frame.t_a, &g);

    let d = f.dim();
    let mut cols = Vec::with_capacity(d * calg.dim());
    for i in 0..d {
        for k in 0..calg.dim() {
            let op = linalg::conj_mat(&ops[calg.star_index(k)]);
            cols.push(phi.phi() * op.column(i));
        }
    }
    let beta = linalg::mul(&linalg::columns(&cols, phi.e().dim()), &frame.t_b.lift);
    let triple = MoritaTriple { g, alpha, beta };
    let report = verify_in(&frame, &triple, &ladj, phi)?;
    Ok(LadjRoundtrip { triple, ladj, frob, report })
}

/// `C ≅ Frob(LAdj(C))` witnessed by `ψ(c) = ` left multiplication (the
/// `roundtrip_frob` operation).
pub fn roundtrip_frob(s: &FrobeniusStructure, seed: u64, tol: f64) -> Result<(FrobeniusIso, FrobOfLadj)> {
    let (adj, _) = construct::ladj_from_frob(s)?;
    let frob = construct::frob_from_ladj(&adj, seed)?;
    let psi = construct::psi_matrix(s, &frob);
    let iso = FrobeniusIso::new(s.clone(), frob.structure.clone(), psi, tol)?;
    Ok((iso, frob))
}

/// A triple `LAdj(D) → LAdj(C)` with both adjunctions attached.
#[derive(Debug, Clone)]
pub struct LadjIso {
    pub triple: MoritaTriple,
    pub source: LocalAdjunction,
    pub target: LocalAdjunction,
    pub report: LadjIsoReport,
}

/// From `ρ: D → C`: `G = C` with `D` acting through `ρ`, `α(d ⊗ c) = ρ(d)c`,
/// `β(⟨c| ⊗ d) = c*ρ(d)` (the `ladj_iso_from_frob_iso` operation).
pub fn ladj_iso_from_frob_iso(rho: &FrobeniusIso) -> Result<LadjIso> {
    let (dstr, cstr) = (&rho.source, &rho.target);
    let (source, _) = construct::ladj_from_frob(dstr)?;
    let (target, _) = construct::ladj_from_frob(cstr)?;
    let (dalg, calg) = (dstr.c(), cstr.c());
    let h = StarHom::unchecked(dalg.clone(), calg.clone(), rho.rho.clone());
    let images: Vec<_> = dalg.basis().iter().map(|b| h.apply(b)).collect();
    let eta: Vec<Mat> = images.iter().map(|x| calg.left_mult_matrix(x)).collect();
    let g = Correspondence::new(dalg.clone(), HilbertModule::standard(calg), eta, 1e-8)?;
    let frame = TripleFrame::new(&g, &source, &target)?;
    let alpha = action_unitor(&frame.t_a, &g);

    let cb = calg.basis();
    let mut cols = Vec::with_capacity(calg.dim() * dalg.dim());
    for ci in &cb {
        let cs = ci.star();
        for img in &images {
            cols.push(calg.coords(&(&cs * img)));
        }
    }
    let beta = linalg::mul(&linalg::columns(&cols, calg.dim()), &frame.t_b.lift);
    let triple = MoritaTriple { g, alpha, beta };
    let report = verify_in(&frame, &triple, &source, &target)?;
    Ok(LadjIso { triple, source, target, report })
}

/// Recovers `ρ: D → C` from a triple `LAdj(D) → LAdj(C)`: act on `G`,
/// transport along `D ⊗_D G ≅ G`, conjugate by `α`, evaluate at `1`
/// (the `rho_from_triple` operation).
pub fn rho_from_triple(
    triple: &MoritaTriple,
    source: &LocalAdjunction,
    dstr: &FrobeniusStructure,
    cstr: &FrobeniusStructure,
    tol: f64,
) -> Result<FrobeniusIso> {
    let g = &triple.g;
    let (dalg, calg) = (dstr.c(), cstr.c());
    if g.left() != dalg || g.right() != calg || source.f().right() != dalg {
        return Err(Error::TypeMismatch("triple is not between LAdj(D) and LAdj(C)".into()));
    }
    let t_a = correspondence::interior_tensor(source.f().module(), g)?;
    let unitor = action_unitor(&t_a, g);
    let unitor_inv = unitor.clone().try_inverse().ok_or(Error::NotInvertible)?;
    let alpha_inv = triple.alpha.clone().try_inverse().ok_or(Error::NotInvertible)?;
    let conj = &triple.alpha * &unitor_inv;
    let conj_inv = &unitor * &alpha_inv;
    let one = calg.coords(&calg.unit());
    let cols: Vec<Vector> = g.eta().iter().map(|k| &conj * k * &conj_inv * &one).collect();
    let rho = linalg::columns(&cols, calg.dim());
    FrobeniusIso::new(dstr.clone(), cstr.clone(), rho, tol)
}
