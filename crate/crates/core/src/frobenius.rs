//! Frobenius structures `(A, C, η, ε)`, the Frobenius product on `C ⊗_A C`,
//! quasi-bases and the Watatani index.
//!
//! Elements of the algebraic tensor `C ⊗ C` are stored as `d_C²` vectors in
//! row-major order: `x = Σ x_{ij} c_i ⊗ c_j`. Read as a `d_C × d_C` matrix
//! `X`, the Frobenius product has the compact form
//!
//! ```text
//! x · y = Λ(x) Y,        Λ(x)(c) = Σ_{ij} x_{ij} c_i η(ε(c_j c)),
//! ```
//!
//! since `(c_1 ⊗ c_2)(c_3 ⊗ c_4) = c_1 ε(c_2 c_3) ⊗ c_4`. A quasi-basis is
//! exactly an `x` with `Λ(x) = id` and `Λ'(x) = id`, where
//! `Λ'(x)(c) = Σ x_{ij} η(ε(c c_i)) c_j`.

use serde::Serialize;

use crate::algebra::{self, Algebra, Element, StarHom};
use crate::error::{Error, Result};
use crate::linalg::{self, cr, Mat, Vector};

#[derive(Debug, Clone, Serialize)]
pub struct Certificates {
    pub bimodule_residual: f64,
    pub cp_choi_min_eigenvalue: f64,
    pub nondegeneracy_rank: usize,
    /// Smallest eigenvalue of the scalarised Gram `τ(ε(c_i^* c_j))`;
    /// positive iff `ε` is faithful.
    pub faithfulness_min_eigenvalue: f64,
}

#[derive(Debug, Clone)]
pub struct FrobeniusStructure {
    eta: StarHom,
    eps: Mat,
    certificates: Certificates,
}

impl FrobeniusStructure {
    /// Validates the bimodule property, complete positivity and
    /// nondegeneracy, in that order (the `make_frobenius` operation).
    pub fn new(eta: StarHom, eps: Mat, tol: f64) -> Result<Self> {
        let a = eta.source().clone();
        let c = eta.target().clone();
        if eps.shape() != (a.dim(), c.dim()) {
            return Err(Error::ShapeMismatch(format!("eps must be {}x{}", a.dim(), c.dim())));
        }
        let scale = linalg::max_abs(&eps).max(1.0);

        let mut bimodule: f64 = 0.0;
        for ak in a.basis() {
            let e = eta.apply(&ak);
            let left = &eps * c.left_mult_matrix(&e) - a.left_mult_matrix(&ak) * &eps;
            let right = &eps * c.right_mult_matrix(&e) - a.right_mult_matrix(&ak) * &eps;
            bimodule = bimodule.max(linalg::max_abs(&left)).max(linalg::max_abs(&right));
        }
        if bimodule > tol * scale {
            return Err(Error::NotBimodule { residual: bimodule });
        }

        let choi = algebra::choi_min_eigenvalue(&c, &a, &eps);
        if choi < -tol * scale {
            return Err(Error::NotCompletelyPositive { min_eigenvalue: choi });
        }

        let range = linalg::column_span(&eps);
        let mut blocks = Vec::new();
        for r in 0..range.ncols() {
            let elt = eta.apply(&a.from_coords(&range.column(r).into_owned()));
            blocks.push(c.left_mult_matrix(&elt));
        }
        let d = c.dim();
        let span = Mat::from_fn(d, d * blocks.len(), |row, col| blocks[col / d][(row, col % d)]);
        let rank = linalg::rank(&span);
        if rank < d {
            return Err(Error::NotNondegenerate { rank, dim: d });
        }

        let faithful = {
            let basis = c.basis();
            let g = Mat::from_fn(d, d, |i, j| {
                let v = algebra::apply_map(&c, &a, &eps, &(&basis[i].star() * &basis[j]));
                a.trace(&v)
            });
            linalg::min_eigenvalue(&g)
        };
        let certificates = Certificates {
            bimodule_residual: bimodule,
            cp_choi_min_eigenvalue: choi,
            nondegeneracy_rank: rank,
            faithfulness_min_eigenvalue: faithful,
        };
        Ok(FrobeniusStructure { eta, eps, certificates })
    }

    pub fn a(&self) -> &Algebra {
        self.eta.source()
    }

    pub fn c(&self) -> &Algebra {
        self.eta.target()
    }

    pub fn eta(&self) -> &StarHom {
        &self.eta
    }

    pub fn eps(&self) -> &Mat {
        &self.eps
    }

    pub fn certificates(&self) -> &Certificates {
        &self.certificates
    }

    pub fn apply_eps(&self, c: &Element) -> Element {
        algebra::apply_map(self.c(), self.a(), &self.eps, c)
    }

    /// `η ∘ ε` on coordinates of `C`.
    pub fn conditional_expectation(&self) -> Mat {
        self.eta.matrix() * &self.eps
    }

    /// The same structure with `ε` replaced by `λ ε`.
    pub fn scaled(&self, lambda: f64, tol: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::BadParam("scaling must be positive".into()));
        }
        FrobeniusStructure::new(self.eta.clone(), &self.eps * cr(lambda), tol)
    }

    /// `‖ε‖_cb = ‖ε(1)‖`, exact because `ε` is completely positive.
    pub fn eps_cb_norm(&self) -> f64 {
        self.apply_eps(&self.c().unit()).norm()
    }
}

/// The balanced tensor `C ⊗_A C` with the Frobenius product.
#[derive(Debug, Clone)]
pub struct TensorAlgebra {
    c: Algebra,
    /// `η ∘ ε` on coordinates.
    h: Mat,
    left_mult: Vec<Mat>,
    right_mult: Vec<Mat>,
    /// Orthonormal basis (columns) of the complement of the balancing
    /// relations in `C ⊗ C`; quotient coordinates are `basis^H z`.
    pub basis: Mat,
}

impl TensorAlgebra {
    pub fn new(s: &FrobeniusStructure) -> Self {
        let c = s.c().clone();
        let a = s.a();
        let d = c.dim();
        let left_mult: Vec<Mat> = c.basis().iter().map(|b| c.left_mult_matrix(b)).collect();
        let right_mult: Vec<Mat> = c.basis().iter().map(|b| c.right_mult_matrix(b)).collect();
        let eye = Mat::identity(d, d);
        // relations (c η(a)) ⊗ c' − c ⊗ (η(a) c')
        let mut normal = Mat::zeros(d * d, d * d);
        let mut reference = 0.0;
        for ak in a.basis() {
            let e = s.eta().apply(&ak);
            reference += e.norm().powi(2);
            let m = linalg::kron(&c.right_mult_matrix(&e), &eye) - linalg::kron(&eye, &c.left_mult_matrix(&e));
            normal += linalg::mul_by_adj(&m, &m);
        }
        let basis = linalg::psd_kernel_scaled(&normal, 1e-11, reference);
        TensorAlgebra { c, h: s.conditional_expectation(), left_mult, right_mult, basis }
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn c_dim(&self) -> usize {
        self.c.dim()
    }

    pub fn simple(&self, c1: &Element, c2: &Element) -> Vector {
        self.c.coords(c1).kronecker(&self.c.coords(c2))
    }

    /// Quotient coordinates of an algebraic tensor.
    pub fn class(&self, z: &Vector) -> Vector {
        self.basis.adjoint() * z
    }

    /// Canonical representative of quotient coordinates.
    pub fn representative(&self, v: &Vector) -> Vector {
        &self.basis * v
    }

    /// Canonical representative of the class of `z`.
    pub fn reduce(&self, z: &Vector) -> Vector {
        &self.basis * (self.basis.adjoint() * z)
    }

    /// Norm of `z` modulo the balancing relations (distance to zero class).
    pub fn class_norm(&self, z: &Vector) -> f64 {
        self.class(z).norm()
    }

    fn as_matrix(&self, z: &Vector) -> Mat {
        linalg::unvec(z, self.c_dim(), self.c_dim())
    }

    fn row_element_matrix(&self, x: &Mat, i: usize, mult: &[Mat]) -> Mat {
        let d = self.c_dim();
        let mut m = Mat::zeros(d, d);
        for j in 0..d {
            if x[(i, j)].norm() > 0.0 {
                m += &mult[j] * x[(i, j)];
            }
        }
        m
    }

    /// `Λ(x)(c) = Σ x_{ij} c_i η(ε(c_j c))` as a matrix on `C`.
    pub fn lambda(&self, z: &Vector) -> Mat {
        let x = self.as_matrix(z);
        let d = self.c_dim();
        let mut out = Mat::zeros(d, d);
        for i in 0..d {
            let row = x.row(i);
            if row.iter().all(|v| v.norm() == 0.0) {
                continue;
            }
            let l_v = self.row_element_matrix(&x, i, &self.left_mult);
            out += &self.left_mult[i] * &self.h * l_v;
        }
        out
    }

    /// `Λ'(x)(c) = Σ x_{ij} η(ε(c c_i)) c_j` as a matrix on `C`.
    pub fn lambda_right(&self, z: &Vector) -> Mat {
        let xt = self.as_matrix(z).transpose();
        let d = self.c_dim();
        let mut out = Mat::zeros(d, d);
        for j in 0..d {
            if xt.row(j).iter().all(|v| v.norm() == 0.0) {
                continue;
            }
            let r_w = self.row_element_matrix(&xt, j, &self.right_mult);
            out += &self.right_mult[j] * &self.h * r_w;
        }
        out
    }

    /// Frobenius product of two algebraic tensors (canonical representative).
    pub fn product(&self, x: &Vector, y: &Vector) -> Vector {
        let prod = self.lambda(x) * self.as_matrix(y);
        self.reduce(&linalg::vec_of(&prod))
    }

    /// `c · x`.
    pub fn left_act(&self, c: &Element, x: &Vector) -> Vector {
        linalg::vec_of(&(self.c.left_mult_matrix(c) * self.as_matrix(x)))
    }

    /// `x · c`.
    pub fn right_act(&self, x: &Vector, c: &Element) -> Vector {
        linalg::vec_of(&(self.as_matrix(x) * self.c.right_mult_matrix(c).transpose()))
    }

    /// `ε⁽¹⁾(c_1 ⊗ c_2) = ε(c_1) c_2`.
    pub fn eps_one(&self, z: &Vector) -> Element {
        let x = self.as_matrix(z);
        let d = self.c_dim();
        let mut acc = Vector::zeros(d);
        for i in 0..d {
            let hc = self.c.from_coords(&self.h.column(i).into_owned());
            if hc.max_abs() == 0.0 {
                continue;
            }
            acc += self.c.left_mult_matrix(&hc) * x.row(i).transpose();
        }
        self.c.from_coords(&acc)
    }

    /// `μ(c_1 ⊗ c_2) = c_1 c_2`.
    pub fn mu(&self, z: &Vector) -> Element {
        let x = self.as_matrix(z);
        let d = self.c_dim();
        let mut acc = Vector::zeros(d);
        for i in 0..d {
            acc += &self.left_mult[i] * x.row(i).transpose();
        }
        self.c.from_coords(&acc)
    }

    /// Largest `‖(x y) z − x (y z)‖` over the given triples.
    pub fn associativity_residual(&self, triples: &[(Vector, Vector, Vector)]) -> f64 {
        triples
            .iter()
            .map(|(x, y, z)| (self.product(&self.product(x, y), z) - self.product(x, &self.product(y, z))).norm())
            .fold(0.0, f64::max)
    }

    /// Seeded random simple tensors spanning (with high probability) the algebra.
    pub fn random_elements(&self, count: usize, seed: u64) -> Vec<Vector> {
        let mut rng = linalg::rng_from_seed(seed);
        (0..count)
            .map(|_| {
                let c1 = self.c.random_element(&mut rng);
                let c2 = self.c.random_element(&mut rng);
                self.reduce(&self.simple(&c1, &c2))
            })
            .collect()
    }
}

/// A quasi-basis `{(u_i, v_i)}` and the tensor `Σ u_i ⊗ v_i` it represents.
#[derive(Debug, Clone)]
pub struct QuasiBasis {
    pub pairs: Vec<(Element, Element)>,
    /// The identity of the tensor algebra as an algebraic tensor.
    pub tensor: Vector,
    pub reproduction_residual: f64,
}

impl QuasiBasis {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Two-sided reproduction residual computed directly from the pairs:
/// `max_c max(‖Σ u_i ε(v_i c) − c‖, ‖Σ ε(c u_i) v_i − c‖)` over a basis of `C`.
pub fn reproduction_residual(s: &FrobeniusStructure, pairs: &[(Element, Element)]) -> f64 {
    let c = s.c();
    let mut res: f64 = 0.0;
    for b in c.basis() {
        let mut left = c.zero();
        let mut right = c.zero();
        for (u, v) in pairs {
            left = &left + &(u * &s.eta().apply(&s.apply_eps(&(v * &b))));
            right = &right + &(&s.eta().apply(&s.apply_eps(&(&b * u))) * v);
        }
        res = res.max(left.dist(&b)).max(right.dist(&b));
    }
    res
}

/// Acceptance threshold for the quasi-basis solve.
pub const QUASI_BASIS_TOL: f64 = 1e-9;

/// Solves for the identity of the tensor algebra (minimal-norm solution of
/// `Λ(x) = Λ'(x) = id`) and splits it into pairs by an SVD.
pub fn quasi_basis(s: &FrobeniusStructure, t: &TensorAlgebra) -> Result<QuasiBasis> {
    quasi_basis_seeded(s, t, 0)
}

/// As [`quasi_basis`]; a nonzero seed perturbs the representative by a
/// random balancing relation and mixes the pair decomposition, producing an
/// independent quasi-basis for the same identity.
pub fn quasi_basis_seeded(s: &FrobeniusStructure, t: &TensorAlgebra, seed: u64) -> Result<QuasiBasis> {
    let d = t.c_dim();
    let mut system = Mat::zeros(2 * d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            let lam = &t.left_mult[i] * &t.h * &t.left_mult[j];
            let lam_r = &t.right_mult[j] * &t.h * &t.right_mult[i];
            let col = i * d + j;
            system.view_mut((0, col), (d * d, 1)).copy_from(&linalg::vec_of(&lam));
            system.view_mut((d * d, col), (d * d, 1)).copy_from(&linalg::vec_of(&lam_r));
        }
    }
    let eye = linalg::vec_of(&Mat::identity(d, d));
    let mut rhs = Vector::zeros(2 * d * d);
    rhs.rows_mut(0, d * d).copy_from(&eye);
    rhs.rows_mut(d * d, d * d).copy_from(&eye);
    let sol = linalg::lstsq(&system, &Mat::from_column_slice(2 * d * d, 1, rhs.as_slice()));
    let x = sol.column(0).into_owned();
    let residual = (linalg::mul(&system, &sol).column(0) - &rhs).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if !(residual <= QUASI_BASIS_TOL) {
        return Err(Error::NoQuasiBasis { residual });
    }
    split_identity(s, t, x, seed)
}

/// Another quasi-basis for the identity represented by `base.tensor`,
/// without solving for it again.
pub fn quasi_basis_variant(s: &FrobeniusStructure, t: &TensorAlgebra, base: &QuasiBasis, seed: u64) -> Result<QuasiBasis> {
    split_identity(s, t, base.tensor.clone(), seed)
}

/// Splits a representative `x` of the identity into pairs.
fn split_identity(s: &FrobeniusStructure, t: &TensorAlgebra, mut x: Vector, seed: u64) -> Result<QuasiBasis> {
    let d = t.c_dim();
    let mut rng = linalg::rng_from_seed(seed);
    if seed != 0 {
        // add a random element of the relation space
        let rel = Vector::from_fn(d * d, |_, _| linalg::random_complex(&mut rng));
        x += &rel - t.reduce(&rel);
    }
    let xm = linalg::unvec(&x, d, d);
    let svd = linalg::svd(&xm, false);
    let u = svd.u;
    let v_t = svd.v.adjoint();
    let smax = svd.s.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..svd.s.len()).filter(|&k| svd.s[k] > smax * 1e-12).collect();
    let r = keep.len();
    let mut left = Mat::from_fn(d, r, |row, k| u[(row, keep[k])] * cr(svd.s[keep[k]]));
    let mut right = Mat::from_fn(d, r, |row, k| v_t[(keep[k], row)]);
    if seed != 0 {
        let g = linalg::random_unitary(&mut rng, r) + Mat::identity(r, r) * cr(2.0);
        let g_inv = g.clone().try_inverse().expect("diagonally dominant mixing is invertible");
        left = &left * &g;
        right = &right * g_inv.transpose();
    }
    let c = s.c();
    let pairs: Vec<(Element, Element)> = (0..r)
        .map(|k| (c.from_coords(&left.column(k).into_owned()), c.from_coords(&right.column(k).into_owned())))
        .collect();
    let reproduction = reproduction_residual(s, &pairs);
    if !(reproduction <= QUASI_BASIS_TOL * 10.0) {
        return Err(Error::NoQuasiBasis { residual: reproduction });
    }
    Ok(QuasiBasis { pairs, tensor: x, reproduction_residual: reproduction })
}

/// `Σ u_i v_i`, checked central and positive.
pub fn watatani_index(s: &FrobeniusStructure, qb: &QuasiBasis, tol: f64) -> Result<Element> {
    let c = s.c();
    let mut idx = c.zero();
    for (u, v) in &qb.pairs {
        idx = &idx + &(u * v);
    }
    let scale = idx.norm().max(1.0);
    let central = c
        .basis()
        .iter()
        .map(|b| (&idx * b).dist(&(b * &idx)))
        .fold(0.0, f64::max);
    if central > tol * scale {
        return Err(Error::NotCentral { residual: central });
    }
    let hermitian = idx.dist(&idx.star());
    let min_eig = c.min_eigenvalue(&idx);
    if hermitian > tol * scale || min_eig < -tol * scale {
        return Err(Error::NotPositiveIndex { min_eigenvalue: min_eig });
    }
    Ok(idx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace_structure(n: usize, lambda: f64) -> FrobeniusStructure {
        let a = Algebra::new(&[1]).unwrap();
        let c = Algebra::new(&[n]).unwrap();
        let eta = StarHom::from_fn(a.clone(), c.clone(), |x| c.unit().scale(x.blocks[0][(0, 0)]), 1e-12).unwrap();
        let eps = Mat::from_fn(1, n * n, |_, k| if k / n == k % n { cr(lambda) } else { cr(0.0) });
        FrobeniusStructure::new(eta, eps, 1e-9).unwrap()
    }

    #[test]
    fn scalar_structure() {
        let a = Algebra::new(&[1]).unwrap();
        let s = FrobeniusStructure::new(StarHom::identity(&a), Mat::identity(1, 1), 1e-9).unwrap();
        let t = TensorAlgebra::new(&s);
        assert_eq!(t.dim(), 1);
        let qb = quasi_basis(&s, &t).unwrap();
        let idx = watatani_index(&s, &qb, 1e-9).unwrap();
        assert!(idx.dist(&a.unit()) < 1e-12);
    }

    #[test]
    fn trace_on_m2_has_index_two() {
        let s = trace_structure(2, 1.0);
        let t = TensorAlgebra::new(&s);
        assert_eq!(t.dim(), 16);
        let qb = quasi_basis(&s, &t).unwrap();
        let idx = watatani_index(&s, &qb, 1e-9).unwrap();
        assert!(idx.dist(&s.c().unit().scale(cr(2.0))) < 1e-10);
        // the textbook pairs {(e_ij, e_ji)} reproduce as well
        let c = s.c();
        let pairs: Vec<_> = (0..2)
            .flat_map(|i| (0..2).map(move |j| (i, j)))
            .map(|(i, j)| (c.basis_element(c.coord_index(0, i, j)), c.basis_element(c.coord_index(0, j, i))))
            .collect();
        assert!(reproduction_residual(&s, &pairs) < 1e-14);
        let half = trace_structure(2, 0.5);
        let qb = quasi_basis(&half, &TensorAlgebra::new(&half)).unwrap();
        assert!(watatani_index(&half, &qb, 1e-9).unwrap().dist(&c.unit().scale(cr(4.0))) < 1e-10);
    }

    #[test]
    fn tensor_identity_is_a_unit() {
        let s = trace_structure(2, 1.0);
        let t = TensorAlgebra::new(&s);
        let qb = quasi_basis(&s, &t).unwrap();
        for y in t.random_elements(3, 4) {
            assert!((t.product(&qb.tensor, &y) - &y).norm() < 1e-10);
            assert!((t.product(&y, &qb.tensor) - &y).norm() < 1e-10);
        }
        let triples: Vec<_> = t.random_elements(6, 5).chunks(3).map(|v| (v[0].clone(), v[1].clone(), v[2].clone())).collect();
        assert!(t.associativity_residual(&triples) < 1e-10);
    }

    #[test]
    fn seeded_quasi_bases_agree_on_index() {
        let s = trace_structure(3, 1.0);
        let t = TensorAlgebra::new(&s);
        let i0 = watatani_index(&s, &quasi_basis_seeded(&s, &t, 0).unwrap(), 1e-9).unwrap();
        let i1 = watatani_index(&s, &quasi_basis_seeded(&s, &t, 17).unwrap(), 1e-9).unwrap();
        assert!(i0.dist(&i1) < 1e-9);
    }

    #[test]
    fn validation_errors() {
        let a = Algebra::new(&[1]).unwrap();
        let c = Algebra::new(&[2]).unwrap();
        let eta = StarHom::from_fn(a.clone(), c.clone(), |x| c.unit().scale(x.blocks[0][(0, 0)]), 1e-12).unwrap();
        // reading off one entry is not CP for an off-diagonal unit
        let off = Mat::from_fn(1, 4, |_, k| if k == 1 { cr(1.0) } else { cr(0.0) });
        assert!(matches!(FrobeniusStructure::new(eta.clone(), off, 1e-9), Err(Error::NotCompletelyPositive { .. })));
        let zero = Mat::zeros(1, 4);
        assert!(matches!(FrobeniusStructure::new(eta, zero, 1e-9), Err(Error::NotNondegenerate { .. })));
        // a diagonal-entry functional on ℂ² over ℂ² itself is not a bimodule map
        let a2 = Algebra::new(&[1, 1]).unwrap();
        let swap = Mat::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(1.0), cr(0.0)]);
        assert!(matches!(
            FrobeniusStructure::new(StarHom::identity(&a2), swap, 1e-9),
            Err(Error::NotBimodule { .. })
        ));
    }
}
