//! C*-correspondences `ₐF_B` and the interior tensor product.
//!
//! The interior tensor `Y ⊗_A F` is realised as the algebraic tensor
//! `ℂ^{d_Y} ⊗ ℂ^{d_F}` modulo the null space of the scalarised semi-inner
//! product. Quotient coordinates are orthonormal for the scalarised inner
//! product, and the quotient and lift matrices are kept so that simple tensors
//! can always be pushed into the quotient reproducibly.

use serde::Serialize;

use crate::algebra::{Algebra, Element, StarHom};
use crate::error::{Error, Result};
use crate::hilbert_module::{self, HilbertModule, ModuleMap};
use crate::linalg::{self, cr, Mat, Vector, RANK_REL_TOL};

#[derive(Debug, Clone, PartialEq)]
pub struct Correspondence {
    left: Algebra,
    module: HilbertModule,
    /// `eta[k]` is the operator of the left action of the `k`-th matrix unit.
    eta: Vec<Mat>,
}

impl Correspondence {
    /// Validates a correspondence (the `make_correspondence` operation).
    pub fn new(left: Algebra, module: HilbertModule, eta: Vec<Mat>, tol: f64) -> Result<Self> {
        let d = module.dim();
        if eta.len() != left.dim() || eta.iter().any(|m| m.shape() != (d, d)) {
            return Err(Error::ShapeMismatch(format!(
                "left action needs {} operators of size {d}x{d}",
                left.dim()
            )));
        }
        let scale = eta.iter().map(linalg::max_abs).fold(1.0, f64::max);

        let mut adjointable: f64 = 0.0;
        for e in &eta {
            adjointable = adjointable.max(hilbert_module::module_map_residual(&module, &module, e));
            let adj = module.adjoint_matrix(e);
            adjointable = adjointable.max(hilbert_module::adjoint_residual(&module, &module, e, &adj));
        }
        if adjointable > tol * scale {
            return Err(Error::NotAdjointableAction { residual: adjointable });
        }

        let mut star: f64 = 0.0;
        for k in 0..left.dim() {
            let adj = module.adjoint_matrix(&eta[k]);
            star = star.max(linalg::max_abs(&(adj - &eta[left.star_index(k)])));
            let (i, r, c) = left.coord_location(k);
            for l in 0..left.dim() {
                let (i2, r2, c2) = left.coord_location(l);
                let prod = &eta[k] * &eta[l];
                let expected = if i == i2 && c == r2 {
                    eta[left.coord_index(i, r, c2)].clone()
                } else {
                    Mat::zeros(d, d)
                };
                star = star.max(linalg::max_abs(&(prod - expected)));
            }
        }
        if star > tol * scale {
            return Err(Error::NotStarAction { residual: star });
        }

        let span = Mat::from_fn(d, d * eta.len(), |r, col| eta[col / d][(r, col % d)]);
        let rank = linalg::rank(&span);
        if rank < d {
            return Err(Error::DegenerateAction { rank, dim: d });
        }
        Ok(Correspondence { left, module, eta })
    }

    /// The identity correspondence `ₐA_A`.
    pub fn identity(a: &Algebra) -> Self {
        Self::from_hom(&StarHom::identity(a))
    }

    /// `ₐC_C` for a unital inclusion `η: A → C`: the standard module of `C`
    /// with `A` acting by left multiplication through `η`.
    pub fn from_hom(eta: &StarHom) -> Self {
        let c = eta.target();
        let module = HilbertModule::standard(c);
        let ops = eta
            .source()
            .basis()
            .iter()
            .map(|a| c.left_mult_matrix(&eta.apply(a)))
            .collect();
        Correspondence::new(eta.source().clone(), module, ops, 1e-9).expect("unital inclusion gives a correspondence")
    }

    pub fn left(&self) -> &Algebra {
        &self.left
    }

    pub fn right(&self) -> &Algebra {
        self.module.base()
    }

    pub fn module(&self) -> &HilbertModule {
        &self.module
    }

    pub fn dim(&self) -> usize {
        self.module.dim()
    }

    pub fn eta(&self) -> &[Mat] {
        &self.eta
    }

    /// Operator of `f ↦ a·f`.
    pub fn left_action(&self, a: &Element) -> Mat {
        let coords = self.left.coords(a);
        let d = self.dim();
        let mut m = Mat::zeros(d, d);
        for (k, e) in self.eta.iter().enumerate() {
            if coords[k].norm() > 0.0 {
                m += e * coords[k];
            }
        }
        m
    }
}

/// `Y ⊗_A F` together with the quotient data linking it to the algebraic tensor.
#[derive(Debug, Clone)]
pub struct TensorModule {
    pub module: HilbertModule,
    /// `d × (d_Y d_F)`: algebraic tensor → quotient coordinates.
    pub quotient: Mat,
    /// `(d_Y d_F) × d`: canonical representatives of quotient coordinates.
    pub lift: Mat,
    /// Orthonormal basis of the null space of the semi-inner product.
    pub null: Mat,
    pub left_dim: usize,
    pub right_dim: usize,
}

impl TensorModule {
    pub fn dim(&self) -> usize {
        self.module.dim()
    }

    /// Class of `y ⊗ f`.
    pub fn simple(&self, y: &Vector, f: &Vector) -> Vector {
        &self.quotient * y.kronecker(f)
    }

    /// Class of an arbitrary algebraic tensor.
    pub fn class_of(&self, z: &Vector) -> Vector {
        &self.quotient * z
    }
}

/// The interior tensor product `Y ⊗_A F`.
pub fn interior_tensor(y: &HilbertModule, f: &Correspondence) -> Result<TensorModule> {
    if y.base() != f.left() {
        return Err(Error::BaseMismatch);
    }
    let (dy, df) = (y.dim(), f.dim());
    let n = dy * df;
    let b = f.right();
    let fm = f.module();
    let gram_alg: Vec<Mat> = fm
        .gram()
        .iter()
        .map(|gf| {
            let mut acc = Mat::zeros(n, n);
            for (gy, e) in y.gram().iter().zip(&f.eta) {
                if linalg::max_abs(gy) == 0.0 {
                    continue;
                }
                acc += linalg::kron(gy, &(gf * e));
            }
            acc
        })
        .collect();
    let eye_y = Mat::identity(dy, dy);
    let action_alg: Vec<Mat> = fm.action().iter().map(|r| linalg::kron(&eye_y, r)).collect();

    let mut s = Mat::zeros(n, n);
    for (m, g) in gram_alg.iter().enumerate() {
        let (_, r, c) = b.coord_location(m);
        if r == c {
            s += g;
        }
    }
    let (vals, vecs) = linalg::hermitian_eigen(&s);
    let top = vals.iter().cloned().fold(0.0, f64::max);
    let kept: Vec<usize> = (0..n).filter(|&i| vals[i] > top * RANK_REL_TOL).collect();
    let dropped: Vec<usize> = (0..n).filter(|&i| vals[i] <= top * RANK_REL_TOL).collect();
    let d = kept.len();
    let v = Mat::from_fn(n, d, |r, c| vecs[(r, kept[c])]);
    let null = Mat::from_fn(n, dropped.len(), |r, c| vecs[(r, dropped[c])]);
    let lam_half = Mat::from_fn(d, d, |i, j| if i == j { cr(vals[kept[i]].sqrt()) } else { cr(0.0) });
    let lam_inv_half = Mat::from_fn(d, d, |i, j| if i == j { cr(1.0 / vals[kept[i]].sqrt()) } else { cr(0.0) });
    let quotient = linalg::mul_by_adj(&lam_half, &v);
    let lift = linalg::mul(&v, &lam_inv_half);

    let gram: Vec<Mat> = gram_alg.iter().map(|g| linalg::mul(&linalg::mul_adj(&lift, g), &lift)).collect();
    let action: Vec<Mat> = action_alg.iter().map(|r| linalg::mul(&linalg::mul(&quotient, r), &lift)).collect();
    let module = HilbertModule::new(b.clone(), d, action, gram, 1e-8)?;
    Ok(TensorModule { module, quotient, lift, null, left_dim: dy, right_dim: df })
}

/// `X ⊗_A F` for a correspondence `X: C → A`, as a correspondence `C → B`.
pub fn tensor_correspondences(x: &Correspondence, f: &Correspondence) -> Result<(Correspondence, TensorModule)> {
    let t = interior_tensor(x.module(), f)?;
    let eye = Mat::identity(f.dim(), f.dim());
    let eta = x
        .eta
        .iter()
        .map(|e| linalg::mul(&linalg::mul(&t.quotient, &linalg::kron(e, &eye)), &t.lift))
        .collect();
    let corr = Correspondence::new(x.left.clone(), t.module.clone(), eta, 1e-8)?;
    Ok((corr, t))
}

/// `t ⊗ id_F : Y ⊗ F → Y' ⊗ F`, with adjoint `t* ⊗ id` when `t` carries one.
pub fn tensor_of_map(
    t: &ModuleMap,
    f: &Correspondence,
    source: &TensorModule,
    target: &TensorModule,
    tol: f64,
) -> Result<ModuleMap> {
    let eye = Mat::identity(f.dim(), f.dim());
    let big = linalg::kron(&t.matrix, &eye);
    let leak = if source.null.ncols() == 0 {
        0.0
    } else {
        linalg::max_abs(&linalg::mul(&linalg::mul(&target.quotient, &big), &source.null))
    };
    if leak > tol * linalg::max_abs(&t.matrix).max(1.0) {
        return Err(Error::NotWellDefined { residual: leak });
    }
    let matrix = linalg::mul(&linalg::mul(&target.quotient, &big), &source.lift);
    let adjoint = t
        .adjoint
        .as_ref()
        .map(|a| linalg::mul(&linalg::mul(&source.quotient, &linalg::kron(a, &eye)), &target.lift));
    Ok(ModuleMap { matrix, adjoint })
}

#[derive(Debug, Clone, Serialize)]
pub struct UnitaryReport {
    pub dim_source: usize,
    pub dim_target: usize,
    pub inner_product_residual: f64,
    pub module_map_residual: f64,
    pub simple_tensor_residual: f64,
}

impl UnitaryReport {
    pub fn max_residual(&self) -> f64 {
        self.inner_product_residual
            .max(self.module_map_residual)
            .max(self.simple_tensor_residual)
    }
}

/// Checks that `u` preserves inner products and the right action.
pub fn unitary_residuals(source: &HilbertModule, target: &HilbertModule, u: &Mat) -> (f64, f64) {
    let ip = source
        .gram()
        .iter()
        .zip(target.gram())
        .map(|(gs, gt)| linalg::max_abs(&(linalg::mul(&linalg::mul_adj(u, gt), u) - gs)))
        .fold(0.0, f64::max);
    (ip, hilbert_module::module_map_residual(source, target, u))
}

/// The canonical map `A ⊗_A F → F`, `a ⊗ f ↦ a·f`, with its unitarity report.
pub fn left_unitor(f: &Correspondence) -> Result<(Mat, UnitaryReport)> {
    let a = HilbertModule::standard(f.left());
    let t = interior_tensor(&a, f)?;
    let df = f.dim();
    let alg = Mat::from_fn(df, f.left().dim() * df, |r, col| f.eta[col / df][(r, col % df)]);
    let u = alg * &t.lift;
    let (ip, mm) = unitary_residuals(&t.module, f.module(), &u);
    Ok((
        u,
        UnitaryReport {
            dim_source: t.dim(),
            dim_target: df,
            inner_product_residual: ip,
            module_map_residual: mm,
            simple_tensor_residual: 0.0,
        },
    ))
}

/// The canonical unitary `(X ⊗ F) ⊗ G → X ⊗ (F ⊗ G)`, checked on the given
/// simple tensors `(x, f, g)`.
pub fn associator(
    x: &HilbertModule,
    f: &Correspondence,
    g: &Correspondence,
    samples: &[(Vector, Vector, Vector)],
) -> Result<(Mat, UnitaryReport)> {
    let t1 = interior_tensor(x, f)?;
    let t2 = interior_tensor(&t1.module, g)?;
    let (fg, t3) = tensor_correspondences(f, g)?;
    let t4 = interior_tensor(x, &fg)?;
    let (dx, dg) = (x.dim(), g.dim());
    let eye_g = Mat::identity(dg, dg);
    let eye_x = Mat::identity(dx, dx);
    // left coordinates -> algebraic triple tensor -> right coordinates
    let lift_left = linalg::kron(&t1.lift, &eye_g) * &t2.lift;
    let push_right = &t4.quotient * linalg::kron(&eye_x, &t3.quotient);
    let u = &push_right * &lift_left;
    let (ip, mm) = unitary_residuals(&t2.module, &t4.module, &u);
    let mut simple: f64 = 0.0;
    for (xv, fv, gv) in samples {
        let left = t2.simple(&t1.simple(xv, fv), gv);
        let right = t4.simple(xv, &t3.simple(fv, gv));
        simple = simple.max((&u * left - right).norm());
    }
    Ok((
        u,
        UnitaryReport {
            dim_source: t2.dim(),
            dim_target: t4.dim(),
            inner_product_residual: ip,
            module_map_residual: mm,
            simple_tensor_residual: simple,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_correspondences_are_valid() {
        for blocks in [vec![1], vec![2], vec![1, 2]] {
            let a = Algebra::new(&blocks).unwrap();
            let id = Correspondence::identity(&a);
            assert_eq!(id.dim(), a.dim());
        }
    }

    #[test]
    fn degenerate_action_is_rejected() {
        let c = Algebra::new(&[1]).unwrap();
        let m = HilbertModule::column(2);
        let mut p = Mat::zeros(2, 2);
        p[(0, 0)] = cr(1.0);
        let r = Correspondence::new(c, m, vec![p], 1e-9);
        assert!(matches!(r, Err(Error::DegenerateAction { .. })));
    }

    #[test]
    fn non_star_action_is_rejected() {
        let c = Algebra::new(&[1]).unwrap();
        let m = HilbertModule::column(2);
        let mut t = Mat::identity(2, 2);
        t[(0, 1)] = cr(1.0);
        let r = Correspondence::new(c, m, vec![t], 1e-9);
        assert!(matches!(r, Err(Error::NotStarAction { .. })));
    }

    #[test]
    fn left_unitor_is_unitary() {
        let a = Algebra::new(&[2, 1]).unwrap();
        let (_, report) = left_unitor(&Correspondence::identity(&a)).unwrap();
        assert_eq!(report.dim_source, report.dim_target);
        assert!(report.max_residual() < 1e-10, "{report:?}");
    }
}
