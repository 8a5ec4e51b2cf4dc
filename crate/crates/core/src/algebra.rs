//! Finite-dimensional C*-algebras `M_{n_1} ⊕ … ⊕ M_{n_r}`.
//!
//! Elements carry their blocks explicitly. Linear maps between algebras are
//! stored as matrices on *coordinates*: coordinate `offset_i + r * n_i + c`
//! is the coefficient of the matrix unit `E_{rc}` in block `i`.

use std::ops::{Add, Mul, Sub};

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, cr, Mat, Vector, C64};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Algebra {
    blocks: Vec<usize>,
    #[serde(skip)]
    offsets: Vec<usize>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    label: String,
}

/// An element of an [`Algebra`], one square matrix per block.
#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub blocks: Vec<Mat>,
}

impl Algebra {
    /// Validated direct sum of full matrix blocks.
    pub fn new(blocks: &[usize]) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::EmptyBlocks);
        }
        if blocks.contains(&0) {
            return Err(Error::NonpositiveBlock);
        }
        let mut offsets = Vec::with_capacity(blocks.len());
        let mut acc = 0;
        for &n in blocks {
            offsets.push(acc);
            acc += n * n;
        }
        let label = blocks
            .iter()
            .map(|n| if *n == 1 { "C".to_string() } else { format!("M{n}") })
            .collect::<Vec<_>>()
            .join("+");
        Ok(Algebra { blocks: blocks.to_vec(), offsets, label })
    }

    /// Re-derives the cached offsets after deserialisation.
    pub fn revalidate(self) -> Result<Self> {
        let label = self.label.clone();
        let mut a = Algebra::new(&self.blocks)?;
        if !label.is_empty() {
            a.label = label;
        }
        Ok(a)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Complex dimension `Σ n_i²`.
    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|n| n * n).sum()
    }

    /// Dimension `N = Σ n_i` of the faithful block-diagonal representation.
    pub fn rep_dim(&self) -> usize {
        self.blocks.iter().sum()
    }

    pub fn coord_index(&self, block: usize, r: usize, c: usize) -> usize {
        self.offsets[block] + r * self.blocks[block] + c
    }

    pub fn coord_location(&self, k: usize) -> (usize, usize, usize) {
        let mut i = self.blocks.len() - 1;
        while self.offsets[i] > k {
            i -= 1;
        }
        let n = self.blocks[i];
        let local = k - self.offsets[i];
        (i, local / n, local % n)
    }

    /// Index of the coordinate of `b_k^*` where `b_k` is the `k`-th matrix unit.
    pub fn star_index(&self, k: usize) -> usize {
        let (i, r, c) = self.coord_location(k);
        self.coord_index(i, c, r)
    }

    pub fn zero(&self) -> Element {
        Element { blocks: self.blocks.iter().map(|&n| Mat::zeros(n, n)).collect() }
    }

    pub fn unit(&self) -> Element {
        Element { blocks: self.blocks.iter().map(|&n| Mat::identity(n, n)).collect() }
    }

    pub fn basis_element(&self, k: usize) -> Element {
        let (i, r, c) = self.coord_location(k);
        let mut x = self.zero();
        x.blocks[i][(r, c)] = cr(1.0);
        x
    }

    pub fn basis(&self) -> Vec<Element> {
        (0..self.dim()).map(|k| self.basis_element(k)).collect()
    }

    pub fn contains(&self, x: &Element) -> bool {
        x.blocks.len() == self.blocks.len()
            && x.blocks.iter().zip(&self.blocks).all(|(b, &n)| b.shape() == (n, n))
    }

    pub fn from_coords(&self, v: &Vector) -> Element {
        assert_eq!(v.len(), self.dim(), "coordinate vector has wrong length");
        let blocks = self
            .blocks
            .iter()
            .zip(&self.offsets)
            .map(|(&n, &off)| Mat::from_fn(n, n, |r, c| v[off + r * n + c]))
            .collect();
        Element { blocks }
    }

    pub fn coords(&self, x: &Element) -> Vector {
        let mut v = Vector::zeros(self.dim());
        for (i, b) in x.blocks.iter().enumerate() {
            let n = self.blocks[i];
            for r in 0..n {
                for c in 0..n {
                    v[self.offsets[i] + r * n + c] = b[(r, c)];
                }
            }
        }
        v
    }

    /// Block-diagonal `N × N` matrix of `x`.
    pub fn represent(&self, x: &Element) -> Mat {
        let n = self.rep_dim();
        let mut m = Mat::zeros(n, n);
        let mut at = 0;
        for b in &x.blocks {
            let k = b.nrows();
            m.view_mut((at, at), (k, k)).copy_from(b);
            at += k;
        }
        m
    }

    /// Inverse of [`Algebra::represent`] (off-diagonal blocks are dropped).
    pub fn from_representation(&self, m: &Mat) -> Element {
        let mut at = 0;
        let blocks = self
            .blocks
            .iter()
            .map(|&n| {
                let b = m.view((at, at), (n, n)).into_owned();
                at += n;
                b
            })
            .collect();
        Element { blocks }
    }

    /// Matrix of `c ↦ x c` on coordinates.
    pub fn left_mult_matrix(&self, x: &Element) -> Mat {
        let d = self.dim();
        let mut m = Mat::zeros(d, d);
        for (i, &n) in self.blocks.iter().enumerate() {
            let xb = &x.blocks[i];
            for r in 0..n {
                for cc in 0..n {
                    let col = self.coord_index(i, r, cc);
                    // x E_{r,cc} has column cc equal to x[:, r]
                    for row in 0..n {
                        m[(self.coord_index(i, row, cc), col)] = xb[(row, r)];
                    }
                }
            }
        }
        m
    }

    /// Matrix of `c ↦ c x` on coordinates.
    pub fn right_mult_matrix(&self, x: &Element) -> Mat {
        let d = self.dim();
        let mut m = Mat::zeros(d, d);
        for (i, &n) in self.blocks.iter().enumerate() {
            let xb = &x.blocks[i];
            for r in 0..n {
                for cc in 0..n {
                    let col = self.coord_index(i, r, cc);
                    // E_{r,cc} x has row r equal to x[cc, :]
                    for k in 0..n {
                        m[(self.coord_index(i, r, k), col)] = xb[(cc, k)];
                    }
                }
            }
        }
        m
    }

    /// Permutation-with-conjugation realising `x ↦ x*` on coordinates:
    /// `coords(x*) = star_matrix * conj(coords(x))`.
    pub fn star_matrix(&self) -> Mat {
        let d = self.dim();
        let mut m = Mat::zeros(d, d);
        for k in 0..d {
            m[(self.star_index(k), k)] = cr(1.0);
        }
        m
    }

    pub fn trace(&self, x: &Element) -> C64 {
        x.blocks.iter().map(|b| b.trace()).sum()
    }

    /// True iff `x = x*` (residual ≤ tol) and every block has minimum
    /// eigenvalue ≥ −tol.
    pub fn is_positive(&self, x: &Element, tol: f64) -> bool {
        if !self.contains(x) {
            return false;
        }
        x.blocks.iter().all(|b| {
            linalg::max_abs(&(b - b.adjoint())) <= tol && linalg::min_eigenvalue(b) >= -tol
        })
    }

    pub fn min_eigenvalue(&self, x: &Element) -> f64 {
        x.blocks.iter().map(linalg::min_eigenvalue).fold(f64::INFINITY, f64::min)
    }

    pub fn random_element(&self, rng: &mut ChaCha8Rng) -> Element {
        Element {
            blocks: self.blocks.iter().map(|&n| linalg::random_matrix(rng, n, n)).collect(),
        }
    }

    pub fn random_self_adjoint(&self, rng: &mut ChaCha8Rng) -> Element {
        Element {
            blocks: self.blocks.iter().map(|&n| linalg::random_hermitian(rng, n)).collect(),
        }
    }

    /// A generating set for the algebra: diagonal matrix units and the
    /// nearest off-diagonal ones.
    pub fn generators(&self) -> Vec<Element> {
        let mut out = Vec::new();
        for (i, &n) in self.blocks.iter().enumerate() {
            for r in 0..n {
                out.push(self.basis_element(self.coord_index(i, r, r)));
                if r + 1 < n {
                    out.push(self.basis_element(self.coord_index(i, r, r + 1)));
                    out.push(self.basis_element(self.coord_index(i, r + 1, r)));
                }
            }
        }
        out
    }

    /// `M_n(self)`: block sizes multiplied by `n`.
    pub fn amplified(&self, n: usize) -> Algebra {
        let blocks: Vec<usize> = self.blocks.iter().map(|b| b * n).collect();
        Algebra::new(&blocks).expect("amplification of a valid algebra")
    }

    /// Assemble an `n × n` matrix over `self` (row-major entries) into an
    /// element of `M_n(self)`.
    pub fn assemble(&self, n: usize, entries: &[Element]) -> Element {
        assert_eq!(entries.len(), n * n);
        let blocks = self
            .blocks
            .iter()
            .enumerate()
            .map(|(i, &k)| {
                let mut m = Mat::zeros(n * k, n * k);
                for a in 0..n {
                    for b in 0..n {
                        m.view_mut((a * k, b * k), (k, k)).copy_from(&entries[a * n + b].blocks[i]);
                    }
                }
                m
            })
            .collect();
        Element { blocks }
    }

    /// Entry `(a, b)` of an element of `M_n(self)`.
    pub fn entry(&self, n: usize, x: &Element, a: usize, b: usize) -> Element {
        let _ = n;
        let blocks = self
            .blocks
            .iter()
            .enumerate()
            .map(|(i, &k)| x.blocks[i].view((a * k, b * k), (k, k)).into_owned())
            .collect();
        Element { blocks }
    }
}

impl Element {
    pub fn star(&self) -> Element {
        Element { blocks: self.blocks.iter().map(|b| b.adjoint()).collect() }
    }

    pub fn scale(&self, s: C64) -> Element {
        Element { blocks: self.blocks.iter().map(|b| b * s).collect() }
    }

    /// C*-norm: the largest blockwise spectral norm.
    pub fn norm(&self) -> f64 {
        self.blocks.iter().map(linalg::op_norm).fold(0.0, f64::max)
    }

    /// Largest entry modulus, used for residuals.
    pub fn max_abs(&self) -> f64 {
        self.blocks.iter().map(linalg::max_abs).fold(0.0, f64::max)
    }

    pub fn dist(&self, other: &Element) -> f64 {
        (self - other).norm()
    }
}

impl<'a> Mul<&'a Element> for &'a Element {
    type Output = Element;
    fn mul(self, rhs: &'a Element) -> Element {
        Element { blocks: self.blocks.iter().zip(&rhs.blocks).map(|(a, b)| a * b).collect() }
    }
}

impl<'a> Add<&'a Element> for &'a Element {
    type Output = Element;
    fn add(self, rhs: &'a Element) -> Element {
        Element { blocks: self.blocks.iter().zip(&rhs.blocks).map(|(a, b)| a + b).collect() }
    }
}

impl<'a> Sub<&'a Element> for &'a Element {
    type Output = Element;
    fn sub(self, rhs: &'a Element) -> Element {
        Element { blocks: self.blocks.iter().zip(&rhs.blocks).map(|(a, b)| a - b).collect() }
    }
}

/// A *-homomorphism stored as a linear map on coordinates. Construction
/// validates multiplicativity and star preservation on a source basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StarHom {
    source: Algebra,
    target: Algebra,
    matrix: Mat,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HomReport {
    pub multiplicative_residual: f64,
    pub star_residual: f64,
    pub is_unital: bool,
}

impl StarHom {
    pub fn new(source: Algebra, target: Algebra, matrix: Mat, tol: f64) -> Result<Self> {
        if matrix.shape() != (target.dim(), source.dim()) {
            return Err(Error::ShapeMismatch(format!(
                "homomorphism matrix is {:?}, expected {:?}",
                matrix.shape(),
                (target.dim(), source.dim())
            )));
        }
        let h = StarHom { source, target, matrix };
        let report = check_hom(&h, tol)?;
        let residual = report.multiplicative_residual.max(report.star_residual);
        if residual > tol {
            return Err(Error::NotHomomorphism { residual });
        }
        Ok(h)
    }

    /// Builds the coordinate matrix from a function evaluated on basis
    /// elements, then validates.
    pub fn from_fn(
        source: Algebra,
        target: Algebra,
        f: impl Fn(&Element) -> Element,
        tol: f64,
    ) -> Result<Self> {
        let cols: Vec<Vector> = source.basis().iter().map(|b| target.coords(&f(b))).collect();
        let m = linalg::columns(&cols, target.dim());
        StarHom::new(source, target, m, tol)
    }

    /// Wraps a coordinate matrix without validation, so that its residuals
    /// can be measured with [`check_hom`].
    pub fn unchecked(source: Algebra, target: Algebra, matrix: Mat) -> Self {
        StarHom { source, target, matrix }
    }

    pub fn identity(a: &Algebra) -> Self {
        StarHom { source: a.clone(), target: a.clone(), matrix: Mat::identity(a.dim(), a.dim()) }
    }

    pub fn source(&self) -> &Algebra {
        &self.source
    }

    pub fn target(&self) -> &Algebra {
        &self.target
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    pub fn apply(&self, x: &Element) -> Element {
        self.target.from_coords(&(&self.matrix * self.source.coords(x)))
    }

    pub fn compose(&self, first: &StarHom) -> StarHom {
        assert_eq!(first.target, self.source);
        StarHom {
            source: first.source.clone(),
            target: self.target.clone(),
            matrix: &self.matrix * &first.matrix,
        }
    }
}

/// Residuals of multiplicativity and star preservation over a source basis.
pub fn check_hom(h: &StarHom, tol: f64) -> Result<HomReport> {
    if h.matrix.shape() != (h.target.dim(), h.source.dim()) {
        return Err(Error::ShapeMismatch("homomorphism matrix".into()));
    }
    let basis = h.source.basis();
    let images: Vec<Element> = basis.iter().map(|b| h.apply(b)).collect();
    let mut mult: f64 = 0.0;
    for (i, bi) in basis.iter().enumerate() {
        for (j, bj) in basis.iter().enumerate() {
            let prod = bi * bj;
            // products of matrix units are zero or a single matrix unit
            if prod.max_abs() == 0.0 {
                mult = mult.max((&images[i] * &images[j]).max_abs());
            } else {
                mult = mult.max(h.apply(&prod).dist(&(&images[i] * &images[j])));
            }
        }
    }
    let mut star: f64 = 0.0;
    for (k, b) in basis.iter().enumerate() {
        star = star.max(h.apply(&b.star()).dist(&images[k].star()));
    }
    let is_unital = h.apply(&h.source.unit()).dist(&h.target.unit()) <= tol;
    Ok(HomReport { multiplicative_residual: mult, star_residual: star, is_unital })
}

/// Faithful trace-type functional `τ(x) = Σ w_i tr(x_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PositiveFunctional {
    weights: Vec<f64>,
}

impl PositiveFunctional {
    pub fn new(algebra: &Algebra, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != algebra.num_blocks() {
            return Err(Error::ShapeMismatch("one weight per block".into()));
        }
        if weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::BadParam("weights must be strictly positive".into()));
        }
        Ok(PositiveFunctional { weights })
    }

    /// The plain trace of the faithful representation.
    pub fn trace(algebra: &Algebra) -> Self {
        PositiveFunctional { weights: vec![1.0; algebra.num_blocks()] }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn apply(&self, x: &Element) -> C64 {
        x.blocks.iter().zip(&self.weights).map(|(b, w)| b.trace() * w).sum()
    }

    /// Value on the `k`-th matrix unit.
    pub fn on_basis(&self, algebra: &Algebra, k: usize) -> f64 {
        let (i, r, c) = algebra.coord_location(k);
        if r == c {
            self.weights[i]
        } else {
            0.0
        }
    }
}

/// Choi matrices `Σ_{pq} E_{pq} ⊗ π(T(E_{pq}))`, one per source block, of a
/// linear map given on coordinates. `T` is completely positive iff all are
/// positive semidefinite.
pub fn choi_blocks(source: &Algebra, target: &Algebra, map: &Mat) -> Vec<Mat> {
    let nt = target.rep_dim();
    source
        .blocks()
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let mut choi = Mat::zeros(n * nt, n * nt);
            for p in 0..n {
                for q in 0..n {
                    let col = map.column(source.coord_index(i, p, q)).into_owned();
                    let img = target.represent(&target.from_coords(&col));
                    choi.view_mut((p * nt, q * nt), (nt, nt)).copy_from(&img);
                }
            }
            choi
        })
        .collect()
}

/// Smallest eigenvalue over all Choi blocks; a non-Hermitian block counts as
/// `−‖C − C*‖` so that maps not preserving adjoints are never accepted.
pub fn choi_min_eigenvalue(source: &Algebra, target: &Algebra, map: &Mat) -> f64 {
    choi_blocks(source, target, map)
        .iter()
        .map(|m| linalg::min_eigenvalue(m).min(-linalg::max_abs(&(m - m.adjoint()))))
        .fold(f64::INFINITY, f64::min)
}

/// Applies a coordinate matrix to an element.
pub fn apply_map(source: &Algebra, target: &Algebra, map: &Mat, x: &Element) -> Element {
    target.from_coords(&(map * source.coords(x)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rng_from_seed;

    #[test]
    fn make_algebra_examples() {
        let a = Algebra::new(&[1]).unwrap();
        assert_eq!((a.dim(), a.rep_dim()), (1, 1));
        let m2 = Algebra::new(&[2]).unwrap();
        assert_eq!((m2.dim(), m2.rep_dim()), (4, 2));
        let c3 = Algebra::new(&[1, 1, 1]).unwrap();
        assert_eq!((c3.dim(), c3.rep_dim()), (3, 3));
        // pointwise arithmetic on the 3-point space
        let f = c3.from_coords(&Vector::from_vec(vec![cr(1.0), cr(2.0), cr(3.0)]));
        let g = c3.from_coords(&Vector::from_vec(vec![cr(4.0), cr(5.0), cr(6.0)]));
        let prod = c3.coords(&(&f * &g));
        assert_eq!(prod, Vector::from_vec(vec![cr(4.0), cr(10.0), cr(18.0)]));
    }

    #[test]
    fn make_algebra_errors() {
        assert_eq!(Algebra::new(&[]), Err(Error::EmptyBlocks));
        assert_eq!(Algebra::new(&[2, 0]), Err(Error::NonpositiveBlock));
    }

    #[test]
    fn positivity_examples() {
        let m2 = Algebra::new(&[2]).unwrap();
        assert!(m2.is_positive(&m2.unit(), 1e-12));
        let mut d = m2.unit();
        d.blocks[0][(1, 1)] = cr(-1.0);
        assert!(!m2.is_positive(&d, 1e-12));
        let c3 = Algebra::new(&[1, 1, 1]).unwrap();
        let mut rng = rng_from_seed(5);
        let x = c3.random_element(&mut rng);
        assert!(c3.is_positive(&(&x.star() * &x), 1e-12));
    }

    #[test]
    fn multiplication_matrices_agree_with_products() {
        let a = Algebra::new(&[2, 1, 3]).unwrap();
        let mut rng = rng_from_seed(9);
        let x = a.random_element(&mut rng);
        let y = a.random_element(&mut rng);
        let l = a.left_mult_matrix(&x) * a.coords(&y);
        let r = a.right_mult_matrix(&y) * a.coords(&x);
        let xy = a.coords(&(&x * &y));
        assert!((l - &xy).norm() < 1e-12);
        assert!((r - &xy).norm() < 1e-12);
        let s = a.star_matrix() * linalg::conj_vec(&a.coords(&x));
        assert!((s - a.coords(&x.star())).norm() < 1e-14);
    }

    #[test]
    fn hom_examples() {
        let m2 = Algebra::new(&[2]).unwrap();
        let id = StarHom::identity(&m2);
        let r = check_hom(&id, 1e-12).unwrap();
        assert_eq!(r.multiplicative_residual, 0.0);
        assert!(r.is_unital);

        let pair = Algebra::new(&[2, 2]).unwrap();
        let diag = StarHom::from_fn(
            m2.clone(),
            pair.clone(),
            |x| Element { blocks: vec![x.blocks[0].clone(), x.blocks[0].clone()] },
            1e-12,
        )
        .unwrap();
        let r = check_hom(&diag, 1e-12).unwrap();
        assert_eq!(r.multiplicative_residual, 0.0);
        assert!(r.is_unital);

        let not_hom = Mat::identity(4, 4) * cr(2.0);
        assert!(matches!(
            StarHom::new(m2.clone(), m2, not_hom, 1e-9),
            Err(Error::NotHomomorphism { .. })
        ));
    }

    #[test]
    fn amplification_roundtrip() {
        let a = Algebra::new(&[1, 2]).unwrap();
        let mut rng = rng_from_seed(2);
        let entries: Vec<Element> = (0..4).map(|_| a.random_element(&mut rng)).collect();
        let big = a.assemble(2, &entries);
        assert_eq!(a.amplified(2).dim(), 4 + 16);
        for p in 0..2 {
            for q in 0..2 {
                assert_eq!(a.entry(2, &big, p, q), entries[p * 2 + q]);
            }
        }
    }

    #[test]
    fn choi_of_trace_and_transpose() {
        let m2 = Algebra::new(&[2]).unwrap();
        let c = Algebra::new(&[1]).unwrap();
        let tr = Mat::from_row_slice(1, 4, &[cr(1.0), cr(0.0), cr(0.0), cr(1.0)]);
        // Choi of the trace is the 2x2 identity
        let blocks = choi_blocks(&m2, &c, &tr);
        assert!(linalg::max_abs(&(&blocks[0] - Mat::identity(2, 2))) < 1e-15);
        let mut transpose = Mat::zeros(4, 4);
        for r in 0..2 {
            for cc in 0..2 {
                transpose[(m2.coord_index(0, cc, r), m2.coord_index(0, r, cc))] = cr(1.0);
            }
        }
        assert!((choi_min_eigenvalue(&m2, &m2, &transpose) + 1.0).abs() < 1e-12);
        assert!(choi_min_eigenvalue(&m2, &m2, &Mat::identity(4, 4)) > -1e-12);
    }
}
