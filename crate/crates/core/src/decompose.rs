//! Realising a *-closed span of operators as a concrete block algebra.
//!
//! Given operators spanning a finite-dimensional *-algebra `𝒜 ⊆ M_d`, we find
//! a system of matrix units `e^{(p)}_{ij}` in `𝒜` and hence an isomorphism
//! `⊕_p M_{n_p} ≅ 𝒜`. The steps are the textbook ones:
//!
//! 1. a random self-adjoint central element splits `𝒜` by its spectral
//!    projections into the central summands;
//! 2. in each summand a random self-adjoint element gives `n_p` orthogonal
//!    minimal projections `e_1, …, e_n`;
//! 3. `e_1 x e_j`, normalised, is a partial isometry `e_{1j}`, and
//!    `e_{ij} = e_{1i}^* e_{1j}`.
//!
//! All randomness comes from an explicit seed.

use crate::algebra::{Algebra, Element};
use crate::error::{Error, Result};
use crate::linalg::{self, cr, Mat, Vector, C64};
use crate::hilbert_module::OperatorSpace;

/// Relative eigenvalue gap separating spectral clusters.
const CLUSTER_GAP: f64 = 1e-6;

/// An isomorphism between a concrete [`Algebra`] and an operator algebra.
#[derive(Debug, Clone)]
pub struct Realization {
    pub algebra: Algebra,
    /// `units[k]` is the operator of the `k`-th matrix unit of `algebra`.
    pub units: Vec<Mat>,
    /// Multiplicity of each block in the ambient space.
    pub multiplicities: Vec<usize>,
    /// The realised operator span.
    pub span: OperatorSpace,
}

impl Realization {
    pub fn operator(&self, x: &Element) -> Mat {
        self.operator_of_coords(&self.algebra.coords(x))
    }

    pub fn operator_of_coords(&self, v: &Vector) -> Mat {
        let d = self.span.rows;
        let mut m = Mat::zeros(d, d);
        for (k, u) in self.units.iter().enumerate() {
            if v[k].norm() > 0.0 {
                m += u * v[k];
            }
        }
        m
    }

    /// Coordinates of an operator in the realised span:
    /// `t_{ij} = tr(e_{ji} T) / m_p`.
    pub fn coords_of(&self, t: &Mat) -> Vector {
        let a = &self.algebra;
        Vector::from_fn(a.dim(), |k, _| {
            let (p, i, j) = a.coord_location(k);
            let e_ji = &self.units[a.coord_index(p, j, i)];
            // tr(E T) = Σ E_ab T_ba, without forming the product
            let tr: C64 = e_ji.iter().zip(t.transpose().iter()).map(|(x, y)| x * y).sum();
            tr / cr(self.multiplicities[p] as f64)
        })
    }

    pub fn element_of(&self, t: &Mat) -> Element {
        self.algebra.from_coords(&self.coords_of(t))
    }

    /// Distance of `t` from the realised span.
    pub fn membership_residual(&self, t: &Mat) -> f64 {
        self.span.membership_residual(t)
    }

    /// Largest violation of the matrix-unit relations (in the given frame,
    /// i.e. after conjugation by `frame`).
    pub fn unit_residual(&self, frame: Option<(&Mat, &Mat)>) -> f64 {
        let a = &self.algebra;
        let conj = |m: &Mat| match frame {
            Some((h, hi)) => h * m * hi,
            None => m.clone(),
        };
        let units: Vec<Mat> = self.units.iter().map(conj).collect();
        let mut res: f64 = 0.0;
        for k in 0..a.dim() {
            let (p, i, j) = a.coord_location(k);
            res = res.max(linalg::max_abs(&(units[k].adjoint() - &units[a.coord_index(p, j, i)])));
            for l in 0..a.dim() {
                let (p2, i2, j2) = a.coord_location(l);
                let prod = &units[k] * &units[l];
                let expected = if p == p2 && j == i2 {
                    units[a.coord_index(p, i, j2)].clone()
                } else {
                    Mat::zeros(prod.nrows(), prod.ncols())
                };
                res = res.max(linalg::max_abs(&(prod - expected)));
            }
        }
        res
    }
}

fn hermitian_random(ops: &[Mat], rng: &mut rand_chacha::ChaCha8Rng) -> Mat {
    let d = ops[0].nrows();
    let mut h = Mat::zeros(d, d);
    for o in ops {
        h += o * linalg::random_complex(rng);
    }
    linalg::hermitian_part(&h)
}

/// Spectral projections of a Hermitian matrix, clustered by relative gap.
fn spectral_projections(h: &Mat) -> Vec<(f64, Mat)> {
    let (vals, vecs) = linalg::hermitian_eigen(h);
    let scale = vals.iter().map(|v| v.abs()).fold(1e-300, f64::max);
    let clusters = linalg::cluster_sorted(&vals, CLUSTER_GAP * scale);
    clusters
        .into_iter()
        .map(|cl| {
            let v = Mat::from_fn(h.nrows(), cl.len(), |r, c| vecs[(r, cl[c])]);
            let mean = cl.iter().map(|&i| vals[i]).sum::<f64>() / cl.len() as f64;
            (mean, &v * v.adjoint())
        })
        .collect()
}

/// Orthonormal basis of the center of the algebra spanned by `basis`.
fn center(basis: &[Mat]) -> Vec<Mat> {
    let dim = basis.len();
    let d = basis[0].nrows();
    // z = Σ c_i B_i commutes with every B_j
    let mut normal = Mat::zeros(dim, dim);
    for bj in basis {
        let cols: Vec<Vector> = basis.iter().map(|bi| linalg::vec_of(&(bi * bj - bj * bi))).collect();
        let m = linalg::columns(&cols, d * d);
        normal += m.adjoint() * &m;
    }
    // anchored to the basis scale: for commutative spans `normal` is pure
    // rounding noise and must count as zero
    let scale: f64 = basis.iter().map(|b| b.norm_squared()).sum();
    let ker = linalg::psd_kernel_scaled(&normal, 1e-10, scale * scale);
    (0..ker.ncols())
        .map(|c| {
            let mut z = Mat::zeros(d, d);
            for (i, bi) in basis.iter().enumerate() {
                z += bi * ker[(i, c)];
            }
            z
        })
        .collect()
}

/// Realises the *-algebra spanned by `ops` (closed under products and the
/// ordinary adjoint) as a block algebra.
pub fn realize(ops: &[Mat], seed: u64) -> Result<Realization> {
    if ops.is_empty() {
        return Err(Error::Decomposition("empty operator span".into()));
    }
    let d = ops[0].nrows();
    let span = OperatorSpace::span(d, d, ops);
    let basis = span.elements();
    if basis.is_empty() {
        return Err(Error::Decomposition("zero operator span".into()));
    }
    let mut rng = linalg::rng_from_seed(seed);

    let z = center(&basis);
    if z.is_empty() {
        return Err(Error::Decomposition("trivial center".into()));
    }
    let hz = hermitian_random(&z, &mut rng);
    let central: Vec<Mat> = spectral_projections(&hz)
        .into_iter()
        .map(|(_, p)| p)
        .filter(|p| span.membership_residual(p) < 1e-6 * (p.trace().re.max(1.0)).sqrt())
        .collect();

    let mut blocks = Vec::new();
    let mut mults = Vec::new();
    let mut block_units: Vec<Vec<Mat>> = Vec::new();
    for p in &central {
        let rank_p = p.trace().re.round() as usize;
        let summand: Vec<Mat> = basis.iter().map(|b| b * p).collect();
        let dim_p = OperatorSpace::span(d, d, &summand).dim();
        let n = (dim_p as f64).sqrt().round() as usize;
        if n == 0 || n * n != dim_p || !rank_p.is_multiple_of(n) {
            return Err(Error::Decomposition(format!("summand of dimension {dim_p} and rank {rank_p}")));
        }
        let h = hermitian_random(&summand, &mut rng);
        // shift so the summand's spectrum stays away from the zero eigenspace of (1 - p)
        let shift = cr(2.0 * linalg::op_norm(&h) + 1.0);
        let h = &h + p * shift;
        let minimal: Vec<Mat> = spectral_projections(&(p * &h * p))
            .into_iter()
            .map(|(_, e)| e)
            .filter(|e| linalg::max_abs(&(p * e - e)) < 1e-8 && e.trace().re > 0.5)
            .collect();
        if minimal.len() != n {
            return Err(Error::Decomposition(format!("found {} minimal projections, expected {n}", minimal.len())));
        }
        let m = rank_p / n;
        let x = {
            let mut acc = Mat::zeros(d, d);
            for s in &summand {
                acc += s * linalg::random_complex(&mut rng);
            }
            acc
        };
        let e1 = &minimal[0];
        let mut first_row = Vec::with_capacity(n);
        for ej in &minimal {
            let y = e1 * &x * ej;
            let c = (&y * y.adjoint()).trace().re / m as f64;
            if c <= 1e-14 {
                return Err(Error::Decomposition("vanishing off-diagonal corner".into()));
            }
            first_row.push(y * cr(1.0 / c.sqrt()));
        }
        // e_11 should be e_1 itself; replace to avoid phase drift
        first_row[0] = e1.clone();
        let mut units = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                units.push(first_row[i].adjoint() * &first_row[j]);
            }
        }
        blocks.push(n);
        mults.push(m);
        block_units.push(units);
    }
    if blocks.is_empty() {
        return Err(Error::Decomposition("no central projections".into()));
    }

    // canonical order: by block size, then multiplicity (stable otherwise)
    let mut order: Vec<usize> = (0..blocks.len()).collect();
    order.sort_by_key(|&i| (blocks[i], mults[i]));
    let blocks_sorted: Vec<usize> = order.iter().map(|&i| blocks[i]).collect();
    let mults_sorted: Vec<usize> = order.iter().map(|&i| mults[i]).collect();
    let units: Vec<Mat> = order.iter().flat_map(|&i| block_units[i].clone()).collect();

    let total: usize = blocks_sorted.iter().map(|n| n * n).sum();
    if total != span.dim() {
        return Err(Error::Decomposition(format!(
            "block dimensions sum to {total}, span has dimension {}",
            span.dim()
        )));
    }
    let algebra = Algebra::new(&blocks_sorted)?;
    Ok(Realization { algebra, units, multiplicities: mults_sorted, span })
}

/// Realises a span that is *-closed for the adjoint `t ↦ S^{-1} t^H S` of a
/// module with scalar gram `S`; `frame = (S^{1/2}, S^{-1/2})`.
pub fn realize_in_frame(ops: &[Mat], frame: (&Mat, &Mat), seed: u64) -> Result<Realization> {
    let (h, hi) = frame;
    let conj: Vec<Mat> = ops.iter().map(|t| h * t * hi).collect();
    let r = realize(&conj, seed)?;
    let units: Vec<Mat> = r.units.iter().map(|u| hi * u * h).collect();
    let d = ops[0].nrows();
    let span = OperatorSpace::span(d, d, ops);
    Ok(Realization { algebra: r.algebra, units, multiplicities: r.multiplicities, span })
}
