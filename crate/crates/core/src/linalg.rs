//! Small dense complex linear-algebra helpers shared by every module.
//!
//! Everything here works on `nalgebra::DMatrix<Complex64>`; the spectral
//! decompositions (SVD, Hermitian eigenproblems) are delegated to faer.
//! Hermitian eigenvalue computation is the only positivity test used
//! anywhere in the crate.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex64;
pub type Mat = DMatrix<C64>;
pub type Vector = DVector<C64>;

/// Relative cut-off below which singular values count as zero.
pub const RANK_REL_TOL: f64 = 1e-10;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex(rng: &mut ChaCha8Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Mat {
    Mat::from_fn(rows, cols, |_, _| random_complex(rng))
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> Mat {
    let g = random_matrix(rng, n, n);
    (&g + g.adjoint()) * cr(0.5)
}

/// Haar-ish random unitary from the QR factorisation of a Gaussian matrix.
pub fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> Mat {
    let g = random_matrix(rng, n, n);
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut phases = Mat::identity(n, n);
    for i in 0..n {
        let d = r[(i, i)];
        if d.norm() > 0.0 {
            phases[(i, i)] = d / cr(d.norm());
        }
    }
    q * phases
}

pub fn hermitian_part(m: &Mat) -> Mat {
    (m + m.adjoint()) * cr(0.5)
}

fn to_faer(m: &Mat) -> faer::Mat<faer::c64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, faer::c64>) -> Mat {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// `a b`. nalgebra multiplies complex matrices with a generic kernel, so
/// anything beyond toy sizes goes through faer's blocked one.
pub fn mul(a: &Mat, b: &Mat) -> Mat {
    assert_eq!(a.ncols(), b.nrows(), "dimension mismatch in product");
    if a.nrows() * a.ncols() * b.ncols() < 4096 {
        return a * b;
    }
    from_faer((to_faer(a) * to_faer(b)).as_ref())
}

/// `a^H b`.
pub fn mul_adj(a: &Mat, b: &Mat) -> Mat {
    assert_eq!(a.nrows(), b.nrows(), "dimension mismatch in product");
    if a.nrows() * a.ncols() * b.ncols() < 4096 {
        return a.adjoint() * b;
    }
    from_faer((to_faer(a).adjoint() * to_faer(b)).as_ref())
}

/// `a b^H`.
pub fn mul_by_adj(a: &Mat, b: &Mat) -> Mat {
    assert_eq!(a.ncols(), b.ncols(), "dimension mismatch in product");
    if a.nrows() * a.ncols() * b.nrows() < 4096 {
        return a * b.adjoint();
    }
    from_faer((to_faer(a) * to_faer(b).adjoint()).as_ref())
}

/// Largest deviation of the columns of `q` from orthonormality.
fn orthonormality_defect(q: &Mat) -> f64 {
    max_abs(&(mul_adj(q, q) - Mat::identity(q.ncols(), q.ncols())))
}

/// Acceptance bound for a decomposition of a matrix of size `n` and scale `scale`.
fn decomposition_tol(n: usize, scale: f64) -> f64 {
    1e-12 * (n as f64).sqrt().max(1.0) * scale.max(f64::MIN_POSITIVE)
}

fn eigen_defect(h: &Mat, vals: &[f64], vecs: &Mat) -> f64 {
    let scaled = Mat::from_fn(vecs.nrows(), vecs.ncols(), |i, j| vecs[(i, j)] * vals[j]);
    max_abs(&(mul_by_adj(&scaled, vecs) - h)).max(orthonormality_defect(vecs) * max_abs(h))
}

/// Eigen-decomposition of the Hermitian part of `m`, eigenvalues ascending.
///
/// Each decomposition is verified (reconstruction and orthonormality) and
/// recomputed by a second library if it fails; see [`svd`].
pub fn hermitian_eigen(m: &Mat) -> (Vec<f64>, Mat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), Mat::zeros(0, 0));
    }
    let h = hermitian_part(m);
    let tol = decomposition_tol(n, max_abs(&h));
    let (mut vals, mut vecs) = match to_faer(&h).self_adjoint_eigen(faer::Side::Lower) {
        Ok(eig) => {
            let sd = eig.S();
            ((0..n).map(|i| sd.column_vector()[i].re).collect::<Vec<f64>>(), from_faer(eig.U()))
        }
        Err(_) => (vec![f64::NAN; n], Mat::zeros(n, n)),
    };
    if !(eigen_defect(&h, &vals, &vecs) <= tol) {
        let eig = h.clone().symmetric_eigen();
        let (v2, u2) = (eig.eigenvalues.iter().cloned().collect::<Vec<f64>>(), eig.eigenvectors);
        if eigen_defect(&h, &v2, &u2) < eigen_defect(&h, &vals, &vecs) || vals[0].is_nan() {
            (vals, vecs) = (v2, u2);
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let values = order.iter().map(|&i| vals[i]).collect();
    let vectors = Mat::from_fn(n, n, |r, col| vecs[(r, order[col])]);
    (values, vectors)
}

pub fn min_eigenvalue(m: &Mat) -> f64 {
    hermitian_eigen(m).0.first().copied().unwrap_or(0.0)
}

/// Largest singular value.
pub fn op_norm(m: &Mat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    svd(m, false).s.iter().cloned().fold(0.0, f64::max)
}

/// `m = U diag(s) V^H`; thin unless `full`.
///
/// Both nalgebra's and faer's complex SVDs occasionally lose accuracy on
/// matrices with large, exactly degenerate singular-value clusters (each on
/// inputs the other handles). Every decomposition is therefore verified —
/// reconstruction and orthonormality of `U`, `V` — and recomputed by the
/// other library, then via the Hermitian eigenproblem of `m^H m`, if it fails.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Mat,
    pub s: Vec<f64>,
    pub v: Mat,
}

impl Svd {
    fn defect(&self, m: &Mat) -> f64 {
        if self.s.iter().any(|x| !x.is_finite()) {
            return f64::INFINITY;
        }
        let k = self.s.len();
        let us = Mat::from_fn(self.u.nrows(), k, |i, j| self.u[(i, j)] * self.s[j]);
        let vk = self.v.columns(0, k).into_owned();
        let scale = max_abs(m);
        max_abs(&(mul_by_adj(&us, &vk) - m))
            .max(orthonormality_defect(&self.u) * scale)
            .max(orthonormality_defect(&self.v) * scale)
    }
}

fn svd_faer(m: &Mat, full: bool) -> Option<Svd> {
    let fm = to_faer(m);
    let dec = if full { fm.svd() } else { fm.thin_svd() }.ok()?;
    let sd = dec.S();
    let s = (0..m.nrows().min(m.ncols())).map(|i| sd.column_vector()[i].re).collect();
    Some(Svd { u: from_faer(dec.U()), s, v: from_faer(dec.V()) })
}

fn svd_nalgebra(m: &Mat, full: bool) -> Option<Svd> {
    let (r, c) = m.shape();
    // nalgebra's SVD is thin; a full V comes from padding to a square matrix
    let padded = if full && r < c {
        let mut p = Mat::zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let dec = padded.try_svd(true, true, f64::EPSILON, 0)?;
    let (u, v_t) = (dec.u?, dec.v_t?);
    let k = r.min(c);
    let s: Vec<f64> = dec.singular_values.iter().take(k).cloned().collect();
    let u = u.view((0, 0), (r, if full { r.min(u.ncols()) } else { k })).into_owned();
    let v = v_t.adjoint();
    if full && r > c {
        // U is only thin here; leave completion to the eigen route
        return None;
    }
    Some(Svd { u, s, v })
}

/// Last resort: `m^H m = V diag(s²) V^H`, `U = m V / s`. Loses relative
/// accuracy below `sqrt(ε)`, but never fails to decompose.
fn svd_eigen(m: &Mat, full: bool) -> Svd {
    let (r, c) = m.shape();
    let (vals, vecs) = hermitian_eigen(&mul_adj(m, m));
    let order: Vec<usize> = (0..c).rev().collect();
    let v = Mat::from_fn(c, c, |i, j| vecs[(i, order[j])]);
    let k = r.min(c);
    let s: Vec<f64> = order.iter().take(k).map(|&i| vals[i].max(0.0).sqrt()).collect();
    let smax = s.first().copied().unwrap_or(0.0);
    let mut cols: Vec<Vector> = Vec::new();
    for (j, &sj) in s.iter().enumerate() {
        if sj > smax * 1e-7 {
            cols.push((m * v.column(j)) / cr(sj));
        }
    }
    // complete U to an orthonormal set via the complement of the found columns
    let found = columns(&cols, r);
    let target = if full { r } else { k };
    let mut u = found.clone();
    if u.ncols() < target {
        let comp = null_space_of_adjoint(&found, r);
        u = Mat::from_fn(r, target, |i, j| if j < found.ncols() { found[(i, j)] } else { comp[(i, j - found.ncols())] });
    }
    let v = if full { v } else { v.columns(0, k).into_owned() };
    Svd { u, s, v }
}

/// Orthonormal basis of the orthogonal complement of the columns of `q`
/// (assumed orthonormal) in `ℂ^n`.
fn null_space_of_adjoint(q: &Mat, n: usize) -> Mat {
    let proj = Mat::identity(n, n) - mul_by_adj(q, q);
    let (vals, vecs) = hermitian_eigen(&proj);
    let keep: Vec<usize> = (0..n).filter(|&i| vals[i] > 0.5).collect();
    Mat::from_fn(n, keep.len(), |i, j| vecs[(i, keep[j])])
}

pub fn svd(m: &Mat, full: bool) -> Svd {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        let (ku, kv) = if full { (r, c) } else { (0, 0) };
        return Svd { u: Mat::identity(r, ku), s: Vec::new(), v: Mat::identity(c, kv) };
    }
    let tol = decomposition_tol(r.max(c), max_abs(m));
    let mut best: Option<(f64, Svd)> = None;
    let backends: [fn(&Mat, bool) -> Option<Svd>; 2] = [svd_faer, svd_nalgebra];
    for candidate in backends.iter().filter_map(|f| f(m, full)) {
        let defect = candidate.defect(m);
        if defect <= tol {
            return candidate;
        }
        if best.as_ref().is_none_or(|(d, _)| defect < *d) {
            best = Some((defect, candidate));
        }
    }
    let fallback = svd_eigen(m, full);
    match best {
        Some((d, cand)) if d <= fallback.defect(m) => cand,
        _ => fallback,
    }
}

pub fn max_abs(m: &Mat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    a.kronecker(b)
}

/// Orthonormal basis (as columns) of the column span of `m`.
pub fn column_span(m: &Mat) -> Mat {
    let rows = m.nrows();
    if m.ncols() == 0 || rows == 0 {
        return Mat::zeros(rows, 0);
    }
    let dec = svd(m, false);
    let smax = dec.s.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return Mat::zeros(rows, 0);
    }
    let keep: Vec<usize> = (0..dec.s.len()).filter(|&i| dec.s[i] > smax * RANK_REL_TOL).collect();
    Mat::from_fn(rows, keep.len(), |r, col| dec.u[(r, keep[col])])
}

pub fn rank(m: &Mat) -> usize {
    column_span(m).ncols()
}

/// Orthonormal basis of the kernel of `m`, from a full SVD.
pub fn null_space(m: &Mat) -> Mat {
    let cols = m.ncols();
    if cols == 0 {
        return Mat::zeros(0, 0);
    }
    let dec = svd(m, true);
    let smax = dec.s.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..cols)
        .filter(|&i| smax == 0.0 || dec.s.get(i).is_none_or(|&s| s <= smax * RANK_REL_TOL))
        .collect();
    Mat::from_fn(cols, keep.len(), |r, col| dec.v[(r, keep[col])])
}

/// Kernel of a positive semidefinite matrix: eigenvectors whose eigenvalue is
/// at most `rel * max eigenvalue`.
pub fn psd_kernel(m: &Mat, rel: f64) -> Mat {
    psd_kernel_scaled(m, rel, 0.0)
}

/// Like [`psd_kernel`], but eigenvalues are compared against
/// `rel * max(max eigenvalue, reference)`, so an (almost) zero matrix has a
/// full kernel.
pub fn psd_kernel_scaled(m: &Mat, rel: f64, reference: f64) -> Mat {
    let (vals, vecs) = hermitian_eigen(m);
    let top = vals.iter().cloned().fold(reference, f64::max);
    let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] <= top * rel).collect();
    Mat::from_fn(m.nrows(), keep.len(), |r, col| vecs[(r, keep[col])])
}

/// Minimal-norm least-squares solution of `a x = b`.
pub fn lstsq(a: &Mat, b: &Mat) -> Mat {
    if a.ncols() == 0 {
        return Mat::zeros(0, b.ncols());
    }
    lstsq_with(&svd(a, false), b)
}

fn lstsq_with(dec: &Svd, b: &Mat) -> Mat {
    let smax = dec.s.iter().cloned().fold(0.0, f64::max);
    let eps = (smax * 1e-12).max(f64::MIN_POSITIVE);
    let utb = mul_adj(&dec.u, b);
    let scaled = Mat::from_fn(utb.nrows(), utb.ncols(), |i, j| {
        if dec.s[i] > eps {
            utb[(i, j)] / dec.s[i]
        } else {
            cr(0.0)
        }
    });
    mul(&dec.v.columns(0, dec.s.len()).into_owned(), &scaled)
}

pub fn pinv(a: &Mat) -> Mat {
    let eye = Mat::identity(a.nrows(), a.nrows());
    lstsq(a, &eye)
}

/// [`pinv`] and [`rank`] from a single decomposition.
pub fn pinv_and_rank(a: &Mat) -> (Mat, usize) {
    if a.ncols() == 0 || a.nrows() == 0 {
        return (Mat::zeros(a.ncols(), a.nrows()), 0);
    }
    let dec = svd(a, false);
    let smax = dec.s.iter().cloned().fold(0.0, f64::max);
    let rank = if smax == 0.0 { 0 } else { dec.s.iter().filter(|&&x| x > smax * RANK_REL_TOL).count() };
    (lstsq_with(&dec, &Mat::identity(a.nrows(), a.nrows())), rank)
}

/// `S^{1/2}` and `S^{-1/2}` of a positive definite matrix.
pub fn sqrt_and_inv_sqrt(s: &Mat) -> (Mat, Mat) {
    let (vals, vecs) = hermitian_eigen(s);
    let n = vals.len();
    let d = Mat::from_fn(n, n, |i, j| if i == j { cr(vals[i].max(0.0).sqrt()) } else { cr(0.0) });
    let di = Mat::from_fn(n, n, |i, j| {
        if i == j && vals[i] > 0.0 {
            cr(1.0 / vals[i].sqrt())
        } else {
            cr(0.0)
        }
    });
    (mul(&mul(&vecs, &d), &vecs.adjoint()), mul(&mul(&vecs, &di), &vecs.adjoint()))
}

/// Row-major flattening of a matrix into a column vector.
pub fn vec_of(m: &Mat) -> Vector {
    let (r, cols) = m.shape();
    Vector::from_fn(r * cols, |k, _| m[(k / cols, k % cols)])
}

pub fn unvec(v: &Vector, rows: usize, cols: usize) -> Mat {
    Mat::from_fn(rows, cols, |i, j| v[i * cols + j])
}

/// Stack vectors as columns.
pub fn columns(vs: &[Vector], len: usize) -> Mat {
    Mat::from_fn(len, vs.len(), |r, col| vs[col][r])
}

pub fn conj_mat(m: &Mat) -> Mat {
    m.map(|z| z.conj())
}

pub fn conj_vec(v: &Vector) -> Vector {
    v.map(|z| z.conj())
}

/// Group sorted values into clusters whose consecutive gaps are below `gap`.
pub fn cluster_sorted(values: &[f64], gap: f64) -> Vec<Vec<usize>> {
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for (i, v) in values.iter().enumerate() {
        match clusters.last_mut() {
            Some(cl) if (v - values[*cl.last().unwrap()]).abs() <= gap => cl.push(i),
            _ => clusters.push(vec![i]),
        }
    }
    clusters
}
