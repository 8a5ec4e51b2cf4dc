//! Curated and random Frobenius structures.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::adjunction::LocalAdjunction;
use crate::algebra::{Algebra, Element, StarHom};
use crate::construct;
use crate::decompose;
use crate::error::{Error, Result};
use crate::frobenius::{self, FrobeniusStructure, TensorAlgebra};
use crate::hilbert_module::HilbertModule;
use crate::iso::{self, FrobeniusIso};
use crate::linalg::{self, cr, Mat, Vector, C64};

/// Tolerance used when validating generated structures.
pub const BUILD_TOL: f64 = 1e-9;
/// Generated algebras stay at or below this dimension so that the
/// `d² × d²` tensor-algebra systems remain desk-sized.
pub const MAX_RANDOM_DIM: usize = 18;
pub const RETRY_CAP: usize = 500;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InstanceKind {
    Trivial,
    MatrixTrace { n: usize, lambda: f64 },
    BranchedGrid { m: usize },
    GroupInclusion { group: GroupTable, subgroup: Vec<usize> },
    Random { budget: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    #[serde(flatten)]
    pub kind: InstanceKind,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub id: String,
    pub spec: InstanceSpec,
    pub structure: FrobeniusStructure,
    /// Free-form provenance (construction route, attempts, ...).
    pub notes: Vec<String>,
}

impl InstanceSpec {
    pub fn id(&self) -> String {
        match &self.kind {
            InstanceKind::Trivial => "trivial".into(),
            InstanceKind::MatrixTrace { n, lambda } => format!("matrix_trace_n{n}_l{lambda}"),
            InstanceKind::BranchedGrid { m } => format!("branched_grid_m{m}"),
            InstanceKind::GroupInclusion { group, subgroup } => {
                format!("group_inclusion_g{}_h{}", group.order(), subgroup.len())
            }
            InstanceKind::Random { budget } => format!("random_b{budget}_s{}", self.seed),
        }
    }

    pub fn build(&self) -> Result<Instance> {
        let (structure, notes) = match &self.kind {
            InstanceKind::Trivial => (trivial().0, vec![]),
            InstanceKind::MatrixTrace { n, lambda } => (matrix_trace(*n, *lambda)?, vec![]),
            InstanceKind::BranchedGrid { m } => (branched_grid(*m)?, vec![]),
            InstanceKind::GroupInclusion { group, subgroup } => (group_inclusion(group, subgroup, self.seed)?, vec![]),
            InstanceKind::Random { budget } => {
                let r = random_instance(self.seed, *budget)?;
                (r.structure, r.notes)
            }
        };
        Ok(Instance { id: self.id(), spec: self.clone(), structure, notes })
    }
}

fn scalar_inclusion(c: &Algebra) -> StarHom {
    let a = Algebra::new(&[1]).expect("ℂ");
    let unit = c.unit();
    StarHom::from_fn(a, c.clone(), |x| unit.scale(x.blocks[0][(0, 0)]), BUILD_TOL).expect("unital inclusion of ℂ")
}

/// `ℂ` over `ℂ` with `ε = id`, and its conjugation adjunction.
pub fn trivial() -> (FrobeniusStructure, LocalAdjunction) {
    let c = Algebra::new(&[1]).expect("ℂ");
    let eta = scalar_inclusion(&c);
    let s = FrobeniusStructure::new(eta, Mat::identity(1, 1), BUILD_TOL).expect("trivial structure");
    let (adj, _) = construct::ladj_from_frob(&s).expect("trivial adjunction");
    (s, adj)
}

/// `M_n` over `ℂ` with `ε = λ·Tr`.
pub fn matrix_trace(n: usize, lambda: f64) -> Result<FrobeniusStructure> {
    if n == 0 || !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::BadParam(format!("matrix_trace needs n ≥ 1 and λ > 0, got n = {n}, λ = {lambda}")));
    }
    let c = Algebra::new(&[n])?;
    let eta = scalar_inclusion(&c);
    let eps = Mat::from_fn(1, n * n, |_, k| if k / n == k % n { cr(lambda) } else { cr(0.0) });
    FrobeniusStructure::new(eta, eps, BUILD_TOL)
}

/// Functions on the grid `{j/m : −m ≤ j ≤ m}` over the even functions, with
/// the averaging map `ε(c)(t) = (c(t) + c(−t))/2`.
///
/// Coordinate `j` of `C` is the point `(j − m)/m`; coordinate `p` of `A` is
/// the pair `±p/m`.
pub fn branched_grid(m: usize) -> Result<FrobeniusStructure> {
    if m == 0 {
        return Err(Error::BadParam("branched_grid needs m ≥ 1".into()));
    }
    let n = 2 * m + 1;
    let a = Algebra::new(&vec![1; m + 1])?.with_label("even functions");
    let c = Algebra::new(&vec![1; n])?.with_label("grid functions");
    let eta = Mat::from_fn(n, m + 1, |j, p| if j.abs_diff(m) == p { cr(1.0) } else { cr(0.0) });
    let eta = StarHom::new(a, c, eta, BUILD_TOL)?;
    let eps = Mat::from_fn(m + 1, n, |p, j| match (j.abs_diff(m) == p, p) {
        (false, _) => cr(0.0),
        (true, 0) => cr(1.0),
        (true, _) => cr(0.5),
    });
    FrobeniusStructure::new(eta, eps, BUILD_TOL)
}

/// Image of an algebraic tensor of the grid instance in 2×2 matrix
/// functions on `{p/m : 0 ≤ p ≤ m}`:
/// `c₁ ⊗ c₂ ↦ ½ [[c₁c₂, c₁c₂⁻], [c₁⁻c₂, c₁⁻c₂⁻]]` with `c⁻(t) = c(−t)`.
pub fn grid_image(m: usize, x: &Vector) -> Vec<Mat> {
    let n = 2 * m + 1;
    assert_eq!(x.len(), n * n, "algebraic tensor of the grid algebra expected");
    (0..=m)
        .map(|p| {
            let (plus, minus) = (m + p, m - p);
            let idx = [plus, minus];
            Mat::from_fn(2, 2, |r, s| x[idx[r] * n + idx[s]] * 0.5)
        })
        .collect()
}

/// Multiplicativity and branch-point checks of [`grid_image`].
#[derive(Debug, Clone, Serialize)]
pub struct GridImageReport {
    pub m: usize,
    /// Image of the balancing relations.
    pub relation_residual: f64,
    /// `max ‖img(x·y) − img(x) img(y)‖` over samples.
    pub multiplicativity_residual: f64,
    /// `max |img(x)(0)₀₀ − img(x)(0)₀₁|` over samples; zero by construction.
    pub branch_point_defect: f64,
}

pub fn grid_image_report(m: usize, samples: usize, seed: u64) -> Result<GridImageReport> {
    let s = branched_grid(m)?;
    let t = TensorAlgebra::new(&s);
    let n = 2 * m + 1;
    let proj = Mat::identity(n * n, n * n) - &t.basis * t.basis.adjoint();
    let mut relation: f64 = 0.0;
    for k in 0..proj.ncols() {
        let img = grid_image(m, &proj.column(k).into_owned());
        relation = relation.max(img.iter().map(linalg::max_abs).fold(0.0, f64::max));
    }
    let xs = t.random_elements(2 * samples, seed);
    let mut mult: f64 = 0.0;
    let mut branch: f64 = 0.0;
    for pair in xs.chunks(2) {
        let (ix, iy) = (grid_image(m, &pair[0]), grid_image(m, &pair[1]));
        let ixy = grid_image(m, &t.product(&pair[0], &pair[1]));
        for p in 0..=m {
            mult = mult.max(linalg::max_abs(&(&ixy[p] - &ix[p] * &iy[p])));
        }
        for img in [&ix[0], &iy[0], &ixy[0]] {
            branch = branch.max((img[(0, 0)] - img[(0, 1)]).norm());
        }
    }
    Ok(GridImageReport { m, relation_residual: relation, multiplicativity_residual: mult, branch_point_defect: branch })
}

/// One row of the grid tower study.
#[derive(Debug, Clone, Serialize)]
pub struct TowerRow {
    pub m: usize,
    /// Index element values at the points `0, 1/m, …, 1`.
    pub index: Vec<f64>,
    /// `‖x̃_m·y − y‖` on the finest grid, where `x̃_m` is the level-`m`
    /// tensor identity spread over cells of the finest grid.
    pub bai_defect: f64,
}

/// Index elements per level and the approximate-unit defect of the level-`m`
/// identities against a fixed smooth `y = y₁ ⊗ y₂` sampled on the grid of
/// resolution `fine` (each `m` must divide `fine`).
pub fn grid_tower(levels: &[usize], fine: usize) -> Result<Vec<TowerRow>> {
    let y1 = |s: f64| (1.5 * s).exp() + 0.3 * s * s;
    let y2 = |s: f64| 1.0 / (1.0 + s * s) + 0.5 * s;
    levels
        .iter()
        .map(|&m| {
            if m == 0 || !fine.is_multiple_of(m) {
                return Err(Error::BadParam(format!("level {m} does not divide the fine grid {fine}")));
            }
            let s = branched_grid(m)?;
            let t = TensorAlgebra::new(&s);
            let qb = frobenius::quasi_basis(&s, &t)?;
            let index = frobenius::watatani_index(&s, &qb, 1e-9)?;
            let index: Vec<f64> = (0..=m).map(|p| index.blocks[m + p][(0, 0)].re).collect();

            // cell of a fine point: nearest level-m point, ties towards zero
            let cell = |j: i64| -> i64 {
                let ratio = (fine / m) as i64;
                let q = j.abs() / ratio;
                let r = j.abs() % ratio;
                let k = if 2 * r > ratio { q + 1 } else { q };
                k * j.signum()
            };
            let mut defect: f64 = 0.0;
            for j in 0..=(fine as i64) {
                let s_val = j as f64 / fine as f64;
                let (kp, km) = (cell(j), cell(-j));
                // x̃ = Σ_k w_k 1_{I_k} ⊗ 1_{I_k}, w = 2 off the branch point, 1 on it
                let w = |k: i64| if k == 0 { 1.0 } else { 2.0 };
                let ind = |k1: i64, k2: i64| if k1 == k2 { w(k1) } else { 0.0 };
                let x = Mat::from_fn(2, 2, |r, c| {
                    let ks = [kp, km];
                    cr(0.5 * ind(ks[r], ks[c]))
                });
                let pts = [s_val, -s_val];
                let y = Mat::from_fn(2, 2, |r, c| cr(0.5 * y1(pts[r]) * y2(pts[c])));
                defect = defect.max(linalg::op_norm(&(&x * &y - &y)));
            }
            Ok(TowerRow { m, index, bai_defect: defect })
        })
        .collect()
}

/// A finite group by its multiplication table on `0..n`, identity `0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupTable {
    pub table: Vec<Vec<usize>>,
}

impl GroupTable {
    pub fn new(table: Vec<Vec<usize>>) -> Result<Self> {
        let n = table.len();
        if n == 0 || table.iter().any(|row| row.len() != n || row.iter().any(|&x| x >= n)) {
            return Err(Error::BadParam("group table must be a square table on 0..n".into()));
        }
        let g = GroupTable { table };
        for x in 0..n {
            if g.mul(0, x) != x || g.mul(x, 0) != x {
                return Err(Error::BadParam("element 0 must be the identity".into()));
            }
            if (0..n).all(|y| g.mul(x, y) != 0) {
                return Err(Error::BadParam(format!("element {x} has no inverse")));
            }
            for y in 0..n {
                for z in 0..n {
                    if g.mul(g.mul(x, y), z) != g.mul(x, g.mul(y, z)) {
                        return Err(Error::BadParam("group table is not associative".into()));
                    }
                }
            }
        }
        Ok(g)
    }

    pub fn cyclic(n: usize) -> Result<Self> {
        GroupTable::new((0..n).map(|x| (0..n).map(|y| (x + y) % n).collect()).collect())
    }

    /// `S₃` as permutations of `{0,1,2}`; elements `0,1,2` are the rotations.
    pub fn symmetric3() -> Self {
        let perms: [[usize; 3]; 6] = [[0, 1, 2], [1, 2, 0], [2, 0, 1], [1, 0, 2], [0, 2, 1], [2, 1, 0]];
        let index = |p: [usize; 3]| perms.iter().position(|q| *q == p).expect("closed");
        let table = (0..6)
            .map(|x| (0..6).map(|y| index([0, 1, 2].map(|i| perms[x][perms[y][i]]))).collect())
            .collect();
        GroupTable::new(table).expect("S3 table")
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn mul(&self, x: usize, y: usize) -> usize {
        self.table[x][y]
    }

    fn regular(&self, elems: &[usize], g: usize) -> Mat {
        let pos = |x: usize| elems.iter().position(|&e| e == x);
        let n = elems.len();
        let mut m = Mat::zeros(n, n);
        for (col, &h) in elems.iter().enumerate() {
            m[(pos(self.mul(g, h)).expect("closed under multiplication"), col)] = cr(1.0);
        }
        m
    }
}

/// `ℂ[H] ⊂ ℂ[G]` with `ε` restricting coefficients to `H`; both group
/// algebras are realised as block algebras by decomposing their regular
/// representations.
pub fn group_inclusion(g: &GroupTable, h: &[usize], seed: u64) -> Result<FrobeniusStructure> {
    let hs: BTreeSet<usize> = h.iter().copied().collect();
    let closed = hs.iter().all(|&x| hs.iter().all(|&y| hs.contains(&g.mul(x, y))));
    if hs.is_empty() || !hs.contains(&0) || hs.iter().any(|&x| x >= g.order()) || !closed {
        return Err(Error::NotSubgroup);
    }
    let h: Vec<usize> = hs.into_iter().collect();
    let all: Vec<usize> = (0..g.order()).collect();
    let lg: Vec<Mat> = all.iter().map(|&x| g.regular(&all, x)).collect();
    let lh: Vec<Mat> = h.iter().map(|&x| g.regular(&h, x)).collect();
    let rg = decompose::realize(&lg, seed)?;
    let rh = decompose::realize(&lh, seed.wrapping_add(1))?;
    let (a, c) = (rh.algebra.clone(), rg.algebra.clone());
    let group_coords = |ops: &[Mat], t: &Mat| {
        let vecs: Vec<Vector> = ops.iter().map(linalg::vec_of).collect();
        linalg::lstsq(&linalg::columns(&vecs, t.len()), &linalg::columns(&[linalg::vec_of(t)], t.len()))
    };
    // η: block coordinates of A → group coefficients on H → block coordinates of C
    let h_in_c: Vec<Vector> = h.iter().map(|&x| rg.coords_of(&lg[x])).collect();
    let h_in_c = linalg::columns(&h_in_c, c.dim());
    let coeff_a = Mat::from_columns(
        &a.basis().iter().map(|b| group_coords(&lh, &rh.operator(b)).column(0).into_owned()).collect::<Vec<_>>(),
    );
    let eta = StarHom::new(a.clone(), c.clone(), &h_in_c * &coeff_a, BUILD_TOL)?;
    // ε: block coordinates of C → group coefficients on G, restricted to H → A
    let h_in_a: Vec<Vector> = lh.iter().map(|t| rh.coords_of(t)).collect();
    let h_in_a = linalg::columns(&h_in_a, a.dim());
    let coeff_c = Mat::from_columns(
        &c.basis().iter().map(|b| group_coords(&lg, &rg.operator(b)).column(0).into_owned()).collect::<Vec<_>>(),
    );
    let restrict = Mat::from_fn(h.len(), g.order(), |i, x| if h[i] == x { cr(1.0) } else { cr(0.0) });
    let eps = &h_in_a * restrict * coeff_c;
    FrobeniusStructure::new(eta, eps, BUILD_TOL)
}

/// A random instance with its provenance.
#[derive(Debug, Clone)]
pub struct RandomInstance {
    pub structure: FrobeniusStructure,
    pub attempts: usize,
    pub notes: Vec<String>,
}

fn unital_inclusion(a: &Algebra, c: &Algebra, mult: &[Vec<usize>], unitaries: &[Mat]) -> Result<StarHom> {
    StarHom::from_fn(
        a.clone(),
        c.clone(),
        |x: &Element| {
            let blocks = mult
                .iter()
                .zip(unitaries)
                .map(|(row, u)| {
                    let size = u.nrows();
                    let mut m = Mat::zeros(size, size);
                    let mut off = 0;
                    for (i, &k) in row.iter().enumerate() {
                        let ni = a.blocks()[i];
                        for _ in 0..k {
                            m.view_mut((off, off), (ni, ni)).copy_from(&x.blocks[i]);
                            off += ni;
                        }
                    }
                    u * m * u.adjoint()
                })
                .collect();
            Element { blocks }
        },
        BUILD_TOL,
    )
}

/// Samples a random Frobenius structure whose `C` has representation
/// dimension at most `budget` (the `random_instance` operation).
///
/// `ε(c) = z·E(k c k)`, where `E` is the conditional expectation onto `η(A)`
/// preserving a random faithful trace, `k` is a random positive invertible
/// element of the relative commutant `η(A)' ∩ C` and `z` a random positive
/// central element of `A`.
pub fn random_instance(seed: u64, budget: usize) -> Result<RandomInstance> {
    if budget == 0 {
        return Err(Error::BadParam("budget must be at least 1".into()));
    }
    if budget == 1 {
        return Ok(RandomInstance {
            structure: trivial().0,
            attempts: 1,
            notes: vec!["budget 1 admits only ℂ over ℂ".into()],
        });
    }
    let mut rng = linalg::rng_from_seed(seed);
    for attempt in 1..=RETRY_CAP {
        let na = rng.random_range(1..=2usize);
        let a_blocks: Vec<usize> = (0..na).map(|_| rng.random_range(1..=2usize)).collect();
        let nc = rng.random_range(1..=3usize);
        let mult: Vec<Vec<usize>> = (0..nc).map(|_| (0..na).map(|_| rng.random_range(0..=2usize)).collect()).collect();
        let c_blocks: Vec<usize> = mult.iter().map(|row| row.iter().zip(&a_blocks).map(|(k, n)| k * n).sum()).collect();
        let used = (0..na).all(|i| mult.iter().any(|row| row[i] > 0));
        let c_dim: usize = c_blocks.iter().map(|n| n * n).sum();
        if !used || c_blocks.contains(&0) || c_blocks.iter().sum::<usize>() > budget || c_dim > MAX_RANDOM_DIM {
            continue;
        }
        let a = Algebra::new(&a_blocks)?;
        let c = Algebra::new(&c_blocks)?;
        let unitaries: Vec<Mat> = c_blocks.iter().map(|&n| linalg::random_unitary(&mut rng, n)).collect();
        let eta = match unital_inclusion(&a, &c, &mult, &unitaries) {
            Ok(e) => e,
            Err(_) => continue,
        };
        let eps = random_expectation(&a, &c, &eta, &mut rng);
        let s = match FrobeniusStructure::new(eta, eps, BUILD_TOL) {
            Ok(s) => s,
            Err(_) => continue,
        };
        let t = TensorAlgebra::new(&s);
        if frobenius::quasi_basis(&s, &t).is_err() {
            continue;
        }
        return Ok(RandomInstance {
            structure: s,
            attempts: attempt,
            notes: vec![
                format!("A blocks {a_blocks:?}, C blocks {c_blocks:?}, multiplicities {mult:?}"),
                format!("accepted after {attempt} attempt(s)"),
            ],
        });
    }
    Err(Error::RetriesExhausted(RETRY_CAP))
}

fn random_expectation(a: &Algebra, c: &Algebra, eta: &StarHom, rng: &mut rand_chacha::ChaCha8Rng) -> Mat {
    // trace weights per block of C, repeated over coordinates
    let weights: Vec<f64> = c.blocks().iter().map(|_| rng.random_range(0.5..2.0)).collect();
    let w = Mat::from_fn(c.dim(), c.dim(), |i, j| {
        if i == j {
            cr(weights[c.coord_location(i).0])
        } else {
            cr(0.0)
        }
    });
    let h = eta.matrix();
    let normal = h.adjoint() * &w * h;
    let expectation = normal.try_inverse().expect("η is injective") * h.adjoint() * &w;

    // relative commutant η(A)' ∩ C
    let stacked: Vec<Mat> = a
        .basis()
        .iter()
        .map(|b| {
            let e = eta.apply(b);
            c.left_mult_matrix(&e) - c.right_mult_matrix(&e)
        })
        .collect();
    let mut big = Mat::zeros(stacked.len() * c.dim(), c.dim());
    for (i, m) in stacked.iter().enumerate() {
        big.view_mut((i * c.dim(), 0), (c.dim(), c.dim())).copy_from(m);
    }
    let comm = linalg::null_space(&big);
    let coeffs: Vec<C64> = (0..comm.ncols()).map(|_| linalg::random_complex(rng)).collect();
    let x = c.from_coords(&(&comm * Vector::from_vec(coeffs)));
    let k = &(&x.star() * &x) + &c.unit().scale(cr(0.3));
    let kk = c.left_mult_matrix(&k) * c.right_mult_matrix(&k);

    let z: Vec<f64> = a.blocks().iter().map(|_| rng.random_range(0.5..2.0)).collect();
    let zmat = Mat::from_fn(a.dim(), a.dim(), |i, j| if i == j { cr(z[a.coord_location(i).0]) } else { cr(0.0) });
    zmat * expectation * kk
}

/// A module with the same action whose inner product is
/// `⟨x|y⟩ − 2⟨x|v⟩⟨v|y⟩/‖⟨v|v⟩‖` for a seeded `v`: still `A`-linear and
/// symmetric, but no longer positive.
pub fn indefinite_gram(x: &HilbertModule, seed: u64) -> Vec<Mat> {
    let b = x.base();
    let mut rng = linalg::rng_from_seed(seed);
    let v = Vector::from_iterator(x.dim(), (0..x.dim()).map(|_| linalg::random_complex(&mut rng)));
    let scale = 2.0 / x.inner(&v, &v).norm();
    let gv: Vec<Vector> = x.gram().iter().map(|g| g * &v).collect();
    let vg: Vec<Vector> = x.gram().iter().map(|g| g.adjoint() * &v).collect();
    let basis = b.basis();
    let mut gram = x.gram().to_vec();
    for (k, bk) in basis.iter().enumerate() {
        for (l, bl) in basis.iter().enumerate() {
            let prod = b.coords(&(bk * bl));
            for (m, coeff) in prod.iter().enumerate() {
                if coeff.norm() > 0.0 {
                    gram[m] -= (&gv[k] * vg[l].adjoint()) * (*coeff * scale);
                }
            }
        }
    }
    gram
}

/// `ε + magnitude·R` for a seeded random `R`; breaks the bimodule property.
pub fn perturbed_eps(s: &FrobeniusStructure, magnitude: f64, seed: u64) -> Mat {
    let mut rng = linalg::rng_from_seed(seed);
    let r = linalg::random_matrix(&mut rng, s.a().dim(), s.c().dim());
    s.eps() + r * cr(magnitude)
}

/// Orthonormal basis of the relative commutant `η(A)' ∩ C` in coordinates.
pub fn relative_commutant(s: &FrobeniusStructure) -> Mat {
    let (a, c) = (s.a(), s.c());
    let d = c.dim();
    let basis = a.basis();
    let mut big = Mat::zeros(basis.len() * d, d);
    for (i, b) in basis.iter().enumerate() {
        let e = s.eta().apply(b);
        big.view_mut((i * d, 0), (d, d)).copy_from(&(c.left_mult_matrix(&e) - c.right_mult_matrix(&e)));
    }
    linalg::null_space(&big)
}

/// `ρ = Ad_u` for a seeded unitary `u = exp(i h)` of the relative commutant,
/// as an isomorphism onto the transported structure `(C, η, ε∘Ad_u*)`.
pub fn unitary_conjugation_iso(s: &FrobeniusStructure, seed: u64) -> Result<FrobeniusIso> {
    let c = s.c();
    let comm = relative_commutant(s);
    let mut rng = linalg::rng_from_seed(seed);
    let coeffs = Vector::from_iterator(comm.ncols(), (0..comm.ncols()).map(|_| linalg::random_complex(&mut rng)));
    let x = c.from_coords(&(&comm * coeffs));
    let h = (&x + &x.star()).scale(cr(0.5));
    let blocks = h
        .blocks
        .iter()
        .map(|hb| {
            let (vals, vecs) = linalg::hermitian_eigen(hb);
            let n = vals.len();
            let phase = Mat::from_fn(n, n, |i, j| if i == j { C64::from_polar(1.0, vals[i]) } else { cr(0.0) });
            &vecs * phase * vecs.adjoint()
        })
        .collect();
    let u = Element { blocks };
    let rho = c.left_mult_matrix(&u) * c.right_mult_matrix(&u.star());
    iso::transport(s, c, &rho, BUILD_TOL)
}

/// The relabeling of `branched_grid(m)` swapping `t ↔ −t` at the levels `p`
/// with bit `p − 1` of `mask` set; an automorphism of the structure.
pub fn grid_relabeling_iso(m: usize, mask: u64) -> Result<FrobeniusIso> {
    let s = branched_grid(m)?;
    let n = 2 * m + 1;
    let image = |j: usize| {
        let p = j.abs_diff(m);
        if p > 0 && (mask >> (p - 1)) & 1 == 1 {
            2 * m - j
        } else {
            j
        }
    };
    let rho = Mat::from_fn(n, n, |r, j| if r == image(j) { cr(1.0) } else { cr(0.0) });
    FrobeniusIso::new(s.clone(), s, rho, BUILD_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameters_are_validated() {
        assert_eq!(matrix_trace(0, 1.0).unwrap_err().name(), "BadParam");
        assert_eq!(matrix_trace(2, -1.0).unwrap_err().name(), "BadParam");
        assert_eq!(branched_grid(0).unwrap_err().name(), "BadParam");
        let g = GroupTable::cyclic(4).unwrap();
        assert_eq!(group_inclusion(&g, &[0, 1], 0).unwrap_err().name(), "NotSubgroup");
        assert!(GroupTable::new(vec![vec![0, 1], vec![1, 1]]).is_err());
    }

    #[test]
    fn iso_pairs() {
        let s = matrix_trace(2, 1.0).unwrap();
        let iso = unitary_conjugation_iso(&s, 3).unwrap();
        // the trace is unitarily invariant, so the transported ε is ε itself
        assert!(linalg::max_abs(&(iso.target.eps() - s.eps())) < 1e-12);
        assert!(linalg::max_abs(&(&iso.rho - Mat::identity(4, 4))) > 1e-3);
        let flip = grid_relabeling_iso(2, 0b10).unwrap();
        assert_eq!(flip.rho[(0, 4)], cr(1.0));
        assert_eq!(flip.rho[(1, 1)], cr(1.0));
    }

    #[test]
    fn grid_image_branch_point() {
        let rep = grid_image_report(2, 5, 1).unwrap();
        assert!(rep.relation_residual < 1e-12 && rep.multiplicativity_residual < 1e-10, "{rep:?}");
        assert_eq!(rep.branch_point_defect, 0.0);
    }

    #[test]
    fn tower_defect_shrinks() {
        let rows = grid_tower(&[1, 2, 4, 8], 16).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].bai_defect <= w[0].bai_defect + 1e-15, "{rows:?}");
        }
        assert!((rows[0].index[0] - 1.0).abs() < 1e-10 && (rows[0].index[1] - 2.0).abs() < 1e-10, "{rows:?}");
    }

    #[test]
    fn random_instances_validate() {
        for seed in 0..4 {
            let r = random_instance(seed, 6).unwrap();
            assert!(r.structure.c().blocks().iter().sum::<usize>() <= 6);
        }
        assert_eq!(random_instance(9, 1).unwrap().structure.c().dim(), 1);
    }

    #[test]
    fn corruptions_are_detected() {
        let s = branched_grid(2).unwrap();
        let ce = construct::c_epsilon(&s).unwrap();
        let m = ce.module();
        let bad = HilbertModule::new(m.base().clone(), m.dim(), m.action().to_vec(), indefinite_gram(m, 3), 1e-9);
        assert_eq!(bad.unwrap_err().name(), "NotPositive");
        let eps = perturbed_eps(&s, 1e-3, 4);
        assert_eq!(FrobeniusStructure::new(s.eta().clone(), eps, 1e-9).unwrap_err().name(), "NotBimodule");
    }
}
