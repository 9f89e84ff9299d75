//! Gram-matrix feasibility problems over ℝ[C][y].
//!
//! A problem is a set of PSD blocks `G_b` with monomial bases `v_b` and a
//! list of polynomial identities `Σ_b mult_b · v_bᵀ G_b v_b = target`. The
//! solver alternates between the PSD cone and the affine set
//! (Douglas–Rachford), then restricts to the detected face and solves the
//! identities to machine precision there.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::cylinder::CylinderPoly;
use crate::error::{Error, Result};
use crate::poly::{CirclePoly, UnivariatePoly};
use crate::scalar::Scalar;
use super::ipm::{IpmOutcome, SdpData};

/// `x1^x1 · x2^x2 · y^y` with `x2 ∈ {0, 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    pub x1: usize,
    pub x2: usize,
    pub y: usize,
}

impl Monomial {
    pub fn new(x1: usize, x2: usize, y: usize) -> Self {
        debug_assert!(x2 <= 1);
        Self { x1, x2, y }
    }

    pub fn to_poly<T: Scalar>(&self) -> CylinderPoly<T> {
        let mut x = vec![T::zero(); self.x1 + 1];
        x[self.x1] = T::one();
        let u = UnivariatePoly::new(x);
        let c = if self.x2 == 0 {
            CirclePoly::new(u, UnivariatePoly::zero())
        } else {
            CirclePoly::new(UnivariatePoly::zero(), u)
        };
        CylinderPoly::monomial(c, self.y)
    }

    /// Trigonometric degree.
    pub fn x_degree(&self) -> usize {
        self.x1 + self.x2
    }
}

/// Canonical monomials of trigonometric degree `≤ k` times `1, y, …, y^m`.
pub fn cylinder_basis(k: usize, m: usize) -> Vec<Monomial> {
    let mut out = Vec::new();
    for l in 0..=m {
        for j in 0..=k {
            out.push(Monomial::new(j, 0, l));
        }
        for j in 0..k {
            out.push(Monomial::new(j, 1, l));
        }
    }
    out
}

/// Basis of ℝ[C] up to trigonometric degree `k`.
pub fn circle_basis(k: usize) -> Vec<Monomial> {
    cylinder_basis(k, 0)
}

/// Basis `1, y, …, y^m` of ℝ[y].
pub fn univariate_basis(m: usize) -> Vec<Monomial> {
    (0..=m).map(|l| Monomial::new(0, 0, l)).collect()
}

/// Sparse product of canonical terms, reducing `x2² = 1 − x1²`.
pub(crate) fn mul_terms<T: Scalar>(a: &[(T, Monomial)], b: &[(T, Monomial)]) -> HashMap<Monomial, T> {
    let mut out: HashMap<Monomial, T> = HashMap::new();
    let mut add = |m: Monomial, c: T| {
        let e = out.entry(m).or_insert_with(T::zero);
        *e = e.clone() + c;
    };
    for (ca, ma) in a {
        for (cb, mb) in b {
            let c = ca.clone() * cb.clone();
            let (x1, y) = (ma.x1 + mb.x1, ma.y + mb.y);
            match ma.x2 + mb.x2 {
                2 => {
                    add(Monomial::new(x1, 0, y), c.clone());
                    add(Monomial::new(x1 + 2, 0, y), -c);
                }
                e => add(Monomial::new(x1, e, y), c),
            }
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

pub(crate) fn poly_terms<T: Scalar>(p: &CylinderPoly<T>) -> Vec<(T, Monomial)> {
    p.terms().into_iter().map(|(c, a, b, l)| (c, Monomial::new(a, b, l))).collect()
}

/// A PSD variable block.
#[derive(Debug, Clone)]
pub struct Block {
    pub basis: Vec<Monomial>,
    /// Orthonormal columns `W` with `G = W S Wᵀ`, when the Gram matrix is
    /// known to vanish on a subspace.
    pub face: Option<DMatrix<f64>>,
}

impl Block {
    pub fn new(basis: Vec<Monomial>) -> Self {
        Self { basis, face: None }
    }

    fn reduced_size(&self) -> usize {
        self.face.as_ref().map_or(self.size(), |w| w.ncols())
    }

    pub fn size(&self) -> usize {
        self.basis.len()
    }

    fn svec_len(&self) -> usize {
        let n = self.size();
        n * (n + 1) / 2
    }
}

/// `Σ_{(b, mult) ∈ terms} mult · v_bᵀ G_b v_b = target`.
#[derive(Debug, Clone)]
pub struct Equation {
    pub terms: Vec<(usize, CylinderPoly<f64>)>,
    pub target: CylinderPoly<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct GramProblem {
    pub blocks: Vec<Block>,
    pub equations: Vec<Equation>,
}

/// Solver settings.
#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// Relative affine residual accepted on the PSD side.
    pub tol: f64,
    /// Largest block dimension accepted.
    pub block_cap: usize,
    /// Push the smallest eigenvalue away from zero after solving.
    pub maximize_margin: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { max_iters: 50_000, tol: 1e-9, block_cap: 64, maximize_margin: false }
    }
}

/// Feasible Gram matrices, one per block.
#[derive(Debug, Clone)]
pub struct GramSolution {
    pub blocks: Vec<DMatrix<f64>>,
    /// `max|A x − t| / (1 + max|t|)`.
    pub residual: f64,
    /// Smallest eigenvalue over all blocks.
    pub min_eig: f64,
    pub iterations: usize,
}

/// Position of a block entry `(i, j)`, `i ≤ j`, in the stacked svec vector.
fn svec_index(n: usize, i: usize, j: usize) -> usize {
    // row-major upper triangle
    i * n - i * (i + 1) / 2 + j
}

pub(crate) struct Layout {
    pub offsets: Vec<usize>,
    pub total: usize,
}

impl GramProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_block(&mut self, basis: Vec<Monomial>) -> usize {
        self.blocks.push(Block::new(basis));
        self.blocks.len() - 1
    }

    pub fn add_equation(&mut self, terms: Vec<(usize, CylinderPoly<f64>)>, target: CylinderPoly<f64>) {
        self.equations.push(Equation { terms, target });
    }

    /// Restricts block `b` to Gram matrices annihilating every vector in
    /// `kernel` (given in the coordinates of the block's basis).
    pub fn set_kernel(&mut self, b: usize, kernel: &[Vec<f64>]) {
        let n = self.blocks[b].size();
        if kernel.is_empty() {
            self.blocks[b].face = None;
            return;
        }
        let ns = crate::linalg::null_space(kernel, n, 1e-10);
        let w = DMatrix::from_fn(n, ns.len(), |i, k| ns[k][i]);
        self.blocks[b].face = Some(w);
    }

    /// Single-block problem `mult · vᵀ G v = target`.
    pub fn single(basis: Vec<Monomial>, mult: CylinderPoly<f64>, target: CylinderPoly<f64>) -> Self {
        let mut p = Self::new();
        let b = p.add_block(basis);
        p.add_equation(vec![(b, mult)], target);
        p
    }

    pub(crate) fn layout(&self) -> Layout {
        let mut offsets = Vec::with_capacity(self.blocks.len());
        let mut total = 0;
        for b in &self.blocks {
            offsets.push(total);
            total += b.svec_len();
        }
        Layout { offsets, total }
    }

    /// Coefficient-matching system in unscaled entries `G_ij` (`i ≤ j`):
    /// sparse columns `(row, coeff)` and the target vector, over scalars `T`.
    pub(crate) fn constraints<T: Scalar>(
        &self,
        mults: &[Vec<CylinderPoly<T>>],
        targets: &[CylinderPoly<T>],
    ) -> (Vec<Vec<(usize, T)>>, Vec<T>) {
        let layout = self.layout();
        let mut rows: HashMap<(usize, Monomial), usize> = HashMap::new();
        let mut rhs: Vec<T> = Vec::new();
        let mut row_of = |e: usize, m: Monomial, rhs: &mut Vec<T>| -> usize {
            *rows.entry((e, m)).or_insert_with(|| {
                rhs.push(T::zero());
                rhs.len() - 1
            })
        };
        let mut cols: Vec<Vec<(usize, T)>> = vec![Vec::new(); layout.total];
        for (e, eq) in self.equations.iter().enumerate() {
            for (c, m) in poly_terms(&targets[e]) {
                let r = row_of(e, m, &mut rhs);
                rhs[r] = rhs[r].clone() + c;
            }
            for (t, (b, _)) in eq.terms.iter().enumerate() {
                let basis = &self.blocks[*b].basis;
                let n = basis.len();
                let mt = poly_terms(&mults[e][t]);
                for i in 0..n {
                    for j in i..n {
                        let two = if i == j { T::one() } else { T::from_i64(2) };
                        let prod = mul_terms(&[(two, basis[i])], &[(T::one(), basis[j])]);
                        let prod: Vec<(T, Monomial)> = prod.into_iter().map(|(m, c)| (c, m)).collect();
                        let full = mul_terms(&prod, &mt);
                        let col = layout.offsets[*b] + svec_index(n, i, j);
                        for (m, c) in full {
                            let r = row_of(e, m, &mut rhs);
                            cols[col].push((r, c));
                        }
                    }
                }
            }
        }
        (cols, rhs)
    }

    fn float_constraints(&self) -> (Vec<Vec<(usize, f64)>>, Vec<f64>) {
        let mults: Vec<Vec<CylinderPoly<f64>>> =
            self.equations.iter().map(|e| e.terms.iter().map(|t| t.1.clone()).collect()).collect();
        let targets: Vec<CylinderPoly<f64>> = self.equations.iter().map(|e| e.target.clone()).collect();
        self.constraints(&mults, &targets)
    }
}

/// Stacked symmetric blocks in √2-scaled svec form, so that the Euclidean
/// norm of the vector is the Frobenius norm of the blocks.
struct Space {
    sizes: Vec<usize>,
    offsets: Vec<usize>,
    total: usize,
}

const SQRT2: f64 = std::f64::consts::SQRT_2;

impl Space {
    fn unpack(&self, x: &[f64], b: usize) -> DMatrix<f64> {
        let n = self.sizes[b];
        let o = self.offsets[b];
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = x[o + svec_index(n, i, j)];
                if i == j {
                    m[(i, i)] = v;
                } else {
                    m[(i, j)] = v / SQRT2;
                    m[(j, i)] = v / SQRT2;
                }
            }
        }
        m
    }

    fn pack(&self, m: &DMatrix<f64>, b: usize, x: &mut [f64]) {
        let n = self.sizes[b];
        let o = self.offsets[b];
        for i in 0..n {
            for j in i..n {
                x[o + svec_index(n, i, j)] = if i == j { m[(i, i)] } else { 0.5 * (m[(i, j)] + m[(j, i)]) * SQRT2 };
            }
        }
    }

    fn project_psd(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.total];
        for b in 0..self.sizes.len() {
            let m = self.unpack(x, b);
            let e = SymmetricEigen::new(m);
            let d = e.eigenvalues.map(|v| v.max(0.0));
            let r = &e.eigenvectors * DMatrix::from_diagonal(&d) * e.eigenvectors.transpose();
            self.pack(&r, b, &mut out);
        }
        out
    }


    fn identity(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.total];
        for b in 0..self.sizes.len() {
            self.pack(&DMatrix::identity(self.sizes[b], self.sizes[b]), b, &mut out);
        }
        out
    }
}

/// Thin SVD `A = U diag(s) Vᵀ`. The bidiagonal iteration occasionally stops
/// short on matrices with clustered singular values, so the result is checked
/// and recomputed from the symmetric eigenproblem of `[0 A; Aᵀ 0]` if needed.
fn thin_svd(a: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>) {
    let (m, n) = a.shape();
    let scale = a.amax().max(1e-300);
    let svd = a.clone().svd(true, true);
    let (u, vt) = (svd.u.expect("u"), svd.v_t.expect("v_t"));
    let err = (&u * DMatrix::from_diagonal(&svd.singular_values) * &vt - a).amax();
    if err <= 1e-13 * scale {
        return (u, svd.singular_values, vt);
    }
    let mut h = DMatrix::zeros(m + n, m + n);
    h.view_mut((0, m), (m, n)).copy_from(a);
    h.view_mut((m, 0), (n, m)).copy_from(&a.transpose());
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..m + n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    // the positive half of the spectrum carries the singular triplets
    let r = m.min(n);
    let s = DVector::from_iterator(r, order[..r].iter().map(|&k| eig.eigenvalues[k].max(0.0)));
    let mut u = DMatrix::zeros(m, r);
    let mut vt = DMatrix::zeros(r, n);
    for (k, &e) in order[..r].iter().enumerate() {
        let w = eig.eigenvectors.column(e);
        let (wu, wv) = (w.rows(0, m), w.rows(m, n));
        let (nu, nv) = (wu.norm(), wv.norm());
        if nu > 0.0 && nv > 0.0 {
            u.set_column(k, &(wu / nu));
            vt.set_row(k, &(wv / nv).transpose());
        }
    }
    (u, s, vt)
}

/// Affine constraints `A x = t` in scaled coordinates with a precomputed SVD.
struct Affine {
    cols: Vec<Vec<(usize, f64)>>,
    rows: usize,
    u_r: DMatrix<f64>,
    s_inv: DVector<f64>,
    vt_r: DMatrix<f64>,
}

impl Affine {
    fn new(cols: Vec<Vec<(usize, f64)>>, rows: usize) -> Self {
        let n = cols.len();
        let mut a = DMatrix::zeros(rows, n);
        for (j, c) in cols.iter().enumerate() {
            for &(r, v) in c {
                a[(r, j)] += v;
            }
        }
        let (u, sv, vt) = thin_svd(&a);
        let smax: f64 = sv.max();
        let keep: Vec<usize> = (0..sv.len()).filter(|&k| sv[k] > 1e-11 * smax.max(1e-300)).collect();
        let u_r = DMatrix::from_fn(rows, keep.len(), |i, k| u[(i, keep[k])]);
        let vt_r = DMatrix::from_fn(keep.len(), n, |k, j| vt[(keep[k], j)]);
        let s_inv = DVector::from_iterator(keep.len(), keep.iter().map(|&k| 1.0 / sv[k]));
        Self { cols, rows, u_r, s_inv, vt_r }
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        for (j, c) in self.cols.iter().enumerate() {
            let xj = x[j];
            if xj != 0.0 {
                for &(r, v) in c {
                    out[r] += v * xj;
                }
            }
        }
        out
    }

    /// Minimum-norm solution of `A x = t`.
    fn particular(&self, t: &[f64]) -> Vec<f64> {
        let ut = self.u_r.transpose() * DVector::from_column_slice(t);
        let w = ut.component_mul(&self.s_inv);
        (self.vt_r.transpose() * w).iter().copied().collect()
    }

    /// Orthogonal projection of `z` onto `{A x = t}` given a particular solution.
    fn project(&self, z: &[f64], x0: &[f64]) -> Vec<f64> {
        let d = DVector::from_iterator(z.len(), z.iter().zip(x0).map(|(a, b)| a - b));
        let c = &self.vt_r * d;
        let corr = self.vt_r.transpose() * c;
        z.iter().zip(corr.iter()).map(|(a, b)| a - b).collect()
    }

    fn residual(&self, x: &[f64], t: &[f64]) -> f64 {
        let ax = self.apply(x);
        let tmax = t.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        ax.iter().zip(t).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())) / (1.0 + tmax)
    }
}

struct Solver<'a> {
    space: Space,
    affine: Affine,
    t: Vec<f64>,
    cfg: &'a SolverConfig,
}

enum DrOutcome {
    Converged { x: Vec<f64>, iters: usize },
    Stalled { best: f64 },
    Capped { best: f64, x: Vec<f64> },
}

impl Solver<'_> {
    fn dr(&self, t: &[f64], z0: Option<Vec<f64>>, max_iters: usize) -> DrOutcome {
        let x0 = self.affine.particular(t);
        let mut z = z0.unwrap_or_else(|| x0.clone());
        let mut best = f64::INFINITY;
        let mut best_x = z.clone();
        let mut checkpoint = f64::INFINITY;
        let mut polish_at = 1e-4;
        for it in 1..=max_iters {
            let xs = self.space.project_psd(&z);
            let refl: Vec<f64> = xs.iter().zip(&z).map(|(a, b)| 2.0 * a - b).collect();
            let xa = self.affine.project(&refl, &x0);
            for k in 0..z.len() {
                z[k] += xa[k] - xs[k];
            }
            if it % 25 == 0 || it == max_iters {
                let r = self.affine.residual(&xs, t);
                if r < best {
                    best = r;
                    best_x = xs.clone();
                }
                if r <= self.cfg.tol {
                    return DrOutcome::Converged { x: xs, iters: it };
                }
                if r <= polish_at {
                    if let Some(p) = self.polish(&xs, t) {
                        return DrOutcome::Converged { x: p, iters: it };
                    }
                    polish_at = r * 0.1;
                }
                if it % 1000 == 0 {
                    if r > 1e-6 && r > 0.98 * checkpoint {
                        return DrOutcome::Stalled { best };
                    }
                    checkpoint = r;
                }
            }
        }
        DrOutcome::Capped { best, x: best_x }
    }

    /// Restricts each block to the span of its dominant eigenvectors and
    /// solves the identities there in the least-norm sense.
    fn polish(&self, x: &[f64], t: &[f64]) -> Option<Vec<f64>> {
        for &thr in &[1e-6, 1e-9, 1e-4] {
            if let Some(p) = self.polish_with(x, t, thr) {
                return Some(p);
            }
        }
        [1e-6, 1e-9].iter().find_map(|&thr| self.refine_factor(x, t, thr))
    }

    /// Gauss-Newton on a low-rank factor `G_b = V_b V_bᵀ` of each block,
    /// taking minimum-norm steps. Unlike the fixed-face polish this lets
    /// the range of `G` move, which matters when the starting point only
    /// approximates the face.
    fn refine_factor(&self, x: &[f64], t: &[f64], thr: f64) -> Option<Vec<f64>> {
        let nb = self.space.sizes.len();
        let eigs: Vec<SymmetricEigen<f64, nalgebra::Dyn>> =
            (0..nb).map(|b| SymmetricEigen::new(self.space.unpack(x, b))).collect();
        let gmax = eigs.iter().filter(|e| e.eigenvalues.len() > 0).map(|e| e.eigenvalues.max()).fold(0.0, f64::max);
        let mut factors: Vec<DMatrix<f64>> = eigs
            .iter()
            .map(|e| {
                let keep: Vec<usize> = (0..e.eigenvalues.len()).filter(|&k| e.eigenvalues[k] > thr * gmax.max(1e-300)).collect();
                DMatrix::from_fn(e.eigenvectors.nrows(), keep.len(), |i, k| e.eigenvectors[(i, keep[k])] * e.eigenvalues[keep[k]].sqrt())
            })
            .collect();
        let unknowns: usize = factors.iter().map(|v| v.len()).sum();
        let rows = self.affine.rows;
        if unknowns == 0 || unknowns * rows > 40_000_000 {
            return None;
        }
        let tv = DVector::from_column_slice(t);
        let assemble = |factors: &[DMatrix<f64>]| {
            let mut out = vec![0.0; self.space.total];
            for (b, v) in factors.iter().enumerate() {
                self.space.pack(&(v * v.transpose()), b, &mut out);
            }
            out
        };
        for _ in 0..20 {
            let xs = assemble(&factors);
            if self.affine.residual(&xs, t) <= 1e-13 {
                return Some(xs);
            }
            let r = &tv - DVector::from_vec(self.affine.apply(&xs));
            let mut jac = DMatrix::<f64>::zeros(rows, unknowns);
            let mut col = 0;
            for (b, v) in factors.iter().enumerate() {
                let n = self.space.sizes[b];
                let o = self.space.offsets[b];
                for k in 0..v.ncols() {
                    for i in 0..n {
                        for j in 0..n {
                            let (c, idx) = if i == j { (2.0 * v[(i, k)], svec_index(n, i, i)) } else { (SQRT2 * v[(j, k)], svec_index(n, i.min(j), i.max(j))) };
                            if c != 0.0 {
                                for &(row, a) in &self.affine.cols[o + idx] {
                                    jac[(row, col)] += a * c;
                                }
                            }
                        }
                        col += 1;
                    }
                }
            }
            let jjt = &jac * jac.transpose();
            let e: SymmetricEigen<f64, nalgebra::Dyn> = SymmetricEigen::new(jjt);
            let emax: f64 = e.eigenvalues.max().max(1e-300);
            let inv = e.eigenvalues.map(|l| if l > 1e-14 * emax { 1.0 / l } else { 0.0 });
            let w: DVector<f64> = &e.eigenvectors * DMatrix::from_diagonal(&inv) * (e.eigenvectors.transpose() * &r);
            let delta: DVector<f64> = jac.transpose() * w;
            let mut off = 0;
            for v in &mut factors {
                for k in 0..v.ncols() {
                    for i in 0..v.nrows() {
                        v[(i, k)] += delta[off];
                        off += 1;
                    }
                }
            }
        }
        let xs = assemble(&factors);
        (self.affine.residual(&xs, t) <= 1e-12).then_some(xs)
    }

    fn polish_with(&self, x: &[f64], t: &[f64], thr: f64) -> Option<Vec<f64>> {
        let nb = self.space.sizes.len();
        let mut faces: Vec<(DMatrix<f64>, DVector<f64>)> = Vec::with_capacity(nb);
        let mut gmax: f64 = 0.0;
        for b in 0..nb {
            let e = SymmetricEigen::new(self.space.unpack(x, b));
            gmax = gmax.max(e.eigenvalues.max());
            faces.push((e.eigenvectors, e.eigenvalues));
        }
        let mut bases: Vec<(DMatrix<f64>, Vec<f64>)> = Vec::with_capacity(nb);
        for (v, l) in &faces {
            let keep: Vec<usize> = (0..l.len()).filter(|&k| l[k] > thr * gmax.max(1e-300)).collect();
            let vk = DMatrix::from_fn(v.nrows(), keep.len(), |i, k| v[(i, keep[k])]);
            bases.push((vk, keep.iter().map(|&k| l[k]).collect()));
        }
        // one column per entry of each reduced matrix S_b
        let mut columns: Vec<Vec<f64>> = Vec::new();
        let mut s0: Vec<f64> = Vec::new();
        let mut owners: Vec<(usize, usize, usize)> = Vec::new();
        for (b, (vk, lam)) in bases.iter().enumerate() {
            let r = vk.ncols();
            if r * (r + 1) / 2 > 4000 {
                return None;
            }
            for p in 0..r {
                for q in p..r {
                    let vp = vk.column(p);
                    let vq = vk.column(q);
                    let g = if p == q { vp * vp.transpose() } else { vp * vq.transpose() + vq * vp.transpose() };
                    let mut xs = vec![0.0; self.space.total];
                    self.space.pack(&g, b, &mut xs);
                    columns.push(self.affine.apply(&xs));
                    s0.push(if p == q { lam[p] } else { 0.0 });
                    owners.push((b, p, q));
                }
            }
        }
        let ncols = columns.len();
        if ncols == 0 {
            return None;
        }
        let rows = self.affine.rows;
        let bm = DMatrix::from_fn(rows, ncols, |i, j| columns[j][i]);
        let svd = bm.clone().svd(true, true);
        let smax = svd.singular_values.max();
        let pinv = svd.pseudo_inverse(1e-12 * smax.max(1e-300)).ok()?;
        let bs0 = DVector::from_column_slice(&s0);
        let tv = DVector::from_column_slice(t);
        let affine_step = |sv: &DVector<f64>| sv + &pinv * (&tv - &bm * sv);
        let to_blocks = |sv: &DVector<f64>| {
            let mut out: Vec<DMatrix<f64>> = bases.iter().map(|(vk, _)| DMatrix::zeros(vk.ncols(), vk.ncols())).collect();
            for (k, &(b, p, q)) in owners.iter().enumerate() {
                out[b][(p, q)] = sv[k];
                out[b][(q, p)] = sv[k];
            }
            out
        };
        let floor = -1e-13 * gmax.max(1.0);
        let mut sv = affine_step(&bs0);
        // alternate between the identities and the cone inside the face
        let mut accepted = None;
        for _ in 0..200 {
            let blocks = to_blocks(&sv);
            let mut ok = true;
            let clipped: Vec<DMatrix<f64>> = blocks
                .into_iter()
                .map(|m| {
                    if m.nrows() == 0 {
                        return m;
                    }
                    let e = SymmetricEigen::new(m);
                    ok &= e.eigenvalues.min() >= floor;
                    &e.eigenvectors * DMatrix::from_diagonal(&e.eigenvalues.map(|v| v.max(0.0))) * e.eigenvectors.transpose()
                })
                .collect();
            if ok {
                accepted = Some(sv.clone());
                break;
            }
            let cv = DVector::from_iterator(owners.len(), owners.iter().map(|&(b, p, q)| clipped[b][(p, q)]));
            sv = affine_step(&cv);
        }
        let sv = accepted?;
        let blocks = to_blocks(&sv);
        let mut out = vec![0.0; self.space.total];
        for (b, ((vk, _), sm)) in bases.iter().zip(blocks).enumerate() {
            let g = vk * sm * vk.transpose();
            self.space.pack(&g, b, &mut out);
        }
        (self.affine.residual(&out, t) <= 1e-12).then_some(out)
    }
}

/// Solves the feasibility problem. `Infeasible` means no certificate at
/// this degree was found (the iteration stagnated away from the affine set);
/// hitting the iteration cap is `Inconclusive`.
pub fn gram_solve(prob: &GramProblem, cfg: &SolverConfig) -> Result<GramSolution> {
    if let Some(b) = prob.blocks.iter().find(|b| b.size() > cfg.block_cap) {
        return Err(Error::Precondition(format!("block of size {} exceeds cap {}", b.size(), cfg.block_cap)));
    }
    let (cols, t) = prob.float_constraints();
    let cols = reduce_to_faces(prob, cols, t.len());
    let sizes: Vec<usize> = prob.blocks.iter().map(|b| b.reduced_size()).collect();
    let mut offsets = Vec::with_capacity(sizes.len());
    let mut total = 0;
    for &n in &sizes {
        offsets.push(total);
        total += n * (n + 1) / 2;
    }
    let space = Space { sizes, offsets, total };
    let scaled: Vec<Vec<(usize, f64)>> = cols
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let diag = is_diagonal(&space, j);
            c.iter().map(|&(r, v)| (r, if diag { v } else { v / SQRT2 })).collect()
        })
        .collect();
    let rows = t.len();
    let affine = Affine::new(scaled, rows);
    let solver = Solver { space, affine, t, cfg };

    let x0 = solver.affine.particular(&solver.t);
    let consistency = solver.affine.residual(&x0, &solver.t);
    if consistency > 1e-9 {
        return Err(Error::Infeasible { best_residual: consistency });
    }
    let (x, iters) = match solver.interior_point() {
        Ok(Some(Ok(x))) => (x, 0),
        Ok(Some(Err(x))) => solver.dr_fallback(Some(x))?,
        Ok(None) => solver.dr_fallback(None)?,
        Err(e) => return Err(e),
    };
    let x = if cfg.maximize_margin { maximize_margin(&solver, x) } else { x };
    let blocks: Vec<DMatrix<f64>> = prob
        .blocks
        .iter()
        .enumerate()
        .map(|(b, blk)| {
            let s = solver.space.unpack(&x, b);
            match &blk.face {
                Some(w) => w * s * w.transpose(),
                None => s,
            }
        })
        .collect();
    let min_eig = blocks
        .iter()
        .filter(|g| g.nrows() > 0)
        .map(|g| SymmetricEigen::new(g.clone()).eigenvalues.min())
        .fold(f64::INFINITY, f64::min);
    Ok(GramSolution { residual: solver.affine.residual(&x, &solver.t), min_eig, blocks, iterations: iters })
}

/// Rewrites the columns of blocks with a face in terms of the entries of
/// the reduced matrix `S`: `∂G_ij/∂S_pq = W_ip W_jq + W_iq W_jp` for
/// `p ≠ q` and `W_ip W_jp` on the diagonal.
fn reduce_to_faces(prob: &GramProblem, cols: Vec<Vec<(usize, f64)>>, rows: usize) -> Vec<Vec<(usize, f64)>> {
    let layout = prob.layout();
    let mut out = Vec::new();
    for (b, blk) in prob.blocks.iter().enumerate() {
        let n = blk.size();
        let o = layout.offsets[b];
        let Some(w) = &blk.face else {
            out.extend(cols[o..o + blk.svec_len()].iter().cloned());
            continue;
        };
        let r = w.ncols();
        let mut dense = vec![vec![0.0; rows]; r * (r + 1) / 2];
        for i in 0..n {
            for j in i..n {
                let col = &cols[o + svec_index(n, i, j)];
                if col.is_empty() {
                    continue;
                }
                for p in 0..r {
                    for q in p..r {
                        let d = if p == q { w[(i, p)] * w[(j, p)] } else { w[(i, p)] * w[(j, q)] + w[(i, q)] * w[(j, p)] };
                        if d != 0.0 {
                            let dst = &mut dense[svec_index(r, p, q)];
                            for &(row, c) in col {
                                dst[row] += c * d;
                            }
                        }
                    }
                }
            }
        }
        out.extend(dense.into_iter().map(|v| v.into_iter().enumerate().filter(|(_, c)| *c != 0.0).collect()));
    }
    out
}

impl Solver<'_> {
    /// Interior-point solve followed by the face polish. `Err(x)` hands the
    /// best interior iterate to the first-order fallback.
    fn interior_point(&self) -> Result<Option<std::result::Result<Vec<f64>, Vec<f64>>>> {
        let sp = &self.space;
        let a = &self.affine;
        let ut = a.u_r.transpose() * DVector::from_column_slice(&self.t);
        let b: Vec<f64> = ut.component_mul(&a.s_inv).iter().copied().collect();
        let rows: Vec<Vec<DMatrix<f64>>> = (0..a.vt_r.nrows())
            .map(|k| {
                let v: Vec<f64> = a.vt_r.row(k).iter().copied().collect();
                (0..sp.sizes.len())
                    .map(|blk| {
                        let n = sp.sizes[blk];
                        let o = sp.offsets[blk];
                        DMatrix::from_fn(n, n, |i, j| {
                            let (p, q) = if i <= j { (i, j) } else { (j, i) };
                            let val = v[o + svec_index(n, p, q)];
                            if p == q { val } else { val / SQRT2 }
                        })
                    })
                    .collect()
            })
            .collect();
        let data = SdpData { a: rows, b, sizes: sp.sizes.clone() };
        let pack = |xs: &[DMatrix<f64>]| {
            let mut out = vec![0.0; sp.total];
            for (blk, m) in xs.iter().enumerate() {
                sp.pack(m, blk, &mut out);
            }
            out
        };
        match data.solve(1e-11, 120) {
            IpmOutcome::Solved(xs) => {
                let x = pack(&xs);
                if let Some(p) = self.polish(&x, &self.t) {
                    return Ok(Some(Ok(p)));
                }
                if self.affine.residual(&x, &self.t) <= self.cfg.tol {
                    return Ok(Some(Ok(x)));
                }
                Ok(Some(Err(x)))
            }
            IpmOutcome::Infeasible { residual } => Err(Error::Infeasible { best_residual: residual }),
            IpmOutcome::Stuck { x, .. } => {
                let x = pack(&x);
                Ok(Some(self.polish(&x, &self.t).ok_or(x)))
            }
        }
    }

    fn dr_fallback(&self, z0: Option<Vec<f64>>) -> Result<(Vec<f64>, usize)> {
        let cfg = self.cfg;
        match self.dr(&self.t, z0, cfg.max_iters) {
            DrOutcome::Converged { x, iters } => Ok((x, iters)),
            DrOutcome::Stalled { best } => Err(Error::Infeasible { best_residual: best }),
            DrOutcome::Capped { best, x } => {
                if best <= 1e-7 {
                    Ok((x, cfg.max_iters))
                } else {
                    Err(Error::Inconclusive(format!(
                        "iteration cap {} reached with residual {best:.3e}",
                        cfg.max_iters
                    )))
                }
            }
        }
    }
}

fn is_diagonal(space: &Space, j: usize) -> bool {
    let b = space.offsets.iter().rposition(|&o| o <= j).unwrap();
    let n = space.sizes[b];
    let mut k = j - space.offsets[b];
    for i in 0..n {
        let len = n - i;
        if k < len {
            return k == 0;
        }
        k -= len;
    }
    unreachable!()
}

/// Largest `λ` (found by bisection) such that `G − λI` stays feasible.
fn maximize_margin(solver: &Solver<'_>, x: Vec<f64>) -> Vec<f64> {
    let id = solver.space.identity();
    let aid = solver.affine.apply(&id);
    let tmax = solver.t.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut lo = 0.0;
    let mut hi = (1.0 + tmax) / solver.space.sizes.iter().copied().max().unwrap_or(1) as f64;
    let mut best = x.clone();
    for _ in 0..10 {
        let lam = 0.5 * (lo + hi);
        let t: Vec<f64> = solver.t.iter().zip(&aid).map(|(a, b)| a - lam * b).collect();
        if solver.affine.residual(&solver.affine.particular(&t), &t) > 1e-9 {
            hi = lam;
            continue;
        }
        let shifted: Vec<f64> = best.iter().zip(&id).map(|(a, b)| a - lam * b).collect();
        match solver.dr(&t, Some(shifted), 3000) {
            DrOutcome::Converged { x, .. } => {
                best = x.iter().zip(&id).map(|(a, b)| a + lam * b).collect();
                lo = lam;
            }
            _ => hi = lam,
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svec_indexing_is_dense() {
        for n in 1..6 {
            let mut seen = vec![false; n * (n + 1) / 2];
            for i in 0..n {
                for j in i..n {
                    seen[svec_index(n, i, j)] = true;
                }
            }
            assert!(seen.iter().all(|&s| s));
        }
    }

    fn y2p1() -> CylinderPoly<f64> {
        &CylinderPoly::y().square() + &CylinderPoly::one()
    }

    #[test]
    fn identity_gram() {
        let p = GramProblem::single(univariate_basis(1), CylinderPoly::one(), y2p1());
        let s = gram_solve(&p, &SolverConfig::default()).unwrap();
        let g = &s.blocks[0];
        assert!((g - DMatrix::<f64>::identity(2, 2)).abs().max() < 1e-10);
    }

    #[test]
    fn odd_target_is_infeasible() {
        let p = GramProblem::single(univariate_basis(1), CylinderPoly::one(), CylinderPoly::y().scale(&2.0));
        assert!(matches!(gram_solve(&p, &SolverConfig::default()), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn circle_target() {
        let t = CylinderPoly::from_circle(&CirclePoly::one() + &CirclePoly::x1());
        let p = GramProblem::single(circle_basis(1), CylinderPoly::one(), t);
        let s = gram_solve(&p, &SolverConfig::default()).unwrap();
        assert!(s.residual < 1e-12, "{:e}", s.residual);
        assert!(s.min_eig > -1e-9);
        let rank = SymmetricEigen::new(s.blocks[0].clone()).eigenvalues.iter().filter(|&&v| v > 1e-8).count();
        assert_eq!(rank, 2);
    }

    #[test]
    fn margin_pass_moves_off_the_boundary() {
        let p = GramProblem::single(univariate_basis(1), CylinderPoly::one(), y2p1());
        let cfg = SolverConfig { maximize_margin: true, ..Default::default() };
        let s = gram_solve(&p, &cfg).unwrap();
        assert!(s.min_eig > 0.5);
    }
}
