//! Primal-dual interior-point method for block-diagonal SDPs
//! `min tr(X)  s.t.  ⟨A_k, X⟩ = b_k,  X ⪰ 0`, using the HKM search
//! direction with a Mehrotra predictor-corrector step.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

pub(crate) struct SdpData {
    /// `a[k][blk]`: symmetric constraint matrices.
    pub a: Vec<Vec<DMatrix<f64>>>,
    pub b: Vec<f64>,
    pub sizes: Vec<usize>,
}

pub(crate) enum IpmOutcome {
    /// Primal point with relative residual at most the requested tolerance.
    Solved(Vec<DMatrix<f64>>),
    /// A dual ray proves there is no primal point of moderate trace.
    Infeasible { residual: f64 },
    Stuck { x: Vec<DMatrix<f64>> },
}

fn dot(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Largest `α ≤ 1` keeping `x + α·dx ⪰ 0`, shortened by `gamma`.
fn step_length(x: &[DMatrix<f64>], dx: &[DMatrix<f64>], gamma: f64) -> f64 {
    let mut alpha: f64 = 1.0;
    for (xb, db) in x.iter().zip(dx) {
        let Some(ch) = Cholesky::new(xb.clone()) else {
            return 0.0;
        };
        let l = ch.l();
        let li = l.clone().try_inverse().unwrap_or_else(|| DMatrix::zeros(l.nrows(), l.ncols()));
        let w = sym(&(&li * db * li.transpose()));
        let lmin = SymmetricEigen::new(w).eigenvalues.min();
        if lmin < 0.0 {
            alpha = alpha.min(-gamma / lmin);
        }
    }
    alpha
}

impl SdpData {
    fn apply(&self, x: &[DMatrix<f64>]) -> DVector<f64> {
        DVector::from_iterator(self.a.len(), self.a.iter().map(|ak| ak.iter().zip(x).map(|(a, xb)| dot(a, xb)).sum()))
    }

    fn adjoint(&self, y: &DVector<f64>) -> Vec<DMatrix<f64>> {
        let mut out: Vec<DMatrix<f64>> = self.sizes.iter().map(|&n| DMatrix::zeros(n, n)).collect();
        for (k, ak) in self.a.iter().enumerate() {
            if y[k] != 0.0 {
                for (o, a) in out.iter_mut().zip(ak) {
                    *o += a * y[k];
                }
            }
        }
        out
    }

    pub fn solve(&self, tol: f64, max_iters: usize) -> IpmOutcome {
        let m = self.a.len();
        let nb = self.sizes.len();
        let ntot: usize = self.sizes.iter().sum();
        let bnorm = self.b.iter().fold(0.0f64, |s, v| s.max(v.abs()));
        let b = DVector::from_column_slice(&self.b);
        let start = (1.0 + bnorm).max(10.0);
        let mut x: Vec<DMatrix<f64>> = self.sizes.iter().map(|&n| DMatrix::identity(n, n) * start).collect();
        let mut z: Vec<DMatrix<f64>> = self.sizes.iter().map(|&n| DMatrix::identity(n, n) * 10.0).collect();
        let mut y = DVector::zeros(m);
        let c: Vec<DMatrix<f64>> = self.sizes.iter().map(|&n| DMatrix::identity(n, n)).collect();
        let mut best = (f64::INFINITY, x.clone());
        for _ in 0..max_iters {
            let rp = &b - self.apply(&x);
            let rel = rp.amax() / (1.0 + bnorm);
            if rel < best.0 {
                best = (rel, x.clone());
            }
            let aty = self.adjoint(&y);
            let rd: Vec<DMatrix<f64>> = (0..nb).map(|k| &c[k] - &z[k] - &aty[k]).collect();
            let mu = x.iter().zip(&z).map(|(a, b)| dot(a, b)).sum::<f64>() / ntot as f64;
            let rdn = rd.iter().map(|r| r.amax()).fold(0.0, f64::max);
            if rel <= tol && mu <= 1e-10 * start && rdn <= 1e-8 {
                return IpmOutcome::Solved(x);
            }
            let zinv: Vec<DMatrix<f64>> = match z.iter().map(|zb| zb.clone().try_inverse()).collect::<Option<Vec<_>>>() {
                Some(v) => v.iter().map(sym).collect(),
                None => break,
            };
            // Schur complement M_kl = ⟨A_k, X A_l Z⁻¹⟩
            let mut xaz: Vec<Vec<DMatrix<f64>>> = Vec::with_capacity(m);
            for al in &self.a {
                xaz.push((0..nb).map(|k| &x[k] * &al[k] * &zinv[k]).collect());
            }
            let mut mm = DMatrix::zeros(m, m);
            for k in 0..m {
                for l in k..m {
                    let v: f64 = (0..nb).map(|q| dot(&self.a[k][q], &xaz[l][q])).sum();
                    mm[(k, l)] = v;
                    mm[(l, k)] = v;
                }
            }
            let scale = mm.diagonal().amax().max(1e-300);
            let chol = match Cholesky::new(mm.clone()) {
                Some(ch) => ch,
                None => {
                    let reg = mm + DMatrix::identity(m, m) * (1e-13 * scale);
                    match Cholesky::new(reg) {
                        Some(ch) => ch,
                        None => break,
                    }
                }
            };
            let direction = |r: &[DMatrix<f64>]| {
                // dX = R Z⁻¹ − X dZ Z⁻¹, dZ = Rd − Aᵀ dy
                let t: Vec<DMatrix<f64>> = (0..nb).map(|k| &r[k] * &zinv[k] - &x[k] * &rd[k] * &zinv[k]).collect();
                let rhs = &rp - self.apply(&t.iter().map(sym).collect::<Vec<_>>());
                let dy = chol.solve(&rhs);
                let atdy = self.adjoint(&dy);
                let dz: Vec<DMatrix<f64>> = (0..nb).map(|k| &rd[k] - &atdy[k]).collect();
                let dx: Vec<DMatrix<f64>> =
                    (0..nb).map(|k| sym(&(&r[k] * &zinv[k] - &x[k] * &dz[k] * &zinv[k]))).collect();
                (dx, dy, dz)
            };
            let xz: Vec<DMatrix<f64>> = (0..nb).map(|k| -(&x[k] * &z[k])).collect();
            let (dxa, _, dza) = direction(&xz);
            let ap = step_length(&x, &dxa, 1.0);
            let ad = step_length(&z, &dza, 1.0);
            let mu_aff: f64 = (0..nb)
                .map(|k| dot(&(&x[k] + &dxa[k] * ap), &(&z[k] + &dza[k] * ad)))
                .sum::<f64>()
                / ntot as f64;
            let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);
            let r: Vec<DMatrix<f64>> = (0..nb)
                .map(|k| DMatrix::identity(self.sizes[k], self.sizes[k]) * (sigma * mu) + &xz[k] - &dxa[k] * &dza[k])
                .collect();
            let (dx, dy, dz) = direction(&r);
            let ap = step_length(&x, &dx, 0.95);
            let ad = step_length(&z, &dz, 0.95);
            if ap < 1e-12 && ad < 1e-12 {
                break;
            }
            for k in 0..nb {
                x[k] += &dx[k] * ap;
                z[k] += &dz[k] * ad;
            }
            y += dy * ad;
        }
        let rp = &b - self.apply(&x);
        let rel = rp.amax() / (1.0 + bnorm);
        if rel <= tol {
            return IpmOutcome::Solved(x);
        }
        // Farkas ray: bᵀr > 0 with Aᵀr ⪯ 0 up to a trace bound of 1e8.
        let yn = y.norm();
        if yn > 0.0 {
            let r = &y / yn;
            let by = b.dot(&r);
            let atr = self.adjoint(&r);
            let lmax = atr.into_iter().map(|m| SymmetricEigen::new(m).eigenvalues.max()).fold(f64::NEG_INFINITY, f64::max);
            if by > 0.0 && lmax <= 1e-8 * by {
                return IpmOutcome::Infeasible { residual: best.0 };
            }
        }
        IpmOutcome::Stuck { x: best.1 }
    }
}
