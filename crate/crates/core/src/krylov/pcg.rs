//! Conjugate gradients with the Lanczos tridiagonal accumulated from the CG
//! coefficients, and restarted GMRES for the non-symmetric baseline.

use crate::{lit, Error, Result, Scalar};
use nalgebra::{DMatrix, DVector};

/// Abstract linear operator (and preconditioner) interface.
pub trait LinOp<S> {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[S]) -> Vec<S>;
}

/// Identity preconditioner.
pub struct IdentityOp(pub usize);

impl<S: Scalar> LinOp<S> for IdentityOp {
    fn dim(&self) -> usize {
        self.0
    }
    fn apply(&self, x: &[S]) -> Vec<S> {
        x.to_vec()
    }
}

#[derive(Clone, Debug)]
pub struct KrylovReport {
    pub iterations: usize,
    pub converged: bool,
    pub residuals: Vec<f64>,
    /// Extreme Ritz values of the preconditioned operator from the Lanczos
    /// tridiagonal (CG only).
    pub lambda_min: Option<f64>,
    pub lambda_max: Option<f64>,
    pub condition: Option<f64>,
}

impl KrylovReport {
    fn from_cg(residuals: Vec<f64>, converged: bool, alphas: &[f64], betas: &[f64]) -> Self {
        let m = alphas.len();
        let mut report = KrylovReport {
            iterations: residuals.len().saturating_sub(1),
            converged,
            residuals,
            lambda_min: None,
            lambda_max: None,
            condition: None,
        };
        if m == 0 {
            return report;
        }
        // Lanczos tridiagonal from the CG coefficients
        let mm = m.min(400);
        let mut t = DMatrix::<f64>::zeros(mm, mm);
        for j in 0..mm {
            let mut d = 1.0 / alphas[j];
            if j > 0 {
                d += betas[j - 1] / alphas[j - 1];
            }
            t[(j, j)] = d;
            if j + 1 < mm {
                let off = betas[j].sqrt() / alphas[j];
                t[(j, j + 1)] = off;
                t[(j + 1, j)] = off;
            }
        }
        let eig = t.symmetric_eigen();
        let mut lo = f64::MAX;
        let mut hi = f64::MIN;
        for &v in eig.eigenvalues.iter() {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        report.lambda_min = Some(lo);
        report.lambda_max = Some(hi);
        if lo > 0.0 {
            report.condition = Some(hi / lo);
        }
        report
    }
}

/// Preconditioned conjugate gradients with the stopping criterion
/// ‖r_k‖₂ ≤ tol·‖r_0‖₂ on the unpreconditioned residual.
pub fn pcg<S: Scalar>(
    op: &dyn LinOp<S>,
    prec: &dyn LinOp<S>,
    rhs: &[S],
    x0: Option<&[S]>,
    tol: f64,
    maxit: usize,
) -> Result<(Vec<S>, KrylovReport)> {
    let n = op.dim();
    assert_eq!(rhs.len(), n);
    let mut x = x0.map_or_else(|| vec![S::zero(); n], <[S]>::to_vec);
    let mut r = if x0.is_some() {
        let ax = op.apply(&x);
        (0..n).map(|i| rhs[i] - ax[i]).collect::<Vec<S>>()
    } else {
        rhs.to_vec()
    };
    let norm0 = dot(&r, &r).to_f64_lossy().sqrt();
    let mut residuals = vec![norm0];
    if norm0 == 0.0 {
        return Ok((x, KrylovReport::from_cg(residuals, true, &[], &[])));
    }
    let mut z = prec.apply(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut alphas = Vec::new();
    let mut betas = Vec::new();
    let mut converged = false;
    for _ in 0..maxit {
        let ap = op.apply(&p);
        let pap = dot(&p, &ap);
        if pap <= S::zero() {
            return Err(Error::KrylovBreakdown(format!(
                "non-positive curvature pᵀSp = {:?}; operator not SPD on this subspace",
                pap.to_f64_lossy()
            )));
        }
        let alpha = rz / pap;
        alphas.push(alpha.to_f64_lossy());
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rnorm = dot(&r, &r).to_f64_lossy().sqrt();
        residuals.push(rnorm);
        if rnorm <= tol * norm0 {
            converged = true;
            break;
        }
        z = prec.apply(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        betas.push(beta.to_f64_lossy());
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Ok((x, KrylovReport::from_cg(residuals, converged, &alphas, &betas)))
}

fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    // sequential reduction keeps iteration counts reproducible
    a.iter().zip(b).fold(S::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Left-preconditioned restarted GMRES.
pub fn gmres<S: Scalar>(
    op: &dyn LinOp<S>,
    prec: &dyn LinOp<S>,
    rhs: &[S],
    tol: f64,
    restart: usize,
    maxit: usize,
) -> Result<(Vec<S>, KrylovReport)> {
    let n = op.dim();
    let mut x = vec![S::zero(); n];
    let b_prec = prec.apply(rhs);
    let norm0 = dot(&b_prec, &b_prec).to_f64_lossy().sqrt();
    let mut residuals = vec![norm0];
    if norm0 == 0.0 {
        return Ok((
            x,
            KrylovReport {
                iterations: 0,
                converged: true,
                residuals,
                lambda_min: None,
                lambda_max: None,
                condition: None,
            },
        ));
    }
    let mut total_iters = 0;
    let mut converged = false;
    'outer: while total_iters < maxit {
        // r = M⁻¹(b − Ax)
        let ax = op.apply(&x);
        let raw: Vec<S> = (0..n).map(|i| rhs[i] - ax[i]).collect();
        let r = prec.apply(&raw);
        let beta = dot(&r, &r).to_f64_lossy().sqrt();
        if beta <= tol * norm0 {
            converged = true;
            break;
        }
        let m = restart.min(maxit - total_iters);
        let mut v: Vec<Vec<S>> = Vec::with_capacity(m + 1);
        v.push(r.iter().map(|&t| t / lit::<S>(beta)).collect());
        let mut h = DMatrix::<f64>::zeros(m + 1, m);
        let mut g = DVector::<f64>::zeros(m + 1);
        g[0] = beta;
        let mut cs = vec![0.0f64; m];
        let mut sn = vec![0.0f64; m];
        let mut inner = 0;
        for j in 0..m {
            inner = j + 1;
            total_iters += 1;
            let w_raw = op.apply(&v[j]);
            let mut w = prec.apply(&w_raw);
            for (i, vi) in v.iter().enumerate() {
                let hij = dot(&w, vi).to_f64_lossy();
                h[(i, j)] = hij;
                for t in 0..n {
                    w[t] -= lit::<S>(hij) * vi[t];
                }
            }
            let hn = dot(&w, &w).to_f64_lossy().sqrt();
            h[(j + 1, j)] = hn;
            // Givens rotations
            for i in 0..j {
                let tmp = cs[i] * h[(i, j)] + sn[i] * h[(i + 1, j)];
                h[(i + 1, j)] = -sn[i] * h[(i, j)] + cs[i] * h[(i + 1, j)];
                h[(i, j)] = tmp;
            }
            let denom = (h[(j, j)].powi(2) + h[(j + 1, j)].powi(2)).sqrt();
            if denom == 0.0 {
                break;
            }
            cs[j] = h[(j, j)] / denom;
            sn[j] = h[(j + 1, j)] / denom;
            h[(j, j)] = denom;
            h[(j + 1, j)] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            let rnorm = g[j + 1].abs();
            residuals.push(rnorm);
            if rnorm <= tol * norm0 {
                update_gmres_solution(&mut x, &v, &h, &g, j + 1);
                converged = true;
                break 'outer;
            }
            if hn == 0.0 {
                break;
            }
            v.push(w.iter().map(|&t| t / lit::<S>(hn)).collect());
        }
        update_gmres_solution(&mut x, &v, &h, &g, inner);
    }
    Ok((
        x,
        KrylovReport {
            iterations: total_iters,
            converged,
            residuals,
            lambda_min: None,
            lambda_max: None,
            condition: None,
        },
    ))
}

fn update_gmres_solution<S: Scalar>(
    x: &mut [S],
    v: &[Vec<S>],
    h: &DMatrix<f64>,
    g: &DVector<f64>,
    m: usize,
) {
    // back-substitute the triangular least-squares system
    let mut y = vec![0.0f64; m];
    for i in (0..m).rev() {
        let mut s = g[i];
        for j in (i + 1)..m {
            s -= h[(i, j)] * y[j];
        }
        y[i] = s / h[(i, i)];
    }
    for (j, yj) in y.iter().enumerate() {
        for t in 0..x.len() {
            x[t] += lit::<S>(*yj) * v[j][t];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CooBuilder;

    struct DenseOp(DMatrix<f64>);
    impl LinOp<f64> for DenseOp {
        fn dim(&self) -> usize {
            self.0.nrows()
        }
        fn apply(&self, x: &[f64]) -> Vec<f64> {
            (&self.0 * DVector::from_column_slice(x)).data.into()
        }
    }

    #[test]
    fn two_by_two_exact_in_two_iterations() {
        let a = DMatrix::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 2.0]);
        let op = DenseOp(a.clone());
        let rhs = vec![1.0, -1.0];
        let (x, rep) = pcg(&op, &IdentityOp(2), &rhs, None, 1e-12, 10).unwrap();
        assert!(rep.converged && rep.iterations <= 2);
        let exact = a.lu().solve(&DVector::from_column_slice(&rhs)).unwrap();
        assert!((x[0] - exact[0]).abs() < 1e-10);
        assert!((x[1] - exact[1]).abs() < 1e-10);
        // Lanczos estimate reproduces the exact eigenvalue ratio
        let eig = a.symmetric_eigen();
        let kappa = eig.eigenvalues.max() / eig.eigenvalues.min();
        assert!((rep.condition.unwrap() - kappa).abs() < 1e-8 * kappa);
    }

    #[test]
    fn exact_preconditioner_converges_immediately() {
        let a = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 5.0]);
        struct Inv(DMatrix<f64>);
        impl LinOp<f64> for Inv {
            fn dim(&self) -> usize {
                3
            }
            fn apply(&self, x: &[f64]) -> Vec<f64> {
                self.0
                    .clone()
                    .lu()
                    .solve(&DVector::from_column_slice(x))
                    .unwrap()
                    .data
                    .into()
            }
        }
        let (_, rep) = pcg(
            &DenseOp(a.clone()),
            &Inv(a),
            &[1.0, 2.0, 3.0],
            None,
            1e-12,
            10,
        )
        .unwrap();
        assert!(rep.converged);
        assert_eq!(rep.iterations, 1);
    }

    #[test]
    fn lanczos_condition_matches_dense_eigensolve() {
        // random SPD matrix, CG run to machine精度, κ within 5%
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let n = 60;
        let m = DMatrix::<f64>::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let a = &m * m.transpose() + DMatrix::identity(n, n) * 2.0;
        let rhs: Vec<f64> = (0..n).map(|i| ((i * 13) % 7) as f64 - 3.0).collect();
        let op = DenseOp(a.clone());
        let (_, rep) = pcg(&op, &IdentityOp(n), &rhs, None, 1e-14, 400).unwrap();
        let eig = a.symmetric_eigen();
        let kappa = eig.eigenvalues.max() / eig.eigenvalues.min();
        let est = rep.condition.unwrap();
        assert!(
            (est - kappa).abs() < 0.05 * kappa,
            "Lanczos {est} vs dense {kappa}"
        );
    }

    #[test]
    fn cg_energy_error_is_monotone() {
        let a = DMatrix::from_row_slice(
            4,
            4,
            &[
                5.0, 1.0, 0.0, 0.5, 1.0, 4.0, 1.0, 0.0, 0.0, 1.0, 3.0, 1.0, 0.5, 0.0, 1.0, 6.0,
            ],
        );
        let rhs = vec![1.0, 0.0, -2.0, 1.0];
        let exact = a
            .clone()
            .lu()
            .solve(&DVector::from_column_slice(&rhs))
            .unwrap();
        let op = DenseOp(a.clone());
        let mut last = f64::MAX;
        for it in 1..=4 {
            let (x, _) = pcg(&op, &IdentityOp(4), &rhs, None, 1e-30, it).unwrap();
            let e = DVector::from_column_slice(&x) - &exact;
            let energy = (e.transpose() * &a * &e)[(0, 0)];
            assert!(energy <= last + 1e-12, "iteration {it}: {energy} > {last}");
            last = energy;
        }
    }

    #[test]
    fn gmres_matches_cg_on_spd_system() {
        let mut b = CooBuilder::new(10, 10);
        for i in 0..10 {
            b.push(i, i, 4.0);
            if i > 0 {
                b.push(i, i - 1, -1.0);
                b.push(i - 1, i, -1.0);
            }
        }
        let a = b.build();
        struct SpOp(crate::linalg::CsrMatrix<f64>);
        impl LinOp<f64> for SpOp {
            fn dim(&self) -> usize {
                self.0.nrows()
            }
            fn apply(&self, x: &[f64]) -> Vec<f64> {
                self.0.mul_vec(x)
            }
        }
        let rhs: Vec<f64> = (0..10).map(|i| (i as f64).sin()).collect();
        let op = SpOp(a);
        let (xc, _) = pcg(&op, &IdentityOp(10), &rhs, None, 1e-12, 100).unwrap();
        let (xg, repg) = gmres(&op, &IdentityOp(10), &rhs, 1e-12, 30, 100).unwrap();
        assert!(repg.converged);
        for i in 0..10 {
            assert!((xc[i] - xg[i]).abs() < 1e-8);
        }
    }
}
