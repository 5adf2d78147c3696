//! Dense helpers: pivoted Gram orthogonalization, symmetric generalized
//! eigenproblems and the parallel sum of SPD matrices.

use crate::{lit, Error, Result, Scalar};
use nalgebra::DMatrix;

/// Orthonormal combinations of a (possibly rank-deficient) generator set,
/// computed by pivoted Cholesky of its Gram matrix.
pub struct GramBasis<S> {
    /// Indices of the generators kept as pivots, in pivot order.
    pub pivots: Vec<usize>,
    /// `coeff[(g, r)]`: weight of generator `g` in the r-th orthonormal
    /// combination; rows follow the original generator indexing.
    pub coeff: DMatrix<S>,
}

impl<S: Scalar> GramBasis<S> {
    pub fn rank(&self) -> usize {
        self.coeff.ncols()
    }
}

/// Pivoted Cholesky on a Gram matrix with relative drop tolerance.
///
/// Stops once the largest remaining Schur-complement diagonal falls below
/// `drop_tol · max(initial diagonal)`.
pub fn pivoted_gram_basis<S: Scalar>(gram: &DMatrix<S>, drop_tol: S) -> GramBasis<S> {
    let m = gram.nrows();
    assert_eq!(m, gram.ncols());
    let mut g = gram.clone();
    let mut order: Vec<usize> = (0..m).collect();
    // l is lower-triangular in pivot order: G(perm,perm) = L Lᵀ
    let mut l = DMatrix::<S>::zeros(m, m);
    let max_diag = (0..m).fold(S::zero(), |acc, i| acc.max(g[(i, i)]));
    let threshold = drop_tol * max_diag;
    let mut rank = 0;
    for k in 0..m {
        // choose largest remaining diagonal as pivot
        let (mut best, mut best_val) = (k, g[(order[k], order[k])]);
        for (j, &oj) in order.iter().enumerate().skip(k) {
            if g[(oj, oj)] > best_val {
                best = j;
                best_val = g[(oj, oj)];
            }
        }
        if best_val <= threshold || best_val <= S::zero() {
            break;
        }
        order.swap(k, best);
        l.swap_rows(k, best);
        let piv = order[k];
        let lkk = best_val.sqrt();
        l[(k, k)] = lkk;
        for j in (k + 1)..m {
            let oj = order[j];
            let mut v = g[(oj, piv)];
            for t in 0..k {
                v -= l[(j, t)] * l[(k, t)];
            }
            l[(j, k)] = v / lkk;
            g[(oj, oj)] -= l[(j, k)] * l[(j, k)];
        }
        rank = k + 1;
    }
    // coefficients: b_r = Σ_t inv(L₁ᵀ)[t,r] · generator[pivot_t]
    // where L₁ is the leading rank×rank block
    let l1 = l.view((0, 0), (rank, rank)).into_owned();
    let mut inv = DMatrix::<S>::identity(rank, rank);
    // forward solve L₁ X = I, then combinations use Xᵀ columns
    for c in 0..rank {
        for r in 0..rank {
            let mut v = inv[(r, c)];
            for t in 0..r {
                v -= l1[(r, t)] * inv[(t, c)];
            }
            inv[(r, c)] = v / l1[(r, r)];
        }
    }
    let mut coeff = DMatrix::<S>::zeros(m, rank);
    for r in 0..rank {
        for t in 0..rank {
            // b_r = Σ_t (L₁⁻ᵀ)[t, r] g_{pivot_t} = Σ_t inv[(r, t)] g_{pivot_t}
            coeff[(order[t], r)] = inv[(r, t)];
        }
    }
    GramBasis {
        pivots: order[..rank].to_vec(),
        coeff,
    }
}

/// Split the row space of a constraint matrix into an orthonormal basis and
/// an orthonormal basis of its null space, via the spectral decomposition of
/// CᵀC with relative tolerance `tol`.
///
/// Returns `(rowspace, nullspace)` with columns as basis vectors of length
/// `c.ncols()`.
pub fn split_rowspace_nullspace<S: Scalar>(
    c: &DMatrix<S>,
    tol: S,
) -> (DMatrix<S>, DMatrix<S>) {
    let m = c.ncols();
    if c.nrows() == 0 {
        return (DMatrix::zeros(m, 0), DMatrix::identity(m, m));
    }
    let ctc = c.transpose() * c;
    let eig = ctc.symmetric_eigen();
    let lam_max = eig.eigenvalues.iter().fold(S::zero(), |a, &b| a.max(b));
    let cut = lam_max * tol * tol;
    let mut row_cols = Vec::new();
    let mut null_cols = Vec::new();
    for (i, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam > cut && lam_max > S::zero() {
            row_cols.push(i);
        } else {
            null_cols.push(i);
        }
    }
    let pick = |cols: &[usize]| {
        let mut out = DMatrix::<S>::zeros(m, cols.len());
        for (k, &i) in cols.iter().enumerate() {
            out.set_column(k, &eig.eigenvectors.column(i));
        }
        out
    };
    (pick(&row_cols), pick(&null_cols))
}

/// Eigenpairs of the symmetric-definite pencil `A x = λ B x`, ascending.
pub fn sym_generalized_eigen<S: Scalar>(
    a: &DMatrix<S>,
    b: &DMatrix<S>,
) -> Result<(Vec<S>, DMatrix<S>)> {
    let n = a.nrows();
    let sym_a = (a + a.transpose()) * lit::<S>(0.5);
    let sym_b = (b + b.transpose()) * lit::<S>(0.5);
    let chol = sym_b
        .cholesky()
        .ok_or_else(|| Error::EigenFailure("pencil right-hand matrix not SPD".to_string()))?;
    let l = chol.l();
    let lt = l.transpose();
    // C = L⁻¹ A L⁻ᵀ via two triangular solves
    let mut x = sym_a;
    if !l.solve_lower_triangular_mut(&mut x) {
        return Err(Error::EigenFailure("singular Cholesky factor".to_string()));
    }
    let mut xt = x.transpose();
    if !l.solve_lower_triangular_mut(&mut xt) {
        return Err(Error::EigenFailure("singular Cholesky factor".to_string()));
    }
    let c = (&xt + xt.transpose()) * lit::<S>(0.5);
    let eig = c.symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| {
        eig.eigenvalues[i]
            .partial_cmp(&eig.eigenvalues[j])
            .unwrap()
    });
    let mut vals = Vec::with_capacity(n);
    let mut vecs = DMatrix::<S>::zeros(n, n);
    for (k, &i) in idx.iter().enumerate() {
        vals.push(eig.eigenvalues[i]);
        let mut y = eig.eigenvectors.column(i).into_owned();
        if !lt.solve_upper_triangular_mut(&mut y) {
            return Err(Error::EigenFailure("singular Cholesky factor".to_string()));
        }
        vecs.set_column(k, &y);
    }
    Ok((vals, vecs))
}

/// Parallel sum `A : B = A (A + B)⁻¹ B` of two SPD matrices, symmetrized.
pub fn parallel_sum<S: Scalar>(a: &DMatrix<S>, b: &DMatrix<S>) -> Result<DMatrix<S>> {
    let sum = a + b;
    let lu = sum.lu();
    let x = lu
        .solve(b)
        .ok_or_else(|| Error::Factorization("singular A + B in parallel sum".to_string()))?;
    let ab = a * x;
    Ok((&ab + ab.transpose()) * lit::<S>(0.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_spd(seed: u64, n: usize) -> DMatrix<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        &m * m.transpose() + DMatrix::identity(n, n) * 0.5
    }

    #[test]
    fn gram_basis_detects_rank() {
        // three generators, third = first + second
        let v1 = nalgebra::DVector::from_vec(vec![1.0, 0.0, 2.0]);
        let v2 = nalgebra::DVector::from_vec(vec![0.0, 1.0, -1.0]);
        let v3 = &v1 + &v2;
        let gens = [v1, v2, v3];
        let mut gram = DMatrix::<f64>::zeros(3, 3);
        for i in 0..3 {
            for j in 0..3 {
                gram[(i, j)] = gens[i].dot(&gens[j]);
            }
        }
        let basis = pivoted_gram_basis::<f64>(&gram, 1e-10);
        assert_eq!(basis.rank(), 2);
        // combinations must be orthonormal under the Gram inner product
        let c = &basis.coeff;
        let check = c.transpose() * &gram * c;
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((check[(i, j)] - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn nullspace_of_flux_row() {
        let c = DMatrix::from_row_slice(1, 4, &[1.0, 1.0, 1.0, 1.0]);
        let (row, null) = split_rowspace_nullspace(&c, 1e-10);
        assert_eq!(row.ncols(), 1);
        assert_eq!(null.ncols(), 3);
        let prod = &c * &null;
        assert!(prod.amax() < 1e-12);
    }

    #[test]
    fn generalized_eigen_recovers_ratio() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 8.0]));
        let b = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 2.0]));
        let (vals, vecs) = sym_generalized_eigen::<f64>(&a, &b).unwrap();
        assert!((vals[0] - 2.0).abs() < 1e-12);
        assert!((vals[1] - 4.0).abs() < 1e-12);
        // B-orthogonality of eigenvectors
        let m = vecs.transpose() * &b * &vecs;
        assert!((m[(0, 1)]).abs() < 1e-12);
    }

    #[test]
    fn parallel_sum_is_below_both() {
        for seed in 0..5u64 {
            let a = random_spd(seed, 5);
            let b = random_spd(seed + 100, 5);
            let ab = parallel_sum::<f64>(&a, &b).unwrap();
            // A:B ⪯ A and A:B ⪯ B — smallest eigenvalue of difference ≥ -1e-12
            for other in [&a, &b] {
                let diff = other - &ab;
                let eig = diff.symmetric_eigen();
                let min = eig.eigenvalues.iter().cloned().fold(f64::MAX, f64::min);
                assert!(min > -1e-10, "parallel sum not dominated: {min}");
            }
        }
    }

    #[test]
    fn scalar_parallel_sum_formula() {
        let a = DMatrix::from_element(1, 1, 3.0);
        let b = DMatrix::from_element(1, 1, 6.0);
        let ab = parallel_sum::<f64>(&a, &b).unwrap();
        assert!((ab[(0, 0)] - 2.0).abs() < 1e-14); // 1/(1/3+1/6) = 2
    }
}
