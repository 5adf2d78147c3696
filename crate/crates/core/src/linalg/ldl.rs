//! Sparse LDLᵀ factorization for symmetric saddle-point matrices.
//!
//! Up-looking factorization over the elimination tree with AMD fill-reducing
//! ordering, signed dynamic regularization for indefinite pivots, and
//! iterative refinement in the solves. The diagonal sign vector says which
//! rows belong to the positive (velocity) and negative (pressure/multiplier)
//! blocks of the quasi-definite form.

use super::sparse::CsrMatrix;
use crate::{lit, Error, Result, Scalar};

const UNKNOWN: usize = usize::MAX;

pub struct LdlSolver<S> {
    n: usize,
    perm: Vec<usize>,
    lp: Vec<usize>,
    li: Vec<usize>,
    lx: Vec<S>,
    dinv: Vec<S>,
    a: CsrMatrix<S>,
    /// Ruiz equilibration scaling, applied symmetrically before factoring.
    scale: Vec<S>,
    regularize_count: usize,
    refine_steps: usize,
}

impl<S: Scalar> LdlSolver<S> {
    /// Factor a symmetric matrix given in full (both triangles) CSR form.
    /// `signs[i] = -1` marks rows of the negative-definite block.
    pub fn new(a: CsrMatrix<S>, signs: &[i8]) -> Result<Self> {
        assert_eq!(a.nrows(), a.ncols());
        assert_eq!(signs.len(), a.nrows());
        let n = a.nrows();
        if n == 0 {
            return Ok(Self {
                n,
                perm: Vec::new(),
                lp: vec![0],
                li: Vec::new(),
                lx: Vec::new(),
                dinv: Vec::new(),
                a,
                scale: Vec::new(),
                regularize_count: 0,
                refine_steps: 2,
            });
        }

        let scale = ruiz_scaling(&a, 4);
        let (ap_u, ai_u, mut ax_u) = a.upper_triangle_csc();
        // apply the symmetric scaling S A S to the upper triangle
        for j in 0..n {
            for idx in ap_u[j]..ap_u[j + 1] {
                ax_u[idx] *= scale[ai_u[idx]] * scale[j];
            }
        }
        let perm = if n > 4 {
            let control = amd::Control::default();
            let (perm, _iperm, _info) = amd::order(n, &ap_u, &ai_u, &control)
                .map_err(|e| Error::Factorization(format!("amd ordering failed: {e:?}")))?;
            perm
        } else {
            (0..n).collect()
        };
        let mut iperm = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            iperm[old] = new;
        }

        let (pp, pi, px) = permute_symmetric(n, &ap_u, &ai_u, &ax_u, &iperm);
        let mut psigns = vec![1i8; n];
        for old in 0..n {
            psigns[iperm[old]] = signs[old];
        }

        let mut etree = vec![UNKNOWN; n];
        let mut lnz = vec![0usize; n];
        etree_and_counts(n, &pp, &pi, &mut etree, &mut lnz)?;
        let total: usize = lnz.iter().sum();

        let mut lp = vec![0usize; n + 1];
        for k in 0..n {
            lp[k + 1] = lp[k] + lnz[k];
        }
        let mut li = vec![0usize; total];
        let mut lx = vec![S::zero(); total];
        let mut d = vec![S::zero(); n];
        let mut dinv = vec![S::zero(); n];

        // thresholds on the equilibrated matrix (entries are O(1))
        let eps = lit::<S>(1e-13);
        let delta = lit::<S>(1e-11);

        let regularize_count = factor(
            n, &pp, &pi, &px, &lp, &mut li, &mut lx, &mut d, &mut dinv, &etree, &psigns, eps, delta,
        )?;

        Ok(Self {
            n,
            perm,
            lp,
            li,
            lx,
            dinv,
            a,
            scale,
            regularize_count,
            refine_steps: 2,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of pivots replaced by the signed regularization.
    pub fn regularize_count(&self) -> usize {
        self.regularize_count
    }

    fn solve_raw(&self, b: &[S], x: &mut [S], work: &mut [S]) {
        // (S A S)(S⁻¹x) = S b, so scale the rhs going in and the result out
        for (k, &p) in self.perm.iter().enumerate() {
            work[k] = b[p] * self.scale[p];
        }
        lsolve(&self.lp, &self.li, &self.lx, work);
        for (w, &d) in work.iter_mut().zip(&self.dinv) {
            *w *= d;
        }
        ltsolve(&self.lp, &self.li, &self.lx, work);
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = work[k] * self.scale[p];
        }
    }

    /// Solve with iterative refinement against the stored matrix.
    pub fn solve(&self, b: &[S]) -> Vec<S> {
        let mut x = vec![S::zero(); self.n];
        self.solve_into(b, &mut x);
        x
    }

    pub fn solve_into(&self, b: &[S], x: &mut [S]) {
        let n = self.n;
        if n == 0 {
            return;
        }
        let mut work = vec![S::zero(); n];
        self.solve_raw(b, x, &mut work);
        if self.refine_steps == 0 {
            return;
        }
        let mut r = vec![S::zero(); n];
        let mut dx = vec![S::zero(); n];
        let mut bnorm = b.iter().fold(S::zero(), |m, v| m.max(v.abs()));
        if bnorm == S::zero() {
            bnorm = S::one();
        }
        for _ in 0..self.refine_steps.max(1) {
            self.a.mul_vec_into(x, &mut r);
            let mut rmax = S::zero();
            for i in 0..n {
                r[i] = b[i] - r[i];
                rmax = rmax.max(r[i].abs());
            }
            if rmax <= bnorm * lit::<S>(1e-15) {
                break;
            }
            self.solve_raw(&r, &mut dx, &mut work);
            for i in 0..n {
                x[i] += dx[i];
            }
        }
    }
}

/// Symmetric Ruiz equilibration: iteratively scale rows/columns toward unit
/// infinity norm. Returns the diagonal scaling vector.
fn ruiz_scaling<S: Scalar>(a: &CsrMatrix<S>, iters: usize) -> Vec<S> {
    let n = a.nrows();
    let mut s = vec![S::one(); n];
    for _ in 0..iters {
        let mut rowmax = vec![S::zero(); n];
        for (i, j, v) in a.iter() {
            let av = (v * s[i] * s[j]).abs();
            if av > rowmax[i] {
                rowmax[i] = av;
            }
        }
        for i in 0..n {
            if rowmax[i] > S::zero() {
                s[i] /= rowmax[i].sqrt();
            }
        }
    }
    s
}

/// Elimination tree and per-column factor counts for an upper CSC matrix.
fn etree_and_counts(
    n: usize,
    ap: &[usize],
    ai: &[usize],
    etree: &mut [usize],
    lnz: &mut [usize],
) -> Result<()> {
    let mut work = vec![UNKNOWN; n];
    for j in 0..n {
        work[j] = j;
        for &row in &ai[ap[j]..ap[j + 1]] {
            let mut i = row;
            if i > j {
                return Err(Error::Factorization(
                    "matrix not upper triangular".to_string(),
                ));
            }
            while work[i] != j {
                if etree[i] == UNKNOWN {
                    etree[i] = j;
                }
                lnz[i] += 1;
                work[i] = j;
                i = etree[i];
            }
        }
    }
    Ok(())
}

/// Symmetric permutation of an upper CSC matrix (Davis, "Direct Methods").
fn permute_symmetric<S: Scalar>(
    n: usize,
    ap: &[usize],
    ai: &[usize],
    ax: &[S],
    iperm: &[usize],
) -> (Vec<usize>, Vec<usize>, Vec<S>) {
    let mut counts = vec![0usize; n + 1];
    for j in 0..n {
        let pj = iperm[j];
        for &i in &ai[ap[j]..ap[j + 1]] {
            let pi = iperm[i];
            counts[pi.max(pj) + 1] += 1;
        }
    }
    for j in 0..n {
        counts[j + 1] += counts[j];
    }
    let nnz = counts[n];
    let mut next = counts[..n].to_vec();
    let mut rows = vec![0usize; nnz];
    let mut vals = vec![S::zero(); nnz];
    for j in 0..n {
        let pj = iperm[j];
        for idx in ap[j]..ap[j + 1] {
            let pi = iperm[ai[idx]];
            let col = pi.max(pj);
            let pos = next[col];
            rows[pos] = pi.min(pj);
            vals[pos] = ax[idx];
            next[col] += 1;
        }
    }
    (counts, rows, vals)
}

#[allow(clippy::too_many_arguments)]
fn factor<S: Scalar>(
    n: usize,
    ap: &[usize],
    ai: &[usize],
    ax: &[S],
    lp: &[usize],
    li: &mut [usize],
    lx: &mut [S],
    d: &mut [S],
    dinv: &mut [S],
    etree: &[usize],
    signs: &[i8],
    eps: S,
    delta: S,
) -> Result<usize> {
    let mut regularized = 0usize;
    let mut y_vals = vec![S::zero(); n];
    let mut y_used = vec![false; n];
    let mut y_idx = vec![0usize; n];
    let mut elim = vec![0usize; n];
    let mut next_space = lp[..n].to_vec();

    fn finalize_pivot<S: Scalar>(
        d: &mut [S],
        dinv: &mut [S],
        k: usize,
        signs: &[i8],
        eps: S,
        delta: S,
        regularized: &mut usize,
    ) -> Result<()> {
        let sign = if signs[k] < 0 { -S::one() } else { S::one() };
        if d[k] * sign < eps {
            d[k] = delta * sign;
            *regularized += 1;
        }
        if d[k] == S::zero() {
            return Err(Error::Factorization(format!("zero pivot at column {k}")));
        }
        dinv[k] = S::one() / d[k];
        Ok(())
    }

    d[0] = ax[0];
    finalize_pivot(d, dinv, 0, signs, eps, delta, &mut regularized)?;

    for k in 1..n {
        // sparse triangular solve for row k of L via the elimination reach
        let mut nnz_y = 0usize;
        for idx in ap[k]..ap[k + 1] {
            let bidx = ai[idx];
            if bidx == k {
                d[k] = ax[idx];
                continue;
            }
            y_vals[bidx] = ax[idx];
            if !y_used[bidx] {
                y_used[bidx] = true;
                elim[0] = bidx;
                let mut len = 1usize;
                let mut next = etree[bidx];
                while next != UNKNOWN && next < k {
                    if y_used[next] {
                        break;
                    }
                    y_used[next] = true;
                    elim[len] = next;
                    len += 1;
                    next = etree[next];
                }
                while len > 0 {
                    len -= 1;
                    y_idx[nnz_y] = elim[len];
                    nnz_y += 1;
                }
            }
        }
        for i in (0..nnz_y).rev() {
            let cidx = y_idx[i];
            let yc = y_vals[cidx];
            let tmp = next_space[cidx];
            for j in lp[cidx]..tmp {
                y_vals[li[j]] -= lx[j] * yc;
            }
            let lkc = yc * dinv[cidx];
            lx[tmp] = lkc;
            li[tmp] = k;
            d[k] -= yc * lkc;
            next_space[cidx] += 1;
            y_vals[cidx] = S::zero();
            y_used[cidx] = false;
        }
        finalize_pivot(d, dinv, k, signs, eps, delta, &mut regularized)?;
    }
    Ok(regularized)
}

fn lsolve<S: Scalar>(lp: &[usize], li: &[usize], lx: &[S], x: &mut [S]) {
    for i in 0..x.len() {
        let xi = x[i];
        if xi != S::zero() {
            for j in lp[i]..lp[i + 1] {
                x[li[j]] -= lx[j] * xi;
            }
        }
    }
}

fn ltsolve<S: Scalar>(lp: &[usize], li: &[usize], lx: &[S], x: &mut [S]) {
    for i in (0..x.len()).rev() {
        let mut s = S::zero();
        for j in lp[i]..lp[i + 1] {
            s += lx[j] * x[li[j]];
        }
        x[i] -= s;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CooBuilder;
    use rand::{Rng, SeedableRng};

    fn laplacian_1d(n: usize) -> CsrMatrix<f64> {
        let mut b = CooBuilder::new(n, n);
        for i in 0..n {
            b.push(i, i, 2.0);
            if i > 0 {
                b.push(i, i - 1, -1.0);
            }
            if i + 1 < n {
                b.push(i, i + 1, -1.0);
            }
        }
        b.build()
    }

    #[test]
    fn solves_spd_tridiagonal() {
        let n = 50;
        let a = laplacian_1d(n);
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin()).collect();
        let b = a.mul_vec(&x_true);
        let solver = LdlSolver::new(a, &vec![1i8; n]).unwrap();
        let x = solver.solve(&b);
        for i in 0..n {
            assert!((x[i] - x_true[i]).abs() < 1e-10, "entry {i}");
        }
    }

    #[test]
    fn solves_saddle_point_with_zero_diagonal_block() {
        // [A Bᵀ; B 0] with A SPD random, B full row rank
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let nu = 20;
        let np = 6;
        let n = nu + np;
        let mut b = CooBuilder::new(n, n);
        for i in 0..nu {
            b.push(i, i, 4.0 + rng.gen_range(0.0..1.0));
            if i + 1 < nu {
                let v = rng.gen_range(-0.5..0.5);
                b.push(i, i + 1, v);
                b.push(i + 1, i, v);
            }
        }
        for q in 0..np {
            for t in 0..3 {
                let j = (3 * q + t) % nu;
                let v = rng.gen_range(0.5..1.0);
                b.push(nu + q, j, v);
                b.push(j, nu + q, v);
            }
        }
        let a = b.build();
        assert!(a.max_asymmetry() == 0.0);
        let mut signs = vec![1i8; n];
        for s in signs.iter_mut().skip(nu) {
            *s = -1;
        }
        let x_true: Vec<f64> = (0..n).map(|i| 1.0 - 0.1 * i as f64).collect();
        let rhs = a.mul_vec(&x_true);
        let solver = LdlSolver::new(a.clone(), &signs).unwrap();
        let x = solver.solve(&rhs);
        let resid = a.residual_norm(&x, &rhs);
        assert!(resid < 1e-10, "residual {resid}");
        for i in 0..n {
            assert!((x[i] - x_true[i]).abs() < 1e-8, "entry {i}: {}", x[i]);
        }
    }
}
