//! Scaled monomial bases m_α(x) = ((x − x_O)/h_O)^α, ordered by total degree
//! then lexicographically within each degree.

use crate::Scalar;
use nalgebra::{Point3, Vector3};

pub fn dim_p2(n: i64) -> usize {
    if n < 0 {
        0
    } else {
        ((n + 1) * (n + 2) / 2) as usize
    }
}

pub fn dim_p3(n: i64) -> usize {
    if n < 0 {
        0
    } else {
        ((n + 1) * (n + 2) * (n + 3) / 6) as usize
    }
}

/// All 2D exponent pairs with |α| ≤ n, degree-major then lexicographic.
pub fn exponents_2d(n: i64) -> Vec<[usize; 2]> {
    let mut out = Vec::with_capacity(dim_p2(n));
    if n < 0 {
        return out;
    }
    for d in 0..=(n as usize) {
        for a in (0..=d).rev() {
            out.push([a, d - a]);
        }
    }
    out
}

/// All 3D exponent triples with |α| ≤ n, degree-major then lexicographic.
pub fn exponents_3d(n: i64) -> Vec<[usize; 3]> {
    let mut out = Vec::with_capacity(dim_p3(n));
    if n < 0 {
        return out;
    }
    for d in 0..=(n as usize) {
        for a in (0..=d).rev() {
            for b in (0..=(d - a)).rev() {
                out.push([a, b, d - a - b]);
            }
        }
    }
    out
}

/// 2D scaled monomials on a face, in the face's in-plane frame. Coordinates
/// fed to the evaluators are already centered and scaled (`Face::local_coords`),
/// so only the diameter is needed to undo the gradient scaling.
#[derive(Clone, Debug)]
pub struct MonomialBasis2d<S: Scalar> {
    pub degree: i64,
    pub exps: Vec<[usize; 2]>,
    pub h: S,
}

impl<S: Scalar> MonomialBasis2d<S> {
    pub fn new(degree: i64, h: S) -> Self {
        Self {
            degree,
            exps: exponents_2d(degree),
            h,
        }
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn index_of(&self, e: [usize; 2]) -> usize {
        let d = e[0] + e[1];
        // offset of degree block d plus position within the block
        dim_p2(d as i64 - 1) + (d - e[0])
    }

    #[inline]
    pub fn eval(&self, xi: S, eta: S, i: usize) -> S {
        let [a, b] = self.exps[i];
        powi(xi, a) * powi(eta, b)
    }

    /// Physical in-plane gradient (d/dt1, d/dt2).
    #[inline]
    pub fn grad(&self, xi: S, eta: S, i: usize) -> (S, S) {
        let [a, b] = self.exps[i];
        let gx = if a == 0 {
            S::zero()
        } else {
            S::from_usize(a).unwrap() * powi(xi, a - 1) * powi(eta, b) / self.h
        };
        let gy = if b == 0 {
            S::zero()
        } else {
            S::from_usize(b).unwrap() * powi(xi, a) * powi(eta, b - 1) / self.h
        };
        (gx, gy)
    }

    /// Coefficients of the physical Laplacian of m_i in the degree ≤ n−2 basis.
    pub fn laplacian_coeffs(&self, i: usize) -> Vec<(usize, S)> {
        let [a, b] = self.exps[i];
        let h2 = self.h * self.h;
        let mut out = Vec::new();
        if a >= 2 {
            out.push((
                self.index_of([a - 2, b]),
                S::from_usize(a * (a - 1)).unwrap() / h2,
            ));
        }
        if b >= 2 {
            out.push((
                self.index_of([a, b - 2]),
                S::from_usize(b * (b - 1)).unwrap() / h2,
            ));
        }
        out
    }
}

/// 3D scaled monomials on a cell.
#[derive(Clone, Debug)]
pub struct MonomialBasis3d<S: Scalar> {
    pub degree: i64,
    pub exps: Vec<[usize; 3]>,
    pub centroid: Point3<S>,
    pub h: S,
}

impl<S: Scalar> MonomialBasis3d<S> {
    pub fn new(degree: i64, centroid: Point3<S>, h: S) -> Self {
        Self {
            degree,
            exps: exponents_3d(degree),
            centroid,
            h,
        }
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn index_of(&self, e: [usize; 3]) -> usize {
        let d = e[0] + e[1] + e[2];
        let mut idx = dim_p3(d as i64 - 1);
        // within-degree: (a, b) descending lexicographic as generated
        for a in ((e[0] + 1)..=d).rev() {
            idx += d - a + 1;
        }
        idx += (d - e[0]) - e[1];
        idx
    }

    #[inline]
    pub fn local(&self, p: &Point3<S>) -> Vector3<S> {
        (p - self.centroid) / self.h
    }

    #[inline]
    pub fn eval_local(&self, x: &Vector3<S>, i: usize) -> S {
        let [a, b, c] = self.exps[i];
        powi(x.x, a) * powi(x.y, b) * powi(x.z, c)
    }

    #[inline]
    pub fn eval(&self, p: &Point3<S>, i: usize) -> S {
        self.eval_local(&self.local(p), i)
    }

    /// Physical gradient of m_i at p.
    pub fn grad(&self, p: &Point3<S>, i: usize) -> Vector3<S> {
        let x = self.local(p);
        let [a, b, c] = self.exps[i];
        let mut g = Vector3::zeros();
        if a > 0 {
            g.x = S::from_usize(a).unwrap() * powi(x.x, a - 1) * powi(x.y, b) * powi(x.z, c);
        }
        if b > 0 {
            g.y = S::from_usize(b).unwrap() * powi(x.x, a) * powi(x.y, b - 1) * powi(x.z, c);
        }
        if c > 0 {
            g.z = S::from_usize(c).unwrap() * powi(x.x, a) * powi(x.y, b) * powi(x.z, c - 1);
        }
        g / self.h
    }

    /// Coefficients of ∂_d m_i in the degree ≤ n−1 basis (physical derivative).
    pub fn deriv_coeffs(&self, i: usize, d: usize) -> Option<(usize, S)> {
        let mut e = self.exps[i];
        if e[d] == 0 {
            return None;
        }
        let factor = S::from_usize(e[d]).unwrap() / self.h;
        e[d] -= 1;
        Some((self.index_of(e), factor))
    }
}

#[inline]
fn powi<S: Scalar>(x: S, n: usize) -> S {
    let mut acc = S::one();
    for _ in 0..n {
        acc *= x;
    }
    acc
}

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> &'static [(f64, f64)] {
    const T1: &[(f64, f64)] = &[(0.0, 2.0)];
    const T2: &[(f64, f64)] = &[
        (-5.77350269189625731e-1, 1.0),
        (5.77350269189625731e-1, 1.0),
    ];
    const T3: &[(f64, f64)] = &[
        (-7.74596669241483404e-1, 5.55555555555555691e-1),
        (0.0, 8.88888888888888840e-1),
        (7.74596669241483404e-1, 5.55555555555555691e-1),
    ];
    const T4: &[(f64, f64)] = &[
        (-8.61136311594052573e-1, 3.47854845137453683e-1),
        (-3.39981043584856257e-1, 6.52145154862546206e-1),
        (3.39981043584856257e-1, 6.52145154862546206e-1),
        (8.61136311594052573e-1, 3.47854845137453683e-1),
    ];
    const T5: &[(f64, f64)] = &[
        (-9.06179845938663964e-1, 2.36926885056189418e-1),
        (-5.38469310105683108e-1, 4.78628670499366193e-1),
        (0.0, 5.68888888888888999e-1),
        (5.38469310105683108e-1, 4.78628670499366193e-1),
        (9.06179845938663964e-1, 2.36926885056189418e-1),
    ];
    const T6: &[(f64, f64)] = &[
        (-9.32469514203152050e-1, 1.71324492379169746e-1),
        (-6.61209386466264482e-1, 3.60761573048138939e-1),
        (-2.38619186083196932e-1, 4.67913934572691370e-1),
        (2.38619186083196932e-1, 4.67913934572691370e-1),
        (6.61209386466264482e-1, 3.60761573048138939e-1),
        (9.32469514203152050e-1, 1.71324492379169746e-1),
    ];
    const T7: &[(f64, f64)] = &[
        (-9.49107912342758486e-1, 1.29484966168870647e-1),
        (-7.41531185599394460e-1, 2.79705391489276589e-1),
        (-4.05845151377397184e-1, 3.81830050505118312e-1),
        (0.0, 4.17959183673468959e-1),
        (4.05845151377397184e-1, 3.81830050505118312e-1),
        (7.41531185599394460e-1, 2.79705391489276589e-1),
        (9.49107912342758486e-1, 1.29484966168870647e-1),
    ];
    const T8: &[(f64, f64)] = &[
        (-9.60289856497536176e-1, 1.01228536290376689e-1),
        (-7.96666477413626728e-1, 2.22381034453374343e-1),
        (-5.25532409916328991e-1, 3.13706645877887047e-1),
        (-1.83434642495649780e-1, 3.62683783378361768e-1),
        (1.83434642495649780e-1, 3.62683783378361768e-1),
        (5.25532409916328991e-1, 3.13706645877887047e-1),
        (7.96666477413626728e-1, 2.22381034453374343e-1),
        (9.60289856497536176e-1, 1.01228536290376689e-1),
    ];
    const T9: &[(f64, f64)] = &[
        (-9.68160239507626086e-1, 8.12743883615747176e-2),
        (-8.36031107326635770e-1, 1.80648160694857118e-1),
        (-6.13371432700590358e-1, 2.60610696402935660e-1),
        (-3.24253423403808916e-1, 3.12347077040002807e-1),
        (0.0, 3.30239355001259671e-1),
        (3.24253423403808916e-1, 3.12347077040002807e-1),
        (6.13371432700590358e-1, 2.60610696402935660e-1),
        (8.36031107326635770e-1, 1.80648160694857118e-1),
        (9.68160239507626086e-1, 8.12743883615747176e-2),
    ];
    const T10: &[(f64, f64)] = &[
        (-9.73906528517171743e-1, 6.66713443086880686e-2),
        (-8.65063366688984536e-1, 1.49451349150580365e-1),
        (-6.79409568299024436e-1, 2.19086362515982014e-1),
        (-4.33395394129247213e-1, 2.69266719309996516e-1),
        (-1.48874338981631216e-1, 2.95524224714752981e-1),
        (1.48874338981631216e-1, 2.95524224714752981e-1),
        (4.33395394129247213e-1, 2.69266719309996516e-1),
        (6.79409568299024436e-1, 2.19086362515982014e-1),
        (8.65063366688984536e-1, 1.49451349150580365e-1),
        (9.73906528517171743e-1, 6.66713443086880686e-2),
    ];
    match n {
        1 => T1,
        2 => T2,
        3 => T3,
        4 => T4,
        5 => T5,
        6 => T6,
        7 => T7,
        8 => T8,
        9 => T9,
        10 => T10,
        _ => panic!("Gauss-Legendre table covers n ≤ 10, requested {n}"),
    }
}

/// Interior Gauss–Lobatto nodes on [−1, 1] for a (k+1)-point Lobatto set;
/// these place the k−1 edge dofs.
pub fn lobatto_interior(k: usize) -> Vec<f64> {
    match k {
        1 => vec![],
        2 => vec![0.0],
        3 => {
            let r = 1.0 / 5.0f64.sqrt();
            vec![-r, r]
        }
        4 => {
            let r = (3.0 / 7.0f64).sqrt();
            vec![-r, 0.0, r]
        }
        _ => panic!("edge dof placement supports k ≤ 4, requested {k}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn dims_match_closed_forms() {
        assert_eq!(dim_p2(-1), 0);
        assert_eq!(dim_p2(0), 1);
        assert_eq!(dim_p2(2), 6);
        assert_eq!(dim_p3(-1), 0);
        assert_eq!(dim_p3(1), 4);
        assert_eq!(dim_p3(3), 20);
        assert_eq!(exponents_3d(4).len(), dim_p3(4));
    }

    #[test]
    fn index_of_inverts_enumeration() {
        let b2 = MonomialBasis2d::<f64>::new(5, 1.0);
        for (i, &e) in b2.exps.iter().enumerate() {
            assert_eq!(b2.index_of(e), i);
        }
        let b3 = MonomialBasis3d::<f64>::new(5, Point3::origin(), 1.0);
        for (i, &e) in b3.exps.iter().enumerate() {
            assert_eq!(b3.index_of(e), i, "exp {e:?}");
        }
    }

    #[test]
    fn constant_monomial_is_one_with_zero_gradient() {
        let b = MonomialBasis3d::<f64>::new(2, Point3::new(0.3, -0.2, 0.9), 2.0);
        let p = Point3::new(1.0, 1.0, 1.0);
        assert_eq!(b.eval(&p, 0), 1.0);
        assert_eq!(b.grad(&p, 0).norm(), 0.0);
    }

    #[test]
    fn centered_linear_monomial_vanishes_at_centroid() {
        let b = MonomialBasis2d::<f64>::new(2, 1.5);
        // index 1 and 2 are the two linear monomials; local coords at the
        // centroid are (0, 0)
        assert_eq!(b.eval(0.0, 0.0, 1), 0.0);
        assert_eq!(b.eval(0.0, 0.0, 2), 0.0);
    }

    proptest! {
        /// Finite-difference oracle for 3D gradients (step 1e-5·h).
        #[test]
        fn gradient_matches_finite_differences(
            seed in 0usize..dim_p3(3),
            px in -0.4f64..0.4, py in -0.4f64..0.4, pz in -0.4f64..0.4
        ) {
            let h = 2.0;
            let b = MonomialBasis3d::<f64>::new(3, Point3::new(0.1, 0.2, -0.3), h);
            let p = Point3::new(px, py, pz);
            let g = b.grad(&p, seed);
            let step = 1e-5 * h;
            for d in 0..3 {
                let mut hi = p;
                let mut lo = p;
                hi[d] += step;
                lo[d] -= step;
                let fd = (b.eval(&hi, seed) - b.eval(&lo, seed)) / (2.0 * step);
                prop_assert!((fd - g[d]).abs() < 1e-6, "component {d}: fd {fd} vs {g}");
            }
        }
    }

    #[test]
    fn laplacian_coeffs_match_direct_evaluation() {
        let b = MonomialBasis2d::<f64>::new(4, 0.7);
        let i = b.index_of([2, 2]);
        let lap = b.laplacian_coeffs(i);
        // Δ(ξ²η²) = 2η² + 2ξ² in scaled coordinates, divided by h²
        let (xi, eta) = (0.3, -0.2);
        let direct: f64 = lap.iter().map(|&(j, c)| c * b.eval(xi, eta, j)).sum();
        let expect = (2.0 * eta * eta + 2.0 * xi * xi) / (0.7 * 0.7);
        assert!((direct - expect).abs() < 1e-14);
    }
}
