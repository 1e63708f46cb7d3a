//! Dense complex matrix algebra over `sl_m(C)`.
//!
//! The Cartan subalgebra is spanned by `H_mu = E_{mu,mu} - E_{mu+1,mu+1}` and
//! the root generators are the elementary matrices `E_ij` (i != j). The
//! invariant pairing is the trace form `<A, B> = Tr(AB)`. Cartan coordinates
//! are obtained from the Gram matrix of that pairing, so nothing here assumes
//! an orthonormal Cartan basis.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Relative tolerance used for the tracelessness check.
pub const TRACE_TOL: f64 = 1e-12;

/// A root `e_i - e_j` of `sl_m` together with its values on the Cartan basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Root {
    pub i: usize,
    pub j: usize,
    /// `coeffs[mu] = root(H_mu)`.
    pub coeffs: Vec<i32>,
}

impl Root {
    /// Value of the root on `Q = q^mu H_mu`.
    pub fn eval(&self, cartan: &[Complex64]) -> Complex64 {
        self.coeffs
            .iter()
            .zip(cartan)
            .map(|(&c, &x)| x * c as f64)
            .sum()
    }
}

/// Cartan-Weyl data for `sl_m`.
#[derive(Debug, Clone)]
pub struct LieBasis {
    m: usize,
    cartan: Vec<CMatrix>,
    roots: Vec<Root>,
    root_gens: Vec<CMatrix>,
    gram: DMatrix<f64>,
    gram_inv: DMatrix<f64>,
}

/// Components of an algebra element in the basis `(H_mu, E_root)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub cartan: Vec<Complex64>,
    pub roots: Vec<Complex64>,
}

impl LieBasis {
    pub fn sl(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidDimension(format!("sl_m needs m >= 2, got {m}")));
        }
        let rk = m - 1;
        let one = Complex64::new(1.0, 0.0);
        let cartan: Vec<CMatrix> = (0..rk)
            .map(|mu| {
                let mut h = CMatrix::zeros(m, m);
                h[(mu, mu)] = one;
                h[(mu + 1, mu + 1)] = -one;
                h
            })
            .collect();
        let mut roots = Vec::with_capacity(m * (m - 1));
        let mut root_gens = Vec::with_capacity(m * (m - 1));
        for i in 0..m {
            for j in 0..m {
                if i == j {
                    continue;
                }
                let diag = |k: usize, mu: usize| -> i32 {
                    if k == mu {
                        1
                    } else if k == mu + 1 {
                        -1
                    } else {
                        0
                    }
                };
                let coeffs = (0..rk).map(|mu| diag(i, mu) - diag(j, mu)).collect();
                roots.push(Root { i, j, coeffs });
                let mut e = CMatrix::zeros(m, m);
                e[(i, j)] = one;
                root_gens.push(e);
            }
        }
        let gram = DMatrix::from_fn(rk, rk, |a, b| (&cartan[a] * &cartan[b]).trace().re);
        let gram_inv = gram
            .clone()
            .try_inverse()
            .ok_or(Error::Singular("Cartan Gram matrix"))?;
        Ok(Self {
            m,
            cartan,
            roots,
            root_gens,
            gram,
            gram_inv,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn rank(&self) -> usize {
        self.m - 1
    }

    pub fn cartan(&self) -> &[CMatrix] {
        &self.cartan
    }

    pub fn roots(&self) -> &[Root] {
        &self.roots
    }

    pub fn root_generators(&self) -> &[CMatrix] {
        &self.root_gens
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn gram_inv(&self) -> &DMatrix<f64> {
        &self.gram_inv
    }

    /// Index of the root `e_i - e_j`.
    pub fn root_index(&self, i: usize, j: usize) -> Option<usize> {
        self.roots.iter().position(|r| r.i == i && r.j == j)
    }

    /// Index of the negative of root `k`.
    pub fn negative_root(&self, k: usize) -> usize {
        let r = &self.roots[k];
        // every (j, i) with i != j is present
        self.root_index(r.j, r.i).unwrap()
    }

    /// `Q = q^mu H_mu`, a diagonal matrix.
    pub fn cartan_element(&self, coords: &[Complex64]) -> CMatrix {
        let mut out = CMatrix::zeros(self.m, self.m);
        for (h, &c) in self.cartan.iter().zip(coords) {
            out += h * c;
        }
        out
    }

    /// Raise a covector `v_mu` to a vector with the inverse Gram matrix.
    pub fn raise(&self, v: &[Complex64]) -> Vec<Complex64> {
        apply_real(&self.gram_inv, v)
    }

    /// Lower a vector `x^mu` to `Gram_{mu nu} x^nu`.
    pub fn lower(&self, x: &[Complex64]) -> Vec<Complex64> {
        apply_real(&self.gram, x)
    }

    pub fn decompose(&self, x: &CMatrix) -> Result<Decomposition> {
        self.check_shape(x)?;
        check_traceless(x)?;
        Ok(self.decompose_unchecked(x))
    }

    /// Decomposition without the tracelessness check; any trace part is
    /// silently dropped.
    pub fn decompose_unchecked(&self, x: &CMatrix) -> Decomposition {
        let pairings: Vec<Complex64> = self
            .cartan
            .iter()
            .map(|h| (0..self.m).map(|k| h[(k, k)] * x[(k, k)]).sum())
            .collect();
        let cartan = self.raise(&pairings);
        let roots = self.roots.iter().map(|r| x[(r.i, r.j)]).collect();
        Decomposition { cartan, roots }
    }

    pub fn compose(&self, d: &Decomposition) -> CMatrix {
        let mut out = self.cartan_element(&d.cartan);
        for (r, &c) in self.roots.iter().zip(&d.roots) {
            out[(r.i, r.j)] += c;
        }
        out
    }

    fn check_shape(&self, x: &CMatrix) -> Result<()> {
        if x.nrows() != self.m || x.ncols() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                got: x.nrows().max(x.ncols()),
            });
        }
        Ok(())
    }
}

fn apply_real(a: &DMatrix<f64>, v: &[Complex64]) -> Vec<Complex64> {
    (0..a.nrows())
        .map(|r| (0..a.ncols()).map(|c| v[c] * a[(r, c)]).sum())
        .collect()
}

/// Frobenius norm.
pub fn frobenius(x: &CMatrix) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn check_traceless(x: &CMatrix) -> Result<()> {
    let tr = x.trace().norm();
    let tol = TRACE_TOL * frobenius(x).max(1.0);
    if tr > tol {
        return Err(Error::NotTraceless {
            trace: tr,
            tolerance: tol,
        });
    }
    Ok(())
}

/// A traceless square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement(CMatrix);

impl AlgebraElement {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::InvalidDimension("algebra element must be square".into()));
        }
        check_traceless(&matrix)?;
        Ok(Self(matrix))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }
}

/// `Tr(AB)`.
pub fn trace_pairing(a: &CMatrix, b: &CMatrix) -> Result<Complex64> {
    if a.shape() != b.shape() || a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: b.nrows(),
        });
    }
    let n = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    Ok(acc)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Matrix exponential.
///
/// Backed by nalgebra's scaling-and-squaring Pade implementation.
pub fn expm(x: &CMatrix) -> Result<CMatrix> {
    if x.nrows() != x.ncols() {
        return Err(Error::InvalidDimension("exponential of a non-square matrix".into()));
    }
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("matrix exponential argument"));
    }
    Ok(x.clone().exp())
}

pub fn inverse(x: &CMatrix) -> Result<CMatrix> {
    x.clone().try_inverse().ok_or(Error::Singular("matrix inverse"))
}

/// Eigenvalues from the complex Schur form.
pub fn eigenvalues(a: &CMatrix) -> Result<Vec<Complex64>> {
    if a.iter().any(|z| !z.is_finite()) {
        return Err(Error::NonFinite("eigenvalue argument"));
    }
    let schur = nalgebra::linalg::Schur::try_new(a.clone(), 1e-15, 10_000)
        .ok_or(Error::Singular("Schur decomposition did not converge"))?;
    let (_, t) = schur.unpack();
    Ok(t.diagonal().iter().copied().collect())
}

/// Columns are unit eigenvectors of `a` for the given eigenvalues, each taken
/// as the right singular vector of `a - lambda` with the smallest singular
/// value.
pub fn eigenbasis(a: &CMatrix, lambdas: &[Complex64]) -> Result<CMatrix> {
    let m = a.nrows();
    let mut out = CMatrix::zeros(m, m);
    for (k, &lam) in lambdas.iter().enumerate() {
        let shifted = a - CMatrix::identity(m, m) * lam;
        let svd = shifted.svd(false, true);
        let v_t = svd.v_t.ok_or(Error::Singular("singular value decomposition"))?;
        let (imin, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc });
        for r in 0..m {
            out[(r, k)] = v_t[(imin, r)].conj();
        }
    }
    Ok(out)
}

/// `P_k(X) = Tr(X^k) / k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InvariantPolynomial {
    degree: u32,
}

impl InvariantPolynomial {
    pub fn new(degree: u32) -> Result<Self> {
        if degree < 2 {
            return Err(Error::InvalidArgument(format!(
                "invariant polynomial degree must be >= 2, got {degree}"
            )));
        }
        Ok(Self { degree })
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn eval(&self, x: &CMatrix) -> Complex64 {
        matrix_power(x, self.degree).trace() / self.degree as f64
    }

    /// `X^{k-1} - Tr(X^{k-1})/m * Id`, the traceless gradient with respect to
    /// the trace pairing.
    pub fn grad(&self, x: &CMatrix) -> CMatrix {
        let m = x.nrows();
        let mut g = matrix_power(x, self.degree - 1);
        let shift = g.trace() / m as f64;
        for k in 0..m {
            g[(k, k)] -= shift;
        }
        g
    }
}

pub fn matrix_power(x: &CMatrix, k: u32) -> CMatrix {
    let mut out = CMatrix::identity(x.nrows(), x.ncols());
    for _ in 0..k {
        out = &out * x;
    }
    out
}

/// Coefficients `c_1..c_m` of `det(lambda - A) = lambda^m + c_1 lambda^{m-1} + ... + c_m`
/// via the Faddeev-LeVerrier recursion.
pub fn char_poly(a: &CMatrix) -> Vec<Complex64> {
    let n = a.nrows();
    let mut coeffs = Vec::with_capacity(n);
    let mut mk = CMatrix::zeros(n, n);
    let mut c_prev = Complex64::new(1.0, 0.0);
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{k-1} I
        mk = a * &mk;
        for d in 0..n {
            mk[(d, d)] += c_prev;
        }
        let c = -(a * &mk).trace() / k as f64;
        coeffs.push(c);
        c_prev = c;
    }
    coeffs
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn sl2_basis() {
        let b = LieBasis::sl(2).unwrap();
        assert_eq!(b.rank(), 1);
        assert_eq!(b.roots().len(), 2);
        assert_eq!(b.cartan()[0][(0, 0)], c(1.0, 0.0));
        assert_eq!(b.cartan()[0][(1, 1)], c(-1.0, 0.0));
        let k12 = b.root_index(0, 1).unwrap();
        assert_eq!(b.roots()[k12].coeffs, vec![2]);
        assert_eq!(b.roots()[b.negative_root(k12)].coeffs, vec![-2]);
        let h = &b.cartan()[0];
        let e = &b.root_generators()[k12];
        assert_eq!(commutator(h, e), e * c(2.0, 0.0));
    }

    #[test]
    fn sl3_counts_and_root_property() {
        let b = LieBasis::sl(3).unwrap();
        assert_eq!(b.rank(), 2);
        assert_eq!(b.roots().len(), 6);
        for (r, e) in b.roots().iter().zip(b.root_generators()) {
            for (mu, h) in b.cartan().iter().enumerate() {
                assert_eq!(trace_pairing(h, e).unwrap(), c(0.0, 0.0));
                assert_eq!(commutator(h, e), e * c(r.coeffs[mu] as f64, 0.0));
            }
        }
        let g = b.gram();
        assert_eq!(g, &g.transpose());
        assert_eq!(g[(0, 0)], 2.0);
        assert_eq!(g[(0, 1)], -1.0);
    }

    #[test]
    fn rejects_small_m() {
        assert!(matches!(LieBasis::sl(1), Err(Error::InvalidDimension(_))));
        assert!(matches!(LieBasis::sl(0), Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn pairing_examples() {
        let b = LieBasis::sl(2).unwrap();
        let h = &b.cartan()[0];
        let e12 = &b.root_generators()[b.root_index(0, 1).unwrap()];
        let e21 = &b.root_generators()[b.root_index(1, 0).unwrap()];
        assert_eq!(trace_pairing(h, h).unwrap(), c(2.0, 0.0));
        assert_eq!(trace_pairing(e12, e12).unwrap(), c(0.0, 0.0));
        assert_eq!(trace_pairing(e12, e21).unwrap(), c(1.0, 0.0));
        let big = CMatrix::zeros(3, 3);
        assert!(matches!(
            trace_pairing(h, &big),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn decompose_basis_elements() {
        let b = LieBasis::sl(3).unwrap();
        let d = b.decompose(&b.cartan()[0]).unwrap();
        assert!((d.cartan[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!(d.cartan[1].norm() < 1e-15);
        assert!(d.roots.iter().all(|x| x.norm() == 0.0));

        let k = b.root_index(0, 1).unwrap();
        let d = b.decompose(&b.root_generators()[k]).unwrap();
        assert!(d.cartan.iter().all(|x| x.norm() < 1e-15));
        for (idx, x) in d.roots.iter().enumerate() {
            let expected = if idx == k { 1.0 } else { 0.0 };
            assert_eq!(*x, c(expected, 0.0));
        }
    }

    #[test]
    fn decompose_rejects_trace() {
        let b = LieBasis::sl(2).unwrap();
        let id = CMatrix::identity(2, 2);
        assert!(matches!(b.decompose(&id), Err(Error::NotTraceless { .. })));
        assert!(AlgebraElement::new(id).is_err());
    }

    #[test]
    fn exponential_of_diagonal() {
        let a = c(0.7, -0.3);
        let x = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![a, -a]));
        let e = expm(&x).unwrap();
        assert!((e[(0, 0)] - a.exp()).norm() < 1e-14);
        assert!((e[(1, 1)] - (-a).exp()).norm() < 1e-14);
        assert!(e[(0, 1)].norm() < 1e-15);
        assert_eq!(expm(&CMatrix::zeros(3, 3)).unwrap(), CMatrix::identity(3, 3));
    }

    #[test]
    fn exponential_rejects_nan() {
        let mut x = CMatrix::zeros(2, 2);
        x[(0, 1)] = c(f64::NAN, 0.0);
        assert!(matches!(expm(&x), Err(Error::NonFinite(_))));
    }

    #[test]
    fn invariant_polynomial_examples() {
        let b = LieBasis::sl(2).unwrap();
        let p2 = InvariantPolynomial::new(2).unwrap();
        assert_eq!(p2.eval(&b.cartan()[0]), c(1.0, 0.0));
        let e12 = &b.root_generators()[b.root_index(0, 1).unwrap()];
        assert_eq!(p2.eval(e12), c(0.0, 0.0));

        let p3 = InvariantPolynomial::new(3).unwrap();
        let x = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(1.0, 0.0),
            c(1.0, 0.0),
            c(-2.0, 0.0),
        ]));
        assert!((p3.eval(&x) - c(-2.0, 0.0)).norm() < 1e-15);
        assert!(InvariantPolynomial::new(1).is_err());
    }

    #[test]
    fn quadratic_gradient_is_identity_map() {
        let b = LieBasis::sl(3).unwrap();
        let x = b.compose(&Decomposition {
            cartan: vec![c(0.3, 0.1), c(-1.2, 0.4)],
            roots: (0..6).map(|k| c(k as f64 * 0.1, 1.0 - k as f64 * 0.2)).collect(),
        });
        let g = InvariantPolynomial::new(2).unwrap().grad(&x);
        assert!(frobenius(&(g - &x)) < 1e-14);
    }

    #[test]
    fn char_poly_of_diagonal() {
        let x = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(1.0, 0.0),
            c(2.0, 0.0),
            c(-3.0, 0.0),
        ]));
        // (l-1)(l-2)(l+3) = l^3 - 7 l + 6
        let cp = char_poly(&x);
        assert!((cp[0]).norm() < 1e-14);
        assert!((cp[1] - c(-7.0, 0.0)).norm() < 1e-14);
        assert!((cp[2] - c(6.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn eigen_helpers() {
        let a = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(0.0, 0.0), c(-3.0, 0.0)]);
        let mut ev = eigenvalues(&a).unwrap();
        ev.sort_by(|x, y| x.re.partial_cmp(&y.re).unwrap());
        assert!((ev[0] - c(-3.0, 0.0)).norm() < 1e-12);
        let v = eigenbasis(&a, &ev).unwrap();
        let d = inverse(&v).unwrap() * &a * &v;
        assert!((d[(0, 0)] - ev[0]).norm() < 1e-12 && d[(0, 1)].norm() < 1e-12);
    }
}
