//! Multi-time Hamiltonian systems on `T*R^m` with a linear group action
//! `q -> X_a q`: Noether moments, gauged flows, closure of the Hamiltonians
//! and flatness of the gauge field.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

type Vector = DVector<f64>;

/// `H(p, q)` with its analytic gradient `(dH/dp, dH/dq)`.
pub struct ToyHamiltonian {
    pub value: Box<dyn Fn(&Vector, &Vector) -> f64 + Send + Sync>,
    pub grad: Box<dyn Fn(&Vector, &Vector) -> (Vector, Vector) + Send + Sync>,
}

pub struct ToySystem {
    pub m: usize,
    pub hamiltonians: Vec<ToyHamiltonian>,
    pub generators: Vec<DMatrix<f64>>,
    /// `f[a][b][c] = f_ab^c`.
    pub structure: Vec<Vec<Vec<f64>>>,
}

/// Gauge field components `A^a_i(t)`, returned as `[i][a]`.
pub trait GaugeField {
    fn components(&self, t: &[f64]) -> Vec<Vec<f64>>;
}

impl<F> GaugeField for F
where
    F: Fn(&[f64]) -> Vec<Vec<f64>>,
{
    fn components(&self, t: &[f64]) -> Vec<Vec<f64>> {
        self(t)
    }
}

/// `||[X_a, X_b] - f_ab^c X_c||`, maximised over pairs.
pub fn structure_residual(gens: &[DMatrix<f64>], f: &[Vec<Vec<f64>>]) -> f64 {
    let mut worst: f64 = 0.0;
    for a in 0..gens.len() {
        for b in 0..gens.len() {
            let mut r = &gens[a] * &gens[b] - &gens[b] * &gens[a];
            for (c, g) in gens.iter().enumerate() {
                r -= g * f[a][b][c];
            }
            worst = worst.max(r.norm());
        }
    }
    worst
}

impl ToySystem {
    pub fn n(&self) -> usize {
        self.hamiltonians.len()
    }

    pub fn algebra_dim(&self) -> usize {
        self.generators.len()
    }

    pub fn closure_residual(&self) -> f64 {
        structure_residual(&self.generators, &self.structure)
    }

    fn check(&self, p: &Vector, q: &Vector) -> Result<()> {
        for v in [p, q] {
            if v.len() != self.m {
                return Err(Error::DimensionMismatch { expected: self.m, got: v.len() });
            }
        }
        Ok(())
    }

    /// Derivative of `H_i` along the lifted generator `X_a` at `(p, q)`,
    /// by central differences of the group action.
    pub fn invariance_residual(&self, p: &Vector, q: &Vector, i: usize, a: usize) -> Result<f64> {
        self.check(p, q)?;
        let h = &self.hamiltonians[i];
        let x = &self.generators[a];
        let eps = 1e-5;
        let at = |s: f64| {
            let g = (x * s).exp();
            let gp = (x.transpose() * -s).exp();
            (h.value)(&(gp * p), &(g * q))
        };
        Ok(((at(eps) - at(-eps)) / (2.0 * eps)).abs())
    }

    /// Canonical bracket matrix `{H_i, H_j}` from the analytic gradients.
    pub fn bracket_matrix(&self, p: &Vector, q: &Vector) -> Result<DMatrix<f64>> {
        self.check(p, q)?;
        let grads: Vec<(Vector, Vector)> = self.hamiltonians.iter().map(|h| (h.grad)(p, q)).collect();
        let n = self.n();
        Ok(DMatrix::from_fn(n, n, |i, j| {
            grads[i].1.dot(&grads[j].0) - grads[i].0.dot(&grads[j].1)
        }))
    }

    /// Same bracket with gradients from central differences of the values.
    pub fn bracket_matrix_fd(&self, p: &Vector, q: &Vector, eps: f64) -> Result<DMatrix<f64>> {
        self.check(p, q)?;
        let grads: Vec<(Vector, Vector)> = self
            .hamiltonians
            .iter()
            .map(|h| {
                let dp = Vector::from_fn(self.m, |k, _| {
                    let mut a = p.clone();
                    let mut b = p.clone();
                    a[k] += eps;
                    b[k] -= eps;
                    ((h.value)(&a, q) - (h.value)(&b, q)) / (2.0 * eps)
                });
                let dq = Vector::from_fn(self.m, |k, _| {
                    let mut a = q.clone();
                    let mut b = q.clone();
                    a[k] += eps;
                    b[k] -= eps;
                    ((h.value)(p, &a) - (h.value)(p, &b)) / (2.0 * eps)
                });
                (dp, dq)
            })
            .collect();
        let n = self.n();
        Ok(DMatrix::from_fn(n, n, |i, j| {
            grads[i].1.dot(&grads[j].0) - grads[i].0.dot(&grads[j].1)
        }))
    }
}

/// `mu_a = -p^T X_a q`.
pub fn noether_moment(sys: &ToySystem, p: &Vector, q: &Vector) -> Result<Vec<f64>> {
    sys.check(p, q)?;
    Ok(sys.generators.iter().map(|x| -p.dot(&(x * q))).collect())
}

/// Gauged flow directions `(dq/dt^i, dp/dt^i)` for every `i`.
pub fn gauged_rhs(
    sys: &ToySystem,
    p: &Vector,
    q: &Vector,
    t: &[f64],
    gauge: &dyn GaugeField,
) -> Result<Vec<(Vector, Vector)>> {
    sys.check(p, q)?;
    let a = gauge.components(t);
    if a.len() != sys.n() {
        return Err(Error::DimensionMismatch { expected: sys.n(), got: a.len() });
    }
    let mut out = Vec::with_capacity(sys.n());
    for (h, ai) in sys.hamiltonians.iter().zip(&a) {
        if ai.len() != sys.algebra_dim() {
            return Err(Error::DimensionMismatch {
                expected: sys.algebra_dim(),
                got: ai.len(),
            });
        }
        let (hp, hq) = (h.grad)(p, q);
        let mut dq = hp;
        let mut dp = -hq;
        for (x, &c) in sys.generators.iter().zip(ai) {
            dq += x * q * c;
            dp -= x.transpose() * p * c;
        }
        out.push((dq, dp));
    }
    Ok(out)
}

/// Zero gauge field for `n` flows and a `dim`-dimensional algebra.
pub fn zero_gauge(n: usize, dim: usize) -> impl Fn(&[f64]) -> Vec<Vec<f64>> {
    move |_| vec![vec![0.0; dim]; n]
}

/// Curvature `F^a_ij = d_i A^a_j - d_j A^a_i + f_bc^a A^b_i A^c_j` by central
/// differences with step `1e-5`, returned as `[a][i][j]`.
pub fn check_flatness(gauge: &dyn GaugeField, t: &[f64], f: &[Vec<Vec<f64>>]) -> Vec<Vec<Vec<f64>>> {
    let eps = 1e-5;
    let n = t.len();
    let a0 = gauge.components(t);
    let dim = f.len();
    let deriv: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|k| {
            let mut tp = t.to_vec();
            let mut tm = t.to_vec();
            tp[k] += eps;
            tm[k] -= eps;
            let (ap, am) = (gauge.components(&tp), gauge.components(&tm));
            // deriv[k][j][a] = d_k A^a_j
            (0..n)
                .map(|j| (0..dim).map(|a| (ap[j][a] - am[j][a]) / (2.0 * eps)).collect())
                .collect()
        })
        .collect();
    (0..dim)
        .map(|a| {
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            let mut v = deriv[i][j][a] - deriv[j][i][a];
                            for b in 0..dim {
                                for c in 0..dim {
                                    v += f[b][c][a] * a0[i][b] * a0[j][c];
                                }
                            }
                            v
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// Absolute bracket matrix `|{H_i, H_j}|`.
pub fn check_closure(sys: &ToySystem, p: &Vector, q: &Vector) -> Result<DMatrix<f64>> {
    Ok(sys.bracket_matrix(p, q)?.map(f64::abs))
}

/// Classical RK4 along flow `i` (gauged by `gauge`) for time `duration`
/// with `ceil(duration / h)` steps starting at multi-time `t0`. Returns the
/// final point and the largest deviation of the moment from its start.
pub fn integrate(
    sys: &ToySystem,
    p: &Vector,
    q: &Vector,
    i: usize,
    t0: &[f64],
    duration: f64,
    h: f64,
    gauge: &dyn GaugeField,
) -> Result<(Vector, Vector, f64)> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {h}")));
    }
    if i >= sys.n() {
        return Err(Error::IndexOutOfRange { index: i, len: sys.n() });
    }
    let steps = (duration.abs() / h).ceil().max(1.0) as usize;
    let dt = duration / steps as f64;
    let mu0 = noether_moment(sys, p, q)?;
    let (mut p, mut q) = (p.clone(), q.clone());
    let mut t = t0.to_vec();
    let mut drift: f64 = 0.0;
    let rhs = |p: &Vector, q: &Vector, t: &[f64]| -> Result<(Vector, Vector)> {
        Ok(gauged_rhs(sys, p, q, t, gauge)?.swap_remove(i))
    };
    let at = |t: &[f64], s: f64| {
        let mut u = t.to_vec();
        u[i] += s;
        u
    };
    for _ in 0..steps {
        let (k1q, k1p) = rhs(&p, &q, &t)?;
        let (k2q, k2p) = rhs(&(&p + &k1p * (dt / 2.0)), &(&q + &k1q * (dt / 2.0)), &at(&t, dt / 2.0))?;
        let (k3q, k3p) = rhs(&(&p + &k2p * (dt / 2.0)), &(&q + &k2q * (dt / 2.0)), &at(&t, dt / 2.0))?;
        let (k4q, k4p) = rhs(&(&p + &k3p * dt), &(&q + &k3q * dt), &at(&t, dt))?;
        q += (k1q + k2q * 2.0 + k3q * 2.0 + k4q) * (dt / 6.0);
        p += (k1p + k2p * 2.0 + k3p * 2.0 + k4p) * (dt / 6.0);
        t[i] += dt;
        let mu = noether_moment(sys, &p, &q)?;
        for (a, b) in mu.iter().zip(&mu0) {
            drift = drift.max((a - b).abs());
        }
    }
    Ok((p, q, drift))
}

fn potential(s: f64) -> (f64, f64) {
    // V(s) = s^2 / 4 + s / 2, s = |q|^2
    (0.25 * s * s + 0.5 * s, 0.5 * s + 0.5)
}

fn radial_hamiltonian() -> ToyHamiltonian {
    ToyHamiltonian {
        value: Box::new(|p, q| 0.5 * p.norm_squared() + potential(q.norm_squared()).0),
        grad: Box::new(|p, q| (p.clone(), q * (2.0 * potential(q.norm_squared()).1))),
    }
}

/// `m = 2`, rotations: `H_1 = |p|^2/2 + V(|q|^2)`, `H_2 = q_1 p_2 - q_2 p_1`.
pub fn planar_rotation() -> ToySystem {
    let rot = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
    let ang = ToyHamiltonian {
        value: Box::new(|p, q| q[0] * p[1] - q[1] * p[0]),
        grad: Box::new(|_p, q| {
            (Vector::from_vec(vec![-q[1], q[0]]), Vector::from_vec(vec![_p[1], -_p[0]]))
        }),
    };
    ToySystem {
        m: 2,
        hamiltonians: vec![radial_hamiltonian(), ang],
        generators: vec![rot],
        structure: vec![vec![vec![0.0]]],
    }
}

/// so(3) generators `(X_a)_{bc} = -eps_{abc}` with `[X_a, X_b] = eps_{abc} X_c`.
pub fn so3_generators() -> (Vec<DMatrix<f64>>, Vec<Vec<Vec<f64>>>) {
    let eps = |a: usize, b: usize, c: usize| -> f64 {
        match (a, b, c) {
            (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
            (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
            _ => 0.0,
        }
    };
    let gens = (0..3)
        .map(|a| DMatrix::from_fn(3, 3, |b, c| -eps(a, b, c)))
        .collect();
    let f = (0..3)
        .map(|a| (0..3).map(|b| (0..3).map(|c| eps(a, b, c)).collect()).collect())
        .collect();
    (gens, f)
}

/// `m = 3` with the rotation group: `H_1 = |p|^2/2 + V(|q|^2)`,
/// `H_2 = |p|^2 |q|^2 - (p.q)^2` (squared angular momentum).
pub fn spatial_rotation() -> ToySystem {
    let (gens, f) = so3_generators();
    let l2 = ToyHamiltonian {
        value: Box::new(|p, q| p.norm_squared() * q.norm_squared() - p.dot(q).powi(2)),
        grad: Box::new(|p, q| {
            let pq = p.dot(q);
            (
                p * (2.0 * q.norm_squared()) - q * (2.0 * pq),
                q * (2.0 * p.norm_squared()) - p * (2.0 * pq),
            )
        }),
    };
    ToySystem {
        m: 3,
        hamiltonians: vec![radial_hamiltonian(), l2],
        generators: gens,
        structure: f,
    }
}

/// Components of an so(3) matrix in the basis of `so3_generators`.
pub fn so3_components(x: &DMatrix<f64>) -> Vec<f64> {
    vec![x[(2, 1)], x[(0, 2)], x[(1, 0)]]
}

/// Pure gauge `A_i = -(d_i g) g^{-1}` for
/// `g(t) = exp(t_1 X_1) exp(t_1 t_2 X_3) exp(sin(t_2) X_2)`, differentiated
/// analytically factor by factor.
pub fn pure_gauge_so3() -> impl Fn(&[f64]) -> Vec<Vec<f64>> {
    let (gens, _) = so3_generators();
    move |t: &[f64]| {
        let (x1, x2, x3) = (&gens[0], &gens[1], &gens[2]);
        let e1 = (x1 * t[0]).exp();
        let e3 = (x3 * (t[0] * t[1])).exp();
        let e2 = (x2 * t[1].sin()).exp();
        let g = &e1 * &e3 * &e2;
        let ginv = g.transpose();
        let d1 = x1 * &g + &e1 * (x3 * t[1]) * &e3 * &e2;
        let d2 = &e1 * (x3 * t[0]) * &e3 * &e2 + &e1 * &e3 * (x2 * t[1].cos()) * &e2;
        vec![
            so3_components(&(-(d1 * &ginv))),
            so3_components(&(-(d2 * &ginv))),
        ]
    }
}

/// A gauge field with nonzero curvature: `A_1 = (1, 0, 0)`, `A_2 = (0, t_1, 0)`.
pub fn twisted_gauge_so3() -> impl Fn(&[f64]) -> Vec<Vec<f64>> {
    |t: &[f64]| vec![vec![1.0, 0.0, 0.0], vec![0.0, t[0], 0.0]]
}
