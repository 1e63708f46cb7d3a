//! Weierstrass functions for the lattice `Z + tau Z` (half-periods `1/2` and
//! `tau/2`).
//!
//! The primary evaluator goes through the Jacobi theta function `theta_1`
//! with nome `q = exp(i pi tau)`:
//!
//! ```text
//! sigma(z) = exp(eta1 z^2) theta_1(pi z) / (pi theta_1'(0))
//! zeta(z)  = 2 eta1 z + pi theta_1'(pi z) / theta_1(pi z)
//! wp(z)    = -zeta'(z)
//! ```
//!
//! Arguments are first reduced to the period cell centred at the origin and
//! the quasi-periodicity laws are applied to the result. The independent
//! lattice-sum evaluator lives in [`lattice`].

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Absolute distance to a lattice point below which `wp`/`zeta` are refused.
pub const POLE_TOL: f64 = 1e-10;

const MAX_TERMS: usize = 200;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Lattice data for `C / (Z + tau Z)`.
#[derive(Debug, Clone)]
pub struct EllipticCache {
    tau: Complex64,
    nome: Complex64,
    /// `q^{(n+1/2)^2}` for the retained terms.
    weights: Vec<Complex64>,
    theta1_prime0: Complex64,
    eta1: Complex64,
    eta2: Complex64,
}

/// `(wp, zeta, sigma)` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weierstrass {
    pub wp: Complex64,
    pub zeta: Complex64,
    pub sigma: Complex64,
}

/// Value and logarithmic derivatives of a sigma-quotient kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernel {
    pub value: Complex64,
    pub dlog_du: Complex64,
    pub dlog_dz: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Period {
    /// `2 omega_1 = 1`
    One,
    /// `2 omega_2 = tau`
    Tau,
}

/// `z = z0 + a + b tau` with `z0` in the cell centred at 0.
#[derive(Debug, Clone, Copy)]
struct Reduced {
    z0: Complex64,
    a: i64,
    b: i64,
}

struct ThetaDerivs {
    t0: Complex64,
    t1: Complex64,
    t2: Complex64,
}

impl EllipticCache {
    pub fn new(tau: Complex64) -> Result<Self> {
        if !(tau.im > 0.0) || !tau.re.is_finite() || !tau.im.is_finite() {
            return Err(Error::InvalidTau(tau));
        }
        let nome = (c(0.0, PI) * tau).exp();
        // Term n of theta_1 on the closed cell is bounded by
        // exp(-pi Im(tau) (n^2 - 1/4)) (2n+1)^3.
        let mut weights = Vec::new();
        for n in 0..MAX_TERMS {
            let k = n as f64 + 0.5;
            weights.push((c(0.0, PI) * tau * (k * k)).exp());
            let bound = -PI * tau.im * ((n * n) as f64 - 0.25) + 3.0 * ((2 * n + 1) as f64).ln();
            if n >= 2 && bound < -40.0 {
                break;
            }
        }
        let mut cache = Self {
            tau,
            nome,
            weights,
            theta1_prime0: c(0.0, 0.0),
            eta1: c(0.0, 0.0),
            eta2: c(0.0, 0.0),
        };
        let mut d1 = c(0.0, 0.0);
        let mut d3 = c(0.0, 0.0);
        for (n, w) in cache.weights.iter().enumerate() {
            let s = if n % 2 == 0 { 1.0 } else { -1.0 };
            let k = (2 * n + 1) as f64;
            d1 += w * (2.0 * s * k);
            d3 += w * (-2.0 * s * k * k * k);
        }
        cache.theta1_prime0 = d1;
        cache.eta1 = -(PI * PI) * d3 / (6.0 * d1);
        // eta2 = zeta(tau/2), evaluated straight from the series so that the
        // Legendre relation is a genuine check rather than a definition.
        let half_tau = tau / 2.0;
        let th = cache.theta(PI * half_tau);
        cache.eta2 = 2.0 * cache.eta1 * half_tau + PI * th.t1 / th.t0;
        Ok(cache)
    }

    pub fn tau(&self) -> Complex64 {
        self.tau
    }

    pub fn nome(&self) -> Complex64 {
        self.nome
    }

    /// Number of theta-series terms retained.
    pub fn truncation(&self) -> usize {
        self.weights.len()
    }

    /// `eta_1 = zeta(1/2)`.
    pub fn eta1(&self) -> Complex64 {
        self.eta1
    }

    /// `eta_2 = zeta(tau/2)`.
    pub fn eta2(&self) -> Complex64 {
        self.eta2
    }

    pub fn half_period(&self, l: Period) -> Complex64 {
        match l {
            Period::One => c(0.5, 0.0),
            Period::Tau => self.tau / 2.0,
        }
    }

    pub fn quasi_period(&self, l: Period) -> Complex64 {
        match l {
            Period::One => self.eta1,
            Period::Tau => self.eta2,
        }
    }

    /// `|tau eta1 - eta2 - pi i|`.
    pub fn legendre_residual(&self) -> f64 {
        (self.tau * self.eta1 - self.eta2 - c(0.0, PI)).norm()
    }

    fn theta(&self, v: Complex64) -> ThetaDerivs {
        let mut t0 = c(0.0, 0.0);
        let mut t1 = c(0.0, 0.0);
        let mut t2 = c(0.0, 0.0);
        for (n, w) in self.weights.iter().enumerate() {
            let s = if n % 2 == 0 { 2.0 } else { -2.0 };
            let k = (2 * n + 1) as f64;
            let arg = v * k;
            let (sn, cs) = (arg.sin(), arg.cos());
            t0 += w * sn * s;
            t1 += w * cs * (s * k);
            t2 -= w * sn * (s * k * k);
        }
        ThetaDerivs { t0, t1, t2 }
    }

    fn reduce(&self, z: Complex64) -> Reduced {
        let b = (z.im / self.tau.im).round();
        let w = z - self.tau * b;
        let a = w.re.round();
        Reduced {
            z0: w - a,
            a: a as i64,
            b: b as i64,
        }
    }

    /// Distance from `z` to the nearest lattice point.
    pub fn lattice_distance(&self, z: Complex64) -> f64 {
        let r = self.reduce(z);
        let mut best = f64::INFINITY;
        for a in -1..=1 {
            for b in -1..=1 {
                let d = (r.z0 - (a as f64) - self.tau * (b as f64)).norm();
                best = best.min(d);
            }
        }
        best
    }

    /// Series evaluation without argument reduction. Valid for every `z` but
    /// only accurate near the period cell.
    pub fn eval_unreduced(&self, z: Complex64) -> Result<Weierstrass> {
        let th = self.theta(PI * z);
        let sigma = (self.eta1 * z * z).exp() * th.t0 / (PI * self.theta1_prime0);
        let dist = self.lattice_distance(z);
        if dist < POLE_TOL || th.t0 == c(0.0, 0.0) {
            return Err(Error::Pole {
                z,
                distance: dist,
                sigma: Some(sigma),
            });
        }
        let ratio = th.t1 / th.t0;
        let zeta = 2.0 * self.eta1 * z + PI * ratio;
        let wp = -2.0 * self.eta1 - PI * PI * (th.t2 / th.t0 - ratio * ratio);
        Ok(Weierstrass { wp, zeta, sigma })
    }

    /// `(wp, zeta, sigma)` at `z`. Near a lattice point the error carries
    /// the (finite) value of sigma.
    pub fn eval(&self, z: Complex64) -> Result<Weierstrass> {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::NonFinite("Weierstrass argument"));
        }
        let r = self.reduce(z);
        let shift = self.eta1 * (2 * r.a) as f64 + self.eta2 * (2 * r.b) as f64;
        let half = (c(r.a as f64, 0.0) + self.tau * r.b as f64) / 2.0;
        let sign = if (r.a + r.b + r.a * r.b).rem_euclid(2) == 0 {
            1.0
        } else {
            -1.0
        };
        let factor = (shift * (r.z0 + half)).exp() * sign;
        match self.eval_unreduced(r.z0) {
            Ok(w) => Ok(Weierstrass {
                wp: w.wp,
                zeta: w.zeta + shift,
                sigma: w.sigma * factor,
            }),
            Err(Error::Pole {
                distance, sigma, ..
            }) => Err(Error::Pole {
                z,
                distance,
                sigma: sigma.map(|s| s * factor),
            }),
            Err(e) => Err(e),
        }
    }

    pub fn sigma(&self, z: Complex64) -> Complex64 {
        match self.eval(z) {
            Ok(w) => w.sigma,
            Err(Error::Pole {
                sigma: Some(sigma), ..
            }) => sigma,
            Err(_) => c(f64::NAN, f64::NAN),
        }
    }

    pub fn zeta(&self, z: Complex64) -> Result<Complex64> {
        self.eval(z).map(|w| w.zeta)
    }

    pub fn wp(&self, z: Complex64) -> Result<Complex64> {
        self.eval(z).map(|w| w.wp)
    }

    /// Residual of the quasi-periodicity laws across the period `2 omega_l`:
    /// the larger of `|sigma(z + 2w) + sigma(z) exp(2 eta (z + w))| / |sigma(z)|`
    /// and `|zeta(z + 2w) - zeta(z) - 2 eta|`.
    ///
    /// Both sides use the unreduced series so the reduction step cannot make
    /// the identity hold by construction.
    pub fn quasi_periodicity_residual(&self, z: Complex64, l: Period) -> Result<f64> {
        let w = self.half_period(l);
        let eta = self.quasi_period(l);
        let left = self.eval_unreduced(z)?;
        let right = self.eval_unreduced(z + 2.0 * w)?;
        let sig = (right.sigma + left.sigma * (2.0 * eta * (z + w)).exp()).norm() / left.sigma.norm();
        let zet = (right.zeta - left.zeta - 2.0 * eta).norm();
        Ok(sig.max(zet))
    }

    fn ensure_off_lattice(&self, z: Complex64) -> Result<()> {
        let d = self.lattice_distance(z);
        if d < POLE_TOL {
            return Err(Error::Pole {
                z,
                distance: d,
                sigma: Some(self.sigma(z)),
            });
        }
        Ok(())
    }

    /// `sigma(u + z - pole) / (sigma(u) sigma(z - pole)) * exp(-u zeta(z))`
    /// with its logarithmic derivatives in `u` and `z`.
    pub fn kernel_phi(&self, u: Complex64, z: Complex64, pole: Complex64) -> Result<Kernel> {
        self.ensure_off_lattice(u)?;
        self.ensure_off_lattice(z - pole)?;
        let wu = self.eval(u)?;
        let wz = self.eval(z)?;
        let wzp = self.eval(z - pole)?;
        let wsum = self.eval(u + z - pole)?;
        let value = wsum.sigma / (wu.sigma * wzp.sigma) * (-u * wz.zeta).exp();
        Ok(Kernel {
            value,
            dlog_du: wsum.zeta - wu.zeta - wz.zeta,
            dlog_dz: wsum.zeta - wzp.zeta + u * wz.wp,
        })
    }

    /// The kernel used for root components of the elliptic Lax matrix:
    /// `kernel_phi * exp(u zeta(pole))`, normalised so that its residue at
    /// `z = pole` is exactly 1.
    pub fn lax_kernel(&self, u: Complex64, z: Complex64, pole: Complex64) -> Result<Kernel> {
        let k = self.kernel_phi(u, z, pole)?;
        let zp = self.zeta(pole)?;
        Ok(Kernel {
            value: k.value * (u * zp).exp(),
            dlog_du: k.dlog_du + zp,
            dlog_dz: k.dlog_dz,
        })
    }
}

/// Independent evaluation by lattice sums, summing each row `m + n tau`
/// (fixed `n`) in closed form and the rows symmetrically in `n`.
///
/// ```text
/// wp(z)    = sum_n pi^2 / sin^2(pi (z - n tau)) - G2
/// zeta(z)  = sum_n pi cot(pi (z - n tau)) + G2 z
/// sigma(z) = sin(pi z)/pi exp(pi^2 z^2 / 6) prod_{n != 0} R_n(z)
/// R_n(z)   = sin(pi (n tau - z)) / sin(pi n tau)
///            * exp(pi z cot(pi n tau) + pi^2 z^2 / (2 sin^2(pi n tau)))
/// G2       = pi^2/3 + sum_{n != 0} pi^2 / sin^2(pi n tau)
/// ```
///
/// Rows are added until the next pair is below `1e-18` relative; the tail is
/// geometric with ratio `|q|^2`. Intended for arguments near the period cell.
pub mod lattice {
    use super::*;

    #[derive(Debug, Clone)]
    pub struct LatticeSums {
        tau: Complex64,
        g2: Complex64,
    }

    const MAX_ROWS: i64 = 400;

    impl LatticeSums {
        pub fn new(tau: Complex64) -> Result<Self> {
            if !(tau.im > 0.0) {
                return Err(Error::InvalidTau(tau));
            }
            let mut g2 = c(PI * PI / 3.0, 0.0);
            for n in 1..MAX_ROWS {
                let s = (PI * tau * n as f64).sin();
                let t = 2.0 * PI * PI / (s * s);
                g2 += t;
                if t.norm() < 1e-18 * g2.norm() {
                    break;
                }
            }
            Ok(Self { tau, g2 })
        }

        pub fn eta1(&self) -> Complex64 {
            self.g2 / 2.0
        }

        pub fn g2(&self) -> Complex64 {
            self.g2
        }

        pub fn wp(&self, z: Complex64) -> Complex64 {
            let mut acc = {
                let s = (PI * z).sin();
                PI * PI / (s * s)
            };
            for n in 1..MAX_ROWS {
                let sp = (PI * (z - self.tau * n as f64)).sin();
                let sm = (PI * (z + self.tau * n as f64)).sin();
                let t = PI * PI / (sp * sp) + PI * PI / (sm * sm);
                acc += t;
                if t.norm() < 1e-18 * acc.norm().max(1.0) {
                    break;
                }
            }
            acc - self.g2
        }

        pub fn zeta(&self, z: Complex64) -> Complex64 {
            let cot = |x: Complex64| x.cos() / x.sin();
            let mut acc = PI * cot(PI * z);
            for n in 1..MAX_ROWS {
                let t = PI * (cot(PI * (z - self.tau * n as f64)) + cot(PI * (z + self.tau * n as f64)));
                acc += t;
                if t.norm() < 1e-18 * acc.norm().max(1.0) {
                    break;
                }
            }
            acc + self.g2 * z
        }

        pub fn sigma(&self, z: Complex64) -> Complex64 {
            let mut acc = (PI * z).sin() / PI * (PI * PI * z * z / 6.0).exp();
            for n in 1..MAX_ROWS {
                let mut pair = c(1.0, 0.0);
                for w in [self.tau * n as f64, -self.tau * n as f64] {
                    let s = (PI * w).sin();
                    let cot = (PI * w).cos() / s;
                    pair *= (PI * (w - z)).sin() / s
                        * (PI * z * cot + PI * PI * z * z / (2.0 * s * s)).exp();
                }
                acc *= pair;
                if (pair - 1.0).norm() < 1e-18 {
                    break;
                }
            }
            acc
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cache(tau: Complex64) -> EllipticCache {
        EllipticCache::new(tau).unwrap()
    }

    #[test]
    fn rejects_lower_half_plane() {
        assert!(matches!(EllipticCache::new(c(0.1, 0.0)), Err(Error::InvalidTau(_))));
        assert!(matches!(EllipticCache::new(c(0.0, -1.0)), Err(Error::InvalidTau(_))));
    }

    #[test]
    fn square_lattice_quasi_periods() {
        let e = cache(c(0.0, 1.0));
        // oracle: Eisenstein-summed G2 / 2
        let oracle = lattice::LatticeSums::new(c(0.0, 1.0)).unwrap().eta1();
        assert!((e.eta1() - oracle).norm() < 1e-12);
        assert!(e.eta1().im.abs() < 1e-14);
        assert!((e.eta1().re - PI / 2.0).abs() < 1e-12);
        assert!((e.eta2() + c(0.0, 1.0) * e.eta1()).norm() < 1e-12);
    }

    #[test]
    fn legendre_relation() {
        let e = cache(c(0.0, 1.5));
        assert!(e.legendre_residual() < 1e-10);
        let e = cache(c(0.37, 0.8));
        assert!(e.legendre_residual() < 1e-10);
    }

    #[test]
    fn small_argument_normalisation() {
        let e = cache(c(0.2, 1.1));
        let z = c(1e-4, 0.0);
        let w = e.eval(z).unwrap();
        assert!((w.zeta - 1.0 / z).norm() < 1e-6);
        assert!((w.sigma / z - 1.0).norm() < 1e-6);
    }

    #[test]
    fn parity() {
        let e = cache(c(-0.1, 0.9));
        for z in [c(0.31, 0.17), c(-0.42, 0.3), c(1.7, -2.2)] {
            let a = e.eval(z).unwrap();
            let b = e.eval(-z).unwrap();
            assert!((a.zeta + b.zeta).norm() < 1e-10 * a.zeta.norm().max(1.0));
            assert!((a.sigma + b.sigma).norm() < 1e-10 * a.sigma.norm().max(1.0));
            assert!((a.wp - b.wp).norm() < 1e-10 * a.wp.norm().max(1.0));
        }
    }

    #[test]
    fn agrees_with_lattice_sums() {
        let tau = c(0.0, 1.2);
        let e = cache(tau);
        let l = lattice::LatticeSums::new(tau).unwrap();
        let z = c(0.3, 0.1);
        let w = e.eval(z).unwrap();
        assert!((w.wp - l.wp(z)).norm() < 1e-10 * w.wp.norm().max(1.0));
        assert!((w.zeta - l.zeta(z)).norm() < 1e-10 * w.zeta.norm().max(1.0));
        assert!((w.sigma - l.sigma(z)).norm() < 1e-10 * w.sigma.norm().max(1.0));
    }

    #[test]
    fn reduction_matches_direct_series() {
        let e = cache(c(0.25, 1.0));
        let z0 = c(0.21, -0.13);
        for (a, b) in [(1, 0), (0, 1), (-1, 1), (2, -1)] {
            let z = z0 + a as f64 + e.tau() * b as f64;
            let reduced = e.eval(z).unwrap();
            let direct = e.eval_unreduced(z).unwrap();
            assert!((reduced.sigma - direct.sigma).norm() < 1e-10 * direct.sigma.norm());
            assert!((reduced.zeta - direct.zeta).norm() < 1e-10 * direct.zeta.norm().max(1.0));
            assert!((reduced.wp - e.eval(z0).unwrap().wp).norm() < 1e-10);
        }
    }

    #[test]
    fn quasi_periodicity() {
        let e = cache(c(0.1, 1.3));
        for z in [c(0.13, 0.22), c(-0.3, -0.4)] {
            assert!(e.quasi_periodicity_residual(z, Period::One).unwrap() < 1e-9);
            assert!(e.quasi_periodicity_residual(z, Period::Tau).unwrap() < 1e-9);
        }
    }

    #[test]
    fn pole_reports_sigma() {
        let e = cache(c(0.0, 1.0));
        match e.eval(c(1.0, 1.0)) {
            Err(Error::Pole { sigma, .. }) => assert!(sigma.unwrap().norm() < 1e-12),
            other => panic!("expected pole, got {other:?}"),
        }
        assert!(e.zeta(c(0.0, 0.0)).is_err());
        assert_eq!(e.sigma(c(0.0, 0.0)), c(0.0, 0.0));
    }

    #[test]
    fn lax_kernel_has_unit_residue() {
        let e = cache(c(0.0, 1.1));
        let (u, pole) = (c(0.23, 0.05), c(0.31, 0.27));
        let eps = 1e-5;
        let k = e.lax_kernel(u, pole + eps, pole).unwrap();
        assert!((k.value * eps - 1.0).norm() < 1e-4);
        let raw = e.kernel_phi(u, pole + eps, pole).unwrap();
        let expected = (-u * e.zeta(pole).unwrap()).exp();
        assert!((raw.value * eps - expected).norm() < 1e-4);
    }
}
