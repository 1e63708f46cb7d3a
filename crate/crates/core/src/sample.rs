//! Seeded random models and random states satisfying the residue constraint.
//!
//! Genus 0 with `N >= 3`: the first `N - 2` orbit elements are random, the
//! `(N-1)`-th is a random element conjugated by `exp(sum_j s_j Y_j)` where the
//! `s_j` are fitted by Newton's method so that `S = -sum_{a<N} L_a` has the
//! spectrum of `-Lambda_N`; then `L_N = S`. Genus 1 only constrains the
//! Cartan (diagonal) part of the residue sum, so `L_N` is built directly
//! with a prescribed diagonal and spectrum.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lie::{self, CMatrix};
use crate::model::{GaudinModel, PhaseState};

pub use rand::SeedableRng;

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn unit(rng: &mut SampleRng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// `Id + spread * U` with `U` uniform in the unit box.
pub fn random_group_element(rng: &mut SampleRng, m: usize, spread: f64) -> CMatrix {
    CMatrix::identity(m, m) + CMatrix::from_fn(m, m, |_, _| unit(rng) * spread)
}

pub fn random_matrix(rng: &mut SampleRng, m: usize) -> CMatrix {
    CMatrix::from_fn(m, m, |_, _| unit(rng))
}

pub fn random_traceless(rng: &mut SampleRng, m: usize) -> CMatrix {
    let mut x = random_matrix(rng, m);
    let tr = x.trace() / m as f64;
    for k in 0..m {
        x[(k, k)] -= tr;
    }
    x
}

/// Traceless diagonal matrix with well separated real entries, suitable as
/// a regular semisimple orbit seed.
pub fn random_diagonal_seed(rng: &mut SampleRng, m: usize) -> CMatrix {
    let mut d: Vec<f64> = (0..m).map(|k| k as f64 + rng.gen_range(0.2..0.8)).collect();
    let mean = d.iter().sum::<f64>() / m as f64;
    for x in &mut d {
        *x -= mean;
    }
    CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        m,
        d.into_iter().map(|x| Complex64::new(x, 0.0)),
    ))
}

/// A group point `phi` with `-phi lambda phi^{-1} = target`, randomized
/// within the stabilizer of `lambda`. Requires distinct eigenvalues.
pub fn conjugator(rng: &mut SampleRng, target: &CMatrix, lambda: &CMatrix) -> Result<CMatrix> {
    let m = lambda.nrows();
    let ev = lie::eigenvalues(lambda)?;
    let scale = ev.iter().map(|x| x.norm()).fold(1.0, f64::max);
    for a in 0..m {
        for b in a + 1..m {
            if (ev[a] - ev[b]).norm() < 1e-6 * scale {
                return Err(Error::Constraint(
                    "orbit seed needs distinct eigenvalues to place a prescribed element".into(),
                ));
            }
        }
    }
    let w = lie::eigenbasis(lambda, &ev)?;
    let v = lie::eigenbasis(&(-target), &ev)?;
    let d = CMatrix::from_diagonal(&nalgebra::DVector::from_fn(m, |_, _| {
        Complex64::from_polar(rng.gen_range(0.7..1.4), rng.gen_range(-3.0..3.0))
    }));
    let phi = v * d * lie::inverse(&w)?;
    let resid = lie::frobenius(&(-(&phi * lambda * lie::inverse(&phi)?) - target));
    if !(resid <= 1e-8 * lie::frobenius(target).max(1.0)) {
        return Err(Error::Constraint(format!(
            "target is not on the orbit (residual {resid:e})"
        )));
    }
    Ok(phi)
}

fn orbit_element(phi: &CMatrix, lambda: &CMatrix) -> Result<CMatrix> {
    Ok(-(phi * lambda * lie::inverse(phi)?))
}

fn char_poly_gap(a: &CMatrix, target: &[Complex64]) -> Vec<Complex64> {
    lie::char_poly(a)
        .iter()
        .zip(target)
        .skip(1)
        .map(|(x, y)| x - y)
        .collect()
}

/// Random state of `model` satisfying the residue constraint, with `q`
/// and `p` random in genus 1 and `t = 0`.
pub fn random_state(model: &GaudinModel, rng: &mut SampleRng) -> Result<PhaseState> {
    let mut last = Error::Constraint("no attempt made".into());
    for _ in 0..40 {
        let attempt = match model.genus() {
            0 => rational_attempt(model, rng),
            _ => elliptic_attempt(model, rng),
        };
        match attempt {
            Ok(s) => match model.validate_state(&s, 1e-10) {
                Ok(()) => return Ok(s),
                Err(e) => last = e,
            },
            Err(e) => last = e,
        }
    }
    Err(last)
}

fn rational_attempt(model: &GaudinModel, rng: &mut SampleRng) -> Result<PhaseState> {
    let m = model.m();
    let seeds = model.orbit_seeds();
    let n = seeds.len();
    let t = vec![0.0; model.num_hamiltonians()];
    if n == 1 {
        if lie::frobenius(&seeds[0]) > 1e-12 {
            return Err(Error::Constraint(
                "a single marked point forces a zero orbit seed".into(),
            ));
        }
        return Ok(PhaseState::new(vec![random_group_element(rng, m, 0.5)], vec![], vec![], t));
    }
    let mut phis: Vec<CMatrix> = (0..n - 1).map(|_| random_group_element(rng, m, 0.5)).collect();
    if n >= 3 {
        let target = lie::char_poly(&(-&seeds[n - 1]));
        let mut fixed = CMatrix::zeros(m, m);
        for a in 0..n - 2 {
            fixed -= orbit_element(&phis[a], &seeds[a])?;
        }
        let base = phis[n - 2].clone();
        let gens: Vec<CMatrix> = (0..m - 1).map(|_| random_traceless(rng, m)).collect();
        let lam = &seeds[n - 2];
        let residual = |s: &[Complex64]| -> Result<Vec<Complex64>> {
            let mut y = CMatrix::zeros(m, m);
            for (g, &x) in gens.iter().zip(s) {
                y += g * x;
            }
            let phi = lie::expm(&y)? * &base;
            Ok(char_poly_gap(&(&fixed - orbit_element(&phi, lam)?), &target))
        };
        let scale = target.iter().map(|x| x.norm()).fold(1.0, f64::max);
        let s = newton(&residual, m - 1, scale)?;
        let mut y = CMatrix::zeros(m, m);
        for (g, &x) in gens.iter().zip(&s) {
            y += g * x;
        }
        phis[n - 2] = lie::expm(&y)? * base;
    }
    let mut sum = CMatrix::zeros(m, m);
    for a in 0..n - 1 {
        sum -= orbit_element(&phis[a], &seeds[a])?;
    }
    phis.push(conjugator(rng, &sum, &seeds[n - 1])?);
    Ok(PhaseState::new(phis, vec![], vec![], t))
}

/// Newton iteration on a holomorphic map with a central-difference Jacobian.
fn newton<F>(f: &F, dim: usize, scale: f64) -> Result<Vec<Complex64>>
where
    F: Fn(&[Complex64]) -> Result<Vec<Complex64>>,
{
    let norm = |v: &[Complex64]| v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let mut s = vec![Complex64::new(0.0, 0.0); dim];
    let mut r = f(&s)?;
    for _ in 0..60 {
        if norm(&r) < 1e-13 * scale {
            return Ok(s);
        }
        let h = 1e-6;
        let mut jac = CMatrix::zeros(dim, dim);
        for j in 0..dim {
            let mut sp = s.clone();
            let mut sm = s.clone();
            sp[j] += h;
            sm[j] -= h;
            let (fp, fm) = (f(&sp)?, f(&sm)?);
            for i in 0..dim {
                jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        let rhs = nalgebra::DVector::from_vec(r.clone());
        let delta = jac.lu().solve(&rhs).ok_or(Error::Singular("Newton Jacobian"))?;
        let mut step = 1.0;
        loop {
            let trial: Vec<Complex64> = s.iter().zip(delta.iter()).map(|(a, d)| a - d * step).collect();
            if let Ok(rt) = f(&trial) {
                if norm(&rt) < norm(&r) || step < 1e-3 {
                    s = trial;
                    r = rt;
                    break;
                }
            }
            step *= 0.5;
            if step < 1e-4 {
                return Err(Error::Constraint("Newton line search failed".into()));
            }
        }
        if norm(&s) > 50.0 {
            return Err(Error::Constraint("Newton iterate diverged".into()));
        }
    }
    if norm(&r) < 1e-11 * scale {
        Ok(s)
    } else {
        Err(Error::Constraint("Newton iteration did not converge".into()))
    }
}

/// Matrix with the given diagonal and characteristic polynomial (same
/// convention as `lie::char_poly`), built as a Hessenberg matrix with unit
/// superdiagonal and a solved last row, then conjugated by a random diagonal.
pub fn matrix_with_diagonal_and_spectrum(
    rng: &mut SampleRng,
    diag: &[Complex64],
    target: &[Complex64],
) -> Result<CMatrix> {
    let m = diag.len();
    let one = Complex64::new(1.0, 0.0);
    let build = |x: &[Complex64]| {
        let mut a = CMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(diag));
        for k in 0..m - 1 {
            a[(k, k + 1)] = one;
            a[(m - 1, k)] = x[k];
        }
        a
    };
    let zero = vec![Complex64::new(0.0, 0.0); m - 1];
    let c0 = lie::char_poly(&build(&zero));
    let mut jac = CMatrix::zeros(m - 1, m - 1);
    for j in 0..m - 1 {
        let mut e = zero.clone();
        e[j] = one;
        let cj = lie::char_poly(&build(&e));
        for i in 0..m - 1 {
            jac[(i, j)] = cj[i + 1] - c0[i + 1];
        }
    }
    let rhs = nalgebra::DVector::from_fn(m - 1, |i, _| target[i + 1] - c0[i + 1]);
    let x = jac.lu().solve(&rhs).ok_or(Error::Singular("spectrum placement"))?;
    let a = build(x.as_slice());
    let d: Vec<Complex64> = (0..m)
        .map(|_| Complex64::from_polar(rng.gen_range(0.6..1.6), rng.gen_range(-3.0..3.0)))
        .collect();
    Ok(CMatrix::from_fn(m, m, |r, c| a[(r, c)] * d[r] / d[c]))
}

fn elliptic_attempt(model: &GaudinModel, rng: &mut SampleRng) -> Result<PhaseState> {
    let m = model.m();
    let seeds = model.orbit_seeds();
    let n = seeds.len();
    let cache = model.cache().ok_or(Error::WrongGenus { expected: 1 })?;
    let mut phis: Vec<CMatrix> = (0..n - 1).map(|_| random_group_element(rng, m, 0.5)).collect();
    let mut sum = CMatrix::zeros(m, m);
    for a in 0..n - 1 {
        sum += orbit_element(&phis[a], &seeds[a])?;
    }
    let diag: Vec<Complex64> = sum.diagonal().iter().map(|x| -x).collect();
    let target = lie::char_poly(&(-&seeds[n - 1]));
    let last = matrix_with_diagonal_and_spectrum(rng, &diag, &target)?;
    phis.push(conjugator(rng, &last, &seeds[n - 1])?);

    let rk = m - 1;
    let tau = cache.tau();
    let mut q = vec![Complex64::new(0.0, 0.0); rk];
    for _ in 0..100 {
        for x in q.iter_mut() {
            *x = Complex64::new(rng.gen_range(-0.25..0.25), 0.0) + tau * rng.gen_range(-0.25..0.25);
        }
        let ok = model
            .basis()
            .roots()
            .iter()
            .all(|r| cache.lattice_distance(r.eval(&q)) > 0.2);
        if ok {
            break;
        }
    }
    let p = (0..rk).map(|_| unit(rng)).collect();
    Ok(PhaseState::new(phis, q, p, vec![0.0; model.num_hamiltonians()]))
}
