//! Commuting Hamiltonian flows on the product of coadjoint orbits (and the
//! cotangent factor in genus 1): vector fields, steppers, evolution along
//! axis-aligned multi-time curves, the discrete action, Poisson brackets and
//! trajectory diagnostics.
//!
//! The orbit part of the flow of `H` is `dL_a/dt = [-G_a, L_a]` with
//! `G_a = dH/dL_a`, realised on group points as `dphi_a/dt = -G_a phi_a`.
//! The canonical part is `dq/dt = dH/dp`, `dp/dt = -dH/dq`. Brackets satisfy
//! `{f, H} = X_H f`.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::{self, CMatrix};
use crate::model::{GaudinModel, Gradient, PhaseState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Lie midpoint rule: group points move by exact conjugation.
    Conjugation,
    /// Classical fourth order Runge-Kutta on `(phi, q, p)`.
    Rk4,
}

/// Tangent vector in orbit coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Tangent {
    pub dl: Vec<CMatrix>,
    pub dq: Vec<Complex64>,
    pub dp: Vec<Complex64>,
}

pub fn hamiltonian_vector_field(model: &GaudinModel, state: &PhaseState, i: usize) -> Result<Tangent> {
    let ls = model.orbit_elements(state)?;
    let g = model.grad_hamiltonian(state, i)?;
    Ok(Tangent {
        dl: g
            .dl
            .iter()
            .zip(&ls)
            .map(|(ga, la)| lie::commutator(&-ga, la))
            .collect(),
        dq: g.dp.clone(),
        dp: g.dq.iter().map(|x| -x).collect(),
    })
}

/// Poisson bracket of two functions given by their gradients at `ls`:
/// `-sum_a Tr(L_a [df_a, dg_a]) + sum_mu (df/dq dg/dp - df/dp dg/dq)`.
pub fn bracket(ls: &[CMatrix], f: &Gradient, g: &Gradient) -> Complex64 {
    let mut out = Complex64::new(0.0, 0.0);
    for ((l, a), b) in ls.iter().zip(&f.dl).zip(&g.dl) {
        out -= (l * lie::commutator(a, b)).trace();
    }
    for mu in 0..f.dq.len() {
        out += f.dq[mu] * g.dp[mu] - f.dp[mu] * g.dq[mu];
    }
    out
}

pub fn poisson_bracket(model: &GaudinModel, state: &PhaseState, i: usize, j: usize) -> Result<Complex64> {
    let f = model.frame(state)?;
    let gi = model.grad_hamiltonian_in(&f, i)?;
    let gj = model.grad_hamiltonian_in(&f, j)?;
    Ok(bracket(&f.residues, &gi, &gj))
}

fn check_flow_index(model: &GaudinModel, i: usize) -> Result<()> {
    if i >= model.num_hamiltonians() {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: model.num_hamiltonians(),
        });
    }
    Ok(())
}

fn shifted(state: &PhaseState, g: &Gradient, dt: f64) -> Result<PhaseState> {
    let mut out = state.clone();
    for (phi, ga) in out.phis.iter_mut().zip(&g.dl) {
        *phi = lie::expm(&(ga * Complex64::new(-dt, 0.0)))? * &*phi;
    }
    for mu in 0..out.q.len() {
        out.q[mu] += g.dp[mu] * dt;
        out.p[mu] -= g.dq[mu] * dt;
    }
    Ok(out)
}

/// Signed step of flow `i`; `t^i` advances by `dt`.
pub(crate) fn advance(
    model: &GaudinModel,
    state: &PhaseState,
    i: usize,
    dt: f64,
    method: Method,
) -> Result<PhaseState> {
    let mut next = match method {
        Method::Conjugation => {
            let g0 = model.grad_hamiltonian(state, i)?;
            let mid = shifted(state, &g0, 0.5 * dt)?;
            let gm = model.grad_hamiltonian(&mid, i)?;
            shifted(state, &gm, dt)?
        }
        Method::Rk4 => {
            let deriv = |s: &PhaseState| -> Result<(Vec<CMatrix>, Vec<Complex64>, Vec<Complex64>)> {
                let g = model.grad_hamiltonian(s, i)?;
                let dphi = g.dl.iter().zip(&s.phis).map(|(ga, phi)| -(ga * phi)).collect();
                Ok((dphi, g.dp.clone(), g.dq.iter().map(|x| -x).collect()))
            };
            let axpy = |s: &PhaseState, k: &(Vec<CMatrix>, Vec<Complex64>, Vec<Complex64>), a: f64| {
                let mut out = s.clone();
                for (phi, d) in out.phis.iter_mut().zip(&k.0) {
                    *phi += d * Complex64::new(a, 0.0);
                }
                for mu in 0..out.q.len() {
                    out.q[mu] += k.1[mu] * a;
                    out.p[mu] += k.2[mu] * a;
                }
                out
            };
            let k1 = deriv(state)?;
            let k2 = deriv(&axpy(state, &k1, 0.5 * dt))?;
            let k3 = deriv(&axpy(state, &k2, 0.5 * dt))?;
            let k4 = deriv(&axpy(state, &k3, dt))?;
            let mut out = state.clone();
            let w = [dt / 6.0, dt / 3.0, dt / 3.0, dt / 6.0];
            for (k, &wk) in [&k1, &k2, &k3, &k4].iter().zip(&w) {
                out = axpy(&out, k, wk);
            }
            out
        }
    };
    next.t[i] += dt;
    if !next.is_finite() {
        return Err(Error::NonFinite("integrated state"));
    }
    Ok(next)
}

/// One step of length `h > 0` along flow `i`.
pub fn step(model: &GaudinModel, state: &PhaseState, i: usize, h: f64, method: Method) -> Result<PhaseState> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidArgument(format!("step must be positive, got {h}")));
    }
    check_flow_index(model, i)?;
    model.check_state(state)?;
    advance(model, state, i, h, method)
}

/// Axis-aligned polyline in multi-time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct FlowCurve {
    waypoints: Vec<Vec<f64>>,
}

/// One leg of a curve: flow index and signed duration. Zero-length legs
/// between repeated waypoints have `flow = None`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Leg {
    pub flow: Option<usize>,
    pub duration: f64,
}

impl FlowCurve {
    pub fn new(waypoints: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = waypoints.first() else {
            return Err(Error::InvalidArgument("curve needs at least one waypoint".into()));
        };
        let n = first.len();
        for (k, w) in waypoints.iter().enumerate() {
            if w.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: w.len() });
            }
            if w.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite("curve waypoint"));
            }
            if k > 0 {
                let moved = w.iter().zip(&waypoints[k - 1]).filter(|(a, b)| a != b).count();
                if moved > 1 {
                    return Err(Error::InvalidArgument(format!(
                        "segment {} changes {moved} coordinates; curves must be axis-aligned",
                        k - 1
                    )));
                }
            }
        }
        Ok(Self { waypoints })
    }

    /// Straight run along one axis from `start`.
    pub fn from_legs(start: Vec<f64>, legs: &[(usize, f64)]) -> Result<Self> {
        let mut pts = vec![start];
        for &(i, d) in legs {
            let mut w = pts.last().unwrap().clone();
            if i >= w.len() {
                return Err(Error::IndexOutOfRange { index: i, len: w.len() });
            }
            w[i] += d;
            pts.push(w);
        }
        Self::new(pts)
    }

    pub fn waypoints(&self) -> &[Vec<f64>] {
        &self.waypoints
    }

    pub fn dim(&self) -> usize {
        self.waypoints[0].len()
    }

    pub fn legs(&self) -> Vec<Leg> {
        self.waypoints
            .windows(2)
            .map(|w| {
                let axis = (0..w[0].len()).find(|&k| w[0][k] != w[1][k]);
                match axis {
                    Some(i) => Leg {
                        flow: Some(i),
                        duration: w[1][i] - w[0][i],
                    },
                    None => Leg { flow: None, duration: 0.0 },
                }
            })
            .collect()
    }
}

impl TryFrom<Vec<Vec<f64>>> for FlowCurve {
    type Error = Error;
    fn try_from(w: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(w)
    }
}

impl From<FlowCurve> for Vec<Vec<f64>> {
    fn from(c: FlowCurve) -> Self {
        c.waypoints
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub segment: usize,
    pub state: PhaseState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub h: f64,
    pub method: Method,
    pub projected: bool,
}

impl Trajectory {
    pub fn last_state(&self) -> Option<&PhaseState> {
        self.samples.last().map(|s| &s.state)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    pub method: Method,
    /// Restore the genus 0 residue sum after every step by a small
    /// conjugation of each group point.
    pub project_residue_sum: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            method: Method::Rk4,
            project_residue_sum: false,
        }
    }
}

/// A run stopped by a numerical failure, with everything computed so far.
#[derive(Debug, Clone)]
pub struct Abort {
    pub partial: Trajectory,
    pub cause: Error,
}

impl Abort {
    pub fn last_good_time(&self) -> Option<&[f64]> {
        self.partial.last_state().map(|s| s.t.as_slice())
    }
}

/// Integrate along `curve`, starting from `state` placed at the first
/// waypoint. Each leg uses `ceil(|duration| / h)` equal steps.
pub fn evolve(
    model: &GaudinModel,
    state: &PhaseState,
    curve: &FlowCurve,
    h: f64,
    opts: EvolveOptions,
) -> std::result::Result<Trajectory, Abort> {
    let mut traj = Trajectory {
        samples: Vec::new(),
        h,
        method: opts.method,
        projected: opts.project_residue_sum,
    };
    let fail = |traj: &Trajectory, cause: Error| Abort {
        partial: traj.clone(),
        cause,
    };
    if !(h > 0.0) || !h.is_finite() {
        return Err(fail(&traj, Error::InvalidArgument(format!("step must be positive, got {h}"))));
    }
    if curve.dim() != model.num_hamiltonians() {
        return Err(fail(
            &traj,
            Error::DimensionMismatch {
                expected: model.num_hamiltonians(),
                got: curve.dim(),
            },
        ));
    }
    let mut cur = state.clone();
    cur.t = curve.waypoints()[0].clone();
    if let Err(e) = model.frame(&cur) {
        return Err(fail(&traj, e));
    }
    traj.samples.push(Sample {
        segment: 0,
        state: cur.clone(),
    });
    for (seg, leg) in curve.legs().into_iter().enumerate() {
        let Some(i) = leg.flow else { continue };
        let nsteps = (leg.duration.abs() / h).ceil().max(1.0) as usize;
        let dt = leg.duration / nsteps as f64;
        let target = curve.waypoints()[seg + 1][i];
        for k in 0..nsteps {
            let next = advance(model, &cur, i, dt, opts.method).and_then(|mut s| {
                if k + 1 == nsteps {
                    s.t[i] = target;
                }
                if opts.project_residue_sum && model.genus() == 0 {
                    s = project_residue_sum(model, &s)?;
                }
                model.frame(&s)?;
                Ok(s)
            });
            match next {
                Ok(s) => {
                    cur = s;
                    traj.samples.push(Sample {
                        segment: seg,
                        state: cur.clone(),
                    });
                }
                Err(e) => return Err(fail(&traj, e)),
            }
        }
    }
    Ok(traj)
}

/// Least-norm conjugation `phi_a <- exp(X_a) phi_a` with
/// `sum_a [X_a, L_a] = -sum_a L_a`, applied twice. Preserves every orbit.
pub fn project_residue_sum(model: &GaudinModel, state: &PhaseState) -> Result<PhaseState> {
    let m = model.m();
    let mut out = state.clone();
    for _ in 0..2 {
        let ls = model.orbit_elements(&out)?;
        let mut s = CMatrix::zeros(m, m);
        for l in &ls {
            s += l;
        }
        if lie::frobenius(&s) == 0.0 {
            break;
        }
        // T(X) = sum [X_a, L_a], T^dag(Y) = ([Y, L_a^H])_a
        let apply = |y: &CMatrix| -> CMatrix {
            let mut acc = CMatrix::zeros(m, m);
            for l in &ls {
                acc += lie::commutator(&lie::commutator(y, &l.adjoint()), l);
            }
            acc
        };
        let mm = m * m;
        let mut op = CMatrix::zeros(mm, mm);
        for col in 0..mm {
            let mut e = CMatrix::zeros(m, m);
            e[(col / m, col % m)] = Complex64::new(1.0, 0.0);
            let img = apply(&e);
            for row in 0..mm {
                op[(row, col)] = img[(row / m, row % m)];
            }
        }
        let rhs = nalgebra::DVector::from_fn(mm, |k, _| -s[(k / m, k % m)]);
        let y = op
            .svd(true, true)
            .solve(&rhs, 1e-12)
            .map_err(|_| Error::Singular("residue projection"))?;
        let ymat = CMatrix::from_fn(m, m, |r, c| y[r * m + c]);
        for (phi, l) in out.phis.iter_mut().zip(&ls) {
            let x = lie::commutator(&ymat, &l.adjoint());
            *phi = lie::expm(&x)? * &*phi;
        }
    }
    Ok(out)
}

/// Trapezoidal action of the Lagrangian 1-form along a trajectory:
/// `sum_a Tr(Lambda_a phi_a^{-1} dphi_a) + p dq - H_i dt^i`.
pub fn action_along_curve(model: &GaudinModel, traj: &Trajectory) -> Result<Complex64> {
    if traj.samples.is_empty() {
        return Err(Error::InvalidArgument("empty trajectory".into()));
    }
    let half = Complex64::new(0.5, 0.0);
    let seeds = model.orbit_seeds();
    let mut prev_inv: Vec<CMatrix> = traj.samples[0]
        .state
        .phis
        .iter()
        .map(lie::inverse)
        .collect::<Result<_>>()?;
    let mut prev_h = model.hamiltonians(&traj.samples[0].state)?;
    let mut total = Complex64::new(0.0, 0.0);
    for w in traj.samples.windows(2) {
        let (a, b) = (&w[0].state, &w[1].state);
        let inv: Vec<CMatrix> = b.phis.iter().map(lie::inverse).collect::<Result<_>>()?;
        for k in 0..seeds.len() {
            let dphi = &b.phis[k] - &a.phis[k];
            total += (&seeds[k] * (&prev_inv[k] + &inv[k]) * dphi).trace() * half;
        }
        for mu in 0..a.q.len() {
            total += (a.p[mu] + b.p[mu]) * (b.q[mu] - a.q[mu]) * half;
        }
        let hb = model.hamiltonians(b)?;
        for i in 0..hb.len() {
            total -= (prev_h[i] + hb[i]) * half * (b.t[i] - a.t[i]);
        }
        prev_inv = inv;
        prev_h = hb;
    }
    Ok(total)
}

/// Gap between transporting `L(z)` by `exp(h M_i)` then `exp(h M_j)` and the
/// opposite order, with each `M` evaluated at the state reached so far.
/// Maximum over `z_samples`; it is `O(h^3)` when zero curvature holds.
pub fn plaquette_gap(
    model: &GaudinModel,
    state: &PhaseState,
    i: usize,
    j: usize,
    h: f64,
    method: Method,
    z_samples: &[Complex64],
) -> Result<f64> {
    let si = step(model, state, i, h, method)?;
    let sj = step(model, state, j, h, method)?;
    let f0 = model.frame(state)?;
    let fi = model.frame(&si)?;
    let fj = model.frame(&sj)?;
    let hc = Complex64::new(h, 0.0);
    let mut gap: f64 = 0.0;
    for &z in z_samples {
        let l = model.lax_in(&f0, z)?;
        let ui = lie::expm(&(model.m_matrix_in(&f0, i, z)? * hc))?;
        let uj = lie::expm(&(model.m_matrix_in(&f0, j, z)? * hc))?;
        let uji = lie::expm(&(model.m_matrix_in(&fi, j, z)? * hc))?;
        let uij = lie::expm(&(model.m_matrix_in(&fj, i, z)? * hc))?;
        let pa = &uji * &ui;
        let pb = &uij * &uj;
        let la = &pa * &l * lie::inverse(&pa)?;
        let lb = &pb * &l * lie::inverse(&pb)?;
        gap = gap.max(lie::frobenius(&(la - lb)));
    }
    Ok(gap)
}

/// `||dL(z)/dt^i - [M_i(z), L(z)]||` with the time derivative from
/// Richardson-extrapolated central differences of fourth-order steps.
pub fn lax_residual(
    model: &GaudinModel,
    state: &PhaseState,
    i: usize,
    z: Complex64,
    delta: f64,
) -> Result<f64> {
    check_flow_index(model, i)?;
    let sub = 4;
    let run = |d: f64| -> Result<CMatrix> {
        let mut s = state.clone();
        for _ in 0..sub {
            s = advance(model, &s, i, d / sub as f64, Method::Rk4)?;
        }
        model.lax(&s, z)
    };
    let central = |d: f64| -> Result<CMatrix> { Ok((run(d)? - run(-d)?) / Complex64::new(2.0 * d, 0.0)) };
    let d1 = central(delta)?;
    let d2 = central(0.5 * delta)?;
    let dl = (d2 * Complex64::new(4.0, 0.0) - d1) / Complex64::new(3.0, 0.0);
    let l = model.lax(state, z)?;
    let mm = model.m_matrix(state, i, z)?;
    Ok(lie::frobenius(&(dl - lie::commutator(&mm, &l))))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub hamiltonian_drift: Vec<f64>,
    pub casimir_drift: Vec<f64>,
    /// Genus 0: drift of the full residue sum. Genus 1: of its Cartan part.
    pub residue_sum_drift: f64,
    pub isospectral_drift: f64,
    pub closure_values: Vec<Vec<f64>>,
    pub zero_curvature_residual: f64,
    pub projected: bool,
    pub samples: usize,
}

fn residue_sum(model: &GaudinModel, state: &PhaseState) -> Result<CMatrix> {
    let ls = model.orbit_elements(state)?;
    let mut s = CMatrix::zeros(model.m(), model.m());
    for l in &ls {
        s += l;
    }
    if model.genus() == 1 {
        s = CMatrix::from_diagonal(&s.diagonal());
    }
    Ok(s)
}

fn coeff_gap(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Spectral invariants of `L(z)` at each sample point, flattened.
pub fn spectral_coefficients(model: &GaudinModel, state: &PhaseState, z_samples: &[Complex64]) -> Result<Vec<Complex64>> {
    let f = model.frame(state)?;
    let mut out = Vec::new();
    for &z in z_samples {
        out.extend(lie::char_poly(&model.lax_in(&f, z)?));
    }
    Ok(out)
}

/// Largest number of samples at which brackets are evaluated.
const CLOSURE_SAMPLES: usize = 50;

pub fn diagnostics(model: &GaudinModel, traj: &Trajectory, z_samples: &[Complex64]) -> Result<DiagnosticsReport> {
    let first = traj
        .samples
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty trajectory".into()))?;
    let n = model.num_hamiltonians();
    let h0 = model.hamiltonians(&first.state)?;
    let cas0: Vec<Vec<Complex64>> = model
        .orbit_elements(&first.state)?
        .iter()
        .map(lie::char_poly)
        .collect();
    let rs0 = residue_sum(model, &first.state)?;
    let iso0 = spectral_coefficients(model, &first.state, z_samples)?;
    let mut report = DiagnosticsReport {
        hamiltonian_drift: vec![0.0; n],
        casimir_drift: vec![0.0; model.num_points()],
        residue_sum_drift: 0.0,
        isospectral_drift: 0.0,
        closure_values: vec![vec![0.0; n]; n],
        zero_curvature_residual: 0.0,
        projected: traj.projected,
        samples: traj.samples.len(),
    };
    let stride = traj.samples.len().div_ceil(CLOSURE_SAMPLES).max(1);
    for (k, s) in traj.samples.iter().enumerate() {
        let hs = model.hamiltonians(&s.state)?;
        for i in 0..n {
            report.hamiltonian_drift[i] = report.hamiltonian_drift[i].max((hs[i] - h0[i]).norm());
        }
        for (a, l) in model.orbit_elements(&s.state)?.iter().enumerate() {
            let gap = coeff_gap(&lie::char_poly(l), &cas0[a]);
            report.casimir_drift[a] = report.casimir_drift[a].max(gap);
        }
        let rs = residue_sum(model, &s.state)?;
        report.residue_sum_drift = report.residue_sum_drift.max(lie::frobenius(&(rs - &rs0)));
        let iso = spectral_coefficients(model, &s.state, z_samples)?;
        report.isospectral_drift = report.isospectral_drift.max(coeff_gap(&iso, &iso0));
        if k % stride == 0 || k + 1 == traj.samples.len() {
            let f = model.frame(&s.state)?;
            let grads: Vec<Gradient> = (0..n).map(|i| model.grad_hamiltonian_in(&f, i)).collect::<Result<_>>()?;
            for i in 0..n {
                for j in 0..n {
                    let b = bracket(&f.residues, &grads[i], &grads[j]).norm();
                    report.closure_values[i][j] = report.closure_values[i][j].max(b);
                }
            }
        }
    }
    // junctions where the active flow changes
    let legs = traj_flows(traj);
    for w in legs.windows(2) {
        let ((fa, idx), (fb, _)) = (w[0], w[1]);
        if fa != fb {
            let state = &traj.samples[idx].state;
            let gap = plaquette_gap(model, state, fa, fb, traj.h, traj.method, z_samples)?;
            report.zero_curvature_residual = report.zero_curvature_residual.max(gap / (traj.h * traj.h));
        }
    }
    Ok(report)
}

/// `(flow, index of the sample where that flow starts)` for each run of
/// consecutive samples driven by one flow.
fn traj_flows(traj: &Trajectory) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = Vec::new();
    for k in 1..traj.samples.len() {
        let (a, b) = (&traj.samples[k - 1].state.t, &traj.samples[k].state.t);
        if let Some(i) = (0..a.len()).find(|&i| a[i] != b[i]) {
            if out.last().map(|l| l.0) != Some(i) {
                out.push((i, k - 1));
            }
        }
    }
    out
}

/// Trajectory as CSV: segment, times, Hamiltonians (real and imaginary
/// parts), Casimir drift, residue-sum norm and spectral coefficients of
/// `L(z_s)`. A trailing `seed` column is added when `seed` is given.
pub fn write_csv<W: Write>(
    model: &GaudinModel,
    traj: &Trajectory,
    z_samples: &[Complex64],
    seed: Option<u64>,
    out: W,
) -> Result<()> {
    let io = |e: csv::Error| Error::InvalidArgument(format!("csv output: {e}"));
    let mut w = csv::Writer::from_writer(out);
    let n = model.num_hamiltonians();
    let m = model.m();
    let mut header = vec!["segment".to_string()];
    header.extend((1..=n).map(|i| format!("t{i}")));
    for i in 1..=n {
        header.push(format!("H{i}_re"));
        header.push(format!("H{i}_im"));
    }
    header.push("casimir_drift".into());
    header.push("residue_sum_norm".into());
    for s in 1..=z_samples.len() {
        for k in 1..=m {
            header.push(format!("z{s}_c{k}_re"));
            header.push(format!("z{s}_c{k}_im"));
        }
    }
    if seed.is_some() {
        header.push("seed".into());
    }
    w.write_record(&header).map_err(io)?;
    let Some(first) = traj.samples.first() else {
        return w.flush().map_err(|e| Error::InvalidArgument(e.to_string()));
    };
    let cas0: Vec<Vec<Complex64>> = model
        .orbit_elements(&first.state)?
        .iter()
        .map(lie::char_poly)
        .collect();
    for s in &traj.samples {
        let mut row = vec![s.segment.to_string()];
        row.extend(s.state.t.iter().map(|x| format!("{x:.12e}")));
        for h in model.hamiltonians(&s.state)? {
            row.push(format!("{:.15e}", h.re));
            row.push(format!("{:.15e}", h.im));
        }
        let cas = model
            .orbit_elements(&s.state)?
            .iter()
            .zip(&cas0)
            .map(|(l, c0)| coeff_gap(&lie::char_poly(l), c0))
            .fold(0.0, f64::max);
        row.push(format!("{cas:.6e}"));
        row.push(format!("{:.6e}", lie::frobenius(&residue_sum(model, &s.state)?)));
        for c in spectral_coefficients(model, &s.state, z_samples)? {
            row.push(format!("{:.15e}", c.re));
            row.push(format!("{:.15e}", c.im));
        }
        if let Some(seed) = seed {
            row.push(seed.to_string());
        }
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| Error::InvalidArgument(format!("csv output: {e}")))
}
