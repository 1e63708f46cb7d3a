//! Rational (genus 0) and elliptic (genus 1) Gaudin models: Lax matrices,
//! Hamiltonians, their gradients, M-matrices and the change of
//! trivialization in genus 1.
//!
//! Orbit elements are `L_a = -phi_a Lambda_a phi_a^{-1}`. In genus 1 the
//! phase space also carries Cartan coordinates `q^mu` and their canonical
//! momenta `p_mu = Tr(L(0) H_mu)` where `L(0)` is the constant term of the
//! Lax matrix at the gluing point.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::elliptic::EllipticCache;
use crate::error::{Error, Result};
use crate::lie::{self, CMatrix, Decomposition, InvariantPolynomial, LieBasis};

/// Minimum separation between distinct points (absolute, modulo the lattice
/// in genus 1).
pub const POINT_TOL: f64 = 1e-8;
/// Minimum lattice distance of every root value `root(Q)`.
pub const RESONANCE_TOL: f64 = 1e-8;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[derive(Debug, Clone)]
pub enum Geometry {
    Rational,
    Elliptic(EllipticCache),
}

/// One Hamiltonian `H = P(L(point))`.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSpec {
    pub point: Complex64,
    pub poly: InvariantPolynomial,
}

impl HamiltonianSpec {
    pub fn new(point: Complex64, degree: u32) -> Result<Self> {
        Ok(Self {
            point,
            poly: InvariantPolynomial::new(degree)?,
        })
    }
}

/// Immutable model definition.
#[derive(Debug, Clone)]
pub struct GaudinModel {
    basis: LieBasis,
    geometry: Geometry,
    points: Vec<Complex64>,
    seeds: Vec<CMatrix>,
    hams: Vec<HamiltonianSpec>,
}

/// Dynamical variables. `q` and `p` are empty in genus 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateJson", into = "StateJson")]
pub struct PhaseState {
    pub phis: Vec<CMatrix>,
    pub q: Vec<Complex64>,
    pub p: Vec<Complex64>,
    pub t: Vec<f64>,
}

/// Gradient of a function on phase space: one algebra element per orbit
/// (paired with `dL_a` through the trace form) plus partials in `q` and `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub dl: Vec<CMatrix>,
    pub dq: Vec<Complex64>,
    pub dp: Vec<Complex64>,
}

impl Gradient {
    pub fn scaled(&self, s: Complex64) -> Gradient {
        Gradient {
            dl: self.dl.iter().map(|x| x * s).collect(),
            dq: self.dq.iter().map(|x| x * s).collect(),
            dp: self.dp.iter().map(|x| x * s).collect(),
        }
    }

    pub fn add(&self, other: &Gradient) -> Gradient {
        Gradient {
            dl: self.dl.iter().zip(&other.dl).map(|(a, b)| a + b).collect(),
            dq: self.dq.iter().zip(&other.dq).map(|(a, b)| a + b).collect(),
            dp: self.dp.iter().zip(&other.dp).map(|(a, b)| a + b).collect(),
        }
    }
}

/// Quantities derived from a state once and reused for many `z`.
#[derive(Debug, Clone)]
pub struct Frame {
    pub residues: Vec<CMatrix>,
    pub parts: Vec<Decomposition>,
    /// Cartan coordinates `pi^mu` of the constant part (genus 1).
    pub pi: Vec<Complex64>,
    /// `root(Q)` for every root, in basis order (genus 1).
    pub root_values: Vec<Complex64>,
}

/// Both constructions of the retrivialized Lax matrix.
#[derive(Debug, Clone)]
pub struct Retrivialized {
    pub conjugated: CMatrix,
    pub assembled: CMatrix,
}

impl GaudinModel {
    pub fn rational(
        m: usize,
        points: Vec<Complex64>,
        seeds: Vec<CMatrix>,
        hams: Vec<HamiltonianSpec>,
    ) -> Result<Self> {
        Self::build(m, Geometry::Rational, points, seeds, hams)
    }

    pub fn elliptic(
        m: usize,
        tau: Complex64,
        points: Vec<Complex64>,
        seeds: Vec<CMatrix>,
        hams: Vec<HamiltonianSpec>,
    ) -> Result<Self> {
        let cache = EllipticCache::new(tau)?;
        Self::build(m, Geometry::Elliptic(cache), points, seeds, hams)
    }

    fn build(
        m: usize,
        geometry: Geometry,
        points: Vec<Complex64>,
        seeds: Vec<CMatrix>,
        hams: Vec<HamiltonianSpec>,
    ) -> Result<Self> {
        let basis = LieBasis::sl(m)?;
        if points.is_empty() {
            return Err(Error::InvalidArgument("at least one marked point is required".into()));
        }
        if seeds.len() != points.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                got: seeds.len(),
            });
        }
        for s in &seeds {
            basis.decompose(s)?;
            if s.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite("orbit seed"));
            }
        }
        let model = Self {
            basis,
            geometry,
            points,
            seeds,
            hams,
        };
        model.check_points()?;
        Ok(model)
    }

    fn check_points(&self) -> Result<()> {
        let all_finite = self.points.iter().chain(self.hams.iter().map(|h| &h.point)).all(|z| z.is_finite());
        if !all_finite {
            return Err(Error::NonFinite("model points"));
        }
        for (a, &pa) in self.points.iter().enumerate() {
            for &pb in &self.points[a + 1..] {
                if self.separation(pa, pb) < POINT_TOL {
                    return Err(Error::CoincidentPoints(format!("marked points {pa} and {pb}")));
                }
            }
            for h in &self.hams {
                if self.separation(pa, h.point) < POINT_TOL {
                    return Err(Error::CoincidentPoints(format!(
                        "Hamiltonian point {} equals marked point {pa}",
                        h.point
                    )));
                }
            }
        }
        if let Geometry::Elliptic(cache) = &self.geometry {
            for &z in self.points.iter().chain(self.hams.iter().map(|h| &h.point)) {
                if cache.lattice_distance(z) < POINT_TOL {
                    return Err(Error::PointAtOrigin(z));
                }
            }
        }
        Ok(())
    }

    fn separation(&self, a: Complex64, b: Complex64) -> f64 {
        match &self.geometry {
            Geometry::Rational => (a - b).norm(),
            Geometry::Elliptic(cache) => cache.lattice_distance(a - b),
        }
    }

    pub fn genus(&self) -> u8 {
        match self.geometry {
            Geometry::Rational => 0,
            Geometry::Elliptic(_) => 1,
        }
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn cache(&self) -> Option<&EllipticCache> {
        match &self.geometry {
            Geometry::Elliptic(c) => Some(c),
            Geometry::Rational => None,
        }
    }

    fn elliptic_cache(&self) -> Result<&EllipticCache> {
        self.cache().ok_or(Error::WrongGenus { expected: 1 })
    }

    pub fn basis(&self) -> &LieBasis {
        &self.basis
    }

    pub fn m(&self) -> usize {
        self.basis.m()
    }

    pub fn marked_points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn orbit_seeds(&self) -> &[CMatrix] {
        &self.seeds
    }

    pub fn hamiltonian_specs(&self) -> &[HamiltonianSpec] {
        &self.hams
    }

    /// Number of marked points `N`.
    pub fn num_points(&self) -> usize {
        self.points.len()
    }

    /// Number of Hamiltonians `n`.
    pub fn num_hamiltonians(&self) -> usize {
        self.hams.len()
    }

    /// Number of canonical coordinate pairs (0 in genus 0, rank in genus 1).
    pub fn canonical_dim(&self) -> usize {
        match self.geometry {
            Geometry::Rational => 0,
            Geometry::Elliptic(_) => self.basis.rank(),
        }
    }

    /// Checks shapes, finiteness and invertibility of the group points.
    pub fn check_state(&self, state: &PhaseState) -> Result<()> {
        let m = self.m();
        if state.phis.len() != self.num_points() {
            return Err(Error::DimensionMismatch {
                expected: self.num_points(),
                got: state.phis.len(),
            });
        }
        for phi in &state.phis {
            if phi.nrows() != m || phi.ncols() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    got: phi.nrows().max(phi.ncols()),
                });
            }
            if phi.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite("group point"));
            }
        }
        let k = self.canonical_dim();
        if state.q.len() != k || state.p.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: state.q.len().max(state.p.len()),
            });
        }
        if state.q.iter().chain(&state.p).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("canonical coordinates"));
        }
        if state.t.len() != self.num_hamiltonians() {
            return Err(Error::DimensionMismatch {
                expected: self.num_hamiltonians(),
                got: state.t.len(),
            });
        }
        Ok(())
    }

    /// Norm of the residue sum in genus 0, of its Cartan part in genus 1.
    pub fn residue_sum_norm(&self, state: &PhaseState) -> Result<f64> {
        let ls = self.orbit_elements(state)?;
        let mut s = CMatrix::zeros(self.m(), self.m());
        for l in &ls {
            s += l;
        }
        if self.genus() == 1 {
            s = CMatrix::from_diagonal(&s.diagonal());
        }
        Ok(lie::frobenius(&s))
    }

    /// `check_state` plus the residue constraint at relative tolerance `tol`.
    pub fn validate_state(&self, state: &PhaseState, tol: f64) -> Result<()> {
        self.check_state(state)?;
        let ls = self.orbit_elements(state)?;
        let scale = ls.iter().map(lie::frobenius).fold(0.0, f64::max);
        let r = self.residue_sum_norm(state)?;
        if r > tol * scale.max(1.0) {
            return Err(Error::Constraint(format!(
                "residue sum has norm {r:e} (tolerance {:e})",
                tol * scale.max(1.0)
            )));
        }
        self.frame(state)?;
        Ok(())
    }

    /// `L_a = -phi_a Lambda_a phi_a^{-1}`.
    pub fn orbit_elements(&self, state: &PhaseState) -> Result<Vec<CMatrix>> {
        state
            .phis
            .iter()
            .zip(&self.seeds)
            .map(|(phi, lam)| Ok(-(phi * lam * lie::inverse(phi)?)))
            .collect()
    }

    pub fn frame(&self, state: &PhaseState) -> Result<Frame> {
        self.check_state(state)?;
        let residues = self.orbit_elements(state)?;
        let parts: Vec<Decomposition> = residues
            .iter()
            .map(|l| self.basis.decompose_unchecked(l))
            .collect();
        let (pi, root_values) = match &self.geometry {
            Geometry::Rational => (Vec::new(), Vec::new()),
            Geometry::Elliptic(cache) => {
                let rk = self.basis.rank();
                let mut shifted = state.p.clone();
                let mut acc = vec![c(0.0, 0.0); rk];
                for (part, &pa) in parts.iter().zip(&self.points) {
                    let zm = cache.zeta(-pa)?;
                    for mu in 0..rk {
                        acc[mu] += part.cartan[mu] * zm;
                    }
                }
                // p_mu = Gram_{mu nu} (pi^nu + acc^nu)
                let lowered = self.basis.lower(&acc);
                for mu in 0..rk {
                    shifted[mu] -= lowered[mu];
                }
                let pi = self.basis.raise(&shifted);
                let mut root_values = Vec::with_capacity(self.basis.roots().len());
                for r in self.basis.roots() {
                    let u = r.eval(&state.q);
                    let d = cache.lattice_distance(u);
                    if d < RESONANCE_TOL {
                        return Err(Error::Resonant { value: u, distance: d });
                    }
                    root_values.push(u);
                }
                (pi, root_values)
            }
        };
        Ok(Frame {
            residues,
            parts,
            pi,
            root_values,
        })
    }

    /// Lax matrix for either genus.
    pub fn lax(&self, state: &PhaseState, z: Complex64) -> Result<CMatrix> {
        let f = self.frame(state)?;
        self.lax_in(&f, z)
    }

    pub fn lax_in(&self, f: &Frame, z: Complex64) -> Result<CMatrix> {
        match &self.geometry {
            Geometry::Rational => {
                let mut out = CMatrix::zeros(self.m(), self.m());
                for (l, &pa) in f.residues.iter().zip(&self.points) {
                    let d = z - pa;
                    if d.norm() < crate::elliptic::POLE_TOL {
                        return Err(Error::Pole {
                            z,
                            distance: d.norm(),
                            sigma: None,
                        });
                    }
                    out += l / d;
                }
                Ok(out)
            }
            Geometry::Elliptic(cache) => {
                let rk = self.basis.rank();
                let mut cart = f.pi.clone();
                let mut roots = vec![c(0.0, 0.0); self.basis.roots().len()];
                for (part, &pa) in f.parts.iter().zip(&self.points) {
                    let zt = cache.zeta(z - pa)?;
                    for mu in 0..rk {
                        cart[mu] += part.cartan[mu] * zt;
                    }
                    for (k, &u) in f.root_values.iter().enumerate() {
                        if part.roots[k] != c(0.0, 0.0) {
                            roots[k] += part.roots[k] * cache.lax_kernel(u, z, pa)?.value;
                        }
                    }
                }
                cache.zeta(z)?;
                Ok(self.basis.compose(&Decomposition { cartan: cart, roots }))
            }
        }
    }

    pub fn rational_lax(&self, state: &PhaseState, z: Complex64) -> Result<CMatrix> {
        if self.genus() != 0 {
            return Err(Error::WrongGenus { expected: 0 });
        }
        self.lax(state, z)
    }

    pub fn elliptic_lax(&self, state: &PhaseState, z: Complex64) -> Result<CMatrix> {
        self.elliptic_cache()?;
        self.lax(state, z)
    }

    /// `gamma(z) = exp(Q/z)`, diagonal.
    pub fn transition_gamma(&self, state: &PhaseState, z: Complex64) -> Result<CMatrix> {
        self.elliptic_cache()?;
        if z.norm() < crate::elliptic::POLE_TOL {
            return Err(Error::Pole {
                z,
                distance: z.norm(),
                sigma: None,
            });
        }
        let q = self.basis.cartan_element(&state.q);
        Ok(CMatrix::from_diagonal(&q.diagonal().map(|x| (x / z).exp())))
    }

    fn ham_spec(&self, i: usize) -> Result<&HamiltonianSpec> {
        self.hams.get(i).ok_or(Error::IndexOutOfRange {
            index: i,
            len: self.hams.len(),
        })
    }

    pub fn hamiltonian(&self, state: &PhaseState, i: usize) -> Result<Complex64> {
        let f = self.frame(state)?;
        self.hamiltonian_in(&f, i)
    }

    pub fn hamiltonian_in(&self, f: &Frame, i: usize) -> Result<Complex64> {
        let h = self.ham_spec(i)?;
        Ok(h.poly.eval(&self.lax_in(f, h.point)?))
    }

    pub fn hamiltonians(&self, state: &PhaseState) -> Result<Vec<Complex64>> {
        let f = self.frame(state)?;
        (0..self.num_hamiltonians())
            .map(|i| self.hamiltonian_in(&f, i))
            .collect()
    }

    pub fn grad_hamiltonian(&self, state: &PhaseState, i: usize) -> Result<Gradient> {
        let f = self.frame(state)?;
        self.grad_hamiltonian_in(&f, i)
    }

    pub fn grad_hamiltonian_in(&self, f: &Frame, i: usize) -> Result<Gradient> {
        let h = self.ham_spec(i)?;
        let qi = h.point;
        let grad = h.poly.grad(&self.lax_in(f, qi)?);
        match &self.geometry {
            Geometry::Rational => Ok(Gradient {
                dl: self.points.iter().map(|&pa| &grad / (qi - pa)).collect(),
                dq: Vec::new(),
                dp: Vec::new(),
            }),
            Geometry::Elliptic(cache) => {
                let rk = self.basis.rank();
                let g = self.basis.decompose_unchecked(&grad);
                let nroots = self.basis.roots().len();
                // kernels[alpha][k] = normalised kernel at (root_k(Q), q_i, p_alpha)
                let mut kernels = Vec::with_capacity(self.points.len());
                for &pa in &self.points {
                    let row = f
                        .root_values
                        .iter()
                        .map(|&u| cache.lax_kernel(u, qi, pa))
                        .collect::<Result<Vec<_>>>()?;
                    kernels.push(row);
                }
                let mut dl = Vec::with_capacity(self.points.len());
                for (a, &pa) in self.points.iter().enumerate() {
                    let ca = cache.zeta(qi - pa)? - cache.zeta(-pa)?;
                    let cart: Vec<Complex64> = g.cartan.iter().map(|x| x * ca).collect();
                    let roots: Vec<Complex64> = (0..nroots)
                        .map(|k| g.roots[k] * kernels[a][self.basis.negative_root(k)].value)
                        .collect();
                    dl.push(self.basis.compose(&Decomposition { cartan: cart, roots }));
                }
                let mut dq = vec![c(0.0, 0.0); rk];
                for (k, r) in self.basis.roots().iter().enumerate() {
                    let gneg = g.roots[self.basis.negative_root(k)];
                    if gneg == c(0.0, 0.0) {
                        continue;
                    }
                    let mut s = c(0.0, 0.0);
                    for (a, part) in f.parts.iter().enumerate() {
                        let kk = &kernels[a][k];
                        s += part.roots[k] * kk.value * kk.dlog_du;
                    }
                    for mu in 0..rk {
                        dq[mu] += gneg * s * r.coeffs[mu] as f64;
                    }
                }
                Ok(Gradient {
                    dl,
                    dq,
                    dp: g.cartan,
                })
            }
        }
    }

    /// M-matrix of flow `i` for either genus.
    pub fn m_matrix(&self, state: &PhaseState, i: usize, z: Complex64) -> Result<CMatrix> {
        let f = self.frame(state)?;
        self.m_matrix_in(&f, i, z)
    }

    pub fn m_matrix_in(&self, f: &Frame, i: usize, z: Complex64) -> Result<CMatrix> {
        let h = self.ham_spec(i)?;
        let qi = h.point;
        let grad = h.poly.grad(&self.lax_in(f, qi)?);
        match &self.geometry {
            Geometry::Rational => {
                let d = z - qi;
                if d.norm() < crate::elliptic::POLE_TOL {
                    return Err(Error::Pole {
                        z,
                        distance: d.norm(),
                        sigma: None,
                    });
                }
                Ok(grad / d)
            }
            Geometry::Elliptic(cache) => {
                let g = self.basis.decompose_unchecked(&grad);
                let w = cache.zeta(z - qi)? - cache.zeta(z)?;
                let cart: Vec<Complex64> = g.cartan.iter().map(|x| x * w).collect();
                let mut roots = vec![c(0.0, 0.0); g.roots.len()];
                for (k, &u) in f.root_values.iter().enumerate() {
                    if g.roots[k] != c(0.0, 0.0) {
                        roots[k] = g.roots[k] * cache.lax_kernel(u, z, qi)?.value;
                    }
                }
                Ok(self.basis.compose(&Decomposition { cartan: cart, roots }))
            }
        }
    }

    pub fn m_matrix_rational(&self, state: &PhaseState, i: usize, z: Complex64) -> Result<CMatrix> {
        if self.genus() != 0 {
            return Err(Error::WrongGenus { expected: 0 });
        }
        self.m_matrix(state, i, z)
    }

    pub fn m_matrix_elliptic(&self, state: &PhaseState, i: usize, z: Complex64) -> Result<CMatrix> {
        self.elliptic_cache()?;
        self.m_matrix(state, i, z)
    }

    /// The non-holomorphic exponent `g(z)` of the trivialization change,
    /// `2 eta1 (z conj(tau) - conj(z) tau)/(tau - conj(tau)) - 2 eta2 (z - conj(z))/(tau - conj(tau))`.
    pub fn trivialization_exponent(&self, z: Complex64) -> Result<Complex64> {
        let cache = self.elliptic_cache()?;
        let tau = cache.tau();
        let dt = tau - tau.conj();
        Ok(c(2.0, 0.0) * cache.eta1() * (z * tau.conj() - z.conj() * tau) / dt
            - c(2.0, 0.0) * cache.eta2() * (z - z.conj()) / dt)
    }

    /// Lax matrix in the trivialization related by
    /// `f1(z) = exp(Q (zeta(z) + g(z)))`, computed by conjugation and by
    /// direct assembly from sigma functions.
    pub fn retrivialize(&self, state: &PhaseState, z: Complex64) -> Result<Retrivialized> {
        let cache = self.elliptic_cache()?;
        let f = self.frame(state)?;
        let l = self.lax_in(&f, z)?;
        let qm = self.basis.cartan_element(&state.q);
        let f1 = lie::expm(&(qm * (cache.zeta(z)? + self.trivialization_exponent(z)?)))?;
        let conjugated = &f1 * l * lie::inverse(&f1)?;

        let rk = self.basis.rank();
        let tau = cache.tau();
        let two_pi_i = c(0.0, 2.0 * PI) / (tau - tau.conj());
        let eta1 = cache.eta1();
        let mut cart = f.pi.clone();
        let mut roots = vec![c(0.0, 0.0); self.basis.roots().len()];
        for (part, &pa) in f.parts.iter().zip(&self.points) {
            let zt = cache.zeta(z - pa)?;
            for mu in 0..rk {
                cart[mu] += part.cartan[mu] * zt;
            }
            let shift = cache.zeta(pa)? + self.trivialization_exponent(pa)?;
            let szp = cache.sigma(z - pa);
            for (k, &u) in f.root_values.iter().enumerate() {
                // root component of f1(p_a) L_a f1(p_a)^{-1}
                let lt = part.roots[k] * (u * shift).exp();
                let phase = u * two_pi_i * ((z - z.conj()) - (pa - pa.conj()))
                    - c(2.0, 0.0) * eta1 * u * (z - pa);
                roots[k] += lt * cache.sigma(u + z - pa) / (cache.sigma(u) * szp) * phase.exp();
            }
        }
        let assembled = self.basis.compose(&Decomposition { cartan: cart, roots });
        Ok(Retrivialized {
            conjugated,
            assembled,
        })
    }
}

impl PhaseState {
    pub fn new(phis: Vec<CMatrix>, q: Vec<Complex64>, p: Vec<Complex64>, t: Vec<f64>) -> Self {
        Self { phis, q, p, t }
    }

    pub fn is_finite(&self) -> bool {
        self.phis.iter().all(|m| m.iter().all(|x| x.is_finite()))
            && self.q.iter().chain(&self.p).all(|x| x.is_finite())
            && self.t.iter().all(|x| x.is_finite())
    }
}

/// Row-major nested arrays of `[re, im]` pairs.
pub type MatrixJson = Vec<Vec<Complex64>>;

pub fn matrix_to_json(x: &CMatrix) -> MatrixJson {
    (0..x.nrows())
        .map(|r| (0..x.ncols()).map(|c| x[(r, c)]).collect())
        .collect()
}

pub fn matrix_from_json(rows: &MatrixJson) -> Result<CMatrix> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidArgument("matrix must be a non-empty square array".into()));
    }
    Ok(CMatrix::from_fn(n, n, |r, c| rows[r][c]))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateJson {
    pub phis: Vec<MatrixJson>,
    #[serde(default)]
    pub q: Vec<Complex64>,
    #[serde(default)]
    pub p: Vec<Complex64>,
    #[serde(default)]
    pub t: Vec<f64>,
}

impl TryFrom<StateJson> for PhaseState {
    type Error = Error;
    fn try_from(s: StateJson) -> Result<Self> {
        Ok(PhaseState {
            phis: s.phis.iter().map(matrix_from_json).collect::<Result<_>>()?,
            q: s.q,
            p: s.p,
            t: s.t,
        })
    }
}

impl From<PhaseState> for StateJson {
    fn from(s: PhaseState) -> Self {
        StateJson {
            phis: s.phis.iter().map(matrix_to_json).collect(),
            q: s.q,
            p: s.p,
            t: s.t,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianJson {
    pub point: Complex64,
    pub degree: u32,
}

/// Model schema. `tau` is required exactly when `genus` is 1.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModelJson {
    pub genus: u8,
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<Complex64>,
    pub marked_points: Vec<Complex64>,
    pub orbit_seeds: Vec<MatrixJson>,
    pub hamiltonians: Vec<HamiltonianJson>,
}

impl ModelJson {
    pub fn build(&self) -> Result<GaudinModel> {
        let seeds = self
            .orbit_seeds
            .iter()
            .map(matrix_from_json)
            .collect::<Result<Vec<_>>>()?;
        let hams = self
            .hamiltonians
            .iter()
            .map(|h| HamiltonianSpec::new(h.point, h.degree))
            .collect::<Result<Vec<_>>>()?;
        match (self.genus, self.tau) {
            (0, None) => GaudinModel::rational(self.m, self.marked_points.clone(), seeds, hams),
            (1, Some(tau)) => {
                GaudinModel::elliptic(self.m, tau, self.marked_points.clone(), seeds, hams)
            }
            (0, Some(_)) => Err(Error::InvalidArgument("tau given for a genus 0 model".into())),
            (1, None) => Err(Error::InvalidArgument("genus 1 model needs tau".into())),
            (g, _) => Err(Error::InvalidArgument(format!("genus must be 0 or 1, got {g}"))),
        }
    }
}

impl From<&GaudinModel> for ModelJson {
    fn from(model: &GaudinModel) -> Self {
        ModelJson {
            genus: model.genus(),
            m: model.m(),
            tau: model.cache().map(|c| c.tau()),
            marked_points: model.points.clone(),
            orbit_seeds: model.seeds.iter().map(matrix_to_json).collect(),
            hamiltonians: model
                .hams
                .iter()
                .map(|h| HamiltonianJson {
                    point: h.point,
                    degree: h.poly.degree(),
                })
                .collect(),
        }
    }
}
