//! Mueller (Stokes) representation of two-qubit states.
//!
//! `rho = 1/4 sum_ab m_ab sigma_a (x) conj(sigma_b)`, so that
//! `m_ab = Tr[rho sigma_a (x) conj(sigma_b)]`. The leading column of `M` is the
//! Stokes vector of `rho_A`, the leading row that of `rho_B`. A B-side
//! measurement element with Stokes vector `S` steers A into `M S`.
//!
//! Basis order is `|00>, |01>, |10>, |11>`.

use crate::error::{Error, Result};
use crate::linalg::{entropy_of_spectrum, herm_eigvals, s2, DensityMatrix, TwoQubitState};
use crate::{ComplexMatrix, C64, DEFAULT_TOL};

/// Absolute tolerance on the eight off-X entries.
pub const X_SHAPE_TOL: f64 = 1e-9;

fn pauli(a: usize) -> [[C64; 2]; 2] {
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    match a {
        0 => [[one, z], [z, one]],
        1 => [[z, one], [one, z]],
        2 => [[z, -i], [i, z]],
        3 => [[one, z], [z, -one]],
        _ => unreachable!("pauli index"),
    }
}

fn pauli_pair(a: usize, b: usize) -> ComplexMatrix {
    let sa = pauli(a);
    let sb = pauli(b);
    ComplexMatrix::from_fn(4, 4, |r, c| sa[r / 2][c / 2] * sb[r % 2][c % 2].conj())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StokesVector(pub [f64; 4]);

impl StokesVector {
    pub const fn new(s0: f64, s1: f64, s2: f64, s3: f64) -> Self {
        Self([s0, s1, s2, s3])
    }

    /// `S0^2 - |S|^2`.
    pub fn minkowski_norm(&self) -> f64 {
        let [s0, s1, s2, s3] = self.0;
        s0 * s0 - s1 * s1 - s2 * s2 - s3 * s3
    }

    pub fn in_light_cone(&self, tol: f64) -> bool {
        self.0[0] > 0.0 && self.minkowski_norm() >= -tol
    }

    pub fn scaled(&self, w: f64) -> Self {
        Self(self.0.map(|s| s * w))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MuellerMatrix {
    pub m: [[f64; 4]; 4],
}

impl MuellerMatrix {
    pub fn new(m: [[f64; 4]; 4]) -> Self {
        Self { m }
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.m[a][b]
    }

    pub fn apply(&self, s: &StokesVector) -> StokesVector {
        let mut out = [0.0; 4];
        for (a, o) in out.iter_mut().enumerate() {
            *o = (0..4).map(|b| self.m[a][b] * s.0[b]).sum();
        }
        StokesVector(out)
    }

    /// Mueller matrix of the state with A and B exchanged.
    pub fn swap_sides(&self) -> Self {
        let sign = [1.0, 1.0, -1.0, 1.0];
        let mut m = [[0.0; 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                m[a][b] = sign[a] * sign[b] * self.m[b][a];
            }
        }
        Self { m }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut d: f64 = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                d = d.max((self.m[a][b] - other.m[a][b]).abs());
            }
        }
        d
    }

    /// Stokes vector of `rho_A`.
    pub fn stokes_a(&self) -> StokesVector {
        StokesVector([self.m[0][0], self.m[1][0], self.m[2][0], self.m[3][0]])
    }

    /// Stokes vector of `rho_B` (with the conjugated Pauli basis).
    pub fn stokes_b(&self) -> StokesVector {
        StokesVector(self.m[0])
    }
}

pub fn rho_to_mueller(rho: &TwoQubitState) -> Result<MuellerMatrix> {
    if rho.dim() != 4 {
        return Err(Error::InvalidState(format!("{}-dimensional state is not two-qubit", rho.dim())));
    }
    let r = rho.mat();
    let mut m = [[0.0; 4]; 4];
    for (a, row) in m.iter_mut().enumerate() {
        for (b, e) in row.iter_mut().enumerate() {
            *e = (r * &pauli_pair(a, b)).trace().re;
        }
    }
    Ok(MuellerMatrix { m })
}

pub fn mueller_to_rho(mm: &MuellerMatrix) -> Result<TwoQubitState> {
    mueller_to_rho_with_tol(mm, DEFAULT_TOL)
}

pub fn mueller_to_rho_with_tol(mm: &MuellerMatrix, tol: f64) -> Result<TwoQubitState> {
    let mut rho = ComplexMatrix::zeros(4, 4);
    for a in 0..4 {
        for b in 0..4 {
            if mm.m[a][b] != 0.0 {
                rho = &rho + &pauli_pair(a, b).scale_real(0.25 * mm.m[a][b]);
            }
        }
    }
    DensityMatrix::with_tol(rho, tol)
}

/// The five real parameters of an X-state in canonical form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XStateCanonical {
    pub m11: f64,
    pub m22: f64,
    pub m33: f64,
    pub m03: f64,
    pub m30: f64,
}

/// Local sign flip used to reach the canonical gauge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GaugeFlip {
    /// `sigma3 (x) sigma0`: negates `m11`, `m22`.
    Sigma3A,
    /// `sigma0 (x) sigma1`: negates `m22`, `m33`, `m03`.
    Sigma1B,
    /// `sigma1 (x) sigma1`: negates `m03`, `m30`.
    Sigma1Both,
}

impl XStateCanonical {
    pub const fn new(m11: f64, m22: f64, m33: f64, m03: f64, m30: f64) -> Self {
        Self { m11, m22, m33, m03, m30 }
    }

    /// From the six real X-state entries `(rho00, rho11, rho22, rho33)`, `rho03`, `rho12`.
    pub fn from_entries(diag: [f64; 4], r03: f64, r12: f64) -> Self {
        let [p0, p1, p2, p3] = diag;
        Self {
            m11: 2.0 * (r03 + r12),
            m22: 2.0 * (r03 - r12),
            m33: p0 + p3 - p1 - p2,
            m03: p0 + p2 - p1 - p3,
            m30: p0 + p1 - p2 - p3,
        }
    }

    /// `([rho00, rho11, rho22, rho33], rho03, rho12)`.
    pub fn entries(&self) -> ([f64; 4], f64, f64) {
        let Self { m11, m22, m33, m03, m30 } = *self;
        (
            [
                0.25 * (1.0 + m03 + m30 + m33),
                0.25 * (1.0 - m03 + m30 - m33),
                0.25 * (1.0 + m03 - m30 - m33),
                0.25 * (1.0 - m03 - m30 + m33),
            ],
            0.25 * (m11 + m22),
            0.25 * (m11 - m22),
        )
    }

    pub fn to_mueller(&self) -> MuellerMatrix {
        let Self { m11, m22, m33, m03, m30 } = *self;
        MuellerMatrix::new([
            [1.0, 0.0, 0.0, m03],
            [0.0, m11, 0.0, 0.0],
            [0.0, 0.0, m22, 0.0],
            [m30, 0.0, 0.0, m33],
        ])
    }

    /// Real 4x4 density matrix, without a positivity check.
    pub fn rho_matrix(&self) -> ComplexMatrix {
        let (d, r03, r12) = self.entries();
        let mut m = ComplexMatrix::diag_real(&d);
        m[(0, 3)] = C64::new(r03, 0.0);
        m[(3, 0)] = C64::new(r03, 0.0);
        m[(1, 2)] = C64::new(r12, 0.0);
        m[(2, 1)] = C64::new(r12, 0.0);
        m
    }

    pub fn to_rho(&self) -> Result<TwoQubitState> {
        DensityMatrix::new(self.rho_matrix())
    }

    pub fn flip(&self, f: GaugeFlip) -> Self {
        let mut x = *self;
        match f {
            GaugeFlip::Sigma3A => {
                x.m11 = -x.m11;
                x.m22 = -x.m22;
            }
            GaugeFlip::Sigma1B => {
                x.m22 = -x.m22;
                x.m33 = -x.m33;
                x.m03 = -x.m03;
            }
            GaugeFlip::Sigma1Both => {
                x.m03 = -x.m03;
                x.m30 = -x.m30;
            }
        }
        x
    }

    /// Flips, in order, bringing the state to `m11 >= 0`, `m33 - m03 m30 >= 0`
    /// and `m30 - m03 m33 >= 0`.
    pub fn gauge_flips(&self) -> Vec<GaugeFlip> {
        let mut flips = Vec::new();
        let mut x = *self;
        if x.m11 < 0.0 {
            flips.push(GaugeFlip::Sigma3A);
            x = x.flip(GaugeFlip::Sigma3A);
        }
        if x.m33 - x.m03 * x.m30 < 0.0 {
            flips.push(GaugeFlip::Sigma1B);
            x = x.flip(GaugeFlip::Sigma1B);
        }
        if x.m30 - x.m03 * x.m33 < 0.0 {
            flips.push(GaugeFlip::Sigma1Both);
        }
        flips
    }

    pub fn gauge_fixed(&self) -> Self {
        self.gauge_flips().into_iter().fold(*self, |x, f| x.flip(f))
    }

    /// The same state with the roles of A and B exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            m03: self.m30,
            m30: self.m03,
            ..*self
        }
    }

    /// `det M = m11 m22 (m33 - m03 m30)`.
    pub fn det(&self) -> f64 {
        self.m11 * self.m22 * (self.m33 - self.m03 * self.m30)
    }
}

/// Result of bringing an X-shaped state to canonical form.
#[derive(Clone, Debug, PartialEq)]
pub struct XCanonicalization {
    pub state: XStateCanonical,
    /// Phase of `rho_12`.
    pub phi1: f64,
    /// Phase of `rho_03`.
    pub phi2: f64,
    pub flips: Vec<GaugeFlip>,
}

/// Largest modulus among the entries outside the X pattern.
pub fn off_x_magnitude(m: &ComplexMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for r in 0..4 {
        for c in 0..4 {
            let on_x = r == c || r + c == 3;
            if !on_x {
                worst = worst.max(m[(r, c)].norm());
            }
        }
    }
    worst
}

/// Removes the phases of `rho_03`, `rho_12` by diagonal local unitaries
/// and fixes the sign gauge.
pub fn xstate_canonical(rho: &TwoQubitState) -> Result<XCanonicalization> {
    if rho.dim() != 4 {
        return Err(Error::InvalidState("not a two-qubit state".into()));
    }
    let m = rho.mat();
    let off = off_x_magnitude(m);
    if off > X_SHAPE_TOL {
        return Err(Error::NotXState { magnitude: off });
    }
    let r03 = m[(0, 3)];
    let r12 = m[(1, 2)];
    let diag = [m[(0, 0)].re, m[(1, 1)].re, m[(2, 2)].re, m[(3, 3)].re];
    let raw = XStateCanonical::from_entries(diag, r03.norm(), r12.norm());
    let flips = raw.gauge_flips();
    let state = flips.iter().fold(raw, |x, &f| x.flip(f));
    Ok(XCanonicalization {
        state,
        phi1: if r12.norm() > 0.0 { r12.arg() } else { 0.0 },
        phi2: if r03.norm() > 0.0 { r03.arg() } else { 0.0 },
        flips,
    })
}

/// Diagonal local unitaries `(U_A, U_B)` that strip the phases `phi1` (of
/// `rho_12`) and `phi2` (of `rho_03`) under `rho -> U rho U^dagger`.
pub fn phase_unitaries(phi1: f64, phi2: f64) -> ([C64; 2], [C64; 2]) {
    let e = |t: f64| C64::from_polar(1.0, t);
    (
        [e(-(2.0 * phi1 + phi2) / 4.0), e(phi2 / 4.0)],
        [e((2.0 * phi1 - phi2) / 4.0), e(phi2 / 4.0)],
    )
}

/// The two canonical positivity inequalities, within `tol`.
pub fn xstate_positivity(x: &XStateCanonical) -> bool {
    xstate_positivity_with_tol(x, DEFAULT_TOL)
}

pub fn xstate_positivity_with_tol(x: &XStateCanonical, tol: f64) -> bool {
    let XStateCanonical { m11, m22, m33, m03, m30 } = *x;
    let c1 = (1.0 + m33).powi(2) - (m30 + m03).powi(2) - (m11 + m22).powi(2);
    let c2 = (1.0 - m33).powi(2) - (m30 - m03).powi(2) - (m11 - m22).powi(2);
    c1 >= -tol && c2 >= -tol && m33.abs() <= 1.0 + tol
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConditionalState {
    pub probability: f64,
    pub bloch: [f64; 3],
}

impl ConditionalState {
    pub fn bloch_length(&self) -> f64 {
        self.bloch.iter().map(|b| b * b).sum::<f64>().sqrt()
    }
}

/// Outcome probability and normalised A-side Bloch vector for a B-side
/// element with Stokes vector `s_in`.
pub fn conditional_state(mm: &MuellerMatrix, s_in: &StokesVector) -> Result<ConditionalState> {
    if !s_in.in_light_cone(DEFAULT_TOL) {
        return Err(Error::Domain(format!("Stokes vector {:?} outside the light cone", s_in.0)));
    }
    let out = mm.apply(s_in);
    if out.0[0] < DEFAULT_TOL {
        return Err(Error::DegenerateOutcome);
    }
    Ok(ConditionalState {
        probability: out.0[0] / 2.0,
        bloch: [out.0[1] / out.0[0], out.0[2] / out.0[0], out.0[3] / out.0[0]],
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XStateEigensystem {
    /// `lambda[0], lambda[3]` from the `{|00>, |11>}` block, `lambda[1],
    /// lambda[2]` from `{|01>, |10>}`; upper sign first.
    pub lambda: [f64; 4],
    pub nu1: f64,
    pub nu2: f64,
    pub c_alpha: f64,
    pub s_alpha: f64,
    pub c_beta: f64,
    pub s_beta: f64,
}

impl XStateEigensystem {
    /// Real eigenvectors in the computational basis, in `lambda` order.
    pub fn eigenvectors(&self) -> [[f64; 4]; 4] {
        let (ca, sa, cb, sb) = (self.c_alpha, self.s_alpha, self.c_beta, self.s_beta);
        [
            [ca, 0.0, 0.0, sa],
            [0.0, cb, sb, 0.0],
            [0.0, -sb, cb, 0.0],
            [-sa, 0.0, 0.0, ca],
        ]
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        let vecs = self.eigenvectors();
        ComplexMatrix::from_fn(4, 4, |r, c| {
            let v: f64 = (0..4).map(|j| self.lambda[j] * vecs[j][r] * vecs[j][c]).sum();
            C64::new(v, 0.0)
        })
    }

    pub fn entropy(&self) -> f64 {
        entropy_of_spectrum(&self.lambda)
    }
}

fn block_angle(diff: f64, off: f64) -> (f64, f64, f64) {
    let rad = diff.hypot(off);
    if rad == 0.0 {
        return (1.0, 1.0, 0.0);
    }
    let nu = (diff / rad).clamp(-1.0, 1.0);
    let c = ((1.0 + nu) / 2.0).sqrt();
    let s = ((1.0 - nu) / 2.0).sqrt().copysign(off);
    (nu, c, if off == 0.0 { 0.0 } else { s })
}

pub fn xstate_eigensystem(x: &XStateCanonical) -> XStateEigensystem {
    let XStateCanonical { m11, m22, m33, m03, m30 } = *x;
    let r1 = (m11 + m22).hypot(m30 + m03);
    let r2 = (m11 - m22).hypot(m30 - m03);
    let (nu1, c_alpha, s_alpha) = block_angle(m30 + m03, m11 + m22);
    let (nu2, c_beta, s_beta) = block_angle(m30 - m03, m11 - m22);
    XStateEigensystem {
        lambda: [
            (1.0 + m33 + r1) / 4.0,
            (1.0 - m33 + r2) / 4.0,
            (1.0 - m33 - r2) / 4.0,
            (1.0 + m33 - r1) / 4.0,
        ],
        nu1,
        nu2,
        c_alpha,
        s_alpha,
        c_beta,
        s_beta,
    }
}

/// `I = S2(|m30|) + S2(|m03|) - S(rho)` in bits.
pub fn mutual_information(x: &XStateCanonical) -> f64 {
    let es = xstate_eigensystem(x);
    s2(x.m30) + s2(x.m03) - es.entropy()
}

/// Minimum eigenvalue of the reconstructed state (for diagnostics).
pub fn min_eigenvalue(x: &XStateCanonical) -> Result<f64> {
    Ok(herm_eigvals(&x.rho_matrix(), DEFAULT_TOL)?[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{partial_trace, von_neumann_entropy, Subsystem};
    use proptest::prelude::*;

    pub(crate) const EX1: XStateCanonical = XStateCanonical::new(0.76, 0.6, 0.8, 0.23, 0.3);

    fn bell() -> TwoQubitState {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let z = C64::new(0.0, 0.0);
        DensityMatrix::pure(&[C64::new(s, 0.0), z, z, C64::new(s, 0.0)]).unwrap()
    }

    fn is_diag(m: &MuellerMatrix, d: [f64; 4], tol: f64) -> bool {
        let mut want = [[0.0; 4]; 4];
        for i in 0..4 {
            want[i][i] = d[i];
        }
        m.max_abs_diff(&MuellerMatrix::new(want)) < tol
    }

    #[test]
    fn mueller_examples() {
        let mm = rho_to_mueller(&DensityMatrix::maximally_mixed(4)).unwrap();
        assert!(is_diag(&mm, [1.0, 0.0, 0.0, 0.0], 1e-15));
        let mb = rho_to_mueller(&bell()).unwrap();
        assert!(is_diag(&mb, [1.0, 1.0, 1.0, 1.0], 1e-15));

        let m1 = EX1.to_mueller();
        let rho = mueller_to_rho(&m1).unwrap();
        assert!(rho_to_mueller(&rho).unwrap().max_abs_diff(&m1) < 1e-12);
        assert!(crate::linalg::ppt_entangled(&rho).unwrap().entangled);

        let back = mueller_to_rho(&MuellerMatrix::new([
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ]))
        .unwrap();
        assert!(back.mat().max_abs_diff(bell().mat()) < 1e-15);
    }

    #[test]
    fn unphysical_mueller_is_rejected() {
        let m = XStateCanonical::new(1.2, 1.2, 1.0, 0.0, 0.0).to_mueller();
        assert!(matches!(mueller_to_rho(&m), Err(Error::NotPositive { .. })));
    }

    #[test]
    fn entries_round_trip() {
        let (d, r03, r12) = EX1.entries();
        let x = XStateCanonical::from_entries(d, r03, r12);
        assert!((x.m11 - EX1.m11).abs() < 1e-15 && (x.m30 - EX1.m30).abs() < 1e-15);
        // matches the dense construction
        let rho = mueller_to_rho(&EX1.to_mueller()).unwrap();
        assert!(rho.mat().max_abs_diff(&EX1.rho_matrix()) < 1e-15);
    }

    #[test]
    fn canonical_real_state_is_fixed() {
        let c = xstate_canonical(&EX1.to_rho().unwrap()).unwrap();
        assert_eq!(c.phi1, 0.0);
        assert_eq!(c.phi2, 0.0);
        assert!(c.flips.is_empty());
        assert!((c.state.m22 - EX1.m22).abs() < 1e-15);
    }

    #[test]
    fn canonical_strips_phases() {
        let mut m = EX1.rho_matrix();
        let ph = C64::from_polar(1.0, std::f64::consts::FRAC_PI_3);
        m[(0, 3)] *= ph;
        m[(3, 0)] *= ph.conj();
        let rho = DensityMatrix::new(m).unwrap();
        let c = xstate_canonical(&rho).unwrap();
        assert!((c.phi2 - std::f64::consts::FRAC_PI_3).abs() < 1e-15);
        let x = c.state;
        assert!((x.m11 - EX1.m11).abs() < 1e-14 && (x.m22 - EX1.m22).abs() < 1e-14);

        // conjugating by the returned unitaries gives the real state
        let (ua, ub) = phase_unitaries(c.phi1, c.phi2);
        let u = ComplexMatrix::from_fn(4, 4, |r, col| {
            if r == col { ua[r / 2] * ub[r % 2] } else { C64::new(0.0, 0.0) }
        });
        let conj = &(&u * rho.mat()) * &u.adjoint();
        assert!(conj.max_abs_diff(&EX1.rho_matrix()) < 1e-14);
    }

    #[test]
    fn canonical_bell_mixture_is_diagonal() {
        let p = [0.5, 0.1, 0.3, 0.1];
        let m = ComplexMatrix::from_real_rows(&[
            &[p[0] + p[1], 0.0, 0.0, p[0] - p[1]],
            &[0.0, p[2] + p[3], p[2] - p[3], 0.0],
            &[0.0, p[2] - p[3], p[2] + p[3], 0.0],
            &[p[0] - p[1], 0.0, 0.0, p[0] + p[1]],
        ])
        .scale_real(0.5);
        let c = xstate_canonical(&DensityMatrix::new(m).unwrap()).unwrap();
        let mm = c.state.to_mueller();
        let want = [
            1.0,
            p[0] + p[2] - p[1] - p[3],
            p[0] + p[3] - p[1] - p[2],
            p[0] + p[1] - p[2] - p[3],
        ];
        assert!(is_diag(&mm, want, 1e-15));
    }

    #[test]
    fn non_x_state_is_rejected() {
        let mut m = DensityMatrix::maximally_mixed(4).into_mat();
        m[(0, 1)] = C64::new(0.01, 0.0);
        m[(1, 0)] = C64::new(0.01, 0.0);
        let rho = DensityMatrix::new(m).unwrap();
        assert!(matches!(xstate_canonical(&rho), Err(Error::NotXState { .. })));
    }

    #[test]
    fn positivity_examples() {
        assert!(xstate_positivity(&XStateCanonical::new(0.0, 0.0, 0.0, 0.0, 0.0)));
        let b = XStateCanonical::new(1.0, 1.0, 1.0, 0.0, 0.0);
        assert!(xstate_positivity(&b));
        // both saturated: (1+1)^2 - 0 = (1+1)^2, (1-1)^2 - 0 = 0
        assert!(!xstate_positivity(&XStateCanonical::new(1.2, 1.2, 1.0, 0.0, 0.0)));
    }

    #[test]
    fn conditional_examples() {
        let id = MuellerMatrix::new([
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0],
        ]);
        let c = conditional_state(&id, &StokesVector::new(1.0, 0.6, 0.0, 0.8)).unwrap();
        assert_eq!(c.probability, 0.5);
        assert_eq!(c.bloch, [0.0; 3]);

        let m = EX1.to_mueller();
        let c = conditional_state(&m, &StokesVector::new(1.0, 0.0, 0.0, 1.0)).unwrap();
        assert!((c.bloch[2] - (0.3 + 0.8) / (1.0 + 0.23)).abs() < 1e-15);
        assert!((c.probability - 1.23 / 2.0).abs() < 1e-15);

        let c = conditional_state(&m, &StokesVector::new(1.0, 0.0, 0.0, 0.0)).unwrap();
        assert_eq!(c.bloch, [0.0, 0.0, 0.3]);

        assert!(conditional_state(&m, &StokesVector::new(1.0, 1.0, 1.0, 0.0)).is_err());
    }

    #[test]
    fn eigensystem_examples() {
        let e = xstate_eigensystem(&XStateCanonical::new(0.0, 0.0, 0.0, 0.0, 0.0));
        assert_eq!(e.lambda, [0.25; 4]);
        let e = xstate_eigensystem(&XStateCanonical::new(1.0, 1.0, 1.0, 0.0, 0.0));
        assert_eq!(e.lambda, [1.0, 0.0, 0.0, 0.0]);

        let e = xstate_eigensystem(&EX1);
        let mut l = e.lambda.to_vec();
        l.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let dense = herm_eigvals(&EX1.rho_matrix(), 1e-12).unwrap();
        for (a, b) in l.iter().zip(&dense) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!((e.lambda.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(e.reconstruct().max_abs_diff(&EX1.rho_matrix()) < 1e-10);
    }

    #[test]
    fn mutual_information_examples() {
        assert!((mutual_information(&XStateCanonical::new(1.0, 1.0, 1.0, 0.0, 0.0)) - 2.0).abs() < 1e-12);
        assert!(mutual_information(&XStateCanonical::new(0.0, 0.0, 0.0, 0.0, 0.0)).abs() < 1e-12);

        let rho = EX1.to_rho().unwrap();
        let sa = von_neumann_entropy(&partial_trace(&rho, (2, 2), Subsystem::B).unwrap()).unwrap();
        let sb = von_neumann_entropy(&partial_trace(&rho, (2, 2), Subsystem::A).unwrap()).unwrap();
        let sab = von_neumann_entropy(&rho).unwrap();
        assert!((mutual_information(&EX1) - (sa + sb - sab)).abs() < 1e-10);
    }

    #[test]
    fn swap_sides_matches_dense_swap() {
        let rho = EX1.to_rho().unwrap();
        let swap = ComplexMatrix::from_fn(4, 4, |r, c| {
            let target = (r % 2) * 2 + r / 2;
            C64::new(if c == target { 1.0 } else { 0.0 }, 0.0)
        });
        let swapped = DensityMatrix::new(&(&swap * rho.mat()) * &swap).unwrap();
        let m = rho_to_mueller(&swapped).unwrap();
        assert!(m.max_abs_diff(&EX1.to_mueller().swap_sides()) < 1e-15);
        assert!(m.max_abs_diff(&EX1.swapped().to_mueller()) < 1e-15);
    }

    fn arb_state() -> impl Strategy<Value = TwoQubitState> {
        prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 16).prop_map(|v| {
            let g = ComplexMatrix::from_vec(4, 4, v.into_iter().map(|(a, b)| C64::new(a, b)).collect()).unwrap();
            let p = &g * &g.adjoint();
            let t = p.trace().re;
            DensityMatrix::new(p.scale_real(1.0 / t)).unwrap()
        })
    }

    pub(crate) fn arb_xstate() -> impl Strategy<Value = XStateCanonical> {
        (
            prop::array::uniform4(0.01..1.0f64),
            -1.0..1.0f64,
            -1.0..1.0f64,
        )
            .prop_map(|(w, u, v)| {
                let t: f64 = w.iter().sum();
                let p = w.map(|x| x / t);
                XStateCanonical::from_entries(p, u * (p[0] * p[3]).sqrt(), v * (p[1] * p[2]).sqrt())
            })
    }

    proptest! {
        #[test]
        fn mueller_round_trip(rho in arb_state()) {
            let m = rho_to_mueller(&rho).unwrap();
            prop_assert!((m.m[0][0] - 1.0).abs() < 1e-12);
            let back = mueller_to_rho(&m).unwrap();
            prop_assert!(rho_to_mueller(&back).unwrap().max_abs_diff(&m) < 1e-12);
            prop_assert!(back.mat().max_abs_diff(rho.mat()) < 1e-12);
        }

        #[test]
        fn leading_row_and_column_are_marginals(rho in arb_state()) {
            let m = rho_to_mueller(&rho).unwrap();
            let ra = partial_trace(&rho, (2, 2), Subsystem::B).unwrap();
            let rb = partial_trace(&rho, (2, 2), Subsystem::A).unwrap();
            let stokes = |r: &ComplexMatrix, conj: bool| {
                let y = 2.0 * r[(1, 0)].im;
                [1.0, 2.0 * r[(0, 1)].re, if conj { -y } else { y }, (r[(0, 0)] - r[(1, 1)]).re]
            };
            let sa = stokes(ra.mat(), false);
            let sb = stokes(rb.mat(), true);
            for k in 0..4 {
                prop_assert!((m.stokes_a().0[k] - sa[k]).abs() < 1e-12);
                prop_assert!((m.stokes_b().0[k] - sb[k]).abs() < 1e-12);
            }
        }

        #[test]
        fn positivity_matches_spectrum(m11 in -1.2..1.2f64, m22 in -1.2..1.2f64, m33 in -1.0..1.0f64,
                                       m03 in -1.0..1.0f64, m30 in -1.0..1.0f64) {
            let x = XStateCanonical::new(m11, m22, m33, m03, m30);
            let min = herm_eigvals(&x.rho_matrix(), 1e-12).unwrap()[0];
            // stay off the boundary where the two tolerances differ in meaning
            prop_assume!(min.abs() > 1e-7);
            prop_assert_eq!(xstate_positivity(&x), min >= -1e-9);
        }

        #[test]
        fn von_neumann_outcomes_sum_to_one(x in arb_xstate(), th in 0.0..std::f64::consts::PI, ph in 0.0..6.3f64) {
            let n = [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()];
            let m = x.to_mueller();
            let mut total = 0.0;
            for s in [1.0, -1.0] {
                let sv = StokesVector::new(1.0, s * n[0], s * n[1], s * n[2]);
                total += m.apply(&sv).0[0] / 2.0;
                if let Ok(c) = conditional_state(&m, &sv) {
                    prop_assert!(c.bloch_length() <= 1.0 + 1e-9);
                }
            }
            prop_assert!((total - 1.0).abs() < 1e-12);
        }

        #[test]
        fn gauge_fix_reaches_sign_pattern(x in arb_xstate()) {
            let g = x.gauge_fixed();
            prop_assert!(g.m11 >= 0.0);
            prop_assert!(g.m33 - g.m03 * g.m30 >= 0.0);
            prop_assert!(g.m30 - g.m03 * g.m33 >= 0.0);
            let e0 = xstate_eigensystem(&x).entropy();
            let e1 = xstate_eigensystem(&g).entropy();
            prop_assert!((e0 - e1).abs() < 1e-12);
        }

        #[test]
        fn eigensystem_reconstructs(x in arb_xstate()) {
            let e = xstate_eigensystem(&x);
            prop_assert!((e.lambda.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(e.reconstruct().max_abs_diff(&x.rho_matrix()) < 1e-10);
        }
    }
}
