//! Correlation ellipsoid of an X-state and the single-variable discord
//! optimisation built on it.
//!
//! For an X-state in canonical gauge the set of A-side conditional states
//! reachable by rank-one B-side elements is an axis-aligned ellipsoid with
//! semi-axes `(a_x, a_y, a_z)` centred at `(0, 0, z_c)`. The image of the
//! maximally mixed input sits at `(0, 0, z_I)`. Optimal measurements are
//! either the vertical (z) projection, the horizontal (x) projection, or a
//! three-element POVM whose lower pair of conditional states sits at height
//! `z0`, the unique zero of [`derivative_g`].

use std::f64::consts::{FRAC_PI_2, LN_2};

use crate::error::{Error, Result};
use crate::linalg::{s2, ppt_entangled, TwoQubitState, Subsystem};
use crate::mueller::{
    conditional_state, mutual_information, xstate_canonical, xstate_eigensystem, xstate_positivity,
    StokesVector, XStateCanonical,
};
use crate::roots::{bisect, golden_min, grid_then_golden};
use crate::DEFAULT_TOL;

/// Below this `a_z` the ellipsoid is treated as flat.
pub const DEGENERATE_AZ: f64 = 1e-9;
/// Margin used when deciding wedge membership; boundary points count as
/// von Neumann.
pub const WEDGE_MARGIN: f64 = 1e-9;
const Z_TOL: f64 = 1e-12;
const ROOT_ITERS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrelationEllipsoid {
    pub a_x: f64,
    pub a_y: f64,
    pub a_z: f64,
    pub z_c: f64,
    pub z_i: f64,
    /// Sign of `det M`.
    pub det_sign: i8,
    /// True when the longer transverse axis lies along y in the state frame.
    pub swapped: bool,
    /// `m03` of the representative state, `(z_I - z_c) / a_z` unless the
    /// ellipsoid is flat.
    pub tilt: f64,
}

impl CorrelationEllipsoid {
    pub fn new(a_x: f64, a_y: f64, a_z: f64, z_c: f64, z_i: f64, det_sign: i8) -> Result<Self> {
        let tilt = if a_z > DEGENERATE_AZ { ((z_i - z_c) / a_z).clamp(-1.0, 1.0) } else { 0.0 };
        Self::with_tilt(a_x, a_y, a_z, z_c, z_i, det_sign, tilt)
    }

    /// Flat ellipsoids do not fix `m03` through `z_I`; this constructor takes it explicitly.
    pub fn with_tilt(a_x: f64, a_y: f64, a_z: f64, z_c: f64, z_i: f64, det_sign: i8, tilt: f64) -> Result<Self> {
        let tol = 1e-9;
        let all = [a_x, a_y, a_z, z_c, z_i, tilt];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        if a_x < 0.0 || a_y < 0.0 || a_z < 0.0 {
            return Err(Error::Domain("negative semi-axis".into()));
        }
        if a_x.max(a_y) > 1.0 + tol || z_c.abs() + a_z > 1.0 + tol {
            return Err(Error::Domain("ellipsoid leaves the unit ball".into()));
        }
        if z_i < z_c - a_z - tol || z_i > z_c + a_z + tol {
            return Err(Error::Domain(format!("z_I = {z_i} outside the z-extent")));
        }
        if tilt.abs() >= 1.0 && a_z > DEGENERATE_AZ {
            return Err(Error::Domain("z_I on the ellipsoid boundary (|m03| = 1)".into()));
        }
        let swapped = a_y > a_x;
        let (a_x, a_y) = if swapped { (a_y, a_x) } else { (a_x, a_y) };
        Ok(Self {
            a_x,
            a_y,
            a_z,
            z_c,
            z_i,
            det_sign: if det_sign < 0 { -1 } else { 1 },
            swapped,
            tilt,
        })
    }

    pub fn is_flat(&self) -> bool {
        self.a_z < DEGENERATE_AZ
    }

    pub fn z_bottom(&self) -> f64 {
        self.z_c - self.a_z
    }

    pub fn z_top(&self) -> f64 {
        self.z_c + self.a_z
    }

    /// Distance from the origin of the surface point at height `z` in the x-z plane.
    pub fn r(&self, z: f64) -> f64 {
        let t = if self.a_z > 0.0 { (z - self.z_c) / self.a_z } else { 0.0 };
        let x2 = self.a_x * self.a_x * (1.0 - t * t).max(0.0);
        (z * z + x2).sqrt()
    }

    /// `x(z)` on the x-z section.
    pub fn x(&self, z: f64) -> f64 {
        let t = if self.a_z > 0.0 { (z - self.z_c) / self.a_z } else { 0.0 };
        self.a_x * (1.0 - t * t).max(0.0).sqrt()
    }

    /// `f(z) = S2(r(z))`.
    pub fn f(&self, z: f64) -> f64 {
        s2(self.r(z))
    }
}

pub fn ellipsoid_from_x(x: &XStateCanonical) -> Result<CorrelationEllipsoid> {
    let g = x.gauge_fixed();
    let d = 1.0 - g.m03 * g.m03;
    if g.m03.abs() >= 1.0 - 1e-12 {
        return Err(Error::SingularInput(format!("|m03| = {} leaves no ellipsoid", g.m03.abs())));
    }
    let a_x = g.m11.abs() / d.sqrt();
    let a_y = g.m22.abs() / d.sqrt();
    let a_z = (g.m33 - g.m03 * g.m30).abs() / d;
    let z_c = (g.m30 - g.m03 * g.m33) / d;
    let sign = if g.m22 < 0.0 { -1 } else { 1 };
    CorrelationEllipsoid::with_tilt(a_x, a_y, a_z, z_c, g.m30, sign, g.m03)
}

pub fn x_from_ellipsoid(e: &CorrelationEllipsoid) -> Result<XStateCanonical> {
    let t = e.tilt;
    let k = (1.0 - t * t).sqrt();
    let (long, short) = (e.a_x * k, e.a_y * k * f64::from(e.det_sign));
    let (m11, m22) = if e.swapped { (e.a_y * k, e.a_x * k * f64::from(e.det_sign)) } else { (long, short) };
    let x = XStateCanonical::new(m11, m22, e.a_z * k * k + t * e.z_i, t, e.z_i);
    if !xstate_positivity(&x) {
        return Err(Error::NotPhysical("ellipsoid does not bound a positive state".into()));
    }
    Ok(x)
}

/// `X(r) = atanh(r) / (r ln 2)`, i.e. `(1/2r) log2((1+r)/(1-r))`.
fn x_fun(r: f64) -> f64 {
    if r < 1e-6 {
        (1.0 + r * r / 3.0) / LN_2
    } else {
        r.atanh() / (r * LN_2)
    }
}

/// `Y(r) = 1 / (ln 2 (1 - r^2))`.
fn y_fun(r: f64) -> f64 {
    1.0 / (LN_2 * (1.0 - r * r))
}

/// `(Y - X) / r^2`, finite at `r = 0`.
fn y_minus_x_over_r2(r: f64) -> f64 {
    if r < 1e-3 {
        let r2 = r * r;
        (2.0 / 3.0 + r2 * (4.0 / 5.0 + r2 * (6.0 / 7.0 + r2 * 8.0 / 9.0))) / LN_2
    } else {
        (y_fun(r) - x_fun(r)) / (r * r)
    }
}

/// Average conditional entropy of the three-element scheme whose lower pair
/// of conditional states sits at height `z`.
pub fn cond_entropy_z(e: &CorrelationEllipsoid, z: f64) -> Result<f64> {
    if e.is_flat() {
        return Err(Error::DegenerateEllipsoid { a_z: e.a_z });
    }
    let lo = e.z_bottom();
    let hi = e.z_i.min(e.z_top());
    if z < lo - Z_TOL || z > hi + Z_TOL {
        return Err(Error::Domain(format!("z = {z} outside [{lo}, {hi}]")));
    }
    let z = z.clamp(lo, hi);
    let top = e.z_top();
    let span = top - z;
    if span < Z_TOL {
        return Ok(e.f(z));
    }
    let p1 = (e.z_i - z) / span;
    let p2 = (top - e.z_i) / span;
    Ok(p1 * e.f(top) + p2 * e.f(z))
}

/// `G` with `dS^A/dz = (z_c + a_z - z_I) G`; its sign does not depend on `z_I`.
pub fn derivative_g(e: &CorrelationEllipsoid, z: f64) -> Result<f64> {
    if e.is_flat() {
        return Err(Error::DegenerateEllipsoid { a_z: e.a_z });
    }
    let top = e.z_top();
    if z < e.z_bottom() - Z_TOL || z > top + Z_TOL {
        return Err(Error::Domain(format!("z = {z} outside the ellipsoid")));
    }
    let r = e.r(z);
    if r >= 1.0 - 1e-12 {
        return Err(Error::Singularity { z, r });
    }
    let h = top - z;
    if h < 1e-7 {
        return g_at_top(e);
    }
    let ax2 = e.a_x * e.a_x;
    let slope = x_fun(r) * (ax2 * (z - e.z_c) / (e.a_z * e.a_z) - z);
    Ok((h * slope - (e.f(top) - e.f(z))) / (h * h))
}

/// Limit of `G` at the top of the ellipsoid, `-f''(z_c + a_z) / 2`.
fn g_at_top(e: &CorrelationEllipsoid) -> Result<f64> {
    let top = e.z_top();
    let r = top.abs();
    if r >= 1.0 - 1e-12 {
        return Err(Error::Singularity { z: top, r });
    }
    let ax2 = e.a_x * e.a_x;
    let du = 2.0 * top - 2.0 * ax2 / e.a_z;
    let ddu = 2.0 - 2.0 * ax2 / (e.a_z * e.a_z);
    let g1 = -x_fun(r) / 2.0;
    let g2 = -y_minus_x_over_r2(r) / 4.0;
    let f2 = g2 * du * du + g1 * ddu;
    Ok(-f2 / 2.0)
}

fn check_boundary_domain(a_z: f64, z_c: f64) -> Result<()> {
    if a_z.is_nan() || a_z <= 0.0 || z_c < 0.0 || z_c + a_z >= 1.0 {
        return Err(Error::Domain(format!("boundary curves need a_z > 0, z_c >= 0, z_c + a_z < 1 (got {a_z}, {z_c})")));
    }
    Ok(())
}

/// `a_x` below which the vertical projection is optimal.
pub fn boundary_ax_v(a_z: f64, z_c: f64) -> Result<f64> {
    check_boundary_domain(a_z, z_c)?;
    let lo = (z_c - a_z).abs();
    let top = z_c + a_z;
    let v = (s2(lo) - s2(top)) / (2.0 * x_fun(lo)) - a_z * (z_c - a_z);
    Ok(v.max(0.0).sqrt())
}

/// `a_x` above which the horizontal projection is optimal.
pub fn boundary_ax_h(a_z: f64, z_c: f64) -> Result<f64> {
    check_boundary_domain(a_z, z_c)?;
    let top = z_c + a_z;
    let x = x_fun(top);
    let y = y_fun(top);
    let ymx = top * top * y_minus_x_over_r2(top);
    let d = z_c - a_z;
    let w = x * (d * d * x + 4.0 * a_z * z_c * y);
    let v = top / (2.0 * ymx) * (d * x + 2.0 * a_z * y - w.sqrt());
    Ok(v.max(0.0).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Wedge {
    pub ax_v: f64,
    pub ax_h: f64,
}

impl Wedge {
    pub fn of(e: &CorrelationEllipsoid) -> Result<Self> {
        Ok(Self {
            ax_v: boundary_ax_v(e.a_z, e.z_c)?,
            ax_h: boundary_ax_h(e.a_z, e.z_c)?,
        })
    }

    pub fn contains(&self, a_x: f64) -> bool {
        a_x > self.ax_v + WEDGE_MARGIN && a_x < self.ax_h - WEDGE_MARGIN
    }
}

/// Zero of `G` when `a_x` lies strictly inside the wedge, otherwise `None`.
pub fn find_z0(e: &CorrelationEllipsoid) -> Result<Option<f64>> {
    if e.is_flat() {
        return Ok(None);
    }
    let w = Wedge::of(e)?;
    if !w.contains(e.a_x) {
        return Ok(None);
    }
    let lo = e.z_bottom();
    let hi = e.z_top();
    let glo = derivative_g(e, lo)?;
    let ghi = g_at_top(e)?;
    if !(glo < 0.0 && ghi > 0.0) {
        return Err(Error::BracketFailure(format!(
            "G = {glo:e} at the bottom and {ghi:e} at the top inside the wedge"
        )));
    }
    bisect(|z| derivative_g(e, z), lo, hi, Z_TOL, ROOT_ITERS).map(Some)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasurementKind {
    VonNeumannZ,
    VonNeumannX,
    ThreeElement,
}

impl MeasurementKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::VonNeumannZ => "von-neumann-z",
            Self::VonNeumannX => "von-neumann-x",
            Self::ThreeElement => "three-element",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PovmElement {
    pub weight: f64,
    pub stokes: StokesVector,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimalMeasurement {
    pub kind: MeasurementKind,
    pub z0: Option<f64>,
    pub theta: Option<f64>,
    pub sa_min: f64,
    pub povm: Vec<PovmElement>,
}

fn element(weight: f64, s: [f64; 4]) -> PovmElement {
    PovmElement { weight, stokes: StokesVector(s) }
}

/// Three-element scheme at angle `theta`, in the plane of the long axis.
pub fn three_element_povm(theta: f64, long_axis_y: bool) -> Vec<PovmElement> {
    let (s, c) = theta.sin_cos();
    let p0 = c / (1.0 + c);
    let p1 = 1.0 / (2.0 * (1.0 + c));
    let side = |sg: f64| {
        if long_axis_y { [1.0, 0.0, sg * s, -c] } else { [1.0, sg * s, 0.0, -c] }
    };
    vec![element(2.0 * p0, [1.0, 0.0, 0.0, 1.0]), element(2.0 * p1, side(1.0)), element(2.0 * p1, side(-1.0))]
}

/// Angle of the three-element scheme whose lower pair lands at height `z`.
pub fn theta_for_z(e: &CorrelationEllipsoid, z: f64) -> f64 {
    let t = e.tilt;
    let m33 = e.a_z * (1.0 - t * t) + t * e.z_i;
    let den = m33 - z * t;
    let c = if den.abs() > 0.0 { (e.z_i - z) / den } else { 0.0 };
    c.clamp(0.0, 1.0).acos()
}

fn vn_z(sa: f64) -> OptimalMeasurement {
    OptimalMeasurement {
        kind: MeasurementKind::VonNeumannZ,
        z0: None,
        theta: None,
        sa_min: sa,
        povm: vec![element(1.0, [1.0, 0.0, 0.0, 1.0]), element(1.0, [1.0, 0.0, 0.0, -1.0])],
    }
}

fn vn_x(e: &CorrelationEllipsoid, sa: f64) -> OptimalMeasurement {
    let (p, m) = if e.swapped {
        ([1.0, 0.0, 1.0, 0.0], [1.0, 0.0, -1.0, 0.0])
    } else {
        ([1.0, 1.0, 0.0, 0.0], [1.0, -1.0, 0.0, 0.0])
    };
    OptimalMeasurement {
        kind: MeasurementKind::VonNeumannX,
        z0: None,
        theta: None,
        sa_min: sa,
        povm: vec![element(1.0, p), element(1.0, m)],
    }
}

fn three(e: &CorrelationEllipsoid, z0: f64, sa: f64) -> OptimalMeasurement {
    let theta = theta_for_z(e, z0);
    OptimalMeasurement {
        kind: MeasurementKind::ThreeElement,
        z0: Some(z0),
        theta: Some(theta),
        sa_min: sa,
        povm: three_element_povm(theta, e.swapped),
    }
}

/// The minimising B-side measurement and `S^A_min`.
pub fn optimal_measurement(e: &CorrelationEllipsoid) -> Result<OptimalMeasurement> {
    if e.is_flat() {
        // flat section: the horizontal projection wins
        let x_i = e.a_x * (1.0 - e.tilt * e.tilt).max(0.0).sqrt();
        let sa = s2(x_i.hypot(e.z_c));
        return Ok(if e.a_x == 0.0 { vn_z(sa) } else { vn_x(e, sa) });
    }
    let s_z = cond_entropy_z(e, e.z_bottom())?;
    let s_x = cond_entropy_z(e, e.z_i.min(e.z_top()))?;
    let wedge = if e.z_top() < 1.0 - 1e-12 { Wedge::of(e).ok() } else { None };
    if let Some(w) = wedge {
        match find_z0(e) {
            Ok(None) => {
                return Ok(if e.a_x <= w.ax_v + WEDGE_MARGIN { vn_z(s_z) } else { vn_x(e, s_x) });
            }
            Ok(Some(z0)) => {
                if e.z_i <= z0 + Z_TOL {
                    return Ok(vn_x(e, s_x));
                }
                return Ok(three(e, z0, cond_entropy_z(e, z0)?));
            }
            Err(_) => {}
        }
    }
    golden_fallback(e, s_z, s_x)
}

fn golden_fallback(e: &CorrelationEllipsoid, s_z: f64, s_x: f64) -> Result<OptimalMeasurement> {
    let lo = e.z_bottom();
    let hi = e.z_i.min(e.z_top());
    let (z, s) = if hi - lo > Z_TOL {
        golden_min(|z| cond_entropy_z(e, z).unwrap_or(f64::INFINITY), lo, hi, Z_TOL, ROOT_ITERS)
    } else {
        (lo, s_z)
    };
    let best_end = s_z.min(s_x);
    if s < best_end - 1e-12 && z > lo + Z_TOL && z < hi - Z_TOL {
        return Ok(three(e, z, s));
    }
    Ok(if s_z <= s_x { vn_z(s_z) } else { vn_x(e, s_x) })
}

/// Average conditional entropy after the von Neumann measurement at angle
/// `theta` from the z-axis in the x-z plane.
pub fn vn_entropy_theta(x: &XStateCanonical, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    let XStateCanonical { m11, m33, m03, m30, .. } = *x;
    let p = 1.0 + m03 * c;
    let q = 1.0 - m03 * c;
    let r = if p > 0.0 { (m11 * s).hypot(m30 + m33 * c) / p } else { 0.0 };
    let rp = if q > 0.0 { (m11 * s).hypot(m30 - m33 * c) / q } else { 0.0 };
    let (a, b) = (s2(r), s2(rp));
    0.5 * (a + b + m03 * c * (a - b))
}

/// Best von Neumann measurement in the x-z plane: `(theta, S^A)`.
pub fn best_von_neumann(x: &XStateCanonical) -> (f64, f64) {
    grid_then_golden(|t| vn_entropy_theta(x, t), 0.0, FRAC_PI_2, 2000)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Correlations {
    pub discord: f64,
    pub classical: f64,
    pub mutual: f64,
    pub sa_min: f64,
    pub measurement: OptimalMeasurement,
}

/// Discord, classical correlation and mutual information with the
/// measurement on B.
pub fn correlations(x: &XStateCanonical) -> Result<Correlations> {
    let g = x.gauge_fixed();
    let mutual = mutual_information(&g);
    let measurement = if g.m03.abs() >= 1.0 - 1e-12 {
        // B is pure: every outcome leaves A in rho_A
        OptimalMeasurement {
            kind: MeasurementKind::VonNeumannZ,
            z0: None,
            theta: None,
            sa_min: s2(g.m30),
            povm: vec![element(1.0, [1.0, 0.0, 0.0, 1.0]), element(1.0, [1.0, 0.0, 0.0, -1.0])],
        }
    } else {
        optimal_measurement(&ellipsoid_from_x(&g)?)?
    };
    let sa_min = measurement.sa_min;
    let classical = s2(g.m30) - sa_min;
    Ok(Correlations {
        discord: mutual - classical,
        classical,
        mutual,
        sa_min,
        measurement,
    })
}

/// As [`correlations`], with the measurement on the chosen side.
pub fn correlations_measuring(x: &XStateCanonical, side: Subsystem) -> Result<Correlations> {
    match side {
        Subsystem::B => correlations(x),
        Subsystem::A => correlations(&x.swapped()),
    }
}

pub fn correlations_of_ellipsoid(e: &CorrelationEllipsoid) -> Result<Correlations> {
    let x = x_from_ellipsoid(e)?;
    let mutual = mutual_information(&x);
    let measurement = optimal_measurement(e)?;
    let classical = s2(e.z_i) - measurement.sa_min;
    Ok(Correlations {
        discord: mutual - classical,
        classical,
        mutual,
        sa_min: measurement.sa_min,
        measurement,
    })
}

/// Entanglement of formation of the complementary pair (C, A) of a
/// purification, equal to `S^A_min`.
pub fn eof_complementary(x: &XStateCanonical) -> Result<f64> {
    Ok(correlations(x)?.sa_min)
}

/// Brute-force `S^A_min`: three-element schemes on a `theta` grid in both
/// transverse planes, evaluated through the Mueller matrix, then refined.
pub fn brute_force_sa_min(x: &XStateCanonical, n_grid: usize) -> f64 {
    let m = x.gauge_fixed().to_mueller();
    let eval = |theta: f64, y_plane: bool| -> f64 {
        three_element_povm(theta, y_plane)
            .iter()
            .map(|el| match conditional_state(&m, &el.stokes.scaled(el.weight)) {
                Ok(c) => c.probability * s2(c.bloch_length()),
                Err(_) => 0.0,
            })
            .sum()
    };
    [false, true]
        .into_iter()
        .map(|y| grid_then_golden(|t| eval(t, y), 0.0, FRAC_PI_2, n_grid).1)
        .fold(f64::INFINITY, f64::min)
}

/// Shift of `z_I` by a B-side boost with velocity `t` (composed with the
/// current tilt); the shape is untouched.
pub fn boost_zi(e: &CorrelationEllipsoid, t: f64) -> Result<CorrelationEllipsoid> {
    if t.is_nan() || t.abs() >= 1.0 {
        return Err(Error::Domain(format!("boost velocity {t} outside (-1, 1)")));
    }
    let t0 = e.tilt;
    let tn = (t0 + t) / (1.0 + t0 * t);
    let mut out = *e;
    out.tilt = tn;
    if !e.is_flat() {
        out.z_i = e.z_c + e.a_z * tn;
    }
    Ok(out)
}

pub fn ellipsoid_separable(e: &CorrelationEllipsoid) -> bool {
    (1.0 - e.a_z).powi(2) - e.z_c * e.z_c >= (e.a_x + e.a_y).powi(2) - DEFAULT_TOL
}

/// Largest volume fraction (relative to the Bloch ball) of a separable
/// ellipsoid centred at height `z_c`.
pub fn max_separable_volume(z_c: f64) -> f64 {
    let q = (1.0 + 3.0 * z_c * z_c).sqrt();
    (2.0 - q).powi(2) * (1.0 + q) / 54.0
}

#[derive(Clone, Debug, PartialEq)]
pub enum ZeroDiscordClass {
    NotZero,
    /// `1/4 [1 + a 1(x)s3 + b s1(x)s1]`, zero discord for measurements on A.
    OneWayA { a: f64, b: f64 },
    /// `1/4 [1 + a s3(x)1 + b s1(x)s1]`, zero discord for measurements on B.
    OneWayB { a: f64, b: f64 },
    /// Diagonal in the product basis.
    TwoWayDiagonal { p: [f64; 4] },
}

impl ZeroDiscordClass {
    pub fn is_locally_diagonalizable(&self) -> bool {
        match self {
            Self::TwoWayDiagonal { .. } => true,
            Self::OneWayA { a, .. } | Self::OneWayB { a, .. } => a.abs() <= ZERO_DISCORD_TOL,
            Self::NotZero => false,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Self::NotZero => "not-zero",
            Self::OneWayA { .. } => "one-way-a",
            Self::OneWayB { .. } => "one-way-b",
            Self::TwoWayDiagonal { .. } => "two-way-diagonal",
        }
    }
}

pub const ZERO_DISCORD_TOL: f64 = 1e-9;

pub fn classify_zero_discord(rho: &TwoQubitState) -> Result<ZeroDiscordClass> {
    let c = xstate_canonical(rho)?;
    let x = c.state;
    let small = |v: f64| v.abs() <= ZERO_DISCORD_TOL;
    if small(x.m11) && small(x.m22) {
        let m = rho.mat();
        return Ok(ZeroDiscordClass::TwoWayDiagonal {
            p: [m[(0, 0)].re, m[(1, 1)].re, m[(2, 2)].re, m[(3, 3)].re],
        });
    }
    if !small(x.m22) || !small(x.m33) {
        return Ok(ZeroDiscordClass::NotZero);
    }
    if small(x.m30) {
        return Ok(ZeroDiscordClass::OneWayA { a: x.m03, b: x.m11 });
    }
    if small(x.m03) {
        return Ok(ZeroDiscordClass::OneWayB { a: x.m30, b: x.m11 });
    }
    Ok(ZeroDiscordClass::NotZero)
}

/// Families with closed-form correlations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpecialFamily {
    /// Centred with `a_x = a_z = gamma1`.
    Circular { gamma1: f64, gamma2: f64, theta: f64 },
    /// Circular with `|gamma2| = gamma1`.
    Spherical { gamma1: f64, gamma2: f64, theta: f64 },
    /// Mixture of the four Bell states with weights `p`.
    BellMixture { p: [f64; 4] },
    /// Flat section (`a_z = 0`).
    Linear { gamma1: f64, gamma2: f64, gamma3: f64, theta: f64 },
}

impl SpecialFamily {
    pub fn state(&self) -> XStateCanonical {
        match *self {
            Self::Circular { gamma1, gamma2, theta } | Self::Spherical { gamma1, gamma2, theta } => {
                let (s, c) = theta.sin_cos();
                XStateCanonical::new(gamma1 * c, gamma2 * c, gamma1, s, gamma1 * s)
            }
            Self::BellMixture { p } => XStateCanonical::new(
                p[0] + p[2] - p[1] - p[3],
                p[0] + p[3] - p[1] - p[2],
                p[0] + p[1] - p[2] - p[3],
                0.0,
                0.0,
            ),
            Self::Linear { gamma1, gamma2, gamma3, theta } => {
                let (s, c) = theta.sin_cos();
                XStateCanonical::new(gamma1 * c, gamma2 * c, gamma3 * s, s, gamma3)
            }
        }
    }

    fn check(&self) -> Result<()> {
        let tol = DEFAULT_TOL;
        let ok = match *self {
            Self::Circular { gamma1, gamma2, .. } => {
                gamma1 >= 0.0 && gamma2.abs() <= gamma1 + tol && gamma1 + (gamma1 - gamma2).abs() <= 1.0 + tol
            }
            Self::Spherical { gamma1, gamma2, .. } => {
                gamma1 >= 0.0 && (gamma2.abs() - gamma1).abs() <= tol && gamma1 + (gamma1 - gamma2).abs() <= 1.0 + tol
            }
            Self::BellMixture { p } => {
                p.iter().all(|&q| q >= -tol) && (p.iter().sum::<f64>() - 1.0).abs() <= tol
            }
            Self::Linear { gamma1, gamma2, gamma3, .. } => {
                gamma1 >= 0.0 && gamma3.abs() <= 1.0 && gamma1 + gamma2.abs() <= (1.0 - gamma3 * gamma3).sqrt() + tol
            }
        };
        if !ok || !xstate_positivity(&self.state()) {
            return Err(Error::Domain(format!("{self:?} violates the family's positivity condition")));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrelationTriple {
    pub discord: f64,
    pub classical: f64,
    pub mutual: f64,
}

pub fn special_family_correlations(fam: &SpecialFamily) -> Result<CorrelationTriple> {
    fam.check()?;
    let x = fam.state();
    let s_ab = xstate_eigensystem(&x).entropy();
    Ok(match *fam {
        SpecialFamily::Circular { gamma1, theta, .. } | SpecialFamily::Spherical { gamma1, theta, .. } => {
            let s = theta.sin();
            CorrelationTriple {
                mutual: s2(gamma1 * s) + s2(s) - s_ab,
                classical: s2(gamma1 * s) - s2(gamma1),
                discord: s2(s) + s2(gamma1) - s_ab,
            }
        }
        SpecialFamily::BellMixture { .. } => {
            let longest = x.m11.abs().max(x.m22.abs()).max(x.m33.abs());
            let mutual = 2.0 - s_ab;
            let classical = 1.0 - s2(longest);
            CorrelationTriple { discord: mutual - classical, classical, mutual }
        }
        SpecialFamily::Linear { gamma1, gamma3, theta, .. } => {
            let sa = s2((gamma1 * theta.cos()).hypot(gamma3));
            let mutual = s2(gamma3) + s2(theta.sin()) - s_ab;
            let classical = s2(gamma3) - sa;
            CorrelationTriple { discord: mutual - classical, classical, mutual }
        }
    })
}

/// PPT verdict of the X-state behind an ellipsoid, for cross-checks.
pub fn ppt_of_state(x: &XStateCanonical) -> Result<bool> {
    Ok(ppt_entangled(&x.to_rho()?)?.entangled)
}
