//! Single-mode bosonic Gaussian channels in phase space.
//!
//! A channel `(X, Y)` acts on characteristic functions as
//! `chi(xi) -> chi(X xi) exp(-xi^T Y xi / 2)`, with the vacuum variance
//! matrix equal to the identity. Variance matrices transform as
//! `V -> X^T V X + Y`.

use nalgebra::{Matrix2, Matrix4, SMatrix, SymmetricEigen};

use crate::error::{Error, Result};

pub type Mat2 = Matrix2<f64>;
pub type Mat4 = Matrix4<f64>;

/// Tolerance for the positive-semidefinite checks; boundary cases pass.
pub const PSD_TOL: f64 = 1e-10;
const SINGULAR_TOL: f64 = 1e-10;

/// The 2x2 symplectic metric.
pub fn beta() -> Mat2 {
    Mat2::new(0.0, 1.0, -1.0, 0.0)
}

fn sigma3() -> Mat2 {
    Mat2::new(1.0, 0.0, 0.0, -1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NoiseKind {
    Attenuator,
    Amplifier,
}

impl NoiseKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Attenuator => "atten",
            Self::Amplifier => "amp",
        }
    }

    pub fn check_kappa(&self, kappa: f64) -> Result<()> {
        let ok = match self {
            Self::Attenuator => (0.0..=1.0).contains(&kappa),
            Self::Amplifier => kappa >= 1.0 && kappa.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("kappa = {kappa} out of range for the {}", self.name())))
        }
    }
}

impl std::str::FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "atten" | "attenuator" | "C1" => Ok(Self::Attenuator),
            "amp" | "amplifier" | "C2" => Ok(Self::Amplifier),
            _ => Err(Error::Domain(format!("unknown channel kind '{s}'"))),
        }
    }
}

/// Smallest eigenvalue of the hermitian matrix `Y + i c beta`.
fn min_eig_y_plus_ic_beta(y: &Mat2, c: f64) -> f64 {
    let tr = y[(0, 0)] + y[(1, 1)];
    let d = y[(0, 0)] - y[(1, 1)];
    let off2 = y[(0, 1)] * y[(0, 1)] + c * c;
    0.5 * (tr - (d * d + 4.0 * off2).sqrt())
}

/// Eigenvalues `(a, b)`, `a >= b`, and the angle of the `a` eigenvector.
fn sym_eig2(y: &Mat2) -> (f64, f64, f64) {
    let tr = y[(0, 0)] + y[(1, 1)];
    let d = y[(0, 0)] - y[(1, 1)];
    let h = d.hypot(2.0 * y[(0, 1)]);
    let phi = 0.5 * (2.0 * y[(0, 1)]).atan2(d);
    (0.5 * (tr + h), 0.5 * (tr - h), phi)
}

fn rotation(phi: f64) -> Mat2 {
    let (s, c) = phi.sin_cos();
    Mat2::new(c, -s, s, c)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianChannel {
    x: Mat2,
    y: Mat2,
}

impl GaussianChannel {
    /// Checked constructor: finite entries, symmetric `Y`, completely positive.
    pub fn new(x: Mat2, y: Mat2) -> Result<Self> {
        let ch = Self::unchecked(x, y)?;
        if !ch.is_cp() {
            return Err(Error::NotCp);
        }
        Ok(ch)
    }

    /// Skips the CP check (for classifier tests on maps such as the transpose).
    pub fn unchecked(x: Mat2, y: Mat2) -> Result<Self> {
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        if (y[(0, 1)] - y[(1, 0)]).abs() > PSD_TOL {
            return Err(Error::Domain("Y must be symmetric".into()));
        }
        let ys = 0.5 * (y + y.transpose());
        Ok(Self { x, y: ys })
    }

    pub fn from_rows(x: [[f64; 2]; 2], y: [[f64; 2]; 2]) -> Result<Self> {
        Self::new(
            Mat2::new(x[0][0], x[0][1], x[1][0], x[1][1]),
            Mat2::new(y[0][0], y[0][1], y[1][0], y[1][1]),
        )
    }

    pub fn x(&self) -> &Mat2 {
        &self.x
    }

    pub fn y(&self) -> &Mat2 {
        &self.y
    }

    pub fn identity() -> Self {
        Self { x: Mat2::identity(), y: Mat2::zeros() }
    }

    fn noise_check(a: f64) -> Result<()> {
        if a >= 0.0 && a.is_finite() {
            Ok(())
        } else {
            Err(Error::Domain(format!("noise a = {a} must be finite and >= 0")))
        }
    }

    /// `C1(kappa; a)`: `X = kappa I`, `Y = (1 - kappa^2 + a) I`.
    pub fn attenuator(kappa: f64, a: f64) -> Result<Self> {
        NoiseKind::Attenuator.check_kappa(kappa)?;
        Self::noise_check(a)?;
        Ok(Self { x: Mat2::identity() * kappa, y: Mat2::identity() * (1.0 - kappa * kappa + a) })
    }

    /// `C2(kappa; a)`: `X = kappa I`, `Y = (kappa^2 - 1 + a) I`.
    pub fn amplifier(kappa: f64, a: f64) -> Result<Self> {
        NoiseKind::Amplifier.check_kappa(kappa)?;
        Self::noise_check(a)?;
        Ok(Self { x: Mat2::identity() * kappa, y: Mat2::identity() * (kappa * kappa - 1.0 + a) })
    }

    pub fn noisy(kind: NoiseKind, kappa: f64, a: f64) -> Result<Self> {
        match kind {
            NoiseKind::Attenuator => Self::attenuator(kappa, a),
            NoiseKind::Amplifier => Self::amplifier(kappa, a),
        }
    }

    /// `D(kappa; a)`: `X = kappa sigma3`, `Y = (1 + kappa^2 + a) I`.
    pub fn conjugate(kappa: f64, a: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::Domain(format!("phase conjugation needs kappa > 0, got {kappa}")));
        }
        Self::noise_check(a)?;
        Ok(Self { x: sigma3() * kappa, y: Mat2::identity() * (1.0 + kappa * kappa + a) })
    }

    /// `A1(a)`: `X = 0`, `Y = (1 + a) I`.
    pub fn a1(a: f64) -> Result<Self> {
        Self::noise_check(a)?;
        Ok(Self { x: Mat2::zeros(), y: Mat2::identity() * (1.0 + a) })
    }

    /// `A2(a)`: `X = (I + sigma3)/2`, `Y = (1 + a) I`.
    pub fn a2(a: f64) -> Result<Self> {
        Self::noise_check(a)?;
        Ok(Self { x: Mat2::new(1.0, 0.0, 0.0, 0.0), y: Mat2::identity() * (1.0 + a) })
    }

    /// `B2(a)`: classical noise, `X = I`, `Y = a I`.
    pub fn b2(a: f64) -> Result<Self> {
        Self::noise_check(a)?;
        Ok(Self { x: Mat2::identity(), y: Mat2::identity() * a })
    }

    /// `B1(a)`: noise in one quadrature, `Y = diag(a, 0)`.
    pub fn b1(a: f64) -> Result<Self> {
        Self::noise_check(a)?;
        Ok(Self { x: Mat2::identity(), y: Mat2::new(a, 0.0, 0.0, 0.0) })
    }

    /// Unitary squeezer with `X = diag(e^r, e^-r)`.
    pub fn squeezer(r: f64) -> Self {
        Self { x: Mat2::new(r.exp(), 0.0, 0.0, (-r).exp()), y: Mat2::zeros() }
    }

    pub fn det_x(&self) -> f64 {
        self.x.determinant()
    }

    /// Eigenvalues of `Y`, larger first.
    pub fn y_eigenvalues(&self) -> (f64, f64) {
        let (a, b, _) = sym_eig2(&self.y);
        (a, b)
    }

    /// `Y + i(beta - X^T beta X) >= 0`.
    pub fn is_cp(&self) -> bool {
        min_eig_y_plus_ic_beta(&self.y, 1.0 - self.det_x()) >= -PSD_TOL
    }

    /// `Y - i beta - i X^T beta X >= 0`.
    pub fn is_eb(&self) -> Result<bool> {
        if !self.is_cp() {
            return Err(Error::NotCp);
        }
        Ok(min_eig_y_plus_ic_beta(&self.y, 1.0 + self.det_x()) >= -PSD_TOL)
    }

    pub fn is_nb(&self) -> Result<bool> {
        if !self.is_cp() {
            return Err(Error::NotCp);
        }
        Ok(match self.nc_canonical_form() {
            NcForm::PositiveDet { kappa, a, b } | NcForm::NegativeDet { kappa, a, b } => {
                a > 1.0 && b > 1.0 && (a - 1.0) * (b - 1.0) >= kappa.powi(4) - PSD_TOL
            }
            NcForm::SingularX { a, b } => a >= 1.0 - PSD_TOL && b >= 1.0 - PSD_TOL,
        })
    }

    pub fn nc_canonical_form(&self) -> NcForm {
        let d = self.det_x();
        let (a, b) = self.y_eigenvalues();
        if d.abs() <= SINGULAR_TOL {
            NcForm::SingularX { a, b }
        } else if d > 0.0 {
            NcForm::PositiveDet { kappa: d.sqrt(), a, b }
        } else {
            NcForm::NegativeDet { kappa: (-d).sqrt(), a, b }
        }
    }

    /// Holevo canonical class; the noise is read off `sqrt(det Y)`, which is
    /// invariant under the symplectic double coset fixing `X`.
    pub fn canonical_class(&self) -> CanonicalClass {
        let d = self.det_x();
        let sdy = self.y.determinant().max(0.0).sqrt();
        let (tag, kappa, noise) = if d.abs() <= SINGULAR_TOL {
            let zero = self.x.iter().all(|v| v.abs() <= SINGULAR_TOL);
            (if zero { ChannelClass::A1 } else { ChannelClass::A2 }, 0.0, sdy - 1.0)
        } else if d < 0.0 {
            let k = (-d).sqrt();
            (ChannelClass::D, k, sdy - (1.0 + k * k))
        } else {
            let k = d.sqrt();
            if (k - 1.0).abs() <= SINGULAR_TOL {
                let (ya, _) = self.y_eigenvalues();
                if self.y.determinant() <= SINGULAR_TOL && ya > SINGULAR_TOL {
                    (ChannelClass::B1, 1.0, ya)
                } else {
                    (ChannelClass::B2, 1.0, sdy)
                }
            } else if k < 1.0 {
                (ChannelClass::C1, k, sdy - (1.0 - k * k))
            } else {
                (ChannelClass::C2, k, sdy - (k * k - 1.0))
            }
        };
        CanonicalClass { tag, kappa, noise }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.x - other.x).abs().max().max((self.y - other.y).abs().max())
    }
}

/// `later` applied after `earlier`: `X = X_e X_l`, `Y = X_l^T Y_e X_l + Y_l`.
pub fn compose(later: &GaussianChannel, earlier: &GaussianChannel) -> GaussianChannel {
    GaussianChannel {
        x: earlier.x * later.x,
        y: later.x.transpose() * earlier.y * later.x + later.y,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ChannelClass {
    D,
    C1,
    C2,
    A1,
    A2,
    B2,
    B1,
}

impl ChannelClass {
    pub fn name(&self) -> &'static str {
        match self {
            Self::D => "D_conj",
            Self::C1 => "C1_atten",
            Self::C2 => "C2_amp",
            Self::A1 => "A1_singular",
            Self::A2 => "A2_singular",
            Self::B2 => "B2_noise",
            Self::B1 => "B1_onequad",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CanonicalClass {
    pub tag: ChannelClass,
    pub kappa: f64,
    pub noise: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NcForm {
    PositiveDet { kappa: f64, a: f64, b: f64 },
    NegativeDet { kappa: f64, a: f64, b: f64 },
    SingularX { a: f64, b: f64 },
}

impl NcForm {
    pub fn name(&self) -> &'static str {
        match self {
            Self::PositiveDet { .. } => "positive-det",
            Self::NegativeDet { .. } => "negative-det",
            Self::SingularX { .. } => "singular-x",
        }
    }
}

/// `(kappa1, kappa2)` with `C2(kappa2; 0) o C1(kappa1; 0)` equal to the
/// noisy channel `(kind, kappa, a)`.
pub fn noisy_decomposition(kind: NoiseKind, kappa: f64, a: f64) -> Result<(f64, f64)> {
    kind.check_kappa(kappa)?;
    if !(a >= 0.0 && a.is_finite()) {
        return Err(Error::Domain(format!("noise a = {a} must be finite and >= 0")));
    }
    let k2 = match kind {
        NoiseKind::Attenuator => (1.0 + a / 2.0).sqrt(),
        NoiseKind::Amplifier => (kappa * kappa + a / 2.0).sqrt(),
    };
    Ok((kappa / k2, k2))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sides {
    Left,
    Right,
    Both,
}

/// Two-mode variance matrix, ordering `(q1, p1, q2, p2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VarianceMatrix2Mode {
    v: Mat4,
}

fn omega(second_sign: f64) -> Mat4 {
    let mut o = Mat4::zeros();
    o[(0, 1)] = 1.0;
    o[(1, 0)] = -1.0;
    o[(2, 3)] = second_sign;
    o[(3, 2)] = -second_sign;
    o
}

/// Smallest eigenvalue of the hermitian `V + i Om`, via the real embedding
/// `[[V, -Om], [Om, V]]`.
fn min_eig_v_plus_i(v: &Mat4, om: &Mat4) -> f64 {
    let mut big = SMatrix::<f64, 8, 8>::zeros();
    big.fixed_view_mut::<4, 4>(0, 0).copy_from(v);
    big.fixed_view_mut::<4, 4>(4, 4).copy_from(v);
    big.fixed_view_mut::<4, 4>(0, 4).copy_from(&(-om));
    big.fixed_view_mut::<4, 4>(4, 0).copy_from(om);
    SymmetricEigen::new(big).eigenvalues.min()
}

impl VarianceMatrix2Mode {
    pub fn new(v: Mat4) -> Result<Self> {
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        if (v - v.transpose()).abs().max() > PSD_TOL {
            return Err(Error::Domain("variance matrix must be symmetric".into()));
        }
        let v = 0.5 * (v + v.transpose());
        let m = min_eig_v_plus_i(&v, &omega(1.0));
        if m < -PSD_TOL {
            return Err(Error::InvalidVariance { min_eigenvalue: m });
        }
        Ok(Self { v })
    }

    pub fn vacuum() -> Self {
        Self { v: Mat4::identity() }
    }

    /// Two-mode squeezed vacuum with squeeze parameter `mu`.
    pub fn tmsv(mu: f64) -> Self {
        let (c, s) = ((2.0 * mu).cosh(), (2.0 * mu).sinh());
        let mut v = Mat4::identity() * c;
        v[(0, 2)] = s;
        v[(2, 0)] = s;
        v[(1, 3)] = -s;
        v[(3, 1)] = -s;
        Self { v }
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.v
    }
}

pub fn evolve_variance(ch: &GaussianChannel, v: &VarianceMatrix2Mode, sides: Sides) -> Result<VarianceMatrix2Mode> {
    let mut xs = Mat4::identity();
    let mut ys = Mat4::zeros();
    if matches!(sides, Sides::Left | Sides::Both) {
        xs.fixed_view_mut::<2, 2>(0, 0).copy_from(&ch.x);
        ys.fixed_view_mut::<2, 2>(0, 0).copy_from(&ch.y);
    }
    if matches!(sides, Sides::Right | Sides::Both) {
        xs.fixed_view_mut::<2, 2>(2, 2).copy_from(&ch.x);
        ys.fixed_view_mut::<2, 2>(2, 2).copy_from(&ch.y);
    }
    VarianceMatrix2Mode::new(xs.transpose() * v.v * xs + ys)
}

/// Partial-transpose test: separable iff `V + i(beta (+) -beta) >= 0`.
pub fn simon_separable(v: &VarianceMatrix2Mode) -> bool {
    min_eig_v_plus_i(&v.v, &omega(-1.0)) >= -PSD_TOL
}

/// Noise above which every TMSV with squeeze `mu` (use `f64::INFINITY` for
/// the saturation value) becomes separable under the two-sided channel.
pub fn gaussian_critical_noise(kind: NoiseKind, kappa: f64, mu: f64) -> Result<f64> {
    kind.check_kappa(kappa)?;
    if mu.is_nan() || mu < 0.0 {
        return Err(Error::Domain(format!("squeeze mu = {mu} must be >= 0")));
    }
    let e = (-2.0 * mu).exp();
    Ok(match kind {
        NoiseKind::Attenuator => kappa * kappa * (1.0 - e),
        NoiseKind::Amplifier => (2.0 - kappa * kappa * (1.0 + e)).max(0.0),
    })
}

const R0_STEP: f64 = 0.01;
const R0_MAX: f64 = 8.0;
const R0_TOL: f64 = 1e-10;

/// Point where the squeeze orbit of an EB channel first enters the NB region.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SqueezeOrbitPoint {
    pub r0: f64,
    /// `+1` contracts the larger eigenvalue of `Y`, `-1` the smaller.
    pub orientation: i8,
}

/// Smallest `r >= 0` for which the channel followed by a squeeze of
/// strength `r` along the principal axes of `Y` is nonclassicality breaking.
pub fn find_squeeze_r0(ch: &GaussianChannel) -> Result<f64> {
    find_squeeze(ch).map(|p| p.r0)
}

pub fn find_squeeze(ch: &GaussianChannel) -> Result<SqueezeOrbitPoint> {
    if !ch.is_eb()? {
        return Err(Error::NotEb);
    }
    if ch.is_nb()? {
        return Ok(SqueezeOrbitPoint { r0: 0.0, orientation: 1 });
    }
    let (a, b, _) = sym_eig2(&ch.y);
    if b <= 0.0 {
        return Err(Error::Domain("Y must be positive definite".into()));
    }
    let r_star = 0.25 * (a / b).ln();
    // far out on the orbit the entries overflow the absolute CP tolerance; count that as not NB
    let nb_at = |r: f64| squeeze_after(ch, r).is_nb().unwrap_or(false);
    let mut best: Option<SqueezeOrbitPoint> = None;
    for orientation in [1i8, -1] {
        let sign = f64::from(orientation);
        let mut grid: Vec<f64> = (1..=(R0_MAX / R0_STEP) as usize).map(|k| k as f64 * R0_STEP).collect();
        if orientation > 0 && r_star <= R0_MAX {
            grid.push(r_star);
            grid.sort_by(f64::total_cmp);
        }
        let mut prev = 0.0;
        for &r in &grid {
            if nb_at(sign * r) {
                let (mut lo, mut hi) = (prev, r);
                while hi - lo > R0_TOL {
                    let mid = 0.5 * (lo + hi);
                    if nb_at(sign * mid) {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                if best.is_none_or(|p| hi < p.r0) {
                    best = Some(SqueezeOrbitPoint { r0: hi, orientation });
                }
                break;
            }
            prev = r;
        }
    }
    best.ok_or_else(|| Error::NoSolution(format!("no NB point on the squeeze orbit up to r = {R0_MAX}")))
}

/// `ch` followed by the squeeze `R diag(e^-r, e^r) R^T`, `R` the eigenbasis
/// of `Y` with the larger eigenvalue first. Negative `r` squeezes the other way.
pub fn squeeze_after(ch: &GaussianChannel, r: f64) -> GaussianChannel {
    let (_, _, phi) = sym_eig2(&ch.y);
    let rot = rotation(phi);
    let s = rot * Mat2::new((-r).exp(), 0.0, 0.0, r.exp()) * rot.transpose();
    compose(&GaussianChannel { x: s, y: Mat2::zeros() }, ch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: &GaussianChannel, b: &GaussianChannel, tol: f64) -> bool {
        a.max_abs_diff(b) < tol
    }

    #[test]
    fn cp_examples() {
        assert!(GaussianChannel::identity().is_cp());
        let att = GaussianChannel::attenuator(0.5, 0.0).unwrap();
        assert!(att.is_cp());
        assert!(min_eig_y_plus_ic_beta(att.y(), 1.0 - att.det_x()).abs() < 1e-15);
        let t = GaussianChannel::unchecked(sigma3(), Mat2::zeros()).unwrap();
        assert!(!t.is_cp());
        assert_eq!(t.is_eb(), Err(Error::NotCp));
        assert!(GaussianChannel::new(sigma3(), Mat2::zeros()).is_err());
    }

    #[test]
    fn eb_table() {
        for k in [0.3, 1.0, 1.7] {
            assert!(GaussianChannel::conjugate(k, 0.0).unwrap().is_eb().unwrap());
        }
        let k: f64 = 0.6;
        assert!(GaussianChannel::attenuator(k, 2.0 * k * k).unwrap().is_eb().unwrap());
        assert!(!GaussianChannel::attenuator(k, 2.0 * k * k - 1e-6).unwrap().is_eb().unwrap());
        assert!(GaussianChannel::amplifier(1.4, 2.0).unwrap().is_eb().unwrap());
        assert!(!GaussianChannel::amplifier(1.4, 1.999).unwrap().is_eb().unwrap());
        assert!(GaussianChannel::a2(0.0).unwrap().is_eb().unwrap());
        assert!(GaussianChannel::attenuator(0.0, 0.0).unwrap().is_eb().unwrap());
        assert!(!GaussianChannel::identity().is_eb().unwrap());
    }

    #[test]
    fn nb_examples() {
        let ch = |a: f64, b: f64| GaussianChannel::new(Mat2::identity(), Mat2::new(a, 0.0, 0.0, b)).unwrap();
        assert!(ch(2.0, 2.0).is_nb().unwrap());
        assert!(!ch(1.5, 1.5).is_nb().unwrap());
        let s = GaussianChannel::new(Mat2::new(1.0, 0.0, 0.0, 0.0), Mat2::identity()).unwrap();
        assert!(matches!(s.nc_canonical_form(), NcForm::SingularX { .. }));
        assert!(s.is_nb().unwrap());
        assert!(!GaussianChannel::b1(3.0).unwrap().is_nb().unwrap());
        assert!(!GaussianChannel::identity().is_nb().unwrap());
    }

    #[test]
    fn nc_forms() {
        let p = GaussianChannel::new(Mat2::identity() * 0.5, Mat2::new(2.0, 0.0, 0.0, 3.0)).unwrap();
        assert_eq!(p.nc_canonical_form(), NcForm::PositiveDet { kappa: 0.5, a: 3.0, b: 2.0 });
        let n = GaussianChannel::new(sigma3() * 0.5, Mat2::new(2.0, 0.0, 0.0, 3.0)).unwrap();
        assert_eq!(n.nc_canonical_form(), NcForm::NegativeDet { kappa: 0.5, a: 3.0, b: 2.0 });
    }

    #[test]
    fn holevo_classes() {
        let cases = [
            (GaussianChannel::identity(), ChannelClass::B2, 1.0, 0.0),
            (GaussianChannel::attenuator(0.4, 0.3).unwrap(), ChannelClass::C1, 0.4, 0.3),
            (GaussianChannel::amplifier(1.3, 0.2).unwrap(), ChannelClass::C2, 1.3, 0.2),
            (GaussianChannel::conjugate(0.7, 0.1).unwrap(), ChannelClass::D, 0.7, 0.1),
            (GaussianChannel::a1(0.5).unwrap(), ChannelClass::A1, 0.0, 0.5),
            (GaussianChannel::a2(0.0).unwrap(), ChannelClass::A2, 0.0, 0.0),
            (GaussianChannel::b1(0.8).unwrap(), ChannelClass::B1, 1.0, 0.8),
        ];
        for (ch, tag, k, a) in cases {
            let c = ch.canonical_class();
            assert_eq!(c.tag, tag);
            assert!((c.kappa - k).abs() < 1e-12 && (c.noise - a).abs() < 1e-12, "{c:?}");
        }
    }

    #[test]
    fn semigroups() {
        let c = compose(&GaussianChannel::attenuator(0.6, 0.0).unwrap(), &GaussianChannel::attenuator(0.7, 0.0).unwrap());
        assert!(close(&c, &GaussianChannel::attenuator(0.42, 0.0).unwrap(), 1e-15));
        let c = compose(&GaussianChannel::amplifier(1.2, 0.0).unwrap(), &GaussianChannel::amplifier(1.5, 0.0).unwrap());
        assert!(close(&c, &GaussianChannel::amplifier(1.8, 0.0).unwrap(), 1e-14));
        let ch = GaussianChannel::conjugate(0.3, 0.2).unwrap();
        assert_eq!(compose(&GaussianChannel::identity(), &ch), ch);
        assert_eq!(compose(&ch, &GaussianChannel::identity()), ch);
    }

    #[test]
    fn decomposition() {
        assert_eq!(noisy_decomposition(NoiseKind::Attenuator, 1.0, 0.0).unwrap(), (1.0, 1.0));
        let (k1, k2) = noisy_decomposition(NoiseKind::Attenuator, 0.8, 1.0).unwrap();
        assert!((k2 - 1.5f64.sqrt()).abs() < 1e-15 && (k1 - 0.8 / 1.5f64.sqrt()).abs() < 1e-15);
        let (_, k2) = noisy_decomposition(NoiseKind::Amplifier, 1.2, 0.5).unwrap();
        assert!((k2 - 1.3).abs() < 1e-15);
        for (kind, k, a) in [(NoiseKind::Attenuator, 0.8, 1.0), (NoiseKind::Amplifier, 1.2, 0.5), (NoiseKind::Attenuator, 0.3, 0.01)] {
            let (k1, k2) = noisy_decomposition(kind, k, a).unwrap();
            let c = compose(&GaussianChannel::amplifier(k2, 0.0).unwrap(), &GaussianChannel::attenuator(k1, 0.0).unwrap());
            assert!(close(&c, &GaussianChannel::noisy(kind, k, a).unwrap(), 1e-12));
        }
        assert!(noisy_decomposition(NoiseKind::Attenuator, 1.2, 0.0).is_err());
        assert!(noisy_decomposition(NoiseKind::Amplifier, 1.2, -0.1).is_err());
    }

    #[test]
    fn variance_evolution() {
        let vac = VarianceMatrix2Mode::vacuum();
        let out = evolve_variance(&GaussianChannel::attenuator(0.6, 0.4).unwrap(), &vac, Sides::Both).unwrap();
        assert!((out.matrix() - Mat4::identity() * 1.4).abs().max() < 1e-15);
        assert_eq!(VarianceMatrix2Mode::tmsv(0.0), vac);
        let t = VarianceMatrix2Mode::tmsv(0.4);
        assert_eq!(evolve_variance(&GaussianChannel::identity(), &t, Sides::Both).unwrap(), t);
        let left = evolve_variance(&GaussianChannel::attenuator(0.5, 0.0).unwrap(), &t, Sides::Left).unwrap();
        assert!((left.matrix()[(2, 2)] - t.matrix()[(2, 2)]).abs() < 1e-15);
        assert!(VarianceMatrix2Mode::new(Mat4::identity() * 0.5).is_err());
        let bad = GaussianChannel::unchecked(sigma3(), Mat2::zeros()).unwrap();
        assert!(matches!(evolve_variance(&bad, &t, Sides::Left), Err(Error::InvalidVariance { .. })));
    }

    #[test]
    fn simon_examples() {
        assert!(simon_separable(&VarianceMatrix2Mode::vacuum()));
        assert!(!simon_separable(&VarianceMatrix2Mode::tmsv(0.5185)));
        let (k, mu) = (0.7, 0.5);
        let a0 = gaussian_critical_noise(NoiseKind::Attenuator, k, mu).unwrap();
        for (a, sep) in [(a0 + 1e-6, true), (a0 - 1e-6, false)] {
            let ch = GaussianChannel::attenuator(k, a).unwrap();
            let v = evolve_variance(&ch, &VarianceMatrix2Mode::tmsv(mu), Sides::Both).unwrap();
            assert_eq!(simon_separable(&v), sep);
        }
    }

    #[test]
    fn critical_noise_limits() {
        let k = 0.8;
        assert!((gaussian_critical_noise(NoiseKind::Attenuator, k, f64::INFINITY).unwrap() - k * k).abs() < 1e-15);
        assert!((gaussian_critical_noise(NoiseKind::Amplifier, 1.2, f64::INFINITY).unwrap() - (2.0 - 1.44)).abs() < 1e-15);
        assert_eq!(gaussian_critical_noise(NoiseKind::Attenuator, k, 0.0).unwrap(), 0.0);
        assert_eq!(gaussian_critical_noise(NoiseKind::Amplifier, 1.2, 0.0).unwrap(), 0.0);
        assert_eq!(gaussian_critical_noise(NoiseKind::Amplifier, 1.6, 2.0).unwrap(), 0.0);
        assert!(gaussian_critical_noise(NoiseKind::Attenuator, 1.1, 0.3).is_err());
    }

    #[test]
    fn squeeze_orbit() {
        let nb = GaussianChannel::b2(2.5).unwrap();
        assert_eq!(find_squeeze_r0(&nb).unwrap(), 0.0);
        let ch = GaussianChannel::new(Mat2::identity(), Mat2::new(6.0, 0.0, 0.0, 1.1)).unwrap();
        assert!(ch.is_eb().unwrap() && !ch.is_nb().unwrap());
        let r0 = find_squeeze_r0(&ch).unwrap();
        assert!(r0 > 0.0);
        // analytic left edge of (6 e^{-2r} - 1)(1.1 e^{2r} - 1) >= 1
        let g = |r: f64| (6.0 * (-2.0 * r).exp() - 1.0) * (1.1 * (2.0 * r).exp() - 1.0) - 1.0;
        assert!(g(r0) >= -1e-8 && g(r0 - 1e-8) < 0.0);
        assert!(squeeze_after(&ch, r0).is_nb().unwrap());
        assert_eq!(find_squeeze(&ch).unwrap().orientation, 1);
        assert_eq!(find_squeeze_r0(&GaussianChannel::identity()), Err(Error::NotEb));
    }

    fn arb_mat2() -> impl Strategy<Value = Mat2> {
        prop::array::uniform4(-2.0..2.0f64).prop_map(|v| Mat2::new(v[0], v[1], v[2], v[3]))
    }

    fn arb_cp() -> impl Strategy<Value = GaussianChannel> {
        (arb_mat2(), arb_mat2(), 0.0..3.0f64).prop_map(|(x, l, extra)| {
            let y0 = l * l.transpose();
            let need = (1.0 - x.determinant()).abs();
            let d = y0.determinant().max(0.0).sqrt();
            let scale = if d > 1e-6 { need / d } else { 0.0 };
            let y = if scale > 0.0 { y0 * scale } else { Mat2::identity() * need } + Mat2::identity() * extra;
            GaussianChannel::new(x, y).unwrap()
        })
    }

    proptest! {
        #[test]
        fn compose_associative(a in arb_cp(), b in arb_cp(), c in arb_cp()) {
            let l = compose(&compose(&a, &b), &c);
            let r = compose(&a, &compose(&b, &c));
            prop_assert!(l.max_abs_diff(&r) < 1e-12 * (1.0 + l.x().abs().max() + l.y().abs().max()));
            prop_assert!(compose(&a, &b).is_cp());
        }

        #[test]
        fn nb_implies_eb(ch in arb_cp()) {
            if ch.is_nb().unwrap() {
                prop_assert!(ch.is_eb().unwrap());
            }
        }

        #[test]
        fn evolution_preserves_validity(ch in arb_cp(), mu in 0.0..1.5f64) {
            let v = VarianceMatrix2Mode::tmsv(mu);
            prop_assert!(evolve_variance(&ch, &v, Sides::Both).is_ok());
            prop_assert!(evolve_variance(&ch, &v, Sides::Left).is_ok());
        }
    }
}
