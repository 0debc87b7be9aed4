use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::{ComplexMatrix, C64, DEFAULT_TOL};

/// Eigenvalues below this contribute nothing to an entropy.
pub const ENTROPY_FLOOR: f64 = 1e-15;

const JACOBI_OFF_TOL: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::new(T::zero(), T::zero()); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        let m = Self { rows, cols, data };
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(m)
    }

    pub fn from_real_rows(rows: &[&[T]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        Self::from_fn(r, c, |i, j| Complex::new(rows[i][j], T::zero()))
    }

    pub fn diag_real(d: &[T]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = Complex::new(x, T::zero());
        }
        m
    }

    /// Projector `|v><v|`.
    pub fn outer(v: &[Complex<T>]) -> Self {
        Self::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: T) -> Self {
        self.scale(Complex::new(s, T::zero()))
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)])
            .fold(Complex::new(T::zero(), T::zero()), |a, b| a + b)
    }

    pub fn kron(&self, other: &Self) -> Self {
        let (r2, c2) = (other.rows, other.cols);
        Self::from_fn(self.rows * r2, self.cols * c2, |i, j| {
            self[(i / r2, j / c2)] * other[(i % r2, j % c2)]
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (*a - *b).norm())
            .fold(T::zero(), T::max)
    }

    /// Largest entry of `|H - H^dagger|`.
    pub fn hermitian_deviation(&self) -> T {
        let mut dev = T::zero();
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).fold(T::zero(), |a, b| a + b).sqrt()
    }

    fn check_mul(&self, other: &Self) {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
    }
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Real> Mul for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn mul(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        self.check_mul(rhs);
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let t = a * rhs[(k, j)];
                    out[(i, j)] += t;
                }
            }
        }
        out
    }
}

impl<T: Real> Add for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn add(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| *a + *b).collect(),
        }
    }
}

impl<T: Real> Sub for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn sub(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| *a - *b).collect(),
        }
    }
}

/// Eigenvalues of a hermitian matrix, ascending.
///
/// The solver works on `(H + H^dagger)/2` after checking that `H` is hermitian
/// within `tol`.
pub fn herm_eigvals<T: Real>(h: &CMatrix<T>, tol: T) -> Result<Vec<T>> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigenvalues of a {}x{} matrix",
            h.rows, h.cols
        )));
    }
    if !h.is_finite() {
        return Err(Error::NonFinite);
    }
    let dev = h.hermitian_deviation();
    if dev > tol {
        return Err(Error::NonHermitian { deviation: dev.as_f64() });
    }
    let n = h.rows;
    let half = T::lit(0.5);
    let mut a = CMatrix::from_fn(n, n, |i, j| (h[(i, j)] + h[(j, i)].conj()) * half);
    let mut ev = jacobi_diagonalize(&mut a);
    ev.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    Ok(ev)
}

fn off_diagonal_norm<T: Real>(a: &CMatrix<T>) -> T {
    let n = a.rows;
    let mut s = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Cyclic complex Jacobi; `a` is overwritten by a (numerically) diagonal matrix.
fn jacobi_diagonalize<T: Real>(a: &mut CMatrix<T>) -> Vec<T> {
    let n = a.rows;
    let scale = a.frobenius_norm().max(T::one());
    let thresh = T::lit(JACOBI_OFF_TOL).max(T::epsilon() * T::lit(64.0)) * scale;
    let two = T::lit(2.0);
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(a) < thresh {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let g = apq.norm();
                if g == T::zero() {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let phase = apq / g; // e^{i phi}
                let theta = T::lit(0.5) * (two * g).atan2(app - aqq);
                let (s, c) = theta.sin_cos();
                // Columns of G = diag(1, e^{-i phi}) R, R = [[c, -s], [s, c]].
                let cz = Complex::new(c, T::zero());
                let sz = Complex::new(s, T::zero());
                let ph = phase.conj();
                let g00 = cz;
                let g01 = -sz;
                let g10 = sz * ph;
                let g11 = cz * ph;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * g00 + akq * g10;
                    a[(k, q)] = akp * g01 + akq * g11;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = g00.conj() * apk + g10.conj() * aqk;
                    a[(q, k)] = g01.conj() * apk + g11.conj() * aqk;
                }
                a[(p, q)] = Complex::new(T::zero(), T::zero());
                a[(q, p)] = Complex::new(T::zero(), T::zero());
            }
        }
    }
    (0..n).map(|i| a[(i, i)].re).collect()
}

/// Shannon entropy in bits of a spectrum; entries below [`ENTROPY_FLOOR`] are dropped.
pub fn entropy_of_spectrum<T: Real>(eigs: &[T]) -> T {
    let floor = T::lit(ENTROPY_FLOOR);
    eigs.iter()
        .filter(|&&l| l > floor)
        .map(|&l| -l * l.log2())
        .fold(T::zero(), |a, b| a + b)
}

/// `S2(r)`: entropy in bits of a qubit whose Bloch vector has length `r`.
pub fn binary_entropy<T: Real>(r: T) -> Result<T> {
    let slack = T::lit(1e-12);
    if !r.is_finite() || r < -slack || r > T::one() + slack {
        return Err(Error::Domain(format!("Bloch length {} outside [0, 1]", r.as_f64())));
    }
    Ok(s2(r))
}

/// Unchecked `S2`, clamping its argument into `[0, 1]`.
pub(crate) fn s2<T: Real>(r: T) -> T {
    let r = r.abs().min(T::one());
    let half = T::lit(0.5);
    entropy_of_spectrum(&[half * (T::one() + r), half * (T::one() - r)])
}

/// Which factor of a bipartite space an operation acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Validated density matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
    tol: f64,
}

pub type TwoQubitState = DensityMatrix;

impl DensityMatrix {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        Self::with_tol(mat, DEFAULT_TOL)
    }

    pub fn with_tol(mat: ComplexMatrix, tol: f64) -> Result<Self> {
        let eigs = herm_eigvals(&mat, tol)?;
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = eigs[0];
        if min < -tol {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
        Ok(Self { mat, tol })
    }

    /// `|psi><psi|` for a (not necessarily normalised) vector.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("zero or non-finite state vector".into()));
        }
        let v: Vec<C64> = psi.iter().map(|z| z / norm).collect();
        Self::new(ComplexMatrix::outer(&v))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            mat: ComplexMatrix::identity(d).scale_real(1.0 / d as f64),
            tol: DEFAULT_TOL,
        }
    }

    pub fn mat(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_mat(self) -> ComplexMatrix {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        herm_eigvals(&self.mat, self.tol)
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self {
            mat: self.mat.kron(&other.mat),
            tol: self.tol.max(other.tol),
        }
    }
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let eigs = rho.eigenvalues()?;
    Ok(entropy_of_spectrum(&eigs).min((rho.dim() as f64).log2()).max(0.0))
}

fn check_dims(m: &ComplexMatrix, (da, db): (usize, usize)) -> Result<()> {
    if !m.is_square() || m.rows() != da * db || da == 0 || db == 0 {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix is not a {da}x{db} bipartite operator",
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

/// Reduced state after tracing out `traced`.
pub fn partial_trace(rho: &DensityMatrix, dims: (usize, usize), traced: Subsystem) -> Result<DensityMatrix> {
    let m = rho.mat();
    check_dims(m, dims)?;
    let (da, db) = dims;
    let out = match traced {
        Subsystem::B => ComplexMatrix::from_fn(da, da, |i, k| {
            (0..db).map(|j| m[(i * db + j, k * db + j)]).sum()
        }),
        Subsystem::A => ComplexMatrix::from_fn(db, db, |j, l| {
            (0..da).map(|i| m[(i * db + j, i * db + l)]).sum()
        }),
    };
    DensityMatrix::with_tol(out, rho.tol())
}

/// Transpose of every block (`B`) or of the block pattern (`A`).
pub fn partial_transpose(m: &ComplexMatrix, dims: (usize, usize), which: Subsystem) -> Result<ComplexMatrix> {
    check_dims(m, dims)?;
    let (_, db) = dims;
    let n = m.rows();
    Ok(ComplexMatrix::from_fn(n, n, |r, c| {
        let (i, j) = (r / db, r % db);
        let (k, l) = (c / db, c % db);
        match which {
            Subsystem::B => m[(i * db + l, k * db + j)],
            Subsystem::A => m[(k * db + j, i * db + l)],
        }
    }))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PptVerdict {
    pub entangled: bool,
    pub min_eigenvalue: f64,
}

/// Peres-Horodecki test for a two-qubit state.
pub fn ppt_entangled(rho: &TwoQubitState) -> Result<PptVerdict> {
    let pt = partial_transpose(rho.mat(), (2, 2), Subsystem::B)?;
    let min = herm_eigvals(&pt, rho.tol())?[0];
    Ok(PptVerdict {
        entangled: min < -rho.tol(),
        min_eigenvalue: min,
    })
}
