//! Two-component spinors, 2×2 complex matrices and the fixed matrices the
//! walks are built from: Pauli matrices, basis changes, the `τ_i` family,
//! the encodings `U_i`, the step phase `𝒮`, the mass matrix `M` and the
//! coin `W`.
//!
//! Conventions: `σ_y = [[0, -i], [i, 0]]`, rotations are
//! `R_σ(θ) = exp(-iθσ/2)`, and the three lattice directions are
//! `u_i = (cos 2πi/3, sin 2πi/3)`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::{Complex, Real};

/// Two-component complex vector `(ψ↑, ψ↓)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Spinor<T> {
    pub up: Complex<T>,
    pub down: Complex<T>,
}

impl<T: Real> Spinor<T> {
    pub fn new(up: Complex<T>, down: Complex<T>) -> Self {
        Self { up, down }
    }

    pub fn zero() -> Self {
        Self::new(Complex::new(T::zero(), T::zero()), Complex::new(T::zero(), T::zero()))
    }

    /// `(1, 0)`, the `σ_z = +1` eigenvector.
    pub fn spin_up() -> Self {
        Self::new(Complex::new(T::one(), T::zero()), Complex::new(T::zero(), T::zero()))
    }

    /// `(0, 1)`, the `σ_z = -1` eigenvector.
    pub fn spin_down() -> Self {
        Self::new(Complex::new(T::zero(), T::zero()), Complex::new(T::one(), T::zero()))
    }

    pub fn norm_sqr(&self) -> T {
        self.up.norm_sqr() + self.down.norm_sqr()
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, z: Complex<T>) -> Self {
        Self::new(self.up * z, self.down * z)
    }

    /// Hermitian inner product `⟨self|other⟩`.
    pub fn dot(&self, other: &Self) -> Complex<T> {
        self.up.conj() * other.up + self.down.conj() * other.down
    }

    pub fn is_finite(&self) -> bool {
        self.up.re.is_finite() && self.up.im.is_finite() && self.down.re.is_finite() && self.down.im.is_finite()
    }
}

impl<T: Real> Add for Spinor<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.up + rhs.up, self.down + rhs.down)
    }
}

impl<T: Real> Sub for Spinor<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.up - rhs.up, self.down - rhs.down)
    }
}

impl<T: Real> Neg for Spinor<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.up, -self.down)
    }
}

/// 2×2 complex matrix, entries stored row-major `(a00, a01, a10, a11)`.
#[derive(Clone, Copy, PartialEq)]
pub struct Matrix2<T> {
    pub a: [Complex<T>; 4],
}

impl<T: fmt::Debug> fmt::Debug for Matrix2<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{:?}, {:?}], [{:?}, {:?}]]", self.a[0], self.a[1], self.a[2], self.a[3])
    }
}

impl<T: Real> Matrix2<T> {
    pub fn new(a00: Complex<T>, a01: Complex<T>, a10: Complex<T>, a11: Complex<T>) -> Self {
        Self { a: [a00, a01, a10, a11] }
    }

    /// Builds a matrix from real-valued entries.
    pub fn real(a00: T, a01: T, a10: T, a11: T) -> Self {
        let z = T::zero();
        Self::new(Complex::new(a00, z), Complex::new(a01, z), Complex::new(a10, z), Complex::new(a11, z))
    }

    pub fn zero() -> Self {
        Self::real(T::zero(), T::zero(), T::zero(), T::zero())
    }

    pub fn identity() -> Self {
        Self::real(T::one(), T::zero(), T::zero(), T::one())
    }

    pub fn diag(d0: Complex<T>, d1: Complex<T>) -> Self {
        let z = Complex::new(T::zero(), T::zero());
        Self::new(d0, z, z, d1)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex<T> {
        self.a[2 * row + col]
    }

    #[inline]
    pub fn apply(&self, s: &Spinor<T>) -> Spinor<T> {
        Spinor::new(self.a[0] * s.up + self.a[1] * s.down, self.a[2] * s.up + self.a[3] * s.down)
    }

    pub fn adjoint(&self) -> Self {
        Self::new(self.a[0].conj(), self.a[2].conj(), self.a[1].conj(), self.a[3].conj())
    }

    pub fn scale(&self, z: Complex<T>) -> Self {
        Self::new(self.a[0] * z, self.a[1] * z, self.a[2] * z, self.a[3] * z)
    }

    pub fn scale_real(&self, x: T) -> Self {
        self.scale(Complex::new(x, T::zero()))
    }

    pub fn trace(&self) -> Complex<T> {
        self.a[0] + self.a[3]
    }

    pub fn det(&self) -> Complex<T> {
        self.a[0] * self.a[3] - self.a[1] * self.a[2]
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::identity(), |acc, _| acc * *self)
    }

    /// `U A U†`.
    pub fn conjugate(&self, a: &Self) -> Self {
        *self * *a * self.adjoint()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.a.iter().zip(other.a.iter()).map(|(x, y)| (*x - *y).norm()).fold(T::zero(), T::max)
    }

    /// `‖M†M − 𝕀‖_max`.
    pub fn unitarity_defect(&self) -> T {
        (self.adjoint() * *self).max_abs_diff(&Self::identity())
    }

    pub fn is_unitary(&self, tol: T) -> bool {
        self.unitarity_defect() <= tol
    }

    pub fn is_finite(&self) -> bool {
        self.a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Both eigenvalues, from the characteristic polynomial.
    pub fn eigenvalues(&self) -> [Complex<T>; 2] {
        let two = T::lit(2.0);
        let half_tr = self.trace() / two;
        let disc = (half_tr * half_tr - self.det()).sqrt();
        [half_tr + disc, half_tr - disc]
    }

    /// Decomposes a traceless Hermitian matrix as `n·σ`.
    pub fn bloch_vector(&self) -> BlochVector<T> {
        let half = T::lit(0.5);
        BlochVector::new(
            (self.a[1].re + self.a[2].re) * half,
            (self.a[2].im - self.a[1].im) * half,
            (self.a[0].re - self.a[3].re) * half,
        )
    }
}

impl<T: Real> Mul for Matrix2<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let a = &self.a;
        let b = &rhs.a;
        Self::new(
            a[0] * b[0] + a[1] * b[2],
            a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2],
            a[2] * b[1] + a[3] * b[3],
        )
    }
}

impl<T: Real> Mul<Spinor<T>> for Matrix2<T> {
    type Output = Spinor<T>;
    fn mul(self, rhs: Spinor<T>) -> Spinor<T> {
        self.apply(&rhs)
    }
}

impl<T: Real> Add for Matrix2<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.a[0] + rhs.a[0], self.a[1] + rhs.a[1], self.a[2] + rhs.a[2], self.a[3] + rhs.a[3])
    }
}

impl<T: Real> Sub for Matrix2<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.a[0] - rhs.a[0], self.a[1] - rhs.a[1], self.a[2] - rhs.a[2], self.a[3] - rhs.a[3])
    }
}

/// Real 3-vector `n` of a traceless Hermitian matrix `n·σ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector<T> {
    pub nx: T,
    pub ny: T,
    pub nz: T,
}

impl<T: Real> BlochVector<T> {
    pub fn new(nx: T, ny: T, nz: T) -> Self {
        Self { nx, ny, nz }
    }

    pub fn norm(&self) -> T {
        (self.nx * self.nx + self.ny * self.ny + self.nz * self.nz).sqrt()
    }

    pub fn to_matrix(&self) -> Matrix2<T> {
        pauli::<T>(Axis::X).scale_real(self.nx)
            + pauli(Axis::Y).scale_real(self.ny)
            + pauli(Axis::Z).scale_real(self.nz)
    }

    /// `exp(-iθ n·σ)` for a unit vector `n`.
    pub fn exp_i(&self, theta: T) -> Matrix2<T> {
        let (s, c) = theta.sin_cos();
        Matrix2::identity().scale_real(c) + self.to_matrix().scale(Complex::new(T::zero(), -s))
    }

    pub fn distance(&self, other: &Self) -> T {
        BlochVector::new(self.nx - other.nx, self.ny - other.ny, self.nz - other.nz).norm()
    }
}

/// Pauli axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Axis of the square lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RectAxis {
    X,
    Y,
}

pub fn pauli<T: Real>(axis: Axis) -> Matrix2<T> {
    let o = T::one();
    let z = T::zero();
    match axis {
        Axis::X => Matrix2::real(z, o, o, z),
        Axis::Y => Matrix2::new(Complex::new(z, z), Complex::new(z, -o), Complex::new(z, o), Complex::new(z, z)),
        Axis::Z => Matrix2::real(o, z, z, -o),
    }
}

/// Basis change `B` with `B σ_z B† = σ_axis`.
///
/// For `x` this is the Hadamard gate. For `y` it is
/// `(1/√2)[[-i, i], [1, 1]]`; the commonly quoted `(1/√2)[[i, 1], [-i, 1]]`
/// is its adjoint and satisfies the relation the other way round.
pub fn basis_change<T: Real>(axis: RectAxis) -> Matrix2<T> {
    let r = T::FRAC_1_SQRT_2();
    let z = T::zero();
    match axis {
        RectAxis::X => Matrix2::real(r, r, r, -r),
        RectAxis::Y => Matrix2::new(Complex::new(z, -r), Complex::new(z, r), Complex::new(r, z), Complex::new(r, z)),
    }
}

/// Sign choice for the `σ_z` component `ξ = ±√5/3` of the `τ_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XiSign {
    Plus,
    Minus,
}

pub fn xi<T: Real>(sign: XiSign) -> T {
    let v = T::lit(5.0).sqrt() / T::lit(3.0);
    match sign {
        XiSign::Plus => v,
        XiSign::Minus => -v,
    }
}

/// Unit vector `u_i` of the hexagonal lattice, index taken mod 3.
pub fn direction<T: Real>(i: usize) -> [T; 2] {
    let angle = T::lit(2.0) * T::PI() * T::from_count(i % 3) / T::lit(3.0);
    [angle.cos(), angle.sin()]
}

/// Bloch vector of `τ_i`, index taken mod 3.
pub fn tau_bloch<T: Real>(i: usize, sign: XiSign) -> BlochVector<T> {
    let third = T::one() / T::lit(3.0);
    let r3 = T::lit(3.0).sqrt() / T::lit(3.0);
    let z = xi::<T>(sign);
    match i % 3 {
        0 => BlochVector::new(T::lit(2.0) * third, T::zero(), z),
        1 => BlochVector::new(-third, r3, z),
        _ => BlochVector::new(-third, -r3, z),
    }
}

/// `τ_i = n_i·σ`, the Pauli combination pairing with momentum along `u_i`.
pub fn tau<T: Real>(i: usize, sign: XiSign) -> Matrix2<T> {
    tau_bloch(i, sign).to_matrix()
}

/// `R_y(θ) = exp(-iθσ_y/2)`.
pub fn rotation_y<T: Real>(theta: T) -> Matrix2<T> {
    BlochVector::new(T::zero(), T::one(), T::zero()).exp_i(theta / T::lit(2.0))
}

/// `R_z(θ) = exp(-iθσ_z/2)`.
pub fn rotation_z<T: Real>(theta: T) -> Matrix2<T> {
    BlochVector::new(T::zero(), T::zero(), T::one()).exp_i(theta / T::lit(2.0))
}

/// `α = arccos(√5/3)`, the tilt of every `τ_i` away from `σ_z`.
pub fn tilt_angle<T: Real>() -> T {
    xi::<T>(XiSign::Plus).acos()
}

/// Step phase `𝒮 = e^{-iπ/3} R_z(-2π/3) = diag(1, e^{-2iπ/3})`.
///
/// Conjugation by `𝒮` rotates Bloch vectors by `-2π/3` about `z`, taking
/// `τ_{i+1}` to `τ_i`. The phase makes `𝒮³ = 𝕀` instead of `-𝕀`.
pub fn step_phase<T: Real>() -> Matrix2<T> {
    let angle = -T::lit(2.0) * T::PI() / T::lit(3.0);
    Matrix2::diag(Complex::new(T::one(), T::zero()), Complex::from_polar(T::one(), angle))
}

/// Encoding `U_i` with `U_i τ_i U_i† = σ_z`: `U_0 = R_y(-α)`, `U_{i+1} = U_i 𝒮`.
pub fn coin_u<T: Real>(i: usize) -> Matrix2<T> {
    let u0 = rotation_y(-tilt_angle::<T>());
    u0 * step_phase::<T>().pow((i % 3) as u32)
}

/// `exp(-iθσ_z)`.
pub fn mass_phase<T: Real>(theta: T) -> Matrix2<T> {
    Matrix2::diag(Complex::from_polar(T::one(), -theta), Complex::from_polar(T::one(), theta))
}

/// Mass matrix `M = exp(-iε(3/√5)mσ_z)`: the per-step mass factor of a walk
/// whose three-leg cycle lasts `3ε`.
pub fn mass_matrix<T: Real>(p: &WalkParams<T>) -> Matrix2<T> {
    mass_phase(p.eps * T::lit(3.0) / T::lit(5.0).sqrt() * p.mass)
}

/// Leg-independent product `V = U_{i+1} U_i† = U_0 𝒮 U_0†`.
pub fn coin_v<T: Real>() -> Matrix2<T> {
    coin_u::<T>(0).conjugate(&step_phase())
}

/// Coin `W = U_0 𝒮 U_0† M` with `M` from [`mass_matrix`].
pub fn coin_w<T: Real>(p: &WalkParams<T>) -> Matrix2<T> {
    coin_v::<T>() * mass_matrix(p)
}

/// Coin `W` for a three-leg cycle of total duration `cycle`.
///
/// Each leg carries `exp(-i (cycle/√5) m σ_z)`, so that the three legs
/// together contribute `m σ_z` per unit time since `Σ τ_i = √5 σ_z`.
pub fn coin_w_for_cycle<T: Real>(cycle: T, mass: T) -> Matrix2<T> {
    coin_v::<T>() * mass_phase(cycle * mass / T::lit(5.0).sqrt())
}

/// Lattice spacing and time step `ε` together with the mass `m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkParams<T> {
    pub eps: T,
    pub mass: T,
}

impl<T: Real> WalkParams<T> {
    pub fn new(eps: T, mass: T) -> Result<Self> {
        if !(eps > T::zero()) || !eps.is_finite() {
            return Err(Error::InvalidParameter(format!("eps must be positive and finite, got {eps}")));
        }
        if !mass.is_finite() || mass < T::zero() {
            return Err(Error::InvalidParameter(format!("mass must be finite and non-negative, got {mass}")));
        }
        Ok(Self { eps, mass })
    }
}
