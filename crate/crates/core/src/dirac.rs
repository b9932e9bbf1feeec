//! Exact evolution under the continuum Dirac Hamiltonian
//! `H = c(k_x σ_x + k_y σ_y) + m σ_z`, applied mode by mode on the Fourier
//! modes of a periodic lattice field.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::lattice::{BravaisField, GridShape};
use crate::scalar::{Complex, Real};
use crate::spin::{pauli, Axis, Matrix2, Spinor};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiracParams<T> {
    pub mass: T,
    /// Effective speed of light: 1 for the square and honeycomb walks,
    /// `√3/6` for the triangular walk in its native units.
    pub c_eff: T,
}

impl<T: Real> DiracParams<T> {
    pub fn new(mass: T, c_eff: T) -> Result<Self> {
        if !(c_eff > T::zero()) || !c_eff.is_finite() {
            return Err(Error::InvalidParameter(format!("c_eff must be positive, got {c_eff}")));
        }
        if !mass.is_finite() {
            return Err(Error::InvalidParameter(format!("mass must be finite, got {mass}")));
        }
        Ok(Self { mass, c_eff })
    }

    /// `c = 1`.
    pub fn unit_speed(mass: T) -> Self {
        Self { mass, c_eff: T::one() }
    }

    /// `√3/6`, the speed of the triangular walk before rescaling lengths.
    pub fn triangular_speed() -> T {
        T::lit(3.0).sqrt() / T::lit(6.0)
    }
}

pub fn dirac_hamiltonian<T: Real>(k: [T; 2], dp: &DiracParams<T>) -> Matrix2<T> {
    pauli::<T>(Axis::X).scale_real(dp.c_eff * k[0])
        + pauli(Axis::Y).scale_real(dp.c_eff * k[1])
        + pauli(Axis::Z).scale_real(dp.mass)
}

/// `ω = √(c²|k|² + m²)`.
pub fn frequency<T: Real>(k: [T; 2], dp: &DiracParams<T>) -> T {
    let ck = dp.c_eff * k[0].hypot(k[1]);
    ck.hypot(dp.mass)
}

/// Positive and negative energy branches `(ω, -ω)`.
pub fn dispersion<T: Real>(k: [T; 2], dp: &DiracParams<T>) -> (T, T) {
    let w = frequency(k, dp);
    (w, -w)
}

/// Closed form of `exp(-i t H(k))`.
pub fn dirac_propagator<T: Real>(k: [T; 2], t: T, dp: &DiracParams<T>) -> Matrix2<T> {
    let w = frequency(k, dp);
    if w == T::zero() {
        return Matrix2::identity();
    }
    let (s, c) = (w * t).sin_cos();
    Matrix2::identity().scale_real(c) + dirac_hamiltonian(k, dp).scale(Complex::new(T::zero(), -s / w))
}

/// Normalised eigenvector of `H(k)` with eigenvalue `+ω`; the up spinor
/// when `ω = 0`.
pub fn positive_energy_spinor<T: Real>(k: [T; 2], dp: &DiracParams<T>) -> Spinor<T> {
    let w = frequency(k, dp);
    if w == T::zero() {
        return Spinor::spin_up();
    }
    // (H + ω) is the unnormalised projector onto +ω; use its larger column.
    let p = dirac_hamiltonian(k, dp) + Matrix2::identity().scale_real(w);
    let c0 = Spinor::new(p.get(0, 0), p.get(1, 0));
    let c1 = Spinor::new(p.get(0, 1), p.get(1, 1));
    let v = if c0.norm_sqr() >= c1.norm_sqr() { c0 } else { c1 };
    v.scale(Complex::new(T::one() / v.norm(), T::zero()))
}

/// Reciprocal basis `b_i` with `a_i · b_j = 2π δ_ij / spacing`.
pub fn reciprocal_basis<T: Real>(field: &BravaisField<T>) -> [[T; 2]; 2] {
    let [a1, a2] = field.basis.vectors::<T>();
    let (a1, a2) = ([a1[0] * field.spacing, a1[1] * field.spacing], [a2[0] * field.spacing, a2[1] * field.spacing]);
    let det = a1[0] * a2[1] - a1[1] * a2[0];
    let tau = T::lit(2.0) * T::PI();
    [[tau * a2[1] / det, -tau * a2[0] / det], [-tau * a1[1] / det, tau * a1[0] / det]]
}

/// FFT index to signed mode number in `(-n/2, n/2]`.
#[inline]
pub fn signed_mode(m: usize, n: usize) -> isize {
    if m > n / 2 {
        m as isize - n as isize
    } else {
        m as isize
    }
}

/// Wavevector of FFT bin `(m1, m2)`.
pub fn wavevector<T: Real>(b: &[[T; 2]; 2], shape: &GridShape, m1: usize, m2: usize) -> [T; 2] {
    let f1 = T::lit(signed_mode(m1, shape.n1) as f64) / T::from_count(shape.n1);
    let f2 = T::lit(signed_mode(m2, shape.n2) as f64) / T::from_count(shape.n2);
    [f1 * b[0][0] + f2 * b[1][0], f1 * b[0][1] + f2 * b[1][1]]
}

/// Unitary 2-D discrete Fourier transform over a row-major `n1 × n2` grid.
pub struct Fft2<T: Real> {
    shape: GridShape,
    rows: [Arc<dyn Fft<T>>; 2],
    cols: [Arc<dyn Fft<T>>; 2],
}

impl<T: Real> Fft2<T> {
    pub fn new(shape: GridShape) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            shape,
            rows: [planner.plan_fft_forward(shape.n2), planner.plan_fft_inverse(shape.n2)],
            cols: [planner.plan_fft_forward(shape.n1), planner.plan_fft_inverse(shape.n1)],
        }
    }

    fn run(&self, data: &mut [Complex<T>], dir: usize) {
        let GridShape { n1, n2 } = self.shape;
        for row in data.chunks_exact_mut(n2) {
            self.rows[dir].process(row);
        }
        let mut col = vec![Complex::new(T::zero(), T::zero()); n1];
        for j in 0..n2 {
            for i in 0..n1 {
                col[i] = data[i * n2 + j];
            }
            self.cols[dir].process(&mut col);
            for i in 0..n1 {
                data[i * n2 + j] = col[i];
            }
        }
        let scale = T::one() / T::from_count(n1 * n2).sqrt();
        for z in data.iter_mut() {
            *z = *z * scale;
        }
    }

    /// `x̂(m) = N^{-1/2} Σ x(r) e^{-2πi m·r/n}`.
    pub fn forward(&self, data: &mut [Complex<T>]) {
        self.run(data, 0);
    }

    pub fn inverse(&self, data: &mut [Complex<T>]) {
        self.run(data, 1);
    }
}

/// Per-mode spinor amplitudes of a periodic field and their wavevectors.
#[derive(Debug, Clone)]
pub struct FourierModeSet<T> {
    pub shape: GridShape,
    pub wavevectors: Vec<[T; 2]>,
    pub amplitudes: Vec<Spinor<T>>,
}

impl<T: Real> FourierModeSet<T> {
    pub fn from_field(field: &BravaisField<T>, fft: &Fft2<T>) -> Self {
        let shape = field.shape;
        let mut up: Vec<_> = field.data.iter().map(|s| s.up).collect();
        let mut down: Vec<_> = field.data.iter().map(|s| s.down).collect();
        fft.forward(&mut up);
        fft.forward(&mut down);
        let b = reciprocal_basis(field);
        let wavevectors = shape.sites().map(|(m1, m2)| wavevector(&b, &shape, m1, m2)).collect();
        let amplitudes = up.into_iter().zip(down).map(|(u, d)| Spinor::new(u, d)).collect();
        Self { shape, wavevectors, amplitudes }
    }

    /// Inverse transform into a field with the geometry of `template`.
    pub fn to_field(&self, template: &BravaisField<T>, fft: &Fft2<T>) -> BravaisField<T> {
        let mut up: Vec<_> = self.amplitudes.iter().map(|s| s.up).collect();
        let mut down: Vec<_> = self.amplitudes.iter().map(|s| s.down).collect();
        fft.inverse(&mut up);
        fft.inverse(&mut down);
        BravaisField {
            shape: self.shape,
            spacing: template.spacing,
            basis: template.basis,
            data: up.into_iter().zip(down).map(|(u, d)| Spinor::new(u, d)).collect(),
        }
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes.iter().fold(T::zero(), |acc, s| acc + s.norm_sqr())
    }

    /// Fraction of `Σ|ψ̂|²` carried by modes with `|m_a| > n_a/4` along
    /// either reciprocal direction, i.e. outside the central half zone.
    pub fn weight_outside_half_zone(&self) -> T {
        let total = self.norm_sqr();
        let outside = self
            .shape
            .sites()
            .zip(&self.amplitudes)
            .filter(|((m1, m2), _)| {
                4 * signed_mode(*m1, self.shape.n1).unsigned_abs() > self.shape.n1
                    || 4 * signed_mode(*m2, self.shape.n2).unsigned_abs() > self.shape.n2
            })
            .fold(T::zero(), |acc, (_, s)| acc + s.norm_sqr());
        outside / total
    }
}

/// Evolves a lattice field for time `t` under the continuum Dirac equation.
pub fn dirac_evolve<T: Real>(field: &BravaisField<T>, t: T, dp: &DiracParams<T>) -> BravaisField<T> {
    let fft = Fft2::new(field.shape);
    dirac_evolve_with(field, t, dp, &fft)
}

/// [`dirac_evolve`] with a caller-owned FFT plan.
pub fn dirac_evolve_with<T: Real>(
    field: &BravaisField<T>,
    t: T,
    dp: &DiracParams<T>,
    fft: &Fft2<T>,
) -> BravaisField<T> {
    let mut modes = FourierModeSet::from_field(field, fft);
    for (k, a) in modes.wavevectors.iter().zip(modes.amplitudes.iter_mut()) {
        *a = dirac_propagator(*k, t, dp).apply(a);
    }
    modes.to_field(field, fft)
}
