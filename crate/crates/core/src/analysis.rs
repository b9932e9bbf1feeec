//! Wave packets, error norms, convergence-order fits and the momentum-space
//! spectrum of each walk.

use std::str::FromStr;

use serde::Serialize;

use crate::dirac::{dirac_evolve_with, frequency, positive_energy_spinor, DiracParams, Fft2, FourierModeSet};
use crate::error::{Error, Result};
use crate::lattice::{BravaisField, Direction, GridShape, LatticeBasis, TriangularField};
use crate::scalar::{Complex, Real};
use crate::spin::{coin_w, Matrix2, Spinor, WalkParams};
use crate::walk::{
    decode_bravais, decode_triangular, encode_bravais, encode_triangular, triangular_step, StepOperator, WalkKind,
};

/// Smallest accepted packet width, in lattice units.
pub const MIN_SIGMA: f64 = 4.0;

/// Spinor carried by the packet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    /// `+ω` eigenvector of `H(k0)`.
    PositiveEnergy,
    /// `(1, 0)`.
    UpSpinor,
}

impl Branch {
    pub fn name(&self) -> &'static str {
        match self {
            Branch::PositiveEnergy => "positive-energy",
            Branch::UpSpinor => "up-spinor",
        }
    }
}

impl FromStr for Branch {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "positive-energy" | "positive" => Ok(Branch::PositiveEnergy),
            "up-spinor" | "up" => Ok(Branch::UpSpinor),
            other => Err(Error::Config(format!("unknown branch '{other}' (expected positive-energy or up-spinor)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PacketSpec {
    /// Carrier wavevector in physical units.
    pub k0: [f64; 2],
    /// Width of `|ψ|²` in lattice units.
    pub sigma: f64,
    pub branch: Branch,
}

impl PacketSpec {
    pub fn new(k0: [f64; 2], sigma: f64, branch: Branch) -> Result<Self> {
        if !k0.iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidParameter(format!("k0 must be finite, got {k0:?}")));
        }
        if !(sigma >= MIN_SIGMA) || !sigma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "sigma must be at least {MIN_SIGMA} lattice units, got {sigma}"
            )));
        }
        Ok(Self { k0, sigma, branch })
    }

    fn carrier(&self, dp: &DiracParams<f64>) -> Spinor<f64> {
        match self.branch {
            Branch::PositiveEnergy => positive_energy_spinor(self.k0, dp),
            Branch::UpSpinor => Spinor::spin_up(),
        }
    }
}

/// Normalised Gaussian packet on a Bravais lattice, centred on site
/// `(n1/2, n2/2)`.
///
/// The packet is built mode by mode, `ψ̂(k) ∝ exp(-σ²|k-k0|²) e^{-ik·x_c} χ`,
/// so it is smooth and periodic on the torus.
pub fn make_packet(
    shape: GridShape,
    spacing: f64,
    basis: LatticeBasis,
    spec: &PacketSpec,
    dp: &DiracParams<f64>,
) -> Result<BravaisField<f64>> {
    let spec = PacketSpec::new(spec.k0, spec.sigma, spec.branch)?;
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(Error::InvalidParameter(format!("spacing must be positive, got {spacing}")));
    }
    let template = BravaisField::zeros(shape, spacing, basis);
    let fft = Fft2::new(shape);
    let mut modes = FourierModeSet::from_field(&template, &fft);
    let chi = spec.carrier(dp);
    let width = spec.sigma * spacing;
    let center = template.position(shape.n1 / 2, shape.n2 / 2);
    for (k, a) in modes.wavevectors.iter().zip(modes.amplitudes.iter_mut()) {
        let (dx, dy) = (k[0] - spec.k0[0], k[1] - spec.k0[1]);
        let env = (-width * width * (dx * dx + dy * dy)).exp();
        let phase = Complex::from_polar(env, -(k[0] * center[0] + k[1] * center[1]));
        *a = chi.scale(phase);
    }
    let mut field = modes.to_field(&template, &fft);
    let norm = field.norm();
    if !(norm > 0.0) {
        return Err(Error::InvalidParameter("packet has no support on this lattice".into()));
    }
    for s in &mut field.data {
        *s = s.scale(Complex::new(1.0 / norm, 0.0));
    }
    Ok(field)
}

/// How lengths are measured for the triangular walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TriangularFrame {
    /// Cells of side `√3 ε`; the limit has speed `√3/6`.
    Native,
    /// Lengths scaled by `6/√3`; the limit has unit speed.
    Rescaled,
}

impl TriangularFrame {
    pub fn length_scale(&self) -> f64 {
        match self {
            TriangularFrame::Native => 1.0,
            TriangularFrame::Rescaled => 6.0 / 3f64.sqrt(),
        }
    }

    pub fn c_eff(&self) -> f64 {
        match self {
            TriangularFrame::Native => DiracParams::<f64>::triangular_speed(),
            TriangularFrame::Rescaled => 1.0,
        }
    }

    /// Period of the cell lattice for step parameter `eps`.
    pub fn cell_spacing(&self, eps: f64) -> f64 {
        3f64.sqrt() * eps * self.length_scale()
    }
}

/// Packet on the side-0 edges of a triangular field; the other sides are
/// empty. The envelope lives on the cell lattice measured in `frame`.
pub fn make_triangular_packet(
    shape: GridShape,
    eps: f64,
    spec: &PacketSpec,
    mass: f64,
    frame: TriangularFrame,
) -> Result<TriangularField<f64>> {
    let dp = DiracParams::new(mass, frame.c_eff())?;
    let layer = make_packet(shape, frame.cell_spacing(eps), LatticeBasis::TriangularBravais, spec, &dp)?;
    let mut field = TriangularField::zeros(shape, eps);
    field.edges[0] = layer.data;
    Ok(field)
}

/// `√Σ|a−b|²` over every site.
pub fn l2_error<T: Real>(a: &BravaisField<T>, b: &BravaisField<T>) -> Result<T> {
    if a.shape != b.shape {
        return Err(Error::ShapeMismatch(format!("{:?} vs {:?}", a.shape, b.shape)));
    }
    Ok(sum_sq_diff(&a.data, &b.data).sqrt())
}

/// `√Σ|a−b|²` over every edge.
pub fn l2_error_triangular<T: Real>(a: &TriangularField<T>, b: &TriangularField<T>) -> Result<T> {
    if a.shape != b.shape {
        return Err(Error::ShapeMismatch(format!("{:?} vs {:?}", a.shape, b.shape)));
    }
    let total = (0..3).fold(T::zero(), |acc, k| acc + sum_sq_diff(&a.edges[k], &b.edges[k]));
    Ok(total.sqrt())
}

fn sum_sq_diff<T: Real>(a: &[Spinor<T>], b: &[Spinor<T>]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + (*x - *y).norm_sqr())
}

/// Probability-weighted position statistics of a field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub norm_sqr: f64,
    pub mean: [f64; 2],
    /// `√(⟨|x|²⟩ − |⟨x⟩|²)`.
    pub spread: f64,
}

impl Moments {
    fn accumulate(points: impl Iterator<Item = ([f64; 2], f64)>) -> Self {
        let (mut w, mut sx, mut sy, mut sxx) = (0.0, 0.0, 0.0, 0.0);
        for (x, p) in points {
            w += p;
            sx += p * x[0];
            sy += p * x[1];
            sxx += p * (x[0] * x[0] + x[1] * x[1]);
        }
        if w == 0.0 {
            return Self { norm_sqr: 0.0, mean: [0.0; 2], spread: 0.0 };
        }
        let mean = [sx / w, sy / w];
        let var = sxx / w - mean[0] * mean[0] - mean[1] * mean[1];
        Self { norm_sqr: w, mean, spread: var.max(0.0).sqrt() }
    }
}

/// Moments over site positions; no periodic unwrapping.
pub fn moments(field: &BravaisField<f64>) -> Moments {
    Moments::accumulate(field.shape.sites().zip(&field.data).map(|((i, j), s)| (field.position(i, j), s.norm_sqr())))
}

/// Moments over edge midpoints; no periodic unwrapping.
pub fn triangular_moments(field: &TriangularField<f64>) -> Moments {
    let shape = field.shape;
    Moments::accumulate(
        (0..3).flat_map(|k| {
            shape.sites().map(move |(i, j)| (field.edge_midpoint(i, j, k), field.get(i, j, k).norm_sqr()))
        }),
    )
}

/// Walk evolution of a physical (decoded) Bravais field.
pub fn evolve_bravais(op: &StepOperator<f64>, field: &BravaisField<f64>, steps: usize) -> Result<BravaisField<f64>> {
    let encoded = op.kind == WalkKind::Honeycomb;
    let mut f = if encoded { encode_bravais(field) } else { field.clone() };
    for _ in 0..steps {
        f = op.step_bravais(&f)?;
    }
    Ok(if encoded { decode_bravais(&f) } else { f })
}

/// Walk evolution of a physical (decoded) triangular field.
pub fn evolve_triangular(
    op: &StepOperator<f64>,
    field: &TriangularField<f64>,
    steps: usize,
) -> Result<TriangularField<f64>> {
    let mut f = encode_triangular(field);
    for _ in 0..steps {
        f = triangular_step(&f, op)?;
    }
    Ok(decode_triangular(&f))
}

/// Protocol of one convergence sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub walk: WalkKind,
    /// Physical comparison time `T`.
    pub time: f64,
    pub mass: f64,
    /// Step durations; for the triangular walk, durations of one
    /// three-step cycle.
    pub eps_list: Vec<f64>,
    /// Packet; `sigma` is in lattice units of the coarsest `ε`.
    pub packet: PacketSpec,
    /// Lattice extent at the finest `ε`; coarser runs keep the same box.
    pub n_finest: usize,
    pub frame: TriangularFrame,
}

impl SweepConfig {
    pub fn new(walk: WalkKind, time: f64, mass: f64, eps_list: Vec<f64>, packet: PacketSpec, n_finest: usize) -> Self {
        Self { walk, time, mass, eps_list, packet, n_finest, frame: TriangularFrame::Rescaled }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub eps: f64,
    pub l2_error: f64,
    pub n: usize,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub walk: WalkKind,
    /// Sorted by strictly decreasing `eps`.
    pub rows: Vec<ConvergenceRow>,
    /// Slope of `log error` against `log ε`; `None` if any error is zero.
    pub fitted_order: Option<f64>,
    /// RMS residual of the fit in natural-log units.
    pub fit_residual: Option<f64>,
}

/// Least-squares line through `(log x, log y)`; returns `(slope, rms residual)`.
pub fn fit_log_log(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    if x.len() != y.len() || x.len() < 2 || x.iter().chain(y).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let ss: f64 = lx.iter().zip(&ly).map(|(a, b)| (b - icpt - slope * a).powi(2)).sum();
    Some((slope, (ss / n).sqrt()))
}

fn integral_ratio(num: f64, den: f64, what: &str) -> Result<usize> {
    let r = num / den;
    let n = r.round();
    if !(n >= 1.0) || (r - n).abs() > 1e-9 * n.max(1.0) {
        return Err(Error::NonIntegralSteps(format!("{what} = {num}/{den} = {r} is not a positive integer")));
    }
    Ok(n as usize)
}

/// Error of the walk against the continuum reference at one `ε`.
pub fn sweep_point(cfg: &SweepConfig, eps: f64, eps_coarse: f64, eps_fine: f64) -> Result<ConvergenceRow> {
    let n = integral_ratio(cfg.n_finest as f64 * eps_fine, eps, "lattice extent")?;
    let shape = GridShape::square(n)?;
    let sigma = cfg.packet.sigma * eps_coarse / eps;
    let packet = PacketSpec::new(cfg.packet.k0, sigma, cfg.packet.branch)?;
    match cfg.walk {
        WalkKind::Regular | WalkKind::Honeycomb => {
            let steps = integral_ratio(cfg.time, eps, "T/eps")?;
            let dp = DiracParams::new(cfg.mass, 1.0)?;
            let f0 = make_packet(shape, eps, cfg.walk.basis(), &packet, &dp)?;
            let op = StepOperator::new(cfg.walk, WalkParams::new(eps, cfg.mass)?);
            let walked = evolve_bravais(&op, &f0, steps)?;
            let exact = dirac_evolve_with(&f0, cfg.time, &dp, &Fft2::new(shape));
            Ok(ConvergenceRow { eps, l2_error: l2_error(&walked, &exact)?, n, steps })
        }
        WalkKind::Triangular => {
            let cycles = integral_ratio(cfg.time, eps, "T/eps")?;
            let steps = 3 * cycles;
            let step_eps = eps / 3.0;
            let dp = DiracParams::new(cfg.mass, cfg.frame.c_eff())?;
            let f0 = make_triangular_packet(shape, step_eps, &packet, cfg.mass, cfg.frame)?;
            let op = StepOperator::triangular(WalkParams::new(step_eps, cfg.mass)?);
            let walked = evolve_triangular(&op, &f0, steps)?;
            let mut layer = f0.layer(0);
            layer.spacing = cfg.frame.cell_spacing(step_eps);
            let mut exact = TriangularField::zeros(shape, step_eps);
            exact.edges[0] = dirac_evolve_with(&layer, cfg.time, &dp, &Fft2::new(shape)).data;
            Ok(ConvergenceRow { eps, l2_error: l2_error_triangular(&walked, &exact)?, n, steps })
        }
    }
}

impl SweepConfig {
    /// Checks every parameter and step count; returns `ε` sorted decreasing.
    pub fn validate(&self) -> Result<Vec<f64>> {
        if !(self.time > 0.0) || !self.time.is_finite() {
            return Err(Error::InvalidParameter(format!("time must be positive, got {}", self.time)));
        }
        WalkParams::new(1.0, self.mass)?;
        PacketSpec::new(self.packet.k0, self.packet.sigma, self.packet.branch)?;
        let mut eps = self.eps_list.clone();
        if eps.is_empty() || eps.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
            return Err(Error::InvalidParameter(format!("eps list must be non-empty and positive, got {eps:?}")));
        }
        eps.sort_by(|a, b| b.partial_cmp(a).unwrap());
        if eps.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter(format!("eps list has duplicates: {eps:?}")));
        }
        let fine = eps[eps.len() - 1];
        for &e in &eps {
            integral_ratio(self.time, e, "T/eps")?;
            let n = integral_ratio(self.n_finest as f64 * fine, e, "lattice extent")?;
            GridShape::square(n)?;
        }
        Ok(eps)
    }
}

/// Runs every `ε` of the sweep concurrently and fits the convergence order.
pub fn convergence_sweep(cfg: &SweepConfig) -> Result<ConvergenceReport> {
    let eps = cfg.validate()?;
    let (coarse, fine) = (eps[0], eps[eps.len() - 1]);
    let rows: Vec<Result<ConvergenceRow>> = std::thread::scope(|s| {
        let handles: Vec<_> = eps.iter().map(|&e| s.spawn(move || sweep_point(cfg, e, coarse, fine))).collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let x: Vec<f64> = rows.iter().map(|r| r.eps).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.l2_error).collect();
    let fit = fit_log_log(&x, &y);
    Ok(ConvergenceReport { walk: cfg.walk, rows, fitted_order: fit.map(|f| f.0), fit_residual: fit.map(|f| f.1) })
}

fn partial_shift_symbol<T: Real>(phase: T) -> Matrix2<T> {
    let (s, c) = phase.sin_cos();
    Matrix2::diag(Complex::new(c, -s), Complex::new(c, s))
}

/// `W T₂ W T₁ W T₀` in momentum space for hop length `hop`.
fn hex_cycle_symbol<T: Real>(w: &Matrix2<T>, hop: T, k: [T; 2]) -> Matrix2<T> {
    Direction::ALL.iter().fold(Matrix2::identity(), |acc, d| {
        let u = d.unit_vector::<T>();
        *w * partial_shift_symbol(hop * (k[0] * u[0] + k[1] * u[1])) * acc
    })
}

/// 2×2 momentum-space operator of one step: one full step for the regular
/// and honeycomb walks, three steps restricted to side-0 edges for the
/// triangular walk.
pub fn step_symbol<T: Real>(op: &StepOperator<T>, k: [T; 2]) -> Matrix2<T> {
    let eps = op.params.eps;
    match op.kind {
        WalkKind::Regular => {
            let c = op.coins();
            c[2] * partial_shift_symbol(eps * k[0]) * c[1] * partial_shift_symbol(eps * k[1]) * c[0]
        }
        WalkKind::Honeycomb => hex_cycle_symbol(&op.coin_w().expect("hexagonal coin"), eps, k),
        WalkKind::Triangular => {
            let hop = T::lit(3.0).sqrt() / T::lit(2.0) * eps;
            hex_cycle_symbol(&coin_w(&op.params), hop, k)
        }
    }
}

/// Time covered by one [`step_symbol`].
pub fn symbol_duration(kind: WalkKind, eps: f64) -> f64 {
    match kind {
        WalkKind::Triangular => 3.0 * eps,
        _ => eps,
    }
}

/// Continuum parameters a walk converges to, in its native units.
pub fn continuum_params(kind: WalkKind, mass: f64) -> DiracParams<f64> {
    match kind {
        WalkKind::Triangular => DiracParams { mass, c_eff: DiracParams::<f64>::triangular_speed() },
        _ => DiracParams::unit_speed(mass),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DispersionRow {
    pub k: [f64; 2],
    /// Eigenphase on the `−ω` side, `θ₊ ≈ −τω`, in `(−π, π]`.
    pub theta_plus: f64,
    pub theta_minus: f64,
    pub omega_plus: f64,
    pub omega_minus: f64,
    /// Largest `|1 − |λ||` over both eigenvalues.
    pub unitarity_defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DispersionTable {
    pub walk: WalkKind,
    pub eps: f64,
    pub mass: f64,
    /// Duration `τ` of the operator whose phases are listed.
    pub duration: f64,
    pub rows: Vec<DispersionRow>,
}

/// Eigenphases of the step symbol at each wavevector, next to the
/// continuum frequencies `±ω(k)`.
pub fn walk_dispersion(kind: WalkKind, params: WalkParams<f64>, k_grid: &[[f64; 2]]) -> DispersionTable {
    let op = StepOperator::new(kind, params);
    let dp = continuum_params(kind, params.mass);
    let rows = k_grid
        .iter()
        .map(|&k| {
            let [a, b] = step_symbol(&op, k).eigenvalues();
            let (ta, tb) = (a.arg(), b.arg());
            let w = frequency(k, &dp);
            DispersionRow {
                k,
                theta_plus: ta.min(tb),
                theta_minus: ta.max(tb),
                omega_plus: w,
                omega_minus: -w,
                unitarity_defect: (a.norm() - 1.0).abs().max((b.norm() - 1.0).abs()),
            }
        })
        .collect();
    DispersionTable {
        walk: kind,
        eps: params.eps,
        mass: params.mass,
        duration: symbol_duration(kind, params.eps),
        rows,
    }
}

/// Square grid of `count × count` wavevectors covering `[−k_max, k_max]²`.
pub fn k_grid(k_max: f64, count: usize) -> Vec<[f64; 2]> {
    if count <= 1 {
        return vec![[0.0, 0.0]];
    }
    let step = 2.0 * k_max / (count - 1) as f64;
    (0..count).flat_map(|a| (0..count).map(move |b| [-k_max + a as f64 * step, -k_max + b as f64 * step])).collect()
}
