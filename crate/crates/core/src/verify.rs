//! The algebraic identity suite behind `qwalk verify`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::lattice::{rotate_triangles, GridShape, TriangularField};
use crate::spin::{
    basis_change, coin_u, coin_v, coin_w, direction, mass_matrix, pauli, step_phase, tau, Axis, Matrix2, RectAxis,
    WalkParams, XiSign,
};
use crate::tau_solver::{solve_tau_conditions, TauSolverConfig};
use crate::walk::random_spinor;

/// Entrywise tolerance of every algebraic identity.
pub const IDENTITY_TOL: f64 = 1e-12;

/// Deliberate corruptions used as negative controls.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Faults {
    /// Replace `τ_1` by `-τ_1` wherever the suite uses it.
    pub flip_tau1: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: impl Into<String>, deviation: f64, tolerance: f64) -> Self {
        Self { name: name.into(), deviation, tolerance, passed: deviation <= tolerance }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    /// `ξ` of every triple found by the numerical solver.
    pub tau_solutions: Vec<f64>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

fn tau_with(i: usize, faults: Faults) -> Matrix2<f64> {
    let t = tau::<f64>(i, XiSign::Plus);
    if faults.flip_tau1 && i % 3 == 1 {
        t.scale_real(-1.0)
    } else {
        t
    }
}

/// Runs every identity and the `τ` solver; `solver_starts` random starts.
pub fn run_identity_suite(faults: Faults, solver_starts: usize) -> VerifyReport {
    let tol = IDENTITY_TOL;
    let sz = pauli::<f64>(Axis::Z);
    let mut checks = Vec::new();

    for i in 0..3 {
        let d = coin_u::<f64>(i).conjugate(&tau_with(i, faults)).max_abs_diff(&sz);
        checks.push(Check::new(format!("C1: U_{i} tau_{i} U_{i}^dag = sigma_z"), d, tol));
    }

    let (mut cx, mut cy, mut total) = (Matrix2::zero(), Matrix2::zero(), Matrix2::zero());
    for i in 0..3 {
        let [c, s] = direction::<f64>(i);
        let t = tau_with(i, faults);
        cx = cx + t.scale_real(c);
        cy = cy + t.scale_real(s);
        total = total + t;
    }
    checks.push(Check::new("C2: sum cos(2 pi i/3) tau_i = sigma_x", cx.max_abs_diff(&pauli(Axis::X)), tol));
    checks.push(Check::new("C2: sum sin(2 pi i/3) tau_i = sigma_y", cy.max_abs_diff(&pauli(Axis::Y)), tol));
    checks.push(Check::new("sum tau_i = sqrt(5) sigma_z", total.max_abs_diff(&sz.scale_real(5f64.sqrt())), tol));

    let s = step_phase::<f64>();
    checks.push(Check::new("S^3 = I", s.pow(3).max_abs_diff(&Matrix2::identity()), tol));

    let v = coin_v::<f64>();
    let indep =
        (0..3).map(|i| (coin_u::<f64>(i + 1) * coin_u::<f64>(i).adjoint()).max_abs_diff(&v)).fold(0.0, f64::max);
    checks.push(Check::new("U_{i+1} U_i^dag independent of i", indep, tol));

    let mut w_defect: f64 = 0.0;
    let mut vm_defect: f64 = 0.0;
    for (eps, m) in [(0.1, 0.0), (0.1, 1.0), (0.01, 2.5), (0.5, 0.3)] {
        let p = WalkParams::new(eps, m).expect("valid parameters");
        let w = coin_w(&p);
        w_defect = w_defect.max(w.unitarity_defect());
        vm_defect = vm_defect.max((v * mass_matrix(&p)).max_abs_diff(&w));
    }
    checks.push(Check::new("W unitary", w_defect, tol));
    checks.push(Check::new("V M = W", vm_defect, tol));
    checks.push(Check::new("V^3 = I", v.pow(3).max_abs_diff(&Matrix2::identity()), tol));

    let hx = basis_change::<f64>(RectAxis::X);
    let hy = basis_change::<f64>(RectAxis::Y);
    checks.push(Check::new("H sigma_z H^dag = sigma_x", hx.conjugate(&sz).max_abs_diff(&pauli(Axis::X)), tol));
    checks.push(Check::new("H_1 sigma_z H_1^dag = sigma_y", hy.conjugate(&sz).max_abs_diff(&pauli(Axis::Y)), tol));

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let shape = GridShape::new(6, 5).expect("valid shape");
    let f = TriangularField::from_fn(shape, 1.0, |_, _, _| random_spinor(&mut rng));
    let g = rotate_triangles(&rotate_triangles(&rotate_triangles(&f)));
    let cube =
        (0..3).flat_map(|k| f.edges[k].iter().zip(&g.edges[k])).map(|(a, b)| (*a - *b).norm()).fold(0.0, f64::max);
    checks.push(Check::new("R^3 = I (triangle rotation)", cube, tol));

    let report = solve_tau_conditions(&TauSolverConfig { starts: solver_starts, ..Default::default() });
    checks.push(Check::new("tau solver: two solutions", (report.solutions.len() as f64 - 2.0).abs(), 0.0));
    let mut match_dev: f64 = if report.solutions.len() == 2 { 0.0 } else { f64::INFINITY };
    if let [plus, minus] = report.solutions.as_slice() {
        match_dev = plus.distance_to(XiSign::Plus).max(minus.distance_to(XiSign::Minus));
    }
    checks.push(Check::new("tau solver: solutions are xi = +-sqrt(5)/3", match_dev, 1e-8));
    let tau_solutions = report.solutions.iter().map(|s| s.vectors[0].nz).collect();

    VerifyReport { checks, tau_solutions }
}
