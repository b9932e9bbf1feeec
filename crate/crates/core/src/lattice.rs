//! Periodic spinor fields and the geometric moves the walks are made of.
//!
//! Two storage layouts exist. [`BravaisField`] holds one spinor per site of
//! a periodic two-index lattice, either the square lattice or the lattice
//! spanned by `a₁ = u₀`, `a₂ = u₁` (the hexagon centres of the honeycomb).
//! [`TriangularField`] holds one spinor per edge of a triangular tiling,
//! keyed by the white triangle owning the edge and the side label `k`.
//!
//! Triangular chart: white triangles point down, gray ones up, and the side
//! label is the edge direction (`k = 0` parallel to `u₁`, `k = 1` parallel
//! to `u₂`, `k = 2` horizontal). With side length `a = √3 ε` and white
//! triangle `(i, j)` translated by `a(i u₀ + j u₁)`, the edge midpoints sit
//! at `(3a/4, √3a/4)`, `(5a/4, √3a/4)` and `(a, √3a/2)`. Moving from side
//! `k-1` to side `k` of a white triangle displaces by `(√3/2) ε u_{k-1}`;
//! in a gray triangle it displaces by the opposite vector.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spin::{direction, Matrix2, RectAxis, Spinor};

/// Periodic extents along the two lattice directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridShape {
    pub n1: usize,
    pub n2: usize,
}

impl GridShape {
    pub const MIN_EXTENT: usize = 4;

    pub fn new(n1: usize, n2: usize) -> Result<Self> {
        if n1 < Self::MIN_EXTENT || n2 < Self::MIN_EXTENT {
            return Err(Error::InvalidParameter(format!(
                "grid extents must be at least {}, got {n1}x{n2}",
                Self::MIN_EXTENT
            )));
        }
        Ok(Self { n1, n2 })
    }

    pub fn square(n: usize) -> Result<Self> {
        Self::new(n, n)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n2 + j
    }

    /// Periodic index of `(i + di, j + dj)`.
    #[inline]
    pub fn offset(&self, i: usize, j: usize, di: isize, dj: isize) -> (usize, usize) {
        (wrap(i as isize + di, self.n1), wrap(j as isize + dj, self.n2))
    }

    pub fn sites(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n1).flat_map(move |i| (0..self.n2).map(move |j| (i, j)))
    }
}

#[inline]
fn wrap(x: isize, n: usize) -> usize {
    x.rem_euclid(n as isize) as usize
}

/// Which pair of unit vectors spans a [`BravaisField`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatticeBasis {
    /// `a₁ = e_x`, `a₂ = e_y`.
    Rectangular,
    /// `a₁ = u₀`, `a₂ = u₁`.
    TriangularBravais,
}

impl LatticeBasis {
    pub fn vectors<T: Real>(&self) -> [[T; 2]; 2] {
        match self {
            LatticeBasis::Rectangular => [[T::one(), T::zero()], [T::zero(), T::one()]],
            LatticeBasis::TriangularBravais => [direction(0), direction(1)],
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            LatticeBasis::Rectangular => "rectangular",
            LatticeBasis::TriangularBravais => "triangular-bravais",
        }
    }
}

/// One of the three hexagonal directions `u_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Direction(usize);

impl Direction {
    pub const ALL: [Direction; 3] = [Direction(0), Direction(1), Direction(2)];

    pub fn new(i: usize) -> Result<Self> {
        if i > 2 {
            return Err(Error::InvalidParameter(format!("direction index must be 0, 1 or 2, got {i}")));
        }
        Ok(Self(i))
    }

    pub fn index(&self) -> usize {
        self.0
    }

    pub fn unit_vector<T: Real>(&self) -> [T; 2] {
        direction(self.0)
    }

    /// Index displacement of `+u_i` on the `(u₀, u₁)` lattice.
    pub fn index_offset(&self) -> (isize, isize) {
        match self.0 {
            0 => (1, 0),
            1 => (0, 1),
            _ => (-1, -1),
        }
    }
}

/// Target of a spin-dependent partial shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftDirection {
    Rect(RectAxis),
    Hex(Direction),
}

impl ShiftDirection {
    fn required_basis(&self) -> LatticeBasis {
        match self {
            ShiftDirection::Rect(_) => LatticeBasis::Rectangular,
            ShiftDirection::Hex(_) => LatticeBasis::TriangularBravais,
        }
    }

    fn index_offset(&self) -> (isize, isize) {
        match self {
            ShiftDirection::Rect(RectAxis::X) => (1, 0),
            ShiftDirection::Rect(RectAxis::Y) => (0, 1),
            ShiftDirection::Hex(d) => d.index_offset(),
        }
    }
}

/// Periodic lattice of spinors, dense row-major in `(i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BravaisField<T> {
    pub shape: GridShape,
    /// Distance between neighbouring sites.
    pub spacing: T,
    pub basis: LatticeBasis,
    pub data: Vec<Spinor<T>>,
}

impl<T: Real> BravaisField<T> {
    pub fn zeros(shape: GridShape, spacing: T, basis: LatticeBasis) -> Self {
        Self { shape, spacing, basis, data: vec![Spinor::zero(); shape.len()] }
    }

    pub fn from_fn(
        shape: GridShape,
        spacing: T,
        basis: LatticeBasis,
        mut f: impl FnMut(usize, usize) -> Spinor<T>,
    ) -> Self {
        let data = shape.sites().map(|(i, j)| f(i, j)).collect();
        Self { shape, spacing, basis, data }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Spinor<T> {
        self.data[self.shape.index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, s: Spinor<T>) {
        let idx = self.shape.index(i, j);
        self.data[idx] = s;
    }

    /// Physical position `spacing·(i a₁ + j a₂)`.
    pub fn position(&self, i: usize, j: usize) -> [T; 2] {
        let [a1, a2] = self.basis.vectors::<T>();
        let fi = T::from_count(i) * self.spacing;
        let fj = T::from_count(j) * self.spacing;
        [fi * a1[0] + fj * a2[0], fi * a1[1] + fj * a2[1]]
    }

    pub fn norm_sqr(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, s| acc + s.norm_sqr())
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(Spinor::is_finite)
    }

    /// Multiplies every spinor by `m`.
    pub fn apply_coin(&mut self, m: &Matrix2<T>) {
        for s in &mut self.data {
            *s = m.apply(s);
        }
    }

    /// Periodic translation of the whole field by `(di, dj)` sites.
    pub fn translate(&self, di: isize, dj: isize) -> Self {
        self.move_components((di, dj), (di, dj))
    }

    /// Moves up components by `up` and down components by `down` index steps.
    fn move_components(&self, up: (isize, isize), down: (isize, isize)) -> Self {
        let shape = self.shape;
        let mut data = Vec::with_capacity(shape.len());
        for i in 0..shape.n1 {
            let iu = wrap(i as isize - up.0, shape.n1);
            let id = wrap(i as isize - down.0, shape.n1);
            for j in 0..shape.n2 {
                let ju = wrap(j as isize - up.1, shape.n2);
                let jd = wrap(j as isize - down.1, shape.n2);
                data.push(Spinor::new(self.data[iu * shape.n2 + ju].up, self.data[id * shape.n2 + jd].down));
            }
        }
        Self { shape, spacing: self.spacing, basis: self.basis, data }
    }

    fn require_basis(&self, expected: LatticeBasis) -> Result<()> {
        if self.basis != expected {
            return Err(Error::BasisMismatch { expected: expected.name(), found: self.basis.name() });
        }
        Ok(())
    }
}

/// Moves whole spinors `s` sites along a square-lattice axis.
pub fn shift_rect<T: Real>(field: &BravaisField<T>, axis: RectAxis, s: isize) -> Result<BravaisField<T>> {
    field.require_basis(LatticeBasis::Rectangular)?;
    Ok(match axis {
        RectAxis::X => field.translate(s, 0),
        RectAxis::Y => field.translate(0, s),
    })
}

/// Spin-dependent partial shift: the up component moves one site along
/// `+dir`, the down component one site along `-dir`.
pub fn partial_shift<T: Real>(field: &BravaisField<T>, dir: ShiftDirection) -> Result<BravaisField<T>> {
    field.require_basis(dir.required_basis())?;
    let (di, dj) = dir.index_offset();
    Ok(field.move_components((di, dj), (-di, -dj)))
}

/// Index offset from white triangle `v` to the white triangle that stores,
/// at side `k-1`, the down component the gray triangle across side `k` of
/// `v` rotates into position `k`.
pub const NEIGHBOR_OFFSETS: [(isize, isize); 3] = [(-1, -1), (1, 0), (0, 1)];

/// Gray triangle across side `k` of white triangle `(i, j)`, as the white
/// triangle sharing its side `k - 1`.
#[inline]
pub fn neighbor(shape: &GridShape, i: usize, j: usize, k: usize) -> (usize, usize) {
    let (di, dj) = NEIGHBOR_OFFSETS[k % 3];
    shape.offset(i, j, di, dj)
}

/// Spinors on the three edge classes of a periodic triangular tiling.
///
/// `edges[k][index(i, j)]` is the spinor on side `k` of white triangle
/// `(i, j)`; its up component belongs to the white triangle, its down
/// component to the gray triangle across that side.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangularField<T> {
    pub shape: GridShape,
    /// Step parameter `ε`; triangle sides have length `√3 ε`.
    pub spacing: T,
    pub edges: [Vec<Spinor<T>>; 3],
}

impl<T: Real> TriangularField<T> {
    pub fn zeros(shape: GridShape, spacing: T) -> Self {
        let layer = vec![Spinor::zero(); shape.len()];
        Self { shape, spacing, edges: [layer.clone(), layer.clone(), layer] }
    }

    pub fn from_fn(shape: GridShape, spacing: T, mut f: impl FnMut(usize, usize, usize) -> Spinor<T>) -> Self {
        let edges = [0, 1, 2].map(|k| shape.sites().map(|(i, j)| f(i, j, k)).collect());
        Self { shape, spacing, edges }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> Spinor<T> {
        self.edges[k][self.shape.index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, s: Spinor<T>) {
        let idx = self.shape.index(i, j);
        self.edges[k][idx] = s;
    }

    /// Side length `√3 ε`, also the period of the cell lattice.
    pub fn cell_spacing(&self) -> T {
        T::lit(3.0).sqrt() * self.spacing
    }

    /// Midpoint of side `k` of white triangle `(i, j)`.
    pub fn edge_midpoint(&self, i: usize, j: usize, k: usize) -> [T; 2] {
        let a = self.cell_spacing();
        let r3 = T::lit(3.0).sqrt();
        let q = T::lit(0.25);
        let local = match k % 3 {
            0 => [T::lit(3.0) * q * a, r3 * q * a],
            1 => [T::lit(5.0) * q * a, r3 * q * a],
            _ => [a, r3 * T::lit(0.5) * a],
        };
        let [u0, u1] = [direction::<T>(0), direction::<T>(1)];
        let (fi, fj) = (T::from_count(i) * a, T::from_count(j) * a);
        [local[0] + fi * u0[0] + fj * u1[0], local[1] + fi * u0[1] + fj * u1[1]]
    }

    pub fn norm_sqr(&self) -> T {
        self.edges.iter().flatten().fold(T::zero(), |acc, s| acc + s.norm_sqr())
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.edges.iter().flatten().all(Spinor::is_finite)
    }

    /// Periodic translation by `(di, dj)` cells.
    pub fn translate(&self, di: isize, dj: isize) -> Self {
        let shape = self.shape;
        Self::from_fn(shape, self.spacing, |i, j, k| {
            let (si, sj) = shape.offset(i, j, -di, -dj);
            self.get(si, sj, k)
        })
    }

    /// Layer of side-`k` spinors as a Bravais field on the cell lattice.
    pub fn layer(&self, k: usize) -> BravaisField<T> {
        BravaisField {
            shape: self.shape,
            spacing: self.cell_spacing(),
            basis: LatticeBasis::TriangularBravais,
            data: self.edges[k % 3].clone(),
        }
    }
}

/// One gather sweep of the triangular walk: for every white triangle `v`
/// and side `k`, take the up component at `(v, k-1)` and the down component
/// at `(nb(v, k), k-1)`, apply `coin` and store at `(v, k)`.
pub(crate) fn gather_rotate<T: Real>(
    field: &TriangularField<T>,
    coin: Option<&Matrix2<T>>,
    nb: impl Fn(&GridShape, usize, usize, usize) -> (usize, usize),
) -> TriangularField<T> {
    let shape = field.shape;
    let edges = [0usize, 1, 2].map(|k| {
        let src = &field.edges[(k + 2) % 3];
        let mut out = Vec::with_capacity(shape.len());
        for (i, j) in shape.sites() {
            let (ni, nj) = nb(&shape, i, j, k);
            let s = Spinor::new(src[shape.index(i, j)].up, src[shape.index(ni, nj)].down);
            out.push(match coin {
                Some(m) => m.apply(&s),
                None => s,
            });
        }
        out
    });
    TriangularField { shape, spacing: field.spacing, edges }
}

/// Rotates every triangle anticlockwise: each component at side `k` hops to
/// side `k+1` of the same (white or gray) triangle.
pub fn rotate_triangles<T: Real>(field: &TriangularField<T>) -> TriangularField<T> {
    gather_rotate(field, None, neighbor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Complex;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spinor(rng: &mut ChaCha8Rng) -> Spinor<f64> {
        Spinor::new(
            Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        )
    }

    fn random_field(shape: GridShape, basis: LatticeBasis, seed: u64) -> BravaisField<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        BravaisField::from_fn(shape, 0.1, basis, |_, _| random_spinor(&mut rng))
    }

    fn random_tri(shape: GridShape, seed: u64) -> TriangularField<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        TriangularField::from_fn(shape, 0.1, |_, _, _| random_spinor(&mut rng))
    }

    fn periodic_delta(p: [f64; 2], q: [f64; 2], field: &TriangularField<f64>) -> [f64; 2] {
        // Minimal-image difference q - p on the periodic cell lattice.
        let a = field.cell_spacing();
        let [u0, u1] = [direction::<f64>(0), direction::<f64>(1)];
        let d = [q[0] - p[0], q[1] - p[1]];
        // Solve d = a (x u0 + y u1).
        let det = u0[0] * u1[1] - u0[1] * u1[0];
        let x = (d[0] * u1[1] - d[1] * u1[0]) / det / a;
        let y = (u0[0] * d[1] - u0[1] * d[0]) / det / a;
        let (n1, n2) = (field.shape.n1 as f64, field.shape.n2 as f64);
        let x = x - n1 * (x / n1).round();
        let y = y - n2 * (y / n2).round();
        [a * (x * u0[0] + y * u1[0]), a * (x * u0[1] + y * u1[1])]
    }

    #[test]
    fn grid_shape_rejects_small_extents() {
        assert!(GridShape::new(3, 8).is_err());
        assert!(GridShape::new(4, 4).is_ok());
    }

    #[test]
    fn rect_shift_moves_delta() {
        let shape = GridShape::square(6).unwrap();
        let mut f = BravaisField::zeros(shape, 1.0, LatticeBasis::Rectangular);
        f.set(0, 0, Spinor::spin_up());
        let g = shift_rect(&f, RectAxis::X, 1).unwrap();
        assert_eq!(g.get(1, 0), Spinor::spin_up());
        assert_eq!(g.norm_sqr(), 1.0);
    }

    #[test]
    fn rect_shift_inverse_and_period() {
        let shape = GridShape::new(5, 7).unwrap();
        let f = random_field(shape, LatticeBasis::Rectangular, 1);
        let back = shift_rect(&shift_rect(&f, RectAxis::Y, 1).unwrap(), RectAxis::Y, -1).unwrap();
        assert_eq!(back, f);
        let mut g = f.clone();
        for _ in 0..shape.n1 {
            g = shift_rect(&g, RectAxis::X, 1).unwrap();
        }
        assert_eq!(g, f);
    }

    #[test]
    fn rect_shift_rejects_wrong_basis() {
        let f = random_field(GridShape::square(4).unwrap(), LatticeBasis::TriangularBravais, 2);
        assert!(matches!(shift_rect(&f, RectAxis::X, 1), Err(Error::BasisMismatch { .. })));
        assert!(partial_shift(&f, ShiftDirection::Rect(RectAxis::X)).is_err());
    }

    #[test]
    fn partial_shift_branches() {
        let shape = GridShape::square(6).unwrap();
        let mut f = BravaisField::zeros(shape, 1.0, LatticeBasis::TriangularBravais);
        f.set(0, 0, Spinor::spin_up());
        let g = partial_shift(&f, ShiftDirection::Hex(Direction::ALL[0])).unwrap();
        assert_eq!(g.get(1, 0), Spinor::spin_up());

        let mut f = BravaisField::zeros(shape, 1.0, LatticeBasis::TriangularBravais);
        f.set(0, 0, Spinor::spin_down());
        let g = partial_shift(&f, ShiftDirection::Hex(Direction::ALL[0])).unwrap();
        assert_eq!(g.get(5, 0), Spinor::spin_down());

        let mut f = BravaisField::zeros(shape, 1.0, LatticeBasis::TriangularBravais);
        f.set(2, 2, Spinor::spin_up());
        let g = partial_shift(&f, ShiftDirection::Hex(Direction::ALL[2])).unwrap();
        assert_eq!(g.get(1, 1), Spinor::spin_up());
    }

    #[test]
    fn three_hex_shifts_cancel() {
        let f = random_field(GridShape::new(6, 9).unwrap(), LatticeBasis::TriangularBravais, 3);
        let mut g = f.clone();
        for d in Direction::ALL {
            g = partial_shift(&g, ShiftDirection::Hex(d)).unwrap();
        }
        assert_eq!(g, f);
    }

    #[test]
    fn index_offsets_match_unit_vectors() {
        for d in Direction::ALL {
            let (di, dj) = d.index_offset();
            let [a1, a2] = LatticeBasis::TriangularBravais.vectors::<f64>();
            let u = d.unit_vector::<f64>();
            let v = [di as f64 * a1[0] + dj as f64 * a2[0], di as f64 * a1[1] + dj as f64 * a2[1]];
            assert!((u[0] - v[0]).abs() < 1e-15 && (u[1] - v[1]).abs() < 1e-15);
        }
    }

    #[test]
    fn position_map_is_injective_on_one_period() {
        let shape = GridShape::new(5, 6).unwrap();
        let f = BravaisField::<f64>::zeros(shape, 0.3, LatticeBasis::TriangularBravais);
        let pts: Vec<[f64; 2]> = shape.sites().map(|(i, j)| f.position(i, j)).collect();
        for a in 0..pts.len() {
            for b in a + 1..pts.len() {
                let d = (pts[a][0] - pts[b][0]).hypot(pts[a][1] - pts[b][1]);
                assert!(d > 0.29);
            }
        }
    }

    #[test]
    fn neighbor_is_a_bijection() {
        let shape = GridShape::new(5, 7).unwrap();
        for k in 0..3 {
            let mut seen = vec![false; shape.len()];
            for (i, j) in shape.sites() {
                let (a, b) = neighbor(&shape, i, j, k);
                assert!(!seen[shape.index(a, b)]);
                seen[shape.index(a, b)] = true;
            }
        }
    }

    #[test]
    fn rotation_displacements_follow_hexagonal_directions() {
        let shape = GridShape::new(6, 6).unwrap();
        let f = TriangularField::<f64>::zeros(shape, 0.2);
        let hop = 3f64.sqrt() / 2.0 * f.spacing;
        for (i, j) in shape.sites() {
            for k in 0..3 {
                let u = direction::<f64>(k + 2);
                // White side k-1 -> k moves by +hop·u_{k-1}.
                let d = periodic_delta(f.edge_midpoint(i, j, (k + 2) % 3), f.edge_midpoint(i, j, k), &f);
                assert!((d[0] - hop * u[0]).abs() < 1e-12 && (d[1] - hop * u[1]).abs() < 1e-12);
                // Gray: from side k-1 owned by the neighbour to side k of v, moves by -hop·u_{k-1}.
                let (ni, nj) = neighbor(&shape, i, j, k);
                let d = periodic_delta(f.edge_midpoint(ni, nj, (k + 2) % 3), f.edge_midpoint(i, j, k), &f);
                assert!((d[0] + hop * u[0]).abs() < 1e-12 && (d[1] + hop * u[1]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn edge_midpoints_of_gray_triangle_form_its_sides() {
        // Up components of white v at side k and down components that the
        // neighbour map collects belong to a triangle whose midpoints are a
        // half-size copy of the white one, rotated by π.
        let shape = GridShape::new(6, 6).unwrap();
        let f = TriangularField::<f64>::zeros(shape, 1.0);
        let a = f.cell_spacing();
        for k in 0..3 {
            let p = f.edge_midpoint(2, 2, k);
            let q = f.edge_midpoint(2, 2, (k + 1) % 3);
            assert!(((q[0] - p[0]).hypot(q[1] - p[1]) - a / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rotation_moves_delta_to_next_side() {
        let shape = GridShape::new(4, 4).unwrap();
        let mut f = TriangularField::zeros(shape, 1.0);
        f.set(1, 2, 0, Spinor::spin_up());
        let g = rotate_triangles(&f);
        assert_eq!(g.get(1, 2, 1), Spinor::spin_up());
        assert_eq!(g.norm_sqr(), 1.0);
    }

    #[test]
    fn rotation_cubed_is_identity() {
        let f = random_tri(GridShape::new(5, 6).unwrap(), 4);
        let g = rotate_triangles(&rotate_triangles(&rotate_triangles(&f)));
        assert_eq!(g, f);
        // Each component is permuted separately: the multiset of component moduli is unchanged.
        let sorted = |t: &TriangularField<f64>| {
            let mut v: Vec<f64> = t.edges.iter().flatten().flat_map(|s| [s.up.norm_sqr(), s.down.norm_sqr()]).collect();
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            v
        };
        assert_eq!(sorted(&rotate_triangles(&f)), sorted(&f));
    }
}
