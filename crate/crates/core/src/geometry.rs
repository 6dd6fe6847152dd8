//! Grassmannian points, affine planes, Haar sampling and the Kelvin map.
//!
//! Subspaces of ℝⁿ are stored as orthonormal column frames. Everything is stack
//! allocated: ambient dimensions up to [`MAX_DIM`] are supported, which covers every
//! transform in this crate.

use arrayvec::ArrayVec;
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::rng::{Stream, StreamHandle};
use crate::tolerances;

pub const MAX_DIM: usize = 4;

/// A vector of ℝⁿ, n ≤ [`MAX_DIM`].
pub type Vector = ArrayVec<f64, MAX_DIM>;

pub fn vector(xs: &[f64]) -> Vector {
    assert!(xs.len() <= MAX_DIM, "ambient dimension above {MAX_DIM}");
    xs.iter().copied().collect()
}

pub fn zeros(n: usize) -> Vector {
    (0..n).map(|_| 0.0).collect()
}

pub fn basis_vector(n: usize, i: usize) -> Vector {
    (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn add(a: &[f64], b: &[f64]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vector {
    a.iter().map(|x| s * x).collect()
}

/// a + s·b
pub fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DIM {
        return Err(Error::Dimension(format!("ambient dimension {n} outside 1..={MAX_DIM}")));
    }
    Ok(())
}

/// Orthonormalise `candidates` against `basis` (appending), skipping dependent vectors.
/// Two passes of modified Gram–Schmidt keep the result orthonormal to rounding.
fn extend_orthonormal(basis: &mut ArrayVec<Vector, MAX_DIM>, candidate: &[f64]) -> bool {
    let mut v: Vector = candidate.iter().copied().collect();
    let scale0 = norm(&v);
    if scale0 == 0.0 {
        return false;
    }
    for _ in 0..2 {
        for b in basis.iter() {
            let c = dot(&v, b);
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= c * bi;
            }
        }
    }
    let r = norm(&v);
    if r <= tolerances::RANK * scale0 || basis.is_full() {
        return false;
    }
    for vi in v.iter_mut() {
        *vi /= r;
    }
    basis.push(v);
    true
}

/// A point of the Grassmannian G(n,k): a k-dimensional linear subspace of ℝⁿ.
#[derive(Clone, Debug)]
pub struct GrassmannPoint {
    n: usize,
    frame: ArrayVec<Vector, MAX_DIM>,
}

impl GrassmannPoint {
    /// Subspace spanned by an orthonormal frame; fails if the frame is not orthonormal.
    pub fn from_frame(n: usize, columns: &[Vector]) -> Result<Self> {
        check_dim(n)?;
        if columns.len() > n || columns.iter().any(|c| c.len() != n) {
            return Err(Error::Dimension(format!("frame of {} columns in ℝ^{n}", columns.len())));
        }
        let mut worst: f64 = 0.0;
        for (i, a) in columns.iter().enumerate() {
            for (j, b) in columns.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot(a, b) - target).abs());
            }
        }
        if worst > tolerances::FRAME {
            return Err(Error::NotOrthonormal(worst));
        }
        Ok(GrassmannPoint { n, frame: columns.iter().cloned().collect() })
    }

    /// Span of arbitrary vectors; fails if they are linearly dependent.
    pub fn span(n: usize, vectors: &[Vector]) -> Result<Self> {
        check_dim(n)?;
        let mut frame = ArrayVec::new();
        for v in vectors {
            if v.len() != n {
                return Err(Error::Dimension(format!("vector of length {} in ℝ^{n}", v.len())));
            }
            if !extend_orthonormal(&mut frame, v) {
                return Err(invalid("spanning vectors are linearly dependent"));
            }
        }
        Ok(GrassmannPoint { n, frame })
    }

    /// span(e₁, …, e_k).
    pub fn coordinate(n: usize, k: usize) -> Result<Self> {
        check_dim(n)?;
        if k > n {
            return Err(Error::Dimension(format!("k = {k} > n = {n}")));
        }
        Ok(GrassmannPoint { n, frame: (0..k).map(|i| basis_vector(n, i)).collect() })
    }

    pub fn whole(n: usize) -> Result<Self> {
        Self::coordinate(n, n)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.frame.len()
    }

    pub fn columns(&self) -> &[Vector] {
        &self.frame
    }

    /// Orthogonal projector onto the subspace, as rows of an n×n matrix.
    pub fn projector(&self) -> [[f64; MAX_DIM]; MAX_DIM] {
        let mut p = [[0.0; MAX_DIM]; MAX_DIM];
        for c in &self.frame {
            for i in 0..self.n {
                for j in 0..self.n {
                    p[i][j] += c[i] * c[j];
                }
            }
        }
        p
    }

    /// Orthogonal projection of `v` onto the subspace.
    pub fn project(&self, v: &[f64]) -> Vector {
        let mut out = zeros(self.n);
        for c in &self.frame {
            let s = dot(c, v);
            for (o, ci) in out.iter_mut().zip(c) {
                *o += s * ci;
            }
        }
        out
    }

    /// Orthogonal projection of `v` onto the orthogonal complement.
    pub fn project_complement(&self, v: &[f64]) -> Vector {
        let p = self.project(v);
        sub(v, &p)
    }

    /// Orthogonal complement in ℝⁿ.
    pub fn complement(&self) -> GrassmannPoint {
        let mut basis = self.frame.clone();
        let start = basis.len();
        // Add coordinate axes in order of decreasing residual for stability.
        while basis.len() < self.n {
            let mut best = (0usize, -1.0);
            for i in 0..self.n {
                let e = basis_vector(self.n, i);
                let mut r = e.clone();
                for b in &basis {
                    let c = dot(&r, b);
                    r = axpy(&r, -c, b);
                }
                let rn = norm(&r);
                if rn > best.1 {
                    best = (i, rn);
                }
            }
            let added = extend_orthonormal(&mut basis, &basis_vector(self.n, best.0));
            debug_assert!(added);
        }
        GrassmannPoint { n: self.n, frame: basis[start..].iter().cloned().collect() }
    }

    /// Orthogonal complement of `self` inside `ambient` (requires `self ⊂ ambient`).
    pub fn complement_within(&self, ambient: &GrassmannPoint) -> Result<GrassmannPoint> {
        if !self.is_subspace_of(ambient) {
            return Err(invalid("subspace is not contained in the ambient subspace"));
        }
        let mut basis = self.frame.clone();
        let start = basis.len();
        for a in ambient.columns() {
            extend_orthonormal(&mut basis, a);
            if basis.len() == ambient.k() {
                break;
            }
        }
        Ok(GrassmannPoint { n: self.n, frame: basis[start..].iter().cloned().collect() })
    }

    /// Direct sum with another subspace (which must be independent of this one).
    pub fn direct_sum(&self, other: &GrassmannPoint) -> Result<GrassmannPoint> {
        let mut vs: Vec<Vector> = self.frame.to_vec();
        vs.extend(other.columns().iter().cloned());
        GrassmannPoint::span(self.n, &vs)
    }

    pub fn contains(&self, v: &[f64]) -> bool {
        norm(&self.project_complement(v)) <= 1e-9 * norm(v).max(1.0)
    }

    pub fn is_subspace_of(&self, other: &GrassmannPoint) -> bool {
        self.n == other.n && self.frame.iter().all(|c| other.contains(c))
    }

    /// Same subspace, compared by projectors in the Frobenius norm.
    pub fn approx_eq(&self, other: &GrassmannPoint) -> bool {
        if self.n != other.n || self.k() != other.k() {
            return false;
        }
        let (p, q) = (self.projector(), other.projector());
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                s += (p[i][j] - q[i][j]).powi(2);
            }
        }
        s.sqrt() <= tolerances::PROJECTOR_EQUALITY
    }

    /// Image under a rotation; the frame is mapped column by column.
    pub fn rotate(&self, g: &Rotation) -> GrassmannPoint {
        GrassmannPoint { n: self.n, frame: self.frame.iter().map(|c| g.apply(c)).collect() }
    }

    /// Vector with the given coordinates in this subspace's frame.
    pub fn embed(&self, coords: &[f64]) -> Vector {
        let mut out = zeros(self.n);
        for (c, &s) in self.frame.iter().zip(coords) {
            for (o, ci) in out.iter_mut().zip(c) {
                *o += s * ci;
            }
        }
        out
    }
}

/// A point of the affine Grassmannian AG(n,k): the plane `subspace + offset`, with the
/// offset orthogonal to the subspace.
#[derive(Clone, Debug)]
pub struct AffinePlane {
    subspace: GrassmannPoint,
    offset: Vector,
}

impl AffinePlane {
    pub fn new(subspace: GrassmannPoint, offset: Vector) -> Result<Self> {
        if offset.len() != subspace.n() {
            return Err(Error::Dimension("offset length differs from ambient dimension".into()));
        }
        let along = norm(&subspace.project(&offset));
        if along > tolerances::OFFSET_ORTHOGONALITY * norm(&offset).max(1.0) {
            return Err(invalid(format!("offset has component {along:.3e} along the subspace")));
        }
        Ok(AffinePlane { subspace, offset })
    }

    /// The plane through `point` parallel to `subspace`.
    pub fn through(subspace: GrassmannPoint, point: &[f64]) -> Self {
        let offset = subspace.project_complement(point);
        AffinePlane { subspace, offset }
    }

    /// A point of ℝⁿ viewed as an element of AG(n,0).
    pub fn point(p: &[f64]) -> Result<Self> {
        Ok(AffinePlane { subspace: GrassmannPoint::coordinate(p.len(), 0)?, offset: vector(p) })
    }

    pub fn subspace(&self) -> &GrassmannPoint {
        &self.subspace
    }

    pub fn offset(&self) -> &Vector {
        &self.offset
    }

    pub fn n(&self) -> usize {
        self.subspace.n()
    }

    pub fn k(&self) -> usize {
        self.subspace.k()
    }

    /// Euclidean distance |τ| from the plane to the origin.
    pub fn distance(&self) -> f64 {
        norm(&self.offset)
    }

    pub fn rotate(&self, g: &Rotation) -> AffinePlane {
        AffinePlane { subspace: self.subspace.rotate(g), offset: g.apply(&self.offset) }
    }

    /// The plane translated by `a`.
    pub fn translate(&self, a: &[f64]) -> AffinePlane {
        AffinePlane::through(self.subspace.clone(), &add(&self.offset, a))
    }

    /// Smallest linear subspace containing the plane: span(ξ, u).
    pub fn linear_hull(&self) -> Result<GrassmannPoint> {
        let d = self.distance();
        if d <= tolerances::KELVIN_MIN_OFFSET {
            return Err(Error::KelvinUndefined);
        }
        let mut vs: Vec<Vector> = self.subspace.columns().to_vec();
        vs.push(scale(&self.offset, 1.0 / d));
        GrassmannPoint::span(self.n(), &vs)
    }

    /// Kelvin-type map AG(n,k) → AG(n, n−k−1): τ = (ξ,u) ↦ ({τ}^⊥, −u/|u|²).
    pub fn kelvin(&self) -> Result<AffinePlane> {
        let hull = self.linear_hull()?;
        let d2 = self.distance().powi(2);
        Ok(AffinePlane { subspace: hull.complement(), offset: scale(&self.offset, -1.0 / d2) })
    }

    pub fn approx_eq(&self, other: &AffinePlane, tol: f64) -> bool {
        self.subspace.approx_eq(&other.subspace) && norm(&sub(&self.offset, &other.offset)) <= tol
    }
}

/// An element of SO(n) together with the stream it was drawn from.
#[derive(Clone, Debug)]
pub struct Rotation {
    n: usize,
    /// Columns of the matrix.
    columns: [[f64; MAX_DIM]; MAX_DIM],
    pub provenance: Option<StreamHandle>,
}

impl Rotation {
    pub fn identity(n: usize) -> Self {
        let mut columns = [[0.0; MAX_DIM]; MAX_DIM];
        for (i, c) in columns.iter_mut().enumerate().take(n) {
            c[i] = 1.0;
        }
        Rotation { n, columns, provenance: None }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Column `j`, i.e. the image of e_j.
    pub fn column(&self, j: usize) -> Vector {
        self.columns[j][..self.n].iter().copied().collect()
    }

    pub fn apply(&self, v: &[f64]) -> Vector {
        let mut out = zeros(self.n);
        for (j, &vj) in v.iter().enumerate() {
            for (i, o) in out.iter_mut().enumerate() {
                *o += self.columns[j][i] * vj;
            }
        }
        out
    }

    pub fn determinant(&self) -> f64 {
        let mut a = [[0.0; MAX_DIM]; MAX_DIM];
        for (i, row) in a.iter_mut().enumerate().take(self.n) {
            for (j, x) in row.iter_mut().enumerate().take(self.n) {
                *x = self.columns[j][i];
            }
        }
        determinant(&mut a, self.n)
    }
}

fn determinant(a: &mut [[f64; MAX_DIM]; MAX_DIM], n: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        if a[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        det *= a[col][col];
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    det
}

/// Haar-distributed rotation: Gram–Schmidt of a Gaussian matrix (positive-diagonal QR),
/// with the first column negated when the determinant is −1.
pub fn sample_rotation(n: usize, stream: &mut Stream) -> Result<Rotation> {
    check_dim(n)?;
    loop {
        let mut frame: ArrayVec<Vector, MAX_DIM> = ArrayVec::new();
        let mut ok = true;
        for _ in 0..n {
            let g: Vector = (0..n).map(|_| stream.gaussian()).collect();
            if !extend_orthonormal(&mut frame, &g) {
                ok = false;
                break;
            }
        }
        if !ok {
            continue;
        }
        let mut columns = [[0.0; MAX_DIM]; MAX_DIM];
        for (c, f) in columns.iter_mut().zip(&frame) {
            c[..n].copy_from_slice(f);
        }
        let mut r = Rotation { n, columns, provenance: Some(stream.handle()) };
        if r.determinant() < 0.0 {
            for x in r.columns[0].iter_mut() {
                *x = -*x;
            }
        }
        return Ok(r);
    }
}

/// Haar-distributed point of G(n,k): the span of the first k columns of a random rotation.
pub fn sample_grassmann(n: usize, k: usize, stream: &mut Stream) -> Result<GrassmannPoint> {
    if k > n {
        return Err(Error::Dimension(format!("k = {k} > n = {n}")));
    }
    let g = sample_rotation(n, stream)?;
    Ok(GrassmannPoint { n, frame: (0..k).map(|j| g.column(j)).collect() })
}

/// Haar-distributed point of G(V, k) for a subspace V: span of random orthonormal
/// combinations of V's frame.
pub fn sample_grassmann_within(ambient: &GrassmannPoint, k: usize, stream: &mut Stream) -> Result<GrassmannPoint> {
    let m = ambient.k();
    if k > m {
        return Err(Error::Dimension(format!("k = {k} exceeds subspace dimension {m}")));
    }
    if k == 0 {
        return GrassmannPoint::coordinate(ambient.n(), 0);
    }
    let g = sample_rotation(m, stream)?;
    let cols: Vec<Vector> = (0..k).map(|j| ambient.embed(&g.column(j))).collect();
    GrassmannPoint::span(ambient.n(), &cols)
}

/// Area of the unit sphere Sᵐ ⊂ ℝ^{m+1}: 2π^{(m+1)/2}/Γ((m+1)/2).
pub fn surface_area(m: i64) -> Result<f64> {
    if m < 0 {
        return Err(invalid(format!("sphere dimension {m} is negative")));
    }
    let h = (m as f64 + 1.0) / 2.0;
    Ok(2.0 * PI.powf(h) / gamma(h))
}

/// cos² of the angle between a line ξ = span(y) and a subspace η: |Pr_η y|².
pub fn cos2_angle(eta: &GrassmannPoint, xi: &GrassmannPoint) -> Result<f64> {
    if xi.k() != 1 {
        return Err(invalid(format!("cos² angle needs a line, got dimension {}", xi.k())));
    }
    if eta.n() != xi.n() {
        return Err(Error::Dimension("subspaces live in different ambient spaces".into()));
    }
    let y = &xi.columns()[0];
    Ok(dot(&eta.project(y), &eta.project(y)).clamp(0.0, 1.0))
}


/// Deterministic cubature for averages over spheres and Grassmannians of a subspace.
///
/// Circles use `circle` equispaced nodes, two-spheres the product Gauss rule of order
/// `sphere_order`. Node sets are built from the subspace frame, so rotating the subspace
/// rotates the nodes.
#[derive(Clone, Debug)]
pub struct Cubature {
    pub circle: usize,
    pub sphere: crate::quadrature::SphereRule,
}

impl Cubature {
    pub fn new(circle: usize, sphere_order: usize) -> Self {
        Cubature { circle, sphere: crate::quadrature::SphereRule::product(sphere_order) }
    }

    /// Nodes and weights (summing to one) on the unit sphere of `v`.
    pub fn sphere_nodes(&self, v: &GrassmannPoint) -> Result<Vec<(Vector, f64)>> {
        let cols = v.columns();
        match cols.len() {
            1 => Ok(vec![(cols[0].clone(), 0.5), (scale(&cols[0], -1.0), 0.5)]),
            2 => {
                let m = self.circle;
                Ok((0..m)
                    .map(|j| {
                        let th = 2.0 * PI * j as f64 / m as f64;
                        (axpy(&scale(&cols[0], th.cos()), th.sin(), &cols[1]), 1.0 / m as f64)
                    })
                    .collect())
            }
            3 => Ok(self
                .sphere
                .points
                .iter()
                .zip(&self.sphere.weights)
                .map(|(p, &w)| (v.embed(p), w))
                .collect()),
            d => Err(crate::error::unsupported(format!("sphere cubature in dimension {d}"))),
        }
    }

    /// Nodes and weights (summing to one) for the invariant probability measure on G_j(v).
    pub fn grassmann_nodes(&self, v: &GrassmannPoint, j: usize) -> Result<Vec<(GrassmannPoint, f64)>> {
        let d = v.k();
        if j > d {
            return Err(Error::Dimension(format!("G_{j} of a {d}-dimensional subspace")));
        }
        if j == d {
            return Ok(vec![(v.clone(), 1.0)]);
        }
        if j == 0 {
            return Ok(vec![(GrassmannPoint::coordinate(v.n(), 0)?, 1.0)]);
        }
        let cols = v.columns();
        match (d, j) {
            (2, 1) => {
                // Lines are antipodally symmetric: half the circle suffices.
                let m = self.circle.div_ceil(2).max(1);
                (0..m)
                    .map(|i| {
                        let th = PI * i as f64 / m as f64;
                        let dir = axpy(&scale(&cols[0], th.cos()), th.sin(), &cols[1]);
                        Ok((GrassmannPoint { n: v.n(), frame: [dir].into_iter().collect() }, 1.0 / m as f64))
                    })
                    .collect()
            }
            (3, 1) => Ok(self
                .sphere_nodes(v)?
                .into_iter()
                .map(|(dir, w)| (GrassmannPoint { n: v.n(), frame: [dir].into_iter().collect() }, w))
                .collect()),
            (3, 2) => self
                .sphere_nodes(v)?
                .into_iter()
                .map(|(normal, w)| {
                    let line = GrassmannPoint { n: v.n(), frame: [normal].into_iter().collect() };
                    Ok((line.complement_within(v)?, w))
                })
                .collect(),
            _ => Err(crate::error::unsupported(format!("cubature on G_{j} of a {d}-dimensional subspace"))),
        }
    }
}
