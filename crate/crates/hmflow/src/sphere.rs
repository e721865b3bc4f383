//! Pointwise sphere algebra: tangent projections, harmonic-map
//! constructors, stereographic charts, winding degree, chart fitting and
//! the recursive low-energy topological family.

use crate::error::{Error, Result};
use crate::grid::{self, PeriodicGrid, ScalarField, VectorField, TAU};
use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;

pub const UNIT_TOL: f64 = 1e-12;
pub const SOUTH_POLE_TOL: f64 = 1e-9;

/// A point of S^k embedded in R^{k+1}.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitVector {
    coords: Vec<f64>,
}

impl UnitVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let dev = (norm(&coords) - 1.0).abs();
        if dev > UNIT_TOL {
            return Err(Error::NotUnit {
                got: coords.len(),
                dev,
            });
        }
        Ok(UnitVector { coords })
    }

    /// Rescale an arbitrary nonzero vector onto the sphere.
    pub fn normalized(mut coords: Vec<f64>) -> Result<Self> {
        let n = norm(&coords);
        if n < 1e-300 {
            return Err(Error::NotUnit {
                got: coords.len(),
                dev: 1.0,
            });
        }
        for c in &mut coords {
            *c /= n;
        }
        Ok(UnitVector { coords })
    }

    pub fn basis(dim: usize, axis: usize) -> Self {
        let mut coords = vec![0.0; dim];
        coords[axis] = 1.0;
        UnitVector { coords }
    }

    pub fn north_pole(dim: usize) -> Self {
        Self::basis(dim, dim - 1)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Orthogonal matrix acting on R^{k+1}, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Rotation {
    dim: usize,
    mat: Vec<f64>,
}

impl Rotation {
    pub fn new(dim: usize, mat: Vec<f64>) -> Result<Self> {
        if mat.len() != dim * dim {
            return Err(Error::SizeMismatch {
                got: mat.len(),
                want: dim * dim,
            });
        }
        let mut dev: f64 = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                let mut s = 0.0;
                for l in 0..dim {
                    s += mat[l * dim + i] * mat[l * dim + j];
                }
                let want = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((s - want).abs());
            }
        }
        if dev > UNIT_TOL {
            return Err(Error::NotOrthogonal(dev));
        }
        Ok(Rotation { dim, mat })
    }

    pub fn identity(dim: usize) -> Self {
        let mut mat = vec![0.0; dim * dim];
        for i in 0..dim {
            mat[i * dim + i] = 1.0;
        }
        Rotation { dim, mat }
    }

    /// Householder reflection mapping `from` to `to` (both unit).
    pub fn reflection_between(from: &[f64], to: &[f64]) -> Self {
        let dim = from.len();
        let mut v: Vec<f64> = from.iter().zip(to).map(|(a, b)| a - b).collect();
        let vn = norm(&v);
        if vn < 1e-14 {
            return Rotation::identity(dim);
        }
        for x in &mut v {
            *x /= vn;
        }
        let mut mat = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                mat[i * dim + j] = if i == j { 1.0 } else { 0.0 } - 2.0 * v[i] * v[j];
            }
        }
        Rotation { dim, mat }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.mat[i * self.dim..(i + 1) * self.dim]
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim).map(|i| dot(self.row(i), v)).collect()
    }

    pub fn apply_transpose(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for i in 0..self.dim {
            for j in 0..self.dim {
                out[j] += self.mat[i * self.dim + j] * v[i];
            }
        }
        out
    }

    pub fn apply_field(&self, f: &SphereField) -> SphereField {
        let mut out = f.clone();
        for j in 0..f.grid().size() {
            let r = self.apply(f.node(j));
            out.values.node_mut(j).copy_from_slice(&r);
        }
        out
    }

    pub fn apply_transpose_field(&self, f: &SphereField) -> SphereField {
        let mut out = f.clone();
        for j in 0..f.grid().size() {
            let r = self.apply_transpose(f.node(j));
            out.values.node_mut(j).copy_from_slice(&r);
        }
        out
    }

    pub fn apply_vector_field(&self, f: &VectorField) -> VectorField {
        let mut out = f.clone();
        for j in 0..f.grid().size() {
            let r = self.apply(f.node(j));
            out.node_mut(j).copy_from_slice(&r);
        }
        out
    }

    pub fn apply_transpose_vector_field(&self, f: &VectorField) -> VectorField {
        let mut out = f.clone();
        for j in 0..f.grid().size() {
            let r = self.apply_transpose(f.node(j));
            out.node_mut(j).copy_from_slice(&r);
        }
        out
    }
}

/// Descriptor of a harmonic map x -> alpha cos(n x + phase) + beta sin(n x + phase).
#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicChart {
    pub n: i64,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub phase: f64,
}

impl GeodesicChart {
    pub fn new(n: i64, alpha: Vec<f64>, beta: Vec<f64>, phase: f64) -> Result<Self> {
        let dev = (norm(&alpha) - 1.0)
            .abs()
            .max((norm(&beta) - 1.0).abs())
            .max(dot(&alpha, &beta).abs());
        if dev > UNIT_TOL || alpha.len() != beta.len() {
            return Err(Error::BadChart(dev));
        }
        Ok(GeodesicChart {
            n,
            alpha,
            beta,
            phase,
        })
    }

    pub fn canonical(dim: usize, n: i64) -> Self {
        let mut alpha = vec![0.0; dim];
        let mut beta = vec![0.0; dim];
        alpha[0] = 1.0;
        beta[1] = 1.0;
        GeodesicChart {
            n,
            alpha,
            beta,
            phase: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    pub fn point_at(&self, x: f64) -> Vec<f64> {
        let t = self.n as f64 * x + self.phase;
        let (s, c) = t.sin_cos();
        self.alpha
            .iter()
            .zip(&self.beta)
            .map(|(a, b)| a * c + b * s)
            .collect()
    }
}

/// Grid samples of a map T^1 -> S^k.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereField {
    values: VectorField,
}

impl SphereField {
    pub fn from_vector_field(values: VectorField, tol: f64) -> Result<Self> {
        for j in 0..values.grid().size() {
            let dev = (norm(values.node(j)) - 1.0).abs();
            if dev > tol {
                return Err(Error::NotUnit {
                    got: values.dim(),
                    dev,
                });
            }
        }
        Ok(SphereField { values })
    }

    /// Normalize each node onto the sphere (used by seeding paths).
    pub fn renormalized(values: VectorField) -> Result<Self> {
        let mut values = values;
        for j in 0..values.grid().size() {
            let n = norm(values.node(j));
            if n < 1e-300 {
                return Err(Error::NotUnit {
                    got: values.dim(),
                    dev: 1.0,
                });
            }
            for v in values.node_mut(j) {
                *v /= n;
            }
        }
        Ok(SphereField { values })
    }

    pub fn constant(grid: PeriodicGrid, p: &UnitVector) -> Self {
        let values = VectorField::from_fn(grid, p.dim(), |_| p.coords().to_vec());
        SphereField { values }
    }

    pub fn grid(&self) -> PeriodicGrid {
        self.values.grid()
    }

    pub fn dim(&self) -> usize {
        self.values.dim()
    }

    /// Sphere dimension k (values in S^k subset R^{k+1}).
    pub fn k(&self) -> usize {
        self.values.dim() - 1
    }

    pub fn node(&self, j: usize) -> &[f64] {
        self.values.node(j)
    }

    pub fn values(&self) -> &VectorField {
        &self.values
    }

    pub fn into_values(self) -> VectorField {
        self.values
    }

    pub fn energy(&self) -> f64 {
        grid::energy(&self.values)
    }

    /// Max over nodes of | |u_j| - 1 |.
    pub fn constraint_residual(&self) -> f64 {
        (0..self.grid().size())
            .map(|j| (norm(self.node(j)) - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn h1_distance(&self, other: &SphereField) -> f64 {
        let mut d = self.values.clone();
        d.axpy(-1.0, &other.values);
        grid::h1_norm(&d)
    }

    pub fn mean(&self) -> Vec<f64> {
        let n = self.grid().size() as f64;
        let mut m = vec![0.0; self.dim()];
        for j in 0..self.grid().size() {
            for (a, b) in m.iter_mut().zip(self.node(j)) {
                *a += b / n;
            }
        }
        m
    }
}

/// Projection of a force onto the tangent space at u: f - <f,u> u.
pub fn tangent_project(f: &[f64], u: &[f64]) -> Vec<f64> {
    let fu = dot(f, u);
    f.iter().zip(u).map(|(fi, ui)| fi - fu * ui).collect()
}

/// In-place variant used by the solver hot path.
pub fn tangent_project_into(f: &mut [f64], u: &[f64]) {
    let fu = dot(f, u);
    for (fi, ui) in f.iter_mut().zip(u) {
        *fi -= fu * ui;
    }
}

/// Pointwise samples of the chart's harmonic map.
pub fn harmonic_map(grid: PeriodicGrid, chart: &GeodesicChart) -> SphereField {
    let values = VectorField::from_fn(grid, chart.dim(), |x| chart.point_at(x));
    SphereField { values }
}

/// Stereographic projection from the south pole: S^k minus the pole to R^k.
pub fn stereo_forward(u: &[f64]) -> Result<Vec<f64>> {
    let k1 = u.len();
    let w = u[k1 - 1];
    if w <= -1.0 + SOUTH_POLE_TOL {
        return Err(Error::SouthPoleSingularity(w));
    }
    Ok(u[..k1 - 1].iter().map(|&ui| 2.0 * ui / (1.0 + w)).collect())
}

/// Inverse stereographic map; defined on all of R^k.
pub fn stereo_inverse(v: &[f64]) -> Vec<f64> {
    let s: f64 = v.iter().map(|x| x * x).sum();
    let d = 4.0 + s;
    let mut u: Vec<f64> = v.iter().map(|&vi| 4.0 * vi / d).collect();
    u.push((4.0 - s) / d);
    u
}

/// Field-level stereographic projection in a rotated frame: first apply the
/// frame to u, then project every node.
pub fn stereo_forward_field(u: &SphereField, frame: &Rotation) -> Result<VectorField> {
    let grid = u.grid();
    let k = u.k();
    let mut out = VectorField::zeros(grid, k);
    for j in 0..grid.size() {
        let ru = frame.apply(u.node(j));
        let v = stereo_forward(&ru)?;
        out.node_mut(j).copy_from_slice(&v);
    }
    Ok(out)
}

/// Field-level inverse, undoing the frame afterwards.
pub fn stereo_inverse_field(v: &VectorField, frame: &Rotation) -> SphereField {
    let grid = v.grid();
    let dim = v.dim() + 1;
    let mut out = VectorField::zeros(grid, dim);
    for j in 0..grid.size() {
        let u = stereo_inverse(v.node(j));
        let ru = frame.apply_transpose(&u);
        out.node_mut(j).copy_from_slice(&ru);
    }
    SphereField { values: out }
}

fn wrap_to_pi(d: f64) -> f64 {
    let mut d = d % TAU;
    if d > PI {
        d -= TAU;
    } else if d <= -PI {
        d += TAU;
    }
    d
}

/// Winding number of an angle field sampled on the grid. Adjacent samples
/// must differ by less than pi once wrapped; otherwise the winding is not
/// resolvable at this resolution.
pub fn winding_degree(theta: &ScalarField) -> Result<i64> {
    let n = theta.grid().size();
    let s = theta.samples();
    let mut total = 0.0;
    for j in 0..n {
        let d = wrap_to_pi(s[(j + 1) % n] - s[j]);
        if d.abs() >= PI - 1e-9 {
            return Err(Error::UnresolvableWinding(d.abs()));
        }
        total += d;
    }
    Ok((total / TAU).round() as i64)
}

/// Angle of a sphere field along the great circle spanned by (alpha, beta),
/// unwrapped starting from the principal value at node 0.
pub fn circle_angle(field: &SphereField, alpha: &[f64], beta: &[f64]) -> ScalarField {
    let grid = field.grid();
    let mut samples = Vec::with_capacity(grid.size());
    let mut prev = 0.0;
    for j in 0..grid.size() {
        let u = field.node(j);
        let raw = dot(u, beta).atan2(dot(u, alpha));
        let th = if j == 0 {
            raw
        } else {
            prev + wrap_to_pi(raw - prev)
        };
        samples.push(th);
        prev = th;
    }
    ScalarField::new(grid, samples).expect("size")
}

/// Max distance of the field from the great circle spanned by (alpha, beta).
pub fn off_circle_distance(field: &SphereField, alpha: &[f64], beta: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for j in 0..field.grid().size() {
        let u = field.node(j);
        let a = dot(u, alpha);
        let b = dot(u, beta);
        let planar = (a * a + b * b).sqrt();
        worst = worst.max((1.0 - planar).abs());
    }
    worst
}

/// Fit a geodesic chart to a near-harmonic field: extract the dominant
/// Fourier mode a_N, orthonormalize its real and imaginary parts by the
/// polar factor, and return the chart together with the H1 residual.
pub fn chart_fit(field: &SphereField) -> Result<(GeodesicChart, f64)> {
    let grid = field.grid();
    let dim = field.dim();
    let e = field.energy();
    let n_guess = (e / TAU).sqrt().round() as i64;
    let coeffs: Vec<Vec<num_complex::Complex64>> = (0..dim)
        .map(|c| grid::dft(&field.values.component(c)))
        .collect();
    let chart = if n_guess == 0 {
        let mean: Vec<f64> = coeffs.iter().map(|c| c[0].re).collect();
        let mag = norm(&mean);
        if mag < 1e-6 {
            return Err(Error::DegenerateMode(mag));
        }
        let alpha: Vec<f64> = mean.iter().map(|m| m / mag).collect();
        let beta = complete_direction(&alpha);
        GeodesicChart {
            n: 0,
            alpha,
            beta,
            phase: 0.0,
        }
    } else {
        let idx = n_guess as usize;
        let a_n: Vec<num_complex::Complex64> = coeffs.iter().map(|c| c[idx]).collect();
        let mag = a_n.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if mag < 1e-6 {
            return Err(Error::DegenerateMode(mag));
        }
        // field ~ p cos(Nx) + q sin(Nx) with p = 2 Re a_N, q = -2 Im a_N
        let mut b = DMatrix::zeros(dim, 2);
        for (i, c) in a_n.iter().enumerate() {
            b[(i, 0)] = 2.0 * c.re;
            b[(i, 1)] = -2.0 * c.im;
        }
        let svd = b.svd(true, true);
        let u = svd.u.as_ref().expect("svd u");
        let vt = svd.v_t.as_ref().expect("svd vt");
        let q = u * vt;
        let alpha: Vec<f64> = (0..dim).map(|i| q[(i, 0)]).collect();
        let beta: Vec<f64> = (0..dim).map(|i| q[(i, 1)]).collect();
        GeodesicChart {
            n: n_guess,
            alpha,
            beta,
            phase: 0.0,
        }
    };
    let target = harmonic_map(grid, &chart);
    let residual = field.h1_distance(&target);
    Ok((chart, residual))
}

/// Deterministic unit vector orthogonal to `a` (first suitable basis vector,
/// Gram-Schmidt projected).
fn complete_direction(a: &[f64]) -> Vec<f64> {
    let dim = a.len();
    for axis in 0..dim {
        let mut e = vec![0.0; dim];
        e[axis] = 1.0;
        let p = dot(&e, a);
        let mut v: Vec<f64> = e.iter().zip(a).map(|(ei, ai)| ei - p * ai).collect();
        let n = norm(&v);
        if n > 0.5 {
            for x in &mut v {
                *x /= n;
            }
            return v;
        }
    }
    unreachable!("a unit vector cannot be parallel to every basis vector");
}

/// Rotation A with A alpha = e1 and A beta = e2; remaining rows completed by
/// Gram-Schmidt from the standard basis.
pub fn align_rotation(chart: &GeodesicChart) -> Rotation {
    let dim = chart.dim();
    let mut rows: Vec<Vec<f64>> = vec![chart.alpha.clone(), chart.beta.clone()];
    let mut axis = 0;
    while rows.len() < dim {
        assert!(axis < dim, "basis completion exhausted");
        let mut e = vec![0.0; dim];
        e[axis] = 1.0;
        for r in &rows {
            let p = dot(&e, r);
            for (ei, ri) in e.iter_mut().zip(r) {
                *ei -= p * ri;
            }
        }
        let n = norm(&e);
        if n > 1e-6 {
            for x in &mut e {
                *x /= n;
            }
            rows.push(e);
        }
        axis += 1;
    }
    let mut mat = Vec::with_capacity(dim * dim);
    for r in rows {
        mat.extend_from_slice(&r);
    }
    Rotation { dim, mat }
}

/// Recursive family A_{k-1}(s_1, ..., s_{k-1}, x) into S^k with the
/// piecewise sign prefix; base case A_1 on S^2.
pub fn family_gamma(grid: PeriodicGrid, k: usize, s: &[f64]) -> Result<SphereField> {
    if k < 2 {
        return Err(Error::DimensionTooSmall(k));
    }
    if s.len() != k - 1 {
        return Err(Error::InvalidConfig(format!(
            "family_gamma for S^{k} needs {} parameters, got {}",
            k - 1,
            s.len()
        )));
    }
    let values = VectorField::from_fn(grid, k + 1, |x| family_point(s, x));
    Ok(SphereField { values })
}

fn family_point(s: &[f64], x: f64) -> Vec<f64> {
    if s.len() == 1 {
        // A_1(s, x): (+-sin s cos x, sin s sin x, cos s), sign flips for s in (pi, 2 pi)
        let s1 = s[0];
        let sign = if normalized_angle(s1) <= PI { 1.0 } else { -1.0 };
        vec![
            sign * s1.sin() * x.cos(),
            s1.sin() * x.sin(),
            s1.cos(),
        ]
    } else {
        let s1 = s[0];
        let inner = family_point(&s[1..], x);
        let sign = if normalized_angle(s1) <= PI { 1.0 } else { -1.0 };
        let mut out: Vec<f64> = inner.iter().map(|&y| sign * s1.sin() * y).collect();
        out.push(s1.cos());
        out
    }
}

fn normalized_angle(s: f64) -> f64 {
    let mut a = s % TAU;
    if a < 0.0 {
        a += TAU;
    }
    a
}

/// Orthonormal pair spanning the great circle through two non-antipodal
/// points, with the first leg at p; if nearly antipodal, the companion
/// direction is perturbed deterministically along the lowest-index basis
/// vector not parallel to p.
pub fn great_circle_through(p: &[f64], q: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let alpha = p.to_vec();
    let pq = dot(p, q);
    let mut rej: Vec<f64> = q.iter().zip(p).map(|(qi, pi)| qi - pq * pi).collect();
    let n = norm(&rej);
    if n > 1e-6 {
        for x in &mut rej {
            *x /= n;
        }
        (alpha, rej)
    } else {
        (alpha.clone(), complete_direction(&alpha))
    }
}

/// DVector helpers used by neighbouring modules.
pub fn to_dvector(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}
