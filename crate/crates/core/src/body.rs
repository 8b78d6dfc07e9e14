//! Convex bodies represented by support functions on `S^2`.
//!
//! A [`SupportBody`] is a [`SpectralField`] that has passed [`certify`]: the
//! support function is positive and the matrix
//! `A[h] = ∇²h + h·Id` (covariant Hessian in an orthonormal frame) is
//! positive definite at every grid node. Its determinant is the curvature
//! function `f_K`, the density of the surface area measure.

use std::sync::Arc;

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::harmonics::{
    analyze, grid_derivatives, synthesize, synthesize_grid, HarmonicBasis, SpectralField,
};
use crate::sphere::{ball_volume, integrate, sphere_area, SphereGrid};

/// Minimum admissible eigenvalue of `A[h]`.
pub const CONVEXITY_TOLERANCE: f64 = 1e-9;

/// Largest grid residual `|values - synthesize(analyze(values))|` accepted
/// when a support function is built from point values.
pub const ALIASING_TOLERANCE: f64 = 1e-6;

/// Symmetric 2×2 matrix in the frame `(e_θ, e_φ / sin θ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameMatrix {
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
}

impl FrameMatrix {
    pub fn identity() -> Self {
        Self {
            a11: 1.0,
            a12: 0.0,
            a22: 1.0,
        }
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a12
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let mean = 0.5 * (self.a11 + self.a22);
        let half_gap = (0.25 * (self.a11 - self.a22).powi(2) + self.a12 * self.a12).sqrt();
        mean - half_gap
    }

    /// Mixed discriminant `D(A, B)`; `D(A, A) = det A`.
    pub fn mixed_discriminant(&self, other: &FrameMatrix) -> f64 {
        0.5 * (self.a11 * other.a22 + self.a22 * other.a11 - 2.0 * self.a12 * other.a12)
    }
}

/// `A[h]` at every grid node.
pub fn frame_matrices(field: &SpectralField, grid: &SphereGrid) -> Result<Vec<FrameMatrix>> {
    let d = grid_derivatives(field, grid)?;
    let n_lon = grid.longitudes();
    Ok((0..grid.len())
        .map(|node| {
            let ring = node / n_lon;
            let (t, s) = (grid.cos_theta()[ring], grid.sin_theta()[ring]);
            let cot = t / s;
            let h = d.value[node];
            FrameMatrix {
                a11: d.d_theta_theta[node] + h,
                a12: (d.d_theta_phi[node] - cot * d.d_phi[node]) / s,
                a22: d.d_phi_phi[node] / (s * s) + cot * d.d_theta[node] + h,
            }
        })
        .collect())
}

/// Pointwise `Q(f, g) = D(A[f], A[g])` for `n = 3`.
pub fn mixed_discriminant(f: &[FrameMatrix], g: &[FrameMatrix]) -> Result<Vec<f64>> {
    if f.len() != g.len() {
        return Err(Error::LengthMismatch {
            expected: f.len(),
            actual: g.len(),
        });
    }
    Ok(f.iter().zip(g).map(|(a, b)| a.mixed_discriminant(b)).collect())
}

/// A certified `C²₊` support function together with its per-node geometry.
#[derive(Debug, Clone)]
pub struct SupportBody {
    field: SpectralField,
    grid: Arc<SphereGrid>,
    values: Vec<f64>,
    frames: Vec<FrameMatrix>,
    curvature: Vec<f64>,
    margin: f64,
    truncation: f64,
}

/// Checks that `field` is the support function of a `C²₊` body containing
/// the origin in its interior.
pub fn certify(field: &SpectralField, grid: &Arc<SphereGrid>) -> Result<SupportBody> {
    if field.n() != 3 {
        return Err(Error::Dimension(field.n()));
    }
    if grid.max_exact_degree() < 2 * field.l_max() {
        return Err(Error::GridTooCoarse {
            exact: grid.max_exact_degree(),
            required: 2 * field.l_max(),
        });
    }
    let frames = frame_matrices(field, grid)?;
    let values = synthesize_grid(field, grid)?;
    if let Some((node, &value)) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
    {
        if value <= 0.0 {
            return Err(Error::NonPositive { node, value });
        }
    }
    let (node, margin) = frames
        .iter()
        .map(FrameMatrix::min_eigenvalue)
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("grid is non-empty");
    if margin <= CONVEXITY_TOLERANCE {
        return Err(Error::NotConvex { node, margin });
    }
    let curvature = frames.iter().map(FrameMatrix::det).collect();
    Ok(SupportBody {
        field: field.clone(),
        grid: Arc::clone(grid),
        values,
        frames,
        curvature,
        margin,
        truncation: 0.0,
    })
}

impl SupportBody {
    pub fn field(&self) -> &SpectralField {
        &self.field
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn l_max(&self) -> usize {
        self.field.l_max()
    }

    /// `h` at the grid nodes.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn frames(&self) -> &[FrameMatrix] {
        &self.frames
    }

    /// `f_K = det A[h]` at the grid nodes.
    pub fn curvature(&self) -> &[f64] {
        &self.curvature
    }

    /// Smallest eigenvalue of `A[h]` over the grid.
    pub fn margin(&self) -> f64 {
        self.margin
    }

    /// Size of what was discarded when the support function was truncated
    /// to `l_max` (zero for bodies given directly as fields).
    pub fn truncation(&self) -> f64 {
        self.truncation
    }

    pub(crate) fn with_truncation(mut self, truncation: f64) -> Self {
        self.truncation = truncation;
        self
    }

    /// `□h = tr A[h]` at the grid nodes.
    pub fn box_values(&self) -> Vec<f64> {
        self.frames.iter().map(FrameMatrix::trace).collect()
    }
}

pub fn curvature_function(body: &SupportBody) -> &[f64] {
    body.curvature()
}

/// `V(K) = (1/3) ∫ h f_K dx`.
pub fn volume(body: &SupportBody) -> f64 {
    mixed_volume(body, body.values()).expect("same grid")
}

/// `V₁(K, L) = (1/3) ∫ h_L f_K dx`, with `h_L` given at the grid nodes.
pub fn mixed_volume(k: &SupportBody, h_l: &[f64]) -> Result<f64> {
    let integrand: Vec<f64> = h_l.iter().zip(k.curvature()).map(|(h, f)| h * f).collect();
    Ok(integrate(&integrand, k.grid())? / 3.0)
}

/// Surface area `∫ f_K dx`.
pub fn surface_area(body: &SupportBody) -> f64 {
    integrate(body.curvature(), body.grid()).expect("same grid")
}

/// `W_{n-1}(K) = (1/n) ∫ h dx`, read off the constant coefficient.
pub fn quermass_w_n1(field: &SpectralField) -> f64 {
    let n = field.n();
    field.get(0, 1).expect("degree 0") * sphere_area(n).expect("n >= 3").sqrt() / n as f64
}

/// `W_{n-2}(L) = (1/(n(n-1))) ∫ h □h dx`, by Parseval.
pub fn quermass_w_n2(field: &SpectralField) -> f64 {
    let n = field.n();
    let sum: f64 = (0..=field.l_max())
        .map(|k| crate::harmonics::box_multiplier(n, k) * field.degree_norm_sq(k))
        .sum();
    sum / (n * (n - 1)) as f64
}

/// Analyzes grid values of a support function, checks that truncation at
/// `l_max` resolves them, and certifies the result.
pub fn body_from_values(values: &[f64], grid: &Arc<SphereGrid>, l_max: usize) -> Result<SupportBody> {
    let basis = HarmonicBasis::new(3, l_max)?;
    let field = analyze(values, grid, &basis)?;
    let back = synthesize_grid(&field, grid)?;
    let residual = values
        .iter()
        .zip(&back)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if residual > ALIASING_TOLERANCE {
        return Err(Error::Aliasing(residual));
    }
    Ok(certify(&field, grid)?.with_truncation(residual))
}

fn check_invertible(phi: &Matrix3<f64>) -> Result<()> {
    let det = phi.determinant();
    if det.abs() < 1e-12 || !det.is_finite() {
        return Err(Error::Singular(det));
    }
    Ok(())
}

/// `h_{φB}(u) = |φᵗu|` at the grid nodes.
pub fn ellipsoid_values(phi: &Matrix3<f64>, grid: &SphereGrid) -> Vec<f64> {
    let pt = phi.transpose();
    grid.nodes().iter().map(|u| (pt * u).norm()).collect()
}

/// The ellipsoid `φB³`, truncated at `l_max`.
pub fn ellipsoid_body(phi: &Matrix3<f64>, grid: &Arc<SphereGrid>, l_max: usize) -> Result<SupportBody> {
    check_invertible(phi)?;
    body_from_values(&ellipsoid_values(phi, grid), grid, l_max)
}

/// Support function of `φK` at the grid nodes:
/// `h_{φK}(u) = |φᵗu| h_K(φᵗu / |φᵗu|)`.
pub fn gl_values(body: &SupportBody, phi: &Matrix3<f64>) -> Result<Vec<f64>> {
    check_invertible(phi)?;
    let pt = phi.transpose();
    let mut scales = Vec::with_capacity(body.grid().len());
    let directions: Vec<Vector3<f64>> = body
        .grid()
        .nodes()
        .iter()
        .map(|u| {
            let w = pt * u;
            let r = w.norm();
            scales.push(r);
            w / r
        })
        .collect();
    let h = synthesize(body.field(), &directions)?;
    Ok(h.iter().zip(&scales).map(|(h, r)| h * r).collect())
}

/// The body `φK`, re-analyzed at the same truncation.
pub fn apply_gl(body: &SupportBody, phi: &Matrix3<f64>) -> Result<SupportBody> {
    let values = gl_values(body, phi)?;
    body_from_values(&values, body.grid(), body.l_max())
}

/// Parameters `a = (a₀; a_{1,1..n}; a_{2,1..N(n,2)})` of the ellipsoid
/// chart around the unit ball.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipsoidParams {
    pub n: usize,
    pub a0: f64,
    pub a1: Vec<f64>,
    pub a2: Vec<f64>,
}

impl EllipsoidParams {
    /// Number of parameters, `n(n+3)/2`.
    pub fn len_for(n: usize) -> usize {
        n * (n + 3) / 2
    }

    pub fn zero(n: usize) -> Self {
        Self {
            n,
            a0: 0.0,
            a1: vec![0.0; n],
            a2: vec![0.0; crate::harmonics::dim_space(n, 2)],
        }
    }

    pub fn from_slice(n: usize, a: &[f64]) -> Result<Self> {
        if n < 3 {
            return Err(Error::Dimension(n));
        }
        if a.len() != Self::len_for(n) {
            return Err(Error::LengthMismatch {
                expected: Self::len_for(n),
                actual: a.len(),
            });
        }
        Ok(Self {
            n,
            a0: a[0],
            a1: a[1..=n].to_vec(),
            a2: a[n + 1..].to_vec(),
        })
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = vec![self.a0];
        v.extend(&self.a1);
        v.extend(&self.a2);
        v
    }
}

/// `ξ(a) = -1 + Σ a_{1,i} Y_{1,i} + ((a₀+√n)²/n + Σ a_{2,i} Y_{2,i})^{1/2}`,
/// analyzed at `l_max`. `1 + ξ(a)` is the support function of an ellipsoid
/// centered at `(a_{1,1}, …, a_{1,n})`.
pub fn xi(a: &EllipsoidParams, grid: &Arc<SphereGrid>, l_max: usize) -> Result<SpectralField> {
    if a.n != 3 {
        return Err(Error::Dimension(a.n));
    }
    let root_n = (a.n as f64).sqrt();
    if a.a0 + root_n <= 0.0 {
        return Err(Error::Inadmissible(format!("a0 + √n = {} <= 0", a.a0 + root_n)));
    }
    let mut linear = SpectralField::zeros(3, 2)?;
    let mut quadratic = SpectralField::zeros(3, 2)?;
    for (i, &c) in a.a1.iter().enumerate() {
        linear.set(1, i + 1, c)?;
    }
    for (i, &c) in a.a2.iter().enumerate() {
        quadratic.set(2, i + 1, c)?;
    }
    let base = (a.a0 + root_n).powi(2) / a.n as f64;
    let lin = synthesize_grid(&linear, grid)?;
    let quad = synthesize_grid(&quadratic, grid)?;
    let mut values = Vec::with_capacity(grid.len());
    for (node, (l, q)) in lin.iter().zip(&quad).enumerate() {
        let radicand = base + q;
        if radicand <= 0.0 {
            return Err(Error::Inadmissible(format!(
                "radicand {radicand:e} <= 0 at node {node}"
            )));
        }
        values.push(-1.0 + l + radicand.sqrt());
    }
    let field = analyze(&values, grid, &HarmonicBasis::new(3, l_max)?)?;
    let shifted = field.axpy(1.0, &SpectralField::constant(3, l_max, 1.0)?)?;
    certify(&shifted, grid).map_err(|e| Error::Inadmissible(e.to_string()))?;
    Ok(field)
}

/// `∂ξ(0) h = √ω_n h₀ Y_{0,1} + Σ h_{1,i} Y_{1,i} + ½ Σ h_{2,i} Y_{2,i}`.
pub fn d_xi_at_zero(direction: &EllipsoidParams, l_max: usize) -> Result<SpectralField> {
    let n = direction.n;
    if l_max < 2 {
        return Err(Error::Degree(format!("need l_max >= 2, got {l_max}")));
    }
    let mut field = SpectralField::zeros(n, l_max)?;
    field.set(0, 1, ball_volume(n)?.sqrt() * direction.a0)?;
    for (i, &c) in direction.a1.iter().enumerate() {
        field.set(1, i + 1, c)?;
    }
    for (i, &c) in direction.a2.iter().enumerate() {
        field.set(2, i + 1, 0.5 * c)?;
    }
    Ok(field)
}

/// Parses `diag(a,b,c)` or a JSON 3×3 array into a matrix.
pub fn parse_matrix(text: &str) -> Result<Matrix3<f64>> {
    let trimmed = text.trim();
    if let Some(inner) = trimmed
        .strip_prefix("diag(")
        .and_then(|rest| rest.strip_suffix(')'))
    {
        let entries: Vec<f64> = inner
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse(e.to_string()))?;
        if entries.len() != 3 {
            return Err(Error::Parse(format!("diag needs 3 entries, got {}", entries.len())));
        }
        return Ok(Matrix3::from_diagonal(&Vector3::new(entries[0], entries[1], entries[2])));
    }
    let rows: Vec<Vec<f64>> = serde_json::from_str(trimmed).map_err(|e| Error::Parse(e.to_string()))?;
    matrix_from_rows(&rows)
}

pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<Matrix3<f64>> {
    if rows.len() != 3 || rows.iter().any(|r| r.len() != 3) {
        return Err(Error::Parse("ellipsoid matrix must be 3×3".into()));
    }
    Ok(Matrix3::from_fn(|i, j| rows[i][j]))
}
