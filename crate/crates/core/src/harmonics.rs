//! Real orthonormal spherical harmonics.
//!
//! Degree/dimension formulas hold for every `n >= 3`; pointwise evaluation,
//! analysis and synthesis exist for `S^2` only.
//!
//! On `S^2` the degree-`k` block holds `2k + 1` functions, ordered
//! `l = 1` for `m = 0`, then `l = 2m` (cosine) and `l = 2m + 1` (sine) for
//! `m = 1..=k`:
//!
//! ```text
//! Y_{k,1}    = P̄_k^0(cos θ)
//! Y_{k,2m}   = √2 P̄_k^m(cos θ) cos mφ
//! Y_{k,2m+1} = √2 P̄_k^m(cos θ) sin mφ
//! ```
//!
//! where `2π ∫ P̄_k^m(t)² dt = 1`, so the basis is orthonormal under the
//! unnormalized surface measure.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sphere::{sphere_area, SphereGrid};

/// Tolerance on `| |p| - 1 |` for evaluation points.
pub const UNIT_TOLERANCE: f64 = 1e-10;

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// `N(n, k)`, the dimension of the degree-`k` harmonics on `S^{n-1}`.
pub fn dim_space(n: usize, k: usize) -> usize {
    assert!(n >= 2, "dim_space needs n >= 2");
    // N(n,k) = C(k+n-1, n-1) - C(k+n-3, n-1)
    let top = binomial(k + n - 1, n - 1);
    let low = if k >= 2 { binomial(k + n - 3, n - 1) } else { 0 };
    (top - low) as usize
}

/// Eigenvalue of `□ = Δ + (n-1)` on degree `k`: `-(k-1)(k+n-1)`.
pub fn box_multiplier(n: usize, k: usize) -> f64 {
    -((k as f64) - 1.0) * ((k + n) as f64 - 1.0)
}

/// Eigenvalue of the spherical Laplacian on degree `k`.
pub fn laplace_multiplier(n: usize, k: usize) -> f64 {
    -(k as f64) * ((k + n) as f64 - 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Zero,
    Even,
    Odd,
    Mixed,
}

/// A function on `S^{n-1}` stored as coefficients on the real orthonormal
/// harmonic basis, degrees `0..=l_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    n: usize,
    l_max: usize,
    offsets: Vec<usize>,
    coeffs: Vec<f64>,
}

fn degree_offsets(n: usize, l_max: usize) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(l_max + 2);
    let mut acc = 0;
    offsets.push(0);
    for k in 0..=l_max {
        acc += dim_space(n, k);
        offsets.push(acc);
    }
    offsets
}

impl SpectralField {
    pub fn zeros(n: usize, l_max: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Dimension(n));
        }
        let offsets = degree_offsets(n, l_max);
        let len = offsets[l_max + 1];
        Ok(Self {
            n,
            l_max,
            offsets,
            coeffs: vec![0.0; len],
        })
    }

    pub fn from_coeffs(n: usize, l_max: usize, coeffs: Vec<f64>) -> Result<Self> {
        let mut field = Self::zeros(n, l_max)?;
        if coeffs.len() != field.coeffs.len() {
            return Err(Error::LengthMismatch {
                expected: field.coeffs.len(),
                actual: coeffs.len(),
            });
        }
        field.coeffs = coeffs;
        Ok(field)
    }

    /// The constant function `value`.
    pub fn constant(n: usize, l_max: usize, value: f64) -> Result<Self> {
        let mut field = Self::zeros(n, l_max)?;
        field.coeffs[0] = value * sphere_area(n)?.sqrt();
        Ok(field)
    }

    /// The single basis function `Y_{k,l}`.
    pub fn basis(n: usize, l_max: usize, k: usize, l: usize) -> Result<Self> {
        let mut field = Self::zeros(n, l_max)?;
        field.set(k, l, 1.0)?;
        Ok(field)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn index(&self, k: usize, l: usize) -> Result<usize> {
        if k > self.l_max {
            return Err(Error::Degree(format!(
                "degree {k} exceeds truncation {}",
                self.l_max
            )));
        }
        let size = self.offsets[k + 1] - self.offsets[k];
        if l == 0 || l > size {
            return Err(Error::Degree(format!("order l = {l} outside 1..={size} for degree {k}")));
        }
        Ok(self.offsets[k] + l - 1)
    }

    /// Coefficient of `Y_{k,l}` (`l` is 1-based).
    pub fn get(&self, k: usize, l: usize) -> Result<f64> {
        Ok(self.coeffs[self.index(k, l)?])
    }

    pub fn set(&mut self, k: usize, l: usize, value: f64) -> Result<()> {
        let i = self.index(k, l)?;
        self.coeffs[i] = value;
        Ok(())
    }

    pub fn degree(&self, k: usize) -> &[f64] {
        &self.coeffs[self.offsets[k]..self.offsets[k + 1]]
    }

    pub fn degree_mut(&mut self, k: usize) -> &mut [f64] {
        let (a, b) = (self.offsets[k], self.offsets[k + 1]);
        &mut self.coeffs[a..b]
    }

    /// `‖π_k f‖₂²`.
    pub fn degree_norm_sq(&self, k: usize) -> f64 {
        if k > self.l_max {
            return 0.0;
        }
        self.degree(k).iter().map(|c| c * c).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// `∫ f dx`.
    pub fn integral(&self) -> f64 {
        self.coeffs[0] * sphere_area(self.n).expect("n >= 3").sqrt()
    }

    /// `(f, g) = ∫ f g dx` by Parseval.
    pub fn inner(&self, other: &SpectralField) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn parity(&self, tol: f64) -> Parity {
        let mut even = false;
        let mut odd = false;
        for k in 0..=self.l_max {
            if self.degree(k).iter().any(|c| c.abs() > tol) {
                if k % 2 == 0 {
                    even = true;
                } else {
                    odd = true;
                }
            }
        }
        match (even, odd) {
            (false, false) => Parity::Zero,
            (true, false) => Parity::Even,
            (false, true) => Parity::Odd,
            (true, true) => Parity::Mixed,
        }
    }

    /// Largest `|c|` in odd degrees.
    pub fn odd_size(&self) -> (usize, f64) {
        self.worst_component(|k| k % 2 == 1)
    }

    pub(crate) fn worst_component(&self, select: impl Fn(usize) -> bool) -> (usize, f64) {
        let mut worst = (0, 0.0);
        for k in (0..=self.l_max).filter(|&k| select(k)) {
            for c in self.degree(k) {
                if c.abs() > worst.1 {
                    worst = (k, c.abs());
                }
            }
        }
        worst
    }

    /// Multiplies the degree-`k` block by `multiplier(k)`.
    pub fn apply_multiplier(&self, multiplier: impl Fn(usize) -> f64) -> SpectralField {
        let mut out = self.clone();
        for k in 0..=self.l_max {
            let mu = multiplier(k);
            for c in out.degree_mut(k) {
                *c *= mu;
            }
        }
        out
    }

    /// Same function re-truncated (or zero-padded) at `l_max`.
    pub fn with_l_max(&self, l_max: usize) -> SpectralField {
        let mut out = SpectralField::zeros(self.n, l_max).expect("valid n");
        let keep = self.l_max.min(l_max);
        let len = self.offsets[keep + 1];
        out.coeffs[..len].copy_from_slice(&self.coeffs[..len]);
        out
    }

    /// `L²` norm of the degrees above `l_max`.
    pub fn tail_norm(&self, l_max: usize) -> f64 {
        if l_max >= self.l_max {
            return 0.0;
        }
        self.coeffs[self.offsets[l_max + 1]..]
            .iter()
            .map(|c| c * c)
            .sum::<f64>()
            .sqrt()
    }

    fn check_compatible(&self, other: &SpectralField) -> Result<()> {
        if self.n != other.n {
            return Err(Error::Dimension(other.n));
        }
        if self.l_max != other.l_max {
            return Err(Error::LengthMismatch {
                expected: self.coeffs.len(),
                actual: other.coeffs.len(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &SpectralField) -> Result<SpectralField> {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField> {
        self.axpy(-1.0, other)
    }

    /// `self + alpha * other`.
    pub fn axpy(&self, alpha: f64, other: &SpectralField) -> Result<SpectralField> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a += alpha * b;
        }
        Ok(out)
    }

    pub fn scale(&self, alpha: f64) -> SpectralField {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= alpha);
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("field serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// `π_k f`: zeroes every degree other than `k`.
pub fn project_degree(field: &SpectralField, k: usize) -> Result<SpectralField> {
    if k > field.l_max() {
        return Err(Error::Degree(format!(
            "degree {k} exceeds truncation {}",
            field.l_max()
        )));
    }
    Ok(field.apply_multiplier(|j| if j == k { 1.0 } else { 0.0 }))
}

#[derive(Serialize, Deserialize)]
struct CoeffEntry {
    k: usize,
    l: usize,
    c: f64,
}

#[derive(Serialize, Deserialize)]
struct FieldWire {
    n: usize,
    #[serde(rename = "L_max")]
    l_max: usize,
    coeffs: Vec<CoeffEntry>,
}

impl Serialize for SpectralField {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut coeffs = Vec::new();
        for k in 0..=self.l_max {
            for (i, &c) in self.degree(k).iter().enumerate() {
                if c != 0.0 {
                    coeffs.push(CoeffEntry { k, l: i + 1, c });
                }
            }
        }
        FieldWire {
            n: self.n,
            l_max: self.l_max,
            coeffs,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SpectralField {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let wire = FieldWire::deserialize(deserializer)?;
        let mut field = SpectralField::zeros(wire.n, wire.l_max).map_err(D::Error::custom)?;
        for entry in wire.coeffs {
            field
                .set(entry.k, entry.l, entry.c)
                .map_err(D::Error::custom)?;
        }
        Ok(field)
    }
}

fn tri(k: usize, m: usize) -> usize {
    k * (k + 1) / 2 + m
}

/// Normalized associated Legendre values `P̄_k^m(t)` for `0 <= m <= k <= l_max`,
/// with `s = sin θ >= 0` and no Condon-Shortley phase, stored at `tri(k, m)`.
fn legendre_table(l_max: usize, t: f64, s: f64) -> Vec<f64> {
    let mut p = vec![0.0; tri(l_max, l_max) + 1];
    let mut diag = 1.0 / (4.0 * PI).sqrt();
    for m in 0..=l_max {
        if m > 0 {
            diag *= ((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * s;
        }
        p[tri(m, m)] = diag;
        if m == l_max {
            break;
        }
        p[tri(m + 1, m)] = ((2 * m + 3) as f64).sqrt() * t * diag;
        for k in (m + 2)..=l_max {
            let (kf, mf) = (k as f64, m as f64);
            let a = ((4.0 * kf * kf - 1.0) / (kf * kf - mf * mf)).sqrt();
            let b = (((kf - 1.0) * (kf - 1.0) - mf * mf) / (4.0 * (kf - 1.0) * (kf - 1.0) - 1.0)).sqrt();
            p[tri(k, m)] = a * (t * p[tri(k - 1, m)] - b * p[tri(k - 2, m)]);
        }
    }
    p
}

/// `d P̄_k^m / dθ` for interior points (`s > 0`).
fn legendre_dtheta(l_max: usize, t: f64, s: f64, p: &[f64]) -> Vec<f64> {
    let mut d = vec![0.0; p.len()];
    for k in 0..=l_max {
        for m in 0..=k {
            let kf = k as f64;
            let lower = if m < k {
                let mf = m as f64;
                ((2.0 * kf + 1.0) / (2.0 * kf - 1.0) * (kf * kf - mf * mf)).sqrt() * p[tri(k - 1, m)]
            } else {
                0.0
            };
            d[tri(k, m)] = (kf * t * p[tri(k, m)] - lower) / s;
        }
    }
    d
}

/// Degree-and-order bookkeeping for the `S^2` basis up to `l_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HarmonicBasis {
    n: usize,
    l_max: usize,
}

impl HarmonicBasis {
    pub fn new(n: usize, l_max: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Dimension(n));
        }
        Ok(Self { n, l_max })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    /// Number of basis functions, `Σ_{k <= l_max} N(n, k)`.
    pub fn len(&self) -> usize {
        (0..=self.l_max).map(|k| dim_space(self.n, k)).sum()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn require_s2(&self) -> Result<()> {
        if self.n != 3 {
            return Err(Error::Dimension(self.n));
        }
        Ok(())
    }

    /// Every `Y_{k,l}(p)` in field order.
    pub fn eval(&self, p: &Vector3<f64>) -> Result<Vec<f64>> {
        self.require_s2()?;
        let norm = p.norm();
        if (norm - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::NonUnitPoint { index: 0, norm });
        }
        Ok(eval_unchecked(self.l_max, p))
    }
}

fn eval_unchecked(l_max: usize, p: &Vector3<f64>) -> Vec<f64> {
    let t = p.z.clamp(-1.0, 1.0);
    let rho = (p.x * p.x + p.y * p.y).sqrt();
    let legendre = legendre_table(l_max, t, rho);
    let (cphi, sphi) = if rho > 0.0 {
        (p.x / rho, p.y / rho)
    } else {
        (1.0, 0.0)
    };
    let mut out = vec![0.0; (l_max + 1) * (l_max + 1)];
    // cos(mφ), sin(mφ) by complex powers.
    let mut cm = vec![1.0; l_max + 1];
    let mut sm = vec![0.0; l_max + 1];
    for m in 1..=l_max {
        cm[m] = cm[m - 1] * cphi - sm[m - 1] * sphi;
        sm[m] = sm[m - 1] * cphi + cm[m - 1] * sphi;
    }
    for k in 0..=l_max {
        let base = k * k;
        out[base] = legendre[tri(k, 0)];
        for m in 1..=k {
            let v = SQRT_2 * legendre[tri(k, m)];
            out[base + 2 * m - 1] = v * cm[m];
            out[base + 2 * m] = v * sm[m];
        }
    }
    out
}

fn require_s2_field(field: &SpectralField) -> Result<()> {
    if field.n() != 3 {
        return Err(Error::Dimension(field.n()));
    }
    Ok(())
}

/// Coefficients of grid values on the basis, by quadrature.
pub fn analyze(values: &[f64], grid: &SphereGrid, basis: &HarmonicBasis) -> Result<SpectralField> {
    basis.require_s2()?;
    let l_max = basis.l_max();
    if grid.max_exact_degree() < 2 * l_max {
        return Err(Error::GridTooCoarse {
            exact: grid.max_exact_degree(),
            required: 2 * l_max,
        });
    }
    if values.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            actual: values.len(),
        });
    }
    let n_lon = grid.longitudes();
    let mut field = SpectralField::zeros(3, l_max)?;
    let mut fc = vec![0.0; l_max + 1];
    let mut fs = vec![0.0; l_max + 1];
    for ring in 0..grid.rings() {
        let row = &values[ring * n_lon..(ring + 1) * n_lon];
        for m in 0..=l_max {
            let (mut a, mut b) = (0.0, 0.0);
            for (j, v) in row.iter().enumerate() {
                let idx = (j * m) % n_lon;
                a += v * grid.cos_phi()[idx];
                b += v * grid.sin_phi()[idx];
            }
            fc[m] = a;
            fs[m] = b;
        }
        let w = grid.ring_weights()[ring];
        let legendre = legendre_table(l_max, grid.cos_theta()[ring], grid.sin_theta()[ring]);
        let coeffs = field.coeffs_mut();
        for k in 0..=l_max {
            let base = k * k;
            coeffs[base] += w * legendre[tri(k, 0)] * fc[0];
            for m in 1..=k {
                let p = w * SQRT_2 * legendre[tri(k, m)];
                coeffs[base + 2 * m - 1] += p * fc[m];
                coeffs[base + 2 * m] += p * fs[m];
            }
        }
    }
    Ok(field)
}

/// Pointwise `Σ c_{k,l} Y_{k,l}(p)` at arbitrary unit vectors.
pub fn synthesize(field: &SpectralField, points: &[Vector3<f64>]) -> Result<Vec<f64>> {
    require_s2_field(field)?;
    points
        .iter()
        .enumerate()
        .map(|(index, p)| {
            let norm = p.norm();
            if (norm - 1.0).abs() > UNIT_TOLERANCE {
                return Err(Error::NonUnitPoint { index, norm });
            }
            Ok(eval_unchecked(field.l_max(), p)
                .iter()
                .zip(field.coeffs())
                .map(|(y, c)| y * c)
                .sum())
        })
        .collect()
}

/// Value of a field at a single point.
pub fn evaluate(field: &SpectralField, p: &Vector3<f64>) -> Result<f64> {
    Ok(synthesize(field, std::slice::from_ref(p))?[0])
}

/// Field values and first/second spherical-coordinate derivatives on grid
/// nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeDerivatives {
    pub value: Vec<f64>,
    pub d_theta: Vec<f64>,
    pub d_phi: Vec<f64>,
    pub d_theta_theta: Vec<f64>,
    pub d_theta_phi: Vec<f64>,
    pub d_phi_phi: Vec<f64>,
}

/// Per-ring Legendre sums `Σ_k c_{k,m} P̄_k^m` for each `m`, cosine and sine
/// parts, with the `√2` folded in.
struct RingSums {
    cos: Vec<f64>,
    sin: Vec<f64>,
}

fn ring_sums(field: &SpectralField, legendre: &[f64]) -> RingSums {
    let l_max = field.l_max();
    let c = field.coeffs();
    let mut cos = vec![0.0; l_max + 1];
    let mut sin = vec![0.0; l_max + 1];
    for k in 0..=l_max {
        let base = k * k;
        cos[0] += c[base] * legendre[tri(k, 0)];
        for m in 1..=k {
            let p = SQRT_2 * legendre[tri(k, m)];
            cos[m] += c[base + 2 * m - 1] * p;
            sin[m] += c[base + 2 * m] * p;
        }
    }
    RingSums { cos, sin }
}

/// Grid values of a field, by separation of variables.
pub fn synthesize_grid(field: &SpectralField, grid: &SphereGrid) -> Result<Vec<f64>> {
    require_s2_field(field)?;
    let n_lon = grid.longitudes();
    let l_max = field.l_max();
    let mut out = vec![0.0; grid.len()];
    for ring in 0..grid.rings() {
        let legendre = legendre_table(l_max, grid.cos_theta()[ring], grid.sin_theta()[ring]);
        let sums = ring_sums(field, &legendre);
        for j in 0..n_lon {
            let mut v = sums.cos[0];
            for m in 1..=l_max {
                let idx = (j * m) % n_lon;
                v += sums.cos[m] * grid.cos_phi()[idx] + sums.sin[m] * grid.sin_phi()[idx];
            }
            out[ring * n_lon + j] = v;
        }
    }
    Ok(out)
}

/// Values and analytic derivatives in `(θ, φ)` at every grid node.
pub fn grid_derivatives(field: &SpectralField, grid: &SphereGrid) -> Result<NodeDerivatives> {
    require_s2_field(field)?;
    let n_lon = grid.longitudes();
    let l_max = field.l_max();
    let len = grid.len();
    let mut out = NodeDerivatives {
        value: vec![0.0; len],
        d_theta: vec![0.0; len],
        d_phi: vec![0.0; len],
        d_theta_theta: vec![0.0; len],
        d_theta_phi: vec![0.0; len],
        d_phi_phi: vec![0.0; len],
    };
    for ring in 0..grid.rings() {
        let (t, s) = (grid.cos_theta()[ring], grid.sin_theta()[ring]);
        let p = legendre_table(l_max, t, s);
        let dp = legendre_dtheta(l_max, t, s, &p);
        // Legendre ODE: P'' = -cot θ P' - (k(k+1) - m²/s²) P
        let mut ddp = vec![0.0; p.len()];
        for k in 0..=l_max {
            for m in 0..=k {
                let i = tri(k, m);
                let (kf, mf) = (k as f64, m as f64);
                ddp[i] = -(t / s) * dp[i] - (kf * (kf + 1.0) - mf * mf / (s * s)) * p[i];
            }
        }
        let v = ring_sums(field, &p);
        let d = ring_sums(field, &dp);
        let dd = ring_sums(field, &ddp);
        for j in 0..n_lon {
            let node = ring * n_lon + j;
            let mut acc = [v.cos[0], d.cos[0], 0.0, dd.cos[0], 0.0, 0.0];
            for m in 1..=l_max {
                let idx = (j * m) % n_lon;
                let (c, sn) = (grid.cos_phi()[idx], grid.sin_phi()[idx]);
                let mf = m as f64;
                acc[0] += v.cos[m] * c + v.sin[m] * sn;
                acc[1] += d.cos[m] * c + d.sin[m] * sn;
                acc[2] += mf * (-v.cos[m] * sn + v.sin[m] * c);
                acc[3] += dd.cos[m] * c + dd.sin[m] * sn;
                acc[4] += mf * (-d.cos[m] * sn + d.sin[m] * c);
                acc[5] += -mf * mf * (v.cos[m] * c + v.sin[m] * sn);
            }
            out.value[node] = acc[0];
            out.d_theta[node] = acc[1];
            out.d_phi[node] = acc[2];
            out.d_theta_theta[node] = acc[3];
            out.d_theta_phi[node] = acc[4];
            out.d_phi_phi[node] = acc[5];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::{build_grid, integrate};
    use approx::assert_abs_diff_eq;

    #[test]
    fn dimensions() {
        assert_eq!(dim_space(3, 0), 1);
        assert_eq!(dim_space(3, 2), 5);
        assert_eq!(dim_space(4, 2), 9);
        for k in 0..20 {
            assert_eq!(dim_space(3, k), 2 * k + 1);
            assert_eq!(dim_space(4, k), (k + 1) * (k + 1));
        }
        // N(n,2) = (n-1)(n+2)/2
        for n in 3..9 {
            assert_eq!(dim_space(n, 2), (n - 1) * (n + 2) / 2);
            assert_eq!(dim_space(n, 1), n);
        }
    }

    #[test]
    fn box_values() {
        for n in 3..8 {
            assert_eq!(box_multiplier(n, 1), 0.0);
            assert_eq!(box_multiplier(n, 0), (n - 1) as f64);
        }
        assert_eq!(box_multiplier(3, 2), -4.0);
        assert_eq!(box_multiplier(3, 0), 2.0);
        for k in 0..10 {
            assert_eq!(box_multiplier(5, k), laplace_multiplier(5, k) + 4.0);
        }
    }

    #[test]
    fn low_degree_closed_forms() {
        let basis = HarmonicBasis::new(3, 2).unwrap();
        let p = Vector3::new(0.48, -0.6, 0.64);
        let y = basis.eval(&p).unwrap();
        let c0 = 1.0 / (4.0 * PI).sqrt();
        let c1 = (3.0 / (4.0 * PI)).sqrt();
        assert_abs_diff_eq!(y[0], c0, epsilon = 1e-15);
        assert_abs_diff_eq!(y[1], c1 * p.z, epsilon = 1e-15);
        assert_abs_diff_eq!(y[2], c1 * p.x, epsilon = 1e-15);
        assert_abs_diff_eq!(y[3], c1 * p.y, epsilon = 1e-15);
        let c20 = (5.0 / (16.0 * PI)).sqrt();
        assert_abs_diff_eq!(y[4], c20 * (3.0 * p.z * p.z - 1.0), epsilon = 1e-15);
        let c21 = (15.0 / (4.0 * PI)).sqrt();
        assert_abs_diff_eq!(y[5], c21 * p.x * p.z, epsilon = 1e-15);
        assert_abs_diff_eq!(y[6], c21 * p.y * p.z, epsilon = 1e-15);
        let c22 = (15.0 / (16.0 * PI)).sqrt();
        assert_abs_diff_eq!(y[7], c22 * (p.x * p.x - p.y * p.y), epsilon = 1e-15);
        assert_abs_diff_eq!(y[8], 2.0 * c22 * p.x * p.y, epsilon = 1e-15);
    }

    #[test]
    fn orthonormal_on_exact_grid() {
        let l_max = 10;
        let grid = build_grid(l_max, 3).unwrap();
        let basis = HarmonicBasis::new(3, l_max).unwrap();
        let table: Vec<Vec<f64>> = grid.nodes().iter().map(|p| basis.eval(p).unwrap()).collect();
        let count = basis.len();
        for a in 0..count {
            for b in a..count {
                let values: Vec<f64> = table.iter().map(|y| y[a] * y[b]).collect();
                let expected = if a == b { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(integrate(&values, &grid).unwrap(), expected, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn integrals_of_harmonics() {
        let grid = build_grid(4, 3).unwrap();
        let f = SpectralField::basis(3, 2, 2, 3).unwrap();
        let values = synthesize_grid(&f, &grid).unwrap();
        assert_abs_diff_eq!(integrate(&values, &grid).unwrap(), 0.0, epsilon = 1e-12);
        let squares: Vec<f64> = values.iter().map(|v| v * v).collect();
        assert_abs_diff_eq!(integrate(&squares, &grid).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn analyze_examples() {
        let grid = build_grid(12, 3).unwrap();
        let basis = HarmonicBasis::new(3, 6).unwrap();
        let y31 = SpectralField::basis(3, 6, 3, 1).unwrap();
        let values = synthesize_grid(&y31, &grid).unwrap();
        let field = analyze(&values, &grid, &basis).unwrap();
        for (i, c) in field.coeffs().iter().enumerate() {
            let expected = if i == 9 { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(*c, expected, epsilon = 1e-12);
        }
        let ones = vec![1.0; grid.len()];
        let field = analyze(&ones, &grid, &basis).unwrap();
        assert_abs_diff_eq!(field.get(0, 1).unwrap(), (4.0 * PI).sqrt(), epsilon = 1e-12);

        let mut target = SpectralField::constant(3, 6, 1.0).unwrap();
        target.set(4, 2, 0.1).unwrap();
        let values = synthesize_grid(&target, &grid).unwrap();
        let field = analyze(&values, &grid, &basis).unwrap();
        assert_abs_diff_eq!(field.get(0, 1).unwrap(), (4.0 * PI).sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(field.get(4, 2).unwrap(), 0.1, epsilon = 1e-12);
    }

    #[test]
    fn analyze_rejects_coarse_grid() {
        let grid = build_grid(4, 3).unwrap();
        let basis = HarmonicBasis::new(3, 6).unwrap();
        let values = vec![0.0; grid.len()];
        assert!(matches!(
            analyze(&values, &grid, &basis),
            Err(Error::GridTooCoarse { .. })
        ));
    }

    #[test]
    fn synthesize_examples() {
        let pts = [Vector3::new(0.0, 0.6, 0.8), Vector3::new(0.0, 0.0, 1.0)];
        let zero = SpectralField::zeros(3, 5).unwrap();
        assert!(synthesize(&zero, &pts).unwrap().iter().all(|&v| v == 0.0));
        let one = SpectralField::constant(3, 5, 1.0).unwrap();
        for v in synthesize(&one, &pts).unwrap() {
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-14);
        }
        let p = Vector3::new(0.36, 0.48, 0.8);
        for l in 1..=5 {
            let f = SpectralField::basis(3, 4, 2, l).unwrap();
            let v = synthesize(&f, &[p, -p]).unwrap();
            assert_abs_diff_eq!(v[0], v[1], epsilon = 1e-14);
        }
        assert!(matches!(
            synthesize(&one, &[Vector3::new(1.0, 1.0, 0.0)]),
            Err(Error::NonUnitPoint { index: 0, .. })
        ));
    }

    #[test]
    fn grid_synthesis_matches_pointwise() {
        let grid = build_grid(9, 3).unwrap();
        let coeffs: Vec<f64> = (0..64).map(|i| ((i * 37 % 11) as f64 - 5.0) / 7.0).collect();
        let f = SpectralField::from_coeffs(3, 7, coeffs).unwrap();
        let fast = synthesize_grid(&f, &grid).unwrap();
        let slow = synthesize(&f, grid.nodes()).unwrap();
        for (a, b) in fast.iter().zip(&slow) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-13);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let grid = build_grid(6, 3).unwrap();
        let coeffs: Vec<f64> = (0..36).map(|i| ((i * 13 % 7) as f64 - 3.0) / 5.0).collect();
        let f = SpectralField::from_coeffs(3, 5, coeffs).unwrap();
        let d = grid_derivatives(&f, &grid).unwrap();
        let at = |theta: f64, phi: f64| {
            let p = Vector3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos());
            evaluate(&f, &p).unwrap()
        };
        let h = 1e-4;
        for (node, p) in grid.nodes().iter().enumerate().step_by(5) {
            let theta = p.z.acos();
            let phi = p.y.atan2(p.x);
            let v = at(theta, phi);
            assert_abs_diff_eq!(d.value[node], v, epsilon = 1e-12);
            let dt = (at(theta + h, phi) - at(theta - h, phi)) / (2.0 * h);
            let dp = (at(theta, phi + h) - at(theta, phi - h)) / (2.0 * h);
            let dtt = (at(theta + h, phi) - 2.0 * v + at(theta - h, phi)) / (h * h);
            let dpp = (at(theta, phi + h) - 2.0 * v + at(theta, phi - h)) / (h * h);
            let dtp = (at(theta + h, phi + h) - at(theta + h, phi - h) - at(theta - h, phi + h)
                + at(theta - h, phi - h))
                / (4.0 * h * h);
            assert_abs_diff_eq!(d.d_theta[node], dt, epsilon = 1e-6);
            assert_abs_diff_eq!(d.d_phi[node], dp, epsilon = 1e-6);
            assert_abs_diff_eq!(d.d_theta_theta[node], dtt, epsilon = 1e-4);
            assert_abs_diff_eq!(d.d_phi_phi[node], dpp, epsilon = 1e-4);
            assert_abs_diff_eq!(d.d_theta_phi[node], dtp, epsilon = 1e-4);
        }
    }

    #[test]
    fn project_degree_examples() {
        let one = SpectralField::constant(3, 4, 1.0).unwrap();
        assert_eq!(project_degree(&one, 0).unwrap(), one);
        let y41 = SpectralField::basis(3, 4, 4, 1).unwrap();
        assert_eq!(project_degree(&y41, 2).unwrap().norm_sq(), 0.0);
        let y23 = SpectralField::basis(3, 4, 2, 3).unwrap();
        let sum = one.add(&y23).unwrap();
        assert_eq!(project_degree(&sum, 2).unwrap(), y23);
        assert!(project_degree(&sum, 5).is_err());
    }

    #[test]
    fn parity_flags() {
        let mut f = SpectralField::zeros(3, 4).unwrap();
        assert_eq!(f.parity(0.0), Parity::Zero);
        f.set(2, 1, 1.0).unwrap();
        assert_eq!(f.parity(0.0), Parity::Even);
        f.set(3, 4, 1e-3).unwrap();
        assert_eq!(f.parity(0.0), Parity::Mixed);
        assert_eq!(f.parity(1e-2), Parity::Even);
        f.set(2, 1, 0.0).unwrap();
        assert_eq!(f.parity(0.0), Parity::Odd);
    }

    #[test]
    fn general_dimension_layout() {
        let f = SpectralField::zeros(5, 3).unwrap();
        let expected: usize = (0..=3).map(|k| dim_space(5, k)).sum();
        assert_eq!(f.len(), expected);
        assert_eq!(f.degree(2).len(), dim_space(5, 2));
        assert!(SpectralField::zeros(2, 3).is_err());
    }

    #[test]
    fn json_format() {
        let mut f = SpectralField::zeros(3, 2).unwrap();
        f.set(0, 1, 2.0).unwrap();
        f.set(2, 3, -0.5).unwrap();
        let text = f.to_json();
        assert_eq!(
            text,
            r#"{"n":3,"L_max":2,"coeffs":[{"k":0,"l":1,"c":2.0},{"k":2,"l":3,"c":-0.5}]}"#
        );
        assert_eq!(SpectralField::from_json(&text).unwrap(), f);
        assert!(SpectralField::from_json(r#"{"n":3,"L_max":1,"coeffs":[{"k":2,"l":1,"c":1.0}]}"#).is_err());
    }
}
