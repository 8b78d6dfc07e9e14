//! Quadrature on the unit sphere and ball-volume constants.
//!
//! Integrals are taken against the unnormalized surface measure, so the
//! total mass of `S^{n-1}` is `n * omega_n` (4π on `S^2`).

use std::f64::consts::PI;

use nalgebra::Vector3;

use crate::error::{Error, Result};

/// Volume `omega_k` of the unit ball in `R^k`.
pub fn ball_volume(k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::Dimension(0));
    }
    // omega_0 = 1, omega_1 = 2, omega_k = (2π/k) omega_{k-2}
    let mut even = 1.0;
    let mut odd = 2.0;
    for j in 2..=k {
        let next = 2.0 * PI / j as f64;
        if j % 2 == 0 {
            even *= next;
        } else {
            odd *= next;
        }
    }
    Ok(if k.is_multiple_of(2) { even } else { odd })
}

/// Surface area `n * omega_n` of `S^{n-1}`.
pub fn sphere_area(n: usize) -> Result<f64> {
    Ok(n as f64 * ball_volume(n)?)
}

/// Table of `omega_1 ..= omega_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct BallVolumeTable {
    values: Vec<f64>,
}

impl BallVolumeTable {
    pub fn new(n: usize) -> Result<Self> {
        let values = (1..=n).map(ball_volume).collect::<Result<Vec<_>>>()?;
        Ok(Self { values })
    }

    /// `omega_k`, for `1 <= k <= n`.
    pub fn get(&self, k: usize) -> Option<f64> {
        k.checked_sub(1).and_then(|i| self.values.get(i)).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, ascending.
///
/// Nodes are computed for the upper half and mirrored, so the rule is
/// exactly symmetric.
pub fn gauss_legendre(points: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; points];
    let mut weights = vec![0.0; points];
    let half = points.div_ceil(2);
    for i in 0..half {
        // Tricomi initial guess for the i-th largest root.
        let mut x = (PI * (i as f64 + 0.75) / (points as f64 + 0.5)).cos();
        let mut derivative = 0.0;
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(points, x);
            derivative = dp;
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(points, x);
        if dp != 0.0 {
            derivative = dp;
        }
        let w = 2.0 / ((1.0 - x * x) * derivative * derivative);
        let hi = points - 1 - i;
        if hi == i {
            nodes[i] = 0.0;
        } else {
            nodes[hi] = x;
            nodes[i] = -x;
        }
        weights[hi] = w;
        weights[i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(degree: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if degree == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=degree {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = degree as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Product quadrature on `S^2`: Gauss-Legendre rings in `cos θ` times
/// equispaced longitudes.
///
/// Nodes are stored ring-major: node `i * n_lon + j` sits on ring `i` at
/// longitude `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereGrid {
    dimension: usize,
    degree: usize,
    cos_theta: Vec<f64>,
    sin_theta: Vec<f64>,
    ring_weights: Vec<f64>,
    cos_phi: Vec<f64>,
    sin_phi: Vec<f64>,
    nodes: Vec<Vector3<f64>>,
    weights: Vec<f64>,
}

/// Builds the product grid of degree `degree` (`L + 1` rings, `2L + 2`
/// longitudes), exact for spherical polynomials up to degree `2L + 1`.
pub fn build_grid(degree: usize, n: usize) -> Result<SphereGrid> {
    SphereGrid::new(degree, n)
}

impl SphereGrid {
    pub fn new(degree: usize, n: usize) -> Result<Self> {
        if n != 3 {
            return Err(Error::Dimension(n));
        }
        if degree < 1 {
            return Err(Error::Degree(format!("grid degree must be >= 1, got {degree}")));
        }
        let (cos_theta, gl_weights) = gauss_legendre(degree + 1);
        let sin_theta: Vec<f64> = cos_theta.iter().map(|t| (1.0 - t * t).sqrt()).collect();
        let n_lon = 2 * degree + 2;
        let half = n_lon / 2;
        let mut cos_phi = vec![0.0; n_lon];
        let mut sin_phi = vec![0.0; n_lon];
        for j in 0..half {
            let phi = 2.0 * PI * j as f64 / n_lon as f64;
            cos_phi[j] = phi.cos();
            sin_phi[j] = phi.sin();
            cos_phi[j + half] = -cos_phi[j];
            sin_phi[j + half] = -sin_phi[j];
        }
        let dphi = 2.0 * PI / n_lon as f64;
        let ring_weights: Vec<f64> = gl_weights.iter().map(|w| w * dphi).collect();

        let mut nodes = Vec::with_capacity(cos_theta.len() * n_lon);
        let mut weights = Vec::with_capacity(cos_theta.len() * n_lon);
        for (i, (&t, &s)) in cos_theta.iter().zip(&sin_theta).enumerate() {
            for j in 0..n_lon {
                nodes.push(Vector3::new(s * cos_phi[j], s * sin_phi[j], t));
                weights.push(ring_weights[i]);
            }
        }
        Ok(Self {
            dimension: n,
            degree,
            cos_theta,
            sin_theta,
            ring_weights,
            cos_phi,
            sin_phi,
            nodes,
            weights,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// The construction degree `L`.
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Highest polynomial degree integrated exactly.
    pub fn max_exact_degree(&self) -> usize {
        2 * self.degree + 1
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Vector3<f64>] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn rings(&self) -> usize {
        self.cos_theta.len()
    }

    pub fn longitudes(&self) -> usize {
        self.cos_phi.len()
    }

    pub fn cos_theta(&self) -> &[f64] {
        &self.cos_theta
    }

    pub fn sin_theta(&self) -> &[f64] {
        &self.sin_theta
    }

    /// Node weight shared by every node on a ring.
    pub fn ring_weights(&self) -> &[f64] {
        &self.ring_weights
    }

    pub fn cos_phi(&self) -> &[f64] {
        &self.cos_phi
    }

    pub fn sin_phi(&self) -> &[f64] {
        &self.sin_phi
    }

    /// Index of the antipodal node `-x`.
    pub fn antipode(&self, index: usize) -> usize {
        let n_lon = self.longitudes();
        let (ring, lon) = (index / n_lon, index % n_lon);
        (self.rings() - 1 - ring) * n_lon + (lon + n_lon / 2) % n_lon
    }

    pub fn integrate(&self, values: &[f64]) -> Result<f64> {
        integrate(values, self)
    }
}

/// `Σ w_i values_i` with compensated summation.
pub fn integrate(values: &[f64], grid: &SphereGrid) -> Result<f64> {
    if values.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            actual: values.len(),
        });
    }
    Ok(neumaier_sum(
        values.iter().zip(grid.weights()).map(|(v, w)| v * w),
    ))
}

/// Neumaier's variant of Kahan summation.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut sum = 0.0f64;
    let mut compensation = 0.0f64;
    for x in terms {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            compensation += (sum - t) + x;
        } else {
            compensation += (x - t) + sum;
        }
        sum = t;
    }
    sum + compensation
}
