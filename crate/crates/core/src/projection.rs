//! The projection body operator and the Petty functional.
//!
//! `h_{ΠK} = ½ C f_K`: the curvature function is analyzed on the body's grid
//! and the cosine transform is applied as a multiplier. The result is
//! truncated back to the body's `l_max` and re-certified.

use nalgebra::Vector3;
use serde::Serialize;

use crate::body::{certify, volume, SupportBody};
use crate::error::{Error, Result};
use crate::harmonics::{analyze, synthesize, synthesize_grid, HarmonicBasis, SpectralField};
use crate::transforms::{box_spectral, cosine_spectral, pole_rotation};

/// `ΠK`, truncated at `body.l_max()`. The discarded `L²` tail is recorded
/// as the result's truncation.
pub fn projection_body(body: &SupportBody) -> Result<SupportBody> {
    let grid = body.grid();
    let l = body.l_max();
    let analysis_degree = (2 * l).min(grid.degree());
    let basis = HarmonicBasis::new(3, analysis_degree)?;
    let f = analyze(body.curvature(), grid, &basis)?;
    let full = cosine_spectral(&f).scale(0.5);
    let tail = full.tail_norm(l);
    Ok(certify(&full.with_l_max(l), grid)?.with_truncation(tail))
}

/// `Π^k K` for `k ≥ 1`.
pub fn projection_iterate(body: &SupportBody, k: usize) -> Result<SupportBody> {
    if k == 0 {
        return Err(Error::Degree("projection iterate needs k >= 1".into()));
    }
    let mut current = projection_body(body)?;
    for _ in 1..k {
        current = projection_body(&current)?;
    }
    Ok(current)
}

/// `h_{Π_{n-2}L} = (1/(2(n-1))) C □ h_L`.
pub fn mixed_projection_n2(field: &SpectralField) -> SpectralField {
    let n = field.n();
    cosine_spectral(&box_spectral(field)).scale(1.0 / (2.0 * (n - 1) as f64))
}

/// Area of the shadow `K | u^⊥`, from the restriction `p(α)` of `h_K` to
/// the great circle `u^⊥`: `½ ∫ (p² − p'²) dα`, with `p'` taken from the
/// Fourier series of `p` on `samples` equispaced points.
pub fn shadow_area(field: &SpectralField, u: &Vector3<f64>, samples: usize) -> Result<f64> {
    if samples < 2 * field.l_max() + 2 {
        return Err(Error::Degree(format!(
            "{samples} samples cannot resolve degree {}",
            field.l_max()
        )));
    }
    let rot = pole_rotation(&u.normalize());
    let angles: Vec<f64> = (0..samples)
        .map(|j| 2.0 * std::f64::consts::PI * j as f64 / samples as f64)
        .collect();
    let points: Vec<Vector3<f64>> = angles
        .iter()
        .map(|a| {
            let p = rot * Vector3::new(a.cos(), a.sin(), 0.0);
            p / p.norm()
        })
        .collect();
    let p = synthesize(field, &points)?;
    let mut area = 0.0;
    for m in 0..=field.l_max() {
        let (mut a, mut b) = (0.0, 0.0);
        for (value, angle) in p.iter().zip(&angles) {
            a += value * (m as f64 * angle).cos();
            b += value * (m as f64 * angle).sin();
        }
        // p = a₀ + Σ a_m cos mα + b_m sin mα.
        let scale = if m == 0 { 1.0 } else { 2.0 } / samples as f64;
        let (a, b) = (a * scale, b * scale);
        let mm = (m * m) as f64;
        area += if m == 0 {
            std::f64::consts::PI * a * a
        } else {
            std::f64::consts::PI * (1.0 - mm) * (a * a + b * b) / 2.0
        };
    }
    Ok(area)
}

/// Petty functional and fixed-point diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PettyReport {
    #[serde(rename = "V_K")]
    pub volume: f64,
    #[serde(rename = "V_PiK")]
    pub projection_volume: f64,
    pub petty: f64,
    /// `(V(Π²K)/V(K))^{1/3}`.
    pub c: f64,
    pub residual_sup: f64,
    pub residual_l2: f64,
}

/// `𝒫(K) = V(ΠK)/V(K)²` alone, without the second iterate.
pub fn petty_functional(body: &SupportBody) -> Result<f64> {
    let pi = projection_body(body)?;
    Ok(volume(&pi) / volume(body).powi(2))
}

pub fn petty(body: &SupportBody) -> Result<PettyReport> {
    let v = volume(body);
    let pi = projection_body(body)?;
    let v_pi = volume(&pi);
    let pi2 = projection_body(&pi)?;
    let c = (volume(&pi2) / v).cbrt();
    let diff = pi2.field().axpy(-c, body.field())?;
    let residual_sup = synthesize_grid(&diff, body.grid())?
        .iter()
        .fold(0.0, |m: f64, x| m.max(x.abs()));
    Ok(PettyReport {
        volume: v,
        projection_volume: v_pi,
        petty: v_pi / (v * v),
        c,
        residual_sup,
        residual_l2: diff.l2_norm(),
    })
}
