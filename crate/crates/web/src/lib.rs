//! wasm-bindgen entry points for the static demo page in `www/`.
//!
//! Every export takes plain numbers and returns a JSON string, so the same
//! functions run natively under `cargo test`.

use std::sync::Arc;

use nalgebra::{Matrix3, Rotation3, Vector3};
use serde::Serialize;
use serde_json::json;
use wasm_bindgen::prelude::*;

use petty_core::body::{certify, ellipsoid_body, volume};
use petty_core::harmonics::{box_multiplier, synthesize, SpectralField};
use petty_core::projection::{petty, projection_body};
use petty_core::sphere::{build_grid, SphereGrid};
use petty_core::stability::{deficit, dym_spectrum, lambda_l};
use petty_core::transforms::{cosine_multiplier, radon_multiplier};

const OUTLINE_SAMPLES: usize = 256;
const DEMO_L_MAX: usize = 16;
/// Ellipsoids with aspect ratio 2 alias at degree 16.
const ELLIPSOID_L_MAX: usize = 24;

fn grid(l_max: usize) -> Result<Arc<SphereGrid>, String> {
    build_grid(2 * l_max, 3).map(Arc::new).map_err(|e| e.to_string())
}

/// Boundary of the orthogonal projection onto the xz-plane, recovered from
/// the support function `p(t) = h(cos t, 0, sin t)` as `p·u + p'·u'`.
pub fn shadow_outline(field: &SpectralField, samples: usize) -> Result<Vec<[f64; 2]>, String> {
    const DT: f64 = 1e-5;
    let at = |t: f64| Vector3::new(t.cos(), 0.0, t.sin());
    let mut points = Vec::with_capacity(3 * samples);
    for i in 0..samples {
        let t = std::f64::consts::TAU * i as f64 / samples as f64;
        points.extend([at(t), at(t - DT), at(t + DT)]);
    }
    let h = synthesize(field, &points).map_err(|e| e.to_string())?;
    Ok((0..samples)
        .map(|i| {
            let t = std::f64::consts::TAU * i as f64 / samples as f64;
            let p = h[3 * i];
            let dp = (h[3 * i + 2] - h[3 * i + 1]) / (2.0 * DT);
            [p * t.cos() - dp * t.sin(), p * t.sin() + dp * t.cos()]
        })
        .collect())
}

#[derive(Serialize)]
struct SpectrumRow {
    k: usize,
    radon: f64,
    cosine: f64,
    #[serde(rename = "box")]
    box_: f64,
    mu_dym: f64,
    #[serde(rename = "lambda_L")]
    lambda_l: f64,
}

/// Eigenvalues of the transforms and linearized operators on degrees
/// `0..=l_max` in dimension `n`.
#[wasm_bindgen]
pub fn spectrum(n: usize, m: usize, l_max: usize) -> Result<String, String> {
    if n < 3 {
        return Err(format!("n must be ≥ 3, got {n}"));
    }
    let dym = dym_spectrum(n, m, l_max).map_err(|e| e.to_string())?;
    let rows: Vec<SpectrumRow> = (0..=l_max)
        .map(|k| SpectrumRow {
            k,
            radon: radon_multiplier(n, k) + 0.0,
            cosine: cosine_multiplier(n, k) + 0.0,
            box_: box_multiplier(n, k) + 0.0,
            mu_dym: dym.mu(k) + 0.0,
            lambda_l: lambda_l(n, k) + 0.0,
        })
        .collect();
    Ok(json!({ "n": n, "m": m, "kernel_degrees": dym.kernel_degrees, "rows": rows }).to_string())
}

/// Deficit of the body `1 + ε·Y_{k,l}` and the outline of its shadow on the
/// xz-plane.
#[wasm_bindgen]
pub fn perturbed_ball(degree: usize, order: usize, amplitude: f64) -> Result<String, String> {
    let l_max = DEMO_L_MAX.max(degree);
    let grid = grid(l_max)?;
    let mut field = SpectralField::constant(3, l_max, 1.0).map_err(|e| e.to_string())?;
    let current = field.get(degree, order).map_err(|e| e.to_string())?;
    field.set(degree, order, current + amplitude).map_err(|e| e.to_string())?;
    let body = certify(&field, &grid).map_err(|e| e.to_string())?;
    let report = deficit(&body).map_err(|e| e.to_string())?;
    Ok(json!({
        "degree": degree,
        "order": order,
        "amplitude": amplitude,
        "margin": body.margin(),
        "lhs": report.lhs,
        "rhs": report.rhs,
        "equality_case": report.equality_case,
        "per_degree": report.per_degree,
        "outline": shadow_outline(body.field(), OUTLINE_SAMPLES)?,
    })
    .to_string())
}

/// Petty report for the ellipsoid `R_y(angle)·diag(a, b, c)·B`, with the
/// shadows of `K` and of `ΠK` rescaled to the volume of `K`.
#[wasm_bindgen]
pub fn ellipsoid_petty(a: f64, b: f64, c: f64, angle: f64) -> Result<String, String> {
    let grid = grid(ELLIPSOID_L_MAX)?;
    let phi: Matrix3<f64> = Rotation3::from_axis_angle(&Vector3::y_axis(), angle).into_inner()
        * Matrix3::from_diagonal(&Vector3::new(a, b, c));
    let body = ellipsoid_body(&phi, &grid, ELLIPSOID_L_MAX).map_err(|e| e.to_string())?;
    let report = petty(&body).map_err(|e| e.to_string())?;
    let pi = projection_body(&body).map_err(|e| e.to_string())?;
    let scale = (volume(&body) / volume(&pi)).cbrt();
    Ok(json!({
        "report": report,
        "body_outline": shadow_outline(body.field(), OUTLINE_SAMPLES)?,
        "projection_outline": shadow_outline(&pi.field().scale(scale), OUTLINE_SAMPLES)?,
        "projection_scale": scale,
    })
    .to_string())
}
