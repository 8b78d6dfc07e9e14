//! Linearization of `K ↦ Π^{2m}K` at the ball, the operator `ℒ`, the
//! isoperimetric-type deficit and finite-difference derivative checks.
//!
//! All operators here are diagonal on harmonic degrees. Each has a second
//! route that does not use the multiplier tables: the deficit and `ℒ` are
//! also assembled by quadrature with the Radon oracle, and the derivative
//! formulas are compared against central differences of the nonlinear maps.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::Serialize;

use crate::body::{certify, frame_matrices, volume, SupportBody};
use crate::error::{Error, Result};
use crate::harmonics::{analyze, box_multiplier, dim_space, HarmonicBasis, SpectralField};
use crate::projection::{petty_functional, projection_iterate};
use crate::sphere::{ball_volume, integrate, sphere_area, SphereGrid};
use crate::transforms::{
    cosine_multiplier, radon_multiplier, radon_oracle, scaled_radon_magnitude,
};

/// `ln c_{k+1}`, where `Π^k Bⁿ = c_{k+1} Bⁿ`: `c₁ = 1`,
/// `c_{k+2} = c_{k+1}^{n-1} ω_{n-1}`.
pub fn ball_iterate_log_radius(n: usize, k: usize) -> Result<f64> {
    let log_omega = ball_volume(n - 1)?.ln();
    let mut log_c = 0.0;
    for _ in 0..k {
        log_c = (n - 1) as f64 * log_c + log_omega;
    }
    Ok(log_c)
}

/// Radius `c_{k+1}` of `Π^k Bⁿ`; `inf` once it exceeds `f64`.
pub fn ball_iterate_radius(n: usize, k: usize) -> Result<f64> {
    Ok(ball_iterate_log_radius(n, k)?.exp())
}

/// Spectrum of `D𝒴ₘ(0, ·)` on even functions.
///
/// `μ_k = s·(1 − ((n−1)v_{k,n})^{2m})` with `s = c_{2m+1}`; the constant
/// term of the operator cancels the degree-0 multiplier, so `μ₀ = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DYmSpectrum {
    pub n: usize,
    pub m: usize,
    pub l_max: usize,
    pub scale: f64,
    pub log_scale: f64,
    /// `μ_k / s` for `k = 0..=l_max`.
    pub reduced: Vec<f64>,
    pub kernel_degrees: Vec<usize>,
}

impl DYmSpectrum {
    pub fn mu(&self, k: usize) -> f64 {
        let r = self.reduced[k];
        if r == 0.0 {
            0.0
        } else {
            self.scale * r
        }
    }

    pub fn kernel_dimension(&self) -> usize {
        self.kernel_degrees.iter().map(|&k| dim_space(self.n, k)).sum()
    }

    /// `min |μ_k / s|` over even `k ≥ 4`, or `None` if `l_max < 4`.
    pub fn nonkernel_margin(&self) -> Option<f64> {
        (4..=self.l_max)
            .step_by(2)
            .map(|k| self.reduced[k].abs())
            .reduce(f64::min)
    }
}

pub fn dym_spectrum(n: usize, m: usize, l_max: usize) -> Result<DYmSpectrum> {
    if n < 3 {
        return Err(Error::Dimension(n));
    }
    if m == 0 {
        return Err(Error::Degree("m must be >= 1".into()));
    }
    let log_scale = ball_iterate_log_radius(n, 2 * m)?;
    let reduced: Vec<f64> = (0..=l_max)
        .map(|k| match k {
            0 => 0.0,
            _ if k % 2 == 1 => 1.0,
            _ => 1.0 - scaled_radon_magnitude(n, k).powi(2 * m as i32),
        })
        .collect();
    let kernel_degrees = (0..=l_max).step_by(2).filter(|&k| reduced[k] == 0.0).collect();
    Ok(DYmSpectrum {
        n,
        m,
        l_max,
        scale: log_scale.exp(),
        log_scale,
        reduced,
        kernel_degrees,
    })
}

pub const ODD_TOLERANCE: f64 = 1e-12;

/// `D𝒴ₘ(0, g)` for even `g`.
pub fn apply_dym(spectrum: &DYmSpectrum, g: &SpectralField) -> Result<SpectralField> {
    if g.n() != spectrum.n {
        return Err(Error::Dimension(g.n()));
    }
    if g.l_max() > spectrum.l_max {
        return Err(Error::Degree(format!(
            "field degree {} exceeds spectrum degree {}",
            g.l_max(),
            spectrum.l_max
        )));
    }
    let (degree, size) = g.odd_size();
    if size > ODD_TOLERANCE {
        return Err(Error::ForbiddenComponent { degree, size });
    }
    Ok(g.apply_multiplier(|k| spectrum.mu(k)))
}

/// Eigenvalue of `ℒ` on degree `k`.
pub fn lambda_l(n: usize, k: usize) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let v = scaled_radon_magnitude(n, k);
    box_multiplier(n, k) * (1.0 - v * v)
}

/// `ℒh = □h − (n−1)²R²□h + ((n−2)(n−1)/ω_n)∫h dx`, spectrally.
pub fn operator_l(field: &SpectralField) -> SpectralField {
    let n = field.n();
    field.apply_multiplier(|k| lambda_l(n, k))
}

/// `R²□h` at the grid nodes: `□h = tr A[h]` from node derivatives, then two
/// passes of the great-circle Radon oracle with re-analysis in between.
fn radon_squared_box(field: &SpectralField, grid: &Arc<SphereGrid>) -> Result<Vec<f64>> {
    let basis = HarmonicBasis::new(3, field.l_max())?;
    let boxed: Vec<f64> = frame_matrices(field, grid)?.iter().map(|a| a.trace()).collect();
    let mut current = analyze(&boxed, grid, &basis)?;
    let samples = 2 * field.l_max() + 2;
    let mut values = Vec::new();
    for pass in 0..2 {
        values = grid
            .nodes()
            .iter()
            .map(|u| radon_oracle(&current, u, samples))
            .collect::<Result<_>>()?;
        if pass == 0 {
            current = analyze(&values, grid, &basis)?;
        }
    }
    Ok(values)
}

/// `ℒh` at the grid nodes, by quadrature.
pub fn operator_l_quadrature(body: &SupportBody) -> Result<Vec<f64>> {
    let n = 3usize;
    let r2 = radon_squared_box(body.field(), body.grid())?;
    let mean_term = ((n - 2) * (n - 1)) as f64 / ball_volume(n)? * integrate(body.values(), body.grid())?;
    let nn = ((n - 1) * (n - 1)) as f64;
    Ok(body
        .frames()
        .iter()
        .zip(&r2)
        .map(|(a, r)| a.trace() - nn * r + mean_term)
        .collect())
}

/// Degrees `k` of `ℒ` with `λ_k = 0`, up to `l_max`.
pub fn l_kernel_degrees(n: usize, l_max: usize) -> Vec<usize> {
    (0..=l_max).filter(|&k| lambda_l(n, k) == 0.0).collect()
}

/// Which diagonal operator [`kernel_basis`] inspects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelOperator {
    /// `D𝒴ₘ(0, ·)` restricted to even functions.
    Dym(usize),
    L,
}

/// Basis elements `(k, l)` of the kernel, `l` 1-based.
pub fn kernel_basis(op: KernelOperator, n: usize, l_max: usize) -> Result<Vec<(usize, usize)>> {
    let degrees = match op {
        KernelOperator::Dym(m) => dym_spectrum(n, m, l_max)?.kernel_degrees,
        KernelOperator::L => l_kernel_degrees(n, l_max),
    };
    Ok(degrees
        .into_iter()
        .flat_map(|k| (1..=dim_space(n, k)).map(move |l| (k, l)))
        .collect())
}

/// CSV `n,k,radon,cosine,box,mu_dym,lambda_L` for `k = 0..=l_max`.
pub fn spectrum_csv(n: usize, m: usize, l_max: usize) -> Result<String> {
    let spectrum = dym_spectrum(n, m, l_max)?;
    let mut out = String::from("n,k,radon,cosine,box,mu_dym,lambda_L\n");
    for k in 0..=l_max {
        let _ = writeln!(
            out,
            "{n},{k},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            // `+ 0.0` turns IEEE negative zero into `0`.
            radon_multiplier(n, k) + 0.0,
            cosine_multiplier(n, k) + 0.0,
            box_multiplier(n, k) + 0.0,
            spectrum.mu(k) + 0.0,
            lambda_l(n, k) + 0.0
        );
    }
    Ok(out)
}

/// `c_n = ω²_{n−1} / (n(n−1)³)`.
pub fn deficit_constant(n: usize) -> Result<f64> {
    let omega = ball_volume(n - 1)?;
    Ok(omega * omega / (n * (n - 1).pow(3)) as f64)
}

/// `Σ_{k≥3} ‖π_k h‖²` at or below this marks the equality case.
pub const EQUALITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DegreeTerm {
    pub k: usize,
    pub term: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeficitReport {
    pub lhs: f64,
    pub rhs: f64,
    pub per_degree: Vec<DegreeTerm>,
    pub equality_case: bool,
    pub seed: Option<u64>,
}

impl DeficitReport {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    /// `Σ_{k≥3} ‖π_k h‖²`.
    pub fn high_degree_energy(field: &SpectralField) -> f64 {
        (3..=field.l_max()).map(|k| field.degree_norm_sq(k)).sum()
    }
}

/// Weight `c_n(k−1)(n+k−1)(1 − (n−1)²v²_{k,n})` of `‖π_k h‖²`.
pub fn deficit_weight(n: usize, k: usize) -> Result<f64> {
    Ok(-deficit_constant(n)? * lambda_l(n, k))
}

fn deficit_rhs(field: &SpectralField, lhs: f64) -> Result<DeficitReport> {
    let n = field.n();
    let mut per_degree = Vec::new();
    for k in 3..=field.l_max() {
        per_degree.push(DegreeTerm {
            k,
            term: deficit_weight(n, k)? * field.degree_norm_sq(k),
        });
    }
    let rhs = crate::sphere::neumaier_sum(per_degree.iter().map(|t| t.term));
    Ok(DeficitReport {
        lhs,
        rhs,
        per_degree,
        equality_case: DeficitReport::high_degree_energy(field) <= EQUALITY_TOLERANCE,
        seed: None,
    })
}

/// Coefficient of `W²_{n−1}` in the deficit.
fn w_n1_coefficient(n: usize) -> Result<f64> {
    let omega = ball_volume(n - 1)?;
    Ok((n * (n - 2)) as f64 * omega * omega / (((n - 1) * (n - 1)) as f64 * ball_volume(n)?))
}

/// Deficit with every term computed from multipliers; valid for any `n ≥ 3`.
pub fn deficit_spectral(field: &SpectralField) -> Result<DeficitReport> {
    let n = field.n();
    let omega = ball_volume(n - 1)?;
    let nn1 = (n * (n - 1)) as f64;
    let mut w_pi = 0.0;
    let mut w_n2 = 0.0;
    for k in 0..=field.l_max() {
        let e = box_multiplier(n, k) * field.degree_norm_sq(k);
        w_pi += radon_multiplier(n, k).powi(2) * e;
        w_n2 += e;
    }
    w_pi *= omega * omega / nn1;
    w_n2 /= nn1;
    let w_n1 = crate::body::quermass_w_n1(field);
    let nm1_sq = ((n - 1) * (n - 1)) as f64;
    let lhs = w_pi - w_n1_coefficient(n)? * w_n1 * w_n1 - omega * omega / nm1_sq * w_n2;
    deficit_rhs(field, lhs)
}

/// Deficit of a certified body (`n = 3`). The left side uses quadrature
/// only: `W₂ = (1/3)∫h`, `W₁ = (1/6)∫h tr A[h]` and
/// `W₁(Π₁K) = (ω₂²/6)∫h R²□h` with `R` from the great-circle oracle.
pub fn deficit(body: &SupportBody) -> Result<DeficitReport> {
    let n = 3;
    let grid = body.grid();
    let omega = ball_volume(n - 1)?;
    let h = body.values();
    let w_n1 = integrate(h, grid)? / n as f64;
    let h_box: Vec<f64> = h.iter().zip(body.frames()).map(|(h, a)| h * a.trace()).collect();
    let w_n2 = integrate(&h_box, grid)? / 6.0;
    let r2 = radon_squared_box(body.field(), grid)?;
    let h_r2: Vec<f64> = h.iter().zip(&r2).map(|(h, r)| h * r).collect();
    let w_pi = omega * omega / 6.0 * integrate(&h_r2, grid)?;
    let lhs = w_pi - w_n1_coefficient(n)? * w_n1 * w_n1 - omega * omega / 4.0 * w_n2;
    deficit_rhs(body.field(), lhs)
}

/// Richardson table for a sequence with error expansion in even powers of
/// `t`; returns the most extrapolated value.
pub fn richardson(values: &[f64], steps: &[f64]) -> f64 {
    let mut level: Vec<f64> = values.to_vec();
    let mut order = 2;
    while level.len() > 1 {
        level = level
            .windows(2)
            .zip(steps.windows(2))
            .map(|(v, t)| {
                let r = (t[0] / t[1]).powi(order);
                (r * v[1] - v[0]) / (r - 1.0)
            })
            .collect();
        order += 2;
    }
    level[0]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SecondVariation {
    pub steps: Vec<f64>,
    pub second_differences: Vec<f64>,
    pub extrapolated: f64,
    /// `−∫h ℒh dx`.
    pub energy: f64,
    /// `extrapolated / energy`, when the direction is not in `Ker ℒ`.
    pub ratio: Option<f64>,
}

/// Central second differences of `t ↦ 𝒫(1 + t h)` at the ball.
pub fn second_variation_petty(
    direction: &SpectralField,
    steps: &[f64],
    grid: &Arc<SphereGrid>,
) -> Result<SecondVariation> {
    let one = SpectralField::constant(3, direction.l_max(), 1.0)?;
    let petty_at = |t: f64| -> Result<f64> {
        petty_functional(&certify(&one.axpy(t, direction)?, grid)?)
    };
    let p0 = petty_at(0.0)?;
    let second_differences = steps
        .iter()
        .map(|&t| Ok((petty_at(t)? - 2.0 * p0 + petty_at(-t)?) / (t * t)))
        .collect::<Result<Vec<f64>>>()?;
    let extrapolated = richardson(&second_differences, steps);
    let energy = -direction.inner(&operator_l(direction));
    let ratio = (energy.abs() > 1e-12).then(|| extrapolated / energy);
    Ok(SecondVariation {
        steps: steps.to_vec(),
        second_differences,
        extrapolated,
        energy,
        ratio,
    })
}

/// Finite-difference errors of a derivative formula.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativeCheck {
    pub k: usize,
    pub steps: Vec<f64>,
    /// Absolute error of the central difference at each step.
    pub errors: Vec<f64>,
    /// `errors / scale`, with `scale` the formula's size or, when the
    /// formula vanishes, the size of the unperturbed quantity times `‖g‖`.
    pub relative_errors: Vec<f64>,
    /// Observed orders between consecutive steps.
    pub orders: Vec<f64>,
    pub formula_norm: f64,
}

fn derivative_check(k: usize, steps: &[f64], errors: Vec<f64>, formula_norm: f64, scale: f64) -> DerivativeCheck {
    let relative_errors: Vec<f64> = errors.iter().map(|e| e / scale).collect();
    let orders = errors
        .windows(2)
        .zip(steps.windows(2))
        .map(|(e, t)| (e[0] / e[1]).ln() / (t[0] / t[1]).ln())
        .collect();
    DerivativeCheck {
        k,
        steps: steps.to_vec(),
        errors,
        relative_errors,
        orders,
        formula_norm,
    }
}

fn check_iterate_args(g: &SpectralField, k: usize, steps: &[f64]) -> Result<()> {
    if g.n() != 3 {
        return Err(Error::Dimension(g.n()));
    }
    if k == 0 || k > 3 {
        return Err(Error::Degree(format!("iterate order must be 1..=3, got {k}")));
    }
    if steps.is_empty() || steps.iter().any(|&t| t <= 0.0) {
        return Err(Error::Degree("steps must be positive".into()));
    }
    Ok(())
}

/// `(V(Π^kBⁿ)/V(Bⁿ))^{1/n} / (2^k ω^k_{n−1}) = c_{k+1} / (2ω_{n−1})^k`.
fn derivative_prefactor(n: usize, k: usize) -> Result<f64> {
    Ok(ball_iterate_radius(n, k)? / (2.0 * ball_volume(n - 1)?).powi(k as i32))
}

/// `d/dt h_{Π^k(1+tg)}` at `t = 0` from the formula
/// `c_{k+1}/(2ω_{n−1})^k (C□)^k g`.
pub fn iterate_derivative_formula(g: &SpectralField, k: usize) -> Result<SpectralField> {
    let n = g.n();
    let pre = derivative_prefactor(n, k)?;
    Ok(g.apply_multiplier(|d| pre * (cosine_multiplier(n, d) * box_multiplier(n, d)).powi(k as i32)))
}

/// `d/dt V(Π^k(1+tg))` at `t = 0` from the formula
/// `c_{k+1}/(2ω_{n−1})^k ((□C)^k f_{Π^kB}) ∫g`, with `f_{Π^kB} = c_{k+1}^{n−1}`.
pub fn volume_derivative_formula(g: &SpectralField, k: usize) -> Result<f64> {
    let n = g.n();
    let f = ball_iterate_radius(n, k)?.powi(n as i32 - 1);
    let box_cos_0 = box_multiplier(n, 0) * cosine_multiplier(n, 0);
    Ok(derivative_prefactor(n, k)? * box_cos_0.powi(k as i32) * f * g.integral())
}

fn iterate_at(g: &SpectralField, k: usize, t: f64, grid: &Arc<SphereGrid>) -> Result<SupportBody> {
    let one = SpectralField::constant(3, g.l_max(), 1.0)?;
    projection_iterate(&certify(&one.axpy(t, g)?, grid)?, k)
}

pub fn check_iterate_derivative(g: &SpectralField, k: usize, steps: &[f64], grid: &Arc<SphereGrid>) -> Result<DerivativeCheck> {
    check_iterate_args(g, k, steps)?;
    let formula = iterate_derivative_formula(g, k)?;
    let mut errors = Vec::with_capacity(steps.len());
    for &t in steps {
        let plus = iterate_at(g, k, t, grid)?;
        let minus = iterate_at(g, k, -t, grid)?;
        let fd = plus.field().sub(minus.field())?.scale(0.5 / t);
        errors.push(fd.sub(&formula)?.l2_norm());
    }
    let scale = formula.l2_norm().max(ball_iterate_radius(3, k)? * g.l2_norm());
    Ok(derivative_check(k, steps, errors, formula.l2_norm(), scale))
}

pub fn check_volume_derivative(g: &SpectralField, k: usize, steps: &[f64], grid: &Arc<SphereGrid>) -> Result<DerivativeCheck> {
    check_iterate_args(g, k, steps)?;
    let formula = volume_derivative_formula(g, k)?;
    let mut errors = Vec::with_capacity(steps.len());
    for &t in steps {
        let plus = volume(&iterate_at(g, k, t, grid)?);
        let minus = volume(&iterate_at(g, k, -t, grid)?);
        errors.push(((plus - minus) / (2.0 * t) - formula).abs());
    }
    let ball_volume_k = ball_volume(3)? * ball_iterate_radius(3, k)?.powi(3);
    let scale = formula.abs().max(ball_volume_k * g.l2_norm() / sphere_area(3)?.sqrt());
    Ok(derivative_check(k, steps, errors, formula.abs(), scale))
}
