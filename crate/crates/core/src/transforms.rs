//! The spherical Radon (Funk) transform `R` and the cosine transform `C`.
//!
//! Both are diagonal on spherical harmonics. `R` is normalized so that
//! `R1 = 1` and acts on degree `k` by `(-1)^{k/2} v_{k,n}` with
//!
//! ```text
//! v_{k,n} = 1·3···(k-1) / ((n-1)(n+1)···(n+k-3))   (k even),   0 (k odd)
//! ```
//!
//! and `C` follows from `□C = 2(n-1) ω_{n-1} R`. The `*_oracle` functions
//! evaluate the defining integrals by quadrature on `S^2` instead.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::{Matrix3, Vector3};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::harmonics::{box_multiplier, evaluate, synthesize, SpectralField};
use crate::sphere::{ball_volume, gauss_legendre};

/// `(n-1) v_{k,n}` for even `k`, computed so that `k = 2` gives exactly 1.
pub fn scaled_radon_magnitude(n: usize, k: usize) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    if k == 0 {
        return (n - 1) as f64;
    }
    (2..=k / 2)
        .map(|j| (2 * j - 1) as f64 / (n + 2 * j - 3) as f64)
        .product()
}

/// `v_{k,n}`.
pub fn radon_magnitude(n: usize, k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    scaled_radon_magnitude(n, k) / (n - 1) as f64
}

/// Eigenvalue of `R` on degree `k`: `(-1)^{k/2} v_{k,n}`, zero for odd `k`.
pub fn radon_multiplier(n: usize, k: usize) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    let sign = if (k / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * radon_magnitude(n, k)
}

/// Eigenvalue of `C` on degree `k`.
pub fn cosine_multiplier(n: usize, k: usize) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    let omega = ball_volume(n - 1).expect("n >= 3");
    2.0 * (n - 1) as f64 * omega * radon_multiplier(n, k) / box_multiplier(n, k)
}

/// `(-1)^{k/2} v_{k,n}` as an exact rational.
pub fn radon_multiplier_exact(n: usize, k: usize) -> BigRational {
    if k % 2 == 1 {
        return BigRational::zero();
    }
    let mut acc = BigRational::one();
    for j in 1..=k / 2 {
        acc *= BigRational::new(BigInt::from(2 * j - 1), BigInt::from(n + 2 * j - 3));
    }
    if (k / 2) % 2 == 1 {
        -acc
    } else {
        acc
    }
}

/// `C_k / ω_{n-1}` as an exact rational: `2(n-1) R_k / □_k`.
pub fn cosine_multiplier_over_omega_exact(n: usize, k: usize) -> BigRational {
    if k % 2 == 1 {
        return BigRational::zero();
    }
    let bx = box_multiplier_exact(n, k);
    BigRational::from_integer(BigInt::from(2 * (n - 1))) * radon_multiplier_exact(n, k) / bx
}

pub fn box_multiplier_exact(n: usize, k: usize) -> BigRational {
    let value = -((k as i64) - 1) * ((k + n) as i64 - 1);
    BigRational::from_integer(BigInt::from(value))
}

/// The dimension-`n` Legendre polynomial `P_k^n` (with `P_k^n(1) = 1`) as
/// exact coefficients in `t`, lowest degree first.
fn legendre_exact(n: usize, k: usize) -> Vec<BigRational> {
    let mut prev = vec![BigRational::one()];
    if k == 0 {
        return prev;
    }
    let mut cur = vec![BigRational::zero(), BigRational::one()];
    for j in 1..k {
        // (j+n-2) P_{j+1} = (2j+n-2) t P_j - j P_{j-1}
        let mut next = vec![BigRational::zero(); j + 2];
        let a = BigRational::from_integer(BigInt::from(2 * j + n - 2));
        let b = BigRational::from_integer(BigInt::from(j));
        for (i, c) in cur.iter().enumerate() {
            next[i + 1] += &a * c;
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] -= &b * c;
        }
        let d = BigRational::from_integer(BigInt::from(j + n - 2));
        for c in next.iter_mut() {
            *c /= &d;
        }
        prev = std::mem::replace(&mut cur, next);
    }
    cur
}

/// `R_k = P_k^n(0)` by the Funk-Hecke formula, exactly.
pub fn radon_multiplier_funk_hecke_exact(n: usize, k: usize) -> BigRational {
    legendre_exact(n, k)[0].clone()
}

/// `C_k / ω_{n-1} = 2(n-1) ∫₀¹ t P_k^n(t) (1-t²)^{(n-3)/2} dt` for even `k`
/// by the Funk-Hecke formula, exactly, without reference to `R` or `□`.
pub fn cosine_multiplier_funk_hecke_exact(n: usize, k: usize) -> BigRational {
    if k % 2 == 1 {
        return BigRational::zero();
    }
    let p = legendre_exact(n, k);
    let mut total = BigRational::zero();
    // ∫₀¹ t^{2i+1}(1-t²)^a dt = ½ i! / ((a+1)…(a+i+1)) with a = (n-3)/2.
    let mut moment = BigRational::new(BigInt::one(), BigInt::from(n - 1));
    for i in 0..=k / 2 {
        if i > 0 {
            moment *= BigRational::new(BigInt::from(2 * i), BigInt::from(n - 1 + 2 * i));
        }
        total += &p[2 * i] * &moment;
    }
    BigRational::from_integer(BigInt::from(2 * (n - 1))) * total
}

/// Which diagonal operator a [`MultiplierTable`] represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorTag {
    Radon,
    Cosine,
    Box,
    /// Linearization of the `2m`-fold fixed-point map at the ball.
    Dym(usize),
    /// The quadratic-form operator behind the deficit identity.
    LOp,
}

impl OperatorTag {
    /// Operators that only act on even functions.
    pub fn even_only(&self) -> bool {
        matches!(self, OperatorTag::Dym(_))
    }
}

/// Per-degree eigenvalues of a diagonal operator, degrees `0..=l_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierTable {
    pub n: usize,
    pub tag: OperatorTag,
    pub values: Vec<f64>,
}

impl MultiplierTable {
    pub fn from_fn(n: usize, l_max: usize, tag: OperatorTag, f: impl Fn(usize) -> f64) -> Self {
        Self {
            n,
            tag,
            values: (0..=l_max).map(f).collect(),
        }
    }

    pub fn radon(n: usize, l_max: usize) -> Self {
        Self::from_fn(n, l_max, OperatorTag::Radon, |k| radon_multiplier(n, k))
    }

    pub fn cosine(n: usize, l_max: usize) -> Self {
        Self::from_fn(n, l_max, OperatorTag::Cosine, |k| cosine_multiplier(n, k))
    }

    pub fn box_op(n: usize, l_max: usize) -> Self {
        Self::from_fn(n, l_max, OperatorTag::Box, |k| box_multiplier(n, k))
    }

    pub fn l_max(&self) -> usize {
        self.values.len() - 1
    }

    pub fn get(&self, k: usize) -> f64 {
        self.values[k]
    }

    pub fn apply(&self, field: &SpectralField) -> Result<SpectralField> {
        if field.n() != self.n {
            return Err(Error::Dimension(field.n()));
        }
        if field.l_max() > self.l_max() {
            return Err(Error::Degree(format!(
                "table covers degrees up to {}, field has {}",
                self.l_max(),
                field.l_max()
            )));
        }
        Ok(field.apply_multiplier(|k| self.values[k]))
    }
}

pub fn radon_spectral(field: &SpectralField) -> SpectralField {
    let n = field.n();
    field.apply_multiplier(|k| radon_multiplier(n, k))
}

pub fn cosine_spectral(field: &SpectralField) -> SpectralField {
    let n = field.n();
    field.apply_multiplier(|k| cosine_multiplier(n, k))
}

pub fn box_spectral(field: &SpectralField) -> SpectralField {
    let n = field.n();
    field.apply_multiplier(|k| box_multiplier(n, k))
}

/// Orthogonal map sending `e3` to `u` (and `u` to `e3`): the Householder
/// reflection across the bisector, or the identity when `u ≈ e3`.
pub fn pole_rotation(u: &Vector3<f64>) -> Matrix3<f64> {
    let e3 = Vector3::z();
    if u.dot(&e3) > 1.0 - 1e-12 {
        return Matrix3::identity();
    }
    let v = u - e3;
    Matrix3::identity() - 2.0 * v * v.transpose() / v.norm_squared()
}

fn require_oracle_input(field: &SpectralField, u: &Vector3<f64>) -> Result<()> {
    if field.n() != 3 {
        return Err(Error::Dimension(field.n()));
    }
    let norm = u.norm();
    if (norm - 1.0).abs() > crate::harmonics::UNIT_TOLERANCE {
        return Err(Error::NonUnitPoint { index: 0, norm });
    }
    Ok(())
}

/// `Rf(u)`: the mean of `f` over `M` equispaced points of the great circle
/// `u^⊥ ∩ S^2`.
pub fn radon_oracle(field: &SpectralField, u: &Vector3<f64>, samples: usize) -> Result<f64> {
    require_oracle_input(field, u)?;
    let needed = 2 * field.l_max() + 2;
    if samples < needed {
        return Err(Error::Degree(format!(
            "{samples} circle samples cannot resolve degree {} (need {needed})",
            field.l_max()
        )));
    }
    let rot = pole_rotation(u);
    let points: Vec<Vector3<f64>> = (0..samples)
        .map(|j| {
            let a = 2.0 * PI * j as f64 / samples as f64;
            let p = rot * Vector3::new(a.cos(), a.sin(), 0.0);
            p / p.norm()
        })
        .collect();
    let values = synthesize(field, &points)?;
    Ok(crate::sphere::neumaier_sum(values) / samples as f64)
}

/// `Cf(u) = ∫ |u·x| f(x) dx` by quadrature split at the equator of `u`.
///
/// Each hemisphere gets `quad_points` Gauss-Legendre nodes in `t = u·x`;
/// the longitude count resolves the field's degree.
pub fn cosine_oracle(field: &SpectralField, u: &Vector3<f64>, quad_points: usize) -> Result<f64> {
    require_oracle_input(field, u)?;
    if quad_points == 0 {
        return Err(Error::Degree("cosine oracle needs at least one node".into()));
    }
    let rot = pole_rotation(u);
    let (gx, gw) = gauss_legendre(quad_points);
    let n_lon = (2 * field.l_max() + 2).max(2 * quad_points);
    let dphi = 2.0 * PI / n_lon as f64;
    let mut terms = Vec::with_capacity(2 * quad_points * n_lon);
    // [0, 1] maps from [-1, 1] by t = (x + 1)/2; [-1, 0] by t = (x - 1)/2.
    for half in [-1.0f64, 1.0] {
        for (x, w) in gx.iter().zip(&gw) {
            let t = (x + half) / 2.0;
            let s = (1.0 - t * t).sqrt();
            let weight = 0.5 * w * t.abs() * dphi;
            for j in 0..n_lon {
                let phi = j as f64 * dphi;
                let p = rot * Vector3::new(s * phi.cos(), s * phi.sin(), t);
                terms.push(weight * evaluate(field, &(p / p.norm()))?);
            }
        }
    }
    Ok(crate::sphere::neumaier_sum(terms))
}

/// Tolerance for the forbidden components of a Fredholm right-hand side.
pub const FREDHOLM_TOLERANCE: f64 = 1e-12;

/// Solves `g - (n-1)^{2m} R^{2m} g = h` for even `h` with no component in
/// degrees 0 and 2, returning the solution with the same property.
pub fn fredholm_solve(h: &SpectralField, m: usize) -> Result<SpectralField> {
    if m == 0 {
        return Err(Error::Degree("power m must be >= 1".into()));
    }
    let (degree, size) = h.odd_size();
    if size > FREDHOLM_TOLERANCE {
        return Err(Error::ForbiddenComponent { degree, size });
    }
    let (degree, size) = h.worst_component(|k| k == 0 || k == 2);
    if size > FREDHOLM_TOLERANCE {
        return Err(Error::ForbiddenComponent { degree, size });
    }
    let n = h.n();
    Ok(h.apply_multiplier(|k| {
        if k % 2 == 1 || k <= 2 {
            0.0
        } else {
            1.0 / (1.0 - scaled_radon_magnitude(n, k).powi(2 * m as i32))
        }
    }))
}

/// `g - (n-1)^{2m} R^{2m} g`.
pub fn fredholm_operator(g: &SpectralField, m: usize) -> SpectralField {
    let n = g.n();
    g.apply_multiplier(|k| {
        let r = (n - 1) as f64 * radon_multiplier(n, k);
        1.0 - r.powi(2 * m as i32)
    })
}

/// CSV dump `n,k,radon,cosine,box` for degrees `0..=l_max`.
pub fn multiplier_csv(n: usize, l_max: usize) -> String {
    let mut out = String::from("n,k,radon,cosine,box\n");
    for k in 0..=l_max {
        let _ = writeln!(
            out,
            "{n},{k},{:.16e},{:.16e},{:.16e}",
            radon_multiplier(n, k),
            cosine_multiplier(n, k),
            box_multiplier(n, k)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn radon_examples() {
        for n in 3..9 {
            assert_eq!(radon_multiplier(n, 0), 1.0);
            assert_relative_eq!(radon_multiplier(n, 2), -1.0 / (n - 1) as f64, max_relative = 1e-15);
            for k in (1..30).step_by(2) {
                assert_eq!(radon_multiplier(n, k), 0.0);
            }
            assert_eq!(scaled_radon_magnitude(n, 2), 1.0);
        }
        assert_relative_eq!(radon_multiplier(3, 4), 3.0 / 8.0, max_relative = 1e-15);
        // v_{6,3} = 1·3·5 / (2·4·6)
        assert_relative_eq!(radon_multiplier(3, 6), -15.0 / 48.0, max_relative = 1e-15);
    }

    #[test]
    fn cosine_examples() {
        for n in 3..8 {
            let omega = ball_volume(n - 1).unwrap();
            assert_relative_eq!(cosine_multiplier(n, 0), 2.0 * omega, max_relative = 1e-15);
            assert_relative_eq!(
                cosine_multiplier(n, 2),
                2.0 * omega / (n + 1) as f64,
                max_relative = 1e-14
            );
            assert_eq!(cosine_multiplier(n, 3), 0.0);
        }
        assert_relative_eq!(cosine_multiplier(3, 2), PI / 2.0, max_relative = 1e-15);
    }

    #[test]
    fn exact_identity_agrees_with_floats() {
        use num_traits::ToPrimitive;
        for n in 3..=6 {
            let omega = ball_volume(n - 1).unwrap();
            for k in 0..=64 {
                let exact = radon_multiplier_exact(n, k).to_f64().unwrap();
                assert_relative_eq!(radon_multiplier(n, k), exact, max_relative = 1e-14, epsilon = 1e-300);
                let c = cosine_multiplier_over_omega_exact(n, k).to_f64().unwrap() * omega;
                assert_relative_eq!(cosine_multiplier(n, k), c, max_relative = 1e-14, epsilon = 1e-300);
            }
        }
    }

    #[test]
    fn funk_hecke_agrees_with_closed_forms() {
        for n in 3..7 {
            for k in 0..=20 {
                assert_eq!(radon_multiplier_funk_hecke_exact(n, k), radon_multiplier_exact(n, k), "n={n} k={k}");
                assert_eq!(cosine_multiplier_funk_hecke_exact(n, k), cosine_multiplier_over_omega_exact(n, k), "n={n} k={k}");
            }
        }
        // C1 = 2ω_{n-1}.
        assert_eq!(cosine_multiplier_funk_hecke_exact(5, 0), BigRational::from_integer(BigInt::from(2)));
    }

    #[test]
    fn spectral_examples() {
        let one = SpectralField::constant(3, 6, 1.0).unwrap();
        let r = radon_spectral(&one);
        assert_abs_diff_eq!(r.get(0, 1).unwrap(), one.get(0, 1).unwrap(), epsilon = 1e-15);
        let y2 = SpectralField::basis(3, 6, 2, 4).unwrap();
        assert_relative_eq!(cosine_spectral(&y2).get(2, 4).unwrap(), PI / 2.0, max_relative = 1e-15);
        let y5 = SpectralField::basis(3, 6, 5, 2).unwrap();
        assert_eq!(radon_spectral(&y5).norm_sq(), 0.0);
    }

    #[test]
    fn pole_rotation_is_orthogonal() {
        for u in [
            Vector3::new(0.0, 0.0, 1.0),
            Vector3::new(0.0, 0.0, -1.0),
            Vector3::new(0.6, 0.0, 0.8),
            Vector3::new(-0.48, 0.64, -0.6),
        ] {
            let r = pole_rotation(&u);
            assert!((r * Vector3::z() - u).norm() < 1e-15);
            assert!((r.transpose() * r - Matrix3::identity()).norm() < 1e-15);
        }
    }

    #[test]
    fn radon_oracle_examples() {
        let u = Vector3::new(0.0, 0.0, 1.0);
        let one = SpectralField::constant(3, 4, 1.0).unwrap();
        assert_abs_diff_eq!(radon_oracle(&one, &u, 10).unwrap(), 1.0, epsilon = 1e-14);
        for l in 1..=5 {
            let y = SpectralField::basis(3, 4, 2, l).unwrap();
            let expected = -0.5 * evaluate(&y, &u).unwrap();
            assert_abs_diff_eq!(radon_oracle(&y, &u, 10).unwrap(), expected, epsilon = 1e-10);
        }
        let v = Vector3::new(0.36, 0.48, 0.8);
        for l in 1..=3 {
            let y = SpectralField::basis(3, 4, 1, l).unwrap();
            assert_abs_diff_eq!(radon_oracle(&y, &v, 10).unwrap(), 0.0, epsilon = 1e-12);
        }
        assert!(radon_oracle(&one, &u, 4).is_err());
    }

    #[test]
    fn cosine_oracle_examples() {
        let u = Vector3::new(0.0, 0.0, 1.0);
        let one = SpectralField::constant(3, 4, 1.0).unwrap();
        assert_abs_diff_eq!(cosine_oracle(&one, &u, 8).unwrap(), 2.0 * PI, epsilon = 1e-10);
        for l in 1..=5 {
            let y = SpectralField::basis(3, 4, 2, l).unwrap();
            let expected = PI / 2.0 * evaluate(&y, &u).unwrap();
            assert_abs_diff_eq!(cosine_oracle(&y, &u, 8).unwrap(), expected, epsilon = 1e-8);
        }
        let v = Vector3::new(-0.48, 0.64, -0.6);
        for l in 1..=7 {
            let y = SpectralField::basis(3, 4, 3, l).unwrap();
            assert_abs_diff_eq!(cosine_oracle(&y, &v, 8).unwrap(), 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn fredholm_examples() {
        let zero = SpectralField::zeros(3, 8).unwrap();
        assert_eq!(fredholm_solve(&zero, 1).unwrap(), zero);
        let y4 = SpectralField::basis(3, 8, 4, 1).unwrap();
        let g = fredholm_solve(&y4, 1).unwrap();
        assert_relative_eq!(g.get(4, 1).unwrap(), 16.0 / 7.0, max_relative = 1e-14);
        let residual = fredholm_operator(&g, 1).sub(&y4).unwrap().l2_norm();
        assert!(residual < 1e-12);
        let y6 = SpectralField::basis(3, 8, 6, 3).unwrap();
        let g = fredholm_solve(&y6, 40).unwrap();
        assert_abs_diff_eq!(g.get(6, 3).unwrap(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn fredholm_rejects_ill_posed_input() {
        let one = SpectralField::constant(3, 6, 1.0).unwrap();
        assert!(matches!(
            fredholm_solve(&one, 1),
            Err(Error::ForbiddenComponent { degree: 0, .. })
        ));
        let y2 = SpectralField::basis(3, 6, 2, 2).unwrap();
        assert!(matches!(
            fredholm_solve(&y2, 4),
            Err(Error::ForbiddenComponent { degree: 2, .. })
        ));
        let y3 = SpectralField::basis(3, 6, 3, 2).unwrap();
        assert!(matches!(
            fredholm_solve(&y3, 4),
            Err(Error::ForbiddenComponent { degree: 3, .. })
        ));
        assert!(fredholm_solve(&SpectralField::zeros(3, 4).unwrap(), 0).is_err());
    }

    #[test]
    fn csv_layout() {
        let csv = multiplier_csv(3, 2);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "n,k,radon,cosine,box");
        assert_eq!(lines.len(), 4);
        assert!(lines[2].starts_with("3,1,0.0000000000000000e0,"));
    }
}
