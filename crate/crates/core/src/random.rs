//! Seeded generators for test bodies and linear maps.

use std::sync::Arc;

use nalgebra::{Matrix3, Quaternion, UnitQuaternion, Vector3};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::body::{certify, SupportBody};
use crate::error::{Error, Result};
use crate::harmonics::SpectralField;
use crate::sphere::SphereGrid;

pub use rand_chacha::ChaCha8Rng as SeededRng;

/// Generator with a recorded seed.
pub fn seeded(seed: u64) -> SeededRng {
    rand::SeedableRng::seed_from_u64(seed)
}

/// Haar-distributed rotation from a normalized Gaussian quaternion.
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> Matrix3<f64> {
    let mut draw = || -> f64 { StandardNormal.sample(rng) };
    let q = Quaternion::new(draw(), draw(), draw(), draw());
    UnitQuaternion::from_quaternion(q).to_rotation_matrix().into_inner()
}

/// `Q₁ diag(a) Q₂` with independent rotations and axes uniform in `[lo, hi]`.
pub fn random_linear_map<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> Matrix3<f64> {
    let axes = Uniform::new_inclusive(lo, hi).expect("lo <= hi");
    let a = Vector3::new(axes.sample(rng), axes.sample(rng), axes.sample(rng));
    random_rotation(rng) * Matrix3::from_diagonal(&a) * random_rotation(rng)
}

/// `1 + Σ c_{k,l} Y_{k,l}` with `c` uniform in `[-amplitude, amplitude]` on
/// degrees `1..=max_degree`, before certification.
pub fn random_perturbation<R: Rng + ?Sized>(
    rng: &mut R,
    l_max: usize,
    max_degree: usize,
    amplitude: f64,
) -> Result<SpectralField> {
    if max_degree > l_max {
        return Err(Error::Degree(format!("max degree {max_degree} exceeds l_max {l_max}")));
    }
    let coeff = Uniform::new_inclusive(-amplitude, amplitude).expect("amplitude >= 0");
    let mut field = SpectralField::constant(3, l_max, 1.0)?;
    for k in 1..=max_degree {
        for c in field.degree_mut(k) {
            *c = coeff.sample(rng);
        }
    }
    Ok(field)
}

/// Draws [`random_perturbation`] and halves the non-constant part until
/// [`certify`] accepts it, so every coefficient stays within `amplitude`.
///
/// Plain rejection almost never succeeds: at `amplitude = 0.05` the degree-6
/// block alone moves the eigenvalues of `A[h]` by more than 1.
pub fn random_body<R: Rng + ?Sized>(
    rng: &mut R,
    grid: &Arc<SphereGrid>,
    l_max: usize,
    max_degree: usize,
    amplitude: f64,
) -> Result<SupportBody> {
    const HALVINGS: usize = 60;
    let field = random_perturbation(rng, l_max, max_degree, amplitude)?;
    let one = SpectralField::constant(3, l_max, 1.0)?;
    let mut shrink = 1.0;
    let mut last = None;
    for _ in 0..HALVINGS {
        let candidate = one.axpy(shrink, &field.sub(&one)?)?;
        match certify(&candidate, grid) {
            Ok(body) => return Ok(body),
            Err(e @ (Error::NotConvex { .. } | Error::NonPositive { .. })) => last = Some(e),
            Err(e) => return Err(e),
        }
        shrink *= 0.5;
    }
    Err(last.expect("at least one attempt"))
}

/// Field with uniform coefficients on the listed degrees only.
pub fn random_field_on_degrees<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    l_max: usize,
    degrees: impl IntoIterator<Item = usize>,
) -> Result<SpectralField> {
    let coeff = Uniform::new_inclusive(-1.0, 1.0).expect("valid range");
    let mut field = SpectralField::zeros(n, l_max)?;
    for k in degrees {
        if k > l_max {
            return Err(Error::Degree(format!("degree {k} exceeds l_max {l_max}")));
        }
        for c in field.degree_mut(k) {
            *c = coeff.sample(rng);
        }
    }
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::build_grid;

    #[test]
    fn rotations_are_orthogonal() {
        let mut rng = seeded(3);
        for _ in 0..20 {
            let r = random_rotation(&mut rng);
            assert!((r.transpose() * r - Matrix3::identity()).amax() < 1e-14);
            assert!((r.determinant() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn linear_maps_have_bounded_singular_values() {
        let mut rng = seeded(5);
        for _ in 0..20 {
            let s = random_linear_map(&mut rng, 0.8, 1.25).singular_values();
            assert!(s.iter().all(|&v| (0.8 - 1e-12..=1.25 + 1e-12).contains(&v)));
        }
    }

    #[test]
    fn bodies_are_reproducible() {
        let g = Arc::new(build_grid(12, 3).unwrap());
        let a = random_body(&mut seeded(11), &g, 6, 6, 0.05).unwrap();
        let b = random_body(&mut seeded(11), &g, 6, 6, 0.05).unwrap();
        assert_eq!(a.field(), b.field());
        assert!(a.field().coeffs()[1..].iter().all(|c| c.abs() <= 0.05));
    }
}
