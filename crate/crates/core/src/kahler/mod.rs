//! Kähler metric, volume density and Laplace–Beltrami operator from a
//! potential, plus the harmonicity check for holomorphic polynomials.

mod domain;
mod field;
mod potential;

pub use domain::{DomainBox, Region};
pub use field::{fd_mixed_hessian, FnField, MixedPoly, SmoothField, SupportBall};
pub use potential::{CustomPotential, Potential};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::holo::HoloPoly;
use crate::C64;

/// Step used when a field has no analytic mixed Hessian.
const FD_STEP: f64 = 1e-4;

/// `H_{jk̄}(z) = ∂²F/∂z_j∂z̄_k`, checked Hermitian positive definite.
pub fn metric_matrix(potential: &Potential, z: &[C64]) -> Result<DMatrix<C64>> {
    let h = potential.raw_mixed_hessian(z);
    if h.nrows() != z.len() || !h.is_square() {
        return Err(Error::DimensionMismatch { expected: z.len(), got: h.nrows() });
    }
    let scale = h.iter().map(|c| c.norm()).fold(1.0, f64::max);
    let skew = (&h - h.adjoint()).iter().map(|c| c.norm()).fold(0.0, f64::max);
    if !(skew <= 1e-12 * scale) {
        return Err(Error::Potential(format!("metric is not Hermitian at {z:?} (defect {skew:.3e})")));
    }
    let min_eig = h.clone().symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min_eig > 0.0) {
        return Err(Error::Potential(format!(
            "metric is not positive definite at {z:?} (min eigenvalue {min_eig:.3e})"
        )));
    }
    Ok(h)
}

/// Riemannian volume density `ρ = 2ⁿ det H` against Lebesgue measure.
pub fn volume_density(potential: &Potential, z: &[C64]) -> Result<f64> {
    let h = metric_matrix(potential, z)?;
    Ok(2f64.powi(z.len() as i32) * h.determinant().re)
}

/// Positive Laplace–Beltrami operator `Δ_g u = −2 Σ (H⁻¹)_{kj} ∂²u/∂z_j∂z̄_k`.
pub fn laplacian<F: SmoothField + ?Sized>(potential: &Potential, u: &F, z: &[C64]) -> Result<C64> {
    if u.dim() != z.len() {
        return Err(Error::DimensionMismatch { expected: u.dim(), got: z.len() });
    }
    let h = metric_matrix(potential, z)?;
    let hinv = h
        .try_inverse()
        .ok_or_else(|| Error::Potential(format!("singular metric at {z:?}")))?;
    let mixed = u.mixed_hessian(z).unwrap_or_else(|| fd_mixed_hessian(u, z, FD_STEP));
    let n = z.len();
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..n {
        for k in 0..n {
            acc += hinv[(k, j)] * mixed[(j, k)];
        }
    }
    Ok(acc * -2.0)
}

/// `max |Δ_g Re p| + max |Δ_g Im p|` over the samples.
pub fn harmonicity_residual<P: AsRef<[C64]>>(potential: &Potential, p: &HoloPoly, samples: &[P]) -> Result<f64> {
    let re = MixedPoly::real_part_of(p);
    let im = MixedPoly::imag_part_of(p);
    let mut max_re = 0.0f64;
    let mut max_im = 0.0f64;
    for z in samples {
        let z = z.as_ref();
        max_re = max_re.max(laplacian(potential, &re, z)?.norm());
        max_im = max_im.max(laplacian(potential, &im, z)?.norm());
    }
    Ok(max_re + max_im)
}

impl AsRef<[C64]> for crate::holo::CPoint {
    fn as_ref(&self) -> &[C64] {
        self.coords()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::holo::CPoint;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_point(rng: &mut ChaCha8Rng, n: usize, r: f64) -> Vec<C64> {
        (0..n).map(|_| c(rng.random_range(-r..r), rng.random_range(-r..r))).collect()
    }

    /// Real metric in `(x, y)` ordering: `G_ab = 2 Re(w_aᵀ H w̄_b)`.
    fn real_metric(h: &DMatrix<C64>) -> DMatrix<f64> {
        let n = h.nrows();
        let w = |a: usize| if a < n { c(1.0, 0.0) } else { c(0.0, 1.0) };
        DMatrix::from_fn(2 * n, 2 * n, |a, b| 2.0 * (h[(a % n, b % n)] * w(a) * w(b).conj()).re)
    }

    fn d4<F: Fn(f64) -> f64>(f: F, s: f64) -> f64 {
        (-f(2.0 * s) + 8.0 * f(s) - 8.0 * f(-s) + f(-2.0 * s)) / (12.0 * s)
    }

    /// Divergence-form oracle `−(1/√g) ∂_a(√g g^{ab} ∂_b u)` by finite differences.
    fn fd_laplace_beltrami<F: SmoothField>(pot: &Potential, u: &F, z: &[C64], s: f64) -> f64 {
        let n = z.len();
        let x0: Vec<f64> = z.iter().map(|v| v.re).chain(z.iter().map(|v| v.im)).collect();
        let to_z = |x: &[f64]| -> Vec<C64> { (0..n).map(|j| c(x[j], x[n + j])).collect() };
        let uval = |x: &[f64]| u.value(&to_z(x)).re;
        let flux = |x: &[f64], a: usize| {
            let g = real_metric(&pot.raw_mixed_hessian(&to_z(x)));
            let sqrt_det = g.determinant().sqrt();
            let ginv = g.try_inverse().unwrap();
            let mut acc = 0.0;
            for b in 0..2 * n {
                let db = d4(
                    |t| {
                        let mut y = x.to_vec();
                        y[b] += t;
                        uval(&y)
                    },
                    s,
                );
                acc += ginv[(a, b)] * db;
            }
            sqrt_det * acc
        };
        let g0 = real_metric(&pot.raw_mixed_hessian(z));
        let sqrt_det0 = g0.determinant().sqrt();
        let mut div = 0.0;
        for a in 0..2 * n {
            div += d4(
                |t| {
                    let mut y = x0.clone();
                    y[a] += t;
                    flux(&y, a)
                },
                s,
            );
        }
        -div / sqrt_det0
    }

    #[test]
    fn metric_examples() {
        let h = metric_matrix(&Potential::euclidean(), &[c(0.3, 0.1), c(-1.0, 2.0)]).unwrap();
        assert_eq!(h, DMatrix::from_diagonal_element(2, 2, c(0.5, 0.0)));
        let fs = Potential::fubini_study(2.5).unwrap();
        assert_eq!(metric_matrix(&fs, &[c(0.0, 0.0)]).unwrap()[(0, 0)], c(2.5, 0.0));
    }

    #[test]
    fn fubini_study_metric_matches_fd_of_potential() {
        let fs = Potential::fubini_study(1.3).unwrap();
        let potential_field = FnField::new(2, {
            let fs = fs.clone();
            move |z: &[C64]| c(fs.value(z), 0.0)
        });
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let z = random_point(&mut rng, 2, 1.0);
            let exact = metric_matrix(&fs, &z).unwrap();
            let fd = fd_mixed_hessian(&potential_field, &z, 1e-4);
            let err = (exact - fd).iter().map(|v| v.norm()).fold(0.0, f64::max);
            assert!(err < 1e-6, "FD mismatch {err}");
        }
    }

    #[test]
    fn builtin_metrics_are_hermitian_positive_definite() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for pot in [Potential::euclidean(), Potential::fubini_study(1.0).unwrap()] {
            for _ in 0..1000 {
                let n = rng.random_range(1..=3);
                let z = random_point(&mut rng, n, 2.0);
                let h = metric_matrix(&pot, &z).unwrap();
                let skew = (&h - h.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max);
                assert!(skew <= 1e-12);
                let eig = h.symmetric_eigen();
                assert!(eig.eigenvalues.iter().all(|&l| l > 0.0));
            }
        }
    }

    #[test]
    fn rejects_indefinite_custom_potential() {
        let bad = Potential::Custom(CustomPotential::new(
            "saddle",
            |_| 0.0,
            |z| DMatrix::from_diagonal_element(z.len(), z.len(), c(-1.0, 0.0)),
        ));
        assert!(matches!(metric_matrix(&bad, &[c(0.0, 0.0)]), Err(Error::Potential(_))));
        assert!(Potential::from_config("hyperbolic", 1.0).is_err());
        assert!(Potential::from_config("euclidean", 0.0).is_err());
    }

    #[test]
    fn volume_density_examples() {
        assert_eq!(volume_density(&Potential::euclidean(), &[c(0.4, 0.4), c(1.0, 0.0)]).unwrap(), 1.0);

        // F = |z|² doubles Lebesgue mass: midpoint rule on [-1,1]² gives 8 vs 4.
        let doubled = Potential::Euclidean { scale: 2.0 };
        let m = 40;
        let cell = (2.0 / m as f64).powi(2);
        let mut mass = 0.0;
        for a in 0..m {
            for b in 0..m {
                let z = c(-1.0 + (a as f64 + 0.5) * 2.0 / m as f64, -1.0 + (b as f64 + 0.5) * 2.0 / m as f64);
                mass += volume_density(&doubled, &[z]).unwrap() * cell;
            }
        }
        assert!((mass - 8.0).abs() < 1e-12);

        let fs = Potential::fubini_study(1.0).unwrap();
        assert!((volume_density(&fs, &[c(0.0, 0.0)]).unwrap() - 2.0).abs() < 1e-15);
        // FD cross-check: ρ = 2 ∂∂̄F with ∂∂̄F from second differences of F.
        let field = FnField::new(1, |z: &[C64]| c(z[0].norm_sqr().ln_1p(), 0.0));
        let fd = 2.0 * fd_mixed_hessian(&field, &[c(0.0, 0.0)], 1e-4)[(0, 0)].re;
        assert!((fd - 2.0).abs() < 1e-6);
    }

    #[test]
    fn closed_form_density_matches_determinant_and_real_metric() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for pot in [Potential::Euclidean { scale: 0.7 }, Potential::fubini_study(1.7).unwrap()] {
            for n in 1..=3 {
                let z = random_point(&mut rng, n, 1.0);
                let rho = volume_density(&pot, &z).unwrap();
                assert!((pot.density_unchecked(&z) - rho).abs() <= 1e-12 * rho);
                let g = real_metric(&metric_matrix(&pot, &z).unwrap());
                assert!((g.determinant().sqrt() - rho).abs() <= 1e-12 * rho);
            }
        }
    }

    #[test]
    fn flat_laplacian_of_x_squared() {
        let u = &MixedPoly::x(1, 0) * &MixedPoly::x(1, 0);
        let v = laplacian(&Potential::euclidean(), &u, &[c(0.3, -0.4)]).unwrap();
        assert!((v - c(-2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn flat_consistency_with_fd_laplacian() {
        // u = x₁²y₂ + |z₁|²x₂ + y₁⁴
        let n = 2;
        let y1 = MixedPoly::y(n, 0);
        let u = &(&(&(&MixedPoly::x(n, 0) * &MixedPoly::x(n, 0)) * &MixedPoly::y(n, 1))
            + &(&MixedPoly::abs_sq(n, 0) * &MixedPoly::x(n, 1)))
            + &(&(&y1 * &y1) * &(&y1 * &y1));
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let z = random_point(&mut rng, n, 1.0);
            let exact = laplacian(&Potential::euclidean(), &u, &z).unwrap();
            let x0: Vec<f64> = z.iter().map(|v| v.re).chain(z.iter().map(|v| v.im)).collect();
            let mut fd = 0.0;
            let s = 1e-3;
            for a in 0..2 * n {
                let at = |t: f64| {
                    let mut x = x0.clone();
                    x[a] += t;
                    u.value(&[c(x[0], x[2]), c(x[1], x[3])]).re
                };
                fd += (-at(2.0 * s) + 16.0 * at(s) - 30.0 * at(0.0) + 16.0 * at(-s) - at(-2.0 * s)) / (12.0 * s * s);
            }
            assert!((exact.re + fd).abs() < 1e-6, "{} vs {}", exact.re, -fd);
            assert!(exact.im.abs() < 1e-14);
        }
    }

    #[test]
    fn fubini_study_laplacian_matches_divergence_form_oracle() {
        let pot = Potential::fubini_study(1.0).unwrap();
        let u = &MixedPoly::abs_sq(2, 0) + &MixedPoly::abs_sq(2, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..10 {
            let z = random_point(&mut rng, 2, 0.8);
            let exact = laplacian(&pot, &u, &z).unwrap();
            let oracle = fd_laplace_beltrami(&pot, &u, &z, 1e-3);
            assert!((exact.re - oracle).abs() < 1e-5, "{} vs {oracle}", exact.re);
        }
    }

    #[test]
    fn holomorphic_parts_are_harmonic() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let samples: Vec<CPoint> = (0..100).map(|_| CPoint::new(random_point(&mut rng, 1, 1.0)).unwrap()).collect();
        let z2 = HoloPoly::variable(1, 0).square();
        assert_eq!(harmonicity_residual(&Potential::euclidean(), &z2, &samples).unwrap(), 0.0);

        let samples2: Vec<CPoint> = (0..100).map(|_| CPoint::new(random_point(&mut rng, 2, 1.0)).unwrap()).collect();
        let mut terms = Vec::new();
        for _ in 0..12 {
            let a = rng.random_range(0..=5u32);
            let b = rng.random_range(0..=(5 - a));
            terms.push((vec![a, b], c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))));
        }
        let p = HoloPoly::from_terms(2, terms).unwrap();
        let fs = Potential::fubini_study(1.0).unwrap();
        assert!(harmonicity_residual(&fs, &p, &samples2).unwrap() <= 1e-10);
        // Kernel does not depend on the potential's normalisation.
        assert!(harmonicity_residual(&fs.scaled(2.0), &p, &samples2).unwrap() <= 1e-10);
    }

    #[test]
    fn modulus_squared_is_not_harmonic() {
        let u = MixedPoly::abs_sq(1, 0);
        let flat = laplacian(&Potential::euclidean(), &u, &[c(0.2, 0.1)]).unwrap();
        assert!((flat - c(-4.0, 0.0)).norm() < 1e-14);
        // Fubini–Study: Δ|z|² = −2 (1+|z|²)².
        let z = c(0.5, -0.3);
        let fs = laplacian(&Potential::fubini_study(1.0).unwrap(), &u, &[z]).unwrap();
        let expected = -2.0 * (1.0 + z.norm_sqr()).powi(2);
        assert!((fs.re - expected).abs() < 1e-13);
    }
}
