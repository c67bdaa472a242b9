use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::density::{make_test_density, DensitySpec};
use crate::error::Result;
use crate::holo::{CPoint, HoloPoly};
use crate::kahler::{laplacian, DomainBox, FnField, MixedPoly, Potential};
use crate::morse::{build_amplitude, build_phase, recentered_charts};
use crate::pairing::{pairing_integral, stationary_phase_predict, CGOPair, QuadratureSpec};
use crate::C64;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub passed: bool,
    pub note: Option<String>,
}

impl Check {
    fn new(name: &str, max_residual: f64, tolerance: f64, samples: usize) -> Self {
        Check {
            name: name.into(),
            max_residual,
            tolerance,
            samples,
            passed: max_residual <= tolerance,
            note: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub potential: String,
    pub dim: usize,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Random polynomial with `terms` monomials of total degree ≤ `max_deg` and
/// standard normal complex coefficients.
pub(crate) fn random_holo_poly(rng: &mut ChaCha8Rng, dim: usize, max_deg: u32, terms: usize) -> HoloPoly {
    let mut out = Vec::with_capacity(terms);
    for _ in 0..terms {
        let deg = rng.random_range(0..=max_deg);
        let mut e = vec![0u32; dim];
        for _ in 0..deg {
            e[rng.random_range(0..dim)] += 1;
        }
        out.push((e, C64::new(normal(rng), normal(rng))));
    }
    HoloPoly::from_terms(dim, out).expect("dimension matches")
}

fn random_point(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> Vec<C64> {
    (0..dim)
        .map(|_| {
            let r = radius * rng.random::<f64>().sqrt();
            C64::from_polar(r, rng.random_range(0.0..std::f64::consts::TAU))
        })
        .collect()
}

/// `∂/∂x_j = ∂_j + ∂̄_j` for `axis = j`, `∂/∂y_j = i(∂_j − ∂̄_j)` for `axis = n + j`.
fn real_partial(p: &MixedPoly, axis: usize) -> MixedPoly {
    let n = p.dim();
    let j = axis % n;
    if axis < n {
        &p.d_z(j) + &p.d_zbar(j)
    } else {
        (&p.d_z(j) - &p.d_zbar(j)).scale(C64::new(0.0, 1.0))
    }
}

/// Second real partials of a mixed polynomial, by exact differentiation in
/// `(x, y)`; entry `[a][b]` is `∂_a ∂_b p`.
fn real_hessian_polys(p: &MixedPoly) -> Vec<Vec<MixedPoly>> {
    let n = p.dim();
    (0..2 * n)
        .map(|a| {
            let first = real_partial(p, a);
            (0..2 * n).map(|b| real_partial(&first, b)).collect()
        })
        .collect()
}

fn eval_real_hessian(polys: &[Vec<MixedPoly>], z: &[C64]) -> DMatrix<f64> {
    let m = polys.len();
    DMatrix::from_fn(m, m, |a, b| polys[a][b].eval(z).re)
}

fn real_hessian_exact(p: &MixedPoly, z: &[C64]) -> DMatrix<f64> {
    eval_real_hessian(&real_hessian_polys(p), z)
}

/// `∂_j ∂̄_k = ¼(∂x_j∂x_k + ∂y_j∂y_k + i(∂x_j∂y_k − ∂y_j∂x_k))`.
fn mixed_from_real(d2: &DMatrix<f64>) -> DMatrix<C64> {
    let n = d2.nrows() / 2;
    DMatrix::from_fn(n, n, |j, k| {
        0.25 * C64::new(d2[(j, k)] + d2[(n + j, n + k)], d2[(j, n + k)] - d2[(n + j, k)])
    })
}

/// `max |Δ_g Re u|, |Δ_g Im u|` over random holomorphic `u` of degree ≤ 6.
/// The mixed Hessian handed to the Laplacian is assembled from real second
/// derivatives rather than from the Wirtinger rules.
pub fn harmonicity_check(potential: &Potential, dim: usize, polys: usize, points: usize, seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..polys {
        let terms = rng.random_range(1..=8);
        let u = random_holo_poly(&mut rng, dim, 6, terms);
        let zs: Vec<Vec<C64>> = (0..points).map(|_| random_point(&mut rng, dim, 0.9)).collect();
        for part in [MixedPoly::real_part_of(&u), MixedPoly::imag_part_of(&u)] {
            let d2 = real_hessian_polys(&part);
            let field = FnField::new(dim, move |z| part.eval(z))
                .with_mixed_hessian(move |z| mixed_from_real(&eval_real_hessian(&d2, z)));
            for z in &zs {
                worst = worst.max(laplacian(potential, &field, z)?.norm());
            }
        }
    }
    Ok(Check::new("harmonicity", worst, 1e-10, polys * points))
}

/// Positive control: `Δ_g |z₁|²` against its closed form, so that a
/// Laplacian returning zero everywhere cannot pass the suite.
pub fn laplacian_control_check(potential: &Potential, dim: usize, points: usize, seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = MixedPoly::abs_sq(dim, 0);
    let mut worst = 0.0f64;
    for _ in 0..points {
        let z = random_point(&mut rng, dim, 0.9);
        let r2: f64 = z.iter().map(|c| c.norm_sqr()).sum();
        // F = c|z|²/2 gives H⁻¹ = 2/c; F = c log(1 + |z|²) gives
        // H⁻¹ = (1 + |z|²)(I + z̄zᵀ)/c.
        let want = match potential {
            Potential::Euclidean { scale } => -4.0 / scale,
            Potential::FubiniStudy { scale } => -2.0 * (1.0 + r2) * (1.0 + z[0].norm_sqr()) / scale,
            Potential::Custom(_) => {
                let mut c = Check::new("laplacian control", 0.0, 0.0, 0);
                c.note = Some("skipped: no closed form for a custom potential".into());
                return Ok(c);
            }
        };
        let got = laplacian(potential, &u, &z)?;
        worst = worst.max((got - want).norm() / want.abs());
    }
    Ok(Check::new("laplacian control", worst, 1e-12, points))
}

/// `D²u(a, c) + i D²v(a, c) = Σ Q_{jk} α_j γ_k` for `f = u + iv`, with
/// `α_j = a_{x_j} + i a_{y_j}`; relative to `‖Q‖ |a| |c|`.
pub fn hessian_lemma_check(dim: usize, samples: usize, seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let terms = rng.random_range(2..=8);
        let f = random_holo_poly(&mut rng, dim, 5, terms);
        let z = random_point(&mut rng, dim, 1.0);
        let a: Vec<f64> = (0..2 * dim).map(|_| normal(&mut rng)).collect();
        let c: Vec<f64> = (0..2 * dim).map(|_| normal(&mut rng)).collect();
        let du = real_hessian_exact(&MixedPoly::real_part_of(&f), &z);
        let dv = real_hessian_exact(&MixedPoly::imag_part_of(&f), &z);
        let (av, cv) = (nalgebra::DVector::from_vec(a.clone()), nalgebra::DVector::from_vec(c.clone()));
        let lhs = C64::new(av.dot(&(&du * &cv)), av.dot(&(&dv * &cv)));
        let q = f.hol_hessian(&CPoint::new(z).expect("finite"))?;
        let alpha: Vec<C64> = (0..dim).map(|j| C64::new(a[j], a[dim + j])).collect();
        let gamma: Vec<C64> = (0..dim).map(|j| C64::new(c[j], c[dim + j])).collect();
        let rhs = q.bilinear(&alpha, &gamma);
        let scale = q.matrix().iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt() * av.norm() * cv.norm();
        if scale > 0.0 {
            worst = worst.max((lhs - rhs).norm() / scale);
        }
    }
    Ok(Check::new("hessian lemma", worst, 1e-10, samples))
}

/// Determinant relations between the real Hessian of `Im f` and `Q` at
/// random points where `Q` is well conditioned:
/// `|det D²(Im f)| = |det Q|²` and `|det D²(2 Im f)| = 4ⁿ |det Q|²`.
pub fn det_relation_checks(dim: usize, samples: usize, seed: u64) -> Result<[Check; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst_im, mut worst_2im) = (0.0f64, 0.0f64);
    let mut taken = 0;
    while taken < samples {
        let terms = rng.random_range(3..=8);
        let f = random_holo_poly(&mut rng, dim, 4, terms);
        let z = random_point(&mut rng, dim, 1.0);
        let q = f.hol_hessian(&CPoint::new(z.clone()).expect("finite"))?;
        let qn = q.max_abs_entry();
        if !(q.abs_det() > 1e-3 * qn.powi(dim as i32)) {
            continue;
        }
        taken += 1;
        let d2 = real_hessian_exact(&MixedPoly::imag_part_of(&f), &z);
        let target = q.abs_det().powi(2);
        let det1 = d2.clone().determinant().abs();
        let det2 = (&d2 * 2.0).determinant().abs();
        worst_im = worst_im.max((det1 - target).abs() / target);
        worst_2im = worst_2im.max((det2 - 4f64.powi(dim as i32) * target).abs() / (4f64.powi(dim as i32) * target));
    }
    Ok([
        Check::new("det relation |det D²(Im f)| = |det Q|²", worst_im, 1e-8, samples),
        Check::new("det relation |det D²(2 Im f)| = 4ⁿ|det Q|²", worst_2im, 1e-8, samples),
    ])
}

/// Relative gap between the stationary-phase prediction and quadrature for
/// the canonical phase `Σ z_l²` and a radial bump, against `10 h`.
pub fn stationary_phase_check(potential: &Potential, dim: usize) -> Result<Check> {
    let (width, h) = match dim {
        1 => (1.2, 0.1),
        2 => (1.0, 0.3),
        _ => {
            let mut c = Check::new("stationary phase oracle", 0.0, 0.0, 0);
            c.note = Some(format!("skipped: {}-real-dimensional quadrature", 2 * dim));
            return Ok(c);
        }
    };
    let o = CPoint::origin(dim);
    let domain = DomainBox::polydisk(&o, width + 0.2, 0.1)?;
    let density = make_test_density(&DensitySpec::Bump { center: vec![[0.0, 0.0]; dim], width, amplitude: 1.0 }, &domain)?;
    let phase = build_phase(&o, &recentered_charts(&o))?;
    let amp = build_amplitude(&o, &[])?;
    let pair = CGOPair::new(&phase, &amp, h)?;
    let got = pairing_integral(&density, &pair, potential, &domain, &QuadratureSpec::default())?;
    let predicted = stationary_phase_predict(C64::new(1.0, 0.0), &phase, &amp, potential, &o, h)?;
    let rel = (got.value - predicted).norm() / predicted.norm();
    Ok(Check::new("stationary phase oracle", rel, 10.0 * h, 1))
}

pub fn run_verification(potential: &Potential, dim: usize, seed: u64) -> Result<VerifyReport> {
    let mut checks = vec![
        harmonicity_check(potential, dim, 20, 20, seed)?,
        laplacian_control_check(potential, dim, 20, seed)?,
        hessian_lemma_check(dim, 100, seed.wrapping_add(1))?,
    ];
    checks.extend(det_relation_checks(dim, 50, seed.wrapping_add(2))?);
    checks.push(stationary_phase_check(potential, dim)?);
    Ok(VerifyReport { potential: potential.name().to_string(), dim, checks })
}
