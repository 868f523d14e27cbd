//! Library results against independent computations.

use std::f64::consts::TAU;

use decaykit::charfn::{diagonal, CharacteristicFunction};
use decaykit::hausdorff::{besicovitch_build, CompactCircleSet};
use decaykit::inner::{DeltaOptions, MinModulusOptions};
use decaykit::modelspace::{build_truncation, inverse_power_norms, sarason_norm, ModelOptions, Symbol};
use decaykit::{InnerFunction, SingularMeasure};
use nalgebra::DMatrix;
use num_complex::Complex64;

type CMat = DMatrix<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn norm2(m: &CMat) -> f64 {
    m.clone().svd(false, false).singular_values.max()
}

fn blaschke_direct(zeros: &[Complex64], z: Complex64) -> Complex64 {
    zeros
        .iter()
        .map(|&a| {
            let phase = if a.norm() == 0.0 { c(1.0, 0.0) } else { a.conj() / a.norm() * -1.0 };
            phase * (z - a) / (c(1.0, 0.0) - a.conj() * z)
        })
        .product()
}

/// The library normalizes each factor to be positive at 0; compare moduli and
/// the phase-free quantity `θ(z)/θ(w)`.
#[test]
fn blaschke_matches_product_formula() {
    let zeros = [c(0.5, 0.1), c(-0.3, 0.7), c(0.0, -0.85), c(0.2, 0.0)];
    let theta = InnerFunction::blaschke(&zeros).unwrap();
    let w = c(0.05, 0.4);
    let (tw, bw) = (theta.evaluate(w).unwrap(), blaschke_direct(&zeros, w));
    for k in 0..50 {
        let z = Complex64::from_polar(0.97 * (k as f64 / 50.0), 1.3 * k as f64);
        let (t, b) = (theta.evaluate(z).unwrap(), blaschke_direct(&zeros, z));
        assert!((t.norm() - b.norm()).abs() < 1e-14);
        assert!((t / tw - b / bw).norm() < 1e-12);
    }
}

#[test]
fn blaschke_min_modulus_against_dense_sampling() {
    let zeros = [c(0.5, 0.1), c(-0.3, 0.7), c(0.0, -0.85)];
    let theta = InnerFunction::blaschke(&zeros).unwrap();
    let samples = 400_000;
    for r in [0.2, 0.45, 0.6, 0.9, 0.99] {
        let brute = (0..samples)
            .map(|k| blaschke_direct(&zeros, Complex64::from_polar(r, TAU * k as f64 / samples as f64)).norm())
            .fold(f64::INFINITY, f64::min);
        let m = theta.min_modulus(r, &MinModulusOptions::default()).unwrap().value;
        assert!(m <= brute + 1e-15, "r = {r}: {m} > {brute}");
        assert!(brute - m < 1e-8, "r = {r}: {m} vs {brute}");
    }
}

/// `θ = b_a` with `a > 0`: the circle minimum sits at angle 0 and equals
/// `|r − a|/(1 − ar)`, so δₙ solves `rⁿ = (a − r)/(1 − ar)`.
#[test]
fn single_zero_delta_by_bisection() {
    for a in [0.3, 0.6, 0.9] {
        let theta = InnerFunction::blaschke(&[c(a, 0.0)]).unwrap();
        for n in [1u32, 2, 5, 12] {
            let (mut lo, mut hi) = (0.0f64, a);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid.powi(n as i32) < (a - mid) / (1.0 - a * mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let expect = lo.powi(n as i32);
            let got = theta.delta_n(n, &DeltaOptions::default()).unwrap().delta_n;
            assert!((got - expect).abs() < 1e-10, "a = {a}, n = {n}: {got} vs {expect}");
        }
    }
}

/// Midpoint rule on generation-14 cells of the middle-thirds construction.
#[test]
fn cantor_poisson_against_cell_sum() {
    let nu = SingularMeasure::cantor(1.0, 1.0 / 3.0).unwrap();
    let gen = 14;
    let width = 3f64.powi(-gen);
    let starts: Vec<f64> = (0..1u32 << gen)
        .map(|k| (0..gen).filter(|&i| k >> (gen - 1 - i) & 1 == 1).map(|i| 2.0 * 3f64.powi(-(i + 1))).sum())
        .collect();
    let weight = 0.5f64.powi(gen);
    for z in [c(0.0, 0.0), c(0.5, 0.2), c(-0.7, 0.1), c(0.1, -0.9)] {
        let brute: f64 = starts
            .iter()
            .map(|s| {
                let e = Complex64::from_polar(1.0, TAU * (s + width / 2.0));
                weight * (1.0 - z.norm_sqr()) / (e - z).norm_sqr()
            })
            .sum();
        let got = nu.poisson(z, 1e-12).unwrap();
        assert!((got - brute).abs() < 1e-9 * brute.max(1.0), "z = {z}: {got} vs {brute}");
    }
}

/// `K_θ` for distinct zeros is spanned by Szegő kernels `k_a`, with Gram
/// `⟨k_{aⱼ}, k_{aᵢ}⟩ = 1/(1 − āⱼ aᵢ)` and `S* k_a = ā k_a`. With `G = R*R`, an operator whose
/// coefficient matrix is `A` has norm `‖R A R⁻¹‖`.
fn kernel_model_norm(zeros: &[Complex64], f: impl Fn(Complex64) -> Complex64) -> f64 {
    let n = zeros.len();
    let g = CMat::from_fn(n, n, |i, j| c(1.0, 0.0) / (c(1.0, 0.0) - zeros[j].conj() * zeros[i]));
    let l = g.cholesky().expect("kernel Gram is positive definite").l();
    let r = l.adjoint();
    let r_inv = r.clone().try_inverse().unwrap();
    let a = CMat::from_diagonal(&nalgebra::DVector::from_iterator(n, zeros.iter().map(|&z| f(z).conj())));
    norm2(&(&r * a * r_inv))
}

#[test]
fn finite_blaschke_shift_norms_match_kernel_model() {
    let zeros = [c(0.5, 0.0), c(-0.3, 0.4), c(0.1, -0.7), c(0.6, 0.6)];
    let theta = InnerFunction::blaschke(&zeros).unwrap();
    let tr = build_truncation(&theta, zeros.len()).unwrap();
    let shift = kernel_model_norm(&zeros, |z| z);
    assert!((tr.shift_norm() - shift).abs() < 1e-9, "{} vs {shift}", tr.shift_norm());
    for n in [1u32, 3, 6] {
        let inv = kernel_model_norm(&zeros, |z| z.powi(-(n as i32)));
        let got = inverse_power_norms(&theta, n, zeros.len(), &ModelOptions::default()).unwrap();
        assert!((got.compressed - inv).abs() < 1e-8 * inv, "n = {n}: {} vs {inv}", got.compressed);
        assert!((got.section - inv).abs() < 1e-8 * inv);
    }
}

#[test]
fn sarason_polynomial_matches_kernel_model() {
    let zeros = [c(0.5, 0.0), c(-0.3, 0.4), c(0.1, -0.7)];
    let theta = InnerFunction::blaschke(&zeros).unwrap();
    let p = vec![c(0.2, 0.0), c(-0.5, 0.3), c(0.0, 0.0), c(0.4, 0.0)];
    let eval = |z: Complex64| p.iter().rev().fold(c(0.0, 0.0), |acc, &k| acc * z + k);
    let expect = kernel_model_norm(&zeros, eval);
    let got = sarason_norm(&theta, &Symbol::Polynomial(p.clone()), 64).unwrap().norm;
    assert!((got - expect).abs() < 1e-9, "{got} vs {expect}");
}

/// The defect basis follows decreasing singular values of T, so the diagonal
/// comes out ordered by decreasing `|a|`.
#[test]
fn diagonal_characteristic_function_is_diagonal_mobius() {
    let entries = [c(0.3, 0.0), c(-0.2, 0.5), c(0.0, 0.8)];
    let order = [c(0.0, 0.8), c(-0.2, 0.5), c(0.3, 0.0)];
    let cf = CharacteristicFunction::new(diagonal(&entries).unwrap()).unwrap();
    for lam in [c(0.0, 0.0), c(0.4, -0.4), c(-0.6, 0.1)] {
        let th = cf.theta_eval(lam).unwrap();
        let expect = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
            3,
            order.iter().map(|&a| (lam - a) / (c(1.0, 0.0) - a.conj() * lam)),
        ));
        assert!((&th - &expect).norm() < 1e-12, "λ = {lam}: {th}");
    }
}

#[test]
fn diagonal_inverse_powers_closed_form() {
    let t = diagonal(&[c(0.3, 0.0), c(0.8, 0.0)]).unwrap();
    for n in 1..=8u32 {
        let expect = 0.3f64.powi(-(n as i32));
        assert!((t.inverse_power_norm(n).unwrap() - expect).abs() < 1e-12 * expect);
    }
}

/// Cantor stage covers: `2^k` arcs of length `3^{-k}` turns at level `k`.
#[test]
fn cantor_cover_lengths() {
    let h = besicovitch_build(&CompactCircleSet::cantor(), 10).unwrap();
    for cover in h.covers() {
        let k = cover.level as i32;
        assert_eq!(cover.arc_count(), 2f64.powi(k));
        let expect = (2.0 / 3.0f64).powi(k);
        assert!((cover.total_length() - expect).abs() < 1e-12 * expect);
    }
}
