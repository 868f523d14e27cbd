//! Finite sections of the compressed shift `S_θ` on the model space
//! `K_θ = H² ⊖ θH²`.
//!
//! The basis is `q_j = P z^j = z^j − θ Σ_{m≤j} conj(c_m) z^{j−m}`, where `c_m`
//! are the Taylor coefficients of θ. Two identities make the section exact up
//! to the coefficient error: `⟨q_j, q_i⟩` is the `i`-th coefficient of `q_j`, and
//! `S_θ q_j = q_{j+1}`.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::inner::{DeltaOptions, InnerFunction, TaylorOptions};
use crate::measures::SingularMeasure;
use crate::numeric::{singular_values, spectral_norm};

type CMat = DMatrix<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy)]
pub struct ModelOptions {
    pub basis: BasisChoice,
    /// `D = M + guard · M` unless a larger degree is needed.
    pub guard: usize,
    /// Kernel layers sit at radii `1 − ratio^k/2`.
    pub kernel_ratio: f64,
    /// Smallest admissible Gram eigenvalue, relative to the largest.
    pub gram_threshold: f64,
    /// Relative gap tolerated between the two inverse-power routes on exact models.
    pub agreement_tol: f64,
    pub taylor: TaylorOptions,
}

impl Default for ModelOptions {
    fn default() -> Self {
        ModelOptions {
            basis: BasisChoice::Auto,
            guard: 4,
            kernel_ratio: 0.7,
            gram_threshold: 1e-13,
            agreement_tol: 1e-8,
            taylor: TaylorOptions::default(),
        }
    }
}

/// `q_j` through degree `D`, with the residual of `⟨q_j, θ z^k⟩` for the
/// degrees where it is computable from the truncated data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectedMonomial {
    pub j: usize,
    pub coeffs: Vec<Complex64>,
    pub orthogonality_residual: f64,
    pub taylor_error: f64,
}

/// Coefficient `k` of `q_j` given `c_0..`: `δ_kj − Σ_{m≤j} conj(c_m) c_{k−j+m}`.
fn q_coeff(c: &[Complex64], j: usize, k: usize) -> Complex64 {
    let mut s = if k == j { ONE } else { ZERO };
    let lo = j.saturating_sub(k);
    for m in lo..=j {
        let idx = k + m - j;
        if idx < c.len() {
            s -= c[m].conj() * c[idx];
        }
    }
    s
}

fn q_vector(c: &[Complex64], j: usize, len: usize) -> Vec<Complex64> {
    (0..len).map(|k| q_coeff(c, j, k)).collect()
}

pub fn project_monomial(theta: &InnerFunction, j: usize, degree: usize) -> Result<ProjectedMonomial> {
    project_monomial_with(theta, j, degree, &TaylorOptions::default())
}

pub fn project_monomial_with(
    theta: &InnerFunction,
    j: usize,
    degree: usize,
    opts: &TaylorOptions,
) -> Result<ProjectedMonomial> {
    if degree < j {
        return Err(Error::InvalidArgument(format!("degree {degree} below monomial index {j}")));
    }
    let t = theta.taylor_with(degree, opts)?;
    let coeffs = q_vector(&t.coeffs, j, degree + 1);
    // ⟨q_j, θ z^k⟩ = Σ_i q_i conj(c_{i−k}); the sum is complete only when the
    // tail of θ beyond D is negligible, so it is reported, not asserted.
    let mut residual = 0.0f64;
    for k in 0..=(degree - j) {
        let s: Complex64 = (k..=degree).map(|i| coeffs[i] * t.coeffs[i - k].conj()).sum();
        residual = residual.max(s.norm());
    }
    Ok(ProjectedMonomial { j, coeffs, orthogonality_residual: residual, taylor_error: t.error_bound })
}

/// Which spanning family of `K_θ` a truncation uses.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Basis {
    /// `q_j = P z^j`, `j < M`; exact for finite Blaschke products with `M = N`.
    Monomial,
    /// Normalized reproducing kernels `k_λ/‖k_λ‖` at the listed points.
    Kernels(Vec<Complex64>),
    /// Normalized boundary kernels at points `ζ` with `θ(ζ) = α`; they are
    /// orthonormal in `K_θ`.
    Clark { alpha: Complex64, points: Vec<Complex64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BasisChoice {
    /// Monomials for finite Blaschke products, the Clark basis when the
    /// singular part is atomic, interior kernels otherwise.
    #[default]
    Auto,
    Monomial,
    Kernels,
    Clark,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelTruncation {
    pub m: usize,
    pub basis: Basis,
    /// Degree of the Taylor data of θ that was used.
    pub degree: usize,
    /// Taylor coefficients `c_0..c_D`.
    pub taylor: Vec<Complex64>,
    pub taylor_error: f64,
    /// `gram[(i, j)] = ⟨e_j, e_i⟩`.
    pub gram: CMat,
    /// Lower Cholesky factor of the Gram matrix.
    pub cholesky: CMat,
    pub min_gram_eigenvalue: f64,
    pub max_gram_eigenvalue: f64,
    /// Monomial basis only: largest gap between the exact Gram entries and
    /// inner products of the coefficient vectors cut at degree `D`.
    pub gram_tail: Option<f64>,
    /// `⟨S_θ e_j, e_i⟩`.
    pub shift_raw: CMat,
    /// `⟨Bθ, e_i⟩` with `Bθ = (θ − θ(0))/z`; `I − S_θ*S_θ = Bθ ⊗ Bθ` on `K_θ`.
    pub defect_vector: Vec<Complex64>,
    /// `S_θ` compressed to the span, in the orthonormal basis `E L^{-*}`.
    pub shift_matrix: CMat,
}

impl ModelTruncation {
    pub fn shift_norm(&self) -> f64 {
        spectral_norm(&self.shift_matrix)
    }

    pub fn condition_number(&self) -> f64 {
        self.max_gram_eigenvalue / self.min_gram_eigenvalue
    }

    /// `X ↦ L⁻¹ X L^{-*}`: sesquilinear data in the raw basis to the orthonormal one.
    fn to_orthonormal(&self, x: &CMat) -> CMat {
        let l = &self.cholesky;
        let y = l.solve_lower_triangular(x).expect("Cholesky factor is nonsingular");
        // L⁻¹ X L^{-*} = (L⁻¹ (L⁻¹ X)*)*
        let z = l.solve_lower_triangular(&y.adjoint()).expect("Cholesky factor is nonsingular");
        z.adjoint()
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        let mut ev: Vec<Complex64> = self
            .shift_matrix
            .clone()
            .schur()
            .eigenvalues()
            .expect("complex Schur form is triangular")
            .iter()
            .copied()
            .collect();
        ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        ev
    }
}

/// Nested kernel points: the origin, then layers at radii `1 − ρ^k/2`
/// along every anchor direction (zeros, atoms, sampled support).
pub fn kernel_points(theta: &InnerFunction, m: usize, ratio: f64) -> Vec<Complex64> {
    let mut anchors: Vec<f64> =
        theta.zeros().iter().filter(|z| z.zero.norm() > 0.0).map(|z| z.zero.arg().rem_euclid(TAU)).collect();
    match theta.singular_measure() {
        Some(SingularMeasure::Atomic(a)) => anchors.extend(a.atoms().iter().map(|at| at.angle)),
        Some(nu) => anchors.extend(nu.support_points(3).iter().map(|t| t * TAU)),
        None => {}
    }
    if anchors.is_empty() {
        anchors.push(0.0);
    }
    anchors.sort_by(f64::total_cmp);
    anchors.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    let mut pts = vec![Complex64::new(0.0, 0.0)];
    let mut k = 0;
    while pts.len() < m {
        let r = 1.0 - 0.5 * ratio.powi(k);
        for &a in &anchors {
            if pts.len() == m {
                break;
            }
            pts.push(Complex64::from_polar(r, a));
        }
        k += 1;
    }
    pts.truncate(m);
    pts
}

pub fn build_truncation(theta: &InnerFunction, m: usize) -> Result<ModelTruncation> {
    build_truncation_with(theta, m, None, &ModelOptions::default())
}

fn resolve_basis(theta: &InnerFunction, opts: &ModelOptions) -> BasisChoice {
    match opts.basis {
        BasisChoice::Auto if theta.is_finite_blaschke() => BasisChoice::Monomial,
        BasisChoice::Auto if theta.boundary_phase().is_some() => BasisChoice::Clark,
        BasisChoice::Auto => BasisChoice::Kernels,
        other => other,
    }
}

fn use_monomials(theta: &InnerFunction, opts: &ModelOptions) -> bool {
    resolve_basis(theta, opts) == BasisChoice::Monomial
}

/// The `m` points of `{ζ : θ(ζ) = α}` with the smallest `|θ'(ζ)|`, returned
/// with `α` and the derivative at each point. `α` is the boundary value at the
/// middle of the widest gap between atoms (or at angle 0 without atoms).
pub fn clark_points(theta: &InnerFunction, m: usize) -> Result<(Complex64, Vec<(f64, f64)>)> {
    let bp = theta
        .boundary_phase()
        .ok_or_else(|| Error::InvalidArgument("Clark basis needs an atomic singular part".into()))?;
    let atoms = bp.atom_angles();
    // gaps (left, right) in increasing t; a single gap wraps around once
    let gaps: Vec<(f64, f64)> = if atoms.is_empty() {
        vec![(0.0, TAU)]
    } else {
        (0..atoms.len())
            .map(|k| {
                let l = atoms[k];
                let r = if k + 1 < atoms.len() { atoms[k + 1] } else { atoms[0] + TAU };
                (l, r)
            })
            .collect()
    };
    let widest = gaps.iter().copied().max_by(|a, b| (a.1 - a.0).total_cmp(&(b.1 - b.0))).expect("at least one gap");
    let t_ref = 0.5 * (widest.0 + widest.1);
    let phi0 = bp.phase(t_ref);
    let alpha = Complex64::from_polar(1.0, phi0);

    let solve = |lo: f64, hi: f64, y: f64| -> f64 {
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if bp.phase(mid) < y {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    };
    let mut found: Vec<(f64, f64)> = Vec::new();
    for &(l, r) in &gaps {
        if atoms.is_empty() {
            // Φ increases by 2π·(number of zeros) over the circle
            let (p_lo, p_hi) = (bp.phase(l), bp.phase(r));
            let k_lo = ((p_lo - phi0) / TAU).ceil() as i64;
            let k_hi = ((p_hi - phi0) / TAU).ceil() as i64;
            for k in k_lo..k_hi {
                let t = solve(l, r, phi0 + TAU * k as f64);
                found.push((t.rem_euclid(TAU), bp.derivative(t)));
            }
        } else {
            let mid = 0.5 * (l + r);
            let k_mid = ((bp.phase(mid) - phi0) / TAU).round() as i64;
            let spread = m as i64 + 8;
            for k in (k_mid - spread)..=(k_mid + spread) {
                let t = solve(l, r, phi0 + TAU * k as f64);
                if t > l && t < r {
                    found.push((t.rem_euclid(TAU), bp.derivative(t)));
                }
            }
        }
    }
    found.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)));
    if found.len() < m {
        return Err(Error::GramDegenerate { min_eigenvalue: 0.0, size: m });
    }
    found.truncate(m);
    Ok((alpha, found))
}

/// Truncation with `M` basis vectors. `degree` is the Taylor degree; the
/// monomial basis defaults to `M(1 + guard)`.
pub fn build_truncation_with(
    theta: &InnerFunction,
    m: usize,
    degree: Option<usize>,
    opts: &ModelOptions,
) -> Result<ModelTruncation> {
    if m == 0 {
        return Err(Error::InvalidArgument("M must be at least 1".into()));
    }
    if theta.is_constant() {
        return Err(Error::ConstantInner);
    }
    let choice = resolve_basis(theta, opts);
    if choice == BasisChoice::Clark {
        let t = theta.taylor_with(degree.unwrap_or(1).max(1), &opts.taylor)?;
        return clark_truncation(theta, m, t.coeffs, t.error_bound, opts);
    }
    if choice == BasisChoice::Monomial {
        let degree = degree.unwrap_or(m + opts.guard.max(1) * m);
        if degree < m + 1 {
            return Err(Error::InvalidArgument(format!("degree {degree} must exceed M = {m}")));
        }
        let t = theta.taylor_with(degree, &opts.taylor)?;
        monomial_truncation(m, t.coeffs, t.error_bound, opts)
    } else {
        let degree = degree.unwrap_or(1).max(1);
        let t = theta.taylor_with(degree, &opts.taylor)?;
        let pts = kernel_points(theta, m, opts.kernel_ratio);
        kernel_truncation(theta, pts, t.coeffs, t.error_bound, opts)
    }
}

fn monomial_truncation(m: usize, c: Vec<Complex64>, taylor_error: f64, opts: &ModelOptions) -> Result<ModelTruncation> {
    let degree = c.len() - 1;
    let big = m + 1;
    let g = CMat::from_fn(big, big, |i, j| q_coeff(&c, j, i));
    // symmetrize the round-off
    let g = (&g + g.adjoint()) * Complex64::new(0.5, 0.0);

    let basis = CMat::from_fn(degree + 1, m, |k, j| q_coeff(&c, j, k));
    let gm = g.view((0, 0), (m, m)).into_owned();
    let tail = (basis.adjoint() * &basis - &gm).iter().map(|x| x.norm()).fold(0.0, f64::max);
    // S q_j = q_{j+1}
    let shift = g.view((0, 1), (m, m)).into_owned();
    let b: Vec<Complex64> = (0..m).map(|i| c.get(i + 1).copied().unwrap_or(ZERO)).collect();
    finish(m, Basis::Monomial, c, taylor_error, gm, Some(tail), shift, b, opts)
}

fn clark_truncation(
    theta: &InnerFunction,
    m: usize,
    c: Vec<Complex64>,
    taylor_error: f64,
    opts: &ModelOptions,
) -> Result<ModelTruncation> {
    let (alpha, found) = clark_points(theta, m)?;
    let pts: Vec<Complex64> = found.iter().map(|&(t, _)| Complex64::from_polar(1.0, t)).collect();
    let norms: Vec<f64> = found.iter().map(|&(_, d)| d.sqrt()).collect();
    // ⟨Bθ, e_i⟩ = (α − θ(0)) / (ζ_i ‖k_{ζ_i}‖)
    let b: Vec<Complex64> = (0..m).map(|i| (alpha - c[0]) / pts[i] / norms[i]).collect();
    // ⟨S e_j, e_i⟩ = ζ_i δ_ij − α conj(α − θ(0)) ζ_j / (‖k_i‖ ‖k_j‖)
    let shift = CMat::from_fn(m, m, |i, j| {
        let diag = if i == j { pts[i] } else { ZERO };
        diag - alpha * (alpha - c[0]).conj() * pts[j] / (norms[i] * norms[j])
    });
    finish(m, Basis::Clark { alpha, points: pts }, c, taylor_error, CMat::identity(m, m), None, shift, b, opts)
}

/// Kernel truncation at caller-chosen points (distinct, inside the disk).
pub fn build_kernel_truncation(
    theta: &InnerFunction,
    points: Vec<Complex64>,
    opts: &ModelOptions,
) -> Result<ModelTruncation> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("need at least one kernel point".into()));
    }
    if let Some(z) = points.iter().find(|z| !(z.norm() < 1.0)) {
        return Err(Error::OutsideDisk { re: z.re, im: z.im });
    }
    if theta.is_constant() {
        return Err(Error::ConstantInner);
    }
    let t = theta.taylor_with(1, &opts.taylor)?;
    kernel_truncation(theta, points, t.coeffs, t.error_bound, opts)
}

fn kernel_truncation(
    theta: &InnerFunction,
    pts: Vec<Complex64>,
    c: Vec<Complex64>,
    taylor_error: f64,
    opts: &ModelOptions,
) -> Result<ModelTruncation> {
    let m = pts.len();
    let th: Vec<Complex64> = pts.iter().map(|&z| theta.evaluate(z)).collect::<Result<_>>()?;
    let b_theta: Vec<Complex64> =
        pts.iter().zip(&th).map(|(&z, &t)| if z.norm() == 0.0 { c[1] } else { (t - c[0]) / z }).collect();
    let kern = |j: usize, i: usize| (ONE - th[j].conj() * th[i]) / (ONE - pts[j].conj() * pts[i]);
    let norms: Vec<f64> = (0..m).map(|i| kern(i, i).re.sqrt()).collect();
    if let Some(i) = norms.iter().position(|n| !(*n > 0.0)) {
        return Err(Error::GramDegenerate { min_eigenvalue: 0.0, size: i + 1 });
    }
    let gram = CMat::from_fn(m, m, |i, j| kern(j, i) / (norms[i] * norms[j]));
    let gram = (&gram + gram.adjoint()) * Complex64::new(0.5, 0.0);
    // (S f)(λ) = λ f(λ) − ⟨f, Bθ⟩ θ(λ)
    let shift = CMat::from_fn(m, m, |i, j| (pts[i] * kern(j, i) - b_theta[j].conj() * th[i]) / (norms[i] * norms[j]));
    let b: Vec<Complex64> = (0..m).map(|i| b_theta[i] / norms[i]).collect();
    finish(m, Basis::Kernels(pts), c, taylor_error, gram, None, shift, b, opts)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    m: usize,
    basis: Basis,
    taylor: Vec<Complex64>,
    taylor_error: f64,
    gram: CMat,
    gram_tail: Option<f64>,
    shift_raw: CMat,
    defect_vector: Vec<Complex64>,
    opts: &ModelOptions,
) -> Result<ModelTruncation> {
    let eig = gram.clone().symmetric_eigen();
    let max_ev = eig.eigenvalues.max();
    let min_ev = eig.eigenvalues.min();
    if !(min_ev > opts.gram_threshold * max_ev.max(1e-300)) {
        return Err(Error::GramDegenerate { min_eigenvalue: min_ev, size: m });
    }
    let chol = gram.clone().cholesky().ok_or(Error::GramDegenerate { min_eigenvalue: min_ev, size: m })?;
    let mut out = ModelTruncation {
        m,
        basis,
        degree: taylor.len() - 1,
        taylor,
        taylor_error,
        gram,
        cholesky: chol.l(),
        min_gram_eigenvalue: min_ev,
        max_gram_eigenvalue: max_ev,
        gram_tail,
        shift_raw,
        defect_vector,
        shift_matrix: CMat::zeros(0, 0),
    };
    out.shift_matrix = out.to_orthonormal(&out.shift_raw);
    Ok(out)
}

/// Coefficients of `S_θ⁻¹ f = (f − (f(0)/θ(0)) θ)/z`.
fn inverse_shift(f: &[Complex64], c: &[Complex64]) -> Vec<Complex64> {
    let ratio = f[0] / c[0];
    (0..f.len().saturating_sub(1)).map(|k| f[k + 1] - ratio * c.get(k + 1).copied().unwrap_or(ZERO)).collect()
}

/// `⟨S_θ⁻ⁿ e_j, e_i⟩` for the truncation's basis.
fn inverse_power_entries(theta: &InnerFunction, tr: &ModelTruncation, n: usize) -> Result<CMat> {
    let c = &tr.taylor;
    let m = tr.m;
    match &tr.basis {
        Basis::Monomial => {
            // ⟨f, q_i⟩ = f_i for f ∈ K_θ
            let mut y = CMat::zeros(m, m);
            for j in 0..m {
                let mut f = q_vector(c, j, tr.degree + 1);
                for _ in 0..n {
                    f = inverse_shift(&f, c);
                }
                for i in 0..m {
                    y[(i, j)] = f[i];
                }
            }
            Ok(y)
        }
        Basis::Clark { alpha, points } => {
            let th = vec![*alpha; m];
            let bp = theta.boundary_phase().expect("Clark basis implies atomic part");
            let norms: Vec<f64> = points.iter().map(|z| bp.derivative(z.arg()).sqrt()).collect();
            let start = |j: usize, i: usize| if i == j { Complex64::new(norms[i] * norms[i], 0.0) } else { ZERO };
            Ok(kernel_inverse_power(points, &th, &norms, c, n, start))
        }
        Basis::Kernels(pts) => {
            let th: Vec<Complex64> = pts.iter().map(|&z| theta.evaluate(z)).collect::<Result<_>>()?;
            let kern = |j: usize, i: usize| (ONE - th[j].conj() * th[i]) / (ONE - pts[j].conj() * pts[i]);
            let norms: Vec<f64> = (0..m).map(|i| kern(i, i).re.sqrt()).collect();
            Ok(kernel_inverse_power(pts, &th, &norms, c, n, kern))
        }
    }
}

/// `⟨S_θ⁻ⁿ e_j, e_i⟩` for normalized kernels at `pts`, where `th` holds θ at the
/// points and `start(j, i) = k_{λ_j}(λ_i)`.
fn kernel_inverse_power(
    pts: &[Complex64],
    th: &[Complex64],
    norms: &[f64],
    c: &[Complex64],
    n: usize,
    start: impl Fn(usize, usize) -> Complex64,
) -> CMat {
    let m = pts.len();
    let mut y = CMat::zeros(m, m);
    for j in 0..m {
        // Taylor coefficients of k_{λ_j} through degree n carry the
        // values f(0) needed at each step; point values follow from
        // (S⁻¹f)(λ) = (f(λ) − (f(0)/θ(0)) θ(λ))/λ.
        let w = pts[j].conj();
        let mut coeffs: Vec<Complex64> = Vec::with_capacity(n + 1);
        let mut conv = ZERO;
        for l in 0..=n {
            conv = conv * w + c[l];
            coeffs.push(w.powu(l as u32) - th[j].conj() * conv);
        }
        let mut vals: Vec<Complex64> = (0..m).map(|i| start(j, i)).collect();
        for _ in 0..n {
            let ratio = coeffs[0] / c[0];
            coeffs = inverse_shift(&coeffs, c);
            for i in 0..m {
                vals[i] = if pts[i].norm() == 0.0 { coeffs[0] } else { (vals[i] - ratio * th[i]) / pts[i] };
            }
        }
        for i in 0..m {
            y[(i, j)] = vals[i] / (norms[i] * norms[j]);
        }
    }
    y
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceEntry {
    pub m: usize,
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub n: u32,
    pub delta_n: f64,
    /// `(1/δₙ − 1)/2`.
    pub lower: f64,
    /// Compression of `S_θ⁻ⁿ` at the largest `M`; a lower estimate of the norm.
    pub norm_estimate: f64,
    /// `‖(S_M)⁻ⁿ‖` from the inverted section at the largest `M`.
    pub section_inverse_norm: f64,
    pub relative_gap: f64,
    /// `log(2/δₙ)/δₙ²`.
    pub upper_shape: f64,
    pub fitted_constant: f64,
    pub trace: Vec<TraceEntry>,
    /// Whether the last doubling of `M` moved the estimate by less than 1%.
    pub stabilized: bool,
}

impl BoundReport {
    pub fn lower_bound_holds(&self, tol: f64) -> bool {
        self.norm_estimate >= self.lower - tol
    }
}

/// Both inverse-power routes for one truncation size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InverseNorms {
    pub compressed: f64,
    pub section: f64,
}

/// `‖P S_θ⁻ⁿ P‖` and `‖(P S_θ P)⁻ⁿ‖` for the `M`-dimensional span.
pub fn inverse_power_norms(theta: &InnerFunction, n: u32, m: usize, opts: &ModelOptions) -> Result<InverseNorms> {
    let c0 = theta.evaluate(Complex64::new(0.0, 0.0))?;
    if c0.norm() == 0.0 {
        return Err(Error::NotInvertible("θ(0) = 0, so S_θ is not invertible".into()));
    }
    let n_us = n as usize;
    let degree = if use_monomials(theta, opts) { (m + opts.guard.max(1) * m).max(m + n_us + 1) } else { n_us + 1 };
    let tr = build_truncation_with(theta, m, Some(degree), opts)?;

    // route (b): compression of the explicit inverse
    let y = inverse_power_entries(theta, &tr, n_us)?;
    let compressed = spectral_norm(&tr.to_orthonormal(&y));

    // route (a): invert the section
    let inv = tr
        .shift_matrix
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::NotInvertible("section of S_θ is singular".into()))?;
    let mut p = CMat::identity(m, m);
    for _ in 0..n {
        p = &p * &inv;
    }
    Ok(InverseNorms { compressed, section: spectral_norm(&p) })
}

/// `‖S_θ⁻ⁿ‖` over an increasing schedule of `M`, assembled with `δₙ`.
pub fn negpower_norm(
    theta: &InnerFunction,
    n: u32,
    schedule: &[usize],
    opts: &ModelOptions,
    delta_opts: &DeltaOptions,
) -> Result<BoundReport> {
    let delta = theta.delta_n(n, delta_opts)?.delta_n;
    negpower_norm_with_delta(theta, n, schedule, opts, delta)
}

pub fn negpower_norm_with_delta(
    theta: &InnerFunction,
    n: u32,
    schedule: &[usize],
    opts: &ModelOptions,
    delta: f64,
) -> Result<BoundReport> {
    if schedule.is_empty() {
        return Err(Error::InvalidArgument("empty M schedule".into()));
    }
    let mut sched = schedule.to_vec();
    sched.sort_unstable();
    sched.dedup();
    let exact_model = theta.is_finite_blaschke();
    let mut trace = Vec::with_capacity(sched.len());
    let mut last = None;
    for &m in &sched {
        let r = inverse_power_norms(theta, n, m, opts)?;
        let gap = (r.compressed - r.section).abs() / r.compressed.max(r.section);
        if exact_model && m == theta.zero_count() && gap > opts.agreement_tol {
            return Err(Error::MethodDisagreement { relative_gap: gap });
        }
        trace.push(TraceEntry { m, norm: r.compressed });
        last = Some(r);
    }
    let last = last.expect("nonempty schedule");
    let norm = last.compressed;
    let stabilized = match trace.len() {
        0 | 1 => exact_model && sched.last() == Some(&theta.zero_count()),
        k => (trace[k - 1].norm - trace[k - 2].norm).abs() <= 0.01 * trace[k - 1].norm,
    };
    let upper_shape = (2.0 / delta).ln() / (delta * delta);
    Ok(BoundReport {
        n,
        delta_n: delta,
        lower: 0.5 * (1.0 / delta - 1.0),
        norm_estimate: norm,
        section_inverse_norm: last.section,
        relative_gap: (last.compressed - last.section).abs() / last.compressed.max(last.section),
        upper_shape,
        fitted_constant: norm / upper_shape,
        trace,
        stabilized,
    })
}

/// Symbol `φ` of the functional calculus `φ(S_θ)`.
#[derive(Debug, Clone)]
pub enum Symbol {
    Polynomial(Vec<Complex64>),
    Inner(InnerFunction),
}

impl Symbol {
    fn coefficients(&self, degree: usize, opts: &TaylorOptions) -> Result<(Vec<Complex64>, f64)> {
        match self {
            Symbol::Polynomial(p) => Ok((p.clone(), 0.0)),
            Symbol::Inner(f) => {
                let t = f.taylor_with(degree, opts)?;
                Ok((t.coeffs, t.error_bound))
            }
        }
    }

    /// Upper bound for `‖φ‖_∞`: 1 for inner symbols, `Σ|p_k|` for polynomials.
    pub fn sup_bound(&self) -> f64 {
        match self {
            Symbol::Polynomial(p) => p.iter().map(|x| x.norm()).sum(),
            Symbol::Inner(_) => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SarasonReport {
    pub norm: f64,
    pub trace: Vec<(usize, f64)>,
    pub coefficient_error: f64,
}

/// `‖φ(S_θ)‖ = dist(conj(θ)φ, H^∞)`, estimated by the `K × K` Hankel matrix
/// of the negative Fourier coefficients of `conj(θ)φ`.
pub fn sarason_norm(theta: &InnerFunction, phi: &Symbol, k: usize) -> Result<SarasonReport> {
    sarason_norm_with(theta, phi, k, &TaylorOptions::default())
}

pub fn sarason_norm_with(theta: &InnerFunction, phi: &Symbol, k: usize, opts: &TaylorOptions) -> Result<SarasonReport> {
    if k == 0 {
        return Err(Error::InvalidArgument("K must be at least 1".into()));
    }
    let degree = 4 * k;
    let t = theta.taylor_with(degree, opts)?;
    let c = &t.coeffs;
    let (p, perr) = phi.coefficients(degree, opts)?;
    // γ_s = Σ_l p_l conj(c_{l+s}), s = 1..2K−1
    let gamma: Vec<Complex64> = (0..2 * k)
        .map(|s| p.iter().enumerate().filter(|(l, _)| l + s < c.len()).map(|(l, pl)| pl * c[l + s].conj()).sum())
        .collect();
    let mut trace = Vec::new();
    let mut size = 1;
    loop {
        let size_now = size.min(k);
        let h = CMat::from_fn(size_now, size_now, |i, j| gamma.get(i + j + 1).copied().unwrap_or(ZERO));
        trace.push((size_now, spectral_norm(&h)));
        if size_now == k {
            break;
        }
        size *= 2;
    }
    let norm = trace.last().expect("nonempty").1;
    Ok(SarasonReport { norm, trace, coefficient_error: t.error_bound + perr })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefectReport {
    /// Singular values of `I − A*A` for the section matrix `A`, decreasing.
    pub section: Vec<f64>,
    /// Singular values of the compression of `I − S_θ*S_θ` to the span.
    pub compressed: Vec<f64>,
}

impl DefectReport {
    pub fn section_ratio(&self) -> f64 {
        ratio_21(&self.section)
    }

    pub fn compressed_ratio(&self) -> f64 {
        ratio_21(&self.compressed)
    }
}

fn ratio_21(s: &[f64]) -> f64 {
    match s {
        [a, b, ..] if *a > 0.0 => b / a,
        _ => 0.0,
    }
}

pub fn defect_rank_check(tr: &ModelTruncation) -> DefectReport {
    let a = &tr.shift_matrix;
    let section = CMat::identity(tr.m, tr.m) - a.adjoint() * a;
    let b = CMat::from_column_slice(tr.m, 1, &tr.defect_vector);
    let compressed = tr.to_orthonormal(&(&b * b.adjoint()));
    DefectReport { section: singular_values(&section), compressed: singular_values(&compressed) }
}
