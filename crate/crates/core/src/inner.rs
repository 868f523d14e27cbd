//! Inner functions `θ = c · B · S_ν` built from finitely many Blaschke zeros
//! and a singular measure, with the minimum modulus `m_θ(r)`, the decay
//! sequence `δₙ(θ) = inf_{|z|<1} max{|z|ⁿ, |θ(z)|}` and Taylor coefficients.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{Arc, SingularMeasure, DEFAULT_HERGLOTZ_TOL};
use crate::numeric::{disk_minimize, periodic_max, DiskGrid};

/// `(π + 1)²`, the constant of the Poisson lower bound.
pub fn pi_plus_one_sq() -> f64 {
    (PI + 1.0) * (PI + 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlaschkeZero {
    pub zero: Complex64,
    pub multiplicity: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerFunction {
    zeros: Vec<BlaschkeZero>,
    singular: Option<SingularMeasure>,
    constant: Complex64,
    quad_tol: f64,
}

/// `(|a|/a)(a − z)/(1 − āz)`, or `z` when `a = 0`.
fn blaschke_factor(a: Complex64, z: Complex64) -> Result<Complex64> {
    if a.norm() == 0.0 {
        return Ok(z);
    }
    let den = Complex64::new(1.0, 0.0) - a.conj() * z;
    if den.norm() < 1e-15 {
        return Err(Error::Pole);
    }
    Ok((a.norm() / a) * (a - z) / den)
}

/// `log |b_a(z)|` without forming the product, so tiny moduli do not underflow.
fn log_abs_factor(a: Complex64, z: Complex64) -> f64 {
    if a.norm() == 0.0 {
        return z.norm().ln();
    }
    (a - z).norm().ln() - (Complex64::new(1.0, 0.0) - a.conj() * z).norm().ln()
}

impl InnerFunction {
    pub fn new(zeros: Vec<BlaschkeZero>, singular: Option<SingularMeasure>, constant: Complex64) -> Result<Self> {
        for z in &zeros {
            if !(z.zero.norm() < 1.0) {
                return Err(Error::InvalidArgument(format!("Blaschke zero {} is not inside the disk", z.zero)));
            }
            if z.multiplicity == 0 {
                return Err(Error::InvalidArgument("zero multiplicity must be positive".into()));
            }
        }
        if (constant.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("unimodular constant has modulus {}", constant.norm())));
        }
        Ok(InnerFunction { zeros, singular, constant, quad_tol: DEFAULT_HERGLOTZ_TOL })
    }

    pub fn singular(nu: SingularMeasure) -> Self {
        InnerFunction {
            zeros: Vec::new(),
            singular: Some(nu),
            constant: Complex64::new(1.0, 0.0),
            quad_tol: DEFAULT_HERGLOTZ_TOL,
        }
    }

    /// Finite Blaschke product with simple zeros and constant 1.
    pub fn blaschke(zeros: &[Complex64]) -> Result<Self> {
        Self::new(
            zeros.iter().map(|&zero| BlaschkeZero { zero, multiplicity: 1 }).collect(),
            None,
            Complex64::new(1.0, 0.0),
        )
    }

    pub fn with_quadrature_tol(mut self, tol: f64) -> Self {
        self.quad_tol = tol;
        self
    }

    pub fn zeros(&self) -> &[BlaschkeZero] {
        &self.zeros
    }

    pub fn singular_measure(&self) -> Option<&SingularMeasure> {
        self.singular.as_ref()
    }

    pub fn constant(&self) -> Complex64 {
        self.constant
    }

    pub fn is_constant(&self) -> bool {
        self.zeros.is_empty() && self.singular.is_none()
    }

    /// Total number of zeros counted with multiplicity.
    pub fn zero_count(&self) -> usize {
        self.zeros.iter().map(|z| z.multiplicity as usize).sum()
    }

    pub fn is_finite_blaschke(&self) -> bool {
        self.singular.is_none() && !self.zeros.is_empty()
    }

    /// `θ(z)` for `|z| ≠ 1`. Outside the disk the same closed forms give the
    /// reflection `θ(1/z̄) = 1/conj(θ(z))`.
    pub fn evaluate(&self, z: Complex64) -> Result<Complex64> {
        let modulus = z.norm();
        if !modulus.is_finite() || modulus == 1.0 {
            return Err(Error::OnCircle { modulus });
        }
        let mut value = self.constant;
        for bz in &self.zeros {
            let b = blaschke_factor(bz.zero, z)?;
            value *= b.powu(bz.multiplicity);
        }
        if let Some(nu) = &self.singular {
            let h = nu.herglotz_off_circle(z, self.quad_tol)?;
            value *= (-h.value).exp();
        }
        Ok(value)
    }

    /// `−log|θ(z)|` for `|z| < 1`.
    pub fn neg_log_modulus(&self, z: Complex64) -> Result<f64> {
        if !(z.norm() < 1.0) {
            return Err(Error::OutsideDisk { re: z.re, im: z.im });
        }
        let mut acc = 0.0;
        for bz in &self.zeros {
            acc -= bz.multiplicity as f64 * log_abs_factor(bz.zero, z);
        }
        if let Some(nu) = &self.singular {
            acc += nu.herglotz(z, self.quad_tol)?.value.re;
        }
        Ok(acc)
    }

    /// `m_θ(r) = min_{|z| = r} |θ(z)|`.
    pub fn min_modulus(&self, r: f64, opts: &MinModulusOptions) -> Result<MinModulus> {
        if !(r >= 0.0 && r < 1.0) {
            return Err(Error::InvalidArgument(format!("radius {r} outside [0, 1)")));
        }
        for bz in &self.zeros {
            if (bz.zero.norm() - r).abs() <= 1e-14 {
                return Err(Error::ZeroOnCircle { radius: r });
            }
        }
        if r == 0.0 {
            let v = self.neg_log_modulus(Complex64::new(0.0, 0.0))?;
            return Ok(MinModulus { value: (-v).exp(), neg_log: v, angle: 0.0 });
        }
        let failure: RefCell<Option<Error>> = RefCell::new(None);
        let f = |t: f64| match self.neg_log_modulus(Complex64::from_polar(r, t)) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NEG_INFINITY
            }
        };
        let mut seeds: Vec<f64> = self.zeros.iter().map(|z| z.zero.arg()).collect();
        if let Some(SingularMeasure::Atomic(a)) = &self.singular {
            seeds.extend(a.atoms().iter().map(|at| at.angle));
        }
        let grid = opts.effective_grid(r);
        let (angle, neg_log) = periodic_max(&f, grid, opts.refine_rounds, &seeds, opts.keep);
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        Ok(MinModulus { value: (-neg_log).exp(), neg_log, angle })
    }

    /// `δₙ(θ)`. Zero-free θ: bisection on the crossing `m_θ(r) = rⁿ`.
    /// Otherwise: grid search over the disk seeded with the zeros.
    pub fn delta_n(&self, n: u32, opts: &DeltaOptions) -> Result<DecayRecord> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        if self.is_constant() {
            return Err(Error::ConstantInner);
        }
        if self.zeros.is_empty() {
            self.delta_by_crossing(n, opts)
        } else {
            self.delta_by_disk_search(n, opts)
        }
    }

    fn delta_by_crossing(&self, n: u32, opts: &DeltaOptions) -> Result<DecayRecord> {
        let nf = n as f64;
        // g(r) >= 0  <=>  m_θ(r) >= rⁿ
        let g = |r: f64| -> Result<f64> {
            let m = self.min_modulus(r, &opts.modulus)?;
            Ok(-m.neg_log - nf * r.ln())
        };
        let mut lo = 0.0;
        let mut hi = 1.0 - 1e-12;
        if g(hi)? >= 0.0 {
            return Err(Error::InvalidArgument("m_θ(r) does not fall below rⁿ before r = 1 − 1e-12".into()));
        }
        while hi - lo > opts.bracket {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if g(mid)? >= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let r = 0.5 * (lo + hi);
        Ok(DecayRecord {
            n,
            delta_n: r.powf(nf),
            crossing_radius: r,
            bracket_width: hi - lo,
            bracket: (lo, hi),
            argmin: None,
        })
    }

    fn delta_by_disk_search(&self, n: u32, opts: &DeltaOptions) -> Result<DecayRecord> {
        let nf = n as f64;
        let failure: RefCell<Option<Error>> = RefCell::new(None);
        let f = |z: Complex64| -> f64 {
            let size = nf * z.norm().ln();
            match self.neg_log_modulus(z) {
                Ok(v) => size.max(-v),
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    f64::INFINITY
                }
            }
        };
        let seeds: Vec<Complex64> = self.zeros.iter().map(|z| z.zero).collect();
        let found = disk_minimize(&f, &seeds, &opts.disk);
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        let r = found.point.norm();
        Ok(DecayRecord {
            n,
            delta_n: found.value.exp(),
            crossing_radius: r,
            bracket_width: found.step,
            bracket: (r - found.step, r + found.step),
            argmin: Some(found.point),
        })
    }

    /// Taylor coefficients `c₀..c_D` from samples on `|z| = ρ` and an FFT.
    pub fn taylor(&self, degree: usize) -> Result<Taylor> {
        self.taylor_with(degree, &TaylorOptions::default())
    }

    pub fn taylor_with(&self, degree: usize, opts: &TaylorOptions) -> Result<Taylor> {
        let target = 16 * (degree + 1);
        let samples = target.max(4 * degree.max(1)).next_power_of_two();
        if samples > opts.max_samples {
            return Err(Error::TaylorPrecision { degree, bound: f64::INFINITY });
        }
        let sample_err = 8.0 * f64::EPSILON + if self.singular.is_some() { self.quad_tol } else { 0.0 };
        let bound_at = |rho: f64| -> f64 {
            let d = degree as f64;
            let n = samples as f64;
            sample_err * rho.powf(-d) + rho.powf(n - d) / (1.0 - rho.powf(n))
        };
        // ρ = exp(−x/D): balance roundoff growth ρ^{−D} against aliasing ρ^{N−D}
        let rho = if degree == 0 {
            opts.default_radius
        } else {
            let (x, _) = crate::numeric::golden_max(
                |x| -bound_at((-x / degree as f64).exp()),
                1e-3,
                degree as f64 * (1.0f64 / 0.5).ln(),
                1e-9,
            );
            let candidate = (-x / degree as f64).exp();
            if bound_at(opts.default_radius) <= bound_at(candidate) {
                opts.default_radius
            } else {
                candidate
            }
        };
        let bound = bound_at(rho);
        if !(bound <= opts.max_error) {
            return Err(Error::TaylorPrecision { degree, bound });
        }
        let mut buf = Vec::with_capacity(samples);
        for k in 0..samples {
            let z = Complex64::from_polar(rho, 2.0 * PI * k as f64 / samples as f64);
            buf.push(self.evaluate(z)?);
        }
        let mut planner = FftPlanner::<f64>::new();
        planner.plan_fft_forward(samples).process(&mut buf);
        let scale = 1.0 / samples as f64;
        let mut coeffs = Vec::with_capacity(degree + 1);
        let mut rho_pow = 1.0;
        for m in 0..=degree {
            coeffs.push(buf[m] * scale / rho_pow);
            rho_pow *= rho;
        }
        Ok(Taylor { coeffs, radius: rho, samples, error_bound: bound })
    }

    /// Boundary phase, available when the singular part is atomic (or absent).
    pub fn boundary_phase(&self) -> Option<BoundaryPhase> {
        let mut atoms: Vec<(f64, f64)> = match &self.singular {
            None => Vec::new(),
            Some(SingularMeasure::Atomic(a)) => a.atoms().iter().map(|at| (at.angle, at.weight)).collect(),
            Some(_) => return None,
        };
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        Some(BoundaryPhase { zeros: self.zeros.clone(), atoms, constant_arg: self.constant.arg() })
    }

    /// Same θ with its singular measure scaled by `factor`.
    pub fn with_scaled_measure(&self, factor: f64) -> Result<Self> {
        let mut out = self.clone();
        out.singular = match &self.singular {
            Some(nu) => Some(nu.scaled(factor)?),
            None => None,
        };
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinModulusOptions {
    pub grid: usize,
    pub refine_rounds: usize,
    pub keep: usize,
    pub max_grid: usize,
}

impl Default for MinModulusOptions {
    fn default() -> Self {
        MinModulusOptions { grid: 4096, refine_rounds: 3, keep: 4, max_grid: 1 << 18 }
    }
}

impl MinModulusOptions {
    /// Poisson spikes have angular width about `1 − r`.
    fn effective_grid(&self, r: f64) -> usize {
        let need = (16.0 / (1.0 - r)).ceil();
        let need = if need.is_finite() { need as usize } else { self.max_grid };
        self.grid.max(need.min(self.max_grid))
    }

    pub fn doubled(self) -> Self {
        MinModulusOptions { grid: self.grid * 2, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinModulus {
    pub value: f64,
    /// `−log m_θ(r)`, kept separately because `value` underflows near `r = 1`.
    pub neg_log: f64,
    pub angle: f64,
}

/// Continuous argument of boundary values `θ(e^{it})` for θ whose singular
/// part is atomic; defined away from the atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryPhase {
    zeros: Vec<BlaschkeZero>,
    atoms: Vec<(f64, f64)>,
    constant_arg: f64,
}

impl BoundaryPhase {
    /// Atom angles in increasing order.
    pub fn atom_angles(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.0).collect()
    }

    /// Argument of `θ(e^{it})`, continuous on every arc between atoms and
    /// strictly increasing there.
    pub fn phase(&self, t: f64) -> f64 {
        let mut p = self.constant_arg;
        let e = Complex64::from_polar(1.0, t);
        for z in &self.zeros {
            let a = z.zero;
            let one = if a.norm() == 0.0 {
                t
            } else {
                let w = Complex64::new(1.0, 0.0) - a.conj() * e;
                (a.norm() / a).arg() + PI + t - 2.0 * w.im.atan2(w.re)
            };
            p += z.multiplicity as f64 * one;
        }
        for &(angle, weight) in &self.atoms {
            p -= weight / ((t - angle) / 2.0).tan();
        }
        p
    }

    /// `|θ'(e^{it})|`, the derivative of the phase.
    pub fn derivative(&self, t: f64) -> f64 {
        let e = Complex64::from_polar(1.0, t);
        let mut d = 0.0;
        for z in &self.zeros {
            d += z.multiplicity as f64 * (1.0 - z.zero.norm_sqr()) / (e - z.zero).norm_sqr();
        }
        for &(angle, weight) in &self.atoms {
            let s = ((t - angle) / 2.0).sin();
            d += weight / (2.0 * s * s);
        }
        d
    }
}

#[derive(Debug, Clone, Copy)]
pub struct DeltaOptions {
    pub modulus: MinModulusOptions,
    /// Target bracket width in `r` for the crossing bisection.
    pub bracket: f64,
    pub disk: DiskGrid,
}

impl Default for DeltaOptions {
    fn default() -> Self {
        DeltaOptions { modulus: MinModulusOptions::default(), bracket: 1e-12, disk: DiskGrid::default() }
    }
}

impl DeltaOptions {
    pub fn doubled(self) -> Self {
        DeltaOptions { modulus: self.modulus.doubled(), disk: self.disk.doubled(), ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayRecord {
    pub n: u32,
    pub delta_n: f64,
    pub crossing_radius: f64,
    pub bracket_width: f64,
    /// Final bracket `[lo, hi]` with `m_θ(lo) ≥ loⁿ` and `m_θ(hi) < hiⁿ`.
    pub bracket: (f64, f64),
    /// Minimizer found by the disk search, when one was used.
    pub argmin: Option<Complex64>,
}

#[derive(Debug, Clone, Copy)]
pub struct TaylorOptions {
    pub default_radius: f64,
    pub max_error: f64,
    pub max_samples: usize,
}

impl Default for TaylorOptions {
    fn default() -> Self {
        TaylorOptions { default_radius: 0.8, max_error: 1e-6, max_samples: 1 << 20 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Taylor {
    pub coeffs: Vec<Complex64>,
    pub radius: f64,
    pub samples: usize,
    /// Bound on `|ĉ_m − c_m|` for every returned coefficient.
    pub error_bound: f64,
}

impl Taylor {
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Both sides of the Poisson lower bound
/// `−log m_θ(1−η) ≥ (π+1)⁻² sup_{|I|=η} ν(I)/|I|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapReport {
    pub eta: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub window: Arc,
}

impl GapReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.lhs >= self.rhs - tol
    }
}

pub fn innerest_gap(nu: &SingularMeasure, eta: f64, opts: &MinModulusOptions) -> Result<GapReport> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidArgument(format!("η = {eta} outside (0, 1]")));
    }
    let theta = InnerFunction::singular(nu.clone());
    let lhs = theta.min_modulus(1.0 - eta, opts)?.neg_log;
    let sup = nu.sup_arc_ratio(eta)?;
    Ok(GapReport { eta, lhs, rhs: sup.ratio / pi_plus_one_sq(), window: sup.window })
}

#[derive(Debug, Clone, Deserialize)]
struct InnerDescriptor {
    #[serde(default)]
    blaschke: Vec<Vec<f64>>,
    singular: Option<serde_json::Value>,
    constant: Option<(f64, f64)>,
}

impl InnerFunction {
    /// `{"blaschke":[[re,im,mult],...], "singular": <measure>, "constant":[re,im]}`
    pub fn from_json_str(s: &str) -> Result<Self> {
        let d: InnerDescriptor = serde_json::from_str(s)?;
        let zeros = d
            .blaschke
            .iter()
            .enumerate()
            .map(|(k, z)| {
                let multiplicity = match z.get(2) {
                    None => 1,
                    Some(&m) if m >= 1.0 && m.fract() == 0.0 && m <= u32::MAX as f64 => m as u32,
                    Some(m) => {
                        return Err(Error::Parse(format!("blaschke[{k}]: multiplicity {m} is not a positive integer")))
                    }
                };
                match z.as_slice() {
                    [re, im] | [re, im, _] => Ok(BlaschkeZero { zero: Complex64::new(*re, *im), multiplicity }),
                    _ => Err(Error::Parse(format!("blaschke[{k}]: expected [re, im] or [re, im, multiplicity]"))),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let singular = match &d.singular {
            Some(v) => Some(SingularMeasure::from_json_value(v)?),
            None => None,
        };
        let constant = d.constant.map(|(re, im)| Complex64::new(re, im)).unwrap_or(Complex64::new(1.0, 0.0));
        Self::new(zeros, singular, constant)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn atom(s: f64) -> InnerFunction {
        InnerFunction::singular(SingularMeasure::atom(0.0, s).unwrap())
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn atom_value_at_origin() {
        let v = atom(1.0).evaluate(c(0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(v.re, (-1.0f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn atom_value_negative_half() {
        let v = atom(1.0).evaluate(c(-0.5, 0.0)).unwrap();
        assert_abs_diff_eq!(v.re, (-1.0f64 / 3.0).exp(), epsilon = 1e-15);
    }

    #[test]
    fn blaschke_reflection_example() {
        let th = InnerFunction::blaschke(&[c(0.5, 0.0)]).unwrap();
        let out = th.evaluate(c(-2.0, 0.0)).unwrap();
        assert_abs_diff_eq!(out.re, 1.25, epsilon = 1e-15);
        let inside = th.evaluate(c(-0.5, 0.0)).unwrap();
        let refl = 1.0 / inside.conj();
        assert_abs_diff_eq!(refl.re, 1.25, epsilon = 1e-15);
    }

    #[test]
    fn boundary_and_pole_rejected() {
        let th = InnerFunction::blaschke(&[c(0.5, 0.0)]).unwrap();
        assert!(matches!(th.evaluate(c(1.0, 0.0)), Err(Error::OnCircle { .. })));
        assert!(matches!(th.evaluate(c(2.0, 0.0)), Err(Error::Pole)));
    }

    #[test]
    fn min_modulus_single_atom_closed_form() {
        let th = atom(1.0);
        let m = th.min_modulus(0.5, &MinModulusOptions::default()).unwrap();
        assert_abs_diff_eq!(m.value, (-3.0f64).exp(), epsilon = 1e-15);
        assert!(m.angle.abs() < 1e-12 || (m.angle - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn min_modulus_two_symmetric_atoms() {
        let th = InnerFunction::singular(SingularMeasure::atomic([(0.0, 0.5), (PI, 0.5)]).unwrap());
        let m = th.min_modulus(0.5, &MinModulusOptions::default()).unwrap();
        assert_abs_diff_eq!(m.value, (-5.0f64 / 3.0).exp(), epsilon = 1e-13);
    }

    #[test]
    fn min_modulus_zero_on_circle() {
        let th = InnerFunction::blaschke(&[c(0.0, 0.5)]).unwrap();
        assert!(matches!(th.min_modulus(0.5, &MinModulusOptions::default()), Err(Error::ZeroOnCircle { .. })));
    }

    #[test]
    fn delta_single_atom_n1() {
        // oracle: plain bisection on r = exp(−(1+r)/(1−r))
        let (mut lo, mut hi) = (0.0f64, 0.999f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (-(1.0 + mid) / (1.0 - mid)).exp() >= mid {
                lo = mid
            } else {
                hi = mid
            }
        }
        let d = atom(1.0).delta_n(1, &DeltaOptions::default()).unwrap();
        assert_abs_diff_eq!(d.delta_n, lo, epsilon = 1e-10);
        assert_abs_diff_eq!(d.delta_n, 0.2136, epsilon = 1e-3);
        assert!(d.bracket_width <= 1e-10);
    }

    #[test]
    fn delta_blaschke_at_most_zero_power() {
        let th = InnerFunction::blaschke(&[c(0.5, 0.0)]).unwrap();
        let d = th.delta_n(3, &DeltaOptions::default()).unwrap();
        assert!(d.delta_n <= 0.125 + 1e-15);
        assert!(d.delta_n > 0.0);
    }

    #[test]
    fn delta_rejects_bad_input() {
        assert!(matches!(atom(1.0).delta_n(0, &DeltaOptions::default()), Err(Error::InvalidArgument(_))));
        let k = InnerFunction::new(vec![], None, c(1.0, 0.0)).unwrap();
        assert!(matches!(k.delta_n(1, &DeltaOptions::default()), Err(Error::ConstantInner)));
    }

    #[test]
    fn delta_decreases_for_atom() {
        let th = atom(1.0);
        let mut prev = 1.0;
        for n in [1, 2, 5, 10, 40] {
            let d = th.delta_n(n, &DeltaOptions::default()).unwrap().delta_n;
            assert!(d < prev);
            prev = d;
        }
        assert!(prev < 1e-3);
    }

    #[test]
    fn taylor_single_atom() {
        let t = atom(1.0).taylor(16).unwrap();
        let e = (-1.0f64).exp();
        assert_abs_diff_eq!(t.coeffs[0].re, e, epsilon = 1e-12);
        assert_abs_diff_eq!(t.coeffs[1].re, -2.0 * e, epsilon = 1e-12);
        assert!(t.energy() <= 1.0 + 1e-12);
    }

    #[test]
    fn taylor_blaschke_geometric() {
        let t = InnerFunction::blaschke(&[c(0.5, 0.0)]).unwrap().taylor(8).unwrap();
        assert_abs_diff_eq!(t.coeffs[0].re, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(t.coeffs[1].re, -0.75, epsilon = 1e-14);
        assert_abs_diff_eq!(t.coeffs[2].re, -0.375, epsilon = 1e-14);
    }

    #[test]
    fn taylor_too_large_fails() {
        let opts = TaylorOptions { max_samples: 1024, ..TaylorOptions::default() };
        assert!(matches!(atom(1.0).taylor_with(500, &opts), Err(Error::TaylorPrecision { .. })));
    }

    #[test]
    fn gap_closed_forms() {
        let s = 0.7;
        let nu = SingularMeasure::atom(0.0, s).unwrap();
        let g = innerest_gap(&nu, 0.1, &MinModulusOptions::default()).unwrap();
        assert_abs_diff_eq!(g.lhs, 19.0 * s, epsilon = 1e-9);
        assert_abs_diff_eq!(g.rhs, 10.0 * s / pi_plus_one_sq(), epsilon = 1e-9);
        let g = innerest_gap(&SingularMeasure::atom(0.0, 1.0).unwrap(), 1.0, &MinModulusOptions::default()).unwrap();
        assert_abs_diff_eq!(g.lhs, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.rhs, 1.0 / pi_plus_one_sq(), epsilon = 1e-15);
        assert!(innerest_gap(&nu, 0.0, &MinModulusOptions::default()).is_err());
    }

    #[test]
    fn descriptor_parses() {
        let th = InnerFunction::from_json_str(
            r#"{"blaschke":[[0.5,0.0,2]],"singular":{"type":"atomic","atoms":[[0,1]]},"constant":[0,1]}"#,
        )
        .unwrap();
        assert_eq!(th.zero_count(), 2);
        assert!(th.singular_measure().is_some());
        assert!(InnerFunction::from_json_str(r#"{"blaschke":[[1.5,0.0]]}"#).is_err());
    }

    #[test]
    fn boundary_phase_matches_radial_limit() {
        let theta = InnerFunction::new(
            vec![BlaschkeZero { zero: Complex64::new(0.3, -0.4), multiplicity: 2 }],
            Some(SingularMeasure::atomic([(0.5, 1.0), (3.0, 0.25)]).unwrap()),
            Complex64::from_polar(1.0, 0.7),
        )
        .unwrap();
        let bp = theta.boundary_phase().unwrap();
        for t in [1.0, 2.0, 4.0, 5.5] {
            let v = theta.evaluate(Complex64::from_polar(1.0 - 1e-9, t)).unwrap();
            let p = Complex64::from_polar(1.0, bp.phase(t));
            assert!((v - p).norm() < 1e-6, "t={t}");
            let h = 1e-6;
            let fd = (bp.phase(t + h) - bp.phase(t - h)) / (2.0 * h);
            assert!((fd - bp.derivative(t)).abs() < 1e-5 * fd.abs());
        }
        assert!(InnerFunction::singular(SingularMeasure::cantor(1.0, 1.0 / 3.0).unwrap()).boundary_phase().is_none());
    }
}
