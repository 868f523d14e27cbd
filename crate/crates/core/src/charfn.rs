//! Characteristic functions of matrix contractions, their defect data, and the
//! decay quantity `δₙ(Θ) = inf_λ max{|λ|ⁿ, σ_min(Θ(λ))}`.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::inner::{InnerFunction, MinModulusOptions};
use crate::numeric::{golden_max, singular_values, spectral_norm};

pub type CMat = DMatrix<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Square matrix with operator norm at most `1 + tol`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixContraction {
    t: CMat,
    norm: f64,
    min_singular: f64,
    spectral_radius: f64,
}

pub const CONTRACTION_TOL: f64 = 1e-12;

impl MatrixContraction {
    pub fn new(t: CMat) -> Result<Self> {
        if t.nrows() != t.ncols() || t.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "need a nonempty square matrix, got {}x{}",
                t.nrows(),
                t.ncols()
            )));
        }
        if t.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
        }
        let sv = singular_values(&t);
        let norm = sv[0];
        if norm > 1.0 + CONTRACTION_TOL {
            return Err(Error::NotContraction { norm });
        }
        let spectral_radius = eigenvalues(&t).iter().map(|z| z.norm()).fold(0.0, f64::max);
        Ok(MatrixContraction { norm, min_singular: *sv.last().expect("nonempty"), spectral_radius, t })
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidArgument("rows must all have length equal to the row count".into()));
        }
        Self::new(CMat::from_fn(d, d, |i, j| rows[i][j]))
    }

    /// Rows of interleaved real/imaginary parts: `re00,im00,re01,im01,…`.
    /// Blank lines and lines starting with `#` are skipped.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows: Vec<Vec<Complex64>> = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut vals = Vec::new();
            for (col, field) in line.split(',').enumerate() {
                let v: f64 = field.trim().parse().map_err(|_| {
                    Error::Parse(format!("line {} column {}: not a number: {:?}", ln + 1, col + 1, field.trim()))
                })?;
                vals.push(v);
            }
            if vals.len() % 2 != 0 {
                return Err(Error::Parse(format!(
                    "line {}: odd number of fields; expected interleaved real/imaginary pairs",
                    ln + 1
                )));
            }
            rows.push(vals.chunks(2).map(|p| c(p[0], p[1])).collect());
        }
        if rows.is_empty() {
            return Err(Error::Parse("empty matrix".into()));
        }
        let d = rows.len();
        if let Some(i) = rows.iter().position(|r| r.len() != d) {
            return Err(Error::Parse(format!(
                "row {} has {} entries; a {d}x{d} matrix needs {d}",
                i + 1,
                rows[i].len()
            )));
        }
        Self::from_rows(&rows)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.dim() {
            let row: Vec<String> = (0..self.dim())
                .flat_map(|j| {
                    let z = self.t[(i, j)];
                    [format!("{:e}", z.re), format!("{:e}", z.im)]
                })
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn matrix(&self) -> &CMat {
        &self.t
    }

    pub fn dim(&self) -> usize {
        self.t.nrows()
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn spectral_radius(&self) -> f64 {
        self.spectral_radius
    }

    pub fn min_singular_value(&self) -> f64 {
        self.min_singular
    }

    pub fn is_invertible(&self) -> bool {
        self.min_singular > 1e-10
    }

    pub fn is_strict_spectral(&self) -> bool {
        self.spectral_radius < 1.0 - 1e-12
    }

    pub fn is_unitary(&self) -> bool {
        let d = self.dim();
        let r = CMat::identity(d, d) - self.t.adjoint() * &self.t;
        spectral_norm(&r) < 1e-10
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        eigenvalues(&self.t)
    }

    /// `‖T⁻ⁿ‖`.
    pub fn inverse_power_norm(&self, n: u32) -> Result<f64> {
        let inv = self
            .t
            .clone()
            .try_inverse()
            .filter(|_| self.is_invertible())
            .ok_or_else(|| Error::NotInvertible(format!("smallest singular value {:e}", self.min_singular)))?;
        let mut p = CMat::identity(self.dim(), self.dim());
        for _ in 0..n {
            p = &p * &inv;
        }
        Ok(spectral_norm(&p))
    }
}

fn eigenvalues(m: &CMat) -> Vec<Complex64> {
    let mut ev: Vec<Complex64> =
        m.clone().schur().eigenvalues().expect("complex Schur form is triangular").iter().copied().collect();
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    ev
}

#[derive(Debug, Clone, Copy)]
pub struct DefectOptions {
    /// Eigenvalues of `I − T*T` above `rank_tol · max(‖T‖, 1)` count toward the rank.
    pub rank_tol: f64,
    /// Negative eigenvalues down to `−clamp` are treated as round-off.
    pub clamp: f64,
}

impl Default for DefectOptions {
    fn default() -> Self {
        DefectOptions { rank_tol: 1e-10, clamp: 1e-12 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DefectData {
    pub d_t: CMat,
    pub d_tstar: CMat,
    pub rank_t: usize,
    pub rank_tstar: usize,
    /// Orthonormal columns spanning the range of `D_T`.
    pub basis_t: CMat,
    pub basis_tstar: CMat,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DefectResiduals {
    /// `‖D_T² − (I − T*T)‖`.
    pub square_t: f64,
    pub square_tstar: f64,
    /// `‖T D_T − D_{T*} T‖`.
    pub intertwining: f64,
}

pub fn defects(t: &MatrixContraction) -> Result<DefectData> {
    defects_with(t, &DefectOptions::default())
}

/// Both defect operators from one SVD `T = W S V*`:
/// `D_T = V √(1 − S²) V*` and `D_{T*} = W √(1 − S²) W*`.
pub fn defects_with(t: &MatrixContraction, opts: &DefectOptions) -> Result<DefectData> {
    let d = t.dim();
    let svd = t.matrix().clone().svd(true, true);
    let w = svd.u.expect("requested U");
    let v = svd.v_t.expect("requested V*").adjoint();
    let tol = opts.rank_tol * t.norm().max(1.0);
    let mut roots = Vec::with_capacity(d);
    let mut keep = Vec::new();
    for k in 0..d {
        let s = svd.singular_values[k];
        // (1 − s)(1 + s) keeps precision when s is close to 1
        let gap = (1.0 - s) * (1.0 + s);
        if gap < -opts.clamp {
            return Err(Error::NotContraction { norm: s });
        }
        let gap = gap.max(0.0);
        roots.push(c(gap.sqrt(), 0.0));
        if gap > tol {
            keep.push(k);
        }
    }
    let root = CMat::from_diagonal(&nalgebra::DVector::from_vec(roots));
    let pick = |m: &CMat| {
        let mut b = CMat::from_fn(d, keep.len(), |i, j| m[(i, keep[j])]);
        for mut col in b.column_iter_mut() {
            // SVD phases are arbitrary; make the leading entry real positive
            let big = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if let Some(&lead) = col.iter().find(|z| z.norm() >= big * (1.0 - 1e-8)) {
                col *= lead.conj() / lead.norm();
            }
        }
        b
    };
    Ok(DefectData {
        d_t: &v * &root * v.adjoint(),
        d_tstar: &w * &root * w.adjoint(),
        rank_t: keep.len(),
        rank_tstar: keep.len(),
        basis_t: pick(&v),
        basis_tstar: pick(&w),
    })
}

impl DefectData {
    pub fn residuals(&self, t: &MatrixContraction) -> DefectResiduals {
        let m = t.matrix();
        let d = t.dim();
        let id = CMat::identity(d, d);
        DefectResiduals {
            square_t: spectral_norm(&(&self.d_t * &self.d_t - (&id - m.adjoint() * m))),
            square_tstar: spectral_norm(&(&self.d_tstar * &self.d_tstar - (&id - m * m.adjoint()))),
            intertwining: spectral_norm(&(m * &self.d_t - &self.d_tstar * m)),
        }
    }
}

/// Matrix-valued holomorphic function on the disk with the quantities needed
/// for `δₙ` and the determinant reduction.
pub trait MatrixFunction {
    /// Rows and columns of the values.
    fn shape(&self) -> (usize, usize);

    fn eval(&self, lambda: Complex64) -> Result<CMat>;

    /// `log σ_min(Θ(λ))`.
    fn log_smin(&self, lambda: Complex64) -> Result<f64> {
        let s = singular_values(&self.eval(lambda)?);
        Ok(s.last().copied().unwrap_or(0.0).ln())
    }

    /// `log |det Θ(λ)|^{1/N}` for square values.
    fn log_det_root(&self, lambda: Complex64) -> Result<f64> {
        let s = singular_values(&self.eval(lambda)?);
        Ok(s.iter().map(|x| x.ln()).sum::<f64>() / s.len() as f64)
    }

    /// Points where `Θ(λ)` is known to be singular.
    fn zeros(&self) -> Vec<Complex64> {
        Vec::new()
    }

    /// Angles where circle minima of `σ_min` tend to sit.
    fn angle_seeds(&self) -> Vec<f64> {
        Vec::new()
    }

    /// `(angle, log min_{|λ|=r} σ_min(Θ(λ)))` when a closed route exists.
    fn exact_circle_min(&self, _r: f64) -> Option<(f64, f64)> {
        None
    }
}

#[derive(Debug, Clone)]
pub struct CharacteristicFunction {
    t: MatrixContraction,
    defects: DefectData,
}

impl CharacteristicFunction {
    pub fn new(t: MatrixContraction) -> Result<Self> {
        Self::with_options(t, &DefectOptions::default())
    }

    pub fn with_options(t: MatrixContraction, opts: &DefectOptions) -> Result<Self> {
        let defects = defects_with(&t, opts)?;
        if defects.rank_t == 0 || defects.rank_tstar == 0 {
            return Err(Error::DegenerateDefect("T is unitary; both defect spaces are zero".into()));
        }
        Ok(CharacteristicFunction { t, defects })
    }

    pub fn contraction(&self) -> &MatrixContraction {
        &self.t
    }

    pub fn defects(&self) -> &DefectData {
        &self.defects
    }

    /// `Θ_T(0) = −B_{T*}* T B_T`.
    pub fn at_zero(&self) -> CMat {
        -(self.defects.basis_tstar.adjoint() * self.t.matrix() * &self.defects.basis_t)
    }

    /// `B_{T*}* (−T + λ D_{T*} (I − λT*)⁻¹ D_T) B_T`.
    pub fn theta_eval(&self, lambda: Complex64) -> Result<CMat> {
        let m = self.t.matrix();
        let d = self.t.dim();
        let resolvent = CMat::identity(d, d) - m.adjoint() * lambda;
        let lu = resolvent.lu();
        let x = lu
            .solve(&(&self.defects.d_t * &self.defects.basis_t))
            .filter(|x| x.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
            .ok_or(Error::Resolvent { re: lambda.re, im: lambda.im })?;
        let inner = -(m * &self.defects.basis_t) + &self.defects.d_tstar * x * lambda;
        Ok(self.defects.basis_tstar.adjoint() * inner)
    }
}

impl MatrixFunction for CharacteristicFunction {
    fn shape(&self) -> (usize, usize) {
        (self.defects.rank_tstar, self.defects.rank_t)
    }

    fn eval(&self, lambda: Complex64) -> Result<CMat> {
        self.theta_eval(lambda)
    }

    fn zeros(&self) -> Vec<Complex64> {
        self.t.eigenvalues().into_iter().filter(|z| z.norm() < 1.0).collect()
    }
}

/// `diag(θ_1, …, θ_N)` with scalar inner entries.
#[derive(Debug, Clone)]
pub struct DiagonalInner {
    entries: Vec<InnerFunction>,
    modulus_opts: MinModulusOptions,
}

impl DiagonalInner {
    pub fn new(entries: Vec<InnerFunction>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidArgument("need at least one diagonal entry".into()));
        }
        Ok(DiagonalInner { entries, modulus_opts: MinModulusOptions::default() })
    }

    pub fn entries(&self) -> &[InnerFunction] {
        &self.entries
    }
}

impl MatrixFunction for DiagonalInner {
    fn shape(&self) -> (usize, usize) {
        (self.entries.len(), self.entries.len())
    }

    fn eval(&self, lambda: Complex64) -> Result<CMat> {
        let vals: Vec<Complex64> = self.entries.iter().map(|f| f.evaluate(lambda)).collect::<Result<_>>()?;
        Ok(CMat::from_diagonal(&nalgebra::DVector::from_vec(vals)))
    }

    fn log_smin(&self, lambda: Complex64) -> Result<f64> {
        let mut worst = f64::NEG_INFINITY;
        for f in &self.entries {
            worst = worst.max(f.neg_log_modulus(lambda)?);
        }
        Ok(-worst)
    }

    fn log_det_root(&self, lambda: Complex64) -> Result<f64> {
        let mut s = 0.0;
        for f in &self.entries {
            s -= f.neg_log_modulus(lambda)?;
        }
        Ok(s / self.entries.len() as f64)
    }

    fn zeros(&self) -> Vec<Complex64> {
        self.entries.iter().flat_map(|f| f.zeros().iter().map(|z| z.zero)).collect()
    }

    fn angle_seeds(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for f in &self.entries {
            if let Some(nu) = f.singular_measure() {
                out.extend(nu.support_points(4).into_iter().map(|t| t * TAU));
            }
        }
        out
    }

    /// Minimum over the entries of their scalar circle minima.
    fn exact_circle_min(&self, r: f64) -> Option<(f64, f64)> {
        let mut best: Option<(f64, f64)> = None;
        for f in &self.entries {
            let mm = f.min_modulus(r, &self.modulus_opts).ok()?;
            if best.map_or(true, |b| -mm.neg_log < b.1) {
                best = Some((mm.angle, -mm.neg_log));
            }
        }
        best
    }
}

/// Which quantity of a matrix function is weighed against `|λ|ⁿ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Gauge {
    SmallestSingular,
    DetRoot,
}

fn log_gauge(f: &dyn MatrixFunction, g: Gauge, z: Complex64) -> f64 {
    let v = match g {
        Gauge::SmallestSingular => f.log_smin(z),
        Gauge::DetRoot => f.log_det_root(z),
    };
    match v {
        Ok(x) if !x.is_nan() => x,
        _ => f64::INFINITY,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaOp {
    pub n: u32,
    pub delta: f64,
    pub argmin: Complex64,
}

/// Search options for `δₙ(Θ)`.
///
/// `δₙ = inf_r max(rⁿ, m(r))` with `m(r)` the minimum of the gauge on `|λ| = r`,
/// so the search is a radial profile of circle minima shared by every `n`.
#[derive(Debug, Clone, Copy)]
pub struct OpDeltaOptions {
    pub radii: usize,
    /// Angular samples per circle before refinement.
    pub angles: usize,
    /// Angular basins refined per circle.
    pub keep: usize,
    /// Stopping width for radius and angle refinement.
    pub tol: f64,
}

impl Default for OpDeltaOptions {
    fn default() -> Self {
        OpDeltaOptions { radii: 64, angles: 64, keep: 3, tol: 1e-13 }
    }
}

impl OpDeltaOptions {
    pub fn doubled(self) -> Self {
        OpDeltaOptions { radii: self.radii * 2, angles: self.angles * 2, ..self }
    }
}

fn check_square(f: &dyn MatrixFunction) -> Result<usize> {
    let (r, c) = f.shape();
    if r != c || r == 0 {
        return Err(Error::DegenerateDefect(format!("Θ(λ) must be square and nonempty, got {r}x{c}")));
    }
    Ok(r)
}

/// Drops angles within `eps` (mod 2π) of an earlier one.
fn dedup_angles(angles: Vec<f64>, eps: f64) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(angles.len());
    for a in angles {
        if !out.iter().any(|&b| (a - b).rem_euclid(TAU).min((b - a).rem_euclid(TAU)) < eps) {
            out.push(a);
        }
    }
    out
}

#[derive(Debug, Clone)]
struct Node {
    r: f64,
    ln_m: f64,
    angle: f64,
    basins: Vec<f64>,
}

struct Profile<'a> {
    f: &'a dyn MatrixFunction,
    g: Gauge,
    opts: OpDeltaOptions,
    seeds: Vec<f64>,
    /// Smallest modulus of a known zero, or 1.
    cap: f64,
    cap_point: Option<Complex64>,
    nodes: Vec<Node>,
}

impl<'a> Profile<'a> {
    fn build(f: &'a dyn MatrixFunction, g: Gauge, opts: &OpDeltaOptions) -> Self {
        let cap_point = f.zeros().into_iter().filter(|z| z.norm() < 1.0).min_by(|a, b| a.norm().total_cmp(&b.norm()));
        let cap = cap_point.map_or(1.0, |z| z.norm());
        let mut seeds = f.angle_seeds();
        seeds.extend(f.zeros().iter().filter(|z| z.norm() > 0.0).map(|z| z.arg()));
        let mut p = Profile { f, g, opts: *opts, seeds, cap, cap_point, nodes: Vec::new() };
        if cap > 0.0 {
            let half = opts.radii / 2;
            let mut radii: Vec<f64> = (0..half).map(|k| cap * k as f64 / half as f64).collect();
            for k in 1..=(opts.radii - half) {
                radii.push(cap * (1.0 - 0.5f64.powf(k as f64 * 40.0 / (opts.radii - half) as f64)));
            }
            radii.sort_by(f64::total_cmp);
            radii.dedup();
            radii.retain(|&r| r < cap);
            p.nodes = radii.into_iter().map(|r| p.full_circle(r)).collect();
        }
        p
    }

    fn at(&self, r: f64, t: f64) -> f64 {
        log_gauge(self.f, self.g, Complex64::from_polar(r, t))
    }

    fn exact(&self, r: f64) -> Option<(f64, f64)> {
        if self.g == Gauge::SmallestSingular {
            self.f.exact_circle_min(r)
        } else {
            None
        }
    }

    fn full_circle(&self, r: f64) -> Node {
        if r == 0.0 {
            return Node { r, ln_m: self.at(0.0, 0.0), angle: 0.0, basins: vec![0.0] };
        }
        if let Some((angle, ln_m)) = self.exact(r) {
            return Node { r, ln_m, angle, basins: vec![angle] };
        }
        let n = self.opts.angles.max(8);
        let step = TAU / n as f64;
        let vals: Vec<f64> = (0..n).map(|k| self.at(r, k as f64 * step)).collect();
        let mut starts: Vec<(f64, f64)> = (0..n)
            .filter(|&k| vals[k] <= vals[(k + n - 1) % n] && vals[k] <= vals[(k + 1) % n])
            .map(|k| (k as f64 * step, vals[k]))
            .collect();
        starts.sort_by(|a, b| a.1.total_cmp(&b.1));
        starts.truncate(self.opts.keep.max(1));
        let mut basins: Vec<f64> = starts.iter().map(|s| s.0).collect();
        basins.extend(self.seeds.iter().copied());
        let (angle, ln_m, basins) = self.refine_basins(r, &dedup_angles(basins, 0.05 * step), step);
        Node { r, ln_m, angle, basins }
    }

    /// Golden refinement in a window around each basin angle.
    fn refine_basins(&self, r: f64, basins: &[f64], window: f64) -> (f64, f64, Vec<f64>) {
        let mut found: Vec<(f64, f64)> = basins
            .iter()
            .map(|&a| {
                let (t, v) = golden_max(|t| -self.at(r, t), a - window, a + window, self.opts.tol);
                (t, -v)
            })
            .collect();
        found.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (angle, ln_m) = found[0];
        (angle, ln_m, found.into_iter().map(|x| x.0).collect())
    }

    /// Circle minimum between nodes `k` and `k + 1`, warm-started from both.
    fn between(&self, k: usize, r: f64) -> Node {
        if let Some((angle, ln_m)) = self.exact(r) {
            return Node { r, ln_m, angle, basins: vec![angle] };
        }
        let mut basins = self.nodes[k].basins.clone();
        if let Some(nx) = self.nodes.get(k + 1) {
            basins.extend(nx.basins.iter().copied());
        }
        basins.extend(self.seeds.iter().copied());
        let window = 2.0 * TAU / self.opts.angles.max(8) as f64;
        let (angle, ln_m, b) = self.refine_basins(r, &dedup_angles(basins, 0.05 * window), window);
        Node { r, ln_m, angle, basins: b }
    }

    fn upper(&self, k: usize) -> f64 {
        self.nodes.get(k + 1).map_or(self.cap, |n| n.r)
    }

    /// Local minima of `m` between nodes; independent of `n`.
    fn valleys(&self) -> Vec<Node> {
        let v = &self.nodes;
        let mut out = Vec::new();
        for k in 0..v.len() {
            let left = if k == 0 { f64::INFINITY } else { v[k - 1].ln_m };
            let right = v.get(k + 1).map_or(f64::INFINITY, |x| x.ln_m);
            if v[k].ln_m <= left && v[k].ln_m <= right {
                if k == 0 {
                    out.push(v[0].clone());
                    continue;
                }
                let lo = k - 1;
                let (r, _) = golden_max(|r| -self.between(lo, r).ln_m, v[lo].r, self.upper(k), self.opts.tol);
                let node = self.between(lo, r);
                out.push(if node.ln_m < v[k].ln_m { node } else { v[k].clone() });
            }
        }
        out
    }

    fn minimize(&self, n: u32, valleys: &[Node], extra: &[Complex64]) -> DeltaOp {
        let nf = n as f64;
        let obj = |r: f64, ln_m: f64| if r == 0.0 { ln_m } else { (nf * r.ln()).max(ln_m) };
        let mut best = DeltaOp { n, delta: f64::INFINITY, argmin: Complex64::new(0.0, 0.0) };
        let mut offer = |v: f64, z: Complex64| {
            if v.exp() < best.delta {
                best = DeltaOp { n, delta: v.exp(), argmin: z };
            }
        };
        if let Some(z) = self.cap_point {
            offer(nf * z.norm().ln(), z);
        }
        for node in self.nodes.iter().chain(valleys) {
            offer(obj(node.r, node.ln_m), Complex64::from_polar(node.r, node.angle));
        }
        for &z in extra {
            if z.norm() < 1.0 {
                offer(obj(z.norm(), log_gauge(self.f, self.g, z)), z);
            }
        }
        // crossings where the circle minimum drops below rⁿ
        let gap = |node: &Node| nf * node.r.ln() - node.ln_m;
        for k in 0..self.nodes.len() {
            let a = &self.nodes[k];
            let (b_r, b_gap) = match self.nodes.get(k + 1) {
                Some(b) => (b.r, gap(b)),
                None if self.cap < 1.0 => (self.cap, f64::INFINITY),
                None => continue,
            };
            if !(gap(a) < 0.0 && b_gap >= 0.0) {
                continue;
            }
            // Illinois regula falsi on the gap; the far end may be the cap at +∞
            let (mut lo, mut hi) = (a.r, b_r);
            let (mut g_lo, mut g_hi) = (gap(a), b_gap);
            let mut side = 0i8;
            let mut at_hi: Option<Node> = None;
            for _ in 0..200 {
                if hi - lo <= self.opts.tol * hi {
                    break;
                }
                let mut mid = if g_hi.is_finite() { (lo * g_hi - hi * g_lo) / (g_hi - g_lo) } else { 0.5 * (lo + hi) };
                if !(mid > lo && mid < hi) {
                    mid = 0.5 * (lo + hi);
                }
                let node = self.between(k, mid);
                let gm = gap(&node);
                if gm < 0.0 {
                    lo = mid;
                    g_lo = gm;
                    if side == -1 {
                        g_hi *= 0.5;
                    }
                    side = -1;
                } else {
                    hi = mid;
                    g_hi = gm;
                    at_hi = Some(node);
                    if side == 1 {
                        g_lo *= 0.5;
                    }
                    side = 1;
                }
            }
            let node = at_hi.unwrap_or_else(|| self.between(k, hi));
            offer(obj(node.r, node.ln_m), Complex64::from_polar(node.r, node.angle));
        }
        best
    }
}

/// `δₙ(Θ)` for each requested `n`, sharing one radial profile.
pub fn delta_n_profile(f: &dyn MatrixFunction, ns: &[u32], opts: &OpDeltaOptions) -> Result<Vec<DeltaOp>> {
    check_square(f)?;
    if ns.iter().any(|&n| n == 0) {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let p = Profile::build(f, Gauge::SmallestSingular, opts);
    let valleys = p.valleys();
    Ok(ns.iter().map(|&n| p.minimize(n, &valleys, &[])).collect())
}

pub fn delta_n_op(f: &dyn MatrixFunction, n: u32, opts: &OpDeltaOptions) -> Result<DeltaOp> {
    Ok(delta_n_profile(f, &[n], opts)?.remove(0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetReduction {
    pub n: u32,
    pub delta_theta: f64,
    pub delta_det: f64,
}

impl DetReduction {
    pub fn holds(&self, tol: f64) -> bool {
        self.delta_theta <= self.delta_det + tol
    }
}

/// `(δₙ(Θ), δₙ(Δ))` with `Δ = |det Θ|^{1/N}`, for zero-free square Θ.
pub fn det_reduction(f: &dyn MatrixFunction, ns: &[u32], opts: &OpDeltaOptions) -> Result<Vec<DetReduction>> {
    check_square(f)?;
    if ns.iter().any(|&n| n == 0) {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    if let Some(z) = f.zeros().into_iter().find(|z| z.norm() < 1.0) {
        return Err(Error::InvalidArgument(format!("det Θ vanishes at {z}")));
    }
    let pd = Profile::build(f, Gauge::DetRoot, opts);
    let pt = Profile::build(f, Gauge::SmallestSingular, opts);
    let (vd, vt) = (pd.valleys(), pt.valleys());
    Ok(ns
        .iter()
        .map(|&n| {
            let det = pd.minimize(n, &vd, &[]);
            // σ_min ≤ Δ pointwise, so Δ's minimizer is a fair candidate for Θ
            let th = pt.minimize(n, &vt, &[det.argmin]);
            DetReduction { n, delta_theta: th.delta, delta_det: det.delta }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelReport {
    /// Max over `|λ| = 1 − 10⁻⁶` of `‖Θ(λ)*Θ(λ) − I‖`.
    pub innerness_residual: f64,
    pub innerness_radius: f64,
    /// `|det Θ(λᵢ)|` at each eigenvalue of T.
    pub det_at_eigenvalues: Vec<f64>,
    /// Max of `σ_max(Θ(λ))` on the interior grid.
    pub max_interior_norm: f64,
    pub spectrum_ok: bool,
    pub purely_contractive: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct ModelCheckOptions {
    pub boundary_gap: f64,
    pub angles: usize,
    pub radii: usize,
    pub det_tol: f64,
}

impl Default for ModelCheckOptions {
    fn default() -> Self {
        ModelCheckOptions { boundary_gap: 1e-6, angles: 128, radii: 24, det_tol: 1e-6 }
    }
}

impl ModelCheckOptions {
    pub fn doubled(self) -> Self {
        ModelCheckOptions { angles: self.angles * 2, radii: self.radii * 2, ..self }
    }
}

pub fn validate_model(cf: &CharacteristicFunction, opts: &ModelCheckOptions) -> Result<ModelReport> {
    let t = cf.contraction();
    if !t.is_strict_spectral() {
        return Err(Error::InvalidArgument(format!("spectral radius {} is not below 1", t.spectral_radius())));
    }
    let (rows, cols) = cf.shape();
    let r_b = 1.0 - opts.boundary_gap;
    let mut inner_res: f64 = 0.0;
    for k in 0..opts.angles {
        let z = Complex64::from_polar(r_b, std::f64::consts::TAU * k as f64 / opts.angles as f64);
        let th = cf.theta_eval(z)?;
        inner_res = inner_res.max(spectral_norm(&(th.adjoint() * &th - CMat::identity(cols, cols))));
    }
    let mut dets = Vec::new();
    if rows == cols {
        for z in t.eigenvalues() {
            dets.push(cf.theta_eval(z)?.determinant().norm());
        }
    }
    let mut max_norm: f64 = 0.0;
    for i in 0..opts.radii {
        let r = 0.99 * i as f64 / (opts.radii - 1).max(1) as f64;
        for k in 0..opts.angles {
            let z = Complex64::from_polar(r, std::f64::consts::TAU * k as f64 / opts.angles as f64);
            max_norm = max_norm.max(spectral_norm(&cf.theta_eval(z)?));
        }
    }
    Ok(ModelReport {
        innerness_residual: inner_res,
        innerness_radius: r_b,
        spectrum_ok: rows == cols && dets.iter().all(|&d| d < opts.det_tol),
        det_at_eigenvalues: dets,
        max_interior_norm: max_norm,
        purely_contractive: max_norm < 1.0,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LangerSplit {
    /// Orthonormal basis of the largest reducing subspace on which T is unitary.
    pub unitary: CMat,
    /// Orthonormal basis of its complement.
    pub cnu: CMat,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LangerResiduals {
    /// Largest off-diagonal block of T in the split basis.
    pub block: f64,
    /// `‖T₁*T₁ − I‖` for the unitary part.
    pub isometry: f64,
    pub unitary_dim: usize,
    pub cnu_dim: usize,
    pub defect_rank: usize,
    pub cnu_defect_rank: usize,
    /// Unitary dimension found when splitting the cnu compression again.
    pub resplit_unitary_dim: usize,
}

impl LangerResiduals {
    pub fn holds(&self) -> bool {
        self.block < 1e-10
            && self.isometry < 1e-8
            && self.cnu_defect_rank <= self.defect_rank
            && self.resplit_unitary_dim == 0
    }
}

/// `∩_{k≤d} ker(I − T*ᵏTᵏ) ∩ ker(I − TᵏT*ᵏ)` and its orthogonal complement.
pub fn langer_split(t: &MatrixContraction) -> LangerSplit {
    langer_split_tol(t, 1e-10)
}

pub fn langer_split_tol(t: &MatrixContraction, tol: f64) -> LangerSplit {
    let d = t.dim();
    let m = t.matrix();
    let id = CMat::identity(d, d);
    let mut blocks: Vec<CMat> = Vec::with_capacity(2 * d);
    let mut p = id.clone();
    for _ in 0..d {
        p = &p * m;
        blocks.push(&id - p.adjoint() * &p);
        blocks.push(&id - &p * p.adjoint());
    }
    let mut stacked = CMat::zeros(2 * d * d, d);
    for (b, blk) in blocks.iter().enumerate() {
        stacked.view_mut((b * d, 0), (d, d)).copy_from(blk);
    }
    let svd = stacked.svd(false, true);
    let v_t = svd.v_t.expect("requested V*");
    let mut null = Vec::new();
    let mut range = Vec::new();
    for k in 0..d {
        if svd.singular_values[k] <= tol {
            null.push(k);
        } else {
            range.push(k);
        }
    }
    let cols = |idx: &[usize]| CMat::from_fn(d, idx.len(), |i, j| v_t[(idx[j], i)].conj());
    LangerSplit { unitary: cols(&null), cnu: cols(&range) }
}

impl LangerSplit {
    pub fn residuals(&self, t: &MatrixContraction) -> Result<LangerResiduals> {
        let m = t.matrix();
        let (u1, u2) = (&self.unitary, &self.cnu);
        let off1 = if u1.ncols() > 0 && u2.ncols() > 0 { spectral_norm(&(u2.adjoint() * m * u1)) } else { 0.0 };
        let off2 = if u1.ncols() > 0 && u2.ncols() > 0 { spectral_norm(&(u1.adjoint() * m * u2)) } else { 0.0 };
        let isometry = if u1.ncols() > 0 {
            let t1 = u1.adjoint() * m * u1;
            spectral_norm(&(t1.adjoint() * &t1 - CMat::identity(u1.ncols(), u1.ncols())))
        } else {
            0.0
        };
        let defect_rank = defects(t)?.rank_t;
        let (cnu_defect_rank, resplit) = if u2.ncols() > 0 {
            let t2 = MatrixContraction::new(u2.adjoint() * m * u2)?;
            (defects(&t2)?.rank_t, langer_split(&t2).unitary.ncols())
        } else {
            (0, 0)
        };
        Ok(LangerResiduals {
            block: off1.max(off2),
            isometry,
            unitary_dim: u1.ncols(),
            cnu_dim: u2.ncols(),
            defect_rank,
            cnu_defect_rank,
            resplit_unitary_dim: resplit,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OpEstimate {
    pub n: u32,
    pub inverse_power_norm: f64,
    pub delta: f64,
    /// `(1/δₙ − 1)/2`.
    pub bound: f64,
}

impl OpEstimate {
    pub fn holds(&self, tol: f64) -> bool {
        self.inverse_power_norm >= self.bound - tol * self.bound.abs().max(1.0)
    }
}

/// `‖T⁻ⁿ‖` against `(1/δₙ(Θ_T) − 1)/2` for each `n`.
pub fn opestimate_check(t: &MatrixContraction, ns: &[u32], opts: &OpDeltaOptions) -> Result<Vec<OpEstimate>> {
    if !t.is_invertible() {
        return Err(Error::NotInvertible(format!("smallest singular value {:e}", t.min_singular_value())));
    }
    if !t.is_strict_spectral() {
        return Err(Error::InvalidArgument("spectral radius must be below 1".into()));
    }
    let cf = CharacteristicFunction::new(t.clone())?;
    let deltas = delta_n_profile(&cf, ns, opts)?;
    deltas
        .into_iter()
        .map(|d| {
            Ok(OpEstimate {
                n: d.n,
                inverse_power_norm: t.inverse_power_norm(d.n)?,
                delta: d.delta,
                bound: 0.5 * (1.0 / d.delta - 1.0),
            })
        })
        .collect()
}

/// Random strict contraction: complex Gaussian entries rescaled to a norm
/// drawn from `[lo, hi]`.
pub fn random_contraction(rng: &mut ChaCha8Rng, d: usize, lo: f64, hi: f64) -> MatrixContraction {
    loop {
        let a = CMat::from_fn(d, d, |_, _| c(gauss(rng), gauss(rng)));
        let n = spectral_norm(&a);
        if n == 0.0 {
            continue;
        }
        let target = rng.gen_range(lo..=hi);
        if let Ok(t) = MatrixContraction::new(a * c(target / n, 0.0)) {
            return t;
        }
    }
}

/// Random strict contraction whose smallest singular value exceeds `min_sv`.
pub fn random_invertible_contraction(
    rng: &mut ChaCha8Rng,
    d: usize,
    lo: f64,
    hi: f64,
    min_sv: f64,
) -> MatrixContraction {
    loop {
        let t = random_contraction(rng, d, lo, hi);
        if t.min_singular_value() > min_sv {
            return t;
        }
    }
}

/// Haar-like unitary from the QR factors of a complex Gaussian matrix.
pub fn random_unitary(rng: &mut ChaCha8Rng, d: usize) -> CMat {
    let a = CMat::from_fn(d, d, |_, _| c(gauss(rng), gauss(rng)));
    let qr = a.qr();
    let (q, r) = (qr.q(), qr.r());
    // fix column phases so the distribution does not depend on the QR convention
    let phases = CMat::from_fn(d, d, |i, j| {
        if i == j && r[(i, i)].norm() > 0.0 {
            r[(i, i)] / r[(i, i)].norm()
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    q * phases
}

/// `W (U ⊕ C) W*` with `U` unitary of size `unitary_dim`, `C` a random strict
/// contraction with norm in `[lo, hi]` and `W` a random unitary.
pub fn random_with_unitary_part(
    rng: &mut ChaCha8Rng,
    unitary_dim: usize,
    cnu_dim: usize,
    lo: f64,
    hi: f64,
) -> MatrixContraction {
    let d = unitary_dim + cnu_dim;
    let mut block = CMat::zeros(d, d);
    if unitary_dim > 0 {
        block.view_mut((0, 0), (unitary_dim, unitary_dim)).copy_from(&random_unitary(rng, unitary_dim));
    }
    if cnu_dim > 0 {
        let cnu = random_contraction(rng, cnu_dim, lo, hi);
        block.view_mut((unitary_dim, unitary_dim), (cnu_dim, cnu_dim)).copy_from(cnu.matrix());
    }
    let w = random_unitary(rng, d);
    let m = &w * block * w.adjoint();
    // round-off can push the norm a hair above 1; rescale within tolerance
    let norm = spectral_norm(&m);
    let m = if norm > 1.0 { m * c(1.0 / norm, 0.0) } else { m };
    MatrixContraction::new(m).expect("unitary conjugate of a contraction")
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// `diag(λ_1, …)` as a contraction, handy for anchored examples.
pub fn diagonal(entries: &[Complex64]) -> Result<MatrixContraction> {
    MatrixContraction::new(CMat::from_diagonal(&nalgebra::DVector::from_column_slice(entries)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inner::DeltaOptions;
    use crate::measures::SingularMeasure;
    use approx::assert_relative_eq;
    use rand::SeedableRng;

    const ONE: Complex64 = Complex64::new(1.0, 0.0);
    const ZERO: Complex64 = Complex64::new(0.0, 0.0);

    fn scalar(a: Complex64) -> CharacteristicFunction {
        CharacteristicFunction::new(diagonal(&[a]).unwrap()).unwrap()
    }

    #[test]
    fn scalar_defect() {
        let t = diagonal(&[c(0.5, 0.0)]).unwrap();
        let d = defects(&t).unwrap();
        assert_relative_eq!(d.d_t[(0, 0)].re, 0.75f64.sqrt(), epsilon = 1e-14);
        assert_eq!(d.rank_t, 1);
    }

    #[test]
    fn diagonal_defects_and_residuals() {
        let t = diagonal(&[c(0.5, 0.0), c(0.8, 0.0)]).unwrap();
        let d = defects(&t).unwrap();
        assert_relative_eq!(d.d_t[(0, 0)].re, 0.866025403784, epsilon = 1e-10);
        assert_relative_eq!(d.d_t[(1, 1)].re, 0.6, epsilon = 1e-12);
        let r = d.residuals(&t);
        assert!(r.square_t < 1e-10 && r.square_tstar < 1e-10 && r.intertwining < 1e-10);
    }

    #[test]
    fn unitary_has_no_defect() {
        let u = diagonal(&[Complex64::from_polar(1.0, 0.3), Complex64::from_polar(1.0, 2.0)]).unwrap();
        let d = defects(&u).unwrap();
        assert_eq!((d.rank_t, d.rank_tstar), (0, 0));
        assert!(matches!(CharacteristicFunction::new(u), Err(Error::DegenerateDefect(_))));
    }

    #[test]
    fn not_a_contraction_rejected() {
        assert!(matches!(diagonal(&[c(1.1, 0.0)]), Err(Error::NotContraction { .. })));
    }

    #[test]
    fn scalar_collapses_to_mobius() {
        for a in [c(0.5, 0.0), c(-0.3, 0.4), c(0.0, 0.9)] {
            let cf = scalar(a);
            for lam in [c(0.0, 0.0), c(0.5, 0.0), c(0.3, -0.6), c(-0.9, 0.1)] {
                let th = cf.theta_eval(lam).unwrap()[(0, 0)];
                let expect = (lam - a) / (ONE - a.conj() * lam);
                assert!((th - expect).norm() < 1e-12, "a = {a}, λ = {lam}: {th} vs {expect}");
            }
            assert!(cf.theta_eval(a).unwrap()[(0, 0)].norm() < 1e-12);
        }
    }

    #[test]
    fn value_at_zero_is_minus_t() {
        let cf = CharacteristicFunction::new(diagonal(&[c(0.5, 0.0), c(0.8, 0.0)]).unwrap()).unwrap();
        let z = cf.theta_eval(ZERO).unwrap();
        assert!((&z - cf.at_zero()).norm() < 1e-12);
        let s = singular_values(&z);
        assert_relative_eq!(s[0], 0.8, epsilon = 1e-12);
        assert_relative_eq!(s[1], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn model_checks_on_diagonal() {
        let cf = CharacteristicFunction::new(diagonal(&[c(0.3, 0.0), c(0.5, 0.1)]).unwrap()).unwrap();
        let r = validate_model(&cf, &ModelCheckOptions::default()).unwrap();
        assert!(r.spectrum_ok, "{:?}", r.det_at_eigenvalues);
        assert!(r.purely_contractive);
        assert!(r.innerness_residual < 1e-4);
    }

    /// Brute force over a fine polar grid.
    fn brute_delta(f: &dyn MatrixFunction, n: u32) -> f64 {
        let mut best = f64::INFINITY;
        for i in 1..2000 {
            let r = i as f64 / 2000.0;
            for k in 0..720 {
                let z = Complex64::from_polar(r, std::f64::consts::TAU * k as f64 / 720.0);
                best = best.min((n as f64 * r.ln()).max(f.log_smin(z).unwrap()));
            }
        }
        best.exp()
    }

    #[test]
    fn scalar_delta_against_brute_force() {
        let cf = scalar(c(0.5, 0.0));
        let d = delta_n_op(&cf, 2, &OpDeltaOptions::default()).unwrap();
        assert!(d.delta <= 0.25);
        let oracle = brute_delta(&cf, 2);
        assert!(d.delta <= oracle + 1e-9 && d.delta >= oracle - 1e-3, "{} vs {}", d.delta, oracle);
    }

    #[test]
    fn diagonal_delta_below_eigenvalue_powers() {
        let cf = CharacteristicFunction::new(diagonal(&[c(0.3, 0.0), c(0.8, 0.0)]).unwrap()).unwrap();
        let d = delta_n_op(&cf, 1, &OpDeltaOptions::default()).unwrap();
        assert!(d.delta <= 0.3 + 1e-12);
    }

    #[test]
    fn repeated_scalar_inner_matches_scalar_delta() {
        let th = InnerFunction::singular(SingularMeasure::atom(0.0, 1.0).unwrap());
        let scalar = th.delta_n(4, &DeltaOptions::default()).unwrap().delta_n;
        let diag = DiagonalInner::new(vec![th.clone(), th]).unwrap();
        let d = delta_n_op(&diag, 4, &OpDeltaOptions::default()).unwrap();
        assert!((d.delta - scalar).abs() < 1e-6, "{} vs {}", d.delta, scalar);
        let r = det_reduction(&diag, &[4], &OpDeltaOptions::default()).unwrap()[0];
        assert!((r.delta_theta - r.delta_det).abs() < 1e-8);
    }

    #[test]
    fn det_reduction_two_atoms() {
        let t1 = InnerFunction::singular(SingularMeasure::atom(0.0, 1.0).unwrap());
        let t2 = InnerFunction::singular(SingularMeasure::atom(std::f64::consts::PI, 1.0).unwrap());
        let diag = DiagonalInner::new(vec![t1, t2]).unwrap();
        for opts in [OpDeltaOptions::default(), OpDeltaOptions::default().doubled()] {
            let r = det_reduction(&diag, &[3], &opts).unwrap()[0];
            assert!(r.holds(1e-8), "{r:?}");
        }
    }

    #[test]
    fn langer_examples() {
        let t = diagonal(&[Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4), c(0.5, 0.0)]).unwrap();
        let s = langer_split(&t);
        assert_eq!(s.unitary.ncols(), 1);
        assert!(s.unitary[(0, 0)].norm() > 1.0 - 1e-12);
        assert!(s.residuals(&t).unwrap().holds());

        let strict = diagonal(&[c(0.9, 0.0), c(0.2, 0.1)]).unwrap();
        assert_eq!(langer_split(&strict).unitary.ncols(), 0);

        let (ca, sa) = (0.7f64.cos(), 0.7f64.sin());
        let rot = CMat::from_row_slice(
            3,
            3,
            &[c(ca, 0.0), c(-sa, 0.0), ZERO, c(sa, 0.0), c(ca, 0.0), ZERO, ZERO, ZERO, c(0.5, 0.0)],
        );
        let t = MatrixContraction::new(rot).unwrap();
        let s = langer_split(&t);
        assert_eq!(s.unitary.ncols(), 2);
        assert!(s.residuals(&t).unwrap().holds());
    }

    #[test]
    fn opestimate_diagonal_anchor() {
        let t = diagonal(&[c(0.3, 0.0), c(0.5, 0.1)]).unwrap();
        let r = opestimate_check(&t, &[5], &OpDeltaOptions::default()).unwrap()[0];
        assert_relative_eq!(r.inverse_power_norm, 0.3f64.powi(-5), max_relative = 1e-10);
        assert!(r.delta <= 0.3f64.powi(5) + 1e-15);
        assert!(r.bound >= 205.26);
        assert!(r.holds(0.0));
    }

    #[test]
    fn opestimate_scalar_chain() {
        let a = 0.6;
        let t = diagonal(&[c(a, 0.0)]).unwrap();
        for r in opestimate_check(&t, &[1, 3, 6], &OpDeltaOptions::default()).unwrap() {
            assert_relative_eq!(r.inverse_power_norm, a.powi(-(r.n as i32)), max_relative = 1e-10);
            assert!(r.holds(0.0));
        }
    }

    #[test]
    fn langer_seeded_battery() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (u, k) in [(1, 2), (2, 1), (2, 3), (0, 4), (3, 0)] {
            let t = random_with_unitary_part(&mut rng, u, k, 0.2, 0.9);
            let s = langer_split(&t);
            let r = s.residuals(&t).unwrap();
            assert_eq!((r.unitary_dim, r.cnu_dim), (u, k), "{r:?}");
            assert!(r.holds(), "{r:?}");
        }
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let t = diagonal(&[c(0.3, 0.1), c(-0.2, 0.4)]).unwrap();
        let back = MatrixContraction::from_csv(&t.to_csv()).unwrap();
        assert!((back.matrix() - t.matrix()).norm() < 1e-15);
        assert!(matches!(MatrixContraction::from_csv("0.1,0\n0.2"), Err(Error::Parse(_))));
        assert!(matches!(MatrixContraction::from_csv("2,0"), Err(Error::NotContraction { .. })));
    }

    #[test]
    fn random_contractions_are_purely_contractive() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let t = random_contraction(&mut rng, 3, 0.3, 0.95);
            let cf = CharacteristicFunction::new(t).unwrap();
            for k in 0..64 {
                let z = Complex64::from_polar(0.99, std::f64::consts::TAU * k as f64 / 64.0);
                assert!(spectral_norm(&cf.theta_eval(z).unwrap()) < 1.0);
            }
        }
    }
}
