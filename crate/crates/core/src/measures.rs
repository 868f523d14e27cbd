//! Finite positive singular measures on the unit circle.
//!
//! Positions on the circle are kept internally in *turns* (`x ∈ [0, 1)`,
//! angle `2πx`), so arc lengths are in the normalized Lebesgue measure
//! where the whole circle has length 1.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack used when comparing cell boundaries against arc boundaries.
const EDGE_EPS: f64 = 4.0 * f64::EPSILON;

/// Default depth budget for self-similar recursion. Beyond roughly this depth
/// cells of a ratio-1/3 construction fall below the resolution of `f64` turns.
pub const DEFAULT_MAX_DEPTH: usize = 34;

/// Default absolute tolerance for Herglotz quadrature.
pub const DEFAULT_HERGLOTZ_TOL: f64 = 1e-10;

fn to_turns(angle: f64) -> f64 {
    let x = (angle / TAU).rem_euclid(1.0);
    if x >= 1.0 {
        0.0
    } else {
        x
    }
}

/// Half-open arc `[start, start + length)` on the circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    start: f64,
    length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Overlap {
    Inside,
    Outside,
    Partial,
}

impl Arc {
    /// Arc with the given center angle (radians) and normalized length in `(0, 1]`.
    pub fn new(center: f64, length: f64) -> Result<Self> {
        Self::check_length(length)?;
        if !center.is_finite() {
            return Err(Error::InvalidArgument("arc center must be finite".into()));
        }
        let start = (to_turns(center) - length / 2.0).rem_euclid(1.0);
        Ok(Arc { start: if start >= 1.0 { 0.0 } else { start }, length })
    }

    /// Arc starting at `start` turns.
    pub fn from_start_turns(start: f64, length: f64) -> Result<Self> {
        Self::check_length(length)?;
        if !start.is_finite() {
            return Err(Error::InvalidArgument("arc start must be finite".into()));
        }
        let start = start.rem_euclid(1.0);
        Ok(Arc { start: if start >= 1.0 { 0.0 } else { start }, length })
    }

    pub fn whole() -> Self {
        Arc { start: 0.0, length: 1.0 }
    }

    fn check_length(length: f64) -> Result<()> {
        if !(length > 0.0 && length <= 1.0) {
            return Err(Error::InvalidArgument(format!("arc length {length} outside (0, 1]")));
        }
        Ok(())
    }

    pub fn start_turns(&self) -> f64 {
        self.start
    }

    pub fn start_angle(&self) -> f64 {
        self.start * TAU
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn center_angle(&self) -> f64 {
        ((self.start + self.length / 2.0) * TAU).rem_euclid(TAU)
    }

    pub fn is_whole(&self) -> bool {
        self.length >= 1.0
    }

    /// Membership of an angle (radians).
    pub fn contains(&self, angle: f64) -> bool {
        self.contains_turns(to_turns(angle))
    }

    pub(crate) fn contains_turns(&self, x: f64) -> bool {
        if self.is_whole() {
            return true;
        }
        (x - self.start).rem_euclid(1.0) < self.length
    }

    /// Closed membership with a small slack, used for cover checks where the
    /// covered set is compact and may touch right endpoints.
    pub(crate) fn contains_turns_closed(&self, x: f64, slack: f64) -> bool {
        if self.is_whole() {
            return true;
        }
        let mut d = (x - self.start).rem_euclid(1.0);
        if d > 1.0 - slack {
            d -= 1.0;
        }
        d <= self.length + slack
    }

    /// Position of the interval `[a, a + w)` (turns) relative to this arc.
    pub(crate) fn classify(&self, a: f64, w: f64) -> Overlap {
        if self.is_whole() {
            return Overlap::Inside;
        }
        let mut d = (a - self.start).rem_euclid(1.0);
        if d > 1.0 - EDGE_EPS {
            d -= 1.0;
        }
        if d >= -EDGE_EPS && d + w <= self.length + EDGE_EPS {
            Overlap::Inside
        } else if d >= self.length - EDGE_EPS && d + w <= 1.0 + EDGE_EPS {
            Overlap::Outside
        } else {
            Overlap::Partial
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    /// Radians in `[0, 2π)`.
    pub angle: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtomicMeasure {
    atoms: Vec<Atom>,
    total: f64,
}

impl AtomicMeasure {
    pub fn new(atoms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut out = Vec::new();
        for (angle, weight) in atoms {
            if !angle.is_finite() {
                return Err(Error::InvalidMeasure("atom angle must be finite".into()));
            }
            if !(weight > 0.0 && weight.is_finite()) {
                return Err(Error::InvalidMeasure(format!("atom weight {weight} must be positive and finite")));
            }
            out.push(Atom { angle: to_turns(angle) * TAU, weight });
        }
        if out.is_empty() {
            return Err(Error::InvalidMeasure("atomic measure needs at least one atom".into()));
        }
        let total = out.iter().map(|a| a.weight).sum();
        Ok(AtomicMeasure { atoms: out, total })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.atoms.iter().map(|a| (a.angle, a.weight * factor)))
    }
}

/// One similarity map of a self-similar construction: the child cell occupies
/// `[offset, offset + ratio)` of its parent (in units of the parent width) and
/// carries `prob` of the parent's mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub ratio: f64,
    pub offset: f64,
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfSimilarMeasure {
    base: Arc,
    pieces: Vec<Piece>,
    total: f64,
    max_depth: usize,
    /// Barycenter of the normalized measure on `[0, 1)`.
    mean: f64,
    /// Variance of the normalized measure on `[0, 1)`.
    var: f64,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Cell {
    pub start: f64,
    pub width: f64,
    pub mass: f64,
    pub depth: usize,
}

impl SelfSimilarMeasure {
    pub fn new(base: Arc, pieces: Vec<Piece>, total: f64, max_depth: usize) -> Result<Self> {
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::InvalidMeasure(format!("total mass {total} must be positive")));
        }
        if pieces.is_empty() {
            return Err(Error::InvalidMeasure("need at least one piece".into()));
        }
        for p in &pieces {
            if !(p.ratio > 0.0 && p.ratio < 1.0) {
                return Err(Error::InvalidMeasure(format!("ratio {} outside (0,1)", p.ratio)));
            }
            if !(p.offset >= 0.0 && p.offset + p.ratio <= 1.0 + EDGE_EPS) {
                return Err(Error::InvalidMeasure(format!(
                    "piece [{}, {}) leaves the parent cell",
                    p.offset,
                    p.offset + p.ratio
                )));
            }
            if !(p.prob > 0.0) {
                return Err(Error::InvalidMeasure("piece probabilities must be positive".into()));
            }
        }
        let psum: f64 = pieces.iter().map(|p| p.prob).sum();
        if (psum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidMeasure(format!("probabilities sum to {psum}, not 1")));
        }
        let mut sorted = pieces.clone();
        sorted.sort_by(|a, b| a.offset.total_cmp(&b.offset));
        for w in sorted.windows(2) {
            if w[0].offset + w[0].ratio > w[1].offset + EDGE_EPS {
                return Err(Error::InvalidMeasure("pieces overlap".into()));
            }
        }
        let ratio_sum: f64 = pieces.iter().map(|p| p.ratio).sum();
        if ratio_sum >= 1.0 - 1e-12 {
            return Err(Error::InvalidMeasure(
                "pieces fill the parent cell; the limit measure would not be singular".into(),
            ));
        }
        let num: f64 = pieces.iter().map(|p| p.prob * p.offset).sum();
        let den: f64 = 1.0 - pieces.iter().map(|p| p.prob * p.ratio).sum::<f64>();
        let mean = num / den;
        // E[X²] = Σ p E[(o + rX)²], solved for E[X²]
        let num2: f64 = pieces.iter().map(|p| p.prob * (p.offset * p.offset + 2.0 * p.offset * p.ratio * mean)).sum();
        let den2: f64 = 1.0 - pieces.iter().map(|p| p.prob * p.ratio * p.ratio).sum::<f64>();
        let var = (num2 / den2 - mean * mean).max(0.0);
        Ok(SelfSimilarMeasure { base, pieces, total, max_depth, mean, var })
    }

    /// Symmetric two-piece Cantor measure on the whole circle; `ratio = 1/3`
    /// gives the middle-thirds construction.
    pub fn cantor(total: f64, ratio: f64) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 0.5) {
            return Err(Error::InvalidMeasure(format!("Cantor ratio {ratio} outside (0, 1/2)")));
        }
        Self::new(
            Arc::whole(),
            vec![Piece { ratio, offset: 0.0, prob: 0.5 }, Piece { ratio, offset: 1.0 - ratio, prob: 0.5 }],
            total,
            DEFAULT_MAX_DEPTH,
        )
    }

    pub fn base(&self) -> Arc {
        self.base
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn with_max_depth(mut self, depth: usize) -> Self {
        self.max_depth = depth;
        self
    }

    pub(crate) fn root(&self) -> Cell {
        Cell { start: self.base.start, width: self.base.length, mass: self.total, depth: 0 }
    }

    pub(crate) fn children(&self, c: &Cell) -> impl Iterator<Item = Cell> + '_ {
        let c = *c;
        self.pieces.iter().map(move |p| Cell {
            start: c.start + p.offset * c.width,
            width: p.ratio * c.width,
            mass: p.prob * c.mass,
            depth: c.depth + 1,
        })
    }

    /// All cells of generation `depth`, in left-to-right order.
    pub(crate) fn generation(&self, depth: usize) -> Vec<Cell> {
        let mut cells = vec![self.root()];
        for _ in 0..depth {
            cells = cells.iter().flat_map(|c| self.children(c).collect::<Vec<_>>()).collect();
        }
        cells
    }

    fn fixed_point_in(&self, c: &Cell) -> f64 {
        let p = self.pieces[0];
        c.start + c.width * p.offset / (1.0 - p.ratio)
    }

    fn barycenter(&self, c: &Cell) -> f64 {
        c.start + self.mean * c.width
    }
}

/// A finite positive singular measure on the circle.
#[derive(Debug, Clone, PartialEq)]
pub enum SingularMeasure {
    Atomic(AtomicMeasure),
    SelfSimilar(SelfSimilarMeasure),
}

/// Mass of an arc together with an absolute error bound (zero when exact).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MassEstimate {
    pub value: f64,
    pub error: f64,
}

impl MassEstimate {
    pub fn lower(&self) -> f64 {
        self.value - self.error
    }

    pub fn upper(&self) -> f64 {
        self.value + self.error
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HerglotzValue {
    pub value: Complex64,
    pub error_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArcRatio {
    pub ratio: f64,
    pub window: Arc,
    /// True when the value is the exact supremum (atomic measures).
    pub exact: bool,
}

impl SingularMeasure {
    pub fn atomic(atoms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        Ok(SingularMeasure::Atomic(AtomicMeasure::new(atoms)?))
    }

    pub fn atom(angle: f64, weight: f64) -> Result<Self> {
        Self::atomic([(angle, weight)])
    }

    pub fn cantor(total: f64, ratio: f64) -> Result<Self> {
        Ok(SingularMeasure::SelfSimilar(SelfSimilarMeasure::cantor(total, ratio)?))
    }

    pub fn total_mass(&self) -> f64 {
        match self {
            SingularMeasure::Atomic(a) => a.total,
            SingularMeasure::SelfSimilar(s) => s.total,
        }
    }

    /// Same support, every mass multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::InvalidArgument(format!("scale factor {factor} must be positive")));
        }
        Ok(match self {
            SingularMeasure::Atomic(a) => SingularMeasure::Atomic(a.scaled(factor)?),
            SingularMeasure::SelfSimilar(s) => {
                let mut s = s.clone();
                s.total *= factor;
                SingularMeasure::SelfSimilar(s)
            }
        })
    }

    /// `ν(I)`. Exact for atomic measures and for arcs aligned with generation
    /// cells; otherwise bracketed by cells at the depth budget.
    pub fn mass(&self, arc: &Arc) -> MassEstimate {
        if arc.is_whole() {
            return MassEstimate { value: self.total_mass(), error: 0.0 };
        }
        match self {
            SingularMeasure::Atomic(a) => {
                let value = a.atoms.iter().filter(|at| arc.contains(at.angle)).map(|at| at.weight).sum();
                MassEstimate { value, error: 0.0 }
            }
            SingularMeasure::SelfSimilar(s) => {
                let (lower, partial) = self_similar_mass(s, arc);
                MassEstimate { value: lower + partial / 2.0, error: partial / 2.0 }
            }
        }
    }

    /// Herglotz integral `∫ (e^{it}+z)/(e^{it}−z) dν` for `|z| < 1`.
    pub fn herglotz(&self, z: Complex64, tol: f64) -> Result<HerglotzValue> {
        if !(z.norm() < 1.0) {
            return Err(Error::OutsideDisk { re: z.re, im: z.im });
        }
        self.herglotz_off_circle(z, tol)
    }

    /// Poisson integral `∫ (1−|z|²)/|e^{it}−z|² dν`, i.e. `Re herglotz`.
    pub fn poisson(&self, z: Complex64, tol: f64) -> Result<f64> {
        Ok(self.herglotz(z, tol)?.value.re)
    }

    /// The same integral for any `|z| ≠ 1`; outside the disk it satisfies
    /// `H(z) = −conj(H(1/z̄))`.
    pub(crate) fn herglotz_off_circle(&self, z: Complex64, tol: f64) -> Result<HerglotzValue> {
        let modulus = z.norm();
        if !modulus.is_finite() || (modulus - 1.0).abs() == 0.0 {
            return Err(Error::OnCircle { modulus });
        }
        match self {
            SingularMeasure::Atomic(a) => {
                let value = a.atoms.iter().map(|at| at.weight * kernel(Complex64::from_polar(1.0, at.angle), z)).sum();
                Ok(HerglotzValue { value, error_bound: 0.0 })
            }
            SingularMeasure::SelfSimilar(s) => self_similar_herglotz(s, z, tol),
        }
    }

    /// Lower estimate of `sup_{|I| = η} ν(I)/|I|` with the window achieving it.
    pub fn sup_arc_ratio(&self, eta: f64) -> Result<ArcRatio> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::InvalidArgument(format!("window length {eta} outside (0, 1]")));
        }
        if eta >= 1.0 {
            return Ok(ArcRatio { ratio: self.total_mass(), window: Arc::whole(), exact: true });
        }
        match self {
            SingularMeasure::Atomic(a) => Ok(atomic_sup_window(a, eta)),
            SingularMeasure::SelfSimilar(s) => Ok(self_similar_sup_window(s, eta)),
        }
    }

    /// Points of the support in turns: the atoms, or the images of the first
    /// piece's fixed point in each generation cell at `depth` (capped at 16).
    pub fn support_points(&self, depth: usize) -> Vec<f64> {
        match self {
            SingularMeasure::Atomic(a) => a.atoms.iter().map(|at| to_turns(at.angle)).collect(),
            SingularMeasure::SelfSimilar(s) => {
                s.generation(depth.min(16)).iter().map(|c| s.fixed_point_in(c).rem_euclid(1.0)).collect()
            }
        }
    }
}

fn kernel(w: Complex64, z: Complex64) -> Complex64 {
    (w + z) / (w - z)
}

fn self_similar_mass(s: &SelfSimilarMeasure, arc: &Arc) -> (f64, f64) {
    let mut lower = 0.0;
    let mut partial = 0.0;
    let mut stack = vec![s.root()];
    while let Some(c) = stack.pop() {
        match arc.classify(c.start, c.width) {
            Overlap::Inside => lower += c.mass,
            Overlap::Outside => {}
            Overlap::Partial => {
                if c.depth >= s.max_depth {
                    partial += c.mass;
                } else {
                    stack.extend(s.children(&c));
                }
            }
        }
    }
    (lower, partial)
}

/// Recursive quadrature. Each cell contributes the kernel at its barycenter
/// plus the second-moment term `½ var K''`. Cell variances scale with the
/// squared width, so the remainder is bounded by
/// `mass · max|K'''| · (2πw) · var / 6` over the cell.
fn self_similar_herglotz(s: &SelfSimilarMeasure, z: Complex64, tol: f64) -> Result<HerglotzValue> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("quadrature tolerance must be positive".into()));
    }
    let zr = z.norm();
    let gap = (1.0 - zr).abs();
    let k3_scale = 2.0 * zr * (1.0 + 4.0 * zr + zr * zr);
    let mut value = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    let mut stack = vec![s.root()];
    while let Some(c) = stack.pop() {
        let half = PI * c.width;
        let mid = Complex64::from_polar(1.0, TAU * (c.start + c.width / 2.0));
        let rho = ((mid - z).norm() - half).max(gap);
        let span = TAU * c.width;
        let var = s.var * span * span;
        let cell_err = c.mass * k3_scale / rho.powi(4) * span * var / 6.0;
        let budget = tol * c.mass / s.total;
        if cell_err <= budget || c.depth >= s.max_depth {
            let w = Complex64::from_polar(1.0, TAU * s.barycenter(&c));
            value += c.mass * (kernel(w, z) + 0.5 * var * kernel_dt2(w, z));
            err += cell_err;
        } else {
            stack.extend(s.children(&c));
        }
    }
    if err > tol {
        return Err(Error::QuadratureBudget { achieved: err, requested: tol });
    }
    Ok(HerglotzValue { value, error_bound: err })
}

/// Second derivative in `t` of the Herglotz kernel at `w = e^{it}`.
fn kernel_dt2(w: Complex64, z: Complex64) -> Complex64 {
    let d = w - z;
    -2.0 * z * w * (w + z) / (d * d * d)
}

fn atomic_sup_window(a: &AtomicMeasure, eta: f64) -> ArcRatio {
    let mut pos: Vec<(f64, f64)> = a.atoms.iter().map(|at| (to_turns(at.angle), at.weight)).collect();
    pos.sort_by(|x, y| x.0.total_cmp(&y.0));
    let n = pos.len();
    // Two pointers over the doubled sequence; windows start at atoms.
    let doubled: Vec<(f64, f64)> = pos.iter().copied().chain(pos.iter().map(|&(x, w)| (x + 1.0, w))).collect();
    let mut best = (0.0, pos[0].0);
    let mut j = 0;
    let mut acc = 0.0;
    for i in 0..n {
        if j < i {
            j = i;
            acc = 0.0;
        }
        while j < i + n && doubled[j].0 - doubled[i].0 < eta {
            acc += doubled[j].1;
            j += 1;
        }
        if acc > best.0 {
            best = (acc, doubled[i].0);
        }
        acc -= doubled[i].1;
    }
    let window = Arc::from_start_turns(best.1, eta).expect("eta validated");
    ArcRatio { ratio: best.0 / eta, window, exact: true }
}

const MAX_WINDOW_CANDIDATES: usize = 1 << 15;

fn self_similar_sup_window(s: &SelfSimilarMeasure, eta: f64) -> ArcRatio {
    // Windows start at generation-cell left endpoints at the first depth whose
    // cells fit in the window, and at the next two depths.
    let mut depth = 0;
    let mut width = s.base.length;
    let max_ratio = s.pieces.iter().map(|p| p.ratio).fold(0.0, f64::max);
    while width > eta * (1.0 + 1e-12) && depth < s.max_depth {
        width *= max_ratio;
        depth += 1;
    }
    let mut best =
        ArcRatio { ratio: 0.0, window: Arc::from_start_turns(s.base.start, eta).expect("eta validated"), exact: false };
    let base_count = s.pieces.len().pow(depth as u32);
    for d in depth..=(depth + 2).min(s.max_depth) {
        if s.pieces.len().pow(d as u32) > MAX_WINDOW_CANDIDATES.max(base_count) {
            break;
        }
        for c in s.generation(d) {
            let window = Arc::from_start_turns(c.start, eta).expect("eta validated");
            let (lower, _) = self_similar_mass(s, &window);
            if lower / eta > best.ratio {
                best = ArcRatio { ratio: lower / eta, window, exact: false };
            }
        }
    }
    best
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Decimal {
    Number(f64),
    Text(String),
}

impl Decimal {
    fn value(&self) -> Result<f64> {
        match self {
            Decimal::Number(x) => Ok(*x),
            Decimal::Text(s) => s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("bad decimal {s:?}: {e}"))),
        }
    }
}

/// JSON measure descriptor.
///
/// ```json
/// {"type":"atomic","atoms":[[0.0,"1.0"],[3.14159,0.5]]}
/// {"type":"cantor","mass":1,"ratio":0.3333333333333333}
/// {"type":"cover","name":"cantor"}
/// ```
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum MeasureDescriptor {
    Atomic { atoms: Vec<(Decimal, Decimal)> },
    Cantor { mass: Decimal, ratio: Option<Decimal> },
    Cover { name: String, mass: Option<Decimal>, angle: Option<Decimal> },
}

impl SingularMeasure {
    pub fn from_json_value(v: &serde_json::Value) -> Result<Self> {
        let d: MeasureDescriptor = serde_json::from_value(v.clone())?;
        match d {
            MeasureDescriptor::Atomic { atoms } => {
                let pairs = atoms.iter().map(|(a, w)| Ok((a.value()?, w.value()?))).collect::<Result<Vec<_>>>()?;
                Self::atomic(pairs)
            }
            MeasureDescriptor::Cantor { mass, ratio } => {
                let ratio = match ratio {
                    Some(r) => r.value()?,
                    None => 1.0 / 3.0,
                };
                Self::cantor(mass.value()?, ratio)
            }
            MeasureDescriptor::Cover { name, mass, angle } => {
                let mass = match mass {
                    Some(m) => m.value()?,
                    None => 1.0,
                };
                match name.as_str() {
                    "cantor" => Self::cantor(mass, 1.0 / 3.0),
                    "point" => {
                        let angle = match angle {
                            Some(a) => a.value()?,
                            None => 0.0,
                        };
                        Self::atom(angle, mass)
                    }
                    other => Err(Error::Parse(format!("unknown built-in set {other:?}"))),
                }
            }
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let v: serde_json::Value = serde_json::from_str(s)?;
        Self::from_json_value(&v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn arc_membership_wraps() {
        let arc = Arc::new(0.0, 0.1).unwrap();
        assert!(arc.contains(0.0));
        assert!(arc.contains(TAU - 0.1));
        assert!(arc.contains(0.3));
        assert!(!arc.contains(PI));
        assert!(!arc.contains(0.1 * PI + 1e-9));
        assert!(arc.contains(-0.1 * PI));
    }

    #[test]
    fn arc_rejects_bad_length() {
        assert!(Arc::new(0.0, 0.0).is_err());
        assert!(Arc::new(0.0, 1.5).is_err());
        assert!(Arc::new(f64::NAN, 0.5).is_err());
    }

    #[test]
    fn atom_mass_inside_and_outside() {
        let nu = SingularMeasure::atom(0.0, 1.0).unwrap();
        assert_eq!(nu.mass(&Arc::new(0.0, 0.1).unwrap()).value, 1.0);
        let nu = SingularMeasure::atom(PI, 1.0).unwrap();
        assert_eq!(nu.mass(&Arc::new(0.0, 0.1).unwrap()).value, 0.0);
    }

    #[test]
    fn cantor_first_generation_cell_has_half_mass() {
        let nu = SingularMeasure::cantor(1.0, 1.0 / 3.0).unwrap();
        let m = nu.mass(&Arc::from_start_turns(0.0, 1.0 / 3.0).unwrap());
        assert_eq!(m.value, 0.5);
        assert_eq!(m.error, 0.0);
        let m = nu.mass(&Arc::new(PI / 3.0, 1.0 / 3.0).unwrap());
        assert_eq!(m.value, 0.5);
        assert_eq!(m.error, 0.0);
    }

    #[test]
    fn whole_circle_mass_is_total() {
        let nu = SingularMeasure::cantor(2.5, 0.25).unwrap();
        assert_eq!(nu.mass(&Arc::whole()).value, 2.5);
    }

    #[test]
    fn unaligned_cantor_mass_is_bracketed() {
        let nu = SingularMeasure::cantor(1.0, 1.0 / 3.0).unwrap();
        let m = nu.mass(&Arc::from_start_turns(0.1, 0.2).unwrap());
        // [0.1, 0.3) ∩ C: the self-similar oracle says ν([0,1/3)) = 1/2 and
        // ν([0, 0.1)) = ν of the left ninth-cells inside, so the value lies in (0, 1/2).
        assert!(m.lower() >= 0.0 && m.upper() <= 0.5);
        assert!(m.error < 1e-9);
    }

    #[test]
    fn herglotz_single_atom() {
        let nu = SingularMeasure::atom(0.0, 0.7).unwrap();
        let h = nu.herglotz(Complex64::new(0.0, 0.0), 1e-12).unwrap();
        assert_abs_diff_eq!(h.value.re, 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(h.value.im, 0.0, epsilon = 1e-15);
        let nu = SingularMeasure::atom(0.0, 1.0).unwrap();
        let r = 0.4;
        let h = nu.herglotz(Complex64::new(r, 0.0), 1e-12).unwrap();
        assert_abs_diff_eq!(h.value.re, (1.0 + r) / (1.0 - r), epsilon = 1e-14);
    }

    #[test]
    fn herglotz_two_atoms_direct_sum() {
        let nu = SingularMeasure::atomic([(0.0, 0.5), (PI, 0.5)]).unwrap();
        let z = Complex64::new(0.0, 0.3);
        let one = Complex64::new(1.0, 0.0);
        let expect = 0.5 * (one + z) / (one - z) + 0.5 * (-one + z) / (-one - z);
        let got = nu.herglotz(z, 1e-12).unwrap().value;
        assert_abs_diff_eq!(got.re, expect.re, epsilon = 1e-14);
        assert_abs_diff_eq!(got.im, expect.im, epsilon = 1e-14);
    }

    #[test]
    fn herglotz_rejects_boundary() {
        let nu = SingularMeasure::atom(0.0, 1.0).unwrap();
        assert!(matches!(nu.herglotz(Complex64::new(1.0, 0.0), 1e-10), Err(Error::OutsideDisk { .. })));
    }

    #[test]
    fn cantor_variance_is_one_eighth() {
        let SingularMeasure::SelfSimilar(s) = SingularMeasure::cantor(1.0, 1.0 / 3.0).unwrap() else { unreachable!() };
        assert_abs_diff_eq!(s.var, 0.125, epsilon = 1e-15);
        assert_abs_diff_eq!(s.mean, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn kernel_second_derivative() {
        let z = Complex64::from_polar(0.7, 1.1);
        let t = 0.4;
        let k = |t: f64| kernel(Complex64::from_polar(1.0, t), z);
        let h = 1e-4;
        let fd = (k(t + h) - 2.0 * k(t) + k(t - h)) / (h * h);
        assert!((fd - kernel_dt2(Complex64::from_polar(1.0, t), z)).norm() < 1e-6);
    }

    #[test]
    fn cantor_herglotz_at_origin_is_mass() {
        let nu = SingularMeasure::cantor(1.5, 1.0 / 3.0).unwrap();
        let h = nu.herglotz(Complex64::new(0.0, 0.0), 1e-12).unwrap();
        assert_abs_diff_eq!(h.value.re, 1.5, epsilon = 1e-12);
    }

    #[test]
    fn cantor_herglotz_matches_deep_atomic_approximation() {
        // Oracle: replace ν by equal atoms at generation-16 cell midpoints.
        let nu = SingularMeasure::cantor(1.0, 1.0 / 3.0).unwrap();
        let z = Complex64::from_polar(0.9, 0.4);
        let got = nu.herglotz(z, 1e-11).unwrap();
        let SingularMeasure::SelfSimilar(s) = &nu else { unreachable!() };
        let cells = s.generation(16);
        let mut oracle = Complex64::new(0.0, 0.0);
        for c in &cells {
            let w = Complex64::from_polar(1.0, TAU * (c.start + c.width / 2.0));
            oracle += c.mass * (w + z) / (w - z);
        }
        assert!((got.value - oracle).norm() < 1e-9, "{} vs {}", got.value, oracle);
        assert!(got.error_bound <= 1e-9);
    }

    #[test]
    fn quadrature_budget_reported() {
        let s = SelfSimilarMeasure::cantor(1.0, 1.0 / 3.0).unwrap().with_max_depth(3);
        let nu = SingularMeasure::SelfSimilar(s);
        let r = nu.herglotz(Complex64::from_polar(0.99, 0.0), 1e-12);
        assert!(matches!(r, Err(Error::QuadratureBudget { .. })));
    }

    #[test]
    fn sup_ratio_single_atom() {
        let nu = SingularMeasure::atom(0.0, 3.0).unwrap();
        let r = nu.sup_arc_ratio(0.01).unwrap();
        assert_abs_diff_eq!(r.ratio, 300.0, epsilon = 1e-9);
        assert!(r.exact);
    }

    #[test]
    fn sup_ratio_heavier_atom_dominates() {
        let nu = SingularMeasure::atomic([(0.0, 1.0), (2.0, 2.0)]).unwrap();
        let eta = 0.01;
        let r = nu.sup_arc_ratio(eta).unwrap();
        assert_abs_diff_eq!(r.ratio, 2.0 / eta, epsilon = 1e-9);
        assert!(r.window.contains(2.0));
    }

    #[test]
    fn sup_ratio_merges_nearby_atoms() {
        let nu = SingularMeasure::atomic([(0.0, 1.0), (0.01, 1.0), (TAU - 0.01, 1.0)]).unwrap();
        let r = nu.sup_arc_ratio(0.01).unwrap();
        assert_abs_diff_eq!(r.ratio * 0.01, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn sup_ratio_cantor_generation_oracle() {
        let nu = SingularMeasure::cantor(1.0, 1.0 / 3.0).unwrap();
        for m in 1..7 {
            let eta = 3f64.powi(-m);
            let r = nu.sup_arc_ratio(eta).unwrap();
            assert!(r.ratio >= 1.5f64.powi(m) * (1.0 - 1e-12), "m={m}: {}", r.ratio);
            assert!(r.ratio * eta <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn descriptors_parse() {
        let nu = SingularMeasure::from_json_str(r#"{"type":"atomic","atoms":[[0,"0.5"],[3.0,0.25]]}"#).unwrap();
        assert_abs_diff_eq!(nu.total_mass(), 0.75, epsilon = 1e-15);
        let nu = SingularMeasure::from_json_str(r#"{"type":"cantor","mass":2}"#).unwrap();
        assert_eq!(nu.total_mass(), 2.0);
        let nu = SingularMeasure::from_json_str(r#"{"type":"cover","name":"point","angle":1.0}"#).unwrap();
        assert_eq!(nu.total_mass(), 1.0);
        assert!(SingularMeasure::from_json_str(r#"{"type":"atomic","atoms":[[0,-1]]}"#).is_err());
        assert!(SingularMeasure::from_json_str(r#"{"type":"cover","name":"nope"}"#).is_err());
    }

    #[test]
    fn rejects_overlapping_pieces() {
        let r = SelfSimilarMeasure::new(
            Arc::whole(),
            vec![Piece { ratio: 0.4, offset: 0.0, prob: 0.5 }, Piece { ratio: 0.4, offset: 0.3, prob: 0.5 }],
            1.0,
            10,
        );
        assert!(r.is_err());
    }
}
