//! Besicovitch measure functions for closed null sets of the circle, their
//! premeasure bounds, and the ε-sequence that controls how fast `δₙ(θ)` must
//! decay for measures carried by such a set.
//!
//! A closed set `E` is presented by a [`CoverProvider`]: for each level it
//! returns a finite cover of `E` by arcs, finer as the level grows. Covers are
//! summarized by length classes (`count` arcs of a common length), which keeps
//! deep Cantor generations (`2^137` arcs) representable.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::inner::{pi_plus_one_sq, DeltaOptions, InnerFunction};
use crate::measures::{Arc, SingularMeasure};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LengthClass {
    pub length: f64,
    /// Number of arcs of this length; a float so that `2^137` fits.
    pub count: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cover {
    pub level: usize,
    pub classes: Vec<LengthClass>,
}

impl Cover {
    pub fn from_arcs(level: usize, arcs: &[Arc]) -> Self {
        let mut classes: Vec<LengthClass> = Vec::new();
        for a in arcs {
            match classes.iter_mut().find(|c| c.length == a.length()) {
                Some(c) => c.count += 1.0,
                None => classes.push(LengthClass { length: a.length(), count: 1.0 }),
            }
        }
        Cover { level, classes }
    }

    pub fn total_length(&self) -> f64 {
        self.classes.iter().map(|c| c.count * c.length).sum()
    }

    pub fn min_length(&self) -> f64 {
        self.classes.iter().map(|c| c.length).fold(f64::INFINITY, f64::min)
    }

    pub fn max_length(&self) -> f64 {
        self.classes.iter().map(|c| c.length).fold(0.0, f64::max)
    }

    pub fn arc_count(&self) -> f64 {
        self.classes.iter().map(|c| c.count).sum()
    }
}

/// Source of finite arc covers of a compact set, indexed by level `≥ 1`.
pub trait CoverProvider: Send + Sync {
    fn cover(&self, level: usize) -> Cover;
    /// Whether the level-`level` cover contains the point (turns), treating
    /// arcs as closed.
    fn covers_point(&self, level: usize, turns: f64) -> bool;
    fn max_level(&self) -> usize;
    fn name(&self) -> &str;
}

/// Symmetric Cantor set on the whole circle with pieces of relative length
/// `1/scale`; `scale = 3` is the middle-thirds set.
#[derive(Debug, Clone)]
pub struct CantorCover {
    scale: f64,
}

impl CantorCover {
    pub fn new(scale: f64) -> Result<Self> {
        if !(scale > 2.0 && scale.is_finite()) {
            return Err(Error::InvalidArgument(format!("Cantor scale {scale} must exceed 2")));
        }
        Ok(CantorCover { scale })
    }
}

impl CoverProvider for CantorCover {
    fn cover(&self, level: usize) -> Cover {
        Cover {
            level,
            classes: vec![LengthClass { length: 1.0 / self.scale.powi(level as i32), count: 2f64.powi(level as i32) }],
        }
    }

    fn covers_point(&self, level: usize, turns: f64) -> bool {
        // Digits beyond the f64 resolution of `turns` cannot be decided;
        // the check stops once the rescaled error would exceed 1e-3.
        let resolvable = ((1e-3 / f64::EPSILON).ln() / self.scale.ln()).floor() as usize;
        let slack = 1e-12;
        let mut x = turns.rem_euclid(1.0);
        if x > 1.0 - slack {
            x -= 1.0;
        }
        for _ in 0..level.min(resolvable) {
            if x <= 1.0 / self.scale + slack {
                x = (x * self.scale).max(0.0);
            } else if x >= 1.0 - 1.0 / self.scale - slack {
                x = (x * self.scale - (self.scale - 1.0)).min(1.0);
            } else {
                return false;
            }
        }
        true
    }

    fn max_level(&self) -> usize {
        // 1/scale^level stays a normal f64 well past this
        (600.0 / self.scale.log2()) as usize
    }

    fn name(&self) -> &str {
        "cantor"
    }
}

/// A single point covered at level `n` by one arc of length `base⁻ⁿ`.
#[derive(Debug, Clone)]
pub struct PointCover {
    angle: f64,
    base: f64,
}

impl PointCover {
    pub fn new(angle: f64, base: f64) -> Result<Self> {
        if !(base > 1.0) {
            return Err(Error::InvalidArgument(format!("base {base} must exceed 1")));
        }
        Ok(PointCover { angle, base })
    }
}

impl CoverProvider for PointCover {
    fn cover(&self, level: usize) -> Cover {
        Cover { level, classes: vec![LengthClass { length: self.base.powi(-(level as i32)), count: 1.0 }] }
    }

    fn covers_point(&self, level: usize, turns: f64) -> bool {
        let arc = Arc::new(self.angle, self.base.powi(-(level as i32)).min(1.0)).expect("valid length");
        arc.contains_turns_closed(turns, 1e-15)
    }

    fn max_level(&self) -> usize {
        (600.0 / self.base.log2()) as usize
    }

    fn name(&self) -> &str {
        "point"
    }
}

/// Covers supplied by a callback returning explicit arcs per level.
pub struct FnCover<F: Fn(usize) -> Vec<Arc> + Send + Sync> {
    f: F,
    max_level: usize,
    name: String,
}

impl<F: Fn(usize) -> Vec<Arc> + Send + Sync> FnCover<F> {
    pub fn new(name: impl Into<String>, max_level: usize, f: F) -> Self {
        FnCover { f, max_level, name: name.into() }
    }
}

impl<F: Fn(usize) -> Vec<Arc> + Send + Sync> CoverProvider for FnCover<F> {
    fn cover(&self, level: usize) -> Cover {
        Cover::from_arcs(level, &(self.f)(level))
    }

    fn covers_point(&self, level: usize, turns: f64) -> bool {
        (self.f)(level).iter().any(|a| a.contains_turns_closed(turns, 1e-15))
    }

    fn max_level(&self) -> usize {
        self.max_level
    }

    fn name(&self) -> &str {
        &self.name
    }
}

/// Compact subset of the circle known through its covers.
pub struct CompactCircleSet {
    provider: Box<dyn CoverProvider>,
    measure_zero: bool,
}

impl std::fmt::Debug for CompactCircleSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CompactCircleSet")
            .field("provider", &self.provider.name())
            .field("measure_zero", &self.measure_zero)
            .finish()
    }
}

impl CompactCircleSet {
    pub fn new(provider: Box<dyn CoverProvider>, measure_zero: bool) -> Self {
        CompactCircleSet { provider, measure_zero }
    }

    pub fn cantor() -> Self {
        Self::new(Box::new(CantorCover { scale: 3.0 }), true)
    }

    pub fn point(angle: f64) -> Self {
        Self::new(Box::new(PointCover { angle, base: 5.0 }), true)
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "cantor" => Ok(Self::cantor()),
            "point" => Ok(Self::point(0.0)),
            other => Err(Error::Parse(format!("unknown built-in set {other:?}"))),
        }
    }

    pub fn provider(&self) -> &dyn CoverProvider {
        self.provider.as_ref()
    }

    pub fn is_measure_zero(&self) -> bool {
        self.measure_zero
    }
}

/// Measure function `h(t) = min{2ⁿt, 2ⁿ⁻¹t_{n−1}}` on `(t_n, t_{n−1}]`, known on
/// the prefix `(t_N, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureFunction {
    /// `t_0 = 1 > t_1 > … > t_N`.
    breakpoints: Vec<f64>,
    /// `covers[n-1]` is the stage-`n` cover.
    covers: Vec<Cover>,
}

impl MeasureFunction {
    pub fn stages(&self) -> usize {
        self.breakpoints.len() - 1
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn stage_cover(&self, n: usize) -> Option<&Cover> {
        if n == 0 {
            None
        } else {
            self.covers.get(n - 1)
        }
    }

    pub fn covers(&self) -> &[Cover] {
        &self.covers
    }

    /// `h(t)` for `t ∈ (t_N, 1]`.
    pub fn h_eval(&self, t: f64) -> Result<f64> {
        let last = *self.breakpoints.last().expect("t_0 always present");
        if !(t > last) {
            return Err(Error::PrefixExhausted { t, last });
        }
        if t > 1.0 {
            return Err(Error::InvalidArgument(format!("t = {t} exceeds 1")));
        }
        Ok(self.eval_on_closure(t))
    }

    /// `h(t_n) = 2ⁿ t_n`, also defined at the last stored breakpoint.
    pub fn value_at_breakpoint(&self, n: usize) -> Option<f64> {
        self.breakpoints.get(n).map(|t| 2f64.powi(n as i32) * t)
    }

    /// Right limit `lim_{s→t_n⁺} h(s)`, evaluated with the stage-`n` branch.
    pub fn right_limit_at_breakpoint(&self, n: usize) -> Option<f64> {
        if n == 0 || n >= self.breakpoints.len() {
            return None;
        }
        let t = self.breakpoints[n];
        Some((2f64.powi(n as i32) * t).min(2f64.powi(n as i32 - 1) * self.breakpoints[n - 1]))
    }

    /// Evaluation on `[t_N, 1]`; `t_N` itself takes the limit value `2^N t_N`.
    fn eval_on_closure(&self, t: f64) -> f64 {
        let n_last = self.stages();
        if t <= self.breakpoints[n_last] {
            return 2f64.powi(n_last as i32) * self.breakpoints[n_last];
        }
        // first n with t > t_n; then t ∈ (t_n, t_{n−1}]
        let n = self.breakpoints.partition_point(|&b| b >= t);
        let n_i = n as i32;
        (2f64.powi(n_i) * t).min(2f64.powi(n_i - 1) * self.breakpoints[n - 1])
    }

    /// `Σ_{I ∈ 𝓘ₙ} h(|I|)`, the premeasure bound at scale `t_{n−1}`.
    pub fn premeasure_estimate(&self, n: usize) -> Result<f64> {
        let cover = self
            .stage_cover(n)
            .ok_or_else(|| Error::InvalidArgument(format!("stage {n} outside 1..={}", self.stages())))?;
        Ok(premeasure_of(self, cover))
    }
}

/// `Σ h(|I|)` over an arbitrary cover whose arcs lie in the computed prefix.
pub fn premeasure_of(h: &MeasureFunction, cover: &Cover) -> f64 {
    cover.classes.iter().map(|c| c.count * h.eval_on_closure(c.length)).sum()
}

/// Besicovitch construction: `t_0 = 1`, `t_n = min{min_{I∈𝓘ₙ}|I|, t_{n−1}/4}`,
/// where each stage cover has total length `< 4⁻ⁿ` and arcs shorter than
/// `t_{n−1}`. Levels are requested from the provider until both hold.
pub fn besicovitch_build(set: &CompactCircleSet, stages: usize) -> Result<MeasureFunction> {
    if !set.measure_zero {
        return Err(Error::InvalidArgument("set is not declared to have measure zero".into()));
    }
    let p = set.provider();
    let mut breakpoints = vec![1.0];
    let mut covers = Vec::with_capacity(stages);
    let mut level = 0;
    for n in 1..=stages {
        let budget = 4f64.powi(-(n as i32));
        let prev = breakpoints[n - 1];
        let found = loop {
            level += 1;
            if level > p.max_level() {
                return Err(Error::CoverBudget { stage: n });
            }
            let c = p.cover(level);
            if c.total_length() < budget && c.max_length() < prev {
                break c;
            }
        };
        breakpoints.push(found.min_length().min(prev / 4.0));
        covers.push(found);
    }
    Ok(MeasureFunction { breakpoints, covers })
}

/// Same construction from explicitly given stage covers; a cover that breaks
/// the length budget or the `|I| < t_{n−1}` bound is rejected with its stage.
pub fn besicovitch_from_covers(covers: Vec<Cover>) -> Result<MeasureFunction> {
    let mut breakpoints = vec![1.0];
    for (i, c) in covers.iter().enumerate() {
        let n = i + 1;
        let prev = breakpoints[i];
        if c.classes.is_empty() || !(c.total_length() < 4f64.powi(-(n as i32))) || !(c.max_length() < prev) {
            return Err(Error::CoverBudget { stage: n });
        }
        breakpoints.push(c.min_length().min(prev / 4.0));
    }
    Ok(MeasureFunction { breakpoints, covers })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpsilonRow {
    pub n: usize,
    /// `t★_n`: where `h(t)/(−t log(1−t))` first drops to `n(π+1)²`.
    pub t_star: f64,
    /// `ε_n = (1 − t★_{n+1})^{n/2}`.
    pub eps: f64,
    pub u: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsilonTable {
    pub rows: Vec<EpsilonRow>,
    /// `t★_1 … t★_{N+1}`.
    pub t_stars: Vec<f64>,
}

impl EpsilonTable {
    pub fn eps(&self, n: usize) -> Option<f64> {
        self.rows.get(n.checked_sub(1)?).map(|r| r.eps)
    }

    pub fn t_star(&self, n: usize) -> Option<f64> {
        self.t_stars.get(n.checked_sub(1)?).copied()
    }
}

fn ratio(h: &MeasureFunction, t: f64) -> f64 {
    if t >= 1.0 {
        return 0.0;
    }
    h.eval_on_closure(t) / (-t * (-t).ln_1p())
}

/// Locate `t★ = inf{t : ratio(t) ≤ threshold}` by scanning the smooth pieces of
/// `h` upward from the deepest breakpoint and bisecting the first crossing.
fn threshold_crossing(h: &MeasureFunction, threshold: f64, tol: f64) -> Result<f64> {
    let n_last = h.stages();
    let t_last = h.breakpoints[n_last];
    // Below t_N: h(t)/t ≥ 2^N and −log(1−t) ≤ t/(1−t), so ratio ≥ 2^N (1 − t_N).
    let floor = 2f64.powi(n_last as i32) * (1.0 - t_last);
    if !(floor > threshold) {
        let need = ((threshold / (1.0 - t_last)).log2().ceil() as usize + 1).max(n_last + 1);
        return Err(Error::NeedDeeperCovers { stage: need });
    }
    let mut nodes: Vec<f64> = Vec::with_capacity(2 * n_last + 1);
    for k in (1..=n_last).rev() {
        nodes.push(h.breakpoints[k]);
        nodes.push(h.breakpoints[k - 1] / 2.0);
    }
    nodes.push(1.0);
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    let mut lo = nodes[0];
    for &hi_node in &nodes[1..] {
        if ratio(h, hi_node) <= threshold {
            let (mut a, mut b) = (lo, hi_node);
            for _ in 0..200 {
                if b - a <= tol * b {
                    break;
                }
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                if ratio(h, mid) <= threshold {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            return Ok(b);
        }
        lo = hi_node;
    }
    unreachable!("ratio(1) = 0 is always below the threshold")
}

/// ε-table of length `len`: needs `t★_1 … t★_{len+1}`.
pub fn epsilon_sequence(h: &MeasureFunction, len: usize) -> Result<EpsilonTable> {
    epsilon_sequence_with_tol(h, len, 1e-15)
}

pub fn epsilon_sequence_with_tol(h: &MeasureFunction, len: usize, tol: f64) -> Result<EpsilonTable> {
    if len == 0 {
        return Err(Error::InvalidArgument("ε-table length must be positive".into()));
    }
    let c = pi_plus_one_sq();
    let t_stars = (1..=len + 1).map(|k| threshold_crossing(h, k as f64 * c, tol)).collect::<Result<Vec<_>>>()?;
    let rows = (1..=len)
        .map(|n| {
            let eps = (0.5 * n as f64 * (-t_stars[n]).ln_1p()).exp();
            EpsilonRow { n, t_star: t_stars[n - 1], eps, u: 1.0 / eps }
        })
        .collect();
    Ok(EpsilonTable { rows, t_stars })
}

/// `log ε_{n−1} + (π+1)⁻² ((n−1)/2n) h(t★_n)/t★_n`, which vanishes when the
/// crossing is attained with equality.
pub fn epsilon_identity_residual(h: &MeasureFunction, table: &EpsilonTable, n: usize) -> Option<f64> {
    if n < 2 {
        return None;
    }
    let t = table.t_star(n)?;
    let log_eps = 0.5 * (n - 1) as f64 * (-t).ln_1p();
    let rhs = -((n - 1) as f64 / (2.0 * n as f64)) * h.eval_on_closure(t) / t / pi_plus_one_sq();
    Some(log_eps - rhs)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArcCertificate {
    pub eta: f64,
    pub window: Arc,
    pub mass: f64,
    pub h_eta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub n: usize,
    pub delta_n: f64,
    pub eps_sq: f64,
    /// Arc `I` with `|I| ∈ [t★_{n+1}, t★_n)` and `ν(I) > h(|I|)`, if one was found.
    pub certificate: Option<ArcCertificate>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessReport {
    pub checked: usize,
    pub witnesses: Vec<Witness>,
}

impl WitnessReport {
    pub fn indices(&self) -> Vec<usize> {
        self.witnesses.iter().map(|w| w.n).collect()
    }
}

/// Every `n ≤ max_n` with `δₙ(θ) < εₙ²`.
pub fn liminf_witness(
    theta: &InnerFunction,
    set: &CompactCircleSet,
    h: &MeasureFunction,
    table: &EpsilonTable,
    max_n: usize,
    opts: &DeltaOptions,
) -> Result<WitnessReport> {
    let nu = match (theta.singular_measure(), theta.zeros().is_empty()) {
        (Some(nu), true) => nu,
        _ => return Err(Error::InvalidArgument("need a singular inner function with non-zero measure".into())),
    };
    check_support(nu, set, h)?;
    let upto = max_n.min(table.rows.len());
    let mut witnesses = Vec::new();
    for n in 1..=upto {
        let eps = table.eps(n).expect("n within table");
        let d = theta.delta_n(n as u32, opts)?.delta_n;
        if d < eps * eps {
            witnesses.push(Witness {
                n,
                delta_n: d,
                eps_sq: eps * eps,
                certificate: arc_certificate(nu, h, table, n)?,
            });
        }
    }
    Ok(WitnessReport { checked: upto, witnesses })
}

fn arc_certificate(
    nu: &SingularMeasure,
    h: &MeasureFunction,
    table: &EpsilonTable,
    n: usize,
) -> Result<Option<ArcCertificate>> {
    let (Some(lo), Some(hi)) = (table.t_star(n + 1), table.t_star(n)) else {
        return Ok(None);
    };
    let tries = 8;
    for j in 0..tries {
        let eta = lo * (hi / lo).powf(j as f64 / tries as f64);
        let best = nu.sup_arc_ratio(eta)?;
        let mass = best.ratio * eta;
        let h_eta = h.h_eval(eta)?;
        if mass > h_eta {
            return Ok(Some(ArcCertificate { eta, window: best.window, mass, h_eta }));
        }
    }
    Ok(None)
}

/// Support of ν must lie in every stage cover of the construction.
pub fn check_support(nu: &SingularMeasure, set: &CompactCircleSet, h: &MeasureFunction) -> Result<()> {
    let points = nu.support_points(8);
    for cover in h.covers() {
        for &x in &points {
            if !set.provider().covers_point(cover.level, x) {
                return Err(Error::SupportCheck(format!(
                    "point at angle {:.6} is outside the level-{} cover of {}",
                    x * TAU,
                    cover.level,
                    set.provider().name()
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cantor_stage_one_uses_generation_four() {
        let h = besicovitch_build(&CompactCircleSet::cantor(), 3).unwrap();
        assert_eq!(h.stage_cover(1).unwrap().level, 4);
        assert_relative_eq!(h.breakpoints()[1], 3f64.powi(-4), max_relative = 1e-15);
        assert_relative_eq!(h.stage_cover(1).unwrap().arc_count(), 16.0);
    }

    #[test]
    fn ratio_and_continuity_at_first_breakpoint() {
        let h = besicovitch_build(&CompactCircleSet::cantor(), 4).unwrap();
        let t1 = h.breakpoints()[1];
        assert_eq!(h.h_eval(t1).unwrap() / t1, 2.0);
        assert_eq!(h.right_limit_at_breakpoint(1).unwrap(), h.h_eval(t1).unwrap());
    }

    #[test]
    fn one_point_recursion() {
        let h = besicovitch_build(&CompactCircleSet::point(0.0), 6).unwrap();
        for n in 1..=6 {
            assert_relative_eq!(h.breakpoints()[n], 5f64.powi(-(n as i32)), max_relative = 1e-14);
        }
        assert_relative_eq!(h.premeasure_estimate(3).unwrap(), h.value_at_breakpoint(3).unwrap());
        assert!(h.premeasure_estimate(3).unwrap() <= 0.125);
    }

    #[test]
    fn h_at_one_and_prefix_exhaustion() {
        let h = besicovitch_build(&CompactCircleSet::cantor(), 5).unwrap();
        assert_eq!(h.h_eval(1.0).unwrap(), 1.0);
        let last = h.breakpoints()[5];
        assert!(matches!(h.h_eval(last), Err(Error::PrefixExhausted { .. })));
        assert!(matches!(h.h_eval(last / 2.0), Err(Error::PrefixExhausted { .. })));
    }

    #[test]
    fn explicit_covers_budget_violation_names_stage() {
        let ok = Cover::from_arcs(1, &[Arc::new(0.0, 0.2).unwrap()]);
        let bad = Cover::from_arcs(2, &[Arc::new(0.0, 0.07).unwrap()]);
        assert!(matches!(besicovitch_from_covers(vec![ok.clone(), bad]), Err(Error::CoverBudget { stage: 2 })));
        let h = besicovitch_from_covers(vec![ok]).unwrap();
        assert_eq!(h.breakpoints()[1], 0.2);
    }

    #[test]
    fn not_null_set_rejected() {
        let set = CompactCircleSet::new(Box::new(CantorCover::new(3.0).unwrap()), false);
        assert!(besicovitch_build(&set, 2).is_err());
    }

    #[test]
    fn callback_provider() {
        let p = FnCover::new("two points", 30, |level| {
            let len = 6f64.powi(-(level as i32));
            vec![Arc::new(0.0, len).unwrap(), Arc::new(3.0, len).unwrap()]
        });
        let set = CompactCircleSet::new(Box::new(p), true);
        let h = besicovitch_build(&set, 5).unwrap();
        for n in 1..=5 {
            assert!(h.premeasure_estimate(n).unwrap() <= 0.5f64.powi(n as i32));
        }
        assert!(set.provider().covers_point(4, 3.0 / TAU));
        assert!(!set.provider().covers_point(4, 1.0 / TAU));
    }

    #[test]
    fn cantor_membership() {
        let c = CantorCover::new(3.0).unwrap();
        for x in [0.0, 0.25, 0.75, 1.0 / 3.0, 2.0 / 3.0] {
            assert!(c.covers_point(40, x), "{x}");
        }
        assert!(!c.covers_point(1, 0.5));
        assert!(!c.covers_point(3, 0.1 + 1.0 / 81.0));
    }

    #[test]
    fn epsilon_needs_depth() {
        let h = besicovitch_build(&CompactCircleSet::cantor(), 2).unwrap();
        assert!(matches!(epsilon_sequence(&h, 10), Err(Error::NeedDeeperCovers { .. })));
    }

    #[test]
    fn epsilon_identity_at_crossings() {
        let h = besicovitch_build(&CompactCircleSet::cantor(), 40).unwrap();
        let table = epsilon_sequence(&h, 12).unwrap();
        for n in 2..=12 {
            let r = epsilon_identity_residual(&h, &table, n).unwrap();
            assert!(r.abs() < 1e-8, "n={n} residual {r}");
        }
    }

    #[test]
    fn support_check_rejects_off_set_atom() {
        let h = besicovitch_build(&CompactCircleSet::cantor(), 40).unwrap();
        let theta = InnerFunction::singular(SingularMeasure::atom(0.5 * TAU, 1.0).unwrap());
        let table = epsilon_sequence(&h, 3).unwrap();
        let r = liminf_witness(&theta, &CompactCircleSet::cantor(), &h, &table, 3, &DeltaOptions::default());
        assert!(matches!(r, Err(Error::SupportCheck(_))));
    }

    #[test]
    fn witness_requires_singular_measure() {
        let h = besicovitch_build(&CompactCircleSet::cantor(), 40).unwrap();
        let table = epsilon_sequence(&h, 3).unwrap();
        let theta = InnerFunction::blaschke(&[num_complex::Complex64::new(0.5, 0.0)]).unwrap();
        assert!(liminf_witness(&theta, &CompactCircleSet::cantor(), &h, &table, 3, &DeltaOptions::default()).is_err());
    }
}
