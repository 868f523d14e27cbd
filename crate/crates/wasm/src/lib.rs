//! Browser bindings. Each export takes a text descriptor and returns JSON for
//! the page to plot.

use decaykit::charfn::{CharacteristicFunction, MatrixContraction};
use decaykit::inner::{DeltaOptions, MinModulusOptions};
use decaykit::numeric::singular_values;
use decaykit::InnerFunction;
use num_complex::Complex64;
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Debug, Serialize)]
pub struct Curve {
    pub n: u32,
    pub r: Vec<f64>,
    /// `−log m_θ(r)`; `m_θ` itself underflows near the circle.
    pub neg_log_m: Vec<f64>,
    /// `−n log r`.
    pub neg_log_rn: Vec<f64>,
    pub delta: f64,
    pub crossing: f64,
}

#[derive(Debug, Serialize)]
pub struct DeltaSequence {
    pub n: Vec<u32>,
    pub delta: Vec<f64>,
    /// `(1/δₙ − 1)/2`, the lower bound for `‖S_θ⁻ⁿ‖`.
    pub lower: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct Heatmap {
    pub size: usize,
    /// Row-major over `[-1, 1]²`, top row first; `null` outside the disk.
    pub values: Vec<Option<f64>>,
    pub eigenvalues: Vec<[f64; 2]>,
    pub max: f64,
}

fn parse_inner(desc: &str) -> Result<InnerFunction, String> {
    InnerFunction::from_json_str(desc).map_err(|e| format!("inner function: {e}"))
}

pub fn curve(desc: &str, n: u32, samples: usize) -> Result<Curve, String> {
    if n == 0 {
        return Err("n must be at least 1".into());
    }
    let theta = parse_inner(desc)?;
    let samples = samples.clamp(8, 2000);
    // a coarser circle grid keeps the page responsive
    let opts = MinModulusOptions { grid: 1024, max_grid: 1 << 14, ..Default::default() };
    let mut out = Curve { n, r: vec![], neg_log_m: vec![], neg_log_rn: vec![], delta: 0.0, crossing: 0.0 };
    for k in 1..samples {
        let r = k as f64 / samples as f64;
        let m = theta.min_modulus(r, &opts).map_err(|e| format!("min_modulus: {e}"))?;
        out.r.push(r);
        out.neg_log_m.push(m.neg_log);
        out.neg_log_rn.push(-(n as f64) * r.ln());
    }
    let d = theta.delta_n(n, &DeltaOptions::default()).map_err(|e| format!("delta_n: {e}"))?;
    out.delta = d.delta_n;
    out.crossing = d.crossing_radius;
    Ok(out)
}

pub fn sequence(desc: &str, max_n: u32) -> Result<DeltaSequence, String> {
    let theta = parse_inner(desc)?;
    let opts = DeltaOptions::default();
    let mut out = DeltaSequence { n: vec![], delta: vec![], lower: vec![] };
    for n in 1..=max_n.clamp(1, 60) {
        let d = theta.delta_n(n, &opts).map_err(|e| format!("delta_n: {e}"))?.delta_n;
        out.n.push(n);
        out.delta.push(d);
        out.lower.push(0.5 * (1.0 / d - 1.0));
    }
    Ok(out)
}

pub fn heatmap(csv: &str, size: usize) -> Result<Heatmap, String> {
    let t = MatrixContraction::from_csv(csv).map_err(|e| format!("matrix: {e}"))?;
    let cf = CharacteristicFunction::new(t.clone()).map_err(|e| format!("characteristic function: {e}"))?;
    let size = size.clamp(8, 400);
    let mut values = Vec::with_capacity(size * size);
    let mut max: f64 = 0.0;
    for i in 0..size {
        let y = 1.0 - 2.0 * (i as f64 + 0.5) / size as f64;
        for j in 0..size {
            let x = -1.0 + 2.0 * (j as f64 + 0.5) / size as f64;
            let lam = Complex64::new(x, y);
            if lam.norm() >= 1.0 {
                values.push(None);
                continue;
            }
            let s = match cf.theta_eval(lam) {
                Ok(th) => singular_values(&th).last().copied().unwrap_or(0.0),
                Err(_) => 0.0,
            };
            max = max.max(s);
            values.push(Some(s));
        }
    }
    let eigenvalues = t.eigenvalues().iter().map(|z| [z.re, z.im]).collect();
    Ok(Heatmap { size, values, eigenvalues, max })
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

/// `−log m_θ(r)` against `−n log r` on `(0, 1)`, with δₙ and the crossing radius.
#[wasm_bindgen(js_name = mthetaCurve)]
pub fn mtheta_curve(desc: &str, n: u32, samples: usize) -> Result<String, JsError> {
    to_js(curve(desc, n, samples))
}

/// δₙ for `n = 1..=max_n` with the lower bound for `‖S_θ⁻ⁿ‖`.
#[wasm_bindgen(js_name = deltaSequence)]
pub fn delta_sequence(desc: &str, max_n: u32) -> Result<String, JsError> {
    to_js(sequence(desc, max_n))
}

/// σ_min(Θ_T(λ)) on a `size × size` grid over the disk.
#[wasm_bindgen(js_name = sigmaHeatmap)]
pub fn sigma_heatmap(csv: &str, size: usize) -> Result<String, JsError> {
    to_js(heatmap(csv, size))
}

#[cfg(test)]
mod tests {
    use super::*;

    const ATOM: &str = r#"{"singular":{"type":"atomic","atoms":[[0,1]]}}"#;

    #[test]
    fn curve_crosses_at_delta() {
        let c = curve(ATOM, 3, 50).unwrap();
        assert_eq!(c.r.len(), 49);
        assert!((c.crossing.powi(3) - c.delta).abs() < 1e-12);
        // −log m grows and −n log r falls, so they cross once
        let sign: Vec<bool> = c.neg_log_m.iter().zip(&c.neg_log_rn).map(|(a, b)| a < b).collect();
        assert_eq!(sign.windows(2).filter(|w| w[0] != w[1]).count(), 1);
    }

    #[test]
    fn sequence_decreases_and_bound_grows() {
        let s = sequence(ATOM, 10).unwrap();
        assert!(s.delta.windows(2).all(|w| w[1] < w[0]));
        assert!(s.lower.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn heatmap_vanishes_near_eigenvalues() {
        let h = heatmap("0.5,0,0,0\n0,0,-0.3,0.2\n", 41).unwrap();
        assert_eq!(h.values.len(), 41 * 41);
        assert!(h.max <= 1.0 + 1e-12);
        // the grid centre is λ = 0, where Θ_T(0) = −T
        let centre = h.values[20 * 41 + 20].unwrap();
        assert!((centre - 0.3f64.hypot(0.2)).abs() < 1e-12);
    }

    #[test]
    fn bad_input_is_an_error() {
        assert!(curve("{", 1, 10).is_err());
        assert!(heatmap("2,0\n", 10).unwrap_err().contains("not a contraction"));
    }
}
