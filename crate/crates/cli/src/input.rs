//! Input descriptors: each may be a file path or the descriptor text itself.

use std::path::Path;

use decaykit::charfn::MatrixContraction;
use decaykit::hausdorff::CompactCircleSet;
use decaykit::modelspace::Symbol;
use decaykit::{InnerFunction, SingularMeasure};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::{op, CliError, InnerArg};

const INPUT_FLAGS: &[&str] = &["--inner", "--measure", "--matrix", "--set", "--phi"];
/// Stored separately in the config, or irrelevant to the numbers.
const DROPPED_FLAGS: &[&str] = &["--seed", "--format", "--out"];

pub struct Source {
    pub origin: String,
    pub text: String,
}

pub fn read(value: &str) -> Result<Source, CliError> {
    let p = Path::new(value);
    if !value.trim_start().starts_with(['{', '[']) && p.is_file() {
        Ok(Source { origin: value.to_string(), text: std::fs::read_to_string(p)? })
    } else {
        Ok(Source { origin: "(inline)".into(), text: value.to_string() })
    }
}

/// Arguments after the program name with file inputs inlined and the
/// seed/format/output flags removed.
pub fn normalize(args: &[String]) -> Result<Vec<String>, CliError> {
    let mut out = Vec::with_capacity(args.len());
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let (flag, inline) = match a.split_once('=') {
            Some((f, v)) if f.starts_with("--") => (f, Some(v.to_string())),
            _ => (a.as_str(), None),
        };
        if DROPPED_FLAGS.contains(&flag) {
            if inline.is_none() {
                it.next();
            }
            continue;
        }
        if INPUT_FLAGS.contains(&flag) {
            let value = match inline {
                Some(v) => v,
                None => it.next().cloned().unwrap_or_default(),
            };
            out.push(format!("{flag}={}", read(&value)?.text));
            continue;
        }
        out.push(a.clone());
    }
    Ok(out)
}

fn bad(flag: &'static str, src: &Source, message: impl ToString) -> CliError {
    CliError::Input { flag, origin: src.origin.clone(), message: message.to_string() }
}

fn json_of(flag: &'static str, src: &Source) -> Result<Value, CliError> {
    serde_json::from_str(&src.text).map_err(|e| bad(flag, src, format!("parse error: {e}")))
}

/// The inner function and its descriptor as JSON.
pub fn inner(arg: &InnerArg) -> Result<(InnerFunction, Value), CliError> {
    match (&arg.inner, &arg.measure) {
        (Some(s), _) => {
            let src = read(s)?;
            let v = json_of("--inner", &src)?;
            let f = InnerFunction::from_json_str(&src.text).map_err(|e| bad("--inner", &src, e))?;
            Ok((f, v))
        }
        (None, Some(s)) => {
            let src = read(s)?;
            let v = json_of("--measure", &src)?;
            let nu = SingularMeasure::from_json_value(&v).map_err(|e| bad("--measure", &src, e))?;
            Ok((InnerFunction::singular(nu), json!({ "singular": v })))
        }
        (None, None) => Err(CliError::Usage("one of --inner or --measure is required".into())),
    }
}

/// `{"name": ..., "angle": ...}` or a bare name.
pub fn set(value: &str) -> Result<(CompactCircleSet, Value), CliError> {
    let src = read(value)?;
    let t = src.text.trim();
    let (name, angle) = if t.starts_with('{') {
        let v = json_of("--set", &src)?;
        let name = v["name"].as_str().ok_or_else(|| bad("--set", &src, "missing string field \"name\""))?;
        (name.to_string(), v["angle"].as_f64())
    } else {
        (t.to_string(), None)
    };
    let set = match (name.as_str(), angle) {
        ("point", Some(a)) => CompactCircleSet::point(a),
        _ => CompactCircleSet::by_name(&name).map_err(|e| bad("--set", &src, e))?,
    };
    Ok((set, json!({ "name": name, "angle": angle })))
}

pub fn matrix(value: &str) -> Result<(MatrixContraction, Value), CliError> {
    let src = read(value)?;
    // contraction violations are module errors; only syntax is an input error
    let t = match MatrixContraction::from_csv(&src.text) {
        Err(decaykit::Error::Parse(m)) => return Err(bad("--matrix", &src, format!("parse error: {m}"))),
        other => op("charfn", other)?,
    };
    let rows: Vec<Vec<[f64; 2]>> =
        (0..t.dim()).map(|i| (0..t.dim()).map(|j| [t.matrix()[(i, j)].re, t.matrix()[(i, j)].im]).collect()).collect();
    Ok((t, json!({ "matrix": rows })))
}

pub fn symbol(value: &str, theta: &InnerFunction) -> Result<(Symbol, Value), CliError> {
    let src = read(value)?;
    let poly = |c: Vec<Complex64>| {
        Ok((Symbol::Polynomial(c.clone()), json!(c.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>())))
    };
    match src.text.trim() {
        "theta" => Ok((Symbol::Inner(theta.clone()), json!("theta"))),
        "one" => poly(vec![Complex64::new(1.0, 0.0)]),
        "z" => poly(vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]),
        _ => {
            let v = json_of("--phi", &src)?;
            let items = v.as_array().ok_or_else(|| bad("--phi", &src, "expected a JSON array of coefficients"))?;
            let coeffs = items
                .iter()
                .enumerate()
                .map(|(k, c)| match c {
                    Value::Number(x) => Ok(Complex64::new(x.as_f64().unwrap_or(f64::NAN), 0.0)),
                    Value::Array(p) if p.len() == 2 && p.iter().all(Value::is_number) => {
                        Ok(Complex64::new(p[0].as_f64().unwrap_or(f64::NAN), p[1].as_f64().unwrap_or(f64::NAN)))
                    }
                    _ => Err(bad("--phi", &src, format!("coefficient {k}: expected a number or [re, im]"))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            poly(coeffs)
        }
    }
}

/// `a..b` (inclusive), a single value, or a comma list.
pub fn indices(flag: &'static str, s: &str) -> Result<Vec<u32>, CliError> {
    let err = |m: String| CliError::Input { flag, origin: format!("{s:?}"), message: m };
    let parse = |t: &str| t.trim().parse::<u32>().map_err(|e| err(format!("{t:?}: {e}")));
    let out: Vec<u32> = if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (parse(a)?, parse(b.trim_start_matches('='))?);
        (a..=b).collect()
    } else {
        s.split(',').map(parse).collect::<Result<_, _>>()?
    };
    if out.is_empty() {
        return Err(err("empty list".into()));
    }
    if out.contains(&0) {
        return Err(err("values must be at least 1".into()));
    }
    Ok(out)
}

pub fn floats(flag: &'static str, s: &str) -> Result<Vec<f64>, CliError> {
    let out = s
        .split(',')
        .map(|t| {
            t.trim().parse::<f64>().map_err(|e| CliError::Input {
                flag,
                origin: format!("{s:?}"),
                message: format!("{t:?}: {e}"),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    if out.is_empty() {
        return Err(CliError::Input { flag, origin: format!("{s:?}"), message: "empty list".into() });
    }
    Ok(out)
}

pub fn point(s: &str) -> Result<Complex64, CliError> {
    match floats("--z", s)?.as_slice() {
        [re] => Ok(Complex64::new(*re, 0.0)),
        [re, im] => Ok(Complex64::new(*re, *im)),
        _ => Err(CliError::Input { flag: "--z", origin: format!("{s:?}"), message: "expected re,im".into() }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strs(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn ranges_and_lists() {
        assert_eq!(indices("--n", "1..4").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(indices("--n", "3,5").unwrap(), vec![3, 5]);
        assert_eq!(indices("--n", "7").unwrap(), vec![7]);
        assert!(indices("--n", "0..3").is_err());
        assert!(indices("--n", "x").is_err());
    }

    #[test]
    fn normalize_inlines_files_and_drops_output_flags() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        std::fs::write(&p, r#"{"type":"atomic","atoms":[[0,1]]}"#).unwrap();
        let args = strs(&["deltan", "--measure", p.to_str().unwrap(), "--seed", "3", "--out=x.json", "--n", "1..3"]);
        let n = normalize(&args).unwrap();
        assert_eq!(n, strs(&["deltan", r#"--measure={"type":"atomic","atoms":[[0,1]]}"#, "--n", "1..3"]));
    }

    #[test]
    fn inline_measure_parses() {
        let arg = InnerArg { inner: None, measure: Some(r#"{"type":"atomic","atoms":[[0,0.5]]}"#.into()) };
        let (f, v) = inner(&arg).unwrap();
        assert!(f.singular_measure().is_some());
        assert!(v["singular"].is_object());
    }

    #[test]
    fn malformed_descriptor_reports_location() {
        let arg = InnerArg { inner: Some("{\"blaschke\": [[0.5, 0]],\n \"constant\": }".into()), measure: None };
        let e = inner(&arg).err().unwrap().to_string();
        assert!(e.contains("line 2"), "{e}");
    }

    #[test]
    fn points() {
        assert_eq!(point("0.5,-0.25").unwrap(), Complex64::new(0.5, -0.25));
        assert!(point("1,2,3").is_err());
    }
}
