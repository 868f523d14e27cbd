use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use decaykit::charfn::{
    defects, delta_n_profile, langer_split, opestimate_check, validate_model, CharacteristicFunction,
    ModelCheckOptions, OpDeltaOptions,
};
use decaykit::hausdorff::{besicovitch_build, epsilon_sequence, liminf_witness};
use decaykit::inner::{DeltaOptions, MinModulusOptions};
use decaykit::modelspace::{build_truncation, defect_rank_check, negpower_norm, sarason_norm, ModelOptions};
use decaykit::verify::{self, Check};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::report::{Record, Table};
use crate::{input, op, Cli, CliError, Command, ModelCommand};

pub const THREADS_ENV: &str = "DECAYKIT_THREADS";

type Output = (Vec<Record>, Option<Table>);

pub fn dispatch(cli: &Cli) -> Result<Output, CliError> {
    let tol = cli.tol;
    let start = Instant::now();
    let (mut records, table) = match &cli.command {
        Command::Eval { inner, z } => eval(inner, z, tol.unwrap_or(1e-12))?,
        Command::Mtheta { inner, r, grid } => mtheta(inner, r, *grid)?,
        Command::Deltan { inner, n } => deltan(inner, n, tol.unwrap_or(1e-12))?,
        Command::Hausdorff { set, stages } => hausdorff(set, *stages, tol.unwrap_or(1e-12))?,
        Command::Epsilon { set, stages, n, inner } => epsilon(set, *stages, *n, inner)?,
        Command::Modelspace { which: ModelCommand::Negpowers { inner, n, m } } => {
            negpowers(inner, n, m, tol.unwrap_or(1e-6))?
        }
        Command::Modelspace { which: ModelCommand::Matrix { inner, m } } => matrix(inner, *m, tol.unwrap_or(1e-2))?,
        Command::Sarason { inner, phi, k } => sarason(inner, phi, *k, tol.unwrap_or(1e-8))?,
        Command::Charfn { matrix, check, n } => charfn(matrix, check, n, tol.unwrap_or(1e-10))?,
        Command::Verify { suite } => return verify_suite(suite, cli.seed),
        Command::Rerun { .. } => unreachable!("rerun is resolved before dispatch"),
    };
    // single-operation commands share the wall time
    let secs = start.elapsed().as_secs_f64();
    for r in &mut records {
        r.runtime_secs = secs;
    }
    Ok((records, table))
}

fn c(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn eval(arg: &crate::InnerArg, zs: &[String], tol: f64) -> Result<Output, CliError> {
    let (theta, desc) = input::inner(arg)?;
    let mut table = Table::new(&["re", "im", "value_re", "value_im", "modulus"]);
    let mut worst: f64 = 0.0;
    let mut points = Vec::new();
    for s in zs {
        let z = input::point(s)?;
        let w = op("eval", theta.evaluate(z))?;
        worst = worst.max(w.norm());
        points.push(c(z));
        table.push(vec![json!(z.re), json!(z.im), json!(w.re), json!(w.im), json!(w.norm())]);
    }
    let rec = Record::new("eval", json!({"inner": desc, "z": points}), json!({"max_modulus": worst})).asserting(
        "|θ(z)| ≤ 1 on the disk",
        tol,
        worst <= 1.0 + tol,
    );
    Ok((vec![rec], Some(table)))
}

fn mtheta(arg: &crate::InnerArg, radii: &str, grid: usize) -> Result<Output, CliError> {
    let (theta, desc) = input::inner(arg)?;
    let radii = input::floats("--r", radii)?;
    let opts = MinModulusOptions { grid, ..Default::default() };
    let mut table = Table::new(&["r", "min_modulus", "neg_log", "angle"]);
    let mut ok = true;
    for &r in &radii {
        let m = op("min_modulus", theta.min_modulus(r, &opts))?;
        ok &= (0.0..=1.0).contains(&m.value);
        table.push(vec![json!(r), json!(m.value), json!(m.neg_log), json!(m.angle)]);
    }
    let rec =
        Record::new("mtheta", json!({"inner": desc, "r": radii, "grid": grid}), json!({"rows": table.rows.len()}))
            .asserting("0 ≤ m_θ(r) ≤ 1", 0.0, ok);
    Ok((vec![rec], Some(table)))
}

fn deltan(arg: &crate::InnerArg, ns: &str, tol: f64) -> Result<Output, CliError> {
    let (theta, desc) = input::inner(arg)?;
    let ns = input::indices("--n", ns)?;
    let opts = DeltaOptions::default();
    let mut table = Table::new(&["n", "delta", "crossing_radius", "bracket_lo", "bracket_hi", "bracket_width"]);
    let mut deltas = Vec::with_capacity(ns.len());
    for &n in &ns {
        let d = op("delta_n", theta.delta_n(n, &opts))?;
        deltas.push(d.delta_n);
        table.push(vec![
            json!(n),
            json!(d.delta_n),
            json!(d.crossing_radius),
            json!(d.bracket.0),
            json!(d.bracket.1),
            json!(d.bracket_width),
        ]);
    }
    let mut sorted = ns.clone();
    sorted.sort_unstable();
    let monotone = sorted == ns && deltas.windows(2).all(|w| w[1] <= w[0] + tol);
    let rec = Record::new("deltan", json!({"inner": desc, "n": ns}), json!({"delta": deltas})).asserting(
        "δₙ nonincreasing in n",
        tol,
        monotone,
    );
    Ok((vec![rec], Some(table)))
}

fn hausdorff(set: &str, stages: usize, tol: f64) -> Result<Output, CliError> {
    let (set, desc) = input::set(set)?;
    let h = op("besicovitch_build", besicovitch_build(&set, stages))?;
    let mut table =
        Table::new(&["stage", "t", "h_at_t", "right_limit", "budget", "premeasure", "arcs", "total_length"]);
    let (mut budget_ok, mut jump) = (true, 0.0f64);
    for n in 1..=h.stages() {
        let t = h.breakpoints()[n];
        let value = h.value_at_breakpoint(n).expect("stage in range");
        let right = h.right_limit_at_breakpoint(n).expect("stage in range");
        let budget = 0.5f64.powi(n as i32);
        let pre = op("premeasure_estimate", h.premeasure_estimate(n))?;
        let cover = h.stage_cover(n).expect("stage in range");
        budget_ok &= value <= budget && pre <= budget * (1.0 + tol);
        jump = jump.max((value - right).abs());
        table.push(vec![
            json!(n),
            json!(t),
            json!(value),
            json!(right),
            json!(budget),
            json!(pre),
            json!(cover.arc_count()),
            json!(cover.total_length()),
        ]);
    }
    let inputs = json!({"set": desc, "stages": stages});
    let records = vec![
        Record::new("budget", inputs.clone(), json!({"stages": h.stages()})).asserting(
            "h(tₙ) ≤ 2⁻ⁿ and premeasure(n) ≤ 2⁻ⁿ",
            tol,
            budget_ok,
        ),
        Record::new("continuity", inputs, json!({"max_jump": jump})).asserting(
            "h continuous at every breakpoint",
            0.0,
            jump == 0.0,
        ),
    ];
    Ok((records, Some(table)))
}

fn epsilon(set: &str, stages: usize, terms: usize, arg: &crate::InnerArg) -> Result<Output, CliError> {
    let (set, set_desc) = input::set(set)?;
    let h = op("besicovitch_build", besicovitch_build(&set, stages))?;
    let eps = op("epsilon_sequence", epsilon_sequence(&h, terms))?;
    let in_range = eps.rows.iter().all(|r| r.eps > 0.0 && r.eps < 1.0);
    let mut records = vec![Record::new(
        "epsilon",
        json!({"set": set_desc, "stages": stages, "terms": terms}),
        json!({"terms": eps.rows.len()}),
    )
    .asserting("εₙ ∈ (0, 1) for every term", 0.0, in_range)];

    let mut witnessed = Vec::new();
    if arg.inner.is_some() || arg.measure.is_some() {
        let (theta, desc) = input::inner(arg)?;
        let w = op("liminf_witness", liminf_witness(&theta, &set, &h, &eps, terms, &DeltaOptions::default()))?;
        witnessed = w.indices();
        let found = !witnessed.is_empty();
        let list: Vec<Value> = w
            .witnesses
            .iter()
            .map(|x| json!({"n": x.n, "delta_n": x.delta_n, "eps_sq": x.eps_sq, "certified": x.certificate.is_some()}))
            .collect();
        records.push(
            Record::new(
                "witness",
                json!({"set": set_desc, "stages": stages, "terms": terms, "inner": desc}),
                json!({"checked": w.checked, "witnesses": list}),
            )
            .asserting("some n with δₙ < εₙ²", 0.0, found),
        );
    }
    let mut table = Table::new(&["n", "t_star", "eps", "eps_sq", "u", "witness"]);
    for r in &eps.rows {
        table.push(vec![
            json!(r.n),
            json!(r.t_star),
            json!(r.eps),
            json!(r.eps * r.eps),
            json!(r.u),
            json!(witnessed.contains(&r.n)),
        ]);
    }
    Ok((records, Some(table)))
}

fn negpowers(arg: &crate::InnerArg, ns: &str, ms: &str, tol: f64) -> Result<Output, CliError> {
    let (theta, desc) = input::inner(arg)?;
    let ns = input::indices("--n", ns)?;
    let mut schedule: Vec<usize> = input::indices("--M", ms)?.into_iter().map(|m| m as usize).collect();
    if theta.is_finite_blaschke() {
        // K_θ has dimension N; larger spans are degenerate
        schedule = vec![theta.zero_count()];
    }
    let (mopts, dopts) = (ModelOptions::default(), DeltaOptions::default());
    let mut table = Table::new(&["n", "M", "norm", "lower", "delta", "upper_shape", "fitted_constant", "stabilized"]);
    let mut ok = true;
    let mut constants = Vec::new();
    for &n in &ns {
        let b = op("negpower_norm", negpower_norm(&theta, n, &schedule, &mopts, &dopts))?;
        ok &= b.lower_bound_holds(tol);
        constants.push(b.fitted_constant);
        let m = b.trace.last().map(|t| t.m).unwrap_or(0);
        table.push(vec![
            json!(n),
            json!(m),
            json!(b.norm_estimate),
            json!(b.lower),
            json!(b.delta_n),
            json!(b.upper_shape),
            json!(b.fitted_constant),
            json!(b.stabilized),
        ]);
    }
    let lo = constants.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = constants.iter().copied().fold(0.0, f64::max);
    let rec = Record::new(
        "negpowers",
        json!({"inner": desc, "n": ns, "M": schedule}),
        json!({"fitted_constant_min": lo, "fitted_constant_max": hi}),
    )
    .asserting("‖S_θ⁻ⁿ‖ ≥ (1/δₙ − 1)/2 − tol", tol, ok);
    Ok((vec![rec], Some(table)))
}

fn matrix(arg: &crate::InnerArg, m: usize, tol: f64) -> Result<Output, CliError> {
    let (theta, desc) = input::inner(arg)?;
    let tr = op("build_truncation", build_truncation(&theta, m))?;
    let d = defect_rank_check(&tr);
    let mut table = Table::new(&["row", "col", "re", "im"]);
    let a = &tr.shift_matrix;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            table.push(vec![json!(i), json!(j), json!(a[(i, j)].re), json!(a[(i, j)].im)]);
        }
    }
    let ratio = d.section_ratio();
    let rec = Record::new(
        "shift_section",
        json!({"inner": desc, "M": m}),
        json!({
            "norm": tr.shift_norm(),
            "condition_number": tr.condition_number(),
            "defect_ratio": ratio,
            "compressed_defect_ratio": d.compressed_ratio(),
            "defect_singular_values": d.section,
        }),
    )
    .asserting("s₂/s₁ of I − A*A below tol", tol, ratio < tol);
    Ok((vec![rec], Some(table)))
}

fn sarason(arg: &crate::InnerArg, phi: &str, k: usize, tol: f64) -> Result<Output, CliError> {
    let (theta, desc) = input::inner(arg)?;
    let (symbol, phi_desc) = input::symbol(phi, &theta)?;
    let s = op("sarason_norm", sarason_norm(&theta, &symbol, k))?;
    let bound = symbol.sup_bound();
    let mut table = Table::new(&["K", "norm"]);
    for &(size, norm) in &s.trace {
        table.push(vec![json!(size), json!(norm)]);
    }
    let rec = Record::new(
        "sarason",
        json!({"inner": desc, "phi": phi_desc, "K": k}),
        json!({"norm": s.norm, "sup_bound": bound, "coefficient_error": s.coefficient_error}),
    )
    .asserting("‖φ(S_θ)‖ ≤ ‖φ‖∞", tol, s.norm <= bound + tol);
    Ok((vec![rec], Some(table)))
}

const CHARFN_CHECKS: &[&str] = &["bounds", "defects", "delta", "langer", "model"];

fn charfn(matrix: &str, check: &str, ns: &str, tol: f64) -> Result<Output, CliError> {
    let (t, desc) = input::matrix(matrix)?;
    let ns = input::indices("--n", ns)?;
    let selected: Vec<&str> = if check.trim() == "all" {
        CHARFN_CHECKS.to_vec()
    } else {
        check
            .split(',')
            .map(|s| {
                let s = s.trim();
                CHARFN_CHECKS.iter().copied().find(|c| *c == s).ok_or_else(|| CliError::Input {
                    flag: "--check",
                    origin: format!("{check:?}"),
                    message: format!("unknown check {s:?}; expected all or one of {}", CHARFN_CHECKS.join(", ")),
                })
            })
            .collect::<Result<_, _>>()?
    };
    let inputs = json!({"matrix": desc["matrix"], "n": ns});
    let opts = OpDeltaOptions::default();
    let mut records = Vec::new();
    let mut table = None;
    let needs_cf = selected.iter().any(|s| matches!(*s, "model" | "delta"));
    let cf = if needs_cf { Some(op("characteristic_function", CharacteristicFunction::new(t.clone()))?) } else { None };

    for name in selected {
        let rec = match name {
            "defects" => {
                let d = op("defects", defects(&t))?;
                let r = d.residuals(&t);
                let worst = r.square_t.max(r.square_tstar).max(r.intertwining);
                Record::new(
                    "defects",
                    inputs.clone(),
                    json!({"rank_t": d.rank_t, "rank_tstar": d.rank_tstar, "residuals": r}),
                )
                .asserting("defect residuals ≤ tol", tol, worst <= tol)
            }
            "model" => {
                let m = op(
                    "validate_model",
                    validate_model(cf.as_ref().expect("built above"), &ModelCheckOptions::default()),
                )?;
                let ok = m.spectrum_ok && m.purely_contractive;
                Record::new("model", inputs.clone(), serde_json::to_value(&m)?).asserting(
                    "Θ_T purely contractive, det Θ_T vanishes at eigenvalues",
                    1e-6,
                    ok,
                )
            }
            "delta" => {
                let d = op("delta_n", delta_n_profile(cf.as_ref().expect("built above"), &ns, &opts))?;
                let monotone = d.windows(2).all(|w| w[1].n < w[0].n || w[1].delta <= w[0].delta + tol);
                let vals: Vec<Value> =
                    d.iter().map(|x| json!({"n": x.n, "delta": x.delta, "argmin": c(x.argmin)})).collect();
                Record::new("delta", inputs.clone(), json!({ "delta": vals })).asserting(
                    "δₙ(Θ_T) nonincreasing in n",
                    tol,
                    monotone,
                )
            }
            "bounds" => {
                if !t.is_invertible() || !t.is_strict_spectral() {
                    Record::new(
                        "bounds",
                        inputs.clone(),
                        json!({"skipped": "T is not invertible with spectral radius below 1"}),
                    )
                    .asserting("skipped", 0.0, true)
                } else {
                    let est = op("opestimate_check", opestimate_check(&t, &ns, &opts))?;
                    let ok = est.iter().all(|e| e.holds(1e-9));
                    let mut tab = Table::new(&["n", "inverse_power_norm", "delta", "bound"]);
                    for e in &est {
                        tab.push(vec![json!(e.n), json!(e.inverse_power_norm), json!(e.delta), json!(e.bound)]);
                    }
                    table = Some(tab);
                    Record::new("bounds", inputs.clone(), json!({ "estimates": est })).asserting(
                        "‖T⁻ⁿ‖ ≥ (1/δₙ(Θ_T) − 1)/2",
                        1e-9,
                        ok,
                    )
                }
            }
            "langer" => {
                let split = langer_split(&t);
                let r = op("langer_split", split.residuals(&t))?;
                Record::new("langer", inputs.clone(), serde_json::to_value(r)?).asserting(
                    "split blocks < 1e-10, unitary part isometric to 1e-8, cnu part splits trivially",
                    1e-10,
                    r.holds(),
                )
            }
            _ => unreachable!("checked against CHARFN_CHECKS"),
        };
        records.push(rec);
    }
    Ok((records, table))
}

/// Worker count from the environment, at least 1.
fn threads() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&k| k > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

fn verify_suite(suite: &str, seed: u64) -> Result<Output, CliError> {
    let selected: Vec<&'static Check> = if suite.trim() == "all" {
        verify::checks().iter().collect()
    } else {
        suite
            .split(',')
            .map(|s| {
                verify::check_by_name(s.trim()).ok_or_else(|| CliError::Input {
                    flag: "--suite",
                    origin: format!("{suite:?}"),
                    message: format!("unknown check {:?}", s.trim()),
                })
            })
            .collect::<Result<_, _>>()?
    };
    let next = AtomicUsize::new(0);
    let done = Mutex::new(Vec::with_capacity(selected.len()));
    std::thread::scope(|s| {
        for _ in 0..threads().min(selected.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(check) = selected.get(i) else { break };
                let rec = verify::run_check(check, seed);
                done.lock().expect("no worker panics while holding the lock").push(Record::from(rec));
            });
        }
    });
    let records = done.into_inner().expect("workers joined");
    Ok((records, None))
}
