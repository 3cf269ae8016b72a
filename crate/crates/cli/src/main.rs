//! `tlcell`: batch driver for the b(L) tables, the percolation check and
//! the boundary entropies. Tables go out as CSV, full reports as JSON.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use rayon::prelude::*;

use tlcell::linalg::max_abs;
use tlcell::models::{build_dilute_t, build_percolation_h, build_xxz, critical_x, Convention};
use tlcell::observables::{
    b_deformed, b_polymer_at, b_xxz, extrapolate_b, ising_boundary_entropy, ising_free_energy, loop_boundary_entropy,
    loop_free_energy, trousers, xxz_q, BMeasurement, FitResult, IsingBoundary,
};
use tlcell::reference;
use tlcell::spectral::{
    cluster_structure, extract_jordan_cell, full_spectrum, ground_state, LevelSelector, Normalization, Side,
    SpectrumOrder,
};
use tlcell::tl::{deformed_on, geometric_on, verify_basis_change, BasisChange, SpinSector};
use tlcell::C64;

const SCHEMA: &str = "tlcell-report/1";

#[derive(Parser, Debug)]
#[command(name = "tlcell", version, about = "Jordan cells and b(L) of Temperley-Lieb lattice models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Model parameter, `key=value` (values may be comma lists). Keys: x, y, n, n1, bc.
    #[arg(long = "model-param", value_name = "KEY=VALUE", global = true)]
    model_param: Vec<String>,
    /// Pass/fail threshold for `fixtures` and `percolation-check`.
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// b(L) of the XXZ chain at q = exp(i pi/3), L a multiple of 4.
    XxzB(Sizes),
    /// b(L) of dilute polymers (param x, default critical).
    PolymerB(Sizes),
    /// b(L) of the y-deformed percolation chain (param y, default 2).
    DeformedB(Sizes),
    /// Diagonalizability of the first degenerate percolation level (param y, default 1).
    PercolationCheck(Sizes),
    /// Ising boundary entropies (param bc = fixed, free or both).
    IsingEntropy(Sizes),
    /// Loop-model boundary entropy against the closed form (params n, n1).
    LoopEntropy(Sizes),
    /// Re-verify the embedded reference matrices and states.
    Fixtures,
}

#[derive(clap::Args, Debug)]
struct Sizes {
    /// System sizes, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    sizes: Vec<usize>,
}

type Params = BTreeMap<String, Vec<String>>;

fn parse_params(raw: &[String]) -> Result<Params, String> {
    let mut out = Params::new();
    for p in raw {
        let (k, v) = p.split_once('=').ok_or_else(|| format!("--model-param {p}: expected key=value"))?;
        let key = k.trim().to_string();
        if !["x", "y", "n", "n1", "bc"].contains(&key.as_str()) {
            return Err(format!("unknown model parameter {key}"));
        }
        out.entry(key).or_default().extend(v.split(',').map(|s| s.trim().to_string()));
    }
    Ok(out)
}

fn floats(params: &Params, key: &str, default: &[f64]) -> Result<Vec<f64>, String> {
    match params.get(key) {
        None => Ok(default.to_vec()),
        Some(vs) => vs.iter().map(|v| v.parse::<f64>().map_err(|e| format!("{key}={v}: {e}"))).collect(),
    }
}

fn single(params: &Params, key: &str, default: f64) -> Result<f64, String> {
    let v = floats(params, key, &[default])?;
    match v.as_slice() {
        [x] => Ok(*x),
        _ => Err(format!("{key} takes a single value here")),
    }
}

#[derive(Serialize)]
struct BRow {
    model: String,
    #[serde(rename = "L")]
    l: String,
    b: f64,
    b_uncertainty: Option<f64>,
    delta: Option<f64>,
    gauge_sensitivity: Option<f64>,
    lambda0: Option<f64>,
    lambda: Option<f64>,
    convention: String,
    form: String,
    ansatz: Option<String>,
}

impl BRow {
    fn from(m: &BMeasurement) -> Self {
        BRow {
            model: m.model.clone(),
            l: m.l.to_string(),
            b: m.b,
            b_uncertainty: None,
            delta: Some(m.delta),
            gauge_sensitivity: Some(m.gauge_sensitivity),
            lambda0: Some(m.lambda0.re),
            lambda: Some(m.lambda.re),
            convention: m.convention.into(),
            form: m.form.clone(),
            ansatz: None,
        }
    }

    fn extrapolated(model: &str, fit: &FitResult, convention: &str, form: &str) -> Self {
        BRow {
            model: model.into(),
            l: "inf".into(),
            b: fit.value,
            b_uncertainty: Some(fit.uncertainty),
            delta: None,
            gauge_sensitivity: None,
            lambda0: None,
            lambda: None,
            convention: convention.into(),
            form: form.into(),
            ansatz: Some(fit.ansatz.clone()),
        }
    }
}

#[derive(Serialize)]
struct PercolationRow {
    #[serde(rename = "L")]
    l: usize,
    y: f64,
    eigenvalue: f64,
    cluster_size: usize,
    geometric: usize,
    nilpotent_norm: f64,
    diagonalizable: &'static str,
    convention: &'static str,
    form: String,
}

#[derive(Serialize)]
struct EntropyRow {
    model: String,
    boundary: String,
    #[serde(rename = "L")]
    l: String,
    value: f64,
    exact: Option<f64>,
    ansatz: Option<String>,
    convention: &'static str,
    form: String,
}

#[derive(Serialize)]
struct FixtureRow {
    fixture: &'static str,
    deviation: f64,
    pass: bool,
}

struct Output {
    rows_csv: Vec<u8>,
    report: serde_json::Value,
    ok: bool,
}

fn csv_of<T: Serialize>(rows: &[T]) -> Result<Vec<u8>, String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| e.to_string())?;
    }
    w.into_inner().map_err(|e| e.to_string())
}

fn output<T: Serialize>(command: &str, config: serde_json::Value, rows: &[T], summary: serde_json::Value, ok: bool) -> Result<Output, String> {
    Ok(Output {
        rows_csv: csv_of(rows)?,
        report: json!({ "schema": SCHEMA, "command": command, "config": config, "rows": rows, "summary": summary, "ok": ok }),
        ok,
    })
}

fn fit_json(f: &FitResult) -> serde_json::Value {
    json!({
        "value": f.value,
        "ansatz": f.ansatz,
        "coefficients": f.coefficients,
        "residual": f.residual,
        "uncertainty": f.uncertainty,
        "alternatives": f.alternatives.iter().map(|(a, v)| json!({"ansatz": a, "value": v})).collect::<Vec<_>>(),
    })
}

fn b_table(command: &str, name: &str, sizes: &[usize], config: serde_json::Value, run: impl Fn(usize) -> tlcell::Result<BMeasurement> + Sync) -> Result<Output, String> {
    let ms = sizes.par_iter().map(|&l| run(l).map_err(|e| format!("L={l}: {e}"))).collect::<Result<Vec<_>, _>>()?;
    let mut rows: Vec<BRow> = ms.iter().map(BRow::from).collect();
    let points: Vec<(usize, f64)> = ms.iter().map(|m| (m.l, m.b)).collect();
    let fit = if points.len() >= 3 { Some(extrapolate_b(&points).map_err(|e| e.to_string())?) } else { None };
    if let (Some(f), Some(m)) = (&fit, ms.first()) {
        rows.push(BRow::extrapolated(name, f, m.convention, &m.form));
    }
    let detail: Vec<_> = ms
        .iter()
        .map(|m| {
            json!({
                "L": m.l, "b": m.b, "b_imag": m.b_imag, "delta": m.delta, "gauge_sensitivity": m.gauge_sensitivity,
                "lambda0": [m.lambda0.re, m.lambda0.im], "lambda": [m.lambda.re, m.lambda.im],
                "residual": m.residual, "split": m.split, "convention": m.convention, "form": m.form,
            })
        })
        .collect();
    output(command, config, &rows, json!({ "measurements": detail, "extrapolation": fit.as_ref().map(fit_json) }), true)
}

fn percolation_check(sizes: &[usize], ys: &[f64], tol: f64) -> Result<Output, String> {
    let mut rows = Vec::new();
    let mut eigen = Vec::new();
    for &l in sizes {
        for &y in ys {
            let m = build_percolation_h(l, Some(y)).map_err(|e| e.to_string())?;
            let s = cluster_structure(&m.operator.matrix, SpectrumOrder::AscendingReal, LevelSelector::FirstDoublet)
                .map_err(|e| format!("L={l} y={y}: {e}"))?;
            let diag = s.geometric == s.size && s.nilpotent_norm < tol;
            let spec = full_spectrum(&m.operator.matrix, SpectrumOrder::AscendingReal).map_err(|e| e.to_string())?;
            eigen.push(json!({ "L": l, "y": y, "eigenvalues": spec.eigenvalues.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>() }));
            rows.push(PercolationRow {
                l,
                y,
                eigenvalue: s.lambda.re,
                cluster_size: s.size,
                geometric: s.geometric,
                nilpotent_norm: s.nilpotent_norm,
                diagonalizable: if diag { "yes" } else { "no" },
                convention: "hamiltonian",
                form: format!("diagram(n=1,y={y})"),
            });
        }
    }
    output("percolation-check", json!({ "sizes": sizes, "y": ys, "tol": tol }), &rows, json!({ "spectra": eigen }), true)
}

fn ising(sizes: &[usize], bcs: &[IsingBoundary]) -> Result<Output, String> {
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    for &bc in bcs {
        let name = format!("{bc:?}").to_lowercase();
        for &l in sizes {
            let f = ising_free_energy(l, bc).map_err(|e| format!("L={l}: {e}"))?;
            rows.push(EntropyRow {
                model: "ising".into(),
                boundary: name.clone(),
                l: l.to_string(),
                value: f,
                exact: None,
                ansatz: None,
                convention: "hamiltonian",
                form: "formal-q".into(),
            });
        }
        let fit = ising_boundary_entropy(sizes, bc).map_err(|e| e.to_string())?;
        let exact = match bc {
            IsingBoundary::Fixed => reference::ising_entropy_fixed(),
            IsingBoundary::Free => 0.0,
        };
        rows.push(EntropyRow {
            model: "ising".into(),
            boundary: name.clone(),
            l: "inf".into(),
            value: fit.value,
            exact: Some(exact),
            ansatz: Some(fit.ansatz.clone()),
            convention: "hamiltonian",
            form: "formal-q".into(),
        });
        fits.push(json!({ "boundary": name, "fit": fit_json(&fit), "exact": exact }));
    }
    output("ising-entropy", json!({ "sizes": sizes }), &rows, json!({ "fits": fits }), true)
}

fn loops(sizes: &[usize], ns: &[f64], n1s: &[f64]) -> Result<Output, String> {
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    for &n in ns {
        for &n1 in n1s {
            let boundary = format!("n1={n1}");
            let form = format!("loop(n={n})");
            for &l in sizes {
                rows.push(EntropyRow {
                    model: format!("loop n={n}"),
                    boundary: boundary.clone(),
                    l: l.to_string(),
                    value: loop_free_energy(l, n, n1).map_err(|e| format!("n={n} n1={n1} L={l}: {e}"))?,
                    exact: None,
                    ansatz: None,
                    convention: "transfer",
                    form: form.clone(),
                });
            }
            let le = loop_boundary_entropy(sizes, n, n1).map_err(|e| format!("n={n} n1={n1}: {e}"))?;
            rows.push(EntropyRow {
                model: format!("loop n={n}"),
                boundary,
                l: "inf".into(),
                value: le.lattice.value,
                exact: Some(le.exact),
                ansatz: Some(le.lattice.ansatz.clone()),
                convention: "transfer",
                form,
            });
            fits.push(json!({ "n": n, "n1": n1, "r": le.r, "exact": le.exact, "fit": fit_json(&le.lattice) }));
        }
    }
    output("loop-entropy", json!({ "sizes": sizes, "n": ns, "n1": n1s }), &rows, json!({ "fits": fits }), true)
}

fn fixtures(tol: f64) -> Result<Output, String> {
    let e = |x: tlcell::Error| x.to_string();
    let mut rows = Vec::new();
    let mut push = |fixture: &'static str, deviation: f64| rows.push(FixtureRow { fixture, deviation, pass: deviation < tol });

    let h = build_xxz(4, xxz_q(), SpinSector::TwiceSz(0)).map_err(e)?;
    push("H4", max_abs((h.operator.matrix.to_dense() - reference::xxz_h4()).as_ref()));
    let spec = full_spectrum(&h.operator.matrix, SpectrumOrder::AscendingReal).map_err(e)?;
    let means: Vec<f64> = spec.clusters.iter().flat_map(|c| std::iter::repeat_n(c.value.re, c.eigenvalues.len())).collect();
    push("H4 spectrum", means.iter().zip(reference::xxz_h4_spectrum()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));

    let x = critical_x();
    let t2 = build_dilute_t(2, x).map_err(e)?;
    push("T2", max_abs((t2.operator.matrix.to_dense() - reference::dilute_t2(x)).as_ref()));

    let basis = tlcell::diagram::LinkBasis::new(
        reference::OPEN4_ORDER.iter().map(|s| tlcell::diagram::LinkState::parse(s)).collect::<Result<_, _>>().map_err(e)?,
    );
    let mut dg: f64 = 0.0;
    let mut dd: f64 = 0.0;
    for p in [0.5, 1.0, 1.7] {
        let rep = geometric_on(4, basis.clone(), C64::new(p, 0.0)).map_err(e)?;
        for (g, r) in rep.generators.iter().zip(reference::open4_generators(p, 1.0).iter()) {
            dg = dg.max(max_abs((g.to_dense() - r).as_ref()));
        }
        let rep = deformed_on(4, basis.clone(), C64::new(p + 1.0, 0.0)).map_err(e)?;
        for (g, r) in rep.generators.iter().zip(reference::open4_generators(1.0, p + 1.0).iter()) {
            dd = dd.max(max_abs((g.to_dense() - r).as_ref()));
        }
    }
    push("e_i geometric L=4", dg);
    push("e_i deformed L=4", dd);
    push("P conjugation", verify_basis_change(BasisChange::Generic { n: 0.5 }).map_err(e)?.fixture_residual);
    push("P_y conjugation", verify_basis_change(BasisChange::Deformed { y: 2.0 }).map_err(e)?.fixture_residual);

    // eigenstates up to an overall factor
    let up_to_scale = |v: &tlcell::linalg::Vector, r: &tlcell::linalg::Vector| -> f64 {
        let k = (0..r.nrows()).max_by(|&a, &b| r[a].norm().total_cmp(&r[b].norm())).unwrap();
        let s = v[k] / r[k];
        (0..r.nrows()).map(|i| (v[i] - s * r[i]).norm()).fold(0.0, f64::max) / s.norm()
    };
    let form = tlcell::observables::form_for(&h).map_err(e)?;
    let g = ground_state(&h, Side::Right, Some(&form), Normalization::Form, None).map_err(e)?;
    push("|0>_4", up_to_scale(&g.vector, &reference::xxz_ground4()));
    let cell = extract_jordan_cell(&h, LevelSelector::FirstDoublet, None).map_err(e)?;
    let r3 = reference::xxz_level3_4();
    push("|3>_4", up_to_scale(&cell.right.v, &r3));
    let k = cell.right.v[2] / r3[2];
    let Convention::Hamiltonian { v_f } = h.convention else { unreachable!() };
    let s = C64::new(4.0 / (std::f64::consts::PI * v_f), 0.0) / k;
    let wprime = tlcell::linalg::col_from(&cell.right.w.iter().map(|z| z * s).collect::<Vec<_>>());
    push("<3|3~'>_4", (tlcell::linalg::dot(r3.as_ref(), wprime.as_ref()).re - reference::XXZ_LEVEL3_PAIRING4).abs());
    push("Trousers_4", up_to_scale(&trousers(&h, Side::Right, None).map_err(e)?.vector, &reference::xxz_trousers4()));

    let ok = rows.iter().all(|r| r.pass);
    output("fixtures", json!({ "tol": tol }), &rows, json!({ "message": if ok { "all fixtures pass" } else { "fixture mismatch" } }), ok)
}

fn run(cli: &Cli) -> Result<Output, String> {
    let params = parse_params(&cli.model_param)?;
    match &cli.command {
        Command::XxzB(s) => b_table("xxz-b", "xxz", &s.sizes, json!({ "sizes": s.sizes, "q": "exp(i pi/3)" }), b_xxz),
        Command::PolymerB(s) => {
            let x = single(&params, "x", critical_x())?;
            b_table("polymer-b", "polymer", &s.sizes, json!({ "sizes": s.sizes, "x": x }), |l| b_polymer_at(l, x))
        }
        Command::DeformedB(s) => {
            let y = single(&params, "y", 2.0)?;
            b_table("deformed-b", &format!("percolation y={y}"), &s.sizes, json!({ "sizes": s.sizes, "y": y }), |l| b_deformed(l, y))
        }
        Command::PercolationCheck(s) => percolation_check(&s.sizes, &floats(&params, "y", &[1.0])?, cli.tol.unwrap_or(1e-8)),
        Command::IsingEntropy(s) => {
            let bcs = match params.get("bc").map(|v| v.iter().map(String::as_str).collect::<Vec<_>>()) {
                None => vec![IsingBoundary::Fixed, IsingBoundary::Free],
                Some(v) => v
                    .into_iter()
                    .map(|b| match b {
                        "fixed" => Ok(vec![IsingBoundary::Fixed]),
                        "free" => Ok(vec![IsingBoundary::Free]),
                        "both" => Ok(vec![IsingBoundary::Fixed, IsingBoundary::Free]),
                        other => Err(format!("unknown boundary {other}")),
                    })
                    .collect::<Result<Vec<_>, _>>()?
                    .concat(),
            };
            ising(&s.sizes, &bcs)
        }
        Command::LoopEntropy(s) => loops(&s.sizes, &floats(&params, "n", &[1.0])?, &floats(&params, "n1", &[1.0])?),
        Command::Fixtures => fixtures(cli.tol.unwrap_or(1e-12)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("tlcell: {e}");
            return ExitCode::FAILURE;
        }
    };
    let bytes = match cli.format {
        Format::Csv => out.rows_csv,
        Format::Json => {
            let mut s = serde_json::to_vec_pretty(&out.report).expect("report serializes");
            s.push(b'\n');
            s
        }
    };
    let written = match &cli.out {
        Some(p) => File::create(p).and_then(|mut f| f.write_all(&bytes)),
        None => io::stdout().write_all(&bytes),
    };
    if let Err(e) = written {
        eprintln!("tlcell: {e}");
        return ExitCode::FAILURE;
    }
    if let Command::Fixtures = cli.command {
        eprintln!("{}", if out.ok { "all fixtures pass" } else { "fixture mismatch" });
    }
    if out.ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
