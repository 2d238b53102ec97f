use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use serde_json::json;

use wallcross::invariants::{
    dt_from_pt_paths, l_from_pt, macmahon, n_degree_zero, pt_from_dt_paths, pt_from_l, pt_from_l_adjoint,
    InvariantSeries, Label, NTable,
};
use wallcross::io::{rational_form_to_json, read_table_csv, table_to_csv_string};
use wallcross::rational::format_rational;
use wallcross::rationality::{reconstruct, verify_prediction, PtSlice, Reconstruction};
use wallcross::selftest::{run_selftest, SelftestConfig};
use wallcross::series::ChargeKey;
use wallcross::torus::Twist;
use wallcross::{Error, GeometryData, Rat, TruncationWindow};

use crate::{Command, GeometryAction, TableArgs};

const INCONCLUSIVE: u8 = 2;

pub fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Geometry { action: GeometryAction::Validate { geometry } } => validate(&geometry),
        Command::Dtpt { table, inverse } => dtpt(&table, inverse),
        Command::Ptl { table, ntable, inverse } => ptl(&table, &ntable, inverse),
        Command::Macmahon { euler, geometry, rank, qdeg, out } => {
            let series = match euler_number(euler, geometry.as_deref())? {
                Some(e) => macmahon(e, rank, qdeg),
                // M(q) = M(-q)^1 read at -q
                None => macmahon(1, 1, qdeg).alternate(),
            };
            let mut text = String::from("n,coefficient\n");
            for (k, c) in series.coeffs().iter().enumerate() {
                text.push_str(&format!("{k},{}\n", format_rational(c)));
            }
            emit(out.as_deref(), &text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Nzero { euler, geometry, qdeg, out } => {
            let curve_rank = match &geometry {
                Some(p) => load_geometry(p)?.curve_rank(),
                None => 1,
            };
            let Some(e) = euler_number(euler, geometry.as_deref())? else {
                bail!("nzero needs --euler or --geometry");
            };
            let table = n_degree_zero(e, qdeg, curve_rank);
            emit(out.as_deref(), &table_to_csv_string(curve_rank, table.entries()))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Rationality { input, beta, min_sixn, max_sixn, heldout, max_order, out } => {
            rationality(&input, beta.as_deref(), min_sixn, max_sixn, heldout, max_order, out.as_deref())
        }
        Command::Selftest { geometry, max_wb, max_sixn, seed, cases, inject_sign_flip } => {
            let g = match geometry {
                Some(p) => load_geometry(&p)?,
                None => GeometryData::single_class(-200, 5, 1)?,
            };
            let mut cfg = SelftestConfig::new(g, TruncationWindow::new(max_wb, max_sixn));
            cfg.seed = seed;
            cfg.cases = cases;
            if inject_sign_flip {
                cfg.twist = Twist::FlippedSign;
            }
            let report = run_selftest(&cfg);
            let passed = report.suites.iter().filter(|s| s.passed()).count();
            emit(None, &format!("{report}{passed} of {} suites pass\n", report.suites.len()))?;
            Ok(if report.all_passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn load_geometry(path: &Path) -> Result<GeometryData> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    GeometryData::from_json_str(&text).with_context(|| format!("loading geometry {}", path.display()))
}

fn euler_number(euler: Option<i64>, geometry: Option<&Path>) -> Result<Option<i64>> {
    match (euler, geometry) {
        (Some(_), Some(_)) => bail!("give either --euler or --geometry, not both"),
        (Some(e), None) => Ok(Some(e)),
        (None, Some(p)) => Ok(Some(load_geometry(p)?.euler_number())),
        (None, None) => Ok(None),
    }
}

fn validate(path: &Path) -> Result<ExitCode> {
    let g = load_geometry(path)?;
    let omega_curve: Vec<String> = g.omega_curve().iter().map(i64::to_string).collect();
    println!("geometry {}: ok", path.display());
    println!("  divisor rank p = {}, curve rank c = {}", g.divisor_rank(), g.curve_rank());
    println!("  euler number e = {}", g.euler_number());
    println!("  w^3 = {}, w.C_j = [{}]", g.omega_cubed(), omega_curve.join(", "));
    Ok(ExitCode::SUCCESS)
}

fn parse_list(text: &str, what: &str) -> Result<Vec<i64>> {
    text.split(',')
        .map(|s| s.trim().parse::<i64>().with_context(|| format!("{what}: {s:?} is not an integer")))
        .collect()
}

fn read_input(path: Option<&Path>) -> Result<String> {
    match path {
        Some(p) => fs::read_to_string(p).with_context(|| format!("reading {}", p.display())),
        None => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s).context("reading standard input")?;
            Ok(s)
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => io::stdout().write_all(text.as_bytes()).context("writing standard output"),
    }
}

/// The sidecar path next to `out`, or `None` to report on stderr.
fn report_path(out: Option<&Path>) -> Option<PathBuf> {
    out.map(|p| {
        let mut name = p.file_name().unwrap_or_default().to_os_string();
        name.push(".report.json");
        p.with_file_name(name)
    })
}

fn emit_report(out: Option<&Path>, report: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(report)? + "\n";
    match report_path(out) {
        Some(p) => fs::write(&p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            eprint!("{text}");
            Ok(())
        }
    }
}

fn load_series(args: &TableArgs, label: Label) -> Result<(GeometryData, InvariantSeries)> {
    let g = load_geometry(&args.geometry)?;
    let d = parse_list(&args.div, "--div")?;
    let values = read_table_csv(read_input(args.input.as_deref())?.as_bytes(), g.curve_rank())?;
    let lowest = values.keys().map(|k| k.six_n).min().unwrap_or(0).min(0);
    let window = TruncationWindow::new(args.max_wb, args.max_sixn).with_min_six_n(args.min_sixn.unwrap_or(lowest));
    let series = InvariantSeries::new(&g, label, args.rank, d, window, values).map_err(|e| match e {
        Error::NotCoprime { r, d_omega2 } => anyhow::anyhow!(
            "refusing (r, D): gcd(r, D.w^2) = gcd({r}, {d_omega2}) must be 1 for the shifted cone to be defined"
        ),
        other => other.into(),
    })?;
    Ok((g, series))
}

fn window_json(w: &TruncationWindow) -> serde_json::Value {
    json!({ "max_omega_two_beta": w.max_omega_two_beta, "max_six_n": w.max_six_n, "min_six_n": w.min_six_n })
}

fn dtpt(args: &TableArgs, inverse: bool) -> Result<ExitCode> {
    let (from, to) = if inverse { (Label::DT, Label::PT) } else { (Label::PT, Label::DT) };
    let (g, input) = load_series(args, from)?;
    let paths = if inverse { pt_from_dt_paths(&g, &input)? } else { dt_from_pt_paths(&g, &input)? };
    let agree = paths.agree();
    let report = json!({
        "command": "dtpt",
        "direction": format!("{from} -> {to}"),
        "rank": input.rank(),
        "div": input.divisor(),
        "window": window_json(&input.window()),
        "input_entries": input.values().len(),
        "paths": {
            "macmahon_product_entries": paths.commutative.values().len(),
            "adjoint_exponential_entries": paths.adjoint.values().len(),
            "agree": agree,
        },
    });
    if !agree {
        emit_report(args.out.as_deref(), &report)?;
        bail!("the MacMahon-product and adjoint-exponential paths disagree");
    }
    emit(args.out.as_deref(), &table_to_csv_string(g.curve_rank(), paths.commutative.values()))?;
    emit_report(args.out.as_deref(), &report)?;
    Ok(ExitCode::SUCCESS)
}

fn ptl(args: &TableArgs, ntable: &Path, inverse: bool) -> Result<ExitCode> {
    let (from, to) = if inverse { (Label::L, Label::PT) } else { (Label::PT, Label::L) };
    let (g, input) = load_series(args, from)?;
    let n_text = fs::read_to_string(ntable).with_context(|| format!("reading {}", ntable.display()))?;
    let n = NTable::new(g.curve_rank(), read_table_csv(n_text.as_bytes(), g.curve_rank())?)?;
    let (output, warnings, cross_check) = if inverse {
        let pt = pt_from_l(&g, &input, &n)?;
        let adjoint = pt_from_l_adjoint(&g, &input, &n)?;
        let agree = adjoint == pt;
        (pt, Vec::new(), Some(agree))
    } else {
        let out = l_from_pt(&g, &input, &n)?;
        (out.series, out.warnings, None)
    };
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let report = json!({
        "command": "ptl",
        "direction": format!("{from} -> {to}"),
        "rank": input.rank(),
        "div": input.divisor(),
        "window": window_json(&input.window()),
        "input_entries": input.values().len(),
        "output_entries": output.values().len(),
        "adjoint_path_agrees": cross_check,
        "warnings": warnings,
    });
    if cross_check == Some(false) {
        emit_report(args.out.as_deref(), &report)?;
        bail!("the product-kernel and adjoint-exponential paths disagree");
    }
    emit(args.out.as_deref(), &table_to_csv_string(g.curve_rank(), output.values()))?;
    emit_report(args.out.as_deref(), &report)?;
    Ok(ExitCode::SUCCESS)
}

fn rationality(
    input: &Path,
    beta: Option<&str>,
    min_sixn: Option<i64>,
    max_sixn: Option<i64>,
    heldout: i64,
    max_order: Option<usize>,
    out: Option<&Path>,
) -> Result<ExitCode> {
    let text = fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    let header = text.lines().next().unwrap_or_default();
    let curve_rank = header.split(',').count().saturating_sub(2);
    if curve_rank == 0 {
        bail!("table header {header:?} has no two_beta columns");
    }
    let table = read_table_csv(text.as_bytes(), curve_rank)?;
    let two_beta = match beta {
        Some(b) => parse_list(b, "--beta")?,
        None => {
            let mut betas: Vec<&Vec<i64>> = table.keys().map(|k| &k.two_beta).collect();
            betas.dedup();
            match betas.as_slice() {
                [only] => (*only).clone(),
                [] => vec![0; curve_rank],
                _ => bail!("the table has several beta slices; choose one with --beta"),
            }
        }
    };
    if two_beta.len() != curve_rank {
        bail!("--beta has {} components but the table has {curve_rank}", two_beta.len());
    }
    let values: BTreeMap<i64, Rat> = table
        .iter()
        .filter(|(k, _)| k.two_beta == two_beta)
        .map(|(k, v): (&ChargeKey, &Rat)| (k.six_n, v.clone()))
        .collect();
    let lo = min_sixn.or_else(|| values.keys().next().copied()).unwrap_or(0);
    let hi = max_sixn.or_else(|| values.keys().next_back().copied()).unwrap_or(0);
    if heldout < 0 {
        bail!("--heldout must be non-negative");
    }
    let fit_hi = hi - 6 * heldout;
    if fit_hi < lo {
        bail!("window {lo}..={hi} leaves nothing to fit after holding out {heldout} powers of q");
    }
    let slice = PtSlice::new(lo, hi, values.into_iter().filter(|(k, _)| (lo..=hi).contains(k)).collect())?;
    let fit = slice.restrict(lo, fit_hi)?;
    let class_len = ((fit_hi - lo) / 6 + 1) as usize;
    let max_order = max_order.unwrap_or((class_len / 2).saturating_sub(1));

    eprintln!("slice 2beta={two_beta:?}, fitting 6n in {lo}..={fit_hi}, max order {max_order}");
    let form = match reconstruct(&fit, max_order) {
        Reconstruction::Rational(form) => form,
        Reconstruction::Failed(failures) => {
            for f in &failures {
                eprintln!("inconclusive: {f}");
            }
            return Ok(ExitCode::from(INCONCLUSIVE));
        }
    };
    emit(out, &(rational_form_to_json(&form) + "\n"))?;
    eprintln!("F(q) = ({}) / ({})", form.numerator(), form.denominator());
    let symmetric = match form.inversion_symmetry() {
        Some((1, 0)) => "invariant".to_string(),
        Some((s, k)) => format!("R(1/x) = {s} x^{k} R(x), x = q^(1/6)"),
        None => "not symmetric".to_string(),
    };
    eprintln!("q <-> 1/q: {symmetric}");
    if heldout == 0 {
        return Ok(ExitCode::SUCCESS);
    }
    let check = slice.restrict(fit_hi + 1, hi)?;
    match verify_prediction(&form, &check) {
        Ok(()) => {
            eprintln!("held-out 6n in {}..={hi}: all coefficients predicted exactly", fit_hi + 1);
            Ok(ExitCode::SUCCESS)
        }
        Err(m) => {
            eprintln!(
                "inconclusive: held-out coefficient at 6n={} is {} but the fit predicts {}",
                m.six_n,
                format_rational(&m.expected),
                format_rational(&m.predicted)
            );
            Ok(ExitCode::from(INCONCLUSIVE))
        }
    }
}
