//! Command-line front end: configured runs, parameter sweeps, pair-source
//! statistics, density-matrix dumps and the verification suite.
//!
//! Exit codes: 0 on success, 1 when verification checks fail, 2 on
//! configuration errors.

mod config;
mod output;

use std::collections::BTreeMap;
use std::fs;

use clap::{Args, Parser, Subcommand};

use focksim::experiment::{
    build_output_state, f2_threshold, fidelity, vacuum_signal_ratio, OrderedDensity,
};
use focksim::pdc::{distinguishability_trials, expected_trials, p_pdc, p_poisson,
    statistical_distance_sq};
use focksim::scalar::{ExactScalar, Scalar};
use focksim::verify::{run_suite, FaultInjection};

use config::{resolve, Mode, Overrides, RawConfig, Resolved, ThetaSetting, Value};
use output::{csv_line, dec15, Render};

#[derive(Parser)]
#[command(name = "focksim", version, about = "Exact simulator of post-selected linear-optics teleportation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ConfigFlags {
    /// JSON configuration file; flags override its values
    #[arg(long, value_name = "FILE")]
    config: Option<String>,
    /// Pair probability of the preparation source, e.g. 1/100
    #[arg(long)]
    p1: Option<String>,
    /// Pair probability of the channel source
    #[arg(long)]
    p2: Option<String>,
    /// Preparation angle cosine, e.g. 3/5
    #[arg(long)]
    theta_cos: Option<String>,
    /// Preparation angle sine, e.g. 4/5
    #[arg(long)]
    theta_sin: Option<String>,
    /// Preparation angle in degrees (float mode)
    #[arg(long, conflicts_with_all = ["theta_cos", "theta_sin"])]
    theta_degrees: Option<f64>,
    /// Efficiency of the first coincidence detector, e.g. 1/10
    #[arg(long)]
    eta_u_sq: Option<String>,
    /// Efficiency of the second coincidence detector
    #[arg(long)]
    eta_v_sq: Option<String>,
    /// Efficiency of the cascade detectors
    #[arg(long)]
    eta_c_sq: Option<String>,
    /// Number of cascade detectors
    #[arg(long)]
    cascade_n: Option<usize>,
    /// Undetected polarization branch: "no-click" or "trace"
    #[arg(long)]
    y_policy: Option<String>,
    /// Truncation order: 2 or 3
    #[arg(long)]
    order: Option<u32>,
    /// Arithmetic mode: "exact" or "float"
    #[arg(long)]
    mode: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and print a result row
    Fidelity {
        #[command(flatten)]
        flags: ConfigFlags,
        /// Output format: "csv" or "json"
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Sweep one parameter over a list of values
    Scan {
        #[command(flatten)]
        flags: ConfigFlags,
        /// Swept key: p1, p2, eta_u_sq, eta_v_sq, eta_c_sq or cascade_n
        #[arg(long)]
        sweep: String,
        /// Comma-separated values, in output order
        #[arg(long, default_value = "")]
        values: String,
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Pair-number statistics of one down-conversion source
    PdcStats {
        /// Single-pair probability, e.g. 1/50
        #[arg(long)]
        p: String,
        /// Largest pair number tabulated
        #[arg(long, default_value_t = 4)]
        n_max: u32,
    },
    /// Run the verification suite
    Verify {
        /// Only run checks whose id contains this substring
        #[arg(long)]
        filter: Option<String>,
        /// Testing hook: deliberately perturb a reference constant
        #[arg(long, value_name = "FAULT")]
        inject_fault: Option<String>,
    },
    /// Dump the block-decomposed conditional density matrix as JSON
    Matrix {
        #[command(flatten)]
        flags: ConfigFlags,
    },
}

fn main() {
    // die quietly when a downstream pipe closes early (e.g. `focksim … | head`)
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    std::process::exit(run(cli));
}

fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Fidelity { flags, format } => cmd_fidelity(&flags, &format),
        Command::Scan {
            flags,
            sweep,
            values,
            format,
        } => cmd_scan(&flags, &sweep, &values, &format),
        Command::PdcStats { p, n_max } => cmd_pdc_stats(&p, n_max),
        Command::Verify {
            filter,
            inject_fault,
        } => return cmd_verify(filter.as_deref(), inject_fault.as_deref()),
        Command::Matrix { flags } => cmd_matrix(&flags),
    };
    match result {
        Ok(()) => 0,
        Err(msg) => {
            eprintln!("config error: {msg}");
            2
        }
    }
}

fn load(flags: &ConfigFlags) -> Result<Resolved, String> {
    let raw: Option<RawConfig> = match &flags.config {
        Some(path) => {
            let text =
                fs::read_to_string(path).map_err(|e| format!("`config`: cannot read {path}: {e}"))?;
            Some(serde_json::from_str(&text).map_err(|e| format!("`config`: {e}"))?)
        }
        None => None,
    };
    let overrides = Overrides {
        p1: flags.p1.clone(),
        p2: flags.p2.clone(),
        theta_cos: flags.theta_cos.clone(),
        theta_sin: flags.theta_sin.clone(),
        theta_degrees: flags.theta_degrees,
        eta_u_sq: flags.eta_u_sq.clone(),
        eta_v_sq: flags.eta_v_sq.clone(),
        eta_c_sq: flags.eta_c_sq.clone(),
        cascade_n: flags.cascade_n,
        y_policy: flags.y_policy.clone(),
        order: flags.order,
        mode: flags.mode.clone(),
    };
    resolve(raw.as_ref(), &overrides)
}

const COLUMNS: [&str; 19] = [
    "p1",
    "p2",
    "theta_cos",
    "theta_sin",
    "eta_u_sq",
    "eta_v_sq",
    "eta_c_sq",
    "cascade_n",
    "y_policy",
    "order",
    "mode",
    "fidelity_exact",
    "fidelity",
    "vacuum_signal_ratio_exact",
    "vacuum_signal_ratio",
    "threshold_eta_c_sq_exact",
    "threshold_eta_c_sq",
    "trace_exact",
    "trace",
];

fn echo_value(v: Value) -> String {
    match v {
        Value::Ratio(n, 1) => format!("{n}"),
        Value::Ratio(n, d) => format!("{n}/{d}"),
        Value::Float(x) => dec15(x),
    }
}

fn echo_theta(t: ThetaSetting) -> (String, String) {
    match t {
        ThetaSetting::Pair(c, s) => (echo_value(c), echo_value(s)),
        ThetaSetting::Degrees(deg) => {
            let rad = deg.to_radians();
            (dec15(rad.cos()), dec15(rad.sin()))
        }
    }
}

fn result_row<S: Render>(res: &Resolved) -> Result<Vec<String>, String> {
    let config = res.to_experiment::<S>()?;
    let rho = build_output_state(&config).map_err(|e| e.to_string())?;
    let ideal = config.ideal_state().map_err(|e| e.to_string())?;
    let f = fidelity(&rho, &ideal).map_err(|e| e.to_string())?;
    let ratio = vacuum_signal_ratio(&rho, &ideal).map_err(|e| e.to_string())?;
    let threshold = f2_threshold(res.cascade_n as u32, &config.p1, &config.p2);
    let trace = rho.total().trace();

    let (tc, ts) = echo_theta(res.theta);
    let mut row = vec![
        echo_value(res.p1),
        echo_value(res.p2),
        tc,
        ts,
        echo_value(res.eta_u_sq),
        echo_value(res.eta_v_sq),
        echo_value(res.eta_c_sq),
        res.cascade_n.to_string(),
        match res.y_policy {
            focksim::detection::YModePolicy::ConditionNoClick => "no-click".to_string(),
            focksim::detection::YModePolicy::TraceOut => "trace".to_string(),
        },
        res.order.to_string(),
        match res.mode {
            Mode::Exact => "exact".to_string(),
            Mode::Float => "float".to_string(),
        },
    ];
    for value in [f, ratio, threshold, trace] {
        row.push(value.exact_column());
        row.push(value.decimal_column());
    }
    Ok(row)
}

fn emit_rows(rows: Vec<Vec<String>>, format: &str) -> Result<(), String> {
    match format {
        "csv" => {
            println!("{}", csv_line(&COLUMNS.iter().map(|s| s.to_string()).collect::<Vec<_>>()));
            for row in rows {
                println!("{}", csv_line(&row));
            }
            Ok(())
        }
        "json" => {
            let doc = serde_json::json!({
                "columns": COLUMNS,
                "rows": rows,
            });
            println!("{}", serde_json::to_string_pretty(&doc).expect("serialize"));
            Ok(())
        }
        other => Err(format!("`format`: expected \"csv\" or \"json\", got \"{other}\"")),
    }
}

fn cmd_fidelity(flags: &ConfigFlags, format: &str) -> Result<(), String> {
    let res = load(flags)?;
    let row = match res.mode {
        Mode::Exact => result_row::<ExactScalar>(&res)?,
        Mode::Float => result_row::<f64>(&res)?,
    };
    emit_rows(vec![row], format)
}

fn cmd_scan(flags: &ConfigFlags, sweep: &str, values: &str, format: &str) -> Result<(), String> {
    let base = load(flags)?;
    let key = sweep.replace('-', "_");
    let mut rows = Vec::new();
    for item in values.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let mut res = base.clone();
        match key.as_str() {
            "p1" => res.p1 = Value::parse("p1", item)?,
            "p2" => res.p2 = Value::parse("p2", item)?,
            "eta_u_sq" => res.eta_u_sq = Value::parse("eta_u_sq", item)?,
            "eta_v_sq" => res.eta_v_sq = Value::parse("eta_v_sq", item)?,
            "eta_c_sq" => res.eta_c_sq = Value::parse("eta_c_sq", item)?,
            "cascade_n" => {
                res.cascade_n = item
                    .parse()
                    .map_err(|_| format!("`cascade_n`: `{item}` is not an integer"))?
            }
            other => return Err(format!("`sweep`: unknown key \"{other}\"")),
        }
        // a float sweep value under exact mode is a configuration error
        if res.mode == Mode::Exact {
            let florid = [res.p1, res.p2, res.eta_u_sq, res.eta_v_sq, res.eta_c_sq]
                .iter()
                .any(|v| v.is_float());
            if florid {
                return Err(format!("`{key}`: exact mode needs rational sweep values"));
            }
        }
        let row = match res.mode {
            Mode::Exact => result_row::<ExactScalar>(&res)?,
            Mode::Float => result_row::<f64>(&res)?,
        };
        rows.push(row);
    }
    emit_rows(rows, format)
}

fn cmd_pdc_stats(p_text: &str, n_max: u32) -> Result<(), String> {
    let value = Value::parse("p", p_text)?;
    let p_float = match value {
        Value::Ratio(n, d) => n as f64 / d as f64,
        Value::Float(x) => x,
    };
    if !(p_float > 0.0 && p_float < 1.0) {
        return Err("`p`: pair probability must lie in (0, 1)".into());
    }
    // the pair amplitude: p = 2r²
    let r = (p_float / 2.0).sqrt();

    println!("n,p_pair,p_poisson,difference");
    for n in 0..=n_max {
        let pair = p_pdc(n, &r).map_err(|e| e.to_string())?;
        let poisson = p_poisson(n, &p_float).map_err(|e| e.to_string())?;
        println!(
            "{n},{},{},{}",
            dec15(pair),
            dec15(poisson),
            dec15(pair - poisson)
        );
    }

    let ds2 = statistical_distance_sq(&p_float, n_max.max(10)).map_err(|e| e.to_string())?;
    println!("statistical_distance_sq,{}", dec15(ds2));
    println!("scaled_by_8_over_p_sq,{}", dec15(ds2 * 8.0 / (p_float * p_float)));
    match value {
        Value::Ratio(n, d) => {
            let p = ExactScalar::from_ratio(n, d);
            let dist = distinguishability_trials(&p).map_err(|e| e.to_string())?;
            let exp = expected_trials(&p).map_err(|e| e.to_string())?;
            println!("distinguishability_trials,{},{}", dist, dec15(dist.to_f64()));
            println!("expected_trials,{},{}", exp, dec15(exp.to_f64()));
        }
        Value::Float(_) => {
            let dist = distinguishability_trials(&p_float).map_err(|e| e.to_string())?;
            let exp = expected_trials(&p_float).map_err(|e| e.to_string())?;
            println!("distinguishability_trials,,{}", dec15(dist));
            println!("expected_trials,,{}", dec15(exp));
        }
    }
    Ok(())
}

fn cmd_verify(filter: Option<&str>, inject_fault: Option<&str>) -> i32 {
    let fault = match inject_fault {
        None => None,
        Some("second-order-bracket") => Some(FaultInjection::SecondOrderBracket),
        Some(other) => {
            eprintln!("config error: `inject_fault`: unknown fault \"{other}\"");
            return 2;
        }
    };
    let checks = run_suite(fault);
    let mut total = 0usize;
    let mut failed = 0usize;
    for check in checks {
        if let Some(f) = filter {
            if !check.id.contains(f) {
                continue;
            }
        }
        total += 1;
        if !check.passed {
            failed += 1;
        }
        println!(
            "{} [criterion {:2}] {}  expected: {}  actual: {}",
            if check.passed { "PASS" } else { "FAIL" },
            check.criterion,
            check.id,
            check.expected,
            check.actual
        );
    }
    println!("{} checks, {} failed", total, failed);
    if failed > 0 {
        1
    } else {
        0
    }
}

fn cmd_matrix(flags: &ConfigFlags) -> Result<(), String> {
    let res = load(flags)?;
    let doc = match res.mode {
        Mode::Exact => {
            let config = res.to_experiment::<ExactScalar>()?;
            let rho = build_output_state(&config).map_err(|e| e.to_string())?;
            matrix_json(&rho)
        }
        Mode::Float => {
            let config = res.to_experiment::<f64>()?;
            let rho = build_output_state(&config).map_err(|e| e.to_string())?;
            matrix_json(&rho)
        }
    };
    println!("{}", serde_json::to_string_pretty(&doc).expect("serialize"));
    Ok(())
}

fn matrix_json<S: Render>(rho: &OrderedDensity<S>) -> serde_json::Value {
    let mut blocks = BTreeMap::new();
    for (&(i, j), dm) in rho.blocks() {
        let mut entries = Vec::new();
        for ((ket, bra), coeff) in dm.entries() {
            let occ_json = |basis: &focksim::fock::BasisKet| {
                let map: BTreeMap<String, u32> =
                    basis.modes().map(|(m, &n)| (m.to_string(), n)).collect();
                serde_json::json!(map)
            };
            let (rational, radical) = coeff.component_strings();
            entries.push(serde_json::json!([
                occ_json(ket),
                occ_json(bra),
                rational,
                radical
            ]));
        }
        blocks.insert(format!("({i},{j})"), serde_json::json!(entries));
    }
    serde_json::json!(blocks)
}
