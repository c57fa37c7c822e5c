//! Command-line front end: graph parameters, entanglement bounds, see-saw
//! upper bounds, noise curves, preparation plans and the four-cycle demo.
//!
//! Exit codes: 0 success, 2 input parsing, 3 graph preconditions
//! (disconnected or search limits), 4 dimension/domain errors, 1 internal.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use netent::bounds::{
    self, covariance_bound, ghz_optimal_settings, nonlocality_bound, sn_value, tr_measure_bounds,
    witness_bound, BetaForm, IntervalConfig, SQRT2,
};
use netent::error::Error;
use netent::netgraph::{self, Hypergraph};
use netent::protocols::{self, PlanKind};
use netent::qstate::{
    dichotomic_z, ghz_state, noisy_ghz, DensityMatrix, MatrixJson, Observable,
};
use netent::seesaw::{seesaw_run, SeesawConfig};

#[derive(Parser)]
#[command(
    name = "netent",
    about = "Quantify network entanglement of multipartite states relative to a hypergraph network"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BoundMethod {
    All,
    Witness,
    Nonlocality,
    Covariance,
    Tr,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Csv,
    Svg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PlanKindArg {
    Steps,
    Rounds,
}

#[derive(Subcommand)]
enum Cmd {
    /// Edge radius and connected domination number with witnesses.
    Graph {
        /// Graph JSON file or shorthand (line:N, cycle:N, kn:N,K, tree16).
        #[arg(long)]
        graph: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lower bounds on the network-entanglement weight (and optionally the
    /// graph-parameter intervals when a graph is given).
    Bounds {
        /// State JSON file or shorthand (ghz:D,N or noisy:D,N,P).
        #[arg(long)]
        state: String,
        #[arg(long)]
        graph: Option<String>,
        /// Largest source size k; defaults to the graph's maximum edge size.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_enum, default_value = "all")]
        method: BoundMethod,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Also compute [lower, upper] intervals for weight, communication
        /// cost and rounds (requires --graph; runs the see-saw).
        #[arg(long)]
        intervals: bool,
        #[arg(long, default_value_t = 2)]
        sweeps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// See-saw upper bound with a reproducible certificate.
    Seesaw {
        #[arg(long)]
        state: String,
        #[arg(long)]
        graph: String,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        sweeps: usize,
        /// Random candidates beyond the maximally mixed one.
        #[arg(long, default_value_t = 2)]
        candidates: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Noise curves of the three lower bounds for noisy GHZ states.
    Figure3 {
        /// Local dimension: a number (currently 2) or "inf".
        #[arg(long, default_value = "2")]
        d: String,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 3)]
        n: usize,
        /// Visibility grid start:end:count.
        #[arg(long, default_value = "0:1:101")]
        p_grid: String,
        #[arg(long, value_enum, default_value = "csv")]
        format: OutFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Preparation schedule matching the graph parameter.
    Plan {
        #[arg(long)]
        graph: String,
        #[arg(long, value_enum)]
        kind: PlanKindArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Four-cycle entanglement-swapping demonstration.
    DemoC4 {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_graph(spec: &str) -> Result<Hypergraph, Error> {
    if let Some(rest) = spec.strip_prefix("line:") {
        let n: usize = rest.parse().map_err(|_| Error::InvalidArgument(format!("bad line:{rest}")))?;
        return Hypergraph::line(n);
    }
    if let Some(rest) = spec.strip_prefix("cycle:") {
        let n: usize =
            rest.parse().map_err(|_| Error::InvalidArgument(format!("bad cycle:{rest}")))?;
        return Hypergraph::cycle(n);
    }
    if let Some(rest) = spec.strip_prefix("kn:") {
        let parts: Vec<&str> = rest.split(',').collect();
        if parts.len() != 2 {
            return Err(Error::InvalidArgument("kn shorthand needs N,K".into()));
        }
        let n = parts[0].parse().map_err(|_| Error::InvalidArgument("bad N in kn:".into()))?;
        let k = parts[1].parse().map_err(|_| Error::InvalidArgument("bad K in kn:".into()))?;
        return netgraph::k_network(n, k);
    }
    if spec == "tree16" {
        return Ok(netgraph::tree16());
    }
    let text = std::fs::read_to_string(spec)?;
    Ok(serde_json::from_str(&text)?)
}

fn load_state(spec: &str) -> Result<DensityMatrix, Error> {
    let parse_nums = |rest: &str, want: usize| -> Result<Vec<f64>, Error> {
        let v: Vec<f64> = rest
            .split(',')
            .map(|s| s.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| Error::InvalidArgument(format!("bad state shorthand {spec}")))?;
        if v.len() != want {
            return Err(Error::InvalidArgument(format!("bad state shorthand {spec}")));
        }
        Ok(v)
    };
    if let Some(rest) = spec.strip_prefix("ghz:") {
        let v = parse_nums(rest, 2)?;
        return ghz_state(v[0] as usize, v[1] as usize);
    }
    if let Some(rest) = spec.strip_prefix("noisy:") {
        let v = parse_nums(rest, 3)?;
        return noisy_ghz(v[0] as usize, v[1] as usize, v[2]);
    }
    let text = std::fs::read_to_string(spec)?;
    let j: MatrixJson = serde_json::from_str(&text)?;
    DensityMatrix::from_json(&j)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{}{}", text, if text.ends_with('\n') { "" } else { "\n" }),
    }
    Ok(())
}

fn default_measurements(rho: &DensityMatrix) -> Vec<Observable> {
    rho.local_dims()
        .iter()
        .map(|&d| Observable::single(d, dichotomic_z(d)).expect("diagonal is Hermitian"))
        .collect()
}

fn cmd_bounds(
    state: &str,
    graph: &Option<String>,
    k: Option<usize>,
    method: BoundMethod,
    restarts: usize,
    seed: u64,
    intervals: bool,
    sweeps: usize,
    out: &Option<PathBuf>,
) -> Result<(), Error> {
    let rho = load_state(state)?;
    let g = graph.as_deref().map(load_graph).transpose()?;
    let k = match (k, &g) {
        (Some(k), _) => k,
        (None, Some(g)) => g.max_edge_size(),
        (None, None) => {
            return Err(Error::InvalidArgument("either --k or --graph is required".into()))
        }
    };
    if intervals {
        let g = g
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("--intervals requires --graph".into()))?;
        let cfg = IntervalConfig {
            seed,
            sn_restarts: restarts,
            seesaw: SeesawConfig { seed, sweeps, ..SeesawConfig::default() },
            ..IntervalConfig::default()
        };
        let reports = bounds::measure_intervals(&rho, g, &cfg)?;
        return emit(out, &serde_json::to_string_pretty(&reports)?);
    }
    let n = rho.num_parties();
    let meas = default_measurements(&rho);
    let mut reports = Vec::new();
    let equal_dims = rho.local_dims().iter().all(|&d| d == rho.local_dims()[0]);
    if matches!(method, BoundMethod::All | BoundMethod::Witness) && equal_dims {
        reports.push(witness_bound(&rho, k)?);
    }
    if matches!(method, BoundMethod::All | BoundMethod::Nonlocality) && n >= 3 {
        reports.push(nonlocality_bound(&rho, k, restarts, seed)?);
    }
    if matches!(method, BoundMethod::All | BoundMethod::Covariance) && n > k {
        reports.push(covariance_bound(&rho, k, &meas)?);
    }
    if matches!(method, BoundMethod::Tr) {
        reports = tr_measure_bounds(&rho, k, restarts, seed, &meas)?;
    }
    if reports.is_empty() {
        return Err(Error::InvalidArgument(
            "no applicable bound for this method/state combination".into(),
        ));
    }
    emit(out, &serde_json::to_string_pretty(&reports)?)
}

struct CurveRow {
    p: f64,
    witness: f64,
    nonlocality: f64,
    covariance: f64,
}

fn figure_rows(d: &str, k: usize, n: usize, grid: &[f64]) -> Result<Vec<CurveRow>, Error> {
    if n < 3 {
        return Err(Error::InvalidArgument("curves need n >= 3".into()));
    }
    if k < 2 || k >= n {
        return Err(Error::InvalidArgument(format!("curves need 2 <= k < n, got k={k} n={n}")));
    }
    let s_max = 2.0 * SQRT2 + 2.0 * (k as f64 - 1.0);
    let nf = n as f64;
    let kf = k as f64;
    let cov = |omega: f64, tau: f64| -> f64 {
        let beta = 2.0 * (1.0 - tau * tau).max(0.0).sqrt();
        (omega / (nf * (nf - kf)) - beta).max(0.0)
    };
    match d {
        "inf" => Ok(grid
            .iter()
            .map(|&p| CurveRow {
                p,
                witness: ((kf + 1.0) * p - kf).max(0.0),
                nonlocality: ((p * s_max - 2.0 * kf) / (2.0 * SQRT2 - 2.0)).max(0.0),
                covariance: cov(nf * (nf - 1.0) * p + nf - kf * nf, p * p),
            })
            .collect()),
        "2" => {
            let settings = ghz_optimal_settings(n)?;
            let mut rows = Vec::with_capacity(grid.len());
            for &p in grid {
                let rho = noisy_ghz(2, n, p)?;
                let witness = witness_bound(&rho, k)?.value.lower();
                let s = sn_value(&rho, k, &settings)?;
                let nonlocality = ((s - 2.0 * kf) / (2.0 * SQRT2 - 2.0)).max(0.0);
                // the all-Z covariance matrix of the noisy GHZ state has unit
                // diagonal and p off-diagonal; the matrix route agrees with
                // this closed form, so the cheap form serves large systems
                let covariance = if rho.total_dim() <= 64 {
                    bounds::covariance_bound_with(
                        &rho,
                        k,
                        &default_measurements(&rho),
                        BetaForm::SqrtOnly,
                    )?
                    .value
                    .lower()
                } else {
                    cov(nf * (nf - 1.0) * p + nf - kf * nf, rho.purity())
                };
                rows.push(CurveRow { p, witness, nonlocality, covariance });
            }
            Ok(rows)
        }
        other => Err(Error::InvalidArgument(format!(
            "unsupported dimension {other}; use 2 or inf"
        ))),
    }
}

fn rows_csv(rows: &[CurveRow]) -> String {
    let mut s = String::from("p,witness,nonlocality,covariance\n");
    for r in rows {
        s.push_str(&format!("{:.6},{:.6},{:.6},{:.6}\n", r.p, r.witness, r.nonlocality, r.covariance));
    }
    s
}

fn rows_svg(rows: &[CurveRow], title: &str) -> String {
    let (w, h) = (640.0f64, 480.0f64);
    let (ml, mr, mt, mb) = (60.0, 20.0, 40.0, 50.0);
    let ymax = rows
        .iter()
        .flat_map(|r| [r.witness, r.nonlocality, r.covariance])
        .fold(1.0f64, f64::max);
    let x = |p: f64| ml + p * (w - ml - mr);
    let y = |v: f64| h - mb - (v / ymax) * (h - mt - mb);
    let poly = |f: &dyn Fn(&CurveRow) -> f64, color: &str| -> String {
        let pts: Vec<String> =
            rows.iter().map(|r| format!("{:.2},{:.2}", x(r.p), y(f(r)))).collect();
        format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>\n",
            pts.join(" ")
        )
    };
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    );
    s.push_str(&format!(
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{title}</text>\n",
        w / 2.0
    ));
    s.push_str(&format!(
        "<line x1=\"{ml}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/>\n",
        h - mb,
        w - mr
    ));
    s.push_str(&format!(
        "<line x1=\"{ml}\" y1=\"{mt}\" x2=\"{ml}\" y2=\"{}\" stroke=\"black\"/>\n",
        h - mb
    ));
    for t in 0..=5 {
        let p = t as f64 / 5.0;
        s.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"12\">{p:.1}</text>\n",
            x(p),
            h - mb + 18.0
        ));
        let v = ymax * p;
        s.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" font-size=\"12\">{v:.2}</text>\n",
            ml - 6.0,
            y(v) + 4.0
        ));
    }
    s.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"14\">visibility p</text>\n",
        (ml + w - mr) / 2.0,
        h - 12.0
    ));
    s.push_str(&poly(&|r: &CurveRow| r.witness, "#1f77b4"));
    s.push_str(&poly(&|r: &CurveRow| r.nonlocality, "#d62728"));
    s.push_str(&poly(&|r: &CurveRow| r.covariance, "#2ca02c"));
    for (i, (name, color)) in
        [("witness", "#1f77b4"), ("nonlocality", "#d62728"), ("covariance", "#2ca02c")]
            .iter()
            .enumerate()
    {
        let ly = mt + 18.0 * i as f64;
        s.push_str(&format!(
            "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"12\" height=\"12\" fill=\"{color}\"/>\n",
            ml + 10.0,
            ly
        ));
        s.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\">{name}</text>\n",
            ml + 28.0,
            ly + 10.0
        ));
    }
    s.push_str("</svg>\n");
    s
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, Error> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidArgument("grid must be start:end:count".into()));
    }
    let start: f64 =
        parts[0].parse().map_err(|_| Error::InvalidArgument("bad grid start".into()))?;
    let end: f64 = parts[1].parse().map_err(|_| Error::InvalidArgument("bad grid end".into()))?;
    let count: usize =
        parts[2].parse().map_err(|_| Error::InvalidArgument("bad grid count".into()))?;
    if count < 2 || !(0.0..=1.0).contains(&start) || !(0.0..=1.0).contains(&end) || end <= start {
        return Err(Error::InvalidArgument("grid must satisfy 0 <= start < end <= 1, count >= 2".into()));
    }
    Ok((0..count).map(|i| start + (end - start) * i as f64 / (count - 1) as f64).collect())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.cmd {
        Cmd::Graph { graph, out } => {
            let g = load_graph(&graph)?;
            let params = netgraph::graph_params(&g)?;
            emit(&out, &serde_json::to_string_pretty(&params)?)
        }
        Cmd::Bounds { state, graph, k, method, restarts, seed, intervals, sweeps, out } => {
            cmd_bounds(&state, &graph, k, method, restarts, seed, intervals, sweeps, &out)
        }
        Cmd::Seesaw { state, graph, seed, sweeps, candidates, out } => {
            let rho = load_state(&state)?;
            let g = load_graph(&graph)?;
            let cfg = SeesawConfig {
                seed,
                sweeps,
                num_candidates: candidates,
                ..SeesawConfig::default()
            };
            let report = seesaw_run(&rho, &g, &cfg)?;
            emit(&out, &serde_json::to_string_pretty(&report)?)
        }
        Cmd::Figure3 { d, k, n, p_grid, format, out } => {
            let grid = parse_grid(&p_grid)?;
            let rows = figure_rows(&d, k, n, &grid)?;
            let text = match format {
                OutFormat::Csv => rows_csv(&rows),
                OutFormat::Svg => {
                    rows_svg(&rows, &format!("noisy GHZ lower bounds (d={d}, k={k}, n={n})"))
                }
            };
            emit(&out, &text)
        }
        Cmd::Plan { graph, kind, out } => {
            let g = load_graph(&graph)?;
            let plan = match kind {
                PlanKindArg::Steps => protocols::plan_steps(&g)?,
                PlanKindArg::Rounds => protocols::plan_rounds(&g)?,
            };
            debug_assert!(matches!(plan.kind, PlanKind::Steps | PlanKind::Rounds));
            let body = json!({
                "kind": plan.kind,
                "phases": plan.phases,
                "initial": plan.initial,
                "num_phases": plan.num_phases(),
            });
            emit(&out, &serde_json::to_string_pretty(&body)?)
        }
        Cmd::DemoC4 { out } => {
            let report = protocols::run_c4_demo()?;
            emit(&out, &serde_json::to_string_pretty(&report)?)
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Json(_) | Error::Io(_) => 2,
        Error::Graph(_) | Error::Disconnected | Error::SearchLimit { .. } => 3,
        Error::DimMismatch(_)
        | Error::DimLimit(..)
        | Error::InvalidState(_)
        | Error::InvalidObservable(_)
        | Error::InvalidChannel(_)
        | Error::InvalidArgument(_) => 4,
        Error::Lp(_) | Error::Infeasible => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
