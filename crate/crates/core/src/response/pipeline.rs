use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::cost::{cost_report, qpe_baseline_report, CostInputs};
use super::io::{result_rows, write_csv, CsvRow};
use super::{assemble_alpha1, assemble_alpha3, ResponseTable, TableEntry};
use crate::error::{Error, Result};
use crate::estimation::{binary_search_1d, estimate_window, BinSearchConfig, EstimateMethod, SearchTrace, SimSystem, Window};
use crate::model::{load_fcidump_like, make_hubbard_dimer, make_random_model, ModelSpec, AXIS_NAMES};
use crate::oracle::{alpha1, alpha3_with, diagonalize, r_pathway_freq, Alpha3Preset, Decay, SpectralData, SusceptibilityResult};
use crate::tolerances::GROUND_DEGENERACY;

/// Recorded in every manifest.
pub const WINDOW_FREQUENCY_NOTE: &str =
    "window frequency taken as the midpoint (a+b)/2; the literal half-width |b-a|/2 is not a frequency and is not used";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ModelSource {
    Toy(String),
    File { path: PathBuf, dipoles: Option<PathBuf> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    OracleOnly,
    Simulate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.lo];
        }
        (0..self.n)
            .map(|k| self.lo + (self.hi - self.lo) * k as f64 / (self.n - 1) as f64)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineArgs {
    pub source: ModelSource,
    pub mode: Mode,
    pub gamma: f64,
    pub eps: f64,
    pub order: usize,
    /// Order 1: `(i, j)`. Order 3: `(i, i3, i2, i1)`.
    pub axes: Vec<usize>,
    pub grid: Option<Grid>,
    pub seed: u64,
    #[serde(skip)]
    pub out: PathBuf,
    /// Order 3 only: `all`, `eight`, `two` or `r1`.
    pub pathway: Option<String>,
    pub method: EstimateMethod,
    pub branching: usize,
    /// Search resolution as a fraction of gamma.
    pub resolution_factor: f64,
    pub overlap: f64,
    /// Smallest amplitude the search must separate from an empty bin.
    pub min_amplitude: f64,
    /// Order 3: fixed `(w2, w3)` while `w1` scans the grid.
    pub fixed: [f64; 2],
}

impl PipelineArgs {
    pub fn new(source: ModelSource, out: impl Into<PathBuf>) -> Self {
        Self {
            source,
            mode: Mode::OracleOnly,
            gamma: 0.05,
            eps: 0.005,
            order: 1,
            axes: vec![0, 0],
            grid: None,
            seed: 0,
            out: out.into(),
            pathway: None,
            method: EstimateMethod::AmplitudeEstimation,
            branching: 2,
            resolution_factor: 0.25,
            overlap: 0.25,
            min_amplitude: 0.05,
            fixed: [0.0, 0.0],
        }
    }
}

#[derive(Clone, Debug)]
pub struct PipelineOutput {
    pub files: Vec<PathBuf>,
    pub rows: Vec<CsvRow>,
    pub result: SusceptibilityResult,
    pub table: Option<ResponseTable>,
    pub traces: Vec<SearchTrace>,
}

/// `hubbard:t=1,U=2,d=0.5` or `random:n=3,e=2,seed=1`.
pub fn parse_toy(spec: &str) -> Result<ModelSpec> {
    let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let mut kv = std::collections::BTreeMap::new();
    for part in rest.split(',').filter(|s| !s.trim().is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::input(format!("toy parameter '{part}' is not key=value")))?;
        kv.insert(k.trim().to_string(), v.trim().to_string());
    }
    let num = |key: &str, default: f64| -> Result<f64> {
        kv.get(key)
            .map(|v| v.parse::<f64>().map_err(|_| Error::input(format!("bad value for {key}: {v}"))))
            .unwrap_or(Ok(default))
    };
    match kind {
        "hubbard" => Ok(make_hubbard_dimer(num("t", 1.0)?, num("U", 2.0)?, num("d", 0.5)?)),
        "random" => make_random_model(num("n", 3.0)? as usize, num("e", 2.0)? as usize, num("seed", 1.0)? as u64),
        other => Err(Error::input(format!("unknown toy model '{other}'"))),
    }
}

/// Letters from `xyz`, e.g. `xy` or `xxxx`.
pub fn parse_axes(s: &str) -> Result<Vec<usize>> {
    s.chars()
        .map(|c| {
            AXIS_NAMES
                .iter()
                .position(|&a| a == c.to_ascii_lowercase())
                .ok_or_else(|| Error::input(format!("unknown axis '{c}'")))
        })
        .collect()
}

/// `lo:hi:n`.
pub fn parse_grid(s: &str) -> Result<Grid> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Error::input(format!("grid '{s}' must be lo:hi:n"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].parse().map_err(|_| bad())?;
    let n: usize = parts[2].parse().map_err(|_| bad())?;
    if n == 0 || hi < lo {
        return Err(bad());
    }
    Ok(Grid { lo, hi, n })
}

fn axis_label(axes: &[usize]) -> String {
    axes.iter().map(|&a| AXIS_NAMES[a]).collect()
}

/// Worker count from `RESPSIM_THREADS`, defaulting to the available cores.
fn thread_count() -> usize {
    std::env::var("RESPSIM_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

/// Order-preserving parallel map over contiguous chunks.
fn par_map<T: Send, U: Send + Sync>(items: &[U], f: impl Fn(&[U]) -> Result<Vec<T>> + Sync) -> Result<Vec<T>> {
    let threads = thread_count().min(items.len().max(1));
    if threads <= 1 {
        return f(items);
    }
    let chunk = items.len().div_ceil(threads);
    let parts: Vec<Result<Vec<T>>> = std::thread::scope(|s| {
        let handles: Vec<_> = items.chunks(chunk).map(|c| s.spawn(|| f(c))).collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut out = Vec::with_capacity(items.len());
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

fn load_model(source: &ModelSource) -> Result<ModelSpec> {
    match source {
        ModelSource::Toy(s) => parse_toy(s),
        ModelSource::File { path, dipoles } => load_fcidump_like(path, dipoles.as_deref()),
    }
}

fn validate(args: &PipelineArgs) -> Result<()> {
    if !(args.gamma > 0.0) || !(args.eps > 0.0) {
        return Err(Error::input("gamma and eps must be positive"));
    }
    match (args.order, args.axes.len()) {
        (1, 2) | (3, 4) => {}
        (1 | 3, _) => return Err(Error::input("order 1 needs two axes, order 3 needs four")),
        _ => return Err(Error::input("order must be 1 or 3")),
    }
    if args.axes.iter().any(|&a| a > 2) {
        return Err(Error::input("axis out of range"));
    }
    Ok(())
}

fn triple_grid(points: &[f64], fixed: [f64; 2]) -> Vec<[f64; 3]> {
    points.iter().map(|&w| [fixed[1], fixed[0], w]).collect()
}

fn pad(w: Window, overlap: f64) -> (Window, f64) {
    let p = overlap * (w.1 - w.0) / (1.0 - 2.0 * overlap);
    ((w.0 - p, w.1 + p), p)
}

fn mix(seed: u64, k: u64) -> u64 {
    seed ^ (k + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

fn oracle_result(sd: &SpectralData, args: &PipelineArgs, points: &[f64]) -> Result<(SusceptibilityResult, String)> {
    if args.order == 1 {
        let (i, j) = (args.axes[0], args.axes[1]);
        let values = par_map(points, |chunk| Ok(alpha1(sd, i, j, chunk, args.gamma)?.values))?;
        let res = SusceptibilityResult {
            order: 1,
            frequencies: points.iter().map(|&w| vec![w]).collect(),
            values,
            gamma: args.gamma,
            axes: vec![i, j],
        };
        return Ok((res, "linear".into()));
    }
    let axes: [usize; 4] = args.axes.clone().try_into().expect("four axes");
    let pathway = args.pathway.clone().unwrap_or_else(|| "all".into());
    let decay = Decay::Uniform(args.gamma);
    let triples = triple_grid(points, args.fixed);
    let values = par_map(&triples, |chunk| {
        chunk
            .iter()
            .map(|&[w3, w2, w1]| match pathway.as_str() {
                "all" => alpha3_with(sd, axes, [w3, w2, w1], &decay, Alpha3Preset::All),
                "eight" => alpha3_with(sd, axes, [w3, w2, w1], &decay, Alpha3Preset::Eight),
                "two" => alpha3_with(sd, axes, [w3, w2, w1], &decay, Alpha3Preset::Two),
                "r1" => r_pathway_freq(sd, 1, axes, [w1 + w2 + w3, w1 + w2, w1], &decay),
                other => Err(Error::input(format!("unknown pathway '{other}'"))),
            })
            .collect()
    })?;
    let res = SusceptibilityResult {
        order: 3,
        frequencies: triples.iter().map(|t| t.to_vec()).collect(),
        values,
        gamma: args.gamma,
        axes: axes.to_vec(),
    };
    Ok((res, pathway))
}

struct Simulated {
    result: SusceptibilityResult,
    table: ResponseTable,
}

/// Searches every involved axis with a nonzero dipole and merges the peaks.
fn search_peaks(sys: &SimSystem, model: &ModelSpec, args: &PipelineArgs, traces: &mut Vec<SearchTrace>) -> Result<Vec<Window>> {
    let mut axes: Vec<usize> = args.axes.clone();
    axes.sort_unstable();
    axes.dedup();
    let mut peaks: Vec<Window> = vec![];
    for a in axes {
        if model.dipole[a].iter().all(|&x| x == 0.0) {
            continue;
        }
        let zeta = sys.zeta(&[a, a], true)?;
        let mut cfg = BinSearchConfig::for_signal(args.branching, args.gamma * args.resolution_factor, args.min_amplitude / zeta);
        cfg.overlap = args.overlap;
        let tr = binary_search_1d(sys, (a, a), &cfg, mix(args.seed, a as u64)).map_err(|e| e.context("search"))?;
        for p in &tr.peaks {
            let w = p[0];
            if !peaks.iter().any(|q| q.0 < w.1 && w.0 < q.1) {
                peaks.push(w);
            }
        }
        traces.push(tr);
    }
    peaks.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(peaks)
}

fn simulate(
    sys: &SimSystem,
    peaks: &[Window],
    args: &PipelineArgs,
    points: &[f64],
) -> Result<Simulated> {
    if args.order == 1 {
        let (i, j) = (args.axes[0], args.axes[1]);
        let mut table = ResponseTable::new(1, args.gamma);
        let mut k = 0u64;
        for &w in peaks {
            let (padded, margin) = pad(w, args.overlap);
            let mut dirs = vec![vec![j, i]];
            if i != j {
                dirs.push(vec![i, j]);
            }
            for axes in dirs {
                let e = estimate_window(sys, &axes, &[padded], args.eps, args.method, args.overlap, true, mix(args.seed, 100 + k))
                    .map_err(|e| e.context("estimate"))?;
                k += 1;
                table.push(TableEntry::from_estimate(&e, margin))?;
            }
        }
        let result = assemble_alpha1(&table, i, j, points, args.gamma)?;
        return Ok(Simulated { result, table });
    }
    let [i, i3, i2, i1]: [usize; 4] = args.axes.clone().try_into().expect("four axes");
    let res = args.gamma * args.resolution_factor;
    let mut windows: Vec<Window> = vec![(-0.5 * res, 0.5 * res)];
    windows.extend_from_slice(peaks);
    let mut table = ResponseTable::new(3, args.gamma);
    let mut k = 0u64;
    for &a in &windows {
        for &b in &windows {
            for &c in &windows {
                let (pa, margin) = pad(a, args.overlap);
                let (pb, _) = pad(b, args.overlap);
                let (pc, _) = pad(c, args.overlap);
                let e = estimate_window(sys, &[i1, i, i3, i2], &[pa, pb, pc], args.eps, args.method, args.overlap, false, mix(args.seed, 1000 + k))
                    .map_err(|e| e.context("estimate"))?;
                k += 1;
                table.push(TableEntry::from_estimate(&e, margin))?;
            }
        }
    }
    let result = assemble_alpha3(&table, [i, i3, i2, i1], &triple_grid(points, args.fixed), args.gamma)?;
    Ok(Simulated { result, table })
}

fn write_json(path: &Path, value: &serde_json::Value, files: &mut Vec<PathBuf>) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    files.push(path.to_path_buf());
    Ok(())
}

fn first_gap(sd: &SpectralData) -> f64 {
    sd.eigenvalues.iter().copied().find(|&l| l > GROUND_DEGENERACY).unwrap_or(1.0)
}

/// Ingest, compute, assemble and write `response.csv`, `response.json`,
/// `cost.json`, `manifest.json` and, when simulating, `search.json`.
pub fn run_pipeline(args: &PipelineArgs) -> Result<PipelineOutput> {
    validate(args)?;
    let model = load_model(&args.source).map_err(|e| e.context("model"))?;
    let sd = diagonalize(&model, true).map_err(|e| e.context("diagonalize"))?;
    let grid = args.grid.unwrap_or(Grid { lo: 0.0, hi: 1.2 * sd.max_excitation(), n: 241 });
    let points = grid.points();
    std::fs::create_dir_all(&args.out)?;
    let mut files = vec![];

    let manifest = json!({
        "tool": "respsim",
        "version": env!("CARGO_PKG_VERSION"),
        "seed": args.seed,
        "mode": args.mode,
        "model": model.label,
        "dipole_missing": model.dipole_missing,
        "degenerate_ground": sd.degenerate_ground,
        "config": args,
        "grid": grid,
        "window_frequency": WINDOW_FREQUENCY_NOTE,
    });
    write_json(&args.out.join("manifest.json"), &manifest, &mut files)?;

    let mut traces = vec![];
    let (result, pathway, table) = match args.mode {
        Mode::OracleOnly => {
            let (r, p) = oracle_result(&sd, args, &points)?;
            (r, p, None)
        }
        Mode::Simulate => {
            if args.order == 3 && args.pathway.as_deref().is_some_and(|p| p != "r1") {
                return Err(Error::input("simulation assembles the first pathway only (--pathway r1)"));
            }
            let sys = SimSystem::from_model(&model).map_err(|e| e.context("encode"))?;
            let peaks = search_peaks(&sys, &model, args, &mut traces);
            write_json(&args.out.join("search.json"), &serde_json::to_value(&traces)?, &mut files)?;
            let peaks = peaks?;
            if peaks.is_empty() {
                return Err(Error::Statistical("search found no window above the signal threshold".into()));
            }
            let sim = simulate(&sys, &peaks, args, &points)?;
            let p = if args.order == 1 { "linear" } else { "r1" };
            (sim.result, p.to_string(), Some(sim.table))
        }
    };

    let (axis_in, axis_out) = (axis_label(&args.axes[1..]), axis_label(&args.axes[..1]));
    let rows = result_rows(&result, &axis_in, &axis_out, &pathway);
    let csv_path = args.out.join("response.csv");
    write_csv(&csv_path, &rows)?;
    files.push(csv_path);
    write_json(&args.out.join("response.json"), &json!({ "table": table, "result": result }), &mut files)?;

    let alpha = {
        let h = crate::operator::jordan_wigner(&model.hamiltonian()?)?;
        crate::operator::lcu_one_norm(&h)
    };
    let beta = args
        .axes
        .iter()
        .map(|&a| crate::operator::jordan_wigner(&model.dipole_operator(a)?).map(|p| crate::operator::lcu_one_norm(&p)))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let inputs = CostInputs {
        n: model.n_orbitals as f64,
        eta: model.n_electrons.max(1) as f64,
        alpha,
        beta: if beta > 0.0 { beta } else { 1.0 },
        gamma: args.gamma,
        eps: args.eps,
        order: args.order as u32,
        p0: 1.0,
        gap: first_gap(&sd),
    };
    let cost = cost_report(&inputs)?;
    let k_bits = ((alpha / args.gamma).log2().floor() as i64 + 1).max(1) as u32;
    let qpe = qpe_baseline_report(&inputs, k_bits)?;
    write_json(&args.out.join("cost.json"), &json!({ "cost": cost, "qpe": qpe }), &mut files)?;

    Ok(PipelineOutput { files, rows, result, table, traces })
}
