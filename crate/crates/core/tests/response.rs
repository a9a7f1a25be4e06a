use num_complex::Complex64;
use proptest::prelude::*;
use respsim_core::make_hubbard_dimer;
use respsim_core::oracle::{alpha1, diagonalize, window_amplitude, SpectralData, SusceptibilityResult};
use respsim_core::response::{
    assemble_alpha1, assemble_alpha3, cost_report, parse_axes, qpe_baseline_report, read_csv, result_rows, write_csv, CostInputs, parse_grid, parse_toy, run_pipeline, sup_relative_deviation, Grid,
    Mode, ModelSource, PipelineArgs, ResponseTable, TableEntry,
};
use respsim_core::Error;

const BRIGHT: f64 = 4.47213595499958;

fn dimer() -> SpectralData {
    diagonalize(&make_hubbard_dimer(1.0, 2.0, 0.5), true).unwrap()
}

fn entry(windows: Vec<(f64, f64)>, axes: Vec<usize>, value: Complex64) -> TableEntry {
    TableEntry { windows, margin: 0.0, axes, value, eps_filter: 0.0, eps_stat: 0.0, zeta: 10.0 }
}

fn grid_for(sd: &SpectralData) -> Vec<f64> {
    Grid { lo: 0.0, hi: 1.2 * sd.max_excitation(), n: 241 }.points()
}

/// Exact amplitudes on the cells of a halving lattice over `[0, top)` whose
/// width first drops to `resolution` or below.
fn lattice_table(sd: &SpectralData, top: f64, resolution: f64, gamma: f64) -> ResponseTable {
    let mut cells = 1usize;
    while top / cells as f64 > resolution {
        cells *= 2;
    }
    let w = top / cells as f64;
    let mut used: Vec<usize> = sd.eigenvalues[1..].iter().map(|&l| (l / w).floor() as usize).filter(|&c| c < cells).collect();
    used.sort_unstable();
    used.dedup();
    let mut t = ResponseTable::new(1, gamma);
    for c in used {
        let win = (c as f64 * w, (c + 1) as f64 * w);
        let v = window_amplitude(sd, 0, 0, win.0, win.1);
        if v.norm() > 0.0 {
            t.push(entry(vec![win], vec![0, 0], v)).unwrap();
        }
    }
    t
}

#[test]
fn single_exact_window_reproduces_the_line() {
    let sd = dimer();
    let gamma = 0.05;
    let (a, b) = (4.44, 4.52);
    let mut t = ResponseTable::new(1, gamma);
    t.push(entry(vec![(a, b)], vec![0, 0], window_amplitude(&sd, 0, 0, a, b))).unwrap();
    let grid = grid_for(&sd);
    let got = assemble_alpha1(&t, 0, 0, &grid, gamma).unwrap().values;
    let want = alpha1(&sd, 0, 0, &grid, gamma).unwrap().values;
    let offset = (0.5 * (a + b) - BRIGHT).abs();
    assert!(sup_relative_deviation(&got, &want) <= 2.0 * offset / gamma + 1e-12);
}

#[test]
fn exact_lattice_assembly_converges_under_halving() {
    let sd = dimer();
    let gamma = 0.05;
    let grid = grid_for(&sd);
    let want = alpha1(&sd, 0, 0, &grid, gamma).unwrap().values;
    let top = 7.23606797749979;
    let devs: Vec<f64> = [4.0, 8.0, 16.0]
        .iter()
        .map(|f| {
            let t = lattice_table(&sd, top, gamma / f, gamma);
            sup_relative_deviation(&assemble_alpha1(&t, 0, 0, &grid, gamma).unwrap().values, &want)
        })
        .collect();
    assert!(devs.windows(2).all(|d| d[1] <= d[0]), "{devs:?}");
    assert!(devs[2] < 0.01);
}

#[test]
fn third_order_denominators() {
    let gamma = 0.05;
    let mut t = ResponseTable::new(3, gamma);
    let wins = vec![(1.0, 1.2), (-0.1, 0.1), (2.0, 2.2)];
    t.push(entry(wins, vec![0, 0, 0, 0], Complex64::new(1.0, 0.0))).unwrap();
    let (w1, w2, w3) = (0.3, 0.2, 0.1);
    let got = assemble_alpha3(&t, [0; 4], &[[w3, w2, w1]], gamma).unwrap().values[0];
    let g = Complex64::new(0.0, gamma);
    let (c0, c1, c2) = (1.1, 0.0, 2.1);
    let want = 1.0 / ((c0 - w1 - g) * (c0 - c2 - (w1 + w2) - g) * (c0 - c1 - (w1 + w2 + w3) - g));
    assert!((got - want).norm() < 1e-12);
    let empty = ResponseTable::new(3, gamma);
    assert_eq!(assemble_alpha3(&empty, [0; 4], &[[w3, w2, w1]], gamma).unwrap().values[0], Complex64::new(0.0, 0.0));
}

fn inputs() -> CostInputs {
    CostInputs { n: 4.0, eta: 2.0, alpha: 4.0, beta: 2.0, gamma: 0.1, eps: 0.01, order: 1, p0: 0.5, gap: 1.0 }
}

#[test]
fn cost_formula_examples() {
    let c = inputs();
    let r = cost_report(&c).unwrap();
    assert!((r.get("bin_sorting").unwrap() - 640.0).abs() < 1e-9);
    let half = cost_report(&CostInputs { eps: c.eps / 2.0, ..c.clone() }).unwrap();
    assert!((half.get("order_n_estimation").unwrap() / r.get("order_n_estimation").unwrap() - 2.0).abs() < 1e-12);
    for n in 1..=3u32 {
        let lo = cost_report(&CostInputs { order: n, ..c.clone() }).unwrap().get("order_n_estimation").unwrap();
        let hi = cost_report(&CostInputs { order: n + 1, ..c.clone() }).unwrap().get("order_n_estimation").unwrap();
        let want = c.n.powi(5) * c.eta / c.gamma;
        assert!((hi / lo / want - 1.0).abs() < 1e-12);
    }
    assert!(!r.caveat.is_empty());
}

#[test]
fn qpe_examples() {
    let c = CostInputs { alpha: 1.0, gamma: 0.1, eps: 0.1, ..inputs() };
    let q = qpe_baseline_report(&c, 4).unwrap();
    assert!((q.combined - 1000.0).abs() < 1e-9);
    assert!(2f64.powi(q.k_min as i32) > c.alpha / c.gamma);
    assert!(2f64.powi(q.k_min as i32 - 1) <= c.alpha / c.gamma);
    let q2 = qpe_baseline_report(&CostInputs { gamma: 0.05, ..c.clone() }, 4).unwrap();
    assert!((q2.ratio / q.ratio - 2.0).abs() < 1e-12);
    assert!(qpe_baseline_report(&c, 0).is_err());
}

proptest! {
    #[test]
    fn costs_grow_in_the_documented_direction(
        n in 2.0f64..20.0, eta in 1.0f64..10.0, gamma in 0.01f64..1.0, eps in 1e-4f64..0.1, order in 1u32..4, f in 1.01f64..3.0
    ) {
        let c = CostInputs { n, eta, alpha: 3.0, beta: 1.5, gamma, eps, order, p0: 0.5, gap: 0.5 };
        let base = cost_report(&c).unwrap();
        let variants = [
            CostInputs { n: n * f, ..c.clone() },
            CostInputs { eta: eta * f, ..c.clone() },
            CostInputs { gamma: gamma / f, ..c.clone() },
            CostInputs { eps: eps / f, ..c.clone() },
        ];
        for v in variants {
            let r = cost_report(&v).unwrap();
            for (a, b) in r.lines.iter().zip(&base.lines) {
                prop_assert!(a.value >= b.value);
            }
            prop_assert!(r.get("order_n_estimation").unwrap() > base.get("order_n_estimation").unwrap());
        }
    }

    #[test]
    fn csv_and_json_round_trip_exactly(values in prop::collection::vec((-1e6f64..1e6, -1e6f64..1e6, -10.0f64..10.0), 1..20)) {
        let res = SusceptibilityResult {
            order: 1,
            frequencies: values.iter().map(|v| vec![v.2]).collect(),
            values: values.iter().map(|v| Complex64::new(v.0, v.1)).collect(),
            gamma: 0.05,
            axes: vec![0, 1],
        };
        let rows = result_rows(&res, "y", "x", "linear");
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        write_csv(&path, &rows).unwrap();
        prop_assert_eq!(read_csv(&path).unwrap(), rows);
        let mut t = ResponseTable::new(1, 0.05);
        for (k, v) in values.iter().enumerate() {
            t.entries.push(entry(vec![(k as f64, k as f64 + 0.5)], vec![0, 0], Complex64::new(v.0, v.1)));
        }
        prop_assert_eq!(ResponseTable::from_json(&t.to_json().unwrap()).unwrap(), t);
    }
}

#[test]
fn parsers() {
    assert_eq!(parse_axes("xyz").unwrap(), vec![0, 1, 2]);
    assert!(parse_axes("xq").is_err());
    assert_eq!(parse_grid("0:2:5").unwrap().points(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    assert!(parse_grid("2:0:5").is_err());
    assert_eq!(parse_toy("hubbard:t=1,U=2,d=0.5").unwrap(), make_hubbard_dimer(1.0, 2.0, 0.5));
    assert!(parse_toy("ising").is_err());
}

fn toy_args(dir: &std::path::Path, mode: Mode) -> PipelineArgs {
    let mut a = PipelineArgs::new(ModelSource::Toy("hubbard:t=1,U=2,d=0.5".into()), dir);
    a.mode = mode;
    a
}

#[test]
fn oracle_mode_is_a_passthrough() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_pipeline(&toy_args(dir.path(), Mode::OracleOnly)).unwrap();
    let sd = dimer();
    let want = alpha1(&sd, 0, 0, &grid_for(&sd), 0.05).unwrap();
    assert_eq!(out.result, want);
    let rows = read_csv(&dir.path().join("response.csv")).unwrap();
    for (r, v) in rows.iter().zip(&want.values) {
        assert_eq!((r.re, r.im), (v.re, v.im));
    }
}

#[test]
fn simulated_curve_tracks_oracle_and_repeats() {
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut a = toy_args(d1.path(), Mode::Simulate);
    a.seed = 7;
    let first = run_pipeline(&a).unwrap();
    a.out = d2.path().to_path_buf();
    run_pipeline(&a).unwrap();
    for f in ["response.csv", "response.json", "search.json", "cost.json", "manifest.json"] {
        assert_eq!(std::fs::read(d1.path().join(f)).unwrap(), std::fs::read(d2.path().join(f)).unwrap(), "{f}");
    }
    let sd = dimer();
    let want = alpha1(&sd, 0, 0, &grid_for(&sd), 0.05).unwrap().values;
    assert!(sup_relative_deviation(&first.result.values, &want) <= 0.10);
}

#[test]
fn dark_model_reports_statistical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let mut a = toy_args(dir.path(), Mode::Simulate);
    a.source = ModelSource::Toy("hubbard:t=1,U=2,d=0".into());
    assert!(matches!(run_pipeline(&a), Err(Error::Statistical(_))));
}

#[test]
fn manifest_records_window_convention() {
    let dir = tempfile::tempdir().unwrap();
    run_pipeline(&toy_args(dir.path(), Mode::OracleOnly)).unwrap();
    let m: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert!(m["window_frequency"].as_str().unwrap().contains("midpoint"));
    assert_eq!(m["seed"], 0);
}
