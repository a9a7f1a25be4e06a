use std::collections::{BTreeSet, HashMap, VecDeque};
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::channel::{HadamardChannel, LcuDistribution};
use super::{chain_degree, FilterParams, SimSystem, Window};
use crate::error::{Error, Result};

/// `ceil(ln(4 / eps) / tau^2)`.
pub fn required_samples(tau: f64, eps_conf: f64) -> u64 {
    ((4.0 / eps_conf).ln() / (tau * tau)).ceil() as u64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinSearchConfig {
    pub branching: usize,
    /// Target window width.
    pub resolution: f64,
    /// Additive margin of the inequality test on bin probabilities.
    pub tau: f64,
    pub eps_conf: f64,
    pub samples_per_level: u64,
    pub max_depth: usize,
    /// Ramp half-width as a fraction of the bin width.
    pub overlap: f64,
    pub filter_eps: f64,
    pub max_peaks: usize,
}

impl BinSearchConfig {
    pub fn new(branching: usize, resolution: f64) -> Self {
        let tau = 1.0 / (2.0 * branching as f64);
        Self::with_tau(branching, resolution, tau)
    }

    /// Margin chosen so that a normalised amplitude of `min_signal` separates
    /// from an empty bin by three margins.
    pub fn for_signal(branching: usize, resolution: f64, min_signal: f64) -> Self {
        Self::with_tau(branching, resolution, min_signal / (6.0 * branching as f64))
    }

    fn with_tau(branching: usize, resolution: f64, tau: f64) -> Self {
        let eps_conf = 1.0 / 3.0;
        Self {
            branching,
            resolution,
            tau,
            eps_conf,
            samples_per_level: required_samples(tau, eps_conf),
            max_depth: 64,
            overlap: 0.1,
            filter_eps: 0.05,
            max_peaks: 8,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.branching < 2 {
            return Err(Error::input("branching must be at least 2"));
        }
        if !(self.resolution > 0.0) {
            return Err(Error::input("resolution must be positive"));
        }
        if !(self.tau > 0.0) || !(self.eps_conf > 0.0 && self.eps_conf < 1.0) {
            return Err(Error::input("tau and eps_conf must be positive, eps_conf below 1"));
        }
        if self.samples_per_level < required_samples(self.tau, self.eps_conf) {
            return Err(Error::input("samples per level below the inequality-test requirement"));
        }
        // Keeps the ramps of neighbouring bins from reaching past the next boundary.
        if !(self.overlap > 0.0 && self.overlap < 1.0 / (self.branching as f64 + 1.0)) {
            return Err(Error::input("overlap fraction must lie in (0, 1/(B+1))"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Greater,
    Less,
    Indistinguishable,
}

/// Additive comparison of two empirical frequencies from the same run.
pub fn inequality_test(counts_i: u64, counts_j: u64, n_s: u64, tau: f64) -> Relation {
    let diff = (counts_i as f64 - counts_j as f64) / n_s as f64;
    if diff > tau {
        Relation::Greater
    } else if diff < -tau {
        Relation::Less
    } else {
        Relation::Indistinguishable
    }
}

/// `R[i][j]` is 1 when bin i is larger, -1 when smaller, 0 when tied.
pub fn relation_matrix(counts: &[u64], n_s: u64, tau: f64) -> Vec<Vec<i8>> {
    counts
        .iter()
        .map(|&ci| {
            counts
                .iter()
                .map(|&cj| match inequality_test(ci, cj, n_s, tau) {
                    Relation::Greater => 1,
                    Relation::Less => -1,
                    Relation::Indistinguishable => 0,
                })
                .collect()
        })
        .collect()
}

/// Samples the combined distribution of `channels` and sorts the bins.
pub fn sort_bins(channels: &[HadamardChannel], config: &BinSearchConfig, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<i8>>> {
    let dist = LcuDistribution::from_channels(channels)?;
    let counts = dist.sample(rng, config.samples_per_level);
    Ok(relation_matrix(&counts[..channels.len()], config.samples_per_level, config.tau))
}

/// Box-to-value map for one search, with values cached across runs.
pub struct SearchProblem<'a> {
    pub system: &'a SimSystem,
    /// One more axis than box dimensions; `axes[0]` acts first.
    pub axes: Vec<usize>,
    pub centered: bool,
    /// `-1` searches for large negative amplitudes.
    pub sign: f64,
    pub params: FilterParams,
    cache: Mutex<HashMap<Vec<u64>, (f64, u64)>>,
}

impl<'a> SearchProblem<'a> {
    pub fn new(system: &'a SimSystem, axes: Vec<usize>, centered: bool, sign: f64, params: FilterParams) -> Result<Self> {
        if axes.len() < 2 {
            return Err(Error::input("a search needs at least two axes"));
        }
        Ok(Self { system, axes, centered, sign, params, cache: Mutex::new(HashMap::new()) })
    }

    pub fn dims(&self) -> usize {
        self.axes.len() - 1
    }

    pub fn zeta(&self) -> Result<f64> {
        self.system.zeta(&self.axes, self.centered)
    }

    /// Signed real part of the normalised box value and the summed filter degree.
    pub fn value(&self, bx: &[Window]) -> Result<(f64, u64)> {
        let key: Vec<u64> = bx.iter().flat_map(|w| [w.0.to_bits(), w.1.to_bits()]).collect();
        if let Some(v) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(*v);
        }
        let chain = self.system.chain(&self.axes, bx, self.params, self.centered)?;
        let v = self.system.normalized_value(&chain)?;
        let out = (self.sign * v.re, chain_degree(&chain));
        self.cache.lock().expect("cache lock").insert(key, out);
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchLevel {
    pub depth: usize,
    pub bins: Vec<Vec<Window>>,
    pub counts: Vec<u64>,
    pub discarded: u64,
    pub frequencies: Vec<f64>,
    pub relation: Vec<Vec<i8>>,
    /// "descend", "merge", "random" or "stop".
    pub action: String,
    pub chosen: Option<usize>,
    pub queries: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchTrace {
    pub seed: u64,
    pub config: BinSearchConfig,
    pub axes: Vec<usize>,
    pub levels: Vec<SearchLevel>,
    pub marked: Vec<Vec<Window>>,
    pub peaks: Vec<Vec<Window>>,
    /// Charged queries to the Hamiltonian encoding.
    pub total_queries: u64,
    pub dipole_queries: u64,
    /// Set when the depth or peak limit cut the search short.
    pub truncated: bool,
}

impl SearchTrace {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

struct Node {
    bx: Vec<Window>,
    parts: usize,
    depth: usize,
}

fn width(bx: &[Window]) -> f64 {
    bx.iter().map(|w| w.1 - w.0).fold(0.0, f64::max)
}

fn split(bx: &[Window], parts: usize) -> Vec<Vec<Window>> {
    let mut out: Vec<Vec<Window>> = vec![vec![]];
    for w in bx {
        let step = (w.1 - w.0) / parts as f64;
        let pieces: Vec<Window> = (0..parts)
            .map(|i| (w.0 + i as f64 * step, if i + 1 == parts { w.1 } else { w.0 + (i + 1) as f64 * step }))
            .collect();
        out = out
            .into_iter()
            .flat_map(|prefix| {
                pieces.iter().map(move |p| {
                    let mut b = prefix.clone();
                    b.push(*p);
                    b
                })
            })
            .collect();
    }
    out
}

fn contains(outer: &[Window], inner: &[Window]) -> bool {
    outer.iter().zip(inner).all(|(o, i)| o.0 <= i.0 && i.1 <= o.1)
}

/// Recursive bin search from `top`: depth-first along the dominant bin, then
/// through the queue of marked bins in arrival order.
pub fn run_search(problem: &SearchProblem, top: Vec<Window>, config: &BinSearchConfig, seed: u64) -> Result<SearchTrace> {
    config.validate()?;
    if top.len() != problem.dims() {
        return Err(Error::input("top box dimension does not match the axes"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_s = config.samples_per_level;
    let b = config.branching;
    let mut trace = SearchTrace {
        seed,
        config: config.clone(),
        axes: problem.axes.clone(),
        levels: vec![],
        marked: vec![],
        peaks: vec![],
        total_queries: 0,
        dipole_queries: 0,
        truncated: false,
    };
    let mut queue: VecDeque<Node> = VecDeque::new();
    let mut current = Some(Node { bx: top, parts: b, depth: 0 });
    loop {
        let node = match current.take() {
            Some(n) => n,
            None => match queue.pop_front() {
                Some(n) if trace.peaks.iter().any(|p| contains(&n.bx, p)) => continue,
                Some(n) => n,
                None => break,
            },
        };
        if trace.peaks.len() >= config.max_peaks {
            trace.truncated = true;
            break;
        }
        if width(&node.bx) <= config.resolution {
            trace.peaks.push(node.bx);
            continue;
        }
        if node.depth >= config.max_depth {
            trace.truncated = true;
            continue;
        }
        let bins = split(&node.bx, node.parts);
        let mut values = Vec::with_capacity(bins.len());
        let mut degree = 0u64;
        for bx in &bins {
            let (v, d) = problem.value(bx)?;
            values.push(v);
            degree += d;
        }
        let dist = LcuDistribution::from_values(&values, 1.0)?;
        let counts = dist.sample(&mut rng, n_s);
        let k = bins.len();
        let relation = relation_matrix(&counts[..k], n_s, config.tau);
        let queries = n_s * degree;
        trace.total_queries += queries;
        trace.dipole_queries += n_s * problem.axes.len() as u64;

        let dominated: Vec<bool> = (0..k).map(|j| (0..k).any(|i| relation[i][j] == 1)).collect();
        let prominent: Vec<usize> = (0..k).filter(|&i| relation[i].iter().any(|&r| r == 1)).collect();
        let top_set: Vec<usize> = (0..k).filter(|&i| !dominated[i]).collect();
        let next_depth = node.depth + 1;
        let mark = |i: usize, trace: &mut SearchTrace, queue: &mut VecDeque<Node>| {
            trace.marked.push(bins[i].clone());
            queue.push_back(Node { bx: bins[i].clone(), parts: b, depth: next_depth });
        };
        let (action, chosen) = if prominent.is_empty() {
            ("stop", None)
        } else if top_set.len() == 1 {
            let c = top_set[0];
            for &i in prominent.iter().filter(|&&i| i != c) {
                mark(i, &mut trace, &mut queue);
            }
            current = Some(Node { bx: bins[c].clone(), parts: b, depth: next_depth });
            ("descend", Some(c))
        } else if problem.dims() == 1 && top_set.len() == 2 && top_set[1] == top_set[0] + 1 {
            let (lo, hi) = (top_set[0], top_set[1]);
            for &i in prominent.iter().filter(|&&i| i != lo && i != hi) {
                mark(i, &mut trace, &mut queue);
            }
            let union = vec![(bins[lo][0].0, bins[hi][0].1)];
            current = Some(Node { bx: union, parts: 2 * b, depth: next_depth });
            ("merge", Some(lo))
        } else {
            let c = top_set[rng.gen_range(0..top_set.len())];
            let others: BTreeSet<usize> = top_set.iter().chain(&prominent).copied().filter(|&i| i != c).collect();
            for i in others {
                mark(i, &mut trace, &mut queue);
            }
            current = Some(Node { bx: bins[c].clone(), parts: b, depth: next_depth });
            ("random", Some(c))
        };
        trace.levels.push(SearchLevel {
            depth: node.depth,
            frequencies: counts[..k].iter().map(|&c| c as f64 / n_s as f64).collect(),
            discarded: counts[k],
            counts: counts[..k].to_vec(),
            bins,
            relation,
            action: action.into(),
            chosen,
            queries,
        });
    }
    Ok(trace)
}

/// One-dimensional search over `[0, E_max)` for `<psi0|D_out F D_in|psi0>`,
/// with ground-centred dipoles.
pub fn binary_search_1d(system: &SimSystem, axes: (usize, usize), config: &BinSearchConfig, seed: u64) -> Result<SearchTrace> {
    let params = FilterParams { overlap: config.overlap, eps: config.filter_eps };
    let problem = SearchProblem::new(system, vec![axes.0, axes.1], true, 1.0, params)?;
    run_search(&problem, vec![(0.0, system.e_max())], config, seed)
}

/// Top interval for nested searches. Zero sits at a fraction `1/(B+1)` of the
/// span, which never coincides with a bin boundary at any depth.
pub fn nested_top(system: &SimSystem, branching: usize) -> Window {
    (-system.e_max() / branching as f64, system.e_max())
}

/// Search over `depth`-dimensional boxes with nested filters; `axes` holds
/// `depth + 1` dipole axes, first-acting first.
pub fn binary_search_nd(
    system: &SimSystem,
    axes: &[usize],
    depth: usize,
    config: &BinSearchConfig,
    seed: u64,
) -> Result<SearchTrace> {
    if axes.len() != depth + 1 || depth == 0 {
        return Err(Error::input("axes must number depth + 1"));
    }
    let params = FilterParams { overlap: config.overlap, eps: config.filter_eps };
    let problem = SearchProblem::new(system, axes.to_vec(), false, 1.0, params)?;
    run_search(&problem, vec![nested_top(system, config.branching); depth], config, seed)
}
