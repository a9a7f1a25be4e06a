use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Printed with every report.
pub const COST_CAVEAT: &str =
    "asymptotic query-count orders evaluated with unit prefactors; not gate counts";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostInputs {
    /// Spin-orbitals.
    pub n: f64,
    /// Electrons.
    pub eta: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub eps: f64,
    pub order: u32,
    /// Overlap of the initial state with the ground state.
    pub p0: f64,
    pub gap: f64,
}

impl CostInputs {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.n, self.eta, self.alpha, self.beta, self.gamma, self.eps, self.gap];
        if positive.iter().any(|v| !(*v > 0.0)) || self.order == 0 {
            return Err(Error::input("cost inputs must be positive"));
        }
        if !(self.p0 > 0.0 && self.p0 <= 1.0) {
            return Err(Error::input("initial overlap must lie in (0, 1]"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostLine {
    pub name: String,
    pub formula: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub inputs: CostInputs,
    pub lines: Vec<CostLine>,
    pub caveat: String,
}

impl CostReport {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.lines.iter().find(|l| l.name == name).map(|l| l.value)
    }
}

fn line(name: &str, formula: &str, value: f64) -> CostLine {
    CostLine { name: name.into(), formula: formula.into(), value }
}

pub fn cost_report(c: &CostInputs) -> Result<CostReport> {
    c.validate()?;
    let n = c.order as i32;
    let log_inv_eps = (1.0 / c.eps).ln().max(1.0);
    let lines = vec![
        line("bin_sorting", "alpha^2 beta^2 / gamma", c.alpha.powi(2) * c.beta.powi(2) / c.gamma),
        line(
            "peak_height",
            "N^6 eta^2 / (gamma eps) * log(1/eps)",
            c.n.powi(6) * c.eta.powi(2) / (c.gamma * c.eps) * log_inv_eps,
        ),
        line(
            "order_n_search",
            "alpha^(2n) beta^(n+1) / gamma^n",
            c.alpha.powi(2 * n) * c.beta.powi(n + 1) / c.gamma.powi(n),
        ),
        line(
            "order_n_estimation",
            "N^(5n+1) eta^(n+1) / (gamma^n eps)",
            c.n.powi(5 * n + 1) * c.eta.powi(n + 1) / (c.gamma.powi(n) * c.eps),
        ),
        line(
            "ground_state_prep",
            "alpha / (sqrt(p0) G) * log(1/eps)",
            c.alpha / (c.p0.sqrt() * c.gap) * log_inv_eps,
        ),
    ];
    Ok(CostReport { inputs: c.clone(), lines, caveat: COST_CAVEAT.into() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QpeReport {
    pub k_bits: u32,
    /// Smallest k with `2^k > alpha / gamma`.
    pub k_min: u32,
    pub k_sufficient: bool,
    pub queries_per_run: f64,
    /// `alpha^2/gamma + log(alpha/gamma)^2 / log(k)`.
    pub total: f64,
    /// `alpha^2 / (gamma^2 eps)`.
    pub combined: f64,
    /// `alpha^2 / (gamma eps)` for the filtering approach.
    pub filtering: f64,
    /// `combined / filtering`, which scales as `1/gamma`.
    pub ratio: f64,
    pub caveat: String,
}

pub fn qpe_baseline_report(c: &CostInputs, k_bits: u32) -> Result<QpeReport> {
    c.validate()?;
    if k_bits == 0 {
        return Err(Error::input("k_bits must be at least 1"));
    }
    let target = c.alpha / c.gamma;
    let mut k_min = 0u32;
    while 2f64.powi(k_min as i32) <= target {
        k_min += 1;
    }
    // log(1) = 0 would divide by zero; the denominator is floored at log 2.
    let log_k = (k_bits as f64).ln().max(std::f64::consts::LN_2);
    let total = c.alpha.powi(2) / c.gamma + target.ln().powi(2) / log_k;
    let combined = c.alpha.powi(2) / (c.gamma.powi(2) * c.eps);
    let filtering = c.alpha.powi(2) / (c.gamma * c.eps);
    Ok(QpeReport {
        k_bits,
        k_min,
        k_sufficient: k_bits >= k_min,
        queries_per_run: 2f64.powi(k_bits as i32),
        total,
        combined,
        filtering,
        ratio: combined / filtering,
        caveat: COST_CAVEAT.into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inputs() -> CostInputs {
        CostInputs { n: 4.0, eta: 2.0, alpha: 4.0, beta: 2.0, gamma: 0.1, eps: 0.1, order: 1, p0: 1.0, gap: 1.0 }
    }

    #[test]
    fn bin_sorting_example() {
        let r = cost_report(&inputs()).unwrap();
        assert!((r.get("bin_sorting").unwrap() - 640.0).abs() < 1e-9);
    }

    #[test]
    fn qpe_example() {
        let c = CostInputs { alpha: 1.0, ..inputs() };
        let q = qpe_baseline_report(&c, 4).unwrap();
        assert!((q.combined - 1000.0).abs() < 1e-9);
        assert!(2f64.powi(q.k_min as i32) > c.alpha / c.gamma);
        assert!(2f64.powi(q.k_min as i32 - 1) <= c.alpha / c.gamma);
    }

    #[test]
    fn invalid_inputs_rejected() {
        assert!(cost_report(&CostInputs { p0: 0.0, ..inputs() }).is_err());
        assert!(cost_report(&CostInputs { gamma: -1.0, ..inputs() }).is_err());
    }
}
