//! Chebyshev approximations of `erf(kx)` and of smoothed interval indicators.
//!
//! All polynomials live on `[-1, 1]`. An indicator filter with center `w` and
//! half-width `h` is evaluated in the recentred variable
//! `z = (x - w) / (1 + |w|)`, which keeps `z` inside `[-1, 1]` for every `x`
//! in the domain. It is the average of two copies of one erf polynomial,
//!
//! ```text
//! F(x) = (P(y+) + P(y-)) / 2,   y± = (h' ± z) / (1 + h'),   h' = h / (1 + |w|)
//! ```
//!
//! so `F` is even in `z`.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::erf::{erf, erfc};

use crate::error::{Error, Result};
use crate::operator::{hermitian_eigen, spectral_norm, DenseOperator};
use crate::tolerances::{
    CERT_GRID_MAX_DEGREE, CERT_GRID_POINTS, COMBINED_COEFF_MAX_DEGREE, FILTER_SUP_SLACK, MAX_POLY_DEGREE,
    NORM_SLACK,
};

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// `e^{-x} I_j(x)` for `j = 0, 1, ...` until the terms are negligible.
///
/// Miller's backward recurrence, normalised with `I_0 + 2 sum_j I_j = e^x`.
pub fn scaled_bessel_i(x: f64) -> Vec<f64> {
    if x <= 0.0 {
        return vec![1.0];
    }
    let top = (10.0 * x.sqrt()).ceil() as usize + 60;
    let mut b = vec![0.0; top + 2];
    b[top] = 1.0;
    for j in (1..=top).rev() {
        b[j - 1] = (2.0 * j as f64 / x) * b[j] + b[j + 1];
        if b[j - 1] > 1e200 {
            for v in &mut b[j - 1..] {
                *v *= 1e-200;
            }
        }
    }
    b.truncate(top + 1);
    let norm = b[0] + 2.0 * b[1..].iter().sum::<f64>();
    b.iter_mut().for_each(|v| *v /= norm);
    b
}

/// Steepness that makes `|erf(kx) - sgn(x)| <= eps` for `|x| >= delta / 2`.
pub fn choose_k(delta: f64, eps: f64) -> Result<f64> {
    let upper = (2.0 / (std::f64::consts::E * std::f64::consts::PI)).sqrt();
    if !(delta > 0.0) {
        return Err(Error::input("smoothing width must be positive"));
    }
    if !(eps > 0.0 && eps < upper) {
        return Err(Error::input(format!("eps must lie in (0, {upper:.6}), got {eps}")));
    }
    Ok(std::f64::consts::SQRT_2 / delta * (2.0 / (std::f64::consts::PI * eps * eps)).ln().sqrt())
}

/// Unscaled Chebyshev coefficients of the erf series truncated after the
/// `I_m` term (degree `2m + 1`), indexed by Chebyshev order.
pub fn erf_chebyshev_coefficients(k: f64, m: usize) -> Vec<f64> {
    let s = scaled_bessel_i(k * k / 2.0);
    let bessel = |j: usize| s.get(j).copied().unwrap_or(0.0);
    let pref = 2.0 * k / SQRT_PI;
    let mut c = vec![0.0; 2 * m + 2];
    for i in 0..=m {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        let next = if i < m { bessel(i + 1) } else { 0.0 };
        c[2 * i + 1] = pref * sign * (bessel(i) + next) / (2 * i + 1) as f64;
    }
    c
}

/// Clenshaw evaluation of `sum_j c_j T_j(x)`.
pub fn chebyshev_eval(c: &[f64], x: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &cj in c.iter().skip(1).rev() {
        let b0 = cj + 2.0 * x * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    c.first().copied().unwrap_or(0.0) + x * b1 - b2
}

/// Chebyshev nodes of the first kind.
pub fn chebyshev_grid(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (std::f64::consts::PI * (i as f64 + 0.5) / n as f64).cos())
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErfPolynomial {
    pub k: f64,
    pub degree: usize,
    /// Indexed by Chebyshev order; even entries are zero.
    pub coeffs: Vec<f64>,
    /// Rigorous bound on `|P(x) - erf(kx)|` over `[-1, 1]`.
    pub cert_error: f64,
    /// Worst deviation measured on the certification grid, when it was run.
    pub grid_error: Option<f64>,
}

impl ErfPolynomial {
    pub fn eval(&self, x: f64) -> f64 {
        chebyshev_eval(&self.coeffs, x)
    }
}

/// Builds the erf series with the smallest odd degree whose certified error
/// is at most `eps`.
///
/// The truncated series is divided by `1 + tail`, which makes `|P| <= 1` hold
/// exactly and at most doubles the error.
pub fn build_erf_poly(k: f64, eps: f64) -> Result<ErfPolynomial> {
    if !(k > 0.0) || !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::input("build_erf_poly needs k > 0 and 0 < eps <= 1"));
    }
    let s = scaled_bessel_i(k * k / 2.0);
    let pref = 2.0 * k / SQRT_PI;
    // tails[m] bounds the sup-norm of everything dropped after the I_m term.
    let len = s.len();
    let mut tails = vec![0.0; len + 1];
    for j in (1..len).rev() {
        let jf = j as f64;
        tails[j - 1] = tails[j] + pref * s[j] * (1.0 / (2.0 * jf + 1.0) + 1.0 / (2.0 * jf - 1.0));
    }
    let target = eps / 2.0;
    let m = (0..len).find(|&m| tails[m] <= target).unwrap_or(len);
    let degree = 2 * m + 1;
    if degree > MAX_POLY_DEGREE {
        return Err(Error::resource(format!(
            "erf polynomial for k = {k:.3}, eps = {eps:e} needs degree {degree} > {MAX_POLY_DEGREE}"
        )));
    }
    let tail = tails[m.min(len)];
    let scale = 1.0 / (1.0 + tail);
    let coeffs: Vec<f64> = erf_chebyshev_coefficients(k, m).into_iter().map(|c| c * scale).collect();
    let cert_error = 2.0 * tail / (1.0 + tail);
    let mut p = ErfPolynomial { k, degree, coeffs, cert_error, grid_error: None };
    if degree <= CERT_GRID_MAX_DEGREE {
        let worst = chebyshev_grid(CERT_GRID_POINTS)
            .into_iter()
            .map(|x| (p.eval(x) - erf(k * x)).abs())
            .fold(0.0, f64::max);
        if worst > cert_error + 1e-12 {
            return Err(Error::resource(format!(
                "erf polynomial grid error {worst:e} exceeds bound {cert_error:e}"
            )));
        }
        p.grid_error = Some(worst);
    }
    Ok(p)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certification {
    pub method: String,
    /// Smallest value seen on `[w-h+delta, w+h-delta]`.
    pub inside_min: Option<f64>,
    /// Largest value seen outside `[w-h-delta, w+h+delta]`.
    pub outside_max: Option<f64>,
    pub sup: Option<f64>,
    /// Error of the erf polynomial used by both halves.
    pub poly_error: f64,
}

/// Smoothed indicator of `[center - half_width, center + half_width]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChebyshevFilter {
    pub center: f64,
    pub half_width: f64,
    /// Half-width of each ramp.
    pub delta: f64,
    pub eps: f64,
    /// Steepness in the recentred variable.
    pub k: f64,
    pub degree: usize,
    pub erf: ErfPolynomial,
    /// Chebyshev coefficients of `F` in the recentred variable; odd orders are zero.
    pub even_coeffs: Option<Vec<f64>>,
    pub certification: Certification,
}

impl ChebyshevFilter {
    pub fn lo(&self) -> f64 {
        self.center - self.half_width
    }

    pub fn hi(&self) -> f64 {
        self.center + self.half_width
    }

    fn scale(&self) -> f64 {
        1.0 + self.center.abs()
    }

    fn inner(&self) -> f64 {
        self.half_width / self.scale()
    }

    /// Value at `x` in `[-1, 1]`.
    pub fn eval(&self, x: f64) -> f64 {
        let z = (x - self.center) / self.scale();
        let h = self.inner();
        let plus = self.erf.eval((h + z) / (1.0 + h));
        let minus = self.erf.eval((h - z) / (1.0 + h));
        0.5 * (plus + minus)
    }

    /// Value from the combined even coefficients, if they were materialised.
    pub fn eval_combined(&self, x: f64) -> Option<f64> {
        let z = (x - self.center) / self.scale();
        self.even_coeffs.as_ref().map(|c| chebyshev_eval(c, z))
    }

    /// Upper bound on `|F|` over `[-1, 1]`; each half is bounded by 1 by construction.
    pub fn sup_bound(&self) -> f64 {
        1.0
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Filter close to 1 on `[a + delta, b - delta]` and close to 0 outside
/// `[a - delta, b + delta]`, with pointwise error at most `eps`.
pub fn build_indicator(a: f64, b: f64, delta: f64, eps: f64) -> Result<ChebyshevFilter> {
    if !(-1.0..=1.0).contains(&a) || !(-1.0..=1.0).contains(&b) || a >= b {
        return Err(Error::input(format!("indicator window [{a}, {b}] must satisfy -1 <= a < b <= 1")));
    }
    let half_width = 0.5 * (b - a);
    if !(delta > 0.0) || delta >= half_width {
        return Err(Error::input(format!(
            "ramp half-width {delta} must be positive and below the window half-width {half_width}"
        )));
    }
    if !(eps > 0.0 && eps < 0.9) {
        return Err(Error::input("indicator eps must lie in (0, 0.9)"));
    }
    let center = 0.5 * (a + b);
    let scale = 1.0 + center.abs();
    let h = half_width / scale;
    let k = choose_k(2.0 * delta / scale, eps / 2.0)?;
    let erf_poly = build_erf_poly(k * (1.0 + h), eps / 2.0)?;
    let degree = erf_poly.degree;
    let mut f = ChebyshevFilter {
        center,
        half_width,
        delta,
        eps,
        k,
        degree,
        certification: Certification {
            method: "tail-bound".into(),
            inside_min: None,
            outside_max: None,
            sup: None,
            poly_error: erf_poly.cert_error,
        },
        erf: erf_poly,
        even_coeffs: None,
    };
    if degree <= COMBINED_COEFF_MAX_DEGREE {
        f.even_coeffs = Some(combined_even_coefficients(&f));
    }
    if degree <= CERT_GRID_MAX_DEGREE {
        certify_on_grid(&mut f)?;
    }
    Ok(f)
}

fn combined_even_coefficients(f: &ChebyshevFilter) -> Vec<f64> {
    let n = f.degree + 1;
    let scale = f.scale();
    let nodes = chebyshev_grid(n);
    let vals: Vec<f64> = nodes.iter().map(|&z| f.eval(f.center + z * scale)).collect();
    let mut c = vec![0.0; n];
    for j in (0..n).step_by(2) {
        let s: f64 = vals
            .iter()
            .enumerate()
            .map(|(i, v)| v * (std::f64::consts::PI * j as f64 * (i as f64 + 0.5) / n as f64).cos())
            .sum();
        c[j] = 2.0 * s / n as f64;
    }
    c[0] *= 0.5;
    c
}

fn certify_on_grid(f: &mut ChebyshevFilter) -> Result<()> {
    let (lo_in, hi_in) = (f.lo() + f.delta, f.hi() - f.delta);
    let (lo_out, hi_out) = (f.lo() - f.delta, f.hi() + f.delta);
    let mut inside_min = f64::INFINITY;
    let mut outside_max = f64::NEG_INFINITY;
    let mut sup: f64 = 0.0;
    let mut low: f64 = 0.0;
    for x in chebyshev_grid(CERT_GRID_POINTS) {
        let v = f.eval(x);
        sup = sup.max(v.abs());
        low = low.min(v);
        if (lo_in..=hi_in).contains(&x) {
            inside_min = inside_min.min(v);
        }
        if x <= lo_out || x >= hi_out {
            outside_max = outside_max.max(v);
        }
    }
    let slack = FILTER_SUP_SLACK;
    let ok = inside_min >= 1.0 - f.eps - slack
        && outside_max <= f.eps + slack
        && sup <= 1.0 + f.eps + slack
        && low >= -f.eps - slack;
    f.certification = Certification {
        method: "tail-bound+grid".into(),
        inside_min: inside_min.is_finite().then_some(inside_min),
        outside_max: outside_max.is_finite().then_some(outside_max),
        sup: Some(sup),
        poly_error: f.erf.cert_error,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::resource(format!(
            "indicator on [{}, {}] failed grid certification",
            f.lo(),
            f.hi()
        )))
    }
}

/// Degree predicted for a centred indicator with ramp half-width `delta`.
pub fn degree_estimate(delta: f64, eps: f64) -> usize {
    (DEGREE_ESTIMATE_CONSTANT * (1.0 / eps).ln() / delta).ceil() as usize
}

/// Fitted on centred windows over `delta in [0.01, 0.2]`, `eps in [1e-4, 1e-2]`.
pub const DEGREE_ESTIMATE_CONSTANT: f64 = 2.7;

fn check_rescaled(h: &DenseOperator) -> Result<()> {
    let norm = spectral_norm(&h.matrix, h.hermitian);
    if norm > 1.0 + NORM_SLACK {
        return Err(Error::input(format!("rescaled operator has norm {norm} > 1")));
    }
    if !h.hermitian {
        return Err(Error::input("filters apply to Hermitian operators only"));
    }
    Ok(())
}

fn half_arguments(f: &ChebyshevFilter, h: &DMatrix<Complex64>) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    let n = h.nrows();
    let id = DMatrix::<Complex64>::identity(n, n);
    let z = (h - id.scale(f.center)).scale(1.0 / f.scale());
    let inner = f.inner();
    let norm = 1.0 / (1.0 + inner);
    let plus = (id.scale(inner) + &z).scale(norm);
    let minus = (id.scale(inner) - &z).scale(norm);
    (plus, minus)
}

fn poly_of_matrix(c: &[f64], y: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = y.nrows();
    let mut prev = DMatrix::<Complex64>::identity(n, n);
    let mut acc = prev.scale(c[0]);
    if c.len() == 1 {
        return acc;
    }
    let mut cur = y.clone();
    acc += cur.scale(c[1]);
    let two_y = y.scale(2.0);
    for &cj in &c[2..] {
        let next = &two_y * &cur - &prev;
        if cj != 0.0 {
            acc += next.scale(cj);
        }
        prev = cur;
        cur = next;
    }
    acc
}

/// `F(H)` through the three-term Chebyshev recurrence on matrices.
pub fn apply_filter_matrix(f: &ChebyshevFilter, h: &DenseOperator) -> Result<DenseOperator> {
    check_rescaled(h)?;
    let (plus, minus) = half_arguments(f, &h.matrix);
    let m = (poly_of_matrix(&f.erf.coeffs, &plus) + poly_of_matrix(&f.erf.coeffs, &minus)).scale(0.5);
    Ok(DenseOperator { matrix: m, hermitian: true })
}

fn clenshaw_vector(c: &[f64], y: &DMatrix<Complex64>, v: &DVector<Complex64>) -> DVector<Complex64> {
    let n = v.len();
    let mut b1 = DVector::<Complex64>::zeros(n);
    let mut b2 = DVector::<Complex64>::zeros(n);
    for &cj in c.iter().skip(1).rev() {
        let b0 = v.scale(cj) + (y * &b1).scale(2.0) - &b2;
        b2 = b1;
        b1 = b0;
    }
    v.scale(c[0]) + y * b1 - b2
}

/// `F(H) v` by Clenshaw recurrence; never forms `F(H)`.
pub fn apply_filter_vector(f: &ChebyshevFilter, h: &DenseOperator, v: &DVector<Complex64>) -> Result<DVector<Complex64>> {
    check_rescaled(h)?;
    let (plus, minus) = half_arguments(f, &h.matrix);
    Ok((clenshaw_vector(&f.erf.coeffs, &plus, v) + clenshaw_vector(&f.erf.coeffs, &minus, v)).scale(0.5))
}

/// `F(H)` through the eigendecomposition of `H`.
pub fn apply_filter_spectral(f: &ChebyshevFilter, h: &DenseOperator) -> Result<DenseOperator> {
    check_rescaled(h)?;
    let (vals, vecs) = hermitian_eigen(&h.matrix);
    let diag = DMatrix::from_diagonal(&DVector::from_iterator(
        vals.len(),
        vals.iter().map(|&l| Complex64::new(f.eval(l), 0.0)),
    ));
    Ok(DenseOperator { matrix: &vecs * diag * vecs.adjoint(), hermitian: true })
}

/// `int_{eps_cut}^{delta} |erf(x / delta) - 1| dx`: the error an erf step of
/// width `delta` accumulates on one side of the jump.
pub fn jump_error_integral(delta: f64, eps_cut: f64) -> f64 {
    if !(delta > 0.0) || eps_cut >= delta {
        return 0.0;
    }
    let lo = eps_cut.max(0.0);
    delta * integrate(|y| erfc(y), lo / delta, 1.0)
}

/// `int_0^1 |erf(y) - 1| dy`.
pub fn jump_unit_constant() -> f64 {
    integrate(|y| erfc(y), 0.0, 1.0)
}

/// Composite Gauss-Legendre (5 points per panel) over 200 panels.
fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    const NODES: [f64; 5] = [0.0, -0.538_469_310_105_683_1, 0.538_469_310_105_683_1, -0.906_179_845_938_664, 0.906_179_845_938_664];
    const WEIGHTS: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let panels = 200;
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (x, w) in NODES.iter().zip(WEIGHTS) {
            total += w * f(mid + 0.5 * h * x);
        }
    }
    0.5 * h * total
}
