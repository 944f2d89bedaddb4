//! Parameter-regime theory: interpolation exponents, the explicit constant
//! `K(p, n, eta)`, the gamma thresholds and the mu threshold that decide
//! whether a configuration falls in a uniform-boundedness regime.
//!
//! Everything here is a pure function of its arguments.

// `!(x > y)` is deliberate throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::model::ModelParams;

/// `2n/(n+1)`: the gamma bound coming from the signal-gradient interpolation.
pub fn gamma_threshold_gradient(n: usize) -> f64 {
    let n = n as f64;
    2.0 * n / (n + 1.0)
}

/// `n(2 m2 - m1 + 1)/(n+1)`: the gamma bound coming from the cross-diffusion term.
pub fn gamma_threshold_sensitivity(m1: f64, m2: f64, n: usize) -> f64 {
    let n = n as f64;
    n * (2.0 * m2 - m1 + 1.0) / (n + 1.0)
}

/// Lower gamma bound of the pure gradient-damping regime.
pub fn gamma_threshold_a1(m1: f64, m2: f64, n: usize) -> f64 {
    gamma_threshold_gradient(n).max(gamma_threshold_sensitivity(m1, m2, n))
}

/// The five interpolation exponents at a given `p`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExponentSet {
    pub p: f64,
    pub theta_bar: f64,
    pub sigma_bar: f64,
    pub theta_hat: f64,
    pub sigma_hat: f64,
    pub theta_tilde: f64,
}

pub fn exponent_set(p: f64, gamma: f64, m1: f64, m2: f64, n: usize) -> Result<ExponentSet> {
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::Argument(format!("p must be > 1, got {p}")));
    }
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::Argument(format!("gamma must be > 0, got {gamma}")));
    }
    if n == 0 {
        return Err(Error::Argument("n must be >= 1".into()));
    }
    let q = p + 2.0 * m2 - m1 - 1.0;
    if !(q > 0.0) {
        return Err(Error::Argument(format!(
            "p + 2 m2 - m1 - 1 must be > 0, got {q}"
        )));
    }
    let inv_n = 1.0 / n as f64;
    let a = (p + gamma - 1.0) / gamma;
    let denom = a + inv_n - 1.0 / gamma;
    let half = 0.5 * (p - 1.0);
    Ok(ExponentSet {
        p,
        theta_bar: a * (1.0 - 1.0 / (p + 1.0)) / denom,
        sigma_bar: gamma * (p + 1.0) / (p + gamma - 1.0),
        theta_hat: a * (1.0 - p / ((p + 1.0) * q)) / denom,
        sigma_hat: gamma * (p + 1.0) * q / (p * (p + gamma - 1.0)),
        theta_tilde: half / (half + inv_n),
    })
}

/// Flags for the five interpolation inequalities.
///
/// The two Young-exponent products `sigma theta / gamma` must lie in `(0, 1)`:
/// a non-positive product (possible when `p` is close to 1 and gamma is small)
/// does not describe a usable interpolation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExponentVerdict {
    pub theta_bar_in_unit: bool,
    pub sigma_theta_bar_below_one: bool,
    pub theta_hat_in_unit: bool,
    pub sigma_theta_hat_below_one: bool,
    pub theta_tilde_in_unit: bool,
    pub all_hold: bool,
}

fn in_unit_interval(x: f64) -> bool {
    x > 0.0 && x < 1.0
}

pub fn exponent_verdict(es: &ExponentSet, gamma: f64) -> ExponentVerdict {
    let theta_bar_in_unit = in_unit_interval(es.theta_bar);
    let sigma_theta_bar_below_one = in_unit_interval(es.sigma_bar * es.theta_bar / gamma);
    let theta_hat_in_unit = in_unit_interval(es.theta_hat);
    let sigma_theta_hat_below_one = in_unit_interval(es.sigma_hat * es.theta_hat / gamma);
    let theta_tilde_in_unit = in_unit_interval(es.theta_tilde);
    ExponentVerdict {
        theta_bar_in_unit,
        sigma_theta_bar_below_one,
        theta_hat_in_unit,
        sigma_theta_hat_below_one,
        theta_tilde_in_unit,
        all_hold: theta_bar_in_unit
            && sigma_theta_bar_below_one
            && theta_hat_in_unit
            && sigma_theta_hat_below_one
            && theta_tilde_in_unit,
    }
}

/// Which inequalities a `p` scan has to satisfy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScanTarget {
    /// All five; used for the gradient-damping regime.
    All,
    /// Only the hatted and tilde inequalities. The damping-plus-large-mu regime
    /// never uses the barred pair, whose gamma requirement it does not meet.
    HatAndTilde,
}

impl ScanTarget {
    fn accepts(self, v: &ExponentVerdict) -> bool {
        match self {
            ScanTarget::All => v.all_hold,
            ScanTarget::HatAndTilde => {
                v.theta_hat_in_unit && v.sigma_theta_hat_below_one && v.theta_tilde_in_unit
            }
        }
    }
}

/// Settings of the finite `p` scan standing in for "p large enough".
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanSettings {
    pub p_scan_max: f64,
    pub samples: usize,
}

impl Default for ScanSettings {
    fn default() -> Self {
        Self {
            p_scan_max: 1e3,
            samples: 512,
        }
    }
}

/// Offset of the first scanned point above `p = 1`.
const SCAN_FIRST_OFFSET: f64 = 1e-3;

/// Geometric grid in `p - 1`, from `1 + 1e-3` up to `p_scan_max` inclusive.
pub fn scan_grid(p_scan_max: f64, samples: usize) -> Vec<f64> {
    let span = p_scan_max - 1.0;
    if !(span > SCAN_FIRST_OFFSET) || samples == 0 {
        return Vec::new();
    }
    if samples == 1 {
        return vec![p_scan_max];
    }
    let ratio = span / SCAN_FIRST_OFFSET;
    let last = (samples - 1) as f64;
    (0..samples)
        .map(|k| {
            if k + 1 == samples {
                p_scan_max
            } else {
                1.0 + SCAN_FIRST_OFFSET * ratio.powf(k as f64 / last)
            }
        })
        .collect()
}

/// Smallest scanned `p` from which every remaining scan point satisfies the
/// target inequalities. `None` when the top of the range already fails.
pub fn scan_p1(
    target: ScanTarget,
    gamma: f64,
    m1: f64,
    m2: f64,
    n: usize,
    scan: ScanSettings,
) -> Option<f64> {
    let grid = scan_grid(scan.p_scan_max, scan.samples);
    let holds = |p: f64| {
        exponent_set(p, gamma, m1, m2, n)
            .map(|es| target.accepts(&exponent_verdict(&es, gamma)))
            .unwrap_or(false)
    };
    let mut candidate = None;
    for &p in grid.iter().rev() {
        if holds(p) {
            candidate = Some(p);
        } else {
            break;
        }
    }
    candidate
}

/// Candidate `p1` for the full set of five inequalities. Requires
/// `gamma > max{2n/(n+1), n(2 m2 - m1 + 1)/(n+1)}`; otherwise `None`.
pub fn find_p1(
    gamma: f64,
    m1: f64,
    m2: f64,
    n: usize,
    p_scan_max: f64,
    samples: usize,
) -> Option<f64> {
    if n == 0 || !(gamma > gamma_threshold_a1(m1, m2, n)) {
        return None;
    }
    scan_p1(
        ScanTarget::All,
        gamma,
        m1,
        m2,
        n,
        ScanSettings {
            p_scan_max,
            samples,
        },
    )
}

/// `ln K(p, n, eta)`.
pub fn ln_kappa(p: f64, n: usize, eta: f64) -> Result<f64> {
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::Argument(format!("p must be > 1, got {p}")));
    }
    if !(eta.is_finite() && eta >= 0.0) {
        return Err(Error::Argument(format!("eta must be >= 0, got {eta}")));
    }
    if n == 0 {
        return Err(Error::Argument("n must be >= 1".into()));
    }
    let n = n as f64;
    let first = std::f64::consts::LN_2 + 0.5 * (p + 1.0) * (p.ln() + (p + n + eta - 1.0).ln())
        - (p + 1.0).ln();
    let inner = 8f64.ln() + (4.0 * p * p + n).ln() + (p - 1.0).ln() - p.ln() - (p + 1.0).ln();
    Ok(first + 0.5 * (p - 1.0) * inner)
}

/// The explicit constant
///
/// ```text
/// K(p,n,eta) = 2 p^((p+1)/2) (p+n+eta-1)^((p+1)/2) / (p+1)
///              * [8 (4p^2+n)(p-1) / (p(p+1))]^((p-1)/2)
/// ```
///
/// evaluated through its logarithm so that `p` in the hundreds does not
/// overflow the intermediate powers. `eta = 0` is admitted.
pub fn kappa(p: f64, n: usize, eta: f64) -> Result<f64> {
    ln_kappa(p, n, eta).map(f64::exp)
}

/// `(K1, K2) = (p (p+n-1+eta) |v0|^2, K(p,n,eta) |v0|^(2p))`.
pub fn k_constants(p: f64, n: usize, eta: f64, v0_sup: f64) -> Result<(f64, f64)> {
    let ln_k = ln_kappa(p, n, eta)?;
    if !(v0_sup.is_finite() && v0_sup >= 0.0) {
        return Err(Error::Argument(format!(
            "v0_sup must be >= 0, got {v0_sup}"
        )));
    }
    let k1 = p * (p + n as f64 - 1.0 + eta) * v0_sup * v0_sup;
    let k2 = if v0_sup == 0.0 {
        0.0
    } else {
        (ln_k + 2.0 * p * v0_sup.ln()).exp()
    };
    Ok((k1, k2))
}

/// `(4/p0) K(p0, n, 0) (chi |v0|)^(2 p0)`.
pub fn mu_threshold(p0: f64, n: usize, chi: f64, v0_sup: f64) -> Result<f64> {
    let ln_k = ln_kappa(p0, n, 0.0)?;
    let s = chi * v0_sup;
    if !(s.is_finite() && s >= 0.0) {
        return Err(Error::Argument(format!(
            "chi * v0_sup must be finite and >= 0, got {s}"
        )));
    }
    if s == 0.0 {
        return Ok(0.0);
    }
    Ok(((4.0 / p0).ln() + ln_k + 2.0 * p0 * s.ln()).exp())
}

/// Small-data condition `0 < chi |v0| <= 1/(6(n+1))` for the linear model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TaoVerdict {
    pub holds: bool,
    /// Set when `chi |v0| = 0`, where the condition holds trivially.
    pub vacuous: bool,
}

pub fn tao_condition(chi: f64, v0_sup: f64, n: usize) -> TaoVerdict {
    let s = chi * v0_sup;
    let bound = 1.0 / (6.0 * (n as f64 + 1.0));
    TaoVerdict {
        holds: s <= bound,
        vacuous: s == 0.0,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RegimeCase {
    /// Gamma above both thresholds; no condition on mu.
    A1,
    /// Gamma in the lower window and mu above the threshold.
    A2WithMu,
    /// Gamma in the lower window but mu at or below the threshold (or no
    /// candidate `p0` was found in the scan).
    A2MuTooSmall,
    None,
}

impl RegimeCase {
    pub fn as_str(self) -> &'static str {
        match self {
            RegimeCase::A1 => "A1",
            RegimeCase::A2WithMu => "A2_with_mu",
            RegimeCase::A2MuTooSmall => "A2_mu_too_small",
            RegimeCase::None => "none",
        }
    }
}

impl fmt::Display for RegimeCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Classification of one parameter set.
///
/// `p0_used` is the scan candidate, not a certified constant: the
/// regularity exponent that also enters `p0` has no closed form, so the
/// reported `mu_threshold` is the formula evaluated at the candidate.
#[derive(Clone, Debug, PartialEq)]
pub struct RegimeReport {
    pub gamma: f64,
    pub gamma_lower_a1: f64,
    pub gamma_lower_a2: f64,
    pub gamma_upper_a2: f64,
    pub case: RegimeCase,
    pub p1_candidate: Option<f64>,
    pub p0_used: Option<f64>,
    pub kappa_value: Option<f64>,
    pub mu: f64,
    pub mu_threshold: Option<f64>,
    pub tao_holds: bool,
    pub tao_vacuous: bool,
    pub c0_criterion_holds: bool,
    pub v0_sup: f64,
    pub theorem_strict: bool,
}

pub fn classify(params: &ModelParams, v0_sup: f64, scan: ScanSettings) -> RegimeReport {
    let n = params.dim;
    let (m1, m2, gamma) = (params.m1, params.m2, params.gamma);
    let gamma_lower_a1 = gamma_threshold_a1(m1, m2, n);
    let gamma_lower_a2 = gamma_threshold_sensitivity(m1, m2, n);
    let gamma_upper_a2 = gamma_threshold_gradient(n);

    let in_a1 = gamma_lower_a1 < gamma && gamma <= 2.0;
    let in_a2_window = gamma_lower_a2 < gamma && gamma <= gamma_upper_a2;

    let target = if in_a1 {
        Some(ScanTarget::All)
    } else if in_a2_window {
        Some(ScanTarget::HatAndTilde)
    } else {
        None
    };
    let p1 = target.and_then(|t| scan_p1(t, gamma, m1, m2, n, scan));
    let kappa_value = p1.and_then(|p| kappa(p, n, 0.0).ok());
    let mu_thr = p1.and_then(|p| mu_threshold(p, n, params.chi, v0_sup).ok());

    let case = if in_a1 {
        RegimeCase::A1
    } else if in_a2_window {
        match mu_thr {
            Some(thr) if params.mu > thr => RegimeCase::A2WithMu,
            _ => RegimeCase::A2MuTooSmall,
        }
    } else {
        RegimeCase::None
    };

    let tao = tao_condition(params.chi, v0_sup, n);
    RegimeReport {
        gamma,
        gamma_lower_a1,
        gamma_lower_a2,
        gamma_upper_a2,
        case,
        p1_candidate: p1,
        p0_used: p1,
        kappa_value,
        mu: params.mu,
        mu_threshold: mu_thr,
        tao_holds: tao.holds,
        tao_vacuous: tao.vacuous,
        c0_criterion_holds: m2 < 0.5 * (m1 + 1.0),
        v0_sup,
        theorem_strict: params.validate().theorem_strict,
    }
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "na".to_string(), |v| format!("{v}"))
}

impl RegimeReport {
    /// Flat `key=value` lines.
    pub fn to_key_values(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k}={v}");
        };
        kv("case", self.case.to_string());
        kv("gamma", format!("{}", self.gamma));
        kv("gamma_lower_a1", format!("{}", self.gamma_lower_a1));
        kv("gamma_lower_a2", format!("{}", self.gamma_lower_a2));
        kv("gamma_upper_a2", format!("{}", self.gamma_upper_a2));
        kv("p1_candidate", opt(self.p1_candidate));
        kv("p0_used", opt(self.p0_used));
        kv("kappa_value", opt(self.kappa_value));
        kv("mu", format!("{}", self.mu));
        kv("mu_threshold", opt(self.mu_threshold));
        kv("v0_sup", format!("{}", self.v0_sup));
        kv("tao_holds", self.tao_holds.to_string());
        kv("tao_vacuous", self.tao_vacuous.to_string());
        kv("c0_criterion_holds", self.c0_criterion_holds.to_string());
        kv("theorem_strict", self.theorem_strict.to_string());
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    /// Direct product form, only trustworthy for moderate `p`.
    fn kappa_direct(p: f64, n: usize, eta: f64) -> f64 {
        let n = n as f64;
        2.0 * p.powf(0.5 * (p + 1.0)) * (p + n + eta - 1.0).powf(0.5 * (p + 1.0)) / (p + 1.0)
            * (8.0 * (4.0 * p * p + n) * (p - 1.0) / (p * (p + 1.0))).powf(0.5 * (p - 1.0))
    }

    #[test]
    fn gamma_thresholds() {
        assert!(close(gamma_threshold_a1(1.0, 1.0, 2), 4.0 / 3.0, 1e-15));
        assert!(close(gamma_threshold_a1(1.0, 2.0, 2), 8.0 / 3.0, 1e-15));
        assert!(close(gamma_threshold_a1(3.0, 1.0, 3), 1.5, 1e-15));
    }

    #[test]
    fn exponent_examples() {
        let es = exponent_set(3.0, 2.0, 1.0, 1.0, 2).unwrap();
        assert!(close(es.theta_bar, 0.75, 1e-14));
        assert!(close(es.sigma_bar, 2.0, 1e-14));
        assert!(close(es.theta_hat, 0.75, 1e-14));
        assert!(close(es.sigma_hat, 2.0, 1e-14));
        assert!(close(es.theta_tilde, 2.0 / 3.0, 1e-14));

        let es = exponent_set(2.0, 2.0, 1.0, 1.0, 2).unwrap();
        assert!(close(es.theta_bar, 2.0 / 3.0, 1e-14));
        assert!(close(es.sigma_bar, 2.0, 1e-14));
        assert!(close(es.theta_hat, 2.0 / 3.0, 1e-14));
        assert!(close(es.sigma_hat, 2.0, 1e-14));
        assert!(close(es.theta_tilde, 0.5, 1e-14));
        assert!(exponent_verdict(&es, 2.0).theta_tilde_in_unit);

        let es = exponent_set(1.0 + 1e-12, 2.0, 1.0, 1.0, 2).unwrap();
        assert!(es.theta_tilde > 0.0 && es.theta_tilde < 1e-11);

        assert!(exponent_set(1.0, 2.0, 1.0, 1.0, 2).is_err());
        // p + 2 m2 - m1 - 1 = 1.5 + 0 - 2 - 1 < 0
        assert!(exponent_set(1.5, 2.0, 2.0, 0.0, 2).is_err());
    }

    #[test]
    fn verdict_examples() {
        let es = exponent_set(3.0, 2.0, 1.0, 1.0, 2).unwrap();
        let v = exponent_verdict(&es, 2.0);
        assert!(v.all_hold);
        assert!(close(es.sigma_bar * es.theta_bar / 2.0, 0.75, 1e-14));
        assert!(close(es.sigma_hat * es.theta_hat / 2.0, 0.75, 1e-14));

        // at gamma = 2n/(n+1) the barred product is exactly p/p = 1
        let g = 4.0 / 3.0;
        for p in [1.5, 2.0, 10.0, 500.0] {
            let es = exponent_set(p, g, 1.0, 1.0, 2).unwrap();
            assert!(!exponent_verdict(&es, g).sigma_theta_bar_below_one);
        }
    }

    #[test]
    fn find_p1_examples() {
        let p = find_p1(2.0, 1.0, 1.0, 2, 1e3, 512).unwrap();
        assert!(p < 1.01, "{p}");
        assert_eq!(find_p1(1.3, 1.0, 1.0, 2, 1e3, 512), None);
        let p = find_p1(1.8, 1.0, 1.2, 2, 1e3, 512).unwrap();
        assert!(p > 1.0 && p < 1e3);
        // brute-force confirmation on a fine grid above the candidate
        for k in 0..2000 {
            let q = p + (1e3 - p) * k as f64 / 1999.0;
            let es = exponent_set(q, 1.8, 1.0, 1.2, 2).unwrap();
            assert!(exponent_verdict(&es, 1.8).all_hold, "fails at {q}");
        }
    }

    #[test]
    fn scan_grid_shape() {
        let g = scan_grid(1e3, 512);
        assert_eq!(g.len(), 512);
        assert!((g[0] - 1.001).abs() < 1e-12);
        assert_eq!(*g.last().unwrap(), 1e3);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn kappa_examples() {
        assert!(close(kappa(2.0, 2, 0.0).unwrap(), 48.0, 1e-12));
        for n in 1..=3 {
            for eta in [0.0, 1.0] {
                let k = kappa(1.0 + 1e-8, n, eta).unwrap();
                assert!(close(k, n as f64 + eta, 1e-6));
            }
        }
        // 2 * 2^(3/2) * 4^(3/2) / 3 * sqrt(24) = (128/3) sqrt(3)
        let expected = 128.0 / 3.0 * 3f64.sqrt();
        assert!(close(kappa(2.0, 2, 1.0).unwrap(), expected, 1e-12));
        assert!(kappa(1.0, 2, 0.0).is_err());
        assert!(kappa(60.0, 3, 0.0).unwrap().is_finite());
        assert!(ln_kappa(800.0, 3, 0.0).unwrap().is_finite());
    }

    #[test]
    fn k_constant_examples() {
        let (k1, k2) = k_constants(2.0, 2, 0.0, 1.0).unwrap();
        assert!(close(k1, 6.0, 1e-15));
        assert!(close(k2, 48.0, 1e-12));
        assert_eq!(k_constants(2.0, 2, 0.0, 0.0).unwrap(), (0.0, 0.0));
        let (k1, k2) = k_constants(2.0, 2, 1.0, 2.0).unwrap();
        assert!(close(k1, 32.0, 1e-15));
        assert!(close(k2, 128.0 / 3.0 * 3f64.sqrt() * 16.0, 1e-12));
    }

    #[test]
    fn mu_threshold_examples() {
        assert!(close(mu_threshold(2.0, 2, 1.0, 1.0).unwrap(), 96.0, 1e-12));
        assert_eq!(mu_threshold(2.0, 2, 0.0, 1.0).unwrap(), 0.0);
        assert!(close(mu_threshold(2.0, 2, 0.5, 1.0).unwrap(), 6.0, 1e-12));
        assert!(mu_threshold(1.0, 2, 0.5, 1.0).is_err());
    }

    #[test]
    fn tao_examples() {
        assert_eq!(
            tao_condition(0.05, 1.0, 2),
            TaoVerdict {
                holds: true,
                vacuous: false
            }
        );
        assert!(!tao_condition(1.0, 1.0, 2).holds);
        assert_eq!(
            tao_condition(0.0, 1.0, 2),
            TaoVerdict {
                holds: true,
                vacuous: true
            }
        );
    }

    fn params(m1: f64, m2: f64, gamma: f64, mu: f64, chi: f64) -> ModelParams {
        ModelParams {
            m1,
            m2,
            chi,
            lambda: 1.0,
            mu,
            c: 1.0,
            gamma,
            dim: 2,
        }
    }

    #[test]
    fn classify_examples() {
        let r = classify(
            &params(1.0, 1.0, 2.0, 1.0, 1.0),
            1.0,
            ScanSettings::default(),
        );
        assert_eq!(r.case, RegimeCase::A1);
        assert!(r.p1_candidate.is_some());
        assert!(r.c0_criterion_holds == (1.0 < 1.0));

        let r = classify(
            &params(1.0, 1.0, 1.3, 1.0, 1.0),
            1.0,
            ScanSettings::default(),
        );
        assert_eq!(r.case, RegimeCase::None);
        assert_eq!(r.p1_candidate, None);

        let huge = classify(
            &params(1.0, 0.0, 1.2, 1e12, 0.1),
            1.0,
            ScanSettings::default(),
        );
        assert_eq!(huge.case, RegimeCase::A2WithMu);
        let p0 = huge.p0_used.unwrap();
        assert!(close(
            huge.mu_threshold.unwrap(),
            mu_threshold(p0, 2, 0.1, 1.0).unwrap(),
            1e-15
        ));
        let tiny = classify(
            &params(1.0, 0.0, 1.2, 1e-12, 0.1),
            1.0,
            ScanSettings::default(),
        );
        assert_eq!(tiny.case, RegimeCase::A2MuTooSmall);
        assert!(huge.c0_criterion_holds);
    }

    #[test]
    fn boundary_gamma_is_not_strict() {
        // gamma exactly 2n/(n+1) falls in the A2 window, never in A1
        let r = classify(
            &params(1.0, 0.0, 4.0 / 3.0, 1e12, 0.1),
            1.0,
            ScanSettings::default(),
        );
        assert_ne!(r.case, RegimeCase::A1);
    }

    #[test]
    fn report_lines() {
        let r = classify(
            &params(1.0, 1.0, 2.0, 1.0, 1.0),
            1.0,
            ScanSettings::default(),
        );
        let text = r.to_key_values();
        assert!(text.starts_with("case=A1\n"));
        assert!(text.contains("gamma_lower_a1=1.3333333333333333\n"));
        for line in text.lines() {
            assert_eq!(line.matches('=').count(), 1, "{line}");
        }
    }

    proptest! {
        #[test]
        fn barred_product_matches_gamma_threshold(
            p in 1.0f64..1e3, gamma in 1e-6f64..=2.0, n in 1usize..=5,
        ) {
            prop_assume!(p > 1.0);
            let thr = gamma_threshold_gradient(n);
            prop_assume!((gamma - thr).abs() > 1e-10);
            let es = exponent_set(p, gamma, 1.0, 1.0, n).unwrap();
            let flag = exponent_verdict(&es, gamma).sigma_theta_bar_below_one;
            prop_assert_eq!(flag, gamma > thr);
        }

        #[test]
        fn kappa_increases_with_eta(p in 1.0001f64..200.0, n in 1usize..6, eta in 0.0f64..10.0, d in 0.01f64..5.0) {
            prop_assert!(ln_kappa(p, n, eta + d).unwrap() > ln_kappa(p, n, eta).unwrap());
        }

        #[test]
        fn log_form_matches_direct(p in 1.0001f64..50.0, n in 1usize..6, eta in 0.0f64..3.0) {
            let a = kappa(p, n, eta).unwrap();
            let b = kappa_direct(p, n, eta);
            prop_assert!(close(a, b, 1e-10), "{} vs {}", a, b);
        }

        #[test]
        fn mu_threshold_scales_with_chi(p0 in 1.01f64..20.0, n in 1usize..5, chi in 0.01f64..2.0, v0 in 0.01f64..2.0) {
            let a = mu_threshold(p0, n, chi, v0).unwrap();
            let b = mu_threshold(p0, n, 2.0 * chi, v0).unwrap();
            prop_assume!(a > 0.0 && a.is_finite() && b.is_finite());
            prop_assert!(close(b / a, 2f64.powf(2.0 * p0), 1e-12));
        }

        #[test]
        fn classify_is_pure(m1 in 0.0f64..3.0, m2 in -0.5f64..2.0, gamma in 1.0f64..=2.0, mu in 0.0f64..100.0) {
            let p = params(m1, m2, gamma, mu, 0.3);
            prop_assert_eq!(classify(&p, 1.0, ScanSettings::default()), classify(&p, 1.0, ScanSettings::default()));
        }

        #[test]
        fn stabilization_above_both_thresholds(
            m1 in 0.0f64..3.0, m2 in -0.5f64..1.5, n in 1usize..5, frac in 0.05f64..1.0,
        ) {
            let lo = gamma_threshold_a1(m1, m2, n);
            prop_assume!(lo < 1.95);
            let gamma = lo + frac * (2.0 - lo);
            let p = find_p1(gamma, m1, m2, n, 1e3, 512);
            prop_assert!(p.is_some());
            let p = p.unwrap();
            for q in scan_grid(1e3, 512).into_iter().filter(|&q| q >= p) {
                let es = exponent_set(q, gamma, m1, m2, n).unwrap();
                prop_assert!(exponent_verdict(&es, gamma).all_hold);
            }
        }
    }
}
