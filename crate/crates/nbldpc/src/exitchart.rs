//! Transfer-function analysis of hard-decision message-passing over GF(q):
//! the check-node correctness probability, per-degree element charts, the
//! composite chart of an irregular ensemble, iteration-count estimates, the
//! decoding-complexity functional and the convergence threshold.
//!
//! Probabilities here are message *symbol* error probabilities. The composite
//! chart maps the error probability entering an iteration to the one leaving
//! it; decoding converges when the chart stays below the diagonal all the way
//! down to the target.

use crate::ensemble::DegreeDistribution;
use std::collections::BTreeMap;
use std::fmt;

/// Number of midpoint cells used on the log-spaced integration grid.
pub const DEFAULT_GRID: usize = 4096;

/// Iteration cap for the discrete chart recursion.
pub const DISCRETE_ITERATION_CAP: usize = 10_000;

/// Relative margin below which the chart is treated as touching the diagonal.
pub const CONTRACTION_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum ChartError {
    /// Input probability outside `[0, (q-1)/q]`.
    Domain { p: f64, q: usize },
    /// The chart meets the diagonal inside the requested interval.
    NonConvergent { fixed_point: f64 },
    /// The discrete recursion exceeded its iteration cap.
    IterationCap { cap: usize, reached: f64 },
    /// No convergent starting point exists above the target.
    DegenerateEnsemble,
    /// Parameters out of range (e.g. `pt >= p0`).
    BadParameters(String),
}

impl fmt::Display for ChartError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChartError::Domain { p, q } => {
                write!(f, "probability {p} outside [0, {}/{q}]", q - 1)
            }
            ChartError::NonConvergent { fixed_point } => {
                write!(f, "chart has a fixed point near p = {fixed_point:.6e}")
            }
            ChartError::IterationCap { cap, reached } => {
                write!(f, "no convergence within {cap} iterations (stalled at {reached:.3e})")
            }
            ChartError::DegenerateEnsemble => {
                write!(f, "no convergent initial error probability above the target")
            }
            ChartError::BadParameters(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for ChartError {}

/// Probability that a degree-k check node hands a variable node the correct
/// symbol, given i.i.d. incoming symbol error probability `p_in`: the sum of
/// the k-1 incoming errors is zero exactly when no error remains visible.
pub fn check_correct_prob(p_in: f64, k: usize, q: usize) -> Result<f64, ChartError> {
    let qf = q as f64;
    let limit = (qf - 1.0) / qf;
    if !(0.0..=limit + 1e-15).contains(&p_in) {
        return Err(ChartError::Domain { p: p_in, q });
    }
    Ok((1.0 + (qf - 1.0) * (1.0 - qf * p_in / (qf - 1.0)).powi(k as i32 - 1)) / qf)
}

/// Check correctness probability for a mixture of check degrees.
pub fn check_correct_prob_mixture(
    p_in: f64,
    rho: &BTreeMap<usize, f64>,
    q: usize,
) -> Result<f64, ChartError> {
    let mut acc = 0.0;
    for (&k, &c) in rho {
        acc += c * check_correct_prob(p_in, k, q)?;
    }
    Ok(acc)
}

/// Smallest agreement threshold for a degree-i variable node.
///
/// Candidates are the integers strictly above `(i-1)/2` and at most `i-1`;
/// the first one for which flipping is posterior-favorable is returned, and
/// when none qualifies the most conservative rule `i-1` is used. Keeping the
/// threshold above `(i-1)/2` guarantees at most one alternative symbol can
/// reach it, which the element chart relies on.
///
/// At q = 2 the factor `q - 2 - Q` is negative; it only matters when raised
/// to a positive power, in which case the comparison falls back to absolute
/// values.
pub fn flip_threshold(i: usize, p0: f64, q_out: f64, q: usize) -> usize {
    debug_assert!(i >= 2);
    let qf = q as f64;
    let lhs = (1.0 - p0) / p0;
    let first = (i - 1) / 2 + 1;
    for l0 in first..i {
        let exp_mid = (2 * l0 + 1) as i32 - i as i32;
        let exp_last = (i - 1 - l0) as i32;
        let base_last = qf - 2.0 - q_out;
        let rhs = q_out.powi(l0 as i32) * (qf - 1.0).powi(i as i32 - 2)
            / ((1.0 - q_out).powi(exp_mid) * base_last.abs().powi(exp_last));
        if lhs <= rhs {
            return l0;
        }
    }
    i - 1
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut acc = 1.0;
    for j in 0..k.min(n - k) {
        acc = acc * (n - j) as f64 / (j + 1) as f64;
    }
    acc
}

/// Upper tail of a binomial: P(Bin(n, p) >= lo).
fn binomial_tail(n: usize, p: f64, lo: usize) -> f64 {
    let mut acc = 0.0;
    for l in lo..=n {
        acc += binomial(n, l) * p.powi(l as i32) * (1.0 - p).powi((n - l) as i32);
    }
    acc
}

/// Element chart of a degree-i variable node fed by checks with correctness
/// probability derived from `rho`.
///
/// Three contributions: the channel error `p0`, minus errors corrected when
/// at least `l0` of the other `i-1` checks agree on the true symbol, plus
/// correct channel values overturned when `l0` checks agree on one particular
/// wrong symbol. Because `l0 > (i-1)/2`, at most one symbol can gather `l0`
/// agreements, so the three terms are an exact error probability for the
/// flip rule, not just a bound.
pub fn element_chart(
    p_in: f64,
    i: usize,
    p0: f64,
    rho: &BTreeMap<usize, f64>,
    q: usize,
) -> Result<f64, ChartError> {
    let q_out = check_correct_prob_mixture(p_in, rho, q)?;
    Ok(element_chart_given_q_out(i, p0, q_out, q))
}

/// Element chart with the check-correctness probability already computed.
/// All element charts of a composite evaluation share one `q_out`, so the
/// caller computes it once per `p_in`.
pub fn element_chart_given_q_out(i: usize, p0: f64, q_out: f64, q: usize) -> f64 {
    let l0 = flip_threshold(i, p0, q_out, q);
    let corrected = binomial_tail(i - 1, q_out, l0);
    let false_agree = binomial_tail(i - 1, (1.0 - q_out) / (q as f64 - 1.0), l0);
    p0 - p0 * corrected + (1.0 - p0) * (q as f64 - 1.0) * false_agree
}

/// Composite chart `f(p_in) = Σ λ_i f_i(p_in)` of an irregular ensemble.
pub fn composite_chart(
    p_in: f64,
    dd: &DegreeDistribution,
    p0: f64,
    q: usize,
) -> Result<f64, ChartError> {
    let q_out = check_correct_prob_mixture(p_in, dd.rho(), q)?;
    let mut acc = 0.0;
    for (&i, &c) in dd.lambda() {
        acc += c * element_chart_given_q_out(i, p0, q_out, q);
    }
    Ok(acc)
}

/// An evaluable iteration chart: either an ensemble's analytical chart or a
/// directly supplied polynomial `c1 p + c2 p^2 + ...` (used to replay
/// published charts whose underlying ensembles are unknown).
#[derive(Debug, Clone)]
pub enum Chart {
    Ensemble { dd: DegreeDistribution, p0: f64, q: usize },
    Polynomial(Vec<f64>),
}

impl Chart {
    pub fn eval(&self, p: f64) -> Result<f64, ChartError> {
        match self {
            Chart::Ensemble { dd, p0, q } => composite_chart(p, dd, *p0, *q),
            Chart::Polynomial(coeffs) => {
                let mut acc = 0.0;
                let mut x = p;
                for &c in coeffs {
                    acc += c * x;
                    x *= p;
                }
                Ok(acc)
            }
        }
    }

    /// Upper end of the chart's input domain.
    pub fn domain_max(&self) -> f64 {
        match self {
            Chart::Ensemble { q, .. } => (*q as f64 - 1.0) / *q as f64,
            Chart::Polynomial(_) => 1.0,
        }
    }
}

/// Iteration-count estimate: the continuum limit of the chart recursion,
/// `N = ∫_{pt}^{p0} dp / (p ln(p / f(p)))`, integrated by the midpoint rule
/// on a log-spaced grid.
///
/// The integrand blows up where the chart touches the diagonal, so the
/// evaluation refuses (with the touch point) whenever the relative gap
/// `(p - f(p))/p` falls below [`CONTRACTION_MARGIN`] anywhere on the grid.
pub fn estimate_iterations(chart: &Chart, p0: f64, pt: f64) -> Result<f64, ChartError> {
    estimate_iterations_on_grid(chart, p0, pt, DEFAULT_GRID)
}

pub fn estimate_iterations_on_grid(
    chart: &Chart,
    p0: f64,
    pt: f64,
    cells: usize,
) -> Result<f64, ChartError> {
    if !(pt > 0.0 && pt < p0) {
        return Err(ChartError::BadParameters(format!(
            "need 0 < pt < p0, got pt = {pt}, p0 = {p0}"
        )));
    }
    // The midpoint grid never lands on the right endpoint, which the open
    // interval (pt, p0] includes; probe it explicitly.
    let f_end = chart.eval(p0)?;
    if (p0 - f_end) / p0 < CONTRACTION_MARGIN {
        return Err(ChartError::NonConvergent { fixed_point: p0 });
    }
    let (lo, hi) = (pt.ln(), p0.ln());
    let h = (hi - lo) / cells as f64;
    let mut total = 0.0;
    for j in 0..cells {
        let p = (lo + (j as f64 + 0.5) * h).exp();
        let fp = chart.eval(p)?;
        if (p - fp) / p < CONTRACTION_MARGIN {
            return Err(ChartError::NonConvergent { fixed_point: p });
        }
        // dp = p du on the log grid, so each cell contributes du / ln(p/f).
        total += h / (p / fp).ln();
    }
    Ok(total)
}

/// Discrete iteration count: applications of `p <- f(p)` from `p0` until the
/// error probability is at or below `pt`. Returns 0 when `pt >= p0`.
pub fn count_iterations_discrete(chart: &Chart, p0: f64, pt: f64) -> Result<usize, ChartError> {
    let mut p = p0;
    let mut n = 0usize;
    while p > pt {
        let next = chart.eval(p)?;
        if next >= p {
            return Err(ChartError::NonConvergent { fixed_point: p });
        }
        p = next;
        n += 1;
        if n > DISCRETE_ITERATION_CAP {
            return Err(ChartError::IterationCap { cap: DISCRETE_ITERATION_CAP, reached: p });
        }
    }
    Ok(n)
}

/// Decoding complexity per information bit,
/// `K = N (1 - R0) / (R0 log2(q) Σ ρ_k/k)`.
///
/// `log2` because a codeword of n symbols carries `R n log2 q` information
/// bits.
pub fn complexity(
    dd: &DegreeDistribution,
    r0: f64,
    q: usize,
    p0: f64,
    pt: f64,
) -> Result<f64, ChartError> {
    let n = estimate_iterations(&Chart::Ensemble { dd: dd.clone(), p0, q }, p0, pt)?;
    Ok(complexity_from_iterations(n, dd, r0, q))
}

/// Complexity functional with the iteration count already known.
pub fn complexity_from_iterations(n: f64, dd: &DegreeDistribution, r0: f64, q: usize) -> f64 {
    n * (1.0 - r0) / (r0 * (q as f64).log2() * dd.rho_integral())
}

/// Largest initial error probability from which the chart still reaches `pt`,
/// found by bisection to 1e-6 absolute.
///
/// Fails with [`ChartError::DegenerateEnsemble`] when no starting point right
/// above `pt` converges (the chart sits on or above the diagonal there).
pub fn threshold(dd: &DegreeDistribution, q: usize, pt: f64) -> Result<f64, ChartError> {
    let chart = Chart::Ensemble { dd: dd.clone(), p0: pt_anchor(pt), q };
    threshold_of_chart(&chart, pt)
}

/// The channel error probability used while scanning for a threshold: the
/// chart is evaluated with `p0` equal to each candidate start, so the anchor
/// only seeds the scan.
fn pt_anchor(pt: f64) -> f64 {
    (pt * 10.0).min(0.5)
}

pub fn threshold_of_chart(base: &Chart, pt: f64) -> Result<f64, ChartError> {
    let domain = base.domain_max() * (1.0 - 1e-9);
    // Rebuild ensemble charts so the channel term tracks the candidate start.
    let with_start = |p0: f64| -> Chart {
        match base {
            Chart::Ensemble { dd, q, .. } => Chart::Ensemble { dd: dd.clone(), p0, q: *q },
            Chart::Polynomial(c) => Chart::Polynomial(c.clone()),
        }
    };
    let converges = |p0: f64| -> bool {
        estimate_iterations_on_grid(&with_start(p0), p0, pt, 1024).is_ok()
    };

    let lo_probe = (pt * 1.0001).min(domain);
    if !converges(lo_probe) {
        return Err(ChartError::DegenerateEnsemble);
    }
    if converges(domain) {
        return Ok(domain);
    }
    let (mut lo, mut hi) = (lo_probe, domain);
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if converges(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Bundle of analysis results for one ensemble at one operating point.
#[derive(Debug, Clone)]
pub struct ExitEvaluation {
    pub p0: f64,
    pub pt: f64,
    pub q: usize,
    pub iterations_estimate: f64,
    pub iterations_discrete: usize,
    pub complexity: f64,
    pub threshold: f64,
}

/// Full analysis of an ensemble: iteration estimate, discrete count,
/// complexity against the target rate, and the convergence threshold.
pub fn evaluate_ensemble(
    dd: &DegreeDistribution,
    q: usize,
    p0: f64,
    pt: f64,
    r0: f64,
) -> Result<ExitEvaluation, ChartError> {
    let chart = Chart::Ensemble { dd: dd.clone(), p0, q };
    let n = estimate_iterations(&chart, p0, pt)?;
    let discrete = count_iterations_discrete(&chart, p0, pt)?;
    let k = complexity_from_iterations(n, dd, r0, q);
    let thr = threshold(dd, q, pt)?;
    Ok(ExitEvaluation {
        p0,
        pt,
        q,
        iterations_estimate: n,
        iterations_discrete: discrete,
        complexity: k,
        threshold: thr,
    })
}

/// Small-error linearization of the composite chart for ensembles with
/// variable degrees restricted to {2, 3}:
/// `f(p) ≈ (p0 - 1) + (2 - λ2 p0)(τ1 + ρ_τ2 - 1) p`.
///
/// Shipped as a diagnostic only: the affine offset `p0 - 1` is negative, so
/// the expression cannot be a probability near zero, and its slope does not
/// match the numerical derivative of the exact chart. See also
/// [`element_chart_closed_f2`].
pub fn approx_chart_small_p(p_in: f64, p0: f64, lambda2: f64, tau1: f64, rho_tau2: f64) -> f64 {
    (p0 - 1.0) + (2.0 - lambda2 * p0) * (tau1 + rho_tau2 - 1.0) * p_in
}

/// Published closed form for the degree-2 element chart,
/// `f2 = 1 - (2 - p0) Q_out`. Direct expansion of the element chart gives
/// `1 - Q_out` instead; both are provided so the discrepancy stays visible.
pub fn element_chart_closed_f2(q_out: f64, p0: f64) -> f64 {
    1.0 - (2.0 - p0) * q_out
}

/// Published closed form for the degree-3 element chart.
pub fn element_chart_closed_f3(q_out: f64, p0: f64, q: usize) -> f64 {
    p0 + (1.0 + p0) / (q as f64 - 1.0) * (1.0 - 2.0 * q_out + q_out * q_out)
        - q_out * q_out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::DegreeDistribution;

    fn rho_single(k: usize) -> BTreeMap<usize, f64> {
        [(k, 1.0)].into_iter().collect()
    }

    #[test]
    fn check_correct_prob_endpoints() {
        assert!((check_correct_prob(0.0, 4, 4).unwrap() - 1.0).abs() < 1e-15);
        assert!((check_correct_prob(0.75, 3, 4).unwrap() - 0.25).abs() < 1e-15);
        assert!((check_correct_prob(0.1, 3, 2).unwrap() - 0.82).abs() < 1e-15);
        assert!(check_correct_prob(0.8, 3, 4).is_err());
        assert!(check_correct_prob(-0.01, 3, 4).is_err());
    }

    #[test]
    fn check_correct_prob_binary_reduction() {
        // (1 + (1-2p)^(k-1)) / 2 for q = 2.
        for k in 2..=6 {
            for j in 0..=10 {
                let p = j as f64 * 0.05;
                let want = (1.0 + (1.0 - 2.0 * p).powi(k as i32 - 1)) / 2.0;
                assert!((check_correct_prob(p, k, 2).unwrap() - want).abs() < 1e-15);
            }
        }
    }

    /// Exhaustive enumeration over all q^(k-1) error patterns of the check
    /// inputs; each input is wrong with probability p, uniformly over the
    /// q-1 wrong offsets, and the output is correct when the offsets cancel.
    fn check_correct_prob_bruteforce(p: f64, k: usize, q: usize) -> f64 {
        let inputs = k - 1;
        let mut total = 0.0;
        let mut pattern = vec![0usize; inputs];
        loop {
            let mut prob = 1.0;
            let mut sum = 0usize;
            for &e in &pattern {
                if e == 0 {
                    prob *= 1.0 - p;
                } else {
                    prob *= p / (q as f64 - 1.0);
                }
                sum ^= e;
            }
            if sum == 0 {
                total += prob;
            }
            // Odometer increment.
            let mut idx = 0;
            loop {
                if idx == inputs {
                    return total;
                }
                pattern[idx] += 1;
                if pattern[idx] < q {
                    break;
                }
                pattern[idx] = 0;
                idx += 1;
            }
        }
    }

    #[test]
    fn check_correct_prob_matches_enumeration() {
        for q in [2usize, 4, 8] {
            for k in 2..=5 {
                for j in 0..20 {
                    let p = (q as f64 - 1.0) / q as f64 * (j as f64 + 0.5) / 20.0;
                    let exact = check_correct_prob_bruteforce(p, k, q);
                    let closed = check_correct_prob(p, k, q).unwrap();
                    assert!(
                        (exact - closed).abs() < 1e-12,
                        "q={q} k={k} p={p}: {exact} vs {closed}"
                    );
                }
            }
        }
    }

    #[test]
    fn mixture_is_convex_combination() {
        let rho: BTreeMap<usize, f64> = [(3, 0.5), (4, 0.5)].into_iter().collect();
        let got = check_correct_prob_mixture(0.1, &rho, 2).unwrap();
        let want = 0.5 * 0.82 + 0.5 * (1.0 + 0.8f64.powi(3)) / 2.0;
        assert!((got - want).abs() < 1e-12);
        assert!((want - 0.788).abs() < 1e-12);

        let single = check_correct_prob_mixture(0.07, &rho_single(5), 4).unwrap();
        assert!((single - check_correct_prob(0.07, 5, 4).unwrap()).abs() < 1e-15);
        assert!((check_correct_prob_mixture(0.0, &rho, 2).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn check_correct_monotone_in_p() {
        for q in [2usize, 4, 8] {
            for k in [2usize, 3, 5] {
                let mut last = f64::INFINITY;
                for j in 0..=100 {
                    let p = (q as f64 - 1.0) / q as f64 * j as f64 / 100.0;
                    let v = check_correct_prob(p, k, q).unwrap();
                    assert!(v <= last + 1e-15);
                    assert!((1.0 / q as f64 - 1e-12..=1.0 + 1e-12).contains(&v));
                    last = v;
                }
            }
        }
    }

    #[test]
    fn flip_threshold_examples() {
        // RHS = 0.81 * 3 / 0.01 = 243 >= 99.
        assert_eq!(flip_threshold(3, 0.01, 0.9, 4), 2);
        // Degree 2 has a single candidate.
        assert_eq!(flip_threshold(2, 0.3, 0.5, 4), 1);
        assert_eq!(flip_threshold(2, 0.001, 0.999, 8), 1);
        // p0 = 0.5 makes the posterior condition loosest.
        for i in 2..=8 {
            assert_eq!(flip_threshold(i, 0.5, 0.9, 4), (i - 1) / 2 + 1);
        }
    }

    #[test]
    fn flip_threshold_falls_back_to_most_conservative() {
        // Very reliable channel, unreliable checks: no candidate qualifies.
        assert_eq!(flip_threshold(4, 1e-6, 0.4, 4), 3);
    }

    #[test]
    fn element_chart_zero_input_is_zero() {
        for (i, q) in [(2usize, 2usize), (3, 4), (5, 4), (7, 8)] {
            let f = element_chart(0.0, i, 0.05, &rho_single(4), q).unwrap();
            assert!(f.abs() < 1e-12, "i={i} q={q}: {f}");
        }
    }

    #[test]
    fn element_chart_degree2_equals_one_minus_q_out() {
        let rho = rho_single(4);
        let q_out = check_correct_prob_mixture(0.05, &rho, 4).unwrap();
        let f2 = element_chart(0.05, 2, 0.1, &rho, 4).unwrap();
        assert!((f2 - (1.0 - q_out)).abs() < 1e-12);
        // The published closed form disagrees with the direct expansion; both
        // values are kept visible.
        let published = element_chart_closed_f2(q_out, 0.1);
        assert!((f2 - published).abs() > 0.5);
    }

    #[test]
    fn composite_single_degree_equals_element() {
        let dd = DegreeDistribution::regular(3, 5).unwrap();
        let f = composite_chart(0.03, &dd, 0.05, 4).unwrap();
        let fi = element_chart(0.03, 3, 0.05, dd.rho(), 4).unwrap();
        assert!((f - fi).abs() < 1e-15);
        assert!(composite_chart(0.0, &dd, 0.05, 4).unwrap().abs() < 1e-12);
    }

    #[test]
    fn composite_chart_nondecreasing_on_grid() {
        let dd = DegreeDistribution::from_pairs(&[(2, 0.3), (3, 0.7)], &[(4, 0.6), (5, 0.4)])
            .unwrap();
        let mut last = -1.0;
        for j in 0..1000 {
            let p = 0.74 * (j as f64 + 1.0) / 1000.0;
            let f = composite_chart(p, &dd, 0.01, 4).unwrap();
            assert!(f >= last - 1e-12, "dip at p={p}");
            last = f;
        }
    }

    #[test]
    fn element_chart_matches_depth_one_monte_carlo() {
        // Degree-3 variable over degree-4 checks at q = 4, channel error
        // 0.05, input error 0.02; a million sampled depth-one trees.
        use rand::Rng;
        let (q, i, p0, p_in) = (4usize, 3usize, 0.05, 0.02);
        let rho = rho_single(4);
        let want = element_chart(p_in, i, p0, &rho, q).unwrap();
        let q_out = check_correct_prob_mixture(p_in, &rho, q).unwrap();
        let b = flip_threshold(i, p0, q_out, q);

        let trials = 1_000_000u32;
        let mut rng = crate::channel::trial_rng(35, 0);
        let mut errors = 0u32;
        for _ in 0..trials {
            let channel: u8 =
                if rng.random::<f64>() < p0 { rng.random_range(1..q) as u8 } else { 0 };
            let mut counts = [0u32; 4];
            for _ in 0..i - 1 {
                let mut sum = 0u8;
                for _ in 0..3 {
                    if rng.random::<f64>() < p_in {
                        sum ^= rng.random_range(1..q) as u8;
                    }
                }
                counts[sum as usize] += 1;
            }
            let mut out = channel;
            for a in 0..q as u8 {
                if a != channel && counts[a as usize] as usize >= b {
                    out = a;
                    break;
                }
            }
            errors += (out != 0) as u32;
        }
        let got = errors as f64 / trials as f64;
        let sigma = (want * (1.0 - want) / trials as f64).sqrt();
        assert!((got - want).abs() <= 3.0 * sigma, "mc {got:.6} vs chart {want:.6}");
    }

    #[test]
    fn table_row_polynomial_anchor() {
        // First published iteration-table row; plain polynomial arithmetic.
        let chart = Chart::Polynomial(vec![0.62, 4.97, -18.24, 27.53, -23.28, 10.75, -2.09]);
        let f = chart.eval(0.01).unwrap();
        assert!((f - 0.00667904).abs() < 5e-8, "{f}");
    }

    #[test]
    fn estimate_matches_closed_form_for_linear_chart() {
        // f(p) = p/2 contracts by ln 2 per iteration.
        let chart = Chart::Polynomial(vec![0.5]);
        let n = estimate_iterations(&chart, 1e-2, 1e-6).unwrap();
        let want = (1e-2f64 / 1e-6).ln() / 2f64.ln();
        assert!((n - want).abs() < 1e-6, "{n} vs {want}");
        let d = count_iterations_discrete(&chart, 1e-2, 1e-6).unwrap();
        assert_eq!(d, 14);
    }

    #[test]
    fn estimate_consistent_with_discrete_for_published_polynomials() {
        for coeffs in [
            vec![0.62, 4.97, -18.24, 27.53, -23.28, 10.75, -2.09],
            vec![0.59, 5.3, -16.25, 23.20, -18.20, 8.01, -1.45],
            vec![0.69, 4.71, -14.46, 20.11, -15.53, 6.48, -1.13],
            vec![0.70, 5.79, -20.19, 32.23, -28.81, 14.11, -2.93],
            vec![0.72, 5.00, -16.32, 24.15, -19.92, 8.95, -1.69],
        ] {
            let chart = Chart::Polynomial(coeffs);
            let n = estimate_iterations(&chart, 1e-2, 1e-6).unwrap();
            let d = count_iterations_discrete(&chart, 1e-2, 1e-6).unwrap() as f64;
            assert!((n - d).abs() <= 2.0, "estimate {n} vs discrete {d}");
        }
    }

    #[test]
    fn discrete_zero_when_already_at_target() {
        let chart = Chart::Polynomial(vec![0.5]);
        assert_eq!(count_iterations_discrete(&chart, 1e-3, 1e-2).unwrap(), 0);
    }

    #[test]
    fn non_convergent_chart_reports_fixed_point() {
        // f(p) = 2p is above the diagonal everywhere.
        let chart = Chart::Polynomial(vec![2.0]);
        match estimate_iterations(&chart, 1e-2, 1e-6) {
            Err(ChartError::NonConvergent { .. }) => {}
            other => panic!("expected NonConvergent, got {other:?}"),
        }
    }

    #[test]
    fn complexity_examples() {
        let dd = DegreeDistribution::from_pairs(&[(2, 1.0)], &[(4, 0.2998), (5, 0.7002)]).unwrap();
        assert!((dd.rho_integral() - 0.21499).abs() < 1e-6);
        let k1 = complexity_from_iterations(1.0, &dd, 0.5, 4);
        assert!((k1 - 1.0 / (2.0 * 0.21499)).abs() < 1e-6);
        // Linearity in N.
        assert!((complexity_from_iterations(2.0, &dd, 0.5, 4) - 2.0 * k1).abs() < 1e-12);
        // Binary reduction: log2(2) = 1.
        let k2 = complexity_from_iterations(10.0, &dd, 0.5, 2);
        assert!((k2 - 10.0 * 0.5 / (0.5 * dd.rho_integral())).abs() < 1e-9);
    }

    #[test]
    fn threshold_of_contraction_is_domain_limit() {
        let chart = Chart::Polynomial(vec![0.5]);
        let t = threshold_of_chart(&chart, 1e-6).unwrap();
        assert!((t - 1.0).abs() < 1e-6, "{t}");
    }

    #[test]
    fn threshold_of_quadratic_chart_matches_analytic_fixed_point() {
        // f(p) = c p^2 has its fixed point at 1/c; below that it contracts.
        let c = 50.0;
        let chart = Chart::Polynomial(vec![0.0, c]);
        let t = threshold_of_chart(&chart, 1e-6).unwrap();
        assert!((t - 1.0 / c).abs() < 1e-4, "{t} vs {}", 1.0 / c);
    }

    #[test]
    fn threshold_degenerate_for_expanding_chart() {
        let chart = Chart::Polynomial(vec![1.5]);
        assert!(matches!(threshold_of_chart(&chart, 1e-6), Err(ChartError::DegenerateEnsemble)));
    }

    #[test]
    fn approx_chart_slope_readoff() {
        let slope = (approx_chart_small_p(1e-3, 0.01, 1.0, 3.0, 0.8)
            - approx_chart_small_p(0.0, 0.01, 1.0, 3.0, 0.8))
            / 1e-3;
        assert!((slope - (2.0 - 0.01) * (3.0 + 0.8 - 1.0)).abs() < 1e-9);
    }

    #[test]
    fn approx_chart_slope_versus_finite_difference() {
        // For adjacent two-point checks (tau, tau+1), tau1 + rho_tau2 - 1
        // equals the mean check branching, so the published linearization's
        // slope is (2 - lambda2 p0) times the branching while the exact
        // chart's is lambda2 times it: same sign, same decade, not equal.
        let dd = DegreeDistribution::from_pairs(
            &[(2, 0.2222222222222222), (3, 0.7777777777777778)],
            &[(3, 0.2), (4, 0.8)],
        )
        .unwrap();
        let p0 = 0.01;
        let h = 1e-4;
        let exact_slope =
            (composite_chart(2.0 * h, &dd, p0, 4).unwrap() - composite_chart(h, &dd, p0, 4).unwrap()) / h;
        let approx_slope = (approx_chart_small_p(2.0 * h, p0, 0.2222222222222222, 3.0, 0.8)
            - approx_chart_small_p(h, p0, 0.2222222222222222, 3.0, 0.8))
            / h;
        assert!(exact_slope > 0.0 && approx_slope > 0.0);
        let ratio = approx_slope / exact_slope;
        assert!((0.1..=10.0).contains(&ratio), "slope ratio {ratio}");
        // And the offsets genuinely disagree: the linearization starts at
        // p0 - 1 while the chart starts at zero.
        assert!(approx_chart_small_p(0.0, p0, 0.22, 3.0, 0.8) < -0.9);
    }
}
