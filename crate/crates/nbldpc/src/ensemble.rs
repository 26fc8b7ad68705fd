//! Edge-perspective degree distributions and the quantities derived from
//! them: design rate, mean node degrees, and integer degree sequences for
//! concrete graph construction.
//!
//! A distribution pairs `lambda` (fraction of edges on degree-i variable
//! nodes) with `rho` (fraction of edges on degree-k check nodes). Published
//! distributions are often normalized only to three or four decimals, so
//! coefficient sets summing to within `NORMALIZATION_SLACK` of one are
//! accepted and renormalized exactly.

use std::collections::BTreeMap;
use std::fmt;

/// Largest node degree accepted on either side.
pub const MAX_DEGREE: usize = 64;

/// Coefficient sums may deviate from 1 by this much before being rejected.
pub const NORMALIZATION_SLACK: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub enum EnsembleError {
    /// A degree outside `[2, MAX_DEGREE]`.
    BadDegree(usize),
    /// A negative coefficient.
    NegativeCoefficient { degree: usize, value: f64 },
    /// Coefficients too far from summing to one.
    NotNormalized { side: &'static str, sum: f64 },
    /// Empty coefficient map.
    Empty(&'static str),
    /// The design rate is not in (0, 1).
    NonPositiveRate { rate: f64 },
    /// No integer degree sequence realizes the distribution within tolerance.
    Rounding(String),
    /// Malformed text representation.
    Parse { line: usize, message: String },
}

impl fmt::Display for EnsembleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnsembleError::BadDegree(d) => write!(f, "degree {d} outside [2, {MAX_DEGREE}]"),
            EnsembleError::NegativeCoefficient { degree, value } => {
                write!(f, "negative coefficient {value} at degree {degree}")
            }
            EnsembleError::NotNormalized { side, sum } => {
                write!(f, "{side} coefficients sum to {sum}, expected 1")
            }
            EnsembleError::Empty(side) => write!(f, "{side} has no coefficients"),
            EnsembleError::NonPositiveRate { rate } => {
                write!(f, "design rate {rate} is not in (0, 1)")
            }
            EnsembleError::Rounding(m) => write!(f, "degree sequence rounding failed: {m}"),
            EnsembleError::Parse { line, message } => {
                write!(f, "parse error on line {line}: {message}")
            }
        }
    }
}

impl std::error::Error for EnsembleError {}

/// An irregular ensemble's degree distribution pair, edge perspective.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeDistribution {
    lambda: BTreeMap<usize, f64>,
    rho: BTreeMap<usize, f64>,
}

fn validate_side(
    side: &'static str,
    coeffs: &BTreeMap<usize, f64>,
) -> Result<BTreeMap<usize, f64>, EnsembleError> {
    if coeffs.is_empty() {
        return Err(EnsembleError::Empty(side));
    }
    let mut sum = 0.0;
    for (&d, &c) in coeffs {
        if !(2..=MAX_DEGREE).contains(&d) {
            return Err(EnsembleError::BadDegree(d));
        }
        if c < 0.0 || !c.is_finite() {
            return Err(EnsembleError::NegativeCoefficient { degree: d, value: c });
        }
        sum += c;
    }
    if (sum - 1.0).abs() > NORMALIZATION_SLACK {
        return Err(EnsembleError::NotNormalized { side, sum });
    }
    // Renormalize exactly and drop zero entries.
    Ok(coeffs
        .iter()
        .filter(|(_, &c)| c > 0.0)
        .map(|(&d, &c)| (d, c / sum))
        .collect())
}

impl DegreeDistribution {
    pub fn new(
        lambda: BTreeMap<usize, f64>,
        rho: BTreeMap<usize, f64>,
    ) -> Result<Self, EnsembleError> {
        Ok(DegreeDistribution {
            lambda: validate_side("lambda", &lambda)?,
            rho: validate_side("rho", &rho)?,
        })
    }

    /// Convenience constructor from `(degree, coefficient)` slices.
    pub fn from_pairs(lambda: &[(usize, f64)], rho: &[(usize, f64)]) -> Result<Self, EnsembleError> {
        Self::new(lambda.iter().copied().collect(), rho.iter().copied().collect())
    }

    /// A (dv, dc)-regular ensemble.
    pub fn regular(dv: usize, dc: usize) -> Result<Self, EnsembleError> {
        Self::from_pairs(&[(dv, 1.0)], &[(dc, 1.0)])
    }

    pub fn lambda(&self) -> &BTreeMap<usize, f64> {
        &self.lambda
    }

    pub fn rho(&self) -> &BTreeMap<usize, f64> {
        &self.rho
    }

    /// Σ λ_i / i, the per-edge reciprocal mean variable degree.
    pub fn lambda_integral(&self) -> f64 {
        self.lambda.iter().map(|(&d, &c)| c / d as f64).sum()
    }

    /// Σ ρ_k / k.
    pub fn rho_integral(&self) -> f64 {
        self.rho.iter().map(|(&d, &c)| c / d as f64).sum()
    }

    /// Design rate `1 - (Σ ρ_k/k)/(Σ λ_i/i)`.
    ///
    /// The realized rate of a constructed matrix can only be higher (it rises
    /// when the matrix is rank deficient).
    pub fn rate(&self) -> Result<f64, EnsembleError> {
        let r = 1.0 - self.rho_integral() / self.lambda_integral();
        if r <= 0.0 || r >= 1.0 {
            return Err(EnsembleError::NonPositiveRate { rate: r });
        }
        Ok(r)
    }

    /// Node-perspective mean degrees `(d̄_v, d̄_c)`.
    pub fn mean_degrees(&self) -> (f64, f64) {
        (1.0 / self.lambda_integral(), 1.0 / self.rho_integral())
    }

    /// Integer degree sequences realizing the distribution on `n` variable
    /// nodes.
    ///
    /// Starts from largest-remainder node counts per degree, then searches a
    /// window of total edge counts, repairing both sides onto each candidate
    /// total with single-node moves between degree buckets, and keeps the
    /// realization whose bucket counts sit closest to the fractional ideal.
    /// Single-degree sides have no freedom, so a total that their degree does
    /// not divide is reported as a rounding error. Realized node counts land
    /// within two nodes of the fractional ideal in every degree bucket.
    pub fn realize_node_counts(&self, n: usize) -> Result<(Vec<usize>, Vec<usize>), EnsembleError> {
        if n < 2 {
            return Err(EnsembleError::Rounding(format!("n = {n} too small")));
        }
        let li = self.lambda_integral();
        let var_weights: Vec<(usize, f64)> =
            self.lambda.iter().map(|(&d, &c)| (d, c / d as f64 / li)).collect();
        let var_base = apportion(&var_weights, n);
        let base_edges: i64 = var_base.iter().map(|&(d, c)| (d * c) as i64).sum();

        let ri = self.rho_integral();
        let chk_weights: Vec<(usize, f64)> =
            self.rho.iter().map(|(&d, &c)| (d, c / d as f64 / ri)).collect();

        let window = 2 * self.rho.keys().max().copied().unwrap_or(2) as i64;
        let mut best: Option<(f64, Vec<(usize, usize)>, Vec<(usize, usize)>)> = None;
        for edges in (base_edges - window).max(2)..=base_edges + window {
            let Some(vars) = repair_to_edges(&var_base, edges, &self.lambda) else { continue };
            let m_exact = edges as f64 * ri;
            for m in [m_exact.round() as i64 - 1, m_exact.round() as i64, m_exact.round() as i64 + 1]
            {
                if m < 1 {
                    continue;
                }
                let chk_base = apportion(&chk_weights, m as usize);
                let Some(chks) = repair_to_edges(&chk_base, edges, &self.rho) else { continue };
                let score = max_node_dev(&vars, &self.lambda).max(max_node_dev(&chks, &self.rho));
                if best.as_ref().map_or(true, |(s, _, _)| score < *s) {
                    best = Some((score, vars.clone(), chks));
                }
            }
        }
        let Some((_, var_counts, chk_counts)) = best else {
            return Err(EnsembleError::Rounding(
                "no edge total in range is realizable on both sides".into(),
            ));
        };
        // Realized node counts must sit within two nodes of the fractional
        // ideal for every degree bucket (one from rounding, one more from
        // the edge-count repair). Edge fractions follow to within a couple
        // of node-degrees over E; a tighter universal bound is impossible
        // once degrees far above the mean carry mass.
        let edges: f64 = var_counts.iter().map(|&(d, c)| (d * c) as f64).sum();
        let node_dev = |counts: &[(usize, usize)], want: &BTreeMap<usize, f64>| -> f64 {
            counts
                .iter()
                .map(|&(d, c)| (c as f64 - want[&d] * edges / d as f64).abs())
                .fold(0.0, f64::max)
        };
        let worst = node_dev(&var_counts, &self.lambda).max(node_dev(&chk_counts, &self.rho));
        if worst > 2.0 + 1e-9 {
            return Err(EnsembleError::Rounding(format!(
                "best realization is {worst:.2} nodes away from the ideal in some bucket"
            )));
        }

        let expand = |counts: &[(usize, usize)]| -> Vec<usize> {
            let mut seq = Vec::new();
            for &(d, c) in counts {
                seq.extend(std::iter::repeat(d).take(c));
            }
            seq
        };
        let var_seq = expand(&var_counts);
        let chk_seq = expand(&chk_counts);
        debug_assert_eq!(var_seq.len(), n);
        debug_assert_eq!(var_seq.iter().sum::<usize>(), chk_seq.iter().sum::<usize>());
        Ok((var_seq, chk_seq))
    }

    /// Plain-text serialization: `q` is carried by the caller; this emits only
    /// the coefficient lines. See [`write_ensemble`] / [`read_ensemble`].
    fn fmt_lines(&self, q: usize, out: &mut String) {
        use fmt::Write;
        writeln!(out, "q {q}").unwrap();
        for (&d, &c) in &self.lambda {
            writeln!(out, "lambda {d} {c}").unwrap();
        }
        for (&d, &c) in &self.rho {
            writeln!(out, "rho {d} {c}").unwrap();
        }
    }
}

/// Largest-remainder apportionment of `total` items over weighted buckets.
/// Ties resolve toward lower degree for determinism.
fn apportion(weights: &[(usize, f64)], total: usize) -> Vec<(usize, usize)> {
    let wsum: f64 = weights.iter().map(|w| w.1).sum();
    let mut counts: Vec<(usize, usize, f64)> = weights
        .iter()
        .map(|&(d, w)| {
            let exact = w / wsum * total as f64;
            (d, exact.floor() as usize, exact - exact.floor())
        })
        .collect();
    let assigned: usize = counts.iter().map(|c| c.1).sum();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| {
        counts[b].2.partial_cmp(&counts[a].2).unwrap().then(counts[a].0.cmp(&counts[b].0))
    });
    for &i in order.iter().take(total - assigned) {
        counts[i].1 += 1;
    }
    counts.into_iter().map(|(d, c, _)| (d, c)).collect()
}

/// Moves single nodes between degree buckets until Σ degree·count equals
/// `edges`, greedily picking the move that keeps the worst edge-fraction
/// deviation smallest. Returns `None` when the target is unreachable (for
/// instance on a single-degree side).
fn repair_to_edges(
    base: &[(usize, usize)],
    edges: i64,
    target: &BTreeMap<usize, f64>,
) -> Option<Vec<(usize, usize)>> {
    let mut counts = base.to_vec();
    let current = |c: &[(usize, usize)]| -> i64 { c.iter().map(|&(d, n)| (d * n) as i64).sum() };
    let mut residual = edges - current(&counts);
    let mut guard = 0;
    while residual != 0 {
        guard += 1;
        if guard > 4096 {
            return None;
        }
        let mut best: Option<(f64, usize, usize)> = None;
        for from in 0..counts.len() {
            if counts[from].1 == 0 {
                continue;
            }
            for to in 0..counts.len() {
                if from == to {
                    continue;
                }
                let step = counts[to].0 as i64 - counts[from].0 as i64;
                // The move must strictly reduce the residual magnitude.
                if step == 0 || (residual - step).abs() >= residual.abs() {
                    continue;
                }
                counts[from].1 -= 1;
                counts[to].1 += 1;
                let score = max_node_dev(&counts, target);
                counts[from].1 += 1;
                counts[to].1 -= 1;
                if best.map_or(true, |(s, _, _)| score < s) {
                    best = Some((score, from, to));
                }
            }
        }
        let (_, from, to) = best?;
        counts[from].1 -= 1;
        counts[to].1 += 1;
        residual = edges - current(&counts);
    }
    Some(counts)
}

/// Worst distance, in whole nodes, between realized bucket counts and the
/// fractional ideal implied by the bucket's edge fraction at the realized
/// edge total.
fn max_node_dev(counts: &[(usize, usize)], target: &BTreeMap<usize, f64>) -> f64 {
    let e: f64 = counts.iter().map(|&(d, c)| (d * c) as f64).sum();
    if e == 0.0 {
        return f64::INFINITY;
    }
    counts
        .iter()
        .map(|&(d, c)| (c as f64 - target.get(&d).copied().unwrap_or(0.0) * e / d as f64).abs())
        .fold(0.0, f64::max)
}

/// Serializes an ensemble with its field order to the plain-text format:
/// one `q` line, then `lambda <degree> <coefficient>` and
/// `rho <degree> <coefficient>` lines. Coefficients round-trip exactly.
pub fn write_ensemble(dd: &DegreeDistribution, q: usize) -> String {
    let mut out = String::new();
    dd.fmt_lines(q, &mut out);
    out
}

/// Parses the text format produced by [`write_ensemble`].
pub fn read_ensemble(text: &str) -> Result<(DegreeDistribution, usize), EnsembleError> {
    let mut q = None;
    let mut lambda = BTreeMap::new();
    let mut rho = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut parts = trimmed.split_whitespace();
        let key = parts.next().unwrap();
        let parse_f = |s: Option<&str>, what: &str| -> Result<f64, EnsembleError> {
            s.ok_or_else(|| EnsembleError::Parse { line, message: format!("missing {what}") })?
                .parse::<f64>()
                .map_err(|e| EnsembleError::Parse { line, message: format!("bad {what}: {e}") })
        };
        let parse_d = |s: Option<&str>, what: &str| -> Result<usize, EnsembleError> {
            s.ok_or_else(|| EnsembleError::Parse { line, message: format!("missing {what}") })?
                .parse::<usize>()
                .map_err(|e| EnsembleError::Parse { line, message: format!("bad {what}: {e}") })
        };
        match key {
            "q" => q = Some(parse_d(parts.next(), "field order")?),
            "lambda" => {
                let d = parse_d(parts.next(), "degree")?;
                let c = parse_f(parts.next(), "coefficient")?;
                lambda.insert(d, c);
            }
            "rho" => {
                let d = parse_d(parts.next(), "degree")?;
                let c = parse_f(parts.next(), "coefficient")?;
                rho.insert(d, c);
            }
            other => {
                return Err(EnsembleError::Parse {
                    line,
                    message: format!("unknown key {other:?}"),
                })
            }
        }
    }
    let q = q.ok_or(EnsembleError::Parse { line: 0, message: "missing q line".into() })?;
    Ok((DegreeDistribution::new(lambda, rho)?, q))
}
