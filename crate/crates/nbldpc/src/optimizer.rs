//! Complexity optimization of degree distributions: minimize decoding
//! complexity per information bit over (lambda, rho) inside a re-centering
//! infinity-norm trust region, subject to chart convergence, a rate floor,
//! nonnegativity and normalization. Also the minimum-mean-column-weight scan
//! per rate.

use crate::ensemble::DegreeDistribution;
use crate::exitchart::{
    check_correct_prob_mixture, element_chart_given_q_out, threshold,
    ChartError, CONTRACTION_MARGIN,
};
use crate::reference::two_point_split;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Configuration of one optimization run.
#[derive(Debug, Clone)]
pub struct PctConfig {
    /// Target rate floor; the rate constraint is `Σλ_i/i >= (Σρ_k/k)/(1-r0)`.
    pub r0: f64,
    pub q: usize,
    /// Design initial error probability; `None` means 0.95 times the
    /// starting ensemble's threshold.
    pub p0: Option<f64>,
    /// Target error probability.
    pub pt: f64,
    /// Trust-region radius for lambda moves.
    pub zeta1: f64,
    /// Trust-region radius for rho moves.
    pub zeta2: f64,
    pub max_rounds: usize,
    /// Cells on the log grid used for constraint checks and the objective.
    pub grid_size: usize,
    pub seed: u64,
}

impl Default for PctConfig {
    fn default() -> Self {
        PctConfig {
            r0: 0.5,
            q: 4,
            p0: None,
            pt: 1e-6,
            zeta1: 0.05,
            zeta2: 0.05,
            max_rounds: 60,
            grid_size: 512,
            seed: 0,
        }
    }
}

impl PctConfig {
    pub fn validate(&self) -> Result<(), OptimizeError> {
        let limit = (self.q as f64 - 1.0) / self.q as f64;
        if !(0.0 < self.r0 && self.r0 < 1.0) {
            return Err(OptimizeError::BadConfig(format!("r0 = {} outside (0,1)", self.r0)));
        }
        if let Some(p0) = self.p0 {
            if !(self.pt < p0 && p0 < limit) {
                return Err(OptimizeError::BadConfig(format!(
                    "need pt < p0 < {limit}, got p0 = {p0}, pt = {}",
                    self.pt
                )));
            }
        }
        if self.pt <= 0.0 {
            return Err(OptimizeError::BadConfig("pt must be positive".into()));
        }
        for (name, z) in [("zeta1", self.zeta1), ("zeta2", self.zeta2)] {
            if !(0.0 < z && z <= 0.2) {
                return Err(OptimizeError::BadConfig(format!("{name} = {z} outside (0, 0.2]")));
            }
        }
        if self.grid_size < 16 {
            return Err(OptimizeError::BadConfig("grid_size too small".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub enum OptimizeError {
    BadConfig(String),
    /// The starting ensemble violates a constraint at the design point.
    InfeasibleStart(ConstraintReport),
    /// The center could not be evaluated mid-run.
    Stalled { rounds: usize },
    Chart(ChartError),
}

impl fmt::Display for OptimizeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OptimizeError::BadConfig(m) => write!(f, "bad configuration: {m}"),
            OptimizeError::InfeasibleStart(r) => {
                write!(f, "infeasible starting ensemble: {r}")
            }
            OptimizeError::Stalled { rounds } => {
                write!(f, "optimization stalled after {rounds} rounds")
            }
            OptimizeError::Chart(e) => write!(f, "chart evaluation failed: {e}"),
        }
    }
}

impl std::error::Error for OptimizeError {}

impl From<ChartError> for OptimizeError {
    fn from(e: ChartError) -> Self {
        OptimizeError::Chart(e)
    }
}

/// Per-constraint slack values; nonnegative slack everywhere means feasible.
#[derive(Debug, Clone)]
pub struct ConstraintReport {
    /// Minimum of `(p - f(p))/p` over the grid on `(pt, p0]`.
    pub convergence_slack: f64,
    /// `Σλ_i/i - (Σρ_k/k)/(1 - r0)`.
    pub rate_slack: f64,
    /// Smallest coefficient on either side.
    pub nonnegativity_slack: f64,
    /// `-(|Σλ - 1| + |Σρ - 1|)`.
    pub normalization_slack: f64,
    /// `ζ1 - ‖λ - λ̄‖∞` against the supplied center, when any.
    pub trust_slack_lambda: Option<f64>,
    /// `ζ2 - ‖ρ - ρ̄‖∞` against the supplied center, when any.
    pub trust_slack_rho: Option<f64>,
}

impl ConstraintReport {
    pub fn is_feasible(&self) -> bool {
        const TOL: f64 = -1e-9;
        self.convergence_slack >= CONTRACTION_MARGIN
            && self.rate_slack >= TOL
            && self.nonnegativity_slack >= TOL
            && self.normalization_slack >= TOL
            && self.trust_slack_lambda.map_or(true, |s| s >= TOL)
            && self.trust_slack_rho.map_or(true, |s| s >= TOL)
    }
}

impl fmt::Display for ConstraintReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "convergence {:.3e}, rate {:.3e}, nonneg {:.3e}, normalization {:.3e}",
            self.convergence_slack,
            self.rate_slack,
            self.nonnegativity_slack,
            self.normalization_slack
        )?;
        if let (Some(a), Some(b)) = (self.trust_slack_lambda, self.trust_slack_rho) {
            write!(f, ", trust ({a:.3e}, {b:.3e})")?;
        }
        Ok(())
    }
}

/// Snapshot of the optimizer state after one re-centering round.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPoint {
    pub round: usize,
    pub complexity: f64,
    pub iterations: f64,
    pub dd: DegreeDistribution,
}

/// Result of an optimization run.
#[derive(Debug, Clone)]
pub struct PctResult {
    pub dd: DegreeDistribution,
    /// Complexity per information bit of the result.
    pub complexity: f64,
    /// Iteration estimate of the result at the design point.
    pub iterations: f64,
    pub rounds_used: usize,
    pub constraint_report: ConstraintReport,
    /// One entry per round, starting with the initial center.
    pub trajectory: Vec<TrajectoryPoint>,
    /// The design initial error probability actually used.
    pub design_p0: f64,
}

/// Coefficient vector over a fixed active degree set.
#[derive(Debug, Clone, PartialEq)]
struct Point {
    lambda: Vec<f64>,
    rho: Vec<f64>,
}

struct Workspace {
    q: usize,
    p0: f64,
    r0: f64,
    lambda_degrees: Vec<usize>,
    rho_degrees: Vec<usize>,
    /// Log-grid midpoints on (pt, p0] and the cell width in log space.
    grid: Vec<f64>,
    cell: f64,
}

impl Workspace {
    /// Element-chart values per grid point and active lambda degree, for one
    /// rho. All lambda candidates against this rho reuse the matrix.
    fn chart_matrix(&self, rho: &[f64]) -> Option<Vec<Vec<f64>>> {
        let rho_map: BTreeMap<usize, f64> = self
            .rho_degrees
            .iter()
            .copied()
            .zip(rho.iter().copied())
            .filter(|&(_, c)| c > 0.0)
            .collect();
        let mut rows = Vec::with_capacity(self.grid.len());
        for &p in &self.grid {
            let q_out = check_correct_prob_mixture(p, &rho_map, self.q).ok()?;
            rows.push(
                self.lambda_degrees
                    .iter()
                    .map(|&i| element_chart_given_q_out(i, self.p0, q_out, self.q))
                    .collect(),
            );
        }
        Some(rows)
    }

    /// Iteration estimate for a lambda against a prepared chart matrix;
    /// `None` when the chart touches the diagonal on the grid.
    fn iterations(&self, lambda: &[f64], matrix: &[Vec<f64>]) -> Option<f64> {
        let mut n = 0.0;
        for (j, &p) in self.grid.iter().enumerate() {
            let f: f64 = lambda.iter().zip(&matrix[j]).map(|(&c, &fi)| c * fi).sum();
            if (p - f) / p < CONTRACTION_MARGIN {
                return None;
            }
            n += self.cell / (p / f).ln();
        }
        Some(n)
    }

    fn rho_integral(&self, rho: &[f64]) -> f64 {
        self.rho_degrees.iter().zip(rho).map(|(&k, &c)| c / k as f64).sum()
    }

    fn lambda_integral(&self, lambda: &[f64]) -> f64 {
        self.lambda_degrees.iter().zip(lambda).map(|(&i, &c)| c / i as f64).sum()
    }

    /// Objective; `None` when non-convergent or rate-infeasible.
    fn evaluate(&self, point: &Point, matrix: &[Vec<f64>]) -> Option<(f64, f64)> {
        let rate_slack =
            self.lambda_integral(&point.lambda) - self.rho_integral(&point.rho) / (1.0 - self.r0);
        if rate_slack < -1e-9 {
            return None;
        }
        let n = self.iterations(&point.lambda, matrix)?;
        let k = n * (1.0 - self.r0)
            / (self.r0 * (self.q as f64).log2() * self.rho_integral(&point.rho));
        Some((k, n))
    }

    fn to_distribution(&self, point: &Point) -> Option<DegreeDistribution> {
        let lambda: Vec<(usize, f64)> = self
            .lambda_degrees
            .iter()
            .copied()
            .zip(point.lambda.iter().copied())
            .filter(|&(_, c)| c > 1e-12)
            .collect();
        let rho: Vec<(usize, f64)> = self
            .rho_degrees
            .iter()
            .copied()
            .zip(point.rho.iter().copied())
            .filter(|&(_, c)| c > 1e-12)
            .collect();
        DegreeDistribution::from_pairs(&lambda, &rho).ok()
    }
}

fn log_grid(pt: f64, p0: f64, cells: usize) -> (Vec<f64>, f64) {
    let (lo, hi) = (pt.ln(), p0.ln());
    let h = (hi - lo) / cells as f64;
    ((0..cells).map(|j| (lo + (j as f64 + 0.5) * h).exp()).collect(), h)
}

/// Constraint report for an ensemble at an explicit design point, optionally
/// against a trust-region center.
pub fn feasible(
    dd: &DegreeDistribution,
    cfg: &PctConfig,
    design_p0: f64,
    center: Option<&DegreeDistribution>,
) -> ConstraintReport {
    let (grid, _) = log_grid(cfg.pt, design_p0, cfg.grid_size);
    let mut conv = f64::INFINITY;
    for &p in &grid {
        let f = crate::exitchart::composite_chart(p, dd, design_p0, cfg.q)
            .unwrap_or(f64::INFINITY);
        conv = conv.min((p - f) / p);
    }
    let rate_slack = dd.lambda_integral() - dd.rho_integral() / (1.0 - cfg.r0);
    let nonneg = dd
        .lambda()
        .values()
        .chain(dd.rho().values())
        .copied()
        .fold(f64::INFINITY, f64::min);
    let norm = -((dd.lambda().values().sum::<f64>() - 1.0).abs()
        + (dd.rho().values().sum::<f64>() - 1.0).abs());
    let (tl, tr) = match center {
        Some(c) => {
            let degrees: BTreeSet<usize> =
                dd.lambda().keys().chain(c.lambda().keys()).copied().collect();
            let dl = degrees
                .iter()
                .map(|d| {
                    (dd.lambda().get(d).copied().unwrap_or(0.0)
                        - c.lambda().get(d).copied().unwrap_or(0.0))
                    .abs()
                })
                .fold(0.0, f64::max);
            let degrees: BTreeSet<usize> =
                dd.rho().keys().chain(c.rho().keys()).copied().collect();
            let dr = degrees
                .iter()
                .map(|d| {
                    (dd.rho().get(d).copied().unwrap_or(0.0)
                        - c.rho().get(d).copied().unwrap_or(0.0))
                    .abs()
                })
                .fold(0.0, f64::max);
            (Some(cfg.zeta1 - dl), Some(cfg.zeta2 - dr))
        }
        None => (None, None),
    };
    ConstraintReport {
        convergence_slack: conv,
        rate_slack,
        nonnegativity_slack: nonneg,
        normalization_slack: norm,
        trust_slack_lambda: tl,
        trust_slack_rho: tr,
    }
}

/// Runs the trust-region complexity minimization from `init`.
///
/// Each round explores pairwise mass transfers (plus a few seeded random
/// compound moves) inside the boxes around the current center, accepts the
/// best strictly improving feasible candidate until none is left, then
/// re-centers. Stops when a round improves the objective by less than 1e-4
/// relative or after `max_rounds`.
pub fn optimize(init: &DegreeDistribution, cfg: &PctConfig) -> Result<PctResult, OptimizeError> {
    cfg.validate()?;
    let design_p0 = match cfg.p0 {
        Some(p0) => p0,
        None => 0.95 * threshold(init, cfg.q, cfg.pt)?,
    };

    let start_report = feasible(init, cfg, design_p0, None);
    if !start_report.is_feasible() {
        return Err(OptimizeError::InfeasibleStart(start_report));
    }

    // Active degree sets: the start's degrees plus the small degrees the
    // search is allowed to grow into.
    let lambda_degrees: Vec<usize> = init
        .lambda()
        .keys()
        .copied()
        .chain([2, 3, 4, 5])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let rho_degrees: Vec<usize> = init
        .rho()
        .keys()
        .copied()
        .chain([2, 3, 4, 5])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let (grid, cell) = log_grid(cfg.pt, design_p0, cfg.grid_size);
    let ws = Workspace {
        q: cfg.q,
        p0: design_p0,
        r0: cfg.r0,
        lambda_degrees: lambda_degrees.clone(),
        rho_degrees: rho_degrees.clone(),
        grid,
        cell,
    };

    let coeffs = |map: &BTreeMap<usize, f64>, degrees: &[usize]| -> Vec<f64> {
        degrees.iter().map(|d| map.get(d).copied().unwrap_or(0.0)).collect()
    };
    let mut center = Point {
        lambda: coeffs(init.lambda(), &lambda_degrees),
        rho: coeffs(init.rho(), &rho_degrees),
    };

    let matrix0 =
        ws.chart_matrix(&center.rho).ok_or(OptimizeError::Stalled { rounds: 0 })?;
    let (mut best_k, mut best_n) =
        ws.evaluate(&center, &matrix0).ok_or(OptimizeError::Stalled { rounds: 0 })?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut trajectory = vec![TrajectoryPoint {
        round: 0,
        complexity: best_k,
        iterations: best_n,
        dd: init.clone(),
    }];
    let mut rounds_used = 0usize;

    for round in 1..=cfg.max_rounds {
        let round_start_k = best_k;
        let mut current = center.clone();

        // Inner subproblem: greedy best-improvement inside the boxes.
        loop {
            let mut best_step: Option<(f64, f64, Point)> = None;
            let mut consider = |cand: Point, ws: &Workspace, matrix: &[Vec<f64>]| {
                if let Some((k, n)) = ws.evaluate(&cand, matrix) {
                    if k < best_k - 1e-12
                        && best_step.as_ref().map_or(true, |(bk, _, _)| k < *bk)
                    {
                        best_step = Some((k, n, cand));
                    }
                }
            };

            // Lambda transfers against the current rho.
            let matrix = ws
                .chart_matrix(&current.rho)
                .ok_or(OptimizeError::Stalled { rounds: round })?;
            for from in 0..lambda_degrees.len() {
                for to in 0..lambda_degrees.len() {
                    if from == to || current.lambda[from] <= 0.0 {
                        continue;
                    }
                    for scale in [1.0, 0.5, 0.25, 0.1, 0.04] {
                        // Stay inside both coordinates' boxes around the
                        // round center and keep coefficients nonnegative.
                        let room_from = current.lambda[from] - (center.lambda[from] - cfg.zeta1);
                        let room_to = center.lambda[to] + cfg.zeta1 - current.lambda[to];
                        let delta = (cfg.zeta1 * scale)
                            .min(room_from)
                            .min(room_to)
                            .min(current.lambda[from]);
                        // A degree enters the support only with real mass.
                        let floor = if current.lambda[to] == 0.0 { 1e-3 } else { 1e-4 };
                        if delta < floor {
                            continue;
                        }
                        let mut cand = current.clone();
                        cand.lambda[from] -= delta;
                        cand.lambda[to] += delta;
                        consider(cand, &ws, &matrix);
                    }
                }
            }

            // Rho transfers; each needs its own chart matrix.
            for from in 0..rho_degrees.len() {
                for to in 0..rho_degrees.len() {
                    if from == to || current.rho[from] <= 0.0 {
                        continue;
                    }
                    for scale in [1.0, 0.5, 0.2] {
                        let room_from = current.rho[from] - (center.rho[from] - cfg.zeta2);
                        let room_to = center.rho[to] + cfg.zeta2 - current.rho[to];
                        let delta = (cfg.zeta2 * scale)
                            .min(room_from)
                            .min(room_to)
                            .min(current.rho[from]);
                        let floor = if current.rho[to] == 0.0 { 1e-3 } else { 1e-4 };
                        if delta < floor {
                            continue;
                        }
                        let mut cand = current.clone();
                        cand.rho[from] -= delta;
                        cand.rho[to] += delta;
                        if let Some(m) = ws.chart_matrix(&cand.rho) {
                            consider(cand, &ws, &m);
                        }
                    }
                }
            }

            // Seeded compound probes: one lambda and one rho transfer at once.
            for _ in 0..8 {
                let lf = rng.random_range(0..lambda_degrees.len());
                let lt = rng.random_range(0..lambda_degrees.len());
                let rf = rng.random_range(0..rho_degrees.len());
                let rt = rng.random_range(0..rho_degrees.len());
                if lf == lt || rf == rt {
                    continue;
                }
                let dl = (rng.random::<f64>() * cfg.zeta1)
                    .min(current.lambda[lf] - (center.lambda[lf] - cfg.zeta1))
                    .min(center.lambda[lt] + cfg.zeta1 - current.lambda[lt])
                    .min(current.lambda[lf]);
                let dr = (rng.random::<f64>() * cfg.zeta2)
                    .min(current.rho[rf] - (center.rho[rf] - cfg.zeta2))
                    .min(center.rho[rt] + cfg.zeta2 - current.rho[rt])
                    .min(current.rho[rf]);
                if dl < 1e-3 || dr < 1e-3 {
                    continue;
                }
                let mut cand = current.clone();
                cand.lambda[lf] -= dl;
                cand.lambda[lt] += dl;
                cand.rho[rf] -= dr;
                cand.rho[rt] += dr;
                if let Some(m) = ws.chart_matrix(&cand.rho) {
                    consider(cand, &ws, &m);
                }
            }

            match best_step {
                Some((k, n, cand)) => {
                    best_k = k;
                    best_n = n;
                    current = cand;
                }
                None => break,
            }
        }

        rounds_used = round;
        center = current;
        let snapshot = ws
            .to_distribution(&center)
            .ok_or(OptimizeError::Stalled { rounds: rounds_used })?;
        trajectory.push(TrajectoryPoint {
            round,
            complexity: best_k,
            iterations: best_n,
            dd: snapshot,
        });
        if (round_start_k - best_k) / round_start_k < 1e-4 {
            break;
        }
    }

    let dd = ws
        .to_distribution(&center)
        .ok_or(OptimizeError::Stalled { rounds: rounds_used })?;
    let report = feasible(&dd, cfg, design_p0, None);
    Ok(PctResult {
        dd,
        complexity: best_k,
        iterations: best_n,
        rounds_used,
        constraint_report: report,
        trajectory,
        design_p0,
    })
}

/// Scan parameters for [`min_valid_mean_column_weight`].
#[derive(Debug, Clone)]
pub struct ValidityScan {
    /// Design point at which the canonical ensemble's chart must be open.
    pub p0: f64,
    /// Bottom of the convergence scan; the binding constraint for small mean
    /// column weights is the contraction near zero.
    pub pt: f64,
    pub grid_size: usize,
}

impl Default for ValidityScan {
    fn default() -> Self {
        ValidityScan { p0: 1e-3, pt: 1e-7, grid_size: 400 }
    }
}

/// Smallest mean column weight (bisection to 0.01) such that the canonical
/// two-point ensemble at rate `r0` has a convergent chart down to the scan
/// floor. Returns `None` when nothing below mean weight 5 qualifies.
///
/// The canonical witness puts the variable mass on the two integers around
/// the candidate mean and the check mass on the two integers around
/// `mean/(1-r0)`; concentrating the check side minimizes the mean edge
/// branching, so if any ensemble at this rate and mean column weight has an
/// open chart, the witness does.
pub fn min_valid_mean_column_weight(r0: f64, q: usize, scan: &ValidityScan) -> Option<f64> {
    let valid = |dv: f64| -> bool {
        let Some(lambda) = two_point_split(dv) else { return false };
        let Some(rho) = two_point_split(dv / (1.0 - r0)) else { return false };
        let Ok(dd) = DegreeDistribution::from_pairs(&lambda, &rho) else { return false };
        let (grid, _) = log_grid(scan.pt, scan.p0, scan.grid_size);
        let mut convex_marker = false;
        for &p in &grid {
            let Ok(f) = crate::exitchart::composite_chart(p, &dd, scan.p0, q) else {
                return false;
            };
            if (p - f) / p < CONTRACTION_MARGIN {
                return false;
            }
            // The convexity guarantee holds where the chart does not exceed
            // e^2 p; on a convergent trajectory that is everywhere, but keep
            // the witness requirement explicit.
            if f < p * std::f64::consts::E.powi(2) {
                convex_marker = true;
            }
        }
        convex_marker
    };

    let (mut lo, mut hi) = (2.0f64, 5.0f64);
    if !valid(hi) {
        return None;
    }
    if valid(lo) {
        return Some(lo);
    }
    while hi - lo > 0.01 {
        let mid = 0.5 * (lo + hi);
        if valid(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}
