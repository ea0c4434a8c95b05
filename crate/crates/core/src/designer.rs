//! Inverse problems: rotation angles that realize target installment
//! schedules.
//!
//! The search minimizes weighted squared deviations of `qbar(angles)` from a
//! target with Levenberg-Marquardt steps, central finite-difference
//! Jacobians and a fixed list of starting points. Runs are independent and
//! may execute in parallel; the winner is picked by a deterministic reducer.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_4, PI};

use crate::error::{LoanError, Result};
use crate::loan::{solve_recurrence, AmortizationSystem, LoanSpec, RateModel};
use crate::operators::LoanOperators;
use crate::rotation::{generator_count, plane_index, rotated_diagonal, rotation_from_angles, so3_from_planes, RotationSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Every `qbar_n` equal to `Tr(Q) / M`.
    Equalize,
    TargetSchedule(Vec<f64>),
    /// `qbar_period <= cap`, with `period` 1-based.
    CapPayment { period: usize, cap: f64 },
}

/// `sum_n coeffs_n qbar_n <= bound`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraint {
    pub coeffs: Vec<f64>,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignProblem {
    /// Eigenvalues `q_1 ..= q_M` of the installment operator.
    pub installments: Vec<f64>,
    pub objective: Objective,
    #[serde(default)]
    pub constraints: Vec<LinearConstraint>,
    /// Planes allowed to rotate; all planes when absent.
    #[serde(default)]
    pub planes: Option<Vec<(usize, usize)>>,
}

impl DesignProblem {
    pub fn new(installments: Vec<f64>, objective: Objective) -> Self {
        Self {
            installments,
            objective,
            constraints: Vec::new(),
            planes: None,
        }
    }

    pub fn from_operators(ops: &LoanOperators, objective: Objective) -> Self {
        Self::new(ops.installments(), objective)
    }

    pub fn dim(&self) -> usize {
        self.installments.len()
    }

    pub fn trace(&self) -> f64 {
        self.installments.iter().sum()
    }

    fn bounds(&self) -> (f64, f64) {
        self.installments
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &q| (lo.min(q), hi.max(q)))
    }

    fn active_planes(&self) -> Result<Vec<usize>> {
        let m = self.dim();
        let mut indices = match &self.planes {
            None => (0..generator_count(m)).collect(),
            Some(list) => list.iter().map(|&p| plane_index(m, p)).collect::<Result<Vec<_>>>()?,
        };
        indices.sort_unstable();
        indices.dedup();
        Ok(indices)
    }

    /// Structural checks plus the necessary conditions for reachability.
    pub fn validate(&self) -> Result<()> {
        let m = self.dim();
        if m < 2 {
            return Err(LoanError::InvalidSpec("design needs M >= 2".into()));
        }
        if self.installments.iter().any(|q| !q.is_finite()) {
            return Err(LoanError::InvalidSpec("installments must be finite".into()));
        }
        self.active_planes()?;
        for c in &self.constraints {
            if c.coeffs.len() != m {
                return Err(LoanError::DimensionMismatch {
                    expected: m,
                    actual: c.coeffs.len(),
                });
            }
            if !(c.bound.is_finite() && c.coeffs.iter().all(|v| v.is_finite())) {
                return Err(LoanError::InvalidSpec("constraint values must be finite".into()));
            }
        }
        let trace = self.trace();
        let tol = 1e-9 * trace.abs().max(1.0);
        let (lo, hi) = self.bounds();
        match &self.objective {
            Objective::Equalize => {
                let mean = trace / m as f64;
                if mean < lo - tol || mean > hi + tol {
                    return Err(LoanError::Infeasible(format!("Tr(Q)/M = {mean} outside [{lo}, {hi}]")));
                }
            }
            Objective::TargetSchedule(target) => {
                if target.len() != m {
                    return Err(LoanError::DimensionMismatch {
                        expected: m,
                        actual: target.len(),
                    });
                }
                if target.iter().any(|t| !t.is_finite()) {
                    return Err(LoanError::InvalidSpec("targets must be finite".into()));
                }
                let sum: f64 = target.iter().sum();
                if (sum - trace).abs() > tol {
                    return Err(LoanError::TraceMismatch { target: sum, trace });
                }
                if let Some((n, &value)) = target.iter().enumerate().find(|(_, t)| **t < lo - tol || **t > hi + tol) {
                    return Err(LoanError::ConvexityViolation {
                        period: n + 1,
                        value,
                        min: lo,
                        max: hi,
                    });
                }
                if let Some(k) = majorization_gap(target, &self.installments, tol) {
                    return Err(LoanError::Infeasible(format!(
                        "target is not majorized by q: the {k} largest targets exceed the {k} largest installments"
                    )));
                }
            }
            Objective::CapPayment { period, cap } => {
                if *period == 0 || *period > m {
                    return Err(LoanError::IndexOutOfRange { index: *period, max: m });
                }
                if !(cap.is_finite() && *cap > 0.0) {
                    return Err(LoanError::InvalidSpec("cap must be positive".into()));
                }
                if *cap < lo - tol {
                    return Err(LoanError::Infeasible(format!("cap {cap} below the smallest installment {lo}")));
                }
            }
        }
        Ok(())
    }
}

/// Smallest `k` whose top-`k` partial sum of `target` exceeds that of `q`
/// by more than `tol`. A target is an average of permutations of `q` iff
/// no such `k` exists (sums being equal).
fn majorization_gap(target: &[f64], q: &[f64], tol: f64) -> Option<usize> {
    let sorted_desc = |v: &[f64]| {
        let mut s = v.to_vec();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    };
    let (t, q) = (sorted_desc(target), sorted_desc(q));
    let (mut st, mut sq) = (0.0, 0.0);
    for k in 0..t.len() {
        st += t[k];
        sq += q[k];
        if st > sq + tol {
            return Some(k + 1);
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DesignConfig {
    pub max_iterations: usize,
    /// Central-difference step in radians.
    pub fd_step: f64,
    /// Random starting points in addition to the identity.
    pub starts: usize,
    pub seed: u64,
    /// Success threshold relative to `Tr(Q)`.
    pub tolerance: f64,
    /// Per-period weights of the squared deviations; all ones when absent.
    pub weights: Option<Vec<f64>>,
    /// Weight of squared constraint violations.
    pub penalty: f64,
}

impl Default for DesignConfig {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            fd_step: 1e-6,
            starts: 8,
            seed: 0,
            tolerance: 1e-11,
            weights: None,
            penalty: 1e3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignStatus {
    /// Objective met within tolerance and every constraint satisfied.
    Optimal,
    /// Constraints satisfied, objective residual above tolerance.
    Feasible,
    /// No start satisfied the constraints.
    Infeasible,
    /// Best run stopped at the iteration limit.
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSolution {
    /// Full angle vector in plane order, each in `(-pi, pi]`.
    pub angles: Vec<f64>,
    pub q_bar: Vec<f64>,
    /// `max_n |qbar_n - target_n|`; for a cap, the amount above it.
    pub residual: f64,
    /// Largest constraint violation, zero when all hold.
    pub constraint_violation: f64,
    pub status: DesignStatus,
    /// Start that produced the solution; `0` is the identity.
    pub start: usize,
    pub iterations: usize,
}

impl DesignSolution {
    pub fn rotation(&self) -> Result<RotationSpec> {
        rotation_from_angles(self.q_bar.len(), &self.angles)
    }
}

fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

struct Evaluator<'a> {
    problem: &'a DesignProblem,
    active: Vec<usize>,
    target: Option<Vec<f64>>,
    sqrt_weights: Vec<f64>,
    sqrt_penalty: f64,
    scale: f64,
}

struct Evaluation {
    q_bar: Vec<f64>,
    residuals: DVector<f64>,
    objective: f64,
    violation: f64,
}

impl<'a> Evaluator<'a> {
    fn new(problem: &'a DesignProblem, config: &DesignConfig) -> Result<Self> {
        let m = problem.dim();
        let weights = config.weights.clone().unwrap_or_else(|| vec![1.0; m]);
        if weights.len() != m {
            return Err(LoanError::DimensionMismatch {
                expected: m,
                actual: weights.len(),
            });
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) || !(config.penalty.is_finite() && config.penalty > 0.0) {
            return Err(LoanError::InvalidSpec("weights and penalty must be positive".into()));
        }
        let target = match &problem.objective {
            Objective::Equalize => Some(vec![problem.trace() / m as f64; m]),
            Objective::TargetSchedule(t) => Some(t.clone()),
            Objective::CapPayment { .. } => None,
        };
        Ok(Self {
            problem,
            active: problem.active_planes()?,
            target,
            sqrt_weights: weights.iter().map(|w| w.sqrt()).collect(),
            sqrt_penalty: config.penalty.sqrt(),
            scale: (problem.trace().abs() / m as f64).max(f64::MIN_POSITIVE),
        })
    }

    fn full_angles(&self, x: &[f64]) -> Vec<f64> {
        let mut angles = vec![0.0; generator_count(self.problem.dim())];
        for (&k, &v) in self.active.iter().zip(x) {
            angles[k] = v;
        }
        angles
    }

    fn q_bar(&self, x: &[f64]) -> Vec<f64> {
        let u = rotation_from_angles(self.problem.dim(), &self.full_angles(x)).expect("finite angles of valid dimension");
        rotated_diagonal(u.matrix(), &self.problem.installments)
    }

    fn evaluate(&self, x: &[f64]) -> Evaluation {
        let q_bar = self.q_bar(x);
        let mut residuals = Vec::with_capacity(q_bar.len() + self.problem.constraints.len() + 1);
        let objective = match (&self.target, &self.problem.objective) {
            (Some(target), _) => {
                let mut worst = 0.0f64;
                for n in 0..q_bar.len() {
                    let dev = q_bar[n] - target[n];
                    worst = worst.max(dev.abs());
                    residuals.push(self.sqrt_weights[n] * dev / self.scale);
                }
                worst
            }
            (None, Objective::CapPayment { period, cap }) => {
                let over = (q_bar[period - 1] - cap).max(0.0);
                residuals.push(self.sqrt_weights[period - 1] * over / self.scale);
                over
            }
            (None, _) => unreachable!("only caps lack a target"),
        };
        let mut violation = 0.0f64;
        for c in &self.problem.constraints {
            let lhs: f64 = c.coeffs.iter().zip(&q_bar).map(|(a, b)| a * b).sum();
            let over = (lhs - c.bound).max(0.0);
            violation = violation.max(over);
            residuals.push(self.sqrt_penalty * over / self.scale);
        }
        Evaluation {
            q_bar,
            residuals: DVector::from_vec(residuals),
            objective,
            violation,
        }
    }

    fn jacobian(&self, x: &[f64], h: f64, rows: usize) -> DMatrix<f64> {
        let mut jac = DMatrix::zeros(rows, x.len());
        let mut probe = x.to_vec();
        for k in 0..x.len() {
            probe[k] = x[k] + h;
            let plus = self.evaluate(&probe).residuals;
            probe[k] = x[k] - h;
            let minus = self.evaluate(&probe).residuals;
            probe[k] = x[k];
            jac.set_column(k, &((plus - minus) / (2.0 * h)));
        }
        jac
    }
}

struct Run {
    start: usize,
    x: Vec<f64>,
    eval: Evaluation,
    iterations: usize,
    hit_limit: bool,
}

fn levenberg_marquardt(ev: &Evaluator, start: usize, x0: Vec<f64>, config: &DesignConfig, tol: f64) -> Run {
    let mut x = x0;
    let mut eval = ev.evaluate(&x);
    let mut cost = eval.residuals.norm_squared();
    let mut lambda = 1e-3;
    let done = |e: &Evaluation| e.objective <= tol && e.violation <= tol;
    for iteration in 0..config.max_iterations {
        if done(&eval) {
            return Run { start, x, eval, iterations: iteration, hit_limit: false };
        }
        let jac = ev.jacobian(&x, config.fd_step, eval.residuals.len());
        let gradient = jac.transpose() * &eval.residuals;
        if gradient.amax() == 0.0 {
            return Run { start, x, eval, iterations: iteration, hit_limit: false };
        }
        let normal = jac.transpose() * &jac;
        let mut improved = false;
        while lambda < 1e12 {
            let mut system = normal.clone();
            for d in 0..system.nrows() {
                system[(d, d)] += lambda * (1.0 + normal[(d, d)]);
            }
            let Some(step) = system.cholesky().map(|c| c.solve(&(-&gradient))) else {
                lambda *= 10.0;
                continue;
            };
            let candidate: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let trial = ev.evaluate(&candidate);
            let trial_cost = trial.residuals.norm_squared();
            if trial_cost < cost {
                let stalled = step.amax() < 1e-15;
                x = candidate;
                eval = trial;
                cost = trial_cost;
                lambda = (lambda / 3.0).max(1e-12);
                improved = !stalled;
                break;
            }
            lambda *= 4.0;
        }
        if !improved {
            return Run { start, x, eval, iterations: iteration + 1, hit_limit: false };
        }
    }
    let hit_limit = !done(&eval);
    Run { start, x, eval, iterations: config.max_iterations, hit_limit }
}

/// Starting points: the identity, then `config.starts` points with angles
/// uniform in `[-pi, pi)` drawn from seeds `seed, seed + 1, ...`.
fn starting_points(dims: usize, config: &DesignConfig) -> Vec<Vec<f64>> {
    std::iter::once(vec![0.0; dims])
        .chain((0..config.starts).map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(k as u64));
            (0..dims).map(|_| rng.random_range(-PI..PI)).collect()
        }))
        .collect()
}

/// Orders runs: constraint-satisfying before violating, then residual (all
/// residuals within tolerance tie), then `||angles||_2`, then start index.
fn better(a: &Run, b: &Run, tol: f64) -> bool {
    let key = |r: &Run| {
        let feasible = r.eval.violation <= tol;
        let residual = if r.eval.objective <= tol { 0.0 } else { r.eval.objective };
        (!feasible, residual, r.eval.violation)
    };
    let (ka, kb) = (key(a), key(b));
    if ka.0 != kb.0 {
        return !ka.0;
    }
    match ka.1.total_cmp(&kb.1).then(ka.2.total_cmp(&kb.2)) {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Equal => {
            let norm = |r: &Run| r.x.iter().map(|v| wrap_angle(*v).powi(2)).sum::<f64>();
            match norm(a).total_cmp(&norm(b)) {
                std::cmp::Ordering::Less => true,
                std::cmp::Ordering::Greater => false,
                std::cmp::Ordering::Equal => a.start < b.start,
            }
        }
    }
}

/// Minimizes `sum_n w_n (qbar_n - target_n)^2` plus penalized constraint
/// violations over the (possibly restricted) angle vector.
pub fn solve_design(problem: &DesignProblem, config: &DesignConfig) -> Result<DesignSolution> {
    problem.validate()?;
    if config.fd_step <= 0.0 || !config.fd_step.is_finite() || config.tolerance <= 0.0 {
        return Err(LoanError::InvalidSpec("fd_step and tolerance must be positive".into()));
    }
    let ev = Evaluator::new(problem, config)?;
    let tol = config.tolerance * problem.trace().abs().max(1.0);
    let runs: Vec<Run> = starting_points(ev.active.len(), config)
        .into_par_iter()
        .enumerate()
        .map(|(k, x0)| levenberg_marquardt(&ev, k, x0, config, tol))
        .collect();
    let best = runs
        .into_iter()
        .reduce(|a, b| if better(&b, &a, tol) { b } else { a })
        .expect("at least the identity start");

    let x: Vec<f64> = best.x.iter().map(|v| wrap_angle(*v)).collect();
    let eval = ev.evaluate(&x);
    let status = if eval.violation > tol {
        DesignStatus::Infeasible
    } else if eval.objective <= tol {
        DesignStatus::Optimal
    } else if best.hit_limit {
        DesignStatus::MaxIterations
    } else {
        DesignStatus::Feasible
    };
    Ok(DesignSolution {
        angles: ev.full_angles(&x),
        q_bar: eval.q_bar,
        residual: eval.objective,
        constraint_violation: eval.violation,
        status,
        start: best.start,
        iterations: best.iterations,
    })
}

/// Angles making every rotated installment equal to `Tr(Q)/M`.
///
/// An already level schedule returns zero angles; `M = 2` returns
/// `phi = pi/4` directly. Larger `M` go through [`solve_design`].
pub fn equalize_installments(installments: &[f64], config: &DesignConfig) -> Result<DesignSolution> {
    let problem = DesignProblem::new(installments.to_vec(), Objective::Equalize);
    problem.validate()?;
    let m = installments.len();
    let trace = problem.trace();
    let mean = trace / m as f64;
    let tol = config.tolerance * trace.abs().max(1.0);
    let closed_form = |angles: Vec<f64>| -> Result<DesignSolution> {
        let u = rotation_from_angles(m, &angles)?;
        let q_bar = rotated_diagonal(u.matrix(), installments);
        let residual = q_bar.iter().map(|q| (q - mean).abs()).fold(0.0, f64::max);
        Ok(DesignSolution {
            angles,
            q_bar,
            residual,
            constraint_violation: 0.0,
            status: if residual <= tol { DesignStatus::Optimal } else { DesignStatus::Feasible },
            start: 0,
            iterations: 0,
        })
    };
    if installments.iter().all(|q| (q - mean).abs() <= tol) {
        return closed_form(vec![0.0; generator_count(m)]);
    }
    if m == 2 {
        return closed_form(vec![FRAC_PI_4]);
    }
    solve_design(&problem, config)
}

/// Installments `q_1 ..= q_M` of a loan.
pub fn installments_of(spec: &LoanSpec) -> Result<Vec<f64>> {
    Ok(solve_recurrence(spec)?.q)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompensationReport {
    /// `q_n - qbar_n`
    pub delta: Vec<f64>,
    pub delta_sum: f64,
    /// Periods (1-based) paying less after rotation.
    pub reduced: Vec<usize>,
    /// Periods paying more, which absorb the reductions.
    pub absorbing: Vec<usize>,
    pub balanced: bool,
}

/// Per-period shift between original and rotated installments.
pub fn compensation_report(installments: &[f64], rotation: &RotationSpec) -> Result<CompensationReport> {
    if installments.len() != rotation.dim() {
        return Err(LoanError::DimensionMismatch {
            expected: rotation.dim(),
            actual: installments.len(),
        });
    }
    let q_bar = rotated_diagonal(rotation.matrix(), installments);
    let trace: f64 = installments.iter().sum();
    let threshold = 1e-12 * trace.abs().max(1.0);
    let delta: Vec<f64> = installments.iter().zip(&q_bar).map(|(q, b)| q - b).collect();
    let delta_sum: f64 = delta.iter().sum();
    let pick = |positive: bool| {
        delta
            .iter()
            .enumerate()
            .filter(|(_, d)| if positive { **d > threshold } else { **d < -threshold })
            .map(|(n, _)| n + 1)
            .collect()
    };
    Ok(CompensationReport {
        reduced: pick(true),
        absorbing: pick(false),
        balanced: delta_sum.abs() < 1e-9 * trace.abs().max(1.0),
        delta,
        delta_sum,
    })
}

/// Required sign of `qbar_n - q_n` per period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Positive,
    #[serde(rename = "-")]
    Negative,
}

pub fn parse_pattern(pattern: &str) -> Result<[Sign; 3]> {
    let signs: Vec<Sign> = pattern
        .chars()
        .filter(|c| !c.is_whitespace() && *c != ',')
        .map(|c| match c {
            '+' => Ok(Sign::Positive),
            '-' | '\u{2212}' => Ok(Sign::Negative),
            _ => Err(LoanError::InvalidPattern(pattern.to_string())),
        })
        .collect::<Result<_>>()?;
    signs.try_into().map_err(|_| LoanError::InvalidPattern(pattern.to_string()))
}

pub fn format_pattern(pattern: &[Sign; 3]) -> String {
    pattern
        .iter()
        .map(|s| match s {
            Sign::Positive => '+',
            Sign::Negative => '-',
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegionParams {
    /// Index-unit loan with `M = 3`.
    pub loan: LoanSpec,
    /// Constant inflation factor between periods: `u_n = a^(n-1)`.
    pub inflation: f64,
    /// `sin(gamma)`
    pub z: f64,
    pub pattern: String,
    pub grid_n: usize,
}

impl Default for RegionParams {
    fn default() -> Self {
        Self {
            loan: LoanSpec::new(100.0, 3, RateModel::Constant(0.2), AmortizationSystem::German),
            inflation: 1.05,
            z: 0.6,
            pattern: "--+".into(),
            grid_n: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionGrid {
    pub z: f64,
    pub inflation: f64,
    pub pattern: String,
    /// Currency installments the signs are measured against.
    pub q: Vec<f64>,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// `feasible[ix][iy]`
    pub feasible: Vec<Vec<bool>>,
}

impl RegionGrid {
    pub fn count(&self) -> usize {
        self.feasible.iter().flatten().filter(|f| **f).count()
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }
}

/// `grid_n` evenly spaced points from -1 to 1 inclusive.
pub fn unit_grid(grid_n: usize) -> Vec<f64> {
    match grid_n {
        0 => Vec::new(),
        1 => vec![0.0],
        n => (0..n).map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Whether `qbar - q` has the strict sign pattern for the rotation with
/// `sin(phi) = x`, `sin(theta) = y`, `sin(gamma) = z`.
pub fn pattern_holds(q: &[f64; 3], pattern: &[Sign; 3], x: f64, y: f64, z: f64) -> bool {
    let u = so3_from_planes(y.asin(), z.asin(), x.asin());
    let q_bar = rotated_diagonal(&u, q);
    (0..3).all(|n| {
        let diff = q_bar[n] - q[n];
        match pattern[n] {
            Sign::Positive => diff > 0.0,
            Sign::Negative => diff < 0.0,
        }
    })
}

/// Scans `x = sin(phi)`, `y = sin(theta)` over `[-1, 1]^2` at fixed
/// `z = sin(gamma)` for the sign pattern of `qbar_n - q_n`, where `q_n` are
/// the loan's installments converted with `u_n = a^(n-1)`.
pub fn sign_pattern_region(params: &RegionParams) -> Result<RegionGrid> {
    let pattern = parse_pattern(&params.pattern)?;
    if params.loan.periods != 3 {
        return Err(LoanError::DimensionMismatch {
            expected: 3,
            actual: params.loan.periods,
        });
    }
    if !(params.z.is_finite() && params.z.abs() <= 1.0) {
        return Err(LoanError::InvalidSpec(format!("z = {} outside [-1, 1]", params.z)));
    }
    if !(params.inflation.is_finite() && params.inflation > 0.0) {
        return Err(LoanError::InvalidModel(format!("inflation {} must be positive", params.inflation)));
    }
    if params.grid_n < 2 {
        return Err(LoanError::InvalidSpec("grid_n must be at least 2".into()));
    }
    let index_q = installments_of(&params.loan)?;
    let q = [
        index_q[0],
        index_q[1] * params.inflation,
        index_q[2] * params.inflation * params.inflation,
    ];
    let xs = unit_grid(params.grid_n);
    let ys = xs.clone();
    let feasible = xs
        .par_iter()
        .map(|&x| ys.iter().map(|&y| pattern_holds(&q, &pattern, x, y, params.z)).collect())
        .collect();
    Ok(RegionGrid {
        z: params.z,
        inflation: params.inflation,
        pattern: format_pattern(&pattern),
        q: q.to_vec(),
        xs,
        ys,
        feasible,
    })
}
