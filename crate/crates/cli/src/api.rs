//! Request and response shapes shared by the CLI and the HTTP service.

use serde::{Deserialize, Serialize};

use qloan::designer::{
    compensation_report, equalize_installments, sign_pattern_region, solve_design, CompensationReport, DesignConfig,
    DesignProblem, DesignSolution, LinearConstraint, Objective, RegionGrid, RegionParams,
};
use qloan::indexed::{indexed_schedule, CurrencySchedule, IndexModel};
use qloan::loan::{solve_recurrence, LoanSpec, Schedule};
use qloan::operators::{build_operators, check_algebra, AlgebraReport};
use qloan::rotation::{rotate_diagonals, rotated_diagonal, RotatedSchedule, RotationSpec};
use qloan::{LoanError, Result};

/// Largest `M` accepted for dense operator work.
pub const MAX_PERIODS: usize = 1000;
/// Largest region grid side.
pub const MAX_GRID: usize = 1000;
/// Largest `M` for the angle designer.
pub const MAX_DESIGN_PERIODS: usize = 40;

fn check_size(spec: &LoanSpec, max: usize) -> Result<()> {
    if spec.periods > max {
        return Err(LoanError::InvalidSpec(format!("M = {} exceeds the limit of {max}", spec.periods)));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Invariants {
    pub trace_q: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace_q_bar: Option<f64>,
    pub sum_a: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sum_a_bar: Option<f64>,
    #[serde(rename = "d_M")]
    pub d_m: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace_q_preserved: Option<bool>,
}

fn trace_tolerance(trace: f64) -> f64 {
    1e-9 * trace.abs().max(f64::MIN_POSITIVE)
}

impl Invariants {
    fn of(q: &[f64], a: &[f64], d_m: f64) -> Self {
        Self {
            trace_q: q.iter().sum(),
            trace_q_bar: None,
            sum_a: a.iter().sum(),
            sum_a_bar: None,
            d_m,
            trace_q_preserved: None,
        }
    }

    fn with_rotation(mut self, q_bar: &[f64], a_bar: &[f64]) -> Self {
        let trace_q_bar: f64 = q_bar.iter().sum();
        self.trace_q_bar = Some(trace_q_bar);
        self.sum_a_bar = Some(a_bar.iter().sum());
        self.trace_q_preserved = Some((trace_q_bar - self.trace_q).abs() < trace_tolerance(self.trace_q));
        self
    }

    /// Rotated results that break trace invariance are never returned.
    fn ensure_preserved(self) -> std::result::Result<Self, InternalError> {
        match self.trace_q_preserved {
            Some(false) => Err(InternalError(format!(
                "trace check failed: Tr(Q) = {}, Tr(Qbar) = {:?}",
                self.trace_q, self.trace_q_bar
            ))),
            _ => Ok(self),
        }
    }
}

/// Broken internal invariant; reported as a server error.
#[derive(Debug, Clone, thiserror::Error)]
#[error("internal invariant violated: {0}")]
pub struct InternalError(pub String);

#[derive(Debug, thiserror::Error)]
pub enum ApiError {
    #[error(transparent)]
    Domain(#[from] LoanError),
    #[error(transparent)]
    Internal(#[from] InternalError),
}

pub type ApiResult<T> = std::result::Result<T, ApiError>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorEnvelope {
    pub error: ErrorBody,
}

impl ErrorEnvelope {
    pub fn new(code: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            error: ErrorBody {
                code: code.into(),
                message: message.into(),
            },
        }
    }
}

impl From<&ApiError> for ErrorEnvelope {
    fn from(e: &ApiError) -> Self {
        match e {
            ApiError::Domain(d) => ErrorEnvelope::new(d.code(), d.to_string()),
            ApiError::Internal(i) => ErrorEnvelope::new("internal", i.to_string()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScheduleRequest {
    pub loan: LoanSpec,
    #[serde(default)]
    pub index: Option<IndexModel>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScheduleResponse {
    pub schedule: Schedule,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub currency: Option<CurrencySchedule>,
    pub invariants: Invariants,
}

pub fn schedule(req: &ScheduleRequest) -> ApiResult<ScheduleResponse> {
    check_size(&req.loan, MAX_PERIODS)?;
    let schedule = solve_recurrence(&req.loan)?;
    let invariants = Invariants::of(&schedule.q, &schedule.a, schedule.final_debt());
    let currency = match &req.index {
        Some(model) => Some(indexed_schedule(&req.loan, model)?.currency),
        None => None,
    };
    Ok(ScheduleResponse {
        schedule,
        currency,
        invariants,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RotateRequest {
    pub loan: LoanSpec,
    pub rotation: RotationSpec,
    #[serde(default)]
    pub index: Option<IndexModel>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RotateResponse {
    /// Installments that were rotated (currency amounts for indexed loans).
    pub q: Vec<f64>,
    pub rotated: RotatedSchedule,
    pub compensation: CompensationReport,
    pub invariants: Invariants,
}

pub fn rotate(req: &RotateRequest) -> ApiResult<RotateResponse> {
    check_size(&req.loan, MAX_PERIODS)?;
    if req.rotation.dim() != req.loan.periods {
        return Err(LoanError::DimensionMismatch {
            expected: req.loan.periods,
            actual: req.rotation.dim(),
        }
        .into());
    }
    let schedule = solve_recurrence(&req.loan)?;
    let (d, a, y, q, d_m) = match &req.index {
        None => (schedule.d[1..].to_vec(), schedule.a.clone(), schedule.y.clone(), schedule.q.clone(), schedule.final_debt()),
        Some(model) => {
            let CurrencySchedule { d, a, y, q, .. } = indexed_schedule(&req.loan, model)?.currency;
            let d_m = d[d.len() - 1];
            (d[1..].to_vec(), a, y, q, d_m)
        }
    };
    let rotated = rotate_diagonals(&req.rotation, &d, &a, &y, &q)?;
    let invariants = Invariants::of(&q, &a, d_m)
        .with_rotation(&rotated.q_bar, &rotated.a_bar)
        .ensure_preserved()?;
    let compensation = compensation_report(&q, &req.rotation)?;
    Ok(RotateResponse {
        q,
        rotated,
        compensation,
        invariants,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DesignRequest {
    pub loan: LoanSpec,
    #[serde(default)]
    pub index: Option<IndexModel>,
    pub objective: Objective,
    #[serde(default)]
    pub constraints: Vec<LinearConstraint>,
    #[serde(default)]
    pub planes: Option<Vec<(usize, usize)>>,
    #[serde(default)]
    pub config: DesignConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DesignResponse {
    pub q: Vec<f64>,
    pub solution: DesignSolution,
    pub invariants: Invariants,
}

pub fn design(req: &DesignRequest) -> ApiResult<DesignResponse> {
    check_size(&req.loan, MAX_DESIGN_PERIODS)?;
    let schedule = solve_recurrence(&req.loan)?;
    let (q, a, d_m) = match &req.index {
        None => (schedule.q.clone(), schedule.a.clone(), schedule.final_debt()),
        Some(model) => {
            let c = indexed_schedule(&req.loan, model)?.currency;
            let d_m = c.d[c.d.len() - 1];
            (c.q, c.a, d_m)
        }
    };
    let problem = DesignProblem {
        installments: q.clone(),
        objective: req.objective.clone(),
        constraints: req.constraints.clone(),
        planes: req.planes.clone(),
    };
    let solution = if problem.objective == Objective::Equalize && problem.constraints.is_empty() && problem.planes.is_none() {
        equalize_installments(&q, &req.config)?
    } else {
        solve_design(&problem, &req.config)?
    };
    let a_bar = rotated_diagonal(solution.rotation()?.matrix(), &a);
    let invariants = Invariants::of(&q, &a, d_m)
        .with_rotation(&solution.q_bar, &a_bar)
        .ensure_preserved()?;
    Ok(DesignResponse { q, solution, invariants })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyAlgebraRequest {
    pub loan: LoanSpec,
    /// Absolute residual bound; defaults to `1e-10 max(d0, 1)`.
    #[serde(default)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyAlgebraResponse {
    pub all_pass: bool,
    pub max_residual: f64,
    pub tolerance: f64,
    pub relations: AlgebraReport,
}

pub fn verify_algebra(req: &VerifyAlgebraRequest) -> ApiResult<VerifyAlgebraResponse> {
    check_size(&req.loan, MAX_PERIODS)?;
    let tolerance = req.tolerance.unwrap_or(1e-10 * req.loan.d0.max(1.0));
    if !(tolerance.is_finite() && tolerance > 0.0) {
        return Err(LoanError::InvalidSpec("tolerance must be positive".into()).into());
    }
    let schedule = solve_recurrence(&req.loan)?;
    let ops = build_operators(&schedule, &req.loan.rate)?;
    let relations = check_algebra(&ops, tolerance);
    Ok(VerifyAlgebraResponse {
        all_pass: relations.all_pass(),
        max_residual: relations.max_residual(),
        tolerance,
        relations,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionResponse {
    pub z: f64,
    pub inflation: f64,
    pub pattern: String,
    pub q: Vec<f64>,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// `feasible[ix][iy]` as 0/1.
    pub feasible: Vec<Vec<u8>>,
    pub count: usize,
}

impl From<RegionGrid> for RegionResponse {
    fn from(g: RegionGrid) -> Self {
        Self {
            count: g.count(),
            feasible: g.feasible.iter().map(|row| row.iter().map(|&f| f as u8).collect()).collect(),
            z: g.z,
            inflation: g.inflation,
            pattern: g.pattern,
            q: g.q,
            xs: g.xs,
            ys: g.ys,
        }
    }
}

pub fn region_grid(params: &RegionParams) -> ApiResult<RegionGrid> {
    if params.grid_n > MAX_GRID {
        return Err(LoanError::InvalidSpec(format!("grid_n = {} exceeds the limit of {MAX_GRID}", params.grid_n)).into());
    }
    Ok(sign_pattern_region(params)?)
}

pub fn region(params: &RegionParams) -> ApiResult<RegionResponse> {
    region_grid(params).map(RegionResponse::from)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invariant_summary() {
        let inv = Invariants::of(&[70.0, 60.0], &[50.0, 50.0], 0.0).with_rotation(&[65.0, 65.0], &[50.0, 50.0]);
        assert_eq!(inv.trace_q_preserved, Some(true));
        let broken = Invariants::of(&[70.0, 60.0], &[50.0, 50.0], 0.0).with_rotation(&[65.0, 66.0], &[50.0, 50.0]);
        assert!(broken.ensure_preserved().is_err());
        let json = serde_json::to_value(&inv).unwrap();
        assert_eq!(json["d_M"], 0.0);
        assert_eq!(json["trace_q_preserved"], true);
    }

    #[test]
    fn size_limits() {
        let req = VerifyAlgebraRequest {
            loan: LoanSpec::french(100.0, MAX_PERIODS + 1, 0.1),
            tolerance: None,
        };
        let err = verify_algebra(&req).unwrap_err();
        assert_eq!(ErrorEnvelope::from(&err).error.code, "invalid_spec");
    }
}
