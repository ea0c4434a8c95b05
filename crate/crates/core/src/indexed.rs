//! Indexed (inflation-linked) loans.
//!
//! The contract is written in index units; period-`n` currency amounts are
//! index amounts times the index value `u_n`. The initial debt is converted
//! with `u_0`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{LoanError, Result};
use crate::loan::{solve_recurrence, AmortizationSystem, LoanSpec, RateModel, Schedule};
use crate::rotation::{rotated_diagonal, RotationSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexModel {
    /// `u_n = u0 exp(alpha n)`
    PowerLaw { u0: f64, alpha: f64 },
    /// `u_n = u0 + slope n`
    Linear { u0: f64, slope: f64 },
    /// `u_1 ..= u_M`, or `u_0 ..= u_M` when one value longer. Without an
    /// explicit `u_0` the initial debt converts at `u_1`.
    Explicit(Vec<f64>),
    /// `u_n = u1 a^(n-1)`, so `u_0 = u1 / a`.
    Geometric { a: f64, u1: f64 },
}

impl IndexModel {
    /// Index value at period `n >= 0`.
    pub fn value_at(&self, n: usize) -> f64 {
        match self {
            IndexModel::PowerLaw { u0, alpha } => u0 * (alpha * n as f64).exp(),
            IndexModel::Linear { u0, slope } => u0 + slope * n as f64,
            IndexModel::Explicit(values) => values[n.saturating_sub(1)],
            IndexModel::Geometric { a, u1 } => u1 * a.powi(n as i32 - 1),
        }
    }

    /// `u_0 ..= u_M`.
    pub fn series_with_base(&self, periods: usize) -> Result<Vec<f64>> {
        let values: Vec<f64> = match self {
            IndexModel::Explicit(v) if v.len() == periods + 1 => v.clone(),
            IndexModel::Explicit(v) if v.len() == periods => {
                std::iter::once(v[0]).chain(v.iter().copied()).collect()
            }
            IndexModel::Explicit(v) => {
                return Err(LoanError::InvalidModel(format!(
                    "explicit index has {} values, expected {periods} or {}",
                    v.len(),
                    periods + 1
                )))
            }
            _ => (0..=periods).map(|n| self.value_at(n)).collect(),
        };
        if let Some((n, u)) = values.iter().enumerate().find(|(_, u)| !(u.is_finite() && **u > 0.0)) {
            return Err(LoanError::InvalidModel(format!("index value u_{n} = {u} must be positive")));
        }
        Ok(values)
    }
}

/// `u_1 ..= u_M`.
pub fn index_series(model: &IndexModel, periods: usize) -> Result<Vec<f64>> {
    Ok(model.series_with_base(periods)?[1..].to_vec())
}

/// Currency rates `t_{n-1} = (1+t) u_n / u_{n-1} - 1` from `u_0 ..= u_M`;
/// returns one rate per period.
pub fn effective_rates(u: &[f64], t: f64) -> Result<Vec<f64>> {
    if u.len() < 2 {
        return Err(LoanError::InvalidModel("need u_0 and at least one period".into()));
    }
    if u.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(LoanError::InvalidModel("index values must be positive".into()));
    }
    Ok(u.windows(2).map(|w| (1.0 + t) * w[1] / w[0] - 1.0).collect())
}

/// Schedule quantities converted to currency period by period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurrencySchedule {
    /// `u_0 ..= u_M`
    pub u: Vec<f64>,
    /// `u_n d_n`, `n = 0..=M`
    pub d: Vec<f64>,
    pub a: Vec<f64>,
    pub y: Vec<f64>,
    pub q: Vec<f64>,
}

impl CurrencySchedule {
    fn from_index_units(schedule: &Schedule, u: Vec<f64>) -> Self {
        let scale = |v: &[f64]| v.iter().zip(&u[1..]).map(|(x, un)| x * un).collect::<Vec<_>>();
        Self {
            d: schedule.d.iter().zip(&u).map(|(x, un)| x * un).collect(),
            a: scale(&schedule.a),
            y: scale(&schedule.y),
            q: scale(&schedule.q),
            u,
        }
    }

    pub fn periods(&self) -> usize {
        self.q.len()
    }

    /// `max_n |d_n - ((1+t_n)(u_n/u_{n-1}) d_{n-1} - q_n)|` for the
    /// index-unit rate model.
    pub fn recurrence_residual(&self, rate: &RateModel) -> f64 {
        (1..=self.periods())
            .map(|n| {
                let predicted = (1.0 + rate.rate_for_period(n)) * self.u[n] / self.u[n - 1] * self.d[n - 1]
                    - self.q[n - 1];
                (self.d[n] - predicted).abs()
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexedSchedule {
    pub index_units: Schedule,
    pub currency: CurrencySchedule,
}

/// Solves the loan in index units and converts each period to currency.
pub fn indexed_schedule(spec: &LoanSpec, model: &IndexModel) -> Result<IndexedSchedule> {
    let index_units = solve_recurrence(spec)?;
    let u = model.series_with_base(spec.periods)?;
    let currency = CurrencySchedule::from_index_units(&index_units, u);
    Ok(IndexedSchedule {
        index_units,
        currency,
    })
}

/// The indexed loan viewed as a currency loan: principal `u_0 d_0`,
/// installments `u_n q_n` and per-period effective rates. The result is an
/// ordinary [`Schedule`] whose debt equals `u_n d_n`; its amortization and
/// interest split includes the revaluation of the principal.
pub fn effective_currency_loan(spec: &LoanSpec, model: &IndexModel) -> Result<(LoanSpec, Schedule)> {
    let indexed = indexed_schedule(spec, model)?;
    let u = &indexed.currency.u;
    let rates = (1..=spec.periods)
        .map(|n| (1.0 + spec.rate.rate_for_period(n)) * u[n] / u[n - 1] - 1.0)
        .collect();
    let currency_spec = LoanSpec::new(
        u[0] * spec.d0,
        spec.periods,
        RateModel::PerPeriod(rates),
        AmortizationSystem::FixedInstallments(indexed.currency.q.clone()),
    );
    let schedule = solve_recurrence(&currency_spec)?;
    Ok((currency_spec, schedule))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DebtPeak {
    pub period: usize,
    pub value: f64,
}

/// Discrete argmax of the debt series `d_0 ..= d_M`; ties go to the
/// smallest period. `None` when the maximum is the initial debt.
pub fn debt_peak(debt: &[f64]) -> Option<DebtPeak> {
    let (period, &value) = debt
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, &f64)>, (n, v)| match best {
            Some((_, b)) if *v <= *b => best,
            _ => Some((n, v)),
        })?;
    (period > 0).then_some(DebtPeak { period, value })
}

/// Signs of `d_n - d_{n-1}`: `1`, `-1` or `0`.
pub fn first_difference_signs(debt: &[f64]) -> Vec<i8> {
    debt.windows(2)
        .map(|w| match (w[1] - w[0]).partial_cmp(&0.0) {
            Some(std::cmp::Ordering::Greater) => 1,
            Some(std::cmp::Ordering::Less) => -1,
            _ => 0,
        })
        .collect()
}

/// Rotated currency installments: the installment operator
/// `diag(u_n q_n)` rotated by `rotation`. `index_installments` are the
/// index-unit installments `q_1 ..= q_M`.
pub fn rotated_indexed_installments(
    u: &[f64],
    index_installments: &[f64],
    rotation: &RotationSpec,
) -> Result<Vec<f64>> {
    for len in [u.len(), index_installments.len()] {
        if len != rotation.dim() {
            return Err(LoanError::DimensionMismatch {
                expected: rotation.dim(),
                actual: len,
            });
        }
    }
    let currency: Vec<f64> = u.iter().zip(index_installments).map(|(a, b)| a * b).collect();
    Ok(rotated_diagonal(rotation.matrix(), &currency))
}

type JointDensity = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type Marginal = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum DensityKind {
    Joint { dims: usize, pdf: JointDensity },
    Product(Vec<Marginal>),
}

/// Probability density over the unknown future index values
/// `u_2 ..= u_M`, supported on `[0, u_max]` per coordinate.
#[derive(Clone)]
pub struct InflationDensity {
    u_max: f64,
    resolution: usize,
    kind: DensityKind,
}

impl std::fmt::Debug for InflationDensity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("InflationDensity")
            .field("dims", &self.dims())
            .field("u_max", &self.u_max)
            .field("resolution", &self.resolution)
            .finish()
    }
}

/// Sum in a fixed binary-tree order.
fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n => pairwise_sum(&values[..n / 2]) + pairwise_sum(&values[n / 2..]),
    }
}

fn midpoints(u_max: f64, n: usize) -> (Vec<f64>, f64) {
    let h = u_max / n as f64;
    ((0..n).map(|k| (k as f64 + 0.5) * h).collect(), h)
}

impl InflationDensity {
    /// Joint density over `dims` coordinates.
    pub fn joint<F>(dims: usize, u_max: f64, resolution: usize, pdf: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self::checked(u_max, resolution, DensityKind::Joint { dims, pdf: Arc::new(pdf) })
    }

    /// Independent coordinates with the given marginal densities.
    pub fn product(u_max: f64, resolution: usize, marginals: Vec<Marginal>) -> Result<Self> {
        Self::checked(u_max, resolution, DensityKind::Product(marginals))
    }

    pub fn uniform(dims: usize, u_max: f64, resolution: usize) -> Result<Self> {
        let height = u_max.powi(-(dims as i32));
        Self::joint(dims, u_max, resolution, move |_| height)
    }

    fn checked(u_max: f64, resolution: usize, kind: DensityKind) -> Result<Self> {
        if !(u_max.is_finite() && u_max > 0.0) || resolution == 0 {
            return Err(LoanError::InvalidModel("density needs u_max > 0 and resolution >= 1".into()));
        }
        let density = Self {
            u_max,
            resolution,
            kind,
        };
        if density.dims() == 0 {
            return Err(LoanError::InvalidModel("density needs at least one coordinate".into()));
        }
        let mass = density.mass(resolution);
        if (mass - 1.0).abs() > 1e-6 {
            return Err(LoanError::NonNormalizedDensity(mass));
        }
        Ok(density)
    }

    pub fn dims(&self) -> usize {
        match &self.kind {
            DensityKind::Joint { dims, .. } => *dims,
            DensityKind::Product(m) => m.len(),
        }
    }

    pub fn u_max(&self) -> f64 {
        self.u_max
    }

    /// Total probability at grid resolution `n`.
    pub fn mass(&self, n: usize) -> f64 {
        match &self.kind {
            DensityKind::Joint { dims, pdf } => self.joint_integral(*dims, pdf, n, |_| 1.0),
            DensityKind::Product(marginals) => marginals
                .iter()
                .map(|p| {
                    let (xs, h) = midpoints(self.u_max, n);
                    h * pairwise_sum(&xs.iter().map(|&x| p(x)).collect::<Vec<_>>())
                })
                .product(),
        }
    }

    /// `E[g(u)]` over a tensor midpoint grid with `n` cells per axis.
    fn joint_integral<G>(&self, dims: usize, pdf: &JointDensity, n: usize, g: G) -> f64
    where
        G: Fn(&[f64]) -> f64,
    {
        let (xs, h) = midpoints(self.u_max, n);
        let cells = n.pow(dims as u32);
        let mut point = vec![0.0; dims];
        let terms: Vec<f64> = (0..cells)
            .map(|mut idx| {
                for coord in point.iter_mut() {
                    *coord = xs[idx % n];
                    idx /= n;
                }
                pdf(&point) * g(&point)
            })
            .collect();
        pairwise_sum(&terms) * h.powi(dims as i32)
    }

    /// `E[u_k]` for every coordinate at resolution `n`.
    fn coordinate_means(&self, n: usize) -> Vec<f64> {
        match &self.kind {
            DensityKind::Joint { dims, pdf } => (0..*dims)
                .map(|k| self.joint_integral(*dims, pdf, n, |u| u[k]))
                .collect(),
            DensityKind::Product(marginals) => marginals
                .iter()
                .map(|p| {
                    let (xs, h) = midpoints(self.u_max, n);
                    h * pairwise_sum(&xs.iter().map(|&x| x * p(x)).collect::<Vec<_>>())
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedInstallments {
    /// Richardson-extrapolated `<Qbar_i>`.
    pub mean: Vec<f64>,
    /// `|I(2n) - I(n)|` per period.
    pub error_estimate: Vec<f64>,
    pub coarse: Vec<f64>,
    pub fine: Vec<f64>,
}

/// Expected rotated currency installments when `u_1` is known and the later
/// index values follow `density`.
///
/// The integrand `qbar_i(u) = sum_j W_ij q_j u_j` is integrated on tensor
/// midpoint grids at the density's resolution and at twice it; the report
/// carries both, their Richardson combination and the difference as an
/// error estimate. Product densities are integrated one coordinate at a
/// time.
pub fn expected_rotated_installments(
    density: &InflationDensity,
    u1: f64,
    index_installments: &[f64],
    rotation: &RotationSpec,
) -> Result<ExpectedInstallments> {
    let m = rotation.dim();
    if index_installments.len() != m {
        return Err(LoanError::DimensionMismatch {
            expected: m,
            actual: index_installments.len(),
        });
    }
    if density.dims() + 1 != m {
        return Err(LoanError::DimensionMismatch {
            expected: m - 1,
            actual: density.dims(),
        });
    }
    let weights = rotation.weights();
    let at_resolution = |n: usize| -> Vec<f64> {
        let mass = density.mass(n);
        let means = density.coordinate_means(n);
        (0..m)
            .map(|i| {
                weights[(i, 0)] * index_installments[0] * u1 * mass
                    + (1..m)
                        .map(|j| weights[(i, j)] * index_installments[j] * means[j - 1])
                        .sum::<f64>()
            })
            .collect()
    };
    let coarse = at_resolution(density.resolution);
    let fine = at_resolution(2 * density.resolution);
    let mean = coarse.iter().zip(&fine).map(|(c, f)| (4.0 * f - c) / 3.0).collect();
    let error_estimate = coarse.iter().zip(&fine).map(|(c, f)| (f - c).abs()).collect();
    Ok(ExpectedInstallments {
        mean,
        error_estimate,
        coarse,
        fine,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub model: IndexModel,
    /// Sum of squared residuals in index units.
    pub sse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexFit {
    pub power_law: FittedModel,
    pub linear: FittedModel,
}

impl IndexFit {
    /// The fit with the smaller residual sum; power law on ties.
    pub fn best(&self) -> &FittedModel {
        if self.linear.sse < self.power_law.sse {
            &self.linear
        } else {
            &self.power_law
        }
    }
}

/// Ordinary least squares `y = intercept + slope x`.
fn ols(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (mean_y - slope * mean_x, slope)
}

/// Fits a power law (regression on `ln u`) and a straight line to
/// `(n, u_n)` observations.
pub fn fit_index(observations: &[(f64, f64)]) -> Result<IndexFit> {
    if observations.len() < 3 {
        return Err(LoanError::InsufficientData {
            needed: 3,
            got: observations.len(),
        });
    }
    if let Some((n, u)) = observations.iter().find(|(n, u)| !(n.is_finite() && u.is_finite() && *u > 0.0)) {
        return Err(LoanError::InvalidModel(format!("observation ({n}, {u}) needs finite n and u > 0")));
    }
    let xs: Vec<f64> = observations.iter().map(|o| o.0).collect();
    let us: Vec<f64> = observations.iter().map(|o| o.1).collect();
    let logs: Vec<f64> = us.iter().map(|u| u.ln()).collect();

    let (log_u0, alpha) = ols(&xs, &logs);
    let u0 = log_u0.exp();
    let power_sse = xs.iter().zip(&us).map(|(x, u)| (u - u0 * (alpha * x).exp()).powi(2)).sum();

    let (lin_u0, slope) = ols(&xs, &us);
    let linear_sse = xs.iter().zip(&us).map(|(x, u)| (u - lin_u0 - slope * x).powi(2)).sum();

    Ok(IndexFit {
        power_law: FittedModel {
            model: IndexModel::PowerLaw { u0, alpha },
            sse: power_sse,
        },
        linear: FittedModel {
            model: IndexModel::Linear { u0: lin_u0, slope },
            sse: linear_sse,
        },
    })
}

/// Reads `n,u` CSV observations (header required).
pub fn read_observations<R: std::io::Read>(reader: R) -> Result<Vec<(f64, f64)>> {
    #[derive(Deserialize)]
    struct Row {
        n: f64,
        u: f64,
    }
    csv::Reader::from_reader(reader)
        .deserialize::<Row>()
        .map(|row| row.map(|r| (r.n, r.u)).map_err(|e| LoanError::Parse(e.to_string())))
        .collect()
}
