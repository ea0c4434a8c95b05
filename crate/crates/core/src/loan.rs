//! Classical loan engine.
//!
//! A loan is the coupled recurrence
//!
//! ```text
//! q_n = a_n + y_n,    d_n = d_{n-1} - a_n,    y_n = t_{n-1} d_{n-1}
//! ```
//!
//! with boundary conditions `d_0` (the principal) and `d_M = 0`. Debt is
//! indexed `0..=M`; amortization, interest and installments are indexed
//! `1..=M` and stored zero-based (`a[0]` is `a_1`).

use serde::{Deserialize, Serialize};

use crate::error::{LoanError, Result};

/// Relative tolerance on `|d_M|` for user-supplied sequences.
pub const TERMINATION_TOL: f64 = 1e-9;
/// Relative tolerance on `|sum(a) - d_0|`.
pub const AMORTIZATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateModel {
    Constant(f64),
    /// One rate per period; entry `n - 1` is charged on `d_{n-1}`.
    PerPeriod(Vec<f64>),
}

impl RateModel {
    /// Rate charged in period `n` (1-based) on the debt `d_{n-1}`.
    pub fn rate_for_period(&self, n: usize) -> f64 {
        match self {
            RateModel::Constant(t) => *t,
            RateModel::PerPeriod(rates) => rates[n - 1],
        }
    }

    pub fn constant(&self) -> Option<f64> {
        match self {
            RateModel::Constant(t) => Some(*t),
            RateModel::PerPeriod(_) => None,
        }
    }

    fn validate(&self, periods: usize) -> Result<()> {
        let check = |t: f64| {
            if !t.is_finite() || t <= -1.0 {
                Err(LoanError::InvalidSpec(format!("rate {t} must be finite and > -1")))
            } else {
                Ok(())
            }
        };
        match self {
            RateModel::Constant(t) => check(*t),
            RateModel::PerPeriod(rates) => {
                if rates.len() != periods {
                    return Err(LoanError::InvalidSpec(format!(
                        "per-period rates have length {}, expected {periods}",
                        rates.len()
                    )));
                }
                rates.iter().try_for_each(|&t| check(t))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmortizationSystem {
    /// Constant installment.
    French,
    /// Constant amortization `d_0 / M`.
    German,
    FixedInstallments(Vec<f64>),
    FixedAmortizations(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoanSpec {
    pub d0: f64,
    #[serde(rename = "M")]
    pub periods: usize,
    pub rate: RateModel,
    pub system: AmortizationSystem,
}

impl LoanSpec {
    pub fn new(d0: f64, periods: usize, rate: RateModel, system: AmortizationSystem) -> Self {
        Self {
            d0,
            periods,
            rate,
            system,
        }
    }

    pub fn french(d0: f64, periods: usize, t: f64) -> Self {
        Self::new(d0, periods, RateModel::Constant(t), AmortizationSystem::French)
    }

    pub fn german(d0: f64, periods: usize, t: f64) -> Self {
        Self::new(d0, periods, RateModel::Constant(t), AmortizationSystem::German)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.d0.is_finite() || self.d0 <= 0.0 {
            return Err(LoanError::InvalidSpec(format!("d0 = {} must be > 0", self.d0)));
        }
        if self.periods == 0 {
            return Err(LoanError::InvalidSpec("M must be at least 1".into()));
        }
        self.rate.validate(self.periods)?;
        match &self.system {
            AmortizationSystem::FixedInstallments(v) | AmortizationSystem::FixedAmortizations(v) => {
                if v.len() != self.periods {
                    return Err(LoanError::InvalidSpec(format!(
                        "sequence has length {}, expected {}",
                        v.len(),
                        self.periods
                    )));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(LoanError::InvalidSpec("sequence contains non-finite values".into()));
                }
            }
            AmortizationSystem::French | AmortizationSystem::German => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    /// `d_0 ..= d_M`
    pub d: Vec<f64>,
    /// `a_1 ..= a_M`
    pub a: Vec<f64>,
    /// `y_1 ..= y_M`
    pub y: Vec<f64>,
    /// `q_1 ..= q_M`
    pub q: Vec<f64>,
    pub total_paid: f64,
    pub total_amortized: f64,
}

impl Schedule {
    fn from_parts(d: Vec<f64>, a: Vec<f64>, y: Vec<f64>, q: Vec<f64>) -> Self {
        let total_paid = q.iter().sum();
        let total_amortized = a.iter().sum();
        Self {
            d,
            a,
            y,
            q,
            total_paid,
            total_amortized,
        }
    }

    pub fn periods(&self) -> usize {
        self.q.len()
    }

    pub fn d0(&self) -> f64 {
        self.d[0]
    }

    /// Residual debt `d_M`.
    pub fn final_debt(&self) -> f64 {
        self.d[self.periods()]
    }

    /// Checks `q = a + y`, the debt recurrence, `sum(a) = d_0` and `d_M = 0`
    /// at the crate tolerances.
    pub fn check_invariants(&self) -> Result<()> {
        let m = self.periods();
        if m == 0 || self.d.len() != m + 1 || self.a.len() != m || self.y.len() != m {
            return Err(LoanError::InvalidSchedule("inconsistent sequence lengths".into()));
        }
        let scale = self.d0().abs().max(f64::MIN_POSITIVE);
        for n in 1..=m {
            if (self.q[n - 1] - self.a[n - 1] - self.y[n - 1]).abs() > 1e-12 * scale {
                return Err(LoanError::InvalidSchedule(format!("q != a + y at period {n}")));
            }
            if (self.d[n - 1] - self.a[n - 1] - self.d[n]).abs() > TERMINATION_TOL * scale {
                return Err(LoanError::InvalidSchedule(format!("d_n != d_(n-1) - a_n at period {n}")));
            }
        }
        let amortized: f64 = self.a.iter().sum();
        if (amortized - self.d0()).abs() > AMORTIZATION_TOL * scale {
            return Err(LoanError::InvalidSchedule(format!(
                "sum of amortizations {amortized} != d0 {}",
                self.d0()
            )));
        }
        if self.final_debt().abs() > TERMINATION_TOL * scale {
            return Err(LoanError::InvalidSchedule(format!(
                "final debt {} is not zero",
                self.final_debt()
            )));
        }
        Ok(())
    }
}

/// Constant French installment `d_0 t (1+t)^M / ((1+t)^M - 1)`, with the
/// `t -> 0` limit `d_0 / M`.
pub fn french_installment(d0: f64, t: f64, periods: usize) -> Result<f64> {
    if !t.is_finite() || t <= -1.0 {
        return Err(LoanError::InvalidSpec(format!("rate {t} must be > -1")));
    }
    if periods == 0 {
        return Err(LoanError::InvalidSpec("M must be at least 1".into()));
    }
    let m = periods as f64;
    // Below this |t| the closed form loses more digits than the series.
    if t.abs() < 1e-9 {
        return Ok(d0 / m * (1.0 + t * (m + 1.0) / 2.0));
    }
    // (1+t)^M - 1 via expm1/ln_1p keeps precision for small t.
    let growth_minus_one = (m * t.ln_1p()).exp_m1();
    Ok(d0 * t * (growth_minus_one + 1.0) / growth_minus_one)
}

/// Constant installment that extinguishes the debt for arbitrary
/// per-period rates: `d_0 / sum_n prod_{k<=n} (1+t_k)^-1`.
fn annuity_installment(d0: f64, rate: &RateModel, periods: usize) -> Result<f64> {
    if let Some(t) = rate.constant() {
        return french_installment(d0, t, periods);
    }
    let mut discount = 1.0;
    let mut annuity = 0.0;
    for n in 1..=periods {
        discount /= 1.0 + rate.rate_for_period(n);
        annuity += discount;
    }
    Ok(d0 / annuity)
}

fn simulate_installments(spec: &LoanSpec, q: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let m = spec.periods;
    let mut d = Vec::with_capacity(m + 1);
    let mut a = Vec::with_capacity(m);
    let mut y = Vec::with_capacity(m);
    d.push(spec.d0);
    for n in 1..=m {
        let prev = d[n - 1];
        let interest = spec.rate.rate_for_period(n) * prev;
        let amort = q[n - 1] - interest;
        y.push(interest);
        a.push(amort);
        d.push(prev - amort);
    }
    (d, a, y)
}

/// Runs `d_{n-1} = (d_n + q) / (1 + t_n)` down from `d_M = 0`. Forward
/// iteration multiplies rounding errors by `prod (1 + t_n)`, which is
/// astronomically large for long loans at high rates; the backward
/// direction contracts them instead.
fn backward_annuity(spec: &LoanSpec, q: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let m = spec.periods;
    let mut d = vec![0.0; m + 1];
    for n in (2..=m).rev() {
        d[n - 1] = (d[n] + q) / (1.0 + spec.rate.rate_for_period(n));
    }
    d[0] = spec.d0;
    let y: Vec<f64> = (1..=m).map(|n| spec.rate.rate_for_period(n) * d[n - 1]).collect();
    let a = y.iter().map(|yn| q - yn).collect();
    (d, a, y)
}

fn simulate_amortizations(spec: &LoanSpec, a: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let m = spec.periods;
    let mut d = Vec::with_capacity(m + 1);
    let mut y = Vec::with_capacity(m);
    let mut q = Vec::with_capacity(m);
    d.push(spec.d0);
    for n in 1..=m {
        let prev = d[n - 1];
        let interest = spec.rate.rate_for_period(n) * prev;
        y.push(interest);
        q.push(a[n - 1] + interest);
        d.push(prev - a[n - 1]);
    }
    (d, y, q)
}

/// Solves the loan recurrence step by step.
///
/// French and German systems derive their installment or amortization
/// sequence internally; the French debt is run backward from `d_M = 0`. User-supplied sequences are checked after the fact:
/// an installment sequence that leaves residual debt, or that drives the
/// debt negative before maturity, is rejected.
pub fn solve_recurrence(spec: &LoanSpec) -> Result<Schedule> {
    spec.validate()?;
    let m = spec.periods;
    let tol = TERMINATION_TOL * spec.d0;
    match &spec.system {
        AmortizationSystem::French => {
            let q = annuity_installment(spec.d0, &spec.rate, m)?;
            let (d, a, y) = backward_annuity(spec, q);
            Ok(Schedule::from_parts(d, a, y, vec![q; m]))
        }
        AmortizationSystem::FixedInstallments(q) => {
            let (d, a, y) = simulate_installments(spec, q);
            if let Some(n) = (1..m).find(|&n| d[n] < -tol) {
                return Err(LoanError::OverpaidLoan { period: n, debt: d[n] });
            }
            if d[m].abs() > tol {
                return Err(LoanError::NonTerminatingLoan {
                    residual: d[m],
                    periods: m,
                });
            }
            Ok(Schedule::from_parts(d, a, y, q.clone()))
        }
        AmortizationSystem::German => {
            let a = vec![spec.d0 / m as f64; m];
            let (d, y, q) = simulate_amortizations(spec, &a);
            Ok(Schedule::from_parts(d, a, y, q))
        }
        AmortizationSystem::FixedAmortizations(a) => {
            let (d, y, q) = simulate_amortizations(spec, a);
            if d[m].abs() > AMORTIZATION_TOL * spec.d0 {
                return Err(LoanError::NonTerminatingLoan {
                    residual: d[m],
                    periods: m,
                });
            }
            Ok(Schedule::from_parts(d, a.clone(), y, q))
        }
    }
}

fn constant_rate(spec: &LoanSpec) -> Result<f64> {
    spec.validate()?;
    spec.rate
        .constant()
        .ok_or_else(|| LoanError::InvalidSpec("closed forms need a constant rate".into()))
}

/// French schedule from the closed forms
/// `d_n = d_0 [(1+t)^M - (1+t)^n] / ((1+t)^M - 1)` and
/// `a_n = (1+t)^(n-1) (q - t d_0)`.
pub fn french_closed_forms(spec: &LoanSpec) -> Result<Schedule> {
    let t = constant_rate(spec)?;
    let m = spec.periods;
    let d0 = spec.d0;
    let q = french_installment(d0, t, m)?;
    let mf = m as f64;
    let debt = |n: usize| -> f64 {
        if n == 0 {
            return d0;
        }
        if t.abs() < 1e-9 {
            return d0 * (1.0 - n as f64 / mf);
        }
        let lg = t.ln_1p();
        // [(1+t)^M - (1+t)^n] / ((1+t)^M - 1), written with expm1 for small t
        d0 * ((mf * lg).exp_m1() - (n as f64 * lg).exp_m1()) / (mf * lg).exp_m1()
    };
    let d: Vec<f64> = (0..=m).map(debt).collect();
    // q - t d_0 = d_0 t / ((1+t)^M - 1), without the cancellation
    let a: Vec<f64> = (1..=m)
        .map(|n| {
            if t.abs() < 1e-9 {
                q - t * d0
            } else {
                let lg = t.ln_1p();
                d0 * t * ((n as f64 - 1.0) * lg).exp() / (mf * lg).exp_m1()
            }
        })
        .collect();
    let y: Vec<f64> = (1..=m).map(|n| t * d[n - 1]).collect();
    Ok(Schedule::from_parts(d, a, y, vec![q; m]))
}

/// German schedule from `d_n = d_0 (1 - n/M)`, `y_n = t d_0 (1 - (n-1)/M)`
/// and `q_n = d_0/M + t (d_0/M)(M - n + 1)`.
pub fn german_closed_forms(spec: &LoanSpec) -> Result<Schedule> {
    let t = constant_rate(spec)?;
    let m = spec.periods;
    let mf = m as f64;
    let d0 = spec.d0;
    let d = (0..=m).map(|n| d0 * (1.0 - n as f64 / mf)).collect();
    let a = vec![d0 / mf; m];
    let y = (1..=m).map(|n| t * d0 * (1.0 - (n as f64 - 1.0) / mf)).collect();
    let q = (1..=m)
        .map(|n| d0 / mf + t * (d0 / mf) * (mf - n as f64 + 1.0))
        .collect();
    Ok(Schedule::from_parts(d, a, y, q))
}

/// `(sum q_n, sum a_n)`.
pub fn totals(schedule: &Schedule) -> (f64, f64) {
    (schedule.total_paid, schedule.total_amortized)
}

/// Closed-form total paid under the French system, `M q`.
pub fn french_total(d0: f64, t: f64, periods: usize) -> Result<f64> {
    Ok(periods as f64 * french_installment(d0, t, periods)?)
}

/// Closed-form total paid under the German system, `(d_0/2)(2 + t(1+M))`.
pub fn german_total(d0: f64, t: f64, periods: usize) -> f64 {
    d0 / 2.0 * (2.0 + t * (1.0 + periods as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    /// `q / d_0`; debt grows from the first period when `t` exceeds it.
    pub threshold_rate: f64,
    pub rate: f64,
    pub installment: f64,
    pub debt_grows: bool,
    /// `d_0, d_1, d_2, d_3` under the constant installment.
    pub first_steps: Vec<f64>,
}

/// Diagnostic for a constant installment `q` at constant rate `t`: the
/// debt `d_n = (1+t)^n (d_0 - q/t) + q/t` increases when `t > q / d_0`.
pub fn installment_monotonicity(d0: f64, q: f64, t: f64) -> MonotonicityReport {
    let mut first_steps = vec![d0];
    for _ in 0..3 {
        let prev = *first_steps.last().expect("non-empty");
        first_steps.push((1.0 + t) * prev - q);
    }
    MonotonicityReport {
        threshold_rate: q / d0,
        rate: t,
        installment: q,
        debt_grows: t > q / d0,
        first_steps,
    }
}

/// Runs [`installment_monotonicity`] for a constant-rate loan whose
/// installment is constant (French, or a constant fixed sequence).
pub fn debt_monotonicity_check(spec: &LoanSpec) -> Result<MonotonicityReport> {
    let t = constant_rate(spec)?;
    let q = match &spec.system {
        AmortizationSystem::French => french_installment(spec.d0, t, spec.periods)?,
        AmortizationSystem::FixedInstallments(q) if q.windows(2).all(|w| w[0] == w[1]) => q[0],
        _ => {
            return Err(LoanError::InvalidSpec(
                "monotonicity check needs a constant installment".into(),
            ))
        }
    };
    Ok(installment_monotonicity(spec.d0, q, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // Independent oracle: plain forward iteration of d_n = (1+t) d_{n-1} - q.
    fn iterate_debt(d0: f64, t: f64, q: f64, steps: usize) -> Vec<f64> {
        let mut out = vec![d0];
        for _ in 0..steps {
            let prev = *out.last().unwrap();
            out.push((1.0 + t) * prev - q);
        }
        out
    }

    #[test]
    fn french_installment_reference_values() {
        let q = french_installment(100.0, 0.2, 10).unwrap();
        assert_relative_eq!(q, 23.852275688285914, max_relative = 1e-13);
        let debt = iterate_debt(100.0, 0.2, q, 10);
        assert!(debt[10].abs() < 1e-9 * 100.0);

        assert_eq!(french_installment(100.0, 0.0, 4).unwrap(), 25.0);
        assert_relative_eq!(french_installment(100.0, 0.2, 2).unwrap(), 65.45454545454545, max_relative = 1e-14);
        assert!(matches!(french_installment(100.0, -1.0, 4), Err(LoanError::InvalidSpec(_))));
    }

    #[test]
    fn french_installment_is_continuous_at_zero_rate() {
        let at_zero = french_installment(100.0, 0.0, 12).unwrap();
        for t in [1e-12, 1e-10, 1e-8, 1e-7] {
            let q = french_installment(100.0, t, 12).unwrap();
            assert!((q - at_zero).abs() < 1e-5, "t={t}: {q}");
        }
        // both branches near the switch agree with the annuity sum
        for t in [9.9e-10f64, 1.01e-9] {
            let annuity: f64 = (1..=12).map(|n| (1.0 + t).powi(-n)).sum();
            assert_relative_eq!(french_installment(100.0, t, 12).unwrap(), 100.0 / annuity, max_relative = 1e-14);
        }
    }

    #[test]
    fn french_recurrence_example() {
        let s = solve_recurrence(&LoanSpec::french(100.0, 10, 0.2)).unwrap();
        for q in &s.q {
            assert_relative_eq!(*q, 23.852275688285914, max_relative = 1e-13);
        }
        assert!(s.final_debt().abs() < 1e-9 * 100.0);
        assert_relative_eq!(s.d[1], 96.14772431171409, max_relative = 1e-13);
        s.check_invariants().unwrap();
    }

    #[test]
    fn german_two_period_example() {
        let s = solve_recurrence(&LoanSpec::german(100.0, 2, 0.2)).unwrap();
        assert_relative_eq!(s.q[0], 70.0, max_relative = 1e-15);
        assert_relative_eq!(s.q[1], 60.0, max_relative = 1e-15);
        assert_eq!(s.a, vec![50.0, 50.0]);
    }

    #[test]
    fn zero_interest_spreads_principal_evenly() {
        for system in [AmortizationSystem::French, AmortizationSystem::German] {
            let s = solve_recurrence(&LoanSpec::new(100.0, 8, RateModel::Constant(0.0), system)).unwrap();
            for q in &s.q {
                assert_relative_eq!(*q, 12.5, max_relative = 1e-14);
            }
            assert_relative_eq!(s.total_paid, 100.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn french_closed_form_boundaries() {
        let spec = LoanSpec::french(100.0, 10, 0.2);
        let s = french_closed_forms(&spec).unwrap();
        assert_eq!(s.d[0], 100.0);
        assert_eq!(s.d[10], 0.0);
        assert_relative_eq!(s.d[1], 96.14772431171409, max_relative = 1e-13);
        let r = solve_recurrence(&spec).unwrap();
        for n in 0..=10 {
            assert!((s.d[n] - r.d[n]).abs() < 1e-9 * 100.0);
        }
    }

    #[test]
    fn german_closed_form_values() {
        let s = german_closed_forms(&LoanSpec::german(100.0, 10, 0.2)).unwrap();
        assert_relative_eq!(s.q[0], 30.0, max_relative = 1e-15);
        assert_relative_eq!(s.q[9], 12.0, max_relative = 1e-14);
        let flat = german_closed_forms(&LoanSpec::german(100.0, 10, 0.0)).unwrap();
        assert!(flat.q.iter().all(|&q| q == 10.0));
    }

    #[test]
    fn totals_match_closed_forms() {
        let f = solve_recurrence(&LoanSpec::french(100.0, 10, 0.2)).unwrap();
        let g = solve_recurrence(&LoanSpec::german(100.0, 10, 0.2)).unwrap();
        assert_relative_eq!(totals(&f).0, 238.52275688285914, max_relative = 1e-13);
        assert_relative_eq!(totals(&g).0, 210.0, max_relative = 1e-14);
        assert_relative_eq!(german_total(100.0, 0.2, 10), 210.0, max_relative = 1e-15);
        assert_relative_eq!(totals(&f).1, 100.0, max_relative = 1e-12);
    }

    #[test]
    fn fixed_installments_must_terminate() {
        let spec = LoanSpec::new(
            100.0,
            3,
            RateModel::Constant(0.1),
            AmortizationSystem::FixedInstallments(vec![10.0, 10.0, 10.0]),
        );
        assert!(matches!(solve_recurrence(&spec), Err(LoanError::NonTerminatingLoan { .. })));

        let overpay = LoanSpec::new(
            100.0,
            3,
            RateModel::Constant(0.0),
            AmortizationSystem::FixedInstallments(vec![150.0, -25.0, -25.0]),
        );
        assert!(matches!(solve_recurrence(&overpay), Err(LoanError::OverpaidLoan { period: 1, .. })));

        let exact = LoanSpec::new(
            100.0,
            2,
            RateModel::Constant(0.2),
            AmortizationSystem::FixedInstallments(vec![70.0, 60.0]),
        );
        let s = solve_recurrence(&exact).unwrap();
        assert_relative_eq!(s.a[0], 50.0, max_relative = 1e-14);
    }

    #[test]
    fn fixed_amortizations_must_sum_to_principal() {
        let bad = LoanSpec::new(
            100.0,
            2,
            RateModel::Constant(0.1),
            AmortizationSystem::FixedAmortizations(vec![40.0, 50.0]),
        );
        assert!(matches!(solve_recurrence(&bad), Err(LoanError::NonTerminatingLoan { .. })));
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let cases = [
            LoanSpec::french(0.0, 2, 0.1),
            LoanSpec::french(100.0, 0, 0.1),
            LoanSpec::french(100.0, 2, -1.5),
            LoanSpec::new(100.0, 3, RateModel::PerPeriod(vec![0.1, 0.1]), AmortizationSystem::French),
            LoanSpec::new(100.0, 3, RateModel::Constant(0.1), AmortizationSystem::FixedInstallments(vec![1.0])),
        ];
        for spec in cases {
            assert!(matches!(solve_recurrence(&spec), Err(LoanError::InvalidSpec(_))), "{spec:?}");
        }
    }

    #[test]
    fn per_period_french_terminates() {
        let spec = LoanSpec::new(
            250.0,
            4,
            RateModel::PerPeriod(vec![0.05, 0.2, 0.01, 0.3]),
            AmortizationSystem::French,
        );
        let s = solve_recurrence(&spec).unwrap();
        s.check_invariants().unwrap();
        assert!(s.q.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn french_amortization_grows_geometrically() {
        let s = solve_recurrence(&LoanSpec::french(1000.0, 24, 0.03)).unwrap();
        for n in 1..24 {
            assert_relative_eq!(s.a[n], 1.03 * s.a[n - 1], max_relative = 1e-12);
        }
    }

    #[test]
    fn monotonicity_diagnostics() {
        let r = installment_monotonicity(100.0, 10.0, 0.2);
        assert!(r.debt_grows);
        assert!(r.first_steps.windows(2).all(|w| w[1] > w[0]));

        let french = debt_monotonicity_check(&LoanSpec::french(100.0, 10, 0.2)).unwrap();
        assert!(!french.debt_grows);

        let flat = installment_monotonicity(100.0, 5.0, 0.0);
        assert!(!flat.debt_grows);
    }

    #[test]
    fn spec_json_shape() {
        let spec: LoanSpec = serde_json::from_str(
            r#"{"d0": 100, "M": 2, "rate": {"constant": 0.2}, "system": "german"}"#,
        )
        .unwrap();
        assert_eq!(spec, LoanSpec::german(100.0, 2, 0.2));
        let fixed: LoanSpec = serde_json::from_str(
            r#"{"d0": 100, "M": 2, "rate": {"per_period": [0.1, 0.2]}, "system": {"fixed_installments": [60, 52]}}"#,
        )
        .unwrap();
        assert_eq!(
            fixed.system,
            AmortizationSystem::FixedInstallments(vec![60.0, 52.0])
        );
    }
}
