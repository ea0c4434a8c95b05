//! Finite-dimensional operator representation of a loan.
//!
//! Basis state `|n>` (1-based, `n = 1..=M`) is the period-`n` state. `D`, `A`,
//! `Y`, `Q` and the rate operator `T` are diagonal in this basis; the
//! lowering operator `a` has `N_{j+1}` on the superdiagonal and the raising
//! operator is its transpose, with `N_j^2 = sum_{i<j} a_i`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{LoanError, Result};
use crate::loan::{RateModel, Schedule};

#[derive(Debug, Clone, PartialEq)]
pub struct LoanOperators {
    pub dim: usize,
    pub d0: f64,
    pub debt: DMatrix<f64>,
    pub amortization: DMatrix<f64>,
    pub interest: DMatrix<f64>,
    pub installment: DMatrix<f64>,
    /// Diagonal `1 + t_n`; entry `n` is the growth factor applied to `d_n`.
    pub rate: DMatrix<f64>,
    /// `N_1 ..= N_M`, `N_1 = 0`.
    pub ladder_norms: Vec<f64>,
    pub lower: DMatrix<f64>,
    pub raise: DMatrix<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    Debt,
    Amortization,
    Interest,
    Installment,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderDirection {
    Lower,
    Raise,
}

/// Result of applying a ladder operator to a basis state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderStep {
    pub coefficient: f64,
    /// `None` when the state is annihilated.
    pub period: Option<usize>,
}

impl LoanOperators {
    pub fn observable(&self, which: Observable) -> &DMatrix<f64> {
        match which {
            Observable::Debt => &self.debt,
            Observable::Amortization => &self.amortization,
            Observable::Interest => &self.interest,
            Observable::Installment => &self.installment,
        }
    }

    /// `f(D) = (T - I) D`.
    pub fn interest_function(&self) -> DMatrix<f64> {
        (&self.rate - DMatrix::identity(self.dim, self.dim)) * &self.debt
    }

    /// Eigenvalues of `Q`, i.e. the installments.
    pub fn installments(&self) -> Vec<f64> {
        self.installment.diagonal().iter().copied().collect()
    }

    fn check_period(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.dim {
            Err(LoanError::IndexOutOfRange {
                index: n,
                max: self.dim,
            })
        } else {
            Ok(())
        }
    }
}

/// Builds the operators of a schedule. `rate` supplies `T`: basis state `n`
/// carries the rate charged on `d_n` in the next period. The last entry
/// multiplies `d_M = 0` and repeats the final period's rate.
pub fn build_operators(schedule: &Schedule, rate: &RateModel) -> Result<LoanOperators> {
    schedule.check_invariants()?;
    let m = schedule.periods();
    if let RateModel::PerPeriod(r) = rate {
        if r.len() != m {
            return Err(LoanError::DimensionMismatch {
                expected: m,
                actual: r.len(),
            });
        }
    }
    let d0 = schedule.d0();
    let scale = d0.abs();
    // Interest must follow y_n = t_{n-1} d_{n-1} for the supplied rates.
    for n in 1..=m {
        let expected = rate.rate_for_period(n) * schedule.d[n - 1];
        if (schedule.y[n - 1] - expected).abs() > 1e-9 * scale.max(1.0) {
            return Err(LoanError::InvalidSchedule(format!(
                "interest at period {n} does not match the rate model"
            )));
        }
    }

    let mut norms = Vec::with_capacity(m);
    let mut partial = 0.0;
    norms.push(0.0);
    for j in 2..=m {
        partial += schedule.a[j - 2];
        if partial < -1e-12 * scale {
            return Err(LoanError::InvalidSchedule(format!(
                "cumulative amortization before period {j} is negative; N_{j} is not real"
            )));
        }
        norms.push(partial.max(0.0).sqrt());
    }

    let diag = |values: &[f64]| DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(values));
    let rate_diag: Vec<f64> = (1..=m)
        .map(|k| 1.0 + rate.rate_for_period((k + 1).min(m)))
        .collect();
    let mut lower = DMatrix::zeros(m, m);
    for j in 1..m {
        lower[(j - 1, j)] = norms[j];
    }
    let raise = lower.transpose();

    Ok(LoanOperators {
        dim: m,
        d0,
        debt: diag(&schedule.d[1..]),
        amortization: diag(&schedule.a),
        interest: diag(&schedule.y),
        installment: diag(&schedule.q),
        rate: diag(&rate_diag),
        ladder_norms: norms,
        lower,
        raise,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationCheck {
    pub relation: String,
    pub residual: f64,
    pub pass: bool,
}

/// Per-relation max-abs residuals. Serializes as a bare JSON array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AlgebraReport {
    pub relations: Vec<RelationCheck>,
}

impl AlgebraReport {
    pub fn all_pass(&self) -> bool {
        self.relations.iter().all(|r| r.pass)
    }

    pub fn max_residual(&self) -> f64 {
        self.relations.iter().map(|r| r.residual).fold(0.0, f64::max)
    }

    pub fn get(&self, relation: &str) -> Option<&RelationCheck> {
        self.relations.iter().find(|r| r.relation == relation)
    }
}

fn commutator(x: &DMatrix<f64>, y: &DMatrix<f64>) -> DMatrix<f64> {
    x * y - y * x
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

fn jacobi(x: &DMatrix<f64>, y: &DMatrix<f64>, z: &DMatrix<f64>) -> DMatrix<f64> {
    commutator(x, &commutator(y, z)) + commutator(y, &commutator(z, x)) + commutator(z, &commutator(x, y))
}

/// Verifies the loan algebra as matrix identities. Both sides of each
/// relation are assembled independently; the report lists `max |lhs - rhs|`.
pub fn check_algebra(ops: &LoanOperators, tol: f64) -> AlgebraReport {
    let m = ops.dim;
    let d = &ops.debt;
    let a_op = &ops.amortization;
    let y = &ops.interest;
    let q = &ops.installment;
    let low = &ops.lower;
    let up = &ops.raise;
    let f = ops.interest_function();
    let mut projector = DMatrix::zeros(m, m);
    projector[(m - 1, m - 1)] = 1.0;
    let ladder_commutator = commutator(low, up);

    let mut relations: Vec<(&str, f64)> = vec![
        ("[D,A]=0", max_abs(&commutator(d, a_op))),
        ("[D,Y]=0", max_abs(&commutator(d, y))),
        ("[D,Q]=0", max_abs(&commutator(d, q))),
        ("aY=f(D)a", max_abs(&(low * y - &f * low))),
        ("Ya+=a+f(D)", max_abs(&(y * up - up * &f))),
        ("[D,a]=aA", max_abs(&(commutator(d, low) - low * a_op))),
        ("[a+,D]=Aa+", max_abs(&(commutator(up, d) - a_op * up))),
        ("Q=Y+A", max_abs(&(q - (y + a_op)))),
        (
            "[a,a+]=A-d0|M><M|",
            max_abs(&(&ladder_commutator - (a_op - projector * ops.d0))),
        ),
        ("Tr[a,a+]=0", ladder_commutator.trace().abs()),
    ];
    // [D,[a+,a]] + [a,[D,a+]] + [a+,[a,D]] and the A, Y variants, then the
    // same three with D replaced by Q.
    relations.push(("jacobi(D,a+,a)", max_abs(&jacobi(d, up, low))));
    relations.push(("jacobi(D,A,a)", max_abs(&jacobi(d, a_op, low))));
    relations.push(("jacobi(D,Y,a)", max_abs(&jacobi(d, y, low))));
    relations.push(("jacobi(Q,a+,a)", max_abs(&jacobi(q, up, low))));
    relations.push(("jacobi(Q,A,a)", max_abs(&jacobi(q, a_op, low))));
    relations.push(("jacobi(Q,Y,a)", max_abs(&jacobi(q, y, low))));
    relations.push((
        "[D,a]=aQ-f(D)a",
        max_abs(&(commutator(d, low) - (low * q - &f * low))),
    ));

    AlgebraReport {
        relations: relations
            .into_iter()
            .map(|(name, residual)| RelationCheck {
                relation: name.to_string(),
                residual,
                pass: residual <= tol,
            })
            .collect(),
    }
}

/// `<n|O|n>` for one of the diagonal loan observables.
pub fn mean_value(ops: &LoanOperators, which: Observable, n: usize) -> Result<f64> {
    ops.check_period(n)?;
    Ok(ops.observable(which)[(n - 1, n - 1)])
}

/// Applies `a` or `a+` to `|n>`, reading the coefficient from the matrix.
pub fn ladder_apply(ops: &LoanOperators, direction: LadderDirection, n: usize) -> Result<LadderStep> {
    ops.check_period(n)?;
    let col = n - 1;
    let (op, target) = match direction {
        LadderDirection::Lower => (&ops.lower, n.checked_sub(2)),
        LadderDirection::Raise => (&ops.raise, (n < ops.dim).then_some(n)),
    };
    Ok(match target {
        Some(row) if op[(row, col)] != 0.0 => LadderStep {
            coefficient: op[(row, col)],
            period: Some(row + 1),
        },
        _ => LadderStep {
            coefficient: 0.0,
            period: None,
        },
    })
}

/// Rebuilds `|n> = a+^(n-1) |1> / prod_{j=2..n} N_j` from the ground state
/// and returns `max_n |<n|D|n> - d_n|` together with the largest deviation
/// of the rebuilt vector from the unit basis vector.
pub fn state_reconstruction_check(ops: &LoanOperators) -> Result<(f64, f64)> {
    let m = ops.dim;
    if let Some(j) = (2..=m).find(|&j| ops.ladder_norms[j - 1] <= 0.0) {
        return Err(LoanError::DegenerateNormalization(j));
    }
    let mut state = nalgebra::DVector::zeros(m);
    state[0] = 1.0;
    let mut debt_residual: f64 = 0.0;
    let mut basis_residual: f64 = 0.0;
    for n in 1..=m {
        let expectation = state.dot(&(&ops.debt * &state));
        debt_residual = debt_residual.max((expectation - ops.debt[(n - 1, n - 1)]).abs());
        for (k, v) in state.iter().enumerate() {
            let unit = if k == n - 1 { 1.0 } else { 0.0 };
            basis_residual = basis_residual.max((v - unit).abs());
        }
        if n < m {
            state = &ops.raise * &state / ops.ladder_norms[n];
        }
    }
    Ok((debt_residual, basis_residual))
}
