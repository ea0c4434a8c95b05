//! SO(M) schedule rotations.
//!
//! A rotation is parametrized by one angle per generator plane `(i, j)`,
//! `i < j`, in lexicographic order `(1,2), (1,3), ..., (M-1,M)`. The matrix
//! is the ordered product of plane rotations, each of which is the
//! exponential of the real antisymmetric generator `E_ij - E_ji`:
//!
//! ```text
//! G_ij(angle): U_ii = U_jj = cos, U_ij = sin, U_ji = -sin
//! ```
//!
//! Other orderings parametrize the same group differently. Rotated loan
//! quantities are diagonals of `U O U^T`; because `(U_nj)^2` is doubly
//! stochastic, every rotated entry is a convex combination of the original
//! eigenvalues and traces are preserved.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{LoanError, Result};
use crate::loan::Schedule;
use crate::operators::LoanOperators;

/// Number of generator planes of so(M), `M (M - 1) / 2`.
pub fn generator_count(dim: usize) -> usize {
    dim * dim.saturating_sub(1) / 2
}

/// Generator planes in parameter order, 1-based.
pub fn planes(dim: usize) -> Vec<(usize, usize)> {
    (1..=dim)
        .flat_map(|i| ((i + 1)..=dim).map(move |j| (i, j)))
        .collect()
}

/// Position of plane `(i, j)` in the angle vector.
pub fn plane_index(dim: usize, plane: (usize, usize)) -> Result<usize> {
    let (i, j) = plane;
    if i == 0 || i >= j || j > dim {
        return Err(LoanError::IndexOutOfRange {
            index: if i == 0 || i >= j { i } else { j },
            max: dim,
        });
    }
    // planes before row i: sum_{r=1}^{i-1} (dim - r)
    Ok((i - 1) * dim - (i - 1) * i / 2 + (j - i - 1))
}

/// Real antisymmetric generator of plane `(i, j)`.
pub fn plane_generator(dim: usize, plane: (usize, usize)) -> Result<DMatrix<f64>> {
    plane_index(dim, plane)?;
    let mut g = DMatrix::zeros(dim, dim);
    g[(plane.0 - 1, plane.1 - 1)] = 1.0;
    g[(plane.1 - 1, plane.0 - 1)] = -1.0;
    Ok(g)
}

/// `U <- U * G_ij(angle)`, touching only columns `i` and `j` (0-based).
fn right_multiply_givens(u: &mut DMatrix<f64>, i: usize, j: usize, angle: f64) {
    if angle == 0.0 {
        return;
    }
    let (s, c) = angle.sin_cos();
    for r in 0..u.nrows() {
        let ui = u[(r, i)];
        let uj = u[(r, j)];
        u[(r, i)] = c * ui - s * uj;
        u[(r, j)] = s * ui + c * uj;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RotationSpec {
    dim: usize,
    angles: Vec<f64>,
    matrix: DMatrix<f64>,
}

/// Wire form `{"dim": M, "angles": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationWire {
    pub dim: usize,
    pub angles: Vec<f64>,
}

impl Serialize for RotationSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        RotationWire {
            dim: self.dim,
            angles: self.angles.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for RotationSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let wire = RotationWire::deserialize(deserializer)?;
        rotation_from_angles(wire.dim, &wire.angles).map_err(serde::de::Error::custom)
    }
}

impl RotationSpec {
    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            angles: vec![0.0; generator_count(dim)],
            matrix: DMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Angles reduced to `(-pi, pi]` for display.
    pub fn display_angles(&self) -> Vec<f64> {
        use std::f64::consts::PI;
        self.angles
            .iter()
            .map(|a| {
                let r = a.rem_euclid(2.0 * PI);
                if r > PI {
                    r - 2.0 * PI
                } else {
                    r
                }
            })
            .collect()
    }

    /// `max |U U^T - I|`.
    pub fn orthogonality_defect(&self) -> f64 {
        orthogonality_defect(&self.matrix)
    }

    pub fn determinant(&self) -> f64 {
        self.matrix.clone().determinant()
    }

    /// Weight matrix `W_nj = U_nj^2`; rows and columns sum to one.
    pub fn weights(&self) -> DMatrix<f64> {
        self.matrix.map(|v| v * v)
    }

    fn check_dim(&self, actual: usize) -> Result<()> {
        if actual != self.dim {
            Err(LoanError::DimensionMismatch {
                expected: self.dim,
                actual,
            })
        } else {
            Ok(())
        }
    }
}

pub fn orthogonality_defect(u: &DMatrix<f64>) -> f64 {
    let n = u.nrows();
    let product = u * u.transpose();
    (product - DMatrix::identity(n, n))
        .iter()
        .fold(0.0, |acc, v| acc.max(v.abs()))
}

/// Ordered product of plane rotations over the lexicographic planes.
pub fn rotation_from_angles(dim: usize, angles: &[f64]) -> Result<RotationSpec> {
    if dim == 0 {
        return Err(LoanError::InvalidSpec("rotation dimension must be at least 1".into()));
    }
    if angles.len() != generator_count(dim) {
        return Err(LoanError::DimensionMismatch {
            expected: generator_count(dim),
            actual: angles.len(),
        });
    }
    if angles.iter().any(|a| !a.is_finite()) {
        return Err(LoanError::InvalidSpec("rotation angles must be finite".into()));
    }
    let mut matrix = DMatrix::identity(dim, dim);
    for ((i, j), &angle) in planes(dim).into_iter().zip(angles) {
        right_multiply_givens(&mut matrix, i - 1, j - 1, angle);
    }
    Ok(RotationSpec {
        dim,
        angles: angles.to_vec(),
        matrix,
    })
}

/// Single-plane rotation: identity outside the `(i, j)` block. Rotating
/// with it leaves every period other than `i` and `j` untouched.
pub fn subgroup_rotation(dim: usize, plane: (usize, usize), angle: f64) -> Result<RotationSpec> {
    let index = plane_index(dim, plane)?;
    let mut angles = vec![0.0; generator_count(dim)];
    angles[index] = angle;
    let mut matrix = DMatrix::identity(dim, dim);
    let (s, c) = angle.sin_cos();
    let (i, j) = (plane.0 - 1, plane.1 - 1);
    matrix[(i, i)] = c;
    matrix[(j, j)] = c;
    matrix[(i, j)] = s;
    matrix[(j, i)] = -s;
    Ok(RotationSpec { dim, angles, matrix })
}

/// Rotation restricted to a list of planes; all other angles are zero.
pub fn rotation_on_planes(dim: usize, planes_and_angles: &[((usize, usize), f64)]) -> Result<RotationSpec> {
    let mut angles = vec![0.0; generator_count(dim)];
    for &(plane, angle) in planes_and_angles {
        angles[plane_index(dim, plane)?] = angle;
    }
    rotation_from_angles(dim, &angles)
}

/// Three-dimensional rotation `exp(theta L1) exp(gamma L2) exp(phi L3)`
/// where `L1`, `L2`, `L3` generate rotations about basis axes 1, 2, 3, i.e.
/// the planes `(2,3)`, `(1,3)` and `(1,2)`. Each factor is evaluated as a
/// matrix exponential of its generator.
pub fn so3_from_generators(theta: f64, gamma: f64, phi: f64) -> DMatrix<f64> {
    let exp = |plane, angle: f64| (plane_generator(3, plane).expect("valid plane") * angle).exp();
    exp((2, 3), theta) * exp((1, 3), gamma) * exp((1, 2), phi)
}

/// Same rotation as [`so3_from_generators`] built from closed-form plane
/// rotations; used on hot paths.
pub fn so3_from_planes(theta: f64, gamma: f64, phi: f64) -> DMatrix<f64> {
    let mut u = DMatrix::identity(3, 3);
    right_multiply_givens(&mut u, 1, 2, theta);
    right_multiply_givens(&mut u, 0, 2, gamma);
    right_multiply_givens(&mut u, 0, 1, phi);
    u
}

/// `U O U^T`.
pub fn rotate_operator(rotation: &RotationSpec, operator: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    rotation.check_dim(operator.nrows())?;
    rotation.check_dim(operator.ncols())?;
    let u = rotation.matrix();
    Ok(u * operator * u.transpose())
}

/// Diagonal of `U diag(values) U^T`: `sum_j U_nj^2 values_j`.
pub fn rotated_diagonal(u: &DMatrix<f64>, values: &[f64]) -> Vec<f64> {
    (0..u.nrows())
        .map(|n| (0..u.ncols()).map(|j| u[(n, j)] * u[(n, j)] * values[j]).sum())
        .collect()
}

/// Dispersion of `diag(values)` in state `n` after rotation:
/// `sqrt(<n|Qbar^2|n> - <n|Qbar|n>^2)`, evaluated as the weighted variance
/// `sum_j W_nj (q_j - qbar_n)^2`, which is the same quantity without the
/// cancellation of the raw second-moment difference.
fn dispersion(u: &DMatrix<f64>, values: &[f64], n: usize) -> f64 {
    let mean: f64 = (0..values.len()).map(|j| u[(n, j)] * u[(n, j)] * values[j]).sum();
    (0..values.len())
        .map(|j| {
            let dev = values[j] - mean;
            u[(n, j)] * u[(n, j)] * dev * dev
        })
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotatedSchedule {
    pub q_bar: Vec<f64>,
    pub a_bar: Vec<f64>,
    pub y_bar: Vec<f64>,
    /// Rotated `d_1 ..= d_M`.
    pub d_bar: Vec<f64>,
    pub risk: Vec<f64>,
}

/// Rotates the four diagonal loan observables given by their eigenvalues.
/// `debt` is `d_1 ..= d_M`.
pub fn rotate_diagonals(
    rotation: &RotationSpec,
    debt: &[f64],
    amortization: &[f64],
    interest: &[f64],
    installment: &[f64],
) -> Result<RotatedSchedule> {
    for len in [debt.len(), amortization.len(), interest.len(), installment.len()] {
        rotation.check_dim(len)?;
    }
    let u = rotation.matrix();
    Ok(RotatedSchedule {
        q_bar: rotated_diagonal(u, installment),
        a_bar: rotated_diagonal(u, amortization),
        y_bar: rotated_diagonal(u, interest),
        d_bar: rotated_diagonal(u, debt),
        risk: (0..rotation.dim).map(|n| dispersion(u, installment, n)).collect(),
    })
}

/// Mean values `<n|U O U^T|n>` of the rotated loan operators.
pub fn rotated_schedule(rotation: &RotationSpec, ops: &LoanOperators) -> Result<RotatedSchedule> {
    let diag = |m: &DMatrix<f64>| m.diagonal().iter().copied().collect::<Vec<_>>();
    rotate_diagonals(
        rotation,
        &diag(&ops.debt),
        &diag(&ops.amortization),
        &diag(&ops.interest),
        &diag(&ops.installment),
    )
}

/// Convenience wrapper over a schedule's sequences.
pub fn rotate_schedule_values(rotation: &RotationSpec, schedule: &Schedule) -> Result<RotatedSchedule> {
    rotate_diagonals(rotation, &schedule.d[1..], &schedule.a, &schedule.y, &schedule.q)
}

/// Risk `Delta Qbar_n` of the rotated installment operator in state `n`
/// (1-based).
pub fn risk_variance(rotation: &RotationSpec, ops: &LoanOperators, n: usize) -> Result<f64> {
    rotation.check_dim(ops.dim)?;
    if n == 0 || n > ops.dim {
        return Err(LoanError::IndexOutOfRange { index: n, max: ops.dim });
    }
    Ok(dispersion(rotation.matrix(), &ops.installments(), n - 1))
}

/// Closed-form two-period risk expressions
/// `sqrt((q1 - 1) q1 cos^2 + (q2 - 1) q2 sin^2)` and its partner.
/// These do not follow from the variance definition; they are kept for
/// side-by-side comparison with [`risk_variance`].
pub fn risk_closed_form_m2(phi: f64, q1: f64, q2: f64) -> Result<(f64, f64)> {
    let (s, c) = phi.sin_cos();
    let (s2, c2) = (s * s, c * c);
    let r1 = (q1 - 1.0) * q1 * c2 + (q2 - 1.0) * q2 * s2;
    let r2 = (q2 - 1.0) * q2 * c2 + (q1 - 1.0) * q1 * s2;
    for r in [r1, r2] {
        if r < 0.0 {
            return Err(LoanError::NegativeRadicand(r));
        }
    }
    Ok((r1.sqrt(), r2.sqrt()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskComparison {
    pub phi: f64,
    pub variance: [f64; 2],
    /// `None` when the closed-form radicand is negative.
    pub reference: Option<[f64; 2]>,
    pub deviation: Option<[f64; 2]>,
}

pub fn compare_risk_m2(phi: f64, q1: f64, q2: f64) -> RiskComparison {
    let u = subgroup_rotation(2, (1, 2), phi).expect("M=2 plane");
    let q = [q1, q2];
    let variance = [dispersion(u.matrix(), &q, 0), dispersion(u.matrix(), &q, 1)];
    let reference = risk_closed_form_m2(phi, q1, q2).ok().map(|(a, b)| [a, b]);
    let deviation = reference.map(|p| [p[0] - variance[0], p[1] - variance[1]]);
    RiskComparison {
        phi,
        variance,
        reference,
        deviation,
    }
}

/// Two-period table: rotated debt `(d1 cos^2, d1 sin^2)` and the
/// rotated interest, amortization and installment convex combinations.
pub fn m2_table_entries(phi: f64, schedule: &Schedule) -> Result<RotatedSchedule> {
    if schedule.periods() != 2 {
        return Err(LoanError::DimensionMismatch {
            expected: 2,
            actual: schedule.periods(),
        });
    }
    let (s, c) = phi.sin_cos();
    let (s2, c2) = (s * s, c * c);
    let mix = |v: &[f64]| vec![c2 * v[0] + s2 * v[1], s2 * v[0] + c2 * v[1]];
    let q = &schedule.q;
    let sc = (s * c).abs();
    Ok(RotatedSchedule {
        q_bar: mix(q),
        a_bar: mix(&schedule.a),
        y_bar: mix(&schedule.y),
        d_bar: vec![schedule.d[1] * c2, schedule.d[1] * s2],
        risk: vec![sc * (q[0] - q[1]).abs(); 2],
    })
}

/// Reference three-period matrix, entry by entry. It is not
/// orthogonal for general angles; see [`m3_comparison`].
pub fn m3_reference_matrix(theta: f64, gamma: f64, phi: f64) -> DMatrix<f64> {
    let (st, ct) = theta.sin_cos();
    let (sg, cg) = gamma.sin_cos();
    let (sp, cp) = phi.sin_cos();
    DMatrix::from_row_slice(
        3,
        3,
        &[
            st * cp,
            st * sp * sg + ct * cp * cg,
            st * sp * cg + ct * sg,
            ct * cp,
            ct * sp * sg - st * cg,
            ct * sp * cg - st * sg,
            -sp,
            cp * sg,
            cp * cg,
        ],
    )
}

/// Reference three-period installment expressions (with the `sec(2 gamma)`
/// factors), evaluated as written.
pub fn m3_reference_formulas(theta: f64, gamma: f64, phi: f64, q: [f64; 3]) -> Result<[f64; 3]> {
    let cos2g = (2.0 * gamma).cos();
    if cos2g.abs() < 1e-12 {
        return Err(LoanError::SingularParametrization(gamma));
    }
    let sec2g = 1.0 / cos2g;
    let (st, ct) = theta.sin_cos();
    let (sg, cg) = gamma.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let (st2, ct2, sg2, cg2, sp2, cp2) = (st * st, ct * ct, sg * sg, cg * cg, sp * sp, cp * cp);
    let [q1, q2, q3] = q;
    let mix23 = cg2 * q2 - sg2 * q3;
    let mix32 = cg2 * q3 - sg2 * q2;
    Ok([
        st2 * cp2 * q1 + sec2g * ct2 * mix23 + sec2g * st2 * sp2 * mix32,
        ct2 * cp2 * q1 + sec2g * st2 * mix23 + sec2g * ct2 * sp2 * mix32,
        sp2 * q1 + sec2g * cp2 * mix32,
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct M3Comparison {
    pub angles: [f64; 3],
    pub reference: [f64; 3],
    pub ground_truth: [f64; 3],
    pub deviation: [f64; 3],
    pub reference_matrix_orthogonality_defect: f64,
}

/// Compares the reference three-period expressions with the rotated
/// diagonal computed from [`so3_from_planes`].
pub fn m3_comparison(theta: f64, gamma: f64, phi: f64, q: [f64; 3]) -> Result<M3Comparison> {
    let reference = m3_reference_formulas(theta, gamma, phi, q)?;
    let truth = rotated_diagonal(&so3_from_planes(theta, gamma, phi), &q);
    let ground_truth = [truth[0], truth[1], truth[2]];
    Ok(M3Comparison {
        angles: [theta, gamma, phi],
        reference,
        ground_truth,
        deviation: [
            reference[0] - ground_truth[0],
            reference[1] - ground_truth[1],
            reference[2] - ground_truth[2],
        ],
        reference_matrix_orthogonality_defect: orthogonality_defect(&m3_reference_matrix(theta, gamma, phi)),
    })
}
