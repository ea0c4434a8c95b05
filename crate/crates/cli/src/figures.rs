//! Figure data series as CSV.

use qloan::designer::{sign_pattern_region, RegionGrid, RegionParams};
use qloan::format::{fmt_float, fmt_rounded};
use qloan::indexed::{indexed_schedule, rotated_indexed_installments, IndexModel};
use qloan::loan::{solve_recurrence, LoanSpec};
use qloan::rotation::rotation_from_angles;
use qloan::Result;

/// Both amortization systems at `d0 = 100`, `M = 10`, `t = 0.2`:
/// `system,n,d,a,y,q`.
pub fn nicl(decimals: Option<usize>) -> Result<String> {
    let f = |v| fmt_rounded(v, decimals);
    let mut out = String::from("system,n,d,a,y,q\n");
    for (name, spec) in [
        ("french", LoanSpec::french(100.0, 10, 0.2)),
        ("german", LoanSpec::german(100.0, 10, 0.2)),
    ] {
        let s = solve_recurrence(&spec)?;
        out.push_str(&format!("{name},0,{},,,\n", f(s.d[0])));
        for n in 1..=s.periods() {
            out.push_str(&format!(
                "{name},{n},{},{},{},{}\n",
                f(s.d[n]),
                f(s.a[n - 1]),
                f(s.y[n - 1]),
                f(s.q[n - 1])
            ));
        }
    }
    Ok(out)
}

/// Two-period French loan indexed with `u_2 = a u_1`, `a = 1.1`, rotated by
/// `phi = asin(x)` for `x = -1, -0.99, ..., 1`: `x,q1_bar/q1,q2_bar/q1`.
pub fn a1(decimals: Option<usize>) -> Result<String> {
    let a = 1.1;
    let spec = LoanSpec::french(100.0, 2, 0.2);
    let indexed = indexed_schedule(&spec, &IndexModel::Geometric { a, u1: 1.0 })?;
    let u = &indexed.currency.u[1..];
    let q = &indexed.index_units.q;
    let q1 = indexed.currency.q[0];
    let f = |v| fmt_rounded(v, decimals);
    let mut out = String::from("x,q1_bar_over_q1,q2_bar_over_q1\n");
    for i in 0..=200 {
        let x = -1.0 + i as f64 / 100.0;
        let rotation = rotation_from_angles(2, &[x.asin()])?;
        let q_bar = rotated_indexed_installments(u, q, &rotation)?;
        out.push_str(&format!("{},{},{}\n", f(x), f(q_bar[0] / q1), f(q_bar[1] / q1)));
    }
    Ok(out)
}

pub const REGION_FIGURE_Z: [f64; 2] = [0.6, 0.7];
pub const REGION_FIGURE_INFLATION: f64 = 1.05;

/// Feasibility grids of the `(-,-,+)` pattern at `a = 1.05` for both
/// `z` slices: `z,x,y,feasible`.
pub fn region(grid_n: usize) -> Result<String> {
    let mut out = String::from("z,x,y,feasible\n");
    for z in REGION_FIGURE_Z {
        let params = RegionParams {
            z,
            inflation: REGION_FIGURE_INFLATION,
            grid_n,
            ..Default::default()
        };
        out.push_str(&region_rows(&sign_pattern_region(&params)?, Some(z)));
    }
    Ok(out)
}

/// `x,y,feasible` rows, optionally prefixed by `z`.
pub fn region_rows(grid: &RegionGrid, z: Option<f64>) -> String {
    let prefix = z.map(|z| format!("{},", fmt_float(z))).unwrap_or_default();
    let mut out = String::new();
    for (ix, x) in grid.xs.iter().enumerate() {
        for (iy, y) in grid.ys.iter().enumerate() {
            out.push_str(&format!(
                "{prefix}{},{},{}\n",
                fmt_float(*x),
                fmt_float(*y),
                grid.feasible[ix][iy] as u8
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nicl_rows() {
        let csv = nicl(None).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 1 + 2 * 11);
        assert_eq!(lines[1], "french,0,100,,,");
        assert!(lines[2].ends_with(",23.8522756883"));
        assert_eq!(lines[13], "german,1,90,10,20,30");
    }

    #[test]
    fn a1_endpoints() {
        let csv = a1(None).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 202);
        assert_eq!(lines[101], "0,1,1.1");
        let mid: Vec<f64> = lines[1].split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(mid[0], -1.0);
        assert!((mid[1] - 1.1).abs() < 1e-11 && (mid[2] - 1.0).abs() < 1e-11);
    }
}
