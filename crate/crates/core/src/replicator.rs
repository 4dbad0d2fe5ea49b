//! Replicator dynamics with linear fitness `f(x) = W x`.

use crate::fmt::g17;
use serde::{Deserialize, Serialize};
use std::io::{self, Write};
use thiserror::Error;

/// Tolerance on the simplex constraint of a frequency vector.
pub const SIMPLEX_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("state became non-finite at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("invalid frequency vector: {0}")]
    InvalidState(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Square fitness matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FitnessMatrix {
    n: usize,
    w: Vec<f64>,
}

impl FitnessMatrix {
    pub fn new(rows: &[Vec<f64>]) -> Result<Self, OdeError> {
        let n = rows.len();
        if n == 0 {
            return Err(OdeError::InvalidParameter("W is empty".into()));
        }
        let mut w = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(OdeError::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(OdeError::InvalidParameter("W has a non-finite entry".into()));
            }
            w.extend_from_slice(row);
        }
        Ok(FitnessMatrix { n, w })
    }

    pub fn zeros(n: usize) -> Self {
        FitnessMatrix { n, w: vec![0.0; n * n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.w[i * self.n + j]
    }

    /// `W + c·J`, with `J` the all-ones matrix.
    pub fn shifted(&self, c: f64) -> FitnessMatrix {
        FitnessMatrix {
            n: self.n,
            w: self.w.iter().map(|v| v + c).collect(),
        }
    }

    fn fitness(&self, x: &[f64]) -> Vec<f64> {
        self.w
            .chunks(self.n)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// `dx_i = x_i (f_i(x) − Σ_j x_j f_j(x))`.
pub fn replicator_rhs(x: &[f64], w: &FitnessMatrix) -> Result<Vec<f64>, OdeError> {
    if x.len() != w.n {
        return Err(OdeError::DimensionMismatch {
            expected: w.n,
            found: x.len(),
        });
    }
    Ok(rhs(x, w))
}

fn rhs(x: &[f64], w: &FitnessMatrix) -> Vec<f64> {
    let f = w.fitness(x);
    let mean: f64 = x.iter().zip(&f).map(|(a, b)| a * b).sum();
    x.iter().zip(&f).map(|(xi, fi)| xi * (fi - mean)).collect()
}

pub fn check_simplex(x: &[f64]) -> Result<(), OdeError> {
    if x.is_empty() {
        return Err(OdeError::InvalidState("no components".into()));
    }
    if x.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(OdeError::InvalidState(
            "components must be finite and non-negative".into(),
        ));
    }
    let sum: f64 = x.iter().sum();
    if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
        return Err(OdeError::InvalidState(format!("components sum to {sum}")));
    }
    Ok(())
}

fn rk4_step(x: &[f64], w: &FitnessMatrix, h: f64) -> Vec<f64> {
    let axpy = |a: &[f64], k: &[f64], s: f64| -> Vec<f64> { a.iter().zip(k).map(|(a, k)| a + s * k).collect() };
    let k1 = rhs(x, w);
    let k2 = rhs(&axpy(x, &k1, h / 2.0), w);
    let k3 = rhs(&axpy(x, &k2, h / 2.0), w);
    let k4 = rhs(&axpy(x, &k3, h), w);
    x.iter()
        .enumerate()
        .map(|(i, xi)| xi + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

fn project(x: &mut [f64]) {
    for v in x.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let sum: f64 = x.iter().sum();
    if sum > 0.0 {
        for v in x.iter_mut() {
            *v /= sum;
        }
    }
}

/// Fixed-step RK4 from `t = 0` to `t_end`, clipping negatives and
/// renormalizing after every step. The last step is shortened so the
/// trajectory ends exactly at `t_end`.
pub fn integrate(x0: &[f64], w: &FitnessMatrix, t_end: f64, dt: f64) -> Result<Vec<(f64, Vec<f64>)>, OdeError> {
    if x0.len() != w.n {
        return Err(OdeError::DimensionMismatch {
            expected: w.n,
            found: x0.len(),
        });
    }
    check_simplex(x0)?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(OdeError::InvalidParameter(format!("dt = {dt} must be positive")));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(OdeError::InvalidParameter(format!(
            "t_end = {t_end} must be non-negative"
        )));
    }
    let mut traj = vec![(0.0, x0.to_vec())];
    let mut x = x0.to_vec();
    let mut k: u64 = 0;
    let mut t = 0.0;
    // Steps shorter than this fraction of dt are absorbed into the last one.
    let slack = dt * 1e-9;
    while t < t_end {
        let next = (k + 1) as f64 * dt;
        let t_next = if next >= t_end - slack { t_end } else { next };
        x = rk4_step(&x, w, t_next - t);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(OdeError::NonFiniteState { t: t_next });
        }
        project(&mut x);
        k += 1;
        t = t_next;
        traj.push((t, x.clone()));
    }
    Ok(traj)
}

/// Input of the `ode` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OdeSpec {
    pub x0: Vec<f64>,
    #[serde(rename = "W")]
    pub w: Vec<Vec<f64>>,
    pub t_end: f64,
    pub dt: f64,
}

impl OdeSpec {
    pub fn solve(&self) -> Result<Vec<(f64, Vec<f64>)>, OdeError> {
        integrate(&self.x0, &FitnessMatrix::new(&self.w)?, self.t_end, self.dt)
    }
}

/// Writes `t,x_0,...,x_{n-1}` rows with 17 significant digits.
pub fn write_trajectory_csv<W: Write>(mut out: W, traj: &[(f64, Vec<f64>)]) -> io::Result<()> {
    let n = traj.first().map_or(0, |(_, x)| x.len());
    let mut header = String::from("t");
    for i in 0..n {
        header.push_str(&format!(",x_{i}"));
    }
    writeln!(out, "{header}")?;
    for (t, x) in traj {
        let mut line = g17(*t);
        for v in x {
            line.push(',');
            line.push_str(&g17(*v));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}
