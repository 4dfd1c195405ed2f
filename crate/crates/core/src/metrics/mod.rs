//! Kantorovich-Rubinstein (bounded-Lipschitz) norm between finite signed
//! atomic measures, and the sup-distance between a simulated population path
//! and its deterministic reference path.
//!
//! The norm is the value of `sup { integral f dmu }` over 1-Lipschitz `f`
//! with `|f| <= 1`. On a finite atom set on the line the Lipschitz condition
//! reduces to the adjacent-gap constraints (the pairwise constraints
//! telescope), leaving a small linear program over the atom values solved by
//! the self-contained simplex in [`simplex`]. A grid-search dynamic program
//! ([`kr_bruteforce`]) provides an independent certified lower bound for
//! testing.

mod simplex;

use crate::ibm::Trajectory;
use crate::model::ModelSpec;
use crate::ode::OdeSolution;
use crate::{analytic, expr::EvalError};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum MetricError {
    #[error("brute-force oracle supports at most {max} atoms, got {got}")]
    TooManyAtoms { max: usize, got: usize },
    #[error("reference path is empty")]
    EmptyReference,
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Finite signed measure given by strictly increasing atom positions with
/// nonzero weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedAtomicMeasure {
    atoms: Vec<(f64, f64)>,
}

impl SignedAtomicMeasure {
    pub fn empty() -> Self {
        Self { atoms: Vec::new() }
    }

    /// Build from arbitrary `(position, weight)` points: sorts, sums weights
    /// at coincident positions and drops exact zeros.
    pub fn from_points<I: IntoIterator<Item = (f64, f64)>>(points: I) -> Self {
        let mut pts: Vec<(f64, f64)> = points
            .into_iter()
            .filter(|(p, w)| p.is_finite() && *w != 0.0 && w.is_finite())
            .collect();
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite positions"));
        let mut atoms: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
        for (p, w) in pts {
            match atoms.last_mut() {
                Some(last) if last.0 == p => last.1 += w,
                _ => atoms.push((p, w)),
            }
        }
        atoms.retain(|&(_, w)| w != 0.0);
        Self { atoms }
    }

    pub fn dirac(position: f64, weight: f64) -> Self {
        Self::from_points([(position, weight)])
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_variation(&self) -> f64 {
        self.atoms.iter().map(|(_, w)| w.abs()).sum()
    }

    /// Signed difference `self - other` with coincident atoms merged.
    pub fn sub(&self, other: &Self) -> Self {
        Self::from_points(
            self.atoms
                .iter()
                .copied()
                .chain(other.atoms.iter().map(|&(p, w)| (p, -w))),
        )
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::from_points(self.atoms.iter().map(|&(p, w)| (p, factor * w)))
    }
}

/// Bounded-Lipschitz norm of a signed atomic measure, as the exact optimum of
/// the chain-constrained linear program over the test-function values
/// `f_i in [-1, 1]`, `|f_{i+1} - f_i| <= x_{i+1} - x_i`.
pub fn kr_norm(mu: &SignedAtomicMeasure) -> f64 {
    let n = mu.atoms.len();
    if n == 0 {
        return 0.0;
    }
    if n == 1 {
        return mu.atoms[0].1.abs();
    }
    // substitute y_i = f_i + 1 in [0, 2] so the slack basis is feasible
    let rows = n + 2 * (n - 1);
    let cols = n;
    let mut a = vec![0.0f64; rows * cols];
    let mut b = vec![0.0f64; rows];
    for i in 0..n {
        a[i * cols + i] = 1.0;
        b[i] = 2.0;
    }
    for i in 0..n - 1 {
        let gap = mu.atoms[i + 1].0 - mu.atoms[i].0;
        let r1 = n + 2 * i;
        let r2 = n + 2 * i + 1;
        a[r1 * cols + i + 1] = 1.0;
        a[r1 * cols + i] = -1.0;
        b[r1] = gap;
        a[r2 * cols + i] = 1.0;
        a[r2 * cols + i + 1] = -1.0;
        b[r2] = gap;
    }
    let c: Vec<f64> = mu.atoms.iter().map(|&(_, w)| w).collect();
    let weight_sum: f64 = c.iter().sum();
    match simplex::solve(&c, &a, &b, rows, cols) {
        simplex::SimplexOutcome::Optimal { objective, .. } => (objective - weight_sum).max(0.0),
        simplex::SimplexOutcome::Unbounded => {
            unreachable!("box-constrained program cannot be unbounded")
        }
    }
}

/// `kr_norm(mu - nu)` with coincident atoms merged first.
pub fn kr_distance(mu: &SignedAtomicMeasure, nu: &SignedAtomicMeasure) -> f64 {
    kr_norm(&mu.sub(nu))
}

/// step of the brute-force test-function grid
pub const BRUTEFORCE_GRID_STEP: f64 = 1e-3;
const BRUTEFORCE_MAX_ATOMS: usize = 6;

/// Grid-search lower bound for [`kr_norm`]: test-function values restricted
/// to the grid `{-1, -1 + step, ..., 1}` and optimized exactly over that grid
/// by dynamic programming along the chain. The result never exceeds the LP
/// value and trails it by at most `O(n * step)`.
pub fn kr_bruteforce(mu: &SignedAtomicMeasure) -> Result<f64, MetricError> {
    let n = mu.atoms.len();
    if n > BRUTEFORCE_MAX_ATOMS {
        return Err(MetricError::TooManyAtoms {
            max: BRUTEFORCE_MAX_ATOMS,
            got: n,
        });
    }
    if n == 0 {
        return Ok(0.0);
    }
    let step = BRUTEFORCE_GRID_STEP;
    let levels = (2.0 / step).round() as usize + 1;
    let value = |k: usize| -1.0 + step * k as f64;

    let mut dp: Vec<f64> = (0..levels).map(|k| mu.atoms[0].1 * value(k)).collect();
    for i in 1..n {
        let gap = mu.atoms[i].0 - mu.atoms[i - 1].0;
        let half_width = (gap / step).floor() as usize;
        let reach = sliding_window_max(&dp, half_width.min(levels));
        let w = mu.atoms[i].1;
        dp = (0..levels).map(|k| w * value(k) + reach[k]).collect();
    }
    Ok(dp.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
}

/// `out[k] = max(values[k - half .. k + half])`, clipped to the array.
fn sliding_window_max(values: &[f64], half_width: usize) -> Vec<f64> {
    let n = values.len();
    let mut out = vec![f64::NEG_INFINITY; n];
    let mut deque: std::collections::VecDeque<usize> = std::collections::VecDeque::new();
    // window for position k is [k - half, k + half]; process with the right
    // edge running ahead
    let mut right = 0usize;
    for k in 0..n {
        let hi = (k + half_width).min(n - 1);
        while right <= hi {
            while let Some(&back) = deque.back() {
                if values[back] <= values[right] {
                    deque.pop_back();
                } else {
                    break;
                }
            }
            deque.push_back(right);
            right += 1;
        }
        let lo = k.saturating_sub(half_width);
        while let Some(&front) = deque.front() {
            if front < lo {
                deque.pop_front();
            } else {
                break;
            }
        }
        out[k] = values[*deque.front().expect("window nonempty")];
    }
    out
}

/// Supremum over the sample grid of the KR distance between the simulated
/// population measure (counts rescaled by `1/K`) and the reference
/// `zbar(x_t) delta_{x_t}` evaluated at the matching rescaled time. The
/// reference trait path is linearly interpolated onto the trajectory grid.
pub fn traj_sup_distance(
    traj: &Trajectory,
    cead: &OdeSolution,
    spec: &ModelSpec,
) -> Result<f64, MetricError> {
    if cead.times.is_empty() {
        return Err(MetricError::EmptyReference);
    }
    let k = spec.scaling.population as f64;
    let mut sup = 0.0f64;
    for sample in &traj.samples {
        let t_rescaled = spec.scaling.rescaled_time(sample.time);
        let x_t = interp_path(cead, t_rescaled);
        let zbar = analytic::equilibrium_mass(spec, x_t)?;
        let reference = SignedAtomicMeasure::dirac(x_t, zbar);
        let population = SignedAtomicMeasure::from_points(
            sample
                .atoms
                .iter()
                .map(|a| (a.trait_value, a.count as f64 / k)),
        );
        sup = sup.max(kr_distance(&population, &reference));
    }
    Ok(sup)
}

/// Linear interpolation of a one-dimensional solution path, clamped to its
/// ends.
pub(crate) fn interp_path(path: &OdeSolution, t: f64) -> f64 {
    let times = &path.times;
    let states = &path.states;
    if t <= times[0] {
        return states[0][0];
    }
    if t >= *times.last().expect("nonempty") {
        return states.last().expect("nonempty")[0];
    }
    match times.binary_search_by(|probe| probe.partial_cmp(&t).expect("finite")) {
        Ok(i) => states[i][0],
        Err(i) => {
            let (t0, t1) = (times[i - 1], times[i]);
            let (x0, x1) = (states[i - 1][0], states[i][0]);
            x0 + (x1 - x0) * (t - t0) / (t1 - t0)
        }
    }
}
