//! Fixed-step fourth-order Runge-Kutta integrators for the competitive
//! Lotka-Volterra system on a finite trait set, the two-trait interior
//! equilibrium with its stability classification, and the canonical trait
//! equation with stop-at-boundary handling.
//!
//! Fixed steps keep runs bit-reproducible; the systems here are smooth and
//! low-dimensional, so adaptivity buys nothing.

use crate::analytic;
use crate::expr::EvalError;
use crate::model::ModelSpec;
use serde::{Deserialize, Serialize};

/// Why integration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TerminalReason {
    /// reached the requested horizon
    Horizon,
    /// the trait path hit the edge of the trait space and is held there
    Boundary,
    /// a state component left the admissible region (or became non-finite)
    Blowup,
}

/// Time grid and state sequence produced by an integrator. States have
/// dimension `n` for the Lotka-Volterra system and 1 for the trait equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdeSolution {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub terminal_reason: TerminalReason,
}

impl OdeSolution {
    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("solution has at least t = 0")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("solution has at least t = 0")
    }
}

/// negative overshoot below this magnitude is rounding, not dynamics
const NEGATIVE_CLAMP: f64 = 1e-12;

fn rk4_step<F: Fn(&[f64], &mut [f64])>(rhs: &F, state: &[f64], dt: f64, scratch: &mut Scratch) -> Vec<f64> {
    let n = state.len();
    let Scratch { k1, k2, k3, k4, tmp } = scratch;
    rhs(state, k1);
    for i in 0..n {
        tmp[i] = state[i] + 0.5 * dt * k1[i];
    }
    rhs(tmp, k2);
    for i in 0..n {
        tmp[i] = state[i] + 0.5 * dt * k2[i];
    }
    rhs(tmp, k3);
    for i in 0..n {
        tmp[i] = state[i] + dt * k3[i];
    }
    rhs(tmp, k4);
    (0..n)
        .map(|i| state[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

struct Scratch {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Self {
            k1: vec![0.0; n],
            k2: vec![0.0; n],
            k3: vec![0.0; n],
            k4: vec![0.0; n],
            tmp: vec![0.0; n],
        }
    }
}

/// Integrate the `n`-trait competitive Lotka-Volterra system
/// `dz_i/dt = z_i (b(x_i) - d(x_i) - sum_j c(x_i, x_j) z_j)` from `z0` to
/// horizon `t_end` with fixed step `dt`. Components pushed below zero by a
/// step are clamped to zero when the overshoot is rounding-sized; anything
/// larger (or non-finite) terminates with [`TerminalReason::Blowup`].
pub fn integrate_lv(
    spec: &ModelSpec,
    traits: &[f64],
    z0: &[f64],
    t_end: f64,
    dt: f64,
) -> Result<OdeSolution, EvalError> {
    assert!(!traits.is_empty() && traits.len() == z0.len());
    assert!(dt > 0.0 && t_end >= 0.0);
    let n = traits.len();
    let mut growth = Vec::with_capacity(n);
    for &x in traits {
        let b = spec.rates.birth.eval(x, None)?;
        let d = spec.rates.death.eval(x, None)?;
        growth.push(b - d);
    }
    let mut comp = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            comp[i * n + j] = spec.rates.competition.eval(traits[i], Some(traits[j]))?;
        }
    }
    let rhs = |z: &[f64], out: &mut [f64]| {
        for i in 0..n {
            let pressure: f64 = (0..n).map(|j| comp[i * n + j] * z[j]).sum();
            out[i] = z[i] * (growth[i] - pressure);
        }
    };

    let mut scratch = Scratch::new(n);
    let mut times = vec![0.0];
    let mut states = vec![z0.to_vec()];
    let mut t = 0.0;
    let mut state = z0.to_vec();
    let mut reason = TerminalReason::Horizon;
    while t < t_end - 1e-12 {
        let step = dt.min(t_end - t);
        let mut next = rk4_step(&rhs, &state, step, &mut scratch);
        let mut broke = false;
        for v in next.iter_mut() {
            if !v.is_finite() || *v < -NEGATIVE_CLAMP {
                broke = true;
                break;
            }
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        if broke {
            reason = TerminalReason::Blowup;
            break;
        }
        t += step;
        state = next.clone();
        times.push(t);
        states.push(next);
    }
    Ok(OdeSolution {
        times,
        states,
        terminal_reason: reason,
    })
}

/// Interior equilibrium of the two-trait system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Lv2Equilibrium {
    /// strictly positive solution of the 2x2 linear system, with stability of
    /// the Jacobian at that point
    Interior { masses: (f64, f64), stable: bool },
    /// the linear solve has no componentwise-positive solution
    NoInterior,
    /// competition matrix singular within tolerance
    Degenerate,
}

const SINGULAR_TOL: f64 = 1e-14;

/// Solve `c(x,x) z1 + c(x,y) z2 = b(x) - d(x)`,
/// `c(y,x) z1 + c(y,y) z2 = b(y) - d(y)` and classify the result. Stability
/// uses the exact 2x2 criterion: at an interior equilibrium the Jacobian is
/// `-diag(z) C`, whose eigenvalues have negative real parts iff its trace is
/// negative and its determinant positive.
pub fn lv2_equilibrium(spec: &ModelSpec, x: f64, y: f64) -> Result<Lv2Equilibrium, EvalError> {
    let r1 = spec.rates.birth.eval(x, None)? - spec.rates.death.eval(x, None)?;
    let r2 = spec.rates.birth.eval(y, None)? - spec.rates.death.eval(y, None)?;
    let cxx = spec.rates.competition.eval(x, Some(x))?;
    let cxy = spec.rates.competition.eval(x, Some(y))?;
    let cyx = spec.rates.competition.eval(y, Some(x))?;
    let cyy = spec.rates.competition.eval(y, Some(y))?;
    let det = cxx * cyy - cxy * cyx;
    if det.abs() < SINGULAR_TOL {
        return Ok(Lv2Equilibrium::Degenerate);
    }
    let z1 = (r1 * cyy - r2 * cxy) / det;
    let z2 = (cxx * r2 - cyx * r1) / det;
    if !(z1 > 0.0 && z2 > 0.0) {
        return Ok(Lv2Equilibrium::NoInterior);
    }
    let trace = -(z1 * cxx + z2 * cyy);
    let jac_det = z1 * z2 * det;
    Ok(Lv2Equilibrium::Interior {
        masses: (z1, z2),
        stable: trace < 0.0 && jac_det > 0.0,
    })
}

/// Integrate the canonical trait equation `dx/dt = cead_rhs(x)` with RK4.
/// A step that would leave the trait space clamps the state to the boundary,
/// which is then held for the rest of the horizon
/// ([`TerminalReason::Boundary`]).
pub fn integrate_cead(
    spec: &ModelSpec,
    x0: f64,
    t_end: f64,
    dt: f64,
) -> Result<OdeSolution, EvalError> {
    assert!(dt > 0.0 && t_end >= 0.0);
    assert!(spec.space.contains(x0), "x0 outside trait space");
    // probe once so expression errors surface before integration
    analytic::cead_rhs(spec, x0)?;
    let rhs = |x: &[f64], out: &mut [f64]| {
        // inside the integration loop the trait stays within the closed
        // interval, where the rhs is well-defined for validated specs
        out[0] = analytic::cead_rhs(spec, x[0].clamp(spec.space.lo, spec.space.hi))
            .unwrap_or(f64::NAN);
    };
    let mut scratch = Scratch::new(1);
    let mut times = vec![0.0];
    let mut states = vec![vec![x0]];
    let mut t = 0.0;
    let mut x = x0;
    let mut reason = TerminalReason::Horizon;
    let mut held: Option<f64> = None;
    while t < t_end - 1e-12 {
        let step = dt.min(t_end - t);
        let next = match held {
            Some(edge) => edge,
            None => {
                let v = rk4_step(&rhs, &[x], step, &mut scratch)[0];
                if !v.is_finite() {
                    reason = TerminalReason::Blowup;
                    break;
                }
                if v > spec.space.hi {
                    held = Some(spec.space.hi);
                    reason = TerminalReason::Boundary;
                    spec.space.hi
                } else if v < spec.space.lo {
                    held = Some(spec.space.lo);
                    reason = TerminalReason::Boundary;
                    spec.space.lo
                } else {
                    v
                }
            }
        };
        t += step;
        x = next;
        times.push(t);
        states.push(vec![x]);
    }
    Ok(OdeSolution {
        times,
        states,
        terminal_reason: reason,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{presets, ScalingTriple};

    fn scaling() -> ScalingTriple {
        ScalingTriple::new(1000, 1e-6, 0.1, 0.1).unwrap()
    }

    #[test]
    fn lv1_fixed_point_stays_put() {
        let spec = presets::linear_birth(scaling());
        let x = 0.25;
        let zbar = analytic::equilibrium_mass(&spec, x).unwrap();
        let sol = integrate_lv(&spec, &[x], &[zbar], 10.0, 1e-3).unwrap();
        let max_dev = sol
            .states
            .iter()
            .map(|s| (s[0] - zbar).abs())
            .fold(0.0, f64::max);
        assert!(max_dev < 1e-10, "{max_dev}");
        assert_eq!(sol.terminal_reason, TerminalReason::Horizon);
    }

    #[test]
    fn lv1_logistic_closed_form() {
        // z' = z(0.5 - z) from 0.1: z(t) = zbar / (1 + (zbar/z0 - 1) e^{-(b-d)t})
        let spec = presets::linear_birth(scaling());
        let sol = integrate_lv(&spec, &[0.0], &[0.1], 50.0, 1e-3).unwrap();
        let zbar = 0.5;
        let z0 = 0.1;
        let expect = zbar / (1.0 + (zbar / z0 - 1.0) * (-0.5f64 * 50.0).exp());
        assert!((sol.final_state()[0] - expect).abs() < 1e-6);
    }

    #[test]
    fn lv2_coexistence_converges_to_interior() {
        let spec = presets::symmetric_pair(scaling());
        let (x, y) = (0.0, 0.5);
        let eq = lv2_equilibrium(&spec, x, y).unwrap();
        let Lv2Equilibrium::Interior { masses, stable } = eq else {
            panic!("expected interior equilibrium, got {eq:?}");
        };
        assert!(stable);
        assert!((masses.0 - 2.0 / 3.0).abs() < 1e-12);
        assert!((masses.1 - 2.0 / 3.0).abs() < 1e-12);
        let zbar_x = analytic::equilibrium_mass(&spec, x).unwrap();
        let sol = integrate_lv(&spec, &[x, y], &[zbar_x, 0.01], 400.0, 1e-2).unwrap();
        let end = sol.final_state();
        assert!((end[0] - masses.0).abs() < 1e-4, "{end:?}");
        assert!((end[1] - masses.1).abs() < 1e-4, "{end:?}");
    }

    #[test]
    fn lv2_exclusion_drives_resident_out() {
        let spec = presets::linear_birth(scaling());
        let (x, y) = (0.0, 0.1);
        assert_eq!(lv2_equilibrium(&spec, x, y).unwrap(), Lv2Equilibrium::NoInterior);
        let zbar_x = analytic::equilibrium_mass(&spec, x).unwrap();
        let sol = integrate_lv(&spec, &[x, y], &[zbar_x, 0.01], 2000.0, 1e-2).unwrap();
        assert!(sol.final_state()[0] < 1e-6, "{:?}", sol.final_state());
    }

    #[test]
    fn lv2_singular_competition_degenerate() {
        // constant competition kernel: det = 0
        let spec = presets::linear_birth(scaling());
        assert_eq!(
            lv2_equilibrium(&spec, 0.2, 0.6).unwrap(),
            Lv2Equilibrium::Degenerate
        );
    }

    #[test]
    fn lv_positivity_preserved() {
        let spec = presets::linear_birth(scaling());
        let sol = integrate_lv(&spec, &[0.0, 0.5], &[0.9, 0.2], 100.0, 1e-2).unwrap();
        for s in &sol.states {
            assert!(s.iter().all(|&z| z >= 0.0));
        }
    }

    #[test]
    fn cead_linear_birth_closed_form() {
        // dx/dt = 0.125 (1 + x): x(t) = (1 + x0) e^{0.125 t} - 1
        let spec = presets::linear_birth(scaling());
        let sol = integrate_cead(&spec, 0.0, 1.0, 1e-3).unwrap();
        let expect = 0.125f64.exp() - 1.0;
        assert!((sol.final_state()[0] - expect).abs() < 1e-6);
        assert_eq!(sol.terminal_reason, TerminalReason::Horizon);
    }

    #[test]
    fn cead_zero_gradient_constant_path() {
        let spec = presets::symmetric_pair(scaling());
        let sol = integrate_cead(&spec, 0.4, 5.0, 1e-2).unwrap();
        assert!(sol.states.iter().all(|s| s[0] == 0.4));
    }

    #[test]
    fn cead_boundary_hold() {
        let spec = presets::linear_birth(scaling());
        let sol = integrate_cead(&spec, 1.0, 2.0, 1e-2).unwrap();
        assert_eq!(sol.terminal_reason, TerminalReason::Boundary);
        assert!(sol.states.iter().all(|s| s[0] == 1.0));
        assert!((sol.final_time() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rk4_fourth_order_convergence() {
        let spec = presets::linear_birth(scaling());
        let exact = 0.125f64.exp() - 1.0;
        let err = |dt: f64| {
            (integrate_cead(&spec, 0.0, 1.0, dt).unwrap().final_state()[0] - exact).abs()
        };
        let e1 = err(0.2);
        let e2 = err(0.1);
        assert!(e1 / e2 >= 12.0, "ratio {} (e1={e1}, e2={e2})", e1 / e2);
    }
}
