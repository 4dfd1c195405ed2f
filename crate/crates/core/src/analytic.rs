//! Closed-form quantities of the deterministic theory: monomorphic
//! equilibrium mass, invasion fitness, its gradient in the mutant direction,
//! the two-trait coexistence test, the right-hand side of the canonical
//! equation, and the first-order invasion probability of a mutant line.
//!
//! All functions are pure in an immutable [`ModelSpec`] and safe to call
//! concurrently.

use crate::expr::{EvalError, Var};
use crate::model::ModelSpec;
use serde::{Deserialize, Serialize};

/// Equilibrium mass `(b(x) - d(x)) / c(x,x)` of the one-type logistic system.
pub fn equilibrium_mass(spec: &ModelSpec, x: f64) -> Result<f64, EvalError> {
    let b = spec.rates.birth.eval(x, None)?;
    let d = spec.rates.death.eval(x, None)?;
    let c = spec.rates.competition.eval(x, Some(x))?;
    if c <= 0.0 {
        return Err(EvalError::Domain(format!(
            "self-competition c({x},{x}) = {c} is not positive"
        )));
    }
    Ok((b - d) / c)
}

/// Invasion fitness `f(y, x) = b(y) - d(y) - c(y, x) zbar(x)`: the initial
/// per-capita growth rate of a rare `y` mutant in an `x` resident population
/// at equilibrium. Vanishes identically on the diagonal `y = x`.
pub fn invasion_fitness(spec: &ModelSpec, mutant: f64, resident: f64) -> Result<f64, EvalError> {
    let zbar = equilibrium_mass(spec, resident)?;
    let b = spec.rates.birth.eval(mutant, None)?;
    let d = spec.rates.death.eval(mutant, None)?;
    let c = spec.rates.competition.eval(mutant, Some(resident))?;
    Ok(b - d - c * zbar)
}

/// Fitness gradient in the mutant direction on the diagonal:
/// `d1 f(x, x) = b'(x) - d'(x) - d1 c(x, x) zbar(x)`, with the derivatives
/// taken exactly by forward-mode differentiation.
pub fn fitness_gradient(spec: &ModelSpec, x: f64) -> Result<f64, EvalError> {
    let zbar = equilibrium_mass(spec, x)?;
    let (_, db) = spec.rates.birth.eval_d(x, None, Var::X)?;
    let (_, dd) = spec.rates.death.eval_d(x, None, Var::X)?;
    let (_, dc) = spec.rates.competition.eval_d(x, Some(x), Var::X)?;
    Ok(db - dd - dc * zbar)
}

/// Sign structure of the two-trait Lotka-Volterra system from the pair of
/// invasion fitnesses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coexistence {
    /// both `f(x,y)` and `f(y,x)` positive: stable interior equilibrium
    Coexist,
    /// `f(y,x) > 0` and `f(x,y) < 0`: the mutant ousts the resident
    YExcludesX,
    /// `f(x,y) > 0` and `f(y,x) < 0`
    XExcludesY,
    /// a fitness within tolerance of zero; boundary case left unresolved
    Degenerate,
}

/// Tolerance below which a fitness value counts as a tie. Exact ties are
/// measure-zero in the trait pair, so they are flagged rather than resolved.
pub const COEXISTENCE_TOL: f64 = 1e-10;

pub fn coexistence_check(spec: &ModelSpec, x: f64, y: f64) -> Result<Coexistence, EvalError> {
    let f_xy = invasion_fitness(spec, x, y)?;
    let f_yx = invasion_fitness(spec, y, x)?;
    let t = COEXISTENCE_TOL;
    Ok(if f_xy.abs() <= t || f_yx.abs() <= t {
        Coexistence::Degenerate
    } else if f_xy > t && f_yx > t {
        Coexistence::Coexist
    } else if f_yx > t {
        Coexistence::YExcludesX
    } else if f_xy > t {
        Coexistence::XExcludesY
    } else {
        // mutual exclusion cannot arise from a shared equilibrium background;
        // flag it as degenerate rather than invent a verdict
        Coexistence::Degenerate
    })
}

/// Right-hand side of the canonical equation:
/// `sum_h h [h m(x) zbar(x) d1f(x,x)]_+ M(x,h)`.
///
/// For a symmetric kernel this equals the classical half-variance form
/// `1/2 sum_h h^2 m zbar d1f M(x,h)`.
pub fn cead_rhs(spec: &ModelSpec, x: f64) -> Result<f64, EvalError> {
    let zbar = equilibrium_mass(spec, x)?;
    let grad = fitness_gradient(spec, x)?;
    let m = spec.rates.mutation_prob.eval(x, None)?;
    let mut total = 0.0;
    for h in spec.kernel.jumps() {
        if h == 0 {
            continue;
        }
        let w = spec.kernel.weight_at(x, h)?;
        if w == 0.0 {
            continue;
        }
        let inner = h as f64 * m * zbar * grad;
        if inner > 0.0 {
            total += h as f64 * inner * w;
        }
    }
    Ok(total)
}

/// First-order probability that a single mutant in direction `h` survives to
/// a macroscopic density, per unit mutation step:
/// `q(h) = [h d1f(x,x)]_+ / b(x)`. The success probability of a concrete
/// mutant at step `sigma` is approximately `q(h) sigma`.
pub fn invasion_prob_first_order(spec: &ModelSpec, x: f64, h: i32) -> Result<f64, EvalError> {
    let grad = fitness_gradient(spec, x)?;
    let b = spec.rates.birth.eval(x, None)?;
    if b <= 0.0 {
        return Err(EvalError::Domain(format!("birth rate b({x}) = {b} not positive")));
    }
    let drive = h as f64 * grad;
    Ok(if drive > 0.0 { drive / b } else { 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::model::{presets, MutationKernel, ModelSpec, RateFunctions, ScalingTriple, TraitSpace};

    fn scaling() -> ScalingTriple {
        ScalingTriple::new(1000, 1e-6, 0.1, 0.1).unwrap()
    }

    fn linear() -> ModelSpec {
        presets::linear_birth(scaling())
    }

    #[test]
    fn equilibrium_constant_rates() {
        let spec = ModelSpec::new(
            TraitSpace::new(0.0, 1.0).unwrap(),
            RateFunctions::new(
                parse("2").unwrap(),
                parse("1").unwrap(),
                parse("1").unwrap(),
                parse("1").unwrap(),
            )
            .unwrap(),
            MutationKernel::symmetric_nearest(),
            0.5,
            scaling(),
        )
        .unwrap();
        assert_eq!(equilibrium_mass(&spec, 0.5).unwrap(), 1.0);
    }

    #[test]
    fn equilibrium_linear_birth_endpoints() {
        let spec = linear();
        assert!((equilibrium_mass(&spec, 0.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((equilibrium_mass(&spec, 1.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fitness_vanishes_on_diagonal() {
        let spec = linear();
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            assert!(invasion_fitness(&spec, x, x).unwrap().abs() <= 1e-12);
        }
    }

    #[test]
    fn fitness_example_values() {
        let spec = linear();
        assert!((invasion_fitness(&spec, 0.1, 0.0).unwrap() - 0.05).abs() < 1e-12);
        let pair = presets::symmetric_pair(scaling());
        assert!((invasion_fitness(&pair, 0.5, 0.0).unwrap() - 0.5).abs() < 1e-12);
        assert!((invasion_fitness(&pair, 0.0, 0.5).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn gradient_linear_birth_is_half() {
        let spec = linear();
        for i in 0..=10 {
            let x = i as f64 / 10.0;
            assert!((fitness_gradient(&spec, x).unwrap() - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_constant_rates_is_zero() {
        let spec = presets::symmetric_pair(scaling());
        // c has d1 c(x,x) = -4(x-y)|_{y=x} = 0, b and d constant
        assert!(fitness_gradient(&spec, 0.3).unwrap().abs() < 1e-12);
    }

    #[test]
    fn gradient_quadratic_birth() {
        let spec = ModelSpec::new(
            TraitSpace::new(0.0, 1.0).unwrap(),
            RateFunctions::new(
                parse("1 + x^2").unwrap(),
                parse("0.5").unwrap(),
                parse("1").unwrap(),
                parse("1").unwrap(),
            )
            .unwrap(),
            MutationKernel::symmetric_nearest(),
            0.3,
            scaling(),
        )
        .unwrap();
        assert!((fitness_gradient(&spec, 0.3).unwrap() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let spec = linear();
        let pair = presets::symmetric_pair(scaling());
        for s in [&spec, &pair] {
            for i in 1..10 {
                let x = i as f64 / 10.0;
                let h = 1e-6;
                let fd = (invasion_fitness(s, x + h, x).unwrap()
                    - invasion_fitness(s, x - h, x).unwrap())
                    / (2.0 * h);
                let ad = fitness_gradient(s, x).unwrap();
                let denom = ad.abs().max(1e-9);
                assert!((fd - ad).abs() / denom < 1e-6, "x={x} fd={fd} ad={ad}");
            }
        }
    }

    #[test]
    fn coexistence_symmetric_pair() {
        let spec = presets::symmetric_pair(scaling());
        assert_eq!(
            coexistence_check(&spec, 0.0, 0.5).unwrap(),
            Coexistence::Coexist
        );
    }

    #[test]
    fn coexistence_linear_birth_direction() {
        let spec = linear();
        // f(0.1, 0) = 0.05 > 0, f(0, 0.1) = 1 - 0.5 - 0.55 = -0.05 < 0
        assert_eq!(
            coexistence_check(&spec, 0.0, 0.1).unwrap(),
            Coexistence::YExcludesX
        );
        assert_eq!(
            coexistence_check(&spec, 0.1, 0.0).unwrap(),
            Coexistence::XExcludesY
        );
    }

    #[test]
    fn coexistence_antisymmetric_property() {
        let spec = presets::symmetric_pair(scaling());
        let lin = linear();
        for (s, pts) in [(&spec, [(0.0, 0.5)]), (&lin, [(0.0, 0.1)])] {
            for &(x, y) in &pts {
                let fwd = coexistence_check(s, x, y).unwrap();
                let rev = coexistence_check(s, y, x).unwrap();
                let expected = match fwd {
                    Coexistence::YExcludesX => Coexistence::XExcludesY,
                    Coexistence::XExcludesY => Coexistence::YExcludesX,
                    other => other,
                };
                assert_eq!(rev, expected);
            }
        }
    }

    #[test]
    fn degenerate_on_diagonal_tie() {
        let spec = linear();
        // same trait twice: both fitnesses are exactly 0
        assert_eq!(
            coexistence_check(&spec, 0.4, 0.4).unwrap(),
            Coexistence::Degenerate
        );
    }

    #[test]
    fn cead_rhs_unit_example() {
        // b = 2+x, d = 1, c = 1: at x=0 zbar = 1, grad = 1, m = 1 and the
        // uniform {-1,+1} kernel leaves only the h=+1 term: 1*[1]_+*1/2
        let spec = ModelSpec::new(
            TraitSpace::new(0.0, 1.0).unwrap(),
            RateFunctions::new(
                parse("2 + x").unwrap(),
                parse("1").unwrap(),
                parse("1").unwrap(),
                parse("1").unwrap(),
            )
            .unwrap(),
            MutationKernel::symmetric_nearest(),
            0.5,
            scaling(),
        )
        .unwrap();
        assert!((cead_rhs(&spec, 0.0).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cead_rhs_zero_gradient() {
        let spec = presets::symmetric_pair(scaling());
        assert_eq!(cead_rhs(&spec, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn cead_rhs_linear_birth_closed_form() {
        let spec = linear();
        for i in 0..=10 {
            let x = i as f64 / 10.0;
            let expected = 0.125 * (1.0 + x);
            assert!((cead_rhs(&spec, x).unwrap() - expected).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn cead_rhs_symmetric_matches_half_variance() {
        let spec = linear();
        for i in 0..=20 {
            let x = i as f64 / 20.0;
            let zbar = equilibrium_mass(&spec, x).unwrap();
            let grad = fitness_gradient(&spec, x).unwrap();
            let m = spec.rates.mutation_prob.eval(x, None).unwrap();
            let mut half_var = 0.0;
            for h in spec.kernel.jumps() {
                let w = spec.kernel.weight_at(x, h).unwrap();
                half_var += 0.5 * (h as f64).powi(2) * m * zbar * grad * w;
            }
            assert!((cead_rhs(&spec, x).unwrap() - half_var).abs() < 1e-12);
        }
    }

    #[test]
    fn invasion_prob_first_order_examples() {
        let spec = linear();
        // q(+1) = 0.5 / 1.0 at x = 0
        assert!((invasion_prob_first_order(&spec, 0.0, 1).unwrap() - 0.5).abs() < 1e-12);
        // deleterious direction
        assert_eq!(invasion_prob_first_order(&spec, 0.0, -1).unwrap(), 0.0);
        // zero gradient
        let pair = presets::symmetric_pair(scaling());
        assert_eq!(invasion_prob_first_order(&pair, 0.3, 1).unwrap(), 0.0);
        assert_eq!(invasion_prob_first_order(&pair, 0.3, -1).unwrap(), 0.0);
    }

    #[test]
    fn cead_sign_follows_gradient() {
        let spec = linear();
        for i in 0..=10 {
            let x = i as f64 / 10.0;
            let rhs = cead_rhs(&spec, x).unwrap();
            let grad = fitness_gradient(&spec, x).unwrap();
            assert_eq!(rhs.signum(), grad.signum());
        }
    }
}
