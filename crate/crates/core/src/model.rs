//! Model specification and validity checks.
//!
//! A [`ModelSpec`] bundles the compact trait interval, the four rate
//! expressions `b, d, c, m`, the bounded integer-jump mutation kernel and the
//! scaling triple `(K, u, sigma, alpha)`. [`validate_model`] probes the rate
//! assumptions on a uniform grid and reports empirical bounds;
//! [`validate_scaling`] turns the asymptotic separation conditions between
//! population size, mutation probability and mutation step into finite-`K`
//! ratio diagnostics.

use crate::analytic;
use crate::expr::Expr;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ModelError {
    #[error("trait space requires lo < hi, got [{lo}, {hi}]")]
    EmptyTraitSpace { lo: f64, hi: f64 },
    #[error("initial trait {x0} outside trait space [{lo}, {hi}]")]
    InitialTraitOutside { x0: f64, lo: f64, hi: f64 },
    #[error("kernel weight vector must have length 2A+1 = {expected}, got {got}")]
    KernelLength { expected: usize, got: usize },
    #[error("kernel max jump A must be >= 1")]
    KernelEmpty,
    #[error("scaling parameter out of range: {0}")]
    Scaling(String),
    #[error("rate expression `{name}` must not reference y")]
    UnexpectedY { name: &'static str },
}

/// Compact trait interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraitSpace {
    pub lo: f64,
    pub hi: f64,
}

impl TraitSpace {
    pub fn new(lo: f64, hi: f64) -> Result<Self, ModelError> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(ModelError::EmptyTraitSpace { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn grid(&self, points: usize) -> impl Iterator<Item = f64> + '_ {
        let n = points.max(2);
        let step = (self.hi - self.lo) / (n - 1) as f64;
        (0..n).map(move |i| {
            if i == n - 1 {
                self.hi
            } else {
                self.lo + step * i as f64
            }
        })
    }
}

/// Per-jump weights: either one constant probability vector or one expression
/// in the parent trait per jump size.
#[derive(Debug, Clone)]
pub enum KernelWeights {
    Constant(Vec<f64>),
    Expressions(Vec<Expr>),
}

/// Mutation law on integer jumps `h` with `|h| <= A`. Index `i` of the weight
/// vector corresponds to `h = i - A`.
#[derive(Debug, Clone)]
pub struct MutationKernel {
    pub max_jump: u32,
    pub weights: KernelWeights,
}

impl MutationKernel {
    pub fn new(max_jump: u32, weights: KernelWeights) -> Result<Self, ModelError> {
        if max_jump == 0 {
            return Err(ModelError::KernelEmpty);
        }
        let expected = 2 * max_jump as usize + 1;
        let got = match &weights {
            KernelWeights::Constant(v) => v.len(),
            KernelWeights::Expressions(v) => v.len(),
        };
        if got != expected {
            return Err(ModelError::KernelLength { expected, got });
        }
        Ok(Self { max_jump, weights })
    }

    /// Uniform law on `{-1, +1}`.
    pub fn symmetric_nearest() -> Self {
        Self {
            max_jump: 1,
            weights: KernelWeights::Constant(vec![0.5, 0.0, 0.5]),
        }
    }

    /// Raw weight of jump `h` at parent trait `x` (no boundary handling).
    pub fn weight_at(&self, x: f64, h: i32) -> Result<f64, crate::expr::EvalError> {
        let a = self.max_jump as i32;
        debug_assert!(h >= -a && h <= a);
        let idx = (h + a) as usize;
        match &self.weights {
            KernelWeights::Constant(v) => Ok(v[idx]),
            KernelWeights::Expressions(v) => v[idx].eval(x, None),
        }
    }

    pub fn jumps(&self) -> impl Iterator<Item = i32> {
        let a = self.max_jump as i32;
        -a..=a
    }
}

/// Birth, natural death, competition and mutation-probability expressions.
/// `b`, `d`, `m` are functions of `x`; the competition kernel `c` may use both
/// `x` (focal) and `y` (competitor).
#[derive(Debug, Clone)]
pub struct RateFunctions {
    pub birth: Expr,
    pub death: Expr,
    pub competition: Expr,
    pub mutation_prob: Expr,
}

impl RateFunctions {
    pub fn new(
        birth: Expr,
        death: Expr,
        competition: Expr,
        mutation_prob: Expr,
    ) -> Result<Self, ModelError> {
        for (name, e) in [("b", &birth), ("d", &death), ("m", &mutation_prob)] {
            if e.uses_y() {
                return Err(ModelError::UnexpectedY { name });
            }
        }
        Ok(Self {
            birth,
            death,
            competition,
            mutation_prob,
        })
    }
}

/// Population-size, mutation-probability and mutation-step scales.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingTriple {
    pub population: u64,
    pub mutation_rate_scale: f64,
    pub mutation_step: f64,
    pub alpha: f64,
}

impl ScalingTriple {
    pub fn new(population: u64, u: f64, sigma: f64, alpha: f64) -> Result<Self, ModelError> {
        if population == 0 {
            return Err(ModelError::Scaling("K must be >= 1".into()));
        }
        if !(u > 0.0 && u <= 1.0) {
            return Err(ModelError::Scaling(format!("u must be in (0, 1], got {u}")));
        }
        if !(sigma > 0.0 && sigma <= 1.0) {
            return Err(ModelError::Scaling(format!(
                "sigma must be in (0, 1], got {sigma}"
            )));
        }
        if !(alpha > 0.0 && alpha < 0.5) {
            return Err(ModelError::Scaling(format!(
                "alpha must be in (0, 1/2), got {alpha}"
            )));
        }
        Ok(Self {
            population,
            mutation_rate_scale: u,
            mutation_step: sigma,
            alpha,
        })
    }

    /// Model-time horizon corresponding to a rescaled horizon `t`:
    /// `t / (K u sigma^2)`.
    pub fn model_time(&self, rescaled: f64) -> f64 {
        rescaled
            / (self.population as f64 * self.mutation_rate_scale * self.mutation_step.powi(2))
    }

    /// Rescaled time corresponding to a model time `t`: `t * K u sigma^2`.
    pub fn rescaled_time(&self, model: f64) -> f64 {
        model * self.population as f64 * self.mutation_rate_scale * self.mutation_step.powi(2)
    }
}

/// Full model description; immutable after construction and safe to share
/// across worker threads.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub space: TraitSpace,
    pub rates: RateFunctions,
    pub kernel: MutationKernel,
    pub initial_trait: f64,
    pub scaling: ScalingTriple,
}

impl ModelSpec {
    pub fn new(
        space: TraitSpace,
        rates: RateFunctions,
        kernel: MutationKernel,
        initial_trait: f64,
        scaling: ScalingTriple,
    ) -> Result<Self, ModelError> {
        if !space.contains(initial_trait) {
            return Err(ModelError::InitialTraitOutside {
                x0: initial_trait,
                lo: space.lo,
                hi: space.hi,
            });
        }
        Ok(Self {
            space,
            rates,
            kernel,
            initial_trait,
            scaling,
        })
    }

    /// Kernel restricted to jumps that keep `x + sigma h` inside the trait
    /// space, renormalized to total mass one. Returns an empty list when every
    /// jump would exit (no mutation possible from `x`).
    pub fn admissible_kernel_at(&self, x: f64) -> Vec<(i32, f64)> {
        let sigma = self.scaling.mutation_step;
        let mut kept: Vec<(i32, f64)> = Vec::new();
        let mut total = 0.0;
        for h in self.kernel.jumps() {
            if h == 0 {
                continue;
            }
            let target = x + sigma * h as f64;
            if !self.space.contains(target) {
                continue;
            }
            let w = match self.kernel.weight_at(x, h) {
                Ok(w) if w > 0.0 => w,
                _ => continue,
            };
            kept.push((h, w));
            total += w;
        }
        if total <= 0.0 {
            return Vec::new();
        }
        for entry in &mut kept {
            entry.1 /= total;
        }
        kept
    }
}

/// Outcome of one named assumption check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// grid point witnessing a failure (or the extremal point for bounds)
    pub witness: Option<f64>,
    pub detail: String,
}

/// Grid-based validation report with the empirical rate bounds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub grid_points: usize,
    pub checks: Vec<CheckResult>,
    pub birth_max: f64,
    pub death_max: f64,
    pub competition_max: f64,
    pub self_competition_min: f64,
    pub growth_min: f64,
    pub gradient_min_abs: f64,
    pub gradient_sign: i8,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// Upper bound for the total population mass used as the blow-up guard:
    /// `4 * birth_max / self_competition_min`.
    pub fn mass_bound(&self) -> f64 {
        if self.self_competition_min > 0.0 {
            4.0 * self.birth_max / self.self_competition_min
        } else {
            f64::INFINITY
        }
    }
}

const CONST_KERNEL_TOL: f64 = 1e-12;
const EXPR_KERNEL_TOL: f64 = 1e-9;

/// Probe every model assumption on a uniform grid (product grid for the
/// competition kernel). Expression domain errors become check failures, never
/// panics. Deterministic for a fixed `(spec, grid_points)`.
pub fn validate_model(spec: &ModelSpec, grid_points: usize) -> ValidationReport {
    let grid: Vec<f64> = spec.space.grid(grid_points.max(2)).collect();
    let mut checks = Vec::new();

    let mut birth_max = f64::NEG_INFINITY;
    let mut death_max = f64::NEG_INFINITY;
    let mut competition_max = f64::NEG_INFINITY;
    let mut self_competition_min = f64::INFINITY;
    let mut growth_min = f64::INFINITY;

    // (i) bounded nonnegative rates b, d
    for (name, expr, max_acc) in [
        ("b bounded and nonnegative", &spec.rates.birth, &mut birth_max),
        ("d bounded and nonnegative", &spec.rates.death, &mut death_max),
    ] {
        let mut failure: Option<(f64, String)> = None;
        for &x in &grid {
            match expr.eval(x, None) {
                Ok(v) if v >= 0.0 => *max_acc = max_acc.max(v),
                Ok(v) => {
                    failure = Some((x, format!("negative rate {v}")));
                    break;
                }
                Err(e) => {
                    failure = Some((x, e.to_string()));
                    break;
                }
            }
        }
        checks.push(match failure {
            None => CheckResult {
                name: name.into(),
                passed: true,
                witness: None,
                detail: format!("max over grid = {max_acc}"),
            },
            Some((x, why)) => CheckResult {
                name: name.into(),
                passed: false,
                witness: Some(x),
                detail: why,
            },
        });
    }

    // (i) bounded nonnegative competition kernel on the product grid
    {
        let mut failure: Option<(f64, String)> = None;
        'outer: for &x in &grid {
            for &y in &grid {
                match spec.rates.competition.eval(x, Some(y)) {
                    Ok(v) if v >= 0.0 => competition_max = competition_max.max(v),
                    Ok(v) => {
                        failure = Some((x, format!("negative competition {v} at y={y}")));
                        break 'outer;
                    }
                    Err(e) => {
                        failure = Some((x, format!("{e} at y={y}")));
                        break 'outer;
                    }
                }
            }
        }
        checks.push(match failure {
            None => CheckResult {
                name: "c bounded and nonnegative".into(),
                passed: true,
                witness: None,
                detail: format!("max over product grid = {competition_max}"),
            },
            Some((x, why)) => CheckResult {
                name: "c bounded and nonnegative".into(),
                passed: false,
                witness: Some(x),
                detail: why,
            },
        });
    }

    // (ii) positive growth b - d > 0
    {
        let mut worst: Option<(f64, f64)> = None;
        let mut failure: Option<(f64, String)> = None;
        for &x in &grid {
            let g = spec
                .rates
                .birth
                .eval(x, None)
                .and_then(|b| spec.rates.death.eval(x, None).map(|d| b - d));
            match g {
                Ok(g) => {
                    growth_min = growth_min.min(g);
                    if worst.map_or(true, |(_, w)| g < w) {
                        worst = Some((x, g));
                    }
                }
                Err(e) => {
                    failure = Some((x, e.to_string()));
                    break;
                }
            }
        }
        let check = if let Some((x, why)) = failure {
            CheckResult {
                name: "b - d > 0".into(),
                passed: false,
                witness: Some(x),
                detail: why,
            }
        } else {
            let (x, g) = worst.expect("nonempty grid");
            CheckResult {
                name: "b - d > 0".into(),
                passed: g > 0.0,
                witness: Some(x),
                detail: format!("min over grid = {g}"),
            }
        };
        checks.push(check);
    }

    // (ii) self-competition bounded away from zero
    {
        let mut worst: Option<(f64, f64)> = None;
        let mut failure: Option<(f64, String)> = None;
        for &x in &grid {
            match spec.rates.competition.eval(x, Some(x)) {
                Ok(v) => {
                    self_competition_min = self_competition_min.min(v);
                    if worst.map_or(true, |(_, w)| v < w) {
                        worst = Some((x, v));
                    }
                }
                Err(e) => {
                    failure = Some((x, e.to_string()));
                    break;
                }
            }
        }
        let check = if let Some((x, why)) = failure {
            CheckResult {
                name: "c(x,x) >= c_min > 0".into(),
                passed: false,
                witness: Some(x),
                detail: why,
            }
        } else {
            let (x, v) = worst.expect("nonempty grid");
            CheckResult {
                name: "c(x,x) >= c_min > 0".into(),
                passed: v > 0.0,
                witness: Some(x),
                detail: format!("min over grid = {v}"),
            }
        };
        checks.push(check);
    }

    // mutation probability in [0, 1]
    {
        let mut failure: Option<(f64, String)> = None;
        for &x in &grid {
            match spec.rates.mutation_prob.eval(x, None) {
                Ok(v) if (0.0..=1.0).contains(&v) => {}
                Ok(v) => {
                    failure = Some((x, format!("m = {v} outside [0, 1]")));
                    break;
                }
                Err(e) => {
                    failure = Some((x, e.to_string()));
                    break;
                }
            }
        }
        checks.push(CheckResult {
            name: "0 <= m <= 1".into(),
            passed: failure.is_none(),
            witness: failure.as_ref().map(|f| f.0),
            detail: failure
                .map(|f| f.1)
                .unwrap_or_else(|| "within [0, 1] on grid".into()),
        });
    }

    // (iii) kernel weights nonnegative and normalized
    {
        let tol = match spec.kernel.weights {
            KernelWeights::Constant(_) => CONST_KERNEL_TOL,
            KernelWeights::Expressions(_) => EXPR_KERNEL_TOL,
        };
        let probe: Vec<f64> = match spec.kernel.weights {
            // a constant vector needs a single probe
            KernelWeights::Constant(_) => vec![spec.space.lo],
            KernelWeights::Expressions(_) => grid.clone(),
        };
        let mut failure: Option<(f64, String)> = None;
        'kernel: for &x in &probe {
            let mut sum = 0.0;
            for h in spec.kernel.jumps() {
                match spec.kernel.weight_at(x, h) {
                    Ok(w) if w >= 0.0 => sum += w,
                    Ok(w) => {
                        failure = Some((x, format!("negative weight {w} at h={h}")));
                        break 'kernel;
                    }
                    Err(e) => {
                        failure = Some((x, format!("{e} at h={h}")));
                        break 'kernel;
                    }
                }
            }
            if (sum - 1.0).abs() > tol {
                failure = Some((x, format!("weights sum to {sum}, expected 1")));
                break;
            }
        }
        checks.push(CheckResult {
            name: "kernel weights normalized".into(),
            passed: failure.is_none(),
            witness: failure.as_ref().map(|f| f.0),
            detail: failure
                .map(|f| f.1)
                .unwrap_or_else(|| format!("sum within {tol} of 1")),
        });
    }

    // fitness gradient: nonzero with uniform sign (needs z > 0, so skip detail
    // when the equilibrium itself is broken; that already failed above)
    let mut gradient_min_abs = f64::INFINITY;
    let mut gradient_sign: i8 = 0;
    {
        let mut failure: Option<(f64, String)> = None;
        let mut min_point = spec.space.lo;
        let mut saw_pos = false;
        let mut saw_neg = false;
        for &x in &grid {
            match analytic::fitness_gradient(spec, x) {
                Ok(g) => {
                    if g.abs() < gradient_min_abs {
                        gradient_min_abs = g.abs();
                        min_point = x;
                    }
                    if g > 0.0 {
                        saw_pos = true;
                    } else if g < 0.0 {
                        saw_neg = true;
                    } else {
                        failure = Some((x, "fitness gradient vanishes".into()));
                        break;
                    }
                }
                Err(e) => {
                    failure = Some((x, e.to_string()));
                    break;
                }
            }
        }
        if failure.is_none() && saw_pos && saw_neg {
            failure = Some((min_point, "fitness gradient changes sign on grid".into()));
        }
        gradient_sign = if saw_pos && !saw_neg {
            1
        } else if saw_neg && !saw_pos {
            -1
        } else {
            0
        };
        checks.push(CheckResult {
            name: "fitness gradient nonzero with uniform sign".into(),
            passed: failure.is_none(),
            witness: Some(failure.as_ref().map(|f| f.0).unwrap_or(min_point)),
            detail: failure.map(|f| f.1).unwrap_or_else(|| {
                format!(
                    "min |grad| = {gradient_min_abs} at witness, sign {gradient_sign:+}"
                )
            }),
        });
    }

    ValidationReport {
        grid_points: grid.len(),
        checks,
        birth_max,
        death_max,
        competition_max,
        self_competition_min,
        growth_min,
        gradient_min_abs,
        gradient_sign,
    }
}

/// Finite-`K` diagnostics for the asymptotic separation conditions.
///
/// The limit statements compare scales via `<<`, which is not checkable at a
/// single `K`; each `<<` is operationalized as a ratio that must fall below a
/// user margin (default 0.5 on both).
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct ScalingReport {
    /// `K^(-1/2+alpha) / sigma` — population noise below mutation step
    pub r1: f64,
    /// `sigma / 1` — mutation step small
    pub r2: f64,
    /// `exp(-K^alpha) / u` — mutations not exponentially rare
    pub r3: f64,
    /// `u K ln K / sigma^(1+alpha)` — mutations rare enough for invasions to resolve
    pub r4: f64,
    pub margin_small: f64,
    pub margin_rare: f64,
    pub regime_consistent: bool,
}

pub fn validate_scaling(t: &ScalingTriple, margins: (f64, f64)) -> ScalingReport {
    let k = t.population as f64;
    let sigma = t.mutation_step;
    let u = t.mutation_rate_scale;
    let alpha = t.alpha;
    let r1 = k.powf(-0.5 + alpha) / sigma;
    let r2 = sigma;
    let r3 = (-k.powf(alpha)).exp() / u;
    let r4 = u * k * k.ln() / sigma.powf(1.0 + alpha);
    let (margin_small, margin_rare) = margins;
    ScalingReport {
        r1,
        r2,
        r3,
        r4,
        margin_small,
        margin_rare,
        regime_consistent: r1 <= margin_small && r3 <= margin_small && r4 <= margin_rare,
    }
}

/// Ready-made model specifications used by documentation, tests and the
/// experiment defaults.
pub mod presets {
    use super::*;
    use crate::expr::parse;

    /// Linear birth `b = 1 + 0.5 x`, constant death `0.5`, flat competition
    /// `1` and certain mutation on `{-1, +1}` over the unit interval. The
    /// equilibrium mass is `(1+x)/2` and the fitness gradient is `0.5`
    /// everywhere.
    pub fn linear_birth(scaling: ScalingTriple) -> ModelSpec {
        ModelSpec::new(
            TraitSpace::new(0.0, 1.0).unwrap(),
            RateFunctions::new(
                parse("1 + 0.5*x").unwrap(),
                parse("0.5").unwrap(),
                parse("1").unwrap(),
                parse("1").unwrap(),
            )
            .unwrap(),
            MutationKernel::symmetric_nearest(),
            0.0,
            scaling,
        )
        .unwrap()
    }

    /// Same selection gradient as [`linear_birth`] but with a three times
    /// larger equilibrium mass, so the resident relaxes much faster than an
    /// invading line grows.
    pub fn fast_relaxation(scaling: ScalingTriple) -> ModelSpec {
        ModelSpec::new(
            TraitSpace::new(0.0, 1.0).unwrap(),
            RateFunctions::new(
                parse("2 + 0.5*x").unwrap(),
                parse("0.5").unwrap(),
                parse("1").unwrap(),
                parse("1").unwrap(),
            )
            .unwrap(),
            MutationKernel::symmetric_nearest(),
            0.0,
            scaling,
        )
        .unwrap()
    }

    /// Off-diagonal competition `c = 1 - 2 (x-y)^2`, flat growth `r = 1`.
    /// Traits `x = 0` and `y = 0.5` have mutual invasion fitness `0.5` and
    /// coexist at the interior equilibrium `(2/3, 2/3)`.
    pub fn symmetric_pair(scaling: ScalingTriple) -> ModelSpec {
        ModelSpec::new(
            TraitSpace::new(0.0, 1.0).unwrap(),
            RateFunctions::new(
                parse("2").unwrap(),
                parse("1").unwrap(),
                parse("1 - 2*(x-y)^2").unwrap(),
                parse("1").unwrap(),
            )
            .unwrap(),
            MutationKernel::symmetric_nearest(),
            0.0,
            scaling,
        )
        .unwrap()
    }

    /// A scaling triple that sits comfortably inside the joint regime at
    /// desk scale.
    pub fn default_scaling(k: u64) -> ScalingTriple {
        let kf = k as f64;
        let sigma = kf.powf(-0.3);
        let u = 0.1 * sigma.powf(1.2) / (kf * kf.ln());
        ScalingTriple::new(k, u, sigma, 0.1).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn scaling() -> ScalingTriple {
        ScalingTriple::new(1000, 1e-6, 0.1, 0.1).unwrap()
    }

    #[test]
    fn linear_birth_passes_validation() {
        let spec = presets::linear_birth(scaling());
        let report = validate_model(&spec, 101);
        assert!(report.all_passed(), "{:?}", report.failed().collect::<Vec<_>>());
        assert!((report.gradient_min_abs - 0.5).abs() < 1e-12);
        assert_eq!(report.gradient_sign, 1);
        assert!((report.birth_max - 1.5).abs() < 1e-12);
        assert!((report.growth_min - 0.5).abs() < 1e-12);
        assert!((report.self_competition_min - 1.0).abs() < 1e-12);
    }

    #[test]
    fn negative_growth_fails() {
        let spec = ModelSpec::new(
            TraitSpace::new(0.0, 1.0).unwrap(),
            RateFunctions::new(
                parse("1").unwrap(),
                parse("2").unwrap(),
                parse("1").unwrap(),
                parse("1").unwrap(),
            )
            .unwrap(),
            MutationKernel::symmetric_nearest(),
            0.5,
            scaling(),
        )
        .unwrap();
        let report = validate_model(&spec, 11);
        let failed: Vec<_> = report.failed().map(|c| c.name.clone()).collect();
        assert!(failed.iter().any(|n| n == "b - d > 0"), "{failed:?}");
    }

    #[test]
    fn vanishing_self_competition_fails_at_zero() {
        let spec = ModelSpec::new(
            TraitSpace::new(0.0, 1.0).unwrap(),
            RateFunctions::new(
                parse("2").unwrap(),
                parse("1").unwrap(),
                parse("x*y").unwrap(),
                parse("1").unwrap(),
            )
            .unwrap(),
            MutationKernel::symmetric_nearest(),
            0.5,
            scaling(),
        )
        .unwrap();
        let report = validate_model(&spec, 11);
        let check = report
            .checks
            .iter()
            .find(|c| c.name == "c(x,x) >= c_min > 0")
            .unwrap();
        assert!(!check.passed);
        assert_eq!(check.witness, Some(0.0));
    }

    #[test]
    fn validation_is_deterministic() {
        let spec = presets::linear_birth(scaling());
        let a = format!("{:?}", validate_model(&spec, 101));
        let b = format!("{:?}", validate_model(&spec, 101));
        assert_eq!(a, b);
    }

    #[test]
    fn admissible_kernel_interior_unchanged() {
        let spec = presets::linear_birth(scaling());
        let k = spec.admissible_kernel_at(0.5);
        assert_eq!(k, vec![(-1, 0.5), (1, 0.5)]);
    }

    #[test]
    fn admissible_kernel_renormalizes_at_boundary() {
        let spec = presets::linear_birth(scaling());
        let k = spec.admissible_kernel_at(1.0);
        assert_eq!(k, vec![(-1, 1.0)]);
    }

    #[test]
    fn admissible_kernel_empty_when_all_jumps_exit() {
        let mut spec = presets::linear_birth(scaling());
        // only +1 jumps possible, standing at the upper boundary
        spec.kernel = MutationKernel::new(1, KernelWeights::Constant(vec![0.0, 0.0, 1.0])).unwrap();
        assert!(spec.admissible_kernel_at(1.0).is_empty());
    }

    #[test]
    fn admissible_kernel_sums_to_one_property() {
        let spec = presets::linear_birth(scaling());
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            let k = spec.admissible_kernel_at(x);
            if !k.is_empty() {
                let sum: f64 = k.iter().map(|(_, w)| w).sum();
                assert!((sum - 1.0).abs() < 1e-12, "x={x} sum={sum}");
            }
        }
    }

    #[test]
    fn scaling_report_flags_inconsistent_sigma() {
        // K=1000, sigma=0.1, u=1e-6, alpha=0.1: r1 = 1000^-0.4 / 0.1 ~ 0.631
        let report = validate_scaling(&scaling(), (0.5, 0.5));
        assert!((report.r1 - 1000f64.powf(-0.4) / 0.1).abs() < 1e-15);
        assert!(report.r1 > 0.6 && report.r1 < 0.66);
        assert!(!report.regime_consistent);
    }

    #[test]
    fn scaling_report_large_k() {
        let t = ScalingTriple::new(1_000_000, 1e-10, 0.05, 0.05).unwrap();
        let report = validate_scaling(&t, (0.5, 0.5));
        assert!(report.r1.is_finite() && report.r3.is_finite() && report.r4.is_finite());
        // r1 = 10^(-2.7) / 0.05 ~ 0.0399, r4 small, r3 tiny: consistent
        assert!(report.regime_consistent, "{report:?}");
    }

    #[test]
    fn zero_u_rejected() {
        assert!(ScalingTriple::new(1000, 0.0, 0.1, 0.1).is_err());
    }

    #[test]
    fn x0_outside_rejected() {
        let err = ModelSpec::new(
            TraitSpace::new(0.0, 1.0).unwrap(),
            RateFunctions::new(
                parse("1").unwrap(),
                parse("0.5").unwrap(),
                parse("1").unwrap(),
                parse("1").unwrap(),
            )
            .unwrap(),
            MutationKernel::symmetric_nearest(),
            1.5,
            scaling(),
        );
        assert!(matches!(err, Err(ModelError::InitialTraitOutside { .. })));
    }
}
