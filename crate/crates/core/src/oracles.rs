//! Exact closed forms for linear birth-death processes and nearest-neighbour
//! Markov chains: hitting probabilities, expected absorption times, extinction
//! time distributions, the occupation-time Laplace transform, and ruin
//! probabilities for weakly biased walks. A seeded Monte Carlo validator
//! estimates the same quantities by simulation so every formula can be checked
//! against an independent route.
//!
//! Geometric sums are evaluated through `expm1`/`ln` forms (switching to a
//! ratio-of-tails form when `(d/b)^k` would overflow), so levels up to the
//! `eps * sigma * K` range stay accurate.

use crate::rng::SimRng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum OracleError {
    #[error("invalid branching parameters: {0}")]
    Params(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("the critical case b = d is not covered by this closed form")]
    UnsupportedCritical,
}

/// Per-capita birth and death rates of a linear branching process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchingParams {
    pub birth: f64,
    pub death: f64,
}

impl BranchingParams {
    pub fn new(birth: f64, death: f64) -> Result<Self, OracleError> {
        if !(birth >= 0.0) || !(death >= 0.0) || !(birth + death > 0.0) {
            return Err(OracleError::Params(format!(
                "need b >= 0, d >= 0, b + d > 0; got b = {birth}, d = {death}"
            )));
        }
        Ok(Self { birth, death })
    }

    fn ratio(&self) -> f64 {
        self.death / self.birth
    }
}

/// relative window around `d/b = 1` treated as critical
const CRITICAL_TOL: f64 = 1e-12;

/// `(r^j - 1) / (r^k - 1)` for `0 <= j <= k`, `r >= 0`, evaluated stably.
/// At `r = 1` (within [`CRITICAL_TOL`]) returns the limit `j / k`.
fn geometric_ratio(r: f64, j: u64, k: u64) -> f64 {
    debug_assert!(j <= k && k >= 1);
    if j == 0 {
        return 0.0;
    }
    if j == k {
        return 1.0;
    }
    if (r - 1.0).abs() < CRITICAL_TOL {
        return j as f64 / k as f64;
    }
    if r == 0.0 {
        // pure upward drift: absorption at the top is certain
        return 1.0;
    }
    let ln_r = r.ln();
    let lj = j as f64 * ln_r;
    let lk = k as f64 * ln_r;
    if lk < 700.0 {
        lj.exp_m1() / lk.exp_m1()
    } else {
        // r^k overflows: divide through by r^k
        (lj - lk).exp() * (-(-lj).exp_m1()) / (-(-lk).exp_m1())
    }
}

/// Probability that a linear birth-death process started from `j` individuals
/// reaches level `k` before extinction:
/// `P_j[tau_k < tau_0] = ((d/b)^j - 1) / ((d/b)^k - 1)`,
/// with the limit `j/k` in the critical case `b = d`.
pub fn bd_hitting_prob(
    p: BranchingParams,
    j: u64,
    k: u64,
) -> Result<f64, OracleError> {
    if k < 1 || j > k {
        return Err(OracleError::Precondition(format!(
            "need 0 <= j <= k and k >= 1; got j = {j}, k = {k}"
        )));
    }
    if j == k {
        return Ok(1.0);
    }
    if j == 0 {
        return Ok(0.0);
    }
    if p.birth == 0.0 {
        // pure death never climbs
        return Ok(0.0);
    }
    Ok(geometric_ratio(p.ratio(), j, k).clamp(0.0, 1.0))
}

/// Large-`k` limit of the single-ancestor hitting probability together with
/// its error bound: `([b-d]_+ / b, 1/k)`, satisfying
/// `|P_1[tau_k < tau_0] - limit| <= 1/k`.
pub fn invasion_prob_limit(p: BranchingParams, k: u64) -> Result<(f64, f64), OracleError> {
    if p.birth <= 0.0 {
        return Err(OracleError::Precondition("need b > 0".into()));
    }
    if k < 1 {
        return Err(OracleError::Precondition("need k >= 1".into()));
    }
    let limit = (p.birth - p.death).max(0.0) / p.birth;
    let bound = 1.0 / k as f64;
    debug_assert!(
        (bd_hitting_prob(p, 1, k)? - limit).abs() <= bound + 1e-15,
        "limit consistency violated"
    );
    Ok((limit, bound))
}

/// Expected time to absorption (at level `k` or at 0) from `n` individuals:
///
/// ```text
/// e_n = 1/(b-d) [ sum_{j=1..k} (1/j) ((d/b)^(k-j) - 1)(1 - (d/b)^n) / ((d/b)^k - 1)
///               + sum_{j=1..n} (1/j) ((d/b)^(n-j) - 1) ]
/// ```
///
/// Requires `b > 0` and `b != d`; the critical case has no such closed form
/// here and is reported as unsupported.
pub fn expected_absorption_time(
    p: BranchingParams,
    n: u64,
    k: u64,
) -> Result<f64, OracleError> {
    if n < 1 || n > k {
        return Err(OracleError::Precondition(format!(
            "need 1 <= n <= k; got n = {n}, k = {k}"
        )));
    }
    if p.birth == 0.0 {
        return Err(OracleError::Precondition(
            "closed form requires b > 0".into(),
        ));
    }
    let r = p.ratio();
    if (r - 1.0).abs() < CRITICAL_TOL {
        return Err(OracleError::UnsupportedCritical);
    }
    let inv_gap = 1.0 / (p.birth - p.death);

    // (r^(k-j) - 1) / (r^k - 1), stable for r > 1 via tail form
    let boundary_ratio = |j: u64| -> f64 {
        if r > 1.0 {
            let ln_r = r.ln();
            let a = (-(j as f64) * ln_r).exp();
            let b_ = (-(k as f64) * ln_r).exp();
            (a - b_) / (1.0 - b_)
        } else {
            let num = ((k - j) as f64 * r.ln()).exp_m1();
            let den = (k as f64 * r.ln()).exp_m1();
            num / den
        }
    };

    let rn = (n as f64 * r.ln()).exp();
    let mut first = 0.0;
    for j in 1..=k {
        first += boundary_ratio(j) * (1.0 - rn) / j as f64;
    }
    let mut second = 0.0;
    for j in 1..=n {
        second += (((n - j) as f64) * r.ln()).exp_m1() / j as f64;
    }
    let e_n = inv_gap * (first + second);
    if n == 1 {
        let bound = (1.0 + (k as f64).ln()) / p.birth;
        debug_assert!(e_n <= bound * (1.0 + 1e-9), "e_1 = {e_n} exceeds {bound}");
    }
    Ok(e_n)
}

/// Upper bound `(1 + ln k) / eps` for the worst-case ratio of expected
/// absorption time to success probability of a slightly supercritical
/// process with `b = d + eps`.
pub fn conditioned_time_ratio_bound(eps: f64, k: u64) -> Result<f64, OracleError> {
    if !(eps > 0.0) {
        return Err(OracleError::Precondition("need eps > 0".into()));
    }
    if k < 1 {
        return Err(OracleError::Precondition("need k >= 1".into()));
    }
    Ok((1.0 + (k as f64).ln()) / eps)
}

/// Distribution function of the extinction time started from `n` individuals:
/// `P_n[tau_0 <= t] = ((d - d e^((d-b)t)) / (b - d e^((d-b)t)))^n` for `b != d`.
pub fn extinction_time_cdf(
    p: BranchingParams,
    n: u64,
    t: f64,
) -> Result<f64, OracleError> {
    if n < 1 {
        return Err(OracleError::Precondition("need n >= 1".into()));
    }
    if !(t >= 0.0) {
        return Err(OracleError::Precondition("need t >= 0".into()));
    }
    let (b, d) = (p.birth, p.death);
    if (b - d).abs() < CRITICAL_TOL * (b + d) {
        return Err(OracleError::UnsupportedCritical);
    }
    if d == 0.0 {
        return Ok(0.0);
    }
    let x = (d - b) * t;
    let base = if x <= 0.0 {
        let e = x.exp();
        (d - d * e) / (b - d * e)
    } else {
        // subcritical with large t: divide through by e^x
        let e = (-x).exp();
        (d * e - d) / (b * e - d)
    };
    let value = base.powi(i32::try_from(n).map_err(|_| {
        OracleError::Precondition("n too large".into())
    })?);
    Ok(value.clamp(0.0, 1.0))
}

/// Laplace transform `G(lambda) = E[exp(-lambda * total occupation)]` of the
/// lifetime-integrated population of a single line,
/// the root of `b G^2 - (b+d+lambda) G + d = 0` selected by `G(0) = min(1, d/b)`:
/// `G = (b+d+lambda - sqrt((b+d+lambda)^2 - 4bd)) / (2b)`.
pub fn occupation_laplace(p: BranchingParams, lambda: f64) -> Result<f64, OracleError> {
    if !(lambda >= 0.0) {
        return Err(OracleError::Precondition("need lambda >= 0".into()));
    }
    if p.birth <= 0.0 {
        return Err(OracleError::Precondition("need b > 0".into()));
    }
    let s = p.birth + p.death + lambda;
    let disc = (s * s - 4.0 * p.birth * p.death).max(0.0).sqrt();
    // rationalized root avoids cancellation for large lambda
    Ok(2.0 * p.death / (s + disc))
}

/// Exit probability of the density-dependent chain with transition
/// probabilities `p(i, i±1) = 1/2 ∓ (c1 i / K - c2 eps sigma)`: the chance of
/// hitting level `ceil(m_const * eps * sigma * K)` before 0 when started
/// from `a`, via the exact reversibility ratio
/// `h(a) = sum_{i<=a} prod_{j<i} rho(j) / sum_{i<=N} prod_{j<i} rho(j)`
/// with `rho(j) = p(j,j-1)/p(j,j+1)`, accumulated in log space.
#[allow(clippy::too_many_arguments)]
pub fn chain_exit_prob(
    c1: f64,
    c2: f64,
    eps: f64,
    sigma: f64,
    population: u64,
    a: u64,
    m_const: f64,
) -> Result<f64, OracleError> {
    let k = population as f64;
    let top = (m_const * eps * sigma * k).ceil();
    if !(top >= 2.0) || !top.is_finite() {
        return Err(OracleError::Precondition(format!(
            "level ceil(M eps sigma K) = {top} must be >= 2"
        )));
    }
    let top = top as u64;
    if a == 0 || a >= top {
        return Err(OracleError::Precondition(format!(
            "need 0 < a < {top}, got a = {a}"
        )));
    }
    let up = |i: u64| 0.5 - (c1 * i as f64 / k - c2 * eps * sigma);
    let down = |i: u64| 0.5 + (c1 * i as f64 / k - c2 * eps * sigma);
    for i in 1..=top {
        let (pu, pd) = (up(i), down(i));
        if !(pu > 0.0 && pu < 1.0 && pd > 0.0 && pd < 1.0) {
            return Err(OracleError::Params(format!(
                "transition probability out of (0,1) at i = {i}: up = {pu}, down = {pd}"
            )));
        }
    }
    // log-weights S_i = sum_{j=1}^{i-1} ln rho(j); S_1 = 0
    let mut log_weights = Vec::with_capacity(top as usize);
    let mut acc = 0.0;
    for i in 1..=top {
        log_weights.push(acc);
        acc += (down(i) / up(i)).ln();
    }
    let max_lw = log_weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut num = 0.0;
    let mut den = 0.0;
    for (idx, &lw) in log_weights.iter().enumerate() {
        let w = (lw - max_lw).exp();
        den += w;
        if (idx as u64) < a {
            num += w;
        }
    }
    Ok(num / den)
}

/// Ruin probability of the constant-bias walk with up-probability
/// `1/2 + c sigma`: chance of hitting `hi` before `lo` from `start`.
pub fn biased_walk_ruin(
    c: f64,
    sigma: f64,
    start: i64,
    lo: i64,
    hi: i64,
) -> Result<f64, OracleError> {
    if !(lo <= start && start <= hi && lo < hi) {
        return Err(OracleError::Precondition(format!(
            "need lo <= start <= hi, lo < hi; got {lo} <= {start} <= {hi}"
        )));
    }
    let bias = c * sigma;
    if !(bias.abs() < 0.5) {
        return Err(OracleError::Precondition(format!(
            "need |c sigma| < 1/2, got {bias}"
        )));
    }
    if start == hi {
        return Ok(1.0);
    }
    if start == lo {
        return Ok(0.0);
    }
    let p_up = 0.5 + bias;
    let r = (0.5 - bias) / p_up;
    let j = (start - lo) as u64;
    let span = (hi - lo) as u64;
    Ok(geometric_ratio(r, j, span).clamp(0.0, 1.0))
}

/// Empirical estimates from simulated birth-death paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub trials: u64,
    pub hit_hi_prob: f64,
    /// binomial standard error of `hit_hi_prob`
    pub hit_hi_se: f64,
    pub mean_absorption_time: f64,
    /// CLT standard error of the mean absorption time
    pub absorption_time_se: f64,
}

/// Monte Carlo validator: simulate `trials` linear birth-death paths from
/// `n0` until the count leaves `(lo, hi)`, reporting the empirical hit
/// probability of `hi` and the mean absorption time with standard errors.
/// Deterministic for a fixed seed.
pub fn mc_birth_death(
    p: BranchingParams,
    n0: u64,
    absorb: (u64, u64),
    rng: &mut SimRng,
    trials: u64,
) -> Result<McEstimate, OracleError> {
    let (lo, hi) = absorb;
    if trials < 1 {
        return Err(OracleError::Precondition("need trials >= 1".into()));
    }
    if !(lo < hi && lo <= n0 && n0 <= hi) {
        return Err(OracleError::Precondition(format!(
            "need lo <= n0 <= hi with lo < hi; got {lo} <= {n0} <= {hi}"
        )));
    }
    let mut hits = 0u64;
    let mut time_sum = 0.0;
    let mut time_sq_sum = 0.0;
    let total_per_cap = p.birth + p.death;
    let up_prob = p.birth / total_per_cap;
    for _ in 0..trials {
        let mut n = n0;
        let mut t = 0.0;
        while n > lo && n < hi {
            let rate = n as f64 * total_per_cap;
            t += rng.exponential(rate);
            if rng.uniform() < up_prob {
                n += 1;
            } else {
                n -= 1;
            }
        }
        if n >= hi {
            hits += 1;
        }
        time_sum += t;
        time_sq_sum += t * t;
    }
    let tf = trials as f64;
    let p_hat = hits as f64 / tf;
    let mean_t = time_sum / tf;
    let var_t = (time_sq_sum / tf - mean_t * mean_t).max(0.0);
    Ok(McEstimate {
        trials,
        hit_hi_prob: p_hat,
        hit_hi_se: (p_hat * (1.0 - p_hat) / tf).sqrt(),
        mean_absorption_time: mean_t,
        absorption_time_se: (var_t / tf).sqrt(),
    })
}
