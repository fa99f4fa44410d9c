//! The fractional Poisson measure on the nonnegative integers: weights,
//! Laplace transform, moments (closed form and direct summation), and the
//! auxiliary moment sequence that drives the generalized Appell algebra.
//!
//! The support is fixed to {0, 1, 2, ...}, so every integral against the
//! measure is a countable sum and the truncation policy below certifies
//! tails with a geometric bound once the summands decay.

use crate::combinatorics::StirlingTable;
use crate::error::{Error, Result};
use crate::gamma;
use crate::mittag_leffler::{self, MlConfig};
use num_complex::Complex64;
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

/// Parameters (lambda, beta) of the measure: rate `lambda > 0` and
/// fractional order `beta` in (0, 1]. At `beta = 1` the measure is the
/// ordinary Poisson distribution with rate lambda.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FpmParams {
    lambda: f64,
    beta: f64,
}

impl FpmParams {
    pub fn new(lambda: f64, beta: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!("lambda must be > 0, got {lambda}")));
        }
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::InvalidArgument(format!("beta must lie in (0, 1], got {beta}")));
        }
        Ok(FpmParams { lambda, beta })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub(crate) fn cache_key(&self) -> (u64, u64) {
        (self.lambda.to_bits(), self.beta.to_bits())
    }
}

/// Probability weight of {k}: lambda^k / k! * E_beta^(k)(-lambda).
///
/// Values are memoized per (lambda, beta, k) since the truncated-sum
/// oracles revisit the same weights many times.
pub fn pmf(params: &FpmParams, k: usize) -> Result<f64> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u64, usize), f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (params.lambda.to_bits(), params.beta.to_bits(), k);
    if let Some(&v) = cache.lock().unwrap().get(&key) {
        return Ok(v);
    }
    let v = mittag_leffler::pmf_value(params.beta, params.lambda, k)?;
    cache.lock().unwrap().insert(key, v);
    Ok(v)
}

/// Working-domain bound on |lambda (e^z - 1)|; beyond it the Taylor
/// summation of E_beta is not attempted.
pub const LAPLACE_ARG_BOUND: f64 = 30.0;

/// Laplace transform E_beta(lambda (e^z - 1)).
pub fn laplace_transform(params: &FpmParams, z: Complex64) -> Result<Complex64> {
    let arg = params.lambda * (z.exp() - 1.0);
    if !(arg.norm() <= LAPLACE_ARG_BOUND) {
        return Err(Error::Domain(format!(
            "|lambda(e^z - 1)| = {} exceeds the working domain {LAPLACE_ARG_BOUND}",
            arg.norm()
        )));
    }
    let cfg = MlConfig { rel_tol: 1e-16, max_terms: 20_000 };
    mittag_leffler::ml_eval(params.beta, arg, &cfg)
}

/// n-th raw moment in closed form:
/// `sum_{m<=n} m! / Gamma(m beta + 1) * S(n, m) * lambda^m`.
pub fn moment(params: &FpmParams, n: usize) -> f64 {
    let table = StirlingTable::new(n, n);
    moment_from_table(params, n, &table)
}

fn moment_from_table(params: &FpmParams, n: usize, table: &StirlingTable) -> f64 {
    (0..=n).map(|m| tilde_moment(params, m) * table.second_f64(n, m)).sum()
}

/// Auxiliary moment sequence `m! lambda^m / Gamma(m beta + 1)`: the
/// Taylor coefficients (times m!) of E_beta(lambda z) around zero.
pub fn tilde_moment(params: &FpmParams, m: usize) -> f64 {
    let lg = gamma::ln_gamma(m as f64 + 1.0) + m as f64 * params.lambda.ln()
        - gamma::ln_gamma(m as f64 * params.beta + 1.0);
    lg.exp()
}

/// Direct-summation moment `sum_k k^n pmf(k)`, truncated once the
/// geometric tail bound drops below `tail_tol`.
pub fn moment_oracle(params: &FpmParams, n: usize, tail_tol: f64) -> Result<f64> {
    if !(tail_tol > 0.0) {
        return Err(Error::InvalidArgument("tail_tol must be > 0".into()));
    }
    let v = certified_weighted_sum(
        params,
        |k| Complex64::new((k as f64).powi(n as i32), 0.0),
        tail_tol,
    )?;
    Ok(v.re)
}

/// Exponential moment `sum_k e^(eps k) pmf(k)`; on the nonnegative
/// support this equals the Laplace transform at the real point eps.
pub fn exp_moment(params: &FpmParams, eps: f64) -> Result<f64> {
    if !(eps >= 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be >= 0, got {eps}")));
    }
    let v = certified_weighted_sum(params, |k| Complex64::new((eps * k as f64).exp(), 0.0), 1e-13)?;
    Ok(v.re)
}

const SUM_CAP: usize = 20_000;

/// Truncated sum of `weight(k) * pmf(k)` with a certified tail.
///
/// Once the summand magnitudes decay, the remaining tail is bounded by a
/// geometric series with the observed ratio; the weights grow at most
/// geometrically while the pmf decays faster than any geometric sequence,
/// so the bound is conservative. Ratios at or above 0.99 never certify,
/// and exhausting the cap fails loudly with the partial sum. Three
/// consecutive exact zeros also terminate: the weight magnitudes grow
/// smoothly, so zeros mean the pmf has left double-precision range.
pub(crate) fn certified_weighted_sum(
    params: &FpmParams,
    weight: impl Fn(usize) -> Complex64,
    tail_tol: f64,
) -> Result<Complex64> {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut prev: Option<f64> = None;
    let mut decaying = false;
    let mut zero_streak = 0;
    for k in 0..SUM_CAP {
        let t = weight(k) * pmf(params, k)?;
        let a = t.norm();
        if !a.is_finite() {
            return Err(Error::Domain(format!("summand overflows at k = {k}")));
        }
        sum += t;
        if a == 0.0 {
            zero_streak += 1;
            if zero_streak >= 3 && k >= 2 {
                return Ok(sum);
            }
        } else {
            zero_streak = 0;
        }
        if let Some(p) = prev {
            if a <= p {
                decaying = true;
            }
            if decaying && a < p && p > 0.0 {
                let r = a / p;
                if r < 0.99 && a * r / (1.0 - r) < tail_tol {
                    return Ok(sum);
                }
            }
        }
        prev = Some(a);
    }
    Err(Error::Convergence { terms: SUM_CAP, partial: sum })
}

/// Eagerly built table of raw and auxiliary moments, shared by the
/// polynomial constructions. Immutable after construction; lookups past
/// `n_max` fall back to a fresh closed-form evaluation so no caller has
/// to guess the final degree.
#[derive(Debug, Clone)]
pub struct MomentCache {
    params: FpmParams,
    moments: Vec<f64>,
    tilde: Vec<f64>,
}

impl MomentCache {
    pub fn new(params: FpmParams, n_max: usize) -> Self {
        let table = StirlingTable::new(n_max, n_max);
        let moments = (0..=n_max).map(|n| moment_from_table(&params, n, &table)).collect();
        let tilde = (0..=n_max).map(|m| tilde_moment(&params, m)).collect();
        MomentCache { params, moments, tilde }
    }

    pub fn params(&self) -> FpmParams {
        self.params
    }

    pub fn n_max(&self) -> usize {
        self.moments.len() - 1
    }

    pub fn moment(&self, n: usize) -> f64 {
        self.moments.get(n).copied().unwrap_or_else(|| moment(&self.params, n))
    }

    pub fn tilde(&self, m: usize) -> f64 {
        self.tilde.get(m).copied().unwrap_or_else(|| tilde_moment(&self.params, m))
    }
}
