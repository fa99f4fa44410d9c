//! Evaluation of the Mittag-Leffler function E_beta and its derivatives
//! on the complex plane, for 0 < beta <= 1.
//!
//! Everything is computed from the defining power series
//! `E_beta(z) = sum_n z^n / Gamma(beta n + 1)`. For beta < 1 at negative
//! or complex arguments the series cancels catastrophically: the largest
//! term can exceed the sum by hundreds of orders of magnitude. The kernels
//! therefore first scan the term magnitudes in double precision, pick a
//! software-float precision that covers the peak plus guard bits, and sum
//! at that precision, retrying wider if the result turns out to sit even
//! further below the peak.
//!
//! Taylor summation is a desk-scale method: it degrades once
//! `|argument|` grows (the series needs ever more terms and the peak
//! climbs steeply for small beta). Callers that map measure parameters
//! into E_beta keep `|lambda (e^z - 1)| <= 30`; past the configured term
//! budget the evaluation fails with a convergence error carrying the last
//! partial sum rather than returning garbage.

use crate::bigfloat::{BigFloat, Ctx};
use crate::combinatorics;
use crate::error::{Error, Result};
use crate::gamma;
use num_complex::Complex64;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Truncation policy for the power-series evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlConfig {
    /// Stopping threshold: the series stops once the current term's
    /// magnitude drops below `rel_tol * (|partial sum| + 1)` for two
    /// consecutive terms.
    pub rel_tol: f64,
    /// Hard cap on the number of terms before the evaluation reports a
    /// convergence error.
    pub max_terms: usize,
}

impl Default for MlConfig {
    fn default() -> Self {
        MlConfig { rel_tol: 1e-16, max_terms: 500 }
    }
}

impl MlConfig {
    pub fn new(rel_tol: f64, max_terms: usize) -> Result<Self> {
        if !(rel_tol > 0.0) {
            return Err(Error::InvalidArgument(format!("rel_tol must be > 0, got {rel_tol}")));
        }
        if max_terms == 0 {
            return Err(Error::InvalidArgument("max_terms must be >= 1".into()));
        }
        Ok(MlConfig { rel_tol, max_terms })
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::InvalidArgument(format!("beta must lie in (0, 1], got {beta}")));
    }
    Ok(())
}

/// E_beta(z) by truncated power series.
pub fn ml_eval(beta: f64, z: Complex64, cfg: &MlConfig) -> Result<Complex64> {
    check_beta(beta)?;
    MlConfig::new(cfg.rel_tol, cfg.max_terms)?;
    adaptive_sum(beta, 0, z, &LeadCoeff::One, cfg)
}

/// k-th derivative E_beta^(k)(z) = sum_{n>=k} n!/(n-k)! z^(n-k) / Gamma(beta n + 1).
pub fn ml_derivative(beta: f64, k: usize, z: Complex64, cfg: &MlConfig) -> Result<Complex64> {
    check_beta(beta)?;
    MlConfig::new(cfg.rel_tol, cfg.max_terms)?;
    adaptive_sum(beta, k, z, &LeadCoeff::Factorial(k), cfg)
}

/// lambda^k / k! * E_beta^(k)(-lambda), the fractional Poisson weight,
/// summed as a single fused series. Folding the Poisson prefactor into
/// the lead coefficient keeps every intermediate inside floating-point
/// range even when the bare derivative would overflow.
pub(crate) fn pmf_value(beta: f64, lambda: f64, k: usize) -> Result<f64> {
    let cfg = MlConfig { rel_tol: 1e-16, max_terms: 4000 + 8 * k };
    let v = adaptive_sum(
        beta,
        k,
        Complex64::new(-lambda, 0.0),
        &LeadCoeff::Power { base: lambda, exp: k },
        &cfg,
    )?;
    Ok(v.re)
}

/// Lead coefficient of the unified series
/// `sum_m c_m / Gamma(beta (k+m) + 1)` with
/// `c_m = c_(m-1) * z * (k+m)/m` and `c_0` as below.
enum LeadCoeff {
    /// c_0 = 1 (plain evaluation, k = 0).
    One,
    /// c_0 = k! (k-th derivative).
    Factorial(usize),
    /// c_0 = base^exp (pmf weight: base = lambda, exp = k).
    Power { base: f64, exp: usize },
}

impl LeadCoeff {
    fn log2(&self) -> f64 {
        match self {
            LeadCoeff::One => 0.0,
            LeadCoeff::Factorial(k) => gamma::ln_gamma(*k as f64 + 1.0) / std::f64::consts::LN_2,
            LeadCoeff::Power { base, exp } => *exp as f64 * base.log2(),
        }
    }

    fn build(&self, ctx: &Ctx) -> BigFloat {
        match self {
            LeadCoeff::One => ctx.one(),
            LeadCoeff::Factorial(k) => ctx.from_bigint(&combinatorics::factorial(*k)),
            LeadCoeff::Power { base, exp } => {
                let mut acc = ctx.one();
                let mut sq = ctx.from_f64(*base);
                let mut e = *exp;
                while e > 0 {
                    if e & 1 == 1 {
                        acc = ctx.mul(&acc, &sq);
                    }
                    sq = ctx.mul(&sq, &sq);
                    e >>= 1;
                }
                acc
            }
        }
    }
}

/// Largest log2 term magnitude over the first `max_terms` terms, scanned
/// in double precision. Used to size the working precision.
fn peak_term_log2(beta: f64, k: usize, ln_abs_z: f64, c0_log2: f64, max_terms: usize) -> f64 {
    const LN2: f64 = std::f64::consts::LN_2;
    if ln_abs_z == f64::NEG_INFINITY {
        return c0_log2 - gamma::ln_gamma(beta * k as f64 + 1.0) / LN2;
    }
    let lg_k1 = gamma::ln_gamma(k as f64 + 1.0);
    let mut peak = f64::NEG_INFINITY;
    let mut declines = 0;
    let mut prev = f64::NEG_INFINITY;
    for m in 0..=max_terms {
        let km = (k + m) as f64;
        let ln_t = m as f64 * ln_abs_z + gamma::ln_gamma(km + 1.0)
            - lg_k1
            - gamma::ln_gamma(m as f64 + 1.0)
            - gamma::ln_gamma(beta * km + 1.0);
        let l2 = c0_log2 + ln_t / LN2;
        if l2 > peak {
            peak = l2;
        }
        // Once the terms have fallen far below the peak they never recover.
        if l2 < prev {
            declines += 1;
            if declines > 32 && l2 < peak - 4096.0 {
                break;
            }
        } else {
            declines = 0;
        }
        prev = l2;
    }
    peak
}

fn prec_bucket(bits: f64) -> u32 {
    let b = bits.max(0.0) + 192.0;
    ((b / 320.0).ceil() as u32).max(1) * 320
}

fn adaptive_sum(
    beta: f64,
    k: usize,
    z: Complex64,
    lead: &LeadCoeff,
    cfg: &MlConfig,
) -> Result<Complex64> {
    let ln_abs_z = if z == Complex64::new(0.0, 0.0) { f64::NEG_INFINITY } else { z.norm().ln() };
    let peak = peak_term_log2(beta, k, ln_abs_z, lead.log2(), cfg.max_terms);
    let mut prec = prec_bucket(peak);
    for _attempt in 0..4 {
        let out = if z.im == 0.0 {
            run_series_real(beta, k, z.re, lead, cfg, prec)?
        } else {
            run_series_complex(beta, k, z, lead, cfg, prec)?
        };
        let result_log2 = out.result_log2;
        let deficit = peak - result_log2;
        if result_log2 == f64::NEG_INFINITY || deficit > prec as f64 - 96.0 {
            let wanted = prec_bucket(if result_log2 == f64::NEG_INFINITY {
                peak + prec as f64
            } else {
                deficit + 128.0
            });
            if wanted > prec && prec < 16_384 {
                prec = wanted.min(16_384);
                continue;
            }
        }
        return Ok(out.value);
    }
    unreachable!("adaptive precision loop always returns");
}

struct SeriesOut {
    value: Complex64,
    result_log2: f64,
}

/// log2(x + 1) given log2(x), stable for the stopping threshold.
fn log2_plus_one(l2: f64) -> f64 {
    if l2 > 60.0 {
        l2
    } else if l2 < -60.0 {
        0.0
    } else {
        (2f64.powf(l2) + 1.0).log2()
    }
}

fn run_series_real(
    beta: f64,
    k: usize,
    z: f64,
    lead: &LeadCoeff,
    cfg: &MlConfig,
    prec: u32,
) -> Result<SeriesOut> {
    let ctx = Ctx::new(prec);
    let mut table = IgTable::acquire(beta, prec, k + 65);
    let zb = ctx.from_f64(z);
    let mut c = lead.build(&ctx);
    let mut sum = BigFloat::zero();
    let tol_log2 = cfg.rel_tol.log2();
    let mut small_streak = 0;
    for m in 0..=cfg.max_terms {
        if m > 0 {
            c = ctx.mul(&c, &zb);
            c = ctx.mul_u64(&c, (k + m) as u64);
            c = ctx.div_u64(&c, m as u64);
        }
        table.ensure(k + m + 1);
        let term = ctx.mul(&c, table.at(k + m));
        sum = ctx.add(&sum, &term);
        let threshold = tol_log2 + log2_plus_one(sum.log2_abs());
        if term.log2_abs() < threshold {
            small_streak += 1;
            if small_streak >= 2 {
                return Ok(SeriesOut {
                    value: Complex64::new(sum.to_f64(), 0.0),
                    result_log2: sum.log2_abs(),
                });
            }
        } else {
            small_streak = 0;
        }
    }
    Err(Error::Convergence {
        terms: cfg.max_terms,
        partial: Complex64::new(sum.to_f64(), 0.0),
    })
}

fn run_series_complex(
    beta: f64,
    k: usize,
    z: Complex64,
    lead: &LeadCoeff,
    cfg: &MlConfig,
    prec: u32,
) -> Result<SeriesOut> {
    let ctx = Ctx::new(prec);
    let mut table = IgTable::acquire(beta, prec, k + 65);
    let zr = ctx.from_f64(z.re);
    let zi = ctx.from_f64(z.im);
    let mut cr = lead.build(&ctx);
    let mut ci = BigFloat::zero();
    let mut sr = BigFloat::zero();
    let mut si = BigFloat::zero();
    let tol_log2 = cfg.rel_tol.log2();
    let mut small_streak = 0;
    for m in 0..=cfg.max_terms {
        if m > 0 {
            let nr = ctx.sub(&ctx.mul(&cr, &zr), &ctx.mul(&ci, &zi));
            let ni = ctx.add(&ctx.mul(&cr, &zi), &ctx.mul(&ci, &zr));
            let km = (k + m) as u64;
            cr = ctx.div_u64(&ctx.mul_u64(&nr, km), m as u64);
            ci = ctx.div_u64(&ctx.mul_u64(&ni, km), m as u64);
        }
        table.ensure(k + m + 1);
        let ig = table.at(k + m);
        let tr = ctx.mul(&cr, ig);
        let ti = ctx.mul(&ci, ig);
        sr = ctx.add(&sr, &tr);
        si = ctx.add(&si, &ti);
        let sum_log2 = sr.log2_abs().max(si.log2_abs()) + 0.5;
        let term_log2 = tr.log2_abs().max(ti.log2_abs()) + 0.5;
        if term_log2 < tol_log2 + log2_plus_one(sum_log2) {
            small_streak += 1;
            if small_streak >= 2 {
                return Ok(SeriesOut {
                    value: Complex64::new(sr.to_f64(), si.to_f64()),
                    result_log2: sr.log2_abs().max(si.log2_abs()),
                });
            }
        } else {
            small_streak = 0;
        }
    }
    Err(Error::Convergence {
        terms: cfg.max_terms,
        partial: Complex64::new(sr.to_f64(), si.to_f64()),
    })
}

/// Shared table of 1/Gamma(beta n + 1) values at a fixed precision.
///
/// For the dyadic orders that floating point can represent exactly
/// (beta * 2^j integral for some j <= 4) entries follow from earlier ones
/// through the Gamma recurrence; otherwise every entry costs a ln_gamma.
/// Tables are grown on demand under a lock and shared via `Arc`, so
/// concurrent readers are safe.
struct IgTable {
    beta_bits: u64,
    prec: u32,
    local: Arc<Vec<BigFloat>>,
}

static IG_TABLES: OnceLock<Mutex<HashMap<(u64, u32), Arc<Vec<BigFloat>>>>> = OnceLock::new();

impl IgTable {
    fn acquire(beta: f64, prec: u32, min_len: usize) -> Self {
        let mut t = IgTable { beta_bits: beta.to_bits(), prec, local: Arc::new(Vec::new()) };
        t.ensure(min_len);
        t
    }

    fn ensure(&mut self, len: usize) {
        if self.local.len() >= len {
            return;
        }
        let map = IG_TABLES.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = map.lock().unwrap();
        let entry = guard.entry((self.beta_bits, self.prec)).or_insert_with(|| Arc::new(Vec::new()));
        if entry.len() < len {
            // Grow in slabs to amortize the lock and the lifts.
            let target = len.max(entry.len() * 2).max(64);
            let mut grown: Vec<BigFloat> = entry.as_ref().clone();
            extend_ig(f64::from_bits(self.beta_bits), self.prec, &mut grown, target);
            *entry = Arc::new(grown);
        }
        self.local = Arc::clone(entry);
    }

    fn at(&self, i: usize) -> &BigFloat {
        &self.local[i]
    }
}

fn extend_ig(beta: f64, prec: u32, table: &mut Vec<BigFloat>, target: usize) {
    let ctx = Ctx::new(prec);
    let beta_bf = ctx.from_f64(beta);
    // Recurrence stride: smallest power of two k0 with beta*k0 integral.
    let stride = [1usize, 2, 4, 8, 16]
        .into_iter()
        .find(|&s| {
            let p = beta * s as f64;
            p == p.round() && p >= 1.0
        });
    while table.len() < target {
        let n = table.len();
        let use_recurrence = match stride {
            Some(s) => n >= s,
            None => false,
        };
        let v = if use_recurrence {
            let s = stride.unwrap();
            let m0 = (beta * s as f64).round() as u64;
            // Gamma(beta n + 1) = prod_{i=0}^{m0-1} (x + i) * Gamma(x),
            // x = beta (n - s) + 1.
            let x = ctx.add(&ctx.mul(&beta_bf, &ctx.from_u64((n - s) as u64)), &ctx.one());
            let mut denom = x.clone();
            for i in 1..m0 {
                denom = ctx.mul(&denom, &ctx.add(&x, &ctx.from_u64(i)));
            }
            ctx.div(&table[n - s], &denom)
        } else {
            let arg = ctx.add(&ctx.mul(&beta_bf, &ctx.from_u64(n as u64)), &ctx.one());
            ctx.exp(&ctx.ln_gamma(&arg).neg())
        };
        table.push(v);
    }
}
