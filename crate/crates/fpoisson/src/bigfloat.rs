//! Arbitrary-precision binary floating point.
//!
//! The Mittag-Leffler power series at negative or complex arguments is an
//! alternating sum whose intermediate terms can exceed the final value by
//! hundreds of orders of magnitude once the fractional order drops below
//! one. Double precision is hopeless there, so the series kernels in this
//! crate sum with this software float at a precision chosen from the peak
//! term size. Only the operations the kernels need are implemented:
//! field arithmetic, `ln`, `exp`, and `ln_gamma` for positive arguments.
//!
//! Rounding is truncation toward zero; every caller budgets guard bits,
//! so one-ulp-per-operation error bounds are all that is required.

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct BigFloat {
    sign: i8,
    mant: BigUint,
    exp: i64,
}

impl BigFloat {
    pub(crate) fn zero() -> Self {
        BigFloat { sign: 0, mant: BigUint::zero(), exp: 0 }
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub(crate) fn neg(&self) -> Self {
        BigFloat { sign: -self.sign, mant: self.mant.clone(), exp: self.exp }
    }

    pub(crate) fn abs(&self) -> Self {
        BigFloat { sign: self.sign.abs(), mant: self.mant.clone(), exp: self.exp }
    }

    pub(crate) fn is_negative(&self) -> bool {
        self.sign < 0
    }

    /// Approximate base-2 logarithm of |self|; `-inf` for zero.
    pub(crate) fn log2_abs(&self) -> f64 {
        if self.sign == 0 {
            return f64::NEG_INFINITY;
        }
        let bits = self.mant.bits();
        let shift = bits.saturating_sub(53);
        let top = (&self.mant >> shift).to_f64().unwrap_or(f64::MAX);
        self.exp as f64 + shift as f64 + top.log2()
    }

    pub(crate) fn to_f64(&self) -> f64 {
        if self.sign == 0 {
            return 0.0;
        }
        let bits = self.mant.bits();
        let shift = bits.saturating_sub(54) as i64;
        let top = (&self.mant >> (shift as u64)).to_f64().unwrap();
        let e = self.exp + shift;
        let v = if e > 1100 {
            f64::INFINITY
        } else if e < -1150 {
            0.0
        } else {
            top * 2f64.powi(e as i32)
        };
        if self.sign < 0 {
            -v
        } else {
            v
        }
    }

    pub(crate) fn cmp_abs(&self, other: &BigFloat) -> Ordering {
        match (self.sign == 0, other.sign == 0) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            (false, false) => {
                // Both normalized to the same precision by construction.
                let la = self.exp + self.mant.bits() as i64;
                let lb = other.exp + other.mant.bits() as i64;
                la.cmp(&lb).then_with(|| {
                    let sa = (&self.mant) << other.mant.bits();
                    let sb = (&other.mant) << self.mant.bits();
                    sa.cmp(&sb)
                })
            }
        }
    }
}

/// Arithmetic context carrying the working precision in bits.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Ctx {
    pub prec: u32,
}

impl Ctx {
    pub(crate) fn new(prec: u32) -> Self {
        assert!(prec >= 32);
        Ctx { prec }
    }

    fn norm(&self, sign: i8, mant: BigUint, exp: i64) -> BigFloat {
        if mant.is_zero() || sign == 0 {
            return BigFloat::zero();
        }
        let bits = mant.bits() as i64;
        let prec = self.prec as i64;
        if bits > prec {
            let shift = (bits - prec) as u64;
            BigFloat { sign, mant: mant >> shift, exp: exp + shift as i64 }
        } else if bits < prec {
            let shift = (prec - bits) as u64;
            BigFloat { sign, mant: mant << shift, exp: exp - shift as i64 }
        } else {
            BigFloat { sign, mant, exp }
        }
    }

    pub(crate) fn from_u64(&self, v: u64) -> BigFloat {
        if v == 0 {
            BigFloat::zero()
        } else {
            self.norm(1, BigUint::from(v), 0)
        }
    }

    pub(crate) fn from_i64(&self, v: i64) -> BigFloat {
        let f = self.from_u64(v.unsigned_abs());
        if v < 0 {
            f.neg()
        } else {
            f
        }
    }

    pub(crate) fn from_bigint(&self, v: &BigInt) -> BigFloat {
        match v.sign() {
            Sign::NoSign => BigFloat::zero(),
            Sign::Plus => self.norm(1, v.magnitude().clone(), 0),
            Sign::Minus => self.norm(-1, v.magnitude().clone(), 0),
        }
    }

    pub(crate) fn from_f64(&self, x: f64) -> BigFloat {
        assert!(x.is_finite(), "cannot lift non-finite {x} to BigFloat");
        if x == 0.0 {
            return BigFloat::zero();
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 1 { -1 } else { 1 };
        let exp_field = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & 0xf_ffff_ffff_ffff;
        let (mant, exp) = if exp_field == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), exp_field - 1075)
        };
        self.norm(sign, BigUint::from(mant), exp)
    }

    pub(crate) fn one(&self) -> BigFloat {
        self.from_u64(1)
    }

    pub(crate) fn add(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        if a.is_zero() {
            return b.clone();
        }
        if b.is_zero() {
            return a.clone();
        }
        let (hi, lo) = if a.exp >= b.exp { (a, b) } else { (b, a) };
        let gap = (hi.exp - lo.exp) as u64;
        // Beyond the guarded precision the small operand cannot move the sum.
        if gap > self.prec as u64 + 64 {
            return hi.clone();
        }
        let hm = (&hi.mant) << gap;
        if hi.sign == lo.sign {
            self.norm(hi.sign, hm + &lo.mant, lo.exp)
        } else {
            match hm.cmp(&lo.mant) {
                Ordering::Equal => BigFloat::zero(),
                Ordering::Greater => self.norm(hi.sign, hm - &lo.mant, lo.exp),
                Ordering::Less => self.norm(lo.sign, &lo.mant - hm, lo.exp),
            }
        }
    }

    pub(crate) fn sub(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        self.add(a, &b.neg())
    }

    pub(crate) fn mul(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        if a.is_zero() || b.is_zero() {
            return BigFloat::zero();
        }
        self.norm(a.sign * b.sign, &a.mant * &b.mant, a.exp + b.exp)
    }

    pub(crate) fn div(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        assert!(!b.is_zero(), "BigFloat division by zero");
        if a.is_zero() {
            return BigFloat::zero();
        }
        let extra = self.prec as u64 + 2;
        let num = (&a.mant) << extra;
        self.norm(a.sign * b.sign, num / &b.mant, a.exp - b.exp - extra as i64)
    }

    pub(crate) fn mul_u64(&self, a: &BigFloat, k: u64) -> BigFloat {
        if a.is_zero() || k == 0 {
            return BigFloat::zero();
        }
        self.norm(a.sign, &a.mant * k, a.exp)
    }

    pub(crate) fn div_u64(&self, a: &BigFloat, k: u64) -> BigFloat {
        assert!(k != 0);
        if a.is_zero() {
            return BigFloat::zero();
        }
        let num = (&a.mant) << 64u8;
        self.norm(a.sign, num / k, a.exp - 64)
    }

    /// Multiply by 2^k.
    pub(crate) fn scale2(&self, a: &BigFloat, k: i64) -> BigFloat {
        if a.is_zero() {
            return BigFloat::zero();
        }
        BigFloat { sign: a.sign, mant: a.mant.clone(), exp: a.exp + k }
    }

    pub(crate) fn from_rational(&self, r: &BigRational) -> BigFloat {
        let n = self.from_bigint(r.numer());
        let d = self.from_bigint(r.denom());
        self.div(&n, &d)
    }

    /// ln 2 at this precision (cached).
    pub(crate) fn ln2(&self) -> BigFloat {
        self.consts().ln2.clone()
    }

    fn consts(&self) -> Consts {
        static CACHE: OnceLock<Mutex<HashMap<u32, Consts>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap();
        guard
            .entry(self.prec)
            .or_insert_with(|| {
                let ln2 = self.scale2(&self.atanh_inv(3), 1);
                // pi = 16 atan(1/5) - 4 atan(1/239)
                let pi = self.sub(
                    &self.scale2(&self.atan_inv(5), 4),
                    &self.scale2(&self.atan_inv(239), 2),
                );
                // 0.5 ln(2*pi)
                let half_ln_2pi = self.scale2(&self.ln(&self.scale2(&pi, 1)), -1);
                Consts { ln2, half_ln_2pi }
            })
            .clone()
    }

    /// atanh(1/x) for integer x >= 2 by its power series.
    fn atanh_inv(&self, x: u64) -> BigFloat {
        let u = self.div(&self.one(), &self.from_u64(x));
        let u2 = self.mul(&u, &u);
        let mut pw = u.clone();
        let mut sum = u;
        let floor = -(self.prec as f64) - 32.0;
        let mut k = 1u64;
        loop {
            pw = self.mul(&pw, &u2);
            if pw.log2_abs() < floor {
                break;
            }
            sum = self.add(&sum, &self.div_u64(&pw, 2 * k + 1));
            k += 1;
        }
        sum
    }

    /// atan(1/x) for integer x >= 2 by its alternating power series.
    fn atan_inv(&self, x: u64) -> BigFloat {
        let u = self.div(&self.one(), &self.from_u64(x));
        let u2 = self.mul(&u, &u);
        let mut pw = u.clone();
        let mut sum = u;
        let floor = -(self.prec as f64) - 32.0;
        let mut k = 1u64;
        loop {
            pw = self.mul(&pw, &u2);
            if pw.log2_abs() < floor {
                break;
            }
            let t = self.div_u64(&pw, 2 * k + 1);
            sum = if k % 2 == 1 { self.sub(&sum, &t) } else { self.add(&sum, &t) };
            k += 1;
        }
        sum
    }

    /// Natural logarithm, `x > 0`.
    pub(crate) fn ln(&self, x: &BigFloat) -> BigFloat {
        assert!(x.sign > 0, "BigFloat ln of non-positive value");
        // x = m * 2^e with m in [1, 2).
        let e = x.exp + self.prec as i64 - 1;
        let m = BigFloat { sign: 1, mant: x.mant.clone(), exp: 1 - self.prec as i64 };
        let one = self.one();
        // ln m = 2 atanh((m-1)/(m+1)), |u| <= 1/3 on [1, 2).
        let u = self.div(&self.sub(&m, &one), &self.add(&m, &one));
        let ln_m = if u.is_zero() {
            BigFloat::zero()
        } else {
            let u2 = self.mul(&u, &u);
            let mut pw = u.clone();
            let mut sum = u;
            let floor = -(self.prec as f64) - 32.0;
            let mut k = 1u64;
            loop {
                pw = self.mul(&pw, &u2);
                if pw.log2_abs() < floor {
                    break;
                }
                sum = self.add(&sum, &self.div_u64(&pw, 2 * k + 1));
                k += 1;
            }
            self.scale2(&sum, 1)
        };
        if e == 0 {
            ln_m
        } else {
            self.add(&self.mul(&self.ln2(), &self.from_i64(e)), &ln_m)
        }
    }

    /// Exponential function.
    pub(crate) fn exp(&self, x: &BigFloat) -> BigFloat {
        if x.is_zero() {
            return self.one();
        }
        let xf = x.to_f64();
        assert!(xf.abs() < 1e15, "BigFloat exp argument out of supported range");
        let k = (xf / std::f64::consts::LN_2).round() as i64;
        let r = self.sub(x, &self.mul(&self.ln2(), &self.from_i64(k)));
        let mut term = self.one();
        let mut sum = self.one();
        let floor = -(self.prec as f64) - 32.0;
        let mut j = 1u64;
        loop {
            term = self.div_u64(&self.mul(&term, &r), j);
            if term.log2_abs() < floor {
                break;
            }
            sum = self.add(&sum, &term);
            j += 1;
        }
        self.scale2(&sum, k)
    }

    /// Log-gamma for `x > 0`, by Stirling's series after lifting the
    /// argument high enough that the remainder drops below 2^-(prec+16).
    pub(crate) fn ln_gamma(&self, x: &BigFloat) -> BigFloat {
        assert!(x.sign > 0, "BigFloat ln_gamma of non-positive value");
        let target = (200.0f64).max((self.prec as f64 + 64.0) / 8.0);
        let xf = x.to_f64();
        let lifts = if xf < target { (target - xf).ceil() as u64 } else { 0 };
        let mut shift_prod = self.one();
        for i in 0..lifts {
            shift_prod = self.mul(&shift_prod, &self.add(x, &self.from_u64(i)));
        }
        let y = self.add(x, &self.from_u64(lifts));
        let ln_y = self.ln(&y);
        // (y - 1/2) ln y - y + ln(2 pi)/2
        let half = self.scale2(&self.one(), -1);
        let mut acc = self.mul(&self.sub(&y, &half), &ln_y);
        acc = self.sub(&acc, &y);
        acc = self.add(&acc, &self.consts().half_ln_2pi);
        // Bernoulli tail: sum_j B_2j / ((2j)(2j-1) y^(2j-1))
        let inv_y = self.div(&self.one(), &y);
        let inv_y2 = self.mul(&inv_y, &inv_y);
        let mut pw = inv_y.clone();
        let floor = -(self.prec as f64) - 16.0;
        let mut j = 1u64;
        loop {
            let b = bernoulli(2 * j as usize);
            let coef = self.from_rational(&b);
            let denom = (2 * j) * (2 * j - 1);
            let term = self.div_u64(&self.mul(&coef, &pw), denom);
            if term.log2_abs() < floor {
                acc = self.add(&acc, &term);
                break;
            }
            acc = self.add(&acc, &term);
            pw = self.mul(&pw, &inv_y2);
            j += 1;
            assert!(j < 4000, "Stirling series failed to converge");
        }
        if lifts > 0 {
            acc = self.sub(&acc, &self.ln(&shift_prod));
        }
        acc
    }

    /// Parse a plain decimal literal; test support only.
    #[cfg(test)]
    pub(crate) fn parse_decimal(&self, s: &str) -> BigFloat {
        let (sign, rest) = match s.strip_prefix('-') {
            Some(r) => (-1i8, r),
            None => (1i8, s),
        };
        let (int_part, frac_part) = match rest.split_once('.') {
            Some((i, f)) => (i, f),
            None => (rest, ""),
        };
        let digits: String = format!("{int_part}{frac_part}");
        let d: BigInt = digits.parse().expect("bad decimal literal");
        let num = self.from_bigint(&d);
        let den = self.from_bigint(&BigInt::from(10u32).pow(frac_part.len() as u32));
        let v = self.div(&num, &den);
        if sign < 0 {
            v.neg()
        } else {
            v
        }
    }
}

#[derive(Debug, Clone)]
struct Consts {
    ln2: BigFloat,
    half_ln_2pi: BigFloat,
}

/// Exact Bernoulli numbers, grown on demand and shared process-wide.
/// B_1 = -1/2 convention; only even indices are requested by callers.
pub(crate) fn bernoulli(n: usize) -> BigRational {
    static CACHE: OnceLock<Mutex<Vec<BigRational>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(vec![BigRational::one()]));
    let mut b = cache.lock().unwrap();
    while b.len() <= n {
        let m = b.len();
        // B_m = -1/(m+1) * sum_{k<m} C(m+1, k) B_k
        let mut acc = BigRational::zero();
        let mut binom = BigInt::one();
        for (k, bk) in b.iter().enumerate() {
            if !bk.is_zero() {
                acc += BigRational::from(binom.clone()) * bk;
            }
            // C(m+1, k+1) from C(m+1, k)
            binom = binom * BigInt::from(m + 1 - k) / BigInt::from(k + 1);
        }
        let bm = -acc / BigRational::from(BigInt::from(m + 1));
        b.push(bm);
    }
    b[n].clone()
}
