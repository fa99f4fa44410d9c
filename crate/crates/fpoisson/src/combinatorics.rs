//! Exact combinatorial kernel: Stirling numbers of both kinds, partial
//! Bell polynomials, falling factorials, binomials and factorials.
//!
//! Everything here is exact integer arithmetic; floating point enters
//! only where a caller converts. The Stirling numbers of the first kind
//! are signed.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};

/// Signed Stirling number of the first kind s(n, k).
///
/// Follows the recurrence s(n+1, k) = s(n, k-1) - n s(n, k) with
/// s(0, 0) = 1; zero for k > n.
pub fn stirling_first(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut row = vec![BigInt::zero(); k + 1];
    row[0] = BigInt::one();
    for i in 0..n {
        let mut next = vec![BigInt::zero(); k + 1];
        next[0] = -(&row[0] * BigInt::from(i));
        for j in 1..=k {
            next[j] = row[j - 1].clone() - &row[j] * BigInt::from(i);
        }
        row = next;
    }
    row[k].clone()
}

/// Stirling number of the second kind S(n, k), by the recurrence
/// S(n+1, k) = k S(n, k) + S(n, k-1) with S(0, 0) = 1; zero for k > n.
pub fn stirling_second(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut row = vec![BigInt::zero(); k + 1];
    row[0] = BigInt::one();
    for _i in 0..n {
        let mut next = vec![BigInt::zero(); k + 1];
        for j in 1..=k {
            next[j] = &row[j] * BigInt::from(j) + &row[j - 1];
        }
        row = next;
    }
    row[k].clone()
}

/// Memoized triangle of both Stirling kinds up to (n_max, k_max).
///
/// Immutable after construction, so it can be shared freely across
/// threads.
#[derive(Debug, Clone)]
pub struct StirlingTable {
    n_max: usize,
    k_max: usize,
    first: Vec<Vec<BigInt>>,
    second: Vec<Vec<BigInt>>,
}

impl StirlingTable {
    pub fn new(n_max: usize, k_max: usize) -> Self {
        let k_cols = k_max + 1;
        let mut first = vec![vec![BigInt::zero(); k_cols]; n_max + 1];
        let mut second = vec![vec![BigInt::zero(); k_cols]; n_max + 1];
        first[0][0] = BigInt::one();
        second[0][0] = BigInt::one();
        for n in 1..=n_max {
            for k in 1..=k_max.min(n) {
                first[n][k] = first[n - 1][k - 1].clone() - &first[n - 1][k] * BigInt::from(n - 1);
                second[n][k] = &second[n - 1][k] * BigInt::from(k) + &second[n - 1][k - 1];
            }
        }
        StirlingTable { n_max, k_max, first, second }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn first(&self, n: usize, k: usize) -> BigInt {
        if k > n {
            return BigInt::zero();
        }
        assert!(n <= self.n_max && k <= self.k_max, "StirlingTable range exceeded");
        self.first[n][k].clone()
    }

    pub fn second(&self, n: usize, k: usize) -> BigInt {
        if k > n {
            return BigInt::zero();
        }
        assert!(n <= self.n_max && k <= self.k_max, "StirlingTable range exceeded");
        self.second[n][k].clone()
    }

    pub fn first_f64(&self, n: usize, k: usize) -> f64 {
        if k > n {
            return 0.0;
        }
        assert!(n <= self.n_max && k <= self.k_max, "StirlingTable range exceeded");
        self.first[n][k].to_f64().unwrap()
    }

    pub fn second_f64(&self, n: usize, k: usize) -> f64 {
        if k > n {
            return 0.0;
        }
        assert!(n <= self.n_max && k <= self.k_max, "StirlingTable range exceeded");
        self.second[n][k].to_f64().unwrap()
    }
}

/// Binomial coefficient C(n, k).
pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut c = BigInt::one();
    for i in 0..k {
        c = c * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    c
}

pub fn factorial(n: usize) -> BigInt {
    let mut f = BigInt::one();
    for i in 2..=n {
        f *= BigInt::from(i);
    }
    f
}

pub(crate) fn factorial_f64(n: usize) -> f64 {
    factorial(n).to_f64().unwrap()
}

pub(crate) fn binomial_f64(n: usize, k: usize) -> f64 {
    binomial(n, k).to_f64().unwrap()
}

/// Partial (incomplete) Bell polynomial B_{n,k}(x_1, ..., x_{n-k+1}).
///
/// Enumerates every sequence of nonnegative integers (j_1, ..., j_{n-k+1})
/// with sum j_i = k and sum i*j_i = n; each contributes
/// n!/(prod j_i!) * prod (x_i/i!)^{j_i}. The integer weight
/// n!/(prod j_i! (i!)^{j_i}) is carried exactly and converted once.
pub fn bell_partial(n: usize, k: usize, args: &[Complex64]) -> Result<Complex64> {
    if k > n {
        return Ok(Complex64::ZERO);
    }
    if n == 0 {
        // B_{0,0} is the empty product.
        return Ok(Complex64::ONE);
    }
    let len = n - k + 1;
    if args.len() != len {
        return Err(Error::InvalidArgument(format!(
            "bell_partial({n}, {k}) needs {len} arguments, got {}",
            args.len()
        )));
    }
    if k == 0 {
        // n >= 1 with no parts.
        return Ok(Complex64::ZERO);
    }
    let n_fact = factorial(n);
    let mut total = Complex64::ZERO;
    let mut counts = vec![0usize; len];
    enumerate_bell(n, k, 0, n, k, &mut counts, &mut |counts| {
        let mut denom = BigInt::one();
        let mut monomial = Complex64::ONE;
        for (idx, &j) in counts.iter().enumerate() {
            if j == 0 {
                continue;
            }
            let i = idx + 1;
            denom *= factorial(j);
            denom *= factorial(i).pow(j as u32);
            monomial *= args[idx].powu(j as u32);
        }
        let weight = (&n_fact / denom).to_f64().unwrap();
        total += weight * monomial;
    });
    Ok(total)
}

/// Walk all (j_1..j_len) with sum j = parts_left and weighted sum = size_left.
fn enumerate_bell(
    n: usize,
    k: usize,
    idx: usize,
    size_left: usize,
    parts_left: usize,
    counts: &mut Vec<usize>,
    visit: &mut impl FnMut(&[usize]),
) {
    let len = n - k + 1;
    if idx == len {
        if size_left == 0 && parts_left == 0 {
            visit(counts);
        }
        return;
    }
    let i = idx + 1;
    let max_j = (size_left / i).min(parts_left);
    for j in 0..=max_j {
        counts[idx] = j;
        enumerate_bell(n, k, idx + 1, size_left - i * j, parts_left - j, counts, visit);
    }
    counts[idx] = 0;
}

/// Falling factorial (y)_m = y (y-1) ... (y-m+1), with (y)_0 = 1.
pub fn falling_factorial(y: Complex64, m: usize) -> Complex64 {
    let mut p = Complex64::ONE;
    for i in 0..m {
        p *= y - i as f64;
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Count permutations of {0..n-1} by cycle count; the signed Stirling
    /// number of the first kind is (-1)^(n-k) times that count.
    fn stirling_first_by_cycle_enumeration(n: usize, k: usize) -> BigInt {
        fn cycles(perm: &[usize]) -> usize {
            let mut seen = vec![false; perm.len()];
            let mut c = 0;
            for start in 0..perm.len() {
                if !seen[start] {
                    c += 1;
                    let mut i = start;
                    while !seen[i] {
                        seen[i] = true;
                        i = perm[i];
                    }
                }
            }
            c
        }
        fn permutations(items: Vec<usize>, visit: &mut impl FnMut(&[usize])) {
            fn rec(cur: &mut Vec<usize>, rest: &mut Vec<usize>, visit: &mut impl FnMut(&[usize])) {
                if rest.is_empty() {
                    visit(cur);
                    return;
                }
                for i in 0..rest.len() {
                    let v = rest.remove(i);
                    cur.push(v);
                    rec(cur, rest, visit);
                    cur.pop();
                    rest.insert(i, v);
                }
            }
            rec(&mut Vec::new(), &mut items.clone(), visit);
        }
        let mut count = 0u64;
        permutations((0..n).collect(), &mut |perm| {
            if cycles(perm) == k {
                count += 1;
            }
        });
        let sign = if (n - k) % 2 == 0 { 1 } else { -1 };
        BigInt::from(sign) * BigInt::from(count)
    }

    /// Count set partitions of {0..n-1} into exactly k blocks.
    fn stirling_second_by_partition_enumeration(n: usize, k: usize) -> BigInt {
        fn rec(item: usize, n: usize, blocks: &mut Vec<Vec<usize>>, k: usize, count: &mut u64) {
            if item == n {
                if blocks.len() == k {
                    *count += 1;
                }
                return;
            }
            for b in 0..blocks.len() {
                blocks[b].push(item);
                rec(item + 1, n, blocks, k, count);
                blocks[b].pop();
            }
            blocks.push(vec![item]);
            rec(item + 1, n, blocks, k, count);
            blocks.pop();
        }
        let mut count = 0;
        rec(0, n, &mut Vec::new(), k, &mut count);
        BigInt::from(count)
    }

    #[test]
    fn stirling_first_base_cases() {
        assert_eq!(stirling_first(0, 0), BigInt::from(1));
        assert_eq!(stirling_first(3, 5), BigInt::from(0));
        assert_eq!(stirling_first(5, 0), BigInt::from(0));
    }

    #[test]
    fn stirling_first_matches_cycle_enumeration() {
        // Frozen from the enumeration oracle below: s(4,2) = 11.
        let oracle = stirling_first_by_cycle_enumeration(4, 2);
        assert_eq!(oracle, BigInt::from(11));
        assert_eq!(stirling_first(4, 2), oracle);
        for n in 0..=6 {
            for k in 0..=n {
                assert_eq!(
                    stirling_first(n, k),
                    stirling_first_by_cycle_enumeration(n, k),
                    "s({n},{k})"
                );
            }
        }
    }

    #[test]
    fn stirling_second_base_cases() {
        assert_eq!(stirling_second(0, 0), BigInt::from(1));
        for n in 1..=8 {
            assert_eq!(stirling_second(n, 1), BigInt::from(1));
        }
        assert_eq!(stirling_second(3, 7), BigInt::from(0));
    }

    #[test]
    fn stirling_second_matches_partition_enumeration() {
        // Frozen from the enumeration oracle: S(4,2) = 7.
        let oracle = stirling_second_by_partition_enumeration(4, 2);
        assert_eq!(oracle, BigInt::from(7));
        assert_eq!(stirling_second(4, 2), oracle);
        for n in 0..=7 {
            for k in 0..=n {
                assert_eq!(
                    stirling_second(n, k),
                    stirling_second_by_partition_enumeration(n, k),
                    "S({n},{k})"
                );
            }
        }
    }

    #[test]
    fn table_agrees_with_single_shot() {
        let t = StirlingTable::new(12, 12);
        for n in 0..=12 {
            for k in 0..=12 {
                assert_eq!(t.first(n, k), stirling_first(n, k));
                assert_eq!(t.second(n, k), stirling_second(n, k));
            }
        }
    }

    #[test]
    fn stirling_orthogonality_exact_to_30() {
        let t = StirlingTable::new(30, 30);
        for n in 0..=30 {
            for k in 0..=n {
                let mut acc = BigInt::zero();
                for j in k..=n {
                    acc += t.first(n, j) * t.second(j, k);
                }
                let expect = if n == k { BigInt::one() } else { BigInt::zero() };
                assert_eq!(acc, expect, "orthogonality failed at ({n},{k})");
            }
        }
    }

    /// Composition-sum forms: k! s(n,k) and k! S(n,k) as sums over
    /// compositions of n into k positive parts.
    #[test]
    fn composition_sums_match_stirling() {
        fn compositions(n: usize, k: usize, visit: &mut impl FnMut(&[usize])) {
            fn rec(n: usize, k: usize, cur: &mut Vec<usize>, visit: &mut impl FnMut(&[usize])) {
                if k == 1 {
                    if n >= 1 {
                        cur.push(n);
                        visit(cur);
                        cur.pop();
                    }
                    return;
                }
                for first in 1..=n.saturating_sub(k - 1) {
                    cur.push(first);
                    rec(n - first, k - 1, cur, visit);
                    cur.pop();
                }
            }
            if k == 0 {
                if n == 0 {
                    visit(&[]);
                }
                return;
            }
            rec(n, k, &mut Vec::new(), visit);
        }

        for n in 0..=12usize {
            for k in 0..=n.min(12) {
                let mut a_sum = BigRationalAcc::default();
                let mut b_sum = BigRationalAcc::default();
                compositions(n, k, &mut |parts| {
                    let nf = factorial(n);
                    let mut prod_l = BigInt::one();
                    let mut prod_lf = BigInt::one();
                    for &l in parts {
                        prod_l *= BigInt::from(l);
                        prod_lf *= factorial(l);
                    }
                    let sign = if (n + k) % 2 == 0 { 1 } else { -1 };
                    a_sum.add(BigInt::from(sign) * &nf, prod_l);
                    b_sum.add(nf, prod_lf);
                });
                assert_eq!(a_sum.exact(), factorial(k) * stirling_first(n, k), "A({n},{k})");
                assert_eq!(b_sum.exact(), factorial(k) * stirling_second(n, k), "B({n},{k})");
            }
        }
    }

    #[derive(Default)]
    struct BigRationalAcc {
        num: BigInt,
        den: BigInt,
    }

    impl BigRationalAcc {
        fn add(&mut self, num: BigInt, den: BigInt) {
            if self.den.is_zero() {
                self.num = num;
                self.den = den;
            } else {
                self.num = &self.num * &den + num * &self.den;
                self.den = &self.den * den;
            }
        }
        fn exact(&self) -> BigInt {
            if self.den.is_zero() {
                return BigInt::zero();
            }
            assert!((&self.num % &self.den).is_zero());
            &self.num / &self.den
        }
    }

    #[test]
    fn bell_partial_basics() {
        assert_eq!(bell_partial(0, 0, &[]).unwrap(), Complex64::ONE);
        let x = Complex64::new(1.7, -0.3);
        for n in 1..=6 {
            let got = bell_partial(n, n, &[x]).unwrap();
            let want = x.powu(n as u32);
            assert!((got - want).norm() < 1e-12 * want.norm());
        }
        assert!(bell_partial(4, 2, &[Complex64::ONE; 5]).is_err());
        assert_eq!(bell_partial(2, 5, &[]).unwrap(), Complex64::ZERO);
    }

    #[test]
    fn bell_partial_at_ones_is_stirling_second() {
        for n in 0..=12usize {
            for k in 0..=n {
                let args = vec![Complex64::ONE; n - k + 1];
                let got = bell_partial(n, k, &args).unwrap();
                let want = stirling_second(n, k).to_f64().unwrap();
                assert!(
                    (got.re - want).abs() <= 1e-12 * want.max(1.0) && got.im == 0.0,
                    "B({n},{k})(1..1) = {got} vs S = {want}"
                );
            }
        }
    }

    #[test]
    fn falling_factorial_values() {
        assert_eq!(falling_factorial(Complex64::new(9.0, 2.0), 0), Complex64::ONE);
        assert_eq!(falling_factorial(Complex64::new(3.0, 0.0), 3), Complex64::new(6.0, 0.0));
        assert_eq!(falling_factorial(Complex64::new(2.0, 0.0), 4), Complex64::ZERO);
    }

    /// (y)_n = sum_k s(n,k) y^k and y^n = sum_k S(n,k) (y)_k.
    #[test]
    fn stirling_connect_powers_and_falling_factorials() {
        let t = StirlingTable::new(12, 12);
        let points = [
            Complex64::new(0.37, 1.2),
            Complex64::new(-2.5, 0.4),
            Complex64::new(3.1, -0.9),
            Complex64::new(-0.1, -0.1),
            Complex64::new(5.0, 2.0),
        ];
        for y in points {
            for n in 0..=12usize {
                let ff = falling_factorial(y, n);
                let via_first: Complex64 =
                    (0..=n).map(|k| t.first_f64(n, k) * y.powu(k as u32)).sum();
                let scale = ff.norm().max(1.0);
                assert!((ff - via_first).norm() < 1e-12 * scale, "(y)_{n} mismatch");

                let pw = y.powu(n as u32);
                let via_second: Complex64 =
                    (0..=n).map(|k| t.second_f64(n, k) * falling_factorial(y, k)).sum();
                let scale = pw.norm().max(1.0);
                assert!((pw - via_second).norm() < 1e-12 * scale, "y^{n} mismatch");
            }
        }
    }

    proptest! {
        #[test]
        fn binomial_symmetry_and_pascal(n in 0usize..30, k in 0usize..30) {
            if k <= n {
                prop_assert_eq!(binomial(n, k), binomial(n, n - k));
                if n >= 1 && k >= 1 {
                    prop_assert_eq!(
                        binomial(n, k),
                        binomial(n - 1, k - 1) + binomial(n - 1, k)
                    );
                }
            } else {
                prop_assert_eq!(binomial(n, k), BigInt::zero());
            }
        }

        #[test]
        fn stirling_row_sums(n in 0usize..12) {
            // sum_k |s(n,k)| = n!, sum_k S(n,k) = Bell number via recurrence.
            let total: BigInt = (0..=n).map(|k| {
                let v = stirling_first(n, k);
                if v < BigInt::zero() { -v } else { v }
            }).sum();
            prop_assert_eq!(total, factorial(n));
        }
    }
}
