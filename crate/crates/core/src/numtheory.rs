//! Sums of two squares: `r₂(d)`, representations, and the `n_k` sequence
//! together with its constructive and explicit bounds.

use alloc::vec;
use alloc::vec::Vec;

use num_integer::Roots;

use crate::{Error, Result};

/// Prime factorization as `(prime, exponent)` pairs with strictly increasing
/// primes and positive exponents.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Factorization(Vec<(u64, u32)>);

impl Factorization {
    pub fn pairs(&self) -> &[(u64, u32)] {
        &self.0
    }

    /// Multiplies the factors back together.
    pub fn product(&self) -> Option<u128> {
        self.0.iter().try_fold(1u128, |acc, &(p, e)| {
            u128::from(p).checked_pow(e).and_then(|pe| acc.checked_mul(pe))
        })
    }

    /// `r₂` of the factored number, from the exponents alone.
    pub fn sum_of_two_squares_count(&self) -> u64 {
        let mut count = 4u64;
        for &(p, e) in &self.0 {
            match p % 4 {
                1 => count *= u64::from(e) + 1,
                3 if e % 2 == 1 => return 0,
                _ => {}
            }
        }
        count
    }
}

/// `a² + b² = d` with `a ≥ 1` and `b ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Representation {
    pub a: u64,
    pub b: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NkBounds {
    pub k: u64,
    /// `n_k′`, the exponent-assignment construction.
    pub constructive_upper: u128,
    /// `5^(k−1)`.
    pub simple_upper: u128,
    /// Product of the first `⌊log₂ k⌋` primes `≡ 1 (mod 4)`.
    pub primorial_lower: u128,
}

/// Factors `n` by trial division over a 2-3-5 wheel.
pub fn factorize(n: u64) -> Result<Factorization> {
    if n == 0 {
        return Err(Error::NotPositive("n"));
    }
    let mut rest = n;
    let mut out = Vec::new();
    let mut take = |p: u64, rest: &mut u64| {
        let mut e = 0;
        while (*rest).is_multiple_of(p) {
            *rest /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    };
    for p in [2u64, 3, 5] {
        take(p, &mut rest);
    }
    const GAPS: [u64; 8] = [4, 2, 4, 2, 4, 6, 2, 6];
    let mut p = 7u64;
    let mut gap = 0;
    while p <= rest / p {
        take(p, &mut rest);
        p += GAPS[gap];
        gap = (gap + 1) % GAPS.len();
    }
    if rest > 1 {
        out.push((rest, 1));
    }
    Ok(Factorization(out))
}

/// Number of ordered pairs `(a, b) ∈ ℤ²` with `a² + b² = d`.
pub fn r2(d: u64) -> Result<u64> {
    if d == 0 {
        return Err(Error::NotPositive("d"));
    }
    Ok(factorize(d)?.sum_of_two_squares_count())
}

/// All `(a, b)` with `a ≥ 1`, `b ≥ 0`, `a² + b² = d`, ascending in `a`.
///
/// Rotating by quarter turns maps these onto all nonzero solutions in ℤ²,
/// so the list has exactly `r₂(d) / 4` entries.
pub fn representations(d: u64) -> Result<Vec<Representation>> {
    if d == 0 {
        return Err(Error::NotPositive("d"));
    }
    let mut reps = Vec::new();
    for a in 1..=d.sqrt() {
        let rest = d - a * a;
        let b = rest.sqrt();
        if b * b == rest {
            reps.push(Representation { a, b });
        }
    }
    Ok(reps)
}

/// Smallest-prime-factor table for `0..=limit`, built once and read-only.
#[derive(Debug, Clone)]
pub struct Sieve {
    spf: Vec<u32>,
}

impl Sieve {
    pub fn new(limit: u32) -> Self {
        let len = limit as usize + 1;
        let mut spf = vec![0u32; len];
        for i in 2..len {
            if spf[i] == 0 {
                let mut j = i;
                while j < len {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        Self { spf }
    }

    pub fn limit(&self) -> u64 {
        self.spf.len() as u64 - 1
    }

    /// Factorizes via the table, falling back to trial division above the limit.
    pub fn factorize(&self, n: u64) -> Result<Factorization> {
        if n == 0 {
            return Err(Error::NotPositive("n"));
        }
        if n > self.limit() {
            return factorize(n);
        }
        let mut rest = n as usize;
        let mut out: Vec<(u64, u32)> = Vec::new();
        while rest > 1 {
            let p = self.spf[rest] as usize;
            rest /= p;
            match out.last_mut() {
                Some((q, e)) if *q == p as u64 => *e += 1,
                _ => out.push((p as u64, 1)),
            }
        }
        Ok(Factorization(out))
    }

    pub fn r2(&self, d: u64) -> Result<u64> {
        Ok(self.factorize(d)?.sum_of_two_squares_count())
    }
}

/// `r₂(d)` for every `d ≤ limit`, computed in one sieve pass.
#[derive(Debug, Clone)]
pub struct R2Table {
    values: Vec<u32>,
}

impl R2Table {
    pub fn new(limit: u32) -> Self {
        let sieve = Sieve::new(limit);
        let mut values = vec![0u32; limit as usize + 1];
        for d in 1..=limit as u64 {
            // cannot fail: d ≥ 1 and d ≤ limit
            values[d as usize] = sieve.r2(d).unwrap_or(0) as u32;
        }
        Self { values }
    }

    pub fn limit(&self) -> u64 {
        self.values.len() as u64 - 1
    }

    /// `r₂(d)`, or `None` when `d` is zero or beyond the table.
    pub fn get(&self, d: u64) -> Option<u64> {
        if d == 0 {
            return None;
        }
        self.values.get(d as usize).map(|&v| u64::from(v))
    }
}

/// Primes `≡ 1 (mod 4)` in increasing order: 5, 13, 17, 29, ...
pub fn primes_one_mod_four() -> impl Iterator<Item = u64> {
    (5u64..)
        .step_by(4)
        .filter(|&n| (3..=n.sqrt()).step_by(2).all(|q| n % q != 0))
}

/// Smallest `d` with `r₂(d) = 4k`, found by ascending enumeration over
/// `d ≤ min(budget, 5^(k−1))`.
pub fn n_k(k: u64, budget: u64) -> Result<u64> {
    if k == 0 {
        return Err(Error::NotPositive("k"));
    }
    if budget == 0 {
        return Err(Error::NotPositive("budget"));
    }
    let target = k.checked_mul(4).ok_or(Error::Overflow("4k"))?;
    let cap = match simple_upper(k) {
        Ok(v) => v.min(u128::from(budget)) as u64,
        Err(_) => budget,
    };
    let cap = cap.min(u64::from(u32::MAX));
    // Grow the table geometrically so small k stay cheap.
    let mut scanned = 0u64;
    let mut limit = 1024u64.min(cap);
    loop {
        let table = R2Table::new(limit as u32);
        for d in scanned + 1..=limit {
            if table.get(d) == Some(target) {
                return Ok(d);
            }
        }
        if limit == cap {
            return Err(Error::BudgetExhausted { budget });
        }
        scanned = limit;
        limit = limit.saturating_mul(4).min(cap);
    }
}

fn simple_upper(k: u64) -> Result<u128> {
    let e = u32::try_from(k - 1).map_err(|_| Error::Overflow("5^(k-1)"))?;
    5u128.checked_pow(e).ok_or(Error::Overflow("5^(k-1)"))
}

/// The constructive bound `n_k′`: with `k = q₁^a₁ ⋯ q_m^a_m`, `q₁ > ⋯ > q_m`,
/// the `a₁` smallest primes `≡ 1 (mod 4)` get exponent `q₁ − 1`, the next
/// `a₂` get `q₂ − 1`, and so on.
pub fn n_k_constructive_upper(k: u64) -> Result<u128> {
    if k == 0 {
        return Err(Error::NotPositive("k"));
    }
    let mut factors = factorize(k)?.pairs().to_vec();
    factors.sort_by_key(|&(q, _)| core::cmp::Reverse(q));
    let mut primes = primes_one_mod_four();
    let mut acc: u128 = 1;
    for (q, count) in factors {
        let exponent = u32::try_from(q - 1).map_err(|_| Error::Overflow("n_k'"))?;
        for _ in 0..count {
            let p = primes.next().ok_or(Error::Overflow("n_k'"))?;
            let power = u128::from(p)
                .checked_pow(exponent)
                .ok_or(Error::Overflow("n_k'"))?;
            acc = acc.checked_mul(power).ok_or(Error::Overflow("n_k'"))?;
        }
    }
    Ok(acc)
}

pub fn n_k_bounds(k: u64) -> Result<NkBounds> {
    if k == 0 {
        return Err(Error::NotPositive("k"));
    }
    let t = 63 - k.leading_zeros();
    let primorial_lower = primes_one_mod_four()
        .take(t as usize)
        .try_fold(1u128, |acc, p| acc.checked_mul(u128::from(p)))
        .ok_or(Error::Overflow("primorial"))?;
    Ok(NkBounds {
        k,
        constructive_upper: n_k_constructive_upper(k)?,
        simple_upper: simple_upper(k)?,
        primorial_lower,
    })
}
