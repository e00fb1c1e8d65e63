use alloc::vec::Vec;

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) since acc = C(n, i).
        let num = u128::from(n - i);
        let den = u128::from(i + 1);
        acc = match acc.checked_mul(num) {
            Some(v) => v / den,
            None => {
                let g = num_integer::gcd(acc, den);
                match (acc / g).checked_mul(num / (den / g)) {
                    Some(v) => v,
                    None => return u128::MAX,
                }
            }
        };
    }
    acc
}

/// Lexicographic walk over the `k`-element subsets of `0..n`.
///
/// Subsets are kept as strictly increasing index vectors, so the rank of a
/// subset in this walk is its lexicographic rank.
#[derive(Debug, Clone)]
pub struct Combinations {
    n: u64,
    indices: Vec<u64>,
    done: bool,
}

impl Combinations {
    pub fn new(n: u64, k: usize) -> Self {
        let done = k as u64 > n;
        let indices = if done { Vec::new() } else { (0..k as u64).collect() };
        Self { n, indices, done }
    }

    /// Starts the walk at lexicographic rank `rank`.
    pub fn from_rank(n: u64, k: usize, mut rank: u128) -> Self {
        let k64 = k as u64;
        if k64 > n || rank >= binomial(n, k64) {
            return Self { n, indices: Vec::new(), done: true };
        }
        let mut indices = Vec::with_capacity(k);
        let mut next = 0u64;
        for pos in 0..k64 {
            let remaining = k64 - pos - 1;
            loop {
                let block = binomial(n - next - 1, remaining);
                if rank < block {
                    break;
                }
                rank -= block;
                next += 1;
            }
            indices.push(next);
            next += 1;
        }
        Self { n, indices, done: false }
    }

    pub fn current(&self) -> Option<&[u64]> {
        (!self.done).then_some(self.indices.as_slice())
    }

    /// Moves to the next subset. Returns the first position whose index
    /// changed, or `None` once the walk is exhausted.
    pub fn advance(&mut self) -> Option<usize> {
        if self.done {
            return None;
        }
        let k = self.indices.len();
        let mut pos = k;
        while pos > 0 {
            let i = pos - 1;
            if self.indices[i] < self.n - (k - i) as u64 {
                self.indices[i] += 1;
                for j in i + 1..k {
                    self.indices[j] = self.indices[j - 1] + 1;
                }
                return Some(i);
            }
            pos -= 1;
        }
        self.done = true;
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_small_values() {
        assert_eq!(binomial(16, 4), 1820);
        assert_eq!(binomial(25, 5), 53130);
        assert_eq!(binomial(4, 2), 6);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(40000, 2), 799_980_000);
    }

    #[test]
    fn binomial_saturates() {
        assert_eq!(binomial(10_000, 5_000), u128::MAX);
        assert!(binomial(900, 15) > 100_000_000);
    }

    #[test]
    fn walk_visits_every_subset_in_order() {
        let mut c = Combinations::new(6, 3);
        let mut seen = Vec::new();
        loop {
            seen.push(c.current().unwrap().to_vec());
            if c.advance().is_none() {
                break;
            }
        }
        assert_eq!(seen.len(), 20);
        assert!(seen.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn unrank_matches_walk() {
        let mut c = Combinations::new(9, 4);
        let mut rank = 0u128;
        loop {
            let from = Combinations::from_rank(9, 4, rank);
            assert_eq!(from.current(), c.current());
            rank += 1;
            if c.advance().is_none() {
                break;
            }
        }
        assert_eq!(rank, binomial(9, 4));
        assert!(Combinations::from_rank(9, 4, rank).current().is_none());
    }
}
