//! Combination enumeration.
//!
//! [`RevolvingDoor`] walks all `k`-subsets of `0..n` so that consecutive
//! subsets differ by exactly one element swapped out and one swapped in
//! (Knuth, TAOCP 7.2.1.3, Algorithm R). The scan kernels use the swap to
//! update column sums in `O(M)` per visited subset.

/// Binomial coefficient `C(n, k)`, saturating at `u64::MAX`.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Revolving-door enumeration of the `k`-subsets of `0..n`.
#[derive(Debug, Clone)]
pub struct RevolvingDoor {
    // 1-based: c[1..=k] is the current subset, c[k + 1] = n is a sentinel.
    c: Vec<usize>,
    n: usize,
    k: usize,
    done: bool,
}

impl RevolvingDoor {
    /// Starts at the subset `{0, 1, ..., k - 1}`. Requires `k <= n`.
    pub fn new(n: usize, k: usize) -> Self {
        assert!(k <= n, "subset size {k} exceeds ground set size {n}");
        let mut c = Vec::with_capacity(k + 2);
        c.push(0);
        c.extend(0..k);
        c.push(n);
        RevolvingDoor {
            c,
            n,
            k,
            done: false,
        }
    }

    /// Current subset, ascending.
    pub fn current(&self) -> &[usize] {
        &self.c[1..=self.k]
    }

    /// Moves to the next subset and returns `(removed, added)`, or `None`
    /// once every subset has been visited.
    pub fn advance(&mut self) -> Option<(usize, usize)> {
        if self.done {
            return None;
        }
        let k = self.k;
        if k == 0 || k == self.n {
            self.done = true;
            return None;
        }
        let c = &mut self.c;
        let mut j = 2;
        let mut try_decrease;
        if k % 2 == 1 {
            if c[1] + 1 < c[2] {
                let old = c[1];
                c[1] += 1;
                return Some((old, c[1]));
            }
            try_decrease = true;
        } else {
            if c[1] > 0 {
                let old = c[1];
                c[1] -= 1;
                return Some((old, c[1]));
            }
            try_decrease = false;
        }
        loop {
            if j > k {
                self.done = true;
                return None;
            }
            if try_decrease {
                // here c[j] = c[j - 1] + 1
                if c[j] >= j {
                    let removed = c[j];
                    c[j] = c[j - 1];
                    c[j - 1] = j - 2;
                    return Some((removed, j - 2));
                }
                j += 1;
                try_decrease = false;
            } else {
                // here c[j - 1] = j - 2
                if c[j] + 1 < c[j + 1] {
                    let removed = c[j - 1];
                    c[j - 1] = c[j];
                    c[j] += 1;
                    return Some((removed, c[j]));
                }
                j += 1;
                try_decrease = true;
            }
        }
    }
}

/// Lexicographic successor of an ascending `k`-subset of `0..n`, in place.
/// Returns `false` after the last subset.
pub fn next_lex(subset: &mut [usize], n: usize) -> bool {
    let k = subset.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if subset[i] < n - k + i {
            subset[i] += 1;
            for j in i + 1..k {
                subset[j] = subset[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
