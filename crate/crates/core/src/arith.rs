//! Sieved arithmetic functions: Λ, μ, τ, smallest prime factors and the mollified coefficient.

use crate::error::{range_err, Result};

pub const MAX_LIMIT: usize = 100_000_000;

/// Immutable sieve tables on `0..=limit`.
#[derive(Clone, Debug)]
pub struct ArithTables {
    limit: usize,
    spf: Vec<u32>,
    lambda: Vec<f64>,
    mu: Vec<i8>,
    tau: Vec<u16>,
    primes: Vec<u32>,
}

/// Builds the tables with a linear sieve. Requires `2 <= limit <= 1e8`.
pub fn sieve_tables(limit: usize) -> Result<ArithTables> {
    if !(2..=MAX_LIMIT).contains(&limit) {
        return Err(range_err(
            "limit",
            limit as f64,
            format!("[2, {MAX_LIMIT}]"),
        ));
    }
    let n = limit + 1;
    let mut spf = vec![0u32; n];
    let mut mu = vec![0i8; n];
    let mut tau = vec![0u16; n];
    // exponent of the smallest prime, only needed during the sieve
    let mut exp = vec![0u8; n];
    let mut primes = Vec::with_capacity(if limit < 100 { 32 } else { limit / 15 });
    mu[1] = 1;
    tau[1] = 1;
    for i in 2..n {
        if spf[i] == 0 {
            spf[i] = i as u32;
            primes.push(i as u32);
            mu[i] = -1;
            tau[i] = 2;
            exp[i] = 1;
        }
        let si = spf[i];
        for &p in &primes {
            let ip = i * p as usize;
            if p > si || ip > limit {
                break;
            }
            spf[ip] = p;
            if p == si {
                exp[ip] = exp[i] + 1;
                mu[ip] = 0;
                let e = exp[i] as u32;
                tau[ip] = (tau[i] as u32 / (e + 1) * (e + 2)) as u16;
            } else {
                exp[ip] = 1;
                mu[ip] = -mu[i];
                tau[ip] = tau[i] * 2;
            }
        }
    }
    drop(exp);
    let mut lambda = vec![0.0f64; n];
    for &p in &primes {
        let lp = (p as f64).ln();
        let mut q = p as usize;
        loop {
            lambda[q] = lp;
            match q.checked_mul(p as usize) {
                Some(next) if next <= limit => q = next,
                _ => break,
            }
        }
    }
    Ok(ArithTables {
        limit,
        spf,
        lambda,
        mu,
        tau,
        primes,
    })
}

impl ArithTables {
    pub fn new(limit: usize) -> Result<Self> {
        sieve_tables(limit)
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    pub fn lambda_slice(&self) -> &[f64] {
        &self.lambda
    }

    #[inline]
    pub fn lambda(&self, n: usize) -> f64 {
        self.lambda[n]
    }

    #[inline]
    pub fn mu(&self, n: usize) -> i8 {
        self.mu[n]
    }

    #[inline]
    pub fn tau(&self, n: usize) -> u32 {
        self.tau[n] as u32
    }

    #[inline]
    pub fn spf(&self, n: usize) -> u32 {
        self.spf[n]
    }

    fn check(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.limit {
            return Err(range_err("n", n as f64, format!("[1, {}]", self.limit)));
        }
        Ok(())
    }

    /// Distinct prime factors of `n` in ascending order.
    pub fn distinct_primes(&self, mut n: usize) -> Result<Vec<u32>> {
        self.check(n)?;
        let mut out = Vec::new();
        while n > 1 {
            let p = self.spf[n];
            out.push(p);
            while n % p as usize == 0 {
                n /= p as usize;
            }
        }
        Ok(out)
    }

    /// a(n, M) = Σ_{d | n, d ≤ M} μ(d), by enumerating squarefree divisors.
    pub fn mollified_coefficient(&self, n: usize, m: f64) -> Result<i64> {
        if !(m >= 1.0) {
            return Err(range_err("M", m, "[1, inf)"));
        }
        let primes = self.distinct_primes(n)?;
        Ok(signed_divisor_sum(&primes, m.floor() as u64))
    }

    /// Chebyshev ψ(x) = Σ_{n ≤ x} Λ(n).
    pub fn psi(&self, x: usize) -> f64 {
        self.lambda[1..=x.min(self.limit)].iter().sum()
    }

    /// M(1) = Σ_{m ≤ M} μ(m)/m.
    pub fn mobius_harmonic(&self, m: f64) -> Result<f64> {
        let top = m.floor() as usize;
        if top > self.limit {
            return Err(range_err("M", m, format!("[1, {}]", self.limit)));
        }
        Ok((1..=top).map(|k| self.mu[k] as f64 / k as f64).sum())
    }
}

/// Σ over squarefree products d of `primes` with d ≤ cap of (-1)^{ω(d)}.
pub fn signed_divisor_sum(primes: &[u32], cap: u64) -> i64 {
    fn go(primes: &[u32], d: u64, sign: i64, cap: u64) -> i64 {
        let mut total = sign;
        for (i, &p) in primes.iter().enumerate() {
            let next = d * p as u64;
            if next <= cap {
                total += go(&primes[i + 1..], next, -sign, cap);
            }
        }
        total
    }
    if cap == 0 {
        return 0;
    }
    go(primes, 1, 1, cap)
}

/// a(n, M) for every n in `0..=n_max` by a sieve over divisors; entry 0 is unused.
pub fn mollified_table(tables: &ArithTables, m: f64, n_max: usize) -> Result<Vec<i32>> {
    if !(m >= 1.0) {
        return Err(range_err("M", m, "[1, inf)"));
    }
    let cap = (m.floor() as usize).min(n_max);
    if cap > tables.limit() {
        return Err(range_err("M", m, format!("[1, {}]", tables.limit())));
    }
    let mut a = vec![0i32; n_max + 1];
    for d in 1..=cap {
        let s = tables.mu(d) as i32;
        if s == 0 {
            continue;
        }
        let mut k = d;
        while k <= n_max {
            a[k] += s;
            k += d;
        }
    }
    Ok(a)
}
