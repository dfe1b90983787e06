//! Deterministic exact sampling: constrained phase-space points and
//! ellipsoidal chart points with bounded denominators.

use num_traits::{One, Zero};

use crate::scalar::{rat, ratio, Rat};
use crate::{Error, Result};

/// SplitMix64: tiny, stable, seedable generator. All randomness in the
/// crate flows through explicit seeds so every run is reproducible.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in `0..m`.
    pub fn below(&mut self, m: u64) -> u64 {
        self.next_u64() % m.max(1)
    }

    /// Small random rational with numerator in `-bound..=bound` and
    /// denominator in `1..=den_bound`.
    pub fn small_rat(&mut self, bound: u64, den_bound: u64) -> Rat {
        let num = self.below(2 * bound + 1) as i64 - bound as i64;
        let den = 1 + self.below(den_bound) as i64;
        ratio(num, den)
    }

    /// Nonzero variant of [`Self::small_rat`].
    pub fn small_rat_nonzero(&mut self, bound: u64, den_bound: u64) -> Rat {
        loop {
            let r = self.small_rat(bound, den_bound);
            if !r.is_zero() {
                return r;
            }
        }
    }
}

/// Exact point of the constraint surface `sum q^2 = 1`, `sum p q = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstrainedPoint {
    pub q: Vec<Rat>,
    pub p: Vec<Rat>,
}

impl ConstrainedPoint {
    /// Both constraint residuals, which must be exactly zero.
    pub fn residuals(&self) -> (Rat, Rat) {
        let q2: Rat = self.q.iter().map(|x| x * x).sum();
        let pq: Rat = self.q.iter().zip(&self.p).map(|(a, b)| a * b).sum();
        (q2 - Rat::one(), pq)
    }
}

/// Rational stereographic chart: `u in Q^n -> q = (2u, |u|^2 - 1) / (|u|^2 + 1)`.
fn stereographic(u: &[Rat]) -> Vec<Rat> {
    let norm2: Rat = u.iter().map(|x| x * x).sum();
    let den = &norm2 + Rat::one();
    let mut q: Vec<Rat> = u.iter().map(|x| rat(2) * x / &den).collect();
    q.push((&norm2 - Rat::one()) / &den);
    q
}

/// Samples an exact point of `{q^2 = 1, p.q = 0}` in `R^{n+1}`.
///
/// Deterministic in the seed. With `nonvanishing` set, resamples until every
/// coordinate `q_alpha` is nonzero.
pub fn sample_constrained_point(
    seed: u64,
    n: usize,
    nonvanishing: bool,
) -> Result<ConstrainedPoint> {
    if n < 2 {
        return Err(Error::BadDimension("n >= 2"));
    }
    let mut rng = SplitMix64::new(seed);
    loop {
        let u: Vec<Rat> = (0..n).map(|_| rng.small_rat(8, 4)).collect();
        let q = stereographic(&u);
        if nonvanishing && q.iter().any(|x| x.is_zero()) {
            continue;
        }
        let w: Vec<Rat> = (0..=n).map(|_| rng.small_rat(8, 4)).collect();
        let wq: Rat = w.iter().zip(&q).map(|(a, b)| a * b).sum();
        let p: Vec<Rat> = w.iter().zip(&q).map(|(wi, qi)| wi - &wq * qi).collect();
        if p.iter().all(|x| x.is_zero()) {
            continue; // w was parallel to q; try again
        }
        return Ok(ConstrainedPoint { q, p });
    }
}

/// Samples `x` with `a_{i-1} < x^i < a_i` from the middle half of each gap,
/// denominators bounded by 10^4.
pub fn sample_chart_x(rng: &mut SplitMix64, a: &[Rat]) -> Vec<Rat> {
    let n = a.len() - 1;
    (0..n)
        .map(|i| {
            let t = ratio(2500 + rng.below(5000) as i64, 10_000);
            &a[i] + (&a[i + 1] - &a[i]) * t
        })
        .collect()
}

/// Random covector with small nonzero rational entries.
pub fn sample_xi(rng: &mut SplitMix64, n: usize) -> Vec<Rat> {
    (0..n).map(|_| rng.small_rat_nonzero(6, 4)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stereographic_pole() {
        let q = stereographic(&[rat(0), rat(0)]);
        assert_eq!(q, vec![rat(0), rat(0), rat(-1)]);
    }

    #[test]
    fn constraints_hold_exactly() {
        for seed in 0..24 {
            let pt = sample_constrained_point(seed, 2, false).unwrap();
            let (r1, r2) = pt.residuals();
            assert!(r1.is_zero(), "q^2 - 1 != 0 at seed {seed}");
            assert!(r2.is_zero(), "p.q != 0 at seed {seed}");
        }
    }

    #[test]
    fn nonvanishing_request_is_honored() {
        for seed in 0..12 {
            let pt = sample_constrained_point(seed, 3, true).unwrap();
            assert!(pt.q.iter().all(|x| !x.is_zero()));
        }
    }

    #[test]
    fn seed_determinism() {
        let a = sample_constrained_point(1, 2, false).unwrap();
        let b = sample_constrained_point(1, 2, false).unwrap();
        assert_eq!(a, b);
        // spec example: seed 1, n = 2 gives an exact point with p.q = 0
        let (r1, r2) = a.residuals();
        assert!(r1.is_zero() && r2.is_zero());
    }

    #[test]
    fn chart_points_interlace() {
        let a = [rat(1), rat(2), rat(4), rat(7)];
        let mut rng = SplitMix64::new(7);
        for _ in 0..50 {
            let x = sample_chart_x(&mut rng, &a);
            for i in 0..x.len() {
                assert!(a[i] < x[i] && x[i] < a[i + 1]);
            }
        }
    }

    #[test]
    fn small_dimension_rejected() {
        assert!(sample_constrained_point(0, 1, false).is_err());
    }
}
