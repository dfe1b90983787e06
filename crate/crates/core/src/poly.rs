//! Multivariate polynomials on `T*R^{n+1}` over exact rationals.
//!
//! Variables are the ambient positions `q_0..q_n` followed by the momenta
//! `p_0..p_n`; exponent vectors are dense byte arrays keyed by variable
//! index. All observables of the three systems live here.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use crate::scalar::Rat;

type Expo = Vec<u8>;

/// Polynomial in `q_0..q_n, p_0..p_n` with rational coefficients.
///
/// Invariant: no zero coefficient is ever stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhasePoly {
    /// Number of ambient coordinates (`n + 1`); the variable count is twice this.
    ncoords: usize,
    terms: BTreeMap<Expo, Rat>,
}

impl PhasePoly {
    pub fn zero(ncoords: usize) -> Self {
        Self {
            ncoords,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(ncoords: usize, c: Rat) -> Self {
        let mut poly = Self::zero(ncoords);
        if !c.is_zero() {
            poly.terms.insert(vec![0; 2 * ncoords], c);
        }
        poly
    }

    /// The coordinate monomial `q_alpha`.
    pub fn q(ncoords: usize, alpha: usize) -> Self {
        Self::monomial(ncoords, alpha)
    }

    /// The momentum monomial `p_alpha`.
    pub fn p(ncoords: usize, alpha: usize) -> Self {
        Self::monomial(ncoords, ncoords + alpha)
    }

    fn monomial(ncoords: usize, var: usize) -> Self {
        let mut expo = vec![0u8; 2 * ncoords];
        expo[var] = 1;
        let mut terms = BTreeMap::new();
        terms.insert(expo, Rat::from_integer(1.into()));
        Self { ncoords, terms }
    }

    pub fn ncoords(&self) -> usize {
        self.ncoords
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> usize {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&x| x as usize).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(
            self.ncoords, rhs.ncoords,
            "polynomials over different variable sets"
        );
        let mut terms = self.terms.clone();
        for (e, c) in &rhs.terms {
            let entry = terms.entry(e.clone()).or_insert_with(Rat::zero);
            *entry += c;
            if entry.is_zero() {
                terms.remove(e);
            }
        }
        Self {
            ncoords: self.ncoords,
            terms,
        }
    }

    pub fn neg(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| (e.clone(), -c.clone()))
            .collect();
        Self {
            ncoords: self.ncoords,
            terms,
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn scale(&self, s: &Rat) -> Self {
        if s.is_zero() {
            return Self::zero(self.ncoords);
        }
        let terms = self.terms.iter().map(|(e, c)| (e.clone(), c * s)).collect();
        Self {
            ncoords: self.ncoords,
            terms,
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(
            self.ncoords, rhs.ncoords,
            "polynomials over different variable sets"
        );
        let mut terms: BTreeMap<Expo, Rat> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e: Expo = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                let entry = terms.entry(e).or_insert_with(Rat::zero);
                *entry += ca * cb;
            }
        }
        terms.retain(|_, c| !c.is_zero());
        Self {
            ncoords: self.ncoords,
            terms,
        }
    }

    pub fn square(&self) -> Self {
        self.mul(self)
    }

    fn deriv_var(&self, var: usize) -> Self {
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            if e[var] == 0 {
                continue;
            }
            let mut out = e.clone();
            out[var] -= 1;
            terms.insert(out, c * Rat::from_integer((e[var] as i64).into()));
        }
        Self {
            ncoords: self.ncoords,
            terms,
        }
    }

    /// Partial derivative with respect to `q_alpha`.
    pub fn deriv_q(&self, alpha: usize) -> Self {
        self.deriv_var(alpha)
    }

    /// Partial derivative with respect to `p_alpha`.
    pub fn deriv_p(&self, alpha: usize) -> Self {
        self.deriv_var(self.ncoords + alpha)
    }

    /// Exact evaluation at a phase-space point.
    pub fn eval(&self, q: &[Rat], p: &[Rat]) -> Rat {
        assert_eq!(q.len(), self.ncoords);
        assert_eq!(p.len(), self.ncoords);
        let mut acc = Rat::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, &exp) in e.iter().enumerate() {
                if exp == 0 {
                    continue;
                }
                let v = if i < self.ncoords {
                    &q[i]
                } else {
                    &p[i - self.ncoords]
                };
                t *= v.pow(exp as i32);
            }
            acc += t;
        }
        acc
    }

    /// Substitutes `q_alpha -> sq[alpha] * q_alpha`, `p_alpha -> sp[alpha] * p_alpha`.
    pub fn rescale_vars(&self, sq: &[Rat], sp: &[Rat]) -> Self {
        assert_eq!(sq.len(), self.ncoords);
        assert_eq!(sp.len(), self.ncoords);
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            let mut coef = c.clone();
            for (i, &exp) in e.iter().enumerate() {
                if exp == 0 {
                    continue;
                }
                let s = if i < self.ncoords {
                    &sq[i]
                } else {
                    &sp[i - self.ncoords]
                };
                coef *= s.pow(exp as i32);
            }
            if !coef.is_zero() {
                terms.insert(e.clone(), coef);
            }
        }
        Self {
            ncoords: self.ncoords,
            terms,
        }
    }

    /// Adds `delta` to the coefficient of the given monomial; the negative
    /// controls use this to perturb a single coefficient.
    pub fn perturb_term(&self, expo: &[u8], delta: &Rat) -> Self {
        let mut out = self.clone();
        let entry = out.terms.entry(expo.to_vec()).or_insert_with(Rat::zero);
        *entry += delta;
        if entry.is_zero() {
            out.terms.remove(expo);
        }
        out
    }

    /// First stored monomial, if any (deterministic by the map ordering).
    pub fn leading_term(&self) -> Option<(&Expo, &Rat)> {
        self.terms.iter().next()
    }
}

/// Canonical Poisson bracket with the convention
/// `{P, Q} = sum_alpha dP/dq_alpha dQ/dp_alpha - dP/dp_alpha dQ/dq_alpha`.
///
/// Every bracket identity in this crate is stated and verified under this
/// single sign convention.
pub fn poisson_bracket(f: &PhasePoly, g: &PhasePoly) -> PhasePoly {
    assert_eq!(
        f.ncoords(),
        g.ncoords(),
        "polynomials over different variable sets"
    );
    let n = f.ncoords();
    let mut acc = PhasePoly::zero(n);
    for alpha in 0..n {
        let term = f
            .deriv_q(alpha)
            .mul(&g.deriv_p(alpha))
            .sub(&f.deriv_p(alpha).mul(&g.deriv_q(alpha)));
        acc = acc.add(&term);
    }
    acc
}

impl fmt::Display for PhasePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for (i, &exp) in e.iter().enumerate() {
                if exp == 0 {
                    continue;
                }
                if i < self.ncoords {
                    write!(f, "*q{}", i)?;
                } else {
                    write!(f, "*p{}", i - self.ncoords)?;
                }
                if exp > 1 {
                    write!(f, "^{exp}")?;
                }
            }
        }
        Ok(())
    }
}
