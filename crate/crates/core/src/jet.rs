//! Truncated multivariate Taylor expansions at a rational base point.
//!
//! A [`Jet`] stores the Taylor coefficients `c_beta = D^beta f / beta!` of a
//! function at its base point, up to a fixed truncation order. Arithmetic on
//! jets is exact: the order-`K` jet of `f*g` equals the product of the
//! order-`K` jets truncated at `K`, so evaluating a rational expression on
//! variable jets yields exact derivatives of the expression — the exact
//! differentiation backend for Christoffel symbols, curvature tensors and
//! operator coefficients.

use std::collections::BTreeMap;

use crate::scalar::{GaussianRational, Rat, Scalar};
use crate::{Error, Result};

/// Largest supported truncation order. Commutators of two second-order
/// operators consume test-function derivatives to order 4 and nothing in
/// this crate needs more.
pub const MAX_ORDER: usize = 4;

type MultiIndex = Vec<u8>;

fn index_degree(idx: &[u8]) -> usize {
    idx.iter().map(|&e| e as usize).sum()
}

/// Truncated Taylor expansion of a function at a base point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet<T: Scalar = Rat> {
    base: Vec<T>,
    order: usize,
    coeffs: BTreeMap<MultiIndex, T>,
}

impl<T: Scalar> Jet<T> {
    /// Jet of a constant function.
    pub fn constant(value: T, base: &[T], order: usize) -> Result<Self> {
        if order > MAX_ORDER {
            return Err(Error::OrderOverflow(order, MAX_ORDER));
        }
        let mut coeffs = BTreeMap::new();
        if !value.is_zero() {
            coeffs.insert(vec![0u8; base.len()], value);
        }
        Ok(Self {
            base: base.to_vec(),
            order,
            coeffs,
        })
    }

    /// Jet of the coordinate function `x_i`.
    pub fn variable(base: &[T], i: usize, order: usize) -> Result<Self> {
        let mut jet = Self::constant(base[i].clone(), base, order)?;
        if order >= 1 {
            let mut idx = vec![0u8; base.len()];
            idx[i] = 1;
            jet.coeffs.insert(idx, T::one());
        }
        Ok(jet)
    }

    /// One variable jet per coordinate, at a shared base point.
    pub fn variables(base: &[T], order: usize) -> Result<Vec<Self>> {
        (0..base.len())
            .map(|i| Self::variable(base, i, order))
            .collect()
    }

    pub fn nvars(&self) -> usize {
        self.base.len()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn base(&self) -> &[T] {
        &self.base
    }

    /// Value of the underlying function at the base point.
    pub fn value(&self) -> T {
        self.coeff(&vec![0u8; self.nvars()])
    }

    /// Taylor coefficient `D^beta f / beta!`.
    pub fn coeff(&self, idx: &[u8]) -> T {
        self.coeffs.get(idx).cloned().unwrap_or_else(T::zero)
    }

    /// Exact partial derivative `D^beta f` at the base point.
    pub fn derivative_value(&self, idx: &[u8]) -> T {
        let mut fact = Rat::from_integer(1.into());
        for &e in idx {
            for k in 2..=e as i64 {
                fact *= Rat::from_integer(k.into());
            }
        }
        self.coeff(idx).mul(&T::from_rat(&fact))
    }

    fn compatible(&self, rhs: &Self) -> &Self {
        assert_eq!(self.nvars(), rhs.nvars(), "jet variable count mismatch");
        debug_assert_eq!(self.base, rhs.base, "jets must share a base point");
        self
    }

    pub fn add(&self, rhs: &Self) -> Self {
        self.compatible(rhs);
        let order = self.order.min(rhs.order);
        let mut coeffs = BTreeMap::new();
        for (idx, c) in self.coeffs.iter().chain(rhs.coeffs.iter()) {
            if index_degree(idx) > order {
                continue;
            }
            let entry = coeffs.entry(idx.clone()).or_insert_with(T::zero);
            *entry = entry.add(c);
        }
        coeffs.retain(|_, c| !c.is_zero());
        Self {
            base: self.base.clone(),
            order,
            coeffs,
        }
    }

    pub fn neg(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(i, c)| (i.clone(), c.neg()))
            .collect();
        Self {
            base: self.base.clone(),
            order: self.order,
            coeffs,
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn scale(&self, s: &T) -> Self {
        if s.is_zero() {
            return Self {
                base: self.base.clone(),
                order: self.order,
                coeffs: BTreeMap::new(),
            };
        }
        let coeffs = self
            .coeffs
            .iter()
            .map(|(i, c)| (i.clone(), c.mul(s)))
            .collect();
        Self {
            base: self.base.clone(),
            order: self.order,
            coeffs,
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        self.compatible(rhs);
        let order = self.order.min(rhs.order);
        let mut coeffs: BTreeMap<MultiIndex, T> = BTreeMap::new();
        for (ia, ca) in &self.coeffs {
            let da = index_degree(ia);
            if da > order {
                continue;
            }
            for (ib, cb) in &rhs.coeffs {
                if da + index_degree(ib) > order {
                    continue;
                }
                let idx: MultiIndex = ia.iter().zip(ib).map(|(a, b)| a + b).collect();
                let entry = coeffs.entry(idx).or_insert_with(T::zero);
                *entry = entry.add(&ca.mul(cb));
            }
        }
        coeffs.retain(|_, c| !c.is_zero());
        Self {
            base: self.base.clone(),
            order,
            coeffs,
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out =
            Self::constant(T::one(), &self.base, self.order).expect("order already validated");
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Reciprocal of a unit jet (nonzero value at base).
    pub fn try_inv(&self) -> Result<Self> {
        let v = self.value();
        let v_inv = v.inv().ok_or(Error::PoleAtBase)?;
        // 1/f = (1/v) * sum_m h^m with h = 1 - f/v nilpotent at the truncation.
        let h = Self::constant(T::one(), &self.base, self.order)?.sub(&self.scale(&v_inv));
        let mut acc = Self::constant(T::one(), &self.base, self.order)?;
        let mut power = Self::constant(T::one(), &self.base, self.order)?;
        for _ in 0..self.order {
            power = power.mul(&h);
            if power.coeffs.is_empty() {
                break;
            }
            acc = acc.add(&power);
        }
        Ok(acc.scale(&v_inv))
    }

    pub fn try_div(&self, rhs: &Self) -> Result<Self> {
        Ok(self.mul(&rhs.try_inv()?))
    }

    /// Partial derivative with respect to `x_i`; the order drops by one.
    pub fn partial(&self, i: usize) -> Self {
        let order = self.order.saturating_sub(1);
        let mut coeffs = BTreeMap::new();
        for (idx, c) in &self.coeffs {
            if idx[i] == 0 {
                continue;
            }
            let mut out = idx.clone();
            out[i] -= 1;
            if index_degree(&out) > order {
                continue;
            }
            let factor = T::from_rat(&Rat::from_integer((idx[i] as i64).into()));
            coeffs.insert(out, c.mul(&factor));
        }
        Self {
            base: self.base.clone(),
            order,
            coeffs,
        }
    }

    /// Re-truncates to a lower order.
    pub fn truncate(&self, order: usize) -> Self {
        let order = order.min(self.order);
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(idx, _)| index_degree(idx) <= order)
            .map(|(i, c)| (i.clone(), c.clone()))
            .collect();
        Self {
            base: self.base.clone(),
            order,
            coeffs,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Iterates over the stored (index, coefficient) pairs.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &T)> {
        self.coeffs.iter()
    }
}

impl Jet<Rat> {
    /// Re-embeds a rational jet into the Gaussian-rational algebra.
    pub fn to_gaussian(&self) -> Jet<GaussianRational> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(i, c)| (i.clone(), GaussianRational::real(c.clone())))
            .collect();
        Jet {
            base: self
                .base
                .iter()
                .map(|b| GaussianRational::real(b.clone()))
                .collect(),
            order: self.order,
            coeffs,
        }
    }
}

/// Lifts a rational expression (any closure built from jet arithmetic) to
/// its exact Taylor expansion at `base`.
pub fn lift<T, F>(f: F, base: &[T], order: usize) -> Result<Jet<T>>
where
    T: Scalar,
    F: FnOnce(&[Jet<T>]) -> Result<Jet<T>>,
{
    let vars = Jet::variables(base, order)?;
    f(&vars)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, ratio};
    use proptest::prelude::*;

    fn b3() -> Vec<Rat> {
        vec![rat(2), rat(3), rat(5)]
    }

    #[test]
    fn variable_jet_shape() {
        let j = Jet::variable(&b3(), 0, 2).unwrap();
        assert_eq!(j.value(), rat(2));
        assert_eq!(j.coeff(&[1, 0, 0]), rat(1));
        assert_eq!(j.coeff(&[0, 1, 0]), rat(0));
        assert_eq!(j.coeff(&[2, 0, 0]), rat(0));
    }

    #[test]
    fn reciprocal_geometric_series() {
        // 1/x at x = 2: 1/2 - (x-2)/4 + (x-2)^2/8 - ...
        let base = vec![rat(2)];
        let j = Jet::variable(&base, 0, 2).unwrap().try_inv().unwrap();
        assert_eq!(j.coeff(&[0]), ratio(1, 2));
        assert_eq!(j.coeff(&[1]), ratio(-1, 4));
        assert_eq!(j.coeff(&[2]), ratio(1, 8));
        // second derivative = 2! * coefficient
        assert_eq!(j.derivative_value(&[2]), ratio(1, 4));
    }

    #[test]
    fn pole_at_base_is_an_error() {
        let base = vec![rat(0)];
        let j = Jet::variable(&base, 0, 2).unwrap();
        assert!(matches!(j.try_inv(), Err(Error::PoleAtBase)));
    }

    #[test]
    fn order_cap_enforced() {
        assert!(matches!(
            Jet::constant(rat(1), &b3(), 5),
            Err(Error::OrderOverflow(5, MAX_ORDER))
        ));
    }

    /// Independent oracle: expand a polynomial sum_m c_m prod x_i^{e_i}
    /// around `base` by brute-force binomial shifting, no jet arithmetic.
    fn shift_poly(terms: &[(Vec<u8>, Rat)], base: &[Rat], order: usize) -> BTreeMap<Vec<u8>, Rat> {
        fn binom(n: u8, k: u8) -> Rat {
            let mut r = Rat::from_integer(1.into());
            for j in 0..k {
                r *= ratio((n - j) as i64, (j + 1) as i64);
            }
            r
        }
        let mut out: BTreeMap<Vec<u8>, Rat> = BTreeMap::new();
        for (exps, c) in terms {
            // expand prod (b_i + d_i)^{e_i} over all sub-exponents
            let mut acc: Vec<(Vec<u8>, Rat)> = vec![(vec![0; base.len()], c.clone())];
            for (i, &e) in exps.iter().enumerate() {
                let mut next = Vec::new();
                for k in 0..=e {
                    let w = binom(e, k) * base[i].pow((e - k) as i32);
                    for (idx, coef) in &acc {
                        let mut idx2 = idx.clone();
                        idx2[i] = k;
                        next.push((idx2, coef * &w));
                    }
                }
                acc = next;
            }
            for (idx, coef) in acc {
                if index_degree(&idx) <= order {
                    *out.entry(idx).or_insert_with(Rat::zero) += coef;
                }
            }
        }
        out.retain(|_, c| !num_traits::Zero::is_zero(c));
        out
    }

    #[test]
    fn elementary_symmetric_matches_shift_oracle() {
        // sigma_2(x) = x1 x2 + x1 x3 + x2 x3 at base (2, 3, 5)
        let base = b3();
        let terms = vec![
            (vec![1, 1, 0], rat(1)),
            (vec![1, 0, 1], rat(1)),
            (vec![0, 1, 1], rat(1)),
        ];
        let expected = shift_poly(&terms, &base, 4);
        let jet = lift(
            |v: &[Jet<Rat>]| Ok(v[0].mul(&v[1]).add(&v[0].mul(&v[2])).add(&v[1].mul(&v[2]))),
            &base,
            4,
        )
        .unwrap();
        let got: BTreeMap<_, _> = jet.terms().map(|(i, c)| (i.clone(), c.clone())).collect();
        assert_eq!(got, expected);
    }

    fn small_rat() -> impl Strategy<Value = Rat> {
        (-6i64..=6, 1i64..=3).prop_map(|(n, d)| ratio(n, d))
    }

    fn poly_terms(nvars: usize) -> impl Strategy<Value = Vec<(Vec<u8>, Rat)>> {
        prop::collection::vec((prop::collection::vec(0u8..=2, nvars), small_rat()), 1..5)
    }

    fn eval_terms(terms: &[(Vec<u8>, Rat)], base: &[Rat], order: usize) -> Jet<Rat> {
        let vars = Jet::variables(base, order).unwrap();
        let mut acc = Jet::constant(rat(0), base, order).unwrap();
        for (exps, c) in terms {
            let mut t = Jet::constant(c.clone(), base, order).unwrap();
            for (i, &e) in exps.iter().enumerate() {
                t = t.mul(&vars[i].pow(e as u32));
            }
            acc = acc.add(&t);
        }
        acc
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        /// Composite of jets equals jet of composite: f*g + h evaluated
        /// through jet arithmetic matches the brute-force shift oracle.
        #[test]
        fn composite_matches_oracle(
            f in poly_terms(3),
            g in poly_terms(3),
            h in poly_terms(3),
        ) {
            let base = b3();
            let jf = eval_terms(&f, &base, 4);
            let jg = eval_terms(&g, &base, 4);
            let jh = eval_terms(&h, &base, 4);
            let got = jf.mul(&jg).add(&jh);

            // oracle: multiply the raw polynomials first, then shift
            let mut prod: Vec<(Vec<u8>, Rat)> = Vec::new();
            for (ea, ca) in &f {
                for (eb, cb) in &g {
                    let e: Vec<u8> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                    prod.push((e, ca * cb));
                }
            }
            prod.extend(h.iter().cloned());
            let expected = shift_poly(&prod, &base, 4);
            let gotmap: BTreeMap<_, _> = got.terms().map(|(i, c)| (i.clone(), c.clone())).collect();
            prop_assert_eq!(gotmap, expected);
        }

        /// f * (1/f) == 1 exactly for unit jets.
        #[test]
        fn reciprocal_is_exact(f in poly_terms(3)) {
            let base = b3();
            let jf = eval_terms(&f, &base, 4);
            prop_assume!(!jf.value().is_zero());
            let one = jf.mul(&jf.try_inv().unwrap());
            let expected = Jet::constant(rat(1), &base, 4).unwrap();
            prop_assert_eq!(one, expected);
        }

        /// Leibniz at the jet level: d(fg) = df g + f dg.
        #[test]
        fn partial_satisfies_leibniz(f in poly_terms(3), g in poly_terms(3), i in 0usize..3) {
            let base = b3();
            let jf = eval_terms(&f, &base, 4);
            let jg = eval_terms(&g, &base, 4);
            let lhs = jf.mul(&jg).partial(i);
            let rhs = jf.partial(i).mul(&jg.truncate(3)).add(&jf.truncate(3).mul(&jg.partial(i)));
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn derivative_of_constant_is_zero() {
        let j = Jet::constant(ratio(7, 3), &b3(), 3).unwrap();
        for i in 0..3 {
            assert!(j.partial(i).is_zero());
        }
    }
}
