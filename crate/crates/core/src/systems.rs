//! Ambient-space observables of the three integrable systems and the exact
//! verification of their bracket identities on `T*R^{n+1}`.
//!
//! Sign convention: the whole crate uses `{P,Q} = sum dP/dq dQ/dp - dP/dp dQ/dq`
//! (see [`crate::poly::poisson_bracket`]). Identities quoted from the
//! classical literature with the opposite convention hold here with a global
//! sign flip; each verifier states the exact polynomial identity it checks.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};

use crate::poly::{poisson_bracket, PhasePoly};
use crate::report::VerificationReport;
use crate::sample::sample_constrained_point;
use crate::scalar::{rat, ratio, Rat};
use crate::{Error, Result};

/// The three families on the sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SystemKind {
    JacobiMoser,
    NeumannUhlenbeck,
    DualMoser,
}

impl SystemKind {
    pub const ALL: [SystemKind; 3] = [
        SystemKind::JacobiMoser,
        SystemKind::NeumannUhlenbeck,
        SystemKind::DualMoser,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SystemKind::JacobiMoser => "jacobi-moser",
            SystemKind::NeumannUhlenbeck => "neumann-uhlenbeck",
            SystemKind::DualMoser => "dual-moser",
        }
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SystemKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jacobi-moser" | "jacobi_moser" | "jm" => Ok(SystemKind::JacobiMoser),
            "neumann-uhlenbeck" | "neumann" | "nu" => Ok(SystemKind::NeumannUhlenbeck),
            "dual-moser" | "dual_moser" | "dm" => Ok(SystemKind::DualMoser),
            other => Err(Error::Incompatible(format!("unknown system '{other}'"))),
        }
    }
}

/// Strictly increasing positive semi-axes `0 < a_0 < a_1 < ... < a_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemiAxes {
    a: Vec<Rat>,
}

impl SemiAxes {
    pub fn new(a: Vec<Rat>) -> Result<Self> {
        if a.len() < 2 || a[0] <= Rat::zero() {
            return Err(Error::InvalidSemiAxes);
        }
        for i in 1..a.len() {
            if a[i] == a[i - 1] {
                return Err(Error::CoincidentSemiAxes(i - 1, i));
            }
            if a[i] < a[i - 1] {
                return Err(Error::InvalidSemiAxes);
            }
        }
        Ok(Self { a })
    }

    pub fn from_ints(vals: &[i64]) -> Result<Self> {
        Self::new(vals.iter().map(|&v| rat(v)).collect())
    }

    /// Sphere dimension `n` (one less than the number of axes).
    pub fn n(&self) -> usize {
        self.a.len() - 1
    }

    pub fn values(&self) -> &[Rat] {
        &self.a
    }

    /// Elementary symmetric function `sigma_k(a_0..a_n)`.
    pub fn sigma(&self, k: usize) -> Rat {
        crate::ellipsoidal::elementary_symmetric(&self.a, k)
    }
}

/// A system together with its first integrals `F_0..F_n` and Hamiltonian.
#[derive(Debug, Clone)]
pub struct IntegralFamily {
    pub system: SystemKind,
    pub axes: SemiAxes,
    pub f: Vec<PhasePoly>,
    pub h: PhasePoly,
}

fn sum_q_squared(nc: usize) -> PhasePoly {
    (0..nc).fold(PhasePoly::zero(nc), |acc, alpha| {
        acc.add(&PhasePoly::q(nc, alpha).square())
    })
}

fn sum_p_squared(nc: usize) -> PhasePoly {
    (0..nc).fold(PhasePoly::zero(nc), |acc, alpha| {
        acc.add(&PhasePoly::p(nc, alpha).square())
    })
}

/// `Z_1 = sum q^2 - 1`, the sphere constraint.
pub fn constraint_z1(nc: usize) -> PhasePoly {
    sum_q_squared(nc).sub(&PhasePoly::constant(nc, Rat::one()))
}

/// `Z_2 = sum p q`, the tangency constraint.
pub fn constraint_z2(nc: usize) -> PhasePoly {
    (0..nc).fold(PhasePoly::zero(nc), |acc, alpha| {
        acc.add(&PhasePoly::p(nc, alpha).mul(&PhasePoly::q(nc, alpha)))
    })
}

/// `B = sum q_alpha^2 / a_alpha`, the conformal factor.
pub fn conformal_factor(a: &SemiAxes) -> PhasePoly {
    let nc = a.n() + 1;
    (0..nc).fold(PhasePoly::zero(nc), |acc, alpha| {
        acc.add(
            &PhasePoly::q(nc, alpha)
                .square()
                .scale(&a.values()[alpha].recip()),
        )
    })
}

/// `J = sum a_beta p_beta^2`, the ambient form of the second Joachimsthal
/// invariant (equals `A/B^2` on momenta of the conformal metric).
pub fn joachimsthal_j(a: &SemiAxes) -> PhasePoly {
    let nc = a.n() + 1;
    (0..nc).fold(PhasePoly::zero(nc), |acc, alpha| {
        acc.add(&PhasePoly::p(nc, alpha).square().scale(&a.values()[alpha]))
    })
}

/// `M_{alpha beta} = a_alpha p_alpha q_beta - a_beta p_beta q_alpha`.
pub fn m_poly(a: &SemiAxes, alpha: usize, beta: usize) -> PhasePoly {
    let nc = a.n() + 1;
    PhasePoly::p(nc, alpha)
        .mul(&PhasePoly::q(nc, beta))
        .scale(&a.values()[alpha])
        .sub(
            &PhasePoly::p(nc, beta)
                .mul(&PhasePoly::q(nc, alpha))
                .scale(&a.values()[beta]),
        )
}

/// Quadratic part `A_alpha = q_alpha^2 J` of the dual Moser integral.
pub fn dual_moser_a_part(a: &SemiAxes, alpha: usize) -> PhasePoly {
    let nc = a.n() + 1;
    PhasePoly::q(nc, alpha).square().mul(&joachimsthal_j(a))
}

/// Cross part `B_alpha = sum_{beta != alpha} M_{alpha beta}^2 / (a_alpha - a_beta)`.
pub fn dual_moser_b_part(a: &SemiAxes, alpha: usize) -> PhasePoly {
    let nc = a.n() + 1;
    let av = a.values();
    let mut acc = PhasePoly::zero(nc);
    for beta in 0..nc {
        if beta == alpha {
            continue;
        }
        let den = (&av[alpha] - &av[beta]).recip();
        acc = acc.add(&m_poly(a, alpha, beta).square().scale(&den));
    }
    acc
}

/// Dual Moser family:
/// `F_alpha = q_alpha^2 sum_beta a_beta p_beta^2
///            + sum_{beta != alpha} (a_alpha p_alpha q_beta - a_beta p_beta q_alpha)^2 / (a_alpha - a_beta)`
/// with Hamiltonian `H = (1/2) B sum p^2`.
pub fn build_dual_moser(a: &SemiAxes) -> IntegralFamily {
    let nc = a.n() + 1;
    let f = (0..nc)
        .map(|alpha| dual_moser_a_part(a, alpha).add(&dual_moser_b_part(a, alpha)))
        .collect();
    let h = conformal_factor(a)
        .mul(&sum_p_squared(nc))
        .scale(&ratio(1, 2));
    IntegralFamily {
        system: SystemKind::DualMoser,
        axes: a.clone(),
        f,
        h,
    }
}

/// Jacobi-Moser family in momentum form:
/// `F_alpha = p_alpha^2/a_alpha
///            + sum_{beta != alpha} (p_alpha a_beta q_beta - p_beta a_alpha q_alpha)^2
///              / (a_alpha a_beta (a_alpha - a_beta))`
/// with flat-metric Hamiltonian `H = (1/2) sum p^2/a`.
pub fn build_jacobi_moser(a: &SemiAxes) -> IntegralFamily {
    let nc = a.n() + 1;
    let av = a.values();
    let f = (0..nc)
        .map(|alpha| {
            let mut acc = PhasePoly::p(nc, alpha).square().scale(&av[alpha].recip());
            for beta in 0..nc {
                if beta == alpha {
                    continue;
                }
                let m = PhasePoly::p(nc, alpha)
                    .mul(&PhasePoly::q(nc, beta))
                    .scale(&av[beta])
                    .sub(
                        &PhasePoly::p(nc, beta)
                            .mul(&PhasePoly::q(nc, alpha))
                            .scale(&av[alpha]),
                    );
                let den = (&av[alpha] * &av[beta] * (&av[alpha] - &av[beta])).recip();
                acc = acc.add(&m.square().scale(&den));
            }
            acc
        })
        .collect();
    let h = (0..nc).fold(PhasePoly::zero(nc), |acc, alpha| {
        acc.add(
            &PhasePoly::p(nc, alpha)
                .square()
                .scale(&(av[alpha].recip() * ratio(1, 2))),
        )
    });
    IntegralFamily {
        system: SystemKind::JacobiMoser,
        axes: a.clone(),
        f,
        h,
    }
}

/// Neumann-Uhlenbeck family:
/// `F_alpha = q_alpha^2 + sum_{beta != alpha} (p_alpha q_beta - p_beta q_alpha)^2 / (a_alpha - a_beta)`
/// with `H = (1/2) sum (p^2 + a q^2)`.
pub fn build_neumann(a: &SemiAxes) -> IntegralFamily {
    let nc = a.n() + 1;
    let av = a.values();
    let f = (0..nc)
        .map(|alpha| {
            let mut acc = PhasePoly::q(nc, alpha).square();
            for beta in 0..nc {
                if beta == alpha {
                    continue;
                }
                let m = PhasePoly::p(nc, alpha)
                    .mul(&PhasePoly::q(nc, beta))
                    .sub(&PhasePoly::p(nc, beta).mul(&PhasePoly::q(nc, alpha)));
                acc = acc.add(&m.square().scale(&(&av[alpha] - &av[beta]).recip()));
            }
            acc
        })
        .collect();
    let h = (0..nc).fold(PhasePoly::zero(nc), |acc, alpha| {
        acc.add(&PhasePoly::p(nc, alpha).square().scale(&ratio(1, 2)))
            .add(
                &PhasePoly::q(nc, alpha)
                    .square()
                    .scale(&(&av[alpha] * ratio(1, 2))),
            )
    });
    IntegralFamily {
        system: SystemKind::NeumannUhlenbeck,
        axes: a.clone(),
        f,
        h,
    }
}

pub fn build_family(system: SystemKind, a: &SemiAxes) -> IntegralFamily {
    match system {
        SystemKind::JacobiMoser => build_jacobi_moser(a),
        SystemKind::NeumannUhlenbeck => build_neumann(a),
        SystemKind::DualMoser => build_dual_moser(a),
    }
}

impl IntegralFamily {
    fn nc(&self) -> usize {
        self.axes.n() + 1
    }

    /// Returns a copy with one coefficient of `F_alpha` perturbed (control).
    pub fn with_mutated_integral(&self, alpha: usize, delta: Rat) -> Self {
        let mut out = self.clone();
        let expo = out.f[alpha]
            .leading_term()
            .map(|(e, _)| e.clone())
            .unwrap_or_else(|| vec![0; 2 * self.nc()]);
        out.f[alpha] = out.f[alpha].perturb_term(&expo, &delta);
        out
    }

    /// Pairwise involution `{F_alpha, F_beta} = 0` as exact polynomial
    /// identities; for the dual Moser family also the three structural
    /// brackets of its quadratic/cross split, under this crate's sign
    /// convention:
    /// `{A_a, A_b} = 4 J q_a q_b M_ab`,
    /// `{A_a, B_b} = -4 J a_a q_a q_b M_ab / (a_a - a_b)`,
    /// `{B_a, B_b} = 0`.
    pub fn verify_involution(&self) -> VerificationReport {
        let nc = self.nc();
        let mut rep = VerificationReport::new(format!("{} involution", self.system));
        for alpha in 0..nc {
            for beta in alpha + 1..nc {
                let br = poisson_bracket(&self.f[alpha], &self.f[beta]);
                rep.push(
                    format!("{}/involution/F{}-F{}", self.system, alpha, beta),
                    "pairwise-poisson-bracket",
                    br.is_zero(),
                    true,
                    format!("residual terms: {}", br.num_terms()),
                );
            }
        }
        if self.system == SystemKind::DualMoser {
            self.structural_brackets(&mut rep);
        }
        rep
    }

    fn structural_brackets(&self, rep: &mut VerificationReport) {
        let a = &self.axes;
        let av = a.values();
        let j = joachimsthal_j(a);
        let nc = self.nc();
        for alpha in 0..nc {
            for beta in alpha + 1..nc {
                let aa = dual_moser_a_part(a, alpha);
                let ab = dual_moser_a_part(a, beta);
                let ba = dual_moser_b_part(a, alpha);
                let bb = dual_moser_b_part(a, beta);
                let m = m_poly(a, alpha, beta);
                let qq = PhasePoly::q(nc, alpha).mul(&PhasePoly::q(nc, beta));

                let lhs1 = poisson_bracket(&aa, &ab);
                let rhs1 = j.mul(&qq).mul(&m).scale(&rat(4));
                rep.push(
                    format!("dual-moser/structural/AA/{alpha}-{beta}"),
                    "quadratic-part-bracket",
                    lhs1.sub(&rhs1).is_zero(),
                    true,
                    "{A_a,A_b} - 4J q_a q_b M_ab",
                );

                let lhs2 = poisson_bracket(&aa, &bb);
                let rhs2 = j
                    .mul(&qq)
                    .mul(&m)
                    .scale(&(rat(-4) * &av[alpha] / (&av[alpha] - &av[beta])));
                rep.push(
                    format!("dual-moser/structural/AB/{alpha}-{beta}"),
                    "mixed-part-bracket",
                    lhs2.sub(&rhs2).is_zero(),
                    true,
                    "{A_a,B_b} + 4J a_a q_a q_b M_ab/(a_a-a_b)",
                );

                let lhs3 = poisson_bracket(&ba, &bb);
                rep.push(
                    format!("dual-moser/structural/BB/{alpha}-{beta}"),
                    "cross-part-bracket",
                    lhs3.is_zero(),
                    true,
                    "{B_a,B_b}",
                );
            }
        }
    }

    /// Sum rules tying the family to its Hamiltonian and constraints:
    /// dual Moser `sum F = (sum q^2)(sum a p^2)`, `sum F/a = (sum pq)^2`,
    /// `sum F/a^2 = -2H + 2 (sum pq)(sum pq/a)`; Neumann `sum F = sum q^2`;
    /// Jacobi-Moser `sum F = 2H`.
    pub fn verify_sum_rules(&self) -> VerificationReport {
        let nc = self.nc();
        let av = self.axes.values();
        let mut rep = VerificationReport::new(format!("{} sum rules", self.system));
        let sum_f = self.f.iter().fold(PhasePoly::zero(nc), |acc, f| acc.add(f));
        match self.system {
            SystemKind::DualMoser => {
                let rel1 = sum_f.sub(&sum_q_squared(nc).mul(&joachimsthal_j(&self.axes)));
                rep.push(
                    "dual-moser/sum-rule-1",
                    "integral-sum-factorizes",
                    rel1.is_zero(),
                    true,
                    "sum F - (sum q^2)(sum a p^2)",
                );

                let sum_f_over_a = (0..nc).fold(PhasePoly::zero(nc), |acc, alpha| {
                    acc.add(&self.f[alpha].scale(&av[alpha].recip()))
                });
                let rel2 = sum_f_over_a.sub(&constraint_z2(nc).square());
                rep.push(
                    "dual-moser/sum-rule-2",
                    "weighted-sum-is-tangency-square",
                    rel2.is_zero(),
                    true,
                    "sum F/a - (sum pq)^2",
                );

                let sum_f_over_a2 = (0..nc).fold(PhasePoly::zero(nc), |acc, alpha| {
                    acc.add(&self.f[alpha].scale(&(&av[alpha] * &av[alpha]).recip()))
                });
                let pq_over_a = (0..nc).fold(PhasePoly::zero(nc), |acc, alpha| {
                    acc.add(
                        &PhasePoly::p(nc, alpha)
                            .mul(&PhasePoly::q(nc, alpha))
                            .scale(&av[alpha].recip()),
                    )
                });
                let rhs = self
                    .h
                    .scale(&rat(-2))
                    .add(&constraint_z2(nc).mul(&pq_over_a).scale(&rat(2)));
                rep.push(
                    "dual-moser/sum-rule-3",
                    "double-weighted-sum-vs-energy",
                    sum_f_over_a2.sub(&rhs).is_zero(),
                    true,
                    "sum F/a^2 + 2H - 2(sum pq)(sum pq/a)",
                );
            }
            SystemKind::NeumannUhlenbeck => {
                let rel = sum_f.sub(&sum_q_squared(nc));
                rep.push(
                    "neumann/sum-rule",
                    "cross-terms-cancel",
                    rel.is_zero(),
                    true,
                    "sum F - sum q^2",
                );
            }
            SystemKind::JacobiMoser => {
                let rel = sum_f.sub(&self.h.scale(&rat(2)));
                rep.push(
                    "jacobi-moser/sum-rule",
                    "cross-terms-cancel",
                    rel.is_zero(),
                    true,
                    "sum F - 2H",
                );
            }
        }
        rep
    }

    /// Unconstrained energy bracket. For the dual Moser family checks the
    /// exact polynomial identity (this crate's sign convention)
    /// `{H, F_alpha} = -2 (B a_alpha p_alpha^2 - q_alpha^2 sum p^2) sum pq`
    /// plus its corollary that `{H, F_alpha}` vanishes on the constraint
    /// surface. For Neumann checks `{H, F_alpha} = 0` outright.
    pub fn verify_h_bracket(&self, seed: u64) -> Result<VerificationReport> {
        let nc = self.nc();
        let av = self.axes.values();
        let mut rep = VerificationReport::new(format!("{} energy bracket", self.system));
        match self.system {
            SystemKind::DualMoser => {
                let b = conformal_factor(&self.axes);
                let z2 = constraint_z2(nc);
                let sp2 = sum_p_squared(nc);
                for alpha in 0..nc {
                    let br = poisson_bracket(&self.h, &self.f[alpha]);
                    let factor = b
                        .mul(&PhasePoly::p(nc, alpha).square())
                        .scale(&av[alpha])
                        .sub(&PhasePoly::q(nc, alpha).square().mul(&sp2));
                    let rhs = factor.mul(&z2).scale(&rat(-2));
                    rep.push(
                        format!("dual-moser/h-bracket/F{alpha}"),
                        "energy-bracket-product-form",
                        br.sub(&rhs).is_zero(),
                        true,
                        "{H,F} + 2(B a p^2 - q^2 sum p^2) sum pq",
                    );
                    // on the constraint surface the tangency factor kills it
                    let pt = sample_constrained_point(seed + alpha as u64, self.axes.n(), false)?;
                    rep.push(
                        format!("dual-moser/h-bracket-constrained/F{alpha}"),
                        "energy-bracket-vanishes-on-surface",
                        br.eval(&pt.q, &pt.p).is_zero(),
                        true,
                        "{H,F}| at sampled constrained point",
                    );
                }
            }
            SystemKind::NeumannUhlenbeck => {
                // {H, F_alpha} = 2 p q Z_1 - 2 q^2 Z_2 exactly: a constraint
                // multiple, so conservation holds on the surface. (The
                // unconstrained bracket is not the zero polynomial.)
                let z1 = constraint_z1(nc);
                let z2 = constraint_z2(nc);
                for alpha in 0..nc {
                    let br = poisson_bracket(&self.h, &self.f[alpha]);
                    let pq = PhasePoly::p(nc, alpha).mul(&PhasePoly::q(nc, alpha));
                    let rhs = pq
                        .mul(&z1)
                        .scale(&rat(2))
                        .sub(&PhasePoly::q(nc, alpha).square().mul(&z2).scale(&rat(2)));
                    rep.push(
                        format!("neumann/h-bracket/F{alpha}"),
                        "energy-bracket-is-constraint-multiple",
                        br.sub(&rhs).is_zero(),
                        true,
                        "{H,F} - 2pq Z_1 + 2q^2 Z_2",
                    );
                    let pt = sample_constrained_point(seed + alpha as u64, self.axes.n(), false)?;
                    rep.push(
                        format!("neumann/h-bracket-constrained/F{alpha}"),
                        "energy-bracket-vanishes-on-surface",
                        br.eval(&pt.q, &pt.p).is_zero(),
                        true,
                        "{H,F}| at sampled constrained point",
                    );
                }
            }
            SystemKind::JacobiMoser => {
                return Err(Error::NotApplicable(
                    "energy bracket closed form is specific to the dual Moser and Neumann families"
                        .into(),
                ))
            }
        }
        Ok(rep)
    }

    /// Constraint brackets governing the Dirac reduction. Under this
    /// crate's convention:
    /// dual Moser: `{Z_2, F} = 0` and `{Z_1, F} = 4 a p q (1 + Z_1)`;
    /// Neumann:    `{Z_1, F} = 0` and `{Z_2, F} = -2 q^2`.
    /// Either way one factor of the Dirac correction vanishes identically,
    /// so the corrected bracket equals the plain one.
    pub fn dirac_verify(&self, seed: u64) -> Result<VerificationReport> {
        let nc = self.nc();
        let av = self.axes.values();
        let z1 = constraint_z1(nc);
        let z2 = constraint_z2(nc);
        let mut rep = VerificationReport::new(format!("{} Dirac reduction", self.system));

        // {Z_1, Z_2} = 2 sum q^2: equals 2 exactly on the surface.
        let z1z2 = poisson_bracket(&z1, &z2);
        let pt = sample_constrained_point(seed, self.axes.n(), false)?;
        rep.push(
            format!("{}/dirac/z1z2", self.system),
            "constraint-bracket-nondegenerate",
            z1z2.eval(&pt.q, &pt.p) == rat(2),
            true,
            "{Z_1,Z_2}| = 2 (sign fixed by this crate's bracket convention)",
        );

        for alpha in 0..nc {
            let bz1 = poisson_bracket(&z1, &self.f[alpha]);
            let bz2 = poisson_bracket(&z2, &self.f[alpha]);
            match self.system {
                SystemKind::DualMoser => {
                    rep.push(
                        format!("dual-moser/dirac/z2-F{alpha}"),
                        "scaling-invariance",
                        bz2.is_zero(),
                        true,
                        "{Z_2,F}",
                    );
                    let rhs = PhasePoly::p(nc, alpha)
                        .mul(&PhasePoly::q(nc, alpha))
                        .mul(&constraint_z1(nc).add(&PhasePoly::constant(nc, Rat::one())))
                        .scale(&(rat(4) * &av[alpha]));
                    rep.push(
                        format!("dual-moser/dirac/z1-F{alpha}"),
                        "sphere-constraint-bracket",
                        bz1.sub(&rhs).is_zero(),
                        true,
                        "{Z_1,F} - 4 a p q (1 + Z_1)",
                    );
                }
                SystemKind::NeumannUhlenbeck => {
                    rep.push(
                        format!("neumann/dirac/z1-F{alpha}"),
                        "sphere-constraint-bracket",
                        bz1.is_zero(),
                        true,
                        "{Z_1,F}",
                    );
                    let rhs = PhasePoly::q(nc, alpha).square().scale(&rat(-2));
                    rep.push(
                        format!("neumann/dirac/z2-F{alpha}"),
                        "scaling-bracket",
                        bz2.sub(&rhs).is_zero(),
                        true,
                        "{Z_2,F} + 2 q^2",
                    );
                }
                SystemKind::JacobiMoser => {
                    return Err(Error::NotApplicable(
                        "Dirac identities are stated for the dual Moser and Neumann families"
                            .into(),
                    ))
                }
            }

            // Dirac correction numerator vanishes as a polynomial for every pair.
            for beta in 0..nc {
                if beta == alpha {
                    continue;
                }
                let num = poisson_bracket(&z1, &self.f[alpha])
                    .mul(&poisson_bracket(&z2, &self.f[beta]))
                    .sub(
                        &poisson_bracket(&z1, &self.f[beta])
                            .mul(&poisson_bracket(&z2, &self.f[alpha])),
                    );
                if !num.is_zero() {
                    rep.push(
                        format!("{}/dirac/correction/{alpha}-{beta}", self.system),
                        "dirac-correction-vanishes",
                        false,
                        true,
                        format!("residual terms: {}", num.num_terms()),
                    );
                }
            }
        }
        rep.push(
            format!("{}/dirac/correction", self.system),
            "dirac-correction-vanishes",
            true,
            true,
            "numerator is the zero polynomial for all pairs",
        );
        Ok(rep)
    }

    /// Joachimsthal consistency at sampled constrained points: the integral
    /// sum restricted to the surface equals `J = sum a p^2` exactly.
    pub fn verify_joachimsthal_restriction(
        &self,
        seed: u64,
        samples: usize,
    ) -> Result<VerificationReport> {
        if self.system != SystemKind::DualMoser {
            return Err(Error::NotApplicable(
                "Joachimsthal restriction targets the dual Moser family".into(),
            ));
        }
        let nc = self.nc();
        let j = joachimsthal_j(&self.axes);
        let sum_f = self.f.iter().fold(PhasePoly::zero(nc), |acc, f| acc.add(f));
        let mut rep = VerificationReport::new("dual-moser Joachimsthal restriction");
        let mut ok = true;
        for k in 0..samples {
            let pt = sample_constrained_point(seed.wrapping_add(k as u64), self.axes.n(), false)?;
            ok &= sum_f.eval(&pt.q, &pt.p) == j.eval(&pt.q, &pt.p);
        }
        rep.push(
            "dual-moser/joachimsthal-restriction",
            "restricted-sum-equals-invariant",
            ok,
            true,
            format!("{samples} sampled constrained points"),
        );
        Ok(rep)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    fn axes(vals: &[i64]) -> SemiAxes {
        SemiAxes::from_ints(vals).unwrap()
    }

    #[test]
    fn semi_axes_validation() {
        assert!(matches!(
            SemiAxes::from_ints(&[1, 1, 2]),
            Err(Error::CoincidentSemiAxes(0, 1))
        ));
        assert!(SemiAxes::from_ints(&[2, 1]).is_err());
        assert!(SemiAxes::from_ints(&[0, 1]).is_err());
        assert!(SemiAxes::from_ints(&[-1, 1]).is_err());
    }

    #[test]
    fn dual_moser_n1_sum_factorizes() {
        // n = 1, a = (1, 2): F_0 + F_1 = (q_0^2 + q_1^2)(a_0 p_0^2 + a_1 p_1^2)
        let fam = build_dual_moser(&axes(&[1, 2]));
        let nc = 2;
        let sum = fam.f[0].add(&fam.f[1]);
        let expect = sum_q_squared(nc).mul(&joachimsthal_j(&fam.axes));
        assert_eq!(sum, expect);
    }

    #[test]
    fn dual_moser_sum_rules_n2_n3() {
        for a in [axes(&[1, 2, 4]), axes(&[1, 2, 4, 7])] {
            let fam = build_dual_moser(&a);
            let rep = fam.verify_sum_rules();
            assert!(rep.ok(), "{rep}");
        }
    }

    #[test]
    fn involution_all_systems_n2() {
        let a = axes(&[1, 2, 4]);
        for sys in SystemKind::ALL {
            let fam = build_family(sys, &a);
            let rep = fam.verify_involution();
            assert!(rep.ok(), "{rep}");
        }
    }

    #[test]
    fn jacobi_moser_involution_random_rational_axes() {
        let a = SemiAxes::new(vec![ratio(1, 2), ratio(5, 3), rat(3)]).unwrap();
        let fam = build_jacobi_moser(&a);
        assert!(fam.verify_involution().ok());
    }

    #[test]
    fn jacobi_moser_sum_point_oracle() {
        // n = 1 and n = 2: sum F evaluated at sampled constrained points
        // equals sum p^2/a there (cross terms cancel pairwise).
        for a in [axes(&[1, 2]), axes(&[1, 2, 4])] {
            let fam = build_jacobi_moser(&a);
            let rep = fam.verify_sum_rules();
            assert!(rep.ok(), "{rep}");
            if a.n() >= 2 {
                for seed in 0..20 {
                    let pt = sample_constrained_point(seed, a.n(), false).unwrap();
                    let sum: Rat = fam.f.iter().map(|f| f.eval(&pt.q, &pt.p)).sum();
                    let expect = fam.h.eval(&pt.q, &pt.p) * rat(2);
                    assert_eq!(sum, expect);
                }
            }
        }
    }

    #[test]
    fn moser_canonical_form_recovered() {
        // Perfect-square axes a = (1, 4, 9): substituting P = p/sqrt(a),
        // Q = q sqrt(a) into the canonical Moser form recovers F_alpha.
        let a = axes(&[1, 4, 9]);
        let roots = [rat(1), rat(2), rat(3)];
        let nc = 3;
        let fam = build_jacobi_moser(&a);
        for alpha in 0..nc {
            // canonical form built directly in (P, Q) slots
            let mut canon = PhasePoly::p(nc, alpha).square();
            for beta in 0..nc {
                if beta == alpha {
                    continue;
                }
                let m = PhasePoly::p(nc, alpha)
                    .mul(&PhasePoly::q(nc, beta))
                    .sub(&PhasePoly::p(nc, beta).mul(&PhasePoly::q(nc, alpha)));
                canon = canon.add(
                    &m.square()
                        .scale(&(a.values()[alpha].clone() - &a.values()[beta]).recip()),
                );
            }
            // substitute P_alpha = p_alpha / s_alpha, Q_alpha = q_alpha s_alpha
            let sp: Vec<Rat> = roots.iter().map(|s| s.recip()).collect();
            let substituted = canon.rescale_vars(&roots, &sp);
            assert_eq!(substituted, fam.f[alpha], "alpha = {alpha}");
        }
    }

    #[test]
    fn neumann_h_bracket_is_constraint_multiple() {
        let fam = build_neumann(&axes(&[1, 2, 4]));
        assert!(fam.verify_h_bracket(11).unwrap().ok());
        // the raw bracket does not vanish off the surface
        let br = poisson_bracket(&fam.h, &fam.f[0]);
        assert!(!br.is_zero());
    }

    #[test]
    fn dual_moser_h_bracket_product_form() {
        for a in [axes(&[1, 2, 4]), axes(&[1, 3, 5, 9])] {
            let fam = build_dual_moser(&a);
            assert!(fam.verify_h_bracket(5).unwrap().ok());
        }
    }

    #[test]
    fn dirac_identities() {
        let dm = build_dual_moser(&axes(&[1, 2, 4]));
        assert!(dm.dirac_verify(3).unwrap().ok());
        let nu = build_neumann(&axes(&[1, 2, 4]));
        assert!(nu.dirac_verify(3).unwrap().ok());
        let jm = build_jacobi_moser(&axes(&[1, 2, 4]));
        assert!(jm.dirac_verify(3).is_err());
    }

    #[test]
    fn mutated_integral_breaks_involution() {
        let fam = build_dual_moser(&axes(&[1, 2, 4]));
        let bad = fam.with_mutated_integral(0, ratio(1, 7));
        assert!(!bad.verify_involution().ok());
    }

    #[test]
    fn joachimsthal_restriction_holds() {
        let fam = build_dual_moser(&axes(&[1, 2, 4]));
        assert!(fam.verify_joachimsthal_restriction(7, 20).unwrap().ok());
    }
}
