//! Exact curvature of diagonal metrics, evaluated pointwise through jets.
//!
//! Conventions: `R^l_{i,jk} = d_j Gamma^l_{ik} + Gamma^l_{sj} Gamma^s_{ik} - (j <-> k)`
//! and `R_{ij} = R^s_{i,sj}`; on the round sphere this yields the positive
//! scalar curvature `n(n-1)`. The Riemann tensor is computed twice — once
//! through the generic Christoffel pipeline and once through the
//! diagonal-metric log-derivative shortcut — and the two routes must agree
//! exactly.

use num_traits::Zero;

use crate::ellipsoidal::{round_metric_jets, stackel_metric_jets, sym_funcs, EllipsoidalPoint};
use crate::jet::Jet;
use crate::report::VerificationReport;
use crate::sample::{sample_chart_x, SplitMix64};
use crate::scalar::{rat, ratio, Rat};
use crate::systems::{SemiAxes, SystemKind};
use crate::{Error, Result};

type MetricFn = Box<dyn Fn(&[Jet<Rat>]) -> Result<Vec<Jet<Rat>>> + Send + Sync>;

/// Diagonal metric `g = sum_i g_i(x) (dx^i)^2` with jet-liftable
/// coefficient functions.
pub struct DiagonalMetric {
    n: usize,
    name: String,
    f: MetricFn,
}

impl std::fmt::Debug for DiagonalMetric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DiagonalMetric")
            .field("n", &self.n)
            .field("name", &self.name)
            .finish()
    }
}

impl DiagonalMetric {
    pub fn new(n: usize, name: impl Into<String>, f: MetricFn) -> Self {
        Self {
            n,
            name: name.into(),
            f,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Flat metric `g_i = 1`.
    pub fn euclidean(n: usize) -> Self {
        Self::new(
            n,
            "euclidean",
            Box::new(move |vars| {
                let base: Vec<Rat> = vars[0].base().to_vec();
                (0..n)
                    .map(|_| Jet::constant(rat(1), &base, vars[0].order()))
                    .collect()
            }),
        )
    }

    /// Flat metric in polar-like form `g = diag(1, (x^1)^2)`.
    pub fn polar_like() -> Self {
        Self::new(
            2,
            "polar-like",
            Box::new(|vars| {
                let base: Vec<Rat> = vars[0].base().to_vec();
                Ok(vec![
                    Jet::constant(rat(1), &base, vars[0].order())?,
                    vars[0].mul(&vars[0]),
                ])
            }),
        )
    }

    /// Round-sphere metric in ellipsoidal coordinates.
    pub fn round_sphere(a: &SemiAxes) -> Self {
        let a = a.clone();
        Self::new(
            a.n(),
            "round-sphere",
            Box::new(move |vars| round_metric_jets(&a, vars)),
        )
    }

    /// Separating metric of one of the three systems (see Table rows in
    /// [`crate::ellipsoidal::stackel_metric_coeffs`]).
    pub fn stackel(system: SystemKind, a: &SemiAxes) -> Self {
        let a = a.clone();
        Self::new(
            a.n(),
            format!("{system}-stackel"),
            Box::new(move |vars| stackel_metric_jets(system, &a, vars)),
        )
    }

    /// Round-sphere metric with an `eps * (x^2)^2` coupling injected into
    /// `g_1`; breaks the Robertson condition (negative control).
    pub fn perturbed_round(a: &SemiAxes, eps: Rat) -> Self {
        let a = a.clone();
        Self::new(
            a.n(),
            "perturbed-round",
            Box::new(move |vars| {
                let mut g = round_metric_jets(&a, vars)?;
                g[0] = g[0].add(&vars[1].mul(&vars[1]).scale(&eps));
                Ok(g)
            }),
        )
    }

    /// Coefficient jets at a base point.
    pub fn coeff_jets(&self, x: &[Rat], order: usize) -> Result<Vec<Jet<Rat>>> {
        if x.len() != self.n {
            return Err(Error::Incompatible(format!(
                "metric {} expects {} coordinates, got {}",
                self.name,
                self.n,
                x.len()
            )));
        }
        let vars = Jet::variables(x, order)?;
        (self.f)(&vars)
    }
}

/// Curvature data as jets, reusable at whatever order the metric jets carry.
pub struct CurvatureJets {
    pub n: usize,
    pub g: Vec<Jet<Rat>>,
    pub g_inv: Vec<Jet<Rat>>,
    /// `gamma[l][i][j]` = `Gamma^l_{ij}`.
    pub gamma: Vec<Vec<Vec<Jet<Rat>>>>,
    /// `riemann[l][i][j][k]` = `R^l_{i,jk}`.
    pub riemann: Vec<Vec<Vec<Vec<Jet<Rat>>>>>,
    /// `ricci[i][j]` = `R_{ij}`.
    pub ricci: Vec<Vec<Jet<Rat>>>,
    pub scalar: Jet<Rat>,
}

/// Runs the generic diagonal-metric pipeline on coefficient jets.
pub fn curvature_jets(g: &[Jet<Rat>]) -> Result<CurvatureJets> {
    let n = g.len();
    let g_inv: Vec<Jet<Rat>> = g.iter().map(Jet::try_inv).collect::<Result<_>>()?;
    let half = ratio(1, 2);

    // Gamma^l_{ij} = (1/2) g^l (d_i g_l delta_{jl} + d_j g_l delta_{il} - d_l g_i delta_{ij})
    let mut gamma = vec![vec![vec![None; n]; n]; n];
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut t = g[l].partial(i).scale(&Rat::zero());
                if j == l {
                    t = t.add(&g[l].partial(i));
                }
                if i == l {
                    t = t.add(&g[l].partial(j));
                }
                if i == j {
                    t = t.sub(&g[i].partial(l));
                }
                gamma[l][i][j] = Some(g_inv[l].truncate(t.order()).mul(&t).scale(&half));
            }
        }
    }
    let gamma: Vec<Vec<Vec<Jet<Rat>>>> = gamma
        .into_iter()
        .map(|m| {
            m.into_iter()
                .map(|r| r.into_iter().map(Option::unwrap).collect())
                .collect()
        })
        .collect();

    // R^l_{i,jk} = d_j Gamma^l_{ik} - d_k Gamma^l_{ij}
    //            + sum_s (Gamma^l_{sj} Gamma^s_{ik} - Gamma^l_{sk} Gamma^s_{ij})
    let mut riemann = vec![vec![vec![vec![None; n]; n]; n]; n];
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut r = gamma[l][i][k].partial(j).sub(&gamma[l][i][j].partial(k));
                    for s in 0..n {
                        let o = r.order();
                        r = r.add(&gamma[l][s][j].truncate(o).mul(&gamma[s][i][k].truncate(o)));
                        r = r.sub(&gamma[l][s][k].truncate(o).mul(&gamma[s][i][j].truncate(o)));
                    }
                    riemann[l][i][j][k] = Some(r);
                }
            }
        }
    }
    let riemann: Vec<Vec<Vec<Vec<Jet<Rat>>>>> = riemann
        .into_iter()
        .map(|c| {
            c.into_iter()
                .map(|m| {
                    m.into_iter()
                        .map(|r| r.into_iter().map(Option::unwrap).collect())
                        .collect()
                })
                .collect()
        })
        .collect();

    let ricci: Vec<Vec<Jet<Rat>>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut acc = riemann[0][i][0][j].clone();
                    for s in 1..n {
                        acc = acc.add(&riemann[s][i][s][j]);
                    }
                    acc
                })
                .collect()
        })
        .collect();

    let mut scalar = ricci[0][0].clone().scale(&Rat::zero());
    for i in 0..n {
        let o = scalar.order().min(ricci[i][i].order());
        scalar = scalar
            .truncate(o)
            .add(&g_inv[i].truncate(o).mul(&ricci[i][i].truncate(o)));
    }

    Ok(CurvatureJets {
        n,
        g: g.to_vec(),
        g_inv,
        gamma,
        riemann,
        ricci,
        scalar,
    })
}

/// Exact curvature values at a base point.
#[derive(Debug, Clone)]
pub struct CurvatureBundle {
    pub n: usize,
    pub christoffel: Vec<Vec<Vec<Rat>>>,
    pub riemann: Vec<Vec<Vec<Vec<Rat>>>>,
    pub ricci: Vec<Vec<Rat>>,
    pub scalar: Rat,
}

pub fn curvature_at(metric: &DiagonalMetric, x: &[Rat]) -> Result<CurvatureBundle> {
    let jets = curvature_jets(&metric.coeff_jets(x, 3)?)?;
    let n = jets.n;
    Ok(CurvatureBundle {
        n,
        christoffel: (0..n)
            .map(|l| {
                (0..n)
                    .map(|i| (0..n).map(|j| jets.gamma[l][i][j].value()).collect())
                    .collect()
            })
            .collect(),
        riemann: (0..n)
            .map(|l| {
                (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|j| (0..n).map(|k| jets.riemann[l][i][j][k].value()).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect(),
        ricci: (0..n)
            .map(|i| (0..n).map(|j| jets.ricci[i][j].value()).collect())
            .collect(),
        scalar: jets.scalar.value(),
    })
}

impl CurvatureBundle {
    /// First Bianchi identity `R^l_{i,jk} + R^l_{j,ki} + R^l_{k,ij} = 0`.
    pub fn first_bianchi_holds(&self) -> bool {
        let n = self.n;
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let s = &self.riemann[l][i][j][k]
                            + &self.riemann[l][j][k][i]
                            + &self.riemann[l][k][i][j];
                        if !s.is_zero() {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    pub fn ricci_symmetric(&self) -> bool {
        let n = self.n;
        (0..n).all(|i| (0..n).all(|j| self.ricci[i][j] == self.ricci[j][i]))
    }

    pub fn christoffel_symmetric(&self) -> bool {
        let n = self.n;
        (0..n).all(|l| {
            (0..n).all(|i| (0..n).all(|j| self.christoffel[l][i][j] == self.christoffel[l][j][i]))
        })
    }

    pub fn ricci_off_diagonal_zero(&self) -> bool {
        let n = self.n;
        (0..n).all(|i| (0..n).all(|j| i == j || self.ricci[i][j].is_zero()))
    }

    pub fn is_flat(&self) -> bool {
        self.riemann
            .iter()
            .flatten()
            .flatten()
            .flatten()
            .all(Rat::is_zero)
    }
}

/// Diagonal-metric shortcut (second Riemann route): the two independent
/// component families of the lowered tensor, expressed purely through the
/// log-derivatives `L_{i,j} = d_j ln g_i`. For a diagonal metric,
///
/// `R^j_{i,ji} = -(g_i/g_j)/2 (d_j L_{i,j} + L_{i,j}^2 - L_{i,j} L_{j,j})
///              - d_i L_{j,i}/2 + L_{j,i} L_{i,i}/4 - L_{j,i}^2/4
///              + (g_i/g_j) L_{i,j}^2/4
///              - sum_{s != i} L_{j,s} (g_i/g_s) L_{i,s}/4`
///
/// and, for distinct `i, j, k`,
///
/// `R^k_{i,kj} = -d_j L_{k,i}/2
///              + (L_{k,i} L_{i,j} + L_{k,j} L_{j,i})/4 - L_{k,i} L_{k,j}/4`;
///
/// every other lowered component vanishes or follows by the index
/// symmetries.
pub struct RiemannShortcut {
    n: usize,
    g_val: Vec<Rat>,
    /// `family2[s][t1][t2]` = `R^s_{t1,s t2}` for `s`, `t1`, `t2` with
    /// `s != t1`, `s != t2` (the diagonal `t1 == t2` holds the first family).
    family: Vec<Vec<Vec<Rat>>>,
}

pub fn riemann_shortcut(g: &[Jet<Rat>]) -> Result<RiemannShortcut> {
    let n = g.len();
    // L[i][j] = d_j ln g_i as jets (order drops by 1)
    let mut ln_d: Vec<Vec<Jet<Rat>>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            row.push(g[i].partial(j).try_div(&g[i].truncate(g[i].order() - 1))?);
        }
        ln_d.push(row);
    }
    let l_val = |i: usize, j: usize| ln_d[i][j].value();
    let l_d = |i: usize, j: usize, k: usize| ln_d[i][j].partial(k).value();
    let g_val: Vec<Rat> = g.iter().map(Jet::value).collect();
    let quarter = ratio(1, 4);
    let half = ratio(1, 2);

    let mut family = vec![vec![vec![Rat::zero(); n]; n]; n];
    for j in 0..n {
        for i in 0..n {
            if i == j {
                continue;
            }
            let ratio_ij = &g_val[i] / &g_val[j];
            let mut r = -(&half)
                * &ratio_ij
                * (l_d(i, j, j) + &l_val(i, j) * &l_val(i, j) - &l_val(i, j) * &l_val(j, j))
                - &half * l_d(j, i, i)
                + &quarter * &l_val(j, i) * &l_val(i, i)
                - &quarter * &l_val(j, i) * &l_val(j, i)
                + &quarter * &ratio_ij * &l_val(i, j) * &l_val(i, j);
            for s in 0..n {
                if s == i {
                    continue;
                }
                r -= &quarter * &l_val(j, s) * (&g_val[i] / &g_val[s]) * &l_val(i, s);
            }
            family[j][i][i] = r; // R^j_{i,ji}

            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                // R^j_{i,jk}, all distinct
                family[j][i][k] = -(&half) * l_d(j, i, k)
                    + &quarter * (&l_val(j, i) * &l_val(i, k) + &l_val(j, k) * &l_val(k, i))
                    - &quarter * &l_val(j, i) * &l_val(j, k);
            }
        }
    }
    Ok(RiemannShortcut { n, g_val, family })
}

impl RiemannShortcut {
    /// Lowered component `R_{abcd} = g_a R^a_{b,cd}` reconstructed from the
    /// two families via the index (anti)symmetries; zero where diagonality
    /// forbids a nonzero value.
    pub fn lowered(&self, a: usize, b: usize, c: usize, d: usize) -> Rat {
        if a == b || c == d {
            return Rat::zero();
        }
        // decompose into (shared-first-slot, other) presentations
        let pair = |x: usize, y: usize, s: usize| -> Option<(usize, Rat)> {
            if x == s {
                Some((y, rat(1)))
            } else if y == s {
                Some((x, rat(-1)))
            } else {
                None
            }
        };
        for s in 0..self.n {
            if let (Some((t1, s1)), Some((t2, s2))) = (pair(a, b, s), pair(c, d, s)) {
                if t1 == s || t2 == s {
                    continue;
                }
                return s1 * s2 * &self.g_val[s] * &self.family[s][t1][t2];
            }
        }
        Rat::zero()
    }
}

/// Cotton tensor
/// `C_{ijk} = nabla_k R_{ij} - nabla_j R_{ik} + (d_j R g_{ik} - d_k R g_{ij}) / (2(n-1))`;
/// its vanishing certifies conformal flatness in dimension three.
pub fn cotton_at(metric: &DiagonalMetric, x: &[Rat]) -> Result<Vec<Rat>> {
    let jets = curvature_jets(&metric.coeff_jets(x, 3)?)?;
    let n = jets.n;
    let nab = |k: usize, i: usize, j: usize| -> Rat {
        let mut v = jets.ricci[i][j].partial(k).value();
        for s in 0..n {
            v -= jets.gamma[s][k][i].value() * jets.ricci[s][j].value();
            v -= jets.gamma[s][k][j].value() * jets.ricci[i][s].value();
        }
        v
    };
    let factor = rat(1) / rat(2 * (n as i64 - 1));
    let mut out = Vec::with_capacity(n * n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let gik = if i == k {
                    jets.g[i].value()
                } else {
                    Rat::zero()
                };
                let gij = if i == j {
                    jets.g[i].value()
                } else {
                    Rat::zero()
                };
                let c = nab(k, i, j) - nab(j, i, k)
                    + &factor
                        * (jets.scalar.partial(j).value() * gik
                            - jets.scalar.partial(k).value() * gij);
                out.push(c);
            }
        }
    }
    Ok(out)
}

/// Fully lowered Weyl tensor components; vanishing certifies conformal
/// flatness in dimension at least four.
pub fn weyl_at(metric: &DiagonalMetric, x: &[Rat]) -> Result<Vec<Rat>> {
    let jets = curvature_jets(&metric.coeff_jets(x, 3)?)?;
    let n = jets.n;
    if n < 4 {
        return Err(Error::ConformalTestUndefined(n));
    }
    let gv: Vec<Rat> = jets.g.iter().map(Jet::value).collect();
    let ric = |i: usize, j: usize| jets.ricci[i][j].value();
    let low = |i: usize, j: usize, k: usize, l: usize| &gv[i] * jets.riemann[i][j][k][l].value();
    let scal = jets.scalar.value();
    let nn = n as i64;
    let mut out = Vec::with_capacity(n * n * n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let gik = if i == k { gv[i].clone() } else { Rat::zero() };
                    let gil = if i == l { gv[i].clone() } else { Rat::zero() };
                    let gjl = if j == l { gv[j].clone() } else { Rat::zero() };
                    let gjk = if j == k { gv[j].clone() } else { Rat::zero() };
                    let c = low(i, j, k, l)
                        - (&gik * ric(j, l) - &gil * ric(j, k) + &gjl * ric(i, k)
                            - &gjk * ric(i, l))
                            / rat(nn - 2)
                        + &scal * (&gik * &gjl - &gil * &gjk) / rat((nn - 1) * (nn - 2));
                    out.push(c);
                }
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Closed-form verification
// ---------------------------------------------------------------------------

/// Closed-form Ricci for the separating metrics:
/// round sphere `R_ii = (n-1) gt_i`, `R = n(n-1)`;
/// dual Moser `R_ii = ((n-2) x^i + n sigma_1(x) - (n-1) sigma_1(a)) g_i`,
/// `R = (n-1)((n+2) sigma_1(x) - n sigma_1(a))`;
/// Jacobi-Moser `R_ii = sigma_{n+1}(a) sigma^i_{n-2}(x) g_i / sigma_n(x)^2`,
/// `R = 2 sigma_{n+1}(a) sigma_{n-2}(x) / sigma_n(x)^2`.
pub fn ricci_closed_form(
    system: SystemKind,
    a: &SemiAxes,
    pt: &EllipsoidalPoint,
) -> (Vec<Rat>, Rat) {
    let n = a.n();
    let nn = n as i64;
    let g = crate::ellipsoidal::stackel_metric_coeffs(system, a, pt);
    let sf = sym_funcs(pt.coords());
    match system {
        SystemKind::NeumannUhlenbeck => {
            let diag = g.iter().map(|gi| gi * rat(nn - 1)).collect();
            (diag, rat(nn * (nn - 1)))
        }
        SystemKind::DualMoser => {
            let s1a = a.sigma(1);
            let diag = (0..n)
                .map(|i| {
                    (rat(nn - 2) * &pt.coords()[i] + rat(nn) * &sf.sigma[1] - rat(nn - 1) * &s1a)
                        * &g[i]
                })
                .collect();
            let scal = rat(nn - 1) * (rat(nn + 2) * &sf.sigma[1] - rat(nn) * &s1a);
            (diag, scal)
        }
        SystemKind::JacobiMoser => {
            let sa = a.sigma(n + 1);
            let sn2 = &sf.sigma[n] * &sf.sigma[n];
            let diag = (0..n)
                .map(|i| &sa * &sf.sigma_excl[i][n - 2] * &g[i] / &sn2)
                .collect();
            let scal = rat(2) * &sa * &sf.sigma[n - 2] / &sn2;
            (diag, scal)
        }
    }
}

/// Jet-computed Ricci against the closed forms at sampled chart points;
/// includes the two-route Riemann agreement and the tensor-symmetry and
/// metric-compatibility invariants.
pub fn verify_ricci_closed_forms(
    system: SystemKind,
    a: &SemiAxes,
    seed: u64,
    points: usize,
) -> Result<VerificationReport> {
    let n = a.n();
    if n < 2 {
        return Err(Error::BadDimension("n >= 2 for curvature checks"));
    }
    let metric = DiagonalMetric::stackel(system, a);
    let mut rng = SplitMix64::new(seed);
    let mut rep = VerificationReport::new(format!("{system} curvature closed forms"));
    let (mut diag_ok, mut off_ok, mut scal_ok, mut routes_ok, mut invariants_ok, mut compat_ok) =
        (true, true, true, true, true, true);
    for _ in 0..points {
        let x = sample_chart_x(&mut rng, a.values());
        let ptx = EllipsoidalPoint::new(a, x.clone())?;
        let bundle = curvature_at(&metric, &x)?;
        let (diag, scal) = ricci_closed_form(system, a, &ptx);
        diag_ok &= (0..n).all(|i| bundle.ricci[i][i] == diag[i]);
        off_ok &= bundle.ricci_off_diagonal_zero();
        scal_ok &= bundle.scalar == scal;
        invariants_ok &= bundle.first_bianchi_holds()
            && bundle.ricci_symmetric()
            && bundle.christoffel_symmetric();

        let gjets = metric.coeff_jets(&x, 3)?;
        let gvals: Vec<Rat> = gjets.iter().map(Jet::value).collect();
        let shortcut = riemann_shortcut(&gjets)?;
        routes_ok &= (0..n).all(|l| {
            (0..n).all(|i| {
                (0..n).all(|j| {
                    (0..n).all(|k| {
                        let lowered_generic = &gvals[l] * &bundle.riemann[l][i][j][k];
                        lowered_generic == shortcut.lowered(l, i, j, k)
                    })
                })
            })
        });
        compat_ok &= metric_compatibility_holds(&gjets)?;
    }
    rep.push(
        format!("{system}/ricci-diagonal"),
        "ricci-closed-form-diagonal",
        diag_ok,
        true,
        format!("{points} points"),
    );
    rep.push(
        format!("{system}/ricci-off-diagonal"),
        "robertson-diagonal-ricci",
        off_ok,
        true,
        format!("{points} points"),
    );
    rep.push(
        format!("{system}/scalar-curvature"),
        "scalar-closed-form",
        scal_ok,
        true,
        format!("{points} points"),
    );
    rep.push(
        format!("{system}/riemann-two-routes"),
        "generic-vs-diagonal-shortcut",
        routes_ok,
        true,
        "log-derivative route agrees",
    );
    rep.push(
        format!("{system}/tensor-invariants"),
        "bianchi-and-symmetries",
        invariants_ok,
        true,
        "Bianchi, Ricci and Christoffel symmetry",
    );
    rep.push(
        format!("{system}/metric-compatibility"),
        "covariant-derivative-of-metric-vanishes",
        compat_ok,
        true,
        "nabla g = 0 at order 1",
    );
    Ok(rep)
}

fn metric_compatibility_holds(g: &[Jet<Rat>]) -> Result<bool> {
    let jets = curvature_jets(g)?;
    let n = jets.n;
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                // nabla_k g_{ij} = d_k g_{ij} - Gamma^s_{ki} g_{sj} - Gamma^s_{kj} g_{is}
                let mut v = if i == j {
                    jets.g[i].partial(k).value()
                } else {
                    Rat::zero()
                };
                v -= jets.gamma[j][k][i].value() * jets.g[j].value();
                v -= jets.gamma[i][k][j].value() * jets.g[i].value();
                if !v.is_zero() {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Robertson condition (`R_ij = 0` for `i != j` in separating coordinates)
/// for the three systems, plus the perturbed-metric negative control.
pub fn robertson_check(a: &SemiAxes, seed: u64, points: usize) -> Result<VerificationReport> {
    let mut rep = VerificationReport::new("Robertson condition");
    let mut rng = SplitMix64::new(seed);
    for system in SystemKind::ALL {
        let metric = DiagonalMetric::stackel(system, a);
        let mut ok = true;
        for _ in 0..points {
            let x = sample_chart_x(&mut rng, a.values());
            ok &= curvature_at(&metric, &x)?.ricci_off_diagonal_zero();
        }
        rep.push(
            format!("{system}/robertson"),
            "robertson-diagonal-ricci",
            ok,
            true,
            format!("{points} points"),
        );
    }
    // control: a coupling term must produce off-diagonal Ricci. Any
    // two-dimensional Ricci tensor is proportional to its metric, so the
    // control is meaningful only from dimension three up.
    if a.n() >= 3 {
        let control = DiagonalMetric::perturbed_round(a, ratio(1, 10));
        let x = sample_chart_x(&mut rng, a.values());
        let diag = curvature_at(&control, &x)?.ricci_off_diagonal_zero();
        rep.push(
            "control/perturbed-metric-robertson",
            "robertson-diagonal-ricci",
            diag,
            false,
            "coupled coefficient must break diagonality",
        );
    }
    Ok(rep)
}

/// Conformal-flatness certificates: Cotton tensor for `n = 3`, Weyl tensor
/// for `n >= 4`. The dual Moser and round-sphere metrics are expected flat
/// in the conformal sense; the Jacobi-Moser metric is expected to fail and
/// is reported with expectation `Fail`.
pub fn conformal_flatness_check(
    a: &SemiAxes,
    seed: u64,
    points: usize,
) -> Result<VerificationReport> {
    let n = a.n();
    if n < 3 {
        return Err(Error::ConformalTestUndefined(n));
    }
    let mut rep = VerificationReport::new("conformal flatness");
    let mut rng = SplitMix64::new(seed);
    let metrics = [
        (DiagonalMetric::stackel(SystemKind::DualMoser, a), true),
        (DiagonalMetric::round_sphere(a), true),
        (DiagonalMetric::stackel(SystemKind::JacobiMoser, a), false),
    ];
    for (metric, expect_flat) in metrics {
        let mut all_zero = true;
        for _ in 0..points {
            let x = sample_chart_x(&mut rng, a.values());
            let vals = if n == 3 {
                cotton_at(&metric, &x)?
            } else {
                weyl_at(&metric, &x)?
            };
            all_zero &= vals.iter().all(Rat::is_zero);
        }
        let tensor = if n == 3 { "cotton-york" } else { "weyl" };
        rep.push(
            format!("{}/{}", metric.name(), tensor),
            "conformal-flatness-certificate",
            all_zero,
            expect_flat,
            format!("{points} points, n = {n}"),
        );
    }
    Ok(rep)
}
