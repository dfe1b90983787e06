//! Floating-point integration of the two projectively equivalent geodesic
//! flows on the sphere, with conservation monitoring.
//!
//! The `g1` flow (ellipsoid metric `sum a dq^2`) and the `g2` flow
//! (conformally flat metric `(1/B) sum dq^2`, `B = sum q^2/a`) are
//! integrated in ambient `(q, v)` coordinates with an adaptive embedded
//! Runge-Kutta 5(4) scheme and per-step orthogonal projection back to
//! `{q.q = 1, q.v = 0}`. The `g2` acceleration follows the geodesic
//! equation of the conformal metric,
//! `vdot_a = (2 v_a sum(v q / a) - v^2 q_a / a_a) / B`,
//! which preserves the tangency constraint and the invariant `A/B^2`
//! exactly along solutions (the sign of its printed spray variant does
//! not).

use std::fmt;
use std::io::Write as _;

/// Which of the two projectively equivalent flows to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SprayKind {
    /// Ellipsoid metric `g1`; conserves the Jacobi-Moser integrals and the
    /// squared Joachimsthal invariant `1/(B v^2)`.
    G1,
    /// Conformally flat metric `g2`; conserves the dual Moser integrals and
    /// `J = sum a p^2`.
    G2,
}

impl fmt::Display for SprayKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SprayKind::G1 => "g1",
            SprayKind::G2 => "g2",
        })
    }
}

/// Point of the flow: time, position, velocity.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub t: f64,
    pub q: Vec<f64>,
    pub v: Vec<f64>,
}

impl FlowState {
    pub fn constraint_residuals(&self) -> (f64, f64) {
        let q2: f64 = self.q.iter().map(|x| x * x).sum();
        let qv: f64 = self.q.iter().zip(&self.v).map(|(a, b)| a * b).sum();
        ((q2 - 1.0).abs(), qv.abs())
    }
}

/// Time-ordered samples with the conserved quantities logged per sample.
/// The integral columns are `H, F_0..F_n`, then `J` for the `g2` flow or
/// the squared Joachimsthal invariant for `g1`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub kind: SprayKind,
    pub a: Vec<f64>,
    pub states: Vec<FlowState>,
    pub integrals: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn integral_labels(&self) -> Vec<String> {
        let n = self.a.len() - 1;
        let mut labels = vec!["H".to_string()];
        labels.extend((0..=n).map(|i| format!("F{i}")));
        labels.push("J".to_string());
        labels
    }

    /// Relative drift `max_t |I(t) - I(0)| / max(1, |I(0)|)` per column.
    pub fn relative_drift(&self) -> Vec<f64> {
        let first = &self.integrals[0];
        let mut drift = vec![0.0f64; first.len()];
        for row in &self.integrals {
            for (d, (now, start)) in drift.iter_mut().zip(row.iter().zip(first)) {
                *d = (*d).max((now - start).abs() / start.abs().max(1.0));
            }
        }
        drift
    }

    /// CSV export: `t,q0..qn,v0..vn,H,F0..Fn,J`, 17 significant digits.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        let n = self.a.len() - 1;
        let mut header = vec!["t".to_string()];
        header.extend((0..=n).map(|i| format!("q{i}")));
        header.extend((0..=n).map(|i| format!("v{i}")));
        header.extend(self.integral_labels());
        writeln!(w, "{}", header.join(","))?;
        for (state, ints) in self.states.iter().zip(&self.integrals) {
            let mut row = vec![format!("{:.16e}", state.t)];
            row.extend(state.q.iter().map(|x| format!("{x:.16e}")));
            row.extend(state.v.iter().map(|x| format!("{x:.16e}")));
            row.extend(ints.iter().map(|x| format!("{x:.16e}")));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn write_csv_file(&self, path: &std::path::Path) -> std::io::Result<()> {
        let mut f = std::fs::File::create(path)?;
        self.write_csv(&mut f)?;
        f.flush()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FlowError {
    #[error("initial state violates the constraints: {0}")]
    BadInitial(String),
    #[error("non-finite state at t = {0}")]
    NonFinite(f64),
    #[error("stiff segment at t = {t}: step size underflow")]
    Stiff { t: f64, partial: Box<Trajectory> },
    #[error("invalid semi-axes for the flow")]
    BadAxes,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn conformal_b(a: &[f64], q: &[f64]) -> f64 {
    q.iter().zip(a).map(|(qi, ai)| qi * qi / ai).sum()
}

/// Acceleration of the chosen spray; positions always flow with `v`.
pub fn spray_acceleration(kind: SprayKind, a: &[f64], q: &[f64], v: &[f64], dv: &mut [f64]) {
    let b = conformal_b(a, q);
    let v2 = dot(v, v);
    match kind {
        SprayKind::G1 => {
            for i in 0..q.len() {
                dv[i] = -(v2 / b) * q[i] / a[i];
            }
        }
        SprayKind::G2 => {
            let s: f64 = q
                .iter()
                .zip(v)
                .zip(a)
                .map(|((qi, vi), ai)| vi * qi / ai)
                .sum();
            for i in 0..q.len() {
                dv[i] = (2.0 * v[i] * s - v2 * q[i] / a[i]) / b;
            }
        }
    }
}

/// Conserved quantities at a state: `H`, the system's `F_0..F_n`, and the
/// extra invariant (`J = sum a p^2` for `g2`, `1/(B v^2)` for `g1`).
pub fn integral_values(kind: SprayKind, a: &[f64], q: &[f64], v: &[f64]) -> Vec<f64> {
    let nc = a.len();
    let b = conformal_b(a, q);
    let mut out = Vec::with_capacity(nc + 2);
    match kind {
        SprayKind::G1 => {
            let h = 0.5
                * q.iter()
                    .zip(v)
                    .zip(a)
                    .fold(0.0, |acc, ((_, vi), ai)| acc + ai * vi * vi);
            out.push(h);
            for alpha in 0..nc {
                let mut f = a[alpha] * v[alpha] * v[alpha];
                for beta in 0..nc {
                    if beta == alpha {
                        continue;
                    }
                    let m = v[alpha] * q[beta] - v[beta] * q[alpha];
                    f += a[alpha] * a[beta] * m * m / (a[alpha] - a[beta]);
                }
                out.push(f);
            }
            let v2 = dot(v, v);
            out.push(1.0 / (b * v2));
        }
        SprayKind::G2 => {
            let p: Vec<f64> = v.iter().map(|vi| vi / b).collect();
            let j: f64 = p.iter().zip(a).map(|(pi, ai)| ai * pi * pi).sum();
            let p2: f64 = p.iter().map(|x| x * x).sum();
            out.push(0.5 * b * p2);
            for alpha in 0..nc {
                let mut f = q[alpha] * q[alpha] * j;
                for beta in 0..nc {
                    if beta == alpha {
                        continue;
                    }
                    let m = a[alpha] * p[alpha] * q[beta] - a[beta] * p[beta] * q[alpha];
                    f += m * m / (a[alpha] - a[beta]);
                }
                out.push(f);
            }
            out.push(j);
        }
    }
    out
}

/// Options for [`integrate`].
#[derive(Debug, Clone)]
pub struct IntegrateOpts {
    pub t_end: f64,
    /// Local error tolerance (absolute and relative).
    pub tol: f64,
    /// Number of output samples, uniformly spaced in time (>= 2).
    pub samples: usize,
}

impl Default for IntegrateOpts {
    fn default() -> Self {
        Self {
            t_end: 10.0,
            tol: 1e-10,
            samples: 1000,
        }
    }
}

// Dormand-Prince 5(4) tableau (autonomous system: stage times unused).
const DP_A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn deriv(kind: SprayKind, a: &[f64], y: &[f64], dy: &mut [f64]) {
    let nc = a.len();
    let (q, v) = y.split_at(nc);
    dy[..nc].copy_from_slice(v);
    let (_, dv) = dy.split_at_mut(nc);
    spray_acceleration(kind, a, q, v, dv);
}

fn project(y: &mut [f64], nc: usize) {
    let (q, v) = y.split_at_mut(nc);
    let norm = dot(q, q).sqrt();
    for qi in q.iter_mut() {
        *qi /= norm;
    }
    let qv = dot(q, v);
    for (vi, qi) in v.iter_mut().zip(q.iter()) {
        *vi -= qv * qi;
    }
}

/// Adaptive integration with per-step projection to the constraint surface.
/// Output samples land exactly on the uniform grid (steps are clamped to
/// the next sample time, never interpolated).
pub fn integrate(
    kind: SprayKind,
    a: &[f64],
    q0: &[f64],
    v0: &[f64],
    opts: &IntegrateOpts,
) -> Result<Trajectory, FlowError> {
    let nc = a.len();
    if nc < 3 || a.windows(2).any(|w| w[0] >= w[1]) || a[0] <= 0.0 {
        return Err(FlowError::BadAxes);
    }
    let q2: f64 = dot(q0, q0);
    let qv: f64 = dot(q0, v0);
    if (q2 - 1.0).abs() > 1e-12 || qv.abs() > 1e-12 {
        return Err(FlowError::BadInitial(format!(
            "|q.q - 1| = {:.3e}, |q.v| = {:.3e}",
            (q2 - 1.0).abs(),
            qv.abs()
        )));
    }

    let samples = opts.samples.max(2);
    let dt_out = opts.t_end / (samples - 1) as f64;
    let mut y: Vec<f64> = q0.iter().chain(v0).copied().collect();
    let mut t = 0.0_f64;

    let mut traj = Trajectory {
        kind,
        a: a.to_vec(),
        states: Vec::with_capacity(samples),
        integrals: Vec::with_capacity(samples),
    };
    let record = |traj: &mut Trajectory, t: f64, y: &[f64]| {
        let (q, v) = y.split_at(nc);
        traj.states.push(FlowState {
            t,
            q: q.to_vec(),
            v: v.to_vec(),
        });
        traj.integrals.push(integral_values(kind, a, q, v));
    };
    record(&mut traj, t, &y);

    let mut h = (opts.tol.powf(0.2) * opts.t_end).min(dt_out).max(1e-8);
    let mut k = vec![vec![0.0; 2 * nc]; 7];
    let mut next_sample = 1usize;

    while next_sample < samples {
        let t_target = next_sample as f64 * dt_out;
        if t + h > t_target {
            h = t_target - t;
        }
        if h < 1e-14 * opts.t_end.max(1.0) {
            return Err(FlowError::Stiff {
                t,
                partial: Box::new(traj),
            });
        }

        deriv(kind, a, &y, &mut k[0]);
        for stage in 1..7 {
            let mut ys = y.clone();
            for (s, ks) in k.iter().take(stage).enumerate() {
                let w = DP_A[stage][s] * h;
                for (yi, ki) in ys.iter_mut().zip(ks) {
                    *yi += w * ki;
                }
            }
            let mut knew = vec![0.0; 2 * nc];
            deriv(kind, a, &ys, &mut knew);
            k[stage] = knew;
        }
        // 5th-order weights are the last tableau row; 4th-order uses DP_B4
        let mut y5 = y.clone();
        let mut y4 = y.clone();
        for s in 0..6 {
            let w5 = DP_A[6][s] * h;
            for i in 0..2 * nc {
                y5[i] += w5 * k[s][i];
            }
        }
        for (s, b4) in DP_B4.iter().enumerate() {
            let w4 = b4 * h;
            for i in 0..2 * nc {
                y4[i] += w4 * k[s][i];
            }
        }

        let mut err = 0.0_f64;
        for i in 0..2 * nc {
            let scale = opts.tol + opts.tol * y[i].abs().max(y5[i].abs());
            let e = (y5[i] - y4[i]) / scale;
            err += e * e;
        }
        err = (err / (2 * nc) as f64).sqrt();

        if !err.is_finite() || y5.iter().any(|x| !x.is_finite()) {
            return Err(FlowError::NonFinite(t));
        }

        if err <= 1.0 {
            t += h;
            y = y5;
            project(&mut y, nc);
            if (t - t_target).abs() < 1e-12 * opts.t_end.max(1.0) {
                t = t_target;
                record(&mut traj, t, &y);
                next_sample += 1;
            }
        }
        let factor = if err > 0.0 { 0.9 * err.powf(-0.2) } else { 5.0 };
        h *= factor.clamp(0.2, 5.0);
        h = h.min(opts.t_end);
    }
    Ok(traj)
}

/// Outcome of the unparametrized-geodesic comparison.
#[derive(Debug, Clone)]
pub struct ProjectiveReport {
    pub max_deviation: f64,
    pub arc_length_compared: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Integrates both flows from the same point and direction (each velocity
/// normalized to unit speed in its own metric), resamples both position
/// curves by Euclidean arc length and reports the maximum pointwise
/// distance. Projective equivalence predicts agreement of the
/// unparametrized curves.
pub fn projective_equivalence(
    a: &[f64],
    q0: &[f64],
    dir: &[f64],
    t_end: f64,
    tol: f64,
    threshold: f64,
) -> Result<ProjectiveReport, FlowError> {
    projective_comparison(a, q0, dir, dir, t_end, tol, threshold)
}

/// Same comparison with independent initial directions for the two flows;
/// with genuinely different directions this is the negative control (the
/// curves must separate).
pub fn projective_comparison(
    a: &[f64],
    q0: &[f64],
    dir1: &[f64],
    dir2: &[f64],
    t_end: f64,
    tol: f64,
    threshold: f64,
) -> Result<ProjectiveReport, FlowError> {
    let g1_norm: f64 = dir1
        .iter()
        .zip(a)
        .map(|(d, ai)| ai * d * d)
        .sum::<f64>()
        .sqrt();
    let b0 = conformal_b(a, q0);
    let g2_norm: f64 = (dot(dir2, dir2) / b0).sqrt();
    let v1: Vec<f64> = dir1.iter().map(|d| d / g1_norm).collect();
    let v2: Vec<f64> = dir2.iter().map(|d| d / g2_norm).collect();

    let opts = IntegrateOpts {
        t_end,
        tol,
        samples: 4001,
    };
    let t1 = integrate(SprayKind::G1, a, q0, &v1, &opts)?;
    let t2 = integrate(SprayKind::G2, a, q0, &v2, &opts)?;

    let p1 = refined_polyline(&t1, 8);
    let p2 = refined_polyline(&t2, 8);
    let (s1, s2) = (polyline_length(&p1), polyline_length(&p2));
    let s_max = s1.min(s2) * 0.999;

    let m = 512;
    let mut max_dev = 0.0_f64;
    for i in 0..=m {
        let s = s_max * i as f64 / m as f64;
        let x1 = polyline_at(&p1, s);
        let x2 = polyline_at(&p2, s);
        let d = x1
            .iter()
            .zip(&x2)
            .map(|(u, w)| (u - w) * (u - w))
            .sum::<f64>()
            .sqrt();
        max_dev = max_dev.max(d);
    }
    Ok(ProjectiveReport {
        max_deviation: max_dev,
        arc_length_compared: s_max,
        threshold,
        pass: max_dev <= threshold,
    })
}

/// Cubic-Hermite refinement of the sampled position curve.
fn refined_polyline(traj: &Trajectory, refine: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(traj.states.len() * refine);
    for w in traj.states.windows(2) {
        let (s0, s1) = (&w[0], &w[1]);
        let dt = s1.t - s0.t;
        for r in 0..refine {
            let u = r as f64 / refine as f64;
            let (h00, h10, h01, h11) = hermite_basis(u);
            let mut p = Vec::with_capacity(s0.q.len());
            for i in 0..s0.q.len() {
                p.push(h00 * s0.q[i] + h10 * dt * s0.v[i] + h01 * s1.q[i] + h11 * dt * s1.v[i]);
            }
            out.push(p);
        }
    }
    out.push(traj.states.last().expect("nonempty trajectory").q.clone());
    out
}

fn hermite_basis(u: f64) -> (f64, f64, f64, f64) {
    let u2 = u * u;
    let u3 = u2 * u;
    (
        2.0 * u3 - 3.0 * u2 + 1.0,
        u3 - 2.0 * u2 + u,
        -2.0 * u3 + 3.0 * u2,
        u3 - u2,
    )
}

fn polyline_length(p: &[Vec<f64>]) -> f64 {
    p.windows(2)
        .map(|w| {
            w[0].iter()
                .zip(&w[1])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        })
        .sum()
}

/// Point at arc length `s` along the polyline (linear within segments).
fn polyline_at(p: &[Vec<f64>], s: f64) -> Vec<f64> {
    let mut acc = 0.0;
    for w in p.windows(2) {
        let seg: f64 = w[0]
            .iter()
            .zip(&w[1])
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        if acc + seg >= s || seg == 0.0 {
            let u = if seg > 0.0 { (s - acc) / seg } else { 0.0 };
            return w[0]
                .iter()
                .zip(&w[1])
                .map(|(a, b)| a + u * (b - a))
                .collect();
        }
        acc += seg;
    }
    p.last().expect("nonempty polyline").clone()
}

/// Deterministic initial data tangent to the sphere: a point away from the
/// coordinate planes and a unit tangent direction.
pub fn default_initial(nc: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = crate::sample::SplitMix64::new(seed);
    let mut q: Vec<f64> = (0..nc)
        .map(|_| 0.25 + (rng.below(1000) as f64) / 1500.0)
        .collect();
    let norm = dot(&q, &q).sqrt();
    q.iter_mut().for_each(|x| *x /= norm);
    let mut d: Vec<f64> = (0..nc)
        .map(|_| (rng.below(2000) as f64) / 1000.0 - 1.0)
        .collect();
    let qd = dot(&q, &d);
    for (di, qi) in d.iter_mut().zip(&q) {
        *di -= qd * qi;
    }
    let dn = dot(&d, &d).sqrt();
    d.iter_mut().for_each(|x| *x /= dn);
    (q, d)
}
