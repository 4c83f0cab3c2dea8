//! Optimal protocol parameters.
//!
//! Two maximization targets exist: the extracted energy `ΔE_B` and the local
//! energy reduction `ΔE_{B,B}`. Both have closed-form maxima, certified here by
//! evaluating the direct protocol at the optimal parameters, and both can be
//! found independently by [`brute_force_max`], which searches the measurement
//! and feedback angles against the direct matrix-element objective.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;

use crate::error::{domain, Result};
use crate::exec::Exec;
use crate::model::{
    build_hamiltonian, energy_decomposition, sigma, solve_ground_state_analytic, Axis,
    GroundStateSolution, ModelParams, Site,
};
use crate::operator::{DenseOperator, State};
use crate::protocol::{
    correlators, feedback_energy, CorrelatorSet, EnergyLedger, ProtocolParams,
};

/// Quantity being maximized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    /// `ΔE_B`, the energy extracted from the whole system.
    ExtractedEnergy,
    /// `ΔE_{B,B}`, the reduction of Bob's local energy.
    LocalReduction,
}

impl Target {
    pub fn value(self, ledger: &EnergyLedger) -> f64 {
        match self {
            Target::ExtractedEnergy => ledger.delta_e_b,
            Target::LocalReduction => ledger.delta_e_bb,
        }
    }
}

/// An optimum together with the data that certifies it.
///
/// For fixed axes the target is `W(1 - cos 2θ) + X sin 2θ`, so its maximum
/// over `θ` is `√(W² + X²) - |W|`, reached at `2θ + δ = 0` with
/// `cos δ = -W/√(W²+X²)`, `sin δ = -X/√(W²+X²)`.
#[derive(Debug, Clone, Copy)]
pub struct OptimizationCertificate {
    pub target: Target,
    pub params: ProtocolParams,
    pub value: f64,
    pub w: f64,
    pub x: f64,
    pub delta: f64,
    pub sin_2theta: f64,
    pub cos_2theta: f64,
    /// Direct evaluation of the round at `params`.
    pub ledger: EnergyLedger,
}

impl OptimizationCertificate {
    /// `|W² + X² - (value + |W|)²|`.
    pub fn amplitude_residual(&self) -> f64 {
        (self.w * self.w + self.x * self.x - (self.value + self.w.abs()).powi(2)).abs()
    }

    pub fn trig_residual(&self) -> f64 {
        (self.sin_2theta.powi(2) + self.cos_2theta.powi(2) - 1.0).abs()
    }

    /// Distance of `2θ + δ` from a multiple of `2π`.
    pub fn phase_residual(&self) -> f64 {
        let total = (2.0 * self.params.theta + self.delta).rem_euclid(TAU);
        total.min(TAU - total)
    }

    /// `|value - target(ledger)|`: the closed-form value against the direct round.
    pub fn ledger_residual(&self) -> f64 {
        (self.value - self.target.value(&self.ledger)).abs()
    }
}

/// Amplitudes `(W, X)` of the target at fixed axes, from the closed forms.
pub fn amplitude_terms(
    target: Target,
    g: &GroundStateSolution,
    c: &CorrelatorSet,
    pp: &ProtocolParams,
) -> (f64, f64) {
    let (h, k) = (g.params.h, g.params.k);
    let ge = energy_decomposition(g);
    let [rx, ry, _] = pp.r();
    let [sx, sy, sz] = pp.s();
    match target {
        Target::ExtractedEnergy => (
            (1.0 - sz * sz) * ge.eps_b + (1.0 - sx * sx) * ge.eps_r,
            rx * sy * (k * c.c_ar - h * c.c_ab) + ry * sx * h * c.d_ab,
        ),
        Target::LocalReduction => (
            ge.eps_b * (1.0 - sz * sz),
            -h * (rx * sy * c.c_ab - ry * sx * c.d_ab),
        ),
    }
}

/// `X₀` after substituting `k C_AR - h C_AB = -h D_AB`.
pub fn reduced_extraction_amplitude(g: &GroundStateSolution, c: &CorrelatorSet, pp: &ProtocolParams) -> f64 {
    let [rx, ry, _] = pp.r();
    let [sx, sy, _] = pp.s();
    (ry * sx - rx * sy) * g.params.h * c.d_ab
}

/// `atan2(-X, -W)`, or 0 when both amplitudes vanish.
fn phase(w: f64, x: f64) -> f64 {
    if w == 0.0 && x == 0.0 {
        0.0
    } else {
        (-x).atan2(-w)
    }
}

fn certify(
    target: Target,
    g: &GroundStateSolution,
    axes: ProtocolParams,
    w: f64,
    x: f64,
) -> OptimizationCertificate {
    let amp = (w * w + x * x).sqrt();
    let (cos_2theta, sin_2theta) = if amp > 0.0 { (-w / amp, x / amp) } else { (1.0, 0.0) };
    let theta = 0.5 * sin_2theta.atan2(cos_2theta);
    let params = ProtocolParams { theta, ..axes };
    OptimizationCertificate {
        target,
        params,
        value: amp - w.abs(),
        w,
        x,
        delta: phase(w, x),
        sin_2theta,
        cos_2theta,
        ledger: feedback_energy(g, &params),
    }
}

/// `ΔE_B^max = √(ε_B² + (h D_AB)²) - |ε_B|` at `r⃗ = ŷ`, `s⃗ = x̂`.
pub fn max_extracted_energy(g: &GroundStateSolution) -> OptimizationCertificate {
    let ge = energy_decomposition(g);
    let c = CorrelatorSet::closed_form(g);
    let axes = ProtocolParams::new(FRAC_PI_2, FRAC_PI_2, FRAC_PI_2, 0.0, 0.0);
    certify(Target::ExtractedEnergy, g, axes, ge.eps_b, g.params.h * c.d_ab)
}

/// `ΔE_{B,B}^max = √(ε_B² + (h C_AB)²) - |ε_B|` at `r⃗ = x̂`, `s⃗ = ŷ`.
pub fn max_local_reduction(g: &GroundStateSolution) -> OptimizationCertificate {
    let ge = energy_decomposition(g);
    let c = CorrelatorSet::closed_form(g);
    let axes = ProtocolParams::new(FRAC_PI_2, 0.0, FRAC_PI_2, FRAC_PI_2, 0.0);
    certify(Target::LocalReduction, g, axes, ge.eps_b, -g.params.h * c.c_ab)
}

/// `ΔE_{B,R} = ε_R(1 - cos 2θ) + k C_AR sin 2θ` at the `ΔE_{B,B}` optimum.
pub fn bond_change_at_local_optimum(g: &GroundStateSolution, cert: &OptimizationCertificate) -> f64 {
    let ge = energy_decomposition(g);
    let c = CorrelatorSet::closed_form(g);
    ge.eps_r * (1.0 - cert.cos_2theta) + g.params.k * c.c_ar * cert.sin_2theta
}

/// Pauli basis `{I, σ^x, σ^y, σ^z}` on one site.
fn pauli_basis(site: Site) -> [DenseOperator; 4] {
    [
        DenseOperator::identity(crate::model::DIM),
        sigma(site, Axis::X),
        sigma(site, Axis::Y),
        sigma(site, Axis::Z),
    ]
}

/// The direct objective `F(θ=0) - F(θ)` with
/// `F = Σ_n ⟨ψ|P_A(n) U_B(n)† X U_B(n) P_A(n)|ψ⟩`, `X = H` for
/// [`Target::ExtractedEnergy`] and `X = H_B` for [`Target::LocalReduction`].
///
/// Expanding `P_A(n)` and `U_B(n)` in Pauli operators turns the matrix element
/// into a contraction with the tensor
/// `T[a][b][b'][a'] = ⟨ψ|σ_A^a σ_B^b X σ_B^b' σ_A^a'|ψ⟩`, computed once from
/// the state vector. No closed-form energy expression is used.
#[derive(Debug, Clone)]
pub struct ProtocolObjective {
    tensor: Box<[[[[Complex64; 4]; 4]; 4]; 4]>,
}

/// The objective restricted to one measurement axis. For a feedback axis `s`
/// it is `B(1 - cos 2θ) - C sin 2θ` with `B = (f0 - sᵀKs)/2`, `C = v·s/2`.
#[derive(Debug, Clone, Copy)]
pub struct AxisSlice {
    f0: f64,
    k: [[f64; 3]; 3],
    v: [f64; 3],
}

/// Best feedback angle for a fixed pair of axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaOptimum {
    pub value: f64,
    pub w: f64,
    pub x: f64,
    pub cos_2theta: f64,
    pub sin_2theta: f64,
}

impl AxisSlice {
    pub fn amplitudes(&self, s: [f64; 3]) -> (f64, f64) {
        let mut q = 0.0;
        let mut lin = 0.0;
        for b in 0..3 {
            lin += self.v[b] * s[b];
            for c in 0..3 {
                q += s[b] * self.k[b][c] * s[c];
            }
        }
        (0.5 * (self.f0 - q), -0.5 * lin)
    }

    /// Maximizes over `θ` exactly.
    pub fn best_theta(&self, s: [f64; 3]) -> ThetaOptimum {
        let (w, x) = self.amplitudes(s);
        let amp = (w * w + x * x).sqrt();
        let (cos_2theta, sin_2theta) = if amp > 0.0 { (-w / amp, x / amp) } else { (1.0, 0.0) };
        ThetaOptimum { value: w + amp, w, x, cos_2theta, sin_2theta }
    }

    /// The target at an explicit `θ`.
    pub fn at_theta(&self, s: [f64; 3], theta: f64) -> f64 {
        let (w, x) = self.amplitudes(s);
        let (s2, c2) = (2.0 * theta).sin_cos();
        w * (1.0 - c2) + x * s2
    }
}

impl ProtocolObjective {
    pub fn new(g: &GroundStateSolution, target: Target) -> Self {
        let ham = build_hamiltonian(&g.params);
        let op = match target {
            Target::ExtractedEnergy => ham.total,
            Target::LocalReduction => ham.h_b,
        };
        let sa = pauli_basis(Site::A);
        let sb = pauli_basis(Site::B);
        // kets[b][a] = σ_B^b σ_A^a |ψ⟩
        let kets: Vec<Vec<State>> = sb
            .iter()
            .map(|b| sa.iter().map(|a| b.apply(&a.apply(&g.vector))).collect())
            .collect();
        let op_kets: Vec<Vec<State>> =
            kets.iter().map(|row| row.iter().map(|k| op.apply(k)).collect()).collect();
        let mut tensor = Box::new([[[[Complex64::new(0.0, 0.0); 4]; 4]; 4]; 4]);
        for a in 0..4 {
            for b in 0..4 {
                for bp in 0..4 {
                    for ap in 0..4 {
                        tensor[a][b][bp][ap] = kets[b][a].dotc(&op_kets[bp][ap]);
                    }
                }
            }
        }
        Self { tensor }
    }

    /// `M_n[b][b'] = Σ_{a,a'} p_a(n) p_a'(n) T[a][b][b'][a']` with
    /// `P_A(n) = Σ_a p_a(n) σ_A^a`.
    fn contract_measurement(&self, r: [f64; 3], n: f64) -> [[Complex64; 4]; 4] {
        let p = [0.5, 0.5 * n * r[0], 0.5 * n * r[1], 0.5 * n * r[2]];
        let mut m = [[Complex64::new(0.0, 0.0); 4]; 4];
        for a in 0..4 {
            for ap in 0..4 {
                let w = p[a] * p[ap];
                if w == 0.0 {
                    continue;
                }
                for b in 0..4 {
                    for bp in 0..4 {
                        m[b][bp] += self.tensor[a][b][bp][ap] * w;
                    }
                }
            }
        }
        m
    }

    pub fn slice(&self, r: [f64; 3]) -> AxisSlice {
        let mut f0 = 0.0;
        let mut k = [[0.0; 3]; 3];
        let mut v = [0.0; 3];
        for n in [1.0, -1.0] {
            let m = self.contract_measurement(r, n);
            f0 += m[0][0].re;
            for b in 0..3 {
                // i n (M[0][b] - M[b][0]) is real for a Hermitian X
                v[b] += (Complex64::new(0.0, n) * (m[0][b + 1] - m[b + 1][0])).re;
                for c in 0..3 {
                    k[b][c] += 0.5 * (m[b + 1][c + 1] + m[c + 1][b + 1]).re;
                }
            }
        }
        AxisSlice { f0, k, v }
    }

    /// Full contraction at arbitrary parameters, `θ` included.
    pub fn value(&self, pp: &ProtocolParams) -> f64 {
        let r = pp.r();
        let s = pp.s();
        let f = |theta: f64| -> f64 {
            let (sn, cs) = theta.sin_cos();
            let mut total = 0.0;
            for n in [1.0, -1.0] {
                let m = self.contract_measurement(r, n);
                let u = [
                    Complex64::new(cs, 0.0),
                    Complex64::new(0.0, n * sn * s[0]),
                    Complex64::new(0.0, n * sn * s[1]),
                    Complex64::new(0.0, n * sn * s[2]),
                ];
                for b in 0..4 {
                    for bp in 0..4 {
                        total += (u[b].conj() * u[bp] * m[b][bp]).re;
                    }
                }
            }
            total
        };
        f(0.0) - f(pp.theta)
    }
}

/// Default number of grid points per angle.
pub const DEFAULT_RESOLUTION: usize = 128;
pub const MIN_RESOLUTION: usize = 64;

/// Zoom-refinement stops once the angular step falls below this.
const REFINE_STEP_TOL: f64 = 1e-9;
const REFINE_HALF_WIDTH: i32 = 4;
const REFINE_SHRINK: f64 = 4.0;
const MIN_REFINE_ROUNDS: usize = 3;

fn axis_from(polar: f64, azimuth: f64) -> [f64; 3] {
    [polar.sin() * azimuth.cos(), polar.sin() * azimuth.sin(), polar.cos()]
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    angles: [f64; 4],
    best: ThetaOptimum,
}

/// Picks the larger value; on ties the earlier candidate wins, so the result
/// does not depend on evaluation order.
fn better(a: Option<Candidate>, b: Candidate) -> Option<Candidate> {
    match a {
        Some(a) if a.best.value >= b.best.value => Some(a),
        _ => Some(b),
    }
}

/// Exhaustive search over `(μ, ν, ξ, η)` on a `resolution⁴` grid with the
/// feedback angle optimized exactly at each point, then local zoom rounds
/// (a `9⁴` grid whose step shrinks 4x per round) until the step drops below
/// `1e-9` rad.
///
/// Grid: `μ, ξ ∈ [0, π]` endpoints included, `ν, η ∈ [0, 2π)`.
pub fn brute_force_max(
    g: &GroundStateSolution,
    target: Target,
    resolution: usize,
    exec: Exec,
) -> Result<OptimizationCertificate> {
    if resolution < MIN_RESOLUTION {
        return domain(format!("grid resolution must be at least {MIN_RESOLUTION}, got {resolution}"));
    }
    let objective = ProtocolObjective::new(g, target);
    let n = resolution;
    let polar = |i: usize| PI * i as f64 / (n - 1) as f64;
    let azimuth = |j: usize| TAU * j as f64 / n as f64;
    let feedback_axes: Vec<([f64; 2], [f64; 3])> = (0..n * n)
        .map(|idx| {
            let (xi, eta) = (polar(idx / n), azimuth(idx % n));
            ([xi, eta], axis_from(xi, eta))
        })
        .collect();

    let rows = exec.map_range(n * n, |idx| {
        let (mu, nu) = (polar(idx / n), azimuth(idx % n));
        let slice = objective.slice(axis_from(mu, nu));
        let mut best: Option<Candidate> = None;
        for ([xi, eta], s) in &feedback_axes {
            let cand = Candidate { angles: [mu, nu, *xi, *eta], best: slice.best_theta(*s) };
            best = better(best, cand);
        }
        best.expect("non-empty grid")
    });
    let mut best = rows.into_iter().fold(None, better).expect("non-empty grid");

    let mut step = [PI / (n - 1) as f64, TAU / n as f64, PI / (n - 1) as f64, TAU / n as f64];
    let span = (2 * REFINE_HALF_WIDTH + 1) as usize;
    let mut rounds = 0;
    while rounds < MIN_REFINE_ROUNDS || step.iter().cloned().fold(0.0, f64::max) > REFINE_STEP_TOL {
        let center = best.angles;
        let offset = |k: usize| (k as i32 - REFINE_HALF_WIDTH) as f64;
        let local = exec.map_range(span * span, |idx| {
            let mu = center[0] + offset(idx / span) * step[0];
            let nu = center[1] + offset(idx % span) * step[1];
            let slice = objective.slice(axis_from(mu, nu));
            let mut best: Option<Candidate> = None;
            for a in 0..span {
                for b in 0..span {
                    let xi = center[2] + offset(a) * step[2];
                    let eta = center[3] + offset(b) * step[3];
                    let cand = Candidate {
                        angles: [mu, nu, xi, eta],
                        best: slice.best_theta(axis_from(xi, eta)),
                    };
                    best = better(best, cand);
                }
            }
            best.expect("non-empty window")
        });
        // keep the incumbent on ties
        best = local.into_iter().fold(Some(best), better).expect("incumbent");
        for s in &mut step {
            *s /= REFINE_SHRINK;
        }
        rounds += 1;
    }

    let [mu, nu, xi, eta] = best.angles;
    let theta = 0.5 * best.best.sin_2theta.atan2(best.best.cos_2theta);
    let params = ProtocolParams::new(mu, nu, xi, eta, theta).canonical();
    let ThetaOptimum { value, w, x, cos_2theta, sin_2theta } = best.best;
    Ok(OptimizationCertificate {
        target,
        params,
        value,
        w,
        x,
        delta: phase(w, x),
        sin_2theta,
        cos_2theta,
        ledger: feedback_energy(g, &params),
    })
}

/// One row of the extraction-vs-field table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractionRow {
    pub h: f64,
    pub c_ab: f64,
    pub d_ab: f64,
    pub h_c_ab: f64,
    pub h_d_ab: f64,
    /// `ΔE_A` for `r⃗ = ŷ`.
    pub delta_e_a_ry: f64,
    /// `ΔE_A` for `r⃗ = x̂`.
    pub delta_e_a_rx: f64,
    pub delta_e_b_max: f64,
    pub delta_e_bb_max: f64,
    /// `ΔE_B` at the `ΔE_{B,B}` optimum: `ΔE_{B,B}^max + ΔE_{B,R}`.
    pub delta_e_b_at_local_opt: f64,
}

impl ExtractionRow {
    pub const HEADER: [&'static str; 10] = [
        "h",
        "C_AB",
        "D_AB",
        "hC_AB",
        "hD_AB",
        "dE_A_ry",
        "dE_A_rx",
        "dE_B_max",
        "dE_BB_max",
        "dE_B_at_dE_BB_opt",
    ];

    pub fn values(&self) -> [f64; 10] {
        [
            self.h,
            self.c_ab,
            self.d_ab,
            self.h_c_ab,
            self.h_d_ab,
            self.delta_e_a_ry,
            self.delta_e_a_rx,
            self.delta_e_b_max,
            self.delta_e_bb_max,
            self.delta_e_b_at_local_opt,
        ]
    }
}

pub fn extraction_row(g: &GroundStateSolution) -> ExtractionRow {
    let h = g.params.h;
    let ge = energy_decomposition(g);
    let c = CorrelatorSet::closed_form(g);
    let b_max = max_extracted_energy(g);
    let bb_max = max_local_reduction(g);
    ExtractionRow {
        h,
        c_ab: c.c_ab,
        d_ab: c.d_ab,
        h_c_ab: h * c.c_ab,
        h_d_ab: h * c.d_ab,
        delta_e_a_ry: -ge.eps_a - ge.eps_l,
        delta_e_a_rx: -ge.eps_a,
        delta_e_b_max: b_max.value,
        delta_e_bb_max: bb_max.value,
        delta_e_b_at_local_opt: bb_max.value + bond_change_at_local_optimum(g, &bb_max),
    }
}

/// Closed-form table over an ascending `h` grid.
pub fn sweep_figure3(k: f64, h_grid: &[f64], exec: Exec) -> Result<Vec<ExtractionRow>> {
    check_grid(h_grid)?;
    exec.map(h_grid, |&h| {
        let g = solve_ground_state_analytic(&ModelParams::new(h, k)?)?;
        Ok(extraction_row(&g))
    })
    .into_iter()
    .collect()
}

pub(crate) fn check_grid(h_grid: &[f64]) -> Result<()> {
    if h_grid.is_empty() {
        return domain("h grid is empty");
    }
    if h_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return domain("h grid must be strictly increasing");
    }
    Ok(())
}

/// `n` equally spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Location of the maximum of sampled `ys`, refined by a parabola through the
/// best sample and its neighbours.
pub fn peak_location(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let i = (0..ys.len()).max_by(|&a, &b| ys[a].total_cmp(&ys[b]))?;
    if i == 0 || i + 1 == ys.len() {
        return Some(xs[i]);
    }
    let (x0, x1, x2) = (xs[i - 1], xs[i], xs[i + 1]);
    let (y0, y1, y2) = (ys[i - 1], ys[i], ys[i + 1]);
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let curv = (d12 - d01) / (x2 - x0);
    if curv >= 0.0 {
        return Some(x1);
    }
    // vertex of y0 + d01 (x - x0) + curv (x - x0)(x - x1)
    Some(0.5 * (x0 + x1) - d01 / (2.0 * curv))
}

/// First crossing of two sampled curves, refined by a quadratic through three
/// samples of their difference.
pub fn crossover_location(xs: &[f64], a: &[f64], b: &[f64]) -> Option<f64> {
    let d: Vec<f64> = a.iter().zip(b).map(|(a, b)| a - b).collect();
    // a shared starting value is not a crossing
    let i = (0..d.len().saturating_sub(1))
        .find(|&i| d[i] != 0.0 && (d[i + 1] == 0.0 || d[i].signum() != d[i + 1].signum()))?;
    if d[i + 1] == 0.0 {
        return Some(xs[i + 1]);
    }
    let j = if i + 2 < d.len() { i } else if i > 0 { i - 1 } else {
        return Some(xs[i] - d[i] * (xs[i + 1] - xs[i]) / (d[i + 1] - d[i]));
    };
    let (x0, x1, x2) = (xs[j], xs[j + 1], xs[j + 2]);
    let (y0, y1, y2) = (d[j], d[j + 1], d[j + 2]);
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let c2 = (d12 - d01) / (x2 - x0);
    // y = y0 + d01 (x - x0) + c2 (x - x0)(x - x1) = A t² + B t + C with t = x - x0
    let (qa, qb, qc) = (c2, d01 - c2 * (x1 - x0), y0);
    let (lo, hi) = (xs[i], xs[i + 1]);
    let linear = xs[i] - d[i] * (hi - lo) / (d[i + 1] - d[i]);
    if qa.abs() < 1e-300 {
        return Some(linear);
    }
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return Some(linear);
    }
    let sq = disc.sqrt();
    [(-qb + sq) / (2.0 * qa), (-qb - sq) / (2.0 * qa)]
        .into_iter()
        .map(|t| t + x0)
        .find(|x| *x >= lo - 1e-12 && *x <= hi + 1e-12)
        .or(Some(linear))
}

/// Peak of `ΔE_B^max(h)` and the extraction efficiency there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractionAnchors {
    pub peak_h: f64,
    /// `ΔE_B^max / ΔE_A(r⃗ = ŷ)` at the peak.
    pub efficiency_at_peak: f64,
    /// Where `ΔE_A(r⃗ = x̂)` and `ΔE_{B,B}^max` cross.
    pub crossover_h: f64,
}

/// Extracts the anchors from a closed-form sweep on `[h_lo, h_hi]` with step `dh`.
pub fn extraction_anchors(k: f64, h_lo: f64, h_hi: f64, dh: f64, exec: Exec) -> Result<ExtractionAnchors> {
    let n = ((h_hi - h_lo) / dh).round() as usize + 1;
    let hs = linspace(h_lo, h_hi, n);
    let rows = sweep_figure3(k, &hs, exec)?;
    let b_max: Vec<f64> = rows.iter().map(|r| r.delta_e_b_max).collect();
    let peak_h = peak_location(&hs, &b_max)
        .ok_or_else(|| crate::QetError::Numeric("empty sweep".into()))?;
    let g = solve_ground_state_analytic(&ModelParams::new(peak_h, k)?)?;
    let row = extraction_row(&g);
    let rx: Vec<f64> = rows.iter().map(|r| r.delta_e_a_rx).collect();
    let bb: Vec<f64> = rows.iter().map(|r| r.delta_e_bb_max).collect();
    let crossover_h = crossover_location(&hs, &rx, &bb)
        .ok_or_else(|| crate::QetError::Numeric("no crossover in sweep range".into()))?;
    Ok(ExtractionAnchors {
        peak_h,
        efficiency_at_peak: row.delta_e_b_max / row.delta_e_a_ry,
        crossover_h,
    })
}

/// Uses the matrix-element correlators instead of the closed forms; for tests
/// that separate formula errors from state errors.
pub fn amplitude_terms_direct(target: Target, g: &GroundStateSolution, pp: &ProtocolParams) -> (f64, f64) {
    amplitude_terms(target, g, &correlators(g), pp)
}
