//! Bob's reduced states and the information-thermodynamic bound on local
//! energy reduction. Natural logarithms throughout.

use std::f64::consts::{PI, TAU};

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::error::{domain, QetError, Result};
use crate::exec::Exec;
use crate::model::{energy_decomposition, solve_ground_state_analytic, GroundStateSolution, ModelParams};
use crate::operator::State;
use crate::optimum::{check_grid, max_local_reduction};
use crate::protocol::{measurement_branches, CorrelatorSet, ProtocolParams, MIN_OUTCOME_PROBABILITY};

/// Eigenvalues in `[-EIG_CLIP, 0)` are treated as zero before taking logs.
pub const EIG_CLIP: f64 = 1e-12;

/// A 2×2 density matrix in the `(e, f)` basis of site B.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalState {
    pub rho: Matrix2<Complex64>,
}

impl LocalState {
    /// `pop_e |e⟩⟨e| + κ |e⟩⟨f| + κ* |f⟩⟨e| + pop_f |f⟩⟨f|`.
    pub fn from_parts(pop_e: f64, pop_f: f64, kappa: Complex64) -> Self {
        let re = |x: f64| Complex64::new(x, 0.0);
        Self { rho: Matrix2::new(re(pop_e), kappa, kappa.conj(), re(pop_f)) }
    }

    pub fn trace(&self) -> f64 {
        (self.rho[(0, 0)] + self.rho[(1, 1)]).re
    }

    /// `(λ₊, λ₋)`.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let a = self.rho[(0, 0)].re;
        let d = self.rho[(1, 1)].re;
        let off = self.rho[(0, 1)].norm();
        let root = ((a - d).powi(2) + 4.0 * off * off).sqrt();
        (0.5 * (a + d + root), 0.5 * (a + d - root))
    }

    /// Maximum of the trace error and the distance of the spectrum from `[0, 1]`.
    pub fn validity_residual(&self) -> f64 {
        let (hi, lo) = self.eigenvalues();
        let herm = (self.rho[(0, 1)] - self.rho[(1, 0)].conj()).norm();
        (self.trace() - 1.0).abs().max((-lo).max(0.0)).max((hi - 1.0).max(0.0)).max(herm)
    }

    pub fn entropy(&self) -> Result<f64> {
        let (hi, lo) = self.eigenvalues();
        entropy_of(&[hi, lo])
    }

    pub fn max_deviation(&self, other: &Self) -> f64 {
        (self.rho - other.rho).iter().fold(0.0, |m, z| m.max(z.norm()))
    }
}

/// `-Σ λ ln λ` with `0 ln 0 = 0`.
pub fn entropy_of(eigs: &[f64]) -> Result<f64> {
    let mut s = 0.0;
    for &l in eigs {
        if l < -EIG_CLIP {
            return Err(QetError::Numeric(format!("negative eigenvalue {l} in density matrix")));
        }
        if l > 0.0 {
            s -= l * l.ln();
        }
    }
    Ok(s)
}

/// `Tr_{A,C1,C2} |φ⟩⟨φ|` for a normalized four-site state.
pub fn partial_trace_b(state: &State) -> LocalState {
    let mut rho = Matrix2::zeros();
    for rest in 0..state.len() / 2 {
        for b in 0..2 {
            for bp in 0..2 {
                rho[(b, bp)] += state[2 * rest + b] * state[2 * rest + bp].conj();
            }
        }
    }
    LocalState { rho }
}

pub fn reduced_initial(g: &GroundStateSolution) -> LocalState {
    partial_trace_b(&g.vector)
}

/// `2Z²[(1+β²)|e⟩⟨e| + (1+α²)|f⟩⟨f|]`.
pub fn reduced_initial_closed(g: &GroundStateSolution) -> LocalState {
    let z2 = g.z * g.z;
    LocalState::from_parts(
        2.0 * z2 * (1.0 + g.beta * g.beta),
        2.0 * z2 * (1.0 + g.alpha * g.alpha),
        Complex64::new(0.0, 0.0),
    )
}

/// Bob's state after Alice observes `n`, with its probability. `state` is
/// `None` for an unreachable outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasuredState {
    pub n: i32,
    pub probability: f64,
    pub state: Option<LocalState>,
}

/// Both outcomes, `n = +1` first, by partial trace of the conditional states.
pub fn reduced_measured(g: &GroundStateSolution, pp: &ProtocolParams) -> [MeasuredState; 2] {
    measurement_branches(g, pp).map(|b| MeasuredState {
        n: b.n,
        probability: b.probability,
        state: b.state.as_ref().map(partial_trace_b),
    })
}

/// Closed form for a measurement axis `r`:
/// populations `1 - w` (e) and `w` (f) with
/// `w = 2Z²((1 - n r_z) + α²(1 + n r_z)) / d`,
/// `κ = 2nZ²((r_x + i r_y) + αβ(r_x - i r_y)) / d`,
/// `p_n = d/2`, `d = 1 + 2n r_z (α² - β²) Z²`.
pub fn reduced_measured_closed(g: &GroundStateSolution, r: [f64; 3], n: i32) -> MeasuredState {
    let nf = f64::from(n);
    let (a, b, z2) = (g.alpha, g.beta, g.z * g.z);
    let d = 1.0 + 2.0 * nf * r[2] * (a * a - b * b) * z2;
    let probability = 0.5 * d;
    if probability < MIN_OUTCOME_PROBABILITY {
        return MeasuredState { n, probability, state: None };
    }
    let w = 2.0 * z2 * ((1.0 - nf * r[2]) + a * a * (1.0 + nf * r[2])) / d;
    let kappa = Complex64::new(r[0] * (1.0 + a * b), r[1] * (1.0 - a * b)) * (2.0 * nf * z2 / d);
    MeasuredState { n, probability, state: Some(LocalState::from_parts(1.0 - w, w, kappa)) }
}

/// `Σ_n p_n S(ρ_B^m(n))` over reachable outcomes.
pub fn conditional_entropy(outcomes: &[MeasuredState; 2]) -> Result<f64> {
    let mut s = 0.0;
    for o in outcomes {
        if let Some(st) = &o.state {
            s += o.probability * st.entropy()?;
        }
    }
    Ok(s)
}

/// `I_QC = S(ρ_B^i) - Σ_n p_n S(ρ_B^m(n))`.
pub fn qc_mutual_information(g: &GroundStateSolution, pp: &ProtocolParams) -> Result<f64> {
    Ok(reduced_initial(g).entropy()? - conditional_entropy(&reduced_measured(g, pp))?)
}

/// `D(ρ‖σ) = Tr ρ(ln ρ - ln σ)` for `σ` diagonal in `(e, f)` with full rank.
pub fn kl_divergence(rho: &LocalState, sigma_pops: [f64; 2]) -> Result<f64> {
    if sigma_pops.iter().any(|&p| p <= 0.0) {
        return Err(QetError::Singular("reference state is not full rank".into()));
    }
    let cross = -(rho.rho[(0, 0)].re * sigma_pops[0].ln() + rho.rho[(1, 1)].re * sigma_pops[1].ln());
    Ok(cross - rho.entropy()?)
}

/// Effective Gibbs state of `H_B = hσ_B^z` matching the entropy of the
/// optimally measured state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveTemperature {
    pub beta_eff: f64,
    pub z_eff: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    /// `√(1 - 16Z⁴(α-β)²)`.
    pub g: f64,
    /// `σ_B = e^{-β_eff H_B}/Z_eff`, populations `(e, f)`.
    pub sigma_pops: [f64; 2],
}

impl EffectiveTemperature {
    pub fn sigma(&self) -> LocalState {
        LocalState::from_parts(self.sigma_pops[0], self.sigma_pops[1], Complex64::new(0.0, 0.0))
    }
}

/// The measurement axis that minimizes the conditional entropy.
pub const OPTIMAL_AXIS: [f64; 3] = [1.0, 0.0, 0.0];

fn optimal_measurement() -> ProtocolParams {
    ProtocolParams::from_axes(OPTIMAL_AXIS, [0.0, 0.0, 1.0], 0.0).expect("unit axes")
}

/// `β_eff h = ln √(λ₊/λ₋)`, `Z_eff = 1/√(λ₊λ₋)`.
pub fn effective_beta(g: &GroundStateSolution) -> Result<EffectiveTemperature> {
    let h = g.params.h;
    if h == 0.0 {
        return Err(QetError::Singular("β_eff is infinite at h = 0".into()));
    }
    let z2 = g.z * g.z;
    let gg = (1.0 - 16.0 * z2 * z2 * (g.alpha - g.beta).powi(2)).max(0.0).sqrt();
    let (lp, lm) = (0.5 * (1.0 + gg), 0.5 * (1.0 - gg));
    if lm <= 0.0 {
        return Err(QetError::Singular("measured state is pure; β_eff is infinite".into()));
    }
    let beta_eff = (lp / lm).sqrt().ln() / h;
    let z_eff = 1.0 / (lp * lm).sqrt();
    let sigma_pops = [(beta_eff * h).exp() / z_eff, (-beta_eff * h).exp() / z_eff];
    Ok(EffectiveTemperature { beta_eff, z_eff, lambda_plus: lp, lambda_minus: lm, g: gg, sigma_pops })
}

/// One evaluation of the conditional entropy on the axis grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisEntropy {
    pub mu: f64,
    pub nu: f64,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct EntropyScan {
    pub argmin: AxisEntropy,
    pub table: Vec<AxisEntropy>,
    pub polar_step: f64,
    pub azimuth_step: f64,
}

impl EntropyScan {
    pub fn argmin_axis(&self) -> [f64; 3] {
        let (mu, nu) = (self.argmin.mu, self.argmin.nu);
        [mu.sin() * nu.cos(), mu.sin() * nu.sin(), mu.cos()]
    }

    /// Whether the minimizer lies within one grid step of `±x̂`.
    pub fn minimum_is_x_axis(&self) -> bool {
        let near_pi2 = (self.argmin.mu - PI / 2.0).abs() <= self.polar_step + 1e-12;
        let nu = self.argmin.nu;
        let near_az = nu.min((nu - PI).abs()).min(TAU - nu) <= self.azimuth_step + 1e-12;
        near_pi2 && near_az
    }
}

pub const MIN_POLAR_POINTS: usize = 64;
pub const MIN_AZIMUTH_POINTS: usize = 128;

/// `Σ_n p_n S(ρ_B^m(n))` on `μ ∈ [0, π]` (endpoints included) × `ν ∈ [0, 2π)`,
/// from the closed-form conditional states.
pub fn entropy_minimization_scan(
    g: &GroundStateSolution,
    polar_points: usize,
    azimuth_points: usize,
    exec: Exec,
) -> Result<EntropyScan> {
    if polar_points < MIN_POLAR_POINTS || azimuth_points < MIN_AZIMUTH_POINTS {
        return domain(format!(
            "axis grid must be at least {MIN_POLAR_POINTS}x{MIN_AZIMUTH_POINTS}, got {polar_points}x{azimuth_points}"
        ));
    }
    let polar_step = PI / (polar_points - 1) as f64;
    let azimuth_step = TAU / azimuth_points as f64;
    let table = exec
        .map_range(polar_points * azimuth_points, |idx| {
            let mu = polar_step * (idx / azimuth_points) as f64;
            let nu = azimuth_step * (idx % azimuth_points) as f64;
            let r = [mu.sin() * nu.cos(), mu.sin() * nu.sin(), mu.cos()];
            let outcomes = [1, -1].map(|n| reduced_measured_closed(g, r, n));
            conditional_entropy(&outcomes).map(|value| AxisEntropy { mu, nu, value })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let argmin = *table
        .iter()
        .reduce(|best, e| if e.value < best.value { e } else { best })
        .expect("non-empty grid");
    Ok(EntropyScan { argmin, table, polar_step, azimuth_step })
}

/// Everything entering the second-law-like bound at the optimal measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoReport {
    pub h: f64,
    pub entropy_initial: f64,
    /// `S(ρ_B^m(n))` for `n = +1, -1`.
    pub entropy_measured: [f64; 2],
    pub probabilities: [f64; 2],
    pub i_qc: f64,
    pub temperature: EffectiveTemperature,
    /// `D(ρ_B^i‖σ_B)`.
    pub kl: f64,
    /// `𝓕(ρ_B^i; H_B) - F(σ_B)` from energies and entropies.
    pub free_energy_gap: f64,
    /// `(D + I_QC)/β_eff`.
    pub bound_rhs: f64,
    /// `ε_B + h (ln Z_eff - S(ρ_B^m))/ln√(λ₊/λ₋)`.
    pub bound_rhs_rearranged: f64,
    pub delta_e_bb_max: f64,
    /// `ε_B(1 - cos 2θ)` at the optimum.
    pub local_term: f64,
    /// `-h C_AB sin 2θ` at the optimum.
    pub correlation_term: f64,
    /// `√((ε_B/h)² + C_AB²)`.
    pub g_from_energy: f64,
    /// `(ln Z_eff - S(ρ_B^m))/ln√(λ₊/λ₋)`.
    pub g_from_entropy: f64,
    pub work: f64,
    pub internal_energy_change: f64,
    pub heat: f64,
}

impl ThermoReport {
    /// `|ΔE_{B,B}^max - (D + I_QC)/β_eff|`.
    pub fn equality_residual(&self) -> f64 {
        (self.delta_e_bb_max - self.bound_rhs).abs()
    }

    /// Both closed-form expressions for `g` against `√(1 - 16Z⁴(α-β)²)`.
    pub fn g_identity_residuals(&self) -> (f64, f64) {
        (
            (self.g_from_energy - self.temperature.g).abs(),
            (self.g_from_entropy - self.temperature.g).abs(),
        )
    }

    pub fn kl_identity_residual(&self) -> f64 {
        (self.free_energy_gap - self.kl / self.temperature.beta_eff).abs()
    }

    pub fn first_law_residual(&self) -> f64 {
        (self.work + self.heat - self.internal_energy_change).abs()
    }

    /// `S(σ_B) - Σ_n p_n S(ρ_B^m(n))`.
    pub fn entropy_match_residual(&self) -> Result<f64> {
        let s_sigma = self.temperature.sigma().entropy()?;
        let cond: f64 = self.probabilities.iter().zip(&self.entropy_measured).map(|(p, s)| p * s).sum();
        Ok((s_sigma - cond).abs())
    }
}

/// Evaluates the bound at `r⃗ = x̂` and compares it with `ΔE_{B,B}^max`.
pub fn second_law_bound(g: &GroundStateSolution) -> Result<ThermoReport> {
    let h = g.params.h;
    let temperature = effective_beta(g)?;
    let beta = temperature.beta_eff;
    let rho_i = reduced_initial(g);
    let measured = reduced_measured(g, &optimal_measurement());
    let mut entropy_measured = [0.0; 2];
    for (slot, m) in entropy_measured.iter_mut().zip(&measured) {
        let st = m.state.ok_or_else(|| QetError::Numeric("unreachable outcome at r = x".into()))?;
        *slot = st.entropy()?;
    }
    let probabilities = [measured[0].probability, measured[1].probability];
    let entropy_initial = rho_i.entropy()?;
    let i_qc = entropy_initial - conditional_entropy(&measured)?;
    let kl = kl_divergence(&rho_i, temperature.sigma_pops)?;

    let ge = energy_decomposition(g);
    let free_rho = ge.eps_b - entropy_initial / beta;
    let free_sigma = -temperature.z_eff.ln() / beta;
    let free_energy_gap = free_rho - free_sigma;

    let log_ratio = (temperature.lambda_plus / temperature.lambda_minus).sqrt().ln();
    let g_from_entropy = (temperature.z_eff.ln() - entropy_measured[0]) / log_ratio;
    let c = CorrelatorSet::closed_form(g);
    let g_from_energy = ((ge.eps_b / h).powi(2) + c.c_ab * c.c_ab).sqrt();

    let cert = max_local_reduction(g);
    let local_term = ge.eps_b * (1.0 - cert.cos_2theta);
    let correlation_term = -h * c.c_ab * cert.sin_2theta;
    Ok(ThermoReport {
        h,
        entropy_initial,
        entropy_measured,
        probabilities,
        i_qc,
        temperature,
        kl,
        free_energy_gap,
        bound_rhs: (kl + i_qc) / beta,
        bound_rhs_rearranged: ge.eps_b + h * g_from_entropy,
        delta_e_bb_max: cert.value,
        local_term,
        correlation_term,
        g_from_energy,
        g_from_entropy,
        work: cert.ledger.work(),
        internal_energy_change: cert.ledger.internal_energy_change(),
        heat: cert.ledger.heat,
    })
}

/// One row of the thermodynamics-vs-field table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundRow {
    pub h: f64,
    pub delta_e_bb_max: f64,
    pub local_term: f64,
    pub correlation_term: f64,
    pub kl_over_beta: f64,
    pub iqc_over_beta: f64,
    pub residual: f64,
}

impl BoundRow {
    pub const HEADER: [&'static str; 7] =
        ["h", "dE_BB_max", "eps_B_1mcos2th", "mhC_AB_sin2th", "D_over_beta", "IQC_over_beta", "residual"];

    pub fn values(&self) -> [f64; 7] {
        [
            self.h,
            self.delta_e_bb_max,
            self.local_term,
            self.correlation_term,
            self.kl_over_beta,
            self.iqc_over_beta,
            self.residual,
        ]
    }
}

impl From<&ThermoReport> for BoundRow {
    fn from(r: &ThermoReport) -> Self {
        Self {
            h: r.h,
            delta_e_bb_max: r.delta_e_bb_max,
            local_term: r.local_term,
            correlation_term: r.correlation_term,
            kl_over_beta: r.kl / r.temperature.beta_eff,
            iqc_over_beta: r.i_qc / r.temperature.beta_eff,
            residual: r.equality_residual(),
        }
    }
}

/// `h = 0` is rejected: the effective temperature is undefined there.
pub fn sweep_figure4(k: f64, h_grid: &[f64], exec: Exec) -> Result<Vec<BoundRow>> {
    check_grid(h_grid)?;
    if h_grid.iter().any(|&h| h <= 0.0) {
        return domain("thermodynamic sweep needs h > 0");
    }
    exec.map(h_grid, |&h| {
        let g = solve_ground_state_analytic(&ModelParams::new(h, k)?)?;
        Ok(BoundRow::from(&second_law_bound(&g)?))
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gs(h: f64) -> GroundStateSolution {
        solve_ground_state_analytic(&ModelParams::new(h, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn initial_state_routes_agree() {
        for h in [0.0, 0.5, 1.0, 3.0] {
            let g = gs(h);
            let rho = reduced_initial(&g);
            assert!(rho.max_deviation(&reduced_initial_closed(&g)) < 1e-12);
            assert!(rho.validity_residual() < 1e-12);
        }
        let rho = reduced_initial(&gs(0.0));
        assert!((rho.rho[(0, 0)].re - 0.5).abs() < 1e-12);
        assert!((rho.entropy().unwrap() - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn measured_state_routes_agree() {
        let g = gs(0.6);
        for pp in [
            ProtocolParams::new(1.2, 0.7, 0.0, 0.0, 0.0),
            ProtocolParams::new(0.3, 4.0, 0.0, 0.0, 0.0),
            ProtocolParams::new(std::f64::consts::FRAC_PI_2, 0.0, 0.0, 0.0, 0.0),
        ] {
            let direct = reduced_measured(&g, &pp);
            for (i, n) in [1, -1].into_iter().enumerate() {
                let closed = reduced_measured_closed(&g, pp.r(), n);
                assert!((closed.probability - direct[i].probability).abs() < 1e-12);
                let dev = closed.state.unwrap().max_deviation(&direct[i].state.unwrap());
                assert!(dev < 1e-12, "n={n}: {dev}");
            }
        }
    }

    #[test]
    fn x_measurement_spectrum_is_outcome_independent() {
        let g = gs(0.4);
        let t = effective_beta(&g).unwrap();
        for m in reduced_measured(&g, &optimal_measurement()) {
            assert!((m.probability - 0.5).abs() < 1e-12);
            let (lp, lm) = m.state.unwrap().eigenvalues();
            assert!((lp - t.lambda_plus).abs() < 1e-12 && (lm - t.lambda_minus).abs() < 1e-12);
        }
        let pure = reduced_measured(&gs(0.0), &optimal_measurement());
        assert!(pure[0].state.unwrap().entropy().unwrap().abs() < 1e-10);
        assert!((qc_mutual_information(&gs(0.0), &optimal_measurement()).unwrap() - 2f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn effective_temperature() {
        let g = gs(0.5);
        let t = effective_beta(&g).unwrap();
        assert!(t.beta_eff > 0.0);
        let (lp, lm) = t.sigma().eigenvalues();
        assert!((lp - t.lambda_plus).abs() < 1e-12 && (lm - t.lambda_minus).abs() < 1e-12);
        assert!(matches!(effective_beta(&gs(0.0)), Err(QetError::Singular(_))));
    }

    #[test]
    fn bound_is_saturated() {
        for h in [0.05, 0.3, 1.0, 3.0] {
            let r = second_law_bound(&gs(h)).unwrap();
            assert!(r.equality_residual() < 1e-10, "h={h}: {}", r.equality_residual());
            let (a, b) = r.g_identity_residuals();
            assert!(a < 1e-10 && b < 1e-10);
            assert!(r.kl_identity_residual() < 1e-10);
            assert!((r.bound_rhs_rearranged - r.bound_rhs).abs() < 1e-10);
            assert!(r.first_law_residual() < 1e-12);
            assert!(r.entropy_match_residual().unwrap() < 1e-12);
            assert!(r.i_qc >= 0.0 && r.kl >= 0.0);
            assert!(r.local_term < 0.0);
            assert!(r.correlation_term >= r.delta_e_bb_max);
        }
    }

    #[test]
    fn entropy_scan_finds_x_axis() {
        let g = gs(0.5);
        let scan = entropy_minimization_scan(&g, 64, 128, Exec::default()).unwrap();
        assert!(scan.minimum_is_x_axis(), "{:?}", scan.argmin);
        let s_sigma = effective_beta(&g).unwrap().sigma().entropy().unwrap();
        assert!(scan.argmin.value >= s_sigma - 1e-12);
        assert!(scan.argmin.value - s_sigma < 1e-3);
        let z = conditional_entropy(&[1, -1].map(|n| reduced_measured_closed(&g, [0.0, 0.0, 1.0], n))).unwrap();
        assert!(z > s_sigma + 1e-6);
        assert!(entropy_minimization_scan(&g, 32, 128, Exec::Sequential).is_err());
    }

    #[test]
    fn sweep_rejects_zero_field() {
        assert!(sweep_figure4(1.0, &[0.0, 0.1], Exec::Sequential).is_err());
        let rows = sweep_figure4(1.0, &[0.1, 0.2], Exec::Sequential).unwrap();
        assert_eq!(rows.len(), 2);
    }
}
