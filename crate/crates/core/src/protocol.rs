//! The QET round: Alice measures spin `A` along `r⃗`, sends the outcome
//! `n = ±1`, and Bob applies `U_B(n) = exp(i n θ s⃗·σ⃗_B)` to spin `B`.
//!
//! Every quantity is evaluated twice: directly from 16x16 matrix elements,
//! and from the closed forms in terms of the ground-state energies and the
//! correlators `C_AB`, `D_AB`, `C_AR`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;

use crate::error::{domain, Result};
use crate::model::{
    build_hamiltonian, energy_decomposition, sigma, Axis, GroundEnergies, GroundStateSolution,
    Site, DIM,
};
use crate::operator::{DenseOperator, State};

/// Outcomes below this probability are treated as unreachable in the
/// conditional-state form.
pub const MIN_OUTCOME_PROBABILITY: f64 = 1e-14;

/// Measurement axis `r⃗(μ, ν)`, feedback axis `s⃗(ξ, η)` and feedback angle `θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolParams {
    pub mu: f64,
    pub nu: f64,
    pub xi: f64,
    pub eta: f64,
    pub theta: f64,
}

fn spherical(polar: f64, azimuth: f64) -> [f64; 3] {
    [polar.sin() * azimuth.cos(), polar.sin() * azimuth.sin(), polar.cos()]
}

fn angles_of(v: [f64; 3]) -> Result<(f64, f64)> {
    let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return domain("axis vector must be non-zero and finite");
    }
    let polar = (v[2] / norm).clamp(-1.0, 1.0).acos();
    let azimuth = v[1].atan2(v[0]).rem_euclid(TAU);
    Ok((polar, azimuth))
}

impl ProtocolParams {
    pub fn new(mu: f64, nu: f64, xi: f64, eta: f64, theta: f64) -> Self {
        Self { mu, nu, xi, eta, theta }
    }

    /// Builds parameters from (not necessarily normalized) axis vectors.
    pub fn from_axes(r: [f64; 3], s: [f64; 3], theta: f64) -> Result<Self> {
        let (mu, nu) = angles_of(r)?;
        let (xi, eta) = angles_of(s)?;
        Ok(Self { mu, nu, xi, eta, theta })
    }

    /// Alice's measurement axis.
    pub fn r(&self) -> [f64; 3] {
        spherical(self.mu, self.nu)
    }

    /// Bob's rotation axis.
    pub fn s(&self) -> [f64; 3] {
        spherical(self.xi, self.eta)
    }

    /// Same physical protocol with `μ, ξ ∈ [0, π]`, `ν, η ∈ [0, 2π)` and
    /// `θ ∈ (-π/2, π/2]` (`θ → θ + π` only flips the sign of `U_B`).
    pub fn canonical(&self) -> Self {
        let (mu, nu) = angles_of(self.r()).expect("unit vector");
        let (xi, eta) = angles_of(self.s()).expect("unit vector");
        let mut theta = self.theta.rem_euclid(PI);
        if theta > FRAC_PI_2 {
            theta -= PI;
        }
        Self { mu, nu, xi, eta, theta }
    }
}

fn outcome(n: i32) -> Result<f64> {
    match n {
        1 => Ok(1.0),
        -1 => Ok(-1.0),
        _ => domain(format!("measurement outcome must be ±1, got {n}")),
    }
}

fn axis_dot_sigma(site: Site, v: [f64; 3]) -> DenseOperator {
    let terms = [
        &sigma(site, Axis::X) * v[0],
        &sigma(site, Axis::Y) * v[1],
        &sigma(site, Axis::Z) * v[2],
    ];
    &(&terms[0] + &terms[1]) + &terms[2]
}

/// `P_A(n) = (I + n r⃗·σ⃗_A)/2`.
pub fn projector(pp: &ProtocolParams, n: i32) -> Result<DenseOperator> {
    let n = outcome(n)?;
    let id = DenseOperator::identity(DIM);
    Ok(&(&id + &(&axis_dot_sigma(Site::A, pp.r()) * n)) * 0.5)
}

/// `U_B(n) = cos θ I + i n sin θ s⃗·σ⃗_B`.
pub fn feedback_unitary(pp: &ProtocolParams, n: i32) -> Result<DenseOperator> {
    let n = outcome(n)?;
    let id = DenseOperator::identity(DIM);
    let rot = &axis_dot_sigma(Site::B, pp.s()) * Complex64::new(0.0, n * pp.theta.sin());
    Ok(&(&id * pp.theta.cos()) + &rot)
}

/// A post-measurement branch. `state` is `None` when the outcome is
/// unreachable (`p < MIN_OUTCOME_PROBABILITY`).
#[derive(Debug, Clone)]
pub struct Branch {
    pub n: i32,
    pub probability: f64,
    pub state: Option<State>,
}

/// Conditional states `|ψ_A(n)⟩ = P_A(n)|ψ⟩ / √p_n` for `n = +1, -1`.
pub fn measurement_branches(g: &GroundStateSolution, pp: &ProtocolParams) -> [Branch; 2] {
    [1, -1].map(|n| {
        let phi = projector(pp, n).expect("valid outcome").apply(&g.vector);
        let probability = phi.norm_squared();
        let state = (probability >= MIN_OUTCOME_PROBABILITY)
            .then(|| phi / Complex64::new(probability.sqrt(), 0.0));
        Branch { n, probability, state }
    })
}

/// Energy after Alice's measurement, by three routes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementEnergy {
    /// `Σ_n ⟨ψ|P_A(n) H P_A(n)|ψ⟩`.
    pub e_a: f64,
    /// `Σ_n p_n ⟨ψ_A(n)|H|ψ_A(n)⟩` over reachable outcomes.
    pub e_a_conditional: f64,
    /// `r_z² ε_A + r_x² ε_L + ε_C + ε_R + ε_B`.
    pub e_a_closed: f64,
    pub delta_e_a: f64,
    /// `(r_z² - 1) ε_A + (r_x² - 1) ε_L`.
    pub delta_e_a_closed: f64,
}

pub fn measurement_energy(g: &GroundStateSolution, pp: &ProtocolParams) -> MeasurementEnergy {
    let h = build_hamiltonian(&g.params).total;
    let e_a: f64 = [1, -1]
        .iter()
        .map(|&n| {
            let p = projector(pp, n).expect("valid outcome");
            (&(&p * &h) * &p).expectation(&g.vector).re
        })
        .sum();
    let e_a_conditional = measurement_branches(g, pp)
        .iter()
        .filter_map(|b| b.state.as_ref().map(|s| b.probability * h.expectation(s).re))
        .sum();
    let ge = energy_decomposition(g);
    let [rx, _, rz] = pp.r();
    let e_a_closed = rz * rz * ge.eps_a + rx * rx * ge.eps_l + ge.eps_c + ge.eps_r + ge.eps_b;
    MeasurementEnergy {
        e_a,
        e_a_conditional,
        e_a_closed,
        delta_e_a: e_a - g.epsilon,
        delta_e_a_closed: (rz * rz - 1.0) * ge.eps_a + (rx * rx - 1.0) * ge.eps_l,
    }
}

/// Full energy bookkeeping of one protocol round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyLedger {
    pub ground: GroundEnergies,
    pub e_a: f64,
    /// Energy injected by the measurement, `E_A - ε`.
    pub delta_e_a: f64,
    pub e_b: f64,
    /// Energy extracted by Bob, `E_A - E_B`.
    pub delta_e_b: f64,
    /// Reduction of Bob's local energy `⟨H_B⟩`.
    pub delta_e_bb: f64,
    /// Reduction of the bond energy `⟨H_R⟩`.
    pub delta_e_br: f64,
    /// Heat absorbed by Bob's local system, `Q = ΔE_{B,R}`.
    pub heat: f64,
}

impl EnergyLedger {
    /// Work done on Bob's local system, `W = -ΔE_B`.
    pub fn work(&self) -> f64 {
        -self.delta_e_b
    }

    /// Internal-energy change of Bob's local system, `ΔU = -ΔE_{B,B}`.
    pub fn internal_energy_change(&self) -> f64 {
        -self.delta_e_bb
    }

    /// `|W + Q - ΔU|`.
    pub fn first_law_residual(&self) -> f64 {
        (self.work() + self.heat - self.internal_energy_change()).abs()
    }
}

/// `Σ_n ⟨ψ|P_A(n) U_B(n)† X U_B(n)|ψ⟩` with `units[n]` the unitary used for outcome `n`.
fn conditioned_expectation(
    g: &GroundStateSolution,
    pp: &ProtocolParams,
    op: &DenseOperator,
    unitary_for: impl Fn(i32) -> DenseOperator,
) -> f64 {
    [1, -1]
        .iter()
        .map(|&n| {
            let p = projector(pp, n).expect("valid outcome");
            let u = unitary_for(n);
            (&(&(&p * &u.adjoint()) * op) * &u).expectation(&g.vector).re
        })
        .sum()
}

/// Evaluates the round by direct matrix algebra.
pub fn feedback_energy(g: &GroundStateSolution, pp: &ProtocolParams) -> EnergyLedger {
    let ham = build_hamiltonian(&g.params);
    let ground = energy_decomposition(g);
    let m = measurement_energy(g, pp);
    let unitary = |n| feedback_unitary(pp, n).expect("valid outcome");
    let e_b: f64 = [1, -1]
        .iter()
        .map(|&n| {
            let p = projector(pp, n).expect("valid outcome");
            let u = unitary(n);
            let pu = &u * &p;
            (&(&pu.adjoint() * &ham.total) * &pu).expectation(&g.vector).re
        })
        .sum();
    let eps_b = g.expect(&ham.h_b);
    let eps_r = g.expect(&ham.h_r);
    let delta_e_bb = eps_b - conditioned_expectation(g, pp, &ham.h_b, unitary);
    let delta_e_br = eps_r - conditioned_expectation(g, pp, &ham.h_r, unitary);
    EnergyLedger {
        ground,
        e_a: m.e_a,
        delta_e_a: m.delta_e_a,
        e_b,
        delta_e_b: m.e_a - e_b,
        delta_e_bb,
        delta_e_br,
        heat: delta_e_br,
    }
}

/// `ΔE_{B,B}` and `ΔE_{B,R}` from the closed forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedbackClosedForm {
    pub delta_e_bb: f64,
    pub delta_e_br: f64,
}

impl FeedbackClosedForm {
    pub fn delta_e_b(&self) -> f64 {
        self.delta_e_bb + self.delta_e_br
    }
}

pub fn feedback_energy_closed_form(g: &GroundStateSolution, pp: &ProtocolParams) -> FeedbackClosedForm {
    let (h, k) = (g.params.h, g.params.k);
    let ge = energy_decomposition(g);
    let c = CorrelatorSet::closed_form(g);
    let [rx, ry, _] = pp.r();
    let [sx, sy, sz] = pp.s();
    let (s2, c2) = (2.0 * pp.theta).sin_cos();
    FeedbackClosedForm {
        delta_e_bb: ge.eps_b * (1.0 - sz * sz) * (1.0 - c2)
            - h * (rx * sy * c.c_ab - ry * sx * c.d_ab) * s2,
        delta_e_br: ge.eps_r * (1.0 - sx * sx) * (1.0 - c2) + k * rx * sy * c.c_ar * s2,
    }
}

/// Energy changes when Bob ignores the outcome and always applies
/// `u_B = U_B(fixed_n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoFeedbackEnergy {
    pub delta_e_bb: f64,
    pub delta_e_br: f64,
    /// `ε_B (1 - s_z²)(1 - cos 2θ)`.
    pub delta_e_bb_closed: f64,
    /// `ε_R (1 - s_x²)(1 - cos 2θ)`.
    pub delta_e_br_closed: f64,
}

pub fn no_feedback_energy(
    g: &GroundStateSolution,
    pp: &ProtocolParams,
    fixed_n: i32,
) -> Result<NoFeedbackEnergy> {
    let u = feedback_unitary(pp, fixed_n)?;
    let ham = build_hamiltonian(&g.params);
    let ge = energy_decomposition(g);
    let eps_b = g.expect(&ham.h_b);
    let eps_r = g.expect(&ham.h_r);
    let [sx, _, sz] = pp.s();
    let one_minus_c2 = 1.0 - (2.0 * pp.theta).cos();
    Ok(NoFeedbackEnergy {
        delta_e_bb: eps_b - conditioned_expectation(g, pp, &ham.h_b, |_| u.clone()),
        delta_e_br: eps_r - conditioned_expectation(g, pp, &ham.h_r, |_| u.clone()),
        delta_e_bb_closed: ge.eps_b * (1.0 - sz * sz) * one_minus_c2,
        delta_e_br_closed: ge.eps_r * (1.0 - sx * sx) * one_minus_c2,
    })
}

/// Nonlocal ground-state correlators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelatorSet {
    /// `⟨σ_A^x σ_B^x⟩`.
    pub c_ab: f64,
    /// `⟨σ_A^y σ_B^y⟩`.
    pub d_ab: f64,
    /// `⟨σ_A^x σ_C2^x σ_B^z⟩`.
    pub c_ar: f64,
}

impl CorrelatorSet {
    /// `4Z²(1+αβ)`, `4Z²(1-αβ)`, `4Z²(α-β)`.
    pub fn closed_form(g: &GroundStateSolution) -> Self {
        let z2 = g.z * g.z;
        let ab = g.alpha * g.beta;
        Self {
            c_ab: 4.0 * z2 * (1.0 + ab),
            d_ab: 4.0 * z2 * (1.0 - ab),
            c_ar: 4.0 * z2 * (g.alpha - g.beta),
        }
    }

    pub fn max_deviation(&self, other: &Self) -> f64 {
        (self.c_ab - other.c_ab)
            .abs()
            .max((self.d_ab - other.d_ab).abs())
            .max((self.c_ar - other.c_ar).abs())
    }

    /// `|k C_AR - h C_AB + h D_AB|`.
    pub fn ccd_residual(&self, h: f64, k: f64) -> f64 {
        (k * self.c_ar - h * self.c_ab + h * self.d_ab).abs()
    }
}

/// Correlators from matrix elements of the ground-state vector.
pub fn correlators(g: &GroundStateSolution) -> CorrelatorSet {
    use Axis::*;
    use Site::*;
    CorrelatorSet {
        c_ab: g.expect(&(&sigma(A, X) * &sigma(B, X))),
        d_ab: g.expect(&(&sigma(A, Y) * &sigma(B, Y))),
        c_ar: g.expect(&(&(&sigma(A, X) * &sigma(C2, X)) * &sigma(B, Z))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{solve_ground_state_analytic, ModelParams};

    fn gs(h: f64) -> GroundStateSolution {
        solve_ground_state_analytic(&ModelParams::new(h, 1.0).unwrap()).unwrap()
    }

    fn sample() -> ProtocolParams {
        ProtocolParams::new(1.1, 0.4, 2.0, 5.1, 0.37)
    }

    #[test]
    fn outcome_domain() {
        assert!(projector(&sample(), 0).is_err());
        assert!(feedback_unitary(&sample(), 2).is_err());
        assert!(no_feedback_energy(&gs(0.3), &sample(), 3).is_err());
    }

    #[test]
    fn projectors_are_complete_orthogonal_idempotents() {
        let pp = sample();
        let (p, m) = (projector(&pp, 1).unwrap(), projector(&pp, -1).unwrap());
        let id = DenseOperator::identity(DIM);
        assert!((&p * &p).distance(&p) < 1e-12);
        assert!((&p + &m).distance(&id) < 1e-12);
        assert!((&p * &m).norm() < 1e-12);
        let z = ProtocolParams::new(0.0, 0.0, 0.0, 0.0, 0.0);
        let pz = projector(&z, 1).unwrap();
        let expect = &(&id + &sigma(Site::A, Axis::Z)) * 0.5;
        assert!(pz.distance(&expect) < 1e-12);
    }

    #[test]
    fn outcome_probabilities_sum_to_one() {
        let g = gs(0.6);
        let total: f64 = measurement_branches(&g, &sample()).iter().map(|b| b.probability).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn feedback_unitary_properties() {
        let id = DenseOperator::identity(DIM);
        let pp = sample();
        let (u, v) = (feedback_unitary(&pp, 1).unwrap(), feedback_unitary(&pp, -1).unwrap());
        assert!((&u.adjoint() * &u).distance(&id) < 1e-12);
        assert!((&u * &v).distance(&id) < 1e-12);
        let still = ProtocolParams { theta: 0.0, ..pp };
        assert!(feedback_unitary(&still, 1).unwrap().distance(&id) < 1e-15);
    }

    #[test]
    fn quarter_turn_about_y_rotates_sigma_z() {
        // U = cos θ + i sin θ σ^y with θ = π/4 maps ⟨σ^z⟩ = -1 on |e⟩ to 0
        // and produces ⟨σ^x⟩ = ±1; checked on the 2x2 block directly.
        let pp = ProtocolParams::new(0.0, 0.0, FRAC_PI_2, FRAC_PI_2, std::f64::consts::FRAC_PI_4);
        let u = feedback_unitary(&pp, 1).unwrap();
        let vac = crate::model::basis_state(0);
        let rotated = u.apply(&vac);
        assert!(sigma(Site::B, Axis::Z).expectation(&rotated).re.abs() < 1e-12);
        assert!((sigma(Site::B, Axis::X).expectation(&rotated).re.abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn measurement_energy_routes_agree() {
        let g = gs(0.45);
        for pp in [sample(), ProtocolParams::new(0.0, 0.0, 0.0, 0.0, 0.0)] {
            let m = measurement_energy(&g, &pp);
            assert!((m.e_a - m.e_a_closed).abs() < 1e-12);
            assert!((m.e_a - m.e_a_conditional).abs() < 1e-12);
            assert!((m.delta_e_a - m.delta_e_a_closed).abs() < 1e-12);
            assert!(m.delta_e_a >= -1e-12);
        }
        // r along z: only the L bond is broken
        let ge = energy_decomposition(&g);
        let m = measurement_energy(&g, &ProtocolParams::new(0.0, 0.0, 0.0, 0.0, 0.0));
        assert!((m.delta_e_a + ge.eps_l).abs() < 1e-12);
        let m = measurement_energy(&g, &ProtocolParams::new(FRAC_PI_2, FRAC_PI_2, 0.0, 0.0, 0.0));
        assert!((m.delta_e_a + ge.eps_a + ge.eps_l).abs() < 1e-12);
    }

    #[test]
    fn feedback_routes_agree_and_sum() {
        let g = gs(0.8);
        let pp = sample();
        let led = feedback_energy(&g, &pp);
        let cf = feedback_energy_closed_form(&g, &pp);
        assert!((led.delta_e_bb - cf.delta_e_bb).abs() < 1e-12);
        assert!((led.delta_e_br - cf.delta_e_br).abs() < 1e-12);
        assert!((led.delta_e_b - led.delta_e_bb - led.delta_e_br).abs() < 1e-12);
        assert!(led.first_law_residual() < 1e-12);
    }

    #[test]
    fn identity_and_half_turn_feedback() {
        let g = gs(0.8);
        let led = feedback_energy(&g, &ProtocolParams { theta: 0.0, ..sample() });
        assert!(led.delta_e_b.abs() < 1e-12 && led.delta_e_bb.abs() < 1e-12 && led.delta_e_br.abs() < 1e-12);
        let pp = ProtocolParams { theta: FRAC_PI_2, ..sample() };
        let led = feedback_energy(&g, &pp);
        let sz = pp.s()[2];
        assert!((led.delta_e_bb - 2.0 * led.ground.eps_b * (1.0 - sz * sz)).abs() < 1e-12);
        assert!(led.delta_e_bb <= 1e-15);
    }

    #[test]
    fn no_feedback_has_no_correlator_terms() {
        let g = gs(0.5);
        let pp = sample();
        let a = no_feedback_energy(&g, &pp, 1).unwrap();
        let b = no_feedback_energy(&g, &pp, -1).unwrap();
        assert!((a.delta_e_bb - a.delta_e_bb_closed).abs() < 1e-12);
        assert!((a.delta_e_br - a.delta_e_br_closed).abs() < 1e-12);
        assert!((a.delta_e_bb - b.delta_e_bb).abs() < 1e-12);
        assert!((a.delta_e_br - b.delta_e_br).abs() < 1e-12);
        assert!(a.delta_e_bb <= 1e-15 && a.delta_e_br <= 1e-15);
    }

    #[test]
    fn correlators_match_closed_form() {
        for h in [0.0, 0.2, 1.0, 3.0] {
            let g = gs(h);
            let c = correlators(&g);
            assert!(c.max_deviation(&CorrelatorSet::closed_form(&g)) < 1e-12);
            assert!(c.ccd_residual(h, 1.0) < 1e-12);
            assert!(c.c_ab.abs() > c.d_ab.abs());
        }
        let c0 = correlators(&gs(0.0));
        assert!((c0.c_ab - 1.0).abs() < 1e-12);
        assert!(c0.c_ar.abs() < 1e-12);
        assert!((c0.d_ab + 1.0 / 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn canonical_angles() {
        let pp = ProtocolParams::new(-0.3, 7.0, 4.0, -1.0, 2.0).canonical();
        assert!((0.0..=PI).contains(&pp.mu) && (0.0..=PI).contains(&pp.xi));
        assert!((0.0..TAU).contains(&pp.nu) && (0.0..TAU).contains(&pp.eta));
        assert!(pp.theta > -FRAC_PI_2 && pp.theta <= FRAC_PI_2);
        let raw = ProtocolParams::new(-0.3, 7.0, 4.0, -1.0, 2.0);
        let g = gs(0.4);
        let (a, b) = (feedback_energy(&g, &raw), feedback_energy(&g, &pp));
        assert!((a.delta_e_b - b.delta_e_b).abs() < 1e-12);
    }
}
