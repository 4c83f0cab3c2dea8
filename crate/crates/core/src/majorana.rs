//! Jordan–Wigner fermions and Majorana operators on the four-site system.

use crate::error::{domain, Result};
use crate::model::{
    build_hamiltonian, build_symmetries, sigma, Axis, GroundStateSolution, ModelParams, Site, DIM,
    N_SITES,
};
use crate::operator::{DenseOperator, State, I, ONE, ZERO};
use crate::protocol::CorrelatorSet;

/// Fermion modes and their Majorana components, indexed by site (A, C1, C2, B).
#[derive(Debug, Clone)]
pub struct MajoranaOps {
    /// Annihilators `f_i = Θ_i σ_i^-`.
    pub f: [DenseOperator; N_SITES],
    /// String operators `Θ_i = Π_{l<i} (-σ_l^z)`.
    pub strings: [DenseOperator; N_SITES],
    pub b: [DenseOperator; N_SITES],
    pub c: [DenseOperator; N_SITES],
}

fn string_operator(i: usize) -> DenseOperator {
    Site::ALL[..i]
        .iter()
        .fold(DenseOperator::identity(DIM), |acc, &s| &acc * &(-&sigma(s, Axis::Z)))
}

/// Sites A and C2 take `b = f† + f`, `c = i(f† - f)`; C1 and B swap the roles.
pub fn build_majorana_ops() -> MajoranaOps {
    // |e⟩⟨f| lowers the occupied state f to e
    let lower = DenseOperator::single_site([[ZERO, ONE], [ZERO, ZERO]]);
    let strings: [DenseOperator; N_SITES] = std::array::from_fn(string_operator);
    let f: [DenseOperator; N_SITES] =
        std::array::from_fn(|i| &strings[i] * &crate::model::embed(Site::ALL[i], &lower));
    let re: [DenseOperator; N_SITES] = std::array::from_fn(|i| &f[i].adjoint() + &f[i]);
    let im: [DenseOperator; N_SITES] = std::array::from_fn(|i| (&f[i].adjoint() - &f[i]).scale(I));
    let (mut b, mut c) = (re.clone(), im.clone());
    for i in [1, 3] {
        b[i] = im[i].clone();
        c[i] = re[i].clone();
    }
    MajoranaOps { f, strings, b, c }
}

impl MajoranaOps {
    /// All eight Majorana operators, `b` first.
    pub fn all(&self) -> Vec<&DenseOperator> {
        self.b.iter().chain(self.c.iter()).collect()
    }

    /// Largest `‖{γ_i, γ_j} - 2δ_ij‖` over all pairs.
    pub fn clifford_residual(&self) -> f64 {
        let id = DenseOperator::identity(DIM);
        let ops = self.all();
        let mut worst: f64 = 0.0;
        for (i, a) in ops.iter().enumerate() {
            for (j, b) in ops.iter().enumerate() {
                let target = if i == j { id.scale(2.0 * ONE) } else { DenseOperator::zeros(DIM) };
                worst = worst.max(a.anticommutator(b).distance(&target));
            }
        }
        worst
    }

    /// `{f_i, f_j†} = δ_ij`, `{f_i, f_j} = 0`.
    pub fn fermion_residual(&self) -> f64 {
        let id = DenseOperator::identity(DIM);
        let mut worst: f64 = 0.0;
        for i in 0..N_SITES {
            for j in 0..N_SITES {
                let target = if i == j { id.clone() } else { DenseOperator::zeros(DIM) };
                worst = worst
                    .max(self.f[i].anticommutator(&self.f[j].adjoint()).distance(&target))
                    .max(self.f[i].anticommutator(&self.f[j]).norm());
            }
        }
        worst
    }

    /// `ih b_A c_A - ik(c_A c_C1 - c_C1 c_C2 + c_C2 c_B) + ih c_B b_B`.
    pub fn hamiltonian(&self, p: &ModelParams) -> DenseOperator {
        let (b, c) = (&self.b, &self.c);
        let ih = I * p.h;
        let ik = I * p.k;
        let bulk = &(&(&c[0] * &c[1]) - &(&c[1] * &c[2])) + &(&c[2] * &c[3]);
        let edges = &(&b[0] * &c[0]) + &(&c[3] * &b[3]);
        &edges.scale(ih) - &bulk.scale(ik)
    }

    /// Operator-level spin/Majorana identities with their residuals.
    pub fn spin_identities(&self) -> Vec<(&'static str, f64)> {
        use Axis::*;
        use Site::*;
        let parity = build_symmetries().p;
        let (b, c) = (&self.b, &self.c);
        let xx = &sigma(A, X) * &sigma(B, X);
        let yy = &sigma(A, Y) * &sigma(B, Y);
        let xxz = &(&sigma(A, X) * &sigma(C2, X)) * &sigma(B, Z);
        vec![
            ("i b_A b_B = -σ_A^x σ_B^x P", (&b[0] * &b[3]).scale(I).distance(&-&(&xx * &parity))),
            ("i c_A c_B P = σ_A^y σ_B^y", (&(&c[0] * &c[3]) * &parity).scale(I).distance(&yy)),
            (
                "i b_A c_C2 P = σ_A^x σ_C2^x σ_B^z",
                (&(&b[0] * &c[2]) * &parity).scale(I).distance(&xxz),
            ),
            ("Θ_0 = I", self.strings[0].distance(&DenseOperator::identity(DIM))),
        ]
    }
}

/// `‖H_spin - H_Majorana‖`.
pub fn verify_majorana_hamiltonian(p: &ModelParams) -> f64 {
    build_hamiltonian(p).total.distance(&build_majorana_ops().hamiltonian(p))
}

/// `‖[H, γ]‖` for each `b` operator, in site order.
pub fn b_mode_commutators(p: &ModelParams) -> [f64; N_SITES] {
    let h = build_hamiltonian(p).total;
    let ops = build_majorana_ops();
    std::array::from_fn(|i| h.commutator(&ops.b[i]).norm())
}

/// Edge Majorana correlators of a parity eigenstate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MajoranaCorrelators {
    /// `⟨i b_A b_B⟩`.
    pub bb: f64,
    /// `⟨i c_A c_B⟩`.
    pub cc: f64,
    /// `⟨i b_A c_C2⟩`.
    pub bc: f64,
    /// Parity eigenvalue of the state.
    pub parity: f64,
}

const PARITY_TOL: f64 = 1e-10;

pub fn majorana_correlators_of(state: &State) -> Result<MajoranaCorrelators> {
    let norm = state.norm();
    if norm == 0.0 {
        return domain("zero state");
    }
    let psi = state / ONE.scale(norm);
    let parity = build_symmetries().p.expectation(&psi).re;
    if (parity.abs() - 1.0).abs() > PARITY_TOL {
        return domain(format!("state is not a parity eigenstate (⟨P⟩ = {parity})"));
    }
    let ops = build_majorana_ops();
    let corr = |a: &DenseOperator, b: &DenseOperator| (a * b).scale(I).expectation(&psi).re;
    Ok(MajoranaCorrelators {
        bb: corr(&ops.b[0], &ops.b[3]),
        cc: corr(&ops.c[0], &ops.c[3]),
        bc: corr(&ops.b[0], &ops.c[2]),
        parity: parity.signum(),
    })
}

/// For the even ground state: `⟨ib_Ab_B⟩ = -C_AB`, `⟨ic_Ac_B⟩ = D_AB`,
/// `⟨ib_Ac_C2⟩ = C_AR`.
pub fn majorana_correlators(g: &GroundStateSolution) -> Result<MajoranaCorrelators> {
    majorana_correlators_of(&g.vector)
}

impl MajoranaCorrelators {
    /// Largest deviation from the spin correlators of an even state.
    pub fn deviation_from(&self, c: &CorrelatorSet) -> f64 {
        (self.bb + c.c_ab).abs().max((self.cc - c.d_ab).abs()).max((self.bc - c.c_ar).abs())
    }
}

/// One of the four degenerate zero-field ground states `|p, r⟩`.
#[derive(Debug, Clone)]
pub struct SectorRow {
    pub label: &'static str,
    pub p: i32,
    pub r: i32,
    pub state: State,
    pub energy_residual: f64,
    pub parity: f64,
    pub r_parity: f64,
    pub correlators: MajoranaCorrelators,
}

impl SectorRow {
    /// `|⟨ib_Ab_B⟩ + p r C_AB|` and `|⟨ic_Ac_B⟩ - D_AB|`.
    pub fn residuals(&self, c: &CorrelatorSet) -> (f64, f64) {
        let pr = f64::from(self.p * self.r);
        ((self.correlators.bb + pr * c.c_ab).abs(), (self.correlators.cc - c.d_ab).abs())
    }
}

/// `|+,+⟩ = |ψ⟩`, `|+,-⟩ = Qσ_A^x|ψ⟩`, `|-,+⟩ = b_A|ψ⟩`, `|-,-⟩ = Q|ψ⟩`.
pub fn degenerate_sector_table(g: &GroundStateSolution) -> Result<Vec<SectorRow>> {
    if g.params.h != 0.0 {
        return domain(format!("sector table needs h = 0, got h = {}", g.params.h));
    }
    let sym = build_symmetries();
    let ops = build_majorana_ops();
    let ham = build_hamiltonian(&g.params).total;
    let psi = &g.vector;
    let q_sx = &sym.q * &sigma(Site::A, Axis::X);
    let entries = [
        ("|+,+>", 1, 1, psi.clone()),
        ("|+,->", 1, -1, q_sx.apply(psi)),
        ("|-,+>", -1, 1, ops.b[0].apply(psi)),
        ("|-,->", -1, -1, sym.q.apply(psi)),
    ];
    entries
        .into_iter()
        .map(|(label, p, r, state)| {
            let energy_residual =
                (ham.apply(&state) - &state * ONE.scale(g.epsilon)).norm();
            let correlators = majorana_correlators_of(&state)?;
            Ok(SectorRow {
                label,
                p,
                r,
                energy_residual,
                parity: sym.p.expectation(&state).re,
                r_parity: sym.r.expectation(&state).re,
                correlators,
                state,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::solve_ground_state_analytic;

    #[test]
    fn clifford_algebra() {
        let ops = build_majorana_ops();
        assert!(ops.clifford_residual() < 1e-12);
        assert!(ops.fermion_residual() < 1e-12);
        for (name, r) in ops.spin_identities() {
            assert!(r < 1e-12, "{name}: {r}");
        }
    }

    #[test]
    fn hamiltonian_in_majorana_form() {
        for h in [0.0, 0.3, 1.0, 2.5] {
            assert!(verify_majorana_hamiltonian(&ModelParams::new(h, 1.0).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn zero_modes_at_zero_field() {
        let zero = b_mode_commutators(&ModelParams::new(0.0, 1.0).unwrap());
        assert!(zero.iter().all(|&r| r < 1e-12));
        let on = b_mode_commutators(&ModelParams::new(0.4, 1.0).unwrap());
        assert!(on[0] > 0.1 && on[3] > 0.1);
        assert!(on[1] < 1e-12 && on[2] < 1e-12);
    }

    #[test]
    fn ground_state_correlators() {
        for h in [0.0, 0.3, 1.7] {
            let g = solve_ground_state_analytic(&ModelParams::new(h, 1.0).unwrap()).unwrap();
            let m = majorana_correlators(&g).unwrap();
            assert!(m.deviation_from(&CorrelatorSet::closed_form(&g)) < 1e-12);
            assert_eq!(m.parity, 1.0);
        }
    }

    #[test]
    fn mixed_parity_is_rejected() {
        let g = solve_ground_state_analytic(&ModelParams::new(0.3, 1.0).unwrap()).unwrap();
        let mixed = &g.vector + &sigma(Site::A, Axis::X).apply(&g.vector);
        assert!(majorana_correlators_of(&mixed).is_err());
    }

    #[test]
    fn sector_table() {
        let g = solve_ground_state_analytic(&ModelParams::new(0.0, 1.0).unwrap()).unwrap();
        let c = CorrelatorSet::closed_form(&g);
        let rows = degenerate_sector_table(&g).unwrap();
        for row in &rows {
            let (rb, rc) = row.residuals(&c);
            assert!(rb < 1e-10 && rc < 1e-10, "{}", row.label);
            assert!(row.energy_residual < 1e-10);
            assert!((row.parity - f64::from(row.p)).abs() < 1e-12);
            assert!((row.r_parity - f64::from(row.r)).abs() < 1e-12);
        }
        let g = solve_ground_state_analytic(&ModelParams::new(0.1, 1.0).unwrap()).unwrap();
        assert!(degenerate_sector_table(&g).is_err());
    }
}
