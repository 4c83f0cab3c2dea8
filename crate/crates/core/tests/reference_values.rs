//! Pinned numbers. The field-dependent values were computed independently by
//! dense diagonalization of the 16x16 Hamiltonian in double precision.

use qet_core::majorana::{degenerate_sector_table, majorana_correlators};
use qet_core::model::{energy_decomposition, solve_ground_state_analytic, GroundStateSolution, ModelParams};
use qet_core::optimum::{extraction_row, max_local_reduction};
use qet_core::protocol::CorrelatorSet;
use qet_core::thermo::{effective_beta, second_law_bound, sweep_figure4};
use qet_core::Exec;

fn gs(h: f64) -> GroundStateSolution {
    solve_ground_state_analytic(&ModelParams::new(h, 1.0).unwrap()).unwrap()
}

#[test]
fn zero_field_values() {
    let g = gs(0.0);
    let c = CorrelatorSet::closed_form(&g);
    assert!((g.epsilon + 5f64.sqrt()).abs() < 1e-12);
    assert!((c.c_ab - 1.0).abs() < 1e-12);
    assert!((c.d_ab + 1.0 / 5f64.sqrt()).abs() < 1e-12);
    assert!(c.c_ar.abs() < 1e-12);
    let m = majorana_correlators(&g).unwrap();
    assert!((m.bb + 1.0).abs() < 1e-12);
    assert!((m.cc + 0.4472135954999579).abs() < 1e-12);
    assert!(m.bc.abs() < 1e-12);
    assert_eq!(extraction_row(&g).delta_e_b_max, 0.0);
    assert_eq!(extraction_row(&g).delta_e_bb_max, 0.0);
}

#[test]
fn unit_field_energy() {
    assert!((gs(1.0).epsilon + 3.4939592074349344).abs() < 1e-12);
}

#[test]
fn correlators_at_moderate_field() {
    let c = CorrelatorSet::closed_form(&gs(0.3));
    assert!((c.c_ab - 0.76570).abs() < 5e-5);
    assert!((c.d_ab + 0.31614).abs() < 5e-5);
    assert!((c.c_ar - 0.32455).abs() < 5e-5);
}

#[test]
fn sector_signs() {
    let rows = degenerate_sector_table(&gs(0.0)).unwrap();
    let signs: Vec<(i32, i32, f64)> = rows.iter().map(|r| (r.p, r.r, r.correlators.bb)).collect();
    for (p, r, bb) in signs {
        assert!((bb + f64::from(p * r)).abs() < 1e-10);
    }
}

#[test]
fn effective_inverse_temperature_at_half_field() {
    let t = effective_beta(&gs(0.5)).unwrap();
    assert!((t.beta_eff - 3.177997067808).abs() < 1e-11, "{}", t.beta_eff);
}

#[test]
fn extraction_efficiency_near_peak() {
    let row = extraction_row(&gs(0.18));
    let ratio = row.delta_e_b_max / row.delta_e_a_ry;
    assert!((ratio - 0.032).abs() < 0.003, "{ratio}");
}

#[test]
fn kl_term_decays_at_large_field() {
    let row = sweep_figure4(1.0, &[2.0], Exec::Sequential).unwrap()[0];
    assert!(row.kl_over_beta < 0.05 * row.iqc_over_beta);
    let r = second_law_bound(&gs(2.0)).unwrap();
    assert!(r.correlation_term >= r.delta_e_bb_max);
}

#[test]
fn local_optimum_energy_split() {
    let g = gs(0.5);
    let ge = energy_decomposition(&g);
    let cert = max_local_reduction(&g);
    let c = CorrelatorSet::closed_form(&g);
    let split = ge.eps_b * (1.0 - cert.cos_2theta) - 0.5 * c.c_ab * cert.sin_2theta;
    assert!((split - cert.value).abs() < 1e-12);
}
