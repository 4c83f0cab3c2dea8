//! The four-site spin model `H = hσ_A^z + k(σ_A^x σ_C1^x + σ_C1^y σ_C2^y + σ_C2^x σ_B^x) + hσ_B^z`,
//! its symmetry operators and its lowest even-parity eigenstate.
//!
//! Basis convention: the computational basis is labelled by bitstrings
//! `b_A b_C1 b_C2 b_B` with `e ↦ 0` (Jordan-Wigner mode empty, `σ^z = -1`)
//! and `f ↦ 1` (occupied, `σ^z = +1`). Site `A` is the most significant bit,
//! so `|eeff⟩` has index 3. On one site the Pauli matrices read
//!
//! ```text
//! σ^x = [[0, 1], [1, 0]]   σ^y = [[0, i], [-i, 0]]   σ^z = [[-1, 0], [0, 1]]
//! ```
//!
//! which is what `σ^z = 2f†f - 1`, `σ^x = f† + f`, `σ^y = -i(f† - f)` give with
//! `f† = |f⟩⟨e|`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{domain, QetError, Result};
use crate::operator::{DenseOperator, State, I, ONE, ZERO};

pub const N_SITES: usize = 4;
pub const DIM: usize = 1 << N_SITES;

/// Sites of the model, in Jordan-Wigner order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Site {
    A = 0,
    C1 = 1,
    C2 = 2,
    B = 3,
}

impl Site {
    pub const ALL: [Site; 4] = [Site::A, Site::C1, Site::C2, Site::B];

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Edge field `h` and bond coupling `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub h: f64,
    pub k: f64,
}

impl ModelParams {
    pub fn new(h: f64, k: f64) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return domain(format!("coupling k must be positive, got {k}"));
        }
        if !(h >= 0.0) || !h.is_finite() {
            return domain(format!("edge field h must be non-negative, got {h}"));
        }
        Ok(Self { h, k })
    }
}

/// The 2x2 Pauli matrix in the `(e, f)` basis.
pub fn pauli_matrix(axis: Axis) -> DenseOperator {
    match axis {
        Axis::X => DenseOperator::single_site([[ZERO, ONE], [ONE, ZERO]]),
        Axis::Y => DenseOperator::single_site([[ZERO, I], [-I, ZERO]]),
        Axis::Z => DenseOperator::single_site([[-ONE, ZERO], [ZERO, ONE]]),
    }
}

/// Embeds a single-site operator at `site` of the four-site space.
pub fn embed(site: Site, local: &DenseOperator) -> DenseOperator {
    Site::ALL.iter().fold(DenseOperator::identity(1), |acc, &s| {
        if s == site {
            acc.kron(local)
        } else {
            acc.kron(&DenseOperator::identity(2))
        }
    })
}

/// `σ_site^axis` on the four-site space.
pub fn sigma(site: Site, axis: Axis) -> DenseOperator {
    embed(site, &pauli_matrix(axis))
}

/// `σ^axis` at site index `site ∈ 0..4` (A, C1, C2, B).
pub fn build_pauli(site: usize, axis: Axis) -> Result<DenseOperator> {
    match Site::ALL.get(site) {
        Some(&s) => Ok(sigma(s, axis)),
        None => domain(format!("site index {site} out of range 0..{N_SITES}")),
    }
}

/// Basis index of a label such as `"eeff"`.
pub fn basis_index(label: &str) -> Result<usize> {
    if label.len() != N_SITES {
        return domain(format!("basis label {label:?} must have {N_SITES} characters"));
    }
    label.chars().try_fold(0usize, |acc, ch| match ch {
        'e' => Ok(acc << 1),
        'f' => Ok((acc << 1) | 1),
        _ => domain(format!("basis label {label:?} may only contain 'e' and 'f'")),
    })
}

pub fn basis_state(index: usize) -> State {
    let mut v = DVector::from_element(DIM, ZERO);
    v[index] = ONE;
    v
}

/// The Hamiltonian together with its named parts `H = H_A + H_L + H_C + H_R + H_B`.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    pub total: DenseOperator,
    pub h_a: DenseOperator,
    pub h_l: DenseOperator,
    pub h_c: DenseOperator,
    pub h_r: DenseOperator,
    pub h_b: DenseOperator,
}

impl Hamiltonian {
    /// The interaction `V = H_L + H_C + H_R`.
    pub fn interaction(&self) -> DenseOperator {
        &(&self.h_l + &self.h_c) + &self.h_r
    }
}

pub fn build_hamiltonian(p: &ModelParams) -> Hamiltonian {
    use Axis::*;
    use Site::*;
    let h_a = &sigma(A, Z) * p.h;
    let h_b = &sigma(B, Z) * p.h;
    let h_l = &(&sigma(A, X) * &sigma(C1, X)) * p.k;
    let h_c = &(&sigma(C1, Y) * &sigma(C2, Y)) * p.k;
    let h_r = &(&sigma(C2, X) * &sigma(B, X)) * p.k;
    let total = &(&(&(&h_a + &h_l) + &h_c) + &h_r) + &h_b;
    Hamiltonian { total, h_a, h_l, h_c, h_r, h_b }
}

/// The operators `P`, `Q`, `R`, `S` that classify the spectrum.
#[derive(Debug, Clone)]
pub struct SymmetrySet {
    /// Fermion parity `σ_A^z σ_C1^z σ_C2^z σ_B^z`.
    pub p: DenseOperator,
    /// `σ_A^z σ_C1^z σ_C2^x`, maps between parity sectors.
    pub q: DenseOperator,
    /// `σ_C1^x σ_C2^x`, the "R-parity".
    pub r: DenseOperator,
    /// Spin inversion `σ_A^x σ_C1^y σ_C2^x σ_B^y`, anticommutes with `H`.
    pub s: DenseOperator,
}

pub fn build_symmetries() -> SymmetrySet {
    use Axis::*;
    use Site::*;
    let prod = |ops: &[DenseOperator]| {
        ops.iter().fold(DenseOperator::identity(DIM), |acc, o| &acc * o)
    };
    SymmetrySet {
        p: prod(&[sigma(A, Z), sigma(C1, Z), sigma(C2, Z), sigma(B, Z)]),
        q: prod(&[sigma(A, Z), sigma(C1, Z), sigma(C2, X)]),
        r: prod(&[sigma(C1, X), sigma(C2, X)]),
        s: prod(&[sigma(A, X), sigma(C1, Y), sigma(C2, X), sigma(B, Y)]),
    }
}

impl SymmetrySet {
    /// Norms of every (anti)commutation relation that should vanish, with a
    /// label for each.
    pub fn relation_residuals(&self, h: &DenseOperator) -> Vec<(&'static str, f64)> {
        let id = DenseOperator::identity(DIM);
        vec![
            ("[P,H]", self.p.commutator(h).norm()),
            ("[Q,H]", self.q.commutator(h).norm()),
            ("{P,Q}", self.p.anticommutator(&self.q).norm()),
            ("[R,H]", self.r.commutator(h).norm()),
            ("[R,P]", self.r.commutator(&self.p).norm()),
            ("{R,Q}", self.r.anticommutator(&self.q).norm()),
            ("{S,H}", self.s.anticommutator(h).norm()),
            ("[P,S]", self.p.commutator(&self.s).norm()),
            ("P^2-1", (&self.p * &self.p).distance(&id)),
            ("Q^2-1", (&self.q * &self.q).distance(&id)),
            ("R^2-1", (&self.r * &self.r).distance(&id)),
            ("S^2-1", (&self.s * &self.s).distance(&id)),
        ]
    }
}

/// Fermion-number parity sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// Basis states with an even (odd) number of `f` sites.
pub fn sector_basis(parity: Parity) -> Vec<usize> {
    let want = match parity {
        Parity::Even => 0,
        Parity::Odd => 1,
    };
    (0..DIM).filter(|i| i.count_ones() % 2 == want).collect()
}

fn hermitian_eigen(op: &DenseOperator) -> (Vec<f64>, DMatrix<Complex64>) {
    let eig = SymmetricEigen::new(op.matrix().clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    (values, vectors)
}

/// Ascending spectrum of `H` restricted to one parity sector (8 levels).
pub fn sector_spectrum(p: &ModelParams, parity: Parity) -> Vec<f64> {
    let h = build_hamiltonian(p).total;
    hermitian_eigen(&h.restrict(&sector_basis(parity))).0
}

/// Analytic lowest even-parity eigenstate.
#[derive(Debug, Clone)]
pub struct GroundStateSolution {
    pub params: ModelParams,
    pub epsilon: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Normalization, `(4 + 2α² + 2β²) Z² = 1`, `Z > 0`.
    pub z: f64,
    pub vector: State,
}

/// Most negative root of `(ε+k)(ε²-5k²) - 4h²(ε-k) = 0`, by bisection on
/// `[-3k-2h, -√5 k]`.
pub fn ground_energy(p: &ModelParams) -> Result<f64> {
    let (h, k) = (p.h, p.k);
    let f = |e: f64| (e + k) * (e * e - 5.0 * k * k) - 4.0 * h * h * (e - k);
    let mut lo = -3.0 * k - 2.0 * h;
    let mut hi = -(5.0f64).sqrt() * k;
    let f_lo = f(lo);
    if f_lo >= 0.0 || f(hi) < -1e-12 * k * k * k {
        return Err(QetError::Numeric(format!(
            "ground-energy bracket [{lo}, {hi}] has no sign change"
        )));
    }
    for _ in 0..200 {
        if hi - lo <= 1e-14 * hi.abs() {
            return Ok(0.5 * (lo + hi));
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(QetError::Numeric("ground-energy bisection did not converge".into()))
}

pub fn solve_ground_state_analytic(p: &ModelParams) -> Result<GroundStateSolution> {
    let p = ModelParams::new(p.h, p.k)?;
    let (h, k) = (p.h, p.k);
    let epsilon = ground_energy(&p)?;
    let alpha = 2.0 * k / (epsilon + k - 2.0 * h);
    let beta = 2.0 * k / (epsilon + k + 2.0 * h);
    let z = (4.0 + 2.0 * alpha * alpha + 2.0 * beta * beta).sqrt().recip();

    let mut vector = DVector::from_element(DIM, ZERO);
    let terms = [
        ("eeff", 1.0),
        ("efef", 1.0),
        ("ffff", alpha),
        ("feef", alpha),
        ("ffee", 1.0),
        ("fefe", 1.0),
        ("eeee", beta),
        ("effe", beta),
    ];
    for (label, amp) in terms {
        vector[basis_index(label)?] = Complex64::new(z * amp, 0.0);
    }
    Ok(GroundStateSolution { params: p, epsilon, alpha, beta, z, vector })
}

/// Lowest even-parity eigenpair from exact diagonalization.
#[derive(Debug, Clone)]
pub struct NumericGroundState {
    pub epsilon: f64,
    pub vector: State,
    /// Dimension of the lowest even-parity eigenspace (2 at `h = 0`).
    pub degeneracy: usize,
}

const DEGENERACY_TOL: f64 = 1e-8;

/// Diagonalizes `H` in the even sector and returns the lowest state. When the
/// lowest level is degenerate the `R = +1` state is selected. The global phase
/// makes the `|eeff⟩` amplitude real and positive.
pub fn solve_ground_state_numeric(p: &ModelParams) -> Result<NumericGroundState> {
    let p = ModelParams::new(p.h, p.k)?;
    let ham = build_hamiltonian(&p);
    let even = sector_basis(Parity::Even);
    let (values, vectors) = hermitian_eigen(&ham.total.restrict(&even));
    if values.iter().any(|v| !v.is_finite()) {
        return Err(QetError::Numeric("even-sector eigensolver returned non-finite values".into()));
    }
    let degeneracy = values.iter().take_while(|&&v| v - values[0] < DEGENERACY_TOL).count();
    let embed_col = |col: DVector<Complex64>| {
        let mut full = DVector::from_element(DIM, ZERO);
        for (i, &b) in even.iter().enumerate() {
            full[b] = col[i];
        }
        full
    };

    let mut vector = if degeneracy == 1 {
        embed_col(vectors.column(0).into_owned())
    } else {
        let sub = vectors.columns(0, degeneracy).into_owned();
        let r = build_symmetries().r.restrict(&even);
        let r_sub = DenseOperator::from_matrix(sub.adjoint() * r.matrix() * &sub);
        let (r_values, r_vectors) = hermitian_eigen(&r_sub);
        let top = r_values.len() - 1;
        if (r_values[top] - 1.0).abs() > 1e-8 {
            return Err(QetError::Numeric("no R = +1 state in the degenerate ground space".into()));
        }
        embed_col(&sub * r_vectors.column(top))
    };

    let anchor = basis_index("eeff")?;
    let pivot = if vector[anchor].norm() > 1e-8 {
        anchor
    } else {
        (0..vector.len())
            .max_by(|&a, &b| vector[a].norm().total_cmp(&vector[b].norm()))
            .unwrap_or(0)
    };
    let phase = vector[pivot] / vector[pivot].norm();
    vector /= phase;
    vector /= Complex64::new(vector.norm(), 0.0);
    Ok(NumericGroundState { epsilon: values[0], vector, degeneracy })
}

/// Which ground-state vector the protocol evaluations use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StateSource {
    #[default]
    Analytic,
    Numeric,
}

/// The analytic solution, optionally with `ε` and the state vector replaced by
/// exact diagonalization. `α`, `β`, `Z` stay analytic; they only enter
/// closed-form expressions.
pub fn ground_state(p: &ModelParams, source: StateSource) -> Result<GroundStateSolution> {
    let mut g = solve_ground_state_analytic(p)?;
    if source == StateSource::Numeric {
        let num = solve_ground_state_numeric(p)?;
        g.epsilon = num.epsilon;
        g.vector = num.vector;
    }
    Ok(g)
}

impl GroundStateSolution {
    /// Residuals of the defining algebraic relations, labelled.
    pub fn invariant_residuals(&self) -> Vec<(&'static str, f64)> {
        let (h, k) = (self.params.h, self.params.k);
        let (a, b, z, e) = (self.alpha, self.beta, self.z, self.epsilon);
        let parity = build_symmetries().p;
        vec![
            ("k(α-β) - 2hαβ", (k * (a - b) - 2.0 * h * a * b).abs()),
            ("(4+2α²+2β²)Z² - 1", ((4.0 + 2.0 * a * a + 2.0 * b * b) * z * z - 1.0).abs()),
            ("αβ - (ε-k)/(ε+k)", (a * b - (e - k) / (e + k)).abs()),
            ("ε - k(α+β+1)", (e - k * (a + b + 1.0)).abs()),
            ("|ψ| - 1", (self.vector.norm() - 1.0).abs()),
            ("Pψ - ψ", (parity.apply(&self.vector) - &self.vector).norm()),
        ]
    }

    /// `‖Hψ - εψ‖`.
    pub fn eigen_residual(&self) -> f64 {
        let h = build_hamiltonian(&self.params).total;
        (h.apply(&self.vector) - &self.vector * Complex64::new(self.epsilon, 0.0)).norm()
    }

    /// `⟨ψ|M|ψ⟩`, real part.
    pub fn expect(&self, op: &DenseOperator) -> f64 {
        op.expectation(&self.vector).re
    }
}

/// Ground-state expectation values of the Hamiltonian parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundEnergies {
    pub epsilon: f64,
    pub eps_a: f64,
    pub eps_v: f64,
    pub eps_b: f64,
    pub eps_l: f64,
    pub eps_c: f64,
    pub eps_r: f64,
}

/// Closed-form energy decomposition in terms of `α`, `β`, `Z`.
pub fn energy_decomposition(g: &GroundStateSolution) -> GroundEnergies {
    let (h, k) = (g.params.h, g.params.k);
    let z2 = g.z * g.z;
    let eps_a = 2.0 * h * z2 * (g.alpha * g.alpha - g.beta * g.beta);
    let eps_l = 4.0 * k * z2 * (g.alpha + g.beta);
    let eps_v = g.epsilon - 2.0 * eps_a;
    GroundEnergies {
        epsilon: g.epsilon,
        eps_a,
        eps_v,
        eps_b: eps_a,
        eps_l,
        eps_c: eps_v - 2.0 * eps_l,
        eps_r: eps_l,
    }
}

/// The same decomposition from matrix elements `⟨ψ|H_i|ψ⟩`.
pub fn energy_decomposition_direct(g: &GroundStateSolution) -> GroundEnergies {
    let ham = build_hamiltonian(&g.params);
    GroundEnergies {
        epsilon: g.expect(&ham.total),
        eps_a: g.expect(&ham.h_a),
        eps_v: g.expect(&ham.interaction()),
        eps_b: g.expect(&ham.h_b),
        eps_l: g.expect(&ham.h_l),
        eps_c: g.expect(&ham.h_c),
        eps_r: g.expect(&ham.h_r),
    }
}

impl GroundEnergies {
    pub fn max_deviation(&self, other: &Self) -> f64 {
        [
            self.epsilon - other.epsilon,
            self.eps_a - other.eps_a,
            self.eps_v - other.eps_v,
            self.eps_b - other.eps_b,
            self.eps_l - other.eps_l,
            self.eps_c - other.eps_c,
            self.eps_r - other.eps_r,
        ]
        .iter()
        .fold(0.0, |m, d| m.max(d.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(h: f64) -> ModelParams {
        ModelParams::new(h, 1.0).unwrap()
    }

    #[test]
    fn rejects_bad_params() {
        assert!(ModelParams::new(-0.1, 1.0).is_err());
        assert!(ModelParams::new(0.1, 0.0).is_err());
        assert!(ModelParams::new(f64::NAN, 1.0).is_err());
        assert!(build_pauli(4, Axis::X).is_err());
    }

    #[test]
    fn sigma_z_on_vacuum_is_minus_one() {
        let z = build_pauli(0, Axis::Z).unwrap();
        let vac = basis_state(basis_index("eeee").unwrap());
        assert!((z.expectation(&vac).re + 1.0).abs() < 1e-15);
        assert!((z.apply(&vac) + &vac).norm() < 1e-15);
    }

    #[test]
    fn pauli_involution_and_trace() {
        let id = DenseOperator::identity(DIM);
        for site in 0..4 {
            for axis in [Axis::X, Axis::Y, Axis::Z] {
                let s = build_pauli(site, axis).unwrap();
                assert!((&s * &s).distance(&id) < 1e-14);
                assert!(s.trace().norm() < 1e-14);
                assert!(s.is_hermitian(1e-15));
            }
        }
    }

    #[test]
    fn basis_labels() {
        assert_eq!(basis_index("eeff").unwrap(), 3);
        assert_eq!(basis_index("feee").unwrap(), 8);
        assert!(basis_index("efx").is_err());
        assert!(basis_index("efxe").is_err());
    }

    #[test]
    fn hamiltonian_is_traceless_and_hermitian() {
        for h in [0.0, 0.4, 2.0] {
            let ham = build_hamiltonian(&params(h));
            assert!(ham.total.trace().norm() < 1e-13);
            assert!(ham.total.is_hermitian(1e-12));
        }
    }

    #[test]
    fn zero_field_spectrum_is_doubly_degenerate_and_symmetric() {
        let spec = sector_spectrum(&params(0.0), Parity::Even);
        for pair in spec.chunks(2) {
            assert!((pair[0] - pair[1]).abs() < 1e-10);
        }
        for (a, b) in spec.iter().zip(spec.iter().rev()) {
            assert!((a + b).abs() < 1e-10);
        }
    }

    #[test]
    fn cubic_root_at_unit_field() {
        // frozen from an independent 200-step bisection of the cubic in f64
        let e = ground_energy(&params(1.0)).unwrap();
        assert!((e - (-3.493959207434934)).abs() < 1e-12, "{e}");
        let e0 = ground_energy(&params(0.0)).unwrap();
        assert!((e0 + 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn analytic_state_properties() {
        for i in 0..=30 {
            let g = solve_ground_state_analytic(&params(0.1 * i as f64)).unwrap();
            for (name, r) in g.invariant_residuals() {
                assert!(r < 1e-12, "h={} {name}: {r}", g.params.h);
            }
            assert!(g.eigen_residual() < 1e-10);
            assert!(g.epsilon <= -(5f64.sqrt()) + 1e-15);
            assert!(g.z > 0.0);
        }
        let g0 = solve_ground_state_analytic(&params(0.0)).unwrap();
        assert!((g0.alpha * g0.beta - (3.0 + 5f64.sqrt()) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn numeric_matches_analytic() {
        for h in [0.0, 0.05, 0.5, 1.0, 3.0] {
            let p = params(h);
            let ana = solve_ground_state_analytic(&p).unwrap();
            let num = solve_ground_state_numeric(&p).unwrap();
            assert!((num.epsilon - ana.epsilon).abs() < 1e-10);
            let overlap = ana.vector.dotc(&num.vector).norm();
            assert!(1.0 - overlap < 1e-10, "h={h}: overlap {overlap}");
            assert_eq!(num.degeneracy, if h == 0.0 { 2 } else { 1 });
        }
    }

    #[test]
    fn energy_parts_closed_form_vs_direct() {
        for h in [0.0, 0.5, 2.0] {
            let g = solve_ground_state_analytic(&params(h)).unwrap();
            let cf = energy_decomposition(&g);
            let direct = energy_decomposition_direct(&g);
            assert!(cf.max_deviation(&direct) < 1e-12);
            assert!((cf.eps_a + cf.eps_v + cf.eps_b - cf.epsilon).abs() < 1e-12);
            assert!(cf.eps_a <= 0.0 && cf.eps_l < 0.0);
            if h == 0.0 {
                assert_eq!(cf.eps_a, 0.0);
            }
        }
    }

    #[test]
    fn symmetry_relations() {
        let sym = build_symmetries();
        for h in [0.0, 0.7] {
            let ham = build_hamiltonian(&params(h)).total;
            for (name, r) in sym.relation_residuals(&ham) {
                assert!(r < 1e-12, "{name}: {r}");
            }
        }
        let vac = basis_state(0);
        assert!((sym.p.apply(&vac) - &vac).norm() < 1e-15);
    }
}
