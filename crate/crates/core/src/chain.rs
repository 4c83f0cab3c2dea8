//! Free-fermion Majorana chain of arbitrary length.
//!
//! Mode order is `c_0..c_{L-1}, b_0, b_{L-1}`; internal `b` modes are exact
//! zero modes and are left out. The Hamiltonian is `H = (i/4) Σ A_jk γ_j γ_k`
//! with `γ² = 1`, so a term `i t γ_a γ_b` enters as `A_ab = 2t`, `A_ba = -2t`.

use nalgebra::{DMatrix, DVector};

use crate::error::{domain, QetError, Result};
use crate::exec::Exec;
use crate::model::{solve_ground_state_analytic, ModelParams};
use crate::protocol::CorrelatorSet;

#[derive(Debug, Clone)]
pub struct MajoranaChainSpec {
    pub l: usize,
    pub h: f64,
    pub k: f64,
    pub a: DMatrix<f64>,
}

impl MajoranaChainSpec {
    pub fn modes(&self) -> usize {
        self.l + 2
    }

    pub fn c(&self, site: usize) -> usize {
        site
    }

    pub fn b_first(&self) -> usize {
        self.l
    }

    pub fn b_last(&self) -> usize {
        self.l + 1
    }

    /// Mode index at each position of the path `b_0, c_0, …, c_{L-1}, b_{L-1}`.
    fn path(&self) -> Vec<usize> {
        std::iter::once(self.b_first())
            .chain(0..self.l)
            .chain(std::iter::once(self.b_last()))
            .collect()
    }

    /// Couplings `t_p` of the terms `i t_p γ_p γ_{p+1}` along the path.
    fn path_couplings(&self) -> Vec<f64> {
        let path = self.path();
        path.windows(2).map(|w| 0.5 * self.a[(w[0], w[1])]).collect()
    }

    /// `max |A + Aᵀ|`.
    pub fn antisymmetry_residual(&self) -> f64 {
        (&self.a + self.a.transpose()).amax()
    }
}

/// `H = ih b_0 c_0 - ik Σ_l (-1)^l c_l c_{l+1} + ih c_{L-1} b_{L-1}`.
pub fn build_chain(l: usize, h: f64, k: f64) -> Result<MajoranaChainSpec> {
    if l < 2 {
        return domain(format!("chain length must be at least 2, got {l}"));
    }
    ModelParams::new(h, k)?;
    let n = l + 2;
    let mut a = DMatrix::zeros(n, n);
    let mut add = |i: usize, j: usize, t: f64| {
        a[(i, j)] += 2.0 * t;
        a[(j, i)] -= 2.0 * t;
    };
    add(l, 0, h);
    for site in 0..l - 1 {
        let sign = if site % 2 == 0 { 1.0 } else { -1.0 };
        add(site, site + 1, -k * sign);
    }
    add(l - 1, l + 1, h);
    Ok(MajoranaChainSpec { l, h, k, a })
}

/// `Γ_jk = ⟨i γ_j γ_k⟩` for `j ≠ k`, zero diagonal.
#[derive(Debug, Clone)]
pub struct CovarianceMatrix {
    pub gamma: DMatrix<f64>,
    /// Ground-state energy `-(1/4) Σ |eigenvalues of iA|`.
    pub energy: f64,
    /// Modes with vanishing single-particle energy.
    pub zero_modes: usize,
}

/// Singular values below this fraction of the largest are treated as zero modes.
const ZERO_MODE_RTOL: f64 = 1e-12;

/// Ground state of the open path `i Σ_p t_p γ_p γ_{p+1}`, returned in path order.
///
/// The gauge `γ_p → (-i)^p γ_p` makes `iA` a real symmetric tridiagonal matrix
/// `T` with zero diagonal. `T` is bipartite (even vs odd positions), so its sign
/// function is built from the SVD `M = UΣVᵀ` of the even-odd block:
/// `sign(T)` has blocks `UVᵀ` and `VUᵀ`. Undoing the gauge gives
/// `Γ_pq = i^{q-p+1} sign(T)_pq`.
fn path_ground_state(t: &[f64]) -> Result<(DMatrix<f64>, f64, usize)> {
    let n = t.len() + 1;
    let (ne, no) = (n.div_ceil(2), n / 2);
    let mut m = DMatrix::zeros(ne, no);
    for (p, &tp) in t.iter().enumerate() {
        if p % 2 == 0 {
            m[(p / 2, p / 2)] = 2.0 * tp;
        } else {
            m[((p + 1) / 2, (p - 1) / 2)] = 2.0 * tp;
        }
    }
    let svd = m.try_svd(true, true, f64::EPSILON, 0)
        .ok_or_else(|| QetError::Numeric("SVD did not converge".into()))?;
    let (u, vt) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
    let smax = svd.singular_values.amax();
    let mut sign_block = DMatrix::zeros(ne, no);
    let mut zero_modes = ne + no;
    let mut energy = 0.0;
    for (i, &s) in svd.singular_values.iter().enumerate() {
        energy -= 0.5 * s;
        if s > ZERO_MODE_RTOL * smax {
            sign_block += u.column(i) * vt.row(i);
            zero_modes -= 2;
        }
    }
    let mut gamma = DMatrix::zeros(n, n);
    for a in 0..ne {
        for b in 0..no {
            let (p, q) = (2 * a, 2 * b + 1);
            let s = sign_block[(a, b)];
            // i^{q-p+1} for odd q-p, and its antisymmetric partner
            let d = q as i64 - p as i64 + 1;
            let phase = if d.rem_euclid(4) == 0 { 1.0 } else { -1.0 };
            gamma[(p, q)] = phase * s;
            gamma[(q, p)] = -phase * s;
        }
    }
    Ok((gamma, energy, zero_modes))
}

/// Ground-state covariance. At `h = 0` the edge `b` modes decouple; the state
/// is taken as the `h → 0⁺` limit, where the pair `(b_0, b_{L-1})` is fixed by
/// the effective coupling `∝ -h² (A_cc⁻¹)_{0,L-1}` that the `c` sector induces.
pub fn ground_covariance(spec: &MajoranaChainSpec) -> Result<CovarianceMatrix> {
    let n = spec.modes();
    let mut gamma = DMatrix::zeros(n, n);
    if spec.h > 0.0 {
        let path = spec.path();
        let (g, energy, zero_modes) = path_ground_state(&spec.path_couplings())?;
        for (p, &i) in path.iter().enumerate() {
            for (q, &j) in path.iter().enumerate() {
                gamma[(i, j)] = g[(p, q)];
            }
        }
        return Ok(CovarianceMatrix { gamma, energy, zero_modes });
    }

    let l = spec.l;
    let t: Vec<f64> = (0..l - 1).map(|s| 0.5 * spec.a[(s, s + 1)]).collect();
    let (g, energy, zero_modes) = path_ground_state(&t)?;
    gamma.view_mut((0, 0), (l, l)).copy_from(&g);
    let mut zero_modes = zero_modes + 2;
    if zero_modes == 2 {
        let a_cc = spec.a.view((0, 0), (l, l)).into_owned();
        let mut e = DVector::zeros(l);
        e[l - 1] = 1.0;
        let x = a_cc
            .lu()
            .solve(&e)
            .ok_or_else(|| QetError::Singular("c-sector coupling matrix is singular".into()))?;
        let s = x[0].signum();
        gamma[(spec.b_first(), spec.b_last())] = s;
        gamma[(spec.b_last(), spec.b_first())] = -s;
        zero_modes = 0;
    }
    Ok(CovarianceMatrix { gamma, energy, zero_modes })
}

impl CovarianceMatrix {
    pub fn antisymmetry_residual(&self) -> f64 {
        (&self.gamma + self.gamma.transpose()).amax()
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> f64 {
        self.gamma.singular_values().amax()
    }

    /// `‖Γ² + 1‖` on the paired modes: zero for a pure state with no zero modes.
    pub fn purity_residual(&self) -> f64 {
        let n = self.gamma.nrows();
        (&self.gamma * &self.gamma + DMatrix::identity(n, n)).amax()
    }
}

/// Edge correlators read off `Γ`, in the sign convention of the four-site state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeCorrelators {
    pub l: usize,
    pub h: f64,
    /// `-⟨i b_0 b_{L-1}⟩`.
    pub c_ab: f64,
    /// `⟨i c_0 c_{L-1}⟩`.
    pub d_ab: f64,
    /// `⟨i b_0 c_{L-2}⟩`.
    pub c_ar: f64,
    pub energy: f64,
}

pub fn edge_correlators(spec: &MajoranaChainSpec) -> Result<EdgeCorrelators> {
    let cov = ground_covariance(spec)?;
    let g = &cov.gamma;
    Ok(EdgeCorrelators {
        l: spec.l,
        h: spec.h,
        c_ab: -g[(spec.b_first(), spec.b_last())],
        d_ab: g[(spec.c(0), spec.c(spec.l - 1))],
        c_ar: g[(spec.b_first(), spec.c(spec.l - 2))],
        energy: cov.energy,
    })
}

/// Least-squares line through `(ln L, ln |D_AB|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Option<PowerLawFit> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && y.abs() > 0.0 && y.is_finite())
        .map(|(x, y)| (x.ln(), y.abs().ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Some(PowerLawFit { slope, intercept, r_squared, points: pts.len() })
}

#[derive(Debug, Clone)]
pub struct ChainScan {
    pub rows: Vec<EdgeCorrelators>,
    /// Fit of `|D_AB|` against `L`; `None` with fewer than two usable points.
    pub fit: Option<PowerLawFit>,
}

pub fn edge_correlators_vs_l(h: f64, k: f64, ls: &[usize], exec: Exec) -> Result<ChainScan> {
    if ls.windows(2).any(|w| w[1] <= w[0]) {
        return domain("L list must be strictly increasing");
    }
    let rows = exec
        .map(ls, |&l| edge_correlators(&build_chain(l, h, k)?))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = rows.iter().map(|r| r.l as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.d_ab).collect();
    let fit = if h > 0.0 { fit_power_law(&xs, &ys) } else { None };
    Ok(ChainScan { rows, fit })
}

/// Largest difference between the `L = 4` chain and the exact four-site
/// correlators and energy. Signs are compared as well as magnitudes.
pub fn four_site_residual(h: f64, k: f64) -> Result<f64> {
    let chain = edge_correlators(&build_chain(4, h, k)?)?;
    let g = solve_ground_state_analytic(&ModelParams::new(h, k)?)?;
    let c = CorrelatorSet::closed_form(&g);
    Ok((chain.c_ab - c.c_ab)
        .abs()
        .max((chain.d_ab - c.d_ab).abs())
        .max((chain.c_ar - c.c_ar).abs())
        .max((chain.energy - g.epsilon).abs()))
}

/// Central-difference `dC_AB/dh` at fixed `L`.
pub fn c_ab_slope(l: usize, h: f64, k: f64, dh: f64) -> Result<f64> {
    let up = edge_correlators(&build_chain(l, h + dh, k)?)?.c_ab;
    let down = edge_correlators(&build_chain(l, h - dh, k)?)?.c_ab;
    Ok((up - down) / (2.0 * dh))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_matrix_shape() {
        let s = build_chain(6, 0.3, 1.0).unwrap();
        assert_eq!(s.antisymmetry_residual(), 0.0);
        assert_eq!(s.a[(6, 0)], 0.6);
        assert_eq!(s.a[(0, 1)], -2.0);
        assert_eq!(s.a[(1, 2)], 2.0);
        assert_eq!(s.a[(5, 7)], 0.6);
        let z = build_chain(6, 0.0, 1.0).unwrap();
        assert!(z.a.row(6).iter().chain(z.a.row(7).iter()).all(|&x| x == 0.0));
        assert!(build_chain(1, 0.3, 1.0).is_err());
    }

    #[test]
    fn four_sites_reproduce_exact_state() {
        for h in [0.0, 0.05, 0.3, 1.0, 2.7] {
            assert!(four_site_residual(h, 1.0).unwrap() < 1e-10, "h={h}");
        }
    }

    #[test]
    fn covariance_is_pure() {
        for (l, h) in [(6, 0.4), (51, 0.5), (10, 0.0)] {
            let cov = ground_covariance(&build_chain(l, h, 1.0).unwrap()).unwrap();
            assert!(cov.antisymmetry_residual() == 0.0);
            assert!(cov.spectral_norm() <= 1.0 + 1e-10);
            if l % 2 == 0 {
                assert!(cov.purity_residual() < 1e-10);
            }
        }
    }

    #[test]
    fn zero_field_limit_is_continuous() {
        for l in [4, 6, 10] {
            let zero = edge_correlators(&build_chain(l, 0.0, 1.0).unwrap()).unwrap();
            let small = edge_correlators(&build_chain(l, 1e-4, 1.0).unwrap()).unwrap();
            assert_eq!(zero.c_ab.abs(), 1.0);
            assert!((small.c_ab - zero.c_ab).abs() < 1e-5, "L={l}: {}", small.c_ab);
            assert!((zero.d_ab - small.d_ab).abs() < 1e-6);
        }
    }

    #[test]
    fn odd_length_has_zero_mode() {
        let e = edge_correlators(&build_chain(7, 0.5, 1.0).unwrap()).unwrap();
        assert_eq!(e.d_ab, 0.0);
        assert_eq!(ground_covariance(&build_chain(7, 0.5, 1.0).unwrap()).unwrap().zero_modes, 1);
    }

    #[test]
    fn power_law_fit_recovers_exponent() {
        let xs: Vec<f64> = (1..20).map(|i| i as f64 * 10.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(-1.5)).collect();
        let fit = fit_power_law(&xs, &ys).unwrap();
        assert!((fit.slope + 1.5).abs() < 1e-12);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }
}
