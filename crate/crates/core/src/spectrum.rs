//! Three-photon resonance: closed forms for the effective coupling and the
//! shifted resonance, and the numerical avoided crossing they approximate.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{build_anisotropic_rabi, build_isotropic_rabi, SqueezedParams};
use crate::qcore::{hermitian_eigs, FockSpace, QOperator, Qubit};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Analytic,
    Numeric,
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonanceResult {
    pub omega_c_star: f64,
    /// Signed effective coupling; for numeric results this is `−gap/2`.
    pub omega_eff: f64,
    pub gap: f64,
    pub method: Method,
}

/// Which qubit-cavity model to diagonalize.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RabiModel {
    Anisotropic,
    Isotropic,
}

impl RabiModel {
    pub fn build(&self, p: &SqueezedParams, space: FockSpace) -> Result<QOperator> {
        match self {
            RabiModel::Anisotropic => build_anisotropic_rabi(p, space),
            RabiModel::Isotropic => build_isotropic_rabi(p, space),
        }
    }
}

/// `Ω_eff = −√6 λ₁λ₂² / (4ω_c²)`
pub fn effective_rabi_frequency(p: &SqueezedParams) -> Result<f64> {
    let wc = p.omega_c();
    if wc == 0.0 || !wc.is_finite() {
        return Err(Error::SingularFrequency(wc));
    }
    Ok(-(6f64).sqrt() * p.lambda1() * p.lambda2().powi(2) / (4.0 * wc * wc))
}

/// Second-order shifted resonance `ω_c′ = ω_q [1/3 + (2cosh²r + sinh²r)(g/ω_q)²]`.
pub fn resonance_frequency_analytic(g: f64, r: f64, omega_q: f64) -> f64 {
    let k = 2.0 * r.cosh().powi(2) + r.sinh().powi(2);
    omega_q * (1.0 / 3.0 + k * (g / omega_q).powi(2))
}

/// Exact root of the diagonal equality of the effective two-level block on
/// `{|e,0⟩, |g,3⟩}`:
///
/// `ω_q/2 + λ₂²/(2ω_c) = 3ω_c − ω_q/2 − 3λ₂²/(2ω_c) − λ₁²/ω_c`,
///
/// i.e. `3ω_c² − ω_q ω_c − (2λ₂² + λ₁²) = 0`. Expanding the positive root to
/// second order in `g` gives [`resonance_frequency_analytic`].
pub fn resonance_frequency_subspace(g: f64, r: f64, omega_q: f64) -> f64 {
    let shift = 2.0 * (g * r.cosh()).powi(2) + (g * r.sinh()).powi(2);
    (omega_q + (omega_q * omega_q + 12.0 * shift).sqrt()) / 6.0
}

/// Closed-form resonance at the second-order shifted frequency.
pub fn analytic_resonance(g: f64, r: f64, omega_q: f64) -> Result<ResonanceResult> {
    let wc = resonance_frequency_analytic(g, r, omega_q);
    let omega_eff = effective_rabi_frequency(&SqueezedParams::new(g, r, wc, omega_q))?;
    Ok(ResonanceResult { omega_c_star: wc, omega_eff, gap: 2.0 * omega_eff.abs(), method: Method::Analytic })
}

/// Energies of the two eigenstates that carry the most weight on
/// `span{|e,0⟩, |g,3⟩}`, ordered (lower, upper).
pub fn tracked_pair(h: &QOperator, space: FockSpace) -> Result<(f64, f64)> {
    let eig = hermitian_eigs(h)?;
    let e0 = space.index(Qubit::E, 0);
    let g3 = space.index(Qubit::G, 3);
    let mut ranked: Vec<(usize, f64)> =
        (0..eig.dim()).map(|i| (i, eig.weight(i, e0) + eig.weight(i, g3))).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    let (i, wi) = ranked[0];
    let (j, wj) = ranked[1];
    if wi < 0.5 || wj < 0.5 {
        return Err(Error::Tracking(format!(
            "ambiguous identification of |e,0>/|g,3>: subspace weights {wi:.3}, {wj:.3}"
        )));
    }
    let (a, b) = (eig.values[i], eig.values[j]);
    Ok((a.min(b), a.max(b)))
}

/// Locates the avoided crossing of `|e,0⟩` and `|g,3⟩` for `model`, scanning
/// `omega_c` across `scan` and refining the minimum gap by golden section to
/// relative tolerance 1e-10.
pub fn find_avoided_crossing_for(
    model: RabiModel,
    template: &SqueezedParams,
    scan: (f64, f64),
    space: FockSpace,
) -> Result<ResonanceResult> {
    let (mut lo, mut hi) = scan;
    if !(lo < hi) || lo <= 0.0 {
        return Err(Error::Bracket(format!("invalid scan interval [{lo}, {hi}]")));
    }
    let gap_at = |wc: f64| -> Result<f64> {
        let h = model.build(&template.with_omega_c(wc), space)?;
        let (a, b) = tracked_pair(&h, space)?;
        Ok(b - a)
    };
    let edge_lo = gap_at(lo)?;
    let edge_hi = gap_at(hi)?;

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = gap_at(x1)?;
    let mut f2 = gap_at(x2)?;
    while hi - lo > 1e-10 * 0.5 * (hi + lo) {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = gap_at(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = gap_at(x2)?;
        }
    }
    let (wc, gap) = if f1 < f2 { (x1, f1) } else { (x2, f2) };
    let width = scan.1 - scan.0;
    if wc - scan.0 < 1e-6 * width || scan.1 - wc < 1e-6 * width || gap >= edge_lo.min(edge_hi) {
        return Err(Error::Bracket(format!("no gap minimum inside [{}, {}]", scan.0, scan.1)));
    }
    if !(gap > 0.0) {
        return Err(Error::Degenerate(format!("vanishing gap at omega_c = {wc}")));
    }
    Ok(ResonanceResult { omega_c_star: wc, omega_eff: -0.5 * gap, gap, method: Method::Numeric })
}

/// Avoided crossing of the anisotropic model.
pub fn find_avoided_crossing(
    template: &SqueezedParams,
    scan: (f64, f64),
    space: FockSpace,
) -> Result<ResonanceResult> {
    find_avoided_crossing_for(RabiModel::Anisotropic, template, scan, space)
}

/// Default scan interval `ω_q/3 ± 0.05 ω_q`.
pub fn default_scan(omega_q: f64) -> (f64, f64) {
    (omega_q / 3.0 - 0.05 * omega_q, omega_q / 3.0 + 0.05 * omega_q)
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplittingRow {
    pub g: f64,
    pub gap_analytic: f64,
    pub gap_numeric: f64,
    pub relative_difference: f64,
}

/// Analytic (`2|Ω_eff|` at `ω_c′(g)`) versus numeric avoided-crossing gap.
pub fn splitting_curve(r: f64, g_values: &[f64], omega_q: f64, space: FockSpace) -> Result<Vec<SplittingRow>> {
    if g_values.is_empty() {
        return Err(Error::Config("empty coupling list".into()));
    }
    if g_values.iter().any(|&g| !(g > 0.0)) || g_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("coupling values must be positive and ascending".into()));
    }
    g_values
        .par_iter()
        .map(|&g| {
            let analytic = analytic_resonance(g, r, omega_q)?;
            let template = SqueezedParams::new(g, r, analytic.omega_c_star, omega_q);
            let numeric = find_avoided_crossing(&template, default_scan(omega_q), space)?;
            Ok(SplittingRow {
                g,
                gap_analytic: analytic.gap,
                gap_numeric: numeric.gap,
                relative_difference: (numeric.gap - analytic.gap).abs() / numeric.gap,
            })
        })
        .collect()
}

/// Full population-oscillation period `2π/ΔE` of the two-level crossing.
pub fn oscillation_period_from_gap(res: &ResonanceResult) -> Result<f64> {
    if !(res.gap > 0.0) {
        return Err(Error::Degenerate("zero gap has no oscillation period".into()));
    }
    Ok(2.0 * std::f64::consts::PI / res.gap)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rabi_frequency_vanishes_without_squeezing() {
        let p = SqueezedParams::new(0.01, 0.0, 1.0 / 3.0, 1.0);
        assert_eq!(effective_rabi_frequency(&p).unwrap(), 0.0);
    }

    #[test]
    fn rabi_frequency_reference_values() {
        let w = effective_rabi_frequency(&SqueezedParams::new(0.01, 0.9, 0.33385, 1.0)).unwrap();
        assert!((w + 1.158e-5).abs() < 1e-8, "{w}");
        let w = effective_rabi_frequency(&SqueezedParams::new(0.06, 0.9, 0.35191, 1.0)).unwrap();
        assert!((w + 2.252e-3).abs() < 1e-6, "{w}");
    }

    #[test]
    fn rabi_frequency_singular() {
        let p = SqueezedParams::new(0.01, 0.9, 0.0, 1.0);
        assert!(matches!(effective_rabi_frequency(&p), Err(Error::SingularFrequency(_))));
    }

    #[test]
    fn resonance_reference_values() {
        assert_eq!(resonance_frequency_analytic(0.0, 0.9, 1.0), 1.0 / 3.0);
        let k = 2.0 * 0.9f64.cosh().powi(2) + 0.9f64.sinh().powi(2);
        assert!((k - 5.16121).abs() < 1e-5);
        assert!((resonance_frequency_analytic(0.01, 0.9, 1.0) - 0.3338494).abs() < 1e-7);
        assert!((resonance_frequency_analytic(0.06, 0.9, 1.0) - 0.3519137).abs() < 1e-7);
    }

    #[test]
    fn subspace_root_agrees_to_second_order() {
        for &g in &[1e-4, 1e-3, 1e-2] {
            let d = resonance_frequency_subspace(g, 0.9, 1.0) - resonance_frequency_analytic(g, 0.9, 1.0);
            // the two differ by 3(2cosh²r + sinh²r)²g⁴ at leading order
            assert!(d.abs() < 100.0 * g.powi(4) + 1e-13, "g = {g}: {d}");
        }
    }

    #[test]
    fn period_inverse_to_gap() {
        let res = ResonanceResult { omega_c_star: 0.33, omega_eff: -1.158e-5, gap: 2.0 * 1.158e-5, method: Method::Analytic };
        let t = oscillation_period_from_gap(&res).unwrap();
        assert!((t - 2.713e5).abs() < 0.01 * 2.713e5);
        let doubled = ResonanceResult { gap: 2.0 * res.gap, ..res };
        assert!((oscillation_period_from_gap(&doubled).unwrap() - t / 2.0).abs() < 1e-9 * t);
        let zero = ResonanceResult { gap: 0.0, ..res };
        assert!(matches!(oscillation_period_from_gap(&zero), Err(Error::Degenerate(_))));
    }

    #[test]
    fn bracket_without_minimum() {
        let space = FockSpace::new(10).unwrap();
        let p = SqueezedParams::new(0.01, 0.9, 0.3, 1.0);
        assert!(matches!(find_avoided_crossing(&p, (0.36, 0.38), space), Err(Error::Bracket(_))));
    }

    #[test]
    fn splitting_curve_rejects_empty() {
        let space = FockSpace::new(10).unwrap();
        assert!(matches!(splitting_curve(0.9, &[], 1.0, space), Err(Error::Config(_))));
    }
}
