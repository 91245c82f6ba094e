//! Parameter frames and Hamiltonian builders.
//!
//! The lab frame describes a parametrically driven Jaynes-Cummings system in
//! the frame rotating at half the drive frequency. Conjugating with the
//! squeeze operator `S(r)`, with `tanh 2r = λ/δ_c`, removes the two-photon
//! drive and leaves an anisotropic Rabi model whose rotating (`λ₂ = g cosh r`)
//! and counter-rotating (`λ₁ = g sinh r`) couplings differ.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{build_operators, FockSpace, OperatorSet, QOperator};

/// Lab-frame parameters, in units of the qubit frequency.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabParams {
    pub delta_c: f64,
    pub delta_q: f64,
    pub lambda_p: f64,
    pub g: f64,
}

impl LabParams {
    pub fn new(delta_c: f64, delta_q: f64, lambda_p: f64, g: f64) -> Result<Self> {
        let p = Self { delta_c, delta_q, lambda_p, g };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta_c.abs() > self.lambda_p.abs()) {
            return Err(Error::Instability { delta_c: self.delta_c, lambda: self.lambda_p });
        }
        if !(self.g > 0.0) {
            return Err(Error::Config(format!("coupling g = {} must be positive", self.g)));
        }
        Ok(())
    }
}

/// Squeezed-frame parameters of the anisotropic Rabi model.
///
/// `omega_q` doubles as the qubit detuning `δ_q` of the lab frame: the
/// squeeze transformation leaves the qubit term untouched.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqueezedParams {
    r: f64,
    g: f64,
    omega_c: f64,
    omega_q: f64,
    lambda1: f64,
    lambda2: f64,
}

impl SqueezedParams {
    pub fn new(g: f64, r: f64, omega_c: f64, omega_q: f64) -> Self {
        Self { r, g, omega_c, omega_q, lambda1: g * r.sinh(), lambda2: g * r.cosh() }
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn omega_c(&self) -> f64 {
        self.omega_c
    }

    pub fn omega_q(&self) -> f64 {
        self.omega_q
    }

    /// Counter-rotating coupling `g sinh r`.
    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    /// Rotating coupling `g cosh r`.
    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    /// `Δ = ω_q + ω_c`
    pub fn delta_sum(&self) -> f64 {
        self.omega_q + self.omega_c
    }

    /// `δ = ω_q − ω_c`
    pub fn delta_diff(&self) -> f64 {
        self.omega_q - self.omega_c
    }

    pub fn with_omega_c(&self, omega_c: f64) -> Self {
        Self { omega_c, ..*self }
    }
}

pub fn lab_to_squeezed(p: &LabParams) -> Result<SqueezedParams> {
    p.validate()?;
    let r = 0.5 * (p.lambda_p / p.delta_c).atanh();
    let omega_c = p.delta_c / (2.0 * r).cosh();
    Ok(SqueezedParams::new(p.g, r, omega_c, p.delta_q))
}

pub fn squeezed_to_lab(p: &SqueezedParams) -> LabParams {
    let delta_c = p.omega_c * (2.0 * p.r).cosh();
    LabParams { delta_c, delta_q: p.omega_q, lambda_p: delta_c * (2.0 * p.r).tanh(), g: p.g }
}

/// Constant `E_lab − E_squeezed` picked up by the cavity term under the
/// squeeze transformation: `S†(δ_c a†a − λ/2 (a†² + a²))S = ω_c a†a + (ω_c − δ_c)/2`.
pub fn frame_energy_offset(p: &LabParams) -> Result<f64> {
    let sq = lab_to_squeezed(p)?;
    Ok(0.5 * (sq.omega_c - p.delta_c))
}

/// `H = δ_c a†a + (δ_q/2)σ_z − (λ/2)(a†² + a²) + g(a†σ_− + aσ_+)`
pub fn build_lab_hamiltonian(p: &LabParams, space: FockSpace) -> Result<QOperator> {
    p.validate()?;
    let o = build_operators(space);
    let drive = &(&o.a_dag * &o.a_dag) + &(&o.a * &o.a);
    let coupling = &(&o.a_dag * &o.sm) + &(&o.a * &o.sp);
    let h = &(&(&o.n_op.scale(p.delta_c) + &o.sz.scale(0.5 * p.delta_q)) - &drive.scale(0.5 * p.lambda_p))
        + &coupling.scale(p.g);
    h.into_hermitian()
}

fn rotating(o: &OperatorSet) -> QOperator {
    &(&o.a * &o.sp) + &(&o.a_dag * &o.sm)
}

fn counter_rotating(o: &OperatorSet) -> QOperator {
    &(&o.a_dag * &o.sp) + &(&o.a * &o.sm)
}

/// Everything in `H_aR` except the `ω_c a†a` term, together with `a†a`.
/// Used by the frequency sweep, where only `ω_c` changes in time.
pub fn anisotropic_rabi_parts(p: &SqueezedParams, space: FockSpace) -> Result<(QOperator, QOperator)> {
    let o = build_operators(space);
    let rest = &(&o.sz.scale(0.5 * p.omega_q) + &counter_rotating(&o).scale(p.lambda1))
        + &rotating(&o).scale(p.lambda2);
    Ok((rest.into_hermitian()?, o.n_op))
}

/// `H_aR = ω_c a†a + (ω_q/2)σ_z + λ₁(a†σ_+ + aσ_−) + λ₂(aσ_+ + a†σ_−)`
pub fn build_anisotropic_rabi(p: &SqueezedParams, space: FockSpace) -> Result<QOperator> {
    let (rest, n_op) = anisotropic_rabi_parts(p, space)?;
    (&rest + &n_op.scale(p.omega_c)).into_hermitian()
}

/// Second- plus third-order effective Hamiltonian near the three-photon
/// resonance `ω_q ≈ 3ω_c`.
pub fn build_effective_hamiltonian(p: &SqueezedParams, space: FockSpace) -> Result<QOperator> {
    let wc = p.omega_c;
    if wc == 0.0 || !wc.is_finite() {
        return Err(Error::SingularFrequency(wc));
    }
    if p.lambda2 / p.delta_diff().abs() > 0.1 {
        log::warn!(
            "outside the dispersive regime: lambda2/delta = {:.3}",
            p.lambda2 / p.delta_diff().abs()
        );
    }
    let o = build_operators(space);
    let (l1, l2) = (p.lambda1, p.lambda2);
    let n_sz = &o.n_op * &o.sz;
    let second = &(&n_sz + &o.proj_e()).scale(l2 * l2 / (2.0 * wc))
        + &(&n_sz - &o.proj_g()).scale(l1 * l1 / (4.0 * wc));
    let a3 = &(&o.a * &o.a) * &o.a;
    let a3_dag = a3.dagger();
    let third = (&(&a3_dag * &o.sm) + &(&a3 * &o.sp)).scale(-l1 * l2 * l2 / (4.0 * wc * wc));
    let h = &(&(&o.n_op.scale(wc) + &o.sz.scale(0.5 * p.omega_q)) + &second) + &third;
    h.into_hermitian()
}

/// Split `H_aR` into the isotropic Rabi part, with coupling `(g/2)e^r`, and
/// the anisotropic remainder, with coupling `−(g/2)e^{−r}`.
pub fn decompose_rabi(p: &SqueezedParams, space: FockSpace) -> Result<(QOperator, QOperator)> {
    let o = build_operators(space);
    let x = &o.a_dag + &o.a;
    let sx = &o.sp + &o.sm;
    let iso = &(&o.n_op.scale(p.omega_c) + &o.sz.scale(0.5 * p.omega_q))
        + &(&x * &sx).scale(0.5 * p.g * p.r.exp());
    let y = &o.a_dag - &o.a;
    let sy = &o.sp - &o.sm;
    let aniso = (&y * &sy).scale(-0.5 * p.g * (-p.r).exp());
    Ok((iso.into_hermitian()?, aniso.into_hermitian()?))
}

/// The isotropic comparison model on its own.
pub fn build_isotropic_rabi(p: &SqueezedParams, space: FockSpace) -> Result<QOperator> {
    decompose_rabi(p, space).map(|(iso, _)| iso)
}
