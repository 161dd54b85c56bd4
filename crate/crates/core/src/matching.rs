//! Synthesis of the series-L / shunt-C_T matching network and its observables.
//!
//! The source seen by the resonator is the transmission line Z_tx plus the
//! network loss R_L, optionally shunted by the static resistance R₀. With R₀ at
//! the lossless sentinel the shunt is negligible, so the same formulas serve
//! both the plain and the modified BVD models.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::circuit::{DeviceParams, MotionalBranch, StaticBranch};
use crate::error::{require_non_negative, require_positive, Error, Result};
use crate::optomech::{loading_for, sideband_amplitudes, Topology};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatchingObjective {
    MaximizeEfficiency,
    MinimizeNoise,
}

impl MatchingObjective {
    pub const ALL: [MatchingObjective; 2] = [MatchingObjective::MaximizeEfficiency, MatchingObjective::MinimizeNoise];

    pub fn label(&self) -> &'static str {
        match self {
            MatchingObjective::MaximizeEfficiency => "max-eff",
            MatchingObjective::MinimizeNoise => "min-noise",
        }
    }
}

/// A matching network and everything derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchingNetwork {
    /// Matching inductance (H).
    pub l: f64,
    /// Matching capacitance (F).
    pub c_t: f64,
    /// Series loss of the network (Ω).
    pub r_l: f64,
    /// Source resistance seen by the LC transformer (Ω).
    pub r_source: f64,
    /// 1/(2π√(L(C₀+C_T))).
    pub f_lc: f64,
    pub q_lc: f64,
    /// Electrical linewidth (Hz).
    pub kappa_e: f64,
    pub eta_e: f64,
    /// Electromechanical coupling rate (Hz).
    pub g_em: f64,
    pub k_t_sq: f64,
    /// Electromechanical cooperativity as R_EM/R_m.
    pub c_em: f64,
    /// Electromechanical cooperativity as 4g_EM²/(γ_m κ_e).
    pub c_em_from_rates: f64,
    /// Electromechanical loading (Ω).
    pub r_em: f64,
    /// Mechanical resonance pulled by the electrical shunt, f_s√(1 + C_m/(C₀+C_T)) (Hz).
    pub f_m_shifted: f64,
    /// Cavity-enhanced optomechanical rate the network was built for (Hz).
    pub g_om: f64,
}

/// Parallel combination of Z_tx + R_L with R₀.
pub fn effective_source(z_tx: f64, r_l: f64, r0: f64) -> f64 {
    let series = z_tx + r_l;
    series * r0 / (series + r0)
}

fn observables(
    l: f64,
    c_t: f64,
    r_l: f64,
    r_source: f64,
    c0: f64,
    device: &DeviceParams,
    branch: &MotionalBranch,
) -> Result<MatchingNetwork> {
    require_positive("l", l)?;
    require_non_negative("c_t", c_t)?;
    require_non_negative("r_l", r_l)?;

    let shunt = c0 + c_t;
    let series = device.z_tx + r_l;
    let q_lc = (l / shunt).sqrt() / r_source;
    let kappa_e = series / (2.0 * PI * l);
    let k_t_sq = branch.c_m / (branch.c_m + shunt);
    let g_em = k_t_sq.sqrt() * device.f_m / 2.0;
    let r_em = q_lc * q_lc * r_source;
    let gamma_m = branch.linewidth();

    Ok(MatchingNetwork {
        l,
        c_t,
        r_l,
        r_source,
        f_lc: 1.0 / (2.0 * PI * (l * shunt).sqrt()),
        q_lc,
        kappa_e,
        eta_e: device.z_tx / series,
        g_em,
        k_t_sq,
        c_em: r_em / branch.r_m,
        c_em_from_rates: 4.0 * g_em * g_em / (gamma_m * kappa_e),
        r_em,
        f_m_shifted: shifted_resonance(branch, shunt),
        g_om: device.g_om(),
    })
}

/// Observables of a given L, C_T for the plain BVD model (no R₀ shunt).
pub fn network_observables(
    l: f64,
    c_t: f64,
    r_l: f64,
    device: &DeviceParams,
    branch: &MotionalBranch,
) -> Result<MatchingNetwork> {
    observables(l, c_t, r_l, device.z_tx + r_l, device.c0, device, branch)
}

/// Observables of a given L, C_T with the static resistance of `static_branch` in the source.
pub fn network_observables_mbvd(
    l: f64,
    c_t: f64,
    r_l: f64,
    static_branch: &StaticBranch,
    device: &DeviceParams,
    branch: &MotionalBranch,
) -> Result<MatchingNetwork> {
    let r_source = effective_source(device.z_tx, r_l, static_branch.r0);
    observables(l, c_t, r_l, r_source, static_branch.c0, device, branch)
}

/// Closed-form efficiency-maximizing C_T. May be negative.
fn efficiency_capacitance(r_em_opt: f64, branch: &MotionalBranch, c0: f64, r_source: f64) -> f64 {
    let omega_s = 2.0 * PI * branch.series_resonance();
    let c_m = branch.c_m;
    let inner = 4.0 / (r_em_opt * omega_s * omega_s * c_m * c_m * r_source);
    0.5 * c_m * ((1.0 + inner).sqrt() - 1.0) - c0
}

/// Inductance resonating C_m + C₀ + C_T at the series resonance.
pub fn resonant_inductance(branch: &MotionalBranch, c0: f64, c_t: f64) -> f64 {
    let omega_s = 2.0 * PI * branch.series_resonance();
    1.0 / (omega_s * omega_s * (branch.c_m + c0 + c_t))
}

fn shifted_resonance(branch: &MotionalBranch, shunt: f64) -> f64 {
    branch.series_resonance() * (1.0 + branch.c_m / shunt).sqrt()
}

/// L = √(R_EM^opt·R_source)/ω_m′ with ω_m′ the resonance pulled by C₀ + C_T.
/// For the closed-form C_T this coincides with `resonant_inductance`.
fn matched_inductance(r_em_opt: f64, r_source: f64, branch: &MotionalBranch, shunt: f64) -> f64 {
    (r_em_opt * r_source).sqrt() / (2.0 * PI * shifted_resonance(branch, shunt))
}

/// Synthesizes L and C_T for the given objective and required loading `r_em_opt`.
pub fn synthesize(
    objective: MatchingObjective,
    r_em_opt: f64,
    branch: &MotionalBranch,
    static_branch: &StaticBranch,
    device: &DeviceParams,
    r_l: f64,
) -> Result<MatchingNetwork> {
    require_positive("r_em_opt", r_em_opt)?;
    require_non_negative("r_l", r_l)?;
    let r_source = effective_source(device.z_tx, r_l, static_branch.r0);
    let c0 = static_branch.c0;

    let (l, c_t) = match objective {
        MatchingObjective::MaximizeEfficiency => {
            let c_t = efficiency_capacitance(r_em_opt, branch, c0, r_source);
            if !(c_t >= 0.0) {
                return Err(Error::UnphysicalCapacitance {
                    c_t,
                    g_om: device.g_om(),
                });
            }
            (resonant_inductance(branch, c0, c_t), c_t)
        }
        MatchingObjective::MinimizeNoise => (matched_inductance(r_em_opt, r_source, branch, c0), 0.0),
    };
    observables(l, c_t, r_l, r_source, c0, device, branch)
}

/// Same synthesis with a finite static resistance R₀ in the source.
pub fn static_resistance_variant(
    objective: MatchingObjective,
    r_em_opt: f64,
    branch: &MotionalBranch,
    static_branch: &StaticBranch,
    device: &DeviceParams,
    r_l: f64,
) -> Result<MatchingNetwork> {
    require_positive("r0", static_branch.r0)?;
    synthesize(objective, r_em_opt, branch, static_branch, device, r_l)
}

/// Options for [`synthesize_selfconsistent`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfConsistentOptions {
    /// Fraction of each update applied (1 is undamped).
    pub damping: f64,
    /// Stop when successive C_T differ by less than this fraction of C₀ + C_T.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Initial C_T; the closed-form value when `None`.
    pub start_c_t: Option<f64>,
}

impl Default for SelfConsistentOptions {
    fn default() -> Self {
        SelfConsistentOptions {
            damping: 0.5,
            tolerance: 1e-6,
            max_iterations: 100,
            start_c_t: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfConsistentSolution {
    pub network: MatchingNetwork,
    /// Optomechanical loading at the converged, shifted mechanical frequency.
    pub r_em_opt: f64,
    pub iterations: usize,
}

/// Fixed-point synthesis in which the optomechanical loading is re-evaluated at
/// the mechanical frequency pulled by the electrical shunt, f_s√(1 + C_m/(C₀+C_T)).
/// The pump detuning stays where the device puts it.
pub fn synthesize_selfconsistent(
    objective: MatchingObjective,
    topology: Topology,
    branch: &MotionalBranch,
    static_branch: &StaticBranch,
    device: &DeviceParams,
    r_l: f64,
    options: SelfConsistentOptions,
) -> Result<SelfConsistentSolution> {
    require_non_negative("r_l", r_l)?;
    let r_source = effective_source(device.z_tx, r_l, static_branch.r0);
    let c0 = static_branch.c0;
    let g_om = device.g_om();

    let loading_at = |c_t: f64| -> Result<f64> {
        let shunt = c0 + c_t;
        if !(shunt > 0.0) {
            return Err(Error::UnphysicalCapacitance { c_t, g_om });
        }
        let sidebands = sideband_amplitudes(device.kappa_o(), shifted_resonance(branch, shunt), device.detuning)?;
        let loading = loading_for(
            topology,
            branch,
            g_om,
            device.gamma_i,
            device.kappa_o(),
            device.j_coupling,
            sidebands,
        )?;
        Ok(loading.r_em_opt)
    };

    match objective {
        MatchingObjective::MinimizeNoise => {
            let r_em_opt = loading_at(0.0)?;
            let l = matched_inductance(r_em_opt, r_source, branch, c0);
            Ok(SelfConsistentSolution {
                network: observables(l, 0.0, r_l, r_source, c0, device, branch)?,
                r_em_opt,
                iterations: 1,
            })
        }
        MatchingObjective::MaximizeEfficiency => {
            let mut c_t = match options.start_c_t {
                Some(c) => c,
                None => efficiency_capacitance(loading_at(0.0)?, branch, c0, r_source),
            };
            for iteration in 1..=options.max_iterations {
                let r_em_opt = loading_at(c_t)?;
                let next = efficiency_capacitance(r_em_opt, branch, c0, r_source);
                let converged = (next - c_t).abs() < options.tolerance * (c0 + next).abs();
                if converged {
                    if !(next >= 0.0) {
                        return Err(Error::UnphysicalCapacitance { c_t: next, g_om });
                    }
                    let l = resonant_inductance(branch, c0, next);
                    return Ok(SelfConsistentSolution {
                        network: observables(l, next, r_l, r_source, c0, device, branch)?,
                        r_em_opt,
                        iterations: iteration,
                    });
                }
                c_t += options.damping * (next - c_t);
            }
            Err(Error::NoConvergence {
                iterations: options.max_iterations,
            })
        }
    }
}

/// Equivalent series resistance of a lossy capacitor and inductor at f_lc.
/// A zero C_T contributes nothing.
pub fn dielectric_loss(tan_delta: f64, f_lc: f64, l: f64, c_t: f64) -> Result<f64> {
    require_non_negative("tan_delta", tan_delta)?;
    require_positive("f_lc", f_lc)?;
    require_non_negative("l", l)?;
    require_non_negative("c_t", c_t)?;
    let omega = 2.0 * PI * f_lc;
    let capacitor = if c_t > 0.0 { 1.0 / (omega * c_t) } else { 0.0 };
    Ok(tan_delta * (capacitor + omega * l))
}

/// Stray elements of the physical matching components.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ParasiticSpec {
    /// Inductor self-capacitance (F).
    pub c_self: f64,
    /// Inductor capacitance to ground (F).
    pub c_ground: f64,
    /// Stray series inductance of the matching capacitor (H).
    pub l_ct: f64,
}

impl ParasiticSpec {
    /// Total parasitic capacitance in parallel with C_T.
    pub fn c_p(&self) -> f64 {
        self.c_self + self.c_ground
    }

    fn validate(&self) -> Result<()> {
        require_non_negative("c_self", self.c_self)?;
        require_non_negative("c_ground", self.c_ground)?;
        require_non_negative("l_ct", self.l_ct)?;
        Ok(())
    }
}

/// Estimates the parasitics of a physical capacitor `c_t` and inductor `l`.
pub trait ParasiticModel {
    fn estimate(&self, c_t: f64, l: f64) -> ParasiticSpec;
}

/// Fixed parasitics, independent of component values.
impl ParasiticModel for ParasiticSpec {
    fn estimate(&self, _c_t: f64, _l: f64) -> ParasiticSpec {
        *self
    }
}

/// Parasitics that scale with component size: inductor capacitances in
/// proportion to L, capacitor stray inductance in proportion to C_T.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledParasitics {
    /// Self-capacitance per henry of inductance (F/H).
    pub self_per_henry: f64,
    /// Ground capacitance per henry of inductance (F/H).
    pub ground_per_henry: f64,
    /// Stray inductance per farad of capacitance (H/F).
    pub stray_per_farad: f64,
}

impl ParasiticModel for ScaledParasitics {
    fn estimate(&self, c_t: f64, l: f64) -> ParasiticSpec {
        ParasiticSpec {
            c_self: self.self_per_henry * l,
            c_ground: self.ground_per_henry * l,
            l_ct: self.stray_per_farad * c_t,
        }
    }
}

/// Physical components that, together with their parasitics, realize a target network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrectedNetwork {
    pub target: MatchingNetwork,
    pub c_t: f64,
    pub l: f64,
    /// Last parasitic estimate.
    pub parasitics: ParasiticSpec,
    /// Parasitic capacitance actually subtracted; equals `parasitics.c_p()` up to round-off.
    pub applied_c_p: f64,
    /// Parasitic inductance actually subtracted; equals `parasitics.l_ct` up to round-off.
    pub applied_l_ct: f64,
    pub iterations: usize,
}

impl CorrectedNetwork {
    /// The equivalent network seen by the resonator: physical parts plus parasitics.
    pub fn assemble(&self) -> MatchingNetwork {
        MatchingNetwork {
            c_t: self.c_t + self.applied_c_p,
            l: self.l + self.applied_l_ct,
            ..self.target
        }
    }
}

/// Splits `total` into `(total − part, rest)` with `rest` within a few ulps of
/// `part` and the two summing back to `total` exactly.
fn exact_split(total: f64, part: f64) -> (f64, f64) {
    let first = total - part;
    let mut candidates = [first; 5];
    candidates[1] = first.next_up();
    candidates[2] = first.next_down();
    candidates[3] = first.next_up().next_up();
    candidates[4] = first.next_down().next_down();
    for value in candidates {
        let rest = total - value;
        if value + rest == total {
            return (value, rest);
        }
    }
    (first, part)
}

/// Subtracts parasitics from the target C_T′ and L′, re-estimating them from the
/// physical components on each pass.
pub fn parasitic_correction(
    target: &MatchingNetwork,
    model: &impl ParasiticModel,
    iterations: usize,
) -> Result<CorrectedNetwork> {
    if iterations == 0 {
        return Err(Error::Domain {
            field: "iterations",
            value: 0.0,
            reason: "at least one pass is required",
        });
    }
    let mut c_t = target.c_t;
    let mut l = target.l;
    let mut parasitics = ParasiticSpec::default();
    let mut applied_c_p = 0.0;
    let mut applied_l_ct = 0.0;
    for _ in 0..iterations {
        parasitics = model.estimate(c_t, l);
        parasitics.validate()?;
        (c_t, applied_c_p) = exact_split(target.c_t, parasitics.c_p());
        (l, applied_l_ct) = exact_split(target.l, parasitics.l_ct);
        if c_t < 0.0 {
            return Err(Error::UnphysicalCapacitance { c_t, g_om: target.g_om });
        }
        if !(l > 0.0) {
            return Err(Error::UnphysicalInductance { l });
        }
    }
    Ok(CorrectedNetwork {
        target: *target,
        c_t,
        l,
        parasitics,
        applied_c_p,
        applied_l_ct,
        iterations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Validity {
    /// κ_o/f_s.
    pub ratio: f64,
    pub k_eff_sq: f64,
    /// False when k²_eff exceeds a tenth of the ratio.
    pub ok: bool,
}

/// Checks the weak-coupling assumption behind the closed-form synthesis.
pub fn validity_check(k_eff_sq: f64, kappa_o: f64, f_s: f64) -> Result<Validity> {
    require_positive("k_eff_sq", k_eff_sq)?;
    require_positive("kappa_o", kappa_o)?;
    require_positive("f_s", f_s)?;
    let ratio = kappa_o / f_s;
    Ok(Validity {
        ratio,
        k_eff_sq,
        ok: k_eff_sq <= 0.1 * ratio,
    })
}
