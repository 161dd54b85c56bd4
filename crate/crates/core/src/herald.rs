//! Analytic heralding: emission statistics, fidelities and rates for one-photon
//! (Type-I), two-photon time-bin (Type-II) and blue-detuned protocols.
//!
//! Both nodes are taken to be identical, so P₀₁ = P₁₀ = P₁P₀ and P₀₀ = P₀².

use serde::{Deserialize, Serialize};

use crate::error::{require_non_negative, require_positive, require_probability, Error, Result};
use crate::optomech::Topology;

/// Excursions outside [0, 1] below this size are treated as round-off.
pub const PROBABILITY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    TypeI,
    TypeII,
    BlueDetuned,
}

impl Protocol {
    pub fn label(&self) -> &'static str {
        match self {
            Protocol::TypeI => "type1",
            Protocol::TypeII => "type2",
            Protocol::BlueDetuned => "blue",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub protocol: Protocol,
    /// Per-photon link transmission η_l.
    pub eta_link: f64,
    pub eta_det: f64,
    /// Qubit reset time t_r (s).
    pub t_reset: f64,
    /// Time-bin separation (s); Δt + t_r when `None`.
    pub t_sep: Option<f64>,
    pub topology: Topology,
}

impl ProtocolConfig {
    pub fn new(protocol: Protocol, topology: Topology) -> Self {
        ProtocolConfig {
            protocol,
            eta_link: 0.5,
            eta_det: 0.9,
            t_reset: 1e-6,
            t_sep: None,
            topology,
        }
    }

    pub fn validate(&self) -> Result<()> {
        require_probability("eta_link", self.eta_link)?;
        require_probability("eta_det", self.eta_det)?;
        require_non_negative("t_reset", self.t_reset)?;
        if let Some(t_sep) = self.t_sep {
            require_non_negative("t_sep", t_sep)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolOutcome {
    pub protocol: Protocol,
    /// Transduction time Δt (s).
    pub dt: f64,
    /// Optical photon emission rate (Hz).
    pub r_o: f64,
    pub p1: f64,
    pub p_single: f64,
    pub p_th: f64,
    pub p01: f64,
    pub p_succ: f64,
    /// n_r for one-photon protocols, n_r′ for Type-II (Hz).
    pub n_rate: f64,
    pub tau_ent: f64,
    /// Readout fidelity; absent for the blue-detuned protocol.
    pub fidelity: Option<f64>,
    /// Probability of an infidelity-causing herald; blue-detuned protocol only.
    pub p_infidelity: Option<f64>,
}

/// Accepts `value` in [0, 1], clamps round-off excursions and rejects the rest.
/// NaN passes through untouched.
pub fn clamp_probability(what: &'static str, value: f64) -> Result<f64> {
    if value.is_nan() || (0.0..=1.0).contains(&value) {
        Ok(value)
    } else if value < 0.0 && value > -PROBABILITY_SLACK {
        Ok(0.0)
    } else if value > 1.0 && value < 1.0 + PROBABILITY_SLACK {
        Ok(1.0)
    } else {
        Err(Error::Consistency { what, value })
    }
}

/// Δt = 1/g_EM + 1/g_OM + 1/κ_ext, plus 1/J for two rings. Rates in Hz, result in s.
pub fn transduction_time(
    g_em: f64,
    g_om: f64,
    kappa_ext: f64,
    j_coupling: Option<f64>,
    topology: Topology,
) -> Result<f64> {
    require_positive("g_em", g_em)?;
    require_positive("g_om", g_om)?;
    require_positive("kappa_ext", kappa_ext)?;
    let base = 1.0 / g_em + 1.0 / g_om + 1.0 / kappa_ext;
    match topology {
        Topology::OneRing => Ok(base),
        Topology::TwoRing => {
            let j = j_coupling.ok_or(Error::Domain {
                field: "j_coupling",
                value: f64::NAN,
                reason: "required for two rings",
            })?;
            Ok(base + 1.0 / require_positive("j_coupling", j)?)
        }
    }
}

/// r_o = 4g_OM²κ_ext/(κ_ext + κ_i)².
pub fn photon_rate(g_om: f64, kappa_ext: f64, kappa_i: f64) -> Result<f64> {
    require_non_negative("g_om", g_om)?;
    require_non_negative("kappa_ext", kappa_ext)?;
    require_non_negative("kappa_i", kappa_i)?;
    let kappa_o = require_positive("kappa_ext + kappa_i", kappa_ext + kappa_i)?;
    Ok(4.0 * g_om * g_om * kappa_ext / (kappa_o * kappa_o))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmissionProbabilities {
    /// At least one photon in the window.
    pub p1: f64,
    /// Exactly one photon in the window.
    pub p_single: f64,
    /// Thermally seeded emission.
    pub p_th: f64,
}

pub fn emission_probabilities(r_o: f64, dt: f64, n_th: f64) -> Result<EmissionProbabilities> {
    require_non_negative("r_o", r_o)?;
    require_positive("dt", dt)?;
    require_non_negative("n_th", n_th)?;
    let x = r_o * dt;
    Ok(EmissionProbabilities {
        p1: clamp_probability("p1", -(-x).exp_m1())?,
        p_single: clamp_probability("p_single", x * (-x).exp())?,
        p_th: clamp_probability("p_th", -(-x * n_th).exp_m1())?,
    })
}

/// Noise-free Type-I fidelity 2P₀₁/(P₁²(1 − η_l) + 2P₀₁), with P₀₁ = P₁(1 − P₁).
/// P₁ = 0 returns the limit 1.
pub fn type1_fidelity_noiseless(p1: f64, eta_link: f64) -> Result<f64> {
    require_probability("p1", p1)?;
    require_probability("eta_link", eta_link)?;
    if p1 == 0.0 {
        return Ok(1.0);
    }
    let p01 = p1 * (1.0 - p1);
    let desired = 2.0 * p01;
    clamp_probability("type-I fidelity", desired / (p1 * p1 * (1.0 - eta_link) + desired))
}

/// Type-I fidelity with thermal false positives. NaN when every term vanishes.
pub fn type1_fidelity_noisy(p1: f64, p_th: f64, eta_link: f64) -> Result<f64> {
    require_probability("p1", p1)?;
    require_probability("p_th", p_th)?;
    require_probability("eta_link", eta_link)?;
    let p0 = 1.0 - p1;
    let p01 = p1 * p0;
    let p00 = p0 * p0;
    let q = 1.0 - p_th;
    let desired = 2.0 * p01 * q * q;
    let lossy = p1 * p1 * q * q + 2.0 * p01 * p_th * q + p00 * p_th * p_th;
    let denom = lossy * (1.0 - eta_link) + 2.0 * p00 * p_th * q + desired;
    clamp_probability("type-I fidelity", desired / denom)
}

/// Type-II fidelity; link loss cancels. NaN when every term vanishes.
pub fn type2_fidelity_noisy(p1: f64, p_th: f64) -> Result<f64> {
    require_probability("p1", p1)?;
    require_probability("p_th", p_th)?;
    let p0 = 1.0 - p1;
    let p01 = p1 * p0;
    let p00 = p0 * p0;
    let q = 1.0 - p_th;
    let desired = 2.0 * p1 * p1 * q * q;
    let denom = 8.0 * p01 * p_th * q + 4.0 * p00 * p_th * p_th + desired;
    clamp_probability("type-II fidelity", desired / denom)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub n_rate: f64,
    pub tau_ent: f64,
    pub p_succ: f64,
}

/// Photon and entanglement generation rates.
///
/// n_r = 2r_o e^{−r_oΔt}Δt/(Δt + t_r). Type-II needs two emissions, so
/// 1/n_r′ = 2/n_r + t_sep − (Δt + t_r) and both efficiencies enter squared.
/// The blue-detuned protocol heralds on one photon and uses the Type-I rates.
pub fn rates(
    r_o: f64,
    dt: f64,
    t_reset: f64,
    protocol: Protocol,
    eta_link: f64,
    eta_det: f64,
    t_sep: Option<f64>,
) -> Result<Rates> {
    require_non_negative("r_o", r_o)?;
    require_positive("dt", dt)?;
    require_non_negative("t_reset", t_reset)?;
    require_probability("eta_link", eta_link)?;
    require_probability("eta_det", eta_det)?;

    let x = r_o * dt;
    let n_r = 2.0 * r_o * (-x).exp() * dt / (dt + t_reset);
    let p1 = -(-x).exp_m1();
    let p_succ = clamp_probability("p_succ", p1 * eta_link * eta_det)?;
    let transmission = eta_link * eta_det;

    match protocol {
        Protocol::TypeI | Protocol::BlueDetuned => Ok(Rates {
            n_rate: n_r,
            tau_ent: n_r * transmission,
            p_succ,
        }),
        Protocol::TypeII => {
            let t_sep = t_sep.unwrap_or(dt + t_reset);
            if t_sep < dt {
                return Err(Error::Domain {
                    field: "t_sep",
                    value: t_sep,
                    reason: "time-bin separation must not be shorter than the transduction time",
                });
            }
            let n_prime = if n_r > 0.0 {
                1.0 / (2.0 / n_r + t_sep - (dt + t_reset))
            } else {
                0.0
            };
            Ok(Rates {
                n_rate: n_prime,
                tau_ent: n_prime * transmission * transmission,
                p_succ,
            })
        }
    }
}

/// Simplified comparison curves (F_I, F_II) as functions of P_th alone.
pub fn asymptotic_fidelities(p_th: f64, eta_link: f64) -> Result<(f64, f64)> {
    require_probability("p_th", p_th)?;
    require_probability("eta_link", eta_link)?;
    let q = 1.0 - p_th;
    let f1 = 2.0 * q * q / (q * q * (3.0 - eta_link) + p_th * q * (3.0 - eta_link) + p_th * p_th * (1.0 - eta_link));
    let f2 = -q * q / (p_th * p_th - 2.0 * p_th - 1.0);
    Ok((clamp_probability("simplified type-I fidelity", f1)?, clamp_probability("simplified type-II fidelity", f2)?))
}

/// Probability of an infidelity-causing herald for blue-detuned pair generation.
pub fn blue_detuned_infidelity(p0: f64, p1: f64, eta_link: f64) -> Result<f64> {
    require_probability("p0", p0)?;
    require_probability("p1", p1)?;
    require_probability("eta_link", eta_link)?;
    let multi = 1.0 - p0 - p1;
    if multi < -PROBABILITY_SLACK {
        return Err(Error::Domain {
            field: "p0 + p1",
            value: p0 + p1,
            reason: "emission probabilities exceed 1",
        });
    }
    let multi = multi.max(0.0);
    let lost_one = eta_link * (1.0 - eta_link);
    let value = p1 * p1 * lost_one + 2.0 * p1 * multi * eta_link + 2.0 * p1 * multi * lost_one + multi * multi * lost_one;
    clamp_probability("blue-detuned infidelity", value)
}

/// Full outcome of one protocol at one operating point.
#[allow(clippy::too_many_arguments)]
pub fn protocol_outcome(
    config: &ProtocolConfig,
    g_em: f64,
    g_om: f64,
    kappa_ext: f64,
    kappa_i: f64,
    j_coupling: f64,
    n_th: f64,
) -> Result<ProtocolOutcome> {
    config.validate()?;
    let dt = transduction_time(g_em, g_om, kappa_ext, Some(j_coupling), config.topology)?;
    let r_o = photon_rate(g_om, kappa_ext, kappa_i)?;
    let e = emission_probabilities(r_o, dt, n_th)?;
    let r = rates(
        r_o,
        dt,
        config.t_reset,
        config.protocol,
        config.eta_link,
        config.eta_det,
        config.t_sep,
    )?;
    let p01 = e.p1 * (1.0 - e.p1);

    let (fidelity, p_infidelity) = match config.protocol {
        Protocol::TypeI => (Some(type1_fidelity_noisy(e.p1, e.p_th, config.eta_link)?), None),
        Protocol::TypeII => (Some(type2_fidelity_noisy(e.p1, e.p_th)?), None),
        Protocol::BlueDetuned => {
            let p0 = (-(r_o * dt)).exp();
            (None, Some(blue_detuned_infidelity(p0, e.p_single, config.eta_link)?))
        }
    };

    Ok(ProtocolOutcome {
        protocol: config.protocol,
        dt,
        r_o,
        p1: e.p1,
        p_single: e.p_single,
        p_th: e.p_th,
        p01,
        p_succ: r.p_succ,
        n_rate: r.n_rate,
        tau_ent: r.tau_ent,
        fidelity,
        p_infidelity,
    })
}
