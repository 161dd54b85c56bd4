//! Conversion figures of merit: efficiency, bandwidth and added noise.

use serde::{Deserialize, Serialize};

use crate::error::{require_non_negative, require_positive, Error, Result};
use crate::optomech::{OptomechLoading, Topology};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiguresOfMerit {
    pub eta_standard: f64,
    pub eta_alt: f64,
    /// Conversion bandwidth (Hz).
    pub bandwidth: f64,
    /// Raman (Stokes) noise quanta per transduced photon.
    pub n_raman: f64,
    /// Thermal noise quanta per transduced photon.
    pub n_thermal: f64,
    pub eta_o: f64,
}

/// η_o = κ_ext/(κ_ext + κ_i).
pub fn optical_coupling_efficiency(kappa_ext: f64, kappa_i: f64) -> Result<f64> {
    require_non_negative("kappa_ext", kappa_ext)?;
    require_non_negative("kappa_i", kappa_i)?;
    let total = kappa_ext + kappa_i;
    if !(total > 0.0) {
        return Err(Error::Domain {
            field: "kappa_ext + kappa_i",
            value: total,
            reason: "total optical linewidth must be positive",
        });
    }
    Ok(kappa_ext / total)
}

/// Low-cooperativity transmission efficiency
/// η_e η_o·4C_EM C 𝓛₊²/(1 + C_EM + C(𝓛₊² − 𝓛₋²))², with C = C_OM or C_OM^eq.
pub fn efficiency_standard(eta_e: f64, eta_o: f64, loading: &OptomechLoading, c_em: f64) -> Result<f64> {
    require_non_negative("c_em", c_em)?;
    let s = &loading.sidebands;
    let c = loading.effective_c_om();
    let denom = 1.0 + c_em + c * s.imbalance();
    Ok(eta_e * eta_o * 4.0 * c_em * c * s.upper / (denom * denom))
}

/// Matching-independent efficiency. One ring: η_e η_o C_OM 𝓛₊²/(C_OM(𝓛₊² − 𝓛₋²) + 1);
/// two rings: η_e η_o C_OM/(√(C_OM + 1) + 1)².
pub fn efficiency_alternative(eta_e: f64, eta_o: f64, loading: &OptomechLoading) -> f64 {
    let c = loading.c_om;
    match loading.topology {
        Topology::OneRing => {
            let s = &loading.sidebands;
            eta_e * eta_o * c * s.upper / (c * s.imbalance() + 1.0)
        }
        Topology::TwoRing => {
            let root = (c + 1.0).sqrt() + 1.0;
            eta_e * eta_o * c / (root * root)
        }
    }
}

/// Broadened mechanical linewidth γ_m(1 + C_EM + C(𝓛₊² − 𝓛₋²)) in Hz.
pub fn bandwidth(gamma_m: f64, c_em: f64, loading: &OptomechLoading) -> Result<f64> {
    require_positive("gamma_m", gamma_m)?;
    require_non_negative("c_em", c_em)?;
    Ok(gamma_m * (1.0 + c_em + loading.effective_c_om() * loading.sidebands.imbalance()))
}

/// n_o = C 𝓛₋²/(η_e C_EM).
pub fn raman_noise(eta_e: f64, loading: &OptomechLoading, c_em: f64) -> Result<f64> {
    require_positive("eta_e", eta_e)?;
    require_positive("c_em", c_em)?;
    Ok(loading.effective_c_om() * loading.sidebands.lower / (eta_e * c_em))
}

/// n_th = n_m/(η_e C_EM).
pub fn thermal_noise(eta_e: f64, n_m: f64, c_em: f64) -> Result<f64> {
    require_positive("eta_e", eta_e)?;
    require_non_negative("n_m", n_m)?;
    require_positive("c_em", c_em)?;
    Ok(n_m / (eta_e * c_em))
}

/// Every figure of merit for one loading and matching network.
pub fn figures_of_merit(
    eta_e: f64,
    eta_o: f64,
    gamma_m: f64,
    n_m: f64,
    loading: &OptomechLoading,
    c_em: f64,
) -> Result<FiguresOfMerit> {
    Ok(FiguresOfMerit {
        eta_standard: efficiency_standard(eta_e, eta_o, loading, c_em)?,
        eta_alt: efficiency_alternative(eta_e, eta_o, loading),
        bandwidth: bandwidth(gamma_m, c_em, loading)?,
        n_raman: raman_noise(eta_e, loading, c_em)?,
        n_thermal: thermal_noise(eta_e, n_m, c_em)?,
        eta_o,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{motional_elements, thermal_occupancy};
    use crate::optomech::{one_ring_loading, sideband_amplitudes, two_ring_loading, SidebandAmplitudes};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const GAMMA: f64 = 2.6e6;
    const ETA_O: f64 = 125.0 / 150.0;

    fn one_ring(g_om: f64) -> OptomechLoading {
        let b = motional_elements(4.3e-3, 200e-15, 3.285e9, GAMMA).unwrap();
        let s = sideband_amplitudes(150e6, 3.285e9, -3.285e9).unwrap();
        one_ring_loading(&b, g_om, GAMMA, 150e6, s).unwrap()
    }

    fn two_ring() -> OptomechLoading {
        let b = motional_elements(4.3e-3, 200e-15, 3.285e9, GAMMA).unwrap();
        let s = sideband_amplitudes(150e6, 3.285e9, -3.285e9).unwrap();
        two_ring_loading(&b, 10e6, GAMMA, 150e6, 1.7e9, s).unwrap()
    }

    fn matched_c_em(l: &OptomechLoading) -> f64 {
        1.0 + l.c_om * l.sidebands.imbalance()
    }

    #[test]
    fn coupling_efficiency() {
        assert_relative_eq!(optical_coupling_efficiency(125e6, 25e6).unwrap(), 0.833_333_3, max_relative = 1e-6);
        assert_eq!(optical_coupling_efficiency(0.0, 25e6).unwrap(), 0.0);
        assert_eq!(optical_coupling_efficiency(25e6, 25e6).unwrap(), 0.5);
        assert!(optical_coupling_efficiency(0.0, 0.0).is_err());
    }

    #[test]
    fn reference_efficiencies() {
        let l = one_ring(10e6);
        assert_relative_eq!(efficiency_standard(1.0, ETA_O, &l, 2.025).unwrap(), 0.42197, max_relative = 5e-3);
        assert_relative_eq!(efficiency_standard(1.0, ETA_O, &l, 7.304).unwrap(), 0.28688, max_relative = 5e-3);
        assert_relative_eq!(efficiency_alternative(1.0, ETA_O, &l), 0.42197, max_relative = 5e-3);
        assert_relative_eq!(efficiency_alternative(1.0, ETA_O, &two_ring()), 0.14556, max_relative = 5e-3);
        let off = one_ring(0.0);
        assert_eq!(efficiency_standard(1.0, ETA_O, &off, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn alternative_saturates() {
        let mut l = one_ring(10e6);
        l.sidebands = SidebandAmplitudes { upper: 1.0, lower: 0.0 };
        l.c_om = 1e12;
        assert_relative_eq!(efficiency_alternative(0.9, ETA_O, &l), 0.9 * ETA_O, max_relative = 1e-6);
    }

    #[test]
    fn reference_bandwidth() {
        let l = one_ring(10e6);
        assert_relative_eq!(bandwidth(GAMMA, 2.025, &l).unwrap(), 10.533e6, max_relative = 5e-3);
        assert_relative_eq!(bandwidth(GAMMA, 7.304, &l).unwrap(), 24.257e6, max_relative = 5e-3);
        assert_eq!(bandwidth(GAMMA, 0.0, &one_ring(0.0)).unwrap(), GAMMA);
    }

    #[test]
    fn reference_noise() {
        let l = one_ring(10e6);
        assert_relative_eq!(raman_noise(1.0, &l, 2.025).unwrap(), 6.598e-5, max_relative = 1e-2);
        assert_relative_eq!(raman_noise(1.0, &l, 7.304).unwrap(), 1.829e-5, max_relative = 1e-2);
        let clean = OptomechLoading {
            sidebands: SidebandAmplitudes { upper: 1.0, lower: 0.0 },
            ..l
        };
        assert_eq!(raman_noise(1.0, &clean, 2.0).unwrap(), 0.0);

        let n_m = thermal_occupancy(3.285e9, 0.05).unwrap();
        assert_relative_eq!(thermal_noise(1.0, n_m, 2.025).unwrap(), 2.203e-2, max_relative = 1e-2);
        assert_relative_eq!(thermal_noise(1.0, n_m, 7.304).unwrap(), 6.110e-3, max_relative = 1e-2);
        assert_eq!(thermal_noise(1.0, 0.0, 2.0).unwrap(), 0.0);
        assert!(thermal_noise(1.0, n_m, 0.0).is_err());
    }

    #[test]
    fn matched_point_identity() {
        let l = one_ring(10e6);
        let c = matched_c_em(&l);
        let std = efficiency_standard(1.0, ETA_O, &l, c).unwrap();
        let alt = efficiency_alternative(1.0, ETA_O, &l);
        assert_relative_eq!(std, alt, max_relative = 1e-6);
    }

    proptest! {
        #[test]
        fn matched_point_is_optimal(g in 1e5f64..4e7, eta_e in 0.1f64..1.0) {
            let l = one_ring(g);
            let best = matched_c_em(&l);
            let at_best = efficiency_standard(eta_e, ETA_O, &l, best).unwrap();
            let alt = efficiency_alternative(eta_e, ETA_O, &l);
            prop_assert!((at_best - alt).abs() <= 1e-6 * alt);
            for k in 1..200 {
                let c = 0.05 * k as f64;
                prop_assert!(efficiency_standard(eta_e, ETA_O, &l, c).unwrap() <= at_best * (1.0 + 1e-12));
            }
        }

        #[test]
        fn thermal_inverse(eta_e in 0.01f64..1.0, n_m in 0.0f64..10.0, c_em in 1e-3f64..100.0) {
            let n = thermal_noise(eta_e, n_m, c_em).unwrap();
            prop_assert!((n * c_em * eta_e - n_m).abs() <= 1e-12 * n_m.max(1e-300));
        }

        #[test]
        fn larger_c_em_is_quieter(g in 1e5f64..4e7, c in 0.1f64..10.0, extra in 0.01f64..10.0) {
            let l = one_ring(g);
            prop_assert!(raman_noise(1.0, &l, c + extra).unwrap() < raman_noise(1.0, &l, c).unwrap());
            prop_assert!(thermal_noise(1.0, 0.04, c + extra).unwrap() < thermal_noise(1.0, 0.04, c).unwrap());
        }
    }
}
