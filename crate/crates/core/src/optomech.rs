//! Optomechanical loading of the acoustic mode.
//!
//! The optical side appears in the circuit as a pair of resistors on the
//! motional arm: a positive one from the anti-Stokes (upper) sideband and a
//! negative one from the Stokes (lower) sideband. A second, hybridized ring
//! adds an optical–optical leg in parallel.

use serde::{Deserialize, Serialize};

use crate::circuit::MotionalBranch;
use crate::error::{require_non_negative, require_positive, Error, Result};

/// Lorentzian weights 𝓛₊² and 𝓛₋².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SidebandAmplitudes {
    pub upper: f64,
    pub lower: f64,
}

impl SidebandAmplitudes {
    /// 𝓛₊² − 𝓛₋².
    pub fn imbalance(&self) -> f64 {
        self.upper - self.lower
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Topology {
    OneRing,
    TwoRing,
}

impl Topology {
    pub const ALL: [Topology; 2] = [Topology::OneRing, Topology::TwoRing];

    pub fn label(&self) -> &'static str {
        match self {
            Topology::OneRing => "one-ring",
            Topology::TwoRing => "two-ring",
        }
    }
}

/// Extra terms present only for the coupled-ring (photonic molecule) device.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoleculeLoading {
    /// Optical–optical cooperativity C_OO.
    pub c_oo: f64,
    pub r_oo_plus: f64,
    pub r_oo_minus: f64,
    /// Parallel combination of the optomechanical and optical–optical legs.
    pub r_om_eq: f64,
    pub c_om_eq: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptomechLoading {
    pub topology: Topology,
    pub sidebands: SidebandAmplitudes,
    /// Optomechanical cooperativity C_OM.
    pub c_om: f64,
    pub r_om_plus: f64,
    pub r_om_minus: f64,
    pub molecule: Option<MoleculeLoading>,
    /// Total loading R_EM^opt that the matching network must present.
    pub r_em_opt: f64,
}

impl OptomechLoading {
    /// C_OM for one ring, C_OM^eq for two.
    pub fn effective_c_om(&self) -> f64 {
        match &self.molecule {
            Some(m) => m.c_om_eq,
            None => self.c_om,
        }
    }

    /// Net optomechanical resistance added to the motional arm.
    pub fn net_resistance(&self) -> f64 {
        match &self.molecule {
            Some(m) => m.r_om_eq,
            None => self.r_om_plus - self.r_om_minus,
        }
    }
}

/// 𝓛±² = (κ_o/2)²/((κ_o/2)² + (f_m ± Δ)²). All arguments in Hz; the ratio is
/// scale-free, so the 2π factors cancel.
pub fn sideband_amplitudes(kappa_o: f64, f_m: f64, detuning: f64) -> Result<SidebandAmplitudes> {
    require_positive("kappa_o", kappa_o)?;
    require_non_negative("f_m", f_m)?;
    let half = 0.5 * kappa_o;
    let lorentzian = |offset: f64| half * half / (half * half + offset * offset);
    Ok(SidebandAmplitudes {
        upper: lorentzian(f_m + detuning),
        lower: lorentzian(f_m - detuning),
    })
}

/// C_OM = 4g²/(γ_m κ_o).
pub fn optomechanical_cooperativity(g_om: f64, gamma_m: f64, kappa_o: f64) -> Result<f64> {
    require_non_negative("g_om", g_om)?;
    require_positive("gamma_m", gamma_m)?;
    require_positive("kappa_o", kappa_o)?;
    Ok(4.0 * g_om * g_om / (gamma_m * kappa_o))
}

pub fn one_ring_loading(
    branch: &MotionalBranch,
    g_om: f64,
    gamma_m: f64,
    kappa_o: f64,
    sidebands: SidebandAmplitudes,
) -> Result<OptomechLoading> {
    let c_om = optomechanical_cooperativity(g_om, gamma_m, kappa_o)?;
    let r_om_plus = branch.r_m * c_om * sidebands.upper;
    let r_om_minus = branch.r_m * c_om * sidebands.lower;
    Ok(OptomechLoading {
        topology: Topology::OneRing,
        sidebands,
        c_om,
        r_om_plus,
        r_om_minus,
        molecule: None,
        r_em_opt: branch.r_m + r_om_plus - r_om_minus,
    })
}

pub fn two_ring_loading(
    branch: &MotionalBranch,
    g_om: f64,
    gamma_m: f64,
    kappa_o: f64,
    j_coupling: f64,
    sidebands: SidebandAmplitudes,
) -> Result<OptomechLoading> {
    require_positive("j_coupling", j_coupling)?;
    let c_om = optomechanical_cooperativity(g_om, gamma_m, kappa_o)?;
    let c_oo = 4.0 * j_coupling * j_coupling / (kappa_o * kappa_o);

    let r_om = branch.r_m * c_om;
    let r_oo_plus = branch.r_m * c_oo * sidebands.upper;
    let r_oo_minus = branch.r_m * c_oo * sidebands.lower;
    let r_oo = r_oo_plus - r_oo_minus;

    let total = r_om + r_oo;
    if !(total > 0.0) {
        return Err(Error::DegenerateLoading { total });
    }
    let r_om_eq = r_om * r_oo / total;

    let denom = c_om + c_oo * sidebands.imbalance();
    let c_om_eq = if denom == 0.0 { 0.0 } else { c_om * c_oo / denom };

    Ok(OptomechLoading {
        topology: Topology::TwoRing,
        sidebands,
        c_om,
        r_om_plus: branch.r_m * c_om * sidebands.upper,
        r_om_minus: branch.r_m * c_om * sidebands.lower,
        molecule: Some(MoleculeLoading {
            c_oo,
            r_oo_plus,
            r_oo_minus,
            r_om_eq,
            c_om_eq,
        }),
        r_em_opt: branch.r_m + r_om_eq,
    })
}

/// Loading for either topology from device-level inputs.
pub fn loading_for(
    topology: Topology,
    branch: &MotionalBranch,
    g_om: f64,
    gamma_m: f64,
    kappa_o: f64,
    j_coupling: f64,
    sidebands: SidebandAmplitudes,
) -> Result<OptomechLoading> {
    match topology {
        Topology::OneRing => one_ring_loading(branch, g_om, gamma_m, kappa_o, sidebands),
        Topology::TwoRing => two_ring_loading(branch, g_om, gamma_m, kappa_o, j_coupling, sidebands),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::motional_elements;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const F_M: f64 = 3.285e9;
    const KAPPA_O: f64 = 150e6;
    const GAMMA: f64 = 2.6e6;

    fn branch() -> MotionalBranch {
        motional_elements(4.3e-3, 200e-15, F_M, GAMMA).unwrap()
    }

    fn red() -> SidebandAmplitudes {
        sideband_amplitudes(KAPPA_O, F_M, -F_M).unwrap()
    }

    #[test]
    fn red_detuned_sidebands() {
        let s = red();
        assert_eq!(s.upper, 1.0);
        assert_relative_eq!(s.lower, 1.303e-4, max_relative = 5e-4);
        // (75e6)²/((75e6)² + (6.57e9)²)
        assert_relative_eq!(s.lower, 1.302_971_7e-4, max_relative = 1e-6);
    }

    #[test]
    fn sideband_symmetry() {
        let s = sideband_amplitudes(KAPPA_O, F_M, 0.0).unwrap();
        assert_eq!(s.upper, s.lower);
        let blue = sideband_amplitudes(KAPPA_O, F_M, F_M).unwrap();
        let r = red();
        assert_eq!(blue.upper, r.lower);
        assert_eq!(blue.lower, r.upper);
        assert!(sideband_amplitudes(0.0, F_M, -F_M).is_err());
    }

    #[test]
    fn reference_one_ring() {
        let l = one_ring_loading(&branch(), 10e6, GAMMA, KAPPA_O, red()).unwrap();
        assert_relative_eq!(l.c_om, 1.026, max_relative = 5e-4);
        assert_relative_eq!(l.r_om_plus, 45.732, max_relative = 1e-4);
        assert_relative_eq!(l.r_om_minus, 5.959e-3, max_relative = 5e-4);
        assert_relative_eq!(l.r_em_opt, 90.314, max_relative = 1e-4);
        assert_eq!(l.effective_c_om(), l.c_om);
    }

    #[test]
    fn unloaded_and_weak_pump() {
        let b = branch();
        let l = one_ring_loading(&b, 0.0, GAMMA, KAPPA_O, red()).unwrap();
        assert_eq!(l.c_om, 0.0);
        assert_eq!(l.r_em_opt, b.r_m);
        // 4·(1e6)²/(2.6e6·150e6) and R_m times that
        let l = one_ring_loading(&b, 1e6, GAMMA, KAPPA_O, red()).unwrap();
        assert_relative_eq!(l.c_om, 1.025_641_0e-2, max_relative = 1e-7);
        assert_relative_eq!(l.r_om_plus, 0.457_319_4, max_relative = 1e-6);
    }

    #[test]
    fn reference_two_ring() {
        let l = two_ring_loading(&branch(), 10e6, GAMMA, KAPPA_O, 1.7e9, red()).unwrap();
        let m = l.molecule.unwrap();
        assert_relative_eq!(m.c_oo, 513.778, max_relative = 1e-5);
        assert_relative_eq!(m.r_oo_plus, 22_908.0, max_relative = 1e-4);
        assert_relative_eq!(m.r_oo_minus, 2.985, max_relative = 5e-4);
        assert_relative_eq!(m.r_om_eq, 45.656, max_relative = 1e-3);
        assert_relative_eq!(l.r_em_opt, 90.229, max_relative = 1e-3);
        assert_relative_eq!(l.net_resistance(), m.r_om_eq);
    }

    #[test]
    fn half_coupling_two_ring() {
        let b = branch();
        let l = two_ring_loading(&b, 10e6, GAMMA, KAPPA_O, 0.85e9, red()).unwrap();
        let m = l.molecule.unwrap();
        assert_relative_eq!(m.c_oo, 128.444_4, max_relative = 1e-5);
        let r_om = b.r_m * l.c_om;
        let leg = b.r_m * m.c_oo * (red().upper - red().lower);
        let parallel = 1.0 / (1.0 / r_om + 1.0 / leg);
        assert_relative_eq!(m.r_om_eq, parallel, max_relative = 1e-3);
        // the equivalent cooperativity reproduces the equivalent resistance
        assert_relative_eq!(m.r_om_eq, b.r_m * m.c_om_eq * red().imbalance(), max_relative = 1e-12);
    }

    #[test]
    fn strong_ring_coupling_saturates() {
        let b = branch();
        let ideal = SidebandAmplitudes { upper: 1.0, lower: 0.0 };
        let one = one_ring_loading(&b, 10e6, GAMMA, KAPPA_O, ideal).unwrap();
        let mut previous = f64::INFINITY;
        for j in [1e9, 1e10, 1e11, 1e12] {
            let two = two_ring_loading(&b, 10e6, GAMMA, KAPPA_O, j, ideal).unwrap();
            let gap = (two.r_em_opt - one.r_em_opt).abs();
            assert!(gap < previous);
            previous = gap;
        }
        assert!(previous / one.r_em_opt < 1e-6);
    }

    #[test]
    fn degenerate_two_ring() {
        // blue detuning makes the optical–optical leg strongly negative
        let blue = sideband_amplitudes(KAPPA_O, F_M, F_M).unwrap();
        let err = two_ring_loading(&branch(), 10e6, GAMMA, KAPPA_O, 1.7e9, blue).unwrap_err();
        assert!(matches!(err, Error::DegenerateLoading { .. }));
    }

    proptest! {
        #[test]
        fn imbalance_bounded(kappa in 1e6f64..1e9, f in 1e8f64..1e10, d in -2e10f64..2e10) {
            let s = sideband_amplitudes(kappa, f, d).unwrap();
            prop_assert!((-1.0..=1.0).contains(&s.imbalance()));
            prop_assert!((0.0..=1.0).contains(&s.upper) && (0.0..=1.0).contains(&s.lower));
            let red = sideband_amplitudes(kappa, f, -f).unwrap();
            prop_assert!(red.imbalance() >= 0.0);
        }

        #[test]
        fn harmonic_mean_bound(g in 1e5f64..5e7, j in 1e7f64..1e10) {
            let l = two_ring_loading(&branch(), g, GAMMA, KAPPA_O, j, red()).unwrap();
            let m = l.molecule.unwrap();
            let r_om = branch().r_m * l.c_om;
            prop_assert!(m.r_om_eq < r_om);
            prop_assert!(m.r_om_eq < m.r_oo_plus - m.r_oo_minus);
        }

        #[test]
        fn one_ring_loading_monotone(g in 0.0f64..5e7, step in 1.0f64..1e6) {
            let a = one_ring_loading(&branch(), g, GAMMA, KAPPA_O, red()).unwrap();
            let b = one_ring_loading(&branch(), g + step, GAMMA, KAPPA_O, red()).unwrap();
            prop_assert!(b.r_em_opt >= a.r_em_opt);
        }
    }
}
