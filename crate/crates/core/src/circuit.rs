//! Butterworth–van Dyke equivalent circuit of the piezo-mechanical element.
//!
//! The resonator is a static arm (C₀ shunted by the dielectric-loss resistance
//! R₀) in parallel with a motional R–L–C arm. Every frequency crossing this
//! API is an ordinary frequency in Hz; the factor 2π is applied internally
//! wherever a formula needs an angular frequency.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{require_non_negative, require_positive, Error, Result};

/// Static resistance used to stand in for an ideal (lossless) dielectric.
pub const LOSSLESS_STATIC_RESISTANCE: f64 = 1.0e12;

/// CODATA 2018 exact/recommended values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// ħ in J·s.
    pub planck_reduced: f64,
    /// k_B in J/K.
    pub boltzmann: f64,
}

impl PhysicalConstants {
    pub const CODATA_2018: PhysicalConstants = PhysicalConstants {
        planck_reduced: 1.054_571_817e-34,
        boltzmann: 1.380_649e-23,
    };

    /// Planck's constant h = 2πħ.
    pub fn planck(&self) -> f64 {
        2.0 * PI * self.planck_reduced
    }
}

/// Physical description of one transducer and its operating point.
///
/// Rates and frequencies are ordinary frequencies (Hz).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceParams {
    /// Single-photon optomechanical coupling rate g_OM,0.
    pub g_om0: f64,
    /// Optical cavity frequency.
    pub f_opt: f64,
    /// Optical intrinsic linewidth κ_i.
    pub kappa_i: f64,
    /// Optical external coupling rate κ_ext.
    pub kappa_ext: f64,
    /// Mechanical mode frequency.
    pub f_m: f64,
    /// Mechanical intrinsic linewidth, used as γ_m throughout.
    pub gamma_i: f64,
    /// Electromechanical coupling factor k²_eff.
    pub k_eff_sq: f64,
    /// Intracavity pump photon number.
    pub n_cav: f64,
    /// Static capacitance C₀ (F).
    pub c0: f64,
    /// Static resistance R₀ (Ω).
    pub r0: f64,
    /// Device temperature (K).
    pub temperature: f64,
    /// Ring–ring coupling rate J.
    pub j_coupling: f64,
    /// Transmission-line input impedance Z_tx (Ω).
    pub z_tx: f64,
    /// Signed pump–cavity detuning Δ. The red-detuned operating point is Δ = −f_m.
    pub detuning: f64,
}

impl DeviceParams {
    /// The reference FBAR device at g_OM = 10 MHz and 50 mK, red-detuned by one
    /// mechanical frequency, with a 10 kΩ static resistance.
    pub fn reference() -> Self {
        let f_m = 3.285e9;
        DeviceParams {
            g_om0: 400.0,
            f_opt: 193e12,
            kappa_i: 25e6,
            kappa_ext: 125e6,
            f_m,
            gamma_i: 2.6e6,
            k_eff_sq: 4.3e-3,
            n_cav: 6.25e8,
            c0: 200e-15,
            r0: 10e3,
            temperature: 0.050,
            j_coupling: 1.7e9,
            z_tx: 50.0,
            detuning: -f_m,
        }
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("g_om0", self.g_om0)?;
        require_positive("f_opt", self.f_opt)?;
        require_positive("kappa_i", self.kappa_i)?;
        require_positive("kappa_ext", self.kappa_ext)?;
        require_positive("f_m", self.f_m)?;
        require_positive("gamma_i", self.gamma_i)?;
        require_positive("k_eff_sq", self.k_eff_sq)?;
        if self.k_eff_sq >= 1.0 {
            return Err(Error::Domain {
                field: "k_eff_sq",
                value: self.k_eff_sq,
                reason: "must be below 1",
            });
        }
        require_non_negative("n_cav", self.n_cav)?;
        require_positive("c0", self.c0)?;
        require_positive("r0", self.r0)?;
        require_positive("temperature", self.temperature)?;
        require_positive("j_coupling", self.j_coupling)?;
        require_positive("z_tx", self.z_tx)?;
        if !self.detuning.is_finite() {
            return Err(Error::Domain {
                field: "detuning",
                value: self.detuning,
                reason: "must be finite",
            });
        }
        Ok(())
    }

    /// Total optical linewidth κ_o = κ_i + κ_ext.
    pub fn kappa_o(&self) -> f64 {
        self.kappa_i + self.kappa_ext
    }

    /// Cavity-enhanced optomechanical coupling rate for the configured photon number.
    pub fn g_om(&self) -> f64 {
        cavity_enhanced_coupling(self.g_om0, self.n_cav)
    }

    /// Sets `n_cav` so that the cavity-enhanced coupling equals `g_om`.
    pub fn with_g_om(mut self, g_om: f64) -> Self {
        self.n_cav = (g_om / self.g_om0).powi(2);
        self
    }

    pub fn static_branch(&self) -> StaticBranch {
        StaticBranch {
            c0: self.c0,
            r0: self.r0,
        }
    }

    /// Same device with the dielectric treated as lossless.
    pub fn lossless(mut self) -> Self {
        self.r0 = LOSSLESS_STATIC_RESISTANCE;
        self
    }

    pub fn motional_branch(&self) -> Result<MotionalBranch> {
        motional_elements(self.k_eff_sq, self.c0, self.f_m, self.gamma_i)
    }

    /// Bose–Einstein occupancy of the acoustic mode at the device temperature.
    pub fn thermal_occupancy(&self) -> Result<f64> {
        thermal_occupancy(self.f_m, self.temperature)
    }
}

/// Motional arm: C_m, L_m, R_m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionalBranch {
    pub c_m: f64,
    pub l_m: f64,
    pub r_m: f64,
}

impl MotionalBranch {
    /// Series resonance 1/(2π√(L_m C_m)) in Hz.
    pub fn series_resonance(&self) -> f64 {
        1.0 / (2.0 * PI * (self.l_m * self.c_m).sqrt())
    }

    /// Intrinsic linewidth γ_m = R_m/(2π L_m) in Hz.
    pub fn linewidth(&self) -> f64 {
        self.r_m / (2.0 * PI * self.l_m)
    }
}

/// Static arm: C₀ with shunt R₀.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StaticBranch {
    pub c0: f64,
    pub r0: f64,
}

impl StaticBranch {
    pub fn lossless(c0: f64) -> Self {
        StaticBranch {
            c0,
            r0: LOSSLESS_STATIC_RESISTANCE,
        }
    }
}

/// Motional elements from the coupling factor, static capacitance and mechanical mode.
///
/// C_m = k²C₀, L_m = 1/(ω_m² C_m), R_m = γ_m L_m with ω_m = 2πf_m and γ_m = 2π·`gamma_m`.
pub fn motional_elements(k_eff_sq: f64, c0: f64, f_m: f64, gamma_m: f64) -> Result<MotionalBranch> {
    require_positive("k_eff_sq", k_eff_sq)?;
    require_positive("c0", c0)?;
    require_positive("f_m", f_m)?;
    require_positive("gamma_m", gamma_m)?;

    let omega_m = 2.0 * PI * f_m;
    let c_m = k_eff_sq * c0;
    let l_m = 1.0 / (omega_m * omega_m * c_m);
    if !l_m.is_finite() {
        return Err(Error::Domain {
            field: "k_eff_sq",
            value: k_eff_sq,
            reason: "motional inductance diverges",
        });
    }
    let r_m = 2.0 * PI * gamma_m * l_m;
    Ok(MotionalBranch { c_m, l_m, r_m })
}

/// Small-signal admittance of the resonator at frequency `f` (Hz), in siemens.
///
/// Y = iωC₀ + 1/R₀ + (1/L_m)·iω/(ω_m² − ω² + iωγ_m).
pub fn admittance(branch: &MotionalBranch, static_branch: &StaticBranch, f: f64) -> Result<Complex64> {
    require_positive("f", f)?;
    let omega = 2.0 * PI * f;
    let jw = Complex64::new(0.0, omega);
    let omega_m_sq = 1.0 / (branch.l_m * branch.c_m);
    let gamma = branch.r_m / branch.l_m;

    let static_y = jw * static_branch.c0 + 1.0 / static_branch.r0;
    let motional_y = (jw / branch.l_m) / Complex64::new(omega_m_sq - omega * omega, omega * gamma);
    Ok(static_y + motional_y)
}

/// Series and parallel resonance frequencies (Hz).
pub fn resonances(branch: &MotionalBranch, static_branch: &StaticBranch) -> (f64, f64) {
    let f_s = branch.series_resonance();
    let f_p = f_s * (1.0 + branch.c_m / static_branch.c0).sqrt();
    (f_s, f_p)
}

/// Coupling factor from the series–parallel separation, (f_p² − f_s²)/f_p².
pub fn keff_from_resonances(f_s: f64, f_p: f64) -> Result<f64> {
    require_positive("f_s", f_s)?;
    if !(f_p >= f_s) || !f_p.is_finite() {
        return Err(Error::Domain {
            field: "f_p",
            value: f_p,
            reason: "parallel resonance must not lie below the series resonance",
        });
    }
    // f_p − f_s is exact for nearby resonances, so only f_p's own rounding remains.
    Ok((f_p - f_s) * (f_p + f_s) / (f_p * f_p))
}

/// Bose–Einstein occupancy 1/(exp(hf/k_BT) − 1).
pub fn thermal_occupancy(f: f64, temperature: f64) -> Result<f64> {
    require_positive("f", f)?;
    require_positive("temperature", temperature)?;
    let k = PhysicalConstants::CODATA_2018;
    let x = k.planck() * f / (k.boltzmann * temperature);
    Ok(1.0 / x.exp_m1())
}

/// g_OM = g_OM,0·√n_cav.
pub fn cavity_enhanced_coupling(g_om0: f64, n_cav: f64) -> f64 {
    g_om0 * n_cav.max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn reference_branch() -> MotionalBranch {
        motional_elements(4.3e-3, 200e-15, 3.285e9, 2.6e6).unwrap()
    }

    #[test]
    fn reference_motional_elements() {
        let b = reference_branch();
        assert_relative_eq!(b.c_m, 0.860e-15, max_relative = 5e-4);
        assert_relative_eq!(b.l_m, 2.729e-6, max_relative = 5e-4);
        assert_relative_eq!(b.r_m, 44.588, max_relative = 5e-4);
    }

    #[test]
    fn scalar_motional_elements() {
        // direct evaluation: 1/((2π·5e9)²·1e-15), 2π·1e6·L_m
        let b = motional_elements(1.0e-2, 100e-15, 5e9, 1e6).unwrap();
        assert_relative_eq!(b.c_m, 1.0e-15, max_relative = 1e-12);
        assert_relative_eq!(b.l_m, 1.013_211_836_4e-6, max_relative = 1e-9);
        assert_relative_eq!(b.r_m, 6.366_197_723_7, max_relative = 1e-9);
    }

    #[test]
    fn vanishing_coupling_is_rejected() {
        assert!(matches!(
            motional_elements(0.0, 200e-15, 3.285e9, 2.6e6),
            Err(Error::Domain { field: "k_eff_sq", .. })
        ));
        assert!(matches!(
            motional_elements(1e-320, 200e-15, 3.285e9, 2.6e6),
            Err(Error::Domain { field: "k_eff_sq", .. })
        ));
        assert!(matches!(
            motional_elements(4.3e-3, -1.0, 3.285e9, 2.6e6),
            Err(Error::Domain { field: "c0", .. })
        ));
    }

    #[test]
    fn capacitive_far_from_resonance() {
        let b = reference_branch();
        let s = StaticBranch::lossless(200e-15);
        let f = 100.0 * 3.285e9;
        let y = admittance(&b, &s, f).unwrap();
        let wc = 2.0 * PI * f * 200e-15;
        assert!((y.im - wc).abs() / wc < 0.01);
    }

    #[test]
    fn open_circuit_at_dc() {
        let b = reference_branch();
        let s = StaticBranch::lossless(200e-15);
        let y = admittance(&b, &s, 1e-3).unwrap();
        assert!(y.norm() < 1e-11);
        assert!(admittance(&b, &s, 0.0).is_err());
    }

    #[test]
    fn susceptance_peak_near_series_resonance() {
        let b = reference_branch();
        let s = StaticBranch::lossless(200e-15);
        let (f_s, _) = resonances(&b, &s);
        let step = 0.1e6;
        let grid: Vec<f64> = (0..2001).map(|i| 3.2e9 + step * i as f64).collect();
        let argmax = |key: &dyn Fn(Complex64) -> f64| {
            grid.iter()
                .copied()
                .max_by(|a, b2| {
                    let ya = key(admittance(&b, &s, *a).unwrap());
                    let yb = key(admittance(&b, &s, *b2).unwrap());
                    ya.partial_cmp(&yb).unwrap()
                })
                .unwrap()
        };
        // conductance peaks exactly at f_s; the susceptance peak sits γ_m/2 below it
        let g_peak = argmax(&|y| y.re);
        assert!((g_peak - f_s).abs() <= step);
        let b_peak = argmax(&|y| y.im);
        assert!((b_peak - f_s).abs() <= b.linewidth());
        assert!(b_peak < f_s);
    }

    #[test]
    fn reference_resonances() {
        let b = reference_branch();
        let s = StaticBranch::lossless(200e-15);
        let (f_s, f_p) = resonances(&b, &s);
        assert_relative_eq!(f_s, 3.285e9, max_relative = 1e-12);
        assert_relative_eq!(f_p / f_s, 1.002_148, max_relative = 1e-6);
        let tiny = MotionalBranch { c_m: 1e-30, ..b };
        let (f_s, f_p) = resonances(&tiny, &s);
        assert_relative_eq!(f_p, f_s, max_relative = 1e-14);
    }

    #[test]
    fn coupling_factor_from_resonances() {
        let b = reference_branch();
        let s = StaticBranch::lossless(200e-15);
        let (f_s, f_p) = resonances(&b, &s);
        let k = keff_from_resonances(f_s, f_p).unwrap();
        assert_relative_eq!(k, 0.860 / 200.860, max_relative = 1e-9);
        assert!((k - 4.3e-3).abs() <= 4.3e-3 * 4.3e-3);
        assert_eq!(keff_from_resonances(1e9, 1e9).unwrap(), 0.0);
        assert!(keff_from_resonances(2e9, 1e9).is_err());
    }

    #[test]
    fn occupancy_values() {
        // scalar evaluation of 1/(exp(hf/kT) - 1)
        let n50 = thermal_occupancy(3.285e9, 0.050).unwrap();
        assert_relative_eq!(n50, 0.044_625_760, max_relative = 1e-6);
        // consistent with the noise-quanta row: n_th·C_EM·η_e
        assert!((n50 - 2.203e-2 * 2.025).abs() / n50 < 5e-3);
        let n100 = thermal_occupancy(3.285e9, 0.100).unwrap();
        assert_relative_eq!(n100, 0.260_535_971, max_relative = 1e-6);
        assert_eq!(thermal_occupancy(3.285e9, 1e-6).unwrap(), 0.0);
        assert!(thermal_occupancy(3.285e9, 0.0).is_err());
        assert!(thermal_occupancy(3.285e9, -0.01).is_err());
    }

    #[test]
    fn cavity_coupling() {
        assert_relative_eq!(cavity_enhanced_coupling(400.0, 6.25e8), 10e6, max_relative = 1e-12);
        assert_eq!(cavity_enhanced_coupling(400.0, 0.0), 0.0);
        assert_relative_eq!(cavity_enhanced_coupling(400.0, 2.5e9), 20e6, max_relative = 1e-12);
    }

    #[test]
    fn reference_device_is_valid() {
        let d = DeviceParams::reference();
        d.validate().unwrap();
        assert_relative_eq!(d.g_om(), 10e6, max_relative = 1e-12);
        assert_relative_eq!(d.with_g_om(3e6).g_om(), 3e6, max_relative = 1e-12);
        let bad = DeviceParams { k_eff_sq: 1.2, ..d };
        assert!(bad.validate().is_err());
        let bad = DeviceParams { temperature: 0.0, ..d };
        assert!(matches!(bad.validate(), Err(Error::Domain { field: "temperature", .. })));
    }

    proptest! {
        #[test]
        fn coupling_identity(k in 1e-5f64..0.5, c0 in 1e-15f64..1e-11, f in 1e8f64..1e10, g in 1e3f64..1e7) {
            let b = motional_elements(k, c0, f, g).unwrap();
            let s = StaticBranch::lossless(c0);
            let (f_s, f_p) = resonances(&b, &s);
            let from_split = keff_from_resonances(f_s, f_p).unwrap();
            let direct = k * c0 / (c0 + k * c0);
            prop_assert!((from_split - direct).abs() <= 1e-12 * direct);
            prop_assert!((b.linewidth() - g).abs() <= 1e-12 * g);
        }

        #[test]
        fn susceptance_changes_sign_between_resonances(
            k in 1e-3f64..0.05, f in 1e9f64..1e10, q_factor in 1e3f64..1e5,
        ) {
            // a sign change needs a resolved resonance: k·f_m/(2γ_m) > 1
            let gamma = f / q_factor;
            prop_assume!(k * f / (2.0 * gamma) > 1.5);
            let b = motional_elements(k, 200e-15, f, gamma).unwrap();
            let s = StaticBranch::lossless(200e-15);
            let (f_s, f_p) = resonances(&b, &s);
            let at_series = admittance(&b, &s, f_s).unwrap().im;
            let n = 400;
            let most_negative = (1..n)
                .map(|i| f_s + (f_p - f_s) * i as f64 / n as f64)
                .map(|x| admittance(&b, &s, x).unwrap().im)
                .fold(f64::INFINITY, f64::min);
            prop_assert!(at_series > 0.0);
            prop_assert!(most_negative < 0.0);
        }

        #[test]
        fn occupancy_monotone(f in 1e8f64..2e10, t in 1e-3f64..2.0, scale in 1.01f64..3.0) {
            let n = thermal_occupancy(f, t).unwrap();
            prop_assume!(n > 1e-300);
            prop_assert!(thermal_occupancy(f, t * scale).unwrap() > n);
            prop_assert!(thermal_occupancy(f * scale, t).unwrap() < n);
        }
    }
}
