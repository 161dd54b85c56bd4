//! Parameter sweeps written as CSV, one row per grid point.

use std::io::Write;

use clap::ValueEnum;
use fbar_core::herald::{type1_fidelity_noisy, type2_fidelity_noisy, Protocol};
use fbar_core::transducer::heralding;
use rayon::prelude::*;

use crate::commands::{design, Case};
use crate::config::{Config, Pump};
use crate::error::{error_code, CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Variable {
    /// Device temperature, mK.
    Temperature,
    /// Intracavity photon number.
    NCav,
    /// Cavity-enhanced optomechanical coupling, MHz.
    GOm,
    /// Link efficiency.
    EtaLink,
    /// Thermal emission probability, overriding the computed one.
    PTh,
}

impl Variable {
    fn column(self) -> &'static str {
        match self {
            Variable::Temperature => "temperature_mk",
            Variable::NCav => "n_cav",
            Variable::GOm => "g_om_mhz",
            Variable::EtaLink => "eta_link",
            Variable::PTh => "p_th",
        }
    }

    fn is_probability(self) -> bool {
        matches!(self, Variable::EtaLink | Variable::PTh)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub variable: Variable,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub scale: Scale,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let usage = |m: String| Err(CliError::Usage(m));
        if self.points < 2 {
            return usage(format!("a sweep needs at least 2 points, got {}", self.points));
        }
        if !(self.start.is_finite() && self.stop.is_finite() && self.start < self.stop) {
            return usage(format!("sweep start {} must be below stop {}", self.start, self.stop));
        }
        if self.scale == Scale::Log && !(self.start > 0.0) {
            return usage(format!("a log sweep needs positive endpoints, got start {}", self.start));
        }
        if self.variable.is_probability() && !(self.start >= 0.0 && self.stop <= 1.0) {
            return usage(format!("{} must stay within [0, 1]", self.variable.column()));
        }
        Ok(())
    }

    /// Grid values with both endpoints exact.
    pub fn grid(&self) -> Vec<f64> {
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i == 0 {
                    return self.start;
                }
                if i == self.points - 1 {
                    return self.stop;
                }
                let t = i as f64 / last;
                match self.scale {
                    Scale::Linear => self.start + t * (self.stop - self.start),
                    Scale::Log => (self.start.ln() + t * (self.stop / self.start).ln()).exp(),
                }
            })
            .collect()
    }
}

const FIELDS: &[&str] = &[
    "c_t_ff",
    "l_nh",
    "g_em_mhz",
    "c_em",
    "eta_std",
    "eta_alt",
    "bandwidth_mhz",
    "n_o",
    "n_th",
    "dt_ns",
    "p1",
    "p_th",
    "f_type1",
    "f_type2",
    "tau_type1_khz",
    "tau_type2_khz",
    "error",
];

fn prefix(case: &Case) -> String {
    format!("{}_{}_", case.topology.label(), case.objective_label()).replace('-', "_")
}

pub fn header(spec: &SweepSpec, cases: &[Case]) -> Vec<String> {
    let mut h = vec![spec.variable.column().to_string()];
    for case in cases {
        let p = prefix(case);
        h.extend(FIELDS.iter().map(|f| format!("{p}{f}")));
    }
    h
}

fn configure(base: &Config, variable: Variable, value: f64) -> Config {
    let mut c = base.clone();
    match variable {
        Variable::Temperature => c.temperature_mk = value,
        Variable::NCav => c.pump = Pump::PhotonNumber(value),
        Variable::GOm => c.pump = Pump::CouplingMhz(value),
        Variable::EtaLink => c.eta_link = value,
        Variable::PTh => {}
    }
    c
}

fn case_fields(config: &Config, case: Case, p_th_override: Option<f64>) -> std::result::Result<Vec<f64>, &'static str> {
    let device = config.device();
    let d = design(config, &device, case).map_err(|e| error_code(&e))?;
    let t1 = heralding(&device, &d, &config.protocol(Protocol::TypeI, case.topology)).map_err(|e| error_code(&e))?;
    let t2 = heralding(&device, &d, &config.protocol(Protocol::TypeII, case.topology)).map_err(|e| error_code(&e))?;
    let (p_th, f1, f2) = match p_th_override {
        Some(p) => (
            p,
            type1_fidelity_noisy(t1.p1, p, config.eta_link).map_err(|e| error_code(&e))?,
            type2_fidelity_noisy(t2.p1, p).map_err(|e| error_code(&e))?,
        ),
        None => (t1.p_th, t1.fidelity.unwrap_or(f64::NAN), t2.fidelity.unwrap_or(f64::NAN)),
    };
    Ok(vec![
        d.network.c_t * 1e15,
        d.network.l * 1e9,
        d.network.g_em / 1e6,
        d.network.c_em,
        d.fom.eta_standard,
        d.fom.eta_alt,
        d.fom.bandwidth / 1e6,
        d.fom.n_raman,
        d.fom.n_thermal,
        t1.dt * 1e9,
        t1.p1,
        p_th,
        f1,
        f2,
        t1.tau_ent / 1e3,
        t2.tau_ent / 1e3,
    ])
}

fn grid_row(base: &Config, spec: &SweepSpec, cases: &[Case], value: f64) -> Vec<String> {
    let config = configure(base, spec.variable, value);
    let p_th = (spec.variable == Variable::PTh).then_some(value);
    let mut row = vec![value.to_string()];
    for &case in cases {
        match case_fields(&config, case, p_th) {
            Ok(values) => {
                row.extend(values.iter().map(f64::to_string));
                row.push(String::new());
            }
            Err(code) => {
                row.extend(std::iter::repeat_n(String::new(), FIELDS.len() - 1));
                row.push(code.to_string());
            }
        }
    }
    row
}

/// Evaluates every grid point (in parallel) and writes rows in grid order.
pub fn run(base: &Config, spec: &SweepSpec, cases: &[Case], out: &mut dyn Write) -> std::io::Result<()> {
    let rows: Vec<Vec<String>> = spec
        .grid()
        .into_par_iter()
        .map(|v| grid_row(base, spec, cases, v))
        .collect();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(spec, cases))?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use fbar_core::matching::MatchingObjective;
    use fbar_core::optomech::Topology;

    fn spec(variable: Variable, start: f64, stop: f64, points: usize, scale: Scale) -> SweepSpec {
        SweepSpec {
            variable,
            start,
            stop,
            points,
            scale,
        }
    }

    fn case(objective: MatchingObjective) -> Case {
        Case {
            objective: Some(objective),
            topology: Topology::OneRing,
        }
    }

    #[test]
    fn grids() {
        let g = spec(Variable::GOm, 1.0, 60.0, 60, Scale::Linear).grid();
        assert_eq!(g.len(), 60);
        assert_eq!((g[0], g[59]), (1.0, 60.0));
        assert!((g[9] - 10.0).abs() < 1e-12);
        let g = spec(Variable::NCav, 1e6, 1e10, 5, Scale::Log).grid();
        assert_eq!((g[0], g[4]), (1e6, 1e10));
        assert!((g[2] / 1e8 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spec_validation() {
        assert!(spec(Variable::GOm, 1.0, 60.0, 1, Scale::Linear).validate().is_err());
        assert!(spec(Variable::GOm, 60.0, 1.0, 5, Scale::Linear).validate().is_err());
        assert!(spec(Variable::NCav, 0.0, 1e9, 5, Scale::Log).validate().is_err());
        assert!(spec(Variable::EtaLink, 0.1, 1.5, 5, Scale::Linear).validate().is_err());
        assert!(spec(Variable::Temperature, 10.0, 150.0, 15, Scale::Linear).validate().is_ok());
    }

    #[test]
    fn unphysical_points_become_error_rows() {
        let s = spec(Variable::GOm, 1.0, 60.0, 60, Scale::Linear);
        let cases = [case(MatchingObjective::MaximizeEfficiency)];
        let mut buf = Vec::new();
        run(&Config::default(), &s, &cases, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 61);
        assert!(lines[40].ends_with(',')); // 40 MHz is still physical
        assert!(lines[60].ends_with("unphysical_capacitance"));
    }

    #[test]
    fn type2_fidelity_flat_in_link_efficiency() {
        let s = spec(Variable::EtaLink, 0.1, 1.0, 10, Scale::Linear);
        let cases = [case(MatchingObjective::MinimizeNoise)];
        let base = Config::default();
        let f2: Vec<String> = s
            .grid()
            .into_iter()
            .map(|v| grid_row(&base, &s, &cases, v)[14].clone())
            .collect();
        assert!(f2.iter().all(|f| f == &f2[0]), "{f2:?}");
    }

    #[test]
    fn type2_fidelity_falls_with_temperature() {
        let s = spec(Variable::Temperature, 10.0, 150.0, 15, Scale::Linear);
        let cases = [case(MatchingObjective::MaximizeEfficiency)];
        let base = Config::default();
        let f2: Vec<f64> = s
            .grid()
            .into_iter()
            .map(|v| grid_row(&base, &s, &cases, v)[14].parse().unwrap())
            .collect();
        assert!(f2.windows(2).all(|w| w[1] <= w[0]), "{f2:?}");
    }
}
