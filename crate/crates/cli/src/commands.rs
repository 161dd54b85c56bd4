//! The `synth`, `fom`, `herald` and `mc` subcommands.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use fbar_core::circuit::DeviceParams;
use fbar_core::herald::{Protocol, ProtocolOutcome};
use fbar_core::matching::{resonant_inductance, MatchingObjective};
use fbar_core::mcsim::{sigma_distance, Simulator, MIN_TRIALS};
use fbar_core::optomech::Topology;
use fbar_core::transducer::{evaluate, evaluate_with_network, heralding, Design};
use fbar_core::Error as CoreError;

use crate::config::{scaled, Config};
use crate::error::{CliError, Result};
use crate::report::{significant, Cell, FomEntry, McEntry, MatchingEntry, ProtocolEntry, RunReport, Table};

/// One analyzed column: a topology and either a synthesis objective or the
/// network given in the configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Case {
    pub objective: Option<MatchingObjective>,
    pub topology: Topology,
}

impl Case {
    pub fn label(&self) -> String {
        format!("{}/{}", self.topology.label(), self.objective_label())
    }

    pub fn objective_label(&self) -> &'static str {
        self.objective.map_or("given", |o| o.label())
    }
}

pub fn cases(config: &Config, objectives: &[MatchingObjective], topologies: &[Topology]) -> Vec<Case> {
    let objectives: Vec<Option<MatchingObjective>> = if config.c_t_ff.is_some() {
        vec![None]
    } else {
        objectives.iter().copied().map(Some).collect()
    };
    topologies
        .iter()
        .flat_map(|&topology| objectives.iter().map(move |&objective| Case { objective, topology }))
        .collect()
}

/// Synthesizes (or, with a given C_T, just evaluates) one case.
pub fn design(config: &Config, device: &DeviceParams, case: Case) -> std::result::Result<Design, CoreError> {
    match (case.objective, config.c_t_ff) {
        (_, Some(c_t_ff)) => {
            let c_t = scaled(c_t_ff, -15);
            let l = match config.l_nh {
                Some(l_nh) => scaled(l_nh, -9),
                None => resonant_inductance(&device.motional_branch()?, device.c0, c_t),
            };
            evaluate_with_network(device, case.topology, l, c_t, config.r_l())
        }
        (Some(objective), None) => evaluate(device, objective, case.topology, config.r_l()),
        (None, None) => unreachable!("cases without an objective need a given network"),
    }
}

/// Largest g_OM (Hz) below `g_om` at which efficiency matching is still physical.
fn physical_limit(device: &DeviceParams, topology: Topology, r_l: f64) -> Option<f64> {
    let ok = |g: f64| evaluate(&device.with_g_om(g), MatchingObjective::MaximizeEfficiency, topology, r_l).is_ok();
    let (mut lo, mut hi) = (1e3, device.g_om());
    if !ok(lo) {
        return None;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}

fn design_or_explain(config: &Config, device: &DeviceParams, case: Case) -> Result<Design> {
    design(config, device, case).map_err(|e| match e {
        CoreError::UnphysicalCapacitance { c_t, g_om } => {
            let limit = physical_limit(device, case.topology, config.r_l()).map_or(String::new(), |g| {
                format!("; it is physical only for g_OM below {:.3} MHz", g / 1e6)
            });
            CliError::Unphysical(format!(
                "{}: efficiency matching at g_OM = {:.6} MHz needs a negative (unphysical) matching capacitance \
                 C_T = {:.6} fF{limit}; use --objective min-noise above that",
                case.label(),
                g_om / 1e6,
                c_t * 1e15,
            ))
        }
        other => other.into(),
    })
}

fn designs(config: &Config, cases: &[Case], report: &mut RunReport) -> Result<Vec<Design>> {
    let device = config.device();
    let mut out = Vec::with_capacity(cases.len());
    for &case in cases {
        let d = design_or_explain(config, &device, case)?;
        if !d.validity.ok {
            report.warn(
                "validity_limit",
                format!(
                    "k_eff^2 = {} exceeds a tenth of kappa_o/f_s = {}; the sideband-resolved circuit model may not hold",
                    significant(d.validity.k_eff_sq),
                    significant(d.validity.ratio)
                ),
            );
        }
        let n = &d.network;
        if (n.f_lc - n.f_m_shifted).abs() > 1e-3 * n.f_m_shifted {
            report.warn(
                "lc_resonance_offset",
                format!(
                    "{}: LC resonance {} GHz differs from the loaded mechanical resonance {} GHz",
                    case.label(),
                    significant(n.f_lc / 1e9),
                    significant(n.f_m_shifted / 1e9)
                ),
            );
        }
        report.matching.push(MatchingEntry {
            objective: case.objective_label().to_string(),
            topology: case.topology.label().to_string(),
            loading: d.loading,
            network: d.network,
        });
        report.fom.push(FomEntry {
            objective: case.objective_label().to_string(),
            topology: case.topology.label().to_string(),
            fom: d.fom,
        });
        out.push(d);
    }
    Ok(out)
}

fn column_labels(cases: &[Case]) -> Vec<String> {
    cases.iter().map(Case::label).collect()
}

fn row<F: Fn(&Design) -> Cell>(designs: &[Design], f: F) -> Vec<Cell> {
    designs.iter().map(f).collect()
}

pub fn synth(config: &Config, cases: &[Case], report: &mut RunReport) -> Result<Table> {
    let designs = designs(config, cases, report)?;
    let branch = config.device().motional_branch()?;
    let mut t = Table::new("matching network", column_labels(cases));
    let same = |v: f64| vec![Cell::Num(v); designs.len()];
    t.row("C_m", "fF", same(branch.c_m * 1e15));
    t.row("L_m", "uH", same(branch.l_m * 1e6));
    t.row("R_m", "ohm", same(branch.r_m));
    t.row("L+^2", "", row(&designs, |d| d.loading.sidebands.upper.into()));
    t.row("L-^2", "", row(&designs, |d| d.loading.sidebands.lower.into()));
    t.row("R_OM+", "ohm", row(&designs, |d| d.loading.r_om_plus.into()));
    t.row("R_OM-", "ohm", row(&designs, |d| d.loading.r_om_minus.into()));
    t.row("C_OM", "", row(&designs, |d| d.loading.c_om.into()));
    t.row("C_OO", "", row(&designs, |d| d.loading.molecule.map(|m| m.c_oo).into()));
    t.row("R_OO+", "kohm", row(&designs, |d| d.loading.molecule.map(|m| m.r_oo_plus / 1e3).into()));
    t.row("R_OO-", "ohm", row(&designs, |d| d.loading.molecule.map(|m| m.r_oo_minus).into()));
    t.row("R_OM^eq", "ohm", row(&designs, |d| d.loading.molecule.map(|m| m.r_om_eq).into()));
    t.row("C_OM^eq", "", row(&designs, |d| d.loading.molecule.map(|m| m.c_om_eq).into()));
    t.row("R_EM^opt", "ohm", row(&designs, |d| d.loading.r_em_opt.into()));
    t.row("C_T", "fF", row(&designs, |d| (d.network.c_t * 1e15).into()));
    t.row("L", "nH", row(&designs, |d| (d.network.l * 1e9).into()));
    t.row("f_LC", "GHz", row(&designs, |d| (d.network.f_lc / 1e9).into()));
    t.row("f_m'", "GHz", row(&designs, |d| (d.network.f_m_shifted / 1e9).into()));
    t.row("Q_LC", "", row(&designs, |d| d.network.q_lc.into()));
    t.row("kappa_e", "MHz", row(&designs, |d| (d.network.kappa_e / 1e6).into()));
    t.row("eta_e", "", row(&designs, |d| d.network.eta_e.into()));
    t.row("g_EM", "MHz", row(&designs, |d| (d.network.g_em / 1e6).into()));
    t.row("k_t^2", "", row(&designs, |d| d.network.k_t_sq.into()));
    t.row("C_EM", "", row(&designs, |d| d.network.c_em.into()));
    t.row("C_EM (rates)", "", row(&designs, |d| d.network.c_em_from_rates.into()));
    t.row("R_EM", "ohm", row(&designs, |d| d.network.r_em.into()));
    Ok(t)
}

pub fn fom(config: &Config, cases: &[Case], report: &mut RunReport) -> Result<Table> {
    let designs = designs(config, cases, report)?;
    let mut t = Table::new("figures of merit", column_labels(cases));
    t.row("eta", "%", row(&designs, |d| (d.fom.eta_standard * 100.0).into()));
    t.row("eta_alt", "%", row(&designs, |d| (d.fom.eta_alt * 100.0).into()));
    t.row("bandwidth", "MHz", row(&designs, |d| (d.fom.bandwidth / 1e6).into()));
    t.row("n_o", "", row(&designs, |d| d.fom.n_raman.into()));
    t.row("n_th", "", row(&designs, |d| d.fom.n_thermal.into()));
    t.row("eta_o", "", row(&designs, |d| d.fom.eta_o.into()));
    t.row("n_m", "", row(&designs, |d| d.n_m.into()));
    Ok(t)
}

fn outcomes(
    config: &Config,
    cases: &[Case],
    protocols: &[Protocol],
    report: &mut RunReport,
) -> Result<Vec<(Protocol, Case, ProtocolOutcome)>> {
    let device = config.device();
    let designs = designs(config, cases, report)?;
    let mut out = Vec::new();
    for &protocol in protocols {
        for (case, d) in cases.iter().zip(&designs) {
            let o = heralding(&device, d, &config.protocol(protocol, case.topology))?;
            report.protocol.push(ProtocolEntry {
                protocol: protocol.label().to_string(),
                objective: case.objective_label().to_string(),
                topology: case.topology.label().to_string(),
                outcome: o,
            });
            out.push((protocol, *case, o));
        }
    }
    Ok(out)
}

pub fn herald(config: &Config, cases: &[Case], protocols: &[Protocol], report: &mut RunReport) -> Result<Table> {
    let results = outcomes(config, cases, protocols, report)?;
    let columns = results.iter().map(|(p, c, _)| format!("{}:{}", p.label(), c.label())).collect();
    let mut t = Table::new("entanglement heralding", columns);
    let cells = |f: &dyn Fn(&ProtocolOutcome) -> Cell| results.iter().map(|(_, _, o)| f(o)).collect::<Vec<_>>();
    t.row("dt", "ns", cells(&|o| (o.dt * 1e9).into()));
    t.row("r_o", "MHz", cells(&|o| (o.r_o / 1e6).into()));
    t.row("P_1", "", cells(&|o| o.p1.into()));
    t.row("P_single", "", cells(&|o| o.p_single.into()));
    t.row("P_th", "", cells(&|o| o.p_th.into()));
    t.row("P_01", "", cells(&|o| o.p01.into()));
    t.row("P_succ", "", cells(&|o| o.p_succ.into()));
    t.row("n_r", "kHz", cells(&|o| (o.n_rate / 1e3).into()));
    t.row("tau_ent", "kHz", cells(&|o| (o.tau_ent / 1e3).into()));
    t.row("F", "", cells(&|o| o.fidelity.into()));
    t.row("P_in", "", cells(&|o| o.p_infidelity.into()));
    Ok(t)
}

pub struct McOptions<'a> {
    pub trials: u64,
    pub seed: u64,
    pub event_log: Option<&'a Path>,
}

pub fn monte_carlo(
    config: &Config,
    cases: &[Case],
    protocols: &[Protocol],
    options: &McOptions,
    report: &mut RunReport,
) -> Result<Table> {
    if options.trials < MIN_TRIALS {
        return Err(CliError::Usage(format!(
            "--trials {} is below the minimum of {MIN_TRIALS}",
            options.trials
        )));
    }
    let mut log = match options.event_log {
        Some(path) => Some(BufWriter::new(File::create(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?)),
        None => None,
    };
    let results = outcomes(config, cases, protocols, report)?;
    let mut columns = Vec::new();
    let mut rows: Vec<[Cell; 8]> = Vec::new();
    for (protocol, case, o) in &results {
        let mut sim = Simulator::new(options.trials, options.seed).attempt_period(o.dt + config.protocol(*protocol, case.topology).t_reset);
        if let Some(w) = log.as_mut() {
            sim = sim.event_log(w);
        }
        let (analytic, estimate) = match protocol {
            Protocol::TypeI => (o.fidelity.unwrap(), sim.type1(o.p1, o.p_th, config.eta_link, config.eta_det)?),
            Protocol::TypeII => (o.fidelity.unwrap(), sim.type2(o.p1, o.p_th, config.eta_link, config.eta_det)?),
            Protocol::BlueDetuned => {
                let p0 = (-(o.r_o * o.dt)).exp();
                (o.p_infidelity.unwrap(), sim.blue(p0, o.p_single, config.eta_link)?)
            }
        };
        let (value, error) = match protocol {
            Protocol::BlueDetuned => (estimate.p_infidelity_estimate.unwrap(), estimate.p_infidelity_std_error.unwrap()),
            _ => (estimate.fidelity_estimate, estimate.fidelity_std_error),
        };
        let sigma = sigma_distance(value, analytic, error);
        let pass = sigma.abs() <= 3.0;
        columns.push(format!("{}:{}", protocol.label(), case.label()));
        rows.push([
            analytic.into(),
            value.into(),
            error.into(),
            sigma.into(),
            if pass { "pass" } else { "fail" }.into(),
            Cell::Text(estimate.heralds.to_string()),
            Cell::Text(estimate.trials.to_string()),
            Cell::Text(estimate.seed.to_string()),
        ]);
        report.monte_carlo.push(McEntry {
            protocol: protocol.label().to_string(),
            objective: case.objective_label().to_string(),
            topology: case.topology.label().to_string(),
            analytic,
            estimate,
            sigma,
            pass,
        });
    }
    if let Some(mut w) = log {
        use std::io::Write;
        w.flush().map_err(|source| CliError::Io {
            path: options.event_log.unwrap().to_path_buf(),
            source,
        })?;
    }
    let mut t = Table::new("Monte Carlo check (fidelity, or P_in for blue)", columns);
    let names = [
        ("analytic", ""),
        ("estimate", ""),
        ("std error", ""),
        ("distance", "sigma"),
        ("3 sigma", ""),
        ("heralds", ""),
        ("trials", ""),
        ("seed", ""),
    ];
    for (i, (name, unit)) in names.into_iter().enumerate() {
        t.row(name, unit, rows.iter().map(|r| r[i].clone()).collect());
    }
    Ok(t)
}
