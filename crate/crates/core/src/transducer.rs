//! End-to-end evaluation of one device: loading, matching, figures of merit and
//! heralding, for a chosen objective and topology.

use serde::{Deserialize, Serialize};

use crate::circuit::DeviceParams;
use crate::error::Result;
use crate::fom::{figures_of_merit, optical_coupling_efficiency, FiguresOfMerit};
use crate::herald::{protocol_outcome, ProtocolConfig, ProtocolOutcome};
use crate::matching::{network_observables_mbvd, synthesize, validity_check, MatchingNetwork, MatchingObjective, Validity};
use crate::optomech::{loading_for, sideband_amplitudes, OptomechLoading, Topology};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Design {
    /// `None` when the network was supplied rather than synthesized.
    pub objective: Option<MatchingObjective>,
    pub topology: Topology,
    pub loading: OptomechLoading,
    pub network: MatchingNetwork,
    pub fom: FiguresOfMerit,
    pub validity: Validity,
    /// Thermal occupancy of the acoustic mode.
    pub n_m: f64,
}

fn loading(device: &DeviceParams, topology: Topology) -> Result<OptomechLoading> {
    let branch = device.motional_branch()?;
    let sidebands = sideband_amplitudes(device.kappa_o(), device.f_m, device.detuning)?;
    loading_for(
        topology,
        &branch,
        device.g_om(),
        device.gamma_i,
        device.kappa_o(),
        device.j_coupling,
        sidebands,
    )
}

fn finish(
    device: &DeviceParams,
    objective: Option<MatchingObjective>,
    topology: Topology,
    loading: OptomechLoading,
    network: MatchingNetwork,
) -> Result<Design> {
    let branch = device.motional_branch()?;
    let n_m = device.thermal_occupancy()?;
    let eta_o = optical_coupling_efficiency(device.kappa_ext, device.kappa_i)?;
    let fom = figures_of_merit(network.eta_e, eta_o, device.gamma_i, n_m, &loading, network.c_em)?;
    let validity = validity_check(device.k_eff_sq, device.kappa_o(), branch.series_resonance())?;
    Ok(Design {
        objective,
        topology,
        loading,
        network,
        fom,
        validity,
        n_m,
    })
}

/// Synthesizes the matching network for `objective` and evaluates the device.
pub fn evaluate(device: &DeviceParams, objective: MatchingObjective, topology: Topology, r_l: f64) -> Result<Design> {
    device.validate()?;
    let branch = device.motional_branch()?;
    let loading = loading(device, topology)?;
    let network = synthesize(objective, loading.r_em_opt, &branch, &device.static_branch(), device, r_l)?;
    finish(device, Some(objective), topology, loading, network)
}

/// Evaluates the device with a given L and C_T instead of synthesizing them.
pub fn evaluate_with_network(
    device: &DeviceParams,
    topology: Topology,
    l: f64,
    c_t: f64,
    r_l: f64,
) -> Result<Design> {
    device.validate()?;
    let branch = device.motional_branch()?;
    let loading = loading(device, topology)?;
    let network = network_observables_mbvd(l, c_t, r_l, &device.static_branch(), device, &branch)?;
    finish(device, None, topology, loading, network)
}

/// Heralding outcome for a design. The design's topology overrides the one in `config`.
pub fn heralding(device: &DeviceParams, design: &Design, config: &ProtocolConfig) -> Result<ProtocolOutcome> {
    let config = ProtocolConfig {
        topology: design.topology,
        ..*config
    };
    protocol_outcome(
        &config,
        design.network.g_em,
        device.g_om(),
        device.kappa_ext,
        device.kappa_i,
        device.j_coupling,
        design.fom.n_thermal,
    )
}
