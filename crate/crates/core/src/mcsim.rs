//! Seeded Monte Carlo of repeated two-node heralding attempts.
//!
//! Trials are split into fixed-size partitions. Partition `k` draws from a
//! ChaCha8 stream keyed by `(seed, k)`, so estimates depend only on the inputs
//! and the seed, never on how many worker threads ran them.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{require_probability, Error, Result};

/// Smallest accepted number of trials.
pub const MIN_TRIALS: u64 = 10_000;

/// Trials per RNG stream.
pub const PARTITION_SIZE: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Emission {
    None,
    One,
    Multi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    NoHerald,
    TruePositive,
    FalsePositive,
    /// More than one click in a time bin; rejected by post-selection.
    DiscardedMulti,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhotonKind {
    Signal,
    Thermal,
}

/// One emitted photon and whether it reached a detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Photon {
    /// 0 for node A, 1 for node B.
    pub node: u8,
    /// 0 for the early (or only) bin, 1 for the late bin.
    pub bin: u8,
    pub kind: PhotonKind,
    pub survived: bool,
}

/// Event-level record of a single attempt, emitted to the optional log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub node_a_signal: Emission,
    pub node_b_signal: Emission,
    pub node_a_thermal_bins: [u8; 2],
    pub node_b_thermal_bins: [u8; 2],
    pub photons: Vec<Photon>,
    /// Clicks per time bin.
    pub click_pattern: [u32; 2],
    pub classification: Classification,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub trials: u64,
    pub seed: u64,
    pub heralds: u64,
    pub true_positives: u64,
    pub false_positives: u64,
    pub discarded: u64,
    /// true/(true + false); NaN when nothing heralded.
    pub fidelity_estimate: f64,
    /// √(F(1 − F)/heralds).
    pub fidelity_std_error: f64,
    /// Heralds per attempt.
    pub herald_probability: f64,
    /// Heralds per second for the configured attempt period.
    pub herald_rate_estimate: f64,
    /// False positives per attempt (blue-detuned runs).
    pub p_infidelity_estimate: Option<f64>,
    pub p_infidelity_std_error: Option<f64>,
}

impl McEstimate {
    /// Signed distance of `analytic` from the fidelity estimate in standard errors.
    pub fn fidelity_sigma(&self, analytic: f64) -> f64 {
        sigma_distance(self.fidelity_estimate, analytic, self.fidelity_std_error)
    }
}

/// (estimate − reference)/std_error; zero when both coincide with no spread.
pub fn sigma_distance(estimate: f64, reference: f64, std_error: f64) -> f64 {
    let diff = estimate - reference;
    if diff == 0.0 {
        0.0
    } else {
        diff / std_error
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Counts {
    heralds: u64,
    true_positives: u64,
    false_positives: u64,
    discarded: u64,
}

impl Counts {
    fn add(&mut self, c: Classification) {
        match c {
            Classification::NoHerald => {}
            Classification::TruePositive => {
                self.heralds += 1;
                self.true_positives += 1;
            }
            Classification::FalsePositive => {
                self.heralds += 1;
                self.false_positives += 1;
            }
            Classification::DiscardedMulti => self.discarded += 1,
        }
    }

    fn merge(self, other: Counts) -> Counts {
        Counts {
            heralds: self.heralds + other.heralds,
            true_positives: self.true_positives + other.true_positives,
            false_positives: self.false_positives + other.false_positives,
            discarded: self.discarded + other.discarded,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Model {
    TypeI { p1: f64, p_th: f64, eta_link: f64, eta_det: f64 },
    TypeII { p1: f64, p_th: f64, eta_link: f64, eta_det: f64 },
    Blue { p0: f64, p1: f64, eta_link: f64 },
}

/// Photon list with a fixed capacity; avoids allocation on the hot path.
struct Photons {
    items: [Photon; 6],
    len: usize,
}

impl Photons {
    fn new() -> Self {
        Photons {
            items: [Photon { node: 0, bin: 0, kind: PhotonKind::Signal, survived: false }; 6],
            len: 0,
        }
    }

    fn push(&mut self, p: Photon) {
        self.items[self.len] = p;
        self.len += 1;
    }

    fn as_slice(&self) -> &[Photon] {
        &self.items[..self.len]
    }
}

struct Attempt {
    signal: [Emission; 2],
    thermal: [[u8; 2]; 2],
    photons: Photons,
    clicks: [u32; 2],
    classification: Classification,
}

fn survives(rng: &mut ChaCha8Rng, eta_link: f64, eta_det: f64) -> bool {
    let link = rng.random::<f64>() < eta_link;
    let det = rng.random::<f64>() < eta_det;
    link && det
}

impl Model {
    fn attempt(&self, rng: &mut ChaCha8Rng) -> Attempt {
        match *self {
            Model::TypeI { p1, p_th, eta_link, eta_det } => {
                let mut photons = Photons::new();
                let mut signal = [Emission::None; 2];
                let mut thermal = [[0u8; 2]; 2];
                for node in 0..2u8 {
                    let emits_signal = rng.random::<f64>() < p1;
                    let emits_thermal = rng.random::<f64>() < p_th;
                    let signal_ok = survives(rng, eta_link, eta_det);
                    let thermal_ok = survives(rng, eta_link, eta_det);
                    if emits_signal {
                        signal[node as usize] = Emission::One;
                        photons.push(Photon { node, bin: 0, kind: PhotonKind::Signal, survived: signal_ok });
                    }
                    if emits_thermal {
                        thermal[node as usize][0] = 1;
                        photons.push(Photon { node, bin: 0, kind: PhotonKind::Thermal, survived: thermal_ok });
                    }
                }
                let clicks = photons.as_slice().iter().filter(|p| p.survived).count() as u32;
                let signals = signal.iter().filter(|&&s| s == Emission::One).count();
                let classification = match clicks {
                    0 => Classification::NoHerald,
                    1 => {
                        let click = photons.as_slice().iter().find(|p| p.survived).unwrap();
                        if click.kind == PhotonKind::Signal && signals == 1 {
                            Classification::TruePositive
                        } else {
                            Classification::FalsePositive
                        }
                    }
                    _ => Classification::DiscardedMulti,
                };
                Attempt { signal, thermal, photons, clicks: [clicks, 0], classification }
            }
            Model::TypeII { p1, p_th, eta_link, eta_det } => {
                let mut photons = Photons::new();
                let mut signal = [Emission::None; 2];
                let mut thermal = [[0u8; 2]; 2];
                for node in 0..2u8 {
                    let emits_signal = rng.random::<f64>() < p1;
                    let late = rng.random::<f64>() < 0.5;
                    let thermal_early = rng.random::<f64>() < p_th;
                    let thermal_late = rng.random::<f64>() < p_th;
                    let signal_ok = survives(rng, eta_link, eta_det);
                    let early_ok = survives(rng, eta_link, eta_det);
                    let late_ok = survives(rng, eta_link, eta_det);
                    if emits_signal {
                        signal[node as usize] = Emission::One;
                        photons.push(Photon { node, bin: late as u8, kind: PhotonKind::Signal, survived: signal_ok });
                    }
                    if thermal_early {
                        thermal[node as usize][0] = 1;
                        photons.push(Photon { node, bin: 0, kind: PhotonKind::Thermal, survived: early_ok });
                    }
                    if thermal_late {
                        thermal[node as usize][1] = 1;
                        photons.push(Photon { node, bin: 1, kind: PhotonKind::Thermal, survived: late_ok });
                    }
                }
                let mut clicks = [0u32; 2];
                for p in photons.as_slice().iter().filter(|p| p.survived) {
                    clicks[p.bin as usize] += 1;
                }
                let classification = if clicks[0] > 1 || clicks[1] > 1 {
                    Classification::DiscardedMulti
                } else if clicks == [1, 1] {
                    let mut hits = photons.as_slice().iter().filter(|p| p.survived);
                    let a = hits.next().unwrap();
                    let b = hits.next().unwrap();
                    if a.kind == PhotonKind::Signal && b.kind == PhotonKind::Signal && a.node != b.node {
                        Classification::TruePositive
                    } else {
                        Classification::FalsePositive
                    }
                } else {
                    Classification::NoHerald
                };
                Attempt { signal, thermal, photons, clicks, classification }
            }
            Model::Blue { p0, p1, eta_link } => {
                let mut photons = Photons::new();
                let mut signal = [Emission::None; 2];
                for node in 0..2u8 {
                    let u = rng.random::<f64>();
                    let first_ok = rng.random::<f64>() < eta_link;
                    let second_ok = rng.random::<f64>() < eta_link;
                    let emission = if u < p0 {
                        Emission::None
                    } else if u < p0 + p1 {
                        Emission::One
                    } else {
                        Emission::Multi
                    };
                    signal[node as usize] = emission;
                    if emission != Emission::None {
                        photons.push(Photon { node, bin: 0, kind: PhotonKind::Signal, survived: first_ok });
                    }
                    if emission == Emission::Multi {
                        photons.push(Photon { node, bin: 0, kind: PhotonKind::Signal, survived: second_ok });
                    }
                }
                let clicks = photons.as_slice().iter().filter(|p| p.survived).count() as u32;
                let classification = match clicks {
                    0 => Classification::NoHerald,
                    1 => {
                        let wanted = matches!(
                            signal,
                            [Emission::One, Emission::None] | [Emission::None, Emission::One]
                        );
                        if wanted {
                            Classification::TruePositive
                        } else {
                            Classification::FalsePositive
                        }
                    }
                    _ => Classification::DiscardedMulti,
                };
                Attempt { signal, thermal: [[0; 2]; 2], photons, clicks: [clicks, 0], classification }
            }
        }
    }
}

fn partition_rng(seed: u64, partition: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(partition);
    rng
}

fn partition_len(trials: u64, partition: u64) -> u64 {
    (trials - partition * PARTITION_SIZE).min(PARTITION_SIZE)
}

/// Configurable Monte Carlo driver. The `run_*` functions use the defaults.
pub struct Simulator<'a> {
    trials: u64,
    seed: u64,
    attempt_period: f64,
    log: Option<&'a mut dyn Write>,
}

impl<'a> Simulator<'a> {
    pub fn new(trials: u64, seed: u64) -> Self {
        Simulator {
            trials,
            seed,
            attempt_period: 1.0,
            log: None,
        }
    }

    /// Duration of one attempt (s), used to turn herald counts into a rate.
    pub fn attempt_period(mut self, seconds: f64) -> Self {
        self.attempt_period = seconds;
        self
    }

    /// Writes one JSON record per trial, in trial order.
    pub fn event_log(mut self, sink: &'a mut dyn Write) -> Self {
        self.log = Some(sink);
        self
    }

    pub fn type1(self, p1: f64, p_th: f64, eta_link: f64, eta_det: f64) -> Result<McEstimate> {
        check_common(p1, p_th, eta_link, eta_det)?;
        self.run(Model::TypeI { p1, p_th, eta_link, eta_det })
    }

    pub fn type2(self, p1: f64, p_th: f64, eta_link: f64, eta_det: f64) -> Result<McEstimate> {
        check_common(p1, p_th, eta_link, eta_det)?;
        self.run(Model::TypeII { p1, p_th, eta_link, eta_det })
    }

    pub fn blue(self, p0: f64, p1: f64, eta_link: f64) -> Result<McEstimate> {
        require_probability("p0", p0)?;
        require_probability("p1", p1)?;
        require_probability("eta_link", eta_link)?;
        if p0 + p1 > 1.0 + 1e-12 {
            return Err(Error::Domain {
                field: "p0 + p1",
                value: p0 + p1,
                reason: "emission probabilities exceed 1",
            });
        }
        self.run(Model::Blue { p0, p1, eta_link })
    }

    fn run(self, model: Model) -> Result<McEstimate> {
        if self.trials < MIN_TRIALS {
            return Err(Error::Domain {
                field: "trials",
                value: self.trials as f64,
                reason: "at least 10000 trials are required",
            });
        }
        if !(self.attempt_period > 0.0 && self.attempt_period.is_finite()) {
            return Err(Error::Domain {
                field: "attempt_period",
                value: self.attempt_period,
                reason: "must be finite and strictly positive",
            });
        }
        let trials = self.trials;
        let seed = self.seed;
        let partitions = trials.div_ceil(PARTITION_SIZE);

        let counts = match self.log {
            None => (0..partitions)
                .into_par_iter()
                .map(|k| {
                    let mut rng = partition_rng(seed, k);
                    let mut c = Counts::default();
                    for _ in 0..partition_len(trials, k) {
                        c.add(model.attempt(&mut rng).classification);
                    }
                    c
                })
                .reduce(Counts::default, Counts::merge),
            Some(sink) => {
                let mut c = Counts::default();
                let mut index = 0u64;
                for k in 0..partitions {
                    let mut rng = partition_rng(seed, k);
                    for _ in 0..partition_len(trials, k) {
                        let a = model.attempt(&mut rng);
                        c.add(a.classification);
                        write_record(sink, index, &a);
                        index += 1;
                    }
                }
                c
            }
        };
        summarize(model, counts, trials, seed, self.attempt_period)
    }
}

fn write_record(sink: &mut dyn Write, trial: u64, a: &Attempt) {
    let record = TrialRecord {
        trial,
        node_a_signal: a.signal[0],
        node_b_signal: a.signal[1],
        node_a_thermal_bins: a.thermal[0],
        node_b_thermal_bins: a.thermal[1],
        photons: a.photons.as_slice().to_vec(),
        click_pattern: a.clicks,
        classification: a.classification,
    };
    // the log is a debugging aid; a failing sink must not change the estimate
    if let Ok(line) = serde_json::to_string(&record) {
        let _ = writeln!(sink, "{line}");
    }
}

fn check_common(p1: f64, p_th: f64, eta_link: f64, eta_det: f64) -> Result<()> {
    require_probability("p1", p1)?;
    require_probability("p_th", p_th)?;
    require_probability("eta_link", eta_link)?;
    require_probability("eta_det", eta_det)?;
    Ok(())
}

fn summarize(model: Model, c: Counts, trials: u64, seed: u64, period: f64) -> Result<McEstimate> {
    let blue = matches!(model, Model::Blue { .. });
    if c.heralds == 0 && !blue {
        return Err(Error::InsufficientStatistics { trials });
    }
    let n = trials as f64;
    let (fidelity, std_error) = if c.heralds == 0 {
        (f64::NAN, f64::NAN)
    } else {
        let h = c.heralds as f64;
        let f = c.true_positives as f64 / h;
        (f, (f * (1.0 - f) / h).sqrt())
    };
    let (p_in, p_in_err) = if blue {
        let p = c.false_positives as f64 / n;
        (Some(p), Some((p * (1.0 - p) / n).sqrt()))
    } else {
        (None, None)
    };
    let herald_probability = c.heralds as f64 / n;
    Ok(McEstimate {
        trials,
        seed,
        heralds: c.heralds,
        true_positives: c.true_positives,
        false_positives: c.false_positives,
        discarded: c.discarded,
        fidelity_estimate: fidelity,
        fidelity_std_error: std_error,
        herald_probability,
        herald_rate_estimate: herald_probability / period,
        p_infidelity_estimate: p_in,
        p_infidelity_std_error: p_in_err,
    })
}

/// One-photon heralding: a herald is exactly one click, and it is genuine when
/// the click came from the only signal photon emitted.
pub fn run_type1(p1: f64, p_th: f64, eta_link: f64, eta_det: f64, trials: u64, seed: u64) -> Result<McEstimate> {
    Simulator::new(trials, seed).type1(p1, p_th, eta_link, eta_det)
}

/// Time-bin heralding: one click in each bin, genuine when both are signal
/// photons from different nodes.
pub fn run_type2(p1: f64, p_th: f64, eta_link: f64, eta_det: f64, trials: u64, seed: u64) -> Result<McEstimate> {
    Simulator::new(trials, seed).type2(p1, p_th, eta_link, eta_det)
}

/// Blue-detuned pair generation with two-packet multi-photon events. Never
/// fails for lack of heralds: the estimate is false positives per attempt.
pub fn run_blue(p0: f64, p1: f64, eta_link: f64, trials: u64, seed: u64) -> Result<McEstimate> {
    Simulator::new(trials, seed).blue(p0, p1, eta_link)
}
