//! Exact enumeration of the Monte Carlo herald rules, used as an oracle for the sampler.

use fbar_core::mcsim::{run_blue, run_type1, run_type2, McEstimate};

/// (probability, value) pairs for one node.
type Outcomes<T> = Vec<(f64, T)>;

fn pairs<T: Copy>(node: &Outcomes<T>) -> impl Iterator<Item = (f64, T, T)> + '_ {
    node.iter().flat_map(move |&(pa, a)| node.iter().map(move |&(pb, b)| (pa * pb, a, b)))
}

/// Exact (true-positive, false-positive) probabilities per attempt.
#[derive(Debug, Default)]
struct Exact {
    tp: f64,
    fp: f64,
}

impl Exact {
    fn fidelity(&self) -> f64 {
        self.tp / (self.tp + self.fp)
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Fate {
    Absent,
    Lost,
    Click,
}

fn fate(p: f64, eta: f64) -> Outcomes<Fate> {
    vec![(1.0 - p, Fate::Absent), (p * (1.0 - eta), Fate::Lost), (p * eta, Fate::Click)]
}

fn type1(p1: f64, p_th: f64, eta: f64) -> Exact {
    let mut node = Vec::new();
    for (ps, s) in fate(p1, eta) {
        for (pt, t) in fate(p_th, eta) {
            node.push((ps * pt, (s, t)));
        }
    }
    let mut e = Exact::default();
    for (p, (sa, ta), (sb, tb)) in pairs(&node) {
        let clicks = [sa, ta, sb, tb].iter().filter(|&&f| f == Fate::Click).count();
        if clicks != 1 {
            continue;
        }
        let signals = [sa, sb].iter().filter(|&&f| f != Fate::Absent).count();
        if (sa == Fate::Click || sb == Fate::Click) && signals == 1 {
            e.tp += p;
        } else {
            e.fp += p;
        }
    }
    e
}

/// Per node: signal (absent, lost, or clicking in a bin), early and late thermal clicks.
#[derive(Clone, Copy)]
struct Node2 {
    signal: Option<Option<usize>>,
    thermal: [bool; 2],
}

fn type2(p1: f64, p_th: f64, eta: f64) -> Exact {
    let mut signal: Outcomes<Option<Option<usize>>> = vec![(1.0 - p1, None), (p1 * (1.0 - eta), Some(None))];
    for bin in 0..2 {
        signal.push((0.5 * p1 * eta, Some(Some(bin))));
    }
    let thermal = [(1.0 - p_th * eta, false), (p_th * eta, true)];
    let mut node = Vec::new();
    for &(ps, s) in &signal {
        for &(pe, early) in &thermal {
            for &(pl, late) in &thermal {
                node.push((ps * pe * pl, Node2 { signal: s, thermal: [early, late] }));
            }
        }
    }
    let mut e = Exact::default();
    for (p, a, b) in pairs(&node) {
        let mut clicks = [0; 2];
        let mut signal_clicks = 0;
        for n in [a, b] {
            if let Some(Some(bin)) = n.signal {
                clicks[bin] += 1;
                signal_clicks += 1;
            }
            for (count, &thermal) in clicks.iter_mut().zip(&n.thermal) {
                *count += thermal as usize;
            }
        }
        if clicks != [1, 1] {
            continue;
        }
        // Two signal clicks in different bins necessarily come from different nodes
        // unless one node emitted twice, which it cannot.
        let from_both = matches!((a.signal, b.signal), (Some(Some(_)), Some(Some(_))));
        if signal_clicks == 2 && from_both {
            e.tp += p;
        } else {
            e.fp += p;
        }
    }
    e
}

fn blue(p0: f64, p1: f64, eta: f64) -> Exact {
    let multi = 1.0 - p0 - p1;
    // (emitted count class, surviving photons)
    let node: Outcomes<(u8, u8)> = vec![
        (p0, (0, 0)),
        (p1 * (1.0 - eta), (1, 0)),
        (p1 * eta, (1, 1)),
        (multi * (1.0 - eta) * (1.0 - eta), (2, 0)),
        (multi * 2.0 * eta * (1.0 - eta), (2, 1)),
        (multi * eta * eta, (2, 2)),
    ];
    let mut e = Exact::default();
    for (p, (na, ca), (nb, cb)) in pairs(&node) {
        if ca + cb != 1 {
            continue;
        }
        if (na, nb) == (1, 0) || (na, nb) == (0, 1) {
            e.tp += p;
        } else {
            e.fp += p;
        }
    }
    e
}

fn within(mc: &McEstimate, exact: f64, sigmas: f64) -> bool {
    (mc.fidelity_estimate - exact).abs() <= sigmas * mc.fidelity_std_error
}

#[test]
fn enumeration_is_normalized() {
    // Without any loss or noise a lone signal click is always genuine.
    assert_eq!(type1(0.3, 0.0, 1.0).fidelity(), 1.0);
    assert_eq!(type2(0.3, 0.0, 1.0).fidelity(), 1.0);
    // Closed form of the enumerated Type-I rule without thermal photons.
    for (p1, eta) in [(0.24, 0.5), (0.1, 0.9), (0.5, 0.2)] {
        let p01 = p1 * (1.0 - p1);
        let want = 2.0 * p01 / (2.0 * p01 + 2.0 * p1 * p1 * (1.0 - eta));
        assert!((type1(p1, 0.0, eta).fidelity() - want).abs() < 1e-14);
    }
    // Loss only enters the Type-II rule through the chance of an extra thermal click.
    let a = type2(0.24, 0.0, 0.5).fidelity();
    let b = type2(0.24, 0.0, 0.1).fidelity();
    assert_eq!((a, b), (1.0, 1.0));
}

#[test]
fn type1_sampler_matches_enumeration() {
    for (p1, p_th, eta) in [(0.24364, 0.006133, 0.5), (0.22947, 0.001591, 0.5), (0.1, 0.05, 0.8)] {
        let exact = type1(p1, p_th, eta).fidelity();
        let mc = run_type1(p1, p_th, eta, 1.0, 400_000, 11).unwrap();
        assert!(within(&mc, exact, 3.0), "{} vs {exact}", mc.fidelity_estimate);
    }
}

#[test]
fn type2_sampler_matches_enumeration() {
    for (p1, p_th, eta) in [(0.24364, 0.006133, 0.5), (0.22947, 0.001591, 0.5), (0.3, 0.05, 0.9)] {
        let exact = type2(p1, p_th, eta).fidelity();
        let mc = run_type2(p1, p_th, eta, 1.0, 400_000, 12).unwrap();
        assert!(within(&mc, exact, 3.0), "{} vs {exact}", mc.fidelity_estimate);
    }
}

#[test]
fn detector_efficiency_folds_into_link() {
    let exact = type1(0.24364, 0.006133, 0.45).fidelity();
    let mc = run_type1(0.24364, 0.006133, 0.5, 0.9, 400_000, 13).unwrap();
    assert!(within(&mc, exact, 3.0), "{} vs {exact}", mc.fidelity_estimate);
}

#[test]
fn blue_sampler_matches_enumeration() {
    let exact = blue(0.70, 0.25, 0.5);
    let mc = run_blue(0.70, 0.25, 0.5, 400_000, 14).unwrap();
    assert!(within(&mc, exact.fidelity(), 3.0), "{} vs {}", mc.fidelity_estimate, exact.fidelity());
    let (est, err) = (mc.p_infidelity_estimate.unwrap(), mc.p_infidelity_std_error.unwrap());
    assert!((est - exact.fp).abs() <= 3.0 * err, "{est} vs {}", exact.fp);
}

#[test]
fn type2_estimates_agree_across_link_efficiency() {
    let lossy = run_type2(0.24364, 0.006133, 0.1, 1.0, 400_000, 15).unwrap();
    let clear = run_type2(0.24364, 0.006133, 0.9, 1.0, 400_000, 16).unwrap();
    let spread = lossy.fidelity_std_error.hypot(clear.fidelity_std_error);
    let gap = (lossy.fidelity_estimate - clear.fidelity_estimate).abs();
    assert!(gap <= 3.0 * spread, "{} vs {}", lossy.fidelity_estimate, clear.fidelity_estimate);
}
