use num_rational::Ratio;
use proptest::prelude::*;

use super::ks::ks_one_sample;
use super::*;
use crate::error::Error;
use crate::fock::{enumerate_fock, OccupationState};
use crate::ode::{linspace, Tolerance};
use crate::reduction::{build_classical_generator, Channel, ChannelKind, ClassicalGenerator};
use crate::system::{validate_spec, ParticleStatistics, SystemSpec, Truncation};

fn hop(to: usize, from: usize, w: f64) -> Channel<f64> {
    Channel {
        kind: ChannelKind::Hop { to, from },
        coefficient: w,
    }
}

fn walker(n: usize, w: f64) -> ClassicalGenerator<f64> {
    let mut ch = Vec::new();
    for k in 1..n {
        ch.push(hop(k, k - 1, w));
        ch.push(hop(k - 1, k, w));
    }
    ClassicalGenerator::new(n, ParticleStatistics::Single, ch).unwrap()
}

fn fermion_chain(sites: usize, gamma: f64, eta: f64, theta: f64) -> ClassicalGenerator<f64> {
    let mut ch = Vec::new();
    for k in 1..sites {
        ch.push(hop(k, k - 1, gamma));
        ch.push(hop(k - 1, k, gamma));
    }
    ch.push(Channel {
        kind: ChannelKind::Pump(0),
        coefficient: eta,
    });
    ch.push(Channel {
        kind: ChannelKind::Loss(sites - 1),
        coefficient: theta,
    });
    ClassicalGenerator::new(sites, ParticleStatistics::Fermion, ch).unwrap()
}

fn single_space(n: usize) -> crate::fock::FockSpace {
    enumerate_fock(n, ParticleStatistics::Single, Truncation::None).unwrap()
}

fn tol() -> Tolerance<f64> {
    Tolerance::new(1e-12, 1e-10)
}

#[test]
fn zero_generator_keeps_distribution() {
    let gen = ClassicalGenerator::<f64>::new(3, ParticleStatistics::Single, vec![]).unwrap();
    let q = gen.rate_matrix(&single_space(3)).unwrap();
    let p0 = [0.2, 0.5, 0.3];
    let sol = solve_master(&q, &p0, &linspace(0.0, 5.0, 5), tol()).unwrap();
    for p in &sol.probabilities {
        assert_eq!(p.as_slice(), &p0);
    }
}

#[test]
fn two_state_relaxation() {
    let q = walker(2, 1.0).rate_matrix(&single_space(2)).unwrap();
    let sol = solve_master(&q, &[1.0, 0.0], &linspace(0.0, 5.0, 50), tol()).unwrap();
    for (t, p) in sol.times.iter().zip(&sol.probabilities) {
        assert!((p[0] - 0.5 * (1.0 + (-2.0 * t).exp())).abs() < 1e-9);
    }
    for total in sol.totals() {
        assert!((total - 1.0).abs() < 1e-9);
    }
    assert_eq!(sol.clipping.below_threshold, 0);
}

#[test]
fn master_rejects_bad_input() {
    let q = walker(2, 1.0).rate_matrix(&single_space(2)).unwrap();
    assert!(matches!(
        solve_master(&q, &[1.0], &[0.0, 1.0], tol()),
        Err(Error::DimensionMismatch { .. })
    ));
    assert!(solve_master(&q, &[0.7, 0.7], &[0.0, 1.0], tol()).is_err());
}

#[test]
fn closed_bosons_equilibrate_uniformly_exactly() {
    let q = |n, d| Ratio::<i64>::new(n, d);
    let spec = validate_spec(
        SystemSpec::new(2, ParticleStatistics::Boson)
            .with_real_coupling(0, 1, q(1, 1))
            .with_uniform_dephasing(q(3, 1))
            .with_truncation(Truncation::FixedTotal(3)),
    )
    .unwrap();
    let space = enumerate_fock(2, ParticleStatistics::Boson, Truncation::FixedTotal(3)).unwrap();
    let qm = build_classical_generator(&spec).unwrap().rate_matrix(&space).unwrap();
    let p = stationary_distribution(&qm).unwrap();
    assert_eq!(p, vec![q(1, 4); 4]);
}

#[test]
fn fermion_shell_is_uniform() {
    let spec = validate_spec(
        SystemSpec::<f64>::new(4, ParticleStatistics::Fermion)
            .with_real_coupling(0, 1, 0.3)
            .with_real_coupling(1, 2, 0.9)
            .with_real_coupling(2, 3, 0.4)
            .with_real_coupling(0, 3, 0.2)
            .with_energies(vec![0.0, 1.0, -0.5, 2.0])
            .with_dephasing(vec![1.0, 2.0, 3.0, 4.0]),
    )
    .unwrap();
    let full = enumerate_fock(4, ParticleStatistics::Fermion, Truncation::None).unwrap();
    let gen = build_classical_generator(&spec).unwrap();
    let err = stationary_distribution(&gen.rate_matrix(&full).unwrap()).unwrap_err();
    assert!(matches!(err, Error::NotUnique(ref c) if c.len() == 5));
    let shell = full.shell(2);
    let p = stationary_distribution(&gen.rate_matrix(&shell).unwrap()).unwrap();
    for x in p {
        assert!((x - 1.0 / 6.0).abs() < 1e-12);
    }
}

#[test]
fn fully_occupied_fermions_are_absorbing() {
    let gen = fermion_chain(2, 1.0, 0.0, 0.0);
    let gen = ClassicalGenerator::new(
        2,
        ParticleStatistics::Fermion,
        gen.channels().iter().filter(|c| matches!(c.kind, ChannelKind::Hop { .. })).cloned().collect(),
    )
    .unwrap();
    let mut rng = stream_rng(1, 0);
    let state = OccupationState::new(vec![1, 1]);
    assert!(matches!(gillespie_step(&gen, &state, &mut rng), Err(Error::Absorbing)));
}

#[test]
fn single_channel_waiting_time_mean() {
    let lambda = 2.5;
    let gen = walker(2, lambda);
    let mut rng = stream_rng(7, 0);
    let state = OccupationState::unit(2, 0);
    let n = 100_000;
    let dts: Vec<f64> = (0..n).map(|_| gillespie_step(&gen, &state, &mut rng).unwrap().dt).collect();
    let mean = dts.iter().sum::<f64>() / n as f64;
    let se = (1.0 / lambda) / (n as f64).sqrt();
    assert!((mean - 1.0 / lambda).abs() < 3.0 * se);
}

#[test]
fn channel_selection_frequency() {
    let chans = vec![
        Channel {
            kind: ChannelKind::Pump(0),
            coefficient: 1.0,
        },
        Channel {
            kind: ChannelKind::Pump(1),
            coefficient: 3.0,
        },
    ];
    let gen = ClassicalGenerator::new(2, ParticleStatistics::Boson, chans).unwrap();
    let state = OccupationState::vacuum(2);
    let mut rng = stream_rng(11, 0);
    let n = 100_000;
    let second = (0..n)
        .filter(|_| gillespie_step(&gen, &state, &mut rng).unwrap().channel == 1)
        .count();
    let f = second as f64 / n as f64;
    let sigma = (0.75f64 * 0.25 / n as f64).sqrt();
    assert!((f - 0.75).abs() < 3.0 * sigma);
}

#[test]
fn empty_lattice_without_pump_idles() {
    let gen = fermion_chain(4, 1.0, 0.0, 0.3);
    let rec = simulate_trajectory(&gen, &OccupationState::vacuum(4), &StopCondition::Time(10.0), 3, 0, 100).unwrap();
    assert!(rec.events.is_empty());
    assert_eq!(rec.termination, Termination::TimeLimit);
    assert_eq!(rec.end_time, 10.0);
}

#[test]
fn two_site_walker_is_ergodic() {
    let frac = occupancy_fractions(&walker(2, 1.0), &OccupationState::unit(2, 0), 1e4, 5, 0).unwrap();
    let f0 = frac[&vec![1, 0]];
    assert!((f0 - 0.5).abs() < 3.0 * 0.005, "f0={f0}");
}

#[test]
fn trajectories_are_reproducible() {
    let gen = fermion_chain(5, 1.0, 0.5, 0.5);
    let stop = StopCondition::Time(50.0);
    let csv = |seed, stream| {
        let rec = simulate_trajectory(&gen, &OccupationState::vacuum(5), &stop, seed, stream, 1_000_000).unwrap();
        let mut out = Vec::new();
        rec.write_csv(&mut out).unwrap();
        (rec, out)
    };
    let (a, ca) = csv(42, 3);
    let (_, cb) = csv(42, 3);
    let (_, cc) = csv(42, 4);
    assert_eq!(ca, cb);
    assert_ne!(ca, cc);
    assert!(ca.starts_with(b"# seed=42 stream=3\n"));
    for w in a.events.windows(2) {
        assert!(w[1].time > w[0].time);
        let moved: u32 = w[0].state.iter().zip(&w[1].state).map(|(x, y)| x.abs_diff(*y)).sum();
        assert!(moved == 1 || moved == 2);
    }
}

#[test]
fn event_cap_flags_overflow() {
    let chans = vec![Channel {
        kind: ChannelKind::Pump(0),
        coefficient: 1.0,
    }];
    let gen = ClassicalGenerator::new(1, ParticleStatistics::Boson, chans).unwrap();
    let rec = simulate_trajectory(&gen, &OccupationState::vacuum(1), &StopCondition::Time(1e9), 1, 0, 1000).unwrap();
    assert!(rec.overflow);
    assert_eq!(rec.events.len(), 1000);
    let rec = simulate_trajectory(&gen, &OccupationState::vacuum(1), &StopCondition::Events(10), 1, 0, 1000).unwrap();
    assert_eq!(rec.termination, Termination::EventCount);
    assert!(!rec.overflow);
}

#[test]
fn persistent_time_tail() {
    let gen = walker(3, 1.0);
    let state = OccupationState::unit(3, 1);
    let n = 100_000;
    let s = sample_persistent_times(&gen, &state, n, 9, &Binning::FreedmanDiaconis).unwrap();
    let expected = (-2.0f64).exp();
    let sigma = (expected * (1.0 - expected) / n as f64).sqrt();
    assert!((s.empirical_tail(1.0) - expected).abs() < 3.0 * sigma);
    assert_eq!(s.empirical_tail(0.0), 1.0);
    let r = ks_one_sample(&s.values[..10_000], |t| 1.0 - (-2.0 * t).exp(), 0.01);
    assert!(r.pass, "{r:?}");
    assert!((s.histogram.total_mass() - 1.0).abs() < 1e-12);
    let end = gen.clone();
    let absorbing = ClassicalGenerator::new(3, ParticleStatistics::Single, vec![]).unwrap();
    assert!(sample_persistent_times(&absorbing, &state, 10, 1, &Binning::default()).is_err());
    drop(end);
}

#[test]
fn arrival_at_occupied_target_is_immediate() {
    let gen = walker(4, 1.0);
    let a = sample_first_arrival(&gen, &OccupationState::unit(4, 3), &[3], 50, 1, &ArrivalOptions::default()).unwrap();
    assert!(a.samples.values.iter().all(|&t| t == 0.0));
    assert_eq!(a.censored, 0);
}

#[test]
fn censored_arrivals_are_disclosed() {
    let gen = walker(10, 1.0);
    let opts = ArrivalOptions {
        time_cap: 30.0,
        ..ArrivalOptions::default()
    };
    let a = sample_first_arrival(&gen, &OccupationState::unit(10, 0), &[9], 2000, 2, &opts).unwrap();
    assert!(a.censored > 0 && a.censored < 2000);
    assert_eq!(a.samples.count + a.censored, 2000);
    assert!((a.accounted_mass() - 1.0).abs() < 1e-15);
    assert!((a.samples.histogram.total_mass() + a.censored_fraction() - 1.0).abs() < 1e-12);
    assert!(a.samples.values.iter().all(|&t| t <= 30.0));
}

#[test]
fn deterministic_state_has_exact_mean() {
    let gen = ClassicalGenerator::<f64>::new(3, ParticleStatistics::Boson, vec![]).unwrap();
    let run = StationaryRun {
        burn_in: 1.0,
        observe: 4.0,
        n_trajectories: 3,
        first_stream: 0,
        event_cap: 10,
    };
    let acc = ensemble_statistics(&gen, &OccupationState::new(vec![2, 0, 5]), &run, 1).unwrap();
    let s = acc.statistics().unwrap();
    assert_eq!(s.means, vec![2.0, 0.0, 5.0]);
    assert_eq!(s.stderrs, vec![0.0; 3]);
    assert!(s.stationary);
    let mut out = Vec::new();
    s.write_csv(&mut out, Some(1)).unwrap();
    assert!(String::from_utf8(out).unwrap().starts_with("# seed=1\nsite,mean,stderr\n0,2,0\n"));
}

#[test]
fn burn_in_longer_than_run_is_rejected() {
    let gen = walker(2, 1.0);
    assert!(matches!(
        stationary_trajectory(&gen, &OccupationState::unit(2, 0), 5.0, 0.0, 1, 0, 100),
        Err(Error::BurnIn { .. })
    ));
}

#[test]
fn merge_is_disjoint_union() {
    let gen = fermion_chain(3, 1.0, 0.4, 0.4);
    let init = OccupationState::vacuum(3);
    let run = |first, n| StationaryRun {
        burn_in: 10.0,
        observe: 50.0,
        n_trajectories: n,
        first_stream: first,
        event_cap: DEFAULT_EVENT_CAP,
    };
    let all = ensemble_statistics(&gen, &init, &run(0, 6), 8).unwrap();
    let a = ensemble_statistics(&gen, &init, &run(0, 2), 8).unwrap();
    let b = ensemble_statistics(&gen, &init, &run(2, 4), 8).unwrap();
    let ab = a.clone().merge(b.clone()).unwrap();
    let ba = b.merge(a.clone()).unwrap();
    assert_eq!(ab, all);
    assert_eq!(ab.statistics().unwrap(), ba.statistics().unwrap());
    assert!(a.clone().merge(a).is_err());
}

#[test]
fn fermion_chain_site_zero_occupation() {
    let gen = fermion_chain(10, 1.0, 0.2, 0.2);
    let run = StationaryRun {
        burn_in: default_burn_in(&gen),
        observe: 2000.0,
        n_trajectories: 20,
        first_stream: 0,
        event_cap: DEFAULT_EVENT_CAP,
    };
    let s = ensemble_statistics(&gen, &OccupationState::vacuum(10), &run, 2024)
        .unwrap()
        .statistics()
        .unwrap();
    assert!((s.means[0] - 14.0 / 19.0).abs() < 3.0 * s.stderrs[0] + 1e-3, "{:?}", s.means);
}

#[test]
fn monte_carlo_matches_master_equation() {
    let spec = validate_spec(
        SystemSpec::new(2, ParticleStatistics::Boson)
            .with_real_coupling(0, 1, 1.0)
            .with_uniform_dephasing(2.0)
            .with_pump(vec![0.3, 0.0])
            .with_loss(vec![0.0, 0.6])
            .with_truncation(Truncation::MaxTotal(30)),
    )
    .unwrap();
    let gen = build_classical_generator(&spec).unwrap();
    let space = enumerate_fock(2, ParticleStatistics::Boson, Truncation::MaxTotal(30)).unwrap();
    let q = gen.rate_matrix(&space).unwrap();
    let t = 2.0;
    let mut p0 = vec![0.0; space.len()];
    p0[0] = 1.0;
    let sol = solve_master(&q, &p0, &[0.0, t], tol()).unwrap();
    let p = &sol.probabilities[1];
    let n = 10_000;
    let mut counts = vec![0usize; space.len()];
    for k in 0..n {
        let rec = simulate_trajectory(&gen, &OccupationState::vacuum(2), &StopCondition::Time(t), 77, k, 100_000).unwrap();
        let last = rec.events.last().map_or(vec![0, 0], |e| e.state.clone());
        counts[space.rank(&OccupationState::new(last)).unwrap()] += 1;
    }
    for (r, &c) in counts.iter().enumerate() {
        let f = c as f64 / n as f64;
        let sigma = (p[r] * (1.0 - p[r]) / n as f64).sqrt();
        assert!((f - p[r]).abs() <= 4.0 * sigma + 1.0 / n as f64, "state {r}: {f} vs {}", p[r]);
    }
}

#[test]
fn histogram_layouts() {
    let s = SampleSet::new(vec![0.0, 1.0, 2.0, 3.0], &Binning::Bins(2)).unwrap();
    assert_eq!(s.histogram.edges, vec![0.0, 1.5, 3.0]);
    assert_eq!(s.histogram.counts, vec![2, 2]);
    let mut out = Vec::new();
    s.histogram.write_csv(&mut out, Some(5)).unwrap();
    assert_eq!(String::from_utf8(out).unwrap(), "# seed=5\nbin_lo,bin_hi,mass\n0,1.5,0.5\n1.5,3,0.5\n");
    let mut out = Vec::new();
    s.write_values_csv(&mut out, None).unwrap();
    assert_eq!(String::from_utf8(out).unwrap(), "value\n0\n1\n2\n3\n");
    assert!(SampleSet::new(vec![-1.0], &Binning::default()).is_err());
    let same = SampleSet::new(vec![2.0; 5], &Binning::default()).unwrap();
    assert_eq!(same.histogram.counts, vec![5]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn histogram_masses_sum_to_one(values in prop::collection::vec(0.0f64..100.0, 1..500)) {
        let s = SampleSet::new(values, &Binning::FreedmanDiaconis).unwrap();
        prop_assert!((s.histogram.total_mass() - 1.0).abs() < 1e-12);
        prop_assert_eq!(s.histogram.counts.iter().sum::<u64>() as usize, s.count);
    }

    #[test]
    fn seeded_runs_are_deterministic(seed in any::<u64>(), stream in 0u64..1000) {
        let gen = fermion_chain(4, 1.0, 0.5, 0.5);
        let stop = StopCondition::Time(20.0);
        let a = simulate_trajectory(&gen, &OccupationState::vacuum(4), &stop, seed, stream, 100_000).unwrap();
        let b = simulate_trajectory(&gen, &OccupationState::vacuum(4), &stop, seed, stream, 100_000).unwrap();
        prop_assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn waiting_times_are_exponential(seed in any::<u64>()) {
        let gen = fermion_chain(4, 1.0, 0.5, 0.5);
        let by_state = collect_waiting_times(&gen, &OccupationState::vacuum(4), 20_000.0, seed, 0).unwrap();
        let mut tested = 0;
        for w in by_state.values().filter(|w| w.samples.len() >= 2000) {
            let r = ks_one_sample(&w.samples, |t| 1.0 - (-w.exit_rate * t).exp(), 0.001);
            prop_assert!(r.pass, "{:?}", r);
            tested += 1;
        }
        prop_assert!(tested >= 3);
    }
}
