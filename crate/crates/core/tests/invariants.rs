use proptest::prelude::*;
use protolife_core::info::{
    compress, decompress, entropy, joint_entropy, mutual_information, DiscreteDistribution, JointDistribution,
};
use protolife_core::lambda::{parse, random_term, LambdaTerm, RandomTermParams, ReductionBudget, TermKind};
use protolife_core::organization::{functional_equiv, FunctionalProbe};
use protolife_core::reactor::{run, EventLog, LambdaChemistry, Reactor, ReactorConfig, ReactorSettings};
use protolife_core::replicator::{integrate, FitnessMatrix};
use protolife_core::seed::rng_from_seed;
use protolife_core::tile::{collide_tiles, random_polyomino, Symmetry};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use std::collections::BTreeMap;

fn term_from_seed(seed: u64) -> LambdaTerm {
    let params = RandomTermParams {
        max_depth: 6,
        ..RandomTermParams::default()
    };
    random_term(&mut rng_from_seed(seed), &params).unwrap()
}

/// Renames every variable, bound or free, by prefixing it.
fn prefixed(t: &LambdaTerm) -> LambdaTerm {
    match t.kind() {
        TermKind::Var(x) => LambdaTerm::var(format!("q{x}")),
        TermKind::Abs(x, b) => LambdaTerm::abs(format!("q{x}"), prefixed(b)),
        TermKind::App(f, a) => LambdaTerm::app(prefixed(f), prefixed(a)),
    }
}

fn probe_spec() -> FunctionalProbe {
    FunctionalProbe {
        probes: ["λx.x", "λx.λy.x", "λx.λy.y"]
            .iter()
            .map(|p| parse(p).unwrap())
            .collect(),
        budget: ReductionBudget::steps(300).unwrap(),
    }
}

fn distribution() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, 1..8).prop_filter("nonzero mass", |w| w.iter().sum::<f64>() > 1e-6)
}

fn normalize(w: &[f64]) -> Vec<f64> {
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn print_parse_round_trip(seed in any::<u64>()) {
        let t = term_from_seed(seed);
        let text = t.to_string();
        let back = parse(&text).unwrap();
        prop_assert_eq!(back.to_string(), text);
        prop_assert_eq!(back, t);
    }

    #[test]
    fn canonical_key_ignores_names(seed in any::<u64>()) {
        let t = term_from_seed(seed);
        let r = prefixed(&t);
        prop_assert_eq!(t.canonical_key(), r.canonical_key());
        prop_assert_eq!(parse(&t.canonical_key()).unwrap(), t);
    }

    #[test]
    fn codec_round_trip(data in prop::collection::vec(any::<u8>(), 0..2048)) {
        let packed = compress(&data).unwrap();
        prop_assert_eq!(decompress(&packed).unwrap(), data);
    }

    #[test]
    fn codec_round_trip_repetitive(unit in prop::collection::vec(0u8..4, 1..16), reps in 1usize..300) {
        let data: Vec<u8> = unit.iter().copied().cycle().take(unit.len() * reps).collect();
        let packed = compress(&data).unwrap();
        prop_assert_eq!(decompress(&packed).unwrap(), data);
    }

    #[test]
    fn entropy_bounds(w in distribution()) {
        let p = normalize(&w);
        let d = DiscreteDistribution::from_pairs(p.iter().enumerate().map(|(i, &q)| (i.to_string(), q))).unwrap();
        let h = entropy(&d);
        prop_assert!(h >= 0.0);
        prop_assert!(h <= (p.len() as f64).log2() + 1e-9);
    }

    #[test]
    fn mutual_information_is_symmetric_and_bounded(w in prop::collection::vec(0.0f64..1.0, 9)) {
        prop_assume!(w.iter().sum::<f64>() > 1e-6);
        let p = normalize(&w);
        let j = JointDistribution::from_pairs(
            p.iter().enumerate().map(|(i, &q)| (vec![(i / 3).to_string(), (i % 3).to_string()], q)),
        ).unwrap();
        let mi = mutual_information(&j).unwrap();
        let mi_swapped = mutual_information(&j.swapped()).unwrap();
        prop_assert!((mi - mi_swapped).abs() < 1e-9);
        prop_assert!(mi >= 0.0);
        let hx = entropy(&j.marginal(0).unwrap());
        let hy = entropy(&j.marginal(1).unwrap());
        prop_assert!(mi <= hx.min(hy) + 1e-9);
        prop_assert!(joint_entropy(&j) <= hx + hy + 1e-9);
    }

    #[test]
    fn independent_joint_has_no_information(a in distribution(), b in distribution()) {
        let da = DiscreteDistribution::from_pairs(normalize(&a).into_iter().enumerate().map(|(i, q)| (i.to_string(), q))).unwrap();
        let db = DiscreteDistribution::from_pairs(normalize(&b).into_iter().enumerate().map(|(i, q)| (i.to_string(), q))).unwrap();
        let j = JointDistribution::independent(&[&da, &db]).unwrap();
        prop_assert!(mutual_information(&j).unwrap() < 1e-9);
    }

    #[test]
    fn replicator_stays_on_simplex(
        w in prop::collection::vec(-2.0f64..2.0, 9),
        x0 in prop::collection::vec(0.01f64..1.0, 3),
    ) {
        let rows: Vec<Vec<f64>> = w.chunks(3).map(<[f64]>::to_vec).collect();
        let traj = integrate(&normalize(&x0), &FitnessMatrix::new(&rows).unwrap(), 5.0, 0.05).unwrap();
        for (_, x) in &traj {
            prop_assert!(x.iter().all(|&v| v >= 0.0));
            prop_assert!((x.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn tile_collisions_add_area(seed in any::<u64>(), na in 1usize..=6, nb in 1usize..=6) {
        let mut rng = rng_from_seed(seed);
        let a = random_polyomino(&mut rng, na);
        let b = random_polyomino(&mut rng, nb);
        if let Some(c) = collide_tiles(&a, &b, &mut rng) {
            prop_assert_eq!(c.area(), na + nb);
            prop_assert!(!c.has_hole());
        }
        let full = Symmetry { use_rotations: true, use_reflections: true };
        prop_assert_eq!(a.canonical(full), a.rotated().reflected().canonical(full));
    }

    #[test]
    fn functional_equivalence_is_an_equivalence(s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>()) {
        let spec = probe_spec();
        let (a, b, c) = (term_from_seed(s1), term_from_seed(s2), term_from_seed(s3));
        prop_assert!(functional_equiv(&a, &a, &spec));
        prop_assert!(functional_equiv(&a, &prefixed(&a), &spec));
        prop_assert_eq!(functional_equiv(&a, &b, &spec), functional_equiv(&b, &a, &spec));
        if functional_equiv(&a, &b, &spec) && functional_equiv(&b, &c, &spec) {
            prop_assert!(functional_equiv(&a, &c, &spec));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn tile_log_replays_to_final_population(seed in any::<u64>()) {
        let json = format!(
            r#"{{"seed": {seed}, "max_steps": 150, "track_instances": true,
                "chemistry": {{"id": "tiles", "max_area": 3}},
                "initial_population": {{"random_count": 60}}}}"#
        );
        let config: ReactorConfig = serde_json::from_str(&json).unwrap();
        let mut events = Vec::new();
        let summary = run(&config, &mut events, std::io::sink()).unwrap();
        let log = EventLog::read_jsonl(events.as_slice()).unwrap();
        prop_assert_eq!(log.len() as u64, summary.events);
        prop_assert_eq!(log.replay(&summary.initial_counts).unwrap(), summary.final_counts);
    }
}

#[test]
fn pair_sampling_is_uniform_over_ordered_distinct_instances() {
    let counts = [("λx.x", 5u64), ("λx.λy.x", 3), ("λx.λy.y", 2)];
    let mut reactor = Reactor::new(LambdaChemistry::default(), ReactorSettings::default());
    for (text, n) in counts {
        for _ in 0..n {
            reactor.insert(parse(text).unwrap());
        }
    }
    let keys: Vec<String> = counts.iter().map(|(t, _)| parse(t).unwrap().canonical_key()).collect();
    let species = |idx: usize| keys.iter().position(|k| k == reactor.instance_key(idx)).unwrap();

    let draws = 100_000u64;
    let mut observed = [[0u64; 3]; 3];
    let mut rng = rng_from_seed(7);
    for _ in 0..draws {
        let (i, j) = reactor.sample_pair(&mut rng).unwrap();
        assert_ne!(i, j);
        observed[species(i)][species(j)] += 1;
    }

    let total: u64 = counts.iter().map(|c| c.1).sum();
    let pairs = (total * (total - 1)) as f64;
    let mut stat = 0.0;
    for a in 0..3 {
        for b in 0..3 {
            let na = counts[a].1 as f64;
            let nb = counts[b].1 as f64 - if a == b { 1.0 } else { 0.0 };
            let expected = draws as f64 * na * nb / pairs;
            let diff = observed[a][b] as f64 - expected;
            stat += diff * diff / expected;
        }
    }
    let critical = ChiSquared::new(8.0).unwrap().inverse_cdf(0.99);
    assert!(stat < critical, "chi-square {stat} exceeds {critical}");
}

#[test]
fn rk4_error_shrinks_with_step_size() {
    let w = FitnessMatrix::new(&[vec![0.0, 2.0, -1.0], vec![-1.0, 0.0, 2.0], vec![2.0, -1.0, 0.0]]).unwrap();
    let x0 = [0.5, 0.3, 0.2];
    let reference = integrate(&x0, &w, 2.0, 0.001).unwrap();
    let exact = &reference.last().unwrap().1;
    for dt in [0.1, 0.05, 0.02] {
        let approx = integrate(&x0, &w, 2.0, dt).unwrap();
        let x = &approx.last().unwrap().1;
        let err = x.iter().zip(exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err <= 10.0 * dt * dt, "dt {dt}: error {err}");
    }
}

#[test]
fn counts_map_entropy_matches_distribution() {
    let counts: BTreeMap<String, u64> = [("a".to_string(), 2), ("b".to_string(), 2)].into();
    let d = DiscreteDistribution::from_counts(&counts).unwrap();
    assert!((entropy(&d) - 1.0).abs() < 1e-12);
}
