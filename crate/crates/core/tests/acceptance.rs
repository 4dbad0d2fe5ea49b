//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use protolife_core::arms::{sweep, SweepParams};
use protolife_core::info::{
    compress, decompress, entropy, mutual_information, DiscreteDistribution, JointDistribution,
};
use protolife_core::lambda::{
    normal_form, parse, random_term, rewrite_step_traced, CollisionLaw, LambdaTerm, RandomTermParams, ReductionBudget,
    Rule,
};
use protolife_core::organization::{
    build_network, classify_organizations, detect_hypercycles, detect_replicators, is_closed, is_self_maintaining,
    verify_witness, CycleLimits, EquivalenceSpec, Reaction, ReactionNetwork,
};
use protolife_core::reactor::{
    run, EventLog, LambdaChemistry, Outflow, ReactionEvent, Reactor, ReactorConfig, ReactorSettings,
};
use protolife_core::replicator::{integrate, replicator_rhs, FitnessMatrix};
use protolife_core::seed::{rng_from_seed, DEFAULT_SEED};
use protolife_core::tile::{collide_tiles, join_at, random_polyomino, Symmetry, Tile};
use rand::Rng;
use std::collections::BTreeSet;
use std::panic;
use std::time::{Duration, Instant};

type Check = Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn t(s: &str) -> LambdaTerm {
    parse(s).expect("test term parses")
}

fn criterion_1() -> Check {
    let var = |s: &str| LambdaTerm::var(s);
    let lam = |x: &str, b: LambdaTerm| LambdaTerm::abs(x, b);
    let app = LambdaTerm::app;
    // Concrete E, Q in normal form so the rule fires at the root.
    let q = t("λq.(q)q");
    let cases: Vec<(LambdaTerm, LambdaTerm, Rule)> = vec![
        (app(lam("x", var("x")), q.clone()), q.clone(), Rule::Identity),
        (app(lam("x", t("(y)z")), q.clone()), t("(y)z"), Rule::Discard),
        (
            app(lam("x", lam("y", t("(x)y"))), var("w")),
            lam("y", app(lam("x", t("(x)y")), var("w"))),
            Rule::PushUnderBinder,
        ),
        (
            app(lam("x", app(var("x"), var("y"))), q.clone()),
            app(app(lam("x", var("x")), q.clone()), app(lam("x", var("y")), q.clone())),
            Rule::Distribute,
        ),
    ];
    for (lhs, rhs, rule) in cases {
        let (out, used) = rewrite_step_traced(&lhs).ok_or_else(|| format!("{lhs} has no redex"))?;
        ensure(used == rule && out.to_string() == rhs.to_string(), || {
            format!("{lhs} gave {out} by {used:?}, expected {rhs} by {rule:?}")
        })?;
    }
    // Push blocked: x free in E and y free in Q, so the inner binder is renamed.
    let blocked = app(lam("x", lam("y", t("(x)y"))), var("y"));
    let (out, used) = rewrite_step_traced(&blocked).ok_or("no redex")?;
    ensure(used == Rule::Rename, || format!("blocked push used {used:?}"))?;
    let expected = app(lam("x", lam("r0", app(lam("y", t("(x)y")), var("r0")))), var("y"));
    ensure(out.to_string() == expected.to_string(), || format!("rename gave {out}"))?;
    let nf = normal_form(&blocked, ReductionBudget::steps(100).expect("budget"));
    ensure(!nf.exhausted && nf.term == t("λz.(y)z"), || {
        format!("blocked push normalized to {}", nf.term)
    })
}

fn criterion_2() -> Check {
    let r = normal_form(&t("(λx.(x)x)λx.(x)x"), ReductionBudget::steps(100).expect("budget"));
    ensure(r.exhausted && r.steps_used == 100, || {
        format!("exhausted={} steps={}", r.exhausted, r.steps_used)
    })
}

fn criterion_3() -> Check {
    let budget = ReductionBudget::new(1000, 10_000).expect("budget");
    let law = CollisionLaw::new(t("λx.λy.(x)y"), budget).expect("law");
    let mut reactor = Reactor::new(
        LambdaChemistry { law },
        ReactorSettings {
            outflow: Outflow::None,
            ..Default::default()
        },
    );
    let mut rng = rng_from_seed(DEFAULT_SEED);
    let params = RandomTermParams::default();
    while reactor.population().total() < 100 {
        let r = normal_form(&random_term(&mut rng, &params).expect("params"), budget);
        if !r.exhausted && r.term.is_abs() {
            reactor.insert(r.term);
        }
    }
    let initial = reactor.population().counts().clone();
    let mut log = EventLog::new();
    let (mut successes, mut elastic) = (0, 0);
    for _ in 0..10_000 {
        let before = reactor.population().total();
        let event = reactor.step(&mut rng).map_err(|e| e.to_string())?;
        let after = reactor.population().total();
        match event {
            Some(e) => {
                ensure(after == before + 1, || {
                    format!("success changed total {before} -> {after}")
                })?;
                successes += 1;
                log.push(e);
            }
            None => {
                ensure(after == before, || {
                    format!("elastic collision changed total {before} -> {after}")
                })?;
                elastic += 1;
            }
        }
    }
    ensure(successes > 0 && elastic > 0, || {
        format!("{successes} successes, {elastic} elastic")
    })?;
    let mut jsonl = Vec::new();
    log.write_jsonl(&mut jsonl).map_err(|e| e.to_string())?;
    let reread = EventLog::read_jsonl(jsonl.as_slice()).map_err(|e| e.to_string())?;
    let replayed = reread.replay(&initial)?;
    ensure(&replayed == reactor.population().counts(), || {
        "replay differs from final population".into()
    })
}

fn criterion_4() -> Check {
    let mut rng = rng_from_seed(DEFAULT_SEED);
    let n = 5;
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let w = FitnessMatrix::new(&rows).map_err(|e| e.to_string())?;
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let x0: Vec<f64> = raw.iter().map(|v| v / total).collect();
    let x0_sum: f64 = x0.iter().sum();
    let x0: Vec<f64> = x0.iter().map(|v| v / x0_sum).collect();
    let traj = integrate(&x0, &w, 100.0, 0.01).map_err(|e| e.to_string())?;
    ensure(traj.len() == 10_001, || format!("{} samples", traj.len()))?;
    for (ti, x) in &traj {
        let s: f64 = x.iter().sum();
        ensure((s - 1.0).abs() <= 1e-9, || format!("sum {s} at t={ti}"))?;
    }

    for _ in 0..100 {
        let c = rng.gen_range(-10.0..10.0);
        let base = replicator_rhs(&x0, &w).map_err(|e| e.to_string())?;
        let shifted = replicator_rhs(&x0, &w.shifted(c)).map_err(|e| e.to_string())?;
        for (a, b) in base.iter().zip(&shifted) {
            ensure((a - b).abs() <= 1e-12, || format!("shift {c}: {a} vs {b}"))?;
        }
    }

    let logistic = FitnessMatrix::new(&[vec![1.0, 1.0], vec![0.0, 0.0]]).map_err(|e| e.to_string())?;
    let p0 = 0.1;
    let (_, x) = integrate(&[p0, 1.0 - p0], &logistic, 5.0, 1e-3)
        .map_err(|e| e.to_string())?
        .pop()
        .ok_or("empty trajectory")?;
    let e5 = 5f64.exp();
    let exact = p0 * e5 / (p0 * e5 + (1.0 - p0));
    ensure((x[0] - exact).abs() <= 1e-6, || format!("logistic {} vs {exact}", x[0]))?;

    let still = integrate(&x0, &FitnessMatrix::zeros(n), 10.0, 0.01).map_err(|e| e.to_string())?;
    for (ti, x) in &still {
        for (a, b) in x.iter().zip(&x0) {
            ensure((a - b).abs() <= 1e-12, || format!("zero fitness drifted at t={ti}"))?;
        }
    }
    Ok(())
}

fn criterion_5() -> Check {
    let uniform = DiscreteDistribution::from_pairs((0..4).map(|i| (i.to_string(), 0.25))).map_err(|e| e.to_string())?;
    ensure((entropy(&uniform) - 2.0).abs() <= 1e-12, || {
        format!("uniform-4 entropy {}", entropy(&uniform))
    })?;

    let x = DiscreteDistribution::from_pairs([("a", 0.2), ("b", 0.3), ("c", 0.5)]).map_err(|e| e.to_string())?;
    let y = DiscreteDistribution::from_pairs([("u", 0.6), ("v", 0.4)]).map_err(|e| e.to_string())?;
    let ind = JointDistribution::independent(&[&x, &y]).map_err(|e| e.to_string())?;
    let mi = mutual_information(&ind).map_err(|e| e.to_string())?;
    ensure(mi.abs() <= 1e-12, || format!("independent MI {mi}"))?;

    let diag = JointDistribution::from_pairs(x.probabilities().iter().map(|(k, &p)| (vec![k.clone(), k.clone()], p)))
        .map_err(|e| e.to_string())?;
    let mi = mutual_information(&diag).map_err(|e| e.to_string())?;
    ensure((mi - entropy(&x)).abs() <= 1e-12, || {
        format!("MI(X,X) {mi} vs H(X) {}", entropy(&x))
    })?;

    let e: f64 = 0.25;
    let bsc = JointDistribution::from_pairs([
        (vec!["0", "0"], 0.5 * (1.0 - e)),
        (vec!["0", "1"], 0.5 * e),
        (vec!["1", "0"], 0.5 * e),
        (vec!["1", "1"], 0.5 * (1.0 - e)),
    ])
    .map_err(|e| e.to_string())?;
    let h2 = -e * e.log2() - (1.0 - e) * (1.0 - e).log2();
    let mi = mutual_information(&bsc).map_err(|e| e.to_string())?;
    ensure((mi - (1.0 - h2)).abs() <= 1e-9, || {
        format!("BSC MI {mi} vs {}", 1.0 - h2)
    })?;

    let corpus = mixed_corpus(1 << 20);
    let packed = compress(&corpus).map_err(|e| e.to_string())?;
    let back = decompress(&packed).map_err(|e| e.to_string())?;
    ensure(back == corpus, || "codec round-trip differs".into())?;
    ensure(packed.len() < corpus.len(), || {
        format!("mixed corpus grew to {} bytes", packed.len())
    })
}

/// Text-like runs, random bytes, zero runs and short repeats, interleaved.
fn mixed_corpus(len: usize) -> Vec<u8> {
    let mut rng = rng_from_seed(DEFAULT_SEED);
    let words = [
        "lambda", "term", "reactor", "tile", "cycle", "the", "of", "and", "molecule", "rule",
    ];
    let mut out = Vec::with_capacity(len);
    while out.len() < len {
        match rng.gen_range(0..4) {
            0 => {
                for _ in 0..rng.gen_range(10..200) {
                    out.extend_from_slice(words[rng.gen_range(0..words.len())].as_bytes());
                    out.push(b' ');
                }
            }
            1 => out.extend((0..rng.gen_range(100..3000)).map(|_| rng.gen::<u8>())),
            2 => out.extend(std::iter::repeat_n(0u8, rng.gen_range(1..1000))),
            _ => {
                let unit: Vec<u8> = (0..rng.gen_range(1..7)).map(|_| rng.gen()).collect();
                for _ in 0..rng.gen_range(1..300) {
                    out.extend_from_slice(&unit);
                }
            }
        }
    }
    out.truncate(len);
    out
}

fn criterion_6() -> Check {
    let grid = [0.0, 0.25, 0.5, 0.75, 1.0];
    let rows = sweep(DEFAULT_SEED, &grid, 200, &SweepParams::default()).map_err(|e| e.to_string())?;
    let at = |rho: f64| rows.iter().find(|r| r.target == rho).map(|r| r.cycling);
    let (lo, mid, hi) = (
        at(0.0).ok_or("no row 0")?,
        at(0.5).ok_or("no row 0.5")?,
        at(1.0).ok_or("no row 1")?,
    );
    println!("    fraction cycling: rho=0 {lo}, rho=0.5 {mid}, rho=1 {hi}");
    ensure(mid > lo && mid > hi, || format!("cycling {lo} / {mid} / {hi}"))
}

fn criterion_7() -> Check {
    let mut rng = rng_from_seed(DEFAULT_SEED);
    let mut made = 0;
    for _ in 0..100_000 {
        let (na, nb) = (rng.gen_range(1..=5), rng.gen_range(1..=5));
        let a = random_polyomino(&mut rng, na);
        let b = random_polyomino(&mut rng, nb);
        if let Some(p) = collide_tiles(&a, &b, &mut rng) {
            made += 1;
            ensure(p.area() > a.area() && p.area() > b.area(), || {
                format!("{} + {} gave {}", a.key(), b.key(), p.key())
            })?;
        }
    }
    ensure(made > 0, || "no tile collision succeeded".into())?;

    let config: ReactorConfig = serde_json::from_str(
        r#"{"max_steps": 3000, "track_instances": true,
            "chemistry": {"id": "tiles", "min_area": 1, "max_area": 4},
            "initial_population": {"random_count": 400}}"#,
    )
    .map_err(|e| e.to_string())?;
    let mut events = Vec::new();
    run(&config, &mut events, std::io::sink()).map_err(|e| e.to_string())?;
    let log = EventLog::read_jsonl(events.as_slice()).map_err(|e| e.to_string())?;
    ensure(!log.is_empty(), || "tile run produced no events".into())?;
    let exact = detect_replicators(&log, &EquivalenceSpec::Exact, 8).map_err(|e| e.to_string())?;
    ensure(exact.is_empty(), || {
        format!("exact equivalence found {} replicators", exact.len())
    })?;

    let square = Tile::unit();
    let tromino = Tile::parse("##/#.").map_err(|e| e.to_string())?;
    let product = join_at(&tromino, &square, (1, 1)).ok_or("square does not complete the tromino")?;
    ensure(product == Tile::rectangle(2, 2).map_err(|e| e.to_string())?, || {
        format!("got {}", product.key())
    })?;
    let scripted = EventLog {
        events: vec![ReactionEvent {
            t: 1,
            reactants: vec![square.key(), tromino.key()],
            products: vec![product.key()],
            new: vec![true],
            rid: Some(vec![0, 1]),
            pid: Some(vec![2]),
        }],
    };
    let eq = EquivalenceSpec::TileShapeOnly {
        symmetry: Symmetry {
            use_rotations: true,
            use_reflections: true,
        },
    };
    let reports = detect_replicators(&scripted, &eq, 5).map_err(|e| e.to_string())?;
    ensure(reports.len() == 1, || format!("{reports:?}"))?;
    let r = &reports[0];
    ensure(
        r.class_id == square.key() && r.period == 1 && r.scale == Some(2),
        || format!("{r:?}"),
    )?;
    ensure(verify_witness(&scripted, &eq, r), || "witness does not replay".into())
}

fn lineage_event(t: u64, reactants: &[(&str, u64)], product: (&str, u64)) -> ReactionEvent {
    ReactionEvent {
        t,
        reactants: reactants.iter().map(|(k, _)| k.to_string()).collect(),
        rid: Some(reactants.iter().map(|(_, id)| *id).collect()),
        products: vec![product.0.to_string()],
        pid: Some(vec![product.1]),
        new: vec![true],
    }
}

fn criterion_8() -> Check {
    let log = EventLog {
        events: vec![
            lineage_event(1, &[("a", 0), ("b", 1)], ("c", 3)),
            lineage_event(2, &[("c", 3), ("d", 2)], ("a", 4)),
        ],
    };
    let reports = detect_replicators(&log, &EquivalenceSpec::Exact, 5).map_err(|e| e.to_string())?;
    let a = reports
        .iter()
        .find(|r| r.class_id == "a")
        .ok_or("class a not reported")?;
    ensure(a.period == 2, || format!("period {}", a.period))?;
    ensure(verify_witness(&log, &EquivalenceSpec::Exact, a), || {
        "witness does not replay".into()
    })?;

    // x only returns after six steps, beyond the cap of five.
    let chain = ["x", "p1", "p2", "p3", "p4", "p5", "x"];
    let events = chain
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            lineage_event(
                i as u64 + 1,
                &[(w[0], 10 * i as u64), ("y", 1000 + i as u64)],
                (w[1], 10 * (i as u64 + 1)),
            )
        })
        .collect();
    let log = EventLog { events };
    let capped = detect_replicators(&log, &EquivalenceSpec::Exact, 5).map_err(|e| e.to_string())?;
    ensure(capped.is_empty(), || format!("false positives: {capped:?}"))?;
    let uncapped = detect_replicators(&log, &EquivalenceSpec::Exact, 6).map_err(|e| e.to_string())?;
    ensure(uncapped.len() == 1 && uncapped[0].period == 6, || {
        format!("{uncapped:?}")
    })
}

fn criterion_9() -> Check {
    let config: ReactorConfig = serde_json::from_str(
        r#"{"seed": 42, "max_steps": 2000, "sample_every": 100, "track_instances": true,
            "chemistry": {"id": "alchemy", "budget": {"max_steps": 1000, "max_nodes": 10000}},
            "initial_population": {"random_count": 60}}"#,
    )
    .map_err(|e| e.to_string())?;
    let once = || -> Result<(Vec<u8>, Vec<u8>), String> {
        let (mut ev, mut ts) = (Vec::new(), Vec::new());
        run(&config, &mut ev, &mut ts).map_err(|e| e.to_string())?;
        Ok((ev, ts))
    };
    let (e1, t1) = once()?;
    let (e2, t2) = once()?;
    ensure(!e1.is_empty(), || "no events".into())?;
    ensure(e1 == e2 && t1 == t2, || "outputs differ between runs".into())
}

fn criterion_10() -> Check {
    let net = ReactionNetwork::from_reactions([
        Reaction::new(["a", "b"], ["c"]),
        Reaction::new(["c", "c"], ["a"]),
        Reaction::new(["a", "c"], ["b"]),
    ]);
    let all: BTreeSet<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
    ensure(is_closed(&all, &net).map_err(|e| e.to_string())?, || {
        "not closed".into()
    })?;
    ensure(is_self_maintaining(&all, &net).map_err(|e| e.to_string())?, || {
        "not self-maintaining".into()
    })?;
    let report = classify_organizations(&net, &[]);
    ensure(report.level1.contains(&all), || format!("level-1 {:?}", report.level1))?;

    let cyc = ReactionNetwork::from_reactions([Reaction::new(["a", "x"], ["b"]), Reaction::new(["b", "y"], ["a"])]);
    let found = detect_hypercycles(&cyc, CycleLimits::default());
    ensure(found == vec![vec!["a".to_string(), "b".to_string()]], || {
        format!("{found:?}")
    })?;
    let dag = ReactionNetwork::from_reactions([
        Reaction::new(["a"], ["b"]),
        Reaction::new(["b", "c"], ["d"]),
        Reaction::new(["a", "d"], ["e"]),
    ]);
    let none = detect_hypercycles(&dag, CycleLimits::default());
    ensure(none.is_empty(), || format!("{none:?}"))?;
    // The network built from a log agrees with the hand-built one.
    let log = EventLog {
        events: vec![
            lineage_event(1, &[("a", 0), ("b", 1)], ("c", 2)),
            lineage_event(2, &[("c", 2), ("c", 3)], ("a", 4)),
            lineage_event(3, &[("a", 4), ("c", 5)], ("b", 6)),
        ],
    };
    ensure(build_network(&log).reactions == net.reactions, || {
        "log network differs".into()
    })
}

/// Name, check and time limit.
type Criterion = (&'static str, fn() -> Check, Duration);

fn main() {
    let criteria: [Criterion; 10] = [
        ("rewrite rules and renaming", criterion_1, Duration::from_secs(1)),
        ("divergence exhausts the budget", criterion_2, Duration::from_secs(1)),
        ("collision bookkeeping and replay", criterion_3, Duration::from_secs(30)),
        ("replicator dynamics", criterion_4, Duration::from_secs(10)),
        ("information metrics and codec", criterion_5, Duration::from_secs(10)),
        (
            "cycles at intermediate order parameter",
            criterion_6,
            Duration::from_secs(120),
        ),
        (
            "tiles never self-replicate exactly",
            criterion_7,
            Duration::from_secs(60),
        ),
        ("replicator detector soundness", criterion_8, Duration::from_secs(10)),
        ("run determinism", criterion_9, Duration::from_secs(60)),
        ("organization and hypercycles", criterion_10, Duration::from_secs(10)),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let result = result.and_then(|()| ensure(elapsed <= *limit, || format!("took {elapsed:.2?}, limit {limit:?}")));
        match result {
            Ok(()) => println!("criterion {:>2} PASS  {name} ({elapsed:.2?})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} ({elapsed:.2?}): {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}
