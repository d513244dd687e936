use super::*;
use crate::channel::{dot11b_thresholds, AlphaTable, FadingChannel};
use crate::game::BurstPolicy;
use crate::phy::{gamma, Strategy};

fn g1() -> Strategy {
    Strategy::from_mbps(3.2, 12000)
}

fn g2() -> Strategy {
    Strategy::from_mbps(1.6, 12000)
}

fn table_node(name: &str, entries: &[(Strategy, f64)], policy: StrategyPolicy, coherence: u32) -> NodeConfig {
    NodeConfig {
        name: name.into(),
        link: LinkModel::Table {
            alpha: AlphaTable::new(entries.iter().copied()).unwrap(),
            coherence_samples: coherence,
        },
        policy,
    }
}

fn lossless(name: &str, s: Strategy) -> NodeConfig {
    table_node(name, &[(s, 1.0)], StrategyPolicy::Fixed(s), 1)
}

fn run(sc: &SimScenario) -> SimReport {
    run_sim(sc).unwrap()
}

#[test]
fn single_node_matches_renewal_oracle() {
    let phy = PhyProfile::dot11b();
    let s = Strategy::from_mbps(11.0, 12000);
    let sc = SimScenario::new(phy.clone(), Discipline::Dcf, vec![lossless("a", s)], 20.0, 1);
    let rep = run(&sc);
    // renewal cycle: one frame plus a mean backoff of cw_min/2 slots
    let airtime = frame_airtime(&s, &phy).unwrap();
    let cycle = airtime + phy.cw_min as f64 / 2.0 * phy.slot_time;
    let oracle = gamma(&s, &phy).unwrap() * airtime / cycle;
    let got = rep.nodes[0].throughput;
    assert!((got - oracle).abs() / oracle < 0.05, "{got} vs {oracle}");
    assert_eq!(rep.nodes[0].collisions, 0);
}

#[test]
fn identical_nodes_split_evenly() {
    let s = Strategy::from_mbps(11.0, 12000);
    let sc = SimScenario::new(
        PhyProfile::dot11b(),
        Discipline::Dcf,
        vec![lossless("a", s), lossless("b", s)],
        30.0,
        7,
    );
    let rep = run(&sc);
    let (a, b) = (rep.nodes[0].txops as f64, rep.nodes[1].txops as f64);
    let frac = a / (a + b);
    assert!((frac - 0.5).abs() <= 0.02, "{frac}");
    assert!(rep.collision_ns > 0);
}

#[test]
fn time_is_conserved_exactly() {
    for d in [Discipline::Dcf, Discipline::Edcf(BurstPolicy::Bfl), Discipline::Edcf(BurstPolicy::Beb), Discipline::TimeFair] {
        let nodes = vec![
            table_node("i", &[(g1(), 0.6), (g2(), 0.95)], StrategyPolicy::Fixed(g1()), 3),
            lossless("j", g2()),
            lossless("k", g1()),
        ];
        let rep = run(&SimScenario::new(PhyProfile::two_rate_ideal(), d, nodes, 5.0, 3));
        let busy: u64 = rep.nodes.iter().map(|n| n.channel_time_ns).sum();
        assert_eq!(busy + rep.idle_ns + rep.collision_ns, rep.elapsed_ns, "{d}");
        assert!(rep.elapsed() >= 5.0);
        for n in &rep.nodes {
            assert!(n.frames_succeeded <= n.frames_attempted);
        }
    }
}

#[test]
fn deterministic_per_seed() {
    let mk = |seed| {
        SimScenario::new(
            PhyProfile::two_rate_ideal(),
            Discipline::Edcf(BurstPolicy::Bfl),
            vec![
                table_node("i", &[(g1(), 0.6)], StrategyPolicy::Fixed(g1()), 4),
                lossless("j", g1()),
            ],
            3.0,
            seed,
        )
    };
    assert_eq!(run(&mk(9)), run(&mk(9)));
    assert_ne!(run(&mk(9)).nodes, run(&mk(10)).nodes);
}

#[test]
fn bfl_mean_burst_in_simulation() {
    // 3.2 Mb/s frames of 3.75 ms: four fit in a 15 ms TXOP
    let sc = SimScenario::new(
        PhyProfile::two_rate_ideal(),
        Discipline::Edcf(BurstPolicy::Bfl),
        vec![table_node("i", &[(g1(), 0.6)], StrategyPolicy::Fixed(g1()), 1)],
        400.0,
        21,
    );
    let rep = run(&sc);
    let n = &rep.nodes[0];
    let mean = n.frames_attempted as f64 / n.txops as f64;
    assert!((mean - 2.18).abs() <= 0.02, "{mean}");
}

fn beb_loss(coherence: u32) -> f64 {
    let sc = SimScenario::new(
        PhyProfile::two_rate_ideal(),
        Discipline::Edcf(BurstPolicy::Beb),
        vec![table_node("i", &[(g1(), 0.6)], StrategyPolicy::Fixed(g1()), coherence)],
        600.0,
        5,
    );
    run(&sc).nodes[0].loss_rate
}

#[test]
fn beb_loss_rate_matches_alpha_for_independent_frames() {
    let loss = beb_loss(1);
    assert!((loss - 0.4).abs() <= 0.02, "{loss}");
}

#[test]
fn slow_fading_lets_backoff_skip_bad_blocks() {
    // after a failed burst the window doubles, so more of a bad block
    // passes idle and fewer frames are sent into it
    assert!(beb_loss(10) < beb_loss(1) - 0.01);
}

#[test]
fn bfl_bursts_shorten_with_correlated_loss() {
    // with loss correlated across frames, a failure more often comes first
    let mk = |coherence| {
        let sc = SimScenario::new(
            PhyProfile::two_rate_ideal(),
            Discipline::Edcf(BurstPolicy::Bfl),
            vec![table_node("i", &[(g1(), 0.6)], StrategyPolicy::Fixed(g1()), coherence)],
            300.0,
            8,
        );
        let n = run(&sc).nodes[0].clone();
        n.frames_attempted as f64 / n.txops as f64
    };
    assert!(mk(20) > mk(1) + 0.1);
}

fn dcf_star_pair(si: Strategy, duration: f64, seed: u64) -> SimScenario {
    SimScenario::new(
        PhyProfile::two_rate_ideal(),
        Discipline::TimeFair,
        vec![
            table_node("i", &[(g1(), 0.6), (g2(), 0.95)], StrategyPolicy::Fixed(si), 1),
            lossless("j", g1()),
        ],
        duration,
        seed,
    )
}

fn busy_share(rep: &SimReport, k: usize) -> f64 {
    let busy: u64 = rep.nodes.iter().map(|n| n.channel_time_ns).sum();
    rep.nodes[k].channel_time_ns as f64 / busy as f64
}

#[test]
fn dcf_star_equalises_channel_time() {
    for si in [g1(), g2()] {
        let rep = run(&dcf_star_pair(si, 200.0, 4));
        let share = busy_share(&rep, 0);
        assert!((share - 0.5).abs() <= 0.02, "{si}: {share}");
    }
    // plain DCF on the same pair is far from even when i is slow
    let mut sc = dcf_star_pair(g2(), 100.0, 4);
    sc.discipline = Discipline::Dcf;
    assert!(busy_share(&run(&sc), 0) > 0.6);
}

#[test]
fn dcf_star_converges_in_interval_series() {
    let mut sc = dcf_star_pair(g2(), 100.0, 6);
    sc.report_interval = 10.0;
    let rep = run(&sc);
    let tail: Vec<&IntervalRow> = rep.intervals.iter().filter(|r| r.time_s > 20.0).collect();
    let by_time = tail.chunks(2).map(|pair| pair[0].share / (pair[0].share + pair[1].share));
    for s in by_time {
        assert!((s - 0.5).abs() <= 0.05, "{s}");
    }
    assert!(rep.nodes[0].cw_min_effective > rep.nodes[1].cw_min_effective);
}

#[test]
fn dcf_star_honours_unequal_targets() {
    let mut sc = dcf_star_pair(g1(), 200.0, 2);
    sc.dcf_star.targets = Some(vec![0.25, 0.75]);
    let share = busy_share(&run(&sc), 0);
    assert!((share - 0.25).abs() <= 0.02, "{share}");
}

#[test]
fn interval_rows_cover_every_node() {
    let mut sc = dcf_star_pair(g1(), 5.5, 1);
    sc.report_interval = 1.0;
    let rep = run(&sc);
    assert_eq!(rep.intervals.len(), 6 * 2);
    let mut buf = Vec::new();
    rep.write_intervals_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("time_s,node,throughput_mbps,share,loss_rate,cw_min_eff,strategy\n"));
    assert_eq!(text.lines().count(), 13);
}

#[test]
fn best_response_reaches_dcf_equilibrium() {
    let mut sc = SimScenario::new(
        PhyProfile::two_rate_ideal(),
        Discipline::Dcf,
        vec![
            table_node(
                "i",
                &[(g1(), 0.6), (g2(), 0.95)],
                StrategyPolicy::BestResponse { candidates: vec![g1(), g2()], initial: g1() },
                1,
            ),
            table_node(
                "j",
                &[(g1(), 1.0), (g2(), 1.0)],
                StrategyPolicy::BestResponse { candidates: vec![g1(), g2()], initial: g2() },
                1,
            ),
        ],
        400.0,
        12,
    );
    sc.best_response = BestResponseConfig { settle: 1.0, probe_window: 20.0, max_epochs: 10, switch_margin: 0.02 };
    let rep = run(&sc);
    let br = rep.best_response.unwrap();
    assert!(br.converged, "{:?}", br.history);
    assert_eq!(br.final_strategies, vec![g2(), g1()]);
    assert!(br.post_convergence_throughput.is_some());
}

#[test]
fn auto_rate_uses_several_rates() {
    let phy = PhyProfile::dot11b();
    let ch = FadingChannel::new(-80.0, dot11b_thresholds(), 1, 0).unwrap();
    let mut sc = SimScenario::new(
        phy,
        Discipline::Dcf,
        vec![NodeConfig {
            name: "a".into(),
            link: LinkModel::Fading(ch),
            policy: StrategyPolicy::AutoRate { payload_bits: 12000 },
        }],
        5.0,
        3,
    );
    sc.report_interval = 0.05;
    let rep = run(&sc);
    let distinct: std::collections::BTreeSet<&str> = rep.intervals.iter().map(|r| r.strategy.as_str()).collect();
    assert!(distinct.len() >= 2, "{distinct:?}");
    assert!(rep.nodes[0].throughput > 0.0);
}

#[test]
fn rejects_bad_scenarios() {
    let mut sc = dcf_star_pair(g1(), 1.0, 1);
    sc.duration = 0.0;
    assert!(run_sim(&sc).is_err());
    let mut sc = dcf_star_pair(g1(), 1.0, 1);
    sc.dcf_star.targets = Some(vec![0.9, 0.9]);
    assert!(run_sim(&sc).is_err());
    let mut sc = dcf_star_pair(g1(), 1.0, 1);
    sc.nodes[1].policy = StrategyPolicy::AutoRate { payload_bits: 12000 };
    assert!(run_sim(&sc).is_err());
    let mut sc = dcf_star_pair(g1(), 1.0, 1);
    sc.nodes[1].policy = StrategyPolicy::Fixed(g2());
    assert!(matches!(run_sim(&sc), Err(SimError::Channel(_))));
}


#[test]
fn bfl_loses_fewer_frames_than_beb_under_bursty_loss() {
    let loss = |policy| {
        let sc = SimScenario::new(
            PhyProfile::two_rate_ideal(),
            Discipline::Edcf(policy),
            vec![
                table_node("i", &[(g1(), 0.6)], StrategyPolicy::Fixed(g1()), 4),
                table_node("j", &[(g1(), 0.9)], StrategyPolicy::Fixed(g1()), 4),
            ],
            200.0,
            17,
        );
        let rep = run(&sc);
        let att: u64 = rep.nodes.iter().map(|n| n.frames_attempted).sum();
        let ok: u64 = rep.nodes.iter().map(|n| n.frames_succeeded).sum();
        1.0 - ok as f64 / att as f64
    };
    let (bfl, beb) = (loss(BurstPolicy::Bfl), loss(BurstPolicy::Beb));
    assert!(bfl < beb, "bfl {bfl} beb {beb}");
}

#[test]
fn ne_strategies_match_stage_payoff() {
    use crate::game::{stage_payoff, StageGame};
    let sc = SimScenario::new(
        PhyProfile::two_rate_ideal(),
        Discipline::Dcf,
        vec![
            table_node("i", &[(g1(), 0.6), (g2(), 0.95)], StrategyPolicy::Fixed(g2()), 1),
            table_node("j", &[(g1(), 1.0), (g2(), 1.0)], StrategyPolicy::Fixed(g1()), 1),
        ],
        60.0,
        2,
    );
    let rep = run(&sc);
    let game = StageGame::new(
        PhyProfile::two_rate_ideal(),
        Discipline::Dcf,
        vec![g1(), g2()],
        vec![g1(), g2()],
        AlphaTable::new([(g1(), 0.6), (g2(), 0.95)]).unwrap(),
        AlphaTable::new([(g1(), 1.0), (g2(), 1.0)]).unwrap(),
        rep.mean_idle_per_round(),
    )
    .unwrap();
    let out = stage_payoff(&game, &g2(), &g1()).unwrap();
    for (k, want) in [out.i.throughput, out.j.throughput].into_iter().enumerate() {
        let got = rep.nodes[k].throughput;
        assert!((got - want).abs() / want < 0.10, "node {k}: {got} vs {want}");
    }
}
