use fdp::protocols::{run, run_reinforcement, stock, Mode, Phase};
use fdp::signals::{StimulusSet, Waveform};

#[test]
fn reports_are_pure_functions_of_script_and_seed() {
    let s = stock::stdp().with_seed(3);
    let (a, b) = (run(&s).unwrap(), run(&s).unwrap());
    assert_eq!(a.hash(), b.hash());
    assert_eq!(a.script_hash, s.hash());
    assert_eq!(a.seeds, vec![3]);
    assert_ne!(run(&stock::stdp().with_seed(4)).unwrap().hash(), a.hash());
    assert!(a.recheck(&s).unwrap());
}

#[test]
fn tampered_verdict_fails_recheck() {
    let s = stock::stdp().with_seed(1);
    let mut r = run(&s).unwrap();
    r.criteria[0].passed = !r.criteria[0].passed;
    assert!(!r.recheck(&s).unwrap());
}

#[test]
fn zero_volts_never_bridges() {
    let mut s = stock::synaptogenesis().with_seed(1);
    s.phases = vec![Phase::new("grow", Mode::Grow, StimulusSet::new(2.0).with("a", Waveform::square(0.0, 50.0)))];
    let r = run(&s).unwrap();
    assert!(r.failed);
    assert!(!r.passed());
    assert_eq!(r.metric("bridged_fraction"), Some(0.0));
}

#[test]
fn zero_epochs_leave_conductance_at_the_bridge() {
    let s = stock::reinforcement().with_seed(2);
    let r = run_reinforcement(&s, 0).unwrap();
    let epochs = r.runs[0].series("epochs").unwrap();
    assert_eq!(epochs.rows.len(), 1);
    let once = run_reinforcement(&s, 1).unwrap();
    let e1 = once.runs[0].series("epochs").unwrap();
    assert_eq!(e1.rows[0], epochs.rows[0]);
}

#[test]
fn unpulsed_gate_gives_flat_trace() {
    let mut s = stock::std().with_seed(1);
    s.options.frequencies.clear();
    for p in &mut s.phases {
        if p.mode != Mode::Grow {
            p.stimuli = StimulusSet::new(p.duration());
        }
    }
    let r = run(&s).unwrap();
    let g = r.runs[0].series("trace").unwrap().col("conductance_S");
    assert!(g.len() > 100);
    assert!(g.iter().all(|&x| x == g[0]));
}

#[test]
fn snapshot_interval_leaves_results_unchanged() {
    for base in [stock::pavlov().with_seed(5), stock::reinforcement().with_seed(5)] {
        let mut every = base.clone();
        every.options.snapshot_every = 7;
        let (a, b) = (run(&base).unwrap(), run(&every).unwrap());
        // compared as text: NaN metrics are never equal to themselves
        assert_eq!(serde_json::to_string(&a.metrics).unwrap(), serde_json::to_string(&b.metrics).unwrap());
        assert_eq!(serde_json::to_string(&a.runs[0].series).unwrap(), serde_json::to_string(&b.runs[0].series).unwrap());
        let phase_hashes = |r: &fdp::protocols::Report| {
            r.runs[0].snapshots.iter().filter(|s| !s.label.contains('@')).map(|s| s.hash.clone()).collect::<Vec<_>>()
        };
        assert_eq!(phase_hashes(&a), phase_hashes(&b));
        assert!(b.runs[0].snapshots.len() > a.runs[0].snapshots.len());
    }
}
