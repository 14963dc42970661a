//! Default scripts for every protocol. The committed script files are these,
//! serialized.

use super::*;
use crate::signals::Waveform;

fn criterion(metric: &str, cmp: Cmp, threshold: f64) -> Criterion {
    Criterion { metric: metric.into(), cmp, threshold }
}

fn seeds(n: u64) -> Vec<u64> {
    (1..=n).collect()
}

/// Growth at 4 V, 50 Hz across the default gap for 8 s (400 cycles).
pub fn synaptogenesis() -> ExperimentScript {
    let mut s = ExperimentScript::on_layout("synaptogenesis", Protocol::Synaptogenesis, Layout::TwoElectrode);
    s.phases = vec![Phase::new("grow", Mode::Grow, StimulusSet::new(8.0).with("a", Waveform::square(4.0, 50.0)))];
    s.seeds = seeds(32);
    s.options.sample_every = 2;
    s.criteria = vec![
        criterion("bridged_fraction", Cmp::Eq, 1.0),
        criterion("max_baseline_fraction", Cmp::Le, 0.05),
        criterion("min_rise_factor", Cmp::Ge, 10.0),
        criterion("max_terminal_slope_fraction", Cmp::Le, 0.05),
    ];
    s
}

/// Bridge within 3 s, then three 1 s epochs of the same stimulus.
pub fn reinforcement() -> ExperimentScript {
    let mut s = ExperimentScript::on_layout("reinforcement", Protocol::Reinforcement, Layout::TwoElectrode);
    s.phases = vec![Phase::new("grow", Mode::Grow, StimulusSet::new(3.0).with("a", Waveform::square(4.0, 50.0)))];
    s.seeds = seeds(32);
    s.criteria = vec![
        criterion("bridged_fraction", Cmp::Eq, 1.0),
        criterion("increasing_fraction", Cmp::Eq, 1.0),
        criterion("shrinking_fraction", Cmp::Eq, 1.0),
        criterion("weak_class_g48", Cmp::Ge, 0.48),
        criterion("weak_class_g48", Cmp::Le, 0.52),
        criterion("min_final_volume_g7d", Cmp::Ge, 0.8),
    ];
    s
}

/// Compact gap grown for 1.5 s at each frequency.
pub fn frequency_sweep() -> ExperimentScript {
    let mut s = ExperimentScript::on_layout("frequency_sweep", Protocol::FrequencySweep, Layout::Compact);
    s.growth.k_dep = 640.0;
    s.growth.branch_bias = 0.3;
    s.phases = vec![Phase::new("grow", Mode::Grow, StimulusSet::new(1.5).with("a", Waveform::square(5.0, 60.0)))];
    s.seeds = seeds(32);
    s.criteria = vec![
        criterion("thickness_decreasing_1se", Cmp::Eq, 1.0),
        criterion("branching_increasing_1se", Cmp::Eq, 1.0),
        criterion("capacitance_increasing", Cmp::Eq, 1.0),
        criterion("tau_increasing", Cmp::Eq, 1.0),
        criterion("max_heldout_abs_error", Cmp::Le, 0.4),
    ];
    s
}

/// Probe, bell-alone, offset, paired and test phases on the three-pad layout with a pre-grown
/// food-salivation fiber.
pub fn pavlov() -> ExperimentScript {
    let mut s = ExperimentScript::on_layout("pavlov", Protocol::Pavlov, Layout::Pavlov);
    // pre-grown at the training frequency: w0·√(f0/50 Hz)
    let w = s.growth.w0 * (s.growth.f0 / 50.0).sqrt();
    s.fixtures = vec![Fixture { seed: "food".into(), from: (33, 32), to: (44, 32), thickness: w }];
    let bell = Waveform::square(2.0, 50.0);
    let food = Waveform::square(2.0, 50.0);
    s.phases = vec![
        Phase::new("probe", Mode::Grow, StimulusSet::new(3.0).with("bell", bell)),
        Phase::new("pause", Mode::Rest, StimulusSet::new(3.0)),
        Phase::new("bell_alone", Mode::Grow, StimulusSet::new(3.0).with("bell", bell)),
        Phase::new("offset", Mode::Grow, StimulusSet::new(3.0).with("bell", bell).with("food", food.delayed(0.010))),
        Phase::new("paired", Mode::Grow, StimulusSet::new(3.0).with("bell", bell).with("food", food)),
        Phase::new("test", Mode::Measure, StimulusSet::new(3.0).with("bell", bell)),
    ];
    s.seeds = seeds(32);
    s.criteria = vec![
        criterion("max_response_ratio_probe", Cmp::Lt, 10.0),
        criterion("max_conditioned_volume_probe", Cmp::Eq, 0.0),
        criterion("max_conditioned_volume_bell_alone", Cmp::Eq, 0.0),
        criterion("max_conditioned_volume_offset", Cmp::Eq, 0.0),
        criterion("max_overlap_offset", Cmp::Eq, 0.0),
        criterion("max_field_ratio_offset", Cmp::Lt, 1.0),
        criterion("bridged_fraction_paired", Cmp::Eq, 1.0),
        criterion("min_response_ratio_test", Cmp::Ge, 10.0),
        criterion("min_cs_us_ratio_test", Cmp::Ge, 0.5),
    ];
    s
}

/// Train each of digits 0 and 5 for 3 s at 3 V, 50 Hz; read 0, 8, 5 and blank.
pub fn pattern_recognition() -> ExperimentScript {
    let mut s = ExperimentScript::on_layout("pattern_recognition", Protocol::PatternRecognition, Layout::PatternRail);
    // one-cell precoat stub in front of each output
    s.fixtures = (0..3)
        .map(|k| {
            let c = (layouts::OUTPUT_X - 1, 3 + layouts::OUTPUT_SPAN * k + layouts::OUTPUT_SPAN / 2 - 1);
            Fixture { seed: format!("o{k}"), from: c, to: c, thickness: s.growth.w0 }
        })
        .collect();
    s.growth.k_dep = 2400.0;
    s.phases = vec![
        Phase::new("train", Mode::Grow, StimulusSet::new(3.0).with("p0", Waveform::square(3.0, 50.0))),
        Phase::new("read", Mode::Measure, StimulusSet::new(1.0)),
    ];
    s.seeds = seeds(16);
    s.options.train = vec!["0".into(), "5".into()];
    s.options.read_voltage = 3.0;
    s.options.inhibition_reach = 1.5 * layouts::RAIL_PITCH as f64;
    s.criteria = vec![
        criterion("strictly_highest_fraction_0", Cmp::Eq, 1.0),
        criterion("eight_below_fraction_0", Cmp::Eq, 1.0),
        criterion("max_blank_confidence_0", Cmp::Eq, 0.0),
        criterion("strictly_highest_fraction_5", Cmp::Eq, 1.0),
        criterion("max_blank_confidence_5", Cmp::Eq, 0.0),
    ];
    s
}

/// Gate pulse trains of 600 mV at 100 Hz over 10–20 s and 35–40 s, and
/// paired-pulse ratios of 10 Hz and 200 Hz networks.
pub fn std() -> ExperimentScript {
    let mut s = ExperimentScript::on_layout("std", Protocol::Std, Layout::CompactGated);
    s.growth.k_dep = 640.0;
    s.growth.branch_bias = 0.3;
    let pulses = Waveform::pulse_train(0.6, 100.0, 0.005);
    s.phases = vec![
        Phase::new("grow", Mode::Grow, StimulusSet::new(1.5).with("a", Waveform::square(5.0, 60.0))),
        Phase::new("rest1", Mode::Rest, StimulusSet::new(10.0)),
        Phase::new("pulse1", Mode::Measure, StimulusSet::new(10.0).with("gate", pulses)),
        Phase::new("rest2", Mode::Rest, StimulusSet::new(10.0)),
        Phase::new("rest3", Mode::Rest, StimulusSet::new(5.0)),
        Phase::new("pulse2", Mode::Measure, StimulusSet::new(5.0).with("gate", pulses)),
        Phase::new("rest4", Mode::Rest, StimulusSet::new(10.0)),
    ];
    s.seeds = seeds(4);
    s.options.frequencies = vec![10.0, 200.0];
    s.criteria = vec![
        criterion("max_suppression_pulse1", Cmp::Lt, 0.9),
        criterion("max_suppression_pulse2", Cmp::Lt, 0.9),
        criterion("min_recovery_rest2", Cmp::Ge, 0.95),
        criterion("max_ppd_200Hz_200ms", Cmp::Le, 0.55),
        criterion("min_ppd_10Hz_200ms", Cmp::Ge, 0.85),
        criterion("ppd_monotone_fraction_10Hz", Cmp::Eq, 1.0),
        criterion("ppd_monotone_fraction_200Hz", Cmp::Eq, 1.0),
    ];
    s
}

/// Spike pairings on a compact channel grown at 60 Hz.
pub fn stdp() -> ExperimentScript {
    let mut s = ExperimentScript::on_layout("stdp", Protocol::Stdp, Layout::Compact);
    s.growth.k_dep = 640.0;
    s.growth.branch_bias = 0.3;
    s.phases = vec![Phase::new("grow", Mode::Grow, StimulusSet::new(1.5).with("a", Waveform::square(5.0, 60.0)))];
    s.seeds = seeds(4);
    s.criteria = vec![
        criterion("antisymmetric_fraction", Cmp::Eq, 1.0),
        criterion("monotone_fraction", Cmp::Eq, 1.0),
        criterion("min_r2", Cmp::Ge, 0.9),
    ];
    s
}

pub fn for_protocol(p: Protocol) -> ExperimentScript {
    match p {
        Protocol::Synaptogenesis => synaptogenesis(),
        Protocol::Reinforcement => reinforcement(),
        Protocol::FrequencySweep => frequency_sweep(),
        Protocol::Pavlov => pavlov(),
        Protocol::PatternRecognition => pattern_recognition(),
        Protocol::Std => std(),
        Protocol::Stdp => stdp(),
    }
}
