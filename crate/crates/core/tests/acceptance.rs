//! Acceptance criteria, one test each. Every test writes a single
//! `ACCEPTANCE <n> ... PASS|FAIL` line to stdout (outside the test harness
//! capture) before asserting.

use std::io::Write;

use ciodsm::analysis::{coding_gain, diversity_certificate, nvd_scan, optimize_phases};
use ciodsm::channel::{draw_channel, substream_rng};
use ciodsm::codebooks::{CodewordLabel, SchemeConfig};
use ciodsm::constellation::{ciod_rotation, Constellation, Normalization};
use ciodsm::decoders::{build_real_decomp, decode, DecoderKind};
use ciodsm::simkit::{
    estimate_diversity_slope, parse_kv, run_ser_sweep, verify_decoders, write_csv, PhaseChoice, SchemeSpec, SimConfig,
};

fn report(n: u32, name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    writeln!(out, "ACCEPTANCE {n} {name}: {verdict} ({detail})").unwrap();
}

fn unit(m: usize) -> Constellation {
    if m == 2 {
        Constellation::bpsk(Normalization::UnitAverageEnergy)
    } else {
        Constellation::square_qam(m, Normalization::UnitAverageEnergy).unwrap()
    }
}

fn sim(text: &str) -> SimConfig {
    SimConfig::from_map(&parse_kv(text).unwrap()).unwrap()
}

#[test]
fn criterion_1_decoder_equivalence() {
    let trials = 10_000;
    let mut lines = Vec::new();
    let mut pass = true;
    let mut total = 0;
    let mut ties = 0;
    let high_spec = |m| SchemeSpec {
        scheme: ciodsm::codebooks::Scheme::HighDosm,
        modulation: if m == 2 {
            ciodsm::simkit::Modulation::Bpsk
        } else {
            ciodsm::simkit::Modulation::Qam(m)
        },
        decoder: DecoderKind::Exhaustive,
    };
    let mut configs: Vec<(String, SchemeConfig)> = Vec::new();
    for m in [4, 16] {
        configs.push((format!("low M={m}"), SchemeConfig::low_dosm(4, &unit(m)).unwrap()));
    }
    for m in [2, 4] {
        configs.push((format!("high M={m}"), high_spec(m).build(4, PhaseChoice::Table).unwrap()));
    }
    let mut seed = 1000;
    for (name, cfg) in &configs {
        for n_r in [1, 2] {
            for snr in [5.0, 15.0] {
                seed += 1;
                let r = verify_decoders(cfg, n_r, snr, trials, seed).unwrap();
                total += r.trials;
                ties += r.ties_excluded;
                if !r.passed() {
                    pass = false;
                    lines.push(format!("{name} nr={n_r} snr={snr}: {r:?}"));
                }
            }
        }
    }
    report(
        1,
        "decoder equivalence",
        pass,
        &format!("{} configurations, {total} trials, {ties} ties excluded, failures: {lines:?}", configs.len() * 4),
    );
    assert!(pass);
}

#[test]
fn criterion_2_complexity_counters() {
    let mut mismatches = Vec::new();
    let mut checked = 0;
    let mut check = |cfg: &SchemeConfig, kind: DecoderKind, want: usize| {
        let h = draw_channel(2, cfg.n_antennas(), &mut substream_rng(checked as u64, 2)).into_matrix();
        let label = cfg.label_from_index(checked % cfg.num_codewords());
        let y = cfg.encode_label(&label).transmit(&h);
        let got = decode(kind, &y, &h, cfg).unwrap().evals;
        checked += 1;
        if got != want {
            mismatches.push(format!("{:?} nt={} M={} {kind}: {got} != {want}", cfg.scheme(), cfg.n_t(), cfg.order()));
        }
    };
    for n_t in [2, 4, 8] {
        for m in [2, 4, 16, 64] {
            let sm = SchemeConfig::sm(n_t, unit(m)).unwrap();
            check(&sm, DecoderKind::Exhaustive, n_t * m);

            let low = SchemeConfig::low_dosm(n_t, &unit(m)).unwrap();
            check(&low, DecoderKind::Exhaustive, n_t * m * m);
            check(&low, DecoderKind::Mrc, 2 * m * n_t);
            if m >= 4 {
                let sqrt_m = (m as f64).sqrt() as usize;
                check(&low, DecoderKind::QrHardLimit, 2 * n_t * sqrt_m);
            }

            if n_t * n_t * m * m <= 16_384 {
                let high = SchemeConfig::high_dosm(n_t, &unit(m), vec![]).unwrap();
                check(&high, DecoderKind::Exhaustive, n_t * n_t * m * m);
                check(&high, DecoderKind::Mrc, 2 * m * n_t * n_t);
                if m >= 4 {
                    let sqrt_m = (m as f64).sqrt() as usize;
                    check(&high, DecoderKind::QrHardLimit, 2 * n_t * n_t * sqrt_m);
                }
            }
        }
    }
    let pass = mismatches.is_empty();
    report(
        2,
        "complexity counters",
        pass,
        &format!("{checked} decoder/config combinations; mismatches: {mismatches:?}"),
    );
    assert!(pass);
}

#[test]
fn criterion_3_cpd_rotation() {
    let rotated = unit(4).rotate(ciod_rotation()).cpd();
    let target = 2.0 / 5f64.sqrt();
    let mut pass = (rotated - target).abs() < 1e-9;
    let mut unrotated = Vec::new();
    for m in [4, 16, 64, 256] {
        for n in [Normalization::UnitAverageEnergy, Normalization::UnitHalfSpacing] {
            let c = Constellation::square_qam(m, n).unwrap().cpd();
            pass &= c == 0.0;
            unrotated.push(c);
        }
    }
    report(
        3,
        "CPD and rotation",
        pass,
        &format!("rotated 4-QAM cpd = {rotated:.12}, 2/sqrt5 = {target:.12}; unrotated cpd = {unrotated:?}"),
    );
    assert!(pass);
}

#[test]
fn criterion_4_coding_gain_structure() {
    let mut pass = true;
    let mut notes = Vec::new();
    for n in [Normalization::UnitAverageEnergy, Normalization::UnitHalfSpacing] {
        for m in [4, 16] {
            let cfg = SchemeConfig::low_dosm(4, &Constellation::square_qam(m, n).unwrap()).unwrap();
            let cpd = cfg.constellation().cpd();
            let r = coding_gain(&cfg).unwrap();
            let same = r.case_min(ciodsm::analysis::PairCase::SameCodebook).unwrap();
            let ok_same = (same - cpd * cpd).abs() < 1e-9;
            let ok_pos = r.gain > 0.0;
            pass &= ok_same && ok_pos;
            notes.push(format!("{} M={m}: same-CB {same:.10} vs cpd^2 {:.10}, G = {:.10}", n.tag(), cpd * cpd, r.gain));
        }
    }
    let rows = nvd_scan(4, &[16, 64]).unwrap();
    for n in [Normalization::UnitAverageEnergy, Normalization::UnitHalfSpacing] {
        let g = |m| {
            rows.iter()
                .find(|r| r.m == m && r.normalization == n && r.case.is_none())
                .unwrap()
                .gain
        };
        let (g16, g64) = (g(16), g(64));
        let equal = (g16 - g64).abs() < 1e-9;
        pass &= equal;
        notes.push(format!("{}: G(16) = {g16:.10}, G(64) = {g64:.10}, equal: {equal}", n.tag()));
    }
    let table: Vec<String> = nvd_scan(4, &[4])
        .unwrap()
        .iter()
        .chain(rows.iter())
        .filter(|r| r.case.is_none())
        .map(|r| format!("M={} {} G={:.6} ref={:?} match={:?}", r.m, r.normalization.tag(), r.gain, r.reference, r.matches_reference))
        .collect();
    notes.push(format!("table comparison (informational): {table:?}"));
    report(4, "coding-gain structure", pass, &notes.join("; "));
    assert!(pass, "{notes:#?}");
}

#[test]
fn criterion_5_phase_optimization() {
    let mut pass = true;
    let mut notes = Vec::new();
    for (name, m) in [("BPSK", 2), ("4-QAM", 4)] {
        let cfg = SchemeConfig::high_dosm(4, &unit(m), vec![]).unwrap();
        let opt = optimize_phases(&cfg, 16).unwrap();
        let reference = opt.reference_gain.unwrap();
        let printed = opt.reference_gain_as_printed.unwrap();
        let cert = diversity_certificate(&cfg.with_phases(opt.best.phases.clone()).unwrap()).unwrap();
        let ok = opt.best.achieved_gain >= reference
            && opt.best.achieved_gain >= printed
            && opt.best.achieved_gain > 0.0
            && cert.full_diversity;
        pass &= ok;
        notes.push(format!(
            "{name}: achieved {:.6} (k = {:?}), table phases {reference:.6} (as printed {printed:.6}), certified {}",
            opt.best.achieved_gain, opt.best.indices, cert.full_diversity
        ));
    }
    report(5, "phase optimization", pass, &notes.join("; "));
    assert!(pass);
}

#[test]
fn criterion_6_r1_structure() {
    let mut worst: f64 = 0.0;
    let mut decomps = 0;
    let configs = [
        SchemeConfig::low_dosm(4, &unit(16)).unwrap(),
        SchemeConfig::high_dosm(4, &unit(4), vec![]).unwrap(),
    ];
    let mut rng = substream_rng(606, 0);
    for trial in 0..1000 {
        let cfg = &configs[trial % 2];
        let n_r = 1 + trial % 4;
        let h = draw_channel(n_r, cfg.n_antennas(), &mut rng).into_matrix();
        for cb in 0..cfg.num_codebooks() {
            let (l1, l2) = cfg.antenna_pair(cb);
            let d = build_real_decomp(&h, l1, l2, cfg).unwrap();
            worst = worst.max(d.off_block_max());
            decomps += 1;
        }
    }
    let pass = worst < 1e-9;
    report(
        6,
        "R1 zero pattern",
        pass,
        &format!("1000 channels, {decomps} decompositions, max |r_ij| off-block = {worst:.3e}"),
    );
    assert!(pass);
}

#[test]
fn criterion_7_diversity_slope() {
    let cfg = sim("schemes = sm:bpsk:ml, low:qam4:mrc\nnt = 4\nnr = 1\nsnr_db = 20, 25, 30\nmin_errors = 400\nmax_trials = 20000000\nseed = 7");
    let r = run_ser_sweep(&cfg).unwrap();
    let sm = estimate_diversity_slope(&r, 0, (20.0, 30.0)).unwrap();
    let low = estimate_diversity_slope(&r, 1, (20.0, 30.0)).unwrap();
    let min_errors = r.points.iter().map(|p| p.errors).min().unwrap();
    let pass = (-2.4..=-1.6).contains(&low) && (-1.3..=-0.7).contains(&sm) && min_errors >= 100;
    let pts: Vec<String> = r.points.iter().map(|p| format!("{}@{}dB={:.3e}/{}", p.scheme, p.snr_db, p.ser, p.trials)).collect();
    report(
        7,
        "diversity slope",
        pass,
        &format!("low_dosm slope {low:.3}, sm slope {sm:.3}, min errors/point {min_errors}; {pts:?}"),
    );
    assert!(pass);
}

#[test]
fn criterion_8_relative_performance() {
    let cfg = sim("preset = 3bpcu\nphases = table\nnt = 4\nnr = 2\nsnr_db = 8:2:14\nmin_errors = 200\nmax_trials = 4000000\nseed = 8");
    let r = run_ser_sweep(&cfg).unwrap();
    let at = |e: usize, snr: f64| r.entry_points(e).find(|p| p.snr_db == snr).unwrap();
    let mut winning = Vec::new();
    for &snr in &cfg.snr_db {
        let sm = at(0, snr);
        let better = |p: &ciodsm::simkit::SimPoint| 2.0 * p.ser <= sm.ser && p.ci_high < sm.ci_low;
        if better(at(1, snr)) && better(at(2, snr)) {
            winning.push(snr);
        }
    }
    let pass = !winning.is_empty();
    let pts: Vec<String> = r
        .points
        .iter()
        .map(|p| format!("{}@{}dB={:.3e}[{:.2e},{:.2e}]", p.scheme, p.snr_db, p.ser, p.ci_low, p.ci_high))
        .collect();
    report(
        8,
        "relative performance at 3 bpcu",
        pass,
        &format!("SNRs where both proposed schemes beat SM by >= 2x with disjoint intervals: {winning:?}; {pts:?}"),
    );
    assert!(pass);
}

#[test]
fn criterion_9_determinism() {
    let text = "preset = 3bpcu\nnr = 2\nsnr_db = 0, 6, 12\nmin_errors = 50\nmax_trials = 30000\nseed = 99\nphases = table";
    let run = |workers: usize| {
        let cfg = sim(&format!("{text}\nworkers = {workers}"));
        let mut buf = Vec::new();
        write_csv(&run_ser_sweep(&cfg).unwrap(), &mut buf).unwrap();
        buf
    };
    let one = run(1);
    let four = run(4);
    let again = run(1);
    let pass = one == four && one == again;
    report(
        9,
        "determinism",
        pass,
        &format!("{} CSV bytes; workers 1 vs 4 identical: {}, rerun identical: {}", one.len(), one == four, one == again),
    );
    assert!(pass);
    // a label-level sanity check that the sweep exercised decoding
    assert!(String::from_utf8(one).unwrap().lines().count() == 10);
    let _ = CodewordLabel::new(0, 0, 0);
}
