use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use ciodsm::analysis::{self, coding_gain, coding_gain_exhaustive, nvd_scan, optimize_phases};
use ciodsm::codebooks::{stbc_sm_rate, Scheme};
use ciodsm::constellation::Normalization;
use ciodsm::simkit::{
    normalize_key, parse_kv, parse_scheme, run_ser_sweep, verify_decoders, write_bit_csv, write_csv, Modulation,
    PhaseChoice, SchemeSpec, SimConfig,
};

#[derive(Parser)]
#[command(name = "ciodsm", version, about = "Spatial modulation with CIOD transmit diversity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo SER sweep
    Simulate(SimulateArgs),
    /// Minimum pairwise determinant of a codebook
    CodingGain(CodingGainArgs),
    /// Grid search for the High DoSM codebook-set phases
    OptimizePhases(OptimizeArgs),
    /// Check the MRC and QR decoders against exhaustive ML
    VerifyDecoders(VerifyArgs),
    /// Spectral efficiency of each scheme
    Rate(RateArgs),
    /// Low DoSM coding gain against constellation size
    NvdScan(NvdArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// key = value configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-bit diagnostics CSV
    #[arg(long)]
    bits_out: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    /// Comma-separated scheme:modulation:decoder list
    #[arg(long)]
    schemes: Option<String>,
    #[arg(long)]
    nt: Option<usize>,
    #[arg(long)]
    nr: Option<usize>,
    /// Comma-separated values or start:step:stop
    #[arg(long)]
    snr_db: Option<String>,
    #[arg(long)]
    min_errors: Option<u64>,
    #[arg(long)]
    max_trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    target_ser: Option<f64>,
    /// table, optimized or unit
    #[arg(long)]
    phases: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    Energy,
    HalfSpacing,
    Both,
}

impl NormArg {
    fn list(self) -> Vec<Normalization> {
        match self {
            NormArg::Energy => vec![Normalization::UnitAverageEnergy],
            NormArg::HalfSpacing => vec![Normalization::UnitHalfSpacing],
            NormArg::Both => vec![Normalization::UnitAverageEnergy, Normalization::UnitHalfSpacing],
        }
    }
}

#[derive(Args)]
struct CodingGainArgs {
    /// low or high
    #[arg(long)]
    scheme: String,
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 4)]
    nt: usize,
    #[arg(long, value_enum, default_value_t = NormArg::Both)]
    normalization: NormArg,
    /// High DoSM phases: table, optimized or unit
    #[arg(long, default_value = "optimized")]
    phases: String,
    /// Visit every codeword pair instead of the reduced search
    #[arg(long)]
    exhaustive: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OptimizeArgs {
    #[arg(long, default_value_t = 4)]
    nt: usize,
    /// bpsk or qam4
    #[arg(long = "mod")]
    modulation: String,
    #[arg(long, default_value_t = 16)]
    grid: usize,
}

#[derive(Args)]
struct VerifyArgs {
    /// scheme:modulation, e.g. low:qam16
    #[arg(long, default_value = "low:qam16")]
    scheme: String,
    #[arg(long, default_value_t = 4)]
    nt: usize,
    #[arg(long, default_value_t = 2)]
    nr: usize,
    /// Comma-separated SNR values in dB
    #[arg(long, default_value = "5,15")]
    snr_db: String,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "optimized")]
    phases: String,
}

#[derive(Args)]
struct RateArgs {
    #[arg(long, default_value_t = 4)]
    nt: usize,
    /// Constellation orders, comma separated
    #[arg(long, default_value = "2,4,16,64")]
    m: String,
}

#[derive(Args)]
struct NvdArgs {
    #[arg(long, default_value_t = 4)]
    nt: usize,
    #[arg(long, default_value = "4,16,64")]
    m: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|v| v.trim().parse().map_err(|_| anyhow::anyhow!("bad list item '{v}'")))
        .collect()
}

fn modulation_for(m: usize) -> Modulation {
    if m == 2 {
        Modulation::Bpsk
    } else {
        Modulation::Qam(m)
    }
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let mut kv: BTreeMap<String, String> = match &a.config {
        Some(p) => parse_kv(&std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)?,
        None => BTreeMap::new(),
    };
    let overrides: [(&str, Option<String>); 11] = [
        ("preset", a.preset),
        ("schemes", a.schemes),
        ("nt", a.nt.map(|v| v.to_string())),
        ("nr", a.nr.map(|v| v.to_string())),
        ("snr_db", a.snr_db),
        ("min_errors", a.min_errors.map(|v| v.to_string())),
        ("max_trials", a.max_trials.map(|v| v.to_string())),
        ("seed", a.seed.map(|v| v.to_string())),
        ("workers", a.workers.map(|v| v.to_string())),
        ("target_ser", a.target_ser.map(|v| v.to_string())),
        ("phases", a.phases),
    ];
    for (k, v) in overrides {
        if let Some(v) = v {
            if k == "preset" {
                kv.remove("schemes");
            }
            kv.insert(normalize_key(k), v);
        }
    }
    let cfg = SimConfig::from_map(&kv)?;
    let result = run_ser_sweep(&cfg)?;
    eprintln!("# {}", result.config_summary);
    let mut w = output(&a.out)?;
    write_csv(&result, &mut w)?;
    w.flush()?;
    if let Some(p) = &a.bits_out {
        let mut w = output(&Some(p.clone()))?;
        write_bit_csv(&result, &mut w)?;
        w.flush()?;
    }
    Ok(())
}

fn coding_gain_cmd(a: CodingGainArgs) -> Result<()> {
    let scheme = parse_scheme(&a.scheme)?;
    if scheme == Scheme::Sm {
        bail!("coding gain is defined for the two-slot schemes only");
    }
    let spec = SchemeSpec {
        scheme,
        modulation: modulation_for(a.m),
        decoder: ciodsm::decoders::DecoderKind::Exhaustive,
    };
    let phases: PhaseChoice = a.phases.parse()?;
    let mut reports = Vec::new();
    for n in a.normalization.list() {
        let cfg = spec.build_with(a.nt, phases, n)?;
        let r = if a.exhaustive {
            coding_gain_exhaustive(&cfg)?
        } else {
            coding_gain(&cfg)?
        };
        eprintln!(
            "# {} M={} {}: G = {} over {} pairs ({}), minimum in {}",
            r.scheme,
            r.m,
            n.tag(),
            r.gain,
            r.summary.pairs,
            if r.exhaustive { "all pairs" } else { "reduced search" },
            r.case
        );
        reports.push(r);
    }
    let mut w = output(&a.out)?;
    analysis::write_gain_csv(&reports, &mut w)?;
    w.flush()?;
    Ok(())
}

fn optimize_cmd(a: OptimizeArgs) -> Result<()> {
    let modulation: Modulation = a.modulation.parse()?;
    let spec = SchemeSpec {
        scheme: Scheme::HighDosm,
        modulation,
        decoder: ciodsm::decoders::DecoderKind::Exhaustive,
    };
    let cfg = spec.build(a.nt, PhaseChoice::Unit)?;
    let opt = optimize_phases(&cfg, a.grid)?;
    println!("assignments searched: {}", opt.assignments_searched);
    println!("within-set minimum: {}", opt.within_cbs_gain);
    for p in &opt.per_anchor {
        println!("anchor {:.6} rad: gain {} at k = {:?}", p.anchor, p.achieved_gain, p.indices);
    }
    println!("best gain: {}", opt.best.achieved_gain);
    for (i, z) in opt.best.phases.iter().enumerate() {
        println!("  phase {}: {:+.4}{:+.4}j", i + 1, z.re, z.im);
    }
    if let Some(g) = opt.reference_gain {
        println!("reference phases: gain {g}");
    }
    if let Some(g) = opt.reference_gain_as_printed {
        println!("reference phases as printed: gain {g}");
    }
    Ok(())
}

fn verify_cmd(a: VerifyArgs) -> Result<()> {
    let spec: SchemeSpec = format!("{}:ml", a.scheme).parse()?;
    let cfg = spec.build(a.nt, a.phases.parse()?)?;
    let mut failed = false;
    for snr in parse_list::<f64>(&a.snr_db)? {
        let r = verify_decoders(&cfg, a.nr, snr, a.trials, a.seed)?;
        println!(
            "{} nt={} nr={} snr={} dB: trials={} ties_excluded={} mrc_disagreements={} qr_disagreements={} eval_mismatches={}",
            spec, a.nt, a.nr, snr, r.trials, r.ties_excluded, r.mrc_disagreements, r.qr_disagreements, r.eval_mismatches
        );
        for d in &r.first_disagreements {
            println!("  trial {}: {} chose {:?}, ML chose {:?}", d.trial, d.decoder, d.got, d.oracle);
        }
        failed |= !r.passed();
    }
    if failed {
        bail!("decoders disagree");
    }
    Ok(())
}

fn rate_cmd(a: RateArgs) -> Result<()> {
    println!("nt,m,sm,low_dosm,high_dosm,stbc_sm");
    for m in parse_list::<usize>(&a.m)? {
        let spec = |scheme| SchemeSpec {
            scheme,
            modulation: modulation_for(m),
            decoder: ciodsm::decoders::DecoderKind::Exhaustive,
        };
        let rate = |scheme| -> Result<f64> { Ok(spec(scheme).build(a.nt, PhaseChoice::Unit)?.rate_bpcu()) };
        println!(
            "{},{},{},{},{},{}",
            a.nt,
            m,
            rate(Scheme::Sm)?,
            rate(Scheme::LowDosm)?,
            rate(Scheme::HighDosm)?,
            stbc_sm_rate(a.nt, m)
        );
    }
    Ok(())
}

fn nvd_cmd(a: NvdArgs) -> Result<()> {
    let rows = nvd_scan(a.nt, &parse_list::<usize>(&a.m)?)?;
    for r in rows.iter().filter(|r| r.matches_reference == Some(false)) {
        eprintln!(
            "# M={} {}: G = {} does not match the reference {}",
            r.m,
            r.normalization.tag(),
            r.gain,
            r.reference.unwrap_or(f64::NAN)
        );
    }
    let mut w = output(&a.out)?;
    analysis::write_nvd_csv(&rows, &mut w)?;
    w.flush()?;
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Simulate(a) => simulate(a),
        Command::CodingGain(a) => coding_gain_cmd(a),
        Command::OptimizePhases(a) => optimize_cmd(a),
        Command::VerifyDecoders(a) => verify_cmd(a),
        Command::Rate(a) => rate_cmd(a),
        Command::NvdScan(a) => nvd_cmd(a),
    }
}
