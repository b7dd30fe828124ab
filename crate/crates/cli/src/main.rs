mod samples;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ttafft::energy::{
    energy_of, normalize_ffts_per_mj, published_designs, report_csv, report_table, table1_report, ComparisonRow,
    CostProfile, EnergyReport, TechParams,
};
use ttafft::golden::{dft_float, fft_fixed, snr_db};
use ttafft::machine::{Machine, MachineConfig, RunStats, BLOCKS};
use ttafft::program::{assemble, disassemble, gen_fft_program, read_binary, write_binary, Program};
use ttafft::twiddle::TwiddleLut;
use ttafft::{DataWord, FftPlan, SampleVector};

#[derive(Parser)]
#[command(name = "ttafft", version, about = "Cycle-accurate TTA FFT processor model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one transform on the cycle-accurate machine
    Run(RunArgs),
    /// Estimate the energy of one transform
    Energy(EnergyArgs),
    /// Run every supported size and tabulate cycles, SNR and energy
    Sweep(SweepArgs),
    /// Assemble, encode, generate or disassemble move programs
    Asm {
        #[command(subcommand)]
        action: AsmAction,
    },
    /// Print the twiddle ROM, one `index re im` line per entry
    Lutdump {
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn parse_size(s: &str) -> Result<FftPlan, String> {
    let n: usize = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    FftPlan::new(n).map_err(|_| format!("{n} is not a supported size (powers of two from 64 to 16384)"))
}

#[derive(Clone, Copy, ValueEnum)]
enum Generator {
    Impulse,
    Dc,
    Random,
}

#[derive(Args)]
struct MachineFlags {
    /// Issue memory requests without the pairing scheduler
    #[arg(long)]
    no_scheduler: bool,
    /// Fetch the kernel from instruction memory on every iteration
    #[arg(long)]
    no_loop_buffer: bool,
}

impl MachineFlags {
    fn config(&self) -> MachineConfig {
        MachineConfig { scheduler: !self.no_scheduler, loop_buffer: !self.no_loop_buffer, ..MachineConfig::default() }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Transform size
    #[arg(long, value_parser = parse_size)]
    n: FftPlan,
    /// Built-in input generator
    #[arg(long, value_enum, default_value = "random", conflicts_with = "input_file")]
    input: Generator,
    /// Sample file (`index re im` text, or `.bin` little-endian i16 pairs)
    #[arg(long)]
    input_file: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Fail unless the output equals the untimed reference bit for bit
    #[arg(long)]
    verify: bool,
    /// Write the spectrum here (text, or `.bin` for binary)
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Write the final data memory as `index hex32` lines
    #[arg(long)]
    memory_dump: Option<PathBuf>,
    /// Write a per-cycle bus trace
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Run this program (assembly text or `.bin`) instead of the generated one
    #[arg(long)]
    program: Option<PathBuf>,
    #[command(flatten)]
    machine: MachineFlags,
}

#[derive(Args)]
struct ProfileArg {
    /// Cost profile: a built-in name or a `key = pJ` file
    #[arg(long, env = "TTAFFT_PROFILE", default_value = "28nm-0.6V")]
    profile: String,
}

impl ProfileArg {
    fn load(&self) -> Result<CostProfile> {
        if CostProfile::builtin_names().contains(&self.profile.as_str()) {
            return Ok(CostProfile::builtin(&self.profile)?);
        }
        let path = Path::new(&self.profile);
        let text = std::fs::read_to_string(path).with_context(|| format!("reading profile {}", path.display()))?;
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("profile");
        CostProfile::parse(name, &text).with_context(|| format!("in profile {}", path.display()))
    }
}

fn parse_tech(s: &str) -> Result<TechParams, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("`{p}` is not a number")))
        .collect::<Result<_, _>>()?;
    let [l, u, w] = parts[..] else {
        return Err("expected L_nm,U_volts,W_bits".into());
    };
    TechParams::new(l, u, w).map_err(|e| e.to_string())
}

#[derive(Args)]
struct EnergyArgs {
    #[arg(long, value_parser = parse_size, default_value = "1024")]
    n: FftPlan,
    #[command(flatten)]
    profile: ProfileArg,
    /// Technology of the profile as L_nm,U_volts,W_bits; prints the figure
    /// normalized to 65 nm, 1.0 V, 16 bits
    #[arg(long, value_parser = parse_tech)]
    normalize: Option<TechParams>,
    /// Print the comparison with published designs
    #[arg(long)]
    table1: bool,
    /// Comparison table as CSV
    #[arg(long, requires = "table1")]
    csv: bool,
    #[command(flatten)]
    machine: MachineFlags,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    profile: ProfileArg,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    csv: bool,
}

#[derive(Subcommand)]
enum AsmAction {
    /// Assemble text into a binary program image
    Assemble {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Print each instruction word of a program as 51-bit hex
    Encode { input: PathBuf },
    /// Generate the FFT program for a size
    Gen {
        #[arg(long, value_parser = parse_size)]
        n: FftPlan,
        /// Output path; `.bin` writes a binary image, anything else text
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Turn a binary program image back into text
    Disasm { input: PathBuf },
    /// Print the per-bus instruction field layout
    Layout,
}

fn load_program(path: &Path) -> Result<Program> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    if samples::is_binary(path) {
        Ok(read_binary(&bytes[..])?)
    } else {
        let text = String::from_utf8(bytes).context("program is not UTF-8")?;
        assemble(&text).with_context(|| format!("assembling {}", path.display()))
    }
}

fn input_samples(args: &RunArgs) -> Result<SampleVector> {
    let n = args.n.n_points();
    if let Some(path) = &args.input_file {
        return samples::read(path, n);
    }
    Ok(match args.input {
        Generator::Impulse => SampleVector::impulse(n, 0, 16384),
        Generator::Dc => SampleVector::dc(n, DataWord::new(16384, 0)),
        Generator::Random => SampleVector::random(n, args.seed),
    })
}

fn print_stats(s: &RunStats) {
    println!("cycles={} stalls={}", s.total_cycles, s.stall_cycles);
    println!(
        "imem_fetches={} loop_buffer_fetches={} kernel_imem_fetches={}",
        s.fetches_imem, s.fetches_loop_buffer, s.kernel_imem_fetches
    );
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let plan = args.n.clone();
    let x = input_samples(&args)?;
    let mut cfg = args.machine.config();
    cfg.trace = args.trace.is_some();
    let mut machine = Machine::new(cfg);
    let (y, stats) = match &args.program {
        Some(path) => machine.run_program_fft(&load_program(path)?, &plan, &x)?,
        None => machine.run_fft(&plan, &x)?,
    };
    print_stats(&stats);
    if let Some(path) = &args.output {
        samples::write(path, &y)?;
    }
    if let Some(path) = &args.memory_dump {
        let words = (0..plan.n_points()).map(|a| machine.memory().peek(a)).collect::<Result<Vec<_>, _>>()?;
        std::fs::write(path, samples::memory_image(&words)).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &args.trace {
        let mut text = machine.trace().join("\n");
        text.push('\n');
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    if args.verify {
        let want = fft_fixed(&plan, &x)?;
        let diffs = y.as_slice().iter().zip(want.as_slice()).filter(|(a, b)| a != b).count();
        if diffs > 0 {
            bail!("verification failed: {diffs} of {} bins differ from the reference", plan.n_points());
        }
        println!("verify=ok");
    }
    Ok(())
}

fn fmt_fft_per_mj(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else {
        format!("{v:.1}")
    }
}

fn print_energy(r: &EnergyReport) {
    println!("profile={} energy_nj={:.3} fft_per_mj={}", r.profile, r.total_nj, fmt_fft_per_mj(r.ffts_per_mj));
    for (name, nj) in &r.breakdown {
        println!("  {name:<20} {nj:>10.3} nJ");
    }
}

fn cmd_energy(args: EnergyArgs) -> Result<()> {
    let profile = args.profile.load()?;
    let plan = args.n;
    let mut machine = Machine::new(args.machine.config());
    let (_, stats) = machine.run_fft(&plan, &SampleVector::random(plan.n_points(), 1))?;
    let report = energy_of(&stats, &profile);
    if !args.csv {
        print_energy(&report);
    }
    if let Some(tech) = &args.normalize {
        let norm = if report.ffts_per_mj.is_infinite() {
            f64::INFINITY
        } else {
            normalize_ffts_per_mj(report.ffts_per_mj, tech, &TechParams::REFERENCE)?
        };
        if !args.csv {
            println!("norm_fft_per_mj={}", fmt_fft_per_mj(norm));
        }
    }
    if args.table1 {
        let mut rows: Vec<ComparisonRow> = published_designs().into_iter().map(|(r, _)| r).collect();
        if let (Some(tech), true) = (args.normalize, report.ffts_per_mj.is_finite()) {
            rows.push(ComparisonRow { name: "this-run".into(), raw_ffts_per_mj: report.ffts_per_mj, tech });
        }
        let table = table1_report(&rows)?;
        print!("{}", if args.csv { report_csv(&table) } else { report_table(&table) });
    }
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let profile = args.profile.load()?;
    let sep = if args.csv { "," } else { " " };
    let blocks: Vec<String> = (0..BLOCKS).map(|b| format!("blk{b}")).collect();
    println!("{}", ["n", "cycles", "stalls", "snr_db", "energy_nj", "fft_per_mj"].iter().map(|s| s.to_string()).chain(blocks).collect::<Vec<_>>().join(sep));
    let mut machine = Machine::new(MachineConfig::default());
    let mut stalled = false;
    for plan in FftPlan::all() {
        let n = plan.n_points();
        let x = SampleVector::random(n, args.seed);
        let (y, s) = machine.run_fft(&plan, &x)?;
        let snr = snr_db(&y, &dft_float(&x), &plan)?;
        let e = energy_of(&s, &profile);
        stalled |= s.stall_cycles > 0;
        let mut cols = vec![
            n.to_string(),
            s.total_cycles.to_string(),
            s.stall_cycles.to_string(),
            format!("{snr:.2}"),
            format!("{:.3}", e.total_nj),
            fmt_fft_per_mj(e.ffts_per_mj),
        ];
        cols.extend((0..BLOCKS).map(|b| s.block_total(b).to_string()));
        println!("{}", cols.join(sep));
    }
    if stalled {
        bail!("a generated program stalled");
    }
    Ok(())
}

fn write_out(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => match std::io::stdout().write_all(bytes) {
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
            r => r.context("writing stdout"),
        },
    }
}

fn cmd_asm(action: AsmAction) -> Result<()> {
    match action {
        AsmAction::Assemble { input, output } => {
            let program = load_program(&input)?;
            let mut buf = Vec::new();
            write_binary(&program, &mut buf)?;
            write_out(Some(&output), &buf)
        }
        AsmAction::Encode { input } => {
            for (i, bits) in load_program(&input)?.encode()?.iter().enumerate() {
                println!("{i:3} {bits:013x}");
            }
            Ok(())
        }
        AsmAction::Gen { n, output } => {
            let program = gen_fft_program(&n)?;
            match output {
                Some(p) if samples::is_binary(&p) => {
                    let mut buf = Vec::new();
                    write_binary(&program, &mut buf)?;
                    write_out(Some(&p), &buf)
                }
                other => write_out(other.as_deref(), disassemble(&program).as_bytes()),
            }
        }
        AsmAction::Disasm { input } => {
            write_out(None, disassemble(&load_program(&input)?).as_bytes())
        }
        AsmAction::Layout => {
            write_out(None, ttafft::arch::layout_table().as_bytes())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Energy(a) => cmd_energy(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Asm { action } => cmd_asm(action),
        Command::Lutdump { output } => {
            let mut buf = Vec::new();
            TwiddleLut::shared().dump(&mut buf).expect("writing to memory");
            write_out(output.as_deref(), &buf)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
