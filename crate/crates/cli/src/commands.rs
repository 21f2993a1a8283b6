//! Command implementations. Reports go to stdout; run summaries go to
//! stderr so piped output stays machine-readable. Key material is never
//! printed.

use std::fs;
use std::path::{Path, PathBuf};

use fse_core::bounds::{block_entropy_rate, delta_bound, sigma_lower_bound, BoundsReport};
use fse_core::condlz::{conditional_complexity, joint_parse};
use fse_core::fsm::{
    catalog, check_information_lossless, check_perfect_secrecy, secrecy_sweep, IlVerdict,
    SecrecyVerdict,
};
use fse_core::lossy::{rd_heuristic, rd_oracle, DistortionMeasure, RdPoint};
use fse_core::lz78::{lz_complexity, parse};
use fse_core::schemes::{
    binned_decrypt, binned_encrypt, cond_otp_decrypt, cond_otp_encrypt, fixed_rate_decrypt,
    fixed_rate_encrypt, otp_lz_decrypt, otp_lz_encrypt, BinAssignment, BinnedOutcome, Cryptogram,
    Mode,
};
use fse_core::{Alphabet, Sequence};
use rand::rngs::OsRng;
use rand::RngCore;

use crate::symio::{
    advance_key, load_key, read_sequence, resolve_framing, sequence_to_bytes, sidecar_path,
    SymbolMode,
};
use crate::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ModeArg {
    Variable,
    FixedRate,
    Conditional,
    Binned,
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Variable => "variable",
        Mode::FixedRate => "fixed-rate",
        Mode::Conditional => "conditional",
        Mode::Binned => "binned",
    }
}

fn file_id(path: &Path) -> String {
    path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "input".into())
}

#[derive(clap::Args)]
pub struct AnalyzeArgs {
    /// Input file
    pub input: PathBuf,
    /// Side-information file, same framing as the input
    #[arg(long)]
    pub si: Option<PathBuf>,
    /// Alphabet size (default 2 bit-wise, 256 byte-wise)
    #[arg(long)]
    pub alpha: Option<u16>,
    /// How file bytes map to symbols
    #[arg(long, value_enum)]
    pub symbols: Option<SymbolMode>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

pub fn analyze(a: AnalyzeArgs) -> CliResult<()> {
    let (mode, alpha) = resolve_framing(a.symbols, a.alpha)?;
    let x = read_sequence(&a.input, mode, alpha)?;
    let c = parse(&x).count();
    let rho = lz_complexity(&x)?;
    let cond = match &a.si {
        Some(si) => {
            let s = read_sequence(si, mode, alpha)?;
            Some((joint_parse(&x, &s)?, conditional_complexity(&x, &s)?))
        }
        None => None,
    };
    match a.format {
        Format::Json => {
            let mut rep = serde_json::json!({ "n": x.len(), "c": c, "rho": rho });
            if let Some((jp, rc)) = &cond {
                rep["c_xs"] = (jp.c_xs).into();
                rep["c_s"] = (jp.c_s).into();
                rep["group_counts"] = jp.group_counts.clone().into();
                rep["rho_cond"] = (*rc).into();
            }
            println!("{}", rep);
        }
        Format::Text => {
            println!("n: {}", x.len());
            println!("c: {}", c);
            println!("rho: {:.6}", rho);
            if let Some((jp, rc)) = &cond {
                println!("c_xs: {}", jp.c_xs);
                println!("c_s: {}", jp.c_s);
                let counts: Vec<String> = jp.group_counts.iter().map(|v| v.to_string()).collect();
                println!("group_counts: {}", counts.join(" "));
                println!("rho_cond: {:.6}", rc);
            }
        }
        Format::Csv => return Err(CliError::Usage("analyze emits text or json".into())),
    }
    Ok(())
}

#[derive(clap::Args)]
pub struct EncryptArgs {
    /// Input file
    pub input: PathBuf,
    /// Output container
    #[arg(short, long)]
    pub output: PathBuf,
    /// Key file; raw bytes, drawn MSB-first from the sidecar cursor
    #[arg(long)]
    pub key: PathBuf,
    /// Start reading the key at this byte instead of the sidecar cursor
    #[arg(long)]
    pub key_offset: Option<u64>,
    #[arg(long, value_enum)]
    pub mode: ModeArg,
    /// Cipher bits per symbol (fixed-rate) or bin-index bits per symbol (binned)
    #[arg(long)]
    pub rate: Option<f64>,
    /// Side-information file; conditional mode
    #[arg(long)]
    pub si: Option<PathBuf>,
    /// Bin-assignment seed; binned mode
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub alpha: Option<u16>,
    #[arg(long, value_enum)]
    pub symbols: Option<SymbolMode>,
}

pub fn encrypt(a: EncryptArgs) -> CliResult<()> {
    let (mode, alpha) = resolve_framing(a.symbols, a.alpha)?;
    let x = read_sequence(&a.input, mode, alpha)?;
    let (ks, mut tape) = load_key(&a.key, a.key_offset)?;
    let rate = || a.rate.ok_or_else(|| CliError::Usage("this mode needs --rate".into()));
    let cg = match a.mode {
        ModeArg::Variable => otp_lz_encrypt(&x, &mut tape)?,
        ModeArg::FixedRate => fixed_rate_encrypt(&x, rate()?, &mut tape)?,
        ModeArg::Conditional => {
            let si =
                a.si.as_ref().ok_or_else(|| CliError::Usage("conditional mode needs --si".into()))?;
            cond_otp_encrypt(&x, &read_sequence(si, mode, alpha)?, &mut tape)?
        }
        ModeArg::Binned => binned_encrypt(&x, &BinAssignment::new(a.seed, rate()?)?, &mut tape)?,
    };
    fs::write(&a.output, cg.to_bytes())?;
    let (new_off, wasted) = advance_key(&ks, cg.consumed)?;
    summary(&cg, new_off, wasted);
    Ok(())
}

fn summary(cg: &Cryptogram, new_off: u64, wasted: u64) {
    eprintln!(
        "{}: {} symbols (alpha {}), {} cipher bits, {} key bits consumed (rate {:.6})",
        mode_name(cg.mode),
        cg.n,
        cg.alphabet.size(),
        cg.payload.len(),
        cg.consumed,
        cg.consumed as f64 / cg.n as f64,
    );
    eprintln!("key cursor -> byte {} ({} pad bits wasted by byte rounding)", new_off, wasted);
}

#[derive(clap::Args)]
pub struct DecryptArgs {
    /// Cryptogram container
    pub input: PathBuf,
    /// Output file
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long)]
    pub key: PathBuf,
    /// Start reading the key at this byte instead of the sidecar cursor
    #[arg(long)]
    pub key_offset: Option<u64>,
    /// Side-information file; conditional and binned containers
    #[arg(long)]
    pub si: Option<PathBuf>,
    /// Complexity margin below the rate for the binned decoder
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// Output framing override; defaults from the container alphabet
    #[arg(long, value_enum)]
    pub symbols: Option<SymbolMode>,
}

pub fn decrypt(a: DecryptArgs) -> CliResult<()> {
    let cg = Cryptogram::from_bytes(&fs::read(&a.input)?)?;
    let out_mode = match a.symbols {
        Some(m) => m,
        None if cg.alphabet.size() == 2 => SymbolMode::Bits,
        None => SymbolMode::Bytes,
    };
    let read_si = |si: &Option<PathBuf>| -> CliResult<Sequence> {
        let si = si.as_ref().ok_or_else(|| CliError::Usage("this container needs --si".into()))?;
        Ok(read_sequence(si, out_mode, cg.alphabet.size())?)
    };
    let (ks, mut tape) = load_key(&a.key, a.key_offset)?;
    let x = match cg.mode {
        Mode::Variable => otp_lz_decrypt(&cg, &mut tape)?,
        Mode::FixedRate => fixed_rate_decrypt(&cg, &mut tape)?,
        Mode::Conditional => cond_otp_decrypt(&cg, &read_si(&a.si)?, &mut tape)?,
        Mode::Binned => match binned_decrypt(&cg, &read_si(&a.si)?, a.eps, &mut tape)? {
            BinnedOutcome::Decoded(x) => x,
            BinnedOutcome::DecodeError => return Err(CliError::DecodeFailed),
        },
    };
    fs::write(&a.output, sequence_to_bytes(&x, out_mode)?)?;
    let (new_off, wasted) = advance_key(&ks, cg.consumed)?;
    summary(&cg, new_off, wasted);
    Ok(())
}

#[derive(clap::Args)]
pub struct BoundsArgs {
    /// Input file
    pub input: PathBuf,
    /// Machine state budget
    #[arg(long)]
    pub states: u64,
    /// Block length; omitted, the grid search picks the minimizer
    #[arg(long)]
    pub block: Option<usize>,
    #[arg(long)]
    pub alpha: Option<u16>,
    #[arg(long, value_enum)]
    pub symbols: Option<SymbolMode>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

pub fn bounds(a: BoundsArgs) -> CliResult<()> {
    let (mode, alpha) = resolve_framing(a.symbols, a.alpha)?;
    let x = read_sequence(&a.input, mode, alpha)?;
    let rep = match a.block {
        None => sigma_lower_bound(&x, a.states)?,
        Some(m) => {
            let (delta, terms) = delta_bound(a.states, x.len(), m, x.alphabet())?;
            let rho = lz_complexity(&x)?;
            BoundsReport {
                n: x.len(),
                chosen_m: m,
                s: a.states,
                alpha: x.alphabet().size(),
                block_entropy_rate: block_entropy_rate(&x, m)?,
                lz_complexity: rho,
                delta,
                term_breakdown: terms,
                sigma_lower: (rho - delta).max(0.0),
            }
        }
    };
    match a.format {
        Format::Json => println!("{}", rep.to_json()),
        Format::Csv => {
            println!("# fse-bounds-csv v1");
            println!("{}", BoundsReport::CSV_HEADER);
            println!("{}", rep.csv_row(&file_id(&a.input)));
        }
        Format::Text => return Err(CliError::Usage("bounds emits json or csv".into())),
    }
    Ok(())
}

#[derive(clap::Args)]
pub struct SweepArgs {
    /// Input file
    pub input: PathBuf,
    /// Machine state budget
    #[arg(long)]
    pub states: u64,
    /// Smallest prefix as a power-of-two exponent
    #[arg(long, default_value_t = 4)]
    pub min_exp: u32,
    #[arg(long)]
    pub alpha: Option<u16>,
    #[arg(long, value_enum)]
    pub symbols: Option<SymbolMode>,
}

/// Evaluates the bound on every power-of-two prefix (plus the full length)
/// and emits one CSV row per prefix, with the reference decay curve
/// `1/log2(n)` alongside for plotting.
pub fn sweep(a: SweepArgs) -> CliResult<()> {
    let (mode, alpha) = resolve_framing(a.symbols, a.alpha)?;
    let x = read_sequence(&a.input, mode, alpha)?;
    let floor = 1usize << a.min_exp;
    if x.len() < floor {
        return Err(CliError::Usage(format!(
            "input has {} symbols, below the smallest prefix {}",
            x.len(),
            floor
        )));
    }
    let mut sizes: Vec<usize> =
        (a.min_exp..).map(|k| 1usize << k).take_while(|&n| n <= x.len()).collect();
    if *sizes.last().expect("at least one prefix") != x.len() {
        sizes.push(x.len());
    }
    println!("# fse-sweep-csv v1");
    println!("n,s,chosen_m,block_entropy_rate,lz_complexity,delta,sigma_lower,inv_log2_n");
    for n in sizes {
        let prefix = Sequence::new(x.alphabet(), x.symbols()[..n].to_vec())?;
        let r = sigma_lower_bound(&prefix, a.states)?;
        println!(
            "{},{},{},{},{},{},{},{}",
            r.n,
            r.s,
            r.chosen_m,
            r.block_entropy_rate,
            r.lz_complexity,
            r.delta,
            r.sigma_lower,
            1.0 / (n as f64).log2()
        );
    }
    Ok(())
}

#[derive(clap::Args)]
pub struct VerifyArgs {
    /// Machine description file, or builtin:<name>
    pub spec: String,
    /// Plain-text length driven through both verifiers
    #[arg(long, default_value_t = 4)]
    pub len: usize,
    /// Restrict the secrecy check to one window, written a:b
    #[arg(long)]
    pub window: Option<String>,
    /// Alphabet for builtin machines
    #[arg(long, default_value_t = 2)]
    pub alpha: u16,
}

fn parse_window(s: &str) -> CliResult<(usize, usize)> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 2 {
        if let (Ok(a), Ok(b)) = (parts[0].parse(), parts[1].parse()) {
            return Ok((a, b));
        }
    }
    Err(CliError::Usage(format!("bad window {:?}; expected a:b", s)))
}

fn report_secrecy(n: usize, scope: &str, v: &SecrecyVerdict) -> bool {
    match v {
        SecrecyVerdict::Secure => {
            println!("perfect secrecy (n = {}, {}): yes", n, scope);
            true
        }
        SecrecyVerdict::Insecure(w) => {
            println!("perfect secrecy (n = {}, {}): NO", n, scope);
            println!("  witness: {}", w);
            false
        }
    }
}

pub fn verify(a: VerifyArgs) -> CliResult<()> {
    let spec = match a.spec.strip_prefix("builtin:") {
        Some(name) => catalog::builtin(name, Alphabet::new(a.alpha.into())?)?,
        None => fse_core::fsm::text::parse(&fs::read_to_string(Path::new(&a.spec))?)?,
    };
    println!(
        "machine: {} (alphabet {}, {} states)",
        a.spec,
        spec.alphabet().size(),
        spec.state_count()
    );

    let il = check_information_lossless(&spec, 1, a.len)?;
    let il_ok = match &il {
        IlVerdict::Lossless => {
            println!("information lossless (n = 1..{}): yes", a.len);
            true
        }
        IlVerdict::NotLossless(w) => {
            println!("information lossless (n = 1..{}): NO", a.len);
            println!("  witness: {}", w);
            false
        }
    };

    let sec_ok = match &a.window {
        Some(text) => {
            let win = parse_window(text)?;
            let v = check_perfect_secrecy(&spec, a.len, win)?;
            report_secrecy(a.len, &format!("window {}:{}", win.0, win.1), &v)
        }
        None => match secrecy_sweep(&spec, a.len)?.iter().find(|(_, v)| !v.is_secure()) {
            None => report_secrecy(a.len, "all windows", &SecrecyVerdict::Secure),
            Some((win, v)) => report_secrecy(a.len, &format!("window {}:{}", win.0, win.1), v),
        },
    };

    if il_ok && sec_ok {
        Ok(())
    } else {
        Err(CliError::VerifyFailed)
    }
}

#[derive(clap::Args)]
pub struct RdArgs {
    /// Input file
    pub input: PathBuf,
    /// Per-symbol Hamming distortion allowance
    #[arg(long)]
    pub distortion: f64,
    /// Use the budgeted search instead of the exhaustive one
    #[arg(long)]
    pub heuristic: bool,
    /// Candidate evaluations allowed to the budgeted search
    #[arg(long, default_value_t = 10_000)]
    pub budget: u64,
    /// Restart seed for the budgeted search
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the witness sequence here
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub alpha: Option<u16>,
    #[arg(long, value_enum)]
    pub symbols: Option<SymbolMode>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

pub fn rd(a: RdArgs) -> CliResult<()> {
    let (mode, alpha) = resolve_framing(a.symbols, a.alpha)?;
    let x = read_sequence(&a.input, mode, alpha)?;
    let d = DistortionMeasure::hamming(x.alphabet());
    let point = if a.heuristic {
        rd_heuristic(&x, a.distortion, &d, a.budget, a.seed)?
    } else {
        rd_oracle(&x, a.distortion, &d)?
    };
    match a.format {
        Format::Csv => {
            println!("# fse-rd-csv v1");
            println!("{}", RdPoint::CSV_HEADER);
            println!("{}", point.csv_row());
        }
        _ => {
            println!("n: {}", x.len());
            println!("distortion: {}", point.distortion);
            println!("value: {:.6}", point.value);
            println!("exact: {}", point.exact);
        }
    }
    if let Some(out) = &a.output {
        fs::write(out, sequence_to_bytes(&point.witness, mode)?)?;
    }
    Ok(())
}

#[derive(clap::Args)]
pub struct GenKeyArgs {
    /// Key file to create
    pub path: PathBuf,
    /// Random bytes to write
    #[arg(long)]
    pub bytes: u64,
}

pub fn gen_key(a: GenKeyArgs) -> CliResult<()> {
    let mut buf = vec![0u8; a.bytes as usize];
    OsRng.fill_bytes(&mut buf);
    fs::write(&a.path, &buf)?;
    fs::write(sidecar_path(&a.path), "0\n")?;
    eprintln!("{} key bytes written to {}; cursor reset to 0", a.bytes, a.path.display());
    Ok(())
}
