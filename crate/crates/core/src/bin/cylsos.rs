use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cylinder_sos::cylinder::CylinderPoly;
use cylinder_sos::envelope::envelope_g;
use cylinder_sos::pipeline::{self, PipelineConfig};
use cylinder_sos::poly::{circle_sos, factor_real_zero_part, CirclePoly};
use cylinder_sos::verify::{self, format_poly, parse_poly, CertificateFile, VerifyMode};
use cylinder_sos::{Error, Rational};

const PASS: u8 = 0;
const FAIL: u8 = 1;
const INCONCLUSIVE: u8 = 2;
const USAGE: u8 = 3;

#[derive(Parser)]
#[command(name = "cylsos", version, about = "Sum-of-squares certificates on the cylinder S1 x R")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certify the polynomial in a file (`-` for stdin) and write a certificate.
    Certify {
        input: String,
        /// Certify on {h >= 0} x R instead, as sigma0 + sigma1*h.
        #[arg(long, value_name = "h=<poly>")]
        preorder: Option<String>,
        /// Accepted residual relative to 1 + max|coeff|.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Round to an exact rational certificate.
        #[arg(long)]
        exact: bool,
        /// Largest x-degree allowed in a square.
        #[arg(long, value_name = "D")]
        max_degree: Option<usize>,
        /// Output file; stdout when absent.
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
    },
    /// Verify a certificate file against its own target.
    Verify {
        cert: PathBuf,
        #[arg(long, default_value = "interval")]
        mode: VerifyMode,
        #[arg(long, default_value_t = verify::DEFAULT_TOL)]
        tol: f64,
    },
    /// Search for a point where the polynomial is negative.
    Check { poly: String },
    /// Split a circle polynomial into its real-zero part and a positive part.
    FactorCircle { poly: String },
    /// Sample the envelope min_y f/s over the circle.
    Envelope {
        poly: String,
        #[arg(long = "s")]
        s: String,
        #[arg(long, default_value_t = 16)]
        samples: usize,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { USAGE } else { PASS };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let code = match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    };
    ExitCode::from(code)
}

fn exit_code(e: &Error) -> u8 {
    match e.root() {
        Error::Negative(_) => FAIL,
        Error::Syntax { .. } | Error::UnknownVariable { .. } | Error::Schema(_) => USAGE,
        _ => INCONCLUSIVE,
    }
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Schema(msg.into())
}

fn read_input(input: &str) -> Result<String, Error> {
    let mut text = String::new();
    let res = if input == "-" {
        std::io::stdin().read_to_string(&mut text).map(|_| ())
    } else {
        std::fs::read_to_string(input).map(|t| text = t)
    };
    res.map_err(|e| usage(format!("cannot read {input}: {e}")))?;
    Ok(text)
}

fn parse_circle(text: &str) -> Result<CirclePoly<Rational>, Error> {
    let p = parse_poly(text)?;
    if p.degree().unwrap_or(0) > 0 {
        return Err(usage(format!("`{text}` depends on y; expected a circle polynomial")));
    }
    Ok(p.coeff(0))
}

fn run(cmd: Command) -> Result<u8, Error> {
    match cmd {
        Command::Certify { input, preorder, tol, exact, max_degree, output } => {
            let f = parse_poly(read_input(&input)?.trim())?;
            let h = match preorder {
                Some(arg) => {
                    let text = arg.strip_prefix("h=").ok_or_else(|| usage("--preorder expects h=<poly>"))?;
                    Some(parse_circle(text)?)
                }
                None => None,
            };
            let mut cfg = PipelineConfig { tol, ..PipelineConfig::default() };
            if let Some(d) = max_degree {
                cfg.max_x_degree = d;
            }
            let (file, mode) = if exact {
                let cert = match &h {
                    Some(h) => pipeline::certify_preorder_exact(&f, h, &cfg)?,
                    None => pipeline::certify_exact(&f, &cfg)?,
                };
                (CertificateFile::from_certificate(&cert), VerifyMode::Exact)
            } else {
                let ff = f.to_f64();
                let cert = match &h {
                    Some(h) => pipeline::certify_preorder(&ff, &h.to_f64(), &cfg)?,
                    None => pipeline::theorem2_certify(&ff, &cfg)?,
                };
                (CertificateFile::from_certificate(&cert), VerifyMode::Interval)
            };
            // the written file is checked exactly as a reader would see it
            let json = file.to_json();
            let report = verify::verify_file(&json, mode, tol)?;
            if !report.passed() {
                eprintln!("certificate failed verification: {:?}", report.verdict);
                return Ok(INCONCLUSIVE);
            }
            match output {
                Some(path) => std::fs::write(&path, json + "\n").map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?,
                None => {
                    // a closed pipe downstream is not an error of ours
                    let _ = writeln!(std::io::stdout(), "{json}");
                }
            }
            eprintln!("certified: {} terms, residual {:.3e} ({mode})", file.terms.len(), report.identity_residual);
            Ok(PASS)
        }
        Command::Verify { cert, mode, tol } => {
            let text = std::fs::read_to_string(&cert).map_err(|e| usage(format!("cannot read {}: {e}", cert.display())))?;
            let report = verify::verify_file(&text, mode, tol)?;
            for c in report.piece_checks.iter().filter(|c| !c.passed) {
                println!("check {}: {}", c.item, c.detail);
            }
            match &report.verdict {
                verify::Verdict::Pass => {
                    println!("PASS residual {:.3e} (mode {mode}, tolerance {:.3e})", report.identity_residual, report.tolerance);
                    Ok(PASS)
                }
                verify::Verdict::Fail(why) => {
                    println!("FAIL {why} (mode {mode})");
                    Ok(FAIL)
                }
            }
        }
        Command::Check { poly } => {
            let f = parse_poly(&poly)?.to_f64();
            match pipeline::check(&f, None) {
                Some(w) => {
                    println!("negative at {w}");
                    Ok(FAIL)
                }
                None => {
                    println!("no counterexample found");
                    Ok(PASS)
                }
            }
        }
        Command::FactorCircle { poly } => {
            let a = parse_circle(&poly)?.to_f64();
            let (b, c) = factor_real_zero_part(&a)?;
            println!("real-zero part: {}", format_poly(&CylinderPoly::from_circle(b.trimmed(1e-14))));
            println!("positive part: {}", format_poly(&CylinderPoly::from_circle(c.trimmed(1e-14))));
            for (k, sq) in circle_sos(&c)?.iter().enumerate() {
                println!("positive part square {k}: {}", format_poly(&CylinderPoly::from_circle(sq.trimmed(1e-14))));
            }
            Ok(PASS)
        }
        Command::Envelope { poly, s, samples } => {
            let f = parse_poly(&poly)?.to_f64();
            let s = parse_poly(&s)?;
            if s.x_degree() > 0 {
                return Err(usage("--s must be a polynomial in y only"));
            }
            let s = cylinder_sos::poly::UnivariatePoly::new(s.coeffs().iter().map(|c| c.to_f64().as_constant().unwrap_or(0.0)).collect());
            let g = envelope_g(&f, &s, samples.max(1))?;
            println!("theta\tg");
            for (th, v) in &g.samples {
                println!("{th:.12}\t{v:.12e}");
            }
            Ok(PASS)
        }
    }
}
