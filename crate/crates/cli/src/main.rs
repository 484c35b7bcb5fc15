//! `jetvar`: variational calculus on problem files.
//!
//! Exit status: 0 success, 1 usage or parse error, 2 semantic error,
//! 3 numeric check failed.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use jetvar::textio::Format;

#[derive(Parser)]
#[command(name = "jetvar", version, about = "Variational calculus on jet spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Euler–Lagrange source form of a Lagrangian.
    El(Common),
    /// Vertical differential of the Euler–Lagrange morphism and its adjoint.
    Jacobi(Common),
    /// Helmholtz obstruction of a source form and the variational verdict.
    Helmholtz(Common),
    /// Hessian of a Lagrangian along two variation fields, with its split.
    Hessian(Common),
    /// Iterated quotient variation along one or more variation fields.
    Variation(Common),
    /// Euler–Lagrange residual along a section.
    CheckCritical(Common),
    /// Finite-difference second variation against the symbolic morphisms.
    SecondVar(Common),
    /// Formal adjoint of a bilinear form.
    Adjoint(Common),
}

#[derive(Args, Clone)]
pub struct Common {
    /// Problem file.
    pub input: PathBuf,
    /// plain, latex or structured (JSON).
    #[arg(long, default_value = "plain", value_parser = parse_format)]
    pub format: Format,
    /// Gauss–Legendre nodes per axis.
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Finite-difference step.
    #[arg(long)]
    pub step: Option<f64>,
    /// Relative tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Lagrangian to use when the file defines several.
    #[arg(long)]
    pub lagrangian: Option<String>,
    /// Section to check when the file defines several.
    #[arg(long)]
    pub section: Option<String>,
    /// Variation fields, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub fields: Vec<String>,
    /// Source form for `helmholtz`.
    #[arg(long)]
    pub source: Option<String>,
    /// Bilinear form for `adjoint`.
    #[arg(long)]
    pub form: Option<String>,
    /// On-shell rules used to reduce the `jacobi` report.
    #[arg(long)]
    pub onshell: Option<String>,
    /// Write the output here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let (name, args) = match cli.command {
        Command::El(a) => ("el", a),
        Command::Jacobi(a) => ("jacobi", a),
        Command::Helmholtz(a) => ("helmholtz", a),
        Command::Hessian(a) => ("hessian", a),
        Command::Variation(a) => ("variation", a),
        Command::CheckCritical(a) => ("check-critical", a),
        Command::SecondVar(a) => ("second-var", a),
        Command::Adjoint(a) => ("adjoint", a),
    };
    match commands::run(name, &args) {
        Ok(outcome) => {
            if let Err(e) = emit(&args, &outcome.text) {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            if let Some(msg) = &outcome.failure {
                eprintln!("check failed: {msg}");
                return ExitCode::from(3);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn emit(args: &Common, text: &str) -> std::io::Result<()> {
    match &args.output {
        Some(path) => std::fs::write(path, text),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes())
        }
    }
}
