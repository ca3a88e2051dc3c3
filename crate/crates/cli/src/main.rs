//! `dhg`: meshes, spectral curves, Darboux transforms, polygon flows and the
//! invariant suite from the command line.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dhg_core::quatlin::{Quaternion, C64};

#[derive(Parser, Debug)]
#[command(name = "dhg", version, about = "Discrete holomorphic geometry on tori and polygons")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Directory for report files.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    /// Seed for random instances.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Replaces the pass/fail tolerances.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct TorusArgs {
    /// First lattice basis vector.
    #[arg(long, num_args = 2, allow_negative_numbers = true, value_names = ["A", "B"])]
    pub gamma: Option<Vec<i64>>,
    /// Second lattice basis vector.
    #[arg(long, num_args = 2, allow_negative_numbers = true, value_names = ["A", "B"])]
    pub eta: Option<Vec<i64>>,
}

#[derive(Args, Debug, Clone)]
pub struct ImmersionArgs {
    /// Immersion JSON; a random immersion is drawn when absent.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub torus: TorusArgs,
    /// Draw random values in the complex line only.
    #[arg(long)]
    pub complex: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a torus and write its index tables and derived decompositions.
    Mesh {
        #[command(flatten)]
        torus: TorusArgs,
        /// Thin torus with this many vertices.
        #[arg(long, conflicts_with_all = ["gamma", "eta"])]
        thin: Option<usize>,
    },
    /// Spectral curve, ends and unit-circle samples of an immersed torus.
    Spectrum {
        #[command(flatten)]
        immersion: ImmersionArgs,
        /// Values of mu on the unit circle.
        #[arg(long, default_value_t = 16)]
        samples: usize,
    },
    /// Darboux transform from an eigen-section, optionally a Bianchi pair.
    Darboux {
        #[command(flatten)]
        immersion: ImmersionArgs,
        #[arg(long, value_parser = parse_complex, default_value = "1@0.7")]
        mu: C64,
        /// Defaults to an eigenvalue of the holonomy at `mu`.
        #[arg(long, value_parser = parse_complex)]
        lambda: Option<C64>,
        /// Which eigenvalue, by decreasing modulus, when `--lambda` is absent.
        #[arg(long, default_value_t = 0)]
        branch: usize,
        /// Also build the common transform of a second one.
        #[arg(long)]
        bianchi: bool,
        #[arg(long, value_parser = parse_complex, default_value = "1@2.9")]
        mu2: C64,
        #[arg(long, value_parser = parse_complex)]
        lambda2: Option<C64>,
        #[arg(long, default_value_t = 3)]
        branch2: usize,
    },
    /// Spectral data of a closed polygon and its flow by closed transforms.
    Polygon {
        /// Polygon JSON.
        #[arg(long, conflicts_with_all = ["regular", "random"])]
        input: Option<PathBuf>,
        /// Regular polygon on the unit circle of C.
        #[arg(long, conflicts_with = "random")]
        regular: Option<usize>,
        /// Random polygon with this many vertices.
        #[arg(long)]
        random: Option<usize>,
        #[arg(long)]
        complex: bool,
        #[arg(long, value_parser = parse_complex, default_value = "1@0.7")]
        lambda: C64,
        /// Flow steps; 0 only computes the spectral data.
        #[arg(long, default_value_t = 0)]
        steps: usize,
        /// Eigenline of the holonomy seeding each closed transform.
        #[arg(long, default_value_t = 0)]
        index: usize,
        /// Axis dropped in the OBJ output, as `a,b,c,d`.
        #[arg(long, value_parser = parse_quaternion, default_value = "0,0,0,1")]
        obj_axis: Quaternion,
    },
    /// Run the acceptance suite.
    Verify {
        /// Comma-separated criterion names; all when absent.
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<String>,
    },
}

/// `re`, `re,im` or polar `r@theta`.
fn parse_complex(s: &str) -> Result<C64, String> {
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    if let Some((r, t)) = s.split_once('@') {
        return Ok(C64::from_polar(num(r)?, num(t)?));
    }
    match s.split_once(',') {
        Some((re, im)) => Ok(C64::new(num(re)?, num(im)?)),
        None => Ok(C64::new(num(s)?, 0.0)),
    }
}

fn parse_quaternion(s: &str) -> Result<Quaternion, String> {
    let v: Vec<f64> = s.split(',').map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"))).collect::<Result<_, _>>()?;
    match v[..] {
        [a, b, c, d] if a * a + b * b + c * c + d * d > 0.0 => Ok(Quaternion::new(a, b, c, d)),
        _ => Err("expected four components, not all zero".into()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match cli.command {
        Command::Mesh { torus, thin } => commands::mesh(&cli.common, &torus, thin),
        Command::Spectrum { immersion, samples } => commands::spectrum(&cli.common, &immersion, samples),
        Command::Darboux { immersion, mu, lambda, branch, bianchi, mu2, lambda2, branch2 } => {
            let second = bianchi.then_some((mu2, lambda2, branch2));
            commands::darboux(&cli.common, &immersion, (mu, lambda, branch), second)
        }
        Command::Polygon { input, regular, random, complex, lambda, steps, index, obj_axis } => {
            let source = commands::PolygonSource::new(input, regular, random, complex);
            commands::polygon(&cli.common, &source, lambda, steps, index, obj_axis)
        }
        Command::Verify { criteria } => commands::verify(&cli.common, criteria),
    };
    match out {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("{}", failure.diagnostic());
            ExitCode::from(failure.code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_arguments() {
        assert_eq!(parse_complex("1").unwrap(), C64::new(1.0, 0.0));
        assert_eq!(parse_complex("0.5,-2").unwrap(), C64::new(0.5, -2.0));
        let z = parse_complex("2@1.5").unwrap();
        assert!((z - C64::from_polar(2.0, 1.5)).norm() < 1e-15);
        assert!(parse_complex("x").is_err());
        assert_eq!(parse_quaternion("0,0,0,1").unwrap(), Quaternion::K);
        assert!(parse_quaternion("0,0,0,0").is_err());
        assert!(parse_quaternion("1,2").is_err());
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
