//! Command-line front end. Exit status: 0 success, 1 certificate or invariant
//! failure, 2 bad input.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use isochain::cli_io::{
    export_obj, generate, parse_norm, read_chain_file, render_kv, serialize_chain_file, write_chain_file, ChainFile,
    GeneratorSpec,
};
use isochain::covering::CandidateStrategy;
use isochain::decomposition::{decompose, ConstantsChain, DecompositionConfig};
use isochain::isofill::{fill, verify, FillConfig, FillingCertificate};
use isochain::rational::{parse_rational, to_f64};
use isochain::slicing::{critical_radius, slice, GrowthFunction};
use isochain::{Error, NormedSpace, Point, Q};

fn rational(s: &str) -> Result<Q, String> {
    parse_rational(s)
}

fn point(s: &str) -> Result<Point, String> {
    Ok(Point::new(s.split(',').map(parse_rational).collect::<Result<_, _>>()?))
}

#[derive(Parser)]
#[command(name = "isochain", version, about = "Exact polyhedral chains and certified isoperimetric fillings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    RegularPolygon,
    PerturbedPolygon,
    MultiLoop,
    PolyhedralSphere,
    ThinRectangle,
    FigureEight,
    CubeSurface,
}

#[derive(clap::Args)]
struct PipelineArgs {
    /// Decomposition parameter, in (0, 1/6]
    #[arg(long, default_value = "1/6", value_parser = rational)]
    lambda: Q,
    /// Random support samples added to the covering candidates
    #[arg(long, default_value_t = 0)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Snap tolerance for non-polytope norms
    #[arg(long, default_value = "1e-12", value_parser = rational)]
    tol: Q,
}

impl PipelineArgs {
    fn config(&self) -> DecompositionConfig {
        DecompositionConfig {
            lambda: self.lambda.clone(),
            strategy: CandidateStrategy {
                extra_samples: self.samples,
                seed: self.seed,
            },
            snap_tol: to_f64(&self.tol),
            ..Default::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write a test cycle as a chain file
    Gen {
        #[arg(value_enum)]
        family: Family,
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value = "1", value_parser = rational)]
        radius: Q,
        #[arg(long, default_value = "1/5", value_parser = rational)]
        noise: Q,
        #[arg(long, default_value_t = 2)]
        count: usize,
        #[arg(long, default_value = "100", value_parser = rational)]
        spacing: Q,
        #[arg(long, default_value_t = 0)]
        level: u32,
        #[arg(long, default_value = "10", value_parser = rational)]
        aspect: Q,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Ambient dimension (default 3 for surfaces, 2 for curves)
        #[arg(long)]
        ambient: Option<usize>,
        /// euclidean | lp <p> | linf | l1 | polytope <v> ...
        #[arg(long, default_value = "euclidean")]
        norm: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Certified filling of a cycle
    Fill {
        chain: PathBuf,
        #[command(flatten)]
        pipeline: PipelineArgs,
        /// Stop once the remainder mass is below eps times the input mass
        #[arg(long, default_value = "1e-6", value_parser = rational)]
        eps: Q,
        /// Where to write the filling chain
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Where to write the certificate (also printed to stdout)
        #[arg(long)]
        cert: Option<PathBuf>,
    },
    /// One round of the decomposition into round pieces and remainder
    Decompose {
        chain: PathBuf,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Slice of a chain by the sphere of given center and radius
    Slice {
        chain: PathBuf,
        #[arg(long, value_parser = point)]
        center: Point,
        #[arg(long, value_parser = rational)]
        radius: Q,
        #[arg(long, default_value = "1e-12", value_parser = rational)]
        tol: Q,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Growth function and its right derivative at given radii
    Growth {
        chain: PathBuf,
        #[arg(long, value_parser = point)]
        center: Point,
        #[arg(long, value_parser = rational, num_args = 1.., required = true)]
        radius: Vec<Q>,
        /// Density threshold for the critical radius (default: F of the chain's dimension)
        #[arg(long, value_parser = rational)]
        density: Option<Q>,
    },
    /// Constants of the recursive chain up to dimension k
    Constants {
        #[arg(long)]
        k: usize,
        #[arg(long, default_value = "1/6", value_parser = rational)]
        lambda: Q,
        /// Cone constant of dimension k - 1, overriding the recursion
        #[arg(long, value_parser = rational)]
        c_prev: Option<Q>,
    },
    /// Recheck a filling certificate against the cycle and the filling
    Verify {
        chain: PathBuf,
        filling: PathBuf,
        cert: PathBuf,
    },
    /// Wavefront OBJ export of a 1- or 2-chain
    Export {
        chain: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
}

enum Failure {
    Input(String),
    Certificate(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_certificate_failure() {
            Failure::Certificate(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

fn load(path: &Path) -> Result<(ChainFile, NormedSpace), Failure> {
    let file = read_chain_file(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    for w in &file.warnings {
        eprintln!("warning: {}: {w}", path.display());
    }
    let space = NormedSpace::new(file.norm.clone())?;
    Ok((file, space))
}

fn emit(text: &str, path: Option<&Path>) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Gen {
            family,
            n,
            radius,
            noise,
            count,
            spacing,
            level,
            aspect,
            seed,
            ambient,
            norm,
            output,
        } => {
            let spec = match family {
                Family::RegularPolygon => GeneratorSpec::RegularPolygon { n, radius },
                Family::PerturbedPolygon => GeneratorSpec::PerturbedPolygon { n, radius, noise },
                Family::MultiLoop => GeneratorSpec::MultiLoop { count, spacing },
                Family::PolyhedralSphere => GeneratorSpec::PolyhedralSphere { level },
                Family::ThinRectangle => GeneratorSpec::ThinRectangle { aspect },
                Family::FigureEight => GeneratorSpec::FigureEight,
                Family::CubeSurface => GeneratorSpec::CubeSurface,
            };
            let surface = matches!(family, Family::PolyhedralSphere | Family::CubeSurface);
            let ambient = ambient.unwrap_or(if surface { 3 } else { 2 });
            let norm = parse_norm(&norm, ambient).map_err(|e| Failure::Input(format!("--norm: {e}")))?;
            let chain = generate(&spec, &norm, seed)?;
            let file = ChainFile::new(norm, chain)?;
            emit(&serialize_chain_file(&file), output.as_deref())
        }
        Command::Fill {
            chain,
            pipeline,
            eps,
            output,
            cert,
        } => {
            let (file, space) = load(&chain)?;
            let config = FillConfig {
                eps_stop: to_f64(&eps),
                decomposition: pipeline.config(),
                ..Default::default()
            };
            let (s, certificate) = fill(&file.chain, &space, &config)?;
            if let Some(p) = output {
                write_chain_file(&ChainFile::new(file.norm.clone(), s)?, &p)?;
            }
            let text = certificate.to_kv();
            if let Some(p) = cert {
                emit(&text, Some(&p))?;
            }
            emit(&text, None)
        }
        Command::Decompose { chain, pipeline } => {
            let (file, space) = load(&chain)?;
            let consts = ConstantsChain::recursive(file.chain.dim(), pipeline.lambda.clone())?;
            let d = decompose(&file.chain, &consts, &space, &pipeline.config())?;
            emit(&render_kv(&d.to_kv()), None)
        }
        Command::Slice {
            chain,
            center,
            radius,
            tol,
            output,
        } => {
            let (file, space) = load(&chain)?;
            let mode = isochain::ClipMode::for_space(&space, to_f64(&tol));
            let res = slice(&file.chain, &center, &radius, mode, &space)?;
            if let Some(p) = output {
                write_chain_file(&ChainFile::new(file.norm.clone(), res.slice.clone())?, &p)?;
            }
            let pairs = vec![
                ("radius".to_string(), res.radius.to_string()),
                ("radius_tol".into(), format!("{:e}", res.radius_tol)),
                ("perturbed".into(), res.perturbed.to_string()),
                ("simplices".into(), res.slice.len().to_string()),
                ("mass".into(), format!("{:.17e}", res.slice.mass(&space)?)),
                ("cycle".into(), res.slice.is_cycle().to_string()),
            ];
            emit(&render_kv(&pairs), None)
        }
        Command::Growth {
            chain,
            center,
            radius,
            density,
        } => {
            let (file, space) = load(&chain)?;
            let k = file.chain.dim();
            let g = GrowthFunction::new(&file.chain, &center, &space)?;
            let f = match density {
                Some(f) => to_f64(&f),
                None => ConstantsChain::recursive(k, Q::new(1.into(), 6.into()))?.f,
            };
            let mut pairs = vec![
                ("total_mass".to_string(), format!("{:.17e}", g.total_mass())),
                ("density".into(), format!("{f:.17e}")),
                ("r0".into(), format!("{:.17e}", critical_radius(&g, f, k))),
            ];
            for (i, r) in radius.iter().enumerate() {
                let rf = to_f64(r);
                pairs.push((format!("r.{i}"), r.to_string()));
                pairs.push((format!("beta.{i}"), format!("{:.17e}", g.value(rf))));
                pairs.push((format!("beta_prime.{i}"), format!("{:.17e}", g.right_derivative(rf) + 0.0)));
            }
            emit(&render_kv(&pairs), None)
        }
        Command::Constants { k, lambda, c_prev } => {
            let consts = match c_prev {
                Some(c) => ConstantsChain::new(k, Some(to_f64(&c)), lambda)?,
                None => ConstantsChain::recursive(k, lambda)?,
            };
            emit(&consts.to_string(), None)
        }
        Command::Verify { chain, filling, cert } => {
            let (t, space) = load(&chain)?;
            let (s, _) = load(&filling)?;
            if s.norm != t.norm {
                return Err(Failure::Input("cycle and filling files declare different norms".into()));
            }
            let text = std::fs::read_to_string(&cert).map_err(|e| Failure::Input(format!("{}: {e}", cert.display())))?;
            let certificate = FillingCertificate::parse_kv(&text)?;
            let report = verify(&t.chain, &s.chain, &certificate, &space)?;
            emit(&report.to_kv(), None)?;
            if report.all_pass() {
                Ok(())
            } else {
                Err(Failure::Certificate(report.failures().join("; ")))
            }
        }
        Command::Export { chain, output } => {
            let (file, _) = load(&chain)?;
            export_obj(&file.chain, &output)?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Certificate(m)) => {
            eprintln!("certificate failure: {m}");
            ExitCode::from(1)
        }
    }
}
