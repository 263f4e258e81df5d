//! `sparsec`: run kernels, convert formats, print compiler structures,
//! sweep encodings and time desk-scale kernels.

mod bench;
mod inputs;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use sparsec_core::codegen::{compile_all, emit_program};
use sparsec_core::exec::{bind_inputs, convert, run_kernel, Tensor};
use sparsec_core::expr::parse_encoding;
use sparsec_core::io::{read_tensor, write_tensor, SourceSpec};
use sparsec_core::lattice::{build_iteration_graph, lattice_text};
use sparsec_core::oracle::density;
use sparsec_core::search::search;
use sparsec_core::{parse_kernel, Kernel, TensorType};

#[derive(Parser)]
#[command(name = "sparsec", version, about = "Sparse tensor algebra compiler")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile and run a kernel.
    Run {
        #[arg(long)]
        kernel_file: PathBuf,
        /// `NAME=PATH` or `NAME=gen:uniform:RHO|gen:rowband:ROWS|gen:identity`.
        #[arg(long = "input", value_name = "NAME=PATH|GEN")]
        inputs: Vec<String>,
        /// Where to write the result as extended FROSTT.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Also print the IR, lattices or iteration graph.
        #[arg(long)]
        emit: Option<Emit>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Change the storage format of a tensor file.
    Convert {
        #[arg(long)]
        input: PathBuf,
        /// Source encoding: a preset (csr, csc, dcsr, dcsc, cdr, dense) or clauses.
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long)]
        output: PathBuf,
    },
    /// Print the IR, merge lattices or iteration graph of a kernel.
    Emit {
        what: Emit,
        #[arg(long)]
        kernel_file: PathBuf,
    },
    /// Run a kernel under every encoding of one operand and compare results.
    Search {
        #[arg(long)]
        kernel_file: PathBuf,
        #[arg(long = "input", value_name = "NAME=PATH|GEN")]
        inputs: Vec<String>,
        /// Operand to sweep; defaults to the first input with an encoding.
        #[arg(long)]
        operand: Option<String>,
        #[arg(long, value_enum, default_value_t = Encodings::All)]
        encodings: Encodings,
        /// Where to write the CSV report instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Time a kernel suite on generated inputs.
    Bench {
        #[arg(long, value_enum)]
        suite: bench::Suite,
        #[arg(long)]
        scale: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Emit {
    Ir,
    Lattice,
    Graph,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Encodings {
    /// Every level type, ordering and bit width pair.
    All,
    /// Native bit widths only.
    Nowidths,
}

fn load_kernel(path: &Path) -> Result<Kernel> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(parse_kernel(&text)?)
}

fn emit(k: &Kernel, what: Emit) -> Result<String> {
    Ok(match what {
        Emit::Ir => compile_all(k)?
            .iter()
            .map(emit_program)
            .collect::<Vec<_>>()
            .join("\n"),
        Emit::Lattice => lattice_text(k)?,
        Emit::Graph => build_iteration_graph(k).to_string(),
    })
}

fn encoding_type(text: &str, shape: &[usize]) -> Result<TensorType> {
    let enc = parse_encoding(text)?;
    if let Some(e) = &enc {
        if e.rank() != shape.len() {
            bail!(
                "encoding `{text}` has rank {}, the tensor has rank {}",
                e.rank(),
                shape.len()
            );
        }
    }
    Ok(TensorType::new(shape.to_vec(), enc)?)
}

fn cmd_run(
    kernel_file: &Path,
    specs: &[String],
    output: Option<&Path>,
    show: Option<Emit>,
    seed: u64,
) -> Result<()> {
    let k = load_kernel(kernel_file)?;
    if let Some(what) = show {
        println!("{}", emit(&k, what)?.trim_end());
    }
    let coo = inputs::load(&k, specs, seed)?;
    let bound = bind_inputs(&k, &coo)?;
    let start = Instant::now();
    let out = run_kernel(&k, &bound)?;
    let elapsed = start.elapsed();
    let result = out.to_coo();
    println!("nnz: {}", out.nnz());
    println!("density: {:.6}", density(&result.without_zeros()));
    println!("time_ms: {:.3}", elapsed.as_secs_f64() * 1e3);
    if let Some(path) = output {
        write_tensor(&result, path).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn cmd_convert(input: &Path, from: &str, to: &str, output: &Path) -> Result<()> {
    let coo = read_tensor(&SourceSpec::new(input))
        .with_context(|| format!("reading {}", input.display()))?;
    let from = encoding_type(from, coo.shape())?;
    let to = encoding_type(to, coo.shape())?;
    let t = Tensor::from_coo(&coo, &from)?;
    let converted = convert(&t, &to)?;
    if let Tensor::Sparse(s) = &converted {
        for l in 0..s.rank() {
            println!("level {l}: {} positions", s.level_size(l));
        }
    }
    println!("nnz: {}", converted.nnz());
    write_tensor(&converted.to_coo(), output)
        .with_context(|| format!("writing {}", output.display()))?;
    Ok(())
}

fn cmd_search(
    kernel_file: &Path,
    specs: &[String],
    operand: Option<&str>,
    encodings: Encodings,
    output: Option<&Path>,
    seed: u64,
) -> Result<()> {
    let k = load_kernel(kernel_file)?;
    let operand = match operand {
        Some(o) => o.to_string(),
        None => k
            .input_names()
            .into_iter()
            .find(|n| k.tensor(n).map(|t| t.is_sparse()).unwrap_or(false))
            .context("no input has an encoding; pass --operand")?,
    };
    let coo = inputs::load(&k, specs, seed)?;
    let report = search(&k, &operand, &coo, encodings == Encodings::All)?;
    let csv = report.to_csv();
    match output {
        Some(path) => {
            fs::write(path, &csv).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{csv}"),
    }
    report.verify()?;
    eprintln!(
        "{} encodings, {} agree",
        report.rows.len(),
        report.checksums().len()
    );
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            kernel_file,
            inputs,
            output,
            emit,
            seed,
        } => cmd_run(&kernel_file, &inputs, output.as_deref(), emit, seed),
        Command::Convert {
            input,
            from,
            to,
            output,
        } => cmd_convert(&input, &from, &to, &output),
        Command::Emit { what, kernel_file } => {
            let k = load_kernel(&kernel_file)?;
            print!("{}", emit(&k, what)?);
            Ok(())
        }
        Command::Search {
            kernel_file,
            inputs,
            operand,
            encodings,
            output,
            seed,
        } => cmd_search(
            &kernel_file,
            &inputs,
            operand.as_deref(),
            encodings,
            output.as_deref(),
            seed,
        ),
        Command::Bench { suite, scale, seed } => bench::run(suite, scale, seed),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            let first = first.strip_prefix("error: ").unwrap_or(first);
            eprintln!("error: {first}");
            return ExitCode::from(2);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
