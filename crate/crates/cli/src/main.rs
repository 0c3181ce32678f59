use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gett_cli::commands::{self, parse_list, CliError, RunArgs};

#[derive(Parser)]
#[command(
    name = "gett",
    version,
    about = "General tensor-times-tensor contraction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Contract A and B into a new output file (C = A * B).
    Run {
        a: PathBuf,
        b: PathBuf,
        out: PathBuf,
        /// Number of contracted index pairs.
        #[arg(long)]
        conts: usize,
        /// Contracted dimensions of A, comma separated.
        #[arg(long, default_value = "", allow_hyphen_values = true)]
        cont_a: String,
        /// Contracted dimensions of B, paired with --cont-a by position.
        #[arg(long, default_value = "", allow_hyphen_values = true)]
        cont_b: String,
        /// Output position of each free index (A's first, then B's).
        #[arg(long, default_value = "", allow_hyphen_values = true)]
        perm: String,
        /// Expected output extents; defaults to those the contraction yields.
        #[arg(long, allow_hyphen_values = true)]
        out_ext: Option<String>,
        /// Output increments; defaults to the packed layout.
        #[arg(long, allow_hyphen_values = true)]
        out_inc: Option<String>,
    },
    /// Check the kernel against the oracle on generated cases.
    Verify {
        /// A category name, or "all".
        #[arg(long, default_value = "all")]
        suite: String,
        /// Cases per category.
        #[arg(long, default_value_t = 100)]
        cases: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Write one generated case as a.tns, b.tns and spec.txt.
    Gen {
        #[arg(long)]
        category: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Time the kernel on hypercube operands.
    Bench {
        #[arg(long, default_value_t = 2)]
        rank: usize,
        #[arg(long, default_value_t = 64)]
        extent: usize,
        #[arg(long, default_value_t = 1)]
        conts: usize,
        #[arg(long, default_value_t = 5)]
        reps: usize,
    },
    /// Every category, 1000 cases each, seed 1.
    Selftest,
}

fn verify(suite: &str, cases: usize, seed: u64) -> Result<(), CliError> {
    let categories = commands::suite_categories(suite)?;
    commands::verify(&categories, cases, seed, &mut std::io::stdout().lock()).map(|_| ())
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run {
            a,
            b,
            out,
            conts,
            cont_a,
            cont_b,
            perm,
            out_ext,
            out_inc,
        } => {
            let args = RunArgs {
                a,
                b,
                conts,
                cont_a: parse_list("cont-a", &cont_a)?,
                cont_b: parse_list("cont-b", &cont_b)?,
                perm: parse_list("perm", &perm)?,
                out_ext: out_ext.map(|s| parse_list("out-ext", &s)).transpose()?,
                out_inc: out_inc.map(|s| parse_list("out-inc", &s)).transpose()?,
                out,
            };
            let c = commands::run(&args)?;
            println!(
                "wrote {} ({} elements, extents {:?})",
                args.out.display(),
                c.view.num_elements(),
                c.view.extents
            );
            Ok(())
        }
        Command::Verify { suite, cases, seed } => verify(&suite, cases, seed),
        Command::Selftest => verify("all", 1000, 1),
        Command::Gen {
            category,
            seed,
            out_dir,
        } => {
            let category = category
                .parse()
                .map_err(|e| CliError::Usage(format!("{e}")))?;
            commands::gen(category, seed, &out_dir)?;
            println!("wrote a.tns, b.tns and spec.txt to {}", out_dir.display());
            Ok(())
        }
        Command::Bench {
            rank,
            extent,
            conts,
            reps,
        } => {
            let r = commands::bench(rank, extent, conts, reps)?;
            println!("rank {rank}, extent {extent}, conts {conts}, {reps} reps");
            println!("multiply-adds per rep: {}", r.multiply_adds);
            println!("median time: {:.3?}", r.median);
            println!("multiply-adds/s: {:.3e}", r.multiply_adds_per_sec());
            println!("output elements/s: {:.3e}", r.elements_per_sec());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
