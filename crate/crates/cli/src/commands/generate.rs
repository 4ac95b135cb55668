use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use serde_json::json;

use sdot::RandomSeed;

use crate::error::{CliError, CliResult, ErrorKind};
use crate::formats::{Input, ResultFile};
use crate::manifest::{emit, RunManifest};

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    /// Result file written by `solve`
    pub result: String,
    /// Number of samples
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

/// CSV with header `index,x,y`: the target index `T(z)` and its decoded point.
pub fn samples_csv(indices: &[usize], points: &[sdot::Point64]) -> String {
    let mut s = String::from("index,x,y\n");
    for (i, p) in indices.iter().zip(points) {
        writeln!(s, "{i},{},{}", p.x, p.y).expect("writing to a string");
    }
    s
}

pub fn run_generate(args: &GenerateArgs) -> CliResult<String> {
    let started = Instant::now();
    let input = Input::read(&args.result)?;
    let result = ResultFile::load(&input)?;
    if !result.converged() {
        return Err(CliError::new(
            ErrorKind::NotConverged,
            "the result did not converge; its map does not preserve the target masses",
        )
        .in_file(&input.label));
    }
    let model = result.generative()?;
    let seed = RandomSeed(args.seed);
    let indices = model.generate_indices(args.n, seed);
    let table = model
        .embedding
        .decoder_table()
        .unwrap_or(model.embedding.latent_points());
    let points: Vec<_> = indices.iter().map(|&i| table[i]).collect();

    let mut manifest = RunManifest::new("generate");
    manifest.seed = Some(args.seed);
    manifest.param("n", args.n).param("out", &args.out).input("result", &input);
    manifest.wall_time_seconds = started.elapsed().as_secs_f64();
    emit(&args.out, samples_csv(&indices, &points).as_bytes(), &manifest)?;
    Ok(json!({ "samples": args.n, "seed": args.seed }).to_string())
}
