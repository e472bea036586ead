use std::path::PathBuf;

use anyhow::{Context as _, Result};
use holocgh_core::io::config::RunConfig;
use holocgh_core::run::{run_optimization, save_results};

use crate::common::Context;

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Run configuration (TOML).
    config: PathBuf,
    /// Override the iteration count.
    #[arg(long)]
    iterations: Option<usize>,
}

pub fn run(ctx: &Context, args: Args) -> Result<()> {
    let mut cfg = RunConfig::load(&args.config).with_context(|| format!("loading {}", args.config.display()))?;
    if let Some(n) = args.iterations {
        cfg.optimizer.iterations = n;
        cfg.validate()?;
    }
    if let Some(s) = ctx.seed {
        cfg.optimizer.seed = s;
    }
    let out = ctx.out_dir(Some(&cfg.output.dir));
    let results = run_optimization(&cfg, None)?;
    for (c, r) in results.iter().enumerate() {
        println!(
            "channel {c}: loss {:.6e} -> {:.6e} (ratio {:.3}), scale {:.4}",
            r.initial_loss,
            r.final_loss,
            r.final_loss / r.initial_loss.max(f64::MIN_POSITIVE),
            r.scale
        );
    }
    let saved = save_results(&out, &cfg.optics, &results)?;
    let mut m = ctx.manifest();
    m.seed = Some(cfg.optimizer.seed);
    m.config = Some(cfg);
    m.outputs = vec![saved.hologram.clone(), saved.trace, saved.reconstruction];
    let path = m.write(&out)?;
    println!("wrote {} and {}", saved.hologram.display(), path.display());
    Ok(())
}
