//! Run the complete pipeline on the bundled mini corpus.
//!
//! ```bash
//! cargo run --example full_pipeline
//! ```

use std::path::Path;

use legisgraph::pipeline::{run_pipeline, PipelineConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mini = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/mini");
    let mut config = PipelineConfig::load(&mini.join("config.toml"))?;
    let out = std::env::temp_dir().join("legisgraph-pipeline");
    config.output_dir = out.to_str().unwrap().to_string();

    let files = run_pipeline(&config, &mini)?;
    println!("pipeline wrote {} files:", files.len());
    for f in &files {
        println!("  {}", f.strip_prefix(&out).unwrap_or(f).display());
    }
    println!("\nbundle root: {}", out.display());
    Ok(())
}
