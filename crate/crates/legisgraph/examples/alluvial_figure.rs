//! Alluvial figure data and SVG from the mini corpus pipeline outputs.
//!
//! ```bash
//! cargo run --example alluvial_figure
//! ```

use std::path::Path;

use legisgraph::pipeline::{run_stage, PipelineConfig, Stage};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mini = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/mini");
    let mut config = PipelineConfig::load(&mini.join("config.toml"))?;
    let out = std::env::temp_dir().join("legisgraph-alluvial");
    config.output_dir = out.to_str().unwrap().to_string();

    run_stage(&config, &mini, Stage::Export)?;
    let data: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("export/alluvial.json"))?)?;
    for year in data["years"].as_array().unwrap() {
        let blocks = year["blocks"].as_array().unwrap();
        let widths: Vec<String> = blocks
            .iter()
            .map(|b| {
                format!(
                    "{}:{}",
                    b["cluster"]
                        .as_u64()
                        .map(|c| c.to_string())
                        .unwrap_or_else(|| "misc".into()),
                    b["tokens"]
                )
            })
            .collect();
        println!(
            "{} total {:>4} tokens | {}",
            year["snapshot_id"].as_str().unwrap(),
            year["total_tokens"],
            widths.join("  ")
        );
    }
    println!(
        "{} splines; SVG at {}",
        data["splines"].as_array().unwrap().len(),
        out.join("export/alluvial.svg").display()
    );
    Ok(())
}
