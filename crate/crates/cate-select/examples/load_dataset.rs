//! Loading benchmark-style CSV files with an explicit column schema, plus
//! a per-iteration manifest.
//!
//! ```bash
//! cargo run --example load_dataset
//! ```

use cate_select::data::{load_csv_dataset, load_manifest, CsvSchema};
use std::io::Write;

fn main() -> cate_select::Result<()> {
    let dir = std::env::temp_dir().join("cate-select-example-data");
    std::fs::create_dir_all(&dir).unwrap();

    // an IHDP-style file: t, yf, ycf, mu0, mu1, x1..x3
    let path = dir.join("realisation_0.csv");
    let mut f = std::fs::File::create(&path).unwrap();
    writeln!(f, "t,yf,ycf,mu0,mu1,x1,x2,x3").unwrap();
    for i in 0..12 {
        let t = i % 2;
        let mu0 = i as f64 * 0.1;
        let mu1 = mu0 + 4.0;
        let (yf, ycf) = if t == 1 { (mu1, mu0) } else { (mu0, mu1) };
        writeln!(f, "{t},{yf},{ycf},{mu0},{mu1},{},{},{}", i, i * 2, i * 3).unwrap();
    }

    // the default schema is exactly this layout
    let ds = load_csv_dataset(&path, &CsvSchema::default())?;
    println!("loaded {} rows, {} covariates", ds.n(), ds.dim());
    println!("treated: {}, control: {}", ds.treated_indices().len(), ds.control_indices().len());
    println!("true effects present: {}", ds.tau_true().is_some());
    println!("first true effect: {}", ds.tau_true().unwrap()[0]);

    // schemas bind roles explicitly, so nonstandard layouts just work
    let odd = dir.join("odd_layout.csv");
    let mut f = std::fs::File::create(&odd).unwrap();
    writeln!(f, "outcome,treat,f1,f2").unwrap();
    writeln!(f, "1.0,0,0.5,0.2").unwrap();
    writeln!(f, "2.0,1,0.1,0.9").unwrap();
    writeln!(f, "0.5,0,0.6,0.4").unwrap();
    let schema = CsvSchema {
        t: "treat".into(),
        yf: "outcome".into(),
        ycf: None,
        mu0: None,
        mu1: None,
        exp_flag: None,
        x_columns: Some(vec!["f1".into(), "f2".into()]),
        ..CsvSchema::default()
    };
    let odd_ds = load_csv_dataset(&odd, &schema)?;
    println!("odd layout: {} rows, {} covariates", odd_ds.n(), odd_ds.dim());

    // manifests list one file per iteration (benchmark realisations)
    let second = dir.join("realisation_1.csv");
    std::fs::copy(&path, &second).unwrap();
    let manifest = dir.join("manifest.toml");
    std::fs::write(
        &manifest,
        "version = 1\nfiles = [\"realisation_0.csv\", \"realisation_1.csv\"]\n",
    )
    .unwrap();
    let source = load_manifest(&manifest)?;
    println!("manifest provides {} iteration datasets", source.n_datasets());
    Ok(())
}
