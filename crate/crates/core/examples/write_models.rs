//! Writes the benchmark models as JSON files into the given directory.

use vinegof::rvine::models::{
    cvine_5d_matrix, dvine_5d_matrix, gauss_vine, rvine_5d_matrix, true_model_5d, true_model_8d,
};

fn main() -> vinegof::Result<()> {
    let dir = std::path::PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "models".into()));
    std::fs::create_dir_all(&dir)?;
    true_model_5d().write_json(dir.join("rvine5_true.json"))?;
    true_model_8d().write_json(dir.join("rvine8_true.json"))?;
    gauss_vine(rvine_5d_matrix()).write_json(dir.join("gauss5_start.json"))?;
    gauss_vine(cvine_5d_matrix()).write_json(dir.join("cvine5_gauss_start.json"))?;
    gauss_vine(dvine_5d_matrix()).write_json(dir.join("dvine5_gauss_start.json"))?;
    Ok(())
}
