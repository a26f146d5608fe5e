//! Writes the open Ulam matrix of each fiber of the Cantor system in
//! coordinate form, to stdout or to the directory given as an argument.

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use openrds::cocycle::{build_beta_system, DrivingSystem};
use openrds::operator::{ulam_matrix, Grid, Openness};
use openrds::IntervalSet;

fn main() -> openrds::Result<()> {
    let sys = build_beta_system(
        &[3.0],
        &[IntervalSet::from_pairs(&[[1.0 / 3.0, 2.0 / 3.0]])],
        1.0,
        DrivingSystem::constant(),
        false,
    )?;
    let grid = std::sync::Arc::new(Grid::for_system(&sys, 9)?);
    let m = ulam_matrix(&sys, 0, &grid, Openness::Open)?;
    println!("{} cells, {} nonzeros", m.dim(), m.nnz());
    match std::env::args().nth(1).map(PathBuf::from) {
        Some(dir) => {
            std::fs::create_dir_all(&dir)?;
            let path = dir.join("ulam_open_0.coo");
            m.write_coo(BufWriter::new(File::create(&path)?))?;
            println!("wrote {}", path.display());
        }
        None => m.write_coo(std::io::stdout().lock())?,
    }
    Ok(())
}
