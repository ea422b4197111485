//! Operator persistence: a binary container for density operators and a CSV
//! dump of their spectra.
//!
//! Container layout (little-endian throughout):
//!   bytes 0..4   magic "QCOP"
//!   u32          format version (1)
//!   u32          body count
//!   u64          grid size n
//!   f64, f64     box bounds x_min, x_max
//!   dim^2 pairs  (re, im) of the stored matrix, row-major
//!
//! Round-trips are bit-exact: the payload is the raw IEEE-754 image of the
//! stored matrix.

use super::{DensityOperator, SpaceGrid};
use crate::error::{QcError, Result};
use ndarray::Array2;
use num_complex::Complex64;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"QCOP";
const VERSION: u32 = 1;

/// Write a density operator to the binary container format.
pub fn save_operator(op: &DensityOperator, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(op.n_body as u32).to_le_bytes())?;
    w.write_all(&(op.grid.n as u64).to_le_bytes())?;
    w.write_all(&op.grid.x_min.to_le_bytes())?;
    w.write_all(&op.grid.x_max.to_le_bytes())?;
    for c in op.mat.iter() {
        w.write_all(&c.re.to_le_bytes())?;
        w.write_all(&c.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn read_exact<const K: usize>(r: &mut impl Read) -> Result<[u8; K]> {
    let mut buf = [0u8; K];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

/// Read a density operator from the binary container format.
pub fn load_operator(path: &Path) -> Result<DensityOperator> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    let magic = read_exact::<4>(&mut r)?;
    if &magic != MAGIC {
        return Err(QcError::InvalidConfig(format!(
            "{} is not an operator container (bad magic)",
            path.display()
        )));
    }
    let version = u32::from_le_bytes(read_exact::<4>(&mut r)?);
    if version != VERSION {
        return Err(QcError::InvalidConfig(format!(
            "unsupported operator container version {version}"
        )));
    }
    let n_body = u32::from_le_bytes(read_exact::<4>(&mut r)?) as usize;
    let n = u64::from_le_bytes(read_exact::<8>(&mut r)?) as usize;
    let x_min = f64::from_le_bytes(read_exact::<8>(&mut r)?);
    let x_max = f64::from_le_bytes(read_exact::<8>(&mut r)?);
    let grid = SpaceGrid::new(x_min, x_max, n)?;
    let dim = n
        .checked_pow(n_body as u32)
        .filter(|d| *d <= 4096)
        .ok_or_else(|| {
            QcError::MemoryBudget(format!("container dimension {n}^{n_body} exceeds the 4096 limit"))
        })?;
    let mut mat = Array2::zeros((dim, dim));
    for i in 0..dim {
        for j in 0..dim {
            let re = f64::from_le_bytes(read_exact::<8>(&mut r)?);
            let im = f64::from_le_bytes(read_exact::<8>(&mut r)?);
            mat[[i, j]] = Complex64::new(re, im);
        }
    }
    Ok(DensityOperator { grid, n_body, mat })
}

/// Dump the ascending spectrum to CSV with header `index,eigenvalue`.
pub fn write_eigenvalue_csv(op: &DensityOperator, path: &Path) -> Result<()> {
    let eigs = op.eigenvalues()?;
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "index,eigenvalue")?;
    for (i, e) in eigs.iter().enumerate() {
        writeln!(w, "{i},{e:.17e}")?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::coherent::coherent_state;
    use approx::assert_abs_diff_eq;

    #[test]
    fn container_round_trip_is_bit_exact() {
        let dir = std::env::temp_dir().join("qclab_storage_test");
        std::fs::create_dir_all(&dir).unwrap();
        let grid = SpaceGrid::new(-6.0, 6.0, 32).unwrap();
        let a = coherent_state(&grid, 0.5, 0.4, 0.3).unwrap();
        let b = coherent_state(&grid, 0.5, -0.6, -0.1).unwrap();
        let op = DensityOperator::mixture(&[(0.45, a), (0.55, b)]).unwrap();
        let path = dir.join("mix.qcop");
        save_operator(&op, &path).unwrap();
        let back = load_operator(&path).unwrap();
        assert_eq!(back.n_body, 1);
        assert_eq!(back.grid, op.grid);
        for (x, y) in op.mat.iter().zip(back.mat.iter()) {
            assert_eq!(x.re.to_bits(), y.re.to_bits());
            assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn bad_magic_is_rejected() {
        let dir = std::env::temp_dir().join("qclab_storage_bad");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("junk.qcop");
        std::fs::write(&path, b"NOPEnope").unwrap();
        assert!(load_operator(&path).is_err());
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn eigenvalue_csv_sums_to_the_trace() {
        let dir = std::env::temp_dir().join("qclab_storage_eigs");
        std::fs::create_dir_all(&dir).unwrap();
        let grid = SpaceGrid::new(-6.0, 6.0, 32).unwrap();
        let a = coherent_state(&grid, 0.5, 0.4, 0.3).unwrap();
        let b = coherent_state(&grid, 0.5, -0.6, -0.1).unwrap();
        let op = DensityOperator::mixture(&[(0.45, a), (0.55, b)]).unwrap();
        let path = dir.join("eigs.csv");
        write_eigenvalue_csv(&op, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("index,eigenvalue"));
        let total: f64 = lines
            .map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap())
            .sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-10);
        std::fs::remove_dir_all(&dir).ok();
    }
}
