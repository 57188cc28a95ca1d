//! 16-bit PGM snapshots.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::grid::GridField;

/// `snap_t<time>.pgm`, with the time printed in shortest round-trip form.
pub fn snapshot_file_name(t: f64) -> String {
    format!("snap_t{t}.pgm")
}

/// Linear map of `[-beta, beta]` onto `[0, 65535]`, clamped.
pub fn to_gray(v: f64, beta: f64) -> u16 {
    let x = ((v + beta) / (2.0 * beta) * 65535.0).round();
    x.clamp(0.0, 65535.0) as u16
}

/// Writes a binary (P5) PGM. Image rows run from the top edge (largest y)
/// down; columns follow x.
pub fn write_pgm<W: Write>(mut out: W, phi: &GridField<f64>, beta: f64) -> std::io::Result<()> {
    let n = phi.n();
    write!(out, "P5\n{n} {n}\n65535\n")?;
    let mut bytes = Vec::with_capacity(2 * n * n);
    for j in (0..n).rev() {
        for i in 0..n {
            bytes.extend_from_slice(&to_gray(phi.get(i, j), beta).to_be_bytes());
        }
    }
    out.write_all(&bytes)
}

pub fn save_snapshot(dir: &Path, t: f64, phi: &GridField<f64>, beta: f64) -> Result<PathBuf> {
    let path = dir.join(snapshot_file_name(t));
    let file = std::io::BufWriter::new(std::fs::File::create(&path)?);
    write_pgm(file, phi, beta)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid2D;

    #[test]
    fn gray_levels() {
        assert_eq!(to_gray(-1.0, 1.0), 0);
        assert_eq!(to_gray(1.0, 1.0), 65535);
        assert_eq!(to_gray(0.0, 1.0), 32768);
        assert_eq!(to_gray(2.0, 1.0), 65535);
        assert_eq!(to_gray(-0.9575, 0.9575), 0);
    }

    #[test]
    fn pgm_layout() {
        let g = Grid2D::new(1.0, 4).unwrap();
        let phi = g.sample(|x, _| x);
        let mut buf = Vec::new();
        write_pgm(&mut buf, &phi, 1.0).unwrap();
        let header = b"P5\n4 4\n65535\n";
        assert_eq!(&buf[..header.len()], header);
        assert_eq!(buf.len(), header.len() + 32);
        // First pixel is x = -1.
        assert_eq!(&buf[header.len()..header.len() + 2], &[0, 0]);
        assert_eq!(snapshot_file_name(2.5), "snap_t2.5.pgm");
        assert_eq!(snapshot_file_name(200.0), "snap_t200.pgm");
    }
}
