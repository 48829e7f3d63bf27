//! Geometry artifacts: saves and reloads a coefficients file, exports a 3D
//! domain as a Wavefront OBJ surface, and slices a 4D domain by the four
//! coordinate hyperplanes into OBJ surfaces of the cuts.
//!
//!     cargo run --release --example export_meshes

use steklov::harmonics::{BasisIndex, BasisTable};
use steklov::{Dimension, HarmonicCoefficients};

fn main() -> steklov::Result<()> {
    // 3D: a gently flattened ball.
    let table = BasisTable::new(Dimension::Three, 3);
    let mut a = vec![0.0; table.len()];
    a[0] = (4.0 * std::f64::consts::PI).sqrt();
    a[table.position(BasisIndex::three(2, 0)).expect("in table")] = 0.35;
    a[table.position(BasisIndex::three(3, 2)).expect("in table")] = 0.15;
    let domain3 = HarmonicCoefficients::new(Dimension::Three, 3, a)?;

    steklov::save_coefficients(&domain3, "domain3.txt".as_ref())?;
    let reloaded = steklov::load_coefficients("domain3.txt".as_ref())?;
    assert_eq!(reloaded.coefficients(), domain3.coefficients());

    steklov::io::export_mesh3d(&domain3, 64, 128, "domain3.obj".as_ref())?;
    let mesh = steklov::io::mesh3d(&domain3, 64, 128)?;
    println!(
        "domain3.obj: {} vertices, {} faces, volume {:.6} (analytic {:.6})",
        mesh.vertices.len(),
        mesh.faces.len(),
        mesh.signed_volume(),
        steklov::geometry::volume(&domain3)?
    );

    // 4D: a hyperspherical-harmonic bump, sliced by the 4 hyperplanes.
    let table4 = BasisTable::new(Dimension::Four, 2);
    let mut b = vec![0.0; table4.len()];
    b[0] = (2.0 * std::f64::consts::PI * std::f64::consts::PI).sqrt();
    b[table4.position(BasisIndex::four(2, 1, 0)).expect("in table")] = 0.4;
    let domain4 = HarmonicCoefficients::new(Dimension::Four, 2, b)?;
    let cuts = steklov::io::export_cuts4d(&domain4, 48, 96, "domain4".as_ref())?;
    for path in &cuts {
        println!("wrote {}", path.display());
    }
    Ok(())
}
