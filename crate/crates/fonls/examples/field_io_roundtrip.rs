//! Bit-exact field persistence: save a waveform snapshot, load it back,
//! verify nothing moved.

use fonls::fieldio::{load_field, save_field};
use fonls::multiplier::{propagate, Epsilon};
use fonls::{Field, Grid};
use num_complex::Complex64;

fn main() {
    let grid = Grid::new(&[64, 64], &[16.0, 16.0]).unwrap();
    let u0 = Field::from_fn(grid.clone(), |x| {
        Complex64::new((-(x[0] * x[0] + x[1] * x[1]) / 4.0).exp(), 0.0)
    });
    let u = propagate(&u0, 0.3, Epsilon::Plus).unwrap();

    let dir = std::env::temp_dir().join("fonls-io-example");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("snapshot.field");
    save_field(&u, &path).unwrap();
    let back = load_field(&path).unwrap();

    let exact = u
        .samples()
        .iter()
        .zip(back.samples())
        .all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits());
    println!(
        "wrote {} samples to {}, round trip bit-exact: {exact}",
        u.samples().len(),
        path.display()
    );
    let size = std::fs::metadata(&path).unwrap().len();
    println!("file size {size} bytes, sidecar {}", path.with_extension("field.json").exists());
}
