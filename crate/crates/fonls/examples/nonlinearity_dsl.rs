//! The polynomial-nonlinearity DSL: parsing, canonical form, and dealiased
//! evaluation.

use fonls::{Field, Grid, PolynomialNonlinearity};
use num_complex::Complex64;

fn main() {
    // same polynomial, three spellings; the parser canonicalizes
    for src in [
        "|lap(u)|^2",
        "conj(lap(u))*lap(u)",
        "lap(u)*conj(lap(u))+0*u*u",
    ] {
        let p = PolynomialNonlinearity::parse(src).unwrap();
        println!("{src:32} -> {p}");
    }

    let p = PolynomialNonlinearity::parse("2*d(1)u*d(1)u - (0,1)*u*conj(u)*u").unwrap();
    println!("degrees {}..{}", p.degree_min(), p.degree_max());
    println!("ast: {}", p.ast_json());

    // a clean quadratic identity: for u = e^{i k x}, d(1)u * d(1)u has the
    // single mode 2k with coefficient -k^2
    let grid = Grid::new(&[64], &[std::f64::consts::PI]).unwrap();
    let k = 3.0;
    let u = Field::from_fn(grid.clone(), |x| Complex64::from_polar(1.0, k * x[0]));
    let q = PolynomialNonlinearity::parse("d(1)u*d(1)u").unwrap();
    let out = q.evaluate(&u).unwrap();
    let spec = out.spectrum();
    let idx = 6; // mode 2k on this grid
    println!(
        "d(1)u*d(1)u on e^(3ix): coefficient at mode 6 = {:.3} (expect -9), rest = {:.2e}",
        spec[idx].re,
        spec.iter()
            .enumerate()
            .filter(|(i, _)| *i != idx)
            .map(|(_, z)| z.norm())
            .sum::<f64>()
    );

    // parse errors carry the byte position
    let err = PolynomialNonlinearity::parse("u*frob(u)").unwrap_err();
    println!("bad input: {err}");
}
