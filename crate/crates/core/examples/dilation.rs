//! Writes a measure-and-prepare channel as Φ(X) = Ψ_*(U X U*), with U an
//! isometry and Ψ a positive map whose outputs all commute.
//!
//! cargo run --example dilation

use sebkit::dilation::{build_dilation, verify_dilation};
use sebkit::random::{ginibre, random_holevo, rng};
use sebkit::Tolerances;

fn main() -> sebkit::Result<()> {
    let tol = Tolerances::default();
    let mut r = rng(11);
    let h = random_holevo(&mut r, 3, 2, 4)?;
    let dil = build_dilation(&h, &tol)?;
    println!(
        "C^3 -> C^2 with {} terms: isometry {}x{}, |U*U - I| = {:.2e}",
        dil.block_count,
        dil.isometry.rows(),
        dil.isometry.cols(),
        dil.isometry_residual()
    );

    let x = ginibre(&mut r, 3, 3);
    let via = dil.predual_apply(&dil.embed(&x)?)?;
    println!(
        "|Psi_*(U X U*) - Phi(X)| = {:.2e}",
        (&via - &h.apply(&x)?).frobenius_norm()
    );

    let a = dil.psi_apply(&ginibre(&mut r, 2, 2))?;
    let b = dil.psi_apply(&ginibre(&mut r, 2, 2))?;
    println!(
        "|[Psi(A), Psi(B)]| = {:.2e}",
        a.commutator(&b).frobenius_norm()
    );

    let rep = verify_dilation(&dil, &h, &tol)?;
    println!("verification ok: {}", rep.ok);
    Ok(())
}
