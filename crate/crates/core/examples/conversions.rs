//! Moving a channel between Kraus, measure-and-prepare and weighted Choi form.
//!
//! cargo run --example conversions

use sebkit::channel::{
    holevo_to_kraus, kraus_to_holevo, transpose_map, verify_cptp, weighted_choi,
};
use sebkit::random::{random_holevo, rng};
use sebkit::{Channel, Error, Tolerances};

fn main() -> sebkit::Result<()> {
    let tol = Tolerances::default();
    let mut r = rng(2024);

    let holevo = random_holevo(&mut r, 3, 2, 4)?;
    let source = Channel::Holevo(holevo.clone());
    println!(
        "measure-and-prepare channel C^3 -> C^2 with {} terms",
        holevo.pairs().len()
    );

    let kraus = holevo_to_kraus(&holevo, &tol)?;
    println!("  -> {} rank-one Kraus operators", kraus.operators().len());

    let back = kraus_to_holevo(&kraus, &tol)?;
    let gap = (&source.superoperator() - &Channel::Holevo(back).superoperator()).frobenius_norm();
    println!("  -> back to measure-and-prepare, superoperator gap {gap:.2e}");

    let choi = weighted_choi(&source, &[0.5, 0.3, 0.2])?;
    println!(
        "  weighted Choi state: trace {:.6}",
        choi.sigma().trace().re
    );
    let rep = verify_cptp(&Channel::Choi(choi), &tol);
    println!(
        "  CPTP check: tp {:.2e}, lambda_min {:.2e}, ok {}",
        rep.tp_residual, rep.cp_lambda_min, rep.ok
    );

    // The identity channel has a rank-2 Kraus operator, so it is not entanglement breaking.
    match kraus_to_holevo(&sebkit::channel::identity_channel(2), &tol) {
        Err(Error::NotRankOne { index, ratio }) => {
            println!("identity channel: operator {index} is not rank one (ratio {ratio:.2})")
        }
        other => println!("identity channel: unexpected {other:?}"),
    }

    // Transpose is positive but not completely positive.
    let rep = verify_cptp(&Channel::Choi(transpose_map(2)), &tol);
    println!(
        "transpose map: Choi lambda_min {:.3}, ok {}",
        rep.cp_lambda_min, rep.ok
    );
    Ok(())
}
