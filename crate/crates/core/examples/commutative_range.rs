//! Certified measure-and-prepare decomposition of a channel whose outputs commute.
//!
//! cargo run --example commutative_range

use sebkit::channel::identity_channel;
use sebkit::random::{random_commutative_holevo, rng};
use sebkit::seb::{decompose_seb, range_commutativity_test, verify_separable_decomposition};
use sebkit::{Channel, Tolerances};

fn main() -> sebkit::Result<()> {
    let tol = Tolerances::default();
    let mut r = rng(7);
    let ch = Channel::Holevo(random_commutative_holevo(&mut r, 4, 6)?);

    let rep = range_commutativity_test(&ch, &tol);
    println!(
        "range commutes: {} (worst relative commutator {:.2e})",
        rep.commutes, rep.worst_residual
    );

    let weights = [0.4, 0.3, 0.2, 0.1];
    let dec = decompose_seb(&ch, Some(&weights), 7, &tol)?;
    println!(
        "{} terms kept, dropped mass {:.1e}",
        dec.terms.len(),
        dec.dropped_mass
    );
    for t in &dec.terms {
        println!("  k = {}  p_k = {:.6}", t.index, t.probability);
    }

    let check = verify_separable_decomposition(&dec, &ch, &tol)?;
    println!(
        "sigma residual {:.2e}, reconstruction {:.2e}, POVM {:.2e}, ok {}",
        check.sigma_residual, check.reconstruction_residual, check.povm_residual, check.ok
    );

    let witness = range_commutativity_test(&Channel::Kraus(identity_channel(3)), &tol);
    println!(
        "identity channel on C^3: commutes {}, witness {:?}, commutator norm {:.3}",
        witness.commutes, witness.worst_pair, witness.worst_commutator_norm
    );
    Ok(())
}
