//! Builds a measure-and-prepare channel that annihilates exactly a given
//! self-adjoint subspace of trace-zero operators.
//!
//! cargo run --example nullspace_synthesis

use sebkit::nullspace::{synthesize_channel, verify_nullspace, SubspaceSpec};
use sebkit::{ComplexMatrix, Tolerances};

fn main() -> sebkit::Result<()> {
    let tol = Tolerances::default();

    // span{σ_z} on C^2
    let sz = ComplexMatrix::diag_real(&[1.0, -1.0]);
    let spec = SubspaceSpec::new(2, vec![sz.clone()], &tol)?;
    let out = synthesize_channel(&spec, &tol)?;
    println!(
        "span{{sigma_z}}: channel C^2 -> C^{}",
        out.channel.dim_out()
    );
    println!("  lambda_min(F_1) = {:.6}", out.lambda_min_f1);
    println!(
        "  |Phi(sigma_z)| = {:.2e}",
        out.channel.apply(&sz)?.frobenius_norm()
    );
    let rep = verify_nullspace(&out, &spec, &tol)?;
    println!(
        "  rank {} of expected {}, ok {}",
        rep.rank_of_effect_map, rep.expected_rank, rep.ok
    );

    // Off-diagonal units of C^3: span{e_ij : i != j} is self-adjoint even
    // though no single generator is Hermitian.
    let mut gens = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                gens.push(ComplexMatrix::unit(3, i, j));
            }
        }
    }
    let spec = SubspaceSpec::new(3, gens, &tol)?;
    let out = synthesize_channel(&spec, &tol)?;
    let rep = verify_nullspace(&out, &spec, &tol)?;
    println!(
        "off-diagonal subspace: dim N = {}, output dim {}, ok {}",
        spec.subspace_dim(),
        out.channel.dim_out(),
        rep.ok
    );

    // A generator with nonzero trace is rejected.
    let bad = SubspaceSpec::new(2, vec![ComplexMatrix::unit(2, 0, 0)], &tol);
    println!("e_11 as a generator: {}", bad.unwrap_err());
    Ok(())
}
