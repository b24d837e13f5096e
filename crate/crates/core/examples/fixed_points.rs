//! Fixed projections of the dual map and the multiplicative domain for a
//! channel with rank-one Kraus operators.
//!
//! cargo run --example fixed_points

use sebkit::random::{random_block_rank_one, rng};
use sebkit::structure::{
    adjoint_fixed_check, commutant_projections, multiplicative_projection_check,
};
use sebkit::{ComplexMatrix, Tolerances, C64};

fn main() -> sebkit::Result<()> {
    let tol = Tolerances::default();
    let mut r = rng(3);
    // Kraus pairs live inside C^1 ⊕ C^2, so the block projections are fixed.
    let (ch, blocks) = random_block_rank_one(&mut r, &[1, 2], 3)?;

    let comm = commutant_projections(&ch, 0, &tol)?;
    println!(
        "commutant dimension {}, {} projections, max |[P, Q]| = {:.1e}",
        comm.basis.len(),
        comm.projections.len(),
        comm.pairwise_comm_residual
    );
    for p in &comm.projections {
        let rep = adjoint_fixed_check(&ch, p, &tol)?;
        println!(
            "  rank {:.0} projection: fixed {}, residual {:.1e}",
            p.trace().re,
            rep.fixed,
            rep.residual
        );
    }

    let rep = adjoint_fixed_check(&ch, &blocks[0], &tol)?;
    println!(
        "block projection commutes with every Kraus operator: {}",
        rep.commutes_with_all_kraus
    );

    // Mixing the two blocks destroys both properties.
    let s = 0.5f64.sqrt();
    let v = [C64::new(s, 0.0), C64::new(s, 0.0), C64::new(0.0, 0.0)];
    let tilted = ComplexMatrix::outer(&v, &v);
    let rep = adjoint_fixed_check(&ch, &tilted, &tol)?;
    println!(
        "tilted projection: fixed {}, commutes {}",
        rep.fixed, rep.commutes_with_all_kraus
    );

    for (name, p) in [("block", &blocks[0]), ("tilted", &tilted)] {
        let m = multiplicative_projection_check(&ch, p, &tol)?;
        println!(
            "{name}: in multiplicative domain {}, v_k eigenvectors {}, |Phi*Phi(P) - P| = {:.2e}",
            m.in_domain, m.v_eigen_ok, m.fix_of_dual_circ_phi
        );
    }
    Ok(())
}
