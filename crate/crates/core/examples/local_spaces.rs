//! Clustering of configurations, factorization degrees and ranks, the Segre
//! embedding and the A2 local model.

use num_complex::Complex64;
use zastava::local::{
    a2_local_model, coulomb_twist_degree, mirkovic_summand_rank, mirkovic_twist_degree, segre_embed, segre_residual,
    Configuration,
};
use zastava::quiver::{Degree, Quiver};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn main() -> zastava::Result<()> {
    let q = Quiver::named("A2")?;
    let alpha = Degree::new(vec![2, 2])?;
    let points = vec![vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(0.0005, 0.0), c(3.0, 1.0)]];
    let config = Configuration::new(q.clone(), alpha.clone(), points, 1e-3)?;
    println!("clusters {:?}", config.clusters());
    println!("cluster degrees {:?}", config.cluster_degrees());
    println!("generic: {}", config.is_generic());

    let beta = Degree::new(vec![1, 1])?;
    let gamma = Degree::new(vec![1, 1])?;
    println!("rank of the ({beta}) summand of ({alpha}): {}", mirkovic_summand_rank(&alpha, &beta)?);
    println!(
        "twist degrees: Coulomb {}, Mirkovic {}",
        coulomb_twist_degree(&q, &beta, &gamma)?,
        mirkovic_twist_degree(&q, &beta, &gamma)?
    );

    let segre = segre_embed(&[vec![c(1.0, 0.0), c(2.0, 1.0)], vec![c(1.0, 0.0), c(-0.5, 0.3), c(0.1, 0.0)]]);
    println!("Segre vector with {} factors: residual {:.1e}", segre.factors(), segre_residual(&segre));

    let local = a2_local_model(c(0.3, 0.1), c(-0.2, 0.4), c(1.1, 0.2), c(0.7, -0.5))?;
    println!("A2 model: y_ij = {:.6}, regularity = {}", local.y_ij, local.regularity);
    match a2_local_model(c(0.3, 0.1), c(0.3, 0.1), c(1.0, 0.0), c(1.0, 0.0)) {
        Ok(_) => println!("diagonal accepted"),
        Err(e) => println!("diagonal: {e}"),
    }
    Ok(())
}
