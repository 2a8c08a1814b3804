//! Named and explicit quivers, their Cartan matrices and Dynkin components.

use zastava::quiver::{Quiver, QuiverMode};

fn main() -> zastava::Result<()> {
    for name in ["A3", "D4", "E6"] {
        let q = Quiver::named(name)?;
        println!("{name}: arrows {:?}", q.arrows());
        for row in q.cartan_matrix() {
            println!("  {row:?}");
        }
    }

    let q = Quiver::new(&["a", "b", "c"], &[("a", "b"), ("c", "b")], QuiverMode::Strict)?;
    println!("(a, b) = {}, (a, c) = {}", q.cartan_pairing("a", "b")?, q.cartan_pairing("a", "c")?);
    println!("components: {:?}", q.dynkin_components()?);

    let sub = Quiver::named("D4")?.restrict(&[0, 1, 2])?;
    println!("D4 restricted to 1, 2, 3: {:?}", sub.dynkin_components()?);

    match Quiver::new(&["a", "b"], &[("a", "b"), ("b", "a")], QuiverMode::Strict) {
        Ok(_) => println!("cycle accepted"),
        Err(e) => println!("cycle rejected: {e}"),
    }
    Ok(())
}
