//! Builds the potential tables of the bulk mirrors and two slabs and prints
//! their asymptotic coefficients and build times.

use std::time::Instant;

use cpqr::cp_potential::{PotentialTable, TableSpec};
use cpqr::optics::{DielectricModel, MirrorSpec, PolarizabilityModel};
use cpqr::units::LengthUnit;
use cpqr::Constants;

fn main() -> cpqr::Result<()> {
    let k = Constants::default();
    let pol = PolarizabilityModel::hydrogen(&k);
    let nm = k.length_to_au(1.0, LengthUnit::Nanometre)?;
    let mirrors = [
        ("perfect", MirrorSpec::bulk(DielectricModel::Perfect)),
        ("silicon", MirrorSpec::bulk(DielectricModel::silicon(&k))),
        ("silica", MirrorSpec::bulk(DielectricModel::silica(&k))),
        ("silicon 100 nm", MirrorSpec::slab(DielectricModel::silicon(&k), 100.0 * nm)?),
        ("silica 1 nm", MirrorSpec::slab(DielectricModel::silica(&k), nm)?),
    ];
    println!("{:>15} {:>10} {:>12} {:>4} {:>9}", "mirror", "C3", "C_far", "n", "ms");
    for (name, m) in mirrors {
        let t0 = Instant::now();
        let t = PotentialTable::build(&m, &pol, TableSpec::default(), &k)?;
        let ms = t0.elapsed().as_secs_f64() * 1e3;
        println!("{name:>15} {:>10.5} {:>12.5e} {:>4} {ms:>9.1}", t.c3, t.c_far, m.far_exponent());
    }
    Ok(())
}
