//! Browser bindings: three operations on a single mirror, each returning a
//! JSON string for the page in `www/` to plot.

use std::cell::RefCell;

use cpqr::badlands::{badlands_profile, log_grid};
use cpqr::cp_potential::{PotentialTable, TableSpec};
use cpqr::optics::{DielectricModel, MirrorSpec, PolarizabilityModel, C4_PERFECT_REFERENCE};
use cpqr::qreflect::{reflection_curve, Controls};
use cpqr::units::LengthUnit;
use cpqr::{Constants, Error, Result};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

thread_local! {
    // built tables by (material, thickness bits); a page rarely needs more than a few
    static TABLES: RefCell<Vec<((String, u64), PotentialTable)>> = const { RefCell::new(Vec::new()) };
}

fn mirror(material: &str, thickness_nm: f64, k: &Constants) -> Result<MirrorSpec> {
    let dielectric = match material {
        "perfect" => DielectricModel::Perfect,
        "silicon" => DielectricModel::silicon(k),
        "silica" => DielectricModel::silica(k),
        other => return Err(Error::Config(format!("unknown material '{other}'"))),
    };
    if thickness_nm > 0.0 {
        MirrorSpec::slab(dielectric, k.length_to_au(thickness_nm, LengthUnit::Nanometre)?)
    } else {
        Ok(MirrorSpec::bulk(dielectric))
    }
}

fn with_table<T>(material: &str, thickness_nm: f64, f: impl FnOnce(&PotentialTable) -> Result<T>) -> Result<T> {
    let key = (material.to_string(), if thickness_nm > 0.0 { thickness_nm.to_bits() } else { 0 });
    let cached = TABLES.with(|t| t.borrow().iter().find(|(k, _)| *k == key).map(|(_, v)| v.clone()));
    let table = match cached {
        Some(t) => t,
        None => {
            let k = Constants::default();
            let m = mirror(material, thickness_nm, &k)?;
            let t = PotentialTable::build(&m, &PolarizabilityModel::hydrogen(&k), TableSpec::default(), &k)?;
            TABLES.with(|c| c.borrow_mut().push((key, t.clone())));
            t
        }
    };
    f(&table)
}

/// V(z) z^4 / (-C4) for the perfect-mirror reference, on a log grid.
pub fn potential_ratio_value(material: &str, thickness_nm: f64, z_from: f64, z_to: f64, points: usize) -> Result<Value> {
    let z = log_grid(z_from, z_to, points)?;
    with_table(material, thickness_nm, |t| {
        let ratio: Vec<f64> = z.iter().map(|&z| t.eval_potential(z) * z.powi(4) / -C4_PERFECT_REFERENCE).collect();
        Ok(json!({ "z_bohr": z, "ratio": ratio }))
    })
}

/// |r|^2 against fall height in metres.
pub fn reflection_value(material: &str, thickness_nm: f64, h_min: f64, h_max: f64, points: usize) -> Result<Value> {
    let h = log_grid(h_min, h_max, points)?;
    with_table(material, thickness_nm, |t| {
        let p: Vec<f64> = reflection_curve(t, &h, &Controls::default())?.iter().map(|r| r.probability).collect();
        Ok(json!({ "height_m": h, "probability": p }))
    })
}

/// Badlands function Q(z) at the energy of a fall from `height_m`.
pub fn badlands_value(material: &str, thickness_nm: f64, height_m: f64, z_from: f64, z_to: f64, points: usize) -> Result<Value> {
    let energy = Constants::default().height_to_energy(height_m)?.energy;
    let z = log_grid(z_from, z_to, points)?;
    with_table(material, thickness_nm, |t| {
        let p = badlands_profile(t, energy, &z)?;
        Ok(json!({ "z_bohr": p.z_grid, "q": p.q, "peak_z": p.peak_z, "peak_q": p.peak_q }))
    })
}

fn to_js(r: Result<Value>) -> std::result::Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = potentialRatio)]
pub fn potential_ratio(material: &str, thickness_nm: f64, z_from: f64, z_to: f64, points: usize) -> std::result::Result<String, JsError> {
    to_js(potential_ratio_value(material, thickness_nm, z_from, z_to, points))
}

#[wasm_bindgen(js_name = reflectionCurve)]
pub fn reflection(material: &str, thickness_nm: f64, h_min: f64, h_max: f64, points: usize) -> std::result::Result<String, JsError> {
    to_js(reflection_value(material, thickness_nm, h_min, h_max, points))
}

#[wasm_bindgen(js_name = badlandsProfile)]
pub fn badlands(
    material: &str,
    thickness_nm: f64,
    height_m: f64,
    z_from: f64,
    z_to: f64,
    points: usize,
) -> std::result::Result<String, JsError> {
    to_js(badlands_value(material, thickness_nm, height_m, z_from, z_to, points))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_operations() {
        let v = potential_ratio_value("perfect", 0.0, 1.0, 1e6, 13).unwrap();
        let r = v["ratio"].as_array().unwrap();
        assert_eq!(r.len(), 13);
        assert!((r[12].as_f64().unwrap() - 1.0).abs() < 1e-2);

        let v = reflection_value("silica", 3.0, 0.01, 1.0, 5).unwrap();
        let p: Vec<f64> = v["probability"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
        assert!(p.windows(2).all(|w| w[1] < w[0]));

        let v = badlands_value("silicon", 0.0, 0.1, 1.0, 1e6, 121).unwrap();
        assert!(v["peak_q"].as_f64().unwrap() > 1.0);
    }

    #[test]
    fn unknown_material() {
        assert!(matches!(potential_ratio_value("gold", 0.0, 1.0, 10.0, 3), Err(Error::Config(_))));
    }
}
