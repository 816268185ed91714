use serde_json::{json, Value};

use cpqr::badlands::{badlands_profile, log_grid, BadlandsProfile};
use cpqr::cp_potential::{asymptotic_coeffs, compute_potential, load_or_build, PotentialTable};
use cpqr::optics::{DielectricModel, MirrorSpec, C4_PERFECT_REFERENCE};
use cpqr::qreflect::{integrate_amplitudes, reflection_curve, ReflectionResult};
use cpqr::threshold::{k_ladder, lifetime, scattering_length, ScatteringLength};
use cpqr::units::LengthUnit;
use cpqr::{Error, Result};

use crate::config::{parse_height, Command, RunConfig};
use crate::output::{Cell, Output, Table};

/// Thicknesses (nm) of the slab figures, thickest first; `None` is bulk.
pub const FIGURE_SLABS: [Option<f64>; 7] = [None, Some(50.0), Some(20.0), Some(10.0), Some(5.0), Some(2.0), Some(1.0)];
/// Thicknesses (nm) of the slab scattering-length table.
pub const TABLE4_SLABS: [Option<f64>; 8] =
    [Some(1.0), Some(2.0), Some(5.0), Some(10.0), Some(20.0), Some(50.0), Some(100.0), None];

pub struct Ctx {
    pub cfg: RunConfig,
}

/// A labelled mirror, e.g. `silica_3nm`.
struct Named {
    label: String,
    mirror: MirrorSpec,
}

impl Ctx {
    fn table(&self, mirror: &MirrorSpec) -> Result<PotentialTable> {
        let c = &self.cfg;
        load_or_build(c.cache_dir.as_deref(), mirror, &c.polarizability, c.table, &c.constants)
    }

    fn nm(&self, d: f64) -> f64 {
        self.cfg.constants.length_to_au(d, LengthUnit::Nanometre).expect("positive thickness")
    }

    fn bulks(&self) -> Vec<Named> {
        let k = &self.cfg.constants;
        [
            ("perfect", DielectricModel::Perfect),
            ("silicon", DielectricModel::silicon(k)),
            ("silica", DielectricModel::silica(k)),
        ]
        .into_iter()
        .map(|(label, d)| Named { label: label.into(), mirror: MirrorSpec::bulk(d) })
        .collect()
    }

    fn slabs(&self, material: &str, dielectric: DielectricModel, thicknesses: &[Option<f64>]) -> Result<Vec<Named>> {
        thicknesses
            .iter()
            .map(|t| {
                Ok(match t {
                    None => Named { label: format!("{material}_bulk"), mirror: MirrorSpec::bulk(dielectric.clone()) },
                    Some(d) => Named {
                        label: format!("{material}_{d}nm"),
                        mirror: MirrorSpec::slab(dielectric.clone(), self.nm(*d))?,
                    },
                })
            })
            .collect()
    }

    fn ladder(&self) -> Result<Vec<f64>> {
        let l = self.cfg.k_ladder;
        k_ladder(l.k_max, l.k_min, l.per_decade)
    }

    fn energy(&self) -> f64 {
        self.cfg.selection.energy_hartree
    }

    fn scatlen(&self, table: &PotentialTable) -> Result<(ScatteringLength, f64)> {
        let sl = scattering_length(table, &self.ladder()?, &self.cfg.controls, &self.cfg.fit)?;
        let tau = lifetime(sl.a0, &self.cfg.constants)?;
        Ok((sl, tau))
    }

    fn heights(&self, h_min: &str, h_max: &str, points: usize) -> Result<Vec<f64>> {
        let k = &self.cfg.constants;
        let (lo, hi) = (parse_height(h_min, k)?, parse_height(h_max, k)?);
        if !(lo > 0.0) {
            return Err(Error::Domain(format!("heights must be positive, got {h_min}")));
        }
        log_grid(lo, hi, points)
    }
}

fn ratio_to_reference(v: f64, z: f64) -> f64 {
    v * z.powi(4) / -C4_PERFECT_REFERENCE
}

fn reflection_json(r: &ReflectionResult, height_m: f64) -> Value {
    json!({
        "height_m": height_m,
        "energy_hartree": r.energy,
        "k": r.k,
        "r": [r.r.re, r.r.im],
        "probability": r.probability,
        "a_of_k": [r.a_of_k.re, r.a_of_k.im],
        "diagnostics": r.diagnostics,
    })
}

fn scatlen_json(label: &str, sl: &ScatteringLength, tau: f64) -> Value {
    json!({
        "mirror": label,
        "a0": [sl.a0.re, sl.a0.im],
        "a1": [sl.a1.re, sl.a1.im],
        "fit_window": [sl.fit_window.0, sl.fit_window.1],
        "fit_residual": sl.fit_residual,
        "lifetime_s": tau,
        "samples": sl.samples.iter().map(|(k, a)| json!([k, a.re, a.im])).collect::<Vec<_>>(),
    })
}

pub fn run(ctx: &Ctx) -> Result<Output> {
    match &ctx.cfg.command {
        Command::Potential { z } => potential(ctx, z),
        Command::Reflect => reflect(ctx),
        Command::Curve { h_min, h_max, points } => curve(ctx, h_min, h_max, *points),
        Command::Badlands { z_from, z_to, points } => badlands(ctx, *z_from, *z_to, *points),
        Command::Scatlen => scatlen(ctx),
        Command::Table1 => table1(ctx),
        Command::Table2 => table2(ctx),
        Command::Table3 => table3(ctx),
        Command::Table4 => table4(ctx),
        Command::FigData => Err(Error::Config("fig-data writes a directory; use run_fig_data".into())),
    }
}

fn potential(ctx: &Ctx, zs: &[String]) -> Result<Output> {
    let c = &ctx.cfg;
    let mirror = c.mirror()?;
    let mut table = Table::new("", &["z_bohr", "V_hartree", "V_over_Vstar"]);
    let mut points = Vec::new();
    if zs.is_empty() {
        let t = ctx.table(&mirror)?;
        for (&z, &v) in t.z_grid.iter().zip(&t.values) {
            table.push(vec![z.into(), v.into(), ratio_to_reference(v, z).into()]);
            points.push(json!({"z": z, "V": v}));
        }
        let results = json!({
            "mirror": mirror.describe(&c.constants),
            "c3": t.c3, "c_far": t.c_far, "far_exponent": t.far_exponent, "far_residual": t.far_residual,
            "points": points,
        });
        return Ok(Output { table, results });
    }
    for text in zs {
        let z = c.constants.parse_length(text)?;
        let est = compute_potential(&mirror, &c.polarizability, z, &c.constants, c.table.quadrature)?;
        table.push(vec![z.into(), est.value.into(), ratio_to_reference(est.value, z).into()]);
        points.push(json!({"z": z, "V": est.value, "error": est.error}));
    }
    Ok(Output { table, results: json!({"mirror": mirror.describe(&c.constants), "points": points}) })
}

fn reflect(ctx: &Ctx) -> Result<Output> {
    let c = &ctx.cfg;
    let t = ctx.table(&c.mirror()?)?;
    let r = integrate_amplitudes(&t, ctx.energy(), &c.controls)?;
    let mut table = Table::new("", &["height_m", "energy_hartree", "k", "probability", "re_r", "im_r", "re_a", "im_a"]);
    table.push(
        [c.selection.height_m, r.energy, r.k, r.probability, r.r.re, r.r.im, r.a_of_k.re, r.a_of_k.im]
            .map(Cell::from)
            .to_vec(),
    );
    Ok(Output { table, results: reflection_json(&r, c.selection.height_m) })
}

fn curve(ctx: &Ctx, h_min: &str, h_max: &str, points: usize) -> Result<Output> {
    let t = ctx.table(&ctx.cfg.mirror()?)?;
    let heights = ctx.heights(h_min, h_max, points)?;
    let rs = reflection_curve(&t, &heights, &ctx.cfg.controls)?;
    let mut table = Table::new("", &["h_cm", "probability"]);
    for (h, r) in heights.iter().zip(&rs) {
        table.push(vec![(100.0 * h).into(), r.probability.into()]);
    }
    let results = rs.iter().zip(&heights).map(|(r, h)| reflection_json(r, *h)).collect();
    Ok(Output { table, results: Value::Array(results) })
}

fn profile_json(p: &BadlandsProfile) -> Value {
    json!({"energy_hartree": p.energy, "peak_z": p.peak_z, "peak_q": p.peak_q})
}

fn badlands(ctx: &Ctx, z_from: f64, z_to: f64, points: usize) -> Result<Output> {
    let t = ctx.table(&ctx.cfg.mirror()?)?;
    let p = badlands_profile(&t, ctx.energy(), &log_grid(z_from, z_to, points)?)?;
    let mut table = Table::new("", &["z_bohr", "Q"]);
    for (z, q) in p.z_grid.iter().zip(&p.q) {
        table.push(vec![(*z).into(), (*q).into()]);
    }
    let mut results = profile_json(&p);
    results["profile"] = json!(p.z_grid.iter().zip(&p.q).map(|(z, q)| [*z, *q]).collect::<Vec<_>>());
    Ok(Output { table, results })
}

fn scatlen(ctx: &Ctx) -> Result<Output> {
    let mirror = ctx.cfg.mirror()?;
    let (sl, tau) = ctx.scatlen(&ctx.table(&mirror)?)?;
    let mut table = Table::new("", &["k", "re_a", "im_a"]);
    for (k, a) in &sl.samples {
        table.push(vec![(*k).into(), a.re.into(), a.im.into()]);
    }
    Ok(Output { table, results: scatlen_json(&mirror.describe(&ctx.cfg.constants), &sl, tau) })
}

fn table1(ctx: &Ctx) -> Result<Output> {
    let c = &ctx.cfg;
    let mut table = Table::new("Short- and long-distance coefficients (atomic units)", &["mirror", "C3", "C4"]);
    let mut results = Vec::new();
    for n in ctx.bulks() {
        let a = asymptotic_coeffs(&n.mirror, &c.polarizability, &c.constants, c.table.quadrature)?;
        table.push(vec![n.label.as_str().into(), a.c3.into(), a.c_far.into()]);
        results.push(json!({"mirror": n.label, "c3": a.c3, "c4": a.c_far, "far_residual": a.far_residual}));
    }
    Ok(Output { table, results: Value::Array(results) })
}

fn table2(ctx: &Ctx) -> Result<Output> {
    let c = &ctx.cfg;
    let title = format!("Reflection probability at h = {} m (gh = {:.3} m^2/s^2)", c.selection.height_m, c.selection.gh_m2_s2);
    let mut table = Table::new(title, &["mirror", "probability"]);
    let mut results = Vec::new();
    for n in ctx.bulks() {
        let r = integrate_amplitudes(&ctx.table(&n.mirror)?, ctx.energy(), &c.controls)?;
        table.push(vec![n.label.as_str().into(), r.probability.into()]);
        let mut j = reflection_json(&r, c.selection.height_m);
        j["mirror"] = json!(n.label);
        results.push(j);
    }
    Ok(Output { table, results: Value::Array(results) })
}

fn scatlen_table(ctx: &Ctx, title: &str, mirrors: Vec<(String, Cell, Named)>) -> Result<Output> {
    let mut table = Table::new(title, &["material", "thickness_nm", "re_a0", "im_a0", "fit_residual", "lifetime_s"]);
    let mut results = Vec::new();
    for (material, thickness, n) in mirrors {
        let (sl, tau) = ctx.scatlen(&ctx.table(&n.mirror)?)?;
        table.push(vec![material.into(), thickness, sl.a0.re.into(), sl.a0.im.into(), sl.fit_residual.into(), tau.into()]);
        results.push(scatlen_json(&n.label, &sl, tau));
    }
    Ok(Output { table, results: Value::Array(results) })
}

fn table3(ctx: &Ctx) -> Result<Output> {
    let rows = ctx.bulks().into_iter().map(|n| (n.label.clone(), "bulk".into(), n)).collect();
    scatlen_table(ctx, "Scattering lengths on bulk mirrors (bohr)", rows)
}

fn table4(ctx: &Ctx) -> Result<Output> {
    let k = &ctx.cfg.constants;
    let mut rows = Vec::new();
    for (material, d) in [("silicon", DielectricModel::silicon(k)), ("silica", DielectricModel::silica(k))] {
        for (n, t) in ctx.slabs(material, d, &TABLE4_SLABS)?.into_iter().zip(TABLE4_SLABS) {
            let cell = t.map(Cell::from).unwrap_or_else(|| "bulk".into());
            rows.push((material.to_string(), cell, n));
        }
    }
    scatlen_table(ctx, "Scattering lengths on slabs (bohr)", rows)
}

/// (file name, contents) of every figure dataset plus a summary.
pub fn fig_data(ctx: &Ctx) -> Result<(Vec<(String, String)>, Value)> {
    let k = &ctx.cfg.constants;
    let bulks = ctx.bulks();
    let slabs = ctx.slabs("silica", DielectricModel::silica(k), &FIGURE_SLABS)?;
    let heights = ctx.heights("0.1mm", "1m", 33)?;
    let z_ratio = log_grid(1.0, 1e6, 61)?;
    let z_q = log_grid(1.0, 1e6, 241)?;
    let ks = ctx.ladder()?;
    let mut files = Vec::new();
    let mut summary = serde_json::Map::new();

    for (figs, set) in [(["fig1", "fig2", "fig3", "fig6"], &bulks), (["fig4", "fig5", "", "fig7"], &slabs)] {
        let tables: Vec<PotentialTable> = set.iter().map(|n| ctx.table(&n.mirror)).collect::<Result<_>>()?;
        let labels: Vec<&str> = set.iter().map(|n| n.label.as_str()).collect();

        let mut header = vec!["z_bohr"];
        header.extend(&labels);
        let mut ratio = Table::new("", &header);
        for &z in &z_ratio {
            let mut row = vec![Cell::from(z)];
            row.extend(tables.iter().map(|t| Cell::from(ratio_to_reference(t.eval_potential(z), z))));
            ratio.push(row);
        }
        files.push((format!("{}.csv", figs[0]), ratio.csv()));

        let mut header = vec!["h_cm"];
        header.extend(&labels);
        let mut curves = Table::new("", &header);
        let results: Vec<Vec<ReflectionResult>> =
            tables.iter().map(|t| reflection_curve(t, &heights, &ctx.cfg.controls)).collect::<Result<_>>()?;
        for (i, h) in heights.iter().enumerate() {
            let mut row = vec![Cell::from(100.0 * h)];
            row.extend(results.iter().map(|r| Cell::from(r[i].probability)));
            curves.push(row);
        }
        files.push((format!("{}.csv", figs[1]), curves.csv()));

        if !figs[2].is_empty() {
            let mut header = vec!["z_bohr"];
            header.extend(&labels);
            let mut q = Table::new("", &header);
            let profiles: Vec<BadlandsProfile> =
                tables.iter().map(|t| badlands_profile(t, ctx.energy(), &z_q)).collect::<Result<_>>()?;
            for (i, z) in z_q.iter().enumerate() {
                let mut row = vec![Cell::from(*z)];
                row.extend(profiles.iter().map(|p| Cell::from(p.q[i])));
                q.push(row);
            }
            files.push((format!("{}.csv", figs[2]), q.csv()));
            let peaks: serde_json::Map<String, Value> =
                labels.iter().zip(&profiles).map(|(l, p)| (l.to_string(), profile_json(p))).collect();
            summary.insert("badlands_peaks".into(), Value::Object(peaks));
        }

        let mut header = vec!["k".to_string()];
        for l in &labels {
            header.push(format!("{l}_re_a"));
            header.push(format!("{l}_im_a"));
        }
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let mut a = Table::new("", &header);
        let lengths: Vec<ScatteringLength> = tables
            .iter()
            .map(|t| scattering_length(t, &ks, &ctx.cfg.controls, &ctx.cfg.fit))
            .collect::<Result<_>>()?;
        for (i, kk) in ks.iter().enumerate() {
            let mut row = vec![Cell::from(*kk)];
            for sl in &lengths {
                row.push(sl.samples[i].1.re.into());
                row.push(sl.samples[i].1.im.into());
            }
            a.push(row);
        }
        files.push((format!("{}.csv", figs[3]), a.csv()));
    }
    summary.insert("files".into(), json!(files.iter().map(|f| f.0.clone()).collect::<Vec<_>>()));
    Ok((files, Value::Object(summary)))
}
