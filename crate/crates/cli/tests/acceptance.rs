//! End-to-end acceptance run: each criterion prints one PASS/FAIL line and
//! the process fails if any criterion does.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use cpqr::badlands::badlands_q;
use cpqr::cp_potential::{compute_potential, PotentialOptions, PotentialTable, TableSpec};
use cpqr::optics::{DielectricModel, EmMode, MirrorSpec, Polarization, PolarizabilityModel};
use cpqr::qreflect::{integrate_amplitudes, Controls};
use cpqr::specfun::{bessel_jy0, bessel_jy1, gamma, kummer_m, kummer_u};
use cpqr::units::LengthUnit;
use cpqr::Constants;
use num_complex::Complex64;
use serde_json::Value;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

struct Harness {
    bin: PathBuf,
    cache: tempfile::TempDir,
    work: tempfile::TempDir,
}

impl Harness {
    fn cli_in(&self, cache: &Path, args: &[&str]) -> Result<Value, String> {
        let out = Command::new(&self.bin)
            .args(args)
            .args(["--format", "records", "--cache-dir"])
            .arg(cache)
            .current_dir(self.work.path())
            .output()
            .map_err(|e| format!("cannot run cpqr: {e}"))?;
        if !out.status.success() {
            return Err(format!("cpqr {} failed: {}", args.join(" "), String::from_utf8_lossy(&out.stderr)));
        }
        serde_json::from_slice(&out.stdout).map_err(|e| format!("bad records from {}: {e}", args.join(" ")))
    }

    fn cli(&self, args: &[&str]) -> Result<Value, String> {
        self.cli_in(self.cache.path(), args)
    }
}

fn check(ok: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn rel(got: f64, want: f64) -> f64 {
    (got / want - 1.0).abs()
}

fn num(v: &Value) -> f64 {
    v.as_f64().expect("number")
}

fn pair(v: &Value) -> (f64, f64) {
    (num(&v[0]), num(&v[1]))
}

fn by_mirror<'a>(results: &'a Value, label: &str) -> &'a Value {
    results.as_array().unwrap().iter().find(|r| r["mirror"] == label).expect("mirror row")
}

fn c1_calibration(h: &Harness) -> Outcome {
    let t0 = Instant::now();
    let r = h.cli(&["table1"])?;
    let elapsed = t0.elapsed();
    let p = by_mirror(&r["results"], "perfect");
    let (c3, c4) = (num(&p["c3"]), num(&p["c4"]));
    check(rel(c3, 0.25) <= 1e-2 && rel(c4, 73.6) <= 1e-2, || format!("C3 = {c3}, C4 = {c4}"))?;
    check(elapsed < Duration::from_secs(120), || format!("took {elapsed:?}"))?;
    Ok(format!("perfect C3 = {c3:.5}, C4 = {c4:.3} in {:.2} s", elapsed.as_secs_f64()))
}

fn c2_materials(h: &Harness) -> Outcome {
    let r = h.cli(&["table1"])?;
    let mut notes = Vec::new();
    for (label, c3_ref, c4_ref) in [("silicon", 0.10, 50.3), ("silica", 0.05, 28.1)] {
        let row = by_mirror(&r["results"], label);
        let (c3, c4) = (num(&row["c3"]), num(&row["c4"]));
        let (d3, d4) = (c3 / c3_ref - 1.0, c4 / c4_ref - 1.0);
        check(d3.abs() <= 0.2 && d4.abs() <= 0.2, || format!("{label}: C3 = {c3}, C4 = {c4}"))?;
        notes.push(format!("{label} C3 = {c3:.4} ({:+.1}%), C4 = {c4:.2} ({:+.1}%)", 100.0 * d3, 100.0 * d4));
    }
    Ok(notes.join("; "))
}

fn c3_table2(h: &Harness) -> Outcome {
    let fresh = tempfile::tempdir().map_err(|e| e.to_string())?;
    let t0 = Instant::now();
    let r = h.cli_in(fresh.path(), &["table2", "--height", "10cm"])?;
    let elapsed = t0.elapsed();
    let p: Vec<f64> = ["perfect", "silicon", "silica"].iter().map(|l| num(&by_mirror(&r["results"], l)["probability"])).collect();
    for (got, want) in p.iter().zip([0.14, 0.20, 0.32]) {
        check((got - want).abs() <= 0.04, || format!("|r|^2 = {got} vs {want}"))?;
    }
    check(p[2] > p[1] && p[1] > p[0], || format!("ordering broken: {p:?}"))?;
    check(elapsed < Duration::from_secs(300), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "|r|^2 perfect {:.4}, silicon {:.4}, silica {:.4} in {:.2} s with table builds",
        p[0],
        p[1],
        p[2],
        elapsed.as_secs_f64()
    ))
}

fn reflect_probability(h: &Harness, geometry: &[&str]) -> Result<f64, String> {
    let mut args = vec!["reflect", "--material", "silica", "--height", "10cm"];
    args.extend(geometry);
    Ok(num(&h.cli(&args)?["results"]["probability"]))
}

fn c4_slabs(h: &Harness) -> Outcome {
    let p3 = reflect_probability(h, &["--thickness", "3nm"])?;
    check((p3 - 0.50).abs() <= 0.05, || format!("3 nm slab |r|^2 = {p3}"))?;
    let mut seq = vec![reflect_probability(h, &["--bulk"])?];
    for d in ["50nm", "20nm", "10nm", "5nm", "2nm", "1nm"] {
        seq.push(reflect_probability(h, &["--thickness", d])?);
    }
    check(seq.windows(2).all(|w| w[1] > w[0]), || format!("not increasing as d shrinks: {seq:?}"))?;
    let shown: Vec<String> = seq.iter().map(|p| format!("{p:.3}")).collect();
    Ok(format!("3 nm |r|^2 = {p3:.4}; bulk..1 nm: {}", shown.join(" < ")))
}

fn c5_table3(h: &Harness) -> Outcome {
    let r = h.cli(&["table3"])?;
    let mut ims = Vec::new();
    let mut notes = Vec::new();
    for (label, re_ref, im_ref) in [("perfect", -53.0, -543.0), ("silicon", -97.2, -435.2), ("silica", -77.0, -272.6)] {
        let (re, im) = pair(&by_mirror(&r["results"], label)["a0"]);
        check(rel(re, re_ref) <= 0.2 && rel(im, im_ref) <= 0.2, || format!("{label}: a0 = {re} {im}i"))?;
        ims.push(im.abs());
        notes.push(format!("{label} {re:.1}{im:+.1}i"));
    }
    check(ims[0] > ims[1] && ims[1] > ims[2], || format!("|Im a| ordering broken: {ims:?}"))?;
    Ok(notes.join(", "))
}

fn c6_table4(h: &Harness) -> Outcome {
    let t3 = h.cli(&["table3"])?;
    let t4 = h.cli(&["table4"])?;
    let rows = t4["results"].as_array().unwrap();
    let mut notes = Vec::new();
    for material in ["silicon", "silica"] {
        let bulk = pair(&by_mirror(&t3["results"], material)["a0"]);
        let get = |label: String| pair(&by_mirror(&t4["results"], &label)["a0"]);
        let b4 = get(format!("{material}_bulk"));
        check(rel(b4.0, bulk.0) <= 1e-6 && rel(b4.1, bulk.1) <= 1e-6, || format!("{material} bulk rows differ"))?;
        let ims: Vec<f64> = [1, 2, 5, 10, 20, 50, 100]
            .iter()
            .map(|d| get(format!("{material}_{d}nm")).1.abs())
            .chain([bulk.1.abs()])
            .collect();
        check(ims.windows(2).all(|w| w[1] > w[0]), || format!("{material} |Im a| not monotone: {ims:?}"))?;
        check(rel(ims[6], ims[7]) <= 0.02, || format!("{material} 100 nm {} vs bulk {}", ims[6], ims[7]))?;
        notes.push(format!("{material} 100 nm/bulk Im a = {:.4}", ims[6] / ims[7]));
    }
    check(rows.len() == 16, || format!("{} rows", rows.len()))?;
    let thin = pair(&by_mirror(&t4["results"], "silica_1nm")["a0"]).1;
    check(rel(thin, -97.9) <= 0.2, || format!("silica 1 nm Im a = {thin}"))?;
    notes.push(format!("silica 1 nm Im a = {thin:.2}"));
    Ok(notes.join("; "))
}

fn c7_lifetime(h: &Harness) -> Outcome {
    let t3 = h.cli(&["table3"])?;
    let thin = h.cli(&["scatlen", "--material", "silica", "--thickness", "1nm"])?;
    let tau_p = num(&by_mirror(&t3["results"], "perfect")["lifetime_s"]);
    let tau_thin = num(&thin["results"]["lifetime_s"]);
    let ratio = tau_thin / tau_p;
    check((4.5..=6.5).contains(&ratio), || format!("ratio {ratio}"))?;
    check(rel(tau_p, 0.11) <= 0.2, || format!("tau(perfect) = {tau_p}"))?;
    Ok(format!("tau(perfect) = {tau_p:.4} s, tau(silica 1 nm)/tau(perfect) = {ratio:.3}"))
}

fn c8_properties() -> Outcome {
    let k = Constants::default();
    let pol = PolarizabilityModel::hydrogen(&k);
    let nm = |d: f64| k.length_to_au(d, LengthUnit::Nanometre).unwrap();
    let build = |m: MirrorSpec, spec: TableSpec| PotentialTable::build(&m, &pol, spec, &k).map_err(|e| e.to_string());
    let mirrors = [
        MirrorSpec::bulk(DielectricModel::Perfect),
        MirrorSpec::bulk(DielectricModel::silicon(&k)),
        MirrorSpec::bulk(DielectricModel::silica(&k)),
        MirrorSpec::slab(DielectricModel::silica(&k), nm(3.0)).unwrap(),
    ];
    let tables: Vec<PotentialTable> = mirrors.iter().map(|m| build(m.clone(), TableSpec::default())).collect::<Result<_, _>>()?;
    let controls = Controls::default();

    // current, probability range and the a(k) identity along every solve
    let (mut worst_current, mut worst_identity, mut solves) = (0.0f64, 0.0f64, 0);
    for t in &tables {
        for i in 0..12 {
            let e = k.height_to_energy(1e-4 * 10f64.powf(i as f64 / 2.75)).unwrap().energy;
            let r = integrate_amplitudes(t, e, &controls).map_err(|e| e.to_string())?;
            check((0.0..=1.0).contains(&r.probability), || format!("|r|^2 = {}", r.probability))?;
            worst_current = worst_current.max(r.diagnostics.max_current_defect);
            worst_identity = worst_identity.max((r.probability - (4.0 * r.k * r.a_of_k.im).exp()).abs());
            solves += 1;
        }
    }
    check(worst_current <= 1e-6, || format!("current defect {worst_current:e}"))?;
    check(worst_identity <= 1e-12, || format!("identity defect {worst_identity:e}"))?;

    // thick slab equals bulk
    let c = k.light_speed_au;
    let mut worst_slab = 0.0f64;
    for i in 0..40 {
        let (xi, kt, eps) = (0.01 * (i + 1) as f64, 0.02 * (i + 1) as f64, 1.2 + 0.3 * i as f64);
        let mode = EmMode::new(xi, kt, eps, c, Polarization::Te);
        let d = 60.0 / mode.big_k;
        let bulk = MirrorSpec::bulk(DielectricModel::Perfect).reflection_with_eps(eps, xi, mode.kappa, c);
        let slab = MirrorSpec::slab(DielectricModel::Perfect, d).unwrap().reflection_with_eps(eps, xi, mode.kappa, c);
        worst_slab = worst_slab.max((slab.0 - bulk.0).abs()).max((slab.1 - bulk.1).abs());
    }
    let thick = MirrorSpec::slab(DielectricModel::silica(&k), 1e16).unwrap();
    for z in [1.0, 100.0, 1e4] {
        let vb = compute_potential(&mirrors[2], &pol, z, &k, PotentialOptions::default()).map_err(|e| e.to_string())?;
        let vs = compute_potential(&thick, &pol, z, &k, PotentialOptions::default()).map_err(|e| e.to_string())?;
        worst_slab = worst_slab.max(rel(vs.value, vb.value));
    }
    check(worst_slab <= 1e-12, || format!("thick slab differs from bulk by {worst_slab:e}"))?;

    // deep van der Waals badlands
    let e10 = k.height_to_energy(0.1).unwrap().energy;
    let mut worst_q = 0.0f64;
    for t in &tables {
        for z in [0.02, 0.2, 1.0] {
            let want = 3.0 * z / (32.0 * k.atom_mass_au * t.c3);
            worst_q = worst_q.max(rel(badlands_q(t, e10, z), want));
        }
    }
    check(worst_q <= 1e-2, || format!("badlands closed form off by {worst_q:e}"))?;

    // Wronskians
    let mut worst_w = 0.0f64;
    let (a, b) = (1.5, 4.0);
    for i in 0..20 {
        let t = Complex64::new(0.0, if i % 2 == 0 { 1.0 } else { -1.0 } * (0.4 + 3.1 * i as f64));
        let m = kummer_m(a, b, t).map_err(|e| e.to_string())?;
        let dm = kummer_m(a + 1.0, b + 1.0, t).map_err(|e| e.to_string())? * (a / b);
        let u = kummer_u(a, b, t).map_err(|e| e.to_string())?;
        let du = -kummer_u(a + 1.0, b + 1.0, t).map_err(|e| e.to_string())? * a;
        let want = -t.powf(-b) * t.exp() * (gamma(b) / gamma(a));
        worst_w = worst_w.max((m * du - dm * u - want).norm() / want.norm());
        let x = 0.07 * 1.5f64.powi(i);
        let (j0, y0) = bessel_jy0(x).map_err(|e| e.to_string())?;
        let (j1, y1) = bessel_jy1(x).map_err(|e| e.to_string())?;
        let wb = 2.0 / (std::f64::consts::PI * x);
        worst_w = worst_w.max(((j1 * y0 - j0 * y1) - wb).abs() / wb);
    }
    check(worst_w <= 1e-8, || format!("Wronskian defect {worst_w:e}"))?;

    // control doubling
    let dense = build(mirrors[2].clone(), TableSpec { points_per_decade: 40, ..Default::default() })?;
    let mut worst_ctrl = 0.0f64;
    for t_idx in [0, 2, 3] {
        for hgt in [0.01, 0.1, 1.0] {
            let e = k.height_to_energy(hgt).unwrap().energy;
            let p = |t: &PotentialTable, c: &Controls| integrate_amplitudes(t, e, c).map(|r| r.probability).map_err(|e| e.to_string());
            let base = p(&tables[t_idx], &controls)?;
            let started = p(&tables[t_idx], &Controls { ratio_start: 2.0 * controls.ratio_start, ..controls })?;
            let switched = p(&tables[t_idx], &Controls { ratio_switch: 0.5 * controls.ratio_switch, ..controls })?;
            worst_ctrl = worst_ctrl.max((started - base).abs()).max((switched - base).abs());
            if t_idx == 2 {
                worst_ctrl = worst_ctrl.max((p(&dense, &controls)? - base).abs());
            }
        }
    }
    check(worst_ctrl <= 1e-6, || format!("|r|^2 moves by {worst_ctrl:e} under control doubling"))?;

    Ok(format!(
        "{solves} solves: current {worst_current:.1e}, identity {worst_identity:.1e}; thick slab {worst_slab:.1e}; \
         badlands {worst_q:.1e}; Wronskians {worst_w:.1e}; controls {worst_ctrl:.1e}"
    ))
}

fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>), String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty csv")?.split(',').map(str::to_owned).collect();
    let rows = lines
        .map(|l| l.split(',').map(|c| c.parse::<f64>().map_err(|e| format!("{c}: {e}"))).collect())
        .collect::<Result<_, _>>()?;
    Ok((header, rows))
}

/// Columns 1.. must be strictly decreasing from left to right in every row.
fn columns_decrease(rows: &[Vec<f64>]) -> bool {
    rows.iter().all(|r| r[1..].windows(2).all(|w| w[0] > w[1]))
}

fn rows_decrease(rows: &[Vec<f64>]) -> bool {
    rows.windows(2).all(|w| (1..w[0].len()).all(|j| w[1][j] < w[0][j]))
}

fn c9_figures(h: &Harness) -> Outcome {
    let dir = h.work.path().join("figs");
    let out = Command::new(&h.bin)
        .args(["fig-data", "--out"])
        .arg(&dir)
        .arg("--cache-dir")
        .arg(h.cache.path())
        .output()
        .map_err(|e| e.to_string())?;
    check(out.status.success(), || String::from_utf8_lossy(&out.stderr).into_owned())?;
    let (h1, fig1) = read_csv(&dir.join("fig1.csv"))?;
    check(h1[1..] == ["perfect", "silicon", "silica"], || format!("fig1 header {h1:?}"))?;
    check(columns_decrease(&fig1), || "fig1: V/V* not ordered perfect > silicon > silica".into())?;
    let (_, fig4) = read_csv(&dir.join("fig4.csv"))?;
    check(columns_decrease(&fig4), || "fig4: V/V* not ordered bulk > 50 nm > ... > 1 nm".into())?;
    let (_, fig2) = read_csv(&dir.join("fig2.csv"))?;
    let (_, fig5) = read_csv(&dir.join("fig5.csv"))?;
    check(rows_decrease(&fig2) && rows_decrease(&fig5), || "|r|^2 does not decay with h".into())?;
    check(fig2.iter().all(|r| r[3] > r[2] && r[2] > r[1]), || "fig2: bulk ordering broken".into())?;
    check(fig5.iter().all(|r| r[1..].windows(2).all(|w| w[1] > w[0])), || "fig5: slab ordering broken".into())?;

    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let peaks = &manifest["results"]["badlands_peaks"];
    let q = |l: &str| num(&peaks[l]["peak_q"]);
    let z = |l: &str| num(&peaks[l]["peak_z"]);
    check(q("silica") > q("silicon") && q("silicon") > q("perfect"), || "peak_Q ordering broken".into())?;
    check(z("silica") < z("silicon") && z("silicon") < z("perfect"), || "peak_z ordering broken".into())?;
    let (_, fig3) = read_csv(&dir.join("fig3.csv"))?;
    let grid_peak = |j: usize| fig3.iter().map(|r| r[j]).fold(f64::NEG_INFINITY, f64::max);
    check(grid_peak(3) > grid_peak(2) && grid_peak(2) > grid_peak(1), || "fig3 column maxima out of order".into())?;
    Ok(format!(
        "{} + {} ratio rows, {} + {} curve rows ordered; peaks Q {:.3}/{:.3}/{:.3} at z {:.0}/{:.0}/{:.0}",
        fig1.len(),
        fig4.len(),
        fig2.len(),
        fig5.len(),
        q("perfect"),
        q("silicon"),
        q("silica"),
        z("perfect"),
        z("silicon"),
        z("silica")
    ))
}

fn main() {
    let h = Harness {
        bin: PathBuf::from(env!("CARGO_BIN_EXE_cpqr")),
        cache: tempfile::tempdir().expect("temp dir"),
        work: tempfile::tempdir().expect("temp dir"),
    };
    let criteria: Vec<Criterion> = vec![
        ("Table 1 calibration pair", Box::new(|| c1_calibration(&h))),
        ("Table 1 materials", Box::new(|| c2_materials(&h))),
        ("Table 2 reflection probabilities", Box::new(|| c3_table2(&h))),
        ("3 nm silica slab and slab ordering", Box::new(|| c4_slabs(&h))),
        ("Table 3 bulk scattering lengths", Box::new(|| c5_table3(&h))),
        ("Table 4 slab scattering lengths", Box::new(|| c6_table4(&h))),
        ("lifetime ratio", Box::new(|| c7_lifetime(&h))),
        ("property suite", Box::new(c8_properties)),
        ("figure datasets", Box::new(|| c9_figures(&h))),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let outcome = run();
        let secs = t0.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} PASS  {name} ({secs:.1} s): {detail}", i + 1),
            Err(reason) => {
                failed += 1;
                println!("criterion {} FAIL  {name} ({secs:.1} s): {reason}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
