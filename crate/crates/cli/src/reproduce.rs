use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use chaoskey::analysis::{
    adjacent_correlation, chi_square, correlation_pairs, differential_attack_trials, entropy, histogram, histogram_csv,
    implicit_key_experiment, key_sensitivity_sweep, pairs_csv, Direction, SensitivityRow, TrainingSetup, DEFAULT_PAIRS,
};
use chaoskey::identify::{data_size_sweep, identify_from_map, model_error, noise_sweep};
use chaoskey::image::to_pgm_bytes;
use chaoskey::maps::{default_var_names, henon, logistic3d, lozi};
use chaoskey::model::format_equations;
use chaoskey::testimage::default_standin;
use chaoskey::{build_library, encrypt, CipherConfig, FitOptions, GrayImage, Key, MapSpec};

use crate::commands::read_image;
use crate::{ReproduceArgs, Target};

const KEY: [f64; 2] = [0.2, 0.3];
const TRAIN_X0: [f64; 2] = [0.1, 0.1];
const TRAIN_SAMPLES: usize = 10_000;
const NOISE_SEED: u64 = 7;
const PAIR_SEED: u64 = 0;
const TRIAL_SEED: u64 = 0;
const ROUNDS: usize = 4;

struct Ctx {
    dir: PathBuf,
    image: GrayImage,
}

impl Ctx {
    fn write(&self, name: &str, contents: impl AsRef<[u8]>) -> Result<()> {
        let p = self.dir.join(name);
        fs::write(&p, contents).with_context(|| format!("writing {}", p.display()))
    }

    /// Hénon identified from clean training data, keyed at (0.2, 0.3).
    fn cipher_config(&self) -> Result<CipherConfig> {
        let map = identified_henon(None)?;
        Ok(CipherConfig::new(map, Key::new(KEY.to_vec())?, ROUNDS)?)
    }
}

struct Checks(Vec<(String, bool)>);

impl Checks {
    fn new() -> Self {
        Self(Vec::new())
    }

    fn check(&mut self, what: impl Into<String>, pass: bool) {
        self.0.push((what.into(), pass));
    }
}

fn identified_henon(noise: Option<(f64, u64)>) -> Result<MapSpec> {
    let truth = henon(1.4, 0.3)?;
    let lib = build_library(2, 3, false)?;
    Ok(identify_from_map(&truth, &TRAIN_X0, TRAIN_SAMPLES, noise, &lib, &FitOptions::default())?.map)
}

fn print_map(label: &str, map: &MapSpec) {
    println!("  {label}:");
    for eq in format_equations(map, Some(4)) {
        println!("    {eq}");
    }
}

fn t1(ctx: &Ctx, c: &mut Checks) -> Result<()> {
    let truth = henon(1.4, 0.3)?;
    let map = identified_henon(None)?;
    print_map("paper (noise 0, 10000 points)", &truth);
    print_map("identified", &map);
    let err = model_error(&map, &truth)?;
    println!("  model error {err:.3e}");
    ctx.write("t1.txt", chaoskey::model::to_model_string(&map))?;
    c.check(format!("model error {err:.3e} <= 1e-6"), err <= 1e-6);
    Ok(())
}

fn fig2(ctx: &Ctx, c: &mut Checks) -> Result<()> {
    let truth = henon(1.4, 0.3)?;
    let sizes: Vec<usize> = (1..=10).map(|k| 2000 * k).collect();
    let lib = build_library(2, 3, false)?;
    let rows = data_size_sweep(&truth, &TRAIN_X0, &sizes, &lib, &FitOptions::default())?;
    let mut csv = String::from("size,error\n");
    println!("  {:>6}  {:>10}  (paper: 0 at every size)", "size", "error");
    for (size, err) in &rows {
        println!("  {size:>6}  {err:>10.3e}");
        writeln!(csv, "{size},{err:e}")?;
    }
    ctx.write("fig2.csv", csv)?;
    let worst = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    c.check(
        format!("max error {worst:.3e} <= 1e-6 over {} sizes", rows.len()),
        worst <= 1e-6,
    );
    Ok(())
}

fn t2(ctx: &Ctx, c: &mut Checks) -> Result<()> {
    let truth = henon(1.4, 0.3)?;
    let lib = build_library(2, 3, false)?;
    let sigmas = [0.0, 1e-4, 1e-3];
    let pts = noise_sweep(
        &truth,
        &TRAIN_X0,
        TRAIN_SAMPLES,
        &sigmas,
        NOISE_SEED,
        &lib,
        &FitOptions::default(),
    )?;
    let names = default_var_names(2);
    let mut csv = String::from("sigma,coordinate,term,coefficient\n");
    println!("  paper: sigma 0 and 1e-4 recover the map; sigma 1e-3 adds artifact terms");
    for p in &pts {
        let o = p
            .outcome
            .as_ref()
            .map_err(|e| anyhow::anyhow!("sigma {}: {e}", p.sigma))?;
        print_map(&format!("sigma {}", p.sigma), &o.map);
        for (k, terms) in o.map.coords().iter().enumerate() {
            for t in terms {
                writeln!(
                    csv,
                    "{},{},{},{:e}",
                    p.sigma,
                    names[k],
                    t.basis.display(&names),
                    t.coefficient
                )?;
            }
        }
    }
    ctx.write("t2.csv", csv)?;
    let support = |m: &MapSpec, k: usize| m.coords()[k].iter().map(|t| t.basis.clone()).collect::<Vec<_>>();
    let small = pts[1].outcome.as_ref().unwrap();
    let exact_support = (0..2).all(|k| {
        let mut a = support(&small.map, k);
        let mut b = support(&truth, k);
        a.sort();
        b.sort();
        a == b
    });
    let max_dev = small.deviations.iter().map(|d| d.deviation).fold(0.0, f64::max);
    c.check("sigma 1e-4: support equals {1, x^2, y} / {x}", exact_support);
    c.check(
        format!("sigma 1e-4: max deviation {max_dev:.2e} < 1e-2"),
        max_dev < 1e-2,
    );
    let big = &pts[2].outcome.as_ref().unwrap().map;
    let learned = support(big, 0);
    let superset = support(&truth, 0).iter().all(|b| learned.contains(b)) && learned.len() > 3;
    c.check(
        format!(
            "sigma 1e-3: x' support ({} terms) strictly contains the true one",
            learned.len()
        ),
        superset,
    );
    Ok(())
}

fn fig3(ctx: &Ctx, c: &mut Checks) -> Result<()> {
    let truth = henon(1.4, 0.3)?;
    let lib = build_library(2, 3, false)?;
    let sigmas: Vec<f64> = (10..=100).map(|k| k as f64 * 1e-5).collect();
    let pts = noise_sweep(
        &truth,
        &TRAIN_X0,
        TRAIN_SAMPLES,
        &sigmas,
        NOISE_SEED,
        &lib,
        &FitOptions::default(),
    )?;
    let artifacts = ["x*y", "x*y^2", "y^2", "y^3"];
    let mut csv = String::from("sigma,aggregate,xy,xy2,y2,y3\n");
    let mut agg = Vec::new();
    for p in &pts {
        let o = p
            .outcome
            .as_ref()
            .map_err(|e| anyhow::anyhow!("sigma {}: {e}", p.sigma))?;
        write!(csv, "{:e},{:e}", p.sigma, o.aggregate_deviation)?;
        for a in artifacts {
            write!(csv, ",{:e}", o.spurious_magnitude(0, a))?;
        }
        csv.push('\n');
        agg.push(o.aggregate_deviation);
    }
    ctx.write("fig3.csv", csv)?;
    let (first, last) = (agg[0], agg[agg.len() - 1]);
    println!("  aggregate deviation: {first:.3e} at 1e-4, {last:.3e} at 1e-3 (paper: upward trend)");
    c.check("aggregate deviation at 1e-3 exceeds the value at 1e-4", last > first);
    Ok(())
}

fn magnitudes() -> Vec<f64> {
    (1..=9).map(|k| 10f64.powf(-16.0 + 4.0 * k as f64 / 9.0)).collect()
}

fn sweep_both(ctx: &Ctx) -> Result<[Vec<SensitivityRow>; 2]> {
    let cfg = ctx.cipher_config()?;
    let m = magnitudes();
    Ok([
        key_sensitivity_sweep(&ctx.image, &cfg, &m, 0)?,
        key_sensitivity_sweep(&ctx.image, &cfg, &m, 1)?,
    ])
}

fn fmt_opt(v: Option<f64>, prec: usize) -> String {
    match v {
        Some(x) if x.is_infinite() => "inf".into(),
        Some(x) => format!("{x:.prec$}"),
        None => "n/a".into(),
    }
}

fn t3(ctx: &Ctx, c: &mut Checks) -> Result<()> {
    let [xs, ys] = sweep_both(ctx)?;
    let mut csv = String::from("magnitude,psnr_x0,psnr_y0\n");
    println!(
        "  {:>12}  {:>8}  {:>8}  (paper: about 10.2 dB throughout)",
        "magnitude", "x0", "y0"
    );
    for (x, y) in xs.iter().zip(&ys) {
        let (px, py) = (fmt_opt(x.psnr, 2), fmt_opt(y.psnr, 2));
        println!("  {:>12.6e}  {px:>8}  {py:>8}", x.magnitude);
        writeln!(csv, "{:e},{px},{py}", x.magnitude)?;
        for (coord, row) in [("x0", x), ("y0", y)] {
            let ok = row.psnr.is_some_and(|p| p < 12.0);
            c.check(
                format!("{coord} + {:.3e}: PSNR {} < 12 dB", row.magnitude, fmt_opt(row.psnr, 2)),
                ok,
            );
        }
    }
    ctx.write("t3.csv", csv)
}

fn in_bands(npcr: f64, uaci: f64) -> bool {
    (99.4..=99.8).contains(&npcr) && (33.0..=34.0).contains(&uaci)
}

fn t4(ctx: &Ctx, c: &mut Checks) -> Result<()> {
    let [xs, ys] = sweep_both(ctx)?;
    let mut csv = String::from("magnitude,npcr_x0,uaci_x0,npcr_y0,uaci_y0\n");
    println!(
        "  {:>12}  {:>8} {:>8}  {:>8} {:>8}  (paper: about 99.60 / 33.47)",
        "magnitude", "NPCR x0", "UACI x0", "NPCR y0", "UACI y0"
    );
    for (x, y) in xs.iter().zip(&ys) {
        let cells = [x.npcr, x.uaci, y.npcr, y.uaci].map(|v| fmt_opt(v, 4));
        println!(
            "  {:>12.6e}  {:>8} {:>8}  {:>8} {:>8}",
            x.magnitude, cells[0], cells[1], cells[2], cells[3]
        );
        writeln!(csv, "{:e},{}", x.magnitude, cells.join(","))?;
        for (coord, row) in [("x0", x), ("y0", y)] {
            let ok = matches!((row.npcr, row.uaci), (Some(n), Some(u)) if in_bands(n, u));
            c.check(
                format!(
                    "{coord} + {:.3e}: NPCR {} in [99.4, 99.8], UACI {} in [33, 34]",
                    row.magnitude,
                    fmt_opt(row.npcr, 4),
                    fmt_opt(row.uaci, 4)
                ),
                ok,
            );
        }
    }
    ctx.write("t4.csv", csv)
}

fn t5(ctx: &Ctx, c: &mut Checks) -> Result<()> {
    let cipher = encrypt(&ctx.image, &ctx.cipher_config()?)?;
    ctx.write("plain.pgm", to_pgm_bytes(&ctx.image))?;
    ctx.write("cipher.pgm", to_pgm_bytes(&cipher))?;
    ctx.write("plain_hist.csv", histogram_csv(&histogram(&ctx.image)))?;
    ctx.write("cipher_hist.csv", histogram_csv(&histogram(&cipher)))?;
    let (p, q) = (chi_square(&ctx.image), chi_square(&cipher));
    println!("  {:<10} {:>14} {:>8}  paper", "image", "chi2", "p");
    println!(
        "  {:<10} {:>14.4} {:>8.4}  135687.5703 / 0.0000",
        "plain", p.statistic, p.p_value
    );
    println!(
        "  {:<10} {:>14.4} {:>8.4}  212.7969 / 0.9746",
        "cipher", q.statistic, q.p_value
    );
    ctx.write(
        "t5.csv",
        format!(
            "image,chi2,p\nplain,{},{}\ncipher,{},{}\n",
            p.statistic, p.p_value, q.statistic, q.p_value
        ),
    )?;
    c.check("plaintext rejected as non-uniform", !p.pass);
    c.check(
        format!("cipher chi2 {:.2} < 293.25 with p {:.4} > 0.05", q.statistic, q.p_value),
        q.pass && q.p_value > 0.05,
    );
    Ok(())
}

fn t6(ctx: &Ctx, c: &mut Checks) -> Result<()> {
    let cipher = encrypt(&ctx.image, &ctx.cipher_config()?)?;
    let paper = [[0.9432, 0.9678, 0.9221], [0.0818, 0.0825, 0.0825]];
    let mut csv = String::from("image,direction,r\n");
    println!(
        "  {:<8} {:>11} {:>11} {:>11}",
        "image", "horizontal", "vertical", "diagonal"
    );
    for (k, (label, img)) in [("plain", &ctx.image), ("cipher", &cipher)].into_iter().enumerate() {
        let mut rs = Vec::new();
        for d in Direction::ALL {
            let r = adjacent_correlation(img, d, DEFAULT_PAIRS, PAIR_SEED)?;
            writeln!(csv, "{label},{},{r}", d.name())?;
            let pairs = correlation_pairs(img, d, DEFAULT_PAIRS, PAIR_SEED)?;
            ctx.write(&format!("{label}_{}.csv", d.name()), pairs_csv(&pairs))?;
            rs.push(r);
        }
        println!("  {label:<8} {:>11.4} {:>11.4} {:>11.4}", rs[0], rs[1], rs[2]);
        println!(
            "  {:<8} {:>11.4} {:>11.4} {:>11.4}",
            "  paper", paper[k][0], paper[k][1], paper[k][2]
        );
        if k == 0 {
            c.check(format!("plaintext horizontal r {:.4} >= 0.8", rs[0]), rs[0] >= 0.8);
        } else {
            for (d, r) in Direction::ALL.iter().zip(&rs) {
                c.check(format!("cipher {} |r| {:.4} <= 0.1", d.name(), r.abs()), r.abs() <= 0.1);
            }
        }
    }
    ctx.write("t6.csv", csv)
}

fn t7(ctx: &Ctx, c: &mut Checks) -> Result<()> {
    let cipher = encrypt(&ctx.image, &ctx.cipher_config()?)?;
    let (p, q) = (entropy(&ctx.image), entropy(&cipher));
    println!("  plain  {p:.4} bits (paper 6.7093)");
    println!("  cipher {q:.4} bits (paper 7.9976)");
    ctx.write("t7.csv", format!("image,entropy\nplain,{p}\ncipher,{q}\n"))?;
    c.check(format!("cipher entropy {q:.4} >= 7.99"), q >= 7.99);
    Ok(())
}

fn t8(ctx: &Ctx, c: &mut Checks) -> Result<()> {
    let rep = differential_attack_trials(&ctx.image, &ctx.cipher_config()?, 50, TRIAL_SEED)?;
    let mut csv = String::from("trial,pixel,npcr,uaci\n");
    for (k, t) in rep.trials.iter().enumerate() {
        writeln!(csv, "{k},{},{},{}", t.pixel, t.npcr, t.uaci)?;
    }
    ctx.write("t8.csv", csv)?;
    let (n, u) = (rep.npcr, rep.uaci);
    println!("  {:<6} {:>8} {:>8} {:>8}", "", "min", "max", "avg");
    println!(
        "  {:<6} {:>8.4} {:>8.4} {:>8.4}  paper 99.0265 / 99.9832 / 99.6556",
        "NPCR", n.min, n.max, n.avg
    );
    println!(
        "  {:<6} {:>8.4} {:>8.4} {:>8.4}  paper 31.1547 / 36.1297 / 33.5824",
        "UACI", u.min, u.max, u.avg
    );
    c.check(
        format!("avg NPCR {:.4} in [99.4, 99.9]", n.avg),
        (99.4..=99.9).contains(&n.avg),
    );
    c.check(
        format!("avg UACI {:.4} in [32.5, 34.5]", u.avg),
        (32.5..=34.5).contains(&u.avg),
    );
    c.check(format!("min NPCR {:.4} >= 98.5", n.min), n.min >= 98.5);
    Ok(())
}

fn t9(ctx: &Ctx, c: &mut Checks) -> Result<()> {
    let opts = FitOptions::default();
    let cases = [
        ("logistic3d", logistic3d(), vec![0.1, 0.2, 0.3], false, 3, 7.9970),
        ("lozi", lozi(1.7, 0.5)?, vec![0.1, 0.1], true, 2, 7.9974),
    ];
    let mut csv = String::from("system,model_error,cipher_entropy\n");
    for (name, truth, x0, abs, degree, paper_entropy) in cases {
        let lib = build_library(truth.dim(), degree, abs)?;
        let t = truth.iterate(&x0, TRAIN_SAMPLES, 500)?;
        let map = chaoskey::sindy_pi_fit(&t, &lib, &opts)?.map;
        let err = model_error(&map, &truth)?;
        let key = Key::new(x0.clone())?;
        let cipher = encrypt(&ctx.image, &CipherConfig::new(map.clone(), key, ROUNDS)?)?;
        let h = entropy(&cipher);
        print_map(name, &map);
        println!("    model error {err:.3e}, cipher entropy {h:.4} (paper {paper_entropy})");
        writeln!(csv, "{name},{err:e},{h}")?;
        c.check(format!("{name}: model error {err:.2e} < 1e-4"), err < 1e-4);
        c.check(format!("{name}: cipher entropy {h:.4} >= 7.99"), h >= 7.99);
    }
    ctx.write("t9.csv", csv)
}

fn s57(ctx: &Ctx, c: &mut Checks) -> Result<()> {
    let out = implicit_key_experiment(
        &ctx.image,
        &Key::new(KEY.to_vec())?,
        1e-4,
        NOISE_SEED,
        &TrainingSetup::default(),
    )?;
    print_map("clean map", &out.map_clean);
    print_map("noisy map (sigma 1e-4)", &out.map_noisy);
    println!("  NPCR {:.4} UACI {:.4} (paper 99.6231 / 33.4057)", out.npcr, out.uaci);
    ctx.write("s57.csv", format!("npcr,uaci\n{},{}\n", out.npcr, out.uaci))?;
    c.check(
        format!("NPCR {:.4} in [99.4, 99.8], UACI {:.4} in [33, 34]", out.npcr, out.uaci),
        in_bands(out.npcr, out.uaci),
    );
    Ok(())
}

type TargetFn = fn(&Ctx, &mut Checks) -> Result<()>;

fn table(t: Target) -> Vec<(&'static str, TargetFn)> {
    let all: Vec<(&'static str, TargetFn)> = vec![
        ("t1", t1),
        ("fig2", fig2),
        ("t2", t2),
        ("fig3", fig3),
        ("t3", t3),
        ("t4", t4),
        ("t5", t5),
        ("t6", t6),
        ("t7", t7),
        ("t8", t8),
        ("t9", t9),
        ("s57", s57),
    ];
    let name = match t {
        Target::All => return all,
        Target::T1 => "t1",
        Target::T2 => "t2",
        Target::T3 => "t3",
        Target::T4 => "t4",
        Target::T5 => "t5",
        Target::T6 => "t6",
        Target::T7 => "t7",
        Target::T8 => "t8",
        Target::T9 => "t9",
        Target::Fig2 => "fig2",
        Target::Fig3 => "fig3",
        Target::S57 => "s57",
    };
    all.into_iter().filter(|(n, _)| *n == name).collect()
}

fn load_image(path: Option<&Path>) -> Result<GrayImage> {
    match path {
        Some(p) => read_image(p),
        None => Ok(default_standin()),
    }
}

/// Runs the selected targets; returns whether every check passed.
pub fn run(args: &ReproduceArgs) -> Result<bool> {
    fs::create_dir_all(&args.workdir).with_context(|| format!("creating {}", args.workdir.display()))?;
    let ctx = Ctx {
        dir: args.workdir.clone(),
        image: load_image(args.image.as_deref())?,
    };
    let mut all_ok = true;
    for (name, f) in table(args.target) {
        println!("== {name}");
        let mut checks = Checks::new();
        match f(&ctx, &mut checks) {
            Ok(()) => {
                for (what, pass) in &checks.0 {
                    println!("  {} {what}", if *pass { "PASS" } else { "FAIL" });
                    all_ok &= pass;
                }
            }
            Err(e) => {
                println!("  ERROR {e:#}");
                all_ok = false;
            }
        }
    }
    Ok(all_ok)
}
