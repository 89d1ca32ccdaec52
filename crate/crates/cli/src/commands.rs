use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use chaoskey::analysis::{correlation_pairs, histogram, histogram_csv, pairs_csv, security_report, Direction};
use chaoskey::image::{read_pgm, to_pgm_bytes};
use chaoskey::maps::{henon, logistic3d, lozi};
use chaoskey::model::{format_equations, parse_model, to_model_string};
use chaoskey::trajio::{from_csv, to_csv};
use chaoskey::{build_library, decrypt, encrypt, sindy_pi_fit, CipherConfig, FitOptions, GrayImage, Key, MapSpec};

use crate::{usage, AnalyzeArgs, CipherArgs, GenerateArgs, IdentifyArgs, MapName, MapSource};

pub fn load_map(name: Option<MapName>, source: &MapSource) -> Result<MapSpec> {
    if let Some(path) = &source.model {
        if source.a.is_some() || source.b.is_some() {
            return Err(usage("--a/--b cannot be combined with --model"));
        }
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        return parse_model(&text).with_context(|| format!("parsing {}", path.display()));
    }
    let map = match name {
        None => return Err(usage("name a built-in map or pass --model")),
        Some(MapName::Henon) => henon(source.a.unwrap_or(1.4), source.b.unwrap_or(0.3))?,
        Some(MapName::Lozi) => lozi(source.a.unwrap_or(1.7), source.b.unwrap_or(0.5))?,
        Some(MapName::Logistic3d) => {
            if source.a.is_some() || source.b.is_some() {
                return Err(usage("logistic3d takes no --a/--b parameters"));
            }
            logistic3d()
        }
    };
    Ok(map)
}

fn parse_state(text: &str, dim: usize, what: &str) -> Result<Key> {
    let key: Key = text.parse().map_err(|e| usage(format!("{what}: {e}")))?;
    if key.dim() != dim {
        return Err(usage(format!(
            "{what} has {} coordinates but the map has dimension {dim}",
            key.dim()
        )));
    }
    Ok(key)
}

fn default_x0(dim: usize) -> String {
    match dim {
        3 => "0.1,0.2,0.3".to_string(),
        d => vec!["0.1"; d].join(","),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

pub fn read_image(path: &Path) -> Result<GrayImage> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    read_pgm(&bytes).with_context(|| format!("parsing {}", path.display()))
}

pub fn generate(args: &GenerateArgs) -> Result<()> {
    let map = load_map(args.map, &args.source)?;
    let x0_text = args.x0.clone().unwrap_or_else(|| default_x0(map.dim()));
    let x0 = parse_state(&x0_text, map.dim(), "--x0")?;
    if args.n == 0 {
        return Err(usage("--n must be at least 1"));
    }
    if args.sigma.is_nan() || args.sigma < 0.0 || args.sigma.is_infinite() {
        return Err(usage("--sigma must be a finite non-negative number"));
    }
    let mut t = map.iterate(x0.values(), args.n, args.burn_in)?;
    if args.sigma > 0.0 {
        t = t.add_gaussian_noise(args.sigma, args.seed)?;
    }
    let csv = to_csv(&t);
    match &args.out {
        Some(p) => write_file(p, csv.as_bytes())?,
        None => std::io::stdout().write_all(csv.as_bytes())?,
    }
    let bounds = t
        .bounds()
        .iter()
        .map(|(lo, hi)| format!("[{lo:.6}, {hi:.6}]"))
        .collect::<Vec<_>>()
        .join(" ");
    eprintln!("{} states, bounds {bounds}", t.len());
    Ok(())
}

pub fn identify(args: &IdentifyArgs) -> Result<()> {
    let text = fs::read_to_string(&args.data).with_context(|| format!("reading {}", args.data.display()))?;
    let t = from_csv(&text).with_context(|| format!("parsing {}", args.data.display()))?;
    let mut lib = build_library(t.dim(), args.max_degree, args.abs)?;
    if args.composite {
        lib = lib.with_composite_lhs();
    }
    let opts = FitOptions {
        lambda: args.lambda,
        significance: args.significance,
        max_iter: args.max_iter,
    };
    let res = sindy_pi_fit(&t, &lib, &opts).context("identification failed")?;
    for (eq, fit) in format_equations(&res.map, Some(args.digits)).iter().zip(&res.fits) {
        println!("{eq}    (residual {:.3e})", fit.residual);
    }
    if let Some(p) = &args.out {
        write_file(p, to_model_string(&res.map).as_bytes())?;
    }
    Ok(())
}

pub fn crypt(args: &CipherArgs, forward: bool) -> Result<()> {
    let map = load_map(Some(args.map), &args.source)?;
    let key = parse_state(&args.key, map.dim(), "--key")?;
    if args.rounds < 2 || !args.rounds.is_multiple_of(2) {
        return Err(usage("--rounds must be an even number >= 2"));
    }
    let cfg = CipherConfig::new(map, key, args.rounds)?;
    let img = read_image(&args.input)?;
    let out = if forward {
        encrypt(&img, &cfg)?
    } else {
        decrypt(&img, &cfg)?
    };
    write_file(&args.out, &to_pgm_bytes(&out))
}

fn emit_csvs(dir: &Path, label: &str, img: &GrayImage, args: &AnalyzeArgs, scatter: bool) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    if scatter {
        for d in Direction::ALL {
            let pairs = correlation_pairs(img, d, args.pairs, args.seed)?;
            write_file(
                &dir.join(format!("{label}_{}.csv", d.name())),
                pairs_csv(&pairs).as_bytes(),
            )?;
        }
    } else {
        write_file(
            &dir.join(format!("{label}_hist.csv")),
            histogram_csv(&histogram(img)).as_bytes(),
        )?;
    }
    Ok(())
}

pub fn analyze(args: &AnalyzeArgs) -> Result<()> {
    let plain = read_image(&args.plain)?;
    let cipher = args.cipher.as_deref().map(read_image).transpose()?;
    if let Some(c) = &cipher {
        if !plain.same_shape(c) {
            return Err(usage(format!(
                "image sizes differ: {}x{} vs {}x{}",
                plain.width(),
                plain.height(),
                c.width(),
                c.height()
            )));
        }
    }
    let report = security_report(Some(&plain), cipher.as_ref(), args.pairs, args.seed)?;
    for (dir, scatter) in [(&args.hist, false), (&args.scatter, true)] {
        if let Some(dir) = dir {
            emit_csvs(dir, "plain", &plain, args, scatter)?;
            if let Some(c) = &cipher {
                emit_csvs(dir, "cipher", c, args, scatter)?;
            }
        }
    }
    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    match &args.out {
        Some(p) => write_file(p, json.as_bytes()),
        None => Ok(std::io::stdout().write_all(json.as_bytes())?),
    }
}
