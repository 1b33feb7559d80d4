//! One function per subcommand: each turns a resolved configuration into a
//! JSON result and a list of artifacts.

use serde_json::{json, Value};

use gaborlab::bspline_dual::{bspline_compact_dual, BlockSize};
use gaborlab::compact::{janssen_report, CompactSignal};
use gaborlab::export;
use gaborlab::frame::{canonical_dual, canonical_tight, frame_bounds, reconstruct};
use gaborlab::hrt::{
    classify_configuration, extension_integral, extension_integral_adaptive, independence_probe,
    normalize_configuration, AdaptiveOptions, ExtensionBase, ExtensionField, FieldGrid,
};
use gaborlab::region::{classify_point_g2, regions_g2};
use gaborlab::scan::{density_agreement, g2_agreement, scan_frame_set_with, ScanOptions};
use gaborlab::wilson::{
    build_wilson_classical, build_wilson_general, wilson_lattice, wilson_onb_report, wilson_window_from,
    zak_onb_criterion, WilsonReading,
};
use gaborlab::{make_lattice, sample_window, stft, stft_energy, stft_invert, Signal, SnappedLattice, TFPoint, WindowSpec};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub struct Output {
    pub result: Value,
    pub artifacts: Vec<(String, Vec<u8>)>,
}

/// Command name, one-line description and its own keys.
pub type CommandSpec = (&'static str, &'static str, &'static [(&'static str, &'static str)]);

pub const COMMANDS: &[CommandSpec] = &[
    (
        "stft",
        "short-time Fourier transform: isometry and inversion checks",
        &[
            ("signal", "window spec of the analysed signal (default: gaussian)"),
            ("synthesis", "window spec used for inversion (default: --window)"),
            ("csv", "also write the full transform as CSV (true/false)"),
        ],
    ),
    (
        "framebounds",
        "optimal frame bounds of a Gabor system",
        &[("alpha", "time step"), ("beta", "frequency step"), ("snap_tol", "largest accepted snap error")],
    ),
    (
        "dual",
        "canonical dual window",
        &[("alpha", "time step"), ("beta", "frequency step"), ("snap_tol", "largest accepted snap error")],
    ),
    (
        "tight",
        "canonical tight window",
        &[("alpha", "time step"), ("beta", "frequency step"), ("snap_tol", "largest accepted snap error")],
    ),
    (
        "janssen",
        "Janssen duality residual of two compactly supported windows",
        &[
            ("dual", "window spec of the candidate dual"),
            ("alpha", "time step"),
            ("beta", "frequency step"),
            ("points", "evaluation points per period"),
        ],
    ),
    (
        "bspline-dual",
        "compactly supported dual of a B-spline",
        &[
            ("order", "B-spline order N (default 2)"),
            ("alpha", "time step"),
            ("beta", "frequency step"),
            ("block", "block size m: auto, 1, 2 or 3"),
        ],
    ),
    (
        "scan",
        "frame-set map over a rectangle of (alpha, beta)",
        &[
            ("alpha", "alpha range lo..hi (default 0..2)"),
            ("beta", "beta range lo..hi (default 0..2)"),
            ("res", "cells per axis (default 32)"),
            ("snap_tol", "cells beyond this snap error are marked unsnappable"),
        ],
    ),
    (
        "wilson",
        "Wilson system of a window and its orthonormality checks",
        &[
            ("beta", "time step of the source Gabor system (default 1/2)"),
            ("variant", "classical or general (default: classical at 1/2)"),
            ("reading", "time or frequency: which step of the source system is beta"),
            ("tight", "replace the window by its canonical tight window (default true)"),
            ("atoms", "write every atom as CSV plus a manifest (true/false)"),
        ],
    ),
    (
        "hrt-gram",
        "Gramian and independence probe of a finite time-frequency set",
        &[("points", "points as \"a,b;a,b;...\"")],
    ),
    (
        "hrt-extension",
        "extension function F of a three-point base",
        &[
            ("base", "base points (default \"0,0;0,1;1,0\")"),
            ("domain", "square lo..hi or auto (default auto)"),
            ("res", "cells per axis for a fixed domain (default 240)"),
        ],
    ),
    (
        "classify",
        "structure labels of a point set, or the region of (alpha, beta) for the hat window",
        &[
            ("points", "points as \"a,b;a,b;...\""),
            ("lattice", "affine lattice \"a11,a12;a21,a22;z1,z2\" for the subset test"),
            ("alpha", "time step"),
            ("beta", "frequency step"),
        ],
    ),
];

pub fn run_command(cfg: &RunConfig) -> CliResult<Output> {
    match cfg.command.as_str() {
        "stft" => cmd_stft(cfg),
        "framebounds" => cmd_framebounds(cfg),
        "dual" => cmd_dual(cfg, false),
        "tight" => cmd_dual(cfg, true),
        "janssen" => cmd_janssen(cfg),
        "bspline-dual" => cmd_bspline_dual(cfg),
        "scan" => cmd_scan(cfg),
        "wilson" => cmd_wilson(cfg),
        "hrt-gram" => cmd_hrt_gram(cfg),
        "hrt-extension" => cmd_hrt_extension(cfg),
        "classify" => cmd_classify(cfg),
        other => Err(CliError::validation("unknown_command", format!("unknown command {other}"))),
    }
}

fn snap_json(s: &SnappedLattice) -> Value {
    json!({
        "alpha_target": s.alpha_target,
        "beta_target": s.beta_target,
        "alpha": s.lattice.alpha(),
        "beta": s.lattice.beta(),
        "a": s.lattice.a(),
        "b": s.lattice.b(),
        "alpha_error": s.alpha_error,
        "beta_error": s.beta_error,
    })
}

fn snapped(cfg: &RunConfig) -> CliResult<SnappedLattice> {
    let grid = cfg.grid()?;
    Ok(make_lattice(grid, cfg.number("alpha")?, cfg.number("beta")?, cfg.opt_number("snap_tol")?)?)
}

fn signal_csv(s: &Signal) -> Vec<u8> {
    let rows = s.values().iter().enumerate().map(|(i, v)| {
        vec![
            export::csv_number(s.grid().x(i)),
            export::csv_number(v.re),
            export::csv_number(v.im),
        ]
    });
    export::csv(&["x", "re", "im"], rows).into_bytes()
}

fn cmd_stft(cfg: &RunConfig) -> CliResult<Output> {
    let grid = cfg.grid()?;
    let g = sample_window(&cfg.window()?, &grid)?;
    let f_spec: WindowSpec = match cfg.get("signal") {
        Some(_) => cfg.window_at("signal")?,
        None => WindowSpec::gaussian(),
    };
    let h = match cfg.get("synthesis") {
        Some(_) => sample_window(&cfg.window_at("synthesis")?, &grid)?,
        None => g.clone(),
    };
    let f = sample_window(&f_spec, &grid)?;
    let v = stft(&f, &g)?;
    let energy = stft_energy(&v);
    let expected = f.norm_sqr() * g.norm_sqr();
    let inverted = stft_invert(&v, &g, &h)?;
    let l = grid.len();
    let peak = v.values().iter().map(|z| z.norm()).fold(0.0, f64::max);
    // Frequency increases upwards, time to the right.
    let mut pixels = Vec::with_capacity(l * l);
    for row in 0..l {
        let k = l - 1 - row;
        for n in 0..l {
            pixels.push(export::intensity(v.get(n, k).norm(), peak));
        }
    }
    let mut artifacts = vec![("stft.pgm".to_string(), export::pgm(l, l, &pixels))];
    if cfg.flag("csv", false)? {
        let rows = (0..l).flat_map(|n| {
            let v = &v;
            (0..l).map(move |k| {
                let z = v.get(n, k);
                vec![
                    export::csv_number(v.time(n)),
                    export::csv_number(v.frequency(k)),
                    export::csv_number(z.re),
                    export::csv_number(z.im),
                ]
            })
        });
        artifacts.push(("stft.csv".into(), export::csv(&["time", "frequency", "re", "im"], rows).into_bytes()));
    }
    Ok(Output {
        result: json!({
            "energy": energy,
            "expected_energy": expected,
            "isometry_error": (energy - expected).abs() / expected,
            "inversion_residual": inverted.relative_error(&f)?,
            "window_overlap": h.inner(&g)?,
        }),
        artifacts,
    })
}

fn cmd_framebounds(cfg: &RunConfig) -> CliResult<Output> {
    let s = snapped(cfg)?;
    let g = sample_window(&cfg.window()?, s.lattice.grid())?;
    let report = frame_bounds(&g, &s.lattice)?;
    Ok(Output {
        result: json!({ "snap": snap_json(&s), "bounds": report }),
        artifacts: Vec::new(),
    })
}

fn cmd_dual(cfg: &RunConfig, tight: bool) -> CliResult<Output> {
    let s = snapped(cfg)?;
    let lat = s.lattice;
    let g = sample_window(&cfg.window()?, lat.grid())?;
    let source = frame_bounds(&g, &lat)?;
    let h = if tight { canonical_tight(&g, &lat)? } else { canonical_dual(&g, &lat)? };
    let bounds = frame_bounds(&h, &lat)?;
    let (synthesis, name) = if tight { (&h, "tight") } else { (&g, "dual") };
    let probe = g.tf_shift(TFPoint::new(0.3, -0.7)).add(&g.tf_shift(TFPoint::new(-1.1, 0.4)))?;
    let rec = reconstruct(&probe, synthesis, &h, &lat)?;
    Ok(Output {
        result: json!({
            "snap": snap_json(&s),
            "window_bounds": source,
            "bounds": bounds,
            "reconstruction_residual": rec.relative_error(&probe)?,
            "norm": h.norm(),
        }),
        artifacts: vec![(format!("{name}.csv"), signal_csv(&h))],
    })
}

fn cmd_janssen(cfg: &RunConfig) -> CliResult<Output> {
    let g = CompactSignal::from_window(&cfg.window()?)?;
    let h = CompactSignal::from_window(&cfg.window_at("dual")?)?;
    let (alpha, beta) = (cfg.number("alpha")?, cfg.number("beta")?);
    let points = cfg.count_or("points", gaborlab::compact::DEFAULT_POINTS)?;
    let r = janssen_report(&g, &h, alpha, beta, points)?;
    Ok(Output {
        result: json!({ "alpha": alpha, "beta": beta, "janssen": r }),
        artifacts: Vec::new(),
    })
}

fn block_size(cfg: &RunConfig) -> CliResult<BlockSize> {
    match cfg.get("block") {
        None | Some("auto") => Ok(BlockSize::Auto),
        Some(v) => v
            .parse()
            .map(BlockSize::Fixed)
            .map_err(|_| CliError::validation("invalid_argument", format!("--block = {v:?}: expected auto or an integer"))),
    }
}

fn cmd_bspline_dual(cfg: &RunConfig) -> CliResult<Output> {
    let n = cfg.count_or("order", 2)? as u32;
    let (alpha, beta) = (cfg.number("alpha")?, cfg.number("beta")?);
    let cd = bspline_compact_dual(n, alpha, beta, block_size(cfg)?)?;
    let g = CompactSignal::from_window(&WindowSpec::bspline(n)?)?;
    let j = janssen_report(&g, &cd.dual, alpha, beta, gaborlab::compact::DEFAULT_POINTS)?;
    let (lo, hi) = cd.support;
    let pts = 2048usize;
    let rows = (0..=pts).map(|i| {
        let x = lo + (hi - lo) * i as f64 / pts as f64;
        vec![export::csv_number(x), export::csv_number(cd.dual.eval(x))]
    });
    let region = (n == 2).then(|| classify_point_g2(alpha, beta));
    Ok(Output {
        result: json!({
            "order": n,
            "alpha": alpha,
            "beta": beta,
            "m": cd.m,
            "support": [lo, hi],
            "max_condition": cd.max_condition,
            "attempts": cd.attempts,
            "janssen": j,
            "region": region,
        }),
        artifacts: vec![("compact_dual.csv".into(), export::csv(&["x", "h"], rows).into_bytes())],
    })
}

fn cmd_scan(cfg: &RunConfig) -> CliResult<Output> {
    let grid = cfg.grid()?;
    let spec = cfg.window()?;
    let alpha = if cfg.get("alpha").is_some() { cfg.range("alpha")? } else { gaborlab::scan::Range { lo: 0.0, hi: 2.0 } };
    let beta = if cfg.get("beta").is_some() { cfg.range("beta")? } else { gaborlab::scan::Range { lo: 0.0, hi: 2.0 } };
    let res = cfg.count_or("res", 32)?;
    let options = ScanOptions {
        snap_tolerance: cfg.opt_number("snap_tol")?,
        ..ScanOptions::default()
    };
    let map = scan_frame_set_with(&spec, alpha, beta, res, grid, options)?;
    let frames = map.cells.iter().filter(|c| c.is_frame() == Some(true)).count();
    let unsnappable = map.cells.iter().filter(|c| c.unsnappable.is_some()).count();
    let hat = map.cells.iter().any(|c| c.label.is_some());
    Ok(Output {
        result: json!({
            "cells": map.cells.len(),
            "frames": frames,
            "unsnappable": unsnappable,
            "max_lower_bound": map.max_lower_bound(),
            "region_agreement": hat.then(|| g2_agreement(&map)),
            "density_agreement": density_agreement(&map, 0.9, 1.1),
        }),
        artifacts: vec![
            ("scan.csv".into(), map.to_csv().into_bytes()),
            ("scan.pgm".into(), map.to_pgm(None)),
        ],
    })
}

fn cmd_wilson(cfg: &RunConfig) -> CliResult<Output> {
    let grid = cfg.grid()?;
    let beta = cfg.number_or("beta", 0.5)?;
    let reading = match cfg.get("reading") {
        None | Some("time") => WilsonReading::TimeStep,
        Some("frequency") => WilsonReading::FrequencyStep,
        Some(v) => return Err(CliError::validation("invalid_argument", format!("--reading = {v:?}: expected time or frequency"))),
    };
    let classical = match cfg.get("variant") {
        None => beta == 0.5 && reading == WilsonReading::TimeStep,
        Some("classical") => true,
        Some("general") => false,
        Some(v) => return Err(CliError::validation("invalid_argument", format!("--variant = {v:?}: expected classical or general"))),
    };
    if classical && beta != 0.5 {
        return Err(CliError::validation("invalid_argument", "the classical variant needs beta = 1/2"));
    }
    let raw = sample_window(&cfg.window()?, &grid)?;
    let g = if cfg.flag("tight", true)? { wilson_window_from(&raw, beta, reading)? } else { raw };
    let lat = wilson_lattice(grid, beta, reading)?;
    let gabor = frame_bounds(&g, &lat)?;
    let w = if classical { build_wilson_classical(&g)? } else { build_wilson_general(&g, beta, reading)? };
    let report = wilson_onb_report(&w);
    let zak = if beta == 0.5 { zak_onb_criterion(&g).ok() } else { None };
    let mut artifacts = vec![("wilson_window.csv".to_string(), signal_csv(&g))];
    if cfg.flag("atoms", false)? {
        for (i, ix) in w.indices().iter().enumerate() {
            artifacts.push((format!("wilson_atoms/{}", gaborlab::wilson::atom_file_name(*ix)), w.atom_csv(i).into_bytes()));
        }
        let manifest = serde_json::to_string_pretty(&w.manifest()).expect("plain json");
        artifacts.push(("wilson_atoms/manifest.json".into(), manifest.into_bytes()));
    }
    Ok(Output {
        result: json!({
            "beta": beta,
            "variant": w.variant(),
            "reading": reading,
            "atoms": w.len(),
            "gabor_bounds": gabor,
            "report": report,
            "zak_onb": zak,
        }),
        artifacts,
    })
}

fn cmd_hrt_gram(cfg: &RunConfig) -> CliResult<Output> {
    let grid = cfg.grid()?;
    let g = sample_window(&cfg.window()?, &grid)?;
    let config = cfg.points("points")?;
    let probe = independence_probe(&g, &config)?;
    let normal = normalize_configuration(&config).ok();
    Ok(Output {
        result: json!({
            "points": config.points(),
            "labels": classify_configuration(&config, None),
            "normalization": normal.map(|(c, r)| json!({ "points": c.points(), "record": r })),
            "gramian": probe.gramian,
            "witness": { "coefficients": probe.coefficients, "residual": probe.residual },
        }),
        artifacts: Vec::new(),
    })
}

fn field_artifacts(field: &ExtensionField) -> Vec<(String, Vec<u8>)> {
    vec![
        ("extension.csv".into(), field.to_csv().into_bytes()),
        ("extension.pgm".into(), field.to_pgm()),
    ]
}

fn cmd_hrt_extension(cfg: &RunConfig) -> CliResult<Output> {
    let grid = cfg.grid()?;
    let g = sample_window(&cfg.window()?, &grid)?;
    let base = match cfg.get("base") {
        Some(_) => cfg.points("base")?,
        None => gaborlab::hrt::Configuration::from_pairs(&[(0.0, 0.0), (0.0, 1.0), (1.0, 0.0)])?,
    };
    if base.len() != 3 {
        return Err(CliError::validation("invalid_argument", "--base needs exactly three points"));
    }
    let (base, record) = normalize_configuration(&base)?;
    let ordered = gaborlab::hrt::Configuration::new(record.base.iter().map(|&i| base.points()[i]).collect())?;
    let (integral, coverage, field) = match cfg.get("domain") {
        None | Some("auto") => {
            let (i, f) = extension_integral_adaptive(&g, &ordered, AdaptiveOptions::default())?;
            (Some(i), None, f)
        }
        Some(_) => {
            let r = cfg.range("domain")?;
            let res = cfg.count_or("res", 240)?;
            let fg = FieldGrid {
                a_lo: r.lo,
                a_hi: r.hi,
                b_lo: r.lo,
                b_hi: r.hi,
                na: res,
                nb: res,
            };
            let field = gaborlab::hrt::extension_field(&g, &ordered, fg)?;
            match extension_integral(&field) {
                Ok(i) => (Some(i), None, field),
                Err(e) => (None, Some(e.to_string()), field),
            }
        }
    };
    let eb = ExtensionBase::new(&g, &ordered)?;
    let at_base: Vec<f64> = ordered.points().iter().map(|p| eb.value(*p)).collect();
    Ok(Output {
        result: json!({
            "base": ordered.points(),
            "normalization": record,
            "domain": field.grid,
            "integral": integral,
            "coverage_error": coverage,
            "min": field.min(),
            "max": field.max(),
            "boundary_max": field.boundary_max(),
            "value_at_base": at_base,
        }),
        artifacts: field_artifacts(&field),
    })
}

fn cmd_classify(cfg: &RunConfig) -> CliResult<Output> {
    if cfg.get("points").is_some() {
        let config = cfg.points("points")?;
        let lattice = cfg.lattice("lattice")?;
        let normal = normalize_configuration(&config).ok();
        return Ok(Output {
            result: json!({
                "points": config.points(),
                "labels": classify_configuration(&config, lattice.as_ref()),
                "normalization": normal.map(|(c, r)| json!({ "points": c.points(), "record": r })),
            }),
            artifacts: Vec::new(),
        });
    }
    if cfg.get("alpha").is_none() && cfg.get("beta").is_none() {
        return Err(CliError::validation("missing_argument", "classify needs --points or --alpha and --beta"));
    }
    let (alpha, beta) = (cfg.number("alpha")?, cfg.number("beta")?);
    let label = classify_point_g2(alpha, beta);
    Ok(Output {
        result: json!({
            "alpha": alpha,
            "beta": beta,
            "label": label,
            "class": label.class(),
            "regions": regions_g2(alpha, beta),
            "dual_block_size": label.dual_block_size(),
        }),
        artifacts: Vec::new(),
    })
}
