use std::io::Write;
use std::path::Path;

use tappy_core::analysis::{analyze as run_analysis, lookup_device, out_of_bounds, resolve_device};
use tappy_core::device::{DeviceProfile, DeviceRegistry};
use tappy_core::layout::{parse_document, ElementSelection};
use tappy_core::model::{min_square_size_for_rate, min_width_for_rate, predict_mm, ModelCoefficients, ModelError};
use tappy_core::report::{percent, render_report};
use tappy_service::{AppState, ServiceConfig};

use crate::args::{AnalyzeArgs, PredictArgs, ServeArgs, SizeForArgs};

pub const EXIT_OK: u8 = 0;
pub const EXIT_BELOW_THRESHOLD: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

macro_rules! fail {
    ($err:expr, $($arg:tt)*) => {{
        let _ = writeln!($err, "error: {}", format_args!($($arg)*));
        return EXIT_USAGE;
    }};
}

fn load_registry(path: Option<&Path>) -> Result<DeviceRegistry, String> {
    match path {
        Some(p) => DeviceRegistry::from_path(p).map_err(|e| e.to_string()),
        None => Ok(DeviceRegistry::builtin()),
    }
}

fn ceil_to(value: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    (value * scale).ceil() / scale
}

pub fn analyze(args: &AnalyzeArgs, devices: Option<&Path>, out: &mut impl Write, err: &mut impl Write) -> u8 {
    let registry = match load_registry(devices) {
        Ok(r) => r,
        Err(e) => fail!(err, "{e}"),
    };
    let bytes = match std::fs::read(&args.file) {
        Ok(b) => b,
        Err(e) => fail!(err, "cannot read {}: {e}", args.file.display()),
    };
    let doc = match parse_document(&bytes) {
        Ok(d) => d,
        Err(e) => fail!(err, "{}: {e}", args.file.display()),
    };
    let profile = match resolve_device(&registry, args.device.as_deref(), &doc) {
        Ok(p) => p,
        Err(e) => fail!(err, "{e}"),
    };
    let selection = ElementSelection {
        include_containers: args.all,
        name_glob: args.select.clone(),
        explicit_only: args.explicit_only,
    };
    let report = match run_analysis(&doc, profile, args.threshold, &selection, &ModelCoefficients::default()) {
        Ok(r) => r,
        Err(e) => fail!(err, "{e}"),
    };
    let report = if args.reproducible { report } else { report.stamped_now() };

    for node in out_of_bounds(&doc, profile) {
        let _ = writeln!(
            err,
            "warning: node \"{}\" extends beyond the {} screen ({}x{})",
            node.id, profile.id, profile.logical_width, profile.logical_height
        );
    }
    if out.write_all(render_report(&report, args.format.into()).as_bytes()).is_err() {
        return EXIT_USAGE;
    }
    if report.all_passed() {
        EXIT_OK
    } else {
        EXIT_BELOW_THRESHOLD
    }
}

pub fn predict(args: &PredictArgs, devices: Option<&Path>, out: &mut impl Write, err: &mut impl Write) -> u8 {
    let profile: Option<DeviceProfile> = match &args.device {
        Some(id) => {
            let registry = match load_registry(devices) {
                Ok(r) => r,
                Err(e) => fail!(err, "{e}"),
            };
            match lookup_device(&registry, id) {
                Ok(p) => Some(p.clone()),
                Err(e) => fail!(err, "{e}"),
            }
        }
        None => None,
    };

    let (sizes_px, (w_mm, h_mm)) = match (&args.px, &args.mm, &profile) {
        (Some(px), _, Some(p)) => {
            let conv = p.px_to_mm(px[0]).and_then(|w| Ok((w, p.px_to_mm(px[1])?)));
            match conv {
                Ok(mm) => (Some((px[0], px[1])), mm),
                Err(e) => fail!(err, "{e}"),
            }
        }
        (None, Some(mm), p) => {
            let px = p
                .as_ref()
                .and_then(|p| Some((p.mm_to_px(mm[0]).ok()?, p.mm_to_px(mm[1]).ok()?)));
            (px, (mm[0], mm[1]))
        }
        _ => fail!(err, "give --mm W H, or --px W H together with --device"),
    };

    let prediction = match predict_mm(w_mm, h_mm, &ModelCoefficients::default()) {
        Ok(p) => p,
        Err(e) => fail!(err, "{e}"),
    };

    let mut text = String::new();
    if let Some(p) = &profile {
        text.push_str(&format!("Device:       {} ({})\n", p.id, p.display_name));
    }
    match sizes_px {
        Some((w_px, h_px)) => {
            text.push_str(&format!("Width:        {w_px:.2} px = {w_mm:.3} mm\n"));
            text.push_str(&format!("Height:       {h_px:.2} px = {h_mm:.3} mm\n"));
        }
        None => {
            text.push_str(&format!("Width:        {w_mm:.3} mm\n"));
            text.push_str(&format!("Height:       {h_mm:.3} mm\n"));
        }
    }
    text.push_str(&format!("Sigma x:      {:.3} mm\n", prediction.sigma_x_mm));
    text.push_str(&format!("Sigma y:      {:.3} mm\n", prediction.sigma_y_mm));
    text.push_str(&format!("Success rate: {}\n", percent(prediction.success_rate)));
    match out.write_all(text.as_bytes()) {
        Ok(()) => EXIT_OK,
        Err(_) => EXIT_USAGE,
    }
}

pub fn size_for(args: &SizeForArgs, devices: Option<&Path>, out: &mut impl Write, err: &mut impl Write) -> u8 {
    let coeffs = ModelCoefficients::default();
    let profile = match &args.device {
        Some(id) => {
            let registry = match load_registry(devices) {
                Ok(r) => r,
                Err(e) => fail!(err, "{e}"),
            };
            match lookup_device(&registry, id) {
                Ok(p) => Some(p.clone()),
                Err(e) => fail!(err, "{e}"),
            }
        }
        None => None,
    };
    let solved = match args.height_mm {
        Some(h) => min_width_for_rate(args.rate, h, &coeffs),
        None => min_square_size_for_rate(args.rate, &coeffs),
    };
    let side = match solved {
        Ok(s) => s,
        Err(ModelError::UnattainableRate { target, ceiling }) => fail!(
            err,
            "success rate {target} is unattainable: the model never exceeds {ceiling:.6}"
        ),
        Err(e) => fail!(err, "{e}"),
    };

    let mut text = format!("Target rate:  {}\n", percent(args.rate));
    let px = |mm: f64, p: &DeviceProfile| p.mm_to_px(mm).map(|v| ceil_to(v, 2)).unwrap_or(f64::NAN);
    match args.height_mm {
        Some(h) => {
            text.push_str(&format!("Height:       {h:.3} mm\n"));
            text.push_str(&format!("Min width:    {:.3} mm\n", ceil_to(side, 3)));
            if let Some(p) = &profile {
                text.push_str(&format!("On {}: {:.2} x {:.2} px\n", p.id, px(side, p), px(h, p)));
            }
        }
        None => {
            text.push_str(&format!("Min square:   {:.3} mm\n", ceil_to(side, 3)));
            if let Some(p) = &profile {
                let s = px(side, p);
                text.push_str(&format!("On {}: {s:.2} x {s:.2} px\n", p.id));
            }
        }
    }
    match out.write_all(text.as_bytes()) {
        Ok(()) => EXIT_OK,
        Err(_) => EXIT_USAGE,
    }
}

pub fn devices(devices: Option<&Path>, out: &mut impl Write, err: &mut impl Write) -> u8 {
    let registry = match load_registry(devices) {
        Ok(r) => r,
        Err(e) => fail!(err, "{e}"),
    };
    let id_w = registry.iter().map(|p| p.id.len()).max().unwrap_or(0);
    let name_w = registry.iter().map(|p| p.display_name.chars().count()).max().unwrap_or(0);
    let mut text = String::new();
    for p in registry.iter() {
        text.push_str(&format!(
            "{:<id_w$}  {:<name_w$}  {:>7} ppi  @{}x  {}x{}\n",
            p.id, p.display_name, p.ppi, p.scale_factor, p.logical_width, p.logical_height
        ));
    }
    match out.write_all(text.as_bytes()) {
        Ok(()) => EXIT_OK,
        Err(_) => EXIT_USAGE,
    }
}

pub fn serve(args: &ServeArgs, devices: Option<&Path>, err: &mut impl Write) -> u8 {
    let registry = match load_registry(devices) {
        Ok(r) => r,
        Err(e) => fail!(err, "{e}"),
    };
    let mut config = match ServiceConfig::with_port(args.port) {
        Ok(c) => c,
        Err(e) => fail!(err, "{e}"),
    };
    if !args.cors_origins.is_empty() {
        config.cors_origins = args.cors_origins.clone();
    }
    let _ = tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .try_init();
    let runtime = match tokio::runtime::Runtime::new() {
        Ok(rt) => rt,
        Err(e) => fail!(err, "cannot start runtime: {e}"),
    };
    match runtime.block_on(tappy_service::serve(config, AppState::new(registry))) {
        Ok(()) => EXIT_OK,
        Err(e) => fail!(err, "{e}"),
    }
}
