//! Run configuration, the anisotropy/surface mini-language, and the
//! versioned report document (JSON primary, CSV projection).
//!
//! The mini-language is a compact text form for the supported anisotropy
//! and surface families:
//!
//! ```text
//! F specs:        const:c=1.0
//!                 linear:a=[0.3,0,0]
//!                 norm:B=[2,1,1]
//!                 quad:c=0.2,d=[0,0,1]
//! surface specs:  sphere:R=1
//!                 ellipsoid:a=1,b=1,c=2          (n = 1: ellipsoid:a=2,b=1)
//!                 wulff:F=<F spec>
//!                 radial:eps=[0.05,0.03],poly=[200,012]
//! modifiers:      *scale=2        *translate=[0.1,0,0]
//! ```
//!
//! Radial `poly` entries are digit strings, one digit per ambient
//! coordinate: `012` means the monomial x₀⁰x₁¹x₂², so
//! `radial:eps=[0.05],poly=[012]` is the surface ρ(x̂) = 1 + 0.05·x̂₁x̂₂².
//! Modifiers are appended with `*` and apply after the base map:
//! position = scale·Ψ(x̂) + translate.
//!
//! Reports are deterministic for a fixed (config, seed) except for the
//! `timings_ms` block, which [`strip_timings`] removes before comparing.

use crate::anisotropy::AnisotropyModel;
use crate::error::{Error, Result};
use crate::geometry::{ParametricSurface, RadialTerm};
use crate::stability::{SpectrumReport, TestFunctionDiagnostics};
use nalgebra::SVector;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;

pub const SCHEMA_VERSION: u32 = 1;

/// Tolerances applied when turning residuals into pass/fail rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ToleranceConfig {
    /// Sup-norm identity residuals (trace identities, unit anisotropic
    /// curvature on Wulff shapes).
    pub identity: f64,
    /// Relative integral residual of the Minkowski formulas.
    pub minkowski: f64,
    /// Relative mismatch of differenced vs. closed-form first variation.
    pub variation: f64,
    /// Absolute mismatch of the volume-rate identity.
    pub volume_rate: f64,
    /// Eigen-residual tolerance of the spectrum solver.
    pub spectrum: f64,
    /// Kernel band half-width override; `None` calibrates from the
    /// computed spectrum.
    pub kernel: Option<f64>,
    /// Base step for variational finite differences.
    pub fd_step: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            identity: 1e-6,
            minkowski: 1e-8,
            variation: 1e-5,
            volume_rate: 1e-6,
            spectrum: 1e-7,
            kernel: None,
            fd_step: crate::functionals::VARIATION_FD_STEP,
        }
    }
}

/// Everything a run needs; echoed verbatim into the report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub f_spec: String,
    pub surface_spec: String,
    /// Curvature ranks r the run sweeps.
    pub ranks: Vec<usize>,
    /// Quadrature grid refinement level.
    pub level: usize,
    /// Icosphere subdivision depth for mesh-based work.
    pub subdiv: usize,
    /// Seed for randomized probes (variation fields).
    pub seed: u64,
    pub tolerances: ToleranceConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            f_spec: "const:c=1".into(),
            surface_spec: "sphere:R=1".into(),
            ranks: vec![0, 1],
            level: 4,
            subdiv: 4,
            seed: 7,
            tolerances: ToleranceConfig::default(),
        }
    }
}

fn parse_err(spec: &str, why: impl std::fmt::Display) -> Error {
    Error::ParseError(format!("in `{spec}`: {why}"))
}

/// Split on `sep` at bracket depth zero, so vector literals survive.
fn split_top_level(s: &str, sep: char) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, ch) in s.char_indices() {
        match ch {
            '[' => depth += 1,
            ']' => depth = depth.saturating_sub(1),
            c if c == sep && depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

/// Parse `key=value` pairs separated by top-level commas, preserving order.
fn parse_pairs<'a>(spec: &str, args: &'a str) -> Result<Vec<(&'a str, &'a str)>> {
    let mut pairs = Vec::new();
    for piece in split_top_level(args, ',') {
        let (k, v) = piece
            .split_once('=')
            .ok_or_else(|| parse_err(spec, format!("expected key=value, got `{piece}`")))?;
        pairs.push((k.trim(), v.trim()));
    }
    Ok(pairs)
}

fn lookup<'a>(spec: &str, pairs: &[(&'a str, &'a str)], key: &str) -> Result<&'a str> {
    pairs
        .iter()
        .find(|(k, _)| *k == key)
        .map(|(_, v)| *v)
        .ok_or_else(|| parse_err(spec, format!("missing `{key}=`")))
}

fn parse_scalar(spec: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .map_err(|_| parse_err(spec, format!("`{v}` is not a number")))
}

fn parse_vector<const D: usize>(spec: &str, v: &str) -> Result<SVector<f64, D>> {
    let list = parse_list(spec, v)?;
    let vals: Result<Vec<f64>> = list.iter().map(|p| parse_scalar(spec, p)).collect();
    let vals = vals?;
    if vals.len() != D {
        return Err(parse_err(
            spec,
            format!("`{v}` has {} entries, expected {D}", vals.len()),
        ));
    }
    Ok(SVector::from_iterator(vals))
}

/// Strip `[...]` and split on commas.
fn parse_list<'a>(spec: &str, v: &'a str) -> Result<Vec<&'a str>> {
    let inner = v
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| parse_err(spec, format!("`{v}` is not a [..] list")))?;
    if inner.trim().is_empty() {
        return Ok(Vec::new());
    }
    Ok(inner.split(',').map(|p| p.trim()).collect())
}

/// Parse an anisotropy spec like `norm:B=[2,1,1]`.
pub fn parse_anisotropy<const D: usize>(spec: &str) -> Result<AnisotropyModel<D>> {
    let (kind, args) = spec
        .split_once(':')
        .ok_or_else(|| parse_err(spec, "expected `<kind>:<args>`"))?;
    match kind {
        "const" => {
            let pairs = parse_pairs(spec, args)?;
            AnisotropyModel::constant(parse_scalar(spec, lookup(spec, &pairs, "c")?)?)
        }
        "linear" => {
            let pairs = parse_pairs(spec, args)?;
            AnisotropyModel::linear(parse_vector::<D>(spec, lookup(spec, &pairs, "a")?)?)
        }
        "norm" => {
            let pairs = parse_pairs(spec, args)?;
            AnisotropyModel::norm(parse_vector::<D>(spec, lookup(spec, &pairs, "B")?)?)
        }
        "quad" => {
            let pairs = parse_pairs(spec, args)?;
            let c = parse_scalar(spec, lookup(spec, &pairs, "c")?)?;
            let d = parse_vector::<D>(spec, lookup(spec, &pairs, "d")?)?;
            AnisotropyModel::quadratic(c, d)
        }
        other => Err(parse_err(
            spec,
            format!("unknown anisotropy kind `{other}` (const|linear|norm|quad)"),
        )),
    }
}

/// Parse a surface spec like `ellipsoid:a=1,b=1,c=2*scale=2*translate=[1,0,0]`.
pub fn parse_surface<const D: usize>(spec: &str) -> Result<ParametricSurface<D>> {
    let parts = split_top_level(spec, '*');
    let base = parts[0];
    let (kind, args) = base
        .split_once(':')
        .ok_or_else(|| parse_err(spec, "expected `<kind>:<args>`"))?;
    let mut surface = match kind {
        "sphere" => {
            let pairs = parse_pairs(spec, args)?;
            ParametricSurface::sphere(parse_scalar(spec, lookup(spec, &pairs, "R")?)?)?
        }
        "ellipsoid" => {
            let pairs = parse_pairs(spec, args)?;
            let names = ["a", "b", "c", "d"];
            let mut axes = SVector::<f64, D>::zeros();
            for i in 0..D {
                axes[i] = parse_scalar(spec, lookup(spec, &pairs, names[i])?)?;
            }
            ParametricSurface::ellipsoid(axes)?
        }
        "wulff" => {
            let nested = args
                .strip_prefix("F=")
                .ok_or_else(|| parse_err(spec, "wulff takes `F=<anisotropy spec>`"))?;
            ParametricSurface::wulff(parse_anisotropy::<D>(nested)?)?
        }
        "radial" => {
            let pairs = parse_pairs(spec, args)?;
            let eps_list = parse_list(spec, lookup(spec, &pairs, "eps")?)?;
            let poly_list = parse_list(spec, lookup(spec, &pairs, "poly")?)?;
            if eps_list.len() != poly_list.len() {
                return Err(parse_err(
                    spec,
                    format!(
                        "eps has {} entries but poly has {}",
                        eps_list.len(),
                        poly_list.len()
                    ),
                ));
            }
            let mut terms = Vec::with_capacity(eps_list.len());
            for (e, p) in eps_list.iter().zip(&poly_list) {
                let eps = parse_scalar(spec, e)?;
                if p.len() != D || !p.chars().all(|c| c.is_ascii_digit()) {
                    return Err(parse_err(
                        spec,
                        format!("poly entry `{p}` must be {D} digits (one power per coordinate)"),
                    ));
                }
                let mut powers = [0u32; D];
                for (i, c) in p.chars().enumerate() {
                    powers[i] = c.to_digit(10).unwrap();
                }
                terms.push(RadialTerm { eps, powers });
            }
            ParametricSurface::radial(terms)?
        }
        other => Err(parse_err(
            spec,
            format!("unknown surface kind `{other}` (sphere|ellipsoid|wulff|radial)"),
        ))?,
    };
    for modifier in &parts[1..] {
        let (k, v) = modifier
            .split_once('=')
            .ok_or_else(|| parse_err(spec, format!("bad modifier `{modifier}`")))?;
        match k {
            "scale" => surface = surface.scaled(parse_scalar(spec, v)?)?,
            "translate" => surface = surface.translated(parse_vector::<D>(spec, v)?),
            other => {
                return Err(parse_err(
                    spec,
                    format!("unknown modifier `{other}` (scale|translate)"),
                ))
            }
        }
    }
    Ok(surface)
}

/// Infer the ambient dimension of a spec from its vector literals; specs
/// without any vector (e.g. `sphere:R=1`) return `None`.
pub fn infer_dimension(spec: &str) -> Option<usize> {
    // first top-level [..] group, counting top-level commas inside it
    let open = spec.find('[')?;
    let close = spec[open..].find(']')? + open;
    let inner = &spec[open + 1..close];
    if inner.trim().is_empty() {
        return Some(0);
    }
    Some(inner.split(',').count())
}

// ---------------------------------------------------------------------------
// report document
// ---------------------------------------------------------------------------

/// One scalar functional evaluation (areas, volume, fitted multiplier).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FunctionalRow {
    pub name: String,
    pub r: Option<usize>,
    pub value: f64,
}

/// One residual check: descriptive id, probe description, the residual,
/// its normalization, and the applied tolerance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidualRow {
    /// Descriptive identifier, e.g. `trace_identity_full`, `minkowski`.
    pub id: String,
    /// What was probed (grid level, sweep step, field tag…).
    pub subject: String,
    pub r: Option<usize>,
    pub value: f64,
    pub scale: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl ResidualRow {
    /// Standard row: pass iff |value|/scale ≤ tolerance.
    pub fn relative(
        id: impl Into<String>,
        subject: impl Into<String>,
        r: Option<usize>,
        value: f64,
        scale: f64,
        tolerance: f64,
    ) -> Self {
        let denom = scale.abs().max(f64::MIN_POSITIVE);
        ResidualRow {
            id: id.into(),
            subject: subject.into(),
            r,
            value,
            scale,
            tolerance,
            pass: value.abs() / denom <= tolerance,
        }
    }
}

/// Differenced vs. closed-form first variation for one field.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VariationRow {
    pub field: String,
    pub r: usize,
    pub area_fd: f64,
    pub area_formula: f64,
    pub area_mismatch: f64,
    pub volume_fd: f64,
    pub volume_formula: f64,
    pub volume_mismatch: f64,
    pub pass: bool,
}

/// A spectrum block; `error` is set (and `report` empty) when the surface
/// failed the criticality precondition.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumEntry {
    pub subject: String,
    pub r: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<SpectrumReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// A test-function diagnostics block, same error convention.
#[derive(Debug, Clone, Serialize)]
pub struct TestFunctionEntry {
    pub subject: String,
    pub r: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<TestFunctionDiagnostics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Cross-check against an independent recomputation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleRow {
    pub name: String,
    pub subject: String,
    pub value: f64,
    pub reference: f64,
    pub deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl OracleRow {
    pub fn relative(
        name: impl Into<String>,
        subject: impl Into<String>,
        value: f64,
        reference: f64,
        tolerance: f64,
    ) -> Self {
        let deviation = (value - reference).abs() / reference.abs().max(1.0);
        OracleRow {
            name: name.into(),
            subject: subject.into(),
            value,
            reference,
            deviation,
            tolerance,
            pass: deviation <= tolerance,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ReportSummary {
    pub checks_total: usize,
    pub checks_failed: usize,
    pub preconditions_failed: usize,
    pub pass: bool,
}

/// The schema-v1 report: everything a run produced, deterministic for a
/// fixed (config, seed) apart from `timings_ms`.
#[derive(Debug, Clone, Serialize)]
pub struct ReportDocument {
    pub schema_version: u32,
    pub generator: String,
    pub config: RunConfig,
    pub functionals: Vec<FunctionalRow>,
    pub identities: Vec<ResidualRow>,
    pub variations: Vec<VariationRow>,
    pub spectra: Vec<SpectrumEntry>,
    pub test_functions: Vec<TestFunctionEntry>,
    pub oracles: Vec<OracleRow>,
    pub summary: ReportSummary,
    pub timings_ms: BTreeMap<String, f64>,
}

impl ReportDocument {
    pub fn new(config: RunConfig) -> Self {
        ReportDocument {
            schema_version: SCHEMA_VERSION,
            generator: format!("wulffcurv {}", env!("CARGO_PKG_VERSION")),
            config,
            functionals: Vec::new(),
            identities: Vec::new(),
            variations: Vec::new(),
            spectra: Vec::new(),
            test_functions: Vec::new(),
            oracles: Vec::new(),
            summary: ReportSummary::default(),
            timings_ms: BTreeMap::new(),
        }
    }

    /// Recompute the summary block from the rows.
    pub fn finalize(&mut self) {
        let mut total = 0usize;
        let mut failed = 0usize;
        let mut preconditions = 0usize;
        for row in &self.identities {
            total += 1;
            if !row.pass {
                failed += 1;
            }
        }
        for row in &self.variations {
            total += 1;
            if !row.pass {
                failed += 1;
            }
        }
        for row in &self.oracles {
            total += 1;
            if !row.pass {
                failed += 1;
            }
        }
        for entry in &self.spectra {
            total += 1;
            if entry.error.is_some() {
                preconditions += 1;
            }
        }
        for entry in &self.test_functions {
            total += 1;
            if entry.error.is_some() {
                preconditions += 1;
            }
        }
        self.summary = ReportSummary {
            checks_total: total,
            checks_failed: failed,
            preconditions_failed: preconditions,
            pass: failed == 0 && preconditions == 0,
        };
    }

    /// Process exit code for this document: 0 all-pass, 2 tolerance
    /// failure, 3 precondition failure.
    pub fn exit_code(&self) -> i32 {
        if self.summary.preconditions_failed > 0 {
            3
        } else if self.summary.checks_failed > 0 {
            2
        } else {
            0
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// CSV projection, one row per scalar. Columns:
    /// `section,id,subject,r,value,aux,tolerance,status` where `aux` is the
    /// normalization (identities), the reference (oracles), or empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("section,id,subject,r,value,aux,tolerance,status\n");
        let fmt_r = |r: Option<usize>| r.map(|v| v.to_string()).unwrap_or_default();
        let status = |pass: bool| if pass { "pass" } else { "fail" };
        for row in &self.functionals {
            let _ = writeln!(
                out,
                "functional,{},,{},{:.17e},,,",
                row.name,
                fmt_r(row.r),
                row.value
            );
        }
        for row in &self.identities {
            let _ = writeln!(
                out,
                "identity,{},{},{},{:.17e},{:.17e},{:.3e},{}",
                row.id,
                row.subject,
                fmt_r(row.r),
                row.value,
                row.scale,
                row.tolerance,
                status(row.pass)
            );
        }
        for row in &self.variations {
            let _ = writeln!(
                out,
                "variation,first_variation_area,{},{},{:.17e},,,{}",
                row.field,
                row.r,
                row.area_mismatch,
                status(row.pass)
            );
            let _ = writeln!(
                out,
                "variation,first_variation_volume,{},{},{:.17e},,,{}",
                row.field, row.r, row.volume_mismatch, ""
            );
        }
        for entry in &self.spectra {
            match (&entry.report, &entry.error) {
                (Some(rep), _) => {
                    for (k, mu) in rep.eigenvalues.iter().enumerate() {
                        let _ = writeln!(
                            out,
                            "spectrum,eigenvalue_{:02},{},{},{:.17e},,,",
                            k, entry.subject, entry.r, mu
                        );
                    }
                    let _ = writeln!(
                        out,
                        "spectrum,verdict,{},{},{},{:.17e},{:.3e},{:?}",
                        entry.subject,
                        entry.r,
                        rep.kernel_dim,
                        rep.min_nonkernel,
                        rep.kernel_tol,
                        rep.verdict
                    );
                }
                (None, Some(err)) => {
                    let clean = err.replace([',', '\n'], ";");
                    let _ = writeln!(
                        out,
                        "spectrum,error,{},{},,,,{clean}",
                        entry.subject, entry.r
                    );
                }
                (None, None) => {}
            }
        }
        for entry in &self.test_functions {
            if let Some(rep) = &entry.report {
                for (name, v) in [
                    ("psi_mean", rep.psi_mean),
                    ("q_grid", rep.q_grid),
                    ("q_chain", rep.q_chain),
                    ("match_residual", rep.match_residual),
                    ("gap_pointwise", rep.gap_pointwise),
                    ("gap_integral", rep.gap_integral),
                ] {
                    let _ = writeln!(
                        out,
                        "test_function,{name},{},{},{:.17e},,,",
                        entry.subject, entry.r, v
                    );
                }
            } else if let Some(err) = &entry.error {
                let clean = err.replace([',', '\n'], ";");
                let _ = writeln!(
                    out,
                    "test_function,error,{},{},,,,{clean}",
                    entry.subject, entry.r
                );
            }
        }
        for row in &self.oracles {
            let _ = writeln!(
                out,
                "oracle,{},{},,{:.17e},{:.17e},{:.3e},{}",
                row.name,
                row.subject,
                row.value,
                row.reference,
                row.tolerance,
                status(row.pass)
            );
        }
        out
    }
}

/// Remove the timing block from a serialized report, for byte-exact
/// determinism comparisons.
pub fn strip_timings(value: &mut serde_json::Value) {
    if let Some(obj) = value.as_object_mut() {
        obj.remove("timings_ms");
    }
}

/// Map an error to the process exit code contract: 4 parse, 3
/// precondition, 2 tolerance/solver, 1 environment.
pub fn exit_code_for_error(e: &Error) -> i32 {
    match e {
        Error::ParseError(_) => 4,
        Error::SolverFailure { .. } => 2,
        Error::Io(_) | Error::Json(_) => 1,
        _ => 3,
    }
}
