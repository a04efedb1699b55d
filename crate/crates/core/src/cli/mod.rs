//! Command-line front end: run configuration, subcommands and report files.

pub mod config;

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::cluster::{
    claim_rows, density_bound_check, finite_volume_series, open_grid, radius_estimate, virial_reversion, ClaimInputs,
    ClaimReport, DensityBoundReport, FiniteVolumeSeries, OracleModel, PowerSeries, RadiusEstimate, RadiusMethod,
    VirialResult,
};
use crate::configint::{build_table, cache, fingerprint, IntegralTable};
use crate::error::{KsError, Result};
use crate::ksop::{build_ks_matrix, ks_residual, KSResidualReport};
use crate::numeric::{Precision, C64};
use crate::oracle::{tonks_mayer_coefficients, IdealModel, TonksModel};
use crate::partition::{
    correlation_numerator, taylor_coefficients, zeros, NumeratorTruncation, PartitionPolynomial, ZeroSet,
};
use crate::potential::{Configuration, Family};
use crate::spectral::{
    coefficient_asymptotics, leading_asymptotics, power_convergence, riesz_projection, spectral_radius_check, spectrum,
    AsymptoticsProbe, CoefficientReport, LaurentData, Operator, PacmanParams, PowerConvergence, SpectralReport,
};

pub use config::{Flags, Format, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "kslab", version, about = "Kirkwood-Salsburg operator laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Configuration integrals Z_0..Z_M.
    Table,
    /// Zeros of the partition polynomial and the simplicity certificate.
    Zeros,
    /// Spectrum, Riesz projection and Laurent data of the KS matrix.
    Spectral,
    /// Pacman-ray limits at the smallest zero and Taylor-coefficient ratios.
    Asymptotics,
    /// Finite-volume cluster series and their 1/L extrapolation.
    Cluster,
    /// Virial series by reversion.
    Virial,
    /// Consolidated claim-check report.
    Claimcheck,
    /// Residual of the KS equations for the finite-volume correlations.
    Residual,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Table => "table",
            Command::Zeros => "zeros",
            Command::Spectral => "spectral",
            Command::Asymptotics => "asymptotics",
            Command::Cluster => "cluster",
            Command::Virial => "virial",
            Command::Claimcheck => "claimcheck",
            Command::Residual => "residual",
        }
    }
}

/// Run-dependent facts kept apart from the deterministic payload.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Metadata {
    pub created_unix: f64,
    pub elapsed_seconds: f64,
    pub version: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report<T> {
    pub command: String,
    pub config: RunConfig,
    pub result: T,
    pub metadata: Metadata,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralOutput {
    pub report: SpectralReport,
    pub laurent: LaurentData,
    pub power: PowerConvergence,
    pub xi: Option<f64>,
    pub radius_holds: Option<bool>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AsymptoticsOutput {
    pub probe: AsymptoticsProbe,
    pub coefficients: Option<CoefficientReport>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClusterOutput {
    pub finite_volume: FiniteVolumeSeries,
    pub radius: Vec<RadiusEstimate>,
    pub oracle: Option<PowerSeries>,
    pub oracle_radius: Option<f64>,
    /// max_n |extrapolated_n / oracle_n - 1| over the nonzero oracle coefficients.
    pub max_relative_deviation: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VirialOutput {
    pub source: String,
    pub virial: VirialResult,
    pub closed_form_radius: Option<f64>,
    pub density_bound: Option<DensityBoundReport>,
}

/// What a command produced: JSON payload plus optional CSV.
pub struct Output {
    pub json: serde_json::Value,
    pub csv: Option<String>,
    pub summary: String,
}

fn output<T: Serialize>(value: &T, csv: Option<String>, summary: String) -> Result<Output> {
    Ok(Output { json: serde_json::to_value(value)?, csv, summary })
}

pub fn table_path(cfg: &RunConfig) -> PathBuf {
    cfg.out.join("table.json")
}

fn missing_table(cfg: &RunConfig, why: &str) -> KsError {
    KsError::Missing(format!(
        "{why} at {}; run `kslab table` with the same potential, --L, --M and --out first",
        table_path(cfg).display()
    ))
}

/// Integral table written by `table` for this configuration.
pub fn load_table(cfg: &RunConfig) -> Result<IntegralTable> {
    let path = table_path(cfg);
    let text = std::fs::read_to_string(&path).map_err(|_| missing_table(cfg, "no integral table"))?;
    let report: Report<IntegralTable> =
        serde_json::from_str(&text).map_err(|_| missing_table(cfg, "unreadable integral table"))?;
    let t = report.result;
    let m = cfg.truncation();
    if t.fingerprint != fingerprint(&cfg.potential, &cfg.spatial_box()) || t.m_max < m {
        return Err(missing_table(cfg, "integral table does not match the configuration"));
    }
    Ok(t.truncated(m))
}

fn polynomial(cfg: &RunConfig) -> Result<PartitionPolynomial> {
    match &cfg.coeffs {
        Some(c) => Ok(PartitionPolynomial::from_coeffs(c)),
        None => Ok(PartitionPolynomial::assemble(&load_table(cfg)?, None)),
    }
}

fn regularity(cfg: &RunConfig) -> Result<f64> {
    Ok(cfg.potential.regularity_c()?.c)
}

fn xi_of(cfg: &RunConfig) -> Result<Option<f64>> {
    if cfg.xi.is_some() {
        return Ok(cfg.xi);
    }
    let c = regularity(cfg)?;
    Ok((c > 0.0).then(|| 1.0 / c))
}

fn tonks(cfg: &RunConfig) -> Option<TonksModel> {
    match cfg.potential.family {
        Family::HardCore { a } if cfg.potential.dimension == 1 => TonksModel::new(a).ok(),
        _ => None,
    }
}

fn is_ideal(cfg: &RunConfig) -> bool {
    cfg.potential.family == Family::Ideal
}

pub fn cmd_table(cfg: &RunConfig) -> Result<Output> {
    let t = build_table(&cfg.potential, &cfg.spatial_box(), cfg.truncation(), &cfg.strategy, cfg.cache_dir.as_deref())?;
    if let Some(dir) = &cfg.cache_dir {
        cache::store(dir, &t)?;
    }
    let mut csv = String::from("m,value,log_value,sign,error,method\n");
    for e in &t.entries {
        let method = serde_json::to_value(e.method)?;
        csv.push_str(&format!(
            "{},{:.17e},{:.17e},{},{:.3e},{}\n",
            e.m,
            e.value_f64(),
            e.log_value,
            e.sign,
            e.error,
            method.as_str().unwrap_or_default()
        ));
    }
    let summary = format!("{} entries, M = {}, fingerprint {}", t.entries.len(), t.m_max, &t.fingerprint[..12]);
    output(&t, Some(csv), summary)
}

pub fn cmd_zeros(cfg: &RunConfig) -> Result<Output> {
    let zs = zeros(&polynomial(cfg)?)?;
    let summary = match &zs.certificate {
        Some(c) => format!(
            "{} zeros, z_c = {}, scaled |Xi'| = {:.3e}, gap = {:.3e}, simple: {}",
            zs.zeros.len(),
            c.z_c,
            c.scaled_derivative,
            c.min_gap,
            c.passes
        ),
        None => "no zeros".into(),
    };
    output(&zs, Some(zs.to_csv()), summary)
}

fn operator(cfg: &RunConfig) -> Result<Operator> {
    match &cfg.matrix {
        Some(rows) => Ok(Operator::dense_real(rows)),
        None => Ok(Operator::Companion(build_ks_matrix(&polynomial(cfg)?)?)),
    }
}

pub fn cmd_spectral(cfg: &RunConfig) -> Result<Output> {
    let op = operator(cfg)?;
    let report = spectrum(&op)?;
    let laurent = riesz_projection(&op, &report, None, Precision::Auto)?;
    let power = power_convergence(&op, &report, &laurent, cfg.powers);
    let xi = if cfg.matrix.is_some() || cfg.coeffs.is_some() { cfg.xi } else { xi_of(cfg)? };
    let radius_holds = xi.map(|x| spectral_radius_check(&report, x).holds);
    let mut csv = String::from("index,re,im,modulus\n");
    for (i, l) in report.eigenvalues.iter().enumerate() {
        csv.push_str(&format!("{i},{:.17e},{:.17e},{:.17e}\n", l.re, l.im, l.norm()));
    }
    let summary = format!(
        "lambda_c = {}, r(K) = {:.6e}, pole order {}, rank(P) {}, |D|/|K| = {:.3e}, idempotency {:.3e}, {} nodes",
        report.lambda_c,
        report.spectral_radius,
        laurent.pole_order,
        laurent.rank_p,
        laurent.norm_d / laurent.norm_k,
        laurent.defects.idempotency,
        laurent.nodes
    );
    output(&SpectralOutput { report, laurent, power, xi, radius_holds }, Some(csv), summary)
}

pub fn cmd_asymptotics(cfg: &RunConfig) -> Result<Output> {
    let p = &cfg.potential;
    let bx = cfg.spatial_box();
    let poly = polynomial(cfg)?;
    let zs: ZeroSet = zeros(&poly)?;
    let coords = cfg.anchor.clone().unwrap_or_else(|| vec![0.5 * cfg.length; p.dimension]);
    let anchor = Configuration::new(p.dimension, coords);
    let probe = leading_asymptotics(
        p,
        &bx,
        &poly,
        &zs,
        &anchor,
        NumeratorTruncation::TotalParticles,
        &PacmanParams::default(),
        &cfg.strategy,
    )?;
    let num = correlation_numerator(p, &bx, &anchor, NumeratorTruncation::TotalParticles.k_max(poly.m_max, anchor.len()), &cfg.strategy)?;
    let coefficients = if num.coeffs.is_empty() {
        None
    } else {
        let c = taylor_coefficients(&num.coeffs, anchor.len(), &poly, cfg.coefficients);
        coefficient_asymptotics(&c, C64::new(1.0, 0.0) / probe.z_c).ok()
    };
    let summary = format!(
        "z_c = {}, ray limit {}, residue {}, agreement {:.3e}, ratios within 1% from k = {:?}",
        probe.z_c,
        probe.m_n,
        probe.residue,
        probe.residue_agreement,
        coefficients.as_ref().and_then(|c| c.within_one_percent_from)
    );
    let csv = probe.to_csv();
    output(&AsymptoticsOutput { probe, coefficients }, Some(csv), summary)
}

fn radii(s: &PowerSeries) -> Vec<RadiusEstimate> {
    [RadiusMethod::Root, RadiusMethod::Ratio, RadiusMethod::DombSykes]
        .into_iter()
        .filter_map(|m| radius_estimate(s, m).ok())
        .collect()
}

fn cluster_output(cfg: &RunConfig) -> Result<ClusterOutput> {
    let fv = finite_volume_series(&cfg.potential, &cfg.lengths, cfg.terms, &cfg.strategy, cfg.cache_dir.as_deref())?;
    let radius = radii(&fv.density_extrapolated);
    let (oracle, oracle_radius) = match (tonks(cfg), is_ideal(cfg)) {
        (Some(t), _) => (Some(tonks_mayer_coefficients(&t, cfg.terms).1), Some(-t.branch_point())),
        (None, true) => {
            let mut c = vec![0.0; cfg.terms + 1];
            c[1] = 1.0;
            (Some(PowerSeries::from_f64(&c, crate::cluster::Variable::Z)), Some(f64::INFINITY))
        }
        _ => (None, None),
    };
    let max_relative_deviation = oracle.as_ref().map(|o| {
        (1..o.len().min(fv.density_extrapolated.len()))
            .filter(|&k| o.value(k) != 0.0)
            .map(|k| (fv.density_extrapolated.value(k) / o.value(k) - 1.0).abs())
            .fold(0.0, f64::max)
    });
    Ok(ClusterOutput { finite_volume: fv, radius, oracle, oracle_radius, max_relative_deviation })
}

pub fn cmd_cluster(cfg: &RunConfig) -> Result<Output> {
    let out = cluster_output(cfg)?;
    let fv = &out.finite_volume;
    let mut csv = String::from("n");
    for l in &fv.lengths {
        csv.push_str(&format!(",L{l}"));
    }
    csv.push_str(",extrapolated,sign,oracle\n");
    for k in 0..fv.density_extrapolated.len() {
        csv.push_str(&k.to_string());
        for s in &fv.density {
            csv.push_str(&format!(",{:.17e}", s.value(k)));
        }
        csv.push_str(&format!(",{:.17e},{}", fv.density_extrapolated.value(k), fv.density_extrapolated.sign(k)));
        match &out.oracle {
            Some(o) => csv.push_str(&format!(",{:.17e}\n", o.value(k))),
            None => csv.push_str(",\n"),
        }
    }
    let r = out.radius.first().map_or(f64::NAN, |r| r.radius);
    let summary = format!(
        "{} terms at L = {:?}, radius {:.6}, oracle radius {:?}, max deviation from oracle {:?}",
        cfg.terms, fv.lengths, r, out.oracle_radius, out.max_relative_deviation
    );
    output(&out, Some(csv), summary)
}

fn virial_output(cfg: &RunConfig) -> Result<VirialOutput> {
    let c = regularity(cfg)?;
    let (source, density, pressure) = match tonks(cfg) {
        Some(t) => {
            let (p, d) = tonks_mayer_coefficients(&t, cfg.terms);
            ("tonks_oracle".to_string(), d, p)
        }
        None => {
            let fv = finite_volume_series(&cfg.potential, &cfg.lengths, cfg.terms, &cfg.strategy, cfg.cache_dir.as_deref())?;
            ("finite_volume_extrapolation".to_string(), fv.density_extrapolated, fv.pressure_extrapolated)
        }
    };
    let virial = virial_reversion(&density, &pressure, c.max(f64::MIN_POSITIVE), RadiusMethod::Ratio)?;
    let model = match (tonks(cfg), is_ideal(cfg)) {
        (Some(t), _) => Some(OracleModel::Tonks(t)),
        (None, true) => Some(OracleModel::Ideal(IdealModel::new(cfg.spatial_box().volume())?)),
        _ => None,
    };
    let density_bound = model.map(|m| density_bound_check(&m, c, &open_grid(2.0, 100))).transpose()?;
    Ok(VirialOutput { source, closed_form_radius: tonks(cfg).map(|t| 1.0 / t.a), virial, density_bound })
}

pub fn cmd_virial(cfg: &RunConfig) -> Result<Output> {
    let out = virial_output(cfg)?;
    let summary = format!(
        "virial radius {:.10} (closed form {:?}), bound 1/(2C) = {:.6}, density bound holds: {:?}",
        out.virial.radius.radius,
        out.closed_form_radius,
        out.virial.bound,
        out.density_bound.as_ref().map(|b| b.holds)
    );
    let csv = out.virial.series.to_csv();
    output(&out, Some(csv), summary)
}

pub fn claim_inputs(cfg: &RunConfig, table: &IntegralTable) -> Result<ClaimInputs> {
    let c = regularity(cfg)?;
    let stab = cfg.potential.stability()?;
    let has_zeros = !is_ideal(cfg);
    let xi = xi_of(cfg)?.unwrap_or(f64::INFINITY);
    let (spectral_radius, spectral_radius_oracle) = if has_zeros {
        let poly = PartitionPolynomial::assemble(table, None);
        let rep = spectrum(&Operator::Companion(build_ks_matrix(&poly)?))?;
        (Some(rep.spectral_radius), zeros(&poly)?.min_modulus().map(|m| 1.0 / m))
    } else {
        (None, None)
    };
    let cl = cluster_output(cfg)?;
    let cluster_radius = cl.radius.first().cloned();
    let spread = {
        let finite: Vec<f64> = cl.radius.iter().map(|r| r.radius).filter(|r| r.is_finite()).collect();
        (finite.len() > 1).then(|| {
            finite.iter().copied().fold(f64::MIN, f64::max) - finite.iter().copied().fold(f64::MAX, f64::min)
        })
    };
    let v = virial_output(cfg)?;
    Ok(ClaimInputs {
        c,
        xi,
        rod_length: tonks(cfg).map(|t| t.a),
        spectral_radius,
        spectral_radius_oracle,
        cluster_radius,
        cluster_radius_uncertainty: spread,
        cluster_radius_oracle: cl.oracle_radius.filter(|r| r.is_finite()),
        virial_radius: Some(v.virial.radius.radius),
        virial_radius_oracle: v.closed_form_radius,
        density_bound: v.density_bound,
        has_zeros,
        positive_or_hard_core: c > 0.0 && (stab.is_positive || stab.has_hard_core),
    })
}

pub fn cmd_claimcheck(cfg: &RunConfig) -> Result<Output> {
    let table = load_table(cfg)?;
    let report: ClaimReport = claim_rows(&claim_inputs(cfg, &table)?);
    let mut csv = String::from("id,statement,relation,paper_claim,measured,oracle,uncertainty,verdict\n");
    let opt = |x: Option<f64>| x.map(|v| format!("{v:.10e}")).unwrap_or_default();
    for r in &report.rows {
        csv.push_str(&format!(
            "{},\"{}\",{},{:.10e},{},{},{},{}\n",
            r.id,
            r.statement,
            serde_json::to_value(r.relation)?.as_str().unwrap_or_default(),
            r.claimed,
            opt(r.measured),
            opt(r.oracle),
            opt(r.uncertainty),
            serde_json::to_value(r.verdict)?.as_str().unwrap_or_default()
        ));
    }
    let summary = report
        .rows
        .iter()
        .map(|r| format!("{}: {:?}", r.id, r.verdict).to_lowercase())
        .collect::<Vec<_>>()
        .join(", ");
    output(&report, Some(csv), summary)
}

pub fn cmd_residual(cfg: &RunConfig) -> Result<Output> {
    let r: KSResidualReport = ks_residual(
        &cfg.potential,
        &cfg.spatial_box(),
        C64::new(cfg.z, 0.0),
        cfg.truncation(),
        cfg.n_max,
        &cfg.strategy,
    )?;
    let mut csv = String::from("n,anchors,residual,error_bound\n");
    for l in &r.levels {
        csv.push_str(&format!("{},{},{:.6e},{:.6e}\n", l.n, l.anchors, l.residual, l.error_bound));
    }
    let summary = format!("sup residual {:.3e}, propagated error bound {:.3e}", r.sup_residual, r.sup_error_bound);
    output(&r, Some(csv), summary)
}

pub fn execute(command: Command, cfg: &RunConfig) -> Result<Output> {
    match command {
        Command::Table => cmd_table(cfg),
        Command::Zeros => cmd_zeros(cfg),
        Command::Spectral => cmd_spectral(cfg),
        Command::Asymptotics => cmd_asymptotics(cfg),
        Command::Cluster => cmd_cluster(cfg),
        Command::Virial => cmd_virial(cfg),
        Command::Claimcheck => cmd_claimcheck(cfg),
        Command::Residual => cmd_residual(cfg),
    }
}

/// Writes `<out>/<command>.json` and, for CSV output, `<out>/<command>.csv`.
pub fn write_report(command: Command, cfg: &RunConfig, out: &Output, started: Instant) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(&cfg.out)?;
    let created_unix = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64());
    let report = Report {
        command: command.name().into(),
        config: cfg.clone(),
        result: &out.json,
        metadata: Metadata {
            created_unix,
            elapsed_seconds: started.elapsed().as_secs_f64(),
            version: env!("CARGO_PKG_VERSION").into(),
        },
    };
    let json_path = cfg.out.join(format!("{}.json", command.name()));
    write_atomic(&json_path, &serde_json::to_string_pretty(&report)?)?;
    let mut paths = vec![json_path];
    if let (Format::Csv, Some(csv)) = (cfg.format, &out.csv) {
        let p = cfg.out.join(format!("{}.csv", command.name()));
        write_atomic(&p, csv)?;
        paths.push(p);
    }
    Ok(paths)
}

fn write_atomic(path: &Path, text: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, text)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Parses arguments, runs one command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let started = Instant::now();
    let result = RunConfig::from_flags(&cli.flags).and_then(|cfg| {
        let out = execute(cli.command, &cfg)?;
        let paths = write_report(cli.command, &cfg, &out, started)?;
        Ok((out.summary, paths))
    });
    match result {
        Ok((summary, paths)) => {
            println!("{}: {summary}", cli.command.name());
            for p in paths {
                println!("wrote {}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
