//! The six subcommands. Each resolves its configuration, computes a table,
//! and writes CSV or JSON; diagnostics go to stderr so piped data stays
//! clean.

use std::fs::File;
use std::io::{BufWriter, Write};

use rayon::prelude::*;

use ionchain::crystal::solve_equilibrium;
use ionchain::modes::{build_matrix, diagonalize};
use ionchain::oracle::exact_observables;
use ionchain::phonons::observables;
use ionchain::sweep::{
    adiabatic_check_with_threshold, effective_mass_ratio, observables_along_sweep, SweepSchedule,
};
use ionchain::{ModeSpectrum, TrapConfig};

use crate::error::CliError;
use crate::resolve::{
    base_meta, check_command, load_config, resolve_io, resolve_scan, resolve_trap, ResolvedIo,
    Scan,
};
use crate::table::{Table, Values};
use crate::{
    EquilibriumArgs, Format, Law, ObservablesArgs, OracleCheckArgs, PhaseDiagramArgs,
    SpectrumArgs, SweepArgs,
};

/// Agreement demanded between the closed forms and the Fock oracle.
const ORACLE_CHECK_TOLERANCE: f64 = 1e-6;

fn write_output(
    table: &Table,
    meta: serde_json::Map<String, serde_json::Value>,
    io: &ResolvedIo,
) -> Result<(), CliError> {
    let mut sink: Box<dyn Write> = match &io.output {
        Some(path) => Box::new(BufWriter::new(File::create(path).map_err(|e| {
            CliError::io(format!("cannot create {}: {e}", path.display()))
        })?)),
        None => Box::new(std::io::stdout().lock()),
    };
    match io.format {
        Format::Csv => table.write_csv(&mut sink)?,
        Format::Json => table.write_json(&mut sink, serde_json::Value::Object(meta))?,
    }
    sink.flush()?;
    Ok(())
}

pub fn equilibrium(args: EquilibriumArgs) -> Result<(), CliError> {
    let file = load_config(&args.io)?;
    check_command(&file, "equilibrium")?;
    let io = resolve_io(&args.io, &file)?;
    let n_ions = args
        .n_ions
        .or(file.get("n_ions")?)
        .ok_or_else(|| CliError::usage("missing ion count: pass --n or set n_ions"))?;

    let positions = solve_equilibrium(n_ions)?;
    let mut table = Table::new();
    table.push("site", Values::Int((1..=n_ions as i64).collect()));
    table.push("u", Values::Float(positions.positions().to_vec()));

    let mut meta = base_meta("equilibrium", None);
    meta.insert("n_ions".into(), n_ions.into());
    write_output(&table, meta, &io)
}

/// Shared scan runner: positions are solved once, grid points evaluated in
/// parallel, rows assembled in grid order.
fn scan_spectra(
    base: &TrapConfig,
    scan: &Option<Scan>,
) -> Result<Vec<(TrapConfig, ModeSpectrum)>, CliError> {
    let positions = solve_equilibrium(base.n_ions)?;
    let configs: Vec<TrapConfig> = match scan {
        Some(scan) => scan.values().iter().map(|&v| scan.apply(base, v)).collect(),
        None => vec![base.clone()],
    };
    let results: Vec<Result<(TrapConfig, ModeSpectrum), ionchain::Error>> = configs
        .into_par_iter()
        .map(|cfg| {
            let spectrum = diagonalize(&build_matrix(&cfg, &positions)?)?;
            Ok((cfg, spectrum))
        })
        .collect();
    let mut rows = Vec::with_capacity(results.len());
    for result in results {
        rows.push(result?);
    }
    Ok(rows)
}

fn push_trap_columns(table: &mut Table, rows: &[(TrapConfig, ModeSpectrum)]) {
    table.push(
        "mass_ratio",
        Values::Float(rows.iter().map(|(c, _)| c.mass_ratio).collect()),
    );
    table.push("alpha", Values::Float(rows.iter().map(|(c, _)| c.alpha).collect()));
    table.push(
        "dipole_beta",
        Values::Float(rows.iter().map(|(c, _)| c.dipole_beta).collect()),
    );
    table.push(
        "mu_eff",
        Values::Float(
            rows.iter()
                .map(|(c, _)| effective_mass_ratio(c.mass_ratio, c.dipole_beta))
                .collect(),
        ),
    );
}

pub fn spectrum(args: SpectrumArgs) -> Result<(), CliError> {
    let file = load_config(&args.io)?;
    check_command(&file, "spectrum")?;
    let io = resolve_io(&args.io, &file)?;
    let base = resolve_trap(&args.trap, &file)?;
    let scan = resolve_scan(&args.scan, &file)?;

    let rows = scan_spectra(&base, &scan)?;
    let mut table = Table::new();
    push_trap_columns(&mut table, &rows);
    for k in 0..base.n_ions {
        table.push(
            format!("omega_{}", k + 1),
            Values::Float(rows.iter().map(|(_, s)| s.freqs()[k]).collect()),
        );
    }

    let mut meta = base_meta("spectrum", Some(&base));
    if let Some(scan) = &scan {
        meta.insert("scan".into(), scan.spec_string().into());
    }
    write_output(&table, meta, &io)
}

pub fn observables_cmd(args: ObservablesArgs) -> Result<(), CliError> {
    let file = load_config(&args.io)?;
    check_command(&file, "observables")?;
    let io = resolve_io(&args.io, &file)?;
    let cfg = resolve_trap(&args.trap, &file)?;

    let spectrum = ionchain::spectrum_for(&cfg)?;
    let obs = observables(&spectrum, &cfg)?;
    eprintln!(
        "phase: {} (mu_eff = {:.6})",
        obs.phase_label,
        effective_mass_ratio(cfg.mass_ratio, cfg.dipole_beta)
    );

    let n = cfg.n_ions;
    let mut table = Table::new();
    table.push("site", Values::Int((1..=n as i64).collect()));
    table.push("mean", Values::Float(obs.mean.clone()));
    table.push("variance", Values::Float(obs.variance.clone()));
    for j in 0..n {
        table.push(
            format!("corr_{}", j + 1),
            Values::Float((0..n).map(|i| obs.correlation[(i, j)]).collect()),
        );
    }

    let mut meta = base_meta("observables", Some(&cfg));
    meta.insert("phase".into(), obs.phase_label.to_string().into());
    write_output(&table, meta, &io)
}

pub fn sweep(args: SweepArgs) -> Result<(), CliError> {
    let file = load_config(&args.io)?;
    check_command(&file, "sweep")?;
    let io = resolve_io(&args.io, &file)?;
    let cfg = resolve_trap(&args.trap, &file)?;

    let omega_s_max = args.omega_s_max.or(file.get("omega_s_max")?).unwrap_or(0.8);
    let duration = args.duration.or(file.get("duration")?).unwrap_or(60_000.0);
    let steps = args.steps.or(file.get("steps")?).unwrap_or(801);
    let law = match args.law {
        Some(law) => law,
        None => file.get::<Law>("law")?.unwrap_or(Law::Sqrt),
    };
    let threshold = args.threshold.or(file.get("threshold")?).unwrap_or(0.1);
    let strict = args.strict || file.get::<bool>("strict")?.unwrap_or(false);

    let schedule = match law {
        Law::Sqrt => SweepSchedule::from_peak(omega_s_max, duration, steps)?,
        Law::Linear => SweepSchedule::new(
            omega_s_max / duration,
            duration,
            steps,
            ionchain::ScheduleLaw::Linear,
        )?,
        Law::Constant => {
            SweepSchedule::new(omega_s_max, duration, steps, ionchain::ScheduleLaw::Constant)?
        }
    };

    let out = observables_along_sweep(&cfg, &schedule)?;
    let report = adiabatic_check_with_threshold(&out.sweep, &schedule, threshold);
    match out.sweep.transition_omega_s {
        Some(beta) => eprintln!("transition at omega_s = {beta:.6} omega_x0"),
        None => eprintln!("transition not reached within the sweep"),
    }
    eprintln!("adiabaticity: {}", report.summary());

    let n = cfg.n_ions;
    let steps_n = out.sweep.times.len();
    let mut table = Table::new();
    table.push("time", Values::Float(out.sweep.times.clone()));
    table.push(
        "omega_s",
        Values::Float(out.sweep.times.iter().map(|&t| schedule.omega_s(t)).collect()),
    );
    table.push("mu_eff", Values::Float(out.sweep.mu_eff.clone()));
    for k in 0..n {
        table.push(
            format!("omega_{}", k + 1),
            Values::Float(out.sweep.spectra.iter().map(|s| s.freqs()[k]).collect()),
        );
    }
    for j in 0..n {
        table.push(
            format!("mean_{}", j + 1),
            Values::Float(out.per_time.iter().map(|o| o.mean[j]).collect()),
        );
    }
    let mut max_s = Vec::with_capacity(steps_n);
    let mut min_gap = Vec::with_capacity(steps_n);
    for (i, s) in out.sweep.s_coupling.iter().enumerate() {
        let mut worst = 0.0_f64;
        let mut gap = f64::INFINITY;
        let freqs = out.sweep.spectra[i].freqs();
        for k in 0..n {
            for q in 0..n {
                if k != q {
                    worst = worst.max(s[(k, q)].abs());
                    gap = gap.min((freqs[k] - freqs[q]).abs());
                }
            }
        }
        max_s.push(worst);
        min_gap.push(gap);
    }
    table.push("max_s", Values::Float(max_s));
    table.push("min_gap", Values::Float(min_gap));
    table.push("adiabatic_margin", Values::Float(out.sweep.adiabatic_margin.clone()));

    let mut meta = base_meta("sweep", Some(&cfg));
    meta.insert("omega_s_max".into(), omega_s_max.into());
    meta.insert("duration".into(), duration.into());
    meta.insert("steps".into(), steps.into());
    meta.insert("law".into(), law.as_str().into());
    meta.insert("threshold".into(), threshold.into());
    meta.insert("strict".into(), strict.into());
    meta.insert("time_unit".into(), "1/omega_x0".into());
    meta.insert(
        "transition_omega_s".into(),
        out.sweep
            .transition_omega_s
            .map_or(serde_json::Value::Null, serde_json::Value::from),
    );
    meta.insert("adiabatic_worst_ratio".into(), report.worst_ratio.into());
    meta.insert("adiabatic_min_gap".into(), report.min_gap.into());
    meta.insert("sweep_rate_sq".into(), report.sweep_rate_sq.into());
    meta.insert("gap_sq_duration".into(), report.gap_sq_duration.into());
    meta.insert("crossing_estimate_ok".into(), report.crossing_estimate_ok.into());
    meta.insert("adiabatic_pass".into(), report.pass.into());
    write_output(&table, meta, &io)?;

    if strict && !report.pass {
        return Err(CliError::adiabatic(format!(
            "adiabatic condition violated: {}",
            report.summary()
        )));
    }
    Ok(())
}

pub fn phase_diagram(args: PhaseDiagramArgs) -> Result<(), CliError> {
    let file = load_config(&args.io)?;
    check_command(&file, "phase-diagram")?;
    let io = resolve_io(&args.io, &file)?;
    let base = resolve_trap(&args.trap, &file)?;
    let scan = resolve_scan(&args.scan, &file)?;

    let rows = scan_spectra(&base, &scan)?;
    let observed: Vec<Result<_, ionchain::Error>> = rows
        .par_iter()
        .map(|(cfg, spectrum)| {
            let obs = observables(spectrum, cfg)?;
            let sum: f64 = obs.mean.iter().sum();
            Ok((obs.phase_label.to_string(), obs.mean[cfg.impurity_index()], sum))
        })
        .collect();
    let mut phases = Vec::with_capacity(rows.len());
    let mut impurity_mean = Vec::with_capacity(rows.len());
    let mut total_mean = Vec::with_capacity(rows.len());
    for entry in observed {
        let (phase, imp, sum) = entry?;
        phases.push(phase);
        impurity_mean.push(imp);
        total_mean.push(sum);
    }

    let mut table = Table::new();
    push_trap_columns(&mut table, &rows);
    table.push("phase", Values::Text(phases));
    table.push("mean_impurity", Values::Float(impurity_mean));
    table.push("sum_mean", Values::Float(total_mean));

    let mut meta = base_meta("phase-diagram", Some(&base));
    if let Some(scan) = &scan {
        meta.insert("scan".into(), scan.spec_string().into());
    }
    write_output(&table, meta, &io)
}

pub fn oracle_check(args: OracleCheckArgs) -> Result<(), CliError> {
    let file = load_config(&args.io)?;
    check_command(&file, "oracle-check")?;
    let io = resolve_io(&args.io, &file)?;
    let cfg = resolve_trap(&args.trap, &file)?;
    let cutoff = args.cutoff.or(file.get("cutoff")?).unwrap_or(cfg.ll_phonons + 6);

    let spectrum = ionchain::spectrum_for(&cfg)?;
    let closed = observables(&spectrum, &cfg)?;
    let exact = exact_observables(&cfg, &spectrum, cutoff)?;

    let n = cfg.n_ions;
    let mean_delta: Vec<f64> =
        (0..n).map(|j| (closed.mean[j] - exact.mean[j]).abs()).collect();
    let var_delta: Vec<f64> =
        (0..n).map(|j| (closed.variance[j] - exact.variance[j]).abs()).collect();
    let corr_delta = (&closed.correlation - &exact.correlation).amax();
    let max_delta = mean_delta
        .iter()
        .chain(&var_delta)
        .cloned()
        .fold(corr_delta, f64::max);

    let mut table = Table::new();
    table.push("site", Values::Int((1..=n as i64).collect()));
    table.push("mean_exact", Values::Float(exact.mean.clone()));
    table.push("mean_closed", Values::Float(closed.mean.clone()));
    table.push("delta_mean", Values::Float(mean_delta));
    table.push("var_exact", Values::Float(exact.variance.clone()));
    table.push("var_closed", Values::Float(closed.variance.clone()));
    table.push("delta_var", Values::Float(var_delta));

    let mut meta = base_meta("oracle-check", Some(&cfg));
    meta.insert("cutoff".into(), cutoff.into());
    meta.insert("max_delta".into(), max_delta.into());
    meta.insert("max_corr_delta".into(), corr_delta.into());
    write_output(&table, meta, &io)?;

    eprintln!("max observable delta {max_delta:.3e} (correlations {corr_delta:.3e}) at cutoff {cutoff}");
    if max_delta > ORACLE_CHECK_TOLERANCE {
        return Err(CliError {
            message: format!(
                "closed forms and Fock oracle disagree: {max_delta:.3e} > {ORACLE_CHECK_TOLERANCE:.0e}"
            ),
            exit_code: 3,
        });
    }
    Ok(())
}
