//! Subcommand bodies. Each returns a table ready for [`crate::output`].

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use rayon::prelude::*;

use qlink::montecarlo::{compare, default_offset_ns, simulate_channel_pair, write_time_tags, ChannelLink, McConfig};
use qlink::scenario::{
    evaluate, link_budget, optimize, run_sweep, Axis, AxisRange, Evaluation, ScenarioPreset, Scale, SweepRow, SweepSpec,
    Toggle, MICIUS_REFERENCE,
};

use crate::config::RunConfig;
use crate::output::{car, num, Table};
use crate::CliError;

const STAT_COLUMNS: [&str; 9] = [
    "singles_a",
    "singles_b",
    "trues",
    "accidentals",
    "car",
    "visibility",
    "qber",
    "sifted",
    "skr",
];

/// Result of one subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub table: Table,
    /// True when every evaluated point has zero key rate.
    pub zero_rate: bool,
}

fn build(cfg: &RunConfig) -> Result<ScenarioPreset, CliError> {
    cfg.scenario_params()?
        .build()
        .map_err(|e| CliError::Config(format!("invalid configuration: {e}")))
}

fn toggles(cfg: &RunConfig, key: &str) -> Result<Vec<Toggle>, CliError> {
    match cfg.raw(key) {
        "both" => Ok(vec![Toggle::Demux, Toggle::NoDemux]),
        "demux" => Ok(vec![Toggle::Demux]),
        "nodemux" => Ok(vec![Toggle::NoDemux]),
        other => Err(CliError::Config(format!("{key}: `{other}` is not one of both, demux, nodemux"))),
    }
}

fn scale(cfg: &RunConfig, key: &str) -> Result<Scale, CliError> {
    match cfg.raw(key) {
        "linear" => Ok(Scale::Linear),
        "log" => Ok(Scale::Log),
        other => Err(CliError::Config(format!("{key}: `{other}` is not one of linear, log"))),
    }
}

fn range(cfg: &RunConfig, lo: &str, hi: &str, steps: &str, scale_key: Option<&str>) -> Result<AxisRange, CliError> {
    let (lo_v, hi_v, n): (f64, f64, usize) = (cfg.get(lo)?, cfg.get(hi)?, cfg.get(steps)?);
    let s = match scale_key {
        Some(k) => scale(cfg, k)?,
        None => Scale::Linear,
    };
    if n == 1 && lo_v == hi_v {
        return AxisRange::point(lo_v).map_err(|e| CliError::Config(format!("{lo}: {e}")));
    }
    AxisRange::new(lo_v, hi_v, n, s).map_err(|e| CliError::Config(format!("{lo}..{hi}: {e}")))
}

fn stat_cells(e: &Evaluation) -> Vec<String> {
    let t = &e.rates.total;
    vec![
        num(t.singles_a),
        num(t.singles_b),
        num(t.trues),
        num(t.accidentals),
        car(t.car),
        num(t.visibility),
        num(t.qber),
        num(e.key.sifted_total),
        num(e.key.skr_total),
    ]
}

fn sweep_table(axis_columns: &[&str], rows: &[SweepRow]) -> Result<Outcome, CliError> {
    let mut header: Vec<&str> = axis_columns.to_vec();
    header.push("toggle");
    header.extend(STAT_COLUMNS);
    header.push("status");
    let mut table = Table::new(&header);
    for row in rows {
        let mut cells: Vec<String> = row.coords.iter().map(|&v| num(v)).collect();
        cells.push(row.toggle.to_string());
        match &row.outcome {
            Ok(e) => {
                cells.extend(stat_cells(e));
                cells.push("ok".to_string());
            }
            Err(err) => {
                cells.extend(std::iter::repeat_n(String::new(), STAT_COLUMNS.len()));
                cells.push(format!("error: {err}"));
            }
        }
        table.push(cells);
    }
    let ok: Vec<f64> = rows.iter().filter_map(SweepRow::skr).collect();
    if ok.is_empty() && !rows.is_empty() {
        let first = rows[0].outcome.as_ref().err().map(ToString::to_string).unwrap_or_default();
        return Err(CliError::Runtime(format!("no grid point could be evaluated: {first}")));
    }
    Ok(Outcome {
        zero_rate: ok.iter().all(|&s| s == 0.0),
        table,
    })
}

pub fn rates(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let preset = build(cfg)?;
    let mut header = vec!["toggle", "pair", "detected_pairs"];
    header.extend(STAT_COLUMNS);
    let mut table = Table::new(&header);
    let mut zero_rate = true;
    for toggle in [Toggle::Demux, Toggle::NoDemux] {
        let e = evaluate(&preset, toggle).map_err(|e| CliError::Runtime(format!("{toggle}: {e}")))?;
        zero_rate &= e.key.skr_total == 0.0;
        for (k, (p, key)) in e.rates.pairs.iter().zip(&e.key.pairs).enumerate() {
            table.push(vec![
                toggle.to_string(),
                (k + 1).to_string(),
                num(p.detected_pairs),
                num(p.singles_a),
                num(p.singles_b),
                num(p.trues),
                num(p.accidentals),
                car(p.car),
                num(p.visibility),
                num(p.qber),
                num(key.sifted),
                num(key.skr),
            ]);
        }
        let mut total = vec![toggle.to_string(), "total".to_string(), num(e.rates.total.detected_pairs)];
        total.extend(stat_cells(&e));
        table.push(total);
    }
    Ok(Outcome { table, zero_rate })
}

fn axis(cfg: &RunConfig, key: &str) -> Result<Axis, CliError> {
    cfg.raw(key).parse().map_err(|e| CliError::Config(format!("{key}: {e}")))
}

pub fn sweep(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let preset = build(cfg)?;
    let first = axis(cfg, "sweep.axis")?;
    let first_range = range(cfg, "sweep.lo", "sweep.hi", "sweep.steps", Some("sweep.scale"))?;
    let spec = match cfg.raw("sweep.axis2") {
        "none" => SweepSpec::one(first, first_range),
        _ => {
            let second = axis(cfg, "sweep.axis2")?;
            let second_range = range(cfg, "sweep.lo2", "sweep.hi2", "sweep.steps2", Some("sweep.scale2"))?;
            SweepSpec::two(first, first_range, second, second_range).map_err(|e| CliError::Config(e.to_string()))?
        }
    }
    .with_toggles(&toggles(cfg, "sweep.toggles")?);
    let columns: Vec<&str> = spec.axes.iter().map(|(a, _)| a.column()).collect();
    sweep_table(&columns, &run_sweep(&preset, &spec))
}

pub fn optimize_cmd(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let preset = build(cfg)?;
    let power = range(cfg, "optimize.power_lo", "optimize.power_hi", "optimize.power_steps", Some("optimize.power_scale"))?;
    let window = range(
        cfg,
        "optimize.window_lo",
        "optimize.window_hi",
        "optimize.window_steps",
        Some("optimize.window_scale"),
    )?;
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    for toggle in toggles(cfg, "optimize.toggles")? {
        let r = optimize(&preset, toggle, power, window).map_err(|e| CliError::Runtime(format!("{toggle}: {e}")))?;
        notes.push(format!(
            "optimum {toggle}: pump_power_mw = {} window_ns = {} peak_skr = {}{}",
            num(r.power_mw),
            num(r.window_ns),
            num(r.peak_skr),
            if r.positive { "" } else { " (no positive rate)" }
        ));
        rows.extend(r.table);
    }
    let mut out = sweep_table(&[Axis::PumpPower.column(), Axis::Window.column()], &rows)?;
    out.table.notes.extend(notes);
    Ok(out)
}

pub fn linkbudget(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let preset = build(cfg)?;
    let att = range(cfg, "linkbudget.lo", "linkbudget.hi", "linkbudget.steps", None)?;
    let mut out = sweep_table(&[Axis::Attenuation.column()], &link_budget(&preset, att))?;
    let width = out.table.header.len();
    for r in MICIUS_REFERENCE {
        let mut cells = vec![String::new(); width];
        cells[0] = num(r.dual_db);
        cells[1] = format!("reference:{}", r.label);
        cells[width - 2] = num(r.skr);
        cells[width - 1] = "reference".to_string();
        out.table.push(cells);
    }
    Ok(out)
}

pub fn plan(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let preset = build(cfg)?;
    let mut table = Table::new(&["pair", "channel", "center_nm", "lo_nm", "hi_nm", "efficiency", "flux_share"]);
    for (k, (pair, share)) in preset.plan().pairs().iter().zip(preset.shares()).enumerate() {
        for (label, ch) in [("A", &pair.signal), ("B", &pair.idler)] {
            table.push(vec![
                (k + 1).to_string(),
                format!("{label}{}", k + 1),
                num(ch.center.nm()),
                num(ch.lo.nm()),
                num(ch.hi.nm()),
                num(pair.efficiency),
                num(*share),
            ]);
        }
    }
    Ok(Outcome { table, zero_rate: false })
}

pub fn mc(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let preset = build(cfg)?;
    let duration: f64 = cfg.get("mc.duration_s")?;
    let seed: u64 = cfg.get("mc.seed")?;
    let fluxes = preset.fluxes(Toggle::Demux);
    let selected: Vec<usize> = match cfg.raw("mc.channel_pair") {
        "all" => (0..fluxes.len()).collect(),
        _ => {
            let k: usize = cfg.get("mc.channel_pair")?;
            if k == 0 || k > fluxes.len() {
                return Err(CliError::Config(format!("mc.channel_pair: {k} must lie in 1..={}", fluxes.len())));
            }
            vec![k - 1]
        }
    };
    let window = preset.setup().window().window_ns();
    let offset = match cfg.raw("mc.offset_ns") {
        "auto" => default_offset_ns(window),
        _ => cfg.get("mc.offset_ns")?,
    };
    let configs = selected
        .iter()
        .map(|&k| {
            let link = ChannelLink {
                setup: *preset.setup(),
                flux: fluxes[k],
            };
            let mut c = McConfig::new(link, duration, seed, k as u64)?;
            c.offset_ns = offset;
            c.validate()?;
            Ok((k, c))
        })
        .collect::<qlink::Result<Vec<_>>>()
        .map_err(|e| CliError::Config(format!("invalid configuration: {e}")))?;

    let dump = cfg.get_opt::<String>("mc.dump")?;
    let runs = configs
        .par_iter()
        .map(|(_, c)| simulate_channel_pair(c))
        .collect::<qlink::Result<Vec<_>>>()
        .map_err(|e| CliError::Runtime(e.to_string()))?;

    let mut table = Table::new(&["pair", "statistic", "observed", "expected", "sigma", "z_score", "within_3sigma"]);
    for ((k, c), run) in configs.iter().zip(&runs) {
        let analytic = c.link.analytic().map_err(|e| CliError::Runtime(e.to_string()))?;
        let n = &run.report.counts;
        table.note(format!(
            "pair {}: singles_a {} singles_b {} coincidences {} offset_accidentals {} error_coincidences {}",
            k + 1,
            n.singles_a,
            n.singles_b,
            n.coincidences,
            n.offset_accidentals,
            n.error_coincidences
        ));
        for cmp in compare(&run.report, &analytic) {
            table.push(vec![
                (k + 1).to_string(),
                cmp.statistic.to_string(),
                num(cmp.observed),
                num(cmp.expected),
                num(cmp.sigma),
                num(cmp.z_score()),
                cmp.within(3.0).to_string(),
            ]);
        }
    }
    if let Some(path) = dump {
        write_dump(Path::new(&path), cfg, &runs)?;
        table.note(format!("time tags written to {path}"));
    }
    Ok(Outcome { table, zero_rate: false })
}

fn write_dump(path: &Path, cfg: &RunConfig, runs: &[qlink::montecarlo::McRun]) -> Result<(), CliError> {
    let streams: Vec<_> = runs.iter().flat_map(|r| [&r.a, &r.b]).collect();
    let file = File::create(path).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    write_time_tags(BufWriter::new(file), &streams, &cfg.hash())
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}
