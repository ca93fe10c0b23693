//! Output files. Every CSV starts with a `# schema <name>/<version>` line and
//! every JSON document with a `schema` key; nothing time-dependent is written.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::Context;
use covrage_core::harness::{CompareRow, GainMap, Run};
use covrage_core::{Awv, Scenario, SweepResult, UvPoint};
use serde::Serialize;

pub fn write(dir: &Path, name: &str, contents: &str) -> anyhow::Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}

fn json<T: Serialize>(value: &T) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Run description, written before any other output.
pub struct Manifest<'a> {
    pub command: &'a str,
    pub config: &'a Path,
    pub out_dir: &'a Path,
    pub resolution: usize,
    pub scenario: &'a Scenario,
}

#[derive(Serialize)]
struct ManifestDoc<'a> {
    schema: &'static str,
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config: String,
    out_dir: String,
    seed: u64,
    resolution: usize,
    scenario: &'a Scenario,
}

impl Manifest<'_> {
    pub fn write(&self, dir: &Path) -> anyhow::Result<()> {
        let doc = ManifestDoc {
            schema: "covrage.manifest/1",
            tool: "covrage",
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            config: self.config.display().to_string(),
            out_dir: self.out_dir.display().to_string(),
            seed: self.scenario.seed,
            resolution: self.resolution,
            scenario: self.scenario,
        };
        write(dir, "manifest.json", &json(&doc)?)
    }
}

#[derive(Serialize)]
struct BeamDoc {
    index: usize,
    center: UvPoint,
    sample: Option<usize>,
    sub_arrays: Vec<usize>,
    sync_phase_rad: f64,
}

#[derive(Serialize)]
struct PlanDoc<'a> {
    schema: &'static str,
    strategy: String,
    samples: usize,
    trajectory_length: f64,
    subbeam_width: f64,
    subdivision: u32,
    sub_array_count: usize,
    extrapolated_samples: usize,
    beams: Vec<BeamDoc>,
    overlap_points: &'a [UvPoint],
    unsynced_pairs: &'a [usize],
}

pub fn plan_json(scenario: &Scenario, run: &Run) -> anyhow::Result<String> {
    let cfg = &scenario.array;
    let doc = match &run.beam.plan {
        Some(plan) => PlanDoc {
            schema: "covrage.plan/1",
            strategy: scenario.strategy.to_string(),
            samples: run.trajectory.len(),
            trajectory_length: plan.trajectory_length,
            subbeam_width: plan.beam_width,
            subdivision: plan.layout.subdivision(),
            sub_array_count: plan.layout.len(),
            extrapolated_samples: plan.extrapolated,
            beams: plan
                .beam_centers
                .iter()
                .enumerate()
                .map(|(b, c)| BeamDoc {
                    index: b,
                    center: *c,
                    sample: Some(plan.beam_samples[b]),
                    sub_arrays: plan.assignment[b].clone(),
                    sync_phase_rad: plan.sync_shifts[b].arg(),
                })
                .collect(),
            overlap_points: &plan.overlap_points,
            unsynced_pairs: &plan.skipped_syncs,
        },
        None => PlanDoc {
            schema: "covrage.plan/1",
            strategy: scenario.strategy.to_string(),
            samples: run.trajectory.len(),
            trajectory_length: run.trajectory.length(),
            subbeam_width: covrage_core::array::beamwidth_uv(cfg.nx.min(cfg.ny), cfg.spacing_wavelengths),
            subdivision: 0,
            sub_array_count: 1,
            extrapolated_samples: 0,
            beams: vec![BeamDoc {
                index: 0,
                center: run.beam.steer.unwrap_or(run.trajectory.first()),
                sample: None,
                sub_arrays: vec![0],
                sync_phase_rad: 0.0,
            }],
            overlap_points: &[],
            unsynced_pairs: &[],
        },
    };
    json(&doc)
}

pub fn plan_summary(run: &Run) -> String {
    let mut s = String::new();
    let t = &run.trajectory;
    let _ = writeln!(s, "trajectory: {} samples, length {:.4}", t.len(), t.length());
    match &run.beam.plan {
        Some(plan) => {
            let _ = writeln!(
                s,
                "{} beam(s) of width {:.5} on {} sub-array(s), {} extrapolated sample(s)",
                plan.subbeam_count(),
                plan.beam_width,
                plan.layout.len(),
                plan.extrapolated
            );
            for (b, c) in plan.beam_centers.iter().enumerate() {
                let _ = writeln!(
                    s,
                    "  beam {b}: u={:.5} v={:.5} sub-arrays {:?} sync {:+.4} rad",
                    c.u,
                    c.v,
                    plan.assignment[b],
                    plan.sync_shifts[b].arg()
                );
            }
            for (k, m) in plan.overlap_points.iter().enumerate() {
                let _ = writeln!(s, "  overlap {k}-{}: u={:.5} v={:.5}", k + 1, m.u, m.v);
            }
        }
        None => {
            let c = run.beam.steer.unwrap_or(t.first());
            let _ = writeln!(s, "1 full-array beam: u={:.5} v={:.5}", c.u, c.v);
        }
    }
    s
}

pub fn awv_csv(awv: &Awv) -> String {
    let mut s = String::from("# schema covrage.awv/1\nx,y,phase_rad\n");
    for y in 0..awv.ny() {
        for x in 0..awv.nx() {
            let _ = writeln!(s, "{x},{y},{:.9}", awv.get(x, y).arg());
        }
    }
    s
}

pub fn sweep_csv(sweep: &SweepResult) -> String {
    let mut s = String::from(
        "# schema covrage.sweep/1\nindex,u,v,gain_dbi,penalty_db,level_dbm,snr_db,mcs,rate_mbps\n",
    );
    for r in &sweep.samples {
        let snr = r.snr_db.map(|v| format!("{v:.6}")).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{:.6},{:.6},{:.6},{:.6},{:.6},{},{},{}",
            r.index, r.uv.u, r.uv.v, r.gain_dbi, r.penalty_db, r.level_dbm, snr, r.mcs, r.rate_mbps
        );
    }
    s
}

#[derive(Serialize)]
struct SummaryDoc<'a> {
    schema: &'static str,
    strategy: String,
    no_sync: bool,
    delayed_first: bool,
    samples: usize,
    trajectory_length: f64,
    /// `relative` when levels are headroom-based, `absolute` otherwise.
    level_model: &'static str,
    summary: &'a covrage_core::harness::SweepSummary,
}

pub fn summary_json(scenario: &Scenario, run: &Run) -> anyhow::Result<String> {
    json(&SummaryDoc {
        schema: "covrage.summary/1",
        strategy: scenario.strategy.to_string(),
        no_sync: scenario.ablation.no_sync,
        delayed_first: scenario.ablation.delayed_first,
        samples: run.trajectory.len(),
        trajectory_length: run.trajectory.length(),
        level_model: if scenario.link.headroom_db.is_some() {
            "relative"
        } else {
            "absolute"
        },
        summary: &run.sweep.summary,
    })
}

/// Token written for cells outside the front hemisphere.
pub const OUTSIDE: &str = "out";

pub fn gainmap_csv(map: &GainMap, clamp_dbi: f64) -> String {
    let mut s = format!(
        "# schema covrage.gainmap/1 resolution={} clamp_dbi={clamp_dbi} outside={OUTSIDE}\ni,j,u,v,gain_dbi\n",
        map.resolution
    );
    for j in 0..map.resolution {
        for i in 0..map.resolution {
            let (u, v) = (map.axis[i], map.axis[j]);
            match map.get(i, j) {
                Some(g) => {
                    let _ = writeln!(s, "{i},{j},{u:.6},{v:.6},{g:.6}");
                }
                None => {
                    let _ = writeln!(s, "{i},{j},{u:.6},{v:.6},{OUTSIDE}");
                }
            }
        }
    }
    s
}

pub fn compare_csv(rows: &[CompareRow]) -> String {
    let mut s = String::from(
        "# schema covrage.compare/1\nlabel,strategy,no_sync,delayed_first,min_gain_dbi,max_gain_dbi,range_db,min_mcs,min_rate_mbps\n",
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{:.6},{:.6},{:.6},{},{}",
            r.label,
            r.strategy,
            r.no_sync,
            r.delayed_first,
            r.min_gain_dbi,
            r.max_gain_dbi,
            r.range_db,
            r.min_mcs,
            r.min_rate_mbps
        );
    }
    s
}

pub fn compare_table(rows: &[CompareRow]) -> String {
    let mut s = format!(
        "{:<22} {:>9} {:>9} {:>8} {:>5} {:>9}\n",
        "variant", "min dBi", "max dBi", "range", "mcs", "Mbps"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:<22} {:>9.2} {:>9.2} {:>8.2} {:>5} {:>9}",
            r.label, r.min_gain_dbi, r.max_gain_dbi, r.range_db, r.min_mcs, r.min_rate_mbps
        );
    }
    s
}
