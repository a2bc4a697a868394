//! Plain-text artifact formats.
//!
//! Demo file: a header `env,H,T,A`, then one `traj_index,t,state,action,reward`
//! record per step in `(traj_index, t)` order. Map file: `H` lines of `G`
//! comma-separated values. Floats are written with Rust's shortest
//! round-trip formatting so every value parses back bit-exactly.

use std::fmt::Write as _;
use std::path::Path;

use crate::analysis::{CurvePoint, MapComparison, TransferPoint};
use crate::demo::{is_identifier, DemoSet, Step, Trajectory};
use crate::engine::{ProbeResult, RunLog};
use crate::error::{Error, Result};
use crate::map::ImportanceMap;

pub fn write_demos(demos: &DemoSet) -> String {
    let mut out = format!(
        "{},{},{},{}\n",
        demos.env_name(),
        demos.rows(),
        demos.frames(),
        demos.action_count()
    );
    for (h, traj) in demos.trajectories().iter().enumerate() {
        for (t, s) in traj.steps.iter().enumerate() {
            let _ = writeln!(out, "{h},{t},{},{},{}", s.state, s.action, s.reward);
        }
    }
    out
}

fn field<T: std::str::FromStr>(line: usize, name: &str, raw: &str) -> Result<T> {
    raw.trim()
        .parse()
        .map_err(|_| Error::parse(line, format!("bad {name} `{raw}`")))
}

/// Parses a demo file. Never allocates from header counts alone.
pub fn parse_demos(text: &str) -> Result<DemoSet> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines.next().ok_or_else(|| Error::parse(1, "empty demo file"))?;
    let hf: Vec<&str> = header.split(',').collect();
    if hf.len() != 4 {
        return Err(Error::parse(hline, "header must be `env,H,T,A`"));
    }
    let env = hf[0].trim();
    if !is_identifier(env) {
        return Err(Error::parse(hline, format!("bad environment name `{env}`")));
    }
    let rows: usize = field(hline, "H", hf[1])?;
    let frames: usize = field(hline, "T", hf[2])?;
    let actions: usize = field(hline, "A", hf[3])?;

    let short = |h: usize, n: usize| {
        Error::Validation(format!("trajectory {h} has {n} steps, header says T={frames}"))
    };
    let mut trajectories: Vec<Trajectory> = Vec::new();
    for (ln, line) in lines {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 5 {
            return Err(Error::parse(ln, format!("expected 5 fields, got {}", f.len())));
        }
        let h: usize = field(ln, "trajectory index", f[0])?;
        let t: usize = field(ln, "frame index", f[1])?;
        let state: usize = field(ln, "state", f[2])?;
        let action: usize = field(ln, "action", f[3])?;
        let reward: f64 = field(ln, "reward", f[4])?;
        if !reward.is_finite() {
            return Err(Error::parse(ln, "reward must be finite"));
        }
        if h >= rows {
            return Err(Error::Validation(format!(
                "line {ln}: trajectory {h} beyond header H={rows}"
            )));
        }
        if action >= actions {
            return Err(Error::Validation(format!(
                "line {ln}: action {action} beyond header A={actions}"
            )));
        }
        let current = trajectories.len();
        if h + 1 == current {
            // continuing the current trajectory
        } else if h == current {
            if let Some(prev) = trajectories.last() {
                if prev.len() != frames {
                    return Err(short(h - 1, prev.len()));
                }
            }
            trajectories.push(Trajectory { steps: Vec::new() });
        } else {
            return Err(Error::parse(
                ln,
                format!(
                    "trajectory {h} out of order (expected {})",
                    current.saturating_sub(1)
                ),
            ));
        }
        let traj = trajectories.last_mut().expect("pushed above");
        if t != traj.len() {
            return Err(Error::parse(
                ln,
                format!("trajectory {h}: frame {t} out of order (expected {})", traj.len()),
            ));
        }
        if t >= frames {
            return Err(short(h, t + 1));
        }
        traj.steps.push(Step {
            state,
            action,
            reward,
        });
    }
    if let Some((h, traj)) = trajectories.iter().enumerate().find(|(_, t)| t.len() != frames) {
        return Err(short(h, traj.len()));
    }
    if trajectories.len() != rows {
        return Err(Error::Validation(format!(
            "file has {} trajectories, header says H={rows}",
            trajectories.len()
        )));
    }
    DemoSet::new(env, frames, actions, trajectories)
}

pub fn write_map_csv(rows: usize, cols: usize, values: &[f64]) -> String {
    debug_assert_eq!(rows * cols, values.len());
    let mut out = String::new();
    for row in values.chunks(cols) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn parse_map_csv(text: &str) -> Result<ImportanceMap> {
    let mut values = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|raw| {
                let v: f64 = field(i + 1, "map value", raw)?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::parse(i + 1, "map values must be finite"))
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        match cols {
            None => cols = Some(row.len()),
            Some(c) if c != row.len() => {
                return Err(Error::parse(
                    i + 1,
                    format!("expected {c} values, got {}", row.len()),
                ))
            }
            _ => {}
        }
        values.extend(row);
        rows += 1;
    }
    let cols = cols.ok_or_else(|| Error::parse(1, "empty map file"))?;
    ImportanceMap::from_values(rows, cols, values)
}

/// 8-bit grayscale levels: `(v - min) / (max - min) · 255`, rounded; a
/// constant field is mid-gray 128.
pub fn gray_levels(values: &[f64]) -> Result<Vec<u8>> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Contract("cannot render non-finite values".into()));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        return Ok(vec![128; values.len()]);
    }
    Ok(values
        .iter()
        .map(|v| ((v - lo) / (hi - lo) * 255.0).round() as u8)
        .collect())
}

/// Plain (P2) PGM, one image row per trajectory, white = most important.
pub fn write_pgm(rows: usize, cols: usize, values: &[f64]) -> Result<String> {
    let levels = gray_levels(values)?;
    let mut out = format!("P2\n{cols} {rows}\n255\n");
    for row in levels.chunks(cols) {
        let line: Vec<String> = row.iter().map(u8::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    Ok(out)
}

pub fn write_runlog(log: &RunLog) -> String {
    let mut out = String::from(
        "mask_index,derived_seed,masked_cell_count,mean_return,std_return,empty_trainset,wall_time_s,mask\n",
    );
    for r in &log.records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.mask_index,
            r.derived_seed,
            r.masked_cell_count,
            r.mean_return,
            r.std_return,
            u8::from(r.empty_trainset),
            r.wall_time.as_secs_f64(),
            r.mask.to_bits()
        );
    }
    out
}

pub fn write_probe(results: &[ProbeResult]) -> String {
    let mut out = String::from("probe_index,kept_cells,mean_return,std_return,empty_trainset,mask\n");
    for (i, r) in results.iter().enumerate() {
        let _ = writeln!(
            out,
            "{i},{},{},{},{},{}",
            r.mask.kept_count(),
            r.stats.mean,
            r.stats.std,
            u8::from(r.empty_trainset),
            r.mask.to_bits()
        );
    }
    out
}

pub fn write_curves(run_seed: u64, points: &[CurvePoint]) -> String {
    let mut out = String::from(
        "run_seed,percent,mode,point_seed,kept_cells,mean_return,std_return,empty_trainset,error\n",
    );
    for p in points {
        let (mean, std) = p.stats.as_ref().map_or((String::new(), String::new()), |s| {
            (s.mean.to_string(), s.std.to_string())
        });
        let _ = writeln!(
            out,
            "{run_seed},{},{},{},{},{mean},{std},{},{}",
            p.percent_kept,
            p.mode,
            p.seed,
            p.kept_cells,
            u8::from(p.empty_trainset),
            p.error.as_deref().unwrap_or("").replace([',', '\n'], ";")
        );
    }
    out
}

pub fn write_transfer(run_seed: u64, percent: f64, points: &[TransferPoint]) -> String {
    let mut out = String::from(
        "run_seed,percent,condition,kept_cells,mean_return,std_return,empty_trainset,round_returns\n",
    );
    for p in points {
        let rounds: Vec<String> = p.round_returns.iter().map(f64::to_string).collect();
        let _ = writeln!(
            out,
            "{run_seed},{percent},{},{},{},{},{},{}",
            p.condition,
            p.mask.kept_count(),
            p.stats.mean,
            p.stats.std,
            u8::from(p.empty_trainset),
            rounds.join(";")
        );
    }
    out
}

pub fn write_comparison_summary(c: &MapComparison) -> String {
    format!(
        "rows,cols,mean_deviation,max_deviation\n{},{},{},{}\n",
        c.rows, c.cols, c.mean, c.max
    )
}

pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn save_demos(path: &Path, demos: &DemoSet) -> Result<()> {
    write_file(path, &write_demos(demos))
}

pub fn load_demos(path: &Path) -> Result<DemoSet> {
    parse_demos(&read_file(path)?)
}

pub fn load_map(path: &Path) -> Result<ImportanceMap> {
    Ok(parse_map_csv(&read_file(path)?)?.with_provenance(path.display().to_string()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MapFormat {
    Csv,
    Pgm,
}

pub fn export_map(map: &ImportanceMap, path: &Path, format: MapFormat) -> Result<()> {
    let text = match format {
        MapFormat::Csv => write_map_csv(map.rows(), map.cols(), map.values()),
        MapFormat::Pgm => write_pgm(map.rows(), map.cols(), map.values())?,
    };
    write_file(path, &text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_demos() -> DemoSet {
        let traj = |off: usize| Trajectory {
            steps: (0..4)
                .map(|t| Step {
                    state: off + t,
                    action: t % 2,
                    reward: if t == 3 { 0.1 + 0.2 } else { -1.0 },
                })
                .collect(),
        };
        DemoSet::new("keydoor", 4, 5, vec![traj(0), traj(7)]).unwrap()
    }

    #[test]
    fn demo_round_trip_is_exact() {
        let d = small_demos();
        let text = write_demos(&d);
        assert!(text.starts_with("keydoor,2,4,5\n0,0,0,0,-1\n"));
        let back = parse_demos(&text).unwrap();
        assert_eq!(back, d);
        for (a, b) in back.trajectories().iter().zip(d.trajectories()) {
            for (x, y) in a.steps.iter().zip(&b.steps) {
                assert_eq!(x.reward.to_bits(), y.reward.to_bits());
            }
        }
    }

    #[test]
    fn short_trajectory_is_named() {
        let text = "keydoor,2,4,5\n0,0,1,0,-1\n0,1,1,0,-1\n0,2,1,0,-1\n1,0,1,0,-1\n1,1,1,0,-1\n1,2,1,0,-1\n1,3,1,0,-1\n";
        let err = parse_demos(text).unwrap_err();
        assert!(
            matches!(err, Error::Validation(ref m) if m.contains("trajectory 0")),
            "{err}"
        );
        let text = "keydoor,2,4,5\n0,0,1,0,-1\n0,1,1,0,-1\n0,2,1,0,-1\n0,3,1,0,-1\n1,0,1,0,-1\n";
        let err = parse_demos(text).unwrap_err();
        assert!(
            matches!(err, Error::Validation(ref m) if m.contains("trajectory 1")),
            "{err}"
        );
    }

    #[test]
    fn malformed_lines_report_line_numbers() {
        let err = parse_demos("keydoor,1,2,5\n0,0,1,0,-1\n0,1,x,0,-1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = parse_demos("keydoor,1,2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = parse_demos("keydoor,1,2,5\n0,1,1,0,-1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(parse_demos("").is_err());
        assert!(parse_demos("keydoor,1,1,5\n0,0,1,0,NaN\n").is_err());
        assert!(parse_demos("keydoor,99999999999999,1,5\n").is_err());
    }

    #[test]
    fn large_demo_file_loads() {
        let mut text = String::from("keydoor,20,1000,5\n");
        for h in 0..20 {
            for t in 0..1000 {
                let _ = writeln!(text, "{h},{t},{},{},-1", t % 51, t % 5);
            }
        }
        let d = parse_demos(&text).unwrap();
        assert_eq!((d.rows(), d.frames()), (20, 1000));
    }

    #[test]
    fn pgm_scaling() {
        assert_eq!(gray_levels(&[0.0, 1.0]).unwrap(), vec![0, 255]);
        assert_eq!(gray_levels(&[-3.0, -3.0, -3.0]).unwrap(), vec![128; 3]);
        assert_eq!(gray_levels(&[-2.0, 0.0, 2.0]).unwrap(), vec![0, 128, 255]);
        assert!(gray_levels(&[0.0, f64::NAN]).is_err());
        let pgm = write_pgm(1, 2, &[0.0, 1.0]).unwrap();
        assert_eq!(pgm, "P2\n2 1\n255\n0 255\n");
    }

    #[test]
    fn large_pgm_layout() {
        let values: Vec<f64> = (0..2000).map(|i| i as f64).collect();
        let pgm = write_pgm(20, 100, &values).unwrap();
        let mut lines = pgm.lines();
        assert_eq!(lines.next(), Some("P2"));
        assert_eq!(lines.next(), Some("100 20"));
        assert_eq!(lines.next(), Some("255"));
        let body: Vec<&str> = lines.collect();
        assert_eq!(body.len(), 20);
        assert!(body.iter().all(|l| l.split(' ').count() == 100));
    }

    #[test]
    fn map_csv_round_trip_and_errors() {
        let m = ImportanceMap::from_values(2, 3, vec![0.1, -2.5, 1e-300, 3.0, 7.25, -0.0]).unwrap();
        let text = write_map_csv(2, 3, m.values());
        let back = parse_map_csv(&text).unwrap();
        assert_eq!(back.rows(), 2);
        for (a, b) in back.values().iter().zip(m.values()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert!(matches!(
            parse_map_csv("1,2\n3\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(parse_map_csv("").is_err());
        assert!(parse_map_csv("1,inf\n").is_err());
    }
}
