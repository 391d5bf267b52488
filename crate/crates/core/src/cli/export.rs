//! File writers. Floats use Rust's shortest round-trip formatting so that
//! outputs are byte-stable and parse back exactly.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::costmodel::PipelineSchedule;
use crate::orchestrator::IterationRecord;
use crate::solver::GlobalField;

/// Output directory that remembers what it wrote, for the manifest.
pub struct OutDir {
    root: PathBuf,
    files: Vec<(String, String, usize)>,
}

impl OutDir {
    pub fn create(root: &Path) -> io::Result<Self> {
        fs::create_dir_all(root)?;
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> io::Result<()> {
        fs::write(self.root.join(name), bytes)?;
        let digest = hex::encode(Sha256::digest(bytes));
        self.files.push((name.to_string(), digest, bytes.len()));
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> io::Result<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// Writes `manifest.json` listing every file written so far.
    pub fn finish(mut self, command: &str, config: Value) -> io::Result<PathBuf> {
        let files: Vec<Value> = self
            .files
            .iter()
            .map(|(name, sha, bytes)| json!({ "name": name, "sha256": sha, "bytes": bytes }))
            .collect();
        let manifest = json!({
            "command": command,
            "config": config,
            "files": files,
        });
        self.write_json("manifest.json", &manifest)?;
        self.files.pop();
        Ok(self.root.join("manifest.json"))
    }
}

/// `t,x,u,certified`, one line per node, time-major.
pub fn field_csv(field: &GlobalField<f64>) -> String {
    let g = &field.grid;
    let mut s = String::from("t,x,u,certified\n");
    for n in 0..g.nt {
        let t = g.t(n);
        for i in 0..g.nx {
            let _ = writeln!(
                s,
                "{t},{},{},{}",
                g.x(i),
                field.get(n, i),
                u8::from(field.certified(n, i))
            );
        }
    }
    s
}

/// One line per time level, `0`/`1` per node.
pub fn mask_csv(field: &GlobalField<f64>) -> String {
    let mut s = String::new();
    for n in 0..field.grid.nt {
        let row: Vec<&str> = field
            .mask_row(n)
            .iter()
            .map(|&m| if m { "1" } else { "0" })
            .collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

/// Little-endian binary dump: header `nx, nt, dx_left, dx_right, dt, L, T,
/// c_left, c_right` as f64, then `nt * nx` values, then `nt * nx` mask bytes.
pub fn field_bin(field: &GlobalField<f64>) -> Vec<u8> {
    let g = &field.grid;
    let header = [
        g.nx as f64,
        g.nt as f64,
        g.dx_left,
        g.dx_right,
        g.dt,
        g.length,
        g.final_time,
        g.c_left,
        g.c_right,
    ];
    let mut out = Vec::with_capacity(8 * (header.len() + field.values().len()) + field.mask().len());
    for v in header.iter().chain(field.values()) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend(field.mask().iter().map(|&m| u8::from(m)));
    out
}

pub fn iterations_jsonl(records: &[IterationRecord]) -> String {
    let mut s = String::new();
    for r in records {
        s.push_str(&serde_json::to_string(r).expect("record serializes"));
        s.push('\n');
    }
    s
}

/// `process,k,j,cost,start,end,idle_after`.
pub fn pipeline_csv(p: &PipelineSchedule<f64>) -> String {
    let mut s = String::from("process,k,j,cost,start,end,idle_after\n");
    for t in &p.tasks {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            t.process, t.k, t.j, t.cost, t.start, t.end, t.idle_after
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ProblemConfig;
    use crate::solver::{monolithic_solve, Grid};

    #[test]
    fn csv_round_trips_floats() {
        let cfg = ProblemConfig::<f64>::baseline();
        let grid = Grid::new(&cfg).unwrap();
        let field = monolithic_solve(&cfg, &grid);
        let csv = field_csv(&field);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 1 + grid.nx * grid.nt);
        let (n, i) = (17, 40);
        let cols: Vec<&str> = lines[1 + n * grid.nx + i].split(',').collect();
        assert_eq!(cols[2].parse::<f64>().unwrap(), field.get(n, i));
        assert_eq!(cols[3], "1");
    }

    #[test]
    fn binary_layout() {
        let cfg = ProblemConfig::<f64>::baseline();
        let grid = Grid::new(&cfg).unwrap();
        let field = monolithic_solve(&cfg, &grid);
        let bin = field_bin(&field);
        assert_eq!(bin.len(), 8 * (9 + grid.nx * grid.nt) + grid.nx * grid.nt);
        let nx = f64::from_le_bytes(bin[0..8].try_into().unwrap());
        assert_eq!(nx as usize, grid.nx);
    }

    #[test]
    fn manifest_lists_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutDir::create(dir.path()).unwrap();
        out.write("a.txt", b"abc").unwrap();
        let path = out.finish("run", json!({})).unwrap();
        let m: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
        assert_eq!(m["files"][0]["name"], "a.txt");
        assert_eq!(
            m["files"][0]["sha256"],
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
