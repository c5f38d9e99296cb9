//! Process-per-node pipeline backend.
//!
//! Each node runs as a child invocation of this same binary's `local`
//! subcommand: the partition is fed to the child as headerless CSV on
//! standard input and the model document comes back on standard output.
//! This exercises the exact commands users run by hand, making the wire
//! format cross a real process boundary.

use std::io::Write as _;
use std::path::PathBuf;
use std::process::{Command, Stdio};

use boundclust::boundary::{BoundaryPredicate, RhoMode};
use boundclust::datasets::format_csv;
use boundclust::geometry::Point;
use boundclust::harness::NodeBackend;
use boundclust::local_model::LocalParams;
use boundclust::{Error, Result};

pub struct Subprocess {
    exe: PathBuf,
}

impl Subprocess {
    /// A backend that spawns the currently running executable.
    pub fn current() -> Result<Self> {
        Ok(Subprocess {
            exe: std::env::current_exe()?,
        })
    }
}

impl NodeBackend for Subprocess {
    fn run_node(
        &self,
        node_id: u64,
        partition: &[Point],
        params: &LocalParams,
    ) -> Result<Vec<u8>> {
        let predicate = match params.predicate {
            BoundaryPredicate::Cone => "cone",
            BoundaryPredicate::Sphere => "sphere",
        };
        let rho = match params.rho {
            RhoMode::Auto => "auto".to_string(),
            RhoMode::AutoPerPoint => "auto_per_point".to_string(),
            // Display emits the shortest form that parses back to the same
            // bits, so the flag round-trip is lossless (same for eps and nu).
            RhoMode::Fixed(value) => value.to_string(),
        };
        let mut child = Command::new(&self.exe)
            .args(["local", "--in", "-", "--out", "-", "--no-header"])
            .args(["--node-id", &node_id.to_string()])
            .args(["--eps", &params.eps.to_string()])
            .args(["--eps-b", &params.eps_b.to_string()])
            .args(["--min-pts", &params.min_pts.to_string()])
            .args(["--nu", &params.nu.to_string()])
            .args(["--predicate", predicate])
            .args(["--rho", &rho])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()?;
        // The child reads all of stdin before writing anything, so writing
        // everything first and reading after cannot deadlock.
        child
            .stdin
            .take()
            .expect("stdin was piped")
            .write_all(format_csv(partition, None, false)?.as_bytes())?;
        let output = child.wait_with_output()?;
        if !output.status.success() {
            let stderr = String::from_utf8_lossy(&output.stderr);
            let diagnostic = stderr.lines().next().unwrap_or("no diagnostics");
            return Err(Error::Validation(format!(
                "node process exited with status {}: {diagnostic}",
                output
                    .status
                    .code()
                    .map_or_else(|| "signal".to_string(), |c| c.to_string()),
            )));
        }
        Ok(output.stdout)
    }
}
