//! External simulators as child processes speaking newline-delimited JSON:
//! one `{"theta":[...],"seed":<u64>}` request line on stdin, one
//! `{"t":[...]}` response line on stdout per simulation.

use std::io::Write;
use std::path::PathBuf;
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::time::Duration;

use ifit_core::bounds::Bounds;
use ifit_core::error::{Error, Result};
use ifit_core::sampling::RngStream;
use ifit_core::simulator::Simulator;
use serde::{Deserialize, Serialize};

#[derive(Serialize)]
struct Request<'a> {
    theta: &'a [f64],
    seed: u64,
}

#[derive(Deserialize)]
struct Response {
    t: Vec<f64>,
}

struct ChildHandle {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
}

impl ChildHandle {
    fn spawn(program: &PathBuf, args: &[String]) -> Result<Self> {
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::Protocol(format!("failed to spawn {}: {e}", program.display())))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = std::sync::mpsc::channel();
        std::thread::spawn(move || {
            use std::io::BufRead;
            let reader = std::io::BufReader::new(stdout);
            for line in reader.lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(Self { child, stdin, lines: rx })
    }

    fn kill(mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// A restartable failure: the child hung or died; a fresh child may answer.
enum CallFailure {
    Restartable(String),
    Fatal(Error),
}

/// An external generative model driven over the wire protocol. A pool of
/// child processes serves concurrent batch simulation, one in-flight
/// request per child; the pool grows to the engine's concurrency level.
pub struct SubprocessSimulator {
    program: PathBuf,
    args: Vec<String>,
    dim_stat: usize,
    bounds: Bounds,
    timeout: Duration,
    pool: Mutex<Vec<ChildHandle>>,
}

impl SubprocessSimulator {
    pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

    pub fn new(program: impl Into<PathBuf>, bounds: Bounds, dim_stat: usize) -> Self {
        Self::with_timeout(program, bounds, dim_stat, Self::DEFAULT_TIMEOUT)
    }

    pub fn with_timeout(
        program: impl Into<PathBuf>,
        bounds: Bounds,
        dim_stat: usize,
        timeout: Duration,
    ) -> Self {
        Self {
            program: program.into(),
            args: Vec::new(),
            dim_stat,
            bounds,
            timeout,
            pool: Mutex::new(Vec::new()),
        }
    }

    /// Extra command-line arguments passed to every child.
    pub fn with_args(mut self, args: Vec<String>) -> Self {
        self.args = args;
        self
    }

    fn checkout(&self) -> Result<ChildHandle> {
        if let Some(handle) = self.pool.lock().expect("pool lock").pop() {
            return Ok(handle);
        }
        ChildHandle::spawn(&self.program, &self.args)
    }

    fn checkin(&self, handle: ChildHandle) {
        self.pool.lock().expect("pool lock").push(handle);
    }

    fn request(
        &self,
        handle: &mut ChildHandle,
        theta: &[f64],
        seed: u64,
    ) -> std::result::Result<Vec<f64>, CallFailure> {
        let line = serde_json::to_string(&Request { theta, seed })
            .expect("request serialization is infallible");
        if let Err(e) = writeln!(handle.stdin, "{line}").and_then(|_| handle.stdin.flush()) {
            return Err(CallFailure::Restartable(format!("write to child failed: {e}")));
        }
        let line = match handle.lines.recv_timeout(self.timeout) {
            Ok(Ok(line)) => line,
            Ok(Err(e)) => {
                return Err(CallFailure::Restartable(format!("read from child failed: {e}")))
            }
            Err(RecvTimeoutError::Timeout) => {
                return Err(CallFailure::Restartable(format!(
                    "no response within {:?}",
                    self.timeout
                )))
            }
            Err(RecvTimeoutError::Disconnected) => {
                return Err(CallFailure::Restartable("child closed its stdout".into()))
            }
        };
        let response: Response = serde_json::from_str(&line).map_err(|e| {
            CallFailure::Fatal(Error::Protocol(format!("malformed response line: {e}")))
        })?;
        if response.t.len() != self.dim_stat {
            return Err(CallFailure::Fatal(Error::Protocol(format!(
                "summary has length {}, expected {}",
                response.t.len(),
                self.dim_stat
            ))));
        }
        Ok(response.t)
    }
}

impl Simulator for SubprocessSimulator {
    fn dim_theta(&self) -> usize {
        self.bounds.dim()
    }

    fn dim_stat(&self) -> usize {
        self.dim_stat
    }

    fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    fn simulate(&self, theta: &[f64], rng: &mut RngStream) -> Result<Vec<f64>> {
        // The stream identity is the wire seed; a deterministic external
        // simulator regenerates the exact in-process stream from it.
        let seed = rng.raw_id();
        let mut handle = self.checkout()?;
        match self.request(&mut handle, theta, seed) {
            Ok(t) => {
                self.checkin(handle);
                Ok(t)
            }
            Err(CallFailure::Fatal(e)) => {
                self.checkin(handle);
                Err(e)
            }
            Err(CallFailure::Restartable(first)) => {
                // Restart the child and retry exactly once.
                handle.kill();
                let mut fresh = ChildHandle::spawn(&self.program, &self.args)?;
                match self.request(&mut fresh, theta, seed) {
                    Ok(t) => {
                        self.checkin(fresh);
                        Ok(t)
                    }
                    Err(CallFailure::Fatal(e)) => {
                        self.checkin(fresh);
                        Err(e)
                    }
                    Err(CallFailure::Restartable(second)) => {
                        fresh.kill();
                        Err(Error::Protocol(format!(
                            "simulation failed twice: {first}; after restart: {second}"
                        )))
                    }
                }
            }
        }
    }
}

impl Drop for SubprocessSimulator {
    fn drop(&mut self) {
        if let Ok(mut pool) = self.pool.lock() {
            for handle in pool.drain(..) {
                handle.kill();
            }
        }
    }
}
