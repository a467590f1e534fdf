//! Reference implementation of the external-simulator wire protocol.
//!
//! Reads `{"theta":[...],"seed":<u64>}` lines on stdin and answers one
//! `{"t":[...]}` line per request. The model is the built-in logistic
//! regression with its covariate design loaded from the JSON file given as
//! the first argument (a nested array, one row per observation), and the
//! stream is rebuilt from the wire seed — so a fit through this process is
//! bit-identical to the in-process model on the same design.

use std::io::{BufRead, Write};

use ifit_core::models::logit::LogitModel;
use ifit_core::sampling::RngStream;
use ifit_core::simulator::Simulator;
use nalgebra::DMatrix;

#[derive(serde::Deserialize)]
struct Request {
    theta: Vec<f64>,
    seed: u64,
}

fn main() {
    let design_path = std::env::args()
        .nth(1)
        .expect("usage: logit_protocol_stub <design.json>");
    let rows: Vec<Vec<f64>> = serde_json::from_str(
        &std::fs::read_to_string(&design_path).expect("readable design file"),
    )
    .expect("design file is a nested JSON array");
    let design = DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j]);
    let model = LogitModel::new(design);

    let stdin = std::io::stdin();
    let mut stdout = std::io::stdout();
    for line in stdin.lock().lines() {
        let line = line.expect("readable stdin");
        if line.trim().is_empty() {
            continue;
        }
        let request: Request = serde_json::from_str(&line).expect("well-formed request");
        let mut stream = RngStream::from_raw(request.seed);
        let t = model
            .simulate(&request.theta, &mut stream)
            .expect("logit simulation cannot fail");
        let payload = serde_json::json!({ "t": t });
        writeln!(stdout, "{payload}").expect("writable stdout");
        stdout.flush().expect("flushable stdout");
    }
}
