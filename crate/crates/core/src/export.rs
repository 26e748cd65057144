//! CSV renderings of the library's tables. Floats use Rust's shortest
//! round-trip formatting, so identical inputs give byte-identical text.

use std::fmt::Write;

use nalgebra::DMatrix;

use crate::dynamics::Trajectory;
use crate::experiments::{MuSample, SweepRow};

fn table<I, R>(header: &str, rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        let fields: Vec<String> = row.into_iter().collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

fn num(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !a.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Row-major `i,j,value` listing of every entry.
pub fn operator_csv(m: &DMatrix<f64>) -> String {
    let mut out = String::from("i,j,value\n");
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let _ = writeln!(out, "{i},{j},{}", num(m[(i, j)]));
        }
    }
    out
}

pub fn eigenfunction_csv(x: &[f64], phi: &[f64]) -> String {
    table("x,phi", x.iter().zip(phi).map(|(x, p)| [num(*x), num(*p)]))
}

pub fn profile_csv(x: &[f64], sstar: &[f64], beta: &[f64], alpha: &[f64]) -> String {
    table("x,Sstar,beta,alpha", (0..x.len()).map(|k| [num(x[k]), num(sstar[k]), num(beta[k]), num(alpha[k])]))
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    table(
        "t,g,h,supS,supI,lenEnvelope",
        (0..traj.len()).map(|k| {
            [
                num(traj.times[k]),
                num(traj.g[k]),
                num(traj.h[k]),
                num(traj.sup_s[k]),
                num(traj.sup_i[k]),
                num(traj.len_envelope[k]),
            ]
        }),
    )
}

/// Active cells of every recorded snapshot.
pub fn snapshots_csv(traj: &Trajectory) -> String {
    let xs = traj.grid.centers();
    let mut out = String::from("t,x,S,I\n");
    for snap in &traj.snapshots {
        for (k, x) in xs.iter().enumerate() {
            if snap.s[k] != 0.0 || snap.i[k] != 0.0 {
                let _ = writeln!(out, "{},{},{},{}", snap.t, x, snap.s[k], snap.i[k]);
            }
        }
    }
    out
}

pub fn sweep_d_csv(rows: &[SweepRow]) -> String {
    table("d,lambda_p,gap", rows.iter().map(|r| [num(r.param), num(r.lambda_p), num(r.gap)]))
}

pub fn sweep_eps_csv(rows: &[SweepRow]) -> String {
    table("eps,lambda_p,gap", rows.iter().map(|r| [num(r.param), num(r.lambda_p), num(r.gap)]))
}

pub fn mu_csv(samples: &[MuSample]) -> String {
    table(
        "mu,verdict,supI_final,final_length",
        samples
            .iter()
            .map(|s| [num(s.mu), s.verdict.as_str().to_string(), num(s.sup_i_final), num(s.final_length)]),
    )
}
