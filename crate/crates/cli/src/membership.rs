//! `conevol membership`.

use clap::ValueEnum;
use conevol::forms::HomogeneousForm;
use conevol::membership::{is_convex, is_nonneg, sos_project, GramStatus, SolverConfig};
use serde::{Deserialize, Serialize};

use crate::manifest::RunManifest;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Test {
    Nonneg,
    Convex,
    Sos,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Holds,
    Fails,
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub test: Test,
    pub status: Status,
    /// `true`/`false`, or `null` when undecided.
    pub holds: Option<bool>,
    /// Minimum found by the sphere search (`nonneg`, `convex`) or the least
    /// Gram eigenvalue (`sos`).
    pub margin: f64,
    /// The optimizer did not converge; the decision rests on its best point.
    pub flagged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateSummary {
    pub monomials: usize,
    pub affine_residual: f64,
    pub min_eigenvalue: f64,
    pub iterations: usize,
    pub gap_estimate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub manifest: RunManifest,
    pub form: HomogeneousForm,
    pub tol: f64,
    pub results: Vec<Outcome>,
}

fn from_bool(holds: bool) -> Status {
    if holds {
        Status::Holds
    } else {
        Status::Fails
    }
}

pub fn run_test(p: &HomogeneousForm, test: Test, tol: f64) -> anyhow::Result<Outcome> {
    let out = match test {
        Test::Nonneg | Test::Convex => {
            let dec = if test == Test::Nonneg { is_nonneg(p, tol)? } else { is_convex(p, tol)? };
            Outcome {
                test,
                status: from_bool(dec.holds),
                holds: Some(dec.holds),
                margin: dec.margin,
                flagged: dec.flagged,
                certificate: None,
            }
        }
        Test::Sos => {
            let cert = sos_project(p, &SolverConfig::default())?;
            let status = match cert.status {
                GramStatus::Feasible => Status::Holds,
                GramStatus::Infeasible => Status::Fails,
                GramStatus::Undecided => Status::Undecided,
            };
            Outcome {
                test,
                status,
                holds: match status {
                    Status::Undecided => None,
                    s => Some(s == Status::Holds),
                },
                margin: cert.min_eigenvalue,
                flagged: false,
                certificate: Some(CertificateSummary {
                    monomials: cert.monomials.len(),
                    affine_residual: cert.affine_residual,
                    min_eigenvalue: cert.min_eigenvalue,
                    iterations: cert.iterations,
                    gap_estimate: cert.gap_estimate,
                }),
            }
        }
    };
    Ok(out)
}

pub fn membership(p: HomogeneousForm, tests: &[Test], tol: f64, manifest: RunManifest) -> anyhow::Result<MembershipReport> {
    let results = tests.iter().map(|&t| run_test(&p, t, tol)).collect::<anyhow::Result<Vec<_>>>()?;
    Ok(MembershipReport { manifest, form: p, tol, results })
}
