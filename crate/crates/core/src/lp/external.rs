use std::process::Command;

use regex::Regex;
use thiserror::Error;

use super::{LpResult, LpStatus};
use crate::model::export::write_lp;
use crate::model::Model;

/// Environment variable holding the external solver command template.
pub const EXTERNAL_SOLVER_ENV: &str = "TTP_EXT_SOLVER";

#[derive(Debug, Error)]
pub enum ExternalError {
    #[error("no external solver configured (set {EXTERNAL_SOLVER_ENV})")]
    NotConfigured,
    #[error("command template must contain {{lp}}")]
    BadTemplate,
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("external solver exited with {status}: {stderr}")]
    Failed { status: String, stderr: String },
    #[error("could not parse solver output: {0}")]
    Unparseable(String),
}

/// Template from the environment, if set and non-empty.
pub fn external_command_from_env() -> Option<String> {
    std::env::var(EXTERNAL_SOLVER_ENV).ok().filter(|s| !s.trim().is_empty())
}

fn parse_solution(text: &str) -> Result<(LpStatus, f64), ExternalError> {
    let lower = text.to_ascii_lowercase();
    let status = if lower.contains("infeasible") {
        LpStatus::Infeasible
    } else if lower.contains("unbounded") {
        LpStatus::Unbounded
    } else if lower.contains("optimal") {
        LpStatus::Optimal
    } else {
        return Err(ExternalError::Unparseable("no status".into()));
    };
    if status != LpStatus::Optimal {
        return Ok((status, f64::NAN));
    }
    let re = Regex::new(r"(?i)objective[^0-9+\-]*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)").unwrap();
    let value = text
        .lines()
        .find_map(|l| re.captures(l))
        .and_then(|c| c[1].parse::<f64>().ok())
        .ok_or_else(|| ExternalError::Unparseable("no objective value".into()))?;
    Ok((status, value))
}

/// Writes the model as an LP file, runs `template` through `sh -c` with
/// `{lp}` and `{sol}` substituted, and reads status and objective from the
/// solution file (or stdout when the template has no `{sol}`).
pub fn solve_external(model: &Model, template: &str) -> Result<LpResult, ExternalError> {
    if !template.contains("{lp}") {
        return Err(ExternalError::BadTemplate);
    }
    let dir = tempfile::tempdir()?;
    let lp = dir.path().join("model.lp");
    let sol = dir.path().join("model.sol");
    std::fs::write(&lp, write_lp(&model.relax()))?;
    let cmd = template.replace("{lp}", &lp.display().to_string()).replace("{sol}", &sol.display().to_string());
    let out = Command::new("sh").arg("-c").arg(&cmd).output()?;
    if !out.status.success() {
        return Err(ExternalError::Failed {
            status: out.status.to_string(),
            stderr: String::from_utf8_lossy(&out.stderr).trim().to_string(),
        });
    }
    let text = if template.contains("{sol}") {
        std::fs::read_to_string(&sol)?
    } else {
        String::from_utf8_lossy(&out.stdout).into_owned()
    };
    let (status, objective) = parse_solution(&text)?;
    Ok(LpResult {
        status,
        objective,
        exact_objective: None,
        primal: Vec::new(),
        exact_primal: None,
        iterations: 0,
        ray: None,
        infeasibility: 0.0,
        certified_basis: false,
        basis: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_common_layouts() {
        assert_eq!(parse_solution("Status optimal\nObjective value: 12.5\n").unwrap(), (LpStatus::Optimal, 12.5));
        assert_eq!(parse_solution("status optimal\nobjective 3e1").unwrap(), (LpStatus::Optimal, 30.0));
        assert_eq!(parse_solution("Model status : Infeasible").unwrap().0, LpStatus::Infeasible);
        assert!(parse_solution("optimal").is_err());
        assert!(parse_solution("garbage").is_err());
    }

    #[test]
    fn template_checks() {
        let m = crate::model::empty_model(&crate::instances::gen_con(4).unwrap());
        assert!(matches!(solve_external(&m, "true"), Err(ExternalError::BadTemplate)));
        assert!(matches!(solve_external(&m, "false {lp}"), Err(ExternalError::Failed { .. })));
        let r = solve_external(&m, "echo 'optimal objective 0' # {lp}").unwrap();
        assert_eq!(r.objective, 0.0);
    }
}
