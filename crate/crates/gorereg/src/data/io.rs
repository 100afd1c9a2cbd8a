//! Correspondence file format.
//!
//! Plain UTF-8 text, one pair per line: `x1 x2 x3 y1 y2 y3`, single spaces,
//! decimal floating point. `#`-prefixed lines are comments. An optional
//! header `# xi=<value>` carries the inlier threshold. Instance files add a
//! trailing ground-truth block:
//!
//! ```text
//! # truth R=<9 values row-major> t=<3 values>
//! # inliers=<comma-separated indices>
//! ```
//!
//! Values are written in shortest round-trip decimal form, so a write/read
//! cycle reproduces the exact binary doubles.

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::float::Real;
use crate::geom::{RigidTransform, Rotation, Vec3};
use crate::rigid_gore::{Correspondence, CorrespondenceSet};

use super::Instance;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Everything a correspondence file can carry.
#[derive(Debug, Clone)]
pub struct FileContents<S> {
    pub correspondences: CorrespondenceSet<S>,
    pub xi: Option<S>,
    pub ground_truth: Option<RigidTransform<S>>,
    pub planted_inliers: Option<Vec<usize>>,
}

impl<S: Real> FileContents<S> {
    /// Reassemble an [`Instance`] when the truth block is present.
    pub fn into_instance(self, fallback_xi: Option<S>) -> Option<Instance<S>> {
        Some(Instance {
            correspondences: self.correspondences,
            ground_truth: self.ground_truth?,
            planted_inliers: self.planted_inliers?,
            xi: self.xi.or(fallback_xi)?,
        })
    }
}

fn format_pairs<S: Real>(out: &mut String, corrs: &[Correspondence<S>]) {
    for c in corrs {
        out.push_str(&format!(
            "{} {} {} {} {} {}\n",
            c.x.x, c.x.y, c.x.z, c.y.x, c.y.y, c.y.z
        ));
    }
}

/// Write a bare correspondence set (with an `# xi=` header when given).
pub fn write_correspondences<S: Real>(
    path: &Path,
    corrs: &[Correspondence<S>],
    xi: Option<S>,
) -> Result<(), DataError> {
    let mut out = String::new();
    if let Some(xi) = xi {
        out.push_str(&format!("# xi={xi}\n"));
    }
    format_pairs(&mut out, corrs);
    fs::write(path, out)?;
    Ok(())
}

/// Write an instance: correspondences plus the ground-truth comment block.
pub fn write_instance<S: Real>(path: &Path, instance: &Instance<S>) -> Result<(), DataError> {
    let mut out = String::new();
    out.push_str(&format!("# xi={}\n", instance.xi));
    format_pairs(&mut out, &instance.correspondences);
    let m = instance.ground_truth.rotation.matrix();
    let t = instance.ground_truth.translation;
    out.push_str(&format!(
        "# truth R={} {} {} {} {} {} {} {} {} t={} {} {}\n",
        m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2],
        t.x, t.y, t.z
    ));
    let inliers: Vec<String> = instance.planted_inliers.iter().map(|i| i.to_string()).collect();
    out.push_str(&format!("# inliers={}\n", inliers.join(",")));
    fs::write(path, out)?;
    Ok(())
}

fn parse_scalar<S: Real>(token: &str, line: usize) -> Result<S, DataError> {
    let v: f64 = token.parse().map_err(|_| DataError::Parse {
        line,
        message: format!("not a number: {token:?}"),
    })?;
    Ok(S::c(v))
}

/// Read a correspondence file (bare set or full instance file).
pub fn read_correspondences<S: Real>(path: &Path) -> Result<FileContents<S>, DataError> {
    let text = fs::read_to_string(path)?;
    let mut corrs = Vec::new();
    let mut xi = None;
    let mut ground_truth = None;
    let mut planted = None;

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(v) = comment.strip_prefix("xi=") {
                xi = Some(parse_scalar(v.trim(), line)?);
            } else if let Some(rest) = comment.strip_prefix("truth ") {
                ground_truth = Some(parse_truth(rest.trim(), line)?);
            } else if let Some(rest) = comment.strip_prefix("inliers=") {
                planted = Some(parse_inliers(rest.trim(), line)?);
            }
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(DataError::Parse {
                line,
                message: format!("expected 6 fields, got {}", fields.len()),
            });
        }
        let mut v = [S::zero(); 6];
        for (slot, token) in v.iter_mut().zip(&fields) {
            *slot = parse_scalar(token, line)?;
        }
        corrs.push(Correspondence {
            x: Vec3::new(v[0], v[1], v[2]),
            y: Vec3::new(v[3], v[4], v[5]),
            index: corrs.len(),
        });
    }
    Ok(FileContents {
        correspondences: corrs,
        xi,
        ground_truth,
        planted_inliers: planted,
    })
}

fn parse_truth<S: Real>(rest: &str, line: usize) -> Result<RigidTransform<S>, DataError> {
    let body = rest.strip_prefix("R=").ok_or_else(|| DataError::Parse {
        line,
        message: "truth block must start with R=".into(),
    })?;
    let (r_part, t_part) = body.split_once("t=").ok_or_else(|| DataError::Parse {
        line,
        message: "truth block missing t=".into(),
    })?;
    let r_tokens: Vec<&str> = r_part.split_whitespace().collect();
    let t_tokens: Vec<&str> = t_part.split_whitespace().collect();
    if r_tokens.len() != 9 || t_tokens.len() != 3 {
        return Err(DataError::Parse {
            line,
            message: format!(
                "truth block needs 9 rotation and 3 translation values, got {} and {}",
                r_tokens.len(),
                t_tokens.len()
            ),
        });
    }
    let mut m = [[S::zero(); 3]; 3];
    for (i, tok) in r_tokens.iter().enumerate() {
        m[i / 3][i % 3] = parse_scalar(tok, line)?;
    }
    let t = Vec3::new(
        parse_scalar(t_tokens[0], line)?,
        parse_scalar(t_tokens[1], line)?,
        parse_scalar(t_tokens[2], line)?,
    );
    Ok(RigidTransform::new(Rotation::from_matrix_unchecked(m), t))
}

fn parse_inliers(rest: &str, line: usize) -> Result<Vec<usize>, DataError> {
    if rest.is_empty() {
        return Ok(Vec::new());
    }
    rest.split(',')
        .map(|tok| {
            tok.trim().parse().map_err(|_| DataError::Parse {
                line,
                message: format!("bad inlier index: {tok:?}"),
            })
        })
        .collect()
}
