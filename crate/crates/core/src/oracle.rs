//! Slow reference computations for the canonical C-system.
//!
//! These enumerate fundamental sequences point by point instead of using the
//! ladder-index arithmetic of the main code, and serve as independent checks.

use crate::error::Result;
use crate::ordinal::{Kind, Ordinal};

/// Least ladder point of a canonical `C_beta` that is `>= alpha`, by enumeration.
pub fn canonical_min_above(beta: &Ordinal, alpha: &Ordinal) -> Result<Ordinal> {
    match beta.classify() {
        Kind::Successor(p) => Ok(p),
        Kind::Limit => {
            let mut n = 0;
            loop {
                let x = beta.fund_seq(n)?;
                if &x >= alpha {
                    return Ok(x);
                }
                n += 1;
            }
        }
        Kind::Zero => unreachable!("empty ladder"),
    }
}

/// Number of canonical ladder points of `beta` below `alpha < beta`, by enumeration.
pub fn canonical_count_below(beta: &Ordinal, alpha: &Ordinal) -> Result<u64> {
    match beta.classify() {
        Kind::Zero => Ok(0),
        Kind::Successor(p) => Ok(u64::from(&p < alpha)),
        Kind::Limit => {
            let mut n = 0;
            while &beta.fund_seq(n)? < alpha {
                n += 1;
            }
            Ok(n)
        }
    }
}

/// The walk from `beta` to `alpha` under canonical ladders.
pub fn canonical_trace(alpha: &Ordinal, beta: &Ordinal) -> Result<Vec<Ordinal>> {
    let mut out = vec![beta.clone()];
    let mut cur = beta.clone();
    while &cur != alpha {
        cur = canonical_min_above(&cur, alpha)?;
        out.push(cur.clone());
    }
    Ok(out)
}

pub fn canonical_rho1(alpha: &Ordinal, beta: &Ordinal) -> Result<u64> {
    let tr = canonical_trace(alpha, beta)?;
    let mut m = 0;
    for x in &tr[..tr.len() - 1] {
        m = m.max(canonical_count_below(x, alpha)?);
    }
    Ok(m)
}

pub fn canonical_rho2(alpha: &Ordinal, beta: &Ordinal) -> Result<u64> {
    Ok(canonical_trace(alpha, beta)?.len() as u64)
}
