//! Textual state expressions.
//!
//! ```text
//! eigen:<m>
//! coherent:<re>+<im>i
//! translated:<base>:<re>+<im>i
//! super:<i,j,...>:<c1,c2,...>
//! mix:<w1>*<expr1>;<w2>*<expr2>
//! ```
//!
//! Expressions parse to [`StateTag`]s, whose `Display` writes the same
//! grammar back.

use moyal_core::fock::StateTag;
use num_complex::Complex64;

use crate::CliError;

fn bad(s: &str, why: &str) -> CliError {
    CliError::Usage(format!("cannot parse state `{s}`: {why}"))
}

/// `re+imi`, `re-imi`, or a bare real number.
pub fn parse_complex(s: &str) -> Result<Complex64, CliError> {
    let t = s.trim();
    let Some(body) = t.strip_suffix('i') else {
        return t.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad(s, "expected re+imi"));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'))
        .ok_or_else(|| bad(s, "expected re+imi"))?;
    let re = body[..split].parse::<f64>().map_err(|_| bad(s, "bad real part"))?;
    let im = body[split..].parse::<f64>().map_err(|_| bad(s, "bad imaginary part"))?;
    Ok(Complex64::new(re, im))
}

pub fn parse_state(s: &str) -> Result<StateTag, CliError> {
    let (kind, rest) = s.split_once(':').ok_or_else(|| bad(s, "missing `:`"))?;
    match kind {
        "eigen" => {
            rest.parse::<usize>().map(StateTag::Eigen).map_err(|_| bad(s, "level must be a nonnegative integer"))
        }
        "coherent" => Ok(StateTag::Coherent(parse_complex(rest)?)),
        "translated" => {
            let (base, kappa) = rest.rsplit_once(':').ok_or_else(|| bad(s, "expected translated:<base>:<kappa>"))?;
            let base = parse_state(base)?;
            if matches!(base, StateTag::Mixed { .. }) {
                return Err(bad(s, "translate the components of a mixture instead"));
            }
            Ok(StateTag::Translated { base: Box::new(base), kappa: parse_complex(kappa)? })
        }
        "super" => {
            let (idx, cs) = rest.split_once(':').ok_or_else(|| bad(s, "expected super:<indices>:<coefficients>"))?;
            let indices = idx
                .split(',')
                .map(|t| t.trim().parse::<usize>().map_err(|_| bad(s, "bad index")))
                .collect::<Result<Vec<_>, _>>()?;
            let coeffs = cs.split(',').map(parse_complex).collect::<Result<Vec<_>, _>>()?;
            if indices.len() != coeffs.len() {
                return Err(bad(s, "indices and coefficients differ in number"));
            }
            Ok(StateTag::Superposition { indices, coeffs })
        }
        "mix" => {
            let mut weights = Vec::new();
            let mut tags = Vec::new();
            for part in rest.split(';') {
                let (w, e) = part.split_once('*').ok_or_else(|| bad(s, "expected <weight>*<state>"))?;
                let w = w.trim().parse::<f64>().map_err(|_| bad(s, "bad weight"))?;
                if !(w >= 0.0) {
                    return Err(bad(s, "weights must be nonnegative"));
                }
                let tag = parse_state(e)?;
                if matches!(tag, StateTag::Mixed { .. }) {
                    return Err(bad(s, "nested mixtures are not supported"));
                }
                weights.push(w);
                tags.push(tag);
            }
            Ok(StateTag::Mixed { weights, tags })
        }
        _ => Err(bad(s, "unknown kind")),
    }
}
