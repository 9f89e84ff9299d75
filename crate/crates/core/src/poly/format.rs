//! Text form of polynomials, in the grammar accepted by the parser:
//! `3/7*x1^2*x2*y^3 - 1/2*y + 1`.

use std::fmt::Write;

use crate::scalar::Scalar;

/// Formats terms `(coeff, deg x1, deg x2, deg y)`; terms are written in the
/// order given, zero coefficients skipped.
pub fn format_terms<T: Scalar>(terms: impl IntoIterator<Item = (T, usize, usize, usize)>) -> String {
    let mut out = String::new();
    for (c, a, b, l) in terms {
        if c.is_zero() {
            continue;
        }
        let neg = c.is_negative();
        let mag = c.abs();
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let mut factors: Vec<String> = Vec::new();
        for (name, e) in [("x1", a), ("x2", b), ("y", l)] {
            match e {
                0 => {}
                1 => factors.push(name.to_string()),
                _ => factors.push(format!("{name}^{e}")),
            }
        }
        if !mag.is_one() || factors.is_empty() {
            let _ = write!(out, "{mag}");
            if !factors.is_empty() {
                out.push('*');
            }
        }
        out.push_str(&factors.join("*"));
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}
