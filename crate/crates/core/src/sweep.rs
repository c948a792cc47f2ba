//! Tabulated comparisons of the spectral distance and the quantum length.

use crate::spectral::Method;

/// Value columns, in output order.
pub const VALUE_COLUMNS: [&str; 6] = ["d_D", "d_L", "d_L2", "d_L_mod", "rel_gap", "feasibility"];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub family: String,
    pub m: usize,
    pub n: usize,
    /// `|kappa - kappa~|` in position units
    pub kappa: f64,
    pub d_d: f64,
    pub d_l: f64,
    pub d_l2: f64,
    pub d_l_mod: f64,
    pub rel_gap: f64,
    pub feasibility: f64,
    /// `d_D'^2` between the two states placed on opposite sheets, when known
    pub d_dprime_sq: Option<f64>,
    /// how `d_D` was obtained
    pub route: Method,
}

impl SweepRow {
    pub fn values(&self) -> [f64; 6] {
        [self.d_d, self.d_l, self.d_l2, self.d_l_mod, self.rel_gap, self.feasibility]
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    /// Relative gaps of the rows with the given family label, in table order.
    pub fn rel_gaps(&self, family: &str) -> Vec<f64> {
        self.rows.iter().filter(|r| r.family == family).map(|r| r.rel_gap).collect()
    }
}

/// Each value at most the previous one plus `tol`.
pub fn is_non_increasing(values: &[f64], tol: f64) -> bool {
    values.windows(2).all(|w| w[1] <= w[0] + tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monotonicity_helper() {
        assert!(is_non_increasing(&[3.0, 2.0, 2.0, 1.0], 0.0));
        assert!(!is_non_increasing(&[3.0, 2.0, 2.5], 0.1));
        assert!(is_non_increasing(&[], 0.0));
    }
}
