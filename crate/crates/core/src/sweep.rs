//! Time sweeps of the spin-star trajectory and their CSV form.

use std::io::{self, Write};

use crate::entanglement::{c_abe_closed_form, concurrence_2q, inaccessible_concurrence};
use crate::error::{Error, Result};
use crate::spin_star::{
    build_initial_state, closed_form_coeffs, concurrence_closed_form, evolve_sector, BruteForceOracle, EnvSize,
    SpinStarParams, LABEL_A, LABEL_B,
};
use crate::state::{mutual_information, LogBase};

pub const CSV_HEADER: &str = "omega_t,c_closed,c_numeric,mi,c_abe,c_inaccessible";
/// Largest tolerated |c_closed - c_numeric| before a sweep counts as inconsistent.
pub const CONSISTENCY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub omega_t: f64,
    pub c_closed: f64,
    pub c_numeric: f64,
    pub mi: f64,
    pub c_abe: f64,
    pub c_inaccessible: f64,
}

impl SweepRow {
    pub fn to_csv(&self) -> String {
        [self.omega_t, self.c_closed, self.c_numeric, self.mi, self.c_abe, self.c_inaccessible]
            .iter()
            .map(|&x| format_sig(x))
            .collect::<Vec<_>>()
            .join(",")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    pub params: SpinStarParams,
    /// Physical end time; `None` means 4π/Ω.
    pub t_max: Option<f64>,
    pub steps: usize,
    pub log_base: LogBase,
    /// Also evolve the full bath and compare (finite N only).
    pub oracle: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { params: SpinStarParams::balanced(), t_max: None, steps: 2000, log_base: LogBase::Ten, oracle: false }
    }
}

impl SweepConfig {
    pub fn omega_t_max(&self) -> f64 {
        match self.t_max {
            Some(t) => t * self.params.omega(),
            None => 4.0 * std::f64::consts::PI,
        }
    }

    /// steps + 1 evenly spaced Ωt values from 0 to the end time.
    pub fn grid(&self) -> Vec<f64> {
        let end = self.omega_t_max();
        (0..=self.steps).map(|k| end * k as f64 / self.steps as f64).collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.steps == 0 {
            return Err(Error::InvalidParameter("steps must be at least 1".into()));
        }
        if let Some(t) = self.t_max {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::InvalidParameter(format!("t-max must be positive, got {t}")));
            }
        }
        if self.oracle && self.params.env == EnvSize::LargeN {
            return Err(Error::InvalidParameter("the brute-force oracle needs a finite bath (--env-spins)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Sweep {
    pub rows: Vec<SweepRow>,
    /// max |c_closed - c_numeric| over the grid.
    pub max_closed_gap: f64,
    /// max |c_numeric - C(brute force)| when the oracle ran.
    pub max_oracle_gap: Option<f64>,
}

impl Sweep {
    pub fn is_consistent(&self) -> bool {
        self.max_closed_gap <= CONSISTENCY_TOL && self.max_oracle_gap.is_none_or(|g| g <= CONSISTENCY_TOL)
    }
}

pub fn run_sweep(config: &SweepConfig) -> Result<Sweep> {
    config.validate()?;
    let params = &config.params;
    let coeffs = closed_form_coeffs(params);
    let c_abe = c_abe_closed_form(params);
    let rho0 = build_initial_state(params)?;
    let oracle = if config.oracle { Some(BruteForceOracle::new(params)?) } else { None };
    let cut = (LABEL_A, LABEL_B);
    let mut rows = Vec::with_capacity(config.steps + 1);
    let mut max_closed_gap: f64 = 0.0;
    let mut max_oracle_gap: Option<f64> = oracle.as_ref().map(|_| 0.0);
    for omega_t in config.grid() {
        let rho_ab = evolve_sector(&rho0, omega_t, params)?.partial_trace(&[LABEL_A, LABEL_B])?;
        let c_numeric = concurrence_2q(&rho_ab, cut)?;
        let c_closed = concurrence_closed_form(&coeffs, omega_t);
        max_closed_gap = max_closed_gap.max((c_closed - c_numeric).abs());
        if let (Some(o), Some(gap)) = (&oracle, max_oracle_gap.as_mut()) {
            let c_brute = concurrence_2q(&o.reduced_state(omega_t)?, cut)?;
            *gap = gap.max((c_brute - c_numeric).abs());
        }
        let mi = mutual_information(&rho_ab, (&[LABEL_A], &[LABEL_B]), config.log_base)?;
        let c_inaccessible = inaccessible_concurrence(c_abe, c_numeric)?;
        rows.push(SweepRow { omega_t, c_closed, c_numeric, mi, c_abe, c_inaccessible });
    }
    Ok(Sweep { rows, max_closed_gap, max_oracle_gap })
}

/// Twelve significant digits, plain decimal for moderate magnitudes and
/// exponent form otherwise; negative zero prints as 0.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..12).contains(&mag) {
        let decimals = (11 - mag).max(0) as usize;
        let s = format!("{x:.decimals$}");
        let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s };
        if s == "-0" {
            "0".to_string()
        } else {
            s
        }
    } else {
        let s = format!("{x:.11e}");
        let (mantissa, exp) = s.split_once('e').expect("exponent form");
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{exp}")
    }
}

pub fn write_csv(rows: &[SweepRow], out: &mut impl Write) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for row in rows {
        writeln!(out, "{}", row.to_csv())?;
    }
    Ok(())
}
