//! Gate designs named in a config: explicit parameters or a reference fixture.

use rydgate_core::design_u1::GateDesignU1;
use rydgate_core::design_u2::GateDesignU2;
use rydgate_core::fixtures::{table3, TABLE1, TABLE2};
use rydgate_core::model::{InteractionParams, LaserParams};
use rydgate_core::units::mhz;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DesignSpec {
    /// `table1.1`–`table1.3`, `table2.1`–`table2.4` or `table3`.
    Fixture { name: String },
    U1 {
        omega_mhz: f64,
        delta_mhz: f64,
        v_mhz: f64,
        n: u32,
        /// Stark cycle counts; nearest integers when unset.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        m: Option<[i32; 3]>,
    },
    U2 {
        omega_c_mhz: f64,
        delta_c_mhz: f64,
        omega_t_mhz: f64,
        delta_t_mhz: f64,
        v_mhz: f64,
        nc: u32,
        nt: u32,
        /// Sign of β − α − γ ≈ ±π/2; the nearer one when unset.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sign: Option<i8>,
    },
}

#[derive(Debug, Clone)]
pub enum Design {
    U1(GateDesignU1),
    U2(GateDesignU2),
}

pub const FIXTURE_NAMES: &[&str] =
    &["table1.1", "table1.2", "table1.3", "table2.1", "table2.2", "table2.3", "table2.4", "table3"];

fn fixture(name: &str) -> Option<DesignSpec> {
    let lower = name.to_ascii_lowercase();
    if lower == "table3" {
        return Some(DesignSpec::U1 {
            omega_mhz: table3::OMEGA_MHZ,
            delta_mhz: table3::DELTA_MHZ,
            v_mhz: table3::V_MHZ,
            n: table3::N,
            m: None,
        });
    }
    let (table, case) = lower.strip_prefix("table")?.split_once('.')?;
    let case: u32 = case.parse().ok()?;
    match table {
        "1" => TABLE1.iter().find(|r| r.case == case).map(|r| DesignSpec::U1 {
            omega_mhz: r.omega_mhz,
            delta_mhz: r.delta_mhz,
            v_mhz: r.v_mhz,
            n: r.n,
            m: None,
        }),
        "2" => TABLE2.iter().find(|r| r.case == case).map(|r| DesignSpec::U2 {
            omega_c_mhz: r.omega_c_mhz,
            delta_c_mhz: r.delta_c_mhz,
            omega_t_mhz: r.omega_t_mhz,
            delta_t_mhz: r.delta_t_mhz,
            v_mhz: r.v_mhz,
            nc: r.nc,
            nt: r.nt,
            sign: None,
        }),
        _ => None,
    }
}

impl DesignSpec {
    pub fn fixture(name: &str) -> Self {
        DesignSpec::Fixture { name: name.to_string() }
    }

    /// `key` is the config path of this block, used in diagnostics.
    pub fn resolve(&self, key: &str) -> Result<Design, CliError> {
        let wrap = |e: rydgate_core::Error| match e {
            rydgate_core::Error::InvalidParameter { name, reason } => CliError::config(format!("{key}.{name}"), reason),
            other => CliError::Core(other),
        };
        match self {
            DesignSpec::Fixture { name } => {
                let spec = fixture(name).ok_or_else(|| {
                    CliError::config(format!("{key}.name"), format!("unknown fixture `{name}`; known: {}", FIXTURE_NAMES.join(", ")))
                })?;
                spec.resolve(key)
            }
            &DesignSpec::U1 { omega_mhz, delta_mhz, v_mhz, n, m } => {
                let laser = LaserParams::new(mhz(omega_mhz), mhz(delta_mhz));
                let v = InteractionParams::new(mhz(v_mhz));
                let d = match m {
                    Some(m) => GateDesignU1::with_m(laser, v, n, m),
                    None => GateDesignU1::new(laser, v, n),
                };
                d.map(Design::U1).map_err(wrap)
            }
            &DesignSpec::U2 { omega_c_mhz, delta_c_mhz, omega_t_mhz, delta_t_mhz, v_mhz, nc, nt, sign } => {
                if let Some(s) = sign {
                    if s != 1 && s != -1 {
                        return Err(CliError::config(format!("{key}.sign"), "must be +1 or -1"));
                    }
                }
                let lc = LaserParams::new(mhz(omega_c_mhz), mhz(delta_c_mhz));
                let lt = LaserParams::new(mhz(omega_t_mhz), mhz(delta_t_mhz));
                let v = InteractionParams::new(mhz(v_mhz));
                let d = match sign {
                    Some(s) => GateDesignU2::with_sign(lc, lt, v, nc, nt, s),
                    None => GateDesignU2::new(lc, lt, v, nc, nt),
                };
                d.map(Design::U2).map_err(wrap)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_fixture_name_resolves() {
        for name in FIXTURE_NAMES {
            DesignSpec::fixture(name).resolve("design").unwrap();
        }
    }

    #[test]
    fn unknown_fixture_is_a_config_error() {
        let e = DesignSpec::fixture("table4.1").resolve("design").unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("design.name"));
    }

    #[test]
    fn table2_fixture_is_u2() {
        assert!(matches!(DesignSpec::fixture("TABLE2.3").resolve("d").unwrap(), Design::U2(_)));
        assert!(matches!(DesignSpec::fixture("table1.2").resolve("d").unwrap(), Design::U1(_)));
    }
}
