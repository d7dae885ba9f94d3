//! Published parameter sets and reported values, in presentation units
//! (MHz for f/2π, ns, ns/τ).

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Table1Row {
    pub case: u32,
    pub omega_mhz: f64,
    pub delta_mhz: f64,
    pub v_mhz: f64,
    pub beta_minus_2alpha_over_pi: f64,
    pub n: u32,
    pub m: [i32; 3],
    pub tg_ns: f64,
    pub e_ro: f64,
    pub e_de_ns: f64,
}

pub const TABLE1: [Table1Row; 3] = [
    Table1Row {
        case: 1,
        omega_mhz: 10.0,
        delta_mhz: 19.252,
        v_mhz: -35.1818,
        beta_minus_2alpha_over_pi: 0.32457,
        n: 4,
        m: [2, 1, -3],
        tg_ns: 184.0,
        e_ro: 2.31e-10,
        e_de_ns: 45.5,
    },
    Table1Row {
        case: 2,
        omega_mhz: 10.0,
        delta_mhz: -23.9977,
        v_mhz: 52.1713,
        beta_minus_2alpha_over_pi: 0.6217118,
        n: 10,
        m: [8, -3, -5],
        tg_ns: 385.0,
        e_ro: 6.80e-9,
        e_de_ns: 59.9,
    },
    Table1Row {
        case: 3,
        omega_mhz: 10.0,
        delta_mhz: -13.6468,
        v_mhz: 23.09272,
        beta_minus_2alpha_over_pi: 1.450098,
        n: 5,
        m: [4, -1, -3],
        tg_ns: 296.0,
        e_ro: 3.59e-8,
        e_de_ns: 86.9,
    },
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Table2Row {
    pub case: u32,
    pub omega_c_mhz: f64,
    pub delta_c_mhz: f64,
    pub omega_t_mhz: f64,
    pub delta_t_mhz: f64,
    pub v_mhz: f64,
    /// Unreduced value as printed.
    pub beta_minus_alpha_minus_gamma_over_pi: f64,
    pub nc: u32,
    pub nt: u32,
    pub tc_ns: f64,
    pub tt_ns: f64,
    pub e_ro: f64,
    pub e_de_ns: f64,
}

pub const TABLE2: [Table2Row; 4] = [
    Table2Row {
        case: 1,
        omega_c_mhz: 5.306482,
        delta_c_mhz: 0.8152206,
        omega_t_mhz: 10.0,
        delta_t_mhz: 3.329994,
        v_mhz: -5.442221,
        beta_minus_alpha_minus_gamma_over_pi: 4.5,
        nc: 1,
        nt: 2,
        tc_ns: 186.0,
        tt_ns: 190.0,
        e_ro: 3.80e-6,
        e_de_ns: 86.8,
    },
    Table2Row {
        case: 2,
        omega_c_mhz: 5.306482,
        delta_c_mhz: -0.8152206,
        omega_t_mhz: 10.0,
        delta_t_mhz: -3.329994,
        v_mhz: 5.442221,
        beta_minus_alpha_minus_gamma_over_pi: 1.5,
        nc: 1,
        nt: 2,
        tc_ns: 186.0,
        tt_ns: 190.0,
        e_ro: 3.80e-6,
        e_de_ns: 86.8,
    },
    Table2Row {
        case: 3,
        omega_c_mhz: 3.331812,
        delta_c_mhz: 0.7475813,
        omega_t_mhz: 10.0,
        delta_t_mhz: 1.825131,
        v_mhz: -3.418967,
        beta_minus_alpha_minus_gamma_over_pi: 4.5,
        nc: 1,
        nt: 3,
        tc_ns: 293.0,
        tt_ns: 295.0,
        e_ro: 3.42e-8,
        e_de_ns: 140.0,
    },
    Table2Row {
        case: 4,
        omega_c_mhz: 3.331812,
        delta_c_mhz: -0.7475813,
        omega_t_mhz: 10.0,
        delta_t_mhz: -1.825131,
        v_mhz: 3.418967,
        beta_minus_alpha_minus_gamma_over_pi: 3.5,
        nc: 1,
        nt: 3,
        tc_ns: 293.0,
        tt_ns: 295.0,
        e_ro: 3.42e-8,
        e_de_ns: 140.0,
    },
];

/// Slow-gate parameters used for the noise study.
pub mod table3 {
    pub const OMEGA_MHZ: f64 = 0.8;
    pub const DELTA_MHZ: f64 = -1.54016;
    pub const V_MHZ: f64 = 2.814544;
    pub const SPACING_UM: f64 = 16.5;
    pub const TG_US: f64 = 2.30476;
    pub const N: u32 = 4;
    /// C6/2π in THz·µm⁶.
    pub const C6_THZ_UM6: f64 = 56.2;
    /// Rydberg lifetime, seconds.
    pub const LIFETIME_S: f64 = 1.2e-3;
    pub const EDGE_NS: f64 = 20.0;
    pub const LOSS_AT_TG: f64 = 2.5e-3;
    pub const T_OP_NS: f64 = 2324.76;
    pub const LOSS_AT_T_OP: f64 = 5.14e-10;
    /// (α, β, β−2α)/π after duration optimization.
    pub const ANGLES_OVER_PI: [f64; 3] = [-0.4502974, 0.7748354, -0.3245698];
    /// (α, β, β−2α)/π for the square pulse of duration t_g.
    pub const SQUARE_ANGLES_OVER_PI: [f64; 3] = [-0.45030, 0.7748303, -0.3245697];
    pub const DECAY_ERROR: f64 = 5e-4;
    pub const ERROR_1UK: f64 = 5e-3;
    pub const ERROR_PHASE_NOISE: f64 = 0.20;
}
