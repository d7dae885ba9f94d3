//! The CZ construction written out as a time-ordered gate list, so the
//! report shows every single-qubit angle and the distance is computed from
//! the same list that is printed.

use std::f64::consts::{FRAC_PI_2, PI};

use rydgate_core::qmath::{kron, ComplexMatrix};
use rydgate_core::synth::{phase_gate, rotation_gate, solve_auto, AbSolution, Axis, Regime};
use rydgate_core::units::wrap_symmetric;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Qubit {
    Control,
    Target,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Kind {
    P,
    Ry,
    Rz,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rotation {
    pub qubit: Qubit,
    pub gate: Kind,
    pub angle_over_pi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum Step {
    /// One application of the Rydberg gate.
    Entangler,
    Single(Rotation),
}

fn rot(qubit: Qubit, gate: Kind, angle: f64) -> Step {
    Step::Single(Rotation { qubit, gate, angle_over_pi: angle / PI })
}

/// Phase gates on both qubits; P is 2π-periodic so the angles are reduced.
fn both(control: f64, target: f64) -> [Step; 2] {
    [rot(Qubit::Control, Kind::P, wrap_symmetric(control)), rot(Qubit::Target, Kind::P, wrap_symmetric(target))]
}

/// Gate list for the U1 construction, earliest first.
pub fn u1_sequence(alpha: f64, beta: f64) -> rydgate_core::Result<(AbSolution, Vec<Step>)> {
    let sol = solve_auto(alpha, beta)?;
    let t = Qubit::Target;
    let mut steps = Vec::new();
    if sol.regime == Regime::FourGate {
        steps.extend([Step::Entangler, Step::Entangler]);
        steps.extend(both(-beta, -2.0 * alpha));
    }
    steps.extend([rot(t, Kind::Ry, sol.theta2), rot(t, Kind::Rz, sol.theta3), rot(t, Kind::Ry, -sol.theta1)]);
    steps.push(Step::Entangler);
    steps.extend(both(-beta / 2.0, -alpha));
    steps.push(rot(t, Kind::Ry, sol.theta1));
    steps.push(Step::Entangler);
    steps.extend(both(-beta / 2.0, -alpha));
    steps.extend([rot(t, Kind::Rz, -sol.theta3), rot(t, Kind::Ry, -sol.theta2)]);
    steps.push(rot(Qubit::Control, Kind::P, FRAC_PI_2));
    Ok((sol, steps))
}

/// Gate list for the U2 construction: two gates, then phase corrections.
pub fn u2_sequence(alpha: f64, gamma: f64) -> Vec<Step> {
    let mut steps = vec![Step::Entangler, Step::Entangler];
    steps.extend(both(-2.0 * alpha, -2.0 * gamma));
    steps
}

fn single(r: &Rotation) -> ComplexMatrix {
    let a = r.angle_over_pi * PI;
    let m = match r.gate {
        Kind::P => phase_gate(a).matrix,
        Kind::Ry => rotation_gate(&Axis::Y, a).matrix,
        Kind::Rz => rotation_gate(&Axis::Z, a).matrix,
    };
    let id = ComplexMatrix::identity(2, 2);
    match r.qubit {
        Qubit::Control => kron(&m, &id),
        Qubit::Target => kron(&id, &m),
    }
}

/// Product of the list with `entangler` substituted for each gate step.
pub fn product(steps: &[Step], entangler: &ComplexMatrix) -> ComplexMatrix {
    steps.iter().fold(ComplexMatrix::identity(4, 4), |acc, s| match s {
        Step::Entangler => entangler * acc,
        Step::Single(r) => single(r) * acc,
    })
}

pub fn describe(s: &Step) -> String {
    match s {
        Step::Entangler => "U".to_string(),
        Step::Single(r) => {
            let q = match r.qubit {
                Qubit::Control => "control",
                Qubit::Target => "target",
            };
            format!("{:?}({:+.6}π) on {q}", r.gate, r.angle_over_pi)
        }
    }
}
