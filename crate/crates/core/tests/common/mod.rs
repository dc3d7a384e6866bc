//! Reference trajectories produced by `tests/oracles/physics_oracle.py`, a
//! straight-line transcription of the dynamics written before the simulators.
#![allow(dead_code)]

use rlgp::environments::{CartPole, EpisodicEnvironment, MountainCar};

pub const CARTPOLE_START: [f64; 4] = [0.01, -0.02, 0.03, -0.04];
pub const CARTPOLE_ACTIONS: [usize; 10] = [1, 0, 1, 1, 0, 0, 1, 0, 1, 1];
pub const MOUNTAIN_CAR_START: [f64; 2] = [-0.5, 0.0];
pub const MOUNTAIN_CAR_ACTIONS: [usize; 10] = [2, 2, 0, 1, 2, 0, 0, 2, 1, 2];
pub const MOUNTAIN_CAR_WALL_START: [f64; 2] = [-1.19, -0.02];
pub const MOUNTAIN_CAR_WALL_ACTIONS: [usize; 10] = [0; 10];

pub const CARTPOLE: [[f64; 4]; 10] = [
    [0.009600000000000001, 0.17467919574755525, 0.0292, -0.32306871796000813],
    [
        0.013093583914951107,
        -0.020846120233304483,
        0.02273862564079984,
        -0.02132218953921816,
    ],
    [
        0.012676661510285018,
        0.17394248021606085,
        0.022312181850015475,
        -0.3067449777344228,
    ],
    [
        0.016155511114606235,
        0.36873950165756386,
        0.01617728229532702,
        -0.5923085433601138,
    ],
    [
        0.02353030114775751,
        0.1733948621597263,
        0.004331111428124744,
        -0.29457401165222385,
    ],
    [
        0.026998198390952036,
        -0.02178856819731434,
        -0.0015603688049197328,
        -0.000528269348635535,
    ],
    [
        0.026562427027005748,
        0.1733557261921636,
        -0.0015709341918924435,
        -0.2937031028296186,
    ],
    [
        0.03002954155084902,
        -0.021743792545407176,
        -0.007444996248484815,
        -0.0015160402905948223,
    ],
    [
        0.029594665699940875,
        0.17348413508106778,
        -0.007475317054296712,
        -0.2965386246288538,
    ],
    [
        0.03306434840156223,
        0.3687118497547738,
        -0.013406089546873787,
        -0.5915697373761108,
    ],
];
pub const MOUNTAIN_CAR: [[f64; 2]; 10] = [
    [-0.49917684300416926, 0.0008231569958307428],
    [-0.49753668667935325, 0.0016401563248160246],
    [-0.4970917969323474, 0.00044488974700586273],
    [-0.49684550006784745, 0.0002462968644999427],
    [-0.4957996374204934, 0.0010458626473540712],
    [-0.49596202671027434, -0.0001623892897809659],
    [-0.49733145422579234, -0.0013694275155180027],
    [-0.49789768282304186, -0.0005662285972495108],
    [-0.4986564786843364, -0.0007587958612945116],
    [-0.4986021672544669, 5.4311429869486824e-05],
];
pub const MOUNTAIN_CAR_WALL: [[f64; 2]; 10] = [
    [-1.2, 0.0],
    [-1.1987581039591646, 0.0012418960408353682],
    [-1.196270205713714, 0.002487898245450696],
    [-1.192528173202872, 0.0037420325108419024],
    [-1.1875200116579745, 0.005008161544897544],
    [-1.1812301149799374, 0.006289896678037213],
    [-1.173639613080305, 0.007590501899632274],
    [-1.1647268252899894, 0.008912787790315643],
    [-1.1544678319750572, 0.010258993314932281],
    [-1.1428371780811093, 0.011630653893947986],
];

pub const RELATIVE_TOLERANCE: f64 = 1e-9;

/// Relative comparison with an absolute floor for exact zeros.
pub fn close(actual: f64, expected: f64) -> bool {
    approx::relative_eq!(actual, expected, epsilon = 1e-15, max_relative = RELATIVE_TOLERANCE)
}

fn rollout<E, const N: usize>(mut env: E, actions: &[usize]) -> Vec<[f64; N]>
where
    E: EpisodicEnvironment<f64, State = [f64; N]>,
{
    actions
        .iter()
        .map(|&a| env.step(a).expect("episode still running").state)
        .collect()
}

/// First mismatching `(step, component, actual, expected)` of each rollout.
pub fn golden_mismatches() -> Vec<(&'static str, usize, usize, f64, f64)> {
    type Case = (&'static str, Vec<Vec<f64>>, Vec<Vec<f64>>);
    let cases: [Case; 3] = [
        (
            "cart-pole",
            rollout(CartPole::with_state(CARTPOLE_START), &CARTPOLE_ACTIONS)
                .iter()
                .map(|s| s.to_vec())
                .collect(),
            CARTPOLE.iter().map(|s| s.to_vec()).collect(),
        ),
        (
            "mountain-car",
            rollout(MountainCar::with_state(MOUNTAIN_CAR_START), &MOUNTAIN_CAR_ACTIONS)
                .iter()
                .map(|s| s.to_vec())
                .collect(),
            MOUNTAIN_CAR.iter().map(|s| s.to_vec()).collect(),
        ),
        (
            "mountain-car wall",
            rollout(
                MountainCar::with_state(MOUNTAIN_CAR_WALL_START),
                &MOUNTAIN_CAR_WALL_ACTIONS,
            )
            .iter()
            .map(|s| s.to_vec())
            .collect(),
            MOUNTAIN_CAR_WALL.iter().map(|s| s.to_vec()).collect(),
        ),
    ];
    let mut out = Vec::new();
    for (name, actual, expected) in cases {
        'rows: for (step, (a, e)) in actual.iter().zip(&expected).enumerate() {
            for (i, (x, y)) in a.iter().zip(e).enumerate() {
                if !close(*x, *y) {
                    out.push((name, step, i, *x, *y));
                    break 'rows;
                }
            }
        }
    }
    out
}
