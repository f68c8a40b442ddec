use lqtraj_core::experiments::{self, Experiment, ExperimentConfig, Format, Method};
use lqtraj_core::qnd::{posterior_state, QndModel};
use lqtraj_core::hilbert::{coherent_state, FockSpace};
use lqtraj_core::C64;

fn small(experiment: Experiment) -> ExperimentConfig {
    let mut c = ExperimentConfig::defaults(experiment);
    c.trajectories = 3;
    match experiment {
        Experiment::Fig1Qnd => {
            c.grid = "0:1:3".parse().unwrap();
            c.trajectories = 50;
        }
        Experiment::HoPosition => {
            c.grid = "0:1:3".parse().unwrap();
            c.dim = 40;
        }
        _ => {
            c.grid = "0:0.5:3".parse().unwrap();
            c.dim = 40;
        }
    }
    c
}

#[test]
fn stderr_is_present_exactly_for_monte_carlo_rows() {
    for e in [Experiment::Fig1Qnd, Experiment::HoPosition, Experiment::MomentumLinear] {
        let recs = experiments::run(&small(e)).unwrap();
        assert!(recs.iter().any(|r| r.method == Method::MonteCarlo), "{e}");
        for r in &recs {
            assert_eq!(r.stderr.is_some(), r.method == Method::MonteCarlo, "{e}: {r:?}");
        }
    }
}

#[test]
fn block_layout() {
    let recs = experiments::run(&small(Experiment::MomentumLinear)).unwrap();
    let methods: Vec<Method> = recs.iter().map(|r| r.method).collect();
    let mut want = vec![Method::ClosedForm; 6];
    want.extend([Method::MonteCarlo; 3]);
    want.extend([Method::MasterEq; 3]);
    assert_eq!(methods, want);
    // ⟨P⟩ from the master equation follows the impulse law.
    for j in 0..3 {
        assert!((recs[9 + j].value - recs[3 + j].value).abs() < 1e-6);
    }
    let recs = experiments::run(&small(Experiment::Fig1Qnd)).unwrap();
    // Two quadrature curves on 3 points, then Monte Carlo at τ > 0.
    assert_eq!(recs.len(), 6 + 4);
    assert!(recs[..6].iter().all(|r| r.method == Method::Quadrature));
}

#[test]
fn repeated_runs_are_byte_identical() {
    for e in [Experiment::Fig1Qnd, Experiment::HoPosition] {
        let c = small(e);
        let a = experiments::render(&experiments::run(&c).unwrap(), Format::Csv).unwrap();
        let b = experiments::render(&experiments::run(&c).unwrap(), Format::Csv).unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with("abscissa,value,stderr,method\n"));
        let j = experiments::render(&experiments::run(&c).unwrap(), Format::Json).unwrap();
        let parsed: Vec<serde_json::Value> = serde_json::from_str(&j).unwrap();
        assert_eq!(parsed.len(), a.lines().count() - 1);
    }
}

#[test]
fn strong_position_measurement_tracks_the_oscillator() {
    let mut c = ExperimentConfig::defaults(Experiment::HoPosition);
    c.oracle = false;
    c.r = 0.01;
    let recs = experiments::run(&c).unwrap();
    let free = 0.5 * c.hbar / (c.mass * c.omega);
    assert!((recs[0].value - free).abs() < 1e-15);
    assert!(recs[c.grid.n - 1].value < 0.2 * free);
}

#[test]
fn mode_frequency_only_rotates_phases() {
    let space = FockSpace::natural(40).unwrap();
    let rho0 = coherent_state(C64::new(2.0, 0.5), space).unwrap().projector();
    let still = posterior_state(&rho0, &QndModel::new(1.0, 0.0).unwrap(), 0.3, 0.4).unwrap();
    let spinning = posterior_state(&rho0, &QndModel::new(1.0, 2.5).unwrap(), 0.3, 0.4).unwrap();
    for (a, b) in still.populations().iter().zip(spinning.populations()) {
        assert!((a - b).abs() < 1e-15);
    }
    assert!((still.matrix()[[2, 3]] - spinning.matrix()[[2, 3]]).norm() > 1e-3);
}
