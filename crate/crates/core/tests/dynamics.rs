mod common;

use common::simpson;
use frontera::discretization::{assemble_operator, Profile};
use frontera::dynamics::*;
use frontera::scenarios;
use frontera::{DriftSign, Grid1D, IncidenceModel, KernelSpec};

fn short(cfg: SimConfig, horizon: f64) -> SimConfig {
    SimConfig { horizon, ..cfg }
}

#[test]
fn flux_matches_double_quadrature() {
    let k = KernelSpec::uniform(-0.5, 0.5).unwrap();
    let oracle = simpson(&|x: f64| simpson(&|y: f64| k.evaluate(x - y), 2.0, 3.0, 1e-12), 1.0, 2.0, 1e-11);
    assert!((oracle - 0.125).abs() < 1e-8);
    let grid = Grid1D::new(-4.0, 4.0, 800).unwrap();
    let cfg = SimConfig {
        grid,
        kernel1: k.clone(),
        kernel2: k,
        mu: 1.0,
        h0: 2.0,
        s0: InitialProfile::Constant { value: 1.0 },
        i0: InitialProfile::Constant { value: 0.0 },
        ..scenarios::baseline()
    };
    let sim = Simulator::new(cfg.clone()).unwrap();
    let state = sim.initial_state().unwrap();
    let right = boundary_flux(&grid, &state, &cfg.kernel1, Side::Right, 1.0);
    let left = boundary_flux(&grid, &state, &cfg.kernel1, Side::Left, 1.0);
    assert!((right - oracle).abs() < 1e-4, "{right}");
    assert!((left + oracle).abs() < 1e-4, "{left}");
}

#[test]
fn invariants_on_the_baseline() {
    let cfg = short(scenarios::baseline(), 5.0);
    let traj = simulate(&cfg).unwrap();
    let d = &traj.diagnostics;
    assert!(d.s_envelope_excess <= 0.0 && d.i_envelope_excess <= 0.0);
    assert!(d.length_envelope_excess <= 0.0);
    assert!(d.speed_excess <= 1e-12 && d.moment_excess <= 1e-12);
    assert!(d.monotone_boundaries);
    assert!(traj.g.windows(2).all(|w| w[1] <= w[0]));
    assert!(traj.h.windows(2).all(|w| w[1] >= w[0]));
    assert!(traj.h.last() > traj.h.first());
    for k in 0..traj.len() {
        assert!(traj.h[k] - traj.g[k] <= traj.len_envelope[k]);
    }
}

#[test]
fn positivity_without_clamping() {
    let cfg = SimConfig { clamp: false, ..short(scenarios::baseline(), 10.0) };
    let traj = simulate(&cfg).unwrap();
    let floor = -1e-10 * (cfg.s0.sup() + cfg.i0.sup());
    assert!(traj.diagnostics.min_s >= floor && traj.diagnostics.min_i >= floor);
    assert_eq!(traj.diagnostics.clamp_total, 0.0);
}

#[test]
fn exterior_stays_zero_and_boundaries_move_outward() {
    let cfg = scenarios::baseline();
    let sim = Simulator::new(cfg).unwrap();
    let mut state = sim.initial_state().unwrap();
    let (g0, h0) = (state.g(), state.h());
    for step in 0..200 {
        let (next, _) = sim.step(&state, sim.dt()).unwrap();
        if step == 0 {
            assert!(next.h() > h0 && next.g() < g0);
        }
        for k in 0..next.s.len() {
            if !next.window.contains(k) {
                assert_eq!((next.s[k], next.i[k]), (0.0, 0.0), "cell {k} at step {step}");
            }
        }
        state = next;
    }
}

#[test]
fn frozen_boundaries_without_expansion() {
    let cfg = SimConfig { mu: 0.0, ..short(scenarios::baseline(), 5.0) };
    let traj = simulate(&cfg).unwrap();
    assert!(traj.g.iter().all(|g| *g == -1.0) && traj.h.iter().all(|h| *h == 1.0));
}

#[test]
fn pure_recovery_decays_like_the_scalar_oracle() {
    let cfg = SimConfig {
        gamma: Profile::constant(0.5),
        d2: 0.5,
        incidence: IncidenceModel::Bilinear { beta0: 0.0 },
        s0: InitialProfile::Constant { value: 0.0 },
        i0: InitialProfile::Bump { amplitude: 1.0 },
        ..short(scenarios::baseline(), 10.0)
    };
    let traj = simulate(&cfg).unwrap();
    // ‖e^{tM}‖_∞ <= e^{t·max rowsum(M)} for Metzler M.
    let grid = cfg.grid;
    let n = grid.len();
    let op =
        assemble_operator(&grid, cfg.d2, &cfg.kernel2, &[0.1; 400], &[-0.5; 400], DriftSign::Plus).unwrap();
    assert_eq!(op.size(), n);
    let rate = op.entries.row_iter().map(|r| r.sum()).fold(f64::NEG_INFINITY, f64::max);
    assert!(rate < 0.0);
    for k in 0..traj.len() {
        let bound = (rate * traj.times[k]).exp() * traj.sup_i[0];
        assert!(traj.sup_i[k] <= bound * (1.0 + 1e-12), "t={}", traj.times[k]);
    }
    assert!(traj.sup_i.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn ordered_data_stay_ordered() {
    let base = SimConfig {
        incidence: IncidenceModel::Bilinear { beta0: 0.02 },
        ..short(scenarios::baseline(), 5.0)
    };
    let same = compare_runs(&base, &base).unwrap();
    assert!(same.holds);
    assert_eq!((same.worst_s, same.worst_i, same.worst_g, same.worst_h), (0.0, 0.0, 0.0, 0.0));

    let doubled = SimConfig { i0: InitialProfile::Bump { amplitude: 0.2 }, ..base.clone() };
    assert!(compare_runs(&base, &doubled).unwrap().holds);

    let more_s = SimConfig { s0: InitialProfile::Bump { amplitude: 3.5 }, ..base.clone() };
    let rep = compare_runs(&base, &more_s).unwrap();
    assert!(rep.holds);
    assert!(rep.h_final.1 >= rep.h_final.0);

    assert!(matches!(compare_runs(&more_s, &base), Err(DynamicsError::PreconditionUnordered(_))));
}

#[test]
fn refinement_changes_final_infection_by_less_than_ten_percent() {
    let coarse = short(scenarios::baseline(), 20.0);
    let fine = SimConfig { grid: Grid1D::new(-12.0, 12.0, 800).unwrap(), ..coarse.clone() };
    let a = simulate(&coarse).unwrap();
    let b = Simulator::new(fine).unwrap().with_dt(0.5 * a.diagnostics.dt).run().unwrap();
    let (ia, ib) = (*a.sup_i.last().unwrap(), *b.sup_i.last().unwrap());
    assert!((ia - ib).abs() <= 0.1 * ib, "{ia} vs {ib}");
}

#[test]
fn validation_cites_hypotheses() {
    let bad_support = SimConfig {
        i0: InitialProfile::Tabulated { points: vec![(-0.5, 0.1), (1.5, 0.2)] },
        ..scenarios::baseline()
    };
    assert!(bad_support.validate().unwrap_err().to_string().contains("(H3)"));
    let bad_gamma = SimConfig { gamma: Profile::constant(-0.1), ..scenarios::baseline() };
    assert!(bad_gamma.validate().unwrap_err().to_string().contains("(H2)"));
    let cfl = cfl_dt(&SimConfig {
        a: Profile::constant(0.0),
        b: Profile::constant(0.0),
        gamma: Profile::constant(1.0),
        incidence: IncidenceModel::Bilinear { beta0: 0.0 },
        ..scenarios::baseline()
    })
    .unwrap();
    assert!((cfl - 0.5 / 3.0).abs() < 1e-15);
}
