mod common;

use std::f64::consts::PI;

use scalarfield::coeffs::{CoefficientField, Profile};
use scalarfield::evolve::{
    evolve, Boundary, DataFamily, EvolveSettings, InitialData, Leapfrog, Model, Parity, SpongeProfile,
};
use scalarfield::greensolve::{construct_steady_state, SteadyOptions};
use scalarfield::grid::Grid;
use scalarfield::potentials::{vacuum_info, Potential};
use scalarfield::virial::Nonlinearity;
use scalarfield::{Error, Exec};

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

#[test]
fn steady_background_stays_put() {
    let field = CoefficientField::new(Profile::Zero, Profile::Sech { amp: -0.05, scale: 1.0 });
    let sg = Potential::SineGordon;
    let vac = vacuum_info(&sg, 2.0 * PI).unwrap();
    let state = construct_steady_state(&field, &sg, &vac, &SteadyOptions::default()).unwrap();
    let grid = Grid::with_spacing(40.0, 0.01).unwrap();
    let (ud, _) = state.resample(&grid, vac.mass);
    let bg: Vec<f64> = ud.iter().map(|v| vac.xi + v).collect();
    let model = Model::new(grid.clone(), &field, sg, vac.xi, bg.clone()).unwrap();
    let dt = model.time_step(0.4).unwrap();
    let mut lf = Leapfrog::new(&model, bg.clone(), &vec![0.0; grid.len()], dt).unwrap();
    let mut worst = 0.0f64;
    while lf.t() < 50.0 {
        lf.advance().unwrap();
        worst = worst.max(sup_diff(lf.u(), &bg));
    }
    assert!(worst < 1e-5, "drift {worst}");
}

/// `u = cos(w t) cos(k y)` with `w^2 = k^2 + 1` for the linear Klein-Gordon
/// equation on a periodic grid.
fn standing_wave_error(dy: f64) -> f64 {
    let l = 10.0;
    let k = 3.0 * PI / l;
    let w = (k * k + 1.0).sqrt();
    let grid = Grid::with_spacing(l, dy).unwrap();
    let model = Model::constant(grid.clone(), &CoefficientField::flat(), Potential::SineGordon, 0.0)
        .unwrap()
        .with_boundary(Boundary::Periodic)
        .with_nonlinearity(Nonlinearity::Linear);
    let u0 = grid.sample(|y| (k * y).cos());
    let dt = 0.4 * dy;
    let mut lf = Leapfrog::new(&model, u0, &vec![0.0; grid.len()], dt).unwrap();
    let steps = (5.0 / dt).round() as usize;
    for _ in 0..steps {
        lf.advance().unwrap();
    }
    let t = lf.t();
    let exact = grid.sample(|y| (w * t).cos() * (k * y).cos());
    sup_diff(lf.u(), &exact)
}

#[test]
fn klein_gordon_dispersion_is_second_order() {
    let coarse = standing_wave_error(0.05);
    let fine = standing_wave_error(0.025);
    assert!(coarse < 1e-2, "coarse error {coarse}");
    let order = (coarse / fine).log2();
    assert!((order - 2.0).abs() < 0.15, "order {order}");
}

#[test]
fn energy_matches_refined_quadrature() {
    let grid = Grid::with_spacing(40.0, 0.005).unwrap();
    let model = Model::constant(grid.clone(), &CoefficientField::flat(), Potential::SineGordon, 0.0).unwrap();
    let u = grid.sample(|y| 0.01 / y.cosh());
    let e = model.energy(&u, &vec![0.0; grid.len()]);
    let density = |y: f64| {
        let s = 1.0 / y.cosh();
        let du = -0.01 * s * y.tanh();
        0.5 * du * du + (1.0 - (0.01 * s).cos())
    };
    let oracle = common::simpson(density, -40.0, 40.0, 200_000);
    assert!(((e - oracle) / oracle).abs() < 1e-6, "{e} vs {oracle}");
}

fn flat_energy_drift(dt_factor: f64) -> f64 {
    let grid = Grid::with_spacing(80.0, 0.01).unwrap();
    let model = Model::constant(grid.clone(), &CoefficientField::flat(), Potential::SineGordon, 0.0).unwrap();
    let data = InitialData {
        family: DataFamily::RandomSpline { bumps: 4 },
        eps: 0.01,
        parity: Parity::Any,
    };
    let (v1, v2) = data.generate(&grid, 3).unwrap();
    let settings = EvolveSettings {
        t_final: 40.0,
        dt_factor,
        diag_every: 1.0,
        conservation_mode: true,
        ..Default::default()
    };
    evolve(&model, &settings, &v1, &v2).unwrap().summary.energy_drift
}

#[test]
fn flat_energy_is_conserved_to_second_order() {
    let d1 = flat_energy_drift(0.4);
    let d2 = flat_energy_drift(0.2);
    assert!(d1 < 1e-4, "drift {d1}");
    assert!(d1 / d2 > 3.0 && d1 / d2 < 5.0, "ratio {}", d1 / d2);
}

#[test]
fn sponge_only_removes_energy() {
    let grid = Grid::with_spacing(20.0, 0.02).unwrap();
    let model = Model::constant(grid.clone(), &CoefficientField::flat(), Potential::SineGordon, 0.0)
        .unwrap()
        .with_nonlinearity(Nonlinearity::Off)
        .with_sponge(SpongeProfile::new(&grid, 0.2, 1.0).unwrap());
    let u0 = grid.sample(|y| (-(y * y)).exp());
    let dt = model.time_step(0.4).unwrap();
    let mut lf = Leapfrog::new(&model, u0, &vec![0.0; grid.len()], dt).unwrap();
    // Wave speed one: the pulse reaches the sponge at |y| = 12 by t ~ 10.
    let mut last = f64::INFINITY;
    let mut first = None;
    while lf.t() < 40.0 {
        lf.advance().unwrap();
        if lf.t() >= 12.0 {
            let e = model.energy(lf.u(), &lf.ut());
            first.get_or_insert(e);
            assert!(e <= last + 1e-8, "energy rose at t = {}", lf.t());
            last = e;
        }
    }
    assert!(last < 0.5 * first.unwrap());
}

#[test]
fn odd_data_stays_odd_without_potential_forcing() {
    // c = 0 keeps U = xi exactly, so only the stencil could break parity.
    let field = CoefficientField::new(Profile::TanhSech { amp: -0.1, scale: 1.0 }, Profile::Zero);
    let grid = Grid::with_spacing(40.0, 0.02).unwrap();
    let model = Model::constant(grid.clone(), &field, Potential::SineGordon, 2.0 * PI)
        .unwrap()
        .with_sponge(SpongeProfile::new(&grid, 0.2, 1.0).unwrap());
    let data = InitialData {
        family: DataFamily::RandomSpline { bumps: 4 },
        eps: 0.01,
        parity: Parity::Odd,
    };
    let (v1, v2) = data.generate(&grid, 11).unwrap();
    let settings = EvolveSettings {
        t_final: 100.0,
        diag_every: 1.0,
        lambda: 100.0,
        ..Default::default()
    };
    let out = evolve(&model, &settings, &v1, &v2).unwrap();
    assert!(out.summary.max_even_part < 1e-8, "even part {}", out.summary.max_even_part);
}

#[test]
fn zero_perturbation_gives_flat_diagnostics() {
    let grid = Grid::with_spacing(20.0, 0.02).unwrap();
    let model = Model::constant(grid.clone(), &CoefficientField::flat(), Potential::SineGordon, 0.0).unwrap();
    let (v1, v2) = InitialData::zero().generate(&grid, 0).unwrap();
    let settings = EvolveSettings {
        t_final: 2.0,
        ..Default::default()
    };
    let out = evolve(&model, &settings, &v1, &v2).unwrap();
    for r in &out.records {
        assert_eq!(
            [r.energy, r.virial, r.didt_fd, r.didt_formula, r.h1w_v1, r.l2w_v2, r.sech_cross, r.cum_integral],
            [0.0; 8]
        );
        assert_eq!(r.local, vec![0.0]);
    }
}

#[test]
fn sequential_and_parallel_runs_agree_bitwise() {
    let grid = Grid::with_spacing(40.0, 0.01).unwrap();
    let field = CoefficientField::new(Profile::Zero, Profile::Sech { amp: -0.05, scale: 1.0 });
    let data = InitialData {
        family: DataFamily::Sech { beta: 1.0 },
        eps: 0.01,
        parity: Parity::Any,
    };
    let (v1, v2) = data.generate(&grid, 0).unwrap();
    let settings = EvolveSettings {
        t_final: 2.0,
        ..Default::default()
    };
    let run = |exec| {
        let m = Model::constant(grid.clone(), &field, Potential::SineGordon, 0.0)
            .unwrap()
            .with_exec(exec);
        evolve(&m, &settings, &v1, &v2).unwrap()
    };
    let (a, b) = (run(Exec::Sequential), run(Exec::Parallel));
    assert_eq!(a.records, b.records);
}

#[test]
fn runaway_solutions_are_reported() {
    // F = u^2/2 - u^4 has a focusing quartic; large data blows up.
    let p = Potential::polynomial(vec![0.0, 0.0, 0.5, 0.0, -1.0]).unwrap();
    let grid = Grid::with_spacing(10.0, 0.02).unwrap();
    let model = Model::constant(grid.clone(), &CoefficientField::flat(), p, 0.0).unwrap();
    let u0 = grid.sample(|y| 3.0 * (-(y * y)).exp());
    let settings = EvolveSettings {
        t_final: 20.0,
        ..Default::default()
    };
    let err = evolve(&model, &settings, &u0, &vec![0.0; grid.len()]).unwrap_err();
    assert!(matches!(err, Error::BlowUp { .. }), "{err}");
}

#[test]
fn reflection_guard_applies_in_conservation_mode() {
    let grid = Grid::with_spacing(20.0, 0.05).unwrap();
    let model = Model::constant(grid.clone(), &CoefficientField::flat(), Potential::SineGordon, 0.0).unwrap();
    let z = vec![0.0; grid.len()];
    let mut settings = EvolveSettings {
        t_final: 13.0,
        conservation_mode: true,
        ..Default::default()
    };
    assert!(matches!(
        evolve(&model, &settings, &z, &z),
        Err(Error::ReflectionGuard { .. })
    ));
    settings.t_final = 11.0;
    assert!(evolve(&model, &settings, &z, &z).is_ok());
}
