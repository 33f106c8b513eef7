use approx::assert_abs_diff_eq;
use bosonic_core::analytic::{full_transform, CouplingWeights, Frame, SystemConfig};
use bosonic_core::fockspace::*;
use bosonic_core::pulsedesign::{qst_pulse, rotation_angle};
use bosonic_core::Error;
use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

fn no_sentinel() -> EvolveOptions<f64> {
    EvolveOptions { tail_limit: f64::INFINITY, ..Default::default() }
}

fn two_node(gp: f64) -> SystemConfig<f64> {
    SystemConfig::with_effective_coupling(1.0, gp, CouplingWeights::uniform(2).unwrap()).unwrap()
}

fn product(factors: &[ModeState<f64>]) -> TruncatedState<f64> {
    TruncatedState::product(factors, None).unwrap()
}

fn inner(a: &Array1<C64>, b: &Array1<C64>) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

#[test]
fn zero_duration_is_identity() {
    let s = product(&[
        ModeState::coherent(C64::new(0.4, 0.1), 8).unwrap(),
        ModeState::vacuum(6).unwrap(),
        ModeState::vacuum(6).unwrap(),
    ]);
    let out = evolve(&s, &two_node(0.3), 0.0, &EvolveOptions::default()).unwrap();
    assert_eq!(out, s);
}

#[test]
fn vacuum_returns_under_optimized_pulse() {
    for m in [5, 8] {
        let p = qst_pulse::<f64>(m).unwrap();
        let cfg = p.config(1.0, CouplingWeights::uniform(2).unwrap()).unwrap();
        let basis = FockBasis::uniform(3, 8).unwrap();
        let s = TruncatedState::fock(basis, &[0, 0, 0]).unwrap();
        let out = evolve(&s, &cfg, p.tau, &EvolveOptions::default()).unwrap();
        assert!(fidelity(&s, &out).unwrap() > 1.0 - 1e-6, "m={m}");
    }
}

#[test]
fn single_excitation_amplitudes_match_analytic_rows() {
    let p = qst_pulse::<f64>(8).unwrap();
    let cfg = p.config(1.0, CouplingWeights::uniform(2).unwrap()).unwrap();
    let basis = FockBasis::uniform(3, 8).unwrap();
    let tr = full_transform(&cfg, p.tau).unwrap();
    assert!(tr.is_number_conserving(1e-12));
    let vac = TruncatedState::fock(basis.clone(), &[0, 0, 0]).unwrap();
    let vac_out = evolve(&vac, &cfg, p.tau, &EvolveOptions::default()).unwrap();
    let vac_phase = inner(vac.as_pure().unwrap(), vac_out.as_pure().unwrap());
    let s = TruncatedState::fock(basis.clone(), &[1, 0, 0]).unwrap();
    let out = evolve(&s, &cfg, p.tau, &EvolveOptions::default()).unwrap();
    let psi = out.as_pure().unwrap();
    // ⟨1_i|U|1_1⟩ = U_A[i][0]·⟨0|U|0⟩
    for (i, occ) in [[1, 0, 0], [0, 1, 0], [0, 0, 1]].iter().enumerate() {
        let amp = psi[basis.index_of(occ).unwrap()];
        assert!((amp - tr.u_a[[i, 0]] * vac_phase).norm() < 1e-5, "row {i}: {amp} vs {}", tr.u_a[[i, 0]]);
    }
    let theta_r = rotation_angle(&p);
    assert_abs_diff_eq!(tr.u_a[[0, 0]].norm(), theta_r.sin(), epsilon = 1e-10);
}

#[test]
fn coherent_means_follow_bogoliubov_rows_at_all_times() {
    // Linear dynamics: ⟨b(t)⟩ = U_A ⟨b(0)⟩ + U_B ⟨b(0)⟩*.
    let cfg = SystemConfig::new(1.0, 0.21, CouplingWeights::new(vec![1.0, 0.6]).unwrap()).unwrap();
    let alpha = [C64::new(0.5, 0.2), C64::new(-0.3, 0.1), C64::new(0.0, 0.0)];
    let s = product(&[
        ModeState::coherent(alpha[0], 16).unwrap(),
        ModeState::coherent(alpha[1], 16).unwrap(),
        ModeState::coherent(alpha[2], 16).unwrap(),
    ]);
    let times = [0.7, 3.1, 9.4];
    let states = evolve_checkpoints(&s, &cfg, 0.0, &times, &EvolveOptions::default()).unwrap();
    for (t, st) in times.iter().zip(&states) {
        let tr = full_transform(&cfg, *t).unwrap();
        for i in 0..3 {
            let want: C64 = (0..3).map(|j| tr.u_a[[i, j]] * alpha[j] + tr.u_b[[i, j]] * alpha[j].conj()).sum();
            let got = expect_annihilation(st, i).unwrap();
            assert!((got - want).norm() < 1e-6, "t={t} mode {i}: {got} vs {want}");
        }
    }
}

#[test]
fn schrodinger_frame_adds_free_rotation() {
    let cfg = two_node(0.3);
    let s = product(&[ModeState::fock(1, 5).unwrap(), ModeState::vacuum(5).unwrap(), ModeState::vacuum(5).unwrap()]);
    let t = 2.3;
    let int = evolve(&s, &cfg, t, &no_sentinel()).unwrap();
    let sch = evolve(&s, &cfg, t, &EvolveOptions { frame: Frame::Schrodinger, ..no_sentinel() }).unwrap();
    let basis = s.basis();
    for (idx, (a, b)) in int.as_pure().unwrap().iter().zip(sch.as_pure().unwrap()).enumerate() {
        let n: usize = (0..3).map(|m| basis.occupation(idx, m)).sum();
        assert!((a * C64::from_polar(1.0, -(n as f64) * t) - b).norm() < 1e-14);
    }
}

#[test]
fn rk4_is_fourth_order() {
    let cfg = two_node(0.35);
    let s = product(&[
        ModeState::coherent(C64::new(0.6, 0.0), 12).unwrap(),
        ModeState::vacuum(8).unwrap(),
        ModeState::vacuum(8).unwrap(),
    ]);
    let tau = 6.0;
    let run = |dt: f64| evolve(&s, &cfg, tau, &no_sentinel().with_dt(dt)).unwrap().as_pure().unwrap().clone();
    let reference = run(0.002);
    let coarse = run(0.04);
    let fine = run(0.02);
    let e1 = (&coarse - &reference).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let e2 = (&fine - &reference).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let ratio = e1 / e2;
    assert!((12.0..20.0).contains(&ratio), "error ratio {ratio}");
}

#[test]
fn norm_drift_per_optimized_pulse() {
    for m in [5u32, 6, 8, 11, 17] {
        let p = qst_pulse::<f64>(m).unwrap();
        let cfg = p.config(1.0, CouplingWeights::uniform(2).unwrap()).unwrap();
        let s = TruncatedState::fock(FockBasis::uniform(3, 8).unwrap(), &[1, 0, 0]).unwrap();
        let drift = (evolve(&s, &cfg, p.tau, &no_sentinel()).unwrap().trace() - 1.0).abs();
        // m = 5 is the strongest admissible coupling; RK4 dissipation there is 1.9e-8.
        let bound = if m == 5 { 3e-8 } else { 1e-8 };
        assert!(drift < bound, "m={m}: {drift:e}");
    }
}

#[test]
fn adaptive_integrator_agrees_with_fixed_step() {
    let cfg = two_node(0.4);
    let s = product(&[ModeState::fock(1, 6).unwrap(), ModeState::vacuum(6).unwrap(), ModeState::vacuum(6).unwrap()]);
    let fixed = evolve(&s, &cfg, 5.0, &no_sentinel().with_dt(0.005)).unwrap();
    let adaptive =
        evolve(&s, &cfg, 5.0, &EvolveOptions { integrator: Integrator::Adaptive { tol: 1e-11 }, ..no_sentinel() })
            .unwrap();
    assert!(fidelity(&fixed, &adaptive).unwrap() > 1.0 - 1e-9);
}

#[test]
fn step_bound_and_sentinel_errors() {
    let cfg = two_node(0.3);
    let s = product(&[ModeState::fock(1, 3).unwrap(), ModeState::vacuum(3).unwrap(), ModeState::vacuum(2).unwrap()]);
    let err = evolve(&s, &cfg, 1.0, &EvolveOptions::default().with_dt(0.5)).unwrap_err();
    assert!(matches!(err, Error::StepSize { .. }));
    let tight = EvolveOptions { tail_limit: 1e-12, ..Default::default() };
    let err = evolve(&s, &cfg, 3.0, &tight).unwrap_err();
    assert!(matches!(err, Error::NonConvergence { .. }), "{err:?}");
    assert!(evolve(&s, &cfg, -1.0, &EvolveOptions::default()).is_err());
}

#[test]
fn excitation_number_breaks_mid_pulse_but_not_under_rwa() {
    let p = qst_pulse::<f64>(5).unwrap();
    let cfg = p.config(1.0, CouplingWeights::uniform(2).unwrap()).unwrap();
    let s = TruncatedState::fock(FockBasis::uniform(3, 12).unwrap(), &[1, 0, 0]).unwrap();
    let times = uniform_times(p.tau, 100);
    let full = evolve_checkpoints(&s, &cfg, 0.0, &times, &EvolveOptions::default()).unwrap();
    let dev = full.iter().map(|st| (total_excitations(st) - 1.0).abs()).fold(0.0, f64::max);
    assert!(dev > 1e-2, "{dev}");
    assert!((total_excitations(full.last().unwrap()) - 1.0).abs() < 1e-5);
    let rwa = evolve_checkpoints(&s, &cfg, 0.0, &times, &EvolveOptions::default().rotating_wave()).unwrap();
    let dev = rwa.iter().map(|st| (total_excitations(st) - 1.0).abs()).fold(0.0, f64::max);
    assert!(dev < 1e-10, "{dev}");
}

/// Dense `dρ/dt = −i[H(t), ρ]` by RK4.
fn dense_density_evolution(
    cfg: &SystemConfig<f64>,
    basis: &FockBasis,
    rho0: Array2<C64>,
    tau: f64,
    steps: usize,
) -> Array2<C64> {
    let mi = C64::new(0.0, -1.0);
    let f = |t: f64, r: &Array2<C64>| {
        let h = build_hamiltonian(cfg, basis, t).unwrap().to_dense();
        (h.dot(r) - r.dot(&h)).mapv(|z| z * mi)
    };
    let h = tau / steps as f64;
    let mut rho = rho0;
    for k in 0..steps {
        let t = k as f64 * h;
        let k1 = f(t, &rho);
        let k2 = f(t + h / 2.0, &(&rho + &k1.mapv(|z| z * h / 2.0)));
        let k3 = f(t + h / 2.0, &(&rho + &k2.mapv(|z| z * h / 2.0)));
        let k4 = f(t + h, &(&rho + &k3.mapv(|z| z * h)));
        rho = &rho + &(&k1 + &k2.mapv(|z| z * 2.0) + &k3.mapv(|z| z * 2.0) + &k4).mapv(|z| z * h / 6.0);
    }
    rho
}

#[test]
fn mixture_evolution_matches_dense_density_evolution() {
    let cfg = two_node(0.3);
    let s = product(&[
        ModeState::fock(1, 4).unwrap(),
        ModeState::vacuum(3).unwrap(),
        ModeState::thermal(0.2, 1.0, 4).unwrap(),
    ]);
    let tau = 2.0;
    let opts = EvolveOptions { tail_limit: f64::INFINITY, ..EvolveOptions::default().with_dt(0.002) };
    let mixed = evolve(&s, &cfg, tau, &opts).unwrap().to_density();
    let dense = dense_density_evolution(&cfg, s.basis(), s.to_density(), tau, 1000);
    let diff = (&mixed - &dense).iter().map(|z| z.norm()).fold(0.0, f64::max);
    assert!(diff < 1e-8, "{diff}");
    // A density-matrix input is evolved through its eigen-branches.
    let as_rho = TruncatedState::density(s.basis().clone(), s.to_density()).unwrap();
    let via_eig = evolve(&as_rho, &cfg, tau, &opts).unwrap().to_density();
    let diff = (&via_eig - &mixed).iter().map(|z| z.norm()).fold(0.0, f64::max);
    assert!(diff < 1e-10, "{diff}");
}

#[test]
fn thermal_mean_occupation_geometric_series() {
    let th = ModeState::<f64>::thermal(3.0, 1.0, 60).unwrap();
    let s = TruncatedState::product(&[th], Some(vec!["c".into()])).unwrap();
    let exact = 1.0 / ((1.0f64 / 3.0).exp() - 1.0);
    assert!((total_excitations(&s) - exact).abs() < 1e-5);
}

fn single(m: ModeState<f64>) -> TruncatedState<f64> {
    TruncatedState::product(&[m], Some(vec!["a".into()])).unwrap()
}

#[test]
fn wigner_vacuum_and_normalization() {
    let vac = single(ModeState::vacuum(4).unwrap());
    let g = wigner(&vac, &[0.0], &[0.0]).unwrap();
    assert_abs_diff_eq!(g.values[[0, 0]], 1.0 / std::f64::consts::PI, epsilon = 1e-15);
    let axis = linspace(-7.0, 7.0, 141);
    let cat = single(ModeState::cat(C64::new(1.2, 0.0), CatParity::Even, 20).unwrap());
    let g = wigner(&cat, &axis, &axis).unwrap();
    assert_abs_diff_eq!(g.integral(), 1.0, epsilon = 1e-6);
    assert!(g.values.iter().any(|&w| w < -0.05), "even cat must show negative fringes");
}

#[test]
fn wigner_coherent_is_displaced_gaussian() {
    let alpha = C64::new(0.9, -0.4);
    let coh = single(ModeState::coherent(alpha, 20).unwrap());
    let (x0, p0) = (alpha.re * 2f64.sqrt(), alpha.im * 2f64.sqrt());
    let xs = [x0, x0 + 0.3, -0.5];
    let ps = [p0, p0 - 0.2, 0.7];
    let g = wigner(&coh, &xs, &ps).unwrap();
    for (i, x) in xs.iter().enumerate() {
        for (j, p) in ps.iter().enumerate() {
            let want = (-(x - x0).powi(2) - (p - p0).powi(2)).exp() / std::f64::consts::PI;
            assert_abs_diff_eq!(g.values[[i, j]], want, epsilon = 1e-10);
        }
    }
}

/// Dense matrix exponential by scaling and squaring of a Taylor series.
fn expm(a: &Array2<C64>) -> Array2<C64> {
    let n = a.nrows();
    let norm: f64 = a.iter().map(|z| z.norm()).sum();
    let s = (norm.log2().ceil().max(0.0) as i32) + 2;
    let scaled = a.mapv(|z| z / 2f64.powi(s));
    let mut term = Array2::<C64>::eye(n);
    let mut sum = term.clone();
    for k in 1..30 {
        term = term.dot(&scaled).mapv(|z| z / k as f64);
        sum += &term;
    }
    for _ in 0..s {
        sum = sum.dot(&sum);
    }
    sum
}

#[test]
fn wigner_cat_matches_displaced_parity_oracle() {
    // W(x, p) = Tr[ρ D(α) Π D(α)†] / π with α = (x + ip)/√2.
    let d = 20;
    let big = 70;
    let cat = single(ModeState::cat(C64::new(1.2, 0.0), CatParity::Even, d).unwrap());
    let rho_small = cat.to_density();
    let mut rho = Array2::<C64>::zeros((big, big));
    rho.slice_mut(ndarray::s![..d, ..d]).assign(&rho_small);
    let mut adag = Array2::<C64>::zeros((big, big));
    for n in 0..big - 1 {
        adag[[n + 1, n]] = C64::new(((n + 1) as f64).sqrt(), 0.0);
    }
    let a = adag.t().to_owned();
    let parity =
        Array2::from_diag(&Array1::from_iter((0..big).map(|n| C64::new(if n % 2 == 0 { 1.0 } else { -1.0 }, 0.0))));
    let pts = [(0.0, 0.0), (0.4, 0.9), (1.5, -0.3), (-0.8, 1.7)];
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ps: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let g = wigner(&cat, &xs, &ps).unwrap();
    for (i, &(x, p)) in pts.iter().enumerate() {
        let alpha = C64::new(x, p) / 2f64.sqrt();
        let gen = &adag.mapv(|z| z * alpha) - &a.mapv(|z| z * alpha.conj());
        let disp = expm(&gen);
        let disp_adj = disp.t().mapv(|z| z.conj());
        let op = disp.dot(&parity).dot(&disp_adj);
        let w: C64 = rho.dot(&op).diag().sum() / std::f64::consts::PI;
        assert_abs_diff_eq!(g.values[[i, i]], w.re, epsilon = 1e-9);
    }
}

#[test]
fn wigner_rejects_multimode_and_writes_csv() {
    let s = product(&[ModeState::vacuum(2).unwrap(), ModeState::vacuum(2).unwrap()]);
    assert!(wigner(&s, &[0.0], &[0.0]).is_err());
    let g = wigner(&single(ModeState::vacuum(3).unwrap()), &[0.0, 1.0], &[0.0]).unwrap();
    let mut buf = Vec::new();
    g.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next(), Some("x,p,W"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn f32_evolution_runs() {
    let cfg = SystemConfig::<f32>::with_effective_coupling(1.0, 0.2, CouplingWeights::uniform(1).unwrap()).unwrap();
    let s = TruncatedState::<f32>::fock(FockBasis::uniform(2, 4).unwrap(), &[1, 0]).unwrap();
    let out = evolve(&s, &cfg, 3.0, &EvolveOptions { tail_limit: f64::INFINITY, ..Default::default() }).unwrap();
    assert!((out.trace() - 1.0).abs() < 1e-4);
}
