//! Acceptance gate: one test per headline property of the solver, each
//! printing a single pass/fail line (run with `--nocapture` to see the
//! lines for passing criteria as well).

use cqbem::convergence::{converge_space, converge_time, fit_order, LadderSetup, SpaceLadder, TimeLadder};
use cqbem::cq::{apply_symbol, radau_tableau, CQGrid, StageSignal};
use cqbem::materials::{audit_grid, MaterialKind, MaterialPair, MaterialSymbol, Side};
use cqbem::mesh::{assemble_pairing, icosphere, RTSpace};
use cqbem::ops::{
    assemble_a_matrix, assemble_vk, cross_c, eval_double_layer_kappa, eval_single_layer_kappa,
    min_hermitian_eigenvalue, CVector, PotentialTargets, QuadConfig,
};
use cqbem::oracle::{operator_spectrum, vsh_axisymmetric};
use cqbem::quad::tri_rule;
use cqbem::scattering::{reconstruct_fields, solve_scattering, IncidentWave, ScatterRun};
use cqbem::C64;
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

type Point = nalgebra::Vector3<f64>;

fn verdict(number: u32, name: &str, ok: bool, detail: &str) {
    let v = if ok { "PASS" } else { "FAIL" };
    println!("ACCEPTANCE {number} ({name}): {v} -- {detail}");
    assert!(ok, "criterion {number} ({name}) failed: {detail}");
}

fn space(level: usize) -> RTSpace {
    RTSpace::new(icosphere(level, 1.0).unwrap(), 0).unwrap()
}

fn contrast_materials() -> (MaterialPair, MaterialPair) {
    (MaterialPair::fractional_interior(), MaterialPair::vacuum(Side::Exterior))
}

fn contrast_run(space: &RTSpace, n_steps: usize, stages: usize) -> ScatterRun<'_> {
    let (interior, exterior) = contrast_materials();
    ScatterRun {
        space,
        interior,
        exterior,
        tableau: radau_tableau(stages).unwrap(),
        grid: CQGrid::new(8.0, n_steps).unwrap(),
        wave: IncidentWave::reference_pulse(10.0).unwrap(),
        quad: QuadConfig::default(),
    }
}

#[test]
fn criterion_01_passivity_audit() {
    let started = Instant::now();
    let families = [
        ("debye", MaterialKind::Debye { beta: 1.0, lambda: 1.0 }),
        (
            "shifted_heaviside",
            MaterialKind::ShiftedHeaviside { alpha1: 2.0, alpha2: 1.0, t_star: 1.0 },
        ),
        ("drude", MaterialKind::Drude { omega_d: 1.0, gamma_d: 1.0 }),
        ("lorentz", MaterialKind::Lorentz { beta_l: 1.0, alpha_l: 1.0, omega_l: 1.0 }),
        ("fractional", MaterialKind::Fractional { gamma: 2.0, beta: 1.0, eta: 0.5 }),
    ];
    let grid = audit_grid(50, 20);
    assert!(grid.len() >= 2000);
    let mut worst = f64::INFINITY;
    let mut worst_family = "";
    for (label, kind) in families {
        let sym = MaterialSymbol::new(kind, 1.0).unwrap();
        for &s in &grid {
            let m = sym.passivity_margin(s).unwrap();
            if m < worst {
                worst = m;
                worst_family = label;
            }
        }
    }
    let ok = worst >= -1e-12 && started.elapsed().as_secs_f64() < 10.0;
    verdict(
        1,
        "passivity audit",
        ok,
        &format!(
            "worst margin {worst:.3e} ({worst_family}) over {} frequencies in {:.2}s",
            grid.len(),
            started.elapsed().as_secs_f64()
        ),
    );
}

#[test]
fn criterion_02_composition_rule() {
    let started = Instant::now();
    let tab = radau_tableau(2).unwrap();
    // the composition identity holds exactly at every contour node; the
    // observable defect is round-off amplified by rho^{-n} in the extra
    // transform round trip, so a radius closer to 1 than the default
    // accuracy-balanced choice isolates the property being tested
    let grid = CQGrid::new(8.0, 64).unwrap().with_rho(0.9).unwrap();
    let g = StageSignal::sample_scalar(&grid, &tab, |t| t.powi(5) * (-t).exp());
    let half = |lam: C64| Ok(lam.sqrt());
    let once = apply_symbol(half, &g, &tab, &grid).unwrap();
    let twice = apply_symbol(half, &once, &tab, &grid).unwrap();
    let direct = apply_symbol(|lam| Ok(lam), &g, &tab, &grid).unwrap();
    let diff = twice
        .raw()
        .iter()
        .zip(direct.raw())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    let scale = g.max_abs();
    let ok = diff <= 1e-10 * scale && started.elapsed().as_secs_f64() < 5.0;
    verdict(
        2,
        "composition rule",
        ok,
        &format!("|s^(1/2) s^(1/2) g - s g| = {diff:.3e} vs 1e-10 * {scale:.3e}"),
    );
}

fn scalar_integration_order(stages: usize, n_list: &[usize]) -> f64 {
    let tab = radau_tableau(stages).unwrap();
    let exact = |t: f64| {
        120.0
            - (-t).exp()
                * (t.powi(5) + 5.0 * t.powi(4) + 20.0 * t.powi(3) + 60.0 * t * t + 120.0 * t
                    + 120.0)
    };
    let mut pts = Vec::new();
    for &n in n_list {
        let grid = CQGrid::new(8.0, n).unwrap();
        let g = StageSignal::sample_scalar(&grid, &tab, |t| t.powi(5) * (-t).exp());
        let out = apply_symbol(|lam| Ok(1.0 / lam), &g, &tab, &grid).unwrap();
        let mut err = 0.0f64;
        for k in 1..=n {
            err = err.max((out.point_value(k)[0] - exact(grid.t(k))).abs());
        }
        pts.push((grid.tau, err));
    }
    fit_order(&pts).unwrap().0
}

#[test]
fn criterion_03_scalar_quadrature_order() {
    let started = Instant::now();
    let n_list = [16usize, 32, 64, 128];
    let order2 = scalar_integration_order(2, &n_list);
    let order1 = scalar_integration_order(1, &n_list);
    let ok = order2 >= 2.7 && order1 >= 0.9 && started.elapsed().as_secs_f64() < 30.0;
    verdict(
        3,
        "scalar quadrature order",
        ok,
        &format!(
            "two-stage order {order2:.3} (need >= 2.7), one-stage order {order1:.3} (need >= 0.9)"
        ),
    );
}

#[test]
fn criterion_04_discrete_coercivity() {
    let started = Instant::now();
    let (interior, exterior) = contrast_materials();
    let quad = QuadConfig::default();
    let frequencies = [
        C64::new(1.0, 0.0),
        C64::new(1.0, 2.0),
        C64::new(1.0, -2.0),
        C64::new(3.0, 0.0),
    ];
    let mut worst = f64::INFINITY;
    for level in 0..=2usize {
        let sp = space(level);
        let pairing = assemble_pairing(&sp);
        for &s in &frequencies {
            let a = assemble_a_matrix(s, &interior, &exterior, &sp, &pairing, &quad).unwrap();
            let min_eig = min_hermitian_eigenvalue(&a).unwrap();
            worst = worst.min(min_eig);
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    let ok = worst > 0.0 && elapsed < 300.0;
    verdict(
        4,
        "discrete coercivity",
        ok,
        &format!("smallest Hermitian-part eigenvalue {worst:.3e} over levels 0-2 in {elapsed:.1}s"),
    );
}

/// Offset-trace residuals of the layer potentials for one interpolated
/// density: tangential jump of the single layer, and the double-layer jump
/// compared against minus the density.  Both relative to the density norm.
fn jump_residuals(sp: &RTSpace, seed: u64) -> (f64, f64) {
    let mesh = &sp.mesh;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rv = || Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let (a, b) = (rv(), rv());
    let coeffs: Vec<C64> = sp
        .interpolate(|x: &Point| a + b.cross(x))
        .into_iter()
        .map(|c| C64::new(c, 0.0))
        .collect();
    let delta = 0.3 * mesh.h;
    let n_tri = mesh.n_triangles();
    let plus: Vec<Point> = (0..n_tri).map(|t| mesh.centroid(t) + mesh.normals[t] * delta).collect();
    let minus: Vec<Point> = (0..n_tri).map(|t| mesh.centroid(t) - mesh.normals[t] * delta).collect();
    let kappa = C64::new(1.0, 0.0);
    let sl_plus = eval_single_layer_kappa(kappa, sp, &coeffs, &plus).unwrap();
    let sl_minus = eval_single_layer_kappa(kappa, sp, &coeffs, &minus).unwrap();
    let dl_plus = eval_double_layer_kappa(kappa, sp, &coeffs, &plus).unwrap();
    let dl_minus = eval_double_layer_kappa(kappa, sp, &coeffs, &minus).unwrap();
    let real_coeffs: Vec<f64> = coeffs.iter().map(|c| c.re).collect();
    let (mut s_res, mut d_res, mut density) = (0.0f64, 0.0f64, 0.0f64);
    for t in 0..n_tri {
        let nu = mesh.normals[t];
        let nu_c = CVector::new(C64::new(nu.x, 0.0), C64::new(nu.y, 0.0), C64::new(nu.z, 0.0));
        let js = cross_c(&(sl_plus.values[t] - sl_minus.values[t]), &nu_c);
        let jd = cross_c(&(dl_plus.values[t] - dl_minus.values[t]), &nu_c);
        let phi = sp.eval(&real_coeffs, t, &mesh.centroid(t));
        let phi_c = CVector::new(C64::new(phi.x, 0.0), C64::new(phi.y, 0.0), C64::new(phi.z, 0.0));
        let area = mesh.areas[t];
        s_res += area * js.iter().map(|z| z.norm_sqr()).sum::<f64>();
        d_res += area * (jd + phi_c).iter().map(|z| z.norm_sqr()).sum::<f64>();
        density += area * phi.norm_squared();
    }
    let density = density.sqrt().max(1e-300);
    (s_res.sqrt() / density, d_res.sqrt() / density)
}

#[test]
fn criterion_05_jump_relations() {
    let seeds = [3u64, 7, 11, 19, 23];
    let mut single = Vec::new();
    let mut double = Vec::new();
    for level in 0..=2usize {
        let sp = space(level);
        let (mut s_sum, mut d_sum) = (0.0, 0.0);
        for &seed in &seeds {
            let (s, d) = jump_residuals(&sp, seed);
            s_sum += s;
            d_sum += d;
        }
        single.push(s_sum / seeds.len() as f64);
        double.push(d_sum / seeds.len() as f64);
    }
    let monotone =
        |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]);
    let ok = monotone(&single) && monotone(&double);
    verdict(
        5,
        "jump relations",
        ok,
        &format!(
            "mean residuals over {} densities: single layer {single:.3?}, double layer {double:.3?}",
            seeds.len()
        ),
    );
}

/// Moments of an axisymmetric vector-spherical-harmonic pattern against the
/// RT0 basis, pattern evaluated on the radially projected point.
fn vsh_moments(sp: &RTSpace, l: usize, curl_type: bool) -> DVector<C64> {
    let rule = tri_rule(4);
    let mut m = DVector::zeros(sp.n_dofs());
    for t in 0..sp.mesh.n_triangles() {
        let tri = sp.mesh.triangles[t];
        let v = [sp.mesh.vertices[tri[0]], sp.mesh.vertices[tri[1]], sp.mesh.vertices[tri[2]]];
        for &(l1, l2, w) in &rule {
            let x = v[0] * l1 + v[1] * l2 + v[2] * (1.0 - l1 - l2);
            let (t1, t2) = vsh_axisymmetric(l, &x.normalize());
            let tv = if curl_type { t1 } else { t2 };
            for k in 0..3 {
                let (e, _) = sp.tri_edges[t][k];
                m[e] += C64::new(w * sp.mesh.areas[t] * sp.basis(t, k, &x).dot(&tv), 0.0);
            }
        }
    }
    m
}

fn vsh_coefficients(sp: &RTSpace, l: usize, curl_type: bool) -> DVector<C64> {
    let c = sp.interpolate(|x| {
        let (t1, t2) = vsh_axisymmetric(l, &x.normalize());
        if curl_type { t1 } else { t2 }
    });
    DVector::from_iterator(c.len(), c.iter().map(|&v| C64::new(v, 0.0)))
}

#[test]
fn criterion_06_sphere_operator_validation() {
    let kappa = C64::new(1.0, 0.0);
    let spectrum = operator_spectrum(kappa, 1).unwrap()[0];
    let mut level2 = [0.0f64; 4];
    let mut level3 = [0.0f64; 4];
    for (level, out) in [(2usize, &mut level2), (3, &mut level3)] {
        let sp = space(level);
        let (vm, km) = assemble_vk(kappa, &sp, &QuadConfig::default()).unwrap();
        let m1 = vsh_moments(&sp, 1, true);
        let m2 = vsh_moments(&sp, 1, false);
        for (slot, curl_type) in [(0usize, true), (1, false)] {
            let phi = vsh_coefficients(&sp, 1, curl_type);
            let v_action = &vm * &phi;
            let k_action = &km * &phi;
            let (v_pred, k_pred) = if curl_type {
                (m1.clone() * spectrum.v_curl, m2.clone() * spectrum.k_swap)
            } else {
                (m2.clone() * spectrum.v_grad, m1.clone() * spectrum.k_swap)
            };
            out[2 * slot] = (&v_action - &v_pred).norm() / v_pred.norm();
            out[2 * slot + 1] = (&k_action - &k_pred).norm() / k_pred.norm();
        }
    }
    let ok = level2.iter().all(|&e| e < 0.05)
        && level2.iter().zip(&level3).all(|(&c, &f)| f < c);
    verdict(
        6,
        "sphere operator validation",
        ok,
        &format!("level-2 relative errors {level2:.4?}, level-3 {level3:.4?}"),
    );
}

fn ladder_setup() -> LadderSetup {
    let (interior, exterior) = contrast_materials();
    LadderSetup {
        interior,
        exterior,
        wave: IncidentWave::reference_pulse(10.0).unwrap(),
        quad: QuadConfig::default(),
        t_final: 8.0,
    }
}

#[test]
fn criterion_07_time_convergence() {
    let started = Instant::now();
    let sp = space(2);
    let ladder = TimeLadder {
        setup: ladder_setup(),
        stages: 2,
        n_list: vec![16, 32, 64, 128],
        reference_n: 256,
        observation_point: Point::new(0.0, 2.0, 0.0),
    };
    let study = converge_time(&sp, &ladder).unwrap();
    let field_ok = study.field.slope >= 2.5 && study.field.slope <= 3.5;
    let density_ok = study.density.slope >= 1.2;
    verdict(
        7,
        "time convergence",
        field_ok && density_ok,
        &format!(
            "field slope {:.3} (need 2.5..3.5), density slope {:.3} (need >= 1.2) in {:.0}s",
            study.field.slope,
            study.density.slope,
            started.elapsed().as_secs_f64()
        ),
    );
}

#[test]
fn criterion_08_space_convergence() {
    let started = Instant::now();
    let ladder = SpaceLadder {
        setup: ladder_setup(),
        stages: 1,
        n_steps: 128,
        levels: vec![0, 1, 2],
        reference_level: 3,
        radius: 1.0,
    };
    let study = converge_space(&ladder).unwrap();
    // the paper-level rate 1.5 holds in the fractional-order trace norm,
    // which is not computed here; the discrete L2 surrogate is gated at 1.0
    // and the graph-norm slope is reported alongside as context
    let ok = study.trace.slope >= 1.0;
    verdict(
        8,
        "space convergence",
        ok,
        &format!(
            "density L2 slope {:.3} (need >= 1.0, surrogate for the 1.5 trace-norm rate), \
             graph-norm slope {:.3}, in {:.0}s",
            study.trace.slope,
            study.graph.slope,
            started.elapsed().as_secs_f64()
        ),
    );
}

#[test]
fn criterion_09_causality_and_transparency() {
    // causality: upstream exterior point stays quiet until the wavefront
    // can have reached it through the obstacle
    let sp = space(0);
    let run = contrast_run(&sp, 32, 2);
    let hist = solve_scattering(&run).unwrap();
    let target = -run.wave.direction * 2.0;
    let targets = PotentialTargets::new(vec![target], vec![Side::Exterior], &sp.mesh).unwrap();
    let frames = reconstruct_fields(&run, &hist, &targets).unwrap();
    let peak = frames.iter().map(|f| f.e[0].norm().max(f.h[0].norm())).fold(0.0f64, f64::max);
    let t_quiet = run.wave.delay - 1.0 - (1e6f64.ln() / run.wave.sharpness).sqrt() + 1.0;
    let early = frames
        .iter()
        .filter(|f| f.t < t_quiet)
        .map(|f| f.e[0].norm().max(f.h[0].norm()))
        .fold(0.0f64, f64::max);
    let causal_ok = peak > 1e-6 && early <= 1e-6 * peak;

    // transparency: with no material contrast the scattered-field densities
    // carry only the consistency error, which shrinks under refinement
    let mut ext_norms = Vec::new();
    for level in [0usize, 1] {
        let sp = space(level);
        let mut run = contrast_run(&sp, 16, 2);
        run.interior = MaterialPair::vacuum(Side::Interior);
        let hist = solve_scattering(&run).unwrap();
        let n = sp.n_dofs();
        let mut ext = 0.0f64;
        for step in 0..=run.grid.n_steps {
            for i in 0..run.tableau.m {
                let st = hist.signal.stage(step, i);
                for k in 0..2 * n {
                    ext = ext.max(st[k].abs());
                }
            }
        }
        ext_norms.push(ext);
    }
    let transparent_ok = ext_norms[1] < ext_norms[0];
    verdict(
        9,
        "causality and transparency",
        causal_ok && transparent_ok,
        &format!(
            "pre-arrival amplitude {early:.3e} vs peak {peak:.3e} (quiet until t = {t_quiet:.2}); \
             no-contrast scattered densities {ext_norms:.4?}"
        ),
    );
}

/// Render field frames exactly like the command-line emitter.
fn frames_to_csv(frames: &[cqbem::scattering::FieldFrame], points: &[Point]) -> String {
    let mut csv = String::from("t,x,y,z,Ex_re,Ey_re,Ez_re,Hx_re,Hy_re,Hz_re\n");
    for fr in frames {
        for (i, p) in points.iter().enumerate() {
            let (e, h) = (&fr.e[i], &fr.h[i]);
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                fr.t, p.x, p.y, p.z, e.x, e.y, e.z, h.x, h.y, h.z
            ));
        }
    }
    csv
}

#[test]
fn criterion_10_determinism() {
    let points = vec![Point::new(0.0, 2.0, 0.0)];
    let render = || {
        let sp = space(0);
        let run = contrast_run(&sp, 8, 1);
        let hist = solve_scattering(&run).unwrap();
        let targets =
            PotentialTargets::new(points.clone(), vec![Side::Exterior], &sp.mesh).unwrap();
        let frames = reconstruct_fields(&run, &hist, &targets).unwrap();
        frames_to_csv(&frames, &points)
    };
    let first = render();
    let second = render();
    let ok = first == second && first.lines().count() == 10;
    verdict(
        10,
        "determinism",
        ok,
        &format!("two independent runs produced {} identical CSV bytes", first.len()),
    );
}
