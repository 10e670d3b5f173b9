//! The runnable property suite behind `check-all`.
//!
//! Each check exercises one documented invariant of a module and
//! reports pass/fail plus a one-line measurement. Checks marked
//! `flagged` record a known overtight inequality variant that is
//! reported without failing the suite (see the mode estimates).

use modbessel::bessel_i_normalized;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;
use crate::continuation::{self, ContinuationConfig};
use crate::error::Result;
use crate::field::{FieldConfig, FieldContext};
use crate::geometry::{self, ShapeCoeffs};
use crate::model::NutrientFn;
use crate::modes;
use crate::radial::{self, RadialConfig};
use crate::report::CheckLine;
use crate::spectrum::{self, SymbolTable};

pub const A_STAR: f64 = 0.892_779_931_793_069;

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub flagged: bool,
    pub detail: String,
}

impl CheckResult {
    fn from_bool(name: &str, ok: bool, detail: String) -> Self {
        CheckResult {
            name: name.to_string(),
            passed: ok,
            flagged: false,
            detail,
        }
    }

    fn flag(name: &str, detail: String) -> Self {
        CheckResult {
            name: name.to_string(),
            passed: true,
            flagged: true,
            detail,
        }
    }

    pub fn line(&self) -> String {
        let status = if !self.passed {
            "FAIL"
        } else if self.flagged {
            "PASS*"
        } else {
            "PASS"
        };
        format!("{status:<5} {:<52} {}", self.name, self.detail)
    }

    pub fn to_check_line(&self) -> CheckLine {
        CheckLine {
            name: self.name.clone(),
            passed: self.passed,
            flagged: self.flagged,
            detail: self.detail.clone(),
        }
    }
}

/// Suite scope: `fast` trims sample counts for interactive runs.
#[derive(Clone, Copy, Debug)]
pub struct SuiteOptions {
    pub fast: bool,
}

fn push(results: &mut Vec<CheckResult>, r: CheckResult) {
    results.push(r);
}

// ---------------------------------------------------------------------------
// consumption laws
// ---------------------------------------------------------------------------

pub fn model_checks() -> Vec<CheckResult> {
    let mut out = Vec::new();
    let laws = [
        NutrientFn::Identity,
        NutrientFn::michaelis_menten(2.0).unwrap(),
        NutrientFn::michaelis_menten(0.37).unwrap(),
    ];
    let mut worst = 0.0f64;
    let mut ok = true;
    for f in &laws {
        if f.eval(0.0).unwrap() != 0.0 {
            ok = false;
        }
        for i in 0..=1000 {
            let psi = 2.0 * i as f64 / 1000.0;
            let d = f.eval_prime(psi).unwrap();
            if !(d > 0.0) {
                ok = false;
            }
            let h = 1e-6;
            let lo = (psi - h).max(0.0);
            let fd = (f.eval(psi + h).unwrap() - f.eval(lo).unwrap()) / (psi + h - lo);
            worst = worst.max((fd - d).abs() / d.abs().max(1e-12));
        }
    }
    push(
        &mut out,
        CheckResult::from_bool(
            "consumption laws: f(0)=0, f'>0, derivative consistency",
            ok && worst <= 1e-6,
            format!("worst relative derivative defect {worst:.2e} (tol 1e-6)"),
        ),
    );
    out
}

// ---------------------------------------------------------------------------
// radial equilibrium
// ---------------------------------------------------------------------------

pub fn radial_checks(cfg: &RadialConfig) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let f = NutrientFn::Identity;

    let mut mono_ok = true;
    let mut prev = f64::INFINITY;
    for i in 0..20 {
        let c = 0.05 + 0.9 * i as f64 / 19.0;
        match radial::shoot(c, &f, cfg) {
            Ok(Some((r, _))) => {
                if r >= prev {
                    mono_ok = false;
                }
                prev = r;
            }
            _ => mono_ok = false,
        }
    }
    push(
        &mut out,
        CheckResult::from_bool(
            "shooting map: hit radius decreasing in center value",
            mono_ok,
            "20 samples of c in (0.05, 0.95)".to_string(),
        ),
    );

    for (label, law) in [
        ("identity", NutrientFn::Identity),
        (
            "michaelis-menten",
            NutrientFn::michaelis_menten(2.0).unwrap(),
        ),
    ] {
        let f1 = law.eval(1.0).unwrap();
        let mut worst_res = 0.0f64;
        let mut mono_ok = true;
        let mut prev = f64::INFINITY;
        for i in 0..10 {
            let a = f1 * (0.1 + 0.8 * i as f64 / 9.0);
            match radial::find_ra(a, &law, cfg) {
                Ok(eq) => {
                    worst_res = worst_res.max(eq.residual);
                    if eq.r_a >= prev {
                        mono_ok = false;
                    }
                    prev = eq.r_a;
                }
                Err(_) => mono_ok = false,
            }
        }
        push(
            &mut out,
            CheckResult::from_bool(
                &format!("equilibrium radius decreasing in A ({label})"),
                mono_ok && worst_res <= cfg.residual_tol,
                format!("10 values of A, worst residual {worst_res:.2e}"),
            ),
        );
    }

    // refinement: the radius must be insensitive to the integrator
    // tolerance and profile resolution
    let coarse = RadialConfig {
        ode: crate::ode::OdeTol {
            rtol: 1e-10,
            atol: 1e-10,
            ..Default::default()
        },
        profile_intervals: cfg.profile_intervals / 2,
        ..*cfg
    };
    let ra_coarse = radial::find_ra(A_STAR, &f, &coarse).map(|e| e.r_a);
    let ra_fine = radial::find_ra(A_STAR, &f, cfg).map(|e| e.r_a);
    let (ok, detail) = match (ra_coarse, ra_fine) {
        (Ok(a), Ok(b)) => (
            (a - b).abs() <= 1e-8,
            format!("|delta R_A| = {:.2e}", (a - b).abs()),
        ),
        _ => (false, "solver failure".to_string()),
    };
    push(
        &mut out,
        CheckResult::from_bool(
            "equilibrium radius stable under grid refinement",
            ok,
            detail,
        ),
    );
    out
}

// ---------------------------------------------------------------------------
// mode family
// ---------------------------------------------------------------------------

pub fn mode_checks(opts: SuiteOptions, cfg: &RadialConfig) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let f = NutrientFn::Identity;
    let eq = radial::find_ra(A_STAR, &f, cfg)?;

    // closed-form equivalence for the identity law
    let n_top = if opts.fast { 16 } else { 32 };
    let mut worst = 0.0f64;
    for n in 0..=n_top {
        let s = modes::solve_mode(n, &eq, &f, 512)?;
        let u_ref = bessel_i_normalized(n as u32, eq.r_a);
        let du_ref =
            eq.r_a * eq.r_a * bessel_i_normalized(n as u32 + 1, eq.r_a) / (2.0 * n as f64 + 2.0);
        worst = worst.max((s.u1 - u_ref).abs() / u_ref);
        worst = worst.max((s.du1 - du_ref).abs() / du_ref);
    }
    push(
        &mut out,
        CheckResult::from_bool(
            "mode boundary data match the series closed form (f = id)",
            worst <= 1e-8,
            format!("n <= {n_top}, worst relative error {worst:.2e}"),
        ),
    );

    // the translation-mode identity ties the radial and mode solvers
    let pairs: Vec<(f64, NutrientFn)> = vec![
        (A_STAR, NutrientFn::Identity),
        (0.15, NutrientFn::Identity),
        (0.45, NutrientFn::Identity),
        (0.75, NutrientFn::Identity),
        (0.9, NutrientFn::Identity),
        (0.25, NutrientFn::michaelis_menten(2.0).unwrap()),
        (0.6, NutrientFn::michaelis_menten(2.0).unwrap()),
        (0.85, NutrientFn::michaelis_menten(2.0).unwrap()),
        (0.1, NutrientFn::michaelis_menten(0.6).unwrap()),
        (0.2, NutrientFn::michaelis_menten(0.6).unwrap()),
    ];
    let mut worst = 0.0f64;
    for (a, law) in &pairs {
        let eq_p = radial::find_ra(*a, law, cfg)?;
        worst = worst.max(modes::mu1_identity_defect(&eq_p, law, 512)?);
    }
    push(
        &mut out,
        CheckResult::from_bool(
            "translation-mode identity (A/2)r_1 + A - f(1) = 0",
            worst <= 1e-7,
            format!("10 parameter pairs, worst defect {worst:.2e} (tol 1e-7)"),
        ),
    );

    // independent integral-equation route
    let ns: &[usize] = if opts.fast { &[0, 3] } else { &[0, 1, 3, 8] };
    let mut worst = 0.0f64;
    for &n in ns {
        let a = modes::solve_mode(n, &eq, &f, 512)?;
        let b = modes::solve_mode_volterra(n, &eq, &f, 80)?;
        worst = worst.max((a.u1 - b.u1).abs().max((a.du1 - b.du1).abs()));
    }
    push(
        &mut out,
        CheckResult::from_bool(
            "integral-equation route agrees with direct integration",
            worst <= 1e-8,
            format!("modes {ns:?}, worst boundary-data gap {worst:.2e}"),
        ),
    );

    // estimate suite: hard bounds plus the advisory variants
    let k_max = if opts.fast { 32 } else { 64 };
    let rep = modes::verify_estimates(k_max, &eq, &f, 512)?;
    push(
        &mut out,
        CheckResult::from_bool(
            "mode estimates: ordering and linear-decay bounds",
            rep.hard_ok() && rep.trend_ok(),
            format!(
                "k <= {k_max}, M = {:.6}, decay tail value {:.3e}",
                rep.m_const,
                rep.trend_last()
            ),
        ),
    );
    for c in rep.flagged() {
        push(
            &mut out,
            CheckResult::flag(
                &format!("advisory bound {}", c.name),
                format!(
                    "exceeded at {}/{} indices (worst margin {:.2e}); quadratic-decay \
                     variant is overtight, linear-decay bound holds",
                    c.violations, c.checked, c.worst_margin
                ),
            ),
        );
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// symbol and catalog
// ---------------------------------------------------------------------------

pub fn spectrum_checks(cfg: &RadialConfig, k_max: usize) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let f = NutrientFn::Identity;
    let eq = radial::find_ra(A_STAR, &f, cfg)?;
    let (k1, table) = spectrum::find_k1_stable(&eq, &f, k_max, 512)?;

    push(
        &mut out,
        CheckResult::from_bool(
            "ordering onset stable under k_max doubling",
            k1 == 2,
            format!("k1 = {k1} at k_max = {k_max} and {}", 2 * k_max),
        ),
    );

    let feri = spectrum::check_feri(&table, spectrum::FERI_TOL);
    push(
        &mut out,
        CheckResult::from_bool(
            "mode-0 denominator nondegenerate",
            feri,
            format!("d_0 = {:+.6e}", table.denom[0]),
        ),
    );

    let mut worst_root = 0.0f64;
    let mut mono_ok = true;
    let mut prev = 0.0;
    for k in 2..=k_max.min(32) {
        let g = table.bif_value(k)?;
        worst_root = worst_root.max(table.mu(k as i64, g)?.abs());
        if k > 2 && g <= prev {
            mono_ok = false;
        }
        prev = g;
    }
    push(
        &mut out,
        CheckResult::from_bool(
            "symbol roots: zero revalidation and ordering",
            worst_root <= 1e-10 && mono_ok,
            format!("k in 2..=32, worst |mu(k, G_k)| = {worst_root:.2e}"),
        ),
    );

    // affinity in G: finite differences reproduce the crossing speed
    let mut worst_rel = 0.0f64;
    for k in [0usize, 2, 5, 17, k_max] {
        let h = 1.0;
        let fd = (table.mu(k as i64, 30.0 + h)? - table.mu(k as i64, 30.0 - h)?) / (2.0 * h);
        let tol = 64.0 * f64::EPSILON * (1.0 + (k as f64).powi(3) / table.r_a.powi(3))
            / table.denom[k].abs().max(1e-12);
        worst_rel = worst_rel.max(((fd + table.denom[k]) / table.denom[k]).abs() / tol.max(1e-15));
    }
    push(
        &mut out,
        CheckResult::from_bool(
            "symbol affine in G (finite-difference slope)",
            worst_rel <= 1.0,
            format!("worst slope defect at {worst_rel:.2} of the rounding budget"),
        ),
    );

    let cat = spectrum::catalog(2, 3, &table)?;
    let modes_list: Vec<usize> = cat.iter().map(|p| p.mode).collect();
    let gb = spectrum::g_bullet(&table, k1)?;
    let trans_ok = cat
        .iter()
        .all(|p| spectrum::transversality(p, &table).is_ok());
    push(
        &mut out,
        CheckResult::from_bool(
            "catalog for twofold symmetry",
            modes_list == vec![2, 4, 6]
                && cat.windows(2).all(|w| w[0].g < w[1].g)
                && cat.iter().all(|p| p.g >= gb * (1.0 - 1e-9))
                && trans_ok,
            format!(
                "modes {:?}, G values {:.3}, {:.3}, {:.3}, threshold {:.3}",
                modes_list, cat[0].g, cat[1].g, cat[2].g, gb
            ),
        ),
    );

    let mid = 0.5 * (cat[0].g + cat[1].g);
    push(
        &mut out,
        CheckResult::from_bool(
            "linearization invertible off the catalog",
            spectrum::is_isomorphism_at(mid, 2, &table, spectrum::default_iso_margin(mid))
                && !spectrum::is_isomorphism_at(
                    cat[0].g,
                    2,
                    &table,
                    spectrum::default_iso_margin(cat[0].g),
                ),
            format!("probed midway between G_2 and G_4 (G = {mid:.3})"),
        ),
    );
    Ok(out)
}

// ---------------------------------------------------------------------------
// geometry
// ---------------------------------------------------------------------------

pub fn geometry_checks(opts: SuiteOptions) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let samples = if opts.fast { 25 } else { 100 };
    let mut worst_curv = 0.0f64;
    let mut worst_dot = 0.0f64;
    let mut worst_diff = 0.0f64;
    for _ in 0..samples {
        let l = rng.gen_range(1..=4usize);
        let coeffs: Vec<f64> = (0..4)
            .map(|m| (rng.gen::<f64>() * 2.0 - 1.0) * 0.06 / (1.0 + m as f64))
            .collect();
        let shape = match ShapeCoeffs::new(l, coeffs) {
            Ok(s) => s,
            Err(_) => continue,
        };
        let r_a = 0.6 + 1.2 * rng.gen::<f64>();
        for _ in 0..4 {
            let s = rng.gen::<f64>() * std::f64::consts::TAU;
            // curvature against the parametric finite-difference oracle
            let h = 1e-4;
            let pt = |t: f64| {
                let (rho, _, _) = shape.eval(t);
                let r = r_a * (1.0 + rho);
                (r * t.cos(), r * t.sin())
            };
            let (xp, yp) = pt(s + h);
            let (xm, ym) = pt(s - h);
            let (x0, y0) = pt(s);
            let dx = (xp - xm) / (2.0 * h);
            let dy = (yp - ym) / (2.0 * h);
            let ddx = (xp - 2.0 * x0 + xm) / (h * h);
            let ddy = (yp - 2.0 * y0 + ym) / (h * h);
            let q = dx * dx + dy * dy;
            let oracle = (dx * ddy - dy * ddx) / (q * q.sqrt());
            let exact = geometry::curvature(&shape, r_a, s);
            worst_curv = worst_curv.max((exact - oracle).abs() / exact.abs().max(1.0));
            // normal orthogonal to the tangent
            let (rho, drho, _) = shape.eval(s);
            let (nr, nt) = geometry::normal_field(&shape, s);
            let dot = r_a * drho * nr + r_a * (1.0 + rho) * nt;
            worst_dot = worst_dot.max(dot.abs());
            // spectral derivative against central differences
            let hd = 1e-5;
            let fd = (shape.eval(s + hd).0 - shape.eval(s - hd).0) / (2.0 * hd);
            worst_diff = worst_diff.max((shape.eval(s).1 - fd).abs());
        }
    }
    push(
        &mut out,
        CheckResult::from_bool(
            "curvature matches the parametric oracle",
            worst_curv <= 1e-6,
            format!("{samples} random shapes, worst relative gap {worst_curv:.2e}"),
        ),
    );
    push(
        &mut out,
        CheckResult::from_bool(
            "normal field orthogonal to the boundary tangent",
            worst_dot <= 1e-10,
            format!("worst inner product {worst_dot:.2e}"),
        ),
    );
    push(
        &mut out,
        CheckResult::from_bool(
            "coefficient derivatives match central differences",
            worst_diff <= 1e-8,
            format!("worst gap {worst_diff:.2e}"),
        ),
    );
    out
}

// ---------------------------------------------------------------------------
// field solver
// ---------------------------------------------------------------------------

pub fn field_checks(opts: SuiteOptions, config: &RunConfig) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let f = NutrientFn::Identity;
    let rcfg = config.radial_config();
    let eq = radial::find_ra(A_STAR, &f, &rcfg)?;
    let fcfg = config.field_config();
    let ctx = FieldContext::new(&eq, &f, fcfg)?;
    let table = SymbolTable::build(&eq, &f, config.numerics.k_max, config.numerics.mode_grid)?;

    // 2-D solve at the circle against the 1-D profile
    let zero = ShapeCoeffs::zero(2, 2);
    let nut = ctx.solve_nutrient(&zero)?;
    let mut worst = 0.0f64;
    for i in 0..ctx.grid.m {
        let v = eq.eval_v0_unchecked(ctx.grid.sigma[i]);
        for j in 0..ctx.cfg.n_theta {
            worst = worst.max((nut.psi[(i, j)] - v).abs());
        }
    }
    push(
        &mut out,
        CheckResult::from_bool(
            "2-D nutrient solve matches the radial profile at rho = 0",
            worst <= 1e-7,
            format!("max gap {worst:.2e} (tol 1e-7)"),
        ),
    );

    // trivial family
    let aff = ctx.phi_affine(&zero)?;
    let mut worst = 0.0f64;
    for g in [0.0, 10.0, 200.0] {
        worst = worst.max(aff.values(g).iter().fold(0.0f64, |m, v| m.max(v.abs())));
    }
    push(
        &mut out,
        CheckResult::from_bool(
            "trivial family: sup |Phi(G, 0)| over G in {0, 10, 200}",
            worst <= 1e-7,
            format!("worst sup {worst:.2e} (tol 1e-7)"),
        ),
    );

    // multiplier agreement
    let ks: &[usize] = if opts.fast {
        &[0, 2, 3]
    } else {
        &[0, 2, 3, 4, 5, 6]
    };
    let gs = [0.0, 5.0, 50.0];
    let mut worst_rel = 0.0f64;
    let mut worst_leak = 0.0f64;
    for &k in ks {
        for ch in ctx.multiplier_checks(&table, k, &gs, config.numerics.multiplier_eps)? {
            worst_rel = worst_rel.max(ch.rel_error);
            worst_leak = worst_leak.max(ch.leak_strict / ch.leak_tol);
        }
    }
    push(
        &mut out,
        CheckResult::from_bool(
            "measured multipliers match the symbol",
            worst_rel <= 1e-3 && worst_leak <= 1.0,
            format!(
                "k in {ks:?}, G in {gs:?}: worst relative error {worst_rel:.2e}, \
                 leakage at {worst_leak:.2} of budget"
            ),
        ),
    );
    let mut worst_mode1 = 0.0f64;
    for g in gs {
        let ch = &ctx.multiplier_checks(&table, 1, &[g], 1e-3)?[0];
        worst_mode1 = worst_mode1.max(ch.measured.abs() / (1.0 + g.abs()));
    }
    push(
        &mut out,
        CheckResult::from_bool(
            "translation-mode multiplier vanishes",
            worst_mode1 <= 1e-4,
            format!("worst |measured|/(1+G) = {worst_mode1:.2e} (tol 1e-4)"),
        ),
    );

    // grid convergence of the boundary trace
    let shape = ShapeCoeffs::new(2, vec![0.0, 0.05]).unwrap();
    let g_probe = 10.0;
    let sup_gap = |cfg: FieldConfig| -> Result<f64> {
        let c = FieldContext::new(&eq, &f, cfg)?;
        let fine = FieldContext::new(&eq, &f, cfg.refined(2))?;
        let a = c.assemble_phi(g_probe, &shape)?;
        let b = fine.assemble_phi(g_probe, &shape)?;
        // compare on the coarse nodes (the fine grid contains them)
        let mut worst = 0.0f64;
        for (j, v) in a.values.iter().enumerate() {
            worst = worst.max((v - b.values[2 * j]).abs());
        }
        Ok(worst)
    };
    let e1 = sup_gap(FieldConfig::with_grid(16, 32))?;
    let e2 = sup_gap(FieldConfig::with_grid(32, 64))?;
    let order = (e1 / e2.max(1e-16)).log2();
    push(
        &mut out,
        CheckResult::from_bool(
            "boundary trace converges under grid refinement",
            order >= 2.0,
            format!("errors {e1:.2e} -> {e2:.2e}, empirical order {order:.1}"),
        ),
    );

    // closure of the even, l-periodic family
    let n_shapes = if opts.fast { 6 } else { 20 };
    let mut rng = ChaCha8Rng::seed_from_u64(97);
    let mut worst_ratio = 0.0f64;
    for i in 0..n_shapes {
        let l = [2usize, 3, 4][i % 3];
        let n_theta = if l == 3 { 96 } else { config.numerics.n_theta };
        let cl = FieldContext::new(
            &eq,
            &f,
            FieldConfig::with_grid(config.numerics.n_r, n_theta),
        )?;
        let coeffs: Vec<f64> = (0..=4)
            .map(|m| (rng.gen::<f64>() * 2.0 - 1.0) * 0.04 / (1.0 + (m * m) as f64))
            .collect();
        let shape = ShapeCoeffs::new(l, coeffs)?;
        let g = 5.0 + 20.0 * rng.gen::<f64>();
        let tr = cl.assemble_phi(g, &shape)?;
        let dom = tr.dominant_family_coeff().max(1e-12);
        worst_ratio = worst_ratio.max(tr.leakage() / dom);
    }
    push(
        &mut out,
        CheckResult::from_bool(
            "Phi preserves the even, l-periodic family",
            worst_ratio <= 1e-7,
            format!("{n_shapes} random shapes, worst leakage ratio {worst_ratio:.2e}"),
        ),
    );
    Ok(out)
}

// ---------------------------------------------------------------------------
// continuation
// ---------------------------------------------------------------------------

pub fn continuation_checks(opts: SuiteOptions, config: &RunConfig) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let f = NutrientFn::Identity;
    let rcfg = config.radial_config();
    let eq = radial::find_ra(A_STAR, &f, &rcfg)?;
    let ctx = FieldContext::new(&eq, &f, FieldConfig::with_grid(32, 64))?;
    let table = SymbolTable::build(&eq, &f, 16, config.numerics.mode_grid)?;
    let ccfg = ContinuationConfig {
        k_trunc: 6,
        ..Default::default()
    };
    let point = spectrum::catalog(2, 1, &table)?[0].clone();

    let steps = if opts.fast { 4 } else { 6 };
    let branch = continuation::trace_branch(&ctx, &point, 0.02, steps, &ccfg)?;
    let base_res = branch.max_residual();

    // refined-grid revalidation of every accepted point
    let fine = FieldContext::new(&eq, &f, FieldConfig::with_grid(64, 128))?;
    let mut refined_res = 0.0f64;
    for p in &branch.points {
        refined_res = refined_res.max(fine.assemble_phi(p.g, &p.shape)?.sup());
    }
    push(
        &mut out,
        CheckResult::from_bool(
            "branch residuals hold on the solve grid and refined grid",
            branch.warning.is_none() && base_res <= 1e-8 && refined_res <= 1e-8,
            format!("solve {base_res:.2e}, refined {refined_res:.2e} (tol 1e-8)"),
        ),
    );

    let fit = continuation::fit_asymptotics(&branch)?;
    push(
        &mut out,
        CheckResult::from_bool(
            "branch extrapolates to its origin value",
            (fit.g_intercept - point.g).abs() <= 5e-3 * point.g,
            format!(
                "intercept {:.4} vs origin {:.4} (rel {:.2e})",
                fit.g_intercept,
                point.g,
                ((fit.g_intercept - point.g) / point.g).abs()
            ),
        ),
    );

    // opposite amplitudes are the same solution rotated by pi/l
    let minus = continuation::trace_branch(&ctx, &point, -0.01, 2, &ccfg)?;
    let plus = continuation::trace_branch(&ctx, &point, 0.01, 2, &ccfg)?;
    let (p, m) = (plus.points.last().unwrap(), minus.points.last().unwrap());
    let mut sym_ok = (p.g - m.g).abs() <= 1e-6 * p.g.abs();
    for (idx, (ap, am)) in p.shape.a.iter().zip(&m.shape.a).enumerate() {
        let expect = if idx % 2 == 0 { *ap } else { -*ap };
        if (am - expect).abs() > 1e-9 {
            sym_ok = false;
        }
    }
    push(
        &mut out,
        CheckResult::from_bool(
            "opposite branch sides agree up to the half-period rotation",
            sym_ok,
            format!("amplitudes +-0.01, G gap {:.2e}", (p.g - m.g).abs()),
        ),
    );

    // the second twofold branch at the default grid and truncation
    if !opts.fast {
        let ctx_full = FieldContext::new(&eq, &f, config.field_config())?;
        let ccfg_full = ContinuationConfig {
            k_trunc: config.numerics.k_trunc,
            ..Default::default()
        };
        let point4 = spectrum::catalog(2, 2, &table)?[1].clone();
        let b4 = continuation::trace_branch(&ctx_full, &point4, 0.01, 5, &ccfg_full)?;
        let fit4 = continuation::fit_asymptotics(&b4)?;
        push(
            &mut out,
            CheckResult::from_bool(
                "second branch consistent with its catalog value",
                b4.warning.is_none()
                    && b4.max_residual() <= 1e-8
                    && (fit4.g_intercept - point4.g).abs() <= 5e-3 * point4.g,
                format!(
                    "mode 4: residual {:.2e}, intercept {:.4} vs {:.4}",
                    b4.max_residual(),
                    fit4.g_intercept,
                    point4.g
                ),
            ),
        );
    }

    // local uniqueness midway between the first two catalog values
    let cat = spectrum::catalog(2, 2, &table)?;
    let mid = 0.5 * (cat[0].g + cat[1].g);
    let attempts = if opts.fast { 4 } else { 10 };
    let rep = continuation::non_bifurcation_probe(&ctx, &table, mid, 2, attempts, 2024, &ccfg)?;
    push(
        &mut out,
        CheckResult::from_bool(
            "perturbed solves return to the trivial shape off the catalog",
            rep.all_returned(),
            format!(
                "G = {mid:.3}: {}/{} returned, {} findings",
                rep.returned_to_zero,
                rep.attempts,
                rep.findings.len()
            ),
        ),
    );
    Ok(out)
}

/// The full suite (modules 1-7).
pub fn run_all(opts: SuiteOptions, config: &RunConfig) -> Result<Vec<CheckResult>> {
    let rcfg = config.radial_config();
    let mut all = Vec::new();
    all.extend(model_checks());
    all.extend(radial_checks(&rcfg));
    all.extend(mode_checks(opts, &rcfg)?);
    all.extend(spectrum_checks(&rcfg, config.numerics.k_max)?);
    all.extend(geometry_checks(opts));
    all.extend(field_checks(opts, config)?);
    all.extend(continuation_checks(opts, config)?);
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;

    // the cheap subsuites; the heavy ones run in the integration tests
    #[test]
    fn model_and_geometry_suites_pass() {
        for r in model_checks() {
            assert!(r.passed, "{}", r.line());
        }
        for r in geometry_checks(SuiteOptions { fast: true }) {
            assert!(r.passed, "{}", r.line());
        }
    }

    #[test]
    fn spectrum_suite_passes() {
        let cfg = RadialConfig::default();
        for r in spectrum_checks(&cfg, 32).unwrap() {
            assert!(r.passed, "{}", r.line());
        }
    }
}
