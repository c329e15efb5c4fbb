//! Invariant suite behind `sphere-mt check`.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sphere_mt::conformal::{bubble_pair, green_two_pole, green_two_pole_at, max_resolvable_t};
use sphere_mt::functional::{moments_of, Functional, Normalization};
use sphere_mt::{build_grid, mobius_factor, Field, Grid, MobiusMap, Spectrum, Transform};

use crate::error::CliResult;

pub struct CheckRow {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckRow {
    fn below(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            tolerance,
            pass: measured < tolerance,
        }
    }
}

fn coordinate_checks(grid: &Arc<Grid>, rows: &mut Vec<CheckRow>) -> CliResult<()> {
    let ones = Field::constant(Arc::clone(grid), 1.0);
    let area = ones.integrate();
    rows.push(CheckRow::below("total weight = 4π (rel)", (area - 4.0 * PI).abs() / (4.0 * PI), 1e-12));
    let xs: Vec<Field> = (0..3).map(|i| Field::coordinate(Arc::clone(grid), i)).collect();
    let first = xs.iter().map(|x| x.integrate().abs()).fold(0.0, f64::max);
    rows.push(CheckRow::below("∫x_i = 0", first, 1e-13));
    let mut second = 0.0f64;
    for (i, xi) in xs.iter().enumerate() {
        for (j, xj) in xs.iter().enumerate() {
            let expect = if i == j { 4.0 * PI / 3.0 } else { 0.0 };
            second = second.max((xi.inner(xj)? - expect).abs() / (4.0 * PI / 3.0));
        }
    }
    rows.push(CheckRow::below("∫x_i x_j = (4π/3)δ_ij (rel)", second, 1e-10));
    Ok(())
}

fn transform_checks(tr: &Transform<f64>, seed: u64, rows: &mut Vec<CheckRow>) -> CliResult<()> {
    let l_max = tr.l_max();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || {
        let mut s = Spectrum::zeros(l_max);
        for c in s.coeffs_mut() {
            *c = rng.gen_range(-1.0..1.0);
        }
        s
    };
    let (a, b) = (draw(), draw());
    let fa = tr.synthesize(&a)?;
    let fb = tr.synthesize(&b)?;

    let rt = tr.analyze(&fa)?.add_scaled(&a, -1.0).max_abs();
    rows.push(CheckRow::below(format!("round trip at L = {l_max}"), rt, 1e-10));

    let norm2 = fa.inner(&fa)?;
    let parseval = (norm2 - a.dot(&a)).abs() / norm2;
    rows.push(CheckRow::below("Parseval (rel)", parseval, 1e-10));

    let lap_a = tr.laplacian_field(&fa)?;
    let lap_b = tr.laplacian_field(&fb)?;
    let green = (fa.inner(&lap_b)? - fb.inner(&lap_a)?).abs();
    rows.push(CheckRow::below("Green identity ∫f Δg = ∫g Δf", green, 1e-9));

    let energy = a.dirichlet_energy();
    let pairing = -fa.inner(&lap_a)?;
    rows.push(CheckRow::below(
        "Dirichlet energy = −∫f Δf (rel)",
        (energy - pairing).abs() / energy.max(1.0),
        1e-9,
    ));
    Ok(())
}

fn conformal_checks(grid: &Arc<Grid>, rows: &mut Vec<CheckRow>) -> CliResult<()> {
    let max_t = max_resolvable_t(grid);
    let tr = Transform::for_grid(Arc::clone(grid));
    let functional = Functional::for_grid(Arc::clone(grid));
    // the tight tolerances need at least four rings across the bubble core
    let core_t = grid.n_theta() as f64 / 8.0;
    let (mut area, mut curv, mut onofri) = (0.0f64, 0.0f64, 0.0f64);
    for t in [1.0, 2.0, 3.0, 4.0, 5.0, 8.0].into_iter().filter(|&t| t <= core_t) {
        let w = mobius_factor(&MobiusMap::north(t)?, grid)?;
        let e = w.exp2()?;
        area = area.max((e.integrate() - 4.0 * PI).abs() / (4.0 * PI));
        let lap = tr.laplacian_field(&w)?;
        curv = curv.max(lap.zip_map(&e, |l, e| -l + 1.0 - e)?.max_abs());
        onofri = onofri.max(functional.evaluate(&w, None, None)?.onofri_j.abs());
    }
    rows.push(CheckRow::below("conformal area ∫e^{2w_t} = 4π (rel)", area, 1e-8));
    rows.push(CheckRow::below("curvature equation −Δw_t + 1 = e^{2w_t}", curv, 1e-5));
    rows.push(CheckRow::below("Onofri equality on conformal factors", onofri, 1e-6));

    let mut moment = 0.0f64;
    for t in [2.0, 5.0, 10.0].into_iter().filter(|&t| t <= max_t) {
        let pair = bubble_pair(t, grid)?;
        moment = moments_of(&pair.field.exp2()?)
            .iter()
            .fold(moment, |m, v| m.max(v.abs()));
    }
    rows.push(CheckRow::below("bubble-pair moments", moment, 1e-10));
    Ok(())
}

fn green_checks(rows: &mut Vec<CheckRow>) -> CliResult<()> {
    // log singularities at the poles: the mean needs many rings, which is
    // cheap because G is axisymmetric
    let mean = green_two_pole(&build_grid::<f64>(24576, 4)?).average();
    rows.push(CheckRow::below("Green mean (refined rings)", mean.abs(), 1e-8));
    let eq = green_two_pole_at(PI / 2.0);
    rows.push(CheckRow::below(
        "G(π/2) = −4(1 − ln 2)",
        (eq + 4.0 * (1.0 - 2f64.ln())).abs(),
        1e-9,
    ));
    let h = 1e-3;
    let mut lap_err = 0.0f64;
    for th in [PI / 3.0, PI / 2.0, 2.0 * PI / 3.0] {
        let (gm, g0, gp) = (green_two_pole_at(th - h), green_two_pole_at(th), green_two_pole_at(th + h));
        let lap = (gp - 2.0 * g0 + gm) / (h * h) + (gp - gm) / (2.0 * h) / th.tan();
        lap_err = lap_err.max((lap - 4.0).abs());
    }
    rows.push(CheckRow::below("−ΔG = −4 away from the poles", lap_err, 1e-4));
    Ok(())
}

fn field_checks(u: &Field, rows: &mut Vec<CheckRow>) -> CliResult<()> {
    let f = Functional::for_grid(Arc::clone(u.grid()));
    let rep = f.evaluate(u, None, None)?;
    rows.push(CheckRow {
        name: "field: Onofri J ≥ −1e-6".into(),
        measured: rep.onofri_j,
        tolerance: -1e-6,
        pass: rep.onofri_j >= -1e-6,
    });
    let shifted = f.evaluate(&u.shifted(1.0), None, None)?;
    rows.push(CheckRow::below(
        "field: shift invariance",
        (shifted.shifted_i - rep.shifted_i).abs(),
        1e-10,
    ));
    let r = f.el_residual(u, 0.0, Normalization::U)?;
    rows.push(CheckRow::below("field: residual integrates to 0", r.residual_integral.abs(), 1e-9));
    Ok(())
}

/// Runs every check. Precondition errors (grid too small, degree above the
/// anti-aliasing bound) abort with an error; failed invariants are rows.
pub fn run(grid: &Arc<Grid>, l_max: usize, seed: u64, field: Option<&Field>) -> CliResult<Vec<CheckRow>> {
    let tr = Transform::new(Arc::clone(grid), l_max)?;
    let mut rows = Vec::new();
    coordinate_checks(grid, &mut rows)?;
    transform_checks(&tr, seed, &mut rows)?;
    conformal_checks(grid, &mut rows)?;
    green_checks(&mut rows)?;
    if let Some(u) = field {
        field_checks(u, &mut rows)?;
    }
    Ok(rows)
}

pub fn table(rows: &[CheckRow]) -> String {
    let width = rows.iter().map(|r| r.name.chars().count()).max().unwrap_or(0);
    let mut out = String::new();
    for r in rows {
        let pad = width - r.name.chars().count();
        out.push_str(&format!(
            "{}  {}{}  {:>10.3e}  (tol {:.0e})\n",
            if r.pass { "PASS" } else { "FAIL" },
            r.name,
            " ".repeat(pad),
            r.measured,
            r.tolerance
        ));
    }
    out
}
