//! Acceptance suite. Runs without the libtest harness so every criterion
//! prints exactly one PASS/FAIL line; the process exits non-zero if any fails.

use std::process::ExitCode;

use formal_variational::battery::{self, random_diffpoly, random_laurent, random_linop, PolyShape};
use formal_variational::frontend::parse::{operator, poly, series};
use formal_variational::laurent::{integer, rational};
use formal_variational::linops::{
    linearize_at, residue_pairing, tangent_cohomology_dims, LinOp, Space,
};
use formal_variational::loopspace::{
    cross_integrability, euler_lagrange_identity_check, expand_on_loops, order2_integrand,
    symplectic_closedness_check, Window,
};
use formal_variational::varcalc::{
    helmholtz_check, is_variational, quadratic_action, vainberg_tonti,
};
use formal_variational::{DiffPoly, Error, JetMonomial, LaurentSeries, Verdict};
use rand::rngs::StdRng;
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion<'a> = (u32, &'static str, Box<dyn Fn() -> Outcome + 'a>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn window() -> Window {
    Window::new(-3, 12).expect("valid window")
}

fn symmetrize(l: &LinOp) -> LinOp {
    l.add(&l.adjoint()).scale(&rational(1, 2))
}

fn shape(max_order: u32, max_degree: u32, z: (i64, i64), max_terms: usize) -> PolyShape {
    PolyShape {
        max_order,
        max_degree,
        z_range: z,
        max_terms,
    }
}

fn criterion_1() -> Outcome {
    let mut rng = battery::rng(battery::DEFAULT_SEED);
    let n = 120;
    for k in 0..n {
        let e = random_diffpoly(&mut rng, PolyShape::default());
        let image = e.total_derivative().variational_derivative();
        ensure(image.is_zero(), || {
            format!("sample {k}: delta(d/dz ({e})) = {image}")
        })?;
    }
    Ok(format!("{n} samples"))
}

fn criterion_2() -> Outcome {
    let mut rng = battery::rng(battery::DEFAULT_SEED + 2);
    let n = 24;
    let mut indices = 0;
    for k in 0..n {
        let d = random_diffpoly(&mut rng, shape(2, 2, (-2, 2), 3));
        let report = euler_lagrange_identity_check(&d, &window())
            .map_err(|e| format!("sample {k} ({d}): {e}"))?;
        ensure(!report.checked.is_empty(), || {
            format!("sample {k} ({d}): no index in range")
        })?;
        ensure(report.pass, || {
            let bad = report
                .checked
                .iter()
                .find(|c| !c.pass)
                .expect("a failing index");
            format!(
                "sample {k} ({d}) at i={}: {} != {}",
                bad.i, bad.lhs, bad.rhs
            )
        })?;
        indices += report.checked.len();
    }
    Ok(format!("{n} equations, {indices} indices checked"))
}

/// The mixed battery shared by criteria 3 and 4.
struct Battery {
    variational: Vec<DiffPoly>,
    perturbed: Vec<DiffPoly>,
    linear: Vec<DiffPoly>,
}

impl Battery {
    fn all(&self) -> impl Iterator<Item = &DiffPoly> {
        self.variational
            .iter()
            .chain(&self.perturbed)
            .chain(&self.linear)
    }
}

fn perturbation(rng: &mut StdRng) -> DiffPoly {
    let c = integer(rng.gen_range(1..=3));
    let e = rng.gen_range(-1..=1);
    let mono = match rng.gen_range(0..3) {
        0 => JetMonomial::from_exponents([(1, 1), (0, rng.gen_range(1..=2))]),
        1 => JetMonomial::var(3),
        _ => JetMonomial::var(1),
    };
    DiffPoly::term(c, e, mono)
}

fn build_battery() -> Battery {
    let mut rng = battery::rng(battery::DEFAULT_SEED + 3);
    let action_shape = shape(1, 3, (-1, 1), 3);
    let action = |rng: &mut StdRng| {
        let a = random_diffpoly(rng, action_shape);
        // a term linear in y'' keeps the battery from sitting entirely at order 2
        let x2 = DiffPoly::term(
            integer(rng.gen_range(1..=2)),
            rng.gen_range(0..=1),
            JetMonomial::from_exponents([(0, 1), (2, 1)]),
        );
        &a + &x2
    };
    let mut variational = Vec::new();
    while variational.len() < 12 {
        let d = action(&mut rng).variational_derivative();
        if !d.is_zero() && d.order().unwrap_or(0) <= 3 {
            variational.push(d);
        }
    }
    let mut perturbed = Vec::new();
    while perturbed.len() < 12 {
        let d = &action(&mut rng).variational_derivative() + &perturbation(&mut rng);
        if d.order().unwrap_or(0) <= 3 && !helmholtz_check(&d).passed {
            perturbed.push(d);
        }
    }
    let mut linear = Vec::new();
    while linear.len() < 12 {
        let l = random_linop(&mut rng, 3, (-2, 2));
        let l = if linear.len() % 2 == 0 {
            symmetrize(&l)
        } else {
            l
        };
        if !l.is_zero() {
            linear.push(l.to_diffpoly().expect("exact coefficients"));
        }
    }
    Battery {
        variational,
        perturbed,
        linear,
    }
}

fn criterion_3(b: &Battery) -> Outcome {
    let mut disagreements = Vec::new();
    let (mut passing, mut pairs) = (0, 0);
    for d in b.all() {
        let helmholtz = helmholtz_check(d).passed;
        let closed = symplectic_closedness_check(d, &window()).map_err(|e| format!("{d}: {e}"))?;
        ensure(closed.checked_pairs > 0, || {
            format!("{d}: no pair in range")
        })?;
        pairs += closed.checked_pairs;
        passing += usize::from(helmholtz);
        if helmholtz != closed.pass {
            disagreements.push(format!(
                "{d} (helmholtz {helmholtz}, closed {})",
                closed.pass
            ));
        }
    }
    ensure(disagreements.is_empty(), || {
        format!("disagreements: {}", disagreements.join("; "))
    })?;
    let total = b.variational.len() + b.perturbed.len() + b.linear.len();
    Ok(format!(
        "{total} equations ({passing} variational), {pairs} pairs checked, 0 disagreements"
    ))
}

fn criterion_4(b: &Battery) -> Outcome {
    let mut count = 0;
    for d in b.all() {
        let verdict = is_variational(d).map_err(|e| format!("{d}: {e}"))?;
        if !verdict.helmholtz.passed {
            continue;
        }
        let lagrangian = vainberg_tonti(d).lagrangian;
        ensure(lagrangian.variational_derivative() == *d, || {
            format!("{d}: reconstructed {lagrangian} does not vary back")
        })?;
        count += 1;
    }
    ensure(count >= 10, || {
        format!("only {count} Helmholtz-passing equations")
    })?;
    Ok(format!("{count} Lagrangians reconstructed"))
}

fn criterion_5() -> Outcome {
    let mut rng = battery::rng(battery::DEFAULT_SEED + 5);
    let n = 120;
    for k in 0..n {
        let l = random_linop(&mut rng, 4, (-3, 3));
        let m = random_linop(&mut rng, 4, (-3, 3));
        let f = random_laurent(&mut rng, (-4, 4), 4);
        let g = random_laurent(&mut rng, (-4, 4), 4);
        let lhs = residue_pairing(&l.apply(&f).map_err(|e| e.to_string())?, &g);
        let rhs = residue_pairing(&f, &l.adjoint().apply(&g).map_err(|e| e.to_string())?);
        let (lhs, rhs) = (
            lhs.map_err(|e| e.to_string())?,
            rhs.map_err(|e| e.to_string())?,
        );
        ensure(lhs == rhs, || {
            format!("sample {k}: <Lf,g> = {lhs} but <f,L*g> = {rhs} for L = {l}")
        })?;
        ensure(l.adjoint().adjoint() == l, || {
            format!("sample {k}: L** != L for {l}")
        })?;
        ensure(
            l.compose(&m).adjoint() == m.adjoint().compose(&l.adjoint()),
            || format!("sample {k}: (LM)* != M*L* for L = {l}, M = {m}"),
        )?;
    }
    Ok(format!("{n} triples"))
}

fn criterion_6() -> Outcome {
    let mut rng = battery::rng(battery::DEFAULT_SEED + 6);
    let mut choices = vec![series("1 + z^3")];
    choices.extend((0..2).map(|_| random_laurent(&mut rng, (-2, 3), 3)));
    for a in &choices {
        let c = random_laurent(&mut rng, (-2, 2), 2);
        let a1 = a.ddz();
        let good = LinOp::new(vec![c.clone(), a1.clone(), a.clone()]);
        let bad = LinOp::new(vec![c, &a1 + &LaurentSeries::z_pow(1), a.clone()]);
        ensure(good.is_self_adjoint(), || {
            format!("{good} should be self-adjoint")
        })?;
        ensure(!bad.is_self_adjoint(), || {
            format!("{bad} should not be self-adjoint")
        })?;
    }
    Ok(format!("{} choices of a", choices.len()))
}

fn criterion_7() -> Outcome {
    let l = operator("z; z^2");
    ensure(l.adjoint() == l.neg(), || {
        format!("adjoint is {}", l.adjoint())
    })?;
    let d = l.to_diffpoly().map_err(|e| e.to_string())?;
    ensure(!helmholtz_check(&d).passed, || {
        format!("helmholtz passed for {d}")
    })?;
    let closed = symplectic_closedness_check(&d, &window()).map_err(|e| e.to_string())?;
    ensure(!closed.pass, || format!("closedness passed for {d}"))?;
    let v = closed.violation.expect("violation recorded");
    Ok(format!(
        "adjoint = -L; first violation at ({}, {})",
        v.i, v.j
    ))
}

fn criterion_8() -> Outcome {
    let d = poly("z*y' + y'^2 - y");
    let mut jumps = Vec::new();
    for t in -2i64..=2 {
        let gamma = LaurentSeries::new(vec![(1, integer(t)), (0, integer(t * t))]);
        let lin = linearize_at(&d, &gamma).map_err(|e| e.to_string())?;
        ensure(lin.at_solution == Verdict::Holds, || {
            format!("gamma_{t} is not a solution")
        })?;
        let dims =
            tangent_cohomology_dims(&lin.operator, Space::Disc, 16).map_err(|e| e.to_string())?;
        ensure(dims.stabilized, || format!("t = {t} did not stabilize"))?;
        let expected = match t {
            0 => Some((1, 1)),
            1 | -2 => Some((1, 0)),
            _ => None,
        };
        if let Some(want) = expected {
            ensure((dims.h0, dims.h1) == want, || {
                format!("t = {t}: got ({}, {})", dims.h0, dims.h1)
            })?;
        }
        if dims.h1 > 0 {
            jumps.push(t);
        }
    }
    // F(u) = u^2 has F'(t) = 2t
    ensure(jumps == [0], || format!("cokernel nonzero at {jumps:?}"))?;
    Ok("cokernel nonzero only at t = 0".into())
}

fn criterion_9() -> Outcome {
    let d = poly("y'^2 - 4*y");
    for lambda in [0i64, 1, -1, 2] {
        let gamma = LaurentSeries::new(vec![
            (2, integer(1)),
            (1, integer(2 * lambda)),
            (0, integer(lambda * lambda)),
        ]);
        let lin = linearize_at(&d, &gamma).map_err(|e| e.to_string())?;
        ensure(lin.at_solution == Verdict::Holds, || {
            format!("lambda = {lambda} is not a solution")
        })?;
        let dims =
            tangent_cohomology_dims(&lin.operator, Space::Disc, 16).map_err(|e| e.to_string())?;
        let want = if lambda == 0 { (1, 1) } else { (1, 0) };
        ensure((dims.h0, dims.h1) == want && dims.stabilized, || {
            format!(
                "lambda = {lambda}: ({}, {}), stabilized {}",
                dims.h0, dims.h1, dims.stabilized
            )
        })?;
    }
    Ok("jump at lambda = 0 only".into())
}

fn criterion_10() -> Outcome {
    let mut rng = battery::rng(battery::DEFAULT_SEED + 10);
    let mut n = 0;
    for _ in 0..20 {
        let l = symmetrize(&random_linop(&mut rng, 4, (-2, 2)));
        let action = quadratic_action(&l).map_err(|e| e.to_string())?;
        let d = l.to_diffpoly().map_err(|e| e.to_string())?;
        ensure(action.variational_derivative() == d, || {
            format!("delta of the action of {l} differs")
        })?;
        n += 1;
    }
    let skew = operator("z; z^2");
    let action = quadratic_action(&skew).map_err(|e| e.to_string())?;
    ensure(
        action.variational_derivative() != skew.to_diffpoly().map_err(|e| e.to_string())?,
        || "non-self-adjoint instance matched".into(),
    )?;
    Ok(format!("{n} self-adjoint operators, 1 non-self-adjoint"))
}

fn criterion_11() -> Outcome {
    let mut rng = battery::rng(battery::DEFAULT_SEED + 11);
    let n = 30;
    let mut self_adjoint = 0;
    for k in 0..n {
        let l = random_linop(&mut rng, 4, (-3, 3));
        let l = if k % 2 == 0 { symmetrize(&l) } else { l };
        let d = l.to_diffpoly().map_err(|e| e.to_string())?;
        let sa = LinOp::from_linear(&d)
            .map_err(|e| e.to_string())?
            .is_self_adjoint();
        ensure(helmholtz_check(&d).passed == sa, || {
            format!("disagreement on {d}")
        })?;
        self_adjoint += usize::from(sa);
    }
    Ok(format!("{n} equations, {self_adjoint} self-adjoint"))
}

fn criterion_12() -> Outcome {
    let mut rng = battery::rng(battery::DEFAULT_SEED + 12);
    let (mut equations, mut pairs) = (0, 0);
    while equations < 12 {
        let base = random_diffpoly(&mut rng, shape(2, 2, (-2, 2), 3));
        let d = &base + &DiffPoly::term(integer(1), rng.gen_range(-1..=2), JetMonomial::var(2));
        if d.order() != Some(2) {
            continue;
        }
        equations += 1;
        let mut here = 0;
        for i in -2i64..=3 {
            for j in (i + 1)..=4 {
                let integrand = order2_integrand(&d, i, j).map_err(|e| e.to_string())?;
                let lhs = match expand_on_loops(&integrand, &window()).and_then(|x| x.coeff(-1)) {
                    Ok(c) => c,
                    Err(Error::OutsideExactRange { .. }) => continue,
                    Err(e) => return Err(e.to_string()),
                };
                let rhs = match cross_integrability(&d, i, j, &window()) {
                    Ok(c) => c,
                    Err(Error::OutsideExactRange { .. }) => continue,
                    Err(e) => return Err(e.to_string()),
                };
                ensure(lhs == rhs, || format!("{d} at ({i}, {j}): {lhs} != {rhs}"))?;
                here += 1;
            }
        }
        ensure(here > 0, || format!("{d}: no pair in range"))?;
        pairs += here;
    }
    Ok(format!("{equations} equations, {pairs} pairs"))
}

fn main() -> ExitCode {
    let battery = build_battery();
    let criteria: Vec<Criterion> = vec![
        (
            1,
            "variational derivative kills total derivatives",
            Box::new(criterion_1),
        ),
        (2, "Euler-Lagrange identity on loops", Box::new(criterion_2)),
        (
            3,
            "Helmholtz iff symplectic closedness",
            Box::new(|| criterion_3(&battery)),
        ),
        (
            4,
            "Vainberg-Tonti reconstruction",
            Box::new(|| criterion_4(&battery)),
        ),
        (5, "residue adjointness", Box::new(criterion_5)),
        (6, "self-adjoint iff b = a'", Box::new(criterion_6)),
        (7, "skew operator z^2 d + z", Box::new(criterion_7)),
        (8, "Clairaut tangent cohomology", Box::new(criterion_8)),
        (9, "(y')^2 = 4y cohomology jump", Box::new(criterion_9)),
        (10, "quadratic action", Box::new(criterion_10)),
        (
            11,
            "linear Helmholtz iff self-adjoint",
            Box::new(criterion_11),
        ),
        (12, "order-2 integrand", Box::new(criterion_12)),
    ];
    let mut failed = 0;
    for (n, name, check) in &criteria {
        match check() {
            Ok(detail) => println!("criterion {n:>2} PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {name}: {detail}");
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
