//! The verification suites behind the CLI subcommand flags. Each suite turns
//! module-level residuals into Check records with pinned bounds.

use uqtwo::algebra::{self, hopf_axiom_residuals, monomials_up_to_degree, AlgebraElement, Gen, Monomial};
use uqtwo::dd::Cdd;
use uqtwo::dirac;
use uqtwo::fixedpt::{self, RecurrenceSolution};
use uqtwo::growth::{self, GammaIndex};
use uqtwo::heis::{self, HeisWindow};
use uqtwo::nctorus::{self, TorusElement};
use uqtwo::pw::{self, TruncationWindow};
use uqtwo::report::{Check, SuiteReport};
use uqtwo::QParam;

use crate::RunConfig;

pub const SUITES: [&str; 7] = ["algebra", "pw", "heis", "dirac", "fixedpt", "torus-index", "specdim"];

pub fn run_suite(name: &str, cfg: &RunConfig) -> SuiteReport {
    let qp = QParam::new(cfg.q_abs, cfg.theta).expect("config validated before dispatch");
    match name {
        "algebra" => algebra_suite(&qp, cfg),
        "pw" => pw_suite(&qp, cfg),
        "heis" => heis_suite(&qp, cfg),
        "dirac" => dirac_suite(&qp, cfg),
        "fixedpt" => fixedpt_suite(&qp, cfg),
        "torus-index" => torus_index_suite(&qp, cfg),
        "specdim" => specdim_suite(&qp, cfg),
        other => SuiteReport::new(other, vec![Check::is_true("known-suite", false)]),
    }
}

fn algebra_suite(qp: &QParam, cfg: &RunConfig) -> SuiteReport {
    let mut checks = Vec::new();
    // relation closure on generator pairs
    let mut worst = 0.0f64;
    for rel in pw::defining_relations(qp) {
        let mut acc = AlgebraElement::zero();
        for (coeff, word) in &rel.terms {
            let mut e = AlgebraElement::unit();
            for g in word {
                e = e.mul(&AlgebraElement::generator(*g), qp);
            }
            acc = acc.add(&e.scale_c64(*coeff));
        }
        acc = acc.sub(&AlgebraElement::unit().scale_c64(rel.rhs_unit));
        worst = worst.max(acc.max_coeff_abs());
    }
    checks.push(Check::below("relation-closure", worst, 1e-14));

    // generator-action identity across the full lattice
    let l2max = cfg.l2_max.min(6);
    let mut worst = 0.0f64;
    for l2 in 0..=l2max {
        for i2 in (-(l2 as i32)..=l2 as i32).step_by(2) {
            for j2 in (-(l2 as i32)..=l2 as i32).step_by(2) {
                for k in -3..=3 {
                    for g in Gen::ALL {
                        worst = worst.max(algebra::verify_action(qp, l2, i2, j2, k, g).unwrap());
                    }
                }
            }
        }
    }
    checks.push(Check::below("action-identity", worst, cfg.tol.min(1e-9)));

    // little-q-Jacobi sector forms
    let mut worst = 0.0f64;
    for l2 in 0..=l2max {
        for i2 in (-(l2 as i32)..=l2 as i32).step_by(2) {
            for j2 in (-(l2 as i32)..=l2 as i32).step_by(2) {
                let lhs = algebra::matrix_coefficient(qp, l2, i2, j2, 1).unwrap();
                let rhs = algebra::jacobi_sector_form(qp, l2, i2, j2, 1).unwrap();
                worst = worst.max(lhs.sub(&rhs).max_coeff_abs());
            }
        }
    }
    checks.push(Check::below("jacobi-sectors", worst, 1e-10));

    // Hopf axioms on monomials of degree <= 4
    let hopf = hopf_axiom_residuals(qp, 4);
    checks.push(Check::below("coassociativity", hopf.coassociativity, 1e-10));
    checks.push(Check::below("counit-law", hopf.counit_law, 1e-10));
    checks.push(Check::below("antipode-law", hopf.antipode_law, 1e-10));

    // canonical normal form: multiplying by the unit is coefficient-exact
    let x = algebra::matrix_coefficient(qp, l2max.min(4), 0, 0, 2).unwrap();
    let same = x.mul(&AlgebraElement::unit(), qp).sub(&x).max_coeff_abs();
    checks.push(Check::exactly("normal-form-canonical", same, 0.0));

    SuiteReport::new("algebra", checks)
}

fn pw_suite(qp: &QParam, cfg: &RunConfig) -> SuiteReport {
    let w = TruncationWindow::new(cfg.l2_max, cfg.k_min, cfg.k_max);
    let mut checks = Vec::new();
    let rep = pw::verify_relations_pw(qp, &w);
    for (name, r) in &rep.residuals {
        checks.push(Check::below(format!("relation {name}"), *r, cfg.tol));
    }
    // adjointness of b* against b on the interior
    let b = pw::build_operator(qp, Gen::B, &w);
    let bstar = pw::build_operator(qp, Gen::BStar, &w);
    let badj = b.adjoint();
    let mut worst = 0.0f64;
    for idx in w.iter().filter(|i| w.is_interior(*i)) {
        let mut col: std::collections::BTreeMap<_, _> = badj.column(&idx).iter().copied().collect();
        for (dst, c) in bstar.column(&idx) {
            *col.entry(*dst).or_insert(num_complex::Complex64::new(0.0, 0.0)) -= c;
        }
        for (dst, c) in col {
            if w.is_interior(dst) {
                worst = worst.max(c.norm());
            }
        }
    }
    checks.push(Check::below("bstar-adjoint-of-b", worst, 1e-12));

    // coefficient bounds and isometry identity on the lattice
    let mut alpha_low = f64::INFINITY;
    let mut alpha_high = 0.0f64;
    let mut iso = 0.0f64;
    for l2 in 0..=20u32 {
        for i2 in (-(l2 as i32)..=l2 as i32).step_by(2) {
            for j2 in (-(l2 as i32)..=l2 as i32).step_by(2) {
                let a = pw::action_coefficients(qp, Gen::A, l2, i2, j2)[0].1.norm();
                alpha_low = alpha_low.min(a);
                alpha_high = alpha_high.max(a);
                let s: f64 = pw::action_coefficients(qp, Gen::AStar, l2, i2, j2)
                    .iter()
                    .chain(pw::action_coefficients(qp, Gen::BStar, l2, i2, j2).iter())
                    .map(|(_, c)| c.norm_sqr())
                    .sum();
                iso = iso.max((s - 1.0).abs());
            }
        }
    }
    checks.push(Check::at_least("alpha-plus-lower", alpha_low, 1.0 - qp.abs_q * qp.abs_q - 1e-14));
    checks.push(Check::at_or_below("alpha-plus-upper", alpha_high, 1.0 + 1e-14));
    checks.push(Check::below("isometry-columns", iso, 1e-12));

    // composition consistency of the tridiagonal data
    let mut worst = 0.0f64;
    for (i2, j2) in [(0, 0), (1, -1), (-2, 2)] {
        let data = pw::bbstar_tridiagonal(qp, i2, j2, 12);
        let w2 = i2.abs().max(j2.abs()) as u32;
        for m in 0..12usize {
            let l2 = w2 + 2 * m as u32;
            let mut up = num_complex::Complex64::new(0.0, 0.0);
            let mut diag = num_complex::Complex64::new(0.0, 0.0);
            for (s1, c1) in pw::action_coefficients(qp, Gen::BStar, l2, i2, j2) {
                let nl2 = (l2 as i32 + s1.dl2) as u32;
                for (s2, c2) in pw::action_coefficients(qp, Gen::B, nl2, i2 + s1.di2, j2 + s1.dj2) {
                    match s1.dl2 + s2.dl2 {
                        2 => up += c1 * c2,
                        0 => diag += c1 * c2,
                        _ => {}
                    }
                }
            }
            worst = worst.max((up - data.sub[m]).norm()).max((diag - data.diag[m]).norm());
        }
    }
    checks.push(Check::below("bbstar-composition", worst, 1e-11));

    // D columns are unit vectors away from the k-truncation edge
    let d = pw::build_operator(qp, Gen::D, &w);
    let mut worst = 0.0f64;
    for idx in w.iter().filter(|i| i.k > w.k_min) {
        let n: f64 = d.column(&idx).iter().map(|(_, c)| c.norm_sqr()).sum();
        worst = worst.max((n.sqrt() - 1.0).abs());
    }
    checks.push(Check::below("d-columns-unimodular", worst, 1e-14));

    SuiteReport::new("pw", checks)
}

fn heis_suite(qp: &QParam, cfg: &RunConfig) -> SuiteReport {
    let w = HeisWindow::new(cfg.n_max, -(cfg.heis_kl as i32), cfg.heis_kl as i32, -(cfg.heis_kl as i32), cfg.heis_kl as i32);
    let mut checks = Vec::new();
    for (name, r) in heis::relation_residuals_heis(qp, &w) {
        checks.push(Check::below(format!("relation {name}"), r, 1e-13));
    }
    checks.push(Check::below(
        "bbstar-diagonal",
        heis::bbstar_offdiagonal_residual(qp, &HeisWindow::new(cfg.n_max.min(12), -4, 4, -4, 4)),
        1e-14,
    ));
    let spec = heis::spectrum_bbstar_heis(qp, &w);
    checks.push(Check::exactly("bbstar-top-eigenvalue", spec[0], 1.0));
    // tail norms of a - a0 decrease geometrically to zero
    let mut ratios_ok = true;
    let mut prev = heis::compact_difference_profile(qp, 0);
    for n0 in 1..=24 {
        let v = heis::compact_difference_profile(qp, n0);
        if v >= prev {
            ratios_ok = false;
        }
        prev = v;
    }
    checks.push(Check::is_true("compact-profile-decreasing", ratios_ok));
    checks.push(Check::below("compact-profile-tail", heis::compact_difference_profile(qp, 20), 1e-12));
    let (_, _, rep) = heis::torus_generators_on_p(qp, &w);
    checks.push(Check::below("torus-rotation-on-P", rep.rotation_residual, 1e-14));
    checks.push(Check::below("torus-unitarity-on-P", rep.unitarity_residual, 1e-14));
    checks.push(Check::below("PbbP-is-P", rep.pbbp_residual, 1e-14));
    SuiteReport::new("heis", checks)
}

fn dirac_suite(qp: &QParam, cfg: &RunConfig) -> SuiteReport {
    let mut checks = Vec::new();
    // counting bounds, 4 <= n <= 32, exact integer comparisons
    let mut bounds_ok = true;
    for n in 4..=32u64 {
        let c = dirac::eigenvalue_count(n as f64);
        bounds_ok &= c >= dirac::count_lower_bound(n) && c <= dirac::count_upper_bound(n);
    }
    checks.push(Check::is_true("count-bounds-4-32", bounds_ok));
    checks.push(Check::int_equal("count-at-1", dirac::eigenvalue_count(1.0) as i64, 1));
    let slope = dirac::slope_over(12, 32, |x| dirac::eigenvalue_count(x));
    checks.push(Check::at_least("slope-lower", slope, 3.7));
    checks.push(Check::at_or_below("slope-upper", slope, 4.3));
    checks.push(Check::below("slope-k0-near-3", (dirac::summability_slope_k0(32) - 3.0).abs(), 0.3));

    // commutator norms: [T,D] = 1 exactly; stabilization 10 -> 14 below 1%
    let w10 = TruncationWindow::new(10, cfg.k_min, cfg.k_max);
    let w14 = TruncationWindow::new(14, cfg.k_min, cfg.k_max);
    let nd = dirac::commutator_norm(qp, Gen::D, &w10);
    checks.push(Check::below("commutator-D-is-1", (nd - 1.0).abs(), 1e-13));
    for g in Gen::ALL {
        let n10 = dirac::commutator_norm(qp, g, &w10);
        let n14 = dirac::commutator_norm(qp, g, &w14);
        checks.push(Check::at_or_below(format!("commutator-growth {g:?}"), n14 / n10 - 1.0, 0.01));
        checks.push(Check::at_or_below(format!("commutator-cap {g:?}"), n14, dirac::commutator_norm_cap(qp, g) + 1e-12));
    }

    // equivariance: 100 seeded j-mixers exactly commute; l-shift control >= 1
    let w = TruncationWindow::new(8, -4, 4);
    let eq = dirac::check_equivariance(qp, &w, 100, cfg.seed);
    checks.push(Check::below("equivariance-mixers", eq.mixer_residual, 1e-14));
    checks.push(Check::at_least("equivariance-control", eq.negative_control, 1.0));

    // non-degeneracy witnesses on the degree <= 2 monomial family
    let mut min_witness = f64::INFINITY;
    let mut count = 0;
    for mono in monomials_up_to_degree(2) {
        if mono == Monomial::UNIT {
            continue;
        }
        min_witness = min_witness.min(dirac::nondegeneracy_witness(qp, &AlgebraElement::from_monomial(mono, Cdd::ONE)));
        count += 1;
    }
    checks.push(Check::is_true("witness-family-size", count >= 20));
    checks.push(Check::at_least("witness-nonscalar", min_witness, 1e-6));
    checks.push(Check::exactly("witness-scalar", dirac::nondegeneracy_witness(qp, &AlgebraElement::unit()), 0.0));

    // even triple and resolvent bounds
    let (_, rep) = dirac::assemble_even_triple(&w10);
    checks.push(Check::exactly("triple-anticommutator", rep.anticommutator, 0.0));
    checks.push(Check::exactly("triple-grading", rep.grading_commutes, 0.0));
    checks.push(Check::below("triple-square", rep.square_matches_norms, 1e-9));
    let res = dirac::resolvent_decay(&w10, &[1.0, 0.5, 0.25]);
    checks.push(Check::at_or_below("resolvent-base-bound", res.base_bound_violation, 0.0));
    checks.push(Check::at_or_below("resolvent-upper-tail", res.upper_tail_violation, 0.0));
    checks.push(Check::at_or_below("resolvent-lower-tail", res.lower_tail_violation, 0.0));
    checks.push(Check::int_equal("resolvent-count-eps1", res.counts[0].1 as i64, 1));

    SuiteReport::new("dirac", checks)
}

fn fixedpt_suite(qp: &QParam, cfg: &RunConfig) -> SuiteReport {
    let mut checks = Vec::new();
    checks.push(Check::below(
        "closed-form-recurrence",
        fixedpt::closed_form_recurrence_residual(qp, 30),
        1e-11,
    ));
    let mut ups = 0.0f64;
    for m in 1..=30u32 {
        ups = ups.max((fixedpt::upsilon1(qp, m - 1) - fixedpt::upsilon_m1(qp, m)).abs());
    }
    checks.push(Check::below("upsilon-symmetry", ups, 1e-13));

    // truncated eigenvector at eigenvalue 1 vs the closed form
    let v = fixedpt::block_eigenvector(qp, 0, 0, 60, 1.0);
    let mut cf: Vec<f64> = (0..=60u32).map(|m| fixedpt::closed_form_c(qp, m)).collect();
    let n: f64 = cf.iter().map(|x| x * x).sum::<f64>().sqrt();
    cf.iter_mut().for_each(|x| *x /= n);
    let overlap: f64 = v.iter().zip(cf.iter()).map(|(a, b)| (a.conj() * b).re).sum();
    checks.push(Check::below("eigvec-closed-form-overlap", 1.0 - overlap.abs(), 1e-9));
    let e30 = *fixedpt::block_eigenvalues(qp, 0, 0, 30).last().unwrap();
    let e60 = *fixedpt::block_eigenvalues(qp, 0, 0, 60).last().unwrap();
    checks.push(Check::below("top-eigenvalue-truncation", (e30 - e60).abs(), 1e-10));
    checks.push(Check::below("top-eigenvalue-is-1", (e60 - 1.0).abs(), 1e-9));

    // spectrum matches {|q|^{2n}} within 1e-9 for the well-converged levels
    let evals = fixedpt::block_eigenvalues(qp, 0, 0, cfg.m_max);
    let mut spectrum_err = 0.0f64;
    for n in 0..=2u32 {
        let t = qp.abs_q.powi(2 * n as i32);
        let nearest = evals.iter().map(|e| (e - t).abs()).fold(f64::INFINITY, f64::min);
        spectrum_err = spectrum_err.max(nearest);
    }
    checks.push(Check::below("block-spectrum-low-levels", spectrum_err, 1e-9));

    let omega = fixedpt::omega_detect(qp, 12, cfg.m_max, 1e-6);
    checks.push(Check::is_true("omega-contains-0", omega.levels.contains(&0)));
    checks.push(Check::is_true("omega-at-least-2", omega.levels.len() >= 2));

    // recurrence classification
    checks.push(Check::is_true(
        "lambda-1-summable",
        matches!(fixedpt::solve_recurrence(qp, 1.0, 0, 0, cfg.m_max), RecurrenceSolution::Summable { .. }),
    ));
    checks.push(Check::is_true(
        "lambda-out-of-spectrum",
        matches!(
            fixedpt::solve_recurrence(qp, 1.0 / (qp.abs_q * qp.abs_q), 0, 0, cfg.m_max),
            RecurrenceSolution::Divergent { .. }
        ),
    ));
    let mut zeros = true;
    for n in 0..5 {
        let lam = qp.abs_q.powi(2 * n);
        zeros &= fixedpt::forward_recurrence(qp, lam, 0, 0, 0.0, 20).iter().all(|c| c.norm() == 0.0);
    }
    checks.push(Check::is_true("leading-coefficient-law", zeros));

    // E_1 actions on levels 0 and 1
    for level in [0u32, 1] {
        let seed = fixedpt::seed_vector(qp, level, 60).unwrap();
        checks.push(Check::below(
            format!("seed-fixed-point level {level}"),
            fixedpt::fixed_point_residual(qp, &seed, 150),
            1e-8,
        ));
        let rep = fixedpt::verify_e1_actions(qp, level, &seed, 2, 2, 150).unwrap();
        checks.push(Check::below(format!("e1-shifts level {level}"), rep.shift_residual, 1e-7));
        checks.push(Check::below(format!("e1-D-phase level {level}"), rep.phase_residual, 1e-8));
        checks.push(Check::below(format!("e1-unitarity level {level}"), rep.unitarity_residual, 1e-8));
        checks.push(Check::below(format!("e1-gram level {level}"), rep.gram_residual, 1e-7));
    }

    SuiteReport::new("fixedpt", checks)
}

fn torus_index_suite(qp: &QParam, cfg: &RunConfig) -> SuiteReport {
    let mut checks = Vec::new();
    let thetas = [0.30, 0.45, qp.theta];
    let mut signed: Vec<(f64, i64, i64)> = Vec::new(); // (theta, chern, index)
    for &th in &thetas {
        let eps = 0.8 * th.min(1.0 - th);
        let p = nctorus::powers_rieffel(th, eps, cfg.fourier_order).unwrap();
        let gates = nctorus::projection_gates(&p, th, cfg.fourier_order);
        checks.push(Check::below(format!("rieffel-idempotency theta={th}"), gates.idempotency, 1e-6));
        checks.push(Check::below(format!("rieffel-selfadjoint theta={th}"), gates.self_adjointness, 1e-6));
        checks.push(Check::below(format!("rieffel-trace theta={th}"), gates.trace_error, 1e-8));
        let c = nctorus::chern_number(&p, th).unwrap();
        checks.push(Check::below(format!("chern-integrality theta={th}"), (c - c.round()).abs(), 1e-5));
        checks.push(Check::is_true(format!("chern-nonzero theta={th}"), c.round() as i64 != 0));
        checks.push(Check::int_equal(format!("chern-magnitude theta={th}"), c.round().abs() as i64, 1));
        // index stability across boxes
        let mut indices = Vec::new();
        for half in cfg.index_boxes() {
            match nctorus::torus_dirac_index(&p, th, half) {
                Ok(res) => indices.push(res.index),
                Err(e) => {
                    checks.push(Check::is_true(format!("index-stable theta={th} box={half} ({e})"), false));
                }
            }
        }
        let stable = indices.windows(2).all(|w| w[0] == w[1]) && !indices.is_empty();
        checks.push(Check::is_true(format!("index-stable theta={th}"), stable));
        if let Some(&ind) = indices.first() {
            signed.push((th, c.round() as i64, ind));
        }
    }
    // one global sign convention: index = -chern for every theta
    let coherent = signed.iter().all(|(_, c, i)| *i == -c);
    checks.push(Check::is_true("gauge-coherence index=-chern", coherent));

    // unit projection: zero index
    let unit_idx = nctorus::torus_dirac_index(&TorusElement::unit(), qp.theta, 12).unwrap();
    checks.push(Check::int_equal("unit-index", unit_idx.index, 0));

    // per-level pairing at the configured theta
    let eps = 0.8 * qp.theta.min(1.0 - qp.theta);
    let p = nctorus::powers_rieffel(qp.theta, eps, cfg.fourier_order).unwrap();
    let box_half = cfg.index_boxes()[0];
    match nctorus::pairing_index(&p, qp.theta, &[0, 1], box_half) {
        Ok(levels) => {
            checks.push(Check::is_true("pairing-level0-nonzero", levels[0].1 != 0));
            checks.push(Check::int_equal("pairing-level1-zero", levels[1].1, 0));
            let d = nctorus::torus_dirac_index(&p, qp.theta, box_half).unwrap();
            checks.push(Check::int_equal("pairing-matches-dirac", levels[0].1, d.index));
            let total: i64 = levels.iter().map(|(_, i)| i).sum();
            checks.push(Check::int_equal("pairing-total", total, levels[0].1));
        }
        Err(e) => checks.push(Check::is_true(format!("pairing ({e})"), false)),
    }

    // block model: transported level generators match the torus model
    for level in [0u32, 1] {
        let seed = fixedpt::seed_vector(qp, level, 60).unwrap();
        let rep = nctorus::block_model(qp, level, &seed, 3, 3, 150).unwrap();
        checks.push(Check::below(format!("block-model-Pb level {level}"), rep.pb_residual, 1e-8));
        checks.push(Check::below(format!("block-model-PD level {level}"), rep.pd_residual, 1e-8));
        checks.push(Check::below(format!("block-model-f0 level {level}"), rep.f0_modulus, 1e-14));
    }

    SuiteReport::new("torus-index", checks)
}

fn specdim_suite(qp: &QParam, cfg: &RunConfig) -> SuiteReport {
    let mut checks = Vec::new();
    let est = growth::spectral_dimension_estimate(&cfg.p_grid(), cfg.spec_n_max);
    checks.push(Check::at_least("bracket-lower", est.lower, 3.8));
    checks.push(Check::at_or_below("bracket-upper", est.upper, 4.2));
    checks.push(Check::is_true("bracket-ordered", est.lower < est.upper));

    // exhaustive path-length bound for 2 gamma_1 + |gamma_2| <= 20
    let mut ok = true;
    let mut equality_ok = true;
    for g1_2 in 0..=20u32 {
        for g2 in -(20 - g1_2 as i32)..=(20 - g1_2 as i32) {
            let bound = g1_2 + g2.unsigned_abs();
            for g3_2 in (-(g1_2 as i32)..=g1_2 as i32).step_by(2) {
                let g = GammaIndex::new(g1_2, g2, g3_2).unwrap();
                let d = growth::path_length(qp, g);
                ok &= d <= bound;
                if g3_2 == g1_2 as i32 && g2 >= 0 {
                    equality_ok &= d == bound;
                }
            }
        }
    }
    checks.push(Check::is_true("path-length-bound-20", ok));
    checks.push(Check::is_true("path-length-axis-equality", equality_ok));

    // norm-ratio suprema and the multiplicity profile
    let b = growth::step_bounds(qp);
    let mut worst_a = 0.0f64;
    for g1_2 in 0..=40u32 {
        for g3_2 in (-(g1_2 as i32)..=g1_2 as i32).step_by(2) {
            let g = GammaIndex::new(g1_2, 0, g3_2).unwrap();
            let tgt = GammaIndex::new(g1_2 + 1, 0, g3_2 - 1).unwrap();
            worst_a = worst_a.max(growth::e_gamma_norm(qp, g) / growth::e_gamma_norm(qp, tgt));
        }
    }
    checks.push(Check::at_or_below("a-step-ratio-sup", worst_a, b.a_step + 1e-13));
    checks.push(Check::int_equal("multiplicity-0", growth::l_multiplicity(0) as i64, 1));
    checks.push(Check::int_equal("multiplicity-1", growth::l_multiplicity(1) as i64, 6));
    let r = growth::l_multiplicity(64) as f64 / growth::l_multiplicity(32) as f64;
    checks.push(Check::below("multiplicity-cubic-doubling", (r - 8.0).abs() / 8.0, 0.15));

    SuiteReport::new("specdim", checks)
}
