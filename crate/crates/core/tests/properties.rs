mod common;

use common::*;
use persistency::boundary::{boundary_potential, boundary_sets, build_gamma_model};
use persistency::model::{apply_reparametrization, concatenate, optimal_reparametrization};
use persistency::oracle::{verify_improving, verify_persistent};
use persistency::persistency::{check_criterion, improving_mapping_check};
use persistency::polytope::{delta, linear_energy};
use persistency::solvers::{solve_bruteforce, solve_lp_exact, solve_trws};
use persistency::{
    build_augmented_model, GraphicalModel, Labeling, Mode, PartialLabeling, Reparametrization,
    SolverConfig, SolverKind,
};
use proptest::prelude::*;

const CAP: f64 = 1e6;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

/// Every labeling of a model, in lexicographic order.
fn all_labelings(counts: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &k in counts {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..k).map(move |l| {
                    let mut q = p.clone();
                    q.push(l);
                    q
                })
            })
            .collect();
    }
    out
}

fn subset(n: usize, mask: u64) -> Vec<usize> {
    (0..n).filter(|v| mask >> v & 1 == 1).collect()
}

fn labeling(model: &GraphicalModel, seed: u64) -> Labeling {
    let mut s = seed;
    Labeling(
        model
            .label_counts()
            .iter()
            .map(|&k| {
                s = s
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                (s >> 33) as usize % k
            })
            .collect(),
    )
}

fn pairwise_boundary_factors(model: &GraphicalModel, a: &[usize]) -> Vec<(usize, usize, usize)> {
    boundary_sets(model, a)
        .unwrap()
        .boundary_factors
        .into_iter()
        .map(|f| {
            let s = model.factor(f).scope();
            if a.contains(&s[0]) {
                (f, s[0], s[1])
            } else {
                (f, s[1], s[0])
            }
        })
        .collect()
}

fn constant_difference(a: &GraphicalModel, b: &GraphicalModel) -> bool {
    let xs = all_labelings(a.label_counts());
    let d0 =
        a.energy(&Labeling(xs[0].clone())).unwrap() - b.energy(&Labeling(xs[0].clone())).unwrap();
    xs.into_iter().all(|x| {
        let x = Labeling(x);
        close(a.energy(&x).unwrap() - b.energy(&x).unwrap(), d0)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reparametrization_keeps_energies(seed in 0u64..1 << 40, n in 2usize..7, msgs in prop::collection::vec(-5.0f64..5.0, 256)) {
        let m = small_pairwise(seed, n);
        let mut phi = Reparametrization::zero(&m);
        let mut it = msgs.iter().cycle();
        for f in 0..m.num_factors() {
            if let [u, v] = *m.factor(f).scope() {
                for w in [u, v] {
                    for x in phi.message_mut(f, w, &m).iter_mut() {
                        *x = *it.next().unwrap();
                    }
                }
            }
        }
        let r = apply_reparametrization(&m, &phi).unwrap();
        for x in all_labelings(m.label_counts()) {
            let x = Labeling(x);
            prop_assert!(close(m.energy(&x).unwrap(), r.energy(&x).unwrap()));
        }
    }

    #[test]
    fn energy_splits_at_the_boundary(seed in 0u64..1 << 40, n in 2usize..7, mask in any::<u64>(), ls in any::<u64>()) {
        let m = small_pairwise(seed, n);
        let a = subset(n, mask);
        let rest: Vec<usize> = (0..n).filter(|v| !a.contains(v)).collect();
        let x = labeling(&m, ls);
        let joined = concatenate(n, &x.restrict(&a), &x.restrict(&rest)).unwrap();
        prop_assert_eq!(&joined, &x);
        let boundary: f64 = boundary_sets(&m, &a)
            .unwrap()
            .boundary_factors
            .iter()
            .map(|&f| m.factor_value(f, &x.0))
            .sum();
        let parts = m.restricted_energy(&a, &x.restrict(&a)).unwrap()
            + m.restricted_energy(&rest, &x.restrict(&rest)).unwrap()
            + boundary;
        prop_assert!(close(m.energy(&x).unwrap(), parts));
    }

    #[test]
    fn boundary_potentials_bound_the_exchange(seed in 0u64..1 << 40, n in 2usize..7, mask in any::<u64>(), ls in any::<u64>()) {
        let m = small_pairwise(seed, n);
        let a = subset(n, mask);
        let y = labeling(&m, ls);
        let ya = y.restrict(&a);
        for (f, u, v) in pairwise_boundary_factors(&m, &a) {
            let orig = boundary_potential(&m, f, &a, &ya, Mode::Original).unwrap();
            let opt = boundary_potential(&m, f, &a, &ya, Mode::Optimal).unwrap();
            let th = |xu: usize, xv: usize| {
                let mut l = y.0.clone();
                l[u] = xu;
                l[v] = xv;
                m.factor_value(f, &l)
            };
            let (ku, kv, yu) = (m.label_count(u), m.label_count(v), y.0[u]);
            for xu in 0..ku {
                for xv in 0..kv {
                    prop_assert!(th(yu, xv) + orig[xu] - orig[yu] <= th(xu, xv) + 1e-9);
                }
                let lo = (0..kv).map(|b| th(xu, b)).fold(f64::INFINITY, f64::min);
                let hi = (0..kv).map(|b| th(yu, b)).fold(f64::NEG_INFINITY, f64::max);
                if xu != yu {
                    prop_assert!(close(orig[xu] - orig[yu], lo - hi));
                    prop_assert!(opt[xu] >= lo - hi - 1e-9);
                } else {
                    prop_assert_eq!(opt[xu], 0.0);
                }
            }
        }
    }

    #[test]
    fn potts_modes_differ_by_a_constant(seed in 0u64..1 << 40, mask in any::<u64>(), ls in any::<u64>()) {
        let m = potts(seed, 2, 3, 3, (0.0, 2.0), (0.0, 1.0));
        let a = subset(6, mask);
        prop_assume!(!a.is_empty());
        let y = labeling(&m, ls).restrict(&a);
        let orig = build_augmented_model(&m, &a, &y, Mode::Original).unwrap();
        let opt = build_augmented_model(&m, &a, &y, Mode::Optimal).unwrap();
        prop_assert!(constant_difference(&orig.model, &opt.model));
        let o1 = solve_bruteforce(&orig.model, CAP, 1e-9).unwrap().optima;
        let o2 = solve_bruteforce(&opt.model, CAP, 1e-9).unwrap().optima;
        prop_assert_eq!(o1, o2);
    }

    #[test]
    fn gamma_and_reparametrized_models_agree(seed in 0u64..1 << 40, n in 2usize..7, mask in any::<u64>(), ls in any::<u64>()) {
        let m = small_pairwise(seed, n);
        let a = subset(n, mask);
        prop_assume!(!a.is_empty());
        let y = labeling(&m, ls);
        let ya = y.restrict(&a);
        let gamma = build_gamma_model(&m, &a, &y).unwrap();
        let opt = build_augmented_model(&m, &a, &ya, Mode::Optimal).unwrap();
        prop_assert!(constant_difference(&gamma.model, &opt.model));
        prop_assert!(close(gamma.model.energy(&gamma.to_local(&ya).unwrap()).unwrap(), 0.0));

        let psi = optimal_reparametrization(&m, &y).unwrap();
        let r = apply_reparametrization(&m, &psi).unwrap();
        let via = build_augmented_model(&r, &a, &ya, Mode::Original).unwrap();
        prop_assert!(constant_difference(&via.model, &opt.model));
    }

    #[test]
    fn linear_energy_of_indicators(seed in 0u64..1 << 40, n in 2usize..7, ls in any::<u64>(), hyper in any::<bool>()) {
        let m = if hyper && n >= 3 { small_hyper(seed, n) } else { small_pairwise(seed, n) };
        let x = labeling(&m, ls);
        prop_assert!(close(linear_energy(&m, &delta(&m, &x).unwrap()).unwrap(), m.energy(&x).unwrap()));
    }

    #[test]
    fn criteria_imply_persistency(seed in 0u64..1 << 40, n in 2usize..7, mask in any::<u64>(), ls in any::<u64>()) {
        let m = small_pairwise(seed, n);
        let cfg = SolverConfig::default();
        let a = subset(n, mask);
        let best = solve_bruteforce(&m, CAP, 1e-9).unwrap().best;
        // optimum-based test labelings pass far more often than random ones
        let x0 = if ls % 2 == 0 { best.restrict(&a) } else { labeling(&m, ls).restrict(&a) };
        let lp = check_criterion(&m, &a, &x0, SolverKind::ExactLp, Mode::Original, &cfg).unwrap();
        let bf = check_criterion(&m, &a, &x0, SolverKind::Bruteforce, Mode::Original, &cfg).unwrap();
        let tr = check_criterion(&m, &a, &x0, SolverKind::Trws, Mode::Original, &cfg).unwrap();
        prop_assert!(!lp.holds || bf.holds);
        prop_assert!(!tr.holds || bf.holds);
        if bf.holds {
            prop_assert!(verify_persistent(&m, &x0, CAP).unwrap().verdict);
        }
    }

    #[test]
    fn improving_mappings_are_sound(seed in 0u64..1 << 40, n in 2usize..6, mask in any::<u64>(), ls in any::<u64>()) {
        let m = small_pairwise(seed, n);
        let cfg = SolverConfig::default();
        let a = subset(n, mask);
        let best = solve_bruteforce(&m, CAP, 1e-9).unwrap().best;
        let y = if ls % 2 == 0 { best } else { labeling(&m, ls) };
        let ya = y.restrict(&a);
        let v = improving_mapping_check(&m, &a, &y, &cfg).unwrap();
        let weak = verify_improving(&m, &ya, false, CAP).unwrap().verdict;
        if v.holds {
            prop_assert!(weak);
        }
        if v.holds && v.strict == Some(true) {
            prop_assert!(verify_improving(&m, &ya, true, CAP).unwrap().verdict);
        }
        if weak {
            prop_assert!(verify_persistent(&m, &ya, CAP).unwrap().verdict);
        }
    }

    #[test]
    fn trws_bound_is_a_lower_bound(seed in 0u64..1 << 40, n in 2usize..8) {
        let m = continuous_pairwise(seed, n, 3);
        let r = solve_trws(&m, &SolverConfig::default().stop, 1e-9).unwrap();
        let opt = solve_bruteforce(&m, CAP, 1e-9).unwrap().value;
        prop_assert!(r.output.bound <= opt + 1e-9 * (1.0 + opt.abs()));
        if let Some(x) = r.output.labeling() {
            prop_assert!(close(m.energy(&x).unwrap(), opt));
        }
    }

    #[test]
    fn lp_solve_is_deterministic(seed in 0u64..1 << 40, n in 2usize..7) {
        let m = continuous_pairwise(seed, n, 3);
        let cfg = SolverConfig::default();
        let a = solve_lp_exact(&m, &cfg).unwrap();
        let b = solve_lp_exact(&m, &cfg).unwrap();
        prop_assert_eq!(a.vertex, b.vertex);
        prop_assert_eq!(a.value.to_bits(), b.value.to_bits());
        let opt = solve_bruteforce(&m, CAP, 1e-9).unwrap().value;
        prop_assert!(a.value <= opt + 1e-9 * (1.0 + opt.abs()));
    }
}

#[test]
fn empty_subset_is_trivially_persistent() {
    let m = small_pairwise(1, 4);
    let e = PartialLabeling::empty();
    let cfg = SolverConfig::default();
    assert!(
        check_criterion(&m, &[], &e, SolverKind::ExactLp, Mode::Original, &cfg)
            .unwrap()
            .holds
    );
}
