use std::sync::OnceLock;

use ergolab_core::blocks::{self, BlockFunctional};
use ergolab_core::conv_ops::{self, right_conv_operator};
use ergolab_core::duals::{self, check_state, convolve, involution_sharp, random_element, random_faithful_state};
use ergolab_core::hopf::FiniteQuantumGroup;
use ergolab_core::lp::{self, Exponent};
use ergolab_core::semigroups::{self, GeneratingFunctional};
use ergolab_core::{io, linalg, CMat, Functional};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn groups() -> &'static [FiniteQuantumGroup<f64>] {
    static GROUPS: OnceLock<Vec<FiniteQuantumGroup<f64>>> = OnceLock::new();
    GROUPS.get_or_init(|| {
        ["c:z4", "c:s3", "group-algebra:s3", "kac-paljutkin"]
            .iter()
            .map(|n| io::resolve_group(n).unwrap().with_solved_haar().unwrap())
            .collect()
    })
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn c(re: f64) -> ergolab_core::Complex64 {
    ergolab_core::Complex64::new(re, 0.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn convolution_of_states_is_a_state(gi in 0usize..4, seed in any::<u64>()) {
        let g = &groups()[gi];
        let mut r = rng(seed);
        let a = random_faithful_state(g, &mut r).unwrap();
        let b = duals::random_singular_state(g, &mut r).unwrap();
        let ab = convolve(g, &a, &b).unwrap();
        prop_assert!(check_state(g, &ab, 1e-9).state);
    }

    #[test]
    fn operator_is_unital_and_reads_back(gi in 0usize..4, seed in any::<u64>()) {
        let g = &groups()[gi];
        let phi = random_faithful_state(g, &mut rng(seed)).unwrap();
        let t = right_conv_operator(g, &phi).unwrap();
        prop_assert!(linalg::vnorm(&(t.apply(g.unit()) - g.unit())) < 1e-12);
        prop_assert!(conv_ops::functional_of_operator(g, &t.matrix).distance(&phi) < 1e-12);
        prop_assert!(t.l2_norm(g).unwrap() <= 1.0 + 1e-10);
    }

    #[test]
    fn involution_is_antimultiplicative(gi in 0usize..4, seed in any::<u64>()) {
        let g = &groups()[gi];
        let mut r = rng(seed);
        let a = Functional::new(random_element(g.dim(), &mut r));
        let b = Functional::new(random_element(g.dim(), &mut r));
        let lhs = involution_sharp(g, &convolve(g, &a, &b).unwrap()).unwrap();
        let rhs = convolve(g, &involution_sharp(g, &b).unwrap(), &involution_sharp(g, &a).unwrap()).unwrap();
        prop_assert!(lhs.distance(&rhs) < 1e-10);
        let back = involution_sharp(g, &involution_sharp(g, &a).unwrap()).unwrap();
        prop_assert!(back.distance(&a) < 1e-12);
    }

    #[test]
    fn cesaro_limit_is_idempotent_projection(gi in 0usize..4, seed in any::<u64>()) {
        let g = &groups()[gi];
        let states = conv_ops::random_states(g, 3, &mut rng(seed)).unwrap();
        for phi in &states {
            let lim = conv_ops::cesaro_limit_functional(g, phi, 1e-10, 2000).unwrap();
            prop_assert!(lim.idempotency < 1e-8);
            prop_assert!(linalg::frob(&(&lim.projection * &lim.projection - &lim.projection)) < 1e-8);
        }
    }

    #[test]
    fn lp_norms_increase_with_p(gi in 0usize..4, seed in any::<u64>()) {
        let g = &groups()[gi];
        let ctx = lp::make_context(g, Exponent::Finite(1.0)).unwrap();
        let x = random_element(g.dim(), &mut rng(seed));
        let mut prev = 0.0;
        for p in [Exponent::Finite(1.0), Exponent::Finite(1.5), Exponent::Finite(2.0), Exponent::Finite(4.0), Exponent::Inf] {
            let v = ctx.norm_at(p, &x);
            prop_assert!(v >= prev * (1.0 - 1e-12));
            prev = v;
        }
    }

    #[test]
    fn semigroup_law_and_positivity(gi in 0usize..4, seed in any::<u64>(), s in 0.01f64..3.0, t in 0.01f64..3.0) {
        let g = &groups()[gi];
        let psi = random_faithful_state(g, &mut rng(seed)).unwrap();
        let l = GeneratingFunctional::poisson(g, &psi);
        let a = semigroups::semigroup_state(g, &l, s).unwrap();
        let b = semigroups::semigroup_state(g, &l, t).unwrap();
        let ab = semigroups::semigroup_state(g, &l, s + t).unwrap();
        prop_assert!(ab.distance(&convolve(g, &a, &b).unwrap()) < 1e-10);
        prop_assert!(check_state(g, &ab, 1e-10).state);
    }

    #[test]
    fn block_relations_hold(q in 0.05f64..=1.0, t in -4.0f64..4.0, twice_l in 1usize..5) {
        let b = blocks::su_q2_blocks(q, twice_l as f64 / 2.0).unwrap().pop().unwrap();
        let rep = blocks::verify_commutation_relations(&b, &[t], 1e-8);
        prop_assert!(rep.passed, "{:?}", rep.failures().collect::<Vec<_>>());
    }

    #[test]
    fn block_adjoint_for_diagonal_functionals(q in 0.1f64..=1.0, seed in any::<u64>()) {
        let b = blocks::su_q2_blocks(q, 1.0).unwrap().pop().unwrap();
        let mut r = rng(seed);
        let d = b.dim();
        let phi = CMat::from_diagonal(&random_element::<f64, _>(d, &mut r));
        let psi = CMat::from_diagonal(&random_element::<f64, _>(d, &mut r));
        let omega = BlockFunctional::new(phi, psi).unwrap();
        let rep = blocks::verify_l2_adjoint(&b, &omega, 1e-9).unwrap();
        prop_assert!(rep.passed, "{rep:?}");
    }

    #[test]
    fn gram_is_positive_definite(q in 0.05f64..=1.0) {
        for b in blocks::su_q2_blocks(q, 2.0).unwrap() {
            let k = blocks::l2_gram_block(&b);
            prop_assert!(linalg::hermitian_eigen(&k).0[0] > 0.0);
            prop_assert!((k.trace().re - b.dim() as f64).abs() < 1e-9 * b.dim() as f64);
        }
    }
}

#[test]
fn counit_block_functional_is_neutral() {
    let b = blocks::su_q2_blocks(0.5, 1.0).unwrap().pop().unwrap();
    let e = BlockFunctional::counit(3);
    let w = BlockFunctional::hermitian(CMat::from_fn(3, 3, |i, j| c((i + 2 * j) as f64)));
    assert_eq!(e.convolve(&w), w);
    assert!(linalg::frob(&(blocks::block_conv_operator(&b, &e) - linalg::identity(9))) == 0.0);
}
