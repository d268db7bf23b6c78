use ergolab_core::conv_ops::{self, right_conv_operator};
use ergolab_core::duals::{random_faithful_state, StateSpec};
use ergolab_core::hopf::{self, FiniteQuantumGroup};
use ergolab_core::lp::{self, Exponent};
use ergolab_core::semigroups::{self, GeneratingFunctional};
use ergolab_core::{blocks, io, linalg, Error, QuantumGroup32};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn file_roundtrip_then_full_pipeline() {
    let dir = std::env::temp_dir().join(format!("ergolab-workflow-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("kp.json");
    let kp: FiniteQuantumGroup<f64> = hopf::build_kac_paljutkin();
    std::fs::write(&path, io::group_to_json(&kp)).unwrap();

    let g = io::resolve_group::<f64>(&format!("file:{}", path.display()))
        .unwrap()
        .with_solved_haar()
        .unwrap();
    assert!(hopf::verify_axioms(&g, 1e-10).passed());

    let phi = StateSpec::Random(3).resolve(&g).unwrap();
    let erg = conv_ops::check_ergodicity(&g, &phi, 1e-10).unwrap();
    assert!(erg.ergodic);
    let t = right_conv_operator(&g, &phi).unwrap().matrix;
    let ns = [10, 100, 1000];
    let rows = conv_ops::cesaro_convergence(&g, &t, &erg.projection, &ns).unwrap();
    assert!(rows.windows(2).all(|w| w[1].residual_op < w[0].residual_op));

    let x = g.basis(5);
    let seq: Vec<_> = conv_ops::cesaro_means(&t, &[100, 1000, 10000])
        .into_iter()
        .map(|m| m * &x)
        .collect();
    let target = &erg.projection * &x;
    let cert = conv_ops::au_certificate(&g, &seq, &target, 0.1, 1e-3).unwrap();
    assert!(cert.norm_convergent);
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn broken_coassociativity_is_named() {
    let g: FiniteQuantumGroup<f64> = hopf::build_function_algebra(&ergolab_core::GroupTable::cyclic(3).unwrap());
    let mut doc: serde_json::Value = serde_json::from_str(&io::group_to_json(&g)).unwrap();
    // Drop every coproduct entry of δ_1.
    let cop = doc["coproduct"].as_array_mut().unwrap();
    cop.retain(|e| e[0].as_u64() != Some(1));
    let broken: FiniteQuantumGroup<f64> = io::group_from_json(&doc.to_string()).unwrap();
    let report = hopf::verify_axioms(&broken, 1e-10);
    assert!(!report.passed());
    assert!(report.failures().contains(&"coassociativity"));
}

#[test]
fn single_precision_pipeline() {
    let g: QuantumGroup32 = io::resolve_group("kac-paljutkin").unwrap().with_solved_haar().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let phi = random_faithful_state(&g, &mut rng).unwrap();
    let lim = conv_ops::cesaro_limit_functional(&g, &phi, 1e-4, 1000).unwrap();
    assert!(lim.rho.distance(&g.haar().unwrap()) < 1e-4);
    let ctx = lp::make_context(&g, Exponent::Finite(3.0)).unwrap();
    assert!((ctx.norm(g.unit()) - 1.0).abs() < 1e-5);
    let l = GeneratingFunctional::poisson(&g, &phi);
    let s = semigroups::semigroup_state(&g, &l, 1.0f32).unwrap();
    assert!((s.eval(g.unit()).re - 1.0).abs() < 1e-5);
    let b = blocks::su_q2_blocks(0.5f32, 1.0).unwrap();
    assert!(blocks::verify_commutation_relations(&b[2], &[0.5f32, 1.0], 1e-4).passed);
}

#[test]
fn non_tracial_models_are_routed_to_blocks() {
    // Every finite model is tracial, so the L^p context never refuses on
    // traciality; the block model carries the non-tracial Gram instead.
    for (name, _) in io::builtin_catalog() {
        let g = io::resolve_group::<f64>(&name).unwrap().with_solved_haar().unwrap();
        assert!(lp::make_context(&g, Exponent::Finite(2.0)).is_ok(), "{name}");
    }
    let b = blocks::su_q2_blocks(0.5, 0.5).unwrap().pop().unwrap();
    let k = blocks::l2_gram_block(&b);
    assert!(linalg::frob(&(&k - k.transpose())) < 1e-15);
    let (vals, _) = linalg::hermitian_eigen(&k);
    assert!(vals[3] / vals[0] > 3.9);
}

#[test]
fn errors_carry_their_diagnostics() {
    let g = io::resolve_group::<f64>("c:z2").unwrap();
    match lp::make_context(&g, Exponent::Finite(2.0)) {
        Err(Error::HaarMissing(name)) => assert_eq!(name, "c:z2"),
        other => panic!("{other:?}"),
    }
    let g = g.with_solved_haar().unwrap();
    assert!(matches!("0.5".parse::<Exponent<f64>>(), Err(Error::InvalidExponent(_))));
    let eps = GeneratingFunctional {
        functional: g.counit_functional(),
    };
    assert!(matches!(semigroups::semigroup_state(&g, &eps, 1.0), Err(Error::InvalidGenerator(_))));
    assert!(matches!(blocks::su_q2_blocks(2.0, 1.0), Err(Error::InvalidDeformation(_))));
}
