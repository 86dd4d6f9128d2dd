use super::*;
use crate::cloning::CloningSetup;
use crate::qsim::ChannelMode;

fn spec(init: SweepInit, observable: CostObservable) -> VarianceSweepSpec {
    VarianceSweepSpec {
        qubit_list: vec![2, 3, 4],
        layer_list: LayerList::Layers(vec![1, 2]),
        init,
        observable,
        samples: 40,
        seed: 7,
    }
}

#[test]
fn single_qubit_variance_matches_closed_form() {
    // one layer on one qubit: C = cos θ₁, ∂C/∂θ₁ = −sin θ₁
    let m = 4000;
    for sigma in [0.3, 1.0, PI] {
        let c = variance_cell(1, 1, &SweepInit::RandomNormal { sigma }, CostObservable::Global, m, 1).unwrap();
        let exact = (1.0 - (-2.0 * sigma * sigma).exp()) / 2.0;
        // sd of the sample variance is at most sqrt(E sin⁴/m) ≤ 1/√m
        assert!((c.variance - exact).abs() < 4.0 / (m as f64).sqrt(), "σ={sigma}: {} vs {exact}", c.variance);
    }
    let eps = 0.5;
    let c = variance_cell(1, 1, &SweepInit::IdentityNearZero { epsilon: eps }, CostObservable::Local, m, 2).unwrap();
    let exact = 0.5 - (2.0 * eps).sin() / (4.0 * eps);
    assert!((c.variance - exact).abs() < 4.0 * exact / (m as f64).sqrt() + 1e-4);
}

#[test]
fn sweep_is_reproducible_and_well_formed() {
    let s = spec(SweepInit::RandomNormal { sigma: 1.0 }, CostObservable::Global);
    let a = gradient_variance_sweep(&s).unwrap();
    let b = gradient_variance_sweep(&s).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.cells.len(), 6);
    assert_eq!(a.slopes.len(), 2);
    assert!(a.cells.iter().all(|c| c.variance >= 0.0 && c.gradients.len() == 40));
    let mut out = Vec::new();
    a.write_csv(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], VARIANCE_SCHEMA);
    assert_eq!(lines[1], "n,L,init,observable,variance,samples");
    assert_eq!(lines.len(), 2 + 6);
    assert!(lines[2].starts_with("2,1,random_normal,global,"));
}

#[test]
fn sweep_validation() {
    let mut s = spec(SweepInit::RandomNormal { sigma: 1.0 }, CostObservable::Local);
    s.samples = 29;
    assert!(matches!(gradient_variance_sweep(&s), Err(Error::InvalidConfig { ref key, .. }) if key == "variance.samples"));
    let mut s = spec(SweepInit::RandomNormal { sigma: 1.0 }, CostObservable::Local);
    s.qubit_list = vec![2, 4, 4];
    assert!(matches!(gradient_variance_sweep(&s), Err(Error::InvalidSweep(_))));
    s.qubit_list = vec![2, 11, 4];
    assert!(gradient_variance_sweep(&s).is_err());
    s.qubit_list = vec![];
    assert!(gradient_variance_sweep(&s).is_err());
    let mut s = spec(SweepInit::RandomNormal { sigma: 1.0 }, CostObservable::Local);
    s.layer_list = LayerList::Layers(vec![]);
    assert!(gradient_variance_sweep(&s).is_err());
}

#[test]
fn least_squares_slope_recovers_exponent() {
    let x = [2.0, 4.0, 6.0, 8.0];
    let y: Vec<f64> = x.iter().map(|n| -1.5 * n + 3.0).collect();
    assert!((ls_slope(&x, &y) + 1.5).abs() < 1e-12);
    assert_eq!(sample_variance(&[1.0, 1.0, 1.0]), 0.0);
    assert!((sample_variance(&[1.0, 2.0, 3.0, 4.0]) - 5.0 / 3.0).abs() < 1e-15);
    assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
    assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
}

#[test]
fn bootstrap_interval_brackets_the_fit() {
    let s = VarianceSweepSpec {
        qubit_list: vec![2, 3, 4, 5],
        layer_list: LayerList::MatchQubits,
        ..spec(SweepInit::RandomNormal { sigma: PI }, CostObservable::Global)
    };
    let r = gradient_variance_sweep(&s).unwrap();
    let ci = r.bootstrap_slope_ci(300, 0.95, 1);
    assert_eq!(ci.len(), 1);
    assert!(ci[0].0 <= ci[0].1);
    assert_eq!(ci, r.bootstrap_slope_ci(300, 0.95, 1));
}

#[test]
fn local_cost_outlasts_global_cost() {
    let base = VarianceSweepSpec {
        qubit_list: vec![2, 4, 6],
        layer_list: LayerList::MatchQubits,
        samples: 100,
        ..spec(SweepInit::RandomNormal { sigma: PI }, CostObservable::Global)
    };
    let global = gradient_variance_sweep(&base).unwrap();
    let local = gradient_variance_sweep(&VarianceSweepSpec {
        observable: CostObservable::Local,
        ..base
    })
    .unwrap();
    assert!(local.cell(6, 6).unwrap().variance > global.cell(6, 6).unwrap().variance);
    assert!(global.slopes[0].slope < 0.0);
}

#[test]
fn warm_start_audit() {
    let setup = CloningSetup::new(3, ChannelMode::Ideal).unwrap();
    let surrogate = setup.surrogate_objective();
    let nonconvex = setup.nonconvex_objective();
    let problem = Problem {
        stage1: Stage1Loss::with_residuals(&surrogate),
        stage2: &nonconvex,
    };
    let cfg = TwoStageConfig {
        max_epochs_stage1: 10,
        ..TwoStageConfig::default()
    };
    assert!(matches!(warm_start_gradient_audit(&problem, &cfg, 1), Err(Error::InvalidSweep(_))));
    let audit = warm_start_gradient_audit(&problem, &cfg, 10).unwrap();
    assert_eq!(audit.warm_norms.len(), 10);
    assert_eq!(audit.warm_start_flatter, audit.ratio < 1.0);

    // a convex toy whose surrogate minimizer is E's minimizer: the record
    // flags the flat warm start instead of failing
    let q = crate::optimizer::QuadraticToy::isotropic(3);
    let toy = Problem {
        stage1: Stage1Loss::objective(&q),
        stage2: &q,
    };
    let cfg = TwoStageConfig {
        stage1_mode: crate::optimizer::Stage1Mode::GradientDescent,
        eta_c: 0.25,
        tau_g: 1e-12,
        max_epochs_stage1: 500,
        init: InitScheme::RandomNormal { sigma: 1.0 },
        ..TwoStageConfig::default()
    };
    let audit = warm_start_gradient_audit(&toy, &cfg, 10).unwrap();
    assert!(audit.warm_start_flatter && audit.ratio < 1e-3);
}
