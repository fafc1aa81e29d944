use rand::Rng;
use rescon_core::confgen::configuration_for;
use rescon_core::formation::*;
use rescon_core::rng::stream;
use rescon_core::{AnnealParams64, Configuration, GeometryParams64, ResourceMatrix, Topology};

fn random_formation(n: usize, spread: f64, rng: &mut impl Rng) -> Formation<f64> {
    Formation::new(
        (0..n)
            .map(|_| std::array::from_fn(|_| rng.gen_range(-spread..spread)))
            .collect(),
    )
    .unwrap()
}

/// Energy summed term by term from its definition.
fn reference_energy(
    x: &Formation<f64>,
    c: &Configuration<f64>,
    p: &GeometryParams64,
    h: f64,
) -> f64 {
    let n = x.n();
    let mut e = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let d = x.distance(i, j);
            match c.distances.get(i, j) {
                Some(target) => {
                    e += (d - target).powi(2);
                    e += (h * (p.d_s - d)).exp();
                    e += (h * (d - p.d_mc)).exp();
                }
                None => e += (h * (p.d_mc - d)).exp(),
            }
        }
        for k in 0..3 {
            e += (h * (x.points[i][k] - p.box_max[k])).exp();
            e += (h * (p.box_min[k] - x.points[i][k])).exp();
        }
    }
    e
}

#[test]
fn energy_matches_term_by_term_sum() {
    let p = GeometryParams64::default();
    let mut rng = stream(1, "energy", 0);
    for _ in 0..50 {
        let n = rng.gen_range(2..=8);
        let t =
            rescon_core::failsim::random_connected_graph(n, 0.6f64.max(2.0 / n as f64), &mut rng)
                .unwrap();
        let c = configuration_for(&t, &ResourceMatrix::full(n, 1, 1), &p).unwrap();
        let x = random_formation(n, 2.0, &mut rng);
        for h in [1.0, 3.7, 40.0] {
            let got = energy(&x, &c, &p, h);
            let want = reference_energy(&x, &c, &p, h);
            assert!(
                (got - want).abs() <= 1e-12 * want.abs().max(1.0),
                "{got} vs {want}"
            );
        }
        let stress: f64 = t
            .edges()
            .map(|(i, j)| (x.distance(i, j) - c.distances.get(i, j).unwrap()).powi(2))
            .sum();
        assert!((stress_objective(&x, &c) - stress).abs() < 1e-12);
    }
}

#[test]
fn proposals_move_one_coordinate_uniformly() {
    let mut rng = stream(2, "propose", 0);
    let x = random_formation(4, 1.0, &mut rng);
    let delta_max = 0.05;
    let mut cells = [0usize; 12];
    let mut halves = [0usize; 2];
    for _ in 0..60_000 {
        let y = propose(&x, delta_max, &mut rng);
        let moved: Vec<(usize, usize)> = (0..4)
            .flat_map(|i| (0..3).map(move |k| (i, k)))
            .filter(|&(i, k)| x.points[i][k] != y.points[i][k])
            .collect();
        assert!(moved.len() <= 1);
        if let Some(&(i, k)) = moved.first() {
            let d = y.points[i][k] - x.points[i][k];
            assert!(d.abs() <= delta_max + 1e-15);
            cells[i * 3 + k] += 1;
            halves[usize::from(d > 0.0)] += 1;
        }
    }
    let total: usize = cells.iter().sum();
    for &c in &cells {
        assert!((c as f64 - total as f64 / 12.0).abs() < 0.06 * total as f64 / 12.0);
    }
    assert!((halves[0] as f64 - halves[1] as f64).abs() < 0.03 * total as f64);
}

#[test]
fn analytic_transition_minimum_bounds_dense_sampling() {
    let mut rng = stream(3, "transition", 0);
    for _ in 0..300 {
        let pt = |rng: &mut _| -> [f64; 3] {
            std::array::from_fn(|_| rescon_core::rng::StreamRng::gen_range(rng, -2.0..2.0))
        };
        let (a0, a1, b0, b1) = (pt(&mut rng), pt(&mut rng), pt(&mut rng), pt(&mut rng));
        let exact = pair_min_separation(a0, a1, b0, b1);
        let samples = 20_000;
        let sampled = (0..=samples)
            .map(|s| {
                let t = s as f64 / samples as f64;
                (0..3)
                    .map(|k| {
                        let a = a0[k] + t * (a1[k] - a0[k]);
                        let b = b0[k] + t * (b1[k] - b0[k]);
                        (a - b).powi(2)
                    })
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(f64::INFINITY, f64::min);
        assert!(exact <= sampled + 1e-12);
        assert!(sampled - exact < 1e-3, "{exact} vs {sampled}");
    }
}

#[test]
fn crossing_paths_are_flagged() {
    let p = GeometryParams64::default();
    let from = Formation::new(vec![[-1.0, 0.0, 1.0], [1.0, 0.0, 1.0]]).unwrap();
    let to = Formation::new(vec![[1.0, 0.0, 1.0], [-1.0, 0.0, 1.0]]).unwrap();
    let report = straight_line_transition_check(&from, &to, p.d_s).unwrap();
    assert!(report.min_separation < 1e-12);
    assert_eq!(report.violations.len(), 1);
    let still = straight_line_transition_check(&from, &from, p.d_s).unwrap();
    assert!(still.violations.is_empty());
    assert!((still.min_separation - 2.0).abs() < 1e-12);
}

#[test]
fn collinear_chain_is_realized_with_low_stress() {
    let p = GeometryParams64::default();
    let c = configuration_for(&Topology::line(5), &ResourceMatrix::full(5, 1, 1), &p).unwrap();
    let start = grid_formation(5, &p).unwrap();
    let params = AnnealParams64 {
        seed: 9,
        ..AnnealParams64::for_geometry(&p)
    };
    let out = synthesize(&start, &c, &p, &params).unwrap();
    assert!(out.report.feasible, "{:?}", out.report);
    assert!(out.stress <= 1e-3, "stress {}", out.stress);
    assert!(check_feasibility(&out.formation, &c, &p).feasible);
}

#[test]
fn synthesis_is_reproducible() {
    let p = GeometryParams64::default();
    let c = configuration_for(&Topology::complete(4), &ResourceMatrix::full(4, 1, 1), &p).unwrap();
    let start = grid_formation(4, &p).unwrap();
    let params = AnnealParams64 {
        steps: 5000,
        seed: 4,
        ..AnnealParams64::for_geometry(&p)
    };
    let a = synthesize(&start, &c, &p, &params).unwrap();
    let b = synthesize(&start, &c, &p, &params).unwrap();
    assert_eq!(a.formation, b.formation);
    assert!(a.report.feasible);
}

#[test]
fn annealing_in_f32_reaches_feasibility() {
    let p = GeometryParams64::default().cast::<f32>();
    let t = Topology::line(3);
    let c64 = configuration_for(
        &t,
        &ResourceMatrix::full(3, 1, 1),
        &GeometryParams64::default(),
    )
    .unwrap();
    let mut d = rescon_core::NeighborDistanceMatrix::<f32>::absent(3);
    for (i, j) in t.edges() {
        d.set(i, j, c64.distances.get(i, j).map(|v| v as f32));
    }
    let c = Configuration::new(t, d, ResourceMatrix::full(3, 1, 1)).unwrap();
    let start = grid_formation(3, &p).unwrap();
    let out = synthesize(&start, &c, &p, &AnnealParams::for_geometry(&p)).unwrap();
    assert!(check_feasibility_with_tol(&out.formation, &c, &p, 1e-4).feasible);
}
