use plaquette_core::circuit::{model_circuit, Circuit, Gate, InitialState};
use plaquette_core::exact::Spectrum;
use plaquette_core::mitigation::fold;
use plaquette_core::models::{build_hamiltonian, enumerate_sector, format_label, initial_state, parse_label};
use plaquette_core::sim::{run_ideal, run_noisy, run_noisy_with, sample, Counts, Engine, NoiseModel};
use plaquette_core::{loschmidt, GaugeModel, Geometry, SectorSpec};

fn in_scope() -> Vec<(GaugeModel, Geometry, String)> {
    let mut out = Vec::new();
    for geom in [Geometry::Square1, Geometry::Triangle1, Geometry::TwoSquarePbc] {
        out.push((GaugeModel::z2(1.0), geom, "0".repeat(geom.n_links())));
    }
    for geom in [Geometry::Square1, Geometry::Triangle1] {
        let u1 = GaugeModel::u1(1.0);
        let zero = enumerate_sector(&u1, geom, &SectorSpec::uniform(geom, 0.0)).unwrap();
        out.push((u1, geom, format_label(zero[0], geom.n_links())));
    }
    out
}

fn circuit(model: &GaugeModel, geom: Geometry, label: &str, t: f64) -> Circuit {
    let init = InitialState {
        label: label.into(),
        basis: model.natural_basis(),
    };
    model_circuit(model, geom, t, &init, model.natural_basis()).unwrap()
}

#[test]
fn noiseless_sampling_tracks_exact_loschmidt() {
    let shots = 8192;
    for (model, geom, label) in in_scope() {
        let n = geom.n_links();
        let h = build_hamiltonian(&model, geom).unwrap();
        let spec = Spectrum::of_sum(&h).unwrap();
        let psi0 = initial_state(n, &label, model.natural_basis()).unwrap();
        let idx = parse_label(&label, n).unwrap();
        for k in 0..20 {
            let t = 0.16 * k as f64;
            let p = loschmidt(&psi0, &spec.evolve(&psi0, t).unwrap()).unwrap();
            let c = circuit(&model, geom, &label, t);
            let counts = run_noisy(&c, &NoiseModel::ideal(), shots, 7 + k).unwrap();
            let est = counts.get(idx) as f64 / shots as f64;
            let bound = 3.0 * (p * (1.0 - p) / shots as f64).sqrt() + 1e-9;
            assert!((est - p).abs() <= bound, "{model:?} {geom} t={t}: {est} vs {p}");
        }
    }
}

#[test]
fn two_plaquette_sector_probability_is_conserved() {
    let model = GaugeModel::z2(1.0);
    let sector: Vec<usize> = ["000000", "001111", "110101", "111010"]
        .iter()
        .map(|l| parse_label(l, 6).unwrap())
        .collect();
    for k in 0..10 {
        let c = circuit(&model, Geometry::TwoSquarePbc, "000000", 0.3 * k as f64);
        let counts = run_noisy(&c, &NoiseModel::ideal(), 8192, k).unwrap();
        let inside: u64 = sector.iter().map(|&s| counts.get(s)).sum();
        assert_eq!(inside, 8192);
    }
}

#[test]
fn noiseless_run_matches_ideal_sampling_seed_for_seed() {
    let model = GaugeModel::u1(0.8);
    let c = circuit(&model, Geometry::Triangle1, "011", 0.9);
    let psi = run_ideal(&c).unwrap();
    for seed in [0, 1, 99] {
        // the ancilla (bit 3) is not measured
        let mut want = Counts::new(3);
        for (o, k) in sample(&psi, 4096, seed).iter() {
            want.add(o & 0b111, k);
        }
        assert_eq!(run_noisy(&c, &NoiseModel::ideal(), 4096, seed).unwrap(), want);
    }
}

#[test]
fn trajectories_and_channel_agree_in_law() {
    let model = GaugeModel::z2(1.0);
    let c = circuit(&model, Geometry::Square1, "0000", 0.6);
    let noise = NoiseModel::new(0.05, 0.03, 0.01).unwrap();
    let shots = 200_000u64;
    let a = run_noisy_with(&c, &noise, shots, 1, Engine::Trajectory).unwrap();
    let b = run_noisy_with(&c, &noise, shots, 2, Engine::Channel).unwrap();
    let n = shots as f64;
    for o in 0..16 {
        let (pa, pb) = (a.get(o) as f64 / n, b.get(o) as f64 / n);
        let p = (pa + pb) / 2.0;
        let sigma = (p * (1.0 - p) * 2.0 / n).sqrt();
        assert!((pa - pb).abs() <= 5.0 * sigma + 1e-12, "outcome {o}: {pa} vs {pb}");
    }
}

#[test]
fn readout_flip_on_ground_state() {
    let mut c = Circuit::new(1);
    c.push(Gate::Measure { qubit: 0, cbit: 0 }).unwrap();
    let noise = NoiseModel::new(0.0, 0.1, 0.0).unwrap();
    let shots = 100_000;
    let counts = run_noisy(&c, &noise, shots, 3).unwrap();
    let p = counts.get(1) as f64 / shots as f64;
    let sigma = (0.1 * 0.9 / shots as f64).sqrt();
    assert!((p - 0.1).abs() <= 3.0 * sigma, "{p}");
}

#[test]
fn folding_lowers_the_return_probability() {
    let model = GaugeModel::z2(1.0);
    let c = circuit(&model, Geometry::Square1, "0000", 0.0);
    let noise = NoiseModel::new(0.02, 0.0, 0.0).unwrap();
    let shots = 100_000;
    let mut last = 1.0;
    for lambda in [1.0, 2.0, 4.0, 8.0] {
        let (folded, _) = fold(&c, lambda).unwrap();
        let p = run_noisy(&folded, &noise, shots, 11).unwrap().get(0) as f64 / shots as f64;
        assert!(p < last, "lambda {lambda}: {p} not below {last}");
        last = p;
    }
}

#[test]
fn return_probability_is_monotone_in_p2() {
    let model = GaugeModel::z2(1.0);
    let c = circuit(&model, Geometry::Square1, "0000", 0.0);
    let shots = 8192;
    let mut last = f64::INFINITY;
    for p2 in [0.0, 0.01, 0.02, 0.05] {
        let noise = NoiseModel::new(p2, 0.02, 0.02).unwrap();
        let mean = (0..20)
            .map(|s| run_noisy(&c, &noise, shots, 500 + s).unwrap().get(0) as f64 / shots as f64)
            .sum::<f64>()
            / 20.0;
        assert!(mean <= last, "p2 {p2}: {mean} above {last}");
        last = mean;
    }
}

#[test]
fn gauss_law_holds_shot_by_shot_without_noise() {
    let model = GaugeModel::z2(1.3);
    let c = circuit(&model, Geometry::Triangle1, "000", 1.1);
    let counts = run_noisy(&c, &NoiseModel::ideal(), 8192, 5).unwrap();
    // the triangle sector with all V = +1 holds only 000 and 111
    let allowed = [0usize, 0b111];
    assert!(counts.iter().all(|(o, _)| allowed.contains(&o)));
}
