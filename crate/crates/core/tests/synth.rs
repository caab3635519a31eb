use mstc_core::{
    connected_components, generate, knn_graph, percentile_threshold, SynthKind, SynthSpec,
};

fn two_blobs(separation: f64) -> SynthSpec {
    let c = 63.5;
    SynthSpec::new(
        SynthKind::MultiBlob {
            centers: vec![[c, c - separation / 2.0], [c, c + separation / 2.0]],
            sigma: 3.0,
            speckle: 0.0,
        },
        128,
        128,
        0,
    )
}

fn components(spec: &SynthSpec, k: usize) -> usize {
    let salient = percentile_threshold(&generate(spec).unwrap(), 80.0).unwrap();
    connected_components(&knn_graph(&salient.points, k).unwrap()).0
}

#[test]
fn well_separated_blobs_form_two_components() {
    let spec = two_blobs(80.0);
    assert_eq!(components(&spec, 4), 2);
    // a 1-NN graph over a filled region splits into mutual-nearest pairs
    assert!(components(&spec, 1) > 2);
}

#[test]
fn overlapping_blobs_merge() {
    assert_eq!(components(&two_blobs(40.0), 4), 1);
}

#[test]
fn every_kind_is_deterministic_and_finite() {
    let specs = [
        SynthSpec::gaussian_blob(40, 30, [10.0, 12.0], 4.0),
        two_blobs(60.0),
        SynthSpec::uniform_noise(17, 23, 5),
        SynthSpec::new(
            SynthKind::Ring {
                center: [20.0, 20.0],
                radius: 10.0,
                sigma: 1.5,
                speckle: 0.3,
            },
            41,
            41,
            8,
        ),
        SynthSpec::new(
            SynthKind::FragmentedNoisePlusBlob {
                center: [5.0, 5.0],
                sigma: 2.0,
                noise_amplitude: 0.5,
            },
            32,
            32,
            1,
        ),
    ];
    for spec in &specs {
        let a = generate(spec).unwrap();
        assert_eq!(a, generate(spec).unwrap());
        assert_eq!((a.height(), a.width()), (spec.height, spec.width));
        assert!(a.values().iter().all(|v| v.is_finite() && *v >= 0.0));
    }
}

#[test]
fn ring_peaks_on_its_radius() {
    let spec = SynthSpec::new(
        SynthKind::Ring {
            center: [32.0, 32.0],
            radius: 12.0,
            sigma: 1.0,
            speckle: 0.0,
        },
        65,
        65,
        0,
    );
    let m = generate(&spec).unwrap();
    assert_eq!(m.get(32, 44), 1.0);
    assert_eq!(m.get(20, 32), 1.0);
    assert!(m.get(32, 32) < 1e-30);
}
