use oda::data::class2d_two;
use oda::multires::{build_pyramid, reduce, MultiResSample, ResolutionPyramid};
use oda::tree::{SplitCriterion, Tree, TreeSpec};
use oda::{AnnealingConfig, DivergenceKind, Task};

fn spec(seed: u64) -> TreeSpec {
    let split = SplitCriterion {
        k_target: vec![4, 8],
        max_depth: 2,
        ..Default::default()
    };
    let config = AnnealingConfig {
        max_iters_per_level: 5_000,
        ..Default::default()
    };
    TreeSpec::new(config, split, DivergenceKind::SquaredEuclidean, Task::Classification, seed).with_pyramid(ResolutionPyramid::new(1))
}

#[test]
fn supplied_and_computed_pyramids_train_the_same_tree() {
    let data = class2d_two(8);
    let mut computed = Tree::new(spec(8)).unwrap();
    let mut supplied = Tree::new(spec(8)).unwrap();
    for s in data.stream().take(300_000) {
        computed.update(s.clone()).unwrap();
        // coarse level built by hand instead of through the pyramid
        let levels = vec![s.x.clone(), reduce(&s.x)];
        let mr = MultiResSample { levels };
        supplied.update_multires(&mr, s.target).unwrap();
    }
    assert_eq!(computed.cell_count(), supplied.cell_count());
    for (a, b) in computed.nodes().iter().zip(supplied.nodes()) {
        assert_eq!(a.path_id, b.path_id);
        assert_eq!(a.oda.locations(), b.oda.locations());
    }
}

#[test]
fn root_routes_on_the_coarse_level() {
    let mut tree = Tree::new(spec(9)).unwrap();
    tree.fit(class2d_two(9).stream().take(300_000)).unwrap();
    assert_eq!(tree.root.oda.dim(), Some(1));
    let probes: Vec<Vec<f64>> = class2d_two(9).stream().skip(1_000_000).take(2_000).map(|s| s.x).collect();
    for x in &probes {
        // points with the same coordinate average share a root cell
        let swapped = vec![x[1], x[0]];
        let a = tree.predict_cell(x).unwrap();
        let b = tree.predict_cell(&swapped).unwrap();
        assert_eq!(a.path_id.get(..2), b.path_id.get(..2), "{x:?}");
        assert_eq!(build_pyramid(x, 1)[1], build_pyramid(&swapped, 1)[1]);
    }
}
