use lattice_julia::classify::{classify_parameter, BasinTestConfig};
use lattice_julia::raster::*;
use lattice_julia::{Error, FamilyParams};
use num_complex::Complex64;
use proptest::prelude::*;
use std::sync::OnceLock;

fn pool(n: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap()
}

fn param_spec(w: usize) -> RasterSpec {
    RasterSpec::new(
        Bounds::new(0.5, 4.5, -2.0, 2.0),
        w,
        w,
        RenderMode::Parameter { d: 2 },
        BasinTestConfig::default().with_max_iter(1000),
    )
    .unwrap()
}

fn param_grid() -> &'static VerdictGrid {
    static GRID: OnceLock<VerdictGrid> = OnceLock::new();
    GRID.get_or_init(|| render(&param_spec(48)).unwrap())
}

fn julia_spec(w: usize) -> RasterSpec {
    let p = FamilyParams::from_real(2, 30.0).unwrap();
    RasterSpec::new(
        Bounds::new(-10.0, 16.0, -13.0, 13.0),
        w,
        w,
        RenderMode::Dynamical { params: p },
        BasinTestConfig::default(),
    )
    .unwrap()
}

#[test]
fn thread_count_does_not_change_output() {
    for spec in [param_spec(40), julia_spec(64)] {
        let grids: Vec<VerdictGrid> = [1, 2, 4].iter().map(|&n| pool(n).install(|| render(&spec).unwrap())).collect();
        assert_eq!(grids[0], grids[1]);
        assert_eq!(grids[0], grids[2]);
        for p in Palette::ALL {
            assert_eq!(encode_ppm(&grids[0], p), encode_ppm(&grids[2], p));
        }
    }
}

#[test]
fn image_files_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let grid = param_grid();
    let a = dir.path().join("a.ppm");
    let b = dir.path().join("b.ppm");
    write_image(grid, Palette::DepthCycle, &a).unwrap();
    write_image(grid, Palette::DepthCycle, &b).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let meta: serde_json::Value = serde_json::from_slice(&std::fs::read(sidecar_path(&a)).unwrap()).unwrap();
    assert_eq!(meta["palette"], "depth-cycle");
    assert_eq!(meta["format_version"], FORMAT_VERSION);
    assert_eq!(meta["spec"]["width"], 48);
    assert_eq!(meta["classifier"]["max_iter"], 1000);
}

#[test]
fn io_errors_name_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("x.ppm");
    match write_image(param_grid(), Palette::PaperBw, &path) {
        Err(Error::Io(msg)) => assert!(msg.contains("missing"), "{msg}"),
        other => panic!("expected an I/O error, got {other:?}"),
    }
}

// Depths far above 100 come from orbits that shadow the Julia set for
// hundreds of steps, where last-bit differences between the coarse and fine
// center coordinates can change the outcome.
#[test]
fn refinement_keeps_finite_depths() {
    for w in [24, 48] {
        let coarse = param_spec(w);
        let a = render(&coarse).unwrap();
        let b = render(&coarse.refined()).unwrap();
        let (mut shared, mut deep_mismatch) = (0, 0);
        for row in 0..coarse.height {
            for col in 0..coarse.width {
                let (x, y) = (a.get(col, row), b.get(2 * col + 1, 2 * row + 1));
                if let (Some(da), Some(db)) = (x.depth, y.depth) {
                    shared += 1;
                    if da != db {
                        assert!(da.min(db) > 100, "cell ({col}, {row}): {da} vs {db}");
                        deep_mismatch += 1;
                    }
                }
            }
        }
        assert!(deep_mismatch * 100 <= shared, "{deep_mismatch} of {shared}");
    }
}

#[test]
fn two_basin_components_for_lambda_30() {
    let g = render(&julia_spec(256)).unwrap();
    assert_eq!(g.components(|c| c.kind == CellKind::AttractedToOne, Connectivity::Four), 1);
    assert_eq!(g.components(|c| c.kind == CellKind::AttractedToInfinity, Connectivity::Four), 1);
}

#[test]
fn black_locus_is_dominated_by_one_component() {
    let spec = RasterSpec::new(
        DEFAULT_PARAM_BOUNDS,
        256,
        256,
        RenderMode::Parameter { d: 2 },
        BasinTestConfig::default(),
    )
    .unwrap();
    let g = render(&spec).unwrap();
    let dark: Vec<bool> = g.cells.iter().map(|c| c.kind.is_dark()).collect();
    let total = dark.iter().filter(|&&x| x).count();
    // Largest component by flood fill from the real-axis cell at λ = 0.7.
    let (c0, r0) = spec.locate(Complex64::new(0.7, 0.0)).unwrap();
    assert!(dark[r0 * 256 + c0]);
    let mut seen = vec![false; dark.len()];
    let mut stack = vec![r0 * 256 + c0];
    seen[stack[0]] = true;
    let mut size = 0;
    while let Some(i) = stack.pop() {
        size += 1;
        let (x, y) = ((i % 256) as i64, (i / 256) as i64);
        for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            let (a, b) = (x + dx, y + dy);
            if (0..256).contains(&a) && (0..256).contains(&b) {
                let j = b as usize * 256 + a as usize;
                if dark[j] && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    assert!(size as f64 >= 0.95 * total as f64, "{size} of {total}");
    // The window is symmetric under conjugation.
    let mismatched = (0..256 * 256).filter(|&i| dark[i] != dark[(255 - i / 256) * 256 + i % 256]).count();
    assert!(mismatched as f64 <= 0.005 * total as f64, "{mismatched}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn grid_agrees_with_standalone_classification(re in 0.5f64..4.5, im in -2.0f64..2.0) {
        let grid = param_grid();
        let (col, row) = grid.spec.locate(Complex64::new(re, im)).unwrap();
        let center = grid.spec.center(col, row);
        let p = FamilyParams::new(2, center).unwrap();
        let v = classify_parameter(&p, &grid.spec.cfg);
        prop_assert_eq!(grid.get(col, row).param_verdict(), Some(v));
    }
}
