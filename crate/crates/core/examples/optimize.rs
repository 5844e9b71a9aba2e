//! Select k cameras on the office scene with every optimizer and compare.

use camnet::discretize::{sample_area_viewpoints, sample_points_uniform, SampleRegion};
use camnet::objective::{coverage, QualityFunction, Regularizer};
use camnet::optimize::{brute_force, greedy, lazy_greedy, random_solution, DEFAULT_BRUTE_FORCE_BUDGET};
use camnet::scenes::office;
use camnet::visibility::{build_visibility_matrix, default_depth_bias, VisibilityMethod};

fn main() -> camnet::Result<()> {
    let o = office();
    let points = sample_points_uniform(&SampleRegion::Aabb(o.interior), 5000, 1)?;
    let candidates = sample_area_viewpoints(&o.ceiling, o.ceiling_height, 300, o.spec, 5)?;
    let bias = default_depth_bias(&o.mesh.bounds(), &o.spec);
    let matrix = build_visibility_matrix(&o.mesh, &candidates, &points, VisibilityMethod::Zbuffer, bias);
    let q = QualityFunction::threshold(2)?;
    let none = Regularizer::none();

    let g = greedy(&matrix, &points, 8, &q, &none)?;
    let l = lazy_greedy(&matrix, &points, 8, &q, &none)?;
    println!("greedy      {:?} value {:.1} ({} evaluations)", g.solution.ids, g.value, g.evaluations);
    println!("lazy greedy {:?} value {:.1} ({} evaluations)", l.solution.ids, l.value, l.evaluations);
    println!("identical: {}", g.solution == l.solution && g.value.to_bits() == l.value.to_bits());
    println!("gains: {:.1?}", g.gains);
    println!("coverage {:.3}", coverage(&matrix, &points, &g.solution.ids)?);

    let r = random_solution(candidates.len(), 8, 3)?;
    println!("random {:?} coverage {:.3}", r.ids, coverage(&matrix, &points, &r.ids)?);

    // Exhaustive search is only feasible on a small slice of the candidates.
    let small: Vec<_> = (0..20).map(|v| matrix.column(v).clone()).collect();
    let small = camnet::visibility::VisibilityMatrix::from_columns(points.len(), small)?;
    let exact = brute_force(&small, &points, 3, &q, &none, DEFAULT_BRUTE_FORCE_BUDGET)?;
    let approx = greedy(&small, &points, 3, &q, &none)?;
    println!(
        "first 20 candidates, k=3: optimum {:.1} {:?}, greedy {:.1} ({:.1}% of optimum)",
        exact.value,
        exact.solution.ids,
        approx.value,
        100.0 * approx.value / exact.value
    );

    let positions = candidates.viewpoints().iter().map(|v| v.pose.position).collect();
    let reg = Regularizer::proximity_from_positions(50.0, 6.0, positions)?;
    let spread = greedy(&matrix, &points, 8, &q, &reg)?;
    println!(
        "with separation penalty: {:?} value {:.1} warnings {:?}",
        spread.solution.ids, spread.value, spread.warnings
    );
    Ok(())
}
