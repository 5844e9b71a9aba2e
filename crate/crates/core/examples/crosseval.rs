//! Cross-evaluate solutions optimized for different quality functions on the
//! harbour scene. Each row is a function, each column the solution optimized
//! for one function; entries are G_i(U_j) / G_i(U_i).

use camnet::discretize::{sample_segment_viewpoints, voxelize_box};
use camnet::evaluation::{cross_evaluate, evaluate_external_solution};
use camnet::objective::{QualityFunction, QualityWeights, Solution};
use camnet::optimize::{OptimizerConfig, OptimizerMethod};
use camnet::scenes::harbour;
use camnet::visibility::{build_visibility_matrix, default_depth_bias, VisibilityMethod};

fn main() -> camnet::Result<()> {
    let h = harbour(10_000);
    let points = voxelize_box(&h.roi)?;
    let candidates = sample_segment_viewpoints(&h.beams, h.positions_per_beam, &h.orientations, h.spec)?;
    let bias = default_depth_bias(&h.mesh.bounds(), &h.spec);
    let matrix = build_visibility_matrix(&h.mesh, &candidates, &points, VisibilityMethod::Zbuffer, bias);

    let mut functions = vec![QualityFunction::Scp, QualityFunction::threshold(3)?];
    for seed in 0..4 {
        functions.push(QualityFunction::redundancy(QualityWeights::sample(seed, 6)?));
    }
    let table = cross_evaluate(&matrix, &points, &functions, &OptimizerConfig::new(OptimizerMethod::LazyGreedy, 10))?;

    table.write_csv(std::io::stdout().lock())?;
    println!("mean ratio per solution: {:.4?}", table.mean_ratio);
    println!("coverage per solution:   {:.4?}", table.coverage);

    let hand_picked = Solution::from_ids((0..600).step_by(60).collect())?;
    let row = evaluate_external_solution(&matrix, &points, &hand_picked, &table)?;
    println!("evenly spaced cameras: {row:.4?}");
    Ok(())
}
