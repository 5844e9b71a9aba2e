// Quality functions t(c), the weighted objective G and its marginal gains.

use camnet::discretize::EnvironmentPoints;
use camnet::objective::{
    g_eval, marginal_gain, regularized_objective, CustomTable, QualityFunction, QualityWeights, Regularizer,
};
use camnet::visibility::VisibilityMatrix;
use camnet::Point3;

fn main() -> camnet::Result<()> {
    let functions = [
        QualityFunction::Scp,
        QualityFunction::threshold(2)?,
        QualityFunction::redundancy(QualityWeights::new(vec![0.6, 0.3, 0.1])?),
        QualityFunction::redundancy(QualityWeights::sample(7, 6)?),
        QualityFunction::CustomTable { table: CustomTable::new(vec![1.0, 1.5, 1.75])? },
    ];
    for q in &functions {
        let t: Vec<String> = (0..6).map(|c| format!("{:.3}", q.t(c))).collect();
        println!("{:<60} t(0..6) = [{}]", q.name(), t.join(", "));
    }

    // Four points, three cameras.
    let rows =
        vec![vec![true, true, false], vec![true, false, false], vec![false, true, true], vec![false, false, true]];
    let matrix = VisibilityMatrix::from_rows(&rows, 3)?;
    let points = EnvironmentPoints::with_weights(vec![Point3::origin(); 4], vec![1.0, 2.0, 1.0, 0.5])?;
    let q = &functions[2];
    for u in [&[][..], &[0], &[0, 1], &[0, 1, 2]] {
        println!("G({u:?}) = {:.3}", g_eval(&matrix, &points, u, q)?);
    }
    println!("gain of 2 given {{0}}: {:.3}", marginal_gain(&matrix, &points, &[0], 2, q)?);
    println!("gain of 2 given {{0,1}}: {:.3}", marginal_gain(&matrix, &points, &[0, 1], 2, q)?);

    let positions = vec![Point3::new(0.0, 0.0, 3.0), Point3::new(0.5, 0.0, 3.0), Point3::new(9.0, 0.0, 3.0)];
    let reg = Regularizer::proximity_from_positions(0.5, 2.0, positions)?;
    println!("with proximity penalty, G({{0,1}}) = {:.3}", regularized_objective(&matrix, &points, &[0, 1], q, &reg)?);
    Ok(())
}
