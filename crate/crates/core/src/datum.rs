//! Initial data on a radial grid.

use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::manifold::RadialGrid;
use crate::quadrature::GaussRule;
use crate::spectral::RadialField;

/// Cell average of the indicator of `B_radius`, so that its discrete mass
/// equals the volume of the ball exactly.
pub fn ball_indicator(grid: &Arc<RadialGrid>, radius: f64) -> Result<RadialField> {
    if !(radius > 0.0 && radius < grid.r_max()) {
        return Err(invalid("radius", format!("need 0 < radius < r_max, got {radius}")));
    }
    let cover = grid.ball_coverage(radius);
    let values = cover.iter().zip(grid.weights()).map(|(c, w)| c / w).collect();
    RadialField::new(grid.clone(), values)
}

/// `1` on `B_plateau` and `(plateau / r)^a` outside.
pub fn power_tail(grid: &Arc<RadialGrid>, a: f64, plateau: f64) -> Result<RadialField> {
    if !(a > 0.0) || !(plateau > 0.0) {
        return Err(invalid("datum_a", format!("need a > 0 and plateau > 0, got {a}, {plateau}")));
    }
    Ok(RadialField::from_fn(grid.clone(), |r| if r <= plateau { 1.0 } else { (plateau / r).powf(a) }))
}

/// Sum of `J` thin annuli centred at radii `e^j`, each of unit volume.
///
/// Every annulus is represented by its cell averages, so each contributes
/// exactly one unit of discrete mass.
pub fn bump_sum(grid: &Arc<RadialGrid>, count: usize) -> Result<RadialField> {
    if count == 0 {
        return Err(invalid("datum_j", "need at least one bump"));
    }
    let m = grid.manifold();
    let last = (count as f64).exp();
    if last + 1.0 >= grid.r_max() {
        return Err(invalid(
            "datum_j",
            format!("bump at radius {last:.3} does not fit below r_max = {}", grid.r_max()),
        ));
    }
    let rule = GaussRule::new(16);
    let mut values = vec![0.0; grid.len()];
    for j in 1..=count {
        let centre = (j as f64).exp();
        let area = m.sphere_area(centre)?;
        let mut half = 0.5 / area;
        for _ in 0..60 {
            let vol = m.annulus_volume(&rule, centre - half, centre + half);
            if !(vol > 0.0) {
                break;
            }
            let next = half / vol;
            if ((next - half) / half).abs() < 1e-14 {
                half = next;
                break;
            }
            half = next;
        }
        let k = grid.nearest_node(centre);
        let (lo, hi) = (grid.edges()[k], grid.edges()[k + 1]);
        if centre - half >= lo && centre + half <= hi {
            // Thinner than its cell: the cell average carries the whole unit.
            values[k] += 1.0 / grid.weights()[k];
            continue;
        }
        let outer = grid.ball_coverage(centre + half);
        let inner = grid.ball_coverage(centre - half);
        let mass: f64 = outer.iter().zip(&inner).map(|(o, i)| o - i).sum();
        for (k, v) in values.iter_mut().enumerate() {
            *v += (outer[k] - inner[k]) / mass / grid.weights()[k];
        }
    }
    RadialField::new(grid.clone(), values)
}

/// Truncate a datum to `B_radius` and cap it at `height`.
pub fn truncate(u: &RadialField, radius: f64, height: f64) -> RadialField {
    let nodes = u.grid().nodes();
    let values = u
        .values()
        .iter()
        .zip(nodes)
        .map(|(&v, &r)| if r < radius { v.min(height) } else { 0.0 })
        .collect();
    RadialField::new(u.grid().clone(), values).expect("truncation keeps values finite")
}

/// Linear interpolation of tabulated `(r, value)` pairs onto the grid;
/// zero beyond the last radius.
pub fn from_table(grid: &Arc<RadialGrid>, table: &[(f64, f64)]) -> Result<RadialField> {
    if table.len() < 2 || table.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(invalid("datum_file", "need at least two rows with increasing radii"));
    }
    let values = grid
        .nodes()
        .iter()
        .map(|&r| {
            if r <= table[0].0 {
                return table[0].1;
            }
            if r > table[table.len() - 1].0 {
                return 0.0;
            }
            let k = table.partition_point(|p| p.0 < r);
            let (r0, v0) = table[k - 1];
            let (r1, v1) = table[k];
            v0 + (v1 - v0) * (r - r0) / (r1 - r0)
        })
        .collect();
    RadialField::new(grid.clone(), values)
}
