use super::{ClusterState, Palette};
use crate::samples::{dist2, Samples};

/// Work done by one assignment pass.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AssignStats {
    pub distance_evals: u64,
    /// Weighted SSE of the new memberships against the palette.
    pub sse: f64,
    /// Skipped centers that turned out to be strictly closer than the
    /// previous center (or tied with it at a lower index). Only counted by
    /// [`audit_sort_means`]; always zero for an exact scan.
    pub skip_violations: u64,
}

/// Exhaustive nearest-center assignment, lowest index on ties.
pub fn assign_naive(samples: &Samples, palette: &Palette, memberships: &mut [u32]) -> AssignStats {
    let centers = palette.centers();
    let mut sse = 0.0;
    for ((x, w), m) in samples
        .points
        .iter()
        .zip(&samples.weights)
        .zip(memberships.iter_mut())
    {
        let mut best = 0;
        let mut min = f64::INFINITY;
        for (k, c) in centers.iter().enumerate() {
            let d = dist2(x, c);
            if d < min {
                min = d;
                best = k;
            }
        }
        *m = best as u32;
        sse += w * min;
    }
    AssignStats {
        distance_evals: (samples.len() * centers.len()) as u64,
        sse,
        skip_violations: 0,
    }
}

/// Sort-means assignment. Each point starts from its previous center `p`
/// and visits the other centers in row `p` of the order matrix, stopping as
/// soon as `d[p][t] >= 4 ||x - c_p||^2`: by the triangle inequality no later
/// center can be closer than `c_p`.
///
/// At exact equality a center can tie with `c_p`; it is still visited when
/// its index is below `p` so the result matches [`assign_naive`] bit for bit.
/// `state.memberships` must hold the previous iteration's assignment.
pub fn assign_sort_means(
    samples: &Samples,
    palette: &Palette,
    state: &mut ClusterState,
) -> AssignStats {
    sort_means_pass::<false>(samples, palette, state)
}

/// [`assign_sort_means`] that also evaluates every skipped center and counts
/// the skips that would have been unsound. The extra evaluations are not
/// included in `distance_evals`.
pub fn audit_sort_means(
    samples: &Samples,
    palette: &Palette,
    state: &mut ClusterState,
) -> AssignStats {
    sort_means_pass::<true>(samples, palette, state)
}

fn sort_means_pass<const AUDIT: bool>(
    samples: &Samples,
    palette: &Palette,
    state: &mut ClusterState,
) -> AssignStats {
    state.refresh(palette);
    let k = palette.len();
    let centers = palette.centers();
    let mut evals = 0u64;
    let mut violations = 0u64;
    let mut sse = 0.0;

    for (i, x) in samples.points.iter().enumerate() {
        let p = state.memberships[i] as usize;
        let prev_dist = dist2(x, &centers[p]);
        evals += 1;
        let mut best = p;
        let mut min_dist = prev_dist;
        if k > 1 {
            let bound = 4.0 * prev_dist;
            let row = &state.sorted_order[p * k + 1..(p + 1) * k];
            let d_row = &state.sorted_dists[p * k + 1..(p + 1) * k];
            for (pos, (&t, &d_pt)) in row.iter().zip(d_row).enumerate() {
                let t = t as usize;
                // Ties in a row are ordered by index, so once an equal-bound
                // center above `p` is reached every later one is skippable too.
                if d_pt > bound || (d_pt == bound && t > p) {
                    if AUDIT {
                        for &s in &row[pos..] {
                            let s = s as usize;
                            let d = dist2(x, &centers[s]);
                            if d < prev_dist || (d == prev_dist && s < p) {
                                violations += 1;
                            }
                        }
                    }
                    break;
                }
                let dist = dist2(x, &centers[t]);
                evals += 1;
                if dist < min_dist || (dist == min_dist && t < best) {
                    min_dist = dist;
                    best = t;
                }
            }
        }
        state.memberships[i] = best as u32;
        sse += samples.weights[i] * min_dist;
    }

    AssignStats {
        distance_evals: evals,
        sse,
        skip_violations: violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn samples(points: &[[f64; 3]]) -> Samples {
        Samples::new(points.to_vec(), vec![1.0; points.len()])
    }

    #[test]
    fn single_center_takes_everything() {
        let s = samples(&[[1.0, 2.0, 3.0], [200.0, 0.0, 9.0]]);
        let p = Palette::new(vec![[5.0; 3]]).unwrap();
        let mut m = vec![7; 2];
        assign_naive(&s, &p, &mut m);
        assert_eq!(m, [0, 0]);

        let mut state = ClusterState::new(vec![0; 2]);
        let stats = assign_sort_means(&s, &p, &mut state);
        assert_eq!(state.memberships, [0, 0]);
        // Only the distance to the previous center, needed for the SSE.
        assert_eq!(stats.distance_evals, 2);
    }

    #[test]
    fn coincident_points_map_to_own_centers() {
        let pts = [[0.0; 3], [50.0, 0.0, 0.0], [0.0, 90.0, 4.0]];
        let s = samples(&pts);
        let p = Palette::new(pts.to_vec()).unwrap();
        let mut m = vec![0; 3];
        let stats = assign_naive(&s, &p, &mut m);
        assert_eq!(m, [0, 1, 2]);
        assert_eq!(stats.sse, 0.0);
    }

    #[test]
    fn naive_ties_go_to_lowest_index() {
        // Centers 1 and 4 are equidistant from the origin.
        let p = Palette::new(vec![
            [100.0, 0.0, 0.0],
            [3.0, 0.0, 0.0],
            [90.0, 90.0, 0.0],
            [0.0, 0.0, 80.0],
            [0.0, 3.0, 0.0],
        ])
        .unwrap();
        let mut m = vec![0];
        assign_naive(&samples(&[[0.0; 3]]), &p, &mut m);
        assert_eq!(m, [1]);
    }

    #[test]
    fn sort_means_tie_below_previous_center_is_visited() {
        // The point sits at the midpoint of centers 0 and 1, so
        // d[1][0] == 4 * prev_dist exactly and center 0 ties with center 1.
        let p = Palette::new(vec![[0.0; 3], [2.0, 0.0, 0.0]]).unwrap();
        let s = samples(&[[1.0, 0.0, 0.0]]);
        let mut state = ClusterState::new(vec![1]);
        let stats = assign_sort_means(&s, &p, &mut state);
        assert_eq!(state.memberships, [0]);
        assert_eq!(stats.distance_evals, 2);

        // From center 0 the tied center 1 sits on the boundary and is skipped.
        let mut state = ClusterState::new(vec![0]);
        let stats = assign_sort_means(&s, &p, &mut state);
        assert_eq!(state.memberships, [0]);
        assert_eq!(stats.distance_evals, 1);
    }

    #[test]
    fn boundary_candidate_is_skipped() {
        // prev_dist = 1 and d[p][t] = 4: center 1 is never evaluated.
        let p = Palette::new(vec![[10.0, 10.0, 10.0], [12.0, 10.0, 10.0], [40.0, 10.0, 10.0]]).unwrap();
        let s = samples(&[[9.0, 10.0, 10.0]]);
        let mut state = ClusterState::new(vec![0]);
        let stats = audit_sort_means(&s, &p, &mut state);
        assert_eq!(state.memberships, [0]);
        assert_eq!(stats.distance_evals, 1);
        assert_eq!(stats.skip_violations, 0);
    }

    #[test]
    fn sort_means_finds_closer_center() {
        let p = Palette::new(vec![[0.0; 3], [10.0, 0.0, 0.0], [30.0, 0.0, 0.0]]).unwrap();
        let s = samples(&[[9.0, 0.0, 0.0], [29.0, 0.0, 0.0]]);
        let mut state = ClusterState::new(vec![0, 0]);
        assign_sort_means(&s, &p, &mut state);
        assert_eq!(state.memberships, [1, 2]);
    }
}
