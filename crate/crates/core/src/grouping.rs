//! Representative selection: the Gonzalez farthest-point k-center sweep over
//! a distance matrix, nearest-representative assignment, and per-cluster
//! spread summaries.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::pdist::DistanceMatrix;

/// Output of the k-center sweep: representatives (in selection order), the
/// nearest-representative assignment, and per-representative statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupingResult {
    /// Sample indices of the k representatives, in selection order.
    pub representatives: Vec<usize>,
    /// `assignment[i]` is the sample index of the representative of sample i.
    /// Representatives are assigned to themselves; other ties break toward
    /// the lowest representative sample index.
    pub assignment: Vec<usize>,
    /// Member count per representative (selection order), self included.
    pub member_counts: Vec<usize>,
    /// Population variance of member distances per representative.
    pub spreads: Vec<f64>,
    /// Distance from each representative to its closest other
    /// representative; `None` when k = 1.
    pub nearest_other_rep: Vec<Option<f64>>,
}

impl GroupingResult {
    /// Largest distance from any sample to its representative.
    pub fn max_radius(&self, d: &DistanceMatrix) -> f64 {
        (0..self.assignment.len())
            .map(|i| d.get(i, self.assignment[i]))
            .fold(0.0, f64::max)
    }

    /// Rebuilds the derived statistics from representatives and assignment,
    /// validating consistency with `d`. Used when loading a grouping from
    /// disk.
    pub fn rebuild(d: &DistanceMatrix, representatives: Vec<usize>, assignment: Vec<usize>) -> Result<Self> {
        let m = d.m();
        if assignment.len() != m {
            return Err(Error::Dimension {
                expected: m,
                got: assignment.len(),
            });
        }
        for &r in &representatives {
            if r >= m {
                return Err(Error::Param(format!("representative {r} out of range")));
            }
        }
        let expected = assign_all(d, &representatives);
        if expected != assignment {
            return Err(Error::Contract(
                "assignment is not the nearest-representative map for this matrix".into(),
            ));
        }
        Ok(finish(d, representatives, assignment))
    }
}

fn assign_all(d: &DistanceMatrix, reps: &[usize]) -> Vec<usize> {
    (0..d.m())
        .map(|i| {
            if reps.contains(&i) {
                return i;
            }
            let mut best = reps[0];
            for &c in &reps[1..] {
                let dist = d.get(i, c);
                let cur = d.get(i, best);
                if dist < cur || (dist == cur && c < best) {
                    best = c;
                }
            }
            best
        })
        .collect()
}

fn finish(d: &DistanceMatrix, representatives: Vec<usize>, assignment: Vec<usize>) -> GroupingResult {
    let k = representatives.len();
    let mut member_counts = vec![0usize; k];
    let mut sums = vec![0.0f64; k];
    let mut sq_sums = vec![0.0f64; k];
    for (i, &rep) in assignment.iter().enumerate() {
        let slot = representatives
            .iter()
            .position(|&r| r == rep)
            .expect("assignment targets a representative");
        let dist = d.get(i, rep);
        member_counts[slot] += 1;
        sums[slot] += dist;
        sq_sums[slot] += dist * dist;
    }
    let spreads = (0..k)
        .map(|c| {
            let count = member_counts[c] as f64;
            let mean = sums[c] / count;
            (sq_sums[c] / count - mean * mean).max(0.0)
        })
        .collect();
    let nearest_other_rep = representatives
        .iter()
        .map(|&r| {
            representatives
                .iter()
                .filter(|&&o| o != r)
                .map(|&o| d.get(r, o))
                .min_by(|a, b| a.partial_cmp(b).unwrap())
        })
        .collect();
    GroupingResult {
        representatives,
        assignment,
        member_counts,
        spreads,
        nearest_other_rep,
    }
}

/// Gonzalez farthest-point traversal: starting from `first`, repeatedly adds
/// the sample farthest from its nearest current representative (ties toward
/// the lowest index) until k representatives are chosen. A 2-approximation
/// to the optimal k-center radius on metric inputs. Deterministic.
pub fn gonzalez_kcenter(d: &DistanceMatrix, k: usize, first: usize) -> Result<GroupingResult> {
    let m = d.m();
    if k < 1 || k > m {
        return Err(Error::Param(format!("k = {k} outside 1..={m}")));
    }
    if first >= m {
        return Err(Error::Param(format!("first center {first} out of range")));
    }
    let mut reps = Vec::with_capacity(k);
    let mut is_rep = vec![false; m];
    reps.push(first);
    is_rep[first] = true;
    // Distance from each sample to its nearest selected representative.
    let mut nearest: Vec<f64> = (0..m).map(|i| d.get(i, first)).collect();
    while reps.len() < k {
        let mut best = usize::MAX;
        let mut best_dist = f64::NEG_INFINITY;
        for i in 0..m {
            if !is_rep[i] && nearest[i] > best_dist {
                best_dist = nearest[i];
                best = i;
            }
        }
        reps.push(best);
        is_rep[best] = true;
        for i in 0..m {
            let dist = d.get(i, best);
            if dist < nearest[i] {
                nearest[i] = dist;
            }
        }
    }
    let assignment = assign_all(d, &reps);
    Ok(finish(d, reps, assignment))
}

/// Per-representative summary: member count, the member-distance list that
/// feeds the distance histograms, its variance, and the distance to the
/// closest other representative.
#[derive(Debug, Clone, PartialEq)]
pub struct RepSummary {
    pub rep: usize,
    pub member_count: usize,
    pub member_distances: Vec<f64>,
    pub spread_variance: f64,
    pub nearest_other_rep: Option<f64>,
}

pub fn summarize_grouping(d: &DistanceMatrix, g: &GroupingResult) -> Vec<RepSummary> {
    g.representatives
        .iter()
        .enumerate()
        .map(|(slot, &rep)| {
            let member_distances: Vec<f64> = g
                .assignment
                .iter()
                .enumerate()
                .filter_map(|(i, &r)| (r == rep).then(|| d.get(i, rep)))
                .collect();
            RepSummary {
                rep,
                member_count: g.member_counts[slot],
                member_distances,
                spread_variance: g.spreads[slot],
                nearest_other_rep: g.nearest_other_rep[slot],
            }
        })
        .collect()
}

/// Writes representatives and the assignment vector: line 1 `reps i...`,
/// line 2 `phi v...`.
pub fn write_grouping(path: &Path, g: &GroupingResult) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "reps")?;
    for &r in &g.representatives {
        write!(w, " {r}")?;
    }
    writeln!(w)?;
    write!(w, "phi")?;
    for &a in &g.assignment {
        write!(w, " {a}")?;
    }
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Reads the `(representatives, assignment)` pair written by
/// [`write_grouping`]; pair with [`GroupingResult::rebuild`] to recover the
/// full statistics.
pub fn read_grouping(path: &Path) -> Result<(Vec<usize>, Vec<usize>)> {
    let reader = BufReader::new(File::open(path)?);
    let mut reps = None;
    let mut phi = None;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let mut fields = line.split_whitespace();
        let tag = fields.next().unwrap_or_default();
        let values: Vec<usize> = fields
            .map(|f| {
                f.parse().map_err(|_| Error::Parse {
                    line: idx + 1,
                    msg: format!("bad index '{f}'"),
                })
            })
            .collect::<Result<_>>()?;
        match tag {
            "reps" => reps = Some(values),
            "phi" => phi = Some(values),
            "" => {}
            other => {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: format!("unknown record '{other}'"),
                })
            }
        }
    }
    match (reps, phi) {
        (Some(r), Some(p)) => Ok((r, p)),
        _ => Err(Error::Input("grouping file needs reps and phi lines".into())),
    }
}

/// Writes the per-representative summary table as CSV.
pub fn write_grouping_summary(path: &Path, summaries: &[RepSummary]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "rep,member_count,spread_variance,nearest_other_rep")?;
    for s in summaries {
        let nearest = s
            .nearest_other_rep
            .map(|v| format!("{v}"))
            .unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{}",
            s.rep,
            s.member_count,
            s.spread_variance,
            nearest
        )?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix_from_positions(xs: &[f64]) -> DistanceMatrix {
        let m = xs.len();
        let mut vals = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                vals[i * m + j] = (xs[i] - xs[j]).abs();
            }
        }
        DistanceMatrix::new_raw(m, "test", vals).unwrap()
    }

    #[test]
    fn saturated_k_assigns_everything_to_itself() {
        let d = matrix_from_positions(&[0.0, 1.0, 5.0]);
        let g = gonzalez_kcenter(&d, 3, 0).unwrap();
        assert_eq!(g.assignment, vec![0, 1, 2]);
        assert_eq!(g.max_radius(&d), 0.0);
    }

    #[test]
    fn three_positions_two_centers() {
        // Positions {0, 1, 10}: starting at 0, the farthest point is 10, and
        // the optimal radius 1 is attained.
        let d = matrix_from_positions(&[0.0, 1.0, 10.0]);
        let g = gonzalez_kcenter(&d, 2, 0).unwrap();
        assert_eq!(g.representatives, vec![0, 2]);
        assert_eq!(g.assignment, vec![0, 0, 2]);
        assert_eq!(g.max_radius(&d), 1.0);
        assert_eq!(g.member_counts, vec![2, 1]);
        assert_eq!(g.nearest_other_rep, vec![Some(10.0), Some(10.0)]);
    }

    #[test]
    fn summary_matches_result() {
        let d = matrix_from_positions(&[0.0, 1.0, 10.0]);
        let g = gonzalez_kcenter(&d, 2, 0).unwrap();
        let s = summarize_grouping(&d, &g);
        assert_eq!(s[0].rep, 0);
        assert_eq!(s[0].member_distances, vec![0.0, 1.0]);
        assert_eq!(s[1].rep, 2);
        assert_eq!(s[1].nearest_other_rep, Some(10.0));
        // Population variance of {0, 1} is 0.25.
        assert_eq!(s[0].spread_variance, 0.25);
    }

    #[test]
    fn k_equals_one_has_no_other_rep() {
        let d = matrix_from_positions(&[0.0, 1.0, 10.0]);
        let g = gonzalez_kcenter(&d, 1, 2).unwrap();
        assert_eq!(g.nearest_other_rep, vec![None]);
        assert_eq!(g.assignment, vec![2, 2, 2]);
    }

    #[test]
    fn all_zero_matrix_degenerates_cleanly() {
        let d = DistanceMatrix::new_raw(3, "test", vec![0.0; 9]).unwrap();
        let g = gonzalez_kcenter(&d, 2, 0).unwrap();
        assert_eq!(g.representatives, vec![0, 1]);
        let s = summarize_grouping(&d, &g);
        assert!(s.iter().all(|r| r.spread_variance == 0.0));
        assert!(s
            .iter()
            .all(|r| r.member_distances.iter().all(|&v| v == 0.0)));
        // Saturation stays well-defined even with all-duplicate samples.
        let g = gonzalez_kcenter(&d, 3, 0).unwrap();
        assert_eq!(g.representatives, vec![0, 1, 2]);
        assert_eq!(g.assignment, vec![0, 1, 2]);
    }

    #[test]
    fn k_out_of_range_is_param_error() {
        let d = matrix_from_positions(&[0.0, 1.0]);
        assert!(matches!(
            gonzalez_kcenter(&d, 3, 0),
            Err(Error::Param(_))
        ));
        assert!(matches!(
            gonzalez_kcenter(&d, 0, 0),
            Err(Error::Param(_))
        ));
    }

    #[test]
    fn radius_is_monotone_in_k() {
        let d = matrix_from_positions(&[0.0, 0.5, 2.0, 3.5, 7.0, 7.2, 9.9]);
        let mut prev = f64::INFINITY;
        for k in 1..=7 {
            let g = gonzalez_kcenter(&d, k, 0).unwrap();
            let r = g.max_radius(&d);
            assert!(r <= prev, "radius must not grow with k");
            prev = r;
        }
    }

    #[test]
    fn phi_is_nearest_representative() {
        let d = matrix_from_positions(&[0.0, 0.5, 2.0, 3.5, 7.0, 7.2, 9.9]);
        let g = gonzalez_kcenter(&d, 3, 1).unwrap();
        for i in 0..7 {
            for &c in &g.representatives {
                assert!(d.get(i, c) >= d.get(i, g.assignment[i]));
            }
        }
    }

    #[test]
    fn grouping_file_round_trip() {
        let d = matrix_from_positions(&[0.0, 0.5, 2.0, 3.5, 7.0]);
        let g = gonzalez_kcenter(&d, 2, 0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("grouping.txt");
        write_grouping(&path, &g).unwrap();
        let (reps, phi) = read_grouping(&path).unwrap();
        let g2 = GroupingResult::rebuild(&d, reps, phi).unwrap();
        assert_eq!(g, g2);
    }
}
