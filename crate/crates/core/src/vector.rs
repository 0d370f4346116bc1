//! Distance-based order statistics over a 3x3 window of color vectors.
//!
//! Every pixel of a window gets a dissimilarity score: either the plain sum of
//! its L2 distances to the other window members, or a rank-weighted sum where
//! the `r`-th smallest distance is scaled by `f(r)`. The vector median (VMF)
//! and the rank-weighted vector median (RWVMF) select the window member with
//! the lowest score. Ties go to the lowest window index, so the center wins
//! whenever it is among the minimizers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{Pixel, Window, WINDOW_LEN};

/// Euclidean distance between two RGB vectors.
#[inline]
pub fn l2_distance(a: Pixel, b: Pixel) -> f64 {
    (squared_distance(a, b) as f64).sqrt()
}

#[inline]
pub(crate) fn squared_distance(a: Pixel, b: Pixel) -> u32 {
    let dr = a.r as i32 - b.r as i32;
    let dg = a.g as i32 - b.g as i32;
    let db = a.b as i32 - b.b as i32;
    (dr * dr + dg * dg + db * db) as u32
}

/// Pairwise L2 distances between the members of a window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistanceMatrix {
    d: [[f64; WINDOW_LEN]; WINDOW_LEN],
}

impl DistanceMatrix {
    pub fn new(w: &Window) -> Self {
        let mut d = [[0.0; WINDOW_LEN]; WINDOW_LEN];
        for i in 0..WINDOW_LEN {
            for j in i + 1..WINDOW_LEN {
                let v = l2_distance(w.values[i], w.values[j]);
                d[i][j] = v;
                d[j][i] = v;
            }
        }
        DistanceMatrix { d }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i][j]
    }

    pub fn row(&self, i: usize) -> &[f64; WINDOW_LEN] {
        &self.d[i]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WeightingKind {
    /// `f(r) = 1`
    #[serde(rename = "uniform")]
    Uniform,
    /// `f(r) = 1/r`
    #[serde(rename = "1/r")]
    Reciprocal,
    /// `f(r) = 1/r²`
    #[serde(rename = "1/r2")]
    ReciprocalSquared,
    /// A caller-supplied table.
    #[serde(rename = "custom")]
    Custom,
}

/// Weights applied to ranked distances, `table[r - 1] = f(r)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankWeighting {
    kind: WeightingKind,
    table: [f64; WINDOW_LEN],
}

impl RankWeighting {
    pub fn uniform() -> Self {
        RankWeighting {
            kind: WeightingKind::Uniform,
            table: [1.0; WINDOW_LEN],
        }
    }

    pub fn reciprocal() -> Self {
        RankWeighting {
            kind: WeightingKind::Reciprocal,
            table: std::array::from_fn(|i| 1.0 / (i + 1) as f64),
        }
    }

    pub fn reciprocal_squared() -> Self {
        RankWeighting {
            kind: WeightingKind::ReciprocalSquared,
            table: std::array::from_fn(|i| 1.0 / ((i + 1) * (i + 1)) as f64),
        }
    }

    /// A custom table; weights must be positive, finite and non-increasing.
    pub fn from_table(table: [f64; WINDOW_LEN]) -> Result<Self> {
        if table.iter().any(|&v| !(v.is_finite() && v > 0.0)) {
            return Err(Error::config(
                "weighting",
                "weights must be positive and finite",
            ));
        }
        if table.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::config(
                "weighting",
                "weights must be non-increasing in rank",
            ));
        }
        Ok(RankWeighting {
            kind: WeightingKind::Custom,
            table,
        })
    }

    pub fn kind(&self) -> WeightingKind {
        self.kind
    }

    pub fn table(&self) -> &[f64; WINDOW_LEN] {
        &self.table
    }
}

impl Default for RankWeighting {
    fn default() -> Self {
        RankWeighting::reciprocal()
    }
}

impl FromStr for RankWeighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" | "1" => Ok(RankWeighting::uniform()),
            "1/r" => Ok(RankWeighting::reciprocal()),
            "1/r2" | "1/r^2" => Ok(RankWeighting::reciprocal_squared()),
            other => Err(Error::config(
                "weighting",
                format!("expected uniform, 1/r or 1/r2, got `{other}`"),
            )),
        }
    }
}

impl fmt::Display for RankWeighting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self.kind {
            WeightingKind::Uniform => "uniform",
            WeightingKind::Reciprocal => "1/r",
            WeightingKind::ReciprocalSquared => "1/r2",
            WeightingKind::Custom => "custom",
        })
    }
}

/// One dissimilarity score per window member.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AggregateScores {
    pub scores: [f64; WINDOW_LEN],
}

impl AggregateScores {
    /// Index of the smallest score, lowest index on ties.
    pub fn argmin(&self) -> usize {
        let mut best = 0;
        for i in 1..WINDOW_LEN {
            if self.scores[i] < self.scores[best] {
                best = i;
            }
        }
        best
    }

    pub fn min(&self) -> f64 {
        self.scores[self.argmin()]
    }

    pub fn center(&self) -> f64 {
        self.scores[0]
    }
}

fn plain_sums(d: &DistanceMatrix) -> AggregateScores {
    AggregateScores {
        scores: std::array::from_fn(|i| d.row(i).iter().sum()),
    }
}

fn ranked_sums(d: &DistanceMatrix, f: &RankWeighting) -> AggregateScores {
    if f.kind == WeightingKind::Uniform {
        return plain_sums(d);
    }
    AggregateScores {
        scores: std::array::from_fn(|i| {
            let mut row = *d.row(i);
            row.sort_by(f64::total_cmp);
            row.iter().zip(&f.table).map(|(dist, wt)| dist * wt).sum()
        }),
    }
}

/// Sum of L2 distances from each window member to all members.
pub fn aggregate_distances(w: &Window) -> AggregateScores {
    plain_sums(&DistanceMatrix::new(w))
}

/// Rank-weighted distance sums: each member's distances are sorted ascending
/// and dotted with the weight table. Uniform weights reproduce
/// [`aggregate_distances`] bit for bit.
pub fn rank_weighted_scores(w: &Window, f: &RankWeighting) -> AggregateScores {
    ranked_sums(&DistanceMatrix::new(w), f)
}

/// Window index selected by the vector median.
pub fn vmf_index(w: &Window) -> usize {
    aggregate_distances(w).argmin()
}

/// Vector median filter output.
pub fn vmf(w: &Window) -> Pixel {
    w.values[vmf_index(w)]
}

/// Rank-weighted vector median filter output.
pub fn rwvmf(w: &Window, f: &RankWeighting) -> Pixel {
    w.values[rank_weighted_scores(w, f).argmin()]
}

/// Channel-wise mean over the members flagged clean, rounded half up.
/// Falls back to [`vmf`] when no member is clean.
pub fn amf(w: &Window, clean: &[bool; WINDOW_LEN]) -> Pixel {
    let n = clean.iter().filter(|&&c| c).count() as u32;
    if n == 0 {
        return vmf(w);
    }
    let mut sums = [0u32; 3];
    for (p, _) in w.values.iter().zip(clean).filter(|(_, &c)| c) {
        for (s, v) in sums.iter_mut().zip(p.channels()) {
            *s += v as u32;
        }
    }
    Pixel::from_channels(sums.map(|s| ((s + n / 2) / n) as u8))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn win(values: [Pixel; 9]) -> Window {
        Window::from_values(values)
    }

    const WHITE: Pixel = Pixel::gray(255);
    const BLACK: Pixel = Pixel::gray(0);

    #[test]
    fn distances() {
        assert_eq!(l2_distance(BLACK, BLACK), 0.0);
        assert!((l2_distance(BLACK, WHITE) - 441.672_955_930_063_7).abs() < 1e-9);
        assert_eq!(l2_distance(Pixel::new(10, 0, 0), BLACK), 10.0);
    }

    #[test]
    fn matrix_is_symmetric_with_zero_diagonal() {
        let w = win(std::array::from_fn(|i| {
            Pixel::new(i as u8 * 20, 3, 255 - i as u8)
        }));
        let d = DistanceMatrix::new(&w);
        for i in 0..9 {
            assert_eq!(d.get(i, i), 0.0);
            for j in 0..9 {
                assert_eq!(d.get(i, j), d.get(j, i));
                for k in 0..9 {
                    assert!(d.get(i, k) <= d.get(i, j) + d.get(j, k) + 1e-9);
                }
            }
        }
    }

    #[test]
    fn white_center_among_black() {
        let mut values = [BLACK; 9];
        values[0] = WHITE;
        let s = aggregate_distances(&win(values));
        let diag = 255.0 * 3f64.sqrt();
        assert!((s.scores[0] - 8.0 * diag).abs() < 1e-9);
        for i in 1..9 {
            assert!((s.scores[i] - diag).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_window_scores_vanish() {
        let w = win([Pixel::new(9, 8, 7); 9]);
        assert!(aggregate_distances(&w).scores.iter().all(|&s| s == 0.0));
        for f in [
            RankWeighting::reciprocal(),
            RankWeighting::reciprocal_squared(),
        ] {
            assert!(rank_weighted_scores(&w, &f)
                .scores
                .iter()
                .all(|&s| s == 0.0));
        }
        assert_eq!(vmf(&w), Pixel::new(9, 8, 7));
        assert_eq!(vmf_index(&w), 0);
    }

    #[test]
    fn impulse_center_is_replaced() {
        let mut values = [Pixel::gray(100); 9];
        values[0] = Pixel::new(255, 0, 0);
        assert_eq!(vmf(&win(values)), Pixel::gray(100));
    }

    #[test]
    fn amf_means() {
        let mut values = [Pixel::gray(40); 9];
        values[2] = Pixel::new(0, 0, 0);
        values[5] = Pixel::new(10, 20, 30);
        let w = win(values);
        let mut flags = [false; 9];
        flags[2] = true;
        flags[5] = true;
        assert_eq!(amf(&w, &flags), Pixel::new(5, 10, 15));
        assert_eq!(amf(&w, &[false; 9]), vmf(&w));
        let c = win([Pixel::new(1, 2, 3); 9]);
        assert_eq!(amf(&c, &[true; 9]), Pixel::new(1, 2, 3));
    }

    #[test]
    fn weighting_tables() {
        let r = RankWeighting::reciprocal();
        assert_eq!(r.table()[3], 0.25);
        let r2 = RankWeighting::reciprocal_squared();
        assert_eq!(r2.table()[2], 1.0 / 9.0);
        assert!(RankWeighting::from_table([1.0, 2.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]).is_err());
        assert!(RankWeighting::from_table([0.0; 9]).is_err());
        assert_eq!("1/r2".parse::<RankWeighting>().unwrap(), r2);
        assert!("1/r3".parse::<RankWeighting>().is_err());
    }
}
