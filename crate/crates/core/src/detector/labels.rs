//! Stage 1 and 2 of detection: confident-high labelling and definite-low
//! refinement.
//!
//! A readback is labelled `High` when the clean high level is the best
//! explanation among the three nominal levels; everything else is `Uncertain`
//! (either a true low or a sneak-affected high). An uncertain cell whose row
//! or column contains no other uncertain cell cannot satisfy the sneak-path
//! conditions, so it is promoted to a definite `Low`. Promotions can empty
//! another cell's row/column set, so refinement runs to a fixed point by
//! default.

use crate::channel::{ChannelParams, NoiseModel};
use crate::grid::Grid;

/// Per-cell decision state after pre-detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    /// Confidently the clean high level (bit 0, no interference).
    High,
    /// Definitely the low level (bit 1).
    Low,
    /// Either a true low or a sneak-affected high.
    Uncertain,
}

/// Label each cell `High` or `Uncertain` by nearest of the three levels.
///
/// Under Gaussian noise "nearest" is squared distance; under the lognormal
/// model it is the level with the largest readback likelihood.
pub fn pre_detect(values: &Grid<f64>, params: &ChannelParams) -> Grid<Label> {
    let levels = [params.r_high, params.r_sneak(), params.r_low];
    let mut labels = Grid::filled(values.rows(), values.cols(), Label::Uncertain);
    for (l, &y) in labels.as_mut_slice().iter_mut().zip(values.iter()) {
        let score = |level: f64| match params.noise {
            NoiseModel::Gaussian => -(y - level) * (y - level),
            NoiseModel::Lognormal => params.ln_likelihood(y, level),
        };
        let high = score(levels[0]);
        if high > score(levels[1]) && high > score(levels[2]) {
            *l = Label::High;
        }
    }
    labels
}

/// Promote uncertain cells with an empty row or column set to `Low`.
///
/// With `single_pass` the rule is applied exactly once; otherwise it is
/// iterated until no cell changes.
pub fn refine_definite_low(labels: &Grid<Label>, single_pass: bool) -> Grid<Label> {
    let mut labels = labels.clone();
    let rows = labels.rows();
    let cols = labels.cols();
    loop {
        let mut row_unc = vec![0u32; rows];
        let mut col_unc = vec![0u32; cols];
        for ((i, j), &l) in labels.enumerate() {
            if l == Label::Uncertain {
                row_unc[i] += 1;
                col_unc[j] += 1;
            }
        }
        let mut changed = false;
        for i in 0..rows {
            for j in 0..cols {
                if labels[(i, j)] == Label::Uncertain
                    && (row_unc[i] == 1 || col_unc[j] == 1)
                {
                    labels[(i, j)] = Label::Low;
                    changed = true;
                }
            }
        }
        if single_pass || !changed {
            return labels;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::NoiseModel;

    fn gaussian_params() -> ChannelParams {
        ChannelParams::standard(5, 5, 0.001, 40.0, NoiseModel::Gaussian).unwrap()
    }

    #[test]
    fn nearest_level_labels() {
        let p = gaussian_params();
        let y = Grid::from_vec(1, 3, vec![1000.0, 100.0, 230.0]);
        let labels = pre_detect(&y, &p);
        assert_eq!(labels[(0, 0)], Label::High);
        assert_eq!(labels[(0, 1)], Label::Uncertain);
        assert_eq!(labels[(0, 2)], Label::Uncertain);
    }

    #[test]
    fn high_boundary_sits_between_high_and_sneak_levels() {
        // Midpoint of 1000 and 3000/13 is ~615.3846.
        let p = gaussian_params();
        let y = Grid::from_vec(1, 2, vec![616.0, 615.0]);
        let labels = pre_detect(&y, &p);
        assert_eq!(labels[(0, 0)], Label::High);
        assert_eq!(labels[(0, 1)], Label::Uncertain);
    }

    #[test]
    fn lognormal_pre_detect_uses_likelihood() {
        let p = ChannelParams::new(5, 5, 1000.0, 100.0, 0.5, 0.001, 40.0, NoiseModel::Lognormal)
            .unwrap();
        let y = Grid::from_vec(1, 3, vec![990.0, 101.0, 228.0]);
        let labels = pre_detect(&y, &p);
        assert_eq!(labels[(0, 0)], Label::High);
        assert_eq!(labels[(0, 1)], Label::Uncertain);
        assert_eq!(labels[(0, 2)], Label::Uncertain);
    }

    #[test]
    fn lone_uncertain_cell_becomes_low() {
        let mut labels = Grid::filled(4, 4, Label::High);
        labels[(2, 1)] = Label::Uncertain;
        let refined = refine_definite_low(&labels, false);
        assert_eq!(refined[(2, 1)], Label::Low);
    }

    #[test]
    fn row_pair_without_column_partners_becomes_low() {
        let mut labels = Grid::filled(4, 4, Label::High);
        labels[(1, 0)] = Label::Uncertain;
        labels[(1, 3)] = Label::Uncertain;
        let refined = refine_definite_low(&labels, false);
        assert_eq!(refined[(1, 0)], Label::Low);
        assert_eq!(refined[(1, 3)], Label::Low);
    }

    #[test]
    fn refinement_cascades_to_fixed_point() {
        // (0,0) has partners in both its row ((0,2)) and column ((2,0)), but
        // those two each have an empty set and get promoted first; only the
        // second pass can promote (0,0).
        let mut labels = Grid::filled(3, 3, Label::High);
        labels[(0, 0)] = Label::Uncertain;
        labels[(0, 2)] = Label::Uncertain;
        labels[(2, 0)] = Label::Uncertain;
        let one_pass = refine_definite_low(&labels, true);
        assert_eq!(one_pass[(0, 2)], Label::Low);
        assert_eq!(one_pass[(2, 0)], Label::Low);
        assert_eq!(one_pass[(0, 0)], Label::Uncertain);

        let fixed = refine_definite_low(&labels, false);
        assert_eq!(fixed[(0, 0)], Label::Low);

        // A self-supporting 2x2 block survives; a pendant does not.
        let mut labels = Grid::filled(4, 4, Label::High);
        for &(i, j) in &[(0, 0), (0, 1), (1, 0), (1, 1), (3, 3)] {
            labels[(i, j)] = Label::Uncertain;
        }
        let refined = refine_definite_low(&labels, false);
        assert_eq!(refined[(3, 3)], Label::Low);
        assert_eq!(refined[(0, 0)], Label::Uncertain);
    }

    #[test]
    fn refinement_is_idempotent() {
        use crate::rng::substream;
        use rand::Rng;
        let mut rng = substream(21, &[0]);
        for _ in 0..100 {
            let mut labels = Grid::filled(6, 6, Label::High);
            for l in labels.as_mut_slice() {
                if rng.gen::<f64>() < 0.4 {
                    *l = Label::Uncertain;
                }
            }
            let once = refine_definite_low(&labels, false);
            let twice = refine_definite_low(&once, false);
            assert_eq!(once, twice);
        }
    }

    #[test]
    fn surviving_uncertain_cells_have_partners() {
        use crate::rng::substream;
        use rand::Rng;
        let mut rng = substream(22, &[0]);
        for _ in 0..100 {
            let mut labels = Grid::filled(7, 5, Label::High);
            for l in labels.as_mut_slice() {
                if rng.gen::<f64>() < 0.3 {
                    *l = Label::Uncertain;
                }
            }
            let refined = refine_definite_low(&labels, false);
            for ((i, j), &l) in refined.enumerate() {
                if l != Label::Uncertain {
                    continue;
                }
                let row_others = (0..refined.cols())
                    .filter(|&v| v != j && refined[(i, v)] == Label::Uncertain)
                    .count();
                let col_others = (0..refined.rows())
                    .filter(|&u| u != i && refined[(u, j)] == Label::Uncertain)
                    .count();
                assert!(row_others > 0 && col_others > 0);
            }
        }
    }
}
