use super::{Method, SelectionProblem, SelectionResult};
use crate::error::{Error, Result};

/// Largest `M·N` the exhaustive search accepts.
pub const EXHAUSTIVE_LIMIT: usize = 20;

/// Exact optimum by enumerating every inclusion vector. Null offers are
/// left out of the enumeration since they cannot change the objective.
pub fn exhaustive_optimum(problem: &SelectionProblem) -> Result<SelectionResult> {
    let offers = &problem.offers;
    let cells = offers.relays() * offers.subcarriers();
    if cells > EXHAUSTIVE_LIMIT {
        return Err(Error::TooLarge {
            cells,
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    let items: Vec<(usize, usize)> = (0..offers.subcarriers())
        .flat_map(|n| (0..offers.relays()).map(move |m| (m, n)))
        .filter(|&(m, n)| offers.is_offer(m, n))
        .collect();

    let mut sums = vec![0.0; offers.subcarriers()];
    let mut best_mask = 0u32;
    let mut best_value = 0.0;
    for mask in 1u32..(1u32 << items.len()) {
        let mut spend = 0.0;
        sums.iter_mut().for_each(|s| *s = 0.0);
        for (i, &(m, n)) in items.iter().enumerate() {
            if mask >> i & 1 == 1 {
                spend += offers.transfer(m, n);
                sums[n] += offers.snr(m, n);
            }
        }
        if spend > problem.budget {
            continue;
        }
        let value: f64 = sums.iter().map(|s| (1.0 + s).log2()).sum();
        if value > best_value {
            best_value = value;
            best_mask = mask;
        }
    }

    let mut subsets = vec![Vec::new(); offers.subcarriers()];
    for (i, &(m, n)) in items.iter().enumerate() {
        if best_mask >> i & 1 == 1 {
            subsets[n].push(m);
        }
    }
    Ok(SelectionResult::from_subsets(
        offers,
        subsets,
        Method::Exhaustive,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selection::OfferMatrix;

    #[test]
    fn worked_example() {
        let o = OfferMatrix::new(
            vec![vec![10.0], vec![6.0], vec![5.0]],
            vec![vec![2.0], vec![1.0], vec![1.0]],
            1,
        )
        .unwrap();
        let p = SelectionProblem::new(o, 2.0, 10).unwrap();
        let r = exhaustive_optimum(&p).unwrap();
        assert_eq!(r.capacity, 12f64.log2());
        assert_eq!(r.subsets, vec![vec![1, 2]]);
    }

    #[test]
    fn huge_budget_selects_everything() {
        let o = OfferMatrix::new(
            vec![vec![1.0, 2.0], vec![3.0, 4.0]],
            vec![vec![1.0, 1.0], vec![1.0, 1.0]],
            2,
        )
        .unwrap();
        let p = SelectionProblem::new(o, 1e6, 10).unwrap();
        assert_eq!(
            exhaustive_optimum(&p).unwrap().subsets,
            vec![vec![0, 1], vec![0, 1]]
        );
    }

    #[test]
    fn refuses_large_instances() {
        let p = SelectionProblem::new(OfferMatrix::empty(7, 3), 1.0, 10).unwrap();
        assert!(matches!(
            exhaustive_optimum(&p),
            Err(Error::TooLarge { cells: 21, .. })
        ));
    }
}
