//! Simplex feasibility against Fourier-Motzkin elimination.

use dynprice::gslab::lp::{Feasibility, LinearSystem};
use dynprice::Rat;
use proptest::prelude::*;

/// Decides `A p <= b, p >= 0` by eliminating one unknown at a time.
fn fm_feasible(sys: &LinearSystem) -> bool {
    let n = sys.num_vars;
    let mut rows: Vec<(Vec<Rat>, Rat)> = sys.rows.clone();
    for j in 0..n {
        let mut unit = vec![Rat::zero(); n];
        unit[j] = Rat::from(-1);
        rows.push((unit, Rat::zero()));
    }
    for j in 0..n {
        let (mut pos, mut neg, mut keep) = (Vec::new(), Vec::new(), Vec::new());
        for row in rows {
            if row.0[j].is_positive() {
                pos.push(row);
            } else if row.0[j].is_negative() {
                neg.push(row);
            } else {
                keep.push(row);
            }
        }
        for (ap, bp) in &pos {
            for (an, bn) in &neg {
                let sp = -&an[j];
                let sn = ap[j].clone();
                let a: Vec<Rat> = ap.iter().zip(an).map(|(x, y)| &(x * &sp) + &(y * &sn)).collect();
                keep.push((a, &(bp * &sp) + &(bn * &sn)));
            }
        }
        rows = keep;
    }
    rows.iter().all(|(_, b)| !b.is_negative())
}

fn system() -> impl Strategy<Value = LinearSystem> {
    (1usize..=3).prop_flat_map(|n| {
        prop::collection::vec((prop::collection::vec(-3i64..=3, n), -4i64..=4), 0..=6).prop_map(move |rows| {
            let mut s = LinearSystem::new(n);
            for (a, b) in rows {
                s.push(a.into_iter().map(Rat::from).collect(), Rat::from(b));
            }
            s
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn simplex_agrees_with_elimination(sys in system()) {
        match sys.solve() {
            Feasibility::Feasible(p) => {
                prop_assert!(sys.satisfied_by(&p));
                prop_assert!(fm_feasible(&sys));
            }
            Feasibility::Infeasible(y) => {
                prop_assert!(sys.refuted_by(&y));
                prop_assert!(!fm_feasible(&sys));
            }
        }
    }
}

#[test]
fn elimination_oracle_sanity() {
    let mut s = LinearSystem::new(2);
    s.push(vec![Rat::from(1), Rat::from(1)], Rat::from(1));
    assert!(fm_feasible(&s));
    s.push(vec![Rat::from(-1), Rat::from(-1)], Rat::from(-2));
    assert!(!fm_feasible(&s));
}
