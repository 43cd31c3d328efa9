//! Exhaustive (SM) and (RGP) scans over a table valuation.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Bundle, ItemId, Valuation};
use crate::rat::Rat;

pub const MAX_CHECK_ITEMS: usize = 12;

/// `v(S+x) + v(S+y) < v(S) + v(S+x+y)`, with `x < y`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SmViolation {
    pub s: Bundle,
    pub x: ItemId,
    pub y: ItemId,
}

/// `v(S+x) + v(S+y+z)` exceeds both `v(S+y) + v(S+x+z)` and
/// `v(S+z) + v(S+x+y)`, with `y < z`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RgpViolation {
    pub s: Bundle,
    pub x: ItemId,
    pub y: ItemId,
    pub z: ItemId,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GsReport {
    pub is_gs: bool,
    pub sm_violations: Vec<SmViolation>,
    pub rgp_violations: Vec<RgpViolation>,
}

fn table(v: &Valuation) -> Result<&[Rat]> {
    let Valuation::Table { values } = v else {
        return Err(Error::NotTable);
    };
    let m = v.num_items();
    if m > MAX_CHECK_ITEMS {
        return Err(Error::TooManyItems {
            what: "gross-substitutes check",
            max: MAX_CHECK_ITEMS,
            got: m,
        });
    }
    Ok(values)
}

/// Every (S, x, y) violating submodularity, with `S` in mask order and
/// `x < y` outside `S`.
pub fn check_sm(v: &Valuation) -> Result<Vec<SmViolation>> {
    let t = table(v)?;
    let m = v.num_items();
    let mut out = Vec::new();
    for s in 0..1usize << m {
        for x in (0..m).filter(|x| s >> x & 1 == 0) {
            for y in (x + 1..m).filter(|y| s >> y & 1 == 0) {
                let (sx, sy, sxy) = (s | 1 << x, s | 1 << y, s | 1 << x | 1 << y);
                if &t[sx] + &t[sy] < &t[s] + &t[sxy] {
                    out.push(SmViolation {
                        s: Bundle::from_mask(s as u64),
                        x,
                        y,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Every (S, x, y, z) violating the triplet exchange condition, with `S` in
/// mask order, then `x`, then `y < z`.
pub fn check_rgp(v: &Valuation) -> Result<Vec<RgpViolation>> {
    let t = table(v)?;
    let m = v.num_items();
    let mut out = Vec::new();
    for s in 0..1usize << m {
        let free: Vec<usize> = (0..m).filter(|i| s >> i & 1 == 0).collect();
        for &x in &free {
            for (iy, &y) in free.iter().enumerate() {
                for &z in &free[iy + 1..] {
                    if x == y || x == z {
                        continue;
                    }
                    let lhs = &t[s | 1 << x] + &t[s | 1 << y | 1 << z];
                    let r1 = &t[s | 1 << y] + &t[s | 1 << x | 1 << z];
                    let r2 = &t[s | 1 << z] + &t[s | 1 << x | 1 << y];
                    if lhs > r1.max(r2) {
                        out.push(RgpViolation {
                            s: Bundle::from_mask(s as u64),
                            x,
                            y,
                            z,
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}

pub fn check_gs(v: &Valuation) -> Result<GsReport> {
    let sm_violations = check_sm(v)?;
    let rgp_violations = check_rgp(v)?;
    Ok(GsReport {
        is_gs: sm_violations.is_empty() && rgp_violations.is_empty(),
        sm_violations,
        rgp_violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn tab(vals: &[i64]) -> Valuation {
        Valuation::Table {
            values: vals.iter().map(|&x| Rat::from(x)).collect(),
        }
    }

    #[test]
    fn complement_pair_violates_sm_only_at_empty() {
        let v = tab(&[0, 0, 0, 1]);
        let sm = check_sm(&v).unwrap();
        assert_eq!(
            sm,
            vec![SmViolation {
                s: Bundle::new(),
                x: 0,
                y: 1
            }]
        );
        assert!(!check_gs(&v).unwrap().is_gs);
    }

    #[test]
    fn rgp_example_has_single_violation() {
        // a, b, c: singletons 10, ab 20, ac = bc = 15, abc 20.
        let v = tab(&[0, 10, 10, 20, 10, 15, 15, 20]);
        assert!(check_sm(&v).unwrap().is_empty());
        let rgp = check_rgp(&v).unwrap();
        assert_eq!(
            rgp,
            vec![RgpViolation {
                s: Bundle::new(),
                x: 2,
                y: 0,
                z: 1
            }]
        );
    }

    #[test]
    fn additive_is_gs() {
        let v = Valuation::MultiDemand {
            k: 3,
            values: vec![Rat::from(1), Rat::from(2), Rat::from(5)],
        }
        .to_table()
        .unwrap();
        assert!(check_gs(&v).unwrap().is_gs);
    }

    #[test]
    fn non_table_rejected() {
        let v = Valuation::UnitDemand {
            values: vec![Rat::from(1)],
        };
        assert!(matches!(check_sm(&v), Err(Error::NotTable)));
        assert!(matches!(check_rgp(&v), Err(Error::NotTable)));
    }
}
