//! Turning a gross-substitutes violation into prices under which the buyer
//! demands `A`, strictly prefers `B`, and nothing closer to `A` beats `A`.

use serde::Serialize;

use super::checks::{check_rgp, check_sm};
use crate::error::{Error, Result};
use crate::model::{utility, Bundle, ItemId, Price, PriceVector, Valuation};
use crate::rat::Rat;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ViolationWitness {
    pub a: Bundle,
    pub b: Bundle,
    pub p: PriceVector,
}

fn r2() -> Rat {
    Rat::from(2)
}

/// Prices `S` at 0, the listed items at the given prices, and everything else
/// as unpurchasable.
fn price_vector(m: usize, s: &Bundle, priced: &[(ItemId, Rat)]) -> Result<PriceVector> {
    let mut p = PriceVector::unpurchasable(m);
    for x in s.iter() {
        p.set(x, Price::Finite(Rat::zero()));
    }
    for (x, px) in priced {
        if !px.is_positive() {
            return Err(Error::Certificate(format!("constructed price of item {x} is {px}")));
        }
        p.set(*x, Price::Finite(px.clone()));
    }
    Ok(p)
}

/// Builds the witness from the first (SM) violation if there is one, else
/// from the first (RGP) violation. Fails with `IsGrossSubstitutes` if there
/// is neither.
pub fn gs_witness(v: &Valuation) -> Result<ViolationWitness> {
    let m = v.num_items();
    let val = |s: &Bundle| v.eval(s);
    let (a, b, p) = if let Some(viol) = check_sm(v)?.into_iter().next() {
        let (s, x, y) = (viol.s, viol.x, viol.y);
        let (vs, vsx, vsy, vsxy) = (val(&s), val(&s.with(x)), val(&s.with(y)), val(&s.with(x).with(y)));
        let gap = &(&vs + &vsxy) - &(&vsx + &vsy);
        let eps = gap / r2();
        let px = &(&vsxy - &vsy) - &eps;
        let py = &(&vsxy - &vsx) - &eps;
        let p = price_vector(m, &s, &[(x, px), (y, py)])?;
        let b = s.with(x).with(y);
        (s, b, p)
    } else if let Some(viol) = check_rgp(v)?.into_iter().next() {
        let (s, x, y, z) = (viol.s, viol.x, viol.y, viol.z);
        let vsx = val(&s.with(x));
        let vsy = val(&s.with(y));
        let vsz = val(&s.with(z));
        let vsyz = val(&s.with(y).with(z));
        let vsxy = val(&s.with(x).with(y));
        let vsxz = val(&s.with(x).with(z));
        let top = &vsx + &vsyz;
        let g1 = &top - &(&vsy + &vsxz);
        let g2 = &top - &(&vsz + &vsxy);
        let eps = g1.min(g2) / Rat::from(4);
        let py = &(&vsyz - &vsz) - &eps;
        let pz = &(&vsyz - &vsy) - &eps;
        let px = &(&vsx - &vsyz) + &(&py + &pz);
        let p = price_vector(m, &s, &[(x, px), (y, py), (z, pz)])?;
        (s.with(x), s.with(y).with(z), p)
    } else {
        return Err(Error::IsGrossSubstitutes);
    };
    let p = lower_new_items(v, &a, &b, p)?;
    let w = ViolationWitness { a, b, p };
    verify_witness(v, &w)?;
    Ok(w)
}

/// Lowers the prices of `B \ A` by half the smallest per-item slack among
/// bundles closer to `A` than `B` is, so `B` overtakes `A` without any closer
/// bundle doing so.
fn lower_new_items(v: &Valuation, a: &Bundle, b: &Bundle, mut p: PriceVector) -> Result<PriceVector> {
    let new = b.difference(a);
    let ua = utility(v, a, &p).ok_or_else(|| Error::Certificate("A is unpurchasable".into()))?;
    let radius = a.symmetric_difference(b).len();
    let mut slack: Option<Rat> = None;
    for c in all_bundles(v.num_items()) {
        let hits = c.intersection(&new).len();
        if hits == 0 || c.symmetric_difference(a).len() >= radius {
            continue;
        }
        let Some(uc) = utility(v, &c, &p) else { continue };
        let room = &ua - &uc;
        if !room.is_positive() {
            return Err(Error::Certificate(format!("bundle {c:?} already matches A")));
        }
        let per = room / Rat::from(hits);
        slack = Some(slack.map_or(per.clone(), |s| s.min(per)));
    }
    let mut eta = new
        .iter()
        .map(|x| p.get(x).finite().cloned().expect("B is purchasable"))
        .min()
        .expect("B \\ A has two items");
    if let Some(s) = slack {
        eta = eta.min(s);
    }
    let eta = eta / r2();
    for x in new.iter() {
        let px = p.get(x).finite().cloned().expect("B is purchasable");
        p.set(x, Price::Finite(px - &eta));
    }
    Ok(p)
}

fn all_bundles(m: usize) -> impl Iterator<Item = Bundle> {
    (0..1u64 << m).map(Bundle::from_mask)
}

/// Checks the three witness conditions literally, scanning every bundle.
pub fn verify_witness(v: &Valuation, w: &ViolationWitness) -> Result<()> {
    let fail = |msg: String| Err(Error::Certificate(msg));
    if w.b.difference(&w.a).len() != 2 {
        return fail("|B \\ A| is not 2".into());
    }
    if w.a.difference(&w.b).len() > 1 {
        return fail("|A \\ B| exceeds 1".into());
    }
    let (Some(ua), Some(ub)) = (utility(v, &w.a, &w.p), utility(v, &w.b, &w.p)) else {
        return fail("A or B is unpurchasable".into());
    };
    if ub <= ua {
        return fail(format!("u(B) = {ub} does not exceed u(A) = {ua}"));
    }
    let radius = w.a.symmetric_difference(&w.b).len();
    for c in all_bundles(v.num_items()) {
        if c.symmetric_difference(&w.a).len() < radius && utility(v, &c, &w.p).is_some_and(|uc| uc > ua) {
            return fail(format!("{c:?} beats A while closer to A than B"));
        }
    }
    Ok(())
}
