//! Published coefficient tables used as regression fixtures.
//!
//! `LS_REF_*` are least-squares coefficients at `η = 2 + 0.460·m^{−0.319}`;
//! `REG_REF_*` are L1-regularised coefficients at the end of a `λ → 0` path
//! for the same `η`.

#![allow(clippy::excessive_precision)]

use crate::extension::{eta_for_m, CoefficientSet, Provenance};

pub const LS_REF_M1: [f64; 1] = [1.1749265633763890e0];

pub const LS_REF_M2: [f64; 2] = [1.4649300593981140e0, -2.4671045529932240e-1];

pub const LS_REF_M4: [f64; 4] =
    [1.6867069657827318e0, -4.9503423003210789e-1, 1.2411979661060313e-1, -1.7423091626316570e-2];

pub const LS_REF_M8: [f64; 8] = [
    1.8293489416481978e0,
    -6.9782637202202591e-1,
    2.9318833555497786e-1,
    -1.1239628137353329e-1,
    3.6120497884196093e-2,
    -8.9919401310510454e-3,
    1.5370025210256612e-3,
    -1.3579108324114441e-4,
];

pub const LS_REF_M16: [f64; 16] = [
    1.9110596582766739e0,
    -8.3329705463062109e-1,
    4.4160671378740829e-1,
    -2.3947858000595612e-1,
    1.2560417538260940e-1,
    -6.1954442495961645e-2,
    2.8214972876756641e-2,
    -1.1685793781231944e-2,
    4.3367104652322951e-3,
    -1.4182928702138838e-3,
    4.0046998527214087e-4,
    -9.4993240608959911e-5,
    1.8196971126400890e-5,
    -2.6440238988517658e-6,
    2.5962936805754857e-7,
    -1.2959054619319566e-8,
];

pub const REG_REF_M8: [f64; 8] = [
    1.6252703132458948e0,
    -3.8683393390100113e-1,
    2.9701926916938142e-6,
    8.6366199973602994e-2,
    -6.2709967227889740e-2,
    2.5797568201661875e-2,
    -6.2821777289429268e-3,
    7.0516066255388169e-4,
];

pub const REG_REF_M16: [f64; 16] = [
    1.2916284406688450e0,
    -8.2928182586576808e-6,
    -1.6380870072858236e-1,
    -1.1749055646727718e-4,
    9.5121401363295541e-2,
    -4.4101764557668302e-2,
    -3.0991164009267009e-2,
    3.7272526527023730e-2,
    1.1172975770566466e-9,
    -1.7158480316302412e-2,
    1.0227568020830558e-6,
    2.1591424416141321e-2,
    -2.5086222729521594e-2,
    1.5028650505911973e-2,
    -5.1021757768611713e-3,
    8.0061388231784947e-4,
];

pub const REG_REF_M32: [f64; 32] = [
    1.2724940501206685e0,
    1.7647437339825657e-4,
    -1.4029956194722445e-1,
    -1.7466439143801946e-3,
    5.1972157370992783e-2,
    -1.2950516021742702e-5,
    -2.6250415571873853e-2,
    -2.0045263795425770e-4,
    1.6194718073768280e-2,
    -1.7795597389026188e-5,
    -1.0947086763603864e-2,
    -1.6130555334899803e-5,
    8.1213598893640250e-3,
    -1.0105205711471294e-5,
    -6.5220377643697468e-3,
    1.4019018381270808e-4,
    5.5642905085200789e-3,
    -4.4318297323382845e-5,
    -6.1059249519073234e-3,
    1.9775589352917029e-3,
    5.0533480564184585e-3,
    -3.3991031346627997e-3,
    -3.8019409272774586e-3,
    5.4778877247291281e-3,
    -1.1787420316161736e-4,
    -3.9487119908708530e-3,
    1.8385872155105068e-3,
    2.7192188482675381e-3,
    -4.5303471129022237e-3,
    3.1510801019723465e-3,
    -1.1793174798967686e-3,
    1.9853003590835781e-4,
];

pub const REG_REF_M64: [f64; 64] = [
    1.2674734015491065e0,
    1.7244036026329542e-3,
    -1.3651956841899426e-1,
    -3.7491316708631625e-3,
    4.9938995414798140e-2,
    2.0537857315178420e-5,
    -2.2365029891127992e-2,
    -2.1986888801476118e-3,
    1.4415085643057280e-2,
    -3.0068477747746482e-5,
    -7.4716874776132548e-3,
    -1.2580044370038269e-3,
    5.5788601054847075e-3,
    2.1058401322186844e-4,
    -2.8383216657104390e-3,
    -5.3130644207911078e-4,
    1.1591597789557177e-3,
    1.2506220453015711e-3,
    -4.6549080425110673e-4,
    -1.7343772935326910e-3,
    9.2174698931998786e-5,
    2.4160104742981634e-3,
    -7.9463150834943651e-4,
    -1.6106715619342506e-3,
    -4.9464035326807751e-6,
    2.3220958796745187e-3,
    -7.8337502650478882e-4,
    -1.4467190801562466e-3,
    5.9948907915225263e-5,
    1.9888623342606952e-3,
    -6.1980733169232454e-4,
    -1.4466978071478636e-3,
    3.1933413688348182e-4,
    1.5499247480596221e-3,
    -4.4182222940644011e-4,
    -1.4707022815413659e-3,
    6.1240547093369786e-4,
    1.1440602210948403e-3,
    -3.5492407433698856e-4,
    -1.4202668982435333e-3,
    8.5303847289379061e-4,
    8.3460819270331189e-4,
    -4.2780663107703745e-4,
    -1.2161903222093979e-3,
    1.0067897136897290e-3,
    5.9588480131204046e-4,
    -6.5786065655079997e-4,
    -7.9071836196200783e-4,
    1.0383768769934927e-3,
    3.2379462694742472e-4,
    -8.9639232053924400e-4,
    -1.3614874919487633e-4,
    7.6632791961643262e-4,
    1.7582497598172885e-4,
    -1.1303466077145865e-3,
    5.5314082202381201e-4,
    6.8367594233895623e-4,
    -8.4905815050110005e-4,
    -1.5612025010239042e-4,
    1.0500974069199117e-3,
    -1.0642102482310875e-3,
    5.6268780177663074e-4,
    -1.5878937168396719e-4,
    1.7297084483843702e-5,
];

/// Term counts with a published least-squares row.
pub const LS_REF_TERMS: [usize; 5] = [1, 2, 4, 8, 16];
/// Term counts with a published regularised row.
pub const REG_REF_TERMS: [usize; 4] = [8, 16, 32, 64];

pub fn ls_reference(m: usize) -> Option<&'static [f64]> {
    match m {
        1 => Some(&LS_REF_M1),
        2 => Some(&LS_REF_M2),
        4 => Some(&LS_REF_M4),
        8 => Some(&LS_REF_M8),
        16 => Some(&LS_REF_M16),
        _ => None,
    }
}

pub fn reg_reference(m: usize) -> Option<&'static [f64]> {
    match m {
        8 => Some(&REG_REF_M8),
        16 => Some(&REG_REF_M16),
        32 => Some(&REG_REF_M32),
        64 => Some(&REG_REF_M64),
        _ => None,
    }
}

fn fixture(values: &[f64]) -> CoefficientSet {
    let m = values.len();
    CoefficientSet { m, eta: eta_for_m(m), coefficients: values.to_vec(), provenance: Provenance::TableFixture }
}

/// Least-squares reference row as a coefficient set with the matching `η`.
pub fn ls_reference_set(m: usize) -> Option<CoefficientSet> {
    ls_reference(m).map(fixture)
}

/// Regularised reference row as a coefficient set with the matching `η`.
pub fn reg_reference_set(m: usize) -> Option<CoefficientSet> {
    reg_reference(m).map(fixture)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lengths_and_spot_values() {
        for m in LS_REF_TERMS {
            assert_eq!(ls_reference(m).unwrap().len(), m);
        }
        for m in REG_REF_TERMS {
            assert_eq!(reg_reference(m).unwrap().len(), m);
        }
        assert_eq!(LS_REF_M16[0], 1.9110596582766739);
        assert_eq!(REG_REF_M8[0], 1.6252703132458948);
        assert_eq!(REG_REF_M64[63], 1.7297084483843702e-5);
        assert!(ls_reference(3).is_none());
    }
}
