//! Structural invariants under randomized inputs.

use entb_core::loo::{random_orthogonal, LooSet};
use entb_core::matrix::{c, CVector};
use entb_core::qstate::{mix, random_ginibre, BipartiteDims, PureState};
use entb_core::rearrange::{partial_transpose_mat, realign_mat};
use entb_core::tol;
use proptest::prelude::*;

const DIM_PAIRS: [(usize, usize); 3] = [(2, 2), (2, 3), (3, 3)];

fn amplitude_strategy() -> impl Strategy<Value = (usize, Vec<(f64, f64)>)> {
    (0..DIM_PAIRS.len(), prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 9))
        .prop_filter("usable norm", |(idx, raw)| {
            let (m, n) = DIM_PAIRS[*idx];
            let norm_sq: f64 =
                raw.iter().take(m * n).map(|(re, im)| re * re + im * im).sum();
            norm_sq > 1e-2
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// Schmidt decomposition followed by reassembly is the identity.
    #[test]
    fn schmidt_reconstructs_arbitrary_states((idx, raw) in amplitude_strategy()) {
        let (m, n) = DIM_PAIRS[idx];
        let amps = CVector::from_iterator(m * n, raw.iter().take(m * n).map(|&(re, im)| c(re, im)))
            .normalize();
        let psi = PureState::new(amps.clone(), m, n).unwrap();
        let sd = psi.schmidt();
        let total: f64 = sd.coefficients.iter().sum();
        prop_assert!((total - 1.0).abs() < tol::NORM);
        prop_assert!(sd.coefficients.windows(2).all(|w| w[0] >= w[1] - 1e-12));
        let defect = (sd.reconstruct() - &amps).norm();
        prop_assert!(defect < tol::RECON, "reconstruction defect {}", defect);
    }

    /// Convex mixtures of valid states pass validation.
    #[test]
    fn mixtures_stay_valid(idx in 0..DIM_PAIRS.len(), s1 in 0..1000u64, s2 in 0..1000u64, w in 0.0..1.0f64) {
        let (m, n) = DIM_PAIRS[idx];
        let a = random_ginibre(m, n, s1).unwrap();
        let b = random_ginibre(m, n, s2).unwrap();
        prop_assert!(mix(&[(w, a), (1.0 - w, b)]).is_ok());
    }

    /// Entry rearrangements move numbers without touching them.
    #[test]
    fn rearrangements_are_exact(idx in 0..DIM_PAIRS.len(), seed in 0..1000u64) {
        let (m, n) = DIM_PAIRS[idx];
        let rho = random_ginibre(m, n, seed).unwrap();
        let dims = BipartiteDims::new(m, n).unwrap();
        // Summation order differs between layouts, so the Frobenius norms
        // agree to round-off rather than bit-exactly.
        let r = realign_mat(rho.mat(), dims);
        prop_assert!((r.norm() - rho.mat().norm()).abs() < 1e-12);
        let pt2 = partial_transpose_mat(&partial_transpose_mat(rho.mat(), dims), dims);
        prop_assert_eq!(&pt2, rho.mat());
    }

    /// Orthogonal basis changes preserve the observable-set invariants.
    #[test]
    fn rotations_preserve_loo_invariants(d in 2..=4usize, seed in any::<u64>()) {
        let rotated = LooSet::standard(d).rotate(&random_orthogonal(d * d, seed)).unwrap();
        prop_assert!(LooSet::new(d, rotated.mats().to_vec()).is_ok());
    }
}
