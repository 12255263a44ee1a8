//! Asymptotic key rates for every protocol family: conference keys
//! (direct/reverse reconciliation and entanglement-in-the-middle),
//! bipartite keys post-CKA, independent bipartite keys, and the scalar
//! conditional-correlation classifier.
//!
//! All conditioning is publicly disclosed homodyne-x data: it is applied
//! both to the mutual-information matrix and to the Holevo-bound state.
//! Trusted ancilla modes purifying squeezer impurity ride along inside
//! the entropies but are never measured or transmitted.

use crate::error::{Error, Result};
use crate::gaussian::{
    apply_lossy_channel, condition_on_homodyne, homodyne_differential_entropy,
    homodyne_mutual_information, remap_after_removal, von_neumann_entropy, ChannelParams,
    CovMatrix, MeasurementSpec,
};
use crate::scalar::{cst, Scalar};
use crate::states::{extend_with_trusted_ancillas, ModeMap, SqueezerSpec, StateKind};

/// Six-mode indices, order `(a1, a2, b1, b2, c1, c2)`.
const A1: usize = 0;
const A2: usize = 1;
const B1: usize = 2;
const B2: usize = 3;
const C1: usize = 4;
const C2: usize = 5;

/// Reconciliation scheme of a conference key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Direct reconciliation: the dealer's data is the reference.
    Dr,
    /// Reverse reconciliation: a remote user's data is the reference.
    Rr,
    /// Entanglement in the middle: everything is distributed.
    Mid,
}

/// Mode-distribution strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Distribution {
    /// Tripartite states: one mode per party.
    TripartiteDefault,
    /// Six-mode: send b1, c1; keep a1, a2, b2, c2.
    D1,
    /// Six-mode: send (b1, b2) and (c1, c2); keep a1, a2.
    D2,
    /// Six-mode: send a1, b1, c1; keep a2, b2, c2.
    D3,
    /// Six-mode: send everything, two modes per user.
    D4,
    /// Six-mode: send the uncorrelated pair (b1, b2), one per user.
    D5,
}

/// Bipartite-key-post-CKA scenario (the Table rows).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PostCkaRow {
    /// Bipartite key between the users after a DR conference key.
    PostDr,
    /// DR bipartite key (dealer reference) after an RR conference key.
    DrPostRr,
    /// RR bipartite key (user reference) after an RR conference key.
    RrPostRr,
    /// Bipartite key between two users after a Mid conference key.
    PostMid,
}

/// Which rate a scenario evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RateKind {
    Cka,
    PostCka(PostCkaRow),
    IndependentSum,
}

/// A complete protocol scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioSpec<T: Scalar> {
    pub state_kind: StateKind,
    pub distribution: Distribution,
    pub scheme: Scheme,
    /// Reconciliation efficiency of conference/bipartite keys.
    pub beta: T,
    /// Syndrome-length inefficiency of independent-key reconciliation.
    pub zeta: T,
    pub squeezer: SqueezerSpec<T>,
}

impl<T: Scalar> ScenarioSpec<T> {
    pub fn new(
        state_kind: StateKind,
        distribution: Distribution,
        scheme: Scheme,
        beta: T,
        zeta: T,
        squeezer: SqueezerSpec<T>,
    ) -> Result<Self> {
        if !(beta > T::zero() && beta <= T::one()) {
            return Err(Error::Domain(format!(
                "beta={} outside (0, 1]",
                beta.to_subset().unwrap_or(f64::NAN)
            )));
        }
        if !(zeta >= T::one()) {
            return Err(Error::Domain(format!(
                "zeta={} below 1",
                zeta.to_subset().unwrap_or(f64::NAN)
            )));
        }
        let dist_ok = match state_kind {
            StateKind::SixMode => distribution != Distribution::TripartiteDefault,
            _ => distribution == Distribution::TripartiteDefault,
        };
        if !dist_ok {
            return Err(Error::Domain(format!(
                "distribution {distribution:?} incompatible with {state_kind:?}"
            )));
        }
        Ok(Self {
            state_kind,
            distribution,
            scheme,
            beta,
            zeta,
            squeezer,
        })
    }
}

/// Who holds which system modes; ancillas always stay with the source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartyAssignment {
    pub dealer: Vec<usize>,
    pub user_b: Vec<usize>,
    pub user_c: Vec<usize>,
    pub ancillas: Vec<usize>,
    pub transmitted: Vec<usize>,
}

/// Outcome of a key-rate evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct KeyRateResult<T: Scalar> {
    /// The mutual information entering the rate (the minimum over users
    /// for conference keys; `I(i:jk)` for independent sums).
    pub mutual_info_bits: T,
    /// Holevo bound on the eavesdropper's information about the
    /// reference data.
    pub holevo_bits: T,
    /// Key rate in bits per channel use; negative means no key.
    pub rate_bits_per_use: T,
    /// Modes whose homodyne data was publicly disclosed beforehand.
    pub conditioning_modes: Vec<usize>,
}

impl<T: Scalar> KeyRateResult<T> {
    /// Per-user share of a symmetric independent-key sum.
    pub fn symmetric_per_user(&self) -> T {
        self.rate_bits_per_use * cst::<T>(0.5)
    }
}

fn ancilla_count(kind: StateKind) -> usize {
    match kind {
        StateKind::GhzLike => 3,
        StateKind::Dan => 2,
        StateKind::SixMode => 6,
    }
}

/// The mode-to-party map of a scenario, including the transmitted set.
pub fn assignment_for<T: Scalar>(scenario: &ScenarioSpec<T>) -> Result<PartyAssignment> {
    let n_sys = match scenario.state_kind {
        StateKind::SixMode => 6,
        _ => 3,
    };
    let ancillas: Vec<usize> = (n_sys..n_sys + ancilla_count(scenario.state_kind)).collect();
    let assignment = match (scenario.state_kind, scenario.distribution) {
        (StateKind::GhzLike, Distribution::TripartiteDefault)
        | (StateKind::Dan, Distribution::TripartiteDefault) => {
            let all_sent = scenario.scheme == Scheme::Mid;
            if all_sent && scenario.state_kind == StateKind::Dan {
                return Err(Error::Domain(
                    "entanglement-in-the-middle is not defined for the DAN state".into(),
                ));
            }
            PartyAssignment {
                dealer: if all_sent { vec![] } else { vec![0] },
                user_b: vec![1],
                user_c: vec![2],
                ancillas,
                transmitted: if all_sent { vec![0, 1, 2] } else { vec![1, 2] },
            }
        }
        (StateKind::SixMode, Distribution::D1) => PartyAssignment {
            dealer: vec![A1, A2, B2, C2],
            user_b: vec![B1],
            user_c: vec![C1],
            ancillas,
            transmitted: vec![B1, C1],
        },
        (StateKind::SixMode, Distribution::D2) => PartyAssignment {
            dealer: vec![A1, A2],
            user_b: vec![B1, B2],
            user_c: vec![C1, C2],
            ancillas,
            transmitted: vec![B1, B2, C1, C2],
        },
        (StateKind::SixMode, Distribution::D3) => PartyAssignment {
            dealer: vec![A2, B2, C2],
            user_b: vec![B1],
            user_c: vec![C1],
            ancillas,
            transmitted: vec![A1, B1, C1],
        },
        (StateKind::SixMode, Distribution::D4) => PartyAssignment {
            dealer: vec![],
            user_b: vec![B1, B2],
            user_c: vec![C1, C2],
            ancillas,
            transmitted: vec![A1, A2, B1, B2, C1, C2],
        },
        (StateKind::SixMode, Distribution::D5) => PartyAssignment {
            dealer: vec![A1, A2, C1, C2],
            user_b: vec![B1],
            user_c: vec![B2],
            ancillas,
            transmitted: vec![B1, B2],
        },
        (kind, dist) => {
            return Err(Error::Domain(format!(
                "distribution {dist:?} incompatible with {kind:?}"
            )))
        }
    };
    Ok(assignment)
}

/// Holevo bound on Eve's information about the homodyne-x outcomes of
/// `reference`, with the data of `prior_conditioning` publicly disclosed:
/// `chi = S(rho | prior) - S(rho | prior, reference)`, both entropies on
/// the full legitimate system `sigma_full` (trusted ancillas included).
pub fn holevo_bound<T: Scalar>(
    sigma_full: &CovMatrix<T>,
    trusted_modes: &[usize],
    prior_conditioning: &MeasurementSpec,
    reference: &MeasurementSpec,
) -> Result<T> {
    for m in &prior_conditioning.modes {
        if reference.modes.contains(m) {
            return Err(Error::Domain(format!(
                "mode {m} both conditioned and used as reference"
            )));
        }
    }
    for m in trusted_modes {
        if reference.modes.contains(m) || prior_conditioning.modes.contains(m) {
            return Err(Error::Domain(format!(
                "trusted ancilla mode {m} cannot be measured"
            )));
        }
    }
    let conditioned = condition_on_homodyne(sigma_full, prior_conditioning)?;
    let ref_remapped = remap_after_removal(&prior_conditioning.modes, &reference.modes);
    let s_before = von_neumann_entropy(&conditioned)?;
    let after = condition_on_homodyne(&conditioned, &MeasurementSpec::new(ref_remapped))?;
    let s_after = von_neumann_entropy(&after)?;
    Ok(s_before - s_after)
}

/// Scenario state with the channel applied, plus its party assignment.
#[derive(Debug, Clone)]
pub struct PreparedScenario<T: Scalar> {
    pub cm: CovMatrix<T>,
    pub mode_map: ModeMap,
    pub assignment: PartyAssignment,
}

/// Builds the ancilla-extended state and sends the transmitted modes
/// through the channel.
pub fn prepare_scenario<T: Scalar>(
    scenario: &ScenarioSpec<T>,
    ch: &ChannelParams<T>,
) -> Result<PreparedScenario<T>> {
    let (cm, mode_map) = extend_with_trusted_ancillas(scenario.state_kind, &scenario.squeezer)?;
    let assignment = assignment_for(scenario)?;
    let cm = apply_lossy_channel(&cm, &assignment.transmitted, ch)?;
    Ok(PreparedScenario {
        cm,
        mode_map,
        assignment,
    })
}

/// Core rate computation shared by the conference and post-CKA paths:
/// condition on `cond`, take `beta * min_k I(reference : party_k)` minus
/// the Holevo bound for `reference`.
pub fn rate_with_conditioning<T: Scalar>(
    cm: &CovMatrix<T>,
    cond: &[usize],
    reference: &[usize],
    parties: &[Vec<usize>],
    beta: T,
) -> Result<KeyRateResult<T>> {
    let conditioned = condition_on_homodyne(cm, &MeasurementSpec::new(cond.to_vec()))?;
    let ref_m = remap_after_removal(cond, reference);
    let mut min_i: Option<T> = None;
    for party in parties {
        let party_m = remap_after_removal(cond, party);
        let i = homodyne_mutual_information(&conditioned, &ref_m, &party_m)?;
        min_i = Some(match min_i {
            Some(prev) if prev <= i => prev,
            _ => i,
        });
    }
    let min_i = min_i.ok_or_else(|| Error::Domain("no parties given".into()))?;
    let s_before = von_neumann_entropy(&conditioned)?;
    let after = condition_on_homodyne(&conditioned, &MeasurementSpec::new(ref_m))?;
    let chi = s_before - von_neumann_entropy(&after)?;
    Ok(KeyRateResult {
        mutual_info_bits: min_i,
        holevo_bits: chi,
        rate_bits_per_use: beta * min_i - chi,
        conditioning_modes: cond.to_vec(),
    })
}

struct CkaPattern {
    cond: Vec<usize>,
    reference: Vec<usize>,
    parties: [Vec<usize>; 2],
}

fn cka_pattern<T: Scalar>(scenario: &ScenarioSpec<T>) -> Result<CkaPattern> {
    use Distribution as D;
    use Scheme as S;
    let p = match (scenario.state_kind, scenario.distribution, scenario.scheme) {
        (StateKind::GhzLike, D::TripartiteDefault, S::Dr)
        | (StateKind::Dan, D::TripartiteDefault, S::Dr)
        | (StateKind::GhzLike, D::TripartiteDefault, S::Mid) => CkaPattern {
            cond: vec![],
            reference: vec![0],
            parties: [vec![1], vec![2]],
        },
        (StateKind::GhzLike, D::TripartiteDefault, S::Rr)
        | (StateKind::Dan, D::TripartiteDefault, S::Rr) => CkaPattern {
            cond: vec![],
            reference: vec![1],
            parties: [vec![0], vec![2]],
        },
        (StateKind::SixMode, D::D1, S::Dr) => CkaPattern {
            cond: vec![A2],
            reference: vec![A1],
            parties: [vec![B1], vec![C1]],
        },
        (StateKind::SixMode, D::D1, S::Rr) => CkaPattern {
            cond: vec![B2, A2, C2],
            reference: vec![B1],
            parties: [vec![A1], vec![C1]],
        },
        (StateKind::SixMode, D::D2, S::Dr) => CkaPattern {
            cond: vec![A2],
            reference: vec![A1],
            parties: [vec![B1, B2], vec![C1, C2]],
        },
        (StateKind::SixMode, D::D2, S::Rr) => CkaPattern {
            cond: vec![B2],
            reference: vec![B1],
            parties: [vec![A1, A2], vec![C1, C2]],
        },
        (StateKind::SixMode, D::D3, S::Mid) => CkaPattern {
            cond: vec![A2, B2, C2],
            reference: vec![A1],
            parties: [vec![B1], vec![C1]],
        },
        (StateKind::SixMode, D::D4, S::Mid) => CkaPattern {
            cond: vec![],
            reference: vec![A1, A2],
            parties: [vec![B1, B2], vec![C1, C2]],
        },
        (kind, dist, scheme) => {
            return Err(Error::Domain(format!(
                "no conference-key pattern for {kind:?}/{dist:?}/{scheme:?}"
            )))
        }
    };
    Ok(p)
}

/// Conference key rate `K = beta min[I(ref:j), I(ref:k)] - chi_ref` for
/// the scenario's scheme. Negative rates are reported as-is.
pub fn conference_key_rate<T: Scalar>(
    scenario: &ScenarioSpec<T>,
    ch: &ChannelParams<T>,
) -> Result<KeyRateResult<T>> {
    let pattern = cka_pattern(scenario)?;
    let prepared = prepare_scenario(scenario, ch)?;
    rate_with_conditioning(
        &prepared.cm,
        &pattern.cond,
        &pattern.reference,
        &pattern.parties,
        scenario.beta,
    )
}

struct PostPattern {
    cond: Vec<usize>,
    reference: Vec<usize>,
    party: Vec<usize>,
    /// Scheme whose distribution layout fixes the transmitted set.
    sent_as: Scheme,
}

fn post_pattern<T: Scalar>(scenario: &ScenarioSpec<T>, row: PostCkaRow) -> Result<PostPattern> {
    use Distribution as D;
    use PostCkaRow as R;
    let p = match (scenario.state_kind, scenario.distribution, row) {
        (StateKind::GhzLike, D::TripartiteDefault, R::PostDr)
        | (StateKind::Dan, D::TripartiteDefault, R::PostDr) => PostPattern {
            cond: vec![0],
            reference: vec![1],
            party: vec![2],
            sent_as: Scheme::Dr,
        },
        (StateKind::GhzLike, D::TripartiteDefault, R::DrPostRr)
        | (StateKind::Dan, D::TripartiteDefault, R::DrPostRr) => PostPattern {
            cond: vec![1],
            reference: vec![0],
            party: vec![2],
            sent_as: Scheme::Rr,
        },
        (StateKind::GhzLike, D::TripartiteDefault, R::RrPostRr)
        | (StateKind::Dan, D::TripartiteDefault, R::RrPostRr) => PostPattern {
            cond: vec![1],
            reference: vec![2],
            party: vec![0],
            sent_as: Scheme::Rr,
        },
        (StateKind::GhzLike, D::TripartiteDefault, R::PostMid) => PostPattern {
            cond: vec![0],
            reference: vec![1],
            party: vec![2],
            sent_as: Scheme::Mid,
        },
        (StateKind::SixMode, D::D1, R::PostDr) => PostPattern {
            cond: vec![A1, A2],
            reference: vec![B1],
            party: vec![C1],
            sent_as: Scheme::Dr,
        },
        (StateKind::SixMode, D::D1, R::DrPostRr) => PostPattern {
            cond: vec![B2, A2, C2, B1],
            reference: vec![A1],
            party: vec![C1],
            sent_as: Scheme::Rr,
        },
        (StateKind::SixMode, D::D1, R::RrPostRr) => PostPattern {
            cond: vec![B2, A2, C2, B1],
            reference: vec![C1],
            party: vec![A1],
            sent_as: Scheme::Rr,
        },
        (StateKind::SixMode, D::D2, R::PostDr) => PostPattern {
            cond: vec![A1, A2],
            reference: vec![B1, B2],
            party: vec![C1, C2],
            sent_as: Scheme::Dr,
        },
        (StateKind::SixMode, D::D2, R::DrPostRr) => PostPattern {
            cond: vec![B1, B2],
            reference: vec![A1, A2],
            party: vec![C1, C2],
            sent_as: Scheme::Rr,
        },
        (StateKind::SixMode, D::D2, R::RrPostRr) => PostPattern {
            cond: vec![B1, B2],
            reference: vec![C1, C2],
            party: vec![A1, A2],
            sent_as: Scheme::Rr,
        },
        (StateKind::SixMode, D::D3, R::PostMid) => PostPattern {
            cond: vec![A2, B2, C2, A1],
            reference: vec![B1],
            party: vec![C1],
            sent_as: Scheme::Mid,
        },
        (StateKind::SixMode, D::D4, R::PostMid) => PostPattern {
            cond: vec![A1, A2],
            reference: vec![B1, B2],
            party: vec![C1, C2],
            sent_as: Scheme::Mid,
        },
        (kind, dist, row) => {
            return Err(Error::Domain(format!(
                "no post-CKA pattern for {kind:?}/{dist:?}/{row:?}"
            )))
        }
    };
    Ok(p)
}

/// Bipartite key rate after a conference key: `beta I(ref:party|cond) -
/// chi_{ref|cond}` with the conditioning sets of the chosen table row.
pub fn bipartite_post_cka_rate<T: Scalar>(
    scenario: &ScenarioSpec<T>,
    row: PostCkaRow,
    ch: &ChannelParams<T>,
) -> Result<KeyRateResult<T>> {
    let pattern = post_pattern(scenario, row)?;
    let sent_scenario = ScenarioSpec {
        scheme: pattern.sent_as,
        ..*scenario
    };
    let prepared = prepare_scenario(&sent_scenario, ch)?;
    rate_with_conditioning(
        &prepared.cm,
        &pattern.cond,
        &pattern.reference,
        std::slice::from_ref(&pattern.party),
        scenario.beta,
    )
}

/// Sum of independent bipartite keys the dealer can produce with two
/// remote users: `K = H(j,k) - zeta H(j,k|i) - chi_{jk}` (homodyne-x
/// differential entropies; joint Holevo reference `(j,k)`). The symmetric
/// per-user split is `rate / 2`.
pub fn independent_bipartite_sum<T: Scalar>(
    scenario: &ScenarioSpec<T>,
    ch: &ChannelParams<T>,
) -> Result<KeyRateResult<T>> {
    match (scenario.state_kind, scenario.distribution) {
        (StateKind::Dan, Distribution::TripartiteDefault)
        | (StateKind::SixMode, Distribution::D5) => {}
        (kind, dist) => {
            return Err(Error::Domain(format!(
                "independent-key sum defined for DAN and six-mode D5 only, got {kind:?}/{dist:?}"
            )))
        }
    }
    let prepared = prepare_scenario(scenario, ch)?;
    let dealer = prepared.assignment.dealer.clone();
    let users: Vec<usize> = prepared
        .assignment
        .user_b
        .iter()
        .chain(&prepared.assignment.user_c)
        .copied()
        .collect();
    let h_jk = homodyne_differential_entropy(&prepared.cm, &users)?;
    let conditioned = condition_on_homodyne(&prepared.cm, &MeasurementSpec::new(dealer.clone()))?;
    let users_m = remap_after_removal(&dealer, &users);
    let h_jk_given_i = homodyne_differential_entropy(&conditioned, &users_m)?;
    let s_full = von_neumann_entropy(&prepared.cm)?;
    let after = condition_on_homodyne(&prepared.cm, &MeasurementSpec::new(users.clone()))?;
    let chi_jk = s_full - von_neumann_entropy(&after)?;
    let rate = h_jk - scenario.zeta * h_jk_given_i - chi_jk;
    Ok(KeyRateResult {
        mutual_info_bits: h_jk - h_jk_given_i,
        holevo_bits: chi_jk,
        rate_bits_per_use: rate,
        conditioning_modes: dealer,
    })
}

/// Evaluates whichever rate the kind selects.
pub fn key_rate<T: Scalar>(
    scenario: &ScenarioSpec<T>,
    kind: RateKind,
    ch: &ChannelParams<T>,
) -> Result<KeyRateResult<T>> {
    match kind {
        RateKind::Cka => conference_key_rate(scenario, ch),
        RateKind::PostCka(row) => bipartite_post_cka_rate(scenario, row, ch),
        RateKind::IndependentSum => independent_bipartite_sum(scenario, ch),
    }
}

/// How disclosing the central scalar variable changes the B-C correlation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelationClass {
    Diminish,
    Eliminate,
    Enhance,
}

/// Result of the scalar conditional-correlation classification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalCorrelation<T: Scalar> {
    /// `<B_A C_A> = C3 - C1 C2 / V`.
    pub value: T,
    pub class: CorrelationClass,
}

/// Classifies the conditional covariance `C3 - C1 C2 / V` left between
/// two variables after disclosing a third with variance `V`, where
/// `C1 = <AB>`, `C2 = <AC>`, `C3 = <BC>`.
pub fn conditional_correlation_classify<T: Scalar>(
    c1: T,
    c2: T,
    c3: T,
    v: T,
) -> Result<ConditionalCorrelation<T>> {
    if !(v > T::zero()) {
        return Err(Error::Domain(format!(
            "variance V={} must be positive",
            v.to_subset().unwrap_or(f64::NAN)
        )));
    }
    let subtracted = c1 * c2 / v;
    let value = c3 - subtracted;
    let tol = cst::<T>(1e-12);
    let class = if value.abs() <= tol {
        CorrelationClass::Eliminate
    } else if subtracted * c3 > T::zero() && value.abs() < c3.abs() {
        CorrelationClass::Diminish
    } else {
        CorrelationClass::Enhance
    };
    Ok(ConditionalCorrelation { value, class })
}
