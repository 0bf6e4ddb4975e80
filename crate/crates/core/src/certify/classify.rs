use serde::{Deserialize, Serialize};

use super::CertifyError;

/// Three-valued truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tri {
    True,
    False,
    Unknown,
}

impl From<bool> for Tri {
    fn from(b: bool) -> Self {
        if b {
            Tri::True
        } else {
            Tri::False
        }
    }
}

/// A flag value and where it comes from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flag {
    pub value: Tri,
    #[serde(default)]
    pub provenance: String,
}

impl Flag {
    pub fn new(value: Tri, provenance: &str) -> Self {
        Flag {
            value,
            provenance: provenance.to_string(),
        }
    }

    pub fn unknown() -> Self {
        Flag {
            value: Tri::Unknown,
            provenance: String::new(),
        }
    }
}

impl Default for Flag {
    fn default() -> Self {
        Flag::unknown()
    }
}

/// Structural facts about an operator `A: X -> Y` between Banach spaces.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassificationFlags {
    pub closed_range: Flag,
    pub complemented_nullspace: Flag,
    /// `R(A)` contains an infinite-dimensional closed subspace.
    pub range_contains_infdim_closed_subspace: Flag,
    pub strictly_singular: Flag,
    pub compact: Flag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    WellPosed,
    IllPosedTypeI,
    #[serde(rename = "ill_posed_type_ii")]
    IllPosedTypeII,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub verdict: Verdict,
    /// Flag combinations that contradict known implications.
    pub warnings: Vec<String>,
}

/// Well-posed iff the range is closed and the null space is complemented;
/// otherwise type I iff the range contains an infinite-dimensional closed
/// subspace, else type II.
///
/// A flag is only required when the verdict depends on it: a `false`
/// closed-range or complementation flag decides ill-posedness even if the
/// other one is unknown.
pub fn classify(flags: &ClassificationFlags) -> Result<Classification, CertifyError> {
    let (cr, cn) = (flags.closed_range.value, flags.complemented_nullspace.value);
    let ill_posed = match (cr, cn) {
        (Tri::True, Tri::True) => false,
        (Tri::False, _) | (_, Tri::False) => true,
        (Tri::Unknown, _) => {
            return Err(CertifyError::IndeterminateClassification(
                "closed_range".into(),
            ))
        }
        (_, Tri::Unknown) => {
            return Err(CertifyError::IndeterminateClassification(
                "complemented_nullspace".into(),
            ))
        }
    };
    let verdict = if !ill_posed {
        Verdict::WellPosed
    } else {
        match flags.range_contains_infdim_closed_subspace.value {
            Tri::True => Verdict::IllPosedTypeI,
            Tri::False => Verdict::IllPosedTypeII,
            Tri::Unknown => {
                return Err(CertifyError::IndeterminateClassification(
                    "range_contains_infdim_closed_subspace".into(),
                ))
            }
        }
    };
    Ok(Classification {
        verdict,
        warnings: consistency_warnings(flags),
    })
}

fn consistency_warnings(f: &ClassificationFlags) -> Vec<String> {
    let mut w = Vec::new();
    let is = |flag: &Flag| flag.value == Tri::True;
    // strictly singular with an infinite-dimensional closed subspace in the
    // range: the null space cannot be complemented and the operator is not compact
    if is(&f.strictly_singular) && is(&f.range_contains_infdim_closed_subspace) {
        if is(&f.complemented_nullspace) {
            w.push("strictly singular with infinite-dimensional closed range part, yet complemented null space".into());
        }
        if is(&f.compact) {
            w.push(
                "compact operators have no infinite-dimensional closed subspace in their range"
                    .into(),
            );
        }
    }
    if is(&f.compact) && f.strictly_singular.value == Tri::False {
        w.push("compact operators are strictly singular".into());
    }
    w
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub name: String,
    pub description: String,
    pub flags: ClassificationFlags,
}

/// Operators whose flags are known in closed form.
pub fn catalog() -> Vec<CatalogEntry> {
    let f = Flag::new;
    vec![
        CatalogEntry {
            name: "mazur".into(),
            description:
                "B: l1 -> l2, x -> sum x_k zeta_k over a dense sequence of the unit sphere".into(),
            flags: ClassificationFlags {
                closed_range: f(Tri::True, "B is surjective (open mapping onto l2)"),
                complemented_nullspace: f(
                    Tri::False,
                    "strictly singular surjection from l1 onto l2",
                ),
                range_contains_infdim_closed_subspace: f(Tri::True, "R(B) = l2"),
                strictly_singular: f(
                    Tri::True,
                    "l2 and l1 share no infinite-dimensional isomorphic subspace",
                ),
                compact: f(Tri::False, "surjective onto an infinite-dimensional space"),
            },
        },
        CatalogEntry {
            name: "mazur-adjoint".into(),
            description: "B*: l2 -> l_inf, eta -> (<eta, zeta_k>)_k, an isometric embedding".into(),
            flags: ClassificationFlags {
                closed_range: f(Tri::True, "isometry"),
                complemented_nullspace: f(Tri::True, "injective: N(B*) = {0}"),
                range_contains_infdim_closed_subspace: f(Tri::True, "R(B*) is a closed copy of l2"),
                strictly_singular: f(Tri::False, "isomorphism onto its range"),
                compact: f(Tri::False, "isometry on an infinite-dimensional space"),
            },
        },
        CatalogEntry {
            name: "composite".into(),
            description: "A = (B, C): l1 x l1 -> l2 x l2, C the coordinate embedding".into(),
            flags: ClassificationFlags {
                closed_range: f(Tri::False, "R(C) is dense and not closed in l2"),
                complemented_nullspace: f(Tri::False, "N(A) = N(B) x {0} is uncomplemented"),
                range_contains_infdim_closed_subspace: f(Tri::True, "R(A) contains l2 x {0}"),
                strictly_singular: f(Tri::True, "both components are strictly singular"),
                compact: f(Tri::False, "contains the surjection B"),
            },
        },
        CatalogEntry {
            name: "mazur-restricted".into(),
            description:
                "B restricted to a complement U of N(B) on which it is injective but not onto"
                    .into(),
            flags: ClassificationFlags {
                closed_range: f(Tri::False, "dense, non-closed range"),
                complemented_nullspace: f(Tri::True, "injective on U"),
                range_contains_infdim_closed_subspace: f(
                    Tri::False,
                    "restriction of a strictly singular map with dense non-closed range",
                ),
                strictly_singular: f(Tri::True, "restriction of B"),
                compact: f(Tri::Unknown, ""),
            },
        },
    ]
}
