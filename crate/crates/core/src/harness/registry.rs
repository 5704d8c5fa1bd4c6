use serde::Serialize;

use crate::error::{Error, Result};
use crate::mixture::Mixture;

/// A named distribution of the simulation study.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Distribution {
    /// Short identifier used in CSV output and on the command line.
    pub id: String,
    /// Human-readable formula.
    pub label: String,
    pub mixture: Mixture,
    /// Published unimodality counts out of 100 for (FTU-exact, FTU-approx,
    /// DFTU), where available.
    pub reference_counts: Option<[u32; 3]>,
}

struct Entry {
    id: &'static str,
    label: &'static str,
    spec: &'static str,
    reference: Option<[u32; 3]>,
    default: bool,
}

// N_a has standard deviation 0.5 (variance 0.25); with variance 0.5 the
// U([1, 4]) and 3-Gaussian rows come out unimodal under every test.
const ENTRIES: &[Entry] = &[
    Entry { id: "normal", label: "N(0, 1)", spec: "gauss:1@0:1", reference: Some([100, 100, 100]), default: true },
    Entry {
        id: "gauss2",
        label: "0.5 (N0 + N1)",
        spec: "gauss:0.5@0:0.25,0.5@1:0.25",
        reference: Some([100, 100, 100]),
        default: true,
    },
    Entry {
        id: "gauss-unif-far",
        label: "0.6 N0 + 0.4 U([4, 8])",
        spec: "gauss:0.6@0:0.25+unif:0.4@4:8",
        reference: Some([0, 0, 0]),
        default: true,
    },
    Entry {
        id: "gauss-unif-near",
        label: "0.6 N0 + 0.4 U([1, 4])",
        spec: "gauss:0.6@0:0.25+unif:0.4@1:4",
        reference: Some([1, 1, 1]),
        default: true,
    },
    Entry {
        id: "dirac3",
        label: "1/3 (d-2 + d0 + d2)",
        spec: "dirac:1@-2,1@0,1@2",
        reference: Some([100, 100, 0]),
        default: true,
    },
    Entry {
        id: "gauss3",
        label: "1/3 (N-2 + N0 + N2)",
        spec: "gauss:1@-2:0.25,1@0:0.25,1@2:0.25",
        reference: Some([100, 100, 4]),
        default: true,
    },
    Entry {
        id: "dirac5",
        label: "0.2 (d-3 + d-1.5 + d2.5 + d4 + d11)",
        spec: "dirac:0.2@-3,0.2@-1.5,0.2@2.5,0.2@4,0.2@11",
        reference: Some([100, 100, 0]),
        default: true,
    },
    Entry {
        id: "gauss5",
        label: "0.2 (N-3 + N-1.5 + N2.5 + N4 + N11)",
        spec: "gauss:0.2@-3:0.25,0.2@-1.5:0.25,0.2@2.5:0.25,0.2@4:0.25,0.2@11:0.25",
        reference: Some([100, 100, 0]),
        default: true,
    },
    Entry {
        id: "dirac3-skew",
        label: "0.2 d-2 + 0.4 d0 + 0.4 d2",
        spec: "dirac:0.2@-2,0.4@0,0.4@2",
        reference: None,
        default: false,
    },
    Entry {
        id: "gauss3-skew",
        label: "0.2 N-2 + 0.4 N0 + 0.4 N2",
        spec: "gauss:0.2@-2:0.25,0.4@0:0.25,0.4@2:0.25",
        reference: None,
        default: false,
    },
];

fn build(e: &Entry) -> Distribution {
    Distribution {
        id: e.id.into(),
        label: e.label.into(),
        mixture: Mixture::parse(e.spec).expect("registry specs are valid"),
        reference_counts: e.reference,
    }
}

/// Every registered distribution, defaults first.
pub fn registry() -> Vec<Distribution> {
    ENTRIES.iter().map(build).collect()
}

/// The eight distributions of the default simulation study.
pub fn default_distributions() -> Vec<Distribution> {
    ENTRIES.iter().filter(|e| e.default).map(build).collect()
}

/// A registered id, or else a mixture spec, which then serves as its own id.
pub fn lookup(name: &str) -> Result<Distribution> {
    if let Some(e) = ENTRIES.iter().find(|e| e.id == name) {
        return Ok(build(e));
    }
    match Mixture::parse(name) {
        Ok(mixture) => Ok(Distribution { id: name.into(), label: name.into(), mixture, reference_counts: None }),
        Err(Error::Parse { position, message }) if !name.contains(':') => Err(Error::Parse {
            position,
            message: format!("'{name}' is neither a registered distribution nor a mixture spec ({message})"),
        }),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixture::Component;

    #[test]
    fn defaults_and_variants() {
        assert_eq!(default_distributions().len(), 8);
        assert_eq!(registry().len(), 10);
        let d = lookup("gauss-unif-far").unwrap();
        assert_eq!(d.mixture.components()[1], Component::Unif { lo: 4.0, hi: 8.0 });
        let d = lookup("dirac3").unwrap();
        assert!(d.mixture.weights().iter().all(|w| (w - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn specs_are_accepted() {
        let d = lookup("dirac:0.5@-1,0.5@1").unwrap();
        assert_eq!(d.id, "dirac:0.5@-1,0.5@1");
        assert!(d.reference_counts.is_none());
        assert!(matches!(lookup("nonsense"), Err(Error::Parse { .. })));
    }
}
