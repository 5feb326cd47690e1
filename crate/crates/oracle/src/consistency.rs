use std::fmt;
use std::str::FromStr;

/// Every consistency the oracle can check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConsistencyId {
    Gac,
    Sac,
    BiSac,
    Inverse,
    Pc,
    ThreeC,
    Dc,
    TwoSac,
    Ppc,
    Cpc,
    Cdc,
    C3c,
    C2sac,
    SPc,
    S3c,
    SDc,
    S2sac,
    SPpc,
    SCpc,
    SCdc,
    SC3c,
    SC2sac,
    SacCdc,
}

/// The first-order part of a consistency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValueCheck {
    Gac,
    Sac,
    BiSac,
    Inverse,
}

/// The second-order part of a consistency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairCheck {
    Pc,
    ThreeC,
    Dc,
    TwoSac,
    Ppc,
    Cpc,
    Cdc,
    C3c,
    C2sac,
}

impl PairCheck {
    /// Conservative checks only look at pairs already bound by a binary constraint.
    pub fn is_conservative(self) -> bool {
        matches!(self, PairCheck::Ppc | PairCheck::Cpc | PairCheck::Cdc | PairCheck::C3c | PairCheck::C2sac)
    }
}

impl ConsistencyId {
    pub const ALL: [ConsistencyId; 23] = [
        ConsistencyId::Gac,
        ConsistencyId::Sac,
        ConsistencyId::BiSac,
        ConsistencyId::Inverse,
        ConsistencyId::Pc,
        ConsistencyId::ThreeC,
        ConsistencyId::Dc,
        ConsistencyId::TwoSac,
        ConsistencyId::Ppc,
        ConsistencyId::Cpc,
        ConsistencyId::Cdc,
        ConsistencyId::C3c,
        ConsistencyId::C2sac,
        ConsistencyId::SPc,
        ConsistencyId::S3c,
        ConsistencyId::SDc,
        ConsistencyId::S2sac,
        ConsistencyId::SPpc,
        ConsistencyId::SCpc,
        ConsistencyId::SCdc,
        ConsistencyId::SC3c,
        ConsistencyId::SC2sac,
        ConsistencyId::SacCdc,
    ];

    pub fn parts(self) -> (Option<ValueCheck>, Option<PairCheck>) {
        use ConsistencyId as C;
        use PairCheck as P;
        use ValueCheck as V;
        match self {
            C::Gac => (Some(V::Gac), None),
            C::Sac => (Some(V::Sac), None),
            C::BiSac => (Some(V::BiSac), None),
            C::Inverse => (Some(V::Inverse), None),
            C::Pc => (None, Some(P::Pc)),
            C::ThreeC => (None, Some(P::ThreeC)),
            C::Dc => (None, Some(P::Dc)),
            C::TwoSac => (None, Some(P::TwoSac)),
            C::Ppc => (None, Some(P::Ppc)),
            C::Cpc => (None, Some(P::Cpc)),
            C::Cdc => (None, Some(P::Cdc)),
            C::C3c => (None, Some(P::C3c)),
            C::C2sac => (None, Some(P::C2sac)),
            C::SPc => (Some(V::Gac), Some(P::Pc)),
            C::S3c => (Some(V::Gac), Some(P::ThreeC)),
            C::SDc => (Some(V::Gac), Some(P::Dc)),
            C::S2sac => (Some(V::Gac), Some(P::TwoSac)),
            C::SPpc => (Some(V::Gac), Some(P::Ppc)),
            C::SCpc => (Some(V::Gac), Some(P::Cpc)),
            C::SCdc => (Some(V::Gac), Some(P::Cdc)),
            C::SC3c => (Some(V::Gac), Some(P::C3c)),
            C::SC2sac => (Some(V::Gac), Some(P::C2sac)),
            C::SacCdc => (Some(V::Sac), Some(P::Cdc)),
        }
    }

    /// Whether the oracle can compute a closure (BiSAC and inverse
    /// consistency are checkers only).
    pub fn is_closurable(self) -> bool {
        !matches!(self.parts().0, Some(ValueCheck::BiSac) | Some(ValueCheck::Inverse))
    }

    pub fn name(self) -> &'static str {
        use ConsistencyId as C;
        match self {
            C::Gac => "GAC",
            C::Sac => "SAC",
            C::BiSac => "BiSAC",
            C::Inverse => "IC",
            C::Pc => "PC",
            C::ThreeC => "3C",
            C::Dc => "DC",
            C::TwoSac => "2SAC",
            C::Ppc => "PPC",
            C::Cpc => "CPC",
            C::Cdc => "CDC",
            C::C3c => "C3C",
            C::C2sac => "C2SAC",
            C::SPc => "sPC",
            C::S3c => "s3C",
            C::SDc => "sDC",
            C::S2sac => "s2SAC",
            C::SPpc => "sPPC",
            C::SCpc => "sCPC",
            C::SCdc => "sCDC",
            C::SC3c => "sC3C",
            C::SC2sac => "sC2SAC",
            C::SacCdc => "SAC+CDC",
        }
    }
}

impl fmt::Display for ConsistencyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConsistencyId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("AC") {
            return Ok(ConsistencyId::Gac);
        }
        if s.eq_ignore_ascii_case("inverse") {
            return Ok(ConsistencyId::Inverse);
        }
        // exact spelling first, so "sPC" and "SPC" stay distinct from "PC" only by prefix
        if let Some(c) = ConsistencyId::ALL.iter().find(|c| c.name() == s) {
            return Ok(*c);
        }
        ConsistencyId::ALL
            .iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .copied()
            .ok_or_else(|| format!("unknown consistency '{s}'"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for c in ConsistencyId::ALL {
            assert_eq!(c.name().parse::<ConsistencyId>().unwrap(), c);
        }
        assert_eq!("ac".parse::<ConsistencyId>().unwrap(), ConsistencyId::Gac);
        assert_eq!("scdc".parse::<ConsistencyId>().unwrap(), ConsistencyId::SCdc);
        assert!("XYZ".parse::<ConsistencyId>().is_err());
    }

    #[test]
    fn strong_variants_add_gac() {
        assert_eq!(ConsistencyId::SDc.parts(), (Some(ValueCheck::Gac), Some(PairCheck::Dc)));
        assert_eq!(ConsistencyId::SacCdc.parts(), (Some(ValueCheck::Sac), Some(PairCheck::Cdc)));
        assert!(!ConsistencyId::BiSac.is_closurable());
        assert!(ConsistencyId::SacCdc.is_closurable());
    }
}
