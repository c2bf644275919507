//! Identifiers for joints and cables.
//!
//! A [`JointId`] is a (finger, joint, axis) triple. Only the combinations
//! present on the hand can be constructed; [`JointId::ALL`] lists them in
//! the canonical order used by every joint-indexed vector in the crate.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Finger {
    Thumb,
    Index,
    Middle,
    Ring,
    Little,
    Palm,
}

impl Finger {
    pub const ALL: [Finger; 6] = [
        Finger::Thumb,
        Finger::Index,
        Finger::Middle,
        Finger::Ring,
        Finger::Little,
        Finger::Palm,
    ];

    /// The five digits, i.e. everything except the palm.
    pub const DIGITS: [Finger; 5] = [
        Finger::Thumb,
        Finger::Index,
        Finger::Middle,
        Finger::Ring,
        Finger::Little,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Finger::Thumb => "Thumb",
            Finger::Index => "Index",
            Finger::Middle => "Middle",
            Finger::Ring => "Ring",
            Finger::Little => "Little",
            Finger::Palm => "Palm",
        }
    }
}

impl fmt::Display for Finger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Finger {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Finger::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown finger `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Joint {
    Cmc,
    Mcp,
    Pip,
    Dip,
    Ip,
    Arch,
}

impl Joint {
    const ALL: [Joint; 6] = [Joint::Cmc, Joint::Mcp, Joint::Pip, Joint::Dip, Joint::Ip, Joint::Arch];

    pub fn name(self) -> &'static str {
        match self {
            Joint::Cmc => "CMC",
            Joint::Mcp => "MCP",
            Joint::Pip => "PIP",
            Joint::Dip => "DIP",
            Joint::Ip => "IP",
            Joint::Arch => "Arch",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    FlexExt,
    AbdAdd,
    ProSup,
    /// Compliance slider of the index fingertip; not an independent DOF.
    Chute,
}

impl Axis {
    const ALL: [Axis; 4] = [Axis::FlexExt, Axis::AbdAdd, Axis::ProSup, Axis::Chute];

    pub fn name(self) -> &'static str {
        match self {
            Axis::FlexExt => "FlexExt",
            Axis::AbdAdd => "AbdAdd",
            Axis::ProSup => "ProSup",
            Axis::Chute => "Chute",
        }
    }
}

/// A legal (finger, joint, axis) combination.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct JointId {
    finger: Finger,
    joint: Joint,
    axis: Axis,
}

/// Number of entries in a joint-indexed vector (19 DOFs plus the chute slider).
pub const JOINT_COUNT: usize = 20;

/// Number of independent DOFs.
pub const DOF_COUNT: usize = 19;

const fn jid(finger: Finger, joint: Joint, axis: Axis) -> JointId {
    JointId { finger, joint, axis }
}

impl JointId {
    pub const THUMB_CMC_FLEX: JointId = jid(Finger::Thumb, Joint::Cmc, Axis::FlexExt);
    pub const THUMB_CMC_ABD: JointId = jid(Finger::Thumb, Joint::Cmc, Axis::AbdAdd);
    pub const THUMB_MCP_FLEX: JointId = jid(Finger::Thumb, Joint::Mcp, Axis::FlexExt);
    pub const THUMB_MCP_PROSUP: JointId = jid(Finger::Thumb, Joint::Mcp, Axis::ProSup);
    pub const THUMB_IP_FLEX: JointId = jid(Finger::Thumb, Joint::Ip, Axis::FlexExt);
    pub const INDEX_MCP_FLEX: JointId = jid(Finger::Index, Joint::Mcp, Axis::FlexExt);
    pub const INDEX_MCP_ABD: JointId = jid(Finger::Index, Joint::Mcp, Axis::AbdAdd);
    pub const INDEX_PIP_FLEX: JointId = jid(Finger::Index, Joint::Pip, Axis::FlexExt);
    pub const INDEX_DIP_FLEX: JointId = jid(Finger::Index, Joint::Dip, Axis::FlexExt);
    pub const INDEX_DIP_CHUTE: JointId = jid(Finger::Index, Joint::Dip, Axis::Chute);
    pub const MIDDLE_MCP_FLEX: JointId = jid(Finger::Middle, Joint::Mcp, Axis::FlexExt);
    pub const MIDDLE_PIP_FLEX: JointId = jid(Finger::Middle, Joint::Pip, Axis::FlexExt);
    pub const MIDDLE_DIP_FLEX: JointId = jid(Finger::Middle, Joint::Dip, Axis::FlexExt);
    pub const RING_MCP_FLEX: JointId = jid(Finger::Ring, Joint::Mcp, Axis::FlexExt);
    pub const RING_PIP_FLEX: JointId = jid(Finger::Ring, Joint::Pip, Axis::FlexExt);
    pub const RING_DIP_FLEX: JointId = jid(Finger::Ring, Joint::Dip, Axis::FlexExt);
    pub const LITTLE_MCP_FLEX: JointId = jid(Finger::Little, Joint::Mcp, Axis::FlexExt);
    pub const LITTLE_PIP_FLEX: JointId = jid(Finger::Little, Joint::Pip, Axis::FlexExt);
    pub const LITTLE_DIP_FLEX: JointId = jid(Finger::Little, Joint::Dip, Axis::FlexExt);
    pub const PALM_ARCH: JointId = jid(Finger::Palm, Joint::Arch, Axis::FlexExt);

    /// Canonical ordering of every joint-indexed vector.
    pub const ALL: [JointId; JOINT_COUNT] = [
        Self::THUMB_CMC_FLEX,
        Self::THUMB_CMC_ABD,
        Self::THUMB_MCP_FLEX,
        Self::THUMB_MCP_PROSUP,
        Self::THUMB_IP_FLEX,
        Self::INDEX_MCP_FLEX,
        Self::INDEX_MCP_ABD,
        Self::INDEX_PIP_FLEX,
        Self::INDEX_DIP_FLEX,
        Self::INDEX_DIP_CHUTE,
        Self::MIDDLE_MCP_FLEX,
        Self::MIDDLE_PIP_FLEX,
        Self::MIDDLE_DIP_FLEX,
        Self::RING_MCP_FLEX,
        Self::RING_PIP_FLEX,
        Self::RING_DIP_FLEX,
        Self::LITTLE_MCP_FLEX,
        Self::LITTLE_PIP_FLEX,
        Self::LITTLE_DIP_FLEX,
        Self::PALM_ARCH,
    ];

    /// Returns the joint if the combination exists on the hand.
    pub fn new(finger: Finger, joint: Joint, axis: Axis) -> Option<JointId> {
        let id = jid(finger, joint, axis);
        Self::ALL.contains(&id).then_some(id)
    }

    pub fn finger(self) -> Finger {
        self.finger
    }

    pub fn joint(self) -> Joint {
        self.joint
    }

    pub fn axis(self) -> Axis {
        self.axis
    }

    /// Position of this joint in [`JointId::ALL`].
    pub fn index(self) -> usize {
        Self::ALL
            .iter()
            .position(|&j| j == self)
            .expect("JointId values are always legal")
    }

    /// False only for the chute slider.
    pub fn is_dof(self) -> bool {
        self.axis != Axis::Chute
    }

    /// Flexion joints of a long finger in proximal-to-distal order.
    pub fn flexion_chain(finger: Finger) -> &'static [JointId] {
        match finger {
            Finger::Thumb => &[Self::THUMB_CMC_FLEX, Self::THUMB_MCP_FLEX, Self::THUMB_IP_FLEX],
            Finger::Index => &[Self::INDEX_MCP_FLEX, Self::INDEX_PIP_FLEX, Self::INDEX_DIP_FLEX],
            Finger::Middle => &[Self::MIDDLE_MCP_FLEX, Self::MIDDLE_PIP_FLEX, Self::MIDDLE_DIP_FLEX],
            Finger::Ring => &[Self::RING_MCP_FLEX, Self::RING_PIP_FLEX, Self::RING_DIP_FLEX],
            Finger::Little => &[Self::LITTLE_MCP_FLEX, Self::LITTLE_PIP_FLEX, Self::LITTLE_DIP_FLEX],
            Finger::Palm => &[],
        }
    }

    /// (PIP, DIP) pair joined by a four-bar linkage, if the finger has one.
    pub fn linkage_pair(finger: Finger) -> Option<(JointId, JointId)> {
        match finger {
            Finger::Index => Some((Self::INDEX_PIP_FLEX, Self::INDEX_DIP_FLEX)),
            Finger::Middle => Some((Self::MIDDLE_PIP_FLEX, Self::MIDDLE_DIP_FLEX)),
            Finger::Ring => Some((Self::RING_PIP_FLEX, Self::RING_DIP_FLEX)),
            Finger::Little => Some((Self::LITTLE_PIP_FLEX, Self::LITTLE_DIP_FLEX)),
            Finger::Thumb | Finger::Palm => None,
        }
    }
}

impl fmt::Display for JointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}.{}", self.finger.name(), self.joint.name(), self.axis.name())
    }
}

impl FromStr for JointId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.split('.');
        let (Some(f), Some(j), Some(a), None) = (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err(format!("joint id `{s}` is not of the form Finger.Joint.Axis"));
        };
        let finger: Finger = f.parse()?;
        let joint = Joint::ALL
            .into_iter()
            .find(|x| x.name().eq_ignore_ascii_case(j))
            .ok_or_else(|| format!("unknown joint `{j}` in `{s}`"))?;
        let axis = Axis::ALL
            .into_iter()
            .find(|x| x.name().eq_ignore_ascii_case(a))
            .ok_or_else(|| format!("unknown axis `{a}` in `{s}`"))?;
        JointId::new(finger, joint, axis).ok_or_else(|| format!("`{s}` is not a joint of this hand"))
    }
}

impl TryFrom<String> for JointId {
    type Error = String;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl From<JointId> for String {
    fn from(id: JointId) -> Self {
        id.to_string()
    }
}

/// The eight cables of the hand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CableId {
    /// Blue line, superficial flexor analog (MCP + PIP).
    IndexBL,
    /// Orange line, deep flexor analog (MCP + PIP + DIP).
    IndexOL,
    /// Pink line, extensor analog acting on the proximal phalanx.
    IndexPL,
    MiddleFlexor,
    RingLittleFlexor,
    ThumbYellow,
    ThumbLightBlue,
    ThumbPink,
}

pub const CABLE_COUNT: usize = 8;

impl CableId {
    pub const ALL: [CableId; CABLE_COUNT] = [
        CableId::IndexBL,
        CableId::IndexOL,
        CableId::IndexPL,
        CableId::MiddleFlexor,
        CableId::RingLittleFlexor,
        CableId::ThumbYellow,
        CableId::ThumbLightBlue,
        CableId::ThumbPink,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            CableId::IndexBL => "IndexBL",
            CableId::IndexOL => "IndexOL",
            CableId::IndexPL => "IndexPL",
            CableId::MiddleFlexor => "MiddleFlexor",
            CableId::RingLittleFlexor => "RingLittleFlexor",
            CableId::ThumbYellow => "ThumbYellow",
            CableId::ThumbLightBlue => "ThumbLightBlue",
            CableId::ThumbPink => "ThumbPink",
        }
    }
}

impl fmt::Display for CableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CableId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CableId::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown cable `{s}`"))
    }
}
