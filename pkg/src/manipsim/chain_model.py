"""Extended DH tables and their compilation into elementary-transform plans.

A chain is built from an 8x5 table whose columns are ``alpha, a, theta, d,
link type``. Rows 1-6 are the modular links, row 7 the tool and row 8 the
floating base. Poses are composed by post-multiplication, so an element's
matrix maps coordinates of the frame after it into the frame before it.

Every link lives inside a conjugation by the constant world/DH rotation
pair: the chain's running frame is world-aligned between links, and each
link rotates into DH axes, applies its DH steps, and rotates back out.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from manipsim.errors import DimensionError, InvalidLinkType, NonFiniteValue

N_LINKS = 6
TOOL_ROW = 7
BASE_ROW = 8

# Rotation from the modelling frame into DH axes and back.
WORLD_TO_DH = np.array(
    [[0.0, -1.0, 0.0, 0.0],
     [0.0, 0.0, -1.0, 0.0],
     [1.0, 0.0, 0.0, 0.0],
     [0.0, 0.0, 0.0, 1.0]]
)
DH_TO_WORLD = np.array(
    [[0.0, 0.0, 1.0, 0.0],
     [-1.0, 0.0, 0.0, 0.0],
     [0.0, -1.0, 0.0, 0.0],
     [0.0, 0.0, 0.0, 1.0]]
)


def rot_x(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


AXIS_ROTATIONS = {"x": rot_x, "y": rot_y, "z": rot_z}


def homogeneous(R=None, p=None) -> np.ndarray:
    """Pack a rotation and a translation into a 4x4 matrix."""
    T = np.eye(4)
    if R is not None:
        T[:3, :3] = R
    if p is not None:
        T[:3, 3] = p
    return T


def translation(x: float = 0.0, y: float = 0.0, z: float = 0.0) -> np.ndarray:
    return homogeneous(p=(x, y, z))


class LinkType(enum.IntEnum):
    EMPTY = 0
    REVOLUTE = 1
    PRISMATIC = 2

    @property
    def letter(self) -> str:
        return {0: "-", 1: "R", 2: "P"}[int(self)]


@dataclass(frozen=True)
class DHRow:
    alpha: float
    a: float
    theta: float
    d: float
    link_type: LinkType

    def as_list(self) -> list[float]:
        return [self.alpha, self.a, self.theta, self.d, float(int(self.link_type))]


@dataclass(frozen=True)
class DHTable:
    """The eight validated rows of an extended DH table."""

    rows: tuple[DHRow, ...]

    def __post_init__(self):
        if len(self.rows) != 8:
            raise DimensionError(f"DH table needs 8 rows, got {len(self.rows)}")

    def link(self, index: int) -> DHRow:
        """Row by 1-based link number (1-6 links, 7 tool, 8 base)."""
        if not 1 <= index <= 8:
            raise IndexError(f"link number {index} outside 1..8")
        return self.rows[index - 1]

    @property
    def tool(self) -> DHRow:
        return self.rows[TOOL_ROW - 1]

    @property
    def base(self) -> DHRow:
        return self.rows[BASE_ROW - 1]

    @property
    def link_types(self) -> list[LinkType]:
        return [r.link_type for r in self.rows[:N_LINKS]]

    def as_array(self) -> np.ndarray:
        return np.array([r.as_list() for r in self.rows], dtype=float)


def parse_dh_table(raw) -> DHTable:
    """Validate an 8x5 numeric matrix and map its columns to DH rows."""
    arr = np.asarray(raw, dtype=float)
    if arr.ndim != 2 or arr.shape != (8, 5):
        raise DimensionError(f"DH table must be 8x5, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteValue("DH table contains non-finite values")
    rows = []
    for i, (alpha, a, theta, d, kind) in enumerate(arr, start=1):
        if kind not in (0.0, 1.0, 2.0):
            raise InvalidLinkType(f"row {i}: link type {kind!r} is not 0, 1 or 2")
        rows.append(DHRow(float(alpha), float(a), float(theta), float(d), LinkType(int(kind))))
    return DHTable(tuple(rows))


class TransformKind(enum.Enum):
    WORLD_TO_DH = "world_to_dh"
    DH_TO_WORLD = "dh_to_world"
    ROT_X = "rot_x"
    ROT_Z = "rot_z"
    TRANS_X = "trans_x"
    TRANS_Z = "trans_z"
    JOINT_ROT_Z = "joint_rot_z"
    JOINT_TRANS_Z = "joint_trans_z"
    BASE_CARTESIAN = "base_cartesian"
    BASE_GIMBAL = "base_gimbal"


DRIVEN_KINDS = {
    TransformKind.JOINT_ROT_Z,
    TransformKind.JOINT_TRANS_Z,
    TransformKind.BASE_CARTESIAN,
    TransformKind.BASE_GIMBAL,
}


@dataclass(frozen=True)
class ElementaryTransform:
    """One step of the chain.

    ``value`` carries the constant angle or length of fixed steps. ``link``
    records provenance (1-6 links, 7 tool, 8 base) and, for joint steps, the
    joint slot that drives it. ``meta`` holds non-kinematic data such as the
    prismatic rail length or the gimbal axis order.
    """

    kind: TransformKind
    value: float = 0.0
    link: int = 0
    meta: tuple = ()

    @property
    def driven(self) -> bool:
        return self.kind in DRIVEN_KINDS

    def matrix(self, q=None) -> np.ndarray:
        """4x4 homogeneous matrix; driven steps need their variable(s) ``q``."""
        k = self.kind
        if k is TransformKind.WORLD_TO_DH:
            return WORLD_TO_DH.copy()
        if k is TransformKind.DH_TO_WORLD:
            return DH_TO_WORLD.copy()
        if k is TransformKind.ROT_X:
            return homogeneous(rot_x(self.value))
        if k is TransformKind.ROT_Z:
            return homogeneous(rot_z(self.value))
        if k is TransformKind.TRANS_X:
            return translation(x=self.value)
        if k is TransformKind.TRANS_Z:
            return translation(z=self.value)
        if q is None:
            raise ValueError(f"{k.value} step needs a joint variable")
        if k is TransformKind.JOINT_ROT_Z:
            return homogeneous(rot_z(float(q)))
        if k is TransformKind.JOINT_TRANS_Z:
            return translation(z=float(q))
        if k is TransformKind.BASE_CARTESIAN:
            return translation(*q)
        # BASE_GIMBAL: q is (rx, ry, rz); intrinsic rotations in the configured order
        R = np.eye(3)
        for axis in self.meta[0]:
            R = R @ AXIS_ROTATIONS[axis](q["xyz".index(axis)])
        return homogeneous(R)


@dataclass(frozen=True)
class AttachmentMarker:
    """Point in an element list where a frame is recorded.

    The recorded frame is the running frame followed by a fixed mount:
    first ``pre_rotation`` turns the marker frame into the link's DH frame,
    then the sensor sits at ``((fraction - along) * a, side * w, 0)`` in DH
    coordinates, where ``along`` is how much of the link length has already
    been traversed when the marker is reached and ``w`` is the configured
    lateral offset.
    """

    name: str
    link: int
    role: str  # "base", "mid", "end", "tool" or "tooltip"
    length: float = 0.0
    along: float = 0.0
    pre_rotation: np.ndarray | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Attachment:
    name: str
    index: int  # number of plan elements applied before the snapshot
    link: int
    role: str
    length: float = 0.0
    along: float = 0.0
    pre_rotation: np.ndarray | None = field(default=None, compare=False)


@dataclass(frozen=True)
class SensorGeometry:
    """Placement of the two IMUs on every link (fractions of the link length)."""

    mid_fraction: float = 0.5
    end_fraction: float = 0.9
    lateral_offset: float = 0.05

    def mount(self, att: Attachment) -> tuple[np.ndarray, np.ndarray]:
        """Constant ``(Rc, pc)`` from the attachment's marker frame to the sensor."""
        Rc = np.eye(3) if att.pre_rotation is None else att.pre_rotation
        if att.role == "mid":
            v = np.array([(self.mid_fraction - att.along) * att.length, self.lateral_offset, 0.0])
        elif att.role == "end":
            v = np.array([(self.end_fraction - att.along) * att.length, -self.lateral_offset, 0.0])
        else:
            v = np.zeros(3)
        return Rc, Rc @ v


@dataclass(frozen=True)
class ChainPlan:
    elements: tuple[ElementaryTransform, ...]
    attachments: dict[str, Attachment]
    joint_slots: dict[int, LinkType]
    table: DHTable
    gimbal_order: str = "xyz"

    @property
    def sensor_names(self) -> list[str]:
        """IMU frames in dataset order (base, links 1-6 mid/end, tool)."""
        return [n for n, a in self.attachments.items() if a.role != "tooltip"]


def _link_exit(row: DHRow, link_index: int, literal: bool):
    """Elements after the joint: the a-translation and the exit rotation."""
    mid = AttachmentMarker(f"link{link_index}_imu_mid", link_index, "mid", row.a)
    if not literal:
        end = AttachmentMarker(f"link{link_index}_imu_end", link_index, "end", row.a, along=1.0)
        return [
            mid,
            ElementaryTransform(TransformKind.TRANS_X, row.a, link_index),
            end,
            ElementaryTransform(TransformKind.DH_TO_WORLD, link=link_index),
        ]
    # Counter-rotate so z points along the link, walk it in two halves,
    # then re-enter and leave the DH frame.
    half = row.a / 2.0
    return [
        ElementaryTransform(TransformKind.DH_TO_WORLD, link=link_index),
        ElementaryTransform(TransformKind.TRANS_Z, half, link_index),
        AttachmentMarker(mid.name, link_index, "mid", row.a, along=0.5,
                         pre_rotation=WORLD_TO_DH[:3, :3].copy()),
        ElementaryTransform(TransformKind.TRANS_Z, half, link_index),
        ElementaryTransform(TransformKind.WORLD_TO_DH, link=link_index),
        AttachmentMarker(f"link{link_index}_imu_end", link_index, "end", row.a, along=1.0),
        ElementaryTransform(TransformKind.DH_TO_WORLD, link=link_index),
    ]


def plan_revolute_link(row: DHRow, link_index: int, literal: bool = False) -> list:
    """Elements of a revolute link. The row's fixed theta is not used."""
    return [
        ElementaryTransform(TransformKind.WORLD_TO_DH, link=link_index),
        ElementaryTransform(TransformKind.ROT_X, row.alpha, link_index),
        ElementaryTransform(TransformKind.TRANS_Z, row.d, link_index),
        ElementaryTransform(TransformKind.JOINT_ROT_Z, link=link_index),
        *_link_exit(row, link_index, literal),
    ]


def plan_prismatic_link(row: DHRow, link_index: int, literal: bool = False) -> list:
    """Elements of a prismatic link.

    The fixed theta rotation takes the place of the d translation; d only
    describes the rail length and is kept as metadata on the joint step.
    """
    return [
        ElementaryTransform(TransformKind.WORLD_TO_DH, link=link_index),
        ElementaryTransform(TransformKind.ROT_X, row.alpha, link_index),
        ElementaryTransform(TransformKind.ROT_Z, row.theta, link_index),
        ElementaryTransform(TransformKind.JOINT_TRANS_Z, link=link_index, meta=(("rail_length", row.d),)),
        *_link_exit(row, link_index, literal),
    ]


def plan_empty_link(link_index: int) -> list:
    return []


def plan_base(gimbal_order: str = "xyz") -> list:
    order = gimbal_order.lower()
    if sorted(order) != ["x", "y", "z"]:
        raise ValueError(f"gimbal order must be a permutation of 'xyz', got {gimbal_order!r}")
    return [
        ElementaryTransform(TransformKind.BASE_CARTESIAN, link=BASE_ROW),
        ElementaryTransform(TransformKind.BASE_GIMBAL, link=BASE_ROW, meta=(order,)),
        AttachmentMarker("base_imu", BASE_ROW, "base"),
    ]


def plan_tool(row: DHRow) -> list:
    half = row.a / 2.0
    return [
        ElementaryTransform(TransformKind.TRANS_Z, half, TOOL_ROW),
        ElementaryTransform(TransformKind.TRANS_Z, half, TOOL_ROW),
        ElementaryTransform(TransformKind.WORLD_TO_DH, link=TOOL_ROW),
        AttachmentMarker("tool_imu", TOOL_ROW, "tool"),
        AttachmentMarker("tooltip", TOOL_ROW, "tooltip"),
    ]


def plan_link(row: DHRow, link_index: int, literal: bool = False) -> list:
    if row.link_type is LinkType.REVOLUTE:
        return plan_revolute_link(row, link_index, literal)
    if row.link_type is LinkType.PRISMATIC:
        return plan_prismatic_link(row, link_index, literal)
    return plan_empty_link(link_index)


def compile_chain(table, gimbal_order: str = "xyz", literal: bool = False) -> ChainPlan:
    """Concatenate base, link 1-6 and tool plans into a :class:`ChainPlan`.

    ``table`` may be a :class:`DHTable` or a raw 8x5 matrix. With
    ``literal=True`` each link's a-translation is emitted as the six-step
    rotate/half/half/rotate sequence instead of a single x translation.
    """
    if not isinstance(table, DHTable):
        table = parse_dh_table(table)
    items = list(plan_base(gimbal_order))
    joint_slots = {}
    for i in range(1, N_LINKS + 1):
        row = table.link(i)
        items += plan_link(row, i, literal)
        if row.link_type is not LinkType.EMPTY:
            joint_slots[i] = row.link_type
    items += plan_tool(table.tool)

    elements: list[ElementaryTransform] = []
    attachments: dict[str, Attachment] = {}
    for item in items:
        if isinstance(item, AttachmentMarker):
            attachments[item.name] = Attachment(
                item.name, len(elements), item.link, item.role,
                item.length, item.along, item.pre_rotation,
            )
        else:
            elements.append(item)
    return ChainPlan(tuple(elements), attachments, joint_slots, table, gimbal_order.lower())
