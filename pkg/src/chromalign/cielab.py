"""CIELAB geometry: chip table ingestion, CMC color difference, the
similarity kernel, and hue-based temperature classification.

Lab values are interpreted against illuminant C with the 2-degree standard
observer. Display-space conversions Bradford-adapt C -> D65 before sRGB.
"""

import colorsys
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np

from chromalign.errors import IntegrityError, ParseError

# CIE 1931 2-degree observer white points (Y normalized to 1)
WHITE_C = (0.98074, 1.0, 1.18232)
WHITE_D65 = (0.95047, 1.0, 1.08883)

_EPS = 216.0 / 24389.0
_KAPPA = 24389.0 / 27.0

_BRADFORD = np.array([
    [0.8951, 0.2664, -0.1614],
    [-0.7502, 1.7135, 0.0367],
    [0.0389, -0.0685, 1.0296],
])

# linear-light XYZ (D65) -> sRGB primaries
_XYZ_TO_SRGB = np.array([
    [3.2404542, -1.5371385, -0.4985314],
    [-0.9692660, 1.8760108, 0.0415560],
    [0.0556434, -0.2040259, 1.0572252],
])

VALUE_ROWS = "ABCDEFGHIJ"

DEFAULT_CMC_RATIOS = (2.0, 1.0)
DEFAULT_C_SCALE = 0.001
# reds / oranges / yellows / pinks; greens and blues fall outside
DEFAULT_WARM_HUE_RANGES = ((315.0, 360.0), (0.0, 90.0))


@dataclass(frozen=True)
class LabColor:
    """A point in CIELAB: L lightness, a green-red, b blue-yellow."""

    L: float
    a: float
    b: float

    def __post_init__(self):
        if not (0.0 <= self.L <= 100.0):
            raise ValueError(f"L must be in [0, 100], got {self.L}")
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValueError(f"a, b must be finite, got ({self.a}, {self.b})")

    def as_array(self) -> np.ndarray:
        return np.array([self.L, self.a, self.b])


@dataclass(frozen=True)
class MunsellChip:
    """One chart chip: position (hue column, value row) plus Lab coordinates."""

    chip_id: int
    hue_column: int
    value_row: str
    lab: LabColor

    def __post_init__(self):
        if not (0 <= self.hue_column <= 40):
            raise ValueError(f"hue_column must be 0..40, got {self.hue_column}")
        if self.value_row not in VALUE_ROWS:
            raise ValueError(f"value_row must be one of {VALUE_ROWS}, got {self.value_row!r}")


class ChipTable:
    """Ordered collection of chart chips, indexed densely by chip_id.

    Production tables hold exactly 330 chips (ids 0..329); smaller tables are
    allowed via expected_count for toy data.
    """

    def __init__(self, chips: Iterable[MunsellChip], expected_count: int = 330):
        chips = sorted(chips, key=lambda c: c.chip_id)
        if len(chips) != expected_count:
            raise IntegrityError(
                f"chip table must hold exactly {expected_count} chips, got {len(chips)}")
        ids = [c.chip_id for c in chips]
        if ids != list(range(expected_count)):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            missing = sorted(set(range(expected_count)) - set(ids))
            raise IntegrityError(
                f"chip ids must be 0..{expected_count - 1} exactly once "
                f"(duplicates: {dupes}, missing: {missing})")
        positions = [(c.hue_column, c.value_row) for c in chips]
        if len(set(positions)) != len(positions):
            raise IntegrityError("duplicate (hue_column, value_row) positions")
        self._chips = tuple(chips)

    def __len__(self) -> int:
        return len(self._chips)

    def __iter__(self) -> Iterator[MunsellChip]:
        return iter(self._chips)

    def by_id(self, chip_id: int) -> MunsellChip:
        if not (0 <= chip_id < len(self._chips)):
            raise KeyError(f"no chip with id {chip_id}")
        return self._chips[chip_id]

    @property
    def chip_ids(self) -> tuple[int, ...]:
        return tuple(c.chip_id for c in self._chips)

    def lab_matrix(self) -> np.ndarray:
        """(n, 3) Lab coordinates ordered by chip_id."""
        return np.array([[c.lab.L, c.lab.a, c.lab.b] for c in self._chips])


def load_chip_table(path: str | Path, expected_count: int = 330) -> ChipTable:
    """Read a chip coordinate file.

    Format: whitespace-separated columns ``chip_id value_row hue_column L a b``,
    one chip per line; ``#``-prefixed comment lines and blank lines ignored.
    """
    chips = []
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split()
            if len(fields) != 6:
                raise ParseError(f"expected 6 fields, got {len(fields)}", line_no)
            try:
                chip_id = int(fields[0])
                hue_column = int(fields[2])
                lab = LabColor(float(fields[3]), float(fields[4]), float(fields[5]))
            except ValueError as exc:
                raise ParseError(str(exc), line_no) from exc
            value_row = fields[1]
            try:
                chips.append(MunsellChip(chip_id, hue_column, value_row, lab))
            except ValueError as exc:
                raise ParseError(str(exc), line_no) from exc
    seen = {}
    for chip in chips:
        if chip.chip_id in seen:
            raise IntegrityError(f"duplicate chip_id {chip.chip_id}")
        seen[chip.chip_id] = chip
    return ChipTable(chips, expected_count=expected_count)


def delta_e_cmc(reference: LabColor, sample: LabColor,
                l_ratio: float = 2.0, c_ratio: float = 1.0) -> float:
    """CMC(l:c) color difference. Asymmetric: weights come from the reference.

    Defaults l=2, c=1 (acceptability ratio).
    """
    if l_ratio <= 0 or c_ratio <= 0:
        raise ValueError("l_ratio and c_ratio must be positive")
    l1, a1, b1 = reference.L, reference.a, reference.b
    l2, a2, b2 = sample.L, sample.a, sample.b

    c1 = math.hypot(a1, b1)
    c2 = math.hypot(a2, b2)
    dc = c1 - c2
    dl = l1 - l2
    da = a1 - a2
    db = b1 - b2
    # dH^2 enters the formula squared; clamp roundoff negatives
    dh_sq = max(da * da + db * db - dc * dc, 0.0)

    if l1 < 16.0:
        sl = 0.511
    else:
        sl = 0.040975 * l1 / (1.0 + 0.01765 * l1)
    sc = 0.0638 * c1 / (1.0 + 0.0131 * c1) + 0.638

    h1 = math.degrees(math.atan2(b1, a1)) % 360.0
    if 164.0 <= h1 <= 345.0:
        t = 0.56 + abs(0.2 * math.cos(math.radians(h1 + 168.0)))
    else:
        t = 0.36 + abs(0.4 * math.cos(math.radians(h1 + 35.0)))
    c1_4 = c1 ** 4
    f = math.sqrt(c1_4 / (c1_4 + 1900.0))
    sh = sc * (f * t + 1.0 - f)

    term = (dl / (l_ratio * sl)) ** 2 + (dc / (c_ratio * sc)) ** 2 + dh_sq / sh ** 2
    return math.sqrt(max(term, 0.0))


def similarity_kernel(dist: float, c_scale: float = DEFAULT_C_SCALE) -> float:
    """Gaussian-type similarity exp(-c * dist^2); 1 at zero distance."""
    if dist < 0:
        raise ValueError(f"dist must be non-negative, got {dist}")
    if c_scale <= 0:
        raise ValueError(f"c_scale must be positive, got {c_scale}")
    return math.exp(-c_scale * dist * dist)


class Hsv(NamedTuple):
    hue: float          # degrees [0, 360)
    saturation: float   # [0, 1]
    value: float        # [0, 1]
    achromatic: bool    # True when saturation ~ 0; hue then reported as 0


def _bradford_adaptation(src: Sequence[float], dst: Sequence[float]) -> np.ndarray:
    rho_src = _BRADFORD @ np.asarray(src)
    rho_dst = _BRADFORD @ np.asarray(dst)
    return np.linalg.inv(_BRADFORD) @ np.diag(rho_dst / rho_src) @ _BRADFORD


_ADAPT_C_TO_D65 = _bradford_adaptation(WHITE_C, WHITE_D65)
_ADAPT_D65_TO_C = _bradford_adaptation(WHITE_D65, WHITE_C)


def _lab_to_xyz(lab: LabColor, white: Sequence[float]) -> np.ndarray:
    fy = (lab.L + 16.0) / 116.0
    fx = fy + lab.a / 500.0
    fz = fy - lab.b / 200.0
    xr = fx ** 3 if fx ** 3 > _EPS else (116.0 * fx - 16.0) / _KAPPA
    yr = fy ** 3 if lab.L > _KAPPA * _EPS else lab.L / _KAPPA
    zr = fz ** 3 if fz ** 3 > _EPS else (116.0 * fz - 16.0) / _KAPPA
    return np.array([xr, yr, zr]) * np.asarray(white)


def _xyz_to_lab(xyz: Sequence[float], white: Sequence[float]) -> LabColor:
    ratios = np.asarray(xyz) / np.asarray(white)
    f = np.where(ratios > _EPS, np.cbrt(ratios), (_KAPPA * ratios + 16.0) / 116.0)
    L = 116.0 * float(f[1]) - 16.0
    return LabColor(min(max(L, 0.0), 100.0),
                    500.0 * float(f[0] - f[1]), 200.0 * float(f[1] - f[2]))


def _gamma_encode(v: np.ndarray) -> np.ndarray:
    return np.where(v <= 0.0031308, 12.92 * v, 1.055 * np.power(v, 1.0 / 2.4) - 0.055)


def _gamma_decode(v: np.ndarray) -> np.ndarray:
    return np.where(v <= 0.04045, v / 12.92, np.power((v + 0.055) / 1.055, 2.4))


def lab_to_srgb(lab: LabColor) -> tuple[float, float, float]:
    """Lab (illuminant C) -> sRGB in [0, 1], out-of-gamut values clipped."""
    xyz_c = _lab_to_xyz(lab, WHITE_C)
    xyz_d65 = _ADAPT_C_TO_D65 @ xyz_c
    rgb_linear = np.clip(_XYZ_TO_SRGB @ xyz_d65, 0.0, 1.0)
    r, g, b = _gamma_encode(rgb_linear)
    return float(r), float(g), float(b)


def srgb_to_lab(r: float, g: float, b: float) -> LabColor:
    """Inverse display transform: sRGB -> XYZ(D65) -> Bradford -> Lab (illuminant C)."""
    rgb_linear = _gamma_decode(np.array([r, g, b], dtype=float))
    xyz_d65 = np.linalg.inv(_XYZ_TO_SRGB) @ rgb_linear
    return _xyz_to_lab(_ADAPT_D65_TO_C @ xyz_d65, WHITE_C)


_ACHROMATIC_SATURATION = 1e-4


def lab_to_hsv(lab: LabColor) -> Hsv:
    """Convert to HSV through the clipped sRGB rendering of the Lab color."""
    r, g, b = lab_to_srgb(lab)
    h, s, v = colorsys.rgb_to_hsv(r, g, b)
    if s < _ACHROMATIC_SATURATION:
        return Hsv(0.0, s, v, True)
    return Hsv((h * 360.0) % 360.0, s, v, False)


class Temperature(Enum):
    WARM = "warm"
    COOL = "cool"


def classify_temperature(
    lab: LabColor,
    warm_hue_ranges: Sequence[tuple[float, float]] = DEFAULT_WARM_HUE_RANGES,
    achromatic_default: Temperature = Temperature.COOL,
) -> Temperature:
    """Warm iff the HSV hue falls in any [lo, hi) interval; achromatic chips
    take the configured default."""
    hsv = lab_to_hsv(lab)
    if hsv.achromatic:
        return achromatic_default
    for lo, hi in warm_hue_ranges:
        if lo <= hsv.hue < hi:
            return Temperature.WARM
    return Temperature.COOL
