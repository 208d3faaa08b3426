import math

import numpy as np
import pytest

from chromalign.cielab import (DEFAULT_WARM_HUE_RANGES, ChipTable, LabColor,
                               MunsellChip, Temperature, classify_temperature,
                               delta_e_cmc, lab_to_hsv, lab_to_srgb,
                               load_chip_table, similarity_kernel, srgb_to_lab)
from chromalign.errors import IntegrityError, ParseError


def cmc_reference(lab1, lab2, l_ratio, c_ratio):
    """Independently coded textbook CMC(l:c) formula; test oracle."""
    L1, a1, b1 = lab1
    L2, a2, b2 = lab2
    C1 = (a1 * a1 + b1 * b1) ** 0.5
    C2 = (a2 * a2 + b2 * b2) ** 0.5
    dC = C1 - C2
    dL = L1 - L2
    dH2 = (a1 - a2) ** 2 + (b1 - b2) ** 2 - dC * dC
    if dH2 < 0:
        dH2 = 0.0
    SL = 0.511 if L1 < 16 else 0.040975 * L1 / (1 + 0.01765 * L1)
    SC = 0.0638 * C1 / (1 + 0.0131 * C1) + 0.638
    H1 = math.degrees(math.atan2(b1, a1))
    if H1 < 0:
        H1 += 360.0
    if 164.0 <= H1 <= 345.0:
        T = 0.56 + abs(0.2 * math.cos(math.radians(H1 + 168.0)))
    else:
        T = 0.36 + abs(0.4 * math.cos(math.radians(H1 + 35.0)))
    F = math.sqrt(C1 ** 4 / (C1 ** 4 + 1900.0))
    SH = SC * (F * T + 1 - F)
    return math.sqrt((dL / (l_ratio * SL)) ** 2 + (dC / (c_ratio * SC)) ** 2
                     + dH2 / SH ** 2)


class TestChipTable:
    def test_loads_full_table(self, chips):
        assert len(chips) == 330
        assert chips.chip_ids == tuple(range(330))
        assert chips.lab_matrix().shape == (330, 3)

    def test_missing_row_count(self, tmp_path, fixtures_dir):
        lines = (fixtures_dir / "chips_synthetic.txt").read_text().splitlines()
        short = tmp_path / "short.txt"
        short.write_text("\n".join(lines[:-1]) + "\n")
        with pytest.raises(IntegrityError, match="330"):
            load_chip_table(short)

    def test_malformed_row_names_line(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("0 A 0 96.5 0.0 0.0\n1 B 1 notanumber 2.0 3.0\n")
        with pytest.raises(ParseError, match="line 2"):
            load_chip_table(path, expected_count=2)

    def test_duplicate_chip_id(self, tmp_path):
        path = tmp_path / "dup.txt"
        path.write_text("0 A 0 96.5 0.0 0.0\n0 B 1 91.0 2.0 3.0\n")
        with pytest.raises(IntegrityError, match="duplicate"):
            load_chip_table(path, expected_count=2)

    def test_duplicate_position_rejected(self):
        a = MunsellChip(0, 5, "C", LabColor(50, 1, 1))
        b = MunsellChip(1, 5, "C", LabColor(60, 2, 2))
        with pytest.raises(IntegrityError, match="position"):
            ChipTable([a, b], expected_count=2)

    def test_comments_ignored(self, tmp_path):
        path = tmp_path / "c.txt"
        path.write_text("# header\n0 A 0 96.5 0.0 0.0\n\n1 B 1 91.0 2.0 3.0\n")
        table = load_chip_table(path, expected_count=2)
        assert len(table) == 2


class TestLabColor:
    def test_rejects_out_of_range_lightness(self):
        with pytest.raises(ValueError):
            LabColor(101.0, 0, 0)
        with pytest.raises(ValueError):
            LabColor(-0.5, 0, 0)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            LabColor(50.0, float("nan"), 0)


class TestDeltaECmc:
    def test_identical_colors_zero(self):
        for lab in (LabColor(50, 10, 10), LabColor(12, -40, 3), LabColor(97, 0, 0)):
            assert delta_e_cmc(lab, lab) == 0.0

    def test_gray_axis_hand_case(self):
        # chroma terms vanish: dE = 10 / (2 * S_L), S_L = 0.040975*50/(1+0.01765*50)
        expected = 10.0 / (2.0 * (0.040975 * 50.0 / (1.0 + 0.01765 * 50.0)))
        value = delta_e_cmc(LabColor(50, 0, 0), LabColor(60, 0, 0), 2.0, 1.0)
        assert value == pytest.approx(expected, abs=1e-12)
        assert value == pytest.approx(4.594, abs=1e-3)

    def test_asymmetric_in_arguments(self):
        a, b = LabColor(50, 20, -10), LabColor(60, -15, 25)
        assert delta_e_cmc(a, b) != delta_e_cmc(b, a)

    def test_random_pairs_match_reference(self):
        rng = np.random.default_rng(42)
        for _ in range(100):
            lab1 = (rng.uniform(5, 95), rng.uniform(-80, 80), rng.uniform(-80, 80))
            lab2 = (rng.uniform(5, 95), rng.uniform(-80, 80), rng.uniform(-80, 80))
            l_ratio, c_ratio = rng.uniform(0.5, 3.0), rng.uniform(0.5, 3.0)
            ours = delta_e_cmc(LabColor(*lab1), LabColor(*lab2), l_ratio, c_ratio)
            ref = cmc_reference(lab1, lab2, l_ratio, c_ratio)
            assert ours == pytest.approx(ref, abs=1e-4)


class TestSimilarityKernel:
    def test_zero_distance_is_one(self):
        for c in (1e-6, 0.001, 0.5, 10.0):
            assert similarity_kernel(0.0, c) == 1.0

    def test_reference_scale_value(self):
        assert similarity_kernel(10.0, 0.001) == pytest.approx(math.exp(-0.1), abs=1e-12)

    def test_strictly_monotone(self):
        rng = np.random.default_rng(0)
        dists = np.sort(rng.uniform(0, 200, 50))
        values = [similarity_kernel(float(d), 0.001) for d in dists]
        assert all(a > b for a, b in zip(values, values[1:]))
        assert all(0 < v <= 1 for v in values)


class TestLabToHsv:
    def test_white_point(self):
        hsv = lab_to_hsv(LabColor(100, 0, 0))
        assert hsv.achromatic
        assert hsv.hue == 0.0
        assert hsv.value == pytest.approx(1.0, abs=1e-6)
        assert hsv.saturation == pytest.approx(0.0, abs=1e-4)

    def test_black(self):
        assert lab_to_hsv(LabColor(0, 0, 0)).value == pytest.approx(0.0, abs=1e-6)

    def test_srgb_red(self):
        # sRGB pure red under D65; tolerance absorbs the adaptation choice
        hue = lab_to_hsv(LabColor(53.2, 80.1, 67.2)).hue
        assert min(hue, 360.0 - hue) < 5.0

    def test_round_trip_hue_within_5_degrees(self):
        import colorsys
        rng = np.random.default_rng(7)
        checked = 0
        while checked < 40:
            r, g, b = rng.uniform(0.05, 0.95, 3)
            h_ref, s_ref, _ = colorsys.rgb_to_hsv(r, g, b)
            if s_ref < 0.2:
                continue  # hue is unstable near the gray axis
            hsv = lab_to_hsv(srgb_to_lab(r, g, b))
            diff = abs(hsv.hue - h_ref * 360.0)
            assert min(diff, 360.0 - diff) < 5.0
            checked += 1

    def test_out_of_gamut_clipped(self):
        rgb = lab_to_srgb(LabColor(60, -128, 80))
        assert all(0.0 <= v <= 1.0 for v in rgb)


class TestClassifyTemperature:
    def test_saturated_red_is_warm(self):
        assert classify_temperature(LabColor(53.2, 80.1, 67.2)) is Temperature.WARM

    def test_saturated_blue_is_cool(self):
        lab = srgb_to_lab(0.1, 0.2, 0.9)
        assert classify_temperature(lab) is Temperature.COOL

    def test_achromatic_uses_default(self):
        gray = LabColor(50, 0, 0)
        assert classify_temperature(gray) is Temperature.COOL
        assert classify_temperature(
            gray, achromatic_default=Temperature.WARM) is Temperature.WARM

    def test_partitions_chip_set(self, chips):
        # total function; Warm and Cool partition all 330 chips
        counts = {Temperature.WARM: 0, Temperature.COOL: 0}
        for chip in chips:
            counts[classify_temperature(chip.lab, DEFAULT_WARM_HUE_RANGES)] += 1
        assert counts[Temperature.WARM] + counts[Temperature.COOL] == 330
        assert counts[Temperature.WARM] > 0 and counts[Temperature.COOL] > 0
