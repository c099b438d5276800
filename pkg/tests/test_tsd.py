"""Panel model: CSV ingestion, normalization, synthetic generation."""

from __future__ import annotations

import numpy as np
import pytest

from domts import (
    ParseError,
    SyntheticSpec,
    TsdMatrix,
    denormalize,
    generate_synthetic,
    load_long_csv,
    load_wide_csv,
    normalize,
    save_wide_csv,
)
from domts.distance import fit_target

# Hourly consumption fragment for six users, kWh.
WIDE_SAMPLE = """time,x1,x2,x3,x4,x5,x6
1:00,1.60,9.60,5.53,20.20,16.59,13.90
2:00,1.88,11.28,4.90,23.56,16.20,16.20
3:00,2.32,13.60,6.81,18.69,14.90,10.30
4:00,4.32,11.50,9.10,17.69,13.90,14.60
"""


def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_load_wide_sample(tmp_path):
    matrix = load_wide_csv(_write(tmp_path, "wide.csv", WIDE_SAMPLE))
    assert matrix.n_times == 4
    assert matrix.n_objects == 6
    assert matrix.values[0, 0] == 1.60
    assert matrix.object_ids == ("x1", "x2", "x3", "x4", "x5", "x6")
    assert matrix.timestamps == ("1:00", "2:00", "3:00", "4:00")


def test_load_wide_degenerate_zeros(tmp_path):
    matrix = load_wide_csv(_write(tmp_path, "z.csv", "time,a,b\n1,0,0\n2,0,0\n"))
    assert matrix.values.shape == (2, 2)
    _, info = normalize(matrix)
    assert info.constant.all()


def test_load_wide_header_only(tmp_path):
    with pytest.raises(ParseError, match="no data rows"):
        load_wide_csv(_write(tmp_path, "h.csv", "time,a,b\n"))


def test_load_wide_errors_carry_line_numbers(tmp_path):
    with pytest.raises(ParseError, match="line 3.*expected 3 cells"):
        load_wide_csv(_write(tmp_path, "r.csv", "time,a,b\n1,1,2\n2,3\n"))
    with pytest.raises(ParseError, match="line 2.*non-numeric"):
        load_wide_csv(_write(tmp_path, "n.csv", "time,a,b\n1,x,2\n2,3,4\n"))
    with pytest.raises(ParseError, match="duplicate object ids"):
        load_wide_csv(_write(tmp_path, "d.csv", "time,a,a\n1,1,2\n2,3,4\n"))
    with pytest.raises(ParseError, match="strictly increasing"):
        load_wide_csv(_write(tmp_path, "t.csv", "time,a,b\n2,1,2\n1,3,4\n"))


def test_wide_roundtrip_is_exact(tmp_path):
    rng = np.random.default_rng(5)
    matrix = TsdMatrix(
        rng.standard_normal((5, 3)) * 1e3,
        ["a", "b", "c"],
        [f"{i}" for i in range(5)],
    )
    path = tmp_path / "round.csv"
    save_wide_csv(path, matrix)
    loaded = load_wide_csv(path)
    assert (loaded.values == matrix.values).all()
    assert loaded.object_ids == matrix.object_ids
    assert loaded.timestamps == matrix.timestamps


def test_clock_style_timestamps_sort_naturally(tmp_path):
    text = "time,a,b\n" + "".join(f"{h}:00,1,{h}\n" for h in range(1, 13))
    matrix = load_wide_csv(_write(tmp_path, "clock.csv", text))
    assert matrix.timestamps[-3:] == ("10:00", "11:00", "12:00")


LONG_SAMPLE = """time,user_id,consumption
1,u1,1.0
1,u2,2.0
1,u3,3.0
2,u1,4.0
2,u2,5.0
2,u3,6.0
"""


def test_load_long_pivot(tmp_path):
    matrix = load_long_csv(_write(tmp_path, "long.csv", LONG_SAMPLE))
    assert matrix.values.shape == (2, 3)
    assert matrix.object_ids == ("u1", "u2", "u3")
    assert matrix.values[1, 2] == 6.0


def test_load_long_missing_cell_named(tmp_path):
    text = "time,user_id,consumption\n1,u1,1\n1,u2,2\n2,u1,3\n1,u3,4\n2,u3,5\n"
    with pytest.raises(ParseError, match=r"\(2,u2\)"):
        load_long_csv(_write(tmp_path, "gap.csv", text))


def test_load_long_duplicate_pair(tmp_path):
    text = "time,user_id,consumption\n1,u1,1\n1,u1,2\n"
    with pytest.raises(ParseError, match="duplicate"):
        load_long_csv(_write(tmp_path, "dup.csv", text))


def test_long_row_order_never_matters(tmp_path):
    # Oracle: load of the sorted file.
    rng = np.random.default_rng(17)
    lines = [
        f"{t},u{u},{rng.uniform(0, 10):.6f}"
        for t in range(1, 5)
        for u in range(1, 4)
    ]
    sorted_path = _write(
        tmp_path, "sorted.csv", "time,user_id,consumption\n" + "\n".join(lines) + "\n"
    )
    shuffled = lines[:]
    rng.shuffle(shuffled)
    shuffled_path = _write(
        tmp_path, "shuffled.csv", "time,user_id,consumption\n" + "\n".join(shuffled) + "\n"
    )
    a = load_long_csv(sorted_path)
    b = load_long_csv(shuffled_path)
    assert (a.values == b.values).all()
    assert a.object_ids == b.object_ids
    assert a.timestamps == b.timestamps


def test_generate_zero_noise_members_are_exact_affine_images():
    spec = SyntheticSpec(n_objects=6, n_times=8, n_groups=2, noise_level=0.0, seed=3)
    matrix, labels = generate_synthetic(spec)
    # Zero noise, no independents: the best affine map from the base has
    # residual exactly zero because the member was built as a*base + b.
    for j in range(2, 6):
        base = matrix.values[:, labels[j]]
        member = matrix.values[:, j]
        design = np.column_stack([base, np.ones(8)])
        coef, *_ = np.linalg.lstsq(design, member, rcond=None)
        assert np.linalg.norm(member - design @ coef) <= 1e-10


def test_generate_is_deterministic():
    spec = SyntheticSpec(n_objects=6, n_times=8, n_groups=2, noise_level=0.2, seed=9)
    a, la = generate_synthetic(spec)
    b, lb = generate_synthetic(spec)
    assert (a.values == b.values).all()
    assert la == lb


def test_generate_noise_keeps_members_close_to_base():
    # Oracle: direct distance computation on the generated data.
    spec = SyntheticSpec(n_objects=40, n_times=30, n_groups=3, noise_level=0.01, seed=21)
    matrix, labels = generate_synthetic(spec)
    # Public column: a member, not a base, so no design is exactly collinear.
    u = matrix.values[:, -1]
    close = total = 0
    for j, g in enumerate(labels):
        if g < 0 or j < spec.n_groups or j == matrix.n_objects - 1:
            continue
        fit = fit_target(u, matrix.values[:, g], matrix.values[:, j], "aff")
        total += 1
        close += fit.distance <= 0.05
    assert total > 0
    assert close / total >= 0.95


def test_generate_independent_fraction_and_validation():
    spec = SyntheticSpec(
        n_objects=10, n_times=6, n_groups=2, independent_fraction=0.3, seed=1
    )
    _, labels = generate_synthetic(spec)
    assert labels.count(-1) == 3
    with pytest.raises(ValueError):
        SyntheticSpec(n_objects=4, n_times=6, n_groups=5)
    with pytest.raises(ValueError):
        SyntheticSpec(n_objects=4, n_times=6, n_groups=3, independent_fraction=0.5)


def test_normalize_known_column():
    matrix = TsdMatrix(
        np.array([[3.0, 1.0], [4.0, 1.0]]), ["a", "b"], ["1", "2"]
    )
    scaled, info = normalize(matrix)
    assert np.allclose(scaled.values[:, 0], [0.6, 0.8])
    assert info.scales[0] == pytest.approx(5.0)
    assert not info.constant[0]


def test_normalize_zero_column_flagged():
    matrix = TsdMatrix(np.array([[0.0, 1.0], [0.0, 2.0]]), ["a", "b"], ["1", "2"])
    scaled, info = normalize(matrix)
    assert (scaled.values[:, 0] == 0).all()
    assert info.scales[0] == 1.0
    assert info.constant[0]


def test_normalize_roundtrip():
    rng = np.random.default_rng(33)
    matrix = TsdMatrix(
        rng.uniform(1, 100, size=(6, 4)), list("abcd"), [str(i) for i in range(6)]
    )
    scaled, info = normalize(matrix)
    back = denormalize(scaled, info)
    assert np.allclose(back.values, matrix.values, atol=1e-12)


def test_tsd_matrix_invariants():
    with pytest.raises(ValueError, match="unique"):
        TsdMatrix(np.ones((2, 2)), ["a", "a"], ["1", "2"])
    with pytest.raises(ValueError, match="strictly increasing"):
        TsdMatrix(np.ones((2, 2)), ["a", "b"], ["2", "1"])
    with pytest.raises(ValueError, match="at least 2"):
        TsdMatrix(np.ones((1, 2)), ["a", "b"], ["1"])
