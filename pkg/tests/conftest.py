"""Shared fixtures: the six-column relation-graph panel and small helpers."""

from __future__ import annotations

import numpy as np
import pytest

from domts import SolverConfig, TsdMatrix

# The six-column panel is built in a fixed orthonormal frame so its relation
# graph is known by construction: with error bound 0.05 and the AFF measure,
# exactly x1<->x2, x2->x4 and x3->x5 are admissible, and x6 (the highest
# variance column) is the pivot.
SIX_EPSILON = 0.05
SIX_EDGES = {(0, 1), (1, 0), (1, 3), (2, 4)}
SIX_SSA_DOMINANT = (0, 2, 3, 5)
SIX_SSA_ASSIGNMENTS = {1: 0, 4: 2}
SIX_GSA_DOMINANT = (1, 2, 5)
SIX_GSA_ASSIGNMENTS = {0: 1, 3: 1, 4: 2}


def build_six_column_panel() -> TsdMatrix:
    m = 16
    rng = np.random.default_rng(20130715)
    raw = np.column_stack([np.ones(m), rng.standard_normal((m, 6))])
    q, _ = np.linalg.qr(raw)
    qo, qu, qa, qb, qc, qd, qe = (q[:, k] for k in range(7))

    sphi, spsi, schi = 0.04, 0.07, 0.075
    phi, psi, chi = np.arcsin(sphi), np.arcsin(spsi), np.arcsin(schi)
    columns = [
        qa + 0.5 * qo,
        1.3 * (np.cos(phi) * qa + sphi * qb) + 0.4 * qo,
        qd + 0.6 * qo,
        0.9 * (np.cos(phi + psi) * qa + np.sin(phi + psi) * qb) + 1.1 * qu + 0.6 * qo,
        0.9 * (np.cos(chi) * qd + schi * qe) + 1.3 * qu + 0.5 * qo,
        # Tiny mean component keeps this the top-variance column even after
        # per-column normalization.
        5.0 * qu + 0.2 * qo,
    ]
    return TsdMatrix(
        np.column_stack(columns),
        [f"x{i}" for i in range(1, 7)],
        [f"t{i}" for i in range(1, m + 1)],
    )


@pytest.fixture(scope="session")
def six_panel() -> TsdMatrix:
    return build_six_column_panel()


@pytest.fixture
def six_config() -> SolverConfig:
    return SolverConfig(epsilon=SIX_EPSILON, measure="aff")
