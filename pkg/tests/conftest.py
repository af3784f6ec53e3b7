from __future__ import annotations

import pytest

from helpers import build_descriptor_set


@pytest.fixture
def ds_two_slices():
    """Two slices (eMBB, uRLLC) sharing one DU VNFD with the matching
    auxiliary NSD; full IL product over 2 CU x 2 DU scale levels."""
    return build_descriptor_set(n_slices=2)


@pytest.fixture
def ds_three_slices():
    return build_descriptor_set(n_slices=3, du_counts=(1, 2, 3))
