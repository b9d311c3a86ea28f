from __future__ import annotations

import pytest

pytestmark = pytest.mark.unit


def test_health_check_passes(capsys):
    import scripts.health_check as hc

    assert hc.check_geometry()
    assert hc.check_statistics()
    assert hc.main([]) == 0
    out = capsys.readouterr().out
    assert "geometry: OK" in out
    assert "FAIL" not in out
