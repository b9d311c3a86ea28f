from __future__ import annotations

import importlib
import math
import sys

from dotenv import load_dotenv

NUMERIC_STACK = ("numpy", "scipy", "pandas", "sklearn", "joblib", "pydantic", "typer", "yaml")


def _status(ok: bool) -> str:
    return "OK" if ok else "FAIL"


def check_import(module: str) -> bool:
    try:
        importlib.import_module(module)
        return True
    except ImportError:
        return False


def check_geometry() -> bool:
    """d(I, 2I) = sqrt(C) log 2 and the geodesic midpoint of I and 4I is 2I."""
    try:
        import numpy as np

        from core.domain.spd import SpdMatrix
        from core.services.spd_manifold import geodesic, riemann_distance

        eye = SpdMatrix.identity(3)
        ok_dist = math.isclose(
            riemann_distance(eye, SpdMatrix(2 * np.eye(3))), math.sqrt(3) * math.log(2), rel_tol=1e-12
        )
        mid = geodesic(eye, SpdMatrix(4 * np.eye(3)), 0.5)
        return ok_dist and bool(np.allclose(mid.values, 2 * np.eye(3), atol=1e-12))
    except Exception:
        return False


def check_statistics() -> bool:
    try:
        from core.services.meta_stats import wilcoxon_signed_rank

        return math.isclose(wilcoxon_signed_rank([1, 2, 3, 4, 5]), 1 / 32, rel_tol=1e-12)
    except Exception:
        return False


def main(argv: list[str]) -> int:
    load_dotenv()
    results: dict[str, bool] = {name: check_import(name) for name in NUMERIC_STACK}
    results["geometry"] = check_geometry()
    results["statistics"] = check_statistics()
    for name, ok in results.items():
        print(f"{name}: {_status(ok)}")
    rc = 0 if all(results.values()) else 2
    return rc


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
