import math

import pytest

HEADER = "t,x1,x2,u,V,region,set_distance,warp_gain"


def synthetic_rows(n=60, u_amp=3.0):
    """Schema-conformant rows tracing a decaying spiral onto the unit circle."""
    rows = []
    for i in range(n):
        t = 0.01 * i
        r = 1.0 + 1.2 * math.exp(-2.0 * t)
        x1, x2 = r * math.cos(t), -r * math.sin(t)
        d = r * r - 1.0
        v = 0.5 * d * d
        u = -u_amp * math.exp(-t) * math.cos(3 * t)
        region = 2 if v < 0.5 else 1
        rows.append(f"{t},{x1},{x2},{u},{v},{region},{d},1")
    return rows


@pytest.fixture
def trajectory_csv(tmp_path):
    path = tmp_path / "trajectory.csv"
    path.write_text(HEADER + "\n" + "\n".join(synthetic_rows()) + "\n")
    return path


@pytest.fixture
def overlay_csv(tmp_path):
    pts = [(math.cos(p * math.tau / 32), math.sin(p * math.tau / 32)) for p in range(33)]
    path = tmp_path / "boundary.csv"
    path.write_text("x1,x2\n" + "\n".join(f"{a},{b}" for a, b in pts) + "\n")
    return path
