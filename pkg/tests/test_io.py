import hashlib
import os

import numpy as np
import pytest

from mmbl.certificate import RunCertificate, parse_certificate
from mmbl.config import (canonical_config_lines, config_reference,
                         parse_config, parse_config_text)
from mmbl.core import Field, Grid, PhysicalState, TransformedState
from mmbl.exceptions import ConfigurationError, SchemaError
from mmbl.snapshots import (read_snapshot, snapshot_to_state,
                            write_physical_snapshot,
                            write_transformed_snapshot, write_trace_series)
from mmbl.outflow import constant_trace_series

MINIMAL = """
[physics]
gamma = 2
a = 1
mu = 1
mu_prime = 1
zeta = 0.1
sigma = 1
delta = 0.1
"""


def test_minimal_config_parses_with_defaults():
    setup = parse_config_text(MINIMAL)
    assert setup.params.gamma == 2.0
    assert setup.grid.nx == 32 and setup.grid.ny == 65
    assert setup.solver.t_window == 0.2
    assert setup.outdir == "out"


def test_gamma_constraint_message():
    bad = MINIMAL.replace("gamma = 2", "gamma = 0.5")
    with pytest.raises(ConfigurationError, match="gamma must exceed 1"):
        parse_config_text(bad)


def test_unknown_key_rejected_with_line_number():
    bad = MINIMAL + "\n[grid]\nnosuchkey = 3\n"
    with pytest.raises(ConfigurationError, match=r"line \d+: unknown key"):
        parse_config_text(bad)


def test_type_mismatch_line_number():
    bad = MINIMAL + "\n[grid]\nnx = many\n"
    with pytest.raises(ConfigurationError, match="not a int"):
        parse_config_text(bad)


def test_missing_mandatory_key():
    bad = "\n".join(l for l in MINIMAL.splitlines() if "sigma" not in l)
    with pytest.raises(ConfigurationError, match="missing mandatory key 'sigma'"):
        parse_config_text(bad)


def test_unknown_section_rejected():
    with pytest.raises(ConfigurationError, match="unknown section"):
        parse_config_text(MINIMAL + "\n[extras]\nfoo = 1\n")


def test_config_reference_mentions_every_default():
    ref = config_reference()
    assert "ybar_max" in ref and "picard_tol" in ref and "REQUIRED" in ref


def test_shipped_canonical_config_hash_stable():
    # golden file: the canonical echo of the shipped config must not drift
    setup = parse_config(os.path.join(os.path.dirname(__file__), "..",
                                      "configs", "canonical.cfg"))
    blob = "\n".join(canonical_config_lines(setup)).encode()
    digest = hashlib.sha256(blob).hexdigest()
    assert digest == "c17090b16b3ce7c833fed55e68339778e429e2bf3ac52c9c3a5afbbb8f34c97d"


def test_transformed_snapshot_roundtrip(tmp_path, rng):
    g = Grid(nx=8, ny=17, y_max=4.0)
    arrs = rng.normal(size=(3, g.nx, g.ny))
    st = TransformedState(Field(g, arrs[0]), Field(g, arrs[1]),
                          Field(g, arrs[2]), 0.125)
    path = tmp_path / "snap.txt"
    write_transformed_snapshot(st, str(path))
    kind, cols, data = read_snapshot(str(path))
    assert kind == "transformed"
    assert cols == ["t", "x", "ybar", "u", "w", "q"]
    assert data.shape == (g.nx * g.ny, 6)
    back = snapshot_to_state(str(path), g)
    assert np.array_equal(back.as_array(), st.as_array())
    assert back.time == st.time


def test_zero_physical_snapshot_row_count(tmp_path):
    g = Grid(nx=8, ny=17, y_max=4.0)
    z = np.zeros((g.nx, g.ny))
    one = np.ones_like(z)
    st = PhysicalState(u1=Field(g, z), u2=Field(g, z), w1=Field(g, z),
                       h1=Field(g, one), h2=Field(g, z), psi=Field(g, z),
                       rho=Field(g, one), p=Field(g, one), time=0.0)
    path = tmp_path / "phys.txt"
    write_physical_snapshot(st, str(path))
    kind, cols, data = read_snapshot(str(path))
    assert kind == "physical"
    assert data.shape[0] == g.nx * g.ny
    assert np.all(data[:, 3] == 0.0)


def test_snapshot_unknown_version_rejected(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("# mmbl-snapshot v9 physical\nt x y\n0 0 0\n")
    with pytest.raises(SchemaError, match="unknown snapshot version"):
        read_snapshot(str(path))


def test_trace_series_file(tmp_path):
    times = np.array([0.0, 0.1])
    trace = constant_trace_series(times, np.arange(8) * 2 * np.pi / 8,
                                  U0=0.3, I0=0.1, H0=1.0, P0=2.0)
    path = tmp_path / "trace.txt"
    write_trace_series(trace, str(path))
    lines = path.read_text().splitlines()
    assert lines[0] == "# mmbl-trace v1"
    assert lines[1] == "t x U I H P"
    assert len(lines) == 2 + 2 * 8


def test_certificate_roundtrip_and_canonical_bytes():
    cert = RunCertificate()
    cert.set("config", "physics.gamma", "2.0")
    cert.set("margins", "q1_minus_delta_min", 0.392771810734574)
    cert.set("contraction", "ratios", [0.1, 0.05, 0.025])
    cert.set("contraction", "iterations", 3)
    cert.add_check("band_margins_positive", True)
    cert.set("timings", "picard_seconds", 1.234)
    text = cert.serialize()
    back = parse_certificate(text, is_text=True)
    assert back.sections["margins"]["q1_minus_delta_min"] == \
        cert.sections["margins"]["q1_minus_delta_min"]
    assert back.sections["contraction"]["ratios"] == [0.1, 0.05, 0.025]
    assert back.sections["contraction"]["iterations"] == 3
    assert back.sections["checks"]["band_margins_positive"] == "PASS"
    # canonical bytes drop the nondeterministic timings
    assert b"timings" not in cert.canonical_bytes()
    again = parse_certificate(back.serialize(), is_text=True)
    assert again.serialize() == back.serialize()


def test_certificate_unknown_version():
    with pytest.raises(SchemaError, match="unknown certificate version"):
        parse_certificate("mmbl-certificate v99\n", is_text=True)


def test_certificate_deterministic_across_runs():
    from conftest import canonical_setup
    from mmbl.pipeline import run_pipeline
    from mmbl.config import parse_config_text
    cfg = MINIMAL + """
[grid]
nx = 16
ny = 41
ybar_max = 12.0

[pressure]
p0 = 2.0

[solver]
t_window = 0.05
dt = 0.0025
"""
    certs = []
    for _ in range(2):
        setup = parse_config_text(cfg)
        res = run_pipeline(setup, write_outputs=False)
        certs.append(res.certificate.canonical_bytes())
    assert certs[0] == certs[1]
