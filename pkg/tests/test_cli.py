"""Command-line surface: JSON/CSV outputs of each subcommand."""

import json

import pytest

from pneck.cli import main
from pneck.geometry import default_cusp_spec, spec_to_json

K_2_2_HALF = 0.20674833578317202


def run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, out


def test_theta_flat(capsys):
    code, out = run(capsys, ["theta", "--kind", "flat", "--eps", "0.01", "--p", "2", "--sigma-area", "1"])
    assert code == 0
    doc = json.loads(out)
    assert doc["value"] == pytest.approx(0.01)
    assert doc["inputs"]["kind"] == "flat"


def test_theta_gamma(capsys):
    code, out = run(capsys, ["theta", "--kind", "gamma", "--eps", "1e-3", "--p", "2", "--gamma", "0.5"])
    assert json.loads(out)["value"] == pytest.approx(0.1, rel=1e-12)


def test_kconst(capsys):
    code, out = run(capsys, ["kconst", "--p", "2", "--gamma", "0.5"])
    assert json.loads(out)["value"] == pytest.approx(K_2_2_HALF, rel=1e-12)
    code, out = run(capsys, ["kconst", "--p", "2", "--gamma", "0.5", "--a0", "2.0"])
    assert json.loads(out)["value"] == pytest.approx(K_2_2_HALF * 2 ** (2.0 / 3.0), rel=1e-6)


def test_rate(capsys):
    code, out = run(capsys, ["rate", "--p", "2", "--gamma", "0.5", "--regularity", "C1gamma"])
    doc = json.loads(out)
    assert doc["value"]["power"] == pytest.approx(2.0 / 3.0)
    assert doc["value"]["bounded"] is False
    code, out = run(capsys, ["rate", "--p", "2", "--regularity", "flat"])
    assert json.loads(out)["value"]["bounded"] is True


def test_rate_domain_error(capsys):
    code = main(["theta", "--kind", "gamma", "--eps", "1e-3", "--p", "1.2", "--gamma", "0.5"])
    assert code == 1


def test_lemma_integral_csv(capsys):
    code, out = run(
        capsys,
        [
            "lemma-integral", "--profile", "flat", "--p", "2",
            "--eps-list", "1e-2,1e-4,1e-6", "--r", "0.3",
        ],
    )
    lines = out.strip().splitlines()
    assert lines[0] == "eps,value,extrapolated"
    assert len(lines) == 4
    eps, value, extrap = lines[1].split(",")
    assert float(eps) == 1e-2
    assert float(value) == pytest.approx(1.2498091544796509, rel=1e-9)
    assert float(extrap) == pytest.approx(1.0, abs=5e-3)


def test_solve_and_field_dump(tmp_path, capsys):
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(spec_to_json(default_cusp_spec(0.01)))
    out_path = tmp_path / "sol.json"
    field_path = tmp_path / "field.txt"
    code, out = run(
        capsys,
        [
            "solve", "--spec", str(spec_path), "--p", "2", "--out", str(out_path),
            "--h-far", "0.35", "--neck-fraction", "0.3", "--field-out", str(field_path),
        ],
    )
    assert code == 0
    doc = json.loads(out_path.read_text())
    assert doc["converged"] is True
    assert set(doc) == {"U1", "U2", "energy", "flux1", "flux2", "flux_outer", "iterations", "converged"}
    # field dump: mesh text format with a fourth column
    from pneck.mesh import load_text

    mesh, u = load_text(field_path)
    assert u is not None and len(u) == mesh.n_vertices


def test_sweep_and_fit_rate(tmp_path, capsys):
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(spec_to_json(default_cusp_spec(0.01)))
    csv_path = tmp_path / "sweep.csv"
    code, out = run(
        capsys,
        [
            "sweep", "--spec", str(spec_path), "--p", "2",
            "--eps-list", "1e-2,3e-3,1e-3", "--out", str(csv_path),
            "--h-far", "0.35", "--neck-fraction", "0.3",
        ],
    )
    assert code == 0
    header = csv_path.read_text().splitlines()[0]
    assert header == "eps,U1,U2,theta,grad_center,flux_mid,mesh_size,runtime_s"
    code, out = run(capsys, ["fit-rate", "--csv", str(csv_path), "--y", "grad_center"])
    doc = json.loads(out)
    assert -0.9 < doc["slope"] < -0.4  # supercritical blow-up trend


def test_check_commands(tmp_path, capsys):
    from pneck.geometry import default_flat_spec

    cusp_path = tmp_path / "cusp.json"
    cusp_path.write_text(spec_to_json(default_cusp_spec(0.01)))
    code, out = run(
        capsys,
        [
            "check-4-3", "--spec", str(cusp_path), "--p", "2",
            "--eps-list", "1e-2,3e-3,1e-3,3e-4",
            "--h-far", "0.35", "--neck-fraction", "0.3",
        ],
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["rel_gap"] < 0.15

    flat_path = tmp_path / "flat.json"
    flat_path.write_text(spec_to_json(default_flat_spec(0.01)))
    code, out = run(
        capsys,
        [
            "check-3-4", "--spec", str(flat_path), "--p", "2",
            "--eps-list", "1e-2,3e-3,1e-3,3e-4",
            "--h-far", "0.35", "--neck-fraction", "0.3",
        ],
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["rel_gap"] < 0.10
    assert doc["rhs_predicted"] == pytest.approx(doc["flux_limit"])  # p = 2


def test_unknown_flag_errors():
    with pytest.raises(SystemExit):
        main(["kconst", "--nope", "1"])
