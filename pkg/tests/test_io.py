import numpy as np
import pytest

from conftest import small_imaging
from risimaging import io
from risimaging.analysis import collinearity_report
from risimaging.forward import amplitude_measurements, synthesize_measurements
from risimaging.recon import reweighted_wf
from risimaging.scenario import preset


def test_imaging_matrix_round_trip(tmp_path):
    _, _, _, H = small_imaging(K=2, T=5)
    path = tmp_path / "H.npz"
    io.save_imaging_matrix(path, H)
    back = io.load_imaging_matrix(path)
    assert back.matrix.tobytes() == H.matrix.tobytes()
    assert back.snapshots == 5 and back.num_panels == 2
    for a, b in zip(back.W, H.W):
        np.testing.assert_array_equal(a, b)
    for a, b in zip(back.P, H.P):
        assert a.tobytes() == b.tobytes()
    with np.load(path) as data:
        assert data["H"].dtype == np.float64 and data["H"].shape == H.shape + (2,)


def test_measurement_round_trip(tmp_path):
    _, _, _, H = small_imaging()
    m = synthesize_measurements(H, np.ones(H.shape[1]), snr_db=25.0, seed=4)
    for meas in (m, amplitude_measurements(m)):
        path = tmp_path / f"{meas.mode}.npz"
        io.save_measurements(path, meas)
        back = io.load_measurements(path)
        assert back.mode == meas.mode and back.seed == 4 and back.snr_db == 25.0
        assert back.noise_variance == meas.noise_variance
        assert back.values.tobytes() == meas.values.tobytes()


def test_recon_csv(tmp_path, rng):
    A = rng.normal(size=(40, 4)) + 1j * rng.normal(size=(40, 4))
    r = reweighted_wf(A, np.abs(A @ np.ones(4)))
    io.save_recon(tmp_path / "x", r)
    np.testing.assert_allclose(io.load_estimate(tmp_path / "x_estimate.csv"), r.estimate, rtol=1e-11)
    hist = (tmp_path / "x_history.csv").read_text().splitlines()
    assert hist[0] == "iteration,objective" and len(hist) == len(r.objective_history) + 1


def test_spectrum_and_collinearity(tmp_path):
    io.write_singular_values(tmp_path / "sv.csv", [3.0, 1.5, 0.25])
    assert (tmp_path / "sv.csv").read_text() == "3\n1.5\n0.25\n"
    scn = preset("deploy-I")
    rep = collinearity_report(scn.grid, scn.panels)
    io.write_collinearity(tmp_path / "c.csv", rep)
    lines = (tmp_path / "c.csv").read_text().splitlines()
    assert lines[0] == "panel,i,j,angle_rad,coherence" and len(lines) == rep.total_pairs + 1


def test_write_csv_formats_and_appends(tmp_path):
    path = tmp_path / "m.csv"
    io.write_csv(path, [{"a": 1, "b": 0.1 + 0.2}], ["a", "b"])
    io.write_csv(path, [{"a": 2, "b": np.float64(1 / 3)}], ["a", "b"], append=True)
    assert path.read_text().splitlines() == ["a,b", "1,0.3", "2,0.333333333333"]


def test_pgm_round_trip(tmp_path, rng):
    img = rng.random((5, 7))
    io.write_pgm(tmp_path / "a.pgm", img)
    back = io.read_pgm(tmp_path / "a.pgm")
    assert back.shape == (5, 7)
    assert np.abs(back - img).max() <= 0.5 / 255 + 1e-12
    text = (tmp_path / "a.pgm").read_text().split()
    assert text[:4] == ["P2", "7", "5", "255"]
    with pytest.raises(ValueError):
        io.write_pgm(tmp_path / "b.pgm", np.zeros((2, 2, 2)))


def test_normalisation_rule():
    img = np.array([[0.0, 2.0], [4.0, 8.0]])
    np.testing.assert_allclose(io.normalize_image(img), img / 8)
    np.testing.assert_allclose(io.normalize_image(img, reference_max=4.0), np.clip(img / 4, 0, 1))
    np.testing.assert_array_equal(io.normalize_image(np.zeros((2, 2))), 0)


def test_volume_images(tmp_path):
    vol = np.zeros((3, 4, 6))
    vol[1, 2, 3] = 2.0
    paths = io.write_volume_images(str(tmp_path / "v"), vol, reference_max=1.0)
    assert [p.rsplit("_", 1)[1] for p in paths] == ["z0.pgm", "z1.pgm", "z2.pgm"]
    layer = io.read_pgm(paths[1])
    assert layer.shape == (4, 6) and layer[2, 3] == 1.0 and layer.sum() == 1.0


def test_png_output(tmp_path):
    pytest.importorskip("PIL")
    from PIL import Image

    io.write_volume_images(str(tmp_path / "v"), np.ones((1, 3, 4)), png=True)
    with Image.open(tmp_path / "v_z0.png") as im:
        assert im.size == (4, 3) and im.mode == "L"
