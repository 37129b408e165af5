"""File formats.

* Imaging matrices and measurement sets: ``.npz`` containers in which every
  complex array is stored as float64 with a trailing axis of length 2
  (real, imaginary), i.e. IEEE-754 double pairs.
* Reconstructions: estimate as CSV (``index,real,imag``), objective history as
  CSV (``iteration,objective``).
* Rank reports: singular values one per line; collinearity as
  ``panel,i,j,angle_rad,coherence`` rows.
* Images: plain (P2) PGM, values normalised to [0, 1] and scaled to 0..255,
  with +y pointing up. Optional PNG through Pillow.
"""
import csv
import json

import numpy as np

from .forward import ImagingMatrix, MeasurementSet
from .recon import ReconResult

FORMAT_VERSION = 1


def _pack(z):
    z = np.asarray(z, dtype=complex)
    return np.stack([z.real, z.imag], axis=-1)


def _unpack(a):
    a = np.asarray(a, dtype=float)
    return a[..., 0] + 1j * a[..., 1]


def save_imaging_matrix(path, H: ImagingMatrix):
    arrays = {"H": _pack(H.matrix)}
    for k, (W, P) in enumerate(zip(H.W, H.P)):
        arrays[f"W{k}"] = _pack(W)
        arrays[f"P{k}"] = _pack(P)
    meta = {"version": FORMAT_VERSION, "panels": H.num_panels, "snapshots": H.snapshots}
    np.savez(path, meta=json.dumps(meta), **arrays)


def load_imaging_matrix(path) -> ImagingMatrix:
    with np.load(path) as data:
        meta = json.loads(str(data["meta"]))
        K = meta["panels"]
        W = tuple(_unpack(data[f"W{k}"]) for k in range(K))
        P = tuple(_unpack(data[f"P{k}"]) for k in range(K))
        # 1-bit patterns round-trip as real
        W = tuple(w.real if not np.any(w.imag) else w for w in W)
        return ImagingMatrix(_unpack(data["H"]), W, P, meta["snapshots"])


def save_measurements(path, m: MeasurementSet):
    meta = {
        "version": FORMAT_VERSION,
        "mode": m.mode,
        "noise_variance": m.noise_variance,
        "seed": m.seed,
        "snr_db": m.snr_db,
    }
    values = _pack(m.values) if m.mode == "complex" else np.asarray(m.values, dtype=float)
    np.savez(path, meta=json.dumps(meta), values=values)


def load_measurements(path) -> MeasurementSet:
    with np.load(path) as data:
        meta = json.loads(str(data["meta"]))
        vals = data["values"]
        vals = _unpack(vals) if meta["mode"] == "complex" else np.array(vals)
    return MeasurementSet(vals, meta["mode"], meta["noise_variance"], meta["seed"], meta["snr_db"])


def _fmt(x):
    return format(float(x), ".12g")


def save_recon(prefix, result: ReconResult):
    """Writes ``<prefix>_estimate.csv`` and ``<prefix>_history.csv``."""
    with open(f"{prefix}_estimate.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "real", "imag"])
        for i, v in enumerate(result.estimate):
            w.writerow([i, _fmt(v.real), _fmt(v.imag)])
    with open(f"{prefix}_history.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", "objective"])
        for i, v in enumerate(result.objective_history):
            w.writerow([i, _fmt(v)])


def load_estimate(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 1] + 1j * data[:, 2]


def write_singular_values(path, sv):
    with open(path, "w") as fh:
        for s in sv:
            fh.write(_fmt(s) + "\n")


def write_collinearity(path, report):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["panel", "i", "j", "angle_rad", "coherence"])
        for k, p in enumerate(report.panels):
            for (i, j), a, c in zip(p.pairs, p.angles, p.coherence):
                w.writerow([k, int(i), int(j), _fmt(a), _fmt(c)])


def write_csv(path, rows, columns, append=False):
    """Rows are dicts; floats are written with 12 significant digits."""
    mode = "a" if append else "w"
    with open(path, mode, newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore")
        if not append or fh.tell() == 0:
            w.writeheader()
        for r in rows:
            w.writerow({k: (_fmt(v) if isinstance(v, (float, np.floating)) else v) for k, v in r.items()})


def normalize_image(img, reference_max=None):
    img = np.abs(np.asarray(img, dtype=float))
    scale = reference_max if reference_max else img.max()
    if not scale:
        return np.zeros_like(img)
    return np.clip(img / scale, 0.0, 1.0)


def write_pgm(path, img01, maxval=255):
    """Plain PGM of a 2-D image in [0, 1]; row 0 of the array is drawn at the bottom."""
    img = np.asarray(img01, dtype=float)
    if img.ndim != 2:
        raise ValueError("PGM images are 2-D")
    q = np.rint(np.clip(img, 0.0, 1.0) * maxval).astype(int)[::-1]
    with open(path, "w") as fh:
        fh.write(f"P2\n{q.shape[1]} {q.shape[0]}\n{maxval}\n")
        for row in q:
            fh.write(" ".join(str(v) for v in row) + "\n")


def read_pgm(path):
    with open(path) as fh:
        tokens = [t for line in fh if not line.startswith("#") for t in line.split()]
    if tokens[0] != "P2":
        raise ValueError("not a plain PGM file")
    w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    data = np.array(tokens[4:4 + w * h], dtype=float).reshape(h, w)
    return data[::-1] / maxval


def write_png(path, img01):
    from PIL import Image

    q = np.rint(np.clip(np.asarray(img01, dtype=float), 0.0, 1.0) * 255).astype(np.uint8)[::-1]
    Image.fromarray(q, mode="L").save(path)


def write_volume_images(prefix, volume, reference_max=None, png=False):
    """One image per z-layer: ``<prefix>_z<k>.pgm``. Returns the written paths."""
    vol = np.asarray(volume)
    norm = normalize_image(vol, reference_max)
    paths = []
    for k, layer in enumerate(norm):
        p = f"{prefix}_z{k}.pgm"
        write_pgm(p, layer)
        paths.append(p)
        if png:
            write_png(f"{prefix}_z{k}.png", layer)
    return paths
