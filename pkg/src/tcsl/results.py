"""
CSV artifacts. Every float is written with nine significant digits so
identical runs produce byte-identical files.
"""
import csv
import logging
from pathlib import Path

import numpy as np

from tcsl import config, templates
from tcsl.analysis import SpaceTimeData
from tcsl.errors import ComparisonError

logger = logging.getLogger(__name__)


def _fmt(value):
    return config.FLOAT_FORMAT.format(float(value))


def write_rows(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    logger.debug("Wrote %s", path)
    return path


def spacetime_rows(snapshots, z):
    for snap in snapshots:
        a_plus, a_minus, p12 = snap.fields.a_plus, snap.fields.a_minus, snap.p12
        for j, zj in enumerate(z):
            yield (snap.t, zj, a_plus[j].real, a_plus[j].imag, a_minus[j].real, a_minus[j].imag,
                   abs(a_plus[j]), abs(a_minus[j]), p12[j].real, p12[j].imag)


def write_spacetime(path, snapshots, z):
    return write_rows(path, templates.SPACETIME_HEADER, spacetime_rows(snapshots, z))


def write_metrics(path, metrics):
    rows = ((m.t, abs(m.area_plus), abs(m.area_minus), m.energy_plus, m.energy_minus,
             m.centroid, m.width, m.conversion, m.atomic_norm) for m in metrics)
    return write_rows(path, templates.METRICS_HEADER, rows)


def read_spacetime(path, label=None) -> SpaceTimeData:
    """Load a space-time CSV back into stacked (time, z) arrays."""
    path = Path(path)
    if not path.exists():
        raise ComparisonError(f"space-time file not found: {path}")
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != templates.SPACETIME_HEADER:
            raise ComparisonError(f"{path} is not a space-time CSV")
        data = np.array([[float(v) for v in row] for row in reader if row])
    if data.size == 0:
        raise ComparisonError(f"{path} holds no samples")
    times = np.unique(data[:, 0])
    nz = data.shape[0] // times.size
    if nz * times.size != data.shape[0]:
        raise ComparisonError(f"{path} does not hold a full time × z grid")
    grid = data.reshape(times.size, nz, -1)
    return SpaceTimeData(
        times=grid[:, 0, 0],
        z=grid[0, :, 1],
        a_plus=grid[:, :, 2] + 1j * grid[:, :, 3],
        a_minus=grid[:, :, 4] + 1j * grid[:, :, 5],
        p12=grid[:, :, 8] + 1j * grid[:, :, 9],
        label=label or path.stem,
    )
