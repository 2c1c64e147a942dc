"""Seeded ground-truth generators for ONTD experiments.

Randomness comes from numpy's PCG64 generator; every component (each
factor, the core, the noise) draws from its own child of one
``SeedSequence``, so changing e.g. the noise level leaves the clean
tensor untouched.
"""

from dataclasses import dataclass

import numpy as np

from .core import OntdModel, reconstruct

__all__ = ["SynthSpec", "gen_factor", "gen_tensor", "gen_unmixing", "add_noise"]


def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class SynthSpec:
    dims: tuple
    ranks: tuple
    seed: int = 0
    noise_level: float = 0.0
    min_cluster_size: int = 1

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(i) for i in self.dims))
        object.__setattr__(self, "ranks", tuple(int(j) for j in self.ranks))
        if len(self.dims) != len(self.ranks) or not self.dims:
            raise ValueError("dims and ranks must be non-empty and of equal length")
        if self.noise_level < 0:
            raise ValueError("noise_level must be nonnegative")
        if self.min_cluster_size < 1:
            raise ValueError("min_cluster_size must be positive")
        for I, J in zip(self.dims, self.ranks):
            if not 1 <= J <= I:
                raise ValueError(f"rank {J} must lie in [1, {I}]")
            if self.min_cluster_size * J > I:
                raise ValueError(f"cannot fit {J} clusters of size >= {self.min_cluster_size} in {I} rows")


def gen_factor(I, J, seed, min_cluster_size=1):
    """Random ``I x J`` nonnegative factor with orthonormal columns.

    Rows are assigned to clusters surjectively, every cluster getting at
    least ``min_cluster_size`` rows; entries are uniform on ``[0.5, 1.5)``
    and each column is scaled to unit norm.
    """
    if not 1 <= J <= I or min_cluster_size * J > I:
        raise ValueError(f"cannot build a {I} x {J} factor with clusters of size >= {min_cluster_size}")
    rng = _rng(seed)
    labels = np.concatenate([
        np.repeat(np.arange(J), min_cluster_size),
        rng.integers(0, J, I - J * min_cluster_size),
    ])
    rng.shuffle(labels)
    U = np.zeros((I, J))
    U[np.arange(I), labels] = rng.uniform(0.5, 1.5, I)
    return U / np.linalg.norm(U, axis=0)


def add_noise(A, level, seed):
    """Gaussian noise with ``||E||_F = level * ||A||_F``, then clamp at zero."""
    if level == 0:
        return np.array(A, dtype=np.float64)
    rng = _rng(seed)
    E = rng.standard_normal(A.shape)
    E *= level * np.linalg.norm(A.ravel()) / np.linalg.norm(E.ravel())
    return np.maximum(A + E, 0.0)


def gen_tensor(spec):
    """Nonnegative orthogonal Tucker tensor and its ground-truth model.

    Returns
    -------
    A : ndarray
        ``reconstruct(truth)`` plus optional clamped noise.
    truth : OntdModel
        Core uniform on ``[0, 1)`` and factors from :func:`gen_factor`.
    """
    d = len(spec.dims)
    children = np.random.SeedSequence(spec.seed).spawn(d + 2)
    factors = [
        gen_factor(I, J, children[n], spec.min_cluster_size)
        for n, (I, J) in enumerate(zip(spec.dims, spec.ranks))
    ]
    core = _rng(children[d]).uniform(0.0, 1.0, spec.ranks)
    truth = OntdModel(core=core, factors=factors)
    A = add_noise(reconstruct(truth), spec.noise_level, children[d + 1])
    return A, truth


def gen_unmixing(bands, rows, cols, r, seed, noise=0.0, leak=0.05):
    """Synthetic hyperspectral cube with ``r`` materials.

    The image is split into ``r`` Voronoi regions around random sites (one
    material per region). Each material's spectrum is uniform on
    ``[0.5, 1.5)`` over its own group of bands and at most ``leak``
    elsewhere.

    Returns
    -------
    A : (bands, rows, cols) ndarray
    masks : list of (rows, cols) 0/1 arrays partitioning the image
    spectra : (r, bands) ndarray
    """
    if not 1 <= r <= bands or r > rows * cols:
        raise ValueError(f"need 1 <= r <= bands and r <= pixels, got r={r}")
    ss = np.random.SeedSequence(seed).spawn(3)
    rng = _rng(ss[0])
    pix = np.stack(np.meshgrid(np.arange(rows), np.arange(cols), indexing="ij"), -1).reshape(-1, 2)
    sites = pix[rng.choice(rows * cols, size=r, replace=False)]
    dist = ((pix[:, None, :] - sites[None, :, :]) ** 2).sum(-1)
    labels = np.argmin(dist, axis=1).reshape(rows, cols)
    masks = [(labels == i).astype(np.float64) for i in range(r)]

    rng = _rng(ss[1])
    groups = np.concatenate([np.arange(r), rng.integers(0, r, bands - r)])
    rng.shuffle(groups)
    spectra = rng.uniform(0.0, leak, (r, bands))
    for i in range(r):
        on = groups == i
        spectra[i, on] = rng.uniform(0.5, 1.5, on.sum())

    A = np.transpose(spectra[labels], (2, 0, 1))
    return add_noise(A, noise, ss[2]), masks, spectra
