"""Seeded synthetic data for the experiment runner.

All generators take an explicit 64-bit seed and draw from a PCG64 stream,
so every dataset is reproducible from its config. Scales are desk-sized
by default; each experiment's ground truth is documented on its generator.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..expfit import BlobModel, DoaModel, build_blob_matrix, build_doa_matrix, stack_complex_vector
from ..pde import ToySystem

Array = np.ndarray

GENERATOR_NAME = "numpy.random.PCG64"


def rng_from_seed(seed: int, stream: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(stream)])))


def line_array(m: int, spacing: float = np.pi) -> Array:
    """Receiver positions on the x-axis with the given spacing."""
    return np.column_stack([np.arange(m) * spacing, np.zeros(m)])


@dataclass
class DoaDataset:
    receivers: Array
    grid_angles: Array
    true_angles: Array
    true_amplitudes: Array
    snapshots: Array  # complex (m, N)
    stacked_data: Array  # (2m,) stack of the first snapshot
    noise_sigma: float
    snr_db: float


def generate_doa_data(seed: int, m: int = 5, n: int = 101, num_snapshots: int = 10,
                      source_angles=(0.7, 1.4, 2.2), source_amps=(1.0, 1.0, 0.3),
                      noise_sigma: float = 0.05) -> DoaDataset:
    """Plane-wave snapshots from a line array with fixed planted sources.

    Angles live in [0, pi); a line array cannot distinguish phi from
    2*pi - phi, so the grid covers the upper half-plane only. Source
    amplitudes carry an independent random phase per snapshot (so the
    snapshot covariance has full signal rank for the subspace method),
    except the first snapshot, whose amplitudes are the real planted ones;
    that snapshot, stacked to reals, is the vector the fits consume.
    Noise is complex Gaussian with total per-entry standard deviation
    sigma.
    """
    rng = rng_from_seed(seed)
    receivers = line_array(m)
    grid = np.linspace(0.0, np.pi, n, endpoint=False)
    angles = np.asarray(source_angles, dtype=float)
    amps = np.asarray(source_amps, dtype=float)

    dirs = np.column_stack([np.cos(angles), np.sin(angles)])
    steering = np.exp(-1j * (receivers @ dirs.T))  # (m, n_src)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=(num_snapshots, angles.size))
    phases[0] = 0.0
    snapshot_amps = amps[None, :] * np.exp(1j * phases)  # (N, n_src)
    noise = noise_sigma / np.sqrt(2.0) * (
        rng.normal(size=(m, num_snapshots)) + 1j * rng.normal(size=(m, num_snapshots))
    )
    snapshots = steering @ snapshot_amps.T + noise
    signal_power = float(np.mean(np.abs(steering @ amps) ** 2))
    snr_db = 10.0 * np.log10(signal_power / noise_sigma**2) if noise_sigma > 0 else np.inf
    return DoaDataset(
        receivers=receivers, grid_angles=grid, true_angles=angles, true_amplitudes=amps,
        snapshots=snapshots,
        stacked_data=stack_complex_vector(snapshots[:, 0]),
        noise_sigma=noise_sigma, snr_db=snr_db,
    )


@dataclass
class BlobDataset:
    grid_points: Array  # (G*G, 2)
    grid_size: int
    true_centers: Array
    true_scales: Array
    true_amplitudes: Array
    clean_image: Array  # (G*G,)
    noisy_image: Array  # (G*G,)
    noise_sigma: float


def generate_blob_image(seed: int, grid_size: int = 32, num_blobs: int = 4,
                        noise_sigma: float = 0.03) -> BlobDataset:
    """Image of Gaussian blobs on the unit square plus white noise.

    Centers are drawn with a minimum pairwise separation so blobs stay
    resolvable; scales and amplitudes are drawn from documented ranges.
    """
    rng = rng_from_seed(seed)
    axis = np.linspace(0.0, 1.0, grid_size)
    gx, gy = np.meshgrid(axis, axis, indexing="ij")
    grid_points = np.column_stack([gx.ravel(), gy.ravel()])

    centers = []
    while len(centers) < num_blobs:
        cand = rng.uniform(0.2, 0.8, size=2)
        if all(np.linalg.norm(cand - c) >= 0.22 for c in centers):
            centers.append(cand)
    centers = np.array(centers)
    scales = rng.uniform(6.0, 10.0, size=num_blobs)
    amps = rng.uniform(0.8, 1.2, size=num_blobs)

    design, *_ = build_blob_matrix(BlobModel(grid_points, centers, scales))
    clean = design.real @ amps
    noisy = clean + noise_sigma * rng.normal(size=clean.size)
    return BlobDataset(grid_points=grid_points, grid_size=grid_size,
                       true_centers=centers, true_scales=scales, true_amplitudes=amps,
                       clean_image=clean, noisy_image=noisy, noise_sigma=noise_sigma)


def pick_peaks(image: Array, grid_size: int, count: int = 50):
    """Indices of the largest local maxima over the 8-neighborhood.

    Ties are broken by lexicographic pixel order (row-major). When the grid
    has fewer local maxima than requested, all of them are returned.
    """
    img = np.asarray(image, dtype=float).reshape(grid_size, grid_size)
    padded = np.full((grid_size + 2, grid_size + 2), -np.inf)
    padded[1:-1, 1:-1] = img
    is_peak = np.ones_like(img, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            shifted = padded[1 + di:grid_size + 1 + di, 1 + dj:grid_size + 1 + dj]
            is_peak &= img >= shifted
    rows, cols = np.nonzero(is_peak)
    heights = img[rows, cols]
    # sort by height descending, then lexicographic pixel order
    order = np.lexsort((cols, rows, -heights))
    take = min(count, rows.size)
    return rows[order[:take]], cols[order[:take]]


@dataclass
class LrDataset:
    x_train: Array
    y_train: Array
    x_test: Array
    y_test: Array
    theta_star: Array
    contaminated: Array  # indices into the training set


def generate_lr_data(seed: int, n_train: int = 500, dim: int = 50,
                     contamination: float = 0.1, n_test: int = 500,
                     noise_scale: float = 10.0) -> LrDataset:
    """Linearly separable logistic data with a contaminated training fraction.

    Clean features are standard normal, labels are noiseless signs of the
    planted linear score. Contaminated rows have their features replaced by
    zero-mean noise with per-entry scale ``noise_scale`` while keeping the
    original labels; the test set is clean.
    """
    if not 0.0 <= contamination < 1.0:
        raise ValueError("contamination fraction must lie in [0, 1)")
    rng = rng_from_seed(seed)
    theta_star = rng.normal(size=dim)
    x_train = rng.normal(size=(n_train, dim))
    x_test = rng.normal(size=(n_test, dim))
    y_train = np.where(x_train @ theta_star >= 0, 1.0, -1.0)
    y_test = np.where(x_test @ theta_star >= 0, 1.0, -1.0)
    n_bad = int(round(contamination * n_train))
    contaminated = rng.permutation(n_train)[:n_bad]
    x_train = x_train.copy()
    if n_bad:
        x_train[contaminated] = noise_scale * rng.normal(size=(n_bad, dim))
    return LrDataset(x_train=x_train, y_train=y_train, x_test=x_test, y_test=y_test,
                     theta_star=theta_star, contaminated=np.sort(contaminated))


@dataclass
class EllipticDataset:
    x_train: Array
    y_train: Array
    x_test: Array
    y_test: Array
    curve: tuple  # (a, b) of y^2 = x^3 + a x + b


def _curve_polyline(a: float, b: float, x_lo: float, x_hi: float, num: int = 4000) -> Array:
    xs = np.linspace(x_lo, x_hi, num)
    cub = xs**3 + a * xs + b
    mask = cub >= 0
    xs, ys = xs[mask], np.sqrt(cub[mask])
    return np.column_stack([np.concatenate([xs, xs]), np.concatenate([ys, -ys])])


def generate_elliptic_data(seed: int, n_train: int = 200, n_test: int = 400,
                           curve=(-2.0, 1.0), x_range=(0.4, 2.4), y_range=(-1.4, 1.4),
                           margin: float = 0.3, feature_scale: float = 3.0) -> EllipticDataset:
    """Points in the plane labeled by the side of an elliptic curve.

    The label is the sign of ``p_y^2 - (p_x^3 + a p_x + b)``. The sampling
    window sits to the right of the curve's closed component, so a single
    branch separates the classes; points closer than ``margin`` to the
    branch are rejected, leaving a visible gap. Features are centered on
    the window and multiplied by ``feature_scale`` so the narrowest
    Gaussian kernel in the default bank resolves the class structure.
    """
    rng = rng_from_seed(seed)
    a, b = curve
    polyline = _curve_polyline(a, b, x_range[0] - 0.5, x_range[1] + 0.5)

    def sample(n):
        points = []
        while len(points) < n:
            cand = np.column_stack([
                rng.uniform(x_range[0], x_range[1], size=n),
                rng.uniform(y_range[0], y_range[1], size=n),
            ])
            dists = np.sqrt(((cand[:, None, :] - polyline[None, :, :]) ** 2).sum(axis=2)).min(axis=1)
            for p in cand[dists >= margin]:
                if len(points) < n:
                    points.append(p)
        pts = np.array(points)
        labels = np.where(pts[:, 1] ** 2 - (pts[:, 0] ** 3 + a * pts[:, 0] + b) >= 0, 1.0, -1.0)
        return pts, labels

    x_train, y_train = sample(n_train)
    x_test, y_test = sample(n_test)
    center = np.array([np.mean(x_range), np.mean(y_range)])
    x_train = (x_train - center) * feature_scale
    x_test = (x_test - center) * feature_scale
    return EllipticDataset(x_train, y_train, x_test, y_test, curve=(float(a), float(b)))


def make_toy_system(seed: int, n: int = 20, d: int = 4, obs_stride: int = 2,
                    noise_sigma: float = 1e-3) -> tuple:
    """Toy parametric linear system with noisy consistent-ish data.

    Returns ``(system, x_true)``. The base matrix is a shifted second
    difference (strictly diagonally dominant for |x_p| < 0.5), the
    sensitivity matrix holds indicator blocks so each parameter shifts the
    diagonal on its own block, and observations subsample the state.
    """
    rng = rng_from_seed(seed)
    base = 2.5 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1)
    sens = np.zeros((n, d))
    block = n // d
    for p in range(d):
        sens[p * block:(p + 1) * block, p] = 1.0
    source = np.sin(np.linspace(0.0, 3.0, n)) + 0.5
    obs = np.eye(n)[::obs_stride]
    x_true = rng.uniform(-0.4, 0.4, size=d)
    u_true = np.linalg.solve(base + np.diag(sens @ x_true), source)
    data = obs @ u_true + noise_sigma * rng.normal(size=obs.shape[0])
    system = ToySystem(base=base, sens=sens, source=source, obs=obs, data=data)
    return system, x_true
