"""Shared fixtures: stable channel configurations and desk-scale data.

The default constants describe a violently supercritical channel (a
15 km/s jet against a 300 m/s gravity-wave speed) that shocks within
seconds of model time, so long-horizon fixtures use the classic
quasi-geostrophic channel parameters instead: a 6000 x 4400 km domain,
2000 m mean depth and a wavenumber-one perturbation of tens of metres.
That configuration is integrable for days and exercises every stage of
the pipeline.
"""

import numpy as np
import pytest

import koopmanrom as kr
from koopmanrom.snapshots import FieldTag


CLASSIC = kr.PhysicalConstants(
    orography_amplitude=0.0,
    mean_depth=2000.0,
    shear_depth=220.0,
    wave_depth=133.0,
    channel_length=6000e3,
    channel_width=4400e3,
)


@pytest.fixture(scope="session")
def classic_constants():
    return CLASSIC


@pytest.fixture(scope="session")
def paper_constants():
    return kr.PhysicalConstants()


def build_field_matrices(constants, nx, ny, n_snapshots, snapshot_dt,
                         nondimensional=True, cfl=0.8):
    """Simulate and assemble one snapshot matrix per field."""
    grid = kr.Grid.for_channel(nx, ny, constants)
    states = kr.simulate(constants, grid, snapshot_dt, n_snapshots, cfl=cfl)
    dt = snapshot_dt
    if nondimensional:
        scales = kr.ScaleSet.from_initial_state(states[0], constants)
        states = kr.nondimensionalize(states, scales)
        grid = grid.scaled(scales.l_ref)
        dt = snapshot_dt / scales.t_ref
    return {
        name: kr.assemble([getattr(s, name) for s in states], dt,
                          FieldTag[name], grid, nondimensional=nondimensional)
        for name in ("h", "u", "v")
    }


def decompose(matrix):
    """Companion fit, eigendecomposition and amplitudes for one matrix."""
    pair = kr.split(matrix)
    fit = kr.fit_companion(pair)
    dec = kr.eigendecompose(fit, pair, matrix.dt)
    kr.compute_amplitudes(dec, matrix)
    return dec


@pytest.fixture(scope="session")
def desk_data():
    """64x32 grid, 145 snapshots at 1800 s, non-dimensionalized."""
    return build_field_matrices(CLASSIC, 64, 32, 145, 1800.0)


@pytest.fixture(scope="session")
def desk_decompositions(desk_data):
    return {name: decompose(matrix) for name, matrix in desk_data.items()}


def make_modal_data(rng, n_space, n_pairs, n_real, n_snapshots,
                    radius_range=(0.9, 1.05)):
    """Real snapshot sequence u_i = sum_k a_k lambda_k^i phi_k.

    Eigenvalues come in conjugate-closed groups: n_pairs complex pairs
    plus n_real real ones, radii drawn from radius_range.  Returns
    (data, lambdas, amplitudes, modes) with unit-norm modes.
    """
    lams, amps, modes = [], [], []
    for _ in range(n_pairs):
        r = rng.uniform(*radius_range)
        th = rng.uniform(0.15, np.pi - 0.15)
        lam = r * np.exp(1j * th)
        phi = rng.standard_normal(n_space) + 1j * rng.standard_normal(n_space)
        phi = phi / np.linalg.norm(phi)
        a = rng.standard_normal() + 1j * rng.standard_normal()
        lams += [lam, np.conj(lam)]
        amps += [a, np.conj(a)]
        modes += [phi, np.conj(phi)]
    for _ in range(n_real):
        lam = rng.uniform(*radius_range)
        phi = rng.standard_normal(n_space)
        phi = phi / np.linalg.norm(phi)
        lams.append(lam + 0j)
        amps.append(rng.standard_normal() + 0j)
        modes.append(phi.astype(complex))
    lams = np.array(lams)
    amps = np.array(amps)
    modes = np.stack(modes, axis=1)
    powers = lams[None, :] ** np.arange(n_snapshots)[:, None]
    data = (modes @ (amps[:, None] * powers.T)).real
    return data, lams, amps, modes


def matrix_from_array(data, dt=1.0, tag=FieldTag.other):
    """Wrap a raw (Nx, Nt+1) array as a snapshot matrix (nx = Nx, ny = 1)."""
    from koopmanrom.snapshots import SnapshotMatrix
    return SnapshotMatrix(data=np.asarray(data, dtype=float), nx=data.shape[0],
                          ny=1, dt=dt, dx=1.0, dy=1.0, field_tag=tag)
