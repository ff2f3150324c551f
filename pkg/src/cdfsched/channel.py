"""One block-fading realization: random orthonormal beams, Rayleigh channels, SINRs.

Randomness comes from a counter-based generator (Philox) keyed by the master
seed.  Trial ``t`` owns counter blocks ``t*stride + 1 .. (t+1)*stride`` and
every object inside a trial (beam matrix, user k's serving channel, user k's
b-th interferer channel) sits at a fixed offset, so a trial's draw does not
depend on which other trials are generated with it or in what order.
Interferer beam sets, needed only for the literal SINR expression, live on a
separate stream (second counter word = 1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_TWO_PI = 2.0 * np.pi
_U53 = 2.0**-53


class ChannelStreams:
    """Layout of the per-trial random numbers for one scenario and seed."""

    def __init__(self, scenario, seed: int = 0):
        self.M = M = scenario.num_antennas
        self.K = K = scenario.num_users
        self.key = np.random.SeedSequence(int(seed)).generate_state(2, np.uint64)
        self.rho_serving = np.array([u.rho_serving for u in scenario.users])
        # flattened (user, b) interferer list
        self.interferer_user = np.array(
            [k for k, u in enumerate(scenario.users) for _ in u.rho_interferers], dtype=np.intp
        )
        self.rho_interferer = np.array(
            [r for u in scenario.users for r in u.rho_interferers], dtype=float
        )
        self.J_total = len(self.rho_interferer)
        # offsets in uniforms (two per complex number)
        self.n_beam = 2 * M * M
        self.n_serving = 2 * K * M
        self.n_interferer = 2 * self.J_total * M
        n = self.n_beam + self.n_serving + self.n_interferer
        self.stride = -(-n // 4)
        self.stride_ibeams = -(-max(1, 2 * self.J_total * M * M) // 4)

    def uniforms(self, t0: int, n: int, stream: int = 0) -> np.ndarray:
        """Uniforms on (0, 1] for trials t0..t0+n-1, shape (n, 4*stride)."""
        stride = self.stride if stream == 0 else self.stride_ibeams
        bg = np.random.Philox(key=self.key, counter=[t0 * stride, stream, 0, 0])
        raw = bg.random_raw(n * 4 * stride)
        u = ((raw >> np.uint64(11)).astype(np.float64) + 1.0) * _U53
        return u.reshape(n, 4 * stride)


def complex_gaussian(u: np.ndarray) -> np.ndarray:
    """Box-Muller: the first half of the last axis gives radii, the second half angles.

    Real and imaginary parts are N(0, 1/2), so E|h|^2 = 1.
    """
    n = u.shape[-1] // 2
    r = np.log(u[..., :n])
    np.negative(r, out=r)
    np.sqrt(r, out=r)
    theta = u[..., n : 2 * n] * _TWO_PI
    out = np.empty(r.shape, dtype=complex)
    np.cos(theta, out=out.real)
    out.real *= r
    np.sin(theta, out=out.imag)
    out.imag *= r
    return out


def haar_unitary(g: np.ndarray) -> np.ndarray:
    """Haar-distributed unitary(ies) from complex Gaussian matrices of shape (..., M, M).

    QR with the phases of R's diagonal pushed into Q, which makes the
    decomposition unique.
    """
    q, r = np.linalg.qr(g)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    phase = diag / np.abs(diag)
    return q * phase[..., None, :]


def draw_beams(M: int, rng: np.random.Generator | None = None) -> np.ndarray:
    """M orthonormal beams as the columns of a Haar-random unitary."""
    if M < 1:
        raise ValueError("M must be >= 1")
    rng = np.random.default_rng() if rng is None else rng
    u = 1.0 - rng.random((M, 2 * M))
    return haar_unitary(complex_gaussian(u))


@dataclass
class ChannelBlock:
    """Channels for a contiguous run of trials (leading axis = trial)."""

    beams: np.ndarray  # (n, M, M), column m is beam m
    serving: np.ndarray  # (n, K, M)
    interferers: np.ndarray  # (n, J_total, M), rows follow streams.interferer_user


def draw_block(streams: ChannelStreams, t0: int, n: int) -> ChannelBlock:
    M, K = streams.M, streams.K
    u = streams.uniforms(t0, n)
    a = streams.n_beam
    b = a + streams.n_serving
    c = b + streams.n_interferer
    beams = haar_unitary(complex_gaussian(u[:, :a]).reshape(n, M, M))
    serving = complex_gaussian(u[:, a:b]).reshape(n, K, M)
    interferers = complex_gaussian(u[:, b:c]).reshape(n, streams.J_total, M)
    return ChannelBlock(beams, serving, interferers)


def draw_interferer_beams(streams: ChannelStreams, t0: int, n: int) -> np.ndarray:
    """Independent beam sets of the interfering base stations, (n, J_total, M, M)."""
    M, J = streams.M, streams.J_total
    u = streams.uniforms(t0, n, stream=1)[:, : 2 * J * M * M]
    return haar_unitary(complex_gaussian(u).reshape(n, J, M, M))


def sinr_block(streams: ChannelStreams, block: ChannelBlock) -> np.ndarray:
    """Per-user, per-beam SINR for every trial in the block, shape (n, K, M).

    Each interfering base station transmits on a full unitary beam set, so
    its received power sum_i |h_b phi_i^(b)|^2 equals ||h_b||^2; the
    interferer beams are therefore not generated here.
    """
    gains = np.abs(block.serving @ block.beams) ** 2  # |h_k phi_m|^2
    rho0 = streams.rho_serving[None, :, None]
    intra = rho0 * np.maximum(gains.sum(axis=-1, keepdims=True) - gains, 0.0)
    denom = intra + 1.0
    if streams.J_total:
        power = (np.abs(block.interferers) ** 2).sum(axis=-1) * streams.rho_interferer
        inter = np.zeros(power.shape[:1] + (streams.K,))
        for j, k in enumerate(streams.interferer_user):
            inter[:, k] += power[:, j]
        denom = denom + inter[:, :, None]
    return rho0 * gains / denom


def compute_sinr(scenario, beams, serving_channels, interferer_channels, interferer_beams):
    """SINR matrix (K, M) from the literal per-beam expression for one draw.

    ``interferer_channels[k]`` is (J_k, M) and ``interferer_beams[k]`` is
    (J_k, M, M), one independent beam set per interfering base station.
    """
    M, K = scenario.num_antennas, scenario.num_users
    beams = np.asarray(beams)
    serving_channels = np.asarray(serving_channels)
    if beams.shape != (M, M) or serving_channels.shape != (K, M):
        raise ValueError("beam or serving channel dimensions do not match the scenario")
    out = np.empty((K, M))
    for k, user in enumerate(scenario.users):
        h = serving_channels[k]
        hb = np.asarray(interferer_channels[k]).reshape(-1, M)
        pb = np.asarray(interferer_beams[k]).reshape(-1, M, M)
        if hb.shape[0] != user.num_interferers or pb.shape[0] != user.num_interferers:
            raise ValueError(f"user {k}: expected {user.num_interferers} interferers")
        g = np.abs(h @ beams) ** 2
        inter = sum(
            rho * np.sum(np.abs(hb[b] @ pb[b]) ** 2)
            for b, rho in enumerate(user.rho_interferers)
        )
        for m in range(M):
            intra = user.rho_serving * sum(g[i] for i in range(M) if i != m)
            out[k, m] = user.rho_serving * g[m] / (intra + inter + 1.0)
    return out


@dataclass
class ChannelDraw:
    beams: np.ndarray
    serving_channels: np.ndarray
    interferer_channels: list
    interferer_beams: list
    sinr: np.ndarray


def draw_channels(scenario, seed: int = 0, trial: int = 0) -> ChannelDraw:
    """The full realization of one trial, interferer beam sets included."""
    streams = ChannelStreams(scenario, seed)
    block = draw_block(streams, trial, 1)
    ibeams = draw_interferer_beams(streams, trial, 1)[0]
    owners = streams.interferer_user
    interferer_channels = [block.interferers[0][owners == k] for k in range(streams.K)]
    interferer_beams = [ibeams[owners == k] for k in range(streams.K)]
    return ChannelDraw(
        beams=block.beams[0],
        serving_channels=block.serving[0],
        interferer_channels=interferer_channels,
        interferer_beams=interferer_beams,
        sinr=sinr_block(streams, block)[0],
    )
