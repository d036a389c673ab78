"""Preparations and the rotation-averaged, block-diagonal signal state.

The sender keeps a single magnetic sector m1 and real amplitudes over the
angular momenta j1; averaging over the unknown global rotation leaves a
density operator that is block diagonal in the total angular momentum J,
with coherences only across repeated J (labelled by j1).  Blocks here carry
the M-degeneracy summed out, so the block traces add up to 1 and per-block
POVMs are normalised on the reduced space.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .su2 import (
    DomainError,
    HalfInt,
    check_jm,
    clebsch_gordan,
    couple_range,
    half,
    m_range,
    wigner_d,
    wigner_d_highest,
)

_NORM_TOL = 1e-12


@dataclass(frozen=True)
class GenericState:
    """Fixed-m1 preparation: real amplitudes over j1 labels, unit norm."""

    m1: HalfInt
    amplitudes: tuple[tuple[HalfInt, float], ...]

    def __post_init__(self):
        if self.m1.twice < 0:
            # the m1 -> -m1 sectors are physically equivalent; only m1 >= 0 is exposed
            raise DomainError("only m1 >= 0 sectors are supported")
        seen = set()
        for j1, a in self.amplitudes:
            if isinstance(a, complex):
                raise DomainError("amplitudes must be real")
            check_jm(j1, self.m1)
            if j1 in seen:
                raise DomainError(f"duplicate j1 label {j1}")
            seen.add(j1)
        norm = sum(a * a for _, a in self.amplitudes)
        if abs(norm - 1.0) > _NORM_TOL:
            raise DomainError(f"amplitudes not normalised: sum a^2 = {norm!r}")

    @classmethod
    def from_dict(cls, m1, amplitudes: dict) -> "GenericState":
        m1 = half(m1)
        items = sorted(((half(j1), float(a)) for j1, a in amplitudes.items()),
                       key=lambda p: p[0].twice)
        return cls(m1, tuple(items))

    @classmethod
    def coherent(cls, j1) -> "GenericState":
        """Spin coherent preparation |j1, m1=j1>."""
        j1 = half(j1)
        return cls.from_dict(j1, {j1: 1.0})

    @classmethod
    def parallel(cls) -> "GenericState":
        """Two parallel spin-1/2: the spin-1 coherent state."""
        return cls.coherent(1)

    @classmethod
    def two_term(cls, a: float) -> "GenericState":
        """m1=0 family a|0 0> + sqrt(1-a^2)|1 0>."""
        if not 0.0 <= a <= 1.0:
            raise DomainError("a must lie in [0, 1]")
        return cls.from_dict(0, {0: a, 1: math.sqrt(max(0.0, 1.0 - a * a))})

    @classmethod
    def antiparallel(cls) -> "GenericState":
        return cls.two_term(1.0 / math.sqrt(2.0))

    @property
    def j_labels(self) -> tuple[HalfInt, ...]:
        return tuple(j1 for j1, _ in self.amplitudes)

    @property
    def amplitude_vector(self) -> np.ndarray:
        return np.array([a for _, a in self.amplitudes])

    def amplitude(self, j1) -> float:
        j1 = half(j1)
        for jj, a in self.amplitudes:
            if jj == j1:
                return a
        return 0.0

    def is_coherent(self) -> bool:
        return len(self.amplitudes) == 1 and self.amplitudes[0][0] == self.m1


@dataclass
class BlockedOperator:
    """Direct sum over total-J sectors; each block is real symmetric over j1 labels."""

    blocks: dict[HalfInt, tuple[tuple[HalfInt, ...], np.ndarray]] = field(default_factory=dict)

    def trace(self) -> float:
        return float(sum(np.trace(m) for _, m in self.blocks.values()))

    def block(self, J) -> np.ndarray:
        return self.blocks[half(J)][1]

    def basis(self, J) -> tuple[HalfInt, ...]:
        return self.blocks[half(J)][0]

    def min_eigenvalue(self) -> float:
        lo = math.inf
        for _, mat in self.blocks.values():
            lo = min(lo, float(np.linalg.eigvalsh(mat).min()))
        return lo

    def max_symmetry_defect(self) -> float:
        return max(float(np.abs(m - m.T).max()) for _, m in self.blocks.values())


def coupling_structure(state: GenericState, j2: HalfInt) -> list[tuple[HalfInt, tuple[HalfInt, ...]]]:
    """Ordered (J, contributing j1 labels) pairs for the given preparation."""
    j2 = half(j2)
    js = state.j_labels
    all_J = sorted({J for j1 in js for J in couple_range(j1, j2)}, key=lambda J: J.twice)
    out = []
    for J in all_J:
        basis = tuple(j1 for j1 in js if abs(j1.twice - j2.twice) <= J.twice <= j1.twice + j2.twice)
        out.append((J, basis))
    return out


def _cg_column(j1: HalfInt, m1: HalfInt, j2: HalfInt, J: HalfInt) -> np.ndarray:
    """C^{J, m1+m2}_{j1 m1, j2 m2} over m2 = -j2..j2 (0 outside |M| <= J)."""
    col = np.zeros(j2.twice + 1)
    for k, m2 in enumerate(m_range(j2)):
        M = m1 + m2
        if abs(M.twice) <= J.twice:
            col[k] = clebsch_gordan(j1, m1, j2, m2, J, M)
    return col


def highest_weight_profile(j2: HalfInt, beta: float) -> np.ndarray:
    """(d^{j2}_{m2, j2}(beta))^2 over m2 = -j2..j2."""
    j2 = half(j2)
    return np.array([wigner_d_highest(j2, m2, beta) ** 2 for m2 in m_range(j2)])


def averaged_state(state: GenericState, j2: HalfInt, beta: float) -> BlockedOperator:
    """Global-rotation average of the signal state at relative angle beta.

    Block (J)_{j1,j1'} = a_{j1} a_{j1'} sum_{m2} (d^{j2}_{m2 j2}(beta))^2
    C^{J M}_{j1 m1, j2 m2} C^{J M}_{j1' m1, j2 m2}, M = m1+m2.  Total trace 1.
    """
    j2 = half(j2)
    if not 0.0 <= beta <= math.pi + 1e-12:
        raise DomainError(f"beta = {beta} outside [0, pi]")
    if j2.twice < 1:
        raise DomainError("j2 must be at least 1/2")
    dsq = highest_weight_profile(j2, beta)
    out = BlockedOperator()
    for J, basis in coupling_structure(state, j2):
        cols = [_cg_column(j1, state.m1, j2, J) for j1 in basis]
        amps = [state.amplitude(j1) for j1 in basis]
        dim = len(basis)
        mat = np.empty((dim, dim))
        for i in range(dim):
            for k in range(i, dim):
                v = amps[i] * amps[k] * float(np.dot(dsq * cols[i], cols[k]))
                mat[i, k] = mat[k, i] = v
        out.blocks[J] = (basis, mat)
    return out


def coherent_overlap_distribution(state: GenericState, j2: HalfInt, beta: float) -> dict[HalfInt, float]:
    """Outcome probabilities p_J(beta) for a coherent preparation (each J once)."""
    if not state.is_coherent():
        raise DomainError("overlap distribution is defined for coherent preparations only")
    rho = averaged_state(state, j2, beta)
    return {J: float(mat[0, 0]) for J, (basis, mat) in rho.blocks.items()}


# ---------------------------------------------------------------------------
# Monte-Carlo Haar averaging oracle

def product_basis_labels(state: GenericState, j2: HalfInt) -> list[tuple[HalfInt, HalfInt, HalfInt]]:
    """(j1, m, m2) labels of the embedding product space, row order of the oracle."""
    j2 = half(j2)
    return [(j1, m, m2) for j1 in state.j_labels for m in m_range(j1) for m2 in m_range(j2)]


def signal_density(state: GenericState, j2: HalfInt, beta: float) -> np.ndarray:
    """Unaveraged |Psi(beta)><Psi(beta)| on the embedding product space."""
    j2 = half(j2)
    vec2 = np.array([wigner_d_highest(j2, m2, beta) for m2 in m_range(j2)])
    parts = []
    for j1, a in state.amplitudes:
        v1 = np.zeros(j1.twice + 1)
        v1[[m.twice for m in m_range(j1)].index(state.m1.twice)] = a
        parts.append(np.kron(v1, vec2))
    psi = np.concatenate(parts)
    return np.outer(psi, psi)


def _d_terms(j: HalfInt) -> list[tuple[int, int, list[tuple[float, int, int]]]]:
    """Summation-term tables for d^j: per (row, col), (coeff, cos_pow, sin_pow)."""
    ms = m_range(j)
    tables = []
    for r, mr in enumerate(ms):
        for c, mc in enumerate(ms):
            jpr = (j.twice + mr.twice) // 2
            jmr = (j.twice - mr.twice) // 2
            jpc = (j.twice + mc.twice) // 2
            jmc = (j.twice - mc.twice) // 2
            rmc = (mr.twice - mc.twice) // 2
            pref = math.sqrt(math.factorial(jpr) * math.factorial(jmr)
                             * math.factorial(jpc) * math.factorial(jmc))
            terms = []
            for k in range(max(0, -rmc), min(jpc, jmr) + 1):
                denom = (math.factorial(jpc - k) * math.factorial(k)
                         * math.factorial(jmr - k) * math.factorial(rmc + k))
                coeff = (-1.0 if (rmc + k) % 2 else 1.0) * pref / denom
                terms.append((coeff, jpc + jmr - 2 * k, rmc + 2 * k))
            tables.append((r, c, terms))
    return tables


def _d_matrix_batch(j: HalfInt, betas: np.ndarray) -> np.ndarray:
    """Stack of small-d matrices d^j(beta), shape (n, 2j+1, 2j+1)."""
    dim = j.twice + 1
    cc = np.cos(betas / 2.0)
    ss = np.sin(betas / 2.0)
    out = np.zeros((betas.size, dim, dim))
    for r, c, terms in _d_terms(j):
        acc = np.zeros(betas.size)
        for coeff, pc, ps in terms:
            acc += coeff * cc ** pc * ss ** ps
        out[:, r, c] = acc
    return out


def _rotation_batch(js: tuple[HalfInt, ...], alphas, betas, gammas) -> np.ndarray:
    """Block-diagonal D(alpha,beta,gamma) over the listed irreps, per sample."""
    n = alphas.size
    dim = sum(j.twice + 1 for j in js)
    out = np.zeros((n, dim, dim), dtype=complex)
    off = 0
    for j in js:
        ms = np.array([float(m) for m in m_range(j)])
        d = _d_matrix_batch(j, betas)
        phase_row = np.exp(-1j * np.outer(alphas, ms))
        phase_col = np.exp(-1j * np.outer(gammas, ms))
        block = phase_row[:, :, None] * d * phase_col[:, None, :]
        sl = slice(off, off + j.twice + 1)
        out[:, sl, sl] = block
        off += j.twice + 1
    return out


def averaged_state_oracle(state: GenericState, j2: HalfInt, beta: float,
                          samples: int, seed: int,
                          batch_size: int = 20000,
                          fixed_rotation: tuple[float, float, float] | None = None,
                          ) -> tuple[np.ndarray, np.ndarray]:
    """Monte-Carlo Haar average of U rho(beta) U^dag on the full product space.

    Returns (mean, stderr); stderr combines real and imaginary scatter per
    entry.  Deterministic for fixed (seed, samples); batches reduce in order.
    With fixed_rotation the sampler is bypassed (identity check support).
    """
    j2 = half(j2)
    if samples < 1:
        raise DomainError("samples must be >= 1")
    rho = signal_density(state, j2, beta)
    dim = rho.shape[0]
    rng = np.random.default_rng(seed)
    total = np.zeros((dim, dim), dtype=complex)
    total_sq = np.zeros((dim, dim))
    done = 0
    while done < samples:
        n = min(batch_size, samples - done)
        if fixed_rotation is not None:
            al = np.full(n, fixed_rotation[0])
            bt = np.full(n, fixed_rotation[1])
            gm = np.full(n, fixed_rotation[2])
        else:
            al = rng.uniform(0.0, 2.0 * math.pi, n)
            bt = np.arccos(rng.uniform(-1.0, 1.0, n))
            gm = rng.uniform(0.0, 2.0 * math.pi, n)
        u1 = _rotation_batch(state.j_labels, al, bt, gm)
        u2 = _rotation_batch((j2,), al, bt, gm)
        u = (u1[:, :, None, :, None] * u2[:, None, :, None, :]).reshape(n, dim, dim)
        rotated = np.einsum("sij,jk,slk->sil", u, rho, u.conj())
        total += rotated.sum(axis=0)
        total_sq += (np.abs(rotated) ** 2).sum(axis=0)
        done += n
    mean = total / samples
    var = np.maximum(total_sq / samples - np.abs(mean) ** 2, 0.0)
    stderr = np.sqrt(var / samples)
    return mean, stderr


def coupled_basis_matrix(state: GenericState, j2: HalfInt) -> tuple[np.ndarray, list[tuple[HalfInt, HalfInt, HalfInt]]]:
    """Unitary from the product basis to the coupled |J M (j1)> basis.

    Returns (V, labels) with V[product_index, coupled_index] the CG coefficient
    and labels the coupled (J, M, j1) per column.
    """
    j2 = half(j2)
    prod = product_basis_labels(state, j2)
    labels = []
    for j1 in state.j_labels:
        for J in couple_range(j1, j2):
            for M in m_range(J):
                labels.append((J, M, j1))
    V = np.zeros((len(prod), len(labels)))
    for r, (j1, m, m2) in enumerate(prod):
        for c, (J, M, jc) in enumerate(labels):
            if jc == j1 and M.twice == m.twice + m2.twice:
                V[r, c] = clebsch_gordan(j1, m, j2, m2, J, M)
    return V, labels


def blocks_from_full_matrix(state: GenericState, j2: HalfInt, full: np.ndarray) -> BlockedOperator:
    """Reduce a full product-space operator to M-summed (J, j1, j1') blocks."""
    V, labels = coupled_basis_matrix(state, j2)
    coupled = V.T @ full.real @ V
    out = BlockedOperator()
    for J, basis in coupling_structure(state, j2):
        dim = len(basis)
        mat = np.zeros((dim, dim))
        for i, j1 in enumerate(basis):
            for k, j1p in enumerate(basis):
                for c1, (Jc, Mc, jc) in enumerate(labels):
                    if Jc == J and jc == j1:
                        for c2, (Jd, Md, jd) in enumerate(labels):
                            if Jd == J and jd == j1p and Md == Mc:
                                mat[i, k] += coupled[c1, c2]
        out.blocks[J] = (basis, mat)
    return out


# ---------------------------------------------------------------------------
# plain-text serialization

def state_to_text(state: GenericState) -> str:
    lines = [f"m1={state.m1}"]
    for j1, a in state.amplitudes:
        lines.append(f"j1={j1} a={a!r}")
    return "\n".join(lines) + "\n"


def state_from_text(text: str) -> GenericState:
    m1 = None
    amps: dict[HalfInt, float] = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("m1="):
            m1 = HalfInt.parse(line[3:])
        elif line.startswith("j1="):
            jpart, apart = line.split()
            if not apart.startswith("a="):
                raise ValueError(f"malformed amplitude line: {raw!r}")
            amps[HalfInt.parse(jpart[3:])] = float(apart[2:])
        else:
            raise ValueError(f"unrecognised line: {raw!r}")
    if m1 is None:
        raise ValueError("missing m1 line")
    return GenericState.from_dict(m1, amps)
