"""Truncated Fock-space exact diagonalization of the coupled lattice.

Two Hamiltonians live on the same space and are compared operator-to-
operator:

* the simulator: hopping with operator-valued couplings
  J_m = Delta_m D_m (D_m + d_m + d_m+) plus the quartic boson Hamiltonian
  written in the shifted modes alpha_m = D_m + d_m, and
* the target: the same hopping graph with coefficients produced by the
  linearized coupling <-> velocity dictionary written through the ladder
  combination q1 = (2 sqrt2 / 3) d_x - d_z / 3, q2 = d_z, plus the exact
  quadratic boson density in the same substitution.

The q pair preserves each self-commutator but is not canonical:
[q1, q2+] = -1/3 exactly (see :func:`q_map_commutators`), so all
substitutions are performed literally in the d modes and no canonical
structure is assumed anywhere.

Fermions use a Jordan-Wigner encoding (mode i = bit i of the basis index);
bosons are number-basis ladders truncated at n_max with the standard
commutator defect -(n_max + 1) on the top level.  The full-space ordering
is fermion-major: index = fermion_index * boson_dim + boson_index.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Optional

import numpy as np
import scipy.sparse as sparse
import scipy.sparse.linalg as spla
import sympy as sp

from .continuum import hgr_quadratic_form
from .designer import optical_params
from .exceptions import ConvergenceError, DimensionCapError
from .geometry import ModelParams
from .lattice import LatticeSpec

__all__ = [
    "FockSpace",
    "ModeOperators",
    "operator_algebra",
    "q_map_commutators",
    "assemble_simulator_hamiltonian",
    "assemble_target_hamiltonian",
    "assemble_background_hopping",
    "mapping_residual",
    "GroundStateResult",
    "ground_state",
    "thermal_expectation",
    "CorrelatorReport",
    "correlators_and_wick",
    "boson_occupations",
    "weak_fluctuation_report",
    "per_cell_pairs",
    "uniform_pair",
]

_FERMION_A = np.array([[0.0, 1.0], [0.0, 0.0]])
_FERMION_Z = np.diag([1.0, -1.0])

Q1_X = 2.0 * np.sqrt(2.0) / 3.0
Q1_Z = -1.0 / 3.0


def per_cell_pairs(spec: LatticeSpec):
    """One (x, z) boson pair per unit cell."""
    modes = []
    for cell in range(spec.n_cells):
        modes.append((cell, "x"))
        modes.append((cell, "z"))
    return tuple(modes)


def uniform_pair():
    """A single (x, z) pair shared by every cell (the k = 0 fluctuation)."""
    return ((None, "x"), (None, "z"))


@dataclass(frozen=True)
class FockSpace:
    """Tensor basis: fermion occupation bits x truncated boson numbers.

    ``boson_modes`` is a tuple of (cell, species) pairs; a cell tag of
    ``None`` marks a mode shared by every cell.  ``sector`` optionally
    restricts the fermion factor to a fixed total number.
    """

    n_fermion_modes: int
    boson_modes: tuple
    n_max: int
    sector: Optional[int] = None
    nnz_cap: int = 2 ** 22

    def __post_init__(self):
        if self.n_fermion_modes < 0 or self.n_max < 0:
            raise ValueError("negative mode counts")
        for cell, species in self.boson_modes:
            if species not in ("x", "z"):
                raise ValueError(f"unknown boson species {species!r}")
        if self.sector is not None and not (0 <= self.sector <= self.n_fermion_modes):
            raise ValueError("fermion sector out of range")

    @property
    def n_boson_modes(self) -> int:
        return len(self.boson_modes)

    @property
    def fermion_dim(self) -> int:
        return 2 ** self.n_fermion_modes

    @property
    def boson_dim(self) -> int:
        return (self.n_max + 1) ** self.n_boson_modes

    @property
    def dimension(self) -> int:
        return self.fermion_dim * self.boson_dim

    def boson_mode_index(self, cell, species: str) -> int:
        """Mode serving (cell, species), falling back to a shared mode."""
        for idx, (c, s) in enumerate(self.boson_modes):
            if s == species and (c == cell or c is None):
                return idx
        raise KeyError(f"no boson mode for cell {cell}, species {species}")

    def boson_occupation_table(self) -> np.ndarray:
        """Total boson occupation per boson basis index."""
        base = self.n_max + 1
        occ = np.zeros(self.boson_dim, dtype=int)
        idx = np.arange(self.boson_dim)
        for _ in range(self.n_boson_modes):
            occ += idx % base
            idx //= base
        return occ

    def sector_fermion_states(self) -> np.ndarray:
        if self.sector is None:
            return np.arange(self.fermion_dim)
        states = [f for f in range(self.fermion_dim) if bin(f).count("1") == self.sector]
        return np.array(states, dtype=int)

    def sector_indices(self) -> np.ndarray:
        """Full-space indices of the (sector x all-boson) subspace."""
        fs = self.sector_fermion_states()
        return (fs[:, None] * self.boson_dim + np.arange(self.boson_dim)[None, :]).ravel()

    def with_n_max(self, n_max: int) -> "FockSpace":
        return FockSpace(self.n_fermion_modes, self.boson_modes, n_max,
                         self.sector, self.nnz_cap)


def _kron_chain(mats):
    out = reduce(lambda a, b: sparse.kron(a, b, format="csr"), mats)
    return sparse.csr_matrix(out)


def _boson_ladder(n_max: int) -> np.ndarray:
    d = np.zeros((n_max + 1, n_max + 1))
    for n in range(1, n_max + 1):
        d[n - 1, n] = np.sqrt(n)
    return d


@dataclass(frozen=True)
class ModeOperators:
    """Annihilation matrices for every mode, on the full (unprojected) space."""

    space: FockSpace
    c: tuple   # fermion annihilation operators
    d: tuple   # boson annihilation operators

    def fermion_number(self):
        n = sparse.csr_matrix((self.space.dimension, self.space.dimension))
        for ci in self.c:
            n = n + ci.getH() @ ci
        return n

    def q_pair(self, cell):
        """(q1, q2) for the pair serving ``cell``."""
        dx = self.d[self.space.boson_mode_index(cell, "x")]
        dz = self.d[self.space.boson_mode_index(cell, "z")]
        return Q1_X * dx + Q1_Z * dz, dz


def operator_algebra(space: FockSpace) -> ModeOperators:
    """Build all mode operators by Kronecker chains.

    Raises
    ------
    DimensionCapError
        When the estimated nonzero count over all mode operators,
        (n_modes) * dimension, exceeds ``space.nnz_cap``.
    """
    n_modes = space.n_fermion_modes + space.n_boson_modes
    if n_modes * space.dimension > space.nnz_cap:
        raise DimensionCapError(
            f"~{n_modes * space.dimension} nonzeros exceed cap {space.nnz_cap}")
    eye_f = sparse.identity(space.fermion_dim, format="csr")
    eye_b = sparse.identity(space.boson_dim, format="csr")
    eye2 = sparse.identity(2, format="csr")
    a_mat = sparse.csr_matrix(_FERMION_A)
    z_mat = sparse.csr_matrix(_FERMION_Z)
    cs = []
    for i in range(space.n_fermion_modes):
        # mode j occupies bit j; the kron chain runs most-significant first
        factors = []
        for j in reversed(range(space.n_fermion_modes)):
            factors.append(a_mat if j == i else (z_mat if j < i else eye2))
        cf = _kron_chain(factors) if factors else sparse.identity(1, format="csr")
        cs.append(sparse.kron(cf, eye_b, format="csr"))
    ds = []
    base = space.n_max + 1
    ladder = sparse.csr_matrix(_boson_ladder(space.n_max))
    eyeb1 = sparse.identity(base, format="csr")
    for m in range(space.n_boson_modes):
        factors = []
        for j in reversed(range(space.n_boson_modes)):
            factors.append(ladder if j == m else eyeb1)
        db = _kron_chain(factors) if factors else sparse.identity(1, format="csr")
        ds.append(sparse.kron(eye_f, db, format="csr"))
    return ModeOperators(space=space, c=tuple(cs), d=tuple(ds))


def q_map_commutators():
    """Exact commutator matrix of the ladder redefinition, in sympy.

    Returns the 2x2 matrix K with K[a, b] = [q_a, q_b+] computed from
    [d_m, d_n+] = delta_mn:

        K = [[1, -1/3], [-1/3, 1]] .

    The self-commutators are preserved exactly ( (2 sqrt2/3)^2 + (1/3)^2
    = 1 ) but the pair is not canonical: the off-diagonal entry is -1/3,
    so the pair substitution genuinely deforms the quadratic spectrum and
    every mapping in this module works in the d modes directly.
    """
    alpha = 2 * sp.sqrt(2) / 3
    beta = -sp.Rational(1, 3)
    coeffs = {  # q_a = sum_m coeffs[a][m] d_m over m in (x, z)
        1: {"x": alpha, "z": beta},
        2: {"x": sp.Integer(0), "z": sp.Integer(1)},
    }
    k = sp.zeros(2, 2)
    for a in (1, 2):
        for b in (1, 2):
            k[a - 1, b - 1] = sp.nsimplify(sum(
                coeffs[a][m] * coeffs[b][m] for m in ("x", "z")))
    return sp.simplify(k)


# ---------------------------------------------------------------------------
# Hamiltonian assembly
# ---------------------------------------------------------------------------

def _bond_list(spec: LatticeSpec):
    """(cell, species, a_cell, b_cell) for every bond; species x covers the
    two outgoing bonds controlled by the cell's x boson."""
    bonds = []
    for cx in range(spec.ncx):
        for cy in range(spec.ncy):
            i = spec.cell_index(cx, cy)
            bonds.append((i, "z", i, i))
            bonds.append((i, "x", i, spec.cell_index(cx + 1, cy)))
            bonds.append((i, "x", i, spec.cell_index(cx, cy + 1)))
    return bonds


def _pairs(space: FockSpace):
    cells = sorted({c for c, s in space.boson_modes if s == "x"},
                   key=lambda c: (c is None, c))
    return cells


def _hermitize(h, tol: float = 1e-12):
    """Assert Hermiticity of the raw assembly, then symmetrize exactly."""
    h = sparse.csr_matrix(h)
    defect = abs(h - h.getH()).max() if h.nnz else 0.0
    scale = abs(h).max() if h.nnz else 1.0
    if defect > tol * max(scale, 1.0):
        raise AssertionError(f"anti-Hermitian assembly: defect {defect:g}")
    return sparse.csr_matrix((h + h.getH()) * 0.5)


def _hopping_matrix(ops: ModeOperators, spec: LatticeSpec, coupling_ops):
    """sum_bonds J_op (a_i+ b_k) + h.c. with J_op per (cell, species)."""
    space = ops.space
    n = spec.n_cells
    half = sparse.csr_matrix((space.dimension, space.dimension), dtype=complex)
    for cell, species, a_cell, b_cell in _bond_list(spec):
        a_dag = ops.c[a_cell].getH()
        b = ops.c[n + b_cell]
        half = half + coupling_ops[(cell, species)] @ (a_dag @ b)
    return half + half.getH()


def assemble_simulator_hamiltonian(params: ModelParams, spec: LatticeSpec,
                                   space: FockSpace,
                                   ops: Optional[ModeOperators] = None):
    """Hopping with condensate-linearized coupling operators plus the
    quartic boson Hamiltonian in the shifted modes.

    Coupling operators: J_m = Delta_m D_m^2 + Delta_m D_m (d_m + d_m+),
    the x operator serving both outgoing bonds of its cell.  The boson
    part, per pair (alpha_m = D_m + d_m, N_m = alpha_m+ alpha_m exact):

        (1/(24 pi G)) (az+ - az)(sqrt2 (ax+ - ax) - (az+ - az)/2)
        + (8 pi G mu^2 / 3)(N_z + N_x)
        - (256 pi^3 G^3 mu^2 / (3 l^2)) N_z (N_x - N_z / 2)

    Fermion modes are ordered a_0..a_{N-1}, b_0..b_{N-1}; requires
    space.n_fermion_modes == 2 * spec.n_cells.
    """
    if space.n_fermion_modes != spec.n_modes:
        raise ValueError("space fermion modes do not match the lattice")
    if ops is None:
        ops = operator_algebra(space)
    opt = optical_params(params)
    dim = space.dimension
    eye = sparse.identity(dim, format="csr")

    coupling_ops = {}
    for cell, species, _, _ in _bond_list(spec):
        key = (cell, species)
        if key in coupling_ops:
            continue
        amp = opt.amplitude(species)
        strength = opt.strength(species)
        background = strength * amp * amp * eye
        try:
            dm = ops.d[space.boson_mode_index(cell, species)]
        except KeyError:
            # bond without a fluctuation mode stays at the background value
            coupling_ops[key] = background
            continue
        coupling_ops[key] = background + strength * amp * (dm + dm.getH())
    h = _hopping_matrix(ops, spec, coupling_ops)

    g = params.G
    pref_pi = 1.0 / (24.0 * np.pi * g)
    pref_n = 8.0 * np.pi * g * params.mu ** 2 / 3.0
    pref_q = 256.0 * np.pi ** 3 * g ** 3 * params.mu ** 2 / (3.0 * params.l ** 2)
    for cell in _pairs(space):
        dx = ops.d[space.boson_mode_index(cell, "x")]
        dz = ops.d[space.boson_mode_index(cell, "z")]
        bx = dx + opt.d_x * eye   # alpha_x in the number basis of d_x
        bz = dz + opt.d_z * eye
        abar_x = bx.getH() - bx   # equals dx+ - dx exactly
        abar_z = bz.getH() - bz
        n_x = bx.getH() @ bx
        n_z = bz.getH() @ bz
        h = h + pref_pi * (abar_z @ (np.sqrt(2.0) * abar_x - 0.5 * abar_z))
        h = h + pref_n * (n_z + n_x)
        h = h - pref_q * (n_z @ (n_x - 0.5 * n_z))
    return _hermitize(h)


def assemble_background_hopping(l: float, spec: LatticeSpec, space: FockSpace,
                                ops: Optional[ModeOperators] = None):
    """Hopping at the uniform background coupling 2/(3 l), bosons inert.

    This is the exact G -> 0 limit of the fermion sector (the simulator's
    boson energies diverge as 1/G, so the decoupled point is assembled
    directly instead of by taking tiny G numerically).
    """
    if space.n_fermion_modes != spec.n_modes:
        raise ValueError("space fermion modes do not match the lattice")
    if ops is None:
        ops = operator_algebra(space)
    j0 = 2.0 / (3.0 * l)
    eye = sparse.identity(space.dimension, format="csr")
    coupling_ops = {(cell, species): j0 * eye
                    for cell, species, _, _ in _bond_list(spec)}
    return _hermitize(_hopping_matrix(ops, spec, coupling_ops))


def assemble_target_hamiltonian(params: ModelParams, spec: LatticeSpec,
                                space: FockSpace,
                                ops: Optional[ModeOperators] = None):
    """Field-theory Hamiltonian on the same hopping graph.

    The velocity operators are written through the q combination,

        v_x = 1/l - (4 sqrt2 pi G / l^2)(q1 + q1+)
        v_y = 1/l - (4 sqrt2 pi G / l^2)(q2 + q2+) ,

    and converted to bond couplings by the dictionary linearized about the
    background point: J_z = (2/3) v_y and
    delta J_x = (delta v_x + delta J_z / 2) / 2.  The boson sector is the
    exact quadratic density in the same substitution,

        (1/(16 pi G))(q1+ - q1)(q2+ - q2) - 4 pi G mu^2 (q1+ + q1)(q2+ + q2).
    """
    if space.n_fermion_modes != spec.n_modes:
        raise ValueError("space fermion modes do not match the lattice")
    if ops is None:
        ops = operator_algebra(space)
    dim = space.dimension
    eye = sparse.identity(dim, format="csr")
    j0 = 2.0 / (3.0 * params.l)
    slope = 4.0 * np.sqrt(2.0) * np.pi * params.G / params.l ** 2

    coupling_ops = {}
    for cell in _pairs(space):
        q1, q2 = ops.q_pair(cell)
        q1p = q1 + q1.getH()
        q2p = q2 + q2.getH()
        delta_jz = (2.0 / 3.0) * (-slope) * q2p
        delta_vx = -slope * q1p
        delta_jx = 0.5 * (delta_vx + 0.5 * delta_jz)
        coupling_ops[(cell, "z")] = j0 * eye + delta_jz
        coupling_ops[(cell, "x")] = j0 * eye + delta_jx
    for cell, species, _, _ in _bond_list(spec):
        if (cell, species) in coupling_ops:
            continue
        if (None, species) in coupling_ops:
            coupling_ops[(cell, species)] = coupling_ops[(None, species)]
        else:
            coupling_ops[(cell, species)] = j0 * eye  # no mode: background bond
    h = _hopping_matrix(ops, spec, coupling_ops)

    form = hgr_quadratic_form(params, convention="legendre")
    for cell in _pairs(space):
        q1, q2 = ops.q_pair(cell)
        q1m = q1.getH() - q1
        q2m = q2.getH() - q2
        q1p = q1.getH() + q1
        q2p = q2.getH() + q2
        h = h + form.q_minus_coeff * (q1m @ q2m) + form.q_plus_coeff * (q1p @ q2p)
    return _hermitize(h)


def mapping_residual(h_sim, h_target, space: FockSpace, window: int) -> float:
    """min over c of the spectral norm of (H_sim - H_target - c) restricted
    to total boson occupation <= window (and the fermion sector, if set).

    For a Hermitian difference the minimizing shift is the spectral
    midpoint, so the value is (lambda_max - lambda_min) / 2 of the
    restricted block.
    """
    if window > space.n_max:
        raise ValueError(f"window {window} exceeds n_max {space.n_max}")
    occ = space.boson_occupation_table()
    keep_b = np.flatnonzero(occ <= window)
    fs = space.sector_fermion_states()
    idx = (fs[:, None] * space.boson_dim + keep_b[None, :]).ravel()
    diff = (h_sim - h_target).tocsr()
    block = diff[idx][:, idx].toarray()
    evals = np.linalg.eigvalsh(block)
    return float((evals[-1] - evals[0]) / 2.0)


# ---------------------------------------------------------------------------
# eigen machinery and observables
# ---------------------------------------------------------------------------

@dataclass
class GroundStateResult:
    """Extremal eigenpair data; states are embedded in the full space."""

    energy: float
    states: list          # full-space vectors spanning the ground multiplet
    multiplicity: int
    residual: float
    sector_dimension: int

    @property
    def state(self) -> np.ndarray:
        return self.states[0]


def _operator_scale(h) -> float:
    return float(abs(h).max()) if h.nnz else 1.0


def ground_state(h, space: FockSpace, degeneracy_tol: float = 1e-9,
                 maxiter: int = 100000) -> GroundStateResult:
    """Lowest eigenpair in the configured fermion sector.

    Dense diagonalization below dimension 512, ARPACK Lanczos with a
    deterministic start vector above; the residual ||Hv - E v|| must come
    out below 1e-10 * scale(H) or ConvergenceError is raised.  Degenerate
    ground levels (within ``degeneracy_tol`` * scale) are returned as the
    full multiplet.
    """
    idx = space.sector_indices()
    hs = sparse.csr_matrix(h)[idx][:, idx]
    dim = hs.shape[0]
    if dim == 0:
        raise ValueError("empty sector")
    scale = max(_operator_scale(hs), 1.0)
    if dim <= 512:
        evals, evecs = np.linalg.eigh(hs.toarray())
    else:
        v0 = np.full(dim, 1.0 / np.sqrt(dim))
        try:
            evals, evecs = spla.eigsh(hs, k=min(6, dim - 1), which="SA",
                                      v0=v0, maxiter=maxiter, tol=1e-12)
        except spla.ArpackNoConvergence as exc:
            raise ConvergenceError(f"Lanczos failed to converge: {exc}") from exc
        order = np.argsort(evals)
        evals, evecs = evals[order], evecs[:, order]
    e0 = float(evals[0])
    members = [k for k in range(len(evals)) if evals[k] - e0 <= degeneracy_tol * scale]
    states = []
    residual0 = None
    for k in members:
        v = evecs[:, k]
        res = float(np.linalg.norm(hs @ v - evals[k] * v))
        if res > 1e-10 * scale:
            raise ConvergenceError(f"eigenpair residual {res:g} above 1e-10*scale")
        if residual0 is None:
            residual0 = res
        full = np.zeros(space.dimension, dtype=complex)
        full[idx] = v
        states.append(full)
    return GroundStateResult(energy=e0, states=states, multiplicity=len(members),
                             residual=residual0, sector_dimension=dim)


def thermal_expectation(h, temperature: float, obs, space: FockSpace,
                        dense_cap: int = 4096) -> float:
    """tr(obs exp(-H/T)) / tr(exp(-H/T)) in the configured sector, k_B = 1.

    Requires the full spectrum, so the sector dimension must not exceed
    ``dense_cap``.  T = 0 returns the uniform average over the ground
    multiplet; T = inf the uniform average over the sector.
    """
    if temperature < 0:
        raise ValueError("temperature must be >= 0")
    idx = space.sector_indices()
    hs = sparse.csr_matrix(h)[idx][:, idx]
    if hs.shape[0] > dense_cap:
        raise DimensionCapError(f"sector dimension {hs.shape[0]} exceeds {dense_cap}")
    obs_s = sparse.csr_matrix(obs)[idx][:, idx].toarray()
    evals, evecs = np.linalg.eigh(hs.toarray())
    diag_obs = np.einsum("ik,ij,jk->k", evecs.conj(), obs_s, evecs).real
    if temperature == 0:
        mask = (evals - evals[0]) <= 1e-12 * max(1.0, abs(evals[0]))
        return float(diag_obs[mask].mean())
    if np.isinf(temperature):
        return float(diag_obs.mean())
    weights = np.exp(-(evals - evals[0]) / temperature)
    return float((diag_obs * weights).sum() / weights.sum())


def boson_occupations(states, weights, ops: ModeOperators) -> np.ndarray:
    """<d_m+ d_m> per boson mode for a (mixture of) full-space vector(s)."""
    out = np.zeros(len(ops.d))
    for w, v in zip(weights, states):
        for m, dm in enumerate(ops.d):
            dv = dm @ v
            out[m] += w * float(np.real(np.vdot(dv, dv)))
    return out


def weak_fluctuation_report(state, space: FockSpace, ops: ModeOperators,
                            optical, threshold: float = 1e-2):
    """Per-mode <d+d>/D^2 validity report for a state on this space.

    Thin bridge to :func:`gravlat.designer.weak_fluctuation_check`: the
    linearized couplings and quartic reductions are only trustworthy while
    every ratio stays small.
    """
    from .designer import weak_fluctuation_check
    weights, states = _as_mixture(state)
    occ = boson_occupations(states, weights, ops)
    species = [s for _, s in space.boson_modes]
    return weak_fluctuation_check(occ, species, optical, threshold=threshold)


@dataclass
class CorrelatorReport:
    """Two- and four-point data plus the Wick factorization residual."""

    c_matrix: np.ndarray          # <c_i+ c_j>
    d_dag_d: np.ndarray           # <d_m+ d_n>
    d_dag_ddag: np.ndarray        # <d_m+ d_n+>
    q_corr: dict                  # per pair: {"q1dag_q2": .., "q1dag_q2dag": ..}
    sampled_quadruples: list
    four_point: np.ndarray
    wick_prediction: np.ndarray
    wick_residual: float
    wick_argmax: tuple


def _as_mixture(state):
    if isinstance(state, GroundStateResult):
        n = state.multiplicity
        return [1.0 / n] * n, state.states
    state = np.asarray(state)
    if state.ndim == 1:
        return [1.0], [state.astype(complex)]
    raise TypeError("state must be a vector or GroundStateResult")


def correlators_and_wick(state, space: FockSpace, ops: ModeOperators,
                         n_samples: int = 512, seed: int = 0) -> CorrelatorReport:
    """Correlation data of a normalized state (or ground multiplet mixture).

    Fermion two-point matrix C_ij = <c_i+ c_j>, boson matrices <d+ d> and
    <d+ d+>, ladder-pair correlators per boson pair, and the sampled
    four-point tensor <c_i+ c_j+ c_k c_l> against its two-point
    factorization C_il C_jk - C_ik C_jl.  All index quadruples are used
    when the mode count is at most 8; otherwise ``n_samples`` quadruples
    are drawn with the seeded generator.
    """
    weights, states = _as_mixture(state)
    nf = space.n_fermion_modes
    nb = space.n_boson_modes

    c_mat = np.zeros((nf, nf), dtype=complex)
    d_dag_d = np.zeros((nb, nb), dtype=complex)
    d_dag_ddag = np.zeros((nb, nb), dtype=complex)
    q_corr_acc = {}
    four_acc = None

    if nf <= 8:
        quads = [(i, j, k, l) for i in range(nf) for j in range(nf)
                 for k in range(nf) for l in range(nf)]
    else:
        rng = np.random.default_rng(seed)
        quads = [tuple(q) for q in rng.integers(0, nf, size=(n_samples, 4))]

    for w, psi in zip(weights, states):
        cvecs = [ops.c[i] @ psi for i in range(nf)]
        for i in range(nf):
            for j in range(nf):
                c_mat[i, j] += w * np.vdot(cvecs[i], cvecs[j])
        dvecs = [dm @ psi for dm in ops.d]
        ddagvecs = [dm.getH() @ psi for dm in ops.d]
        for m in range(nb):
            for n in range(nb):
                d_dag_d[m, n] += w * np.vdot(dvecs[m], dvecs[n])
                d_dag_ddag[m, n] += w * np.vdot(dvecs[m], ddagvecs[n])
        for cell in _pairs(space):
            q1, q2 = ops.q_pair(cell)
            q1v = q1 @ psi
            acc = q_corr_acc.setdefault(cell, {"q1dag_q2": 0.0, "q1dag_q2dag": 0.0})
            acc["q1dag_q2"] += w * np.vdot(q1v, q2 @ psi)
            acc["q1dag_q2dag"] += w * np.vdot(q1v, q2.getH() @ psi)
        pair_vecs = {}
        for (_, _, k, l) in quads:
            if (k, l) not in pair_vecs:
                pair_vecs[(k, l)] = ops.c[k] @ (ops.c[l] @ psi)
        vals = np.empty(len(quads), dtype=complex)
        for t, (i, j, k, l) in enumerate(quads):
            left = pair_vecs.get((j, i))
            if left is None:
                left = ops.c[j] @ (ops.c[i] @ psi)
                pair_vecs[(j, i)] = left
            vals[t] = np.vdot(left, pair_vecs[(k, l)])
        four_acc = w * vals if four_acc is None else four_acc + w * vals

    wick = np.array([c_mat[i, l] * c_mat[j, k] - c_mat[i, k] * c_mat[j, l]
                     for (i, j, k, l) in quads])
    diff = np.abs(four_acc - wick)
    argmax = int(np.argmax(diff)) if len(diff) else 0
    return CorrelatorReport(
        c_matrix=c_mat,
        d_dag_d=d_dag_d,
        d_dag_ddag=d_dag_ddag,
        q_corr=q_corr_acc,
        sampled_quadruples=quads,
        four_point=four_acc,
        wick_prediction=wick,
        wick_residual=float(diff.max()) if len(diff) else 0.0,
        wick_argmax=quads[argmax] if quads else (),
    )
