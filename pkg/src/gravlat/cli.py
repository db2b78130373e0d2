"""Batch front door: parse a config file, run one command, emit artifacts.

Every run writes its data files plus ``manifest.txt`` (full resolved config,
code version, wall time, validity ratios) into the output directory.  Data
CSVs are byte-stable across reruns of the same config and seed: floats are
written in shortest round-trip form and all summation orders are fixed.
The wall-time line makes the manifest itself non-identical between runs;
everything else in it is deterministic too.

Exit codes: 0 success, 2 config error, 3 eigensolver non-convergence,
4 resource cap exceeded, 1 any other library error.
"""

from __future__ import annotations

import argparse
import difflib
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .exceptions import (ConfigError, ConvergenceError, DimensionCapError,
                         GravlatError)
from .geometry import (DiagonalFluctuationSlab, Grid2D, ModelParams,
                       SpacetimeGrid, spin_connection_general,
                       torsion_residual)
from .gravity_action import (fierz_pauli_quadratic, fp_standard_form,
                             legendre_hamiltonian_density, palatini_orders)
from .continuum import (CurrentField, gaussian_elimination_oracle,
                        hgr_quadratic_form, integrate_out_geometry,
                        normal_mode_frequencies, symplectic_frequencies)
from .designer import design_sheet_pairs, hubbard_integrals, optical_params
from .lattice import (CouplingField, LatticeSpec, bloch_f,
                      couplings_from_dreibein, dirac_slopes,
                      dreibein_from_couplings, fermi_points,
                      reciprocal_vectors)
from .manybody import (FockSpace, assemble_background_hopping,
                       assemble_simulator_hamiltonian,
                       assemble_target_hamiltonian, correlators_and_wick,
                       ground_state, mapping_residual, operator_algebra,
                       per_cell_pairs, uniform_pair, weak_fluctuation_report)
from .serialize import fmt, write_csv, write_keyvalue

COMMANDS = (
    "dispersion", "fermi-points", "slopes", "map-couplings",
    "spin-connection", "action-check", "graviton-modes", "design",
    "spectrum", "ground-state", "correlators", "wick-sweep",
    "map-residual", "integrate-out",
)

_PLACEMENTS = ("per_cell", "uniform", "cell0")


def _parse_scalar(kind, raw: str):
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    if kind == "floatlist":
        return tuple(float(tok) for tok in raw.split(",") if tok.strip())
    return raw


# (section, key) -> (kind, default, validator, description)
_SCHEMA = {
    ("", "command"): ("str", None, lambda v: v in COMMANDS,
                      f"one of {', '.join(COMMANDS)}"),
    ("", "seed"): ("int", 0, lambda v: 0 <= v < 2 ** 63, "64-bit non-negative"),
    ("", "output"): ("str", "gravlat_out", lambda v: True, "directory path"),
    ("model", "g"): ("float", 0.01, lambda v: v >= 0, ">= 0"),
    ("model", "l"): ("float", 1.0, lambda v: v > 0, "> 0"),
    ("model", "mu"): ("float", 1.0, lambda v: v > 0, "> 0"),
    ("lattice", "ncx"): ("int", 1, lambda v: v >= 1, ">= 1"),
    ("lattice", "ncy"): ("int", 1, lambda v: v >= 1, ">= 1"),
    ("truncation", "n_max"): ("int", 2, lambda v: v >= 0, ">= 0"),
    ("truncation", "window"): ("int", 2, lambda v: v >= 0, ">= 0"),
    ("truncation", "dense_cap"): ("int", 4096, lambda v: v >= 1, ">= 1"),
    ("truncation", "nnz_cap"): ("int", 2 ** 22, lambda v: v >= 1, ">= 1"),
    ("manybody", "placement"): ("str", "per_cell", lambda v: v in _PLACEMENTS,
                                f"one of {', '.join(_PLACEMENTS)}"),
    ("manybody", "filling"): ("str", "half", lambda v: v == "half" or v.isdigit(),
                              "'half' or a fermion count"),
    ("sweep", "g_values"): ("floatlist", (0.0, 1e-3, 3e-3, 1e-2),
                            lambda v: all(x >= 0 for x in v), "floats >= 0"),
    ("couplings", "jx"): ("float", 1.0, lambda v: v > 0, "> 0"),
    ("couplings", "jz"): ("float", 1.0, lambda v: v > 0, "> 0"),
    ("couplings", "nk"): ("int", 24, lambda v: v >= 2, ">= 2"),
    ("map", "xi1x"): ("float", 0.0, lambda v: True, "real"),
    ("map", "xi2y"): ("float", 0.0, lambda v: True, "real"),
    ("fields", "nt"): ("int", 6, lambda v: v >= 3, ">= 3"),
    ("fields", "nx"): ("int", 16, lambda v: v >= 4, ">= 4"),
    ("fields", "ny"): ("int", 16, lambda v: v >= 4, ">= 4"),
    ("fields", "ht"): ("float", 0.1, lambda v: v > 0, "> 0"),
    ("fields", "h"): ("float", 0.4, lambda v: v > 0, "> 0"),
    ("fields", "modes"): ("int", 3, lambda v: v >= 1, ">= 1"),
    ("fields", "amplitude"): ("float", 0.05, lambda v: v > 0, "> 0"),
    ("hubbard", "v0"): ("float", 10.0, lambda v: v >= 0, ">= 0"),
    ("hubbard", "a_s"): ("float", 0.01, lambda v: True, "real"),
    ("hubbard", "mass"): ("float", 1.0, lambda v: v > 0, "> 0"),
    ("hubbard", "spacing"): ("float", 1.0, lambda v: v > 0, "> 0"),
    ("thermal", "temperature"): ("float", 0.0, lambda v: v >= 0, ">= 0"),
}

_REQUIRED = (("", "command"),)


@dataclass
class RunConfig:
    """Fully resolved run description; every artifact is a function of this
    plus the code version."""

    values: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]

    @property
    def command(self) -> str:
        return self.values[("", "command")]

    @property
    def params(self) -> ModelParams:
        return ModelParams(G=self.values[("model", "g")],
                           l=self.values[("model", "l")],
                           mu=self.values[("model", "mu")])

    @property
    def lattice(self) -> LatticeSpec:
        return LatticeSpec(self.values[("lattice", "ncx")],
                           self.values[("lattice", "ncy")])

    def fock_space(self) -> FockSpace:
        spec = self.lattice
        placement = self.values[("manybody", "placement")]
        if placement == "per_cell":
            modes = per_cell_pairs(spec)
        elif placement == "uniform":
            modes = uniform_pair()
        else:
            modes = ((0, "x"), (0, "z"))
        filling = self.values[("manybody", "filling")]
        sector = spec.n_modes // 2 if filling == "half" else int(filling)
        return FockSpace(spec.n_modes, modes, self.values[("truncation", "n_max")],
                         sector=sector, nnz_cap=self.values[("truncation", "nnz_cap")])

    def to_pairs(self):
        pairs = []
        for (section, key) in sorted(_SCHEMA):
            name = f"{section}.{key}" if section else key
            value = self.values[(section, key)]
            if isinstance(value, tuple):
                value = ",".join(fmt(v) for v in value)
            pairs.append((name, value))
        return pairs


def parse_config(text: str) -> RunConfig:
    """Parse and validate; raises ConfigError carrying every problem found."""
    problems = []
    seen = {}
    values = {}
    section = ""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            continue
        if "=" not in line:
            problems.append(f"line {lineno}: expected 'key = value', got {line!r}")
            continue
        key, _, rawval = line.partition("=")
        key = key.strip()
        rawval = rawval.strip()
        full = (section, key)
        if full in seen:
            problems.append(
                f"line {lineno}: duplicate key '{key}' in section '{section or '(top)'}'"
                f" (first set at line {seen[full]})")
            continue
        seen[full] = lineno
        if full not in _SCHEMA:
            candidates = [k for (s, k) in _SCHEMA if s == section]
            hint = difflib.get_close_matches(key, candidates, n=1)
            suggestion = f"; nearest valid key: '{hint[0]}'" if hint else ""
            problems.append(
                f"line {lineno}: unknown key '{key}' in section "
                f"'{section or '(top)'}'{suggestion}")
            continue
        kind, _, validator, description = _SCHEMA[full]
        try:
            value = _parse_scalar(kind, rawval)
        except ValueError:
            problems.append(f"line {lineno}: key '{key}' expects {kind}, got {rawval!r}")
            continue
        if not validator(value):
            problems.append(f"line {lineno}: key '{key}' out of range (expected {description})")
            continue
        values[full] = value
    for full in _REQUIRED:
        if full not in values:
            problems.append(f"missing required key '{full[1]}'")
    if problems:
        raise ConfigError(problems)
    for full, (kind, default, _, _) in _SCHEMA.items():
        values.setdefault(full, default)
    return RunConfig(values=values)


# ---------------------------------------------------------------------------
# field fabrication for the check commands
# ---------------------------------------------------------------------------

def _random_bandlimited_slab(cfg: RunConfig, grid: SpacetimeGrid, rng) -> DiagonalFluctuationSlab:
    """Periodic trigonometric fields sharing one mode set across components."""
    n_modes = cfg[("fields", "modes")]
    amp = cfg[("fields", "amplitude")]
    tt = np.arange(grid.nt) * grid.ht
    xx = np.arange(grid.nx) * grid.h
    yy = np.arange(grid.ny) * grid.h
    t3, x3, y3 = np.meshgrid(tt, xx, yy, indexing="ij")
    periods = (grid.nt * grid.ht, grid.nx * grid.h, grid.ny * grid.h)
    modes = []
    while len(modes) < n_modes:
        cand = (int(rng.integers(-2, 3)), int(rng.integers(-3, 4)), int(rng.integers(-3, 4)))
        if cand != (0, 0, 0):
            modes.append(cand)

    def component():
        out = np.zeros(grid.shape)
        for kt, kx, ky in modes:
            phase = rng.uniform(0.0, 2.0 * np.pi)
            out += rng.normal() * amp * np.sin(
                2 * np.pi * (kt * t3 / periods[0] + kx * x3 / periods[1]
                             + ky * y3 / periods[2]) + phase)
        return out

    return DiagonalFluctuationSlab(grid, component(), component())


class _TrigField:
    """A random continuum field sin-series with analytic derivatives.

    Spatial wavenumbers are integer multiples of 2 pi over fixed periods
    (lx, ly), so the same continuum function can be resampled on refined
    grids; the time frequency is a free real number.
    """

    def __init__(self, rng, n_modes, amp, lx, ly):
        self.terms = []
        while len(self.terms) < n_modes:
            kx = int(rng.integers(-3, 4))
            ky = int(rng.integers(-3, 4))
            if (kx, ky) == (0, 0):
                continue
            self.terms.append((amp * rng.normal(), rng.uniform(0.5, 1.5),
                               2 * np.pi * kx / lx, 2 * np.pi * ky / ly,
                               rng.uniform(0.0, 2 * np.pi)))

    def __call__(self, t, x, y, dt=0, dx=0, dy=0):
        out = np.zeros(np.broadcast(t, x, y).shape)
        for amp, w, kx, ky, phase in self.terms:
            arg = w * t + kx * x + ky * y + phase
            order = dt + dx + dy
            factor = (w ** dt) * (kx ** dx) * (ky ** dy)
            if order % 4 == 0:
                wave = np.sin(arg)
            elif order % 4 == 1:
                wave = np.cos(arg)
            elif order % 4 == 2:
                wave = -np.sin(arg)
            else:
                wave = -np.cos(arg)
            out += amp * factor * wave
        return out


def _connection_refinement_report(params: ModelParams, f1: _TrigField, f2: _TrigField,
                                  grid: SpacetimeGrid):
    """(torsion residual, agreement with the exact closed form) at one h.

    The slab is sampled from the continuum fields; the reference connection
    is the closed-form torsionless solution evaluated with analytic
    derivatives, so both reported numbers are pure O(h^2) discretization
    errors of the central-difference pipeline.
    """
    tt = (np.arange(grid.nt) - grid.nt // 2) * grid.ht
    xx = np.arange(grid.nx) * grid.h
    yy = np.arange(grid.ny) * grid.h
    t3, x3, y3 = np.meshgrid(tt, xx, yy, indexing="ij")
    slab = DiagonalFluctuationSlab(grid, f1(t3, x3, y3), f2(t3, x3, y3))
    l = params.l
    v_ref = np.zeros((3, 3) + grid.shape)
    v_ref[0, 1] = -f1(t3, x3, y3, dy=1) / l
    v_ref[0, 2] = +f2(t3, x3, y3, dx=1) / l
    v_ref[1, 2] = -f2(t3, x3, y3, dt=1)
    v_ref[2, 1] = +f1(t3, x3, y3, dt=1)
    from .geometry import SpinConnectionSlab
    ref_slab = SpinConnectionSlab(grid, v_ref)
    residual = torsion_residual(params, slab, ref_slab)
    v_gen = spin_connection_general(params, slab)
    interior = slice(1, -1)
    agreement = float(np.abs(v_gen.tensor[:, :, interior]
                             - v_ref[:, :, interior]).max())
    return residual, agreement


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _cmd_dispersion(cfg, outdir, extras):
    c = CouplingField.uniform(cfg[("couplings", "jx")], cfg[("couplings", "jx")],
                              cfg[("couplings", "jz")])
    nk = cfg[("couplings", "nk")]
    g1, g2 = reciprocal_vectors()
    rows = []
    for m1 in range(nk):
        for m2 in range(nk):
            k = (m1 / nk) * g1 + (m2 / nk) * g2
            e = abs(bloch_f(c, k))
            rows.append((k[0], k[1], -e, e))
    write_csv(outdir / "dispersion.csv", "kx,ky,E1,E2", rows)


def _cmd_fermi_points(cfg, outdir, extras):
    c = CouplingField.uniform(cfg[("couplings", "jx")], cfg[("couplings", "jx")],
                              cfg[("couplings", "jz")])
    p_plus, p_minus = fermi_points(c)
    rows = [(p[0], p[1], abs(bloch_f(c, p))) for p in (p_plus, p_minus)]
    write_csv(outdir / "fermi_points.csv", "kx,ky,residual", rows)


def _cmd_slopes(cfg, outdir, extras):
    c = CouplingField.uniform(cfg[("couplings", "jx")], cfg[("couplings", "jx")],
                              cfg[("couplings", "jz")])
    (a_p, b_p), (a_m, b_m) = dirac_slopes(c)
    write_csv(outdir / "slopes.csv", "a_plus,b_plus,a_minus,b_minus",
              [(a_p, b_p, a_m, b_m)])


def _cmd_map_couplings(cfg, outdir, extras):
    params = cfg.params
    xi1, xi2 = cfg[("map", "xi1x")], cfg[("map", "xi2y")]
    c = couplings_from_dreibein(np.array(xi1), np.array(xi2), params)
    back1, back2 = dreibein_from_couplings(c, params)
    pairs = [
        ("xi1x", xi1), ("xi2y", xi2),
        ("jx", float(c.jx)), ("jy", float(c.jy)), ("jz", float(c.jz)),
        ("xi1x_roundtrip", float(back1)), ("xi2y_roundtrip", float(back2)),
        ("roundtrip_residual", max(abs(float(back1) - xi1), abs(float(back2) - xi2))),
    ]
    write_keyvalue(outdir / "map_couplings.txt", pairs)


def _cmd_spin_connection(cfg, outdir, extras):
    params = cfg.params
    rng = np.random.default_rng(cfg[("", "seed")])
    lx = cfg[("fields", "nx")] * cfg[("fields", "h")]
    ly = cfg[("fields", "ny")] * cfg[("fields", "h")]
    f1 = _TrigField(rng, cfg[("fields", "modes")], cfg[("fields", "amplitude")], lx, ly)
    f2 = _TrigField(rng, cfg[("fields", "modes")], cfg[("fields", "amplitude")], lx, ly)
    pairs = []
    prev = {}
    for level, factor in (("h", 1), ("h_half", 2)):
        grid = SpacetimeGrid(cfg[("fields", "nt")], cfg[("fields", "nx")] * factor,
                             cfg[("fields", "ny")] * factor,
                             cfg[("fields", "ht")] / factor,
                             cfg[("fields", "h")] / factor)
        res, diff = _connection_refinement_report(params, f1, f2, grid)
        pairs.append((f"torsion_residual_{level}", res))
        pairs.append((f"gauge_fixed_agreement_{level}", diff))
        prev[level] = (res, diff)
    pairs.append(("torsion_ratio", prev["h"][0] / prev["h_half"][0]))
    pairs.append(("agreement_ratio", prev["h"][1] / prev["h_half"][1]))
    pairs.append(("weak_coupling_ratio", params.weak_coupling_ratio))
    write_keyvalue(outdir / "spin_connection.txt", pairs)


def _cmd_action_check(cfg, outdir, extras):
    params = cfg.params
    if params.G == 0:
        raise ConfigError(["action-check requires g > 0"])
    rng = np.random.default_rng(cfg[("", "seed")])
    grid = SpacetimeGrid(cfg[("fields", "nt")], cfg[("fields", "nx")],
                         cfg[("fields", "ny")], cfg[("fields", "ht")],
                         cfg[("fields", "h")])
    slab = _random_bandlimited_slab(cfg, grid, rng)
    report = palatini_orders(params, slab)
    fp = fierz_pauli_quadratic(params, slab)
    fp_std = fp_standard_form(params, slab)
    z = rng.normal(size=(4, 100))
    leg = legendre_hamiltonian_density(params, *z)
    form = hgr_quadratic_form(params)
    leg_residual = float(np.abs(leg - form.density(*z)).max())
    pairs = report.to_pairs()
    pairs += [
        ("fp_quadratic", fp),
        ("fp_standard_form", fp_std),
        ("fp_vs_standard_residual", fp - fp_std),
        ("legendre_vs_quadratic_form", leg_residual),
        ("weak_coupling_ratio", params.weak_coupling_ratio),
    ]
    write_keyvalue(outdir / "action_check.txt", pairs)


def _cmd_graviton_modes(cfg, outdir, extras):
    params = cfg.params
    omega_p, omega_m, signature = normal_mode_frequencies(params)
    oracle = symplectic_frequencies(hgr_quadratic_form(params).matrix())
    write_keyvalue(outdir / "graviton_modes.txt", [
        ("omega_plus", omega_p),
        ("omega_minus", omega_m),
        ("signature", f"{'+' if signature[0] > 0 else '-'}{'-' if signature[1] < 0 else '+'}"),
        ("oracle_omega_low", float(oracle[0])),
        ("oracle_omega_high", float(oracle[1])),
        ("g_independent", True),
    ])


def _cmd_design(cfg, outdir, extras):
    pairs = design_sheet_pairs(cfg.params)
    hub = hubbard_integrals(cfg[("hubbard", "v0")], cfg[("hubbard", "a_s")],
                            cfg[("hubbard", "mass")], cfg[("hubbard", "spacing")])
    pairs += hub.to_pairs()
    write_keyvalue(outdir / "design_sheet.txt", pairs)


def _many_body_setup(cfg):
    params = cfg.params
    spec = cfg.lattice
    space = cfg.fock_space()
    ops = operator_algebra(space)
    return params, spec, space, ops


def _assemble_for(cfg, params, spec, space, ops):
    if params.G == 0:
        return assemble_background_hopping(params.l, spec, space, ops)
    return assemble_simulator_hamiltonian(params, spec, space, ops)


def _truncation_delta(cfg, params, spec, space, energy) -> float:
    if space.n_max == 0 or params.G == 0:
        return 0.0
    reduced = space.with_n_max(space.n_max - 1)
    h_red = assemble_simulator_hamiltonian(params, spec, reduced)
    return energy - ground_state(h_red, reduced).energy


def _cmd_spectrum(cfg, outdir, extras):
    params, spec, space, ops = _many_body_setup(cfg)
    h = _assemble_for(cfg, params, spec, space, ops)
    idx = space.sector_indices()
    import scipy.sparse as sparse
    hs = sparse.csr_matrix(h)[idx][:, idx]
    if hs.shape[0] > cfg[("truncation", "dense_cap")]:
        raise DimensionCapError(
            f"sector dimension {hs.shape[0]} exceeds dense cap for spectrum")
    evals = np.linalg.eigvalsh(hs.toarray())
    k = min(len(evals), 32)
    write_csv(outdir / "spectrum.csv", "index,energy",
              [(i, evals[i]) for i in range(k)])
    extras.append(("sector_dimension", hs.shape[0]))


def _cmd_ground_state(cfg, outdir, extras):
    params, spec, space, ops = _many_body_setup(cfg)
    h = _assemble_for(cfg, params, spec, space, ops)
    gs = ground_state(h, space)
    header_meta = [
        f"# modes={space.n_fermion_modes} fermion + {space.n_boson_modes} boson",
        f"# boson_modes={space.boson_modes}",
        f"# n_max={space.n_max}",
        f"# sector={space.sector}",
        f"# ordering=fermion_major(bit i = fermion mode i; boson digits little-endian)",
    ]
    with open(outdir / "ground_state.csv", "w", newline="\n") as fh:
        for line in header_meta:
            fh.write(line + "\n")
        fh.write("index,re,im\n")
        v = gs.state
        for i in np.flatnonzero(np.abs(v) > 0):
            fh.write(f"{i},{fmt(v[i].real)},{fmt(v[i].imag)}\n")
    extras.append(("ground_energy", gs.energy))
    extras.append(("multiplicity", gs.multiplicity))
    extras.append(("eigen_residual", gs.residual))
    extras.append(("truncation_delta", _truncation_delta(cfg, params, spec, space, gs.energy)))


def _cmd_correlators(cfg, outdir, extras):
    params, spec, space, ops = _many_body_setup(cfg)
    h = _assemble_for(cfg, params, spec, space, ops)
    gs = ground_state(h, space)
    rep = correlators_and_wick(gs, space, ops, seed=cfg[("", "seed")])
    nf = space.n_fermion_modes
    write_csv(outdir / "c_matrix.csv", "i,j,re,im",
              [(i, j, rep.c_matrix[i, j].real, rep.c_matrix[i, j].imag)
               for i in range(nf) for j in range(nf)])
    nb = space.n_boson_modes
    write_csv(outdir / "d_correlators.csv", "m,n,dagd_re,dagd_im,dagdag_re,dagdag_im",
              [(m, n, rep.d_dag_d[m, n].real, rep.d_dag_d[m, n].imag,
                rep.d_dag_ddag[m, n].real, rep.d_dag_ddag[m, n].imag)
               for m in range(nb) for n in range(nb)])
    pairs = [("wick_residual", rep.wick_residual),
             ("wick_argmax", "-".join(str(i) for i in rep.wick_argmax)),
             ("ground_energy", gs.energy), ("multiplicity", gs.multiplicity)]
    if params.G > 0 and space.n_boson_modes:
        wf = weak_fluctuation_report(gs, space, ops, optical_params(params))
        pairs.extend(wf.to_pairs())
    extras.append(("truncation_delta", _truncation_delta(cfg, params, spec, space, gs.energy)))
    for cell, qc in sorted(rep.q_corr.items(), key=lambda kv: (kv[0] is None, kv[0])):
        tag = "shared" if cell is None else f"cell{cell}"
        pairs.append((f"q1dag_q2_{tag}_re", complex(qc["q1dag_q2"]).real))
        pairs.append((f"q1dag_q2_{tag}_im", complex(qc["q1dag_q2"]).imag))
        pairs.append((f"q1dag_q2dag_{tag}_re", complex(qc["q1dag_q2dag"]).real))
        pairs.append((f"q1dag_q2dag_{tag}_im", complex(qc["q1dag_q2dag"]).imag))
    write_keyvalue(outdir / "correlator_summary.txt", pairs)


def _cmd_wick_sweep(cfg, outdir, extras):
    spec = cfg.lattice
    rows = []
    for g in cfg[("sweep", "g_values")]:
        if g == 0:
            space0 = FockSpace(spec.n_modes, (), n_max=0,
                               sector=cfg.fock_space().sector)
            ops0 = operator_algebra(space0)
            h = assemble_background_hopping(cfg.params.l, spec, space0, ops0)
            gs = ground_state(h, space0)
            rep = correlators_and_wick(gs, space0, ops0, seed=cfg[("", "seed")])
        else:
            params = ModelParams(G=g, l=cfg.params.l, mu=cfg.params.mu)
            space = cfg.fock_space()
            ops = operator_algebra(space)
            h = assemble_simulator_hamiltonian(params, spec, space, ops)
            gs = ground_state(h, space)
            rep = correlators_and_wick(gs, space, ops, seed=cfg[("", "seed")])
        rows.append((g, rep.wick_residual, gs.energy, gs.multiplicity))
    write_csv(outdir / "wick_sweep.csv", "g,wick_residual,ground_energy,multiplicity", rows)
    positive = [g for g in cfg[("sweep", "g_values")] if g > 0]
    if positive and cfg[("truncation", "n_max")] > 0:
        g_top = max(positive)
        params_top = ModelParams(G=g_top, l=cfg.params.l, mu=cfg.params.mu)
        space_top = cfg.fock_space()
        h_top = assemble_simulator_hamiltonian(params_top, spec, space_top)
        e_top = ground_state(h_top, space_top).energy
        extras.append(("truncation_delta_at_g_max",
                       _truncation_delta(cfg, params_top, spec, space_top, e_top)))


def _cmd_map_residual(cfg, outdir, extras):
    spec = cfg.lattice
    window = cfg[("truncation", "window")]
    rows = []
    for g in cfg[("sweep", "g_values")]:
        if g == 0:
            continue  # the mapping comparison needs G > 0 (1/G boson line)
        params = ModelParams(G=g, l=cfg.params.l, mu=cfg.params.mu)
        space = cfg.fock_space()
        ops = operator_algebra(space)
        h_sim = assemble_simulator_hamiltonian(params, spec, space, ops)
        h_tgt = assemble_target_hamiltonian(params, spec, space, ops)
        rows.append((g, mapping_residual(h_sim, h_tgt, space, window)))
    write_csv(outdir / "map_residual.csv", "g,residual", rows)
    extras.append(("window", window))
    skipped = sum(1 for g in cfg[("sweep", "g_values")] if g == 0)
    if skipped:
        extras.append(("skipped_zero_g_points", skipped))


def _cmd_integrate_out(cfg, outdir, extras):
    params = cfg.params
    if params.G == 0:
        raise ConfigError(["integrate-out requires g > 0"])
    grid = Grid2D(4, 4, 1.0)
    j1, j2 = 0.7, -0.3
    currents = CurrentField(grid, np.full(grid.shape, j1), np.zeros(grid.shape),
                            np.zeros(grid.shape), np.full(grid.shape, j2))
    eff = integrate_out_geometry(currents, params)
    oracle = gaussian_elimination_oracle(params, j1, j2)
    closed = eff.coefficient * 2.0 * j1 * j2
    write_keyvalue(outdir / "integrate_out.txt", [
        ("coefficient", eff.coefficient),
        ("coefficient_exact_multiple_of_piG_over_l2mu2", str(eff.coefficient_over_unit)),
        ("sample_j1", j1), ("sample_j2", j2),
        ("density_closed_form", closed),
        ("density_quadrature_oracle", oracle),
        ("oracle_residual", oracle - closed),
        ("weak_coupling_ratio", params.weak_coupling_ratio),
    ])


_DISPATCH = {
    "dispersion": _cmd_dispersion,
    "fermi-points": _cmd_fermi_points,
    "slopes": _cmd_slopes,
    "map-couplings": _cmd_map_couplings,
    "spin-connection": _cmd_spin_connection,
    "action-check": _cmd_action_check,
    "graviton-modes": _cmd_graviton_modes,
    "design": _cmd_design,
    "spectrum": _cmd_spectrum,
    "ground-state": _cmd_ground_state,
    "correlators": _cmd_correlators,
    "wick-sweep": _cmd_wick_sweep,
    "map-residual": _cmd_map_residual,
    "integrate-out": _cmd_integrate_out,
}


def run_command(cfg: RunConfig, output: Path) -> int:
    """Execute one command; returns the exit status and writes artifacts."""
    output.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    extras = []
    _DISPATCH[cfg.command](cfg, output, extras)
    wall = time.perf_counter() - started
    manifest = [("code_version", __version__)]
    manifest += cfg.to_pairs()
    manifest += [("weak_coupling_ratio", cfg.params.weak_coupling_ratio)]
    manifest += extras
    manifest += [("wall_time_s", wall)]
    write_keyvalue(output / "manifest.txt", manifest)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="gravlat",
        description="Batch runner for the lattice/geometry numerics suite.")
    parser.add_argument("config", help="path to the run configuration file")
    parser.add_argument("--output", default=None, help="artifact directory")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--threads", type=int, default=1,
                        help="accepted for interface stability; kernels are single-threaded")
    args = parser.parse_args(argv)
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(f"error: category=config cannot read config: {exc}", file=sys.stderr)
        return 2
    try:
        cfg = parse_config(text)
        if args.seed is not None:
            cfg.values[("", "seed")] = args.seed
        outdir = Path(args.output) if args.output else Path(cfg.values[("", "output")])
        return run_command(cfg, outdir)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"error: category=config {problem}", file=sys.stderr)
        return 2
    except ConvergenceError as exc:
        print(f"error: category=convergence {exc}", file=sys.stderr)
        return 3
    except DimensionCapError as exc:
        print(f"error: category=resource-cap {exc}", file=sys.stderr)
        return 4
    except GravlatError as exc:
        print(f"error: category=domain {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
