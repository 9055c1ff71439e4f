"""Experiment runner: build a model, decompose its generator, evolve,
transform, and export the demonstration datasets.

Subcommands: ``spectrum``, ``evolve``, ``mpemba``, ``metropolis``.
Exit codes: 0 ok, 2 config error, 3 numerical failure, 4 optimizer
non-convergence.  The output directory comes from the config, overridden by
the ``MPEMBA_OUT`` environment variable, overridden by ``--out``; nothing
is ever written outside it.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .config import ExperimentConfig, TransformSpec, load_config
from .davies import DaviesGenerator
from .errors import ConfigError, ValidationError
from .metropolis import MetropolisConfig, swap_metropolis, unitary_metropolis
from .models import GHZ_PER_KELVIN, ModelInstance, build_generator
from .operators import DensityMatrix, bloch_to_state, random_mixed_state, thermal_state
from .spectral import GeneratorSpectrum, decompose, evolve_spectral, spectral_gap
from .thermo import ThermoTrajectory, compute_trajectory, fit_decay_rate, noneq_free_energy
from .transform import MpembaCertificate, detect_crossing, exact_transform, verify_overlap_elimination

ENV_OUT = "MPEMBA_OUT"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_NO_CONVERGENCE = 4


class _NonConvergence(RuntimeError):
    pass


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _NonConvergence as exc:
        print(f"optimizer did not converge: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except (ValidationError, RuntimeError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mpemba",
        description="Davies-map thermalization and quantum Mpemba experiments",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func, doc in (
        ("spectrum", cmd_spectrum, "decompose the generator and dump its eigenvalue table"),
        ("evolve", cmd_evolve, "evolve the configured state(s) and export trajectories"),
        ("mpemba", cmd_mpemba, "run a transformation and emit a Mpemba certificate"),
        ("metropolis", cmd_metropolis, "run the configured annealer and export its trace"),
    ):
        p = sub.add_parser(name, help=doc)
        p.add_argument("--config", required=True, help="path to a JSON experiment config")
        p.add_argument("--out", default=None, help="output directory (overrides env and config)")
        p.add_argument("--seed", type=int, default=None, help="override all configured seeds")
        p.add_argument("--threads", type=int, default=1, help="worker-thread cap")
        p.add_argument(
            "--dense-fallback", action="store_true",
            help="allow the dense superoperator path when the block form is refused",
        )
        p.set_defaults(func=func)
    return parser


# ---------------------------------------------------------------------------
# shared assembly steps
# ---------------------------------------------------------------------------


def _setup(args) -> tuple[ExperimentConfig, ModelInstance, Path]:
    cfg = load_config(args.config)
    model = cfg.build_model()
    out = Path(args.out or os.environ.get(ENV_OUT) or cfg.outputs.directory)
    out.mkdir(parents=True, exist_ok=True)
    return cfg, model, out


def _generator(model: ModelInstance, args) -> DaviesGenerator:
    if model.basis().degeneracy_flag and not args.dense_fallback:
        raise ValidationError(
            f"model {model.name!r} has a degenerate Hamiltonian, so the block "
            "construction is refused; rerun with --dense-fallback to take the "
            "dense superoperator path"
        )
    return build_generator(model)


def _spectrum(model: ModelInstance, args) -> tuple[DaviesGenerator, GeneratorSpectrum]:
    gen = _generator(model, args)
    return gen, decompose(gen)


def _beta(model: ModelInstance) -> float:
    if model.bath is not None:
        return model.bath.beta
    return model.default_params["beta"]


def _initial_state(cfg: ExperimentConfig, model: ModelInstance, args) -> DensityMatrix:
    spec = cfg.initial_state
    basis = model.basis()
    if spec.kind == "bloch":
        if model.hamiltonian.dim != 2:
            raise ConfigError("initial_state", "bloch states need a two-level model")
        return bloch_to_state(list(spec.bloch))
    if spec.kind == "thermal":
        temp = spec.temperature
        if model.name in ("two_level_atom", "quantum_dot"):
            temp *= GHZ_PER_KELVIN  # config gives Kelvin for the mesoscopic models
        return thermal_state(basis, 1.0 / temp)
    if spec.kind == "random-mixed":
        seed = args.seed if args.seed is not None else spec.seed
        return random_mixed_state(model.hamiltonian.dim, spec.n_samples, seed)
    if spec.kind == "pure-plus":
        d = model.hamiltonian.dim
        v = np.full(d, 1.0 / math.sqrt(d), dtype=complex)
        return DensityMatrix(np.outer(v, v.conj()))
    data = np.load(spec.path)
    return DensityMatrix(np.asarray(data, dtype=complex))


def _metro_config(transform: TransformSpec, args) -> MetropolisConfig:
    metro = transform.metropolis
    if args.seed is not None:
        metro = MetropolisConfig(
            cooling_tau=metro.cooling_tau, threshold_eps=metro.threshold_eps,
            nano_n=metro.nano_n, micro_m=metro.micro_m, macro_big_m=metro.macro_big_m,
            target_modes=metro.target_modes, seed=args.seed,
            max_total_iterations=metro.max_total_iterations,
        )
    return metro


def _apply_transform(cfg, model, spectrum, rho, args):
    """Returns (rho_transformed, trace_or_None); honors the configured kind."""
    kind = cfg.transform.kind
    basis = model.basis()
    if kind == "none":
        return None, None
    if kind == "exact":
        rho_prime, _ = exact_transform(rho, basis)
        return rho_prime, None
    metro = _metro_config(cfg.transform, args)
    if kind == "unitary-metropolis":
        rho_prime, _, trace = unitary_metropolis(
            spectrum, rho, metro, fermionic=cfg.transform.fermionic
        )
        return rho_prime, trace
    pops = rho.populations(basis)
    offdiag = np.abs(basis.to_eigenbasis(rho.entries) - np.diag(pops.astype(complex))).max()
    if offdiag > 1e-10:
        raise ValidationError(
            "swap metropolis needs a state diagonal in the energy eigenbasis "
            f"(off-diagonal weight {offdiag:.2e})"
        )
    p_best, trace = swap_metropolis(spectrum, pops, metro)
    rho_prime = DensityMatrix(basis.from_eigenbasis(np.diag(p_best).astype(complex)))
    return rho_prime, trace


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_spectrum(args) -> int:
    cfg, model, out = _setup(args)
    _, spectrum = _spectrum(model, args)
    gap = spectral_gap(spectrum)
    path = out / "spectrum.tsv"
    with open(path, "w") as fh:
        fh.write(f"# model={model.name} gap={gap.value:.17g} "
                 f"classification={'complex-pair' if gap.complex_pair else 'real'}\n")
        fh.write("k\tre\tim\tgap\n")
        for k in range(1, spectrum.n_modes + 1):
            lam = spectrum.eigenvalues[k - 1]
            is_gap = int(abs(abs(lam.real) - gap.value) <= 1e-12 * max(1.0, gap.value) and k > 1)
            fh.write(f"{k}\t{lam.real:.17g}\t{lam.imag:.17g}\t{is_gap}\n")
    print(f"wrote {path} ({spectrum.n_modes} modes, gap {gap.value:.6g}, "
          f"{'complex pair' if gap.complex_pair else 'real'})")
    return EXIT_OK


def cmd_evolve(args) -> int:
    cfg, model, out = _setup(args)
    _, spectrum = _spectrum(model, args)
    basis = model.basis()
    beta = _beta(model)
    rho = spectrum.project_physical(_initial_state(cfg, model, args))
    rho_prime, _ = _apply_transform(cfg, model, spectrum, rho, args)
    if rho_prime is not None:
        rho_prime = spectrum.project_physical(rho_prime)
    times = cfg.time_grid.times()

    def run(state):
        grid = evolve_spectral(spectrum, state, times)
        return grid, compute_trajectory(grid, basis, beta)

    if rho_prime is not None and args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            fut_a = pool.submit(run, rho)
            fut_b = pool.submit(run, rho_prime)
            (grid_a, traj_a), (grid_b, traj_b) = fut_a.result(), fut_b.result()
    else:
        grid_a, traj_a = run(rho)
        grid_b, traj_b = run(rho_prime) if rho_prime is not None else (None, None)

    _write_trajectory(out, "trajectory", traj_a, grid_a, cfg)
    if traj_b is not None:
        _write_trajectory(out, "trajectory_transformed", traj_b, grid_b, cfg)
    print(f"wrote {out}/trajectory.csv" + (" and transformed twin" if traj_b is not None else ""))
    return EXIT_OK


def cmd_mpemba(args) -> int:
    cfg, model, out = _setup(args)
    _, spectrum = _spectrum(model, args)
    basis = model.basis()
    beta = _beta(model)
    h_lab = basis.hamiltonian()
    rho = spectrum.project_physical(_initial_state(cfg, model, args))
    tau = spectrum.steady_state

    kind = cfg.transform.kind if cfg.transform.kind != "none" else "exact"
    if kind == "exact":
        rho_prime, _ = exact_transform(rho, basis)
        trace = None
    else:
        rho_prime, trace = _apply_transform(cfg, model, spectrum, rho, args)
        if trace is not None and not trace.converged:
            trace.to_csv(out / "transform_trace.csv")
            raise _NonConvergence(f"best cost {trace.best_cost:.3e}")
    # superselected models: certify the physically representable state
    rho_prime = spectrum.project_physical(rho_prime)

    gain = noneq_free_energy(rho_prime, h_lab, beta) - noneq_free_energy(rho, h_lab, beta)
    overlaps = verify_overlap_elimination(spectrum, rho_prime)
    if cfg.transform.metropolis is not None:
        amps = spectrum.amplitudes(rho_prime)
        for k in cfg.transform.metropolis.target_modes:
            overlaps[k] = float(abs(amps[k - 1]))

    if np.abs(rho.entries - tau.entries).max() < 1e-12:
        cert = MpembaCertificate(
            status="not-applicable", residual_overlaps=overlaps, free_energy_gain=gain,
            notes="initial state is the fixed point; no genuine effect is claimable",
        )
    elif np.abs(rho.entries - rho_prime.entries).max() < 1e-12:
        cert = MpembaCertificate(
            status="not-applicable", residual_overlaps=overlaps, free_energy_gain=gain,
            notes="state is already inverted-diagonal; the transform is the identity",
        )
    else:
        times = cfg.time_grid.times()
        grid_a = evolve_spectral(spectrum, rho, times)
        grid_b = evolve_spectral(spectrum, rho_prime, times)
        traj_a = compute_trajectory(grid_a, basis, beta)
        traj_b = compute_trajectory(grid_b, basis, beta)
        notes = ""
        if gain > 0:
            crossing = detect_crossing(traj_a, traj_b)
        else:
            # a stochastic transform may land below the original free energy;
            # a speedup is still reportable but no genuine crossing is claimable
            crossing = None
            notes = "transform did not raise the free energy; crossing not applicable"
        fit_window = 0.5 * times[-1]
        rates = (
            fit_decay_rate(times, traj_a.l1, t_min=fit_window),
            fit_decay_rate(times, traj_b.l1, t_min=fit_window),
        )
        cert = MpembaCertificate(
            status="ok", residual_overlaps=overlaps, free_energy_gain=gain,
            crossing_time=crossing, fitted_rates=rates, notes=notes,
        )
        _write_trajectory(out, "trajectory", traj_a, grid_a, cfg)
        _write_trajectory(out, "trajectory_transformed", traj_b, grid_b, cfg)
    if trace is not None:
        trace.to_csv(out / "transform_trace.csv")
    with open(out / "certificate.txt", "w") as fh:
        fh.write(cert.to_text())
    print(f"wrote {out}/certificate.txt (status: {cert.status})")
    return EXIT_OK


def cmd_metropolis(args) -> int:
    cfg, model, out = _setup(args)
    if cfg.transform.kind not in ("unitary-metropolis", "swap-metropolis"):
        raise ConfigError("transform.kind", "the metropolis command needs a metropolis transform")
    _, spectrum = _spectrum(model, args)
    rho = _initial_state(cfg, model, args)
    rho_prime, trace = _apply_transform(cfg, model, spectrum, rho, args)
    trace.to_csv(out / "trace.csv")
    np.save(out / "state_transformed.npy", rho_prime.entries)
    print(
        f"wrote {out}/trace.csv ({len(trace)} iterations, best cost {trace.best_cost:.3e}, "
        f"{'converged' if trace.converged else 'NOT converged'})"
    )
    if not trace.converged:
        raise _NonConvergence(f"best cost {trace.best_cost:.3e} after {len(trace)} iterations")
    return EXIT_OK


# ---------------------------------------------------------------------------
# writers
# ---------------------------------------------------------------------------


def _write_trajectory(out: Path, stem: str, traj: ThermoTrajectory, grid, cfg) -> None:
    csv_path = out / f"{stem}.csv"
    traj.to_csv(csv_path)
    if cfg.outputs.dump_states:
        np.save(out / f"{stem}_states.npy", np.stack([s.entries for s in grid.states]))
    if cfg.outputs.gnuplot:
        _write_gnuplot(out / f"{stem}.gp", csv_path.name)


def _write_gnuplot(path: Path, csv_name: str) -> None:
    with open(path, "w") as fh:
        fh.write(
            "set datafile separator ','\n"
            "set key autotitle columnhead\n"
            "set logscale y\n"
            f"plot '{csv_name}' using 1:3 with lines title 'D', \\\n"
            f"     '{csv_name}' using 1:4 with lines title 'P', \\\n"
            f"     '{csv_name}' using 1:5 with lines title 'C'\n"
        )
