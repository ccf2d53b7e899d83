"""Command-line driver: ``qsvt-greens <command> [options]``.

Exit codes: 0 success, 2 invalid input, 3 numerical nonconvergence,
4 resource cap exceeded.
"""
from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .errors import ConvergenceError, ResourceError, ValidationError
from .greens import (CLASSICAL, Solver, dmft_loop, mott_csv, mott_scan, omega_grid,
                     spectral_scan)
from .lcu import block_encode, gate_counts
from .pauli import (ComplexFrequency, PauliSum, SiamParams, analytic_bath_V, dense_matrix,
                    exact_ground_state, random_pauli_sum, shifted_operators, siam_hamiltonian)
from .qsp import (DEFAULT_EPS, DEFAULT_MAX_DEGREE, PhaseVector, find_phases, inverse_poly,
                  scan_response, to_qsvt_phases)
from .qsvt import apply_inverse, frequency_record, singular_floor

EXIT_OK, EXIT_VALIDATION, EXIT_NONCONVERGENCE, EXIT_RESOURCE = 0, 2, 3, 4
# options that never change the numbers in an output file
_NOT_EMBEDDED = {"out", "config", "threads", "func"}
MOTT_PAIRS = "2:0.943,4:0.745,5.99:0.058,8:0"


# ---------------------------------------------------------------------------
# helpers

def _run_config(args) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in _NOT_EMBEDDED}
    return {k: cfg[k] for k in sorted(cfg)}


def _header_lines(args) -> list[str]:
    return [f"qsvt-greens {__version__}",
            "config " + json.dumps(_run_config(args), sort_keys=True)]


def _comment(args) -> str:
    return "".join(f"# {ln}\n" for ln in _header_lines(args))


def _emit(args, text: str):
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(args, payload: dict):
    body = {"version": __version__, "config": _run_config(args), **payload}
    _emit(args, json.dumps(body, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(obj):
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj)}")


def _read(path: str) -> str:
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None


def _siam(args) -> SiamParams:
    U = args.U
    if args.auto_V or args.V is None:
        V = analytic_bath_V(U)
    else:
        V = args.V
    if args.ph_symmetric or args.mu is None:
        return SiamParams.particle_hole(U, V, t=args.t)
    return SiamParams(U=U, mu=args.mu, eps2=args.eps2, V=V, t=args.t)


def _operator(args) -> tuple[PauliSum, str]:
    """Operator selected by ``--pauli``, ``--random`` or the SIAM options."""
    if getattr(args, "pauli", None):
        return PauliSum.from_text(_read(args.pauli)), f"file {args.pauli}"
    if getattr(args, "random", None):
        try:
            nq, nt = (int(x) for x in args.random.split(":"))
        except ValueError:
            raise ValidationError("--random expects NQUBITS:NTERMS") from None
        rng = np.random.default_rng(args.seed)
        return random_pauli_sum(rng, nq, nt), "random"
    p = _siam(args)
    h = siam_hamiltonian(p)
    if args.which == "hamiltonian":
        return h, "hamiltonian"
    gs = exact_ground_state(h)
    b_e, c_h = shifted_operators(h, gs.energy, ComplexFrequency(args.omega, args.delta))
    return (b_e, "electron") if args.which == "electron" else (c_h, "hole")


def _solver(args) -> Solver:
    if args.solver == "classical":
        return CLASSICAL
    return Solver(args.mode, kappa=args.kappa, eps=args.eps, backend=args.backend)


def _grid(args) -> np.ndarray:
    return omega_grid(args.omega_min, args.omega_max, args.n_omega)


def _pairs(text: str) -> list[tuple[float, float]]:
    out = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            u, v = item.split(":")
            out.append((float(u), analytic_bath_V(float(u)) if v == "auto" else float(v)))
        except ValueError:
            raise ValidationError(f"bad (U, V) pair {item!r}; expected U:V") from None
    if not out:
        raise ValidationError("no (U, V) pairs given")
    return out


# ---------------------------------------------------------------------------
# commands

def cmd_hamiltonian(args):
    p = _siam(args)
    h = siam_hamiltonian(p)
    if len(h) == 0:
        print("warning: Hamiltonian is identically zero (empty PauliSum)", file=sys.stderr)
    _emit(args, _comment(args) + f"# U {p.U!r} mu {p.mu!r} eps2 {p.eps2!r} V {p.V!r}\n"
          + h.to_text())
    return EXIT_OK


def cmd_phases(args):
    if args.import_file:
        pv = PhaseVector.from_text(_read(args.import_file))
    else:
        poly = inverse_poly(args.kappa, args.eps)
        pv = find_phases(poly, tol=args.tol, max_degree=args.max_degree)
        print(f"degree {pv.degree}  C {pv.norm_constant:.6g}  residual {pv.residual:.3g}",
              file=sys.stderr)
    if args.scan:
        if pv.convention != "qsp":
            raise ValidationError("--scan needs QSP-convention phases")
        a, resp = scan_response(pv, np.linspace(-1, 1, args.scan))
        c = pv.norm_constant
        lines = ["a,re_P,im_P,abs_err_inverse"]
        for x, pz in zip(a, resp):
            err = abs(c * pz.real - 1 / x) if math.isfinite(c) else float("nan")
            lines.append(",".join(repr(float(v)) for v in (x, pz.real, pz.imag, err)))
        _emit(args, _comment(args) + "\n".join(lines) + "\n")
        return EXIT_OK
    if args.convention == "qsvt" and pv.convention == "qsp":
        pv = to_qsvt_phases(pv)
    # the header line must come first in this format; provenance goes last
    _emit(args, pv.to_text() + _comment(args))
    return EXIT_OK


def cmd_block_encode(args):
    a, source = _operator(args)
    enc = block_encode(a, realize=True)
    u = enc.unitary
    unit_err = float(np.max(np.abs(u.conj().T @ u - np.eye(len(u)))))
    blk_err = float(np.max(np.abs(enc.block() - dense_matrix(a) / enc.one_norm)))
    real_err = float(np.max(np.abs(enc.realization.unitary() - u)))
    if args.gates:
        with open(args.gates, "w") as fh:
            fh.write(_comment(args) + enc.realization.to_text())
    _emit_json(args, {"source": source, "n_terms": len(a), "n_sys": enc.n_sys,
                      "n_prep": enc.n_prep, "one_norm": enc.one_norm,
                      "unitarity_error": unit_err, "block_error": blk_err,
                      "realization_error": real_err, "n_gates": len(enc.realization)})
    return EXIT_OK


def cmd_invert(args):
    records = []
    if args.pauli or args.random:
        m, _ = _operator(args)
        res = apply_inverse(m, args.kappa, args.eps, mode=args.mode, backend=args.backend)
        rep = singular_floor(m.dagger())
        rec = frequency_record(None, None, res, rep,
                               np.linalg.inv(dense_matrix(m)))
        rec["warning"] = None if res.warning is None else str(res.warning)
        records.append(rec)
    else:
        p = _siam(args)
        h = siam_hamiltonian(p)
        gs = exact_ground_state(h)
        omegas = [args.omega] if args.n_omega <= 1 else _grid(args)
        for w in omegas:
            b_e, c_h = shifted_operators(h, gs.energy, ComplexFrequency(float(w), args.delta))
            for part, op in (("e", b_e), ("h", c_h)):
                m = op.dagger()
                res = apply_inverse(m, args.kappa, args.eps, mode=args.mode,
                                    backend=args.backend)
                rec = frequency_record(w, args.delta, res, singular_floor(op),
                                       np.linalg.inv(dense_matrix(m)))
                rec["part"] = part
                rec["warning"] = None if res.warning is None else str(res.warning)
                records.append(rec)
    _emit_json(args, {"results": records})
    flagged = sum(r["warning"] is not None for r in records)
    if flagged:
        print(f"warning: {flagged} inversion(s) had singular values below 1/kappa",
              file=sys.stderr)
    return EXIT_OK


def cmd_spectral(args):
    p = _siam(args)
    scan = spectral_scan(p, _grid(args), args.delta, _solver(args), threads=args.threads)
    note = ""
    if scan.flagged.any():
        bad = scan.omega[scan.flagged]
        note = f"# below-1/kappa frequencies: {' '.join(repr(float(w)) for w in bad)}\n"
        print(f"warning: {len(bad)} frequencies have singular values below 1/kappa",
              file=sys.stderr)
    _emit(args, _comment(args) + note + scan.to_csv())
    return EXIT_OK


def cmd_dmft(args):
    solver = _solver(args)
    try:
        st = dmft_loop(args.U, args.zeta, args.v_init, solver, args.delta, args.max_iter)
    except ConvergenceError as exc:
        _emit_json(args, {"converged": False, "trajectory": exc.trajectory,
                          "residual": exc.residual})
        raise
    _emit_json(args, {"converged": st.converged, "U": st.U, "V": st.V,
                      "V_analytic": analytic_bath_V(st.U), "iterations": st.iterations,
                      "z_qp": st.z_qp, "sigma_imp": st.sigma_imp, "trajectory": st.trajectory})
    return EXIT_OK


def cmd_mott(args):
    curves = mott_scan(_pairs(args.pairs), _solver(args), _grid(args), args.delta,
                       args.interpretation, args.combine, threads=args.threads)
    _emit(args, _comment(args) + mott_csv(curves))
    return EXIT_OK


def cmd_gatecount(args):
    a, source = _operator(args)
    rep = gate_counts(a, limit=args.limit)
    _emit_json(args, {"source": source, "counts": rep.to_dict()})
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser

def _add_siam(p, with_frequency=False):
    g = p.add_argument_group("SIAM parameters")
    g.add_argument("--U", type=float, default=4.0)
    g.add_argument("--V", type=float, default=None, help="bath coupling (default: analytic)")
    g.add_argument("--auto-V", action="store_true", help="use the analytic self-consistent V")
    g.add_argument("--mu", type=float, default=None, help="chemical potential (default U/2)")
    g.add_argument("--eps2", type=float, default=0.0)
    g.add_argument("--t", type=float, default=1.0)
    g.add_argument("--ph-symmetric", action="store_true", help="force mu=U/2, eps2=0")
    if with_frequency:
        g.add_argument("--which", choices=("hamiltonian", "electron", "hole"),
                       default="electron", help="which SIAM operator to use")
        g.add_argument("--omega", type=float, default=0.0)
        g.add_argument("--delta", type=float, default=0.1)


def _add_source(p):
    p.add_argument("--pauli", help="PauliSum text file (overrides SIAM options)")
    p.add_argument("--random", help="random PauliSum NQUBITS:NTERMS drawn with --seed")
    _add_siam(p, with_frequency=True)


def _add_inverse(p, solver=True):
    g = p.add_argument_group("inversion")
    if solver:
        g.add_argument("--solver", choices=("qsvt", "classical"), default="qsvt")
    g.add_argument("--mode", choices=("ideal", "circuit"), default="ideal")
    g.add_argument("--kappa", type=float, default=50.0)
    g.add_argument("--eps", type=float, default=DEFAULT_EPS)
    g.add_argument("--backend", choices=("dense", "gates"), default="dense",
                   help="circuit-mode simulation of the encoding")


def _add_grid(p):
    g = p.add_argument_group("frequency grid")
    g.add_argument("--omega-min", type=float, default=-10.0)
    g.add_argument("--omega-max", type=float, default=10.0)
    g.add_argument("--n-omega", type=int, default=401)
    g.add_argument("--delta", type=float, default=0.1)


def _add_globals(p, suppress: bool):
    kw = {"default": argparse.SUPPRESS} if suppress else {}
    p.add_argument("--out", help="output file (default stdout)", **kw)
    p.add_argument("--threads", type=int, help="worker threads over frequencies",
                   **(kw or {"default": 1}))
    p.add_argument("--seed", type=int, help="seed for random inputs", **(kw or {"default": 0}))
    p.add_argument("--config", help="JSON options file, or any output with an embedded config",
                   **kw)


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="qsvt-greens", description=__doc__.splitlines()[0])
    top.add_argument("--version", action="version", version=__version__)
    _add_globals(top, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _add_globals(common, suppress=True)
    sub = top.add_subparsers(dest="command", metavar="command")
    _orig = sub.add_parser
    sub.add_parser = lambda *a, **k: _orig(*a, parents=[common], **k)

    p = sub.add_parser("hamiltonian", help="write the SIAM PauliSum")
    _add_siam(p)
    p.set_defaults(func=cmd_hamiltonian)

    p = sub.add_parser("phases", help="1/x polynomial and QSP phases")
    p.add_argument("--kappa", type=float, default=4.0)
    p.add_argument("--eps", type=float, default=1e-6)
    p.add_argument("--tol", type=float, default=1e-8, help="phase verification tolerance")
    p.add_argument("--max-degree", type=int, default=DEFAULT_MAX_DEGREE)
    p.add_argument("--convention", choices=("qsp", "qsvt"), default="qsp")
    p.add_argument("--import", dest="import_file", help="read phases from a phase file")
    p.add_argument("--scan", type=int, default=0, metavar="N",
                   help="emit P(a) on N grid points (a=0 dropped) instead of phases")
    p.set_defaults(func=cmd_phases)

    p = sub.add_parser("block-encode", help="LCU block encoding summary")
    _add_source(p)
    p.add_argument("--gates", help="also write the gate list to this file")
    p.set_defaults(func=cmd_block_encode)

    p = sub.add_parser("invert", help="QSVT inverse with per-frequency JSON records")
    _add_source(p)
    p.add_argument("--n-omega", type=int, default=1)
    p.add_argument("--omega-min", type=float, default=-10.0)
    p.add_argument("--omega-max", type=float, default=10.0)
    _add_inverse(p, solver=False)
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("spectral", help="A(omega) scan as CSV")
    _add_siam(p)
    _add_grid(p)
    _add_inverse(p)
    p.set_defaults(func=cmd_spectral)

    p = sub.add_parser("dmft", help="two-site DMFT self-consistency loop")
    p.add_argument("--U", type=float, default=4.0)
    p.add_argument("--zeta", type=float, default=1e-3)
    p.add_argument("--v-init", type=float, default=0.5)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--max-iter", type=int, default=500)
    _add_inverse(p)
    p.set_defaults(func=cmd_dmft, solver="classical")

    p = sub.add_parser("mott", help="Bethe-lattice DOS across (U, V) pairs as CSV")
    p.add_argument("--pairs", default=MOTT_PAIRS, help="comma list of U:V (V may be 'auto')")
    p.add_argument("--interpretation", choices=("real", "complex"), default="real")
    p.add_argument("--combine", choices=("dos", "sigma"), default="dos")
    _add_grid(p)
    _add_inverse(p)
    p.set_defaults(func=cmd_mott)

    p = sub.add_parser("gatecount", help="gate census of the encoding circuit as JSON")
    _add_source(p)
    p.add_argument("--limit", type=int, default=6,
                   help="largest control count expanded into CNOT + phase gates")
    p.set_defaults(func=cmd_gatecount)
    return top


def _load_config(path: str) -> dict:
    """Option defaults from a JSON file, a JSON output, or a ``# config`` header line."""
    text = _read(path)
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError:
        lines = [ln.lstrip("# ").strip() for ln in text.splitlines()]
        found = [ln[len("config "):] for ln in lines if ln.startswith("config {")]
        if not found:
            raise ValidationError(f"{path}: neither JSON nor an embedded config line") from None
        cfg = json.loads(found[0])
    if not isinstance(cfg, dict):
        raise ValidationError("config file must hold a JSON object")
    return cfg.get("config", cfg)


def parse_args(argv=None) -> argparse.Namespace:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        cfg = _load_config(known.config)
        command = cfg.pop("command", None)
        if command and command not in argv:
            argv = argv + [command]
        sub = parser._subparsers._group_actions[0].choices.get(command or "")
        target = sub if sub is not None else parser
        valid = {a.dest for a in target._actions}
        unknown = set(cfg) - valid - {"seed"}
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        target.set_defaults(**{k: v for k, v in cfg.items() if k in valid})
        if "seed" in cfg:
            parser.set_defaults(seed=cfg["seed"])
    args = parser.parse_args(argv)
    if args.command is None:
        parser.error("a command is required")
    if args.threads < 1:
        raise ValidationError("--threads must be >= 1")
    return args


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ConvergenceError as exc:
        print(f"nonconvergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except ResourceError as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
