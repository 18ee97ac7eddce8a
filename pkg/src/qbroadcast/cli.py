"""Command line entry point: ``qbroadcast {simulate,sweep,resources,export-qasm}``.

Angles are given in units of pi (``--theta 0.25`` is pi/4). Every option
may also come from a JSON file passed with ``--config``; flags given on the
command line take precedence.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path
from typing import Any, Optional

from . import protocols as pr
from .channels import ordered_pairs
from .metrics import receiver_fidelities, resource_count
from .noise import NoiseSpec
from .qasm import CIRCUITS, export_qasm
from .sweep import SweepConfig, format_csv, run_sweep

DEFAULT_SHOTS = 8192

PROTOCOLS = (
    "cluster",
    "cluster-fig3a",
    "bell-rsp",
    "bell-teleport",
    "probabilistic",
    "joint",
    "phase-chain",
    "controlled",
    "multidirectional",
)

SIMULATE_DEFAULTS: dict[str, Any] = {
    "protocol": "bell-rsp",
    "target": "real_polar",
    "theta": 0.25,
    "phi": 0.0,
    "m": 2,
    "noise": None,
    "p": 0.0,
    "mode": "transmitted",
    "seed": 0,
    "shots": 0,
    "disclose": False,
    "links": None,
    "phases": None,
    "parties": 2,
    "adaptive": True,
    "timing": False,
    "output": None,
}

SWEEP_DEFAULTS: dict[str, Any] = {
    "noise_types": "all",
    "mode": "per_gate",
    "start": 0.0,
    "stop": 0.5,
    "step": 0.05,
    "channels": "both",
    "workers": None,
    "seed": 0,
    "output": None,
}

RESOURCE_DEFAULTS: dict[str, Any] = {"m": None, "n": None, "json": False, "seed": 0, "output": None}


def _num(x: float) -> float:
    # 12 significant digits keeps reports byte-stable across platforms.
    return float(f"{x:.12g}")


def _merge(args: argparse.Namespace, defaults: dict[str, Any]) -> dict[str, Any]:
    cfg = dict(defaults)
    if getattr(args, "config", None):
        loaded = json.loads(Path(args.config).read_text())
        unknown = sorted(set(loaded) - set(defaults))
        if unknown:
            raise ValueError(f"unknown config keys: {unknown}")
        cfg.update(loaded)
    for key, value in vars(args).items():
        if value is not None and key in defaults:
            cfg[key] = value
    return cfg


def _target(cfg) -> pr.KnownQubit:
    theta, phi = math.pi * float(cfg["theta"]), math.pi * float(cfg["phi"])
    kind = cfg["target"]
    if kind == pr.REAL_POLAR:
        return pr.KnownQubit.real_polar(theta)
    if kind == pr.EQUATORIAL:
        return pr.KnownQubit.equatorial(phi)
    if kind == pr.GENERAL:
        return pr.KnownQubit.general(theta, phi)
    raise ValueError(f"unknown target class {kind!r}")


def _noise(cfg) -> Optional[NoiseSpec]:
    if not cfg["noise"]:
        return None
    return NoiseSpec.of(cfg["noise"], float(cfg["p"]), cfg["mode"])


def _parse_floats(value) -> list[float]:
    if isinstance(value, str):
        return [float(x) for x in value.split(",") if x]
    return [float(x) for x in value]


def _link(item) -> tuple[float, float]:
    # A bare "a" stands for a|00> + sqrt(1 - a^2)|11>.
    parts = [float(x) for x in (item.split(":") if isinstance(item, str) else item)]
    if len(parts) == 1:
        return parts[0], math.sqrt(max(0.0, 1 - parts[0] ** 2))
    if len(parts) != 2:
        raise ValueError(f"link {item!r} must be 'a' or 'a:b'")
    return parts[0], parts[1]


def _links(value) -> list[tuple[float, float]]:
    # "0.8:0.6,0.9" or [[0.8, 0.6], [0.9]]
    if isinstance(value, str):
        value = [item for item in value.split(",") if item]
    return [_link(item) for item in value]


def run_protocol(cfg) -> tuple[pr.Transcript, Any]:
    """Dispatch to a protocol; returns the transcript and the fidelity target(s)."""
    name, noise, m = cfg["protocol"], _noise(cfg), int(cfg["m"])
    if name == "cluster":
        t = _target(cfg)
        return pr.run_cluster_broadcast(t, noise), t
    if name == "cluster-fig3a":
        t = _target(cfg)
        return pr.run_cluster_broadcast(t, noise, variant="fig3a"), t
    if name in ("bell-rsp", "bell-teleport"):
        t = _target(cfg)
        return pr.run_bell_rsp_broadcast(t, m, name.split("-")[1], noise), t
    if name == "probabilistic":
        t = _target(cfg)
        links = _links(cfg["links"]) if cfg["links"] else [(math.sqrt(0.5), math.sqrt(0.5))] * m
        return pr.run_probabilistic_broadcast(t, links, noise), t
    if name == "joint":
        theta, phi = math.pi * float(cfg["theta"]), math.pi * float(cfg["phi"])
        tr = pr.run_joint_broadcast(theta, phi, m, noise, adaptive=bool(cfg["adaptive"]))
        return tr, tr.info["target"]
    if name == "phase-chain":
        phases = [math.pi * x for x in _parse_floats(cfg["phases"] or [cfg["phi"]])]
        tr = pr.run_phase_chain(math.pi * float(cfg["theta"]), phases, m, noise)
        return tr, tr.info["target"]
    if name == "controlled":
        t = _target(cfg)
        return pr.run_controlled_broadcast(t, m, bool(cfg["disclose"]), cfg["seed"], noise), t
    if name == "multidirectional":
        t = _target(cfg)
        n = int(cfg["parties"])
        targets = {pair: t for pair in ordered_pairs(n)}
        return pr.run_multidirectional(n, targets, noise), targets
    raise ValueError(f"unknown protocol {name!r}; expected one of {PROTOCOLS}")


def _port_name(port) -> str:
    return f"{port[0]}->{port[1]}" if isinstance(port, tuple) else str(port)


def build_report(cfg) -> dict:
    started = time.perf_counter()
    transcript, target = run_protocol(cfg)
    fids = receiver_fidelities(transcript, target)
    ports = transcript.ports
    report: dict[str, Any] = {
        "protocol": transcript.protocol,
        "config": {k: cfg[k] for k in sorted(cfg) if k not in ("output", "timing")},
        "branches": [
            {
                "outcome": b.label,
                "probability": _num(b.probability),
                "success": b.success,
                "messages": [{"from": str(x.source), "to": str(x.dest), "bits": x.bits} for x in b.messages],
                "corrections": [{"party": str(c.party), "pauli": c.pauli} for c in b.corrections],
                "fidelity": {_port_name(p): _num(fids[p].per_branch[i]) for p in ports},
            }
            for i, b in enumerate(transcript.branches)
        ],
        "fidelity": {_port_name(p): _num(fids[p].average) for p in ports},
        "success_probability": _num(transcript.success_probability),
        "resources": {
            **{k: int(v) for k, v in transcript.resources.items()},
            "classical_bits": {
                str(r): transcript.bits_to(r)
                for r in sorted({m.dest for m in transcript.branches[0].messages})
            },
        },
        "seed": cfg["seed"],
    }
    shots = int(cfg["shots"] or 0)
    if shots:
        report["shots"] = shots
        report["histogram"] = pr.sample_outcomes(transcript, shots, cfg["seed"])
    if cfg["timing"]:
        report["elapsed_s"] = time.perf_counter() - started
    return report


def _emit(text: str, output: Optional[str]):
    if output:
        Path(output).write_text(text, newline="")
    else:
        sys.stdout.write(text)


def cmd_simulate(args) -> int:
    cfg = _merge(args, SIMULATE_DEFAULTS)
    report = build_report(cfg)
    _emit(json.dumps(report, indent=2, sort_keys=False) + "\n", cfg["output"])
    return 0


def _sweep_config(cfg) -> SweepConfig:
    kinds = cfg["noise_types"]
    if isinstance(kinds, str):
        kinds = SweepConfig.noise_types if kinds == "all" else tuple(kinds.split(","))
    channels = cfg["channels"]
    if isinstance(channels, str):
        channels = ("bell-pair", "cluster") if channels == "both" else tuple(channels.split(","))
    return SweepConfig(tuple(kinds), cfg["mode"], float(cfg["start"]), float(cfg["stop"]), float(cfg["step"]), tuple(channels))


def cmd_sweep(args) -> int:
    cfg = _merge(args, SWEEP_DEFAULTS)
    rows = run_sweep(_sweep_config(cfg), cfg["workers"])
    _emit(format_csv(rows), cfg["output"])
    return 0


def cmd_resources(args) -> int:
    cfg = _merge(args, RESOURCE_DEFAULTS)
    if cfg["m"] is None or cfg["n"] is None:
        raise ValueError("resources needs --m and --n")
    rc = resource_count(int(cfg["m"]), int(cfg["n"]))
    if cfg["json"]:
        text = json.dumps({"m": rc.m, "n": rc.n, "bell_pairs": rc.bell_pairs}) + "\n"
    else:
        text = f"{rc.bell_pairs}\n"
    _emit(text, cfg["output"])
    return 0


def cmd_export_qasm(args) -> int:
    _emit(export_qasm(args.circuit), args.output)
    return 0


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON file with option values")
    p.add_argument("--seed", type=int)
    p.add_argument("--output", "-o", help="write to this file instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qbroadcast", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one protocol and print a JSON report")
    _common(sim)
    sim.add_argument("--protocol", choices=PROTOCOLS)
    sim.add_argument("--target", choices=pr.TARGET_KINDS)
    sim.add_argument("--theta", type=float, help="polar angle in units of pi")
    sim.add_argument("--phi", type=float, help="phase in units of pi")
    sim.add_argument("--m", type=int, help="number of receivers")
    sim.add_argument("--noise", choices=["bit_flip", "depolarizing", "amplitude_damping", "phase_damping"])
    sim.add_argument("--p", type=float, help="noise probability")
    sim.add_argument("--mode", choices=["transmitted", "per_gate"])
    sim.add_argument("--shots", type=int, nargs="?", const=DEFAULT_SHOTS,
                     help=f"also sample outcomes (default {DEFAULT_SHOTS} when given without a value)")
    sim.add_argument("--disclose", action="store_true", default=None)
    sim.add_argument("--links", help="non-maximal links a|00> + b|11> as a:b (or just a), comma separated")
    sim.add_argument("--phases", help="phase-chain phases in units of pi, comma separated")
    sim.add_argument("--parties", type=int)
    sim.add_argument("--non-adaptive", dest="adaptive", action="store_false", default=None)
    sim.add_argument("--timing", action="store_true", default=None,
                     help="include wall-clock time (makes output non-reproducible)")
    sim.set_defaults(func=cmd_simulate)

    sw = sub.add_parser("sweep", help="fidelity of the preparation circuits versus noise, as CSV")
    _common(sw)
    sw.add_argument("--noise-types", help="comma separated noise kinds or 'all'")
    sw.add_argument("--mode", choices=["transmitted", "per_gate"])
    sw.add_argument("--start", type=float)
    sw.add_argument("--stop", type=float)
    sw.add_argument("--step", type=float)
    sw.add_argument("--channels", help="bell-pair, cluster or both")
    sw.add_argument("--workers", type=int)
    sw.set_defaults(func=cmd_sweep)

    res = sub.add_parser("resources", help="Bell pairs needed for m coefficients and n receivers")
    _common(res)
    res.add_argument("--m", type=int)
    res.add_argument("--n", type=int)
    res.add_argument("--json", action="store_true", default=None)
    res.set_defaults(func=cmd_resources)

    qa = sub.add_parser("export-qasm", help="print a circuit as OpenQASM 2.0")
    qa.add_argument("circuit", choices=sorted(CIRCUITS))
    qa.add_argument("--output", "-o")
    qa.set_defaults(func=cmd_export_qasm)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
