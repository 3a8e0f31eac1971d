"""JSON fragments for states, Bloch families, channels and circuits.

Every parser rejects unknown keys and reports the offending field by its
dotted path, e.g. ``state.components[1].weight``.  Complex matrices are
nested lists whose entries are either numbers or ``[re, im]`` pairs.

State      {"kind": "cat", "n": 4}
           {"kind": "pair", "f": "0011", "g": "1100"}
           {"kind": "separable", "n": 4, "terms": 8, "seed": 17}
           {"kind": "basis", "word": "0000"}, {"kind": "pi" | "maximally_mixed", "n": 3}
           {"kind": "product", "angles": [[theta, phi], ...]}
           {"kind": "pair_mixture", "pairs": [["0011", "1100", 0.5], ...]}
           {"kind": "mixture", "components": [{"weight": 0.5, "state": {...}}, ...]}
           {"kind": "matrix", "m": [[...], ...]}
Family     {"angles": [[theta, phi], ...]} or {"canonical": "P"}
Channel    {"channel": "G" | "D", "w": 0.1}
           {"channel": "Gl" | "Dl", "l": 2, "mode": "exact" | "mc", "samples": 10000, "seed": 7}
           {"channel": "local", "kind": "dephase" | "bitflip" | "depolarize", "qubit": 1}
Circuit    {"n": 4, "w": 0.1, "error_model": "depolarizing", "init": {state},
            "gates": [{"u1": {"q": 1, "m": [[...]]}}, {"u2": {"qi": 1, "qj": 2, "m": [[...]]}}]}
           a gate may name a standard matrix instead of "m": "gate": "H" | "X" | "CNOT" | ...
"""

from __future__ import annotations

import json
import numbers
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import channels, states
from .circuits import CNOT, HADAMARD, Circuit, Gate
from .linalg import MAX_QUBITS
from .observables import CANONICAL_P, BlochFamily


class SpecError(ValueError):
    pass


NAMED_GATES = {
    "H": HADAMARD,
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
    "S": np.diag([1, 1j]).astype(np.complex128),
    "T": np.diag([1, np.exp(1j * np.pi / 4)]),
    "CNOT": CNOT,
    "CZ": np.diag([1, 1, 1, -1]).astype(np.complex128),
    "SWAP": np.eye(4, dtype=np.complex128)[[0, 2, 1, 3]],
}


def load_json(text: str, where: str = "input"):
    """Parse inline JSON, or read it from a file when `text` names one."""
    if not text.lstrip().startswith(("{", "[")) and Path(text).is_file():
        text = Path(text).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"{where}: malformed JSON ({exc.msg} at line {exc.lineno} column {exc.colno})") from None


def _obj(spec, where: str, required=(), optional=()) -> dict:
    if not isinstance(spec, dict):
        raise SpecError(f"{where}: expected a JSON object, got {type(spec).__name__}")
    unknown = sorted(set(spec) - set(required) - set(optional))
    if unknown:
        raise SpecError(f"{where}.{unknown[0]}: unknown key (allowed: {', '.join(sorted(set(required) | set(optional)))})")
    for key in required:
        if key not in spec:
            raise SpecError(f"{where}.{key}: missing required key")
    return spec


def _int(value, where: str, lo=None, hi=None) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise SpecError(f"{where}: expected an integer, got {value!r}")
    if (lo is not None and value < lo) or (hi is not None and value > hi):
        raise SpecError(f"{where}: {value} out of range [{lo}, {hi}]")
    return int(value)


def _float(value, where: str, lo=None, hi=None) -> float:
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise SpecError(f"{where}: expected a number, got {value!r}")
    if (lo is not None and value < lo) or (hi is not None and value > hi):
        raise SpecError(f"{where}: {value} out of range [{lo}, {hi}]")
    return float(value)


def _word(value, where: str) -> str:
    if not isinstance(value, str) or not value or set(value) - {"0", "1"}:
        raise SpecError(f"{where}: expected a binary word such as \"0101\", got {value!r}")
    return value


def decode_matrix(value, where: str) -> np.ndarray:
    def entry(x, at):
        if isinstance(x, list) and len(x) == 2 and all(isinstance(v, numbers.Real) for v in x):
            return complex(x[0], x[1])
        if isinstance(x, numbers.Real) and not isinstance(x, bool):
            return complex(x)
        raise SpecError(f"{at}: matrix entries must be numbers or [re, im] pairs, got {x!r}")

    if not isinstance(value, list) or not value or not all(isinstance(r, list) for r in value):
        raise SpecError(f"{where}: expected a square matrix as a list of rows")
    dim = len(value)
    if any(len(r) != dim for r in value):
        raise SpecError(f"{where}: matrix is not square")
    return np.array([[entry(x, f"{where}[{i}][{j}]") for j, x in enumerate(r)]
                     for i, r in enumerate(value)], dtype=np.complex128)


def encode_matrix(m) -> list:
    m = np.asarray(m, dtype=np.complex128)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def _angles(value, where: str) -> np.ndarray:
    if not isinstance(value, list) or not value:
        raise SpecError(f"{where}: expected a list of [theta, phi] pairs")
    out = []
    for k, pair in enumerate(value):
        if not isinstance(pair, list) or len(pair) != 2:
            raise SpecError(f"{where}[{k}]: expected a [theta, phi] pair")
        out.append([_float(pair[0], f"{where}[{k}][0]"), _float(pair[1], f"{where}[{k}][1]")])
    if len(out) > MAX_QUBITS:
        raise SpecError(f"{where}: {len(out)} qubits exceeds the maximum of {MAX_QUBITS}")
    return np.array(out)


# ---------------------------------------------------------------- states

def parse_state(spec, where: str = "state") -> np.ndarray:
    if not isinstance(spec, dict) or "kind" not in spec:
        raise SpecError(f"{where}.kind: missing required key")
    kind = spec["kind"]
    n_range = dict(lo=1, hi=MAX_QUBITS)
    try:
        if kind in ("cat", "pi", "maximally_mixed"):
            _obj(spec, where, ("kind", "n"))
            return states.standard_state(kind, _int(spec["n"], f"{where}.n", **n_range))
        if kind == "basis":
            _obj(spec, where, ("kind", "word"), ("n",))
            word = _word(spec["word"], f"{where}.word")
            if "n" in spec and _int(spec["n"], f"{where}.n", **n_range) != len(word):
                raise SpecError(f"{where}.n: does not match the word length {len(word)}")
            if len(word) > MAX_QUBITS:
                raise SpecError(f"{where}.word: {len(word)} qubits exceeds the maximum of {MAX_QUBITS}")
            return states.standard_state("basis", len(word), word)
        if kind == "pair":
            _obj(spec, where, ("kind", "f", "g"))
            return states.pair_superposition(_word(spec["f"], f"{where}.f"), _word(spec["g"], f"{where}.g"))
        if kind == "pair_mixture":
            _obj(spec, where, ("kind", "pairs"))
            pairs = spec["pairs"]
            if not isinstance(pairs, list) or not pairs:
                raise SpecError(f"{where}.pairs: expected a non-empty list of [f, g, weight]")
            parsed = []
            for k, p in enumerate(pairs):
                at = f"{where}.pairs[{k}]"
                if not isinstance(p, list) or len(p) != 3:
                    raise SpecError(f"{at}: expected [f, g, weight]")
                parsed.append((_word(p[0], at + "[0]"), _word(p[1], at + "[1]"), _float(p[2], at + "[2]")))
            return states.pair_mixture(parsed)[0]
        if kind == "separable":
            _obj(spec, where, ("kind", "n", "terms"), ("seed",))
            return states.random_separable(
                _int(spec["n"], f"{where}.n", **n_range),
                _int(spec["terms"], f"{where}.terms", lo=1),
                _int(spec.get("seed", 0), f"{where}.seed", lo=0),
            )
        if kind == "product":
            _obj(spec, where, ("kind", "angles"))
            angles = _angles(spec["angles"], f"{where}.angles")
            return states.product_state([states.qubit_state(t, p) for t, p in angles])
        if kind == "mixture":
            _obj(spec, where, ("kind", "components"))
            comps = spec["components"]
            if not isinstance(comps, list) or not comps:
                raise SpecError(f"{where}.components: expected a non-empty list")
            total, rho = 0.0, None
            for k, comp in enumerate(comps):
                at = f"{where}.components[{k}]"
                _obj(comp, at, ("weight", "state"))
                wgt = _float(comp["weight"], f"{at}.weight", lo=0.0)
                part = parse_state(comp["state"], f"{at}.state")
                if rho is not None and part.shape != rho.shape:
                    raise SpecError(f"{at}.state: qubit count differs from earlier components")
                rho = wgt * part if rho is None else rho + wgt * part
                total += wgt
            if abs(total - 1.0) > 1e-12:
                raise SpecError(f"{where}.components: weights sum to {total!r}, expected 1")
            return rho
        if kind == "matrix":
            _obj(spec, where, ("kind", "m"))
            m = decode_matrix(spec["m"], f"{where}.m")
            states.n_qubits(m)
            report = states.validate_density(m)
            if not report.ok:
                raise SpecError(f"{where}.m: not a valid density matrix ({report})")
            return m
    except states.StateError as exc:
        raise SpecError(f"{where}: {exc}") from None
    raise SpecError(f"{where}.kind: unknown state kind {kind!r}")


# ---------------------------------------------------------------- families

def parse_family(spec, n: int, where: str = "family"):
    if spec is None:
        return None
    if isinstance(spec, str):
        if spec != CANONICAL_P:
            raise SpecError(f"{where}: unknown canonical family {spec!r}")
        return CANONICAL_P
    if isinstance(spec, dict) and "canonical" in spec:
        _obj(spec, where, ("canonical",))
        if spec["canonical"] != CANONICAL_P:
            raise SpecError(f"{where}.canonical: only \"P\" is defined, got {spec['canonical']!r}")
        return CANONICAL_P
    _obj(spec, where, ("angles",))
    angles = _angles(spec["angles"], f"{where}.angles")
    if len(angles) != n:
        raise SpecError(f"{where}.angles: {len(angles)} pairs for a {n}-qubit state")
    try:
        return BlochFamily(angles)
    except ValueError as exc:
        raise SpecError(f"{where}.angles: {exc}") from None


# ---------------------------------------------------------------- channels

@dataclass(frozen=True)
class ChannelSpec:
    channel: str
    w: float = 0.0
    l: int = 0
    kind: str = ""
    qubit: int = 0
    config: channels.InstrumentConfig = channels.InstrumentConfig()

    def apply(self, rho) -> channels.InstrumentResult:
        if self.channel == "G":
            return channels.apply_G(rho, self.w)
        if self.channel == "D":
            return channels.apply_D(rho, self.w)
        if self.channel == "Gl":
            return channels.apply_Gl(rho, self.l, self.config)
        if self.channel == "Dl":
            return channels.apply_Dl(rho, self.l, self.config)
        return channels.InstrumentResult(channels.apply_local(self.kind, self.qubit, rho), "exact", 1)


def parse_channel(spec, where: str = "channel") -> ChannelSpec:
    if not isinstance(spec, dict) or "channel" not in spec:
        raise SpecError(f"{where}.channel: missing required key")
    name = spec["channel"]
    if name in ("G", "D"):
        _obj(spec, where, ("channel", "w"))
        return ChannelSpec(name, w=_float(spec["w"], f"{where}.w", 0.0, 1.0))
    if name in ("Gl", "Dl"):
        _obj(spec, where, ("channel", "l"), ("mode", "samples", "seed"))
        mode = spec.get("mode", "exact")
        modes = {"exact": "exact", "mc": "monte_carlo", "monte_carlo": "monte_carlo"}
        if mode not in modes:
            raise SpecError(f"{where}.mode: expected \"exact\" or \"mc\", got {mode!r}")
        config = channels.InstrumentConfig(
            modes[mode],
            _int(spec.get("samples", 10000), f"{where}.samples", lo=1),
            _int(spec.get("seed", 0), f"{where}.seed", lo=0),
        )
        return ChannelSpec(name, l=_int(spec["l"], f"{where}.l", lo=0, hi=MAX_QUBITS), config=config)
    if name == "local":
        _obj(spec, where, ("channel", "kind", "qubit"))
        if spec["kind"] not in channels.KINDS:
            raise SpecError(f"{where}.kind: expected one of {', '.join(channels.KINDS)}, got {spec['kind']!r}")
        return ChannelSpec(name, kind=spec["kind"], qubit=_int(spec["qubit"], f"{where}.qubit", 1, MAX_QUBITS))
    raise SpecError(f"{where}.channel: unknown channel {name!r} (expected G, D, Gl, Dl or local)")


# ---------------------------------------------------------------- circuits

def _gate_matrix(body, where: str, dim: int) -> np.ndarray:
    if ("m" in body) == ("gate" in body):
        raise SpecError(f"{where}: give exactly one of \"m\" or \"gate\"")
    if "gate" in body:
        m = NAMED_GATES.get(body["gate"])
        if m is None or m.shape[0] != dim:
            names = [k for k, v in NAMED_GATES.items() if v.shape[0] == dim]
            raise SpecError(f"{where}.gate: unknown gate {body['gate']!r} (expected one of {', '.join(names)})")
        return m
    m = decode_matrix(body["m"], f"{where}.m")
    if m.shape[0] != dim:
        raise SpecError(f"{where}.m: expected a {dim}x{dim} matrix, got {m.shape[0]}x{m.shape[0]}")
    return m


def parse_circuit(spec, where: str = "circuit") -> Circuit:
    _obj(spec, where, ("n", "w", "gates"), ("error_model", "init"))
    n = _int(spec["n"], f"{where}.n", 1, MAX_QUBITS)
    w = _float(spec["w"], f"{where}.w", 0.0, 1.0)
    model = spec.get("error_model", "depolarizing")
    if model not in ("depolarizing", "dephasing"):
        raise SpecError(f"{where}.error_model: expected \"depolarizing\" or \"dephasing\", got {model!r}")
    init = spec.get("init", {"kind": "basis", "word": "0" * n})
    parse_state(init, f"{where}.init")
    if not isinstance(spec["gates"], list):
        raise SpecError(f"{where}.gates: expected a list")
    gates = []
    for k, g in enumerate(spec["gates"]):
        at = f"{where}.gates[{k}]"
        if not isinstance(g, dict) or len(g) != 1 or next(iter(g)) not in ("u1", "u2"):
            raise SpecError(f"{at}: expected {{\"u1\": {{...}}}} or {{\"u2\": {{...}}}}")
        (kind, body), = g.items()
        at = f"{at}.{kind}"
        try:
            if kind == "u1":
                _obj(body, at, ("q",), ("m", "gate"))
                q = _int(body["q"], f"{at}.q", 1, n)
                gates.append(Gate((q,), _gate_matrix(body, at, 2)))
            else:
                _obj(body, at, ("qi", "qj"), ("m", "gate"))
                qi, qj = _int(body["qi"], f"{at}.qi", 1, n), _int(body["qj"], f"{at}.qj", 1, n)
                gates.append(Gate((qi, qj), _gate_matrix(body, at, 4)))
        except ValueError as exc:
            if isinstance(exc, SpecError):
                raise
            raise SpecError(f"{at}: {exc}") from None
    try:
        return Circuit(n, w, model, init, gates)
    except ValueError as exc:
        raise SpecError(f"{where}: {exc}") from None


def circuit_to_json(c: Circuit) -> dict:
    gates = []
    for g in c.gates:
        if g.kind == "u1":
            gates.append({"u1": {"q": g.qubits[0], "m": encode_matrix(g.matrix)}})
        else:
            gates.append({"u2": {"qi": g.qubits[0], "qj": g.qubits[1], "m": encode_matrix(g.matrix)}})
    return {"n": c.n, "w": c.w, "error_model": c.error_model, "init": c.init, "gates": gates}
